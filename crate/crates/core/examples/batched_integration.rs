//! Split integration into groups under a memory budget.

use hexstiff::integrate::{integrate_all, plan_batches, required_bytes, BatchPlan, HostBackend, Mode};
use hexstiff::mesh::{generate_cube_mesh, StructuredGridSpec};

pub fn run() -> hexstiff::Result<()> {
    let mesh = generate_cube_mesh(&StructuredGridSpec::cube(12))?;
    let n_el = mesh.n_elements();
    let required = required_bytes(n_el);
    let budget = required / 3 + 1;
    let plan = plan_batches(required, budget, n_el)?;
    println!("{n_el} elements need {required} B; budget {budget} B -> {} groups", plan.group_count());
    for r in plan.ranges() {
        println!("  elements {:>5}..{:<5} ({})", r.start, r.end, r.len());
    }

    let backend = HostBackend::new(2, budget)?;
    let grouped = integrate_all(&mesh, &backend, &plan, Mode::Sequential)?;
    let whole = integrate_all(&mesh, &HostBackend::new(1, u64::MAX)?, &BatchPlan::single(n_el), Mode::Sequential)?;
    assert_eq!(grouped, whole);
    println!("grouped values identical to single-group run");
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
