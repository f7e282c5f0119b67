//! Triplet -> CSC conversion versus direct assembly.

use hexstiff::assemble::{assemble_direct, build_triplet, nnz_compression, triplet_to_csc};
use hexstiff::integrate::{integrate_all, BatchPlan, HostBackend, Mode};
use hexstiff::mesh::{generate_cube_mesh, StructuredGridSpec};
use hexstiff::sparseio::format_percent;

pub fn run() -> hexstiff::Result<()> {
    let mesh = generate_cube_mesh(&StructuredGridSpec::cube(10))?;
    let backend = HostBackend::new(2, u64::MAX)?;
    let values = integrate_all(&mesh, &backend, &BatchPlan::single(mesh.n_elements()), Mode::Sequential)?;

    let triplet = build_triplet(&mesh, &values)?;
    let csc = triplet_to_csc(&triplet);
    let direct = assemble_direct(&mesh, &values)?;
    println!("triplet entries: {}", triplet.nnz());
    println!("CSC entries:     {} (dim {})", csc.nnz(), csc.dim());
    println!("compression:     {} %", format_percent(nnz_compression(&triplet, &csc)));
    assert_eq!(csc, direct);
    println!("direct assembly gives the same matrix");
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
