//! Full build with integration of the next group overlapping assembly of the current one.

use hexstiff::integrate::Mode;
use hexstiff::mesh::{generate_cube_mesh, StructuredGridSpec};
use hexstiff::pipeline::{build_matrix, Assembler, BuildConfig};

pub fn run() -> hexstiff::Result<()> {
    let mesh = generate_cube_mesh(&StructuredGridSpec::cube(16))?;
    let base = BuildConfig { workers: 2, ..Default::default() }.with_budget_mb(0.5)?;
    let (reference, _) = build_matrix(&mesh, &base)?;
    for assembler in [Assembler::Triplet, Assembler::Direct] {
        let config = BuildConfig { mode: Mode::Overlapped, assembler, ..base };
        let (m, report) = build_matrix(&mesh, &config)?;
        assert_eq!(m, reference);
        println!(
            "{assembler:>7}: {} groups, integration {:.1} %, assembly {:.1} %, total {:.4} s",
            report.group_count, report.pct_integration, report.pct_assembly, report.time_total_s
        );
    }
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
