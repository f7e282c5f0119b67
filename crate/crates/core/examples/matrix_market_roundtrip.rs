//! Export the global matrix in Matrix Market format and read it back.

use hexstiff::mesh::{generate_cube_mesh, StructuredGridSpec};
use hexstiff::pipeline::{build_matrix, BuildConfig};
use hexstiff::sparseio::{read_matrix_market, write_matrix_market};

pub fn run() -> hexstiff::Result<()> {
    let mesh = generate_cube_mesh(&StructuredGridSpec::cube(2))?;
    let (m, _) = build_matrix(&mesh, &BuildConfig::default())?;
    let mut buf = Vec::new();
    write_matrix_market(&m, &mut buf)?;
    let text = String::from_utf8_lossy(&buf);
    for line in text.lines().take(6) {
        println!("{line}");
    }
    println!("... {} lines", text.lines().count());
    assert_eq!(read_matrix_market(&buf[..])?, m);
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
