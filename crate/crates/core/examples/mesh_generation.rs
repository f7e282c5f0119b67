//! Generate a structured cube mesh, write it to disk and read it back.

use hexstiff::mesh::{generate_cube_mesh, load_mesh, save_mesh, StructuredGridSpec};

pub fn run() -> hexstiff::Result<()> {
    let spec = StructuredGridSpec { nx: 4, ny: 3, nz: 2, h: 0.25, c0: 1.0 };
    let mesh = generate_cube_mesh(&spec)?;
    println!("{} nodes, {} elements", mesh.n_nodes(), mesh.n_elements());
    println!("element 0 nodes: {:?}", mesh.connectivity()[0]);

    let path = std::env::temp_dir().join(format!("hexstiff-example-{}.hexmesh", std::process::id()));
    save_mesh(&mesh, &path)?;
    let back = load_mesh(&path)?;
    std::fs::remove_file(&path)?;
    assert_eq!(back, mesh);
    println!("round trip through {} ok", path.display());
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
