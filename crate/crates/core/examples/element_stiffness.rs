//! Local stiffness of a single hex8 element.

use hexstiff::element::{local_stiffness, ElementGeometry};

pub fn run() -> hexstiff::Result<()> {
    let ke = local_stiffness(&ElementGeometry::cube(1.0), 1.0).map_err(|e| e.in_element(0))?;
    println!("unit cube, c = 1:");
    for row in ke.unpack() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:8.4}")).collect();
        println!("  {}", cells.join(" "));
    }

    // stretched brick; rows still sum to zero
    let brick = ElementGeometry::brick([0.0, 0.0, 0.0], 2.0, 1.0, 0.5);
    let kb = local_stiffness(&brick, 3.0).map_err(|e| e.in_element(0))?.unpack();
    let worst = kb.iter().map(|r| r.iter().sum::<f64>().abs()).fold(0.0, f64::max);
    println!("brick 2 x 1 x 0.5, c = 3: K[0][0] = {:.6}, max |row sum| = {worst:.1e}", kb[0][0]);
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
