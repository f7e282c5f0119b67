//! Storage requirements of triplet and CSC forms for growing cubes, from counts alone.

use hexstiff::assemble::{compression_ratio, structured_lower_nnz};
use hexstiff::element::PACKED_LEN;
use hexstiff::sparseio::{csc_memory, format_mb, format_percent, memory_saving, triplet_memory};

pub fn run() -> hexstiff::Result<()> {
    println!("{:>8} {:>9} {:>11} {:>9} {:>7} {:>10} {:>8} {:>8}", "FEs", "dim", "triplet", "CSC", "compr", "triplet MB", "CSC MB", "saving");
    for n in [10usize, 20, 40, 60, 80, 100, 200] {
        let n_el = (n * n * n) as u64;
        let dim = ((n + 1) * (n + 1) * (n + 1)) as u64;
        let nnz_t = n_el * PACKED_LEN as u64;
        let nnz_c = structured_lower_nnz(n, n, n);
        let (t_mb, c_mb) = (triplet_memory(nnz_t), csc_memory(nnz_c, dim));
        println!(
            "{n_el:>8} {dim:>9} {nnz_t:>11} {nnz_c:>9} {:>7} {:>10} {:>8} {:>8}",
            format_percent(compression_ratio(nnz_t as usize, nnz_c as usize)),
            format_mb(t_mb),
            format_mb(c_mb),
            format_percent(memory_saving(t_mb, c_mb)?),
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
