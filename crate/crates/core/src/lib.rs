//! Global sparse stiffness matrix construction for the 3D Poisson equation
//! on 8-node hexahedral meshes.
//!
//! The pipeline has two stages. Numerical integration computes the packed
//! lower triangle (36 values) of every element matrix, in parallel over
//! elements and in memory-bounded groups. Assembly then turns those values
//! into the lower triangle of the global matrix in CSC form, either through
//! a triplet → CSC conversion or directly from the connectivity.
//!
//! ```
//! use hexstiff::prelude::*;
//!
//! let mesh = generate_cube_mesh(&StructuredGridSpec::cube(10))?;
//! let (matrix, report) = build_matrix(&mesh, &BuildConfig::default())?;
//! assert_eq!(matrix.dim(), 1_331);
//! assert_eq!(report.nnz_csc, 15_561);
//! # Ok::<(), hexstiff::Error>(())
//! ```

pub mod assemble;
pub mod element;
pub mod error;
pub mod integrate;
pub mod mesh;
pub mod pipeline;
pub mod sparseio;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::assemble::{
        assemble_direct, build_triplet, map_local_to_global, nnz_compression, structured_lower_nnz, triplet_to_csc,
        DirectAssembler, LowerCscMatrix, TripletBuilder, TripletMatrix,
    };
    pub use crate::element::{local_stiffness, ElementGeometry, PackedLowerKe};
    pub use crate::error::{Error, Result};
    pub use crate::integrate::{
        integrate_all, integrate_groups, plan_batches, required_bytes, BatchPlan, ComputeBackend, HostBackend,
        LocalValuesBatch, Mode,
    };
    pub use crate::mesh::{generate_cube_mesh, load_mesh, save_mesh, Mesh, StructuredGridSpec};
    pub use crate::pipeline::{build_matrix, run_bench, Assembler, BuildConfig, BuildReport};
    pub use crate::sparseio::{export_matrix_market, import_matrix_market};
}
