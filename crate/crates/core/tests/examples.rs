//! Runs every cargo example as a test.

macro_rules! example {
    ($name:ident, $file:literal) => {
        #[allow(dead_code)]
        #[path = $file]
        mod $name;

        #[test]
        fn $name() {
            $name::run().unwrap();
        }
    };
}

example!(mesh_generation, "../examples/mesh_generation.rs");
example!(element_stiffness, "../examples/element_stiffness.rs");
example!(batched_integration, "../examples/batched_integration.rs");
example!(assembly_strategies, "../examples/assembly_strategies.rs");
example!(overlapped_pipeline, "../examples/overlapped_pipeline.rs");
example!(matrix_market_roundtrip, "../examples/matrix_market_roundtrip.rs");
example!(memory_table, "../examples/memory_table.rs");
