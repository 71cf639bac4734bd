//! Fixtures, data generation, dataset files and the timing harness.

mod datagen;
mod dataset;
mod fixtures;
mod report;
mod suite;

pub use datagen::gen_minitpch;
pub use dataset::{load_dataset, read_relation, save_dataset, write_relation, CATALOG_FILE};
pub use fixtures::{
    corpus, generated_q18, illustration1, illustration1_catalog, illustration2, inner_lineitem, q18,
    synthetic_db, table1, tpch_catalog, worked_plan, Fixture, ILLUSTRATION_1, ILLUSTRATION_2, Q18, SYNTHETIC,
};
pub use report::{emit_report, BenchCell, BenchReport, ReportFormat};
pub use suite::{run_suite, SuiteOptions};
