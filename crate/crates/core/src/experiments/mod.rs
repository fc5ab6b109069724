//! Reference strategy spaces, sweep runners and table output.

pub mod output;
pub mod spaces;
pub mod sweep;

pub use output::{metadata_path, write_table_file, Cell, OutputFormat, Table};
pub use spaces::{builtin_space, BuiltinSpace, REFERENCE_BUDGET};
pub use sweep::{
    log_space, run_lambda_sweep, run_loss_sweep, run_poqa_sweep, run_sweep, Grid, SpaceDescription, SpaceRef,
    SweepConfig, SweepKind, SweepMetadata, SweepResult, SweepSpec,
};
