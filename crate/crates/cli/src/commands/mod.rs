mod data;
mod experiments;
mod fit;

pub use data::{run_bandwidth, run_loglik};
pub use experiments::{run_benchmark, run_simulate, run_sweep};
pub use fit::{run_fit, run_grid};

use mebk::{CubatureSpec, PriorConfig};

use crate::args::{DataArgs, PriorArgs};
use crate::error::{CliError, CliResult};
use crate::input::{bundled_table, read_table, Table};

/// Columns accepted without `--allow-high-dim`.
pub const MAX_DIM: usize = 5;

pub fn load_data(args: &DataArgs) -> CliResult<Table> {
    let table = match (&args.input, &args.dataset) {
        (Some(path), _) => read_table(path)?,
        (None, Some(name)) => bundled_table(name)?,
        (None, None) => return Err(CliError::validation("one of --input or --dataset is required")),
    };
    let table = table.select(&args.columns)?;
    if table.d() > MAX_DIM && !args.allow_high_dim {
        return Err(CliError::validation(format!(
            "{} columns exceed the cap of {MAX_DIM}; pass --allow-high-dim to proceed",
            table.d()
        )));
    }
    Ok(table)
}

pub fn prior_for(args: &PriorArgs, n: usize, d: usize) -> CliResult<PriorConfig> {
    Ok(PriorConfig::new(args.alpha.resolve(n), vec![args.beta; d])?)
}

/// Default cubature for `d`, with quasi-Monte-Carlo points drawn from `seed`.
pub fn cubature_for(d: usize, seed: u64) -> CubatureSpec {
    match CubatureSpec::default_for(d) {
        CubatureSpec::QuasiMonteCarlo { points, .. } => CubatureSpec::QuasiMonteCarlo { points, seed },
        spec => spec,
    }
}
