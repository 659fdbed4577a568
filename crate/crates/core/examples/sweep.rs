//! Parameter sweep over box lengths and amplitudes; CSV on stdout.
//!
//! cargo run --release --example sweep > sweep.csv

use ksbox::experiments::{run_sweep, write_sweep_csv, Classification, InitialShape, SweepSpec};
use ksbox::{ExponentMode, SolverConfig};

fn main() -> ksbox::Result<()> {
    let spec = SweepSpec {
        lengths: vec![vec![1.0, 2.0, 3.0, 4.0], vec![2.0]],
        amplitudes: vec![0.01, 0.1, 1.0],
        shape: InitialShape::random(),
        resolution: vec![16, 16],
        solver: SolverConfig {
            record_every: 10,
            ..SolverConfig::new(1e-3, 1.0)
        },
        cs: 0.07,
        exponent_mode: ExponentMode::DimensionNCubed,
        classification: Classification::default(),
        seed: 7,
    };
    let rows = run_sweep(&spec)?;
    write_sweep_csv(std::io::stdout().lock(), 2, &rows)?;
    Ok(())
}
