use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use dynsleuth_core::report::{aggregate, load_report, render_table};

use crate::run::{manifest_path, Run};

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Attack and inference report files
    #[arg(long, num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    /// Output markdown table
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: ReportArgs) -> Result<()> {
    if args.inputs.is_empty() {
        bail!("no input reports given");
    }
    let reports = args
        .inputs
        .iter()
        .map(|p| load_report(p).with_context(|| format!("reading report {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    let rows = aggregate(&reports)?;
    let table = render_table(&rows);
    print!("{table}");
    let mut run = Run::start();
    run.config("inputs", &args.inputs)?;
    run.write_bytes(&args.out, table.as_bytes())?;
    run.finish(&manifest_path(&args.out))
}
