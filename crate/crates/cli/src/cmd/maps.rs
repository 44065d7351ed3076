use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use dynsleuth_core::gridworld::{random_map, render_map};
use dynsleuth_core::seeding::stream;

use super::{parse_cell, parse_size};
use crate::run::{manifest_path, Run};
use crate::settings::Settings;

pub const DEFAULT_MAX_TRIES: usize = 100_000;

#[derive(Debug, Args)]
pub struct GenMapsArgs {
    /// Number of maps [default: 20]
    #[arg(long)]
    pub count: Option<usize>,
    /// Grid size as HxW [default: 7x7]
    #[arg(long)]
    pub size: Option<String>,
    /// Goal cell as r,c [default: bottom-right corner]
    #[arg(long)]
    pub goal: Option<String>,
    /// Obstacle probability per non-goal cell [default: 0.3]
    #[arg(long)]
    pub density: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Extra key=value settings
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub sets: Vec<String>,
}

pub fn run(args: GenMapsArgs) -> Result<()> {
    let s = Settings::load(args.config.as_deref(), &args.sets)?;
    s.check_keys(&["count", "size", "goal", "density", "seed", "max_tries"], &[])?;
    let count = s.value(args.count, "count", 20usize)?;
    let (h, w) = parse_size(&s.value(args.size, "size", "7x7".to_string())?)?;
    let (gr, gc) = match s.optional(args.goal, "goal")? {
        Some(g) => parse_cell(&g)?,
        None => (h - 1, w - 1),
    };
    anyhow::ensure!(gr < h && gc < w, "goal {gr},{gc} outside a {h}x{w} grid");
    let density = s.value(args.density, "density", 0.3)?;
    let seed = s.value(args.seed, "seed", 0u64)?;
    let tries = s.value(None, "max_tries", DEFAULT_MAX_TRIES)?;

    let mut run = Run::start();
    run.config("count", count)?;
    run.config("size", [h, w])?;
    run.config("goal", [gr, gc])?;
    run.config("density", density)?;
    run.config("max_tries", tries)?;
    run.seed(seed);
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    for i in 0..count {
        let map = random_map(w, h, gr * w + gc, density, &mut stream(seed, "gen_maps", i as u64), tries)
            .with_context(|| format!("generating map {i}"))?;
        run.write_bytes(&args.out.join(format!("map_{i:03}.map")), render_map(&map).as_bytes())?;
    }
    println!("wrote {count} maps to {}", args.out.display());
    run.finish(&manifest_path(&args.out))
}
