//! Command-line driver: configure a verification run, print or write the
//! report, and exit 0 (all identities hold), 1 (a theorem-backed check
//! failed), or 2 (the requested configuration cannot run).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use bkfourier::checks::{self, Category, ConfigError, GroupSel, JobConfig};

#[derive(Parser)]
#[command(
    name = "bkfourier",
    version,
    about = "Exact Braverman-Kazhdan kernel checks over small finite fields"
)]
struct Cli {
    /// Presentations to check (comma separated): sl2, pgl2, gl2,
    /// gl2-char2, torus, quadform.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "sl2,pgl2,gl2,gl2-char2,torus,quadform"
    )]
    groups: Vec<String>,

    /// Field sizes (comma separated prime powers); omit for the per-group
    /// default grids.
    #[arg(long, value_delimiter = ',')]
    q: Vec<u32>,

    /// Check categories (comma separated): kernels, involutivity,
    /// extension, pushforward, quadform, gauss, or all.
    #[arg(long, value_delimiter = ',', default_value = "all")]
    checks: Vec<String>,

    /// Report format.
    #[arg(long, default_value = "text", value_parser = ["text", "json"])]
    format: String,

    /// Write the report to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads for the class-matrix convolutions (0 = automatic).
    #[arg(long, default_value_t = 0)]
    threads: usize,

    /// Write kernel matrices and torus tables as CSV into this directory.
    #[arg(long, value_name = "DIR")]
    export_tables: Option<PathBuf>,

    /// Refuse class matrices larger than this; the BKFOURIER_MATRIX_CAP
    /// environment variable overrides the flag.
    #[arg(long, default_value_t = 4096)]
    matrix_cap: usize,

    /// Refuse stack-sized involutivity checks above this field size.
    #[arg(long, default_value_t = 7)]
    stack_q_limit: u32,
}

fn build_config(cli: &Cli) -> Result<JobConfig, ConfigError> {
    let mut groups = Vec::new();
    for name in &cli.groups {
        let g = GroupSel::parse(name)
            .ok_or_else(|| ConfigError(format!("unknown group {:?}", name)))?;
        if !groups.contains(&g) {
            groups.push(g);
        }
    }
    let mut cats = Vec::new();
    for name in &cli.checks {
        if name == "all" {
            cats = Category::ALL.to_vec();
            break;
        }
        let c = Category::parse(name)
            .ok_or_else(|| ConfigError(format!("unknown check category {:?}", name)))?;
        if !cats.contains(&c) {
            cats.push(c);
        }
    }
    let matrix_cap = match std::env::var("BKFOURIER_MATRIX_CAP") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| ConfigError(format!("BKFOURIER_MATRIX_CAP={:?} is not a size", v)))?,
        Err(_) => cli.matrix_cap,
    };
    Ok(JobConfig {
        groups,
        qs: if cli.q.is_empty() {
            None
        } else {
            Some(cli.q.clone())
        },
        checks: cats,
        matrix_cap,
        stack_q_limit: cli.stack_q_limit,
        threads: cli.threads,
        export_dir: cli.export_tables.clone(),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error: {}", e);
            return ExitCode::from(2);
        }
    };
    if cfg.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global()
        {
            eprintln!("config error: cannot set thread count: {}", e);
            return ExitCode::from(2);
        }
    }
    let report = match checks::run(&cfg) {
        Ok(rep) => rep,
        Err(e) => {
            eprintln!("config error: {}", e);
            return ExitCode::from(2);
        }
    };
    let body = match cli.format.as_str() {
        "json" => report.to_json(),
        _ => report.render_text(),
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &body) {
                eprintln!("config error: cannot write {}: {}", path.display(), e);
                return ExitCode::from(2);
            }
        }
        None => print!("{}", body),
    }
    ExitCode::from(report.exit_code() as u8)
}
