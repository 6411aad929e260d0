//! CLI entry point: `dso <command> --config <path> [--out <dir>]
//! [--jobs N] [--seed S]`.
//!
//! A config file holding a top-level JSON array is a sweep: each element
//! runs as an independent sub-run writing to `<out>/run_<index>/`, with up
//! to `--jobs` runs in flight (default 1).

use dso::config::{parse_config_or_sweep, Command, Parsed, RunConfig};
use dso::run::{run, RunStatus};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

struct Args {
    command: Command,
    config: PathBuf,
    out: Option<PathBuf>,
    jobs: usize,
    seed: Option<u64>,
}

fn usage() -> String {
    "usage: dso <eig|optimize-shape|optimize-drift|joint|diagnose|radial|golden> \
     --config <path> [--out <dir>] [--jobs N] [--seed S]"
        .to_string()
}

fn parse_args() -> Result<Args, String> {
    let mut argv = std::env::args().skip(1);
    let command = argv.next().ok_or_else(usage).and_then(|c| {
        Command::parse(&c).ok_or_else(|| format!("unknown command {:?}\n{}", c, usage()))
    })?;
    let mut config = None;
    let mut out = None;
    let mut jobs = 1usize;
    let mut seed = None;
    while let Some(flag) = argv.next() {
        let mut value = |name: &str| {
            argv.next()
                .ok_or_else(|| format!("flag {} needs a value\n{}", name, usage()))
        };
        match flag.as_str() {
            "--config" => config = Some(PathBuf::from(value("--config")?)),
            "--out" => out = Some(PathBuf::from(value("--out")?)),
            "--jobs" => {
                jobs = value("--jobs")?
                    .parse()
                    .map_err(|_| format!("--jobs expects a positive integer\n{}", usage()))?;
                if jobs == 0 {
                    return Err(format!("--jobs expects a positive integer\n{}", usage()));
                }
            }
            "--seed" => {
                seed = Some(
                    value("--seed")?
                        .parse()
                        .map_err(|_| format!("--seed expects an integer\n{}", usage()))?,
                )
            }
            other => return Err(format!("unknown flag {:?}\n{}", other, usage())),
        }
    }
    let config = config.ok_or_else(|| format!("--config is required\n{}", usage()))?;
    Ok(Args {
        command,
        config,
        out,
        jobs,
        seed,
    })
}

fn apply_overrides(config: &mut RunConfig, args: &Args) -> Result<(), String> {
    if config.command != args.command {
        return Err(format!(
            "config command {:?} does not match CLI command {:?}",
            config.command.as_str(),
            args.command.as_str()
        ));
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    Ok(())
}

fn run_single(config: &RunConfig, base: &Path, out: Option<&Path>) -> i32 {
    match run(config, base, out) {
        Ok(RunStatus::Converged) => 0,
        Ok(RunStatus::Flagged) => {
            eprintln!("dso: run finished with a non-convergence flag");
            2
        }
        Err(e) => {
            eprintln!("dso: error: {}", e);
            1
        }
    }
}

fn main() -> ExitCode {
    let args = match parse_args() {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("{}", msg);
            return ExitCode::from(1);
        }
    };
    let base = args.config.parent().unwrap_or(Path::new(".")).to_path_buf();
    let parsed = match parse_config_or_sweep(&args.config) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("dso: error: {}", e);
            return ExitCode::from(1);
        }
    };
    let code = match parsed {
        Parsed::Single(mut config) => {
            if let Err(msg) = apply_overrides(&mut config, &args) {
                eprintln!("dso: error: {}", msg);
                return ExitCode::from(1);
            }
            run_single(&config, &base, args.out.as_deref())
        }
        Parsed::Sweep(mut configs) => {
            for c in configs.iter_mut() {
                if let Err(msg) = apply_overrides(c, &args) {
                    eprintln!("dso: error: {}", msg);
                    return ExitCode::from(1);
                }
            }
            let out_root = args.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            let worst = Arc::new(AtomicUsize::new(0));
            let next = Arc::new(AtomicUsize::new(0));
            let configs = Arc::new(configs);
            let mut handles = Vec::new();
            for _ in 0..args.jobs.min(configs.len()) {
                let configs = configs.clone();
                let worst = worst.clone();
                let next = next.clone();
                let base = base.clone();
                let out_root = out_root.clone();
                handles.push(std::thread::spawn(move || loop {
                    let idx = next.fetch_add(1, Ordering::SeqCst);
                    if idx >= configs.len() {
                        break;
                    }
                    let sub = out_root.join(format!("run_{:03}", idx));
                    let code = run_single(&configs[idx], &base, Some(&sub)) as usize;
                    worst.fetch_max(code, Ordering::SeqCst);
                }));
            }
            for h in handles {
                let _ = h.join();
            }
            worst.load(Ordering::SeqCst) as i32
        }
    };
    ExitCode::from(code as u8)
}
