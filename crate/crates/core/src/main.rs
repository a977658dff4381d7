use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use spectral_surgery::domain::{
    load_domain, measure, perimeter, save_domain, Alignment, GridDomain,
};
use spectral_surgery::harness::{
    convergence_study, default_corpus, generate, inequality_checks, parse_spacing, run_suite,
    surgery_corpus, unit_disk_radius, write_reports, CorpusSpec, Generator, RunConfig,
    SuiteOptions,
};
use spectral_surgery::pde::{eigenvalues, solve_torsion, torsion_energy, write_torsion};
use spectral_surgery::surgery::{bounded_surgery, strip_surgery, Verdict};
use spectral_surgery::{Error, Result};

/// Every flag can also be given as an environment variable named
/// `SPECTRAL_SURGERY_<flag>` with the flag spelled exactly as below
/// (`SPECTRAL_SURGERY_K` and `SPECTRAL_SURGERY_k` differ), or as a
/// `flag = value` line of the config file. Precedence: command line, then
/// environment, then config file, then built-in defaults.
#[derive(Parser)]
#[command(
    name = "spectral-surgery",
    version,
    about = "Eigenvalue-preserving surgery on rasterized planar domains"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Number of eigenvalues to protect.
    #[arg(long = "k", global = true, env = "SPECTRAL_SURGERY_k")]
    k: Option<usize>,
    /// Eigenvalue threshold.
    #[arg(long = "K", global = true, env = "SPECTRAL_SURGERY_K")]
    k_threshold: Option<f64>,
    /// Perimeter bound; defaults to the input perimeter.
    #[arg(long = "P", global = true, env = "SPECTRAL_SURGERY_P")]
    p_bound: Option<f64>,
    /// Lattice spacing for generated domains, e.g. `1/256`.
    #[arg(long = "h", global = true, env = "SPECTRAL_SURGERY_h")]
    h: Option<String>,
    #[arg(long, global = true, env = "SPECTRAL_SURGERY_seed")]
    seed: Option<u64>,
    /// `faithful` or `practical:<factor>`.
    #[arg(long, global = true, env = "SPECTRAL_SURGERY_mode")]
    mode: Option<String>,
    /// Output directory.
    #[arg(long, global = true, env = "SPECTRAL_SURGERY_out")]
    out: Option<PathBuf>,
    /// Key-value config file.
    #[arg(long, global = true, env = "SPECTRAL_SURGERY_config")]
    config: Option<PathBuf>,
    /// Any other config key, e.g. `--set eigen-tol=1e-9`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// More log output; repeat for debug.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Args)]
struct Source {
    /// PBM bitmap with a JSON sidecar.
    #[arg(long, conflicts_with = "domain")]
    input: Option<PathBuf>,
    /// Id of a corpus item, generated at `--h` and `--seed`.
    #[arg(long)]
    domain: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CorpusName {
    Default,
    Surgery,
}

#[derive(Clone, Copy, ValueEnum)]
enum StudyShape {
    Square,
    Disk,
}

#[derive(Subcommand)]
enum Command {
    /// Rasterize corpus domains to PBM files.
    Gen {
        #[arg(long, value_enum, default_value = "default")]
        corpus: CorpusName,
        /// Only this item.
        #[arg(long)]
        id: Option<String>,
    },
    /// Solve the torsion problem and save the field.
    Torsion(Source),
    /// Lowest `k` eigenvalues.
    Spectrum(Source),
    /// Inequality checks.
    Check(Source),
    /// Strip surgery.
    Surgery(Source),
    /// Penalized-energy truncation followed by rescaling.
    BoundedSurgery(Source),
    /// Grid convergence with Richardson extrapolation.
    Study {
        #[arg(long, value_enum, default_value = "square")]
        shape: StudyShape,
        /// Comma-separated spacings.
        #[arg(long, value_delimiter = ',', default_value = "1/64,1/128,1/256")]
        hs: Vec<String>,
    },
    /// Checks (and optionally surgeries) over a whole corpus.
    Suite {
        #[arg(long, value_enum, default_value = "default")]
        corpus: CorpusName,
        #[arg(long)]
        surgery: bool,
        #[arg(long)]
        bounded: bool,
    },
}

fn run_config(c: &Common) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(p) = &c.config {
        cfg.apply_file(p)?;
    }
    let pairs = [
        ("k", c.k.map(|v| v.to_string())),
        ("K", c.k_threshold.map(|v| v.to_string())),
        ("P", c.p_bound.map(|v| v.to_string())),
        ("h", c.h.clone()),
        ("seed", c.seed.map(|v| v.to_string())),
        ("mode", c.mode.clone()),
        ("out", c.out.as_ref().map(|p| p.display().to_string())),
    ];
    for (key, value) in pairs {
        if let Some(v) = value {
            cfg.set(key, &v)?;
        }
    }
    for kv in &c.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        cfg.set(k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn corpus(name: CorpusName, cfg: &RunConfig) -> Vec<CorpusSpec> {
    match name {
        CorpusName::Default => default_corpus(cfg.h, cfg.seed),
        CorpusName::Surgery => surgery_corpus(cfg.h, cfg.seed),
    }
}

fn load(src: &Source, cfg: &RunConfig) -> Result<(String, GridDomain)> {
    match (&src.input, &src.domain) {
        (Some(p), _) => {
            let id = p
                .file_stem()
                .map_or("input".into(), |s| s.to_string_lossy().into_owned());
            Ok((id, load_domain(p)?))
        }
        (None, Some(id)) => {
            let spec = default_corpus(cfg.h, cfg.seed)
                .into_iter()
                .chain(surgery_corpus(cfg.h, cfg.seed))
                .find(|s| &s.id == id)
                .ok_or_else(|| Error::InvalidArgument(format!("no corpus item `{id}`")))?;
            Ok((id.clone(), generate(&spec)?))
        }
        (None, None) => Err(Error::InvalidArgument(
            "give --input <file.pbm> or --domain <id>".into(),
        )),
    }
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    let mut w = io::stdout().lock();
    serde_json::to_writer_pretty(&mut w, v)?;
    writeln!(w)?;
    Ok(())
}

fn write_json<T: Serialize>(v: &T, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, serde_json::to_vec_pretty(v)?)?;
    Ok(())
}

fn verdict_code(v: Verdict) -> ExitCode {
    match v {
        Verdict::Pass | Verdict::NoOp => ExitCode::SUCCESS,
        Verdict::Fail => ExitCode::FAILURE,
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let cfg = run_config(&cli.common)?;
    let out = cfg.out.clone();
    match cli.command {
        Command::Gen { corpus: name, id } => {
            fs::create_dir_all(&out)?;
            let items = corpus(name, &cfg);
            let selected: Vec<_> = items
                .iter()
                .filter(|s| id.as_ref().is_none_or(|i| &s.id == i))
                .collect();
            if selected.is_empty() {
                return Err(Error::InvalidArgument("no matching corpus item".into()));
            }
            for spec in selected {
                let d = generate(spec)?;
                let path = out.join(format!("{}.pbm", spec.id));
                save_domain(&d, &path)?;
                println!("{}\t{}\t{}", spec.id, d.cell_count(), path.display());
            }
        }
        Command::Torsion(src) => {
            let (id, d) = load(&src, &cfg)?;
            let f = solve_torsion(&d, &cfg.torsion_options())?;
            fs::create_dir_all(&out)?;
            let path = out.join(format!("{id}-torsion.bin"));
            write_torsion(&f, &path)?;
            print_json(&serde_json::json!({
                "id": id,
                "cells": d.cell_count(),
                "measure": measure(&d),
                "max": f.max(),
                "integral": f.integral(),
                "energy": torsion_energy(&f),
                "residual": f.residual,
                "iterations": f.iterations,
                "file": path,
            }))?;
        }
        Command::Spectrum(src) => {
            let (id, d) = load(&src, &cfg)?;
            let s = eigenvalues(&d, cfg.k, &cfg.eigen_options())?;
            print_json(&serde_json::json!({
                "id": id,
                "cells": d.cell_count(),
                "measure": measure(&d),
                "perimeter": perimeter(&d),
                "eigenvalues": s.eigenvalues,
                "rel_tol": s.rel_tol,
            }))?;
        }
        Command::Check(src) => {
            let (id, d) = load(&src, &cfg)?;
            let reports = inequality_checks(&d, &id, &cfg, &SuiteOptions::default())?;
            print_json(&reports)?;
            if reports.iter().any(|r| r.is_failure()) {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Surgery(src) => {
            let (id, d) = load(&src, &cfg)?;
            let o = strip_surgery(
                &d,
                cfg.k_threshold,
                cfg.k,
                cfg.p_bound,
                &cfg.surgery_config(Some(&id)),
            )?;
            fs::create_dir_all(&out)?;
            save_domain(&d, &out.join(format!("{id}-before.pbm")))?;
            save_domain(&o.domain, &out.join(format!("{id}-after.pbm")))?;
            write_json(&o.report, &out.join(format!("{id}-surgery.json")))?;
            println!(
                "{id}: {} (mode {}, removed {} cells, {} components replaced)",
                o.report.verdict,
                o.report.mode,
                o.report.removed_cells,
                o.report.cleanup.replaced()
            );
            for r in o.report.failures() {
                println!(
                    "  failed {} k={:?}: {} > {}",
                    r.name, r.context.k, r.lhs, r.rhs
                );
            }
            return Ok(verdict_code(o.report.verdict));
        }
        Command::BoundedSurgery(src) => {
            let (id, d) = load(&src, &cfg)?;
            let o = bounded_surgery(&d, cfg.k_threshold, cfg.k, &cfg.surgery_config(Some(&id)))?;
            fs::create_dir_all(&out)?;
            save_domain(&o.domain, &out.join(format!("{id}-bounded.pbm")))?;
            write_json(&o.report, &out.join(format!("{id}-bounded.json")))?;
            println!(
                "{id}: {} (mode {}, c = {:e}, {} moves)",
                o.report.verdict,
                o.report.mode,
                o.report.c,
                o.report.descent.moves.len()
            );
            return Ok(verdict_code(o.report.verdict));
        }
        Command::Study { shape, hs } => {
            let hs = hs
                .iter()
                .map(|s| parse_spacing(s))
                .collect::<Result<Vec<_>>>()?;
            let spec = match shape {
                StudyShape::Square => {
                    // cell centers on the lattice put the Dirichlet nodes on the edges
                    let mut s =
                        CorpusSpec::new("square", Generator::Square { side: 1.0 }, hs[0], cfg.seed);
                    s.alignment = Alignment::NodeCentered;
                    s.normalize = false;
                    s
                }
                StudyShape::Disk => CorpusSpec::new(
                    "disk",
                    Generator::Ball {
                        radius: unit_disk_radius(),
                    },
                    hs[0],
                    cfg.seed,
                ),
            };
            let t = convergence_study(&spec, &hs, cfg.k, &cfg)?;
            write_json(&t, &out.join(format!("study-{}.json", spec.id)))?;
            print_json(&t)?;
        }
        Command::Suite {
            corpus: name,
            surgery,
            bounded,
        } => {
            let opts = SuiteOptions {
                surgery,
                bounded,
                ..Default::default()
            };
            let r = run_suite(&corpus(name, &cfg), &cfg, &opts)?;
            write_reports(&r.rows, &out)?;
            for row in &r.rows {
                let status = if row.pass { "pass" } else { "FAIL" };
                println!(
                    "{status}\t{}\t{}",
                    row.id,
                    row.error.as_deref().unwrap_or("")
                );
            }
            if !r.passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.common.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => code,
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(Error::Json(e)) if e.io_error_kind() == Some(io::ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
