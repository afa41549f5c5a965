use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use blowdown::harness::{
    load_config, run_experiment, shipped_config, ExperimentConfig, ExperimentKind, ModelSpec, PointSpec, SHIPPED,
};
use blowdown::Error;

#[derive(Parser)]
#[command(name = "blowdown", version, about = "Geodesic loop dynamics and eigenfunction growth experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment config (TOML); flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the parallel sweeps.
    #[arg(long)]
    threads: Option<usize>,
    /// Model preset: sphere, sphere3, torus, sor-sine, sor-bump, ellipsoid.
    #[arg(long)]
    model: Option<String>,
    /// pole, south-pole, umbilic or origin.
    #[arg(long)]
    point: Option<String>,
}

#[derive(Args)]
struct LoopFlags {
    #[arg(long)]
    grid_size: Option<usize>,
    #[arg(long)]
    n_iter: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one geodesic.
    Flow {
        #[command(flatten)]
        common: Common,
        /// Direction in the orthonormal frame at the point.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        direction: Option<Vec<f64>>,
        #[arg(long)]
        t_max: Option<f64>,
        /// Write every integrator node instead of the end points only.
        #[arg(long)]
        dump: bool,
    },
    /// Classify the point and iterate the first return map from random directions.
    ReturnMap {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        loops: LoopFlags,
        #[arg(long)]
        orbits: Option<usize>,
    },
    /// Estimate the recurrent fraction of the loop set.
    Recurrence {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        loops: LoopFlags,
    },
    /// Blow-down classification and fixed points of the return map.
    Classify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        loops: LoopFlags,
    },
    /// Quasimode peaks, normalizations and residuals over a mode range.
    Quasimode {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k_min: Option<usize>,
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long)]
        k_step: Option<usize>,
        /// Cutoff radius of the radial amplitude.
        #[arg(long = "R")]
        cutoff_radius: Option<f64>,
        /// Also compute the Laplace residual against an eigenbasis.
        #[arg(long)]
        residual: bool,
    },
    /// Spectral window projector norms.
    Projector {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        lambda_min: Option<f64>,
        #[arg(long)]
        lambda_max: Option<f64>,
        #[arg(long)]
        lambda_step: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        deltas: Option<Vec<f64>>,
    },
    /// Sup-norm growth: zonal harmonics or quasimode peaks.
    Growth {
        #[command(flatten)]
        common: Common,
        /// zonal or quasimode.
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        l_min: Option<usize>,
        #[arg(long)]
        l_max: Option<usize>,
        #[arg(long)]
        k_min: Option<usize>,
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long)]
        k_step: Option<usize>,
    },
    /// Window estimates for random torus spectra.
    Lemma2 {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        lambdas: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        deltas: Option<Vec<f64>>,
    },
    /// Run a shipped experiment by name, or a config file by path.
    Run {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// List shipped experiments.
    List,
}

fn point_spec(name: &str) -> Result<PointSpec, Error> {
    Ok(match name {
        "pole" => PointSpec::Pole,
        "south-pole" => PointSpec::SouthPole,
        "umbilic" => PointSpec::Umbilic,
        "origin" => PointSpec::Origin,
        other => {
            return Err(Error::Config {
                path: "--point".into(),
                message: format!("unknown point `{other}` (pole, south-pole, umbilic, origin)"),
            })
        }
    })
}

fn base_config(kind: ExperimentKind, common: &Common, default_model: &str) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &common.config {
        Some(path) => {
            let cfg = load_config(path)?;
            if cfg.kind != kind {
                return Err(Error::Config {
                    path: "kind".into(),
                    message: format!("config describes a `{}` experiment, not `{}`", cfg.kind.name(), kind.name()),
                });
            }
            cfg
        }
        None => {
            let model = ModelSpec::preset(common.model.as_deref().unwrap_or(default_model))?;
            let point = match &model {
                ModelSpec::TriaxialEllipsoid { .. } => PointSpec::Umbilic,
                ModelSpec::FlatTorus { .. } => PointSpec::Origin,
                _ => PointSpec::Pole,
            };
            ExperimentConfig::new(kind.name(), kind, model, point)
        }
    };
    if common.config.is_some() {
        if let Some(m) = &common.model {
            cfg.model = ModelSpec::preset(m)?;
        }
    }
    if let Some(p) = &common.point {
        cfg.point = point_spec(p)?;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if common.threads.is_some() {
        cfg.threads = common.threads;
    }
    if common.out.is_some() {
        cfg.output = common.out.clone();
    }
    Ok(cfg)
}

fn set<T>(slot: &mut Option<T>, value: Option<T>) {
    if value.is_some() {
        *slot = value;
    }
}

fn apply_loops(cfg: &mut ExperimentConfig, l: LoopFlags) {
    set(&mut cfg.parameters.grid_size, l.grid_size);
    set(&mut cfg.parameters.n_iter, l.n_iter);
    set(&mut cfg.parameters.delta, l.delta);
}

fn build(command: Command) -> Result<Option<ExperimentConfig>, Error> {
    let cfg = match command {
        Command::Flow { common, direction, t_max, dump } => {
            let mut c = base_config(ExperimentKind::Flow, &common, "sphere")?;
            set(&mut c.parameters.direction, direction);
            set(&mut c.parameters.t_max, t_max);
            if dump {
                c.parameters.dump = Some(true);
            }
            c
        }
        Command::ReturnMap { common, loops, orbits } => {
            let mut c = base_config(ExperimentKind::ReturnMap, &common, "ellipsoid")?;
            apply_loops(&mut c, loops);
            set(&mut c.parameters.orbits, orbits);
            c
        }
        Command::Recurrence { common, loops } => {
            let mut c = base_config(ExperimentKind::Recurrence, &common, "ellipsoid")?;
            apply_loops(&mut c, loops);
            c
        }
        Command::Classify { common, loops } => {
            let mut c = base_config(ExperimentKind::Classify, &common, "sphere")?;
            apply_loops(&mut c, loops);
            c
        }
        Command::Quasimode { common, k_min, k_max, k_step, cutoff_radius, residual } => {
            let mut c = base_config(ExperimentKind::Quasimode, &common, "sphere")?;
            set(&mut c.parameters.k_min, k_min);
            set(&mut c.parameters.k_max, k_max);
            set(&mut c.parameters.k_step, k_step);
            set(&mut c.parameters.cutoff_radius, cutoff_radius);
            if residual {
                c.parameters.residual = Some(true);
            }
            c
        }
        Command::Projector { common, lambda_min, lambda_max, lambda_step, deltas } => {
            let mut c = base_config(ExperimentKind::Projector, &common, "torus")?;
            set(&mut c.parameters.lambda_min, lambda_min);
            set(&mut c.parameters.lambda_max, lambda_max);
            set(&mut c.parameters.lambda_step, lambda_step);
            set(&mut c.parameters.deltas, deltas);
            c
        }
        Command::Growth { common, mode, l_min, l_max, k_min, k_max, k_step } => {
            let mut c = base_config(ExperimentKind::Growth, &common, "sphere")?;
            set(&mut c.parameters.mode, mode);
            set(&mut c.parameters.l_min, l_min);
            set(&mut c.parameters.l_max, l_max);
            set(&mut c.parameters.k_min, k_min);
            set(&mut c.parameters.k_max, k_max);
            set(&mut c.parameters.k_step, k_step);
            c
        }
        Command::Lemma2 { common, trials, lambdas, deltas } => {
            let mut c = base_config(ExperimentKind::Lemma2, &common, "torus")?;
            set(&mut c.parameters.trials, trials);
            set(&mut c.parameters.lambdas, lambdas);
            set(&mut c.parameters.deltas, deltas);
            c
        }
        Command::Run { name, out, seed, threads } => {
            let path = PathBuf::from(&name);
            let mut c = if path.extension().is_some_and(|e| e == "toml") || path.exists() {
                load_config(&path)?
            } else {
                shipped_config(&name)?
            };
            if let Some(s) = seed {
                c.seed = s;
            }
            set(&mut c.threads, threads);
            if out.is_some() {
                c.output = out;
            }
            c
        }
        Command::List => {
            let mut lock = io::stdout().lock();
            for (name, text) in SHIPPED {
                let kind = text
                    .lines()
                    .find_map(|l| l.strip_prefix("kind = "))
                    .unwrap_or("")
                    .trim_matches('"');
                writeln!(lock, "{name:32} {kind}")?;
            }
            return Ok(None);
        }
    };
    cfg.validate()?;
    Ok(Some(cfg))
}

fn execute(cfg: ExperimentConfig) -> Result<(), Error> {
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config { path: "threads".into(), message: e.to_string() })?;
    }
    let out = run_experiment(&cfg)?;
    match &cfg.output {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            out.write_csv(&mut w)?;
            w.flush()?;
            let mut lock = io::stdout().lock();
            writeln!(lock, "{}: wrote {} rows to {}", out.name, out.table.rows.len(), path.display())?;
            for (k, v) in &out.summary {
                writeln!(lock, "  {k} = {v}")?;
            }
        }
        None => out.write_csv(io::stdout().lock())?,
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } | Error::Domain(_) | Error::Precondition(_) | Error::Unsupported(_) | Error::Io(_) => 2,
        Error::Numerical { .. } | Error::Horizon { .. } | Error::Inconsistency(_) => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build(cli.command).and_then(|cfg| match cfg {
        Some(c) => execute(c),
        None => Ok(()),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        // A closed pipe (`blowdown list | head`) is not a failure.
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
