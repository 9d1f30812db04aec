use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qroute::decoders::{count_failures, BpOsdDecoder};
use qroute::dem::{compile_dem, DetectorErrorModel, SampleBatch};
use qroute::experiment::{distance_json, run_distance, run_sweep, sweep_csv, CodeSpec, ExperimentConfig, VERSION};
use qroute::noise::NoiseModel;
use qroute::sampler::sample_frames;
use qroute::schedules::ScheduleKind;
use qroute::{Circuit, Error, Result};

#[derive(Parser)]
#[command(name = "qroute", version, about = "Routed syndrome extraction experiments")]
struct Cli {
    /// TOML experiment configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Noise model as `si1000:0.001`, `uniform:0.002` or `none`.
    #[arg(long, global = true)]
    noise: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Grid {
    /// Code: `surface:5`, `bb72`, `bb:6,6,3,-1,-1,3` or `toric:3,3`. Repeatable.
    #[arg(long = "code")]
    codes: Vec<String>,
    /// Scheme: conventional, routed, three-quarters-lr, half-lr, full-sequential. Repeatable.
    #[arg(long = "scheme")]
    schemes: Vec<String>,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    flags: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Print the parity-check and logical matrices of a code.
    BuildCode(Grid),
    /// Print the connectivity graph of a code under a scheme as JSON.
    Layout(Grid),
    /// Print a memory-experiment circuit.
    GenCircuit(Grid),
    /// Compile a circuit file, or a generated circuit, into a detector error model.
    Dem {
        #[arg(long)]
        circuit: Option<PathBuf>,
        #[command(flatten)]
        grid: Grid,
    },
    /// Sample detector events and observable flips from a circuit file.
    Sample {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        shots: Option<usize>,
    },
    /// Decode a detector-event file against a detector error model.
    Decode {
        #[arg(long)]
        dem: PathBuf,
        #[arg(long)]
        events: PathBuf,
    },
    /// Logical error rates over the configured grid, as CSV.
    Sweep {
        #[command(flatten)]
        grid: Grid,
        /// Physical error rates, comma separated.
        #[arg(long, value_delimiter = ',')]
        p: Vec<f64>,
        #[arg(long)]
        shots: Option<usize>,
    },
    /// Circuit-distance upper bounds over the configured grid, as JSON.
    Distance {
        #[command(flatten)]
        grid: Grid,
        #[arg(long)]
        samples: Option<usize>,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(Error::from)
}

fn parse<T: std::str::FromStr<Err = qroute::error::ParseError>>(s: &str) -> Result<T> {
    Ok(s.parse()?)
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_toml(&read(path)?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

/// Applies `--noise`; `none` maps to a zero-strength model of the configured kind.
fn noise_override(cli: &Cli, cfg: &mut ExperimentConfig) -> Result<Option<NoiseModel>> {
    match cli.noise.as_deref().map(NoiseModel::parse_option).transpose()? {
        Some(Some(model)) => {
            cfg.noise = model.kind;
            cfg.p = vec![model.p];
            Ok(Some(model))
        }
        Some(None) => {
            cfg.p = vec![0.0];
            Ok(None)
        }
        None => Ok(cfg.p.first().map(|&p| NoiseModel::new(cfg.noise, p)).transpose()?.filter(|m| m.p > 0.0)),
    }
}

fn apply_grid(grid: &Grid, cfg: &mut ExperimentConfig) -> Result<()> {
    if !grid.codes.is_empty() {
        cfg.codes = grid.codes.iter().map(|c| parse::<CodeSpec>(c)).collect::<Result<_>>()?;
    }
    if !grid.schemes.is_empty() {
        cfg.schemes = grid
            .schemes
            .iter()
            .map(|s| ScheduleKind::parse(s).ok_or_else(|| Error::Config(format!("unknown scheme {s:?}"))))
            .collect::<Result<_>>()?;
    } else if cfg.codes.iter().all(|c| !c.is_surface()) && cfg.schemes.iter().all(|s| s.is_surface()) {
        cfg.schemes = vec![ScheduleKind::BbThreeQuartersLr, ScheduleKind::BbHalfLr];
    }
    if let Some(r) = grid.rounds {
        cfg.rounds = r;
    }
    cfg.flag_detectors |= grid.flags;
    Ok(())
}

fn first_point(cfg: &ExperimentConfig) -> Result<(CodeSpec, ScheduleKind)> {
    let code = cfg.codes.first().cloned().ok_or_else(|| Error::Config("no code given".into()))?;
    let scheme = *cfg.schemes.first().ok_or_else(|| Error::Config("no scheme given".into()))?;
    if code.is_surface() != scheme.is_surface() {
        return Err(Error::Config(format!("scheme {} does not apply to code {code}", scheme.name())));
    }
    Ok((code, scheme))
}

fn generated_circuit(cli: &Cli, grid: &Grid, cfg: &mut ExperimentConfig) -> Result<Circuit> {
    apply_grid(grid, cfg)?;
    let noise = noise_override(cli, cfg)?;
    let (code, scheme) = first_point(cfg)?;
    code.schedule(scheme)?.generate(cfg.rounds, noise.as_ref(), cfg.flag_detectors)
}

fn run(cli: &Cli) -> Result<String> {
    let mut cfg = load_config(cli)?;
    let out = match &cli.command {
        Command::BuildCode(grid) => {
            apply_grid(grid, &mut cfg)?;
            let code = cfg.codes.first().ok_or_else(|| Error::Config("no code given".into()))?.build()?;
            cfg.header() + &code.to_text()
        }
        Command::Layout(grid) => {
            apply_grid(grid, &mut cfg)?;
            let (code, scheme) = first_point(&cfg)?;
            let layout = code.schedule(scheme)?.layout.to_json();
            let doc = serde_json::json!({ "version": VERSION, "config": cfg, "layout": layout });
            serde_json::to_string_pretty(&doc).expect("layout serializes") + "\n"
        }
        Command::GenCircuit(grid) => {
            let c = generated_circuit(cli, grid, &mut cfg)?;
            cfg.header() + &c.to_text()
        }
        Command::Dem { circuit, grid } => {
            let c = match circuit {
                Some(path) => Circuit::from_text(&read(path)?)?,
                None => generated_circuit(cli, grid, &mut cfg)?,
            };
            cfg.header() + &compile_dem(&c)?.to_text()
        }
        Command::Sample { circuit, shots } => {
            if let Some(s) = shots {
                cfg.shots = *s;
            }
            let c = Circuit::from_text(&read(circuit)?)?;
            cfg.header() + &sample_frames(&c, cfg.shots, cfg.seed).to_text()
        }
        Command::Decode { dem, events } => {
            let dem = DetectorErrorModel::from_text(&read(dem)?)?;
            let batch = SampleBatch::from_text(&read(events)?, dem.detector_count, dem.observable_count)?;
            let decoder = BpOsdDecoder::new(&dem, cfg.decoder)?;
            let mut s = cfg.header();
            for shot in 0..batch.shots() {
                let res = decoder.decode(&batch.detectors.row(shot))?;
                s.push_str(&res.predicted_observables.to_bit_string());
                s.push('\n');
            }
            eprintln!("failures {} / {}", count_failures(&decoder, &batch), batch.shots());
            s
        }
        Command::Sweep { grid, p, shots } => {
            apply_grid(grid, &mut cfg)?;
            noise_override(cli, &mut cfg)?;
            if !p.is_empty() {
                cfg.p = p.clone();
            }
            if let Some(s) = shots {
                cfg.shots = *s;
            }
            let rows = run_sweep(&cfg)?;
            sweep_csv(&cfg, &rows)
        }
        Command::Distance { grid, samples } => {
            apply_grid(grid, &mut cfg)?;
            noise_override(cli, &mut cfg)?;
            if let Some(s) = samples {
                cfg.distance.samples = *s;
            }
            let rows = run_distance(&cfg)?;
            distance_json(&cfg, &rows)
        }
    };
    Ok(out)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::Config(_) | Error::Code(_) | Error::Noise(_) => 2,
        Error::Io(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = run(&cli).and_then(|text| match &cli.out {
        Some(path) => fs::write(path, text).map_err(Error::from),
        None => {
            print!("{text}");
            Ok(())
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
