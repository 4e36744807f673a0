use std::fs;
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use drsim::analysis::emax_bound;
use drsim::anfis::{gradient_check, AnfisNetwork, MfFamily, TrainingSet};
use drsim::harness::canonical::{aoi_policy, sr_policy};
use drsim::harness::{
    report_csv, run_compare, table_csv, train_threshold_policy, HarnessError, ScenarioConfig,
};
use drsim::netsim::{qos_check, run_scenario, MetricsReport};
use drsim::reckoning::ThresholdPolicy;

/// Dead-reckoning simulation toolkit.
#[derive(Parser)]
#[command(name = "drsim", version)]
struct Cli {
    /// Override the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write results to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Emit CSV instead of a text summary.
    #[arg(long, global = true)]
    csv: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario.
    Run {
        config: PathBuf,
        /// Exit with status 1 when the QoS profile is violated.
        #[arg(long)]
        qos_strict: bool,
    },
    /// Run several threshold policies on the same scenario.
    Compare {
        config: PathBuf,
        /// Comma-separated: fixed:TH, aoi, sr, anfis:FILE, config.
        #[arg(long, value_delimiter = ',', required = true)]
        policies: Vec<String>,
    },
    /// Train an adaptive threshold network on the scenario and save it.
    TrainAnfis {
        config: PathBuf,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        eta: Option<f64>,
    },
    /// Compare the measured receiver error with the worst-case bound.
    ValidateBound { config: PathBuf },
    /// Check analytic premise gradients against finite differences.
    GradCheck {
        /// Network file; a seeded random network is used when absent.
        #[arg(long)]
        network: Option<PathBuf>,
        #[arg(long, default_value_t = 50)]
        records: usize,
    },
}

enum Failure {
    Config(String),
    Check(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        Failure::Config(e.to_string())
    }
}

fn load(path: &Path, seed: Option<u64>) -> Result<(ScenarioConfig, PathBuf), Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let mut cfg = drsim::harness::parse_scenario(&text).map_err(|e| Failure::Config(format!("{}:\n{e}", path.display())))?;
    if let Some(s) = seed {
        cfg.run.seed = s;
    }
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((cfg, dir))
}

fn write(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Config(format!("{}: {e}", p.display()))),
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(Failure::Config(e.to_string())),
            _ => Ok(()),
        },
    }
}

fn summary(r: &MetricsReport) -> String {
    r.summary().iter().map(|(k, v)| format!("{k:26} {v}\n")).collect()
}

fn parse_policy(spec: &str, cfg: &ScenarioConfig, dir: &Path) -> Result<ThresholdPolicy, Failure> {
    let bad = || Failure::Config(format!("unknown policy `{spec}`"));
    let (name, arg) = spec.split_once(':').map_or((spec, None), |(n, a)| (n, Some(a)));
    Ok(match (name, arg) {
        ("aoi", None) => aoi_policy(),
        ("sr", None) => sr_policy(),
        ("config", None) => cfg.policy(dir)?,
        ("fixed", Some(th)) => {
            let th: f64 = th.parse().map_err(|_| bad())?;
            ThresholdPolicy::fixed(th).map_err(|e| Failure::Config(e.to_string()))?
        }
        ("anfis", Some(file)) => {
            let net = AnfisNetwork::load(drsim::harness::resolve(dir, file)).map_err(|e| Failure::Config(e.to_string()))?;
            let c = &cfg.anfis_section().candidates_m;
            let lo = c.iter().cloned().fold(f64::MAX, f64::min);
            let hi = c.iter().cloned().fold(f64::MIN, f64::max);
            ThresholdPolicy::anfis(net, lo, hi).map_err(|e| Failure::Config(e.to_string()))?
        }
        _ => return Err(bad()),
    })
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Run { config, qos_strict } => {
            let (cfg, dir) = load(config, cli.seed)?;
            let sc = cfg.to_scenario(&dir)?;
            let report = run_scenario(&sc).map_err(HarnessError::from)?;
            let text = if cli.csv { report_csv(&report) } else { summary(&report) };
            write(&cli.out, &text)?;
            let violations = qos_check(&sc.qos, &report);
            for v in &violations {
                eprintln!("qos {}: {v}", sc.qos.coupling.label());
            }
            if *qos_strict && !violations.is_empty() {
                return Err(Failure::Check(format!("{} QoS violation(s)", violations.len())));
            }
        }
        Command::Compare { config, policies } => {
            let (cfg, dir) = load(config, cli.seed)?;
            let sc = cfg.to_scenario(&dir)?;
            let named = policies
                .iter()
                .map(|p| Ok((p.clone(), parse_policy(p, &cfg, &dir)?)))
                .collect::<Result<Vec<_>, Failure>>()?;
            let table = run_compare(&sc, &named)?;
            let text = if cli.csv {
                table_csv(&table)
            } else {
                let mut s = format!("{:24} {:>14} {:>8} {:>10}\n", "policy", "mean_error_m", "packets", "freq_hz");
                for r in &table.rows {
                    s += &format!("{:24} {:>14.6} {:>8} {:>10.4}\n", r.policy, r.mean_error, r.packets_sent, r.mean_frequency);
                }
                s
            };
            write(&cli.out, &text)?;
        }
        Command::TrainAnfis { config, epochs, eta } => {
            let (cfg, dir) = load(config, cli.seed)?;
            let sc = cfg.to_scenario(&dir)?;
            let section = cfg.anfis_section();
            let mut topts = section.train_options();
            if let Some(e) = epochs {
                topts.epochs = *e;
            }
            if let Some(e) = eta {
                topts.learning_rate = *e;
            }
            let trained = train_threshold_policy(&sc, &section.candidates_m, &section.sweep_options(), &topts)?;
            let target = cli
                .out
                .clone()
                .or_else(|| section.network_file.as_deref().map(|f| drsim::harness::resolve(&dir, f)))
                .ok_or_else(|| Failure::Config("no output file: pass --out or set anfis.network_file".into()))?;
            trained.network.save(&target).map_err(|e| Failure::Config(e.to_string()))?;
            if let (Some(first), Some(last)) = (trained.history.first(), trained.history.last()) {
                eprintln!("epochs {}: E {} -> {}", trained.history.len(), first.error, last.error);
            }
            eprintln!(
                "packets {} (budget {}) after {} round(s); saved {}",
                trained.packets,
                trained.budget,
                trained.rounds,
                target.display()
            );
        }
        Command::ValidateBound { config } => {
            let (cfg, dir) = load(config, cli.seed)?;
            let sc = cfg.to_scenario(&dir)?;
            let dt = sc.network.max_delay().unwrap_or(sc.qos.dt_max_s());
            let report = run_scenario(&sc).map_err(HarnessError::from)?;
            let b = emax_bound(report.th_pos_max, report.v_dev_max, report.a_dev_max, dt)
                .map_err(|e| Failure::Config(e.to_string()))?;
            let ok = report.max_e_r <= b.e_max;
            write(
                &cli.out,
                &format!(
                    "e_max_m {}\nmax_e_r_m {}\nwithin_bound {ok}\n",
                    b.e_max, report.max_e_r
                ),
            )?;
            if !ok {
                return Err(Failure::Check("measured error exceeds the bound".into()));
            }
        }
        Command::GradCheck { network, records } => {
            let seed = cli.seed.unwrap_or(0);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let net = match network {
                Some(p) => AnfisNetwork::load(p).map_err(|e| Failure::Config(e.to_string()))?,
                None => {
                    let mut n = AnfisNetwork::with_default_rules([(-1.0, 1.0), (-5.0, 5.0), (-5.0, 5.0)], MfFamily::GBell)
                        .map_err(|e| Failure::Config(e.to_string()))?;
                    n.jitter_premises(seed, 0.05);
                    for r in &mut n.rules {
                        r.consequent.p = rng.random_range(-1.0..1.0);
                        r.consequent.q = rng.random_range(-1.0..1.0);
                        r.consequent.s = rng.random_range(-1.0..1.0);
                        r.consequent.bias = rng.random_range(-1.0..1.0);
                    }
                    n
                }
            };
            let u = net.universes();
            let mut data = TrainingSet::default();
            for _ in 0..*records {
                let x = std::array::from_fn(|j| rng.random_range(u[j].0..=u[j].1));
                data.push(x, rng.random_range(0.0..1.0));
            }
            let dev = gradient_check(&net, &data).map_err(|e| Failure::Config(e.to_string()))?;
            write(&cli.out, &format!("max_rel_dev {dev:e}\n"))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(m)) => {
            eprintln!("{m}");
            ExitCode::from(1)
        }
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
