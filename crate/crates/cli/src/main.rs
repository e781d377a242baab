use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use teamform::aceei::AceeiParams;
use teamform::data::{gen_rsca, gen_rsim, load_game, to_raw_string, DatasetKind};
use teamform::harness::{regret_estimate, run_experiment, ExperimentConfig, RegretConfig};
use teamform::metrics::MetricsReport;
use teamform::optimizer::max_welfare;
use teamform::{Game, Mechanism, MechanismKind, SerialOrder};

#[derive(Parser)]
#[command(name = "teamform", version, about = "Team formation mechanisms and experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `out_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one mechanism on a preference matrix.
    Mech {
        kind: MechanismKind,
        matrix: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated serial order; random from `seed` when omitted.
        #[arg(long)]
        order: Option<String>,
        #[command(flatten)]
        aceei: AceeiArgs,
    },
    /// Estimate the regret of truthful reporting.
    Regret {
        kind: MechanismKind,
        matrix: PathBuf,
        #[arg(long, default_value_t = 8)]
        runs: usize,
        #[arg(long, default_value_t = 25)]
        deviations: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        aceei: AceeiArgs,
    },
    /// Maximum-welfare partition under the size schedule.
    Optimize { matrix: PathBuf },
    /// Generate a random instance as a raw matrix.
    Gen {
        /// `r_sim` or `r_sca`.
        dataset: DatasetKind,
        #[arg(long)]
        n: usize,
        /// Sets both team-size bounds.
        #[arg(long, conflicts_with_all = ["k_min", "k_max"])]
        k: Option<usize>,
        #[arg(long)]
        k_min: Option<usize>,
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Written to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct AceeiArgs {
    #[arg(long, default_value_t = AceeiParams::default().epsilon)]
    aceei_epsilon: f64,
    #[arg(long, default_value_t = AceeiParams::default().tabu_iters)]
    aceei_tabu_iters: usize,
}

impl AceeiArgs {
    fn mechanism(&self, kind: MechanismKind) -> Mechanism {
        Mechanism {
            kind,
            aceei: AceeiParams {
                epsilon: self.aceei_epsilon,
                tabu_iters: self.aceei_tabu_iters,
            },
        }
    }
}

fn load(path: &PathBuf) -> Result<Game> {
    load_game(path).with_context(|| format!("loading {}", path.display()))
}

fn parse_order(text: &str, n: usize) -> Result<SerialOrder> {
    let agents = text
        .split(',')
        .map(|t| t.trim().parse::<usize>().with_context(|| format!("bad agent `{t}` in order")))
        .collect::<Result<Vec<_>>>()?;
    if agents.len() != n {
        bail!("order lists {} agents, matrix has {n}", agents.len());
    }
    Ok(SerialOrder::new(agents)?)
}

fn print_teams(teams: &[Vec<usize>]) {
    for team in teams {
        let names: Vec<String> = team.iter().map(usize::to_string).collect();
        println!("team {}", names.join(" "));
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { config, out } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if out.is_some() {
                cfg.out_dir = out;
            }
            let report = run_experiment(&cfg)?;
            print!("{report}");
            if let Some(dir) = &cfg.out_dir {
                report.write_csv(dir)?;
                println!("wrote {}", dir.display());
            }
        }
        Command::Mech {
            kind,
            matrix,
            seed,
            order,
            aceei,
        } => {
            let game = load(&matrix)?;
            let order = match order {
                Some(text) => parse_order(&text, game.n())?,
                None => SerialOrder::random(game.n(), &mut ChaCha8Rng::seed_from_u64(seed)),
            };
            let p = aceei.mechanism(kind).run(&game, &order, seed)?;
            let normalized = game.normalize()?;
            let m = MetricsReport::compute(&normalized, &p, &order, false)?;
            print_teams(p.teams());
            println!("{}", MetricsReport::CSV_HEADER);
            println!("{}", m.csv_row());
        }
        Command::Regret {
            kind,
            matrix,
            runs,
            deviations,
            seed,
            aceei,
        } => {
            let game = load(&matrix)?;
            let cfg = RegretConfig {
                runs,
                deviations_per_agent: deviations,
                seed,
                ..RegretConfig::default()
            };
            let est = regret_estimate(&game, &aceei.mechanism(kind), &cfg)?;
            println!(
                "{kind}: mean max regret {:.4} ± {:.4} over {} runs ({} misreports)",
                est.summary.mean, est.summary.half_width, est.summary.count, est.evaluations
            );
        }
        Command::Optimize { matrix } => {
            let game = load(&matrix)?;
            let (p, raw) = max_welfare(&game.normalize()?)?;
            print_teams(p.teams());
            println!("normalized welfare {:.6}", raw / game.n() as f64);
        }
        Command::Gen {
            dataset,
            n,
            k,
            k_min,
            k_max,
            seed,
            out,
        } => {
            let (lo, hi) = match (k, k_min, k_max) {
                (Some(k), _, _) => (k, k),
                (None, Some(lo), Some(hi)) => (lo, hi),
                _ => bail!("give --k or both --k-min and --k-max"),
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let game = match dataset {
                DatasetKind::RSim => gen_rsim(n, lo, hi, &mut rng)?,
                DatasetKind::RSca => gen_rsca(n, lo, hi, &mut rng)?,
                other => bail!("`{}` is not a generator", other.name()),
            };
            match out {
                Some(path) => std::fs::write(&path, to_raw_string(&game))?,
                None => print!("{}", to_raw_string(&game)),
            }
        }
    }
    Ok(())
}
