use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use randgroup::bitstream::BitString;
use randgroup::genseq::Variant;
use randgroup::harness::{
    execute, replay, run_experiment, seed_from_env, to_jsonl, window_census, write_trace, AdversaryKind,
    ExperimentConfig, ExperimentTrace, HarnessError, LearnerChoice, Outcome, ScheduleSource, Task, TraceRecord,
};
use randgroup::qarith::{nth_prime, Rational, Representation, SubgroupSpec};
use randgroup::theory::{
    elementarily_equivalent, equiv_to_integers, infinitely_dividing_primes, szmielew_invariants, ExtendedProfile,
};

const EXIT_VALIDATION: u8 = 2;
const EXIT_EXHAUSTED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "randgroup",
    version,
    about = "Generating sequences, learners and invariants for random subgroups of Q",
    after_help = "Exit codes: 0 success, 1 error, 2 invalid input, 3 adversary budget exhausted.\n\
                  RANDGROUP_SEED, if set, overrides every seed of the experiment."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ScheduleArgs {
    /// Schedule file `{"stages": ["1101", ...]}`.
    #[arg(long, conflicts_with_all = ["profile", "stages"])]
    schedule: Option<PathBuf>,
    /// Converged schedule encoding these exponents, e.g. `3,1,1,1`.
    #[arg(long, value_delimiter = ',', conflicts_with = "stages")]
    profile: Option<Vec<u32>>,
    /// Inline stages, e.g. `1111010,1101010`.
    #[arg(long, value_delimiter = ',')]
    stages: Option<Vec<BitString>>,
}

impl ScheduleArgs {
    /// The chosen source; without one, profile `4,2,1,1,1,1`, or the bits
    /// `1111` for the subring-style variants.
    fn source(&self, variant: Variant) -> ScheduleSource {
        if let Some(path) = &self.schedule {
            ScheduleSource::File { path: path.clone() }
        } else if let Some(exponents) = &self.profile {
            ScheduleSource::Profile { exponents: exponents.clone() }
        } else if let Some(stages) = &self.stages {
            ScheduleSource::Stages { stages: stages.clone() }
        } else if variant.is_subring_style() {
            ScheduleSource::Stages { stages: vec!["1111".parse().expect("valid bits")] }
        } else {
            ScheduleSource::Profile { exponents: vec![4, 2, 1, 1, 1, 1] }
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a builder and write its stage trace.
    Build {
        #[arg(long, value_parser = parse_variant)]
        variant: Variant,
        #[command(flatten)]
        schedule: ScheduleArgs,
        /// Number of stages.
        #[arg(long, default_value_t = 64)]
        budget: usize,
        /// Census window recorded per stage as `window_added`.
        #[arg(long, default_value_t = 2)]
        window: usize,
        /// Trace file; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a learner on a seeded text and write its trace.
    Learn {
        #[arg(long, value_parser = parse_learner)]
        learner: LearnerChoice,
        /// Target subgroup `q/m` (ignored by eqclass).
        #[arg(long)]
        target: Option<String>,
        #[arg(long, default_value_t = 0)]
        text_seed: u64,
        /// Text length.
        #[arg(long, default_value_t = 200)]
        steps: usize,
        /// Builder variant; defaults to fgsub, mod1, subring or core by learner.
        #[arg(long, value_parser = parse_variant)]
        variant: Option<Variant>,
        #[command(flatten)]
        schedule: ScheduleArgs,
        /// Builder stages.
        #[arg(long, default_value_t = 64)]
        build_budget: usize,
        /// Trace file; stdout if omitted.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Play an adversary against a built-in learner.
    Adversary {
        #[arg(long, value_parser = parse_kind)]
        kind: AdversaryKind,
        #[arg(long, value_parser = parse_learner)]
        learner: LearnerChoice,
        /// Learner steps the search may spend.
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        /// Stages played by the bc adversary.
        #[arg(long, default_value_t = 8)]
        rounds: usize,
        #[arg(long, value_parser = parse_variant)]
        variant: Option<Variant>,
        #[command(flatten)]
        schedule: ScheduleArgs,
        #[arg(long, default_value_t = 64)]
        build_budget: usize,
        /// Trace file; stdout if omitted.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run an experiment config file.
    Run {
        config: PathBuf,
        /// Trace file, overriding the config's `out`; stdout if neither is set.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print Szmielew triples of one profile, and the equivalence verdict for two.
    Invariants {
        /// JSON profile: `[3, 1, "inf"]` or `{"explicit": [...], "tail": "inf"}`.
        #[arg(long)]
        profile: PathBuf,
        #[arg(long)]
        profile2: Option<PathBuf>,
        /// Triples are printed for the first this many primes.
        #[arg(long, default_value_t = 6)]
        primes: usize,
        #[arg(long, default_value_t = 1)]
        n: u32,
    },
    /// Print the brute-force census of `{-w..w}^w` over a sequence, one vector per line.
    Census {
        /// Comma-separated rationals, e.g. `1,1/4`.
        #[arg(long, value_delimiter = ',')]
        beta: Vec<Rational>,
        #[arg(long, default_value_t = 2)]
        bound: usize,
        /// Also mark membership in `<q/m>`.
        #[arg(long)]
        target: Option<String>,
    },
    /// Re-run the config in a trace header and compare the output.
    Replay { trace: PathBuf },
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse::<Variant>().map_err(|e| e.to_string())
}

fn parse_learner(s: &str) -> Result<LearnerChoice, String> {
    s.parse()
}

fn parse_kind(s: &str) -> Result<AdversaryKind, String> {
    s.parse()
}

fn with_env_seed(mut config: ExperimentConfig) -> Result<ExperimentConfig, HarnessError> {
    if let Some(seed) = seed_from_env()? {
        config.override_seeds(seed);
    }
    Ok(config)
}

fn emit(trace: &ExperimentTrace, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => write_trace(path, &trace.records).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{}", trace.to_jsonl());
            Ok(())
        }
    }
}

fn report(trace: &ExperimentTrace) {
    for r in &trace.records {
        match r {
            TraceRecord::Witness { steps, before, after, .. } => {
                eprintln!("witness after {steps} steps: {} -> {}", before.handle, after.handle)
            }
            TraceRecord::Exhausted { steps, reason, detail } => {
                eprintln!("exhausted ({reason:?}) after {steps} steps: {detail}")
            }
            TraceRecord::Summary { stages, beta_len, mind_changes, converged } => {
                eprint!("{stages} stages, |beta| = {beta_len}");
                if let Some(c) = mind_changes {
                    eprint!(", {c} mind changes");
                }
                if let Some(ok) = converged {
                    eprint!(", final conjecture {}", if *ok { "correct" } else { "wrong" });
                }
                eprintln!();
            }
            _ => {}
        }
    }
}

fn run_config(config: ExperimentConfig, out: Option<&Path>) -> Result<Outcome> {
    let config = with_env_seed(config)?;
    let trace = execute(&config)?;
    emit(&trace, out)?;
    report(&trace);
    Ok(trace.outcome)
}

fn load_profile(path: &Path) -> Result<ExtendedProfile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Json(e).into())
}

fn invariants(profile: &Path, profile2: Option<&Path>, primes: usize, n: u32) -> Result<()> {
    let a = load_profile(profile)?;
    let print = |label: &str, p: &ExtendedProfile| -> Result<()> {
        println!("{label}: P(G) = {:?}", infinitely_dividing_primes(p));
        for i in 0..primes {
            let q = nth_prime(i);
            let t = szmielew_invariants(p, q, n)?;
            println!("  p={q} n={n}: alpha={} beta={} gamma={}", t.alpha, t.beta_inv, t.gamma);
        }
        Ok(())
    };
    print("profile", &a)?;
    match profile2 {
        Some(path) => {
            let b = load_profile(path)?;
            print("profile2", &b)?;
            println!("elementarily equivalent: {}", elementarily_equivalent(&a, &b));
        }
        None => println!("equivalent to Z: {}", equiv_to_integers(&a)),
    }
    Ok(())
}

fn census(beta: &[Rational], bound: usize, target: Option<&str>) -> Result<()> {
    let spec: Option<SubgroupSpec> = target
        .map(|t| t.parse().map_err(|e| HarnessError::Invalid { field: "target".into(), reason: format!("{e}") }))
        .transpose()?;
    let c = window_census(beta, bound);
    let members = spec.as_ref().map(|s| c.members(s));
    for (i, v) in c.window().vectors().iter().enumerate() {
        let sigma = Representation::new(v.entries()[..v.support_len()].to_vec());
        let mut line = json!({
            "sigma": sigma,
            "value": c.value(i),
            "class": c.class(i),
            "mod1_class": c.mod1_class(i),
        });
        if let Some(m) = &members {
            line["member"] = json!(m.binary_search(&i).is_ok());
        }
        println!("{line}");
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Build { variant, schedule, budget, window, out } => {
            let mut config = ExperimentConfig::build(variant, schedule.source(variant), budget);
            config.window = window;
            run_config(config, out.as_deref())
        }
        Command::Learn { learner, target, text_seed, steps, variant, schedule, build_budget, trace } => {
            let variant = variant.unwrap_or(learner.variants()[0]);
            let mut config = ExperimentConfig::build(variant, schedule.source(variant), build_budget);
            config.task = Task::Learn { learner };
            config.target = target;
            config.text_seed = text_seed;
            config.text_length = steps;
            run_config(config, trace.as_deref())
        }
        Command::Adversary { kind, learner, budget, rounds, variant, schedule, build_budget, trace } => {
            let variant = variant.unwrap_or(match (kind, learner) {
                (AdversaryKind::Ex, LearnerChoice::Mod1bc) => Variant::Mod1,
                (AdversaryKind::Ex, _) => Variant::Fgsub,
                (AdversaryKind::Bc, _) => Variant::Core,
            });
            let mut config = ExperimentConfig::build(variant, schedule.source(variant), build_budget);
            config.task = Task::Adversary { kind, learner };
            config.adversary_budget = budget;
            config.adversary_stages = rounds;
            run_config(config, trace.as_deref())
        }
        Command::Run { config, out } => {
            let mut config = ExperimentConfig::load(&config)?;
            if out.is_some() {
                config.out = out;
            }
            let trace = run_experiment(&config)?;
            if config.out.is_none() {
                print!("{}", to_jsonl(&trace.records));
            }
            report(&trace);
            Ok(trace.outcome)
        }
        Command::Invariants { profile, profile2, primes, n } => {
            invariants(&profile, profile2.as_deref(), primes, n)?;
            Ok(Outcome::Completed)
        }
        Command::Census { beta, bound, target } => {
            census(&beta, bound, target.as_deref())?;
            Ok(Outcome::Completed)
        }
        Command::Replay { trace } => {
            let text = fs::read_to_string(&trace).with_context(|| format!("reading {}", trace.display()))?;
            let r = replay(&text)?;
            if !r.identical {
                bail!("replay differs from {} at line {}", trace.display(), r.first_difference.unwrap_or(0));
            }
            println!("replay identical: {} lines", r.lines);
            Ok(Outcome::Completed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(Outcome::Completed) => ExitCode::SUCCESS,
        Ok(Outcome::Exhausted) => ExitCode::from(EXIT_EXHAUSTED),
        Err(e) => {
            eprintln!("error: {e:#}");
            let validation = e.downcast_ref::<HarnessError>().is_some_and(HarnessError::is_validation)
                || e.downcast_ref::<randgroup::theory::TheoryError>().is_some();
            if validation {
                ExitCode::from(EXIT_VALIDATION)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
