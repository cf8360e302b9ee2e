//! Experiment configuration, JSONL traces, and the brute-force census used
//! as ground truth by the tests.
//!
//! An experiment builds one generating sequence and then optionally runs a
//! learner on a seeded text for a target subgroup, or plays an adversary
//! against a learner. Everything is seeded, so a config determines its trace
//! byte for byte.

mod census;
mod trace;

pub use census::{window_census, Census};
pub use trace::{
    pair_item, parse_jsonl, read_trace, to_jsonl, vector_item, write_trace, Datum, HypothesisRecord, Replacement,
    TraceRecord, TRACE_VERSION,
};

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitstream::{
    decode_profile, sample_profile_geometric, ApproximationSchedule, BitString, BitstreamError, ExponentProfile,
};
use crate::genseq::{
    enumerate_eq_mod1, enumerate_neq, enumerate_subgroup_reps, run_builder, BuilderRun, GenSeqError, GenSeqState,
    Variant, VectorWindow,
};
use crate::learners::{
    bc_adversary, canonical_text, equality_truth, ex_adversary, pair_text, semantic_eq, AllEqualLearner, BcLearner,
    EqClassLearner, ExAdversaryReport, ExkLearner, GroundTruthOracle, Hypothesis, HypothesisKind, Learner,
    LearnerError, Mod1BcLearner, SeenOnlyLearner, Semantic, SubringExLearner, TextItem, TextTarget,
};
use crate::qarith::{Representation, SubgroupSpec};

/// Environment variable that overrides every seed of a loaded config.
pub const SEED_ENV: &str = "RANDGROUP_SEED";

/// Largest census window a trace may record per stage.
pub const MAX_TRACE_WINDOW: usize = 3;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config at `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("config is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("trace line {line}: {source}")]
    Trace { line: usize, source: serde_json::Error },
    #[error("trace has no header record")]
    MissingHeader,
    #[error(transparent)]
    Schedule(#[from] BitstreamError),
    #[error(transparent)]
    Builder(#[from] GenSeqError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
}

impl HarnessError {
    fn invalid(field: &str, reason: impl Into<String>) -> Self {
        HarnessError::Invalid { field: field.to_string(), reason: reason.into() }
    }

    /// Whether this is a config validation failure.
    pub fn is_validation(&self) -> bool {
        matches!(self, HarnessError::Invalid { .. } | HarnessError::Json(_))
    }
}

/// Where the approximation schedule comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum ScheduleSource {
    /// A JSON file `{"stages": ["0110", ...]}`.
    File { path: PathBuf },
    /// Stages given inline.
    Stages { stages: Vec<BitString> },
    /// A converged schedule encoding a profile.
    Profile { exponents: Vec<u32> },
    /// [`ApproximationSchedule::pseudo_random`].
    Seed {
        seed: u64,
        #[serde(default = "default_blocks")]
        blocks: usize,
        #[serde(default = "default_noisy_stages")]
        noisy_stages: usize,
    },
    /// A converged schedule encoding a geometric profile of `k` draws.
    Geometric { seed: u64, k: usize },
}

fn default_blocks() -> usize {
    8
}

fn default_noisy_stages() -> usize {
    12
}

impl ScheduleSource {
    pub fn load(&self) -> Result<ApproximationSchedule, HarnessError> {
        Ok(match self {
            ScheduleSource::File { path } => serde_json::from_str(&std::fs::read_to_string(path)?)?,
            ScheduleSource::Stages { stages } => ApproximationSchedule::new(stages.clone())?,
            ScheduleSource::Profile { exponents } => {
                ApproximationSchedule::constant(ExponentProfile::new(exponents.clone()).encode())
            }
            ScheduleSource::Seed { seed, blocks, noisy_stages } => {
                ApproximationSchedule::pseudo_random(*seed, *blocks, *noisy_stages)
            }
            ScheduleSource::Geometric { seed, k } => {
                ApproximationSchedule::constant(sample_profile_geometric(*seed, *k).encode())
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LearnerChoice {
    Bc,
    Exk,
    Mod1bc,
    SubringEx,
    Eqclass,
    AllEqual,
    SeenOnly,
}

impl LearnerChoice {
    pub const ALL: [LearnerChoice; 7] = [
        LearnerChoice::Bc,
        LearnerChoice::Exk,
        LearnerChoice::Mod1bc,
        LearnerChoice::SubringEx,
        LearnerChoice::Eqclass,
        LearnerChoice::AllEqual,
        LearnerChoice::SeenOnly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LearnerChoice::Bc => "bc",
            LearnerChoice::Exk => "exk",
            LearnerChoice::Mod1bc => "mod1bc",
            LearnerChoice::SubringEx => "subring-ex",
            LearnerChoice::Eqclass => "eqclass",
            LearnerChoice::AllEqual => "all-equal",
            LearnerChoice::SeenOnly => "seen-only",
        }
    }

    /// Builder variants whose sequences the learner can read.
    pub fn variants(self) -> &'static [Variant] {
        match self {
            LearnerChoice::Bc | LearnerChoice::Exk => &[Variant::Fgsub, Variant::Core],
            LearnerChoice::Mod1bc => &[Variant::Mod1, Variant::Prufer],
            LearnerChoice::SubringEx => &[Variant::Subring],
            LearnerChoice::Eqclass | LearnerChoice::AllEqual | LearnerChoice::SeenOnly => &[Variant::Core],
        }
    }

    /// Whether the learner reads pairs of representations rather than vectors.
    pub fn reads_pairs(self) -> bool {
        matches!(self, LearnerChoice::Eqclass | LearnerChoice::AllEqual | LearnerChoice::SeenOnly)
    }
}

impl fmt::Display for LearnerChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LearnerChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LearnerChoice::ALL.into_iter().find(|l| l.name() == s).ok_or_else(|| format!("unknown learner {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversaryKind {
    /// Search for a mind change of an Ex candidate on `Z_beta` data.
    Ex,
    /// Falsify modulo-1 equality conjectures from pair texts.
    Bc,
}

impl FromStr for AdversaryKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ex" => Ok(AdversaryKind::Ex),
            "bc" => Ok(AdversaryKind::Bc),
            _ => Err(format!("unknown adversary kind {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    #[default]
    Build,
    Learn {
        learner: LearnerChoice,
    },
    Adversary {
        kind: AdversaryKind,
        learner: LearnerChoice,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub variant: Variant,
    pub schedule: ScheduleSource,
    /// Number of builder stages.
    pub budget: usize,
    #[serde(default)]
    pub task: Task,
    /// Target subgroup `q/m`, in lowest terms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(default)]
    pub text_seed: u64,
    #[serde(default = "default_text_length")]
    pub text_length: usize,
    /// Census window recorded per stage.
    #[serde(default = "default_window")]
    pub window: usize,
    /// Step budget of adversary searches.
    #[serde(default = "default_adversary_budget")]
    pub adversary_budget: usize,
    /// Stages played by the modulo-1 adversary.
    #[serde(default = "default_adversary_stages")]
    pub adversary_stages: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

fn default_text_length() -> usize {
    200
}

fn default_window() -> usize {
    2
}

fn default_adversary_budget() -> usize {
    10_000
}

fn default_adversary_stages() -> usize {
    8
}

impl ExperimentConfig {
    /// A build-only config with default settings.
    pub fn build(variant: Variant, schedule: ScheduleSource, budget: usize) -> Self {
        Self {
            variant,
            schedule,
            budget,
            task: Task::Build,
            target: None,
            text_seed: 0,
            text_length: default_text_length(),
            window: default_window(),
            adversary_budget: default_adversary_budget(),
            adversary_stages: default_adversary_stages(),
            out: None,
        }
    }

    /// Parses a JSON config, applies [`SEED_ENV`] if set, and validates it.
    pub fn load(path: &std::path::Path) -> Result<Self, HarnessError> {
        let mut config: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if let Some(seed) = seed_from_env()? {
            config.override_seeds(seed);
        }
        config.validate()?;
        Ok(config)
    }

    /// Replaces the text seed and any schedule seed.
    pub fn override_seeds(&mut self, seed: u64) {
        self.text_seed = seed;
        match &mut self.schedule {
            ScheduleSource::Seed { seed: s, .. } | ScheduleSource::Geometric { seed: s, .. } => *s = seed,
            _ => {}
        }
    }

    pub fn target_spec(&self) -> Result<Option<SubgroupSpec>, HarnessError> {
        self.target
            .as_deref()
            .map(|t| {
                let spec: SubgroupSpec = t.parse().map_err(|e| HarnessError::invalid("target", format!("{e}")))?;
                if spec.is_trivial() {
                    return Err(HarnessError::invalid("target", "the trivial subgroup has no text"));
                }
                Ok(spec)
            })
            .transpose()
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.budget == 0 {
            return Err(HarnessError::invalid("budget", "must be at least 1"));
        }
        if self.window > MAX_TRACE_WINDOW {
            return Err(HarnessError::invalid("window", format!("must be at most {MAX_TRACE_WINDOW}")));
        }
        match &self.schedule {
            ScheduleSource::File { path } if !path.is_file() => {
                return Err(HarnessError::invalid("schedule.path", format!("{} does not exist", path.display())));
            }
            ScheduleSource::Stages { stages } if stages.is_empty() => {
                return Err(HarnessError::invalid("schedule.stages", "needs at least one stage"));
            }
            _ => {}
        }
        let target = self.target_spec()?;
        let learner = match self.task {
            Task::Build => return Ok(()),
            Task::Learn { learner } => learner,
            Task::Adversary { kind, learner } => {
                let ok = match kind {
                    AdversaryKind::Ex => {
                        matches!(learner, LearnerChoice::Bc | LearnerChoice::Exk | LearnerChoice::Mod1bc)
                    }
                    AdversaryKind::Bc => learner.reads_pairs(),
                };
                if !ok {
                    return Err(HarnessError::invalid(
                        "task.learner",
                        format!("{learner} cannot face the {kind:?} adversary"),
                    ));
                }
                if kind == AdversaryKind::Bc {
                    return Ok(());
                }
                learner
            }
        };
        if !learner.variants().contains(&self.variant) {
            return Err(HarnessError::invalid(
                "variant",
                format!("{learner} does not read {} sequences", self.variant),
            ));
        }
        if self.text_length < 2 {
            return Err(HarnessError::invalid("text_length", "must be at least 2"));
        }
        if matches!(self.task, Task::Learn { .. }) && !learner.reads_pairs() && target.is_none() {
            return Err(HarnessError::invalid("target", format!("{learner} needs a target subgroup")));
        }
        Ok(())
    }
}

/// The [`SEED_ENV`] override, if set.
pub fn seed_from_env() -> Result<Option<u64>, HarnessError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| HarnessError::invalid(SEED_ENV, format!("{v:?} is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

/// Outcome class of an experiment, for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Completed,
    /// An adversary search ran out of budget or candidates.
    Exhausted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentTrace {
    pub records: Vec<TraceRecord>,
    pub outcome: Outcome,
}

impl ExperimentTrace {
    pub fn to_jsonl(&self) -> String {
        to_jsonl(&self.records)
    }
}

/// Runs a validated config and writes the trace to `config.out` if set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentTrace, HarnessError> {
    let trace = execute(config)?;
    if let Some(path) = &config.out {
        write_trace(path, &trace.records)?;
    }
    Ok(trace)
}

/// Runs a validated config without writing anything.
pub fn execute(config: &ExperimentConfig) -> Result<ExperimentTrace, HarnessError> {
    config.validate()?;
    let schedule = config.schedule.load()?;
    let target = config.target_spec()?;
    let run = run_builder(config.variant, &schedule, None, config.budget)?;
    let mut records = vec![TraceRecord::Header { version: TRACE_VERSION, config: config.clone() }];
    records.extend(stage_records(&run, config.window, target.as_ref())?);
    let mut outcome = Outcome::Completed;
    let (mut mind_changes, mut converged) = (None, None);
    match config.task {
        Task::Build => {}
        Task::Learn { learner } => {
            let (recs, changes, ok) = learn(config, learner, &run, target)?;
            records.extend(recs);
            mind_changes = Some(changes);
            converged = Some(ok);
        }
        Task::Adversary { kind, learner } => {
            let (recs, exhausted) = adversary(config, kind, learner, &run, &schedule)?;
            records.extend(recs);
            if exhausted {
                outcome = Outcome::Exhausted;
            }
        }
    }
    let last = run.last().expect("nonempty");
    records.push(TraceRecord::Summary { stages: last.stage, beta_len: last.beta.len(), mind_changes, converged });
    Ok(ExperimentTrace { records, outcome })
}

/// Result of re-running the config in a trace's header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayReport {
    pub identical: bool,
    /// 1-based line of the first difference.
    pub first_difference: Option<usize>,
    pub lines: usize,
}

/// Re-runs the header config of a recorded trace and compares line by line.
pub fn replay(recorded: &str) -> Result<ReplayReport, HarnessError> {
    let records = parse_jsonl(recorded)?;
    let Some(TraceRecord::Header { config, .. }) = records.first() else {
        return Err(HarnessError::MissingHeader);
    };
    let fresh = execute(config)?.to_jsonl();
    let (a, b): (Vec<&str>, Vec<&str>) = (fresh.lines().collect(), recorded.lines().collect());
    let first_difference = a
        .iter()
        .zip(&b)
        .position(|(x, y)| x != y)
        .or_else(|| (a.len() != b.len()).then(|| a.len().min(b.len())))
        .map(|i| i + 1);
    Ok(ReplayReport { identical: first_difference.is_none(), first_difference, lines: b.len() })
}

fn stage_records(run: &BuilderRun, w: usize, target: Option<&SubgroupSpec>) -> Result<Vec<TraceRecord>, HarnessError> {
    let window = VectorWindow::new(w);
    let budget = run.len() - 1;
    let mut added: Vec<Vec<Datum>> = vec![Vec::new(); run.len()];
    match run[0].variant {
        Variant::Core | Variant::Subring => {
            for p in enumerate_neq(run, &window, budget)? {
                added[p.stage_found].push(Datum::pair(p.sigma, p.tau));
            }
        }
        Variant::Mod1 | Variant::Prufer => {
            for p in enumerate_eq_mod1(run, &window, budget)? {
                added[p.stage_found].push(Datum::pair(p.sigma, p.tau));
            }
        }
        Variant::Fgsub => {
            let spec = target.cloned().unwrap_or_else(SubgroupSpec::integers);
            for m in enumerate_subgroup_reps(run, &spec, &window, budget)? {
                added[m.stage_found].push(Datum::vector(m.sigma));
            }
        }
    }
    Ok(run
        .iter()
        .zip(added)
        .map(|(st, window_added)| TraceRecord::Stage {
            stage: st.stage,
            beta: st.beta.clone(),
            replaced: st
                .changes_at_this_stage()
                .map(|c| Replacement { i: c.index, old: c.old.clone(), new: c.new.clone() })
                .collect(),
            window_added,
        })
        .collect())
}

fn learn_records<D, L>(
    learner: &L,
    items: &[TextItem<D>],
    show: impl Fn(&TextItem<D>) -> Option<Datum>,
    truth: &Hypothesis,
) -> Result<(Vec<TraceRecord>, usize, bool), HarnessError>
where
    L: Learner<D, Hyp = Hypothesis>,
{
    let hyps = learner.run(items)?;
    let mut prev = learner.initial_hypothesis();
    let mut records = Vec::with_capacity(items.len());
    let mut changes = 0;
    for (n, (item, h)) in items.iter().zip(&hyps).enumerate() {
        let mind_change = *h != prev;
        changes += usize::from(mind_change);
        records.push(TraceRecord::Learn { n, datum: show(item), hypothesis: h.into(), mind_change });
        prev = h.clone();
    }
    let converged = hyps.last().is_some_and(|h| semantic_eq(h, truth).holds());
    Ok((records, changes, converged))
}

fn learn(
    config: &ExperimentConfig,
    learner: LearnerChoice,
    run: &[GenSeqState],
    target: Option<SubgroupSpec>,
) -> Result<(Vec<TraceRecord>, usize, bool), HarnessError> {
    let beta = run.last().expect("nonempty").beta.clone();
    if learner.reads_pairs() {
        let text = pair_text(&beta, config.text_seed, config.text_length)?;
        let truth = equality_truth(&beta);
        return match learner {
            LearnerChoice::Eqclass => learn_records(&EqClassLearner, &text.items, pair_item, &truth),
            _ => Err(HarnessError::invalid("task.learner", format!("{learner} has no subgroup conjectures to trace"))),
        };
    }
    let spec = target.expect("validated");
    let target = TextTarget::from_run(run, spec.clone()).expect("nonempty");
    let text = canonical_text(&target, config.text_seed, config.text_length)?;
    let exact = Hypothesis::canonical(HypothesisKind::Subgroup { spec: spec.clone() });
    match learner {
        LearnerChoice::Bc => learn_records(&BcLearner::new(beta), &text.items, vector_item, &exact),
        LearnerChoice::Exk => {
            learn_records(&ExkLearner::new(GroundTruthOracle::new(beta)), &text.items, vector_item, &exact)
        }
        LearnerChoice::Mod1bc => {
            let truth = Hypothesis::canonical(HypothesisKind::Mod1Subgroup { spec });
            learn_records(&Mod1BcLearner::new(beta), &text.items, vector_item, &truth)
        }
        LearnerChoice::SubringEx => learn_records(&SubringExLearner::new(run), &text.items, vector_item, &exact),
        _ => unreachable!("pair learners handled above"),
    }
}

fn ex_records<L>(learner: &L, run: &[GenSeqState], budget: usize) -> Result<(Vec<TraceRecord>, bool), HarnessError>
where
    L: Learner<Representation, Hyp = Hypothesis>,
    Hypothesis: Semantic,
{
    Ok(match ex_adversary(learner, run, budget)? {
        ExAdversaryReport::Witness { witness, steps } => (
            vec![TraceRecord::Witness {
                steps,
                gamma: witness.gamma.iter().map(vector_item).collect(),
                delta: witness.delta.iter().map(vector_item).collect(),
                before: (&witness.before).into(),
                after: (&witness.after).into(),
            }],
            false,
        ),
        ExAdversaryReport::Exhausted { reason, gamma, justified_primes, steps } => {
            let detail = match gamma {
                Some(g) => format!(
                    "stabilising sequence of length {} on Z; mind changes needed data outside Z for prime indices {justified_primes:?}",
                    g.len()
                ),
                None => "no stabilising sequence found within budget".to_string(),
            };
            (vec![TraceRecord::Exhausted { steps, reason, detail }], true)
        }
    })
}

fn adversary(
    config: &ExperimentConfig,
    kind: AdversaryKind,
    learner: LearnerChoice,
    run: &[GenSeqState],
    schedule: &ApproximationSchedule,
) -> Result<(Vec<TraceRecord>, bool), HarnessError> {
    let beta = run.last().expect("nonempty").beta.clone();
    match kind {
        AdversaryKind::Ex => match learner {
            LearnerChoice::Bc => ex_records(&BcLearner::new(beta), run, config.adversary_budget),
            LearnerChoice::Exk => {
                ex_records(&ExkLearner::new(GroundTruthOracle::new(beta)), run, config.adversary_budget)
            }
            LearnerChoice::Mod1bc => ex_records(&Mod1BcLearner::new(beta), run, config.adversary_budget),
            _ => unreachable!("validated"),
        },
        AdversaryKind::Bc => {
            let profile = decode_profile(schedule.final_stage());
            let (stages, budget) = (config.adversary_stages, config.adversary_budget);
            let report = match learner {
                LearnerChoice::Eqclass => bc_adversary(&EqClassLearner, &profile, stages, budget)?,
                LearnerChoice::AllEqual => bc_adversary(&AllEqualLearner, &profile, stages, budget)?,
                LearnerChoice::SeenOnly => bc_adversary(&SeenOnlyLearner, &profile, stages, budget)?,
                _ => unreachable!("validated"),
            };
            let mut records: Vec<TraceRecord> = report
                .falsifications
                .iter()
                .map(|f| TraceRecord::Falsification {
                    stage: f.stage,
                    sigma: f.sigma.clone(),
                    tau: f.tau.clone(),
                    text_len: f.text_len,
                    beta_len: f.beta_len,
                })
                .collect();
            if let Some(reason) = report.exhausted {
                records.push(TraceRecord::Exhausted {
                    steps: report.steps,
                    reason,
                    detail: format!("{} of {stages} stages falsified", report.falsifications.len()),
                });
            }
            Ok((records, report.exhausted.is_some()))
        }
    }
}
