//! Randomized verification campaigns.
//!
//! Instance `i` of a campaign is generated from `derive_seed(master_seed, i)`
//! alone, evaluated independently, and the results are collected in index
//! order. A report is therefore a function of the configuration only, not of
//! the number of worker threads. Every violation carries the serialized
//! instance so it can be replayed without the generator.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::{matrix_from_json, matrix_to_json, MatrixJson, OperationFile, StateFile};
use crate::majorization::{
    self, check_average_monotone, check_ensemble_majorization, Lemma1Report, MajorizationReport, Measure,
    MonotoneCheck, Theorem2Report,
};
use crate::rng::{self, derive_seed, seeded, SeededRng};
use crate::sepops::{self, apply_to_pure, Ensemble, LoccParams, ProductKrausSet, MAX_KRAUS_PAIRS};
use crate::states::PureState;
use crate::tolerance::Tolerances;

/// Bound on projector residuals in lemma1 instances.
pub const PROJECTOR_TOLERANCE: f64 = 1e-10;
/// Allowed gap between `p_max` and its bisection estimate.
pub const PMAX_AGREEMENT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    /// Ensembles produced by random LOCC compositions satisfy majorization.
    Thm1,
    /// Norm-weighted inequality for unconstrained product collections.
    Thm2,
    /// Truncation inequality and its complement projector.
    Lemma1,
    /// `p_max` against a bisection over two-outcome ensembles.
    PmaxConsistency,
    /// Entropy and `E_n` average monotonicity under random LOCC.
    Monotone,
}

impl Target {
    pub const ALL: [Target; 5] = [Target::Thm1, Target::Thm2, Target::Lemma1, Target::PmaxConsistency, Target::Monotone];

    pub fn name(self) -> &'static str {
        match self {
            Target::Thm1 => "thm1",
            Target::Thm2 => "thm2",
            Target::Lemma1 => "lemma1",
            Target::PmaxConsistency => "pmax-consistency",
            Target::Monotone => "monotone",
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Target::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown target '{s}' (expected thm1, thm2, lemma1, pmax-consistency or monotone)")))
    }
}

/// Inclusive integer range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntRange {
    pub min: usize,
    pub max: usize,
}

impl IntRange {
    pub const fn new(min: usize, max: usize) -> Self {
        IntRange { min, max }
    }

    fn validate(&self, what: &str) -> Result<()> {
        if self.min == 0 || self.min > self.max {
            return Err(Error::invalid(format!("{what} range {}..={} is empty or starts at 0", self.min, self.max)));
        }
        Ok(())
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        rng.random_range(self.min..=self.max)
    }
}

impl FromStr for IntRange {
    type Err = Error;

    /// Accepts `"3"` or `"2..4"` (inclusive).
    fn from_str(s: &str) -> Result<Self> {
        let parse = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::invalid(format!("bad range '{s}'")))
        };
        let r = match s.split_once("..") {
            Some((lo, hi)) => IntRange::new(parse(lo)?, parse(hi.trim_start_matches('='))?),
            None => {
                let v = parse(s)?;
                IntRange::new(v, v)
            }
        };
        r.validate("parsed")?;
        Ok(r)
    }
}

/// Generator settings that, together with an instance seed, determine an
/// instance completely.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceRanges {
    /// `D_A`; also the matrix size `D` for lemma1 and the local dimension
    /// of the square states used by pmax-consistency.
    pub dims_a: IntRange,
    pub dims_b: IntRange,
    /// Number of Kraus pairs.
    pub kraus: IntRange,
    /// LOCC rounds.
    pub rounds: IntRange,
}

impl Default for InstanceRanges {
    fn default() -> Self {
        InstanceRanges {
            dims_a: IntRange::new(2, 4),
            dims_b: IntRange::new(2, 4),
            kraus: IntRange::new(1, 16),
            rounds: IntRange::new(1, 3),
        }
    }
}

impl InstanceRanges {
    pub fn validate(&self) -> Result<()> {
        self.dims_a.validate("dims_a")?;
        self.dims_b.validate("dims_b")?;
        self.kraus.validate("kraus")?;
        self.rounds.validate("rounds")?;
        if self.kraus.max > MAX_KRAUS_PAIRS {
            return Err(Error::ResourceLimit(format!(
                "Kraus budget {} exceeds the limit of {MAX_KRAUS_PAIRS}",
                self.kraus.max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub target: Target,
    pub instances: u64,
    pub ranges: InstanceRanges,
    pub master_seed: u64,
    /// Relative slack allowed in the inequalities.
    pub tolerance: f64,
    /// Worker threads; 0 lets the pool decide. Does not affect results.
    #[serde(skip)]
    pub workers: usize,
}

impl CampaignConfig {
    pub fn new(target: Target, instances: u64, master_seed: u64) -> Self {
        CampaignConfig {
            target,
            instances,
            ranges: InstanceRanges::default(),
            master_seed,
            tolerance: Tolerances::DEFAULT.inequality,
            workers: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.instances == 0 {
            return Err(Error::invalid("a campaign needs at least one instance"));
        }
        if self.tolerance.is_nan() || self.tolerance < 0.0 {
            return Err(Error::invalid("tolerance must be nonnegative"));
        }
        self.ranges.validate()
    }
}

/// Self-contained description of one test instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Instance {
    Thm1 { state: StateFile, operation: OperationFile },
    Thm2 { state: StateFile, operation: OperationFile },
    Lemma1 { a: MatrixJson, b: MatrixJson, psi_diag: Vec<f64>, n: usize },
    PmaxConsistency { source: StateFile, target: StateFile },
    Monotone { state: StateFile, operation: OperationFile },
}

/// Full evaluation of one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Diagnostic {
    Thm1 {
        closure_residual: f64,
        kraus_pairs: usize,
        pruned_mass: f64,
        majorization: MajorizationReport,
        entropy: MonotoneCheck,
    },
    Thm2(Theorem2Report),
    Lemma1(Lemma1Report),
    PmaxConsistency {
        pmax: f64,
        bisection: f64,
        deterministic: bool,
        difference: f64,
    },
    Monotone {
        entropy: MonotoneCheck,
        en_family: MonotoneCheck,
    },
}

impl Diagnostic {
    /// Whether the instance meets its target's claim.
    pub fn passed(&self) -> bool {
        match self {
            Diagnostic::Thm1 { majorization, .. } => majorization.verdict,
            Diagnostic::Thm2(r) => r.holds,
            Diagnostic::Lemma1(r) => {
                let p = &r.projector;
                r.holds
                    && p.chain_ordered
                    && p.rank_at_least_n
                    && p.idempotency_residual <= PROJECTOR_TOLERANCE
                    && p.annihilation_norm <= PROJECTOR_TOLERANCE
            }
            Diagnostic::PmaxConsistency { pmax, deterministic, difference, .. } => {
                *difference <= PMAX_AGREEMENT && ((*pmax == 1.0) == *deterministic)
            }
            Diagnostic::Monotone { entropy, en_family } => entropy.holds && en_family.holds,
        }
    }

    /// Signed margin used for the slack histogram; negative means the claim
    /// is violated before tolerance is applied.
    pub fn slack(&self) -> f64 {
        match self {
            Diagnostic::Thm1 { majorization, .. } => majorization.min_slack,
            Diagnostic::Thm2(r) => r.min_relative_slack,
            Diagnostic::Lemma1(r) => r.min_gap() / r.rhs.abs().max(1.0),
            Diagnostic::PmaxConsistency { difference, .. } => -difference,
            Diagnostic::Monotone { entropy, en_family } => entropy.deficit.min(en_family.deficit),
        }
    }

    pub fn worst_n(&self) -> Option<usize> {
        match self {
            Diagnostic::Thm1 { majorization, .. } => Some(majorization.worst_n),
            Diagnostic::Thm2(r) => Some(r.worst_n),
            Diagnostic::Lemma1(r) => Some(r.n),
            Diagnostic::PmaxConsistency { .. } => None,
            Diagnostic::Monotone { en_family, .. } => en_family.worst_n,
        }
    }
}

/// Draws `1 + Geometric(1/2)`, capped at `max`.
fn geometric_count<R: Rng + ?Sized>(rng: &mut R, min: usize, max: usize) -> usize {
    let mut k = min;
    while k < max && rng.random_bool(0.5) {
        k += 1;
    }
    k
}

fn random_locc<R: Rng + ?Sized>(rng: &mut R, dims: (usize, usize), ranges: &InstanceRanges) -> Result<ProductKrausSet> {
    let budget = ranges.kraus.max;
    let mut rounds = ranges.rounds.sample(rng);
    while rounds > 1 && 2usize.saturating_pow(rounds as u32) > budget {
        rounds -= 1;
    }
    let max_outcomes = (1..=budget)
        .take_while(|k| k.checked_pow(rounds as u32).is_some_and(|n| n <= budget))
        .last()
        .unwrap_or(1);
    let outcomes = if max_outcomes == 1 || rng.random_bool(0.1) {
        1
    } else {
        geometric_count(rng, 2, max_outcomes)
    };
    let mut params = LoccParams::new(dims, rounds, outcomes);
    params.alice_first = rng.random_bool(0.5);
    let op = sepops::gen_separable_locc(rng, params)?;
    if 2 * op.len() <= budget && rng.random_bool(0.25) {
        let other = sepops::gen_separable_locc(rng, params)?;
        let q: f64 = rng.random();
        return sepops::mix_operations(&op, &other, q);
    }
    Ok(op)
}

fn random_dims(rng: &mut SeededRng, ranges: &InstanceRanges) -> (usize, usize) {
    (ranges.dims_a.sample(rng), ranges.dims_b.sample(rng))
}

/// Random ascending diagonal with unit-trace square, sometimes with exact
/// zeros or repeated entries at the low end.
fn random_psi_diag(rng: &mut SeededRng, d: usize) -> Vec<f64> {
    let mut w = rng::random_simplex(rng, d);
    w.sort_by(f64::total_cmp);
    let roll: f64 = rng.random();
    if roll < 0.15 && d > 1 {
        let zeros = rng.random_range(1..d);
        w.iter_mut().take(zeros).for_each(|x| *x = 0.0);
    } else if roll < 0.3 && d > 1 {
        let repeat = rng.random_range(1..d);
        let v = w[repeat];
        w.iter_mut().take(repeat + 1).for_each(|x| *x = v);
    }
    w.into_iter().map(f64::sqrt).collect()
}

/// Builds the instance a campaign would run for `seed`.
pub fn generate_instance(target: Target, seed: u64, ranges: &InstanceRanges) -> Result<Instance> {
    ranges.validate()?;
    let mut rng = seeded(seed);
    Ok(match target {
        Target::Thm1 | Target::Monotone => {
            let dims = random_dims(&mut rng, ranges);
            let op = random_locc(&mut rng, dims, ranges)?;
            let state = StateFile::from_state(&PureState::random(&mut rng, dims.0, dims.1));
            let operation = OperationFile::from_pairs(op.pairs());
            if target == Target::Thm1 {
                Instance::Thm1 { state, operation }
            } else {
                Instance::Monotone { state, operation }
            }
        }
        Target::Thm2 => {
            let dims = random_dims(&mut rng, ranges);
            let n = geometric_count(&mut rng, ranges.kraus.min, ranges.kraus.max);
            let scale = rng.random_range(0.25..2.0);
            let pairs = sepops::gen_random_product_collection(&mut rng, dims, n, scale)?;
            Instance::Thm2 {
                state: StateFile::from_state(&PureState::random(&mut rng, dims.0, dims.1)),
                operation: OperationFile::from_pairs(&pairs),
            }
        }
        Target::Lemma1 => {
            let d = ranges.dims_a.sample(&mut rng);
            let a = rng::ginibre(&mut rng, d, d);
            let b = rng::ginibre(&mut rng, d, d);
            let psi_diag = random_psi_diag(&mut rng, d);
            let n = rng.random_range(1..=d);
            Instance::Lemma1 { a: matrix_to_json(&a), b: matrix_to_json(&b), psi_diag, n }
        }
        Target::PmaxConsistency => {
            let d = ranges.dims_a.sample(&mut rng);
            let source = PureState::random(&mut rng, d, d);
            let target = PureState::random(&mut rng, d, d);
            Instance::PmaxConsistency { source: StateFile::from_state(&source), target: StateFile::from_state(&target) }
        }
    })
}

/// Largest `p` for which `{(p, target), (1 - p, |00>)}` passes the
/// majorization test from `source`, by bisection to `1e-12`.
pub fn bisect_conversion_probability(source: &PureState, target: &PureState) -> Result<f64> {
    let (da, db) = target.dims();
    let residual = PureState::basis(da, db, 0, 0)?;
    let feasible = |p: f64| -> Result<bool> {
        let ens = Ensemble::new(vec![(p, target.clone()), (1.0 - p, residual.clone())], 0.0)?;
        Ok(check_ensemble_majorization(source, &ens, 1e-13)?.verdict)
    };
    if feasible(1.0)? {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Evaluates a recorded instance. Loading goes through the same validation
/// as the file formats, so corrupted instances surface as errors.
pub fn evaluate_instance(instance: &Instance, tol: f64) -> Result<Diagnostic> {
    match instance {
        Instance::Thm1 { state, operation } => {
            let s = state.to_state()?;
            let op = operation.to_set()?;
            let ens = apply_to_pure(&op, &s, Tolerances::DEFAULT.prune)?;
            Ok(Diagnostic::Thm1 {
                closure_residual: op.closure_residual(),
                kraus_pairs: op.len(),
                pruned_mass: ens.pruned_mass(),
                majorization: check_ensemble_majorization(&s, &ens, tol)?,
                entropy: check_average_monotone(&s, &ens, Measure::Entropy)?,
            })
        }
        Instance::Thm2 { state, operation } => {
            let s = state.to_state()?;
            let pairs = operation.to_pairs()?;
            Ok(Diagnostic::Thm2(majorization::verify_theorem2(&pairs, &s, tol)?))
        }
        Instance::Lemma1 { a, b, psi_diag, n } => Ok(Diagnostic::Lemma1(majorization::verify_lemma1(
            &matrix_from_json(a)?,
            &matrix_from_json(b)?,
            psi_diag,
            *n,
            tol,
        )?)),
        Instance::PmaxConsistency { source, target } => {
            let (s, t) = (source.to_state()?, target.to_state()?);
            let pmax = majorization::pmax_sep(&s, &t)?;
            let bisection = bisect_conversion_probability(&s, &t)?;
            Ok(Diagnostic::PmaxConsistency {
                pmax,
                bisection,
                deterministic: majorization::can_transform_deterministic(&s, &t)?.feasible,
                difference: (pmax - bisection).abs(),
            })
        }
        Instance::Monotone { state, operation } => {
            let s = state.to_state()?;
            let ens = apply_to_pure(&operation.to_set()?, &s, Tolerances::DEFAULT.prune)?;
            Ok(Diagnostic::Monotone {
                entropy: check_average_monotone(&s, &ens, Measure::Entropy)?,
                en_family: check_average_monotone(&s, &ens, Measure::EnFamily)?,
            })
        }
    }
}

/// Result of one campaign instance.
#[derive(Debug, Clone)]
pub struct InstanceOutcome {
    pub index: u64,
    pub seed: u64,
    pub instance: Result<Instance>,
    pub diagnostic: Result<Diagnostic>,
}

impl InstanceOutcome {
    pub fn passed(&self) -> bool {
        matches!(&self.diagnostic, Ok(d) if d.passed())
    }
}

fn run_one(cfg: &CampaignConfig, index: u64) -> InstanceOutcome {
    let seed = derive_seed(cfg.master_seed, index);
    let instance = generate_instance(cfg.target, seed, &cfg.ranges);
    let diagnostic = match &instance {
        Ok(inst) => evaluate_instance(inst, cfg.tolerance),
        Err(e) => Err(e.clone()),
    };
    InstanceOutcome { index, seed, instance, diagnostic }
}

/// Runs every instance and returns the outcomes in index order.
pub fn run_instances(cfg: &CampaignConfig) -> Result<Vec<InstanceOutcome>> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Internal(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| (0..cfg.instances).into_par_iter().map(|i| run_one(cfg, i)).collect()))
}

/// A failed instance with everything needed to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub index: u64,
    pub seed: u64,
    pub worst_n: Option<usize>,
    pub slack: Option<f64>,
    pub error: Option<String>,
    pub instance: Option<Instance>,
}

/// Nearest-rank quantiles of the per-instance slacks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlackSummary {
    pub count: usize,
    pub min: Option<f64>,
    pub q1: Option<f64>,
    pub median: Option<f64>,
    pub q3: Option<f64>,
    pub max: Option<f64>,
}

impl SlackSummary {
    fn from_values(mut values: Vec<f64>) -> Self {
        values.retain(|x| x.is_finite());
        values.sort_by(f64::total_cmp);
        let q = |f: f64| -> Option<f64> {
            if values.is_empty() {
                return None;
            }
            let idx = ((values.len() - 1) as f64 * f).round() as usize;
            Some(values[idx])
        };
        SlackSummary { count: values.len(), min: q(0.0), q1: q(0.25), median: q(0.5), q3: q(0.75), max: q(1.0) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub target: Target,
    pub master_seed: u64,
    pub instances: u64,
    pub tolerance: f64,
    pub ranges: InstanceRanges,
    pub passed: u64,
    pub violations: Vec<Violation>,
    pub slack: SlackSummary,
    /// Not serialized, so reports of identical configurations are identical.
    #[serde(skip)]
    pub wall_clock: Duration,
}

impl CampaignReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn summarize(cfg: &CampaignConfig, outcomes: &[InstanceOutcome], wall_clock: Duration) -> CampaignReport {
    let mut violations = Vec::new();
    let mut slacks = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        if let Ok(d) = &o.diagnostic {
            slacks.push(d.slack());
        }
        if o.passed() {
            continue;
        }
        let (worst_n, slack, error) = match &o.diagnostic {
            Ok(d) => (d.worst_n(), Some(d.slack()).filter(|s| s.is_finite()), None),
            Err(e) => (None, None, Some(e.to_string())),
        };
        violations.push(Violation {
            index: o.index,
            seed: o.seed,
            worst_n,
            slack,
            error,
            instance: o.instance.as_ref().ok().cloned(),
        });
    }
    CampaignReport {
        target: cfg.target,
        master_seed: cfg.master_seed,
        instances: cfg.instances,
        tolerance: cfg.tolerance,
        ranges: cfg.ranges,
        passed: outcomes.len() as u64 - violations.len() as u64,
        violations,
        slack: SlackSummary::from_values(slacks),
        wall_clock,
    }
}

pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignReport> {
    let start = Instant::now();
    let outcomes = run_instances(cfg)?;
    Ok(summarize(cfg, &outcomes, start.elapsed()))
}

/// Regenerated instance together with its verbose evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replay {
    pub target: Target,
    pub seed: u64,
    pub instance: Instance,
    pub diagnostic: Diagnostic,
    pub passed: bool,
}

/// Regenerates the instance for `seed` and evaluates it at `tol`.
pub fn replay(target: Target, seed: u64, ranges: &InstanceRanges, tol: f64) -> Result<Replay> {
    let instance = generate_instance(target, seed, ranges)?;
    let diagnostic = evaluate_instance(&instance, tol)?;
    Ok(Replay { target, seed, passed: diagnostic.passed(), instance, diagnostic })
}

/// [`replay`] with the target given by name.
pub fn replay_named(target: &str, seed: u64, ranges: &InstanceRanges, tol: f64) -> Result<Replay> {
    replay(target.parse()?, seed, ranges, tol)
}
