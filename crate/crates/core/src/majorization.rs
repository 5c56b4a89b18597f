//! Decision procedures on Schmidt weights and verifiers for the operator
//! inequalities behind them.
//!
//! Conventions shared by everything here:
//! - Schmidt vectors are ascending. Vectors of different length are aligned
//!   by padding zeros at the low end.
//! - An inequality `lhs <= rhs` holds when `rhs - lhs >= -tol * max(1, rhs)`.
//! - Every report lists all `n`, including those after the first violation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{self, ComplexMatrix, Side};
use crate::sepops::{self, Ensemble, KrausPair};
use crate::states::{self, PureState, StateMap};
use crate::tolerance::Tolerances;

/// One `n` of an inequality family `lhs(n) <= rhs(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityRow {
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`.
    pub slack: f64,
    pub holds: bool,
}

impl InequalityRow {
    fn new(n: usize, lhs: f64, rhs: f64, tol: f64) -> Self {
        let slack = rhs - lhs;
        InequalityRow { n, lhs, rhs, slack, holds: slack >= -tol * rhs.abs().max(1.0) }
    }

    /// Slack divided by `max(1, |rhs|)`.
    pub fn relative_slack(&self) -> f64 {
        self.slack / self.rhs.abs().max(1.0)
    }
}

fn worst_row(rows: &[InequalityRow]) -> Option<&InequalityRow> {
    rows.iter().min_by(|a, b| a.relative_slack().total_cmp(&b.relative_slack()))
}

/// Per-`n` evaluation of `sum_k p_k E_n(phi_k) <= E_n(psi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorizationReport {
    pub rows: Vec<InequalityRow>,
    pub verdict: bool,
    pub tolerance: f64,
    pub min_slack: f64,
    pub worst_n: usize,
}

impl MajorizationReport {
    fn from_rows(rows: Vec<InequalityRow>, tolerance: f64) -> Self {
        let worst = *worst_row(&rows).expect("at least one row");
        MajorizationReport {
            verdict: rows.iter().all(|r| r.holds),
            min_slack: rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min),
            worst_n: worst.n,
            rows,
            tolerance,
        }
    }
}

/// Left-pads an ascending vector with zeros up to `len`.
pub fn pad_low(weights: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len.saturating_sub(weights.len())];
    out.extend_from_slice(weights);
    out
}

/// Decides whether `ens` can be produced from `source` by a separable
/// operation, equivalently by LOCC.
pub fn check_ensemble_majorization(source: &PureState, ens: &Ensemble, tol: f64) -> Result<MajorizationReport> {
    if source.dims() != ens.dims() {
        return Err(Error::invalid(format!(
            "source has dims {:?}, ensemble has dims {:?}",
            source.dims(),
            ens.dims()
        )));
    }
    let rhs = states::e_n_vector(source)?;
    let d = rhs.len();
    let mut lhs = vec![0.0; d];
    for (p, phi) in ens.outcomes() {
        for (acc, e) in lhs.iter_mut().zip(states::e_n_vector(phi)?) {
            *acc += p * e;
        }
    }
    let rows = (0..d).map(|i| InequalityRow::new(i + 1, lhs[i], rhs[i], tol)).collect();
    Ok(MajorizationReport::from_rows(rows, tol))
}

/// Outcome of a deterministic conversion test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeterministicVerdict {
    pub feasible: bool,
    /// `E_n(source) - E_n(target)` over the padded length.
    pub slack: Vec<f64>,
}

/// Aligned `E_n` vectors of two states.
fn aligned_monotones(source: &PureState, target: &PureState) -> Result<(Vec<f64>, Vec<f64>)> {
    let ws = states::schmidt_weights(source)?;
    let wt = states::schmidt_weights(target)?;
    let d = ws.len().max(wt.len());
    Ok((states::prefix_sums(&pad_low(&ws, d)), states::prefix_sums(&pad_low(&wt, d))))
}

/// `|psi> -> |phi>` with certainty iff `E_n(phi) <= E_n(psi)` for all `n`.
pub fn can_transform_deterministic(source: &PureState, target: &PureState) -> Result<DeterministicVerdict> {
    let (es, et) = aligned_monotones(source, target)?;
    let tol = Tolerances::DEFAULT.inequality;
    let slack: Vec<f64> = es.iter().zip(&et).map(|(s, t)| s - t).collect();
    let feasible = slack.iter().zip(&es).all(|(sl, s)| *sl >= -tol * s.max(1.0));
    Ok(DeterministicVerdict { feasible, slack })
}

/// Optimal conversion probability `min_n E_n(psi) / E_n(phi)`.
///
/// Monotone values at or below [`Tolerances::zero_monotone`] count as zero:
/// `0/0` terms are skipped, `x/0` is `+inf`, `0/x` is `0`. The result is
/// clamped to `[0, 1]` and is exactly `1` iff the deterministic test passes.
pub fn pmax_sep(source: &PureState, target: &PureState) -> Result<f64> {
    if can_transform_deterministic(source, target)?.feasible {
        return Ok(1.0);
    }
    let (es, et) = aligned_monotones(source, target)?;
    let zero = Tolerances::DEFAULT.zero_monotone;
    let mut best = f64::INFINITY;
    for (&s, &t) in es.iter().zip(&et) {
        let ratio = match (s <= zero, t <= zero) {
            (_, true) => continue,
            (true, false) => 0.0,
            (false, false) => s / t,
        };
        best = best.min(ratio);
    }
    Ok(best.clamp(0.0, 1.0))
}

/// Entanglement measure used by [`check_average_monotone`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    /// The whole `E_n` family; the worst `n` is reported.
    EnFamily,
    /// Entropy of entanglement in bits.
    Entropy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotoneCheck {
    pub holds: bool,
    /// `E(psi) - sum_k p_k E(phi_k)`, minimized over `n` for the family.
    pub deficit: f64,
    pub worst_n: Option<usize>,
}

/// Checks that `E` does not increase on average from `source` to `ens`.
pub fn check_average_monotone(source: &PureState, ens: &Ensemble, measure: Measure) -> Result<MonotoneCheck> {
    let tol = Tolerances::DEFAULT.inequality;
    match measure {
        Measure::EnFamily => {
            let report = check_ensemble_majorization(source, ens, tol)?;
            Ok(MonotoneCheck {
                holds: report.min_slack >= -tol,
                deficit: report.min_slack,
                worst_n: Some(report.worst_n),
            })
        }
        Measure::Entropy => {
            let before = states::entanglement_entropy(source)?;
            let mut after = 0.0;
            for (p, phi) in ens.outcomes() {
                after += p * states::entanglement_entropy(phi)?;
            }
            let deficit = before - after;
            Ok(MonotoneCheck { holds: deficit >= -tol, deficit, worst_n: None })
        }
    }
}

/// Both sides of the norm-weighted inequality
/// `sum_k chi_n(rho_k) <= ||R|| chi_n(rho)` for every `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Report {
    pub rows: Vec<InequalityRow>,
    pub norm_r: f64,
    pub holds: bool,
    pub worst_n: usize,
    /// Smallest `slack / max(1, rhs)`.
    pub min_relative_slack: f64,
}

/// Evaluates the inequality for an arbitrary product collection (no closure
/// needed) on a pure state.
///
/// Reduced operators are taken on the smaller factor, by forming
/// `(A_k (x) B_k)|psi><psi|(A_k (x) B_k)^dagger` densely and tracing out the
/// other side.
pub fn verify_theorem2(pairs: &[KrausPair], s: &PureState, tol: f64) -> Result<Theorem2Report> {
    let (input, output) = sepops::collection_dims(pairs)?;
    if input != s.dims() {
        return Err(Error::invalid(format!(
            "collection acts on {input:?}, state has dims {:?}",
            s.dims()
        )));
    }
    if input != output {
        return Err(Error::invalid("operator inequality needs square local operators"));
    }
    let (da, db) = input;
    let trace_out = if db <= da { Side::A } else { Side::B };
    let d = da.min(db);
    let (_, norm_r) = sepops::compute_r(pairs)?;

    let mut lhs = vec![0.0; d];
    for pair in pairs {
        let kraus = numerics::kron(&pair.a, &pair.b);
        let v = kraus.apply(s.amplitudes());
        let rho = ComplexMatrix::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj());
        let reduced = numerics::partial_trace(&rho, (da, db), trace_out)?;
        for (acc, c) in lhs.iter_mut().zip(numerics::chi_all(&reduced)?) {
            *acc += c;
        }
    }
    let reduced = numerics::partial_trace(&s.density(), (da, db), trace_out)?;
    let rhs: Vec<f64> = numerics::chi_all(&reduced)?.into_iter().map(|c| norm_r * c).collect();

    let rows: Vec<InequalityRow> = (0..d).map(|i| InequalityRow::new(i + 1, lhs[i], rhs[i], tol)).collect();
    let worst = *worst_row(&rows).expect("d >= 1");
    Ok(Theorem2Report {
        holds: rows.iter().all(|r| r.holds),
        worst_n: worst.n,
        min_relative_slack: worst.relative_slack(),
        norm_r,
        rows,
    })
}

/// Diagnostics for the complement projector `P_n` built from `A psi~_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectorChecks {
    /// `||P^2 - P||`.
    pub idempotency_residual: f64,
    /// `||P - P^dagger||`.
    pub hermiticity_residual: f64,
    pub rank: usize,
    pub rank_at_least_n: bool,
    /// `||P A psi~_n||`.
    pub annihilation_norm: f64,
    /// `Tr(P A psi_n B B^dagger psi_n^dagger A^dagger P)`.
    pub chain: f64,
    /// `lhs <= chain <= rhs` within tolerance.
    pub chain_ordered: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Report {
    pub n: usize,
    /// `chi_n(A psi B B^dagger psi^dagger A^dagger)`.
    pub lhs: f64,
    /// `Tr(A psi_n B B^dagger psi_n^dagger A^dagger)`.
    pub rhs: f64,
    pub projector: ProjectorChecks,
    /// `lhs <= rhs` within tolerance.
    pub holds: bool,
}

impl Lemma1Report {
    /// Smaller of the two chain gaps `chain - lhs` and `rhs - chain`.
    pub fn min_gap(&self) -> f64 {
        (self.projector.chain - self.lhs).min(self.rhs - self.projector.chain)
    }
}

fn gram_trace(x: &ComplexMatrix) -> f64 {
    x.frobenius_norm().powi(2)
}

/// Evaluates the truncation inequality
/// `chi_n(A psi B B^dagger psi^dagger A^dagger) <= Tr(A psi_n B B^dagger psi_n^dagger A^dagger)`
/// together with the intermediate value obtained through the projector onto
/// the complement of the range of `A psi~_n`.
pub fn verify_lemma1(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    psi_diag: &[f64],
    n: usize,
    tol: f64,
) -> Result<Lemma1Report> {
    let d = psi_diag.len();
    if d == 0 {
        return Err(Error::invalid("psi diagonal is empty"));
    }
    for (name, m) in [("A", a), ("B", b)] {
        if m.rows() != d || m.cols() != d {
            return Err(Error::invalid(format!(
                "{name} is {}x{}, expected {d}x{d}",
                m.rows(),
                m.cols()
            )));
        }
    }
    states::diagonal_ascending(psi_diag)?;
    let psi = StateMap(ComplexMatrix::from_real_diagonal(psi_diag));
    let (psi_n, psi_rest) = states::truncate_map(&psi, n)?;

    let full = &(a * psi.matrix()) * b;
    let t = &full * &full.adjoint();
    let lhs = numerics::chi_n(&t, n)?;

    let kept = &(a * psi_n.matrix()) * b;
    let rhs = gram_trace(&kept);

    let a_rest = a * psi_rest.matrix();
    let p = numerics::complement_projector(&a_rest, Tolerances::DEFAULT.rank_rel)?;
    let idempotency_residual = (&(&p * &p) - &p).spectral_norm();
    let hermiticity_residual = p.hermiticity_residual();
    let rank = numerics::hermitian_eig(&p)?.eigenvalues.iter().filter(|&&x| x > 0.5).count();
    let annihilation_norm = (&p * &a_rest).spectral_norm();
    let chain = gram_trace(&(&p * &kept));

    let slack = tol * rhs.abs().max(1.0);
    let projector = ProjectorChecks {
        idempotency_residual,
        hermiticity_residual,
        rank,
        rank_at_least_n: rank >= n,
        annihilation_norm,
        chain,
        chain_ordered: lhs <= chain + slack && chain <= rhs + slack,
    };
    Ok(Lemma1Report { n, lhs, rhs, projector, holds: lhs <= rhs + slack })
}
