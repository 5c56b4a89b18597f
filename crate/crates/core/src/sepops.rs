//! Separable operations given as product Kraus sets `{A_k (x) B_k}`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::{self, kron, ComplexMatrix};
use crate::rng;
use crate::states::PureState;
use crate::tolerance::Tolerances;

/// Upper bound on the number of Kraus pairs a generator may produce.
pub const MAX_KRAUS_PAIRS: usize = 4096;

/// One product Kraus operator `A (x) B`. `A` maps `H_A` to `H_A'`, `B` maps
/// `H_B` to `H_B'`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausPair {
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
}

impl KrausPair {
    pub fn new(a: ComplexMatrix, b: ComplexMatrix) -> Self {
        KrausPair { a, b }
    }

    pub fn input_dims(&self) -> (usize, usize) {
        (self.a.cols(), self.b.cols())
    }

    pub fn output_dims(&self) -> (usize, usize) {
        (self.a.rows(), self.b.rows())
    }

    /// `A^dagger A (x) B^dagger B`.
    pub fn effect(&self) -> ComplexMatrix {
        kron(&(&self.a.adjoint() * &self.a), &(&self.b.adjoint() * &self.b))
    }

    /// Unnormalized branch `(A (x) B)|psi>` in map form: `A psi B^T`.
    pub fn branch_map(&self, s: &PureState) -> Result<ComplexMatrix> {
        if self.input_dims() != s.dims() {
            return Err(Error::invalid(format!(
                "Kraus pair acts on {:?}, state has dims {:?}",
                self.input_dims(),
                s.dims()
            )));
        }
        let psi = crate::states::state_to_map(s);
        Ok(&(&self.a * psi.matrix()) * &self.b.transpose())
    }
}

/// Common input and output dimensions of a collection, or an error.
pub fn collection_dims(pairs: &[KrausPair]) -> Result<((usize, usize), (usize, usize))> {
    let first = pairs.first().ok_or_else(|| Error::invalid("empty Kraus collection"))?;
    let (inp, out) = (first.input_dims(), first.output_dims());
    for (k, p) in pairs.iter().enumerate() {
        if p.input_dims() != inp || p.output_dims() != out {
            return Err(Error::invalid(format!(
                "Kraus pair {k} has shape {:?} -> {:?}, expected {:?} -> {:?}",
                p.input_dims(),
                p.output_dims(),
                inp,
                out
            )));
        }
    }
    Ok((inp, out))
}

/// `R = sum_k A_k^dagger A_k (x) B_k^dagger B_k` and its largest eigenvalue.
/// No closure is assumed.
pub fn compute_r(pairs: &[KrausPair]) -> Result<(ComplexMatrix, f64)> {
    let ((da, db), _) = collection_dims(pairs)?;
    let mut r = ComplexMatrix::zeros(da * db, da * db);
    for p in pairs {
        r = &r + &p.effect();
    }
    let r = r.hermitian_part();
    let norm = numerics::operator_norm(&r)?;
    Ok((r, norm))
}

/// `||R - I||` for a collection, plus the verdict at [`Tolerances::closure`].
pub fn check_closure(pairs: &[KrausPair]) -> Result<(bool, f64)> {
    let ((da, db), _) = collection_dims(pairs)?;
    let (r, _) = compute_r(pairs)?;
    let diff = &r - &ComplexMatrix::identity(da * db);
    let spec = numerics::hermitian_eig(&diff)?;
    let residual = spec.eigenvalues.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    Ok((residual <= Tolerances::DEFAULT.closure, residual))
}

/// A product Kraus set with its closure residual computed at construction.
#[derive(Debug, Clone)]
pub struct ProductKrausSet {
    pairs: Vec<KrausPair>,
    residual: f64,
}

impl ProductKrausSet {
    /// Validates shapes and records the closure residual. Non-closed sets are
    /// allowed; [`apply_to_pure`] refuses them.
    pub fn new(pairs: Vec<KrausPair>) -> Result<Self> {
        let (_, residual) = check_closure(&pairs)?;
        Ok(ProductKrausSet { pairs, residual })
    }

    pub fn pairs(&self) -> &[KrausPair] {
        &self.pairs
    }

    pub fn into_pairs(self) -> Vec<KrausPair> {
        self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn closure_residual(&self) -> f64 {
        self.residual
    }

    pub fn is_closed(&self) -> bool {
        self.residual <= Tolerances::DEFAULT.closure
    }

    pub fn input_dims(&self) -> (usize, usize) {
        self.pairs[0].input_dims()
    }

    pub fn output_dims(&self) -> (usize, usize) {
        self.pairs[0].output_dims()
    }
}

/// Outcome list `{(p_k, |phi_k>)}`. Probabilities are never renormalized;
/// mass dropped by pruning is kept in `pruned_mass`.
#[derive(Debug, Clone)]
pub struct Ensemble {
    outcomes: Vec<(f64, PureState)>,
    pruned_mass: f64,
}

impl Ensemble {
    /// Checks `p_k` in `[0, 1]`, a common shape, and
    /// `sum p_k + pruned_mass = 1` within [`Tolerances::probability_sum`].
    pub fn new(outcomes: Vec<(f64, PureState)>, pruned_mass: f64) -> Result<Self> {
        let first = outcomes.first().ok_or_else(|| Error::invalid("ensemble has no outcomes"))?;
        let dims = first.1.dims();
        for (p, s) in &outcomes {
            if !(0.0..=1.0 + Tolerances::DEFAULT.probability_sum).contains(p) {
                return Err(Error::invalid(format!("outcome probability {p} outside [0, 1]")));
            }
            if s.dims() != dims {
                return Err(Error::invalid("ensemble members have different dimensions"));
            }
        }
        if !(0.0..=1.0).contains(&pruned_mass) {
            return Err(Error::invalid(format!("pruned mass {pruned_mass} outside [0, 1]")));
        }
        let total: f64 = outcomes.iter().map(|(p, _)| p).sum::<f64>() + pruned_mass;
        if (total - 1.0).abs() > Tolerances::DEFAULT.probability_sum {
            return Err(Error::invalid(format!("ensemble probabilities sum to {total}, expected 1")));
        }
        Ok(Ensemble { outcomes, pruned_mass })
    }

    pub fn singleton(state: PureState) -> Self {
        Ensemble { outcomes: vec![(1.0, state)], pruned_mass: 0.0 }
    }

    pub fn outcomes(&self) -> &[(f64, PureState)] {
        &self.outcomes
    }

    pub fn pruned_mass(&self) -> f64 {
        self.pruned_mass
    }

    pub fn dims(&self) -> (usize, usize) {
        self.outcomes[0].1.dims()
    }

    pub fn total_probability(&self) -> f64 {
        self.outcomes.iter().map(|(p, _)| p).sum()
    }
}

/// Applies a closed product Kraus set to a pure state. Outcomes with
/// `p_k < prune_tol` are dropped and their mass reported.
pub fn apply_to_pure(op: &ProductKrausSet, s: &PureState, prune_tol: f64) -> Result<Ensemble> {
    if !op.is_closed() {
        return Err(Error::Precondition(format!(
            "operation is not closed (residual {:e})",
            op.closure_residual()
        )));
    }
    let (da, db) = op.output_dims();
    let mut outcomes = Vec::with_capacity(op.len());
    let mut pruned = 0.0;
    let mut total = 0.0;
    for pair in op.pairs() {
        let branch = pair.branch_map(s)?;
        let p = branch.frobenius_norm().powi(2);
        total += p;
        if p < prune_tol {
            pruned += p;
            continue;
        }
        let state = PureState::normalized(da, db, branch.to_row_major())
            .map_err(|e| Error::Internal(format!("outcome with p = {p} could not be normalized: {e}")))?;
        outcomes.push((p, state));
    }
    if (total - 1.0).abs() > Tolerances::DEFAULT.probability_sum {
        return Err(Error::Internal(format!("closed operation produced total probability {total}")));
    }
    if outcomes.is_empty() {
        return Err(Error::Internal("every outcome was pruned".into()));
    }
    Ensemble::new(outcomes, pruned)
}

/// Flavour of a random local instrument.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstrumentKind {
    /// Blocks of a Haar-random isometry.
    General,
    /// Rank-one projectors onto a Haar-random basis; needs `n_outcomes == dim`.
    Projective,
}

/// Random local instrument `{M_i}` on a `dim`-dimensional space with
/// `sum_i M_i^dagger M_i = I`.
pub fn gen_local_instrument<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    n_outcomes: usize,
    kind: InstrumentKind,
) -> Result<Vec<ComplexMatrix>> {
    if dim == 0 || n_outcomes == 0 {
        return Err(Error::invalid("instrument needs dim >= 1 and n_outcomes >= 1"));
    }
    match kind {
        InstrumentKind::General => {
            let v = rng::haar_isometry(rng, dim * n_outcomes, dim);
            Ok((0..n_outcomes)
                .map(|i| ComplexMatrix::from_fn(dim, dim, |r, c| v.get(i * dim + r, c)))
                .collect())
        }
        InstrumentKind::Projective => {
            if n_outcomes != dim {
                return Err(Error::invalid("projective instrument needs n_outcomes == dim"));
            }
            let u = rng::haar_unitary(rng, dim);
            Ok((0..dim)
                .map(|i| ComplexMatrix::from_fn(dim, dim, |r, c| u.get(r, i) * u.get(c, i).conj()))
                .collect())
        }
    }
}

/// Parameters for [`gen_separable_locc`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoccParams {
    pub dims: (usize, usize),
    pub rounds: usize,
    pub outcomes_per_round: usize,
    /// Alice acts in odd rounds (1, 3, ...) when true, Bob otherwise.
    pub alice_first: bool,
    /// Draw a fresh instrument for every prior-outcome branch.
    pub branch_dependent: bool,
}

impl LoccParams {
    pub fn new(dims: (usize, usize), rounds: usize, outcomes_per_round: usize) -> Self {
        LoccParams { dims, rounds, outcomes_per_round, alice_first: true, branch_dependent: true }
    }
}

/// Random LOCC protocol flattened into a product Kraus set. Each round one
/// party applies an instrument chosen according to all earlier outcomes.
pub fn gen_separable_locc<R: Rng + ?Sized>(rng: &mut R, params: LoccParams) -> Result<ProductKrausSet> {
    let LoccParams { dims: (da, db), rounds, outcomes_per_round: k, alice_first, branch_dependent } = params;
    if rounds == 0 || k == 0 {
        return Err(Error::invalid("LOCC generator needs rounds >= 1 and outcomes >= 1"));
    }
    let total = (k as u128).checked_pow(rounds as u32).unwrap_or(u128::MAX);
    if total > MAX_KRAUS_PAIRS as u128 {
        return Err(Error::ResourceLimit(format!(
            "{k}^{rounds} = {total} Kraus pairs exceeds the limit of {MAX_KRAUS_PAIRS}"
        )));
    }
    let mut branches = vec![KrausPair::new(ComplexMatrix::identity(da), ComplexMatrix::identity(db))];
    for round in 0..rounds {
        let alice = (round % 2 == 0) == alice_first;
        let dim = if alice { da } else { db };
        let shared = if branch_dependent {
            None
        } else {
            Some(gen_local_instrument(rng, dim, k, InstrumentKind::General)?)
        };
        let mut next = Vec::with_capacity(branches.len() * k);
        for branch in &branches {
            let fresh;
            let instrument = match &shared {
                Some(ops) => ops,
                None => {
                    fresh = gen_local_instrument(rng, dim, k, InstrumentKind::General)?;
                    &fresh
                }
            };
            for m in instrument {
                next.push(if alice {
                    KrausPair::new(m * &branch.a, branch.b.clone())
                } else {
                    KrausPair::new(branch.a.clone(), m * &branch.b)
                });
            }
        }
        branches = next;
    }
    ProductKrausSet::new(branches)
}

/// Convex mixture: pairs of `op1` scaled by `sqrt(q)` followed by pairs of
/// `op2` scaled by `sqrt(1 - q)`. A side with zero weight is left out.
pub fn mix_operations(op1: &ProductKrausSet, op2: &ProductKrausSet, q: f64) -> Result<ProductKrausSet> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::invalid(format!("mixing weight {q} outside [0, 1]")));
    }
    if !op1.is_closed() || !op2.is_closed() {
        return Err(Error::Precondition("both operations must be closed".into()));
    }
    if op1.input_dims() != op2.input_dims() || op1.output_dims() != op2.output_dims() {
        return Err(Error::invalid("operations act on different dimensions"));
    }
    let mut pairs = Vec::with_capacity(op1.len() + op2.len());
    for (op, w) in [(op1, q), (op2, 1.0 - q)] {
        if w == 0.0 {
            continue;
        }
        if w == 1.0 {
            pairs.extend(op.pairs().iter().cloned());
        } else {
            let s = w.sqrt();
            pairs.extend(op.pairs().iter().map(|p| KrausPair::new(p.a.scale(s), p.b.clone())));
        }
    }
    ProductKrausSet::new(pairs)
}

/// `n` independent pairs of square Ginibre matrices scaled by `scale`. No
/// closure.
pub fn gen_random_product_collection<R: Rng + ?Sized>(
    rng: &mut R,
    dims: (usize, usize),
    n: usize,
    scale: f64,
) -> Result<Vec<KrausPair>> {
    if n == 0 || dims.0 == 0 || dims.1 == 0 {
        return Err(Error::invalid("collection needs n >= 1 and positive dimensions"));
    }
    if !scale.is_finite() {
        return Err(Error::invalid("scale must be finite"));
    }
    Ok((0..n)
        .map(|_| {
            KrausPair::new(
                rng::ginibre(rng, dims.0, dims.0).scale(scale),
                rng::ginibre(rng, dims.1, dims.1).scale(scale),
            )
        })
        .collect())
}

/// Projective measurement on one side in the computational basis.
pub fn computational_measurement(dims: (usize, usize), on_alice: bool) -> ProductKrausSet {
    let (da, db) = dims;
    let d = if on_alice { da } else { db };
    let pairs = (0..d)
        .map(|i| {
            let mut diag = vec![0.0; d];
            diag[i] = 1.0;
            let p = ComplexMatrix::from_real_diagonal(&diag);
            if on_alice {
                KrausPair::new(p, ComplexMatrix::identity(db))
            } else {
                KrausPair::new(ComplexMatrix::identity(da), p)
            }
        })
        .collect();
    ProductKrausSet::new(pairs).expect("computational measurement is well formed")
}
