//! Bipartite pure states and their Schmidt-weight monotones.
//!
//! Amplitudes are stored row-major over the product basis: entry
//! `i * dim_b + j` is the coefficient of `|i>|j>`. Reading the same buffer
//! as a `dim_a x dim_b` matrix gives the [`StateMap`] of the state.

use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::{self, ComplexMatrix, Side};
use crate::rng;
use crate::tolerance::Tolerances;
use crate::C64;

/// Normalized state on `H_A (x) H_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dim_a: usize,
    dim_b: usize,
    amplitudes: Vec<C64>,
}

impl PureState {
    /// Validates dimensions, finiteness and normalization (within
    /// [`Tolerances::state_norm`]), then rescales to unit norm.
    pub fn new(dim_a: usize, dim_b: usize, amplitudes: Vec<C64>) -> Result<Self> {
        let norm = Self::checked_norm(dim_a, dim_b, &amplitudes)?;
        if (norm - 1.0).abs() > Tolerances::DEFAULT.state_norm {
            return Err(Error::invalid(format!("state is not normalized (norm {norm})")));
        }
        Ok(Self::rescaled(dim_a, dim_b, amplitudes, norm))
    }

    /// Accepts any nonzero vector and normalizes it.
    pub fn normalized(dim_a: usize, dim_b: usize, amplitudes: Vec<C64>) -> Result<Self> {
        let norm = Self::checked_norm(dim_a, dim_b, &amplitudes)?;
        if norm == 0.0 {
            return Err(Error::invalid("cannot normalize the zero vector"));
        }
        Ok(Self::rescaled(dim_a, dim_b, amplitudes, norm))
    }

    fn checked_norm(dim_a: usize, dim_b: usize, amplitudes: &[C64]) -> Result<f64> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::invalid("local dimensions must be positive"));
        }
        if amplitudes.len() != dim_a * dim_b {
            return Err(Error::invalid(format!(
                "expected {} amplitudes for dims ({dim_a}, {dim_b}), got {}",
                dim_a * dim_b,
                amplitudes.len()
            )));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("state amplitudes must be finite"));
        }
        Ok(amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
    }

    fn rescaled(dim_a: usize, dim_b: usize, amplitudes: Vec<C64>, norm: f64) -> Self {
        // Leave round-off sized deviations alone so that saved states reload bit-identically.
        let amplitudes = if (norm - 1.0).abs() <= 1e-14 {
            amplitudes
        } else {
            amplitudes.into_iter().map(|z| z / norm).collect()
        };
        PureState { dim_a, dim_b, amplitudes }
    }

    /// Product basis state `|i>|j>`.
    pub fn basis(dim_a: usize, dim_b: usize, i: usize, j: usize) -> Result<Self> {
        if i >= dim_a || j >= dim_b {
            return Err(Error::invalid("basis index out of range"));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim_a * dim_b];
        amps[i * dim_b + j] = C64::new(1.0, 0.0);
        Self::new(dim_a, dim_b, amps)
    }

    /// `sum_j sqrt(w_j) |j>|j>`. Weights are normalized if they do not sum to one.
    pub fn from_schmidt_weights(dim_a: usize, dim_b: usize, weights: &[f64]) -> Result<Self> {
        if weights.len() > dim_a.min(dim_b) {
            return Err(Error::invalid(format!(
                "{} Schmidt weights do not fit dims ({dim_a}, {dim_b})",
                weights.len()
            )));
        }
        if weights.iter().any(|&w| !w.is_finite() || w < 0.0) {
            return Err(Error::invalid("Schmidt weights must be finite and nonnegative"));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim_a * dim_b];
        for (j, &w) in weights.iter().enumerate() {
            amps[j * dim_b + j] = C64::new(w.sqrt(), 0.0);
        }
        Self::normalized(dim_a, dim_b, amps)
    }

    /// Haar-random pure state.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dim_a: usize, dim_b: usize) -> Self {
        let amps = rng::random_unit_vector(rng, dim_a * dim_b);
        Self::normalized(dim_a, dim_b, amps).expect("random unit vector is valid")
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim_a, self.dim_b)
    }

    /// `min(dim_a, dim_b)`, the length of the Schmidt vector.
    pub fn schmidt_dim(&self) -> usize {
        self.dim_a.min(self.dim_b)
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(x, y)| x.conj() * y)
            .sum()
    }

    /// `|<self|other>| >= 1 - tol`, i.e. equal up to a global phase.
    pub fn approx_eq_up_to_phase(&self, other: &PureState, tol: f64) -> bool {
        self.dims() == other.dims() && self.inner(other).norm() >= 1.0 - tol
    }

    /// `|psi><psi|` on the full space.
    pub fn density(&self) -> ComplexMatrix {
        let v = &self.amplitudes;
        ComplexMatrix::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
    }

    /// `(U_A (x) U_B) |psi>`.
    pub fn apply_local(&self, ua: &ComplexMatrix, ub: &ComplexMatrix) -> Result<PureState> {
        let m = state_to_map(self);
        let out = &(ua * &m.0) * &ub.transpose();
        map_to_state(&StateMap(out))
    }
}

/// Schmidt form `sum_j sqrt(lambda_j) |a_j>|b_j>` with ascending weights.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    pub weights: Vec<f64>,
    /// Column `j` is `|a_j>`.
    pub basis_a: ComplexMatrix,
    /// Column `j` is `|b_j>`.
    pub basis_b: ComplexMatrix,
}

impl SchmidtDecomposition {
    pub fn reconstruct(&self) -> Result<PureState> {
        let da = self.basis_a.rows();
        let db = self.basis_b.rows();
        let mut amps = vec![C64::new(0.0, 0.0); da * db];
        for (k, &w) in self.weights.iter().enumerate() {
            let s = w.max(0.0).sqrt();
            for i in 0..da {
                let a = self.basis_a.get(i, k) * s;
                for j in 0..db {
                    amps[i * db + j] += a * self.basis_b.get(j, k);
                }
            }
        }
        PureState::normalized(da, db, amps)
    }
}

pub fn schmidt_decompose(s: &PureState) -> Result<SchmidtDecomposition> {
    let norm = s.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > Tolerances::DEFAULT.state_norm {
        return Err(Error::invalid(format!("state is not normalized (norm {norm})")));
    }
    let m = state_to_map(s);
    let dec = numerics::svd(&m.0)?;
    let mut weights: Vec<f64> = dec.singular_values.iter().map(|x| x * x).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    // c_ij = sum_k s_k U_ik conj(V_jk), so |b_k> is the conjugated column of V.
    Ok(SchmidtDecomposition {
        weights,
        basis_a: dec.u,
        basis_b: dec.v.conjugate(),
    })
}

/// Ascending Schmidt weights, length `min(dim_a, dim_b)`.
pub fn schmidt_weights(s: &PureState) -> Result<Vec<f64>> {
    Ok(schmidt_decompose(s)?.weights)
}

/// Running sums of the ascending weights.
pub fn prefix_sums(weights: &[f64]) -> Vec<f64> {
    weights
        .iter()
        .scan(0.0, |acc, &w| {
            *acc += w;
            Some(*acc)
        })
        .collect()
}

/// `E_n` for `n = 1..=D`: the sum of the `n` smallest Schmidt weights.
pub fn e_n_vector(s: &PureState) -> Result<Vec<f64>> {
    Ok(prefix_sums(&schmidt_weights(s)?))
}

/// Reduced density operator on the smaller factor, so that its spectrum is
/// exactly the Schmidt weights with no padding zeros.
pub fn reduced_density_smaller_side(s: &PureState) -> Result<ComplexMatrix> {
    let side = if s.dim_b <= s.dim_a { Side::A } else { Side::B };
    numerics::partial_trace(&s.density(), s.dims(), side)
}

/// Entropy of entanglement in bits.
pub fn entanglement_entropy(s: &PureState) -> Result<f64> {
    Ok(shannon_bits(&schmidt_weights(s)?))
}

pub(crate) fn shannon_bits(weights: &[f64]) -> f64 {
    weights
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| -w * w.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Coefficient matrix of a state, an operator from `H_B` to `H_A`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateMap(pub ComplexMatrix);

impl StateMap {
    /// `diag(sqrt(w_1), ..., sqrt(w_D))` for ascending weights.
    pub fn from_schmidt_weights(weights: &[f64]) -> Result<Self> {
        diagonal_ascending(weights.iter().map(|w| w.sqrt()).collect::<Vec<_>>().as_slice())
            .map(|d| StateMap(ComplexMatrix::from_real_diagonal(&d)))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }
}

pub fn state_to_map(s: &PureState) -> StateMap {
    StateMap(
        ComplexMatrix::from_row_major(s.dim_a, s.dim_b, &s.amplitudes)
            .expect("state amplitudes are finite with matching length"),
    )
}

pub fn map_to_state(m: &StateMap) -> Result<PureState> {
    PureState::normalized(m.0.rows(), m.0.cols(), m.0.to_row_major())
}

pub(crate) fn diagonal_ascending(diag: &[f64]) -> Result<Vec<f64>> {
    if diag.iter().any(|&x| !x.is_finite() || x < 0.0) {
        return Err(Error::invalid("diagonal entries must be finite and nonnegative"));
    }
    if diag.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("diagonal entries must be in ascending order"));
    }
    Ok(diag.to_vec())
}

/// Splits a diagonal ascending map into the part holding its `n` smallest
/// entries and the remainder.
pub fn truncate_map(m: &StateMap, n: usize) -> Result<(StateMap, StateMap)> {
    let mat = &m.0;
    let d = mat.rows().min(mat.cols());
    if n == 0 || n > d {
        return Err(Error::invalid(format!("truncate_map: n = {n} outside 1..={d}")));
    }
    let zero = C64::new(0.0, 0.0);
    for i in 0..mat.rows() {
        for j in 0..mat.cols() {
            if i != j && mat.get(i, j) != zero {
                return Err(Error::invalid("truncate_map: map is not diagonal"));
            }
        }
    }
    let diag: Vec<f64> = (0..d)
        .map(|i| {
            let z = mat.get(i, i);
            if z.im != 0.0 {
                f64::NAN
            } else {
                z.re
            }
        })
        .collect();
    diagonal_ascending(&diag)?;
    let keep = ComplexMatrix::from_fn(mat.rows(), mat.cols(), |i, j| if i == j && i < n { mat.get(i, j) } else { zero });
    let rest = ComplexMatrix::from_fn(mat.rows(), mat.cols(), |i, j| if i == j && i >= n { mat.get(i, j) } else { zero });
    Ok((StateMap(keep), StateMap(rest)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{haar_unitary, seeded};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn bell() -> PureState {
        PureState::from_schmidt_weights(2, 2, &[0.5, 0.5]).unwrap()
    }

    #[test]
    fn rejects_unnormalized_and_bad_lengths() {
        let amps = vec![C64::new(1.0, 0.0); 4];
        assert!(matches!(PureState::new(2, 2, amps.clone()), Err(Error::InvalidInput(_))));
        assert!(PureState::normalized(2, 2, amps).is_ok());
        assert!(PureState::new(2, 2, vec![C64::new(1.0, 0.0)]).is_err());
        assert!(PureState::normalized(2, 2, vec![C64::new(0.0, 0.0); 4]).is_err());
    }

    #[test]
    fn schmidt_of_bell_and_product() {
        let w = schmidt_weights(&bell()).unwrap();
        assert!((w[0] - 0.5).abs() < 1e-14 && (w[1] - 0.5).abs() < 1e-14);
        let w = schmidt_weights(&PureState::basis(2, 2, 0, 1).unwrap()).unwrap();
        assert!(w[0].abs() < 1e-14 && (w[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn schmidt_reconstructs_random_rectangular_states() {
        let mut rng = seeded(4);
        for (da, db) in [(2, 3), (3, 2), (4, 4), (1, 3)] {
            let s = PureState::random(&mut rng, da, db);
            let dec = schmidt_decompose(&s).unwrap();
            assert_eq!(dec.weights.len(), da.min(db));
            assert!(dec.weights.windows(2).all(|w| w[0] <= w[1]));
            assert!((dec.weights.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            let ga = &dec.basis_a.adjoint() * &dec.basis_a;
            let gb = &dec.basis_b.adjoint() * &dec.basis_b;
            let k = da.min(db);
            assert!((&ga - &ComplexMatrix::identity(k)).spectral_norm() < 1e-10);
            assert!((&gb - &ComplexMatrix::identity(k)).spectral_norm() < 1e-10);
            assert!(dec.reconstruct().unwrap().approx_eq_up_to_phase(&s, 1e-9));
        }
    }

    #[test]
    fn e_n_examples() {
        let e = e_n_vector(&bell()).unwrap();
        assert!((e[0] - 0.5).abs() < 1e-14 && (e[1] - 1.0).abs() < 1e-14);
        let s = PureState::from_schmidt_weights(2, 2, &[0.2, 0.8]).unwrap();
        let e = e_n_vector(&s).unwrap();
        assert!((e[0] - 0.2).abs() < 1e-14 && (e[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn e_n_uses_smaller_side_when_b_is_larger() {
        let mut rng = seeded(8);
        let s = PureState::random(&mut rng, 2, 4);
        let e = e_n_vector(&s).unwrap();
        assert_eq!(e.len(), 2);
        let rho = reduced_density_smaller_side(&s).unwrap();
        assert_eq!(rho.rows(), 2);
        for n in 1..=2 {
            assert!((numerics::chi_n(&rho, n).unwrap() - e[n - 1]).abs() < 1e-10);
        }
    }

    #[test]
    fn entropy_examples() {
        assert!((entanglement_entropy(&bell()).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(entanglement_entropy(&PureState::basis(2, 2, 0, 0).unwrap()).unwrap(), 0.0);
        let s = PureState::from_schmidt_weights(2, 2, &[0.2, 0.8]).unwrap();
        // -0.2 log2 0.2 - 0.8 log2 0.8, evaluated independently at high precision
        assert!((entanglement_entropy(&s).unwrap() - 0.721_928_094_887_362_3).abs() < 1e-12);
    }

    #[test]
    fn map_examples() {
        let m = state_to_map(&bell());
        let expected = ComplexMatrix::from_real_diagonal(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
        assert!((&m.0 - &expected).frobenius_norm() < 1e-15);
        let m = state_to_map(&PureState::basis(2, 2, 0, 1).unwrap());
        assert_eq!(m.0.get(0, 1), C64::new(1.0, 0.0));
        assert_eq!(m.0.frobenius_norm(), 1.0);
    }

    #[test]
    fn map_spectrum_matches_reduced_density() {
        let mut rng = seeded(12);
        let s = PureState::random(&mut rng, 3, 3);
        let m = state_to_map(&s).0;
        let mmd = numerics::hermitian_eig(&(&m * &m.adjoint())).unwrap().eigenvalues;
        let rho_a = numerics::partial_trace(&s.density(), (3, 3), Side::B).unwrap();
        let spec = numerics::hermitian_eig(&rho_a).unwrap().eigenvalues;
        for (x, y) in mmd.iter().zip(&spec) {
            assert!((x - y).abs() < 1e-10);
        }
        let back = map_to_state(&state_to_map(&s)).unwrap();
        for (x, y) in back.amplitudes().iter().zip(s.amplitudes()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn truncate_examples() {
        let m = StateMap::from_schmidt_weights(&[0.2, 0.8]).unwrap();
        let (keep, rest) = truncate_map(&m, 1).unwrap();
        assert_eq!(keep.0, ComplexMatrix::from_real_diagonal(&[0.2f64.sqrt(), 0.0]));
        assert_eq!(rest.0, ComplexMatrix::from_real_diagonal(&[0.0, 0.8f64.sqrt()]));
        let (keep, rest) = truncate_map(&m, 2).unwrap();
        assert_eq!(keep, m);
        assert_eq!(rest.0, ComplexMatrix::zeros(2, 2));
        let m3 = StateMap(ComplexMatrix::from_real_diagonal(&[0.1, 0.2, 0.3]));
        let (keep, _) = truncate_map(&m3, 2).unwrap();
        assert_eq!(keep.0, ComplexMatrix::from_real_diagonal(&[0.1, 0.2, 0.0]));
    }

    #[test]
    fn truncate_rejects_bad_maps() {
        let full = StateMap(ComplexMatrix::identity(2).scale(0.5));
        assert!(truncate_map(&full, 3).is_err());
        let mut rng = seeded(1);
        let dense = StateMap(haar_unitary(&mut rng, 2));
        assert!(matches!(truncate_map(&dense, 1), Err(Error::InvalidInput(_))));
        let desc = StateMap(ComplexMatrix::from_real_diagonal(&[0.9, 0.1]));
        assert!(truncate_map(&desc, 1).is_err());
    }

    #[test]
    fn local_unitaries_preserve_weights() {
        let mut rng = seeded(30);
        let s = PureState::random(&mut rng, 3, 2);
        let t = s.apply_local(&haar_unitary(&mut rng, 3), &haar_unitary(&mut rng, 2)).unwrap();
        let (ws, wt) = (schmidt_weights(&s).unwrap(), schmidt_weights(&t).unwrap());
        for (x, y) in ws.iter().zip(&wt) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}
