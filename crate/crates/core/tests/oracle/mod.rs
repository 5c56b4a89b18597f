//! Reference implementations used to cross-check the library. Everything
//! here works on plain nested vectors and avoids the library's linear
//! algebra so that agreement is meaningful.

#![allow(dead_code)]

use sepmaj::numerics::ComplexMatrix;
use sepmaj::C64;

pub type Mat = Vec<Vec<C64>>;

pub fn from_lib(m: &ComplexMatrix) -> Mat {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get(i, j)).collect()).collect()
}

pub fn zeros(r: usize, c: usize) -> Mat {
    vec![vec![C64::new(0.0, 0.0); c]; r]
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let (r, k, c) = (a.len(), b.len(), b[0].len());
    let mut out = zeros(r, c);
    for i in 0..r {
        for l in 0..k {
            let x = a[i][l];
            for j in 0..c {
                out[i][j] += x * b[l][j];
            }
        }
    }
    out
}

pub fn adjoint(a: &Mat) -> Mat {
    let (r, c) = (a.len(), a[0].len());
    let mut out = zeros(c, r);
    for i in 0..r {
        for j in 0..c {
            out[j][i] = a[i][j].conj();
        }
    }
    out
}

pub fn max_abs_diff(a: &Mat, b: &Mat) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn trace(a: &Mat) -> C64 {
    (0..a.len()).map(|i| a[i][i]).sum()
}

/// Cyclic Jacobi rotations on a real symmetric matrix; eigenvalues ascending.
pub fn symmetric_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    let scale: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigenvalues of a Hermitian matrix through its real embedding
/// `[[Re, -Im], [Im, Re]]`, where every eigenvalue appears twice.
pub fn hermitian_eigenvalues(h: &Mat) -> Vec<f64> {
    let n = h.len();
    let mut real = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            let z = 0.5 * (h[i][j] + h[j][i].conj());
            real[i][j] = z.re;
            real[i + n][j + n] = z.re;
            real[i][j + n] = -z.im;
            real[i + n][j] = z.im;
        }
    }
    symmetric_eigenvalues(real).into_iter().step_by(2).collect()
}

pub fn sum_smallest(ev: &[f64], n: usize) -> f64 {
    ev[..n].iter().sum()
}

pub fn reduced_a(amps: &[C64], da: usize, db: usize) -> Mat {
    let mut out = zeros(da, da);
    for i in 0..da {
        for k in 0..da {
            out[i][k] = (0..db).map(|j| amps[i * db + j] * amps[k * db + j].conj()).sum();
        }
    }
    out
}

pub fn reduced_b(amps: &[C64], da: usize, db: usize) -> Mat {
    let mut out = zeros(db, db);
    for j in 0..db {
        for l in 0..db {
            out[j][l] = (0..da).map(|i| amps[i * db + j] * amps[i * db + l].conj()).sum();
        }
    }
    out
}

/// Ascending weights of the (possibly unnormalized) vector, from the
/// smaller reduced operator.
pub fn schmidt_weights(amps: &[C64], da: usize, db: usize) -> Vec<f64> {
    let rho = if da <= db { reduced_a(amps, da, db) } else { reduced_b(amps, da, db) };
    hermitian_eigenvalues(&rho).into_iter().map(|x| x.max(0.0)).collect()
}

pub fn prefix(w: &[f64]) -> Vec<f64> {
    w.iter()
        .scan(0.0, |acc, x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

pub fn pad_low(w: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len - w.len()];
    out.extend_from_slice(w);
    out
}

pub fn norm_sq(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// `(A (x) B) v` by explicit index sums.
pub fn apply_pair(a: &Mat, b: &Mat, v: &[C64], da: usize, db: usize) -> Vec<C64> {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![C64::new(0.0, 0.0); ra * rb];
    for i2 in 0..ra {
        for j2 in 0..rb {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..da {
                for j in 0..db {
                    acc += a[i2][i] * b[j2][j] * v[i * db + j];
                }
            }
            out[i2 * rb + j2] = acc;
        }
    }
    out
}

/// Minimum over `n` of `E_n(source) - sum_k p_k E_n(phi_k)`, scaled as
/// `slack / max(1, rhs)`, with all weight vectors aligned at the top.
pub fn majorization_min_slack(source: &[f64], ensemble: &[(f64, Vec<f64>)]) -> f64 {
    let len = ensemble.iter().map(|(_, w)| w.len()).chain([source.len()]).max().unwrap();
    let rhs = prefix(&pad_low(source, len));
    let mut lhs = vec![0.0; len];
    for (p, w) in ensemble {
        for (acc, e) in lhs.iter_mut().zip(prefix(&pad_low(w, len))) {
            *acc += p * e;
        }
    }
    rhs.iter().zip(&lhs).map(|(r, l)| (r - l) / r.abs().max(1.0)).fold(f64::INFINITY, f64::min)
}

/// Largest `p` for which `{(p, target), (1 - p, product)}` is reachable,
/// by bisection on the majorization test.
pub fn pmax_bisection(source: &[f64], target: &[f64]) -> f64 {
    let len = source.len().max(target.len());
    let mut product = vec![0.0; len];
    product[len - 1] = 1.0;
    let feasible = |p: f64| majorization_min_slack(source, &[(p, target.to_vec()), (1.0 - p, product.clone())]) >= -1e-13;
    if feasible(1.0) {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

pub fn entropy_bits(w: &[f64]) -> f64 {
    w.iter().filter(|&&x| x > 0.0).map(|x| -x * x.log2()).sum()
}
