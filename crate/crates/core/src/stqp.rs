//! Standard quadratic programs: maximize `x' A x` over the probability
//! simplex.
//!
//! The exact solver enumerates supports and solves the KKT system of each
//! face; the replicator solver is a multi-start local heuristic.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Largest dimension accepted by [`maximize_exact`].
pub const MAX_EXACT_DIMENSION: usize = 20;
const DETERMINANT_FLOOR: f64 = 1e-12;
const SUPPORT_FLOOR: f64 = -1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub x: Vec<f64>,
    pub value: f64,
    /// Indices with positive weight.
    pub support: Vec<usize>,
    /// KKT multiplier of the simplex constraint, `2 x' A x`.
    pub multiplier: f64,
    /// `max_j (A x)_j - x' A x` over indices outside the support; positive
    /// values mean the point is not a KKT point. Zero for full support.
    pub max_violation: f64,
}

pub fn quadratic_form(matrix: &[Vec<f64>], x: &[f64]) -> f64 {
    matrix
        .iter()
        .zip(x)
        .map(|(row, xi)| xi * row.iter().zip(x).map(|(a, xj)| a * xj).sum::<f64>())
        .sum()
}

/// `(A + A') / 2`.
pub fn symmetrize(matrix: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = matrix.len();
    (0..m)
        .map(|i| {
            (0..m)
                .map(|j| 0.5 * (matrix[i][j] + matrix[j][i]))
                .collect()
        })
        .collect()
}

fn check_square(matrix: &[Vec<f64>]) -> Result<usize> {
    let m = matrix.len();
    if m == 0 {
        return Err(Error::Domain(
            "quadratic program needs at least one variable".into(),
        ));
    }
    if let Some(row) = matrix.iter().find(|r| r.len() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: row.len(),
        });
    }
    if matrix.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Domain(
            "quadratic program has non-finite entries".into(),
        ));
    }
    Ok(m)
}

fn certify(sym: &[Vec<f64>], x: Vec<f64>) -> QpSolution {
    let value = quadratic_form(sym, &x);
    let support: Vec<usize> = (0..x.len()).filter(|&i| x[i] > 0.0).collect();
    let gradient: Vec<f64> = sym
        .iter()
        .map(|row| row.iter().zip(&x).map(|(a, v)| a * v).sum())
        .collect();
    let max_violation = (0..x.len())
        .filter(|i| !support.contains(i))
        .map(|j| gradient[j] - value)
        .fold(None, |acc: Option<f64>, v| {
            Some(acc.map_or(v, |a| a.max(v)))
        })
        .unwrap_or(0.0);
    QpSolution {
        x,
        value,
        support,
        multiplier: 2.0 * value,
        max_violation,
    }
}

/// Gaussian elimination with partial pivoting. Returns `None` when the
/// determinant falls below the floor.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col] == 0.0 {
            return None;
        }
        if pivot != col {
            a.swap(pivot, col);
            b.swap(pivot, col);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            let (upper, lower) = a.split_at_mut(r);
            for (x, &y) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *x -= f * y;
            }
            b[r] -= f * b[col];
        }
    }
    if det.abs() < DETERMINANT_FLOOR {
        return None;
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Stationary point of `x' A x` on the relative interior of the face with
/// the given support, if the bordered KKT system is nonsingular and the
/// solution is feasible.
fn face_candidate(sym: &[Vec<f64>], support: &[usize]) -> Option<Vec<f64>> {
    let k = support.len();
    let mut a = vec![vec![0.0; k + 1]; k + 1];
    for (r, &i) in support.iter().enumerate() {
        for (c, &j) in support.iter().enumerate() {
            a[r][c] = sym[i][j];
        }
        a[r][k] = -1.0;
        a[k][r] = 1.0;
    }
    let mut b = vec![0.0; k + 1];
    b[k] = 1.0;
    let sol = solve_linear(a, b)?;
    if sol[..k].iter().any(|&v| v < SUPPORT_FLOOR) {
        return None;
    }
    let mut x = vec![0.0; sym.len()];
    for (&i, &v) in support.iter().zip(&sol[..k]) {
        x[i] = v.max(0.0);
    }
    let total: f64 = x.iter().sum();
    if total <= 0.0 {
        return None;
    }
    for v in x.iter_mut() {
        *v /= total;
    }
    Some(x)
}

/// Globally maximizes `x' A x` over the simplex by support enumeration.
///
/// Among candidates whose values agree to within rounding, the one with the
/// lexicographically smallest support wins.
pub fn maximize_exact(matrix: &[Vec<f64>]) -> Result<QpSolution> {
    let m = check_square(matrix)?;
    if m > MAX_EXACT_DIMENSION {
        return Err(Error::SizeLimit(format!(
            "exact standard-QP solver handles at most {MAX_EXACT_DIMENSION} actions, got {m}; \
             use the replicator heuristic instead"
        )));
    }
    let sym = symmetrize(matrix);
    let scale = 1.0 + sym.iter().flatten().fold(0.0_f64, |a, v| a.max(v.abs()));

    let mut best: Option<QpSolution> = None;
    let mut support = Vec::with_capacity(m);
    for mask in 1u32..(1u32 << m) {
        support.clear();
        support.extend((0..m).filter(|i| mask & (1 << i) != 0));
        let Some(x) = face_candidate(&sym, &support) else {
            continue;
        };
        let candidate = certify(&sym, x);
        best = Some(match best {
            None => candidate,
            Some(current) => {
                let tol = 1e-12 * scale;
                if candidate.value > current.value + tol
                    || (candidate.value - current.value).abs() <= tol
                        && candidate.support < current.support
                {
                    candidate
                } else {
                    current
                }
            }
        });
    }
    // Vertices always produce a nonsingular system, so `best` is set.
    best.ok_or_else(|| Error::Numeric("no feasible face found".into()))
}

/// Multi-start replicator dynamics `x_i <- x_i (B x)_i / (x' B x)` on the
/// shifted matrix `B = sym(A) + c`, which has the same maximizers on the
/// simplex. Returns the best local optimum found; no global guarantee.
pub fn maximize_replicator(
    matrix: &[Vec<f64>],
    seed: u64,
    restarts: usize,
    iterations: usize,
) -> Result<QpSolution> {
    let m = check_square(matrix)?;
    let sym = symmetrize(matrix);
    let min_entry = sym.iter().flatten().fold(f64::INFINITY, |a, &v| a.min(v));
    let shift = (-min_entry).max(0.0) + 1.0;
    let shifted: Vec<Vec<f64>> = sym
        .iter()
        .map(|row| row.iter().map(|v| v + shift).collect())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<QpSolution> = None;
    for _ in 0..restarts.max(1) {
        let mut x: Vec<f64> = (0..m)
            .map(|_| -(1.0 - rng.gen::<f64>()).ln() + 1e-12)
            .collect();
        let total: f64 = x.iter().sum();
        x.iter_mut().for_each(|v| *v /= total);

        for _ in 0..iterations {
            let bx: Vec<f64> = shifted
                .iter()
                .map(|row| row.iter().zip(&x).map(|(a, v)| a * v).sum())
                .collect();
            let denom: f64 = x.iter().zip(&bx).map(|(a, b)| a * b).sum();
            let mut change = 0.0_f64;
            for (xi, bi) in x.iter_mut().zip(&bx) {
                let next = *xi * bi / denom;
                change = change.max((next - *xi).abs());
                *xi = next;
            }
            if change < 1e-16 {
                break;
            }
        }
        let candidate = certify(&sym, x);
        if best.as_ref().is_none_or(|b| candidate.value > b.value) {
            best = Some(candidate);
        }
    }
    best.ok_or_else(|| Error::Numeric("replicator produced no candidate".into()))
}
