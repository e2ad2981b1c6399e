use itertools::Itertools;
use serde::Serialize;

use super::simplex::{solve, LinearProgram, LpOutcome, SimplexOptions};
use super::OracleError;
use crate::geometry::Point;

/// Convex weights expressing a point as a combination of generators.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipCertificate {
    /// `(generator index, weight)`, nonzero weights only, by index.
    pub lambdas: Vec<(usize, f64)>,
}

impl MembershipCertificate {
    pub fn weight(&self, index: usize) -> f64 {
        self.lambdas
            .iter()
            .find(|(i, _)| *i == index)
            .map_or(0.0, |(_, w)| *w)
    }

    pub fn total_weight(&self) -> f64 {
        self.lambdas.iter().map(|(_, w)| w).sum()
    }

    /// `Σ λ_j x_j` over the given generators.
    pub fn recombine(&self, points: &[Point]) -> Vec<f64> {
        let dim = points.first().map_or(0, Point::dim);
        let mut out = vec![0.0; dim];
        for &(j, w) in &self.lambdas {
            for (o, c) in out.iter_mut().zip(points[j].coords()) {
                *o += w * c;
            }
        }
        out
    }

    /// Largest violation among nonnegativity, unit sum, and reproduction of `y`.
    pub fn max_error(&self, points: &[Point], y: &Point) -> f64 {
        let neg = self
            .lambdas
            .iter()
            .map(|(_, w)| (-w).max(0.0))
            .fold(0.0, f64::max);
        let sum = (self.total_weight() - 1.0).abs();
        let repro = self
            .recombine(points)
            .iter()
            .zip(y.coords())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        neg.max(sum).max(repro)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Orthonormal eigenvectors of a small symmetric matrix by cyclic Jacobi
/// rotations. Returned as rows; orthonormal even if not fully converged.
fn jacobi_eigenvectors(mut a: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _ in 0..64 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let diag: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum();
        if off <= 1e-30 * diag || off == 0.0 {
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
                for row in a.iter_mut() {
                    let (kp, kq) = (row[p], row[q]);
                    row[p] = c * kp - s * kq;
                    row[q] = s * kp + c * kq;
                }
                let (lo, hi) = a.split_at_mut(q);
                for (pk, qk) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                    (*pk, *qk) = (c * *pk - s * *qk, s * *pk + c * *qk);
                }
                for row in v.iter_mut() {
                    let (kp, kq) = (row[p], row[q]);
                    row[p] = c * kp - s * kq;
                    row[q] = s * kp + c * kq;
                }
            }
        }
    }
    (0..n).map(|j| v.iter().map(|row| row[j]).collect()).collect()
}

/// Is `y` in the convex hull of `points` (to within `tol`)?
///
/// Posed as `min Σ|r|` over `λ >= 0, Σλ = 1, Σ λ_j (x_j - y) = r` and
/// solved by the dense simplex in the principal axes of the generators.
/// Axes along which every generator is within `tol / 2d` of `y` are
/// dropped (they cannot contribute more than that to the residual, and
/// keeping them makes the tableau nearly singular). The remaining rows are
/// scaled to unit max; `y` is accepted when the optimal residual is below
/// `tol / 2` in original units.
///
/// The solver's weights are clipped at zero and renormalized to unit sum.
/// A returned certificate reproduces `y` within `tol` in every coordinate,
/// and this is re-checked; a certificate that fails the check is a solver
/// error, never a verdict. A `None` verdict is backed by the optimal dual,
/// which must give a direction strictly separating `y` from every generator.
pub fn hull_membership(
    points: &[Point],
    y: &Point,
    tol: f64,
) -> Result<Option<MembershipCertificate>, OracleError> {
    let Some(first) = points.first() else {
        return Err(OracleError::InvalidArgument("no generating points".into()));
    };
    let dim = first.dim();
    if let Some(bad) = points.iter().map(Point::dim).chain([y.dim()]).find(|&d| d != dim) {
        return Err(OracleError::DimensionMismatch {
            expected: dim,
            found: bad,
        });
    }
    let centered: Vec<Vec<f64>> = points
        .iter()
        .map(|x| x.coords().iter().zip(y.coords()).map(|(a, b)| a - b).collect())
        .collect();
    let count = points.len() as f64;
    let mean: Vec<f64> = (0..dim).map(|p| centered.iter().map(|c| c[p]).sum::<f64>() / count).collect();
    let scatter: Vec<Vec<f64>> = (0..dim)
        .map(|p| {
            (0..dim)
                .map(|q| centered.iter().map(|c| (c[p] - mean[p]) * (c[q] - mean[q])).sum())
                .collect()
        })
        .collect();
    let drop_below = tol / (2.0 * dim as f64);
    // Kept principal axes with their row scales; rows are scaled to unit
    // max so pivot thresholds mean the same thing at every data scale.
    let mut axes: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut a: Vec<Vec<f64>> = Vec::new();
    for u in jacobi_eigenvectors(scatter) {
        let row: Vec<f64> = centered.iter().map(|c| dot(c, &u)).collect();
        let s = row.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if s <= drop_below {
            continue;
        }
        a.push(row.iter().map(|v| v / s).collect());
        axes.push((u, s));
    }
    // Columns: λ, then a positive and a negative residual per axis row.
    let m = points.len();
    let r = a.len();
    for (k, row) in a.iter_mut().enumerate() {
        row.extend((0..2 * r).map(|j| match j {
            j if j == k => 1.0,
            j if j == r + k => -1.0,
            _ => 0.0,
        }));
    }
    let mut sum_row = vec![1.0; m];
    sum_row.extend(vec![0.0; 2 * r]);
    a.push(sum_row);
    let mut b = vec![0.0; r];
    b.push(1.0);
    let mut c = vec![0.0; m];
    c.extend(vec![1.0; 2 * r]);
    let lp = LinearProgram { a, b, c };
    let outcome = solve(&lp, &SimplexOptions::default())?;
    // Residual back in original units, summed over the kept axes.
    let residual = |x: &[f64]| -> f64 {
        axes.iter()
            .enumerate()
            .map(|(k, (_, s))| (x[m + k] + x[m + r + k]) * s)
            .sum()
    };
    match outcome {
        LpOutcome::Optimal { x, duals, .. } if residual(&x) > tol / 2.0 => {
            // At the optimum `g·a_j + π_sum <= 0` for every generator with
            // `π_sum` the optimal scaled residual, so `h = Σ g_k u_k / s_k`
            // separates `y`; check it on the raw data.
            let mut h = vec![0.0; dim];
            for (g, (u, s)) in duals.iter().zip(&axes) {
                for (hp, up) in h.iter_mut().zip(u) {
                    *hp += g / s * up;
                }
            }
            let worst = centered.iter().map(|c| dot(c, &h)).fold(f64::NEG_INFINITY, f64::max);
            if worst < 0.0 {
                Ok(None)
            } else {
                Err(OracleError::Solver(format!(
                    "dual direction does not separate (worst margin {worst:e})"
                )))
            }
        }
        LpOutcome::Infeasible { infeasibility, .. } => Err(OracleError::Solver(format!(
            "residual program reported infeasible ({infeasibility:e})"
        ))),
        LpOutcome::Unbounded => Err(OracleError::Solver(
            "residual program reported unbounded".into(),
        )),
        LpOutcome::Optimal { mut x, .. } => {
            x.truncate(m);
            // The sum row carries residual like any other; renormalize so
            // an error in `Σλ` is not multiplied by the magnitude of `y`.
            let x: Vec<f64> = x.into_iter().map(|w| w.max(0.0)).collect();
            let total: f64 = x.iter().sum();
            if total <= 0.0 {
                return Err(OracleError::Solver("feasible point has zero total weight".into()));
            }
            let cert = MembershipCertificate {
                lambdas: x
                    .into_iter()
                    .enumerate()
                    .filter(|(_, w)| *w != 0.0)
                    .map(|(j, w)| (j, w / total))
                    .collect(),
            };
            let err = cert.max_error(points, y);
            if err > tol + 1e-12 {
                return Err(OracleError::Solver(format!(
                    "certificate misses the target by {err:e} (tolerance {tol:e})"
                )));
            }
            Ok(Some(cert))
        }
    }
}

/// Kernel membership straight from the definition: `y` must lie in the hull
/// of every sub-multiset of `a` with `n` points removed. Shares no code with
/// the geometry module.
pub fn kernel_membership_bruteforce(
    a: &[Point],
    n: usize,
    y: &Point,
    tol: f64,
) -> Result<bool, OracleError> {
    let m = a.len();
    if n > m {
        return Err(OracleError::InvalidArgument(format!(
            "cannot remove {n} points from {m}"
        )));
    }
    if n == m {
        return Ok(false);
    }
    for keep in (0..m).combinations(m - n) {
        let subset: Vec<Point> = keep.into_iter().map(|i| a[i].clone()).collect();
        if hull_membership(&subset, y, tol)?.is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// One-dimensional kernel by order statistics: `[(n+1)-th smallest,
/// (n+1)-th largest]`. Needs `m >= 2n + 1`.
pub fn sorted_trim_interval(values: &[f64], n: usize) -> Result<(f64, f64), OracleError> {
    let m = values.len();
    if m < 2 * n + 1 {
        return Err(OracleError::InvalidArgument(format!(
            "need at least {} values to trim {n} from each end, got {m}",
            2 * n + 1
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok((sorted[n], sorted[m - 1 - n]))
}
