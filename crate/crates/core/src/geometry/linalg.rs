//! Small dense helpers for the brute-force geometry. Dimensions are tiny
//! (`d <= ~4`), so plain `Vec<f64>` rows beat pulling in a matrix crate.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Removes the components of `v` along each (orthonormal) basis vector.
/// Two passes of modified Gram-Schmidt keep the residual orthogonal to
/// working precision.
fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(v, q);
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= c * qi;
            }
        }
    }
}

/// Orthonormal basis of `span(vectors)` by pivoted Gram-Schmidt: at each step
/// the candidate with the largest residual joins the basis, until every
/// residual is at most `tol` in length.
pub fn orthonormal_span(vectors: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut residuals: Vec<Vec<f64>> = vectors.to_vec();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    loop {
        let best = residuals
            .iter()
            .enumerate()
            .map(|(i, r)| (i, norm(r)))
            .max_by(|a, b| a.1.total_cmp(&b.1));
        let Some((idx, len)) = best else { break };
        if len <= tol {
            break;
        }
        let mut q = residuals.swap_remove(idx);
        project_out(&mut q, &basis);
        let len = norm(&q);
        if len <= tol {
            break;
        }
        q.iter_mut().for_each(|x| *x /= len);
        for r in residuals.iter_mut() {
            project_out(r, std::slice::from_ref(&q));
        }
        basis.push(q);
    }
    basis
}

/// Completes an orthonormal `basis` of a subspace of `R^dim` with an
/// orthonormal basis of its orthogonal complement.
pub fn orthogonal_complement(basis: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
    let mut all = basis.to_vec();
    let mut complement = Vec::new();
    while all.len() < dim {
        // Pick the standard basis vector that survives projection best.
        let (_, mut q) = (0..dim)
            .map(|axis| {
                let mut e = vec![0.0; dim];
                e[axis] = 1.0;
                project_out(&mut e, &all);
                (norm(&e), e)
            })
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .expect("dim >= 1");
        let len = norm(&q);
        q.iter_mut().for_each(|x| *x /= len);
        // Snap exact axis directions so 1-D and axis-aligned cases stay exact.
        for x in q.iter_mut() {
            if (x.abs() - 1.0).abs() < 1e-15 {
                *x = x.signum();
            } else if x.abs() < 1e-15 {
                *x = 0.0;
            }
        }
        all.push(q.clone());
        complement.push(q);
    }
    complement
}

/// Solves the square system `rows · x = rhs` by Gaussian elimination with
/// partial pivoting. Returns `None` when a pivot falls below `singular_tol`.
pub fn solve(rows: &[&[f64]], rhs: &[f64], singular_tol: f64) -> Option<Vec<f64>> {
    let n = rhs.len();
    let mut a: Vec<Vec<f64>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, &b)| {
            let mut row = r.to_vec();
            row.push(b);
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < singular_tol {
            return None;
        }
        a.swap(col, pivot);
        let (top, rest) = a.split_at_mut(col + 1);
        let prow = &top[col];
        for row in rest.iter_mut() {
            let f = row[col] / prow[col];
            if f != 0.0 {
                for (v, pv) in row[col..].iter_mut().zip(&prow[col..]) {
                    *v -= f * pv;
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (a[i][n] - s) / a[i][i];
    }
    Some(x)
}
