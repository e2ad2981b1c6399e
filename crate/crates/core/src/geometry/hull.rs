use itertools::Itertools;

use super::linalg::{dot, orthogonal_complement, orthonormal_span, sub};
use super::polytope::{dedup_halfspaces, Halfspace, Polytope};
use super::{GeometryError, Point, PointSet, Tolerances};

/// All sub-multisets of `a` with `n` elements removed, `C(m, n)` of them.
///
/// Points are treated as distinct slots, so duplicates in `a` produce
/// repeated subsets. Subsets come out in lexicographic order of the kept
/// indices.
pub fn enumerate_subsets(a: &PointSet, n: usize) -> Result<Vec<PointSet>, GeometryError> {
    let m = a.cardinality();
    if n > m {
        return Err(GeometryError::InvalidArgument(format!(
            "cannot remove {n} points from a set of {m}"
        )));
    }
    Ok((0..m)
        .combinations(m - n)
        .map(|keep| PointSet {
            dim: a.dim(),
            points: keep.into_iter().map(|i| a.points()[i].clone()).collect(),
        })
        .collect())
}

/// Convex hull of a nonempty point set, in both representations.
///
/// Facets come from every affinely independent `k`-subset of the distinct
/// points (`k` being the affine dimension of the set) whose hyperplane has
/// all points on one side. Sets that do not span `R^d` are handled in their
/// own affine hull, and each missing direction is pinned by two opposing
/// halfspaces.
pub fn convex_hull(s: &PointSet, tol: &Tolerances) -> Result<Polytope, GeometryError> {
    if s.is_empty() {
        return Err(GeometryError::EmptyPointSet);
    }
    let dim = s.dim();

    let mut distinct: Vec<&Point> = Vec::with_capacity(s.cardinality());
    for p in s.iter() {
        if !distinct.iter().any(|q| q.max_abs_diff(p) <= tol.vertex) {
            distinct.push(p);
        }
    }

    let base = distinct[0].coords();
    let diffs: Vec<Vec<f64>> = distinct[1..].iter().map(|p| sub(p.coords(), base)).collect();
    let span = orthonormal_span(&diffs, tol.geom);
    let k = span.len();

    // Coordinates inside the affine hull. Full-dimensional sets keep their
    // original coordinates so facet offsets stay exact.
    let local: Vec<Vec<f64>> = if k == dim {
        distinct.iter().map(|p| p.coords().to_vec()).collect()
    } else {
        distinct
            .iter()
            .map(|p| {
                let d = sub(p.coords(), base);
                span.iter().map(|q| dot(&d, q)).collect()
            })
            .collect()
    };

    let (local_normals, vertex_idx) = full_dimensional_hull(&local, k, tol.geom);

    let lift = |n_local: &[f64]| -> Vec<f64> {
        if k == dim {
            n_local.to_vec()
        } else {
            let mut n = vec![0.0; dim];
            for (c, q) in n_local.iter().zip(&span) {
                for (ni, qi) in n.iter_mut().zip(q) {
                    *ni += c * qi;
                }
            }
            n
        }
    };
    // Supports run over every input, not just the deduplicated ones, so the
    // halfspaces always contain the full set.
    let support = |n: &[f64]| -> f64 {
        s.iter()
            .map(|p| dot(n, p.coords()))
            .fold(f64::NEG_INFINITY, f64::max)
    };

    let mut halfspaces: Vec<Halfspace> = local_normals
        .iter()
        .map(|nl| {
            let n = lift(nl);
            let b = support(&n);
            Halfspace::from_unit(n, b)
        })
        .collect();
    for u in orthogonal_complement(&span, dim) {
        let neg: Vec<f64> = u.iter().map(|c| -c).collect();
        let (bu, bn) = (support(&u), support(&neg));
        halfspaces.push(Halfspace::from_unit(u, bu));
        halfspaces.push(Halfspace::from_unit(neg, bn));
    }
    let halfspaces = dedup_halfspaces(halfspaces, tol.geom);

    let vertices = vertex_idx.into_iter().map(|i| distinct[i].clone()).collect();
    Ok(Polytope::from_parts(dim, vertices, halfspaces, tol))
}

/// Facet normals and vertex indices of a point set that spans `R^k`.
fn full_dimensional_hull(points: &[Vec<f64>], k: usize, tol: f64) -> (Vec<Vec<f64>>, Vec<usize>) {
    match k {
        0 => (Vec::new(), vec![0]),
        1 => {
            let (lo, hi) = points.iter().enumerate().fold((0, 0), |(lo, hi), (i, p)| {
                (
                    if p[0] < points[lo][0] { i } else { lo },
                    if p[0] > points[hi][0] { i } else { hi },
                )
            });
            (vec![vec![1.0], vec![-1.0]], vec![lo, hi])
        }
        _ => {
            let mut normals: Vec<Vec<f64>> = Vec::new();
            for combo in (0..points.len()).combinations(k) {
                let anchor = &points[combo[0]];
                let edges: Vec<Vec<f64>> =
                    combo[1..].iter().map(|&i| sub(&points[i], anchor)).collect();
                let span = orthonormal_span(&edges, tol);
                if span.len() != k - 1 {
                    continue;
                }
                let n = orthogonal_complement(&span, k).pop().expect("one missing direction");
                let offset = dot(&n, anchor);
                let (lo, hi) = points.iter().fold((0.0f64, 0.0f64), |(lo, hi), p| {
                    let s = dot(&n, p) - offset;
                    (lo.min(s), hi.max(s))
                });
                if hi <= tol {
                    normals.push(n.clone());
                }
                if lo >= -tol {
                    normals.push(n.iter().map(|c| -c).collect());
                }
            }
            normals.sort_by(|a, b| {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
            normals.dedup_by(|a, b| a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() <= tol));

            let offsets: Vec<f64> = normals
                .iter()
                .map(|n| points.iter().map(|q| dot(n, q)).fold(f64::NEG_INFINITY, f64::max))
                .collect();
            // A point is a vertex iff its tight facets pin it down completely.
            let vertices = (0..points.len())
                .filter(|&i| {
                    let p = &points[i];
                    let tight: Vec<Vec<f64>> = normals
                        .iter()
                        .zip(&offsets)
                        .filter(|(n, &b)| (dot(n, p) - b).abs() <= tol)
                        .map(|(n, _)| n.clone())
                        .collect();
                    orthonormal_span(&tight, 1e-9).len() == k
                })
                .collect();
            (normals, vertices)
        }
    }
}
