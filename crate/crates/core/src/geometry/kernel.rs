use super::hull::{convex_hull, enumerate_subsets};
use super::polytope::{Halfspace, Polytope};
use super::{GeometryError, Point, PointSet, Tolerances};

/// The safe kernel: intersection of the hulls of every sub-multiset of `a`
/// with `n` points removed.
///
/// The halfspaces of all `C(m, n)` hulls are pooled, deduplicated, and the
/// vertices recovered by brute-force enumeration over `d`-tuples of
/// constraint boundaries. An empty intersection is a valid result and comes
/// back flagged empty. Removing all `m` points leaves nothing to intersect,
/// which is also reported as empty.
pub fn safe_kernel(a: &PointSet, n: usize, tol: &Tolerances) -> Result<Polytope, GeometryError> {
    let m = a.cardinality();
    if n > m {
        return Err(GeometryError::InvalidArgument(format!(
            "cannot remove {n} points from a set of {m}"
        )));
    }
    if n == m {
        return Ok(Polytope::empty(a.dim()));
    }
    if n == 0 {
        return convex_hull(a, tol);
    }
    let mut pooled: Vec<Halfspace> = Vec::new();
    for subset in enumerate_subsets(a, n)? {
        pooled.extend(convex_hull(&subset, tol)?.halfspaces().iter().cloned());
    }
    let k = Polytope::from_halfspaces(a.dim(), pooled, tol)?;
    Ok(snap_to_inputs(k, a, tol))
}

/// Replaces each vertex lying within `tol.vertex` (max-norm) of an input
/// point by the nearest such input, so kernels that pass through data
/// points report them bit-for-bit.
fn snap_to_inputs(k: Polytope, a: &PointSet, tol: &Tolerances) -> Polytope {
    if k.is_empty() {
        return k;
    }
    let mut vertices: Vec<Point> = k
        .vertices()
        .iter()
        .map(|v| {
            a.iter()
                .map(|p| (v.max_abs_diff(p), p))
                .filter(|(d, _)| *d <= tol.vertex)
                .min_by(|x, y| x.0.total_cmp(&y.0))
                .map_or_else(|| v.clone(), |(_, p)| p.clone())
        })
        .collect();
    vertices.sort_by(Point::lex_cmp);
    vertices.dedup();
    Polytope::from_parts(k.dim(), vertices, k.halfspaces().to_vec(), tol)
}

/// Sufficient condition for a nonempty kernel: `m >= n(d+1) + 1`.
///
/// `false` does not imply the kernel is empty.
pub fn kernel_guaranteed_nonempty(m: usize, n: usize, d: usize) -> bool {
    m > n * (d + 1)
}

/// Axis-aligned box whose `p`-th side spans the `(n+1)`-th smallest to the
/// `(n+1)`-th largest `p`-th coordinate of `a`. Needs `m >= 2n + 1`.
///
/// This is what coordinate-wise trimming guarantees; the safe kernel always
/// sits inside it.
pub fn trimmed_box(a: &PointSet, n: usize, tol: &Tolerances) -> Result<Polytope, GeometryError> {
    let m = a.cardinality();
    if m < 2 * n + 1 {
        return Err(GeometryError::InvalidArgument(format!(
            "trimmed box needs at least {} points, got {m}",
            2 * n + 1
        )));
    }
    let dim = a.dim();
    let bounds: Vec<(f64, f64)> = (0..dim)
        .map(|p| {
            let mut vals: Vec<f64> = a.iter().map(|pt| pt.coords()[p]).collect();
            vals.sort_by(f64::total_cmp);
            (vals[n], vals[m - 1 - n])
        })
        .collect();

    let mut halfspaces = Vec::with_capacity(2 * dim);
    for (p, &(lo, hi)) in bounds.iter().enumerate() {
        let mut up = vec![0.0; dim];
        up[p] = 1.0;
        let mut down = vec![0.0; dim];
        down[p] = -1.0;
        halfspaces.push(Halfspace::from_unit(up, hi));
        halfspaces.push(Halfspace::from_unit(down, -lo));
    }

    let mut corners: Vec<Vec<f64>> = vec![Vec::with_capacity(dim)];
    for &(lo, hi) in &bounds {
        let sides: &[f64] = if hi - lo <= tol.vertex { &[lo] } else { &[lo, hi] };
        corners = corners
            .into_iter()
            .flat_map(|c| {
                sides.iter().map(move |&s| {
                    let mut next = c.clone();
                    next.push(s);
                    next
                })
            })
            .collect();
    }
    let vertices = corners.into_iter().map(Point::from_vec).collect();
    Ok(Polytope::from_parts(dim, vertices, halfspaces, tol))
}
