use itertools::Itertools;
use serde::{Serialize, Serializer};

use super::linalg::{dot, orthonormal_span, solve, sub};
use super::{GeometryError, Point, Tolerances};

const SINGULAR_TOL: f64 = 1e-12;

/// Closed halfspace `{x : normal · x <= offset}` with a unit normal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Halfspace {
    pub normal: Point,
    pub offset: f64,
}

impl Halfspace {
    /// Normalizes `normal` to unit length, scaling `offset` to match.
    pub fn new(normal: Point, offset: f64) -> Result<Self, GeometryError> {
        let len = super::linalg::norm(normal.coords());
        if len == 0.0 || !offset.is_finite() {
            return Err(GeometryError::InvalidArgument(
                "halfspace needs a nonzero normal and finite offset".into(),
            ));
        }
        let unit = normal.coords().iter().map(|c| c / len).collect();
        Ok(Self {
            normal: Point::from_vec(unit),
            offset: offset / len,
        })
    }

    pub(crate) fn from_unit(normal: Vec<f64>, offset: f64) -> Self {
        Self {
            normal: Point::from_vec(normal),
            offset,
        }
    }

    /// `normal · y - offset`; positive means outside.
    pub fn violation(&self, y: &[f64]) -> f64 {
        dot(self.normal.coords(), y) - self.offset
    }

    pub fn dim(&self) -> usize {
        self.normal.dim()
    }

    fn cmp_key(&self, other: &Halfspace) -> std::cmp::Ordering {
        self.normal
            .lex_cmp(&other.normal)
            .then(self.offset.total_cmp(&other.offset))
    }

    fn approx_eq(&self, other: &Halfspace, tol: f64) -> bool {
        self.normal.max_abs_diff(&other.normal) <= tol && (self.offset - other.offset).abs() <= tol
    }
}

/// Bounded convex polytope held in both vertex (V) and halfspace (H) form.
///
/// Vertices are sorted lexicographically. An empty polytope has no vertices
/// and no halfspaces.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    dim: usize,
    vertices: Vec<Point>,
    halfspaces: Vec<Halfspace>,
    empty: bool,
    affine_dim: Option<usize>,
}

impl Polytope {
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            vertices: Vec::new(),
            halfspaces: Vec::new(),
            empty: true,
            affine_dim: None,
        }
    }

    /// Assembles a polytope from representations already known to agree.
    pub(crate) fn from_parts(
        dim: usize,
        mut vertices: Vec<Point>,
        mut halfspaces: Vec<Halfspace>,
        tol: &Tolerances,
    ) -> Self {
        if vertices.is_empty() {
            return Self::empty(dim);
        }
        vertices.sort_by(Point::lex_cmp);
        halfspaces.sort_by(Halfspace::cmp_key);
        let affine_dim = Some(affine_dimension(&vertices, tol.geom));
        Self {
            dim,
            vertices,
            halfspaces,
            empty: false,
            affine_dim,
        }
    }

    /// Builds the polytope `{x : a_i · x <= b_i}` by brute-force vertex
    /// enumeration, then prunes constraints whose removal leaves the vertex
    /// set unchanged. The region must be bounded; unbounded directions show
    /// up as missing vertices.
    pub fn from_halfspaces(
        dim: usize,
        halfspaces: Vec<Halfspace>,
        tol: &Tolerances,
    ) -> Result<Self, GeometryError> {
        if dim == 0 {
            return Err(GeometryError::InvalidArgument("dimension must be >= 1".into()));
        }
        if let Some(h) = halfspaces.iter().find(|h| h.dim() != dim) {
            return Err(GeometryError::DimensionMismatch {
                expected: dim,
                found: h.dim(),
            });
        }
        let halfspaces = dedup_halfspaces(halfspaces, tol.geom);
        let vertices = enumerate_vertices(dim, &halfspaces, tol);
        if vertices.is_empty() {
            return Ok(Self::empty(dim));
        }
        let pruned = prune_redundant(dim, halfspaces, &vertices, tol);
        Ok(Self::from_parts(dim, vertices, pruned, tol))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    /// Dimension of the affine hull of the vertices; `None` when empty.
    pub fn affine_dim(&self) -> Option<usize> {
        self.affine_dim
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.affine_dim == Some(self.dim)
    }

    pub fn contains(&self, y: &Point, tol: f64) -> Result<bool, GeometryError> {
        contains(self, y, tol)
    }
}

/// True iff `y` satisfies every halfspace of `p` to within `tol`.
pub fn contains(p: &Polytope, y: &Point, tol: f64) -> Result<bool, GeometryError> {
    if y.dim() != p.dim {
        return Err(GeometryError::DimensionMismatch {
            expected: p.dim,
            found: y.dim(),
        });
    }
    if p.empty {
        return Ok(false);
    }
    Ok(p.halfspaces.iter().all(|h| h.violation(y.coords()) <= tol))
}

#[derive(Serialize)]
struct PolytopeJson<'a> {
    vertices: &'a [Point],
    halfspaces: &'a [Halfspace],
    empty: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    affine_dim: Option<usize>,
}

impl Serialize for Polytope {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        PolytopeJson {
            vertices: &self.vertices,
            halfspaces: &self.halfspaces,
            empty: self.empty,
            affine_dim: self.affine_dim,
        }
        .serialize(serializer)
    }
}

pub(crate) fn affine_dimension(points: &[Point], tol: f64) -> usize {
    let Some(base) = points.first() else { return 0 };
    let diffs: Vec<Vec<f64>> = points[1..]
        .iter()
        .map(|p| sub(p.coords(), base.coords()))
        .collect();
    orthonormal_span(&diffs, tol).len()
}

pub(crate) fn dedup_halfspaces(mut hs: Vec<Halfspace>, tol: f64) -> Vec<Halfspace> {
    hs.sort_by(Halfspace::cmp_key);
    let mut out: Vec<Halfspace> = Vec::with_capacity(hs.len());
    for h in hs {
        if !out.iter().any(|o| o.approx_eq(&h, tol)) {
            out.push(h);
        }
    }
    out
}

fn push_unique(vertices: &mut Vec<Point>, p: Point, tol: f64) {
    if !vertices.iter().any(|v| v.max_abs_diff(&p) <= tol) {
        vertices.push(p);
    }
}

/// Every intersection of `dim` constraint boundaries that satisfies all
/// constraints within `tol.geom`, deduplicated within `tol.vertex`.
pub(crate) fn enumerate_vertices(dim: usize, hs: &[Halfspace], tol: &Tolerances) -> Vec<Point> {
    let mut vertices = Vec::new();
    if hs.len() < dim {
        return vertices;
    }
    for combo in (0..hs.len()).combinations(dim) {
        let rows: Vec<&[f64]> = combo.iter().map(|&i| hs[i].normal.coords()).collect();
        let rhs: Vec<f64> = combo.iter().map(|&i| hs[i].offset).collect();
        let Some(x) = solve(&rows, &rhs, SINGULAR_TOL) else {
            continue;
        };
        if x.iter().any(|c| !c.is_finite()) {
            continue;
        }
        if hs.iter().all(|h| h.violation(&x) <= tol.geom) {
            push_unique(&mut vertices, Point::from_vec(x), tol.vertex);
        }
    }
    vertices
}

fn same_vertex_set(a: &[Point], b: &[Point], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter().all(|p| b.iter().any(|q| p.max_abs_diff(q) <= tol))
        && b.iter().all(|p| a.iter().any(|q| p.max_abs_diff(q) <= tol))
}

/// Drops constraints whose removal leaves the vertex set unchanged.
///
/// Constraints slack at every vertex go first (they cannot shape a bounded
/// polytope). The rest are tested one at a time against an enclosing box, so
/// a removal that would open an unbounded direction shows up as new box
/// vertices and is rejected.
fn prune_redundant(
    dim: usize,
    hs: Vec<Halfspace>,
    vertices: &[Point],
    tol: &Tolerances,
) -> Vec<Halfspace> {
    let tight_tol = 10.0 * tol.geom;
    let mut kept: Vec<Halfspace> = hs
        .into_iter()
        .filter(|h| vertices.iter().any(|v| h.violation(v.coords()).abs() <= tight_tol))
        .collect();

    let reach = vertices
        .iter()
        .flat_map(|v| v.coords().iter().map(|c| c.abs()))
        .fold(0.0, f64::max);
    let bound = 2.0 * reach + 1.0;
    let enclosing: Vec<Halfspace> = (0..dim)
        .flat_map(|axis| {
            [1.0, -1.0].into_iter().map(move |sign| {
                let mut n = vec![0.0; dim];
                n[axis] = sign;
                Halfspace::from_unit(n, bound)
            })
        })
        .collect();

    let mut i = 0;
    while i < kept.len() {
        let mut trial: Vec<Halfspace> = kept
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, h)| h.clone())
            .collect();
        trial.extend(enclosing.iter().cloned());
        let trial_vertices = enumerate_vertices(dim, &trial, tol);
        if same_vertex_set(&trial_vertices, vertices, tol.vertex) {
            kept.remove(i);
        } else {
            i += 1;
        }
    }
    kept
}
