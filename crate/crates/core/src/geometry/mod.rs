//! Convex geometry in `R^d`: points, hulls, and the safe kernel.
//!
//! Everything here is a pure function of its inputs. Polytopes carry both a
//! vertex list and a halfspace list; lower-dimensional bodies pin each missing
//! direction with a pair of opposing halfspaces, so membership and vertex
//! enumeration never need a special case for degeneracy.
//!
//! The enumeration strategies are brute force on purpose (`C(m, d)` facet
//! candidates, `C(h, d)` vertex candidates). That is fine for the sizes this
//! crate targets (`m` up to ~15 points, `d <= 3`); higher dimensions work
//! through the same code at combinatorial cost.

mod hull;
mod kernel;
pub(crate) mod linalg;
mod polytope;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use hull::{convex_hull, enumerate_subsets};
pub use kernel::{kernel_guaranteed_nonempty, safe_kernel, trimmed_box};
pub use polytope::{contains, Halfspace, Polytope};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("point has no coordinates")]
    EmptyPoint,
    #[error("coordinate {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("point set is empty")]
    EmptyPointSet,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Numerical tolerances shared by the geometry routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Halfspace satisfaction and side tests.
    pub geom: f64,
    /// Vertex deduplication distance (max-norm).
    pub vertex: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            geom: 1e-9,
            vertex: 1e-7,
        }
    }
}

/// A finite point in `R^d`, `d >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self, GeometryError> {
        if coords.is_empty() {
            return Err(GeometryError::EmptyPoint);
        }
        if let Some((index, &value)) = coords.iter().enumerate().find(|(_, c)| !c.is_finite()) {
            return Err(GeometryError::NonFinite { index, value });
        }
        Ok(Self { coords })
    }

    /// Builds a point from coordinates already known to be finite.
    pub(crate) fn from_vec(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty() && coords.iter().all(|c| c.is_finite()));
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Max-norm distance, used for vertex deduplication.
    pub fn max_abs_diff(&self, other: &Point) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub(crate) fn lex_cmp(&self, other: &Point) -> std::cmp::Ordering {
        for (a, b) in self.coords.iter().zip(&other.coords) {
            match a.total_cmp(b) {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.coords.len().cmp(&other.coords.len())
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = GeometryError;

    fn try_from(coords: Vec<f64>) -> Result<Self, Self::Error> {
        Point::new(coords)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.coords
    }
}

/// Multiset of points sharing one dimension. Duplicates are kept and counted.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    points: Vec<Point>,
}

impl PointSet {
    pub fn new(points: Vec<Point>) -> Result<Self, GeometryError> {
        let dim = points.first().ok_or(GeometryError::EmptyPointSet)?.dim();
        Self::with_dim(dim, points)
    }

    /// Like [`PointSet::new`] but allows an empty set of known dimension.
    pub fn with_dim(dim: usize, points: Vec<Point>) -> Result<Self, GeometryError> {
        if dim == 0 {
            return Err(GeometryError::EmptyPoint);
        }
        if let Some(p) = points.iter().find(|p| p.dim() != dim) {
            return Err(GeometryError::DimensionMismatch {
                expected: dim,
                found: p.dim(),
            });
        }
        Ok(Self { dim, points })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, GeometryError> {
        let points = rows
            .iter()
            .map(|r| Point::new(r.as_ref().to_vec()))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(points)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cardinality(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point> {
        self.points.iter()
    }
}

impl<'a> IntoIterator for &'a PointSet {
    type Item = &'a Point;
    type IntoIter = std::slice::Iter<'a, Point>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_rejects_non_finite_and_empty() {
        assert_eq!(Point::new(vec![]), Err(GeometryError::EmptyPoint));
        assert!(matches!(
            Point::new(vec![1.0, f64::NAN]),
            Err(GeometryError::NonFinite { index: 1, .. })
        ));
        assert!(Point::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn point_set_counts_duplicates() {
        let s = PointSet::from_rows(&[[1.0, 2.0], [1.0, 2.0], [0.0, 0.0]]).unwrap();
        assert_eq!(s.cardinality(), 3);
        assert_eq!(s.dim(), 2);
    }

    #[test]
    fn point_set_rejects_mixed_dimensions() {
        let pts = vec![
            Point::new(vec![1.0]).unwrap(),
            Point::new(vec![1.0, 2.0]).unwrap(),
        ];
        assert_eq!(
            PointSet::new(pts),
            Err(GeometryError::DimensionMismatch {
                expected: 1,
                found: 2
            })
        );
    }

    #[test]
    fn point_deserializes_from_array() {
        let p: Point = serde_json::from_str("[1.5, -2]").unwrap();
        assert_eq!(p.coords(), &[1.5, -2.0]);
        assert!(serde_json::from_str::<Point>("[]").is_err());
    }
}
