use serde::{Deserialize, Serialize};

use super::EngineError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum WeightKind {
    /// `1 / (|V| + 1)` on self and on every kernel vertex.
    #[default]
    Uniform,
    /// Fixed self weight; the rest is split evenly over the vertices.
    Custom { self_weight: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightPolicy {
    pub kind: WeightKind,
    /// Lower bound every generated weight must meet.
    pub alpha: f64,
}

pub const DEFAULT_ALPHA: f64 = 1e-3;

impl Default for WeightPolicy {
    fn default() -> Self {
        Self {
            kind: WeightKind::Uniform,
            alpha: DEFAULT_ALPHA,
        }
    }
}

impl WeightPolicy {
    pub fn new(kind: WeightKind, alpha: f64) -> Result<Self, EngineError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(EngineError::invalid("alpha", format!("must lie in (0, 1), got {alpha}")));
        }
        if let WeightKind::Custom { self_weight } = kind {
            if !(self_weight > 0.0 && self_weight < 1.0) {
                return Err(EngineError::invalid(
                    "weights.self_weight",
                    format!("must lie in (0, 1), got {self_weight}"),
                ));
            }
            if self_weight < alpha {
                return Err(EngineError::invalid(
                    "weights.self_weight",
                    format!("{self_weight} is below alpha = {alpha}"),
                ));
            }
        }
        Ok(Self { kind, alpha })
    }

    /// Weights for self and for `vertices` kernel vertices, renormalized to
    /// sum to 1.
    pub fn weights(&self, vertices: usize) -> Result<(f64, Vec<f64>), EngineError> {
        if vertices == 0 {
            return Err(EngineError::Weight("no kernel vertices to weight".into()));
        }
        let (s, v) = match self.kind {
            WeightKind::Uniform => {
                let w = 1.0 / (vertices as f64 + 1.0);
                (w, w)
            }
            WeightKind::Custom { self_weight } => {
                (self_weight, (1.0 - self_weight) / vertices as f64)
            }
        };
        let mut ws = vec![v; vertices];
        let total = s + ws.iter().sum::<f64>();
        let s = s / total;
        ws.iter_mut().for_each(|w| *w /= total);
        if let Some(low) = std::iter::once(s).chain(ws.iter().copied()).find(|&w| w < self.alpha) {
            return Err(EngineError::Weight(format!(
                "weight {low} falls below alpha = {} with {vertices} kernel vertices",
                self.alpha
            )));
        }
        Ok((s, ws))
    }
}
