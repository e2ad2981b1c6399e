use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::expr::Expr;
use super::EngineError;
use crate::geometry::Point;

/// Strategy as written in a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StrategySpec {
    /// One expression in `k` per coordinate, broadcast to every neighbor.
    Scripted { coords: Vec<String> },
    Constant { value: Vec<f64> },
    /// Uniform draws from the box `[lo, hi]`. A fresh draw per recipient
    /// unless `broadcast` is set.
    RandomBox {
        lo: Vec<f64>,
        hi: Vec<f64>,
        #[serde(default)]
        broadcast: bool,
    },
    /// Scripts keyed by recipient node id; `default` covers the rest.
    PerRecipientScripted {
        scripts: BTreeMap<String, Vec<String>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        default: Option<Vec<String>>,
    },
}

/// A validated, ready-to-run strategy.
#[derive(Debug, Clone, PartialEq)]
pub enum AdversaryStrategy {
    Scripted(Vec<Expr>),
    Constant(Point),
    RandomBox {
        lo: Vec<f64>,
        hi: Vec<f64>,
        broadcast: bool,
    },
    PerRecipient {
        scripts: BTreeMap<usize, Vec<Expr>>,
        default: Option<Vec<Expr>>,
    },
}

fn compile_script(field: &str, coords: &[String], dim: usize) -> Result<Vec<Expr>, EngineError> {
    if coords.len() != dim {
        return Err(EngineError::invalid(
            field,
            format!("script has {} coordinates, scenario dimension is {dim}", coords.len()),
        ));
    }
    coords
        .iter()
        .enumerate()
        .map(|(p, s)| {
            Expr::parse(s).map_err(|e| EngineError::invalid(format!("{field}[{p}]"), e.to_string()))
        })
        .collect()
}

fn eval_script(exprs: &[Expr], k: usize) -> Result<Point, EngineError> {
    let coords: Vec<f64> = exprs.iter().map(|e| e.eval(k as f64)).collect();
    Point::new(coords).map_err(|e| EngineError::Script(format!("round {k}: {e}")))
}

/// Mixes the stream coordinates into one seed (splitmix64 finalizer per
/// component).
pub fn stream_seed(seed: u64, node: usize, round: usize, recipient: usize) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    [node as u64, round as u64, recipient as u64]
        .into_iter()
        .fold(mix(seed ^ 0x9e37_79b9_7f4a_7c15), |h, v| {
            mix(h.wrapping_add(0x9e37_79b9_7f4a_7c15) ^ v)
        })
}

impl AdversaryStrategy {
    /// Checks dimensions and parses scripts. `field` prefixes diagnostics.
    pub fn compile(spec: &StrategySpec, dim: usize, field: &str) -> Result<Self, EngineError> {
        Ok(match spec {
            StrategySpec::Scripted { coords } => {
                AdversaryStrategy::Scripted(compile_script(&format!("{field}.coords"), coords, dim)?)
            }
            StrategySpec::Constant { value } => {
                if value.len() != dim {
                    return Err(EngineError::invalid(
                        format!("{field}.value"),
                        format!("has {} coordinates, scenario dimension is {dim}", value.len()),
                    ));
                }
                let p = Point::new(value.clone())
                    .map_err(|e| EngineError::invalid(format!("{field}.value"), e.to_string()))?;
                AdversaryStrategy::Constant(p)
            }
            StrategySpec::RandomBox { lo, hi, broadcast } => {
                if lo.len() != dim || hi.len() != dim {
                    return Err(EngineError::invalid(
                        field,
                        format!("box bounds must have {dim} coordinates"),
                    ));
                }
                if let Some(p) = (0..dim).find(|&p| !(lo[p].is_finite() && hi[p].is_finite() && lo[p] <= hi[p])) {
                    return Err(EngineError::invalid(
                        field,
                        format!("coordinate {p}: need finite lo <= hi, got [{}, {}]", lo[p], hi[p]),
                    ));
                }
                AdversaryStrategy::RandomBox {
                    lo: lo.clone(),
                    hi: hi.clone(),
                    broadcast: *broadcast,
                }
            }
            StrategySpec::PerRecipientScripted { scripts, default } => {
                if scripts.is_empty() && default.is_none() {
                    return Err(EngineError::invalid(field, "per-recipient strategy with no scripts and no default"));
                }
                let mut compiled = BTreeMap::new();
                for (key, coords) in scripts {
                    let node: usize = key.parse().map_err(|_| {
                        EngineError::invalid(
                            format!("{field}.scripts"),
                            format!("recipient key {key:?} is not a node id"),
                        )
                    })?;
                    compiled.insert(node, compile_script(&format!("{field}.scripts.{key}"), coords, dim)?);
                }
                let default = default
                    .as_ref()
                    .map(|c| compile_script(&format!("{field}.default"), c, dim))
                    .transpose()?;
                AdversaryStrategy::PerRecipient {
                    scripts: compiled,
                    default,
                }
            }
        })
    }

    /// True when every recipient receives the same value each round.
    pub fn is_broadcast(&self) -> bool {
        match self {
            AdversaryStrategy::Scripted(_) | AdversaryStrategy::Constant(_) => true,
            AdversaryStrategy::RandomBox { broadcast, .. } => *broadcast,
            AdversaryStrategy::PerRecipient { .. } => false,
        }
    }

    /// Recipient whose message is logged for a faulty node with no benign
    /// neighbors: the default script if there is one, else the lowest
    /// scripted recipient.
    pub fn idle_recipient(&self, node: usize) -> usize {
        match self {
            AdversaryStrategy::PerRecipient { scripts, default: None } => {
                scripts.keys().next().copied().unwrap_or(node)
            }
            AdversaryStrategy::PerRecipient { .. } => usize::MAX,
            _ => node,
        }
    }

    /// Value sent by faulty `node` to `recipient` in round `k`.
    pub fn emit(
        &self,
        k: usize,
        node: usize,
        recipient: usize,
        seed: u64,
    ) -> Result<Point, EngineError> {
        match self {
            AdversaryStrategy::Scripted(exprs) => eval_script(exprs, k),
            AdversaryStrategy::Constant(c) => Ok(c.clone()),
            AdversaryStrategy::RandomBox { lo, hi, broadcast } => {
                let who = if *broadcast { usize::MAX } else { recipient };
                let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, node, k, who));
                let coords = lo
                    .iter()
                    .zip(hi)
                    .map(|(&l, &h)| if l == h { l } else { rng.random_range(l..=h) })
                    .collect();
                Ok(Point::from_vec(coords))
            }
            AdversaryStrategy::PerRecipient { scripts, default } => {
                match scripts.get(&recipient).or(default.as_ref()) {
                    Some(exprs) => eval_script(exprs, k),
                    None => Err(EngineError::Script(format!(
                        "no script for recipient {recipient} and no default"
                    ))),
                }
            }
        }
    }

    /// Fails unless every recipient in `recipients` has a finite value in
    /// every round `0..=rounds`. Random boxes are finite by construction.
    pub fn check_rounds(
        &self,
        node: usize,
        recipients: &[usize],
        rounds: usize,
        field: &str,
    ) -> Result<(), EngineError> {
        let targets: Vec<usize> = match self {
            AdversaryStrategy::Scripted(_) => vec![recipients.first().copied().unwrap_or(0)],
            AdversaryStrategy::PerRecipient { .. } if recipients.is_empty() => vec![self.idle_recipient(node)],
            AdversaryStrategy::PerRecipient { .. } => recipients.to_vec(),
            _ => return Ok(()),
        };
        for &r in &targets {
            for k in 0..=rounds {
                self.emit(k, node, r, 0)
                    .map_err(|e| EngineError::invalid(field, e.to_string()))?;
            }
        }
        Ok(())
    }
}
