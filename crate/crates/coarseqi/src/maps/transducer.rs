//! Boundary maps as chains of depth-indexed digit rules.
//!
//! A tree-boundary map is represented by a short list of positionwise
//! rules applied in order: digit rotations over a finite index window,
//! the involution swapping the two digits of each aligned pair of
//! positions, index shifts (multiplication by the base), inclusion into a
//! larger base, and reduction into a smaller one. These generate digit
//! permutations, translations, and scalings — a rich supply of bilipschitz
//! boundary maps — while staying finitely supported and exactly
//! serializable.

use serde::{Deserialize, Serialize};

use crate::trees::LadicAddress;
use crate::{Error, Result};

/// One positionwise rewriting rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum BoundaryRule {
    /// Rotate the digit at every index `lo <= i < hi` by `add + mult·(i-lo)`
    /// (mod base); indices outside the window pass through. A digit
    /// permutation at each depth, hence an isometry of the boundary.
    Rotate { lo: i64, hi: i64, add: u8, mult: u8 },
    /// Swap the digits at positions `2k` and `2k+1` for every `k`. Moves
    /// disagreement indices by at most one, so it distorts the boundary
    /// metric by at most one factor of the base.
    PairSwap,
    /// Shift every index up by `k`: multiplication by `base^k`.
    Shift { k: i64 },
    /// Reinterpret the digits in a strictly larger base.
    Include { to: u8 },
    /// Reduce every digit mod a strictly smaller base.
    ReduceMod { to: u8 },
}

impl BoundaryRule {
    fn output_base(&self, base_in: u8) -> Result<u8> {
        match *self {
            BoundaryRule::Rotate { lo, hi, .. } => {
                if lo >= hi {
                    return Err(Error::ConstraintViolation {
                        name: "rotate_window".into(),
                        detail: format!("empty window [{lo},{hi})"),
                    });
                }
                Ok(base_in)
            }
            BoundaryRule::PairSwap | BoundaryRule::Shift { .. } => Ok(base_in),
            BoundaryRule::Include { to } => {
                if to <= base_in {
                    return Err(Error::ConstraintViolation {
                        name: "include_base".into(),
                        detail: format!("inclusion needs a larger base, got {base_in} -> {to}"),
                    });
                }
                Ok(to)
            }
            BoundaryRule::ReduceMod { to } => {
                if to >= base_in || to < 2 {
                    return Err(Error::ConstraintViolation {
                        name: "reduce_base".into(),
                        detail: format!("reduction needs a smaller base >= 2, got {base_in} -> {to}"),
                    });
                }
                Ok(to)
            }
        }
    }

    fn apply(&self, a: &LadicAddress) -> LadicAddress {
        match *self {
            BoundaryRule::Rotate { lo, hi, add, mult } => {
                let base = a.base() as u16;
                let mut out = a.clone();
                for i in lo..hi {
                    let rot = (add as u16 + mult as u16 * (i - lo).rem_euclid(base as i64) as u16)
                        % base;
                    let d = ((a.digit(i) as u16 + rot) % base) as u8;
                    out = out.with_digit(i, d).expect("rotated digit stays in base");
                }
                out
            }
            BoundaryRule::PairSwap => {
                let (Some(top), Some(bot)) = (a.support_max(), a.support_min()) else {
                    return a.clone();
                };
                let mut out = LadicAddress::zero(a.base()).expect("base validated");
                // XOR with 1 pairs 2k with 2k+1, for negative indices too.
                for i in bot_pair_floor(bot)..=(top | 1) {
                    let d = a.digit(i ^ 1);
                    if d != 0 {
                        out = out.with_digit(i, d).expect("digit from same base");
                    }
                }
                out
            }
            BoundaryRule::Shift { k } => a.shift(k),
            BoundaryRule::Include { to } => {
                a.digit_map(to, |_, d| d).expect("digits fit in larger base")
            }
            BoundaryRule::ReduceMod { to } => {
                a.digit_map(to, |_, d| d % to).expect("reduced digits fit")
            }
        }
    }

    /// Multiplicative distortion bound of the boundary metric, when the rule
    /// keeps the base (None when it changes it).
    fn bilipschitz_factor(&self, base_in: u8) -> Option<f64> {
        match *self {
            BoundaryRule::Rotate { .. } => Some(1.0),
            BoundaryRule::PairSwap => Some(base_in as f64),
            BoundaryRule::Shift { k } => Some((base_in as f64).powi(k.unsigned_abs() as i32)),
            BoundaryRule::Include { .. } | BoundaryRule::ReduceMod { .. } => None,
        }
    }
}

fn bot_pair_floor(bot: i64) -> i64 {
    bot & !1
}

/// A boundary map `Q_{base_in} -> Q_{base_out}` given by rules applied in
/// order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryMap {
    base_in: u8,
    base_out: u8,
    rules: Vec<BoundaryRule>,
}

impl BoundaryMap {
    pub fn new(base_in: u8, rules: Vec<BoundaryRule>) -> Result<Self> {
        let mut base = base_in;
        for r in &rules {
            base = r.output_base(base)?;
        }
        Ok(BoundaryMap { base_in, base_out: base, rules })
    }

    pub fn identity(base: u8) -> Self {
        BoundaryMap { base_in: base, base_out: base, rules: Vec::new() }
    }

    pub fn base_in(&self) -> u8 {
        self.base_in
    }

    pub fn base_out(&self) -> u8 {
        self.base_out
    }

    pub fn apply(&self, a: &LadicAddress) -> Result<LadicAddress> {
        if a.base() != self.base_in {
            return Err(Error::PreconditionViolation {
                name: "boundary_base".into(),
                detail: format!("address base {} but map expects {}", a.base(), self.base_in),
            });
        }
        let mut out = a.clone();
        for r in &self.rules {
            out = r.apply(&out);
        }
        Ok(out)
    }

    /// Product of the per-rule distortion bounds; None once the base changes
    /// (such maps are evaluator pieces, not bilipschitz self-maps).
    pub fn bilipschitz_bound(&self) -> Option<f64> {
        let mut b = 1.0;
        let mut base = self.base_in;
        for r in &self.rules {
            b *= r.bilipschitz_factor(base)?;
            base = r.output_base(base).expect("validated at construction");
        }
        Some(b)
    }
}
