//! Shared vocabulary for the two model-space families.
//!
//! Pipeline stages operate on the exact Diestel-Leader graphs; the Sol
//! family enters as a numeric cross-check. Both expose the same small
//! surface — a height function, two-sided distance bounds, and horocycle
//! distances — captured by [`ModelSpace`] so reporting and self-test code
//! can be written once.

use serde::{Deserialize, Serialize};

use crate::dl::{DlPoint, DlSpace};
use crate::sol::{SolPoint, SolSpace};
use crate::{Error, Result, Scalar};

/// Which of the two model families a parameter pair refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Dl,
    Sol,
}

/// Exponents (Sol) or branching numbers (DL) of a model space, with the
/// standing orientation convention `m >= n > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub kind: ModelKind,
    pub m: f64,
    pub n: f64,
}

impl ModelParams {
    pub fn dl(m: u8, n: u8) -> Result<Self> {
        let p = ModelParams { kind: ModelKind::Dl, m: m as f64, n: n as f64 };
        p.validate()?;
        Ok(p)
    }

    pub fn sol(m: f64, n: f64) -> Result<Self> {
        let p = ModelParams { kind: ModelKind::Sol, m, n };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n > 0.0 && self.m >= self.n && self.m.is_finite()) {
            return Err(Error::ConstraintViolation {
                name: "orientation".into(),
                detail: format!("need m >= n > 0, got m={} n={}", self.m, self.n),
            });
        }
        if self.kind == ModelKind::Dl
            && !(self.m.fract() == 0.0 && self.n.fract() == 0.0 && self.n >= 2.0)
        {
            return Err(Error::ConstraintViolation {
                name: "branching".into(),
                detail: format!("DL needs integers m >= n >= 2, got m={} n={}", self.m, self.n),
            });
        }
        Ok(())
    }

    /// `true` when the two height directions are interchangeable, which is
    /// exactly the unimodular case `m = n`.
    pub fn is_unimodular(&self) -> bool {
        self.m == self.n
    }

    pub fn dl_space(&self) -> Result<DlSpace> {
        if self.kind != ModelKind::Dl {
            return Err(Error::PreconditionViolation {
                name: "kind".into(),
                detail: "parameters describe a Sol space".into(),
            });
        }
        DlSpace::new(self.m as u8, self.n as u8)
    }

    pub fn sol_space(&self) -> Result<SolSpace<f64>> {
        if self.kind != ModelKind::Sol {
            return Err(Error::PreconditionViolation {
                name: "kind".into(),
                detail: "parameters describe a DL graph".into(),
            });
        }
        SolSpace::new(self.m, self.n)
    }
}

/// Multiplicative and additive constants of a candidate quasi-isometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QiConstants {
    pub kappa: f64,
    pub c_add: f64,
}

impl QiConstants {
    pub fn new(kappa: f64, c_add: f64) -> Result<Self> {
        if !(kappa >= 1.0 && kappa.is_finite()) {
            return Err(Error::ConstraintViolation {
                name: "kappa".into(),
                detail: format!("need kappa >= 1, got {kappa}"),
            });
        }
        if !(c_add >= 0.0 && c_add.is_finite()) {
            return Err(Error::ConstraintViolation {
                name: "c_add".into(),
                detail: format!("need c_add >= 0, got {c_add}"),
            });
        }
        Ok(QiConstants { kappa, c_add })
    }
}

/// The two measures used by the averaging arguments.
///
/// `Volume` is counting measure on DL and `e^{(n-m)z} dx dy dz` on Sol;
/// `Mu` reweights a point at height `h` by `(m/n)^h` (up to one global
/// normalization), which makes every level of a box carry equal mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureKind {
    Volume,
    Mu,
}

/// What the pipeline needs from a model geometry: heights, two-sided
/// distance bounds (exact distances collapse the interval), and distances
/// within the two horocycle foliations.
pub trait ModelSpace {
    type Point: Clone + std::fmt::Debug + PartialEq;

    fn params(&self) -> ModelParams;
    fn height_of(&self, p: &Self::Point) -> f64;
    /// Lower and upper bounds on the distance; equal when exact.
    fn distance_interval(&self, p: &Self::Point, q: &Self::Point) -> (f64, f64);
    /// Distance from `p` to the x-horocycle through `q` (the set sharing
    /// `q`'s lower-tree coordinate, respectively `q`'s `(x,z)` slice).
    fn x_horocycle_gap(&self, p: &Self::Point, q: &Self::Point) -> f64;
    /// Distance from `p` to the y-horocycle through `q`.
    fn y_horocycle_gap(&self, p: &Self::Point, q: &Self::Point) -> f64;
    fn describe(&self) -> String;
}

impl ModelSpace for DlSpace {
    type Point = DlPoint;

    fn params(&self) -> ModelParams {
        ModelParams { kind: ModelKind::Dl, m: self.m() as f64, n: self.n() as f64 }
    }

    fn height_of(&self, p: &DlPoint) -> f64 {
        self.height(p) as f64
    }

    fn distance_interval(&self, p: &DlPoint, q: &DlPoint) -> (f64, f64) {
        let d = self.distance(p, q) as f64;
        (d, d)
    }

    fn x_horocycle_gap(&self, p: &DlPoint, q: &DlPoint) -> f64 {
        self.x_horocycle_distance(p, q) as f64
    }

    fn y_horocycle_gap(&self, p: &DlPoint, q: &DlPoint) -> f64 {
        self.y_horocycle_distance(p, q) as f64
    }

    fn describe(&self) -> String {
        format!("DL({},{})", self.m(), self.n())
    }
}

impl<S: Scalar> ModelSpace for SolSpace<S> {
    type Point = SolPoint<S>;

    fn params(&self) -> ModelParams {
        ModelParams { kind: ModelKind::Sol, m: self.m().as_f64(), n: self.n().as_f64() }
    }

    fn height_of(&self, p: &SolPoint<S>) -> f64 {
        p.z.as_f64()
    }

    fn distance_interval(&self, p: &SolPoint<S>, q: &SolPoint<S>) -> (f64, f64) {
        let (lo, hi) = self.distance_bounds(p, q);
        (lo.as_f64(), hi.as_f64())
    }

    fn x_horocycle_gap(&self, p: &SolPoint<S>, q: &SolPoint<S>) -> f64 {
        self.x_horocycle_distance(p, q).as_f64()
    }

    fn y_horocycle_gap(&self, p: &SolPoint<S>, q: &SolPoint<S>) -> f64 {
        self.y_horocycle_distance(p, q).as_f64()
    }

    fn describe(&self) -> String {
        format!("Sol({},{})", self.m(), self.n())
    }
}
