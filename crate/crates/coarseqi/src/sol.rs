//! The solvable model geometry `Sol(m,n)`, numerically.
//!
//! Points are `(x, y, z)` with the left-invariant metric
//! `ds^2 = e^{-2mz} dx^2 + e^{2nz} dy^2 + dz^2`: the `xz`-plane is a
//! hyperbolic plane of curvature `-m^2`, the `yz`-plane one of curvature
//! `-n^2` turned upside down, and `z` is the height. Distances in the planes
//! have closed forms; the space distance is sandwiched between the larger of
//! the two plane projections (projections are 1-Lipschitz) and the cheaper
//! of the two one-plane-then-the-other routes.
//!
//! Everything is generic over the floating point scalar and written to
//! survive the enormous dynamic range a box of size `L` forces: horizontal
//! extents grow like `e^{2mL}`, so intermediate quantities are tracked in
//! log space once they threaten to overflow.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar};

/// A point of `Sol(m,n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolPoint<S> {
    pub x: S,
    pub y: S,
    pub z: S,
}

impl<S: Scalar> SolPoint<S> {
    pub fn new(x: S, y: S, z: S) -> Self {
        SolPoint { x, y, z }
    }
}

/// The geometry with exponent parameters fixed.
#[derive(Clone, Copy, Debug)]
pub struct SolSpace<S> {
    m: S,
    n: S,
    /// Set when `e^m` and `e^n` are integers (e.g. `m = ln 2`): tilings can
    /// then certify exactly empty remainders in the horizontal directions.
    exact_exponentials: bool,
}

impl<S: Scalar> SolSpace<S> {
    pub fn new(m: S, n: S) -> Result<Self> {
        if !(m > S::zero()) || !(n > S::zero()) || !m.is_finite() || !n.is_finite() {
            return Err(Error::ConstraintViolation {
                name: "sol_exponents".into(),
                detail: "Sol exponents must be finite and positive".into(),
            });
        }
        Ok(SolSpace { m, n, exact_exponentials: false })
    }

    /// Declares that `e^m` and `e^n` are integers (checked approximately).
    pub fn with_exact_exponentials(mut self) -> Result<Self> {
        for e in [self.m.as_f64().exp(), self.n.as_f64().exp()] {
            if (e - e.round()).abs() > 1e-9 {
                return Err(Error::ConstraintViolation {
                    name: "exact_exponentials".into(),
                    detail: format!("e^parameter = {e} is not close to an integer"),
                });
            }
        }
        self.exact_exponentials = true;
        Ok(self)
    }

    pub fn m(&self) -> S {
        self.m
    }

    pub fn n(&self) -> S {
        self.n
    }

    pub fn exact_exponentials(&self) -> bool {
        self.exact_exponentials
    }

    pub fn origin(&self) -> SolPoint<S> {
        SolPoint::new(S::zero(), S::zero(), S::zero())
    }

    pub fn height(&self, p: &SolPoint<S>) -> S {
        p.z
    }

    /// Distance in the `xz` hyperbolic plane (curvature `-m^2`):
    /// `cosh(m d) = cosh(m dz) + (m^2 dx^2 / 2) e^{-m(z0+z1)}`.
    pub fn xz_distance(&self, x0: S, z0: S, x1: S, z1: S) -> S {
        plane_distance(self.m, x0, z0, x1, z1, false)
    }

    /// Distance in the `yz` hyperbolic plane (curvature `-n^2`, upside
    /// down): `cosh(n d) = cosh(n dz) + (n^2 dy^2 / 2) e^{+n(z0+z1)}`.
    pub fn yz_distance(&self, y0: S, z0: S, y1: S, z1: S) -> S {
        plane_distance(self.n, y0, z0, y1, z1, true)
    }

    /// Certified lower and upper bounds for the space distance.
    ///
    /// Lower: both plane projections are 1-Lipschitz. Upper: travel the
    /// `xz`-plane first (carrying `z` to its final value), then the
    /// `yz`-plane at constant height, or the mirror order; take the cheaper.
    pub fn distance_bounds(&self, p: &SolPoint<S>, q: &SolPoint<S>) -> (S, S) {
        let lower = self
            .xz_distance(p.x, p.z, q.x, q.z)
            .max(self.yz_distance(p.y, p.z, q.y, q.z));
        let route_x_first = self.xz_distance(p.x, p.z, q.x, q.z)
            + self.yz_distance(p.y, q.z, q.y, q.z);
        let route_y_first = self.yz_distance(p.y, p.z, q.y, q.z)
            + self.xz_distance(p.x, q.z, q.x, q.z);
        (lower, route_x_first.min(route_y_first))
    }

    /// Distance from `p` to the x-horocycle `{(t, y0, z0)}` through `q`:
    /// exactly the `yz`-plane distance (matching `x` costs nothing).
    pub fn x_horocycle_distance(&self, p: &SolPoint<S>, q: &SolPoint<S>) -> S {
        self.yz_distance(p.y, p.z, q.y, q.z)
    }

    /// Distance from `p` to the y-horocycle through `q`.
    pub fn y_horocycle_distance(&self, p: &SolPoint<S>, q: &SolPoint<S>) -> S {
        self.xz_distance(p.x, p.z, q.x, q.z)
    }
}

/// Shared hyperbolic plane distance. With `flip_z` the height is mirrored
/// (the `yz` factor grows downward).
fn plane_distance<S: Scalar>(k: S, h0: S, z0: S, h1: S, z1: S, flip_z: bool) -> S {
    let (z0, z1) = if flip_z { (-z0, -z1) } else { (z0, z1) };
    let a = k * (z1 - z0);
    let two = S::of(2.0);
    // cosh(a) - 1 = 2 sinh^2(a/2), stable near zero.
    let half = a / two;
    let log_c1 = if half == S::zero() {
        S::neg_infinity()
    } else {
        two.ln() + two * ln_sinh(half.abs())
    };
    let dh = (h1 - h0).abs();
    let log_c2 = if dh == S::zero() {
        S::neg_infinity()
    } else {
        two * (k * dh).ln() - two.ln() - k * (z0 + z1)
    };
    let log_u = log_add_exp(log_c1, log_c2);
    if log_u == S::neg_infinity() {
        return S::zero();
    }
    // arccosh(1+u) = log1p(u + sqrt(u(u+2))).
    if log_u < S::of(350.0) {
        let u = log_u.exp();
        (u + (u * (u + two)).sqrt()).ln_1p() / k
    } else {
        // u is astronomically large: arccosh(1+u) = ln(2u) + O(1/u^2).
        (two.ln() + log_u) / k
    }
}

fn ln_sinh<S: Scalar>(t: S) -> S {
    if t < S::of(300.0) {
        t.sinh().ln()
    } else {
        t - S::of(2.0).ln()
    }
}

fn log_add_exp<S: Scalar>(a: S, b: S) -> S {
    if a == S::neg_infinity() {
        return b;
    }
    if b == S::neg_infinity() {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// An axis-aligned box in Sol: heights in `[-L/2, L/2]`, horizontal extents
/// `[-e^{2mL}/2, e^{2mL}/2]` and `[-e^{2nL}/2, e^{2nL}/2]`.
#[derive(Clone, Copy, Debug)]
pub struct SolBox<S> {
    space: SolSpace<S>,
    l: u64,
}

impl<S: Scalar> SolBox<S> {
    pub fn new(space: &SolSpace<S>, l: u64) -> Result<Self> {
        if l == 0 {
            return Err(Error::ConstraintViolation {
                name: "box_size".into(),
                detail: "Sol box size must be positive".into(),
            });
        }
        let two_ml = 2.0 * space.m.as_f64() * l as f64;
        let two_nl = 2.0 * space.n.as_f64() * l as f64;
        if two_ml > 700.0 || two_nl > 700.0 {
            return Err(Error::ConstraintViolation {
                name: "box_size".into(),
                detail: format!("box extents e^{two_ml} / e^{two_nl} overflow the scalar"),
            });
        }
        Ok(SolBox { space: *space, l })
    }

    pub fn space(&self) -> &SolSpace<S> {
        &self.space
    }

    pub fn size(&self) -> u64 {
        self.l
    }

    pub fn z_half(&self) -> S {
        S::of(self.l as f64 / 2.0)
    }

    pub fn x_half(&self) -> S {
        (S::of(2.0) * self.space.m * S::of(self.l as f64)).exp() / S::of(2.0)
    }

    pub fn y_half(&self) -> S {
        (S::of(2.0) * self.space.n * S::of(self.l as f64)).exp() / S::of(2.0)
    }

    pub fn contains(&self, p: &SolPoint<S>) -> bool {
        p.x.abs() <= self.x_half()
            && p.y.abs() <= self.y_half()
            && p.z.abs() <= self.z_half()
    }

    /// Lebesgue volume (the invariant measure).
    pub fn volume(&self) -> S {
        S::of(2.0) * self.x_half() * S::of(2.0) * self.y_half() * S::of(self.l as f64)
    }

    pub fn sample_point(&self, rng: &mut impl rand::Rng) -> SolPoint<S> {
        let (hx, hy, hz) = (self.x_half(), self.y_half(), self.z_half());
        let mut coord = |h: S| S::of(rng.gen_range(-1.0..=1.0)) * h;
        SolPoint::new(coord(hx), coord(hy), coord(hz))
    }

    /// A vertical unit-speed path at fixed `(x, y)`, sampled at integer
    /// steps from the bottom to the top height.
    pub fn vertical_path(&self, x: S, y: S) -> Vec<SolPoint<S>> {
        let half = self.l as i64 / 2;
        ((-half)..=(self.l as i64 - half)).map(|k| SolPoint::new(x, y, S::of(k as f64))).collect()
    }
}

/// Closed-form tiling summary for a Sol box: tiles are z-translates of a
/// size-`R` box packed in rows, with bands anchored at integer multiples of
/// `R` around height zero.
#[derive(Clone, Debug, Serialize)]
pub struct SolTiling {
    pub l: u64,
    pub r: u64,
    /// Per-band packing data, band `c` covering heights `cR +- R/2`.
    pub bands: Vec<SolBand>,
    pub tile_count: f64,
    pub box_volume: f64,
    pub untiled_volume: f64,
    pub untiled_fraction: f64,
    /// Height thickness not covered by any band (`R` when `L/R` is even,
    /// `0` when odd).
    pub z_loss: f64,
    /// True when horizontal remainders are certified exactly empty.
    pub horizontal_exact: bool,
}

/// One band of z-translated tiles.
#[derive(Clone, Debug, Serialize)]
pub struct SolBand {
    pub c: i64,
    pub z_lo: f64,
    pub z_hi: f64,
    pub tile_x_extent: f64,
    pub tile_y_extent: f64,
    pub count_x: f64,
    pub count_y: f64,
    pub leftover_volume: f64,
}

impl SolTiling {
    /// Builds the tiling summary; never enumerates tiles.
    pub fn new<S: Scalar>(bx: &SolBox<S>, r: u64) -> Result<SolTiling> {
        let l = bx.size();
        if r == 0 || r > l {
            return Err(Error::ConstraintViolation {
                name: "tile_size".into(),
                detail: format!("tile size {r} must lie in 1..={l}"),
            });
        }
        let m = bx.space().m().as_f64();
        let n = bx.space().n().as_f64();
        let lf = l as f64;
        let rf = r as f64;
        let box_w_x = (2.0 * m * lf).exp();
        let box_w_y = (2.0 * n * lf).exp();
        let box_volume = box_w_x * box_w_y * lf;
        // Integer band anchors c with |cR| <= (L-R)/2.
        let c_max = ((l - r) / (2 * r)) as i64;
        let mut bands = Vec::new();
        let mut tile_count = 0.0f64;
        let mut untiled = 0.0f64;
        let exact = bx.space().exact_exponentials();
        let mut horizontal_exact = exact;
        for c in -c_max..=c_max {
            let zc = (c * r as i64) as f64;
            let w_x = (m * (zc + 2.0 * rf)).exp();
            let w_y = (n * (-zc + 2.0 * rf)).exp();
            let (count_x, exact_x) = pack_count(box_w_x, w_x, exact, m, 2.0 * lf - zc - 2.0 * rf);
            let (count_y, exact_y) = pack_count(box_w_y, w_y, exact, n, 2.0 * lf + zc - 2.0 * rf);
            horizontal_exact &= exact_x && exact_y;
            let covered = if exact_x && exact_y {
                box_w_x * box_w_y
            } else {
                (count_x * w_x * count_y * w_y).min(box_w_x * box_w_y)
            };
            let leftover_volume = (box_w_x * box_w_y - covered) * rf;
            untiled += leftover_volume;
            tile_count += count_x * count_y;
            bands.push(SolBand {
                c,
                z_lo: zc - rf / 2.0,
                z_hi: zc + rf / 2.0,
                tile_x_extent: w_x,
                tile_y_extent: w_y,
                count_x,
                count_y,
                leftover_volume,
            });
        }
        let covered_z = (2 * c_max as u64 + 1) * r;
        let z_loss = (l - covered_z) as f64;
        untiled += z_loss * box_w_x * box_w_y;
        Ok(SolTiling {
            l,
            r,
            bands,
            tile_count,
            box_volume,
            untiled_volume: untiled,
            untiled_fraction: untiled / box_volume,
            z_loss,
            horizontal_exact,
        })
    }
}

/// Number of whole tiles of width `w` fitting in `big`, and whether the fit
/// is certified exact. Under integer exponentials the ratio is the integer
/// `E^exponent` whenever `exponent >= 0`, so the remainder vanishes exactly.
fn pack_count(big: f64, w: f64, exact: bool, k: f64, exponent: f64) -> (f64, bool) {
    if exact && exponent >= 0.0 && (exponent - exponent.round()).abs() < 1e-9 {
        let ratio = (k * exponent).exp();
        (ratio.round(), true)
    } else {
        ((big / w).floor().max(0.0), false)
    }
}
