//! Candidate quasi-isometries between DL graphs: the map library, constant
//! estimation, approximate inverses, and the volume-transport inequality.
//!
//! Every map is a total, deterministic, concurrency-safe evaluator from
//! source vertices to target vertices. Product maps carry their declared
//! structure `(f(x), g(y), q(z))` so pipeline stages can compare what they
//! recover against what was declared. The library also ships deliberately
//! bad inputs: a height-folding map that is not a quasi-isometry, and an
//! orientation-reversing product map that the orientation certificate is
//! expected to refute.

pub mod transducer;

use std::collections::HashSet;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dl::{DlBox, DlPoint, DlSpace};
use crate::space::QiConstants;
use crate::{Error, Result};
use transducer::{BoundaryMap, BoundaryRule};

/// Height component of a product map: `q(z) = sign·z + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeightComponent {
    /// +1 (orientation preserving) or -1 (reversing).
    pub sign: i8,
    pub offset: i64,
}

impl HeightComponent {
    pub fn identity() -> Self {
        HeightComponent { sign: 1, offset: 0 }
    }

    pub fn apply(&self, z: i64) -> i64 {
        self.sign as i64 * z + self.offset
    }

    pub fn reversing(&self) -> bool {
        self.sign < 0
    }
}

/// Declared structure of a product map `(x,y,z) -> (f(x), g(y), q(z))`,
/// or its swapped variant `(g(y), f(x), q(z))` where the tree coordinates
/// change sides. `f` always consumes the source x (base m), `g` the source
/// y (base n); `swap` decides which target slot each lands in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductStructure {
    pub f: BoundaryMap,
    pub g: BoundaryMap,
    pub q: HeightComponent,
    pub swap: bool,
    /// Bilipschitz bound when the map is standard (both components
    /// bilipschitz and `q` a signed translation).
    pub b_standard: Option<f64>,
}

enum MapKind {
    Product(ProductStructure),
    /// Height-respecting but not a product: the lowest stored y digit is
    /// shifted by the lowest stored x digit.
    Sheared,
    /// Seeded bounded-amplitude walk from every vertex.
    Scrambled { amplitude: u64 },
    /// Folds positive heights onto negative ones; not a quasi-isometry.
    Hairpin,
    /// Point-pair table with nearest-neighbor completion.
    Table(Vec<(DlPoint, DlPoint)>),
}

/// A candidate quasi-isometry between two DL graphs.
pub struct QiMap {
    name: String,
    source: DlSpace,
    target: DlSpace,
    kind: MapKind,
    declared_qi: Option<QiConstants>,
    seed: u64,
}

impl QiMap {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source(&self) -> &DlSpace {
        &self.source
    }

    pub fn target(&self) -> &DlSpace {
        &self.target
    }

    /// Declared constants, when the library vouches for the map being a
    /// quasi-isometry.
    pub fn declared_qi(&self) -> Option<QiConstants> {
        self.declared_qi
    }

    /// Declared product structure, when there is one.
    pub fn declared_product(&self) -> Option<&ProductStructure> {
        match &self.kind {
            MapKind::Product(ps) => Some(ps),
            _ => None,
        }
    }

    /// The identity map.
    pub fn identity(dl: &DlSpace) -> QiMap {
        let ps = ProductStructure {
            f: BoundaryMap::identity(dl.m()),
            g: BoundaryMap::identity(dl.n()),
            q: HeightComponent::identity(),
            swap: false,
            b_standard: Some(1.0),
        };
        QiMap {
            name: "identity".into(),
            source: dl.clone(),
            target: dl.clone(),
            kind: MapKind::Product(ps),
            declared_qi: Some(QiConstants { kappa: 1.0, c_add: 0.0 }),
            seed: 0,
        }
    }

    /// Translation along the vertical axis by `k`: an exact isometry (the
    /// tree coordinates shift their digit indices along).
    pub fn height_translation(dl: &DlSpace, k: i64) -> Result<QiMap> {
        let ps = ProductStructure {
            f: BoundaryMap::new(dl.m(), vec![BoundaryRule::Shift { k }])?,
            g: BoundaryMap::new(dl.n(), vec![BoundaryRule::Shift { k: -k }])?,
            q: HeightComponent { sign: 1, offset: k },
            swap: false,
            b_standard: Some((dl.m() as f64).powi(k.unsigned_abs().min(64) as u32 as i32)),
        };
        Ok(QiMap {
            name: format!("height_translation({k})"),
            source: dl.clone(),
            target: dl.clone(),
            kind: MapKind::Product(ps),
            declared_qi: Some(QiConstants { kappa: 1.0, c_add: 0.0 }),
            seed: 0,
        })
    }

    /// Depth-indexed digit rotations on both tree coordinates over the index
    /// window `[-w, w)`: a 1-standard map (an exact isometry).
    pub fn standard_rotation(dl: &DlSpace, w: i64, add: (u8, u8), mult: (u8, u8)) -> Result<QiMap> {
        let ps = ProductStructure {
            f: BoundaryMap::new(
                dl.m(),
                vec![BoundaryRule::Rotate { lo: -w, hi: w, add: add.0 % dl.m(), mult: mult.0 }],
            )?,
            g: BoundaryMap::new(
                dl.n(),
                vec![BoundaryRule::Rotate { lo: -w, hi: w, add: add.1 % dl.n(), mult: mult.1 }],
            )?,
            q: HeightComponent::identity(),
            swap: false,
            b_standard: Some(1.0),
        };
        Ok(QiMap {
            name: format!("standard_rotation(w={w})"),
            source: dl.clone(),
            target: dl.clone(),
            kind: MapKind::Product(ps),
            declared_qi: Some(QiConstants { kappa: 1.0, c_add: 0.0 }),
            seed: 0,
        })
    }

    /// Swaps adjacent digit positions of the y coordinate: a 2-standard map
    /// when n = 2 (boundary distortion one factor of n), at bounded distance
    /// from no isometry but still (1, C) with small C.
    pub fn standard_pair_swap(dl: &DlSpace) -> Result<QiMap> {
        let ps = ProductStructure {
            f: BoundaryMap::identity(dl.m()),
            g: BoundaryMap::new(dl.n(), vec![BoundaryRule::PairSwap])?,
            q: HeightComponent::identity(),
            swap: false,
            b_standard: Some(dl.n() as f64),
        };
        Ok(QiMap {
            name: "standard_pair_swap".into(),
            source: dl.clone(),
            target: dl.clone(),
            kind: MapKind::Product(ps),
            declared_qi: Some(QiConstants { kappa: 1.0, c_add: 4.0 }),
            seed: 0,
        })
    }

    /// The coordinate swap `(x,y,z) -> (y,x,-z)`: an isometry exactly when
    /// m = n, and rejected otherwise.
    pub fn flip(dl: &DlSpace) -> Result<QiMap> {
        if dl.m() != dl.n() {
            return Err(Error::ConstraintViolation {
                name: "flip".into(),
                detail: format!(
                    "flip is an isometry only for m = n; DL({},{}) needs the squeeze variant",
                    dl.m(),
                    dl.n()
                ),
            });
        }
        let ps = ProductStructure {
            f: BoundaryMap::identity(dl.m()),
            g: BoundaryMap::identity(dl.n()),
            q: HeightComponent { sign: -1, offset: 0 },
            swap: true,
            b_standard: Some(1.0),
        };
        Ok(QiMap {
            name: "flip".into(),
            source: dl.clone(),
            target: dl.clone(),
            kind: MapKind::Product(ps),
            declared_qi: Some(QiConstants { kappa: 1.0, c_add: 0.0 }),
            seed: 0,
        })
    }

    /// The orientation-reversing product map on DL(m,n) with m > n: y's
    /// digits are included into base m, x's digits reduced mod n, heights
    /// negated. A genuine map, deliberately not a quasi-isometry — the
    /// orientation certificate is expected to refute it.
    pub fn squeeze_flip(dl: &DlSpace) -> Result<QiMap> {
        if dl.m() == dl.n() {
            return Err(Error::ConstraintViolation {
                name: "squeeze_flip".into(),
                detail: "squeeze variant needs m > n; use flip when m = n".into(),
            });
        }
        let ps = ProductStructure {
            f: BoundaryMap::new(dl.m(), vec![BoundaryRule::ReduceMod { to: dl.n() }])?,
            g: BoundaryMap::new(dl.n(), vec![BoundaryRule::Include { to: dl.m() }])?,
            q: HeightComponent { sign: -1, offset: 0 },
            swap: true,
            b_standard: None,
        };
        Ok(QiMap {
            name: "squeeze_flip".into(),
            source: dl.clone(),
            target: dl.clone(),
            kind: MapKind::Product(ps),
            declared_qi: None,
            seed: 0,
        })
    }

    /// Height-respecting but not a product map: the lowest stored y digit
    /// is shifted by the x digit at the mirrored index. Moves every vertex
    /// a distance of at most 2.
    pub fn sheared(dl: &DlSpace) -> QiMap {
        QiMap {
            name: "sheared".into(),
            source: dl.clone(),
            target: dl.clone(),
            kind: MapKind::Sheared,
            declared_qi: Some(QiConstants { kappa: 1.0, c_add: 4.0 }),
            seed: 0,
        }
    }

    /// A seeded pseudorandom walk of exactly `amplitude` steps from every
    /// vertex: stays within `amplitude` of the identity, hence a
    /// (1, 2·amplitude) quasi-isometry.
    pub fn scrambled(dl: &DlSpace, amplitude: u64, seed: u64) -> QiMap {
        QiMap {
            name: format!("scrambled({amplitude})"),
            source: dl.clone(),
            target: dl.clone(),
            kind: MapKind::Scrambled { amplitude },
            declared_qi: Some(QiConstants { kappa: 1.0, c_add: 2.0 * amplitude as f64 }),
            seed,
        }
    }

    /// Folds the upper half space onto the lower one (`z > 0` goes to `-z`,
    /// with the y coordinate truncated to keep the image a vertex). Collapses
    /// mirror pairs, so it is not a quasi-isometry at large scale.
    pub fn hairpin(dl: &DlSpace) -> QiMap {
        QiMap {
            name: "hairpin".into(),
            source: dl.clone(),
            target: dl.clone(),
            kind: MapKind::Hairpin,
            declared_qi: None,
            seed: 0,
        }
    }

    /// A user-supplied point-pair table, completed to a total map by
    /// nearest-neighbor lookup (canonical order breaks ties).
    pub fn table(
        source: &DlSpace,
        target: &DlSpace,
        mut pairs: Vec<(DlPoint, DlPoint)>,
    ) -> Result<QiMap> {
        if pairs.is_empty() {
            return Err(Error::PreconditionViolation {
                name: "table".into(),
                detail: "point-pair table must be nonempty".into(),
            });
        }
        pairs.sort();
        pairs.dedup_by(|a, b| a.0 == b.0);
        Ok(QiMap {
            name: format!("table({} pairs)", pairs.len()),
            source: source.clone(),
            target: target.clone(),
            kind: MapKind::Table(pairs),
            declared_qi: None,
            seed: 0,
        })
    }

    /// Evaluate the map. Total and deterministic; safe to call concurrently.
    pub fn eval(&self, p: &DlPoint) -> DlPoint {
        match &self.kind {
            MapKind::Product(ps) => eval_product(&self.target, ps, p),
            MapKind::Sheared => {
                let z = p.z();
                let shift = p.x().digit(z) % self.source.n();
                let d = (p.y().digit(-z) + shift) % self.source.n();
                let y = p.y().with_digit(-z, d).expect("digit stays in base");
                self.target.point(p.x().clone(), y, z).expect("height untouched")
            }
            MapKind::Scrambled { amplitude } => {
                let mut rng = ChaCha8Rng::seed_from_u64(mix(self.seed, stable_point_hash(p)));
                let mut q = p.clone();
                for _ in 0..*amplitude {
                    let nbrs = self.source.neighbors(&q);
                    q = nbrs[rng.gen_range(0..nbrs.len())].clone();
                }
                q
            }
            MapKind::Hairpin => {
                if p.z() <= 0 {
                    return p.clone();
                }
                let z = -p.z();
                let y = p.y().truncate_below(-z);
                self.target.point(p.x().clone(), y, z).expect("supports checked")
            }
            MapKind::Table(pairs) => {
                let best = pairs
                    .iter()
                    .min_by_key(|(src, _)| (self.source.distance(src, p), src.clone()))
                    .expect("table nonempty");
                best.1.clone()
            }
        }
    }
}

/// Evaluate a product structure at a vertex: apply the boundary maps, move
/// the height, and truncate each coordinate below its new cutoff (the
/// truncated digits are exactly the positions the target vertex forgets).
pub fn eval_product(target: &DlSpace, ps: &ProductStructure, p: &DlPoint) -> DlPoint {
    let z = ps.q.apply(p.z());
    let fx = ps.f.apply(p.x()).expect("source base validated");
    let gy = ps.g.apply(p.y()).expect("source base validated");
    let (x, y) = if ps.swap { (gy, fx) } else { (fx, gy) };
    target
        .point(x.truncate_below(z), y.truncate_below(-z), z)
        .expect("truncation restores the support invariants")
}

fn mix(seed: u64, h: u64) -> u64 {
    // splitmix64 finalizer over the xor; a stable, well-spread combiner.
    let mut x = seed ^ h.rotate_left(17);
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// FNV-1a over the canonical vertex literal: stable across platforms and
/// releases, unlike the standard library hasher.
fn stable_point_hash(p: &DlPoint) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in p.to_string().bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// How `estimate_qi_constants` samples: vertex pairs from a centered box.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SampleSpec {
    pub box_size: u64,
    pub pairs: usize,
    pub seed: u64,
}

/// Smallest constants found on the sample, with the witnesses attaining
/// the two defining inequalities.
#[derive(Debug, Clone)]
pub struct QiEstimate {
    pub kappa: f64,
    pub c_add: f64,
    /// Largest source distance seen.
    pub d_max: u64,
    /// Pair maximizing `d_target - kappa·d_source`.
    pub upper_witness: (DlPoint, DlPoint),
    /// Pair maximizing `d_source/kappa - d_target`.
    pub lower_witness: (DlPoint, DlPoint),
}

/// Estimate (κ, C) by a one-dimensional sweep over a geometric κ grid:
/// for each κ the best C is `max(0, max(d_t - κ·d_s), max(d_s/κ - d_t))`;
/// the estimate is the smallest grid κ whose C fits under `c_cap`, or the
/// κ minimizing C when none does.
pub fn estimate_qi_constants(map: &QiMap, spec: &SampleSpec, c_cap: f64) -> Result<QiEstimate> {
    let bx = DlBox::centered(map.source(), spec.box_size)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut rows: Vec<(u64, u64, DlPoint, DlPoint)> = Vec::with_capacity(spec.pairs);
    for _ in 0..spec.pairs {
        let p = bx.sample_point(&mut rng);
        let q = bx.sample_point(&mut rng);
        let ds = map.source().distance(&p, &q);
        let dt = map.target().distance(&map.eval(&p), &map.eval(&q));
        rows.push((ds, dt, p, q));
    }
    let d_max = rows.iter().map(|r| r.0).max().unwrap_or(0);

    let c_for = |kappa: f64| -> f64 {
        let mut c = 0.0f64;
        for (ds, dt, _, _) in &rows {
            let (ds, dt) = (*ds as f64, *dt as f64);
            c = c.max(dt - kappa * ds).max(ds / kappa - dt);
        }
        c
    };
    let grid: Vec<f64> = (0..=160).map(|j| 2f64.powf(j as f64 / 8.0)).collect();
    let kappa = grid
        .iter()
        .copied()
        .find(|&k| c_for(k) <= c_cap)
        .unwrap_or_else(|| {
            let mut best = (f64::INFINITY, 1.0);
            for &k in &grid {
                let c = c_for(k);
                if c < best.0 {
                    best = (c, k);
                }
            }
            best.1
        });
    let c_add = c_for(kappa);

    let pick = |score: &dyn Fn(f64, f64) -> f64| -> (DlPoint, DlPoint) {
        let r = rows
            .iter()
            .max_by(|a, b| {
                score(a.0 as f64, a.1 as f64)
                    .partial_cmp(&score(b.0 as f64, b.1 as f64))
                    .unwrap()
                    .then_with(|| (&a.2, &a.3).cmp(&(&b.2, &b.3)).reverse())
            })
            .expect("sample nonempty");
        (r.2.clone(), r.3.clone())
    };
    if rows.is_empty() {
        return Err(Error::PreconditionViolation {
            name: "sample".into(),
            detail: "need at least one sampled pair".into(),
        });
    }
    let upper_witness = pick(&|ds, dt| dt - kappa * ds);
    let lower_witness = pick(&|ds, dt| ds / kappa - dt);
    Ok(QiEstimate { kappa, c_add, d_max, upper_witness, lower_witness })
}

/// Approximate inverse by nearest-preimage lookup over the images of a
/// seeded net of source points.
pub struct ApproxInverse {
    target: DlSpace,
    /// (image, source), sorted canonically for deterministic ties.
    entries: Vec<(DlPoint, DlPoint)>,
}

impl ApproxInverse {
    pub fn build(map: &QiMap, net: &[DlPoint]) -> ApproxInverse {
        let mut entries: Vec<(DlPoint, DlPoint)> =
            net.iter().map(|p| (map.eval(p), p.clone())).collect();
        entries.sort();
        entries.dedup();
        ApproxInverse { target: map.target().clone(), entries }
    }

    pub fn eval(&self, q: &DlPoint) -> DlPoint {
        self.entries
            .iter()
            .min_by_key(|(img, src)| (self.target.distance(img, q), img.clone(), src.clone()))
            .expect("net nonempty")
            .1
            .clone()
    }

    /// Largest round-trip gap `d(φ(φ̃⁻¹(q)), q)` over the given probes —
    /// the realized density constant of the inverse.
    pub fn density_gap(&self, map: &QiMap, probes: &[DlPoint]) -> u64 {
        probes
            .iter()
            .map(|q| {
                let back = self.eval(q);
                map.target().distance(&map.eval(&back), q)
            })
            .max()
            .unwrap_or(0)
    }
}

/// Greedy maximal `sep`-separated subset in canonical order; every input
/// point is within `sep` of some chosen center (Vitali-style packing).
pub fn maximal_separated_subset(space: &DlSpace, pts: &[DlPoint], sep: u64) -> Vec<DlPoint> {
    let mut ordered: Vec<&DlPoint> = pts.iter().collect();
    ordered.sort();
    ordered.dedup();
    let mut chosen: Vec<DlPoint> = Vec::new();
    for p in ordered {
        if chosen.iter().all(|c| space.distance(c, p) > sep) {
            chosen.push(p.clone());
        }
    }
    chosen
}

/// The three volumes of the transport inequality and the ball-growth
/// constant that certifies their two-sided comparison.
#[derive(Debug, Clone)]
pub struct TransportVolumes {
    pub n_a_u: u64,
    pub image_of_n_a_u: u64,
    pub n_a_phi_u: u64,
    pub omega1: BigUint,
}

fn neighborhood(space: &DlSpace, seed: &[DlPoint], a: u64) -> Vec<DlPoint> {
    let mut seen: HashSet<DlPoint> = seed.iter().cloned().collect();
    let mut frontier: Vec<DlPoint> = seed.to_vec();
    for _ in 0..a {
        let mut next = Vec::new();
        for p in &frontier {
            for q in space.neighbors(p) {
                if seen.insert(q.clone()) {
                    next.push(q);
                }
            }
        }
        frontier = next;
    }
    seen.into_iter().collect()
}

/// Compute `|N_a(U)|`, `|φ(N_a(U))|`, `|N_a(φ(U))|` exactly and certify
/// `ω₁⁻¹·|φ(N_a(U))| ≤ |N_a(U)| ≤ ω₁·|N_a(φ(U))|` with ω₁ taken from the
/// ball-growth ledger (`|B(a)|·|B(⌈κC⌉)|`).
pub fn transport_volume(
    map: &QiMap,
    u: &[DlPoint],
    a: u64,
    qi: &QiConstants,
) -> Result<TransportVolumes> {
    if (a as f64) <= 4.0 * qi.kappa * qi.c_add {
        return Err(Error::PreconditionViolation {
            name: "transport_radius".into(),
            detail: format!("need a > 4κC = {}", 4.0 * qi.kappa * qi.c_add),
        });
    }
    if u.is_empty() {
        return Err(Error::PreconditionViolation {
            name: "transport_set".into(),
            detail: "U must be nonempty".into(),
        });
    }
    let n_a_u = neighborhood(map.source(), u, a);
    let image: HashSet<DlPoint> = n_a_u.iter().map(|p| map.eval(p)).collect();
    let phi_u: Vec<DlPoint> = {
        let set: HashSet<DlPoint> = u.iter().map(|p| map.eval(p)).collect();
        set.into_iter().collect()
    };
    let n_a_phi_u = neighborhood(map.target(), &phi_u, a);

    let fiber_radius = (qi.kappa * qi.c_add).ceil() as u64;
    let omega1 = map.source().ball_count(a) * map.target().ball_count(fiber_radius);

    let vols = TransportVolumes {
        n_a_u: n_a_u.len() as u64,
        image_of_n_a_u: image.len() as u64,
        n_a_phi_u: n_a_phi_u.len() as u64,
        omega1: omega1.clone(),
    };
    // |φ(N_a(U))| ≤ ω₁·|N_a(U)| and |N_a(U)| ≤ ω₁·|N_a(φ(U))|, exactly.
    let ok_left = BigUint::from(vols.image_of_n_a_u) <= &omega1 * BigUint::from(vols.n_a_u);
    let ok_right = BigUint::from(vols.n_a_u) <= &omega1 * BigUint::from(vols.n_a_phi_u);
    if !(ok_left && ok_right) {
        return Err(Error::AssertionFailed {
            invariant: "transport_volume".into(),
            detail: format!(
                "volumes ({}, {}, {}) escape ω₁ = {}",
                vols.n_a_u, vols.image_of_n_a_u, vols.n_a_phi_u, omega1
            ),
        });
    }
    Ok(vols)
}

/// Serializable map description for scenario files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapSpec {
    Identity,
    HeightTranslation { k: i64 },
    StandardRotation { window: i64, add: (u8, u8), mult: (u8, u8) },
    StandardPairSwap,
    Flip,
    SqueezeFlip,
    Sheared,
    Scrambled { amplitude: u64 },
    Hairpin,
}

impl QiMap {
    pub fn from_spec(dl: &DlSpace, spec: &MapSpec, seed: u64) -> Result<QiMap> {
        match spec {
            MapSpec::Identity => Ok(QiMap::identity(dl)),
            MapSpec::HeightTranslation { k } => QiMap::height_translation(dl, *k),
            MapSpec::StandardRotation { window, add, mult } => {
                QiMap::standard_rotation(dl, *window, *add, *mult)
            }
            MapSpec::StandardPairSwap => QiMap::standard_pair_swap(dl),
            MapSpec::Flip => QiMap::flip(dl),
            MapSpec::SqueezeFlip => QiMap::squeeze_flip(dl),
            MapSpec::Sheared => Ok(QiMap::sheared(dl)),
            MapSpec::Scrambled { amplitude } => Ok(QiMap::scrambled(dl, *amplitude, seed)),
            MapSpec::Hairpin => Ok(QiMap::hairpin(dl)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn dl32() -> DlSpace {
        DlSpace::new(3, 2).unwrap()
    }

    fn dl22() -> DlSpace {
        DlSpace::new(2, 2).unwrap()
    }

    fn box_points(dl: &DlSpace, l: u64) -> Vec<DlPoint> {
        DlBox::centered(dl, l).unwrap().vertices()
    }

    #[test]
    fn identity_and_translation_are_isometries() {
        let dl = dl32();
        let id = QiMap::identity(&dl);
        let tr = QiMap::height_translation(&dl, 5).unwrap();
        let pts = box_points(&dl, 4);
        for (i, p) in pts.iter().enumerate().step_by(7) {
            assert_eq!(id.eval(p), *p);
            for q in pts.iter().skip(i).step_by(11) {
                let d = dl.distance(p, q);
                assert_eq!(dl.distance(&tr.eval(p), &tr.eval(q)), d, "translation {p} {q}");
                assert_eq!(dl.height(&tr.eval(p)), dl.height(p) + 5);
            }
        }
    }

    #[test]
    fn rotation_standard_map_is_an_exact_isometry() {
        let dl = dl32();
        let f = QiMap::standard_rotation(&dl, 6, (1, 1), (2, 1)).unwrap();
        let pts = box_points(&dl, 4);
        for p in pts.iter().step_by(5) {
            for q in pts.iter().step_by(13) {
                assert_eq!(dl.distance(&f.eval(p), &f.eval(q)), dl.distance(p, q));
            }
        }
        assert_eq!(f.declared_product().unwrap().b_standard, Some(1.0));
    }

    #[test]
    fn pair_swap_standard_map_distorts_boundedly() {
        let dl = dl32();
        let f = QiMap::standard_pair_swap(&dl).unwrap();
        let pts = box_points(&dl, 4);
        let mut moved = false;
        for p in pts.iter().step_by(3) {
            for q in pts.iter().step_by(17) {
                let ds = dl.distance(p, q) as i64;
                let dt = dl.distance(&f.eval(p), &f.eval(q)) as i64;
                assert!((ds - dt).abs() <= 4, "additive slack exceeded at {p} {q}");
                moved |= ds != dt;
            }
        }
        assert!(moved, "pair swap is not the identity on distances");
    }

    #[test]
    fn flip_is_an_isometry_exactly_when_unimodular() {
        assert!(QiMap::flip(&dl32()).is_err());
        let dl = dl22();
        let f = QiMap::flip(&dl).unwrap();
        let pts = box_points(&dl, 4);
        for p in pts.iter().step_by(3) {
            assert_eq!(dl.height(&f.eval(p)), -dl.height(p));
            for q in pts.iter().step_by(7) {
                assert_eq!(dl.distance(&f.eval(p), &f.eval(q)), dl.distance(p, q));
            }
        }
    }

    #[test]
    fn squeeze_flip_reverses_heights_and_is_total() {
        let dl = dl32();
        assert!(QiMap::squeeze_flip(&dl22()).is_err());
        let f = QiMap::squeeze_flip(&dl).unwrap();
        assert!(f.declared_product().unwrap().q.reversing());
        for p in box_points(&dl, 4) {
            let q = f.eval(&p);
            assert_eq!(dl.height(&q), -dl.height(&p));
        }
    }

    #[test]
    fn sheared_moves_points_at_most_two() {
        let dl = dl32();
        let f = QiMap::sheared(&dl);
        let pts = box_points(&dl, 4);
        let mut moved = 0usize;
        for p in &pts {
            let q = f.eval(p);
            let d = dl.distance(p, &q);
            assert!(d <= 2, "sheared moved {p} by {d}");
            assert_eq!(dl.height(&q), dl.height(p), "height-respecting");
            if p.x().digit(p.z()) % dl.n() != 0 {
                assert_eq!(d, 2, "nonzero mirror digit must move the vertex");
                moved += 1;
            }
        }
        assert!(moved > 0);
    }

    #[test]
    fn scrambled_is_deterministic_and_amplitude_bounded() {
        let dl = dl22();
        let f = QiMap::scrambled(&dl, 3, 99);
        let pts = box_points(&dl, 4);
        for p in pts.iter().step_by(2) {
            let q1 = f.eval(p);
            let q2 = f.eval(p);
            assert_eq!(q1, q2, "same seed, same image");
            assert!(dl.distance(p, &q1) <= 3);
        }
        let g = QiMap::scrambled(&dl, 3, 100);
        assert!(
            pts.iter().any(|p| f.eval(p) != g.eval(p)),
            "different seeds give different walks"
        );
    }

    #[test]
    fn hairpin_collapses_mirror_pairs() {
        let dl = dl32();
        let f = QiMap::hairpin(&dl);
        let o = dl.origin();
        let mut up = o.clone();
        let mut down = o.clone();
        for _ in 0..3 {
            up = dl.step_up(&up, 0).unwrap();
            down = dl.step_down(&down, 0).unwrap();
        }
        assert_eq!(f.eval(&down), down, "lower half fixed");
        assert_eq!(dl.height(&f.eval(&up)), -3);
        assert_eq!(dl.distance(&f.eval(&up), &f.eval(&down)), 0, "mirror pair collapsed");
        assert_eq!(dl.distance(&up, &down), 6);
    }

    #[test]
    fn estimated_constants_match_declared_ones() {
        let dl = dl32();
        let spec = SampleSpec { box_size: 6, pairs: 300, seed: 11 };
        for map in [
            QiMap::identity(&dl),
            QiMap::height_translation(&dl, 5).unwrap(),
            QiMap::standard_rotation(&dl, 6, (2, 1), (1, 0)).unwrap(),
        ] {
            let est = estimate_qi_constants(&map, &spec, 64.0).unwrap();
            assert_eq!(est.kappa, 1.0, "{} is an isometry", map.name());
            assert_eq!(est.c_add, 0.0, "{} needs no additive slack", map.name());
        }
        let sheared = estimate_qi_constants(&QiMap::sheared(&dl), &spec, 64.0).unwrap();
        assert_eq!(sheared.kappa, 1.0);
        assert!(sheared.c_add <= 4.0);
    }

    #[test]
    fn pair_swap_constants_checked_exhaustively_on_dl22() {
        let dl = dl22();
        let f = QiMap::standard_pair_swap(&dl).unwrap();
        let pts = box_points(&dl, 4);
        let b = f.declared_product().unwrap().b_standard.unwrap();
        for p in &pts {
            for q in &pts {
                let ds = dl.distance(p, q) as f64;
                let dt = dl.distance(&f.eval(p), &f.eval(q)) as f64;
                // Boundary distortion by one base factor costs 4 in the graph.
                assert!(dt <= b * ds + 4.0 && ds <= b * dt + 4.0);
            }
        }
    }

    #[test]
    fn hairpin_kappa_grows_with_the_distance_cap() {
        let dl = dl22();
        let f = QiMap::hairpin(&dl);
        let small = estimate_qi_constants(&f, &SampleSpec { box_size: 4, pairs: 400, seed: 3 }, 2.0)
            .unwrap();
        let large = estimate_qi_constants(&f, &SampleSpec { box_size: 10, pairs: 400, seed: 3 }, 2.0)
            .unwrap();
        assert!(large.d_max > small.d_max);
        assert!(
            large.kappa > small.kappa,
            "folding map: kappa {} -> {} as the cap grows",
            small.kappa,
            large.kappa
        );
    }

    #[test]
    fn approx_inverse_round_trips_isometries() {
        let dl = dl32();
        let map = QiMap::standard_rotation(&dl, 6, (1, 1), (0, 1)).unwrap();
        let net = box_points(&dl, 4);
        let inv = ApproxInverse::build(&map, &net);
        for p in net.iter().step_by(9) {
            assert_eq!(inv.eval(&map.eval(p)), *p, "exact preimage inside the net");
        }
        assert_eq!(inv.density_gap(&map, &net[..40.min(net.len())].to_vec()), 0);
    }

    #[test]
    fn separated_subsets_cover_at_their_separation() {
        let dl = dl32();
        let pts = box_points(&dl, 4);
        let centers = maximal_separated_subset(&dl, &pts, 2);
        for (a, b) in centers.iter().zip(centers.iter().skip(1)) {
            assert!(dl.distance(a, b) > 2);
        }
        for p in &pts {
            assert!(
                centers.iter().any(|c| dl.distance(c, p) <= 2),
                "{p} not covered by the packing"
            );
        }
    }

    #[test]
    fn transport_volumes_certified_for_library_maps() {
        let dl = dl22();
        let bx = DlBox::centered(&dl, 2).unwrap();
        let u = bx.enumerate_level(bx.z_lo());
        let qi = QiConstants { kappa: 1.0, c_add: 0.0 };

        let id = QiMap::identity(&dl);
        let v = transport_volume(&id, &u, 2, &qi).unwrap();
        assert_eq!(v.n_a_u, v.image_of_n_a_u);
        assert_eq!(v.n_a_u, v.n_a_phi_u);

        let tr = QiMap::height_translation(&dl, 3).unwrap();
        let w = transport_volume(&tr, &u, 2, &qi).unwrap();
        assert_eq!(w.n_a_u, v.n_a_u, "vertex transitivity");
        assert_eq!(w.n_a_phi_u, v.n_a_phi_u);

        let sw = QiMap::standard_pair_swap(&dl).unwrap();
        let qi_sw = QiConstants { kappa: 1.0, c_add: 0.25 };
        let s = transport_volume(&sw, &u, 2, &qi_sw).unwrap();
        assert!(BigUint::from(s.n_a_u) <= s.omega1.clone() * BigUint::from(s.n_a_phi_u));

        assert!(matches!(
            transport_volume(&id, &u, 2, &QiConstants { kappa: 2.0, c_add: 1.0 }),
            Err(Error::PreconditionViolation { .. })
        ));
    }

    #[test]
    fn product_structure_agrees_with_evaluator_everywhere_sampled() {
        let dl = dl32();
        let maps = [
            QiMap::identity(&dl),
            QiMap::height_translation(&dl, -2).unwrap(),
            QiMap::standard_rotation(&dl, 6, (1, 1), (1, 1)).unwrap(),
            QiMap::standard_pair_swap(&dl).unwrap(),
            QiMap::squeeze_flip(&dl).unwrap(),
        ];
        let bx = DlBox::centered(&dl, 4).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for map in &maps {
            let ps = map.declared_product().unwrap();
            for _ in 0..50 {
                let p = bx.sample_point(&mut rng);
                assert_eq!(map.eval(&p), eval_product(map.target(), ps, &p), "{}", map.name());
            }
        }
    }

    #[test]
    fn table_maps_complete_by_nearest_neighbor() {
        let dl = dl22();
        let o = dl.origin();
        let up = dl.step_up(&o, 1).unwrap();
        let far = dl.step_down(&dl.step_down(&o, 1).unwrap(), 1).unwrap();
        let map = QiMap::table(&dl, &dl, vec![(o.clone(), up.clone()), (far.clone(), o.clone())])
            .unwrap();
        assert_eq!(map.eval(&o), up);
        assert_eq!(map.eval(&far), o);
        // A point adjacent to `far` resolves to far's image.
        let near_far = dl.step_down(&far, 1).unwrap();
        assert_eq!(map.eval(&near_far), o);
    }

    #[test]
    fn map_specs_round_trip_and_build() {
        let dl = dl32();
        let specs = vec![
            MapSpec::Identity,
            MapSpec::HeightTranslation { k: 3 },
            MapSpec::StandardRotation { window: 6, add: (1, 1), mult: (0, 1) },
            MapSpec::StandardPairSwap,
            MapSpec::SqueezeFlip,
            MapSpec::Sheared,
            MapSpec::Scrambled { amplitude: 2 },
            MapSpec::Hairpin,
        ];
        for spec in specs {
            let s = serde_json::to_string(&spec).unwrap();
            assert_eq!(serde_json::from_str::<MapSpec>(&s).unwrap(), spec);
            let map = QiMap::from_spec(&dl, &spec, 42).unwrap();
            let o = dl.origin();
            let _ = map.eval(&o);
        }
        assert!(QiMap::from_spec(&dl, &MapSpec::Flip, 0).is_err(), "flip needs m = n");
    }
}
