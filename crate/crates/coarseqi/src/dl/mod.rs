//! Diestel-Leader graphs: exact vertices, adjacency, distances and measure.
//!
//! `DL(m,n)` is the horospherical product of the trees `T_m` and `T_n`: a
//! vertex is a pair of tree vertices whose Busemann heights sum to zero. We
//! store the pair as coordinates `(x, y, z)`: `x` addresses the `T_m` vertex
//! at height `z`, `y` addresses the `T_n` vertex at its own internal height
//! `-z`. Moving up in the graph is forced in `T_m` and picks one of `n`
//! children in `T_n`; moving down picks one of `m` children in `T_m`.
//!
//! The vertical density at height `z` is `(m/n)^z`: going one level up
//! multiplies the number of available first coordinates by `1/m` and second
//! coordinates by `n`, and this rational weight is what all measure
//! statements below use (exactly, via big rationals).

pub mod boxes;
pub mod cover;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::trees::{tree_distance, LadicAddress, TreeVertex};
use crate::{Error, Result};

/// A vertex of `DL(m,n)` in `(x, y, z)` coordinates.
///
/// Invariants (enforced by [`DlSpace::point`]): `x` has no digit below `z`
/// and `y` has no digit below `-z`, so both addresses are canonical rays
/// through the two tree vertices.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct DlPoint {
    x: LadicAddress,
    y: LadicAddress,
    z: i64,
}

impl DlPoint {
    pub fn x(&self) -> &LadicAddress {
        &self.x
    }

    pub fn y(&self) -> &LadicAddress {
        &self.y
    }

    pub fn z(&self) -> i64 {
        self.z
    }
}

impl std::fmt::Display for DlPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(x={}, y={}, z={})", self.x, self.y, self.z)
    }
}

impl std::str::FromStr for DlPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| Error::Parse { detail: format!("vertex literal `{s}` missing parens") })?;
        let mut x = None;
        let mut y = None;
        let mut z = None;
        for part in inner.split(',') {
            let (key, value) = part.split_once('=').ok_or_else(|| Error::Parse {
                detail: format!("vertex literal field `{part}` missing `=`"),
            })?;
            match key.trim() {
                "x" => x = Some(value.trim().parse::<LadicAddress>()?),
                "y" => y = Some(value.trim().parse::<LadicAddress>()?),
                "z" => {
                    z = Some(value.trim().parse::<i64>().map_err(|_| Error::Parse {
                        detail: format!("bad height `{value}`"),
                    })?)
                }
                other => {
                    return Err(Error::Parse { detail: format!("unknown vertex field `{other}`") })
                }
            }
        }
        match (x, y, z) {
            (Some(x), Some(y), Some(z)) => {
                let space = DlSpace::new(x.base(), y.base())?;
                space.point(x, y, z)
            }
            _ => Err(Error::Parse { detail: format!("vertex literal `{s}` missing a field") }),
        }
    }
}

/// The graph `DL(m,n)` with branching parameters fixed.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DlSpace {
    m: u8,
    n: u8,
}

impl DlSpace {
    pub fn new(m: u8, n: u8) -> Result<Self> {
        for b in [m, n] {
            if !(2..=10).contains(&b) {
                return Err(Error::ConstraintViolation {
                    name: "branching".into(),
                    detail: format!("branching parameter {b} outside 2..=10"),
                });
            }
        }
        Ok(DlSpace { m, n })
    }

    pub fn m(&self) -> u8 {
        self.m
    }

    pub fn n(&self) -> u8 {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.m as usize + self.n as usize
    }

    pub fn origin(&self) -> DlPoint {
        DlPoint {
            x: LadicAddress::zero(self.m).expect("base checked"),
            y: LadicAddress::zero(self.n).expect("base checked"),
            z: 0,
        }
    }

    /// Validates coordinates into a vertex.
    pub fn point(&self, x: LadicAddress, y: LadicAddress, z: i64) -> Result<DlPoint> {
        if x.base() != self.m || y.base() != self.n {
            return Err(Error::Parse {
                detail: format!(
                    "coordinate bases ({}, {}) do not match DL({}, {})",
                    x.base(),
                    y.base(),
                    self.m,
                    self.n
                ),
            });
        }
        if x.support_min().is_some_and(|b| b < z) {
            return Err(Error::Parse {
                detail: format!("x digit below height {z} in {x}"),
            });
        }
        if y.support_min().is_some_and(|b| b < -z) {
            return Err(Error::Parse {
                detail: format!("y digit below internal height {} in {y}", -z),
            });
        }
        Ok(DlPoint { x, y, z })
    }

    /// First tree coordinate, at height `z`.
    pub fn t1(&self, p: &DlPoint) -> TreeVertex {
        TreeVertex::new(p.z, p.x.clone())
    }

    /// Second tree coordinate, at internal height `-z`.
    pub fn t2(&self, p: &DlPoint) -> TreeVertex {
        TreeVertex::new(-p.z, p.y.clone())
    }

    pub fn height(&self, p: &DlPoint) -> i64 {
        p.z
    }

    /// The `n` neighbours one level up: forced in `T_m`, free in `T_n`.
    pub fn up_neighbors(&self, p: &DlPoint) -> Vec<DlPoint> {
        let x = p.x.truncate_below(p.z + 1);
        (0..self.n)
            .map(|d| DlPoint {
                x: x.clone(),
                y: p.y.with_digit(-p.z - 1, d).expect("digit in range"),
                z: p.z + 1,
            })
            .collect()
    }

    /// The `m` neighbours one level down: free in `T_m`, forced in `T_n`.
    pub fn down_neighbors(&self, p: &DlPoint) -> Vec<DlPoint> {
        let y = p.y.truncate_below(-p.z + 1);
        (0..self.m)
            .map(|d| DlPoint {
                x: p.x.with_digit(p.z - 1, d).expect("digit in range"),
                y: y.clone(),
                z: p.z - 1,
            })
            .collect()
    }

    pub fn neighbors(&self, p: &DlPoint) -> Vec<DlPoint> {
        let mut out = self.up_neighbors(p);
        out.extend(self.down_neighbors(p));
        out
    }

    /// The up neighbour choosing `d`, or the down neighbour choosing `d`.
    pub fn step_up(&self, p: &DlPoint, d: u8) -> Result<DlPoint> {
        Ok(DlPoint {
            x: p.x.truncate_below(p.z + 1),
            y: p.y.with_digit(-p.z - 1, d)?,
            z: p.z + 1,
        })
    }

    pub fn step_down(&self, p: &DlPoint, d: u8) -> Result<DlPoint> {
        Ok(DlPoint {
            x: p.x.with_digit(p.z - 1, d)?,
            y: p.y.truncate_below(-p.z + 1),
            z: p.z - 1,
        })
    }

    /// Meeting heights of the two tree coordinates: the `T_m` confluence
    /// height `a1` (at or above both points) and the `T_n` confluence
    /// expressed as a graph height `b2` (at or below both points).
    pub fn confluence(&self, p: &DlPoint, q: &DlPoint) -> (i64, i64) {
        let a1 = self.t1(p).confluence_height(&self.t1(q));
        let b2 = -self.t2(p).confluence_height(&self.t2(q));
        (a1, b2)
    }

    /// Graph distance: every path joining `p` and `q` must climb to the
    /// `T_m` confluence and dip to the `T_n` confluence, and one vertical
    /// detour of that size suffices.
    pub fn distance(&self, p: &DlPoint, q: &DlPoint) -> u64 {
        let (a1, b2) = self.confluence(p, q);
        let dz = (p.z - q.z).unsigned_abs();
        2 * (a1 - b2) as u64 - dz
    }

    /// Distance from `p` to the x-horocycle through `q` (all vertices sharing
    /// `q`'s second tree coordinate): the first coordinate can be matched for
    /// free, so only the `T_n` part is felt.
    pub fn x_horocycle_distance(&self, p: &DlPoint, q: &DlPoint) -> u64 {
        tree_distance(&self.t2(p), &self.t2(q))
    }

    /// Distance from `p` to the y-horocycle through `q` (all vertices sharing
    /// `q`'s first tree coordinate).
    pub fn y_horocycle_distance(&self, p: &DlPoint, q: &DlPoint) -> u64 {
        tree_distance(&self.t1(p), &self.t1(q))
    }

    /// Vertical density at height `z`, as an exact rational.
    pub fn mu_weight(&self, z: i64) -> BigRational {
        let ratio = BigRational::new(BigUint::from(self.m).into(), BigUint::from(self.n).into());
        pow_i64(&ratio, z)
    }

    /// Closed-form count of the ball of radius `r` around any vertex.
    ///
    /// Counts points by height `z`, exact `T_m` meeting height `a` and exact
    /// `T_n` meeting height `b` (as graph heights): the distance is
    /// `2(a-b) - |z|` and the number of tree vertices with a given exact
    /// meeting height factors completely.
    pub fn ball_count(&self, r: u64) -> BigUint {
        let r = r as i64;
        let m = BigUint::from(self.m);
        let n = BigUint::from(self.n);
        let mut total = BigUint::zero();
        for z in -r..=r {
            let a_min = z.max(0);
            let b_max = z.min(0);
            for a in a_min..=(r + 1) {
                for b in (-r - 1)..=b_max {
                    if 2 * (a - b) - z.abs() > r {
                        continue;
                    }
                    let c1 = tree_meet_count(&m, self.m, z, a, a_min);
                    let c2 = tree_meet_count(&n, self.n, -z, -b, -b_max);
                    total += c1 * c2;
                }
            }
        }
        total
    }

    /// Enumerates the ball of radius `r` around `center` by breadth-first
    /// search over neighbours (small radii only).
    pub fn ball_points(&self, center: &DlPoint, r: u64) -> Vec<DlPoint> {
        let mut seen = std::collections::HashSet::new();
        let mut out = vec![center.clone()];
        seen.insert(center.clone());
        let mut frontier = vec![center.clone()];
        for _ in 0..r {
            let mut next = Vec::new();
            for p in &frontier {
                for q in self.neighbors(p) {
                    if seen.insert(q.clone()) {
                        out.push(q.clone());
                        next.push(q);
                    }
                }
            }
            frontier = next;
        }
        out
    }

    /// The isometry carrying `p` to the origin: a height translation composed
    /// with level-wise digit rotations in both trees.
    pub fn translation_to_origin(&self, p: &DlPoint) -> DlTranslation {
        DlTranslation { space: self.clone(), base: p.clone() }
    }
}

/// Vertex-transitive relabelling taking a base point to the origin.
pub struct DlTranslation {
    space: DlSpace,
    base: DlPoint,
}

impl DlTranslation {
    pub fn apply(&self, q: &DlPoint) -> DlPoint {
        let z = q.z - self.base.z;
        // Digit positions below the new height are forgotten by the graph
        // (the base point's own low digits), so truncate after the rotation;
        // carry-free subtraction plus an index shift is a tree automorphism
        // on each factor, hence the composite preserves DL distance.
        let x = q
            .x
            .digit_sub(&self.base.x)
            .expect("same base")
            .shift(-self.base.z)
            .truncate_below(z);
        let y = q
            .y
            .digit_sub(&self.base.y)
            .expect("same base")
            .shift(self.base.z)
            .truncate_below(-z);
        self.space.point(x, y, z).expect("translation preserves invariants")
    }
}

/// Number of height-`z` vertices of an `l`-branching tree whose meeting
/// height with the vertex `(0, zero)` is exactly `a` (`a_min = max(z, 0)`).
fn tree_meet_count(l_big: &BigUint, l: u8, z: i64, a: i64, a_min: i64) -> BigUint {
    if a < a_min {
        return BigUint::zero();
    }
    if a == a_min {
        return if z >= 0 { BigUint::one() } else { l_big.pow((-z) as u32) };
    }
    // First disagreement exactly at index a-1: l-1 choices there, free below.
    BigUint::from(l - 1) * l_big.pow((a - 1 - z) as u32)
}

fn pow_i64(ratio: &BigRational, z: i64) -> BigRational {
    use num_traits::Pow;
    assert!(z.abs() < i32::MAX as i64);
    ratio.clone().pow(z as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::dl_slab_graph;
    use proptest::prelude::*;

    fn pt(space: &DlSpace, s: &str) -> DlPoint {
        let p: DlPoint = s.parse().unwrap();
        assert_eq!(p.x().base(), space.m());
        assert_eq!(p.y().base(), space.n());
        p
    }

    #[test]
    fn neighbor_counts_and_inverse_steps() {
        let dl = DlSpace::new(3, 2).unwrap();
        let o = dl.origin();
        assert_eq!(dl.up_neighbors(&o).len(), 2);
        assert_eq!(dl.down_neighbors(&o).len(), 3);
        for q in dl.up_neighbors(&o) {
            assert!(dl.down_neighbors(&q).contains(&o));
            assert_eq!(dl.distance(&o, &q), 1);
        }
        for q in dl.down_neighbors(&o) {
            assert!(dl.up_neighbors(&q).contains(&o));
            assert_eq!(dl.distance(&o, &q), 1);
        }
    }

    #[test]
    fn vertex_literal_roundtrip() {
        let dl = DlSpace::new(3, 2).unwrap();
        let p = dl
            .point(
                "3:2:12".parse().unwrap(),
                "2:4:101".parse().unwrap(),
                -1,
            )
            .unwrap();
        let s = p.to_string();
        assert_eq!(s, "(x=3:2:12, y=2:4:101, z=-1)");
        assert_eq!(s.parse::<DlPoint>().unwrap(), p);
    }

    #[test]
    fn point_rejects_digits_below_height() {
        let dl = DlSpace::new(3, 2).unwrap();
        // x has a digit at index -1, below height 0.
        assert!(dl.point("3:0:1".parse().unwrap(), "2:0:0".parse().unwrap(), 0).is_err());
        // Same address is fine at height -1.
        assert!(dl.point("3:0:1".parse().unwrap(), "2:0:0".parse().unwrap(), -1).is_ok());
        // y internal height is -z: at z=1 digits must sit at index >= -1.
        assert!(dl.point("3:0:0".parse().unwrap(), "2:-1:1".parse().unwrap(), 1).is_err());
    }

    /// Distance formula against breadth-first search over a materialised
    /// slab, exhaustively for every pair in a DL(3,2) region.
    #[test]
    fn distance_matches_bfs_exhaustively_dl32() {
        let dl = DlSpace::new(3, 2).unwrap();
        let anchor1 = TreeVertex::new(2, LadicAddress::zero(3).unwrap());
        let anchor2 = TreeVertex::new(2, LadicAddress::zero(2).unwrap());
        let g = dl_slab_graph(&dl, -2, 2, &anchor1, &anchor2, dl.origin(), 4000);
        // Level at height z holds 3^(2-z) * 2^(z+2) vertices:
        // z=-2..2 gives 81, 54, 36, 24, 16.
        assert_eq!(g.len(), 81 + 54 + 36 + 24 + 16);
        let all: Vec<u32> = (0..g.len() as u32).collect();
        let tables = g.multi_source_tables(&all);
        for (i, table) in tables.iter().enumerate() {
            let p = g.vertex(i as u32);
            for (j, &d) in table.iter().enumerate() {
                let q = g.vertex(j as u32);
                assert_ne!(d, u32::MAX, "slab disconnected at {p} -> {q}");
                assert_eq!(d as u64, dl.distance(p, q), "pair {p} {q}");
            }
        }
    }

    #[test]
    fn distance_matches_bfs_exhaustively_dl22() {
        let dl = DlSpace::new(2, 2).unwrap();
        let anchor1 = TreeVertex::new(2, LadicAddress::zero(2).unwrap());
        let anchor2 = TreeVertex::new(2, LadicAddress::zero(2).unwrap());
        let g = dl_slab_graph(&dl, -2, 2, &anchor1, &anchor2, dl.origin(), 2000);
        let all: Vec<u32> = (0..g.len() as u32).collect();
        let tables = g.multi_source_tables(&all);
        for (i, table) in tables.iter().enumerate() {
            for (j, &d) in table.iter().enumerate() {
                assert_eq!(d as u64, dl.distance(g.vertex(i as u32), g.vertex(j as u32)));
            }
        }
    }

    #[test]
    fn frozen_distance_values() {
        let dl = DlSpace::new(3, 2).unwrap();
        let o = dl.origin();
        // Two steps down through different digits, then the pair splits at
        // height 0 in T_m and meets again below: computed by the BFS oracle.
        let p = pt(&dl, "(x=3:0:1, y=2:0:0, z=-1)");
        let q = pt(&dl, "(x=3:0:2, y=2:0:0, z=-1)");
        assert_eq!(dl.distance(&p, &q), 2);
        let r = pt(&dl, "(x=3:0:12, y=2:0:0, z=-2)");
        assert_eq!(dl.distance(&o, &r), 2);
        // r extends p's x-digit word downward, so it is one step below p.
        assert_eq!(dl.distance(&p, &r), 1);
        // q disagrees with r at x-index -1, so the pair must climb to height 0.
        assert_eq!(dl.distance(&q, &r), 3);
        let s = pt(&dl, "(x=3:0:0, y=2:0:101, z=3)");
        assert_eq!(dl.distance(&o, &s), 3);
        assert_eq!(dl.distance(&r, &s), 2 * (0 - (-2)) as u64 + 2 * 3 - 5);
    }

    #[test]
    fn horocycle_distances_match_brute_force() {
        let dl = DlSpace::new(3, 2).unwrap();
        let anchor1 = TreeVertex::new(3, LadicAddress::zero(3).unwrap());
        let anchor2 = TreeVertex::new(3, LadicAddress::zero(2).unwrap());
        let g = dl_slab_graph(&dl, -3, 3, &anchor1, &anchor2, dl.origin(), 30000);
        // Sample pairs from the inner slab so the minimiser stays inside.
        let inner: Vec<u32> = (0..g.len() as u32)
            .filter(|&i| g.vertex(i).z().abs() <= 1)
            .collect();
        for &pi in inner.iter().step_by(97) {
            let p = g.vertex(pi).clone();
            let dists = g.bfs(pi, None);
            for &qi in inner.iter().step_by(131) {
                let q = g.vertex(qi).clone();
                let x_min = (0..g.len() as u32)
                    .filter(|&ri| {
                        let r = g.vertex(ri);
                        dl.t2(r) == dl.t2(&q)
                    })
                    .map(|ri| dists[ri as usize] as u64)
                    .min()
                    .unwrap();
                assert_eq!(dl.x_horocycle_distance(&p, &q), x_min, "x-horocycle {p} {q}");
                let y_min = (0..g.len() as u32)
                    .filter(|&ri| {
                        let r = g.vertex(ri);
                        dl.t1(r) == dl.t1(&q)
                    })
                    .map(|ri| dists[ri as usize] as u64)
                    .min()
                    .unwrap();
                assert_eq!(dl.y_horocycle_distance(&p, &q), y_min, "y-horocycle {p} {q}");
            }
        }
    }

    #[test]
    fn ball_count_matches_enumeration() {
        for (m, n) in [(3u8, 2u8), (2, 2), (4, 3)] {
            let dl = DlSpace::new(m, n).unwrap();
            let o = dl.origin();
            for r in 0..=5u64 {
                let pts = dl.ball_points(&o, r);
                assert_eq!(
                    dl.ball_count(r),
                    BigUint::from(pts.len()),
                    "ball of radius {r} in DL({m},{n})"
                );
            }
        }
    }

    #[test]
    fn ball_count_small_values() {
        let dl = DlSpace::new(3, 2).unwrap();
        assert_eq!(dl.ball_count(0), BigUint::from(1u32));
        // 1 + m + n.
        assert_eq!(dl.ball_count(1), BigUint::from(6u32));
    }

    #[test]
    fn translation_moves_base_to_origin_and_preserves_distance() {
        let dl = DlSpace::new(3, 2).unwrap();
        let p = pt(&dl, "(x=3:1:21, y=2:2:1, z=-1)");
        let t = dl.translation_to_origin(&p);
        assert_eq!(t.apply(&p), dl.origin());
        let q = pt(&dl, "(x=3:2:1, y=2:0:0, z=1)");
        let r = pt(&dl, "(x=3:0:12, y=2:4:11, z=-2)");
        assert_eq!(dl.distance(&q, &r), dl.distance(&t.apply(&q), &t.apply(&r)));
        assert_eq!(dl.distance(&p, &q), dl.distance(&dl.origin(), &t.apply(&q)));
    }

    #[test]
    fn vertex_transitivity_of_ball_counts() {
        let dl = DlSpace::new(3, 2).unwrap();
        for s in ["(x=3:1:21, y=2:2:1, z=-1)", "(x=3:0:0, y=2:2:1, z=2)"] {
            let p = pt(&dl, s);
            assert_eq!(dl.ball_points(&p, 3).len(), dl.ball_points(&dl.origin(), 3).len());
        }
    }

    proptest! {
        #[test]
        fn distance_symmetric_and_triangle(
            wx in prop::collection::vec(0u8..3, 0..4),
            wy in prop::collection::vec(0u8..2, 0..4),
            vx in prop::collection::vec(0u8..3, 0..4),
            vy in prop::collection::vec(0u8..2, 0..4),
            ux in prop::collection::vec(0u8..3, 0..4),
            uy in prop::collection::vec(0u8..2, 0..4),
        ) {
            let dl = DlSpace::new(3, 2).unwrap();
            // Build three points by walking words down then up from origin.
            let build = |xs: &[u8], ys: &[u8]| {
                let mut p = dl.origin();
                for &d in xs { p = dl.step_down(&p, d).unwrap(); }
                for &d in ys { p = dl.step_up(&p, d).unwrap(); }
                p
            };
            let a = build(&wx, &wy);
            let b = build(&vx, &vy);
            let c = build(&ux, &uy);
            prop_assert_eq!(dl.distance(&a, &b), dl.distance(&b, &a));
            prop_assert_eq!(dl.distance(&a, &b) == 0, a == b);
            prop_assert!(dl.distance(&a, &c) <= dl.distance(&a, &b) + dl.distance(&b, &c));
            // Distance dominates height change and parity matches.
            let dz = (dl.height(&a) - dl.height(&b)).unsigned_abs();
            prop_assert!(dl.distance(&a, &b) >= dz);
            prop_assert_eq!((dl.distance(&a, &b) - dz) % 2, 0);
        }
    }
}
