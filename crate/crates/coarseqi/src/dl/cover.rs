//! Tilings of a box by congruent sub-boxes, and the exact averaging identity
//! that converts family averages over the box's geodesics into
//! measure-weighted averages over tiles.
//!
//! For `R` dividing the box size `L`, the closed height slabs
//! `[jR, (j+1)R]` (in levels above the bottom) cut the box into connected
//! tiles: a tile of band `j` is determined by a first-tree prefix of length
//! `L-(j+1)R` and a second-tree prefix of length `jR`, and is itself a box of
//! size `R`.
//!
//! Two accounting conventions coexist and are kept apart deliberately:
//!
//! * **Partition accounting** (`owned_*`): band `j` owns levels
//!   `jR ..= (j+1)R-1`, and the top band additionally owns the top level.
//!   Every vertex is owned exactly once, so the untiled remainder is empty.
//! * **Identity accounting** (`*_accounting`): every band counts exactly `R`
//!   levels and the box counts `L` of its `L+1` levels. A closed slab has
//!   `R+1` levels but only `R` level-gaps, and the averaging identity is an
//!   identity about gaps; with this convention it holds exactly, band by
//!   band, which the test below checks with rational arithmetic.

use num_rational::BigRational;
use num_traits::Zero;

use super::boxes::{words, DlBox};
use super::DlPoint;
use crate::{Error, Result};

/// A tiling of a box into size-`r` sub-boxes.
#[derive(Clone, Debug)]
pub struct DlTiling {
    bx: DlBox,
    r: u64,
}

/// Identifies one tile: its band and the two descent prefixes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TileId {
    pub band: u64,
    pub w1_prefix: Vec<u8>,
    pub w2_prefix: Vec<u8>,
}

impl DlTiling {
    pub fn new(bx: &DlBox, r: u64) -> Result<Self> {
        if r == 0 || bx.size() % r != 0 {
            return Err(Error::ConstraintViolation {
                name: "tile_size".into(),
                detail: format!("tile size {r} must divide box size {}", bx.size()),
            });
        }
        Ok(DlTiling { bx: bx.clone(), r })
    }

    pub fn bx(&self) -> &DlBox {
        &self.bx
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn bands(&self) -> u64 {
        self.bx.size() / self.r
    }

    /// Number of tiles in band `j`: `m^(L-(j+1)R) * n^(jR)`.
    pub fn band_count(&self, j: u64) -> u128 {
        let space = self.bx.space();
        let l = self.bx.size();
        (space.m() as u128).pow((l - (j + 1) * self.r) as u32)
            * (space.n() as u128).pow((j * self.r) as u32)
    }

    pub fn tile_count(&self) -> u128 {
        (0..self.bands()).map(|j| self.band_count(j)).sum()
    }

    /// Band owning height `z` under partition accounting.
    pub fn owned_band_of(&self, z: i64) -> u64 {
        let t = self.bx.level_of(z);
        (t / self.r).min(self.bands() - 1)
    }

    /// Absolute heights owned by band `j`.
    pub fn owned_heights(&self, j: u64) -> std::ops::RangeInclusive<i64> {
        let lo = self.bx.z_lo() + (j * self.r) as i64;
        let hi = if j + 1 == self.bands() {
            self.bx.z_hi()
        } else {
            self.bx.z_lo() + ((j + 1) * self.r) as i64 - 1
        };
        lo..=hi
    }

    /// The tile owning `p` under partition accounting.
    pub fn tile_owning(&self, p: &DlPoint) -> TileId {
        debug_assert!(self.bx.contains(p));
        let j = self.owned_band_of(p.z());
        self.tile_at(j, p)
    }

    /// The band-`j` tile whose closed slab contains `p` (requires `p`'s
    /// level to lie in `[jR, (j+1)R]`).
    pub fn tile_at(&self, j: u64, p: &DlPoint) -> TileId {
        let t = self.bx.level_of(p.z());
        assert!(t >= j * self.r && t <= (j + 1) * self.r, "point outside band {j}");
        let l = self.bx.size();
        let z_hi = self.bx.z_hi();
        let z_lo = self.bx.z_lo();
        let w1_len = (l - (j + 1) * self.r) as usize;
        let w2_len = (j * self.r) as usize;
        let w1_prefix: Vec<u8> = (0..w1_len).map(|k| p.x().digit(z_hi - 1 - k as i64)).collect();
        let w2_prefix: Vec<u8> = (0..w2_len).map(|k| p.y().digit(-z_lo - 1 - k as i64)).collect();
        TileId { band: j, w1_prefix, w2_prefix }
    }

    pub fn tiles_in_band(&self, j: u64) -> impl Iterator<Item = TileId> + '_ {
        let space = self.bx.space();
        let l = self.bx.size();
        let w1_len = (l - (j + 1) * self.r) as usize;
        let w2_len = (j * self.r) as usize;
        let m = space.m();
        let n = space.n();
        words(m, w1_len).flat_map(move |w1| {
            words(n, w2_len).map(move |w2| TileId {
                band: j,
                w1_prefix: w1.clone(),
                w2_prefix: w2,
            })
        })
    }

    pub fn tiles(&self) -> impl Iterator<Item = TileId> + '_ {
        (0..self.bands()).flat_map(move |j| self.tiles_in_band(j))
    }

    /// The tile as a box of size `R` (so it carries its own geodesic family
    /// of `(mn)^R` segments).
    pub fn tile_box(&self, tile: &TileId) -> DlBox {
        let z_lo = self.bx.z_lo() + (tile.band * self.r) as i64;
        let z_hi = z_lo + self.r as i64;
        let anchor1 = self.bx.anchor1().descend(&tile.w1_prefix).expect("prefix digits valid");
        let anchor2 = self.bx.anchor2().descend(&tile.w2_prefix).expect("prefix digits valid");
        DlBox::anchored(self.bx.space(), z_lo, z_hi, anchor1, anchor2)
            .expect("tile anchors consistent")
    }

    /// Measure of one band-`j` tile under identity accounting (`R` levels).
    pub fn tile_measure_accounting(&self, j: u64) -> BigRational {
        let witness = self
            .tiles_in_band(j)
            .next()
            .expect("band has at least one tile");
        let tile = self.tile_box(&witness);
        BigRational::from_integer(self.r.into()) * tile.mu_level()
    }

    /// Measure of the box under identity accounting (`L` levels).
    pub fn box_measure_accounting(&self) -> BigRational {
        BigRational::from_integer(self.bx.size().into()) * self.bx.mu_level()
    }

    /// Vertices not owned by any tile. The partition accounting makes this
    /// empty; the method computes it honestly from counts.
    pub fn untiled_count(&self) -> u128 {
        let mut owned = 0u128;
        for j in 0..self.bands() {
            let witness = self.tiles_in_band(j).next().expect("band has a tile");
            let tile = self.tile_box(&witness);
            let per_tile: u128 = self.owned_heights(j).map(|z| tile.level_count(z)).sum();
            owned += self.band_count(j) * per_tile;
        }
        self.bx.vertex_count() - owned
    }

    /// The band-`j` segment of a family geodesic given as its `L+1` points
    /// (bottom to top): the `R+1` points in the closed slab.
    pub fn segment_of<'a>(&self, path: &'a [DlPoint], j: u64) -> &'a [DlPoint] {
        let lo = (j * self.r) as usize;
        let hi = ((j + 1) * self.r) as usize;
        &path[lo..=hi]
    }
}

/// Evaluates both sides of the averaging identity exactly for an arbitrary
/// function of (tile, segment): the left side averages `f` over all family
/// geodesics and bands, the right side takes the measure-weighted average
/// over tiles of the per-tile family average. The two agree exactly.
pub fn averaging_identity(
    tiling: &DlTiling,
    mut f: impl FnMut(&TileId, &[DlPoint]) -> BigRational,
) -> (BigRational, BigRational) {
    let bx = tiling.bx();
    let bands = tiling.bands();
    // Left side.
    let mut lhs = BigRational::zero();
    for id in 0..bx.geodesic_count() {
        let (w1, w2) = bx.geodesic_words(id);
        let path = bx.geodesic_points(&w1, &w2);
        for j in 0..bands {
            let seg = tiling.segment_of(&path, j);
            let tile = tiling.tile_at(j, &seg[0]);
            lhs += f(&tile, seg);
        }
    }
    lhs /= BigRational::from_integer((bx.geodesic_count()).into())
        * BigRational::from_integer(bands.into());
    // Right side.
    let total = tiling.box_measure_accounting();
    let mut rhs = BigRational::zero();
    for j in 0..bands {
        let weight = tiling.tile_measure_accounting(j) / total.clone();
        for tile in tiling.tiles_in_band(j) {
            let tb = tiling.tile_box(&tile);
            let mut avg = BigRational::zero();
            for sid in 0..tb.geodesic_count() {
                let (w1, w2) = tb.geodesic_words(sid);
                let seg = tb.geodesic_points(&w1, &w2);
                avg += f(&tile, &seg);
            }
            avg /= BigRational::from_integer(tb.geodesic_count().into());
            rhs += weight.clone() * avg;
        }
    }
    (lhs, rhs)
}
