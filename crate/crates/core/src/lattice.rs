//! Periodic square lattices and chains: site indexing, nearest-neighbor
//! bonds, and translation classes of site pairs at a fixed separation.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LatticeError {
    #[error("lattice dimensions must be nonzero (got {0}x{1})")]
    ZeroDimension(usize, usize),
    #[error("periodic chain needs Lx >= 3 (a 2-site ring double-counts its bond)")]
    TwoSiteRing,
    #[error("2D lattice needs Lx >= 2 and Ly >= 2 (or Ly = 1 for a chain)")]
    BadShape,
    #[error("open boundaries are not supported")]
    OpenBoundaries,
    #[error("zero separation is not a valid pair class")]
    ZeroSeparation,
}

/// Separation between two sites, canonicalized to 0 <= dx < Lx, 0 <= dy < Ly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SeparationVector {
    pub dx: usize,
    pub dy: usize,
}

impl SeparationVector {
    /// Reduce an arbitrary integer displacement modulo the lattice periods.
    pub fn canonical(dx: i64, dy: i64, lx: usize, ly: usize) -> Result<Self, LatticeError> {
        let dx = dx.rem_euclid(lx as i64) as usize;
        let dy = dy.rem_euclid(ly as i64) as usize;
        if dx == 0 && dy == 0 {
            return Err(LatticeError::ZeroSeparation);
        }
        Ok(Self { dx, dy })
    }

    /// The separation pointing the opposite way, canonicalized.
    pub fn conjugate(&self, lx: usize, ly: usize) -> Self {
        Self {
            dx: (lx - self.dx) % lx,
            dy: (ly - self.dy) % ly,
        }
    }

    /// Euclidean length of the shortest periodic image.
    pub fn min_image_distance(&self, lx: usize, ly: usize) -> f64 {
        let dx = self.dx.min(lx - self.dx) as f64;
        let dy = if ly > 1 {
            self.dy.min(ly - self.dy) as f64
        } else {
            0.0
        };
        (dx * dx + dy * dy).sqrt()
    }
}

/// Sites and bonds of a periodic square lattice (or a ring when Ly = 1).
///
/// Site index is `x + Lx*y`. Each bond is stored once per Hamiltonian term;
/// on width-2 periodic lattices the same site pair legitimately appears
/// twice (both crossings of the boundary).
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeGeometry {
    lx: usize,
    ly: usize,
    bonds: Vec<(u32, u32)>,
}

impl LatticeGeometry {
    pub fn lx(&self) -> usize {
        self.lx
    }

    pub fn ly(&self) -> usize {
        self.ly
    }

    pub fn is_chain(&self) -> bool {
        self.ly == 1
    }

    /// Total number of sites.
    pub fn num_sites(&self) -> usize {
        self.lx * self.ly
    }

    pub fn bonds(&self) -> &[(u32, u32)] {
        &self.bonds
    }

    /// Coordination number: 4 in 2D, 2 on a chain.
    pub fn coordination(&self) -> usize {
        if self.is_chain() {
            2
        } else {
            4
        }
    }

    pub fn site(&self, x: usize, y: usize) -> usize {
        debug_assert!(x < self.lx && y < self.ly);
        x + self.lx * y
    }

    pub fn coords(&self, site: usize) -> (usize, usize) {
        (site % self.lx, site / self.lx)
    }

    /// Sublattice sign (-1)^(x+y); meaningful for staggered fields on
    /// bipartite (even-length) lattices.
    pub fn sublattice_sign(&self, site: usize) -> i8 {
        let (x, y) = self.coords(site);
        if (x + y) % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// True when periodic wrapping preserves the two-sublattice structure.
    pub fn is_bipartite(&self) -> bool {
        self.lx % 2 == 0 && (self.ly == 1 || self.ly % 2 == 0)
    }

    /// Site displaced by a canonical separation under periodic wrap.
    pub fn translate(&self, site: usize, sep: SeparationVector) -> usize {
        let (x, y) = self.coords(site);
        self.site((x + sep.dx) % self.lx, (y + sep.dy) % self.ly)
    }

    /// All N ordered pairs (i, i+sep).
    pub fn site_pairs_at_separation(&self, sep: SeparationVector) -> Vec<(usize, usize)> {
        (0..self.num_sites())
            .map(|i| (i, self.translate(i, sep)))
            .collect()
    }

    /// Degree of a site in the bond list.
    pub fn degree(&self, site: usize) -> usize {
        self.bonds
            .iter()
            .filter(|&&(a, b)| a as usize == site || b as usize == site)
            .count()
    }
}

/// Build a periodic lattice. `Ly = 1` gives a ring of `Lx >= 3` sites.
pub fn build_lattice(lx: usize, ly: usize, periodic: bool) -> Result<LatticeGeometry, LatticeError> {
    if lx == 0 || ly == 0 {
        return Err(LatticeError::ZeroDimension(lx, ly));
    }
    if !periodic {
        return Err(LatticeError::OpenBoundaries);
    }
    if ly == 1 {
        if lx < 3 {
            if lx == 2 {
                return Err(LatticeError::TwoSiteRing);
            }
            return Err(LatticeError::BadShape);
        }
    } else if lx < 2 || ly < 2 {
        return Err(LatticeError::BadShape);
    }

    let mut bonds = Vec::new();
    for y in 0..ly {
        for x in 0..lx {
            let i = (x + lx * y) as u32;
            let right = ((x + 1) % lx + lx * y) as u32;
            bonds.push((i, right));
            if ly > 1 {
                let up = (x + lx * ((y + 1) % ly)) as u32;
                bonds.push((i, up));
            }
        }
    }
    Ok(LatticeGeometry { lx, ly, bonds })
}

/// Requested separation classes with a fast site-offset lookup, used by
/// measurement passes to bin pair contributions by translation class.
#[derive(Debug, Clone)]
pub struct SepClasses {
    pub seps: Vec<SeparationVector>,
    lx: usize,
    ly: usize,
    /// offset dx + lx*dy -> class index + 1 (0 = untracked)
    index_of_offset: Vec<u16>,
}

impl SepClasses {
    pub fn new(geom: &LatticeGeometry, seps: &[SeparationVector]) -> Self {
        let (lx, ly) = (geom.lx(), geom.ly());
        let mut index_of_offset = vec![0u16; lx * ly];
        for (k, s) in seps.iter().enumerate() {
            index_of_offset[s.dx + lx * s.dy] = (k + 1) as u16;
        }
        Self {
            seps: seps.to_vec(),
            lx,
            ly,
            index_of_offset,
        }
    }

    pub fn len(&self) -> usize {
        self.seps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seps.is_empty()
    }

    /// Class index of the ordered displacement from site i to site j.
    #[inline]
    pub fn class_of_pair(&self, i: usize, j: usize) -> Option<usize> {
        let (xi, yi) = (i % self.lx, i / self.lx);
        let (xj, yj) = (j % self.lx, j / self.lx);
        let dx = (xj + self.lx - xi) % self.lx;
        let dy = (yj + self.ly - yi) % self.ly;
        match self.index_of_offset[dx + self.lx * dy] {
            0 => None,
            k => Some(k as usize - 1),
        }
    }
}

/// Special-case two-site pair "geometry" used by oracle tests: a single
/// bond between two sites, no periodic double counting.
pub fn two_site_pair() -> LatticeGeometry {
    LatticeGeometry {
        lx: 2,
        ly: 1,
        bonds: vec![(0, 1)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn square_4x4() {
        let g = build_lattice(4, 4, true).unwrap();
        assert_eq!(g.num_sites(), 16);
        assert_eq!(g.bonds().len(), 32);
        for s in 0..16 {
            assert_eq!(g.degree(s), 4);
        }
    }

    #[test]
    fn ring_of_8() {
        let g = build_lattice(8, 1, true).unwrap();
        assert_eq!(g.num_sites(), 8);
        assert_eq!(g.bonds().len(), 8);
        for s in 0..8 {
            assert_eq!(g.degree(s), 2);
        }
    }

    #[test]
    fn paper_scale_32x32() {
        let g = build_lattice(32, 32, true).unwrap();
        assert_eq!(g.num_sites(), 1024);
        assert_eq!(g.bonds().len(), 2048);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert_eq!(
            build_lattice(0, 4, true).unwrap_err(),
            LatticeError::ZeroDimension(0, 4)
        );
        assert_eq!(build_lattice(4, 0, true).unwrap_err(), LatticeError::ZeroDimension(4, 0));
        assert_eq!(build_lattice(2, 1, true).unwrap_err(), LatticeError::TwoSiteRing);
        assert_eq!(build_lattice(4, 4, false).unwrap_err(), LatticeError::OpenBoundaries);
        assert_eq!(build_lattice(1, 4, true).unwrap_err(), LatticeError::BadShape);
    }

    #[test]
    fn pairs_at_unit_separation_are_bonds() {
        let g = build_lattice(4, 4, true).unwrap();
        let sep = SeparationVector::canonical(1, 0, 4, 4).unwrap();
        let pairs = g.site_pairs_at_separation(sep);
        assert_eq!(pairs.len(), 16);
        for (i, j) in pairs {
            let hit = g
                .bonds()
                .iter()
                .any(|&(a, b)| (a as usize, b as usize) == (i, j) || (a as usize, b as usize) == (j, i));
            assert!(hit, "pair ({i},{j}) should be a bond");
        }
    }

    #[test]
    fn periodic_aliasing() {
        let a = SeparationVector::canonical(2, 2, 4, 4).unwrap();
        let b = SeparationVector::canonical(-2, -2, 4, 4).unwrap();
        assert_eq!(a, b);
        let g = build_lattice(4, 4, true).unwrap();
        assert_eq!(g.site_pairs_at_separation(a).len(), 16);
    }

    #[test]
    fn ring_pairs() {
        let g = build_lattice(8, 1, true).unwrap();
        let sep = SeparationVector::canonical(3, 0, 8, 1).unwrap();
        assert_eq!(g.site_pairs_at_separation(sep).len(), 8);
    }

    #[test]
    fn zero_separation_rejected() {
        assert_eq!(
            SeparationVector::canonical(0, 0, 4, 4).unwrap_err(),
            LatticeError::ZeroSeparation
        );
        assert_eq!(
            SeparationVector::canonical(4, 8, 4, 4).unwrap_err(),
            LatticeError::ZeroSeparation
        );
    }

    #[test]
    fn translation_closure() {
        // The multiset of pairs at fixed separation is invariant under
        // relabeling all sites by a lattice translation.
        let g = build_lattice(4, 4, true).unwrap();
        let sep = SeparationVector::canonical(2, 1, 4, 4).unwrap();
        let base = g.site_pairs_at_separation(sep);
        for shift in [(1, 0), (0, 1), (3, 2)] {
            let t = SeparationVector::canonical(shift.0, shift.1, 4, 4).unwrap();
            let mut mapped: HashMap<(usize, usize), usize> = HashMap::new();
            for &(i, j) in &base {
                *mapped
                    .entry((g.translate(i, t), g.translate(j, t)))
                    .or_insert(0) += 1;
            }
            let mut orig: HashMap<(usize, usize), usize> = HashMap::new();
            for &(i, j) in &base {
                *orig.entry((i, j)).or_insert(0) += 1;
            }
            assert_eq!(mapped, orig);
        }
    }
}
