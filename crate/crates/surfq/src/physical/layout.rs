//! Rotated-surface-code lattice geometry on a global site grid.
//!
//! Each schedule cell owns a (2d+2) × (2d+2) block of sites. Data qubits sit
//! on odd-odd sites, stabilizer ancillas on even-even sites, and the single
//! row/column of odd sites between adjacent cells hosts the merge seam. The
//! cell pitch keeps the global checkerboard coloring consistent across
//! cells for odd d, so merged regions inherit well-defined stabilizer types.
//!
//! Orientation convention: the logical X string is the top data row
//! (terminating on the left/right boundaries, which carry the weight-2
//! X-type checks); the logical Z string is the left data column.

use super::StabType;
use crate::surface::Cell;
use std::collections::HashSet;

pub type Site = (u32, u32);

#[derive(Debug, Clone, Copy)]
pub struct Layout {
    pub d: u32,
}

impl Layout {
    pub fn new(d: u32) -> Self {
        Layout { d }
    }

    pub fn pitch(&self) -> u32 {
        2 * self.d + 2
    }

    fn origin(&self, cell: Cell) -> Site {
        (cell.row * self.pitch(), cell.col * self.pitch())
    }

    /// All data sites of a full patch at `cell`, row-major.
    pub fn patch_data(&self, cell: Cell) -> Vec<Site> {
        let (r0, c0) = self.origin(cell);
        let mut out = Vec::with_capacity((self.d * self.d) as usize);
        for i in 0..self.d {
            for j in 0..self.d {
                out.push((r0 + 2 * i + 1, c0 + 2 * j + 1));
            }
        }
        out
    }

    /// The 2×2 seed sub-patch at the top-left corner used by hook injection:
    /// (injected corner, |+⟩ companion, |0⟩ row companion, |0⟩ diagonal).
    pub fn seed_data(&self, cell: Cell) -> [Site; 4] {
        let (r0, c0) = self.origin(cell);
        [
            (r0 + 1, c0 + 1),
            (r0 + 1, c0 + 3),
            (r0 + 3, c0 + 1),
            (r0 + 3, c0 + 3),
        ]
    }

    /// Data sites added when a seed patch grows to full distance, split into
    /// (X-basis inits, Z-basis inits).
    pub fn growth_data(&self, cell: Cell) -> (Vec<Site>, Vec<Site>) {
        let (r0, c0) = self.origin(cell);
        let mut plus = Vec::new();
        let mut zero = Vec::new();
        for i in 0..self.d {
            for j in 0..self.d {
                if i < 2 && j < 2 {
                    continue;
                }
                let s = (r0 + 2 * i + 1, c0 + 2 * j + 1);
                if j >= 2 {
                    plus.push(s);
                } else {
                    zero.push(s);
                }
            }
        }
        (plus, zero)
    }

    /// Seam data sites between two adjacent cells.
    pub fn seam_data(&self, a: Cell, b: Cell) -> Vec<Site> {
        assert!(a.is_adjacent(&b), "seam requires adjacent cells");
        let (first, second) = if (a.row, a.col) <= (b.row, b.col) {
            (a, b)
        } else {
            (b, a)
        };
        let (r0, c0) = self.origin(first);
        let mut out = Vec::with_capacity(self.d as usize);
        if first.row == second.row {
            // vertical seam column between horizontal neighbors
            let c = c0 + 2 * self.d + 1;
            for i in 0..self.d {
                out.push((r0 + 2 * i + 1, c));
            }
        } else {
            let r = r0 + 2 * self.d + 1;
            for j in 0..self.d {
                out.push((r, c0 + 2 * j + 1));
            }
        }
        out
    }

    /// Checkerboard stabilizer type of an even-even site.
    pub fn site_type(&self, s: Site) -> StabType {
        debug_assert!(s.0 % 2 == 0 && s.1 % 2 == 0);
        if (s.0 / 2 + s.1 / 2) % 2 == 0 {
            StabType::X
        } else {
            StabType::Z
        }
    }

    /// Logical X representative: top data row of the patch.
    pub fn x_string(&self, cell: Cell) -> Vec<Site> {
        let (r0, c0) = self.origin(cell);
        (0..self.d).map(|j| (r0 + 1, c0 + 2 * j + 1)).collect()
    }

    /// Logical Z representative: left data column of the patch.
    pub fn z_string(&self, cell: Cell) -> Vec<Site> {
        let (r0, c0) = self.origin(cell);
        (0..self.d).map(|i| (r0 + 2 * i + 1, c0 + 1)).collect()
    }

    /// Logical X representative of the seed sub-patch (top seed row).
    pub fn seed_x_string(&self, cell: Cell) -> Vec<Site> {
        let s = self.seed_data(cell);
        vec![s[0], s[1]]
    }

    /// Logical Z representative of the seed sub-patch (left seed column).
    pub fn seed_z_string(&self, cell: Cell) -> Vec<Site> {
        let s = self.seed_data(cell);
        vec![s[0], s[2]]
    }
}

/// A stabilizer to measure this round: ancilla site, type, and the data
/// sites it checks in CX-layer order (None = idle slot that layer).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabSite {
    pub site: Site,
    pub stype: StabType,
    pub data: [Option<Site>; 4],
}

/// Derive the active stabilizer set for a region given its active data
/// sites. Bulk sites (4 data neighbors) always activate; 2-neighbor sites
/// activate when the pair orientation matches the site type (horizontal
/// boundaries carry Z checks, vertical boundaries carry X checks); inner
/// corners (3 neighbors) are rejected — region shapes must avoid them.
pub fn derive_stabilizers(_layout: &Layout, data: &HashSet<Site>) -> Vec<StabSite> {
    let mut candidates: HashSet<Site> = HashSet::new();
    for &(r, c) in data {
        for (dr, dc) in [(-1i64, -1i64), (-1, 1), (1, -1), (1, 1)] {
            let rr = r as i64 + dr;
            let cc = c as i64 + dc;
            if rr >= 0 && cc >= 0 {
                candidates.insert((rr as u32, cc as u32));
            }
        }
    }
    let mut sites: Vec<Site> = candidates.into_iter().collect();
    sites.sort_unstable();

    let mut out = Vec::new();
    for s in sites {
        let (r, c) = s;
        let nw = neighbor(s, -1, -1, data);
        let ne = neighbor(s, -1, 1, data);
        let sw = neighbor(s, 1, -1, data);
        let se = neighbor(s, 1, 1, data);
        let present = [nw, ne, sw, se];
        let count = present.iter().flatten().count();
        let stype = if (r / 2 + c / 2) % 2 == 0 {
            StabType::X
        } else {
            StabType::Z
        };
        let active = match count {
            4 => true,
            2 => {
                let horizontal_pair = (nw.is_some() && ne.is_some()) || (sw.is_some() && se.is_some());
                let vertical_pair = (nw.is_some() && sw.is_some()) || (ne.is_some() && se.is_some());
                (horizontal_pair && stype == StabType::Z)
                    || (vertical_pair && stype == StabType::X)
            }
            3 => panic!(
                "inner corner at site ({r},{c}): region shapes with 270° corners are unsupported"
            ),
            _ => false,
        };
        if !active {
            continue;
        }
        // CX-layer order: Z ancillas sweep the north pair west-to-east then
        // the south pair; X ancillas sweep the west pair north-to-south then
        // the east pair. The two orders are orthogonal, which keeps hook
        // errors aligned with the matching logical and preserves distance.
        let data_order = match stype {
            StabType::Z => [nw, ne, sw, se],
            StabType::X => [nw, sw, ne, se],
        };
        out.push(StabSite {
            site: s,
            stype,
            data: data_order,
        });
    }
    out
}

fn neighbor(s: Site, dr: i64, dc: i64, data: &HashSet<Site>) -> Option<Site> {
    let rr = s.0 as i64 + dr;
    let cc = s.1 as i64 + dc;
    if rr < 0 || cc < 0 {
        return None;
    }
    let t = (rr as u32, cc as u32);
    if data.contains(&t) {
        Some(t)
    } else {
        None
    }
}
