//! Symbolic stabilizer tableau with measurement-outcome ancestry.
//!
//! This is an Aaronson-Gottesman tableau (stabilizers + destabilizers) where
//! every stabilizer row carries the set of measurement indices whose XOR
//! fixes its sign on the current trajectory. Measuring an operator either
//! returns `Random` (a fresh outcome symbol — the measurement index itself)
//! or `Deterministic` with the exact parity relation the outcome must
//! satisfy. Deterministic relations become detectors; tracked logical
//! operators resolve to observable definitions when their support dies.
//!
//! Row encoding: `i^phase · prod_q X^x_q Z^z_q` (see [`crate::pauli`]).

use crate::pauli::{AncestrySet, Pauli, PauliRow, SparsePauli};
use std::collections::HashMap;

/// Initial single-qubit state for a fresh tableau column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QubitInit {
    /// |0⟩: stabilized by +Z.
    Zero,
    /// |+⟩: stabilized by +X.
    Plus,
    /// √X|0⟩ ∝ |0⟩ − i|1⟩: stabilized by −Y.
    YMinus,
    /// S H |0⟩ = |0⟩ + i|1⟩: stabilized by +Y.
    YPlus,
}

/// Result of pushing a measurement through the tableau.
#[derive(Debug, Clone)]
pub enum MeasOutcome {
    /// Outcome is intrinsically random; the measurement index is the fresh
    /// outcome symbol.
    Random,
    /// Outcome is determined: `outcome = constant ⊕ XOR_{m∈set} outcome(m)`.
    Deterministic { set: AncestrySet, constant: u8 },
}

/// Handle to a tracked operator row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrackId(usize);

#[derive(Debug, Clone, Default)]
pub struct SymTableau {
    cols: usize,
    words: usize,
    col_gid: Vec<u64>,
    gid_col: HashMap<u64, usize>,
    stabs: Vec<PauliRow>,
    destabs: Vec<PauliRow>,
    tracked: Vec<Option<PauliRow>>,
}

impl SymTableau {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_qubits(&self) -> usize {
        self.cols
    }

    pub fn has_qubit(&self, gid: u64) -> bool {
        self.gid_col.contains_key(&gid)
    }

    fn col(&self, gid: u64) -> usize {
        *self
            .gid_col
            .get(&gid)
            .unwrap_or_else(|| panic!("qubit {gid} not present in tableau"))
    }

    fn ensure_words(&mut self, words: usize) {
        if words <= self.words {
            return;
        }
        for r in self
            .stabs
            .iter_mut()
            .chain(self.destabs.iter_mut())
            .chain(self.tracked.iter_mut().flatten())
        {
            r.resize(words);
        }
        self.words = words;
    }

    pub fn add_qubit(&mut self, gid: u64, init: QubitInit) {
        assert!(
            !self.gid_col.contains_key(&gid),
            "qubit {gid} already in tableau"
        );
        let c = self.cols;
        self.cols += 1;
        let need = (self.cols + 63) >> 6;
        self.ensure_words(need.max(1));
        self.col_gid.push(gid);
        self.gid_col.insert(gid, c);
        let mut stab = PauliRow::identity(self.words);
        let mut destab = PauliRow::identity(self.words);
        match init {
            QubitInit::Zero => {
                stab.set_pauli(c, Pauli::Z);
                destab.set_pauli(c, Pauli::X);
            }
            QubitInit::Plus => {
                stab.set_pauli(c, Pauli::X);
                destab.set_pauli(c, Pauli::Z);
            }
            QubitInit::YMinus => {
                stab.set_pauli(c, Pauli::Y);
                stab.phase = (stab.phase + 2) & 3;
                destab.set_pauli(c, Pauli::X);
            }
            QubitInit::YPlus => {
                stab.set_pauli(c, Pauli::Y);
                destab.set_pauli(c, Pauli::X);
            }
        }
        self.stabs.push(stab);
        self.destabs.push(destab);
    }

    /// Absorb another tableau (disjoint qubit sets).
    pub fn merge(&mut self, other: SymTableau) {
        let offset = self.cols;
        self.cols += other.cols;
        let need = (self.cols + 63) >> 6;
        self.ensure_words(need.max(self.words));
        for (i, gid) in other.col_gid.iter().enumerate() {
            assert!(
                !self.gid_col.contains_key(gid),
                "merge with overlapping qubit {gid}"
            );
            self.col_gid.push(*gid);
            self.gid_col.insert(*gid, offset + i);
        }
        let remap = |row: &PauliRow, words: usize| -> PauliRow {
            let mut out = PauliRow::identity(words);
            out.phase = row.phase;
            out.ancestry = row.ancestry.clone();
            for c in row.support() {
                out.set_x(offset + c, row.x_bit(c));
                out.set_z(offset + c, row.z_bit(c));
            }
            out
        };
        for r in &other.stabs {
            self.stabs.push(remap(r, self.words));
        }
        for r in &other.destabs {
            self.destabs.push(remap(r, self.words));
        }
        for t in other.tracked.iter().flatten() {
            self.tracked.push(Some(remap(t, self.words)));
        }
        // note: merged TrackIds from `other` are not preserved; callers that
        // need cross-merge tracking use `track` on the merged tableau or
        // carry their own id remapping (see lowering driver).
    }

    /// Merge preserving the other tableau's track ids: returns the mapping
    /// old TrackId -> new TrackId in merge order.
    pub fn merge_with_tracks(&mut self, other: SymTableau) -> Vec<(TrackId, TrackId)> {
        let offset = self.cols;
        let track_base = self.tracked.len();
        let other_track_ids: Vec<Option<usize>> = other
            .tracked
            .iter()
            .enumerate()
            .map(|(i, t)| t.as_ref().map(|_| i))
            .collect();
        self.merge(other);
        let mut out = Vec::new();
        let mut next = track_base;
        for old in other_track_ids.into_iter().flatten() {
            out.push((TrackId(old), TrackId(next)));
            next += 1;
        }
        let _ = offset;
        out
    }

    pub fn row_from_sparse(&self, sp: &[(u64, Pauli)], negated: bool) -> PauliRow {
        let mut b = SparsePauli::new();
        for &(gid, p) in sp {
            b = b.with(self.col(gid), p);
        }
        if negated {
            b = b.negate();
        }
        b.to_row(self.words.max(1))
    }

    fn all_rows_mut(&mut self) -> impl Iterator<Item = &mut PauliRow> {
        self.stabs
            .iter_mut()
            .chain(self.destabs.iter_mut())
            .chain(self.tracked.iter_mut().flatten())
    }

    pub fn apply_h(&mut self, gid: u64) {
        let c = self.col(gid);
        for r in self.all_rows_mut() {
            let xb = r.x_bit(c);
            let zb = r.z_bit(c);
            if xb && zb {
                r.phase = (r.phase + 2) & 3;
            }
            r.set_x(c, zb);
            r.set_z(c, xb);
        }
    }

    pub fn apply_s(&mut self, gid: u64) {
        let c = self.col(gid);
        for r in self.all_rows_mut() {
            if r.x_bit(c) {
                r.set_z(c, !r.z_bit(c));
                r.phase = (r.phase + 1) & 3;
            }
        }
    }

    pub fn apply_sdg(&mut self, gid: u64) {
        let c = self.col(gid);
        for r in self.all_rows_mut() {
            if r.x_bit(c) {
                r.set_z(c, !r.z_bit(c));
                r.phase = (r.phase + 3) & 3;
            }
        }
    }

    pub fn apply_sqrt_x(&mut self, gid: u64) {
        let c = self.col(gid);
        for r in self.all_rows_mut() {
            if r.z_bit(c) {
                r.set_x(c, !r.x_bit(c));
                r.phase = (r.phase + 3) & 3;
            }
        }
    }

    pub fn apply_x(&mut self, gid: u64) {
        let c = self.col(gid);
        for r in self.all_rows_mut() {
            if r.z_bit(c) {
                r.phase = (r.phase + 2) & 3;
            }
        }
    }

    pub fn apply_z(&mut self, gid: u64) {
        let c = self.col(gid);
        for r in self.all_rows_mut() {
            if r.x_bit(c) {
                r.phase = (r.phase + 2) & 3;
            }
        }
    }

    pub fn apply_cx(&mut self, gc: u64, gt: u64) {
        let cc = self.col(gc);
        let ct = self.col(gt);
        for r in self.all_rows_mut() {
            if r.x_bit(cc) {
                r.set_x(ct, !r.x_bit(ct));
            }
            if r.z_bit(ct) {
                r.set_z(cc, !r.z_bit(cc));
            }
        }
    }

    /// Measure the Hermitian operator given by `target`, assigning outcome
    /// symbol `meas_idx`. Leaves an explicit stabilizer row equal to the
    /// target with ancestry `{meas_idx}`.
    pub fn measure_row(&mut self, target: &PauliRow, meas_idx: u32) -> MeasOutcome {
        debug_assert!(!target.is_identity(), "measuring identity operator");
        // Random case: some stabilizer anticommutes.
        if let Some(pivot) = (0..self.stabs.len()).find(|&i| self.stabs[i].anticommutes(target)) {
            let old_pivot = self.stabs[pivot].clone();
            for i in 0..self.stabs.len() {
                if i != pivot && self.stabs[i].anticommutes(target) {
                    self.stabs[i].mul_assign(&old_pivot);
                }
            }
            for d in self.destabs.iter_mut() {
                if d.anticommutes(target) {
                    d.mul_assign(&old_pivot);
                }
            }
            for t in self.tracked.iter_mut().flatten() {
                if t.anticommutes(target) {
                    t.mul_assign(&old_pivot);
                }
            }
            self.destabs[pivot] = old_pivot;
            let mut new_row = target.clone();
            new_row.ancestry = AncestrySet::singleton(meas_idx);
            self.stabs[pivot] = new_row;
            MeasOutcome::Random
        } else {
            let (set, constant, i1) = self.resolve_in_group(target);
            // Basis change so future relations anchor on this measurement.
            let mut new_row = target.clone();
            new_row.ancestry = AncestrySet::singleton(meas_idx);
            let members = self.group_members(target);
            for &j in &members {
                if j != i1 {
                    let di1 = self.destabs[i1].clone();
                    self.destabs[j].mul_assign(&di1);
                }
            }
            self.stabs[i1] = new_row;
            MeasOutcome::Deterministic { set, constant }
        }
    }

    /// Deterministic-only query: no state change, no measurement emitted.
    /// Returns None if the operator value is not determined.
    pub fn peek_row(&self, target: &PauliRow) -> Option<(AncestrySet, u8)> {
        if self.stabs.iter().any(|s| s.anticommutes(target)) {
            return None;
        }
        let (set, constant, _) = self.resolve_in_group(target);
        Some((set, constant))
    }

    fn group_members(&self, target: &PauliRow) -> Vec<usize> {
        (0..self.destabs.len())
            .filter(|&i| self.destabs[i].anticommutes(target))
            .collect()
    }

    /// For a target commuting with the whole group, find the combination of
    /// stabilizer rows equal to it and return (ancestry, const, first row).
    fn resolve_in_group(&self, target: &PauliRow) -> (AncestrySet, u8, usize) {
        let members = self.group_members(target);
        assert!(
            !members.is_empty(),
            "operator commutes with group but has no destabilizer witnesses"
        );
        let mut scratch = PauliRow::identity(self.words);
        for &i in &members {
            scratch.mul_assign(&self.stabs[i]);
        }
        assert_eq!(
            scratch.x, target.x,
            "group resolution mismatch (x): geometry or circuit bug"
        );
        assert_eq!(
            scratch.z, target.z,
            "group resolution mismatch (z): geometry or circuit bug"
        );
        let dp = (target.phase.wrapping_sub(scratch.phase)) & 3;
        assert!(dp == 0 || dp == 2, "non-Hermitian phase mismatch");
        let constant = dp >> 1;
        (scratch.ancestry, constant, members[0])
    }

    /// Project qubit to |0⟩ regardless of prior (classical) state. The qubit
    /// must hold a determined Z value (fresh, or just measured in Z).
    pub fn reset(&mut self, gid: u64) {
        let c = self.col(gid);
        let zq = SparsePauli::new().with(c, Pauli::Z).to_row(self.words);
        assert!(
            !self.stabs.iter().any(|s| s.anticommutes(&zq)),
            "reset of qubit {gid} in indeterminate Z state"
        );
        let (set, constant, i1) = self.resolve_in_group(&zq);
        let members = self.group_members(&zq);
        for &j in &members {
            if j != i1 {
                let di1 = self.destabs[i1].clone();
                self.destabs[j].mul_assign(&di1);
            }
        }
        // Honest basis change first: other rows must absorb the qubit's true
        // outcome ancestry before the column is forced to a fresh |0⟩.
        let mut honest = zq.clone();
        honest.ancestry = set;
        honest.phase = (zq.phase.wrapping_sub(2 * constant)) & 3;
        self.stabs[i1] = honest;
        self.clear_column_support(c, i1);
        // Fresh |0⟩, no ancestry.
        self.stabs[i1] = zq;
        let mut d = PauliRow::identity(self.words);
        d.set_pauli(c, Pauli::X);
        self.destabs[i1] = d;
    }

    /// Clear q-support from every row other than `keep` (which must be a
    /// single-qubit row on column c), multiplying `keep` in as needed.
    fn clear_column_support(&mut self, c: usize, keep: usize) {
        let keeper = self.stabs[keep].clone();
        for i in 0..self.stabs.len() {
            if i == keep {
                continue;
            }
            if self.stabs[i].x_bit(c) || self.stabs[i].z_bit(c) {
                self.stabs[i].mul_assign(&keeper);
                debug_assert!(!self.stabs[i].x_bit(c) && !self.stabs[i].z_bit(c));
            }
        }
        for i in 0..self.destabs.len() {
            if i == keep {
                continue;
            }
            if self.destabs[i].x_bit(c) || self.destabs[i].z_bit(c) {
                self.destabs[i].mul_assign(&keeper);
                // destabs may legitimately retain the anticommuting partner;
                // only the keeper's own destab should, and it is excluded.
                debug_assert!(
                    !self.destabs[i].x_bit(c) && !self.destabs[i].z_bit(c),
                    "destabilizer retains support on dying column"
                );
            }
        }
        for t in self.tracked.iter_mut().flatten() {
            if t.x_bit(c) || t.z_bit(c) {
                t.mul_assign(&keeper);
                debug_assert!(!t.x_bit(c) && !t.z_bit(c));
            }
        }
    }

    /// Word width of rows in this tableau (for building operator rows).
    pub fn row_words(&self) -> usize {
        self.words.max(1)
    }

    /// Remove a qubit that is in a definite single-qubit Pauli eigenstate
    /// (post-measurement or never entangled). Panics if entangled — that is
    /// always a lowering bug.
    pub fn remove_disentangled(&mut self, gid: u64) {
        let c = self.col(gid);
        for p in [Pauli::Z, Pauli::X, Pauli::Y] {
            let target = SparsePauli::new().with(c, p).to_row(self.words.max(1));
            if self.stabs.iter().any(|s| s.anticommutes(&target)) {
                continue;
            }
            let (set, constant, i1) = self.resolve_in_group(&target);
            let members = self.group_members(&target);
            for &j in &members {
                if j != i1 {
                    let di1 = self.destabs[i1].clone();
                    self.destabs[j].mul_assign(&di1);
                }
            }
            let mut row = target.clone();
            row.ancestry = set;
            row.phase = (target.phase.wrapping_sub(2 * constant)) & 3;
            self.stabs[i1] = row;
            self.clear_column_support(c, i1);
            self.drop_row_and_column(i1, c);
            return;
        }
        panic!("remove_disentangled: qubit {gid} is entangled");
    }

    /// Destructively measure qubit `gid` in `basis` and remove it.
    pub fn measure_and_remove(&mut self, gid: u64, basis: Pauli, meas_idx: u32) -> MeasOutcome {
        let c = self.col(gid);
        let target = SparsePauli::new().with(c, basis).to_row(self.words);
        let out = self.measure_row(&target, meas_idx);
        // measure_row left an explicit row = target somewhere; find it.
        let row = (0..self.stabs.len())
            .find(|&i| {
                self.stabs[i].x == target.x
                    && self.stabs[i].z == target.z
            })
            .expect("explicit row missing after measurement");
        self.clear_column_support(c, row);
        self.drop_row_and_column(row, c);
        out
    }

    fn drop_row_and_column(&mut self, row: usize, c: usize) {
        self.stabs.swap_remove(row);
        self.destabs.swap_remove(row);
        let dead_gid = self.col_gid[c];
        self.gid_col.remove(&dead_gid);
        let last = self.cols - 1;
        if c != last {
            for r in self.all_rows_mut() {
                let xv = r.x_bit(last);
                let zv = r.z_bit(last);
                r.set_x(last, false);
                r.set_z(last, false);
                r.set_x(c, xv);
                r.set_z(c, zv);
            }
            let moved_gid = self.col_gid[last];
            self.col_gid[c] = moved_gid;
            self.gid_col.insert(moved_gid, c);
        }
        self.col_gid.pop();
        self.cols -= 1;
    }

    /// Track an operator; it is rewritten under measurements so that it
    /// always commutes with the stabilizer group.
    pub fn track(&mut self, row: PauliRow) -> TrackId {
        self.tracked.push(Some(row));
        TrackId(self.tracked.len() - 1)
    }

    pub fn tracked_row(&self, id: TrackId) -> &PauliRow {
        self.tracked[id.0].as_ref().expect("tracked row taken")
    }

    /// Resolve a tracked operator that has decayed to identity: returns
    /// (measurement set, constant) with `value = constant ⊕ XOR(set)`.
    pub fn resolve_tracked(&mut self, id: TrackId) -> (AncestrySet, u8) {
        let row = self.tracked[id.0].take().expect("tracked row already taken");
        assert!(
            row.is_identity(),
            "tracked operator still has live support: {:?}",
            row.support()
        );
        assert!(row.phase == 0 || row.phase == 2, "non-real tracked resolution");
        (row.ancestry, row.phase >> 1)
    }

    /// Test support: the member rows a peek would combine for `target`.
    pub fn dump_peek_members(&self, target: &PauliRow) -> Vec<usize> {
        self.group_members(target)
    }

    /// Test support: expose stabilizer rows as (sparse terms, ancestry,
    /// sign bit) for honesty audits against a concrete simulation.
    pub fn dump_rows(&self) -> Vec<(Vec<(u64, crate::pauli::Pauli)>, Vec<u32>, u8)> {
        use crate::pauli::Pauli;
        self.stabs
            .iter()
            .map(|r| {
                let mut terms = Vec::new();
                for c in r.support() {
                    let p = match (r.x_bit(c), r.z_bit(c)) {
                        (true, false) => Pauli::X,
                        (false, true) => Pauli::Z,
                        (true, true) => Pauli::Y,
                        _ => unreachable!(),
                    };
                    terms.push((self.col_gid[c], p));
                }
                (terms, r.ancestry.iter().collect(), r.sign_bit())
            })
            .collect()
    }

    /// Multiply a stabilizer-group element (resolved from `target`) into the
    /// tracked row, used to steer representatives off dying qubits early.
    pub fn rewrite_tracked_with(&mut self, id: TrackId, target: &PauliRow) {
        let mut row = self.tracked[id.0].take().expect("tracked row taken");
        row.mul_assign(target);
        self.tracked[id.0] = Some(row);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z_of(t: &SymTableau, gid: u64) -> PauliRow {
        t.row_from_sparse(&[(gid, Pauli::Z)], false)
    }
    fn x_of(t: &SymTableau, gid: u64) -> PauliRow {
        t.row_from_sparse(&[(gid, Pauli::X)], false)
    }

    #[test]
    fn fresh_zero_measures_deterministically() {
        let mut t = SymTableau::new();
        t.add_qubit(7, QubitInit::Zero);
        let z = z_of(&t, 7);
        match t.measure_row(&z, 0) {
            MeasOutcome::Deterministic { set, constant } => {
                assert!(set.is_empty());
                assert_eq!(constant, 0);
            }
            _ => panic!("expected deterministic"),
        }
        // measuring -Z gives constant 1
        let mz = t.row_from_sparse(&[(7, Pauli::Z)], true);
        match t.measure_row(&mz, 1) {
            MeasOutcome::Deterministic { constant, .. } => assert_eq!(constant, 1),
            _ => panic!(),
        }
    }

    #[test]
    fn random_then_anchored() {
        let mut t = SymTableau::new();
        t.add_qubit(0, QubitInit::Zero);
        let x = x_of(&t, 0);
        assert!(matches!(t.measure_row(&x, 5), MeasOutcome::Random));
        match t.measure_row(&x, 6) {
            MeasOutcome::Deterministic { set, constant } => {
                assert_eq!(set.as_slice(), &[5]);
                assert_eq!(constant, 0);
            }
            _ => panic!("expected deterministic"),
        }
        // third measurement anchors on the second, not the first
        match t.measure_row(&x, 7) {
            MeasOutcome::Deterministic { set, .. } => {
                assert_eq!(set.as_slice(), &[6]);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn bell_pair_relations() {
        let mut t = SymTableau::new();
        t.add_qubit(0, QubitInit::Zero);
        t.add_qubit(1, QubitInit::Zero);
        t.apply_h(0);
        t.apply_cx(0, 1);
        let zz = t.row_from_sparse(&[(0, Pauli::Z), (1, Pauli::Z)], false);
        let xx = t.row_from_sparse(&[(0, Pauli::X), (1, Pauli::X)], false);
        match t.measure_row(&zz, 0) {
            MeasOutcome::Deterministic { set, constant } => {
                assert!(set.is_empty());
                assert_eq!(constant, 0);
            }
            _ => panic!("ZZ must be deterministic on Bell state"),
        }
        match t.measure_row(&xx, 1) {
            MeasOutcome::Deterministic { set, constant } => {
                assert!(set.is_empty());
                assert_eq!(constant, 0);
            }
            _ => panic!("XX must be deterministic on Bell state"),
        }
        let za = z_of(&t, 0);
        assert!(matches!(t.measure_row(&za, 2), MeasOutcome::Random));
        let zb = z_of(&t, 1);
        match t.measure_row(&zb, 3) {
            MeasOutcome::Deterministic { set, constant } => {
                // Z_b = Z_aZ_b · Z_a: anchored on the ZZ re-anchor (0) and Z_a (2)
                assert_eq!(constant, 0);
                let s: Vec<u32> = set.iter().collect();
                assert_eq!(s, vec![0, 2]);
            }
            _ => panic!("Z_b determined given ZZ and Z_a"),
        }
    }

    #[test]
    fn s_gate_teleportation_algebra() {
        // q in |+⟩; two S-teleportation gadgets (ancilla |S⟩ = +Y, measure
        // Z_qZ_m then X_m) compose to Z up to Pauli frame, so the final X
        // measurement must be deterministic with constant 1 (Z|+⟩ = |−⟩)
        // and a frame drawn from the gadget outcomes.
        let mut t = SymTableau::new();
        t.add_qubit(0, QubitInit::Plus);
        t.add_qubit(1, QubitInit::YPlus);
        let zz = t.row_from_sparse(&[(0, Pauli::Z), (1, Pauli::Z)], false);
        assert!(matches!(t.measure_row(&zz, 10), MeasOutcome::Random));
        let xm = x_of(&t, 1);
        assert!(matches!(t.measure_row(&xm, 11), MeasOutcome::Random));
        t.add_qubit(2, QubitInit::YPlus);
        let zz2 = t.row_from_sparse(&[(0, Pauli::Z), (2, Pauli::Z)], false);
        t.measure_row(&zz2, 12);
        let xm2 = x_of(&t, 2);
        t.measure_row(&xm2, 13);
        let xq2 = x_of(&t, 0);
        match t.measure_row(&xq2, 14) {
            MeasOutcome::Deterministic { set, constant } => {
                assert_eq!(constant, 1);
                assert!(!set.is_empty());
                for m in set.iter() {
                    assert!((10..=13).contains(&m));
                }
            }
            _ => panic!("X_q must be determined after two S gadgets on |+⟩"),
        }
    }

    #[test]
    fn sqrt_x_init_is_minus_y() {
        let mut t = SymTableau::new();
        t.add_qubit(0, QubitInit::Zero);
        t.apply_sqrt_x(0);
        let y = t.row_from_sparse(&[(0, Pauli::Y)], false);
        match t.measure_row(&y, 0) {
            MeasOutcome::Deterministic { constant, .. } => assert_eq!(constant, 1),
            _ => panic!("Y must be sharp on √X|0⟩"),
        }
    }

    #[test]
    fn h_conjugation_via_measurements() {
        // ZX-parity H-teleport: q = |0⟩, anc = |+⟩. Measure X_q Z_a, then
        // Z_q destructively. The teleported state on the ancilla is H|0⟩ =
        // |+⟩ up to frame, so X_a must be determined by the two outcomes.
        let mut t = SymTableau::new();
        t.add_qubit(0, QubitInit::Zero);
        t.add_qubit(1, QubitInit::Plus);
        let m = t.row_from_sparse(&[(0, Pauli::X), (1, Pauli::Z)], false);
        assert!(matches!(t.measure_row(&m, 0), MeasOutcome::Random));
        assert!(matches!(
            t.measure_and_remove(0, Pauli::Z, 1),
            MeasOutcome::Random
        ));
        let xa = x_of(&t, 1);
        match t.measure_row(&xa, 2) {
            MeasOutcome::Deterministic { set, constant } => {
                assert_eq!(constant, 0, "all-zero outcomes leave exactly |+⟩");
                assert!(!set.is_empty());
                for m in set.iter() {
                    assert!(m <= 1);
                }
            }
            _ => panic!("X_a must be determined after the H teleport of |0⟩"),
        }
    }

    #[test]
    fn reset_and_remove() {
        let mut t = SymTableau::new();
        t.add_qubit(0, QubitInit::Zero);
        t.add_qubit(1, QubitInit::Zero);
        t.apply_h(0);
        t.apply_cx(0, 1);
        // destructively measure qubit 0 in Z
        let out = t.measure_and_remove(0, Pauli::Z, 0);
        assert!(matches!(out, MeasOutcome::Random));
        assert_eq!(t.num_qubits(), 1);
        // remaining qubit's Z is now determined by the removed measurement
        let zb = z_of(&t, 1);
        match t.measure_row(&zb, 1) {
            MeasOutcome::Deterministic { set, .. } => assert_eq!(set.as_slice(), &[0]),
            _ => panic!(),
        }
        // reset it and verify fresh determinism
        t.reset(1);
        let zb2 = z_of(&t, 1);
        match t.measure_row(&zb2, 2) {
            MeasOutcome::Deterministic { set, constant } => {
                assert!(set.is_empty());
                assert_eq!(constant, 0);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn merge_keeps_relations() {
        let mut a = SymTableau::new();
        a.add_qubit(0, QubitInit::Plus);
        let mut b = SymTableau::new();
        b.add_qubit(1, QubitInit::Zero);
        a.merge(b);
        assert_eq!(a.num_qubits(), 2);
        let zz = a.row_from_sparse(&[(0, Pauli::Z), (1, Pauli::Z)], false);
        assert!(matches!(a.measure_row(&zz, 0), MeasOutcome::Random));
        let xx = a.row_from_sparse(&[(0, Pauli::X), (1, Pauli::X)], false);
        assert!(matches!(a.measure_row(&xx, 1), MeasOutcome::Random));
        // Now Bell-like: ZZ determined by first outcome
        let zz2 = a.row_from_sparse(&[(0, Pauli::Z), (1, Pauli::Z)], false);
        match a.measure_row(&zz2, 2) {
            MeasOutcome::Deterministic { set, .. } => assert_eq!(set.as_slice(), &[0]),
            _ => panic!(),
        }
    }
}
