//! Schedule → physical circuit lowering.
//!
//! Every emitted Clifford instruction is mirrored into a symbolic stabilizer
//! tableau per entangled component. Measurements flow through the tableau:
//! deterministic outcomes become detectors (with their exact parity
//! relation), random outcomes become fresh reference bits. Logical parity
//! products and observables are resolved against the same tableau, so
//! detector conventions, merge/split bookkeeping, Pauli frames, and
//! observable definitions all derive from one mechanism — and any geometry
//! or gate-order bug surfaces as a loud determinism failure at lowering
//! time rather than as silently wrong statistics.

use super::layout::{derive_stabilizers, Layout, Site, StabSite};
use super::{DetectorTag, Instr, MeasKind, NoiseModel, PhysicalCircuit, StabType};
use crate::error::{Result, SurfqError};
use crate::pauli::{Pauli, PauliRow};
use crate::surface::{validate, Cell, SurfaceCircuit, SurfaceOp, SurfaceOpKind};
use crate::tableau::{MeasOutcome, QubitInit, SymTableau};
use std::collections::{HashMap, HashSet};

#[derive(Debug, Clone)]
pub struct LowerOptions {
    pub distance: u32,
    pub noise: NoiseModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Extent {
    Seed,
    Full,
}

#[derive(Debug, Clone)]
struct Patch {
    extent: Extent,
    /// Set when the patch was seeded this timestamp (drives expansion tags).
    seeded_at: Option<u32>,
    seed_ancillas: Vec<Site>,
}

/// In-flight merge for the current timestamp.
#[derive(Debug, Clone)]
struct ActiveMerge {
    cells: Vec<Cell>,
    horizontal: bool,
    /// X-basis seams (ZZ merges) or Z-basis (XX merges).
    seam_plus: bool,
    seam_sites: Vec<Site>,
    corridor_cells: Vec<Cell>,
    /// Readout of the source patch at split time (teleports).
    consume_first_cell: bool,
}

struct Lowerer<'a> {
    s: &'a SurfaceCircuit,
    layout: Layout,
    d: u32,
    noise: NoiseModel,
    dropped: HashSet<(usize, usize)>,

    instrs: Vec<Instr>,
    meas_count: u32,
    det_count: u32,
    touched: HashSet<u32>,

    site_qubit: HashMap<Site, u32>,
    qubit_sites: Vec<Site>,

    comps: Vec<Option<SymTableau>>,
    comp_of_cell: HashMap<Cell, usize>,
    patches: HashMap<Cell, Patch>,
}

fn gid(q: u32) -> u64 {
    q as u64
}

impl<'a> Lowerer<'a> {
    fn new(s: &'a SurfaceCircuit, d: u32, noise: NoiseModel) -> Self {
        Lowerer {
            s,
            layout: Layout::new(d),
            d,
            noise,
            dropped: HashSet::new(),
            instrs: Vec::new(),
            meas_count: 0,
            det_count: 0,
            touched: HashSet::new(),
            site_qubit: HashMap::new(),
            qubit_sites: Vec::new(),
            comps: Vec::new(),
            comp_of_cell: HashMap::new(),
            patches: HashMap::new(),
        }
    }

    fn qubit(&mut self, s: Site) -> u32 {
        if let Some(&q) = self.site_qubit.get(&s) {
            return q;
        }
        let q = self.qubit_sites.len() as u32;
        self.site_qubit.insert(s, q);
        self.qubit_sites.push(s);
        q
    }

    fn cell_of_site(&self, s: Site) -> Cell {
        let p = self.layout.pitch();
        Cell::new(s.0 / p, s.1 / p)
    }

    fn comp_mut(&mut self, id: usize) -> &mut SymTableau {
        self.comps[id].as_mut().expect("dead component")
    }

    fn new_component(&mut self) -> usize {
        self.comps.push(Some(SymTableau::new()));
        self.comps.len() - 1
    }

    /// Merge the components hosting `cells` into one; return its id.
    fn unify(&mut self, cells: &[Cell]) -> usize {
        let mut ids: Vec<usize> = cells
            .iter()
            .filter_map(|c| self.comp_of_cell.get(c).copied())
            .collect();
        ids.sort_unstable();
        ids.dedup();
        assert!(!ids.is_empty(), "unify with no live components");
        let target = ids[0];
        for &other in &ids[1..] {
            let tab = self.comps[other].take().expect("dead component in unify");
            self.comps[target]
                .as_mut()
                .unwrap()
                .merge(tab);
            for (_, v) in self.comp_of_cell.iter_mut() {
                if *v == other {
                    *v = target;
                }
            }
        }
        target
    }

    // ---- instruction emission (tableau-mirrored) ----

    fn emit_reset(&mut self, comp: usize, s: Site) -> u32 {
        let q = self.qubit(s);
        self.instrs.push(Instr::Reset(q));
        self.touched.insert(q);
        let tab = self.comp_mut(comp);
        if tab.has_qubit(gid(q)) {
            tab.reset(gid(q));
        } else {
            tab.add_qubit(gid(q), QubitInit::Zero);
        }
        q
    }

    fn emit_h(&mut self, comp: usize, q: u32) {
        self.instrs.push(Instr::H(q));
        if self.noise.p1 > 0.0 {
            self.instrs.push(Instr::Depol1 {
                q,
                p: self.noise.p1,
            });
        }
        self.touched.insert(q);
        self.comp_mut(comp).apply_h(gid(q));
    }

    fn emit_sqrt_x(&mut self, comp: usize, q: u32) {
        self.instrs.push(Instr::SqrtX(q));
        if self.noise.p1 > 0.0 {
            self.instrs.push(Instr::Depol1 {
                q,
                p: self.noise.p1,
            });
        }
        self.touched.insert(q);
        self.comp_mut(comp).apply_sqrt_x(gid(q));
    }

    fn emit_cx(&mut self, comp: usize, a: u32, b: u32) {
        self.instrs.push(Instr::Cx(a, b));
        if self.noise.p2 > 0.0 {
            self.instrs.push(Instr::Depol2 {
                a,
                b,
                p: self.noise.p2,
            });
        }
        self.touched.insert(a);
        self.touched.insert(b);
        self.comp_mut(comp).apply_cx(gid(a), gid(b));
    }

    /// Measure Z on a qubit, emitting a detector when the outcome is
    /// determined by earlier measurements. During destructive patch
    /// readouts, only stabilizer-local relations become detectors (the
    /// data-site support must fit inside one check of the dying patch);
    /// logical-string relations stay out of the detector set — the
    /// observables carry them.
    #[allow(clippy::too_many_arguments)]
    fn emit_measure_filtered(
        &mut self,
        comp: usize,
        q: u32,
        kind: MeasKind,
        stype: StabType,
        cell: Cell,
        ts: u32,
        tag: DetectorTag,
        locality: Option<(&HashMap<u32, Site>, &[HashSet<Site>])>,
    ) -> u32 {
        let idx = self.meas_count;
        self.meas_count += 1;
        self.instrs.push(Instr::Measure {
            q,
            flip: self.noise.pm,
            kind,
        });
        self.touched.insert(q);
        let tab = self.comp_mut(comp);
        let target = tab.row_from_sparse(&[(gid(q), Pauli::Z)], false);
        match tab.measure_row(&target, idx) {
            MeasOutcome::Random => {}
            MeasOutcome::Deterministic { set, constant } => {
                let mut meas: Vec<u32> = set.into_vec();
                meas.push(idx);
                meas.sort_unstable();
                if let Some((meas_site, supports)) = locality {
                    let data_sites: Vec<Site> = meas
                        .iter()
                        .filter_map(|m| meas_site.get(m).copied())
                        .collect();
                    let local = supports
                        .iter()
                        .any(|sup| data_sites.iter().all(|s| sup.contains(s)));
                    if !local {
                        return idx;
                    }
                }
                self.instrs.push(Instr::Detector {
                    meas,
                    xor_const: constant != 0,
                    tag,
                    stype,
                    cell,
                    timestamp: ts,
                });
                self.det_count += 1;
            }
        }
        idx
    }

    fn emit_measure(
        &mut self,
        comp: usize,
        q: u32,
        kind: MeasKind,
        stype: StabType,
        cell: Cell,
        ts: u32,
        tag: DetectorTag,
    ) -> u32 {
        self.emit_measure_filtered(comp, q, kind, stype, cell, ts, tag, None)
    }

    fn tick(&mut self, active: &HashSet<u32>) {
        if self.noise.p1 > 0.0 {
            let mut idle: Vec<u32> = active.difference(&self.touched).copied().collect();
            idle.sort_unstable();
            for q in idle {
                self.instrs.push(Instr::Depol1 {
                    q,
                    p: self.noise.p1,
                });
            }
        }
        self.instrs.push(Instr::Tick);
        self.touched.clear();
    }

    // ---- feed-forward filtering ----

    /// Conditioned ops are dropped (the simulation folds their corrections
    /// into Pauli frames), and so is every |S⟩-resource patch that exists
    /// only to feed conditioned parities.
    fn compute_dropped(&mut self) {
        for (t, ops) in self.s.timestamps.iter().enumerate() {
            for (i, op) in ops.iter().enumerate() {
                if op.cond_task.is_some() {
                    self.dropped.insert((t, i));
                }
                if op.kind == SurfaceOpKind::InitS {
                    let cell = op.cells[0];
                    let mut lifetime: Vec<(usize, usize)> = vec![(t, i)];
                    let mut only_conditioned_parities = true;
                    'scan: for (t2, ops2) in self.s.timestamps.iter().enumerate().skip(t + 1) {
                        for (i2, op2) in ops2.iter().enumerate() {
                            if !op2.cells.contains(&cell) {
                                continue;
                            }
                            lifetime.push((t2, i2));
                            match op2.kind {
                                SurfaceOpKind::Idle => {}
                                SurfaceOpKind::MeasureX | SurfaceOpKind::MeasureZ => break 'scan,
                                k if k.is_parity() => {
                                    if op2.cond_task.is_none() {
                                        only_conditioned_parities = false;
                                    }
                                }
                                _ => {
                                    only_conditioned_parities = false;
                                }
                            }
                        }
                    }
                    if only_conditioned_parities {
                        self.dropped.extend(lifetime);
                    }
                }
            }
        }
    }

    fn live_ops(&self, t: usize) -> Vec<(usize, &'a SurfaceOp)> {
        self.s.timestamps[t]
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.dropped.contains(&(t, *i)))
            .map(|(i, op)| (i, op))
            .collect()
    }

    // ---- patch lifecycle ----

    fn init_patch(&mut self, cell: Cell, kind: SurfaceOpKind, ts: u32) -> Result<()> {
        let comp = self.new_component();
        self.comp_of_cell.insert(cell, comp);
        match kind {
            SurfaceOpKind::InitZ | SurfaceOpKind::InitX => {
                let data = self.layout.patch_data(cell);
                for s in data {
                    let q = self.emit_reset(comp, s);
                    if kind == SurfaceOpKind::InitX {
                        self.emit_h(comp, q);
                    }
                }
                self.patches.insert(
                    cell,
                    Patch {
                        extent: Extent::Full,
                        seeded_at: None,
                        seed_ancillas: Vec::new(),
                    },
                );
            }
            SurfaceOpKind::InitMagic | SurfaceOpKind::InitS => {
                // Hook-injection seed: corner in the −Y state via √X, its row
                // companion in |+⟩, the rest of the 2×2 block in |0⟩.
                let [corner, plus, z1, z2] = self.layout.seed_data(cell);
                let qc = self.emit_reset(comp, corner);
                self.emit_sqrt_x(comp, qc);
                let qp = self.emit_reset(comp, plus);
                self.emit_h(comp, qp);
                self.emit_reset(comp, z1);
                self.emit_reset(comp, z2);
                let seed_set: HashSet<Site> =
                    self.layout.seed_data(cell).iter().copied().collect();
                let seed_ancillas = derive_stabilizers(&self.layout, &seed_set)
                    .into_iter()
                    .map(|st| st.site)
                    .collect();
                self.patches.insert(
                    cell,
                    Patch {
                        extent: Extent::Seed,
                        seeded_at: Some(ts),
                        seed_ancillas,
                    },
                );
            }
            _ => unreachable!(),
        }
        Ok(())
    }

    fn grow_patch(&mut self, cell: Cell) {
        let comp = self.comp_of_cell[&cell];
        let (plus, zero) = self.layout.growth_data(cell);
        for s in zero {
            self.emit_reset(comp, s);
        }
        for s in plus {
            let q = self.emit_reset(comp, s);
            self.emit_h(comp, q);
        }
        self.patches.get_mut(&cell).unwrap().extent = Extent::Full;
    }

    /// Destructively read out a patch. X basis applies transversal H first.
    /// Records each site's measurement index; removal happens in
    /// `drop_patch_qubits` afterwards.
    fn readout_patch(
        &mut self,
        cell: Cell,
        x_basis: bool,
        ts: u32,
        readout_meas: &mut HashMap<Site, u32>,
    ) -> Result<()> {
        let comp = self.comp_of_cell[&cell];
        let data = self.layout.patch_data(cell);
        let stype = if x_basis { StabType::X } else { StabType::Z };
        let mut qs = Vec::new();
        for s in data {
            let q = self.qubit(s);
            qs.push((s, q));
        }
        if x_basis {
            for &(_, q) in &qs {
                self.emit_h(comp, q);
            }
        }
        let data_set: HashSet<Site> = self.layout.patch_data(cell).into_iter().collect();
        let supports: Vec<HashSet<Site>> = derive_stabilizers(&self.layout, &data_set)
            .into_iter()
            .filter(|st| st.stype == stype)
            .map(|st| st.data.iter().flatten().copied().collect())
            .collect();
        let mut local_meas_site: HashMap<u32, Site> = HashMap::new();
        for &(s, q) in &qs {
            let idx = self.emit_measure_filtered(
                comp,
                q,
                MeasKind::Data,
                stype,
                cell,
                ts,
                DetectorTag::None,
                Some((&local_meas_site, &supports)),
            );
            local_meas_site.insert(idx, s);
            readout_meas.insert(s, idx);
        }
        Ok(())
    }

    /// Remove a dead patch's qubits from its tableau and release the cell.
    fn drop_patch_qubits(&mut self, cell: Cell) {
        let comp = self.comp_of_cell[&cell];
        let data = self.layout.patch_data(cell);
        let data_set: HashSet<Site> = data.iter().copied().collect();
        let ancillas: Vec<Site> = derive_stabilizers(&self.layout, &data_set)
            .into_iter()
            .map(|st| st.site)
            .collect();
        {
            let tab = self.comps[comp].as_mut().unwrap();
            for s in data.iter().chain(ancillas.iter()) {
                if let Some(&q) = self.site_qubit.get(s) {
                    if tab.has_qubit(gid(q)) {
                        tab.remove_disentangled(gid(q));
                    }
                }
            }
        }
        self.comp_of_cell.remove(&cell);
        self.patches.remove(&cell);
    }

    // ---- main loop ----

    fn run(&mut self) -> Result<PhysicalCircuit> {
        self.compute_dropped();
        let last_ts = self.s.timestamps.len().saturating_sub(1);

        for t in 0..self.s.timestamps.len() {
            let ops = self.live_ops(t);
            if ops.is_empty() {
                continue;
            }
            let measurement_only = ops.iter().all(|(_, op)| op.kind.is_measurement());

            // Logical observables: the frame relation must be captured
            // while the final patches are still alive; the raw string bits
            // join after the destructive readout below.
            let pending_obs = if t == last_ts && !self.s.observables.is_empty() {
                let bases: HashMap<Cell, bool> = ops
                    .iter()
                    .filter(|(_, o)| o.kind.is_measurement())
                    .map(|(_, o)| (o.cells[0], o.kind == SurfaceOpKind::MeasureX))
                    .collect();
                Some(self.pre_resolve_observables(&bases)?)
            } else {
                None
            };

            // Start-of-timestamp destructive readouts.
            let mut readout_meas: HashMap<Site, u32> = HashMap::new();
            let mut dead_cells: Vec<(Cell, bool)> = Vec::new();
            for (_, op) in ops.iter().filter(|(_, o)| o.kind.is_measurement()) {
                let cell = op.cells[0];
                let x_basis = op.kind == SurfaceOpKind::MeasureX;
                self.readout_patch(cell, x_basis, t as u32, &mut readout_meas)?;
                dead_cells.push((cell, x_basis));
            }

            if let Some(pending) = pending_obs {
                for (id, frame_set, constant, sites) in pending {
                    let mut meas: Vec<u32> = frame_set;
                    for s in sites {
                        let idx = readout_meas.get(&s).ok_or_else(|| {
                            SurfqError::Lowering(format!(
                                "observable {id} site {s:?} was not read out in the final slot"
                            ))
                        })?;
                        meas.push(*idx);
                    }
                    meas.sort_unstable();
                    // paired indices cancel (XOR semantics)
                    let mut dedup = Vec::with_capacity(meas.len());
                    let mut i = 0;
                    while i < meas.len() {
                        if i + 1 < meas.len() && meas[i] == meas[i + 1] {
                            i += 2;
                        } else {
                            dedup.push(meas[i]);
                            i += 1;
                        }
                    }
                    self.instrs.push(Instr::Observable {
                        id,
                        meas: dedup,
                        xor_const: constant != 0,
                    });
                }
            }
            for (cell, _) in dead_cells {
                self.drop_patch_qubits(cell);
            }

            if measurement_only {
                continue;
            }

            // Round-0 initializations and merges.
            let mut merges: Vec<ActiveMerge> = Vec::new();
            for (_, op) in &ops {
                match op.kind {
                    SurfaceOpKind::InitZ
                    | SurfaceOpKind::InitX
                    | SurfaceOpKind::InitS
                    | SurfaceOpKind::InitMagic => {
                        self.init_patch(op.cells[0], op.kind, t as u32)?;
                    }
                    SurfaceOpKind::ParityZZ | SurfaceOpKind::ParityXX => {
                        merges.push(self.begin_merge(op, t)?);
                    }
                    SurfaceOpKind::ParityZX => {
                        return Err(SurfqError::Lowering(
                            "ZX parity has no flat lattice-surgery realization here; \
                             route the schedule with ZZ/XX blocks instead"
                                .into(),
                        ));
                    }
                    SurfaceOpKind::Teleport => {
                        merges.push(self.begin_teleport(op, t)?);
                    }
                    _ => {}
                }
            }

            // d stabilizer rounds.
            for r in 0..self.d {
                if r == 1 {
                    let grow: Vec<Cell> = self
                        .patches
                        .iter()
                        .filter(|(_, p)| p.extent == Extent::Seed)
                        .map(|(c, _)| *c)
                        .collect();
                    let mut grow = grow;
                    grow.sort();
                    for cell in grow {
                        self.grow_patch(cell);
                    }
                }
                self.stabilizer_round(&merges, t as u32, r)?;
                if r == 0 {
                    for m in &merges {
                        self.check_merged_parity(m)?;
                    }
                }
                if r == self.d - 1 {
                    for m in merges.clone() {
                        self.split_merge(&m, t as u32)?;
                    }
                }
                let active = self.round_active_qubits(&merges);
                self.tick(&active);
            }
        }

        let noise = self.noise;
        Ok(PhysicalCircuit {
            num_qubits: self.qubit_sites.len() as u32,
            num_measurements: self.meas_count,
            num_detectors: self.det_count,
            num_observables: self.s.observables.len() as u32,
            instrs: std::mem::take(&mut self.instrs),
            qubit_sites: std::mem::take(&mut self.qubit_sites),
            noise,
            distance: self.d,
        })
    }

    /// All data sites active in the current round.
    fn active_data(&self, merges: &[ActiveMerge]) -> HashSet<Site> {
        let mut data: HashSet<Site> = HashSet::new();
        for (cell, p) in &self.patches {
            match p.extent {
                Extent::Full => data.extend(self.layout.patch_data(*cell)),
                Extent::Seed => data.extend(self.layout.seed_data(*cell)),
            }
        }
        for m in merges {
            data.extend(m.seam_sites.iter().copied());
        }
        data
    }

    fn round_active_qubits(&self, merges: &[ActiveMerge]) -> HashSet<u32> {
        let data = self.active_data(merges);
        let mut qs: HashSet<u32> = data
            .iter()
            .filter_map(|s| self.site_qubit.get(s).copied())
            .collect();
        for st in derive_stabilizers(&self.layout, &data) {
            if let Some(&q) = self.site_qubit.get(&st.site) {
                qs.insert(q);
            }
        }
        qs
    }

    fn stabilizer_round(&mut self, merges: &[ActiveMerge], ts: u32, round: u32) -> Result<()> {
        let data = self.active_data(merges);
        let stabs = derive_stabilizers(&self.layout, &data);

        // Map each stabilizer to its component via a data neighbor.
        let comp_of = |me: &Self, st: &StabSite| -> usize {
            let s = st.data.iter().flatten().next().expect("stab without data");
            let cell = me.cell_of_site(*s);
            me.comp_of_cell[&cell]
        };

        // Ancilla resets.
        for st in &stabs {
            let comp = comp_of(self, st);
            self.emit_reset(comp, st.site);
        }
        self.instrs.push(Instr::Barrier);
        // Basis-change layer for X-type checks.
        for st in &stabs {
            if st.stype == StabType::X {
                let comp = comp_of(self, st);
                let q = self.qubit(st.site);
                self.emit_h(comp, q);
            }
        }
        self.instrs.push(Instr::Barrier);
        // Four interaction layers.
        for layer in 0..4 {
            for st in &stabs {
                let Some(dsite) = st.data[layer] else { continue };
                let comp = comp_of(self, st);
                let anc = self.qubit(st.site);
                let dq = self.qubit(dsite);
                match st.stype {
                    StabType::X => self.emit_cx(comp, anc, dq),
                    StabType::Z => self.emit_cx(comp, dq, anc),
                }
            }
            self.instrs.push(Instr::Barrier);
        }
        // Undo basis change.
        for st in &stabs {
            if st.stype == StabType::X {
                let comp = comp_of(self, st);
                let q = self.qubit(st.site);
                self.emit_h(comp, q);
            }
        }
        self.instrs.push(Instr::Barrier);
        // Readout with detector derivation.
        for st in &stabs {
            let comp = comp_of(self, st);
            let q = self.qubit(st.site);
            let cell = self.cell_of_site(st.site);
            let tag = self.expansion_tag(st.site, ts, round);
            self.emit_measure(comp, q, MeasKind::Stabilizer, st.stype, cell, ts, tag);
        }
        Ok(())
    }

    /// Detectors anchored at a seed patch's three checks during its first
    /// two rounds form the post-selection set of the injection.
    fn expansion_tag(&self, site: Site, ts: u32, round: u32) -> DetectorTag {
        if round > 1 {
            return DetectorTag::None;
        }
        let cell = self.cell_of_site(site);
        if let Some(p) = self.patches.get(&cell) {
            if p.seeded_at == Some(ts) && p.seed_ancillas.contains(&site) {
                return DetectorTag::Expansion;
            }
        }
        DetectorTag::None
    }

    fn begin_merge(&mut self, op: &SurfaceOp, t: usize) -> Result<ActiveMerge> {
        let cells = op.cells.clone();
        let a = cells[0];
        let b = *cells.last().unwrap();
        let horizontal = a.row == b.row;
        for w in cells.windows(2) {
            if (w[0].row == w[1].row) != horizontal {
                return Err(SurfqError::Lowering(format!(
                    "parity path between {a} and {b} turns a corner; only straight merges lower"
                )));
            }
        }
        let want_horizontal = op.kind == SurfaceOpKind::ParityZZ;
        if horizontal != want_horizontal {
            return Err(SurfqError::Lowering(format!(
                "{} between {a} and {b}: ZZ merges run horizontally and XX vertically \
                 under the fixed patch orientation",
                op.kind.mnemonic()
            )));
        }
        let seam_plus = op.kind == SurfaceOpKind::ParityZZ;
        let comp = self.unify(&[a, b]);
        // Corridor cells become full |+⟩/|0⟩ patches for the merge duration.
        let corridor: Vec<Cell> = cells[1..cells.len() - 1].to_vec();
        for c in &corridor {
            self.comp_of_cell.insert(*c, comp);
            for s in self.layout.patch_data(*c) {
                let q = self.emit_reset(comp, s);
                if seam_plus {
                    self.emit_h(comp, q);
                }
            }
        }
        let mut seam_sites = Vec::new();
        for w in cells.windows(2) {
            for s in self.layout.seam_data(w[0], w[1]) {
                let q = self.emit_reset(comp, s);
                if seam_plus {
                    self.emit_h(comp, q);
                }
                seam_sites.push(s);
            }
        }
        // Corridor data participate in the split readout as well.
        let _ = t;
        Ok(ActiveMerge {
            cells,
            horizontal,
            seam_plus,
            seam_sites,
            corridor_cells: corridor,
            consume_first_cell: false,
        })
    }

    fn begin_teleport(&mut self, op: &SurfaceOp, t: usize) -> Result<ActiveMerge> {
        let src = op.cells[0];
        let dst = op.cells[1];
        let horizontal = src.row == dst.row;
        let comp_src = self.comp_of_cell[&src];
        let comp = comp_src;
        // Destination patch: |+⟩ for the ZZ (horizontal) route, |0⟩ for XX.
        self.comp_of_cell.insert(dst, comp);
        for s in self.layout.patch_data(dst) {
            let q = self.emit_reset(comp, s);
            if horizontal {
                self.emit_h(comp, q);
            }
        }
        self.patches.insert(
            dst,
            Patch {
                extent: Extent::Full,
                seeded_at: None,
                seed_ancillas: Vec::new(),
            },
        );
        let mut seam_sites = Vec::new();
        for s in self.layout.seam_data(src, dst) {
            let q = self.emit_reset(comp, s);
            if horizontal {
                self.emit_h(comp, q);
            }
            seam_sites.push(s);
        }
        let _ = t;
        Ok(ActiveMerge {
            cells: vec![src, dst],
            horizontal,
            seam_plus: horizontal,
            seam_sites,
            corridor_cells: Vec::new(),
            consume_first_cell: true,
        })
    }

    /// After the first merged round, the joint logical parity must already
    /// be determined; anything else is a geometry bug.
    fn check_merged_parity(&mut self, m: &ActiveMerge) -> Result<()> {
        let a = m.cells[0];
        let b = *m.cells.last().unwrap();
        let comp = self.comp_of_cell[&a];
        let sparse: Vec<(u64, Pauli)> = if m.seam_plus {
            // ZZ merge: Z strings of both endpoints.
            self.layout
                .z_string(a)
                .into_iter()
                .chain(self.layout.z_string(b))
                .map(|s| (gid(self.site_qubit[&s]), Pauli::Z))
                .collect()
        } else {
            self.layout
                .x_string(a)
                .into_iter()
                .chain(self.layout.x_string(b))
                .map(|s| (gid(self.site_qubit[&s]), Pauli::X))
                .collect()
        };
        let tab = self.comp_mut(comp);
        let row = tab.row_from_sparse(&sparse, false);
        if tab.peek_row(&row).is_none() {
            return Err(SurfqError::Lowering(format!(
                "merged parity between {a} and {b} is not determined after the first round"
            )));
        }
        Ok(())
    }

    fn split_merge(&mut self, m: &ActiveMerge, ts: u32) -> Result<()> {
        let comp = self.comp_of_cell[&m.cells[0]];
        let stype = if m.seam_plus { StabType::X } else { StabType::Z };
        // Seam qubits read out in the seam basis.
        let mut seam_qs = Vec::new();
        for s in &m.seam_sites {
            seam_qs.push((self.site_qubit[s], self.cell_of_site(*s)));
        }
        // Corridor patch data read out likewise.
        let mut corridor_qs = Vec::new();
        for c in &m.corridor_cells {
            for s in self.layout.patch_data(*c) {
                corridor_qs.push((self.site_qubit[&s], *c));
            }
        }
        for &(q, _) in seam_qs.iter().chain(corridor_qs.iter()) {
            if m.seam_plus {
                self.emit_h(comp, q);
            }
        }
        for &(q, cell) in seam_qs.iter().chain(corridor_qs.iter()) {
            self.emit_measure(comp, q, MeasKind::Data, stype, cell, ts, DetectorTag::None);
        }
        // Remove dead seam/corridor qubits.
        {
            let tab = self.comps[comp].as_mut().unwrap();
            for (q, _) in seam_qs.iter().chain(corridor_qs.iter()) {
                tab.remove_disentangled(gid(*q));
            }
        }
        for c in &m.corridor_cells {
            // corridor ancillas die with the corridor
            let data_set: HashSet<Site> = self.layout.patch_data(*c).into_iter().collect();
            let ancs: Vec<Site> = derive_stabilizers(&self.layout, &data_set)
                .into_iter()
                .map(|st| st.site)
                .collect();
            let tab = self.comps[comp].as_mut().unwrap();
            for s in ancs {
                if let Some(&q) = self.site_qubit.get(&s) {
                    if tab.has_qubit(gid(q)) {
                        tab.remove_disentangled(gid(q));
                    }
                }
            }
            self.comp_of_cell.remove(c);
        }
        // Teleport: consume the source patch in the seam basis too.
        if m.consume_first_cell {
            let src = m.cells[0];
            let mut sink: HashMap<Site, u32> = HashMap::new();
            self.readout_patch(src, m.seam_plus, ts, &mut sink)?;
            self.drop_patch_qubits(src);
        }
        Ok(())
    }

    /// Resolve each observable's frame relation on the pre-readout state:
    /// the logical operator is a stabilizer of the (byproduct-carrying)
    /// state, so its eigenvalue is a closed parity of earlier outcomes.
    /// Returns (id, frame bits, constant, string sites); the raw readout
    /// bits of the string sites complete the definition afterwards.
    #[allow(clippy::type_complexity)]
    fn pre_resolve_observables(
        &mut self,
        readout_basis: &HashMap<Cell, bool>,
    ) -> Result<Vec<(u32, Vec<u32>, u8, Vec<Site>)>> {
        let info = validate(self.s)?;
        let mut final_cell: HashMap<u32, Cell> = HashMap::new();
        for (q, (t, i)) in &info.final_measurements {
            final_cell.insert(*q, self.s.timestamps[*t][*i].cells[0]);
        }
        let mut cells: Vec<Cell> = Vec::new();
        for obs in &self.s.observables {
            for (q, _) in &obs.terms {
                let c = final_cell.get(q).ok_or_else(|| {
                    SurfqError::Lowering(format!(
                        "observable references logical qubit {q} with no final measurement"
                    ))
                })?;
                cells.push(*c);
            }
        }
        cells.sort();
        cells.dedup();
        let comp = self.unify(&cells);

        let mut out = Vec::new();
        for (id, obs) in self.s.observables.iter().enumerate() {
            let mut row = {
                let tab = self.comp_mut(comp);
                PauliRow::identity(tab.row_words())
            };
            let mut string_sites: Vec<Site> = Vec::new();
            for &(q, p) in &obs.terms {
                let cell = final_cell[&q];
                let x_read = *readout_basis.get(&cell).unwrap_or(&false);
                let sites = match p {
                    Pauli::X if x_read => self.layout.x_string(cell),
                    Pauli::Z if !x_read => self.layout.z_string(cell),
                    Pauli::Y => {
                        return Err(SurfqError::Lowering(
                            "Y-type logical observables are not supported".into(),
                        ))
                    }
                    _ => {
                        return Err(SurfqError::Lowering(format!(
                            "observable {id}: qubit {q} is read out in a basis incompatible \
                             with its {p:?} term"
                        )))
                    }
                };
                let sparse: Vec<(u64, Pauli)> = sites
                    .iter()
                    .map(|s| (gid(self.site_qubit[s]), p))
                    .collect();
                string_sites.extend(sites);
                let tab = self.comp_mut(comp);
                let factor = tab.row_from_sparse(&sparse, false);
                row.mul_assign(&factor);
            }
            let tab = self.comp_mut(comp);
            let (set, constant) = tab.peek_row(&row).ok_or_else(|| {
                SurfqError::Lowering(format!(
                    "observable {id} is not a stabilizer of the pre-readout state"
                ))
            })?;
            out.push((id as u32, set.into_vec(), constant, string_sites));
        }
        Ok(out)
    }
}

/// Lower a validated schedule to a noisy physical circuit at distance `d`.
///
/// Conditioned (feed-forward) operations and the |S⟩ resources that exist
/// only to serve them are omitted — their corrections are Pauli frames in
/// the Cliffordized circuit — so the output is a straight-line stabilizer
/// circuit whose detectors are all deterministic at zero noise.
pub fn lower_physical(s: &SurfaceCircuit, d: u32, noise: NoiseModel) -> Result<PhysicalCircuit> {
    if d < 3 || d % 2 == 0 {
        return Err(SurfqError::Lowering(format!(
            "distance must be odd and ≥ 3, got {d}"
        )));
    }
    noise.validate()?;
    validate(s)?;
    let mut lw = Lowerer::new(s, d, noise);
    lw.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::parse_surface;

    #[test]
    fn single_surface_memory_block() {
        let src = "grid 1 1\nobservable Z0\nt 0:\n  INITZ (0,0) q=0 task=0\nt 1:\n  IDLE (0,0) task=0\nt 2:\n  MEASZ (0,0) task=0\n";
        let s = parse_surface(src).unwrap();
        let pc = lower_physical(&s, 3, NoiseModel::noiseless()).unwrap();
        // 2d²−1 = 17 qubits for a single d=3 patch
        assert_eq!(pc.num_qubits, 17);
        //two timestamps of 3 rounds each: 8 ancillas × 6 rounds + 9 data
        assert_eq!(pc.num_measurements, 8 * 6 + 9);
        assert_eq!(pc.num_observables, 1);
        // first round: 4 Z-checks deterministic; rounds 2-6: all 8; terminal:
        // 4 Z-plaquette reconstructions plus the deterministic logical Z
        assert_eq!(pc.num_detectors, 4 + 8 * 5 + 5);
    }

    #[test]
    fn even_distance_rejected() {
        let src = "grid 1 1\nt 0:\n  INITZ (0,0)\nt 1:\n  MEASZ (0,0)\n";
        let s = parse_surface(src).unwrap();
        assert!(lower_physical(&s, 4, NoiseModel::noiseless()).is_err());
    }

    #[test]
    fn x_memory_roundtrip() {
        let src = "grid 1 1\nobservable X0\nt 0:\n  INITX (0,0) q=0 task=0\nt 1:\n  IDLE (0,0) task=0\nt 2:\n  MEASX (0,0) task=0\n";
        let s = parse_surface(src).unwrap();
        let pc = lower_physical(&s, 5, NoiseModel::uniform(0.001)).unwrap();
        assert_eq!(pc.num_qubits, 49);
        assert_eq!(pc.num_observables, 1);
    }

    #[test]
    fn zz_parity_between_neighbors() {
        let src = "grid 2 1\nobservable Z0\nt 0:\n  INITZ (0,0) q=0 task=0\n  INITZ (0,1) task=0\nt 1:\n  PARITYZZ (0,0) (0,1) task=0\nt 2:\n  IDLE (0,0) task=0\n  MEASZ (0,1) task=0\n  # wait: measurement+idle both present, so rounds continue\nt 3:\n  MEASZ (0,0) task=0\n";
        let s = parse_surface(src).unwrap();
        let pc = lower_physical(&s, 3, NoiseModel::noiseless()).unwrap();
        // two patches + seam column + seam checks
        assert!(pc.num_qubits > 34);
    }

    #[test]
    fn xx_requires_vertical() {
        let src = "grid 2 1\nt 0:\n  INITZ (0,0)\n  INITZ (0,1)\nt 1:\n  PARITYXX (0,0) (0,1)\nt 2:\n  MEASZ (0,0)\n  MEASZ (0,1)\n";
        let s = parse_surface(src).unwrap();
        let err = lower_physical(&s, 3, NoiseModel::noiseless()).unwrap_err();
        assert!(matches!(err, SurfqError::Lowering(_)));
    }

    #[test]
    fn injection_block_lowers() {
        let src = "grid 2 1\nt 0:\n  INITMAGIC (0,0)\nt 1:\n  IDLE (0,0)\nt 2:\n  MEASX (0,0)\n";
        let s = parse_surface(src).unwrap();
        let pc = lower_physical(&s, 3, NoiseModel::uniform(0.001)).unwrap();
        let exp = pc.expansion_detectors();
        assert!(!exp.is_empty(), "injection must tag expansion detectors");
        assert!(exp.len() <= 6);
    }
}
