//! Heuristic lattice-surgery scheduler: computational qubits on the grid
//! diagonal, greedy nearest-free-ancilla routing, deterministic tie-breaks
//! (lowest row, then column, first).
//!
//! The schedule this produces is correct and invariant-clean, not optimal;
//! the bundled reference schedule is the source for all benchmark numbers.

use super::{Cell, CellRole, SurfaceCircuit, SurfaceGrid, SurfaceOp, SurfaceOpKind};
use crate::error::{Result, SurfqError};
use crate::logical::{LogicalCircuit, LogicalOpKind};
use std::collections::HashMap;

#[derive(Debug, Clone)]
pub struct CompileOptions {
    pub grid_width: u32,
    pub grid_height: u32,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            grid_width: 5,
            grid_height: 5,
        }
    }
}

struct Scheduler {
    grid: SurfaceGrid,
    /// First timestamp at which a cell is free again.
    cell_free: HashMap<Cell, usize>,
    /// Cells currently holding live patches (and since when they are busy).
    live: HashMap<Cell, ()>,
    /// Logical qubit -> hosting cell.
    binding: HashMap<u32, Cell>,
    /// Logical qubit -> earliest timestamp for its next op.
    ready: HashMap<u32, usize>,
    timestamps: Vec<Vec<SurfaceOp>>,
    next_task: u32,
}

const TERMINAL_TASK: u32 = 0;

impl Scheduler {
    fn new(opts: &CompileOptions) -> Self {
        Scheduler {
            grid: SurfaceGrid::new(opts.grid_width, opts.grid_height),
            cell_free: HashMap::new(),
            live: HashMap::new(),
            binding: HashMap::new(),
            ready: HashMap::new(),
            timestamps: Vec::new(),
            next_task: 1,
        }
    }

    fn slot(&mut self, t: usize) -> &mut Vec<SurfaceOp> {
        while self.timestamps.len() <= t {
            self.timestamps.push(Vec::new());
        }
        &mut self.timestamps[t]
    }

    fn cell_available(&self, c: &Cell, t: usize) -> bool {
        self.grid.in_range(c)
            && !self.live.contains_key(c)
            && self.cell_free.get(c).copied().unwrap_or(0) <= t
            && !self
                .timestamps
                .get(t)
                .map(|ops| ops.iter().any(|o| o.cells.contains(c)))
                .unwrap_or(false)
    }

    fn emit(&mut self, t: usize, op: SurfaceOp) {
        for c in &op.cells {
            let e = self.cell_free.entry(*c).or_insert(0);
            *e = (*e).max(t + 1);
        }
        self.slot(t).push(op);
    }

    fn qubit_ready(&self, q: u32) -> usize {
        self.ready.get(&q).copied().unwrap_or(0)
    }

    fn bump_ready(&mut self, q: u32, t: usize) {
        let e = self.ready.entry(q).or_insert(0);
        *e = (*e).max(t);
    }

    /// Straight corridor between two cells (exclusive of endpoints); None if
    /// not axis-aligned.
    fn corridor(a: Cell, b: Cell) -> Option<Vec<Cell>> {
        if a.row == b.row {
            let (lo, hi) = (a.col.min(b.col), a.col.max(b.col));
            let mut v: Vec<Cell> = (lo + 1..hi).map(|c| Cell::new(a.row, c)).collect();
            if b.col < a.col {
                v.reverse();
            }
            Some(v)
        } else if a.col == b.col {
            let (lo, hi) = (a.row.min(b.row), a.row.max(b.row));
            let mut v: Vec<Cell> = (lo + 1..hi).map(|r| Cell::new(r, a.col)).collect();
            if b.row < a.row {
                v.reverse();
            }
            Some(v)
        } else {
            None
        }
    }

    /// Earliest timestamp ≥ `from` at which all `cells` are simultaneously
    /// available.
    fn earliest(&self, cells: &[Cell], from: usize) -> Result<usize> {
        let mut t = from;
        for _ in 0..10_000 {
            if cells.iter().all(|c| self.cell_available(c, t)) {
                return Ok(t);
            }
            t += 1;
        }
        Err(SurfqError::Allocation(format!(
            "no timestamp frees cells {:?}",
            cells
        )))
    }

    /// Free horizontal neighbor of `c` at the earliest timestamp ≥ `from`;
    /// lowest coordinate wins ties.
    fn free_horizontal_neighbor(&self, c: Cell, from: usize) -> Result<(Cell, usize)> {
        let mut candidates = Vec::new();
        if c.col > 0 {
            candidates.push(Cell::new(c.row, c.col - 1));
        }
        candidates.push(Cell::new(c.row, c.col + 1));
        candidates.retain(|cand| self.grid.in_range(cand));
        candidates.sort();
        for t in from..from + 10_000 {
            for cand in &candidates {
                if self.cell_available(cand, t) {
                    return Ok((*cand, t));
                }
            }
        }
        Err(SurfqError::Allocation(format!(
            "no free ancilla cell adjacent to {c}"
        )))
    }

    fn path_h(from: Cell, to: Cell) -> Vec<Cell> {
        let mut p = vec![from];
        p.extend(Self::corridor(from, to).unwrap());
        p.push(to);
        p
    }

    fn init_qubit(&mut self, q: u32, kind: SurfaceOpKind) -> Result<()> {
        let cell = Cell::new(q, q);
        if !self.grid.in_range(&cell) {
            return Err(SurfqError::Allocation(format!(
                "grid too small for diagonal placement of qubit {q}"
            )));
        }
        let t = self.earliest(&[cell], self.qubit_ready(q))?;
        self.emit(
            t,
            SurfaceOp::new(kind, vec![cell])
                .with_logical(q)
                .with_task(TERMINAL_TASK),
        );
        self.live.insert(cell, ());
        self.binding.insert(q, cell);
        self.grid.set_role(&cell, CellRole::Computational(q));
        self.bump_ready(q, t + 1);
        Ok(())
    }

    fn measure_qubit(&mut self, q: u32, kind: SurfaceOpKind) -> Result<()> {
        let cell = self.binding[&q];
        let t = self.qubit_ready(q);
        self.emit(
            t,
            SurfaceOp::new(kind, vec![cell]).with_task(TERMINAL_TASK),
        );
        self.live.remove(&cell);
        self.binding.remove(&q);
        self.bump_ready(q, t + 1);
        Ok(())
    }

    /// Lattice-surgery CNOT: ancilla |+⟩ at the corner (row of control,
    /// column of target), ZZ parity to the control (horizontal), XX parity
    /// to the target (vertical), ancilla measured in Z.
    fn cnot(&mut self, c: u32, t: u32) -> Result<()> {
        let cc = self.binding[&c];
        let ct = self.binding[&t];
        if cc.col == ct.col {
            // Move the control sideways so a corner exists.
            self.relocate(c)?;
        }
        let cc = self.binding[&c];
        let corner = Cell::new(cc.row, ct.col);
        let zz_path = Self::path_h(cc, corner);
        let xx_corridor = Self::corridor(corner, ct).unwrap();
        let mut xx_path = vec![corner];
        xx_path.extend(xx_corridor);
        xx_path.push(ct);

        let mut aux_cells = vec![corner];
        aux_cells.extend(zz_path[1..zz_path.len() - 1].iter().copied());
        let from = self.qubit_ready(c).max(self.qubit_ready(t));
        let t0 = self.earliest(&aux_cells, from)?;
        self.emit(
            t0,
            SurfaceOp::new(SurfaceOpKind::InitX, vec![corner]).with_task(TERMINAL_TASK),
        );
        self.live.insert(corner, ());
        let t1 = self.earliest(&zz_path[1..zz_path.len() - 1].to_vec(), t0 + 1)?;
        self.emit(
            t1,
            SurfaceOp::new(SurfaceOpKind::ParityZZ, zz_path).with_task(TERMINAL_TASK),
        );
        let t2 = self.earliest(&xx_path[1..xx_path.len() - 1].to_vec(), t1 + 1)?;
        self.emit(
            t2,
            SurfaceOp::new(SurfaceOpKind::ParityXX, xx_path).with_task(TERMINAL_TASK),
        );
        let t3 = t2 + 1;
        self.emit(
            t3,
            SurfaceOp::new(SurfaceOpKind::MeasureZ, vec![corner]).with_task(TERMINAL_TASK),
        );
        self.live.remove(&corner);
        self.bump_ready(c, t2 + 1);
        self.bump_ready(t, t3);
        Ok(())
    }

    /// Move a qubit one cell sideways via teleportation.
    fn relocate(&mut self, q: u32) -> Result<()> {
        let src = self.binding[&q];
        let (dst, t) = self.free_horizontal_neighbor(src, self.qubit_ready(q))?;
        self.emit(
            t,
            SurfaceOp::new(SurfaceOpKind::Teleport, vec![src, dst]).with_task(TERMINAL_TASK),
        );
        self.live.remove(&src);
        self.live.insert(dst, ());
        self.binding.insert(q, dst);
        self.bump_ready(q, t + 1);
        Ok(())
    }

    /// Magic-state gadget: nFT init, ZZ parity, X measurement, then the
    /// conditioned S correction (|S⟩ prep + conditioned ZZ parity + X
    /// measurement) gated on the gadget's decoding task.
    fn t_gadget(&mut self, q: u32) -> Result<()> {
        let task = self.next_task;
        self.next_task += 1;
        let qc = self.binding[&q];
        let (m, t0) = self.free_horizontal_neighbor(qc, self.qubit_ready(q))?;
        self.emit(
            t0,
            SurfaceOp::new(SurfaceOpKind::InitMagic, vec![m]).with_task(task),
        );
        self.live.insert(m, ());
        let t1 = t0 + 1;
        self.emit(
            t1,
            SurfaceOp::new(SurfaceOpKind::ParityZZ, Self::path_h(qc, m)).with_task(task),
        );
        let t2 = t1 + 1;
        self.emit(
            t2,
            SurfaceOp::new(SurfaceOpKind::MeasureX, vec![m]).with_task(task),
        );
        self.live.remove(&m);
        self.bump_ready(q, t2);

        // Conditioned S-correction block.
        let (s, t3) = self.free_horizontal_neighbor(qc, t2 + 1)?;
        self.emit(
            t3,
            SurfaceOp::new(SurfaceOpKind::InitS, vec![s]).with_task(TERMINAL_TASK),
        );
        self.live.insert(s, ());
        let t4 = (t3 + 1).max(t2 + 1);
        self.emit(
            t4,
            SurfaceOp::new(SurfaceOpKind::ParityZZ, Self::path_h(qc, s))
                .with_cond(task)
                .with_task(TERMINAL_TASK),
        );
        let t5 = t4 + 1;
        self.emit(
            t5,
            SurfaceOp::new(SurfaceOpKind::MeasureX, vec![s]).with_task(TERMINAL_TASK),
        );
        self.live.remove(&s);
        self.bump_ready(q, t5);
        Ok(())
    }

    /// Unconditioned S gadget (|S⟩ prep + ZZ parity + X measurement).
    fn s_gadget(&mut self, q: u32) -> Result<()> {
        let qc = self.binding[&q];
        let (s, t0) = self.free_horizontal_neighbor(qc, self.qubit_ready(q))?;
        self.emit(
            t0,
            SurfaceOp::new(SurfaceOpKind::InitS, vec![s]).with_task(TERMINAL_TASK),
        );
        self.live.insert(s, ());
        let t1 = t0 + 1;
        self.emit(
            t1,
            SurfaceOp::new(SurfaceOpKind::ParityZZ, Self::path_h(qc, s)).with_task(TERMINAL_TASK),
        );
        let t2 = t1 + 1;
        self.emit(
            t2,
            SurfaceOp::new(SurfaceOpKind::MeasureX, vec![s]).with_task(TERMINAL_TASK),
        );
        self.live.remove(&s);
        self.bump_ready(q, t2);
        Ok(())
    }

    /// Hadamard via ZX-parity teleportation: the qubit relocates to a fresh
    /// |+⟩ patch through an L-shaped Z·X parity, and the source patch is
    /// read out in Z.
    fn h_gadget(&mut self, q: u32) -> Result<()> {
        let qc = self.binding[&q];
        let t0 = self.qubit_ready(q);
        // Corner route: right then down (first fit among four L shapes).
        let shapes: [(i64, i64); 4] = [(0, 1), (0, -1), (1, 0), (-1, 0)];
        let mut placed = None;
        'outer: for (dr, dc) in shapes {
            let mid = (qc.row as i64 + dr, qc.col as i64 + dc);
            if mid.0 < 0 || mid.1 < 0 {
                continue;
            }
            let mid = Cell::new(mid.0 as u32, mid.1 as u32);
            // destination perpendicular to the first leg
            let dests: [(i64, i64); 2] = if dr == 0 {
                [(1, 0), (-1, 0)]
            } else {
                [(0, 1), (0, -1)]
            };
            for (er, ec) in dests {
                let dst = (mid.row as i64 + er, mid.col as i64 + ec);
                if dst.0 < 0 || dst.1 < 0 {
                    continue;
                }
                let dst = Cell::new(dst.0 as u32, dst.1 as u32);
                if self.grid.in_range(&mid) && self.grid.in_range(&dst) {
                    placed = Some((mid, dst));
                    break 'outer;
                }
            }
        }
        let (mid, dst) =
            placed.ok_or_else(|| SurfqError::Allocation(format!("no room for H near {qc}")))?;
        let t0 = self.earliest(&[mid, dst], t0)?;
        self.emit(
            t0,
            SurfaceOp::new(SurfaceOpKind::InitX, vec![dst]).with_task(TERMINAL_TASK),
        );
        self.live.insert(dst, ());
        let t1 = self.earliest(&[mid], t0 + 1)?;
        self.emit(
            t1,
            SurfaceOp::new(SurfaceOpKind::ParityZX, vec![qc, mid, dst])
                .with_logical(q)
                .with_task(TERMINAL_TASK),
        );
        let t2 = t1 + 1;
        self.emit(
            t2,
            SurfaceOp::new(SurfaceOpKind::MeasureZ, vec![qc]).with_task(TERMINAL_TASK),
        );
        self.live.remove(&qc);
        self.binding.insert(q, dst);
        self.bump_ready(q, t2);
        Ok(())
    }

    /// Fill every round-consuming timestamp with explicit idles so the
    /// coverage invariant holds and FT-block counts stay exact.
    fn fill_idles(&mut self) {
        let mut live_now: HashMap<Cell, ()> = HashMap::new();
        for t in 0..self.timestamps.len() {
            let ops = &self.timestamps[t];
            let measurement_only = !ops.is_empty() && ops.iter().all(|o| o.kind.is_measurement());
            let mut covered: Vec<Cell> = Vec::new();
            let mut born: Vec<Cell> = Vec::new();
            let mut died: Vec<Cell> = Vec::new();
            for op in ops {
                covered.extend(op.cells.iter().copied());
                match op.kind {
                    SurfaceOpKind::InitZ
                    | SurfaceOpKind::InitX
                    | SurfaceOpKind::InitS
                    | SurfaceOpKind::InitMagic => born.push(op.cells[0]),
                    SurfaceOpKind::MeasureZ | SurfaceOpKind::MeasureX => died.push(op.cells[0]),
                    SurfaceOpKind::Teleport => {
                        died.push(op.cells[0]);
                        born.push(op.cells[1]);
                    }
                    _ => {}
                }
            }
            if !measurement_only && !ops.is_empty() {
                let mut missing: Vec<Cell> = live_now
                    .keys()
                    .filter(|c| !covered.contains(c))
                    .copied()
                    .collect();
                missing.sort();
                for c in missing {
                    self.timestamps[t]
                        .push(SurfaceOp::new(SurfaceOpKind::Idle, vec![c]).with_task(TERMINAL_TASK));
                }
            }
            for c in died {
                live_now.remove(&c);
            }
            for c in born {
                live_now.insert(c, ());
            }
        }
    }
}

/// Compile a surface-compatible logical circuit onto the grid. The gate
/// vocabulary maps onto lattice-surgery gadgets; X and Z reduce to √X and S
/// pairs, √X to S†·H·S† (all gadget-based), so every input op lands on
/// native schedule blocks.
pub fn compile_schedule(c: &LogicalCircuit, opts: &CompileOptions) -> Result<SurfaceCircuit> {
    c.validate()?;
    let mut sched = Scheduler::new(opts);
    compile_ops(&mut sched, c)?;
    sched.fill_idles();
    let circuit = SurfaceCircuit {
        grid: sched.grid.clone(),
        observables: c.observables.clone(),
        timestamps: sched.timestamps,
    };
    super::validate(&circuit)?;
    Ok(circuit)
}

fn compile_ops(sched: &mut Scheduler, c: &LogicalCircuit) -> Result<()> {
    for op in &c.ops {
        let q = op.targets[0];
        match op.kind {
            LogicalOpKind::InitZ => sched.init_qubit(q, SurfaceOpKind::InitZ)?,
            LogicalOpKind::InitPlus => sched.init_qubit(q, SurfaceOpKind::InitX)?,
            LogicalOpKind::MeasureZ => sched.measure_qubit(q, SurfaceOpKind::MeasureZ)?,
            LogicalOpKind::MeasureX => sched.measure_qubit(q, SurfaceOpKind::MeasureX)?,
            LogicalOpKind::Cnot => sched.cnot(op.targets[0], op.targets[1])?,
            LogicalOpKind::T | LogicalOpKind::Tdg => sched.t_gadget(q)?,
            LogicalOpKind::S | LogicalOpKind::Sdg => sched.s_gadget(q)?,
            LogicalOpKind::H => sched.h_gadget(q)?,
            LogicalOpKind::SqrtX => {
                sched.s_gadget(q)?;
                sched.h_gadget(q)?;
                sched.s_gadget(q)?;
            }
            LogicalOpKind::X => {
                for _ in 0..2 {
                    sched.s_gadget(q)?;
                    sched.h_gadget(q)?;
                    sched.s_gadget(q)?;
                }
            }
            LogicalOpKind::Z => {
                sched.s_gadget(q)?;
                sched.s_gadget(q)?;
            }
            LogicalOpKind::Toffoli => {
                return Err(SurfqError::InvalidCircuit(
                    "Toffoli reached the surface compiler; lower the circuit first".into(),
                ))
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logical::parse_logical;
    use crate::surface::census;

    #[test]
    fn minimal_memory_schedule() {
        let c = parse_logical("qubits 1\nINITZ 0\nMZ 0").unwrap();
        let s = compile_schedule(&c, &CompileOptions::default()).unwrap();
        let m = census(&s);
        assert_eq!(m.total_surfaces, 1);
        assert_eq!(s.timestamps.len(), 2);
        assert_eq!(m.feed_forward_gates, 0);
        assert_eq!(m.decoding_tasks, 1);
    }

    #[test]
    fn cnot_has_three_measurements() {
        let c = parse_logical("qubits 2\nINITZ 0\nINITZ 1\nCNOT 0 1\nMZ 0\nMZ 1").unwrap();
        let s = compile_schedule(&c, &CompileOptions::default()).unwrap();
        let m = census(&s);
        assert_eq!(m.total_measurements, 3 + 2);
    }

    #[test]
    fn t_gadget_structure() {
        let c = parse_logical("qubits 1\nINITZ 0\nT 0\nMZ 0").unwrap();
        let s = compile_schedule(&c, &CompileOptions::default()).unwrap();
        let mut magic_ts = None;
        let mut parity_ts = None;
        let mut cond_ts = None;
        for (t, ops) in s.timestamps.iter().enumerate() {
            for op in ops {
                match op.kind {
                    SurfaceOpKind::InitMagic => magic_ts = Some(t),
                    SurfaceOpKind::ParityZZ if op.cond_task.is_none() && parity_ts.is_none() => {
                        parity_ts = Some(t)
                    }
                    SurfaceOpKind::ParityZZ if op.cond_task.is_some() => cond_ts = Some(t),
                    _ => {}
                }
            }
        }
        let (m, p, f) = (magic_ts.unwrap(), parity_ts.unwrap(), cond_ts.unwrap());
        assert!(m < p && p < f, "magic init, parity, correction in order");
        let metrics = census(&s);
        assert_eq!(metrics.nft_block_count, 1);
        assert_eq!(metrics.feed_forward_gates, 1);
    }

    #[test]
    fn h_gadget_relocates() {
        let c = parse_logical("qubits 1\nINITZ 0\nH 0\nMZ 0").unwrap();
        let s = compile_schedule(&c, &CompileOptions::default()).unwrap();
        // one ZX parity, and the final measurement is on a different cell
        let has_zx = s
            .timestamps
            .iter()
            .flatten()
            .any(|o| o.kind == SurfaceOpKind::ParityZX);
        assert!(has_zx);
    }

    #[test]
    fn same_column_cnot_relocates() {
        // Force both qubits into the same column via H relocation first is
        // overkill; instead drive with a 3-qubit chain whose corner cell is
        // taken. CNOT 0 1 then CNOT 1 0 exercises reversed routing.
        let c =
            parse_logical("qubits 2\nINITZ 0\nINITZ 1\nCNOT 0 1\nCNOT 1 0\nMZ 0\nMZ 1").unwrap();
        let s = compile_schedule(&c, &CompileOptions::default()).unwrap();
        assert!(census(&s).total_measurements >= 8);
    }

    #[test]
    fn deterministic_compile() {
        let src = "qubits 3\nINITZ 0\nINITZ 1\nINITP 2\nCNOT 2 1\nT 1\nCNOT 0 1\nMZ 0\nMZ 1\nMX 2";
        let c = parse_logical(src).unwrap();
        let a = compile_schedule(&c, &CompileOptions::default()).unwrap();
        let b = compile_schedule(&c, &CompileOptions::default()).unwrap();
        assert_eq!(a.serialize(), b.serialize());
    }
}
