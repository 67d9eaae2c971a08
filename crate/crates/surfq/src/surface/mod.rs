//! Surface-level schedules: timestamped lattice-surgery operations on a 2-D
//! grid of surface-code patches, with feed-forward annotations, decoding-task
//! labels, and the census that summarizes a schedule's control footprint.

mod compile;
mod reference;
mod validate;

pub use compile::{compile_schedule, CompileOptions};
pub use reference::reference_schedule;
pub use validate::{validate, ScheduleInfo};

use crate::error::{Result, SurfqError};
use crate::logical::Observable;
use crate::pauli::Pauli;
use std::collections::BTreeSet;
use std::fmt;

/// Grid coordinate of one surface-code patch slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub row: u32,
    pub col: u32,
}

impl Cell {
    pub fn new(row: u32, col: u32) -> Self {
        Cell { row, col }
    }

    pub fn is_adjacent(&self, other: &Cell) -> bool {
        let dr = self.row.abs_diff(other.row);
        let dc = self.col.abs_diff(other.col);
        dr + dc == 1
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

/// Occupancy role of a grid cell at some instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellRole {
    Free,
    Computational(u32),
    Ancillary,
}

/// Static grid dimensions plus an occupancy snapshot (the roles evolve over
/// the schedule; this records the compiler's initial allocation).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurfaceGrid {
    pub width: u32,
    pub height: u32,
    pub cells: Vec<CellRole>,
}

impl SurfaceGrid {
    pub fn new(width: u32, height: u32) -> Self {
        SurfaceGrid {
            width,
            height,
            cells: vec![CellRole::Free; (width * height) as usize],
        }
    }

    pub fn in_range(&self, c: &Cell) -> bool {
        c.row < self.height && c.col < self.width
    }

    pub fn role(&self, c: &Cell) -> CellRole {
        self.cells[(c.row * self.width + c.col) as usize]
    }

    pub fn set_role(&mut self, c: &Cell, role: CellRole) {
        self.cells[(c.row * self.width + c.col) as usize] = role;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SurfaceOpKind {
    InitZ,
    InitX,
    InitS,
    InitMagic,
    MeasureZ,
    MeasureX,
    ParityZZ,
    ParityXX,
    ParityZX,
    Idle,
    Teleport,
}

impl SurfaceOpKind {
    pub fn mnemonic(self) -> &'static str {
        match self {
            SurfaceOpKind::InitZ => "INITZ",
            SurfaceOpKind::InitX => "INITX",
            SurfaceOpKind::InitS => "INITS",
            SurfaceOpKind::InitMagic => "INITMAGIC",
            SurfaceOpKind::MeasureZ => "MEASZ",
            SurfaceOpKind::MeasureX => "MEASX",
            SurfaceOpKind::ParityZZ => "PARITYZZ",
            SurfaceOpKind::ParityXX => "PARITYXX",
            SurfaceOpKind::ParityZX => "PARITYZX",
            SurfaceOpKind::Idle => "IDLE",
            SurfaceOpKind::Teleport => "TELEPORT",
        }
    }

    fn from_mnemonic(s: &str) -> Option<Self> {
        Some(match s {
            "INITZ" => SurfaceOpKind::InitZ,
            "INITX" => SurfaceOpKind::InitX,
            "INITS" => SurfaceOpKind::InitS,
            "INITMAGIC" => SurfaceOpKind::InitMagic,
            "MEASZ" => SurfaceOpKind::MeasureZ,
            "MEASX" => SurfaceOpKind::MeasureX,
            "PARITYZZ" => SurfaceOpKind::ParityZZ,
            "PARITYXX" => SurfaceOpKind::ParityXX,
            "PARITYZX" => SurfaceOpKind::ParityZX,
            "IDLE" => SurfaceOpKind::Idle,
            "TELEPORT" => SurfaceOpKind::Teleport,
        _ => return None,
        })
    }

    pub fn is_parity(self) -> bool {
        matches!(
            self,
            SurfaceOpKind::ParityZZ | SurfaceOpKind::ParityXX | SurfaceOpKind::ParityZX
        )
    }

    pub fn is_measurement(self) -> bool {
        matches!(self, SurfaceOpKind::MeasureZ | SurfaceOpKind::MeasureX)
    }

    /// Number of surface-level measurement events the op produces.
    pub fn measurement_events(self) -> usize {
        match self {
            SurfaceOpKind::MeasureZ | SurfaceOpKind::MeasureX => 1,
            k if k.is_parity() => 1,
            SurfaceOpKind::Teleport => 2,
            _ => 0,
        }
    }

    /// Fault-tolerant block weight for the census: a two-surface parity and
    /// an |S⟩ initialization each count as two FT blocks; magic-state
    /// initialization is the non-FT block and contributes zero here.
    pub fn ft_blocks(self, num_cells: usize) -> usize {
        match self {
            SurfaceOpKind::InitMagic => 0,
            SurfaceOpKind::InitS => 2,
            k if k.is_parity() => num_cells,
            SurfaceOpKind::Teleport => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurfaceOp {
    pub kind: SurfaceOpKind,
    /// Cells the op touches. Single-surface ops list one cell; parity ops
    /// list the full contiguous path (endpoints first and last); teleport
    /// lists [source, destination].
    pub cells: Vec<Cell>,
    /// Feed-forward condition: the decoding task whose result gates this op.
    pub cond_task: Option<u32>,
    /// Decoding-task ownership label.
    pub task: Option<u32>,
    /// Logical qubit bound by an init op (`q=N`).
    pub logical: Option<u32>,
}

impl SurfaceOp {
    pub fn new(kind: SurfaceOpKind, cells: Vec<Cell>) -> Self {
        SurfaceOp {
            kind,
            cells,
            cond_task: None,
            task: None,
            logical: None,
        }
    }

    pub fn with_task(mut self, task: u32) -> Self {
        self.task = Some(task);
        self
    }

    pub fn with_cond(mut self, task: u32) -> Self {
        self.cond_task = Some(task);
        self
    }

    pub fn with_logical(mut self, q: u32) -> Self {
        self.logical = Some(q);
        self
    }
}

/// A timestamped lattice-surgery schedule. One timestamp spans d stabilizer
/// rounds, except timestamps consisting solely of destructive measurements,
/// which consume no rounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurfaceCircuit {
    pub grid: SurfaceGrid,
    pub observables: Vec<Observable>,
    pub timestamps: Vec<Vec<SurfaceOp>>,
}

impl SurfaceCircuit {
    /// True when a timestamp contributes no stabilizer rounds (all ops are
    /// destructive single-surface measurements).
    pub fn is_measurement_only(&self, t: usize) -> bool {
        !self.timestamps[t].is_empty()
            && self.timestamps[t].iter().all(|op| op.kind.is_measurement())
    }

    /// Total stabilizer rounds at distance d.
    pub fn total_rounds(&self, d: u32) -> u32 {
        (0..self.timestamps.len())
            .filter(|&t| !self.is_measurement_only(t) && !self.timestamps[t].is_empty())
            .count() as u32
            * d
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("grid {} {}\n", self.grid.width, self.grid.height));
        for obs in &self.observables {
            out.push_str(&format!("observable {obs}\n"));
        }
        for (t, ops) in self.timestamps.iter().enumerate() {
            out.push_str(&format!("t {t}:\n"));
            for op in ops {
                out.push_str("  ");
                out.push_str(op.kind.mnemonic());
                for c in &op.cells {
                    out.push_str(&format!(" {c}"));
                }
                if let Some(q) = op.logical {
                    out.push_str(&format!(" q={q}"));
                }
                if let Some(ct) = op.cond_task {
                    out.push_str(&format!(" cond task={ct}"));
                }
                if let Some(tk) = op.task {
                    out.push_str(&format!(" task={tk}"));
                }
                out.push('\n');
            }
        }
        out
    }
}

/// Summary of the surface-level circuit parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Table1Metrics {
    pub total_surfaces: usize,
    pub avg_active_surfaces: f64,
    pub total_measurements: usize,
    pub feed_forward_gates: usize,
    pub ft_gate_count: usize,
    pub nft_block_count: usize,
    pub decoding_tasks: usize,
    pub avg_ff_latency_d_rounds: f64,
}

/// Compute the schedule census. Deterministic for a fixed schedule.
pub fn census(s: &SurfaceCircuit) -> Table1Metrics {
    let mut surfaces: BTreeSet<Cell> = BTreeSet::new();
    let mut active_sum = 0usize;
    let mut total_measurements = 0usize;
    let mut feed_forward_gates = 0usize;
    let mut ft_gate_count = 0usize;
    let mut nft_block_count = 0usize;
    let mut task_ids: BTreeSet<u32> = BTreeSet::new();

    // final measurement timestamp per task id (measurement events only)
    let mut task_last_meas: std::collections::HashMap<u32, usize> =
        std::collections::HashMap::new();
    for (t, ops) in s.timestamps.iter().enumerate() {
        for op in ops {
            if op.kind.measurement_events() > 0 {
                if let Some(id) = op.task {
                    let e = task_last_meas.entry(id).or_insert(t);
                    *e = (*e).max(t);
                }
            }
        }
    }

    let mut latency_sum = 0usize;
    let mut latency_n = 0usize;

    for (t, ops) in s.timestamps.iter().enumerate() {
        let mut active_here: BTreeSet<Cell> = BTreeSet::new();
        for op in ops {
            for c in &op.cells {
                surfaces.insert(*c);
                active_here.insert(*c);
            }
            total_measurements += op.kind.measurement_events();
            ft_gate_count += op.kind.ft_blocks(op.cells.len());
            if op.kind == SurfaceOpKind::InitMagic {
                nft_block_count += 1;
            }
            if let Some(ct) = op.cond_task {
                feed_forward_gates += 1;
                task_ids.insert(ct);
                if let Some(&tm) = task_last_meas.get(&ct) {
                    latency_sum += t.saturating_sub(tm);
                    latency_n += 1;
                }
            }
            if let Some(id) = op.task {
                task_ids.insert(id);
            }
        }
        active_sum += active_here.len();
    }

    let nts = s.timestamps.len().max(1);
    Table1Metrics {
        total_surfaces: surfaces.len(),
        avg_active_surfaces: active_sum as f64 / nts as f64,
        total_measurements,
        feed_forward_gates,
        ft_gate_count,
        nft_block_count,
        decoding_tasks: task_ids.len(),
        avg_ff_latency_d_rounds: if latency_n == 0 {
            0.0
        } else {
            latency_sum as f64 / latency_n as f64
        },
    }
}

/// Parse the surface-schedule text format: header `grid W H`, optional
/// `observable <pauli-string>` lines, then `t <k>:` blocks listing ops as
/// `KIND (r,c)[(r,c)...] [q=<id>] [cond task=<id>] [task=<id>]`.
pub fn parse_surface(text: &str) -> Result<SurfaceCircuit> {
    let mut grid: Option<SurfaceGrid> = None;
    let mut observables = Vec::new();
    let mut timestamps: Vec<Vec<SurfaceOp>> = Vec::new();
    let mut current: Option<usize> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let perr = |msg: String| SurfqError::Parse {
            line: lineno + 1,
            col: 1,
            msg,
        };

        if let Some(rest) = line.strip_prefix("grid ") {
            let mut it = rest.split_whitespace();
            let w: u32 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| perr("bad grid width".into()))?;
            let h: u32 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| perr("bad grid height".into()))?;
            grid = Some(SurfaceGrid::new(w, h));
            continue;
        }
        if let Some(rest) = line.strip_prefix("observable ") {
            let mut terms = Vec::new();
            for tok in rest.split_whitespace() {
                let (c, idx) = tok.split_at(1);
                let p = match c {
                    "X" => Pauli::X,
                    "Y" => Pauli::Y,
                    "Z" => Pauli::Z,
                    _ => return Err(perr(format!("bad pauli term `{tok}`"))),
                };
                let q: u32 = idx
                    .parse()
                    .map_err(|_| perr(format!("bad qubit index `{tok}`")))?;
                terms.push((q, p));
            }
            observables.push(Observable { terms });
            continue;
        }
        if let Some(rest) = line.strip_prefix("t ") {
            let k_str = rest.trim_end_matches(':').trim();
            let k: usize = k_str
                .parse()
                .map_err(|_| perr(format!("bad timestamp index `{k_str}`")))?;
            while timestamps.len() <= k {
                timestamps.push(Vec::new());
            }
            current = Some(k);
            continue;
        }

        // op line
        let t = current.ok_or_else(|| perr("op before any `t <k>:` block".into()))?;
        let mut toks = line.split_whitespace().peekable();
        let head = toks.next().unwrap();
        let kind = SurfaceOpKind::from_mnemonic(head)
            .ok_or_else(|| perr(format!("unknown surface op `{head}`")))?;
        let mut cells = Vec::new();
        let mut cond_task = None;
        let mut task = None;
        let mut logical = None;
        let mut expecting_cond_task = false;
        for tok in toks {
            if tok.starts_with('(') {
                // possibly several coords glued: (r,c)(r,c)
                for piece in tok.split(')').filter(|p| !p.is_empty()) {
                    let p = piece.trim_start_matches('(');
                    let mut nums = p.split(',');
                    let r: u32 = nums
                        .next()
                        .and_then(|s| s.trim().parse().ok())
                        .ok_or_else(|| perr(format!("bad coordinate `{tok}`")))?;
                    let c: u32 = nums
                        .next()
                        .and_then(|s| s.trim().parse().ok())
                        .ok_or_else(|| perr(format!("bad coordinate `{tok}`")))?;
                    cells.push(Cell::new(r, c));
                }
            } else if tok == "cond" {
                expecting_cond_task = true;
            } else if let Some(v) = tok.strip_prefix("task=") {
                let id: u32 = v
                    .parse()
                    .map_err(|_| perr(format!("bad task id `{tok}`")))?;
                if expecting_cond_task {
                    cond_task = Some(id);
                    expecting_cond_task = false;
                } else {
                    task = Some(id);
                }
            } else if let Some(v) = tok.strip_prefix("q=") {
                logical = Some(
                    v.parse()
                        .map_err(|_| perr(format!("bad logical id `{tok}`")))?,
                );
            } else {
                return Err(perr(format!("unexpected token `{tok}`")));
            }
        }
        if expecting_cond_task {
            return Err(perr("`cond` without task=<id>".into()));
        }
        if cells.is_empty() {
            return Err(perr("op without cells".into()));
        }
        timestamps[t].push(SurfaceOp {
            kind,
            cells,
            cond_task,
            task,
            logical,
        });
    }

    let grid = grid.ok_or_else(|| SurfqError::Parse {
        line: 1,
        col: 1,
        msg: "missing `grid W H` header".into(),
    })?;
    let circuit = SurfaceCircuit {
        grid,
        observables,
        timestamps,
    };
    validate(&circuit)?;
    Ok(circuit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_schedule() {
        let c = parse_surface("grid 3 3\n").unwrap();
        assert_eq!(c.timestamps.len(), 0);
        let m = census(&c);
        assert_eq!(m.total_surfaces, 0);
        assert_eq!(m.ft_gate_count, 0);
    }

    #[test]
    fn single_idle_surface() {
        let c = parse_surface("grid 2 2\nt 0:\n  INITZ (0,0) task=0\nt 1:\n  IDLE (0,0) task=0\n")
            .unwrap();
        let m = census(&c);
        assert_eq!(m.total_surfaces, 1);
        assert_eq!(m.ft_gate_count, 2);
        assert_eq!(m.total_measurements, 0);
        assert_eq!(m.decoding_tasks, 1);
    }

    #[test]
    fn double_booking_rejected() {
        let err = parse_surface(
            "grid 3 3\nt 0:\n  INITZ (0,0)\n  INITX (0,0)\n",
        )
        .unwrap_err();
        assert!(matches!(err, SurfqError::ScheduleInvariant { .. }));
    }

    #[test]
    fn round_trip() {
        let src = "grid 3 3\nobservable X0\nt 0:\n  INITZ (0,0) q=0 task=1\n  INITMAGIC (0,1) task=0\nt 1:\n  PARITYZZ (0,0) (0,1) task=0\nt 2:\n  MEASX (0,1) task=0\n  IDLE (0,0) task=1\nt 3:\n  INITS (0,1) task=1\n  IDLE (0,0) task=1\nt 4:\n  PARITYZZ (0,0) (0,1) cond task=0 task=1\nt 5:\n  MEASX (0,1) task=1\n  MEASX (0,0) task=1\n";
        let c = parse_surface(src).unwrap();
        let ser = c.serialize();
        let c2 = parse_surface(&ser).unwrap();
        assert_eq!(c, c2);
    }

    #[test]
    fn census_counts() {
        // CNOT-like block: init ancilla, two parities, measure out.
        let src = "grid 3 3\nt 0:\n  INITZ (0,0) q=0 task=0\n  INITZ (1,1) q=1 task=0\n  INITX (0,1) task=0\nt 1:\n  PARITYZZ (0,0) (0,1) task=0\n  IDLE (1,1) task=0\nt 2:\n  PARITYXX (0,1) (1,1) task=0\n  IDLE (0,0) task=0\nt 3:\n  MEASZ (0,1) task=0\n  IDLE (0,0) task=0\n  IDLE (1,1) task=0\n";
        let c = parse_surface(src).unwrap();
        let m = census(&c);
        assert_eq!(m.total_measurements, 3);
        assert_eq!(m.total_surfaces, 3);
        // t0: 3 inits = 3 FT; t1: parity 2 + idle 1; t2: parity 2 + idle 1;
        // t3: measz 1 + idles 2 = 12
        assert_eq!(m.ft_gate_count, 12);
        assert_eq!(m.nft_block_count, 0);
    }

    #[test]
    fn ff_latency() {
        let src = "grid 3 3\nt 0:\n  INITZ (0,0) q=0 task=1\n  INITMAGIC (0,1) task=0\nt 1:\n  PARITYZZ (0,0) (0,1) task=0\nt 2:\n  MEASX (0,1) task=0\n  IDLE (0,0) task=1\nt 3:\n  INITS (0,1) task=1\n  IDLE (0,0) task=1\nt 4:\n  PARITYZZ (0,0) (0,1) cond task=0 task=1\nt 5:\n  MEASX (0,1) task=1\n  MEASX (0,0) task=1\n";
        let c = parse_surface(src).unwrap();
        let m = census(&c);
        assert_eq!(m.feed_forward_gates, 1);
        // trigger task 0 final measurement at t=2, conditioned op at t=4
        assert!((m.avg_ff_latency_d_rounds - 2.0).abs() < 1e-12);
        assert_eq!(m.decoding_tasks, 2);
    }
}
