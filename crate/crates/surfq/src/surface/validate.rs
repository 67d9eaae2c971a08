//! Schedule invariant checking: patch lifecycles, path geometry, coverage,
//! and feed-forward commutation legality.

use super::{Cell, SurfaceCircuit, SurfaceOpKind};
use crate::error::{Result, SurfqError};
use std::collections::HashMap;

/// Derived structural facts about a valid schedule, shared by the physical
/// lowering and the task-graph extraction.
#[derive(Debug, Clone, Default)]
pub struct ScheduleInfo {
    /// Per timestamp: cell → index of the op touching it.
    pub activity: Vec<HashMap<Cell, usize>>,
    /// Per timestamp: logical qubit → hosting cell at the start of the slot.
    pub bindings: Vec<HashMap<u32, Cell>>,
    /// Logical qubit → (timestamp, op index) of its destructive measurement.
    pub final_measurements: HashMap<u32, (usize, usize)>,
}

fn inv(t: usize, c: Cell, msg: String) -> SurfqError {
    SurfqError::ScheduleInvariant {
        timestamp: t,
        row: c.row,
        col: c.col,
        msg,
    }
}

/// Check every schedule invariant; return the derived [`ScheduleInfo`].
pub fn validate(s: &SurfaceCircuit) -> Result<ScheduleInfo> {
    let mut live: HashMap<Cell, ()> = HashMap::new();
    let mut binding: HashMap<u32, Cell> = HashMap::new();
    let mut bound_cell: HashMap<Cell, u32> = HashMap::new();
    let mut info = ScheduleInfo::default();

    // Final measurement timestamp per task label (measurement events only),
    // needed for the conditioned-op ordering rule.
    let mut task_last_meas: HashMap<u32, usize> = HashMap::new();
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

    for (t, ops) in s.timestamps.iter().enumerate() {
        info.bindings.push(binding.clone());
        let mut seen: HashMap<Cell, usize> = HashMap::new();
        for (i, op) in ops.iter().enumerate() {
            for c in &op.cells {
                if !s.grid.in_range(c) {
                    return Err(inv(t, *c, "coordinate out of grid range".into()));
                }
                if let Some(prev) = seen.insert(*c, i) {
                    return Err(inv(
                        t,
                        *c,
                        format!("cell used by two ops in one timestamp (ops {prev} and {i})"),
                    ));
                }
            }
            match op.kind {
                SurfaceOpKind::InitZ
                | SurfaceOpKind::InitX
                | SurfaceOpKind::InitS
                | SurfaceOpKind::InitMagic => {
                    if op.cells.len() != 1 {
                        return Err(inv(t, op.cells[0], "init op must touch one cell".into()));
                    }
                    let c = op.cells[0];
                    if live.contains_key(&c) {
                        return Err(inv(t, c, "init on an occupied cell".into()));
                    }
                    live.insert(c, ());
                    if let Some(q) = op.logical {
                        if binding.contains_key(&q) {
                            return Err(inv(t, c, format!("logical qubit {q} already bound")));
                        }
                        binding.insert(q, c);
                        bound_cell.insert(c, q);
                    }
                }
                SurfaceOpKind::MeasureZ | SurfaceOpKind::MeasureX => {
                    if op.cells.len() != 1 {
                        return Err(inv(t, op.cells[0], "measure op must touch one cell".into()));
                    }
                    let c = op.cells[0];
                    if live.remove(&c).is_none() {
                        return Err(inv(t, c, "measurement of an empty cell".into()));
                    }
                    if let Some(q) = bound_cell.remove(&c) {
                        binding.remove(&q);
                        info.final_measurements.insert(q, (t, i));
                    }
                }
                SurfaceOpKind::Idle => {
                    let c = op.cells[0];
                    if !live.contains_key(&c) {
                        return Err(inv(t, c, "idle on an empty cell".into()));
                    }
                }
                SurfaceOpKind::ParityZZ | SurfaceOpKind::ParityXX | SurfaceOpKind::ParityZX => {
                    if op.cells.len() < 2 {
                        return Err(inv(t, op.cells[0], "parity needs two endpoints".into()));
                    }
                    for w in op.cells.windows(2) {
                        if !w[0].is_adjacent(&w[1]) {
                            return Err(inv(
                                t,
                                w[1],
                                format!("parity path breaks adjacency after {}", w[0]),
                            ));
                        }
                    }
                    let mut distinct = op.cells.clone();
                    distinct.sort();
                    distinct.dedup();
                    if distinct.len() != op.cells.len() {
                        return Err(inv(t, op.cells[0], "parity path revisits a cell".into()));
                    }
                    let (a, b) = (op.cells[0], *op.cells.last().unwrap());
                    for e in [a, b] {
                        if !live.contains_key(&e) {
                            return Err(inv(t, e, "parity endpoint has no live patch".into()));
                        }
                    }
                    for c in &op.cells[1..op.cells.len() - 1] {
                        if live.contains_key(c) {
                            return Err(inv(
                                t,
                                *c,
                                "parity route passes through an occupied cell".into(),
                            ));
                        }
                    }
                    // A `q=N` label on a parity op relocates the logical
                    // qubit from the first cell to the last (teleport-style
                    // gadgets); the source patch stays live but unbound.
                    if let Some(q) = op.logical {
                        if binding.get(&q) != Some(&a) {
                            return Err(inv(
                                t,
                                a,
                                format!("parity rebind: qubit {q} is not at the path head"),
                            ));
                        }
                        binding.insert(q, b);
                        bound_cell.remove(&a);
                        bound_cell.insert(b, q);
                    }
                }
                SurfaceOpKind::Teleport => {
                    if op.cells.len() != 2 {
                        return Err(inv(t, op.cells[0], "teleport takes [src, dst]".into()));
                    }
                    let (src, dst) = (op.cells[0], op.cells[1]);
                    if !live.contains_key(&src) {
                        return Err(inv(t, src, "teleport source has no live patch".into()));
                    }
                    if live.contains_key(&dst) {
                        return Err(inv(t, dst, "teleport destination occupied".into()));
                    }
                    if !src.is_adjacent(&dst) {
                        return Err(inv(t, dst, "teleport cells must be adjacent".into()));
                    }
                    live.remove(&src);
                    live.insert(dst, ());
                    if let Some(q) = bound_cell.remove(&src) {
                        binding.insert(q, dst);
                        bound_cell.insert(dst, q);
                    }
                }
            }
            if let Some(ct) = op.cond_task {
                match task_last_meas.get(&ct) {
                    None => {
                        return Err(inv(
                            t,
                            op.cells[0],
                            format!("conditioned op references unknown task {ct}"),
                        ))
                    }
                    Some(&tm) if tm >= t => {
                        return Err(inv(
                            t,
                            op.cells[0],
                            format!(
                                "conditioned op at t={t} but task {ct} final measurement is t={tm}"
                            ),
                        ))
                    }
                    _ => {}
                }
            }
        }

        // Coverage: every live patch participates in every round-consuming
        // timestamp (idling is explicit so FT block counts stay exact).
        let measurement_only =
            !ops.is_empty() && ops.iter().all(|o| o.kind.is_measurement());
        if !measurement_only {
            for c in live.keys() {
                if !seen.contains_key(c) {
                    return Err(inv(t, *c, "live patch not covered in timestamp".into()));
                }
            }
        }
        info.activity.push(seen);
    }

    check_feedforward_commutation(s, &task_last_meas)?;
    Ok(info)
}

/// A pending S-type correction is diagonal in the logical Z basis: idling,
/// ZZ parities, Z measurement, and teleportation commute with it; X-type
/// parities, X measurement, and H-style routes do not. Verify every
/// conditioned op only defers past commuting gates on its target qubit.
fn check_feedforward_commutation(
    s: &SurfaceCircuit,
    task_last_meas: &HashMap<u32, usize>,
) -> Result<()> {
    for (tc, ops) in s.timestamps.iter().enumerate() {
        for op in ops {
            let Some(ct) = op.cond_task else { continue };
            let tm = task_last_meas[&ct];
            // Identify the correction target: the parity endpoint that is not
            // the freshly prepared |S⟩ patch. For single-cell conditioned ops
            // the single cell is the target.
            let mut target = op.cells[0];
            if op.kind.is_parity() {
                let a = op.cells[0];
                let b = *op.cells.last().unwrap();
                // The |S⟩ resource patch is the endpoint initialized after the
                // trigger measurement; prefer the other one.
                let fresh_after = |cell: Cell| -> bool {
                    s.timestamps[tm + 1..tc].iter().any(|tops| {
                        tops.iter().any(|o| {
                            matches!(
                                o.kind,
                                SurfaceOpKind::InitS | SurfaceOpKind::InitMagic
                            ) && o.cells[0] == cell
                        })
                    })
                };
                target = if fresh_after(a) && !fresh_after(b) {
                    b
                } else if fresh_after(b) && !fresh_after(a) {
                    a
                } else {
                    a
                };
            }
            let mut cell = target;
            'walk: for (t, tops) in s.timestamps.iter().enumerate().take(tc).skip(tm + 1) {
                for o in tops {
                    if !o.cells.contains(&cell) {
                        continue;
                    }
                    match o.kind {
                        SurfaceOpKind::Idle | SurfaceOpKind::ParityZZ | SurfaceOpKind::InitS => {}
                        SurfaceOpKind::MeasureZ => break 'walk,
                        SurfaceOpKind::Teleport => {
                            if o.cells[0] == cell {
                                cell = o.cells[1];
                            }
                        }
                        k => {
                            return Err(inv(
                                t,
                                cell,
                                format!(
                                    "op {} does not commute with the pending correction of task {ct}",
                                    k.mnemonic()
                                ),
                            ))
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::parse_surface;

    #[test]
    fn coverage_enforced() {
        let err = parse_surface(
            "grid 2 2\nt 0:\n  INITZ (0,0)\n  INITZ (0,1)\nt 1:\n  IDLE (0,0)\n",
        )
        .unwrap_err();
        match err {
            SurfqError::ScheduleInvariant { timestamp, .. } => assert_eq!(timestamp, 1),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn parity_route_through_patch_rejected() {
        let err = parse_surface(
            "grid 3 1\nt 0:\n  INITZ (0,0)\n  INITZ (0,1)\n  INITZ (0,2)\nt 1:\n  PARITYZZ (0,0) (0,1) (0,2)\n",
        )
        .unwrap_err();
        assert!(matches!(err, SurfqError::ScheduleInvariant { .. }));
    }

    #[test]
    fn conditioned_before_trigger_rejected() {
        let err = parse_surface(
            "grid 3 1\nt 0:\n  INITZ (0,0) q=0 task=1\n  INITMAGIC (0,1) task=0\nt 1:\n  PARITYZZ (0,0) (0,1) cond task=0 task=1\n  # trigger task 0 has no measurement yet\n",
        )
        .unwrap_err();
        assert!(matches!(err, SurfqError::ScheduleInvariant { .. }));
    }

    #[test]
    fn noncommuting_deferral_rejected() {
        // An XX parity on the pending qubit between trigger and correction.
        let err = parse_surface(
            "grid 3 3\nt 0:\n  INITZ (1,1) q=0 task=1\n  INITMAGIC (1,2) task=0\n  INITX (2,1) task=1\nt 1:\n  PARITYZZ (1,1) (1,2) task=0\n  IDLE (2,1) task=1\nt 2:\n  MEASX (1,2) task=0\n  IDLE (1,1) task=1\n  IDLE (2,1) task=1\nt 3:\n  PARITYXX (1,1) (2,1) task=1\nt 4:\n  INITS (1,2) task=1\n  IDLE (1,1) task=1\n  IDLE (2,1) task=1\nt 5:\n  PARITYZZ (1,1) (1,2) cond task=0 task=1\n  IDLE (2,1) task=1\n",
        )
        .unwrap_err();
        match err {
            SurfqError::ScheduleInvariant { timestamp, msg, .. } => {
                assert_eq!(timestamp, 3);
                assert!(msg.contains("commute"));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn teleport_moves_binding() {
        let src = "grid 3 1\nt 0:\n  INITZ (0,0) q=0 task=0\nt 1:\n  TELEPORT (0,0) (0,1) task=0\nt 2:\n  IDLE (0,1) task=0\nt 3:\n  MEASZ (0,1) task=0\n";
        let c = parse_surface(src).unwrap();
        let info = validate(&c).unwrap();
        assert_eq!(info.final_measurements[&0], (3, 0));
        assert_eq!(info.bindings[2][&0], Cell::new(0, 1));
    }
}
