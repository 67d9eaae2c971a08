//! Implementation-size metrics extracted from a physical circuit.

use super::{Instr, MeasKind, PhysicalCircuit};

/// Physical-level resource summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Table2Metrics {
    pub physical_qubits: u32,
    pub max_active_qubits: u32,
    pub max_parallel_2q: u32,
    pub max_parallel_meas: u32,
    pub total_physical_measurements: u64,
    pub avg_bits_per_round: f64,
    pub total_stabilizer_rounds: u32,
}

/// Walk the instruction stream. A stabilizer round is a tick window holding
/// at least one stabilizer (ancilla) measurement; gate layers are delimited
/// by barriers, and two-qubit parallelism is the largest single layer.
pub fn physical_metrics(pc: &PhysicalCircuit) -> Table2Metrics {
    let mut total_meas: u64 = 0;
    let mut rounds: u32 = 0;

    let mut window_qubits: std::collections::HashSet<u32> = std::collections::HashSet::new();
    let mut window_meas: u32 = 0;
    let mut window_has_stab = false;
    let mut layer_2q: u32 = 0;

    let mut max_active = 0u32;
    let mut max_2q = 0u32;
    let mut max_meas = 0u32;

    for i in &pc.instrs {
        match i {
            Instr::Reset(q) | Instr::H(q) | Instr::SqrtX(q) => {
                window_qubits.insert(*q);
            }
            Instr::Cx(a, b) => {
                window_qubits.insert(*a);
                window_qubits.insert(*b);
                layer_2q += 1;
            }
            Instr::Barrier => {
                max_2q = max_2q.max(layer_2q);
                layer_2q = 0;
            }
            Instr::Measure { q, kind, .. } => {
                window_qubits.insert(*q);
                window_meas += 1;
                total_meas += 1;
                if *kind == MeasKind::Stabilizer {
                    window_has_stab = true;
                }
            }
            Instr::Tick => {
                if window_has_stab {
                    rounds += 1;
                }
                max_active = max_active.max(window_qubits.len() as u32);
                max_meas = max_meas.max(window_meas);
                max_2q = max_2q.max(layer_2q);
                window_qubits.clear();
                window_meas = 0;
                window_has_stab = false;
                layer_2q = 0;
            }
            _ => {}
        }
    }
    if !window_qubits.is_empty() || window_meas > 0 {
        if window_has_stab {
            rounds += 1;
        }
        max_active = max_active.max(window_qubits.len() as u32);
        max_meas = max_meas.max(window_meas);
        max_2q = max_2q.max(layer_2q);
    }

    Table2Metrics {
        physical_qubits: pc.num_qubits,
        max_active_qubits: max_active,
        max_parallel_2q: max_2q,
        max_parallel_meas: max_meas,
        total_physical_measurements: total_meas,
        avg_bits_per_round: if rounds == 0 {
            0.0
        } else {
            total_meas as f64 / rounds as f64
        },
        total_stabilizer_rounds: rounds,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physical::{lower_physical, NoiseModel};
    use crate::surface::parse_surface;

    #[test]
    fn empty_circuit_metrics() {
        let pc = PhysicalCircuit::default();
        let m = physical_metrics(&pc);
        assert_eq!(m.total_physical_measurements, 0);
        assert_eq!(m.total_stabilizer_rounds, 0);
        assert_eq!(m.avg_bits_per_round, 0.0);
    }

    #[test]
    fn memory_block_rounds() {
        let src = "grid 1 1\nobservable Z0\nt 0:\n  INITZ (0,0) q=0 task=0\nt 1:\n  IDLE (0,0) task=0\nt 2:\n  MEASZ (0,0) task=0\n";
        let s = parse_surface(src).unwrap();
        for d in [3u32, 5] {
            let pc = lower_physical(&s, d, NoiseModel::noiseless()).unwrap();
            let m = physical_metrics(&pc);
            assert_eq!(m.total_stabilizer_rounds, 2 * d);
            assert_eq!(m.physical_qubits, 2 * d * d - 1);
            assert_eq!(
                m.total_physical_measurements,
                ((d * d - 1) * 2 * d + d * d) as u64
            );
            assert!(m.max_active_qubits >= 2 * d * d - 1);
            assert!(m.max_parallel_2q >= (d * d - 1) / 2);
        }
    }
}
