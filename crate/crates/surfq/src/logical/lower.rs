//! Gate-set lowering passes: Toffoli elimination and Clifford substitution.

use super::{LogicalCircuit, LogicalOp, LogicalOpKind};

/// Replace every Toffoli with the canonical 7-T decomposition
/// (6 CNOTs, 7 T/T†, Hadamards on the target). All other ops pass through.
///
/// The target-qubit sequence interleaves T†/T with CNOTs from both controls;
/// the tail rotates the control pair. Gate counts are reproducible:
/// `t_count(out) = t_count(in) + 7·toffoli_count(in)`.
pub fn lower_to_surface_compatible(c: &LogicalCircuit) -> LogicalCircuit {
    let mut ops = Vec::with_capacity(c.ops.len());
    for op in &c.ops {
        match op.kind {
            LogicalOpKind::Toffoli => {
                let (a, b, t) = (op.targets[0], op.targets[1], op.targets[2]);
                let seq: [(LogicalOpKind, &[u32]); 15] = [
                    (LogicalOpKind::H, &[t]),
                    (LogicalOpKind::Cnot, &[b, t]),
                    (LogicalOpKind::Tdg, &[t]),
                    (LogicalOpKind::Cnot, &[a, t]),
                    (LogicalOpKind::T, &[t]),
                    (LogicalOpKind::Cnot, &[b, t]),
                    (LogicalOpKind::Tdg, &[t]),
                    (LogicalOpKind::Cnot, &[a, t]),
                    (LogicalOpKind::T, &[b]),
                    (LogicalOpKind::T, &[t]),
                    (LogicalOpKind::H, &[t]),
                    (LogicalOpKind::Cnot, &[a, b]),
                    (LogicalOpKind::T, &[a]),
                    (LogicalOpKind::Tdg, &[b]),
                    (LogicalOpKind::Cnot, &[a, b]),
                ];
                for (kind, targets) in seq {
                    ops.push(LogicalOp {
                        kind,
                        targets: targets.to_vec(),
                        tag: op.tag.clone(),
                    });
                }
            }
            _ => ops.push(op.clone()),
        }
    }
    LogicalCircuit {
        num_qubits: c.num_qubits,
        ops,
        observables: c.observables.clone(),
    }
}

/// Substitute every T with S and T† with S†, marking the substituted ops
/// with the `nft` tag (they become magic-injection sites downstream).
/// Idempotent: a Clifford-only circuit passes through unchanged.
pub fn cliffordize(c: &LogicalCircuit) -> LogicalCircuit {
    let ops = c
        .ops
        .iter()
        .map(|op| match op.kind {
            LogicalOpKind::T => LogicalOp::tagged(LogicalOpKind::S, op.targets.clone(), "nft"),
            LogicalOpKind::Tdg => LogicalOp::tagged(LogicalOpKind::Sdg, op.targets.clone(), "nft"),
            _ => op.clone(),
        })
        .collect();
    LogicalCircuit {
        num_qubits: c.num_qubits,
        ops,
        observables: c.observables.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logical::parse_logical;

    #[test]
    fn single_toffoli_counts() {
        let c = parse_logical("qubits 3\nTOFFOLI 0 1 2").unwrap();
        let l = lower_to_surface_compatible(&c);
        let census = l.census();
        assert_eq!(census.toffoli_count, 0);
        assert_eq!(census.t_count, 7);
        assert_eq!(*census.per_kind.get(&LogicalOpKind::Cnot).unwrap(), 6);
        assert_eq!(*census.per_kind.get(&LogicalOpKind::H).unwrap(), 2);
    }

    #[test]
    fn no_toffoli_is_identity() {
        let c = parse_logical("qubits 2\nINITZ 0\nH 0\nCNOT 0 1\nT 1\nMZ 0").unwrap();
        let l = lower_to_surface_compatible(&c);
        assert_eq!(c, l);
    }

    #[test]
    fn t_count_identity() {
        let c = parse_logical("qubits 4\nT 0\nTOFFOLI 0 1 2\nTDG 3\nTOFFOLI 1 2 3").unwrap();
        let pre = c.census();
        let l = lower_to_surface_compatible(&c);
        let post = l.census();
        assert_eq!(post.t_count, pre.t_count + 7 * pre.toffoli_count);
    }

    #[test]
    fn cliffordize_marks_sites() {
        let c = parse_logical("qubits 2\nT 0\nTDG 1\nS 0").unwrap();
        let cl = cliffordize(&c);
        assert_eq!(cl.ops.len(), 3);
        assert_eq!(cl.census().nft_count, 2);
        assert_eq!(cl.ops[0].kind, LogicalOpKind::S);
        assert_eq!(cl.ops[1].kind, LogicalOpKind::Sdg);
        assert!(cl.ops[2].tag.is_none());
        // idempotent
        let cl2 = cliffordize(&cl);
        assert_eq!(cl, cl2);
    }

    #[test]
    fn cliffordize_preserves_op_count() {
        let c = parse_logical("qubits 3\nTOFFOLI 0 1 2").unwrap();
        let l = lower_to_surface_compatible(&c);
        let cl = cliffordize(&l);
        assert_eq!(l.ops.len(), cl.ops.len());
        assert_eq!(cl.census().nft_count, 7);
    }
}
