//! Dense-matrix oracle for gate-set lowering: builds explicit unitaries for
//! small circuits and checks that lowering preserves them up to global
//! phase. Independent of every simulation path in the crate.

use num_complex::Complex64;
use surfq::logical::{
    lower_to_surface_compatible, LogicalCircuit, LogicalOp, LogicalOpKind, Observable,
};

type Mat = Vec<Vec<Complex64>>;

fn zero(n: usize) -> Mat {
    vec![vec![Complex64::new(0.0, 0.0); n]; n]
}

fn eye(n: usize) -> Mat {
    let mut m = zero(n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    m
}

fn matmul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let mut out = zero(n);
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

/// Expand a 1q gate matrix to the full register (qubit 0 = most significant).
fn embed1(n_qubits: usize, q: usize, g: [[Complex64; 2]; 2]) -> Mat {
    let n = 1 << n_qubits;
    let mut out = zero(n);
    let shift = n_qubits - 1 - q;
    for col in 0..n {
        let bit = (col >> shift) & 1;
        for (rbit, grow) in g.iter().enumerate() {
            let coeff = grow[bit];
            if coeff.norm_sqr() == 0.0 {
                continue;
            }
            let row = (col & !(1 << shift)) | (rbit << shift);
            out[row][col] += coeff;
        }
    }
    out
}

fn embed_cnot(n_qubits: usize, c: usize, t: usize) -> Mat {
    let n = 1 << n_qubits;
    let mut out = zero(n);
    let cs = n_qubits - 1 - c;
    let ts = n_qubits - 1 - t;
    for col in 0..n {
        let row = if (col >> cs) & 1 == 1 { col ^ (1 << ts) } else { col };
        out[row][col] = Complex64::new(1.0, 0.0);
    }
    out
}

fn embed_toffoli(n_qubits: usize, a: usize, b: usize, t: usize) -> Mat {
    let n = 1 << n_qubits;
    let mut out = zero(n);
    let (sa, sb, st) = (n_qubits - 1 - a, n_qubits - 1 - b, n_qubits - 1 - t);
    for col in 0..n {
        let row = if (col >> sa) & 1 == 1 && (col >> sb) & 1 == 1 {
            col ^ (1 << st)
        } else {
            col
        };
        out[row][col] = Complex64::new(1.0, 0.0);
    }
    out
}

fn gate_matrix(kind: LogicalOpKind) -> [[Complex64; 2]; 2] {
    let c = Complex64::new;
    let inv_sqrt2 = 1.0 / 2.0_f64.sqrt();
    match kind {
        LogicalOpKind::X => [[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]],
        LogicalOpKind::Z => [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]],
        LogicalOpKind::H => [
            [c(inv_sqrt2, 0.), c(inv_sqrt2, 0.)],
            [c(inv_sqrt2, 0.), c(-inv_sqrt2, 0.)],
        ],
        LogicalOpKind::S => [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(0., 1.)]],
        LogicalOpKind::Sdg => [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(0., -1.)]],
        LogicalOpKind::SqrtX => [
            [c(0.5, 0.5), c(0.5, -0.5)],
            [c(0.5, -0.5), c(0.5, 0.5)],
        ],
        LogicalOpKind::T => [
            [c(1., 0.), c(0., 0.)],
            [c(0., 0.), Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)],
        ],
        LogicalOpKind::Tdg => [
            [c(1., 0.), c(0., 0.)],
            [c(0., 0.), Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4)],
        ],
        _ => panic!("not a 1q unitary: {kind:?}"),
    }
}

fn circuit_unitary(c: &LogicalCircuit) -> Mat {
    let nq = c.num_qubits as usize;
    let mut u = eye(1 << nq);
    for op in &c.ops {
        let g = match op.kind {
            LogicalOpKind::Cnot => {
                embed_cnot(nq, op.targets[0] as usize, op.targets[1] as usize)
            }
            LogicalOpKind::Toffoli => embed_toffoli(
                nq,
                op.targets[0] as usize,
                op.targets[1] as usize,
                op.targets[2] as usize,
            ),
            LogicalOpKind::InitZ
            | LogicalOpKind::InitPlus
            | LogicalOpKind::MeasureZ
            | LogicalOpKind::MeasureX => panic!("non-unitary op in unitary oracle"),
            k => embed1(nq, op.targets[0] as usize, gate_matrix(k)),
        };
        u = matmul(&g, &u);
    }
    u
}

/// Matrices equal up to a global phase.
fn equal_up_to_phase(a: &Mat, b: &Mat) -> bool {
    let n = a.len();
    let mut phase: Option<Complex64> = None;
    for i in 0..n {
        for j in 0..n {
            let (x, y) = (a[i][j], b[i][j]);
            if x.norm() < 1e-10 && y.norm() < 1e-10 {
                continue;
            }
            if x.norm() < 1e-10 || y.norm() < 1e-10 {
                return false;
            }
            let r = y / x;
            match phase {
                None => phase = Some(r),
                Some(p) => {
                    if (r - p).norm() > 1e-9 {
                        return false;
                    }
                }
            }
        }
    }
    true
}

#[test]
fn toffoli_decomposition_matches_toffoli_unitary() {
    let tof = LogicalCircuit {
        num_qubits: 3,
        ops: vec![LogicalOp::new(LogicalOpKind::Toffoli, vec![0, 1, 2])],
        observables: vec![Observable {
            terms: vec![(0, surfq::pauli::Pauli::Z)],
        }],
    };
    let lowered = lower_to_surface_compatible(&tof);
    assert_eq!(lowered.census().toffoli_count, 0);
    assert_eq!(lowered.census().t_count, 7);
    let u_ref = circuit_unitary(&tof);
    let u_low = circuit_unitary(&lowered);
    assert!(
        equal_up_to_phase(&u_ref, &u_low),
        "7-T decomposition does not reproduce the Toffoli unitary"
    );
}

#[test]
fn toffoli_decomposition_all_target_orders() {
    for (a, b, t) in [(0u32, 1u32, 2u32), (2, 0, 1), (1, 2, 0), (0, 2, 1)] {
        let tof = LogicalCircuit {
            num_qubits: 3,
            ops: vec![LogicalOp::new(LogicalOpKind::Toffoli, vec![a, b, t])],
            observables: vec![Observable {
                terms: vec![(0, surfq::pauli::Pauli::Z)],
            }],
        };
        let lowered = lower_to_surface_compatible(&tof);
        assert!(
            equal_up_to_phase(&circuit_unitary(&tof), &circuit_unitary(&lowered)),
            "decomposition failed for targets ({a},{b},{t})"
        );
    }
}

#[test]
fn lowering_preserves_random_three_qubit_circuits() {
    // Deterministic LCG so the test is reproducible without extra deps.
    let mut state: u64 = 0x9e3779b97f4a7c15;
    let mut next = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 33) as u32
    };
    for _ in 0..25 {
        let mut ops = Vec::new();
        for _ in 0..12 {
            match next() % 8 {
                0 => ops.push(LogicalOp::new(LogicalOpKind::H, vec![next() % 3])),
                1 => ops.push(LogicalOp::new(LogicalOpKind::S, vec![next() % 3])),
                2 => ops.push(LogicalOp::new(LogicalOpKind::T, vec![next() % 3])),
                3 => ops.push(LogicalOp::new(LogicalOpKind::SqrtX, vec![next() % 3])),
                4 => {
                    let c = next() % 3;
                    let t = (c + 1 + next() % 2) % 3;
                    ops.push(LogicalOp::new(LogicalOpKind::Cnot, vec![c, t]));
                }
                5 => {
                    let a = next() % 3;
                    let b = (a + 1 + next() % 2) % 3;
                    let t = 3 - a - b;
                    ops.push(LogicalOp::new(LogicalOpKind::Toffoli, vec![a, b, t]));
                }
                6 => ops.push(LogicalOp::new(LogicalOpKind::Tdg, vec![next() % 3])),
                _ => ops.push(LogicalOp::new(LogicalOpKind::Z, vec![next() % 3])),
            }
        }
        let c = LogicalCircuit {
            num_qubits: 3,
            ops,
            observables: vec![Observable {
                terms: vec![(0, surfq::pauli::Pauli::Z)],
            }],
        };
        let lowered = lower_to_surface_compatible(&c);
        assert!(
            equal_up_to_phase(&circuit_unitary(&c), &circuit_unitary(&lowered)),
            "lowering changed a random 3-qubit circuit's unitary"
        );
    }
}
