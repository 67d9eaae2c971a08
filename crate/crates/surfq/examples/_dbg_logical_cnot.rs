// Logical-level lattice CNOT: |0>_c |+>_a |0>_t, M_ZZ(c,a), M_XX(a,t),
// MZ(a), then readouts. Compare symbolic relations against concrete runs.
use surfq::tableau::{SymTableau, QubitInit, MeasOutcome};
use surfq::engine::ChpTableau;
use surfq::pauli::Pauli;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sym = SymTableau::new();
        sym.add_qubit(0, QubitInit::Zero); // control
        sym.add_qubit(1, QubitInit::Plus); // ancilla
        sym.add_qubit(2, QubitInit::Zero); // target
        let mut chp = ChpTableau::new(3);
        chp.h(1);
        let mut bits = Vec::new();
        let mut rels: Vec<(u32, Vec<u32>, u8)> = Vec::new();
        let mut step = |sym: &mut SymTableau, chp: &mut ChpTableau, terms: &[(u64, Pauli)],
                        bits: &mut Vec<bool>, rels: &mut Vec<(u32, Vec<u32>, u8)>,
                        rng: &mut ChaCha8Rng| {
            let idx = bits.len() as u32;
            let t = sym.row_from_sparse(terms, false);
            let out = sym.measure_row(&t, idx);
            let cterms: Vec<(usize, Pauli)> =
                terms.iter().map(|&(q, p)| (q as usize, p)).collect();
            let cb = chp.measure_joint(&cterms, rng);
            bits.push(cb);
            if let MeasOutcome::Deterministic { set, constant } = out {
                rels.push((idx, set.iter().collect(), constant));
            }
        };
        step(&mut sym, &mut chp, &[(0, Pauli::Z), (1, Pauli::Z)], &mut bits, &mut rels, &mut rng);
        step(&mut sym, &mut chp, &[(1, Pauli::X), (2, Pauli::X)], &mut bits, &mut rels, &mut rng);
        step(&mut sym, &mut chp, &[(1, Pauli::Z)], &mut bits, &mut rels, &mut rng);
        step(&mut sym, &mut chp, &[(0, Pauli::Z)], &mut bits, &mut rels, &mut rng);
        step(&mut sym, &mut chp, &[(2, Pauli::Z)], &mut bits, &mut rels, &mut rng);
        for (idx, set, c) in &rels {
            let mut v = *c != 0;
            v ^= bits[*idx as usize];
            for m in set { v ^= bits[*m as usize]; }
            if v {
                println!("seed {seed}: violated relation at meas {idx} = {set:?} ^ {c}");
                println!("  bits: {bits:?}");
                return;
            }
        }
    }
    println!("logical CNOT consistent over 50 seeds");
}
