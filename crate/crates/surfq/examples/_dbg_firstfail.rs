use surfq::physical::{lower_physical, Instr, NoiseModel};
use surfq::surface::parse_surface;
use surfq::tableau::{SymTableau, QubitInit, MeasOutcome};
use surfq::engine::ChpTableau;
use surfq::pauli::Pauli;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let src = "grid 2 2\nobservable Z0\nobservable Z1\nt 0:\n  INITZ (0,0) q=0 task=0\n  INITX (0,1) task=0\n  INITZ (1,1) q=1 task=0\nt 1:\n  PARITYZZ (0,0) (0,1) task=0\n  IDLE (1,1) task=0\nt 2:\n  PARITYXX (0,1) (1,1) task=0\n  IDLE (0,0) task=0\nt 3:\n  MEASZ (0,1) task=0\n  IDLE (0,0) task=0\n  IDLE (1,1) task=0\nt 4:\n  MEASZ (0,0) task=0\n  MEASZ (1,1) task=0\n";
    let s = parse_surface(src).unwrap();
    let pc = lower_physical(&s, 3, NoiseModel::noiseless()).unwrap();
    for seed in 0..30u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sym = SymTableau::new();
        for q in 0..pc.num_qubits as u64 {
            sym.add_qubit(q, QubitInit::Zero);
        }
        let mut chp = ChpTableau::new(pc.num_qubits as usize);
        let mut bits: Vec<bool> = Vec::new();
        let mut m = 0u32;
        let mut bad = false;
        for ins in &pc.instrs {
            match ins {
                Instr::Reset(q) => {
                    chp.reset_z(*q as usize, &mut rng);
                    sym.reset(*q as u64);
                }
                Instr::H(q) => { chp.h(*q as usize); sym.apply_h(*q as u64); }
                Instr::SqrtX(q) => { chp.sqrt_x(*q as usize); sym.apply_sqrt_x(*q as u64); }
                Instr::Cx(a, b) => { chp.cx(*a as usize, *b as usize); sym.apply_cx(*a as u64, *b as u64); }
                Instr::Measure { q, .. } => {
                    let t = sym.row_from_sparse(&[(*q as u64, Pauli::Z)], false);
                    let out = sym.measure_row(&t, m);
                    let cb = chp.measure_z(*q as usize, &mut rng);
                    bits.push(cb);
                    if let MeasOutcome::Deterministic { set, constant } = out {
                        let mut v = constant != 0;
                        v ^= cb;
                        for mm in set.iter() { v ^= bits[mm as usize]; }
                        if v {
                            let site = pc.qubit_sites[*q as usize];
                            println!("seed {seed}: FIRST VIOLATION at meas {m} qubit {q} site {site:?}: set {:?} const {constant}", set.iter().collect::<Vec<_>>());
                            bad = true;
                        }
                    }
                    m += 1;
                    if bad { break; }
                }
                _ => {}
            }
        }
        if bad { return; }
        // audit every stabilizer row's honesty on the concrete state
        for (terms, anc, sign) in sym.dump_rows() {
            if terms.is_empty() { continue; }
            let cterms: Vec<(usize, Pauli)> = terms.iter().map(|&(q, p)| (q as usize, p)).collect();
            let cb = chp.measure_joint(&cterms, &mut rng);
            let mut want = sign != 0;
            for mm in &anc { want ^= bits[*mm as usize]; }
            if cb != want {
                let sites: Vec<_> = terms.iter().map(|&(q, _)| pc.qubit_sites[q as usize]).collect();
                println!("seed {seed}: DISHONEST ROW {terms:?} sites {sites:?} anc {anc:?} sign {sign}");
            }
        }
        // peek both observables at the end and evaluate concretely
        for (id, cell) in [(0u32, (0u32, 0u32)), (1, (1, 1))] {
            let sites: Vec<(u32, u32)> =
                (0..3).map(|i| (cell.0 * 8 + 2 * i + 1, cell.1 * 8 + 1)).collect();
            let sparse: Vec<(u64, Pauli)> = sites
                .iter()
                .map(|st| {
                    (pc.qubit_sites.iter().position(|x| x == st).unwrap() as u64, Pauli::Z)
                })
                .collect();
            let row = sym.row_from_sparse(&sparse, false);
            match sym.peek_row(&row) {
                Some((set, c)) => {
                    let mut v = c != 0;
                    for mm in set.iter() { v ^= bits[mm as usize]; }
                    if v {
                        println!("seed {seed}: OBSERVABLE {id} peek violated: set {:?} const {c}", set.iter().collect::<Vec<_>>());
                        let members = sym.dump_peek_members(&row);
                        let rows = sym.dump_rows();
                        for &mi in &members {
                            let (terms, anc, sign) = &rows[mi];
                            let sites: Vec<_> = terms.iter().map(|&(q, _)| pc.qubit_sites[q as usize]).collect();
                            // concrete eigenvalue of this row
                            let cterms: Vec<(usize, Pauli)> = terms.iter().map(|&(q, p)| (q as usize, p)).collect();
                            let cb = chp.measure_joint(&cterms, &mut rng);
                            let mut want = *sign != 0;
                            for mm in anc { want ^= bits[*mm as usize]; }
                            println!("  member {mi}: sites {sites:?} anc {anc:?} sign {sign} concrete {cb} want {want}");
                        }
                        return;
                    }
                }
                None => println!("seed {seed}: obs {id} peek None"),
            }
        }
    }
    println!("done");
}
