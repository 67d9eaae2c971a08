// Independent replay: process the lowered instruction stream through one
// global symbolic tableau and re-derive every observable definition.
use surfq::physical::{lower_physical, Instr, NoiseModel};
use surfq::surface::parse_surface;
use surfq::tableau::{SymTableau, QubitInit, MeasOutcome};
use surfq::pauli::Pauli;

fn main() {
    let src = "grid 2 2\nobservable Z0\nobservable Z1\nt 0:\n  INITZ (0,0) q=0 task=0\n  INITX (0,1) task=0\n  INITZ (1,1) q=1 task=0\nt 1:\n  PARITYZZ (0,0) (0,1) task=0\n  IDLE (1,1) task=0\nt 2:\n  PARITYXX (0,1) (1,1) task=0\n  IDLE (0,0) task=0\nt 3:\n  MEASZ (0,1) task=0\n  IDLE (0,0) task=0\n  IDLE (1,1) task=0\nt 4:\n  MEASZ (0,0) task=0\n  MEASZ (1,1) task=0\n";
    let s = parse_surface(src).unwrap();
    let pc = lower_physical(&s, 3, NoiseModel::noiseless()).unwrap();

    let mut tab = SymTableau::new();
    for q in 0..pc.num_qubits as u64 {
        tab.add_qubit(q, QubitInit::Zero);
    }
    let mut m = 0u32;
    let mut replay_claims: Vec<Option<(Vec<u32>, u8)>> = Vec::new();
    for ins in &pc.instrs {
        match ins {
            Instr::Reset(q) => tab.reset(*q as u64),
            Instr::H(q) => tab.apply_h(*q as u64),
            Instr::SqrtX(q) => tab.apply_sqrt_x(*q as u64),
            Instr::Cx(a, b) => tab.apply_cx(*a as u64, *b as u64),
            Instr::Measure { q, .. } => {
                let t = tab.row_from_sparse(&[(*q as u64, Pauli::Z)], false);
                match tab.measure_row(&t, m) {
                    MeasOutcome::Deterministic { set, constant } => {
                        replay_claims.push(Some((set.iter().collect(), constant)));
                    }
                    MeasOutcome::Random => replay_claims.push(None),
                }
                m += 1;
            }
            Instr::Detector { meas, xor_const, .. } => {
                // lowering claim: anchor = max index, set = rest
                let anchor = *meas.iter().max().unwrap();
                let rest: Vec<u32> = meas.iter().copied().filter(|&x| x != anchor).collect();
                match &replay_claims[anchor as usize] {
                    Some((rset, rc)) => {
                        if *rset != rest || (*rc != 0) != *xor_const {
                            println!("MISMATCH at meas {anchor}: lowering {{{rest:?}, {xor_const}}} vs replay {{{rset:?}, {rc}}}");
                        }
                    }
                    None => println!("MISMATCH at meas {anchor}: lowering det, replay RANDOM"),
                }
            }
            Instr::Observable { id, meas, xor_const } => {
                println!("lowering: obs {id} const={xor_const} set={meas:?}");
            }
            _ => {}
        }
    }
    println!("replay claim at 263: {:?}", replay_claims[263]);
    println!("replay claim at 279: {:?}", replay_claims[279]);
    for ins in &pc.instrs {
        if let Instr::Detector { meas, xor_const, .. } = ins {
            let anchor = *meas.iter().max().unwrap();
            if anchor == 263 || anchor == 279 || anchor == 243 || anchor == 244 {
                println!("lowering detector anchored {anchor}: {meas:?} const {xor_const}");
            }
        }
    }
    // map measurement index -> qubit site
    let mut midx = 0u32;
    let mut meas_site: Vec<(u32,(u32,u32))> = Vec::new();
    for ins in &pc.instrs {
        if let Instr::Measure { q, .. } = ins {
            meas_site.push((midx, pc.qubit_sites[*q as usize]));
            midx += 1;
        }
    }
    for &(i, s) in &meas_site {
        if [16, 243, 244, 263, 279, 17, 264, 280, 265, 281, 18, 267, 283, 20].contains(&i) {
            println!("meas {i} at site {s:?}");
        }
    }
    // any replay-deterministic measurement the lowering treated as random?
    let mut det_anchors: Vec<u32> = Vec::new();
    for ins in &pc.instrs {
        if let Instr::Detector { meas, .. } = ins {
            det_anchors.push(*meas.iter().max().unwrap());
        }
    }
    for (i, c) in replay_claims.iter().enumerate() {
        if c.is_some() && !det_anchors.contains(&(i as u32)) {
            println!("replay det at meas {i} but lowering emitted no detector");
        }
    }
    // Re-derive observables from geometry: Z0 at (0,0), Z1 at (1,1), d=3,
    // pitch 8: left columns.
    for (id, cell) in [(0u32, (0u32, 0u32)), (1, (1, 1))] {
        let sites: Vec<(u32, u32)> = (0..3).map(|i| (cell.0 * 8 + 2 * i + 1, cell.1 * 8 + 1)).collect();
        let qids: Vec<u64> = sites
            .iter()
            .map(|s| pc.qubit_sites.iter().position(|x| x == s).unwrap() as u64)
            .collect();
        let sparse: Vec<(u64, Pauli)> = qids.iter().map(|&q| (q, Pauli::Z)).collect();
        let row = tab.row_from_sparse(&sparse, false);
        match tab.peek_row(&row) {
            Some((set, c)) => {
                let mut v: Vec<u32> = set.iter().collect();
                v.sort();
                println!("replay:   obs {id} const={c} set={v:?}");
            }
            None => println!("replay:   obs {id} NOT deterministic"),
        }
    }
}
