use surfq::physical::{lower_physical, Instr, NoiseModel};
use surfq::surface::parse_surface;

fn main() {
    let src = "grid 2 2\nobservable Z0\nobservable Z1\nt 0:\n  INITZ (0,0) q=0 task=0\n  INITX (0,1) task=0\n  INITZ (1,1) q=1 task=0\nt 1:\n  PARITYZZ (0,0) (0,1) task=0\n  IDLE (1,1) task=0\nt 2:\n  PARITYXX (0,1) (1,1) task=0\n  IDLE (0,0) task=0\nt 3:\n  MEASZ (0,1) task=0\n  IDLE (0,0) task=0\n  IDLE (1,1) task=0\nt 4:\n  MEASZ (0,0) task=0\n  MEASZ (1,1) task=0\n";
    let s = parse_surface(src).unwrap();
    let pc = lower_physical(&s, 3, NoiseModel::noiseless()).unwrap();
    let site = |q: u32| pc.qubit_sites[q as usize];
    // find the qubit id at site (8,10)
    let anc = pc.qubit_sites.iter().position(|&s| s == (8, 10)).unwrap() as u32;
    println!("ancilla (8,10) = qubit {anc}");
    let mut m = 0u32;
    for ins in &pc.instrs {
        match ins {
            Instr::Measure { q, .. } => {
                if *q == anc {
                    println!("meas {m} on {anc}");
                }
                m += 1;
            }
            Instr::Cx(a, b) => {
                if *a == anc || *b == anc {
                    println!("  (pre-meas {m}) CX {:?} -> {:?}", site(*a), site(*b));
                }
            }
            Instr::Reset(q) if *q == anc => println!("  (pre-meas {m}) RESET (8,10)"),
            _ => {}
        }
    }
}
