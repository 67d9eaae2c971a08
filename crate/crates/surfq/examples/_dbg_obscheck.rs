use surfq::physical::{lower_physical, NoiseModel};
use surfq::surface::parse_surface;
use surfq::engine::{ChpTableau};
use surfq::physical::Instr;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let src = "grid 2 2\nobservable Z0\nobservable Z1\nt 0:\n  INITZ (0,0) q=0 task=0\n  INITX (0,1) task=0\n  INITZ (1,1) q=1 task=0\nt 1:\n  PARITYZZ (0,0) (0,1) task=0\n  IDLE (1,1) task=0\nt 2:\n  PARITYXX (0,1) (1,1) task=0\n  IDLE (0,0) task=0\nt 3:\n  MEASZ (0,1) task=0\n  IDLE (0,0) task=0\n  IDLE (1,1) task=0\nt 4:\n  MEASZ (0,0) task=0\n  MEASZ (1,1) task=0\n";
    let s = parse_surface(src).unwrap();
    let pc = lower_physical(&s, 3, NoiseModel::noiseless()).unwrap();
    let lowering_obs1: Vec<u32> = vec![21, 23, 265, 312, 313, 314, 317, 320];
    let replay_obs1: Vec<u32> = vec![16, 18, 21, 23, 243, 244, 314, 317, 320];
    let mut fails_low = 0;
    let mut fails_rep = 0;
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tab = ChpTableau::new(pc.num_qubits as usize);
        let mut bits: Vec<bool> = Vec::new();
        for ins in &pc.instrs {
            match ins {
                Instr::Reset(q) => tab.reset_z(*q as usize, &mut rng),
                Instr::H(q) => tab.h(*q as usize),
                Instr::SqrtX(q) => tab.sqrt_x(*q as usize),
                Instr::Cx(a, b) => tab.cx(*a as usize, *b as usize),
                Instr::Measure { q, .. } => bits.push(tab.measure_z(*q as usize, &mut rng)),
                _ => {}
            }
        }
        let eval = |set: &[u32]| set.iter().fold(false, |a, &m| a ^ bits[m as usize]);
        if eval(&lowering_obs1) { fails_low += 1; }
        if eval(&replay_obs1) { fails_rep += 1; }
    }
    println!("lowering obs1 fails: {fails_low}/200, replay obs1 fails: {fails_rep}/200");
}
