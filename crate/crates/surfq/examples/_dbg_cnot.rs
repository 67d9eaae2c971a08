use surfq::physical::{lower_physical, Instr, NoiseModel};
use surfq::surface::parse_surface;
use surfq::engine::reference_run;

fn main() {
    let src = "grid 2 2\nobservable Z0\nobservable Z1\nt 0:\n  INITZ (0,0) q=0 task=0\n  INITX (0,1) task=0\n  INITZ (1,1) q=1 task=0\nt 1:\n  PARITYZZ (0,0) (0,1) task=0\n  IDLE (1,1) task=0\nt 2:\n  PARITYXX (0,1) (1,1) task=0\n  IDLE (0,0) task=0\nt 3:\n  MEASZ (0,1) task=0\n  IDLE (0,0) task=0\n  IDLE (1,1) task=0\nt 4:\n  MEASZ (0,0) task=0\n  MEASZ (1,1) task=0\n";
    let s = parse_surface(src).unwrap();
    let pc = lower_physical(&s, 3, NoiseModel::noiseless()).unwrap();
    for i in &pc.instrs {
        if let Instr::Observable { id, meas, xor_const } = i {
            println!("observable {id}: const={xor_const} set={meas:?}");
        }
    }
    for seed in 0..20u64 {
        match reference_run(&pc, seed) {
            Ok(_) => println!("seed {seed}: ok"),
            Err(e) => println!("seed {seed}: {e}"),
        }
    }
}
