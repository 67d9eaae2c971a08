use surfq::physical::{extract_dem, lower_physical, NoiseModel, StabType};
use surfq::surface::parse_surface;
use std::collections::HashMap;

fn main() {
    let src = "grid 1 1\nobservable Z0\nt 0:\n  INITZ (0,0) q=0 task=0\nt 1:\n  IDLE (0,0) task=0\nt 2:\n  MEASZ (0,0) task=0\n";
    let s = parse_surface(src).unwrap();
    let pc = lower_physical(&s, 3, NoiseModel::uniform(0.001)).unwrap();
    let dem = extract_dem(&pc).unwrap();
    let types = pc.detector_types();
    // group mechanisms by per-side detector signature; count obs conflicts
    let mut sides: HashMap<(Vec<u32>, &str), Vec<(f64, bool)>> = HashMap::new();
    for m in &dem.mechanisms {
        let mut x = Vec::new();
        let mut z = Vec::new();
        for &d in &m.detectors {
            match types[d as usize] {
                StabType::X => x.push(d),
                StabType::Z => z.push(d),
            }
        }
        let flips = !m.observables.is_empty();
        if !x.is_empty() {
            sides.entry((x, "X")).or_default().push((m.probability, flips && z.is_empty()));
        }
        if !z.is_empty() {
            sides.entry((z, "Z")).or_default().push((m.probability, flips));
        }
    }
    let mut conflicts = 0;
    let mut over2 = 0;
    for ((sig, side), v) in &sides {
        let f: Vec<bool> = v.iter().map(|x| x.1).collect();
        if f.iter().any(|&a| a) && f.iter().any(|&a| !a) {
            conflicts += 1;
            if conflicts <= 8 {
                println!("conflict {side}-side sig {sig:?}: {v:?}");
            }
        }
        if sig.len() > 2 {
            over2 += 1;
        }
    }
    println!("signature groups: {}, obs conflicts: {conflicts}, >2-det sides: {over2}", sides.len());
}
