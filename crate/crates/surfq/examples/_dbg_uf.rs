use surfq::decoder::{build_graph, decode_union_find, union_find::UfScratch, BOUNDARY};
use surfq::physical::{DemMechanism, DetectorErrorModel, StabType};

fn line_graph(n: u32, p: f64) -> surfq::decoder::DecodingGraph {
    let mut mechanisms = vec![DemMechanism { probability: p, detectors: vec![0], observables: vec![0] }];
    for i in 0..n - 1 {
        mechanisms.push(DemMechanism { probability: p, detectors: vec![i, i + 1], observables: vec![] });
    }
    mechanisms.push(DemMechanism { probability: p, detectors: vec![n - 1], observables: vec![] });
    build_graph(&DetectorErrorModel { mechanisms, num_detectors: n, num_observables: 1 },
                &vec![StabType::X; n as usize]).unwrap()
}

fn main() {
    let g = line_graph(9, 0.02);
    for (i, e) in g.edges.iter().enumerate() {
        let b = |x: u32| if x == BOUNDARY { "B".to_string() } else { x.to_string() };
        println!("edge {i}: {} - {} w={:.3}", b(e.a), b(e.b), e.weight);
    }
    let mut scratch = UfScratch::new(&g);
    let mut lcg: u64 = 12345;
    for trial in 0..300 {
        let mut defects = Vec::new();
        for d in 0..9u32 {
            lcg = lcg.wrapping_mul(6364136223846793005).wrapping_add(1);
            if (lcg >> 33) % 3 == 0 { defects.push(d); }
        }
        match decode_union_find(&g, &defects, &mut scratch) {
            Ok(r) => {
                let mut want = defects.clone();
                want.sort_unstable();
                if g.correction_boundary(&r.correction) != want {
                    println!("trial {trial}: WRONG boundary for defects {defects:?}");
                    return;
                }
            }
            Err(e) => {
                println!("trial {trial}: defects {defects:?} -> {e}");
                return;
            }
        }
    }
    println!("all ok");
}
