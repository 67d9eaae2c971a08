use surfq::decoder::{build_graph, decode_union_find, union_find::UfScratch};
use surfq::engine::frame_sample;
use surfq::physical::{extract_dem, lower_physical, NoiseModel};
use surfq::surface::parse_surface;

fn main() {
    let src = "grid 1 1\nobservable Z0\nt 0:\n  INITZ (0,0) q=0 task=0\nt 1:\n  IDLE (0,0) task=0\nt 2:\n  MEASZ (0,0) task=0\n";
    let s = parse_surface(src).unwrap();
    let pc = lower_physical(&s, 3, NoiseModel::uniform(0.001)).unwrap();
    let dem = extract_dem(&pc).unwrap();
    let g = build_graph(&dem, &pc.detector_types()).unwrap();
    let shots = 50_000u64;
    let batch = frame_sample(&pc, shots, 11);
    let mut scratch = UfScratch::new(&g);
    let mut stats = [[0u64; 2]; 3]; // [defect class][mismatch]
    let mut obs_flips_no_defect = 0u64;
    for shot in 0..shots {
        let (w, b) = ((shot / 64) as usize, shot % 64);
        let mut defects = Vec::new();
        for d in 0..batch.num_detectors {
            if batch.det_words[d as usize][w] >> b & 1 != 0 {
                defects.push(d);
            }
        }
        let actual = batch.obs_words[0][w] >> b & 1;
        let r = decode_union_find(&g, &defects, &mut scratch).unwrap();
        let pred = r.observable_flips & 1;
        let mismatch = (pred != actual) as usize;
        let class = defects.len().min(2);
        stats[class][mismatch] += 1;
        if defects.is_empty() && actual == 1 {
            obs_flips_no_defect += 1;
        }
    }
    for (c, name) in [(0, "0 defects"), (1, "1 defect"), (2, "2+ defects")] {
        let tot = stats[c][0] + stats[c][1];
        println!(
            "{name}: {tot} shots, mismatch rate {:.4}",
            stats[c][1] as f64 / tot.max(1) as f64
        );
    }
    println!("obs flips with no defects: {obs_flips_no_defect}");
    // how many single-defect cases does the oracle agree on?
    println!("edges with obs mask: {}", g.edges.iter().filter(|e| e.obs_mask != 0).count());
}
