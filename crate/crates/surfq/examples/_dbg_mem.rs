use surfq::decoder::{build_graph, estimate_logical_error};
use surfq::engine::frame_sample;
use surfq::physical::{extract_dem, lower_physical, NoiseModel};
use surfq::surface::parse_surface;

fn main() {
    for d in [3u32, 5] {
        for p in [0.001f64, 0.002, 0.003] {
            let src = "grid 1 1\nobservable Z0\nt 0:\n  INITZ (0,0) q=0 task=0\nt 1:\n  IDLE (0,0) task=0\nt 2:\n  MEASZ (0,0) task=0\n";
            let s = parse_surface(src).unwrap();
            let pc = lower_physical(&s, d, NoiseModel::uniform(p)).unwrap();
            let dem = extract_dem(&pc).unwrap();
            let g = build_graph(&dem, &pc.detector_types()).unwrap();
            let batch = frame_sample(&pc, 100_000, 11);
            let est = estimate_logical_error(&batch, &g).unwrap();
            println!(
                "d={d} p={p}: logical={:.5} [{:.5},{:.5}] defects/shot={:.2} edges={} mechs={}",
                est.any_observable.rate,
                est.any_observable.ci_low,
                est.any_observable.ci_high,
                est.mean_defects,
                g.edges.len(),
                dem.mechanisms.len()
            );
        }
    }
}
