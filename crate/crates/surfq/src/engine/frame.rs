//! Bit-packed Pauli-frame Monte Carlo sampler.
//!
//! 64 shots propagate per machine word. Detectors and observables are
//! reference-relative parities, so only error flips need tracking: noise
//! channels XOR sampled Pauli masks into per-qubit X/Z frame planes, gates
//! permute the planes, and measurements snapshot the X plane. Each 64-shot
//! word owns a counter-based RNG stream keyed by its absolute word index,
//! so results are reproducible for any worker count and any partitioning
//! into sub-batches.

use super::ShotBatch;
use crate::physical::{Instr, PhysicalCircuit};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Cumulative Binomial(64, p) table for drawing per-word flip counts from a
/// single uniform variate.
struct BinomTable {
    cum: Vec<f64>,
}

impl BinomTable {
    fn new(p: f64) -> Self {
        let mut cum = Vec::with_capacity(16);
        let q = 1.0 - p;
        let mut pk = q.powi(64); // P[k = 0]
        let mut acc = pk;
        cum.push(acc);
        let mut k = 0f64;
        while acc < 1.0 - 1e-15 && cum.len() <= 64 {
            // p(k+1) = p(k) · (64−k)/(k+1) · p/q
            pk *= (64.0 - k) / (k + 1.0) * (p / q);
            k += 1.0;
            acc += pk;
            cum.push(acc);
        }
        BinomTable { cum }
    }

    fn sample(&self, rng: &mut impl Rng) -> u32 {
        let u: f64 = rng.gen();
        match self.cum.iter().position(|&c| u < c) {
            Some(k) => k as u32,
            None => (self.cum.len() - 1) as u32,
        }
    }
}

/// Sample a 64-bit mask with each bit set independently with probability p.
fn sample_mask(table: &BinomTable, rng: &mut impl Rng) -> u64 {
    let k = table.sample(rng);
    let mut mask = 0u64;
    let mut placed = 0;
    while placed < k {
        let bit = rng.gen_range(0..64u32);
        let b = 1u64 << bit;
        if mask & b == 0 {
            mask |= b;
            placed += 1;
        }
    }
    mask
}

struct NoiseTables {
    probs: Vec<f64>,
    tables: Vec<BinomTable>,
}

impl NoiseTables {
    fn new() -> Self {
        NoiseTables {
            probs: Vec::new(),
            tables: Vec::new(),
        }
    }

    fn get(&mut self, p: f64) -> usize {
        if let Some(i) = self.probs.iter().position(|&q| q == p) {
            return i;
        }
        self.probs.push(p);
        self.tables.push(BinomTable::new(p));
        self.probs.len() - 1
    }
}

/// Pre-resolved instruction stream (noise tables interned).
enum Step {
    Reset(u32),
    H(u32),
    SqrtX(u32),
    Cx(u32, u32),
    Measure { q: u32, table: Option<usize> },
    Depol1 { q: u32, table: usize },
    Depol2 { a: u32, b: u32, table: usize },
    Detector { meas: Vec<u32> },
    Observable { meas: Vec<u32> },
}

fn compile_steps(pc: &PhysicalCircuit) -> (Vec<Step>, NoiseTables) {
    let mut tables = NoiseTables::new();
    let mut steps = Vec::with_capacity(pc.instrs.len());
    for ins in &pc.instrs {
        match ins {
            Instr::Reset(q) => steps.push(Step::Reset(*q)),
            Instr::H(q) => steps.push(Step::H(*q)),
            Instr::SqrtX(q) => steps.push(Step::SqrtX(*q)),
            Instr::Cx(a, b) => steps.push(Step::Cx(*a, *b)),
            Instr::Measure { q, flip, .. } => steps.push(Step::Measure {
                q: *q,
                table: if *flip > 0.0 {
                    Some(tables.get(*flip))
                } else {
                    None
                },
            }),
            Instr::Depol1 { q, p } => steps.push(Step::Depol1 {
                q: *q,
                table: tables.get(*p),
            }),
            Instr::Depol2 { a, b, p } => steps.push(Step::Depol2 {
                a: *a,
                b: *b,
                table: tables.get(*p),
            }),
            Instr::Detector { meas, .. } => steps.push(Step::Detector { meas: meas.clone() }),
            Instr::Observable { meas, .. } => steps.push(Step::Observable { meas: meas.clone() }),
            Instr::Barrier | Instr::Tick => {}
        }
    }
    (steps, tables)
}

fn run_word(
    pc: &PhysicalCircuit,
    steps: &[Step],
    tables: &NoiseTables,
    seed: u64,
    word_index: u64,
    det_out: &mut [u64],
    obs_out: &mut [u64],
) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(word_index.wrapping_add(0x5157_0000_0000_0001));
    let nq = pc.num_qubits as usize;
    let mut fx = vec![0u64; nq];
    let mut fz = vec![0u64; nq];
    let mut meas_flips = vec![0u64; pc.num_measurements as usize];
    let mut m = 0usize;
    let mut d = 0usize;
    let mut o = 0usize;
    for step in steps {
        match step {
            Step::Reset(q) => {
                fx[*q as usize] = 0;
                fz[*q as usize] = 0;
            }
            Step::H(q) => fx.swap_with_slice_at(&mut fz, *q as usize),
            Step::SqrtX(q) => {
                let q = *q as usize;
                fx[q] ^= fz[q];
            }
            Step::Cx(a, b) => {
                let (a, b) = (*a as usize, *b as usize);
                fx[b] ^= fx[a];
                fz[a] ^= fz[b];
            }
            Step::Measure { q, table } => {
                let mut w = fx[*q as usize];
                if let Some(t) = table {
                    w ^= sample_mask(&tables.tables[*t], &mut rng);
                }
                meas_flips[m] = w;
                m += 1;
            }
            Step::Depol1 { q, table } => {
                let mask = sample_mask(&tables.tables[*table], &mut rng);
                if mask != 0 {
                    apply_depol1(&mut fx, &mut fz, *q as usize, mask, &mut rng);
                }
            }
            Step::Depol2 { a, b, table } => {
                let mask = sample_mask(&tables.tables[*table], &mut rng);
                if mask != 0 {
                    apply_depol2(&mut fx, &mut fz, *a as usize, *b as usize, mask, &mut rng);
                }
            }
            Step::Detector { meas } => {
                let mut w = 0u64;
                for &mm in meas {
                    w ^= meas_flips[mm as usize];
                }
                det_out[d] = w;
                d += 1;
            }
            Step::Observable { meas } => {
                let mut w = 0u64;
                for &mm in meas {
                    w ^= meas_flips[mm as usize];
                }
                obs_out[o] = w;
                o += 1;
            }
        }
    }
}

trait SwapAt {
    fn swap_with_slice_at(&mut self, other: &mut Self, idx: usize);
}

impl SwapAt for Vec<u64> {
    #[inline]
    fn swap_with_slice_at(&mut self, other: &mut Self, idx: usize) {
        std::mem::swap(&mut self[idx], &mut other[idx]);
    }
}

fn apply_depol1(fx: &mut [u64], fz: &mut [u64], q: usize, mask: u64, rng: &mut impl Rng) {
    let mut bits = mask;
    while bits != 0 {
        let b = 1u64 << bits.trailing_zeros();
        bits &= bits - 1;
        match rng.gen_range(0..3u8) {
            0 => fx[q] ^= b,
            1 => {
                fx[q] ^= b;
                fz[q] ^= b;
            }
            _ => fz[q] ^= b,
        }
    }
}

fn apply_depol2(fx: &mut [u64], fz: &mut [u64], a: usize, b: usize, mask: u64, rng: &mut impl Rng) {
    let mut bits = mask;
    while bits != 0 {
        let bit = 1u64 << bits.trailing_zeros();
        bits &= bits - 1;
        let which = rng.gen_range(1..16u8);
        let (pa, pb) = (which / 4, which % 4);
        for (p, q) in [(pa, a), (pb, b)] {
            match p {
                1 => fx[q] ^= bit,
                2 => {
                    fx[q] ^= bit;
                    fz[q] ^= bit;
                }
                3 => fz[q] ^= bit,
                _ => {}
            }
        }
    }
}

/// Sample `shots` Pauli-frame shots. Reproducible for a fixed
/// (circuit, seed, shots) regardless of thread count.
pub fn frame_sample(pc: &PhysicalCircuit, shots: u64, seed: u64) -> ShotBatch {
    frame_sample_range(pc, shots, seed, 0)
}

/// Sample a word-aligned sub-range starting at shot `64·word_offset`;
/// concatenating ranges reproduces a single larger run bit-for-bit.
pub fn frame_sample_range(
    pc: &PhysicalCircuit,
    shots: u64,
    seed: u64,
    word_offset: u64,
) -> ShotBatch {
    let words = shots.div_ceil(64) as usize;
    let (steps, tables) = compile_steps(pc);
    let nd = pc.num_detectors as usize;
    let no = pc.num_observables as usize;

    let results: Vec<(Vec<u64>, Vec<u64>)> = (0..words as u64)
        .into_par_iter()
        .map(|w| {
            let mut det = vec![0u64; nd];
            let mut obs = vec![0u64; no];
            run_word(
                pc,
                &steps,
                &tables,
                seed,
                word_offset + w,
                &mut det,
                &mut obs,
            );
            (det, obs)
        })
        .collect();

    let mut det_words = vec![vec![0u64; words]; nd];
    let mut obs_words = vec![vec![0u64; words]; no];
    for (w, (det, obs)) in results.into_iter().enumerate() {
        for (d, v) in det.into_iter().enumerate() {
            det_words[d][w] = v;
        }
        for (o, v) in obs.into_iter().enumerate() {
            obs_words[o][w] = v;
        }
    }
    ShotBatch {
        shots,
        num_detectors: nd as u32,
        num_observables: no as u32,
        det_words,
        obs_words,
        keep_mask: vec![u64::MAX; words],
        seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physical::{lower_physical, NoiseModel};
    use crate::surface::parse_surface;

    fn memory_circuit(d: u32, p: f64) -> PhysicalCircuit {
        let src = "grid 1 1\nobservable Z0\nt 0:\n  INITZ (0,0) q=0 task=0\nt 1:\n  IDLE (0,0) task=0\nt 2:\n  MEASZ (0,0) task=0\n";
        let s = parse_surface(src).unwrap();
        lower_physical(&s, d, NoiseModel::uniform(p)).unwrap()
    }

    #[test]
    fn zero_noise_is_silent() {
        let pc = memory_circuit(3, 0.0);
        let batch = frame_sample(&pc, 10_000, 17);
        for d in 0..batch.num_detectors {
            assert_eq!(batch.detector_count(d), 0);
        }
        assert_eq!(batch.observable_count(0), 0);
    }

    #[test]
    fn measurement_flip_rate_half() {
        // one qubit, pm = 0.5, one measurement then a detector on it alone:
        // with reference-relative semantics the detector rate is 0.5.
        use crate::physical::{DetectorTag, Instr, MeasKind, PhysicalCircuit, StabType};
        let pc = PhysicalCircuit {
            num_qubits: 1,
            num_measurements: 1,
            num_detectors: 1,
            num_observables: 0,
            instrs: vec![
                Instr::Reset(0),
                Instr::Measure {
                    q: 0,
                    flip: 0.5,
                    kind: MeasKind::Stabilizer,
                },
                Instr::Detector {
                    meas: vec![0],
                    xor_const: false,
                    tag: DetectorTag::None,
                    stype: StabType::Z,
                    cell: crate::surface::Cell::new(0, 0),
                    timestamp: 0,
                },
            ],
            qubit_sites: vec![(1, 1)],
            noise: NoiseModel::noiseless(),
            distance: 3,
        };
        let shots = 100_000u64;
        let batch = frame_sample(&pc, shots, 23);
        let rate = batch.detector_count(0) as f64 / shots as f64;
        let sigma = (0.25f64 / shots as f64).sqrt();
        assert!(
            (rate - 0.5).abs() < 3.0 * sigma,
            "rate {rate} should be 0.5 ± {}",
            3.0 * sigma
        );
    }

    #[test]
    fn deterministic_given_seed() {
        let pc = memory_circuit(3, 0.003);
        let a = frame_sample(&pc, 1000, 99);
        let b = frame_sample(&pc, 1000, 99);
        assert_eq!(a.det_words, b.det_words);
        assert_eq!(a.obs_words, b.obs_words);
    }

    #[test]
    fn partitioning_invariance() {
        let pc = memory_circuit(3, 0.002);
        let whole = frame_sample(&pc, 128 * 64, 4);
        let left = frame_sample_range(&pc, 64 * 64, 4, 0);
        let right = frame_sample_range(&pc, 64 * 64, 4, 64);
        let merged = left.concat(right).unwrap();
        assert_eq!(whole.det_words, merged.det_words);
        assert_eq!(whole.obs_words, merged.obs_words);
    }

    #[test]
    fn detector_rates_match_dem_analytics() {
        // d=3 idle memory at p_phys = 0.3%: Monte Carlo firing rates must sit
        // within 3σ of the DEM odd-flip prediction.
        let pc = memory_circuit(3, 0.003);
        let dem = crate::physical::extract_dem(&pc).unwrap();
        let predicted = dem.detector_rates();
        let shots = 100_000u64;
        let batch = frame_sample(&pc, shots, 7);
        let mut worst = 0.0f64;
        for d in 0..batch.num_detectors as usize {
            let rate = batch.detector_count(d as u32) as f64 / shots as f64;
            let sigma = (predicted[d] * (1.0 - predicted[d]) / shots as f64)
                .sqrt()
                .max(1e-9);
            let pull = (rate - predicted[d]).abs() / sigma;
            worst = worst.max(pull);
            assert!(
                pull < 4.5,
                "detector {d}: mc={rate:.5} dem={:.5} pull={pull:.1}",
                predicted[d]
            );
        }
        // most detectors should be well within 3σ
        assert!(worst < 4.5);
    }
}
