//! Expansion post-selection: discard shots whose injection-expansion
//! detectors fired.

use super::ShotBatch;
use crate::physical::PhysicalCircuit;

/// Clear the keep flag for every shot with a fired expansion-tagged
/// detector. Returns (batch, kept_fraction, had_tagged). When the circuit
/// has no tagged expansion rounds the batch passes through unchanged and
/// `had_tagged` is false so callers can warn.
pub fn postselect_expansion(mut batch: ShotBatch, pc: &PhysicalCircuit) -> (ShotBatch, f64, bool) {
    let tagged = pc.expansion_detectors();
    if tagged.is_empty() {
        let frac = 1.0;
        return (batch, frac, false);
    }
    let words = batch.words();
    for w in 0..words {
        let mut fired = 0u64;
        for &d in &tagged {
            fired |= batch.det_words[d as usize][w];
        }
        batch.keep_mask[w] &= !fired;
    }
    let kept = batch.kept_shots();
    let frac = kept as f64 / batch.shots.max(1) as f64;
    (batch, frac, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::frame_sample;
    use crate::physical::{lower_physical, NoiseModel};
    use crate::surface::parse_surface;

    fn injection_circuit(d: u32, p: f64) -> PhysicalCircuit {
        let src = "grid 2 1\nt 0:\n  INITMAGIC (0,0)\nt 1:\n  IDLE (0,0)\nt 2:\n  MEASX (0,0)\n";
        let s = parse_surface(src).unwrap();
        lower_physical(&s, d, NoiseModel::uniform(p)).unwrap()
    }

    #[test]
    fn zero_noise_keeps_everything() {
        let pc = injection_circuit(3, 0.0);
        let batch = frame_sample(&pc, 5000, 1);
        let (b, frac, tagged) = postselect_expansion(batch, &pc);
        assert!(tagged);
        assert_eq!(frac, 1.0);
        assert_eq!(b.kept_shots(), 5000);
    }

    #[test]
    fn untagged_circuit_passes_through() {
        let src = "grid 1 1\nobservable Z0\nt 0:\n  INITZ (0,0) q=0 task=0\nt 1:\n  IDLE (0,0) task=0\nt 2:\n  MEASZ (0,0) task=0\n";
        let s = parse_surface(src).unwrap();
        let pc = lower_physical(&s, 3, NoiseModel::uniform(0.001)).unwrap();
        let batch = frame_sample(&pc, 1000, 2);
        let (b, frac, tagged) = postselect_expansion(batch, &pc);
        assert!(!tagged);
        assert_eq!(frac, 1.0);
        assert_eq!(b.kept_shots(), 1000);
    }

    #[test]
    fn noisy_injection_discards_some() {
        let pc = injection_circuit(3, 0.01);
        let shots = 20_000u64;
        let batch = frame_sample(&pc, shots, 3);
        let (b, frac, tagged) = postselect_expansion(batch, &pc);
        assert!(tagged);
        assert!(frac < 1.0, "1% noise must reject some shots");
        assert!(frac > 0.5, "narrow tag set should not reject most shots");
        assert_eq!(b.kept_shots(), (frac * shots as f64).round() as u64);
    }
}
