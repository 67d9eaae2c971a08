//! Simulation engines: a concrete tableau reference run, bit-packed
//! Pauli-frame Monte Carlo sampling, and expansion post-selection.

mod frame;
mod postselect;
pub mod tableau;

pub use frame::{frame_sample, frame_sample_range};
pub use postselect::postselect_expansion;
pub use tableau::{noisy_tableau_shots, reference_run, ChpTableau, ReferenceRecord};

use crate::error::{Result, SurfqError};
use std::io::Write;

/// Bit-packed sample batch: 64 shots per word, detector- and
/// observable-major layout, with a per-shot keep mask for post-selection.
#[derive(Debug, Clone)]
pub struct ShotBatch {
    pub shots: u64,
    pub num_detectors: u32,
    pub num_observables: u32,
    /// `det_words[d][w]` holds shots 64w..64w+63 of detector d.
    pub det_words: Vec<Vec<u64>>,
    pub obs_words: Vec<Vec<u64>>,
    pub keep_mask: Vec<u64>,
    pub seed: u64,
}

impl ShotBatch {
    pub fn words(&self) -> usize {
        self.shots.div_ceil(64) as usize
    }

    /// Mask of valid shot positions in the final partial word.
    pub fn tail_mask(&self) -> u64 {
        let rem = self.shots % 64;
        if rem == 0 {
            u64::MAX
        } else {
            (1u64 << rem) - 1
        }
    }

    pub fn kept_shots(&self) -> u64 {
        let tail = self.tail_mask();
        let w = self.words();
        self.keep_mask
            .iter()
            .enumerate()
            .map(|(i, &m)| {
                let m = if i + 1 == w { m & tail } else { m };
                m.count_ones() as u64
            })
            .sum()
    }

    /// Fired count of one detector over kept shots.
    pub fn detector_count(&self, d: u32) -> u64 {
        self.masked_count(&self.det_words[d as usize])
    }

    /// Flipped count of one observable over kept shots.
    pub fn observable_count(&self, o: u32) -> u64 {
        self.masked_count(&self.obs_words[o as usize])
    }

    fn masked_count(&self, plane: &[u64]) -> u64 {
        let tail = self.tail_mask();
        let w = self.words();
        plane
            .iter()
            .zip(self.keep_mask.iter())
            .enumerate()
            .map(|(i, (&dw, &km))| {
                let mut v = dw & km;
                if i + 1 == w {
                    v &= tail;
                }
                v.count_ones() as u64
            })
            .sum()
    }

    /// Mean fired detectors per kept shot.
    pub fn mean_fired_detectors(&self) -> f64 {
        let kept = self.kept_shots();
        if kept == 0 {
            return 0.0;
        }
        let total: u64 = (0..self.num_detectors)
            .map(|d| self.detector_count(d))
            .sum();
        total as f64 / kept as f64
    }

    /// Merge batches sampled from consecutive shot ranges (word-aligned).
    pub fn concat(mut self, other: ShotBatch) -> Result<ShotBatch> {
        if self.num_detectors != other.num_detectors
            || self.num_observables != other.num_observables
        {
            return Err(SurfqError::Config(
                "cannot concat batches from different circuits".into(),
            ));
        }
        if self.shots % 64 != 0 {
            return Err(SurfqError::Config(
                "concat requires a word-aligned left batch".into(),
            ));
        }
        for (a, b) in self.det_words.iter_mut().zip(other.det_words) {
            a.extend(b);
        }
        for (a, b) in self.obs_words.iter_mut().zip(other.obs_words) {
            a.extend(b);
        }
        self.keep_mask.extend(other.keep_mask);
        self.shots += other.shots;
        Ok(self)
    }

    /// Binary export: self-describing header then packed detector and
    /// observable planes plus the keep mask.
    pub fn write_binary(&self, mut w: impl Write) -> std::io::Result<()> {
        w.write_all(b"SQSB")?;
        for v in [
            self.shots,
            self.num_detectors as u64,
            self.num_observables as u64,
            self.seed,
        ] {
            w.write_all(&v.to_le_bytes())?;
        }
        for plane in self.det_words.iter().chain(self.obs_words.iter()) {
            for word in plane {
                w.write_all(&word.to_le_bytes())?;
            }
        }
        for word in &self.keep_mask {
            w.write_all(&word.to_le_bytes())?;
        }
        Ok(())
    }

    /// CSV summary: per-detector and per-observable fired rates.
    pub fn write_rates_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "kind,index,fired,kept,rate")?;
        let kept = self.kept_shots().max(1);
        for d in 0..self.num_detectors {
            let c = self.detector_count(d);
            writeln!(w, "detector,{d},{c},{kept},{}", c as f64 / kept as f64)?;
        }
        for o in 0..self.num_observables {
            let c = self.observable_count(o);
            writeln!(w, "observable,{o},{c},{kept},{}", c as f64 / kept as f64)?;
        }
        Ok(())
    }
}
