//! Detector error model extraction.
//!
//! Every elementary fault location (each Pauli component of every
//! depolarizing channel, every measurement flip) is propagated through the
//! remaining Clifford circuit to find which detectors and observables it
//! flips. The pass runs backwards with per-qubit sensitivity sets, so the
//! cost is linear in circuit size; faults with identical signatures merge
//! by exclusive probability combination.

use super::{Instr, PhysicalCircuit};
use crate::error::{Result, SurfqError};
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq)]
pub struct DemMechanism {
    pub probability: f64,
    pub detectors: Vec<u32>,
    pub observables: Vec<u32>,
}

#[derive(Debug, Clone, Default)]
pub struct DetectorErrorModel {
    pub mechanisms: Vec<DemMechanism>,
    pub num_detectors: u32,
    pub num_observables: u32,
}

impl DetectorErrorModel {
    /// Analytic firing rate of each detector: the odd-flip combination over
    /// the independent mechanisms that touch it.
    pub fn detector_rates(&self) -> Vec<f64> {
        let mut acc = vec![1.0f64; self.num_detectors as usize];
        for m in &self.mechanisms {
            for &d in &m.detectors {
                acc[d as usize] *= 1.0 - 2.0 * m.probability;
            }
        }
        acc.into_iter().map(|a| (1.0 - a) / 2.0).collect()
    }

    /// `error(p) D3 D7 L0` lines.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# detectors={} observables={} mechanisms={}\n",
            self.num_detectors,
            self.num_observables,
            self.mechanisms.len()
        ));
        for m in &self.mechanisms {
            out.push_str(&format!("error({})", m.probability));
            for d in &m.detectors {
                out.push_str(&format!(" D{d}"));
            }
            for l in &m.observables {
                out.push_str(&format!(" L{l}"));
            }
            out.push('\n');
        }
        out
    }
}

fn xor_merge(a: &mut Vec<u32>, b: &[u32]) {
    if b.is_empty() {
        return;
    }
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    *a = out;
}

/// Extract the independent-mechanism error model of a physical circuit.
pub fn extract_dem(pc: &PhysicalCircuit) -> Result<DetectorErrorModel> {
    // Forward: membership of each measurement in detectors/observables.
    // Observables are encoded as ids ≥ num_detectors.
    let n_det = pc.num_detectors;
    let mut membership: Vec<Vec<u32>> = vec![Vec::new(); pc.num_measurements as usize];
    {
        let mut det = 0u32;
        for i in &pc.instrs {
            match i {
                Instr::Detector { meas, .. } => {
                    for &m in meas {
                        membership[m as usize].push(det);
                    }
                    det += 1;
                }
                Instr::Observable { id, meas, .. } => {
                    for &m in meas {
                        membership[m as usize].push(n_det + *id);
                    }
                }
                _ => {}
            }
        }
        for v in membership.iter_mut() {
            v.sort_unstable();
        }
    }

    let nq = pc.num_qubits as usize;
    let mut sx: Vec<Vec<u32>> = vec![Vec::new(); nq];
    let mut sz: Vec<Vec<u32>> = vec![Vec::new(); nq];
    let mut accum: HashMap<Vec<u32>, f64> = HashMap::new();
    let mut add_mech = |sig: Vec<u32>, p: f64| {
        if sig.is_empty() || p <= 0.0 {
            return;
        }
        let e = accum.entry(sig).or_insert(0.0);
        *e = *e * (1.0 - p) + p * (1.0 - *e);
    };

    let mut meas_idx = pc.num_measurements;
    for i in pc.instrs.iter().rev() {
        match i {
            Instr::Measure { q, flip, .. } => {
                meas_idx -= 1;
                let delta = &membership[meas_idx as usize];
                if *flip > 0.0 {
                    add_mech(delta.clone(), *flip);
                }
                let q = *q as usize;
                xor_merge(&mut sx[q], delta);
            }
            Instr::Reset(q) => {
                sx[*q as usize].clear();
                sz[*q as usize].clear();
            }
            Instr::H(q) => {
                let q = *q as usize;
                std::mem::swap(&mut sx[q], &mut sz[q]);
            }
            Instr::SqrtX(q) => {
                let q = *q as usize;
                let x = sx[q].clone();
                xor_merge(&mut sz[q], &x);
            }
            Instr::Cx(c, t) => {
                let (c, t) = (*c as usize, *t as usize);
                let xt = sx[t].clone();
                xor_merge(&mut sx[c], &xt);
                let zc = sz[c].clone();
                xor_merge(&mut sz[t], &zc);
            }
            Instr::Depol1 { q, p } => {
                let q = *q as usize;
                let each = p / 3.0;
                add_mech(sx[q].clone(), each);
                add_mech(sz[q].clone(), each);
                let mut y = sx[q].clone();
                xor_merge(&mut y, &sz[q]);
                add_mech(y, each);
            }
            Instr::Depol2 { a, b, p } => {
                let (a, b) = (*a as usize, *b as usize);
                let each = p / 15.0;
                let paulis = |sx_: &[u32], sz_: &[u32], which: u8| -> Vec<u32> {
                    match which {
                        1 => sx_.to_vec(),
                        2 => sz_.to_vec(),
                        3 => {
                            let mut v = sx_.to_vec();
                            xor_merge(&mut v, sz_);
                            v
                        }
                        _ => Vec::new(),
                    }
                };
                for pa in 0..4u8 {
                    for pb in 0..4u8 {
                        if pa == 0 && pb == 0 {
                            continue;
                        }
                        let mut sig = paulis(&sx[a], &sz[a], pa);
                        let sb = paulis(&sx[b], &sz[b], pb);
                        xor_merge(&mut sig, &sb);
                        add_mech(sig, each);
                    }
                }
            }
            _ => {}
        }
    }
    debug_assert_eq!(meas_idx, 0, "measurement count mismatch in reverse pass");

    let mut mechanisms: Vec<DemMechanism> = accum
        .into_iter()
        .filter(|(_, p)| *p > 0.0)
        .map(|(sig, p)| {
            let detectors: Vec<u32> = sig.iter().copied().filter(|&x| x < n_det).collect();
            let observables: Vec<u32> =
                sig.iter().copied().filter(|&x| x >= n_det).map(|x| x - n_det).collect();
            DemMechanism {
                probability: p,
                detectors,
                observables,
            }
        })
        .collect();
    mechanisms.sort_by(|a, b| {
        (&a.detectors, &a.observables)
            .cmp(&(&b.detectors, &b.observables))
    });
    for m in &mechanisms {
        if m.probability > 0.5 {
            return Err(SurfqError::Dem(format!(
                "mechanism probability {} exceeds 1/2",
                m.probability
            )));
        }
    }
    Ok(DetectorErrorModel {
        mechanisms,
        num_detectors: n_det,
        num_observables: pc.num_observables,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physical::{lower_physical, MeasKind, NoiseModel};
    use crate::surface::parse_surface;

    #[test]
    fn zero_noise_gives_empty_dem() {
        let src = "grid 1 1\nobservable Z0\nt 0:\n  INITZ (0,0) q=0 task=0\nt 1:\n  IDLE (0,0) task=0\nt 2:\n  MEASZ (0,0) task=0\n";
        let s = parse_surface(src).unwrap();
        let pc = lower_physical(&s, 3, NoiseModel::noiseless()).unwrap();
        let dem = extract_dem(&pc).unwrap();
        assert!(dem.mechanisms.is_empty());
    }

    #[test]
    fn single_flip_single_detector() {
        // Hand-built: one qubit, two measurements, detector across both.
        let pc = PhysicalCircuit {
            num_qubits: 1,
            num_measurements: 2,
            num_detectors: 1,
            num_observables: 0,
            instrs: vec![
                Instr::Reset(0),
                Instr::Measure {
                    q: 0,
                    flip: 0.01,
                    kind: MeasKind::Stabilizer,
                },
                Instr::Measure {
                    q: 0,
                    flip: 0.0,
                    kind: MeasKind::Stabilizer,
                },
                Instr::Detector {
                    meas: vec![0, 1],
                    xor_const: false,
                    tag: crate::physical::DetectorTag::None,
                    stype: crate::physical::StabType::Z,
                    cell: crate::surface::Cell::new(0, 0),
                    timestamp: 0,
                },
            ],
            qubit_sites: vec![(1, 1)],
            noise: NoiseModel::noiseless(),
            distance: 3,
        };
        let dem = extract_dem(&pc).unwrap();
        assert_eq!(dem.mechanisms.len(), 1);
        assert_eq!(dem.mechanisms[0].detectors, vec![0]);
        assert!((dem.mechanisms[0].probability - 0.01).abs() < 1e-12);
        let rates = dem.detector_rates();
        assert!((rates[0] - 0.01).abs() < 1e-12);
    }

    #[test]
    fn memory_dem_structure() {
        let src = "grid 1 1\nobservable Z0\nt 0:\n  INITZ (0,0) q=0 task=0\nt 1:\n  IDLE (0,0) task=0\nt 2:\n  MEASZ (0,0) task=0\n";
        let s = parse_surface(src).unwrap();
        let pc = lower_physical(&s, 3, NoiseModel::uniform(0.001)).unwrap();
        let dem = extract_dem(&pc).unwrap();
        assert!(!dem.mechanisms.is_empty());
        for m in &dem.mechanisms {
            assert!(m.probability > 0.0 && m.probability <= 0.5);
            assert!(!m.detectors.is_empty() || !m.observables.is_empty());
        }
        // every detector must be touched by at least one mechanism
        let rates = dem.detector_rates();
        assert!(rates.iter().all(|&r| r > 0.0));
        // mechanisms that flip the observable exist (data errors on the
        // logical string)
        assert!(dem.mechanisms.iter().any(|m| !m.observables.is_empty()));
    }

    #[test]
    fn merge_is_order_independent() {
        let src = "grid 1 1\nobservable X0\nt 0:\n  INITX (0,0) q=0 task=0\nt 1:\n  IDLE (0,0) task=0\nt 2:\n  MEASX (0,0) task=0\n";
        let s = parse_surface(src).unwrap();
        let pc = lower_physical(&s, 3, NoiseModel::uniform(0.002)).unwrap();
        let a = extract_dem(&pc).unwrap();
        let b = extract_dem(&pc).unwrap();
        assert_eq!(a.mechanisms, b.mechanisms);
    }
}
