//! Concrete bit-packed stabilizer tableau (CHP style) for reference runs
//! and small-instance noisy Monte Carlo.

use crate::error::{Result, SurfqError};
use crate::physical::{Instr, PhysicalCircuit};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Aaronson-Gottesman tableau over n qubits: rows 0..n are destabilizers,
/// rows n..2n stabilizers. Row encoding `i^phase · Π X^x Z^z`.
pub struct ChpTableau {
    n: usize,
    words: usize,
    xs: Vec<u64>,
    zs: Vec<u64>,
    phase: Vec<u8>,
}

impl ChpTableau {
    pub fn new(n: usize) -> Self {
        let words = (n + 63) / 64;
        let mut t = ChpTableau {
            n,
            words,
            xs: vec![0; 2 * n * words],
            zs: vec![0; 2 * n * words],
            phase: vec![0; 2 * n],
        };
        for q in 0..n {
            // destabilizer X_q, stabilizer Z_q
            t.xs[q * words + q / 64] |= 1 << (q % 64);
            t.zs[(n + q) * words + q / 64] |= 1 << (q % 64);
        }
        t
    }

    #[inline]
    fn x_bit(&self, row: usize, q: usize) -> bool {
        self.xs[row * self.words + q / 64] >> (q % 64) & 1 != 0
    }

    #[inline]
    fn z_bit(&self, row: usize, q: usize) -> bool {
        self.zs[row * self.words + q / 64] >> (q % 64) & 1 != 0
    }

    /// row_h ← row_h · row_i (operator product in the i^p convention).
    fn rowsum(&mut self, h: usize, i: usize) {
        let w = self.words;
        let mut cross = 0u32;
        for k in 0..w {
            let zh = self.zs[h * w + k];
            let xi = self.xs[i * w + k];
            cross ^= (zh & xi).count_ones() & 1;
            self.xs[h * w + k] ^= xi;
            self.zs[h * w + k] ^= self.zs[i * w + k];
        }
        self.phase[h] = (self.phase[h] + self.phase[i] + 2 * cross as u8) & 3;
    }

    pub fn h(&mut self, q: usize) {
        for r in 0..2 * self.n {
            let xb = self.x_bit(r, q);
            let zb = self.z_bit(r, q);
            if xb && zb {
                self.phase[r] = (self.phase[r] + 2) & 3;
            }
            self.set_x(r, q, zb);
            self.set_z(r, q, xb);
        }
    }

    pub fn s(&mut self, q: usize) {
        for r in 0..2 * self.n {
            if self.x_bit(r, q) {
                let zb = self.z_bit(r, q);
                self.set_z(r, q, !zb);
                self.phase[r] = (self.phase[r] + 1) & 3;
            }
        }
    }

    pub fn sqrt_x(&mut self, q: usize) {
        for r in 0..2 * self.n {
            if self.z_bit(r, q) {
                let xb = self.x_bit(r, q);
                self.set_x(r, q, !xb);
                self.phase[r] = (self.phase[r] + 3) & 3;
            }
        }
    }

    pub fn x(&mut self, q: usize) {
        for r in 0..2 * self.n {
            if self.z_bit(r, q) {
                self.phase[r] = (self.phase[r] + 2) & 3;
            }
        }
    }

    pub fn z(&mut self, q: usize) {
        for r in 0..2 * self.n {
            if self.x_bit(r, q) {
                self.phase[r] = (self.phase[r] + 2) & 3;
            }
        }
    }

    pub fn y(&mut self, q: usize) {
        // Y = iXZ: flips rows anticommuting with Y, i.e. exactly one of x,z.
        for r in 0..2 * self.n {
            if self.x_bit(r, q) != self.z_bit(r, q) {
                self.phase[r] = (self.phase[r] + 2) & 3;
            }
        }
    }

    pub fn cx(&mut self, c: usize, t: usize) {
        for r in 0..2 * self.n {
            if self.x_bit(r, c) {
                let xb = self.x_bit(r, t);
                self.set_x(r, t, !xb);
            }
            if self.z_bit(r, t) {
                let zb = self.z_bit(r, c);
                self.set_z(r, c, !zb);
            }
        }
    }

    #[inline]
    fn set_x(&mut self, r: usize, q: usize, v: bool) {
        let w = &mut self.xs[r * self.words + q / 64];
        if v {
            *w |= 1 << (q % 64);
        } else {
            *w &= !(1 << (q % 64));
        }
    }

    #[inline]
    fn set_z(&mut self, r: usize, q: usize, v: bool) {
        let w = &mut self.zs[r * self.words + q / 64];
        if v {
            *w |= 1 << (q % 64);
        } else {
            *w &= !(1 << (q % 64));
        }
    }

    /// Measure Z_q; intrinsic 50/50 outcomes drawn from `rng`.
    pub fn measure_z(&mut self, q: usize, rng: &mut impl Rng) -> bool {
        let n = self.n;
        let pivot = (n..2 * n).find(|&r| self.x_bit(r, q));
        if let Some(p) = pivot {
            for r in 0..2 * n {
                if r != p && self.x_bit(r, q) {
                    self.rowsum(r, p);
                }
            }
            // destab[p-n] ← old stab row p; stab p ← ±Z_q
            let w = self.words;
            let (dst, src) = (p - n, p);
            for k in 0..w {
                self.xs[dst * w + k] = self.xs[src * w + k];
                self.zs[dst * w + k] = self.zs[src * w + k];
            }
            self.phase[dst] = self.phase[src];
            for k in 0..w {
                self.xs[src * w + k] = 0;
                self.zs[src * w + k] = 0;
            }
            self.zs[src * w + q / 64] |= 1 << (q % 64);
            let outcome = rng.gen_bool(0.5);
            self.phase[src] = if outcome { 2 } else { 0 };
            outcome
        } else {
            // deterministic: accumulate stab rows whose destabilizer
            // partners anticommute with Z_q
            let w = self.words;
            let mut sx = vec![0u64; w];
            let mut sz = vec![0u64; w];
            let mut ph: u8 = 0;
            for i in 0..n {
                if self.x_bit(i, q) {
                    let src = n + i;
                    let mut cross = 0u32;
                    for k in 0..w {
                        cross ^= (sz[k] & self.xs[src * w + k]).count_ones() & 1;
                        sx[k] ^= self.xs[src * w + k];
                        sz[k] ^= self.zs[src * w + k];
                    }
                    ph = (ph + self.phase[src] + 2 * cross as u8) & 3;
                }
            }
            debug_assert_eq!(ph & 1, 0);
            ph == 2
        }
    }

    pub fn reset_z(&mut self, q: usize, rng: &mut impl Rng) {
        if self.measure_z(q, rng) {
            self.x(q);
        }
    }

    /// Measure a joint Pauli product (test support). Y terms carry the
    /// i·XZ phase convention.
    pub fn measure_joint(
        &mut self,
        terms: &[(usize, crate::pauli::Pauli)],
        rng: &mut impl Rng,
    ) -> bool {
        use crate::pauli::Pauli;
        let w = self.words;
        let mut tx = vec![0u64; w];
        let mut tz = vec![0u64; w];
        let mut tphase: u8 = 0;
        for &(q, p) in terms {
            match p {
                Pauli::X => tx[q / 64] |= 1 << (q % 64),
                Pauli::Z => tz[q / 64] |= 1 << (q % 64),
                Pauli::Y => {
                    tx[q / 64] |= 1 << (q % 64);
                    tz[q / 64] |= 1 << (q % 64);
                    tphase = (tphase + 1) & 3;
                }
            }
        }
        let anticommutes = |me: &Self, row: usize| -> bool {
            let mut acc = 0u32;
            for k in 0..w {
                acc ^= (me.xs[row * w + k] & tz[k]).count_ones()
                    ^ (me.zs[row * w + k] & tx[k]).count_ones();
            }
            acc & 1 != 0
        };
        let n = self.n;
        if let Some(p) = (n..2 * n).find(|&r| anticommutes(self, r)) {
            for r in 0..2 * n {
                if r != p && anticommutes(self, r) {
                    self.rowsum(r, p);
                }
            }
            let (dst, src) = (p - n, p);
            for k in 0..w {
                self.xs[dst * w + k] = self.xs[src * w + k];
                self.zs[dst * w + k] = self.zs[src * w + k];
                self.xs[src * w + k] = tx[k];
                self.zs[src * w + k] = tz[k];
            }
            self.phase[dst] = self.phase[p];
            let outcome = rng.gen_bool(0.5);
            self.phase[src] = if outcome { (tphase + 2) & 3 } else { tphase };
            outcome
        } else {
            // deterministic: accumulate matching stabilizer rows
            let mut sx = vec![0u64; w];
            let mut sz = vec![0u64; w];
            let mut ph: u8 = 0;
            for i in 0..n {
                if anticommutes(self, i) {
                    let src = n + i;
                    let mut cross = 0u32;
                    for k in 0..w {
                        cross ^= (sz[k] & self.xs[src * w + k]).count_ones() & 1;
                        sx[k] ^= self.xs[src * w + k];
                        sz[k] ^= self.zs[src * w + k];
                    }
                    ph = (ph + self.phase[src] + 2 * cross as u8) & 3;
                }
            }
            debug_assert!(sx == tx && sz == tz, "joint resolution mismatch");
            let dp = tphase.wrapping_sub(ph) & 3;
            debug_assert!(dp == 0 || dp == 2);
            dp == 2
        }
    }
}

/// Full noiseless measurement record of a circuit, with every detector
/// verified to evaluate to zero.
#[derive(Debug, Clone)]
pub struct ReferenceRecord {
    pub bits: Vec<bool>,
    pub seed: u64,
}

/// Run the circuit noiselessly on a tableau with seeded intrinsic
/// randomness. Errors if any detector or observable fails its definition —
/// that always indicates a lowering bug.
pub fn reference_run(pc: &PhysicalCircuit, seed: u64) -> Result<ReferenceRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tab = ChpTableau::new(pc.num_qubits as usize);
    let mut bits: Vec<bool> = Vec::with_capacity(pc.num_measurements as usize);
    for ins in &pc.instrs {
        match ins {
            Instr::Reset(q) => tab.reset_z(*q as usize, &mut rng),
            Instr::H(q) => tab.h(*q as usize),
            Instr::SqrtX(q) => tab.sqrt_x(*q as usize),
            Instr::Cx(a, b) => tab.cx(*a as usize, *b as usize),
            Instr::Measure { q, .. } => bits.push(tab.measure_z(*q as usize, &mut rng)),
            Instr::Detector {
                meas, xor_const, ..
            } => {
                let mut v = *xor_const;
                for &m in meas {
                    v ^= bits[m as usize];
                }
                if v {
                    return Err(SurfqError::Lowering(
                        "detector fired on the noiseless reference run".into(),
                    ));
                }
            }
            Instr::Observable {
                id, meas, xor_const,
            } => {
                let mut v = *xor_const;
                for &m in meas {
                    v ^= bits[m as usize];
                }
                if v {
                    return Err(SurfqError::Lowering(format!(
                        "observable {id} flipped on the noiseless reference run"
                    )));
                }
            }
            _ => {}
        }
    }
    Ok(ReferenceRecord { bits, seed })
}

/// Per-shot noisy tableau simulation for small circuits: the slow oracle the
/// frame sampler is checked against. Returns (detector bits, observable
/// bits) per shot.
pub fn noisy_tableau_shots(
    pc: &PhysicalCircuit,
    shots: u64,
    seed: u64,
) -> (Vec<Vec<bool>>, Vec<Vec<bool>>) {
    let mut det_out = Vec::with_capacity(shots as usize);
    let mut obs_out = Vec::with_capacity(shots as usize);
    for shot in 0..shots {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(shot + 1);
        let mut tab = ChpTableau::new(pc.num_qubits as usize);
        let mut bits: Vec<bool> = Vec::with_capacity(pc.num_measurements as usize);
        let mut dets = Vec::new();
        let mut obs = Vec::new();
        for ins in &pc.instrs {
            match ins {
                Instr::Reset(q) => tab.reset_z(*q as usize, &mut rng),
                Instr::H(q) => tab.h(*q as usize),
                Instr::SqrtX(q) => tab.sqrt_x(*q as usize),
                Instr::Cx(a, b) => tab.cx(*a as usize, *b as usize),
                Instr::Measure { q, flip, .. } => {
                    let mut b = tab.measure_z(*q as usize, &mut rng);
                    if *flip > 0.0 && rng.gen_bool(*flip) {
                        b = !b;
                    }
                    bits.push(b);
                }
                Instr::Depol1 { q, p } => {
                    if *p > 0.0 && rng.gen_bool(*p) {
                        match rng.gen_range(0..3u8) {
                            0 => tab.x(*q as usize),
                            1 => tab.y(*q as usize),
                            _ => tab.z(*q as usize),
                        }
                    }
                }
                Instr::Depol2 { a, b, p } => {
                    if *p > 0.0 && rng.gen_bool(*p) {
                        let which = rng.gen_range(1..16u8);
                        let (pa, pb) = (which / 4, which % 4);
                        for (pq, q) in [(pa, *a as usize), (pb, *b as usize)] {
                            match pq {
                                1 => tab.x(q),
                                2 => tab.y(q),
                                3 => tab.z(q),
                                _ => {}
                            }
                        }
                    }
                }
                Instr::Detector {
                    meas, xor_const, ..
                } => {
                    let mut v = *xor_const;
                    for &m in meas {
                        v ^= bits[m as usize];
                    }
                    dets.push(v);
                }
                Instr::Observable {
                    meas, xor_const, ..
                } => {
                    let mut v = *xor_const;
                    for &m in meas {
                        v ^= bits[m as usize];
                    }
                    obs.push(v);
                }
                _ => {}
            }
        }
        det_out.push(dets);
        obs_out.push(obs);
    }
    (det_out, obs_out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physical::{lower_physical, NoiseModel};
    use crate::surface::parse_surface;

    #[test]
    fn chp_bell_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut t = ChpTableau::new(2);
        t.h(0);
        t.cx(0, 1);
        let a = t.measure_z(0, &mut rng);
        let b = t.measure_z(1, &mut rng);
        assert_eq!(a, b);
    }

    #[test]
    fn chp_deterministic_measurements() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut t = ChpTableau::new(1);
        assert!(!t.measure_z(0, &mut rng));
        t.x(0);
        assert!(t.measure_z(0, &mut rng));
        t.h(0);
        t.s(0);
        t.s(0);
        t.h(0);
        // H Z H = X ⇒ net flip back
        assert!(!t.measure_z(0, &mut rng));
    }

    #[test]
    fn sqrt_x_twice_is_x() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut t = ChpTableau::new(1);
        t.sqrt_x(0);
        t.sqrt_x(0);
        assert!(t.measure_z(0, &mut rng));
    }

    #[test]
    fn reference_run_memory_blocks() {
        for (basis, obs) in [("INITZ", "MEASZ"), ("INITX", "MEASX")] {
            let o = if basis == "INITZ" { "Z0" } else { "X0" };
            let src = format!(
                "grid 1 1\nobservable {o}\nt 0:\n  {basis} (0,0) q=0 task=0\nt 1:\n  IDLE (0,0) task=0\nt 2:\n  {obs} (0,0) task=0\n"
            );
            let s = parse_surface(&src).unwrap();
            for d in [3u32, 5] {
                let pc = lower_physical(&s, d, NoiseModel::noiseless()).unwrap();
                for seed in [0u64, 1, 42] {
                    let rec = reference_run(&pc, seed).unwrap();
                    assert_eq!(rec.bits.len(), pc.num_measurements as usize);
                }
            }
        }
    }

    #[test]
    fn reference_run_injection() {
        let src = "grid 2 1\nt 0:\n  INITMAGIC (0,0)\nt 1:\n  IDLE (0,0)\nt 2:\n  MEASX (0,0)\n";
        let s = parse_surface(src).unwrap();
        let pc = lower_physical(&s, 5, NoiseModel::noiseless()).unwrap();
        reference_run(&pc, 11).unwrap();
    }

    #[test]
    fn reference_run_lattice_cnot() {
        // Full lattice-surgery CNOT on |00⟩: ancilla |+⟩ at the corner, ZZ to
        // the control, XX down to the target, ancilla read out in Z. Both
        // logical Z observables stay deterministic.
        let src = "grid 2 2\nobservable Z0\nobservable Z1\nt 0:\n  INITZ (0,0) q=0 task=0\n  INITX (0,1) task=0\n  INITZ (1,1) q=1 task=0\nt 1:\n  PARITYZZ (0,0) (0,1) task=0\n  IDLE (1,1) task=0\nt 2:\n  PARITYXX (0,1) (1,1) task=0\n  IDLE (0,0) task=0\nt 3:\n  MEASZ (0,1) task=0\n  IDLE (0,0) task=0\n  IDLE (1,1) task=0\nt 4:\n  MEASZ (0,0) task=0\n  MEASZ (1,1) task=0\n";
        let s = parse_surface(src).unwrap();
        let pc = lower_physical(&s, 3, NoiseModel::noiseless()).unwrap();
        for seed in [5u64, 6, 7, 99] {
            reference_run(&pc, seed).unwrap();
        }
    }
}
