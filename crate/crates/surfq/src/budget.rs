//! Closed-form error-budget arithmetic: binomial odd-flip combination,
//! feed-forward delay penalty, and distance-scaling extrapolation.

use crate::error::{Result, SurfqError};

/// Inputs for the whole-circuit error estimate.
#[derive(Debug, Clone, Copy)]
pub struct BudgetInputs {
    /// Per-FT-block logical error (per d rounds per surface).
    pub p_ft: f64,
    /// Per-injection (nFT) error.
    pub p_nft: f64,
    pub n_ft: u32,
    pub n_nft: u32,
    /// Idle logical qubits stalled by a late feed-forward.
    pub n_logical: u32,
    /// Stabilizer round duration (arbitrary time units).
    pub t_round: f64,
}

impl BudgetInputs {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p_ft", self.p_ft), ("p_nft", self.p_nft)] {
            if !(0.0..=0.5).contains(&p) {
                return Err(SurfqError::Config(format!("{name}={p} outside [0, 0.5]")));
            }
        }
        if self.t_round <= 0.0 {
            return Err(SurfqError::Config("t_round must be positive".into()));
        }
        Ok(())
    }
}

/// Parameters of the logical-error scaling law.
#[derive(Debug, Clone, Copy)]
pub struct ScalingParams {
    pub p_phys: f64,
    pub p_th: f64,
    pub d: u32,
    pub prefactor: f64,
}

/// Probability of an odd number of flips among n independent events of
/// probability p: `(1 − (1−2p)^n) / 2`. Exact, no sampling.
pub fn odd_flip(n: u32, p: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&p) {
        return Err(SurfqError::Config(format!(
            "odd_flip probability {p} outside [0, 0.5]"
        )));
    }
    Ok((1.0 - (1.0 - 2.0 * p).powi(n as i32)) / 2.0)
}

/// Exclusive combination of two independent flip probabilities.
pub fn combine(a: f64, b: f64) -> f64 {
    a * (1.0 - b) + b * (1.0 - a)
}

/// Whole-circuit logical error from the FT and nFT budgets.
pub fn circuit_error(b: &BudgetInputs) -> Result<f64> {
    b.validate()?;
    Ok(combine(
        odd_flip(b.n_ft, b.p_ft)?,
        odd_flip(b.n_nft, b.p_nft)?,
    ))
}

/// Added logical error from delaying a feed-forward by `t_delay`:
/// `N · p_ft · t_delay / (d · t_round)`.
pub fn delay_error(n_logical: u32, p_ft: f64, t_delay: f64, d: u32, t_round: f64) -> f64 {
    n_logical as f64 * p_ft * t_delay / (d as f64 * t_round)
}

/// Scaling-law extrapolation `A · (p/p_th)^((d+1)/2)`; documentation-grade.
pub fn scaling_extrapolate(s: &ScalingParams) -> f64 {
    s.prefactor * (s.p_phys / s.p_th).powf((s.d as f64 + 1.0) / 2.0)
}

/// Fit (A, p_th) of the scaling law from two measured (d, rate) points.
pub fn fit_scaling(d1: u32, rate1: f64, d2: u32, rate2: f64, p_phys: f64) -> ScalingParams {
    // rate = A·r^((d+1)/2) with r = p/p_th:
    // ln rate2 − ln rate1 = (d2−d1)/2 · ln r
    let ln_r = (rate2.ln() - rate1.ln()) / ((d2 as f64 - d1 as f64) / 2.0);
    let r = ln_r.exp();
    let p_th = p_phys / r;
    let prefactor = rate1 / r.powf((d1 as f64 + 1.0) / 2.0);
    ScalingParams {
        p_phys,
        p_th,
        d: d1,
        prefactor,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_flip_bounds_and_limits() {
        assert_eq!(odd_flip(10, 0.0).unwrap(), 0.0);
        assert_eq!(odd_flip(0, 0.3).unwrap(), 0.0);
        assert!((odd_flip(1, 0.123).unwrap() - 0.123).abs() < 1e-15);
        assert!((odd_flip(1000, 0.5).unwrap() - 0.5).abs() < 1e-12);
        assert!(odd_flip(5, 0.6).is_err());
    }

    #[test]
    fn odd_flip_monotone() {
        let mut prev = 0.0;
        for n in 1..200 {
            let v = odd_flip(n, 0.01).unwrap();
            assert!(v > prev);
            assert!(v <= 0.5);
            prev = v;
        }
        let mut prev = 0.0;
        for i in 1..50 {
            let p = i as f64 * 0.01;
            let v = odd_flip(7, p).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn frozen_reference_value() {
        // Independently verified with exact big-rational arithmetic in the
        // oracle suite: odd_flip(296, 5e-5) = 0.0145840...
        let v = odd_flip(296, 5e-5).unwrap();
        assert!((v - 1.4584e-2).abs() < 2e-6, "got {v}");
    }

    #[test]
    fn circuit_error_properties() {
        let b = BudgetInputs {
            p_ft: 5e-5,
            p_nft: 3e-3,
            n_ft: 296,
            n_nft: 14,
            n_logical: 5,
            t_round: 1.0,
        };
        let e = circuit_error(&b).unwrap();
        let ft = odd_flip(296, 5e-5).unwrap();
        let nft = odd_flip(14, 3e-3).unwrap();
        assert!(e <= ft + nft + 1e-15);
        assert!(e >= ft.max(nft) - ft * nft - 1e-15);
        let swapped = BudgetInputs {
            p_ft: 3e-3,
            p_nft: 5e-5,
            n_ft: 14,
            n_nft: 296,
            ..b
        };
        assert!((circuit_error(&swapped).unwrap() - e).abs() < 1e-15);
        let zero = BudgetInputs {
            p_ft: 0.0,
            p_nft: 0.0,
            ..b
        };
        assert_eq!(circuit_error(&zero).unwrap(), 0.0);
    }

    #[test]
    fn saturation_limit() {
        // p_ft → 0 leaves exactly the nFT asymptote.
        let b = BudgetInputs {
            p_ft: 0.0,
            p_nft: 3.7e-3,
            n_ft: 296,
            n_nft: 14,
            n_logical: 5,
            t_round: 1.0,
        };
        let e = circuit_error(&b).unwrap();
        assert_eq!(e, odd_flip(14, 3.7e-3).unwrap());
    }

    #[test]
    fn delay_error_reference_point() {
        // 20 rounds of delay at p_ft = 5e-5 per block, d = 5, five logical
        // qubits: 5 · 5e-5 · 20/5 = 1e-3.
        let e = delay_error(5, 5e-5, 20.0, 5, 1.0);
        assert!((e - 1e-3).abs() < 1e-15);
        assert_eq!(delay_error(5, 5e-5, 40.0, 5, 1.0), 2.0 * e);
        assert_eq!(delay_error(10, 5e-5, 20.0, 5, 1.0), 2.0 * e);
        assert_eq!(delay_error(5, 1e-4, 20.0, 5, 1.0), 2.0 * e);
        assert_eq!(delay_error(5, 5e-5, 20.0, 5, 2.0), e / 2.0);
        assert_eq!(delay_error(5, 5e-5, 0.0, 5, 1.0), 0.0);
    }

    #[test]
    fn scaling_ratio() {
        let s = ScalingParams {
            p_phys: 0.001,
            p_th: 0.01,
            d: 3,
            prefactor: 0.1,
        };
        let s5 = ScalingParams { d: 5, ..s };
        let ratio = scaling_extrapolate(&s5) / scaling_extrapolate(&s);
        assert!((ratio - 0.1).abs() < 1e-12);
        let at_threshold = ScalingParams { p_phys: 0.01, ..s };
        assert!((scaling_extrapolate(&at_threshold) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn fit_recovers_parameters() {
        let truth = ScalingParams {
            p_phys: 0.001,
            p_th: 0.008,
            d: 3,
            prefactor: 0.07,
        };
        let r3 = scaling_extrapolate(&truth);
        let r5 = scaling_extrapolate(&ScalingParams { d: 5, ..truth });
        let fit = fit_scaling(3, r3, 5, r5, 0.001);
        assert!((fit.p_th - 0.008).abs() < 1e-10);
        let predicted7 = scaling_extrapolate(&ScalingParams { d: 7, ..fit });
        let truth7 = scaling_extrapolate(&ScalingParams { d: 7, ..truth });
        assert!((predicted7 - truth7).abs() / truth7 < 1e-9);
    }
}
