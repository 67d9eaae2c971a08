//! Physical-level stabilizer circuits: the noisy instruction stream a
//! schedule lowers to, its detector/observable annotations, the detector
//! error model, and the implementation-size metrics.

pub mod dem;
pub mod layout;
mod lower;
mod metrics;

pub use dem::{extract_dem, DemMechanism, DetectorErrorModel};
pub use lower::{lower_physical, LowerOptions};
pub use metrics::{physical_metrics, Table2Metrics};

use crate::error::{Result, SurfqError};
use crate::surface::Cell;

/// Physical error rates. The two-qubit depolarizing and measurement-flip
/// rates share the headline physical error rate; single-qubit depolarizing
/// defaults to a tenth of it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub p1: f64,
    pub p2: f64,
    pub pm: f64,
}

impl NoiseModel {
    /// The standard parameterization: p2 = pm = p_phys, p1 = p_phys/10.
    pub fn uniform(p_phys: f64) -> Self {
        NoiseModel {
            p1: p_phys / 10.0,
            p2: p_phys,
            pm: p_phys,
        }
    }

    pub fn noiseless() -> Self {
        NoiseModel {
            p1: 0.0,
            p2: 0.0,
            pm: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p1", self.p1), ("p2", self.p2), ("pm", self.pm)] {
            if !(0.0..=0.5).contains(&v) {
                return Err(SurfqError::Config(format!(
                    "noise probability {name}={v} outside [0, 0.5]"
                )));
            }
        }
        Ok(())
    }
}

/// Stabilizer type of an ancilla site (checkerboard coloring).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StabType {
    X,
    Z,
}

/// Classification of a measurement for metrics purposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasKind {
    Stabilizer,
    Data,
}

/// Detector provenance tag. Expansion-tagged detectors form the
/// post-selection set of a magic-state injection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorTag {
    None,
    Expansion,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instr {
    Reset(u32),
    H(u32),
    SqrtX(u32),
    Cx(u32, u32),
    /// Measurement with flip probability; measurement indices run in
    /// emission order.
    Measure { q: u32, flip: f64, kind: MeasKind },
    Depol1 { q: u32, p: f64 },
    Depol2 { a: u32, b: u32, p: f64 },
    /// Parity of earlier measurement outcomes; fires when the XOR of the
    /// listed bits differs from `xor_const`.
    Detector {
        meas: Vec<u32>,
        xor_const: bool,
        tag: DetectorTag,
        stype: StabType,
        cell: Cell,
        timestamp: u32,
    },
    /// Logical observable definition: XOR of listed bits, equal to
    /// `xor_const` in the noiseless circuit.
    Observable {
        id: u32,
        meas: Vec<u32>,
        xor_const: bool,
    },
    /// Gate-layer separator within a stabilizer round (metrics only).
    Barrier,
    /// Round boundary.
    Tick,
}

#[derive(Debug, Clone, Default)]
pub struct PhysicalCircuit {
    pub num_qubits: u32,
    pub num_measurements: u32,
    pub num_detectors: u32,
    pub num_observables: u32,
    pub instrs: Vec<Instr>,
    /// Global lattice site of each qubit id.
    pub qubit_sites: Vec<(u32, u32)>,
    pub noise: NoiseModel,
    pub distance: u32,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel::noiseless()
    }
}

impl PhysicalCircuit {
    /// Indices of expansion-tagged detectors (the post-selection set).
    pub fn expansion_detectors(&self) -> Vec<u32> {
        let mut out = Vec::new();
        let mut det = 0u32;
        for i in &self.instrs {
            if let Instr::Detector { tag, .. } = i {
                if *tag == DetectorTag::Expansion {
                    out.push(det);
                }
                det += 1;
            }
        }
        out
    }

    /// Stabilizer type per detector, for the CSS-split decoder.
    pub fn detector_types(&self) -> Vec<StabType> {
        self.instrs
            .iter()
            .filter_map(|i| match i {
                Instr::Detector { stype, .. } => Some(*stype),
                _ => None,
            })
            .collect()
    }

    /// Line-oriented text serialization.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# qubits={} measurements={} detectors={} observables={} d={}\n",
            self.num_qubits,
            self.num_measurements,
            self.num_detectors,
            self.num_observables,
            self.distance
        ));
        let mut m = 0u32;
        for i in &self.instrs {
            match i {
                Instr::Reset(q) => out.push_str(&format!("R {q}\n")),
                Instr::H(q) => out.push_str(&format!("H {q}\n")),
                Instr::SqrtX(q) => out.push_str(&format!("SQRT_X {q}\n")),
                Instr::Cx(a, b) => out.push_str(&format!("CX {a} {b}\n")),
                Instr::Measure { q, flip, .. } => {
                    if *flip > 0.0 {
                        out.push_str(&format!("M({flip}) {q}"));
                    } else {
                        out.push_str(&format!("M {q}"));
                    }
                    out.push_str(&format!(" # m[{m}]\n"));
                    m += 1;
                }
                Instr::Depol1 { q, p } => out.push_str(&format!("DEPOLARIZE1({p}) {q}\n")),
                Instr::Depol2 { a, b, p } => out.push_str(&format!("DEPOLARIZE2({p}) {a} {b}\n")),
                Instr::Detector {
                    meas,
                    xor_const,
                    tag,
                    ..
                } => {
                    out.push_str("DETECTOR");
                    if *tag == DetectorTag::Expansion {
                        out.push_str("[exp]");
                    }
                    if *xor_const {
                        out.push_str("[flip]");
                    }
                    for mm in meas {
                        out.push_str(&format!(" m[{mm}]"));
                    }
                    out.push('\n');
                }
                Instr::Observable {
                    id,
                    meas,
                    xor_const,
                } => {
                    out.push_str(&format!("OBSERVABLE {id}"));
                    if *xor_const {
                        out.push_str("[flip]");
                    }
                    for mm in meas {
                        out.push_str(&format!(" m[{mm}]"));
                    }
                    out.push('\n');
                }
                Instr::Barrier => {}
                Instr::Tick => out.push_str("TICK\n"),
            }
        }
        out
    }
}
