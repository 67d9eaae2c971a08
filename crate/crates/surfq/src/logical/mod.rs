//! Logical circuits: the input representation, Toffoli/T lowering to the
//! surface-compatible gate set, and the Clifford substitution used for
//! simulation.

mod lower;

pub use lower::{cliffordize, lower_to_surface_compatible};

use crate::error::{Result, SurfqError};
use crate::pauli::Pauli;
use std::collections::HashMap;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LogicalOpKind {
    InitZ,
    InitPlus,
    MeasureZ,
    MeasureX,
    X,
    Z,
    H,
    S,
    Sdg,
    SqrtX,
    T,
    Tdg,
    Cnot,
    Toffoli,
}

impl LogicalOpKind {
    pub fn arity(self) -> usize {
        match self {
            LogicalOpKind::Cnot => 2,
            LogicalOpKind::Toffoli => 3,
            _ => 1,
        }
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            LogicalOpKind::InitZ => "INITZ",
            LogicalOpKind::InitPlus => "INITP",
            LogicalOpKind::MeasureZ => "MZ",
            LogicalOpKind::MeasureX => "MX",
            LogicalOpKind::X => "X",
            LogicalOpKind::Z => "Z",
            LogicalOpKind::H => "H",
            LogicalOpKind::S => "S",
            LogicalOpKind::Sdg => "SDG",
            LogicalOpKind::SqrtX => "SQRTX",
            LogicalOpKind::T => "T",
            LogicalOpKind::Tdg => "TDG",
            LogicalOpKind::Cnot => "CNOT",
            LogicalOpKind::Toffoli => "TOFFOLI",
        }
    }

    fn from_mnemonic(s: &str) -> Option<Self> {
        Some(match s {
            "INITZ" => LogicalOpKind::InitZ,
            "INITP" => LogicalOpKind::InitPlus,
            "MZ" => LogicalOpKind::MeasureZ,
            "MX" => LogicalOpKind::MeasureX,
            "X" => LogicalOpKind::X,
            "Z" => LogicalOpKind::Z,
            "H" => LogicalOpKind::H,
            "S" => LogicalOpKind::S,
            "SDG" => LogicalOpKind::Sdg,
            "SQRTX" => LogicalOpKind::SqrtX,
            "T" => LogicalOpKind::T,
            "TDG" => LogicalOpKind::Tdg,
            "CNOT" => LogicalOpKind::Cnot,
            "TOFFOLI" => LogicalOpKind::Toffoli,
            _ => return None,
        })
    }

    pub fn is_clifford(self) -> bool {
        !matches!(self, LogicalOpKind::T | LogicalOpKind::Tdg | LogicalOpKind::Toffoli)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicalOp {
    pub kind: LogicalOpKind,
    pub targets: Vec<u32>,
    /// Optional provenance label (e.g. `nft` on Clifford-substituted T sites).
    pub tag: Option<String>,
}

impl LogicalOp {
    pub fn new(kind: LogicalOpKind, targets: Vec<u32>) -> Self {
        LogicalOp {
            kind,
            targets,
            tag: None,
        }
    }

    pub fn tagged(kind: LogicalOpKind, targets: Vec<u32>, tag: &str) -> Self {
        LogicalOp {
            kind,
            targets,
            tag: Some(tag.to_string()),
        }
    }
}

/// A Pauli string over logical qubits, e.g. `X0 X4`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observable {
    pub terms: Vec<(u32, Pauli)>,
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for &(q, p) in &self.terms {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            let c = match p {
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            };
            write!(f, "{c}{q}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicalCircuit {
    pub num_qubits: u32,
    pub ops: Vec<LogicalOp>,
    pub observables: Vec<Observable>,
}

/// Per-kind gate counts plus the derived totals used by the error budget.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GateCensus {
    pub per_kind: HashMap<LogicalOpKind, usize>,
    pub t_count: usize,
    pub toffoli_count: usize,
    /// Non-fault-tolerant sites: ops tagged as magic-state injection points.
    pub nft_count: usize,
}

impl LogicalCircuit {
    pub fn census(&self) -> GateCensus {
        let mut c = GateCensus::default();
        for op in &self.ops {
            *c.per_kind.entry(op.kind).or_insert(0) += 1;
            match op.kind {
                LogicalOpKind::T | LogicalOpKind::Tdg => c.t_count += 1,
                LogicalOpKind::Toffoli => c.toffoli_count += 1,
                _ => {}
            }
            if op.tag.as_deref() == Some("nft") {
                c.nft_count += 1;
            }
        }
        c
    }

    /// Enforce the structural invariants: targets in range and distinct,
    /// arity matching the kind, nonempty observables in range.
    pub fn validate(&self) -> Result<()> {
        for (i, op) in self.ops.iter().enumerate() {
            if op.targets.len() != op.kind.arity() {
                return Err(SurfqError::InvalidCircuit(format!(
                    "op {} ({}): expected {} targets, got {}",
                    i,
                    op.kind.mnemonic(),
                    op.kind.arity(),
                    op.targets.len()
                )));
            }
            for &t in &op.targets {
                if t >= self.num_qubits {
                    return Err(SurfqError::InvalidCircuit(format!(
                        "op {} ({}): qubit {} out of range (num_qubits {})",
                        i,
                        op.kind.mnemonic(),
                        t,
                        self.num_qubits
                    )));
                }
            }
            for a in 0..op.targets.len() {
                for b in a + 1..op.targets.len() {
                    if op.targets[a] == op.targets[b] {
                        return Err(SurfqError::InvalidCircuit(format!(
                            "op {} ({}): repeated target {}",
                            i,
                            op.kind.mnemonic(),
                            op.targets[a]
                        )));
                    }
                }
            }
        }
        for (i, obs) in self.observables.iter().enumerate() {
            if obs.terms.is_empty() {
                return Err(SurfqError::InvalidCircuit(format!(
                    "observable {i} is empty"
                )));
            }
            for &(q, _) in &obs.terms {
                if q >= self.num_qubits {
                    return Err(SurfqError::InvalidCircuit(format!(
                        "observable {i}: qubit {q} out of range"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("qubits {}\n", self.num_qubits));
        for op in &self.ops {
            out.push_str(op.kind.mnemonic());
            for t in &op.targets {
                out.push_str(&format!(" {t}"));
            }
            if let Some(tag) = &op.tag {
                out.push_str(&format!(" @{tag}"));
            }
            out.push('\n');
        }
        for obs in &self.observables {
            out.push_str(&format!("OBSERVABLE {obs}\n"));
        }
        out
    }
}

/// Parse the line-oriented logical-circuit format.
///
/// UTF-8, one op per line, `#` comments, header `qubits N`, opcodes with
/// space-separated integer targets, optional `@tag` suffix, and trailing
/// `OBSERVABLE <pauli-string>` lines such as `OBSERVABLE X0 X4`.
pub fn parse_logical(text: &str) -> Result<LogicalCircuit> {
    let mut num_qubits: Option<u32> = None;
    let mut ops = Vec::new();
    let mut observables = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let col_of = |tok: &str| raw.find(tok).map(|p| p + 1).unwrap_or(1);
        let mut toks = line.split_whitespace();
        let head = toks.next().unwrap();

        if head == "qubits" {
            let n = toks.next().ok_or_else(|| SurfqError::Parse {
                line: lineno + 1,
                col: col_of(head),
                msg: "missing qubit count".into(),
            })?;
            let n: u32 = n.parse().map_err(|_| SurfqError::Parse {
                line: lineno + 1,
                col: col_of(n),
                msg: format!("invalid qubit count `{n}`"),
            })?;
            if num_qubits.is_some() {
                return Err(SurfqError::Parse {
                    line: lineno + 1,
                    col: 1,
                    msg: "duplicate `qubits` header".into(),
                });
            }
            num_qubits = Some(n);
            continue;
        }

        if head == "OBSERVABLE" {
            let mut terms = Vec::new();
            for tok in toks {
                let (c, rest) = tok.split_at(1);
                let p = match c {
                    "X" => Pauli::X,
                    "Y" => Pauli::Y,
                    "Z" => Pauli::Z,
                    _ => {
                        return Err(SurfqError::Parse {
                            line: lineno + 1,
                            col: col_of(tok),
                            msg: format!("invalid Pauli term `{tok}`"),
                        })
                    }
                };
                let q: u32 = rest.parse().map_err(|_| SurfqError::Parse {
                    line: lineno + 1,
                    col: col_of(tok),
                    msg: format!("invalid qubit index in `{tok}`"),
                })?;
                terms.push((q, p));
            }
            if terms.is_empty() {
                return Err(SurfqError::Parse {
                    line: lineno + 1,
                    col: 1,
                    msg: "empty observable".into(),
                });
            }
            observables.push(Observable { terms });
            continue;
        }

        let kind = LogicalOpKind::from_mnemonic(head).ok_or_else(|| SurfqError::Parse {
            line: lineno + 1,
            col: col_of(head),
            msg: format!("unknown opcode `{head}`"),
        })?;
        let mut targets = Vec::new();
        let mut tag = None;
        for tok in toks {
            if let Some(t) = tok.strip_prefix('@') {
                tag = Some(t.to_string());
                continue;
            }
            let q: u32 = tok.parse().map_err(|_| SurfqError::Parse {
                line: lineno + 1,
                col: col_of(tok),
                msg: format!("invalid target `{tok}`"),
            })?;
            targets.push(q);
        }
        if targets.len() != kind.arity() {
            return Err(SurfqError::Parse {
                line: lineno + 1,
                col: 1,
                msg: format!(
                    "{} expects {} targets, got {}",
                    kind.mnemonic(),
                    kind.arity(),
                    targets.len()
                ),
            });
        }
        ops.push(LogicalOp { kind, targets, tag });
    }

    let num_qubits = num_qubits.ok_or_else(|| SurfqError::Parse {
        line: 1,
        col: 1,
        msg: "missing `qubits N` header".into(),
    })?;
    let circuit = LogicalCircuit {
        num_qubits,
        ops,
        observables,
    };
    circuit.validate()?;
    Ok(circuit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_program() {
        let c = parse_logical("qubits 1\nINITZ 0\nMZ 0").unwrap();
        assert_eq!(c.num_qubits, 1);
        assert_eq!(c.ops.len(), 2);
    }

    #[test]
    fn repeated_target_rejected() {
        let err = parse_logical("qubits 2\nCNOT 0 0").unwrap_err();
        assert!(matches!(err, SurfqError::InvalidCircuit(_)));
    }

    #[test]
    fn out_of_range_rejected() {
        let err = parse_logical("qubits 1\nH 3").unwrap_err();
        assert!(matches!(err, SurfqError::InvalidCircuit(_)));
    }

    #[test]
    fn syntax_error_reports_position() {
        let err = parse_logical("qubits 1\nFROB 0").unwrap_err();
        match err {
            SurfqError::Parse { line, .. } => assert_eq!(line, 2),
            _ => panic!("expected parse error"),
        }
    }

    #[test]
    fn round_trip() {
        let src = "qubits 3\nINITP 0\nTOFFOLI 0 1 2\nT 1 @nft\nMX 0\nOBSERVABLE X0 X2\nOBSERVABLE Z1\n";
        let c = parse_logical(src).unwrap();
        let my = c.serialize();
        let c2 = parse_logical(&my).unwrap();
        assert_eq!(c, c2);
        // byte-identical modulo whitespace
        let norm = |s: &str| {
            s.lines()
                .map(|l| l.split_whitespace().collect::<Vec<_>>().join(" "))
                .filter(|l| !l.is_empty())
                .collect::<Vec<_>>()
                .join("\n")
        };
        assert_eq!(norm(src), norm(&my));
    }

    #[test]
    fn comments_and_blank_lines() {
        let c = parse_logical("# header\nqubits 2\n\nCNOT 0 1 # entangle\n").unwrap();
        assert_eq!(c.ops.len(), 1);
    }
}
