//! Reference schedule builder (populated alongside the bundled fixture).

use super::SurfaceCircuit;

/// Construct the bundled 18-surface reference schedule programmatically.
pub fn reference_schedule() -> SurfaceCircuit {
    let text = include_str!("../../fixtures/shor21.surface");
    super::parse_surface(text).expect("bundled reference schedule must validate")
}
