//! Syndrome decoding: the decoding graph built from a detector error model,
//! a union-find decoder with weighted cluster growth, an exact
//! minimum-weight matching oracle for small defect sets, and logical error
//! rate estimation.

mod estimate;
mod oracle;
pub mod union_find;

pub use estimate::{estimate_logical_error, wilson_ci, LogicalErrorEstimate, ObservableRate};
pub use oracle::decode_exact_oracle;
pub use union_find::{decode_union_find, UfScratch};

use crate::error::{Result, SurfqError};
use crate::physical::{DetectorErrorModel, StabType};

pub const BOUNDARY: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct GraphEdge {
    /// Detector endpoints; `BOUNDARY` marks the virtual boundary node.
    pub a: u32,
    pub b: u32,
    pub p: f64,
    pub weight: f64,
    pub obs_mask: u64,
}

#[derive(Debug, Clone, Default)]
pub struct DecodingGraph {
    pub num_detectors: u32,
    pub num_observables: u32,
    pub edges: Vec<GraphEdge>,
    /// Per-detector incident edge ids (boundary excluded as a node).
    pub adj: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, Default)]
pub struct DecodeResult {
    pub correction: Vec<u32>,
    pub observable_flips: u64,
    pub defect_count: u32,
    pub work_units: u64,
}

impl DecodingGraph {
    pub fn total_weight(&self, correction: &[u32]) -> f64 {
        correction
            .iter()
            .map(|&e| self.edges[e as usize].weight)
            .sum()
    }

    /// Symmetric-difference boundary of an edge set, ignoring the virtual
    /// boundary node.
    pub fn correction_boundary(&self, correction: &[u32]) -> Vec<u32> {
        let mut flips: std::collections::HashMap<u32, u32> = std::collections::HashMap::new();
        for &e in correction {
            let edge = &self.edges[e as usize];
            for n in [edge.a, edge.b] {
                if n != BOUNDARY {
                    *flips.entry(n).or_insert(0) += 1;
                }
            }
        }
        let mut out: Vec<u32> = flips
            .into_iter()
            .filter(|(_, c)| c % 2 == 1)
            .map(|(n, _)| n)
            .collect();
        out.sort_unstable();
        out
    }

    /// Every detector can reach the boundary through the graph.
    pub fn all_reach_boundary(&self) -> bool {
        let n = self.num_detectors as usize;
        let mut reach = vec![false; n];
        let mut queue: Vec<u32> = Vec::new();
        for e in &self.edges {
            if e.a == BOUNDARY || e.b == BOUNDARY {
                for x in [e.a, e.b] {
                    if x != BOUNDARY && !reach[x as usize] {
                        reach[x as usize] = true;
                        queue.push(x);
                    }
                }
            }
        }
        while let Some(v) = queue.pop() {
            for &ei in &self.adj[v as usize] {
                let e = &self.edges[ei as usize];
                for x in [e.a, e.b] {
                    if x != BOUNDARY && !reach[x as usize] {
                        reach[x as usize] = true;
                        queue.push(x);
                    }
                }
            }
        }
        reach.into_iter().all(|r| r)
    }
}

fn combine(p: f64, q: f64) -> f64 {
    p * (1.0 - q) + q * (1.0 - p)
}

/// Build the decoding graph. Mechanisms are split by stabilizer side (the
/// CSS split: X-type detectors catch Z error components and carry the
/// X-type observable masks); one- and two-detector groups become edges,
/// larger groups decompose over existing edges or are rejected.
pub fn build_graph(
    dem: &DetectorErrorModel,
    detector_types: &[StabType],
) -> Result<DecodingGraph> {
    if detector_types.len() != dem.num_detectors as usize {
        return Err(SurfqError::Decoder(
            "detector type table does not match the error model".into(),
        ));
    }
    let mut edge_index: std::collections::HashMap<(u32, u32), usize> =
        std::collections::HashMap::new();
    let mut edges: Vec<GraphEdge> = Vec::new();

    let mut oversized: Vec<(usize, Vec<u32>, u64, f64)> = Vec::new();

    for (mid, m) in dem.mechanisms.iter().enumerate() {
        if m.detectors.is_empty() {
            // Flips only observables: an undetectable mechanism. It shows up
            // as a logical error floor, not as a graph edge.
            continue;
        }
        let mut obs_mask = 0u64;
        for &o in &m.observables {
            obs_mask |= 1 << o;
        }
        let mut x_side: Vec<u32> = Vec::new();
        let mut z_side: Vec<u32> = Vec::new();
        for &d in &m.detectors {
            match detector_types[d as usize] {
                StabType::X => x_side.push(d),
                StabType::Z => z_side.push(d),
            }
        }
        // Observables ride on the X-type side when present.
        let (x_mask, z_mask) = if x_side.is_empty() {
            (0, obs_mask)
        } else {
            (obs_mask, 0)
        };
        let groups = [(x_side, x_mask), (z_side, z_mask)];

        for (group, mask) in groups {
            match group.len() {
                0 => {}
                1 => {
                    upsert_edge(
                        &mut edge_index,
                        &mut edges,
                        group[0],
                        BOUNDARY,
                        m.probability,
                        mask,
                    );
                }
                2 => {
                    upsert_edge(
                        &mut edge_index,
                        &mut edges,
                        group[0],
                        group[1],
                        m.probability,
                        mask,
                    );
                }
                _ => oversized.push((mid, group.clone(), mask, m.probability)),
            }
        }
    }

    // Decompose oversized groups, preferring existing edges; leftovers that
    // match no known edge still become edges of their own (new pairs, then
    // boundary singles) so the graph never rejects a physical mechanism.
    for (mid, group, mask, p) in oversized {
        let _ = mid;
        let mut remaining: Vec<u32> = group.clone();
        let mut parts: Vec<(u32, u32)> = Vec::new();
        while remaining.len() > 1 {
            let mut found = None;
            'outer: for i in 0..remaining.len() {
                for j in i + 1..remaining.len() {
                    let key = ordered(remaining[i], remaining[j]);
                    if edge_index.contains_key(&key) {
                        found = Some((i, j));
                        break 'outer;
                    }
                }
            }
            match found {
                Some((i, j)) => {
                    parts.push(ordered(remaining[i], remaining[j]));
                    remaining.remove(j);
                    remaining.remove(i);
                }
                None => break,
            }
        }
        while remaining.len() > 1 {
            let b = remaining.pop().unwrap();
            let a = remaining.pop().unwrap();
            parts.push(ordered(a, b));
        }
        for d in remaining {
            parts.push(ordered(d, BOUNDARY));
        }
        // Fold the probability into each component edge; the observable mask
        // rides on the first part only so the net flip count stays correct.
        for (k, (a, b)) in parts.into_iter().enumerate() {
            let m = if k == 0 { mask } else { 0 };
            upsert_edge(&mut edge_index, &mut edges, a, b, p, m);
        }
    }

    for e in edges.iter_mut() {
        if e.p >= 0.5 {
            return Err(SurfqError::Decoder(format!(
                "edge ({},{}) has p = {} ≥ 1/2; weights undefined",
                e.a, e.b, e.p
            )));
        }
        e.weight = ((1.0 - e.p) / e.p).ln();
    }

    let mut adj = vec![Vec::new(); dem.num_detectors as usize];
    for (i, e) in edges.iter().enumerate() {
        for n in [e.a, e.b] {
            if n != BOUNDARY {
                adj[n as usize].push(i as u32);
            }
        }
    }

    Ok(DecodingGraph {
        num_detectors: dem.num_detectors,
        num_observables: dem.num_observables,
        edges,
        adj,
    })
}

fn ordered(a: u32, b: u32) -> (u32, u32) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn upsert_edge(
    index: &mut std::collections::HashMap<(u32, u32), usize>,
    edges: &mut Vec<GraphEdge>,
    a: u32,
    b: u32,
    p: f64,
    obs_mask: u64,
) {
    let key = ordered(a, b);
    match index.get(&key) {
        Some(&i) => {
            edges[i].p = combine(edges[i].p, p);
            // first-come mask wins; conflicting masks on one edge would mean
            // inconsistent fault equivalence classes and surface in testing
            if edges[i].obs_mask == 0 {
                edges[i].obs_mask = obs_mask;
            }
        }
        None => {
            index.insert(key, edges.len());
            edges.push(GraphEdge {
                a: key.0,
                b: key.1,
                p,
                weight: 0.0,
                obs_mask,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physical::{extract_dem, lower_physical, DemMechanism, NoiseModel};
    use crate::surface::parse_surface;

    #[test]
    fn empty_dem_empty_graph() {
        let dem = DetectorErrorModel::default();
        let g = build_graph(&dem, &[]).unwrap();
        assert!(g.edges.is_empty());
    }

    #[test]
    fn single_boundary_edge_weight() {
        let dem = DetectorErrorModel {
            mechanisms: vec![DemMechanism {
                probability: 0.01,
                detectors: vec![0],
                observables: vec![0],
            }],
            num_detectors: 1,
            num_observables: 1,
        };
        let g = build_graph(&dem, &[StabType::X]).unwrap();
        assert_eq!(g.edges.len(), 1);
        assert_eq!(g.edges[0].b, BOUNDARY);
        assert!((g.edges[0].weight - (99.0f64).ln()).abs() < 1e-12);
        assert_eq!(g.edges[0].obs_mask, 1);
    }

    #[test]
    fn memory_graph_reaches_boundary() {
        let src = "grid 1 1\nobservable Z0\nt 0:\n  INITZ (0,0) q=0 task=0\nt 1:\n  IDLE (0,0) task=0\nt 2:\n  MEASZ (0,0) task=0\n";
        let s = parse_surface(src).unwrap();
        let pc = lower_physical(&s, 3, NoiseModel::uniform(0.001)).unwrap();
        let dem = extract_dem(&pc).unwrap();
        let g = build_graph(&dem, &pc.detector_types()).unwrap();
        assert!(!g.edges.is_empty());
        assert!(g.all_reach_boundary(), "every detector must reach boundary");
        for e in &g.edges {
            assert!(e.weight > 0.0);
        }
    }
}
