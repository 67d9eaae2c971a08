//! Union-find decoder: weighted cluster growth with half-edge increments
//! and peeling for correction extraction. Deterministic: clusters grow in
//! root-id order and ties break toward the lowest node id.
//!
//! Scratch state is epoch-stamped so per-shot decoding touches only the
//! neighborhood of the defects, not the whole graph.

use super::{DecodeResult, DecodingGraph, BOUNDARY};
use crate::error::{Result, SurfqError};
use std::collections::HashMap;

/// Reusable scratch so batch decoding does not reallocate per shot.
pub struct UfScratch {
    epoch: u32,
    parent: Vec<u32>,
    parent_epoch: Vec<u32>,
    odd: Vec<bool>,
    touches_boundary: Vec<bool>,
    state_epoch: Vec<u32>,
    frontier: Vec<Vec<u32>>,
    frontier_epoch: Vec<u32>,
    growth: Vec<u16>,
    grown: Vec<bool>,
    edge_epoch: Vec<u32>,
    length: Vec<u16>,
}

impl UfScratch {
    pub fn new(g: &DecodingGraph) -> Self {
        let n = g.num_detectors as usize;
        let wmax = g
            .edges
            .iter()
            .map(|e| e.weight)
            .fold(0.0f64, f64::max)
            .max(1e-9);
        let scale = 200.0 / wmax;
        let length: Vec<u16> = g
            .edges
            .iter()
            .map(|e| ((e.weight * scale).round() as u16).max(1) * 2)
            .collect();
        UfScratch {
            epoch: 0,
            parent: vec![0; n],
            parent_epoch: vec![0; n],
            odd: vec![false; n],
            touches_boundary: vec![false; n],
            state_epoch: vec![0; n],
            frontier: vec![Vec::new(); n],
            frontier_epoch: vec![0; n],
            growth: vec![0; g.edges.len()],
            grown: vec![false; g.edges.len()],
            edge_epoch: vec![0; g.edges.len()],
            length,
        }
    }

    #[inline]
    fn parent_of(&mut self, v: u32) -> u32 {
        if self.parent_epoch[v as usize] != self.epoch {
            self.parent_epoch[v as usize] = self.epoch;
            self.parent[v as usize] = v;
        }
        self.parent[v as usize]
    }

    fn find(&mut self, mut v: u32) -> u32 {
        loop {
            let p = self.parent_of(v);
            if p == v {
                return v;
            }
            let gp = self.parent_of(p);
            self.parent[v as usize] = gp;
            v = gp;
        }
    }

    #[inline]
    fn is_odd(&self, r: u32) -> bool {
        self.state_epoch[r as usize] == self.epoch && self.odd[r as usize]
    }

    #[inline]
    fn set_odd(&mut self, r: u32, v: bool) {
        self.touch_state(r);
        self.odd[r as usize] = v;
    }

    #[inline]
    fn boundary_touched(&self, r: u32) -> bool {
        self.state_epoch[r as usize] == self.epoch && self.touches_boundary[r as usize]
    }

    #[inline]
    fn touch_state(&mut self, r: u32) {
        if self.state_epoch[r as usize] != self.epoch {
            self.state_epoch[r as usize] = self.epoch;
            self.odd[r as usize] = false;
            self.touches_boundary[r as usize] = false;
        }
    }

    #[inline]
    fn edge_growth(&mut self, e: u32) -> (u16, bool) {
        if self.edge_epoch[e as usize] != self.epoch {
            self.edge_epoch[e as usize] = self.epoch;
            self.growth[e as usize] = 0;
            self.grown[e as usize] = false;
        }
        (self.growth[e as usize], self.grown[e as usize])
    }

    fn take_frontier(&mut self, r: u32) -> Vec<u32> {
        if self.frontier_epoch[r as usize] != self.epoch {
            self.frontier_epoch[r as usize] = self.epoch;
            self.frontier[r as usize].clear();
        }
        std::mem::take(&mut self.frontier[r as usize])
    }

    fn frontier_mut(&mut self, r: u32) -> &mut Vec<u32> {
        if self.frontier_epoch[r as usize] != self.epoch {
            self.frontier_epoch[r as usize] = self.epoch;
            self.frontier[r as usize].clear();
        }
        &mut self.frontier[r as usize]
    }

    fn frontier_is_pristine(&self, r: u32) -> bool {
        self.frontier_epoch[r as usize] != self.epoch
    }
}

/// Decode a defect set. The returned correction's detector boundary equals
/// the defect set exactly; `work_units` counts growth and merge steps for
/// the decode-time model.
pub fn decode_union_find(
    g: &DecodingGraph,
    defects: &[u32],
    scratch: &mut UfScratch,
) -> Result<DecodeResult> {
    let n = g.num_detectors as usize;
    scratch.epoch = scratch.epoch.wrapping_add(1);
    if scratch.epoch == 0 {
        // epoch wrapped: hard reset
        scratch.parent_epoch.iter_mut().for_each(|e| *e = u32::MAX);
        scratch.state_epoch.iter_mut().for_each(|e| *e = u32::MAX);
        scratch.frontier_epoch.iter_mut().for_each(|e| *e = u32::MAX);
        scratch.edge_epoch.iter_mut().for_each(|e| *e = u32::MAX);
        scratch.epoch = 1;
    }
    let mut work: u64 = 0;
    let mut grown_list: Vec<u32> = Vec::new();

    for &d in defects {
        if d as usize >= n {
            return Err(SurfqError::Decoder(format!("defect {d} out of range")));
        }
        scratch.set_odd(d, true);
        let adj = g.adj[d as usize].clone();
        *scratch.frontier_mut(d) = adj;
    }

    let mut worklist: Vec<u32> = defects.to_vec();
    worklist.sort_unstable();
    worklist.dedup();
    let mut guard: u64 = 0;
    while let Some(root) = worklist.pop() {
        guard += 1;
        if guard > 10_000_000 {
            return Err(SurfqError::Decoder("cluster growth did not converge".into()));
        }
        if scratch.find(root) != root || !scratch.is_odd(root) || scratch.boundary_touched(root) {
            continue;
        }
        let frontier = scratch.take_frontier(root);
        // Weighted growth: extend every frontier edge by the smallest
        // remaining length so the lightest (likeliest) edges complete first.
        let mut min_rem = u16::MAX;
        for &ei in &frontier {
            let (growth, already) = scratch.edge_growth(ei);
            if !already {
                min_rem = min_rem.min(scratch.length[ei as usize].saturating_sub(growth));
            }
        }
        if min_rem == u16::MAX || min_rem == 0 {
            min_rem = 1;
        }
        let mut keep: Vec<u32> = Vec::with_capacity(frontier.len());
        let mut completed: Vec<u32> = Vec::new();
        for ei in frontier {
            let (_, already) = scratch.edge_growth(ei);
            if already {
                continue;
            }
            scratch.growth[ei as usize] = scratch.growth[ei as usize].saturating_add(min_rem);
            work += 1;
            if scratch.growth[ei as usize] >= scratch.length[ei as usize] {
                scratch.grown[ei as usize] = true;
                grown_list.push(ei);
                completed.push(ei);
            } else {
                keep.push(ei);
            }
        }
        let mut current = root;
        for ei in completed {
            work += 1;
            let e = &g.edges[ei as usize];
            if e.a == BOUNDARY || e.b == BOUNDARY {
                let v = if e.a == BOUNDARY { e.b } else { e.a };
                let r = scratch.find(v);
                scratch.touch_state(r);
                scratch.touches_boundary[r as usize] = true;
                if r != scratch.find(current) {
                    // boundary edge of a vertex outside the growing cluster:
                    // it may connect later; nothing else to do now
                }
                continue;
            }
            let ra = scratch.find(e.a);
            let rb = scratch.find(e.b);
            if ra == rb {
                continue;
            }
            let (child, parent) = if ra < rb { (rb, ra) } else { (ra, rb) };
            // pristine singleton clusters contribute their vertex adjacency
            for c in [child, parent] {
                if scratch.frontier_is_pristine(c) {
                    let adj = g.adj[c as usize].clone();
                    scratch.frontier_mut(c).extend(adj);
                }
            }
            scratch.touch_state(child);
            scratch.touch_state(parent);
            let odd = scratch.odd[child as usize] ^ scratch.odd[parent as usize];
            let tb =
                scratch.touches_boundary[child as usize] || scratch.touches_boundary[parent as usize];
            scratch.parent[child as usize] = parent;
            scratch.odd[parent as usize] = odd;
            scratch.touches_boundary[parent as usize] = tb;
            let child_frontier = scratch.take_frontier(child);
            scratch.frontier_mut(parent).extend(child_frontier);
            current = parent;
        }
        let r = scratch.find(current);
        scratch.frontier_mut(r).extend(keep);
        if scratch.is_odd(r) && !scratch.boundary_touched(r) {
            if scratch.frontier_mut(r).is_empty() {
                return Err(SurfqError::Decoder(
                    "odd cluster cannot reach the boundary".into(),
                ));
            }
            worklist.push(r);
        }
    }

    let correction = peel(g, &grown_list, defects)?;
    let mut obs = 0u64;
    for &e in &correction {
        obs ^= g.edges[e as usize].obs_mask;
    }
    Ok(DecodeResult {
        observable_flips: obs,
        defect_count: defects.len() as u32,
        work_units: work,
        correction,
    })
}

/// Peel a spanning forest of the grown support: leaves carrying a pending
/// defect contribute their edge to the correction and push the defect
/// inward; boundary super-vertices absorb whatever reaches them.
fn peel(g: &DecodingGraph, grown: &[u32], defects: &[u32]) -> Result<Vec<u32>> {
    if defects.is_empty() {
        return Ok(Vec::new());
    }
    let mut sorted_grown: Vec<u32> = grown.to_vec();
    sorted_grown.sort_unstable();
    sorted_grown.dedup();

    // local indexing over the grown support; boundary is one super-vertex
    let mut local: HashMap<u32, u32> = HashMap::new();
    let mut verts: Vec<u32> = Vec::new();
    let mut has_boundary = false;
    for &ei in &sorted_grown {
        let e = &g.edges[ei as usize];
        for x in [e.a, e.b] {
            if x == BOUNDARY {
                has_boundary = true;
            } else if !local.contains_key(&x) {
                local.insert(x, verts.len() as u32);
                verts.push(x);
            }
        }
    }
    let bidx: Option<u32> = has_boundary.then_some(verts.len() as u32);
    let nverts = verts.len() + has_boundary as usize;
    let mut adj: Vec<Vec<(u32, u32)>> = vec![Vec::new(); nverts];
    let mut fparent: Vec<u32> = (0..nverts as u32).collect();
    fn ffind(p: &mut [u32], mut v: u32) -> u32 {
        while p[v as usize] != v {
            let gp = p[p[v as usize] as usize];
            p[v as usize] = gp;
            v = gp;
        }
        v
    }
    // spanning forest over the grown edges
    for &ei in &sorted_grown {
        let e = &g.edges[ei as usize];
        let la = if e.a == BOUNDARY { bidx.unwrap() } else { local[&e.a] };
        let lb = if e.b == BOUNDARY { bidx.unwrap() } else { local[&e.b] };
        let (ra, rb) = (ffind(&mut fparent, la), ffind(&mut fparent, lb));
        if ra != rb {
            fparent[ra as usize] = rb;
            adj[la as usize].push((lb, ei));
            adj[lb as usize].push((la, ei));
        }
    }

    let bset = bidx.map(|b| b as usize);
    let mut pending = vec![false; nverts];
    for &d in defects {
        let Some(&l) = local.get(&d) else {
            return Err(SurfqError::Decoder(format!(
                "defect {d} has no grown support"
            )));
        };
        pending[l as usize] = true;
    }
    let mut degree: Vec<u32> = adj.iter().map(|v| v.len() as u32).collect();
    let mut removed: Vec<bool> = vec![false; g.edges.len()];
    let mut correction = Vec::new();
    let mut stack: Vec<u32> = (0..nverts as u32)
        .filter(|&v| degree[v as usize] == 1 && Some(v as usize) != bset)
        .collect();
    stack.sort_unstable_by(|a, b| b.cmp(a));
    while let Some(v) = stack.pop() {
        if degree[v as usize] != 1 || Some(v as usize) == bset {
            continue;
        }
        let Some(&(u, ei)) = adj[v as usize]
            .iter()
            .find(|&&(_, e)| !removed[e as usize])
        else {
            continue;
        };
        removed[ei as usize] = true;
        degree[v as usize] -= 1;
        degree[u as usize] -= 1;
        if pending[v as usize] {
            correction.push(ei);
            pending[v as usize] = false;
            if Some(u as usize) != bset {
                pending[u as usize] ^= true;
            }
        }
        if degree[u as usize] == 1 && Some(u as usize) != bset {
            stack.push(u);
        }
    }
    if pending.iter().any(|&p| p) {
        return Err(SurfqError::Decoder(
            "peeling left unmatched defects; grown support is inconsistent".into(),
        ));
    }
    correction.sort_unstable();
    Ok(correction)
}

#[cfg(test)]
mod tests {
    use super::super::{build_graph, BOUNDARY};
    use super::*;
    use crate::physical::{DemMechanism, DetectorErrorModel, StabType};

    fn line_graph(n: u32, p: f64) -> DecodingGraph {
        let mut mechanisms = vec![DemMechanism {
            probability: p,
            detectors: vec![0],
            observables: vec![0],
        }];
        for i in 0..n - 1 {
            mechanisms.push(DemMechanism {
                probability: p,
                detectors: vec![i, i + 1],
                observables: vec![],
            });
        }
        mechanisms.push(DemMechanism {
            probability: p,
            detectors: vec![n - 1],
            observables: vec![],
        });
        let dem = DetectorErrorModel {
            mechanisms,
            num_detectors: n,
            num_observables: 1,
        };
        build_graph(&dem, &vec![StabType::X; n as usize]).unwrap()
    }

    #[test]
    fn empty_defects_empty_correction() {
        let g = line_graph(5, 0.01);
        let mut scratch = UfScratch::new(&g);
        let r = decode_union_find(&g, &[], &mut scratch).unwrap();
        assert!(r.correction.is_empty());
        assert_eq!(r.observable_flips, 0);
    }

    #[test]
    fn single_defect_next_to_boundary() {
        let g = line_graph(5, 0.01);
        let mut scratch = UfScratch::new(&g);
        let r = decode_union_find(&g, &[0], &mut scratch).unwrap();
        assert_eq!(r.correction.len(), 1);
        let e = &g.edges[r.correction[0] as usize];
        assert!(e.a == BOUNDARY || e.b == BOUNDARY);
        assert_eq!(g.correction_boundary(&r.correction), vec![0]);
    }

    #[test]
    fn adjacent_pair_connects() {
        let g = line_graph(6, 0.01);
        let mut scratch = UfScratch::new(&g);
        let r = decode_union_find(&g, &[2, 3], &mut scratch).unwrap();
        assert_eq!(g.correction_boundary(&r.correction), vec![2, 3]);
        assert_eq!(r.correction.len(), 1);
    }

    #[test]
    fn boundary_invariant_random_sets() {
        let g = line_graph(9, 0.02);
        let mut scratch = UfScratch::new(&g);
        let mut lcg: u64 = 12345;
        for _ in 0..300 {
            let mut defects = Vec::new();
            for d in 0..9u32 {
                lcg = lcg.wrapping_mul(6364136223846793005).wrapping_add(1);
                if (lcg >> 33) % 3 == 0 {
                    defects.push(d);
                }
            }
            let r = decode_union_find(&g, &defects, &mut scratch).unwrap();
            let mut want = defects.clone();
            want.sort_unstable();
            assert_eq!(g.correction_boundary(&r.correction), want);
        }
    }

    #[test]
    fn deterministic_across_scratch_reuse() {
        let g = line_graph(12, 0.01);
        let mut s1 = UfScratch::new(&g);
        let mut s2 = UfScratch::new(&g);
        // warm s1 with other decodes first
        for d in 0..12u32 {
            let _ = decode_union_find(&g, &[d], &mut s1).unwrap();
        }
        let a = decode_union_find(&g, &[3, 4, 9], &mut s1).unwrap();
        let b = decode_union_find(&g, &[3, 4, 9], &mut s2).unwrap();
        assert_eq!(a.correction, b.correction);
        assert_eq!(a.observable_flips, b.observable_flips);
    }
}
