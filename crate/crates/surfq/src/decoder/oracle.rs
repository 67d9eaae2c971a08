//! Exact minimum-weight pairing oracle for small defect sets: all-pairs
//! shortest paths plus exhaustive matching over defects and boundary.

use super::{DecodeResult, DecodingGraph, BOUNDARY};
use crate::error::{Result, SurfqError};
use std::collections::HashMap;

const MAX_DEFECTS: usize = 12;

/// Dijkstra from `src`, returning (dist, predecessor edge) maps, including
/// the boundary pseudo-node keyed as `BOUNDARY`.
fn dijkstra(g: &DecodingGraph, src: u32) -> (HashMap<u32, f64>, HashMap<u32, u32>) {
    use std::cmp::Ordering;
    #[derive(PartialEq)]
    struct Item(f64, u32);
    impl Eq for Item {}
    impl PartialOrd for Item {
        fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for Item {
        fn cmp(&self, other: &Self) -> Ordering {
            other
                .0
                .partial_cmp(&self.0)
                .unwrap_or(Ordering::Equal)
                .then(other.1.cmp(&self.1))
        }
    }
    let mut dist: HashMap<u32, f64> = HashMap::new();
    let mut pred: HashMap<u32, u32> = HashMap::new();
    let mut heap = std::collections::BinaryHeap::new();
    dist.insert(src, 0.0);
    heap.push(Item(0.0, src));
    while let Some(Item(d, v)) = heap.pop() {
        if d > dist.get(&v).copied().unwrap_or(f64::INFINITY) {
            continue;
        }
        if v == BOUNDARY {
            continue; // paths may end at the boundary but not pass through it
        }
        for &ei in &g.adj[v as usize] {
            let e = &g.edges[ei as usize];
            let u = if e.a == v { e.b } else { e.a };
            let nd = d + e.weight;
            if nd < dist.get(&u).copied().unwrap_or(f64::INFINITY) - 1e-15 {
                dist.insert(u, nd);
                pred.insert(u, ei);
                heap.push(Item(nd, u));
            }
        }
    }
    (dist, pred)
}

fn path_edges(g: &DecodingGraph, pred: &HashMap<u32, u32>, src: u32, dst: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut cur = dst;
    while cur != src {
        let ei = pred[&cur];
        out.push(ei);
        let e = &g.edges[ei as usize];
        cur = if e.a == cur { e.b } else { e.a };
    }
    out
}

/// Exact minimum-weight correction over all pairings of defects (each
/// defect pairs with another or with the boundary). Exponential in defect
/// count; capped at 12 defects.
pub fn decode_exact_oracle(g: &DecodingGraph, defects: &[u32]) -> Result<DecodeResult> {
    if defects.len() > MAX_DEFECTS {
        return Err(SurfqError::Decoder(format!(
            "exact oracle capped at {MAX_DEFECTS} defects, got {}",
            defects.len()
        )));
    }
    let mut defects = defects.to_vec();
    defects.sort_unstable();
    defects.dedup();
    if defects.is_empty() {
        return Ok(DecodeResult::default());
    }
    let k = defects.len();
    let mut dists = Vec::with_capacity(k);
    let mut preds = Vec::with_capacity(k);
    for &d in &defects {
        let (dist, pred) = dijkstra(g, d);
        dists.push(dist);
        preds.push(pred);
    }

    // exhaustive matching over indices; boundary = partner usize::MAX
    let mut best = f64::INFINITY;
    let mut best_pairs: Vec<(usize, usize)> = Vec::new();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut used = vec![false; k];

    fn rec(
        i0: usize,
        used: &mut Vec<bool>,
        pairs: &mut Vec<(usize, usize)>,
        acc: f64,
        best: &mut f64,
        best_pairs: &mut Vec<(usize, usize)>,
        k: usize,
        defects: &[u32],
        dists: &[HashMap<u32, f64>],
    ) {
        if acc >= *best {
            return;
        }
        let Some(i) = (i0..k).find(|&i| !used[i]) else {
            *best = acc;
            *best_pairs = pairs.clone();
            return;
        };
        used[i] = true;
        // pair with boundary
        if let Some(&db) = dists[i].get(&BOUNDARY) {
            pairs.push((i, usize::MAX));
            rec(i + 1, used, pairs, acc + db, best, best_pairs, k, defects, dists);
            pairs.pop();
        }
        // pair with a later defect
        for j in i + 1..k {
            if used[j] {
                continue;
            }
            if let Some(&dij) = dists[i].get(&defects[j]) {
                used[j] = true;
                pairs.push((i, j));
                rec(i + 1, used, pairs, acc + dij, best, best_pairs, k, defects, dists);
                pairs.pop();
                used[j] = false;
            }
        }
        used[i] = false;
    }
    rec(
        0,
        &mut used,
        &mut pairs,
        0.0,
        &mut best,
        &mut best_pairs,
        k,
        &defects,
        &dists,
    );
    if best.is_infinite() {
        return Err(SurfqError::Decoder(
            "no pairing exists: defects unreachable".into(),
        ));
    }

    // XOR the shortest-path edges of the chosen pairing
    let mut edge_parity: HashMap<u32, u32> = HashMap::new();
    for &(i, j) in &best_pairs {
        let dst = if j == usize::MAX {
            BOUNDARY
        } else {
            defects[j]
        };
        for e in path_edges(g, &preds[i], defects[i], dst) {
            *edge_parity.entry(e).or_insert(0) += 1;
        }
    }
    let mut correction: Vec<u32> = edge_parity
        .into_iter()
        .filter(|(_, c)| c % 2 == 1)
        .map(|(e, _)| e)
        .collect();
    correction.sort_unstable();
    let mut obs = 0u64;
    for &e in &correction {
        obs ^= g.edges[e as usize].obs_mask;
    }
    Ok(DecodeResult {
        observable_flips: obs,
        defect_count: k as u32,
        work_units: 0,
        correction,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{build_graph, decode_union_find, union_find::UfScratch};
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
        build_graph(
            &DetectorErrorModel {
                mechanisms,
                num_detectors: n,
                num_observables: 1,
            },
            &vec![StabType::X; n as usize],
        )
        .unwrap()
    }

    #[test]
    fn empty_is_empty() {
        let g = line_graph(4, 0.01);
        let r = decode_exact_oracle(&g, &[]).unwrap();
        assert!(r.correction.is_empty());
    }

    #[test]
    fn two_adjacent_defects_use_connecting_edge() {
        let g = line_graph(8, 0.01);
        let r = decode_exact_oracle(&g, &[3, 4]).unwrap();
        assert_eq!(r.correction.len(), 1);
        assert_eq!(g.correction_boundary(&r.correction), vec![3, 4]);
    }

    #[test]
    fn cap_enforced() {
        let g = line_graph(20, 0.01);
        let defects: Vec<u32> = (0..13).collect();
        assert!(decode_exact_oracle(&g, &defects).is_err());
    }

    #[test]
    fn oracle_never_beats_validity_and_uf_never_beats_oracle() {
        let g = line_graph(10, 0.02);
        let mut scratch = UfScratch::new(&g);
        let mut lcg: u64 = 777;
        for _ in 0..300 {
            let mut defects = Vec::new();
            for d in 0..10u32 {
                lcg = lcg.wrapping_mul(6364136223846793005).wrapping_add(99);
                if (lcg >> 40) % 4 == 0 {
                    defects.push(d);
                }
            }
            let uf = decode_union_find(&g, &defects, &mut scratch).unwrap();
            let ex = decode_exact_oracle(&g, &defects).unwrap();
            let mut want = defects.clone();
            want.sort_unstable();
            assert_eq!(g.correction_boundary(&ex.correction), want);
            let wu = g.total_weight(&uf.correction);
            let we = g.total_weight(&ex.correction);
            assert!(
                we <= wu + 1e-9,
                "oracle weight {we} must not exceed union-find weight {wu}"
            );
        }
    }
}
