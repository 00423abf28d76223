use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::blossom::min_weight_perfect_matching;
use super::graph::DetectionGraph;
use super::weights::{path_sum_probabilities, EdgeProbabilities, PathProbabilities, P_BOUNDARY_FLOOR};
use crate::code::{Basis, Surface17};
use crate::error::{Error, Result};
use crate::experiment::{ShotRecord, SyndromeRecord};

/// Fixed-point scale for matching weights.
const SCALE: f64 = 1e5;

/// Matched defects and the resulting logical correction.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MatchingResult {
    /// Defect pairs `(k, l)` with `k < l`.
    pub pairs: Vec<(usize, usize)>,
    /// Defects matched to the boundary.
    pub boundary: Vec<usize>,
    /// Number of matches whose connecting path flips the logical operator.
    pub crossings: u32,
}

impl MatchingResult {
    /// Logical correction sign `(-1)^M`.
    pub fn sign(&self) -> i8 {
        if self.crossings.is_multiple_of(2) {
            1
        } else {
            -1
        }
    }
}

/// Minimum-weight perfect-matching decoder for one basis and cycle count.
#[derive(Clone, Debug)]
pub struct Decoder {
    graph: DetectionGraph,
    paths: PathProbabilities,
    n: usize,
    w_pair: Vec<f64>,
    w_boundary: Vec<f64>,
    cross_pair: Vec<bool>,
    cross_boundary: Vec<bool>,
}

impl Decoder {
    pub fn new(graph: DetectionGraph, probs: &EdgeProbabilities, cap: usize) -> Result<Self> {
        let paths = path_sum_probabilities(&graph, probs, cap)?;
        let n = graph.num_vertices();
        let w_pair: Vec<f64> = (0..n * n)
            .map(|i| {
                let p = paths.pair(i / n, i % n);
                if p > 0.0 {
                    -p.min(0.5).ln()
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        let w_boundary: Vec<f64> = paths.boundary.iter().map(|&p| -p.clamp(P_BOUNDARY_FLOOR, 0.5).ln()).collect();
        let (cross_pair, cross_boundary) = crossing_parities(&graph, probs);
        Ok(Decoder { graph, paths, n, w_pair, w_boundary, cross_pair, cross_boundary })
    }

    pub fn graph(&self) -> &DetectionGraph {
        &self.graph
    }

    pub fn paths(&self) -> &PathProbabilities {
        &self.paths
    }

    pub fn pair_weight(&self, k: usize, l: usize) -> f64 {
        self.w_pair[k * self.n + l]
    }

    pub fn boundary_weight(&self, k: usize) -> f64 {
        self.w_boundary[k]
    }

    /// Multiplies every matching weight by `c > 0`.
    pub fn scale_weights(&mut self, c: f64) {
        assert!(c > 0.0);
        self.w_pair.iter_mut().for_each(|w| *w *= c);
        self.w_boundary.iter_mut().for_each(|w| *w *= c);
    }

    /// Matches the defects of `detectors` (one entry per vertex).
    pub fn decode(&self, detectors: &[u8]) -> Result<MatchingResult> {
        if detectors.len() != self.n {
            return Err(Error::SizeMismatch { expected: self.n, got: detectors.len() });
        }
        let defects: Vec<usize> = (0..self.n).filter(|&v| detectors[v] != 0).collect();
        let d = defects.len();
        if d == 0 {
            return Ok(MatchingResult::default());
        }
        // Nodes 0..d are defects, d..2d their boundary twins.
        let q = |w: f64| (w * SCALE).round() as i64;
        let mut edges = Vec::new();
        for i in 0..d {
            for j in i + 1..d {
                let w = self.pair_weight(defects[i], defects[j]);
                if w.is_finite() {
                    edges.push((i, j, q(w)));
                }
                edges.push((d + i, d + j, 0));
            }
            edges.push((i, d + i, q(self.w_boundary[defects[i]])));
        }
        let mate = min_weight_perfect_matching(2 * d, &edges)
            .ok_or_else(|| Error::Degenerate("no perfect matching of defects".into()))?;
        let mut result = MatchingResult::default();
        for i in 0..d {
            let m = mate[i];
            if m == d + i {
                result.boundary.push(defects[i]);
                result.crossings += self.cross_boundary[defects[i]] as u32;
            } else if m < d && i < m {
                let (k, l) = (defects[i], defects[m]);
                result.pairs.push((k, l));
                result.crossings += self.cross_pair[k * self.n + l] as u32;
            }
        }
        Ok(result)
    }
}

/// Logical parity of the most likely error path between each vertex pair and
/// from each vertex to the boundary.
fn crossing_parities(g: &DetectionGraph, probs: &EdgeProbabilities) -> (Vec<bool>, Vec<bool>) {
    let n = g.num_vertices();
    let weight = |p: f64| if p > 0.0 { Some(-p.ln()) } else { None };
    let mut pair = vec![false; n * n];
    let mut boundary = vec![false; n];
    for src in 0..n {
        // Dijkstra over (vertex, parity); weights are non-negative since p < 1.
        let mut dist = vec![[f64::INFINITY; 2]; n];
        let mut heap = BinaryHeap::new();
        dist[src][0] = 0.0;
        heap.push((Reverse(Ordered(0.0)), src, 0usize));
        while let Some((Reverse(Ordered(du)), u, par)) = heap.pop() {
            if du > dist[u][par] {
                continue;
            }
            for &(v, e) in g.neighbours(u) {
                let Some(w) = weight(probs.edge[e]) else { continue };
                let np = par ^ g.edges[e].crosses as usize;
                if du + w < dist[v][np] {
                    dist[v][np] = du + w;
                    heap.push((Reverse(Ordered(du + w)), v, np));
                }
            }
        }
        for l in 0..n {
            pair[src * n + l] = dist[l][1] < dist[l][0];
        }
        let mut best = (f64::INFINITY, false);
        for (j, dj) in dist.iter().enumerate() {
            let wb = -probs.boundary[j].max(P_BOUNDARY_FLOOR).ln();
            for (par, &d) in dj.iter().enumerate() {
                let total = d + wb;
                if total < best.0 {
                    best = (total, (par == 1) ^ g.boundary_crosses[j % 4]);
                }
            }
        }
        boundary[src] = best.1;
    }
    (pair, boundary)
}

#[derive(Clone, Copy, PartialEq)]
struct Ordered(f64);

impl Eq for Ordered {}

impl PartialOrd for Ordered {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ordered {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Decodes one syndrome record with `decoder`.
pub fn mwpm_decode(decoder: &Decoder, syndrome: &SyndromeRecord) -> Result<MatchingResult> {
    if syndrome.basis != decoder.graph.basis {
        return Err(Error::InvalidInput(format!(
            "syndrome of basis {} given to a {} decoder",
            syndrome.basis, decoder.graph.basis
        )));
    }
    decoder.decode(&syndrome.detectors())
}

/// Raw logical readout multiplied by the correction `(-1)^M`.
pub fn correct_logical(code: &Surface17, shot: &ShotRecord, matching: &MatchingResult, basis: Basis) -> Result<i8> {
    if shot.basis() != basis {
        return Err(Error::InvalidInput(format!("shot prepared in basis {}, not {basis}", shot.basis())));
    }
    Ok(shot.logical_parity(code) * matching.sign())
}
