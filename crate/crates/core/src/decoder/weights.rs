use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::graph::{DetectionGraph, EdgeKind};
use crate::code::{Basis, Surface17};
use crate::error::{Error, Result};

/// Upper clamp for estimated probabilities.
pub const P_MAX: f64 = 0.5 - 1e-6;
/// Boundary probabilities are floored here so every defect stays matchable.
pub const P_BOUNDARY_FLOOR: f64 = 1e-12;
/// Default number of edges in a summed error path.
pub const DEFAULT_PATH_CAP: usize = 4;

/// Probability of every graph edge and of every vertex's boundary edge.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeProbabilities {
    pub edge: Vec<f64>,
    pub boundary: Vec<f64>,
    pub shots: usize,
}

#[derive(Clone, Default)]
struct Moments {
    n: usize,
    single: Vec<u64>,
    pair: Vec<u64>,
}

impl Moments {
    fn zero(g: &DetectionGraph) -> Self {
        Moments { n: 0, single: vec![0; g.num_vertices()], pair: vec![0; g.edges.len()] }
    }

    fn add(mut self, g: &DetectionGraph, x: &[u8]) -> Self {
        self.n += 1;
        for (s, &b) in self.single.iter_mut().zip(x) {
            *s += b as u64;
        }
        for (p, e) in self.pair.iter_mut().zip(&g.edges) {
            *p += (x[e.a] & x[e.b]) as u64;
        }
        self
    }

    fn merge(mut self, other: Self) -> Self {
        self.n += other.n;
        self.single.iter_mut().zip(&other.single).for_each(|(a, b)| *a += b);
        self.pair.iter_mut().zip(&other.pair).for_each(|(a, b)| *a += b);
        self
    }

    fn probabilities(&self, g: &DetectionGraph) -> EdgeProbabilities {
        let n = self.n as f64;
        let mean: Vec<f64> = self.single.iter().map(|&s| s as f64 / n).collect();
        let mut negative = 0usize;
        let edge: Vec<f64> = g
            .edges
            .iter()
            .zip(&self.pair)
            .map(|(e, &pair)| {
                let (xi, xj, xij) = (mean[e.a], mean[e.b], pair as f64 / n);
                let cov = xij - xi * xj;
                let den = 1.0 - 2.0 * xi - 2.0 * xj + 4.0 * xij;
                if cov < 0.0 {
                    // Allow for sampling noise of a few standard deviations.
                    if -cov > 3.0 * (xi * xj / n).sqrt() + 1e-12 {
                        negative += 1;
                    }
                    return 0.0;
                }
                if den <= 0.0 {
                    return P_MAX;
                }
                let r = 1.0 - 4.0 * cov / den;
                if r <= 0.0 {
                    P_MAX
                } else {
                    (0.5 - 0.5 * r.sqrt()).clamp(0.0, P_MAX)
                }
            })
            .collect();
        if negative > 0 {
            log::warn!("{negative} edge correlations significantly negative; clamped to zero");
        }
        let boundary = (0..g.num_vertices())
            .map(|k| {
                let through: f64 = g.neighbours(k).iter().map(|&(_, e)| 1.0 - 2.0 * edge[e]).product();
                let rest = (1.0 - 2.0 * mean[k]) / through;
                (0.5 - 0.5 * rest).clamp(0.0, P_MAX)
            })
            .collect();
        EdgeProbabilities { edge, boundary, shots: self.n }
    }
}

fn check_len(g: &DetectionGraph, detections: &[Vec<u8>]) -> Result<()> {
    if detections.is_empty() {
        return Err(Error::InsufficientData("no shots to estimate edge probabilities".into()));
    }
    let v = g.num_vertices();
    if let Some(bad) = detections.iter().find(|d| d.len() != v) {
        return Err(Error::SizeMismatch { expected: v, got: bad.len() });
    }
    Ok(())
}

/// Edge probabilities from two-point correlations of detection events,
/// assuming independent edges: each edge `(i, j)` is obtained from
/// `<x_i x_j> - <x_i><x_j>` and each boundary probability from the marginal
/// `<x_k>` left unexplained by the incident edges.
pub fn estimate_edge_probabilities(g: &DetectionGraph, detections: &[Vec<u8>]) -> Result<EdgeProbabilities> {
    check_len(g, detections)?;
    if detections.len() < 10_000 {
        log::warn!("estimating edge probabilities from only {} shots", detections.len());
    }
    let m = detections.par_iter().fold(|| Moments::zero(g), |m, x| m.add(g, x)).reduce(|| Moments::zero(g), Moments::merge);
    Ok(m.probabilities(g))
}

/// Estimates with batch-means standard errors over `batches` contiguous
/// batches.
pub fn estimate_with_errors(
    g: &DetectionGraph,
    detections: &[Vec<u8>],
    batches: usize,
) -> Result<(EdgeProbabilities, EdgeProbabilities)> {
    check_len(g, detections)?;
    if batches < 2 || detections.len() < 2 * batches {
        return Err(Error::InsufficientData("too few shots for batch errors".into()));
    }
    let est = estimate_edge_probabilities(g, detections)?;
    let size = detections.len() / batches;
    let parts: Vec<EdgeProbabilities> = (0..batches)
        .into_par_iter()
        .map(|b| detections[b * size..(b + 1) * size].iter().fold(Moments::zero(g), |m, x| m.add(g, x)).probabilities(g))
        .collect();
    let se = |get: &dyn Fn(&EdgeProbabilities) -> &Vec<f64>| -> Vec<f64> {
        (0..get(&est).len())
            .map(|i| {
                let vals: Vec<f64> = parts.iter().map(|p| get(p)[i]).collect();
                let mean = vals.iter().sum::<f64>() / batches as f64;
                let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (batches - 1) as f64;
                (var / batches as f64).sqrt()
            })
            .collect()
    };
    let errors = EdgeProbabilities { edge: se(&|p| &p.edge), boundary: se(&|p| &p.boundary), shots: est.shots };
    Ok((est, errors))
}

/// Detection events drawn from the independent-edge model `probs`: every
/// edge fires its two endpoints and every boundary edge its single vertex.
/// Shot `i` uses the stream seeded with `seed ^ i`.
pub fn sample_planted(g: &DetectionGraph, probs: &EdgeProbabilities, shots: usize, seed: u64) -> Vec<Vec<u8>> {
    (0..shots as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ i);
            let mut x = vec![0u8; g.num_vertices()];
            for (e, &p) in g.edges.iter().zip(&probs.edge) {
                if p > 0.0 && rng.random::<f64>() < p {
                    x[e.a] ^= 1;
                    x[e.b] ^= 1;
                }
            }
            for (v, &p) in probs.boundary.iter().enumerate() {
                if p > 0.0 && rng.random::<f64>() < p {
                    x[v] ^= 1;
                }
            }
            x
        })
        .collect()
}

/// Summed path probabilities between vertex pairs up to two rounds apart,
/// and from every vertex to the boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct PathProbabilities {
    n: usize,
    pair: Vec<f64>,
    pub boundary: Vec<f64>,
    pub cap: usize,
}

impl PathProbabilities {
    pub fn pair(&self, k: usize, l: usize) -> f64 {
        self.pair[k * self.n + l]
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }
}

/// Sums `∏ p_e` over simple paths of at most `cap` edges. Boundary paths
/// end in a boundary edge, which counts towards the cap.
pub fn path_sum_probabilities(g: &DetectionGraph, probs: &EdgeProbabilities, cap: usize) -> Result<PathProbabilities> {
    if cap == 0 {
        return Err(Error::InvalidInput("path cap must be at least 1".into()));
    }
    if probs.edge.len() != g.edges.len() || probs.boundary.len() != g.num_vertices() {
        return Err(Error::SizeMismatch { expected: g.edges.len(), got: probs.edge.len() });
    }
    let n = g.num_vertices();
    let rows: Vec<(Vec<f64>, f64)> = (0..n)
        .into_par_iter()
        .map(|src| {
            let mut row = vec![0.0; n];
            let mut to_boundary = 0.0;
            let mut visited = vec![false; n];
            visited[src] = true;
            walk(g, probs, cap, src, 0, 1.0, &mut visited, &mut row, &mut to_boundary);
            let rs = g.round(src);
            for (l, p) in row.iter_mut().enumerate() {
                if g.round(l).abs_diff(rs) > 2 {
                    *p = 0.0;
                }
            }
            (row, to_boundary)
        })
        .collect();
    let mut pair = Vec::with_capacity(n * n);
    let mut boundary = Vec::with_capacity(n);
    for (row, b) in rows {
        pair.extend(row);
        boundary.push(b);
    }
    Ok(PathProbabilities { n, pair, boundary, cap })
}

#[allow(clippy::too_many_arguments)]
fn walk(
    g: &DetectionGraph,
    probs: &EdgeProbabilities,
    cap: usize,
    v: usize,
    depth: usize,
    acc: f64,
    visited: &mut [bool],
    row: &mut [f64],
    to_boundary: &mut f64,
) {
    if depth >= cap {
        return;
    }
    *to_boundary += acc * probs.boundary[v];
    for &(u, e) in g.neighbours(v) {
        let p = probs.edge[e];
        if visited[u] || p == 0.0 {
            continue;
        }
        let next = acc * p;
        row[u] += next;
        visited[u] = true;
        walk(g, probs, cap, u, depth + 1, next, visited, row, to_boundary);
        visited[u] = false;
    }
}

#[derive(Serialize, Deserialize)]
struct EdgeEntry {
    from: String,
    to: String,
    kind: EdgeKind,
    p: f64,
    /// `-ln p`; absent when `p = 0`.
    w: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct BoundaryEntry {
    vertex: String,
    p: f64,
    /// `-ln p`; absent when `p = 0`.
    w: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct Meta {
    shots: usize,
    basis: Basis,
    n_cycles: usize,
    cap: usize,
}

#[derive(Serialize, Deserialize)]
struct WeightsFile {
    paper_metric: String,
    edges: Vec<EdgeEntry>,
    boundary: Vec<BoundaryEntry>,
    meta: Meta,
}

fn weight(p: f64) -> Option<f64> {
    (p > 0.0).then(|| -p.ln())
}

/// JSON form of learned edge probabilities.
pub fn weights_to_json(g: &DetectionGraph, probs: &EdgeProbabilities, cap: usize) -> Result<String> {
    let file = WeightsFile {
        paper_metric: "edge_probabilities".into(),
        edges: g
            .edges
            .iter()
            .zip(&probs.edge)
            .map(|(e, &p)| EdgeEntry { from: g.vertex_name(e.a), to: g.vertex_name(e.b), kind: e.kind, p, w: weight(p) })
            .collect(),
        boundary: probs
            .boundary
            .iter()
            .enumerate()
            .map(|(k, &p)| BoundaryEntry { vertex: g.vertex_name(k), p, w: weight(p) })
            .collect(),
        meta: Meta { shots: probs.shots, basis: g.basis, n_cycles: g.n_cycles, cap },
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

/// Parses weights written by [`weights_to_json`], rebuilding the graph.
pub fn weights_from_json(code: &Surface17, text: &str) -> Result<(DetectionGraph, EdgeProbabilities, usize)> {
    let file: WeightsFile = serde_json::from_str(text)?;
    let g = DetectionGraph::new(code, file.meta.basis, file.meta.n_cycles)?;
    let mut edge = vec![0.0; g.edges.len()];
    let mut seen = vec![false; g.edges.len()];
    for e in &file.edges {
        let (a, b) = (g.parse_vertex(&e.from)?, g.parse_vertex(&e.to)?);
        let k = g.find_edge(a, b).ok_or_else(|| Error::InvalidInput(format!("no edge {}–{} in graph", e.from, e.to)))?;
        check_p(e.p)?;
        edge[k] = e.p;
        seen[k] = true;
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::InvalidInput("weights file is missing edges".into()));
    }
    let mut boundary = vec![0.0; g.num_vertices()];
    for b in &file.boundary {
        check_p(b.p)?;
        boundary[g.parse_vertex(&b.vertex)?] = b.p;
    }
    let probs = EdgeProbabilities { edge, boundary, shots: file.meta.shots };
    Ok((g, probs, file.meta.cap))
}

fn check_p(p: f64) -> Result<()> {
    if (0.0..0.5).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("edge probability {p} outside [0, 0.5)")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::build_surface17;

    #[test]
    fn path_sums_of_small_patterns() {
        let g = DetectionGraph::new(&build_surface17(), Basis::Z, 2).unwrap();
        let mut probs = EdgeProbabilities { edge: vec![0.0; g.edges.len()], boundary: vec![0.0; g.num_vertices()], shots: 0 };
        // Single direct edge.
        let k = g.find_edge(0, 4).unwrap();
        probs.edge[k] = 0.1;
        let ps = path_sum_probabilities(&g, &probs, 1).unwrap();
        assert_eq!(ps.pair(0, 4), 0.1);
        assert_eq!(ps.pair(4, 0), 0.1);
        // Two parallel two-edge paths 0-1-5 and 0-4-5 (space then time).
        probs.edge[k] = 0.0;
        for (a, b) in [(0, 1), (1, 5), (0, 4), (4, 5)] {
            probs.edge[g.find_edge(a, b).unwrap()] = 0.1;
        }
        let ps = path_sum_probabilities(&g, &probs, 2).unwrap();
        assert!((ps.pair(0, 5) - 0.02).abs() < 1e-15);
        let ps1 = path_sum_probabilities(&g, &probs, 1).unwrap();
        assert_eq!(ps1.pair(0, 5), 0.0);
    }

    #[test]
    fn json_round_trip() {
        let code = build_surface17();
        let g = DetectionGraph::new(&code, Basis::X, 2).unwrap();
        let probs = EdgeProbabilities {
            edge: (0..g.edges.len()).map(|k| 0.001 * k as f64).collect(),
            boundary: vec![0.01; g.num_vertices()],
            shots: 7,
        };
        let text = weights_to_json(&g, &probs, 4).unwrap();
        let (g2, p2, cap) = weights_from_json(&code, &text).unwrap();
        assert_eq!(g2, g);
        assert_eq!(p2, probs);
        assert_eq!(cap, 4);
    }
}
