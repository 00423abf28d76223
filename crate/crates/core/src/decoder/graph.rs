use std::fmt;

use serde::{Deserialize, Serialize};

use crate::code::{Basis, Surface17, NUM_DATA};
use crate::error::{Error, Result};

/// Error mechanism represented by an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    /// Same stabilizer, consecutive rounds: auxiliary error.
    Time,
    /// Same stabilizer, two rounds apart: readout misclassification.
    Misclassification,
    /// Neighbouring stabilizers, same round: shared data-qubit error.
    Space,
    /// Neighbouring stabilizers, consecutive rounds: data error between
    /// the two stabilizer interactions.
    Diagonal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GraphEdge {
    pub a: usize,
    pub b: usize,
    pub kind: EdgeKind,
    /// Whether the error flips the logical operator of the decoded basis.
    pub crosses: bool,
}

/// Space-time detection graph of one basis: vertex `4 (m - 1) + i` is the
/// detection event of the `i`-th stabilizer of that basis in round
/// `m = 1..=n + 1`, the last round coming from the data readout.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectionGraph {
    pub basis: Basis,
    pub n_cycles: usize,
    pub edges: Vec<GraphEdge>,
    /// Whether a boundary error next to stabilizer `i` flips the logical.
    pub boundary_crosses: [bool; 4],
    adjacency: Vec<Vec<(usize, usize)>>,
}

/// Vertex name such as `Z2@3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VertexId {
    pub basis: Basis,
    pub stabilizer: usize,
    pub round: usize,
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}@{}", self.basis, self.stabilizer + 1, self.round)
    }
}

impl DetectionGraph {
    pub fn new(code: &Surface17, basis: Basis, n_cycles: usize) -> Result<Self> {
        if n_cycles == 0 {
            return Err(Error::InvalidInput("detection graph needs at least one cycle".into()));
        }
        let stabs: Vec<u64> = basis.stabilizers().map(|k| code.stabilizers[k].data_mask()).collect();
        let logical = code.logical(basis).data_mask();
        let rounds = n_cycles + 1;
        let v = |m: usize, i: usize| 4 * (m - 1) + i;

        // Data qubits shared by neighbouring stabilizers, and boundary qubits.
        let mut neighbours = Vec::new();
        let mut boundary: [Option<bool>; 4] = [None; 4];
        for j in 0..NUM_DATA {
            let on: Vec<usize> = (0..4).filter(|&i| stabs[i] >> j & 1 == 1).collect();
            let crosses = logical >> j & 1 == 1;
            match on.as_slice() {
                [a, b] => neighbours.push((*a, *b, crosses)),
                [a] => match boundary[*a] {
                    None => boundary[*a] = Some(crosses),
                    Some(c) if c != crosses => {
                        return Err(Error::InvalidInput(format!("boundary of stabilizer {a} has inconsistent logical parity")))
                    }
                    _ => {}
                },
                _ => {}
            }
        }

        let mut edges = Vec::new();
        let mut push = |a, b, kind, crosses| edges.push(GraphEdge { a, b, kind, crosses });
        for m in 1..=rounds {
            for i in 0..4 {
                if m < rounds {
                    push(v(m, i), v(m + 1, i), EdgeKind::Time, false);
                }
                if m + 2 <= rounds {
                    push(v(m, i), v(m + 2, i), EdgeKind::Misclassification, false);
                }
            }
            for &(a, b, crosses) in &neighbours {
                push(v(m, a), v(m, b), EdgeKind::Space, crosses);
                if m < rounds {
                    push(v(m, a), v(m + 1, b), EdgeKind::Diagonal, crosses);
                    push(v(m, b), v(m + 1, a), EdgeKind::Diagonal, crosses);
                }
            }
        }
        let mut adjacency = vec![Vec::new(); 4 * rounds];
        for (k, e) in edges.iter().enumerate() {
            adjacency[e.a].push((e.b, k));
            adjacency[e.b].push((e.a, k));
        }
        Ok(DetectionGraph { basis, n_cycles, edges, boundary_crosses: boundary.map(|b| b.unwrap_or(false)), adjacency })
    }

    pub fn num_vertices(&self) -> usize {
        4 * (self.n_cycles + 1)
    }

    pub fn round(&self, vertex: usize) -> usize {
        vertex / 4 + 1
    }

    pub fn vertex_id(&self, vertex: usize) -> VertexId {
        VertexId { basis: self.basis, stabilizer: vertex % 4, round: self.round(vertex) }
    }

    pub fn vertex_name(&self, vertex: usize) -> String {
        self.vertex_id(vertex).to_string()
    }

    pub fn parse_vertex(&self, name: &str) -> Result<usize> {
        let bad = || Error::InvalidInput(format!("bad vertex name '{name}'"));
        let (stab, round) = name.split_once('@').ok_or_else(bad)?;
        let basis: Basis = stab.get(..1).ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let i: usize = stab[1..].parse().map_err(|_| bad())?;
        let m: usize = round.parse().map_err(|_| bad())?;
        if basis != self.basis || !(1..=4).contains(&i) || !(1..=self.n_cycles + 1).contains(&m) {
            return Err(bad());
        }
        Ok(4 * (m - 1) + i - 1)
    }

    /// `(neighbour, edge index)` pairs of `vertex`.
    pub fn neighbours(&self, vertex: usize) -> &[(usize, usize)] {
        &self.adjacency[vertex]
    }

    pub fn find_edge(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency[a].iter().find(|&&(n, _)| n == b).map(|&(_, k)| k)
    }
}
