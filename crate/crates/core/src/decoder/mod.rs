//! Matching decoder: detection graph, edge probabilities learned from
//! syndrome correlations, path-summed weights and minimum-weight perfect
//! matching.

mod blossom;
mod graph;
mod matching;
mod weights;

pub use blossom::{max_weight_matching, min_weight_perfect_matching};
pub use graph::{DetectionGraph, EdgeKind, GraphEdge, VertexId};
pub use matching::{correct_logical, mwpm_decode, Decoder, MatchingResult};
pub use weights::{
    estimate_edge_probabilities, estimate_with_errors, path_sum_probabilities, sample_planted, weights_from_json,
    weights_to_json, EdgeProbabilities, PathProbabilities, DEFAULT_PATH_CAP, P_BOUNDARY_FLOOR, P_MAX,
};
