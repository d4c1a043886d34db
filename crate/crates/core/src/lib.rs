//! Opinion dynamics on directed signed (trust/mistrust) networks.
//!
//! The crate covers DeGroot-type updates in discrete and continuous time,
//! under fixed and switching topologies:
//!
//! * [`graph`]: signed digraphs, strongly connected components, root sets,
//!   structural balance, enlarged and union graphs;
//! * [`lift`]: trust matrices, signed Laplacians and their lifted
//!   nonnegative `2n`-state counterparts;
//! * [`dynamics`]: trajectory simulation and trajectory statistics;
//! * [`limits`]: closed-form limits and outcome classification.

pub mod dynamics;
pub mod error;
pub mod expm;
pub mod graph;
pub mod lift;
pub mod limits;

pub use error::{Error, Result};
pub use graph::{
    check_balance, check_balance_within, common_bipartition, enlarge, root_vertex_set,
    scc_decompose, union_graphs, BalancePartition, Edge, SccDecomposition, SignSet,
    SignedDigraph, UnionSignGraph,
};
pub use lift::{
    lift_laplacian, lift_stochastic, signed_laplacian, split_signs, tree_canonical_form,
    weights_to_trust_matrix, InteractionMatrix, LiftedLaplacian, LiftedStochastic,
    SignedLaplacian, TreeCanonicalForm, TrustMatrix,
};
pub use dynamics::{
    simulate_continuous, simulate_discrete, simulate_lifted_continuous, simulate_lifted_discrete,
    simulate_until_converged, step_discrete, ContinuousMethod, ContinuousSchedule,
    DiscreteSchedule, Intervals, Model, OpinionState, Piece, Selector, Trajectory,
};
pub use limits::{
    classify_switching, lemma10_limit, predict_fixed, stationary_left_vector, FixedSystem,
    LiftedBlockForm, OutcomeKind, OutcomePrediction, StationaryData, SwitchingSystem, TheoremTag,
};
