//! Expected utility networks: paired probability and utility graphs over a
//! shared set of discrete variables, with ratio potentials relative to a
//! reference state.

pub mod bayes;
pub mod decision;
pub mod error;
pub mod event;
mod factor;
pub mod format;
pub mod independence;
pub mod inference;
pub mod model;
pub mod space;
pub mod table;

pub use bayes::BayesNet;
pub use decision::auction::{
    auction_best_response, build_vickrey_auction, AuctionModel, BestResponse,
};
pub use decision::{
    classify_relevance, decompose_decisions, optimal_decision, solve_decomposed, DecisionOutcome,
    DecisionProblem, Relevance,
};
pub use error::{ErrorKind, EunError, Result};
pub use event::Event;
pub use independence::{
    declared_independent, derive_perfect_map, eu_independent_events, eu_independent_vars,
    generalized_independent, separates, table_independent,
};
pub use inference::{
    conditional_event_utility, conditional_probability, event_utility, local_conditional_eu,
    probability, utility_bayes, value, MeasureTriple, Standing,
};
pub use model::{
    BuildOptions, EunGraph, ImapStatus, Layer, Network, Ordering, PotentialTable, Structure,
    VariableSpec,
};
pub use space::{Assignment, PartialAssignment, StateSpace, VarId};
pub use table::JointTable;
