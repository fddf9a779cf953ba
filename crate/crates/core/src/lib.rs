//! Differentially private diffusion auctions.
//!
//! A seller offers one item to buyers who are connected by a social
//! network. Buyers report a valuation and their neighbors; the reports
//! induce a digraph rooted at the seller whose dominator tree (the
//! *critical tree*) drives every allocation rule in [`mechanisms`].

pub mod error;
pub mod experiments;
pub mod fixtures;
pub mod graph;
pub mod instance;
pub mod mechanisms;
pub mod quadrature;
pub mod scoring;
pub mod verification;

pub use error::{ExperimentError, GraphError, MechanismError, ScoringError};
pub use graph::{
    build_critical_tree, build_profile_digraph, is_critical, reachable_from_seller, BuyerId,
    CriticalTree, GlobalProfile, Profile, ProfileDigraph,
};
pub use mechanisms::{
    AuctionOutcome, GammaSequence, Market, Mechanism, MechanismTag, WinDistribution,
};
pub use instance::Instance;
pub use scoring::{ScoreConfig, ScoreKind};
