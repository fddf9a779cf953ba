//! Social-welfare experiments on synthetic or loaded networks.

pub mod config;
pub mod network;
pub mod output;
pub mod sweep;

pub use config::{
    sample_valuations, DpAlignment, GraphSource, SellerChoice, SweepConfig, SweepMode, ValuationLaw,
};
pub use network::{gnm, load_edge_list, parse_edge_list, preferential_attachment, Network};
pub use output::{emit_outputs, write_csv};
pub use sweep::{build_network, run_sweep, run_sweep_on, ResultRow};
