//! Small reference markets used throughout the tests, the verification
//! suites and the CLI's built-in instances.

use crate::graph::{BuyerId, GlobalProfile};

/// Ids of the seven-buyer example network: `a..g` map to `1..7`.
pub mod seven {
    use crate::graph::BuyerId;

    pub const A: BuyerId = BuyerId(1);
    pub const B: BuyerId = BuyerId(2);
    pub const C: BuyerId = BuyerId(3);
    pub const D: BuyerId = BuyerId(4);
    pub const E: BuyerId = BuyerId(5);
    pub const F: BuyerId = BuyerId(6);
    pub const G: BuyerId = BuyerId(7);
}

/// Seven-buyer example network. The seller knows `a, b, c`; `a` knows
/// `d, e`; `b` knows `f`; `f` knows `g`. Valuations are
/// `a=10, b=8, c=14, d=9, e=12, f=15` and `g = v_g`.
pub fn seven_buyer(v_g: f64) -> GlobalProfile {
    GlobalProfile::new([seven::A, seven::B, seven::C])
        .with_buyer(seven::A, 10.0, [4, 5])
        .with_buyer(seven::B, 8.0, [6])
        .with_buyer(seven::C, 14.0, [])
        .with_buyer(seven::D, 9.0, [])
        .with_buyer(seven::E, 12.0, [])
        .with_buyer(seven::F, 15.0, [7])
        .with_buyer(seven::G, v_g, [])
}

/// Default valuation of `g` when none is given.
pub const SEVEN_BUYER_DEFAULT_VG: f64 = 11.0;

/// Seller with children `a = 1 (v=1)` and `c = 3 (v=3)`; `a` has one
/// child `b = 2 (v=2)`.
pub fn three_node() -> GlobalProfile {
    GlobalProfile::new([BuyerId(1), BuyerId(3)])
        .with_buyer(1, 1.0, [2])
        .with_buyer(2, 2.0, [])
        .with_buyer(3, 3.0, [])
}
