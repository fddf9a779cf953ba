//! Benchmark inputs: truthful reports on synthetic networks.

use dpdm::experiments::{preferential_attachment, sample_valuations, ValuationLaw};
use dpdm::GlobalProfile;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Reports on an `n`-node preferential-attachment graph with `m` edges per
/// new node, node 0 selling and uniform valuations on `[0, 100]`.
pub fn pa_reports(n: usize, m: usize, seed: u64) -> GlobalProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let net = preferential_attachment(n, m, &mut rng);
    let vals = sample_valuations(n, ValuationLaw::Uniform, 100.0, &mut rng);
    net.profiles(0, &vals)
}
