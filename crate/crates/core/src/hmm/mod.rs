//! Hidden Markov models with left-to-right or circular topology, first or
//! second order, and diagonal Gaussian-mixture emissions.

mod chain;
pub mod gmm;
mod model;
pub mod topology;
pub mod transitions;

pub use gmm::{kmeans_init, Gmm, VarFloor};
pub use model::{runs, AcousticHmm, Alignment, EmConfig, Hmm, StateSegment, TrainReport, STOCHASTIC_TOL};
pub use topology::{Order, TopologyKind, TopologySpec};
pub use transitions::{build_topology, TransitionModel};

/// `ln(sum(exp(x)))`, `-inf` for an empty slice or all `-inf` input.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}
