//! Benchmark harness for studying how neural-network proxy landscapes
//! degrade derivative-free optimization.
//!
//! The pipeline: pick a benchmark function, sample its domain, train an MLP
//! proxy on the labeled samples, run PSO/GA on either the true function or
//! the proxy, and measure the Euclidean distance of the returned solution
//! from the known global minimizer.

pub mod benchmarks;
pub mod cli;
pub mod error;
pub mod harness;
pub mod neuralnet;
pub mod optimizers;
pub mod sampling;

pub use error::{Error, Result};

/// Format an f64 with 17 significant digits; round-trips bit-exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::fmt_f64;

    #[test]
    fn fmt_f64_round_trips() {
        for v in [
            0.0,
            1.0,
            -2.048,
            std::f64::consts::PI,
            1.0 / 3.0,
            6.02e23,
            f64::MIN_POSITIVE,
        ] {
            let parsed: f64 = fmt_f64(v).parse().unwrap();
            assert_eq!(parsed.to_bits(), v.to_bits());
        }
    }
}
