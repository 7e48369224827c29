//! Benchmark-only crate; see `benches/pipeline.rs`.

use dfcb::{
    Coefficients, Mode, SeedSpec, TimeProfile, TransformedSolution, TrivialBackground,
};

/// A well-conditioned N-fold solution used by all benchmarks.
pub fn bench_solution(n: usize, mode: Mode) -> TransformedSolution {
    let coeffs = Coefficients::new(
        TimeProfile::Exponential { a: 1.0, b: 0.1 },
        TimeProfile::SinusoidalOffset { a: 0.2, omega: 1.0, phi: 0.0, d: 0.0 },
    );
    let seeds = [
        SeedSpec::new(0.4, 2.0, 0.15, 0.1),
        SeedSpec::new(0.65, 2.0, -0.1, 0.2),
        SeedSpec::new(0.9, 2.0, 0.2, -0.15),
    ];
    TransformedSolution::new(TrivialBackground::new(coeffs), seeds[..n].to_vec(), mode).unwrap()
}
