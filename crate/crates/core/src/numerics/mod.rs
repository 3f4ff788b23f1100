//! Scalar numerics shared by every other module: bracketed root finding,
//! truncated adaptive quadrature on the real line, and reproducible random
//! number streams.

mod quadrature;
mod rng;
mod root;

pub use quadrature::{integrate_interval, integrate_real_line, QuadratureSpec};
pub use rng::RngStream;
pub use root::{find_root_bracketed, Bracket};

/// Standard normal density.
pub fn std_normal_pdf(z: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Standard normal distribution function, accurate in both tails.
pub fn std_normal_cdf(z: f64) -> f64 {
    if z == f64::INFINITY {
        return 1.0;
    }
    if z == f64::NEG_INFINITY {
        return 0.0;
    }
    0.5 * statrs::function::erf::erfc(-z / std::f64::consts::SQRT_2)
}

/// Single 15-point Gauss-Kronrod panel on `[a, b]`; returns the estimate
/// and the Kronrod-Gauss difference.
pub fn kronrod_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> crate::Result<(f64, f64)> {
    quadrature::gauss_kronrod_15(f, a, b)
}
