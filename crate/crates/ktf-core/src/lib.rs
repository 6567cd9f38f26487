//! Computational toolkit for the Kuznetsov trace formula on `Gamma_0(N)`
//! with nebentypus.
//!
//! The crate is organized bottom-up:
//!
//! * [`arith`]: factorization, multiplicative functions, unit groups, CRT.
//! * [`characters`]: Dirichlet characters, conductors, local components.
//! * [`expsums`]: Gauss sums and generalized Kloosterman sums by three
//!   independent methods, quadratic congruences and Weil-bound certificates.
//! * [`specfun`]: complex Gamma, K- and J-Bessel functions of imaginary order.
//! * [`quadrature`]: Gauss-Kronrod, tanh-sinh and trapezoid rules.
//! * [`transforms`]: the `h -> Q -> V` pipeline and the Zagier transform.
//! * [`eisenstein`]: the Eisenstein basis, divisor sums, Dirichlet L-values
//!   and the Fourier expansion checked against the lattice sum.
//! * [`ktf`]: every term of the trace formula, the classical cross-check
//!   and the spectral-data CSV.
//! * [`equidist`]: Chebyshev polynomials, Sato-Tate moments and scans.

pub mod arith;
pub mod characters;
pub mod eisenstein;
pub mod error;
pub mod equidist;
pub mod expsums;
pub mod ktf;
pub mod quadrature;
pub mod specfun;
pub mod transforms;

pub use error::{Error, Result};

/// The chapters of the guide in `book/`, compiled so that their code
/// blocks run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/characters.md")]
    mod characters {}
    #[doc = include_str!("../../../book/src/exponential-sums.md")]
    mod exponential_sums {}
    #[doc = include_str!("../../../book/src/transforms.md")]
    mod transforms {}
    #[doc = include_str!("../../../book/src/eisenstein.md")]
    mod eisenstein {}
    #[doc = include_str!("../../../book/src/trace-formula.md")]
    mod trace_formula {}
    #[doc = include_str!("../../../book/src/equidistribution.md")]
    mod equidistribution {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
