//! Moment engine for polynomial stochastic processes.
//!
//! The library is organised around the reduction of conditional moments of a
//! polynomial diffusion to deterministic linear algebra: a generator acting on
//! polynomials is compiled into a dual matrix on coefficient vectors, and
//! moments are read off matrix exponentials of that matrix or its transpose.
//! On top of the finite-dimensional engine sit two concrete forward-variance
//! applications (Bergomi-family and Volterra VIX moments) and the expected
//! signature of Brownian motion in the truncated tensor algebra. Every
//! analytic route has an independent Monte Carlo oracle in [`mcsim`].

pub mod forwardvariance;
pub mod generator;
pub mod mcsim;
pub mod moments;
pub mod polybasis;
pub mod quadrature;
pub mod signature;
