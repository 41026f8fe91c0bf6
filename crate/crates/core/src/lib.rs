//! Power-series solver for Sturm–Liouville problems with several spectral
//! parameters.
//!
//! The library represents the solutions of
//!
//! ```text
//! (p y')' + q y = (λ₁ r₁ + … + λ_d r_d) y
//! ```
//!
//! (and the generalized variant where each rᵢ y is replaced by rᵢ y + sᵢ y')
//! as power series in the spectral parameters λ₁…λ_d. The series
//! coefficients are built from towers of iterated integrals over a fixed
//! mesh, which makes the characteristic function of a two-point boundary
//! value problem a *polynomial* in the spectral parameters. Eigenvalues,
//! eigencurves and reflectance/transmittance spectra then reduce to
//! polynomial evaluation and root finding.
//!
//! The crate is organized bottom-up:
//!
//! * [`grid`] — meshes, sampled functions, cumulative quadrature;
//! * [`indices`] — multi-indices and the enumeration of the integral tower;
//! * [`exprparse`] — a small expression language for coefficient input;
//! * [`seed`] — construction of a non-vanishing particular solution;
//! * [`powers`] — the recursive integral tables;
//! * [`series`] — assembly, normalization and evaluation of the series;
//! * [`spectral`] — characteristic polynomials, roots, eigencurve rasters;
//! * [`optics`] — reflectance/transmittance of a planar graded layer;
//! * [`oracle`] — independent reference computations used for validation.

pub mod error;
pub mod exprparse;
pub mod fmt;
pub mod grid;
pub mod indices;
pub mod optics;
pub mod oracle;
pub mod par;
pub mod powers;
pub mod problem;
pub mod seed;
pub mod series;
pub mod spectral;

pub use num_complex::Complex64;
