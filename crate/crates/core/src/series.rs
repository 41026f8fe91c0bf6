//! Assembly, normalization and evaluation of the spectral power series.
//!
//! From the two integral-table families the solver forms four series, each
//! a polynomial in the spectral parameters with coefficients that are
//! either full-mesh functions or right-endpoint scalars:
//!
//! ```text
//! u1  = u0 · Σ_n  X̃^{2n} λ^n           (equals u0 at the base point)
//! u2  = u0 · Σ_n  X^{2n}  λ^n           (vanishes at the base point)
//! u1' = (u0'/u0)·u1 + (1/(p·u0)) Σ_n Σ_i X̃^{2n−δᵢ} λ^n
//! u2' = likewise from X, plus the constant 1/(p·u0) from the degree-0 entry
//! ```
//!
//! Normalization turns these into the canonical basis `v1, v2` with
//! `v1(x0) = 1, v1'(x0) = 0, v2(x0) = 0, v2'(x0) = 1`:
//!
//! ```text
//! v1 = u1/u0(x0) − p(x0)·u0'(x0)·u2        v2 = p(x0)·u0(x0)·u2
//! ```
//!
//! and identically for the derivatives. A basis can be built about a
//! shifted spectral origin λ0 (the weights fold `Σ λ0ᵢrᵢ` into `q`); its
//! evaluation then substitutes `λ − λ0`, which markedly improves accuracy
//! far from the origin.

use crate::error::{Error, Result};
use crate::grid::{Grid, Quadrature, SampledFunction};
use crate::indices::{enumerate_compositions, MultiIndex};
use crate::powers::{build_tables, PowerTable, TableMode, TableRequest};
use crate::problem::Coefficients;
use crate::seed::{build_seed, SeedOptions, SeedSolution};
use num_complex::Complex64;

/// Which of the eight assembled series a [`SeriesSolution`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    U1,
    U2,
    U1P,
    U2P,
    V1,
    V2,
    V1P,
    V2P,
}

/// Coefficient storage: right-endpoint scalars or full-mesh vectors.
pub trait Storage: Clone + Send + Sync {
    fn zeros_like(&self) -> Self;
    /// `self += c · other`.
    fn axpy(&mut self, c: Complex64, other: &Self);
    fn scale(&mut self, c: Complex64);
}

impl Storage for Complex64 {
    fn zeros_like(&self) -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn axpy(&mut self, c: Complex64, other: &Self) {
        *self += c * other;
    }
    fn scale(&mut self, c: Complex64) {
        *self *= c;
    }
}

impl Storage for Vec<Complex64> {
    fn zeros_like(&self) -> Self {
        vec![Complex64::new(0.0, 0.0); self.len()]
    }
    fn axpy(&mut self, c: Complex64, other: &Self) {
        debug_assert_eq!(self.len(), other.len());
        for (a, b) in self.iter_mut().zip(other) {
            *a += c * b;
        }
    }
    fn scale(&mut self, c: Complex64) {
        for a in self.iter_mut() {
            *a *= c;
        }
    }
}

/// One series: a polynomial in the spectral parameters.
#[derive(Debug, Clone)]
pub struct SeriesSolution<T> {
    pub kind: SeriesKind,
    pub d: usize,
    /// Series order: terms satisfy `|exponent| ≤ order`.
    pub order: usize,
    /// `(λ-exponent, coefficient)`, in (degree, lexicographic) order.
    pub terms: Vec<(MultiIndex, T)>,
    /// λ-independent addition (derivative series only).
    pub constant_extra: Option<T>,
}

impl<T: Storage> SeriesSolution<T> {
    /// Evaluate at the shifted parameters `μ` (callers apply `λ − λ0`).
    pub fn eval(&self, mu: &[Complex64]) -> T {
        assert_eq!(mu.len(), self.d, "parameter count mismatch");
        let max_e = self.order;
        // Power tables μᵢ^e for e = 0..=max_e.
        let pows: Vec<Vec<Complex64>> = mu
            .iter()
            .map(|&m| {
                let mut v = Vec::with_capacity(max_e + 1);
                let mut acc = Complex64::new(1.0, 0.0);
                for _ in 0..=max_e {
                    v.push(acc);
                    acc *= m;
                }
                v
            })
            .collect();
        let template = self
            .terms
            .first()
            .map(|(_, t)| t)
            .or(self.constant_extra.as_ref())
            .expect("series has at least one term");
        let mut acc = template.zeros_like();
        for (e, coeff) in &self.terms {
            let mut mono = Complex64::new(1.0, 0.0);
            for (i, &ei) in e.entries().iter().enumerate() {
                mono *= pows[i][ei as usize];
            }
            acc.axpy(mono, coeff);
        }
        if let Some(extra) = &self.constant_extra {
            acc.axpy(Complex64::new(1.0, 0.0), extra);
        }
        acc
    }
}

/// The four U-series of one problem before normalization.
#[derive(Debug, Clone)]
pub struct Quartet<T> {
    pub u1: SeriesSolution<T>,
    pub u2: SeriesSolution<T>,
    pub u1p: SeriesSolution<T>,
    pub u2p: SeriesSolution<T>,
}

/// The normalized basis `v1, v2` (and derivatives) of one problem.
#[derive(Debug, Clone)]
pub struct SolutionBasis<T> {
    pub v1: SeriesSolution<T>,
    pub v2: SeriesSolution<T>,
    pub v1p: SeriesSolution<T>,
    pub v2p: SeriesSolution<T>,
    /// Spectral origin of the series; evaluation substitutes `λ − λ0`.
    pub lambda0: Vec<Complex64>,
    pub grid: Grid,
    pub d: usize,
    pub order: usize,
}

/// Full-mesh basis: coefficients are mesh vectors.
pub type FullBasis = SolutionBasis<Vec<Complex64>>;
/// Right-endpoint basis: coefficients are scalars.
pub type EndpointBasis = SolutionBasis<Complex64>;

/// Values of the quartet `v1, v2, v1', v2'` at one spectral point.
#[derive(Debug, Clone)]
pub struct QuartetValues<T> {
    pub v1: T,
    pub v2: T,
    pub v1p: T,
    pub v2p: T,
}

impl<T: Storage> SolutionBasis<T> {
    /// Evaluate all four series at one spectral point.
    pub fn eval_at(&self, lambdas: &[Complex64]) -> Result<QuartetValues<T>> {
        if lambdas.len() != self.d {
            return Err(Error::InvalidProblem(format!(
                "{} spectral values for {} parameters",
                lambdas.len(),
                self.d
            )));
        }
        let mu: Vec<Complex64> = lambdas
            .iter()
            .zip(&self.lambda0)
            .map(|(l, l0)| l - l0)
            .collect();
        Ok(QuartetValues {
            v1: self.v1.eval(&mu),
            v2: self.v2.eval(&mu),
            v1p: self.v1p.eval(&mu),
            v2p: self.v2p.eval(&mu),
        })
    }
}

impl FullBasis {
    /// Collapse to the right-endpoint basis by keeping the last sample of
    /// every coefficient. The result is identical (bit for bit) to a basis
    /// assembled in endpoint mode.
    pub fn at_x2(&self) -> EndpointBasis {
        let shrink = |s: &SeriesSolution<Vec<Complex64>>| SeriesSolution {
            kind: s.kind,
            d: s.d,
            order: s.order,
            terms: s
                .terms
                .iter()
                .map(|(e, v)| (e.clone(), *v.last().unwrap()))
                .collect(),
            constant_extra: s.constant_extra.as_ref().map(|v| *v.last().unwrap()),
        };
        SolutionBasis {
            v1: shrink(&self.v1),
            v2: shrink(&self.v2),
            v1p: shrink(&self.v1p),
            v2p: shrink(&self.v2p),
            lambda0: self.lambda0.clone(),
            grid: self.grid,
            d: self.d,
            order: self.order,
        }
    }

    /// Evaluate the quartet on the whole mesh as sampled functions.
    pub fn eval_sampled(&self, lambdas: &[Complex64]) -> Result<QuartetValues<SampledFunction>> {
        let q = self.eval_at(lambdas)?;
        let wrap = |values: Vec<Complex64>| SampledFunction {
            grid: self.grid,
            values,
        };
        Ok(QuartetValues {
            v1: wrap(q.v1),
            v2: wrap(q.v2),
            v1p: wrap(q.v1p),
            v2p: wrap(q.v2p),
        })
    }
}

fn check_pair(xt: &PowerTable, xc: &PowerTable) -> Result<()> {
    use crate::powers::Family;
    if xt.family != Family::Xtilde || xc.family != Family::X {
        return Err(Error::OrderMismatch(
            "assemble expects the (XTILDE, X) table pair in that order".into(),
        ));
    }
    if xt.d != xc.d || xt.n != xc.n || xt.mode != xc.mode || xt.generalized != xc.generalized {
        return Err(Error::OrderMismatch(format!(
            "table pair disagrees: d {}/{}, order {}/{}, mode {:?}/{:?}",
            xt.d, xc.d, xt.n, xc.n, xt.mode, xc.mode
        )));
    }
    if !xt.grid.compatible(&xc.grid) {
        return Err(Error::OrderMismatch(
            "table pair built on different meshes".into(),
        ));
    }
    Ok(())
}

/// λ-exponents of the truncated series, in (degree, lexicographic) order.
fn lambda_exponents(d: usize, order: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for k in 0..=order {
        out.extend(enumerate_compositions(d, k));
    }
    out
}

/// Assemble the full-mesh U-quartet from a FULL table pair.
pub fn assemble_full(
    xt: &PowerTable,
    xc: &PowerTable,
    coeffs: &Coefficients,
    seed: &SeedSolution,
) -> Result<Quartet<Vec<Complex64>>> {
    check_pair(xt, xc)?;
    if xt.mode != TableMode::Full {
        return Err(Error::OrderMismatch(
            "full-mesh assembly needs FULL tables".into(),
        ));
    }
    let grid = xt.grid;
    if !grid.compatible(&coeffs.grid()) || !grid.compatible(&seed.u0.grid) {
        return Err(Error::GridMismatch(
            "tables, coefficients and seed must share one mesh".into(),
        ));
    }
    let n_pts = grid.len();
    let d = xt.d;
    let u0 = &seed.u0.values;
    let u0p = &seed.u0_prime.values;
    let inv_pu0: Vec<Complex64> = (0..n_pts)
        .map(|t| 1.0 / (coeffs.p.values[t] * u0[t]))
        .collect();
    let exps = lambda_exponents(d, xt.n / 2);

    let build =
        |table: &PowerTable, kind: SeriesKind| -> Result<SeriesSolution<Vec<Complex64>>> {
            let mut terms = Vec::with_capacity(exps.len());
            for e in &exps {
                let entry = table.entry(&e.double())?;
                let v: Vec<Complex64> = (0..n_pts).map(|t| u0[t] * entry[t]).collect();
                terms.push((e.clone(), v));
            }
            Ok(SeriesSolution {
                kind,
                d,
                order: table.n / 2,
                terms,
                constant_extra: None,
            })
        };
    let build_prime =
        |table: &PowerTable, kind: SeriesKind| -> Result<SeriesSolution<Vec<Complex64>>> {
            let mut terms = Vec::with_capacity(exps.len());
            for e in &exps {
                let j = e.double();
                let entry = table.entry(&j)?;
                let mut odd_sum = vec![Complex64::new(0.0, 0.0); n_pts];
                for i in 0..d {
                    if let Some(jm) = j.minus(i) {
                        let odd = table.entry(&jm)?;
                        for t in 0..n_pts {
                            odd_sum[t] += odd[t];
                        }
                    }
                }
                let v: Vec<Complex64> = (0..n_pts)
                    .map(|t| u0p[t] * entry[t] + inv_pu0[t] * odd_sum[t])
                    .collect();
                terms.push((e.clone(), v));
            }
            Ok(SeriesSolution {
                kind,
                d,
                order: table.n / 2,
                terms,
                constant_extra: None,
            })
        };

    let u1 = build(xt, SeriesKind::U1)?;
    let u2 = build(xc, SeriesKind::U2)?;
    let u1p = build_prime(xt, SeriesKind::U1P)?;
    let mut u2p = build_prime(xc, SeriesKind::U2P)?;
    u2p.constant_extra = Some(inv_pu0);
    Ok(Quartet { u1, u2, u1p, u2p })
}

/// Assemble the right-endpoint U-quartet from an ENDPOINT table pair.
pub fn assemble_endpoint(
    xt: &PowerTable,
    xc: &PowerTable,
    coeffs: &Coefficients,
    seed: &SeedSolution,
) -> Result<Quartet<Complex64>> {
    check_pair(xt, xc)?;
    let grid = xt.grid;
    if !grid.compatible(&coeffs.grid()) || !grid.compatible(&seed.u0.grid) {
        return Err(Error::GridMismatch(
            "tables, coefficients and seed must share one mesh".into(),
        ));
    }
    let d = xt.d;
    let m = grid.m;
    let u0 = seed.u0.values[m];
    let u0p = seed.u0_prime.values[m];
    let inv_pu0 = 1.0 / (coeffs.p.values[m] * u0);
    let exps = lambda_exponents(d, xt.n / 2);

    let build = |table: &PowerTable, kind: SeriesKind| -> Result<SeriesSolution<Complex64>> {
        let mut terms = Vec::with_capacity(exps.len());
        for e in &exps {
            let entry = table.entry_at_x2(&e.double())?;
            terms.push((e.clone(), u0 * entry));
        }
        Ok(SeriesSolution {
            kind,
            d,
            order: table.n / 2,
            terms,
            constant_extra: None,
        })
    };
    let build_prime =
        |table: &PowerTable, kind: SeriesKind| -> Result<SeriesSolution<Complex64>> {
            let mut terms = Vec::with_capacity(exps.len());
            for e in &exps {
                let j = e.double();
                let entry = table.entry_at_x2(&j)?;
                let mut odd_sum = Complex64::new(0.0, 0.0);
                for i in 0..d {
                    if let Some(jm) = j.minus(i) {
                        odd_sum += table.entry_at_x2(&jm)?;
                    }
                }
                terms.push((e.clone(), u0p * entry + inv_pu0 * odd_sum));
            }
            Ok(SeriesSolution {
                kind,
                d,
                order: table.n / 2,
                terms,
                constant_extra: None,
            })
        };

    let u1 = build(xt, SeriesKind::U1)?;
    let u2 = build(xc, SeriesKind::U2)?;
    let u1p = build_prime(xt, SeriesKind::U1P)?;
    let mut u2p = build_prime(xc, SeriesKind::U2P)?;
    u2p.constant_extra = Some(inv_pu0);
    Ok(Quartet { u1, u2, u1p, u2p })
}

/// Normalize a U-quartet into the canonical `v1, v2` basis.
pub fn normalize<T: Storage>(
    quartet: &Quartet<T>,
    coeffs: &Coefficients,
    seed: &SeedSolution,
    lambda0: Vec<Complex64>,
    grid: Grid,
) -> Result<SolutionBasis<T>> {
    let i0 = grid.i0;
    let u0_0 = seed.u0.values[i0];
    let u0p_0 = seed.u0_prime.values[i0];
    let p_0 = coeffs.p.values[i0];
    let a = 1.0 / u0_0; // v1 = a·u1 + b·u2
    let b = -(p_0 * u0p_0);
    let c = p_0 * u0_0; // v2 = c·u2
    let d = quartet.u1.d;
    let order = quartet.u1.order;
    if !lambda0.is_empty() && lambda0.len() != d {
        return Err(Error::InvalidProblem(format!(
            "spectral origin has {} components for {} parameters",
            lambda0.len(),
            d
        )));
    }
    let lambda0 = if lambda0.is_empty() {
        vec![Complex64::new(0.0, 0.0); d]
    } else {
        lambda0
    };

    let combine = |kind: SeriesKind,
                   first: &SeriesSolution<T>,
                   second: &SeriesSolution<T>,
                   ca: Complex64,
                   cb: Complex64|
     -> Result<SeriesSolution<T>> {
        if first.terms.len() != second.terms.len() || first.d != second.d || first.order != second.order {
            return Err(Error::OrderMismatch(
                "quartet series disagree in shape".into(),
            ));
        }
        let mut terms = Vec::with_capacity(first.terms.len());
        for ((e1, t1), (e2, t2)) in first.terms.iter().zip(&second.terms) {
            if e1 != e2 {
                return Err(Error::OrderMismatch(
                    "quartet series disagree in exponent order".into(),
                ));
            }
            let mut v = t1.clone();
            v.scale(ca);
            v.axpy(cb, t2);
            terms.push((e1.clone(), v));
        }
        let constant_extra = match (&first.constant_extra, &second.constant_extra) {
            (None, None) => None,
            (fe, se) => {
                let template = fe.as_ref().or(se.as_ref()).unwrap();
                let mut v = template.zeros_like();
                if let Some(f) = fe {
                    v.axpy(ca, f);
                }
                if let Some(s) = se {
                    v.axpy(cb, s);
                }
                Some(v)
            }
        };
        Ok(SeriesSolution {
            kind,
            d: first.d,
            order: first.order,
            terms,
            constant_extra,
        })
    };

    let zero = Complex64::new(0.0, 0.0);
    let v1 = combine(SeriesKind::V1, &quartet.u1, &quartet.u2, a, b)?;
    let v2 = combine(SeriesKind::V2, &quartet.u2, &quartet.u1, c, zero)?;
    let v1p = combine(SeriesKind::V1P, &quartet.u1p, &quartet.u2p, a, b)?;
    let v2p = combine(SeriesKind::V2P, &quartet.u2p, &quartet.u1p, c, zero)?;
    Ok(SolutionBasis {
        v1,
        v2,
        v1p,
        v2p,
        lambda0,
        grid,
        d,
        order,
    })
}

/// How the seed of a build is obtained.
#[derive(Debug, Clone)]
pub enum SeedInput {
    /// Build it from `p, q` with the one-parameter recursion.
    Auto {
        /// Internal series order; `None` means `order + 4`.
        order: Option<usize>,
        /// Imaginary-part scale of the seed.
        gamma: f64,
        /// Convergence tolerance at the right endpoint.
        tol: f64,
    },
    /// Use externally supplied samples.
    Samples(SeedSolution),
}

impl Default for SeedInput {
    fn default() -> Self {
        SeedInput::Auto {
            order: None,
            gamma: 1.0,
            tol: 1e-6,
        }
    }
}

/// Options of a basis build.
#[derive(Debug, Clone)]
pub struct BuildOptions {
    /// Series order in the spectral parameters: the quartet keeps λ-degrees
    /// up to `order` (internal tables hold entries to degree `2·order`).
    pub order: usize,
    pub quadrature: Quadrature,
    pub seed: SeedInput,
    /// Optional spectral origin; shifts the build and the evaluation.
    pub lambda0: Option<Vec<Complex64>>,
}

impl BuildOptions {
    pub fn new(order: usize) -> BuildOptions {
        BuildOptions {
            order,
            quadrature: Quadrature::Trapezoid,
            seed: SeedInput::default(),
            lambda0: None,
        }
    }
}

fn prepare(
    coeffs: &Coefficients,
    opts: &BuildOptions,
) -> Result<(Coefficients, SeedSolution, Vec<Complex64>)> {
    opts.quadrature.validate()?;
    let lambda0 = opts
        .lambda0
        .clone()
        .unwrap_or_else(|| vec![Complex64::new(0.0, 0.0); coeffs.d()]);
    let shifted = if lambda0.iter().any(|l| l.norm() != 0.0) {
        coeffs.recenter(&lambda0)?
    } else {
        coeffs.clone()
    };
    let seed = materialize_seed(&shifted, opts)?;
    Ok((shifted, seed, lambda0))
}

/// Resolve the seed of a build: pass through supplied samples (after a mesh
/// check) or run the one-parameter recursion on `p, q`. The coefficients
/// must already be recentered if a spectral origin is in play.
pub fn materialize_seed(coeffs: &Coefficients, opts: &BuildOptions) -> Result<SeedSolution> {
    match &opts.seed {
        SeedInput::Samples(s) => {
            if !s.u0.grid.compatible(&coeffs.grid()) {
                return Err(Error::GridMismatch(
                    "seed samples on a different mesh than the coefficients".into(),
                ));
            }
            Ok(s.clone())
        }
        SeedInput::Auto { order, gamma, tol } => {
            let seed_opts = SeedOptions {
                order: order.unwrap_or(opts.order + 4),
                gamma: *gamma,
                tol: *tol,
                quadrature: opts.quadrature,
            };
            build_seed(&coeffs.p, &coeffs.q, &seed_opts)
        }
    }
}

/// Build a full-mesh normalized basis.
pub fn build_basis_full(coeffs: &Coefficients, opts: &BuildOptions) -> Result<FullBasis> {
    let (shifted, seed, lambda0) = prepare(coeffs, opts)?;
    let req = TableRequest {
        n: 2 * opts.order,
        mode: TableMode::Full,
        quadrature: opts.quadrature,
    };
    let (xt, xc) = build_tables(&shifted, &seed, req)?;
    let quartet = assemble_full(&xt, &xc, &shifted, &seed)?;
    normalize(&quartet, &shifted, &seed, lambda0, shifted.grid())
}

/// Build a right-endpoint normalized basis.
pub fn build_basis_endpoint(coeffs: &Coefficients, opts: &BuildOptions) -> Result<EndpointBasis> {
    let (shifted, seed, lambda0) = prepare(coeffs, opts)?;
    let req = TableRequest {
        n: 2 * opts.order,
        mode: TableMode::Endpoint,
        quadrature: opts.quadrature,
    };
    let (xt, xc) = build_tables(&shifted, &seed, req)?;
    let quartet = assemble_endpoint(&xt, &xc, &shifted, &seed)?;
    normalize(&quartet, &shifted, &seed, lambda0, shifted.grid())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::seed::seed_from_samples;

    fn harmonic_coeffs(grid: Grid, d: usize) -> Coefficients {
        // (y')' = Σ λᵢ·(−1)·y, i.e. y'' + (Σλᵢ) y = 0.
        let one = SampledFunction::constant(grid, Complex64::new(1.0, 0.0));
        let zero = SampledFunction::constant(grid, Complex64::new(0.0, 0.0));
        let neg = SampledFunction::constant(grid, Complex64::new(-1.0, 0.0));
        Coefficients::new(one, zero, vec![neg; d], None).unwrap()
    }

    fn opts(order: usize) -> BuildOptions {
        BuildOptions {
            quadrature: Quadrature::Stencil { points: 6 },
            ..BuildOptions::new(order)
        }
    }

    #[test]
    fn harmonic_quartet_matches_closed_form() {
        let grid = Grid::new(0.0, 1.0, 100).unwrap();
        let coeffs = harmonic_coeffs(grid, 1);
        let basis = build_basis_full(&coeffs, &opts(10)).unwrap();
        let lam = 2.25_f64;
        let w = lam.sqrt();
        let q = basis
            .eval_sampled(&[Complex64::new(lam, 0.0)])
            .unwrap();
        for (t, &x) in grid.points().iter().enumerate() {
            assert!((q.v1.values[t].re - (w * x).cos()).abs() < 1e-10, "v1 t={t}");
            assert!(
                (q.v2.values[t].re - (w * x).sin() / w).abs() < 1e-10,
                "v2 t={t}"
            );
            assert!(
                (q.v1p.values[t].re + w * (w * x).sin()).abs() < 1e-9,
                "v1p t={t}"
            );
            assert!((q.v2p.values[t].re - (w * x).cos()).abs() < 1e-10, "v2p t={t}");
            assert!(q.v1.values[t].im.abs() < 1e-10, "v1 imag t={t}");
        }
    }

    #[test]
    fn generalized_pure_s_solution_is_exponential() {
        // d = 1, p = 1, q = 0, r = 0, s = 1: v2(λ) = (e^{λx} − 1)/λ.
        let grid = Grid::new(0.0, 1.0, 100).unwrap();
        let one = SampledFunction::constant(grid, Complex64::new(1.0, 0.0));
        let zero = SampledFunction::constant(grid, Complex64::new(0.0, 0.0));
        let coeffs =
            Coefficients::new(one.clone(), zero.clone(), vec![zero.clone()], Some(vec![one.clone()]))
                .unwrap();
        let seed = seed_from_samples(one, zero).unwrap();
        let build = BuildOptions {
            seed: SeedInput::Samples(seed),
            ..opts(12)
        };
        let basis = build_basis_full(&coeffs, &build).unwrap();
        let lam = Complex64::new(0.7, 0.3);
        let q = basis.eval_sampled(&[lam]).unwrap();
        for (t, &x) in grid.points().iter().enumerate() {
            let e = (lam * x).exp();
            let v2 = (e - 1.0) / lam;
            assert!((q.v2.values[t] - v2).norm() < 1e-9, "v2 t={t}");
            assert!((q.v2p.values[t] - e).norm() < 1e-9, "v2p t={t}");
            assert!((q.v1.values[t] - 1.0).norm() < 1e-12, "v1 t={t}");
            assert!(q.v1p.values[t].norm() < 1e-12, "v1p t={t}");
        }
    }

    #[test]
    fn endpoint_basis_equals_collapsed_full_basis() {
        let grid = Grid::new(0.0, std::f64::consts::PI, 80).unwrap();
        let coeffs = harmonic_coeffs(grid, 2);
        let o = opts(6);
        let full = build_basis_full(&coeffs, &o).unwrap();
        let end = build_basis_endpoint(&coeffs, &o).unwrap();
        let collapsed = full.at_x2();
        for (a, b) in [
            (&collapsed.v1, &end.v1),
            (&collapsed.v2, &end.v2),
            (&collapsed.v1p, &end.v1p),
            (&collapsed.v2p, &end.v2p),
        ] {
            assert_eq!(a.terms.len(), b.terms.len());
            for ((e1, t1), (e2, t2)) in a.terms.iter().zip(&b.terms) {
                assert_eq!(e1, e2);
                assert_eq!(t1, t2, "exact agreement expected at {}", e1.label());
            }
            assert_eq!(a.constant_extra, b.constant_extra);
        }
        let lams = [Complex64::new(3.0, 0.5), Complex64::new(-1.0, 0.0)];
        let qa = collapsed.eval_at(&lams).unwrap();
        let qb = end.eval_at(&lams).unwrap();
        assert_eq!(qa.v1, qb.v1);
        assert_eq!(qa.v2p, qb.v2p);
    }

    #[test]
    fn normalization_holds_at_the_base_point() {
        let grid = Grid::new(0.0, 1.5, 120).unwrap();
        let p = SampledFunction::from_real_fn(grid, |x| 1.0 + 0.25 * x * x);
        let q = SampledFunction::from_real_fn(grid, |x| x.sin());
        let r1 = SampledFunction::constant(grid, Complex64::new(1.0, 0.0));
        let r2 = SampledFunction::from_real_fn(grid, |x| x * x);
        let coeffs = Coefficients::new(p, q, vec![r1, r2], None).unwrap();
        let basis = build_basis_full(&coeffs, &opts(6)).unwrap();
        for lams in [
            [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(2.0, 0.0), Complex64::new(-1.0, 0.5)],
        ] {
            let q = basis.eval_at(&lams).unwrap();
            let i0 = grid.i0;
            assert!((q.v1[i0] - 1.0).norm() < 1e-12);
            assert!(q.v1p[i0].norm() < 1e-12);
            assert!(q.v2[i0].norm() < 1e-12);
            assert!((q.v2p[i0] - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn wronskian_is_pinned_to_p_at_base_point() {
        let grid = Grid::new(0.0, 2.0, 150).unwrap();
        let p = SampledFunction::from_real_fn(grid, |x| 1.0 + 0.1 * x);
        let q = SampledFunction::from_real_fn(grid, |x| 0.5 * x - 0.2);
        let r1 = SampledFunction::constant(grid, Complex64::new(-1.0, 0.0));
        let r2 = SampledFunction::from_real_fn(grid, |x| -(x * x) - 0.5);
        let coeffs = Coefficients::new(p.clone(), q, vec![r1, r2], None).unwrap();
        let basis = build_basis_full(&coeffs, &opts(8)).unwrap();
        let lams = [Complex64::new(1.3, 0.0), Complex64::new(-0.8, 0.0)];
        let qv = basis.eval_at(&lams).unwrap();
        let p0 = p.values[0];
        for t in 0..grid.len() {
            let w = qv.v1[t] * qv.v2p[t] - qv.v1p[t] * qv.v2[t];
            let pw = p.values[t] * w;
            assert!(
                (pw - p0).norm() < 1e-8 * p0.norm(),
                "t={t}: pW = {pw} vs {p0}"
            );
        }
    }

    #[test]
    fn series_satisfies_the_differential_equation() {
        // Second-difference residual of (p v')' + q v = (λ1 r1 + λ2 r2) v.
        let grid = Grid::new(0.0, 1.0, 400).unwrap();
        let p = SampledFunction::from_real_fn(grid, |x| 1.0 + 0.3 * x);
        let q = SampledFunction::from_real_fn(grid, |x| x - 0.4);
        let r1 = SampledFunction::constant(grid, Complex64::new(1.0, 0.0));
        let r2 = SampledFunction::from_real_fn(grid, |x| (2.0 * x).cos());
        let coeffs = Coefficients::new(p.clone(), q.clone(), vec![r1.clone(), r2.clone()], None)
            .unwrap();
        let basis = build_basis_full(&coeffs, &opts(7)).unwrap();
        let lams = [Complex64::new(2.0, 0.0), Complex64::new(1.0, 0.0)];
        let qv = basis.eval_at(&lams).unwrap();
        let h = grid.h();
        for v in [(&qv.v1, &qv.v1p), (&qv.v2, &qv.v2p)] {
            let (vals, ders) = v;
            for t in 1..grid.len() - 1 {
                let pv_p = |t: usize| p.values[t] * ders[t];
                let lhs = (pv_p(t + 1) - pv_p(t - 1)) / (2.0 * h) + q.values[t] * vals[t];
                let rhs = (lams[0] * r1.values[t] + lams[1] * r2.values[t]) * vals[t];
                assert!(
                    (lhs - rhs).norm() < 1e-4,
                    "t={t}: residual {}",
                    (lhs - rhs).norm()
                );
            }
        }
    }

    #[test]
    fn recentered_basis_agrees_with_direct_basis() {
        let grid = Grid::new(0.0, 1.0, 120).unwrap();
        let coeffs = harmonic_coeffs(grid, 1);
        let direct = build_basis_full(&coeffs, &opts(10)).unwrap();
        let shifted = build_basis_full(
            &coeffs,
            &BuildOptions {
                lambda0: Some(vec![Complex64::new(5.0, 0.0)]),
                ..opts(10)
            },
        )
        .unwrap();
        let lam = [Complex64::new(6.0, 0.0)];
        let qa = direct.eval_at(&lam).unwrap();
        let qb = shifted.eval_at(&lam).unwrap();
        let w = 6.0_f64.sqrt();
        let x2 = 1.0;
        for (got, expect) in [
            (qa.v1.last().unwrap(), (w * x2).cos()),
            (qb.v1.last().unwrap(), (w * x2).cos()),
            (qa.v2.last().unwrap(), (w * x2).sin() / w),
            (qb.v2.last().unwrap(), (w * x2).sin() / w),
        ] {
            assert!((got.re - expect).abs() < 1e-8, "{got} vs {expect}");
            assert!(got.im.abs() < 1e-8);
        }
    }

    #[test]
    fn mismatched_tables_are_rejected() {
        use crate::powers::{build_tables, TableRequest};
        use crate::seed::seed_from_samples;
        let grid = Grid::new(0.0, 1.0, 20).unwrap();
        let coeffs = harmonic_coeffs(grid, 1);
        let one = SampledFunction::constant(grid, Complex64::new(1.0, 0.0));
        let zero = SampledFunction::constant(grid, Complex64::new(0.0, 0.0));
        let seed = seed_from_samples(one, zero).unwrap();
        let quad = Quadrature::Trapezoid;
        let (xt8, _) = build_tables(
            &coeffs,
            &seed,
            TableRequest {
                n: 8,
                mode: TableMode::Full,
                quadrature: quad,
            },
        )
        .unwrap();
        let (_, xc6) = build_tables(
            &coeffs,
            &seed,
            TableRequest {
                n: 6,
                mode: TableMode::Full,
                quadrature: quad,
            },
        )
        .unwrap();
        let err = assemble_full(&xt8, &xc6, &coeffs, &seed).unwrap_err();
        assert_eq!(err.kind(), "OrderMismatch");
        let err = assemble_full(&xc6, &xt8, &coeffs, &seed).unwrap_err();
        assert_eq!(err.kind(), "OrderMismatch");
    }
}
