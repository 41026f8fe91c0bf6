//! Construction of a non-vanishing particular solution.
//!
//! The integral tower divides by `p·u0²`, so it needs one solution `u0` of
//! the spectral-free equation `(p u0')' + q u0 = 0` that stays away from
//! zero on the whole interval. Such a solution is built here from two real
//! independent solutions `w1` (with `w1(x0) = 1, w1'(x0) = 0`) and `w2`
//! (with `w2(x0) = 0, w2'(x0) = 1/p(x0)`) as the complex combination
//!
//! ```text
//! u0 = w1 + i γ w2,      γ > 0
//! ```
//!
//! For real `p, q` the Wronskian identity keeps `w1, w2` from vanishing
//! simultaneously, so `u0` has no zero. The scale `γ` defaults to 1; a
//! WKB-style choice `γ = sqrt(p(x0) q(x0))` flattens `|u0|` for strongly
//! oscillatory `q` and is used by the optics scan.
//!
//! `w1, w2` are themselves computed by the one-parameter version of the
//! power-series recursion, evaluated at spectral value 1 with the trivial
//! seed of the `q`-free equation.

use crate::error::{Error, Result};
use crate::grid::{cumulative_integral, Quadrature, SampledFunction};
use num_complex::Complex64;

/// A verified non-vanishing particular solution with its derivative.
#[derive(Debug, Clone)]
pub struct SeedSolution {
    pub u0: SampledFunction,
    pub u0_prime: SampledFunction,
    /// Minimum of `|u0|` over the mesh.
    pub min_abs: f64,
}

/// Options for [`build_seed`].
#[derive(Debug, Clone, Copy)]
pub struct SeedOptions {
    /// Truncation order of the internal one-parameter series.
    pub order: usize,
    /// Imaginary-part scale `γ` of `u0 = w1 + iγw2`.
    pub gamma: f64,
    /// Convergence tolerance: the order-`order` term must contribute less
    /// than this at the right endpoint.
    pub tol: f64,
    /// Quadrature used for the internal tower.
    pub quadrature: Quadrature,
}

impl Default for SeedOptions {
    fn default() -> Self {
        SeedOptions {
            order: 24,
            gamma: 1.0,
            tol: 1e-6,
            quadrature: Quadrature::Trapezoid,
        }
    }
}

/// Relative threshold below which the seed counts as vanishing.
const VANISH_REL: f64 = 1e-12;

/// Build the seed from sampled `p`, `q` by the one-parameter recursion.
pub fn build_seed(
    p: &SampledFunction,
    q: &SampledFunction,
    opts: &SeedOptions,
) -> Result<SeedSolution> {
    if !p.grid.compatible(&q.grid) {
        return Err(Error::GridMismatch(
            "p and q sampled on different meshes".into(),
        ));
    }
    let grid = p.grid;
    let n = grid.len();
    let quad = opts.quadrature;
    // One-parameter tower for (p w')' = (-q) w at spectral value 1:
    //   multiply-step weight  -q,  divide-step weight  1/p.
    let mq: Vec<Complex64> = q.values.iter().map(|v| -v).collect();
    let invp: Vec<Complex64> = p.values.iter().map(|v| 1.0 / v).collect();

    let mul_pt = |a: &[Complex64], b: &[Complex64]| -> Vec<Complex64> {
        a.iter().zip(b).map(|(x, y)| x * y).collect()
    };

    // w1 tower: even entries starting from the constant 1.
    let mut a: Vec<Complex64> = vec![Complex64::new(1.0, 0.0); n];
    let mut w1 = a.clone();
    let mut w1p = vec![Complex64::new(0.0, 0.0); n];
    // w2 tower: even entries starting from ∫ 1/p.
    let mut b: Vec<Complex64> = cumulative_integral(&invp, &grid, quad);
    let mut w2 = b.clone();
    let mut w2p_sum = vec![Complex64::new(0.0, 0.0); n];

    let mut tail = 0.0_f64;
    for step in 1..=opts.order {
        let a_odd = cumulative_integral(&mul_pt(&mq, &a), &grid, quad);
        a = cumulative_integral(&mul_pt(&invp, &a_odd), &grid, quad);
        let b_odd = cumulative_integral(&mul_pt(&mq, &b), &grid, quad);
        b = cumulative_integral(&mul_pt(&invp, &b_odd), &grid, quad);
        for i in 0..n {
            w1[i] += a[i];
            w1p[i] += invp[i] * a_odd[i];
            w2[i] += b[i];
            w2p_sum[i] += b_odd[i];
        }
        if step == opts.order {
            tail = a.last().unwrap().norm().max(b.last().unwrap().norm());
        }
    }
    if tail > opts.tol {
        return Err(Error::NonconvergedSeed {
            order: opts.order,
            tail,
            tol: opts.tol,
        });
    }
    // w2' = (Σ odd entries + 1) / p ; the constant comes from (∫1/p)' = 1/p.
    let w2p: Vec<Complex64> = (0..n)
        .map(|i| invp[i] * (w2p_sum[i] + Complex64::new(1.0, 0.0)))
        .collect();

    let ig = Complex64::new(0.0, opts.gamma);
    let u0_vals: Vec<Complex64> = (0..n).map(|i| w1[i] + ig * w2[i]).collect();
    let u0p_vals: Vec<Complex64> = (0..n).map(|i| w1p[i] + ig * w2p[i]).collect();
    let u0 = SampledFunction {
        grid,
        values: u0_vals,
    };
    let u0_prime = SampledFunction {
        grid,
        values: u0p_vals,
    };
    let min_abs = u0.min_abs();
    if min_abs < VANISH_REL * u0.sup_abs() {
        return Err(Error::SeedVanishes {
            min_abs,
            sup_abs: u0.sup_abs(),
        });
    }
    Ok(SeedSolution {
        u0,
        u0_prime,
        min_abs,
    })
}

/// Wrap externally supplied samples of `u0` and `u0'` as a seed.
pub fn seed_from_samples(
    u0: SampledFunction,
    u0_prime: SampledFunction,
) -> Result<SeedSolution> {
    if !u0.grid.compatible(&u0_prime.grid) {
        return Err(Error::GridMismatch(
            "u0 and u0' sampled on different meshes".into(),
        ));
    }
    for (i, v) in u0.values.iter().enumerate() {
        if v.norm() == 0.0 {
            return Err(Error::ZeroOnMesh {
                what: "u0".into(),
                x: u0.grid.x(i),
            });
        }
    }
    let min_abs = u0.min_abs();
    Ok(SeedSolution {
        u0,
        u0_prime,
        min_abs,
    })
}
