//! Independent cross-checks for the series machinery.
//!
//! Nothing here shares numerics with the production path: the initial-value
//! solver is a classical fourth-order Runge–Kutta march on the first-order
//! system `(y, p·y')`, the nested integrals are re-derived from their
//! mathematical definition with a separate cumulative integrator on a
//! refined mesh, and the segmented-potential eigencurve comes from a
//! closed-form matching condition solved by bisection. Tests compare the
//! fast path against these slower, independent computations.

use crate::error::{Error, Result};
use crate::grid::{Grid, SampledFunction};
use crate::indices::MultiIndex;
use crate::powers::Family;
use num_complex::Complex64;
use std::collections::HashMap;

/// A coefficient given as a callable, evaluated exactly where needed.
pub type CoefficientFn<'a> = Box<dyn Fn(f64) -> Complex64 + 'a>;

/// A problem described by callables instead of mesh samples.
pub struct FnProblem<'a> {
    pub p: CoefficientFn<'a>,
    pub q: CoefficientFn<'a>,
    pub r: Vec<CoefficientFn<'a>>,
    pub s: Option<Vec<CoefficientFn<'a>>>,
}

impl<'a> FnProblem<'a> {
    pub fn d(&self) -> usize {
        self.r.len()
    }

    fn validate(&self) -> Result<()> {
        if self.r.is_empty() {
            return Err(Error::InvalidProblem(
                "at least one spectral weight is required".into(),
            ));
        }
        if let Some(s) = &self.s {
            if s.len() != self.r.len() {
                return Err(Error::InvalidProblem(format!(
                    "{} derivative weights for {} spectral weights",
                    s.len(),
                    self.r.len()
                )));
            }
        }
        Ok(())
    }
}

/// Solve the initial-value problem
///
/// ```text
/// (p y')' + q y = Σᵢ λᵢ (rᵢ y + sᵢ y'),   y(x0) = y0,  y'(x0) = yp0
/// ```
///
/// by RK4 on the system `(y, w)` with `w = p·y'`, which avoids
/// differentiating `p`. The march uses `substeps` steps across the whole
/// interval (a multiple of the mesh cell count, so results land on mesh
/// nodes) and runs outward from the base point in both directions.
/// Returns `(y, y')` sampled on the mesh.
pub fn rk4_solve(
    fp: &FnProblem,
    lambdas: &[Complex64],
    y0: Complex64,
    yp0: Complex64,
    grid: Grid,
    substeps: usize,
) -> Result<(SampledFunction, SampledFunction)> {
    fp.validate()?;
    if lambdas.len() != fp.d() {
        return Err(Error::InvalidProblem(format!(
            "{} spectral values for {} parameters",
            lambdas.len(),
            fp.d()
        )));
    }
    if substeps == 0 || substeps % grid.m != 0 {
        return Err(Error::GridMismatch(format!(
            "{} substeps do not subdivide {} mesh cells",
            substeps, grid.m
        )));
    }
    let refine = substeps / grid.m;
    let h = (grid.x2 - grid.x1) / substeps as f64;

    // w' = (−q + Σ λᵢrᵢ)·y + (Σ λᵢsᵢ/p)·w
    let deriv = |x: f64, y: Complex64, w: Complex64| -> (Complex64, Complex64) {
        let p = (fp.p)(x);
        let mut ycoef = -(fp.q)(x);
        for (l, r) in lambdas.iter().zip(&fp.r) {
            ycoef += l * r(x);
        }
        let mut wcoef = Complex64::new(0.0, 0.0);
        if let Some(s) = &fp.s {
            for (l, sf) in lambdas.iter().zip(s) {
                wcoef += l * sf(x);
            }
        }
        (w / p, ycoef * y + wcoef * w / p)
    };

    let f0 = grid.i0 * refine;
    let total = substeps + 1;
    let mut ys = vec![Complex64::new(0.0, 0.0); total];
    let mut ws = vec![Complex64::new(0.0, 0.0); total];
    let x_at = |f: usize| grid.x1 + h * f as f64;
    ys[f0] = y0;
    ws[f0] = (fp.p)(grid.x(grid.i0)) * yp0;

    let mut march = |fine_from: usize, fine_to: i64, step: f64| {
        let mut y = ys[fine_from];
        let mut w = ws[fine_from];
        let mut f = fine_from as i64;
        while f != fine_to {
            let x = x_at(f as usize);
            let (k1y, k1w) = deriv(x, y, w);
            let (k2y, k2w) = deriv(x + step / 2.0, y + step / 2.0 * k1y, w + step / 2.0 * k1w);
            let (k3y, k3w) = deriv(x + step / 2.0, y + step / 2.0 * k2y, w + step / 2.0 * k2w);
            let (k4y, k4w) = deriv(x + step, y + step * k3y, w + step * k3w);
            y += step / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
            w += step / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
            f += if step > 0.0 { 1 } else { -1 };
            ys[f as usize] = y;
            ws[f as usize] = w;
        }
    };
    if f0 < substeps {
        march(f0, substeps as i64, h);
    }
    if f0 > 0 {
        march(f0, 0, -h);
    }

    let mut y_nodes = Vec::with_capacity(grid.len());
    let mut yp_nodes = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let f = i * refine;
        y_nodes.push(ys[f]);
        yp_nodes.push(ws[f] / (fp.p)(grid.x(i)));
    }
    Ok((
        SampledFunction {
            grid,
            values: y_nodes,
        },
        SampledFunction {
            grid,
            values: yp_nodes,
        },
    ))
}

/// Node-to-node cumulative integral by local cubic interpolation
/// (fourth-order), anchored at the base point and signed to its left.
/// Deliberately distinct from the production quadrature.
fn cumulative_cubic(values: &[Complex64], grid: Grid) -> Vec<Complex64> {
    let m = grid.m;
    assert!(m >= 3, "cubic cumulative integral needs at least 4 nodes");
    let h = grid.h();
    let f = values;
    let cell = |j: usize| -> Complex64 {
        if j == 0 {
            h / 24.0 * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3])
        } else if j == m - 1 {
            h / 24.0 * (f[m - 3] - 5.0 * f[m - 2] + 19.0 * f[m - 1] + 9.0 * f[m])
        } else {
            h / 24.0 * (-f[j - 1] + 13.0 * f[j] + 13.0 * f[j + 1] - f[j + 2])
        }
    };
    let mut out = vec![Complex64::new(0.0, 0.0); m + 1];
    for i in grid.i0..m {
        out[i + 1] = out[i] + cell(i);
    }
    for i in (0..grid.i0).rev() {
        out[i] = out[i + 1] - cell(i);
    }
    out
}

/// Re-derive one nested-integral table entry at the right endpoint,
/// directly from the recursive definition, on a `refine`-times finer mesh
/// with exact coefficient evaluation. `u0` and `u0_prime` supply the seed
/// as callables.
pub fn nested_integral_direct(
    fp: &FnProblem,
    u0: &dyn Fn(f64) -> Complex64,
    u0_prime: &dyn Fn(f64) -> Complex64,
    family: Family,
    j: &MultiIndex,
    grid: Grid,
    refine: usize,
) -> Result<Complex64> {
    fp.validate()?;
    if j.d() != fp.d() {
        return Err(Error::InvalidProblem(format!(
            "index over {} parameters for a {}-parameter problem",
            j.d(),
            fp.d()
        )));
    }
    if refine == 0 {
        return Err(Error::InvalidProblem("refinement factor must be positive".into()));
    }
    let fine = Grid::with_basepoint(grid.x1, grid.x2, grid.m * refine, grid.i0 * refine)?;
    let n_pts = fine.len();
    let d = fp.d();
    let generalized = fp.s.is_some();
    let xs: Vec<f64> = fine.points();
    let u0v: Vec<Complex64> = xs.iter().map(|&x| u0(x)).collect();
    let u0pv: Vec<Complex64> = xs.iter().map(|&x| u0_prime(x)).collect();
    let pv: Vec<Complex64> = xs.iter().map(|&x| (fp.p)(x)).collect();
    let inv_pu02: Vec<Complex64> = (0..n_pts).map(|t| 1.0 / (pv[t] * u0v[t] * u0v[t])).collect();
    // Parameter weight entering the odd-degree step: rᵢ·u0² for the plain
    // problem, u0·(rᵢ·u0 + sᵢ·u0') when derivative weights are present.
    let mult: Vec<Vec<Complex64>> = (0..d)
        .map(|i| {
            (0..n_pts)
                .map(|t| {
                    let rv = (fp.r[i])(xs[t]);
                    match &fp.s {
                        None => rv * u0v[t] * u0v[t],
                        Some(s) => u0v[t] * (rv * u0v[t] + (s[i])(xs[t]) * u0pv[t]),
                    }
                })
                .collect()
        })
        .collect();
    let s_over_p: Option<Vec<Vec<Complex64>>> = fp.s.as_ref().map(|s| {
        (0..d)
            .map(|i| (0..n_pts).map(|t| (s[i])(xs[t]) / pv[t]).collect())
            .collect()
    });

    // Memoized recursion over nonnegative indices.
    type Key = Vec<u32>;
    fn lookup(
        family: Family,
        key: &Key,
        memo: &mut HashMap<(Family, Key), Vec<Complex64>>,
        ctx: &DirectCtx,
    ) -> Vec<Complex64> {
        if let Some(hit) = memo.get(&(family, key.clone())) {
            return hit.clone();
        }
        let degree: u32 = key.iter().sum();
        let value: Vec<Complex64> = if degree == 0 {
            match family {
                Family::Xtilde => vec![Complex64::new(1.0, 0.0); ctx.n_pts],
                Family::X => cumulative_cubic(&ctx.inv_pu02, ctx.fine),
            }
        } else if degree % 2 != 0 {
            // Odd total degree: exactly one odd slot drives the step.
            let i = key
                .iter()
                .position(|&k| k % 2 != 0)
                .expect("odd degree has an odd slot");
            let mut pred = key.clone();
            pred[i] -= 1;
            let inner = lookup(family, &pred, memo, ctx);
            let mut integrand: Vec<Complex64> = (0..ctx.n_pts)
                .map(|t| ctx.mult[i][t] * inner[t])
                .collect();
            if let Some(sp) = &ctx.s_over_p {
                // Grand predecessors two degrees down. Stepping below the
                // start of the second family contributes the constant 1/d
                // by convention (so the first odd step integrates s/p
                // against 1); below the start of the first family there is
                // nothing.
                let mut grand = vec![Complex64::new(0.0, 0.0); ctx.n_pts];
                for i2 in 0..ctx.d {
                    if pred[i2] == 0 {
                        if family == Family::X {
                            let c = 1.0 / ctx.d as f64;
                            for g in grand.iter_mut() {
                                *g += c;
                            }
                        }
                        continue;
                    }
                    let mut pred2 = pred.clone();
                    pred2[i2] -= 1;
                    let inner2 = lookup(family, &pred2, memo, ctx);
                    for t in 0..ctx.n_pts {
                        grand[t] += inner2[t];
                    }
                }
                for t in 0..ctx.n_pts {
                    integrand[t] += sp[i][t] * grand[t];
                }
            }
            cumulative_cubic(&integrand, ctx.fine)
        } else {
            // Even total degree: sum the one-step-down entries that exist.
            let mut total = vec![Complex64::new(0.0, 0.0); ctx.n_pts];
            for i in 0..ctx.d {
                if key[i] == 0 {
                    continue;
                }
                let mut pred = key.clone();
                pred[i] -= 1;
                let inner = lookup(family, &pred, memo, ctx);
                for t in 0..ctx.n_pts {
                    total[t] += inner[t];
                }
            }
            let integrand: Vec<Complex64> = (0..ctx.n_pts)
                .map(|t| ctx.inv_pu02[t] * total[t])
                .collect();
            cumulative_cubic(&integrand, ctx.fine)
        };
        memo.insert((family, key.clone()), value.clone());
        value
    }

    struct DirectCtx {
        d: usize,
        n_pts: usize,
        fine: Grid,
        inv_pu02: Vec<Complex64>,
        mult: Vec<Vec<Complex64>>,
        s_over_p: Option<Vec<Vec<Complex64>>>,
    }
    let ctx = DirectCtx {
        d,
        n_pts,
        fine,
        inv_pu02,
        mult,
        s_over_p: if generalized { s_over_p } else { None },
    };
    let key: Key = j.entries().iter().map(|&e| e as u32).collect();
    let mut memo = HashMap::new();
    let values = lookup(family, &key, &mut memo, &ctx);
    Ok(*values.last().unwrap())
}

/// One point of the eigencurve of the sign-flip two-weight problem
/// (`p = 1, q = 0, r1 = −1, r2 = −sgn x` on `[−1, 1]`, both ends pinned).
///
/// With frequencies `s ∓ ih` on the two half-intervals the matching
/// condition collapses to
///
/// ```text
/// s·sin(2s) + h·sinh(2h) = 0,   h ≥ 0,
/// ```
///
/// solved for `h` by bisection to absolute tolerance `1e−12`. Returns the
/// spectral pair `(λ1, λ2) = (s² − h², 2ish)`. Fails with `NoSignChange`
/// when `s·sin(2s) > 0`, where no real branch point exists.
pub fn meissner_curve(s: f64) -> Result<(Complex64, Complex64)> {
    let base = s * (2.0 * s).sin();
    if base > 0.0 {
        return Err(Error::NoSignChange { s });
    }
    let f = |h: f64| base + h * (2.0 * h).sinh();
    let mut h = 0.0;
    if base < 0.0 {
        let mut hi = 1.0;
        while f(hi) < 0.0 {
            hi *= 2.0;
            assert!(hi < 350.0, "matching condition failed to bracket");
        }
        let mut lo = 0.0;
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        h = 0.5 * (lo + hi);
    }
    Ok((
        Complex64::new(s * s - h * h, 0.0),
        Complex64::new(0.0, 2.0 * s * h),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Quadrature;
    use crate::problem::Coefficients;
    use crate::series::{build_basis_full, BuildOptions};

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }
    fn constant(v: f64) -> CoefficientFn<'static> {
        Box::new(move |_| cx(v, 0.0))
    }

    #[test]
    fn rk4_reproduces_the_cosine_solution() {
        let fp = FnProblem {
            p: constant(1.0),
            q: constant(0.0),
            r: vec![constant(-1.0)],
            s: None,
        };
        let grid = Grid::new(0.0, 1.0, 100).unwrap();
        let (y, yp) = rk4_solve(&fp, &[cx(4.0, 0.0)], cx(1.0, 0.0), cx(0.0, 0.0), grid, 3200)
            .unwrap();
        for (i, &x) in grid.points().iter().enumerate() {
            assert!((y.values[i].re - (2.0 * x).cos()).abs() < 1e-10, "y at {x}");
            assert!(
                (yp.values[i].re + 2.0 * (2.0 * x).sin()).abs() < 1e-10,
                "y' at {x}"
            );
        }
    }

    #[test]
    fn rk4_error_shrinks_at_fourth_order() {
        let fp = FnProblem {
            p: constant(1.0),
            q: constant(0.0),
            r: vec![constant(-1.0)],
            s: None,
        };
        let grid = Grid::new(0.0, 1.0, 50).unwrap();
        let lam = [cx(9.0, 0.0)];
        let err_at = |steps: usize| -> f64 {
            let (y, _) =
                rk4_solve(&fp, &lam, cx(1.0, 0.0), cx(0.0, 0.0), grid, steps).unwrap();
            (y.values[grid.m].re - 3.0_f64.cos()).abs()
        };
        let ratio = err_at(100) / err_at(200);
        assert!(
            (12.0..=20.0).contains(&ratio),
            "halving ratio {ratio} outside fourth-order band"
        );
    }

    #[test]
    fn rk4_is_exact_in_p_for_the_log_solution() {
        // (p y')' = 0 with p = 1 + x: y = ln(1 + x) for y(0) = 0, y'(0) = 1.
        let fp = FnProblem {
            p: Box::new(|x| cx(1.0 + x, 0.0)),
            q: constant(0.0),
            r: vec![constant(0.0)],
            s: None,
        };
        let grid = Grid::new(0.0, 1.0, 80).unwrap();
        let (y, yp) = rk4_solve(&fp, &[cx(1.0, 0.0)], cx(0.0, 0.0), cx(1.0, 0.0), grid, 1600)
            .unwrap();
        for (i, &x) in grid.points().iter().enumerate() {
            assert!((y.values[i].re - (1.0 + x).ln()).abs() < 1e-12);
            assert!((yp.values[i].re - 1.0 / (1.0 + x)).abs() < 1e-12);
        }
    }

    #[test]
    fn rk4_handles_derivative_weights() {
        // y'' = λ y': y = (e^{λx} − 1)/λ from (0, 1) data.
        let fp = FnProblem {
            p: constant(1.0),
            q: constant(0.0),
            r: vec![constant(0.0)],
            s: Some(vec![constant(1.0)]),
        };
        let grid = Grid::new(0.0, 1.0, 50).unwrap();
        let lam = cx(0.8, -0.5);
        let (y, _) = rk4_solve(&fp, &[lam], cx(0.0, 0.0), cx(1.0, 0.0), grid, 2000).unwrap();
        for (i, &x) in grid.points().iter().enumerate() {
            let want = ((lam * x).exp() - 1.0) / lam;
            assert!((y.values[i] - want).norm() < 1e-11, "at {x}");
        }
    }

    #[test]
    fn rk4_crosschecks_the_series_basis() {
        // Two constant weights; constant coefficients make the march exact
        // in the data, so disagreement would implicate the series path.
        let grid = Grid::new(0.0, 1.0, 100).unwrap();
        let one = SampledFunction::constant(grid, cx(1.0, 0.0));
        let zero = SampledFunction::constant(grid, cx(0.0, 0.0));
        let neg = SampledFunction::constant(grid, cx(-1.0, 0.0));
        let half = SampledFunction::constant(grid, cx(-0.5, 0.0));
        let coeffs = Coefficients::new(one, zero, vec![neg, half], None).unwrap();
        let basis = build_basis_full(
            &coeffs,
            &BuildOptions {
                quadrature: Quadrature::Stencil { points: 6 },
                ..BuildOptions::new(10)
            },
        )
        .unwrap();
        let lams = [cx(2.0, 1.0), cx(-1.0, 0.5)];
        let qv = basis.eval_sampled(&lams).unwrap();
        let fp = FnProblem {
            p: constant(1.0),
            q: constant(0.0),
            r: vec![constant(-1.0), constant(-0.5)],
            s: None,
        };
        let (y1, y1p) = rk4_solve(&fp, &lams, cx(1.0, 0.0), cx(0.0, 0.0), grid, 6400).unwrap();
        let (y2, y2p) = rk4_solve(&fp, &lams, cx(0.0, 0.0), cx(1.0, 0.0), grid, 6400).unwrap();
        for i in 0..grid.len() {
            assert!((qv.v1.values[i] - y1.values[i]).norm() < 1e-8, "v1 at {i}");
            assert!((qv.v2.values[i] - y2.values[i]).norm() < 1e-8, "v2 at {i}");
            assert!((qv.v1p.values[i] - y1p.values[i]).norm() < 1e-8, "v1p at {i}");
            assert!((qv.v2p.values[i] - y2p.values[i]).norm() < 1e-8, "v2p at {i}");
        }
    }

    #[test]
    fn rk4_rejects_misaligned_substeps() {
        let fp = FnProblem {
            p: constant(1.0),
            q: constant(0.0),
            r: vec![constant(1.0)],
            s: None,
        };
        let grid = Grid::new(0.0, 1.0, 30).unwrap();
        let err = rk4_solve(&fp, &[cx(0.0, 0.0)], cx(1.0, 0.0), cx(0.0, 0.0), grid, 100)
            .unwrap_err();
        assert_eq!(err.kind(), "GridMismatch");
    }

    #[test]
    fn direct_recursion_validates_the_tables() {
        use crate::indices::enumerate_admissible;
        use crate::powers::{build_tables, TableMode, TableRequest};
        use crate::seed::seed_from_samples;
        let grid = Grid::new(0.0, 1.2, 100).unwrap();
        let pf = |x: f64| cx(1.0 + 0.25 * x * x, 0.0);
        let qf = |x: f64| cx(x.sin(), 0.0);
        let r1f = |_x: f64| cx(1.0, 0.0);
        let r2f = |x: f64| cx(x * x, 0.0);
        let u0f = |x: f64| cx(1.0 + 0.3 * x, 0.0);
        let u0pf = |_x: f64| cx(0.3, 0.0);

        let p = SampledFunction::from_fn(grid, pf);
        let q = SampledFunction::from_fn(grid, qf);
        let r1 = SampledFunction::from_fn(grid, r1f);
        let r2 = SampledFunction::from_fn(grid, r2f);
        let coeffs = Coefficients::new(p, q, vec![r1, r2], None).unwrap();
        let seed = seed_from_samples(
            SampledFunction::from_fn(grid, u0f),
            SampledFunction::from_fn(grid, u0pf),
        )
        .unwrap();
        let (xt, xc) = build_tables(
            &coeffs,
            &seed,
            TableRequest {
                n: 4,
                mode: TableMode::Endpoint,
                quadrature: Quadrature::Stencil { points: 6 },
            },
        )
        .unwrap();
        let fp = FnProblem {
            p: Box::new(pf),
            q: Box::new(qf),
            r: vec![Box::new(r1f), Box::new(r2f)],
            s: None,
        };
        for table in [&xt, &xc] {
            for j in enumerate_admissible(2, 4) {
                let got = table.entry_at_x2(&j).unwrap();
                let want = nested_integral_direct(
                    &fp, &u0f, &u0pf, table.family, &j, grid, 10,
                )
                .unwrap();
                assert!(
                    (got - want).norm() < 1e-10,
                    "{:?} {}: {} vs {}",
                    table.family,
                    j.label(),
                    got,
                    want
                );
            }
        }
    }

    #[test]
    fn direct_recursion_validates_generalized_tables() {
        use crate::indices::enumerate_admissible;
        use crate::powers::{build_tables, TableMode, TableRequest};
        use crate::seed::seed_from_samples;
        let grid = Grid::new(0.0, 1.0, 100).unwrap();
        let pf = |x: f64| cx(1.0 + 0.1 * x, 0.0);
        let qf = |_x: f64| cx(0.2, 0.0);
        let r1f = |x: f64| cx(x, 0.0);
        let r2f = |x: f64| cx(1.0 - x, 0.0);
        let s1f = |x: f64| cx(0.5 - 0.2 * x, 0.0);
        let s2f = |x: f64| cx(0.1 * x, 0.0);
        let u0f = |x: f64| cx(1.0, 0.2 * x);
        let u0pf = |_x: f64| cx(0.0, 0.2);
        let coeffs = Coefficients::new(
            SampledFunction::from_fn(grid, pf),
            SampledFunction::from_fn(grid, qf),
            vec![
                SampledFunction::from_fn(grid, r1f),
                SampledFunction::from_fn(grid, r2f),
            ],
            Some(vec![
                SampledFunction::from_fn(grid, s1f),
                SampledFunction::from_fn(grid, s2f),
            ]),
        )
        .unwrap();
        let seed = seed_from_samples(
            SampledFunction::from_fn(grid, u0f),
            SampledFunction::from_fn(grid, u0pf),
        )
        .unwrap();
        let (xt, xc) = build_tables(
            &coeffs,
            &seed,
            TableRequest {
                n: 4,
                mode: TableMode::Endpoint,
                quadrature: Quadrature::Stencil { points: 6 },
            },
        )
        .unwrap();
        let fp = FnProblem {
            p: Box::new(pf),
            q: Box::new(qf),
            r: vec![Box::new(r1f), Box::new(r2f)],
            s: Some(vec![Box::new(s1f), Box::new(s2f)]),
        };
        for table in [&xt, &xc] {
            for j in enumerate_admissible(2, 4) {
                let got = table.entry_at_x2(&j).unwrap();
                let want =
                    nested_integral_direct(&fp, &u0f, &u0pf, table.family, &j, grid, 10).unwrap();
                assert!(
                    (got - want).norm() < 1e-10,
                    "{:?} {}: {} vs {}",
                    table.family,
                    j.label(),
                    got,
                    want
                );
            }
        }
    }

    #[test]
    fn matching_condition_holds_on_the_returned_curve() {
        for s in [2.0, 2.5, 5.0, 8.2] {
            let (l1, l2) = meissner_curve(s).unwrap();
            let h = l2.im / (2.0 * s);
            assert!(h >= 0.0);
            assert!(
                (s * (2.0 * s).sin() + h * (2.0 * h).sinh()).abs() < 1e-10,
                "s = {s}"
            );
            assert!((l1.re - (s * s - h * h)).abs() < 1e-12);
            assert_eq!(l1.im, 0.0);
            assert_eq!(l2.re, 0.0);
            // Independent check through the two-frequency matching form
            // b·sin(a)·cos(b) + a·cos(a)·sin(b) with a = s − ih, b = s + ih.
            let a = cx(s, -h);
            let b = cx(s, h);
            let m = b * a.sin() * b.cos() + a * a.cos() * b.sin();
            assert!(m.norm() < 1e-8, "matching residual {} at s = {s}", m.norm());
        }
    }

    #[test]
    fn curve_requires_a_negative_base_value() {
        // sin(2.4) > 0, so s·sin(2s) > 0 and no h ≥ 0 can balance it.
        let err = meissner_curve(1.2).unwrap_err();
        assert_eq!(err.kind(), "NoSignChange");
        // At a sign-flip zero the curve touches the real axis: h ≈ 0.
        let s = std::f64::consts::PI;
        let (l1, l2) = meissner_curve(s).unwrap();
        assert!((l1.re - s * s).abs() < 1e-9);
        assert!(l2.norm() < 1e-6);
    }
}
