//! Characteristic function, dispersion sections and eigencurve rasters.
//!
//! For a two-point boundary condition
//!
//! ```text
//! α y(x1) + α_p (p y')(x1) = 0,    β y(x2) + β_p (p y')(x2) = 0
//! ```
//!
//! the eigenvalues are the zeros of the characteristic function
//!
//! ```text
//! χ(λ) = β (α_p v1(x2) − α v2(x2)) + β_p (α_p v1'(x2) − α v2'(x2))
//! ```
//!
//! which truncates to a polynomial in the spectral parameters because the
//! endpoint basis does. One-dimensional sections of χ are solved with a
//! companion-matrix eigenvalue iteration; two-dimensional slices are
//! rasterized and traced either as a zero contour of `Re χ` (real
//! problems) or as ridge chains of `−log|χ|` (complex problems).

use crate::error::{Error, Result};
use crate::indices::MultiIndex;
use crate::par;
use crate::problem::BoundaryConditions;
use crate::series::EndpointBasis;
use num_complex::Complex64;

/// χ as a polynomial in the spectral parameters, about the origin λ0.
#[derive(Debug, Clone)]
pub struct CharPolynomial {
    pub d: usize,
    /// Series order of the basis it came from (maximum λ-degree).
    pub order: usize,
    /// Spectral origin; evaluation substitutes `λ − λ0`.
    pub lambda0: Vec<Complex64>,
    /// `(λ-exponent, coefficient)`, in (degree, lexicographic) order.
    pub terms: Vec<(MultiIndex, Complex64)>,
}

/// Build χ from a right-endpoint basis and a boundary condition.
///
/// The left condition is imposed at the base point, so the basis must be
/// anchored at the left end of the interval.
pub fn characteristic_polynomial(
    basis: &EndpointBasis,
    bc: &BoundaryConditions,
) -> Result<CharPolynomial> {
    if basis.grid.i0 != 0 {
        return Err(Error::BasepointNotLeft {
            x0: basis.grid.x(basis.grid.i0),
            x1: basis.grid.x1,
        });
    }
    let (alpha, alpha_p, beta, beta_p) = (bc.alpha, bc.alpha_p, bc.beta, bc.beta_p);
    let mut terms: Vec<(MultiIndex, Complex64)> = Vec::with_capacity(basis.v1.terms.len());
    for (((e, v1), (_, v2)), ((_, v1p), (_, v2p))) in basis
        .v1
        .terms
        .iter()
        .zip(&basis.v2.terms)
        .zip(basis.v1p.terms.iter().zip(&basis.v2p.terms))
    {
        let c = beta * (alpha_p * v1 - alpha * v2) + beta_p * (alpha_p * v1p - alpha * v2p);
        terms.push((e.clone(), c));
    }
    // The derivative series carry a λ-independent part; it belongs to the
    // zero-exponent coefficient.
    let extra1 = basis.v1p.constant_extra.unwrap_or_default();
    let extra2 = basis.v2p.constant_extra.unwrap_or_default();
    let extra = beta_p * (alpha_p * extra1 - alpha * extra2);
    if let Some(slot) = terms.iter_mut().find(|(e, _)| e.degree() == 0) {
        slot.1 += extra;
    }
    Ok(CharPolynomial {
        d: basis.d,
        order: basis.order,
        lambda0: basis.lambda0.clone(),
        terms,
    })
}

impl CharPolynomial {
    /// Evaluate χ at one spectral point.
    pub fn eval(&self, lambdas: &[Complex64]) -> Result<Complex64> {
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
        Ok(self.eval_mu(&mu))
    }

    fn eval_mu(&self, mu: &[Complex64]) -> Complex64 {
        let max_e = self.order;
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
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut mono = *c;
            for (i, &ei) in e.entries().iter().enumerate() {
                mono *= pows[i][ei as usize];
            }
            acc += mono;
        }
        acc
    }

    /// Fix all parameters but one, collapsing χ to a univariate polynomial
    /// in the shifted free parameter `μ = λ_axis − λ0_axis`.
    ///
    /// `fixed` supplies `(parameter index, λ value)` for the other `d − 1`
    /// parameters.
    pub fn section(&self, axis: usize, fixed: &[(usize, Complex64)]) -> Result<UnivariatePolynomial> {
        if axis >= self.d {
            return Err(Error::IndexOutOfRange(format!(
                "section axis {} of {} parameters",
                axis, self.d
            )));
        }
        let mut mu_fixed = vec![None; self.d];
        for &(i, v) in fixed {
            if i >= self.d {
                return Err(Error::IndexOutOfRange(format!(
                    "fixed parameter {} of {} parameters",
                    i, self.d
                )));
            }
            if i == axis {
                return Err(Error::InvalidProblem(format!(
                    "parameter {i} is both fixed and the section axis"
                )));
            }
            if mu_fixed[i].replace(v - self.lambda0[i]).is_some() {
                return Err(Error::InvalidProblem(format!(
                    "parameter {i} fixed twice"
                )));
            }
        }
        for (i, slot) in mu_fixed.iter().enumerate() {
            if i != axis && slot.is_none() {
                return Err(Error::InvalidProblem(format!(
                    "parameter {i} neither fixed nor the section axis"
                )));
            }
        }
        let degree = self.order;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); degree + 1];
        for (e, c) in &self.terms {
            let k = e.get(axis) as usize;
            let mut w = *c;
            for (i, &ei) in e.entries().iter().enumerate() {
                if i == axis {
                    continue;
                }
                let m = mu_fixed[i].unwrap();
                for _ in 0..ei {
                    w *= m;
                }
            }
            coeffs[k] += w;
        }
        Ok(UnivariatePolynomial {
            coeffs,
            shift: self.lambda0[axis],
            axis,
        })
    }
}

/// A univariate section of χ in the shifted variable `μ`.
#[derive(Debug, Clone)]
pub struct UnivariatePolynomial {
    /// Coefficients by ascending power of `μ`.
    pub coeffs: Vec<Complex64>,
    /// Roots in the original parameter are `μ + shift`.
    pub shift: Complex64,
    /// Which spectral parameter the section varies.
    pub axis: usize,
}

/// One root of a section, reported in the original (unshifted) parameter.
#[derive(Debug, Clone, Copy)]
pub struct Root {
    pub value: Complex64,
    /// `|p(μ)| / max|coeff|` at the root.
    pub residual: f64,
    /// Whether the root lies inside the trust radius of the truncation.
    pub trusted: bool,
}

/// Coefficients at or below this magnitude are treated as numerical zeros
/// when the degree is chosen. The cut is absolute on purpose: the high-order
/// coefficients of a truncated entire series are tiny yet meaningful, and a
/// relative cut would discard them and lose the outer roots.
const STRIP_ABS: f64 = 1e-300;

impl UnivariatePolynomial {
    pub fn eval_mu(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    fn effective(&self) -> Result<(usize, usize)> {
        let hi = self.coeffs.iter().rposition(|c| c.norm() > STRIP_ABS);
        let lo = self.coeffs.iter().position(|c| c.norm() > STRIP_ABS);
        match (lo, hi) {
            (Some(lo), Some(hi)) => Ok((lo, hi)),
            _ => Err(Error::DegenerateZeroPolynomial),
        }
    }

    /// Truncation trust radius: the distance from the origin at which the
    /// leading retained term would contribute a relative `1e−3` of the
    /// smallest retained coefficient, `(1e−3·|c_lo|/|c_hi|)^{1/(hi−lo)}`.
    pub fn default_trust_radius(&self) -> Result<f64> {
        let (lo, hi) = self.effective()?;
        if hi == lo {
            return Ok(f64::INFINITY);
        }
        let ratio = 1e-3 * self.coeffs[lo].norm() / self.coeffs[hi].norm();
        Ok(ratio.powf(1.0 / (hi - lo) as f64))
    }

    /// All roots of the section. `trust_radius` overrides the default;
    /// roots with `|μ|` beyond it are flagged untrusted.
    pub fn roots(&self, trust_radius: Option<f64>) -> Result<Vec<Root>> {
        let (_, hi) = self.effective()?;
        let trust = match trust_radius {
            Some(t) => t,
            None => self.default_trust_radius()?,
        };
        let sup = self
            .coeffs
            .iter()
            .map(|c| c.norm())
            .fold(0.0_f64, f64::max);
        // Monic reduction of the retained part; low-order numerical zeros
        // stay in place so origin roots are still reported.
        let lead = self.coeffs[hi];
        let monic: Vec<Complex64> = self.coeffs[..hi].iter().map(|c| c / lead).collect();
        let mut raw = companion_eigenvalues(&monic);
        for z in raw.iter_mut() {
            *z = self.polish(*z);
        }
        let mut out: Vec<Root> = raw
            .into_iter()
            .map(|z| Root {
                value: z + self.shift,
                residual: self.eval_mu(z).norm() / sup,
                trusted: z.norm() <= trust,
            })
            .collect();
        out.sort_by(|a, b| {
            (a.value.re, a.value.im)
                .partial_cmp(&(b.value.re, b.value.im))
                .unwrap()
        });
        Ok(out)
    }

    /// A couple of guarded Newton steps to tighten a companion eigenvalue.
    fn polish(&self, mut z: Complex64) -> Complex64 {
        for _ in 0..2 {
            let mut p = Complex64::new(0.0, 0.0);
            let mut dp = Complex64::new(0.0, 0.0);
            for &c in self.coeffs.iter().rev() {
                dp = dp * z + p;
                p = p * z + c;
            }
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            let z_new = z - step;
            if self.eval_mu(z_new).norm() < p.norm() {
                z = z_new;
            } else {
                break;
            }
        }
        z
    }
}

/// Eigenvalues of the companion matrix of `z^K + a_{K−1}z^{K−1} + … + a_0`
/// (`rest` holds `a_0 … a_{K−1}`), by the shifted QR iteration on its
/// Hessenberg form.
fn companion_eigenvalues(rest: &[Complex64]) -> Vec<Complex64> {
    let k = rest.len();
    match k {
        0 => return Vec::new(),
        1 => return vec![-rest[0]],
        2 => return quadratic_roots(rest[1], rest[0]),
        _ => {}
    }
    // Column-j of the companion matrix is e_{j+1} except the last, which
    // holds the negated coefficients.
    let mut h = vec![Complex64::new(0.0, 0.0); k * k];
    for j in 0..k - 1 {
        h[(j + 1) * k + j] = Complex64::new(1.0, 0.0);
    }
    for i in 0..k {
        h[i * k + (k - 1)] = -rest[i];
    }
    hessenberg_qr_eigenvalues(&mut h, k)
}

fn quadratic_roots(b: Complex64, c: Complex64) -> Vec<Complex64> {
    // z² + bz + c, with the discriminant branch chosen against cancellation.
    let disc = (b * b - 4.0 * c).sqrt();
    let s = if (b.conj() * disc).re >= 0.0 { disc } else { -disc };
    let q = -0.5 * (b + s);
    if q.norm() == 0.0 {
        vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)]
    } else {
        vec![q, c / q]
    }
}

/// Complex single-shift QR with Wilkinson shifts on an upper Hessenberg
/// matrix stored row-major; consumes the matrix.
fn hessenberg_qr_eigenvalues(h: &mut [Complex64], n: usize) -> Vec<Complex64> {
    let eps = f64::EPSILON;
    let mut eigs = Vec::with_capacity(n);
    let mut na = n; // active block is rows/cols 0..na
    let mut stalled = 0usize;
    let budget = 60 * n;
    let mut total = 0usize;
    while na > 0 {
        if na == 1 {
            eigs.push(h[0]);
            break;
        }
        // Deflation scan: the bottom-most negligible subdiagonal in the block.
        let mut lo = na - 1;
        while lo > 0 {
            let scale = h[(lo - 1) * n + (lo - 1)].norm() + h[lo * n + lo].norm();
            let scale = if scale == 0.0 { 1.0 } else { scale };
            if h[lo * n + (lo - 1)].norm() <= eps * scale {
                h[lo * n + (lo - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == na - 1 {
            eigs.push(h[(na - 1) * n + (na - 1)]);
            na -= 1;
            stalled = 0;
            continue;
        }
        total += 1;
        stalled += 1;
        if total > budget {
            // Give up on the remaining block; report its diagonal. The
            // residual of each reported root still exposes the failure.
            for i in 0..na {
                eigs.push(h[i * n + i]);
            }
            break;
        }
        let sigma = if stalled % 16 == 0 {
            // Exceptional shift to break symmetry-induced stalls.
            h[(na - 1) * n + (na - 1)]
                + Complex64::new(1.5 * h[(na - 1) * n + (na - 2)].norm(), 0.0)
        } else {
            wilkinson_shift(
                h[(na - 2) * n + (na - 2)],
                h[(na - 2) * n + (na - 1)],
                h[(na - 1) * n + (na - 2)],
                h[(na - 1) * n + (na - 1)],
            )
        };
        qr_step(h, n, lo, na, sigma);
    }
    eigs
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    // The eigenvalue of [[a, b], [c, d]] closer to d.
    let tr_half = 0.5 * (a + d);
    let disc = (0.25 * (a - d) * (a - d) + b * c).sqrt();
    let e1 = tr_half + disc;
    let e2 = tr_half - disc;
    if (e1 - d).norm() <= (e2 - d).norm() {
        e1
    } else {
        e2
    }
}

/// One explicit shifted QR sweep on the active block `lo..na`.
fn qr_step(h: &mut [Complex64], n: usize, lo: usize, na: usize, sigma: Complex64) {
    for j in lo..na {
        h[j * n + j] -= sigma;
    }
    // Left Givens sweep annihilating the subdiagonal: rows (j, j+1).
    let mut rot = Vec::with_capacity(na - lo - 1);
    for j in lo..na - 1 {
        let a = h[j * n + j];
        let b = h[(j + 1) * n + j];
        let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 || a.norm() == 0.0 {
            // Degenerate pivot: swap rows.
            (0.0, Complex64::new(1.0, 0.0))
        } else {
            let phase = a / a.norm();
            (a.norm() / r, phase * b.conj() / r)
        };
        for kcol in j..na {
            let top = h[j * n + kcol];
            let bot = h[(j + 1) * n + kcol];
            h[j * n + kcol] = c * top + s * bot;
            h[(j + 1) * n + kcol] = -s.conj() * top + c * bot;
        }
        rot.push((c, s));
    }
    // Right sweep (columns j, j+1) restoring Hessenberg form, then the
    // shift goes back on the diagonal.
    for (idx, &(c, s)) in rot.iter().enumerate() {
        let j = lo + idx;
        let row_end = (j + 2).min(na - 1);
        for i in lo..=row_end {
            let left = h[i * n + j];
            let right = h[i * n + j + 1];
            h[i * n + j] = c * left + s.conj() * right;
            h[i * n + j + 1] = -s * left + c * right;
        }
    }
    for j in lo..na {
        h[j * n + j] += sigma;
    }
}

/// Which component of a spectral parameter a raster axis sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisPart {
    Re,
    Im,
}

/// One raster axis: sweep `part` of a parameter over `[lo, hi]`.
#[derive(Debug, Clone, Copy)]
pub struct AxisSpec {
    pub part: AxisPart,
    pub lo: f64,
    pub hi: f64,
}

impl AxisSpec {
    fn value(&self, t: f64) -> Complex64 {
        match self.part {
            AxisPart::Re => Complex64::new(t, 0.0),
            AxisPart::Im => Complex64::new(0.0, t),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RasterOptions {
    /// Nodes along the first and second axis.
    pub n1: usize,
    pub n2: usize,
    /// Trace the zero contour of `Re χ` (valid when the problem, the
    /// boundary condition and both axes are real); otherwise ridge chains
    /// of `−log|χ|` are extracted.
    pub contour: bool,
}

#[derive(Debug, Clone)]
pub struct RasterResult {
    /// Axis sample values.
    pub t1: Vec<f64>,
    pub t2: Vec<f64>,
    /// χ at the nodes, `t1`-major (`chi[i1 * n2 + i2]`).
    pub chi: Vec<Complex64>,
    /// Traced eigencurves as polylines in `(t1, t2)` coordinates.
    pub curves: Vec<Vec<(f64, f64)>>,
    /// Whether the curves came from the zero contour (true) or from ridge
    /// chains (false).
    pub contour_mode: bool,
}

/// Rasterize χ over a two-parameter window and trace the eigencurves.
///
/// `params` names the two swept parameters; every other parameter must
/// appear in `fixed`.
pub fn eigencurve_raster(
    poly: &CharPolynomial,
    params: (usize, usize),
    axis1: &AxisSpec,
    axis2: &AxisSpec,
    fixed: &[(usize, Complex64)],
    opts: &RasterOptions,
) -> Result<RasterResult> {
    let (p1, p2) = params;
    if p1 >= poly.d || p2 >= poly.d {
        return Err(Error::IndexOutOfRange(format!(
            "raster parameters ({p1}, {p2}) of {} parameters",
            poly.d
        )));
    }
    if p1 == p2 {
        return Err(Error::InvalidProblem(
            "raster needs two distinct parameters".into(),
        ));
    }
    if opts.n1 < 2 || opts.n2 < 2 {
        return Err(Error::InvalidProblem(
            "raster needs at least 2 nodes per axis".into(),
        ));
    }
    let mut base = vec![None; poly.d];
    for &(i, v) in fixed {
        if i >= poly.d {
            return Err(Error::IndexOutOfRange(format!(
                "fixed parameter {} of {} parameters",
                i, poly.d
            )));
        }
        if i == p1 || i == p2 {
            return Err(Error::InvalidProblem(format!(
                "parameter {i} is both fixed and a raster axis"
            )));
        }
        if base[i].replace(v).is_some() {
            return Err(Error::InvalidProblem(format!("parameter {i} fixed twice")));
        }
    }
    for (i, slot) in base.iter().enumerate() {
        if i != p1 && i != p2 && slot.is_none() {
            return Err(Error::InvalidProblem(format!(
                "parameter {i} neither fixed nor a raster axis"
            )));
        }
    }
    let linspace = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
        (0..n)
            .map(|k| lo + (hi - lo) * (k as f64) / ((n - 1) as f64))
            .collect()
    };
    let t1 = linspace(axis1.lo, axis1.hi, opts.n1);
    let t2 = linspace(axis2.lo, axis2.hi, opts.n2);

    let rows = par::map_indexed(opts.n1, |i1| {
        let mut lambdas: Vec<Complex64> = base
            .iter()
            .map(|s| s.unwrap_or(Complex64::new(0.0, 0.0)))
            .collect();
        lambdas[p1] = axis1.value(t1[i1]);
        let mut row = Vec::with_capacity(opts.n2);
        for &v2 in &t2 {
            lambdas[p2] = axis2.value(v2);
            let mu: Vec<Complex64> = lambdas
                .iter()
                .zip(&poly.lambda0)
                .map(|(l, l0)| l - l0)
                .collect();
            row.push(poly.eval_mu(&mu));
        }
        row
    });
    let chi: Vec<Complex64> = rows.into_iter().flatten().collect();

    let curves = if opts.contour {
        contour_curves(&t1, &t2, &chi, opts.n1, opts.n2)
    } else {
        ridge_curves(&t1, &t2, &chi, opts.n1, opts.n2)
    };
    Ok(RasterResult {
        t1,
        t2,
        chi,
        curves,
        contour_mode: opts.contour,
    })
}

/// Marching squares on `Re χ`, with segment stitching into polylines.
fn contour_curves(
    t1: &[f64],
    t2: &[f64],
    chi: &[Complex64],
    n1: usize,
    n2: usize,
) -> Vec<Vec<(f64, f64)>> {
    let f = |i1: usize, i2: usize| chi[i1 * n2 + i2].re;
    let mut segments: Vec<((f64, f64), (f64, f64))> = Vec::new();
    for i1 in 0..n1 - 1 {
        for i2 in 0..n2 - 1 {
            // Corners counterclockwise from (i1, i2).
            let corners = [
                (t1[i1], t2[i2], f(i1, i2)),
                (t1[i1 + 1], t2[i2], f(i1 + 1, i2)),
                (t1[i1 + 1], t2[i2 + 1], f(i1 + 1, i2 + 1)),
                (t1[i1], t2[i2 + 1], f(i1, i2 + 1)),
            ];
            let mask: usize = corners
                .iter()
                .enumerate()
                .map(|(k, &(_, _, v))| usize::from(v > 0.0) << k)
                .sum();
            if mask == 0 || mask == 15 {
                continue;
            }
            // Zero crossing on edge (a → b), linearly interpolated.
            let cross = |a: usize, b: usize| -> (f64, f64) {
                let (xa, ya, fa) = corners[a];
                let (xb, yb, fb) = corners[b];
                let t = fa / (fa - fb);
                (xa + t * (xb - xa), ya + t * (yb - ya))
            };
            let mut emit = |a: (usize, usize), b: (usize, usize)| {
                segments.push((cross(a.0, a.1), cross(b.0, b.1)));
            };
            match mask {
                1 | 14 => emit((0, 1), (0, 3)),
                2 | 13 => emit((0, 1), (1, 2)),
                4 | 11 => emit((1, 2), (2, 3)),
                8 | 7 => emit((2, 3), (0, 3)),
                3 | 12 => emit((0, 3), (1, 2)),
                6 | 9 => emit((0, 1), (2, 3)),
                5 | 10 => {
                    // Saddle: the cell center decides the pairing.
                    let center = corners.iter().map(|&(_, _, v)| v).sum::<f64>() / 4.0;
                    let same_as_mask5 = (center > 0.0) == (mask == 5);
                    if same_as_mask5 {
                        emit((0, 1), (1, 2));
                        emit((2, 3), (0, 3));
                    } else {
                        emit((0, 1), (0, 3));
                        emit((1, 2), (2, 3));
                    }
                }
                _ => unreachable!(),
            }
        }
    }
    stitch_segments(segments, t1, t2)
}

/// Join contour segments into polylines by matching quantized endpoints.
fn stitch_segments(
    segments: Vec<((f64, f64), (f64, f64))>,
    t1: &[f64],
    t2: &[f64],
) -> Vec<Vec<(f64, f64)>> {
    use std::collections::HashMap;
    if segments.is_empty() {
        return Vec::new();
    }
    let span1 = (t1[t1.len() - 1] - t1[0]).abs().max(f64::MIN_POSITIVE);
    let span2 = (t2[t2.len() - 1] - t2[0]).abs().max(f64::MIN_POSITIVE);
    let key = |p: (f64, f64)| -> (i64, i64) {
        (
            (p.0 / span1 * 1e9).round() as i64,
            (p.1 / span2 * 1e9).round() as i64,
        )
    };
    // Vertex → incident (segment, end) pairs.
    let mut incident: HashMap<(i64, i64), Vec<(usize, bool)>> = HashMap::new();
    for (s, &(a, b)) in segments.iter().enumerate() {
        incident.entry(key(a)).or_default().push((s, false));
        incident.entry(key(b)).or_default().push((s, true));
    }
    let mut used = vec![false; segments.len()];
    let mut curves = Vec::new();
    // Open chains first (walk from degree-1 vertices), then closed loops.
    for start_open in [true, false] {
        for s in 0..segments.len() {
            if used[s] {
                continue;
            }
            let (a, b) = segments[s];
            let deg_a = incident[&key(a)].len();
            let deg_b = incident[&key(b)].len();
            if start_open && deg_a != 1 && deg_b != 1 {
                continue;
            }
            // Walk away from an endpoint of degree 1 when one exists.
            let (mut tail, head) = if deg_a == 1 { (a, b) } else { (b, a) };
            used[s] = true;
            let mut line = vec![tail, head];
            tail = head;
            loop {
                let next = incident[&key(tail)]
                    .iter()
                    .find(|&&(seg, _)| !used[seg])
                    .copied();
                match next {
                    None => break,
                    Some((seg, end)) => {
                        used[seg] = true;
                        let (a, b) = segments[seg];
                        let far = if end { a } else { b };
                        line.push(far);
                        tail = far;
                    }
                }
            }
            curves.push(line);
        }
    }
    curves
}

/// Ridge chains of `log10(|χ| + tiny)`: nodes in the lowest decile that
/// are row- or column-local minima, joined by 8-adjacency.
fn ridge_curves(
    t1: &[f64],
    t2: &[f64],
    chi: &[Complex64],
    n1: usize,
    n2: usize,
) -> Vec<Vec<(f64, f64)>> {
    let l: Vec<f64> = chi.iter().map(|c| (c.norm() + 1e-300).log10()).collect();
    let mut sorted = l.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let threshold = sorted[(sorted.len() - 1) / 10];
    let at = |i1: usize, i2: usize| l[i1 * n2 + i2];
    let mut mask = vec![false; l.len()];
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            let v = at(i1, i2);
            if v > threshold {
                continue;
            }
            // A direction only counts when both neighbors exist; one-sided
            // boundary "minima" would smear chains along the window edges.
            let row_min = i2 > 0 && i2 + 1 < n2 && at(i1, i2 - 1) >= v && at(i1, i2 + 1) >= v;
            let col_min = i1 > 0 && i1 + 1 < n1 && at(i1 - 1, i2) >= v && at(i1 + 1, i2) >= v;
            if row_min || col_min {
                mask[i1 * n2 + i2] = true;
            }
        }
    }
    // Connected components under 8-adjacency.
    let mut seen = vec![false; mask.len()];
    let mut curves = Vec::new();
    for start in 0..mask.len() {
        if !mask[start] || seen[start] {
            continue;
        }
        let mut component = Vec::new();
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(idx) = stack.pop() {
            let (i1, i2) = (idx / n2, idx % n2);
            component.push((i1, i2));
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (j1, j2) = (i1 as i64 + di, i2 as i64 + dj);
                    if j1 < 0 || j2 < 0 || j1 >= n1 as i64 || j2 >= n2 as i64 {
                        continue;
                    }
                    let jdx = (j1 as usize) * n2 + j2 as usize;
                    if mask[jdx] && !seen[jdx] {
                        seen[jdx] = true;
                        stack.push(jdx);
                    }
                }
            }
        }
        // Order along the axis with the larger extent so the polyline runs
        // monotonically along the ridge.
        let span1 = component.iter().map(|c| c.0).max().unwrap()
            - component.iter().map(|c| c.0).min().unwrap();
        let span2 = component.iter().map(|c| c.1).max().unwrap()
            - component.iter().map(|c| c.1).min().unwrap();
        if span1 >= span2 {
            component.sort_by_key(|&(a, b)| (a, b));
        } else {
            component.sort_by_key(|&(a, b)| (b, a));
        }
        curves.push(
            component
                .into_iter()
                .map(|(i1, i2)| (t1[i1], t2[i2]))
                .collect(),
        );
    }
    curves
}
