//! Uniform meshes, sampled functions and cumulative quadrature.
//!
//! Everything downstream works on functions *sampled on a fixed uniform
//! mesh*; integrals are replaced by cumulative quadrature sums anchored at a
//! base point of the mesh. Two rules are offered: the composite trapezoid
//! rule (robust, second order, exact cancellation properties for symmetric
//! integrands) and an interpolatory stencil rule of selectable width
//! (order ≈ stencil width, for smooth coefficients). The stencil weights
//! are computed in exact integer-fraction arithmetic, so a `points = 2`
//! stencil reproduces the trapezoid rule bit for bit.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// A uniform mesh of `m + 1` points over `[x1, x2]` with a distinguished
/// base point `x(i0)` at which all cumulative integrals vanish.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub x1: f64,
    pub x2: f64,
    /// Number of mesh cells; the mesh has `m + 1` points.
    pub m: usize,
    /// Index of the base point (`0 ≤ i0 ≤ m`). Cumulative integrals are
    /// signed: negative orientation to the left of the base point.
    pub i0: usize,
}

impl Grid {
    /// Mesh over `[x1, x2]` with base point at the left endpoint.
    pub fn new(x1: f64, x2: f64, m: usize) -> Result<Grid> {
        Grid::with_basepoint(x1, x2, m, 0)
    }

    /// Mesh with an arbitrary base point index.
    pub fn with_basepoint(x1: f64, x2: f64, m: usize, i0: usize) -> Result<Grid> {
        if !(x1.is_finite() && x2.is_finite()) || x2 <= x1 {
            return Err(Error::InvalidProblem(format!(
                "interval [{x1}, {x2}] is not a finite interval with x1 < x2"
            )));
        }
        if m < 1 {
            return Err(Error::InvalidProblem("mesh needs at least one cell".into()));
        }
        if i0 > m {
            return Err(Error::InvalidProblem(format!(
                "base point index {i0} outside mesh 0..={m}"
            )));
        }
        Ok(Grid { x1, x2, m, i0 })
    }

    /// Mesh step.
    pub fn h(&self) -> f64 {
        (self.x2 - self.x1) / self.m as f64
    }

    /// Number of mesh points (`m + 1`).
    pub fn len(&self) -> usize {
        self.m + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The `i`-th mesh point; exact endpoints at `i = 0` and `i = m`.
    pub fn x(&self, i: usize) -> f64 {
        if i == 0 {
            self.x1
        } else if i == self.m {
            self.x2
        } else {
            self.x1 + (self.x2 - self.x1) * (i as f64 / self.m as f64)
        }
    }

    /// Base point abscissa.
    pub fn x0(&self) -> f64 {
        self.x(self.i0)
    }

    /// All mesh points.
    pub fn points(&self) -> Vec<f64> {
        (0..=self.m).map(|i| self.x(i)).collect()
    }

    /// Structural equality up to floating-point noise in the endpoints.
    pub fn compatible(&self, other: &Grid) -> bool {
        fn close(a: f64, b: f64) -> bool {
            (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
        }
        self.m == other.m
            && self.i0 == other.i0
            && close(self.x1, other.x1)
            && close(self.x2, other.x2)
    }
}

/// A complex-valued function known by its samples on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    pub grid: Grid,
    pub values: Vec<Complex64>,
}

impl SampledFunction {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<SampledFunction> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a mesh of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(SampledFunction { grid, values })
    }

    /// Sample a closure on the mesh.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> SampledFunction {
        let values = grid.points().into_iter().map(f).collect();
        SampledFunction { grid, values }
    }

    /// Sample a real-valued closure on the mesh.
    pub fn from_real_fn(grid: Grid, f: impl Fn(f64) -> f64) -> SampledFunction {
        SampledFunction::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    /// Constant function on the mesh.
    pub fn constant(grid: Grid, c: Complex64) -> SampledFunction {
        SampledFunction {
            grid,
            values: vec![c; grid.len()],
        }
    }

    /// Supremum of `|f|` over the mesh.
    pub fn sup_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Minimum of `|f|` over the mesh.
    pub fn min_abs(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v.norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// True when every sample has an exactly zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    /// Value at the right endpoint of the mesh.
    pub fn at_x2(&self) -> Complex64 {
        *self.values.last().expect("mesh has at least two points")
    }

    /// Value at the base point of the mesh.
    pub fn at_x0(&self) -> Complex64 {
        self.values[self.grid.i0]
    }

    /// Parse a `x,re[,im]` CSV table sampled on `grid`.
    ///
    /// The header row is mandatory; the table must have exactly one row per
    /// mesh point, in mesh order, with abscissae matching the mesh to a
    /// relative `1e-12`.
    pub fn from_csv_str(text: &str, grid: Grid) -> Result<SampledFunction> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::CsvFormat {
            line: 1,
            message: "empty table".into(),
        })?;
        let header = header.trim();
        let has_im = match header {
            "x,re" => false,
            "x,re,im" => true,
            _ => {
                return Err(Error::CsvFormat {
                    line: 1,
                    message: format!("header must be `x,re` or `x,re,im`, got `{header}`"),
                })
            }
        };
        let mut values = Vec::with_capacity(grid.len());
        for (lineno, raw) in lines {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            let expected = if has_im { 3 } else { 2 };
            if fields.len() != expected {
                return Err(Error::CsvFormat {
                    line: lineno + 1,
                    message: format!("expected {expected} fields, got {}", fields.len()),
                });
            }
            let parse = |s: &str| -> Result<f64> {
                s.trim().parse::<f64>().map_err(|_| Error::CsvFormat {
                    line: lineno + 1,
                    message: format!("`{s}` is not a number"),
                })
            };
            let x = parse(fields[0])?;
            let re = parse(fields[1])?;
            let im = if has_im { parse(fields[2])? } else { 0.0 };
            let i = values.len();
            if i >= grid.len() {
                return Err(Error::GridMismatch(format!(
                    "table has more rows than the {}-point mesh",
                    grid.len()
                )));
            }
            let xg = grid.x(i);
            if (x - xg).abs() > 1e-12 * xg.abs().max(1.0) {
                return Err(Error::GridMismatch(format!(
                    "row {} abscissa {x} does not match mesh point {xg}",
                    lineno + 1
                )));
            }
            values.push(Complex64::new(re, im));
        }
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "table has {} rows for a {}-point mesh",
                values.len(),
                grid.len()
            )));
        }
        Ok(SampledFunction { grid, values })
    }

    /// Render the samples as a `x,re,im` CSV table ([`crate::fmt::g17`]
    /// formatting).
    pub fn to_csv_string(&self) -> String {
        use crate::fmt::g17;
        let mut out = String::from("x,re,im\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", g17(self.grid.x(i)), g17(v.re), g17(v.im)));
        }
        out
    }
}

/// Quadrature rule used for all cumulative integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    /// Composite trapezoid rule (default; second order).
    Trapezoid,
    /// Interpolatory rule: each cell integral uses a Lagrange polynomial
    /// through `points` neighbouring samples. `points` must lie in
    /// `2..=17`; width 2 is the trapezoid rule. Larger widths raise the
    /// order on smooth data but become unstable near the boundary, which is
    /// why widths beyond 17 are rejected.
    Stencil { points: usize },
}

impl Quadrature {
    /// Stencil width actually used on a mesh with `m` cells.
    fn effective_points(self, m: usize) -> usize {
        let p = match self {
            Quadrature::Trapezoid => 2,
            Quadrature::Stencil { points } => points,
        };
        assert!(
            (2..=17).contains(&p),
            "stencil width {p} outside the supported range 2..=17"
        );
        p.min(m + 1)
    }

    /// Check the parameters without running anything.
    pub fn validate(self) -> Result<()> {
        if let Quadrature::Stencil { points } = self {
            if !(2..=17).contains(&points) {
                return Err(Error::InvalidProblem(format!(
                    "stencil width {points} outside the supported range 2..=17"
                )));
            }
        }
        Ok(())
    }
}

/// Exact rational number over `i128`, used only to derive stencil weights.
#[derive(Clone, Copy, Debug)]
struct Frac {
    n: i128,
    d: i128,
}

impl Frac {
    fn new(n: i128, d: i128) -> Frac {
        debug_assert!(d != 0);
        let g = gcd(n.unsigned_abs(), d.unsigned_abs()) as i128;
        let s = if d < 0 { -1 } else { 1 };
        Frac {
            n: s * n / g,
            d: s * d / g,
        }
    }
    fn zero() -> Frac {
        Frac { n: 0, d: 1 }
    }
    fn one() -> Frac {
        Frac { n: 1, d: 1 }
    }
    fn add(self, o: Frac) -> Frac {
        Frac::new(self.n * o.d + o.n * self.d, self.d * o.d)
    }
    fn sub(self, o: Frac) -> Frac {
        Frac::new(self.n * o.d - o.n * self.d, self.d * o.d)
    }
    fn div(self, o: Frac) -> Frac {
        Frac::new(self.n * o.d, self.d * o.n)
    }
    fn mul_int(self, k: i128) -> Frac {
        Frac::new(self.n * k, self.d)
    }
    fn to_f64(self) -> f64 {
        self.n as f64 / self.d as f64
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    if a == 0 {
        return b.max(1);
    }
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

/// Weights of the interpolatory cell rule.
///
/// Row `off` holds the `p` weights `w` such that the integral of the degree
/// `p-1` interpolant over the cell `[off, off+1]` (unit spacing) equals
/// `Σ w[t]·f(t)`. Rows `0..=p-2` cover every position of a cell inside its
/// stencil. Derived in exact rational arithmetic.
fn stencil_weights(p: usize) -> Vec<Vec<f64>> {
    let mut rows = Vec::with_capacity(p - 1);
    for off in 0..p - 1 {
        let mut row = Vec::with_capacity(p);
        for m_node in 0..p {
            // Numerator polynomial ∏_{l≠m}(t - l) as integer coefficients.
            let mut num = vec![Frac::one()];
            for l in 0..p {
                if l == m_node {
                    continue;
                }
                let mut next = vec![Frac::zero(); num.len() + 1];
                for (a, &c) in num.iter().enumerate() {
                    next[a + 1] = next[a + 1].add(c);
                    next[a] = next[a].sub(c.mul_int(l as i128));
                }
                num = next;
            }
            // Denominator ∏_{l≠m}(m - l).
            let mut den: i128 = 1;
            for l in 0..p {
                if l != m_node {
                    den *= m_node as i128 - l as i128;
                }
            }
            // ∫_off^{off+1} of the numerator polynomial.
            let mut integral = Frac::zero();
            for (a, &c) in num.iter().enumerate() {
                let hi = pow_i128((off + 1) as i128, a as u32 + 1);
                let lo = pow_i128(off as i128, a as u32 + 1);
                integral = integral.add(c.mul_int(hi - lo).div(Frac::new(a as i128 + 1, 1)));
            }
            row.push(integral.div(Frac::new(den, 1)).to_f64());
        }
        rows.push(row);
    }
    rows
}

fn pow_i128(b: i128, e: u32) -> i128 {
    let mut acc: i128 = 1;
    for _ in 0..e {
        acc = acc.checked_mul(b).expect("stencil weight overflow");
    }
    acc
}

/// Per-cell integral increments `∫_{x_j}^{x_{j+1}} f`.
fn cell_increments(values: &[Complex64], grid: &Grid, quad: Quadrature) -> Vec<Complex64> {
    let m = grid.m;
    let h = grid.h();
    let p = quad.effective_points(m);
    if p == 2 {
        return (0..m)
            .map(|j| 0.5 * h * (values[j] + values[j + 1]))
            .collect();
    }
    let weights = stencil_weights(p);
    let shift = (p - 2) / 2;
    (0..m)
        .map(|j| {
            let s = j.saturating_sub(shift).min(m - (p - 1));
            let off = j - s;
            let mut acc = Complex64::new(0.0, 0.0);
            for (t, &w) in weights[off].iter().enumerate() {
                acc += w * values[s + t];
            }
            h * acc
        })
        .collect()
}

/// Cumulative integral `F(x_i) = ∫_{x0}^{x_i} f` on the mesh, `F(x0) = 0`,
/// signed to the left of the base point.
pub fn cumulative_integral(values: &[Complex64], grid: &Grid, quad: Quadrature) -> Vec<Complex64> {
    assert_eq!(values.len(), grid.len(), "sample count must match the mesh");
    let inc = cell_increments(values, grid, quad);
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut acc = Complex64::new(0.0, 0.0);
    for j in grid.i0..grid.m {
        acc += inc[j];
        out[j + 1] = acc;
    }
    acc = Complex64::new(0.0, 0.0);
    for j in (0..grid.i0).rev() {
        acc -= inc[j];
        out[j] = acc;
    }
    out
}

/// Cumulative integral of a [`SampledFunction`], sharing its mesh.
pub fn cumulative_integral_fn(f: &SampledFunction, quad: Quadrature) -> SampledFunction {
    SampledFunction {
        grid: f.grid,
        values: cumulative_integral(&f.values, &f.grid, quad),
    }
}
