//! The recursive integral tables behind the spectral power series.
//!
//! Each table entry is a function `X^j` on the mesh, indexed by an
//! admissible [`MultiIndex`] `j`. Entries are built degree by degree:
//!
//! * odd total degree (exactly one odd slot `i`):
//!   `X^j = ∫ multᵢ · X^{j−δᵢ}`, where `multᵢ = rᵢ·u0²` for the plain
//!   pencil and `multᵢ = u0·(rᵢu0 + sᵢu0')` for the generalized one; the
//!   generalized step additionally picks up
//!   `∫ (sᵢ/p) · Σ_{i'} X^{j−δᵢ−δ_{i'}}`;
//! * even total degree: `X^j = ∫ (1/(p·u0²)) · Σᵢ X^{j−δᵢ}`.
//!
//! Two families share this recursion and differ only in the degree-0 entry:
//! the `XTILDE` family starts from the constant 1 and carries the solution
//! that equals `u0` at the base point, the `X` family starts from
//! `∫ 1/(p·u0²)` and carries the independent solution vanishing there. In
//! the generalized recursion, an `X`-family lookup whose index has exactly
//! one component equal to −1 denotes the constant `1/d`; every other
//! negative lookup is zero.
//!
//! All stored entries are *rescaled*: the factorial growth of iterated
//! integration is kept inside the entries, so series assembly sums them
//! with plain monomial weights. Entries vanish identically at the base
//! point (exactly, by construction of the cumulative quadrature) for every
//! positive degree.

use crate::error::{Error, Result};
use crate::grid::{cumulative_integral, Grid, Quadrature};
use crate::indices::{enumerate_by_degree, MultiIndex};
use crate::par;
use crate::problem::Coefficients;
use crate::seed::SeedSolution;
use num_complex::Complex64;
use std::collections::HashMap;

/// Which tower a table holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Degree-0 entry is the constant 1.
    Xtilde,
    /// Degree-0 entry is `∫ 1/(p·u0²)`.
    X,
}

impl Family {
    pub fn label(self) -> &'static str {
        match self {
            Family::Xtilde => "XTILDE",
            Family::X => "X",
        }
    }
}

/// Whether full mesh entries are retained or only right-endpoint values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableMode {
    /// Keep every entry on the whole mesh.
    Full,
    /// Keep only the value at `x2` per entry, building through a rolling
    /// window of full-mesh degrees. The base-point values need no storage:
    /// they vanish for every positive degree.
    Endpoint,
}

/// Overflow guard for table entries.
const BLOWUP_SUP: f64 = 1e250;

/// One family of integral-tower entries up to a maximum total degree.
#[derive(Debug, Clone)]
pub struct PowerTable {
    pub family: Family,
    pub d: usize,
    /// Maximum stored total degree.
    pub n: usize,
    pub mode: TableMode,
    pub generalized: bool,
    /// Entries are stored in rescaled form (factorials folded in).
    pub rescaled: bool,
    pub grid: Grid,
    by_degree: Vec<Vec<MultiIndex>>,
    full: HashMap<MultiIndex, Vec<Complex64>>,
    end: HashMap<MultiIndex, Complex64>,
}

impl PowerTable {
    /// Admissible indices grouped by degree, in enumeration order.
    pub fn by_degree(&self) -> &[Vec<MultiIndex>] {
        &self.by_degree
    }

    /// All stored indices in (degree, lexicographic) order.
    pub fn indices(&self) -> impl Iterator<Item = &MultiIndex> {
        self.by_degree.iter().flatten()
    }

    /// Full-mesh samples of one entry (FULL tables only).
    pub fn entry(&self, j: &MultiIndex) -> Result<&[Complex64]> {
        if self.mode != TableMode::Full {
            return Err(Error::IndexOutOfRange(
                "full-mesh entry requested from an endpoint-only table".into(),
            ));
        }
        self.full
            .get(j)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::IndexOutOfRange(format!("no entry {}", j.label())))
    }

    /// Value of one entry at the right endpoint (both modes).
    pub fn entry_at_x2(&self, j: &MultiIndex) -> Result<Complex64> {
        match self.mode {
            TableMode::Full => self
                .full
                .get(j)
                .map(|v| *v.last().expect("mesh entries are non-empty"))
                .ok_or_else(|| Error::IndexOutOfRange(format!("no entry {}", j.label()))),
            TableMode::Endpoint => self
                .end
                .get(j)
                .copied()
                .ok_or_else(|| Error::IndexOutOfRange(format!("no entry {}", j.label()))),
        }
    }

    /// Whether an entry of this index is stored.
    pub fn contains(&self, j: &MultiIndex) -> bool {
        match self.mode {
            TableMode::Full => self.full.contains_key(j),
            TableMode::Endpoint => self.end.contains_key(j),
        }
    }
}

/// Parameters of a table build.
#[derive(Debug, Clone, Copy)]
pub struct TableRequest {
    /// Maximum total degree (series truncation order).
    pub n: usize,
    pub mode: TableMode,
    pub quadrature: Quadrature,
}

/// Shared precomputed weights of both families.
struct Precomp {
    d: usize,
    grid: Grid,
    /// Odd-step weights `multᵢ`.
    mult: Vec<Vec<Complex64>>,
    /// Even-step weight `1/(p·u0²)`.
    inv_pu02: Vec<Complex64>,
    /// Generalized odd-step weights `sᵢ/p`, if present.
    s_over_p: Option<Vec<Vec<Complex64>>>,
}

fn precompute(coeffs: &Coefficients, seed: &SeedSolution) -> Result<Precomp> {
    let grid = coeffs.grid();
    if !grid.compatible(&seed.u0.grid) {
        return Err(Error::GridMismatch(
            "seed sampled on a different mesh than the coefficients".into(),
        ));
    }
    let n_pts = grid.len();
    let u0 = &seed.u0.values;
    let u0p = &seed.u0_prime.values;
    let p = &coeffs.p.values;
    let inv_pu02: Vec<Complex64> = (0..n_pts).map(|t| 1.0 / (p[t] * u0[t] * u0[t])).collect();
    let mult: Vec<Vec<Complex64>> = match &coeffs.s {
        None => coeffs
            .r
            .iter()
            .map(|ri| (0..n_pts).map(|t| ri.values[t] * u0[t] * u0[t]).collect())
            .collect(),
        Some(s) => coeffs
            .r
            .iter()
            .zip(s)
            .map(|(ri, si)| {
                (0..n_pts)
                    .map(|t| u0[t] * (ri.values[t] * u0[t] + si.values[t] * u0p[t]))
                    .collect()
            })
            .collect(),
    };
    let s_over_p = coeffs.s.as_ref().map(|s| {
        s.iter()
            .map(|si| (0..n_pts).map(|t| si.values[t] / p[t]).collect())
            .collect()
    });
    Ok(Precomp {
        d: coeffs.d(),
        grid,
        mult,
        inv_pu02,
        s_over_p,
    })
}

/// Build both families (`XTILDE`, `X`) for one problem.
pub fn build_tables(
    coeffs: &Coefficients,
    seed: &SeedSolution,
    req: TableRequest,
) -> Result<(PowerTable, PowerTable)> {
    let pre = precompute(coeffs, seed)?;
    let xt = build_family(Family::Xtilde, &pre, req)?;
    let xc = build_family(Family::X, &pre, req)?;
    Ok((xt, xc))
}

/// Build a single family.
pub fn build_table(
    coeffs: &Coefficients,
    seed: &SeedSolution,
    family: Family,
    req: TableRequest,
) -> Result<PowerTable> {
    let pre = precompute(coeffs, seed)?;
    build_family(family, &pre, req)
}

fn sup_norm(v: &[Complex64]) -> f64 {
    // NaN must register as a blowup, so it cannot be folded through
    // f64::max (which discards NaN operands).
    let mut sup = 0.0_f64;
    for z in v {
        let n = z.norm();
        if !n.is_finite() {
            return f64::INFINITY;
        }
        sup = sup.max(n);
    }
    sup
}

fn build_family(family: Family, pre: &Precomp, req: TableRequest) -> Result<PowerTable> {
    let d = pre.d;
    let grid = pre.grid;
    let n_pts = grid.len();
    let by_degree = enumerate_by_degree(d, req.n);
    let mut store: HashMap<MultiIndex, Vec<Complex64>> = HashMap::new();
    let mut end: HashMap<MultiIndex, Complex64> = HashMap::new();

    let seed_entry: Vec<Complex64> = match family {
        Family::Xtilde => vec![Complex64::new(1.0, 0.0); n_pts],
        Family::X => cumulative_integral(&pre.inv_pu02, &grid, req.quadrature),
    };
    let sup = sup_norm(&seed_entry);
    if !sup.is_finite() || sup > BLOWUP_SUP {
        return Err(Error::DivisionBlowup { degree: 0, sup });
    }
    if req.mode == TableMode::Endpoint {
        end.insert(MultiIndex::zero(d), *seed_entry.last().unwrap());
    }
    store.insert(MultiIndex::zero(d), seed_entry);

    for k in 1..=req.n {
        let idxs = &by_degree[k];
        let computed: Vec<Vec<Complex64>> = par::map_slice(idxs, |j| {
            compute_entry(j, k, family, pre, &store, req.quadrature)
        });
        for (j, v) in idxs.iter().zip(computed) {
            let sup = sup_norm(&v);
            if !sup.is_finite() || sup > BLOWUP_SUP {
                return Err(Error::DivisionBlowup { degree: k, sup });
            }
            debug_assert_eq!(v[grid.i0], Complex64::new(0.0, 0.0));
            if req.mode == TableMode::Endpoint {
                end.insert(j.clone(), *v.last().unwrap());
            }
            store.insert(j.clone(), v);
        }
        if req.mode == TableMode::Endpoint {
            // Degree k+1 needs degree k (predecessors) and, in the
            // generalized recursion, degree k−1 (grand predecessors).
            let window = if pre.s_over_p.is_some() { 1 } else { 0 };
            if k > window {
                for j in &by_degree[k - 1 - window] {
                    store.remove(j);
                }
            }
        }
    }

    let (full, end) = match req.mode {
        TableMode::Full => (store, HashMap::new()),
        TableMode::Endpoint => (HashMap::new(), end),
    };
    Ok(PowerTable {
        family,
        d,
        n: req.n,
        mode: req.mode,
        generalized: pre.s_over_p.is_some(),
        rescaled: true,
        grid,
        by_degree,
        full,
        end,
    })
}

fn compute_entry(
    j: &MultiIndex,
    degree: usize,
    family: Family,
    pre: &Precomp,
    store: &HashMap<MultiIndex, Vec<Complex64>>,
    quad: Quadrature,
) -> Vec<Complex64> {
    let n_pts = pre.grid.len();
    let d = pre.d;
    let mut integrand = vec![Complex64::new(0.0, 0.0); n_pts];
    if degree % 2 == 1 {
        let i = j.odd_position().expect("odd-degree admissible index");
        let pred_idx = j.minus(i).expect("odd slot is positive");
        let pred = store.get(&pred_idx).expect("predecessor degree was built");
        for t in 0..n_pts {
            integrand[t] = pre.mult[i][t] * pred[t];
        }
        if let Some(sp) = &pre.s_over_p {
            // Σ over grand predecessors; an out-of-range X-family lookup
            // with a single −1 component contributes the constant 1/d.
            let mut grand = vec![Complex64::new(0.0, 0.0); n_pts];
            let mut constant = Complex64::new(0.0, 0.0);
            for i2 in 0..d {
                match pred_idx.minus(i2) {
                    Some(g) => {
                        let gv = store.get(&g).expect("grand predecessor was built");
                        for t in 0..n_pts {
                            grand[t] += gv[t];
                        }
                    }
                    None => {
                        if family == Family::X {
                            constant += Complex64::new(1.0 / d as f64, 0.0);
                        }
                    }
                }
            }
            for t in 0..n_pts {
                integrand[t] += sp[i][t] * (grand[t] + constant);
            }
        }
    } else {
        let mut psum = vec![Complex64::new(0.0, 0.0); n_pts];
        for i in 0..d {
            if let Some(pr) = j.minus(i) {
                let pv = store.get(&pr).expect("predecessor degree was built");
                for t in 0..n_pts {
                    psum[t] += pv[t];
                }
            }
        }
        for t in 0..n_pts {
            integrand[t] = pre.inv_pu02[t] * psum[t];
        }
    }
    cumulative_integral(&integrand, &pre.grid, quad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SampledFunction;
    use crate::seed::seed_from_samples;

    fn trivial_seed(grid: Grid) -> SeedSolution {
        seed_from_samples(
            SampledFunction::constant(grid, Complex64::new(1.0, 0.0)),
            SampledFunction::constant(grid, Complex64::new(0.0, 0.0)),
        )
        .unwrap()
    }

    fn trivial_coeffs(grid: Grid, d: usize) -> Coefficients {
        let one = SampledFunction::constant(grid, Complex64::new(1.0, 0.0));
        let zero = SampledFunction::constant(grid, Complex64::new(0.0, 0.0));
        Coefficients::new(one.clone(), zero, vec![one; d], None).unwrap()
    }

    fn req(n: usize) -> TableRequest {
        TableRequest {
            n,
            mode: TableMode::Full,
            quadrature: Quadrature::Stencil { points: 6 },
        }
    }

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product::<f64>().max(1.0)
    }

    #[test]
    fn trivial_case_reproduces_monomials() {
        // p = 1, q = 0, r = 1, u0 = 1, d = 1: entries are x^k/k! in both
        // families (shifted by one integration for the X family).
        let grid = Grid::new(0.0, 1.0, 64).unwrap();
        let coeffs = trivial_coeffs(grid, 1);
        let seed = trivial_seed(grid);
        let (xt, xc) = build_tables(&coeffs, &seed, req(8)).unwrap();
        for k in 0..=8usize {
            let j = MultiIndex::new(&[k as u16]);
            let et = xt.entry(&j).unwrap();
            let ec = xc.entry(&j).unwrap();
            for (t, &x) in grid.points().iter().enumerate() {
                let expect_t = x.powi(k as i32) / factorial(k);
                let expect_c = x.powi(k as i32 + 1) / factorial(k + 1);
                assert!(
                    (et[t].re - expect_t).abs() < 1e-12,
                    "XTILDE k={k} t={t}: {} vs {expect_t}",
                    et[t].re
                );
                assert!(
                    (ec[t].re - expect_c).abs() < 1e-12,
                    "X k={k} t={t}: {} vs {expect_c}",
                    ec[t].re
                );
            }
        }
    }

    #[test]
    fn equal_weights_carry_path_multiplicities() {
        // d = 2 with r1 = r2 = 1: an even entry equals
        // path_count · x^|j| / |j|!.
        let grid = Grid::new(0.0, 1.0, 64).unwrap();
        let coeffs = trivial_coeffs(grid, 2);
        let seed = trivial_seed(grid);
        let xt = build_table(&coeffs, &seed, Family::Xtilde, req(6)).unwrap();
        for degree in (0..=6usize).step_by(2) {
            for j in &xt.by_degree()[degree] {
                let e = xt.entry(j).unwrap();
                let c = j.path_count() as f64;
                for (t, &x) in grid.points().iter().enumerate() {
                    let expect = c * x.powi(degree as i32) / factorial(degree);
                    assert!(
                        (e[t].re - expect).abs() < 1e-11,
                        "j={} t={t}: {} vs {expect}",
                        j.label(),
                        e[t].re
                    );
                }
            }
        }
    }

    #[test]
    fn entries_vanish_exactly_at_the_base_point() {
        let grid = Grid::with_basepoint(-1.0, 1.0, 40, 20).unwrap();
        let one = SampledFunction::constant(grid, Complex64::new(1.0, 0.0));
        let q = SampledFunction::from_real_fn(grid, |x| 0.5 * x);
        let r1 = SampledFunction::from_real_fn(grid, |x| 1.0 + x * x);
        let coeffs = Coefficients::new(one, q, vec![r1], None).unwrap();
        let seed = trivial_seed(grid);
        let (xt, xc) = build_tables(&coeffs, &seed, req(6)).unwrap();
        for table in [&xt, &xc] {
            for j in table.indices() {
                if j.degree() == 0 && table.family == Family::Xtilde {
                    continue;
                }
                let e = table.entry(j).unwrap();
                assert_eq!(
                    e[grid.i0],
                    Complex64::new(0.0, 0.0),
                    "family {:?} j={}",
                    table.family,
                    j.label()
                );
            }
        }
    }

    #[test]
    fn endpoint_mode_matches_full_mode_values() {
        let grid = Grid::new(0.0, std::f64::consts::PI, 60).unwrap();
        let one = SampledFunction::constant(grid, Complex64::new(1.0, 0.0));
        let zero = SampledFunction::constant(grid, Complex64::new(0.0, 0.0));
        let r1 = SampledFunction::from_real_fn(grid, |_| -1.0);
        let r2 = SampledFunction::from_real_fn(grid, |x| -(x * x));
        let coeffs = Coefficients::new(one, zero, vec![r1, r2], None).unwrap();
        let seed = trivial_seed(grid);
        let full = build_tables(&coeffs, &seed, req(8)).unwrap();
        let end_req = TableRequest {
            mode: TableMode::Endpoint,
            ..req(8)
        };
        let end = build_tables(&coeffs, &seed, end_req).unwrap();
        for (f, e) in [(&full.0, &end.0), (&full.1, &end.1)] {
            for j in f.indices() {
                assert_eq!(
                    f.entry_at_x2(j).unwrap(),
                    e.entry_at_x2(j).unwrap(),
                    "family {:?} j={}",
                    f.family,
                    j.label()
                );
            }
        }
        // The endpoint table refuses full-mesh access.
        let j0 = MultiIndex::zero(2);
        assert!(end.0.entry(&j0).is_err());
        assert!(full.0.entry(&j0).is_ok());
    }

    #[test]
    fn generalized_pure_s_matches_exponential_tower() {
        // d = 1, p = 1, u0 = 1, r = 0, s = 1: the X-family even entries are
        // x^(n+1)/(n+1)! (building the solution (e^{λx}−1)/λ) while the
        // XTILDE family collapses to its degree-0 constant.
        let grid = Grid::new(0.0, 1.0, 100).unwrap();
        let one = SampledFunction::constant(grid, Complex64::new(1.0, 0.0));
        let zero = SampledFunction::constant(grid, Complex64::new(0.0, 0.0));
        let coeffs =
            Coefficients::new(one.clone(), zero.clone(), vec![zero], Some(vec![one])).unwrap();
        let seed = trivial_seed(grid);
        let (xt, xc) = build_tables(&coeffs, &seed, req(8)).unwrap();
        for n in 0..=4usize {
            let j = MultiIndex::new(&[2 * n as u16]);
            let ec = xc.entry(&j).unwrap();
            let et = xt.entry(&j).unwrap();
            for (t, &x) in grid.points().iter().enumerate() {
                let expect = x.powi(n as i32 + 1) / factorial(n + 1);
                assert!(
                    (ec[t].re - expect).abs() < 1e-12,
                    "X n={n} t={t}: {} vs {expect}",
                    ec[t].re
                );
                let expect_t = if n == 0 { 1.0 } else { 0.0 };
                assert!((et[t].re - expect_t).abs() < 1e-12, "XTILDE n={n} t={t}");
            }
        }
    }

    #[test]
    fn zero_s_weights_reduce_to_plain_tables() {
        let grid = Grid::new(0.0, 2.0, 50).unwrap();
        let p = SampledFunction::from_real_fn(grid, |x| 1.0 + 0.25 * x);
        let q = SampledFunction::from_real_fn(grid, |x| x - 1.0);
        let r1 = SampledFunction::from_real_fn(grid, |x| (0.5 * x).cos());
        let zero = SampledFunction::constant(grid, Complex64::new(0.0, 0.0));
        let seed = trivial_seed(grid);
        let plain =
            Coefficients::new(p.clone(), q.clone(), vec![r1.clone()], None).unwrap();
        let gen = Coefficients::new(p, q, vec![r1], Some(vec![zero])).unwrap();
        let (pt, pc) = build_tables(&plain, &seed, req(6)).unwrap();
        let (gt, gc) = build_tables(&gen, &seed, req(6)).unwrap();
        for (a, b) in [(&pt, &gt), (&pc, &gc)] {
            for j in a.indices() {
                assert_eq!(a.entry(j).unwrap(), b.entry(j).unwrap(), "j={}", j.label());
            }
        }
    }

    #[test]
    fn blowup_is_reported() {
        let grid = Grid::new(0.0, 1.0, 10).unwrap();
        let p = SampledFunction::constant(grid, Complex64::new(1e-260, 0.0));
        let zero = SampledFunction::constant(grid, Complex64::new(0.0, 0.0));
        let one = SampledFunction::constant(grid, Complex64::new(1.0, 0.0));
        let coeffs = Coefficients::new(p, zero, vec![one], None).unwrap();
        let seed = trivial_seed(grid);
        let err = build_tables(&coeffs, &seed, req(4)).unwrap_err();
        assert_eq!(err.kind(), "DivisionBlowup");
    }

    #[test]
    fn missing_entries_are_reported() {
        let grid = Grid::new(0.0, 1.0, 10).unwrap();
        let coeffs = trivial_coeffs(grid, 1);
        let seed = trivial_seed(grid);
        let xt = build_table(&coeffs, &seed, Family::Xtilde, req(3)).unwrap();
        let err = xt.entry(&MultiIndex::new(&[7])).unwrap_err();
        assert_eq!(err.kind(), "IndexOutOfRange");
    }
}
