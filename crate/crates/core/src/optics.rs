//! Reflectance and transmittance of a graded-index slab.
//!
//! A planar layer on `[0, b]` with refractive-index profile `n(x)` sits
//! between homogeneous half-spaces of index `n1` (incidence side) and `n2`.
//! For propagation constant `β` and vacuum wavenumber `k`, the transverse
//! field satisfies `y'' = (β² − k²n(x)²) y`, which is the two-parameter
//! problem `p = 1, q = 0, r1 ≡ 1, r2 = n²` at `(λ1, λ2) = (β², −k²)`.
//!
//! One right-endpoint basis therefore covers every `(β, k)` pair, and the
//! reflection/transmission coefficients follow from the basis quartet at
//! the right edge by matching to the outside plane waves:
//!
//! ```text
//! D = (V1' − k1k2 V2) + i (k2 V1 + k1 V2')
//! R = (−(k1k2 V2 + V1') + i (k1 V2' − k2 V1)) / D
//! T = 2i k1 (V1 V2' − V1' V2) e^{−i k2 b} / D
//! ```
//!
//! with transverse wavenumbers `k1 = √(k²n1² − β²)`, `k2 = √(k²n2² − β²)`.
//! Energy conservation reads `|R|² + (k2/k1)|T|² = 1`; the signed deviation
//! from it is the reported energy defect.
//!
//! Wide wavenumber sweeps run on a single basis recentered midway through
//! the swept `λ2` range, with the seed's imaginary scale raised to the
//! local oscillation rate so the recentered seed stays bounded away from
//! zero.

use crate::error::{Error, Result};
use crate::fmt::g17;
use crate::grid::{Quadrature, SampledFunction};
use crate::problem::Coefficients;
use crate::series::{build_basis_endpoint, BuildOptions, EndpointBasis, SeedInput};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Geometry, outside media and discretization of a slab problem.
pub struct OpticsConfig {
    /// Index of the incidence half-space.
    pub n1: f64,
    /// Index of the transmission half-space.
    pub n2: f64,
    /// Layer thickness; the profile mesh must span `[0, b]`.
    pub b: f64,
    /// Refractive-index samples `n(x)` across the layer.
    pub profile: SampledFunction,
    /// Series order in the spectral parameters (maximum λ-degree kept).
    pub order: usize,
    pub quadrature: Quadrature,
}

impl OpticsConfig {
    /// Check the layer parameters and the profile mesh without building.
    pub fn validate(&self) -> Result<()> {
        if !(self.n1 > 0.0 && self.n2 > 0.0 && self.b > 0.0) {
            return Err(Error::InvalidProblem(
                "outside indices and thickness must be positive".into(),
            ));
        }
        let g = self.profile.grid;
        if g.x1 != 0.0 || (g.x2 - self.b).abs() > 1e-12 * self.b {
            return Err(Error::GridMismatch(format!(
                "profile mesh spans [{}, {}], expected [0, {}]",
                g.x1, g.x2, self.b
            )));
        }
        if !self.profile.is_real() || self.profile.values.iter().any(|v| v.re <= 0.0) {
            return Err(Error::InvalidProblem(
                "the index profile must be real and positive".into(),
            ));
        }
        Ok(())
    }

    /// The layer as a two-parameter coefficient set (`r2 = n²`).
    fn coefficients(&self) -> Result<Coefficients> {
        let grid = self.profile.grid;
        let one = SampledFunction::constant(grid, Complex64::new(1.0, 0.0));
        let zero = SampledFunction::constant(grid, Complex64::new(0.0, 0.0));
        let n_sq = SampledFunction {
            grid,
            values: self.profile.values.iter().map(|v| v * v).collect(),
        };
        Coefficients::new(one.clone(), zero, vec![one, n_sq], None)
    }
}

/// Reflection/transmission at one `(β, k)` pair.
#[derive(Debug, Clone, Copy)]
pub struct RTResult {
    pub reflection: Complex64,
    pub transmission: Complex64,
    /// `|R|² + (k2/k1)|T|² − 1`, signed.
    pub energy_defect: f64,
    /// Transverse wavenumbers outside the layer.
    pub k1: f64,
    pub k2: f64,
}

/// A slab solver holding one prebuilt endpoint basis.
pub struct OpticsSolver {
    pub n1: f64,
    pub n2: f64,
    pub b: f64,
    basis: EndpointBasis,
}

impl OpticsSolver {
    /// Build about the spectral origin. Accurate for moderate `k²·b²`.
    pub fn direct(config: &OpticsConfig) -> Result<OpticsSolver> {
        config.validate()?;
        let coeffs = config.coefficients()?;
        let basis = build_basis_endpoint(
            &coeffs,
            &BuildOptions {
                quadrature: config.quadrature,
                ..BuildOptions::new(config.order)
            },
        )?;
        Ok(OpticsSolver {
            n1: config.n1,
            n2: config.n2,
            b: config.b,
            basis,
        })
    }

    /// Build recentered at `λ2 = −k²_mid`, the midpoint of the squared
    /// wavenumber range to be swept. The shifted problem oscillates, so the
    /// seed's imaginary scale is set to the local rate `√(q̂(0))`; about the
    /// origin that scale would vanish and the seed would pass through zero.
    pub fn recentered(config: &OpticsConfig, k_min: f64, k_max: f64) -> Result<OpticsSolver> {
        config.validate()?;
        if !(k_min > 0.0 && k_max > k_min) {
            return Err(Error::InvalidProblem(
                "recentering needs 0 < k_min < k_max".into(),
            ));
        }
        let coeffs = config.coefficients()?;
        let k2_mid = 0.5 * (k_min * k_min + k_max * k_max);
        let lambda0 = vec![Complex64::new(0.0, 0.0), Complex64::new(-k2_mid, 0.0)];
        let n0 = config.profile.values[0].re;
        let gamma = (k2_mid * n0 * n0).sqrt();
        let basis = build_basis_endpoint(
            &coeffs,
            &BuildOptions {
                quadrature: config.quadrature,
                seed: SeedInput::Auto {
                    order: None,
                    gamma,
                    tol: 1e-6,
                },
                lambda0: Some(lambda0),
                ..BuildOptions::new(config.order)
            },
        )?;
        Ok(OpticsSolver {
            n1: config.n1,
            n2: config.n2,
            b: config.b,
            basis,
        })
    }

    /// Reflection and transmission at propagation constant `β` and vacuum
    /// wavenumber `k`. Fails when either outside medium is evanescent.
    pub fn rt_at(&self, beta: f64, k: f64) -> Result<RTResult> {
        let k1_sq = k * k * self.n1 * self.n1 - beta * beta;
        let k2_sq = k * k * self.n2 * self.n2 - beta * beta;
        if k1_sq <= 0.0 || k2_sq <= 0.0 {
            return Err(Error::EvanescentRegime {
                beta_b: beta * self.b,
                b_over_lambda: k * self.b / (2.0 * PI),
            });
        }
        let (k1, k2) = (k1_sq.sqrt(), k2_sq.sqrt());
        let lambdas = [
            Complex64::new(beta * beta, 0.0),
            Complex64::new(-k * k, 0.0),
        ];
        let q = self.basis.eval_at(&lambdas)?;
        let (v1, v2, v1p, v2p) = (q.v1, q.v2, q.v1p, q.v2p);
        let i = Complex64::new(0.0, 1.0);
        let d = (v1p - k1 * k2 * v2) + i * (k2 * v1 + k1 * v2p);
        let r = (-(k1 * k2 * v2 + v1p) + i * (k1 * v2p - k2 * v1)) / d;
        let w = v1 * v2p - v1p * v2;
        let t = 2.0 * i * k1 * w * (-i * k2 * self.b).exp() / d;
        let defect = r.norm_sqr() + (k2 / k1) * t.norm_sqr() - 1.0;
        Ok(RTResult {
            reflection: r,
            transmission: t,
            energy_defect: defect,
            k1,
            k2,
        })
    }
}

/// Outcome of one scan cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanStatus {
    Ok,
    /// The incidence medium is evanescent at this cell; nothing to compute.
    Skipped,
}

/// One `(β·b, b/λ)` cell of a scan.
#[derive(Debug, Clone, Copy)]
pub struct ScanCell {
    pub beta_b: f64,
    pub b_over_lambda: f64,
    pub status: ScanStatus,
    pub rt: Option<RTResult>,
}

/// Sweep reflection/transmission over the grid `beta_b × b_over_lambda`
/// on one recentered basis. Cells with `b/λ ≤ β·b/(2πn1)` have no
/// propagating incident wave and are reported as skipped.
pub fn rt_scan(
    config: &OpticsConfig,
    beta_b: &[f64],
    b_over_lambda: &[f64],
) -> Result<Vec<ScanCell>> {
    config.validate()?;
    if beta_b.is_empty() || b_over_lambda.is_empty() {
        return Err(Error::InvalidProblem("empty scan axis".into()));
    }
    let k_of = |bol: f64| 2.0 * PI * bol / config.b;
    // Live wavenumber range across all cells decides the recentering.
    let mut k_live: Vec<f64> = Vec::new();
    let mut live = vec![vec![false; b_over_lambda.len()]; beta_b.len()];
    for (ib, &bb) in beta_b.iter().enumerate() {
        for (il, &bol) in b_over_lambda.iter().enumerate() {
            if bol > bb / (2.0 * PI * config.n1) {
                live[ib][il] = true;
                k_live.push(k_of(bol));
            }
        }
    }
    if k_live.is_empty() {
        return Err(Error::InvalidProblem(
            "every scan cell is evanescent".into(),
        ));
    }
    let k_min = k_live.iter().cloned().fold(f64::INFINITY, f64::min);
    let k_max = k_live.iter().cloned().fold(0.0_f64, f64::max);
    let solver = if k_max > k_min {
        OpticsSolver::recentered(config, k_min, k_max)?
    } else {
        OpticsSolver::direct(config)?
    };
    let mut cells = Vec::with_capacity(beta_b.len() * b_over_lambda.len());
    for (ib, &bb) in beta_b.iter().enumerate() {
        for (il, &bol) in b_over_lambda.iter().enumerate() {
            if !live[ib][il] {
                cells.push(ScanCell {
                    beta_b: bb,
                    b_over_lambda: bol,
                    status: ScanStatus::Skipped,
                    rt: None,
                });
                continue;
            }
            let rt = solver.rt_at(bb / config.b, k_of(bol))?;
            cells.push(ScanCell {
                beta_b: bb,
                b_over_lambda: bol,
                status: ScanStatus::Ok,
                rt: Some(rt),
            });
        }
    }
    Ok(cells)
}

/// Serialize scan cells as CSV. Skipped cells carry `nan` numeric fields.
pub fn scan_to_csv(cells: &[ScanCell], b: f64) -> String {
    let mut out = String::from(
        "beta,b_over_lambda,reR,imR,reT,imT,absR2,weighted_absT2,energy_defect,status\n",
    );
    for cell in cells {
        let beta = cell.beta_b / b;
        match (&cell.status, &cell.rt) {
            (ScanStatus::Ok, Some(rt)) => {
                let weighted = (rt.k2 / rt.k1) * rt.transmission.norm_sqr();
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},ok\n",
                    g17(beta),
                    g17(cell.b_over_lambda),
                    g17(rt.reflection.re),
                    g17(rt.reflection.im),
                    g17(rt.transmission.re),
                    g17(rt.transmission.im),
                    g17(rt.reflection.norm_sqr()),
                    g17(weighted),
                    g17(rt.energy_defect),
                ));
            }
            _ => {
                out.push_str(&format!(
                    "{},{},nan,nan,nan,nan,nan,nan,nan,skipped\n",
                    g17(beta),
                    g17(cell.b_over_lambda),
                ));
            }
        }
    }
    out
}

/// The canonical graded layer used across the test suite: an exponential
/// ramp from 1.4 to 2.1 across a unit slab between `n1 = 1` and
/// `n2 = 1.5`.
pub fn exponential_ramp_config(m: usize, order: usize, quadrature: Quadrature) -> OpticsConfig {
    let grid = crate::grid::Grid::new(0.0, 1.0, m).unwrap();
    let profile = SampledFunction::from_real_fn(grid, |x| 1.4 * (x * (2.1_f64 / 1.4).ln()).exp());
    OpticsConfig {
        n1: 1.0,
        n2: 1.5,
        b: 1.0,
        profile,
        order,
        quadrature,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn homogeneous_layer_is_transparent() {
        // n ≡ n1 = n2: no impedance mismatch, R = 0 and T is a pure phase.
        let grid = Grid::new(0.0, 1.0, 100).unwrap();
        let config = OpticsConfig {
            n1: 1.5,
            n2: 1.5,
            b: 1.0,
            profile: SampledFunction::constant(grid, Complex64::new(1.5, 0.0)),
            order: 10,
            quadrature: Quadrature::Stencil { points: 6 },
        };
        let solver = OpticsSolver::direct(&config).unwrap();
        for (beta, k) in [(0.1, 1.0), (0.3, 1.4), (0.0, 2.0)] {
            let rt = solver.rt_at(beta, k).unwrap();
            let k1 = (k * k * 2.25 - beta * beta).sqrt();
            let want_t = (-2.0 * Complex64::new(0.0, 1.0) * k1 * 1.0).exp();
            assert!(rt.reflection.norm() < 1e-9, "R at ({beta}, {k})");
            assert!(
                (rt.transmission - want_t).norm() < 1e-8,
                "T at ({beta}, {k}): {} vs {}",
                rt.transmission,
                want_t
            );
            assert!(rt.energy_defect.abs() < 1e-9);
        }
    }

    #[test]
    fn graded_layer_conserves_energy() {
        let config = exponential_ramp_config(30, 8, Quadrature::Stencil { points: 13 });
        let solver = OpticsSolver::direct(&config).unwrap();
        let rt = solver.rt_at(0.1, 2.0 * PI * 0.1).unwrap();
        assert!(
            rt.energy_defect.abs() < 1e-8,
            "defect {}",
            rt.energy_defect
        );
        assert!(rt.reflection.norm() < 1.0);
    }

    #[test]
    fn graded_layer_agrees_with_the_initial_value_oracle() {
        use crate::oracle::{rk4_solve, FnProblem};
        let config = exponential_ramp_config(40, 10, Quadrature::Stencil { points: 9 });
        let solver = OpticsSolver::direct(&config).unwrap();
        let (beta, k) = (0.2, 2.0 * PI * 0.15);
        let rt = solver.rt_at(beta, k).unwrap();

        // Rebuild V1, V2 and their slopes by direct integration, then feed
        // the same matching formulas.
        let fp = FnProblem {
            p: Box::new(|_| Complex64::new(1.0, 0.0)),
            q: Box::new(|_| Complex64::new(0.0, 0.0)),
            r: vec![
                Box::new(|_| Complex64::new(1.0, 0.0)),
                Box::new(|x: f64| {
                    let n = 1.4 * (x * (2.1_f64 / 1.4).ln()).exp();
                    Complex64::new(n * n, 0.0)
                }),
            ],
            s: None,
        };
        let grid = config.profile.grid;
        let lams = [
            Complex64::new(beta * beta, 0.0),
            Complex64::new(-k * k, 0.0),
        ];
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let (y1, y1p) = rk4_solve(&fp, &lams, one, zero, grid, 12800).unwrap();
        let (y2, y2p) = rk4_solve(&fp, &lams, zero, one, grid, 12800).unwrap();
        let m = grid.m;
        let (v1, v2, v1p, v2p) = (
            y1.values[m],
            y2.values[m],
            y1p.values[m],
            y2p.values[m],
        );
        let (k1, k2) = (rt.k1, rt.k2);
        let i = Complex64::new(0.0, 1.0);
        let d = (v1p - k1 * k2 * v2) + i * (k2 * v1 + k1 * v2p);
        let r_want = (-(k1 * k2 * v2 + v1p) + i * (k1 * v2p - k2 * v1)) / d;
        let t_want = 2.0 * i * k1 * (v1 * v2p - v1p * v2) * (-i * k2 * 1.0).exp() / d;
        assert!(
            (rt.reflection - r_want).norm() < 1e-8,
            "R {} vs {}",
            rt.reflection,
            r_want
        );
        assert!(
            (rt.transmission - t_want).norm() < 1e-8,
            "T {} vs {}",
            rt.transmission,
            t_want
        );
    }

    #[test]
    fn recentered_sweep_matches_the_direct_build() {
        let config = exponential_ramp_config(50, 16, Quadrature::Stencil { points: 13 });
        let direct = OpticsSolver::direct(&config).unwrap();
        let recentered = OpticsSolver::recentered(&config, 2.0 * PI * 0.1, 2.0 * PI).unwrap();
        let (beta, k) = (0.1, 2.0 * PI * 0.3);
        let a = direct.rt_at(beta, k).unwrap();
        let b = recentered.rt_at(beta, k).unwrap();
        assert!(
            (a.reflection - b.reflection).norm() < 1e-5,
            "R {} vs {}",
            a.reflection,
            b.reflection
        );
        assert!(
            (a.transmission - b.transmission).norm() < 1e-5,
            "T {} vs {}",
            a.transmission,
            b.transmission
        );
    }

    #[test]
    fn scan_skips_evanescent_cells_and_completes_the_rest() {
        let config = exponential_ramp_config(50, 16, Quadrature::Stencil { points: 13 });
        let cells = rt_scan(
            &config,
            &[0.1, 0.2],
            &[0.005, 0.01, 0.1, 0.5, 1.0],
        )
        .unwrap();
        assert_eq!(cells.len(), 10);
        let skipped: Vec<_> = cells
            .iter()
            .filter(|c| c.status == ScanStatus::Skipped)
            .map(|c| (c.beta_b, c.b_over_lambda))
            .collect();
        assert_eq!(
            skipped,
            vec![(0.1, 0.005), (0.1, 0.01), (0.2, 0.005), (0.2, 0.01)]
        );
        for cell in &cells {
            if cell.status == ScanStatus::Ok {
                let rt = cell.rt.unwrap();
                assert!(
                    rt.energy_defect.abs() < 1e-4,
                    "cell ({}, {}): defect {}",
                    cell.beta_b,
                    cell.b_over_lambda,
                    rt.energy_defect
                );
            }
        }
    }

    #[test]
    fn scan_csv_has_the_pinned_layout() {
        let config = exponential_ramp_config(30, 5, Quadrature::Stencil { points: 6 });
        let cells = rt_scan(&config, &[0.1], &[0.005, 0.5]).unwrap();
        let csv = scan_to_csv(&cells, config.b);
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(
            lines[0],
            "beta,b_over_lambda,reR,imR,reT,imT,absR2,weighted_absT2,energy_defect,status"
        );
        assert_eq!(lines.len(), 3);
        assert!(lines[1].ends_with(",skipped"));
        assert!(lines[1].contains(",nan,"));
        assert!(lines[2].ends_with(",ok"));
    }

    #[test]
    fn evanescent_point_is_an_error() {
        let config = exponential_ramp_config(20, 4, Quadrature::Trapezoid);
        let solver = OpticsSolver::direct(&config).unwrap();
        let err = solver.rt_at(1.0, 0.5).unwrap_err();
        assert_eq!(err.kind(), "EvanescentRegime");
    }
}

