//! Runtime description of a multiparameter Sturm–Liouville problem.
//!
//! The equation is `(p y')' + q y = Σᵢ λᵢ (rᵢ y + sᵢ y')` on a fixed mesh;
//! the `sᵢ` weights are optional (the *generalized* form). All coefficients
//! are held as mesh samples so they may come from expressions or from CSV
//! tables interchangeably.

use crate::error::{Error, Result};
use crate::grid::{Grid, SampledFunction};
use num_complex::Complex64;

/// Sampled coefficients of the pencil.
#[derive(Debug, Clone)]
pub struct Coefficients {
    pub p: SampledFunction,
    pub q: SampledFunction,
    pub r: Vec<SampledFunction>,
    /// First-order spectral weights; `None` for the plain pencil.
    pub s: Option<Vec<SampledFunction>>,
}

impl Coefficients {
    pub fn new(
        p: SampledFunction,
        q: SampledFunction,
        r: Vec<SampledFunction>,
        s: Option<Vec<SampledFunction>>,
    ) -> Result<Coefficients> {
        if r.is_empty() {
            return Err(Error::InvalidProblem(
                "at least one spectral weight r is required".into(),
            ));
        }
        let grid = p.grid;
        for (name, f) in std::iter::once(("q", &q)).chain(r.iter().map(|f| ("r", f))) {
            if !f.grid.compatible(&grid) {
                return Err(Error::GridMismatch(format!(
                    "coefficient {name} sampled on a different mesh than p"
                )));
            }
        }
        if let Some(s) = &s {
            if s.len() != r.len() {
                return Err(Error::InvalidProblem(format!(
                    "{} s-weights for {} r-weights",
                    s.len(),
                    r.len()
                )));
            }
            for f in s {
                if !f.grid.compatible(&grid) {
                    return Err(Error::GridMismatch(
                        "coefficient s sampled on a different mesh than p".into(),
                    ));
                }
            }
        }
        for (i, v) in p.values.iter().enumerate() {
            if v.norm() == 0.0 {
                return Err(Error::ZeroOnMesh {
                    what: "p".into(),
                    x: grid.x(i),
                });
            }
        }
        Ok(Coefficients { p, q, r, s })
    }

    /// Number of spectral parameters.
    pub fn d(&self) -> usize {
        self.r.len()
    }

    pub fn grid(&self) -> Grid {
        self.p.grid
    }

    /// Whether first-order spectral weights are present.
    pub fn is_generalized(&self) -> bool {
        self.s.is_some()
    }

    /// True when every coefficient is exactly real on the mesh.
    pub fn is_real(&self) -> bool {
        self.p.is_real()
            && self.q.is_real()
            && self.r.iter().all(SampledFunction::is_real)
            && self
                .s
                .as_ref()
                .map(|s| s.iter().all(SampledFunction::is_real))
                .unwrap_or(true)
    }

    /// Shift the spectral origin: returns coefficients of the same pencil
    /// written in the parameters `λ − λ0`, i.e. with
    /// `q ← q − Σᵢ λ0ᵢ rᵢ`. Only defined for the plain pencil.
    pub fn recenter(&self, lambda0: &[Complex64]) -> Result<Coefficients> {
        if self.s.is_some() {
            return Err(Error::InvalidProblem(
                "spectral recentering is only defined without first-order weights".into(),
            ));
        }
        if lambda0.len() != self.d() {
            return Err(Error::InvalidProblem(format!(
                "recentering offset has {} components for {} parameters",
                lambda0.len(),
                self.d()
            )));
        }
        let mut q = self.q.clone();
        for (l0, ri) in lambda0.iter().zip(&self.r) {
            for (qv, rv) in q.values.iter_mut().zip(&ri.values) {
                *qv -= l0 * rv;
            }
        }
        Ok(Coefficients {
            p: self.p.clone(),
            q,
            r: self.r.clone(),
            s: None,
        })
    }
}

/// Homogeneous two-point boundary conditions
/// `α y(x1) + α' y'(x1) = 0`, `β y(x2) + β' y'(x2) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryConditions {
    pub alpha: Complex64,
    pub alpha_p: Complex64,
    pub beta: Complex64,
    pub beta_p: Complex64,
}

impl BoundaryConditions {
    pub fn new(
        alpha: Complex64,
        alpha_p: Complex64,
        beta: Complex64,
        beta_p: Complex64,
    ) -> Result<BoundaryConditions> {
        if alpha.norm() == 0.0 && alpha_p.norm() == 0.0 {
            return Err(Error::InvalidProblem(
                "left boundary condition is identically zero".into(),
            ));
        }
        if beta.norm() == 0.0 && beta_p.norm() == 0.0 {
            return Err(Error::InvalidProblem(
                "right boundary condition is identically zero".into(),
            ));
        }
        Ok(BoundaryConditions {
            alpha,
            alpha_p,
            beta,
            beta_p,
        })
    }

    /// `y(x1) = y(x2) = 0`.
    pub fn dirichlet() -> BoundaryConditions {
        BoundaryConditions {
            alpha: Complex64::new(1.0, 0.0),
            alpha_p: Complex64::new(0.0, 0.0),
            beta: Complex64::new(1.0, 0.0),
            beta_p: Complex64::new(0.0, 0.0),
        }
    }

    pub fn is_real(&self) -> bool {
        self.alpha.im == 0.0 && self.alpha_p.im == 0.0 && self.beta.im == 0.0 && self.beta_p.im == 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_grid(m: usize) -> Grid {
        Grid::new(0.0, 1.0, m).unwrap()
    }

    fn ones(g: Grid) -> SampledFunction {
        SampledFunction::constant(g, Complex64::new(1.0, 0.0))
    }

    #[test]
    fn validates_p_nonzero() {
        let g = unit_grid(4);
        let mut p = ones(g);
        p.values[2] = Complex64::new(0.0, 0.0);
        let err = Coefficients::new(p, ones(g), vec![ones(g)], None).unwrap_err();
        assert_eq!(err.kind(), "ZeroOnMesh");
    }

    #[test]
    fn validates_meshes_agree() {
        let g = unit_grid(4);
        let other = unit_grid(5);
        let err = Coefficients::new(ones(g), ones(other), vec![ones(g)], None).unwrap_err();
        assert_eq!(err.kind(), "GridMismatch");
    }

    #[test]
    fn validates_weight_counts() {
        let g = unit_grid(4);
        let err =
            Coefficients::new(ones(g), ones(g), vec![ones(g), ones(g)], Some(vec![ones(g)]))
                .unwrap_err();
        assert_eq!(err.kind(), "InvalidProblem");
        let err = Coefficients::new(ones(g), ones(g), vec![], None).unwrap_err();
        assert_eq!(err.kind(), "InvalidProblem");
    }

    #[test]
    fn recenter_shifts_q() {
        let g = unit_grid(4);
        let r1 = SampledFunction::from_real_fn(g, |x| x);
        let c = Coefficients::new(ones(g), ones(g), vec![r1], None).unwrap();
        let shifted = c.recenter(&[Complex64::new(2.0, 0.0)]).unwrap();
        for (i, &x) in g.points().iter().enumerate() {
            let expect = 1.0 - 2.0 * x;
            assert!((shifted.q.values[i].re - expect).abs() < 1e-15);
        }
        // The plain weights are untouched.
        assert_eq!(shifted.r[0], c.r[0]);
    }

    #[test]
    fn recenter_rejects_generalized() {
        let g = unit_grid(4);
        let c = Coefficients::new(
            ones(g),
            ones(g),
            vec![ones(g)],
            Some(vec![ones(g)]),
        )
        .unwrap();
        assert!(c.recenter(&[Complex64::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn realness_detection() {
        let g = unit_grid(4);
        let c = Coefficients::new(ones(g), ones(g), vec![ones(g)], None).unwrap();
        assert!(c.is_real());
        let mut q = ones(g);
        q.values[1].im = 1e-30;
        let c = Coefficients::new(ones(g), q, vec![ones(g)], None).unwrap();
        assert!(!c.is_real());
    }

    #[test]
    fn boundary_conditions() {
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        assert!(BoundaryConditions::new(zero, zero, one, zero).is_err());
        assert!(BoundaryConditions::new(one, zero, zero, zero).is_err());
        let bc = BoundaryConditions::dirichlet();
        assert!(bc.is_real());
        assert_eq!(bc.alpha, one);
        assert_eq!(bc.beta_p, zero);
    }
}
