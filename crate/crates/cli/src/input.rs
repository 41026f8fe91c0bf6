//! Problem- and scan-file loading plus parsers for the flag mini-syntaxes.
//!
//! A problem file is a TOML document describing one pencil: interval, mesh,
//! series order, coefficient expressions (or CSV sample files), boundary
//! pair, and optionally a seed and a quadrature choice. Coefficients use the
//! expression grammar of `spps_core::exprparse`; a value of the form
//! `csv:relative/path` loads samples from a CSV file instead (header
//! `x,re[,im]`, one row per mesh node).

use num_complex::Complex64;
use serde::Deserialize;
use spps_core::error::Error as CoreError;
use spps_core::exprparse;
use spps_core::grid::{Grid, Quadrature, SampledFunction};
use spps_core::problem::{BoundaryConditions, Coefficients};
use spps_core::seed::{seed_from_samples, SeedSolution};
use spps_core::series::SeedInput;
use spps_core::spectral::{AxisPart, AxisSpec};
use std::path::{Path, PathBuf};

/// Input-side failure: maps to exit code 2.
#[derive(Debug)]
pub struct InputError {
    pub kind: &'static str,
    pub message: String,
}

impl InputError {
    pub fn new(kind: &'static str, message: impl Into<String>) -> InputError {
        InputError {
            kind,
            message: message.into(),
        }
    }
}

pub type InputResult<T> = Result<T, InputError>;

fn core_input(err: CoreError) -> InputError {
    InputError {
        kind: err.kind(),
        message: err.to_string(),
    }
}

// ---------------------------------------------------------------------------
// TOML schemas
// ---------------------------------------------------------------------------

/// A TOML number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum NumberOrPair {
    Real(f64),
    Pair([f64; 2]),
}

impl NumberOrPair {
    pub fn to_complex(self) -> Complex64 {
        match self {
            NumberOrPair::Real(re) => Complex64::new(re, 0.0),
            NumberOrPair::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDoc {
    pub d: usize,
    /// Mesh cells.
    pub m: usize,
    /// Series order in the spectral parameters.
    pub n: usize,
    /// "full" keeps coefficients on the whole mesh; "endpoint" keeps only
    /// the right-edge values. Default "endpoint".
    pub mode: Option<String>,
    pub interval: IntervalDoc,
    pub coefficients: CoefficientsDoc,
    pub boundary: Option<BoundaryDoc>,
    pub seed: Option<SeedDoc>,
    pub quadrature: Option<QuadratureDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalDoc {
    pub x1: f64,
    pub x2: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsDoc {
    pub p: String,
    pub q: String,
    pub r: Vec<String>,
    pub s: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryDoc {
    pub alpha: NumberOrPair,
    pub alpha_p: NumberOrPair,
    pub beta: NumberOrPair,
    pub beta_p: NumberOrPair,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedDoc {
    /// "auto" (default) or "expressions".
    pub kind: Option<String>,
    pub order: Option<usize>,
    pub gamma: Option<f64>,
    pub tol: Option<f64>,
    pub u0: Option<String>,
    pub u0_prime: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureDoc {
    /// "trapezoid" (default) or "stencil".
    pub kind: String,
    pub points: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpticsDoc {
    pub n1: f64,
    pub n2: f64,
    pub b: f64,
    /// Mesh cells across the layer.
    pub m: usize,
    /// Series order in the spectral parameters.
    pub n: usize,
    /// Refractive-index profile: expression in `x` or `csv:path`.
    pub profile: String,
    pub quadrature: Option<QuadratureDoc>,
    pub scan: Option<ScanDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanDoc {
    pub beta_b: Vec<f64>,
    pub b_over_lambda: Vec<f64>,
}

// ---------------------------------------------------------------------------
// Loaded problems
// ---------------------------------------------------------------------------

/// The memory layout the basis build should use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuildMode {
    Full,
    Endpoint,
}

/// A fully materialized problem: everything a command needs.
pub struct LoadedProblem {
    pub grid: Grid,
    pub coefficients: Coefficients,
    pub boundary: Option<BoundaryConditions>,
    pub order: usize,
    pub mode: BuildMode,
    pub quadrature: Quadrature,
    pub seed: SeedInput,
    /// Coefficient sources kept for the verification oracle; `None` for any
    /// coefficient supplied as CSV samples.
    pub expressions: Option<ProblemExpressions>,
}

/// Parsed coefficient expressions (available when no CSV sources are used).
pub struct ProblemExpressions {
    pub p: exprparse::Expr,
    pub q: exprparse::Expr,
    pub r: Vec<exprparse::Expr>,
    pub s: Option<Vec<exprparse::Expr>>,
}

fn read_file(path: &Path) -> InputResult<String> {
    std::fs::read_to_string(path).map_err(|e| {
        InputError::new(
            "FileNotReadable",
            format!("cannot read {}: {e}", path.display()),
        )
    })
}

/// One coefficient: an expression or a CSV sample file.
enum Source {
    Expr(exprparse::Expr),
    Csv(PathBuf),
}

fn parse_source(text: &str, base_dir: &Path, key: &str) -> InputResult<Source> {
    if let Some(rel) = text.strip_prefix("csv:") {
        if rel.is_empty() {
            return Err(InputError::new(
                "InvalidProblem",
                format!("coefficient {key}: empty csv path"),
            ));
        }
        Ok(Source::Csv(base_dir.join(rel)))
    } else {
        exprparse::parse(text)
            .map(Source::Expr)
            .map_err(|e| InputError {
                kind: e.kind(),
                message: format!("coefficient {key}: {e}"),
            })
    }
}

fn sample_source(src: &Source, grid: Grid, key: &str) -> InputResult<SampledFunction> {
    match src {
        Source::Expr(e) => e.sample(grid).map_err(|e| InputError {
            kind: e.kind(),
            message: format!("coefficient {key}: {e}"),
        }),
        Source::Csv(path) => {
            let text = read_file(path)?;
            SampledFunction::from_csv_str(&text, grid).map_err(|e| InputError {
                kind: e.kind(),
                message: format!("coefficient {key} ({}): {e}", path.display()),
            })
        }
    }
}

fn parse_quadrature(doc: &Option<QuadratureDoc>) -> InputResult<Quadrature> {
    match doc {
        None => Ok(Quadrature::Trapezoid),
        Some(q) => match q.kind.as_str() {
            "trapezoid" => Ok(Quadrature::Trapezoid),
            "stencil" => {
                let points = q.points.ok_or_else(|| {
                    InputError::new("InvalidProblem", "quadrature.kind = \"stencil\" needs points")
                })?;
                let quad = Quadrature::Stencil { points };
                quad.validate().map_err(core_input)?;
                Ok(quad)
            }
            other => Err(InputError::new(
                "InvalidProblem",
                format!("unknown quadrature kind {other:?} (expected \"trapezoid\" or \"stencil\")"),
            )),
        },
    }
}

/// Load and materialize a problem file.
pub fn load_problem(path: &Path) -> InputResult<LoadedProblem> {
    let text = read_file(path)?;
    let doc: ProblemDoc = toml::from_str(&text).map_err(|e| {
        InputError::new("InvalidProblem", format!("{}: {e}", path.display()))
    })?;
    let base_dir = path.parent().unwrap_or_else(|| Path::new("."));

    if doc.d == 0 {
        return Err(InputError::new("InvalidProblem", "d must be at least 1"));
    }
    if doc.coefficients.r.len() != doc.d {
        return Err(InputError::new(
            "InvalidProblem",
            format!(
                "coefficients.r has {} entries but d = {}",
                doc.coefficients.r.len(),
                doc.d
            ),
        ));
    }
    if let Some(s) = &doc.coefficients.s {
        if s.len() != doc.d {
            return Err(InputError::new(
                "InvalidProblem",
                format!("coefficients.s has {} entries but d = {}", s.len(), doc.d),
            ));
        }
    }

    let grid = Grid::new(doc.interval.x1, doc.interval.x2, doc.m).map_err(core_input)?;

    let p_src = parse_source(&doc.coefficients.p, base_dir, "p")?;
    let q_src = parse_source(&doc.coefficients.q, base_dir, "q")?;
    let mut r_src = Vec::with_capacity(doc.d);
    for (i, text) in doc.coefficients.r.iter().enumerate() {
        r_src.push(parse_source(text, base_dir, &format!("r[{}]", i + 1))?);
    }
    let s_src = match &doc.coefficients.s {
        None => None,
        Some(list) => {
            let mut out = Vec::with_capacity(doc.d);
            for (i, text) in list.iter().enumerate() {
                out.push(parse_source(text, base_dir, &format!("s[{}]", i + 1))?);
            }
            Some(out)
        }
    };

    let p = sample_source(&p_src, grid, "p")?;
    let q = sample_source(&q_src, grid, "q")?;
    let mut r = Vec::with_capacity(doc.d);
    for (i, src) in r_src.iter().enumerate() {
        r.push(sample_source(src, grid, &format!("r[{}]", i + 1))?);
    }
    let s = match &s_src {
        None => None,
        Some(list) => {
            let mut out = Vec::with_capacity(doc.d);
            for (i, src) in list.iter().enumerate() {
                out.push(sample_source(src, grid, &format!("s[{}]", i + 1))?);
            }
            Some(out)
        }
    };
    let coefficients = Coefficients::new(p, q, r, s).map_err(core_input)?;

    // Keep the closed forms when every coefficient is an expression, so the
    // verification oracle can evaluate them off-mesh.
    let all_exprs = {
        let as_expr = |s: &Source| match s {
            Source::Expr(e) => Some(e.clone()),
            Source::Csv(_) => None,
        };
        let p = as_expr(&p_src);
        let q = as_expr(&q_src);
        let r: Option<Vec<_>> = r_src.iter().map(as_expr).collect();
        let s: Option<Option<Vec<_>>> = match &s_src {
            None => Some(None),
            Some(list) => {
                let inner: Option<Vec<_>> = list.iter().map(as_expr).collect();
                inner.map(Some)
            }
        };
        match (p, q, r, s) {
            (Some(p), Some(q), Some(r), Some(s)) => Some(ProblemExpressions { p, q, r, s }),
            _ => None,
        }
    };

    let boundary = match &doc.boundary {
        None => None,
        Some(b) => Some(
            BoundaryConditions::new(
                b.alpha.to_complex(),
                b.alpha_p.to_complex(),
                b.beta.to_complex(),
                b.beta_p.to_complex(),
            )
            .map_err(core_input)?,
        ),
    };

    let mode = match doc.mode.as_deref() {
        None | Some("endpoint") => BuildMode::Endpoint,
        Some("full") => BuildMode::Full,
        Some(other) => {
            return Err(InputError::new(
                "InvalidProblem",
                format!("unknown mode {other:?} (expected \"full\" or \"endpoint\")"),
            ))
        }
    };

    let quadrature = parse_quadrature(&doc.quadrature)?;

    let seed = match &doc.seed {
        None => SeedInput::default(),
        Some(sd) => match sd.kind.as_deref().unwrap_or("auto") {
            "auto" => {
                if sd.u0.is_some() || sd.u0_prime.is_some() {
                    return Err(InputError::new(
                        "InvalidProblem",
                        "seed.kind = \"auto\" does not take u0 / u0_prime",
                    ));
                }
                SeedInput::Auto {
                    order: sd.order,
                    gamma: sd.gamma.unwrap_or(1.0),
                    tol: sd.tol.unwrap_or(1e-6),
                }
            }
            "expressions" => {
                let u0_text = sd.u0.as_deref().ok_or_else(|| {
                    InputError::new("InvalidProblem", "seed.kind = \"expressions\" needs u0")
                })?;
                let u0p_text = sd.u0_prime.as_deref().ok_or_else(|| {
                    InputError::new("InvalidProblem", "seed.kind = \"expressions\" needs u0_prime")
                })?;
                let sample = |text: &str, key: &str| -> InputResult<SampledFunction> {
                    let expr = exprparse::parse(text).map_err(|e| InputError {
                        kind: e.kind(),
                        message: format!("seed.{key}: {e}"),
                    })?;
                    expr.sample(grid).map_err(|e| InputError {
                        kind: e.kind(),
                        message: format!("seed.{key}: {e}"),
                    })
                };
                let u0 = sample(u0_text, "u0")?;
                let u0_prime = sample(u0p_text, "u0_prime")?;
                let seed: SeedSolution =
                    seed_from_samples(u0, u0_prime).map_err(core_input)?;
                SeedInput::Samples(seed)
            }
            other => {
                return Err(InputError::new(
                    "InvalidProblem",
                    format!("unknown seed kind {other:?} (expected \"auto\" or \"expressions\")"),
                ))
            }
        },
    };

    Ok(LoadedProblem {
        grid,
        coefficients,
        boundary,
        order: doc.n,
        mode,
        quadrature,
        seed,
        expressions: all_exprs,
    })
}

/// A loaded optics configuration plus scan lists.
pub struct LoadedOptics {
    pub config: spps_core::optics::OpticsConfig,
    pub scan: Option<(Vec<f64>, Vec<f64>)>,
}

/// Load an optics layer/scan file.
pub fn load_optics(path: &Path) -> InputResult<LoadedOptics> {
    let text = read_file(path)?;
    let doc: OpticsDoc = toml::from_str(&text).map_err(|e| {
        InputError::new("InvalidProblem", format!("{}: {e}", path.display()))
    })?;
    let base_dir = path.parent().unwrap_or_else(|| Path::new("."));
    let grid = Grid::new(0.0, doc.b, doc.m).map_err(core_input)?;
    let profile_src = parse_source(&doc.profile, base_dir, "profile")?;
    let profile = sample_source(&profile_src, grid, "profile")?;
    let quadrature = parse_quadrature(&doc.quadrature)?;
    let config = spps_core::optics::OpticsConfig {
        n1: doc.n1,
        n2: doc.n2,
        b: doc.b,
        profile,
        order: doc.n,
        quadrature,
    };
    config.validate().map_err(core_input)?;
    let scan = doc.scan.map(|s| (s.beta_b, s.b_over_lambda));
    Ok(LoadedOptics { config, scan })
}

// ---------------------------------------------------------------------------
// Flag mini-syntax parsers
// ---------------------------------------------------------------------------

/// Parse a complex scalar: `1.5`, `-2e-3`, `1+2i`, `1.5-0.5i`, `2i`, `i`.
pub fn parse_complex(text: &str) -> InputResult<Complex64> {
    let s = text.trim();
    if s.is_empty() {
        return Err(InputError::new("InvalidArgument", "empty number"));
    }
    let bad = || {
        InputError::new(
            "InvalidArgument",
            format!("cannot parse {s:?} as a number (forms: 1.5, 1+2i, -3i)"),
        )
    };
    if let Some(body) = s.strip_suffix('i') {
        // Split the imaginary suffix term from an optional leading real term
        // at the last +/- that is not part of an exponent.
        let body = body.trim_end();
        let mut split = None;
        for (idx, ch) in body.char_indices().skip(1) {
            if (ch == '+' || ch == '-') && !matches!(&body[..idx].chars().last(), Some('e' | 'E')) {
                split = Some(idx);
            }
        }
        let (re_text, im_text) = match split {
            Some(idx) => (&body[..idx], &body[idx..]),
            None => ("0", body),
        };
        let re: f64 = re_text.trim().parse().map_err(|_| bad())?;
        let im_text = im_text.trim();
        let im: f64 = match im_text {
            "" | "+" => 1.0,
            "-" => -1.0,
            t => t.parse().map_err(|_| bad())?,
        };
        Ok(Complex64::new(re, im))
    } else {
        let re: f64 = s.parse().map_err(|_| bad())?;
        Ok(Complex64::new(re, 0.0))
    }
}

/// Parse a spectral point: comma-separated complex components.
pub fn parse_lambda(text: &str, d: usize) -> InputResult<Vec<Complex64>> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != d {
        return Err(InputError::new(
            "InvalidArgument",
            format!("--lambda {text:?} has {} components but d = {d}", parts.len()),
        ));
    }
    parts.iter().map(|p| parse_complex(p)).collect()
}

/// Parse a `--fix i=value` assignment; the index is 1-based on the command
/// line and 0-based in the result.
pub fn parse_fix(text: &str, d: usize) -> InputResult<(usize, Complex64)> {
    let (idx_text, val_text) = text.split_once('=').ok_or_else(|| {
        InputError::new(
            "InvalidArgument",
            format!("--fix {text:?} is not of the form i=value"),
        )
    })?;
    let idx: usize = idx_text.trim().parse().map_err(|_| {
        InputError::new(
            "InvalidArgument",
            format!("--fix {text:?}: {idx_text:?} is not a parameter index"),
        )
    })?;
    if idx == 0 || idx > d {
        return Err(InputError::new(
            "InvalidArgument",
            format!("--fix {text:?}: index {idx} outside 1..={d}"),
        ));
    }
    Ok((idx - 1, parse_complex(val_text)?))
}

/// Parse `--grid n1xn2`.
pub fn parse_grid_dims(text: &str) -> InputResult<(usize, usize)> {
    let (a, b) = text.split_once(['x', 'X']).ok_or_else(|| {
        InputError::new(
            "InvalidArgument",
            format!("--grid {text:?} is not of the form n1xn2"),
        )
    })?;
    let parse = |t: &str| -> InputResult<usize> {
        t.trim().parse().map_err(|_| {
            InputError::new(
                "InvalidArgument",
                format!("--grid {text:?}: {t:?} is not a count"),
            )
        })
    };
    Ok((parse(a)?, parse(b)?))
}

/// Parse `--axis1/--axis2 re|im:lo:hi`.
pub fn parse_axis(text: &str) -> InputResult<AxisSpec> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(InputError::new(
            "InvalidArgument",
            format!("axis {text:?} is not of the form re|im:lo:hi"),
        ));
    }
    let part = match parts[0] {
        "re" => AxisPart::Re,
        "im" => AxisPart::Im,
        other => {
            return Err(InputError::new(
                "InvalidArgument",
                format!("axis part {other:?} (expected re or im)"),
            ))
        }
    };
    let num = |t: &str| -> InputResult<f64> {
        t.parse().map_err(|_| {
            InputError::new(
                "InvalidArgument",
                format!("axis {text:?}: {t:?} is not a number"),
            )
        })
    };
    Ok(AxisSpec {
        part,
        lo: num(parts[1])?,
        hi: num(parts[2])?,
    })
}

/// Parse `--range lo:hi`.
pub fn parse_range(text: &str) -> InputResult<(f64, f64)> {
    let (a, b) = text.split_once(':').ok_or_else(|| {
        InputError::new(
            "InvalidArgument",
            format!("--range {text:?} is not of the form lo:hi"),
        )
    })?;
    let num = |t: &str| -> InputResult<f64> {
        t.trim().parse().map_err(|_| {
            InputError::new(
                "InvalidArgument",
                format!("--range {text:?}: {t:?} is not a number"),
            )
        })
    };
    let (lo, hi) = (num(a)?, num(b)?);
    if !(lo < hi) {
        return Err(InputError::new(
            "InvalidArgument",
            format!("--range {text:?}: need lo < hi"),
        ));
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_scalar_forms() {
        assert_eq!(parse_complex("1.5").unwrap(), Complex64::new(1.5, 0.0));
        assert_eq!(parse_complex("-2e-3").unwrap(), Complex64::new(-2e-3, 0.0));
        assert_eq!(parse_complex("1+2i").unwrap(), Complex64::new(1.0, 2.0));
        assert_eq!(parse_complex("1.5-0.5i").unwrap(), Complex64::new(1.5, -0.5));
        assert_eq!(parse_complex("2i").unwrap(), Complex64::new(0.0, 2.0));
        assert_eq!(parse_complex("-i").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(parse_complex("1e-3+2e-4i").unwrap(), Complex64::new(1e-3, 2e-4));
        assert!(parse_complex("abc").is_err());
        assert!(parse_complex("").is_err());
    }

    #[test]
    fn lambda_component_count_is_enforced() {
        assert_eq!(
            parse_lambda("0.5,0.5", 2).unwrap(),
            vec![Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0)]
        );
        assert!(parse_lambda("0.5", 2).is_err());
    }

    #[test]
    fn fix_assignments_are_one_based() {
        let (idx, v) = parse_fix("2=1.0", 2).unwrap();
        assert_eq!(idx, 1);
        assert_eq!(v, Complex64::new(1.0, 0.0));
        assert!(parse_fix("0=1.0", 2).is_err());
        assert!(parse_fix("3=1.0", 2).is_err());
        assert!(parse_fix("x", 2).is_err());
    }

    #[test]
    fn grid_axis_range_forms() {
        assert_eq!(parse_grid_dims("60x40").unwrap(), (60, 40));
        assert!(parse_grid_dims("60").is_err());
        let ax = parse_axis("re:0:100").unwrap();
        assert!(matches!(ax.part, AxisPart::Re));
        assert_eq!((ax.lo, ax.hi), (0.0, 100.0));
        assert!(parse_axis("xy:0:1").is_err());
        assert_eq!(parse_range("-10:5").unwrap(), (-10.0, 5.0));
        assert!(parse_range("5:5").is_err());
    }
}
