//! Implementations of the subcommands.
//!
//! Every command reads its inputs, runs the pipeline, writes one or more
//! artifacts under the output directory and prints `wrote <path>` per
//! artifact. Failures are split into input errors (exit 2) and numerical
//! or runtime errors (exit 3).

use crate::emit::{csv_complex, csv_line, Json};
use crate::input::{self, BuildMode, InputError, LoadedProblem};
use num_complex::Complex64;
use spps_core::error::Error as CoreError;
use spps_core::fmt::g17;
use spps_core::oracle::{rk4_solve, CoefficientFn, FnProblem};
use spps_core::powers::{build_tables, TableMode, TableRequest};
use spps_core::series::{
    build_basis_endpoint, build_basis_full, materialize_seed, BuildOptions, EndpointBasis,
    QuartetValues,
};
use spps_core::spectral::{
    characteristic_polynomial, eigencurve_raster, AxisPart, CharPolynomial,
    RasterOptions,
};
use std::path::{Path, PathBuf};

/// A command failure together with the exit class it belongs to.
pub enum Failure {
    /// Bad input: malformed file, flag, or problem description (exit 2).
    Input(InputError),
    /// The computation itself failed (exit 3).
    Runtime { kind: String, message: String },
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Failure {
        Failure::Input(e)
    }
}

fn runtime(err: CoreError) -> Failure {
    Failure::Runtime {
        kind: err.kind().to_string(),
        message: err.to_string(),
    }
}

type CmdResult = Result<(), Failure>;

fn input_err(kind: &'static str, message: impl Into<String>) -> Failure {
    Failure::Input(InputError::new(kind, message))
}

fn write_artifact(out_dir: &Path, name: &str, contents: &str) -> CmdResult {
    std::fs::create_dir_all(out_dir).map_err(|e| {
        input_err(
            "OutputNotWritable",
            format!("cannot create {}: {e}", out_dir.display()),
        )
    })?;
    let path = out_dir.join(name);
    std::fs::write(&path, contents).map_err(|e| {
        input_err(
            "OutputNotWritable",
            format!("cannot write {}: {e}", path.display()),
        )
    })?;
    println!("wrote {}", path.display());
    Ok(())
}

fn build_options(p: &LoadedProblem) -> BuildOptions {
    BuildOptions {
        order: p.order,
        quadrature: p.quadrature,
        seed: p.seed.clone(),
        lambda0: None,
    }
}

fn effective_mode(p: &LoadedProblem, flag: Option<&str>) -> Result<BuildMode, Failure> {
    match flag {
        None => Ok(p.mode),
        Some("full") => Ok(BuildMode::Full),
        Some("endpoint") => Ok(BuildMode::Endpoint),
        Some(other) => Err(input_err(
            "InvalidArgument",
            format!("--mode {other:?} (expected full or endpoint)"),
        )),
    }
}

fn require_boundary(p: &LoadedProblem) -> Result<spps_core::problem::BoundaryConditions, Failure> {
    p.boundary.ok_or_else(|| {
        input_err(
            "InvalidProblem",
            "this command needs a [boundary] section in the problem file",
        )
    })
}

/// Build the endpoint basis, honoring the requested memory mode. Both paths
/// produce bit-identical values; FULL mode just carries the whole mesh
/// before collapsing.
fn endpoint_basis(p: &LoadedProblem, mode: BuildMode) -> Result<EndpointBasis, Failure> {
    let opts = build_options(p);
    match mode {
        BuildMode::Endpoint => build_basis_endpoint(&p.coefficients, &opts).map_err(runtime),
        BuildMode::Full => Ok(build_basis_full(&p.coefficients, &opts)
            .map_err(runtime)?
            .at_x2()),
    }
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

const QUARTET_HEADER: &str =
    "re(v1),im(v1),re(v2),im(v2),re(v1p),im(v1p),re(v2p),im(v2p)";

fn quartet_fields(q: &QuartetValues<Complex64>) -> Vec<String> {
    [q.v1, q.v2, q.v1p, q.v2p]
        .iter()
        .flat_map(|z| csv_complex(*z))
        .collect()
}

pub fn solve(
    problem: &Path,
    lambdas: &[String],
    mode: Option<&str>,
    out_dir: &Path,
) -> CmdResult {
    let p = input::load_problem(problem)?;
    if lambdas.is_empty() {
        return Err(input_err("InvalidArgument", "solve needs at least one --lambda"));
    }
    let points: Vec<Vec<Complex64>> = lambdas
        .iter()
        .map(|text| input::parse_lambda(text, p.coefficients.d()))
        .collect::<Result<_, _>>()?;
    match effective_mode(&p, mode)? {
        BuildMode::Full => {
            let basis = build_basis_full(&p.coefficients, &build_options(&p)).map_err(runtime)?;
            for (k, lam) in points.iter().enumerate() {
                let q = basis.eval_sampled(lam).map_err(runtime)?;
                let mut text = format!("x,{QUARTET_HEADER}\n");
                for (t, &x) in p.grid.points().iter().enumerate() {
                    let point = QuartetValues {
                        v1: q.v1.values[t],
                        v2: q.v2.values[t],
                        v1p: q.v1p.values[t],
                        v2p: q.v2p.values[t],
                    };
                    let mut fields = vec![g17(x)];
                    fields.extend(quartet_fields(&point));
                    text.push_str(&csv_line(&fields));
                    text.push('\n');
                }
                write_artifact(out_dir, &format!("solve_{}.csv", k + 1), &text)?;
            }
        }
        BuildMode::Endpoint => {
            let basis = endpoint_basis(&p, BuildMode::Endpoint)?;
            let d = p.coefficients.d();
            let lam_header: Vec<String> = (1..=d)
                .flat_map(|i| [format!("re(lambda{i})"), format!("im(lambda{i})")])
                .collect();
            let mut text = format!("{},{QUARTET_HEADER}\n", lam_header.join(","));
            for lam in &points {
                let q = basis.eval_at(lam).map_err(runtime)?;
                let mut fields: Vec<String> =
                    lam.iter().flat_map(|z| csv_complex(*z)).collect();
                fields.extend(quartet_fields(&q));
                text.push_str(&csv_line(&fields));
                text.push('\n');
            }
            write_artifact(out_dir, "solve.csv", &text)?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// char
// ---------------------------------------------------------------------------

fn char_poly(p: &LoadedProblem, mode: BuildMode) -> Result<CharPolynomial, Failure> {
    let bc = require_boundary(p)?;
    let basis = endpoint_basis(p, mode)?;
    characteristic_polynomial(&basis, &bc).map_err(runtime)
}

fn char_json(poly: &CharPolynomial) -> String {
    let mut j = Json::new();
    j.raw("{\n  \"d\": ");
    j.usize(poly.d);
    j.raw(",\n  \"order\": ");
    j.usize(poly.order);
    j.raw(",\n  \"lambda0\": [");
    for (i, z) in poly.lambda0.iter().enumerate() {
        if i > 0 {
            j.raw(", ");
        }
        j.complex_pair(*z);
    }
    j.raw("],\n  \"terms\": [\n");
    for (i, (e, c)) in poly.terms.iter().enumerate() {
        j.raw("    {\"exponent\": [");
        for (k, &ei) in e.entries().iter().enumerate() {
            if k > 0 {
                j.raw(", ");
            }
            j.usize(ei as usize);
        }
        j.raw("], \"value\": ");
        j.complex_pair(*c);
        j.raw("}");
        if i + 1 < poly.terms.len() {
            j.raw(",");
        }
        j.raw("\n");
    }
    j.raw("  ]\n}");
    j.finish()
}

pub fn char_cmd(problem: &Path, mode: Option<&str>, out_dir: &Path) -> CmdResult {
    let p = input::load_problem(problem)?;
    let mode = effective_mode(&p, mode)?;
    let poly = char_poly(&p, mode)?;
    write_artifact(out_dir, "char.json", &char_json(&poly))
}

// ---------------------------------------------------------------------------
// section
// ---------------------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
pub fn section(
    problem: &Path,
    fixes: &[String],
    range: Option<&str>,
    count: usize,
    trust_radius: Option<f64>,
    out_dir: &Path,
) -> CmdResult {
    let p = input::load_problem(problem)?;
    let d = p.coefficients.d();
    let fixed: Vec<(usize, Complex64)> = fixes
        .iter()
        .map(|text| input::parse_fix(text, d))
        .collect::<Result<_, _>>()?;
    if fixed.len() != d - 1 {
        return Err(input_err(
            "InvalidArgument",
            format!(
                "section needs exactly {} --fix assignments for d = {d}",
                d - 1
            ),
        ));
    }
    let axis = (0..d)
        .find(|i| !fixed.iter().any(|(k, _)| k == i))
        .ok_or_else(|| input_err("InvalidArgument", "all parameters are fixed"))?;
    let poly = char_poly(&p, p.mode)?;
    let section = poly.section(axis, &fixed).map_err(runtime)?;

    let trust = match trust_radius {
        Some(r) => {
            if !(r > 0.0) {
                return Err(input_err(
                    "InvalidArgument",
                    "--trust-radius must be positive",
                ));
            }
            r
        }
        None => section.default_trust_radius().map_err(runtime)?,
    };
    let roots = section.roots(Some(trust)).map_err(runtime)?;

    let mut j = Json::new();
    j.raw("{\n  \"axis\": ");
    j.usize(axis + 1);
    j.raw(",\n  \"fixed\": [\n");
    for (i, (k, v)) in fixed.iter().enumerate() {
        j.raw("    {\"parameter\": ");
        j.usize(k + 1);
        j.raw(", \"value\": ");
        j.complex_pair(*v);
        j.raw("}");
        if i + 1 < fixed.len() {
            j.raw(",");
        }
        j.raw("\n");
    }
    j.raw("  ],\n  \"trust_radius\": ");
    j.number(trust);
    j.raw(",\n  \"roots\": [\n");
    for (i, r) in roots.iter().enumerate() {
        j.raw("    {\"value\": ");
        j.complex_pair(r.value);
        j.raw(", \"residual\": ");
        j.number(r.residual);
        j.raw(", \"trusted\": ");
        j.bool(r.trusted);
        j.raw("}");
        if i + 1 < roots.len() {
            j.raw(",");
        }
        j.raw("\n");
    }
    j.raw("  ]\n}");
    write_artifact(out_dir, "roots.json", &j.finish())?;

    // χ along the real axis of the free parameter.
    let (lo, hi) = match range {
        Some(text) => input::parse_range(text)?,
        None => {
            if !trust.is_finite() {
                return Err(input_err(
                    "InvalidArgument",
                    "cannot derive a sweep range (infinite trust radius); give --range lo:hi",
                ));
            }
            let center = section.shift.re;
            (center - trust, center + trust)
        }
    };
    if count < 2 {
        return Err(input_err("InvalidArgument", "--count must be at least 2"));
    }
    let mut text = String::from("t,re(chi),im(chi)\n");
    for k in 0..count {
        let t = lo + (hi - lo) * (k as f64) / ((count - 1) as f64);
        let chi = section.eval_mu(Complex64::new(t, 0.0) - section.shift);
        let mut fields = vec![g17(t)];
        fields.extend(csv_complex(chi));
        text.push_str(&csv_line(&fields));
        text.push('\n');
    }
    write_artifact(out_dir, "section.csv", &text)
}

// ---------------------------------------------------------------------------
// raster
// ---------------------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
pub fn raster(
    problem: &Path,
    params: Option<&str>,
    axis1: &str,
    axis2: &str,
    grid_dims: &str,
    fixes: &[String],
    out_dir: &Path,
) -> CmdResult {
    let p = input::load_problem(problem)?;
    let d = p.coefficients.d();
    let (p1, p2) = match params {
        None => {
            if d != 2 {
                return Err(input_err(
                    "InvalidArgument",
                    format!("d = {d}: name the swept parameters with --params i,j"),
                ));
            }
            (0, 1)
        }
        Some(text) => {
            let (a, b) = text.split_once(',').ok_or_else(|| {
                input_err(
                    "InvalidArgument",
                    format!("--params {text:?} is not of the form i,j"),
                )
            })?;
            let parse = |t: &str| -> Result<usize, Failure> {
                let i: usize = t.trim().parse().map_err(|_| {
                    input_err(
                        "InvalidArgument",
                        format!("--params {text:?}: {t:?} is not an index"),
                    )
                })?;
                if i == 0 || i > d {
                    return Err(input_err(
                        "InvalidArgument",
                        format!("--params {text:?}: index {i} outside 1..={d}"),
                    ));
                }
                Ok(i - 1)
            };
            (parse(a)?, parse(b)?)
        }
    };
    let axis1 = input::parse_axis(axis1)?;
    let axis2 = input::parse_axis(axis2)?;
    let (n1, n2) = input::parse_grid_dims(grid_dims)?;
    let fixed: Vec<(usize, Complex64)> = fixes
        .iter()
        .map(|text| input::parse_fix(text, d))
        .collect::<Result<_, _>>()?;

    let bc = require_boundary(&p)?;
    let poly = char_poly(&p, p.mode)?;

    // The zero contour of Re χ is the eigencurve set only when χ is
    // real-valued on the swept window; otherwise ridges of −log|χ| are
    // traced instead.
    let contour = p.coefficients.is_real()
        && bc.is_real()
        && matches!(axis1.part, AxisPart::Re)
        && matches!(axis2.part, AxisPart::Re)
        && fixed.iter().all(|(_, v)| v.im == 0.0);

    let result = eigencurve_raster(
        &poly,
        (p1, p2),
        &axis1,
        &axis2,
        &fixed,
        &RasterOptions { n1, n2, contour },
    )
    .map_err(runtime)?;

    let mut text = String::from("t1,t2,re(chi),im(chi),log10abs\n");
    for (i1, &t1) in result.t1.iter().enumerate() {
        for (i2, &t2) in result.t2.iter().enumerate() {
            let chi = result.chi[i1 * n2 + i2];
            let mut fields = vec![g17(t1), g17(t2)];
            fields.extend(csv_complex(chi));
            fields.push(g17((chi.norm() + 1e-300).log10()));
            text.push_str(&csv_line(&fields));
            text.push('\n');
        }
    }
    write_artifact(out_dir, "raster.csv", &text)?;

    let mut j = Json::new();
    j.raw("{\n  \"contour_mode\": ");
    j.bool(result.contour_mode);
    j.raw(",\n  \"curves\": [\n");
    for (i, curve) in result.curves.iter().enumerate() {
        j.raw("    [");
        for (k, (t1, t2)) in curve.iter().enumerate() {
            if k > 0 {
                j.raw(", ");
            }
            j.raw("[");
            j.number(*t1);
            j.raw(", ");
            j.number(*t2);
            j.raw("]");
        }
        j.raw("]");
        if i + 1 < result.curves.len() {
            j.raw(",");
        }
        j.raw("\n");
    }
    j.raw("  ]\n}");
    write_artifact(out_dir, "curves.json", &j.finish())
}

// ---------------------------------------------------------------------------
// optics
// ---------------------------------------------------------------------------

pub fn optics(config: &Path, out_dir: &Path) -> CmdResult {
    let loaded = input::load_optics(config)?;
    let (beta_b, b_over_lambda) = loaded.scan.ok_or_else(|| {
        input_err(
            "InvalidProblem",
            "the optics file needs a [scan] section with beta_b and b_over_lambda lists",
        )
    })?;
    let cells =
        spps_core::optics::rt_scan(&loaded.config, &beta_b, &b_over_lambda).map_err(runtime)?;
    let csv = spps_core::optics::scan_to_csv(&cells, loaded.config.b);
    write_artifact(out_dir, "optics_scan.csv", &csv)
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

pub fn verify(
    problem: &Path,
    lambda: &str,
    substeps: Option<usize>,
    out_dir: &Path,
) -> CmdResult {
    let p = input::load_problem(problem)?;
    let d = p.coefficients.d();
    let lam = input::parse_lambda(lambda, d)?;
    let exprs = p.expressions.as_ref().ok_or_else(|| {
        input_err(
            "InvalidProblem",
            "verify needs closed-form coefficients (the independent check \
             evaluates them between mesh nodes; csv: sources cannot)",
        )
    })?;

    let m = p.grid.m;
    let substeps = match substeps {
        None => m * 256,
        Some(s) => {
            if s == 0 || s % m != 0 {
                return Err(input_err(
                    "InvalidArgument",
                    format!("--substeps must be a positive multiple of m = {m}"),
                ));
            }
            s
        }
    };

    let basis = endpoint_basis(&p, BuildMode::Endpoint)?;
    let series = basis.eval_at(&lam).map_err(runtime)?;

    let wrap = |e: &spps_core::exprparse::Expr| -> CoefficientFn<'_> {
        let e = e.clone();
        Box::new(move |x| {
            e.eval(x)
                .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
        })
    };
    let fp = FnProblem {
        p: wrap(&exprs.p),
        q: wrap(&exprs.q),
        r: exprs.r.iter().map(wrap).collect(),
        s: exprs
            .s
            .as_ref()
            .map(|list| list.iter().map(wrap).collect()),
    };
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let (y1, y1p) = rk4_solve(&fp, &lam, one, zero, p.grid, substeps).map_err(runtime)?;
    let (y2, y2p) = rk4_solve(&fp, &lam, zero, one, p.grid, substeps).map_err(runtime)?;
    let oracle = QuartetValues {
        v1: y1.at_x2(),
        v2: y2.at_x2(),
        v1p: y1p.at_x2(),
        v2p: y2p.at_x2(),
    };

    let labels = ["v1", "v2", "v1p", "v2p"];
    let series_vals = [series.v1, series.v2, series.v1p, series.v2p];
    let oracle_vals = [oracle.v1, oracle.v2, oracle.v1p, oracle.v2p];
    let diffs: Vec<f64> = series_vals
        .iter()
        .zip(&oracle_vals)
        .map(|(a, b)| (a - b).norm())
        .collect();
    let max_diff = diffs.iter().cloned().fold(0.0, f64::max);

    let mut j = Json::new();
    j.raw("{\n  \"lambda\": [");
    for (i, z) in lam.iter().enumerate() {
        if i > 0 {
            j.raw(", ");
        }
        j.complex_pair(*z);
    }
    j.raw("],\n  \"substeps\": ");
    j.usize(substeps);
    j.raw(",\n  \"series\": {");
    for (i, (label, v)) in labels.iter().zip(&series_vals).enumerate() {
        if i > 0 {
            j.raw(", ");
        }
        j.string(label);
        j.raw(": ");
        j.complex_pair(*v);
    }
    j.raw("},\n  \"oracle\": {");
    for (i, (label, v)) in labels.iter().zip(&oracle_vals).enumerate() {
        if i > 0 {
            j.raw(", ");
        }
        j.string(label);
        j.raw(": ");
        j.complex_pair(*v);
    }
    j.raw("},\n  \"abs_diff\": {");
    for (i, (label, v)) in labels.iter().zip(&diffs).enumerate() {
        if i > 0 {
            j.raw(", ");
        }
        j.string(label);
        j.raw(": ");
        j.number(*v);
    }
    j.raw("},\n  \"max_abs_diff\": ");
    j.number(max_diff);
    j.raw("\n}");
    write_artifact(out_dir, "verify.json", &j.finish())
}

// ---------------------------------------------------------------------------
// powers-dump
// ---------------------------------------------------------------------------

pub fn powers_dump(problem: &Path, max_degree: Option<usize>, out_dir: &Path) -> CmdResult {
    let p = input::load_problem(problem)?;
    let opts = build_options(&p);
    let seed = materialize_seed(&p.coefficients, &opts).map_err(runtime)?;
    let req = TableRequest {
        n: 2 * p.order,
        mode: TableMode::Full,
        quadrature: p.quadrature,
    };
    let (xt, xc) = build_tables(&p.coefficients, &seed, req).map_err(runtime)?;

    let d = p.coefficients.d();
    let cap = max_degree.unwrap_or(usize::MAX);
    let xs = p.grid.points();
    let header: Vec<String> = std::iter::once("family".to_string())
        .chain((1..=d).map(|i| format!("j{i}")))
        .chain(["x", "re", "im"].map(String::from))
        .collect();
    let mut text = csv_line(&header);
    text.push('\n');
    for table in [&xt, &xc] {
        for j in table.indices() {
            if j.degree() > cap {
                continue;
            }
            let entry = table.entry(j).map_err(runtime)?;
            for (t, &x) in xs.iter().enumerate() {
                let mut fields = vec![table.family.label().to_string()];
                fields.extend(j.entries().iter().map(|&e| e.to_string()));
                fields.push(g17(x));
                let [re, im] = csv_complex(entry[t]);
                fields.push(re);
                fields.push(im);
                text.push_str(&csv_line(&fields));
                text.push('\n');
            }
        }
    }
    write_artifact(out_dir, "powers.csv", &text)
}

/// Shared path-buf helper for the flag definitions in `main`.
pub fn out_dir_or_default(out: Option<&Path>) -> PathBuf {
    out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."))
}
