//! Python bindings: the main types and operations of the toolkit exposed
//! as plain functions returning dictionaries.
//!
//! Build with `cargo build --release -p plcrit-py`; the resulting
//! `libplcrit_py.so` imports as the module `plcrit_py` (see
//! `python/smoke_test.py` for the loading shim).

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use plcrit::asymptotics;
use plcrit::bubble::{self, BubbleParams, CutoffSpec};
use plcrit::constants::{self, ConstantsBundle, ProblemParams, RadialIntegralSpec, RadialQuadConfig};
use plcrit::error::Error;
use plcrit::fem;
use plcrit::fit::FitModel;
use plcrit::geometry::{ModelDomain, PotentialSpec, QuadratureConfig};

fn pyerr(e: Error) -> PyErr {
    match e {
        Error::InvalidArgument(_) | Error::PreconditionViolated(_) | Error::Config(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn params(n: usize, p: f64) -> PyResult<ProblemParams> {
    ProblemParams::new(n, p).map_err(pyerr)
}

fn domain(n: usize, r_out: f64, gamma: Vec<f64>) -> PyResult<ModelDomain> {
    let g = if gamma.is_empty() { vec![0.0; n - 1] } else { gamma };
    ModelDomain::new(n, r_out, g).map_err(pyerr)
}

/// Surface measure of the unit sphere in d-dimensional space.
#[pyfunction]
fn sphere_area(d: usize) -> PyResult<f64> {
    constants::sphere_area(d).map_err(pyerr)
}

/// int_0^inf r^{s-1} (1 + r^q)^{-m} dr; raises ValueError when divergent.
#[pyfunction]
fn radial_integral(s: f64, q: f64, m: f64) -> PyResult<f64> {
    let spec = RadialIntegralSpec::new(s, q, m).map_err(pyerr)?;
    constants::radial_integral(&spec, &RadialQuadConfig::default()).map_err(|e| match e {
        Error::DivergentIntegral { .. } | Error::LogDivergent { .. } => {
            PyValueError::new_err(e.to_string())
        }
        other => pyerr(other),
    })
}

/// Convergence class of the radial integral: "convergent",
/// "log_divergent" or "divergent".
#[pyfunction]
fn classify_radial_integral(s: f64, q: f64, m: f64) -> PyResult<String> {
    let spec = RadialIntegralSpec::new(s, q, m).map_err(pyerr)?;
    Ok(match spec.classify() {
        plcrit::Convergence::Convergent => "convergent".into(),
        plcrit::Convergence::LogDivergent => "log_divergent".into(),
        plcrit::Convergence::Divergent => "divergent".into(),
    })
}

fn bundle_dict<'py>(py: Python<'py>, b: &ConstantsBundle) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("n", b.n)?;
    d.set_item("p", b.p)?;
    d.set_item("sigma", b.sigma)?;
    d.set_item("c1", b.c1)?;
    d.set_item("c2", b.c2)?;
    d.set_item("c_tilde", b.c_tilde)?;
    d.set_item("sobolev", b.sobolev)?;
    d.set_item("threshold", b.threshold)?;
    d.set_item("identity_residual", b.identity_residual)?;
    Ok(d)
}

/// All universal constants for one (n, p) pair.
#[pyfunction]
fn constants_bundle(py: Python<'_>, n: usize, p: f64) -> PyResult<Bound<'_, PyDict>> {
    let b = ConstantsBundle::compute(&params(n, p)?, &RadialQuadConfig::default())
        .map_err(pyerr)?;
    bundle_dict(py, &b)
}

/// The extremal profile at a point.
#[pyfunction]
#[pyo3(signature = (x, lam, n, p, center=None))]
fn delta(x: Vec<f64>, lam: f64, n: usize, p: f64, center: Option<Vec<f64>>) -> PyResult<f64> {
    let c = center.unwrap_or_else(|| vec![0.0; n]);
    let b = BubbleParams::new(params(n, p)?, c, lam).map_err(pyerr)?;
    Ok(bubble::delta(&x, &b))
}

/// |grad delta|^p at a point (closed form).
#[pyfunction]
#[pyo3(signature = (x, lam, n, p, center=None))]
fn grad_delta_pnorm(
    x: Vec<f64>,
    lam: f64,
    n: usize,
    p: f64,
    center: Option<Vec<f64>>,
) -> PyResult<f64> {
    let c = center.unwrap_or_else(|| vec![0.0; n]);
    let b = BubbleParams::new(params(n, p)?, c, lam).map_err(pyerr)?;
    Ok(bubble::grad_delta_pnorm(&x, &b))
}

/// Cutoff test function and its gradient at a point.
#[pyfunction]
fn test_function(
    x: Vec<f64>,
    lam: f64,
    n: usize,
    p: f64,
    cutoff_radius: f64,
) -> PyResult<(f64, Vec<f64>)> {
    let b = BubbleParams::origin(params(n, p)?, lam).map_err(pyerr)?;
    let cut = CutoffSpec::quintic(cutoff_radius).map_err(pyerr)?;
    Ok(bubble::test_function(&x, &b, &cut))
}

/// Relative residual of the radial profile equation at the given radii.
#[pyfunction]
fn pde_residual(radii: Vec<f64>, n: usize, p: f64, lam: f64, h: f64) -> PyResult<Vec<f64>> {
    let b = BubbleParams::origin(params(n, p)?, lam).map_err(pyerr)?;
    bubble::pde_residual(&radii, &b, h).map_err(pyerr)
}

/// Mean curvature of the boundary graph at the base point.
#[pyfunction]
fn mean_curvature(n: usize, gamma: Vec<f64>) -> PyResult<f64> {
    Ok(domain(n, 1.0, gamma)?.mean_curvature())
}

fn components_dict<'py>(
    py: Python<'py>,
    c: &asymptotics::EnergyComponents,
) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("lambda", c.lambda)?;
    d.set_item("grad_term", c.grad_term)?;
    d.set_item("alpha_term", c.alpha_term)?;
    d.set_item("beta_term", c.beta_term)?;
    d.set_item("mass", c.mass)?;
    d.set_item("norm_p", c.norm_p)?;
    d.set_item("j", c.j)?;
    Ok(d)
}

/// Energy components of the cutoff bubble on a curved half-ball domain.
#[pyfunction]
#[pyo3(signature = (n, p, lam, gamma=None, alpha=0.0, beta=0.0, r_out=1.0, cutoff=0.5))]
#[allow(clippy::too_many_arguments)]
fn energy_components<'py>(
    py: Python<'py>,
    n: usize,
    p: f64,
    lam: f64,
    gamma: Option<Vec<f64>>,
    alpha: f64,
    beta: f64,
    r_out: f64,
    cutoff: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let dom = domain(n, r_out, gamma.unwrap_or_default())?;
    let pot = PotentialSpec::constants(alpha, beta);
    let b = BubbleParams::origin(params(n, p)?, lam).map_err(pyerr)?;
    let cut = CutoffSpec::quintic(cutoff).map_err(pyerr)?;
    let c = asymptotics::energy_components(&dom, &pot, &b, &cut, &QuadratureConfig::default())
        .map_err(pyerr)?;
    components_dict(py, &c)
}

/// Quotient of the test function against the concentration threshold.
#[pyfunction]
#[pyo3(signature = (n, p, lam, gamma=None, alpha=0.0, beta=0.0, r_out=1.0, cutoff=0.5))]
#[allow(clippy::too_many_arguments)]
fn threshold_check<'py>(
    py: Python<'py>,
    n: usize,
    p: f64,
    lam: f64,
    gamma: Option<Vec<f64>>,
    alpha: f64,
    beta: f64,
    r_out: f64,
    cutoff: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let dom = domain(n, r_out, gamma.unwrap_or_default())?;
    let pot = PotentialSpec::constants(alpha, beta);
    let cut = CutoffSpec::quintic(cutoff).map_err(pyerr)?;
    let rep = asymptotics::threshold_check(
        &dom,
        &pot,
        &params(n, p)?,
        lam,
        &cut,
        &QuadratureConfig::default(),
    )
    .map_err(pyerr)?;
    let d = PyDict::new(py);
    d.set_item("j", rep.j)?;
    d.set_item("threshold", rep.threshold)?;
    d.set_item("below", rep.below)?;
    d.set_item("components", components_dict(py, &rep.components)?)?;
    Ok(d)
}

/// Least-squares fit `values ~ A + K lambda^{-e}` (model "power") or
/// `A + K log(lambda) lambda^{-e}` (model "power_log").
#[pyfunction]
#[pyo3(signature = (lambda_grid, values, e, model="power"))]
fn fit_expansion<'py>(
    py: Python<'py>,
    lambda_grid: Vec<f64>,
    values: Vec<f64>,
    e: f64,
    model: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let m = match model {
        "power" => FitModel::Power,
        "power_log" | "power-log" => FitModel::PowerLog,
        other => return Err(PyValueError::new_err(format!("unknown model '{other}'"))),
    };
    let fit = plcrit::fit::fit_expansion(&lambda_grid, &values, e, m).map_err(pyerr)?;
    let d = PyDict::new(py);
    d.set_item("a", fit.a)?;
    d.set_item("k", fit.k)?;
    d.set_item("e", fit.e)?;
    d.set_item("residual_rms", fit.residual_rms())?;
    d.set_item("residuals", fit.residuals)?;
    Ok(d)
}

/// Decay exponents of the curvature and boundary-potential channels and
/// the dominance verdict ("curvature", "beta" or "balanced").
#[pyfunction]
#[pyo3(signature = (n, p, gamma, beta, lambda_grid=None, r_out=1.0, cutoff=0.5))]
#[allow(clippy::too_many_arguments)]
fn dominance<'py>(
    py: Python<'py>,
    n: usize,
    p: f64,
    gamma: Vec<f64>,
    beta: f64,
    lambda_grid: Option<Vec<f64>>,
    r_out: f64,
    cutoff: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let dom = domain(n, r_out, gamma)?;
    let pot = PotentialSpec::constants(0.0, beta);
    let grid = lambda_grid.unwrap_or_else(|| vec![25.0, 50.0, 100.0, 200.0, 400.0]);
    let cut = CutoffSpec::quintic(cutoff).map_err(pyerr)?;
    let rep = asymptotics::dominance_report(
        &dom,
        &pot,
        &params(n, p)?,
        &grid,
        &cut,
        &QuadratureConfig::default(),
    )
    .map_err(pyerr)?;
    let d = PyDict::new(py);
    d.set_item("curvature_exponent", rep.curvature_exponent.exponent)?;
    d.set_item("beta_exponent", rep.beta_exponent.exponent)?;
    d.set_item("expected_curvature_exponent", rep.expected_curvature_exponent)?;
    d.set_item("expected_beta_exponent", rep.expected_beta_exponent)?;
    d.set_item(
        "dominant",
        match rep.dominant {
            asymptotics::DominantChannel::Curvature => "curvature",
            asymptotics::DominantChannel::Beta => "beta",
            asymptotics::DominantChannel::Balanced => "balanced",
        },
    )?;
    Ok(d)
}

/// Finite-element quotient estimate on the half-disk (flat edge Robin,
/// arc Dirichlet) with uniform refinement and warm starts.
#[pyfunction]
#[pyo3(signature = (p, alpha, beta, h=0.1, refinements=2, q_margin=0.05))]
fn fem_half_disk<'py>(
    py: Python<'py>,
    p: f64,
    alpha: f64,
    beta: f64,
    h: f64,
    refinements: usize,
    q_margin: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let poly = fem::LabeledPolygon::half_disk(1.0, 64).map_err(pyerr)?;
    let mut meshes = vec![fem::triangulate(&poly, h).map_err(pyerr)?];
    for _ in 0..refinements {
        meshes.push(meshes.last().unwrap().refine_uniform());
    }
    let pot = PotentialSpec::constants(alpha, beta);
    let pr = params(2, p)?;
    let thr = constants::threshold(&pr, &RadialQuadConfig::default()).map_err(pyerr)?;
    let schedule = fem::ContinuationSchedule {
        q_margin,
        ..Default::default()
    };
    let rep = fem::quotient_vs_threshold(&meshes, p, &pot, &schedule, thr).map_err(pyerr)?;
    let d = PyDict::new(py);
    d.set_item("threshold", rep.threshold)?;
    d.set_item("below", rep.below)?;
    d.set_item("monotone", rep.monotone)?;
    let rows: Vec<(f64, f64, f64)> = rep
        .rows
        .iter()
        .map(|r| (r.h, r.q_used, r.q_estimate))
        .collect();
    d.set_item("rows", rows)?;
    Ok(d)
}

/// Which expansion regime applies for (n, p), with the predicted
/// coefficients assembled from the constants.
#[pyfunction]
fn classify_regime(py: Python<'_>, n: usize, p: f64) -> PyResult<Bound<'_, PyDict>> {
    let pr = params(n, p)?;
    let bundle = ConstantsBundle::compute(&pr, &RadialQuadConfig::default()).map_err(pyerr)?;
    let cls = asymptotics::classify_norm_expansion(&pr, &bundle).map_err(pyerr)?;
    let d = PyDict::new(py);
    d.set_item(
        "regime",
        match cls.regime {
            asymptotics::NormRegime::BetaLeading => "beta_leading",
            asymptotics::NormRegime::Balanced => "balanced",
            asymptotics::NormRegime::CurvatureLeading => "curvature_leading",
            asymptotics::NormRegime::CurvatureLogLeading => "curvature_log_leading",
        },
    )?;
    d.set_item("leading", cls.leading)?;
    d.set_item("beta_rel_coefficient", cls.beta_rel_coefficient)?;
    d.set_item("curvature_rel_coefficient", cls.curvature_rel_coefficient)?;
    d.set_item("exponent", cls.exponent)?;
    d.set_item("log_factor", cls.log_factor)?;
    Ok(d)
}

/// Run an experiment config file; returns (passed, failed, skipped).
#[pyfunction]
fn run_config(config_path: &str, out_dir: &str) -> PyResult<(usize, usize, usize)> {
    let (cfg, raw) =
        plcrit::config::ExperimentConfig::from_path(std::path::Path::new(config_path))
            .map_err(pyerr)?;
    let summary = plcrit::runner::run(
        &cfg,
        &raw,
        std::path::Path::new(out_dir),
        plcrit::runner::BlockFilter::All,
    )
    .map_err(pyerr)?;
    let (mut pass, mut fail, mut skip) = (0, 0, 0);
    for b in &summary.blocks {
        for c in &b.claims {
            match c.status {
                plcrit::runner::ClaimStatus::Pass => pass += 1,
                plcrit::runner::ClaimStatus::Fail => fail += 1,
                plcrit::runner::ClaimStatus::Skipped => skip += 1,
            }
        }
    }
    Ok((pass, fail, skip))
}

#[pymodule]
fn plcrit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(sphere_area, m)?)?;
    m.add_function(wrap_pyfunction!(radial_integral, m)?)?;
    m.add_function(wrap_pyfunction!(classify_radial_integral, m)?)?;
    m.add_function(wrap_pyfunction!(constants_bundle, m)?)?;
    m.add_function(wrap_pyfunction!(delta, m)?)?;
    m.add_function(wrap_pyfunction!(grad_delta_pnorm, m)?)?;
    m.add_function(wrap_pyfunction!(test_function, m)?)?;
    m.add_function(wrap_pyfunction!(pde_residual, m)?)?;
    m.add_function(wrap_pyfunction!(mean_curvature, m)?)?;
    m.add_function(wrap_pyfunction!(energy_components, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_check, m)?)?;
    m.add_function(wrap_pyfunction!(fit_expansion, m)?)?;
    m.add_function(wrap_pyfunction!(dominance, m)?)?;
    m.add_function(wrap_pyfunction!(fem_half_disk, m)?)?;
    m.add_function(wrap_pyfunction!(classify_regime, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    Ok(())
}
