//! Batch execution of experiment configs: one sub-report per block, CSV
//! tables for sweeps, and a top-level summary with a PASS / FAIL /
//! SKIPPED line per checked claim.

use crate::asymptotics::{
    self, dominance_report, run_expansion_checks, threshold_check, verify_alpha_smallness,
    verify_beta_expansion, DominantChannel, LambdaSweep,
};
use crate::config::{
    ConstantsBlock, DominanceBlock, ExperimentConfig, FemBlock, SweepBlock, SweepCheckKind,
    ThresholdBlock, Tolerances,
};
use crate::constants::{ConstantsBundle, ProblemParams, RadialQuadConfig};
use crate::bubble::CutoffSpec;
use crate::error::{Error, Result};
use crate::fem::{quotient_vs_threshold, triangulate, ContinuationSchedule};
use crate::fit::{fit_expansion, ExpansionFit, FitModel};
use crate::geometry::{ModelDomain, PotentialSpec, QuadratureConfig};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClaimResult {
    pub name: String,
    pub status: ClaimStatus,
    pub detail: String,
}

impl ClaimResult {
    fn check(name: &str, ok: bool, detail: String) -> Self {
        ClaimResult {
            name: name.into(),
            status: if ok { ClaimStatus::Pass } else { ClaimStatus::Fail },
            detail,
        }
    }

    fn skipped(name: &str, reason: String) -> Self {
        ClaimResult {
            name: name.into(),
            status: ClaimStatus::Skipped,
            detail: reason,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockOutcome {
    pub kind: String,
    pub name: String,
    pub claims: Vec<ClaimResult>,
    pub artifacts: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub version: String,
    pub config_hash: String,
    pub reproducible: bool,
    pub quad_rel_tol: f64,
    pub quad_abs_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub finished_at: Option<String>,
    pub blocks: Vec<BlockOutcome>,
}

impl RunSummary {
    pub fn any_failed(&self) -> bool {
        self.blocks
            .iter()
            .any(|b| b.claims.iter().any(|c| c.status == ClaimStatus::Fail))
    }
}

fn quad_config(tol: &Tolerances) -> QuadratureConfig {
    QuadratureConfig {
        rel_tol: tol.quad_rel,
        abs_tol: tol.quad_abs,
        ..Default::default()
    }
}

fn fmt_f(v: f64) -> String {
    format!("{v:.12e}")
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path.display().to_string(), e))
}

fn sweep_csv(sweep: &LambdaSweep) -> String {
    let mut out = String::from("lambda,grad_term,alpha_term,beta_term,mass,norm_p,j,threshold\n");
    for r in &sweep.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_f(r.lambda),
            fmt_f(r.grad_term),
            fmt_f(r.alpha_term),
            fmt_f(r.beta_term),
            fmt_f(r.mass),
            fmt_f(r.norm_p),
            fmt_f(r.j),
            fmt_f(sweep.threshold)
        );
    }
    out
}

fn run_constants_block(
    b: &ConstantsBlock,
    tol: &Tolerances,
    out_dir: &Path,
    name: &str,
) -> Result<BlockOutcome> {
    let params = ProblemParams::new(b.n, b.p)?;
    let rc = RadialQuadConfig {
        rel_tol: tol.quad_rel.min(1e-11),
        ..Default::default()
    };
    let bundle = ConstantsBundle::compute(&params, &rc)?;
    let mut claims = Vec::new();
    claims.push(ClaimResult::check(
        "constants_positive",
        bundle.sigma > 0.0
            && bundle.c2 > 0.0
            && bundle.sobolev > 0.0
            && bundle.c1.is_none_or(|v| v > 0.0)
            && bundle.c_tilde.is_none_or(|v| v > 0.0),
        format!(
            "sigma={} c1={:?} c2={} c_tilde={:?} S={}",
            fmt_f(bundle.sigma),
            bundle.c1.map(fmt_f),
            fmt_f(bundle.c2),
            bundle.c_tilde.map(fmt_f),
            fmt_f(bundle.sobolev)
        ),
    ));
    claims.push(ClaimResult::check(
        "sobolev_identity",
        bundle.identity_residual < tol.identity,
        format!("relative residual {}", fmt_f(bundle.identity_residual)),
    ));
    let marginal = (b.p - (b.n as f64 + 1.0) / 2.0).abs() <= 1e-12;
    if marginal {
        claims.push(ClaimResult::check(
            "marginal_exponent_classified",
            bundle.c1.is_none(),
            "c1 log-divergent at p = (n+1)/2".into(),
        ));
    } else if b.p > 2.0 && b.p < (b.n as f64 + 1.0) / 2.0 {
        match crate::constants::c1_minus_p_c2(&params, &rc) {
            Ok(v) => claims.push(ClaimResult::check(
                "c1_minus_p_c2_positive",
                v > 0.0,
                format!("c1 - p c2 = {}", fmt_f(v)),
            )),
            Err(e) => claims.push(ClaimResult::check(
                "c1_minus_p_c2_positive",
                false,
                format!("{e}"),
            )),
        }
    }
    let pre_res = asymptotics::prefactor_identity_residual(&params, &bundle);
    claims.push(ClaimResult::check(
        "prefactor_identity",
        pre_res < tol.identity,
        format!("relative residual {}", fmt_f(pre_res)),
    ));
    let mut csv = String::from("n,p,sigma,c1,c2,c_tilde,sobolev,threshold,identity_residual\n");
    let opt = |v: Option<f64>| v.map(fmt_f).unwrap_or_else(|| "divergent".into());
    let _ = writeln!(
        csv,
        "{},{},{},{},{},{},{},{},{}",
        b.n,
        fmt_f(b.p),
        fmt_f(bundle.sigma),
        opt(bundle.c1),
        fmt_f(bundle.c2),
        opt(bundle.c_tilde),
        fmt_f(bundle.sobolev),
        fmt_f(bundle.threshold),
        fmt_f(bundle.identity_residual)
    );
    let artifact = format!("{name}.csv");
    write_file(&out_dir.join(&artifact), &csv)?;
    let record = format!("{name}.toml");
    write_file(
        &out_dir.join(&record),
        &toml::to_string_pretty(&bundle)
            .map_err(|e| Error::Config(format!("bundle serialization: {e}")))?,
    )?;
    Ok(BlockOutcome {
        kind: "constants".into(),
        name: name.into(),
        claims,
        artifacts: vec![artifact, record],
    })
}

fn run_sweep_block(
    b: &SweepBlock,
    tol: &Tolerances,
    out_dir: &Path,
    name: &str,
) -> Result<BlockOutcome> {
    let params = ProblemParams::new(b.n, b.p)?;
    let gamma = ExperimentConfig::gamma_or_flat(&b.gamma, b.n);
    let dom = ModelDomain::new(b.n, b.r_out, gamma)?;
    let cut = CutoffSpec::quintic(b.cutoff)?;
    let qc = quad_config(tol);
    let mut claims = Vec::new();
    let mut artifacts = Vec::new();

    match b.check {
        SweepCheckKind::Gradient | SweepCheckKind::Mass => {
            let checks = match run_expansion_checks(&dom, &params, &b.lambda, &cut, &qc) {
                Ok(c) => c,
                Err(Error::PreconditionViolated(msg)) => {
                    return Ok(BlockOutcome {
                        kind: "sweep".into(),
                        name: name.into(),
                        claims: vec![ClaimResult::skipped("expansion_check", msg)],
                        artifacts,
                    })
                }
                Err(e) => return Err(e),
            };
            let check = if b.check == SweepCheckKind::Gradient {
                &checks.gradient
            } else {
                &checks.mass
            };
            let limit_tol = if b.check == SweepCheckKind::Gradient {
                1e-2
            } else {
                1e-5
            };
            let rel_limit =
                (check.fitted_limit - check.predicted_limit).abs() / check.predicted_limit.abs();
            claims.push(ClaimResult::check(
                "limit_matches",
                rel_limit < limit_tol,
                format!(
                    "fitted {} vs predicted {} (rel {})",
                    fmt_f(check.fitted_limit),
                    fmt_f(check.predicted_limit),
                    fmt_f(rel_limit)
                ),
            ));
            if check.log_case {
                let cmpr = check.model_residuals.unwrap();
                claims.push(ClaimResult::check(
                    "log_model_preferred",
                    cmpr.power_log_rms < cmpr.power_rms,
                    format!(
                        "power rms {} vs power-log rms {}",
                        fmt_f(cmpr.power_rms),
                        fmt_f(cmpr.power_log_rms)
                    ),
                ));
                if let Some((lo, hi)) = check.log_coefficient_halves {
                    claims.push(ClaimResult::check(
                        "log_coefficient_stable",
                        (hi / lo - 1.0).abs() < 0.1,
                        format!("lower-decade {} vs upper-decade {}", fmt_f(lo), fmt_f(hi)),
                    ));
                }
            } else if dom.mean_curvature() == 0.0 {
                claims.push(ClaimResult::check(
                    "flat_channel_is_null",
                    check.fitted_coefficient.abs() < 1e-8 * check.predicted_limit,
                    format!("channel coefficient {}", fmt_f(check.fitted_coefficient)),
                ));
            } else if let Some(pred) = check.predicted_coefficient {
                let rel = (check.fitted_coefficient - pred).abs() / pred.abs();
                claims.push(ClaimResult::check(
                    "coefficient_matches_reference",
                    rel < tol.fit_coefficient,
                    format!(
                        "fitted {} vs reference {} (ratio {})",
                        fmt_f(check.fitted_coefficient),
                        fmt_f(pred),
                        fmt_f(check.fitted_coefficient / pred)
                    ),
                ));
            }
            let curved_csv = format!("{name}.csv");
            write_file(&out_dir.join(&curved_csv), &sweep_csv(&checks.curved))?;
            artifacts.push(curved_csv);
            let flat_csv = format!("{name}_flat.csv");
            write_file(&out_dir.join(&flat_csv), &sweep_csv(&checks.flat))?;
            artifacts.push(flat_csv);
            let fit_toml = format!("{name}_fit.toml");
            let fit_text = toml::to_string_pretty(check)
                .map_err(|e| Error::Config(format!("fit serialization: {e}")))?;
            write_file(&out_dir.join(&fit_toml), &fit_text)?;
            artifacts.push(fit_toml);
        }
        SweepCheckKind::AlphaTerm => {
            let rep = match verify_alpha_smallness(&dom, &params, b.alpha, &b.lambda, &cut, &qc) {
                Ok(r) => r,
                Err(Error::PreconditionViolated(msg)) => {
                    return Ok(BlockOutcome {
                        kind: "sweep".into(),
                        name: name.into(),
                        claims: vec![ClaimResult::skipped("alpha_smallness", msg)],
                        artifacts,
                    })
                }
                Err(e) => return Err(e),
            };
            claims.push(ClaimResult::check(
                "scaled_term_decreasing",
                rep.strictly_decreasing_top_half,
                format!("alpha_term * lambda^(p-1): {:?}", rep.scaled),
            ));
            claims.push(ClaimResult::check(
                "decay_exponent_reaches_bound",
                rep.exponent.exponent >= rep.required_exponent - 0.1,
                format!(
                    "estimated {} vs required {}",
                    fmt_f(rep.exponent.exponent),
                    fmt_f(rep.required_exponent)
                ),
            ));
            let toml_name = format!("{name}_report.toml");
            write_file(
                &out_dir.join(&toml_name),
                &toml::to_string_pretty(&rep)
                    .map_err(|e| Error::Config(format!("report serialization: {e}")))?,
            )?;
            artifacts.push(toml_name);
        }
        SweepCheckKind::BetaTerm => {
            let rep = match verify_beta_expansion(&dom, &params, b.beta, &b.lambda, &cut, &qc) {
                Ok(r) => r,
                Err(Error::PreconditionViolated(msg)) => {
                    return Ok(BlockOutcome {
                        kind: "sweep".into(),
                        name: name.into(),
                        claims: vec![ClaimResult::skipped("beta_expansion", msg)],
                        artifacts,
                    })
                }
                Err(e) => return Err(e),
            };
            let rel = (rep.fitted_coefficient - rep.predicted_coefficient).abs()
                / rep.predicted_coefficient.abs().max(f64::MIN_POSITIVE);
            claims.push(ClaimResult::check(
                "coefficient_matches_trace_constant",
                rel < tol.fit_coefficient,
                format!(
                    "fitted {} vs predicted {}",
                    fmt_f(rep.fitted_coefficient),
                    fmt_f(rep.predicted_coefficient)
                ),
            ));
            claims.push(ClaimResult::check(
                "sign_tracks_beta",
                rep.fitted_coefficient.signum() == rep.beta_at_base.signum(),
                format!("coefficient {}", fmt_f(rep.fitted_coefficient)),
            ));
            let toml_name = format!("{name}_report.toml");
            write_file(
                &out_dir.join(&toml_name),
                &toml::to_string_pretty(&rep)
                    .map_err(|e| Error::Config(format!("report serialization: {e}")))?,
            )?;
            artifacts.push(toml_name);
        }
    }
    Ok(BlockOutcome {
        kind: "sweep".into(),
        name: name.into(),
        claims,
        artifacts,
    })
}

fn run_threshold_block(
    b: &ThresholdBlock,
    tol: &Tolerances,
    out_dir: &Path,
    name: &str,
) -> Result<BlockOutcome> {
    let params = ProblemParams::new(b.n, b.p)?;
    let gamma = ExperimentConfig::gamma_or_flat(&b.gamma, b.n);
    let dom = ModelDomain::new(b.n, b.r_out, gamma)?;
    let cut = CutoffSpec::quintic(b.cutoff)?;
    let pot = PotentialSpec {
        alpha: b.alpha.clone(),
        beta: b.beta.clone(),
    };
    let qc = quad_config(tol);
    let rep = threshold_check(&dom, &pot, &params, b.lambda, &cut, &qc)?;
    let claims = vec![ClaimResult::check(
        "j_below_threshold",
        rep.below,
        format!("J = {} vs threshold {}", fmt_f(rep.j), fmt_f(rep.threshold)),
    )];
    let toml_name = format!("{name}.toml");
    write_file(
        &out_dir.join(&toml_name),
        &toml::to_string_pretty(&rep)
            .map_err(|e| Error::Config(format!("report serialization: {e}")))?,
    )?;
    Ok(BlockOutcome {
        kind: "threshold".into(),
        name: name.into(),
        claims,
        artifacts: vec![toml_name],
    })
}

fn run_dominance_block(
    b: &DominanceBlock,
    tol: &Tolerances,
    out_dir: &Path,
    name: &str,
) -> Result<BlockOutcome> {
    let params = ProblemParams::new(b.n, b.p)?;
    let dom = ModelDomain::new(b.n, b.r_out, b.gamma.clone())?;
    let cut = CutoffSpec::quintic(b.cutoff)?;
    let pot = PotentialSpec::constants(0.0, b.beta);
    let qc = quad_config(tol);
    let rep = match dominance_report(&dom, &pot, &params, &b.lambda, &cut, &qc) {
        Ok(r) => r,
        Err(Error::PreconditionViolated(msg)) => {
            return Ok(BlockOutcome {
                kind: "dominance".into(),
                name: name.into(),
                claims: vec![ClaimResult::skipped("dominance", msg)],
                artifacts: vec![],
            })
        }
        Err(e) => return Err(e),
    };
    let mut claims = Vec::new();
    claims.push(ClaimResult::check(
        "curvature_exponent",
        (rep.curvature_exponent.exponent - rep.expected_curvature_exponent).abs() < tol.exponent,
        format!(
            "fitted {} vs expected {}",
            fmt_f(rep.curvature_exponent.exponent),
            fmt_f(rep.expected_curvature_exponent)
        ),
    ));
    claims.push(ClaimResult::check(
        "beta_exponent",
        (rep.beta_exponent.exponent - rep.expected_beta_exponent).abs() < tol.exponent,
        format!(
            "fitted {} vs expected {}",
            fmt_f(rep.beta_exponent.exponent),
            fmt_f(rep.expected_beta_exponent)
        ),
    ));
    let expected = if (b.p - 2.0).abs() < 1e-12 {
        DominantChannel::Balanced
    } else if b.p > 2.0 {
        DominantChannel::Curvature
    } else {
        DominantChannel::Beta
    };
    claims.push(ClaimResult::check(
        "dominant_channel",
        rep.dominant == expected,
        format!("verdict {:?}, expected {:?}", rep.dominant, expected),
    ));
    let mut csv = String::from("channel,fitted_exponent,expected_exponent\n");
    let _ = writeln!(
        csv,
        "curvature,{},{}",
        fmt_f(rep.curvature_exponent.exponent),
        fmt_f(rep.expected_curvature_exponent)
    );
    let _ = writeln!(
        csv,
        "beta,{},{}",
        fmt_f(rep.beta_exponent.exponent),
        fmt_f(rep.expected_beta_exponent)
    );
    let _ = writeln!(csv, "verdict,{:?},", rep.dominant);
    let csv_name = format!("{name}.csv");
    write_file(&out_dir.join(&csv_name), &csv)?;
    Ok(BlockOutcome {
        kind: "dominance".into(),
        name: name.into(),
        claims,
        artifacts: vec![csv_name],
    })
}

fn run_fem_block(
    b: &FemBlock,
    _tol: &Tolerances,
    out_dir: &Path,
    name: &str,
) -> Result<BlockOutcome> {
    let outline = b.domain.build()?;
    let params = ProblemParams::new(2, b.p)?;
    let thr = crate::constants::threshold(&params, &RadialQuadConfig::default())?;
    let pot = PotentialSpec::constants(b.alpha, b.beta);
    let schedule = ContinuationSchedule {
        q_margin: b.q_margin,
        reach_critical: b.reach_critical,
        ..Default::default()
    };
    let mut claims = Vec::new();
    let mut artifacts = Vec::new();
    for (ci, &h0) in b.h.iter().enumerate() {
        let mut meshes = vec![triangulate(&outline, h0)?];
        for _ in 0..b.refinements {
            meshes.push(meshes.last().unwrap().refine_uniform());
        }
        let rep = match quotient_vs_threshold(&meshes, b.p, &pot, &schedule, thr) {
            Ok(r) => r,
            Err(Error::NonCoercive(c)) => {
                claims.push(ClaimResult::check(
                    &format!("chain{ci}_coercive"),
                    false,
                    format!("coercivity estimate {}", fmt_f(c)),
                ));
                continue;
            }
            Err(e) => return Err(e),
        };
        claims.push(ClaimResult::check(
            &format!("chain{ci}_refinement_monotone"),
            rep.monotone,
            format!(
                "estimates {:?}",
                rep.rows.iter().map(|r| r.q_estimate).collect::<Vec<_>>()
            ),
        ));
        claims.push(ClaimResult::check(
            &format!("chain{ci}_below_threshold"),
            rep.below,
            format!(
                "final estimate {} vs threshold {}",
                fmt_f(rep.rows.last().map(|r| r.q_estimate).unwrap_or(f64::NAN)),
                fmt_f(thr)
            ),
        ));
        let mut csv = String::from("h,q_used,q_estimate,threshold,below,iterations\n");
        for r in &rep.rows {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{}",
                fmt_f(r.h),
                fmt_f(r.q_used),
                fmt_f(r.q_estimate),
                fmt_f(thr),
                r.q_estimate < thr,
                r.iterations
            );
        }
        let csv_name = format!("{name}_chain{ci}.csv");
        write_file(&out_dir.join(&csv_name), &csv)?;
        artifacts.push(csv_name);
    }
    Ok(BlockOutcome {
        kind: "fem".into(),
        name: name.into(),
        claims,
        artifacts,
    })
}

/// Fit a named column of a sweep CSV (produced by this runner) against
/// the power or power-log model.
pub fn fit_csv_column(
    path: &Path,
    column: &str,
    e: f64,
    model: FitModel,
) -> Result<ExpansionFit> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|err| Error::Config(format!("cannot read {}: {err}", path.display())))?;
    let headers = rdr
        .headers()
        .map_err(|err| Error::Config(format!("bad csv header: {err}")))?
        .clone();
    let col = headers
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| Error::Config(format!("column '{column}' not found")))?;
    let lam_col = headers
        .iter()
        .position(|h| h == "lambda")
        .ok_or_else(|| Error::Config("column 'lambda' not found".into()))?;
    let mut lambda = Vec::new();
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|err| Error::Config(format!("bad csv record: {err}")))?;
        let l: f64 = rec[lam_col]
            .parse()
            .map_err(|_| Error::Config(format!("bad lambda entry '{}'", &rec[lam_col])))?;
        let v: f64 = rec[col]
            .parse()
            .map_err(|_| Error::Config(format!("bad value entry '{}'", &rec[col])))?;
        lambda.push(l);
        values.push(v);
    }
    fit_expansion(&lambda, &values, e, model)
}

/// Which block kinds to execute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockFilter {
    All,
    Constants,
    Sweep,
    Threshold,
    Dominance,
    Fem,
}

/// Run the selected blocks of a config, write artifacts under `out_dir`,
/// and return the summary (also written as `summary.toml`).
pub fn run(
    cfg: &ExperimentConfig,
    raw_config: &str,
    out_dir: &Path,
    filter: BlockFilter,
) -> Result<RunSummary> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir.display().to_string(), e))?;
    let tol = cfg.tolerances;

    enum Job<'a> {
        Constants(&'a ConstantsBlock),
        Sweep(&'a SweepBlock),
        Threshold(&'a ThresholdBlock),
        Dominance(&'a DominanceBlock),
        Fem(&'a FemBlock),
    }
    let mut jobs: Vec<(String, Job)> = Vec::new();
    if matches!(filter, BlockFilter::All | BlockFilter::Constants) {
        for (i, b) in cfg.constants.iter().enumerate() {
            jobs.push((format!("constants_{i}"), Job::Constants(b)));
        }
    }
    if matches!(filter, BlockFilter::All | BlockFilter::Sweep) {
        for (i, b) in cfg.sweep.iter().enumerate() {
            jobs.push((format!("sweep_{i}"), Job::Sweep(b)));
        }
    }
    if matches!(filter, BlockFilter::All | BlockFilter::Threshold) {
        for (i, b) in cfg.threshold.iter().enumerate() {
            jobs.push((format!("threshold_{i}"), Job::Threshold(b)));
        }
    }
    if matches!(filter, BlockFilter::All | BlockFilter::Dominance) {
        for (i, b) in cfg.dominance.iter().enumerate() {
            jobs.push((format!("dominance_{i}"), Job::Dominance(b)));
        }
    }
    if matches!(filter, BlockFilter::All | BlockFilter::Fem) {
        for (i, b) in cfg.fem.iter().enumerate() {
            jobs.push((format!("fem_{i}"), Job::Fem(b)));
        }
    }
    if jobs.is_empty() {
        return Err(Error::Config(
            "config contains no blocks for the requested command".into(),
        ));
    }

    let run_job = |(name, job): &(String, Job)| -> Result<BlockOutcome> {
        match job {
            Job::Constants(b) => run_constants_block(b, &tol, out_dir, name),
            Job::Sweep(b) => run_sweep_block(b, &tol, out_dir, name),
            Job::Threshold(b) => run_threshold_block(b, &tol, out_dir, name),
            Job::Dominance(b) => run_dominance_block(b, &tol, out_dir, name),
            Job::Fem(b) => run_fem_block(b, &tol, out_dir, name),
        }
    };

    let blocks: Result<Vec<BlockOutcome>> = if let Some(workers) = cfg.workers {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
        pool.install(|| {
            use rayon::prelude::*;
            jobs.par_iter().map(run_job).collect()
        })
    } else {
        use rayon::prelude::*;
        jobs.par_iter().map(run_job).collect()
    };

    let mut hasher = Sha256::new();
    hasher.update(raw_config.as_bytes());
    let config_hash: String = hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();

    let summary = RunSummary {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash,
        reproducible: cfg.reproducible,
        quad_rel_tol: tol.quad_rel,
        quad_abs_tol: tol.quad_abs,
        finished_at: if cfg.reproducible {
            None
        } else {
            Some(format!("{:?}", std::time::SystemTime::now()))
        },
        blocks: blocks?,
    };
    let text = toml::to_string_pretty(&summary)
        .map_err(|e| Error::Config(format!("summary serialization: {e}")))?;
    write_file(&out_dir.join("summary.toml"), &text)?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_block_runs_and_reports() {
        let cfg = ExperimentConfig::from_toml_str(
            "[[constants]]\nn = 4\np = 2.2\n\n[[constants]]\nn = 3\np = 2.0\n",
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let summary = run(&cfg, "raw", dir.path(), BlockFilter::All).unwrap();
        assert_eq!(summary.blocks.len(), 2);
        assert!(!summary.any_failed());
        assert!(dir.path().join("constants_0.csv").exists());
        assert!(dir.path().join("summary.toml").exists());
    }

    #[test]
    fn skipped_block_reports_inequality() {
        // beta sweep outside its range: n = 2, p = 1.7
        let cfg = ExperimentConfig::from_toml_str(
            "[[sweep]]\ncheck = \"beta_term\"\nn = 2\np = 1.7\nbeta = -1.0\nlambda = [25.0, 50.0, 100.0, 200.0]\n",
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let summary = run(&cfg, "raw", dir.path(), BlockFilter::All).unwrap();
        let claims = &summary.blocks[0].claims;
        assert_eq!(claims.len(), 1);
        assert_eq!(claims[0].status, ClaimStatus::Skipped);
        assert!(claims[0].detail.contains("(p-1)^2"), "{}", claims[0].detail);
    }

    #[test]
    fn reproducible_runs_are_byte_identical() {
        let raw = "reproducible = true\n\n[[constants]]\nn = 3\np = 1.5\n";
        let cfg = ExperimentConfig::from_toml_str(raw).unwrap();
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        run(&cfg, raw, d1.path(), BlockFilter::All).unwrap();
        run(&cfg, raw, d2.path(), BlockFilter::All).unwrap();
        for f in ["constants_0.csv", "summary.toml"] {
            let a = std::fs::read(d1.path().join(f)).unwrap();
            let b = std::fs::read(d2.path().join(f)).unwrap();
            assert_eq!(a, b, "artifact {f} differs");
        }
    }

    #[test]
    fn fit_csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        let mut csv = String::from("lambda,grad_term\n");
        for l in [25.0f64, 50.0, 100.0, 200.0, 400.0] {
            let v = 2.0 + 3.0 * l.powf(-1.2);
            csv.push_str(&format!("{l},{v}\n"));
        }
        std::fs::write(&path, csv).unwrap();
        let fit = fit_csv_column(&path, "grad_term", 1.2, FitModel::Power).unwrap();
        assert!((fit.a - 2.0).abs() < 1e-9);
        assert!((fit.k - 3.0).abs() < 1e-8);
    }
}
