//! Normalized projected descent for the Sobolev quotient, with
//! subcritical continuation in the mass exponent and annealed gradient
//! regularization.
//!
//! The iteration keeps `M(u) = 1` by rescaling, steps along the projected
//! negative quotient gradient, and accepts only J-decreasing steps, so
//! the per-stage history is non-increasing by construction. The mass
//! exponent is driven from `p` up to `p* - margin` (or to `p*` exactly
//! when requested) while `eps_reg` anneals geometrically.
//!
//! Refinement studies pair uniform mesh subdivision with matching
//! zero-order quadrature depths (see [`super::energy::FemProblem`]), so a
//! warm-started fine level starts exactly at the coarse estimate and can
//! only go down.

use super::energy::{assemble_energy, quotient, FemProblem};
use super::mesh::Mesh;
use crate::error::{Error, Result};
use crate::geometry::PotentialSpec;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

/// Continuation plan for the quotient minimization.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ContinuationSchedule {
    /// Number of (q, eps) stages from `q = p` to the final exponent.
    pub stages: usize,
    /// Final mass exponent is `p* - q_margin` unless `reach_critical`.
    pub q_margin: f64,
    /// Drive `q` all the way to the critical exponent.
    pub reach_critical: bool,
    pub eps_start: f64,
    pub eps_end: f64,
    pub max_iters: usize,
    /// Relative J-decrease below which a stage stops early.
    pub j_tol: f64,
}

impl Default for ContinuationSchedule {
    fn default() -> Self {
        ContinuationSchedule {
            stages: 7,
            q_margin: 0.05,
            reach_critical: false,
            eps_start: 1e-2,
            eps_end: 1e-8,
            max_iters: 500,
            j_tol: 1e-12,
        }
    }
}

/// Outcome of a quotient minimization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinimizeResult {
    /// Nodal coefficients of the minimizer (zero on the Dirichlet part).
    pub coefficients: Vec<f64>,
    /// Final mass exponent.
    pub q_used: f64,
    /// Quotient of `coefficients` at `q_used`, without regularization.
    pub j_value: f64,
    /// Best quotient found (equals `j_value` for a single start).
    pub q_estimate: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Accepted quotient values of the final stage (non-increasing).
    pub history: Vec<f64>,
}

fn project_dirichlet(u: &mut [f64], dirichlet: &[bool]) {
    for (v, &d) in u.iter_mut().zip(dirichlet) {
        if d {
            *v = 0.0;
        }
    }
}

fn normalize_mass(prob: &FemProblem, u: &mut [f64], q: f64, eps: f64) -> Result<()> {
    let asm = assemble_energy(prob, u, q, eps)?;
    if !(asm.m > 0.0) {
        return Err(Error::InvalidArgument(
            "field has no mass after the Dirichlet projection".into(),
        ));
    }
    let s = asm.m.powf(-1.0 / q);
    for v in u.iter_mut() {
        *v *= s;
    }
    Ok(())
}

/// One (q, eps) descent stage; returns the accepted-J history.
fn descend_stage(
    prob: &FemProblem,
    u: &mut Vec<f64>,
    q: f64,
    eps: f64,
    max_iters: usize,
    j_tol: f64,
    iterations: &mut usize,
) -> Result<Vec<f64>> {
    normalize_mass(prob, u, q, eps)?;
    let p = prob.p;
    let mut asm = assemble_energy(prob, u, q, eps)?;
    let mut j = asm.e / asm.m.powf(p / q);
    let mut history = vec![j];
    let mut step = 0.1;
    for _ in 0..max_iters {
        *iterations += 1;
        // gradient of J at M = 1
        let mut g: Vec<f64> = asm
            .grad_e
            .iter()
            .zip(&asm.grad_m)
            .map(|(ge, gm)| ge - (p / q) * asm.e * gm)
            .collect();
        project_dirichlet(&mut g, &prob.dirichlet);
        let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if gn < 1e-300 {
            break;
        }
        let mut accepted = false;
        for _ in 0..40 {
            let mut v: Vec<f64> = u
                .iter()
                .zip(&g)
                .map(|(ui, gi)| ui - step * gi / gn)
                .collect();
            project_dirichlet(&mut v, &prob.dirichlet);
            let trial = assemble_energy(prob, &v, q, eps)?;
            if trial.m > 0.0 {
                let s = trial.m.powf(-1.0 / q);
                for x in v.iter_mut() {
                    *x *= s;
                }
                let t2 = assemble_energy(prob, &v, q, eps)?;
                let j_new = t2.e / t2.m.powf(p / q);
                if j_new < j - j_tol * j.abs() {
                    *u = v;
                    asm = t2;
                    let decrease = j - j_new;
                    j = j_new;
                    history.push(j);
                    step = (step * 1.8).min(10.0);
                    accepted = true;
                    if decrease < j_tol * j.abs().max(1e-300) {
                        return Ok(history);
                    }
                    break;
                }
            }
            step *= 0.4;
            if step < 1e-15 {
                return Ok(history);
            }
        }
        if !accepted {
            break;
        }
    }
    Ok(history)
}

fn default_init(prob: &FemProblem) -> Vec<f64> {
    let mut u = vec![1.0; prob.n_vertices];
    project_dirichlet(&mut u, &prob.dirichlet);
    u
}

fn coercivity_on(prob: &FemProblem) -> Result<f64> {
    let mut u = default_init(prob);
    let mut iters = 0;
    for eps in [1e-2, 1e-4, 1e-6, 1e-8] {
        descend_stage(prob, &mut u, prob.p, eps, 200, 1e-11, &mut iters)?;
    }
    quotient(prob, &u, prob.p)
}

/// Numerical coercivity constant: the minimized quotient
/// `||u||^p / int |u|^p` over the Dirichlet-constrained space. A
/// non-positive value flags the configuration as non-coercive.
pub fn coercivity_estimate(mesh: &Mesh, p: f64, pot: &PotentialSpec) -> Result<f64> {
    coercivity_on(&FemProblem::new(mesh, p, pot)?)
}

fn minimize_on(
    prob: &FemProblem,
    schedule: &ContinuationSchedule,
    init: Option<&[f64]>,
) -> Result<MinimizeResult> {
    let p = prob.p;
    let p_star = prob.p_star();
    let q_final = if schedule.reach_critical {
        p_star
    } else {
        p_star - schedule.q_margin
    };
    if q_final <= p {
        return Err(Error::InvalidArgument(format!(
            "final exponent {q_final} must exceed p = {p}"
        )));
    }
    let stages = schedule.stages.max(2);
    let mut u = match init {
        Some(v) => {
            let mut u = v.to_vec();
            project_dirichlet(&mut u, &prob.dirichlet);
            u
        }
        None => default_init(prob),
    };
    let mut iterations = 0;
    let mut history = Vec::new();
    let mut q_used = p;
    for k in 0..stages {
        let t = k as f64 / (stages - 1) as f64;
        let q = p + t * (q_final - p);
        let eps = schedule.eps_start * (schedule.eps_end / schedule.eps_start).powf(t);
        history = descend_stage(
            prob,
            &mut u,
            q,
            eps,
            schedule.max_iters,
            schedule.j_tol,
            &mut iterations,
        )?;
        q_used = q;
    }
    let j_value = quotient(prob, &u, q_used)?;
    let converged = history.len() >= 2 || iterations < stages * schedule.max_iters;
    Ok(MinimizeResult {
        coefficients: u,
        q_used,
        j_value,
        q_estimate: j_value,
        iterations,
        converged,
        history,
    })
}

/// Minimize the quotient on the mesh with the given schedule. Refuses to
/// run when the numerical coercivity estimate is not positive.
pub fn minimize_quotient(
    mesh: &Mesh,
    p: f64,
    pot: &PotentialSpec,
    schedule: &ContinuationSchedule,
    init: Option<&[f64]>,
) -> Result<MinimizeResult> {
    let prob = FemProblem::new(mesh, p, pot)?;
    let coer = coercivity_on(&prob)?;
    if coer <= 0.0 {
        return Err(Error::NonCoercive(coer));
    }
    minimize_on(&prob, schedule, init)
}

/// Multi-start variant: the default start plus `extra_starts` seeded
/// random fields; returns the best result and the relative spread of the
/// found quotients (local-minimum diversity).
pub fn minimize_quotient_multistart(
    mesh: &Mesh,
    p: f64,
    pot: &PotentialSpec,
    schedule: &ContinuationSchedule,
    extra_starts: usize,
    seed: u64,
) -> Result<(MinimizeResult, f64)> {
    let prob = FemProblem::new(mesh, p, pot)?;
    let coer = coercivity_on(&prob)?;
    if coer <= 0.0 {
        return Err(Error::NonCoercive(coer));
    }
    let mut best: Option<MinimizeResult> = None;
    let mut found = Vec::new();
    let nv = mesh.vertices.len();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for s in 0..=extra_starts {
        let init: Option<Vec<f64>> = if s == 0 {
            None
        } else {
            Some((0..nv).map(|_| rng.random_range(0.05..1.0)).collect())
        };
        let res = minimize_on(&prob, schedule, init.as_deref())?;
        found.push(res.q_estimate);
        if best.as_ref().is_none_or(|b| res.q_estimate < b.q_estimate) {
            best = Some(res);
        }
    }
    let lo = found.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = found.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let spread = (hi - lo) / lo.abs().max(f64::MIN_POSITIVE);
    Ok((best.expect("at least one start"), spread))
}

/// One row of a refinement study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RefinementRow {
    pub h: f64,
    pub q_used: f64,
    pub q_estimate: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Refinement study against the concentration threshold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RefinementReport {
    pub rows: Vec<RefinementRow>,
    pub threshold: f64,
    pub below: bool,
    /// Estimates non-increasing under refinement (up to `tolerance`).
    pub monotone: bool,
    pub tolerance: f64,
}

/// Minimize across a sequence of meshes of decreasing `h`, warm-starting
/// each level with the interpolated previous minimizer.
///
/// Zero-order quadrature depths decrease along the chain, so every level
/// evaluates the same discrete functional on shared fields; for nested
/// meshes (uniform subdivision) the warm start then reproduces the coarse
/// estimate exactly and descent can only improve on it.
pub fn quotient_vs_threshold(
    meshes: &[Mesh],
    p: f64,
    pot: &PotentialSpec,
    schedule: &ContinuationSchedule,
    threshold: f64,
) -> Result<RefinementReport> {
    if meshes.is_empty() {
        return Err(Error::InvalidArgument("need at least one mesh".into()));
    }
    let levels = meshes.len();
    let probs: Vec<FemProblem> = meshes
        .iter()
        .enumerate()
        .map(|(i, m)| FemProblem::with_depth(m, p, pot, levels - 1 - i))
        .collect::<Result<_>>()?;
    let coer = coercivity_on(&probs[0])?;
    if coer <= 0.0 {
        return Err(Error::NonCoercive(coer));
    }
    let tolerance = 1e-3;
    let mut rows: Vec<RefinementRow> = Vec::new();
    let mut prev: Option<(usize, MinimizeResult)> = None;
    for (i, mesh) in meshes.iter().enumerate() {
        let res = match &prev {
            None => minimize_on(&probs[i], schedule, None)?,
            Some((pi, prev_res)) => {
                let warm = mesh.interpolate_from(&meshes[*pi], &prev_res.coefficients);
                let full = minimize_on(&probs[i], schedule, Some(&warm))?;
                // polish the warm start at the final stage only; keep
                // whichever ends lower
                let mut u = warm;
                project_dirichlet(&mut u, &probs[i].dirichlet);
                let mut iters = 0;
                descend_stage(
                    &probs[i],
                    &mut u,
                    full.q_used,
                    schedule.eps_end,
                    schedule.max_iters,
                    schedule.j_tol,
                    &mut iters,
                )?;
                let j_polished = quotient(&probs[i], &u, full.q_used)?;
                if j_polished < full.j_value {
                    MinimizeResult {
                        coefficients: u,
                        q_used: full.q_used,
                        j_value: j_polished,
                        q_estimate: j_polished,
                        iterations: full.iterations + iters,
                        converged: full.converged,
                        history: full.history.clone(),
                    }
                } else {
                    full
                }
            }
        };
        rows.push(RefinementRow {
            h: mesh.max_edge_length(),
            q_used: res.q_used,
            q_estimate: res.q_estimate,
            iterations: res.iterations,
            converged: res.converged,
        });
        prev = Some((i, res));
    }
    let monotone = rows
        .windows(2)
        .all(|w| w[1].q_estimate <= w[0].q_estimate + tolerance);
    let below = rows.last().map(|r| r.q_estimate < threshold).unwrap_or(false);
    Ok(RefinementReport {
        rows,
        threshold,
        below,
        monotone,
        tolerance,
    })
}
