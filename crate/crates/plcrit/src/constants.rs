//! Universal constants of the critical mixed-boundary problem.
//!
//! Everything here reduces to one-dimensional radial integrals of the form
//!
//! ```text
//! I(s, q, m) = int_0^inf r^{s-1} (1 + r^q)^{-m} dr
//! ```
//!
//! which converges iff `s > 0` and `q*m > s`, is log-divergent at
//! `q*m = s`, and otherwise diverges. Divergence is always decided from
//! the exponents, never from quadrature behaviour.

use crate::error::{Convergence, Error, Result};
use crate::quad::{self, IntegralEstimate};
use serde::{Deserialize, Serialize};

/// Dimension and exponent of the problem, with the derived critical
/// exponent `p* = np/(n-p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub n: usize,
    pub p: f64,
    pub p_star: f64,
}

impl ProblemParams {
    pub fn new(n: usize, p: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("dimension n={n} must be >= 2")));
        }
        if !(p > 1.0 && p < n as f64) {
            return Err(Error::InvalidArgument(format!(
                "exponent p={p} must satisfy 1 < p < n = {n}"
            )));
        }
        Ok(ProblemParams {
            n,
            p,
            p_star: n as f64 * p / (n as f64 - p),
        })
    }

    /// Dual-type exponent `q = p/(p-1)` appearing in the bubble profile.
    pub fn q(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    /// The recurring factor `(n-p)/(p-1)`.
    pub fn a_const(&self) -> f64 {
        (self.n as f64 - self.p) / (self.p - 1.0)
    }

    /// Concentration length of a bubble at scale `lambda`.
    pub fn bubble_scale(&self, lambda: f64) -> f64 {
        lambda.powf(-(self.p - 1.0))
    }
}

/// Parameters of the radial integral `int r^{s-1} (1+r^q)^{-m} dr`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialIntegralSpec {
    pub s: f64,
    pub q: f64,
    pub m: f64,
}

/// Relative slack used to detect the exact marginal case `q*m = s` in
/// floating point (e.g. p = (n+1)/2 entered as a decimal).
const MARGINAL_TOL: f64 = 1e-12;

impl RadialIntegralSpec {
    pub fn new(s: f64, q: f64, m: f64) -> Result<Self> {
        if !(s > 0.0 && q > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "radial integral needs s > 0 and q > 0 (got s={s}, q={q})"
            )));
        }
        Ok(RadialIntegralSpec { s, q, m })
    }

    /// Analytic convergence classification from the exponent arithmetic.
    pub fn classify(&self) -> Convergence {
        let gap = self.q * self.m - self.s;
        if gap.abs() <= MARGINAL_TOL * self.s.abs().max(1.0) {
            Convergence::LogDivergent
        } else if gap > 0.0 {
            Convergence::Convergent
        } else {
            Convergence::Divergent
        }
    }
}

/// Quadrature tolerances for the constant evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialQuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_cells: usize,
}

impl Default for RadialQuadConfig {
    fn default() -> Self {
        RadialQuadConfig {
            rel_tol: 1e-12,
            abs_tol: 1e-15,
            max_cells: 20_000,
        }
    }
}

/// Surface measure of the unit sphere in `d`-dimensional space,
/// `2 pi^{d/2} / Gamma(d/2)`; `d = 1` gives the two-point measure 2.
pub fn sphere_area(d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidArgument("sphere_area needs d >= 1".into()));
    }
    // Gamma(d/2) by the half-integer recurrence; exact for the sizes used here.
    let mut g = if d % 2 == 0 { 1.0 } else { std::f64::consts::PI.sqrt() };
    let mut x = if d % 2 == 0 { 1.0 } else { 0.5 };
    while x < d as f64 / 2.0 - 0.25 {
        g *= x;
        x += 1.0;
    }
    Ok(2.0 * std::f64::consts::PI.powf(d as f64 / 2.0) / g)
}

/// Evaluate `int_0^inf r^{s-1}(1+r^q)^{-m} dr` to the configured tolerance.
///
/// The integral is split at `r = 1`; the substitutions `r = v^{1/s}` on the
/// head and `r -> 1/r`, then `r = w^{1/(qm-s)}`, on the tail absorb the
/// endpoint powers, leaving two smooth integrands on `[0, 1]`.
pub fn radial_integral(spec: &RadialIntegralSpec, cfg: &RadialQuadConfig) -> Result<f64> {
    match spec.classify() {
        Convergence::Divergent => {
            return Err(Error::DivergentIntegral {
                s: spec.s,
                q: spec.q,
                m: spec.m,
            })
        }
        Convergence::LogDivergent => {
            return Err(Error::LogDivergent {
                s: spec.s,
                q: spec.q,
                m: spec.m,
            })
        }
        Convergence::Convergent => {}
    }
    let (s, q, m) = (spec.s, spec.q, spec.m);
    let a = q * m - s;
    let head = |v: f64| (1.0 + v.powf(q / s)).powf(-m) / s;
    let tail = |w: f64| (1.0 + w.powf(q / a)).powf(-m) / a;
    let h = quad::adaptive(&head, 0.0, 1.0, cfg.rel_tol, cfg.abs_tol, cfg.max_cells);
    let t = quad::adaptive(&tail, 0.0, 1.0, cfg.rel_tol, cfg.abs_tol, cfg.max_cells);
    check_converged(&h)?;
    check_converged(&t)?;
    Ok(h.value + t.value)
}

fn check_converged(est: &IntegralEstimate) -> Result<()> {
    if est.converged {
        Ok(())
    } else {
        Err(Error::ToleranceNotReached {
            value: est.value,
            error: est.error,
        })
    }
}

/// The half-space gradient constant: `Sigma = int_{R^n_+} |z|^q (1+|z|^q)^{-n} dz`
/// with `q = p/(p-1)`, i.e. half of the corresponding full-space integral.
pub fn sigma(params: &ProblemParams, cfg: &RadialQuadConfig) -> Result<f64> {
    let q = params.q();
    let spec = RadialIntegralSpec::new(params.n as f64 + q, q, params.n as f64)?;
    Ok(sphere_area(params.n)? / 2.0 * radial_integral(&spec, cfg)?)
}

/// `c1 = int_{R^{n-1}} |z|^2 (1+|z|^q)^{-(n-1)} dz`. Finite only for
/// `p < (n+1)/2`; log-divergent exactly at `p = (n+1)/2`.
pub fn c1(params: &ProblemParams, cfg: &RadialQuadConfig) -> Result<f64> {
    let q = params.q();
    let spec = RadialIntegralSpec::new(params.n as f64 + 1.0, q, params.n as f64 - 1.0)?;
    Ok(sphere_area(params.n - 1)? * radial_integral(&spec, cfg)?)
}

/// `c2 = int_{R^{n-1}} |z|^2 (1+|z|^q)^{-n} dz`; convergent for all 1 < p < n.
pub fn c2(params: &ProblemParams, cfg: &RadialQuadConfig) -> Result<f64> {
    let q = params.q();
    let spec = RadialIntegralSpec::new(params.n as f64 + 1.0, q, params.n as f64)?;
    Ok(sphere_area(params.n - 1)? * radial_integral(&spec, cfg)?)
}

/// Boundary-trace constant `c_tilde = int_{R^{n-1}} (1+|z|^q)^{-(n-p)} dz`,
/// the coefficient of `beta(a) / lambda^{(p-1)^2}` in the boundary term.
/// Requires `p(n-p)/(p-1) > n-1`.
pub fn c_tilde(params: &ProblemParams, cfg: &RadialQuadConfig) -> Result<f64> {
    let q = params.q();
    let spec = RadialIntegralSpec::new(params.n as f64 - 1.0, q, params.n as f64 - params.p)?;
    Ok(sphere_area(params.n - 1)? * radial_integral(&spec, cfg)?)
}

/// `c1 - p*c2`, evaluated both as the difference and as the single integral
/// `int |z|^2 (|z|^q - (p-1)) (1+|z|^q)^{-n} dz`. Returns the difference
/// form; errs if the two routes disagree beyond quadrature accuracy.
pub fn c1_minus_p_c2(params: &ProblemParams, cfg: &RadialQuadConfig) -> Result<f64> {
    let diff = c1(params, cfg)? - params.p * c2(params, cfg)?;
    let single = c1_minus_p_c2_single(params, cfg)?;
    let scale = diff.abs().max(single.abs()).max(1.0);
    if (diff - single).abs() > 1e3 * cfg.rel_tol * scale {
        return Err(Error::ToleranceNotReached {
            value: diff,
            error: (diff - single).abs(),
        });
    }
    Ok(diff)
}

/// The single-integral route for `c1 - p*c2` (independent of the
/// difference route up to shared quadrature machinery).
pub fn c1_minus_p_c2_single(params: &ProblemParams, cfg: &RadialQuadConfig) -> Result<f64> {
    let q = params.q();
    let n = params.n as f64;
    // split |z|^2(|z|^q-(p-1))(1+|z|^q)^{-n} into two convergent radial pieces
    let pos = RadialIntegralSpec::new(n + 1.0 + q, q, n)?;
    let neg = RadialIntegralSpec::new(n + 1.0, q, n)?;
    let area = sphere_area(params.n - 1)?;
    Ok(area * (radial_integral(&pos, cfg)? - (params.p - 1.0) * radial_integral(&neg, cfg)?))
}

/// The Sobolev constant together with the residual of the closed-form
/// relation tying it to `Sigma`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SobolevConstant {
    pub value: f64,
    /// Relative residual of `Sigma = n^{(p-n)/p} ((p-1)/(n-p))^{n(p-1)/p + 1} S^{n/p} / 2`.
    pub identity_residual: f64,
}

/// Best constant of the critical embedding, computed as the Rayleigh
/// quotient of the bubble on the full space:
/// `S = A^p * 2 Sigma / ((2 Sigma / n) * A)^{(n-p)/n}` with `A = (n-p)/(p-1)`.
/// Scale invariance makes the result independent of the bubble parameter.
pub fn sobolev_constant(params: &ProblemParams, cfg: &RadialQuadConfig) -> Result<SobolevConstant> {
    let sig = sigma(params, cfg)?;
    let n = params.n as f64;
    let p = params.p;
    let a = params.a_const();
    let grad_full = a.powf(p) * 2.0 * sig;
    let mass_full = (2.0 * sig / n) * a;
    let s = grad_full / mass_full.powf((n - p) / n);
    let rhs = n.powf((p - n) / p) * (1.0 / a).powf(n * (p - 1.0) / p + 1.0) * s.powf(n / p) / 2.0;
    Ok(SobolevConstant {
        value: s,
        identity_residual: (rhs - sig).abs() / sig.abs(),
    })
}

/// The concentration threshold `S / 2^{p/n}` below which minimizing
/// sequences stay compact.
pub fn threshold(params: &ProblemParams, cfg: &RadialQuadConfig) -> Result<f64> {
    let s = sobolev_constant(params, cfg)?;
    Ok(s.value / 2f64.powf(params.p / params.n as f64))
}

/// All universal constants for one `(n, p)` pair.
///
/// `c1` and `c_tilde` are `None` when the defining integral diverges for
/// the given exponents (with the divergence class recorded); `c_hat` is
/// the marginal-case log coefficient, which is only ever obtained by
/// fitting a sweep, so it starts out `None`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstantsBundle {
    pub n: usize,
    pub p: f64,
    pub sigma: f64,
    pub c1: Option<f64>,
    pub c2: f64,
    pub c_tilde: Option<f64>,
    pub c_hat: Option<f64>,
    pub sobolev: f64,
    pub threshold: f64,
    pub identity_residual: f64,
    pub rel_tol: f64,
}

impl ConstantsBundle {
    pub fn compute(params: &ProblemParams, cfg: &RadialQuadConfig) -> Result<ConstantsBundle> {
        let sig = sigma(params, cfg)?;
        let c1v = match c1(params, cfg) {
            Ok(v) => Some(v),
            Err(Error::LogDivergent { .. }) | Err(Error::DivergentIntegral { .. }) => None,
            Err(e) => return Err(e),
        };
        let c2v = c2(params, cfg)?;
        let ctv = match c_tilde(params, cfg) {
            Ok(v) => Some(v),
            Err(Error::LogDivergent { .. }) | Err(Error::DivergentIntegral { .. }) => None,
            Err(e) => return Err(e),
        };
        let sob = sobolev_constant(params, cfg)?;
        Ok(ConstantsBundle {
            n: params.n,
            p: params.p,
            sigma: sig,
            c1: c1v,
            c2: c2v,
            c_tilde: ctv,
            c_hat: None,
            sobolev: sob.value,
            threshold: sob.value / 2f64.powf(params.p / params.n as f64),
            identity_residual: sob.identity_residual,
            rel_tol: cfg.rel_tol,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn beta_oracle(a: f64, b: f64) -> f64 {
        statrs::function::beta::beta(a, b)
    }

    /// Closed form for the radial integral via the Beta identity
    /// `I(s,q,m) = B(s/q, m - s/q) / q`; test oracle only.
    fn radial_oracle(s: f64, q: f64, m: f64) -> f64 {
        beta_oracle(s / q, m - s / q) / q
    }

    #[test]
    fn sphere_area_known_values() {
        assert_relative_eq!(sphere_area(2).unwrap(), 2.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(sphere_area(3).unwrap(), 4.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(sphere_area(1).unwrap(), 2.0, max_relative = 1e-15);
        assert_relative_eq!(sphere_area(4).unwrap(), 2.0 * PI * PI, max_relative = 1e-15);
        assert!(sphere_area(0).is_err());
    }

    #[test]
    fn radial_integral_known_values() {
        let cfg = RadialQuadConfig::default();
        let v = radial_integral(&RadialIntegralSpec::new(1.0, 1.0, 2.0).unwrap(), &cfg).unwrap();
        assert_relative_eq!(v, 1.0, max_relative = 1e-10);
        let v = radial_integral(&RadialIntegralSpec::new(2.0, 2.0, 2.0).unwrap(), &cfg).unwrap();
        assert_relative_eq!(v, 0.5, max_relative = 1e-10);
        // Beta-identity oracle value pi/16
        let v = radial_integral(&RadialIntegralSpec::new(3.0, 2.0, 3.0).unwrap(), &cfg).unwrap();
        assert_relative_eq!(v, PI / 16.0, max_relative = 1e-10);
    }

    #[test]
    fn radial_integral_divergence_classes() {
        let cfg = RadialQuadConfig::default();
        let spec = RadialIntegralSpec::new(2.0, 1.0, 2.0).unwrap();
        assert_eq!(spec.classify(), Convergence::LogDivergent);
        assert!(matches!(
            radial_integral(&spec, &cfg),
            Err(Error::LogDivergent { .. })
        ));
        let spec = RadialIntegralSpec::new(3.0, 1.0, 2.0).unwrap();
        assert!(matches!(
            radial_integral(&spec, &cfg),
            Err(Error::DivergentIntegral { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn radial_integral_matches_beta_oracle(
            s in 0.3f64..6.0,
            q in 0.5f64..4.0,
            gap in 0.35f64..5.0,
        ) {
            let m = (s + gap) / q;
            let spec = RadialIntegralSpec::new(s, q, m).unwrap();
            prop_assume!(spec.classify() == Convergence::Convergent);
            let cfg = RadialQuadConfig::default();
            let v = radial_integral(&spec, &cfg).unwrap();
            let oracle = radial_oracle(s, q, m);
            prop_assert!((v - oracle).abs() / oracle < 1e-8,
                "I({s},{q},{m}) = {v} vs oracle {oracle}");
        }

        #[test]
        fn classification_matches_exponent_rule(
            s in 0.1f64..8.0,
            q in 0.2f64..5.0,
            m in 0.1f64..8.0,
        ) {
            let spec = RadialIntegralSpec::new(s, q, m).unwrap();
            let gap = q * m - s;
            let expected = if gap.abs() <= 1e-12 * s.max(1.0) {
                Convergence::LogDivergent
            } else if gap > 0.0 {
                Convergence::Convergent
            } else {
                Convergence::Divergent
            };
            prop_assert_eq!(spec.classify(), expected);
        }
    }

    #[test]
    fn sigma_is_half_the_full_space_integral() {
        let cfg = RadialQuadConfig::default();
        for (n, p) in [(3usize, 1.5f64), (4, 2.0), (5, 2.5)] {
            let params = ProblemParams::new(n, p).unwrap();
            let q = params.q();
            let full = sphere_area(n).unwrap()
                * radial_integral(
                    &RadialIntegralSpec::new(n as f64 + q, q, n as f64).unwrap(),
                    &cfg,
                )
                .unwrap();
            let half = sigma(&params, &cfg).unwrap();
            assert_relative_eq!(half, full / 2.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn sigma_oracle_values() {
        let cfg = RadialQuadConfig::default();
        // n=4, p=2: Sigma = pi^2/6 in closed form
        let params = ProblemParams::new(4, 2.0).unwrap();
        assert_relative_eq!(sigma(&params, &cfg).unwrap(), PI * PI / 6.0, max_relative = 1e-10);
        for (n, p) in [(3usize, 1.5f64), (4, 2.2)] {
            let params = ProblemParams::new(n, p).unwrap();
            let q = params.q();
            let oracle = sphere_area(n).unwrap() / 2.0 * radial_oracle(n as f64 + q, q, n as f64);
            assert_relative_eq!(sigma(&params, &cfg).unwrap(), oracle, max_relative = 1e-8);
        }
    }

    #[test]
    fn c1_divergence_boundary_is_sharp() {
        let cfg = RadialQuadConfig::default();
        for n in [3usize, 4, 5] {
            let p_marg = (n as f64 + 1.0) / 2.0;
            let params = ProblemParams::new(n, p_marg).unwrap();
            assert!(matches!(c1(&params, &cfg), Err(Error::LogDivergent { .. })));
            let params = ProblemParams::new(n, p_marg - 0.01).unwrap();
            assert!(c1(&params, &cfg).unwrap().is_finite());
            let params = ProblemParams::new(n, p_marg + 0.01).unwrap();
            assert!(matches!(c1(&params, &cfg), Err(Error::DivergentIntegral { .. })));
        }
    }

    #[test]
    fn c2_converges_where_c1_does_not_and_is_smaller() {
        let cfg = RadialQuadConfig::default();
        let params = ProblemParams::new(3, 2.0).unwrap();
        assert!(c2(&params, &cfg).unwrap() > 0.0);
        assert!(c1(&params, &cfg).is_err());
        let params = ProblemParams::new(4, 2.2).unwrap();
        let v1 = c1(&params, &cfg).unwrap();
        let v2 = c2(&params, &cfg).unwrap();
        assert!(v2 < v1);
        assert!(v2 > 0.0);
    }

    #[test]
    fn c_tilde_matches_oracle_and_detects_divergence() {
        let cfg = RadialQuadConfig::default();
        for (n, p) in [(4usize, 2.0f64), (3, 1.5), (2, 1.4)] {
            let params = ProblemParams::new(n, p).unwrap();
            let q = params.q();
            let oracle =
                sphere_area(n - 1).unwrap() * radial_oracle(n as f64 - 1.0, q, n as f64 - p);
            assert_relative_eq!(c_tilde(&params, &cfg).unwrap(), oracle, max_relative = 1e-8);
        }
        // boundary case n=3, p=2: q*m = 2 = s, log-divergent
        let params = ProblemParams::new(3, 2.0).unwrap();
        assert!(matches!(c_tilde(&params, &cfg), Err(Error::LogDivergent { .. })));
    }

    #[test]
    fn c1_minus_p_c2_positive_and_route_consistent() {
        let cfg = RadialQuadConfig::default();
        for (n, p) in [(4usize, 2.2f64), (5, 2.5)] {
            let params = ProblemParams::new(n, p).unwrap();
            let diff = c1_minus_p_c2(&params, &cfg).unwrap();
            let single = c1_minus_p_c2_single(&params, &cfg).unwrap();
            assert!(diff > 0.0);
            assert_relative_eq!(diff, single, max_relative = 1e-9);
        }
    }

    #[test]
    fn sobolev_constant_identity_and_classical_value() {
        let cfg = RadialQuadConfig::default();
        // p=2, n=4: S = 8 pi / sqrt(6) classically
        let params = ProblemParams::new(4, 2.0).unwrap();
        let s = sobolev_constant(&params, &cfg).unwrap();
        assert_relative_eq!(s.value, 8.0 * PI / 6f64.sqrt(), max_relative = 1e-10);
        assert!(s.identity_residual < 1e-10);
        for (n, p) in [(3usize, 1.5f64), (4, 2.2), (5, 2.5), (2, 1.4)] {
            let params = ProblemParams::new(n, p).unwrap();
            let s = sobolev_constant(&params, &cfg).unwrap();
            assert!(s.value > 0.0);
            assert!(s.identity_residual < 1e-8, "residual {}", s.identity_residual);
        }
    }

    #[test]
    fn sobolev_constant_matches_direct_quadrature_oracle() {
        // Independent oracle: Simpson quadrature of the two full-space
        // radial integrals at lambda = 1 on [0, A], plus the two leading
        // terms of the analytic power tail; no shared machinery.
        let params = ProblemParams::new(4, 2.0).unwrap();
        let (n, p, q) = (params.n as f64, params.p, params.q());
        let a = params.a_const();
        let grad = |r: f64| a.powf(p) * r.powf(q) / (1.0 + r.powf(q)).powf(n) * r.powf(n - 1.0);
        let mass = |r: f64| (1.0 + r.powf(q)).powf(-n) * r.powf(n - 1.0);
        let simpson = |f: &dyn Fn(f64) -> f64, a: f64, b: f64, k: usize| {
            let h = (b - a) / k as f64;
            let mut acc = f(a) + f(b);
            for i in 1..k {
                acc += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            acc * h / 3.0
        };
        // tail of int_A^inf r^{s-1}(1+r^q)^{-m}: r^{s-1-qm}(1 - m r^{-q} + ...)
        let tail = |s: f64, m: f64, cut: f64, scale: f64| {
            let t1 = cut.powf(s - q * m) / (q * m - s);
            let t2 = -m * cut.powf(s - q * m - q) / (q * m + q - s);
            scale * (t1 + t2)
        };
        let cut = 100.0;
        let area = sphere_area(4).unwrap();
        let g = area * (simpson(&grad, 0.0, cut, 1_000_000) + tail(n + q, n, cut, a.powf(p)));
        let m = area * (simpson(&mass, 0.0, cut, 1_000_000) + tail(n, n, cut, 1.0));
        let oracle = g / m.powf(p / params.p_star);
        let cfg = RadialQuadConfig::default();
        let s = sobolev_constant(&params, &cfg).unwrap();
        assert_relative_eq!(s.value, oracle, max_relative = 1e-8);
    }

    #[test]
    fn difference_positivity_grid() {
        // c1 - p*c2 > 0 across 2 < p < (n+1)/2 for n in {3,...,6}
        let cfg = RadialQuadConfig::default();
        for n in [4usize, 5, 6] {
            let lo = 2.0 + 1e-3;
            let hi = (n as f64 + 1.0) / 2.0 - 1e-3;
            for k in 0..20 {
                let p = lo + (hi - lo) * k as f64 / 19.0;
                let params = ProblemParams::new(n, p).unwrap();
                let v = c1_minus_p_c2(&params, &cfg).unwrap();
                assert!(v > 0.0, "c1 - p c2 = {v} at n={n}, p={p}");
            }
        }
    }

    #[test]
    fn bundle_collects_everything() {
        let cfg = RadialQuadConfig::default();
        let params = ProblemParams::new(4, 2.2).unwrap();
        let b = ConstantsBundle::compute(&params, &cfg).unwrap();
        assert!(b.sigma > 0.0 && b.c2 > 0.0 && b.sobolev > 0.0);
        assert!(b.c1.unwrap() > 0.0 && b.c_tilde.unwrap() > 0.0);
        assert!(b.c_hat.is_none());
        // marginal p: c1 absent, rest present
        let params = ProblemParams::new(3, 2.0).unwrap();
        let b = ConstantsBundle::compute(&params, &cfg).unwrap();
        assert!(b.c1.is_none());
        assert!(b.c2 > 0.0);
    }

    #[test]
    fn problem_params_validation() {
        assert!(ProblemParams::new(3, 1.0).is_err());
        assert!(ProblemParams::new(3, 3.0).is_err());
        assert!(ProblemParams::new(1, 0.5).is_err());
        let p = ProblemParams::new(4, 2.0).unwrap();
        assert_relative_eq!(p.p_star, 4.0, max_relative = 1e-15);
        assert!(p.p_star > p.p);
    }
}
