//! Adaptive Gauss-Kronrod quadrature, Gauss-Legendre rules and product
//! quadrature on spheres.
//!
//! The whole crate funnels its one-dimensional integrals through
//! [`adaptive`] / [`adaptive_seeded`]: a 7-15 Gauss-Kronrod pair with
//! error-driven bisection of the worst segment. Subdivision order is
//! deterministic (worst error first, ties broken by the left endpoint),
//! so results are bit-reproducible for a fixed integrand.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Outcome of a numerical integration together with its error estimate.
#[derive(Debug, Clone, Copy)]
pub struct IntegralEstimate {
    pub value: f64,
    /// Estimated absolute error.
    pub error: f64,
    /// False when the cell budget was exhausted before the tolerance.
    pub converged: bool,
    pub evaluations: usize,
}

impl IntegralEstimate {
    fn exact(value: f64) -> Self {
        IntegralEstimate {
            value,
            error: 0.0,
            converged: true,
            evaluations: 0,
        }
    }
}

// 7-point Gauss / 15-point Kronrod pair (positive abscissae).
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One 15-point Kronrod evaluation on `[a, b]`; returns (value, error estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut resabs = fc.abs() * WGK[7];
    let mut fv = [0.0f64; 15];
    fv[7] = fc;
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv[j] = f1;
        fv[14 - j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = kronrod * 0.5;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }
    resasc *= half.abs();
    resabs *= half.abs();
    let value = kronrod * half;
    let mut err = ((kronrod - gauss) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (value, err)
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error && self.a == other.a
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Adaptively integrate `f` over `[a, b]`.
pub fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_cells: usize,
) -> IntegralEstimate {
    adaptive_seeded(f, &[a, b], rel_tol, abs_tol, max_cells)
}

/// Adaptive integration over the union of the segments delimited by
/// `seeds` (strictly increasing breakpoints). Seeding lets callers mark
/// known scale transitions (peaks, cutoff radii) up front.
pub fn adaptive_seeded<F: Fn(f64) -> f64>(
    f: &F,
    seeds: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_cells: usize,
) -> IntegralEstimate {
    debug_assert!(seeds.len() >= 2);
    if seeds.first() == seeds.last() {
        return IntegralEstimate::exact(0.0);
    }
    let mut heap: BinaryHeap<Segment> = BinaryHeap::new();
    let mut evals = 0usize;
    for w in seeds.windows(2) {
        if w[1] > w[0] {
            let (v, e) = gk15(f, w[0], w[1]);
            evals += 15;
            heap.push(Segment {
                a: w[0],
                b: w[1],
                value: v,
                error: e,
            });
        }
    }
    let mut cells = heap.len();
    loop {
        let total: f64 = heap.iter().map(|s| s.value).sum();
        let err: f64 = heap.iter().map(|s| s.error).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return IntegralEstimate {
                value: total,
                error: err,
                converged: true,
                evaluations: evals,
            };
        }
        if cells >= max_cells {
            return IntegralEstimate {
                value: total,
                error: err,
                converged: false,
                evaluations: evals,
            };
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval at floating point resolution; freeze it
            let mut frozen = worst;
            frozen.error = 0.0;
            heap.push(frozen);
            continue;
        }
        let (v1, e1) = gk15(f, worst.a, mid);
        let (v2, e2) = gk15(f, mid, worst.b);
        evals += 30;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        cells += 1;
    }
}

/// Integrate a radial profile `f` over `[0, r_max]` whose features live at
/// the length `scale` (for bubble integrands, `lambda^{-(p-1)}`). The
/// integral is evaluated in the stretched variable `u = r / scale` with
/// `segments` geometric seed points between the peak region and the outer
/// radius, which is the `peak_rescale` path.
pub fn integrate_radial_peaked<F: Fn(f64) -> f64>(
    f: &F,
    r_max: f64,
    scale: f64,
    segments: usize,
    rel_tol: f64,
    abs_tol: f64,
    max_cells: usize,
) -> IntegralEstimate {
    let upper = r_max / scale;
    let mut seeds = vec![0.0];
    if upper > 1.0 {
        let k = segments.max(2);
        for i in 0..k {
            seeds.push(upper.powf(i as f64 / k as f64));
        }
    }
    seeds.push(upper);
    seeds.dedup_by(|a, b| a == b);
    let g = |u: f64| f(u * scale) * scale;
    adaptive_seeded(&g, &seeds, rel_tol, abs_tol, max_cells)
}

/// Nodes and weights of the `order`-point Gauss-Legendre rule on [-1, 1],
/// computed by Newton iteration on the Legendre polynomial.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n and P_n' by recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = pk;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// A product quadrature rule on the unit sphere `S^{d-1}` in `R^d`
/// (for `d = 1` this is the two-point counting measure on {-1, +1}).
#[derive(Debug, Clone)]
pub struct SphereRule {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    /// Build a rule with roughly `res` nodes per angular level.
    pub fn new(d: usize, res: usize) -> SphereRule {
        assert!(d >= 1);
        let res = res.max(4);
        match d {
            1 => SphereRule {
                points: vec![vec![1.0], vec![-1.0]],
                weights: vec![1.0, 1.0],
            },
            2 => {
                // trapezoid on the circle: spectrally accurate for periodic integrands
                let k = res.max(8);
                let mut points = Vec::with_capacity(k);
                let mut weights = Vec::with_capacity(k);
                for j in 0..k {
                    let th = 2.0 * std::f64::consts::PI * j as f64 / k as f64;
                    points.push(vec![th.cos(), th.sin()]);
                    weights.push(2.0 * std::f64::consts::PI / k as f64);
                }
                SphereRule { points, weights }
            }
            _ => {
                // x = (sin(theta) * omega, cos(theta)), dS = sin(theta)^{d-2} dtheta dS_{d-1}
                let inner = SphereRule::new(d - 1, res);
                let k = res.max(8);
                let (gl_x, gl_w) = gauss_legendre(k);
                let mut points = Vec::new();
                let mut weights = Vec::new();
                for (x, w) in gl_x.iter().zip(gl_w.iter()) {
                    // map [-1,1] -> [0, pi]
                    let theta = 0.5 * std::f64::consts::PI * (x + 1.0);
                    let jac = 0.5 * std::f64::consts::PI * w;
                    let s = theta.sin();
                    let c = theta.cos();
                    let sf = s.powi(d as i32 - 2);
                    for (pt, iw) in inner.points.iter().zip(inner.weights.iter()) {
                        let mut v = Vec::with_capacity(d);
                        for q in pt {
                            v.push(s * q);
                        }
                        v.push(c);
                        points.push(v);
                        weights.push(jac * sf * iw);
                    }
                }
                SphereRule { points, weights }
            }
        }
    }
}
