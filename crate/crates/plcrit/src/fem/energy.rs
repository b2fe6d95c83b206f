//! P1 assembly of the mixed-boundary energy and mass, with analytic
//! nodal gradients.
//!
//! The gradient term is exact for P1 fields (triangle-constant gradients,
//! with the regularized magnitude `(|grad u|^2 + eps^2)^{p/2}`). The
//! zero-order terms `int alpha |u|^p`, `int |u|^q` and the boundary line
//! integral are evaluated by lumped quadrature on a virtual subdivision
//! lattice of configurable depth: depth 0 is plain vertex lumping, and
//! depth `L` lumps on the `4^L` sub-triangles of each element. A mesh at
//! depth `L` and its uniform refinement at depth `L-1` evaluate *the same*
//! quadrature rule on any shared P1 field, which is what makes refinement
//! studies genuinely monotone.

use super::mesh::{BoundaryLabel, Mesh};
use crate::error::{Error, Result};
use crate::geometry::PotentialSpec;

/// Barycentric lattice of a subdivision depth: nodes and lumped weights
/// relative to the triangle area.
#[derive(Debug, Clone)]
struct TriLattice {
    /// Barycentric coordinates of the lattice nodes.
    bary: Vec<[f64; 3]>,
    /// Lumped weight of each node as a fraction of the triangle area.
    w: Vec<f64>,
}

impl TriLattice {
    fn new(depth: usize) -> Self {
        let m = 1usize << depth;
        let mf = m as f64;
        let mut bary = Vec::new();
        let mut w = Vec::new();
        for i in 0..=m {
            for j in 0..=(m - i) {
                let k = m - i - j;
                // incidence count: 1 at corners, 3 on edges, 6 inside
                let zeros = [i, j, k].iter().filter(|&&v| v == 0).count();
                let c = match zeros {
                    2 => 1.0,
                    1 => 3.0,
                    _ => 6.0,
                };
                bary.push([i as f64 / mf, j as f64 / mf, k as f64 / mf]);
                w.push(c / (3.0 * mf * mf));
            }
        }
        TriLattice { bary, w }
    }
}

/// 1-D trapezoid lattice on an edge at the matching depth.
#[derive(Debug, Clone)]
struct EdgeLattice {
    t: Vec<f64>,
    /// Weight fraction of the edge length.
    w: Vec<f64>,
}

impl EdgeLattice {
    fn new(depth: usize) -> Self {
        let m = 1usize << depth;
        let mf = m as f64;
        let mut t = Vec::new();
        let mut w = Vec::new();
        for i in 0..=m {
            t.push(i as f64 / mf);
            w.push(if i == 0 || i == m { 0.5 / mf } else { 1.0 / mf });
        }
        EdgeLattice { t, w }
    }
}

#[derive(Debug, Clone)]
struct Gamma1Edge {
    v0: usize,
    v1: usize,
    len: f64,
    /// beta at the edge lattice nodes.
    beta: Vec<f64>,
}

/// Precomputed geometry, potential samples and quadrature lattices for
/// one mesh.
#[derive(Debug, Clone)]
pub struct FemProblem {
    pub p: f64,
    areas: Vec<f64>,
    basis_grads: Vec<[[f64; 2]; 3]>,
    triangles: Vec<[usize; 3]>,
    lattice: TriLattice,
    /// alpha at the triangle lattice nodes (triangle-major) or a constant.
    alpha: AlphaSamples,
    gamma1: Vec<Gamma1Edge>,
    pub dirichlet: Vec<bool>,
    pub n_vertices: usize,
    pub zero_order_depth: usize,
}

#[derive(Debug, Clone)]
enum AlphaSamples {
    Constant(f64),
    PerNode(Vec<f64>),
}

impl FemProblem {
    /// Plain vertex-lumped zero-order terms.
    pub fn new(mesh: &Mesh, p: f64, pot: &PotentialSpec) -> Result<Self> {
        Self::with_depth(mesh, p, pot, 0)
    }

    /// Zero-order terms lumped on a depth-`depth` virtual subdivision.
    pub fn with_depth(mesh: &Mesh, p: f64, pot: &PotentialSpec, depth: usize) -> Result<Self> {
        if !(p > 1.0 && p < 2.0) {
            return Err(Error::InvalidArgument(format!(
                "planar problems need 1 < p < 2, got p = {p}"
            )));
        }
        if depth > 6 {
            return Err(Error::InvalidArgument("subdivision depth capped at 6".into()));
        }
        mesh.validate()?;
        let nv = mesh.vertices.len();
        let mut areas = Vec::with_capacity(mesh.triangles.len());
        let mut basis_grads = Vec::with_capacity(mesh.triangles.len());
        for (i, t) in mesh.triangles.iter().enumerate() {
            let a = mesh.vertices[t[0]];
            let b = mesh.vertices[t[1]];
            let c = mesh.vertices[t[2]];
            let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
            if det <= 0.0 {
                return Err(Error::InvalidGeometry(format!("triangle {i} not ccw")));
            }
            areas.push(0.5 * det);
            basis_grads.push([
                [(b[1] - c[1]) / det, (c[0] - b[0]) / det],
                [(c[1] - a[1]) / det, (a[0] - c[0]) / det],
                [(a[1] - b[1]) / det, (b[0] - a[0]) / det],
            ]);
        }
        let lattice = TriLattice::new(depth);
        let alpha = match pot.alpha.is_constant() {
            Some(c) => AlphaSamples::Constant(c),
            None => {
                let mut vals = Vec::with_capacity(mesh.triangles.len() * lattice.bary.len());
                for t in &mesh.triangles {
                    let (a, b, c) = (
                        mesh.vertices[t[0]],
                        mesh.vertices[t[1]],
                        mesh.vertices[t[2]],
                    );
                    for l in &lattice.bary {
                        let x = [
                            l[0] * a[0] + l[1] * b[0] + l[2] * c[0],
                            l[0] * a[1] + l[1] * b[1] + l[2] * c[1],
                        ];
                        vals.push(pot.alpha.eval(&x));
                    }
                }
                AlphaSamples::PerNode(vals)
            }
        };
        let edge_lattice = EdgeLattice::new(depth);
        let mut gamma1 = Vec::new();
        for e in &mesh.boundary_edges {
            if e.label == BoundaryLabel::Gamma1 {
                let (a, b) = (mesh.vertices[e.v0], mesh.vertices[e.v1]);
                let len = mesh.edge_length(e.v0, e.v1);
                let beta: Vec<f64> = edge_lattice
                    .t
                    .iter()
                    .map(|&t| {
                        let x = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                        pot.beta.eval(&x)
                    })
                    .collect();
                gamma1.push(Gamma1Edge {
                    v0: e.v0,
                    v1: e.v1,
                    len,
                    beta,
                });
            }
        }
        Ok(FemProblem {
            p,
            areas,
            basis_grads,
            triangles: mesh.triangles.clone(),
            lattice,
            alpha,
            gamma1,
            dirichlet: mesh.dirichlet_vertices(),
            n_vertices: nv,
            zero_order_depth: depth,
        })
    }

    pub fn p_star(&self) -> f64 {
        2.0 * self.p / (2.0 - self.p)
    }

    fn edge_lattice(&self) -> EdgeLattice {
        EdgeLattice::new(self.zero_order_depth)
    }
}

/// Assembled energy `E`, mass `M = int |u|^q`, and their nodal gradients.
#[derive(Debug, Clone)]
pub struct EnergyAssembly {
    pub e: f64,
    pub m: f64,
    pub grad_e: Vec<f64>,
    pub grad_m: Vec<f64>,
}

/// Assemble energy, mass and gradients at the nodal field `u`.
pub fn assemble_energy(prob: &FemProblem, u: &[f64], q: f64, eps_reg: f64) -> Result<EnergyAssembly> {
    if u.len() != prob.n_vertices {
        return Err(Error::InvalidArgument(format!(
            "field has {} entries, mesh has {} vertices",
            u.len(),
            prob.n_vertices
        )));
    }
    if q > prob.p_star() + 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "mass exponent q = {q} exceeds p* = {}",
            prob.p_star()
        )));
    }
    if eps_reg < 0.0 {
        return Err(Error::InvalidArgument("eps_reg must be >= 0".into()));
    }
    let p = prob.p;
    let nv = prob.n_vertices;
    let mut e = 0.0;
    let mut m = 0.0;
    let mut grad_e = vec![0.0; nv];
    let mut grad_m = vec![0.0; nv];
    let nlat = prob.lattice.bary.len();
    for (ti, ((t, area), bg)) in prob
        .triangles
        .iter()
        .zip(&prob.areas)
        .zip(&prob.basis_grads)
        .enumerate()
    {
        // gradient term: trianglewise constant
        let mut gx = 0.0;
        let mut gy = 0.0;
        for k in 0..3 {
            gx += u[t[k]] * bg[k][0];
            gy += u[t[k]] * bg[k][1];
        }
        let g2 = gx * gx + gy * gy + eps_reg * eps_reg;
        if g2 > 0.0 {
            e += area * g2.powf(p / 2.0);
            let coef = area * p * g2.powf(p / 2.0 - 1.0);
            for k in 0..3 {
                grad_e[t[k]] += coef * (gx * bg[k][0] + gy * bg[k][1]);
            }
        }
        // zero-order terms on the lattice
        let (ua, ub, uc) = (u[t[0]], u[t[1]], u[t[2]]);
        for (li, (l, wl)) in prob
            .lattice
            .bary
            .iter()
            .zip(&prob.lattice.w)
            .enumerate()
        {
            let uv = l[0] * ua + l[1] * ub + l[2] * uc;
            let a = uv.abs();
            if a == 0.0 {
                continue;
            }
            let w = area * wl;
            let alpha = match &prob.alpha {
                AlphaSamples::Constant(c) => *c,
                AlphaSamples::PerNode(vals) => vals[ti * nlat + li],
            };
            if alpha != 0.0 {
                let wa = w * alpha;
                e += wa * a.powf(p);
                let de = wa * p * a.powf(p - 1.0) * uv.signum();
                for k in 0..3 {
                    grad_e[t[k]] += de * l[k];
                }
            }
            let dm = w * q * a.powf(q - 1.0) * uv.signum();
            m += w * a.powf(q);
            for k in 0..3 {
                grad_m[t[k]] += dm * l[k];
            }
        }
    }
    // boundary line integral on Gamma_1
    let el = prob.edge_lattice();
    for edge in &prob.gamma1 {
        let (u0, u1) = (u[edge.v0], u[edge.v1]);
        for ((&t, &wl), &beta) in el.t.iter().zip(&el.w).zip(&edge.beta) {
            if beta == 0.0 {
                continue;
            }
            let uv = u0 + t * (u1 - u0);
            let a = uv.abs();
            if a == 0.0 {
                continue;
            }
            let w = edge.len * wl * beta;
            e += w * a.powf(p);
            let de = w * p * a.powf(p - 1.0) * uv.signum();
            grad_e[edge.v0] += de * (1.0 - t);
            grad_e[edge.v1] += de * t;
        }
    }
    Ok(EnergyAssembly { e, m, grad_e, grad_m })
}

/// The quotient `J = E / M^{p/q}` evaluated without regularization (the
/// value that is reported and compared against thresholds). Homogeneous
/// of degree zero in `u`.
pub fn quotient(prob: &FemProblem, u: &[f64], q: f64) -> Result<f64> {
    let asm = assemble_energy(prob, u, q, 0.0)?;
    if asm.m <= 0.0 {
        return Err(Error::InvalidArgument("mass of the field vanishes".into()));
    }
    Ok(asm.e / asm.m.powf(prob.p / q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::mesh::{triangulate, LabeledPolygon};
    use approx::assert_relative_eq;

    fn square_all_gamma1() -> Mesh {
        use BoundaryLabel::*;
        let poly = LabeledPolygon::rectangle(1.0, 1.0, [Gamma1; 4]).unwrap();
        triangulate(&poly, 0.2).unwrap()
    }

    #[test]
    fn zero_field_and_constant_field() {
        let mesh = square_all_gamma1();
        let pot = PotentialSpec::constants(0.7, -0.3);
        for depth in [0usize, 2] {
            let prob = FemProblem::with_depth(&mesh, 1.4, &pot, depth).unwrap();
            let u = vec![0.0; mesh.vertices.len()];
            let asm = assemble_energy(&prob, &u, 1.4, 0.0).unwrap();
            assert_eq!(asm.e, 0.0);
            assert_eq!(asm.m, 0.0);
            // constant 1: E = alpha |Omega| + beta |Gamma_1|, M = |Omega|
            let u = vec![1.0; mesh.vertices.len()];
            let asm = assemble_energy(&prob, &u, 1.4, 0.0).unwrap();
            let area = mesh.total_area();
            let perim = mesh.gamma1_length();
            assert_relative_eq!(asm.e, 0.7 * area - 0.3 * perim, max_relative = 1e-12);
            assert_relative_eq!(asm.m, area, max_relative = 1e-12);
        }
    }

    #[test]
    fn constant_field_quotient_with_q_equal_p() {
        // alpha = 1, beta = 0, q = p: J(const) = alpha * |Omega|^{1 - p/q} = 1
        let mesh = square_all_gamma1();
        let pot = PotentialSpec::constants(1.0, 0.0);
        let prob = FemProblem::new(&mesh, 1.4, &pot).unwrap();
        let u = vec![3.7; mesh.vertices.len()];
        let j = quotient(&prob, &u, 1.4).unwrap();
        assert_relative_eq!(j, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn quotient_is_zero_homogeneous() {
        let mesh = square_all_gamma1();
        let pot = PotentialSpec::constants(1.0, -0.5);
        let prob = FemProblem::new(&mesh, 1.4, &pot).unwrap();
        let mut state = 0x2545f4914f6cdd1du64;
        let mut rnd = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let u: Vec<f64> = (0..mesh.vertices.len()).map(|_| rnd() - 0.3).collect();
        let q = 3.0;
        let j0 = quotient(&prob, &u, q).unwrap();
        for c in [0.1, 3.0, 100.0] {
            let v: Vec<f64> = u.iter().map(|x| c * x).collect();
            let j = quotient(&prob, &v, q).unwrap();
            assert_relative_eq!(j, j0, max_relative = 1e-12);
        }
    }

    #[test]
    fn refined_mesh_at_lower_depth_reproduces_the_functional() {
        // depth L on the coarse mesh and depth L-1 on its refinement are
        // the same quadrature rule for any shared field
        let mesh = square_all_gamma1();
        let fine = mesh.refine_uniform();
        let pot = PotentialSpec::constants(0.8, -0.6);
        let coarse_prob = FemProblem::with_depth(&mesh, 1.4, &pot, 2).unwrap();
        let fine_prob = FemProblem::with_depth(&fine, 1.4, &pot, 1).unwrap();
        let u: Vec<f64> = mesh
            .vertices
            .iter()
            .map(|v| (3.0 * v[0]).sin() + v[1] * v[1] + 0.5)
            .collect();
        let uf = fine.interpolate_from(&mesh, &u);
        let q = 3.3;
        let a = assemble_energy(&coarse_prob, &u, q, 0.0).unwrap();
        let b = assemble_energy(&fine_prob, &uf, q, 0.0).unwrap();
        assert_relative_eq!(a.e, b.e, max_relative = 1e-12);
        assert_relative_eq!(a.m, b.m, max_relative = 1e-12);
    }

    #[test]
    fn lattice_weights_sum_to_one() {
        for depth in 0..4 {
            let lat = TriLattice::new(depth);
            let total: f64 = lat.w.iter().sum();
            assert_relative_eq!(total, 1.0, max_relative = 1e-14);
            let el = EdgeLattice::new(depth);
            let total: f64 = el.w.iter().sum();
            assert_relative_eq!(total, 1.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mesh = square_all_gamma1();
        let pot = PotentialSpec::constants(1.0, -1.0);
        let prob = FemProblem::with_depth(&mesh, 1.4, &pot, 1).unwrap();
        let nv = mesh.vertices.len();
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut rnd = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        // field bounded away from zero keeps |u|^{p-1} smooth
        let u: Vec<f64> = (0..nv).map(|_| 0.5 + rnd()).collect();
        let q = 4.0;
        let eps = 1e-3;
        let asm = assemble_energy(&prob, &u, q, eps).unwrap();
        for _ in 0..20 {
            let d: Vec<f64> = (0..nv).map(|_| rnd() - 0.5).collect();
            let ge: f64 = asm.grad_e.iter().zip(&d).map(|(g, di)| g * di).sum();
            let gm: f64 = asm.grad_m.iter().zip(&d).map(|(g, di)| g * di).sum();
            let mut errs = Vec::new();
            for s in [1e-4, 5e-5] {
                let up: Vec<f64> = u.iter().zip(&d).map(|(x, di)| x + s * di).collect();
                let um: Vec<f64> = u.iter().zip(&d).map(|(x, di)| x - s * di).collect();
                let ap = assemble_energy(&prob, &up, q, eps).unwrap();
                let am = assemble_energy(&prob, &um, q, eps).unwrap();
                let fde = (ap.e - am.e) / (2.0 * s);
                let fdm = (ap.m - am.m) / (2.0 * s);
                errs.push((fde - ge).abs());
                assert!((fde - ge).abs() <= 1e-6 * ge.abs().max(1.0), "E fd {fde} vs {ge}");
                assert!((fdm - gm).abs() <= 1e-6 * gm.abs().max(1.0), "M fd {fdm} vs {gm}");
            }
            // halving the step shrinks the residual about quadratically
            if errs[0] > 1e-12 {
                assert!(errs[1] <= 0.6 * errs[0] + 1e-12);
            }
        }
    }

    #[test]
    fn mass_exponent_capped_at_critical() {
        let mesh = square_all_gamma1();
        let pot = PotentialSpec::constants(1.0, 0.0);
        let prob = FemProblem::new(&mesh, 1.4, &pot).unwrap();
        let u = vec![1.0; mesh.vertices.len()];
        let p_star = prob.p_star();
        assert!(assemble_energy(&prob, &u, p_star, 0.0).is_ok());
        assert!(assemble_energy(&prob, &u, p_star + 0.1, 0.0).is_err());
    }
}
