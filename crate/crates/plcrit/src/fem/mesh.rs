//! Labeled planar triangulations: generation from a labeled polygon
//! outline, uniform refinement, and a plain-text interchange format.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use spade::{ConstrainedDelaunayTriangulation, Point2, Triangulation};
use std::collections::HashMap;
use std::io::{BufRead, Write};

/// Which part of the mixed boundary an edge belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryLabel {
    /// Dirichlet part (u = 0).
    Gamma0,
    /// Natural / Robin part carrying the beta line integral.
    Gamma1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub v0: usize,
    pub v1: usize,
    pub label: BoundaryLabel,
}

/// A conforming triangulation with labeled boundary edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
}

/// Minimum admissible triangle area relative to the squared mesh scale.
const AREA_EPS: f64 = 1e-12;

/// A simple polygon with one label per edge `(v[i], v[i+1 mod m])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPolygon {
    pub vertices: Vec<[f64; 2]>,
    pub labels: Vec<BoundaryLabel>,
}

impl LabeledPolygon {
    pub fn new(vertices: Vec<[f64; 2]>, labels: Vec<BoundaryLabel>) -> Result<Self> {
        if vertices.len() < 3 || labels.len() != vertices.len() {
            return Err(Error::InvalidGeometry(format!(
                "polygon needs >= 3 vertices and one label per edge (got {} / {})",
                vertices.len(),
                labels.len()
            )));
        }
        let poly = LabeledPolygon { vertices, labels };
        poly.check_simple()?;
        Ok(poly)
    }

    /// Upper half-disk of the given radius: the flat diameter is labeled
    /// `Gamma1`, the arc (approximated by `segments` chords) `Gamma0`.
    pub fn half_disk(radius: f64, segments: usize) -> Result<Self> {
        if !(radius > 0.0) || segments < 8 {
            return Err(Error::InvalidGeometry(
                "half disk needs a positive radius and >= 8 arc segments".into(),
            ));
        }
        let mut v = vec![[-radius, 0.0], [radius, 0.0]];
        let mut labels = vec![BoundaryLabel::Gamma1]; // the flat edge as one labeled run
        // arc from (radius, 0) counterclockwise to (-radius, 0)
        for i in 1..segments {
            let th = std::f64::consts::PI * i as f64 / segments as f64;
            v.push([radius * th.cos(), radius * th.sin()]);
            labels.push(BoundaryLabel::Gamma0);
        }
        labels.push(BoundaryLabel::Gamma0);
        LabeledPolygon::new(v, labels)
    }

    /// Axis-aligned rectangle `[0, w] x [0, h]` with labels for the
    /// bottom, right, top and left sides in that order.
    pub fn rectangle(w: f64, h: f64, sides: [BoundaryLabel; 4]) -> Result<Self> {
        if !(w > 0.0 && h > 0.0) {
            return Err(Error::InvalidGeometry("rectangle sides must be positive".into()));
        }
        LabeledPolygon::new(
            vec![[0.0, 0.0], [w, 0.0], [w, h], [0.0, h]],
            sides.to_vec(),
        )
    }

    fn signed_area(&self) -> f64 {
        let v = &self.vertices;
        let m = v.len();
        let mut acc = 0.0;
        for i in 0..m {
            let j = (i + 1) % m;
            acc += v[i][0] * v[j][1] - v[j][0] * v[i][1];
        }
        acc / 2.0
    }

    fn check_simple(&self) -> Result<()> {
        let v = &self.vertices;
        let m = v.len();
        if self.signed_area().abs() < 1e-14 {
            return Err(Error::InvalidGeometry("degenerate polygon".into()));
        }
        for i in 0..m {
            for j in i + 1..m {
                // skip edges sharing a vertex
                if j == i || (j + 1) % m == i || (i + 1) % m == j {
                    continue;
                }
                if segments_intersect(
                    v[i],
                    v[(i + 1) % m],
                    v[j],
                    v[(j + 1) % m],
                ) {
                    return Err(Error::InvalidGeometry(format!(
                        "outline self-intersects (edges {i} and {j})"
                    )));
                }
            }
        }
        Ok(())
    }

    fn contains(&self, p: [f64; 2]) -> bool {
        // ray casting
        let v = &self.vertices;
        let m = v.len();
        let mut inside = false;
        for i in 0..m {
            let a = v[i];
            let b = v[(i + 1) % m];
            if (a[1] > p[1]) != (b[1] > p[1]) {
                let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
                if p[0] < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    fn distance_to_boundary(&self, p: [f64; 2]) -> f64 {
        let v = &self.vertices;
        let m = v.len();
        let mut best = f64::INFINITY;
        for i in 0..m {
            best = best.min(point_segment_distance(p, v[i], v[(i + 1) % m]));
        }
        best
    }
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_intersect(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    false
}

fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let dx = p[0] - (a[0] + t * ab[0]);
    let dy = p[1] - (a[1] + t * ab[1]);
    (dx * dx + dy * dy).sqrt()
}

/// Triangulate a labeled polygon with target edge length `h`: boundary
/// edges are resampled at spacing <= h, interior points come from a
/// hexagonal lattice with clearance from the boundary, and the
/// triangulation is a constrained Delaunay triangulation of the result.
pub fn triangulate(outline: &LabeledPolygon, h: f64) -> Result<Mesh> {
    if !(h > 0.0) {
        return Err(Error::InvalidGeometry("target edge length must be positive".into()));
    }
    outline.check_simple()?;

    // resampled boundary points with per-segment labels
    let mut bpoints: Vec<[f64; 2]> = Vec::new();
    let mut bsegments: Vec<(usize, usize, BoundaryLabel)> = Vec::new();
    let m = outline.vertices.len();
    for i in 0..m {
        let a = outline.vertices[i];
        let b = outline.vertices[(i + 1) % m];
        let label = outline.labels[i];
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        let pieces = (len / h).ceil().max(1.0) as usize;
        let start = bpoints.len();
        bpoints.push(a);
        for k in 1..pieces {
            let t = k as f64 / pieces as f64;
            bpoints.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
        for k in 0..pieces {
            // the last segment of the last edge closes onto point 0
            let from = start + k;
            let to = if i == m - 1 && k == pieces - 1 {
                0
            } else {
                start + k + 1
            };
            bsegments.push((from, to, label));
        }
    }

    // interior lattice
    let (mut xmin, mut ymin, mut xmax, mut ymax) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for v in &outline.vertices {
        xmin = xmin.min(v[0]);
        ymin = ymin.min(v[1]);
        xmax = xmax.max(v[0]);
        ymax = ymax.max(v[1]);
    }
    // clearance tuned so boundary-to-interior gaps stay below 1.5 h
    let row_h = h * 3f64.sqrt() / 2.0;
    let clearance = 0.45 * h;
    let mut interior: Vec<[f64; 2]> = Vec::new();
    let mut j = 0usize;
    let mut y = ymin + row_h;
    while y < ymax {
        let off = if j % 2 == 1 { 0.5 * h } else { 0.0 };
        let mut x = xmin + off;
        while x < xmax {
            let p = [x, y];
            if outline.contains(p) && outline.distance_to_boundary(p) > clearance {
                interior.push(p);
            }
            x += h;
        }
        y += row_h;
        j += 1;
    }

    // constrained Delaunay triangulation
    let mut cdt: ConstrainedDelaunayTriangulation<Point2<f64>> =
        ConstrainedDelaunayTriangulation::new();
    let mut handles = Vec::with_capacity(bpoints.len());
    for p in &bpoints {
        let hdl = cdt
            .insert(Point2::new(p[0], p[1]))
            .map_err(|e| Error::InvalidGeometry(format!("insertion failed: {e:?}")))?;
        handles.push(hdl);
    }
    for &(a, b, _) in &bsegments {
        if cdt.can_add_constraint(handles[a], handles[b]) {
            cdt.add_constraint(handles[a], handles[b]);
        } else {
            return Err(Error::InvalidGeometry(
                "boundary constraint could not be added (outline too irregular for h)".into(),
            ));
        }
    }
    for p in &interior {
        cdt.insert(Point2::new(p[0], p[1]))
            .map_err(|e| Error::InvalidGeometry(format!("insertion failed: {e:?}")))?;
    }

    // collect vertices in handle order
    let mut vertices: Vec<[f64; 2]> = Vec::with_capacity(cdt.num_vertices());
    for v in cdt.vertices() {
        let pos = v.position();
        vertices.push([pos.x, pos.y]);
    }
    // keep faces whose centroid lies inside the outline
    let mut triangles = Vec::new();
    for face in cdt.inner_faces() {
        let vs = face.vertices();
        let idx = [vs[0].fix().index(), vs[1].fix().index(), vs[2].fix().index()];
        let c = [
            (vertices[idx[0]][0] + vertices[idx[1]][0] + vertices[idx[2]][0]) / 3.0,
            (vertices[idx[0]][1] + vertices[idx[1]][1] + vertices[idx[2]][1]) / 3.0,
        ];
        if outline.contains(c) {
            triangles.push(orient_ccw(&vertices, idx));
        }
    }
    if triangles.is_empty() {
        return Err(Error::InvalidGeometry("triangulation produced no interior faces".into()));
    }

    // drop unused vertices and remap
    let mut used = vec![false; vertices.len()];
    for t in &triangles {
        for &i in t {
            used[i] = true;
        }
    }
    let mut remap = vec![usize::MAX; vertices.len()];
    let mut packed = Vec::new();
    for (i, v) in vertices.iter().enumerate() {
        if used[i] {
            remap[i] = packed.len();
            packed.push(*v);
        }
    }
    let triangles: Vec<[usize; 3]> = triangles
        .iter()
        .map(|t| [remap[t[0]], remap[t[1]], remap[t[2]]])
        .collect();
    let vertices = packed;

    // boundary edges: edges incident to exactly one kept triangle
    let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
    for t in &triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            let key = (a.min(b), a.max(b));
            *edge_count.entry(key).or_insert(0) += 1;
        }
    }
    let mut boundary_edges = Vec::new();
    for (&(a, b), &cnt) in edge_count.iter() {
        if cnt == 1 {
            let mid = [
                0.5 * (vertices[a][0] + vertices[b][0]),
                0.5 * (vertices[a][1] + vertices[b][1]),
            ];
            let label = nearest_outline_label(outline, mid, h)?;
            boundary_edges.push(BoundaryEdge { v0: a, v1: b, label });
        }
    }
    boundary_edges.sort_by_key(|e| (e.v0, e.v1));

    let mesh = Mesh {
        vertices,
        triangles,
        boundary_edges,
    };
    mesh.validate()?;
    Ok(mesh)
}

fn orient_ccw(vertices: &[[f64; 2]], t: [usize; 3]) -> [usize; 3] {
    if orient(vertices[t[0]], vertices[t[1]], vertices[t[2]]) > 0.0 {
        t
    } else {
        [t[0], t[2], t[1]]
    }
}

fn nearest_outline_label(
    outline: &LabeledPolygon,
    p: [f64; 2],
    h: f64,
) -> Result<BoundaryLabel> {
    let m = outline.vertices.len();
    let mut best = (f64::INFINITY, BoundaryLabel::Gamma0);
    for i in 0..m {
        let d = point_segment_distance(p, outline.vertices[i], outline.vertices[(i + 1) % m]);
        if d < best.0 {
            best = (d, outline.labels[i]);
        }
    }
    if best.0 > 0.25 * h {
        return Err(Error::InvalidGeometry(format!(
            "boundary edge midpoint {p:?} is {:.3e} away from the outline",
            best.0
        )));
    }
    Ok(best.1)
}

impl Mesh {
    /// Structural invariants: positive orientation, non-degenerate areas,
    /// every boundary edge labeled exactly once, positive Gamma_1 length.
    pub fn validate(&self) -> Result<()> {
        for (i, t) in self.triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= self.vertices.len()) {
                return Err(Error::InvalidGeometry(format!("triangle {i} has a bad index")));
            }
            let area = self.triangle_area(i);
            if area <= AREA_EPS {
                return Err(Error::InvalidGeometry(format!(
                    "triangle {i} is degenerate (area {area:.3e})"
                )));
            }
        }
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *edge_count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        let mut labeled: HashMap<(usize, usize), usize> = HashMap::new();
        for e in &self.boundary_edges {
            let key = (e.v0.min(e.v1), e.v0.max(e.v1));
            *labeled.entry(key).or_insert(0) += 1;
        }
        for (key, &cnt) in edge_count.iter() {
            let lab = labeled.get(key).copied().unwrap_or(0);
            match cnt {
                1 if lab != 1 => {
                    return Err(Error::InvalidGeometry(format!(
                        "boundary edge {key:?} labeled {lab} times"
                    )))
                }
                2 if lab != 0 => {
                    return Err(Error::InvalidGeometry(format!(
                        "interior edge {key:?} carries a boundary label"
                    )))
                }
                1 | 2 => {}
                _ => {
                    return Err(Error::InvalidGeometry(format!(
                        "edge {key:?} belongs to {cnt} triangles"
                    )))
                }
            }
        }
        if labeled.len() != self.boundary_edges.len() {
            return Err(Error::InvalidGeometry("duplicate boundary edges".into()));
        }
        if self.gamma1_length() <= 0.0 {
            return Err(Error::InvalidGeometry("Gamma_1 must have positive length".into()));
        }
        Ok(())
    }

    pub fn triangle_area(&self, i: usize) -> f64 {
        let [a, b, c] = self.triangles[i];
        0.5 * orient(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|i| self.triangle_area(i)).sum()
    }

    pub fn edge_length(&self, a: usize, b: usize) -> f64 {
        let (p, q) = (self.vertices[a], self.vertices[b]);
        ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
    }

    pub fn gamma1_length(&self) -> f64 {
        self.boundary_edges
            .iter()
            .filter(|e| e.label == BoundaryLabel::Gamma1)
            .map(|e| self.edge_length(e.v0, e.v1))
            .sum()
    }

    pub fn max_edge_length(&self) -> f64 {
        let mut best = 0.0f64;
        for t in &self.triangles {
            for k in 0..3 {
                best = best.max(self.edge_length(t[k], t[(k + 1) % 3]));
            }
        }
        best
    }

    /// Vertices on the Dirichlet part of the boundary.
    pub fn dirichlet_vertices(&self) -> Vec<bool> {
        let mut d = vec![false; self.vertices.len()];
        for e in &self.boundary_edges {
            if e.label == BoundaryLabel::Gamma0 {
                d[e.v0] = true;
                d[e.v1] = true;
            }
        }
        d
    }

    /// Uniform refinement: every triangle splits into four by edge
    /// midpoints; boundary edges split in two and inherit their label.
    /// The refined P1 space contains the coarse one exactly.
    pub fn refine_uniform(&self) -> Mesh {
        let mut vertices = self.vertices.clone();
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, vertices: &mut Vec<[f64; 2]>| -> usize {
            let key = (a.min(b), a.max(b));
            if let Some(&i) = midpoint.get(&key) {
                return i;
            }
            let p = [
                0.5 * (vertices[a][0] + vertices[b][0]),
                0.5 * (vertices[a][1] + vertices[b][1]),
            ];
            vertices.push(p);
            let i = vertices.len() - 1;
            midpoint.insert(key, i);
            i
        };
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for &[a, b, c] in &self.triangles {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            triangles.push([a, ab, ca]);
            triangles.push([ab, b, bc]);
            triangles.push([ca, bc, c]);
            triangles.push([ab, bc, ca]);
        }
        let mut boundary_edges = Vec::with_capacity(2 * self.boundary_edges.len());
        for e in &self.boundary_edges {
            let m = mid(e.v0, e.v1, &mut vertices);
            boundary_edges.push(BoundaryEdge {
                v0: e.v0,
                v1: m,
                label: e.label,
            });
            boundary_edges.push(BoundaryEdge {
                v0: m,
                v1: e.v1,
                label: e.label,
            });
        }
        boundary_edges.sort_by_key(|e| (e.v0, e.v1));
        Mesh {
            vertices,
            triangles,
            boundary_edges,
        }
    }

    /// Interpolate a P1 field from `coarse` onto this mesh's vertices
    /// (barycentric evaluation; points outside the coarse mesh clamp to
    /// the nearest triangle).
    pub fn interpolate_from(&self, coarse: &Mesh, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.vertices.len()];
        for (i, p) in self.vertices.iter().enumerate() {
            let mut best = (f64::INFINITY, 0.0);
            for (ti, t) in coarse.triangles.iter().enumerate() {
                let (a, b, c) = (
                    coarse.vertices[t[0]],
                    coarse.vertices[t[1]],
                    coarse.vertices[t[2]],
                );
                let det = orient(a, b, c);
                if det.abs() < 1e-30 {
                    continue;
                }
                let l0 = orient(*p, b, c) / det;
                let l1 = orient(a, *p, c) / det;
                let l2 = 1.0 - l0 - l1;
                let deficiency = (-l0).max(0.0) + (-l1).max(0.0) + (-l2).max(0.0);
                if deficiency < best.0 {
                    let l0c = l0.clamp(0.0, 1.0);
                    let l1c = l1.clamp(0.0, 1.0);
                    let l2c = (1.0 - l0c - l1c).clamp(0.0, 1.0);
                    best = (
                        deficiency,
                        l0c * u[t[0]] + l1c * u[t[1]] + l2c * u[t[2]],
                    );
                    let _ = ti;
                    if deficiency == 0.0 {
                        break;
                    }
                }
            }
            out[i] = best.1;
        }
        out
    }

    /// Plain-text export: vertex, triangle and labeled boundary-edge blocks.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "vertices {}", self.vertices.len())?;
        for v in &self.vertices {
            writeln!(w, "{:.17e} {:.17e}", v[0], v[1])?;
        }
        writeln!(w, "triangles {}", self.triangles.len())?;
        for t in &self.triangles {
            writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
        }
        writeln!(w, "boundary {}", self.boundary_edges.len())?;
        for e in &self.boundary_edges {
            let lab = match e.label {
                BoundaryLabel::Gamma0 => "gamma0",
                BoundaryLabel::Gamma1 => "gamma1",
            };
            writeln!(w, "{} {} {}", e.v0, e.v1, lab)?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Mesh> {
        let mut lines = r.lines();
        let mut next_line = || -> Result<String> {
            loop {
                match lines.next() {
                    Some(Ok(l)) => {
                        let t = l.trim().to_string();
                        if !t.is_empty() && !t.starts_with('#') {
                            return Ok(t);
                        }
                    }
                    Some(Err(e)) => return Err(Error::io("<mesh>", e)),
                    None => {
                        return Err(Error::InvalidGeometry("unexpected end of mesh file".into()))
                    }
                }
            }
        };
        let header = |line: &str, word: &str| -> Result<usize> {
            let mut it = line.split_whitespace();
            match (it.next(), it.next()) {
                (Some(w), Some(k)) if w == word => k
                    .parse()
                    .map_err(|_| Error::InvalidGeometry(format!("bad count in '{line}'"))),
                _ => Err(Error::InvalidGeometry(format!(
                    "expected '{word} <count>', found '{line}'"
                ))),
            }
        };
        let nv = header(&next_line()?, "vertices")?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let l = next_line()?;
            let mut it = l.split_whitespace();
            let x: f64 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::InvalidGeometry(format!("bad vertex line '{l}'")))?;
            let y: f64 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::InvalidGeometry(format!("bad vertex line '{l}'")))?;
            vertices.push([x, y]);
        }
        let nt = header(&next_line()?, "triangles")?;
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let l = next_line()?;
            let idx: Vec<usize> = l
                .split_whitespace()
                .map(|s| s.parse())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::InvalidGeometry(format!("bad triangle line '{l}'")))?;
            if idx.len() != 3 {
                return Err(Error::InvalidGeometry(format!("bad triangle line '{l}'")));
            }
            triangles.push([idx[0], idx[1], idx[2]]);
        }
        let nb = header(&next_line()?, "boundary")?;
        let mut boundary_edges = Vec::with_capacity(nb);
        for _ in 0..nb {
            let l = next_line()?;
            let parts: Vec<&str> = l.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(Error::InvalidGeometry(format!("bad boundary line '{l}'")));
            }
            let v0 = parts[0]
                .parse()
                .map_err(|_| Error::InvalidGeometry(format!("bad boundary line '{l}'")))?;
            let v1 = parts[1]
                .parse()
                .map_err(|_| Error::InvalidGeometry(format!("bad boundary line '{l}'")))?;
            let label = match parts[2] {
                "gamma0" => BoundaryLabel::Gamma0,
                "gamma1" => BoundaryLabel::Gamma1,
                other => {
                    return Err(Error::InvalidGeometry(format!("unknown label '{other}'")))
                }
            };
            boundary_edges.push(BoundaryEdge { v0, v1, label });
        }
        let mesh = Mesh {
            vertices,
            triangles,
            boundary_edges,
        };
        mesh.validate()?;
        Ok(mesh)
    }
}
