//! Moment images of the families as convex domains `{lᵢ(y) ≥ 0}`.

use serde::Serialize;

use super::symplectic::quotient_matrix;
use super::FamilyKind;
use crate::toric_hessian::AffineForm;

/// A ray (`length = None`) or segment from `start` along `direction`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Edge {
    pub start: Vec<f64>,
    pub direction: Vec<f64>,
    pub length: Option<f64>,
}

impl Edge {
    fn ray(start: &[f64], direction: &[f64]) -> Self {
        Self { start: start.to_vec(), direction: direction.to_vec(), length: None }
    }

    fn segment(a: &[f64], b: &[f64]) -> Self {
        let d: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
        Self { start: a.to_vec(), direction: d, length: Some(1.0) }
    }

    /// Distance from `p` to the edge.
    pub fn distance(&self, p: &[f64]) -> f64 {
        let d2: f64 = self.direction.iter().map(|v| v * v).sum();
        let rel: Vec<f64> = p.iter().zip(&self.start).map(|(x, s)| x - s).collect();
        let mut t = rel.iter().zip(&self.direction).map(|(r, d)| r * d).sum::<f64>() / d2;
        t = t.max(0.0);
        if let Some(l) = self.length {
            t = t.min(l);
        }
        rel.iter().zip(&self.direction).map(|(r, d)| (r - t * d).powi(2)).sum::<f64>().sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvexDomain {
    pub inequalities: Vec<AffineForm>,
    /// Recession-cone generators.
    pub generators: Vec<Vec<f64>>,
    pub vertices: Vec<Vec<f64>>,
    pub edges: Vec<Edge>,
}

impl ConvexDomain {
    /// Smallest `lᵢ(y)`.
    pub fn slack(&self, y: &[f64]) -> f64 {
        self.inequalities.iter().map(|l| l.eval(y)).fold(f64::INFINITY, f64::min)
    }

    /// `{inequalities: [[coeffs, const]], generators, vertices, edges}`.
    pub fn to_json(&self) -> serde_json::Value {
        let ineq: Vec<serde_json::Value> =
            self.inequalities.iter().map(|l| serde_json::json!([l.coeffs, l.constant])).collect();
        serde_json::json!({
            "inequalities": ineq,
            "generators": self.generators,
            "vertices": self.vertices,
            "edges": self.edges,
        })
    }

    /// `y ↦ Ty` applied to the whole description, given `T⁻¹`.
    fn map_linear(&self, t: &dyn Fn(&[f64]) -> Vec<f64>, tinv_t: &dyn Fn(&[f64]) -> Vec<f64>) -> Self {
        Self {
            inequalities: self.inequalities.iter().map(|l| AffineForm::new(tinv_t(&l.coeffs), l.constant)).collect(),
            generators: self.generators.iter().map(|g| t(g)).collect(),
            vertices: self.vertices.iter().map(|v| t(v)).collect(),
            edges: self
                .edges
                .iter()
                .map(|e| Edge { start: t(&e.start), direction: t(&e.direction), length: e.length })
                .collect(),
        }
    }
}

fn l(c: &[f64], k: f64) -> AffineForm {
    AffineForm::new(c.to_vec(), k)
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

fn un_domain(n: usize, b: f64) -> ConvexDomain {
    let mut inequalities: Vec<AffineForm> = (0..n).map(|i| AffineForm::coordinate(n, i)).collect();
    inequalities.push(AffineForm::total(n, -b));
    let generators: Vec<Vec<f64>> = (0..n).map(|i| unit(n, i)).collect();
    if b == 0.0 {
        let o = vec![0.0; n];
        let edges = generators.iter().map(|g| Edge::ray(&o, g)).collect();
        return ConvexDomain { inequalities, vertices: vec![o], generators, edges };
    }
    let vertices: Vec<Vec<f64>> = (0..n).map(|i| unit(n, i).iter().map(|v| v * b).collect()).collect();
    let mut edges: Vec<Edge> = vertices.iter().zip(&generators).map(|(v, g)| Edge::ray(v, g)).collect();
    for i in 0..n {
        for j in i + 1..n {
            edges.push(Edge::segment(&vertices[i], &vertices[j]));
        }
    }
    ConvexDomain { inequalities, generators, vertices, edges }
}

/// `(y₀, y₁, y₂)`: `yⱼ ≥ 0`, `y₀ ≥ −a`, `y₁ + y₂ − y₀ ≥ 0`.
fn resolved_domain(a: f64) -> ConvexDomain {
    let inequalities =
        vec![l(&[0.0, 1.0, 0.0], 0.0), l(&[0.0, 0.0, 1.0], 0.0), l(&[1.0, 0.0, 0.0], a), l(&[-1.0, 1.0, 1.0], 0.0)];
    let o = [0.0, 0.0, 0.0];
    let base = [-a, 0.0, 0.0];
    let generators = vec![vec![1.0, 1.0, 0.0], vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
    let mut edges = vec![
        Edge::ray(&o, &generators[0]),
        Edge::ray(&o, &generators[1]),
        Edge::ray(&base, &generators[2]),
        Edge::ray(&base, &generators[3]),
    ];
    let mut vertices = vec![o.to_vec()];
    if a > 0.0 {
        vertices.push(base.to_vec());
        // {(−at, 0, 0) : 0 ≤ t ≤ 1}
        edges.push(Edge::segment(&o, &base));
    }
    ConvexDomain { inequalities, generators, vertices, edges }
}

/// `(y₁, y₂, y₃)`: `yⱼ ≥ −aⱼ`, `y₃ ≥ yⱼ`, `y₃ ≥ 0`.
fn p1p1_domain(a1: f64, a2: f64) -> ConvexDomain {
    let inequalities = vec![
        l(&[1.0, 0.0, 0.0], a1),
        l(&[0.0, 1.0, 0.0], a2),
        l(&[-1.0, 0.0, 1.0], 0.0),
        l(&[0.0, -1.0, 1.0], 0.0),
        l(&[0.0, 0.0, 1.0], 0.0),
    ];
    let corners = [
        ([0.0, 0.0], [1.0, 1.0, 1.0]),
        ([-a1, 0.0], [0.0, 1.0, 1.0]),
        ([0.0, -a2], [1.0, 0.0, 1.0]),
        ([-a1, -a2], [0.0, 0.0, 1.0]),
    ];
    let generators: Vec<Vec<f64>> = corners.iter().map(|(_, d)| d.to_vec()).collect();
    let mut vertices: Vec<Vec<f64>> = Vec::new();
    let mut edges = Vec::new();
    for (c, d) in corners {
        let v = vec![c[0], c[1], 0.0];
        if !vertices.contains(&v) {
            vertices.push(v.clone());
        }
        edges.push(Edge::ray(&v, &d));
    }
    if a1 > 0.0 {
        edges.push(Edge::segment(&[0.0, 0.0, 0.0], &[-a1, 0.0, 0.0]));
        edges.push(Edge::segment(&[0.0, -a2, 0.0], &[-a1, -a2, 0.0]));
    }
    if a2 > 0.0 {
        edges.push(Edge::segment(&[0.0, 0.0, 0.0], &[0.0, -a2, 0.0]));
        edges.push(Edge::segment(&[-a1, 0.0, 0.0], &[-a1, -a2, 0.0]));
    }
    edges.dedup();
    ConvexDomain { inequalities, generators, vertices, edges }
}

/// Moment domain of a family in the coordinates of its chart torus.
pub fn moment_polytope(kind: FamilyKind) -> ConvexDomain {
    match kind {
        FamilyKind::UnRf { n, b } => un_domain(n, b),
        FamilyKind::QuotientOn { n, b } => {
            let (m, minv) = quotient_matrix(n);
            let mt = m.transpose();
            un_domain(n, b).map_linear(&|y| minv.matvec(y), &|c| mt.matvec(c))
        }
        FamilyKind::Eh { a, c2, .. } => {
            let s = c2.sqrt();
            let inequalities = vec![l(&[1.0, 0.0], a), l(&[-1.0, 1.0], 0.0), l(&[0.0, 1.0], a - s)];
            let (v1, v2) = (vec![-a, s - a], vec![s - a, s - a]);
            let generators = vec![vec![1.0, 1.0], vec![0.0, 1.0]];
            let mut vertices = vec![v1.clone()];
            let mut edges = vec![Edge::ray(&v1, &generators[1]), Edge::ray(&v2, &generators[0])];
            if s > 0.0 {
                vertices.push(v2.clone());
                edges.push(Edge::segment(&v1, &v2));
            }
            ConvexDomain { inequalities, generators, vertices, edges }
        }
        FamilyKind::Resolved3 { a } => resolved_domain(a),
        FamilyKind::KeplerK3Lift | FamilyKind::KrfK3 => resolved_domain(0.0),
        FamilyKind::P1p1 { a1, a2 } => p1p1_domain(a1, a2),
        FamilyKind::O22 { a1, a2 } => {
            // ŷ₃ = ½y₃
            p1p1_domain(a1, a2).map_linear(&|y| vec![y[0], y[1], 0.5 * y[2]], &|c| vec![c[0], c[1], 2.0 * c[2]])
        }
    }
}
