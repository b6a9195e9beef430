//! Vertex-local gauge transformations on points, kernels and Hilbert spaces.
//!
//! Edges run from `source` to `target`; a gauge assignment `{k_v}` acts on
//! an edge by `(theta, g) -> (CoAd(k_t) theta, k_t g k_s^-1)`. On kernels and
//! wave functions the inverse sandwich appears, so that every level carries a
//! left action.

use crate::group_backend::harmonic::{var, Letter, Word};
use crate::phase_space::{pullback_cyl, CylFunction, PhasePoint, PointMap, TargetEdge, ThetaSource};
use crate::quantization::{weyl_quantize, Ordering};
use crate::quantum_algebra::{DenseKernel, HilbertBasis, LieKernel, Mat};
use crate::scalar::Scalar;
use crate::structured_graph::{Resolved, StructuredGraph};
use crate::{Error, Group, GroupElem, Result, C64};
use nalgebra::DMatrix;
use std::collections::BTreeMap;

/// One group element per vertex of a graph.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeAssignment {
    pub values: BTreeMap<String, GroupElem>,
}

impl GaugeAssignment {
    pub fn identity(group: &Group, graph: &StructuredGraph) -> Self {
        Self { values: graph.vertices.iter().map(|v| (v.clone(), group.identity())).collect() }
    }

    pub fn random<R: rand::Rng + ?Sized>(group: &Group, graph: &StructuredGraph, rng: &mut R) -> Self {
        Self { values: graph.vertices.iter().map(|v| (v.clone(), group.random(rng))).collect() }
    }

    /// Domain must be exactly the vertex set of `graph`.
    pub fn check(&self, graph: &StructuredGraph) -> Result<()> {
        let mut errs = Vec::new();
        for v in &graph.vertices {
            if !self.values.contains_key(v) {
                errs.push(format!("missing vertex {v}"));
            }
        }
        for v in self.values.keys() {
            if !graph.vertices.contains(v) {
                errs.push(format!("vertex {v} not in graph {}", graph.id));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Graph(format!("gauge assignment: {}", errs.join(", "))))
        }
    }

    /// Pointwise product `self * other`.
    pub fn compose(&self, group: &Group, other: &GaugeAssignment) -> Result<GaugeAssignment> {
        let mut values = BTreeMap::new();
        for (v, a) in &self.values {
            let b = other.values.get(v).ok_or_else(|| Error::Graph(format!("gauge assignment: missing vertex {v}")))?;
            values.insert(v.clone(), group.mul(a, b));
        }
        if values.len() != other.values.len() {
            return Err(Error::Graph("gauge assignments on different vertex sets".into()));
        }
        Ok(Self { values })
    }

    pub fn inverse(&self, group: &Group) -> GaugeAssignment {
        Self { values: self.values.iter().map(|(v, g)| (v.clone(), group.inv(g))).collect() }
    }

    /// `(k_target, k_source)` per edge.
    fn endpoints(&self, graph: &StructuredGraph) -> Result<Vec<(GroupElem, GroupElem)>> {
        self.check(graph)?;
        Ok(graph.edges.iter().map(|e| (self.values[&e.target].clone(), self.values[&e.source].clone())).collect())
    }
}

/// Restriction of a fine assignment to the vertices of the coarse graph.
pub fn gauge_project(fine: &GaugeAssignment, coarse: &StructuredGraph) -> Result<GaugeAssignment> {
    let mut values = BTreeMap::new();
    let mut missing = Vec::new();
    for v in &coarse.vertices {
        match fine.values.get(v) {
            Some(g) => {
                values.insert(v.clone(), g.clone());
            }
            None => missing.push(v.clone()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::Graph(format!("coarse vertices missing from the fine assignment: {}", missing.join(", "))));
    }
    Ok(GaugeAssignment { values })
}

/// The phase space action as a [`PointMap`] with constant letters.
pub fn point_map(group: &Group, graph: &StructuredGraph, lambda: &GaugeAssignment) -> Result<PointMap> {
    let targets = lambda
        .endpoints(graph)?
        .into_iter()
        .enumerate()
        .map(|(e, (kt, ks))| TargetEdge {
            word: vec![Letter::Const(kt.clone()), var(e), Letter::Const(group.inv(&ks))],
            theta: vec![ThetaSource { coef: 1.0, src: e, word: vec![Letter::Const(kt)] }],
        })
        .collect();
    Ok(PointMap { group: group.clone(), n_src: graph.edges.len(), targets })
}

pub fn gauge_act_point(group: &Group, graph: &StructuredGraph, lambda: &GaugeAssignment, p: &PhasePoint) -> Result<PhasePoint> {
    point_map(group, graph, lambda)?.apply(p)
}

/// `f o lambda~` as a cylindrical function.
pub fn gauge_pullback(group: &Group, graph: &StructuredGraph, lambda: &GaugeAssignment, f: &CylFunction) -> Result<CylFunction> {
    point_map(group, graph, lambda)?.pullback(f)
}

fn finite_idx(g: &GroupElem) -> usize {
    match g {
        GroupElem::Finite { idx, .. } => *idx as usize,
        _ => unreachable!("finite kernels carry finite elements"),
    }
}

/// `F(k_t^-1 h k_t, k_t^-1 g k_s)` edgewise.
pub fn gauge_act_dense<T: Scalar>(graph: &StructuredGraph, lambda: &GaugeAssignment, f: &DenseKernel<T>) -> Result<DenseKernel<T>> {
    let ends = lambda.endpoints(graph)?;
    if ends.len() != f.n_edges() {
        return Err(Error::Shape(format!("graph with {} edges, kernel on {}", ends.len(), f.n_edges())));
    }
    let t = f.group.table().expect("finite group");
    let ends: Vec<(usize, usize)> = ends.iter().map(|(a, b)| (finite_idx(a), finite_idx(b))).collect();
    let tup = f.tup.clone();
    DenseKernel::from_fn(&f.group, ends.len(), |h, g| {
        let (hd, gd) = (tup.decode(h), tup.decode(g));
        let mut h2 = Vec::with_capacity(hd.len());
        let mut g2 = Vec::with_capacity(hd.len());
        for (e, (kt, ks)) in ends.iter().enumerate() {
            let kti = t.inv(*kt);
            h2.push(t.mul(t.mul(kti, hd[e]), *kt));
            g2.push(t.mul(t.mul(kti, gd[e]), *ks));
        }
        f.at(tup.encode(&h2), tup.encode(&g2)).clone()
    })
}

pub fn gauge_act_lie(graph: &StructuredGraph, lambda: &GaugeAssignment, f: &LieKernel) -> Result<LieKernel> {
    let ends = lambda.endpoints(graph)?;
    if ends.len() != f.n_edges {
        return Err(Error::Shape(format!("graph with {} edges, kernel on {}", ends.len(), f.n_edges)));
    }
    let group = &f.group;
    let n = f.n_edges;
    let h_word = |e: usize| -> Word {
        let (kt, _) = &ends[e];
        vec![Letter::Const(group.inv(kt)), var(e), Letter::Const(kt.clone())]
    };
    let g_word = |e: usize| -> Word {
        let (kt, ks) = &ends[e];
        vec![Letter::Const(group.inv(kt)), var(n + e), Letter::Const(ks.clone())]
    };
    Ok(f.edgewise(h_word, g_word, false))
}

/// Words `k_t^-1 g_e k_s` of `(U Psi)(g) = Psi(k_t^-1 g k_s)`.
fn unitary_words(group: &Group, graph: &StructuredGraph, lambda: &GaugeAssignment) -> Result<Vec<Word>> {
    Ok(lambda
        .endpoints(graph)?
        .into_iter()
        .enumerate()
        .map(|(e, (kt, ks))| vec![Letter::Const(group.inv(&kt)), var(e), Letter::Const(ks)])
        .collect())
}

/// Permutation matrix of the gauge unitary in the point basis.
pub fn gauge_unitary_dense<T: Scalar>(group: &Group, graph: &StructuredGraph, lambda: &GaugeAssignment) -> Result<Mat<T>> {
    let n = graph.edges.len();
    Mat::pullback(group, n, n, &unitary_words(group, graph, lambda)?)
}

/// The gauge unitary on a cutoff space; conjugation and translation keep
/// every spin, so the matrix is square and unitary.
pub fn gauge_unitary_lie(basis: &HilbertBasis, graph: &StructuredGraph, lambda: &GaugeAssignment) -> Result<DMatrix<C64>> {
    basis.pullback_matrix(basis, &unitary_words(&basis.group, graph, lambda)?)
}

/// `|| U Q(sigma) U^* - Q(sigma o lambda~^-1) ||` in the Frobenius norm.
pub fn quantization_gauge_residual(
    graph: &StructuredGraph,
    lambda: &GaugeAssignment,
    sigma: &CylFunction,
    eps: f64,
    ordering: Ordering,
    src: &HilbertBasis,
    tgt: &HilbertBasis,
) -> Result<f64> {
    let group = &src.group;
    let q = weyl_quantize(sigma, eps, ordering, src, tgt)?;
    let (us, ut) = (gauge_unitary_lie(src, graph, lambda)?, gauge_unitary_lie(tgt, graph, lambda)?);
    let moved = gauge_pullback(group, graph, &lambda.inverse(group), sigma)?;
    let q2 = weyl_quantize(&moved, eps, ordering, src, tgt)?;
    Ok((ut * q * us.adjoint() - q2).norm())
}

/// Largest pointwise gap between `lambda~(pi(lambda')) o p` and
/// `p o lambda~(lambda')` over the given fine points.
pub fn projection_square_residual(
    group: &Group,
    r: &Resolved,
    coarse: &StructuredGraph,
    fine: &StructuredGraph,
    lambda: &GaugeAssignment,
    points: &[PhasePoint],
) -> Result<f64> {
    let down = gauge_project(lambda, coarse)?;
    let proj = PointMap::projection(group, r);
    let (gc, gf) = (point_map(group, coarse, &down)?, point_map(group, fine, lambda)?);
    let mut worst: f64 = 0.0;
    for p in points {
        let a = gc.apply(&proj.apply(p)?)?;
        let b = proj.apply(&gf.apply(p)?)?;
        worst = worst.max(a.distance(group, &b));
    }
    Ok(worst)
}

/// Quantize, gauge and refine in both orders:
/// `U_ref U^{pi lambda'} Q(sigma) U^{pi lambda'*}` against
/// `U^{lambda'} Q(p* sigma) U^{lambda'*} U_ref`.
#[allow(clippy::too_many_arguments)]
pub fn prism_residual(
    r: &Resolved,
    coarse: &StructuredGraph,
    fine: &StructuredGraph,
    lambda: &GaugeAssignment,
    sigma: &CylFunction,
    eps: f64,
    ordering: Ordering,
    src_cut: u32,
    tgt_cut: u32,
) -> Result<f64> {
    let group = sigma.group.clone();
    let down = gauge_project(lambda, coarse)?;
    let words = crate::quantum_algebra::refinement_words(r);
    let (cs, ct) = (HilbertBasis::new(&group, r.n_coarse, src_cut), HilbertBasis::new(&group, r.n_coarse, tgt_cut));
    let (fs, ft) = (HilbertBasis::new(&group, r.n_fine, src_cut), HilbertBasis::new(&group, r.n_fine, tgt_cut));
    let (ref_s, ref_t) = (fs.pullback_matrix(&cs, &words)?, ft.pullback_matrix(&ct, &words)?);
    let a = ref_t * gauge_unitary_lie(&ct, coarse, &down)? * weyl_quantize(sigma, eps, ordering, &cs, &ct)? * gauge_unitary_lie(&cs, coarse, &down)?.adjoint();
    let fine_sigma = pullback_cyl(&group, r, sigma)?;
    let b = gauge_unitary_lie(&ft, fine, lambda)? * weyl_quantize(&fine_sigma, eps, ordering, &fs, &ft)? * gauge_unitary_lie(&fs, fine, lambda)?.adjoint() * ref_s;
    Ok((a - b).norm())
}
