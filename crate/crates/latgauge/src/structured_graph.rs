//! Oriented graphs over a shared segment pool, refinement witnesses and the
//! partial orders between graphs.
//!
//! A decomposition lists the pieces of a coarse edge in product order,
//! terminal piece first: `e = f_m^{s_m} o ... o f_1^{s_1}` is stored as
//! `[(f_m, s_m), ..., (f_1, s_1)]`. Weight vectors are aligned with that list.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, Mul};

/// Segment id -> (start vertex, end vertex).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SegmentPool {
    pub segments: BTreeMap<String, (String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub id: String,
    pub source: String,
    pub target: String,
    /// Oriented segments from source to target.
    pub chain: Vec<(String, i8)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuredGraph {
    pub id: String,
    pub vertices: Vec<String>,
    pub edges: Vec<Edge>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Piece {
    pub edge: String,
    pub sign: i8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub coarse_edge: String,
    /// Terminal piece first.
    pub pieces: Vec<Piece>,
    /// Aligned with `pieces`.
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementWitness {
    pub id: String,
    pub coarse: String,
    pub fine: String,
    pub decompositions: Vec<Decomposition>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    /// Terminal weight 1.
    Left,
    /// Initial weight 1.
    Right,
}

/// Cumulative order classes of a valid witness; `lesssim` always holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrderClass {
    pub leq: bool,
    pub lessdot_l: bool,
    pub lessdot_r: bool,
}

impl OrderClass {
    pub fn lesssim(&self) -> bool {
        true
    }

    /// Strongest class name.
    pub fn label(&self) -> &'static str {
        match (self.leq, self.lessdot_l, self.lessdot_r) {
            (true, _, _) => "leq",
            (_, true, true) => "lessdot_L+lessdot_R",
            (_, true, false) => "lessdot_L",
            (_, false, true) => "lessdot_R",
            _ => "lesssim",
        }
    }
}

/// Which named policies a witness satisfies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PolicyClass {
    pub left: bool,
    pub right: bool,
}

impl PolicyClass {
    pub fn as_policy(&self) -> Option<Policy> {
        match (self.left, self.right) {
            (true, _) => Some(Policy::Left),
            (false, true) => Some(Policy::Right),
            _ => None,
        }
    }
}

pub fn policy_weights(policy: Policy, m: usize) -> Vec<f64> {
    let mut w = vec![0.0; m];
    match policy {
        Policy::Left => w[0] = 1.0,
        Policy::Right => w[m - 1] = 1.0,
    }
    w
}

fn orient(chain: &[(String, i8)], sign: i8) -> Vec<(String, i8)> {
    if sign > 0 {
        chain.to_vec()
    } else {
        chain.iter().rev().map(|(s, o)| (s.clone(), -o)).collect()
    }
}

fn inverse_id(id: &str) -> String {
    match id.strip_suffix("^-1") {
        Some(base) => base.to_string(),
        None => format!("{id}^-1"),
    }
}

impl StructuredGraph {
    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == id)
    }

    /// All violated invariants; empty when the graph is well formed.
    pub fn validate(&self, pool: &SegmentPool) -> Vec<String> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        let verts: BTreeSet<&String> = self.vertices.iter().collect();
        for e in &self.edges {
            if !seen.insert(&e.id) {
                out.push(format!("graph {}: repeated edge id {}", self.id, e.id));
            }
            for v in [&e.source, &e.target] {
                if !verts.contains(v) {
                    out.push(format!("graph {}: edge {} references unknown vertex {v}", self.id, e.id));
                }
            }
            if e.chain.is_empty() {
                out.push(format!("graph {}: edge {} has an empty segment chain", self.id, e.id));
                continue;
            }
            let mut at = e.source.clone();
            for (s, o) in &e.chain {
                let Some((a, b)) = pool.segments.get(s) else {
                    out.push(format!("graph {}: edge {} references unknown segment {s}", self.id, e.id));
                    at.clear();
                    break;
                };
                if *o != 1 && *o != -1 {
                    out.push(format!("graph {}: edge {} has segment sign {o}", self.id, e.id));
                }
                let (from, to) = if *o > 0 { (a, b) } else { (b, a) };
                if *from != at {
                    out.push(format!("graph {}: edge {} chain is not connected at segment {s}", self.id, e.id));
                }
                at = to.clone();
            }
            if !at.is_empty() && at != e.target {
                out.push(format!("graph {}: edge {} chain ends at {at}, not at target {}", self.id, e.id, e.target));
            }
        }
        out
    }

    /// Identity refinement of a graph by itself.
    pub fn identity_witness(&self) -> RefinementWitness {
        RefinementWitness {
            id: format!("id_{}", self.id),
            coarse: self.id.clone(),
            fine: self.id.clone(),
            decompositions: self
                .edges
                .iter()
                .map(|e| Decomposition { coarse_edge: e.id.clone(), pieces: vec![Piece { edge: e.id.clone(), sign: 1 }], weights: vec![1.0] })
                .collect(),
        }
    }
}

/// Every edge reversed: source and target swapped, chain reversed with signs
/// flipped. An involution.
pub fn invert_graph(g: &StructuredGraph) -> StructuredGraph {
    StructuredGraph {
        id: inverse_id(&g.id),
        vertices: g.vertices.clone(),
        edges: g
            .edges
            .iter()
            .map(|e| Edge { id: e.id.clone(), source: e.target.clone(), target: e.source.clone(), chain: orient(&e.chain, -1) })
            .collect(),
    }
}

/// Witness between the inverted graphs: `e^-1 = f_1^{s_1} o ... o f_m^{s_m}`
/// in terms of the reversed fine edges, i.e. the list reversed with signs kept.
pub fn invert_witness(w: &RefinementWitness) -> RefinementWitness {
    RefinementWitness {
        id: inverse_id(&w.id),
        coarse: inverse_id(&w.coarse),
        fine: inverse_id(&w.fine),
        decompositions: w
            .decompositions
            .iter()
            .map(|d| Decomposition {
                coarse_edge: d.coarse_edge.clone(),
                pieces: d.pieces.iter().rev().cloned().collect(),
                weights: d.weights.iter().rev().cloned().collect(),
            })
            .collect(),
    }
}

/// Witness of the inverted coarse graph refined by the *same* fine graph:
/// `e^-1 = f_1^{-s_1} o ... o f_m^{-s_m}`. Weights follow their pieces.
pub fn invert_coarse(w: &RefinementWitness, coarse: &StructuredGraph) -> (StructuredGraph, RefinementWitness) {
    let inv = invert_graph(coarse);
    let wit = RefinementWitness {
        id: format!("{}~", w.id),
        coarse: inv.id.clone(),
        fine: w.fine.clone(),
        decompositions: w
            .decompositions
            .iter()
            .map(|d| Decomposition {
                coarse_edge: d.coarse_edge.clone(),
                pieces: d.pieces.iter().rev().map(|p| Piece { edge: p.edge.clone(), sign: -p.sign }).collect(),
                weights: d.weights.iter().rev().cloned().collect(),
            })
            .collect(),
    };
    (inv, wit)
}

impl RefinementWitness {
    pub fn decomposition(&self, coarse_edge: &str) -> Option<&Decomposition> {
        self.decompositions.iter().find(|d| d.coarse_edge == coarse_edge)
    }

    pub fn policy_class(&self) -> PolicyClass {
        let exact = |w: &[f64], i: usize| w.iter().enumerate().all(|(k, x)| *x == if k == i { 1.0 } else { 0.0 });
        PolicyClass {
            left: self.decompositions.iter().all(|d| !d.weights.is_empty() && exact(&d.weights, 0)),
            right: self.decompositions.iter().all(|d| !d.weights.is_empty() && exact(&d.weights, d.weights.len() - 1)),
        }
    }

    /// Same decompositions with the weights of a named policy.
    pub fn with_policy(&self, policy: Policy) -> RefinementWitness {
        let mut w = self.clone();
        for d in &mut w.decompositions {
            d.weights = policy_weights(policy, d.pieces.len());
        }
        w
    }

    /// Same decompositions with binary weight `c` on the initial piece and
    /// `1 - c` on the terminal one (two-piece decompositions only keep this
    /// meaning; longer ones get `c` initial, `1 - c` terminal, 0 between).
    pub fn with_binary_weight(&self, c: f64) -> RefinementWitness {
        let mut w = self.clone();
        for d in &mut w.decompositions {
            let m = d.pieces.len();
            d.weights = vec![0.0; m];
            if m == 1 {
                d.weights[0] = 1.0;
            } else {
                d.weights[0] = 1.0 - c;
                d.weights[m - 1] = c;
            }
        }
        w
    }
}

/// Every violated invariant of `w` as a refinement of `coarse` by `fine`.
/// Empty iff `w` is a valid refinement (the loosest order).
pub fn validate_witness(w: &RefinementWitness, coarse: &StructuredGraph, fine: &StructuredGraph) -> Vec<String> {
    let mut out = Vec::new();
    if w.coarse != coarse.id {
        out.push(format!("witness {}: coarse graph id {} does not match {}", w.id, w.coarse, coarse.id));
    }
    if w.fine != fine.id {
        out.push(format!("witness {}: fine graph id {} does not match {}", w.id, w.fine, fine.id));
    }
    let mut used: BTreeMap<&str, &str> = BTreeMap::new();
    let mut covered = BTreeSet::new();
    for d in &w.decompositions {
        let Some(ce) = coarse.edges.iter().find(|e| e.id == d.coarse_edge) else {
            out.push(format!("witness {}: dangling coarse edge id {}", w.id, d.coarse_edge));
            continue;
        };
        if !covered.insert(&d.coarse_edge) {
            out.push(format!("witness {}: coarse edge {} decomposed twice", w.id, d.coarse_edge));
        }
        if d.pieces.is_empty() {
            out.push(format!("witness {}: coarse edge {} has an empty decomposition", w.id, d.coarse_edge));
            continue;
        }
        if d.weights.len() != d.pieces.len() {
            out.push(format!(
                "witness {}: coarse edge {} has {} weights for {} pieces",
                w.id,
                d.coarse_edge,
                d.weights.len(),
                d.pieces.len()
            ));
        } else {
            let s: f64 = d.weights.iter().sum();
            if (s - 1.0).abs() > 1e-12 || d.weights.iter().any(|x| !x.is_finite()) {
                out.push(format!("witness {}: coarse edge {}: weights sum ≠ 1 (sum = {s})", w.id, d.coarse_edge));
            }
        }
        let mut chain = Vec::new();
        let mut dangling = false;
        for p in d.pieces.iter().rev() {
            if p.sign != 1 && p.sign != -1 {
                out.push(format!("witness {}: piece {} has sign {}", w.id, p.edge, p.sign));
            }
            match fine.edges.iter().find(|e| e.id == p.edge) {
                Some(fe) => chain.extend(orient(&fe.chain, p.sign)),
                None => {
                    out.push(format!("witness {}: dangling fine edge id {}", w.id, p.edge));
                    dangling = true;
                }
            }
            if let Some(prev) = used.insert(&p.edge, &d.coarse_edge) {
                out.push(format!("witness {}: fine edge {} repeated (in {prev} and {})", w.id, p.edge, d.coarse_edge));
            }
        }
        if !dangling && chain != ce.chain {
            out.push(format!("witness {}: chain mismatch for coarse edge {}", w.id, d.coarse_edge));
        }
    }
    for e in &coarse.edges {
        if !covered.contains(&e.id) {
            out.push(format!("witness {}: coarse edge {} has no decomposition", w.id, e.id));
        }
    }
    out
}

/// Order classes from the piece signs (the witness is assumed valid).
pub fn order_class(w: &RefinementWitness) -> OrderClass {
    let ds = &w.decompositions;
    OrderClass {
        leq: ds.iter().all(|d| d.pieces.iter().all(|p| p.sign == 1)),
        lessdot_l: ds.iter().all(|d| d.pieces.first().is_some_and(|p| p.sign == 1)),
        lessdot_r: ds.iter().all(|d| d.pieces.last().is_some_and(|p| p.sign == 1)),
    }
}

/// Validating variant of [`order_class`].
pub fn order_class_checked(w: &RefinementWitness, coarse: &StructuredGraph, fine: &StructuredGraph) -> Result<OrderClass> {
    let errs = validate_witness(w, coarse, fine);
    if errs.is_empty() {
        Ok(order_class(w))
    } else {
        Err(Error::InvalidWitness(errs))
    }
}

/// Weight vector of a substituted decomposition: the outer weight of each
/// piece multiplies the inner weights of its own decomposition; a reversed
/// piece carries its inner weights in reversed order.
pub fn compose_weight_vectors<T: Clone + Mul<Output = T> + Add<Output = T>>(outer: &[T], signs: &[i8], inner: &[Vec<T>]) -> Vec<T> {
    let mut out = Vec::new();
    for ((c, s), ws) in outer.iter().zip(signs).zip(inner) {
        let block: Vec<T> = if *s > 0 { ws.clone() } else { ws.iter().rev().cloned().collect() };
        out.extend(block.into_iter().map(|x| c.clone() * x));
    }
    out
}

/// Composite refinement `l <= l''` from `w1: l <= l'` and `w2: l' <= l''`.
pub fn compose_witnesses(w1: &RefinementWitness, w2: &RefinementWitness) -> Result<RefinementWitness> {
    if w1.fine != w2.coarse {
        return Err(Error::Graph(format!("cannot compose {} (fine graph {}) with {} (coarse graph {})", w1.id, w1.fine, w2.id, w2.coarse)));
    }
    let (p1, p2) = (w1.policy_class(), w2.policy_class());
    if (p1.left && !p1.right && p2.right && !p2.left) || (p1.right && !p1.left && p2.left && !p2.right) {
        return Err(Error::Graph(format!("incompatible policies: {} and {}", w1.id, w2.id)));
    }
    let mut decompositions = Vec::with_capacity(w1.decompositions.len());
    for d in &w1.decompositions {
        let mut pieces = Vec::new();
        let mut inner = Vec::new();
        for p in &d.pieces {
            let d2 = w2.decomposition(&p.edge).ok_or_else(|| Error::Graph(format!("{} has no decomposition of {}", w2.id, p.edge)))?;
            if p.sign > 0 {
                pieces.extend(d2.pieces.iter().cloned());
            } else {
                pieces.extend(d2.pieces.iter().rev().map(|q| Piece { edge: q.edge.clone(), sign: -q.sign }));
            }
            inner.push(d2.weights.clone());
        }
        let signs: Vec<i8> = d.pieces.iter().map(|p| p.sign).collect();
        let weights = compose_weight_vectors(&d.weights, &signs, &inner);
        decompositions.push(Decomposition { coarse_edge: d.coarse_edge.clone(), pieces, weights });
    }
    Ok(RefinementWitness { id: format!("{}+{}", w1.id, w2.id), coarse: w1.coarse.clone(), fine: w2.fine.clone(), decompositions })
}

/// A witness resolved to edge indices of its two graphs.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolved {
    pub n_coarse: usize,
    pub n_fine: usize,
    /// Per coarse edge (graph order): pieces `(fine edge index, sign)`, terminal first.
    pub pieces: Vec<Vec<(usize, i8)>>,
    pub weights: Vec<Vec<f64>>,
}

impl Resolved {
    /// Witness of the inverted coarse graph refined by the same fine graph:
    /// reversed lists with flipped signs, weights carried along.
    pub fn inverted_coarse(&self) -> Resolved {
        Resolved {
            n_coarse: self.n_coarse,
            n_fine: self.n_fine,
            pieces: self.pieces.iter().map(|ps| ps.iter().rev().map(|&(f, s)| (f, -s)).collect()).collect(),
            weights: self.weights.iter().map(|w| w.iter().rev().cloned().collect()).collect(),
        }
    }

    /// Witness between the inverted coarse and inverted fine graphs: reversed
    /// lists, signs kept.
    pub fn inverted_both(&self) -> Resolved {
        Resolved {
            n_coarse: self.n_coarse,
            n_fine: self.n_fine,
            pieces: self.pieces.iter().map(|ps| ps.iter().rev().cloned().collect()).collect(),
            weights: self.weights.iter().map(|w| w.iter().rev().cloned().collect()).collect(),
        }
    }

    /// Fine edges that appear in no decomposition.
    pub fn removed(&self) -> Vec<usize> {
        let used: BTreeSet<usize> = self.pieces.iter().flatten().map(|p| p.0).collect();
        (0..self.n_fine).filter(|i| !used.contains(i)).collect()
    }

    pub fn policy_class(&self) -> PolicyClass {
        let exact = |w: &[f64], i: usize| w.iter().enumerate().all(|(k, x)| *x == if k == i { 1.0 } else { 0.0 });
        PolicyClass {
            left: self.weights.iter().all(|w| exact(w, 0)),
            right: self.weights.iter().all(|w| exact(w, w.len() - 1)),
        }
    }
}

pub fn resolve(w: &RefinementWitness, coarse: &StructuredGraph, fine: &StructuredGraph) -> Result<Resolved> {
    let errs = validate_witness(w, coarse, fine);
    if !errs.is_empty() {
        return Err(Error::InvalidWitness(errs));
    }
    let mut pieces = Vec::new();
    let mut weights = Vec::new();
    for e in &coarse.edges {
        let d = w.decomposition(&e.id).expect("validated");
        pieces.push(d.pieces.iter().map(|p| (fine.edge_index(&p.edge).expect("validated"), p.sign)).collect());
        weights.push(d.weights.clone());
    }
    Ok(Resolved { n_coarse: coarse.edges.len(), n_fine: fine.edges.len(), pieces, weights })
}

/// Random refinement of `g`: every edge is cut into at most `max_pieces`
/// contiguous blocks of its segment chain, each block becomes a fine edge that
/// is reversed with probability `p_flip`. Weights follow `policy`.
pub fn random_refinement<R: rand::Rng + ?Sized>(
    g: &StructuredGraph,
    pool: &SegmentPool,
    fine_id: &str,
    max_pieces: usize,
    p_flip: f64,
    policy: Policy,
    rng: &mut R,
) -> (StructuredGraph, RefinementWitness) {
    let mut vertices: Vec<String> = g.vertices.clone();
    let mut edges = Vec::new();
    let mut decompositions = Vec::new();
    for e in &g.edges {
        let n = e.chain.len();
        let k = rng.random_range(1..=max_pieces.min(n).max(1));
        let mut cuts: BTreeSet<usize> = BTreeSet::new();
        while cuts.len() < k - 1 {
            cuts.insert(rng.random_range(1..n));
        }
        let mut bounds = vec![0];
        bounds.extend(cuts);
        bounds.push(n);
        let endpoint = |i: usize| -> String {
            if i == 0 {
                return e.source.clone();
            }
            let (s, o) = &e.chain[i - 1];
            let (a, b) = &pool.segments[s];
            if *o > 0 {
                b.clone()
            } else {
                a.clone()
            }
        };
        let mut pieces = Vec::new();
        for (bi, w) in bounds.windows(2).enumerate() {
            let (from, to) = (endpoint(w[0]), endpoint(w[1]));
            for v in [&from, &to] {
                if !vertices.contains(v) {
                    vertices.push(v.clone());
                }
            }
            let block = e.chain[w[0]..w[1]].to_vec();
            let sign: i8 = if rng.random_bool(p_flip) { -1 } else { 1 };
            let id = format!("{}.{}", e.id, bi + 1);
            let (source, target) = if sign > 0 { (from, to) } else { (to, from) };
            edges.push(Edge { id: id.clone(), source, target, chain: orient(&block, sign) });
            pieces.push(Piece { edge: id, sign });
        }
        pieces.reverse();
        let weights = policy_weights(policy, pieces.len());
        decompositions.push(Decomposition { coarse_edge: e.id.clone(), pieces, weights });
    }
    let fine = StructuredGraph { id: fine_id.to_string(), vertices, edges };
    let w = RefinementWitness { id: format!("{}>{}", g.id, fine_id), coarse: g.id.clone(), fine: fine_id.to_string(), decompositions };
    (fine, w)
}

/// A single edge `e: v0 -> vn` over a chain of `n` forward segments `s1..sn`.
pub fn line_graph(id: &str, n: usize) -> (SegmentPool, StructuredGraph) {
    let mut pool = SegmentPool::default();
    let mut chain = Vec::new();
    for i in 0..n {
        let s = format!("s{}", i + 1);
        pool.segments.insert(s.clone(), (format!("v{i}"), format!("v{}", i + 1)));
        chain.push((s, 1));
    }
    let g = StructuredGraph {
        id: id.to_string(),
        vertices: vec!["v0".into(), format!("v{n}")],
        edges: vec![Edge { id: "e".into(), source: "v0".into(), target: format!("v{n}"), chain }],
    };
    (pool, g)
}
