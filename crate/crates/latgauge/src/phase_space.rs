//! Truncated phase spaces `(g* x G)^E`, cylindrical functions, the canonical
//! Poisson bracket and the maps between phase spaces of related graphs.

use crate::group_backend::harmonic::{
    expand_entry, poly_add, poly_const, poly_mul, poly_right_derivative, poly_scale, var, var_inv, Entry, Factor, Letter, Monomial, Poly,
    SlotValues, Word,
};
use crate::group_backend::{levi_civita, AlgElem, Group, GroupElem, Irrep};
use crate::scalar::{c, C64};
use crate::structured_graph::Resolved;
use crate::{Error, Result};
use std::collections::BTreeMap;

/// A point of `Gamma_l`: per edge (graph order) a dual element and a holonomy.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    pub theta: Vec<Vec<f64>>,
    pub g: Vec<GroupElem>,
}

impl PhasePoint {
    pub fn n_edges(&self) -> usize {
        self.g.len()
    }

    pub fn random<R: rand::Rng + ?Sized>(group: &Group, n: usize, scale: f64, rng: &mut R) -> Self {
        let mut theta = Vec::with_capacity(n);
        let mut g = Vec::with_capacity(n);
        for _ in 0..n {
            theta.push(group.random_coalg(rng, scale).0);
            g.push(group.random(rng));
        }
        PhasePoint { theta, g }
    }

    /// Largest coordinate or holonomy distance between two points.
    pub fn distance(&self, group: &Group, other: &PhasePoint) -> f64 {
        let mut d: f64 = 0.0;
        for (a, b) in self.theta.iter().zip(&other.theta) {
            for (x, y) in a.iter().zip(b) {
                d = d.max((x - y).abs());
            }
        }
        for (a, b) in self.g.iter().zip(&other.g) {
            d = d.max(group.distance(a, b));
        }
        d
    }
}

/// Sorted multiset of `(edge, coordinate)` pairs.
pub type ThetaMono = Vec<(u16, u8)>;

/// Finite sum of theta-monomials times harmonic polynomials in the edge
/// holonomies (slot = edge index).
#[derive(Clone, Debug)]
pub struct CylFunction {
    pub group: Group,
    pub n_edges: usize,
    pub terms: BTreeMap<ThetaMono, Poly>,
}

impl CylFunction {
    pub fn zero(group: &Group, n_edges: usize) -> Self {
        CylFunction { group: group.clone(), n_edges, terms: BTreeMap::new() }
    }

    pub fn constant(group: &Group, n_edges: usize, v: C64) -> Self {
        Self::from_poly(group, n_edges, poly_const(v))
    }

    pub fn from_poly(group: &Group, n_edges: usize, p: Poly) -> Self {
        let mut f = Self::zero(group, n_edges);
        if !p.is_empty() {
            f.terms.insert(Vec::new(), p);
        }
        f
    }

    /// Single matrix coefficient of the holonomy of `edge`.
    pub fn entry(group: &Group, n_edges: usize, edge: usize, e: Entry) -> Self {
        Self::from_poly(group, n_edges, vec![(c(1.0, 0.0), vec![Factor { slot: edge as u16, entry: e }])])
    }

    /// Character (trace) of irrep `r` on `edge`.
    pub fn character(group: &Group, n_edges: usize, edge: usize, r: Irrep) -> Self {
        let d = group.irrep_dim(r);
        let p: Poly = (0..d).map(|m| (c(1.0, 0.0), vec![Factor { slot: edge as u16, entry: Entry::new(r, m, m) }])).collect();
        Self::from_poly(group, n_edges, crate::group_backend::harmonic::collect(p))
    }

    /// Coordinate `theta_{edge, a}`.
    pub fn theta(group: &Group, n_edges: usize, edge: usize, a: usize) -> Self {
        let mut f = Self::zero(group, n_edges);
        f.terms.insert(vec![(edge as u16, a as u8)], poly_const(c(1.0, 0.0)));
        f
    }

    /// Momentum functional `P^e_X(theta, g) = theta_e(X)`.
    pub fn momentum(group: &Group, n_edges: usize, edge: usize, x: &AlgElem) -> Self {
        let mut f = Self::zero(group, n_edges);
        for (a, xa) in x.0.iter().enumerate() {
            if *xa != 0.0 {
                f = f.add(&Self::theta(group, n_edges, edge, a).scale(c(*xa, 0.0)));
            }
        }
        f
    }

    fn insert(&mut self, mono: ThetaMono, p: Poly) {
        let merged = match self.terms.remove(&mono) {
            Some(old) => poly_add(&old, &p),
            None => crate::group_backend::harmonic::collect(p),
        };
        if !merged.is_empty() {
            self.terms.insert(mono, merged);
        }
    }

    pub fn add(&self, other: &CylFunction) -> CylFunction {
        let mut out = self.clone();
        for (m, p) in &other.terms {
            out.insert(m.clone(), p.clone());
        }
        out
    }

    pub fn sub(&self, other: &CylFunction) -> CylFunction {
        self.add(&other.scale(c(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> CylFunction {
        let mut out = Self::zero(&self.group, self.n_edges);
        for (m, p) in &self.terms {
            out.insert(m.clone(), poly_scale(p, s));
        }
        out
    }

    /// Complex conjugate (theta is real).
    pub fn conj(&self) -> CylFunction {
        let mut out = Self::zero(&self.group, self.n_edges);
        for (m, p) in &self.terms {
            out.insert(m.clone(), crate::group_backend::harmonic::poly_conj(&self.group, p));
        }
        out
    }

    pub fn mul(&self, other: &CylFunction) -> CylFunction {
        let mut out = Self::zero(&self.group, self.n_edges);
        for (m1, p1) in &self.terms {
            for (m2, p2) in &other.terms {
                let mut m = m1.clone();
                m.extend_from_slice(m2);
                m.sort();
                out.insert(m, poly_mul(&self.group, p1, p2));
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn theta_degree(&self) -> usize {
        self.terms.keys().map(|m| m.len()).max().unwrap_or(0)
    }

    /// Largest harmonic weight on any edge.
    pub fn group_weight(&self) -> u32 {
        (0..self.n_edges as u16)
            .map(|s| self.terms.values().map(|p| crate::group_backend::harmonic::poly_slot_weight(p, s)).max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    fn check_point(&self, p: &PhasePoint) -> Result<()> {
        if p.n_edges() != self.n_edges {
            return Err(Error::Shape(format!("function on {} edges evaluated at a point with {} edges", self.n_edges, p.n_edges())));
        }
        if self.group.is_finite() && self.theta_degree() > 0 {
            return Err(Error::Unsupported("theta coordinates on a finite backend".into()));
        }
        Ok(())
    }

    pub fn eval(&self, p: &PhasePoint) -> Result<C64> {
        self.check_point(p)?;
        let sv = SlotValues::new(&self.group, &p.g);
        Ok(self.eval_with(&sv, p))
    }

    fn eval_with(&self, sv: &SlotValues<'_>, p: &PhasePoint) -> C64 {
        self.terms
            .iter()
            .map(|(m, poly)| {
                let t: f64 = m.iter().map(|(e, a)| p.theta[*e as usize][*a as usize]).product();
                sv.poly(poly) * t
            })
            .sum()
    }

    /// `d f / d theta_{edge, a}`.
    pub fn d_theta(&self, edge: usize, a: usize) -> CylFunction {
        let key = (edge as u16, a as u8);
        let mut out = Self::zero(&self.group, self.n_edges);
        for (m, p) in &self.terms {
            let k = m.iter().filter(|x| **x == key).count();
            if k == 0 {
                continue;
            }
            let mut m2 = m.clone();
            let pos = m2.iter().position(|x| *x == key).unwrap();
            m2.remove(pos);
            out.insert(m2, poly_scale(p, c(k as f64, 0.0)));
        }
        out
    }

    /// `(R_a f)(g) = d/dt f(exp(t tau_a) g_edge)` at `t = 0`.
    pub fn right_derivative(&self, edge: usize, a: usize) -> Result<CylFunction> {
        self.lie()?;
        let mut out = Self::zero(&self.group, self.n_edges);
        for (m, p) in &self.terms {
            out.insert(m.clone(), poly_right_derivative(&self.group, p, edge as u16, a));
        }
        Ok(out)
    }

    fn lie(&self) -> Result<()> {
        if self.group.is_finite() {
            Err(Error::Unsupported(format!("Lie derivatives on {}", self.group.selector())))
        } else {
            Ok(())
        }
    }
}

/// `{f, f'} = sum_e <d_theta f, R f'> - <d_theta f', R f> - theta([d_theta f, d_theta f'])`.
#[allow(clippy::needless_range_loop)]
pub fn poisson_bracket(f: &CylFunction, g: &CylFunction) -> Result<CylFunction> {
    f.lie()?;
    if f.n_edges != g.n_edges || f.group != g.group {
        return Err(Error::Shape("bracket of functions on different graphs".into()));
    }
    let n = f.group.dim();
    let mut out = CylFunction::zero(&f.group, f.n_edges);
    for e in 0..f.n_edges {
        let df: Vec<CylFunction> = (0..n).map(|a| f.d_theta(e, a)).collect();
        let dg: Vec<CylFunction> = (0..n).map(|a| g.d_theta(e, a)).collect();
        for a in 0..n {
            if !df[a].is_zero() {
                out = out.add(&df[a].mul(&g.right_derivative(e, a)?));
            }
            if !dg[a].is_zero() {
                out = out.sub(&dg[a].mul(&f.right_derivative(e, a)?));
            }
            for b in 0..n {
                if df[a].is_zero() || dg[b].is_zero() {
                    continue;
                }
                for cc in 0..n {
                    let s = f.group.structure_constant(a, b, cc);
                    if s != 0.0 {
                        let th = CylFunction::theta(&f.group, f.n_edges, e, cc);
                        out = out.sub(&df[a].mul(&dg[b]).mul(&th).scale(c(s, 0.0)));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// The bracket evaluated at a point, without forming products of functions.
#[allow(clippy::needless_range_loop)]
pub fn poisson_bracket_at(f: &CylFunction, g: &CylFunction, p: &PhasePoint) -> Result<C64> {
    f.lie()?;
    f.check_point(p)?;
    g.check_point(p)?;
    let sv = SlotValues::new(&f.group, &p.g);
    let n = f.group.dim();
    let mut total = c(0.0, 0.0);
    for e in 0..f.n_edges {
        let df: Vec<C64> = (0..n).map(|a| f.d_theta(e, a).eval_with(&sv, p)).collect();
        let dg: Vec<C64> = (0..n).map(|a| g.d_theta(e, a).eval_with(&sv, p)).collect();
        for a in 0..n {
            if df[a].norm() != 0.0 {
                total += df[a] * g.right_derivative(e, a)?.eval_with(&sv, p);
            }
            if dg[a].norm() != 0.0 {
                total -= dg[a] * f.right_derivative(e, a)?.eval_with(&sv, p);
            }
            for b in 0..n {
                for cc in 0..n {
                    let s = levi_civita(a, b, cc);
                    if s != 0.0 && n == 3 {
                        total -= df[a] * dg[b] * p.theta[e][cc] * s;
                    }
                }
            }
        }
    }
    Ok(total)
}

/// Contribution `coef * CoAd(word) theta_src` to a target momentum.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaSource {
    pub coef: f64,
    pub src: usize,
    pub word: Word,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TargetEdge {
    /// Holonomy of the target edge as a word in source holonomies.
    pub word: Word,
    pub theta: Vec<ThetaSource>,
}

/// A map `Gamma_src -> Gamma_tgt` of the closed form shared by projections,
/// edge inversion and gauge transformations.
#[derive(Clone, Debug)]
pub struct PointMap {
    pub group: Group,
    pub n_src: usize,
    pub targets: Vec<TargetEdge>,
}

fn piece_letter(edge: usize, sign: i8) -> Letter {
    if sign > 0 {
        var(edge)
    } else {
        var_inv(edge)
    }
}

impl PointMap {
    /// Projection `p^c_{ll'}`: per coarse edge
    /// `g = g_m^{s_m} ... g_1^{s_1}` and
    /// `theta = sum_n c_n CoAd(g_m^{s_m} ... g_{n+1}^{s_{n+1}}) iota^{s_n}(theta_n)`.
    /// Fine edges outside every decomposition are dropped.
    pub fn projection(group: &Group, r: &Resolved) -> Self {
        let targets = r
            .pieces
            .iter()
            .zip(&r.weights)
            .map(|(pieces, ws)| {
                let word: Word = pieces.iter().map(|(e, s)| piece_letter(*e, *s)).collect();
                let theta = pieces
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| ws[*i] != 0.0)
                    .map(|(i, (e, s))| {
                        // inverted pieces: -CoAd(g^-1) theta, absorbed into the word
                        let upto = if *s > 0 { i } else { i + 1 };
                        ThetaSource { coef: ws[i] * *s as f64, src: *e, word: word[..upto].to_vec() }
                    })
                    .collect();
                TargetEdge { word, theta }
            })
            .collect();
        PointMap { group: group.clone(), n_src: r.n_fine, targets }
    }

    /// Edge inversion on every edge: `(theta, g) -> (-CoAd(g^-1) theta, g^-1)`.
    pub fn inversion(group: &Group, n: usize) -> Self {
        let targets = (0..n)
            .map(|e| TargetEdge { word: vec![var_inv(e)], theta: vec![ThetaSource { coef: -1.0, src: e, word: vec![var_inv(e)] }] })
            .collect();
        PointMap { group: group.clone(), n_src: n, targets }
    }

    pub fn n_tgt(&self) -> usize {
        self.targets.len()
    }

    pub fn apply(&self, p: &PhasePoint) -> Result<PhasePoint> {
        if p.n_edges() != self.n_src {
            return Err(Error::Shape(format!("point map expects {} edges, got {}", self.n_src, p.n_edges())));
        }
        let lie = !self.group.is_finite();
        let mut theta = Vec::with_capacity(self.targets.len());
        let mut g = Vec::with_capacity(self.targets.len());
        for t in &self.targets {
            g.push(crate::group_backend::harmonic::eval_word(&self.group, &t.word, &p.g));
            let mut th = vec![0.0; self.group.dim()];
            if lie {
                for s in &t.theta {
                    let h = crate::group_backend::harmonic::eval_word(&self.group, &s.word, &p.g);
                    let v = self.group.coad_raw(&h, &p.theta[s.src]);
                    for (x, y) in th.iter_mut().zip(v) {
                        *x += s.coef * y;
                    }
                }
            }
            theta.push(th);
        }
        Ok(PhasePoint { theta, g })
    }

    /// `Ad(h)_{ab}` as a polynomial in the letters of `word`.
    fn ad_entry(&self, a: usize, b: usize, word: &[Letter]) -> Poly {
        if word.is_empty() {
            return poly_const(c(if a == b { 1.0 } else { 0.0 }, 0.0));
        }
        let v = self.group.adjoint_intertwiner().expect("SU(2) intertwiner");
        let mut out = Vec::new();
        for p in 0..3 {
            for q in 0..3 {
                let co = v[(a, p)] * v[(b, q)].conj();
                if co.norm() < 1e-15 {
                    continue;
                }
                out.extend(expand_entry(&self.group, Entry::new(Irrep::Spin(2), p, q), word).into_iter().map(|(x, fs)| (x * co, fs)));
            }
        }
        crate::group_backend::harmonic::collect(out)
    }

    /// Target coordinate `theta_{e,a}` as a cylindrical function on the source.
    fn theta_pullback(&self, e: usize, a: usize) -> CylFunction {
        let mut out = CylFunction::zero(&self.group, self.n_src);
        let su2 = self.group.dim() == 3;
        for s in &self.targets[e].theta {
            if su2 {
                // (CoAd(h) theta)_a = sum_b theta_b Ad(h)_{ab}
                for b in 0..3 {
                    let p = self.ad_entry(a, b, &s.word);
                    if !p.is_empty() {
                        out.insert(vec![(s.src as u16, b as u8)], poly_scale(&p, c(s.coef, 0.0)));
                    }
                }
            } else {
                out.insert(vec![(s.src as u16, a as u8)], poly_const(c(s.coef, 0.0)));
            }
        }
        out
    }

    /// `f o map` as a cylindrical function on the source phase space.
    pub fn pullback(&self, f: &CylFunction) -> Result<CylFunction> {
        if f.n_edges != self.n_tgt() {
            return Err(Error::Shape(format!("function on {} edges pulled back along a map to {} edges", f.n_edges, self.n_tgt())));
        }
        if self.group.is_finite() && f.theta_degree() > 0 {
            return Err(Error::Unsupported("theta coordinates on a finite backend".into()));
        }
        let mut thetas: BTreeMap<(u16, u8), CylFunction> = BTreeMap::new();
        let mut out = CylFunction::zero(&self.group, self.n_src);
        for (m, p) in &f.terms {
            let mut acc = CylFunction::from_poly(&self.group, self.n_src, self.pullback_poly(p));
            for key in m {
                let t = thetas.entry(*key).or_insert_with(|| self.theta_pullback(key.0 as usize, key.1 as usize));
                acc = acc.mul(t);
                if acc.is_zero() {
                    break;
                }
            }
            out = out.add(&acc);
        }
        Ok(out)
    }

    /// Pullback of a harmonic polynomial in the target holonomies.
    pub fn pullback_poly(&self, p: &[Monomial]) -> Poly {
        let words: Vec<Option<Word>> = self.targets.iter().map(|t| Some(t.word.clone())).collect();
        crate::group_backend::harmonic::poly_subst(&self.group, p, &words)
    }
}

/// `project_point` for a resolved witness.
pub fn project_point(group: &Group, r: &Resolved, p: &PhasePoint) -> Result<PhasePoint> {
    if group.is_finite() && p.theta.iter().any(|t| !t.is_empty()) {
        return Err(Error::Unsupported("finite backends carry no theta data".into()));
    }
    PointMap::projection(group, r).apply(p)
}

/// `pullback_cyl` for a resolved witness.
pub fn pullback_cyl(group: &Group, r: &Resolved, f: &CylFunction) -> Result<CylFunction> {
    PointMap::projection(group, r).pullback(f)
}

/// Binary composition `p^c((theta2, g2), (theta1, g1)) = (c CoAd(g2) theta1 + (1 - c) theta2, g2 g1)`.
pub fn compose_pair(group: &Group, c_init: f64, terminal: (&[f64], &GroupElem), initial: (&[f64], &GroupElem)) -> (Vec<f64>, GroupElem) {
    let rot = group.coad_raw(terminal.1, initial.0);
    let th = rot.iter().zip(terminal.0).map(|(a, b)| c_init * a + (1.0 - c_init) * b).collect();
    (th, group.mul(terminal.1, initial.1))
}

/// Edge inversion `iota(theta, g) = (-CoAd(g^-1) theta, g^-1)`.
pub fn invert_pair(group: &Group, th: &[f64], g: &GroupElem) -> (Vec<f64>, GroupElem) {
    let gi = group.inv(g);
    (group.coad_raw(&gi, th).into_iter().map(|x| -x).collect(), gi)
}

/// Random cylindrical function: `n_terms` terms, each a random complex
/// coefficient times a theta-monomial of degree at most `max_deg` times one
/// irrep entry of harmonic weight at most `max_weight` on a random edge.
pub fn random_cyl<R: rand::Rng + ?Sized>(group: &Group, n_edges: usize, max_deg: usize, max_weight: u32, n_terms: usize, rng: &mut R) -> CylFunction {
    let mut f = CylFunction::zero(group, n_edges);
    let irreps: Vec<(Irrep, usize)> = match group.kind() {
        crate::group_backend::BackendKind::Finite(_) => group.irrep_table(),
        _ => group.with_cutoff(max_weight).irrep_table(),
    };
    for _ in 0..n_terms {
        let co = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let (r, d) = irreps[rng.random_range(0..irreps.len())];
        let e = Entry::new(r, rng.random_range(0..d), rng.random_range(0..d));
        let mut t = CylFunction::entry(group, n_edges, rng.random_range(0..n_edges), e).scale(co);
        if group.dim() > 0 {
            for _ in 0..rng.random_range(0..=max_deg) {
                t = t.mul(&CylFunction::theta(group, n_edges, rng.random_range(0..n_edges), rng.random_range(0..group.dim())));
            }
        }
        f = f.add(&t);
    }
    f
}
