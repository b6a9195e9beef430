//! Harmonically finite kernels and cutoff Hilbert spaces on Lie backends.
//!
//! A [`LieKernel`] is a sum of terms `prod_{e in mask} delta(h_e) * P(h, g)`
//! where `P` is a harmonic polynomial without `h_e` dependence on masked
//! edges. Keeping `delta` symbolic makes it an exact unit at every cutoff.
//! Operators are obtained by applying kernels to basis polynomials and
//! projecting onto the orthonormal Peter-Weyl basis `sqrt(d) D^j_{mn}`.

use super::{edge_morphs, Fundamental, Side};
use crate::group_backend::harmonic::{
    canonical, collect, integrate_slot, poly_conj, poly_const, poly_mul, poly_relabel, poly_scale, poly_subst, var, var_inv, Entry, Factor, Letter, Monomial, Poly,
    Word,
};
use crate::group_backend::{mode_order, BackendKind, Group, Irrep};
use crate::scalar::c;
use crate::structured_graph::Resolved;
use crate::{Error, Result, C64};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

/// A Peter-Weyl basis label on one slot.
pub type Label = (Irrep, u8, u8);

type ExpansionCache = Mutex<HashMap<(BackendKind, Vec<Entry>), Arc<Vec<(Label, C64)>>>>;

fn family(group: &Group) -> BackendKind {
    match group.kind() {
        BackendKind::U1 { .. } => BackendKind::U1 { modes: 0 },
        BackendKind::Su2 { .. } => BackendKind::Su2 { two_j: 0 },
        k => k,
    }
}

fn trivial_label(group: &Group) -> Label {
    match group.kind() {
        BackendKind::Finite(_) => (Irrep::Finite(0), 0, 0),
        BackendKind::U1 { .. } => (Irrep::Mode(0), 0, 0),
        BackendKind::Su2 { .. } => (Irrep::Spin(0), 0, 0),
    }
}

/// Irreps of harmonic weight at most `cut`, in basis order.
pub fn irreps_upto(group: &Group, cut: u32) -> Vec<Irrep> {
    match group.kind() {
        BackendKind::Finite(_) => group.irrep_table().into_iter().map(|(r, _)| r).collect(),
        BackendKind::U1 { .. } => mode_order(cut).into_iter().map(Irrep::Mode).collect(),
        BackendKind::Su2 { .. } => (0..=cut).map(Irrep::Spin).collect(),
    }
}

/// Peter-Weyl coefficients of a product of entries on a single slot.
fn slot_expand(group: &Group, entries: &[Entry]) -> Arc<Vec<(Label, C64)>> {
    static CACHE: OnceLock<ExpansionCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (family(group), entries.to_vec());
    if let Some(v) = cache.lock().unwrap().get(&key) {
        return v.clone();
    }
    let out: Vec<(Label, C64)> = match group.kind() {
        BackendKind::U1 { .. } => {
            let k: i32 = entries.iter().map(|e| if let Irrep::Mode(k) = e.irrep { if e.conj { -k } else { k } } else { 0 }).sum();
            vec![((Irrep::Mode(k), 0, 0), c(1.0, 0.0))]
        }
        _ => {
            let w: u32 = entries.iter().map(|e| e.irrep.weight()).sum();
            let candidates: Vec<Irrep> = match group.kind() {
                BackendKind::Su2 { .. } => (0..=w).filter(|tj| (w - tj).is_multiple_of(2)).map(Irrep::Spin).collect(),
                _ => irreps_upto(group, 0),
            };
            let mut out = Vec::new();
            for r in candidates {
                let d = group.irrep_dim(r);
                for m in 0..d {
                    for n in 0..d {
                        let mut es = entries.to_vec();
                        es.push(Entry { irrep: r, row: m as u8, col: n as u8, conj: true });
                        let v = group.integrate_entries(&es) * (d as f64).sqrt();
                        if v.norm() > 1e-13 {
                            out.push(((r, m as u8, n as u8), v));
                        }
                    }
                }
            }
            out
        }
    };
    let out = Arc::new(out);
    cache.lock().unwrap().insert(key, out.clone());
    out
}

/// Coefficients of `p` in the tensor Peter-Weyl basis of `n_slots` slots.
pub fn poly_coefficients(group: &Group, p: &[Monomial], n_slots: usize) -> HashMap<Vec<Label>, C64> {
    let triv = trivial_label(group);
    let mut out: HashMap<Vec<Label>, C64> = HashMap::new();
    for (co, fs) in p {
        let mut per_slot: Vec<Vec<Entry>> = vec![Vec::new(); n_slots];
        for f in fs {
            assert!((f.slot as usize) < n_slots, "slot {} outside {n_slots}", f.slot);
            per_slot[f.slot as usize].push(f.entry);
        }
        let mut acc: Vec<(Vec<Label>, C64)> = vec![(Vec::with_capacity(n_slots), *co)];
        for es in &per_slot {
            let ex = if es.is_empty() { Arc::new(vec![(triv, c(1.0, 0.0))]) } else { slot_expand(group, es) };
            acc = acc
                .iter()
                .flat_map(|(l, v)| {
                    ex.iter().map(move |(lab, x)| {
                        let mut l = l.clone();
                        l.push(*lab);
                        (l, v * x)
                    })
                })
                .collect();
        }
        for (l, v) in acc {
            *out.entry(l).or_insert(c(0.0, 0.0)) += v;
        }
    }
    out
}

/// `L^2` norm of a polynomial in `n_slots` slots.
pub fn poly_norm(group: &Group, p: &[Monomial], n_slots: usize) -> f64 {
    poly_coefficients(group, p, n_slots).values().map(|v| v.norm_sqr()).fold(0.0, |a, x| a + x).sqrt()
}

/// Orthonormal basis `prod_e sqrt(d) D_{mn}(g_e)` of the cutoff space.
#[derive(Clone, Debug)]
pub struct HilbertBasis {
    pub group: Group,
    pub n_edges: usize,
    pub cut: u32,
    pub local: Vec<Label>,
    index: HashMap<Label, usize>,
}

impl HilbertBasis {
    pub fn new(group: &Group, n_edges: usize, cut: u32) -> Self {
        let mut local = Vec::new();
        for r in irreps_upto(group, cut) {
            let d = group.irrep_dim(r);
            for m in 0..d {
                for n in 0..d {
                    local.push((r, m as u8, n as u8));
                }
            }
        }
        let index = local.iter().enumerate().map(|(i, l)| (*l, i)).collect();
        HilbertBasis { group: group.clone(), n_edges, cut, local, index }
    }

    /// Basis at the backend's own cutoff.
    pub fn at_cutoff(group: &Group, n_edges: usize) -> Self {
        Self::new(group, n_edges, group.cutoff())
    }

    pub fn dim(&self) -> usize {
        self.local.len().pow(self.n_edges as u32)
    }

    /// `(irrep, row, col)` per edge for every basis vector.
    pub fn manifest(&self) -> Vec<Vec<String>> {
        (0..self.dim()).map(|i| self.labels(i).iter().map(|(r, m, n)| format!("{r}[{m},{n}]")).collect()).collect()
    }

    fn labels(&self, mut i: usize) -> Vec<Label> {
        let d = self.local.len();
        let mut out = vec![self.local[0]; self.n_edges];
        for e in (0..self.n_edges).rev() {
            out[e] = self.local[i % d];
            i /= d;
        }
        out
    }

    pub fn vector_poly(&self, i: usize) -> Poly {
        let mut co = c(1.0, 0.0);
        let mut fs = Vec::new();
        for (e, (r, m, n)) in self.labels(i).into_iter().enumerate() {
            co *= (self.group.irrep_dim(r) as f64).sqrt();
            fs.push(Factor { slot: e as u16, entry: Entry::new(r, m as usize, n as usize) });
        }
        canonical(&self.group, co, fs).into_iter().collect()
    }

    pub fn poly_of(&self, v: &[C64]) -> Poly {
        collect(v.iter().enumerate().filter(|(_, x)| x.norm() > 0.0).flat_map(|(i, x)| poly_scale(&self.vector_poly(i), *x)))
    }

    /// Coordinates of `p`; fails if `p` has weight beyond the cutoff.
    pub fn project(&self, p: &[Monomial]) -> Result<Vec<C64>> {
        let d = self.local.len();
        let mut v = vec![c(0.0, 0.0); self.dim()];
        let mut need = 0u32;
        for (labels, x) in poly_coefficients(&self.group, p, self.n_edges) {
            if x.norm() < 1e-12 {
                continue;
            }
            let mut idx = 0;
            let mut ok = true;
            for l in &labels {
                match self.index.get(l) {
                    Some(i) => idx = idx * d + i,
                    None => {
                        ok = false;
                        need = need.max(l.0.weight());
                    }
                }
            }
            if ok {
                v[idx] += x;
            } else {
                need = need.max(labels.iter().map(|l| l.0.weight()).max().unwrap_or(0));
            }
        }
        if need > 0 {
            return Err(Error::CutoffOverflow(format!("result has harmonic weight {need} per edge but the Hilbert cutoff is {}; required cutoff {need}", self.cut)));
        }
        Ok(v)
    }

    /// Matrix of `Psi -> Psi o w` from `src` to `self`, `w` one word per
    /// source edge in the target slots.
    pub fn pullback_matrix(&self, src: &HilbertBasis, words: &[Word]) -> Result<DMatrix<C64>> {
        let ws: Vec<Option<Word>> = words.iter().cloned().map(Some).collect();
        self.matrix_from(src, |p| poly_subst(&self.group, p, &ws))
    }

    /// Matrix of a linear map given on polynomials, columns indexed by `src`.
    pub fn matrix_from(&self, src: &HilbertBasis, f: impl Fn(&Poly) -> Poly + Sync) -> Result<DMatrix<C64>> {
        let cols: Vec<Vec<C64>> = (0..src.dim()).into_par_iter().map(|j| self.project(&f(&src.vector_poly(j)))).collect::<Result<_>>()?;
        Ok(DMatrix::from_fn(self.dim(), src.dim(), |i, j| cols[j][i]))
    }
}

#[derive(Clone, Debug)]
pub struct LieKernel {
    pub group: Group,
    pub n_edges: usize,
    /// `delta` mask (bit `e` for edge `e`) to polynomial in slots `0..2E`.
    pub terms: BTreeMap<u64, Poly>,
}

fn has(mask: u64, e: usize) -> bool {
    mask >> e & 1 == 1
}

impl LieKernel {
    pub fn zero(group: &Group, n_edges: usize) -> Self {
        LieKernel { group: group.clone(), n_edges, terms: BTreeMap::new() }
    }

    /// `prod_e delta(h_e)`.
    pub fn delta(group: &Group, n_edges: usize) -> Self {
        Self::term(group, n_edges, (1u64 << n_edges) - 1, poly_const(c(1.0, 0.0)))
    }

    /// One term; `h` factors on masked edges are evaluated at the identity.
    pub fn term(group: &Group, n_edges: usize, mask: u64, p: Poly) -> Self {
        let words: Vec<Option<Word>> = (0..2 * n_edges).map(|s| Some(if s < n_edges && has(mask, s) { Vec::new() } else { vec![var(s)] })).collect();
        let p = poly_subst(group, &p, &words);
        let mut k = Self::zero(group, n_edges);
        if !p.is_empty() {
            k.terms.insert(mask, p);
        }
        k
    }

    /// `sum_{j <= cut} d_j chi_j(h_e)` on every edge: the pointwise
    /// realisation of `delta` on the cutoff space.
    pub fn truncated_delta(group: &Group, n_edges: usize, cut: u32) -> Self {
        let mut p = poly_const(c(1.0, 0.0));
        for e in 0..n_edges {
            let mut chi = Vec::new();
            for r in irreps_upto(group, cut) {
                let d = group.irrep_dim(r);
                for m in 0..d {
                    chi.extend(canonical(group, c(d as f64, 0.0), vec![Factor { slot: e as u16, entry: Entry::new(r, m, m) }]));
                }
            }
            p = poly_mul(group, &p, &collect(chi));
        }
        Self::term(group, n_edges, 0, p)
    }

    /// Random kernel with irrep weight at most `weight` on every slot.
    pub fn random<R: Rng + ?Sized>(group: &Group, n_edges: usize, weight: u32, n_terms: usize, p_delta: f64, rng: &mut R) -> Self {
        let irreps = irreps_upto(group, weight);
        let mut k = Self::zero(group, n_edges);
        for _ in 0..n_terms {
            let mask = (0..n_edges).filter(|_| rng.random::<f64>() < p_delta).fold(0u64, |m, e| m | 1 << e);
            let co = c(rng.sample(StandardNormal), rng.sample(StandardNormal));
            let mut fs = Vec::new();
            for s in 0..2 * n_edges {
                if (s < n_edges && has(mask, s)) || rng.random::<f64>() < 0.3 {
                    continue;
                }
                let r = irreps[rng.random_range(0..irreps.len())];
                let d = group.irrep_dim(r);
                fs.push(Factor { slot: s as u16, entry: Entry::new(r, rng.random_range(0..d), rng.random_range(0..d)) });
            }
            if let Some(m) = canonical(group, co, fs) {
                k = k.add(&Self::term(group, n_edges, mask, vec![m]));
            }
        }
        k
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut k = self.clone();
        for (m, p) in &o.terms {
            let merged = collect(k.terms.get(m).cloned().unwrap_or_default().into_iter().chain(p.iter().cloned()));
            if merged.is_empty() {
                k.terms.remove(m);
            } else {
                k.terms.insert(*m, merged);
            }
        }
        k
    }

    pub fn scale(&self, s: C64) -> Self {
        LieKernel { terms: self.terms.iter().map(|(m, p)| (*m, poly_scale(p, s))).collect(), ..self.clone() }
    }

    /// Largest `L^2` norm of the difference over `delta` masks.
    pub fn residual(&self, o: &Self) -> f64 {
        let d = self.add(&o.scale(c(-1.0, 0.0)));
        d.terms.values().map(|p| poly_norm(&self.group, p, 2 * self.n_edges)).fold(0.0, f64::max)
    }

    /// Largest slot weight of any term.
    pub fn weight(&self) -> u32 {
        let mut w = 0;
        for p in self.terms.values() {
            for s in 0..2 * self.n_edges {
                w = w.max(crate::group_backend::harmonic::poly_slot_weight(p, s as u16));
            }
        }
        w
    }

    fn check(&self, o: &Self) -> Result<()> {
        if family(&self.group) != family(&o.group) || self.n_edges != o.n_edges {
            return Err(Error::BackendMismatch(format!("kernels on {} edges of {} and {} edges of {}", self.n_edges, self.group.selector(), o.n_edges, o.group.selector())));
        }
        Ok(())
    }

    /// Substitutes `h_e` and `g_e` edgewise, keeping the masks. On masked
    /// edges `h_e = 1`, so `h` letters are dropped from the `g` words.
    pub fn edgewise(&self, h_word: impl Fn(usize) -> Word, g_word: impl Fn(usize) -> Word, conj: bool) -> Self {
        let n = self.n_edges;
        let mut out = Self::zero(&self.group, n);
        for (mask, p) in &self.terms {
            let mut words: Vec<Option<Word>> = vec![None; 2 * n];
            for e in 0..n {
                if has(*mask, e) {
                    words[n + e] = Some(g_word(e).into_iter().filter(|l| !matches!(l, Letter::Var { slot, .. } if *slot as usize == e)).collect());
                } else {
                    words[e] = Some(h_word(e));
                    words[n + e] = Some(g_word(e));
                }
            }
            let mut q = poly_subst(&self.group, p, &words);
            if conj {
                q = poly_conj(&self.group, &q);
            }
            out = out.add(&LieKernel { group: self.group.clone(), n_edges: n, terms: BTreeMap::from([(*mask, q)]) });
        }
        out
    }

    pub fn convolve(&self, side: Side, o: &Self) -> Result<Self> {
        self.check(o)?;
        let n = self.n_edges;
        let k = |e: usize| 2 * n + e;
        let mut out = Self::zero(&self.group, n);
        for (m1, p1) in &self.terms {
            for (m2, p2) in &o.terms {
                let mut w1: Vec<Option<Word>> = vec![None; 2 * n];
                let mut w2: Vec<Option<Word>> = vec![None; 2 * n];
                let mut integrate = Vec::new();
                for e in 0..n {
                    let (d1, d2) = (has(*m1, e), has(*m2, e));
                    w1[n + e] = Some(vec![var(n + e)]);
                    match (d1, d2) {
                        (true, true) => w2[n + e] = Some(vec![var(n + e)]),
                        // k = 1
                        (true, false) => {
                            w2[e] = Some(vec![var(e)]);
                            w2[n + e] = Some(vec![var(n + e)]);
                        }
                        // k = h
                        (false, true) => {
                            w1[e] = Some(vec![var(e)]);
                            w2[n + e] = Some(match side {
                                Side::Left => vec![var_inv(e), var(n + e)],
                                Side::Right => vec![var(n + e), var(e)],
                            });
                        }
                        (false, false) => {
                            w1[e] = Some(vec![var(k(e))]);
                            w2[e] = Some(vec![var_inv(k(e)), var(e)]);
                            w2[n + e] = Some(match side {
                                Side::Left => vec![var_inv(k(e)), var(n + e)],
                                Side::Right => vec![var(n + e), var(k(e))],
                            });
                            integrate.push(k(e));
                        }
                    }
                }
                let mut q = poly_mul(&self.group, &poly_subst(&self.group, p1, &w1), &poly_subst(&self.group, p2, &w2));
                for s in integrate {
                    q = integrate_slot(&self.group, &q, s as u16);
                }
                out = out.add(&LieKernel { group: self.group.clone(), n_edges: n, terms: BTreeMap::from([(m1 & m2, q)]) });
            }
        }
        Ok(out)
    }

    pub fn involute(&self, side: Side) -> Self {
        let n = self.n_edges;
        self.edgewise(
            |e| vec![var_inv(e)],
            |e| match side {
                Side::Left => vec![var_inv(e), var(n + e)],
                Side::Right => vec![var(n + e), var(e)],
            },
            true,
        )
    }

    pub fn iso_i(&self) -> Self {
        let n = self.n_edges;
        self.edgewise(|e| vec![var(n + e), var_inv(e), var_inv(n + e)], |e| vec![var(n + e)], false)
    }

    pub fn iso_i_inv(&self) -> Self {
        let n = self.n_edges;
        self.edgewise(|e| vec![var_inv(n + e), var_inv(e), var(n + e)], |e| vec![var(n + e)], false)
    }

    /// `gamma(F)(h, g) = F(g^-1 h^-1 g, g^-1)` on every edge.
    pub fn gamma(&self) -> Self {
        let n = self.n_edges;
        self.edgewise(|e| vec![var_inv(n + e), var_inv(e), var(n + e)], |e| vec![var_inv(n + e)], false)
    }

    pub fn fundamental(&self, kind: Fundamental) -> Result<Self> {
        if self.n_edges != 1 {
            return Err(Error::Shape(format!("fundamental morphisms act on one edge, got {}", self.n_edges)));
        }
        match kind.split() {
            None => Ok(self.gamma()),
            Some(r) => self.graph_morphism(&r),
        }
    }

    pub fn graph_morphism(&self, r: &Resolved) -> Result<Self> {
        if r.n_coarse != self.n_edges {
            return Err(Error::Shape(format!("witness with {} coarse edges applied to a kernel on {}", r.n_coarse, self.n_edges)));
        }
        let morphs = edge_morphs(r)?;
        let n = self.n_edges;
        let carriers: Vec<usize> = morphs.iter().map(|m| m.carrier).collect();
        let base: u64 = (0..r.n_fine).filter(|f| !carriers.contains(f)).fold(0, |m, f| m | 1 << f);
        let mut out = Self::zero(&self.group, r.n_fine);
        for (mask, p) in &self.terms {
            let mut words: Vec<Option<Word>> = vec![None; 2 * n];
            let mut fine_mask = base;
            for (e, m) in morphs.iter().enumerate() {
                words[n + e] = Some(m.g_word.clone());
                if has(*mask, e) {
                    fine_mask |= 1 << m.carrier;
                } else {
                    words[e] = Some(m.h_word.clone());
                }
            }
            let q = poly_subst(&self.group, p, &words);
            out = out.add(&LieKernel { group: self.group.clone(), n_edges: r.n_fine, terms: BTreeMap::from([(fine_mask, q)]) });
        }
        Ok(out)
    }

    /// `rho_side(F) Psi` for a polynomial `Psi` in slots `0..E`.
    pub fn apply(&self, side: Side, psi: &[Monomial]) -> Poly {
        let n = self.n_edges;
        let mut out = Vec::new();
        for (mask, p) in &self.terms {
            let words: Vec<Option<Word>> = (0..n)
                .map(|e| {
                    Some(if has(*mask, e) {
                        vec![var(n + e)]
                    } else {
                        match side {
                            Side::Left => vec![var_inv(e), var(n + e)],
                            Side::Right => vec![var(n + e), var(e)],
                        }
                    })
                })
                .collect();
            let mut q = poly_mul(&self.group, p, &poly_subst(&self.group, psi, &words));
            for e in 0..n {
                if !has(*mask, e) {
                    q = integrate_slot(&self.group, &q, e as u16);
                }
            }
            out.extend(poly_relabel(&self.group, &q, |s| s - n as u16));
        }
        collect(out)
    }

    /// Matrix of `rho_side(F)` from `src` to `tgt`; overflow of `tgt` is an error.
    pub fn rho_matrix(&self, side: Side, src: &HilbertBasis, tgt: &HilbertBasis) -> Result<DMatrix<C64>> {
        if src.n_edges != self.n_edges || tgt.n_edges != self.n_edges {
            return Err(Error::Shape(format!("kernel on {} edges, spaces on {} and {}", self.n_edges, src.n_edges, tgt.n_edges)));
        }
        tgt.matrix_from(src, |p| self.apply(side, p))
    }
}
