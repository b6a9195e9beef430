//! Refinement isometries, the Haar state family and multiplier embeddings.
//!
//! Only finite chains are materialized. Every check here is a square between
//! two graphs of a chain; nothing claims consistency beyond the order class
//! of the witnesses involved.

use crate::group_backend::harmonic::{integrate_slot, poly_mul, var, Letter, Poly, Word};
use crate::quantum_algebra::{refinement_words, DenseKernel, HilbertBasis, LieKernel, Mat, Side, Tuples};
use crate::scalar::Scalar;
use crate::structured_graph::{compose_weight_vectors, Resolved};
use crate::{Error, Group, GroupElem, Result, C64};
use nalgebra::{DMatrix, DVector};

/// `(U Psi)(g') = Psi(g'_{e_m}^{s_m} ... g'_{e_1}^{s_1})` in the point basis.
/// With counting measure `U^H U = n^(E' - E)`; against normalized Haar
/// measure on both sides `U` is an isometry.
pub fn refinement_isometry_dense<T: Scalar>(group: &Group, r: &Resolved) -> Result<Mat<T>> {
    Mat::pullback(group, r.n_coarse, r.n_fine, &refinement_words(r))
}

/// The same map between orthonormal Peter-Weyl bases. A coarse spin `j`
/// spreads over the fine pieces without raising any single spin, so the fine
/// cutoff may equal the coarse one.
pub fn refinement_isometry_lie(r: &Resolved, src: &HilbertBasis, tgt: &HilbertBasis) -> Result<DMatrix<C64>> {
    if src.n_edges != r.n_coarse || tgt.n_edges != r.n_fine {
        return Err(Error::Shape(format!("witness {}->{} edges, spaces on {} and {}", r.n_coarse, r.n_fine, src.n_edges, tgt.n_edges)));
    }
    tgt.pullback_matrix(src, &refinement_words(r))
}

/// `U^H U - n^(E' - E) I` in the point basis; zero iff `U` is an isometry.
pub fn isometry_defect_dense<T: Scalar>(group: &Group, u: &Mat<T>, r: &Resolved) -> f64 {
    let n = group.order().unwrap_or(1) as i64;
    let scale = n.pow((r.n_fine - r.n_coarse) as u32);
    u.adjoint().mul(u).max_diff(&Mat::identity(u.cols).scale_int(scale))
}

pub fn isometry_defect_lie(u: &DMatrix<C64>) -> f64 {
    (u.adjoint() * u - DMatrix::identity(u.ncols(), u.ncols())).norm()
}

/// Witness composition for resolved data: `outer` refines `l` by `l'`,
/// `inner` refines `l'` by `l''`.
pub fn compose_resolved(outer: &Resolved, inner: &Resolved) -> Resolved {
    let mut pieces = Vec::new();
    let mut weights = Vec::new();
    for (ps, ws) in outer.pieces.iter().zip(&outer.weights) {
        let mut p = Vec::new();
        let mut sub = Vec::new();
        for &(e, s) in ps {
            if s > 0 {
                p.extend(inner.pieces[e].iter().cloned());
            } else {
                p.extend(inner.pieces[e].iter().rev().map(|&(f, t)| (f, -t)));
            }
            sub.push(inner.weights[e].clone());
        }
        let signs: Vec<i8> = ps.iter().map(|x| x.1).collect();
        weights.push(compose_weight_vectors(ws, &signs, &sub));
        pieces.push(p);
    }
    Resolved { n_coarse: outer.n_coarse, n_fine: inner.n_fine, pieces, weights }
}

/// `|| rho'(alpha(F)) U - U rho(F) ||`, exact in the point basis.
pub fn covariance_defect_dense<T: Scalar>(group: &Group, r: &Resolved, f: &DenseKernel<T>, side: Side) -> Result<f64> {
    let u = refinement_isometry_dense::<T>(group, r)?;
    let moved = f.graph_morphism(r)?;
    Ok(moved.rho(side).mul(&u).max_diff(&u.mul(&f.rho(side))))
}

/// Lie version on cutoff spaces: `rho(F)` maps `src` into `tgt` and the fine
/// spaces use the same cutoffs. The fine image conjugates `h` by holonomies,
/// so `tgt` usually needs more room than the coarse product alone.
pub fn covariance_defect_lie(r: &Resolved, f: &LieKernel, side: Side, src: &HilbertBasis, tgt: &HilbertBasis) -> Result<f64> {
    let group = &f.group;
    let (fs, ft) = (HilbertBasis::new(group, r.n_fine, src.cut), HilbertBasis::new(group, r.n_fine, tgt.cut));
    let (us, ut) = (refinement_isometry_lie(r, src, &fs)?, refinement_isometry_lie(r, tgt, &ft)?);
    let moved = f.graph_morphism(r)?.rho_matrix(side, &fs, &ft)?;
    Ok((moved * us - ut * f.rho_matrix(side, src, tgt)?).norm())
}

/// `U_{l l'} Psi - U_{l^-1 l'} (iota* Psi)` over a basis: refining a function
/// or refining its pullback to the inverted coarse graph agree.
pub fn inversion_symmetry_defect_lie(r: &Resolved, src: &HilbertBasis) -> Result<f64> {
    let tgt = HilbertBasis::new(&src.group, r.n_fine, src.cut);
    let direct = refinement_isometry_lie(r, src, &tgt)?;
    let inv_words: Vec<Word> = (0..r.n_coarse).map(|e| vec![crate::group_backend::harmonic::var_inv(e)]).collect();
    let iota = src.pullback_matrix(src, &inv_words)?;
    let via = refinement_isometry_lie(&r.inverted_coarse(), src, &tgt)? * iota;
    Ok((direct - via).norm())
}

pub fn inversion_symmetry_defect_dense<T: Scalar>(group: &Group, r: &Resolved) -> Result<f64> {
    let inv_words: Vec<Word> = (0..r.n_coarse).map(|e| vec![crate::group_backend::harmonic::var_inv(e)]).collect();
    let iota = Mat::<T>::pullback(group, r.n_coarse, r.n_coarse, &inv_words)?;
    let direct = refinement_isometry_dense::<T>(group, r)?;
    Ok(direct.max_diff(&refinement_isometry_dense::<T>(group, &r.inverted_coarse())?.mul(&iota)))
}

/// A state on a kernel algebra.
#[derive(Clone, Debug)]
pub enum StateFunctional {
    /// Integration of `F` against Haar measure in every argument; equal to
    /// the vector state of the constant function.
    Haar,
    /// Normalized vector state `<psi, rho_L(F) psi> / <psi, psi>`; `psi` in
    /// the point basis (finite) or the Peter-Weyl basis (Lie).
    Vector(Vec<C64>),
}

/// `(1 / n^(2E)) sum_{h,g} F(h, g)`.
pub fn haar_dense<T: Scalar>(f: &DenseKernel<T>) -> T {
    let total = f.data.iter().cloned().fold(T::zero(), |a, b| a + b);
    let n = f.tup.size as i64;
    total.div_int(n).div_int(n)
}

/// Haar integral of a Lie kernel; `delta` factors integrate to one.
pub fn haar_lie(f: &LieKernel) -> C64 {
    f.terms
        .values()
        .map(|p| {
            let mut q: Poly = p.clone();
            for s in 0..2 * f.n_edges {
                q = integrate_slot(&f.group, &q, s as u16);
            }
            q.iter().map(|(c, _)| *c).sum::<C64>()
        })
        .sum()
}

impl StateFunctional {
    pub fn eval_dense(&self, f: &DenseKernel<C64>) -> Result<C64> {
        match self {
            StateFunctional::Haar => Ok(haar_dense(f)),
            StateFunctional::Vector(psi) => {
                if psi.len() != f.size() {
                    return Err(Error::Shape(format!("state vector of length {} on a space of dimension {}", psi.len(), f.size())));
                }
                let m = f.rho(Side::Left);
                let mut num = C64::new(0.0, 0.0);
                for i in 0..m.rows {
                    for j in 0..m.cols {
                        num += psi[i].conj() * m.get(i, j) * psi[j];
                    }
                }
                Ok(num / psi.iter().map(|x| x.norm_sqr()).sum::<f64>())
            }
        }
    }

    /// `src` holds `psi`; `tgt` must hold `rho(F) psi`, and contains `src` as
    /// a prefix.
    pub fn eval_lie(&self, f: &LieKernel, src: &HilbertBasis, tgt: &HilbertBasis) -> Result<C64> {
        match self {
            StateFunctional::Haar => Ok(haar_lie(f)),
            StateFunctional::Vector(psi) => {
                if psi.len() != src.dim() {
                    return Err(Error::Shape(format!("state vector of length {} on a space of dimension {}", psi.len(), src.dim())));
                }
                let m = f.rho_matrix(Side::Left, src, tgt)?;
                let v = DVector::from_column_slice(psi);
                let w = m * &v;
                let num: C64 = v.iter().zip(w.iter()).map(|(a, b)| a.conj() * b).sum();
                Ok(num / v.norm_squared())
            }
        }
    }
}

/// `|omega_l(F) - omega_l'(alpha_{l'l}(F))|` for finite kernels.
pub fn state_consistency_residual_dense(r: &Resolved, coarse: &StateFunctional, fine: &StateFunctional, f: &DenseKernel<C64>) -> Result<f64> {
    Ok((coarse.eval_dense(f)? - fine.eval_dense(&f.graph_morphism(r)?)?).norm())
}

/// Lie version; vector states are evaluated on cutoff `cut` spaces with
/// targets large enough for `F`.
pub fn state_consistency_residual_lie(r: &Resolved, coarse: &StateFunctional, fine: &StateFunctional, f: &LieKernel, cut: u32) -> Result<f64> {
    let g = &f.group;
    let up = cut + f.weight();
    let a = coarse.eval_lie(f, &HilbertBasis::new(g, r.n_coarse, cut), &HilbertBasis::new(g, r.n_coarse, up))?;
    let b = fine.eval_lie(&f.graph_morphism(r)?, &HilbertBasis::new(g, r.n_fine, cut), &HilbertBasis::new(g, r.n_fine, up))?;
    Ok((a - b).norm())
}

/// The vector `1 + a chi(g_edge)` for a one-dimensional real character `chi`
/// given by its values, in the point basis: a non-Haar state on one factor.
pub fn perturbed_vector_dense(tup: &Tuples, edge: usize, chi: &[f64], a: f64) -> Vec<C64> {
    (0..tup.size).map(|x| C64::new(1.0 + a * chi[tup.decode(x)[edge]], 0.0)).collect()
}

/// `M_f` for a function of the holonomies, in the point basis.
pub fn multiplication_dense<T: Scalar>(group: &Group, n_edges: usize, f: impl Fn(&[usize]) -> T) -> Result<Mat<T>> {
    let tup = Tuples::new(group, n_edges)?;
    let mut m = Mat::zeros(tup.size, tup.size);
    for x in 0..tup.size {
        m.set(x, x, f(&tup.decode(x)));
    }
    Ok(m)
}

/// `M_f : src -> tgt` for a harmonic polynomial `f` in slots `0..E`.
pub fn multiplication_lie(f: &Poly, src: &HilbertBasis, tgt: &HilbertBasis) -> Result<DMatrix<C64>> {
    let g = src.group.clone();
    tgt.matrix_from(src, |p| poly_mul(&g, f, p))
}

fn left_words(group: &Group, k: &[GroupElem]) -> Vec<Word> {
    k.iter().enumerate().map(|(e, x)| vec![Letter::Const(group.inv(x)), var(e)]).collect()
}

/// `(L_k Psi)(g) = Psi(k^-1 g)` edgewise.
pub fn left_translation_dense<T: Scalar>(group: &Group, k: &[GroupElem]) -> Result<Mat<T>> {
    Mat::pullback(group, k.len(), k.len(), &left_words(group, k))
}

pub fn left_translation_lie(basis: &HilbertBasis, k: &[GroupElem]) -> Result<DMatrix<C64>> {
    basis.pullback_matrix(basis, &left_words(&basis.group, k))
}

/// `alpha_k f = f(k^-1 .)` as a polynomial.
pub fn translate_poly(group: &Group, f: &Poly, k: &[GroupElem]) -> Poly {
    let ws: Vec<Option<Word>> = left_words(group, k).into_iter().map(Some).collect();
    crate::group_backend::harmonic::poly_subst(group, f, &ws)
}

/// `i(alpha_k f) - i(k) i(f) i(k)^*` for a finite function given by values.
pub fn multiplier_covariance_defect_dense<T: Scalar>(group: &Group, k: &[GroupElem], values: &dyn Fn(&[usize]) -> T) -> Result<f64> {
    let t = group.table().ok_or_else(|| Error::Unsupported("point basis needs a finite group".into()))?;
    let kinv: Vec<usize> = k
        .iter()
        .map(|x| match x {
            GroupElem::Finite { idx, .. } => t.inv(*idx as usize),
            _ => unreachable!(),
        })
        .collect();
    let l = left_translation_dense::<T>(group, k)?;
    let mf = multiplication_dense(group, k.len(), values)?;
    let moved = multiplication_dense(group, k.len(), |g: &[usize]| {
        let x: Vec<usize> = g.iter().zip(&kinv).map(|(a, b)| t.mul(*b, *a)).collect();
        values(&x)
    })?;
    Ok(moved.max_diff(&l.mul(&mf).mul(&l.adjoint())))
}

/// Lie version; `tgt` must hold `f` times `src`.
pub fn multiplier_covariance_defect_lie(f: &Poly, k: &[GroupElem], src: &HilbertBasis, tgt: &HilbertBasis) -> Result<f64> {
    let (ls, lt) = (left_translation_lie(src, k)?, left_translation_lie(tgt, k)?);
    let moved = multiplication_lie(&translate_poly(&src.group, f, k), src, tgt)?;
    Ok((moved - lt * multiplication_lie(f, src, tgt)? * ls.adjoint()).norm())
}
