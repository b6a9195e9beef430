//! Weyl and Kohn-Nirenberg quantization of cylindrical symbols.
//!
//! Operators are applied symbolically to harmonic polynomials. On U(1) a
//! symbol `theta^m e^{iN phi}` sends the mode `k` to `k + N` with coefficient
//! `(eps (k + N/2))^m` (Weyl, midpoint) or `(eps k)^m` (Kohn-Nirenberg). On
//! SU(2) only theta-degree at most one is supported, through the symmetric
//! ordering `Q(theta_a f) = (-i eps / 2)(R_a M_f + M_f R_a)`.

use crate::group_backend::harmonic::{canonical, collect, poly_mul, poly_right_derivative, poly_scale, poly_subst, var_inv, Monomial, Poly, Word};
use crate::group_backend::{BackendKind, Irrep};
use crate::phase_space::{pullback_cyl, CylFunction, PointMap};
use crate::quantum_algebra::{poly_norm, refinement_words, HilbertBasis};
use crate::scalar::c;
use crate::structured_graph::Resolved;
use crate::{Error, Result, C64};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use num_complex::Complex;
use num_rational::Ratio;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    Weyl,
    KohnNirenberg,
}

/// Rejects symbols outside the supported class before any work is done.
pub fn check_supported(sigma: &CylFunction, eps: f64, ordering: Ordering) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Domain(format!("deformation parameter must be positive, got {eps}")));
    }
    let deg = sigma.theta_degree();
    match sigma.group.kind() {
        BackendKind::U1 { .. } => Ok(()),
        BackendKind::Su2 { .. } if ordering == Ordering::KohnNirenberg && deg > 0 => Err(Error::Unsupported("Kohn-Nirenberg ordering is only provided on U(1)".into())),
        BackendKind::Su2 { .. } if deg > 1 => {
            Err(Error::Unsupported(format!("SU(2) quantization is provided for theta-degree at most 1, the symbol has degree {deg}")))
        }
        BackendKind::Finite(_) if deg > 0 => Err(Error::Unsupported("theta-dependent symbols on a finite backend".into())),
        _ => Ok(()),
    }
}

fn slot_modes(fs: &[crate::group_backend::harmonic::Factor]) -> BTreeMap<u16, i32> {
    let mut out = BTreeMap::new();
    for f in fs {
        if let Irrep::Mode(k) = f.entry.irrep {
            *out.entry(f.slot).or_insert(0) += if f.entry.conj { -k } else { k };
        }
    }
    out
}

fn apply_u1(sigma: &CylFunction, eps: f64, ordering: Ordering, psi: &[Monomial]) -> Poly {
    let group = &sigma.group;
    let mut out = Vec::new();
    for (mono, p) in &sigma.terms {
        let mut powers: BTreeMap<u16, i32> = BTreeMap::new();
        for (e, _) in mono {
            *powers.entry(*e).or_insert(0) += 1;
        }
        for (cs, fs) in p {
            let n_modes = slot_modes(fs);
            for (cp, fp) in psi {
                let k_modes = slot_modes(fp);
                let mut co = cs * cp;
                for (e, m) in &powers {
                    let k = *k_modes.get(e).unwrap_or(&0) as f64;
                    let n = *n_modes.get(e).unwrap_or(&0) as f64;
                    let base = match ordering {
                        Ordering::Weyl => eps * (k + n / 2.0),
                        Ordering::KohnNirenberg => eps * k,
                    };
                    co *= base.powi(*m);
                }
                let mut all = fs.clone();
                all.extend_from_slice(fp);
                out.extend(canonical(group, co, all));
            }
        }
    }
    collect(out)
}

fn apply_symmetric(sigma: &CylFunction, eps: f64, psi: &[Monomial]) -> Poly {
    let group = &sigma.group;
    let mut out = Vec::new();
    for (mono, f) in &sigma.terms {
        let fpsi = poly_mul(group, f, psi);
        match mono.as_slice() {
            [] => out.extend(fpsi),
            [(e, a)] => {
                let r1 = poly_right_derivative(group, &fpsi, *e, *a as usize);
                let r2 = poly_mul(group, f, &poly_right_derivative(group, psi, *e, *a as usize));
                out.extend(poly_scale(&r1, c(0.0, -eps / 2.0)));
                out.extend(poly_scale(&r2, c(0.0, -eps / 2.0)));
            }
            _ => unreachable!("degree checked"),
        }
    }
    collect(out)
}

/// `Q(sigma) Psi` for `Psi` a polynomial in the edge slots.
pub fn apply(sigma: &CylFunction, eps: f64, ordering: Ordering, psi: &[Monomial]) -> Result<Poly> {
    check_supported(sigma, eps, ordering)?;
    Ok(apply_unchecked(sigma, eps, ordering, psi))
}

fn apply_unchecked(sigma: &CylFunction, eps: f64, ordering: Ordering, psi: &[Monomial]) -> Poly {
    match sigma.group.kind() {
        BackendKind::U1 { .. } => apply_u1(sigma, eps, ordering, psi),
        _ => apply_symmetric(sigma, eps, psi),
    }
}

/// Operator matrix from `src` to `tgt`.
pub fn weyl_quantize(sigma: &CylFunction, eps: f64, ordering: Ordering, src: &HilbertBasis, tgt: &HilbertBasis) -> Result<DMatrix<C64>> {
    check_supported(sigma, eps, ordering)?;
    if src.n_edges != sigma.n_edges || tgt.n_edges != sigma.n_edges {
        return Err(Error::Shape(format!("symbol on {} edges, spaces on {} and {}", sigma.n_edges, src.n_edges, tgt.n_edges)));
    }
    tgt.matrix_from(src, |p| apply_unchecked(sigma, eps, ordering, p))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceResidual {
    /// `sup ||Q(p*sigma) U Psi - U Q(sigma) Psi||`.
    pub direct: f64,
    /// Same with the inverted coarse graph: `Q(p*_{l^-1 l'} iota* sigma) U_{l^-1 l'} iota* Psi`.
    pub inverted: f64,
}

/// Covariance of quantization under the refinement `r`, tested on every
/// basis vector of `src` (the coarse cutoff space).
pub fn covariance_residuals(r: &Resolved, sigma: &CylFunction, eps: f64, ordering: Ordering, src: &HilbertBasis) -> Result<CovarianceResidual> {
    check_supported(sigma, eps, ordering)?;
    let group = &sigma.group;
    let words: Vec<Option<Word>> = refinement_words(r).into_iter().map(Some).collect();
    let fine = pullback_cyl(group, r, sigma)?;
    check_supported(&fine, eps, ordering)?;

    let ri = r.inverted_coarse();
    let words_inv: Vec<Option<Word>> = refinement_words(&ri).into_iter().map(Some).collect();
    let sigma_inv = PointMap::inversion(group, r.n_coarse).pullback(sigma)?;
    let fine_inv = pullback_cyl(group, &ri, &sigma_inv)?;
    check_supported(&fine_inv, eps, ordering)?;
    let flip: Vec<Option<Word>> = (0..r.n_coarse).map(|e| Some(vec![var_inv(e)])).collect();

    let res: Vec<(f64, f64)> = (0..src.dim())
        .into_par_iter()
        .map(|j| {
            let psi = src.vector_poly(j);
            let rhs = poly_subst(group, &apply_unchecked(sigma, eps, ordering, &psi), &words);
            let lhs = apply_unchecked(&fine, eps, ordering, &poly_subst(group, &psi, &words));
            let lhs_inv = apply_unchecked(&fine_inv, eps, ordering, &poly_subst(group, &poly_subst(group, &psi, &flip), &words_inv));
            let d = |a: &Poly| poly_norm(group, &collect(a.iter().cloned().chain(poly_scale(&rhs, c(-1.0, 0.0)))), r.n_fine);
            (d(&lhs), d(&lhs_inv))
        })
        .collect();
    Ok(CovarianceResidual { direct: res.iter().map(|x| x.0).fold(0.0, f64::max), inverted: res.iter().map(|x| x.1).fold(0.0, f64::max) })
}

/// Kernel-formula value of `theta^m e^{iN phi}` on the mode `k`, computed with
/// the normalized Haar measure: the theta integral gives derivatives of a
/// delta at `X_h = 0`, moved onto `e^{-iNx/2} e^{-ikx}` by parts.
pub fn u1_kernel_formula(m: u32, n: i32, k: i32, eps: f64) -> C64 {
    let mut sum = c(0.0, 0.0);
    let mut binom = 1.0;
    for j in 0..=m {
        sum += c(binom, 0.0) * c(0.0, -(n as f64) / 2.0).powi(j as i32) * c(0.0, -(k as f64)).powi((m - j) as i32);
        binom = binom * (m - j) as f64 / (j + 1) as f64;
    }
    sum * c(0.0, eps).powi(m as i32) / (2.0 * PI)
}

/// Ratio between the midpoint rule and the Haar-normalized kernel formula.
pub fn u1_normalization_constant(eps: f64) -> f64 {
    let (m, n, k) = (2, 1, 3);
    let midpoint = (eps * (k as f64 + n as f64 / 2.0)).powi(m as i32);
    (c(midpoint, 0.0) / u1_kernel_formula(m, n, k, eps)).re
}

/// The kernel formula in Gaussian rationals, with the Haar factor `1/2pi`
/// cancelled against the coordinate volume of the theta integral. Exact for
/// every rational `eps`; compare with [`weyl_quantize`] entries at dyadic `eps`.
pub fn u1_kernel_formula_exact(m: u32, n: i32, k: i32, eps: Ratio<i64>) -> Complex<Ratio<i64>> {
    let q = |re: Ratio<i64>, im: Ratio<i64>| Complex::new(re, im);
    let (zero, one) = (Ratio::from_integer(0), Ratio::from_integer(1));
    let half_n = q(zero, Ratio::new(-n as i64, 2));
    let mk = q(zero, Ratio::from_integer(-k as i64));
    let mut sum = q(zero, zero);
    let mut binom = one;
    for j in 0..=m {
        sum += q(binom, zero) * half_n.powi(j as i32) * mk.powi((m - j) as i32);
        binom = binom * Ratio::from_integer((m - j) as i64) / Ratio::from_integer((j + 1) as i64);
    }
    sum * q(zero, eps).powi(m as i32)
}
