//! SU(2) arithmetic: exponential and principal logarithm in the basis
//! `tau_a = -i sigma_a / 2`, spin-j matrices and their generators.
//!
//! Spin-j matrices act on homogeneous polynomials of degree 2j in (x, y) with
//! orthonormal basis `x^(j+m) y^(j-m) / sqrt((j+m)!(j-m)!)`, `m = j - p` for
//! row/column index `p`. With this choice the spin-1/2 matrix of `U` is `U`.

use crate::scalar::{c, C64};
use nalgebra::{DMatrix, Matrix2};

pub type M2 = Matrix2<C64>;

pub fn pauli(a: usize) -> M2 {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match a {
        0 => M2::new(z, one, one, z),
        1 => M2::new(z, -i, i, z),
        _ => M2::new(one, z, z, -one),
    }
}

/// Basis element `tau_a = -i sigma_a / 2` (a = 0, 1, 2).
pub fn tau(a: usize) -> M2 {
    pauli(a) * c(0.0, -0.5)
}

pub fn alg_matrix(x: &[f64]) -> M2 {
    tau(0) * c(x[0], 0.0) + tau(1) * c(x[1], 0.0) + tau(2) * c(x[2], 0.0)
}

/// Coordinates of a traceless anti-hermitian matrix, `Y_a = -2 Re tr(tau_a Y)`.
pub fn alg_coords(y: &M2) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (a, o) in out.iter_mut().enumerate() {
        *o = -2.0 * (tau(a) * y).trace().re;
    }
    out
}

pub fn exp(x: &[f64]) -> M2 {
    let n = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    let (cs, sn) = ((n / 2.0).cos(), (n / 2.0).sin());
    let mut m = M2::identity() * c(cs, 0.0);
    if n > 0.0 {
        for (a, xa) in x.iter().enumerate().take(3) {
            m += pauli(a) * c(0.0, -sn * xa / n);
        }
    }
    m
}

/// Principal logarithm; `None` on the cut locus `tr U = -2`.
pub fn log(u: &M2, tol: f64) -> Option<[f64; 3]> {
    let cs = 0.5 * (u[(0, 0)] + u[(1, 1)]).re;
    if (cs + 1.0).abs() <= tol {
        return None;
    }
    // U = cos(t/2) 1 - i sin(t/2) n.sigma
    let v = [-(u[(0, 1)] + u[(1, 0)]).im / 2.0, (u[(0, 1)] - u[(1, 0)]).re / -2.0, -(u[(0, 0)] - u[(1, 1)]).im / 2.0];
    let sn = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let half = sn.atan2(cs);
    let scale = if sn < 1e-300 { 2.0 } else { 2.0 * half / sn };
    Some([v[0] * scale, v[1] * scale, v[2] * scale])
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binom(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Spin-j matrix of an arbitrary 2x2 matrix (the representation is polynomial).
pub fn spin_matrix(two_j: u32, u: &M2) -> DMatrix<C64> {
    let d = two_j as usize + 1;
    let tj = two_j as usize;
    let (a, b, cc, dd) = (u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]);
    let pw = |z: C64, k: usize| if k == 0 { c(1.0, 0.0) } else { z.powu(k as u32) };
    let mut out = DMatrix::from_element(d, d, c(0.0, 0.0));
    for col in 0..d {
        // column basis vector x^P y^Q with Q = col
        let q = col;
        let p = tj - q;
        for row in 0..d {
            let q2 = row;
            let p2 = tj - q2;
            let mut acc = c(0.0, 0.0);
            // (a x + c y)^p (b x + d y)^q, collect x^p2 y^q2
            for s in 0..=p {
                if s > p2 {
                    break;
                }
                let t = p2 - s;
                if t > q {
                    continue;
                }
                acc += pw(a, s) * pw(cc, p - s) * pw(b, t) * pw(dd, q - t) * binom(p, s) * binom(q, t);
            }
            let norm = (factorial(p2) * factorial(q2) / (factorial(p) * factorial(q))).sqrt();
            out[(row, col)] = acc * norm;
        }
    }
    out
}

/// Derivative of the spin-j representation along a 2x2 matrix `x`.
pub fn spin_generator(two_j: u32, x: &M2) -> DMatrix<C64> {
    let d = two_j as usize + 1;
    let tj = two_j as usize;
    let (al, be, ga, de) = (x[(0, 0)], x[(0, 1)], x[(1, 0)], x[(1, 1)]);
    let mut out = DMatrix::from_element(d, d, c(0.0, 0.0));
    for col in 0..d {
        let q = col;
        let p = tj - q;
        out[(col, col)] += al * p as f64 + de * q as f64;
        if p > 0 {
            // gamma P x^(P-1) y^(Q+1)
            out[(col + 1, col)] += ga * (p as f64) * ((q + 1) as f64 / p as f64).sqrt();
        }
        if q > 0 {
            // beta Q x^(P+1) y^(Q-1)
            out[(col - 1, col)] += be * (q as f64) * ((p + 1) as f64 / q as f64).sqrt();
        }
    }
    out
}
