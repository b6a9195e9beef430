//! Multiplication tables and irreducible representations of the shipped
//! finite groups.

use crate::scalar::{c, C64};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FiniteKind {
    Z2,
    Z4,
    S3,
    Q8,
}

impl FiniteKind {
    pub fn name(self) -> &'static str {
        match self {
            FiniteKind::Z2 => "Z2",
            FiniteKind::Z4 => "Z4",
            FiniteKind::S3 => "S3",
            FiniteKind::Q8 => "Q8",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "Z2" => Some(FiniteKind::Z2),
            "Z4" => Some(FiniteKind::Z4),
            "S3" => Some(FiniteKind::S3),
            "Q8" => Some(FiniteKind::Q8),
            _ => None,
        }
    }
}

#[derive(Debug)]
pub struct FiniteTable {
    pub kind: FiniteKind,
    pub order: usize,
    pub names: Vec<&'static str>,
    mul: Vec<u8>,
    inv: Vec<u8>,
    /// `irreps[i][g]` is the matrix of element `g` in irrep `i`.
    pub irreps: Vec<Vec<DMatrix<C64>>>,
}

impl FiniteTable {
    pub fn new(kind: FiniteKind) -> Self {
        match kind {
            FiniteKind::Z2 => cyclic(kind, 2),
            FiniteKind::Z4 => cyclic(kind, 4),
            FiniteKind::S3 => s3(),
            FiniteKind::Q8 => q8(),
        }
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order + b] as usize
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a] as usize
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| *n == name)
    }

    fn finish(kind: FiniteKind, names: Vec<&'static str>, mul: Vec<u8>, irreps: Vec<Vec<DMatrix<C64>>>) -> Self {
        let order = names.len();
        let inv = (0..order)
            .map(|a| (0..order).find(|&b| mul[a * order + b] == 0).expect("group table without inverse") as u8)
            .collect();
        FiniteTable { kind, order, names, mul, inv, irreps }
    }
}

// powers of i, exact in floating point
fn i_pow(m: usize) -> C64 {
    [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)][m % 4]
}

fn scalar_mat(z: C64) -> DMatrix<C64> {
    DMatrix::from_element(1, 1, z)
}

fn cyclic(kind: FiniteKind, n: usize) -> FiniteTable {
    let names: Vec<&'static str> = match n {
        2 => vec!["e", "a"],
        _ => vec!["e", "a", "a2", "a3"],
    };
    let mul = (0..n * n).map(|ab| ((ab / n + ab % n) % n) as u8).collect();
    let step = 4 / n;
    let irreps = (0..n)
        .map(|k| (0..n).map(|a| scalar_mat(i_pow(step * k * a))).collect())
        .collect();
    FiniteTable::finish(kind, names, mul, irreps)
}

// S3 ordered as e, r, r2, s, sr, sr2 with r = (0 1 2), s = (1 2)
fn s3() -> FiniteTable {
    let compose = |p: [usize; 3], q: [usize; 3]| [p[q[0]], p[q[1]], p[q[2]]];
    let e = [0, 1, 2];
    let r = [1, 2, 0];
    let s = [0, 2, 1];
    let r2 = compose(r, r);
    let perms = [e, r, r2, s, compose(s, r), compose(s, r2)];
    let idx = |p: [usize; 3]| perms.iter().position(|q| *q == p).unwrap() as u8;
    let mut mul = Vec::with_capacity(36);
    for a in perms {
        for b in perms {
            mul.push(idx(compose(a, b)));
        }
    }
    let h = 3f64.sqrt() / 2.0;
    let cs = [1.0, -0.5, -0.5];
    let sn = [0.0, h, -h];
    let mut standard = Vec::new();
    for k in 0..3 {
        standard.push(DMatrix::from_row_slice(2, 2, &[c(cs[k], 0.0), c(-sn[k], 0.0), c(sn[k], 0.0), c(cs[k], 0.0)]));
    }
    for k in 0..3 {
        standard.push(DMatrix::from_row_slice(2, 2, &[c(cs[k], 0.0), c(-sn[k], 0.0), c(-sn[k], 0.0), c(-cs[k], 0.0)]));
    }
    let trivial = (0..6).map(|_| scalar_mat(c(1.0, 0.0))).collect();
    let sign = (0..6).map(|g| scalar_mat(c(if g < 3 { 1.0 } else { -1.0 }, 0.0))).collect();
    FiniteTable::finish(
        FiniteKind::S3,
        vec!["e", "r", "r2", "s", "sr", "sr2"],
        mul,
        vec![trivial, sign, standard],
    )
}

// Q8 ordered as 1, -1, i, -i, j, -j, k, -k; index = 2*unit + (negative)
fn q8() -> FiniteTable {
    // unit product: (sign, unit) for units 0=1, 1=i, 2=j, 3=k
    let unit_mul = |a: usize, b: usize| -> (i8, usize) {
        match (a, b) {
            (0, x) | (x, 0) => (1, x),
            (x, y) if x == y => (-1, 0),
            (1, 2) => (1, 3),
            (2, 3) => (1, 1),
            (3, 1) => (1, 2),
            (2, 1) => (-1, 3),
            (3, 2) => (-1, 1),
            (1, 3) => (-1, 2),
            _ => unreachable!(),
        }
    };
    let split = |g: usize| (if g.is_multiple_of(2) { 1i8 } else { -1 }, g / 2);
    let mut mul = Vec::with_capacity(64);
    for a in 0..8 {
        for b in 0..8 {
            let (sa, ua) = split(a);
            let (sb, ub) = split(b);
            let (su, u) = unit_mul(ua, ub);
            let s = sa * sb * su;
            mul.push((2 * u + usize::from(s < 0)) as u8);
        }
    }
    let mut irreps: Vec<Vec<DMatrix<C64>>> = Vec::new();
    irreps.push((0..8).map(|_| scalar_mat(c(1.0, 0.0))).collect());
    for a in 1..4 {
        irreps.push(
            (0..8)
                .map(|g| {
                    let u = g / 2;
                    scalar_mat(c(if u == 0 || u == a { 1.0 } else { -1.0 }, 0.0))
                })
                .collect(),
        );
    }
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let im = c(0.0, 1.0);
    let units = [
        DMatrix::from_row_slice(2, 2, &[one, z, z, one]),
        DMatrix::from_row_slice(2, 2, &[im, z, z, -im]),
        DMatrix::from_row_slice(2, 2, &[z, one, -one, z]),
        DMatrix::from_row_slice(2, 2, &[z, im, im, z]),
    ];
    irreps.push((0..8).map(|g| if g % 2 == 0 { units[g / 2].clone() } else { -units[g / 2].clone() }).collect());
    FiniteTable::finish(FiniteKind::Q8, vec!["1", "-1", "i", "-i", "j", "-j", "k", "-k"], mul, irreps)
}
