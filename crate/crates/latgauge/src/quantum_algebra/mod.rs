//! Kernel algebras on `C_l = G^E`: convolution, involution, the regular
//! representations, the intertwiner `I`, the fundamental morphisms, the
//! morphisms induced by refinement witnesses and their implementing unitaries.
//!
//! Two realisations share the conventions below. Finite groups use
//! [`DenseKernel`], a full table of `F(h, g)` acted on in the point basis.
//! Lie backends use [`LieKernel`], a harmonic polynomial in the `h` and `g`
//! slots where an edge may instead carry the symbolic factor `delta(h_e)`.
//!
//! Slot layout of a kernel on `E` edges: `h_e` is slot `e`, `g_e` is slot
//! `E + e`. Flat tuple indices put edge 0 in the most significant digit.

pub mod dense;
pub mod lie;

pub use dense::{DenseKernel, Mat, Tuples};
pub use lie::{poly_coefficients, poly_norm, HilbertBasis, LieKernel};

use crate::group_backend::harmonic::{var, var_inv, Letter, Word};
use crate::structured_graph::Resolved;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fundamental {
    Eta,
    GammaInv,
    AlphaL,
    AlphaR,
}

impl Fundamental {
    pub const ALL: [Fundamental; 4] = [Fundamental::Eta, Fundamental::GammaInv, Fundamental::AlphaL, Fundamental::AlphaR];

    pub fn label(self) -> &'static str {
        match self {
            Fundamental::Eta => "eta",
            Fundamental::GammaInv => "gamma_inv",
            Fundamental::AlphaL => "alpha_L",
            Fundamental::AlphaR => "alpha_R",
        }
    }

    /// The one-edge to two-edge refinement realising the morphism (`None`
    /// for the inversion, which keeps the edge count).
    pub fn split(self) -> Option<Resolved> {
        let two = |pieces: Vec<(usize, i8)>, weights: Vec<f64>| Resolved { n_coarse: 1, n_fine: 2, pieces: vec![pieces], weights: vec![weights] };
        match self {
            Fundamental::Eta => Some(two(vec![(0, 1)], vec![1.0])),
            Fundamental::AlphaL => Some(two(vec![(0, 1), (1, 1)], vec![1.0, 0.0])),
            Fundamental::AlphaR => Some(two(vec![(0, 1), (1, 1)], vec![0.0, 1.0])),
            Fundamental::GammaInv => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitaryKind {
    AlphaL,
    AlphaR,
    Iota,
}

impl UnitaryKind {
    /// Source holonomies as words in the target holonomies (slot `e` is `g_e`).
    pub fn words(self) -> Vec<Word> {
        match self {
            UnitaryKind::AlphaL => vec![vec![var(0), var(1)], vec![var(1)]],
            UnitaryKind::AlphaR => vec![vec![var(0)], vec![var(0), var(1)]],
            UnitaryKind::Iota => vec![vec![var_inv(0)]],
        }
    }

    pub fn n_edges(self) -> usize {
        match self {
            UnitaryKind::Iota => 1,
            _ => 2,
        }
    }
}

/// Coarse holonomies as words in the fine holonomies (slot = fine edge).
pub fn refinement_words(r: &Resolved) -> Vec<Word> {
    r.pieces.iter().map(|ps| ps.iter().map(|&(f, s)| if s > 0 { var(f) } else { var_inv(f) }).collect()).collect()
}

/// How one coarse edge is rebuilt from fine slots under a graph morphism.
#[derive(Clone, Debug)]
pub struct EdgeMorph {
    /// Fine edge whose `h` argument is transported to the coarse edge.
    pub carrier: usize,
    /// Coarse `h_e` as a word in fine slots (`h_f` = `f`, `g_f` = `E' + f`).
    pub h_word: Word,
    pub g_word: Word,
}

/// The carrier is the piece of weight one; generic weights do not quantize.
pub fn edge_morphs(r: &Resolved) -> Result<Vec<EdgeMorph>> {
    let nf = r.n_fine;
    let mut out = Vec::new();
    for (pieces, ws) in r.pieces.iter().zip(&r.weights) {
        let Some(i) = ws.iter().position(|w| *w == 1.0) else {
            return Err(Error::Unsupported(format!("weights {ws:?} are not a left or right policy; only Poisson-compatible witnesses quantize")));
        };
        let g_word: Word = pieces.iter().map(|&(f, s)| if s > 0 { var(nf + f) } else { var_inv(nf + f) }).collect();
        let (f, s) = pieces[i];
        // shifting g_f by h_f on the left moves the coarse holonomy by
        // W h~ W^-1 with W the product in front of the carrier
        let tilde = if s > 0 { vec![var(f)] } else { vec![var_inv(nf + f), var_inv(f), var(nf + f)] };
        let pre = &g_word[..i];
        let mut h_word: Word = pre.to_vec();
        h_word.extend(tilde);
        h_word.extend(pre.iter().rev().map(|l| match l {
            Letter::Var { slot, inv } => Letter::Var { slot: *slot, inv: !inv },
            c => c.clone(),
        }));
        out.push(EdgeMorph { carrier: f, h_word, g_word });
    }
    Ok(out)
}
