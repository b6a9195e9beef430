//! Matrix-coefficient bookkeeping: products of irrep entries on several group
//! slots, and expansion of an entry evaluated on a word in those slots.
//!
//! A slot is any group variable (a holonomy `g_e`, a kernel argument `h_e`,
//! an integration variable). `D(w_1 ... w_r)_{mn}` is expanded as a sum over
//! intermediate indices, with constant letters evaluated numerically.

use super::{Group, GroupElem, Irrep};
use crate::scalar::{c, C64};
use std::collections::BTreeMap;

/// `pi(g)_{row,col}`, or its complex conjugate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Entry {
    pub irrep: Irrep,
    pub row: u8,
    pub col: u8,
    pub conj: bool,
}

impl Entry {
    pub fn new(irrep: Irrep, row: usize, col: usize) -> Self {
        Entry { irrep, row: row as u8, col: col as u8, conj: false }
    }

    pub fn mode(k: i32) -> Self {
        Entry::new(Irrep::Mode(k), 0, 0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Factor {
    pub slot: u16,
    pub entry: Entry,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Letter {
    Var { slot: u16, inv: bool },
    Const(GroupElem),
}

pub type Word = Vec<Letter>;

pub fn var(slot: usize) -> Letter {
    Letter::Var { slot: slot as u16, inv: false }
}

pub fn var_inv(slot: usize) -> Letter {
    Letter::Var { slot: slot as u16, inv: true }
}

/// Inverse word: reversed with every letter inverted.
pub fn word_inverse(group: &Group, w: &[Letter]) -> Word {
    w.iter()
        .rev()
        .map(|l| match l {
            Letter::Var { slot, inv } => Letter::Var { slot: *slot, inv: !inv },
            Letter::Const(g) => Letter::Const(group.inv(g)),
        })
        .collect()
}

pub fn eval_word(group: &Group, w: &[Letter], vals: &[GroupElem]) -> GroupElem {
    let mut acc = group.identity();
    for l in w {
        let x = match l {
            Letter::Var { slot, inv: false } => vals[*slot as usize].clone(),
            Letter::Var { slot, inv: true } => group.inv(&vals[*slot as usize]),
            Letter::Const(g) => g.clone(),
        };
        acc = group.mul(&acc, &x);
    }
    acc
}

/// A product of entries with a coefficient.
pub type Monomial = (C64, Vec<Factor>);

/// Expands `D(word)_{row,col}` (conjugated if `entry.conj`) into canonical
/// monomials in the word's variables.
pub fn expand_entry(group: &Group, entry: Entry, word: &[Letter]) -> Vec<Monomial> {
    let d = group.irrep_dim(entry.irrep);
    let mut cur: Vec<Vec<Monomial>> = vec![Vec::new(); d];
    cur[entry.row as usize].push((c(1.0, 0.0), Vec::new()));
    for l in word {
        let mut next: Vec<Vec<Monomial>> = vec![Vec::new(); d];
        match l {
            Letter::Const(g) => {
                let m = group.rep(entry.irrep, g);
                for (q, terms) in cur.iter().enumerate() {
                    for (q2, slot) in next.iter_mut().enumerate() {
                        let v = m[(q, q2)];
                        if v.norm() < 1e-15 {
                            continue;
                        }
                        slot.extend(terms.iter().map(|(co, fs)| (co * v, fs.clone())));
                    }
                }
            }
            Letter::Var { slot, inv } => {
                for (q, terms) in cur.iter().enumerate() {
                    if terms.is_empty() {
                        continue;
                    }
                    for (q2, out) in next.iter_mut().enumerate() {
                        let e = if *inv {
                            Entry { irrep: entry.irrep, row: q2 as u8, col: q as u8, conj: true }
                        } else {
                            Entry { irrep: entry.irrep, row: q as u8, col: q2 as u8, conj: false }
                        };
                        out.extend(terms.iter().map(|(co, fs)| {
                            let mut fs = fs.clone();
                            fs.push(Factor { slot: *slot, entry: e });
                            (*co, fs)
                        }));
                    }
                }
            }
        }
        cur = next;
    }
    let out = std::mem::take(&mut cur[entry.col as usize]);
    out.into_iter()
        .filter_map(|(co, fs)| {
            let (co, fs) = if entry.conj {
                (co.conj(), fs.into_iter().map(|f| Factor { entry: Entry { conj: !f.entry.conj, ..f.entry }, ..f }).collect())
            } else {
                (co, fs)
            };
            canonical(group, co, fs)
        })
        .collect()
}

/// Normal form of a monomial: trivial-irrep factors dropped, U(1) modes merged
/// per slot, SU(2) conjugates rewritten through
/// `conj D^j_{ab} = (-1)^{a-b} D^j_{d-1-a, d-1-b}`, factors sorted.
/// Returns `None` if the monomial vanishes.
pub fn canonical(group: &Group, mut co: C64, fs: Vec<Factor>) -> Option<Monomial> {
    if co.norm() == 0.0 {
        return None;
    }
    let mut out: Vec<Factor> = Vec::with_capacity(fs.len());
    let mut modes: BTreeMap<u16, i32> = BTreeMap::new();
    for f in fs {
        match f.entry.irrep {
            Irrep::Mode(k) => *modes.entry(f.slot).or_default() += if f.entry.conj { -k } else { k },
            Irrep::Spin(0) => {}
            Irrep::Spin(tj) => {
                let mut e = f.entry;
                if e.conj {
                    let d = tj as u8 + 1;
                    if (e.row + e.col) % 2 == 1 {
                        co = -co;
                    }
                    e = Entry { irrep: e.irrep, row: d - 1 - e.row, col: d - 1 - e.col, conj: false };
                }
                out.push(Factor { slot: f.slot, entry: e });
            }
            Irrep::Finite(i) => {
                if group.irrep_dim(f.entry.irrep) == 1 && i == 0 {
                    continue;
                }
                out.push(f);
            }
        }
    }
    for (slot, k) in modes {
        if k != 0 {
            out.push(Factor { slot, entry: Entry::mode(k) });
        }
    }
    out.sort();
    Some((co, out))
}

/// Evaluates a product of factors at slot values.
pub fn eval_factors(group: &Group, fs: &[Factor], vals: &[GroupElem]) -> C64 {
    fs.iter().map(|f| group.entry_value(&f.entry, &vals[f.slot as usize])).product()
}

/// Harmonic weight of a monomial on one slot.
pub fn slot_weight(fs: &[Factor], slot: u16) -> u32 {
    fs.iter().filter(|f| f.slot == slot).map(|f| f.entry.irrep.weight()).sum()
}

/// Sums monomials with equal factor lists and drops numerical zeros.
pub fn collect(terms: impl IntoIterator<Item = Monomial>) -> Vec<Monomial> {
    let mut map: BTreeMap<Vec<Factor>, C64> = BTreeMap::new();
    for (co, fs) in terms {
        *map.entry(fs).or_insert(c(0.0, 0.0)) += co;
    }
    map.into_iter().filter(|(_, co)| co.norm() > 1e-14).map(|(fs, co)| (co, fs)).collect()
}

/// Integrates every variable on `slot` out of a monomial list.
pub fn integrate_slot(group: &Group, terms: &[Monomial], slot: u16) -> Vec<Monomial> {
    collect(terms.iter().filter_map(|(co, fs)| {
        let (on, off): (Vec<Factor>, Vec<Factor>) = fs.iter().partition(|f| f.slot == slot);
        let entries: Vec<Entry> = on.iter().map(|f| f.entry).collect();
        let v = group.integrate_entries(&entries);
        if v.norm() < 1e-14 {
            None
        } else {
            Some((co * v, off))
        }
    }))
}

/// Harmonic polynomial in several slots: a collected list of monomials.
pub type Poly = Vec<Monomial>;

pub fn poly_const(v: C64) -> Poly {
    if v.norm() == 0.0 {
        Vec::new()
    } else {
        vec![(v, Vec::new())]
    }
}

pub fn poly_add(a: &[Monomial], b: &[Monomial]) -> Poly {
    collect(a.iter().chain(b).cloned())
}

pub fn poly_scale(a: &[Monomial], s: C64) -> Poly {
    collect(a.iter().map(|(co, fs)| (co * s, fs.clone())))
}

pub fn poly_mul(group: &Group, a: &[Monomial], b: &[Monomial]) -> Poly {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for (ca, fa) in a {
        for (cb, fb) in b {
            let mut fs = fa.clone();
            fs.extend_from_slice(fb);
            if let Some(m) = canonical(group, ca * cb, fs) {
                out.push(m);
            }
        }
    }
    collect(out)
}

pub fn poly_eval(group: &Group, p: &[Monomial], vals: &[GroupElem]) -> C64 {
    p.iter().map(|(co, fs)| co * eval_factors(group, fs, vals)).sum()
}

pub fn poly_conj(group: &Group, p: &[Monomial]) -> Poly {
    collect(p.iter().filter_map(|(co, fs)| {
        let fs = fs.iter().map(|f| Factor { entry: Entry { conj: !f.entry.conj, ..f.entry }, ..*f }).collect();
        canonical(group, co.conj(), fs)
    }))
}

/// Substitutes slot `s` by the word `words[s]` (slots without a word must not
/// occur).
pub fn poly_subst(group: &Group, p: &[Monomial], words: &[Option<Word>]) -> Poly {
    let mut out = Vec::new();
    for (co, fs) in p {
        let mut acc = poly_const(*co);
        for f in fs {
            let w = words[f.slot as usize].as_ref().expect("substitution word missing for slot");
            acc = poly_mul(group, &acc, &expand_entry(group, f.entry, w));
            if acc.is_empty() {
                break;
            }
        }
        out.extend(acc);
    }
    collect(out)
}

/// Renumbers slots through `map` (no expansion).
pub fn poly_relabel(group: &Group, p: &[Monomial], map: impl Fn(u16) -> u16) -> Poly {
    collect(p.iter().filter_map(|(co, fs)| canonical(group, *co, fs.iter().map(|f| Factor { slot: map(f.slot), ..*f }).collect())))
}

/// `d/dt p(..., exp(t tau_a) g_slot, ...)` at `t = 0`, via generator matrices
/// acting on the row index.
pub fn poly_right_derivative(group: &Group, p: &[Monomial], slot: u16, a: usize) -> Poly {
    let mut out = Vec::new();
    for (co, fs) in p {
        for (i, f) in fs.iter().enumerate() {
            if f.slot != slot {
                continue;
            }
            let e = f.entry;
            let gen = group.generator(e.irrep, a);
            for q in 0..gen.nrows() {
                let mut x = gen[(e.row as usize, q)];
                if x.norm() == 0.0 {
                    continue;
                }
                if e.conj {
                    x = x.conj();
                }
                let mut nf = fs.clone();
                nf[i] = Factor { slot, entry: Entry { row: q as u8, ..e } };
                if let Some(m) = canonical(group, co * x, nf) {
                    out.push(m);
                }
            }
        }
    }
    collect(out)
}

/// Maximal harmonic weight of `p` on `slot`.
pub fn poly_slot_weight(p: &[Monomial], slot: u16) -> u32 {
    p.iter().map(|(_, fs)| slot_weight(fs, slot)).max().unwrap_or(0)
}

/// Evaluates many polynomials at one tuple of slot values, caching irrep
/// matrices per slot.
pub struct SlotValues<'a> {
    group: &'a Group,
    vals: &'a [GroupElem],
    cache: std::cell::RefCell<std::collections::HashMap<(u16, Irrep), nalgebra::DMatrix<C64>>>,
}

impl<'a> SlotValues<'a> {
    pub fn new(group: &'a Group, vals: &'a [GroupElem]) -> Self {
        SlotValues { group, vals, cache: Default::default() }
    }

    pub fn entry(&self, f: &Factor) -> C64 {
        let e = f.entry;
        let v = match (e.irrep, &self.vals[f.slot as usize]) {
            (Irrep::Mode(k), GroupElem::U1(a)) => C64::from_polar(1.0, k as f64 * a),
            _ => {
                let mut cache = self.cache.borrow_mut();
                let m = cache.entry((f.slot, e.irrep)).or_insert_with(|| self.group.rep(e.irrep, &self.vals[f.slot as usize]));
                m[(e.row as usize, e.col as usize)]
            }
        };
        if e.conj {
            v.conj()
        } else {
            v
        }
    }

    pub fn poly(&self, p: &[Monomial]) -> C64 {
        p.iter().map(|(co, fs)| fs.iter().fold(*co, |acc, f| acc * self.entry(f))).sum()
    }
}
