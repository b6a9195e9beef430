//! Pluggable compact groups: finite tables (exact), U(1) and SU(2).
//!
//! Conventions fixed here and used everywhere else:
//! * U(1) elements are angles in `[0, 2pi)`, the algebra basis is `tau = i`
//!   so `exp(x) = e^{ix}`.
//! * SU(2) uses `tau_a = -i sigma_a / 2`, hence `[tau_1, tau_2] = tau_3`.
//! * `<CoAd(g, theta), X> = <theta, Ad(g^-1) X>`.
//! * Haar measures are probability measures.

pub mod finite;
pub mod harmonic;
pub mod su2;

use crate::scalar::{c, C64};
use crate::{Error, Result};
use finite::{FiniteKind, FiniteTable};
use harmonic::Entry;
use nalgebra::{DMatrix, Matrix3, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex};
use su2::M2;

const TWO_PI: f64 = 2.0 * PI;
/// Distance from the cut locus below which `log` refuses to answer.
pub const CUT_TOL: f64 = 1e-9;

/// Label of an irreducible representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Irrep {
    /// Index into the finite group's irrep list.
    Finite(u8),
    /// U(1) character `e^{ik phi}`.
    Mode(i32),
    /// SU(2) spin `j`, stored as `2j`.
    Spin(u32),
}

impl Irrep {
    /// Additive harmonic weight: `|k|` for modes, `2j` for spins.
    pub fn weight(self) -> u32 {
        match self {
            Irrep::Finite(_) => 0,
            Irrep::Mode(k) => k.unsigned_abs(),
            Irrep::Spin(tj) => tj,
        }
    }
}

impl fmt::Display for Irrep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Irrep::Finite(i) => write!(f, "irrep#{i}"),
            Irrep::Mode(k) => write!(f, "mode {k}"),
            Irrep::Spin(tj) if tj % 2 == 0 => write!(f, "spin {}", tj / 2),
            Irrep::Spin(tj) => write!(f, "spin {tj}/2"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BackendKind {
    Finite(FiniteKind),
    /// Mode cutoff `K`.
    U1 { modes: u32 },
    /// Spin cutoff `J`, stored as `2J`.
    Su2 { two_j: u32 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum GroupElem {
    Finite { kind: FiniteKind, idx: u8 },
    U1(f64),
    Su2(M2),
}

/// Lie algebra element in the basis `tau_a`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgElem(pub Vec<f64>);

/// Dual element in the dual basis; pairing is the Euclidean dot product.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoAlgElem(pub Vec<f64>);

impl CoAlgElem {
    pub fn pair(&self, x: &AlgElem) -> f64 {
        self.0.iter().zip(&x.0).map(|(a, b)| a * b).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithKind {
    Multiply,
    Invert,
    Identity,
    Conjugate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpLogKind {
    Exp,
    Log,
    Sqrt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdKind {
    Ad,
    CoAd,
    Bracket,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LieValue {
    Group(GroupElem),
    Alg(AlgElem),
    CoAlg(CoAlgElem),
}

/// Result of a Haar integral; `exact` is false when a refined quadrature
/// disagrees, i.e. the integrand exceeded the declared harmonic budget.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HaarValue {
    pub value: C64,
    pub exact: bool,
}

pub struct Rule {
    pub weights: Vec<f64>,
    pub elems: Vec<GroupElem>,
    reps: Mutex<HashMap<Irrep, Arc<Vec<DMatrix<C64>>>>>,
}

type Generator = Arc<DMatrix<C64>>;

struct Inner {
    kind: BackendKind,
    table: Option<FiniteTable>,
    rules: Mutex<HashMap<u32, Arc<Rule>>>,
    integrals: Mutex<HashMap<Vec<Entry>, C64>>,
    generators: Mutex<HashMap<(Irrep, usize), Generator>>,
    /// Columns: Cartesian components of the spin-1 basis vectors, so that
    /// `Ad(g) = V D^1(g) V^dagger`.
    adjoint_intertwiner: Option<DMatrix<C64>>,
}

/// Shared handle to a backend. Cloning is cheap and all data is immutable
/// apart from memoisation caches.
#[derive(Clone)]
pub struct Group(Arc<Inner>);

impl fmt::Debug for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Group({})", self.selector())
    }
}

impl PartialEq for Group {
    fn eq(&self, other: &Self) -> bool {
        self.0.kind == other.0.kind
    }
}

pub const SUPPORTED_BACKENDS: &str = "finite:Z2, finite:Z4, finite:S3, finite:Q8, u1:modes=<K>, su2:cutoff=<J>";

impl Group {
    fn build(kind: BackendKind) -> Self {
        let table = match kind {
            BackendKind::Finite(k) => Some(FiniteTable::new(k)),
            _ => None,
        };
        let g = Group(Arc::new(Inner {
            kind,
            table,
            rules: Mutex::new(HashMap::new()),
            integrals: Mutex::new(HashMap::new()),
            generators: Mutex::new(HashMap::new()),
            adjoint_intertwiner: None,
        }));
        if let BackendKind::Su2 { .. } = kind {
            let v = g.compute_adjoint_intertwiner();
            let mut inner = Arc::try_unwrap(g.0).ok().expect("fresh handle");
            inner.adjoint_intertwiner = Some(v);
            return Group(Arc::new(inner));
        }
        g
    }

    pub fn finite(kind: FiniteKind) -> Self {
        Self::build(BackendKind::Finite(kind))
    }

    pub fn u1(modes: u32) -> Self {
        Self::build(BackendKind::U1 { modes })
    }

    /// SU(2) with spin cutoff `two_j / 2`.
    pub fn su2(two_j: u32) -> Self {
        Self::build(BackendKind::Su2 { two_j })
    }

    /// Parses selectors such as `finite:S3`, `u1:modes=8`, `su2:cutoff=3/2`.
    pub fn parse(sel: &str) -> Result<Self> {
        let bad = || Error::Unsupported(format!("unknown backend \"{sel}\"; supported backends: {SUPPORTED_BACKENDS}"));
        let (head, rest) = sel.split_once(':').ok_or_else(bad)?;
        match head {
            "finite" => FiniteKind::parse(rest).map(Self::finite).ok_or_else(bad),
            "u1" => {
                let k = rest.strip_prefix("modes=").ok_or_else(bad)?;
                k.parse::<u32>().map(Self::u1).map_err(|_| bad())
            }
            "su2" => {
                let j = rest.strip_prefix("cutoff=").ok_or_else(bad)?;
                parse_twice_spin(j).map(Self::su2).ok_or_else(bad)
            }
            _ => Err(bad()),
        }
    }

    pub fn kind(&self) -> BackendKind {
        self.0.kind
    }

    pub fn selector(&self) -> String {
        match self.0.kind {
            BackendKind::Finite(k) => format!("finite:{}", k.name()),
            BackendKind::U1 { modes } => format!("u1:modes={modes}"),
            BackendKind::Su2 { two_j } if two_j % 2 == 0 => format!("su2:cutoff={}", two_j / 2),
            BackendKind::Su2 { two_j } => format!("su2:cutoff={two_j}/2"),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.0.kind, BackendKind::Finite(_))
    }

    /// Harmonic cutoff in weight units (`K` or `2J`); 0 for finite groups.
    pub fn cutoff(&self) -> u32 {
        match self.0.kind {
            BackendKind::Finite(_) => 0,
            BackendKind::U1 { modes } => modes,
            BackendKind::Su2 { two_j } => two_j,
        }
    }

    /// Same group with a different harmonic cutoff.
    pub fn with_cutoff(&self, cut: u32) -> Self {
        match self.0.kind {
            BackendKind::Finite(_) => self.clone(),
            BackendKind::U1 { .. } => Self::u1(cut),
            BackendKind::Su2 { .. } => Self::su2(cut),
        }
    }

    pub fn table(&self) -> Option<&FiniteTable> {
        self.0.table.as_ref()
    }

    pub fn order(&self) -> Option<usize> {
        self.table().map(|t| t.order)
    }

    /// Dimension of the Lie algebra.
    pub fn dim(&self) -> usize {
        match self.0.kind {
            BackendKind::Finite(_) => 0,
            BackendKind::U1 { .. } => 1,
            BackendKind::Su2 { .. } => 3,
        }
    }

    fn check(&self, g: &GroupElem) -> Result<()> {
        let ok = match (&self.0.kind, g) {
            (BackendKind::Finite(k), GroupElem::Finite { kind, idx }) => k == kind && (*idx as usize) < self.order().unwrap(),
            (BackendKind::U1 { .. }, GroupElem::U1(_)) => true,
            (BackendKind::Su2 { .. }, GroupElem::Su2(_)) => true,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::BackendMismatch(format!("{g:?} is not an element of {}", self.selector())))
        }
    }

    fn lie_only(&self, what: &str) -> Result<()> {
        if self.is_finite() {
            Err(Error::Unsupported(format!("{what} needs a Lie algebra; {} has none", self.selector())))
        } else {
            Ok(())
        }
    }

    // ---------- group arithmetic ----------

    pub fn identity(&self) -> GroupElem {
        match self.0.kind {
            BackendKind::Finite(kind) => GroupElem::Finite { kind, idx: 0 },
            BackendKind::U1 { .. } => GroupElem::U1(0.0),
            BackendKind::Su2 { .. } => GroupElem::Su2(M2::identity()),
        }
    }

    pub fn elem(&self, idx: usize) -> GroupElem {
        match self.0.kind {
            BackendKind::Finite(kind) => GroupElem::Finite { kind, idx: idx as u8 },
            _ => panic!("elem(idx) is only defined on finite groups"),
        }
    }

    pub fn named(&self, name: &str) -> Option<GroupElem> {
        self.table().and_then(|t| t.index_of(name)).map(|i| self.elem(i))
    }

    /// SU(2) element from a matrix, validated to 1e-12.
    pub fn su2_elem(&self, m: M2) -> Result<GroupElem> {
        let unit = (m.adjoint() * m - M2::identity()).norm();
        let det = (m.determinant() - c(1.0, 0.0)).norm();
        if unit > 1e-12 || det > 1e-12 {
            return Err(Error::InvalidElement(format!("not in SU(2): unitarity {unit:.2e}, det {det:.2e}")));
        }
        Ok(GroupElem::Su2(m))
    }

    pub fn u1_elem(&self, angle: f64) -> GroupElem {
        GroupElem::U1(angle.rem_euclid(TWO_PI))
    }

    pub fn mul(&self, a: &GroupElem, b: &GroupElem) -> GroupElem {
        match (a, b) {
            (GroupElem::Finite { kind, idx: x }, GroupElem::Finite { idx: y, .. }) => GroupElem::Finite {
                kind: *kind,
                idx: self.table().unwrap().mul(*x as usize, *y as usize) as u8,
            },
            (GroupElem::U1(x), GroupElem::U1(y)) => GroupElem::U1((x + y).rem_euclid(TWO_PI)),
            (GroupElem::Su2(x), GroupElem::Su2(y)) => GroupElem::Su2(x * y),
            _ => panic!("backend mismatch in multiply"),
        }
    }

    pub fn inv(&self, a: &GroupElem) -> GroupElem {
        match a {
            GroupElem::Finite { kind, idx } => GroupElem::Finite { kind: *kind, idx: self.table().unwrap().inv(*idx as usize) as u8 },
            GroupElem::U1(x) => GroupElem::U1((-x).rem_euclid(TWO_PI)),
            GroupElem::Su2(m) => GroupElem::Su2(m.adjoint()),
        }
    }

    /// `a b a^-1`.
    pub fn conj(&self, a: &GroupElem, b: &GroupElem) -> GroupElem {
        self.mul(&self.mul(a, b), &self.inv(a))
    }

    /// Checked entry point mirroring the four arithmetic kinds.
    pub fn arithmetic(&self, kind: ArithKind, a: &GroupElem, b: Option<&GroupElem>) -> Result<GroupElem> {
        self.check(a)?;
        if let Some(b) = b {
            self.check(b)?;
        }
        let need_b = || b.ok_or_else(|| Error::Shape("second operand required".into()));
        Ok(match kind {
            ArithKind::Multiply => self.mul(a, need_b()?),
            ArithKind::Invert => self.inv(a),
            ArithKind::Identity => self.identity(),
            ArithKind::Conjugate => self.conj(a, need_b()?),
        })
    }

    /// Distance used in residuals: index mismatch (0/1), angle difference on
    /// the circle, or operator norm bound of the matrix difference.
    pub fn distance(&self, a: &GroupElem, b: &GroupElem) -> f64 {
        match (a, b) {
            (GroupElem::Finite { idx: x, .. }, GroupElem::Finite { idx: y, .. }) => f64::from(x != y),
            (GroupElem::U1(x), GroupElem::U1(y)) => {
                let d = (x - y).rem_euclid(TWO_PI);
                d.min(TWO_PI - d)
            }
            (GroupElem::Su2(x), GroupElem::Su2(y)) => (x - y).norm(),
            _ => f64::INFINITY,
        }
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> GroupElem {
        match self.0.kind {
            BackendKind::Finite(kind) => GroupElem::Finite { kind, idx: rng.random_range(0..self.order().unwrap()) as u8 },
            BackendKind::U1 { .. } => GroupElem::U1(rng.random_range(0.0..TWO_PI)),
            BackendKind::Su2 { .. } => {
                let mut q = [0.0f64; 4];
                for v in q.iter_mut() {
                    *v = rng.sample(StandardNormal);
                }
                let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
                let (a, b) = (c(q[0] / n, q[1] / n), c(q[2] / n, q[3] / n));
                GroupElem::Su2(M2::new(a, b, -b.conj(), a.conj()))
            }
        }
    }

    pub fn random_alg<R: Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> AlgElem {
        AlgElem((0..self.dim()).map(|_| rng.random_range(-scale..scale)).collect())
    }

    pub fn random_coalg<R: Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> CoAlgElem {
        CoAlgElem((0..self.dim()).map(|_| rng.random_range(-scale..scale)).collect())
    }

    // ---------- exp / log / sqrt ----------

    pub fn exp(&self, x: &AlgElem) -> Result<GroupElem> {
        self.lie_only("exp")?;
        self.check_len(x.0.len())?;
        Ok(match self.0.kind {
            BackendKind::U1 { .. } => self.u1_elem(x.0[0]),
            _ => GroupElem::Su2(su2::exp(&x.0)),
        })
    }

    pub fn log(&self, g: &GroupElem) -> Result<AlgElem> {
        self.lie_only("log")?;
        self.check(g)?;
        match g {
            GroupElem::U1(a) => {
                let a = if *a > PI { a - TWO_PI } else { *a };
                if (a.abs() - PI).abs() <= CUT_TOL {
                    return Err(Error::Domain("log of U(1) angle pi lies on the cut locus".into()));
                }
                Ok(AlgElem(vec![a]))
            }
            GroupElem::Su2(m) => su2::log(m, CUT_TOL)
                .map(|v| AlgElem(v.to_vec()))
                .ok_or_else(|| Error::Domain("log of SU(2) element with trace -2 lies on the cut locus".into())),
            _ => unreachable!(),
        }
    }

    /// `exp(log(g) / 2)`.
    pub fn sqrt(&self, g: &GroupElem) -> Result<GroupElem> {
        let x = self.log(g)?;
        self.exp(&AlgElem(x.0.iter().map(|v| v / 2.0).collect()))
    }

    pub fn exp_log_sqrt(&self, kind: ExpLogKind, x: &LieValue) -> Result<LieValue> {
        match (kind, x) {
            (ExpLogKind::Exp, LieValue::Alg(a)) => self.exp(a).map(LieValue::Group),
            (ExpLogKind::Log, LieValue::Group(g)) => self.log(g).map(LieValue::Alg),
            (ExpLogKind::Sqrt, LieValue::Group(g)) => self.sqrt(g).map(LieValue::Group),
            _ => Err(Error::Shape(format!("{kind:?} applied to the wrong kind of value"))),
        }
    }

    // ---------- adjoint structure ----------

    fn check_len(&self, n: usize) -> Result<()> {
        if n == self.dim() {
            Ok(())
        } else {
            Err(Error::Shape(format!("coordinate length {n}, algebra dimension {}", self.dim())))
        }
    }

    /// Matrix of `Ad(g)` in the basis `tau_a` (orthogonal, so also CoAd).
    pub fn ad_matrix(&self, g: &GroupElem) -> Matrix3<f64> {
        match g {
            GroupElem::Su2(m) => {
                let mut out = Matrix3::zeros();
                for b in 0..3 {
                    let y = m * su2::tau(b) * m.adjoint();
                    let col = su2::alg_coords(&y);
                    for a in 0..3 {
                        out[(a, b)] = col[a];
                    }
                }
                out
            }
            _ => Matrix3::identity(),
        }
    }

    pub fn ad(&self, g: &GroupElem, x: &AlgElem) -> Result<AlgElem> {
        self.lie_only("Ad")?;
        self.check(g)?;
        self.check_len(x.0.len())?;
        Ok(match g {
            GroupElem::Su2(_) => {
                let m = self.ad_matrix(g);
                AlgElem((0..3).map(|a| (0..3).map(|b| m[(a, b)] * x.0[b]).sum()).collect())
            }
            _ => x.clone(),
        })
    }

    /// `<CoAd(g, theta), X> = <theta, Ad(g^-1) X>`.
    pub fn coad(&self, g: &GroupElem, th: &CoAlgElem) -> Result<CoAlgElem> {
        self.lie_only("CoAd")?;
        self.check(g)?;
        self.check_len(th.0.len())?;
        Ok(CoAlgElem(self.coad_raw(g, &th.0)))
    }

    /// Unchecked coadjoint action on raw coordinates.
    pub fn coad_raw(&self, g: &GroupElem, th: &[f64]) -> Vec<f64> {
        match g {
            GroupElem::Su2(_) => {
                let m = self.ad_matrix(&self.inv(g));
                // (CoAd th)_a = sum_b th_b Ad(g^-1)_{ba}
                (0..3).map(|a| (0..3).map(|b| th[b] * m[(b, a)]).sum()).collect()
            }
            _ => th.to_vec(),
        }
    }

    pub fn bracket(&self, x: &AlgElem, y: &AlgElem) -> Result<AlgElem> {
        self.lie_only("bracket")?;
        self.check_len(x.0.len())?;
        self.check_len(y.0.len())?;
        Ok(AlgElem(match self.0.kind {
            BackendKind::Su2 { .. } => cross(&x.0, &y.0).to_vec(),
            _ => vec![0.0],
        }))
    }

    /// Structure constants `[tau_a, tau_b] = sum_c f(a,b,c) tau_c`.
    pub fn structure_constant(&self, a: usize, b: usize, cc: usize) -> f64 {
        match self.0.kind {
            BackendKind::Su2 { .. } => levi_civita(a, b, cc),
            _ => 0.0,
        }
    }

    pub fn ad_coad_bracket(&self, kind: AdKind, g: Option<&GroupElem>, x: &LieValue, y: Option<&AlgElem>) -> Result<LieValue> {
        let need_g = || g.ok_or_else(|| Error::Shape("group element required".into()));
        match (kind, x) {
            (AdKind::Ad, LieValue::Alg(a)) => self.ad(need_g()?, a).map(LieValue::Alg),
            (AdKind::CoAd, LieValue::CoAlg(t)) => self.coad(need_g()?, t).map(LieValue::CoAlg),
            (AdKind::Bracket, LieValue::Alg(a)) => {
                let b = y.ok_or_else(|| Error::Shape("second algebra element required".into()))?;
                self.bracket(a, b).map(LieValue::Alg)
            }
            _ => Err(Error::Shape(format!("{kind:?} applied to the wrong kind of value"))),
        }
    }

    // ---------- representations ----------

    /// The irreducibles retained at this backend's cutoff.
    pub fn irrep_table(&self) -> Vec<(Irrep, usize)> {
        match self.0.kind {
            BackendKind::Finite(_) => self.table().unwrap().irreps.iter().enumerate().map(|(i, r)| (Irrep::Finite(i as u8), r[0].nrows())).collect(),
            BackendKind::U1 { modes } => mode_order(modes).into_iter().map(|k| (Irrep::Mode(k), 1)).collect(),
            BackendKind::Su2 { two_j } => (0..=two_j).map(|tj| (Irrep::Spin(tj), tj as usize + 1)).collect(),
        }
    }

    pub fn irrep_dim(&self, r: Irrep) -> usize {
        match r {
            Irrep::Finite(i) => self.table().unwrap().irreps[i as usize][0].nrows(),
            Irrep::Mode(_) => 1,
            Irrep::Spin(tj) => tj as usize + 1,
        }
    }

    fn irrep_matches(&self, r: Irrep) -> bool {
        match (self.0.kind, r) {
            (BackendKind::Finite(_), Irrep::Finite(i)) => (i as usize) < self.table().unwrap().irreps.len(),
            (BackendKind::U1 { .. }, Irrep::Mode(_)) => true,
            (BackendKind::Su2 { .. }, Irrep::Spin(_)) => true,
            _ => false,
        }
    }

    /// Checked: the label must be in [`Self::irrep_table`].
    pub fn irrep_matrix(&self, r: Irrep, g: &GroupElem) -> Result<DMatrix<C64>> {
        self.check(g)?;
        if !self.irrep_table().iter().any(|(l, _)| *l == r) {
            return Err(Error::UnknownIrrep(format!("{r} on {}", self.selector())));
        }
        Ok(self.rep(r, g))
    }

    /// Matrix of any irrep of the backend's group, regardless of cutoff.
    pub fn rep(&self, r: Irrep, g: &GroupElem) -> DMatrix<C64> {
        debug_assert!(self.irrep_matches(r));
        match (r, g) {
            (Irrep::Finite(i), GroupElem::Finite { idx, .. }) => self.table().unwrap().irreps[i as usize][*idx as usize].clone(),
            (Irrep::Mode(k), GroupElem::U1(a)) => DMatrix::from_element(1, 1, C64::from_polar(1.0, k as f64 * a)),
            (Irrep::Spin(tj), GroupElem::Su2(m)) => su2::spin_matrix(tj, m),
            _ => panic!("irrep {r} does not match element {g:?}"),
        }
    }

    pub fn entry_value(&self, e: &Entry, g: &GroupElem) -> C64 {
        let v = match (e.irrep, g) {
            (Irrep::Mode(k), GroupElem::U1(a)) => C64::from_polar(1.0, k as f64 * a),
            _ => self.rep(e.irrep, g)[(e.row as usize, e.col as usize)],
        };
        if e.conj {
            v.conj()
        } else {
            v
        }
    }

    /// `d/dt pi(exp(t tau_a)) |_{t=0}`.
    pub fn generator(&self, r: Irrep, a: usize) -> Arc<DMatrix<C64>> {
        let mut cache = self.0.generators.lock().unwrap();
        cache
            .entry((r, a))
            .or_insert_with(|| {
                Arc::new(match r {
                    Irrep::Mode(k) => DMatrix::from_element(1, 1, c(0.0, k as f64)),
                    Irrep::Spin(tj) => su2::spin_generator(tj, &su2::tau(a)),
                    Irrep::Finite(_) => panic!("finite groups have no generators"),
                })
            })
            .clone()
    }

    /// `V` with `Ad(g) = V D^1(g) V^dagger` (SU(2) only).
    pub fn adjoint_intertwiner(&self) -> Option<&DMatrix<C64>> {
        self.0.adjoint_intertwiner.as_ref()
    }

    fn compute_adjoint_intertwiner(&self) -> DMatrix<C64> {
        // V = int Ad(g) M D^1(g)^dagger dg commutes the two representations;
        // a generic M gives a nonzero multiple of a unitary.
        let rule = self.rule(4);
        let mut m = DMatrix::from_element(3, 3, c(0.0, 0.0));
        for (i, v) in m.iter_mut().enumerate() {
            *v = c(1.0 + 0.37 * i as f64, 0.11 * (i * i) as f64 - 0.5);
        }
        let mut v = DMatrix::from_element(3, 3, c(0.0, 0.0));
        for (w, g) in rule.weights.iter().zip(&rule.elems) {
            let ad = self.ad_matrix(g).map(|x| c(x, 0.0));
            let d1 = self.rep(Irrep::Spin(2), g);
            v += (ad * &m * d1.adjoint()) * c(*w, 0.0);
        }
        let scale = ((v.adjoint() * &v)[(0, 0)].re).sqrt();
        v / c(scale, 0.0)
    }

    // ---------- Haar measure ----------

    /// Quadrature exact on integrands of harmonic weight at most `budget`.
    pub fn rule(&self, budget: u32) -> Arc<Rule> {
        let key = if self.is_finite() { 0 } else { budget };
        let mut cache = self.0.rules.lock().unwrap();
        cache.entry(key).or_insert_with(|| Arc::new(self.build_rule(key))).clone()
    }

    fn build_rule(&self, budget: u32) -> Rule {
        let (weights, elems) = match self.0.kind {
            BackendKind::Finite(kind) => {
                let n = self.order().unwrap();
                (vec![1.0 / n as f64; n], (0..n).map(|i| GroupElem::Finite { kind, idx: i as u8 }).collect())
            }
            BackendKind::U1 { .. } => {
                let n = budget as usize + 1;
                (vec![1.0 / n as f64; n], (0..n).map(|i| GroupElem::U1(TWO_PI * i as f64 / n as f64)).collect())
            }
            BackendKind::Su2 { .. } => {
                // Euler angles g = exp(a tau3) exp(b tau2) exp(c tau3), a, c on
                // [0, 4pi) and Gauss-Legendre in cos(b).
                let n = budget as usize + 1;
                let (xs, ws) = gauss_legendre(budget as usize / 2 + 2);
                let mut weights = Vec::new();
                let mut elems = Vec::new();
                for i in 0..n {
                    let a = 2.0 * TWO_PI * i as f64 / n as f64;
                    let ea = su2::exp(&[0.0, 0.0, a]);
                    for (x, wx) in xs.iter().zip(&ws) {
                        let eb = su2::exp(&[0.0, x.clamp(-1.0, 1.0).acos(), 0.0]);
                        let eab = ea * eb;
                        for k in 0..n {
                            let cc = 2.0 * TWO_PI * k as f64 / n as f64;
                            elems.push(GroupElem::Su2(eab * su2::exp(&[0.0, 0.0, cc])));
                            weights.push(wx / 2.0 / (n * n) as f64);
                        }
                    }
                }
                (weights, elems)
            }
        };
        Rule { weights, elems, reps: Mutex::new(HashMap::new()) }
    }

    /// Integral against the normalized Haar measure. `budget` is the harmonic
    /// weight of `f` (ignored on finite groups). The result is flagged inexact
    /// when a finer rule gives a different answer.
    pub fn haar_integrate<F: Fn(&GroupElem) -> C64>(&self, f: F, budget: u32) -> HaarValue {
        if let Some(n) = self.order() {
            let total: C64 = (0..n).map(|i| f(&self.elem(i))).sum();
            return HaarValue { value: total / n as f64, exact: true };
        }
        let eval = |r: &Rule| r.weights.iter().zip(&r.elems).map(|(w, g)| f(g) * *w).sum::<C64>();
        let value = eval(&self.rule(budget));
        let check = eval(&self.rule(2 * budget + 3));
        let exact = (check - value).norm() <= 1e-10 * (1.0 + value.norm());
        HaarValue { value, exact }
    }

    /// Cached matrices of irrep `r` at the nodes of `rule`.
    pub fn rule_reps(&self, rule: &Rule, r: Irrep) -> Arc<Vec<DMatrix<C64>>> {
        let mut cache = rule.reps.lock().unwrap();
        cache.entry(r).or_insert_with(|| Arc::new(rule.elems.iter().map(|g| self.rep(r, g)).collect())).clone()
    }

    /// Exact Haar integral of a product of matrix entries (memoised).
    pub fn integrate_entries(&self, entries: &[Entry]) -> C64 {
        if entries.is_empty() {
            return c(1.0, 0.0);
        }
        let mut key = entries.to_vec();
        key.sort();
        if let Some(v) = self.0.integrals.lock().unwrap().get(&key) {
            return *v;
        }
        let budget: u32 = key.iter().map(|e| e.irrep.weight()).sum();
        let rule = self.rule(budget);
        let mut vals = vec![c(1.0, 0.0); rule.elems.len()];
        for e in &key {
            let reps = self.rule_reps(&rule, e.irrep);
            for (v, m) in vals.iter_mut().zip(reps.iter()) {
                let x = m[(e.row as usize, e.col as usize)];
                *v *= if e.conj { x.conj() } else { x };
            }
        }
        let mut total: C64 = vals.iter().zip(&rule.weights).map(|(v, w)| v * *w).sum();
        if total.norm() < 1e-14 {
            total = c(0.0, 0.0);
        }
        self.0.integrals.lock().unwrap().insert(key, total);
        total
    }
}

pub fn parse_twice_spin(s: &str) -> Option<u32> {
    match s.split_once('/') {
        Some((n, "2")) => n.parse::<u32>().ok(),
        Some(_) => None,
        None => s.parse::<u32>().ok().map(|j| 2 * j),
    }
}

/// Modes ordered 0, 1, -1, 2, -2, ... so lower cutoffs are prefixes.
pub fn mode_order(k: u32) -> Vec<i32> {
    let mut out = vec![0];
    for m in 1..=k as i32 {
        out.push(m);
        out.push(-m);
    }
    out
}

pub fn cross(x: &[f64], y: &[f64]) -> [f64; 3] {
    [x[1] * y[2] - x[2] * y[1], x[2] * y[0] - x[0] * y[2], x[0] * y[1] - x[1] * y[0]]
}

pub fn levi_civita(a: usize, b: usize, c: usize) -> f64 {
    match (a, b, c) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1] (Golub-Welsch).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = k as f64 / ((4 * k * k - 1) as f64).sqrt();
        j[(k, k - 1)] = b;
        j[(k - 1, k)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n).map(|i| (eig.eigenvalues[i], 2.0 * eig.eigenvectors[(0, i)].powi(2))).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}
