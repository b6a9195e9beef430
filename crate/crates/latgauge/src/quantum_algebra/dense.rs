//! Dense kernels on finite groups, generic over the scalar field.
//!
//! `F` is stored as `data[h * N + g]` with `N = |G|^E`. Operators act on
//! `L^2(G^E)` in the point basis; Haar integrals are `1/N` times sums.

use super::{edge_morphs, Fundamental, Side};
use crate::group_backend::harmonic::{Letter, Word};
use crate::scalar::{max_diff, Scalar};
use crate::structured_graph::Resolved;
use crate::{Error, Group, GroupElem, Result, C64};
use rand::Rng;
use rayon::prelude::*;
use std::sync::Arc;

/// Componentwise arithmetic on `G^E` through flat indices.
#[derive(Debug)]
pub struct Tuples {
    pub n: usize,
    pub edges: usize,
    pub size: usize,
    mul: Vec<u32>,
    inv: Vec<u32>,
    group: Group,
}

impl Tuples {
    pub fn new(group: &Group, edges: usize) -> Result<Self> {
        let Some(n) = group.order() else {
            return Err(Error::Unsupported(format!("dense kernels need a finite group, got {}", group.selector())));
        };
        let size = n.pow(edges as u32);
        let t = group.table().unwrap();
        let mut out = Tuples { n, edges, size, mul: Vec::new(), inv: Vec::new(), group: group.clone() };
        let mut mul = vec![0u32; size * size];
        let mut inv = vec![0u32; size];
        for a in 0..size {
            let da = out.decode(a);
            inv[a] = out.encode(&da.iter().map(|&x| t.inv(x)).collect::<Vec<_>>()) as u32;
            for b in 0..size {
                let db = out.decode(b);
                mul[a * size + b] = out.encode(&da.iter().zip(&db).map(|(&x, &y)| t.mul(x, y)).collect::<Vec<_>>()) as u32;
            }
        }
        out.mul = mul;
        out.inv = inv;
        Ok(out)
    }

    pub fn decode(&self, mut x: usize) -> Vec<usize> {
        let mut d = vec![0; self.edges];
        for i in (0..self.edges).rev() {
            d[i] = x % self.n;
            x /= self.n;
        }
        d
    }

    pub fn encode(&self, d: &[usize]) -> usize {
        d.iter().fold(0, |acc, &x| acc * self.n + x)
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.size + b] as usize
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a] as usize
    }

    /// Names of the tuple's components, e.g. `(r, s)`.
    pub fn name(&self, x: usize) -> String {
        let t = self.group.table().unwrap();
        let parts: Vec<&str> = self.decode(x).into_iter().map(|i| t.names[i]).collect();
        format!("({})", parts.join(","))
    }

    /// Point-basis manifest of `L^2(G^E)`.
    pub fn manifest(&self) -> Vec<String> {
        (0..self.size).map(|x| self.name(x)).collect()
    }
}

/// Evaluates a word on element indices of a finite group.
pub fn eval_word_idx(group: &Group, w: &[Letter], vals: &[usize]) -> usize {
    let t = group.table().expect("finite group");
    w.iter().fold(0, |acc, l| {
        let x = match l {
            Letter::Var { slot, inv: false } => vals[*slot as usize],
            Letter::Var { slot, inv: true } => t.inv(vals[*slot as usize]),
            Letter::Const(GroupElem::Finite { idx, .. }) => *idx as usize,
            Letter::Const(g) => panic!("constant {g:?} in a finite word"),
        };
        t.mul(acc, x)
    })
}

/// Small dense matrix over a [`Scalar`], row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> &T {
        &self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    pub fn add_at(&mut self, r: usize, c: usize, v: T) {
        let i = r * self.cols + c;
        self.data[i] = self.data[i].clone() + v;
    }

    /// Product skipping structural zeros (point-basis operators are sparse).
    pub fn mul(&self, o: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, o.rows, "matrix product shape mismatch");
        let cols = o.cols;
        let data: Vec<T> = (0..self.rows)
            .into_par_iter()
            .flat_map_iter(|i| {
                let mut row = vec![T::zero(); cols];
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    if a.is_zero() {
                        continue;
                    }
                    for (j, r) in row.iter_mut().enumerate() {
                        let b = o.get(k, j);
                        if !b.is_zero() {
                            *r = r.clone() + a.clone() * b.clone();
                        }
                    }
                }
                row
            })
            .collect();
        Mat { rows: self.rows, cols, data }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Mat<T> {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(j, i, self.get(i, j).conj());
            }
        }
        m
    }

    /// Kronecker product; the left factor is the more significant index.
    pub fn kron(&self, o: &Mat<T>) -> Mat<T> {
        let mut m = Self::zeros(self.rows * o.rows, self.cols * o.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..o.rows {
                    for l in 0..o.cols {
                        m.set(i * o.rows + k, j * o.cols + l, a.clone() * o.get(k, l).clone());
                    }
                }
            }
        }
        m
    }

    pub fn scale_int(&self, n: i64) -> Mat<T> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x.clone() * T::from_int(n, 0)).collect() }
    }

    pub fn max_diff(&self, o: &Mat<T>) -> f64 {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "matrix shape mismatch");
        max_diff(&self.data, &o.data)
    }

    pub fn to_c64(&self) -> Mat<C64> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x.to_c64()).collect() }
    }

    /// Matrix of `Psi -> Psi o w` with `w` given by one word per source edge
    /// in the target holonomies. Columns index the source space.
    pub fn pullback(group: &Group, n_src: usize, n_tgt: usize, words: &[Word]) -> Result<Mat<T>> {
        let src = Tuples::new(group, n_src)?;
        let tgt = Tuples::new(group, n_tgt)?;
        if words.len() != n_src {
            return Err(Error::Shape(format!("{} words for {n_src} source edges", words.len())));
        }
        let mut m = Self::zeros(tgt.size, src.size);
        for y in 0..tgt.size {
            let dy = tgt.decode(y);
            let x: Vec<usize> = words.iter().map(|w| eval_word_idx(group, w, &dy)).collect();
            m.set(y, src.encode(&x), T::one());
        }
        Ok(m)
    }
}

#[derive(Clone, Debug)]
pub struct DenseKernel<T> {
    pub group: Group,
    pub tup: Arc<Tuples>,
    pub data: Vec<T>,
}

impl<T: Scalar> DenseKernel<T> {
    pub fn zeros(group: &Group, edges: usize) -> Result<Self> {
        let tup = Arc::new(Tuples::new(group, edges)?);
        Ok(DenseKernel { group: group.clone(), data: vec![T::zero(); tup.size * tup.size], tup })
    }

    pub fn with_tuples(group: &Group, tup: Arc<Tuples>) -> Self {
        DenseKernel { group: group.clone(), data: vec![T::zero(); tup.size * tup.size], tup }
    }

    pub fn from_fn(group: &Group, edges: usize, f: impl Fn(usize, usize) -> T + Sync) -> Result<Self> {
        let mut k = Self::zeros(group, edges)?;
        let n = k.tup.size;
        k.data = (0..n * n).into_par_iter().map(|i| f(i / n, i % n)).collect();
        Ok(k)
    }

    pub fn n_edges(&self) -> usize {
        self.tup.edges
    }

    pub fn size(&self) -> usize {
        self.tup.size
    }

    #[inline]
    pub fn at(&self, h: usize, g: usize) -> &T {
        &self.data[h * self.tup.size + g]
    }

    /// The unit `prod_e delta_e(h_e)`, i.e. `N [h = 1]`.
    pub fn delta(group: &Group, edges: usize) -> Result<Self> {
        let mut k = Self::zeros(group, edges)?;
        let n = k.size();
        for g in 0..n {
            k.data[g] = T::from_int(n as i64, 0);
        }
        Ok(k)
    }

    /// `scale [h = h0][g = g0]`.
    pub fn indicator(group: &Group, edges: usize, h0: usize, g0: usize, scale: T) -> Result<Self> {
        let mut k = Self::zeros(group, edges)?;
        let n = k.size();
        k.data[h0 * n + g0] = scale;
        Ok(k)
    }

    /// Sparse kernel with small Gaussian-integer entries.
    pub fn random<R: Rng + ?Sized>(group: &Group, edges: usize, density: f64, rng: &mut R) -> Result<Self> {
        let mut k = Self::zeros(group, edges)?;
        for v in k.data.iter_mut() {
            if rng.random::<f64>() < density {
                *v = T::from_int(rng.random_range(-3..=3), rng.random_range(-3..=3));
            }
        }
        Ok(k)
    }

    fn same(&self, o: &Self) -> Result<()> {
        if self.group != o.group || self.n_edges() != o.n_edges() {
            return Err(Error::BackendMismatch(format!(
                "kernels on {} x {} and {} x {}",
                self.group.selector(),
                self.n_edges(),
                o.group.selector(),
                o.n_edges()
            )));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Self {
        DenseKernel { data: self.data.iter().zip(&o.data).map(|(a, b)| a.clone() + b.clone()).collect(), ..self.clone() }
    }

    pub fn max_diff(&self, o: &Self) -> f64 {
        max_diff(&self.data, &o.data)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// `rho_L(f) Psi(g) = int dh f(h, g) Psi(h^-1 g)`,
    /// `rho_R(f) Psi(g) = int dh f(h, g) Psi(g h)`.
    pub fn rho(&self, side: Side) -> Mat<T> {
        let t = &self.tup;
        let n = t.size;
        let mut m = Mat::zeros(n, n);
        for h in 0..n {
            for g in 0..n {
                let v = self.at(h, g);
                if v.is_zero() {
                    continue;
                }
                let col = match side {
                    Side::Left => t.mul(t.inv(h), g),
                    Side::Right => t.mul(g, h),
                };
                m.add_at(g, col, v.div_int(n as i64));
            }
        }
        m
    }

    /// Inverse of `rho_L`, which is bijective onto all matrices.
    pub fn from_rho_left(group: &Group, edges: usize, m: &Mat<T>) -> Result<Self> {
        let mut k = Self::zeros(group, edges)?;
        let n = k.size();
        if (m.rows, m.cols) != (n, n) {
            return Err(Error::Shape(format!("{}x{} matrix for a space of dimension {n}", m.rows, m.cols)));
        }
        let t = k.tup.clone();
        for h in 0..n {
            for g in 0..n {
                k.data[h * n + g] = m.get(g, t.mul(t.inv(h), g)).clone() * T::from_int(n as i64, 0);
            }
        }
        Ok(k)
    }

    /// `(f *_L f')(h, g) = int dk f(k, g) f'(k^-1 h, k^-1 g)`;
    /// `(f *_R f')(h, g) = int dk f(k, g) f'(k^-1 h, g k)`.
    pub fn convolve(&self, side: Side, o: &Self) -> Result<Self> {
        self.same(o)?;
        let t = self.tup.clone();
        let n = t.size;
        let rows: Vec<Vec<T>> = (0..n)
            .into_par_iter()
            .map(|g| {
                // out[h] for this g
                let mut out = vec![T::zero(); n];
                for k in 0..n {
                    let a = self.at(k, g);
                    if a.is_zero() {
                        continue;
                    }
                    let ki = t.inv(k);
                    let g2 = match side {
                        Side::Left => t.mul(ki, g),
                        Side::Right => t.mul(g, k),
                    };
                    for (h, slot) in out.iter_mut().enumerate() {
                        let b = o.at(t.mul(ki, h), g2);
                        if !b.is_zero() {
                            *slot = slot.clone() + a.clone() * b.clone();
                        }
                    }
                }
                out.into_iter().map(|x| x.div_int(n as i64)).collect()
            })
            .collect();
        let mut k = Self::with_tuples(&self.group, t);
        for (g, row) in rows.into_iter().enumerate() {
            for (h, v) in row.into_iter().enumerate() {
                k.data[h * n + g] = v;
            }
        }
        Ok(k)
    }

    /// `f^{*L}(h, g) = conj f(h^-1, h^-1 g)`; `f^{*R}(h, g) = conj f(h^-1, g h)`.
    pub fn involute(&self, side: Side) -> Self {
        let t = &self.tup;
        let n = t.size;
        let mut k = Self::with_tuples(&self.group, self.tup.clone());
        for h in 0..n {
            let hi = t.inv(h);
            for g in 0..n {
                let g2 = match side {
                    Side::Left => t.mul(hi, g),
                    Side::Right => t.mul(g, h),
                };
                k.data[h * n + g] = self.at(hi, g2).conj();
            }
        }
        k
    }

    /// `I(f)(h, g) = f(g h^-1 g^-1, g)`.
    pub fn iso_i(&self) -> Self {
        self.remap_h(|t, h, g| t.mul(t.mul(g, t.inv(h)), t.inv(g)))
    }

    /// `I^-1(f)(h, g) = f(g^-1 h^-1 g, g)`.
    pub fn iso_i_inv(&self) -> Self {
        self.remap_h(|t, h, g| t.mul(t.mul(t.inv(g), t.inv(h)), g))
    }

    fn remap_h(&self, f: impl Fn(&Tuples, usize, usize) -> usize) -> Self {
        let t = &self.tup;
        let n = t.size;
        let mut k = Self::with_tuples(&self.group, self.tup.clone());
        for h in 0..n {
            for g in 0..n {
                k.data[h * n + g] = self.at(f(t, h, g), g).clone();
            }
        }
        k
    }

    /// `gamma(F)(h, g) = F(g^-1 h^-1 g, g^-1)`, edgewise on any graph.
    pub fn gamma(&self) -> Self {
        let t = &self.tup;
        let n = t.size;
        let mut k = Self::with_tuples(&self.group, self.tup.clone());
        for h in 0..n {
            for g in 0..n {
                let gi = t.inv(g);
                k.data[h * n + g] = self.at(t.mul(t.mul(gi, t.inv(h)), g), gi).clone();
            }
        }
        k
    }

    pub fn fundamental(&self, kind: Fundamental) -> Result<Self> {
        if self.n_edges() != 1 {
            return Err(Error::Shape(format!("fundamental morphisms act on one edge, got {}", self.n_edges())));
        }
        match kind.split() {
            None => Ok(self.gamma()),
            Some(r) => self.graph_morphism(&r),
        }
    }

    /// Kernel on the fine graph: the carrier of each coarse edge transports
    /// `h`, every other fine edge carries `delta`.
    pub fn graph_morphism(&self, r: &Resolved) -> Result<Self> {
        if r.n_coarse != self.n_edges() {
            return Err(Error::Shape(format!("witness with {} coarse edges applied to a kernel on {}", r.n_coarse, self.n_edges())));
        }
        let morphs = edge_morphs(r)?;
        let fine = Arc::new(Tuples::new(&self.group, r.n_fine)?);
        let nf = fine.size;
        let nb = self.group.order().unwrap() as i64;
        let carriers: Vec<usize> = morphs.iter().map(|m| m.carrier).collect();
        let deltas: Vec<usize> = (0..r.n_fine).filter(|f| !carriers.contains(f)).collect();
        let scale = T::from_int(nb.pow(deltas.len() as u32), 0);
        let src = &self.tup;
        let data: Vec<T> = (0..nf * nf)
            .into_par_iter()
            .map(|i| {
                let (h, g) = (i / nf, i % nf);
                let dh = fine.decode(h);
                if deltas.iter().any(|&f| dh[f] != 0) {
                    return T::zero();
                }
                let mut vals = dh;
                vals.extend(fine.decode(g));
                let hc: Vec<usize> = morphs.iter().map(|m| eval_word_idx(&self.group, &m.h_word, &vals)).collect();
                let gc: Vec<usize> = morphs.iter().map(|m| eval_word_idx(&self.group, &m.g_word, &vals)).collect();
                self.at(src.encode(&hc), src.encode(&gc)).clone() * scale.clone()
            })
            .collect();
        Ok(DenseKernel { group: self.group.clone(), tup: fine, data })
    }

    /// Rebuilds `F` from `alpha(F)` by reading `rho_L(alpha(F))` on the test
    /// vectors `Psi(g_2 g_1)` (or `Psi(g_2)` for `eta`) at `g_1 = 1`.
    pub fn recover(kind: Fundamental, image: &Self) -> Result<Self> {
        let group = &image.group;
        let one = Tuples::new(group, 1)?;
        let n = one.size;
        let m = image.rho(Side::Left);
        let mut rho_f = Mat::<T>::zeros(n, n);
        for x in 0..n {
            // test vector built from the point mass at x
            let psi: Vec<T> = match kind {
                Fundamental::GammaInv => (0..n).map(|g| if one.inv(g) == x { T::one() } else { T::zero() }).collect(),
                Fundamental::Eta => (0..n * n).map(|i| if i / n == x { T::one() } else { T::zero() }).collect(),
                Fundamental::AlphaL | Fundamental::AlphaR => (0..n * n).map(|i| if one.mul(i / n, i % n) == x { T::one() } else { T::zero() }).collect(),
            };
            for y in 0..n {
                let (row, read) = match kind {
                    Fundamental::GammaInv => (one.inv(y), y),
                    _ => (y * n, y),
                };
                let v = (0..psi.len()).fold(T::zero(), |acc, j| {
                    let a = m.get(row, j);
                    if a.is_zero() || psi[j].is_zero() {
                        acc
                    } else {
                        acc + a.clone() * psi[j].clone()
                    }
                });
                rho_f.set(read, x, v);
            }
        }
        Self::from_rho_left(group, 1, &rho_f)
    }

    pub fn to_c64(&self) -> DenseKernel<C64> {
        DenseKernel { group: self.group.clone(), tup: self.tup.clone(), data: self.data.iter().map(|x| x.to_c64()).collect() }
    }
}
