use latgauge::group_backend::harmonic::Entry;
use latgauge::phase_space::{random_cyl, CylFunction};
use latgauge::quantization::*;
use latgauge::quantum_algebra::HilbertBasis;
use latgauge::structured_graph::*;
use latgauge::{Error, Group, Irrep, C64};
use nalgebra::DMatrix;
use num_complex::Complex;
use num_rational::Ratio;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Q = Complex<Ratio<i64>>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn q(re: i64, im: i64) -> Q {
    Complex::new(Ratio::from_integer(re), Ratio::from_integer(im))
}

fn modes(cut: i32) -> Vec<i32> {
    (0..=2 * cut).map(|i| if i == 0 { 0 } else if i % 2 == 1 { (i + 1) / 2 } else { -i / 2 }).collect()
}

fn u1_symbol(group: &Group, m: usize, n: i32) -> CylFunction {
    let mut f = CylFunction::entry(group, 1, 0, Entry::mode(n));
    for _ in 0..m {
        f = f.mul(&CylFunction::theta(group, 1, 0, 0));
    }
    f
}

/// Kernel-formula oracle in exact arithmetic: the theta integral is a
/// derivative of delta at `X_h = 0`, moved by parts onto
/// `e^{-iNx/2} e^{-ikx}`; the Haar normalization contributes `1/2pi`, which
/// the constant `2pi` of the coordinate volume cancels.
fn oracle(m: u32, n: i64, k: i64, eps: Ratio<i64>) -> Q {
    let half_n = Complex::new(Ratio::from_integer(0), Ratio::new(-n, 2));
    let mk = q(0, -k);
    let mut sum = q(0, 0);
    for j in 0..=m {
        let binom = (0..j).fold(1i64, |b, i| b * (m - i) as i64 / (i + 1) as i64);
        sum += q(binom, 0) * half_n.powi(j as i32) * mk.powi((m - j) as i32);
    }
    sum * Complex::new(Ratio::from_integer(0), eps).powi(m as i32)
}

#[test]
fn constant_symbol_is_the_identity() {
    for group in [Group::u1(3), Group::su2(2)] {
        let b = HilbertBasis::at_cutoff(&group, 1);
        let m = weyl_quantize(&CylFunction::constant(&group, 1, c(1.0, 0.0)), 1.0, Ordering::Weyl, &b, &b).unwrap();
        assert!((m - DMatrix::<C64>::identity(b.dim(), b.dim())).norm() < 1e-12);
    }
}

#[test]
fn u1_midpoint_rule_matches_kernel_formula() {
    let group = Group::u1(9);
    let src = HilbertBasis::new(&group, 1, 4);
    let tgt = HilbertBasis::new(&group, 1, 9);
    for (eps_f, eps_q) in [(1.0, Ratio::from_integer(1)), (0.5, Ratio::new(1, 2))] {
        for m in 0..=3u32 {
            for n in -2..=2i32 {
                let qm = weyl_quantize(&u1_symbol(&group, m as usize, n), eps_f, Ordering::Weyl, &src, &tgt).unwrap();
                for (j, k) in modes(4).iter().enumerate() {
                    let i = modes(9).iter().position(|l| *l == k + n).unwrap();
                    let want = oracle(m, n as i64, *k as i64, eps_q);
                    let f = |r: &Ratio<i64>| *r.numer() as f64 / *r.denom() as f64;
                    // dyadic eps: both sides are exact binary fractions
                    assert_eq!(qm[(i, j)], c(f(&want.re), f(&want.im)), "m={m} N={n} k={k}");
                    assert_eq!(qm.column(j).iter().filter(|x| x.norm() > 0.0).count(), usize::from(want != q(0, 0)));
                }
            }
        }
    }
    // the same kernel formula in the library, in double precision
    assert!((u1_kernel_formula(1, 1, 2, 1.0) * 2.0 * std::f64::consts::PI - c(2.5, 0.0)).norm() < 1e-14);
    assert!((u1_normalization_constant(0.1) - 2.0 * std::f64::consts::PI).abs() < 1e-12);
}

#[test]
fn u1_examples_and_ordering_gap() {
    let group = Group::u1(6);
    let src = HilbertBasis::new(&group, 1, 4);
    let tgt = HilbertBasis::new(&group, 1, 6);
    let eps = 0.1;
    // theta e^{i phi}: k -> eps (k + 1/2) on k + 1
    let m = weyl_quantize(&u1_symbol(&group, 1, 1), eps, Ordering::Weyl, &src, &tgt).unwrap();
    for (j, k) in modes(4).iter().enumerate() {
        let i = modes(6).iter().position(|l| *l == k + 1).unwrap();
        assert!((m[(i, j)] - c(eps * (*k as f64 + 0.5), 0.0)).norm() < 1e-15);
    }
    // theta: both orderings diagonal eps k
    for ord in [Ordering::Weyl, Ordering::KohnNirenberg] {
        let m = weyl_quantize(&u1_symbol(&group, 1, 0), eps, ord, &src, &src).unwrap();
        let want = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(src.dim(), modes(4).iter().map(|k| c(eps * *k as f64, 0.0))));
        assert!((m - want).norm() < 1e-15);
    }
    // Weyl minus KN on theta e^{iN phi} is eps N / 2 on the shifted mode, exactly
    for n in [-2, 1, 2] {
        for eps in [1.0, 0.5] {
            let w = weyl_quantize(&u1_symbol(&group, 1, n), eps, Ordering::Weyl, &src, &tgt).unwrap();
            let kn = weyl_quantize(&u1_symbol(&group, 1, n), eps, Ordering::KohnNirenberg, &src, &tgt).unwrap();
            let d = w - kn;
            for (j, k) in modes(4).iter().enumerate() {
                let i = modes(6).iter().position(|l| *l == k + n).unwrap();
                assert_eq!(d[(i, j)], c(eps * n as f64 / 2.0, 0.0));
                assert_eq!(d.column(j).iter().filter(|x| x.norm() > 0.0).count(), 1);
            }
        }
    }
}

fn real_part(f: &CylFunction) -> CylFunction {
    f.add(&f.conj()).scale(c(0.5, 0.0))
}

#[test]
fn real_symbols_are_self_adjoint() {
    let mut r = rng(1);
    for group in [Group::u1(2), Group::su2(1)] {
        for _ in 0..10 {
            let f = real_part(&random_cyl(&group, 1, 1, 1, 3, &mut r));
            let src = HilbertBasis::new(&group, 1, group.cutoff());
            let tgt = HilbertBasis::new(&group, 1, group.cutoff() + 1);
            let m = weyl_quantize(&f, 0.7, Ordering::Weyl, &src, &tgt).unwrap();
            let top = m.view((0, 0), (src.dim(), src.dim())).into_owned();
            assert!((&top - top.adjoint()).norm() < 1e-12);
            // Q(conj sigma) = Q(sigma)^dagger for complex symbols
            let g = random_cyl(&group, 1, 1, 1, 3, &mut r);
            let a = weyl_quantize(&g, 0.7, Ordering::Weyl, &src, &tgt).unwrap();
            let b = weyl_quantize(&g.conj(), 0.7, Ordering::Weyl, &src, &tgt).unwrap();
            let ta = a.view((0, 0), (src.dim(), src.dim())).into_owned();
            let tb = b.view((0, 0), (src.dim(), src.dim())).into_owned();
            assert!((ta.adjoint() - tb).norm() < 1e-12);
        }
    }
}

#[test]
fn unsupported_classes_are_rejected() {
    let su2 = Group::su2(2);
    let t = CylFunction::theta(&su2, 1, 0, 0);
    let b = HilbertBasis::at_cutoff(&su2, 1);
    assert!(matches!(weyl_quantize(&t.mul(&t), 1.0, Ordering::Weyl, &b, &b), Err(Error::Unsupported(_))));
    assert!(matches!(weyl_quantize(&t, 1.0, Ordering::KohnNirenberg, &b, &b), Err(Error::Unsupported(_))));
    assert!(matches!(weyl_quantize(&t, -1.0, Ordering::Weyl, &b, &b), Err(Error::Domain(_))));
    let u1 = Group::u1(2);
    let b = HilbertBasis::at_cutoff(&u1, 1);
    assert!(matches!(weyl_quantize(&u1_symbol(&u1, 1, 2), 1.0, Ordering::Weyl, &b, &b), Err(Error::CutoffOverflow(_))));
}

#[test]
fn linear_symbols_scale_with_eps() {
    let su2 = Group::su2(1);
    let b = HilbertBasis::new(&su2, 1, 1);
    let tgt = HilbertBasis::new(&su2, 1, 2);
    let f = CylFunction::theta(&su2, 1, 0, 2).mul(&CylFunction::entry(&su2, 1, 0, Entry::new(Irrep::Spin(1), 0, 1)));
    let a = weyl_quantize(&f, 1.0, Ordering::Weyl, &b, &tgt).unwrap();
    let z = weyl_quantize(&f, 0.1, Ordering::Weyl, &b, &tgt).unwrap();
    assert!((a * c(0.1, 0.0) - z).norm() < 1e-15);
}

fn split(w: [f64; 2]) -> Resolved {
    Resolved { n_coarse: 1, n_fine: 2, pieces: vec![vec![(0, 1), (1, 1)]], weights: vec![w.to_vec()] }
}

#[test]
fn covariance_examples() {
    let u1 = Group::u1(4);
    let src = HilbertBasis::new(&u1, 1, 4);
    for w in [[1.0, 0.0], [0.0, 1.0]] {
        let one = covariance_residuals(&split(w), &CylFunction::constant(&u1, 1, c(1.0, 0.0)), 1.0, Ordering::Weyl, &src).unwrap();
        assert_eq!((one.direct, one.inverted), (0.0, 0.0));
        for (m, n) in [(1, 1), (2, 1), (2, -2), (1, 0)] {
            for ord in [Ordering::Weyl, Ordering::KohnNirenberg] {
                let res = covariance_residuals(&split(w), &u1_symbol(&u1, m, n), 0.1, ord, &src).unwrap();
                assert!(res.direct <= 1e-12 && res.inverted <= 1e-12, "{res:?}");
            }
        }
    }
    let su2 = Group::su2(2);
    let src = HilbertBasis::new(&su2, 1, 2);
    let sigma = CylFunction::theta(&su2, 1, 0, 2).mul(&CylFunction::entry(&su2, 1, 0, Entry::new(Irrep::Spin(1), 0, 1)));
    for w in [[1.0, 0.0], [0.0, 1.0]] {
        let res = covariance_residuals(&split(w), &sigma, 1.0, Ordering::Weyl, &src).unwrap();
        assert!(res.direct <= 1e-9 && res.inverted <= 1e-9, "{res:?}");
    }
    // theta-linear symbols pull back linearly in the weights, so even a
    // non-policy witness is covariant at this degree
    let res = covariance_residuals(&split([0.5, 0.5]), &sigma, 1.0, Ordering::Weyl, &src).unwrap();
    assert!(res.direct <= 1e-9, "{res:?}");
}

#[test]
fn covariance_on_random_refinements() {
    let mut r = rng(2);
    for group in [Group::u1(3), Group::su2(1)] {
        let deg = if matches!(group.kind(), latgauge::group_backend::BackendKind::U1 { .. }) { 2 } else { 1 };
        for t in 0..6 {
            let (pool, g0) = line_graph("g0", 4);
            let (g1, w) = random_refinement(&g0, &pool, "g1", 3, 0.4, if t % 2 == 0 { Policy::Left } else { Policy::Right }, &mut r);
            let res = resolve(&w, &g0, &g1).unwrap();
            let sigma = random_cyl(&group, 1, deg, 1, 3, &mut r);
            let src = HilbertBasis::new(&group, 1, group.cutoff());
            let out = covariance_residuals(&res, &sigma, 0.3, Ordering::Weyl, &src).unwrap();
            assert!(out.direct <= 1e-9 && out.inverted <= 1e-9, "{out:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// `[Q(theta_a), Q(f)] = -i eps Q(R_a f)` for functions of the holonomy.
    #[test]
    fn dirac_rule_for_linear_momenta(seed in 0u64..10_000, a in 0usize..3) {
        let su2 = Group::su2(1);
        let mut r = rng(seed);
        let f = random_cyl(&su2, 1, 0, 1, 3, &mut r);
        let eps = 0.4;
        let (b1, b2, b3) = (HilbertBasis::new(&su2, 1, 1), HilbertBasis::new(&su2, 1, 2), HilbertBasis::new(&su2, 1, 3));
        let th = CylFunction::theta(&su2, 1, 0, a);
        let qt2 = weyl_quantize(&th, eps, Ordering::Weyl, &b2, &b2).unwrap();
        let qt1 = weyl_quantize(&th, eps, Ordering::Weyl, &b1, &b1).unwrap();
        let qf = weyl_quantize(&f, eps, Ordering::Weyl, &b1, &b2).unwrap();
        let comm = &qt2 * &qf - &qf * qt1;
        let rf = weyl_quantize(&f.right_derivative(0, a).unwrap(), eps, Ordering::Weyl, &b1, &b3).unwrap();
        let rf = rf.view((0, 0), (b2.dim(), b1.dim())).into_owned() * c(0.0, -eps);
        prop_assert!((comm - rf).norm() < 1e-12);
    }
}
