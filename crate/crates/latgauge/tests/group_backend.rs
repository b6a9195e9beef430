use latgauge::group_backend::finite::FiniteKind;
use latgauge::group_backend::harmonic::{expand_entry, var, var_inv, Entry};
use latgauge::group_backend::{su2, ArithKind, GroupElem, Irrep};
use latgauge::scalar::{c, C64};
use latgauge::{AlgElem, CoAlgElem, Error, Group};
use nalgebra::{DMatrix, Matrix2};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// Taylor series, independent of the closed form in the crate.
fn expm_series(m: &Matrix2<C64>) -> Matrix2<C64> {
    let mut term = Matrix2::identity();
    let mut acc = Matrix2::identity();
    for k in 1..60 {
        term = term * m / c(k as f64, 0.0);
        acc += term;
    }
    acc
}

fn su2_of(g: &GroupElem) -> Matrix2<C64> {
    match g {
        GroupElem::Su2(m) => *m,
        _ => panic!("not su2"),
    }
}

#[test]
fn s3_conjugate_matches_permutation_oracle() {
    let g = Group::finite(FiniteKind::S3);
    // permutations as arrays, composition (p q)(x) = p(q(x))
    let r = [1usize, 2, 0];
    let s = [0usize, 2, 1];
    let comp = |p: [usize; 3], q: [usize; 3]| [p[q[0]], p[q[1]], p[q[2]]];
    let s_inv = s;
    let expect = comp(comp(s, r), s_inv);
    let r2 = comp(r, r);
    assert_eq!(expect, r2);
    let got = g.arithmetic(ArithKind::Conjugate, &g.named("s").unwrap(), Some(&g.named("r").unwrap())).unwrap();
    assert_eq!(got, g.named("r2").unwrap());
}

#[test]
fn identity_law_and_mismatch() {
    let g = Group::finite(FiniteKind::Q8);
    for i in 0..8 {
        assert_eq!(g.mul(&g.identity(), &g.elem(i)), g.elem(i));
    }
    let u = Group::u1(2);
    let err = g.arithmetic(ArithKind::Multiply, &g.elem(1), Some(&u.identity())).unwrap_err();
    assert!(matches!(err, Error::BackendMismatch(_)));
}

#[test]
fn su2_exp_against_series() {
    let g = Group::su2(2);
    let e = su2_of(&g.exp(&AlgElem(vec![0.0, 0.0, PI])).unwrap());
    let want = Matrix2::new(C64::from_polar(1.0, -PI / 2.0), c(0.0, 0.0), c(0.0, 0.0), C64::from_polar(1.0, PI / 2.0));
    assert!((e - want).norm() < 1e-14);
    let mut r = rng(1);
    for _ in 0..20 {
        let x = g.random_alg(&mut r, 3.0);
        let a = su2_of(&g.exp(&x).unwrap());
        let b = expm_series(&su2::alg_matrix(&x.0));
        assert!((a - b).norm() < 1e-12);
    }
}

#[test]
fn su2_invert_half_turn() {
    let g = Group::su2(2);
    let a = g.exp(&AlgElem(vec![0.0, 0.0, PI / 2.0])).unwrap();
    let inv = g.arithmetic(ArithKind::Invert, &a, None).unwrap();
    let want = g.exp(&AlgElem(vec![0.0, 0.0, -PI / 2.0])).unwrap();
    assert!(g.distance(&inv, &want) < 1e-14);
    let direct = su2_of(&a).try_inverse().unwrap();
    assert!((direct - su2_of(&inv)).norm() < 1e-14);
}

#[test]
fn u1_log_and_sqrt() {
    let g = Group::u1(4);
    assert_eq!(g.log(&g.u1_elem(1.0)).unwrap().0, vec![1.0]);
    assert!(g.distance(&g.sqrt(&g.u1_elem(1.0)).unwrap(), &g.u1_elem(0.5)) < 1e-15);
    assert!(matches!(g.log(&g.u1_elem(PI)), Err(Error::Domain(_))));
    assert_eq!(g.exp(&AlgElem(vec![0.0])).unwrap(), g.identity());
}

#[test]
fn su2_cut_locus_and_finite_unsupported() {
    let g = Group::su2(2);
    let minus = GroupElem::Su2(-Matrix2::identity());
    assert!(matches!(g.log(&minus), Err(Error::Domain(_))));
    let f = Group::finite(FiniteKind::S3);
    assert!(matches!(f.log(&f.elem(1)), Err(Error::Unsupported(_))));
    assert!(matches!(f.bracket(&AlgElem(vec![]), &AlgElem(vec![])), Err(Error::Unsupported(_))));
}

#[test]
fn su2_ad_and_bracket_against_matrices() {
    let g = Group::su2(2);
    let t = 0.7;
    let h = g.exp(&AlgElem(vec![0.0, 0.0, t])).unwrap();
    let got = g.ad(&h, &AlgElem(vec![1.0, 0.0, 0.0])).unwrap();
    // conjugation of basis matrices, decomposed by solving against tau_1, tau_2, tau_3
    let m = su2_of(&h) * su2::tau(0) * su2_of(&h).adjoint();
    let want = m - (su2::tau(0) * c(t.cos(), 0.0) + su2::tau(1) * c(t.sin(), 0.0));
    assert!(want.norm() < 1e-14);
    assert!((got.0[0] - t.cos()).abs() < 1e-14 && (got.0[1] - t.sin()).abs() < 1e-14 && got.0[2].abs() < 1e-14);
    let br = g.bracket(&AlgElem(vec![1.0, 0.0, 0.0]), &AlgElem(vec![0.0, 1.0, 0.0])).unwrap();
    let comm = su2::tau(0) * su2::tau(1) - su2::tau(1) * su2::tau(0);
    assert!((comm - su2::tau(2)).norm() < 1e-15);
    assert_eq!(br.0, vec![0.0, 0.0, 1.0]);
}

#[test]
fn coad_is_dual_of_ad_inverse() {
    let g = Group::su2(2);
    let mut r = rng(2);
    for _ in 0..20 {
        let h = g.random(&mut r);
        let th = g.random_coalg(&mut r, 2.0);
        let x = g.random_alg(&mut r, 2.0);
        let lhs = g.coad(&h, &th).unwrap().pair(&x);
        let rhs = th.pair(&g.ad(&g.inv(&h), &x).unwrap());
        assert!((lhs - rhs).abs() < 1e-13);
    }
}

#[test]
fn haar_examples() {
    for g in [Group::finite(FiniteKind::S3), Group::u1(3), Group::su2(2)] {
        let v = g.haar_integrate(|_| c(1.0, 0.0), 0);
        assert!((v.value - c(1.0, 0.0)).norm() < 1e-13 && v.exact);
    }
    let u = Group::u1(3);
    let v = u.haar_integrate(|x| u.rep(Irrep::Mode(3), x)[(0, 0)], 3);
    assert!(v.value.norm() < 1e-15 && v.exact);
    // under-resolved integrand is flagged
    let v = u.haar_integrate(|x| u.rep(Irrep::Mode(2), x)[(0, 0)], 1);
    assert!(!v.exact);
    let s3 = Group::finite(FiniteKind::S3);
    let sum: f64 = (0..6).map(|i| if i < 3 { 1.0 } else { -1.0 }).sum();
    assert_eq!(sum, 0.0);
    let v = s3.haar_integrate(|x| s3.rep(Irrep::Finite(1), x)[(0, 0)], 0);
    assert_eq!(v.value, c(0.0, 0.0));
}

#[test]
fn irrep_examples() {
    let s3 = Group::finite(FiniteKind::S3);
    assert_eq!(s3.irrep_matrix(Irrep::Finite(0), &s3.elem(4)).unwrap()[(0, 0)], c(1.0, 0.0));
    assert!(matches!(s3.irrep_matrix(Irrep::Finite(7), &s3.elem(0)), Err(Error::UnknownIrrep(_))));
    let u = Group::u1(2);
    let m = u.irrep_matrix(Irrep::Mode(2), &u.u1_elem(0.3)).unwrap();
    assert!((m[(0, 0)] - C64::from_polar(1.0, 0.6)).norm() < 1e-15);
    assert!(u.irrep_matrix(Irrep::Mode(3), &u.identity()).is_err());
    let g = Group::su2(2);
    let mut r = rng(3);
    let x = g.random(&mut r);
    let d = g.irrep_matrix(Irrep::Spin(1), &x).unwrap();
    let u2 = su2_of(&x);
    for i in 0..2 {
        for j in 0..2 {
            assert!((d[(i, j)] - u2[(i, j)]).norm() < 1e-15);
        }
    }
}

#[test]
fn irreps_are_unitary_homomorphisms() {
    let mut r = rng(4);
    for g in [Group::finite(FiniteKind::S3), Group::finite(FiniteKind::Q8), Group::finite(FiniteKind::Z4), Group::u1(3), Group::su2(4)] {
        for _ in 0..10 {
            let (a, b) = (g.random(&mut r), g.random(&mut r));
            for (lab, d) in g.irrep_table() {
                let pa = g.rep(lab, &a);
                let pb = g.rep(lab, &b);
                let pab = g.rep(lab, &g.mul(&a, &b));
                assert!((&pa * &pb - pab).norm() < 1e-12, "{g:?} {lab}");
                assert!((pa.adjoint() * &pa - DMatrix::identity(d, d)).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn schur_orthogonality() {
    for g in [Group::finite(FiniteKind::S3), Group::finite(FiniteKind::Q8), Group::u1(3), Group::su2(3)] {
        let table = g.irrep_table();
        for &(li, di) in &table {
            for &(lj, dj) in &table {
                for (a, b, cc, dd) in itertools(di, dj) {
                    let e1 = Entry::new(li, a, b);
                    let e2 = Entry { conj: true, ..Entry::new(lj, cc, dd) };
                    let v = g.integrate_entries(&[e1, e2]);
                    let want = if li == lj && a == cc && b == dd { 1.0 / di as f64 } else { 0.0 };
                    assert!((v - c(want, 0.0)).norm() < 1e-9, "{g:?} {li} {lj}");
                }
            }
        }
    }
}

fn itertools(di: usize, dj: usize) -> Vec<(usize, usize, usize, usize)> {
    let mut out = vec![];
    for a in 0..di {
        for b in 0..di {
            for cc in 0..dj {
                for d in 0..dj {
                    out.push((a, b, cc, d));
                }
            }
        }
    }
    out
}

#[test]
fn su2_generators_match_finite_differences() {
    let g = Group::su2(4);
    let step = 1e-5;
    for tj in 0..=4 {
        for a in 0..3 {
            let mut x = vec![0.0; 3];
            x[a] = step;
            let plus = g.rep(Irrep::Spin(tj), &GroupElem::Su2(su2::exp(&x)));
            x[a] = -step;
            let minus = g.rep(Irrep::Spin(tj), &GroupElem::Su2(su2::exp(&x)));
            let fd = (plus - minus) / c(2.0 * step, 0.0);
            assert!((fd - g.generator(Irrep::Spin(tj), a).as_ref()).norm() < 1e-6);
        }
    }
}

#[test]
fn su2_conjugate_entry_identity() {
    let g = Group::su2(4);
    let mut r = rng(5);
    let x = g.random(&mut r);
    for tj in 0..=4u32 {
        let m = g.rep(Irrep::Spin(tj), &x);
        let d = tj as usize + 1;
        for a in 0..d {
            for b in 0..d {
                let sign = if (a + b) % 2 == 1 { -1.0 } else { 1.0 };
                assert!((m[(a, b)].conj() - m[(d - 1 - a, d - 1 - b)] * sign).norm() < 1e-13);
            }
        }
    }
}

#[test]
fn adjoint_intertwiner_reproduces_ad() {
    let g = Group::su2(2);
    let v = g.adjoint_intertwiner().unwrap().clone();
    assert!((v.adjoint() * &v - DMatrix::identity(3, 3)).norm() < 1e-12);
    let mut r = rng(6);
    for _ in 0..10 {
        let x = g.random(&mut r);
        let ad = g.ad_matrix(&x).map(|t| c(t, 0.0));
        let ad = DMatrix::from_iterator(3, 3, ad.iter().cloned());
        assert!((&v * g.rep(Irrep::Spin(2), &x) * v.adjoint() - ad).norm() < 1e-12);
    }
}

#[test]
fn word_expansion_matches_direct_evaluation() {
    let mut r = rng(7);
    for g in [Group::finite(FiniteKind::S3), Group::u1(3), Group::su2(2)] {
        let vals: Vec<GroupElem> = (0..2).map(|_| g.random(&mut r)).collect();
        let k = g.random(&mut r);
        let word = vec![var(1), latgauge::group_backend::harmonic::Letter::Const(k.clone()), var_inv(0)];
        let target = g.mul(&g.mul(&vals[1], &k), &g.inv(&vals[0]));
        for (lab, d) in g.irrep_table() {
            for a in 0..d {
                for b in 0..d {
                    for conj in [false, true] {
                        let e = Entry { conj, ..Entry::new(lab, a, b) };
                        let got: C64 = expand_entry(&g, e, &word)
                            .iter()
                            .map(|(co, fs)| co * latgauge::group_backend::harmonic::eval_factors(&g, fs, &vals))
                            .sum();
                        assert!((got - g.entry_value(&e, &target)).norm() < 1e-12);
                    }
                }
            }
        }
    }
}

#[test]
fn backend_selectors() {
    assert_eq!(Group::parse("su2:cutoff=3/2").unwrap().cutoff(), 3);
    assert_eq!(Group::parse("u1:modes=8").unwrap().cutoff(), 8);
    assert!(Group::parse("finite:S3").unwrap().is_finite());
    let err = Group::parse("su3").unwrap_err().to_string();
    assert!(err.contains("finite:S3") && err.contains("su2:cutoff"));
}

#[test]
fn gauss_legendre_integrates_polynomials() {
    let (xs, ws) = latgauge::group_backend::gauss_legendre(5);
    for p in 0..10 {
        let q: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.powi(p)).sum();
        let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
        assert!((q - exact).abs() < 1e-13);
    }
}

fn lie_groups() -> Vec<Group> {
    vec![Group::u1(2), Group::su2(2)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn associativity(seed in any::<u64>()) {
        let mut r = rng(seed);
        for g in [Group::finite(FiniteKind::S3), Group::finite(FiniteKind::Q8)] {
            let (a, b, cc) = (g.random(&mut r), g.random(&mut r), g.random(&mut r));
            prop_assert_eq!(g.mul(&g.mul(&a, &b), &cc), g.mul(&a, &g.mul(&b, &cc)));
        }
        for g in lie_groups() {
            let (a, b, cc) = (g.random(&mut r), g.random(&mut r), g.random(&mut r));
            prop_assert!(g.distance(&g.mul(&g.mul(&a, &b), &cc), &g.mul(&a, &g.mul(&b, &cc))) <= 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn coad_composition(seed in any::<u64>()) {
        let g = Group::su2(2);
        let mut r = rng(seed);
        let (a, b) = (g.random(&mut r), g.random(&mut r));
        let th = g.random_coalg(&mut r, 3.0);
        let lhs = g.coad(&g.mul(&a, &b), &th).unwrap();
        let rhs = g.coad(&a, &g.coad(&b, &th).unwrap()).unwrap();
        for i in 0..3 {
            prop_assert!((lhs.0[i] - rhs.0[i]).abs() <= 1e-12);
        }
    }

    #[test]
    fn exp_log_roundtrip(seed in any::<u64>()) {
        let mut r = rng(seed);
        for g in lie_groups() {
            let h = g.random(&mut r);
            match g.log(&h) {
                Ok(x) => {
                    prop_assert!(g.distance(&g.exp(&x).unwrap(), &h) <= 1e-10);
                    let s = g.sqrt(&h).unwrap();
                    prop_assert!(g.distance(&g.mul(&s, &s), &h) <= 1e-10);
                }
                Err(_) => prop_assert!(false, "random sample on the cut locus"),
            }
        }
    }

    #[test]
    fn bracket_jacobi(seed in any::<u64>()) {
        let g = Group::su2(2);
        let mut r = rng(seed);
        let (x, y, z) = (g.random_alg(&mut r, 2.0), g.random_alg(&mut r, 2.0), g.random_alg(&mut r, 2.0));
        let b = |p: &AlgElem, q: &AlgElem| g.bracket(p, q).unwrap();
        let j1 = b(&x, &b(&y, &z));
        let j2 = b(&y, &b(&z, &x));
        let j3 = b(&z, &b(&x, &y));
        let anti = b(&y, &x);
        let xy = b(&x, &y);
        for i in 0..3 {
            prop_assert!((j1.0[i] + j2.0[i] + j3.0[i]).abs() <= 1e-12);
            prop_assert!((anti.0[i] + xy.0[i]).abs() <= 1e-15);
        }
    }
}

#[test]
fn coalg_pairing() {
    let th = CoAlgElem(vec![2.0, 0.0, 0.0]);
    assert_eq!(th.pair(&AlgElem(vec![1.0, 0.0, 0.0])), 2.0);
}
