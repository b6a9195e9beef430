//! Check bodies. Each returns the worst residual over its trials together
//! with the tolerance it is held to.

use super::{Case, Outcome, Scenario, Tolerances};
use crate::gauge::*;
use crate::group_backend::harmonic::{Entry, Factor, Poly};
use crate::group_backend::BackendKind;
use crate::limits_states::*;
use crate::phase_space::{poisson_bracket, poisson_bracket_at, random_cyl, CylFunction, PhasePoint, PointMap};
use crate::quantization::{covariance_residuals, u1_kernel_formula_exact, weyl_quantize, Ordering};
use crate::quantum_algebra::lie::irreps_upto;
use crate::quantum_algebra::{DenseKernel, Fundamental, HilbertBasis, LieKernel, Mat, Side, Tuples, UnitaryKind};
use crate::scalar::Scalar;
use crate::structured_graph::{
    compose_weight_vectors, line_graph, order_class, policy_weights, random_refinement, resolve, Decomposition, Edge, Piece, Policy, RefinementWitness, Resolved,
    SegmentPool, StructuredGraph,
};
use crate::{Exact, Group, GroupElem, Irrep, Result, C64};
use nalgebra::DMatrix;
use num_rational::Ratio;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

type Res = Result<Outcome>;

pub struct CheckDef {
    pub name: &'static str,
    pub suite: &'static str,
    pub law: &'static str,
    pub expected_fail: bool,
    pub run: fn(&Ctx, &mut ChaCha8Rng) -> Res,
}

const fn def(suite: &'static str, name: &'static str, law: &'static str, run: fn(&Ctx, &mut ChaCha8Rng) -> Res) -> CheckDef {
    CheckDef { name, suite, law, expected_fail: false, run }
}

const fn xfail(suite: &'static str, name: &'static str, law: &'static str, run: fn(&Ctx, &mut ChaCha8Rng) -> Res) -> CheckDef {
    CheckDef { name, suite, law, expected_fail: true, run }
}

/// Every check, in report order.
pub const REGISTRY: &[CheckDef] = &[
    def("poisson", "poisson_canonical", "canonical brackets of momenta and holonomy functions", poisson_canonical),
    def("poisson", "poisson_map_policy", "projections with a named weight policy are Poisson maps", poisson_map_policy),
    xfail("poisson", "poisson_map_c_half", "projections with interior weights fail to be Poisson (negative control)", poisson_map_c_half),
    def("poisson", "poisson_defect_formula", "bracket defect of a two-piece split equals -c(1-c)(CoAd(g_t) theta_i - theta_t)([X,Y])", poisson_defect_formula),
    def("poisson", "poisson_inversion", "edge inversion is a Poisson map", poisson_inversion),
    def("poisson", "poisson_inversion_twist", "edge inversion sends P_X to -P_{Ad(g)X}", poisson_inversion_twist),
    def("projection", "projection_pullback", "pulled-back cylindrical functions equal composition with the projection", projection_pullback),
    def("projection", "projection_transitivity", "projections compose along chains of one policy", projection_transitivity),
    def("projection", "projection_inversion_square", "inverting both graphs commutes with projection", projection_inversion_square),
    def("projection", "projection_composed_weights", "named policies are closed under witness composition and swapped by inversion", projection_composed_weights),
    def("morphism", "morphism_intertwiner", "I intertwines the left and right convolution algebras and their representations", morphism_intertwiner),
    def("morphism", "morphism_star_homomorphism", "fundamental morphisms preserve convolution and involution", morphism_star_homomorphism),
    def("morphism", "morphism_injectivity", "fundamental morphisms are injective", morphism_injectivity),
    def("morphism", "morphism_graph_star", "witness morphisms preserve convolution and involution", morphism_graph_star),
    def("morphism", "morphism_inversion_square", "kernel inversion commutes with witness morphisms", morphism_inversion_square),
    def("morphism", "morphism_unitaries", "implementing unitaries are isometries that conjugate rho onto the fundamental morphisms", morphism_unitaries),
    def("representation", "rep_homomorphism", "rho is a *-representation on both sides", rep_homomorphism),
    def("representation", "rep_refinement_isometry", "refinement maps are isometries", rep_refinement_isometry),
    def("representation", "rep_refinement_covariance", "rho(alpha(F)) U = U rho(F) for the left representation", rep_refinement_covariance),
    def("representation", "rep_isometry_composition", "refinement isometries compose along chains", rep_isometry_composition),
    def("representation", "rep_inversion_symmetry", "refining a function or its pullback to the inverted coarse graph agree", rep_inversion_symmetry),
    def("quantization", "quant_covariance", "quantization commutes with refinement on both coarse orientations", quant_covariance),
    def("quantization", "quant_kernel_formula", "U(1) operators match the exact kernel formula", quant_kernel_formula),
    def("quantization", "quant_ordering_gap", "Weyl minus Kohn-Nirenberg on theta e^{iN phi} is eps N / 2 times the shift", quant_ordering_gap),
    def("quantization", "quant_self_adjoint", "real symbols give self-adjoint operators", quant_self_adjoint),
    def("quantization", "quant_dirac_rule", "[Q(theta_a), Q(f)] = -i eps Q(R_a f)", quant_dirac_rule),
    def("gauge", "gauge_action_property", "gauge assignments act by a group action on points, kernels and wave functions", gauge_action_property),
    def("gauge", "gauge_unitary_automorphism", "the gauge unitary implements the kernel automorphism", gauge_unitary_automorphism),
    def("gauge", "gauge_projection_square", "gauge action commutes with projection through the restricted assignment", gauge_projection_square),
    def("gauge", "gauge_wilson_loop", "characters of loop holonomies are gauge invariant", gauge_wilson_loop),
    def("gauge", "gauge_momentum_transform", "momenta transform by the adjoint action at the target vertex", gauge_momentum_transform),
    def("gauge", "gauge_quantization_covariance", "U Q(sigma) U* = Q(sigma moved by the inverse assignment)", gauge_quantization_covariance),
    def("gauge", "gauge_prism", "quantize, gauge and refine in either order", gauge_prism),
    def("states", "state_haar_normalized", "the Haar state takes the value 1 on the unit", state_haar_normalized),
    def("states", "state_haar_positive", "the Haar state is positive on F* F", state_haar_positive),
    def("states", "state_haar_consistency", "Haar states agree along refinements", state_haar_consistency),
    xfail("states", "state_perturbed_control", "a perturbed coarse state disagrees with the fine Haar state (negative control)", state_perturbed_control),
    def("states", "state_multiplier_covariance", "left translations conjugate multipliers to translated multipliers", state_multiplier_covariance),
];

/// Source cutoff of the Lie operator checks.
const SRC_CUT: u32 = 1;
/// Largest operator dimension a Lie check builds.
const MAX_LIE_DIM: usize = 20_000;

pub struct Ctx<'a> {
    pub sc: &'a Scenario,
    pub g: &'a Group,
    pub tol: &'a Tolerances,
    pub trials: usize,
}

impl<'a> Ctx<'a> {
    pub fn new(sc: &'a Scenario) -> Self {
        Ctx { sc, g: &sc.group, tol: &sc.file.tolerances, trials: sc.file.trials }
    }

    fn exact(&self) -> bool {
        self.sc.file.arithmetic == super::Arithmetic::Exact
    }

    /// Tolerance of finite-group identities: zero in exact arithmetic.
    fn finite_tol(&self) -> f64 {
        if self.exact() {
            0.0
        } else {
            self.tol.pointwise
        }
    }

    fn policy_cases(&self) -> Vec<Case> {
        let own: Vec<Case> = self.sc.cases.iter().filter(|c| c.resolved.policy_class().as_policy().is_some()).cloned().collect();
        if own.is_empty() {
            vec![canned_split([1.0, 0.0]), canned_split([0.0, 1.0])]
        } else {
            own
        }
    }

    fn generic_cases(&self) -> Vec<Case> {
        let own: Vec<Case> = self.sc.cases.iter().filter(|c| c.resolved.policy_class().as_policy().is_none()).cloned().collect();
        if own.is_empty() {
            vec![canned_split([0.5, 0.5])]
        } else {
            own
        }
    }

    fn all_cases(&self) -> Vec<Case> {
        if self.sc.cases.is_empty() {
            vec![canned_split([1.0, 0.0]), canned_split([0.0, 1.0]), canned_split([0.5, 0.5])]
        } else {
            self.sc.cases.clone()
        }
    }

    fn graphs(&self) -> Vec<StructuredGraph> {
        if self.sc.file.graphs.is_empty() {
            let c = canned_split([1.0, 0.0]);
            vec![c.coarse, c.fine]
        } else {
            self.sc.file.graphs.clone()
        }
    }

    /// Scenario chains of one policy followed by random chains on a line.
    fn chains(&self, rng: &mut ChaCha8Rng, segs: usize) -> Vec<(Resolved, Resolved, &'static str)> {
        let mut out = Vec::new();
        for a in &self.sc.cases {
            for b in &self.sc.cases {
                if a.fine.id != b.coarse.id {
                    continue;
                }
                let (pa, pb) = (a.resolved.policy_class(), b.resolved.policy_class());
                if pa.left && pb.left && a.class.contains("lessdot_L") && b.class.contains("lessdot_L") {
                    out.push((a.resolved.clone(), b.resolved.clone(), "lessdot_L"));
                } else if pa.right && pb.right && a.class.contains("lessdot_R") && b.class.contains("lessdot_R") {
                    out.push((a.resolved.clone(), b.resolved.clone(), "lessdot_R"));
                } else if a.class == "leq" && b.class == "leq" && (pa.left && pb.left || pa.right && pb.right) {
                    out.push((a.resolved.clone(), b.resolved.clone(), "leq"));
                }
            }
        }
        let (pool, g0) = line_graph("g0", segs);
        for t in 0..self.trials.max(2) {
            let policy = if t % 2 == 0 { Policy::Left } else { Policy::Right };
            let (g1, w1) = random_refinement(&g0, &pool, "g1", 2, 0.3, policy, rng);
            let (g2, w2) = random_refinement(&g1, &pool, "g2", 2, 0.3, policy, rng);
            let ok = |w: &RefinementWitness| match policy {
                Policy::Left => order_class(w).lessdot_l,
                Policy::Right => order_class(w).lessdot_r,
            };
            if ok(&w1) && ok(&w2) {
                if let (Ok(r1), Ok(r2)) = (resolve(&w1, &g0, &g1), resolve(&w2, &g1, &g2)) {
                    out.push((r1, r2, if policy == Policy::Left { "lessdot_L" } else { "lessdot_R" }));
                }
            }
        }
        out
    }
}

/// Coarse edge `a -> b` split at `m` with weights `[terminal, initial]`.
pub fn canned_split(weights: [f64; 2]) -> Case {
    let mut pool = SegmentPool::default();
    pool.segments.insert("s1".into(), ("a".into(), "m".into()));
    pool.segments.insert("s2".into(), ("m".into(), "b".into()));
    let edge = |id: &str, s: &str, t: &str, chain: Vec<(&str, i8)>| Edge {
        id: id.into(),
        source: s.into(),
        target: t.into(),
        chain: chain.into_iter().map(|(x, o)| (x.to_string(), o)).collect(),
    };
    let coarse = StructuredGraph { id: "c".into(), vertices: vec!["a".into(), "b".into()], edges: vec![edge("e", "a", "b", vec![("s1", 1), ("s2", 1)])] };
    let fine = StructuredGraph {
        id: "f".into(),
        vertices: vec!["a".into(), "b".into(), "m".into()],
        edges: vec![edge("e2", "m", "b", vec![("s2", 1)]), edge("e1", "a", "m", vec![("s1", 1)])],
    };
    let w = RefinementWitness {
        id: format!("split[{},{}]", weights[0], weights[1]),
        coarse: "c".into(),
        fine: "f".into(),
        decompositions: vec![Decomposition {
            coarse_edge: "e".into(),
            pieces: vec![Piece { edge: "e2".into(), sign: 1 }, Piece { edge: "e1".into(), sign: 1 }],
            weights: weights.to_vec(),
        }],
    };
    debug_assert!(coarse.validate(&pool).is_empty() && fine.validate(&pool).is_empty());
    let resolved = resolve(&w, &coarse, &fine).expect("canned split is valid");
    Case { label: w.id.clone(), coarse, fine, resolved, class: order_class(&w).label() }
}

fn lie_only() -> Res {
    Ok(Outcome::Skipped("needs a Lie backend".into()))
}

fn labels(cases: &[Case]) -> String {
    cases.iter().map(|c| format!("{} ({})", c.label, c.class)).collect::<Vec<_>>().join(", ")
}

fn chain_summary(chains: &[(Resolved, Resolved, &'static str)]) -> String {
    let count = |l: &str| chains.iter().filter(|c| c.2 == l).count();
    format!("chains: {} lessdot_L, {} lessdot_R, {} leq", count("lessdot_L"), count("lessdot_R"), count("leq"))
}

fn lie_kernel(g: &Group, n: usize, rng: &mut ChaCha8Rng) -> LieKernel {
    LieKernel::random(g, n, 1, 3, 0.3, rng)
}

/// Theta degree the quantization checks use.
fn symbol_degree(g: &Group) -> usize {
    if matches!(g.kind(), BackendKind::U1 { .. }) {
        2
    } else {
        1
    }
}

fn first_irrep(g: &Group) -> Irrep {
    match g.kind() {
        BackendKind::U1 { .. } => Irrep::Mode(1),
        BackendKind::Su2 { .. } => Irrep::Spin(1),
        BackendKind::Finite(_) => Irrep::Finite(1),
    }
}

fn too_big(dims: &[usize]) -> Option<Outcome> {
    let d = dims.iter().copied().max().unwrap_or(0);
    (d > MAX_LIE_DIM).then(|| Outcome::Skipped(format!("operator dimension {d} exceeds {MAX_LIE_DIM}")))
}

/// Density giving a few hundred nonzero entries in a random kernel.
fn density(g: &Group, edges: usize) -> f64 {
    let n = g.order().unwrap_or(1).pow(2 * edges as u32) as f64;
    (300.0 / n).min(0.3)
}

fn indicator_basis<T: Scalar>(g: &Group, edges: usize) -> Result<Vec<DenseKernel<T>>> {
    let n = Tuples::new(g, edges)?.size;
    (0..n * n).map(|i| DenseKernel::indicator(g, edges, i / n, i % n, T::one())).collect()
}

macro_rules! by_arith {
    ($ctx:expr, $rng:expr, $f:ident) => {
        if $ctx.exact() {
            $f::<Exact>($ctx, $rng)
        } else {
            $f::<C64>($ctx, $rng)
        }
    };
}

// ---------------------------------------------------------------- poisson

fn poisson_residual(map: &PointMap, f: &CylFunction, h: &CylFunction, p: &PhasePoint) -> Result<f64> {
    let lhs = poisson_bracket_at(&map.pullback(f)?, &map.pullback(h)?, p)?;
    let rhs = map.pullback(&poisson_bracket(f, h)?)?.eval(p)?;
    Ok((lhs - rhs).norm())
}

fn poisson_canonical(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    let g = ctx.g;
    if g.is_finite() {
        return lie_only();
    }
    let n = 2;
    let mut worst: f64 = 0.0;
    for _ in 0..ctx.trials {
        let p = PhasePoint::random(g, n, 1.0, rng);
        let (x, y) = (g.random_alg(rng, 1.0), g.random_alg(rng, 1.0));
        let f = random_cyl(g, n, 0, 2, 3, rng);
        let f2 = random_cyl(g, n, 0, 2, 3, rng);
        worst = worst.max(poisson_bracket_at(&f, &f2, &p)?.norm());
        for e in 0..n {
            let pe = CylFunction::momentum(g, n, e, &x);
            let want = (0..g.dim()).map(|a| Ok(f.right_derivative(e, a)?.eval(&p)? * x.0[a])).sum::<Result<C64>>()?;
            worst = worst.max((poisson_bracket_at(&pe, &f, &p)? - want).norm());
            for e2 in 0..n {
                let v = poisson_bracket_at(&pe, &CylFunction::momentum(g, n, e2, &y), &p)?;
                let want = if e == e2 { -CylFunction::momentum(g, n, e, &g.bracket(&x, &y)?).eval(&p)? } else { C64::new(0.0, 0.0) };
                worst = worst.max((v - want).norm());
            }
        }
    }
    Ok(Outcome::measured(worst, ctx.tol.pointwise, ctx.trials, "random points on two edges"))
}

fn poisson_map_policy(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    let g = ctx.g;
    if g.is_finite() {
        return lie_only();
    }
    let cases = ctx.policy_cases();
    let mut worst: f64 = 0.0;
    for case in &cases {
        let map = PointMap::projection(g, &case.resolved);
        for _ in 0..ctx.trials {
            let f = random_cyl(g, case.resolved.n_coarse, 2, 2, 3, rng);
            let h = random_cyl(g, case.resolved.n_coarse, 2, 2, 3, rng);
            let p = PhasePoint::random(g, case.resolved.n_fine, 1.0, rng);
            worst = worst.max(poisson_residual(&map, &f, &h, &p)?);
        }
    }
    Ok(Outcome::measured(worst, ctx.tol.poisson, ctx.trials * cases.len(), labels(&cases)))
}

fn poisson_map_c_half(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    let g = ctx.g;
    match g.kind() {
        BackendKind::Finite(_) => return lie_only(),
        BackendKind::U1 { .. } => return Ok(Outcome::Skipped("abelian backend: momenta commute and the defect vanishes identically".into())),
        BackendKind::Su2 { .. } => {}
    }
    let cases = ctx.generic_cases();
    let mut worst: f64 = 0.0;
    for case in &cases {
        let map = PointMap::projection(g, &case.resolved);
        for _ in 0..ctx.trials {
            let (x, y) = (g.random_alg(rng, 1.0), g.random_alg(rng, 1.0));
            let nc = case.resolved.n_coarse;
            let p = PhasePoint::random(g, case.resolved.n_fine, 1.0, rng);
            worst = worst.max(poisson_residual(&map, &CylFunction::momentum(g, nc, 0, &x), &CylFunction::momentum(g, nc, 0, &y), &p)?);
        }
    }
    Ok(Outcome::Measured {
        residual: worst,
        tolerance: ctx.tol.poisson,
        margin: Some(ctx.tol.defect_min),
        trials: ctx.trials * cases.len(),
        detail: format!("momentum brackets on {}", labels(&cases)),
    })
}

fn poisson_defect_formula(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    let g = ctx.g;
    if g.is_finite() {
        return lie_only();
    }
    let mut cases: Vec<Case> = vec![canned_split([0.5, 0.5]), canned_split([0.7, 0.3])];
    cases.extend(ctx.sc.cases.iter().filter(|c| c.resolved.pieces[0].len() == 2 && c.resolved.pieces[0].iter().all(|p| p.1 == 1)).cloned());
    let mut worst: f64 = 0.0;
    for case in &cases {
        let r = &case.resolved;
        let map = PointMap::projection(g, r);
        let (t, i) = (r.pieces[0][0].0, r.pieces[0][1].0);
        let c = r.weights[0][1];
        for _ in 0..ctx.trials {
            let (x, y) = (g.random_alg(rng, 1.0), g.random_alg(rng, 1.0));
            let p = PhasePoint::random(g, r.n_fine, 1.0, rng);
            let f = CylFunction::momentum(g, r.n_coarse, 0, &x);
            let h = CylFunction::momentum(g, r.n_coarse, 0, &y);
            let lhs = poisson_bracket_at(&map.pullback(&f)?, &map.pullback(&h)?, &p)?;
            let defect = lhs - map.pullback(&poisson_bracket(&f, &h)?)?.eval(&p)?;
            let rot = g.coad_raw(&p.g[t], &p.theta[i]);
            let xy = g.bracket(&x, &y)?.0;
            let want: f64 = -c * (1.0 - c) * (0..g.dim()).map(|a| (rot[a] - p.theta[t][a]) * xy[a]).sum::<f64>();
            worst = worst.max((defect - C64::new(want, 0.0)).norm());
        }
    }
    Ok(Outcome::measured(worst, ctx.tol.lie, ctx.trials * cases.len(), labels(&cases)))
}

fn poisson_inversion(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    let g = ctx.g;
    if g.is_finite() {
        return lie_only();
    }
    let iota = PointMap::inversion(g, 1);
    let mut worst: f64 = 0.0;
    for _ in 0..ctx.trials {
        let f = random_cyl(g, 1, 2, 2, 3, rng);
        let h = random_cyl(g, 1, 2, 2, 3, rng);
        let p = PhasePoint::random(g, 1, 1.0, rng);
        worst = worst.max(poisson_residual(&iota, &f, &h, &p)?);
    }
    Ok(Outcome::measured(worst, ctx.tol.poisson, ctx.trials, "random degree-2 functions on one edge"))
}

fn poisson_inversion_twist(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    let g = ctx.g;
    if g.is_finite() {
        return lie_only();
    }
    let iota = PointMap::inversion(g, 1);
    let mut worst: f64 = 0.0;
    for _ in 0..ctx.trials {
        let p = PhasePoint::random(g, 1, 1.0, rng);
        let x = g.random_alg(rng, 1.0);
        let pb = iota.pullback(&CylFunction::momentum(g, 1, 0, &x))?.eval(&p)?;
        let want = -CylFunction::momentum(g, 1, 0, &g.ad(&p.g[0], &x)?).eval(&p)?;
        worst = worst.max((pb - want).norm());
    }
    Ok(Outcome::measured(worst, ctx.tol.pointwise, ctx.trials, ""))
}

// ------------------------------------------------------------- projection

fn projection_pullback(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    let g = ctx.g;
    let deg = if g.is_finite() { 0 } else { 2 };
    let cases = ctx.all_cases();
    let mut worst: f64 = 0.0;
    for case in &cases {
        let r = &case.resolved;
        let map = PointMap::projection(g, r);
        for _ in 0..ctx.trials {
            let f = random_cyl(g, r.n_coarse, deg, 2, 4, rng);
            let pb = map.pullback(&f)?;
            let p = PhasePoint::random(g, r.n_fine, 1.0, rng);
            worst = worst.max((pb.eval(&p)? - f.eval(&map.apply(&p)?)?).norm());
        }
    }
    let tol = if g.is_finite() { ctx.tol.pointwise } else { ctx.tol.lie };
    Ok(Outcome::measured(worst, tol, ctx.trials * cases.len(), labels(&cases)))
}

fn projection_transitivity(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    let g = ctx.g;
    let chains = ctx.chains(rng, 4);
    let mut worst: f64 = 0.0;
    for (r1, r2, _) in &chains {
        let comp = compose_resolved(r1, r2);
        let (m1, m2, m) = (PointMap::projection(g, r1), PointMap::projection(g, r2), PointMap::projection(g, &comp));
        for _ in 0..ctx.trials.min(4) {
            let p = PhasePoint::random(g, r2.n_fine, 1.0, rng);
            worst = worst.max(m1.apply(&m2.apply(&p)?)?.distance(g, &m.apply(&p)?));
        }
    }
    let tol = if g.is_finite() { 0.0 } else { ctx.tol.pointwise };
    Ok(Outcome::measured(worst, tol, chains.len() * ctx.trials.min(4), chain_summary(&chains)))
}

fn projection_inversion_square(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    let g = ctx.g;
    let cases = ctx.all_cases();
    let mut worst: f64 = 0.0;
    for case in &cases {
        let r = &case.resolved;
        let (direct, inv) = (PointMap::projection(g, r), PointMap::projection(g, &r.inverted_both()));
        let (ic, ifine) = (PointMap::inversion(g, r.n_coarse), PointMap::inversion(g, r.n_fine));
        for _ in 0..ctx.trials {
            let p = PhasePoint::random(g, r.n_fine, 1.0, rng);
            let a = ic.apply(&direct.apply(&p)?)?;
            let b = inv.apply(&ifine.apply(&p)?)?;
            worst = worst.max(a.distance(g, &b));
        }
    }
    let tol = if g.is_finite() { 0.0 } else { ctx.tol.pointwise };
    Ok(Outcome::measured(worst, tol, ctx.trials * cases.len(), labels(&cases)))
}

fn projection_composed_weights(_ctx: &Ctx, _rng: &mut ChaCha8Rng) -> Res {
    let q = |x: f64| Ratio::<i64>::from_integer(x as i64);
    let as_q = |w: Vec<f64>| w.into_iter().map(q).collect::<Vec<_>>();
    let mut mismatches = 0usize;
    let mut cases = 0usize;
    for policy in [Policy::Left, Policy::Right] {
        let carrier = |m: usize| if policy == Policy::Left { 0 } else { m - 1 };
        for m1 in 1..=3usize {
            for inner_sizes in (0..3usize.pow(m1 as u32)).map(|code| (0..m1).map(|i| code / 3usize.pow(i as u32) % 3 + 1).collect::<Vec<usize>>()) {
                for flips in 0..(1usize << m1) {
                    let signs: Vec<i8> = (0..m1).map(|i| if flips >> i & 1 == 1 { -1 } else { 1 }).collect();
                    if signs[carrier(m1)] < 0 {
                        continue;
                    }
                    let inner: Vec<Vec<Ratio<i64>>> = inner_sizes.iter().map(|&m| as_q(policy_weights(policy, m))).collect();
                    let got = compose_weight_vectors(&as_q(policy_weights(policy, m1)), &signs, &inner);
                    let want = as_q(policy_weights(policy, got.len()));
                    cases += 1;
                    if got != want {
                        mismatches += 1;
                    }
                }
            }
            // inversion reverses a decomposition and swaps the policies
            let mut rev = policy_weights(policy, m1);
            rev.reverse();
            let other = if policy == Policy::Left { Policy::Right } else { Policy::Left };
            cases += 1;
            if as_q(rev) != as_q(policy_weights(other, m1)) {
                mismatches += 1;
            }
        }
    }
    Ok(Outcome::measured(mismatches as f64, 0.0, cases, format!("{cases} compositions in exact rationals; residual counts mismatches")))
}

// --------------------------------------------------------------- morphism

fn morphism_intertwiner(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    if ctx.g.is_finite() {
        return by_arith!(ctx, rng, intertwiner_finite);
    }
    let g = ctx.g;
    let (src, tgt) = (HilbertBasis::new(g, 1, SRC_CUT), HilbertBasis::new(g, 1, SRC_CUT + 1));
    let mut worst: f64 = 0.0;
    for _ in 0..ctx.trials {
        let (f, f2) = (lie_kernel(g, 1, rng), lie_kernel(g, 1, rng));
        worst = worst.max(f.iso_i().iso_i_inv().residual(&f));
        worst = worst.max(f.convolve(Side::Left, &f2)?.iso_i().residual(&f.iso_i().convolve(Side::Right, &f2.iso_i())?));
        worst = worst.max(f.involute(Side::Left).iso_i().residual(&f.iso_i().involute(Side::Right)));
        worst = worst.max((f.iso_i().rho_matrix(Side::Right, &src, &tgt)? - f.rho_matrix(Side::Left, &src, &tgt)?).norm());
    }
    Ok(Outcome::measured(worst, ctx.tol.lie, ctx.trials, "random kernels on one edge"))
}

fn intertwiner_finite<T: Scalar>(ctx: &Ctx, _rng: &mut ChaCha8Rng) -> Res {
    let basis = indicator_basis::<T>(ctx.g, 1)?;
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    for f in &basis {
        worst = worst.max(f.iso_i().rho(Side::Right).max_diff(&f.rho(Side::Left)));
        worst = worst.max(f.involute(Side::Left).iso_i().max_diff(&f.iso_i().involute(Side::Right)));
        worst = worst.max(f.iso_i().iso_i_inv().max_diff(f));
        for side in [Side::Left, Side::Right] {
            worst = worst.max(f.involute(side).rho(side).max_diff(&f.rho(side).adjoint()));
        }
        for f2 in &basis {
            let lhs = f.convolve(Side::Left, f2)?.iso_i();
            let rhs = f.iso_i().convolve(Side::Right, &f2.iso_i())?;
            worst = worst.max(lhs.max_diff(&rhs));
            pairs += 1;
        }
    }
    Ok(Outcome::measured(worst, ctx.finite_tol(), pairs, format!("full indicator basis, {pairs} pairs")))
}

fn morphism_star_homomorphism(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    if ctx.g.is_finite() {
        return by_arith!(ctx, rng, star_finite);
    }
    let g = ctx.g;
    let mut worst: f64 = 0.0;
    for _ in 0..ctx.trials {
        let (f, f2) = (lie_kernel(g, 1, rng), lie_kernel(g, 1, rng));
        for kind in Fundamental::ALL {
            let lhs = f.convolve(Side::Left, &f2)?.fundamental(kind)?;
            worst = worst.max(lhs.residual(&f.fundamental(kind)?.convolve(Side::Left, &f2.fundamental(kind)?)?));
            worst = worst.max(f.involute(Side::Left).fundamental(kind)?.residual(&f.fundamental(kind)?.involute(Side::Left)));
        }
    }
    Ok(Outcome::measured(worst, ctx.tol.lie, ctx.trials, "random kernel pairs, all four morphisms"))
}

/// Groups up to this order are checked on every pair of basis kernels.
const FULL_BASIS_ORDER: usize = 6;

fn star_finite<T: Scalar>(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    let g = ctx.g;
    let full = g.order().unwrap_or(0) <= FULL_BASIS_ORDER;
    let kernels: Vec<DenseKernel<T>> = if full {
        indicator_basis::<T>(g, 1)?
    } else {
        (0..ctx.trials.max(2)).map(|_| DenseKernel::<T>::random(g, 1, 0.3, rng)).collect::<Result<_>>()?
    };
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    for kind in Fundamental::ALL {
        let images: Vec<DenseKernel<T>> = kernels.iter().map(|f| f.fundamental(kind)).collect::<Result<_>>()?;
        for (f, af) in kernels.iter().zip(&images) {
            worst = worst.max(f.involute(Side::Left).fundamental(kind)?.max_diff(&af.involute(Side::Left)));
            for (f2, af2) in kernels.iter().zip(&images) {
                worst = worst.max(f.convolve(Side::Left, f2)?.fundamental(kind)?.max_diff(&af.convolve(Side::Left, af2)?));
                pairs += 1;
            }
        }
    }
    let what = if full { "full indicator basis" } else { "random kernels" };
    Ok(Outcome::measured(worst, ctx.finite_tol(), pairs, format!("{what}, all four morphisms, {pairs} pairs")))
}

fn morphism_injectivity(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    if !ctx.g.is_finite() {
        return Ok(Outcome::Skipped("recovery from the image is implemented in the point basis only".into()));
    }
    by_arith!(ctx, rng, injectivity_finite)
}

fn injectivity_finite<T: Scalar>(ctx: &Ctx, _rng: &mut ChaCha8Rng) -> Res {
    let basis = indicator_basis::<T>(ctx.g, 1)?;
    let mut worst: f64 = 0.0;
    for kind in Fundamental::ALL {
        for f in &basis {
            worst = worst.max(DenseKernel::recover(kind, &f.fundamental(kind)?)?.max_diff(f));
        }
    }
    Ok(Outcome::measured(worst, ctx.finite_tol(), 4 * basis.len(), "each basis kernel is read back from its image"))
}

fn morphism_graph_star(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    if ctx.g.is_finite() {
        return by_arith!(ctx, rng, graph_star_finite);
    }
    let g = ctx.g;
    let cases = ctx.policy_cases();
    let mut worst: f64 = 0.0;
    for case in &cases {
        let r = &case.resolved;
        for _ in 0..ctx.trials {
            let (f, f2) = (lie_kernel(g, r.n_coarse, rng), lie_kernel(g, r.n_coarse, rng));
            let lhs = f.convolve(Side::Left, &f2)?.graph_morphism(r)?;
            worst = worst.max(lhs.residual(&f.graph_morphism(r)?.convolve(Side::Left, &f2.graph_morphism(r)?)?));
            worst = worst.max(f.involute(Side::Left).graph_morphism(r)?.residual(&f.graph_morphism(r)?.involute(Side::Left)));
        }
    }
    Ok(Outcome::measured(worst, ctx.tol.lie, ctx.trials * cases.len(), labels(&cases)))
}

fn graph_star_finite<T: Scalar>(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    let g = ctx.g;
    let cases = ctx.policy_cases();
    let mut worst: f64 = 0.0;
    for case in &cases {
        let r = &case.resolved;
        for _ in 0..ctx.trials {
            let (f, f2) = (DenseKernel::<T>::random(g, r.n_coarse, density(g, r.n_coarse), rng)?, DenseKernel::<T>::random(g, r.n_coarse, density(g, r.n_coarse), rng)?);
            let lhs = f.convolve(Side::Left, &f2)?.graph_morphism(r)?;
            worst = worst.max(lhs.max_diff(&f.graph_morphism(r)?.convolve(Side::Left, &f2.graph_morphism(r)?)?));
            worst = worst.max(f.involute(Side::Left).graph_morphism(r)?.max_diff(&f.graph_morphism(r)?.involute(Side::Left)));
        }
    }
    Ok(Outcome::measured(worst, ctx.finite_tol(), ctx.trials * cases.len(), labels(&cases)))
}

fn morphism_inversion_square(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    let g = ctx.g;
    let cases = ctx.policy_cases();
    let mut worst: f64 = 0.0;
    for case in &cases {
        let (r, ri) = (&case.resolved, case.resolved.inverted_both());
        for _ in 0..ctx.trials {
            worst = worst.max(if g.is_finite() {
                let f = DenseKernel::<Exact>::random(g, r.n_coarse, density(g, r.n_coarse), rng)?;
                if ctx.exact() {
                    f.gamma().graph_morphism(r)?.max_diff(&f.graph_morphism(&ri)?.gamma())
                } else {
                    let f = f.to_c64();
                    f.gamma().graph_morphism(r)?.max_diff(&f.graph_morphism(&ri)?.gamma())
                }
            } else {
                let f = lie_kernel(g, r.n_coarse, rng);
                f.gamma().graph_morphism(r)?.residual(&f.graph_morphism(&ri)?.gamma())
            });
        }
    }
    let tol = if g.is_finite() { ctx.finite_tol() } else { ctx.tol.lie };
    Ok(Outcome::measured(worst, tol, ctx.trials * cases.len(), labels(&cases)))
}

fn morphism_unitaries(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    if ctx.g.is_finite() {
        return by_arith!(ctx, rng, unitaries_finite);
    }
    let g = ctx.g;
    let (src, tgt) = (HilbertBasis::new(g, 2, SRC_CUT), HilbertBasis::new(g, 2, SRC_CUT + 1));
    let mut worst: f64 = 0.0;
    for kind in [UnitaryKind::AlphaL, UnitaryKind::AlphaR] {
        let u = tgt.pullback_matrix(&src, &kind.words())?;
        worst = worst.max((u.adjoint() * &u - DMatrix::<C64>::identity(src.dim(), src.dim())).norm());
    }
    let b1 = HilbertBasis::new(g, 1, g.cutoff());
    let ui = b1.pullback_matrix(&b1, &UnitaryKind::Iota.words())?;
    worst = worst.max((ui.adjoint() * &ui - DMatrix::<C64>::identity(b1.dim(), b1.dim())).norm());
    Ok(Outcome::measured(worst, ctx.tol.pointwise, 3, "isometry of the three unitaries on cutoff spaces"))
}

fn unitaries_finite<T: Scalar>(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    let g = ctx.g;
    let n = g.order().unwrap_or(1);
    let ul = Mat::<T>::pullback(g, 2, 2, &UnitaryKind::AlphaL.words())?;
    let ur = Mat::<T>::pullback(g, 2, 2, &UnitaryKind::AlphaR.words())?;
    let ui = Mat::<T>::pullback(g, 1, 1, &UnitaryKind::Iota.words())?;
    let mut worst: f64 = 0.0;
    for u in [&ul, &ur, &ui] {
        worst = worst.max(u.adjoint().mul(u).max_diff(&Mat::identity(u.rows)));
    }
    let one = Mat::<T>::identity(n);
    for _ in 0..ctx.trials {
        let f = DenseKernel::<T>::random(g, 1, 0.3, rng)?;
        let rf = f.rho(Side::Left);
        let img = |k: Fundamental| -> Result<Mat<T>> { Ok(f.fundamental(k)?.rho(Side::Left)) };
        worst = worst.max(img(Fundamental::AlphaL)?.max_diff(&ul.mul(&rf.kron(&one)).mul(&ul.adjoint())));
        worst = worst.max(img(Fundamental::AlphaR)?.max_diff(&ur.mul(&one.kron(&rf)).mul(&ur.adjoint())));
        worst = worst.max(img(Fundamental::GammaInv)?.max_diff(&ui.mul(&rf).mul(&ui.adjoint())));
        worst = worst.max(img(Fundamental::Eta)?.max_diff(&rf.kron(&one)));
    }
    Ok(Outcome::measured(worst, ctx.finite_tol(), ctx.trials, "permutation unitaries in the point basis"))
}

// --------------------------------------------------------- representation

fn rep_homomorphism(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    if ctx.g.is_finite() {
        return by_arith!(ctx, rng, rep_hom_finite);
    }
    let g = ctx.g;
    let (b1, b2, b3) = (HilbertBasis::new(g, 1, 1), HilbertBasis::new(g, 1, 2), HilbertBasis::new(g, 1, 3));
    let mut worst: f64 = 0.0;
    for _ in 0..ctx.trials {
        let (f, f2) = (lie_kernel(g, 1, rng), lie_kernel(g, 1, rng));
        for side in [Side::Left, Side::Right] {
            let prod = f.rho_matrix(side, &b2, &b3)? * f2.rho_matrix(side, &b1, &b2)?;
            worst = worst.max((prod - f.convolve(side, &f2)?.rho_matrix(side, &b1, &b3)?).norm());
            let m = f.rho_matrix(side, &b1, &b2)?;
            let top = f.involute(side).rho_matrix(side, &b2, &b3)?.view((0, 0), (b1.dim(), b2.dim())).into_owned();
            worst = worst.max((m.adjoint() - top).norm());
        }
    }
    Ok(Outcome::measured(worst, ctx.tol.lie, ctx.trials, "cutoff 1 -> 2 -> 3 on one edge"))
}

fn rep_hom_finite<T: Scalar>(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    let g = ctx.g;
    let edges = if g.order().unwrap_or(1) <= 8 { 2 } else { 1 };
    let mut worst: f64 = 0.0;
    for _ in 0..ctx.trials {
        let (f, f2) = (DenseKernel::<T>::random(g, edges, 0.05, rng)?, DenseKernel::<T>::random(g, edges, 0.05, rng)?);
        for side in [Side::Left, Side::Right] {
            worst = worst.max(f.convolve(side, &f2)?.rho(side).max_diff(&f.rho(side).mul(&f2.rho(side))));
            worst = worst.max(f.involute(side).rho(side).max_diff(&f.rho(side).adjoint()));
        }
    }
    Ok(Outcome::measured(worst, ctx.finite_tol(), ctx.trials, format!("random kernels on {edges} edges")))
}

fn rep_refinement_isometry(ctx: &Ctx, _rng: &mut ChaCha8Rng) -> Res {
    let g = ctx.g;
    let cases = ctx.all_cases();
    let mut worst: f64 = 0.0;
    for case in &cases {
        let r = &case.resolved;
        worst = worst.max(if g.is_finite() {
            if ctx.exact() {
                isometry_defect_dense(g, &refinement_isometry_dense::<Exact>(g, r)?, r)
            } else {
                isometry_defect_dense(g, &refinement_isometry_dense::<C64>(g, r)?, r)
            }
        } else {
            let (src, tgt) = (HilbertBasis::new(g, r.n_coarse, SRC_CUT), HilbertBasis::new(g, r.n_fine, SRC_CUT));
            if let Some(s) = too_big(&[tgt.dim()]) {
                return Ok(s);
            }
            isometry_defect_lie(&refinement_isometry_lie(r, &src, &tgt)?)
        });
    }
    let tol = if g.is_finite() { ctx.finite_tol() } else { ctx.tol.pointwise };
    Ok(Outcome::measured(worst, tol, cases.len(), labels(&cases)))
}

fn rep_refinement_covariance(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    if ctx.g.is_finite() {
        return by_arith!(ctx, rng, covariance_finite);
    }
    let g = ctx.g;
    let cases: Vec<Case> = ctx.policy_cases().into_iter().filter(|c| too_big(&[HilbertBasis::new(g, c.resolved.n_fine, g.cutoff()).dim()]).is_none()).collect();
    if cases.is_empty() {
        return Ok(Outcome::Skipped(format!("every fine space at cutoff {} exceeds dimension {MAX_LIE_DIM}", g.cutoff())));
    }
    let mut worst: f64 = 0.0;
    for case in &cases {
        let r = &case.resolved;
        let (src, tgt) = (HilbertBasis::new(g, r.n_coarse, SRC_CUT), HilbertBasis::new(g, r.n_coarse, g.cutoff()));
        for _ in 0..ctx.trials.min(4) {
            let f = lie_kernel(g, r.n_coarse, rng);
            worst = worst.max(covariance_defect_lie(r, &f, Side::Left, &src, &tgt)?);
        }
    }
    Ok(Outcome::measured(worst, ctx.tol.lie, ctx.trials.min(4) * cases.len(), format!("{}; fine target cutoff {}", labels(&cases), g.cutoff())))
}

fn covariance_finite<T: Scalar>(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    let g = ctx.g;
    let cases = ctx.policy_cases();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for case in &cases {
        let r = &case.resolved;
        let kernels: Vec<DenseKernel<T>> = if r.n_coarse == 1 {
            indicator_basis::<T>(g, 1)?
        } else {
            (0..ctx.trials).map(|_| DenseKernel::<T>::random(g, r.n_coarse, 0.1, rng)).collect::<Result<_>>()?
        };
        for f in &kernels {
            worst = worst.max(covariance_defect_dense(g, r, f, Side::Left)?);
        }
        count += kernels.len();
    }
    Ok(Outcome::measured(worst, ctx.finite_tol(), count, format!("{}; indicator basis on one-edge coarse graphs", labels(&cases))))
}

fn rep_isometry_composition(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    let g = ctx.g;
    let chains = ctx.chains(rng, 3);
    let mut worst: f64 = 0.0;
    for (r1, r2, _) in &chains {
        let comp = compose_resolved(r1, r2);
        worst = worst.max(if g.is_finite() {
            let u = |r: &Resolved| refinement_isometry_dense::<Exact>(g, r);
            let d = u(&comp)?.max_diff(&u(r2)?.mul(&u(r1)?));
            if ctx.exact() {
                d
            } else {
                let u = |r: &Resolved| refinement_isometry_dense::<C64>(g, r);
                u(&comp)?.max_diff(&u(r2)?.mul(&u(r1)?))
            }
        } else {
            let b = |n: usize| HilbertBasis::new(g, n, SRC_CUT);
            let (b0, b1, b2) = (b(r1.n_coarse), b(r1.n_fine), b(r2.n_fine));
            if let Some(s) = too_big(&[b2.dim()]) {
                return Ok(s);
            }
            let two = refinement_isometry_lie(r2, &b1, &b2)? * refinement_isometry_lie(r1, &b0, &b1)?;
            (refinement_isometry_lie(&comp, &b0, &b2)? - two).norm()
        });
    }
    let tol = if g.is_finite() { ctx.finite_tol() } else { ctx.tol.pointwise };
    Ok(Outcome::measured(worst, tol, chains.len(), chain_summary(&chains)))
}

fn rep_inversion_symmetry(ctx: &Ctx, _rng: &mut ChaCha8Rng) -> Res {
    let g = ctx.g;
    let cases = ctx.all_cases();
    let mut worst: f64 = 0.0;
    for case in &cases {
        let r = &case.resolved;
        worst = worst.max(if g.is_finite() {
            if ctx.exact() {
                inversion_symmetry_defect_dense::<Exact>(g, r)?
            } else {
                inversion_symmetry_defect_dense::<C64>(g, r)?
            }
        } else {
            inversion_symmetry_defect_lie(r, &HilbertBasis::new(g, r.n_coarse, SRC_CUT))?
        });
    }
    let tol = if g.is_finite() { ctx.finite_tol() } else { ctx.tol.pointwise };
    Ok(Outcome::measured(worst, tol, cases.len(), labels(&cases)))
}

// ----------------------------------------------------------- quantization

fn quant_covariance(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    let g = ctx.g;
    if g.is_finite() {
        return lie_only();
    }
    let u1 = matches!(g.kind(), BackendKind::U1 { .. });
    let orderings: &[Ordering] = if u1 { &[Ordering::Weyl, Ordering::KohnNirenberg] } else { &[Ordering::Weyl] };
    let cases = ctx.policy_cases();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for case in &cases {
        let r = &case.resolved;
        let src = HilbertBasis::new(g, r.n_coarse, SRC_CUT);
        for &eps in &ctx.sc.file.eps {
            for _ in 0..ctx.trials.min(4) {
                let sigma = random_cyl(g, r.n_coarse, symbol_degree(g), 1, 3, rng);
                for &o in orderings {
                    let res = covariance_residuals(r, &sigma, eps, o, &src)?;
                    worst = worst.max(res.direct.abs()).max(res.inverted.abs());
                    count += 1;
                }
            }
        }
    }
    let tol = if u1 { ctx.tol.pointwise } else { ctx.tol.lie };
    Ok(Outcome::measured(worst, tol, count, labels(&cases)))
}

fn mode_index(b: &HilbertBasis, k: i32) -> Option<usize> {
    b.local.iter().position(|l| l.0 == Irrep::Mode(k))
}

fn u1_symbol(g: &Group, m: usize, n: i32) -> CylFunction {
    let mut f = CylFunction::entry(g, 1, 0, Entry::mode(n));
    for _ in 0..m {
        f = f.mul(&CylFunction::theta(g, 1, 0, 0));
    }
    f
}

fn dyadic(eps: f64) -> Option<Ratio<i64>> {
    (0..20).find(|k| (eps * (1u64 << k) as f64).fract() == 0.0).map(|k| Ratio::new((eps * (1u64 << k) as f64) as i64, 1i64 << k))
}

fn quant_kernel_formula(ctx: &Ctx, _rng: &mut ChaCha8Rng) -> Res {
    let g = ctx.g;
    if !matches!(g.kind(), BackendKind::U1 { .. }) {
        return Ok(Outcome::Skipped("the kernel formula is stated on U(1)".into()));
    }
    let (src, tgt) = (HilbertBasis::new(g, 1, SRC_CUT), HilbertBasis::new(g, 1, g.cutoff()));
    let mut worst: f64 = 0.0;
    let mut count = 0;
    let mut all_dyadic = true;
    for &eps in &ctx.sc.file.eps {
        let q = dyadic(eps);
        all_dyadic &= q.is_some();
        for m in 0..=3u32 {
            for n in -2..=2i32 {
                let op = weyl_quantize(&u1_symbol(g, m as usize, n), eps, Ordering::Weyl, &src, &tgt)?;
                for k in -(SRC_CUT as i32)..=SRC_CUT as i32 {
                    let (j, i) = (mode_index(&src, k).expect("source mode"), mode_index(&tgt, k + n).expect("cutoff covers the shift"));
                    let want = match q {
                        Some(q) => u1_kernel_formula_exact(m, n, k, q),
                        None => u1_kernel_formula_exact(m, n, k, Ratio::approximate_float(eps).unwrap_or_default()),
                    };
                    let f = |r: &Ratio<i64>| *r.numer() as f64 / *r.denom() as f64;
                    worst = worst.max((op[(i, j)] - C64::new(f(&want.re), f(&want.im))).norm());
                    // nothing outside the shifted mode
                    let off: f64 = op.column(j).iter().enumerate().filter(|(row, _)| *row != i).map(|(_, x)| x.norm()).fold(0.0, f64::max);
                    worst = worst.max(off);
                    count += 1;
                }
            }
        }
    }
    let tol = if all_dyadic { 0.0 } else { ctx.tol.pointwise };
    Ok(Outcome::measured(worst, tol, count, if all_dyadic { "dyadic eps: exact comparison" } else { "non-dyadic eps: compared in floating point" }))
}

fn quant_ordering_gap(ctx: &Ctx, _rng: &mut ChaCha8Rng) -> Res {
    let g = ctx.g;
    if !matches!(g.kind(), BackendKind::U1 { .. }) {
        return Ok(Outcome::Skipped("Kohn-Nirenberg ordering is provided on U(1) only".into()));
    }
    let (src, tgt) = (HilbertBasis::new(g, 1, SRC_CUT), HilbertBasis::new(g, 1, g.cutoff()));
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for &eps in &ctx.sc.file.eps {
        for n in -2..=2i32 {
            let sigma = u1_symbol(g, 1, n);
            let gap = weyl_quantize(&sigma, eps, Ordering::Weyl, &src, &tgt)? - weyl_quantize(&sigma, eps, Ordering::KohnNirenberg, &src, &tgt)?;
            let mut want = DMatrix::<C64>::zeros(tgt.dim(), src.dim());
            for k in -(SRC_CUT as i32)..=SRC_CUT as i32 {
                want[(mode_index(&tgt, k + n).expect("cutoff covers the shift"), mode_index(&src, k).expect("source mode"))] = C64::new(eps * n as f64 / 2.0, 0.0);
            }
            worst = worst.max((gap - want).camax());
            count += 1;
        }
    }
    let tol = if ctx.sc.file.eps.iter().all(|e| dyadic(*e).is_some()) { 0.0 } else { ctx.tol.pointwise };
    Ok(Outcome::measured(worst, tol, count, "theta e^{iN phi}, N in -2..=2"))
}

fn quant_self_adjoint(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    let g = ctx.g;
    if g.is_finite() {
        return lie_only();
    }
    let b = HilbertBasis::new(g, 1, g.cutoff());
    let mut worst: f64 = 0.0;
    for &eps in &ctx.sc.file.eps {
        for _ in 0..ctx.trials {
            let s = random_cyl(g, 1, symbol_degree(g), 1, 3, rng);
            let real = s.add(&s.conj()).scale(C64::new(0.5, 0.0));
            // the top shell may leave the space; compare on the part that stays
            let small = HilbertBasis::new(g, 1, g.cutoff() - 1);
            let q = weyl_quantize(&real, eps, Ordering::Weyl, &small, &b)?;
            let top = q.view((0, 0), (small.dim(), small.dim())).into_owned();
            worst = worst.max((&top - top.adjoint()).norm());
        }
    }
    Ok(Outcome::measured(worst, ctx.tol.pointwise, ctx.trials * ctx.sc.file.eps.len(), "real part of random symbols"))
}

fn quant_dirac_rule(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    let g = ctx.g;
    if g.is_finite() {
        return lie_only();
    }
    let (b1, b2, b3) = (HilbertBasis::new(g, 1, 1), HilbertBasis::new(g, 1, 2), HilbertBasis::new(g, 1, 3));
    let mut worst: f64 = 0.0;
    for &eps in &ctx.sc.file.eps {
        for _ in 0..ctx.trials {
            let f = random_cyl(g, 1, 0, 1, 3, rng);
            for a in 0..g.dim() {
                let th = CylFunction::theta(g, 1, 0, a);
                let comm = weyl_quantize(&th, eps, Ordering::Weyl, &b2, &b2)? * weyl_quantize(&f, eps, Ordering::Weyl, &b1, &b2)?
                    - weyl_quantize(&f, eps, Ordering::Weyl, &b1, &b2)? * weyl_quantize(&th, eps, Ordering::Weyl, &b1, &b1)?;
                let rf = weyl_quantize(&f.right_derivative(0, a)?, eps, Ordering::Weyl, &b1, &b3)?;
                let rf = rf.view((0, 0), (b2.dim(), b1.dim())).into_owned() * C64::new(0.0, -eps);
                worst = worst.max((comm - rf).norm());
            }
        }
    }
    Ok(Outcome::measured(worst, ctx.tol.pointwise, ctx.trials * ctx.sc.file.eps.len(), "theta-linear momenta against weight-1 functions"))
}

// ------------------------------------------------------------------ gauge

fn gauge_action_property(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    let g = ctx.g;
    let graphs = ctx.graphs();
    let mut worst: f64 = 0.0;
    for gr in &graphs {
        let n = gr.edges.len();
        for _ in 0..ctx.trials.min(4) {
            let (l1, l2) = (GaugeAssignment::random(g, gr, rng), GaugeAssignment::random(g, gr, rng));
            let l12 = l1.compose(g, &l2)?;
            let p = PhasePoint::random(g, n, 1.0, rng);
            let twice = gauge_act_point(g, gr, &l1, &gauge_act_point(g, gr, &l2, &p)?)?;
            worst = worst.max(twice.distance(g, &gauge_act_point(g, gr, &l12, &p)?));
            worst = worst.max(gauge_act_point(g, gr, &GaugeAssignment::identity(g, gr), &p)?.distance(g, &p));
            if g.is_finite() {
                if ctx.exact() {
                    worst = worst.max(finite_action::<Exact>(g, gr, &l1, &l2, &l12, rng)?);
                } else {
                    worst = worst.max(finite_action::<C64>(g, gr, &l1, &l2, &l12, rng)?);
                }
            } else if n <= 2 {
                let b = HilbertBasis::new(g, n, SRC_CUT);
                let (u1, u2, u12) = (gauge_unitary_lie(&b, gr, &l1)?, gauge_unitary_lie(&b, gr, &l2)?, gauge_unitary_lie(&b, gr, &l12)?);
                worst = worst.max((&u1 * &u2 - &u12).norm());
                worst = worst.max((u12.adjoint() * &u12 - DMatrix::<C64>::identity(b.dim(), b.dim())).norm());
                let k = lie_kernel(g, n, rng);
                let twice = gauge_act_lie(gr, &l1, &gauge_act_lie(gr, &l2, &k)?)?;
                worst = worst.max(twice.residual(&gauge_act_lie(gr, &l12, &k)?));
            }
        }
    }
    let tol = if g.is_finite() { ctx.finite_tol() } else { ctx.tol.pointwise };
    Ok(Outcome::measured(worst, tol, graphs.len() * ctx.trials.min(4), format!("{} graphs", graphs.len())))
}

fn finite_action<T: Scalar>(
    g: &Group,
    gr: &StructuredGraph,
    l1: &GaugeAssignment,
    l2: &GaugeAssignment,
    l12: &GaugeAssignment,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let u = |l: &GaugeAssignment| gauge_unitary_dense::<T>(g, gr, l);
    let mut worst = u(l1)?.mul(&u(l2)?).max_diff(&u(l12)?);
    let k = DenseKernel::<T>::random(g, gr.edges.len(), density(g, gr.edges.len()), rng)?;
    let twice = gauge_act_dense(gr, l1, &gauge_act_dense(gr, l2, &k)?)?;
    worst = worst.max(twice.max_diff(&gauge_act_dense(gr, l12, &k)?));
    Ok(worst)
}

fn gauge_unitary_automorphism(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    if ctx.g.is_finite() {
        return by_arith!(ctx, rng, automorphism_finite);
    }
    let g = ctx.g;
    let graphs: Vec<StructuredGraph> = ctx.graphs().into_iter().filter(|gr| gr.edges.len() <= 2).collect();
    let mut worst: f64 = 0.0;
    for gr in &graphs {
        let n = gr.edges.len();
        let (src, tgt) = (HilbertBasis::new(g, n, SRC_CUT), HilbertBasis::new(g, n, SRC_CUT + 1));
        for _ in 0..ctx.trials.min(4) {
            let lam = GaugeAssignment::random(g, gr, rng);
            let k = lie_kernel(g, n, rng);
            let lhs = gauge_act_lie(gr, &lam, &k)?.rho_matrix(Side::Left, &src, &tgt)?;
            let rhs = gauge_unitary_lie(&tgt, gr, &lam)? * k.rho_matrix(Side::Left, &src, &tgt)? * gauge_unitary_lie(&src, gr, &lam)?.adjoint();
            worst = worst.max((lhs - rhs).norm());
        }
    }
    Ok(Outcome::measured(worst, ctx.tol.lie, graphs.len() * ctx.trials.min(4), format!("{} graphs with at most two edges", graphs.len())))
}

fn automorphism_finite<T: Scalar>(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    let g = ctx.g;
    let graphs = ctx.graphs();
    let mut worst: f64 = 0.0;
    for gr in &graphs {
        let n = gr.edges.len();
        for _ in 0..ctx.trials.min(4) {
            let lam = GaugeAssignment::random(g, gr, rng);
            let u = gauge_unitary_dense::<T>(g, gr, &lam)?;
            let (a, b) = (DenseKernel::<T>::random(g, n, density(g, n), rng)?, DenseKernel::<T>::random(g, n, density(g, n), rng)?);
            let act = |x: &DenseKernel<T>| gauge_act_dense(gr, &lam, x);
            worst = worst.max(act(&a)?.rho(Side::Left).max_diff(&u.mul(&a.rho(Side::Left)).mul(&u.adjoint())));
            worst = worst.max(act(&a.convolve(Side::Left, &b)?)?.max_diff(&act(&a)?.convolve(Side::Left, &act(&b)?)?));
            worst = worst.max(act(&a.involute(Side::Left))?.max_diff(&act(&a)?.involute(Side::Left)));
        }
    }
    Ok(Outcome::measured(worst, ctx.finite_tol(), graphs.len() * ctx.trials.min(4), format!("{} graphs", graphs.len())))
}

fn gauge_projection_square(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    let g = ctx.g;
    let cases = ctx.all_cases();
    let mut worst: f64 = 0.0;
    for case in &cases {
        for _ in 0..ctx.trials.min(4) {
            let lam = GaugeAssignment::random(g, &case.fine, rng);
            let pts: Vec<PhasePoint> = (0..5).map(|_| PhasePoint::random(g, case.resolved.n_fine, 1.0, rng)).collect();
            worst = worst.max(projection_square_residual(g, &case.resolved, &case.coarse, &case.fine, &lam, &pts)?);
        }
    }
    let tol = if g.is_finite() { 0.0 } else { ctx.tol.pointwise };
    Ok(Outcome::measured(worst, tol, cases.len() * ctx.trials.min(4) * 5, labels(&cases)))
}

fn gaussian_round(z: C64) -> Option<C64> {
    let r = C64::new(z.re.round(), z.im.round());
    ((z - r).norm() < 1e-9).then_some(r)
}

fn gauge_wilson_loop(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    let g = ctx.g;
    let mut targets: Vec<(StructuredGraph, usize)> = Vec::new();
    for gr in &ctx.sc.file.graphs {
        for (i, e) in gr.edges.iter().enumerate() {
            if e.source == e.target {
                targets.push((gr.clone(), i));
            }
        }
    }
    let canned = StructuredGraph {
        id: "loop".into(),
        vertices: vec!["v".into(), "w".into()],
        edges: vec![
            Edge { id: "l".into(), source: "v".into(), target: "v".into(), chain: vec![("s_l".into(), 1)] },
            Edge { id: "x".into(), source: "v".into(), target: "w".into(), chain: vec![("s_x".into(), 1)] },
        ],
    };
    targets.push((canned, 0));
    let irreps: Vec<Irrep> = if g.is_finite() { g.irrep_table().into_iter().map(|x| x.0).collect() } else { irreps_upto(g, g.cutoff()) };
    let mut worst: f64 = 0.0;
    for (gr, e) in &targets {
        let n = gr.edges.len();
        for &irrep in &irreps {
            let f = CylFunction::character(g, n, *e, irrep);
            for _ in 0..ctx.trials.min(4) {
                let lam = GaugeAssignment::random(g, gr, rng);
                let p = PhasePoint::random(g, n, 1.0, rng);
                let (a, b) = (f.eval(&gauge_act_point(g, gr, &lam, &p)?)?, f.eval(&p)?);
                // finite characters are Gaussian integers, so rounding is exact
                let d = match (g.is_finite(), gaussian_round(a), gaussian_round(b)) {
                    (true, Some(x), Some(y)) => (x - y).norm(),
                    _ => (a - b).norm(),
                };
                worst = worst.max(d);
            }
        }
    }
    let tol = if g.is_finite() { 0.0 } else { ctx.tol.pointwise };
    Ok(Outcome::measured(worst, tol, targets.len() * irreps.len() * ctx.trials.min(4), format!("{} loops, {} irreps", targets.len(), irreps.len())))
}

fn gauge_momentum_transform(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    let g = ctx.g;
    if g.is_finite() {
        return lie_only();
    }
    let graphs = ctx.graphs();
    let mut worst: f64 = 0.0;
    for gr in &graphs {
        let n = gr.edges.len();
        for _ in 0..ctx.trials.min(4) {
            let lam = GaugeAssignment::random(g, gr, rng);
            let x = g.random_alg(rng, 1.0);
            for (e, edge) in gr.edges.iter().enumerate() {
                let pulled = gauge_pullback(g, gr, &lam, &CylFunction::momentum(g, n, e, &x))?;
                let want = CylFunction::momentum(g, n, e, &g.ad(&g.inv(&lam.values[&edge.target]), &x)?);
                let p = PhasePoint::random(g, n, 1.0, rng);
                worst = worst.max((pulled.eval(&p)? - want.eval(&p)?).norm());
            }
        }
    }
    Ok(Outcome::measured(worst, ctx.tol.pointwise, graphs.len() * ctx.trials.min(4), format!("{} graphs", graphs.len())))
}

fn gauge_symbol(g: &Group, n: usize, rng: &mut ChaCha8Rng) -> CylFunction {
    // an entry term keeps the symbol from being gauge invariant by accident
    random_cyl(g, n, symbol_degree(g), 1, 3, rng).add(&CylFunction::entry(g, n, 0, Entry::new(first_irrep(g), 0, 0)))
}

fn gauge_quantization_covariance(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    let g = ctx.g;
    if g.is_finite() {
        return lie_only();
    }
    let graphs: Vec<StructuredGraph> = ctx.graphs().into_iter().filter(|gr| gr.edges.len() <= 2).collect();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for gr in &graphs {
        let n = gr.edges.len();
        let (src, tgt) = (HilbertBasis::new(g, n, SRC_CUT), HilbertBasis::new(g, n, SRC_CUT + 1));
        for &eps in &ctx.sc.file.eps {
            for _ in 0..ctx.trials.min(3) {
                let lam = GaugeAssignment::random(g, gr, rng);
                worst = worst.max(quantization_gauge_residual(gr, &lam, &gauge_symbol(g, n, rng), eps, Ordering::Weyl, &src, &tgt)?);
                count += 1;
            }
        }
    }
    Ok(Outcome::measured(worst, ctx.tol.lie, count, format!("{} graphs with at most two edges", graphs.len())))
}

/// Target cutoff of the prism: SU(2) fine images conjugate by holonomies
/// and need one more shell.
fn prism_cut(g: &Group) -> u32 {
    if matches!(g.kind(), BackendKind::Su2 { .. }) {
        SRC_CUT + 2
    } else {
        SRC_CUT + 1
    }
}

fn gauge_prism(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    let g = ctx.g;
    if g.is_finite() {
        return lie_only();
    }
    let cases: Vec<Case> = ctx.policy_cases().into_iter().filter(|c| c.resolved.n_fine <= 2).collect();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for case in &cases {
        for &eps in &ctx.sc.file.eps {
            for _ in 0..ctx.trials.min(3) {
                let lam = GaugeAssignment::random(g, &case.fine, rng);
                let sigma = random_cyl(g, case.resolved.n_coarse, symbol_degree(g), 1, 3, rng);
                worst = worst.max(prism_residual(&case.resolved, &case.coarse, &case.fine, &lam, &sigma, eps, Ordering::Weyl, SRC_CUT, prism_cut(g))?);
                count += 1;
            }
        }
    }
    Ok(Outcome::measured(worst, ctx.tol.lie, count, format!("{}; fine graphs with at most two edges", labels(&cases))))
}

// ----------------------------------------------------------------- states

fn edge_counts(ctx: &Ctx) -> Vec<usize> {
    let mut n: Vec<usize> = ctx.graphs().iter().map(|g| g.edges.len()).collect();
    n.sort_unstable();
    n.dedup();
    n
}

fn state_haar_normalized(ctx: &Ctx, _rng: &mut ChaCha8Rng) -> Res {
    let g = ctx.g;
    let mut worst: f64 = 0.0;
    let counts = edge_counts(ctx);
    for &n in &counts {
        worst = worst.max(if g.is_finite() {
            if ctx.exact() {
                (haar_dense(&DenseKernel::<Exact>::delta(g, n)?) - <Exact as Scalar>::one()).norm()
            } else {
                (haar_dense(&DenseKernel::<C64>::delta(g, n)?) - C64::new(1.0, 0.0)).norm()
            }
        } else {
            (haar_lie(&LieKernel::delta(g, n)) - C64::new(1.0, 0.0)).norm()
        });
    }
    let tol = if g.is_finite() { ctx.finite_tol() } else { ctx.tol.pointwise };
    Ok(Outcome::measured(worst, tol, counts.len(), "unit kernel on every graph size"))
}

fn state_haar_positive(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    let g = ctx.g;
    let mut worst: f64 = 0.0;
    for _ in 0..ctx.trials {
        let w = if g.is_finite() {
            if ctx.exact() {
                let f = DenseKernel::<Exact>::random(g, 1, 0.5, rng)?;
                haar_dense(&f.involute(Side::Left).convolve(Side::Left, &f)?).to_c64()
            } else {
                let f = DenseKernel::<C64>::random(g, 1, 0.5, rng)?;
                haar_dense(&f.involute(Side::Left).convolve(Side::Left, &f)?)
            }
        } else {
            let f = lie_kernel(g, 1, rng);
            haar_lie(&f.involute(Side::Left).convolve(Side::Left, &f)?)
        };
        worst = worst.max(w.im.abs()).max(-w.re);
    }
    let tol = if g.is_finite() { ctx.finite_tol() } else { ctx.tol.pointwise };
    Ok(Outcome::measured(worst, tol, ctx.trials, "residual is max(|Im w|, -Re w) for w = omega(F* F)"))
}

fn state_haar_consistency(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    if ctx.g.is_finite() {
        return by_arith!(ctx, rng, haar_consistency_finite);
    }
    let g = ctx.g;
    let cases = ctx.policy_cases();
    let mut worst: f64 = 0.0;
    for case in &cases {
        for _ in 0..ctx.trials {
            let f = lie_kernel(g, case.resolved.n_coarse, rng);
            worst = worst.max((haar_lie(&f) - haar_lie(&f.graph_morphism(&case.resolved)?)).norm());
        }
    }
    Ok(Outcome::measured(worst, ctx.tol.pointwise, ctx.trials * cases.len(), labels(&cases)))
}

fn haar_consistency_finite<T: Scalar>(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    let g = ctx.g;
    let cases = ctx.policy_cases();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for case in &cases {
        let r = &case.resolved;
        let kernels: Vec<DenseKernel<T>> = if r.n_coarse == 1 {
            indicator_basis::<T>(g, 1)?
        } else {
            (0..ctx.trials).map(|_| DenseKernel::<T>::random(g, r.n_coarse, 0.2, rng)).collect::<Result<_>>()?
        };
        for f in &kernels {
            let d = haar_dense(f) - haar_dense(&f.graph_morphism(r)?);
            worst = worst.max(d.norm());
        }
        count += kernels.len();
    }
    Ok(Outcome::measured(worst, ctx.finite_tol(), count, labels(&cases)))
}

fn state_perturbed_control(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    let g = ctx.g;
    let r = canned_split([1.0, 0.0]).resolved;
    let a = 0.5;
    let mut worst: f64 = 0.0;
    let mut count = 0;
    if g.is_finite() {
        // 1 + a Re chi / dim for the first non-trivial irrep
        let (irrep, dim) = g.irrep_table()[1];
        let chi: Vec<f64> = (0..g.order().unwrap_or(1)).map(|x| g.rep(irrep, &g.elem(x)).trace().re / dim as f64).collect();
        let psi = perturbed_vector_dense(&Tuples::new(g, 1)?, 0, &chi, a);
        let coarse = StateFunctional::Vector(psi);
        for f in indicator_basis::<C64>(g, 1)? {
            worst = worst.max(state_consistency_residual_dense(&r, &coarse, &StateFunctional::Haar, &f)?);
            count += 1;
        }
    } else {
        let irrep = first_irrep(g);
        let chi = CylFunction::character(g, 1, 0, irrep);
        let re: Poly = chi.add(&chi.conj()).scale(C64::new(a / (2.0 * g.irrep_dim(irrep) as f64), 0.0)).terms.into_values().next().unwrap_or_default();
        let one: Poly = vec![(C64::new(1.0, 0.0), Vec::<Factor>::new())];
        let src = HilbertBasis::new(g, 1, SRC_CUT);
        let psi = src.project(&crate::group_backend::harmonic::poly_add(&one, &re))?;
        let coarse = StateFunctional::Vector(psi);
        // delta(h) conj(chi(g)) detects the perturbation directly
        let probe = LieKernel::term(g, 1, 1, crate::group_backend::harmonic::poly_relabel(g, &crate::group_backend::harmonic::poly_conj(g, &chi.terms.into_values().next().unwrap_or_default()), |s| s + 1));
        let mut kernels = vec![probe];
        kernels.extend((0..ctx.trials).map(|_| lie_kernel(g, 1, rng)));
        for f in &kernels {
            worst = worst.max(state_consistency_residual_lie(&r, &coarse, &StateFunctional::Haar, f, SRC_CUT)?);
            count += 1;
        }
    }
    Ok(Outcome::Measured {
        residual: worst,
        tolerance: ctx.tol.pointwise,
        margin: Some(ctx.tol.control_min),
        trials: count,
        detail: format!("coarse vector state 1 + {a} Re chi against fine Haar on {}", canned_split([1.0, 0.0]).label),
    })
}

fn state_multiplier_covariance(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    if ctx.g.is_finite() {
        return by_arith!(ctx, rng, multipliers_finite);
    }
    let g = ctx.g;
    let (src, tgt) = (HilbertBasis::new(g, 1, SRC_CUT), HilbertBasis::new(g, 1, SRC_CUT + 1));
    let mut worst: f64 = 0.0;
    for _ in 0..ctx.trials {
        let f: Poly = random_cyl(g, 1, 0, 1, 3, rng).terms.into_values().next().unwrap_or_default();
        let k = vec![g.random(rng)];
        worst = worst.max(multiplier_covariance_defect_lie(&f, &k, &src, &tgt)?);
    }
    Ok(Outcome::measured(worst, ctx.tol.pointwise, ctx.trials, "weight-1 functions, cutoff 1 -> 2"))
}

fn multipliers_finite<T: Scalar>(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Res {
    let g = ctx.g;
    let n = g.order().unwrap_or(1);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for k in 0..n {
        for x in 0..n {
            let f = move |t: &[usize]| if t[0] == x { T::one() } else { T::zero() };
            worst = worst.max(multiplier_covariance_defect_dense(g, &[g.elem(k)], &f)?);
            count += 1;
        }
    }
    let edges = if n <= 8 { 2 } else { 1 };
    let size = n.pow(edges as u32);
    for _ in 0..ctx.trials {
        let vals: Vec<i64> = (0..size).map(|_| rng.random_range(-3..=3)).collect();
        let tup = Tuples::new(g, edges)?;
        let f = |t: &[usize]| T::from_int(vals[tup.encode(t)], 0);
        let k: Vec<GroupElem> = (0..edges).map(|_| g.random(rng)).collect();
        worst = worst.max(multiplier_covariance_defect_dense(g, &k, &f)?);
        count += 1;
    }
    Ok(Outcome::measured(worst, ctx.finite_tol(), count, "indicator functions on one edge and random functions"))
}
