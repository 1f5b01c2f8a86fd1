//! Every module invariant, run over the built-in fixtures.

use std::panic::{catch_unwind, AssertUnwindSafe};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use straticoh_core::chaincomplex::{
    les_of_ses, map_on_cohomology, mapping_cone, ComplexMap, Degree, GradedComplex,
};
use straticoh_core::fixtures::*;
use straticoh_core::flatbundle::{
    build_system, collapse_check, fiber_duality_pairing, global_duality_rank_check, mayer_vietoris_check,
    naturality_check, poincare_lemma_check, realize, realize_structured_classes, structured_complex, BundleError,
    FlatBundleSystem, RealizationKind, Selector,
};
use straticoh_core::hitheory::{
    derham_crosscheck, hi_betti_via_les, hi_complex_isolated, hi_groups, hi_groups_depth1, hi_groups_with_cutoff,
    hi_pairing, pairing_cochain_check, qi_cup_closure_check, DepthOneSpace, IsolatedSingularitySpace, Perversity,
};
use straticoh_core::hodgetrunc::{
    automorphism_action, cotruncate, hodge_decomposition, metric_comparison_iso, truncate_below,
    verify_truncation_ses, InnerProduct,
};
use straticoh_core::ratlinalg::{frac, kernel_basis, rref, Rational, RationalMatrix, Subspace};
use straticoh_core::simplicial::{
    fundamental_cycle, mapping_torus, ordered_product, relative_cochain_complex, Cochain, SimplicialComplex,
    SimplicialMap,
};

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub module: String,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelftestReport {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<CheckResult>,
}

type Outcome = Result<String, String>;
type CheckFn = fn() -> Outcome;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

const SEED: u64 = 0x5eed_2024;

fn random_matrix(rng: &mut ChaCha8Rng) -> RationalMatrix {
    let rows = rng.gen_range(0..6);
    let cols = rng.gen_range(0..6);
    // low-rank products make kernels interesting
    let inner = rng.gen_range(0..5);
    let a = RationalMatrix::from_fn(rows, inner, |_, _| frac(rng.gen_range(-3..4), rng.gen_range(1..3)));
    let b = RationalMatrix::from_fn(inner, cols, |_, _| frac(rng.gen_range(-3..4), 1));
    &a * &b
}

fn random_weights(c: &GradedComplex, rng: &mut ChaCha8Rng) -> InnerProduct {
    let w = c
        .degrees()
        .map(|r| (0..c.dim(r)).map(|_| frac(rng.gen_range(1..9), rng.gen_range(1..5))).collect())
        .collect();
    InnerProduct::new(c, w).expect("positive weights")
}

fn random_cochain(k: &SimplicialComplex, r: usize, rng: &mut ChaCha8Rng) -> Cochain {
    Cochain::new(r, (0..k.count(r)).map(|_| frac(rng.gen_range(-3..4), 1)).collect())
}

fn complexes() -> Vec<(&'static str, SimplicialComplex)> {
    vec![
        ("circle", circle(4)),
        ("S2", sphere2()),
        ("torus", torus()),
        ("klein bottle", klein_bottle()),
        ("disc", disc()),
        ("solid torus", solid_torus()),
        ("T2 x I", torus_interval()),
    ]
}

/// Random weights on large complexes make rational entries grow; those get unit weights.
fn weights_for(c: &GradedComplex, rng: &mut ChaCha8Rng) -> InnerProduct {
    if c.total_dim() > 100 {
        InnerProduct::ones(c)
    } else {
        random_weights(c, rng)
    }
}

fn isolated_spaces() -> Vec<(&'static str, IsolatedSingularitySpace)> {
    [("cone on S2", simplex(3)), ("coned solid torus", solid_torus()), ("suspension of T2", torus_interval())]
        .into_iter()
        .map(|(n, m)| {
            (n, IsolatedSingularitySpace::new(fundamental_cycle(&m).expect("orientable"), None, None).expect("valid space"))
        })
        .collect()
}

fn depth_one_spaces() -> Vec<(&'static str, DepthOneSpace)> {
    let make = |m: SimplicialComplex, sys: FlatBundleSystem| {
        let real = realize(&sys, RealizationKind::Product).expect("product realization");
        DepthOneSpace::new(fundamental_cycle(&m).expect("orientable"), sys, real, None).expect("valid space")
    };
    vec![
        ("S2 x S1", make(solid_torus(), trivial_torus_system())),
        ("S3 x S1 (D3 x S1 exterior)", make(circle_times_ball(), circle_sphere_system())),
    ]
}

fn complementary_pairs() -> [(Perversity, Perversity); 4] {
    [
        (Perversity::Zero, Perversity::Top),
        (Perversity::Top, Perversity::Zero),
        (Perversity::LowerMiddle, Perversity::UpperMiddle),
        (Perversity::UpperMiddle, Perversity::LowerMiddle),
    ]
}

// ratlinalg

fn rank_nullity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for i in 0..200 {
        let m = random_matrix(&mut rng);
        ensure(m.rank() + kernel_basis(&m).dim() == m.cols(), || format!("matrix {}", i))?;
    }
    Ok("200 random matrices".into())
}

fn rank_of_transpose() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    for i in 0..200 {
        let m = random_matrix(&mut rng);
        ensure(m.rank() == m.transpose().rank(), || format!("matrix {}", i))?;
    }
    Ok("200 random matrices".into())
}

fn rref_idempotent() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    for i in 0..200 {
        let once = rref(&random_matrix(&mut rng)).matrix;
        ensure(rref(&once).matrix == once, || format!("matrix {}", i))?;
    }
    Ok("200 random matrices".into())
}

fn subspace_dimension_formula() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    for i in 0..200 {
        let n = rng.gen_range(1..6);
        let span = |rng: &mut ChaCha8Rng| {
            let k = rng.gen_range(0..n + 1);
            Subspace::span(&RationalMatrix::from_fn(n, k, |_, _| frac(rng.gen_range(-2..3), 1)))
        };
        let a = span(&mut rng);
        let b = span(&mut rng);
        let lhs = a.intersection(&b).map_err(err)?.dim() + a.sum(&b).map_err(err)?.dim();
        ensure(lhs == a.dim() + b.dim(), || format!("pair {}", i))?;
    }
    Ok("200 random subspace pairs".into())
}

fn deterministic_pivots() -> Outcome {
    let mut a = ChaCha8Rng::seed_from_u64(SEED + 4);
    let mut b = ChaCha8Rng::seed_from_u64(SEED + 4);
    for i in 0..50 {
        let (x, y) = (random_matrix(&mut a), random_matrix(&mut b));
        let (rx, ry) = (rref(&x), rref(&y));
        ensure(rx.matrix == ry.matrix && rx.pivots == ry.pivots, || format!("matrix {}", i))?;
        ensure(kernel_basis(&x) == kernel_basis(&y), || format!("kernel {}", i))?;
    }
    Ok("50 matrices computed twice".into())
}

// chaincomplex

fn euler_characteristic() -> Outcome {
    for (name, k) in complexes() {
        let c = k.cochain_complex();
        let betti_sum: i64 = c.degrees().map(|r| (if r % 2 == 0 { 1 } else { -1 }) * c.betti_at(r) as i64).sum();
        ensure(c.euler_characteristic() == betti_sum, || name.to_string())?;
    }
    Ok(format!("{} complexes", complexes().len()))
}

fn functoriality() -> Outcome {
    let k = circle(6);
    let maps = [circle_rotation(6, 1), circle_rotation(6, 4), circle_reflection(6)];
    let mut count = 0;
    for f in &maps {
        for g in &maps {
            let (cf, cg) = (f.pullback(&k, &k), g.pullback(&k, &k));
            let composite = cf.then(&cg).map_err(err)?;
            for r in 0..=1 {
                ensure(
                    map_on_cohomology(&composite, r) == &map_on_cohomology(&cg, r) * &map_on_cohomology(&cf, r),
                    || format!("degree {}", r),
                )?;
                count += 1;
            }
        }
    }
    // restriction to the boundary followed by truncation
    let ext = fundamental_cycle(&solid_torus()).map_err(err)?;
    let bc = ext.boundary.sub.cochain_complex();
    let tau = truncate_below(&bc, &InnerProduct::ones(&bc), 2).map_err(err)?;
    let res = ext.boundary.restriction(&ext.complex);
    let composite = res.then(&tau.projection).map_err(err)?;
    for r in 0..=3 {
        ensure(
            map_on_cohomology(&composite, r) == &map_on_cohomology(&tau.projection, r) * &map_on_cohomology(&res, r),
            || format!("restriction, degree {}", r),
        )?;
        count += 1;
    }
    Ok(format!("{} composites", count))
}

fn les_exactness() -> Outcome {
    let mut count = 0;
    for (name, k) in complexes() {
        let Ok(ext) = fundamental_cycle(&k) else { continue };
        if ext.has_boundary() {
            let rel = relative_cochain_complex(&k, &ext.boundary).map_err(err)?;
            let les = les_of_ses(&rel.inclusion, &ext.boundary.restriction(&k), ["H(M,∂M)", "H(M)", "H(∂M)"]).map_err(err)?;
            ensure(les.verify().exact, || format!("pair sequence of {}", name))?;
            count += 1;
        }
        let c = k.cochain_complex();
        let ip = InnerProduct::ones(&c);
        for cut in 0..=k.dim() + 1 {
            let above = cotruncate(&c, &ip, cut).map_err(err)?;
            let below = truncate_below(&c, &ip, cut).map_err(err)?;
            let les = les_of_ses(&above.inclusion, &below.projection, ["τ≥", "C", "τ<"]).map_err(err)?;
            ensure(les.verify().exact, || format!("truncation sequence of {} at {}", name, cut))?;
            count += 1;
        }
    }
    Ok(format!("{} long exact sequences", count))
}

fn cone_of_quasi_isomorphism() -> Outcome {
    let mut maps: Vec<(String, ComplexMap)> = Vec::new();
    for (name, a, b) in [
        ("circle x circle", circle(3), circle(3)),
        ("circle x disc", circle(3), disc()),
        ("circle x S2", circle(3), sphere2()),
    ] {
        let (_, cross) = ordered_product(&a, &b).cross_product_map();
        maps.push((format!("cross product {}", name), cross));
    }
    for d in 1..=3 {
        let s = simplex(d);
        let vertex = s.induced_subcomplex(&[vec![0]]).map_err(err)?;
        maps.push((format!("simplex {} to a vertex", d), vertex.restriction(&s)));
    }
    for (name, f) in &maps {
        ensure(mapping_cone(f).betti().iter().all(|&b| b == 0), || name.clone())?;
    }
    Ok(format!("{} quasi-isomorphisms", maps.len()))
}

// simplicial

fn cup_associative_and_unital() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 5);
    let mut count = 0;
    for (name, k) in [("torus", torus()), ("S2", sphere2()), ("solid torus", solid_torus())] {
        let n = k.dim() as usize;
        for p in 0..=n {
            for q in 0..=n - p {
                for r in 0..=n - p - q {
                    let (a, b, c) = (random_cochain(&k, p, &mut rng), random_cochain(&k, q, &mut rng), random_cochain(&k, r, &mut rng));
                    let left = k.cup(&k.cup(&a, &b).map_err(err)?, &c).map_err(err)?;
                    let right = k.cup(&a, &k.cup(&b, &c).map_err(err)?).map_err(err)?;
                    ensure(left.values == right.values, || format!("{} ({},{},{})", name, p, q, r))?;
                    count += 1;
                }
            }
            let a = random_cochain(&k, p, &mut rng);
            ensure(k.cup(&k.unit(), &a).map_err(err)?.values == a.values, || format!("{} left unit", name))?;
            ensure(k.cup(&a, &k.unit()).map_err(err)?.values == a.values, || format!("{} right unit", name))?;
        }
    }
    Ok(format!("{} triples", count))
}

fn cup_graded_commutative() -> Outcome {
    let mut count = 0;
    for (name, k) in [("torus", torus()), ("S2", sphere2())] {
        let c = k.cochain_complex();
        let n = k.dim();
        for p in 0..=n {
            for q in 0..=n - p {
                let hp = straticoh_core::chaincomplex::cohomology(&c, p);
                let hq = straticoh_core::chaincomplex::cohomology(&c, q);
                let hpq = straticoh_core::chaincomplex::cohomology(&c, p + q);
                for i in 0..hp.betti {
                    for j in 0..hq.betti {
                        let a = Cochain::new(p as usize, hp.representatives().column(i));
                        let b = Cochain::new(q as usize, hq.representatives().column(j));
                        let ab = k.cup(&a, &b).map_err(err)?;
                        let ba = k.cup(&b, &a).map_err(err)?;
                        let sign = if (p * q) % 2 == 0 { Rational::from_integer(1.into()) } else { Rational::from_integer((-1).into()) };
                        let diff: Vec<Rational> = ab.values.iter().zip(&ba.values).map(|(x, y)| x - &(y * &sign)).collect();
                        ensure(hpq.is_coboundary(&diff).map_err(err)?, || format!("{} H{} x H{}", name, p, q))?;
                        count += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{} class pairs", count))
}

fn kunneth() -> Outcome {
    let cases = [
        ("circle x circle", circle(3), circle(3)),
        ("circle x S2", circle(3), sphere2()),
        ("torus x interval", torus(), simplex(1)),
        ("S2 x circle", sphere2(), circle(4)),
    ];
    for (name, a, b) in &cases {
        let prod = ordered_product(a, b);
        let (tensor, cross) = prod.cross_product_map();
        let top = prod.complex.dim();
        for r in 0..=top {
            let h = map_on_cohomology(&cross, r);
            let expected = tensor.complex.betti_at(r);
            ensure(h.rows() == expected && h.cols() == expected && h.rank() == expected, || format!("{} degree {}", name, r))?;
            let convolution: usize = (0..=r).map(|p| a.cochain_complex().betti_at(p) * b.cochain_complex().betti_at(r - p)).sum();
            ensure(prod.complex.cochain_complex().betti_at(r) == convolution, || format!("{} betti {}", name, r))?;
        }
    }
    Ok(format!("{} products", cases.len()))
}

fn mapping_torus_of_identity() -> Outcome {
    for (name, l) in [("point", point()), ("circle", circle(3)), ("S2", sphere2())] {
        let t = mapping_torus(&l, &SimplicialMap::identity(&l), 3).map_err(err)?;
        let p = ordered_product(&circle(3), &l);
        ensure(t.complex.betti() == p.complex.betti(), || name.to_string())?;
    }
    Ok("point, circle, S2".into())
}

fn classical_poincare_duality() -> Outcome {
    for (name, k) in [("circle", circle(4)), ("torus", torus()), ("S2", sphere2())] {
        let o = fundamental_cycle(&k).map_err(err)?;
        let z = o.fundamental_chain();
        let c = k.cochain_complex();
        let n = o.dim as Degree;
        for r in 0..=n {
            let a = straticoh_core::chaincomplex::cohomology(&c, r);
            let b = straticoh_core::chaincomplex::cohomology(&c, n - r);
            let m = RationalMatrix::from_fn(a.betti, b.betti, |i, j| {
                let prod = k
                    .cup(&Cochain::new(r as usize, a.representatives().column(i)), &Cochain::new((n - r) as usize, b.representatives().column(j)))
                    .expect("degrees fit");
                k.evaluate(&prod, &z).expect("top degree")
            });
            ensure(m.rows() == m.cols() && m.rank() == m.rows(), || format!("{} degree {}", name, r))?;
        }
    }
    Ok("circle, torus, S2".into())
}

// hodgetrunc

fn hodge_decomposition_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 6);
    let mut count = 0;
    for (name, k) in complexes() {
        let c = k.cochain_complex();
        for ip in [InnerProduct::ones(&c), weights_for(&c, &mut rng)] {
            for r in c.degrees() {
                let h = hodge_decomposition(&c, &ip, r);
                let parts = [&h.coexact, &h.harmonic, &h.exact];
                for (i, x) in parts.iter().enumerate() {
                    for y in parts.iter().skip(i + 1) {
                        let g = &(&x.basis().transpose() * &ip.gram(r)) * y.basis();
                        ensure(g.is_zero(), || format!("{} degree {} not orthogonal", name, r))?;
                    }
                }
                ensure(h.coexact.dim() + h.harmonic.dim() + h.exact.dim() == c.dim(r), || format!("{} degree {} dimensions", name, r))?;
                ensure(h.harmonic.dim() == c.betti_at(r), || format!("{} degree {} harmonic", name, r))?;
                count += 1;
            }
        }
    }
    Ok(format!("{} decompositions", count))
}

fn truncation_sequences() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 7);
    let mut count = 0;
    for (name, k) in complexes() {
        let c = k.cochain_complex();
        let ip = weights_for(&c, &mut rng);
        for cut in -1..=k.dim() + 2 {
            verify_truncation_ses(&c, &ip, cut).map_err(|e| format!("{} at {}: {}", name, cut, e))?;
            count += 1;
        }
    }
    Ok(format!("{} sequences", count))
}

fn truncation_cohomology() -> Outcome {
    let mut count = 0;
    for (name, k) in complexes() {
        let c = k.cochain_complex();
        let ip = InnerProduct::ones(&c);
        for cut in 0..=k.dim() + 1 {
            let below = truncate_below(&c, &ip, cut).map_err(err)?;
            let above = cotruncate(&c, &ip, cut).map_err(err)?;
            for r in c.degrees() {
                let b = c.betti_at(r);
                let (want_below, want_above) = if r < cut { (b, 0) } else { (0, b) };
                ensure(below.complex().betti_at(r) == want_below, || format!("{} τ<{} degree {}", name, cut, r))?;
                ensure(above.complex.betti_at(r) == want_above, || format!("{} τ≥{} degree {}", name, cut, r))?;
                ensure(map_on_cohomology(&above.inclusion, r).rank() == want_above, || format!("{} inclusion rank {}", name, r))?;
                ensure(map_on_cohomology(&below.projection, r).rank() == want_below, || format!("{} projection rank {}", name, r))?;
                count += 1;
            }
        }
    }
    Ok(format!("{} degree checks", count))
}

fn metric_independence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 8);
    let mut count = 0;
    for (name, k) in [("circle", circle(4)), ("S2", sphere2()), ("torus", torus())] {
        let c = k.cochain_complex();
        let reference = InnerProduct::ones(&c);
        for trial in 0..5 {
            let g = random_weights(&c, &mut rng);
            for cut in 0..=k.dim() + 1 {
                let kappa = metric_comparison_iso(&c, &reference, &g, cut).map_err(err)?;
                ensure(kappa.is_isomorphism(), || format!("{} trial {} cutoff {}", name, trial, cut))?;
                ensure(kappa.source().betti() == kappa.target().betti(), || format!("{} betti", name))?;
                count += 1;
            }
        }
    }
    Ok(format!("{} comparisons", count))
}

fn isometry_invariance() -> Outcome {
    let mut count = 0;
    let k = circle(6);
    let ip = InnerProduct::ones(&k.cochain_complex());
    for f in [circle_rotation(6, 1), circle_rotation(6, 3), circle_reflection(6)] {
        for cut in 0..=2 {
            automorphism_action(&k, &f, &ip, cut).map_err(err)?;
            count += 1;
        }
    }
    let s = sphere2();
    let ip = InnerProduct::ones(&s.cochain_complex());
    for perm in [vec![1, 0, 2, 3], vec![1, 2, 3, 0], vec![3, 2, 1, 0]] {
        let f = SimplicialMap::automorphism(&s, perm).map_err(err)?;
        for cut in 0..=3 {
            automorphism_action(&s, &f, &ip, cut).map_err(err)?;
            count += 1;
        }
    }
    Ok(format!("{} actions", count))
}

// flatbundle

fn bundle_cutoffs(sys: &FlatBundleSystem) -> std::ops::RangeInclusive<Degree> {
    0..=sys.fiber_dim() as Degree + 1
}

fn selectors(sys: &FlatBundleSystem) -> Vec<Selector> {
    let mut v = vec![Selector::Full];
    for k in bundle_cutoffs(sys) {
        v.push(Selector::Below(k));
        v.push(Selector::AtOrAbove(k));
    }
    v
}

fn d_squared_zero() -> Outcome {
    let mut count = 0;
    for (name, sys) in bundle_fixtures() {
        for sel in selectors(&sys) {
            let c = structured_complex(&sys, sel).map_err(err)?.complex;
            for r in c.degrees() {
                ensure((&*c.differential(r + 1) * &*c.differential(r)).is_zero(), || format!("{} {} degree {}", name, sel, r))?;
            }
            count += 1;
        }
    }
    Ok(format!("{} totals", count))
}

fn truncation_naturality() -> Outcome {
    let mut count = 0;
    for (name, sys) in bundle_fixtures() {
        for k in bundle_cutoffs(&sys) {
            let rows = naturality_check(&sys, k).map_err(err)?;
            ensure(rows.iter().all(|r| r.equal), || format!("{} K={}", name, k))?;
            count += 1;
        }
    }
    Ok(format!("{} cutoffs", count))
}

fn realization_oracle() -> Outcome {
    let mut count = 0;
    for (name, sys) in bundle_fixtures() {
        let mut kinds = Vec::new();
        if sys.is_trivial() {
            kinds.push(RealizationKind::Product);
        }
        if sys.base == circle(sys.base.n_vertices()) {
            kinds.push(RealizationKind::MappingTorus);
        }
        for kind in kinds {
            let real = realize(&sys, kind).map_err(err)?;
            let classes = realize_structured_classes(&sys, &real, Selector::Full).map_err(err)?;
            ensure(classes.verified, || format!("{} {:?}", name, kind))?;
            count += 1;
        }
    }
    Ok(format!("{} realizations", count))
}

fn e2_collapse() -> Outcome {
    for (name, sys) in bundle_fixtures() {
        ensure(collapse_check(&sys).map_err(err)?.collapses, || name.to_string())?;
    }
    Ok(format!("{} systems", bundle_fixtures().len()))
}

fn mayer_vietoris() -> Outcome {
    let mut count = 0;
    for (name, sys) in bundle_fixtures() {
        let n = sys.base.n_vertices();
        if sys.base != circle(n) {
            continue;
        }
        let a: Vec<Vec<usize>> = (0..n - 2).map(|i| vec![i, i + 1]).collect();
        let b = vec![vec![n - 2, n - 1], vec![0, n - 1]];
        for sel in selectors(&sys) {
            ensure(mayer_vietoris_check(&sys, &a, &b, sel).map_err(err)?.exact, || format!("{} {}", name, sel))?;
            count += 1;
        }
    }
    Ok(format!("{} sequences", count))
}

fn poincare_lemmas() -> Outcome {
    let mut count = 0;
    for d in 1..=2 {
        for (fname, fiber) in [("circle", circle(3)), ("S2", sphere2()), ("torus", torus())] {
            let sys = build_system(simplex(d), fiber, None, Default::default()).map_err(err)?;
            for sel in selectors(&sys) {
                let r = poincare_lemma_check(&sys, sel).map_err(err)?;
                ensure(r.equal, || format!("{}-simplex, {} fiber, {}", d, fname, sel))?;
                count += 1;
            }
        }
    }
    Ok(format!("{} totals", count))
}

fn fiber_duality() -> Outcome {
    let mut count = 0;
    for (name, fiber) in [("circle", circle(4)), ("S2", sphere2()), ("torus", torus())] {
        let ip = InnerProduct::ones(&fiber.cochain_complex());
        let m = fiber.dim();
        for k in 0..=m + 1 {
            let r = fiber_duality_pairing(&fiber, &ip, k, m + 1 - k).map_err(err)?;
            ensure(r.nondegenerate, || format!("{} K={}", name, k))?;
            count += 1;
        }
    }
    Ok(format!("{} pairings", count))
}

fn global_duality() -> Outcome {
    let mut count = 0;
    for (name, sys) in [
        ("circle x circle", trivial_torus_system()),
        ("circle x S2", circle_sphere_system()),
        ("rotated circle x circle", rotated_torus_system()),
    ] {
        let m = sys.fiber_dim() as Degree;
        for k in 0..=m + 1 {
            ensure(global_duality_rank_check(&sys, k, m + 1 - k).map_err(err)?.holds, || format!("{} K={}", name, k))?;
            count += 1;
        }
    }
    ensure(
        matches!(global_duality_rank_check(&klein_system(), 1, 1), Err(BundleError::OrientationReversing(_))),
        || "klein system is not gated".into(),
    )?;
    Ok(format!("{} rank checks; orientation-reversing monodromy gated", count))
}

fn broken_cocycle_reported() -> Outcome {
    let f = circle_rotation(3, 1);
    match build_system(simplex(2), circle(3), None, [((0, 2), f)].into()) {
        Err(BundleError::Cocycle(t)) => Ok(format!("rejected at triangle {}", t.join("-"))),
        Err(e) => Err(format!("unexpected error: {}", e)),
        Ok(_) => Err("broken cocycle accepted".into()),
    }
}

// hitheory

fn hi_values() -> Outcome {
    let spaces = isolated_spaces();
    let expected: [(usize, Perversity, [usize; 4]); 5] = [
        (0, Perversity::LowerMiddle, [0, 0, 0, 0]),
        (1, Perversity::LowerMiddle, [0, 0, 1, 0]),
        (1, Perversity::UpperMiddle, [0, 1, 0, 0]),
        (2, Perversity::LowerMiddle, [0, 1, 3, 0]),
        (2, Perversity::UpperMiddle, [0, 3, 1, 0]),
    ];
    for (i, p, want) in &expected {
        let (name, s) = &spaces[*i];
        let got = hi_groups(s, p).map_err(err)?.result.betti;
        ensure(got == want, || format!("{} {}: {:?}", name, p, got))?;
    }
    for (name, s) in depth_one_spaces() {
        let got = hi_groups_depth1(&s, &Perversity::LowerMiddle).map_err(err)?.betti;
        ensure(got.iter().all(|&b| b == 0), || format!("{}: {:?}", name, got))?;
    }
    Ok("isolated and depth-one examples".into())
}

fn hi_sequences_exact() -> Outcome {
    let mut count = 0;
    for (name, s) in isolated_spaces() {
        for p in Perversity::presets() {
            ensure(hi_groups(&s, &p).map_err(err)?.result.les_exact, || format!("{} {}", name, p))?;
            count += 1;
        }
    }
    Ok(format!("{} pairs of sequences", count))
}

fn hi_cutoff_consistency() -> Outcome {
    let mut count = 0;
    for (name, s) in isolated_spaces() {
        let n = s.dim() as Degree;
        for c in -1..=n + 1 {
            let direct = hi_groups_with_cutoff(&s, c, None).map_err(err)?.result.betti;
            ensure(hi_betti_via_les(&s, c).map_err(err)? == direct, || format!("{} c={}", name, c))?;
            count += 1;
        }
        let full = hi_groups_with_cutoff(&s, 0, None).map_err(err)?.result.betti;
        ensure(full == s.complex().cochain_complex().betti_range(0, n), || format!("{} c=0", name))?;
        let rel = relative_cochain_complex(s.complex(), s.boundary()).map_err(err)?;
        let top = hi_groups_with_cutoff(&s, n, None).map_err(err)?.result.betti;
        ensure(top == rel.complex.betti_range(0, n), || format!("{} c=n", name))?;
    }
    Ok(format!("{} cutoffs and both endpoints", count))
}

fn pairing_well_defined() -> Outcome {
    let mut pairs = 0;
    for (name, s) in isolated_spaces() {
        for (p, q) in complementary_pairs() {
            let r = pairing_cochain_check(&s, &hi_complex_isolated(&s, &p).map_err(err)?, &hi_complex_isolated(&s, &q).map_err(err)?);
            ensure(r.violations == 0, || format!("{} {}/{}", name, p, q))?;
            pairs += r.pairs_checked;
        }
    }
    Ok(format!("{} cochain pairs", pairs))
}

fn hi_duality() -> Outcome {
    let mut count = 0;
    for (name, s) in isolated_spaces() {
        for (p, q) in complementary_pairs() {
            let r = hi_pairing(&s, &p, &q).map_err(err)?;
            ensure(r.nondegenerate, || format!("{} {}/{}", name, p, q))?;
            count += 1;
        }
    }
    Ok(format!("{} pairings", count))
}

fn hi_cup_closure() -> Outcome {
    let mut pairs = 0;
    for (name, s) in isolated_spaces() {
        for p in Perversity::presets() {
            let r = qi_cup_closure_check(&s, &hi_complex_isolated(&s, &p).map_err(err)?).map_err(err)?;
            ensure(r.closed, || format!("{} {}", name, p))?;
            pairs += r.pairs_checked;
        }
    }
    Ok(format!("{} basis pairs", pairs))
}

fn hi_derham() -> Outcome {
    let mut count = 0;
    for (name, s) in isolated_spaces() {
        for p in Perversity::presets() {
            let r = derham_crosscheck(&s, &p).map_err(err)?;
            ensure(r.equal, || format!("{} {}: {:?} vs {:?}", name, p, r.hi, r.intersection_space_homology))?;
            count += 1;
        }
    }
    Ok(format!("{} comparisons", count))
}

fn point_base_crosscheck() -> Outcome {
    let mut count = 0;
    for (name, iso) in isolated_spaces() {
        let ext = iso.exterior.clone();
        let sys = build_system(point(), ext.boundary.sub.clone(), None, Default::default()).map_err(err)?;
        let real = realize(&sys, RealizationKind::Product).map_err(err)?;
        let to_m = ext.boundary.vertex_map.clone();
        let space = DepthOneSpace::new(ext, sys, real, Some(to_m)).map_err(err)?;
        for p in Perversity::presets() {
            let a = hi_groups_depth1(&space, &p).map_err(err)?.betti;
            let b = hi_groups(&iso, &p).map_err(err)?.result.betti;
            ensure(a == b, || format!("{} {}", name, p))?;
            count += 1;
        }
    }
    Ok(format!("{} comparisons", count))
}

pub fn checks() -> Vec<(&'static str, &'static str, CheckFn)> {
    vec![
        ("ratlinalg", "rank plus nullity equals columns", rank_nullity as CheckFn),
        ("ratlinalg", "rank of transpose", rank_of_transpose),
        ("ratlinalg", "rref is idempotent", rref_idempotent),
        ("ratlinalg", "subspace dimension formula", subspace_dimension_formula),
        ("ratlinalg", "deterministic pivots", deterministic_pivots),
        ("chaincomplex", "Euler characteristic", euler_characteristic),
        ("chaincomplex", "functoriality of induced maps", functoriality),
        ("chaincomplex", "long exact sequences are exact", les_exactness),
        ("chaincomplex", "cone of a quasi-isomorphism is acyclic", cone_of_quasi_isomorphism),
        ("simplicial", "cup is associative and unital", cup_associative_and_unital),
        ("simplicial", "cup is graded-commutative on cohomology", cup_graded_commutative),
        ("simplicial", "cross product is a quasi-isomorphism", kunneth),
        ("simplicial", "mapping torus of the identity", mapping_torus_of_identity),
        ("simplicial", "Poincare duality on closed manifolds", classical_poincare_duality),
        ("hodgetrunc", "Hodge decomposition", hodge_decomposition_check),
        ("hodgetrunc", "truncation short exact sequence", truncation_sequences),
        ("hodgetrunc", "truncation cohomology", truncation_cohomology),
        ("hodgetrunc", "metric independence", metric_independence),
        ("hodgetrunc", "isometries commute with the codifferential", isometry_invariance),
        ("flatbundle", "total differential squares to zero", d_squared_zero),
        ("flatbundle", "naturality of truncation", truncation_naturality),
        ("flatbundle", "structured cohomology equals realized cohomology", realization_oracle),
        ("flatbundle", "E2 collapse", e2_collapse),
        ("flatbundle", "Mayer-Vietoris exactness", mayer_vietoris),
        ("flatbundle", "Poincare lemmas over simplices", poincare_lemmas),
        ("flatbundle", "fiber duality", fiber_duality),
        ("flatbundle", "global duality ranks", global_duality),
        ("flatbundle", "broken cocycle fixture is reported", broken_cocycle_reported),
        ("hitheory", "HI values", hi_values),
        ("hitheory", "both HI sequences exact", hi_sequences_exact),
        ("hitheory", "cutoff consistency and endpoints", hi_cutoff_consistency),
        ("hitheory", "pairing well-defined on cochains", pairing_well_defined),
        ("hitheory", "generalized Poincare duality", hi_duality),
        ("hitheory", "QI closed under cup", hi_cup_closure),
        ("hitheory", "de Rham ranks", hi_derham),
        ("hitheory", "point base reproduces isolated HI", point_base_crosscheck),
    ]
}

fn run_one(module: &str, name: &str, f: CheckFn) -> CheckResult {
    let (passed, detail) = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(d)) => (true, d),
        Ok(Err(d)) => (false, d),
        Err(p) => (
            false,
            format!(
                "panicked: {}",
                p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default()
            ),
        ),
    };
    CheckResult {
        module: module.to_string(),
        name: name.to_string(),
        passed,
        detail,
    }
}

/// Runs every check; the order of results is fixed regardless of threading.
pub fn run_selftest() -> SelftestReport {
    let list = checks();
    let results: Vec<CheckResult> = list.par_iter().map(|&(m, n, f)| run_one(m, n, f)).collect();
    summarize(results)
}

pub fn summarize(checks: Vec<CheckResult>) -> SelftestReport {
    let passed = checks.iter().filter(|c| c.passed).count();
    SelftestReport {
        total: checks.len(),
        passed,
        failed: checks.len() - passed,
        checks,
    }
}
