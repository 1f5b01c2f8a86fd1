//! Discrete Hodge theory, truncation and cotruncation of cochain complexes.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::chaincomplex::{
    subcomplex_from_subspaces, ChainError, ComplexMap, Degree, GradedComplex, Subcomplex,
};
use crate::ratlinalg::{solve, LinAlgError, Rational, RationalMatrix, Subspace};
use crate::simplicial::{Cochain, SimplicialComplex, SimplicialError, SimplicialMap};

#[derive(Debug, thiserror::Error)]
pub enum HodgeError {
    #[error("inner product has {found} weights in degree {degree}, complex has dimension {expected}")]
    DimensionMismatch {
        degree: Degree,
        expected: usize,
        found: usize,
    },
    #[error("weight {index} in degree {degree} is not positive")]
    NonPositiveWeight { degree: Degree, index: usize },
    #[error("map is not an automorphism of the complex")]
    NotAutomorphism,
    #[error("automorphism does not preserve the inner product in degree {degree}")]
    NotIsometry { degree: Degree },
    #[error("automorphism does not commute with the codifferential in degree {degree}")]
    NotCommutingWithAdjoint { degree: Degree },
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
    #[error(transparent)]
    Simplicial(#[from] SimplicialError),
}

/// Positive diagonal weights on the canonical cochain basis, degree by degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InnerProduct {
    lo: Degree,
    weights: Vec<Vec<Rational>>,
}

impl InnerProduct {
    /// All weights one.
    pub fn ones(c: &GradedComplex) -> Self {
        InnerProduct {
            lo: c.lo(),
            weights: c.degrees().map(|r| vec![Rational::one(); c.dim(r)]).collect(),
        }
    }

    /// `weights[i]` belongs to degree `c.lo() + i`.
    pub fn new(c: &GradedComplex, weights: Vec<Vec<Rational>>) -> Result<Self, HodgeError> {
        let ip = InnerProduct { lo: c.lo(), weights };
        ip.validate(c)?;
        Ok(ip)
    }

    pub fn validate(&self, c: &GradedComplex) -> Result<(), HodgeError> {
        for r in c.degrees().chain(self.degrees()) {
            let w = self.weights(r);
            if w.len() != c.dim(r) {
                return Err(HodgeError::DimensionMismatch {
                    degree: r,
                    expected: c.dim(r),
                    found: w.len(),
                });
            }
            if let Some(index) = w.iter().position(|x| !x.is_positive()) {
                return Err(HodgeError::NonPositiveWeight { degree: r, index });
            }
        }
        Ok(())
    }

    fn degrees(&self) -> std::ops::Range<Degree> {
        self.lo..self.lo + self.weights.len() as Degree
    }

    /// Weights in degree `r` (empty outside the window).
    pub fn weights(&self, r: Degree) -> &[Rational] {
        if r < self.lo || (r - self.lo) as usize >= self.weights.len() {
            &[]
        } else {
            &self.weights[(r - self.lo) as usize]
        }
    }

    pub fn gram(&self, r: Degree) -> RationalMatrix {
        let w = self.weights(r);
        let mut m = RationalMatrix::zeros(w.len(), w.len());
        for (i, x) in w.iter().enumerate() {
            m.set(i, i, x.clone());
        }
        m
    }

    pub fn inner(&self, r: Degree, a: &[Rational], b: &[Rational]) -> Rational {
        self.weights(r)
            .iter()
            .zip(a.iter().zip(b))
            .fold(Rational::zero(), |acc, (w, (x, y))| acc + w * x * y)
    }

    /// Multiplies every weight in degree `r` by `factor`.
    pub fn scaled(&self, r: Degree, factor: &Rational) -> Self {
        let mut out = self.clone();
        if let Some(w) = r
            .checked_sub(self.lo)
            .and_then(|i| out.weights.get_mut(i as usize))
        {
            w.iter_mut().for_each(|x| *x *= factor);
        }
        out
    }

    /// Concatenates the weights of several complexes laid out as a direct sum.
    pub fn direct_sum(parts: &[&InnerProduct], lo: Degree, hi: Degree) -> Self {
        InnerProduct {
            lo,
            weights: (lo..=hi)
                .map(|r| parts.iter().flat_map(|p| p.weights(r).iter().cloned()).collect())
                .collect(),
        }
    }
}

/// `d∗: C^r → C^{r−1}`, the adjoint of `d^{r−1}`: `W_{r−1}^{-1} (d^{r−1})ᵀ W_r`.
pub fn codifferential(c: &GradedComplex, ip: &InnerProduct, r: Degree) -> RationalMatrix {
    let d = c.differential(r - 1);
    let mut m = d.transpose();
    let (wl, wr) = (ip.weights(r - 1), ip.weights(r));
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if !m.get(i, j).is_zero() {
                let v = m.get(i, j) * &wr[j] / &wl[i];
                m.set(i, j, v);
            }
        }
    }
    m
}

/// All codifferentials, indexed by source degree `c.lo() ..= c.hi()`.
pub fn adjoint(c: &GradedComplex, ip: &InnerProduct) -> Result<Vec<RationalMatrix>, HodgeError> {
    ip.validate(c)?;
    Ok(c.degrees().map(|r| codifferential(c, ip, r)).collect())
}

/// Orthogonal splitting `C^r = im d∗ ⊕ Harm^r ⊕ im d`.
#[derive(Clone, Debug)]
pub struct HodgeDecomposition {
    pub coexact: Subspace,
    pub harmonic: Subspace,
    pub exact: Subspace,
}

pub fn hodge_decomposition(c: &GradedComplex, ip: &InnerProduct, r: Degree) -> HodgeDecomposition {
    let d = c.differential(r);
    let dstar = codifferential(c, ip, r);
    let harmonic = crate::ratlinalg::kernel_basis(&d.vstack(&dstar));
    HodgeDecomposition {
        coexact: Subspace::span(&codifferential(c, ip, r + 1)),
        harmonic,
        exact: Subspace::span(&c.differential(r - 1)),
    }
}

/// `ker d∗ ⊂ C^r`.
pub fn coclosed(c: &GradedComplex, ip: &InnerProduct, r: Degree) -> Subspace {
    crate::ratlinalg::kernel_basis(&codifferential(c, ip, r))
}

/// `τ_{<k}` as a subcomplex (`im d^{k−1}` in degree `k`) together with the
/// orthogonal projection `C → τ_{<k}` whose kernel is `τ_{≥k}`.
#[derive(Clone, Debug)]
pub struct Truncation {
    pub sub: Subcomplex,
    pub projection: ComplexMap,
    pub cutoff: Degree,
}

impl Truncation {
    pub fn complex(&self) -> &GradedComplex {
        &self.sub.complex
    }
}

pub fn truncate_below(c: &GradedComplex, ip: &InnerProduct, k: Degree) -> Result<Truncation, HodgeError> {
    ip.validate(c)?;
    let spaces: Vec<Subspace> = c
        .degrees()
        .map(|r| match r.cmp(&k) {
            std::cmp::Ordering::Less => Subspace::full(c.dim(r)),
            std::cmp::Ordering::Equal => Subspace::span(&c.differential(r - 1)),
            std::cmp::Ordering::Greater => Subspace::zero(c.dim(r)),
        })
        .collect();
    let sub = subcomplex_from_subspaces(c, &spaces)?;
    let projection = ComplexMap::new(c.clone(), sub.complex.clone(), |r| match r.cmp(&k) {
        std::cmp::Ordering::Less => RationalMatrix::identity(c.dim(r)),
        std::cmp::Ordering::Equal => orthogonal_projection(sub.subspace(r).basis(), &ip.gram(r)),
        std::cmp::Ordering::Greater => RationalMatrix::zeros(0, c.dim(r)),
    })?;
    Ok(Truncation {
        sub,
        projection,
        cutoff: k,
    })
}

/// Coordinates of the `W`-orthogonal projection onto the column span of `b`.
fn orthogonal_projection(b: &RationalMatrix, w: &RationalMatrix) -> RationalMatrix {
    let btw = &b.transpose() * w;
    let gram = &btw * b;
    &gram.inverse().expect("basis columns are independent") * &btw
}

/// `τ_{≥k}`: zero below `k`, `ker d∗` in degree `k`, everything above.
pub fn cotruncate(c: &GradedComplex, ip: &InnerProduct, k: Degree) -> Result<Subcomplex, HodgeError> {
    ip.validate(c)?;
    let spaces: Vec<Subspace> = c
        .degrees()
        .map(|r| match r.cmp(&k) {
            std::cmp::Ordering::Less => Subspace::zero(c.dim(r)),
            std::cmp::Ordering::Equal => coclosed(c, ip, r),
            std::cmp::Ordering::Greater => Subspace::full(c.dim(r)),
        })
        .collect();
    Ok(subcomplex_from_subspaces(c, &spaces)?)
}

/// Checks `0 → τ_{≥k} → C → τ_{<k} → 0` degreewise and `proj ∘ incl = id`.
pub fn verify_truncation_ses(
    c: &GradedComplex,
    ip: &InnerProduct,
    k: Degree,
) -> Result<(), HodgeError> {
    let below = truncate_below(c, ip, k)?;
    let above = cotruncate(c, ip, k)?;
    crate::chaincomplex::verify_ses(&above.inclusion, &below.projection)?;
    let composite = below.sub.inclusion.then(&below.projection)?;
    if composite != ComplexMap::identity(below.complex()) {
        return Err(ChainError::NotExact {
            degree: k,
            kind: crate::chaincomplex::ExactnessFailure::CompositeNonzero,
        }
        .into());
    }
    Ok(())
}

/// The comparison `κ: τ^g_{≥k} → τ^{g'}_{≥k}`.
///
/// In degree `k` an element `x = a + h` with `a ∈ im d∗_g`, `h ∈ Harm_g` goes
/// to `a' + h'` where `a' ∈ im d∗_{g'}` has `da' = da` and `h' ∈ Harm_{g'}` is
/// cohomologous to `h`. Above `k` it is the identity.
pub fn metric_comparison_iso(
    c: &GradedComplex,
    g: &InnerProduct,
    g2: &InnerProduct,
    k: Degree,
) -> Result<ComplexMap, HodgeError> {
    let source = cotruncate(c, g, k)?;
    let target = cotruncate(c, g2, k)?;
    let map = ComplexMap::new(source.complex.clone(), target.complex.clone(), |r| {
        match r.cmp(&k) {
            std::cmp::Ordering::Less => RationalMatrix::zeros(0, 0),
            std::cmp::Ordering::Greater => RationalMatrix::identity(c.dim(r)),
            std::cmp::Ordering::Equal => {
                let images = kappa_in_degree(c, g, g2, k, source.subspace(k).basis());
                target
                    .subspace(k)
                    .coordinates_of(&images)
                    .expect("κ lands in ker d∗_{g'}")
            }
        }
    })?;
    Ok(map)
}

fn kappa_in_degree(
    c: &GradedComplex,
    g: &InnerProduct,
    g2: &InnerProduct,
    k: Degree,
    x: &RationalMatrix,
) -> RationalMatrix {
    let hg = hodge_decomposition(c, g, k);
    let hg2 = hodge_decomposition(c, g2, k);
    let (a_basis, h_basis) = (hg.coexact.basis(), hg.harmonic.basis());
    let split = solve(&a_basis.hstack(h_basis), x).expect("x ∈ im d∗ ⊕ Harm");
    let a = a_basis * &split.block(0, 0, a_basis.cols(), split.cols());
    let h = h_basis * &split.block(a_basis.cols(), 0, h_basis.cols(), split.cols());
    let d = c.differential(k);
    let a2_basis = hg2.coexact.basis();
    let gamma = solve(&(&*d * a2_basis), &(&*d * &a)).expect("d is injective on im d∗ with equal image");
    let a2 = a2_basis * &gamma;
    let h2_basis = hg2.harmonic.basis();
    let exact = c.differential(k - 1);
    let joint = h2_basis.hstack(&-&*exact);
    let coeff = solve(&joint, &h).expect("harmonic spaces represent the same cohomology");
    let h2 = h2_basis * &coeff.block(0, 0, h2_basis.cols(), coeff.cols());
    &a2 + &h2
}

/// Restriction of an isometric automorphism of `C` to `τ_{≥k}`.
pub fn cotruncation_action(f: &ComplexMap, ip: &InnerProduct, k: Degree) -> Result<ComplexMap, HodgeError> {
    let c = f.source();
    if f.target() != c || !f.is_isomorphism() {
        return Err(HodgeError::NotAutomorphism);
    }
    ip.validate(c)?;
    for r in c.degrees() {
        let m = f.component(r);
        let w = ip.gram(r);
        if &(&m.transpose() * &w) * &*m != w {
            return Err(HodgeError::NotIsometry { degree: r });
        }
        let dstar = codifferential(c, ip, r);
        if &dstar * &*m != &*f.component(r - 1) * &dstar {
            return Err(HodgeError::NotCommutingWithAdjoint { degree: r });
        }
    }
    let tau = cotruncate(c, ip, k)?;
    Ok(restrict_to(f, &tau, &tau)?)
}

/// Induced map on `τ_{<k}` of an arbitrary chain endomorphism (`im d` is
/// always preserved).
pub fn truncation_action(f: &ComplexMap, ip: &InnerProduct, k: Degree) -> Result<ComplexMap, HodgeError> {
    let tau = truncate_below(f.source(), ip, k)?;
    let tau_target = truncate_below(f.target(), ip, k)?;
    Ok(restrict_to(f, &tau.sub, &tau_target.sub)?)
}

fn restrict_to(f: &ComplexMap, source: &Subcomplex, target: &Subcomplex) -> Result<ComplexMap, ChainError> {
    ComplexMap::new(source.complex.clone(), target.complex.clone(), |r| {
        let image = &*f.component(r) * source.subspace(r).basis();
        target
            .subspace(r)
            .coordinates_of(&image)
            .expect("map preserves the subcomplex")
    })
}

/// `automorphism_action` for a simplicial automorphism acting by pullback.
pub fn automorphism_action(
    k: &SimplicialComplex,
    f: &SimplicialMap,
    ip: &InnerProduct,
    cutoff: Degree,
) -> Result<ComplexMap, HodgeError> {
    f.check_automorphism(k)?;
    cotruncation_action(&f.pullback(k, k), ip, cutoff)
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct CupClosureReport {
    pub cutoff: Degree,
    pub pairs_checked: usize,
    pub failures: Vec<(Degree, usize, Degree, usize)>,
    pub closed: bool,
}

/// Exhaustively checks that cups of `τ_{≥k}` basis cochains stay in `τ_{≥k}`.
pub fn cotruncation_cup_closure_check(
    k: &SimplicialComplex,
    ip: &InnerProduct,
    cutoff: Degree,
) -> Result<CupClosureReport, HodgeError> {
    let c = k.cochain_complex();
    let tau = cotruncate(&c, ip, cutoff)?;
    let mut pairs_checked = 0;
    let mut failures = Vec::new();
    let n = k.dim().max(0);
    for r in 0..=n {
        let br = tau.subspace(r);
        for s in 0..=n {
            let bs = tau.subspace(s);
            let target = tau.subspace(r + s);
            for i in 0..br.dim() {
                let a = Cochain::new(r as usize, br.basis_vector(i));
                for j in 0..bs.dim() {
                    let b = Cochain::new(s as usize, bs.basis_vector(j));
                    let prod = k.cup(&a, &b)?;
                    pairs_checked += 1;
                    let ok = r + s > n || target.contains(&prod.values)?;
                    if !ok {
                        failures.push((r, i, s, j));
                    }
                }
            }
        }
    }
    Ok(CupClosureReport {
        cutoff,
        closed: failures.is_empty(),
        pairs_checked,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaincomplex::map_on_cohomology;
    use crate::ratlinalg::{frac, rat};
    use crate::simplicial::ordered_product;
    use crate::simplicial::tests::{circle, sphere2};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn torus() -> SimplicialComplex {
        ordered_product(&circle(3), &circle(3)).complex
    }

    fn random_weights(c: &GradedComplex, rng: &mut ChaCha8Rng) -> InnerProduct {
        let w = c
            .degrees()
            .map(|r| {
                (0..c.dim(r))
                    .map(|_| frac(rng.gen_range(1..10), rng.gen_range(1..10)))
                    .collect()
            })
            .collect();
        InnerProduct::new(c, w).unwrap()
    }

    fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<Rational> {
        (0..n).map(|_| frac(rng.gen_range(-9..10), rng.gen_range(1..6))).collect()
    }

    #[test]
    fn all_ones_adjoint_is_transpose() {
        let c = circle(3).cochain_complex();
        let ip = InnerProduct::ones(&c);
        assert_eq!(codifferential(&c, &ip, 1), c.differential(0).transpose());
    }

    #[test]
    fn adjointness_on_circle() {
        let c = circle(3).cochain_complex();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let ip = random_weights(&c, &mut rng);
            let a = random_vec(3, &mut rng);
            let b = random_vec(3, &mut rng);
            let da = c.differential(0).mul_vec(&a);
            let dsb = codifferential(&c, &ip, 1).mul_vec(&b);
            assert_eq!(ip.inner(1, &da, &b), ip.inner(0, &a, &dsb));
        }
    }

    #[test]
    fn doubled_weights_rescale_adjoint() {
        let c = circle(3).cochain_complex();
        let ip = InnerProduct::ones(&c);
        let doubled = ip.scaled(1, &rat(2));
        assert_eq!(codifferential(&c, &doubled, 1), codifferential(&c, &ip, 1).scale(&rat(2)));
        let doubled0 = ip.scaled(0, &rat(2));
        assert_eq!(codifferential(&c, &doubled0, 1), codifferential(&c, &ip, 1).scale(&frac(1, 2)));
    }

    #[test]
    fn rejects_bad_weights() {
        let c = circle(3).cochain_complex();
        assert!(matches!(
            InnerProduct::new(&c, vec![vec![rat(1); 3], vec![rat(1); 2]]),
            Err(HodgeError::DimensionMismatch { degree: 1, .. })
        ));
        assert!(matches!(
            InnerProduct::new(&c, vec![vec![rat(1); 3], vec![rat(1), rat(0), rat(1)]]),
            Err(HodgeError::NonPositiveWeight { degree: 1, index: 1 })
        ));
    }

    #[test]
    fn hodge_dimensions() {
        let z = GradedComplex::with_zero_differentials(0, vec![2, 3]);
        let ip = InnerProduct::ones(&z);
        let h = hodge_decomposition(&z, &ip, 1);
        assert_eq!((h.coexact.dim(), h.harmonic.dim(), h.exact.dim()), (0, 3, 0));

        let c = circle(3).cochain_complex();
        let h = hodge_decomposition(&c, &InnerProduct::ones(&c), 1);
        assert_eq!((h.coexact.dim(), h.harmonic.dim(), h.exact.dim()), (0, 1, 2));

        let s = sphere2().cochain_complex();
        let h = hodge_decomposition(&s, &InnerProduct::ones(&s), 1);
        assert_eq!((h.coexact.dim(), h.harmonic.dim(), h.exact.dim()), (3, 0, 3));
    }

    #[test]
    fn truncation_examples() {
        let c = circle(3).cochain_complex();
        let ip = InnerProduct::ones(&c);
        assert_eq!(truncate_below(&c, &ip, 0).unwrap().complex().total_dim(), 0);
        assert_eq!(truncate_below(&c, &ip, 3).unwrap().complex(), &c);
        assert_eq!(truncate_below(&c, &ip, 1).unwrap().complex().betti(), vec![1, 0]);
        assert_eq!(cotruncate(&c, &ip, 0).unwrap().complex, c);
        assert_eq!(cotruncate(&c, &ip, 1).unwrap().complex.betti(), vec![0, 1]);
        assert_eq!(cotruncate(&c, &ip, 2).unwrap().complex.total_dim(), 0);
        let s = sphere2().cochain_complex();
        let ips = InnerProduct::ones(&s);
        assert_eq!(cotruncate(&s, &ips, 2).unwrap().complex.betti(), vec![0, 0, 1]);
    }

    #[test]
    fn circle_metric_comparison() {
        let c = circle(3).cochain_complex();
        let g = InnerProduct::ones(&c);
        let g2 = InnerProduct::new(&c, vec![vec![rat(1); 3], vec![rat(1), rat(2), rat(3)]]).unwrap();
        let kappa = metric_comparison_iso(&c, &g, &g2, 1).unwrap();
        assert!(kappa.is_isomorphism());
        assert_eq!(kappa.target().betti(), vec![0, 1]);
        assert_eq!(map_on_cohomology(&kappa, 1).rank(), 1);
        let same = metric_comparison_iso(&c, &g, &g, 1).unwrap();
        assert_eq!(same, ComplexMap::identity(&cotruncate(&c, &g, 1).unwrap().complex));
    }

    #[test]
    fn torus_metric_comparison_roundtrip() {
        let c = torus().cochain_complex();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = random_weights(&c, &mut rng);
        let g2 = random_weights(&c, &mut rng);
        let kappa = metric_comparison_iso(&c, &g, &g2, 1).unwrap();
        let back = metric_comparison_iso(&c, &g2, &g, 1).unwrap();
        assert_eq!(kappa.target().betti(), vec![0, 2, 1]);
        assert_eq!(kappa.then(&back).unwrap(), ComplexMap::identity(kappa.source()));
    }

    #[test]
    fn automorphisms_of_circle() {
        let c6 = circle(6);
        let ip = InnerProduct::ones(&c6.cochain_complex());
        let id = automorphism_action(&c6, &SimplicialMap::identity(&c6), &ip, 1).unwrap();
        assert_eq!(id, ComplexMap::identity(id.source()));
        let rot = SimplicialMap::automorphism(&c6, (0..6).map(|i| (i + 1) % 6).collect()).unwrap();
        let refl = SimplicialMap::automorphism(&c6, (0..6).map(|i| (6 - i) % 6).collect()).unwrap();
        for (f, sign) in [(rot, 1), (refl, -1)] {
            let act = automorphism_action(&c6, &f, &ip, 1).unwrap();
            assert!(act.is_isomorphism());
            assert_eq!(map_on_cohomology(&act, 1), RationalMatrix::from_i64_rows(&[&[sign]]));
        }
    }

    #[test]
    fn non_isometry_is_rejected() {
        let c6 = circle(6);
        let c = c6.cochain_complex();
        let mut w = vec![vec![rat(1); 6], vec![rat(1); 6]];
        w[0][0] = rat(2);
        let ip = InnerProduct::new(&c, w).unwrap();
        let rot = SimplicialMap::automorphism(&c6, (0..6).map(|i| (i + 1) % 6).collect()).unwrap();
        assert!(matches!(
            automorphism_action(&c6, &rot, &ip, 1),
            Err(HodgeError::NotIsometry { degree: 0 })
        ));
    }

    #[test]
    fn cup_closure_examples() {
        for (k, cutoffs) in [(circle(3), vec![0, 1]), (torus(), vec![0, 1]), (sphere2(), vec![2])] {
            let ip = InnerProduct::ones(&k.cochain_complex());
            for cutoff in cutoffs {
                let report = cotruncation_cup_closure_check(&k, &ip, cutoff).unwrap();
                assert!(report.closed, "{:?}", report);
                assert!(report.pairs_checked > 0);
            }
        }
    }

    fn check_truncation_invariants(c: &GradedComplex, ip: &InnerProduct) {
        let betti = c.betti();
        for k in c.lo()..=c.hi() + 1 {
            verify_truncation_ses(c, ip, k).unwrap();
            let below = truncate_below(c, ip, k).unwrap();
            let above = cotruncate(c, ip, k).unwrap();
            for (i, r) in c.degrees().enumerate() {
                let (want_below, want_above) = if r < k { (betti[i], 0) } else { (0, betti[i]) };
                assert_eq!(below.complex().betti_at(r), want_below);
                assert_eq!(above.complex.betti_at(r), want_above);
                assert_eq!(map_on_cohomology(&above.inclusion, r).rank(), want_above);
                assert_eq!(map_on_cohomology(&below.projection, r).rank(), want_below);
            }
        }
    }

    #[test]
    fn truncation_invariants_on_fixtures() {
        for k in [circle(3), sphere2(), torus()] {
            let c = k.cochain_complex();
            check_truncation_invariants(&c, &InnerProduct::ones(&c));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn hodge_is_orthogonal_and_complete(seed in any::<u64>(), which in 0usize..3) {
            let k = [circle(4), sphere2(), circle(3)][which].clone();
            let c = k.cochain_complex();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ip = random_weights(&c, &mut rng);
            for r in c.degrees() {
                let h = hodge_decomposition(&c, &ip, r);
                prop_assert_eq!(h.coexact.dim() + h.harmonic.dim() + h.exact.dim(), c.dim(r));
                prop_assert_eq!(h.harmonic.dim(), c.betti_at(r));
                let parts = [&h.coexact, &h.harmonic, &h.exact];
                for i in 0..3 {
                    for j in i + 1..3 {
                        for a in 0..parts[i].dim() {
                            for b in 0..parts[j].dim() {
                                let v = ip.inner(r, &parts[i].basis_vector(a), &parts[j].basis_vector(b));
                                prop_assert!(v.is_zero());
                            }
                        }
                    }
                }
            }
        }

        #[test]
        fn truncations_with_random_metrics(seed in any::<u64>()) {
            let c = sphere2().cochain_complex();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ip = random_weights(&c, &mut rng);
            check_truncation_invariants(&c, &ip);
        }

        #[test]
        fn metric_independence(seed in any::<u64>(), k in 0i32..3) {
            let c = sphere2().cochain_complex();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_weights(&c, &mut rng);
            let g2 = random_weights(&c, &mut rng);
            let kappa = metric_comparison_iso(&c, &g, &g2, k).unwrap();
            prop_assert!(kappa.is_isomorphism());
            prop_assert_eq!(kappa.source().betti(), kappa.target().betti());
        }

        #[test]
        fn isometries_commute_with_adjoint(shift in 0usize..6, reflect in any::<bool>()) {
            let c6 = circle(6);
            let vm: Vec<usize> = (0..6)
                .map(|i| if reflect { (6 - i + shift) % 6 } else { (i + shift) % 6 })
                .collect();
            let f = SimplicialMap::automorphism(&c6, vm).unwrap();
            let ip = InnerProduct::ones(&c6.cochain_complex());
            for k in 0..3 {
                prop_assert!(automorphism_action(&c6, &f, &ip, k).is_ok());
            }
        }
    }
}
