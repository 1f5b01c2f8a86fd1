//! Finite cochain complexes over the rationals.
//!
//! A [`GradedComplex`] lives on a finite window of degrees `lo..=hi`; outside
//! the window every space is zero. Differentials raise degree by one. All
//! choices of representatives (cohomology bases, sections of surjections)
//! are inherited from the pivot policy of [`crate::ratlinalg`].

use std::borrow::Cow;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::ratlinalg::{
    image_basis, kernel_basis, solve, LinAlgError, Quotient, RationalMatrix, Subspace,
};

pub type Degree = i32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactnessFailure {
    NotInjective,
    NotSurjective,
    CompositeNonzero,
    ImageNotKernel,
    IncompatibleComplexes,
}

impl fmt::Display for ExactnessFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ExactnessFailure::NotInjective => "first map not injective",
            ExactnessFailure::NotSurjective => "second map not surjective",
            ExactnessFailure::CompositeNonzero => "composite is nonzero",
            ExactnessFailure::ImageNotKernel => "image differs from kernel",
            ExactnessFailure::IncompatibleComplexes => "maps do not compose",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChainError {
    #[error("malformed complex: d∘d ≠ 0 starting at degree {degree}")]
    NotAComplex { degree: Degree },
    #[error("differential at degree {degree} has shape {found:?}, expected {expected:?}")]
    BadShape {
        degree: Degree,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("map does not commute with the differentials at degree {degree}")]
    NotAChainMap { degree: Degree },
    #[error("subspaces are not stable under the differential at degree {degree}")]
    NotStable { degree: Degree },
    #[error("short sequence not exact at degree {degree}: {kind}")]
    NotExact {
        degree: Degree,
        kind: ExactnessFailure,
    },
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
}

/// Bounded cochain complex `C^lo → … → C^hi`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedComplex {
    lo: Degree,
    dims: Vec<usize>,
    // diffs[i]: degree lo+i -> lo+i+1, for i < dims.len() - 1
    diffs: Vec<RationalMatrix>,
}

impl GradedComplex {
    /// `differentials[i]` maps degree `lo + i` to `lo + i + 1`; there must be
    /// exactly `dims.len() - 1` of them (or none when `dims` is empty).
    pub fn new(
        lo: Degree,
        dims: Vec<usize>,
        differentials: Vec<RationalMatrix>,
    ) -> Result<Self, ChainError> {
        let expected = dims.len().saturating_sub(1);
        if differentials.len() != expected {
            return Err(ChainError::BadShape {
                degree: lo + differentials.len() as Degree,
                expected: (0, 0),
                found: (differentials.len(), expected),
            });
        }
        for (i, d) in differentials.iter().enumerate() {
            let want = (dims[i + 1], dims[i]);
            if d.shape() != want {
                return Err(ChainError::BadShape {
                    degree: lo + i as Degree,
                    expected: want,
                    found: d.shape(),
                });
            }
        }
        for i in 1..differentials.len() {
            if !(&differentials[i] * &differentials[i - 1]).is_zero() {
                return Err(ChainError::NotAComplex {
                    degree: lo + i as Degree - 1,
                });
            }
        }
        Ok(GradedComplex {
            lo,
            dims,
            diffs: differentials,
        })
    }

    /// The complex with the given dimensions and all differentials zero.
    pub fn with_zero_differentials(lo: Degree, dims: Vec<usize>) -> Self {
        let diffs = dims
            .windows(2)
            .map(|w| RationalMatrix::zeros(w[1], w[0]))
            .collect();
        GradedComplex { lo, dims, diffs }
    }

    pub fn zero() -> Self {
        GradedComplex {
            lo: 0,
            dims: Vec::new(),
            diffs: Vec::new(),
        }
    }

    pub fn lo(&self) -> Degree {
        self.lo
    }

    /// Top degree of the window; `lo - 1` for an empty window.
    pub fn hi(&self) -> Degree {
        self.lo + self.dims.len() as Degree - 1
    }

    pub fn degrees(&self) -> std::ops::RangeInclusive<Degree> {
        self.lo..=self.hi()
    }

    fn index(&self, r: Degree) -> Option<usize> {
        if r < self.lo || r > self.hi() {
            None
        } else {
            Some((r - self.lo) as usize)
        }
    }

    pub fn dim(&self, r: Degree) -> usize {
        self.index(r).map_or(0, |i| self.dims[i])
    }

    /// `d^r : C^r → C^{r+1}`.
    pub fn differential(&self, r: Degree) -> Cow<'_, RationalMatrix> {
        match self.index(r) {
            Some(i) if i < self.diffs.len() => Cow::Borrowed(&self.diffs[i]),
            _ => Cow::Owned(RationalMatrix::zeros(self.dim(r + 1), self.dim(r))),
        }
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.degrees()
            .map(|r| sign(r) * self.dim(r) as i64)
            .sum()
    }

    /// Betti numbers for every degree of the window.
    pub fn betti(&self) -> Vec<usize> {
        self.degrees()
            .map(|r| {
                let nullity = self.dim(r) - self.differential(r).rank();
                nullity - self.differential(r - 1).rank()
            })
            .collect()
    }

    /// Betti numbers over an explicit degree range (zeros outside the window).
    pub fn betti_range(&self, lo: Degree, hi: Degree) -> Vec<usize> {
        (lo..=hi).map(|r| self.betti_at(r)).collect()
    }

    pub fn betti_at(&self, r: Degree) -> usize {
        let nullity = self.dim(r) - self.differential(r).rank();
        nullity - self.differential(r - 1).rank()
    }

    /// Same complex over a wider window.
    pub fn extended(&self, lo: Degree, hi: Degree) -> Self {
        let lo = lo.min(self.lo);
        let hi = hi.max(self.hi());
        let dims: Vec<usize> = (lo..=hi).map(|r| self.dim(r)).collect();
        let diffs = (lo..hi).map(|r| self.differential(r).into_owned()).collect();
        GradedComplex { lo, dims, diffs }
    }
}

fn sign(r: Degree) -> i64 {
    if r.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Cohomology in one degree with a fixed basis of representative cocycles.
#[derive(Clone, Debug)]
pub struct CohomologyResult {
    pub degree: Degree,
    pub betti: usize,
    quotient: Quotient,
}

impl CohomologyResult {
    /// Representative cocycles as columns.
    pub fn representatives(&self) -> &RationalMatrix {
        self.quotient.representatives().basis()
    }

    pub fn cocycles(&self) -> &Subspace {
        self.quotient.numerator()
    }

    pub fn coboundaries(&self) -> &Subspace {
        self.quotient.denominator()
    }

    /// Class coordinates of a cocycle; `NotContained` if it is not a cocycle.
    pub fn coordinates(&self, cocycle: &[crate::ratlinalg::Rational]) -> Result<Vec<crate::ratlinalg::Rational>, LinAlgError> {
        self.quotient.coordinates(cocycle)
    }

    pub fn coordinates_of(&self, cocycles: &RationalMatrix) -> Result<RationalMatrix, LinAlgError> {
        self.quotient.coordinates_of(cocycles)
    }

    pub fn is_coboundary(&self, cocycle: &[crate::ratlinalg::Rational]) -> Result<bool, LinAlgError> {
        Ok(self.coordinates(cocycle)?.iter().all(num_traits::Zero::is_zero))
    }
}

pub fn cohomology(c: &GradedComplex, r: Degree) -> CohomologyResult {
    let cocycles = kernel_basis(&c.differential(r));
    let coboundaries = image_basis(&c.differential(r - 1));
    let quotient = Quotient::new(cocycles, coboundaries)
        .expect("coboundaries of a valid complex are cocycles");
    CohomologyResult {
        degree: r,
        betti: quotient.dim(),
        quotient,
    }
}

/// Degreewise linear map between two complexes (degree zero).
#[derive(Clone, Debug)]
pub struct ComplexMap {
    source: GradedComplex,
    target: GradedComplex,
    lo: Degree,
    // components[i]: degree lo+i
    components: Vec<RationalMatrix>,
}

impl PartialEq for ComplexMap {
    fn eq(&self, other: &Self) -> bool {
        if self.source != other.source || self.target != other.target {
            return false;
        }
        let lo = self.lo.min(other.lo);
        let hi = (self.lo + self.components.len() as Degree).max(other.lo + other.components.len() as Degree);
        (lo..hi).all(|r| self.component(r) == other.component(r))
    }
}

impl Eq for ComplexMap {}

impl ComplexMap {
    /// Builds a map from per-degree components and verifies that it commutes
    /// with the differentials. Components are requested for every degree in
    /// the source window.
    pub fn new(
        source: GradedComplex,
        target: GradedComplex,
        mut component: impl FnMut(Degree) -> RationalMatrix,
    ) -> Result<Self, ChainError> {
        let lo = source.lo();
        let mut components = Vec::new();
        for r in source.degrees() {
            let m = component(r);
            let want = (target.dim(r), source.dim(r));
            if m.shape() != want {
                return Err(ChainError::BadShape {
                    degree: r,
                    expected: want,
                    found: m.shape(),
                });
            }
            components.push(m);
        }
        let f = ComplexMap {
            source,
            target,
            lo,
            components,
        };
        f.check_commutes()?;
        Ok(f)
    }

    pub fn identity(c: &GradedComplex) -> Self {
        ComplexMap {
            source: c.clone(),
            target: c.clone(),
            lo: c.lo(),
            components: c.degrees().map(|r| RationalMatrix::identity(c.dim(r))).collect(),
        }
    }

    pub fn zero(source: &GradedComplex, target: &GradedComplex) -> Self {
        ComplexMap {
            source: source.clone(),
            target: target.clone(),
            lo: source.lo(),
            components: source
                .degrees()
                .map(|r| RationalMatrix::zeros(target.dim(r), source.dim(r)))
                .collect(),
        }
    }

    fn check_commutes(&self) -> Result<(), ChainError> {
        let lo = self.source.lo().min(self.target.lo()) - 1;
        let hi = self.source.hi().max(self.target.hi());
        for r in lo..=hi {
            let left = &*self.target.differential(r) * &*self.component(r);
            let right = &*self.component(r + 1) * &*self.source.differential(r);
            if left != right {
                return Err(ChainError::NotAChainMap { degree: r });
            }
        }
        Ok(())
    }

    pub fn source(&self) -> &GradedComplex {
        &self.source
    }

    pub fn target(&self) -> &GradedComplex {
        &self.target
    }

    pub fn component(&self, r: Degree) -> Cow<'_, RationalMatrix> {
        if r >= self.lo && ((r - self.lo) as usize) < self.components.len() {
            Cow::Borrowed(&self.components[(r - self.lo) as usize])
        } else {
            Cow::Owned(RationalMatrix::zeros(self.target.dim(r), self.source.dim(r)))
        }
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &ComplexMap) -> Result<ComplexMap, ChainError> {
        if self.target != other.source {
            return Err(ChainError::NotExact {
                degree: self.target.lo(),
                kind: ExactnessFailure::IncompatibleComplexes,
            });
        }
        Ok(ComplexMap {
            source: self.source.clone(),
            target: other.target.clone(),
            lo: self.lo,
            components: self
                .source
                .degrees()
                .map(|r| &*other.component(r) * &*self.component(r))
                .collect(),
        })
    }

    pub fn is_isomorphism(&self) -> bool {
        let lo = self.source.lo().min(self.target.lo());
        let hi = self.source.hi().max(self.target.hi());
        (lo..=hi).all(|r| {
            self.source.dim(r) == self.target.dim(r) && self.component(r).rank() == self.source.dim(r)
        })
    }
}

/// Matrix of `H^r(f)` in the representative bases of source and target.
pub fn map_on_cohomology(f: &ComplexMap, r: Degree) -> RationalMatrix {
    let hs = cohomology(f.source(), r);
    let ht = cohomology(f.target(), r);
    map_on_cohomology_with(f, r, &hs, &ht)
}

pub fn map_on_cohomology_with(
    f: &ComplexMap,
    r: Degree,
    source: &CohomologyResult,
    target: &CohomologyResult,
) -> RationalMatrix {
    let images = &*f.component(r) * source.representatives();
    target
        .coordinates_of(&images)
        .expect("chain maps send cocycles to cocycles")
}

/// A subcomplex together with the bases used to present it.
#[derive(Clone, Debug)]
pub struct Subcomplex {
    pub complex: GradedComplex,
    pub inclusion: ComplexMap,
    pub bases: Vec<Subspace>,
}

impl Subcomplex {
    /// The ambient subspace in degree `r` (zero outside the window).
    pub fn subspace(&self, r: Degree) -> Subspace {
        let lo = self.inclusion.target().lo();
        if r < lo || (r - lo) as usize >= self.bases.len() {
            Subspace::zero(self.inclusion.target().dim(r))
        } else {
            self.bases[(r - lo) as usize].clone()
        }
    }
}

/// Restricts `c` to d-stable subspaces, one per degree of `c`'s window.
pub fn subcomplex_from_subspaces(
    c: &GradedComplex,
    spaces: &[Subspace],
) -> Result<Subcomplex, ChainError> {
    let degrees: Vec<Degree> = c.degrees().collect();
    if spaces.len() != degrees.len() {
        return Err(LinAlgError::DimensionMismatch {
            expected: degrees.len(),
            found: spaces.len(),
        }
        .into());
    }
    for (s, &r) in spaces.iter().zip(&degrees) {
        if s.ambient_dim() != c.dim(r) {
            return Err(LinAlgError::DimensionMismatch {
                expected: c.dim(r),
                found: s.ambient_dim(),
            }
            .into());
        }
    }
    let mut diffs = Vec::new();
    for i in 0..spaces.len().saturating_sub(1) {
        let image = &*c.differential(degrees[i]) * spaces[i].basis();
        let restricted = spaces[i + 1].coordinates_of(&image).map_err(|e| match e {
            LinAlgError::NotContained => ChainError::NotStable { degree: degrees[i] },
            other => other.into(),
        })?;
        diffs.push(restricted);
    }
    let sub = GradedComplex::new(c.lo(), spaces.iter().map(Subspace::dim).collect(), diffs)?;
    let inclusion = ComplexMap {
        source: sub.clone(),
        target: c.clone(),
        lo: c.lo(),
        components: spaces.iter().map(|s| s.basis().clone()).collect(),
    };
    Ok(Subcomplex {
        complex: sub,
        inclusion,
        bases: spaces.to_vec(),
    })
}

/// The quotient `c / s` presented on complement bases, with the projection.
pub fn quotient_complex(
    c: &GradedComplex,
    spaces: &[Subspace],
) -> Result<(GradedComplex, ComplexMap), ChainError> {
    // validate stability first
    subcomplex_from_subspaces(c, spaces)?;
    let degrees: Vec<Degree> = c.degrees().collect();
    let quotients: Vec<Quotient> = spaces
        .iter()
        .zip(&degrees)
        .map(|(s, &r)| Quotient::new(Subspace::full(c.dim(r)), s.clone()))
        .collect::<Result<_, _>>()?;
    let mut diffs = Vec::new();
    for i in 0..quotients.len().saturating_sub(1) {
        let image = &*c.differential(degrees[i]) * quotients[i].representatives().basis();
        diffs.push(quotients[i + 1].coordinates_of(&image)?);
    }
    let q = GradedComplex::new(c.lo(), quotients.iter().map(Quotient::dim).collect(), diffs)?;
    let proj = ComplexMap::new(c.clone(), q.clone(), |r| {
        let i = (r - c.lo()) as usize;
        quotients[i]
            .coordinates_of(&RationalMatrix::identity(c.dim(r)))
            .expect("full space")
    })?;
    Ok((q, proj))
}

/// Tensor product `A ⊗ B` with `d(x ⊗ y) = dx ⊗ y + (−1)^p x ⊗ dy`.
///
/// Degree `j` is laid out as the blocks `A^p ⊗ B^{j−p}` in increasing `p`;
/// inside a block, `x_i ⊗ y_k` sits at `i · dim B^{j−p} + k`.
#[derive(Clone, Debug)]
pub struct TensorProduct {
    pub complex: GradedComplex,
    a: GradedComplex,
    b: GradedComplex,
}

impl TensorProduct {
    /// Offset of the `A^p ⊗ B^q` block inside degree `p + q`.
    pub fn offset(&self, p: Degree, q: Degree) -> usize {
        let j = p + q;
        (self.a.lo()..p)
            .map(|pp| self.a.dim(pp) * self.b.dim(j - pp))
            .sum()
    }

    pub fn index(&self, p: Degree, ia: usize, q: Degree, ib: usize) -> usize {
        self.offset(p, q) + ia * self.b.dim(q) + ib
    }

    pub fn factors(&self) -> (&GradedComplex, &GradedComplex) {
        (&self.a, &self.b)
    }
}

pub fn tensor_product(a: &GradedComplex, b: &GradedComplex) -> TensorProduct {
    let lo = a.lo() + b.lo();
    let hi = a.hi() + b.hi();
    let mut t = TensorProduct {
        complex: GradedComplex::zero(),
        a: a.clone(),
        b: b.clone(),
    };
    if a.total_dim() == 0 || b.total_dim() == 0 {
        return t;
    }
    let dims: Vec<usize> = (lo..=hi)
        .map(|j| a.degrees().map(|p| a.dim(p) * b.dim(j - p)).sum())
        .collect();
    let mut diffs = Vec::new();
    for j in lo..hi {
        let mut d = RationalMatrix::zeros(dims[(j + 1 - lo) as usize], dims[(j - lo) as usize]);
        for p in a.degrees() {
            let q = j - p;
            let (na, nb) = (a.dim(p), b.dim(q));
            if na == 0 || nb == 0 {
                continue;
            }
            let da = a.differential(p);
            let db = b.differential(q);
            let sign = if p.rem_euclid(2) == 0 { 1 } else { -1 };
            let col0 = t.offset(p, q);
            for ia in 0..na {
                for ib in 0..nb {
                    let col = col0 + ia * nb + ib;
                    let row0 = t.offset(p + 1, q);
                    for ja in 0..a.dim(p + 1) {
                        let x = da.get(ja, ia);
                        if !num_traits::Zero::is_zero(x) {
                            d.add_to(row0 + ja * nb + ib, col, x);
                        }
                    }
                    let row0 = t.offset(p, q + 1);
                    let nb1 = b.dim(q + 1);
                    for jb in 0..nb1 {
                        let y = db.get(jb, ib);
                        if !num_traits::Zero::is_zero(y) {
                            let v = if sign == 1 { y.clone() } else { -y.clone() };
                            d.add_to(row0 + ia * nb1 + jb, col, &v);
                        }
                    }
                }
            }
        }
        diffs.push(d);
    }
    t.complex = GradedComplex::new(lo, dims, diffs).expect("tensor differential squares to zero");
    t
}

/// Mapping cone: `Cone^r = S^{r+1} ⊕ T^r`, `d(τ, σ) = (−dτ, f(τ) + dσ)`.
pub fn mapping_cone(f: &ComplexMap) -> GradedComplex {
    let s = f.source();
    let t = f.target();
    let lo = (s.lo() - 1).min(t.lo());
    let hi = (s.hi() - 1).max(t.hi());
    let dims: Vec<usize> = (lo..=hi).map(|r| s.dim(r + 1) + t.dim(r)).collect();
    let diffs = (lo..hi)
        .map(|r| {
            let (s1, t0) = (s.dim(r + 1), t.dim(r));
            let (s2, t1) = (s.dim(r + 2), t.dim(r + 1));
            let mut d = RationalMatrix::zeros(s2 + t1, s1 + t0);
            d.set_block(0, 0, &-&*s.differential(r + 1));
            d.set_block(s2, 0, &f.component(r + 1));
            d.set_block(s2, s1, &t.differential(r));
            d
        })
        .collect();
    GradedComplex::new(lo, dims, diffs).expect("cone differential squares to zero")
}

/// Checks `0 → A → B → C → 0` degreewise.
pub fn verify_ses(incl: &ComplexMap, proj: &ComplexMap) -> Result<(), ChainError> {
    if incl.target() != proj.source() {
        return Err(ChainError::NotExact {
            degree: incl.target().lo(),
            kind: ExactnessFailure::IncompatibleComplexes,
        });
    }
    let b = incl.target();
    let lo = b.lo().min(incl.source().lo()).min(proj.target().lo());
    let hi = b.hi().max(incl.source().hi()).max(proj.target().hi());
    for r in lo..=hi {
        let i = incl.component(r);
        let p = proj.component(r);
        let fail = |kind| Err(ChainError::NotExact { degree: r, kind });
        if i.rank() != incl.source().dim(r) {
            return fail(ExactnessFailure::NotInjective);
        }
        if p.rank() != proj.target().dim(r) {
            return fail(ExactnessFailure::NotSurjective);
        }
        if !(&*p * &*i).is_zero() {
            return fail(ExactnessFailure::CompositeNonzero);
        }
        if incl.source().dim(r) + proj.target().dim(r) != b.dim(r) {
            return fail(ExactnessFailure::ImageNotKernel);
        }
    }
    Ok(())
}

/// Connecting map `δ: H^r(C) → H^{r+1}(A)` of a short exact sequence, by the
/// zig-zag with pivot-determined sections.
pub fn ses_connecting(
    incl: &ComplexMap,
    proj: &ComplexMap,
    r: Degree,
) -> Result<RationalMatrix, ChainError> {
    verify_ses(incl, proj)?;
    Ok(connecting_unchecked(incl, proj, r, &cohomology(proj.target(), r), &cohomology(incl.source(), r + 1)))
}

fn connecting_unchecked(
    incl: &ComplexMap,
    proj: &ComplexMap,
    r: Degree,
    hc: &CohomologyResult,
    ha: &CohomologyResult,
) -> RationalMatrix {
    let reps = hc.representatives();
    if reps.cols() == 0 || ha.betti == 0 {
        return RationalMatrix::zeros(ha.betti, hc.betti);
    }
    let lift = solve(&proj.component(r), reps).expect("projection is surjective");
    let db = &*incl.target().differential(r) * &lift;
    let pre = solve(&incl.component(r + 1), &db).expect("boundary of a lift lies in the subcomplex");
    ha.coordinates_of(&pre).expect("zig-zag produces a cocycle")
}

/// One node of a long exact sequence.
#[derive(Clone, Debug, Serialize)]
pub struct LesNode {
    pub label: String,
    pub degree: Degree,
    pub dim: usize,
}

/// A long exact sequence presented as nodes and consecutive maps.
#[derive(Clone, Debug)]
pub struct LongExactSequence {
    pub nodes: Vec<LesNode>,
    /// `maps[i]` goes from node `i` to node `i + 1`.
    pub maps: Vec<RationalMatrix>,
}

impl LongExactSequence {
    pub fn dims(&self) -> Vec<usize> {
        self.nodes.iter().map(|n| n.dim).collect()
    }

    pub fn verify(&self) -> ExactnessReport {
        verify_les_exactness(&self.dims(), &self.maps)
    }
}

/// The cohomology long exact sequence `… → H^r(A) → H^r(B) → H^r(C) → H^{r+1}(A) → …`.
pub fn les_of_ses(
    incl: &ComplexMap,
    proj: &ComplexMap,
    names: [&str; 3],
) -> Result<LongExactSequence, ChainError> {
    verify_ses(incl, proj)?;
    let (a, b, c) = (incl.source(), incl.target(), proj.target());
    let lo = a.lo().min(b.lo()).min(c.lo());
    let hi = a.hi().max(b.hi()).max(c.hi());
    let mut nodes = Vec::new();
    let mut maps = Vec::new();
    let mut ha = cohomology(a, lo);
    for r in lo..=hi {
        let hb = cohomology(b, r);
        let hc = cohomology(c, r);
        let ha_next = cohomology(a, r + 1);
        nodes.push(LesNode { label: names[0].into(), degree: r, dim: ha.betti });
        nodes.push(LesNode { label: names[1].into(), degree: r, dim: hb.betti });
        nodes.push(LesNode { label: names[2].into(), degree: r, dim: hc.betti });
        maps.push(map_on_cohomology_with(incl, r, &ha, &hb));
        maps.push(map_on_cohomology_with(proj, r, &hb, &hc));
        if r < hi {
            maps.push(connecting_unchecked(incl, proj, r, &hc, &ha_next));
        }
        ha = ha_next;
    }
    Ok(LongExactSequence { nodes, maps })
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct PositionReport {
    pub index: usize,
    pub dim: usize,
    pub rank_in: usize,
    pub rank_out: usize,
    pub exact: bool,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct ExactnessReport {
    pub positions: Vec<PositionReport>,
    pub exact: bool,
}

/// Checks `im = ker` at every node, treating the sequence as starting and
/// ending with zero.
pub fn verify_les_exactness(dims: &[usize], maps: &[RationalMatrix]) -> ExactnessReport {
    let n = dims.len();
    let mut positions = Vec::with_capacity(n);
    for i in 0..n {
        let incoming = if i == 0 { None } else { maps.get(i - 1) };
        let outgoing = if i + 1 < n { maps.get(i) } else { None };
        let shapes_ok = incoming.is_none_or(|m| m.shape() == (dims[i], dims[i - 1]))
            && outgoing.is_none_or(|m| m.shape() == (dims[i + 1], dims[i]));
        let rank_in = incoming.map_or(0, RationalMatrix::rank);
        let rank_out = outgoing.map_or(0, RationalMatrix::rank);
        let composite_zero = match (incoming, outgoing) {
            (Some(a), Some(b)) if shapes_ok => (b * a).is_zero(),
            _ => true,
        };
        let exact = shapes_ok && composite_zero && rank_in + rank_out == dims[i];
        positions.push(PositionReport {
            index: i,
            dim: dims[i],
            rank_in,
            rank_out,
            exact,
        });
    }
    let exact = maps.len() + 1 == n.max(1) && positions.iter().all(|p| p.exact);
    ExactnessReport { positions, exact }
}
