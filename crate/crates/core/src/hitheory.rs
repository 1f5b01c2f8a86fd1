//! Intersection-space cohomology `HI` for isolated singularities and for
//! depth-one spaces whose link bundle is flat.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_traits::Zero;
use serde::Serialize;

use crate::chaincomplex::{
    cohomology, les_of_ses, map_on_cohomology, ses_connecting, subcomplex_from_subspaces,
    verify_ses, ChainError, CohomologyResult, ComplexMap, Degree, GradedComplex, Subcomplex,
};
use crate::flatbundle::{realize_structured_classes, BundleError, FlatBundleSystem, PairingMatrix, Realization, Selector};
use crate::hodgetrunc::{codifferential, cotruncate, truncate_below, HodgeError, InnerProduct, Truncation};
use crate::ratlinalg::{kernel_basis, solve, LinAlgError, Rational, RationalMatrix, Subspace};
use crate::simplicial::{
    relative_cochain_complex, remove_at, Cochain, Embedding, OrientedPseudomanifold, Simplex,
    SimplicialComplex, SimplicialError, SimplicialMap,
};

#[derive(Debug, thiserror::Error)]
pub enum HiError {
    #[error("perversity: {0}")]
    Perversity(String),
    #[error("boundary components: {0}")]
    Links(String),
    #[error("perversities {p} and {q} are not complementary at k = {k}")]
    NotComplementary { p: String, q: String, k: usize },
    #[error("cochain is not in the HI complex in degree {0}")]
    NotInQi(Degree),
    #[error("identification of the boundary with the realization: {0}")]
    Identification(String),
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    Hodge(#[from] HodgeError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
    #[error(transparent)]
    Simplicial(#[from] SimplicialError),
}

/// A Goresky–MacPherson perversity, `p̄(2) = 0` and `p̄(k) ≤ p̄(k+1) ≤ p̄(k) + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Perversity {
    Zero,
    LowerMiddle,
    UpperMiddle,
    Top,
    /// Values `p̄(2), p̄(3), …`.
    Custom(Vec<i32>),
}

impl Perversity {
    pub fn presets() -> [Perversity; 4] {
        [Perversity::Zero, Perversity::LowerMiddle, Perversity::UpperMiddle, Perversity::Top]
    }

    /// Accepts `zero`, `lower-middle`, `upper-middle`, `top` (or `0`, `m`,
    /// `n`, `t`) and comma-separated values starting at `k = 2`.
    pub fn parse(s: &str) -> Result<Self, HiError> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "zero" | "0" => return Ok(Perversity::Zero),
            "lower-middle" | "lower_middle" | "m" => return Ok(Perversity::LowerMiddle),
            "upper-middle" | "upper_middle" | "n" => return Ok(Perversity::UpperMiddle),
            "top" | "t" => return Ok(Perversity::Top),
            _ => {}
        }
        let values = s
            .split(',')
            .map(|v| v.trim().parse::<i32>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| HiError::Perversity(format!("cannot parse {:?}", s)))?;
        let p = Perversity::Custom(values);
        p.check_growth()?;
        Ok(p)
    }

    pub fn value(&self, k: usize) -> Result<i32, HiError> {
        if k < 2 {
            return Err(HiError::Perversity(format!("p̄({}) is undefined", k)));
        }
        let k = k as i32;
        Ok(match self {
            Perversity::Zero => 0,
            Perversity::LowerMiddle => (k - 2).div_euclid(2),
            Perversity::UpperMiddle => (k - 1).div_euclid(2),
            Perversity::Top => k - 2,
            Perversity::Custom(v) => *v.get(k as usize - 2).ok_or_else(|| {
                HiError::Perversity(format!("no value for k = {} in {}", k, self))
            })?,
        })
    }

    fn check_growth(&self) -> Result<(), HiError> {
        if let Perversity::Custom(v) = self {
            if v.first().is_some_and(|&x| x != 0) {
                return Err(HiError::Perversity("p̄(2) must be 0".into()));
            }
            if let Some(i) = v.windows(2).position(|w| w[1] < w[0] || w[1] > w[0] + 1) {
                return Err(HiError::Perversity(format!(
                    "growth violated between k = {} and k = {}",
                    i + 2,
                    i + 3
                )));
            }
        }
        Ok(())
    }

    /// Checks the growth conditions for `2 ≤ k ≤ n`.
    pub fn validate(&self, n: usize) -> Result<(), HiError> {
        self.check_growth()?;
        for k in 2..=n {
            self.value(k)?;
        }
        Ok(())
    }

    /// `q̄(k) = k − 2 − p̄(k)`.
    pub fn complement(&self) -> Perversity {
        match self {
            Perversity::Zero => Perversity::Top,
            Perversity::Top => Perversity::Zero,
            Perversity::LowerMiddle => Perversity::UpperMiddle,
            Perversity::UpperMiddle => Perversity::LowerMiddle,
            Perversity::Custom(v) => Perversity::Custom(
                v.iter().enumerate().map(|(i, &x)| i as i32 - x).collect(),
            ),
        }
    }

    pub fn is_complementary(&self, other: &Perversity, n: usize) -> Result<(), HiError> {
        for k in 2..=n {
            if self.value(k)? + other.value(k)? != k as i32 - 2 {
                return Err(HiError::NotComplementary {
                    p: self.to_string(),
                    q: other.to_string(),
                    k,
                });
            }
        }
        Ok(())
    }
}

impl fmt::Display for Perversity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Perversity::Zero => write!(f, "zero"),
            Perversity::LowerMiddle => write!(f, "lower-middle"),
            Perversity::UpperMiddle => write!(f, "upper-middle"),
            Perversity::Top => write!(f, "top"),
            Perversity::Custom(v) => {
                let s: Vec<String> = v.iter().map(ToString::to_string).collect();
                write!(f, "{}", s.join(","))
            }
        }
    }
}

impl Serialize for Perversity {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub struct Cutoffs {
    /// `c = n − 1 − p̄(n)`.
    pub c: Degree,
    /// `K = m − p̄(m+1)`.
    pub k: Degree,
    /// `K∗ = m − q̄(m+1)`.
    pub kstar: Degree,
}

pub fn cutoffs(p: &Perversity, n: usize, m: usize) -> Result<Cutoffs, HiError> {
    if m + 1 < 2 || m + 1 > n {
        return Err(HiError::Perversity(format!(
            "need 2 ≤ m+1 ≤ n, got m = {}, n = {}",
            m, n
        )));
    }
    p.validate(n)?;
    let q = p.complement();
    Ok(Cutoffs {
        c: n as Degree - 1 - p.value(n)?,
        k: m as Degree - p.value(m + 1)?,
        kstar: m as Degree - q.value(m + 1)?,
    })
}

/// `M` with boundary `∂M = ⊔ L_i`, each `L_i` the link of an isolated point.
#[derive(Clone, Debug)]
pub struct IsolatedSingularitySpace {
    pub exterior: OrientedPseudomanifold,
    /// Each link as a subcomplex of `M`.
    pub links: Vec<Embedding>,
    /// Inner product on `C•(∂M)`, assembled from the link weights.
    pub boundary_ip: InnerProduct,
}

fn is_closed_pseudomanifold(k: &SimplicialComplex, d: usize) -> bool {
    if k.dim() != d as i32 || k.maximal_simplices().iter().any(|s| s.len() != d + 1) {
        return false;
    }
    if d == 0 {
        return true;
    }
    let mut count = vec![0usize; k.count(d - 1)];
    for s in k.simplices(d) {
        for i in 0..s.len() {
            count[k.index_of(&remove_at(s, i)).expect("closed")] += 1;
        }
    }
    count.iter().all(|&c| c == 2)
}

impl IsolatedSingularitySpace {
    /// `links`: generating simplices of each link in `M`'s vertex indices;
    /// `None` uses the connected components of `∂M`. `weights`: one inner
    /// product per link (all ones by default).
    pub fn new(
        exterior: OrientedPseudomanifold,
        links: Option<Vec<Vec<Simplex>>>,
        weights: Option<Vec<InnerProduct>>,
    ) -> Result<Self, HiError> {
        let m = &exterior.complex;
        let bd = &exterior.boundary;
        let n = exterior.dim;
        if n < 2 {
            return Err(HiError::Links("exterior must have dimension at least 2".into()));
        }
        let generators: Vec<Vec<Simplex>> = match links {
            Some(l) => l,
            None => bd
                .sub
                .components()
                .into_iter()
                .map(|comp| {
                    let vs: BTreeSet<usize> = comp.into_iter().collect();
                    bd.sub
                        .full_subcomplex_simplices(&vs)
                        .into_iter()
                        .map(|s| s.iter().map(|&v| bd.vertex_map[v]).collect())
                        .collect()
                })
                .collect(),
        };
        if generators.is_empty() {
            return Err(HiError::Links("no boundary components".into()));
        }
        let embeddings: Vec<Embedding> = generators
            .iter()
            .map(|g| m.induced_subcomplex(g))
            .collect::<Result<_, _>>()?;
        // (degree, M index) -> (link, link index)
        let mut owner: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for (li, e) in embeddings.iter().enumerate() {
            if !is_closed_pseudomanifold(&e.sub, n - 1) {
                return Err(HiError::Links(format!("link {} is not a closed pseudomanifold of dimension {}", li, n - 1)));
            }
            for d in 0..n {
                for (i, &j) in e.simplex_map(d).iter().enumerate() {
                    if owner.insert((d, j), (li, i)).is_some() {
                        return Err(HiError::Links(format!("link {} overlaps another link", li)));
                    }
                }
            }
        }
        let boundary_total: usize = bd.sub.f_vector().iter().sum();
        let covered = (0..n).all(|d| bd.simplex_map(d).iter().all(|&j| owner.contains_key(&(d, j))));
        if owner.len() != boundary_total || !covered {
            return Err(HiError::Links("links do not partition the boundary".into()));
        }
        let link_ips: Vec<InnerProduct> = match weights {
            Some(w) => {
                if w.len() != embeddings.len() {
                    return Err(HiError::Links("one inner product per link is required".into()));
                }
                for (ip, e) in w.iter().zip(&embeddings) {
                    ip.validate(&e.sub.cochain_complex())?;
                }
                w
            }
            None => embeddings.iter().map(|e| InnerProduct::ones(&e.sub.cochain_complex())).collect(),
        };
        let bc = bd.sub.cochain_complex();
        let w: Vec<Vec<Rational>> = bc
            .degrees()
            .map(|r| {
                bd.simplex_map(r as usize)
                    .iter()
                    .map(|&j| {
                        let (li, i) = owner[&(r as usize, j)];
                        link_ips[li].weights(r)[i].clone()
                    })
                    .collect()
            })
            .collect();
        let boundary_ip = InnerProduct::new(&bc, w)?;
        Ok(IsolatedSingularitySpace {
            exterior,
            links: embeddings,
            boundary_ip,
        })
    }

    pub fn dim(&self) -> usize {
        self.exterior.dim
    }

    pub fn complex(&self) -> &SimplicialComplex {
        &self.exterior.complex
    }

    pub fn boundary(&self) -> &Embedding {
        &self.exterior.boundary
    }
}

/// The HI complex `QI ⊂ C•(M)` and the two short exact sequences around it.
#[derive(Clone, Debug)]
pub struct HiComplex {
    pub cutoff: Degree,
    pub qi: Subcomplex,
    pub relative: Subcomplex,
    pub boundary_above: Subcomplex,
    pub boundary_below: Truncation,
    /// `C•(M, ∂M) → QI`.
    pub relative_to_qi: ComplexMap,
    /// `QI → τ_{≥c} C•(∂M)`.
    pub qi_to_boundary: ComplexMap,
    /// `C•(M) → τ_{<c} C•(∂M)`.
    pub truncated_restriction: ComplexMap,
    boundary_cochains: GradedComplex,
    boundary_ip: InnerProduct,
}

impl HiComplex {
    /// Whether a cochain on `M` restricts into `τ_{≥c}` on `∂M`, tested
    /// directly: zero below `c`, coclosed at `c`.
    pub fn contains(&self, space: &IsolatedSingularitySpace, omega: &Cochain) -> bool {
        let r = omega.degree as Degree;
        let restricted = space.boundary().restrict(omega).values;
        match r.cmp(&self.cutoff) {
            std::cmp::Ordering::Less => restricted.iter().all(Zero::is_zero),
            std::cmp::Ordering::Equal => codifferential(&self.boundary_cochains, &self.boundary_ip, r)
                .mul_vec(&restricted)
                .iter()
                .all(Zero::is_zero),
            std::cmp::Ordering::Greater => true,
        }
    }
}

/// `QI^k = {ω ∈ C^k(M) : ω|∂M ∈ τ_{≥c} C^k(∂M)}` for an explicit cutoff.
pub fn hi_complex_with_cutoff(space: &IsolatedSingularitySpace, c: Degree) -> Result<HiComplex, HiError> {
    let m = space.complex();
    let bd = space.boundary();
    let cm = m.cochain_complex();
    let bc = bd.sub.cochain_complex();
    let above = cotruncate(&bc, &space.boundary_ip, c)?;
    let below = truncate_below(&bc, &space.boundary_ip, c)?;
    let relative = relative_cochain_complex(m, bd)?;
    let spaces: Vec<Subspace> = cm
        .degrees()
        .map(|r| {
            let ext = &bd.extension_matrix(r as usize) * above.subspace(r).basis();
            Subspace::from_basis(ext.hstack(relative.subspace(r).basis())).expect("independent by support")
        })
        .collect();
    let qi = subcomplex_from_subspaces(&cm, &spaces)?;
    let restriction = bd.restriction(m);
    let relative_to_qi = ComplexMap::new(relative.complex.clone(), qi.complex.clone(), |r| {
        qi.subspace(r).coordinates_of(relative.subspace(r).basis()).expect("relative ⊂ QI")
    })?;
    let qi_to_boundary = ComplexMap::new(qi.complex.clone(), above.complex.clone(), |r| {
        let restricted = &*restriction.component(r) * qi.subspace(r).basis();
        above.subspace(r).coordinates_of(&restricted).expect("QI restricts into τ≥c")
    })?;
    let truncated_restriction = restriction.then(&below.projection)?;
    verify_ses(&relative_to_qi, &qi_to_boundary)?;
    verify_ses(&qi.inclusion, &truncated_restriction)?;
    Ok(HiComplex {
        cutoff: c,
        qi,
        relative,
        boundary_above: above,
        boundary_below: below,
        relative_to_qi,
        qi_to_boundary,
        truncated_restriction,
        boundary_cochains: bc,
        boundary_ip: space.boundary_ip.clone(),
    })
}

pub fn hi_complex_isolated(space: &IsolatedSingularitySpace, p: &Perversity) -> Result<HiComplex, HiError> {
    let n = space.dim();
    let c = cutoffs(p, n, n - 1)?.c;
    hi_complex_with_cutoff(space, c)
}

#[derive(Clone, Debug, Serialize)]
pub struct HiResult {
    pub perversity: Option<Perversity>,
    pub cutoff: Degree,
    pub betti: Vec<usize>,
    /// Both long exact sequences (with `H(M, ∂M)` and with `H(M)`) verified.
    pub les_exact: bool,
    /// Representative cocycles on `M`, one column per class, per degree.
    #[serde(skip)]
    pub representatives: Vec<RationalMatrix>,
}

/// HI groups together with the data needed for products and pairings.
#[derive(Clone, Debug)]
pub struct HiGroups {
    pub complex: HiComplex,
    pub classes: Vec<CohomologyResult>,
    pub result: HiResult,
}

impl HiGroups {
    /// Representative on `M` of the class with coordinates `coords` in degree `r`.
    pub fn representative(&self, r: usize, coords: &[Rational]) -> Cochain {
        Cochain::new(r, self.result.representatives[r].mul_vec(coords))
    }
}

pub fn hi_groups_with_cutoff(space: &IsolatedSingularitySpace, c: Degree, p: Option<&Perversity>) -> Result<HiGroups, HiError> {
    let complex = hi_complex_with_cutoff(space, c)?;
    let n = space.dim() as Degree;
    let classes: Vec<CohomologyResult> = (0..=n).map(|r| cohomology(&complex.qi.complex, r)).collect();
    let representatives = classes
        .iter()
        .enumerate()
        .map(|(r, h)| &*complex.qi.inclusion.component(r as Degree) * h.representatives())
        .collect();
    let les1 = les_of_ses(&complex.relative_to_qi, &complex.qi_to_boundary, ["H(M,∂M)", "HI", "H(τ≥c ∂M)"])?;
    let les2 = les_of_ses(&complex.qi.inclusion, &complex.truncated_restriction, ["HI", "H(M)", "H(τ<c ∂M)"])?;
    let result = HiResult {
        perversity: p.cloned(),
        cutoff: c,
        betti: classes.iter().map(|h| h.betti).collect(),
        les_exact: les1.verify().exact && les2.verify().exact,
        representatives,
    };
    Ok(HiGroups { complex, classes, result })
}

pub fn hi_groups(space: &IsolatedSingularitySpace, p: &Perversity) -> Result<HiGroups, HiError> {
    let n = space.dim();
    let c = cutoffs(p, n, n - 1)?.c;
    hi_groups_with_cutoff(space, c, Some(p))
}

/// HI dimensions from the sequence `H^{r−1}(τ_{≥c}∂M) → H^r(M,∂M) → HI^r →
/// H^r(τ_{≥c}∂M) → H^{r+1}(M,∂M)`, without building `QI`.
pub fn hi_betti_via_les(space: &IsolatedSingularitySpace, c: Degree) -> Result<Vec<usize>, HiError> {
    let m = space.complex();
    let bd = space.boundary();
    let bc = bd.sub.cochain_complex();
    let above = cotruncate(&bc, &space.boundary_ip, c)?;
    let relative = relative_cochain_complex(m, bd)?;
    let restriction = bd.restriction(m);
    let n = space.dim() as Degree;
    let maps: Vec<RationalMatrix> = (-1..=n)
        .map(|r| -> Result<RationalMatrix, HiError> {
            let delta = ses_connecting(&relative.inclusion, &restriction, r)?;
            Ok(&delta * &map_on_cohomology(&above.inclusion, r))
        })
        .collect::<Result<_, _>>()?;
    Ok((0..=n)
        .map(|r| {
            let before = &maps[r as usize];
            let after = &maps[r as usize + 1];
            relative.complex.betti_at(r) - before.rank() + above.complex.betti_at(r) - after.rank()
        })
        .collect())
}

/// Cup product of two HI classes, returned as class coordinates.
pub fn hi_cup(
    space: &IsolatedSingularitySpace,
    groups: &HiGroups,
    r: usize,
    a: &[Rational],
    s: usize,
    b: &[Rational],
) -> Result<Vec<Rational>, HiError> {
    let n = space.dim();
    if r + s > n {
        return Ok(Vec::new());
    }
    let m = space.complex();
    let prod = m.cup(&groups.representative(r, a), &groups.representative(s, b))?;
    if !groups.complex.contains(space, &prod) {
        return Err(HiError::NotInQi((r + s) as Degree));
    }
    let coords = groups
        .complex
        .qi
        .subspace((r + s) as Degree)
        .coordinates(&prod.values)?
        .ok_or(HiError::NotInQi((r + s) as Degree))?;
    Ok(groups.classes[r + s].coordinates(&coords)?)
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct CupClosure {
    pub pairs_checked: usize,
    pub failures: Vec<(usize, usize, usize, usize)>,
    pub closed: bool,
}

/// Cups of all pairs of `QI` basis cochains stay in `QI`.
pub fn qi_cup_closure_check(space: &IsolatedSingularitySpace, complex: &HiComplex) -> Result<CupClosure, HiError> {
    let m = space.complex();
    let n = space.dim();
    let basis: Vec<Vec<Cochain>> = (0..=n)
        .map(|r| {
            let s = complex.qi.subspace(r as Degree);
            (0..s.dim()).map(|i| Cochain::new(r, s.basis_vector(i))).collect()
        })
        .collect();
    let mut pairs_checked = 0;
    let mut failures = Vec::new();
    for r in 0..=n {
        for s in 0..=n - r {
            for (i, a) in basis[r].iter().enumerate() {
                for (j, b) in basis[s].iter().enumerate() {
                    pairs_checked += 1;
                    if !complex.contains(space, &m.cup(a, b)?) {
                        failures.push((r, i, s, j));
                    }
                }
            }
        }
    }
    Ok(CupClosure {
        pairs_checked,
        closed: failures.is_empty(),
        failures,
    })
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct CochainPairingCheck {
    pub pairs_checked: usize,
    pub violations: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairingReport {
    pub p: Perversity,
    pub q: Perversity,
    pub cutoffs: (Degree, Degree),
    pub matrices: Vec<PairingMatrix>,
    pub nondegenerate: bool,
    pub cochain_check: CochainPairingCheck,
}

/// `HI^r_p̄ × HI^{n−r}_q̄ → ℚ`, `([ω], [η]) ↦ ⟨ω ∪ η, [M]⟩`.
pub fn hi_pairing(space: &IsolatedSingularitySpace, p: &Perversity, q: &Perversity) -> Result<PairingReport, HiError> {
    let n = space.dim();
    p.validate(n)?;
    q.validate(n)?;
    p.is_complementary(q, n)?;
    let gp = hi_groups(space, p)?;
    let gq = hi_groups(space, q)?;
    let m = space.complex();
    let z = space.exterior.fundamental_chain();
    let mut matrices = Vec::new();
    for r in 0..=n {
        let a = &gp.result.representatives[r];
        let b = &gq.result.representatives[n - r];
        let matrix = RationalMatrix::from_fn(a.cols(), b.cols(), |i, j| {
            let prod = m
                .cup(&Cochain::new(r, a.column(i)), &Cochain::new(n - r, b.column(j)))
                .expect("degrees fit");
            m.evaluate(&prod, &z).expect("top degree")
        });
        matrices.push(PairingMatrix::new(r as Degree, matrix));
    }
    let cochain_check = pairing_cochain_check(space, &gp.complex, &gq.complex);
    Ok(PairingReport {
        p: p.clone(),
        q: q.clone(),
        cutoffs: (gp.complex.cutoff, gq.complex.cutoff),
        nondegenerate: matrices.iter().all(|x| x.nondegenerate),
        matrices,
        cochain_check,
    })
}

/// For `ν ∈ QI_p̄^{r−1}`, `η ∈ QI_q̄^{n−r}` one of the boundary restrictions
/// vanishes, so `⟨d(ν ∪ η), [M]⟩ = 0`.
pub fn pairing_cochain_check(space: &IsolatedSingularitySpace, qp: &HiComplex, qq: &HiComplex) -> CochainPairingCheck {
    let bd = space.boundary();
    let n = space.dim();
    let restricted_zero = |h: &HiComplex, r: usize| -> Vec<bool> {
        let s = h.qi.subspace(r as Degree);
        let res = &bd.restriction_matrix(r) * s.basis();
        (0..s.dim()).map(|i| res.column(i).iter().all(Zero::is_zero)).collect()
    };
    let mut pairs_checked = 0;
    let mut violations = 0;
    for r in 1..=n {
        let zp = restricted_zero(qp, r - 1);
        let zq = restricted_zero(qq, n - r);
        for &a in &zp {
            for &b in &zq {
                pairs_checked += 1;
                if !a && !b {
                    violations += 1;
                }
            }
        }
    }
    CochainPairingCheck {
        pairs_checked,
        violations,
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct DeRhamReport {
    pub perversity: Perversity,
    pub cutoff: Degree,
    pub hi: Vec<usize>,
    pub intersection_space_homology: Vec<usize>,
    pub equal: bool,
    /// Some link has nonzero first homology.
    pub link_h1_warning: bool,
}

/// Compares `dim HI^r` with the homology of the cone of
/// `⊕_i H_•(t_{<c} L_i) → H_•(M)`.
pub fn derham_crosscheck(space: &IsolatedSingularitySpace, p: &Perversity) -> Result<DeRhamReport, HiError> {
    let groups = hi_groups(space, p)?;
    let c = groups.complex.cutoff;
    let m = space.complex();
    let n = space.dim() as Degree;
    let mc = m.chain_complex();
    let incls: Vec<(GradedComplex, ComplexMap)> = space
        .links
        .iter()
        .map(|e| {
            let lc = e.sub.chain_complex();
            let map = ComplexMap::new(lc.clone(), mc.clone(), |deg| e.extension_matrix((-deg) as usize))?;
            Ok((lc, map))
        })
        .collect::<Result<_, ChainError>>()?;
    // g_r : ⊕ H_r(t_{<c} L_i) → H_r(M)
    let g = |r: Degree| -> (usize, RationalMatrix) {
        let rows = mc.betti_at(-r);
        let mut mat = RationalMatrix::zeros(rows, 0);
        let mut source = 0;
        if r >= 0 && r < c {
            for (lc, map) in &incls {
                source += lc.betti_at(-r);
                mat = mat.hstack(&map_on_cohomology(map, -r));
            }
        }
        (source, mat)
    };
    let homology: Vec<usize> = (0..=n)
        .map(|r| {
            let (_, now) = g(r);
            let (src_before, before) = g(r - 1);
            (mc.betti_at(-r) - now.rank()) + (src_before - before.rank())
        })
        .collect();
    let link_h1_warning = incls.iter().any(|(lc, _)| lc.betti_at(-1) > 0);
    Ok(DeRhamReport {
        perversity: p.clone(),
        cutoff: c,
        equal: homology == groups.result.betti,
        hi: groups.result.betti,
        intersection_space_homology: homology,
        link_h1_warning,
    })
}

/// `M` whose boundary is identified with a realization of a flat bundle.
#[derive(Clone, Debug)]
pub struct DepthOneSpace {
    pub exterior: OrientedPseudomanifold,
    pub bundle: FlatBundleSystem,
    pub realization: Realization,
    /// `∂M → E`, a simplicial isomorphism.
    pub identification: SimplicialMap,
}

impl DepthOneSpace {
    /// `realized_to_m[v]` is the vertex of `M` matched with vertex `v` of the
    /// realized total space; `None` matches by label.
    pub fn new(
        exterior: OrientedPseudomanifold,
        bundle: FlatBundleSystem,
        realization: Realization,
        realized_to_m: Option<Vec<usize>>,
    ) -> Result<Self, HiError> {
        let bd = &exterior.boundary;
        let e = &realization.complex;
        let n_e = e.n_vertices();
        let to_m = match realized_to_m {
            Some(v) => v,
            None => {
                let by_label: HashMap<&str, usize> = exterior
                    .complex
                    .labels()
                    .iter()
                    .enumerate()
                    .map(|(i, l)| (l.as_str(), i))
                    .collect();
                (0..n_e)
                    .map(|v| {
                        by_label.get(e.label(v)).copied().ok_or_else(|| {
                            HiError::Identification(format!("no vertex of M labelled {:?}", e.label(v)))
                        })
                    })
                    .collect::<Result<_, _>>()?
            }
        };
        if to_m.len() != n_e || bd.sub.n_vertices() != n_e {
            return Err(HiError::Identification(format!(
                "realization has {} vertices, boundary has {}",
                n_e,
                bd.sub.n_vertices()
            )));
        }
        // boundary vertex -> realized vertex
        let mut inverse = vec![usize::MAX; n_e];
        for (v, &w) in to_m.iter().enumerate() {
            let b = bd.vertex_map.binary_search(&w).map_err(|_| {
                HiError::Identification(format!("vertex {:?} of M is not on the boundary", exterior.complex.label(w.min(exterior.complex.n_vertices().saturating_sub(1)))))
            })?;
            if inverse[b] != usize::MAX {
                return Err(HiError::Identification("vertex map is not injective".into()));
            }
            inverse[b] = v;
        }
        let identification = SimplicialMap::new(&bd.sub, e, inverse)
            .map_err(|err| HiError::Identification(err.to_string()))?;
        if bd.sub.f_vector() != e.f_vector() {
            return Err(HiError::Identification("boundary and realization have different f-vectors".into()));
        }
        Ok(DepthOneSpace {
            exterior,
            bundle,
            realization,
            identification,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DepthOneResult {
    pub perversity: Perversity,
    pub k: Degree,
    pub betti: Vec<usize>,
    pub relative_betti: Vec<usize>,
    pub structured_betti: Vec<usize>,
    /// Ranks of `H^r(ft_{≥K}) → H^{r+1}(M, ∂M)`.
    pub connecting_ranks: Vec<usize>,
    #[serde(skip)]
    pub representatives: Vec<RationalMatrix>,
}

/// `HI^r = coker(H^{r−1}(ft_{≥K}) → H^r(M,∂M)) ⊕ ker(H^r(ft_{≥K}) → H^{r+1}(M,∂M))`.
pub fn hi_groups_depth1(space: &DepthOneSpace, p: &Perversity) -> Result<DepthOneResult, HiError> {
    let n = space.exterior.dim;
    let m = space.bundle.fiber_dim();
    let k = cutoffs(p, n, m)?.k;
    hi_groups_depth1_with_cutoff(space, k, p)
}

pub fn hi_groups_depth1_with_cutoff(space: &DepthOneSpace, k: Degree, p: &Perversity) -> Result<DepthOneResult, HiError> {
    let mc = &space.exterior.complex;
    let bd = &space.exterior.boundary;
    let n = space.exterior.dim as Degree;
    let realized = realize_structured_classes(&space.bundle, &space.realization, Selector::AtOrAbove(k))?;
    let to_boundary = space.identification.pullback(&bd.sub, &space.realization.complex);
    let composite = realized.map.then(&to_boundary)?;
    let structured = composite.source().clone();
    let relative = relative_cochain_complex(mc, bd)?;
    let restriction = bd.restriction(mc);
    let cm = mc.cochain_complex();
    // maps[r + 1] : H^r(ft) → H^{r+1}(M, ∂M), r = −1 ..= n
    let maps: Vec<RationalMatrix> = (-1..=n)
        .map(|r| -> Result<RationalMatrix, HiError> {
            let delta = ses_connecting(&relative.inclusion, &restriction, r)?;
            Ok(&delta * &map_on_cohomology(&composite, r))
        })
        .collect::<Result<_, _>>()?;
    let mut betti = Vec::new();
    let mut representatives = Vec::new();
    for r in 0..=n {
        let before = &maps[r as usize];
        let after = &maps[r as usize + 1];
        let hrel = cohomology(&relative.complex, r);
        let hft = cohomology(&structured, r);
        // cokernel part
        let image = Subspace::span(before);
        let complement = image.complement_in(&Subspace::full(hrel.betti))?;
        let coker_reps = &(&*relative.inclusion.component(r) * hrel.representatives()) * complement.basis();
        // kernel part: extend the boundary cocycle and correct by a relative cochain
        let kernel = kernel_basis(after);
        let w = &(&*composite.component(r) * hft.representatives()) * kernel.basis();
        let extended = &bd.extension_matrix(r as usize) * &w;
        let dw = &*cm.differential(r) * &extended;
        let dw_rel = relative.subspace(r + 1).coordinates_of(&dw)?;
        let u = solve(&relative.complex.differential(r), &dw_rel).ok_or(ChainError::NotExact {
            degree: r,
            kind: crate::chaincomplex::ExactnessFailure::ImageNotKernel,
        })?;
        let ker_reps = &extended - &(&*relative.inclusion.component(r) * &u);
        betti.push(complement.dim() + kernel.dim());
        representatives.push(coker_reps.hstack(&ker_reps));
    }
    Ok(DepthOneResult {
        perversity: p.clone(),
        k,
        betti,
        relative_betti: relative.complex.betti_range(0, n),
        structured_betti: structured.betti_range(0, n),
        connecting_ranks: maps[1..].iter().map(RationalMatrix::rank).collect(),
        representatives,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, *};
    use crate::flatbundle::{build_system, realize, RealizationKind};
    use crate::ratlinalg::rat;
    use crate::simplicial::{fundamental_cycle, mapping_torus};

    fn isolated(m: SimplicialComplex) -> IsolatedSingularitySpace {
        IsolatedSingularitySpace::new(fundamental_cycle(&m).unwrap(), None, None).unwrap()
    }

    #[test]
    fn perversity_values_and_cutoffs() {
        assert_eq!(cutoffs(&Perversity::LowerMiddle, 3, 2).unwrap().c, 2);
        assert_eq!(cutoffs(&Perversity::LowerMiddle.complement(), 3, 2).unwrap().c, 1);
        for n in 2..7 {
            assert_eq!(cutoffs(&Perversity::Zero, n, n - 1).unwrap().c, n as Degree - 1);
            for p in Perversity::presets() {
                let c = cutoffs(&p, n, n - 1).unwrap();
                assert_eq!(c.k + c.kstar, n as Degree);
                p.is_complementary(&p.complement(), n).unwrap();
            }
        }
        assert_eq!(Perversity::parse("0,0,1").unwrap().value(4).unwrap(), 1);
        assert!(Perversity::parse("0,2").is_err());
        assert!(Perversity::parse("1").is_err());
        assert!(matches!(Perversity::parse("m").unwrap(), Perversity::LowerMiddle));
        assert!(cutoffs(&Perversity::parse("0,1").unwrap(), 4, 3).is_err());
    }

    #[test]
    fn isolated_examples() {
        let cases = [
            (simplex(3), Perversity::LowerMiddle, vec![0, 0, 0, 0]),
            (solid_torus(), Perversity::LowerMiddle, vec![0, 0, 1, 0]),
            (solid_torus(), Perversity::UpperMiddle, vec![0, 1, 0, 0]),
            (torus_interval(), Perversity::LowerMiddle, vec![0, 1, 3, 0]),
            (torus_interval(), Perversity::UpperMiddle, vec![0, 3, 1, 0]),
        ];
        for (m, p, want) in cases {
            let space = isolated(m);
            let g = hi_groups(&space, &p).unwrap();
            assert_eq!(g.result.betti, want, "{p}");
            assert!(g.result.les_exact);
        }
    }

    #[test]
    fn suspension_has_two_links() {
        assert_eq!(isolated(torus_interval()).links.len(), 2);
    }

    #[test]
    fn qi_dimension_bookkeeping() {
        let space = isolated(solid_torus());
        let h = hi_complex_isolated(&space, &Perversity::LowerMiddle).unwrap();
        let rel2 = h.relative.complex.dim(2);
        let coclosed = h.boundary_above.complex.dim(2);
        assert_eq!(h.qi.complex.dim(2), rel2 + coclosed);
    }

    #[test]
    fn endpoint_cutoffs() {
        for m in [solid_torus(), torus_interval(), simplex(3)] {
            let space = isolated(m);
            let n = space.dim() as Degree;
            let full = hi_groups_with_cutoff(&space, 0, None).unwrap();
            assert_eq!(full.result.betti, space.complex().cochain_complex().betti_range(0, n));
            let rel = hi_groups_with_cutoff(&space, n, None).unwrap();
            let relative = relative_cochain_complex(space.complex(), space.boundary()).unwrap();
            assert_eq!(rel.result.betti, relative.complex.betti_range(0, n));
        }
    }

    #[test]
    fn les_description_for_every_cutoff() {
        for m in [solid_torus(), torus_interval()] {
            let space = isolated(m);
            for c in -1..=space.dim() as Degree + 1 {
                let direct = hi_groups_with_cutoff(&space, c, None).unwrap().result.betti;
                assert_eq!(hi_betti_via_les(&space, c).unwrap(), direct, "c = {c}");
            }
        }
    }

    #[test]
    fn cup_products() {
        let space = isolated(torus_interval());
        let g = hi_groups(&space, &Perversity::UpperMiddle).unwrap();
        // HI¹ has dimension 3; all cups of degree-one classes are computable
        let e = |i: usize| -> Vec<Rational> { (0..3).map(|j| rat((i == j) as i64)).collect() };
        let mut products = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                products.push(hi_cup(&space, &g, 1, &e(i), 1, &e(j)).unwrap());
            }
        }
        assert!(products.iter().all(|v| v.len() == 1));
        // stable across recomputation
        let g2 = hi_groups(&space, &Perversity::UpperMiddle).unwrap();
        assert_eq!(hi_cup(&space, &g2, 1, &e(0), 1, &e(1)).unwrap(), products[1]);
        assert!(hi_cup(&space, &g, 2, &[rat(1)], 2, &[rat(1)]).unwrap().is_empty());
        // graded commutativity on cohomology
        for i in 0..3 {
            for j in 0..3 {
                let ab = &products[3 * i + j];
                let ba = &products[3 * j + i];
                assert_eq!(ab[0], -ba[0].clone());
            }
        }
    }

    #[test]
    fn unit_class_when_present() {
        let space = isolated(solid_torus());
        let g = hi_groups_with_cutoff(&space, 0, None).unwrap();
        assert_eq!(g.result.betti[0], 1);
        let unit_coords = g.classes[0].coordinates(&g.complex.qi.subspace(0).coordinates(&space.complex().unit().values).unwrap().unwrap()).unwrap();
        let h1 = g.result.betti[1];
        for i in 0..h1 {
            let a: Vec<Rational> = (0..h1).map(|j| rat((i == j) as i64)).collect();
            assert_eq!(hi_cup(&space, &g, 0, &unit_coords, 1, &a).unwrap(), a);
        }
    }

    #[test]
    fn cup_closure_exhaustive() {
        for m in [simplex(3), solid_torus(), torus_interval()] {
            let space = isolated(m);
            for p in Perversity::presets() {
                let h = hi_complex_isolated(&space, &p).unwrap();
                let report = qi_cup_closure_check(&space, &h).unwrap();
                assert!(report.closed, "{p}");
            }
        }
    }

    #[test]
    fn pairings() {
        let space = isolated(solid_torus());
        let r = hi_pairing(&space, &Perversity::LowerMiddle, &Perversity::UpperMiddle).unwrap();
        assert!(r.nondegenerate);
        assert_eq!((r.matrices[2].rows, r.matrices[2].cols), (1, 1));
        assert_eq!(r.cochain_check.violations, 0);
        let space = isolated(torus_interval());
        let r = hi_pairing(&space, &Perversity::LowerMiddle, &Perversity::UpperMiddle).unwrap();
        assert!(r.nondegenerate);
        assert_eq!((r.matrices[2].rows, r.matrices[2].cols, r.matrices[2].rank), (3, 3, 3));
        assert_eq!(r.matrices[0].rows, 0);
        assert!(matches!(
            hi_pairing(&space, &Perversity::LowerMiddle, &Perversity::LowerMiddle),
            Err(HiError::NotComplementary { .. })
        ));
    }

    #[test]
    fn derham_examples() {
        for (m, want) in [
            (simplex(3), vec![0, 0, 0, 0]),
            (solid_torus(), vec![0, 0, 1, 0]),
            (torus_interval(), vec![0, 1, 3, 0]),
        ] {
            let r = derham_crosscheck(&isolated(m), &Perversity::LowerMiddle).unwrap();
            assert!(r.equal);
            assert_eq!(r.intersection_space_homology, want);
        }
        for m in [simplex(3), solid_torus(), torus_interval()] {
            let space = isolated(m);
            for p in Perversity::presets() {
                assert!(derham_crosscheck(&space, &p).unwrap().equal, "{p}");
            }
        }
        let r = derham_crosscheck(&isolated(simplex(3)), &Perversity::LowerMiddle).unwrap();
        assert!(!r.link_h1_warning);
        let r = derham_crosscheck(&isolated(solid_torus()), &Perversity::LowerMiddle).unwrap();
        assert!(r.link_h1_warning);
    }

    #[test]
    fn link_validation() {
        let ext = fundamental_cycle(&torus_interval()).unwrap();
        let one_torus: Vec<Simplex> = ext.boundary.sub.simplices(2).iter().take(18).map(|s| s.iter().map(|&v| ext.boundary.vertex_map[v]).collect()).collect();
        assert!(matches!(
            IsolatedSingularitySpace::new(ext.clone(), Some(vec![one_torus]), None),
            Err(HiError::Links(_))
        ));
        assert!(matches!(
            IsolatedSingularitySpace::new(ext, None, Some(vec![])),
            Err(HiError::Links(_))
        ));
    }

    fn depth_one(m: SimplicialComplex, sys: FlatBundleSystem, kind: RealizationKind) -> DepthOneSpace {
        let real = realize(&sys, kind).unwrap();
        DepthOneSpace::new(fundamental_cycle(&m).unwrap(), sys, real, None).unwrap()
    }

    #[test]
    fn depth_one_examples() {
        let s2s1 = depth_one(solid_torus(), trivial_torus_system(), RealizationKind::Product);
        let r = hi_groups_depth1(&s2s1, &Perversity::LowerMiddle).unwrap();
        assert_eq!(r.k, 1);
        assert_eq!(r.betti, vec![0, 0, 0, 0]);

        let sphere_bundle = build_system(circle(3), sphere2(), None, Default::default()).unwrap();
        let d3s1 = depth_one(circle_times_ball(), sphere_bundle, RealizationKind::Product);
        let r = hi_groups_depth1(&d3s1, &Perversity::LowerMiddle).unwrap();
        assert_eq!(r.k, 2);
        assert_eq!(r.structured_betti, vec![0, 0, 1, 1, 0]);
        assert_eq!(r.relative_betti, vec![0, 0, 0, 1, 1]);
        assert_eq!(r.betti, vec![0, 0, 0, 0, 0]);
    }

    #[test]
    fn depth_one_low_cutoff_gives_cohomology_of_m() {
        let s2s1 = depth_one(solid_torus(), trivial_torus_system(), RealizationKind::Product);
        let r = hi_groups_depth1_with_cutoff(&s2s1, 0, &Perversity::Zero).unwrap();
        assert_eq!(r.betti, solid_torus().cochain_complex().betti_range(0, 3));
    }

    #[test]
    fn depth_one_representatives_are_cocycles() {
        let sphere_bundle = build_system(circle(3), sphere2(), None, Default::default()).unwrap();
        let space = depth_one(circle_times_ball(), sphere_bundle, RealizationKind::Product);
        for k in 0..=3 {
            let r = hi_groups_depth1_with_cutoff(&space, k, &Perversity::Zero).unwrap();
            let c = space.exterior.complex.cochain_complex();
            for (deg, reps) in r.representatives.iter().enumerate() {
                assert_eq!(reps.cols(), r.betti[deg]);
                assert!((&*c.differential(deg as Degree) * reps).is_zero());
                assert_eq!(reps.rank(), reps.cols());
            }
        }
    }

    #[test]
    fn mapping_torus_depth_one() {
        // solid tori with twisted gluing: rotation and reflection of the disc
        for (perm, twist) in [
            (vec![1, 2, 0], circle_rotation(3, 2)),
            (vec![0, 2, 1], fixtures::circle_reflection(3)),
        ] {
            let disc = simplex(2);
            let f = SimplicialMap::automorphism(&disc, perm).unwrap();
            let m = mapping_torus(&disc, &f, 3).unwrap().complex;
            let sys = build_system(circle(3), circle(3), None, [((0, 2), twist)].into()).unwrap();
            let real = realize(&sys, RealizationKind::MappingTorus).unwrap();
            let ext = match fundamental_cycle(&m) {
                Ok(e) => e,
                Err(_) => continue,
            };
            let space = DepthOneSpace::new(ext, sys, real, None).unwrap();
            let r = hi_groups_depth1(&space, &Perversity::LowerMiddle).unwrap();
            assert_eq!(r.betti, vec![0, 0, 0, 0]);
        }
    }

    #[test]
    fn point_base_reproduces_isolated_hi() {
        for m in [simplex(3), solid_torus(), torus_interval()] {
            let ext = fundamental_cycle(&m).unwrap();
            let fiber = ext.boundary.sub.clone();
            let sys = build_system(point(), fiber, None, Default::default()).unwrap();
            let real = realize(&sys, RealizationKind::Product).unwrap();
            let to_m = ext.boundary.vertex_map.clone();
            let space = DepthOneSpace::new(ext.clone(), sys, real, Some(to_m)).unwrap();
            let iso = IsolatedSingularitySpace::new(ext, None, None).unwrap();
            for p in Perversity::presets() {
                let depth = hi_groups_depth1(&space, &p).unwrap();
                let direct = hi_groups(&iso, &p).unwrap();
                assert_eq!(depth.betti, direct.result.betti, "{p}");
            }
        }
    }

    #[test]
    fn identification_mismatch() {
        let sys = trivial_torus_system();
        let real = realize(&sys, RealizationKind::Product).unwrap();
        let ext = fundamental_cycle(&circle_times_ball()).unwrap();
        assert!(matches!(
            DepthOneSpace::new(ext, sys, real, None),
            Err(HiError::Identification(_))
        ));
    }
}

