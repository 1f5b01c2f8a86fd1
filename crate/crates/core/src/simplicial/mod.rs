//! Ordered abstract simplicial complexes and their cochains.
//!
//! Vertices are numbered `0..n` and that numbering is the global vertex
//! order. A simplex is stored as its strictly increasing vertex list, which
//! also fixes its orientation. Simplices of each dimension are kept in
//! lexicographic order; cochain vectors are indexed in that order.

mod orientation;
mod product;
mod torus;

use std::collections::{BTreeSet, HashMap};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::chaincomplex::{
    subcomplex_from_subspaces, ChainError, ComplexMap, Degree, GradedComplex, Subcomplex,
};
use crate::ratlinalg::{rat, Rational, RationalMatrix, Subspace};

pub use orientation::{fundamental_cycle, OrientedPseudomanifold};
pub use product::{ordered_product, Product};
pub use torus::{mapping_torus, MappingTorus};

/// Strictly increasing vertex list.
pub type Simplex = Vec<usize>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimplicialError {
    #[error("simplex {0:?} repeats a vertex")]
    RepeatedVertex(Vec<String>),
    #[error("unknown vertex label {0:?}")]
    UnknownVertex(String),
    #[error("duplicate vertex label {0:?}")]
    DuplicateLabel(String),
    #[error("vertex index {0} out of range")]
    VertexOutOfRange(usize),
    #[error("simplex {0:?} is not in the ambient complex")]
    NotASubcomplex(Vec<String>),
    #[error("vertex map sends simplex {0:?} to a non-simplex")]
    NotSimplicial(Vec<String>),
    #[error("vertex map is not an automorphism: {0}")]
    NotAutomorphism(String),
    #[error("not a pseudomanifold: face {face:?} lies in {count} top simplices")]
    NotPseudomanifold { face: Vec<String>, count: usize },
    #[error("non-orientable: orientation propagation contradicts itself at simplex {0:?}")]
    NonOrientable(Vec<String>),
    #[error("supplied orientation cycle is invalid: {0}")]
    BadOrientation(String),
    #[error("cochain has {found} values, complex has {expected} simplices of dimension {degree}")]
    ComplexMismatch {
        degree: usize,
        expected: usize,
        found: usize,
    },
    #[error("degree mismatch: cochain of degree {cochain}, chain of degree {chain}")]
    DegreeMismatch { cochain: usize, chain: usize },
    #[error("mapping torus needs at least 3 layers, got {0}")]
    TooFewLayers(usize),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialComplex {
    labels: Vec<String>,
    simplices: Vec<Vec<Simplex>>,
    index: Vec<HashMap<Simplex, usize>>,
}

impl SimplicialComplex {
    /// Closure of the given simplices over vertices `0..labels.len()`.
    /// Every listed vertex becomes a 0-simplex.
    pub fn from_simplices(
        labels: Vec<String>,
        simplices: &[Vec<usize>],
    ) -> Result<Self, SimplicialError> {
        let mut seen = BTreeSet::new();
        for l in &labels {
            if !seen.insert(l.clone()) {
                return Err(SimplicialError::DuplicateLabel(l.clone()));
            }
        }
        let n = labels.len();
        let mut by_dim: Vec<BTreeSet<Simplex>> = Vec::new();
        let add = |s: Simplex, by_dim: &mut Vec<BTreeSet<Simplex>>| {
            let d = s.len() - 1;
            while by_dim.len() <= d {
                by_dim.push(BTreeSet::new());
            }
            by_dim[d].insert(s);
        };
        for v in 0..n {
            add(vec![v], &mut by_dim);
        }
        for s in simplices {
            if let Some(&v) = s.iter().find(|&&v| v >= n) {
                return Err(SimplicialError::VertexOutOfRange(v));
            }
            let mut sorted = s.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != s.len() {
                return Err(SimplicialError::RepeatedVertex(
                    s.iter().map(|&v| labels[v].clone()).collect(),
                ));
            }
            if sorted.is_empty() {
                continue;
            }
            if by_dim
                .get(sorted.len() - 1)
                .is_some_and(|set| set.contains(&sorted))
            {
                continue;
            }
            let k = sorted.len();
            for mask in 1u64..(1u64 << k) {
                let face: Simplex = (0..k)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| sorted[i])
                    .collect();
                add(face, &mut by_dim);
            }
        }
        let simplices: Vec<Vec<Simplex>> = by_dim.into_iter().map(|s| s.into_iter().collect()).collect();
        let index = simplices
            .iter()
            .map(|level| level.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect())
            .collect();
        Ok(SimplicialComplex {
            labels,
            simplices,
            index,
        })
    }

    /// Builds a complex from vertex labels and simplices given by label.
    pub fn build<S: AsRef<str>>(
        vertices: &[S],
        simplices: &[Vec<S>],
    ) -> Result<Self, SimplicialError> {
        let labels: Vec<String> = vertices.iter().map(|v| v.as_ref().to_string()).collect();
        let lookup: HashMap<&str, usize> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect();
        let mut idx = Vec::with_capacity(simplices.len());
        for s in simplices {
            let mut v = Vec::with_capacity(s.len());
            for l in s {
                let l = l.as_ref();
                v.push(
                    *lookup
                        .get(l)
                        .ok_or_else(|| SimplicialError::UnknownVertex(l.to_string()))?,
                );
            }
            idx.push(v);
        }
        Self::from_simplices(labels, &idx)
    }

    /// Vertices labelled `0..n`, simplices given by index.
    pub fn from_indices(n_vertices: usize, simplices: &[Vec<usize>]) -> Result<Self, SimplicialError> {
        Self::from_simplices((0..n_vertices).map(|i| i.to_string()).collect(), simplices)
    }

    pub fn empty() -> Self {
        SimplicialComplex {
            labels: Vec::new(),
            simplices: Vec::new(),
            index: Vec::new(),
        }
    }

    /// Dimension, or `-1` for the empty complex.
    pub fn dim(&self) -> i32 {
        self.simplices.len() as i32 - 1
    }

    pub fn n_vertices(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn simplex_labels(&self, s: &[usize]) -> Vec<String> {
        s.iter().map(|&v| self.labels[v].clone()).collect()
    }

    pub fn simplices(&self, d: usize) -> &[Simplex] {
        self.simplices.get(d).map_or(&[], |v| v.as_slice())
    }

    pub fn count(&self, d: usize) -> usize {
        self.simplices(d).len()
    }

    pub fn f_vector(&self) -> Vec<usize> {
        self.simplices.iter().map(Vec::len).collect()
    }

    pub fn index_of(&self, s: &[usize]) -> Option<usize> {
        if s.is_empty() {
            return None;
        }
        self.index.get(s.len() - 1)?.get(s).copied()
    }

    pub fn contains(&self, s: &[usize]) -> bool {
        self.index_of(s).is_some()
    }

    /// Simplices not properly contained in another simplex.
    pub fn maximal_simplices(&self) -> Vec<Simplex> {
        let mut out = Vec::new();
        for d in 0..self.simplices.len() {
            let mut covered = vec![false; self.count(d)];
            for t in self.simplices(d + 1) {
                for i in 0..t.len() {
                    let face = remove_at(t, i);
                    covered[self.index[d][&face]] = true;
                }
            }
            out.extend(
                self.simplices(d)
                    .iter()
                    .zip(covered)
                    .filter(|(_, c)| !c)
                    .map(|(s, _)| s.clone()),
            );
        }
        out
    }

    /// Coboundary matrix `δ^r: C^r → C^{r+1}`, `δ(σ)(τ) = (−1)^i` when `σ` is
    /// the face of `τ` omitting its `i`-th vertex.
    pub fn coboundary(&self, r: usize) -> RationalMatrix {
        let mut m = RationalMatrix::zeros(self.count(r + 1), self.count(r));
        let one = Rational::one();
        let minus = -Rational::one();
        for (row, t) in self.simplices(r + 1).iter().enumerate() {
            for i in 0..t.len() {
                let col = self.index[r][&remove_at(t, i)];
                m.set(row, col, if i % 2 == 0 { one.clone() } else { minus.clone() });
            }
        }
        m
    }

    /// Simplicial cochain complex in degrees `0..=dim`.
    pub fn cochain_complex(&self) -> GradedComplex {
        let top = self.simplices.len();
        let dims = (0..top).map(|r| self.count(r)).collect();
        let diffs = (0..top.saturating_sub(1)).map(|r| self.coboundary(r)).collect();
        GradedComplex::new(0, dims, diffs).expect("coboundary squares to zero")
    }

    /// Simplicial chain complex re-indexed as a cochain complex: `C_r` sits in
    /// degree `-r`, so `H_r` is the cohomology in degree `-r`.
    pub fn chain_complex(&self) -> GradedComplex {
        let top = self.simplices.len() as Degree;
        if top == 0 {
            return GradedComplex::zero();
        }
        let dims = (0..top).rev().map(|r| self.count(r as usize)).collect();
        let diffs = (1..top)
            .rev()
            .map(|r| self.coboundary(r as usize - 1).transpose())
            .collect();
        GradedComplex::new(-(top - 1), dims, diffs).expect("boundary squares to zero")
    }

    /// Betti numbers of the cochain complex.
    pub fn betti(&self) -> Vec<usize> {
        self.cochain_complex().betti()
    }

    fn check_cochain(&self, c: &Cochain) -> Result<(), SimplicialError> {
        if c.values.len() != self.count(c.degree) {
            return Err(SimplicialError::ComplexMismatch {
                degree: c.degree,
                expected: self.count(c.degree),
                found: c.values.len(),
            });
        }
        Ok(())
    }

    /// Alexander–Whitney cup product:
    /// `(a ∪ b)(v_0…v_{p+q}) = a(v_0…v_p) · b(v_p…v_{p+q})`.
    pub fn cup(&self, a: &Cochain, b: &Cochain) -> Result<Cochain, SimplicialError> {
        self.check_cochain(a)?;
        self.check_cochain(b)?;
        let (p, q) = (a.degree, b.degree);
        let values = self
            .simplices(p + q)
            .iter()
            .map(|t| {
                let x = &a.values[self.index[p][&t[..=p]]];
                if x.is_zero() {
                    return Rational::zero();
                }
                let y = &b.values[self.index[q][&t[p..]]];
                x * y
            })
            .collect();
        Ok(Cochain { degree: p + q, values })
    }

    /// Pairing of a cochain with a chain of the same degree.
    pub fn evaluate(&self, a: &Cochain, z: &Chain) -> Result<Rational, SimplicialError> {
        if a.degree != z.degree {
            return Err(SimplicialError::DegreeMismatch {
                cochain: a.degree,
                chain: z.degree,
            });
        }
        self.check_cochain(a)?;
        if z.values.len() != a.values.len() {
            return Err(SimplicialError::ComplexMismatch {
                degree: z.degree,
                expected: a.values.len(),
                found: z.values.len(),
            });
        }
        Ok(dot(&a.values, &z.values))
    }

    /// Indicator cochain of a single simplex.
    pub fn indicator(&self, s: &[usize]) -> Option<Cochain> {
        let i = self.index_of(s)?;
        let mut values = vec![Rational::zero(); self.count(s.len() - 1)];
        values[i] = Rational::one();
        Some(Cochain {
            degree: s.len() - 1,
            values,
        })
    }

    /// Constant-one 0-cochain.
    pub fn unit(&self) -> Cochain {
        Cochain {
            degree: 0,
            values: vec![Rational::one(); self.count(0)],
        }
    }

    /// The subcomplex generated by `simplices` (given in this complex's indices).
    pub fn induced_subcomplex(&self, simplices: &[Simplex]) -> Result<Embedding, SimplicialError> {
        for s in simplices {
            if !self.contains(s) {
                return Err(SimplicialError::NotASubcomplex(self.simplex_labels(s)));
            }
        }
        let verts: BTreeSet<usize> = simplices.iter().flatten().copied().collect();
        let vertex_map: Vec<usize> = verts.into_iter().collect();
        let local: HashMap<usize, usize> =
            vertex_map.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let labels = vertex_map.iter().map(|&v| self.labels[v].clone()).collect();
        let local_simplices: Vec<Vec<usize>> = simplices
            .iter()
            .map(|s| s.iter().map(|v| local[v]).collect())
            .collect();
        let sub = SimplicialComplex::from_simplices(labels, &local_simplices)?;
        Embedding::new(sub, self, vertex_map)
    }

    /// Connected components, each as a list of vertex indices.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.n_vertices();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let next = p[y];
                p[y] = r;
                y = next;
            }
            r
        }
        for e in self.simplices(1) {
            let (a, b) = (find(&mut parent, e[0]), find(&mut parent, e[1]));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for v in 0..n {
            let r = find(&mut parent, v);
            groups.entry(r).or_default().push(v);
        }
        groups.into_values().collect()
    }

    /// All simplices whose vertices lie in `vertices`.
    pub fn full_subcomplex_simplices(&self, vertices: &BTreeSet<usize>) -> Vec<Simplex> {
        self.simplices
            .iter()
            .flatten()
            .filter(|s| s.iter().all(|v| vertices.contains(v)))
            .cloned()
            .collect()
    }
}

pub(crate) fn remove_at(s: &[usize], i: usize) -> Simplex {
    let mut f = Vec::with_capacity(s.len() - 1);
    f.extend_from_slice(&s[..i]);
    f.extend_from_slice(&s[i + 1..]);
    f
}

pub(crate) fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    let mut acc = Rational::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += x * y;
        }
    }
    acc
}

/// Rational cochain of a fixed degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cochain {
    pub degree: usize,
    pub values: Vec<Rational>,
}

impl Cochain {
    pub fn zero(k: &SimplicialComplex, degree: usize) -> Self {
        Cochain {
            degree,
            values: vec![Rational::zero(); k.count(degree)],
        }
    }

    pub fn new(degree: usize, values: Vec<Rational>) -> Self {
        Cochain { degree, values }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Zero::is_zero)
    }
}

/// Rational chain of a fixed degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain {
    pub degree: usize,
    pub values: Vec<Rational>,
}

/// An order-preserving inclusion of a subcomplex.
#[derive(Clone, Debug)]
pub struct Embedding {
    pub sub: SimplicialComplex,
    /// Parent index of each vertex of `sub`.
    pub vertex_map: Vec<usize>,
    /// Parent index of each simplex of `sub`, per dimension.
    pub simplex_maps: Vec<Vec<usize>>,
    parent_counts: Vec<usize>,
}

impl Embedding {
    pub fn new(
        sub: SimplicialComplex,
        parent: &SimplicialComplex,
        vertex_map: Vec<usize>,
    ) -> Result<Self, SimplicialError> {
        if vertex_map.len() != sub.n_vertices() || vertex_map.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SimplicialError::NotASubcomplex(sub.labels.clone()));
        }
        let mut simplex_maps = Vec::new();
        for d in 0..sub.simplices.len() {
            let mut m = Vec::with_capacity(sub.count(d));
            for s in sub.simplices(d) {
                let image: Simplex = s.iter().map(|&v| vertex_map[v]).collect();
                m.push(
                    parent
                        .index_of(&image)
                        .ok_or_else(|| SimplicialError::NotASubcomplex(parent.simplex_labels(&image)))?,
                );
            }
            simplex_maps.push(m);
        }
        Ok(Embedding {
            sub,
            vertex_map,
            simplex_maps,
            parent_counts: parent.f_vector(),
        })
    }

    pub fn parent_count(&self, d: usize) -> usize {
        self.parent_counts.get(d).copied().unwrap_or(0)
    }

    pub fn simplex_map(&self, d: usize) -> &[usize] {
        self.simplex_maps.get(d).map_or(&[], |v| v.as_slice())
    }

    /// Restriction `C^r(parent) → C^r(sub)`.
    pub fn restriction_matrix(&self, r: usize) -> RationalMatrix {
        let map = self.simplex_map(r);
        let mut m = RationalMatrix::zeros(map.len(), self.parent_count(r));
        for (i, &j) in map.iter().enumerate() {
            m.set(i, j, Rational::one());
        }
        m
    }

    /// Extension by zero `C^r(sub) → C^r(parent)`.
    pub fn extension_matrix(&self, r: usize) -> RationalMatrix {
        self.restriction_matrix(r).transpose()
    }

    pub fn restrict(&self, parent_cochain: &Cochain) -> Cochain {
        let values = self
            .simplex_map(parent_cochain.degree)
            .iter()
            .map(|&j| parent_cochain.values[j].clone())
            .collect();
        Cochain::new(parent_cochain.degree, values)
    }

    pub fn extend_by_zero(&self, c: &Cochain) -> Cochain {
        let mut values = vec![Rational::zero(); self.parent_count(c.degree)];
        for (i, &j) in self.simplex_map(c.degree).iter().enumerate() {
            values[j] = c.values[i].clone();
        }
        Cochain::new(c.degree, values)
    }

    /// The restriction as a map of cochain complexes.
    pub fn restriction(&self, parent: &SimplicialComplex) -> ComplexMap {
        ComplexMap::new(parent.cochain_complex(), self.sub.cochain_complex(), |r| {
            self.restriction_matrix(r as usize)
        })
        .expect("restriction to a subcomplex is a cochain map")
    }

    /// Parent simplices (per dimension) that are not in the subcomplex.
    pub fn complement_indices(&self, d: usize) -> Vec<usize> {
        let mut inside = vec![false; self.parent_count(d)];
        for &j in self.simplex_map(d) {
            inside[j] = true;
        }
        (0..inside.len()).filter(|&j| !inside[j]).collect()
    }
}

/// Relative cochains `C•(K, L)`: cochains vanishing on the subcomplex.
pub fn relative_cochain_complex(
    parent: &SimplicialComplex,
    sub: &Embedding,
) -> Result<Subcomplex, SimplicialError> {
    let c = parent.cochain_complex();
    let spaces: Vec<Subspace> = c
        .degrees()
        .map(|r| Subspace::coordinate(c.dim(r), &sub.complement_indices(r as usize)))
        .collect();
    Ok(subcomplex_from_subspaces(&c, &spaces)?)
}

/// A vertex map between two complexes that sends simplices to simplices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialMap {
    vertex_map: Vec<usize>,
}

impl SimplicialMap {
    pub fn new(
        source: &SimplicialComplex,
        target: &SimplicialComplex,
        vertex_map: Vec<usize>,
    ) -> Result<Self, SimplicialError> {
        if vertex_map.len() != source.n_vertices() {
            return Err(SimplicialError::NotSimplicial(source.labels.clone()));
        }
        if let Some(&v) = vertex_map.iter().find(|&&v| v >= target.n_vertices()) {
            return Err(SimplicialError::VertexOutOfRange(v));
        }
        let f = SimplicialMap { vertex_map };
        for s in source.simplices.iter().flatten() {
            let mut img: Simplex = s.iter().map(|&v| f.vertex_map[v]).collect();
            img.sort_unstable();
            img.dedup();
            if !target.contains(&img) {
                return Err(SimplicialError::NotSimplicial(source.simplex_labels(s)));
            }
        }
        Ok(f)
    }

    /// Validates a bijective simplicial self-map whose inverse is simplicial.
    pub fn automorphism(k: &SimplicialComplex, vertex_map: Vec<usize>) -> Result<Self, SimplicialError> {
        let f = Self::new(k, k, vertex_map)?;
        f.check_automorphism(k)?;
        Ok(f)
    }

    pub fn identity(k: &SimplicialComplex) -> Self {
        SimplicialMap {
            vertex_map: (0..k.n_vertices()).collect(),
        }
    }

    pub fn check_automorphism(&self, k: &SimplicialComplex) -> Result<(), SimplicialError> {
        let n = k.n_vertices();
        if self.vertex_map.len() != n {
            return Err(SimplicialError::NotAutomorphism("wrong number of vertices".into()));
        }
        let mut hit = vec![false; n];
        for &v in &self.vertex_map {
            if v >= n || hit[v] {
                return Err(SimplicialError::NotAutomorphism("vertex map is not a bijection".into()));
            }
            hit[v] = true;
        }
        for s in k.simplices.iter().flatten() {
            let mut img: Simplex = s.iter().map(|&v| self.vertex_map[v]).collect();
            img.sort_unstable();
            if !k.contains(&img) {
                return Err(SimplicialError::NotAutomorphism(format!(
                    "simplex {:?} has no image",
                    k.simplex_labels(s)
                )));
            }
        }
        Ok(())
    }

    pub fn vertex_map(&self) -> &[usize] {
        &self.vertex_map
    }

    pub fn apply(&self, v: usize) -> usize {
        self.vertex_map[v]
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &SimplicialMap) -> SimplicialMap {
        SimplicialMap {
            vertex_map: self.vertex_map.iter().map(|&v| other.vertex_map[v]).collect(),
        }
    }

    /// Inverse of a bijective vertex map.
    pub fn inverse(&self) -> SimplicialMap {
        let mut inv = vec![0; self.vertex_map.len()];
        for (v, &w) in self.vertex_map.iter().enumerate() {
            inv[w] = v;
        }
        SimplicialMap { vertex_map: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.vertex_map.iter().enumerate().all(|(i, &v)| i == v)
    }

    /// Image simplex in sorted order and the sign of the sorting permutation,
    /// or `None` if the image is degenerate.
    pub fn oriented_image(&self, s: &[usize]) -> Option<(Simplex, i64)> {
        oriented_sort(s.iter().map(|&v| self.vertex_map[v]).collect())
    }

    /// Pullback `f^*: C^r(target) → C^r(source)` with orientation signs.
    pub fn pullback_matrix(
        &self,
        source: &SimplicialComplex,
        target: &SimplicialComplex,
        r: usize,
    ) -> RationalMatrix {
        let mut m = RationalMatrix::zeros(source.count(r), target.count(r));
        for (row, s) in source.simplices(r).iter().enumerate() {
            if let Some((img, sign)) = self.oriented_image(s) {
                let col = target
                    .index_of(&img)
                    .expect("simplicial map sends simplices to simplices");
                m.set(row, col, rat(sign));
            }
        }
        m
    }

    /// Pullback as a cochain map `C•(target) → C•(source)`.
    pub fn pullback(&self, source: &SimplicialComplex, target: &SimplicialComplex) -> ComplexMap {
        ComplexMap::new(target.cochain_complex(), source.cochain_complex(), |r| {
            self.pullback_matrix(source, target, r as usize)
        })
        .expect("pullback along a simplicial map is a cochain map")
    }
}

/// Sorts a vertex list, returning the sign of the sorting permutation; `None`
/// if a vertex repeats.
pub fn oriented_sort(mut v: Vec<usize>) -> Option<(Simplex, i64)> {
    let mut sign = 1;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some((v, sign))
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::chaincomplex::{les_of_ses, ComplexMap};
    use proptest::prelude::*;

    pub(crate) fn circle(n: usize) -> SimplicialComplex {
        let edges: Vec<Vec<usize>> = (0..n).map(|i| vec![i, (i + 1) % n]).collect();
        SimplicialComplex::from_indices(n, &edges).unwrap()
    }

    pub(crate) fn sphere2() -> SimplicialComplex {
        SimplicialComplex::from_indices(4, &[vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]])
            .unwrap()
    }

    #[test]
    fn build_examples() {
        let c = SimplicialComplex::build(&["0", "1", "2"], &[vec!["0", "1"], vec!["1", "2"], vec!["0", "2"]])
            .unwrap();
        assert_eq!(c.f_vector(), vec![3, 3]);
        let t = SimplicialComplex::from_indices(4, &[vec![0, 1, 2, 3]]).unwrap();
        assert_eq!(t.f_vector().iter().sum::<usize>(), 15);
        assert_eq!(sphere2().f_vector(), vec![4, 6, 4]);
        assert!(matches!(
            SimplicialComplex::build(&["a", "b"], &[vec!["a", "a"]]),
            Err(SimplicialError::RepeatedVertex(_))
        ));
        assert!(matches!(
            SimplicialComplex::build(&["a", "b"], &[vec!["a", "c"]]),
            Err(SimplicialError::UnknownVertex(_))
        ));
    }

    #[test]
    fn cochain_betti() {
        assert_eq!(SimplicialComplex::from_indices(1, &[]).unwrap().betti(), vec![1]);
        assert_eq!(circle(3).betti(), vec![1, 1]);
        assert_eq!(sphere2().betti(), vec![1, 0, 1]);
    }

    #[test]
    fn chain_complex_homology() {
        let c = sphere2().chain_complex();
        assert_eq!(c.betti_range(-2, 0), vec![1, 0, 1]);
    }

    #[test]
    fn relative_disc() {
        let disc = SimplicialComplex::from_indices(3, &[vec![0, 1, 2]]).unwrap();
        let bd = disc.induced_subcomplex(&[vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        let rel = relative_cochain_complex(&disc, &bd).unwrap();
        assert_eq!(rel.complex.betti(), vec![0, 0, 1]);
        let empty = disc.induced_subcomplex(&[]).unwrap();
        let rel = relative_cochain_complex(&disc, &empty).unwrap();
        assert_eq!(rel.complex.betti(), vec![1, 0, 0]);
    }

    #[test]
    fn disc_pair_connecting_map_is_iso() {
        let disc = SimplicialComplex::from_indices(3, &[vec![0, 1, 2]]).unwrap();
        let bd = disc.induced_subcomplex(&[vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        let rel = relative_cochain_complex(&disc, &bd).unwrap();
        let restrict = bd.restriction(&disc);
        let delta = crate::chaincomplex::ses_connecting(&rel.inclusion, &restrict, 1).unwrap();
        assert_eq!(delta.shape(), (1, 1));
        assert_eq!(delta.rank(), 1);
        let les = les_of_ses(&rel.inclusion, &restrict, ["rel", "abs", "sub"]).unwrap();
        assert!(les.verify().exact);
    }

    #[test]
    fn cup_unit_and_overflow() {
        let s = sphere2();
        let b = s.indicator(&[0, 1]).unwrap();
        assert_eq!(s.cup(&s.unit(), &b).unwrap(), b);
        assert_eq!(s.cup(&b, &s.unit()).unwrap(), b);
        let top = s.indicator(&[0, 1, 2]).unwrap();
        let prod = s.cup(&top, &b).unwrap();
        assert_eq!(prod.degree, 3);
        assert!(prod.values.is_empty());
        assert!(matches!(
            s.cup(&Cochain::new(1, vec![]), &b),
            Err(SimplicialError::ComplexMismatch { .. })
        ));
    }

    #[test]
    fn leibniz_rule_on_sphere() {
        let s = sphere2();
        let d0 = s.coboundary(0);
        let d1 = s.coboundary(1);
        let a = Cochain::new(1, (0..6).map(|i| rat(i as i64 - 2)).collect());
        let b = Cochain::new(0, (0..4).map(|i| rat(i as i64 * i as i64)).collect());
        let ab = s.cup(&a, &b).unwrap();
        let lhs = d1.mul_vec(&ab.values);
        let da = Cochain::new(2, d1.mul_vec(&a.values));
        let db = Cochain::new(1, d0.mul_vec(&b.values));
        let t1 = s.cup(&da, &b).unwrap();
        let t2 = s.cup(&a, &db).unwrap();
        let rhs: Vec<Rational> = t1.values.iter().zip(&t2.values).map(|(x, y)| x - y).collect();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn evaluate_basics() {
        let s = sphere2();
        let z = Chain { degree: 2, values: vec![rat(1), rat(0), rat(0), rat(0)] };
        assert_eq!(s.evaluate(&Cochain::zero(&s, 2), &z).unwrap(), rat(0));
        assert_eq!(s.evaluate(&s.indicator(&[0, 1, 2]).unwrap(), &z).unwrap(), rat(1));
        assert!(matches!(
            s.evaluate(&Cochain::zero(&s, 1), &z),
            Err(SimplicialError::DegreeMismatch { .. })
        ));
    }

    #[test]
    fn pullback_of_reflection_reverses_h1() {
        let c = circle(6);
        let refl = SimplicialMap::automorphism(&c, (0..6).map(|i| (6 - i) % 6).collect()).unwrap();
        let h = crate::chaincomplex::map_on_cohomology(&refl.pullback(&c, &c), 1);
        assert_eq!(h, RationalMatrix::from_i64_rows(&[&[-1]]));
        let rot = SimplicialMap::automorphism(&c, (0..6).map(|i| (i + 1) % 6).collect()).unwrap();
        let h = crate::chaincomplex::map_on_cohomology(&rot.pullback(&c, &c), 1);
        assert_eq!(h, RationalMatrix::identity(1));
        assert!(SimplicialMap::automorphism(&c, vec![0, 2, 1, 3, 4, 5]).is_err());
    }

    #[test]
    fn components_of_disjoint_circles() {
        let k = SimplicialComplex::from_indices(6, &[vec![0, 1], vec![1, 2], vec![0, 2], vec![3, 4], vec![4, 5], vec![3, 5]])
            .unwrap();
        assert_eq!(k.components(), vec![vec![0, 1, 2], vec![3, 4, 5]]);
    }

    fn random_pair() -> impl Strategy<Value = (SimplicialComplex, Vec<Simplex>)> {
        let tri = proptest::collection::vec(proptest::sample::subsequence((0..6usize).collect::<Vec<_>>(), 1..=3), 1..8);
        (tri, proptest::collection::vec(any::<bool>(), 64)).prop_map(|(simps, keep)| {
            let k = SimplicialComplex::from_indices(6, &simps).unwrap();
            let all: Vec<Simplex> = k.maximal_simplices();
            let sub: Vec<Simplex> = all
                .iter()
                .enumerate()
                .filter(|(i, _)| keep[*i % keep.len()])
                .flat_map(|(_, s)| {
                    // keep only a proper face sometimes
                    if s.len() > 1 && s[0] % 2 == 0 { vec![s[1..].to_vec()] } else { vec![s.clone()] }
                })
                .collect();
            (k, sub)
        })
    }

    proptest! {
        #[test]
        fn pair_sequence_is_exact((k, sub) in random_pair()) {
            let emb = k.induced_subcomplex(&sub).unwrap();
            let rel = relative_cochain_complex(&k, &emb).unwrap();
            let restrict = emb.restriction(&k);
            let les = les_of_ses(&rel.inclusion, &restrict, ["rel", "abs", "sub"]).unwrap();
            prop_assert!(les.verify().exact);
        }

        #[test]
        fn euler_characteristic_matches((k, _) in random_pair()) {
            let c = k.cochain_complex();
            let chi: i64 = c.betti().iter().enumerate().map(|(r, &b)| if r % 2 == 0 { b as i64 } else { -(b as i64) }).sum();
            prop_assert_eq!(chi, c.euler_characteristic());
        }

        #[test]
        fn cup_is_associative((k, _) in random_pair(), seed in 0i64..50) {
            let c = k.cochain_complex();
            for p in 0..=1usize {
                let a = Cochain::new(p, (0..c.dim(p as i32)).map(|i| rat((i as i64 * seed + 1) % 5 - 2)).collect());
                let b = Cochain::new(0, (0..c.dim(0)).map(|i| rat((i as i64 + seed) % 3 - 1)).collect());
                let e = Cochain::new(1, (0..c.dim(1)).map(|i| rat((i as i64 * 7 + seed) % 4 - 1)).collect());
                let left = k.cup(&k.cup(&a, &b).unwrap(), &e).unwrap();
                let right = k.cup(&a, &k.cup(&b, &e).unwrap()).unwrap();
                prop_assert_eq!(left, right);
            }
        }

        #[test]
        fn composition_is_functorial((k, _) in random_pair()) {
            let c = k.cochain_complex();
            let id = ComplexMap::identity(&c);
            let comp = id.then(&id).unwrap();
            for r in c.degrees() {
                let h = crate::chaincomplex::map_on_cohomology(&comp, r);
                prop_assert_eq!(h, RationalMatrix::identity(c.betti_at(r)));
            }
        }
    }
}
