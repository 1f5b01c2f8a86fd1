use std::collections::VecDeque;

use num_traits::Zero;

use super::{remove_at, Chain, Embedding, SimplicialComplex, SimplicialError};
use crate::chaincomplex::Subcomplex;
use crate::ratlinalg::{rat, Rational};

/// A pseudomanifold (possibly with boundary) with a coherent fundamental cycle.
#[derive(Clone, Debug)]
pub struct OrientedPseudomanifold {
    pub complex: SimplicialComplex,
    pub dim: usize,
    pub boundary: Embedding,
    /// `±1` per top simplex.
    pub cycle: Vec<i64>,
}

impl OrientedPseudomanifold {
    pub fn fundamental_chain(&self) -> Chain {
        Chain {
            degree: self.dim,
            values: self.cycle.iter().map(|&s| rat(s)).collect(),
        }
    }

    pub fn has_boundary(&self) -> bool {
        self.boundary.sub.n_vertices() > 0
    }

    pub fn relative_cochain_complex(&self) -> Subcomplex {
        super::relative_cochain_complex(&self.complex, &self.boundary)
            .expect("boundary is a subcomplex")
    }

    /// Replaces the computed orientation by an explicit `±1` cycle, which must
    /// have boundary supported on the boundary subcomplex.
    pub fn with_cycle(mut self, cycle: Vec<i64>) -> Result<Self, SimplicialError> {
        if cycle.len() != self.complex.count(self.dim) {
            return Err(SimplicialError::BadOrientation(format!(
                "expected {} coefficients, got {}",
                self.complex.count(self.dim),
                cycle.len()
            )));
        }
        if cycle.iter().any(|&c| c != 1 && c != -1) {
            return Err(SimplicialError::BadOrientation("coefficients must be ±1".into()));
        }
        let boundary = boundary_of(&self.complex, self.dim, &cycle);
        let mut on_boundary = vec![false; self.complex.count(self.dim.saturating_sub(1))];
        for &j in self.boundary.simplex_map(self.dim.saturating_sub(1)) {
            on_boundary[j] = true;
        }
        if let Some((j, _)) = boundary
            .iter()
            .enumerate()
            .find(|(j, b)| !b.is_zero() && !on_boundary[*j])
        {
            let face = &self.complex.simplices(self.dim - 1)[j];
            return Err(SimplicialError::BadOrientation(format!(
                "boundary of the cycle is nonzero on interior face {:?}",
                self.complex.simplex_labels(face)
            )));
        }
        self.cycle = cycle;
        Ok(self)
    }
}

fn boundary_of(k: &SimplicialComplex, n: usize, cycle: &[i64]) -> Vec<Rational> {
    if n == 0 {
        return Vec::new();
    }
    k.coboundary(n - 1)
        .transpose()
        .mul_vec(&cycle.iter().map(|&c| rat(c)).collect::<Vec<_>>())
}

/// Finds coherent `±1` coefficients on the top simplices by propagating
/// across interior codimension-one faces. Faces lying in exactly one top
/// simplex form the boundary.
pub fn fundamental_cycle(k: &SimplicialComplex) -> Result<OrientedPseudomanifold, SimplicialError> {
    if k.dim() < 0 {
        return Err(SimplicialError::NotPseudomanifold { face: vec![], count: 0 });
    }
    let n = k.dim() as usize;
    let tops = k.simplices(n);
    if n == 0 {
        let boundary = k.induced_subcomplex(&[])?;
        return Ok(OrientedPseudomanifold {
            complex: k.clone(),
            dim: 0,
            boundary,
            cycle: vec![1; tops.len()],
        });
    }
    // incidences of each (n-1)-face: (top simplex, omitted position)
    let mut incidence: Vec<Vec<(usize, usize)>> = vec![Vec::new(); k.count(n - 1)];
    for (t, s) in tops.iter().enumerate() {
        for i in 0..s.len() {
            let f = k.index_of(&remove_at(s, i)).expect("closed complex");
            incidence[f].push((t, i));
        }
    }
    for (f, inc) in incidence.iter().enumerate() {
        if inc.is_empty() || inc.len() > 2 {
            return Err(SimplicialError::NotPseudomanifold {
                face: k.simplex_labels(&k.simplices(n - 1)[f]),
                count: inc.len(),
            });
        }
    }
    // every lower simplex must lie in a top simplex
    for d in 0..n.saturating_sub(1) {
        let mut covered = vec![false; k.count(d)];
        for s in k.simplices(d + 1) {
            for i in 0..s.len() {
                covered[k.index_of(&remove_at(s, i)).unwrap()] = true;
            }
        }
        if let Some(j) = covered.iter().position(|c| !c) {
            return Err(SimplicialError::NotPseudomanifold {
                face: k.simplex_labels(&k.simplices(d)[j]),
                count: 0,
            });
        }
    }
    let parity = |i: usize| if i % 2 == 0 { 1i64 } else { -1 };
    let mut sign = vec![0i64; tops.len()];
    for start in 0..tops.len() {
        if sign[start] != 0 {
            continue;
        }
        sign[start] = 1;
        let mut queue = VecDeque::from([start]);
        while let Some(t) = queue.pop_front() {
            let s = &tops[t];
            for i in 0..s.len() {
                let f = k.index_of(&remove_at(s, i)).unwrap();
                for &(u, j) in &incidence[f] {
                    if u == t {
                        continue;
                    }
                    // induced orientations on the shared face must cancel
                    let want = -sign[t] * parity(i) * parity(j);
                    if sign[u] == 0 {
                        sign[u] = want;
                        queue.push_back(u);
                    } else if sign[u] != want {
                        return Err(SimplicialError::NonOrientable(k.simplex_labels(&tops[u])));
                    }
                }
            }
        }
    }
    let boundary_faces: Vec<Vec<usize>> = incidence
        .iter()
        .enumerate()
        .filter(|(_, inc)| inc.len() == 1)
        .map(|(f, _)| k.simplices(n - 1)[f].clone())
        .collect();
    let boundary = k.induced_subcomplex(&boundary_faces)?;
    Ok(OrientedPseudomanifold {
        complex: k.clone(),
        dim: n,
        boundary,
        cycle: sign,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplicial::{mapping_torus, SimplicialMap};

    #[test]
    fn single_simplex() {
        let k = SimplicialComplex::from_indices(3, &[vec![0, 1, 2]]).unwrap();
        let m = fundamental_cycle(&k).unwrap();
        assert_eq!(m.cycle, vec![1]);
        assert_eq!(m.boundary.sub.f_vector(), vec![3, 3]);
    }

    #[test]
    fn sphere_has_zero_boundary() {
        let s = crate::simplicial::tests::sphere2();
        let m = fundamental_cycle(&s).unwrap();
        assert!(!m.has_boundary());
        assert!(boundary_of(&s, 2, &m.cycle).iter().all(Zero::is_zero));
        assert_eq!(m.cycle.len(), 4);
    }

    #[test]
    fn klein_bottle_is_not_orientable() {
        let c = crate::simplicial::tests::circle(6);
        let refl = SimplicialMap::automorphism(&c, (0..6).map(|i| (6 - i) % 6).collect()).unwrap();
        let kb = mapping_torus(&c, &refl, 3).unwrap();
        assert!(matches!(
            fundamental_cycle(&kb.complex),
            Err(SimplicialError::NonOrientable(_))
        ));
    }

    #[test]
    fn branching_is_rejected() {
        let k = SimplicialComplex::from_indices(4, &[vec![0, 1], vec![0, 2], vec![0, 3]]).unwrap();
        assert!(matches!(
            fundamental_cycle(&k),
            Err(SimplicialError::NotPseudomanifold { count: 3, .. })
        ));
    }

    #[test]
    fn explicit_cycle_override() {
        let s = crate::simplicial::tests::sphere2();
        let m = fundamental_cycle(&s).unwrap();
        let flipped: Vec<i64> = m.cycle.iter().map(|c| -c).collect();
        let m2 = m.clone().with_cycle(flipped).unwrap();
        assert_eq!(m2.cycle[0], -m.cycle[0]);
        assert!(m.with_cycle(vec![1, 1, 1, 1]).is_err());
    }
}
