use num_traits::One;

use super::{Cochain, SimplicialComplex, SimplicialError, SimplicialMap};
use crate::chaincomplex::{tensor_product, ComplexMap, TensorProduct};
use crate::ratlinalg::{Rational, RationalMatrix};

/// Staircase triangulation of `|first| × |second|`.
///
/// Vertex `(i, j)` has index `i · n_second + j`, so the product vertex order
/// is lexicographic and every simplex is a chain in the product order.
#[derive(Clone, Debug)]
pub struct Product {
    pub complex: SimplicialComplex,
    pub first: SimplicialComplex,
    pub second: SimplicialComplex,
    pub proj_first: SimplicialMap,
    pub proj_second: SimplicialMap,
}

pub fn ordered_product(first: &SimplicialComplex, second: &SimplicialComplex) -> Product {
    let (n1, n2) = (first.n_vertices(), second.n_vertices());
    let labels: Vec<String> = (0..n1)
        .flat_map(|i| (0..n2).map(move |j| (i, j)))
        .map(|(i, j)| format!("({},{})", first.label(i), second.label(j)))
        .collect();
    let mut tops = Vec::new();
    let max1 = first.maximal_simplices();
    let max2 = second.maximal_simplices();
    for s in &max1 {
        for t in &max2 {
            staircases(s, t, &mut |path| {
                tops.push(path.iter().map(|&(i, j)| i * n2 + j).collect::<Vec<_>>())
            });
        }
    }
    let complex = SimplicialComplex::from_simplices(labels, &tops).expect("valid product simplices");
    let proj_first = SimplicialMap::new(&complex, first, (0..n1 * n2).map(|v| v / n2.max(1)).collect())
        .expect("projection is simplicial");
    let proj_second = SimplicialMap::new(&complex, second, (0..n1 * n2).map(|v| v % n2.max(1)).collect())
        .expect("projection is simplicial");
    Product {
        complex,
        first: first.clone(),
        second: second.clone(),
        proj_first,
        proj_second,
    }
}

/// Calls `emit` with every monotone lattice path through `s × t`.
pub(crate) fn staircases(s: &[usize], t: &[usize], emit: &mut dyn FnMut(&[(usize, usize)])) {
    fn go(
        s: &[usize],
        t: &[usize],
        a: usize,
        b: usize,
        path: &mut Vec<(usize, usize)>,
        emit: &mut dyn FnMut(&[(usize, usize)]),
    ) {
        path.push((s[a], t[b]));
        if a + 1 == s.len() && b + 1 == t.len() {
            emit(path);
        } else {
            if a + 1 < s.len() {
                go(s, t, a + 1, b, path, emit);
            }
            if b + 1 < t.len() {
                go(s, t, a, b + 1, path, emit);
            }
        }
        path.pop();
    }
    let mut path = Vec::new();
    go(s, t, 0, 0, &mut path, emit);
}

impl Product {
    pub fn vertex(&self, i: usize, j: usize) -> usize {
        i * self.second.n_vertices() + j
    }

    /// Cross product `π₁^* a ∪ π₂^* c`.
    pub fn cross(&self, a: &Cochain, c: &Cochain) -> Result<Cochain, SimplicialError> {
        let pa = Cochain::new(
            a.degree,
            self.proj_first
                .pullback_matrix(&self.complex, &self.first, a.degree)
                .mul_vec(&a.values),
        );
        let pc = Cochain::new(
            c.degree,
            self.proj_second
                .pullback_matrix(&self.complex, &self.second, c.degree)
                .mul_vec(&c.values),
        );
        self.complex.cup(&pa, &pc)
    }

    /// The cross product as a cochain map `C•(first) ⊗ C•(second) → C•(product)`.
    pub fn cross_product_map(&self) -> (TensorProduct, ComplexMap) {
        let tensor = tensor_product(&self.first.cochain_complex(), &self.second.cochain_complex());
        let target = self.complex.cochain_complex();
        let map = ComplexMap::new(tensor.complex.clone(), target, |j| {
            self.cross_matrix(&tensor, j as usize)
        })
        .expect("cross product is a cochain map");
        (tensor, map)
    }

    fn cross_matrix(&self, tensor: &TensorProduct, j: usize) -> RationalMatrix {
        let mut m = RationalMatrix::zeros(self.complex.count(j), tensor.complex.dim(j as i32));
        for (row, rho) in self.complex.simplices(j).iter().enumerate() {
            for p in 0..=j {
                let q = j - p;
                let Some((front, _)) = self.proj_first.oriented_image(&rho[..=p]) else {
                    continue;
                };
                let Some((back, _)) = self.proj_second.oriented_image(&rho[p..]) else {
                    continue;
                };
                let ia = self.first.index_of(&front).expect("projection is simplicial");
                let ib = self.second.index_of(&back).expect("projection is simplicial");
                m.set(row, tensor.index(p as i32, ia, q as i32, ib), Rational::one());
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaincomplex::map_on_cohomology;
    use crate::ratlinalg::rat;
    use crate::simplicial::fundamental_cycle;
    use crate::simplicial::tests::{circle, sphere2};

    #[test]
    fn point_times_complex() {
        let pt = SimplicialComplex::from_indices(1, &[]).unwrap();
        let p = ordered_product(&pt, &sphere2());
        assert_eq!(p.complex.f_vector(), sphere2().f_vector());
    }

    #[test]
    fn torus_and_circle_times_sphere() {
        let t = ordered_product(&circle(3), &circle(3));
        assert_eq!(t.complex.f_vector(), vec![9, 27, 18]);
        assert_eq!(t.complex.betti(), vec![1, 2, 1]);
        let cs = ordered_product(&circle(3), &sphere2());
        assert_eq!(cs.complex.betti(), vec![1, 1, 1, 1]);
    }

    #[test]
    fn cross_product_is_kunneth_iso() {
        for (b, f) in [(circle(3), circle(3)), (circle(3), sphere2())] {
            let p = ordered_product(&b, &f);
            let (tensor, map) = p.cross_product_map();
            for r in tensor.complex.degrees() {
                let h = map_on_cohomology(&map, r);
                assert_eq!(h.rank(), tensor.complex.betti_at(r));
                assert_eq!(h.rank(), p.complex.cochain_complex().betti_at(r));
            }
        }
    }

    #[test]
    fn torus_generators_pair_to_unit() {
        let c = circle(3);
        let p = ordered_product(&c, &c);
        let one = c.unit();
        let gen = c.indicator(&[0, 2]).unwrap();
        let a = p.cross(&gen, &one).unwrap();
        let b = p.cross(&one, &gen).unwrap();
        let m = fundamental_cycle(&p.complex).unwrap();
        let value = p.complex.evaluate(&p.complex.cup(&a, &b).unwrap(), &m.fundamental_chain()).unwrap();
        assert!(value == rat(1) || value == rat(-1));
    }
}
