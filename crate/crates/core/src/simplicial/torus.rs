use super::product::staircases;
use super::{Embedding, SimplicialComplex, SimplicialError, SimplicialMap};

/// Mapping torus of a simplicial automorphism `f` of `L`, built from `layers`
/// staircase prisms `L × [i, i+1]` with the top of the last prism glued to the
/// bottom of the first by `(layers, w) ~ (0, f(w))`.
#[derive(Clone, Debug)]
pub struct MappingTorus {
    pub complex: SimplicialComplex,
    pub fiber: SimplicialComplex,
    pub monodromy: SimplicialMap,
    pub layers: usize,
    /// `L ↪ E` as the fiber over layer 0.
    pub fiber_inclusion: Embedding,
}

impl MappingTorus {
    /// Index of the vertex `(layer, w)`, `layer < layers`.
    pub fn vertex(&self, layer: usize, w: usize) -> usize {
        layer * self.fiber.n_vertices() + w
    }

    /// `(layer, w)` of a vertex.
    pub fn coordinates(&self, v: usize) -> (usize, usize) {
        let n = self.fiber.n_vertices();
        (v / n, v % n)
    }
}

pub fn mapping_torus(
    fiber: &SimplicialComplex,
    f: &SimplicialMap,
    layers: usize,
) -> Result<MappingTorus, SimplicialError> {
    if layers < 3 {
        return Err(SimplicialError::TooFewLayers(layers));
    }
    f.check_automorphism(fiber)?;
    let n = fiber.n_vertices();
    let labels: Vec<String> = (0..layers)
        .flat_map(|i| (0..n).map(move |w| (i, w)))
        .map(|(i, w)| format!("({},{})", i, fiber.label(w)))
        .collect();
    let vertex = |layer: usize, w: usize| {
        if layer == layers {
            f.apply(w)
        } else {
            layer * n + w
        }
    };
    let mut tops = Vec::new();
    let maximal = fiber.maximal_simplices();
    for i in 0..layers {
        for tau in &maximal {
            staircases(&[i, i + 1], tau, &mut |path| {
                tops.push(path.iter().map(|&(t, w)| vertex(t, w)).collect::<Vec<_>>())
            });
        }
    }
    let complex = SimplicialComplex::from_simplices(labels, &tops)?;
    let fiber_inclusion = Embedding::new(fiber.clone(), &complex, (0..n).collect())?;
    Ok(MappingTorus {
        complex,
        fiber: fiber.clone(),
        monodromy: f.clone(),
        layers,
        fiber_inclusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplicial::ordered_product;
    use crate::simplicial::tests::{circle, sphere2};

    #[test]
    fn identity_on_point_is_circle() {
        let pt = SimplicialComplex::from_indices(1, &[]).unwrap();
        let t = mapping_torus(&pt, &SimplicialMap::identity(&pt), 3).unwrap();
        assert_eq!(t.complex.f_vector(), vec![3, 3]);
        assert_eq!(t.complex.betti(), vec![1, 1]);
    }

    #[test]
    fn identity_on_circle_is_torus() {
        let c = circle(3);
        let t = mapping_torus(&c, &SimplicialMap::identity(&c), 3).unwrap();
        assert_eq!(t.complex.betti(), vec![1, 2, 1]);
    }

    #[test]
    fn reflection_gives_klein_bottle() {
        let c = circle(6);
        let refl = SimplicialMap::automorphism(&c, (0..6).map(|i| (6 - i) % 6).collect()).unwrap();
        let t = mapping_torus(&c, &refl, 3).unwrap();
        assert_eq!(t.complex.betti(), vec![1, 1, 0]);
        assert_eq!(t.complex.cochain_complex().euler_characteristic(), 0);
    }

    #[test]
    fn identity_torus_matches_product() {
        let pt = SimplicialComplex::from_indices(1, &[]).unwrap();
        for l in [pt, circle(3), sphere2()] {
            let t = mapping_torus(&l, &SimplicialMap::identity(&l), 3).unwrap();
            let p = ordered_product(&circle(3), &l);
            assert_eq!(t.complex.betti(), p.complex.betti());
        }
    }

    #[test]
    fn rejects_two_layers_and_non_automorphisms() {
        let c = circle(3);
        assert!(matches!(
            mapping_torus(&c, &SimplicialMap::identity(&c), 2),
            Err(SimplicialError::TooFewLayers(2))
        ));
        let collapse = SimplicialMap::new(&c, &c, vec![0, 0, 1]).unwrap();
        assert!(matches!(
            mapping_torus(&c, &collapse, 3),
            Err(SimplicialError::NotAutomorphism(_))
        ));
    }
}
