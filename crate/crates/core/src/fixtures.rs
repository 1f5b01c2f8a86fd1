//! Small built-in complexes, bundles and spaces used by tests, the selftest
//! and the acceptance suite.

use std::collections::BTreeMap;

use crate::flatbundle::{build_system, FlatBundleSystem};
use crate::simplicial::{mapping_torus, ordered_product, SimplicialComplex, SimplicialMap};

pub fn point() -> SimplicialComplex {
    SimplicialComplex::from_indices(1, &[]).expect("point")
}

/// The closed `d`-simplex on vertices `0..=d`.
pub fn simplex(d: usize) -> SimplicialComplex {
    SimplicialComplex::from_indices(d + 1, &[(0..=d).collect()]).expect("simplex")
}

/// Boundary of the `(d+1)`-simplex, a `d`-sphere.
pub fn sphere(d: usize) -> SimplicialComplex {
    let facets: Vec<Vec<usize>> = (0..=d + 1)
        .map(|skip| (0..=d + 1).filter(|&v| v != skip).collect())
        .collect();
    SimplicialComplex::from_indices(d + 2, &facets).expect("sphere")
}

/// Cycle on `n ≥ 3` vertices with edges `[i, i+1]` and `[0, n−1]`.
pub fn circle(n: usize) -> SimplicialComplex {
    let edges: Vec<Vec<usize>> = (0..n).map(|i| vec![i, (i + 1) % n]).collect();
    SimplicialComplex::from_indices(n, &edges).expect("circle")
}

pub fn sphere2() -> SimplicialComplex {
    sphere(2)
}

pub fn torus() -> SimplicialComplex {
    ordered_product(&circle(3), &circle(3)).complex
}

pub fn circle_rotation(n: usize, shift: usize) -> SimplicialMap {
    SimplicialMap::automorphism(&circle(n), (0..n).map(|i| (i + shift) % n).collect()).expect("rotation")
}

/// `i ↦ −i mod n`.
pub fn circle_reflection(n: usize) -> SimplicialMap {
    SimplicialMap::automorphism(&circle(n), (0..n).map(|i| (n - i) % n).collect()).expect("reflection")
}

pub fn klein_bottle() -> SimplicialComplex {
    mapping_torus(&circle(6), &circle_reflection(6), 3).expect("klein bottle").complex
}

pub fn disc() -> SimplicialComplex {
    simplex(2)
}

pub fn solid_torus() -> SimplicialComplex {
    ordered_product(&circle(3), &simplex(2)).complex
}

/// `T² × [0, 1]`.
pub fn torus_interval() -> SimplicialComplex {
    ordered_product(&torus(), &simplex(1)).complex
}

/// `S¹ × D³`, whose boundary is `S¹ × S²`.
pub fn circle_times_ball() -> SimplicialComplex {
    ordered_product(&circle(3), &simplex(3)).complex
}

fn system(base: SimplicialComplex, fiber: SimplicialComplex, twists: &[((usize, usize), SimplicialMap)]) -> FlatBundleSystem {
    let monodromy: BTreeMap<(usize, usize), SimplicialMap> = twists.iter().cloned().collect();
    build_system(base, fiber, None, monodromy).expect("fixture bundle is valid")
}

/// Trivial circle bundle over a circle.
pub fn trivial_torus_system() -> FlatBundleSystem {
    system(circle(3), circle(3), &[])
}

/// Circle bundle over a 3-vertex circle whose closing edge carries a reflection.
pub fn klein_system() -> FlatBundleSystem {
    system(circle(3), circle(6), &[((0, 2), circle_reflection(6))])
}

/// Circle bundle over a circle with a rotation on the closing edge.
pub fn rotated_torus_system() -> FlatBundleSystem {
    system(circle(3), circle(6), &[((0, 2), circle_rotation(6, 1))])
}

pub fn circle_sphere_system() -> FlatBundleSystem {
    system(circle(3), sphere2(), &[])
}

/// Every bundle fixture by name.
pub fn bundle_fixtures() -> Vec<(&'static str, FlatBundleSystem)> {
    vec![
        ("trivial circle x circle", trivial_torus_system()),
        ("klein", klein_system()),
        ("rotated circle x circle", rotated_torus_system()),
        ("trivial circle x S2", circle_sphere_system()),
        ("point fiber over circle", system(circle(4), point(), &[])),
        ("circle over S2", system(sphere2(), circle(3), &[])),
    ]
}
