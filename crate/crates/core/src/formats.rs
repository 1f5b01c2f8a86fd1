//! JSON input formats for complexes, bundles and spaces.
//!
//! ```json
//! {"vertices": ["a", "b", "c"], "simplices": [["a", "b"], ["b", "c"], ["a", "c"]]}
//! ```
//!
//! A bundle is `{"base", "fiber", "fiber_weights"?, "monodromy"?}` where
//! `monodromy` maps an edge `"[a,b]"` of the base (by label) to a permutation
//! `{fiber label: fiber label}`. A space is `{"M", "boundary_links"?,
//! "link_weights"?, "orientation"?, "bundle"?, "perversity"?}`; with a bundle
//! present it also carries `"realization"` and optionally `"identification"`
//! (realized vertex label to `M` vertex label) inside the bundle object.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::flatbundle::{build_system, realize, BundleError, FlatBundleSystem, RealizationKind};
use crate::hitheory::{DepthOneSpace, HiError, IsolatedSingularitySpace, Perversity};
use crate::hodgetrunc::{HodgeError, InnerProduct};
use crate::ratlinalg::Rational;
use crate::simplicial::{fundamental_cycle, OrientedPseudomanifold, SimplicialComplex, SimplicialError, SimplicialMap};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {message}")]
    Parse {
        path: String,
        message: String,
        line: usize,
        column: usize,
    },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error("{field}: {source}")]
    Simplicial {
        field: String,
        #[source]
        source: SimplicialError,
    },
    #[error("bundle: {0}")]
    Bundle(#[from] BundleError),
    #[error("space: {0}")]
    Hi(#[from] HiError),
    #[error("{field}: {source}")]
    Hodge {
        field: String,
        #[source]
        source: HodgeError,
    },
}

fn invalid(field: &str, message: impl Into<String>) -> FormatError {
    FormatError::Invalid {
        field: field.to_string(),
        message: message.into(),
    }
}

/// Deserializes with the JSON path of the offending field in the error.
pub fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, FormatError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        FormatError::Parse {
            path,
            message: inner.to_string(),
            line: inner.line(),
            column: inner.column(),
        }
    })
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct ComplexSpec {
    pub vertices: Vec<String>,
    pub simplices: Vec<Vec<String>>,
}

impl ComplexSpec {
    pub fn build(&self, field: &str) -> Result<SimplicialComplex, FormatError> {
        SimplicialComplex::build(&self.vertices, &self.simplices).map_err(|source| FormatError::Simplicial {
            field: field.to_string(),
            source,
        })
    }

    /// Vertices and maximal simplices of `k`.
    pub fn from_complex(k: &SimplicialComplex) -> Self {
        ComplexSpec {
            vertices: k.labels().to_vec(),
            simplices: k
                .maximal_simplices()
                .iter()
                .filter(|s| s.len() > 1)
                .map(|s| k.simplex_labels(s))
                .collect(),
        }
    }
}

/// An integer or a string such as `"3/4"`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(untagged)]
pub enum RationalSpec {
    Int(i64),
    Text(String),
}

impl RationalSpec {
    pub fn value(&self, field: &str) -> Result<Rational, FormatError> {
        match self {
            RationalSpec::Int(i) => Ok(Rational::from_integer((*i).into())),
            RationalSpec::Text(s) => {
                Rational::from_str(s.trim()).map_err(|_| invalid(field, format!("not a rational number: {:?}", s)))
            }
        }
    }
}

/// Weights per degree `0, 1, …`, one per simplex in the complex's order.
pub type WeightsSpec = Vec<Vec<RationalSpec>>;

fn inner_product(k: &SimplicialComplex, w: &WeightsSpec, field: &str) -> Result<InnerProduct, FormatError> {
    let weights = w
        .iter()
        .enumerate()
        .map(|(r, row)| {
            row.iter()
                .enumerate()
                .map(|(i, x)| x.value(&format!("{}[{}][{}]", field, r, i)))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    InnerProduct::new(&k.cochain_complex(), weights).map_err(|source| FormatError::Hodge {
        field: field.to_string(),
        source,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct BundleSpec {
    pub base: ComplexSpec,
    pub fiber: ComplexSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fiber_weights: Option<WeightsSpec>,
    #[serde(default)]
    pub monodromy: BTreeMap<String, BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub realization: Option<RealizationKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identification: Option<BTreeMap<String, String>>,
}

fn parse_edge(key: &str, base: &SimplicialComplex) -> Result<(usize, usize), FormatError> {
    let field = format!("monodromy.{}", key);
    let inner = key
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| invalid(&field, "edge keys look like \"[a,b]\""))?;
    let parts: Vec<&str> = inner.split(',').map(|s| s.trim().trim_matches('"')).collect();
    if parts.len() != 2 {
        return Err(invalid(&field, "an edge has two vertices"));
    }
    let find = |l: &str| {
        base.labels()
            .iter()
            .position(|x| x == l)
            .ok_or_else(|| invalid(&field, format!("unknown base vertex {:?}", l)))
    };
    Ok((find(parts[0])?, find(parts[1])?))
}

impl BundleSpec {
    pub fn build(&self) -> Result<FlatBundleSystem, FormatError> {
        let base = self.base.build("base")?;
        let fiber = self.fiber.build("fiber")?;
        let ip = match &self.fiber_weights {
            Some(w) => Some(inner_product(&fiber, w, "fiber_weights")?),
            None => None,
        };
        let fiber_index: HashMap<&str, usize> = fiber.labels().iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        let mut monodromy = BTreeMap::new();
        for (key, perm) in &self.monodromy {
            let field = format!("monodromy.{}", key);
            let (a, b) = parse_edge(key, &base)?;
            let mut map = vec![usize::MAX; fiber.n_vertices()];
            for (from, to) in perm {
                let f = *fiber_index.get(from.as_str()).ok_or_else(|| invalid(&field, format!("unknown fiber vertex {:?}", from)))?;
                let t = *fiber_index.get(to.as_str()).ok_or_else(|| invalid(&field, format!("unknown fiber vertex {:?}", to)))?;
                map[f] = t;
            }
            // unlisted vertices are fixed
            for (v, m) in map.iter_mut().enumerate() {
                if *m == usize::MAX {
                    *m = v;
                }
            }
            let g = SimplicialMap::automorphism(&fiber, map).map_err(|source| FormatError::Simplicial { field: field.clone(), source })?;
            let (key, g) = if a < b {
                ((a, b), g)
            } else {
                ((b, a), g.inverse())
            };
            if monodromy.insert(key, g).is_some() {
                return Err(invalid(&field, "edge listed twice"));
            }
        }
        Ok(build_system(base, fiber, ip, monodromy)?)
    }

    pub fn from_system(sys: &FlatBundleSystem) -> Self {
        let monodromy = sys
            .monodromy()
            .iter()
            .filter(|(_, g)| !g.is_identity())
            .map(|(&(a, b), g)| {
                let key = format!("[{},{}]", sys.base.label(a), sys.base.label(b));
                let perm = g
                    .vertex_map()
                    .iter()
                    .enumerate()
                    .filter(|(v, w)| v != *w)
                    .map(|(v, &w)| (sys.fiber.label(v).to_string(), sys.fiber.label(w).to_string()))
                    .collect();
                (key, perm)
            })
            .collect();
        BundleSpec {
            base: ComplexSpec::from_complex(&sys.base),
            fiber: ComplexSpec::from_complex(&sys.fiber),
            fiber_weights: None,
            monodromy,
            realization: None,
            identification: None,
        }
    }
}

/// A link given either as a complex on labels of `M` or as a vertex set of `∂M`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(untagged)]
pub enum LinkSpec {
    Complex(ComplexSpec),
    Vertices(Vec<String>),
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(untagged)]
pub enum PerversitySpec {
    Name(String),
    Values(Vec<i32>),
}

impl PerversitySpec {
    pub fn build(&self) -> Result<Perversity, FormatError> {
        match self {
            PerversitySpec::Name(s) => Ok(Perversity::parse(s)?),
            PerversitySpec::Values(v) => {
                let s: Vec<String> = v.iter().map(ToString::to_string).collect();
                Ok(Perversity::parse(&s.join(","))?)
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    #[serde(rename = "M")]
    pub m: ComplexSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_links: Option<Vec<LinkSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link_weights: Option<Vec<WeightsSpec>>,
    /// Each top simplex of `M` once, its vertices listed in positive order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bundle: Option<BundleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perversity: Option<PerversitySpec>,
}

#[derive(Clone, Debug)]
pub enum Space {
    Isolated(IsolatedSingularitySpace),
    DepthOne(DepthOneSpace),
}

#[derive(Clone, Debug)]
pub struct LoadedSpace {
    pub space: Space,
    pub perversity: Option<Perversity>,
}

impl LoadedSpace {
    pub fn exterior(&self) -> &OrientedPseudomanifold {
        match &self.space {
            Space::Isolated(s) => &s.exterior,
            Space::DepthOne(s) => &s.exterior,
        }
    }
}

fn permutation_sign(perm: &[usize]) -> i64 {
    let mut sign = 1;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                sign = -sign;
            }
        }
    }
    sign
}

fn orient(m: &SimplicialComplex, tops: &[Vec<String>]) -> Result<OrientedPseudomanifold, FormatError> {
    let ext = fundamental_cycle(m).map_err(|source| FormatError::Simplicial { field: "M".into(), source })?;
    let n = ext.dim;
    let index: HashMap<&str, usize> = m.labels().iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let mut cycle = vec![0i64; m.count(n)];
    for (i, s) in tops.iter().enumerate() {
        let field = format!("orientation[{}]", i);
        let verts = s
            .iter()
            .map(|l| index.get(l.as_str()).copied().ok_or_else(|| invalid(&field, format!("unknown vertex {:?}", l))))
            .collect::<Result<Vec<_>, _>>()?;
        let mut sorted = verts.clone();
        sorted.sort_unstable();
        let j = m.index_of(&sorted).filter(|_| sorted.len() == n + 1).ok_or_else(|| invalid(&field, "not a top simplex of M"))?;
        if cycle[j] != 0 {
            return Err(invalid(&field, "simplex listed twice"));
        }
        cycle[j] = permutation_sign(&verts);
    }
    if cycle.contains(&0) {
        return Err(invalid("orientation", "every top simplex must be listed"));
    }
    ext.with_cycle(cycle).map_err(|source| FormatError::Simplicial {
        field: "orientation".into(),
        source,
    })
}

impl SpaceSpec {
    pub fn build(&self) -> Result<LoadedSpace, FormatError> {
        let m = self.m.build("M")?;
        let exterior = match &self.orientation {
            Some(o) => orient(&m, o)?,
            None => fundamental_cycle(&m).map_err(|source| FormatError::Simplicial { field: "M".into(), source })?,
        };
        let perversity = self.perversity.as_ref().map(PerversitySpec::build).transpose()?;
        let index: HashMap<&str, usize> = m.labels().iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        let lookup = |field: &str, l: &str| index.get(l).copied().ok_or_else(|| invalid(field, format!("unknown vertex {:?}", l)));
        let space = match &self.bundle {
            None => {
                let links = match &self.boundary_links {
                    None => None,
                    Some(list) => Some(
                        list.iter()
                            .enumerate()
                            .map(|(i, l)| {
                                let field = format!("boundary_links[{}]", i);
                                match l {
                                    LinkSpec::Complex(c) => c
                                        .simplices
                                        .iter()
                                        .map(|s| s.iter().map(|v| lookup(&field, v)).collect::<Result<Vec<_>, _>>())
                                        .chain(c.vertices.iter().map(|v| Ok(vec![lookup(&field, v)?])))
                                        .collect::<Result<Vec<_>, _>>(),
                                    LinkSpec::Vertices(vs) => {
                                        let bd = &exterior.boundary;
                                        let mut sub = BTreeSet::new();
                                        for v in vs {
                                            let w = lookup(&field, v)?;
                                            let b = bd.vertex_map.binary_search(&w).map_err(|_| invalid(&field, format!("{:?} is not a boundary vertex", v)))?;
                                            sub.insert(b);
                                        }
                                        Ok(bd
                                            .sub
                                            .full_subcomplex_simplices(&sub)
                                            .into_iter()
                                            .map(|s| s.iter().map(|&v| bd.vertex_map[v]).collect())
                                            .collect())
                                    }
                                }
                            })
                            .collect::<Result<Vec<_>, _>>()?,
                    ),
                };
                let weights = match &self.link_weights {
                    None => None,
                    Some(ws) => {
                        // the links are needed to interpret the weights
                        let plain = IsolatedSingularitySpace::new(exterior.clone(), links.clone(), None)?;
                        if ws.len() != plain.links.len() {
                            return Err(invalid("link_weights", format!("expected {} entries", plain.links.len())));
                        }
                        Some(
                            ws.iter()
                                .zip(&plain.links)
                                .enumerate()
                                .map(|(i, (w, e))| inner_product(&e.sub, w, &format!("link_weights[{}]", i)))
                                .collect::<Result<Vec<_>, _>>()?,
                        )
                    }
                };
                Space::Isolated(IsolatedSingularitySpace::new(exterior, links, weights)?)
            }
            Some(b) => {
                if self.boundary_links.is_some() || self.link_weights.is_some() {
                    return Err(invalid("bundle", "boundary_links and link_weights apply to isolated singularities only"));
                }
                let sys = b.build()?;
                let kind = b.realization.ok_or_else(|| invalid("bundle.realization", "required: \"product\" or \"mapping_torus\""))?;
                let real = realize(&sys, kind)?;
                let ident = match &b.identification {
                    None => None,
                    Some(map) => {
                        let rindex: HashMap<&str, usize> = real.complex.labels().iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
                        let mut to_m = vec![usize::MAX; real.complex.n_vertices()];
                        for (from, to) in map {
                            let v = *rindex.get(from.as_str()).ok_or_else(|| invalid("bundle.identification", format!("unknown realized vertex {:?}", from)))?;
                            to_m[v] = lookup("bundle.identification", to)?;
                        }
                        if let Some(v) = to_m.iter().position(|&x| x == usize::MAX) {
                            return Err(invalid("bundle.identification", format!("realized vertex {:?} is unmatched", real.complex.label(v))));
                        }
                        Some(to_m)
                    }
                };
                Space::DepthOne(DepthOneSpace::new(exterior, sys, real, ident)?)
            }
        };
        Ok(LoadedSpace { space, perversity })
    }
}

/// Reads a complex, bundle or space description.
pub fn load_complex(text: &str) -> Result<SimplicialComplex, FormatError> {
    parse_json::<ComplexSpec>(text)?.build("complex")
}

pub fn load_bundle(text: &str) -> Result<FlatBundleSystem, FormatError> {
    parse_json::<BundleSpec>(text)?.build()
}

pub fn load_space(text: &str) -> Result<LoadedSpace, FormatError> {
    parse_json::<SpaceSpec>(text)?.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use crate::hitheory::{hi_groups, hi_groups_depth1};

    #[test]
    fn complex_roundtrip() {
        for k in [circle(4), sphere2(), torus(), solid_torus(), point()] {
            let spec = ComplexSpec::from_complex(&k);
            let text = serde_json::to_string(&spec).unwrap();
            assert_eq!(load_complex(&text).unwrap(), k);
        }
    }

    #[test]
    fn parse_errors_name_the_field() {
        let err = load_complex(r#"{"vertices": ["a"], "simplices": [["a", 3]]}"#).unwrap_err();
        match err {
            FormatError::Parse { path, line, .. } => {
                assert_eq!(path, "simplices[0][1]");
                assert_eq!(line, 1);
            }
            e => panic!("{e}"),
        }
        let err = load_complex(r#"{"vertices": ["a"], "simplices": [["a", "b"]]}"#).unwrap_err();
        assert!(err.to_string().contains("\"b\""));
    }

    #[test]
    fn bundle_roundtrip_and_reversed_edges() {
        for (_, sys) in bundle_fixtures() {
            let text = serde_json::to_string(&BundleSpec::from_system(&sys)).unwrap();
            let back = load_bundle(&text).unwrap();
            assert_eq!(back.monodromy(), sys.monodromy());
        }
        let forward = r#"{"base": {"vertices": ["0","1","2"], "simplices": [["0","1"],["1","2"],["0","2"]]},
            "fiber": {"vertices": ["a","b","c"], "simplices": [["a","b"],["b","c"],["a","c"]]},
            "monodromy": {"[0,2]": {"a": "b", "b": "c", "c": "a"}}}"#;
        let reversed = forward.replace("[0,2]", "[2,0]").replace(r#"{"a": "b", "b": "c", "c": "a"}"#, r#"{"b": "a", "c": "b", "a": "c"}"#);
        assert_eq!(load_bundle(forward).unwrap().monodromy(), load_bundle(&reversed).unwrap().monodromy());
    }

    #[test]
    fn broken_cocycle_is_named() {
        let text = r#"{"base": {"vertices": ["0","1","2"], "simplices": [["0","1","2"]]},
            "fiber": {"vertices": ["a","b","c"], "simplices": [["a","b"],["b","c"],["a","c"]]},
            "monodromy": {"[0,2]": {"a": "b", "b": "c", "c": "a"}}}"#;
        let err = load_bundle(text).unwrap_err();
        assert!(matches!(err, FormatError::Bundle(BundleError::Cocycle(ref t)) if t == &["0", "1", "2"]), "{err}");
    }

    #[test]
    fn isolated_space_from_json() {
        let spec = SpaceSpec {
            m: ComplexSpec::from_complex(&solid_torus()),
            boundary_links: None,
            link_weights: None,
            orientation: None,
            bundle: None,
            perversity: Some(PerversitySpec::Name("m".into())),
        };
        let loaded = load_space(&serde_json::to_string(&spec).unwrap()).unwrap();
        let Space::Isolated(s) = &loaded.space else { panic!() };
        assert_eq!(hi_groups(s, loaded.perversity.as_ref().unwrap()).unwrap().result.betti, vec![0, 0, 1, 0]);
    }

    #[test]
    fn explicit_orientation_and_links() {
        let m = torus_interval();
        let ext = fundamental_cycle(&m).unwrap();
        let tops: Vec<Vec<String>> = m
            .simplices(3)
            .iter()
            .zip(&ext.cycle)
            .map(|(s, &c)| {
                let mut l = m.simplex_labels(s);
                if c < 0 {
                    l.swap(0, 1);
                }
                l
            })
            .collect();
        let comps = ext.boundary.sub.components();
        let links: Vec<LinkSpec> = comps
            .iter()
            .map(|c| LinkSpec::Vertices(c.iter().map(|&v| m.label(ext.boundary.vertex_map[v]).to_string()).collect()))
            .collect();
        let spec = SpaceSpec {
            m: ComplexSpec::from_complex(&m),
            boundary_links: Some(links),
            link_weights: None,
            orientation: Some(tops),
            bundle: None,
            perversity: Some(PerversitySpec::Values(vec![0, 0])),
        };
        let loaded = spec.build().unwrap();
        assert_eq!(loaded.exterior().cycle, ext.cycle);
        let Space::Isolated(s) = &loaded.space else { panic!() };
        assert_eq!(s.links.len(), 2);
    }

    #[test]
    fn depth_one_space_from_json() {
        let mut bundle = BundleSpec::from_system(&trivial_torus_system());
        bundle.realization = Some(RealizationKind::Product);
        let spec = SpaceSpec {
            m: ComplexSpec::from_complex(&solid_torus()),
            boundary_links: None,
            link_weights: None,
            orientation: None,
            bundle: Some(bundle),
            perversity: None,
        };
        let loaded = spec.build().unwrap();
        let Space::DepthOne(s) = &loaded.space else { panic!() };
        assert_eq!(hi_groups_depth1(s, &Perversity::LowerMiddle).unwrap().betti, vec![0, 0, 0, 0]);
    }
}
