//! Batch commands over JSON inputs.

use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use straticoh_core::chaincomplex::Degree;
use straticoh_core::flatbundle::{
    collapse_check, e2_page, fiber_duality_pairing, global_duality_dims, global_duality_rank_check, total_cohomology,
    BundleError, FlatBundleSystem, Selector,
};
use straticoh_core::formats::{parse_json, BundleSpec, ComplexSpec, FormatError, LoadedSpace, Space, SpaceSpec};
use straticoh_core::hitheory::{
    cutoffs, derham_crosscheck, hi_cup, hi_groups_depth1, hi_groups_depth1_with_cutoff, hi_groups_with_cutoff,
    hi_pairing, qi_cup_closure_check, DepthOneSpace, HiError, IsolatedSingularitySpace, Perversity,
};
use straticoh_core::hodgetrunc::{cotruncate, truncate_below, InnerProduct};
use straticoh_core::ratlinalg::{rat, Rational};
use straticoh_core::simplicial::{relative_cochain_complex, SimplicialComplex};

use crate::report::{InputSummary, NamedFVector, Report};
use crate::selftest;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Format {
        path: String,
        #[source]
        source: FormatError,
    },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Hi(#[from] HiError),
    #[error(transparent)]
    Bundle(#[from] BundleError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Cohomology,
    Hi,
    #[value(name = "hi-depth1")]
    HiDepth1,
    Pairing,
    Cup,
    E2,
    CollapseCheck,
    DualityCheck,
    DerhamCheck,
    Selftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Cohomology => "cohomology",
            Command::Hi => "hi",
            Command::HiDepth1 => "hi-depth1",
            Command::Pairing => "pairing",
            Command::Cup => "cup",
            Command::E2 => "e2",
            Command::CollapseCheck => "collapse-check",
            Command::DualityCheck => "duality-check",
            Command::DerhamCheck => "derham-check",
            Command::Selftest => "selftest",
        }
    }
}

#[derive(Clone, Debug)]
pub struct JobSpec {
    pub command: Command,
    pub inputs: Vec<String>,
    pub perversities: Vec<String>,
    pub cutoff: Option<Degree>,
}

/// Exit status: 0 success, 1 failed verification, 2 invalid input.
pub struct Outcome {
    pub report: Report,
    pub exit_code: i32,
}

enum Input {
    Complex(SimplicialComplex),
    Bundle(FlatBundleSystem),
    Space(LoadedSpace),
}

fn read(path: &str) -> Result<String, CliError> {
    std::fs::read_to_string(Path::new(path)).map_err(|source| CliError::Io {
        path: path.to_string(),
        source,
    })
}

fn format_err(path: &str) -> impl Fn(FormatError) -> CliError + '_ {
    move |source| CliError::Format {
        path: path.to_string(),
        source,
    }
}

fn load(path: &str) -> Result<(Input, InputSummary), CliError> {
    let text = read(path)?;
    let value: Value = parse_json(&text).map_err(format_err(path))?;
    let fv = |name: &str, k: &SimplicialComplex| NamedFVector {
        complex: name.to_string(),
        f_vector: k.f_vector(),
    };
    let (input, kind, f_vectors) = if value.get("M").is_some() {
        let space = parse_json::<SpaceSpec>(&text).and_then(|s| s.build()).map_err(format_err(path))?;
        let ext = space.exterior();
        let mut fvs = vec![fv("M", &ext.complex), fv("boundary", &ext.boundary.sub)];
        let kind = match &space.space {
            Space::Isolated(s) => {
                for (i, l) in s.links.iter().enumerate() {
                    fvs.push(fv(&format!("link {}", i), &l.sub));
                }
                "isolated singularity space"
            }
            Space::DepthOne(s) => {
                fvs.push(fv("base", &s.bundle.base));
                fvs.push(fv("fiber", &s.bundle.fiber));
                "depth-one space"
            }
        };
        (Input::Space(space), kind, fvs)
    } else if value.get("base").is_some() {
        let sys = parse_json::<BundleSpec>(&text).and_then(|b| b.build()).map_err(format_err(path))?;
        let fvs = vec![fv("base", &sys.base), fv("fiber", &sys.fiber)];
        (Input::Bundle(sys), "flat bundle system", fvs)
    } else {
        let k = parse_json::<ComplexSpec>(&text).and_then(|c| c.build("complex")).map_err(format_err(path))?;
        let fvs = vec![fv("complex", &k)];
        (Input::Complex(k), "simplicial complex", fvs)
    };
    Ok((
        input,
        InputSummary {
            path: path.to_string(),
            kind: kind.to_string(),
            f_vectors,
        },
    ))
}

fn single_input(job: &JobSpec) -> Result<&str, CliError> {
    match job.inputs.as_slice() {
        [one] => Ok(one),
        _ => Err(CliError::Usage(format!("{} takes exactly one input file", job.command.name()))),
    }
}

fn perversity(job: &JobSpec, space: Option<&LoadedSpace>) -> Result<Perversity, CliError> {
    match (job.perversities.first(), space.and_then(|s| s.perversity.clone())) {
        (Some(p), _) => Ok(Perversity::parse(p)?),
        (None, Some(p)) => Ok(p),
        (None, None) => Err(CliError::Usage("a perversity is required (--perversity or \"perversity\" in the space file)".into())),
    }
}

fn isolated(space: &LoadedSpace, command: Command) -> Result<&IsolatedSingularitySpace, CliError> {
    match &space.space {
        Space::Isolated(s) => Ok(s),
        Space::DepthOne(_) => Err(CliError::Usage(format!("{} needs an isolated-singularity space", command.name()))),
    }
}

fn depth_one(space: &LoadedSpace, command: Command) -> Result<&DepthOneSpace, CliError> {
    match &space.space {
        Space::DepthOne(s) => Ok(s),
        Space::Isolated(_) => Err(CliError::Usage(format!("{} needs a space with a \"bundle\"", command.name()))),
    }
}

fn expect_space(input: Input, command: Command) -> Result<LoadedSpace, CliError> {
    match input {
        Input::Space(s) => Ok(s),
        _ => Err(CliError::Usage(format!("{} needs a space file", command.name()))),
    }
}

fn expect_bundle(input: Input, command: Command) -> Result<FlatBundleSystem, CliError> {
    match input {
        Input::Bundle(b) => Ok(b),
        _ => Err(CliError::Usage(format!("{} needs a bundle file", command.name()))),
    }
}

fn strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

#[derive(Serialize)]
struct TruncationRow {
    cutoff: Degree,
    below: Vec<usize>,
    at_or_above: Vec<usize>,
}

fn cohomology_report(k: &SimplicialComplex, cutoff: Option<Degree>) -> Result<Value, CliError> {
    let c = k.cochain_complex();
    let top = k.dim().max(0);
    let ip = InnerProduct::ones(&c);
    let cutoffs: Vec<Degree> = match cutoff {
        Some(x) => vec![x],
        None => (0..=top + 1).collect(),
    };
    let rows = cutoffs
        .into_iter()
        .map(|kk| -> Result<TruncationRow, CliError> {
            let below = truncate_below(&c, &ip, kk).map_err(HiError::from)?;
            let above = cotruncate(&c, &ip, kk).map_err(HiError::from)?;
            Ok(TruncationRow {
                cutoff: kk,
                below: below.complex().betti_range(0, top),
                at_or_above: above.complex.betti_range(0, top),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(json!({
        "betti": c.betti_range(0, top),
        "euler_characteristic": c.euler_characteristic(),
        "truncations": rows,
    }))
}

pub fn run(job: &JobSpec) -> Result<Outcome, CliError> {
    let command = job.command;
    if command == Command::Selftest {
        if !job.inputs.is_empty() {
            return Err(CliError::Usage("selftest takes no input files".into()));
        }
        let report = selftest::run_selftest();
        let passed = report.failed == 0;
        return Ok(Outcome {
            report: Report::new("selftest", vec![], report, passed),
            exit_code: if passed { 0 } else { 1 },
        });
    }
    let path = single_input(job)?;
    let (input, summary) = load(path)?;
    let (result, passed): (Value, bool) = match command {
        Command::Selftest => unreachable!(),
        Command::Cohomology => match input {
            Input::Complex(k) => (cohomology_report(&k, job.cutoff)?, true),
            Input::Space(s) => {
                let ext = s.exterior();
                let rel = relative_cochain_complex(&ext.complex, &ext.boundary).map_err(HiError::from)?;
                let n = ext.dim as Degree;
                (
                    json!({
                        "M": cohomology_report(&ext.complex, job.cutoff)?,
                        "boundary": cohomology_report(&ext.boundary.sub, job.cutoff)?,
                        "relative_betti": rel.complex.betti_range(0, n),
                    }),
                    true,
                )
            }
            Input::Bundle(sys) => {
                let top = sys.top_degree();
                let mut selectors = vec![Selector::Full];
                let cuts: Vec<Degree> = match job.cutoff {
                    Some(k) => vec![k],
                    None => (0..=sys.fiber_dim() as Degree + 1).collect(),
                };
                for k in cuts {
                    selectors.push(Selector::Below(k));
                    selectors.push(Selector::AtOrAbove(k));
                }
                let rows = selectors
                    .into_iter()
                    .map(|sel| -> Result<Value, CliError> {
                        let t = total_cohomology(&sys, sel)?;
                        Ok(json!({"selector": sel.to_string(), "betti": t.betti.iter().take(top as usize + 1).collect::<Vec<_>>()}))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                (json!({ "totals": rows }), true)
            }
        },
        Command::Hi => {
            let space = expect_space(input, command)?;
            let p = perversity(job, Some(&space))?;
            match &space.space {
                Space::Isolated(s) => {
                    let n = s.dim();
                    let cuts = cutoffs(&p, n, n - 1)?;
                    let c = job.cutoff.unwrap_or(cuts.c);
                    let g = hi_groups_with_cutoff(s, c, Some(&p))?;
                    let ok = g.result.les_exact;
                    (
                        json!({"perversity": p.to_string(), "cutoff": c, "betti": g.result.betti, "les_exact": ok}),
                        ok,
                    )
                }
                Space::DepthOne(s) => (depth_one_result(s, &p, job.cutoff)?, true),
            }
        }
        Command::HiDepth1 => {
            let space = expect_space(input, command)?;
            let p = perversity(job, Some(&space))?;
            (depth_one_result(depth_one(&space, command)?, &p, job.cutoff)?, true)
        }
        Command::Pairing => {
            let space = expect_space(input, command)?;
            let s = isolated(&space, command)?;
            let p = perversity(job, Some(&space))?;
            let q = match job.perversities.get(1) {
                Some(q) => Perversity::parse(q)?,
                None => p.complement(),
            };
            if job.perversities.len() > 2 {
                return Err(CliError::Usage("pairing takes at most two perversities".into()));
            }
            let r = hi_pairing(s, &p, &q)?;
            let ok = r.nondegenerate && r.cochain_check.violations == 0;
            (serde_json::to_value(r).expect("serializes"), ok)
        }
        Command::Cup => {
            let space = expect_space(input, command)?;
            let s = isolated(&space, command)?;
            let p = perversity(job, Some(&space))?;
            cup_report(s, &p, job.cutoff)?
        }
        Command::E2 => {
            let sys = expect_bundle(input, command)?;
            let e2 = e2_page(&sys)?;
            let total = total_cohomology(&sys, Selector::Full)?;
            let top = sys.top_degree() as usize;
            (
                json!({"e2": e2, "total_betti": total.betti.iter().take(top + 1).collect::<Vec<_>>()}),
                true,
            )
        }
        Command::CollapseCheck => {
            let sys = expect_bundle(input, command)?;
            let r = collapse_check(&sys)?;
            let ok = r.collapses;
            (serde_json::to_value(r).expect("serializes"), ok)
        }
        Command::DualityCheck => {
            let sys = expect_bundle(input, command)?;
            duality_report(&sys, job.cutoff)?
        }
        Command::DerhamCheck => {
            let space = expect_space(input, command)?;
            let s = isolated(&space, command)?;
            let ps: Vec<Perversity> = if job.perversities.is_empty() {
                match &space.perversity {
                    Some(p) => vec![p.clone()],
                    None => Perversity::presets().to_vec(),
                }
            } else {
                job.perversities.iter().map(|p| Perversity::parse(p)).collect::<Result<_, _>>()?
            };
            let rows = ps.iter().map(|p| derham_crosscheck(s, p)).collect::<Result<Vec<_>, _>>()?;
            let ok = rows.iter().all(|r| r.equal);
            (json!({ "rows": rows }), ok)
        }
    };
    Ok(Outcome {
        report: Report::new(command.name(), vec![summary], result, passed),
        exit_code: if passed { 0 } else { 1 },
    })
}

fn depth_one_result(s: &DepthOneSpace, p: &Perversity, cutoff: Option<Degree>) -> Result<Value, CliError> {
    let r = match cutoff {
        Some(k) => hi_groups_depth1_with_cutoff(s, k, p)?,
        None => hi_groups_depth1(s, p)?,
    };
    Ok(serde_json::to_value(r).expect("serializes"))
}

#[derive(Serialize)]
struct CupEntry {
    left_degree: usize,
    left: usize,
    right_degree: usize,
    right: usize,
    product: Vec<String>,
}

fn cup_report(s: &IsolatedSingularitySpace, p: &Perversity, cutoff: Option<Degree>) -> Result<(Value, bool), CliError> {
    let n = s.dim();
    let c = match cutoff {
        Some(c) => c,
        None => cutoffs(p, n, n - 1)?.c,
    };
    let g = hi_groups_with_cutoff(s, c, Some(p))?;
    let betti = &g.result.betti;
    let e = |d: usize, i: usize| -> Vec<Rational> { (0..betti[d]).map(|j| rat((i == j) as i64)).collect() };
    let mut table = Vec::new();
    for r in 0..=n {
        for t in 0..=n - r {
            for i in 0..betti[r] {
                for j in 0..betti[t] {
                    table.push(CupEntry {
                        left_degree: r,
                        left: i,
                        right_degree: t,
                        right: j,
                        product: strings(&hi_cup(s, &g, r, &e(r, i), t, &e(t, j))?),
                    });
                }
            }
        }
    }
    // the constant cochain is a class only when QI⁰ contains it
    let unit = s.complex().unit();
    let unit_holds = match g.complex.qi.subspace(0).coordinates(&unit.values).map_err(HiError::from)? {
        Some(coords) if g.complex.contains(s, &unit) => {
            let u = g.classes[0].coordinates(&coords).map_err(HiError::from)?;
            let mut ok = true;
            for r in 0..=n {
                for i in 0..betti[r] {
                    ok &= hi_cup(s, &g, 0, &u, r, &e(r, i))? == e(r, i);
                }
            }
            Some(ok)
        }
        _ => None,
    };
    let overflow_empty = (1..=n).all(|r| {
        (0..betti[r]).all(|i| {
            (0..betti[n]).all(|j| hi_cup(s, &g, r, &e(r, i), n, &e(n, j)).map(|v| v.is_empty()).unwrap_or(false))
        })
    });
    let closure = qi_cup_closure_check(s, &g.complex)?;
    let ok = closure.closed && unit_holds != Some(false) && overflow_empty;
    Ok((
        json!({
            "perversity": p.to_string(),
            "cutoff": c,
            "betti": betti,
            "products": table,
            "unit": unit_holds,
            "overflow_is_zero": overflow_empty,
            "closure": closure,
        }),
        ok,
    ))
}

fn duality_report(sys: &FlatBundleSystem, cutoff: Option<Degree>) -> Result<(Value, bool), CliError> {
    let m = sys.fiber_dim() as Degree;
    let ks: Vec<Degree> = match cutoff {
        Some(k) => vec![k],
        None => (0..=m + 1).collect(),
    };
    let mut ok = true;
    let mut fiber = Vec::new();
    let mut global = Vec::new();
    for k in ks {
        let kstar = m + 1 - k;
        let f = fiber_duality_pairing(&sys.fiber, &sys.fiber_ip, k, kstar)?;
        ok &= f.nondegenerate;
        fiber.push(f);
        match global_duality_rank_check(sys, k, kstar) {
            Ok(r) => {
                ok &= r.holds;
                global.push(json!({"k": k, "kstar": kstar, "status": "checked", "report": r}));
            }
            Err(BundleError::OrientationReversing(edge)) => {
                let r = global_duality_dims(sys, k, kstar)?;
                global.push(json!({
                    "k": k,
                    "kstar": kstar,
                    "status": format!("skipped: orientation-reversing monodromy on edge {}", edge.join("-")),
                    "report": r,
                }));
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok((json!({"fiber": fiber, "global": global}), ok))
}
