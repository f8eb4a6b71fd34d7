//! Turning instance files into observables.

use std::f64::consts::PI;

use covext_core::abelian::subgroup_closure;
use covext_core::construct::{build_from_gram, build_from_isometries, invariant_from_rho};
use covext_core::linalg::{self, CMatrix};
use covext_core::models::{self, MomentObservable};
use covext_core::num_complex::Complex64;
use covext_core::{
    CovariantPovm, GramStructure, GroupElement, GroupSpec, IsometryField, ProbabilityVector, Spectrum, Subgroup,
    Tolerances,
};
use serde_json::{Map, Value};

use crate::json::{matrix_from_json, matrix_to_json, Effects, InstanceFile, SpectrumEntry, TolerancesJson};
use crate::CliError;

pub enum Observable {
    Povm(Box<CovariantPovm>),
    Moment {
        observable: MomentObservable,
        arcs: Vec<(f64, f64)>,
    },
}

pub struct PresetInfo {
    pub name: &'static str,
    pub summary: &'static str,
    pub params: &'static [(&'static str, &'static str)],
}

pub const PRESETS: &[PresetInfo] = &[
    PresetInfo {
        name: "canonical-position",
        summary: "sharp position observable on Z_N from the constant isometry field",
        params: &[("N", "integer >= 1, order of the cyclic group")],
    },
    PresetInfo {
        name: "qubit-cyclic",
        summary: "rank one qubit observable on Z_N with characters {0, 1}",
        params: &[("N", "integer >= 3")],
    },
    PresetInfo {
        name: "position-difference",
        summary: "position difference on Z_N x Z_N modulo the diagonal, optionally smeared",
        params: &[
            ("N", "integer >= 2"),
            ("noise", "optional: \"none\" (default), \"uniform\", or N weights summing to 1"),
        ],
    },
    PresetInfo {
        name: "invariant-position",
        summary: "translation invariant observable on Z_N with Gram kernel from a probability vector",
        params: &[
            ("N", "integer >= 1"),
            ("rho", "\"uniform\", {\"point\": q}, or N weights summing to 1"),
        ],
    },
    PresetInfo {
        name: "moment-phase",
        summary: "circle-valued phase observable given by moments over a finite index set",
        params: &[
            ("d", "integer >= 1, indices 0..d (or give \"indices\")"),
            ("indices", "optional: list of distinct integers"),
            ("correlation", "\"canonical\" (default), \"identity\", or a Hermitian matrix"),
            ("arcs", "optional: list of [theta1, theta2]; default four quarter turns"),
        ],
    },
];

pub fn preset_info(name: &str) -> Option<&'static PresetInfo> {
    PRESETS.iter().find(|p| p.name == name)
}

/// Defaults, then `COVEXT_TOL`, then the instance's own values.
pub fn resolve_tolerances(file: Option<&TolerancesJson>) -> Result<Tolerances, CliError> {
    let base = Tolerances::from_env()?;
    let Some(t) = file else {
        return Ok(base);
    };
    Ok(Tolerances::new(
        t.psd_tol.unwrap_or(base.psd_tol),
        t.eq_tol.unwrap_or(base.eq_tol),
        t.rank_tol.unwrap_or(base.rank_tol),
    )?)
}

pub fn tolerances_json(t: &Tolerances) -> TolerancesJson {
    TolerancesJson {
        psd_tol: Some(t.psd_tol),
        eq_tol: Some(t.eq_tol),
        rank_tol: Some(t.rank_tol),
    }
}

fn structure(file: &InstanceFile) -> Result<Spectrum, CliError> {
    let factors = file
        .group
        .as_ref()
        .ok_or_else(|| CliError::input("instance needs `group`"))?;
    let group = GroupSpec::new(factors)?;
    let gens = file
        .subgroup_generators
        .iter()
        .flatten()
        .map(|g| group.reduce(g))
        .collect::<Result<Vec<_>, _>>()?;
    let subgroup = subgroup_closure(&group, &gens)?;
    let entries = file
        .spectrum
        .as_ref()
        .ok_or_else(|| CliError::input("instance needs `spectrum`"))?
        .iter()
        .map(|e| Ok((group.reduce(&e.character)?, e.multiplicity)))
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Spectrum::new(&group, &subgroup, &entries)?)
}

fn entry_of(spec: &Spectrum, character: &[i64]) -> Result<usize, CliError> {
    let g = spec.group().reduce(character)?;
    spec.entry_index(&g)
        .ok_or_else(|| CliError::input(format!("character {g} is not in the spectrum")))
}

pub fn load(file: &InstanceFile, tol: &Tolerances) -> Result<Observable, CliError> {
    let sources = [
        file.isometries.is_some(),
        file.gram.is_some(),
        file.effects.is_some(),
        file.preset.is_some(),
    ];
    let count = sources.iter().filter(|&&b| b).count();
    if count != 1 {
        return Err(CliError::input(format!(
            "instance must have exactly one of `isometries`, `gram`, `effects`, `preset` (found {count})"
        )));
    }
    if let Some(p) = &file.preset {
        return load_preset(&p.name, &p.params, tol);
    }
    let spec = structure(file)?;
    if let Some(iso) = &file.isometries {
        let mut maps: Vec<Option<CMatrix>> = vec![None; spec.entries().len()];
        for m in &iso.maps {
            let e = entry_of(&spec, &m.character)?;
            if maps[e].is_some() {
                return Err(CliError::input(format!("isometry for {} given twice", spec.character(e))));
            }
            maps[e] = Some(matrix_from_json(&m.matrix, "isometry")?);
        }
        let maps = maps
            .into_iter()
            .enumerate()
            .map(|(e, m)| m.ok_or_else(|| CliError::input(format!("missing isometry for {}", spec.character(e)))))
            .collect::<Result<Vec<_>, _>>()?;
        let field = IsometryField::new(&spec, iso.ambient_dim, maps, tol)?;
        return Ok(Observable::Povm(Box::new(build_from_isometries(&field, tol)?)));
    }
    if let Some(blocks) = &file.gram {
        let mut matrices = Vec::new();
        for block in spec.coset_blocks() {
            let expected: Vec<GroupElement> = block.entries.iter().map(|&e| spec.character(e).clone()).collect();
            let found = blocks.iter().find(|b| {
                b.characters
                    .iter()
                    .map(|c| spec.group().reduce(c))
                    .collect::<Result<Vec<_>, _>>()
                    .map(|cs| cs == expected)
                    .unwrap_or(false)
            });
            let found = found.ok_or_else(|| {
                let labels: Vec<String> = expected.iter().map(|g| g.to_string()).collect();
                CliError::input(format!("missing Gram block for characters [{}]", labels.join(", ")))
            })?;
            matrices.push(matrix_from_json(&found.matrix, "Gram block")?);
        }
        if matrices.len() != blocks.len() {
            return Err(CliError::input(format!(
                "{} Gram blocks given, the spectrum has {} dual cosets",
                blocks.len(),
                matrices.len()
            )));
        }
        let gram = GramStructure::new(&spec, matrices, tol)?;
        return Ok(Observable::Povm(Box::new(build_from_gram(&gram, tol)?)));
    }
    let effects = file.effects.as_ref().expect("checked above");
    let outcomes = spec.outcomes();
    let mut slots: Vec<Option<CMatrix>> = vec![None; outcomes.len()];
    for (key, m) in &effects.0 {
        let residues = key
            .split(',')
            .map(|t| t.trim().parse::<i64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| CliError::input(format!("bad outcome label `{key}`")))?;
        let w = outcomes.coset_of(&spec.group().element(&residues)?);
        if slots[w].is_some() {
            return Err(CliError::input(format!("outcome {key} given twice")));
        }
        slots[w] = Some(matrix_from_json(m, "effect")?);
    }
    let effects = slots
        .into_iter()
        .enumerate()
        .map(|(w, m)| {
            m.ok_or_else(|| CliError::input(format!("missing effect for outcome {}", outcomes.representative(w).label())))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Observable::Povm(Box::new(CovariantPovm::new(spec, effects)?)))
}

fn param<'a>(params: &'a Map<String, Value>, key: &str) -> Result<&'a Value, CliError> {
    params
        .get(key)
        .ok_or_else(|| CliError::input(format!("preset parameter `{key}` is required")))
}

fn uint(params: &Map<String, Value>, key: &str) -> Result<u64, CliError> {
    param(params, key)?
        .as_u64()
        .ok_or_else(|| CliError::input(format!("preset parameter `{key}` must be a nonnegative integer")))
}

fn weights(v: &Value, n: usize, key: &str, tol: &Tolerances) -> Result<ProbabilityVector, CliError> {
    match v {
        Value::String(s) if s == "uniform" => Ok(ProbabilityVector::uniform(n)?),
        Value::String(s) if s == "none" => Ok(ProbabilityVector::point_mass(n, 0)?),
        Value::Object(o) if o.contains_key("point") => {
            let q = o["point"]
                .as_u64()
                .ok_or_else(|| CliError::input(format!("`{key}.point` must be an integer")))?;
            Ok(ProbabilityVector::point_mass(n, q as usize)?)
        }
        Value::Array(a) => {
            let w = a
                .iter()
                .map(|x| x.as_f64().ok_or_else(|| CliError::input(format!("`{key}` entries must be numbers"))))
                .collect::<Result<Vec<_>, _>>()?;
            if w.len() != n {
                return Err(CliError::input(format!("`{key}` has {} weights, expected {n}", w.len())));
            }
            Ok(ProbabilityVector::new(w, tol)?)
        }
        _ => Err(CliError::input(format!("unrecognized value for `{key}`"))),
    }
}

fn check_params(name: &str, params: &Map<String, Value>) -> Result<(), CliError> {
    let info = preset_info(name).ok_or_else(|| CliError::input(format!("unknown preset `{name}`")))?;
    if let Some(k) = params.keys().find(|k| !info.params.iter().any(|(p, _)| p == k)) {
        return Err(CliError::input(format!("preset `{name}` has no parameter `{k}`")));
    }
    Ok(())
}

pub fn load_preset(name: &str, params: &Map<String, Value>, tol: &Tolerances) -> Result<Observable, CliError> {
    check_params(name, params)?;
    let povm = match name {
        "canonical-position" => models::canonical_position(uint(params, "N")?)?,
        "qubit-cyclic" => models::qubit_cyclic(uint(params, "N")?)?,
        "position-difference" => {
            let n = uint(params, "N")?;
            let noise = match params.get("noise") {
                None => ProbabilityVector::point_mass(n.max(1) as usize, 0)?,
                Some(v) => weights(v, n as usize, "noise", tol)?,
            };
            models::position_difference(n, &noise)?
        }
        "invariant-position" => {
            let n = uint(params, "N")?;
            let rho = weights(param(params, "rho")?, n as usize, "rho", tol)?;
            invariant_from_rho(n, &rho, tol)?
        }
        "moment-phase" => return load_moment(params, tol),
        _ => unreachable!("checked by check_params"),
    };
    Ok(Observable::Povm(Box::new(povm)))
}

fn load_moment(params: &Map<String, Value>, tol: &Tolerances) -> Result<Observable, CliError> {
    let indices: Vec<i64> = match (params.get("indices"), params.get("d")) {
        (Some(Value::Array(a)), _) => a
            .iter()
            .map(|x| x.as_i64().ok_or_else(|| CliError::input("`indices` entries must be integers")))
            .collect::<Result<_, _>>()?,
        (Some(_), _) => return Err(CliError::input("`indices` must be a list of integers")),
        (None, Some(_)) => (0..uint(params, "d")? as i64).collect(),
        (None, None) => return Err(CliError::input("moment-phase needs `d` or `indices`")),
    };
    let d = indices.len();
    let correlation = match params.get("correlation") {
        None => CMatrix::from_element(d, d, Complex64::new(1.0, 0.0)),
        Some(Value::String(s)) if s == "canonical" => CMatrix::from_element(d, d, Complex64::new(1.0, 0.0)),
        Some(Value::String(s)) if s == "identity" => linalg::identity(d),
        Some(v) => {
            let m: crate::json::JsonMatrix = serde_json::from_value(v.clone())
                .map_err(|e| CliError::input(format!("`correlation`: {e}")))?;
            matrix_from_json(&m, "correlation")?
        }
    };
    let observable = MomentObservable::new(indices, correlation, tol)?;
    let arcs = match params.get("arcs") {
        None => (0..4).map(|k| (k as f64 * PI / 2.0, (k + 1) as f64 * PI / 2.0)).collect(),
        Some(v) => {
            let pairs: Vec<[f64; 2]> =
                serde_json::from_value(v.clone()).map_err(|e| CliError::input(format!("`arcs`: {e}")))?;
            pairs.into_iter().map(|[a, b]| (a, b)).collect()
        }
    };
    Ok(Observable::Moment { observable, arcs })
}

/// A small generating set of `H`, zero excluded.
fn generators(spec: &Spectrum) -> Vec<Vec<i64>> {
    let group = spec.group();
    let mut gens: Vec<GroupElement> = Vec::new();
    let mut span = Subgroup::trivial(group);
    for h in spec.subgroup().elements() {
        if !span.contains(h) {
            gens.push(h.clone());
            span = subgroup_closure(group, &gens).expect("elements of the group");
        }
    }
    gens.iter().map(residues).collect()
}

fn residues(g: &GroupElement) -> Vec<i64> {
    g.residues().iter().map(|&x| x as i64).collect()
}

pub fn effects_json(m: &CovariantPovm) -> Effects {
    let outcomes = m.spectrum().outcomes();
    Effects(
        m.effects()
            .iter()
            .enumerate()
            .map(|(w, e)| (outcomes.representative(w).label(), matrix_to_json(e)))
            .collect(),
    )
}

/// Effects-form instance that reproduces `m`.
pub fn observable_instance(m: &CovariantPovm, tol: &Tolerances) -> InstanceFile {
    let spec = m.spectrum();
    InstanceFile {
        group: Some(spec.group().factors().to_vec()),
        subgroup_generators: Some(generators(spec)),
        spectrum: Some(
            spec.entries()
                .iter()
                .map(|(g, n)| SpectrumEntry {
                    character: residues(g),
                    multiplicity: *n,
                })
                .collect(),
        ),
        effects: Some(effects_json(m)),
        tolerances: Some(tolerances_json(tol)),
        ..Default::default()
    }
}

/// Rebuilds an observable with the spectrum of `like` from serialized effects.
pub fn effects_from_json(like: &CovariantPovm, effects: &Effects) -> Result<CovariantPovm, CliError> {
    let file = InstanceFile {
        effects: Some(effects.clone()),
        ..observable_instance(like, &Tolerances::default())
    };
    match load(&file, &Tolerances::default())? {
        Observable::Povm(m) => Ok(*m),
        Observable::Moment { .. } => unreachable!("effects form"),
    }
}
