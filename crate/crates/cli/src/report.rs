//! Building and verifying reports.

use covext_core::extremality::{
    covariant_extreme_test, global_extreme_test, midpoint_oracle, rank1_admissible, rank_of, Residuals,
};
use covext_core::models::{moment_covariant_extreme, MomentObservable};
use covext_core::povm::{check_covariance, distance, is_pvm, mix, validate_povm};
use covext_core::{Certificate, CovariantPovm, ExtremalityReport, Tolerances, Verdict};

use crate::instance::{effects_from_json, effects_json, observable_instance, tolerances_json, Observable};
use crate::json::{
    matrix_from_json, matrix_to_json, ArcEffect, CertificateJson, CorrelationWitnesses, ExtremalityJson,
    FreeModesJson, InstanceFile, MomentJson, OracleJson, ReportFile, ResidualsJson, Validity, Witnesses,
    REPORT_FORMAT,
};
use crate::CliError;

const TAIL: usize = 8;

#[derive(Debug, Clone, Copy, Default)]
pub struct Checks {
    pub covariant: bool,
    pub global: bool,
    pub pvm: bool,
    pub oracle_trials: Option<usize>,
    pub jobs: usize,
}

pub fn empty_report(instance: &InstanceFile, tol: &Tolerances, seed: u64) -> ReportFile {
    ReportFile {
        format: REPORT_FORMAT.into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        seed,
        instance: instance.clone(),
        tolerances: tolerances_json(tol),
        observable: None,
        validity: None,
        pvm: None,
        rank: None,
        rank1_admissible: None,
        covariant_extremality: None,
        global_extremality: None,
        oracle: None,
        moment: None,
    }
}

fn validity(m: &CovariantPovm, tol: &Tolerances) -> Validity {
    let v = validate_povm(m, tol);
    let c = check_covariance(m, tol);
    Validity {
        is_positive: v.is_positive,
        is_normalized: v.is_normalized,
        min_eigenvalue: v.min_eigenvalue,
        normalization_residual: v.normalization_residual,
        hermiticity_residual: v.hermiticity_residual,
        is_covariant: c.is_covariant,
        covariance_residual: c.max_residual.max(c.block_residual),
    }
}

fn residuals_json(r: &Residuals) -> ResidualsJson {
    ResidualsJson {
        constraint: r.constraint,
        reconstruction: r.reconstruction,
        witness_min_eigenvalue: r.witness_min_eigenvalue,
        witness_normalization: r.witness_normalization,
    }
}

fn certificate_json(c: &Certificate) -> CertificateJson {
    match c {
        Certificate::Covariant { cosets, blocks } => CertificateJson {
            kind: "covariant".into(),
            cosets: Some(cosets.clone()),
            section: None,
            blocks: blocks.iter().map(matrix_to_json).collect(),
        },
        Certificate::Global { section, components } => CertificateJson {
            kind: "global".into(),
            cosets: None,
            section: Some(section.iter().map(|g| g.label()).collect()),
            blocks: components.iter().map(matrix_to_json).collect(),
        },
        Certificate::Moment { operator } => CertificateJson {
            kind: "moment".into(),
            cosets: None,
            section: None,
            blocks: vec![matrix_to_json(operator)],
        },
    }
}

fn extremality_json<W>(r: &ExtremalityReport<W>, witnesses: Option<Witnesses>) -> ExtremalityJson {
    let n = r.singular_values.len();
    ExtremalityJson {
        verdict: r.verdict.to_string(),
        perturbation_dim: r.perturbation_dim,
        sigma_max: r.sigma_max,
        threshold: r.threshold,
        smallest_retained: r.smallest_retained,
        singular_value_tail: r.singular_values[n.saturating_sub(TAIL)..].to_vec(),
        singular_values: r.singular_values.clone(),
        certificate: r.certificate.as_ref().map(certificate_json),
        witnesses,
        residuals: residuals_json(&r.residuals),
    }
}

fn povm_witnesses(r: &ExtremalityReport) -> Option<Witnesses> {
    r.witnesses.as_ref().map(|(p, m)| Witnesses {
        plus: effects_json(p),
        minus: effects_json(m),
    })
}

/// Effects, validity, PVM flag and rank.
pub fn describe(report: &mut ReportFile, obs: &Observable, tol: &Tolerances) -> Result<(), CliError> {
    match obs {
        Observable::Povm(m) => {
            report.observable = Some(observable_instance(m, tol));
            report.validity = Some(validity(m, tol));
            report.pvm = Some(is_pvm(m, tol)?);
            report.rank = Some(rank_of(m, tol)?);
            report.rank1_admissible = Some(rank1_admissible(m.spectrum()));
        }
        Observable::Moment { observable, arcs } => {
            let arcs = arcs
                .iter()
                .map(|&(a, b)| {
                    Ok(ArcEffect {
                        theta1: a,
                        theta2: b,
                        effect: matrix_to_json(&observable.effects_on_arc(a, b)?),
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            report.moment = Some(MomentJson {
                indices: observable.indices().to_vec(),
                correlation: matrix_to_json(observable.correlation()),
                arcs,
                covariant_extremality: None,
                witnesses: None,
                free_modes: None,
                global_verdict: None,
            });
        }
    }
    Ok(())
}

fn oracle_json(m: &CovariantPovm, trials: usize, seed: u64, tol: &Tolerances) -> OracleJson {
    match midpoint_oracle(m, trials, seed, tol) {
        Some(d) => OracleJson {
            trials,
            seed,
            found: true,
            trial: Some(d.trial),
            epsilon: Some(d.epsilon),
            direction: Some(matrix_to_json(&d.direction)),
            witnesses: Some(Witnesses {
                plus: effects_json(&d.plus),
                minus: effects_json(&d.minus),
            }),
        },
        None => OracleJson {
            trials,
            seed,
            found: false,
            trial: None,
            epsilon: None,
            direction: None,
            witnesses: None,
        },
    }
}

/// Runs the requested checks, in parallel when `jobs > 1`, and fills the report.
pub fn run_checks(
    report: &mut ReportFile,
    obs: &Observable,
    checks: &Checks,
    seed: u64,
    tol: &Tolerances,
) -> Result<(), CliError> {
    match obs {
        Observable::Povm(m) => {
            if !checks.pvm {
                report.pvm = None;
            }
            let cov = || -> Result<Option<ExtremalityJson>, CliError> {
                if !checks.covariant {
                    return Ok(None);
                }
                let r = covariant_extreme_test(m, tol)?;
                Ok(Some(extremality_json(&r, povm_witnesses(&r))))
            };
            let glob = || -> Result<Option<ExtremalityJson>, CliError> {
                if !checks.global {
                    return Ok(None);
                }
                let r = global_extreme_test(m, tol)?;
                Ok(Some(extremality_json(&r, povm_witnesses(&r))))
            };
            let oracle = || checks.oracle_trials.map(|n| oracle_json(m, n, seed, tol));
            let (c, g, o) = if checks.jobs > 1 {
                std::thread::scope(|s| {
                    let hc = s.spawn(cov);
                    let hg = s.spawn(glob);
                    let o = oracle();
                    (hc.join().expect("worker"), hg.join().expect("worker"), o)
                })
            } else {
                (cov(), glob(), oracle())
            };
            report.covariant_extremality = c?;
            report.global_extremality = g?;
            report.oracle = o;
        }
        Observable::Moment { observable, .. } => {
            let moment = report.moment.as_mut().expect("described first");
            if checks.covariant {
                let r = moment_covariant_extreme(observable, tol)?;
                moment.witnesses = r.witnesses.as_ref().map(|(p, q)| CorrelationWitnesses {
                    plus: matrix_to_json(p.correlation()),
                    minus: matrix_to_json(q.correlation()),
                });
                moment.covariant_extremality = Some(extremality_json(&r, None));
            }
            if checks.global {
                let f = observable.free_modes();
                moment.global_verdict = Some(
                    if f.modes.is_empty() && !f.all_beyond_window_free {
                        "Undetermined".to_string()
                    } else {
                        Verdict::NotExtreme.to_string()
                    },
                );
                moment.free_modes = Some(FreeModesJson {
                    window: f.window,
                    modes: f.modes,
                    all_beyond_window_free: f.all_beyond_window_free,
                });
            }
        }
    }
    Ok(())
}

pub struct WitnessCheck {
    pub label: &'static str,
    pub ok: bool,
    pub detail: String,
}

fn check_pair(
    label: &'static str,
    m: &CovariantPovm,
    w: &Witnesses,
    covariant: bool,
    tol: &Tolerances,
) -> Result<WitnessCheck, CliError> {
    let plus = effects_from_json(m, &w.plus)?;
    let minus = effects_from_json(m, &w.minus)?;
    let vp = validate_povm(&plus, tol);
    let vm = validate_povm(&minus, tol);
    let rec = distance(&mix(0.5, &plus, &minus)?, m)?;
    let cov_ok = !covariant || (check_covariance(&plus, tol).is_covariant && check_covariance(&minus, tol).is_covariant);
    let ok = vp.passes() && vm.passes() && cov_ok && rec <= tol.eq_tol;
    Ok(WitnessCheck {
        label,
        ok,
        detail: format!(
            "reconstruction {rec:.3e}, min eigenvalue {:.3e}, normalization {:.3e}{}",
            vp.min_eigenvalue.min(vm.min_eigenvalue),
            vp.normalization_residual.max(vm.normalization_residual),
            if covariant { format!(", covariant {cov_ok}") } else { String::new() }
        ),
    })
}

fn check_moment(m: &MomentJson, w: &CorrelationWitnesses, tol: &Tolerances) -> Result<WitnessCheck, CliError> {
    let c = matrix_from_json(&m.correlation, "correlation")?;
    let parse = |x| -> Result<Option<MomentObservable>, CliError> {
        Ok(MomentObservable::new(m.indices.clone(), matrix_from_json(x, "witness correlation")?, tol).ok())
    };
    let (p, q) = (parse(&w.plus)?, parse(&w.minus)?);
    let (ok, detail) = match (p, q) {
        (Some(p), Some(q)) => {
            let mid = (p.correlation() + q.correlation()).scale(0.5);
            let rec = covext_core::linalg::frobenius(&(mid - &c));
            (rec <= tol.eq_tol, format!("reconstruction {rec:.3e}"))
        }
        _ => (false, "witness correlation is not a valid correlation matrix".into()),
    };
    Ok(WitnessCheck {
        label: "moment",
        ok,
        detail,
    })
}

/// Re-checks every witness pair in a report against its observable.
pub fn verify(report: &ReportFile) -> Result<Vec<WitnessCheck>, CliError> {
    let t = &report.tolerances;
    let d = Tolerances::default();
    let tol = Tolerances::new(
        t.psd_tol.unwrap_or(d.psd_tol),
        t.eq_tol.unwrap_or(d.eq_tol),
        t.rank_tol.unwrap_or(d.rank_tol),
    )?;
    let mut out = Vec::new();
    let observable = match &report.observable {
        Some(inst) => match crate::instance::load(inst, &tol)? {
            Observable::Povm(m) => Some(*m),
            Observable::Moment { .. } => None,
        },
        None => None,
    };
    let sections = [
        ("covariant", report.covariant_extremality.as_ref().and_then(|r| r.witnesses.as_ref()), true),
        ("global", report.global_extremality.as_ref().and_then(|r| r.witnesses.as_ref()), false),
        ("oracle", report.oracle.as_ref().and_then(|r| r.witnesses.as_ref()), true),
    ];
    for (label, w, covariant) in sections {
        if let Some(w) = w {
            let m = observable
                .as_ref()
                .ok_or_else(|| CliError::input("report has witnesses but no observable"))?;
            out.push(check_pair(label, m, w, covariant, &tol)?);
        }
    }
    if let Some(m) = &report.moment {
        if let Some(w) = &m.witnesses {
            out.push(check_moment(m, w, &tol)?);
        }
    }
    Ok(out)
}
