//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero on any failure.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use covext_core::construct::{
    build_from_isometries, convolve, eta_from_rho, extract_gram, invariant_from_rho, isometries_from_gram,
    rho_from_eta,
};
use covext_core::extremality::{
    covariant_extreme_test, global_extreme_test, global_extreme_test_with_section, midpoint_oracle, rank_of,
};
use covext_core::linalg::{c64, CMatrix};
use covext_core::models::laguerre::laguerre_identity_error;
use covext_core::models::{canonical_position, invariant_extreme_classify, position_difference, qubit_cyclic};
use covext_core::povm::{distance, is_pvm, mix, validate_povm};
use covext_core::sample::{
    random_covariant_povm, random_isometry_field, random_probability, random_section, random_spectrum,
    random_unitary, InstanceShape,
};
use covext_core::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn criterion_1() -> Outcome {
    let tol = Tolerances::default();
    let start = Instant::now();
    let m = canonical_position(8).map_err(e)?;
    let valid = validate_povm(&m, &tol);
    ensure(valid.passes(), || format!("validation failed: {valid:?}"))?;
    ensure(is_pvm(&m, &tol).map_err(e)?, || "not a PVM".into())?;
    let cov = covariant_extreme_test(&m, &tol).map_err(e)?;
    let glob = global_extreme_test(&m, &tol).map_err(e)?;
    let elapsed = start.elapsed();
    ensure(cov.verdict == Verdict::Extreme && cov.perturbation_dim == 0, || "covariant not Extreme".into())?;
    ensure(glob.verdict == Verdict::Extreme && glob.perturbation_dim == 0, || "global not Extreme".into())?;
    let cs = cov.smallest_retained.ok_or("no retained singular value (covariant)")?;
    let gs = glob.smallest_retained.ok_or("no retained singular value (global)")?;
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "canonical position Z8: PVM, Extreme/Extreme, smallest retained σ {cs:.3e} / {gs:.3e}, {:.1} ms",
        elapsed.as_secs_f64() * 1e3
    ))
}

fn criterion_2() -> Outcome {
    let tol = Tolerances::default();
    let m = qubit_cyclic(4).map_err(e)?;
    let rank = rank_of(&m, &tol).map_err(e)?;
    ensure(rank == 1, || format!("rank {rank}"))?;
    let cov = covariant_extreme_test(&m, &tol).map_err(e)?;
    ensure(cov.verdict == Verdict::Extreme, || "covariant not Extreme".into())?;
    let glob = global_extreme_test(&m, &tol).map_err(e)?;
    ensure(glob.verdict == Verdict::NotExtreme && glob.perturbation_dim >= 1, || "global not NotExtreme".into())?;
    let (plus, minus) = glob.witnesses.as_ref().ok_or("no witnesses")?;
    let rec = distance(&mix(0.5, plus, minus).map_err(e)?, &m).map_err(e)?;
    ensure(rec < 1e-9, || format!("reconstruction {rec:.3e}"))?;
    ensure(validate_povm(plus, &tol).passes() && validate_povm(minus, &tol).passes(), || {
        "witness fails validation".into()
    })?;
    Ok(format!(
        "qubit_cyclic(4): rank 1, covariant Extreme, global NotExtreme (dim {}), reconstruction {rec:.1e}",
        glob.perturbation_dim
    ))
}

fn criterion_3() -> Outcome {
    let tol = Tolerances::new(1e-8, 1e-8, 1e-9).map_err(e)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let shape = InstanceShape::default();
    let mut done = 0;
    let mut worst_trial = 0;
    let mut attempts = 0;
    while done < 20 {
        attempts += 1;
        ensure(attempts < 1000, || "could not draw distinct pairs".into())?;
        let s = random_spectrum(&mut rng, &shape).map_err(e)?;
        let m1 = random_covariant_povm(&mut rng, &s, 4).map_err(e)?;
        let m2 = random_covariant_povm(&mut rng, &s, 4).map_err(e)?;
        if distance(&m1, &m2).map_err(e)? < 1e-3 {
            continue;
        }
        let m = mix(0.5, &m1, &m2).map_err(e)?;
        let cov = covariant_extreme_test(&m, &tol).map_err(e)?;
        let glob = global_extreme_test(&m, &tol).map_err(e)?;
        ensure(cov.verdict == Verdict::NotExtreme, || format!("pair {done}: covariant Extreme"))?;
        ensure(glob.verdict == Verdict::NotExtreme, || format!("pair {done}: global Extreme"))?;
        let dec = midpoint_oracle(&m, 500, done as u64, &tol).ok_or_else(|| format!("pair {done}: oracle found nothing"))?;
        let rec = distance(&mix(0.5, &dec.plus, &dec.minus).map_err(e)?, &m).map_err(e)?;
        ensure(rec < 1e-8, || format!("pair {done}: oracle reconstruction {rec:.3e}"))?;
        worst_trial = worst_trial.max(dec.trial + 1);
        done += 1;
    }
    Ok(format!("20 mixtures: NotExtreme in both tests, oracle decomposed all (max {worst_trial} trials)"))
}

fn criterion_4() -> Outcome {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let shape = InstanceShape::default();
    let (mut extreme, mut not_extreme, mut found) = (0, 0, 0);
    for k in 0..60u64 {
        let s = random_spectrum(&mut rng, &shape).map_err(e)?;
        let m = random_covariant_povm(&mut rng, &s, 4).map_err(e)?;
        let report = covariant_extreme_test(&m, &tol).map_err(e)?;
        let dec = midpoint_oracle(&m, 200, k, &tol);
        match report.verdict {
            Verdict::Extreme => extreme += 1,
            Verdict::NotExtreme => not_extreme += 1,
        }
        if dec.is_some() {
            found += 1;
            ensure(report.verdict == Verdict::NotExtreme, || {
                format!("instance {k}: oracle decomposition but verdict Extreme")
            })?;
        }
    }
    Ok(format!(
        "60 instances: {extreme} Extreme, {not_extreme} NotExtreme, oracle found {found}, no contradiction"
    ))
}

fn criterion_5() -> Outcome {
    let tol = Tolerances::default();
    let n = 8;
    for q in 0..n {
        let rho = ProbabilityVector::point_mass(n, q).map_err(e)?;
        let v = invariant_extreme_classify(&rho, &tol).map_err(e)?;
        let m = invariant_from_rho(n as u64, &rho, &tol).map_err(e)?;
        ensure(v == Verdict::Extreme && is_pvm(&m, &tol).map_err(e)?, || format!("point mass {q}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = GroupSpec::cyclic(n as u64).map_err(e)?;
    let mut worst_bochner = 0.0_f64;
    let mut worst_affine = 0.0_f64;
    for k in 0..20 {
        let rho = random_probability(&mut rng, n).map_err(e)?;
        let v = invariant_extreme_classify(&rho, &tol).map_err(e)?;
        let m = invariant_from_rho(n as u64, &rho, &tol).map_err(e)?;
        let cov = covariant_extreme_test(&m, &tol).map_err(e)?;
        ensure(v == Verdict::NotExtreme && cov.verdict == Verdict::NotExtreme, || format!("random rho {k}"))?;
        let back = rho_from_eta(&eta_from_rho(&g, &rho, &tol).map_err(e)?, &tol).map_err(e)?;
        for (a, b) in rho.weights().iter().zip(back.weights()) {
            worst_bochner = worst_bochner.max((a - b).abs());
        }
        // ρ ∗ M_{δ₀} equals the invariant observable of ρ, and the map ρ ↦ ρ ∗ M is affine
        let sharp = canonical_position(n as u64).map_err(e)?;
        let other = random_probability(&mut rng, n).map_err(e)?;
        let t = 0.3;
        let lhs = convolve(&rho.mix(t, &other).map_err(e)?, &sharp).map_err(e)?;
        let rhs = mix(t, &convolve(&rho, &sharp).map_err(e)?, &convolve(&other, &sharp).map_err(e)?).map_err(e)?;
        worst_affine = worst_affine.max(distance(&lhs, &rhs).map_err(e)?);
    }
    ensure(worst_bochner < 1e-12, || format!("Bochner round trip {worst_bochner:.3e}"))?;
    ensure(worst_affine < 1e-10, || format!("convolution affinity {worst_affine:.3e}"))?;
    Ok(format!(
        "Z8: 8 point masses Extreme+PVM, 20 random rho NotExtreme, Bochner {worst_bochner:.1e}, affinity {worst_affine:.1e}"
    ))
}

/// Position-basis unitary built from two one-dimensional Fourier matrices.
fn double_dft(n: usize) -> CMatrix {
    let f = CMatrix::from_fn(n, n, |x, k| {
        let th = 2.0 * PI * (x * k) as f64 / n as f64;
        c64(th.cos(), th.sin()) / (n as f64).sqrt()
    });
    f.kronecker(&f)
}

fn criterion_6() -> Outcome {
    let tol = Tolerances::default();
    let n = 4usize;
    let m = position_difference(n as u64, &ProbabilityVector::point_mass(n, 0).map_err(e)?).map_err(e)?;
    ensure(is_pvm(&m, &tol).map_err(e)?, || "not a PVM".into())?;
    ensure(covariant_extreme_test(&m, &tol).map_err(e)?.verdict == Verdict::Extreme, || "covariant".into())?;
    ensure(global_extreme_test(&m, &tol).map_err(e)?.verdict == Verdict::Extreme, || "global".into())?;
    let noisy = position_difference(n as u64, &ProbabilityVector::uniform(n).map_err(e)?).map_err(e)?;
    ensure(covariant_extreme_test(&noisy, &tol).map_err(e)?.verdict == Verdict::NotExtreme, || "noisy covariant".into())?;
    ensure(global_extreme_test(&noisy, &tol).map_err(e)?.verdict == Verdict::NotExtreme, || "noisy global".into())?;
    // (F(k)φ)(w, z) = [z − w = k] φ(w, z); position (w, z) is index w·n + z
    let u = double_dft(n);
    let outcomes = m.spectrum().outcomes();
    let mut worst = 0.0_f64;
    for k in 0..n {
        let rep = outcomes.representative(k).residues().to_vec();
        ensure(rep == vec![0, k as u64], || format!("outcome {k} has representative {rep:?}"))?;
        let pos = u.adjoint() * m.effect(k) * &u;
        for a in 0..n * n {
            for b in 0..n * n {
                let (w, z) = (a / n, a % n);
                let want = if a == b && (z + n - w) % n == k { 1.0 } else { 0.0 };
                worst = worst.max((pos[(a, b)] - c64(want, 0.0)).norm());
            }
        }
    }
    ensure(worst < 1e-10, || format!("position basis mismatch {worst:.3e}"))?;
    Ok(format!("position_difference(4): PVM, Extreme/Extreme, uniform noise NotExtreme, direct definition {worst:.1e}"))
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let grid: Vec<f64> = (-100..=100).map(|k| k as f64 / 10.0).collect();
    let mut worst = 0.0_f64;
    let mut at = (0, 0);
    for m in 0..=6 {
        for n in 0..=6 {
            let err = laguerre_identity_error(m, n, &grid, 0.01);
            if err > worst {
                worst = err;
                at = (m, n);
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(worst < 1e-6, || format!("error {worst:.3e} at (m, n) = {at:?}"))?;
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!("m, n ≤ 6 on [-10, 10]: max error {worst:.2e} at {at:?}, {:.2} s", elapsed.as_secs_f64()))
}

fn criterion_8() -> Outcome {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let shape = InstanceShape::default();
    let (mut round, mut gauge) = (0.0_f64, 0.0_f64);
    for _ in 0..50 {
        let s = random_spectrum(&mut rng, &shape).map_err(e)?;
        let ambient = 3.max(s.entries().iter().map(|x| x.1).max().unwrap_or(1));
        let field = random_isometry_field(&mut rng, &s, ambient).map_err(e)?;
        let m = build_from_isometries(&field, &tol).map_err(e)?;
        let gram = extract_gram(&m, &tol).map_err(e)?;
        let rebuilt = build_from_isometries(&isometries_from_gram(&gram, &tol).map_err(e)?, &tol).map_err(e)?;
        round = round.max(distance(&rebuilt, &m).map_err(e)?);
        let v = random_unitary(&mut rng, ambient);
        let moved = build_from_isometries(&field.left_multiplied(&v, &tol).map_err(e)?, &tol).map_err(e)?;
        gauge = gauge.max(distance(&moved, &m).map_err(e)?);
    }
    ensure(round < 1e-9, || format!("round trip {round:.3e}"))?;
    ensure(gauge < 1e-10, || format!("gauge {gauge:.3e}"))?;
    Ok(format!("50 instances: round trip {round:.1e}, gauge {gauge:.1e}"))
}

fn criterion_9() -> Outcome {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let shape = InstanceShape::default();
    let mut dims = Vec::new();
    for k in 0..10 {
        let s = random_spectrum(&mut rng, &shape).map_err(e)?;
        let m = random_covariant_povm(&mut rng, &s, 3).map_err(e)?;
        let base = global_extreme_test(&m, &tol).map_err(e)?.perturbation_dim;
        for _ in 0..5 {
            let section = random_section(&mut rng, s.outcomes());
            let d = global_extreme_test_with_section(&m, &section, &tol).map_err(e)?.perturbation_dim;
            ensure(d == base, || format!("instance {k}: dim {d} vs {base}"))?;
        }
        dims.push(base);
    }
    Ok(format!("10 instances x 5 sections: perturbation dims {dims:?} unchanged"))
}

fn truncation() -> Outcome {
    let tol = Tolerances::default();
    for d in 1..=6 {
        let phase = models::MomentObservable::canonical_phase(d).map_err(e)?;
        let free = phase.free_modes();
        ensure(!free.modes.is_empty() && free.all_beyond_window_free, || format!("d = {d}: no free modes"))?;
        let report = models::moment_covariant_extreme(&phase, &tol).map_err(e)?;
        ensure(report.verdict == Verdict::Extreme, || format!("d = {d}: covariant NotExtreme"))?;
    }
    Ok("canonical phase truncations d ≤ 6: covariant Extreme, free modes ±(d) present, global NotExtreme".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("1 pvm-extremality", criterion_1),
        ("2 qubit-cyclic", criterion_2),
        ("3 mixture-detection", criterion_3),
        ("4 oracle-agreement", criterion_4),
        ("5 invariant-position", criterion_5),
        ("6 position-difference", criterion_6),
        ("7 laguerre", criterion_7),
        ("8 structure-round-trip", criterion_8),
        ("9 section-independence", criterion_9),
        ("- phase-truncation", truncation),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
