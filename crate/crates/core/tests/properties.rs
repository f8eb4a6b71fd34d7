use covext_core::abelian::{annihilator, subgroup_closure, transversal};
use covext_core::construct::{
    build_from_gram, build_from_isometries, convolve, eta_from_rho, extract_gram, isometries_from_gram, rho_from_eta,
};
use covext_core::extremality::{
    covariant_extreme_test, global_extreme_test, global_extreme_test_with_section, midpoint_oracle, rank_of,
    NaimarkDilation,
};
use covext_core::linalg::{frobenius, identity, max_abs};
use covext_core::models::MomentObservable;
use covext_core::povm::{check_covariance, distance, is_pvm, mix, validate_povm};
use covext_core::sample::{
    random_covariant_povm, random_isometry_field, random_probability, random_section, random_spectrum,
    random_unitary, InstanceShape,
};
use covext_core::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn groups_up_to(max: u64) -> Vec<GroupSpec> {
    let mut out = Vec::new();
    for a in 1..=max {
        out.push(GroupSpec::cyclic(a).unwrap());
        for b in 2..=max {
            if a >= 2 && a * b <= max {
                out.push(GroupSpec::new(&[a, b]).unwrap());
            }
        }
    }
    out
}

#[test]
fn double_annihilator_exhaustive() {
    for g in groups_up_to(16) {
        let elems = g.elements();
        for a in &elems {
            for b in &elems {
                let h = subgroup_closure(&g, &[a.clone(), b.clone()]).unwrap();
                let ann = annihilator(&g, &h).unwrap();
                assert_eq!(h.order() * ann.order(), g.order());
                assert_eq!(annihilator(&g, &ann).unwrap(), h, "{:?}", g.factors());
            }
        }
    }
}

fn instance(seed: u64) -> (ChaCha8Rng, CovariantPovm) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = random_spectrum(&mut rng, &InstanceShape::default()).unwrap();
    let m = random_covariant_povm(&mut rng, &s, 4).unwrap();
    (rng, m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pairing_orthogonality(a in 1u64..6, b in 1u64..4, i in 0usize..24, j in 0usize..24) {
        let g = GroupSpec::new(&[a, b]).unwrap();
        let (x, y) = (g.element_at(i % g.order()), g.element_at(j % g.order()));
        let s: num_complex::Complex64 = g.elements().iter().map(|e| g.pairing(e, &x) * g.pairing(e, &y).conj()).sum();
        let want = if x == y { g.order() as f64 } else { 0.0 };
        prop_assert!((s - num_complex::Complex64::new(want, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn action_composes(a in 2u64..7, b in 1u64..4, gen in 0usize..30, i in 0usize..30, j in 0usize..30, w in 0usize..30) {
        let g = GroupSpec::new(&[a, b]).unwrap();
        let h = subgroup_closure(&g, &[g.element_at(gen % g.order())]).unwrap();
        let t = transversal(&g, &h).unwrap();
        let (x, y) = (g.element_at(i % g.order()), g.element_at(j % g.order()));
        let w = w % t.len();
        prop_assert_eq!(t.act(&x, t.act(&y, w)), t.act(&g.add(&x, &y), w));
        prop_assert_eq!(t.act(&g.zero(), w), w);
    }

    #[test]
    fn representation_is_homomorphism(seed in any::<u64>()) {
        let (mut rng, m) = instance(seed);
        let s = m.spectrum();
        let elems = s.group().elements();
        let x = &elems[rng.random_range(0..elems.len())];
        let y = &elems[rng.random_range(0..elems.len())];
        let lhs = s.rep_matrix(x) * s.rep_matrix(y);
        prop_assert!(max_abs(&(lhs - s.rep_matrix(&s.group().add(x, y)))) < 1e-12);
    }

    #[test]
    fn structure_round_trip(seed in any::<u64>()) {
        let (_, m) = instance(seed);
        let gram = extract_gram(&m, &tol()).unwrap();
        let field = isometries_from_gram(&gram, &tol()).unwrap();
        let rebuilt = build_from_isometries(&field, &tol()).unwrap();
        prop_assert!(distance(&rebuilt, &m).unwrap() < 1e-9);
        prop_assert_eq!(field.ambient_dim(), gram.rank());
        prop_assert!(distance(&build_from_gram(&gram, &tol()).unwrap(), &m).unwrap() < 1e-9);
    }

    #[test]
    fn gauge_invariance(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_spectrum(&mut rng, &InstanceShape::default()).unwrap();
        let field = random_isometry_field(&mut rng, &s, 3).unwrap();
        let v = random_unitary(&mut rng, 3);
        let a = build_from_isometries(&field, &tol()).unwrap();
        let b = build_from_isometries(&field.left_multiplied(&v, &tol()).unwrap(), &tol()).unwrap();
        prop_assert!(distance(&a, &b).unwrap() < 1e-10);
    }

    #[test]
    fn convolution_is_associative_and_affine(seed in any::<u64>(), t in 0.0f64..1.0) {
        let (mut rng, m) = instance(seed);
        let q = m.spectrum().outcomes();
        let r1 = random_probability(&mut rng, q.len()).unwrap();
        let r2 = random_probability(&mut rng, q.len()).unwrap();
        let lhs = convolve(&r1.convolve(&r2, q).unwrap(), &m).unwrap();
        let rhs = convolve(&r1, &convolve(&r2, &m).unwrap()).unwrap();
        prop_assert!(distance(&lhs, &rhs).unwrap() < 1e-10);
        let mixed = convolve(&r1.mix(t, &r2).unwrap(), &m).unwrap();
        let split = mix(t, &convolve(&r1, &m).unwrap(), &convolve(&r2, &m).unwrap()).unwrap();
        prop_assert!(distance(&mixed, &split).unwrap() < 1e-10);
        prop_assert!(validate_povm(&lhs, &tol()).passes());
        prop_assert!(check_covariance(&lhs, &tol()).is_covariant);
    }

    #[test]
    fn mixing_preserves_validity(seed in any::<u64>(), t in 0.0f64..1.0) {
        let (mut rng, m1) = instance(seed);
        let m2 = random_covariant_povm(&mut rng, m1.spectrum(), 4).unwrap();
        let m = mix(t, &m1, &m2).unwrap();
        prop_assert!(validate_povm(&m, &tol()).passes());
        prop_assert!(check_covariance(&m, &tol()).is_covariant);
    }

    #[test]
    fn oracle_never_contradicts_extreme(seed in any::<u64>()) {
        let (_, m) = instance(seed);
        let report = covariant_extreme_test(&m, &tol()).unwrap();
        if let Some(dec) = midpoint_oracle(&m, 20, seed, &tol()) {
            prop_assert_eq!(report.verdict, Verdict::NotExtreme);
            prop_assert!(distance(&mix(0.5, &dec.plus, &dec.minus).unwrap(), &m).unwrap() < 1e-9);
        }
    }

    #[test]
    fn covariant_freedom_implies_global_freedom(seed in any::<u64>()) {
        let (_, m) = instance(seed);
        let cov = covariant_extreme_test(&m, &tol()).unwrap();
        let glob = global_extreme_test(&m, &tol()).unwrap();
        if cov.verdict == Verdict::NotExtreme {
            prop_assert_eq!(glob.verdict, Verdict::NotExtreme);
        }
        for r in [&cov, &glob] {
            prop_assert_eq!(r.verdict == Verdict::Extreme, r.perturbation_dim == 0);
            if let Some(c) = &r.certificate {
                prop_assert!((c.norm() - 1.0).abs() < 1e-9);
                prop_assert!(r.residuals.constraint < 1e-9);
                prop_assert!(r.residuals.reconstruction < 1e-9);
            }
        }
        if rank_of(&m, &tol()).unwrap() == 1 {
            prop_assert_eq!(cov.verdict, Verdict::Extreme);
        }
    }

    #[test]
    fn section_independence(seed in any::<u64>()) {
        let (mut rng, m) = instance(seed);
        let base = global_extreme_test(&m, &tol()).unwrap();
        let section = random_section(&mut rng, m.spectrum().outcomes());
        let other = global_extreme_test_with_section(&m, &section, &tol()).unwrap();
        prop_assert_eq!(base.verdict, other.verdict);
        prop_assert_eq!(base.perturbation_dim, other.perturbation_dim);
    }

    #[test]
    fn pvm_iff_dilation_unitary(seed in any::<u64>(), sharp in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = if sharp {
            // regular spectrum with a unitary-on-coset field is sharp
            let n = rng.random_range(2..7);
            let g = GroupSpec::cyclic(n).unwrap();
            let s = Spectrum::regular(&g, &Subgroup::trivial(&g)).unwrap();
            let v = random_unitary(&mut rng, 1);
            build_from_isometries(&IsometryField::constant(&s).left_multiplied(&v, &tol()).unwrap(), &tol()).unwrap()
        } else {
            instance(seed).1
        };
        let dil = NaimarkDilation::minimal(&m, &tol()).unwrap();
        prop_assert!(dil.isometry_residual() < 1e-9);
        prop_assert_eq!(is_pvm(&m, &tol()).unwrap(), dil.is_unitary(&tol()));
        if sharp {
            prop_assert!(dil.is_unitary(&tol()));
        }
    }

    #[test]
    fn bochner_round_trip(seed in any::<u64>(), n in 2u64..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = GroupSpec::cyclic(n).unwrap();
        let rho = random_probability(&mut rng, n as usize).unwrap();
        let back = rho_from_eta(&eta_from_rho(&g, &rho, &tol()).unwrap(), &tol()).unwrap();
        for (a, b) in rho.weights().iter().zip(back.weights()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn arc_partitions_sum_to_identity(seed in any::<u64>(), pieces in 1usize..8, d in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let indices: Vec<i64> = (0..d as i64).map(|k| 2 * k - rng.random_range(0..2)).collect();
        let v = covext_core::sample::gaussian_matrix(&mut rng, 3, d);
        let mut c = v.adjoint() * v;
        for k in 0..d {
            let s = c[(k, k)].re.sqrt();
            for j in 0..d {
                c[(k, j)] /= s;
                c[(j, k)] /= s;
            }
        }
        let obs = MomentObservable::new(indices, c, &tol()).unwrap();
        let start: f64 = rng.random_range(-3.0..3.0);
        let mut cuts: Vec<f64> = (0..pieces - 1).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        cuts.push(0.0);
        cuts.push(std::f64::consts::TAU);
        cuts.sort_by(f64::total_cmp);
        let total = cuts.windows(2).fold(covext_core::linalg::zeros(d, d), |acc, w| {
            acc + obs.effects_on_arc(start + w[0], start + w[1]).unwrap()
        });
        prop_assert!(frobenius(&(total - identity(d))) < 1e-10);
        let free = obs.free_modes();
        prop_assert!(!free.modes.is_empty() && free.all_beyond_window_free);
    }
}
