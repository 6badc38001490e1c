use std::f64::consts::TAU;

use proptest::prelude::*;

use rtpz::cramer::{envelope, lattice_distance_lower_bound};
use rtpz::distributions::{cumulants_from_moments, joint_abs_char_fn, moments_from_cumulants};
use rtpz::edgeworth::{average_cumulants, edgeworth_cdf_1d, EdgeworthApprox};
use rtpz::gaussian_reference::exact_expected_zeros;
use rtpz::harness::{run_universality, ExperimentConfig, ExperimentKind};
use rtpz::quadrature::integrate;
use rtpz::special::normal_cdf;
use rtpz::trigpoly::grid_points;
use rtpz::zeros::{count_sign_changes, kac_rice_count, zero_budget, ZeroCounter};
use rtpz::{CoefficientLaw, DiscreteAtoms, Mode, Poly};

fn discrete_law() -> impl Strategy<Value = CoefficientLaw> {
    prop::collection::vec((-3.0f64..3.0, 0.05f64..1.0), 2..6).prop_filter_map("distinct atoms", |pairs| {
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        let (a, w): (Vec<f64>, Vec<f64>) = pairs.iter().map(|&(x, w)| (x, w / total)).unzip();
        CoefficientLaw::discrete(a, w).ok().filter(|l| l.discrete_atoms().is_some_and(|d| d.len() >= 2))
    })
}

fn any_law() -> impl Strategy<Value = CoefficientLaw> {
    prop_oneof![
        discrete_law(),
        (-1.0f64..1.0, 0.1f64..3.0).prop_map(|(m, v)| CoefficientLaw::gaussian(m, v).unwrap()),
        (-2.0f64..0.0, 0.1f64..2.0).prop_map(|(lo, w)| CoefficientLaw::uniform(lo, lo + w).unwrap()),
        (3usize..9).prop_map(|p| CoefficientLaw::blocked_cosine(p).unwrap()),
    ]
}

fn poly(max_n: usize) -> impl Strategy<Value = Poly> {
    (1..=max_n).prop_flat_map(|n| {
        (
            prop::collection::vec(-1.0f64..1.0, n),
            prop::collection::vec(-1.0f64..1.0, n),
            prop::collection::vec(0.0f64..TAU, n),
        )
            .prop_map(|(a, b, t)| Poly::new(a, b, t).unwrap())
    })
}

fn mode() -> impl Strategy<Value = Mode> {
    prop_oneof![Just(Mode::Raw), Just(Mode::Normalized), Just(Mode::Rescaled)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn char_fn_bounded_and_hermitian(law in any_law(), t in -50.0f64..50.0) {
        let v = law.char_fn(t);
        prop_assert!(v.norm() <= 1.0 + 1e-12);
        let w = law.char_fn(-t);
        prop_assert!((v - w.conj()).norm() < 1e-12);
        let z = law.char_fn(0.0);
        prop_assert!((z.re - 1.0).abs() < 1e-12 && z.im.abs() < 1e-12);
    }

    #[test]
    fn standardize_centres_and_scales(law in any_law()) {
        let m = law.standardize().unwrap().moments(2).unwrap();
        prop_assert!(m.mean.abs() <= 1e-12);
        prop_assert!((m.variance - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn cumulant_roundtrip(law in any_law()) {
        let m = law.moments(8).unwrap();
        let raw: Vec<f64> = (1..=8).map(|k| m.raw_moment(k)).collect();
        let back = moments_from_cumulants(&cumulants_from_moments(&raw));
        for (x, y) in raw.iter().zip(&back) {
            prop_assert!((x - y).abs() <= 1e-10 * x.abs().max(1.0));
        }
    }

    #[test]
    fn tensorization(l1 in any_law(), l2 in any_law(), t1 in -20.0f64..20.0, t2 in -20.0f64..20.0) {
        let j = joint_abs_char_fn(&[&l1, &l2], &[t1, t2]);
        prop_assert!((j - l1.abs_char_fn(t1) * l2.abs_char_fn(t2)).abs() < 1e-14);
    }

    #[test]
    fn lattice_bound_holds(law in discrete_law()) {
        let atoms: DiscreteAtoms = law.discrete_atoms().unwrap();
        for k in 0..10_000 {
            let t = 0.005 * k as f64;
            let lb = lattice_distance_lower_bound(&atoms, t).unwrap();
            prop_assert!(1.0 - law.abs_char_fn(t) >= lb - 1e-12, "t = {t}");
        }
    }

    #[test]
    fn envelope_never_exceeds_one(law in any_law()) {
        let env = envelope(&law, 0.5, 30.0, 0.5, 20).unwrap();
        prop_assert!(env.sups.iter().all(|s| *s <= 1.0 + 1e-12));
    }

    #[test]
    fn derivatives_match_finite_differences(p in poly(12), mode in mode(), t in 0.0f64..TAU) {
        let scale = if mode == Mode::Rescaled { p.degree() as f64 } else { 1.0 };
        let t = t * scale;
        let h = 1e-5 * scale;
        for d in 0..3 {
            let fd = (p.eval(t + h, d, mode) - p.eval(t - h, d, mode)) / (2.0 * h);
            let exact = p.eval(t, d + 1, mode);
            let size = p.sup_bound(d + 1, mode);
            prop_assert!((fd - exact).abs() <= 1e-5 * size, "d {d}: {fd} vs {exact}");
        }
    }

    #[test]
    fn sup_bound_dominates(p in poly(10), mode in mode()) {
        let hi = if mode == Mode::Rescaled { TAU * p.degree() as f64 } else { TAU };
        for d in 0..4 {
            let bound = p.sup_bound(d, mode);
            let worst = p.eval_grid(0.0, hi, 1 << 12, d, mode).iter().fold(0.0f64, |a, v| a.max(v.abs()));
            prop_assert!(worst <= bound, "d {d}");
        }
    }

    #[test]
    fn rescaling_identity(p in poly(30), t in 0.0f64..TAU) {
        let n = p.degree() as f64;
        let a = p.eval(n * t, 0, Mode::Rescaled);
        let b = p.eval(t, 0, Mode::Normalized);
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
    }

    #[test]
    fn counts_within_budget_and_agree(p in poly(25), lo in 0.0f64..3.0, len in 0.5f64..TAU) {
        let hi = lo + len;
        let n = p.degree();
        let m = 32 * n * 8 + 1;
        let sc = count_sign_changes(&p, lo, hi, Mode::Normalized, m, false).unwrap();
        prop_assert!(sc.count <= zero_budget(n, len, Mode::Normalized));
        prop_assert!(sc.count <= 2 * n);
        let zc = ZeroCounter::new(&p, lo, hi, Mode::Normalized, m).unwrap();
        let report = zc.threshold();
        if report.delta_max > 0.0 {
            let delta = report.default_delta(n);
            let counts: Vec<_> = [1.0, 0.5, 0.1].iter().map(|s| zc.kac_rice(delta * s, &report)).collect();
            if counts.iter().all(|c| c.certified) {
                prop_assert!(counts.iter().all(|c| c.count == counts[0].count));
                if sc.certified {
                    prop_assert_eq!(sc.count, counts[0].count);
                }
            }
        }
    }

    #[test]
    fn counts_are_additive(p in poly(20), split in 0.05f64..0.95) {
        let (a, c) = (0.3, 0.3 + TAU);
        let b = a + split * (c - a);
        prop_assume!(p.eval(b, 0, Mode::Normalized).abs() > 1e-6);
        let count = |lo: f64, hi: f64| {
            let m = 64 * p.degree() * 8 + 1;
            count_sign_changes(&p, lo, hi, Mode::Normalized, m, false).unwrap()
        };
        let (whole, left, right) = (count(a, c), count(a, b), count(b, c));
        if whole.certified && left.certified && right.certified {
            prop_assert_eq!(whole.count, left.count + right.count);
        }
    }

    #[test]
    fn expected_zeros_linear(n in 1usize..500, a in -5.0f64..5.0, len in 0.1f64..10.0) {
        let unit = exact_expected_zeros(n, 0.0, 1.0);
        prop_assert!((exact_expected_zeros(n, a, a + len) - len * unit).abs() <= 1e-12 * len * unit);
        prop_assert!(exact_expected_zeros(n + 1, a, a + len) > exact_expected_zeros(n, a, a + len));
    }

    #[test]
    fn edgeworth_mass_and_fixed_point(law in discrete_law(), n in 2usize..40, x in -5.0f64..5.0) {
        let law = law.standardize().unwrap();
        let table = average_cumulants(std::slice::from_ref(&law), 5).unwrap();
        prop_assert!((edgeworth_cdf_1d(&table, n, 2, x).unwrap() - normal_cdf(x)).abs() < 1e-15);
        let approx = EdgeworthApprox::new(&table, 3).unwrap();
        let mass = integrate(|y| approx.density_1d(n, y), -14.0, 14.0, 1e-13);
        prop_assert!((mass - 1.0).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn universality_independent_of_workers(seed in any::<u64>(), w in 2usize..5) {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Universality, rtpz::distributions::make_sqrt_primes(), vec![9, 17]);
        cfg.trials = 12;
        cfg.seed = Some(seed);
        cfg.workers = Some(1);
        let a = run_universality(&cfg).unwrap().to_csv().unwrap();
        cfg.workers = Some(w);
        let b = run_universality(&cfg).unwrap().to_csv().unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn kac_rice_on_shifted_cosine_grid() {
    // cos(k t) has 2k zeros per period, away from the chosen endpoints
    for k in 1..=6 {
        let mut a = vec![0.0; k];
        a[k - 1] = 1.0;
        let p = Poly::with_zero_phases(a, vec![0.0; k]).unwrap();
        let zc = kac_rice_count(&p, 0.1, 0.1 + TAU, Mode::Raw, 1e-3).unwrap();
        assert_eq!(zc.count, 2 * k);
        assert!(zc.certified);
        assert_eq!(grid_points(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
    }
}
