use proptest::prelude::*;

use spde_galerkin::estimators::{fit_rate, pairwise_sum};
use spde_galerkin::models::{compute_s_q, eval_nonlinearity, Covariance, ModelSpec, Nonlinearity};
use spde_galerkin::noise::NoisePath;
use spde_galerkin::spectral::{
    apply_group_wave, from_collocation, to_collocation, Basis, Exponent, PhaseField, SpectralField,
};

fn basis() -> impl Strategy<Value = Basis> {
    prop_oneof![Just(Basis::DirichletSine), Just(Basis::FourierTorus)]
}

fn field_in(basis: Basis, n: usize) -> impl Strategy<Value = SpectralField<f64>> {
    prop::collection::vec(-2.0f64..2.0, basis.len_for(n))
        .prop_map(move |c| SpectralField::new(basis, n, c).unwrap())
        .prop_filter("nonzero", |u| u.hs_norm_sq_raw(0.0) > 1e-6)
}

fn field() -> impl Strategy<Value = SpectralField<f64>> {
    (basis(), 1usize..40).prop_flat_map(|(b, n)| field_in(b, n))
}

fn phase() -> impl Strategy<Value = PhaseField<f64>> {
    (1usize..32).prop_flat_map(|n| {
        (field_in(Basis::DirichletSine, n), field_in(Basis::DirichletSine, n))
            .prop_map(|(u, v)| PhaseField::new(u, v).unwrap())
    })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn smoothing_bound_has_explicit_constant(u in field(), t in 1e-3f64..2.0, s1 in 0.0f64..2.0, gap in 0.0f64..1.0) {
        let s2 = (s1 + 2.0 * gap).min(2.0);
        let c = if s2 == s1 { 1.0 } else { ((s2 - s1) / (2.0 * std::f64::consts::E * t)).powf((s2 - s1) / 2.0) };
        let lhs = u.apply_semigroup(t).unwrap().hs_norm_sq_raw(s2).sqrt();
        let rhs = c * u.hs_norm_sq_raw(s1).sqrt();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12), "{lhs} > {rhs}");
    }

    #[test]
    fn semigroup_law(u in field(), t1 in 0.0f64..0.5, t2 in 0.0f64..0.5) {
        let a = u.apply_semigroup(t1).unwrap().apply_semigroup(t2).unwrap();
        let b = u.apply_semigroup(t1 + t2).unwrap();
        prop_assert!(a.distance_sq_raw(&b, 0.0).sqrt() <= 1e-12 * u.hs_norm_sq_raw(0.0).sqrt());
    }

    #[test]
    fn semigroup_contracts_at_first_eigenvalue(u in field(), t in 0.0f64..1.0, s in -1.0f64..2.0) {
        let l1: f64 = u.basis().eigenvalue(0);
        let lhs = u.apply_semigroup(t).unwrap().hs_norm_sq_raw(s).sqrt();
        prop_assert!(lhs <= (-l1 * t).exp() * u.hs_norm_sq_raw(s).sqrt() * (1.0 + 1e-12));
    }

    #[test]
    fn wave_group_is_an_isometry(x in phase(), t in -5.0f64..5.0, s in prop::sample::select(vec![0.0, 0.25, 0.5])) {
        let y = apply_group_wave(&x, t);
        prop_assert!(rel(y.hs_norm_sq_raw(s).sqrt(), x.hs_norm_sq_raw(s).sqrt()) <= 1e-12);
        let back = apply_group_wave(&y, -t);
        prop_assert!(back.distance_sq_raw(&x, 0.0).sqrt() <= 1e-12 * x.hs_norm_sq_raw(0.0).sqrt());
    }

    #[test]
    fn projections_split_orthogonally(u in field(), cut in 0.0f64..1.0, s in -1.0f64..2.0) {
        let n = ((u.resolution() as f64 * cut) as usize).max(1).min(u.resolution());
        let p = u.project(n).unwrap();
        let q = u.project_complement(n).unwrap();
        prop_assert_eq!(p.project(n).unwrap(), p.clone());
        let total = u.hs_norm_sq_raw(s);
        prop_assert!(rel(p.hs_norm_sq_raw(s) + q.hs_norm_sq_raw(s), total) <= 1e-12);
        prop_assert!(p.hs_inner(&q, Exponent::new(s).unwrap()).abs() <= 1e-12 * total);
        prop_assert!((&p + &q).distance_sq_raw(&u, 0.0) == 0.0);
    }

    #[test]
    fn complement_bound(u in field(), cut in 0.0f64..1.0, s1 in -1.0f64..1.0, gap in 0.0f64..1.0) {
        // |P_N^perp u|_{s1} <= lambda_{N+1}^{-(s2-s1)/2} |u|_{s2}
        let s2 = s1 + gap;
        let n = ((u.resolution() as f64 * cut) as usize).max(1).min(u.resolution());
        let q = u.project_complement(n).unwrap();
        let lambda: f64 = u.basis().eigenvalue_of_wavenumber(n + 1);
        let bound = lambda.powf(-(s2 - s1) / 2.0) * u.hs_norm_sq_raw(s2).sqrt();
        prop_assert!(q.hs_norm_sq_raw(s1).sqrt() <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn collocation_round_trip(u in field(), extra in 0usize..16) {
        let nodes = 2 * (u.resolution() + 1) + extra;
        let values = to_collocation(&u, nodes).unwrap();
        let back = from_collocation(&values, u.basis(), u.resolution()).unwrap();
        prop_assert!(back.distance_sq_raw(&u, 0.0).sqrt() <= 1e-12 * u.hs_norm_sq_raw(0.0).sqrt());
    }

    #[test]
    fn hs_norm_matches_scalar_loop(u in field(), s in -2.0f64..2.0) {
        let mut acc = 0.0;
        for (i, c) in u.coeffs().iter().enumerate() {
            let k = u.basis().wavenumber(i) as f64;
            let lambda = match u.basis() {
                Basis::FourierTorus => 4.0 * std::f64::consts::PI.powi(2) * k * k + 1.0,
                _ => std::f64::consts::PI.powi(2) * k * k,
            };
            acc += lambda.powf(s) * c * c;
        }
        prop_assert!(rel(u.hs_norm(Exponent::new(s).unwrap()), acc.sqrt()) <= 1e-12);
    }

    #[test]
    fn nonlinearity_is_bounded_and_lipschitz(
        (u, v) in (1usize..24).prop_flat_map(|n| (field_in(Basis::DirichletSine, n), field_in(Basis::DirichletSine, n))),
        alpha in 0.1f64..3.0,
        surrogate in any::<bool>(),
    ) {
        let mut model = ModelSpec::heat_white_noise();
        model.nonlinearity = if surrogate {
            Nonlinearity::BoundedCubicSurrogate { amplitude: alpha }
        } else {
            Nonlinearity::ScaledSine { amplitude: alpha }
        };
        let fu = eval_nonlinearity(&model, &u).unwrap();
        let fv = eval_nonlinearity(&model, &v).unwrap();
        prop_assert!(fu.hs_norm_sq_raw(0.0).sqrt() <= model.nonlinearity.sup() + 1e-12);
        let lhs = fu.distance_sq_raw(&fv, 0.0).sqrt();
        let rhs = model.nonlinearity.lipschitz() * u.distance_sq_raw(&v, 0.0).sqrt();
        prop_assert!(lhs <= rhs + 1e-8);
    }

    #[test]
    fn s_q_is_monotone_and_capped(r1 in 0.0f64..3.0, r2 in 0.0f64..3.0, b in basis()) {
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let a = compute_s_q(&Covariance::Diagonal { exponent: lo }, b).unwrap();
        let c = compute_s_q(&Covariance::Diagonal { exponent: hi }, b).unwrap();
        prop_assert!(a <= c && c <= 1.0);
    }

    #[test]
    fn noise_coupling_is_bit_exact(seed in any::<u64>(), small in 1usize..8, extra in 1usize..40, b in basis()) {
        let a = NoisePath::<f64>::sample(seed, small, 8, 0.5, b).unwrap();
        let c = NoisePath::<f64>::sample(seed, small + extra, 8, 0.5, b).unwrap();
        for k in 0..a.rows() {
            prop_assert_eq!(a.mode_row(k), c.mode_row(k));
        }
    }

    #[test]
    fn fit_recovers_exact_power_laws(p in 0.1f64..3.0, c in 0.01f64..100.0) {
        let pts: Vec<(f64, f64)> = [4.0f64, 8.0, 16.0, 32.0, 64.0].iter().map(|&n| (n, c * n.powf(-p))).collect();
        let f = fit_rate(&pts).unwrap();
        prop_assert!((f.slope + p).abs() < 1e-10);
        prop_assert!((f.intercept - c.ln()).abs() < 1e-9);
    }

    #[test]
    fn pairwise_sum_is_accurate(xs in prop::collection::vec(-1e3f64..1e3, 0..500)) {
        let naive: f64 = xs.iter().sum();
        prop_assert!((pairwise_sum(&xs) - naive).abs() <= 1e-9 * xs.iter().map(|x| x.abs()).sum::<f64>().max(1.0));
    }
}
