use nalgebra::Matrix2;
use num_complex::Complex64;
use proptest::prelude::*;
use qbm_core::detection::{
    apply_channel, chernoff_exponent, interferometer_probabilities, DecoherenceFactor, SampledDistribution, TwoLevelChannel,
};
use qbm_core::gaussian::{off_diagonal_decay, propagate_cat_full, propagate_gaussian, propagate_gaussian_full, propagator_kernel, CatState, GaussianState};
use qbm_core::phase::{rotation, shear, Mat2, Vec2};
use qbm_core::qbm::{diagonalize_diffusion, qbm_from_lindblad, validate_qbm, LindbladSpec};
use qbm_core::sql::{diffusion_sql, force_sql};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn lvec() -> impl Strategy<Value = [Complex64; 2]> {
    prop::array::uniform4(-3.0f64..3.0).prop_map(|v| [c(v[0], v[1]), c(v[2], v[3])])
}

fn free_hmat(m: f64) -> Mat2 {
    Mat2::new(0.0, 0.0, 0.0, 1.0 / m)
}

prop_compose! {
    fn gaussian_state()(hbar in 0.1f64..3.0, sigma in 0.05f64..5.0, r in -0.99f64..0.99, mix in 1.0f64..5.0,
                        x0 in -5.0f64..5.0, p0 in -5.0f64..5.0) -> GaussianState {
        let pure = GaussianState::correlated(x0, p0, sigma, r, hbar).unwrap();
        GaussianState::new(Vec2::new(x0, p0), pure.cov() * mix, hbar).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn lindblad_vectors_always_give_valid_qbm(lvecs in prop::collection::vec(lvec(), 0..5), hbar in 0.1f64..3.0) {
        let spec = LindbladSpec::new(free_hmat(1.0), lvecs, hbar).unwrap();
        let q = qbm_from_lindblad(&spec);
        prop_assert!(validate_qbm(q.dmat(), q.lambda()).is_ok());
    }

    #[test]
    fn heisenberg_survives_propagation(g in gaussian_state(), f in -3.0f64..3.0, d in 0.0f64..3.0, m in 0.1f64..10.0, t in 0.0f64..5.0) {
        let out = propagate_gaussian_full(&g, f, d, m, t).unwrap();
        prop_assert!(out.cov().determinant() >= 0.25 * g.hbar() * g.hbar() * (1.0 - 1e-9));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn diffusion_diagonalization_reassembles(lvecs in prop::collection::vec(lvec(), 1..4)) {
        let q = qbm_from_lindblad(&LindbladSpec::new(free_hmat(1.0), lvecs, 1.0).unwrap());
        let axes = diagonalize_diffusion(&q);
        prop_assert!(axes.d1 >= axes.d2 && axes.d2 >= -1e-12);
        prop_assert!(axes.theta > -std::f64::consts::FRAC_PI_2 - 1e-15 && axes.theta <= std::f64::consts::FRAC_PI_2 + 1e-15);
        let r = rotation(axes.theta);
        let back = r.transpose() * Mat2::new(axes.d1, 0.0, 0.0, axes.d2) * r;
        let raised = q.dmat_raised();
        prop_assert!((back - raised).amax() <= 1e-12 * raised.amax().max(1.0));
    }

    #[test]
    fn lambda_and_determinant_are_rotation_invariant(lvecs in prop::collection::vec(lvec(), 1..4), theta in -3.2f64..3.2) {
        let q = qbm_from_lindblad(&LindbladSpec::new(free_hmat(1.0), lvecs.clone(), 1.0).unwrap());
        let r = rotation(theta);
        let rotated: Vec<[Complex64; 2]> = lvecs
            .iter()
            .map(|l| [l[0] * r[(0, 0)] + l[1] * r[(0, 1)], l[0] * r[(1, 0)] + l[1] * r[(1, 1)]])
            .collect();
        let qr = qbm_from_lindblad(&LindbladSpec::new(free_hmat(1.0), rotated, 1.0).unwrap());
        let scale = q.dmat().amax().max(1.0);
        prop_assert!((q.lambda() - qr.lambda()).abs() <= 1e-12 * scale);
        prop_assert!((q.dmat().determinant() - qr.dmat().determinant()).abs() <= 1e-11 * scale * scale);
    }

    #[test]
    fn propagation_is_a_semigroup(g in gaussian_state(), d in 0.0f64..2.0, m in 0.2f64..5.0, t1 in 0.0f64..3.0, t2 in 0.0f64..3.0, f in -2.0f64..2.0) {
        let once = propagate_gaussian_full(&g, f, d, m, t1 + t2).unwrap();
        let twice = propagate_gaussian_full(&propagate_gaussian_full(&g, f, d, m, t1).unwrap(), f, d, m, t2).unwrap();
        for k in 0..4 {
            let (a, b) = (once.cov()[k], twice.cov()[k]);
            prop_assert!((a - b).abs() <= 1e-12 * once.cov().amax());
        }
        let scale = once.mean().amax().max(1.0);
        prop_assert!((once.mean() - twice.mean()).amax() <= 1e-12 * scale);
        let k1 = propagator_kernel(d, m, t1).unwrap();
        let k2 = propagator_kernel(d, m, t2).unwrap();
        let k12 = propagator_kernel(d, m, t1 + t2).unwrap();
        let s = shear(t2, m);
        let composed = s * k1.cov() * s.transpose() + k2.cov();
        prop_assert!((composed - k12.cov()).amax() <= 1e-12 * k12.cov().amax().max(1e-300));
    }

    #[test]
    fn moment_laws(g in gaussian_state(), d in 0.01f64..2.0, m in 0.2f64..5.0, t in 0.01f64..3.0) {
        let free = propagate_gaussian(&g, 0.0, m, t).unwrap();
        let out = propagate_gaussian(&g, d, m, t).unwrap();
        prop_assert!(rel(out.var_p() - g.var_p(), 2.0 * d * t) < 1e-12 * (1.0 + g.var_p() / (d * t)));
        prop_assert!(rel(out.cov_xp() - free.cov_xp(), d * t * t / m) < 1e-12 * (1.0 + free.cov_xp().abs() * m / (d * t * t)));
        let dx = 2.0 * d * t.powi(3) / (3.0 * m * m);
        prop_assert!(rel(out.var_x() - free.var_x(), dx) < 1e-12 * (1.0 + free.var_x() / dx));
    }

    #[test]
    fn cat_gamma_matches_off_diagonal_decay(sigma in 0.2f64..1.0, gap in 15.0f64..40.0, d in 0.0f64..0.05, t in 0.0f64..3.0, f in -1.0f64..1.0) {
        let l = gap * sigma;
        let cat = CatState::symmetric(sigma, l, 1.0).unwrap();
        let e = propagate_cat_full(&cat, f, d, 1.0, t).unwrap();
        let direct = off_diagonal_decay(0.5 * l, -0.5 * l, d, t, 1.0).unwrap();
        prop_assert!(rel(e.gamma.norm(), direct) < 1e-12);
    }

    #[test]
    fn channel_output_is_a_density_matrix(a in 0.0f64..1.0, re in -1.0f64..1.0, im in -1.0f64..1.0, gmag in 0.0f64..1.0, garg in -3.2f64..3.2) {
        // scale the coherence into the PSD disc |ρ12|² ≤ a(1-a)
        let bound = (a * (1.0 - a)).sqrt();
        let z = c(re, im);
        let z = if z.norm() > 1.0 { z / z.norm() } else { z } * bound;
        let rho = Matrix2::new(c(a, 0.0), z, z.conj(), c(1.0 - a, 0.0));
        let ch = TwoLevelChannel { gamma: DecoherenceFactor::new(Complex64::from_polar(gmag, garg)).unwrap() };
        let out = apply_channel(&ch, &rho).unwrap();
        prop_assert_eq!(out[(0, 0)] + out[(1, 1)], rho[(0, 0)] + rho[(1, 1)]);
        prop_assert_eq!(out[(0, 1)], out[(1, 0)].conj());
        prop_assert!(out[(0, 0)].re * out[(1, 1)].re - out[(0, 1)].norm_sqr() >= -1e-15);
    }

    #[test]
    fn interferometer_probabilities_sum_to_one(gmag in 0.0f64..1.0, garg in -3.2f64..3.2) {
        let g = Complex64::from_polar(gmag, garg);
        let (plus, minus) = interferometer_probabilities(&DecoherenceFactor::new(g).unwrap());
        prop_assert_eq!(plus + minus, 1.0);
        let (_, conj_minus) = interferometer_probabilities(&DecoherenceFactor::new(g.conj()).unwrap());
        prop_assert_eq!(minus, conj_minus);
    }

    #[test]
    fn chernoff_is_symmetric_and_nonnegative(p in prop::collection::vec(0.0f64..1.0, 6), q in prop::collection::vec(0.0f64..1.0, 6)) {
        prop_assume!(p.iter().sum::<f64>() > 0.1 && q.iter().sum::<f64>() > 0.1);
        let support: Vec<f64> = (0..6).map(f64::from).collect();
        let a = SampledDistribution::normalized(support.clone(), p, 1.0).unwrap();
        let b = SampledDistribution::normalized(support, q, 1.0).unwrap();
        let ab = chernoff_exponent(&a, &b).unwrap();
        let ba = chernoff_exponent(&b, &a).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert!(ab == ba || (ab - ba).abs() <= 1e-9 * ab.max(1.0));
        prop_assert_eq!(chernoff_exponent(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn sql_scaling_laws(m in 0.01f64..100.0, t in 0.01f64..100.0, h in 0.01f64..10.0, k in 0.1f64..10.0) {
        prop_assert!(rel(force_sql(k * m, t, h).unwrap(), k.sqrt() * force_sql(m, t, h).unwrap()) < 1e-14);
        prop_assert!(rel(force_sql(m, k * t, h).unwrap(), k.powf(-1.5) * force_sql(m, t, h).unwrap()) < 1e-14);
        prop_assert!(rel(diffusion_sql(m, k * t, k * h).unwrap(), diffusion_sql(m, t, h).unwrap() / k) < 1e-14);
    }
}
