//! Inverse operations against independent quadrature oracles and the
//! forward solver.

mod common;

use common::{p0, p0_profile};
use knds_core::geometry::{
    build_radial_profile, horizon_roots, suggested_grid, BlackHoleParams,
};
use knds_core::inverse::*;
use knds_core::numerics::cumulative_integral;
use knds_core::radial::{PathChoice, ScatteringEngine};
use num_complex::Complex64 as C;

#[test]
fn qhat_matches_direct_quadrature_oracle() {
    // Independent oracle: integrate e^{-2 i lambda x} q_k(x) over the grid.
    let prof = p0_profile(0.5);
    let lambda = 0.3;
    let qhat = qhat_samples(prof, &[lambda]).unwrap()[0].1;
    let vals: Vec<C> = (0..prof.n())
        .map(|i| C::from_polar(1.0, -2.0 * lambda * prof.x[i]) * prof.q[i])
        .collect();
    let oracle = *cumulative_integral(prof.h, &vals).last().unwrap();
    assert!(
        (qhat - oracle).norm() < 1e-6,
        "qhat {qhat} vs quadrature {oracle}"
    );
}

#[test]
fn lambda_sweep_reconstructs_qk() {
    // Inverse Fourier over a lambda sweep: L2 relative error <= 1% against
    // the profile potential. The omega grid must resolve the ~150-unit
    // support of q (Nyquist), hence the dense sweep.
    let prof = p0_profile(0.5);
    let lam_max = 1.25;
    let n_lam = 641;
    let lams: Vec<f64> = (0..n_lam)
        .map(|i| -lam_max + 2.0 * lam_max * i as f64 / (n_lam - 1) as f64)
        .collect();
    let qhat = qhat_samples(prof, &lams).unwrap();
    let xs: Vec<f64> = (0..prof.n()).step_by(64).map(|i| prof.x[i]).collect();
    let rec = reconstruct_qk(&qhat, &xs);
    let mut num = 0.0;
    let mut den = 0.0;
    for (j, &x) in xs.iter().enumerate() {
        let i = ((x - prof.x_min()) / prof.h).round() as usize;
        num += (rec[j] - prof.q[i]).norm_sqr();
        den += prof.q[i].norm_sqr();
    }
    let rel = (num / den).sqrt();
    assert!(rel <= 0.01, "L2 relative reconstruction error {rel}");
}

#[test]
fn qhat_translation_gauge_factor() {
    // q^c(x) = q(x - c) e^{2 i c Omega_-}: the reconstruction from shifted
    // data reproduces the shift and the constant phase.
    let c = 0.8;
    let p_shift = p0().with_gauge(c, 0.0);
    let h = horizon_roots(&p_shift).unwrap();
    let grid = suggested_grid(&p_shift, &h, 1e-12, 0.008);
    let prof_shift = build_radial_profile(&p_shift, &h, 0.5, &grid).unwrap();
    let prof = p0_profile(0.5);
    for &x in &[-3.0, 0.0, 2.5] {
        let got = prof_shift.eval_q(x);
        let want = prof.eval_q(x - c) * C::from_polar(1.0, 2.0 * c * prof.omega_minus);
        assert!(
            (got - want).norm() < 1e-10 * (1.0 + want.norm()),
            "q^c({x}) = {got} vs {want}"
        );
    }
    // And the qhat-pair gauge extraction sees exactly c.
    let lams: Vec<f64> = (0..6).map(|i| 0.2 + 0.05 * i as f64).collect();
    let qa = qhat_samples(&prof_shift, &lams).unwrap();
    let qb = qhat_samples(prof, &lams).unwrap();
    let got = gauge_offset_from_qhat(&qa, &qb).unwrap();
    assert!((got - c).abs() < 1e-7, "gauge offset {got} vs {c}");
}

#[test]
fn fit_a_on_forward_data_and_gauge_invariance() {
    let prof = p0_profile(0.5);
    let lambda = 0.3;
    let engine = ScatteringEngine::new(prof, lambda);
    let mut samples = Vec::new();
    for i in 0..=10 {
        let za = 30.0 + 30.0 * i as f64 / 10.0;
        let z = za / prof.a_total;
        let rec = engine.record_real(z, PathChoice::Ode).unwrap();
        samples.push(TSample {
            z,
            t_log_abs: rec.phys.t_log_abs,
        });
    }
    let fit = fit_a_from_t(&samples).unwrap();
    assert!(
        (fit.estimate / prof.a_total - 1.0).abs() < 0.005,
        "A_est {} vs {}",
        fit.estimate,
        prof.a_total
    );
    // Gauge shift leaves |T| and hence A_est unchanged.
    let rec = engine.record_real(40.0 / prof.a_total, PathChoice::Ode).unwrap();
    let moved = knds_core::radial::rw_translation_covariance(&rec, 2.0);
    assert_eq!(rec.phys.t_log_abs, moved.phys.t_log_abs);

    // Non-asymptotic samples must be refused.
    let low: Vec<TSample> = (0..6)
        .map(|i| {
            let z = 0.2 + 0.2 * i as f64;
            let r = engine.record_real(z, PathChoice::Auto).unwrap();
            TSample {
                z,
                t_log_abs: r.phys.t_log_abs,
            }
        })
        .collect();
    assert!(fit_a_from_t(&low).is_err());
}

#[test]
fn exponent_fits_are_k_linear() {
    // Recovered ratios at two k differ by (Omega_+(3/2) - Omega_+(1/2)) /
    // kappa_+ within 2%.
    let lambda = 0.3;
    let mut plus = Vec::new();
    let mut omegas = Vec::new();
    for &k in &[0.5, 1.5] {
        let prof = p0_profile(k);
        let engine = ScatteringEngine::new(prof, lambda);
        let mut r_samples = Vec::new();
        let mut l_samples = Vec::new();
        for i in 0..16 {
            let za = 40.0 * (6.0f64).powf(i as f64 / 15.0);
            let z = za / prof.a_total;
            let rec = engine.record_real(z, PathChoice::Ode).unwrap();
            r_samples.push((z, rec.phys.r));
            l_samples.push((z, rec.phys.l));
        }
        let (p, m) = fit_horizon_exponents(&r_samples, &l_samples).unwrap();
        // Ground truth within 1%.
        let h = prof.horizon;
        let truth_p = (lambda - prof.omega_plus) / h.kappa_plus;
        let truth_m = (lambda - prof.omega_minus) / h.kappa_minus;
        assert!((p.estimate / truth_p - 1.0).abs() < 0.01, "k={k} plus ratio");
        assert!((m.estimate / truth_m - 1.0).abs() < 0.01, "k={k} minus ratio");
        plus.push(p.estimate);
        omegas.push(prof.omega_plus);
    }
    let h = p0_profile(0.5).horizon;
    let expect = (omegas[1] - omegas[0]) / h.kappa_plus;
    let got = plus[0] - plus[1]; // rho(k1) - rho(k2) = (Om(k2)-Om(k1))/kappa
    assert!(
        (got / expect - 1.0).abs() < 0.02,
        "two-k ratio difference {got} vs {expect}"
    );
}

#[test]
fn angular_probes_recover_a_lambda_forward() {
    // Probes from the forward angular solver (not synthetic closed forms).
    let p = p0();
    let lambda = 0.3;
    let mut probes = Vec::new();
    for &k in &[0.5, 1.5] {
        let mus = knds_core::angular::angular_eigenvalues(lambda, k, 1, &p).unwrap();
        let series = knds_core::angular::frobenius_series(lambda, k, mus[0], &p, 4);
        probes.push(FrobeniusProbe::from_coefficients(
            k,
            &series.complex_coeffs(),
        ));
    }
    let (a_est, lc_est) = recover_a_lambda(&probes, lambda).unwrap();
    assert!((a_est / p.spin - 1.0).abs() < 0.01, "a_est {a_est}");
    assert!(
        (lc_est / p.cosmological - 1.0).abs() < 0.01,
        "Lambda_est {lc_est}"
    );
    // Consistency (As1): mu / sqrt(1 + zeta) invariant across the recovery.
    let zeta_est = a_est * a_est * lc_est / 3.0;
    for probe in &probes {
        let mu_back = probe.mu_over_root * (1.0 + zeta_est).sqrt();
        let mus =
            knds_core::angular::angular_eigenvalues(lambda, probe.k, 1, &p).unwrap();
        assert!((mu_back / mus[0] - 1.0).abs() < 1e-10);
    }
}

#[test]
fn perturbed_mass_is_recovered_as_perturbed() {
    // Forward with M * 1.05; the inverse must see the bigger hole.
    let mut p = p0();
    p.mass *= 1.05;
    let report = full_inverse(&p, &InverseOpts::default()).unwrap();
    assert!(
        (report.mass_est / 1.05 - 1.0).abs() < 0.01,
        "M_est {} for the 1.05 M hole",
        report.mass_est
    );
    assert!(report.rel_errors.mass < 0.01);
}

#[test]
fn noise_mode_reports_stability() {
    // Noise injection is characterisation, not assertion: the pipeline
    // must run and report; accuracy under noise is printed only.
    let opts = InverseOpts {
        noise_sigma: 1e-8,
        noise_seed: 7,
        ..InverseOpts::default()
    };
    let report = full_inverse(&p0(), &opts).unwrap();
    println!(
        "noise sigma=1e-8: rel errors M {:.2e}, Q^2 {:.2e}, a {:.2e}, Lambda {:.2e}",
        report.rel_errors.mass,
        report.rel_errors.q_squared,
        report.rel_errors.spin,
        report.rel_errors.lambda_cosmo
    );
}

#[test]
fn distinguishability_margin_grows_with_perturbation() {
    // Margin is monotone over {0.5%, 1%, 2%, 4%} for each parameter.
    let base = p0();
    for field in 0..4 {
        let mut last = 0.0;
        for &eps in &[0.005, 0.01, 0.02, 0.04] {
            let mut p2 = base;
            match field {
                0 => p2.mass *= 1.0 + eps,
                1 => p2.charge *= 1.0 + eps,
                2 => p2.spin *= 1.0 + eps,
                _ => p2.cosmological *= 1.0 + eps,
            }
            let rep = compare_blackholes(&base, &p2, 0.3, &[0.5], &[1], 1e-6).unwrap();
            assert!(
                rep.margin > last,
                "field {field}: margin {} not monotone at eps {eps}",
                rep.margin
            );
            last = rep.margin;
        }
    }
}
