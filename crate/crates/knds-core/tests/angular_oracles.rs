//! Angular solver against the banded FD oracle, the Frobenius series, and
//! the growth/perturbation bounds.

mod common;

use common::{p0, TestRng};
use knds_core::angular::*;
use knds_core::geometry::BlackHoleParams;
use knds_core::numerics::fit_line;
use num_complex::Complex64;

#[test]
fn shooting_matches_fd_matrix_oracle() {
    let p = p0();
    let lambda = 0.3;
    for &k in &[0.5, 1.5] {
        let shoot = angular_eigenvalues(lambda, k, 4, &p).unwrap();
        let fd = fd_eigenvalues_richardson(lambda, k, &p, 4, 2000);
        for l in 0..4 {
            assert!(
                (shoot[l] - fd[l]).abs() < 1e-5,
                "k={k}, l={}: shooting {} vs fd {}",
                l + 1,
                shoot[l],
                fd[l]
            );
        }
    }
}

#[test]
fn series_tracks_shooting_eigenfunction() {
    // Relative difference <= 1e-4 on theta in [0.01, 0.1] after scalar
    // alignment, series order N = 8.
    let p = p0();
    let lambda = 0.3;
    for &(k, l) in &[(0.5, 1u32), (0.5, 2), (1.5, 1)] {
        let mus = angular_eigenvalues(lambda, k, l, &p).unwrap();
        let mu = mus[l as usize - 1];
        let pair = angular_eigenfunction(lambda, k, l, mu, &p).unwrap();
        let series = frobenius_series(lambda, k, mu, &p, 8);
        // Align on the norm at the largest test angle.
        let idx: Vec<usize> = pair
            .theta
            .iter()
            .enumerate()
            .filter(|(_, t)| (0.01..=0.1).contains(*t))
            .map(|(i, _)| i)
            .collect();
        let i_ref = *idx.last().unwrap();
        let sv = series.eval(pair.theta[i_ref]);
        let have = (pair.u1[i_ref].norm_sqr() + pair.u2[i_ref].norm_sqr()).sqrt();
        let scale = have / (sv[0] * sv[0] + sv[1] * sv[1]).sqrt();
        for &i in &idx {
            let sv = series.eval(pair.theta[i]);
            let s1 = Complex64::new(0.0, scale * sv[0]);
            let s2 = Complex64::new(scale * sv[1], 0.0);
            let num = ((pair.u1[i] - s1).norm_sqr() + (pair.u2[i] - s2).norm_sqr()).sqrt();
            let den = (pair.u1[i].norm_sqr() + pair.u2[i].norm_sqr()).sqrt();
            assert!(
                num / den <= 1e-4,
                "k={k}, l={l}, theta={}: rel diff {}",
                pair.theta[i],
                num / den
            );
        }
    }
}

#[test]
fn component_ratio_near_pole() {
    // u1/u2 -> i mu theta / ((2k+1) sqrt(1+zeta)): fitted slope within 1%.
    let p = p0();
    let lambda = 0.3;
    let k = 0.5;
    let mus = angular_eigenvalues(lambda, k, 1, &p).unwrap();
    let pair = angular_eigenfunction(lambda, k, 1, mus[0], &p).unwrap();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..pair.theta.len() {
        let t = pair.theta[i];
        if (0.002..0.05).contains(&t) {
            // The ratio is purely imaginary; its imaginary part is the slope target.
            let ratio = pair.u1[i] / pair.u2[i];
            xs.push(t);
            ys.push(ratio.im);
        }
    }
    let fit = fit_line(&xs, &ys);
    let expect = mus[0] / ((2.0 * k + 1.0) * (1.0 + p.zeta()).sqrt());
    assert!(
        (fit.slope / expect - 1.0).abs() < 0.01,
        "ratio slope {} vs {expect}",
        fit.slope
    );
}

#[test]
fn gamma1_conjugate_and_orthogonality() {
    let p = p0();
    let lambda = 0.3;
    let k = 0.5;
    let mus = angular_eigenvalues(lambda, k, 2, &p).unwrap();
    let pa = angular_eigenfunction(lambda, k, 1, mus[0], &p).unwrap();
    let pb = angular_eigenfunction(lambda, k, 2, mus[1], &p).unwrap();
    // Gamma^1 u = (u1, -u2) is an eigenfunction of -mu: check the operator
    // residual directly on the flipped spinor.
    let sys = AngularSystem::new(&p, lambda, k, mus[0]);
    let h = pa.theta[1] - pa.theta[0];
    let n = pa.theta.len() - 1;
    let mut worst: f64 = 0.0;
    for i in 2..n - 1 {
        let t = pa.theta[i];
        if !(0.05..std::f64::consts::PI - 0.05).contains(&t) {
            continue;
        }
        let du = |c: &Vec<Complex64>, sign: f64| {
            (c[i - 2] - c[i - 1] * 8.0 + c[i + 1] * 8.0 - c[i + 2]) * (sign / (12.0 * h))
        };
        let u = [pa.u1[i], -pa.u2[i]];
        let dud = [du(&pa.u1, 1.0), du(&pa.u2, -1.0)];
        let app = sys.apply_operator(t, u, dud);
        let r = ((app[0] + mus[0] * u[0]).norm_sqr() + (app[1] + mus[0] * u[1]).norm_sqr()).sqrt();
        worst = worst.max(r);
    }
    assert!(worst < 1e-6, "Gamma^1-conjugate residual {worst}");

    // Orthogonality of distinct eigenfunctions.
    let dens: Vec<Complex64> = (0..pa.theta.len())
        .map(|i| pa.u1[i].conj() * pb.u1[i] + pa.u2[i].conj() * pb.u2[i])
        .collect();
    let inner = knds_core::numerics::cumulative_integral(h, &dens)
        .last()
        .copied()
        .unwrap();
    assert!(inner.norm() <= 1e-7, "<u1, u2> = {inner}");
}

#[test]
fn selfadjointness_proxy_on_smooth_spinors() {
    // Random smooth spinors with analytic derivatives (hence no FD error):
    // |<A u, v> - <u, A v>| <= 1e-8 ||u|| ||v||.
    let p = p0();
    let sys = AngularSystem::new(&p, 0.3, 0.5, 1.7);
    let mut rng = TestRng(0x5ad5_a170);
    let n = 6;
    for _ in 0..4 {
        let cu: Vec<f64> = (0..2 * n).map(|_| rng.in_range(-1.0, 1.0)).collect();
        let cv: Vec<f64> = (0..2 * n).map(|_| rng.in_range(-1.0, 1.0)).collect();
        // u_j(theta) = sin^2(theta) * sum_m c_m sin(m theta), per component.
        let eval = |c: &[f64], t: f64| -> ([Complex64; 2], [Complex64; 2]) {
            let s2 = t.sin() * t.sin();
            let ds2 = 2.0 * t.sin() * t.cos();
            let mut u = [Complex64::new(0.0, 0.0); 2];
            let mut du = [Complex64::new(0.0, 0.0); 2];
            for m in 1..=n {
                let (sm, cm) = ((m as f64) * t).sin_cos();
                for j in 0..2 {
                    let w = c[(j * n) + m - 1];
                    u[j] += Complex64::new(w * s2 * sm, 0.0);
                    du[j] += Complex64::new(w * (ds2 * sm + s2 * (m as f64) * cm), 0.0);
                }
            }
            (u, du)
        };
        // <A u, v> - <u, A v> by high-order quadrature.
        let m = 4000;
        let h = std::f64::consts::PI / m as f64;
        let vals: Vec<Complex64> = (0..=m)
            .map(|i| {
                let t = (i as f64) * h;
                if i == 0 || i == m {
                    return Complex64::new(0.0, 0.0);
                }
                let (u, du) = eval(&cu, t);
                let (v, dv) = eval(&cv, t);
                let au = sys.apply_operator(t, u, du);
                let av = sys.apply_operator(t, v, dv);
                (au[0].conj() * v[0] + au[1].conj() * v[1])
                    - (u[0].conj() * av[0] + u[1].conj() * av[1])
            })
            .collect();
        let defect = knds_core::numerics::cumulative_integral(h, &vals)
            .last()
            .copied()
            .unwrap();
        let norm = |c: &[f64]| -> f64 {
            let vals: Vec<f64> = (0..=m)
                .map(|i| {
                    let t = (i as f64) * h;
                    let (u, _) = eval(c, t);
                    u[0].norm_sqr() + u[1].norm_sqr()
                })
                .collect();
            knds_core::numerics::cumulative_integral(h, &vals)
                .last()
                .copied()
                .unwrap()
                .sqrt()
        };
        let bound = 1e-8 * norm(&cu) * norm(&cv);
        assert!(
            defect.norm() <= bound.max(1e-14),
            "symmetry defect {} vs bound {bound}",
            defect.norm()
        );
    }
}

#[test]
fn perturbation_bound_in_xi() {
    // |mu_kl(zeta, xi) - mu_kl(zeta, 0)| <= |xi| for l <= 10.
    let p = p0();
    let k = 0.5;
    let lambda = 0.3;
    let xi = p.spin * lambda;
    let with = angular_eigenvalues(lambda, k, 10, &p).unwrap();
    let without = angular_eigenvalues(0.0, k, 10, &p).unwrap();
    for l in 0..10 {
        assert!(
            (with[l] - without[l]).abs() <= xi.abs() + 1e-9,
            "l={}: |{} - {}| > |xi| = {}",
            l + 1,
            with[l],
            without[l],
            xi
        );
        // And inside the analytic growth window.
        let (lo, hi) = growth_window(k, (l + 1) as u32, xi);
        assert!(with[l] >= lo && with[l] <= hi);
    }
}

#[test]
fn pole_exponent_matches_k() {
    // Fitted power of ||u(theta)|| near theta -> 0 equals |k| within 2%.
    let p = p0();
    let lambda = 0.3;
    for &k in &[0.5, 1.5] {
        let mus = angular_eigenvalues(lambda, k, 1, &p).unwrap();
        let pair = angular_eigenfunction(lambda, k, 1, mus[0], &p).unwrap();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..pair.theta.len() {
            let t = pair.theta[i];
            if (0.003..0.03).contains(&t) {
                let norm = (pair.u1[i].norm_sqr() + pair.u2[i].norm_sqr()).sqrt();
                xs.push(t.ln());
                ys.push(norm.ln());
            }
        }
        let fit = fit_line(&xs, &ys);
        assert!(
            (fit.slope - k.abs()).abs() < 0.02 * k.abs().max(1.0),
            "k={k}: exponent {}",
            fit.slope
        );
    }
}

#[test]
fn negative_k_mirror_symmetry() {
    // mu_{-k, l}(lambda) = mu_{k, l}(-lambda) via Gamma^1 conjugation at pi.
    let p = p0();
    let neg = angular_eigenvalues(0.3, -0.5, 3, &p).unwrap();
    let mirror = angular_eigenvalues(-0.3, 0.5, 3, &p).unwrap();
    for l in 0..3 {
        assert!(
            (neg[l] - mirror[l]).abs() < 1e-8,
            "l={}: {} vs {}",
            l + 1,
            neg[l],
            mirror[l]
        );
    }
}

#[test]
fn series_residual_decreases_with_order() {
    let p = p0();
    let lambda = 0.3;
    let k = 0.5;
    let mus = angular_eigenvalues(lambda, k, 1, &p).unwrap();
    let mu = mus[0];
    let s8 = frobenius_series(lambda, k, mu, &p, 8);
    let s2 = frobenius_series(lambda, k, mu, &p, 2);
    let r8 = series_ode_residual(&s8, lambda, k, mu, &p, 0.1);
    let r2 = series_ode_residual(&s2, lambda, k, mu, &p, 0.1);
    assert!(r8 <= 1e-6, "N=8 residual {r8}");
    assert!(r8 < r2, "residual should drop with order: {r8} vs {r2}");
}

#[test]
fn muntz_divergence_certificate() {
    // zeta = xi = 0, k = 1/2: partial sums are harmonic numbers.
    let round = BlackHoleParams::new(1.0, 0.2, 0.0, 0.02, 0.5);
    let cert = muntz_certificate(0.0, 0.5, 100, &round).unwrap();
    let h100: f64 = (1..=100).map(|n| 1.0 / n as f64).sum();
    let (last_l, last_sum) = *cert.partial_sums.last().unwrap();
    assert_eq!(last_l, 100);
    assert!(
        (last_sum - h100).abs() < 0.02,
        "sum {last_sum} vs H_100 = {h100}"
    );

    // P0: partial sums inside the analytic bracket implied by the
    // growth bounds, with the window constants fitted at small l
    // (the bound's C1, C2 are existential; the fit pins them once).
    let p = p0();
    let lambda = 0.3;
    let k = 0.5;
    let xi = p.spin * lambda;
    let cert = muntz_certificate(lambda, k, 200, &p).unwrap();
    let small = angular_eigenvalues(lambda, k, 6, &p).unwrap();
    let mut c_fit: f64 = 0.0;
    for (i, mu) in small.iter().enumerate() {
        let base = k.abs() - 0.5 + (i + 1) as f64;
        c_fit = c_fit.max((mu - base).abs());
    }
    let c_fit = c_fit + 0.05; // slack for the fitted constants
    let mut lo_sum = 0.0;
    let mut hi_sum = 0.0;
    for l in 1..=200u32 {
        let base = k.abs() - 0.5 + l as f64;
        let e26 = (1.0f64 / 26.0).exp();
        lo_sum += 1.0 / (e26 * base + c_fit + xi.abs());
        hi_sum += 1.0 / ((2.0 - e26) * base - c_fit - xi.abs()).max(0.05);
    }
    let (_, sum200) = *cert.partial_sums.last().unwrap();
    assert!(
        sum200 > lo_sum && sum200 < hi_sum,
        "sum {sum200} outside bracket [{lo_sum}, {hi_sum}]"
    );

    // Slope against log L positive and stable within 10% on L in [100, 400].
    let cert = muntz_certificate(lambda, k, 400, &p).unwrap();
    let pts: Vec<(u32, f64)> = cert
        .partial_sums
        .iter()
        .copied()
        .filter(|(l, _)| *l >= 100)
        .collect();
    let xs: Vec<f64> = pts.iter().map(|(l, _)| (*l as f64).ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|(_, s)| *s).collect();
    let fit = fit_line(&xs, &ys);
    assert!(fit.slope > 0.0);
    // Stability: split the range and compare slopes.
    let mid = xs.len() / 2;
    let f1 = fit_line(&xs[..=mid], &ys[..=mid]);
    let f2 = fit_line(&xs[mid..], &ys[mid..]);
    assert!(
        (f1.slope / f2.slope - 1.0).abs() < 0.1,
        "log-slope drift: {} vs {}",
        f1.slope,
        f2.slope
    );
}
