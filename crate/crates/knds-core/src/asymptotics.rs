//! Liouville transform, modified-Bessel approximants, and the closed-form
//! large-z asymptotics of the transfer-matrix entries and the scattering
//! coefficients, together with the monotonicity check on |a_Lj(z)|.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{potential_a_prime, potential_c_prime, RadialProfile};
use crate::radial::{AlMatrix, Mat2, PathChoice, ScatteringEngine, ScatteringTriple};
use crate::special::{bessel_i, bessel_i_scaled, gamma};

type C = Complex64;

/// Everything the closed-form z -> infinity formulas need.
#[derive(Debug, Clone, Copy)]
pub struct AsymptoticModel {
    pub lambda: f64,
    pub k: f64,
    pub a_total: f64,
    pub kappa_minus: f64,
    pub kappa_plus: f64,
    /// Tail amplitudes of a(x) at the two horizons.
    pub a_minus: f64,
    pub a_plus: f64,
    /// lambda - Omega_{-}(k) and lambda - Omega_{+}(k).
    pub lam_minus: f64,
    pub lam_plus: f64,
    pub beta: f64,
    pub k_phase: f64,
}

impl AsymptoticModel {
    pub fn new(profile: &RadialProfile, lambda: f64) -> Self {
        AsymptoticModel {
            lambda,
            k: profile.k,
            a_total: profile.a_total,
            kappa_minus: profile.horizon.kappa_minus,
            kappa_plus: profile.horizon.kappa_plus,
            a_minus: profile.a_minus,
            a_plus: profile.a_plus,
            lam_minus: lambda - profile.omega_minus,
            lam_plus: lambda - profile.omega_plus,
            beta: profile.beta,
            k_phase: profile.params.k_phase,
        }
    }

    /// y_- = lambda^-(k) / kappa_-.
    pub fn y_minus(&self) -> f64 {
        self.lam_minus / self.kappa_minus
    }

    /// y_+ = lambda^+(k) / kappa_+.
    pub fn y_plus(&self) -> f64 {
        self.lam_plus / self.kappa_plus
    }

    /// nu_+ = 1/2 - i y_+.
    pub fn nu_plus(&self) -> C {
        C::new(0.5, -self.y_plus())
    }

    /// mu_+ = 1/2 + i y_+.
    pub fn mu_plus(&self) -> C {
        C::new(0.5, self.y_plus())
    }

    pub fn nu_minus(&self) -> C {
        C::new(0.5, -self.y_minus())
    }

    pub fn mu_minus(&self) -> C {
        C::new(0.5, self.y_minus())
    }

    /// (-kappa_+ / a_+), a positive base for the i-power factors.
    pub fn base_plus(&self) -> f64 {
        -self.kappa_plus / self.a_plus
    }

    pub fn base_minus(&self) -> f64 {
        self.kappa_minus / self.a_minus
    }

    /// Predicted transfer matrix at large real z, in the same scaled form
    /// as the computed one: entries m[j] with log_scale = z A.
    pub fn predict_al(&self, z: f64) -> AlMatrix {
        let yp = self.y_plus();
        let ym = self.y_minus();
        let two_pi = 2.0 * std::f64::consts::PI;
        let bp = |e: f64| C::from_polar(1.0, e * self.base_plus().ln());
        let bm = |e: f64| C::from_polar(1.0, e * self.base_minus().ln());
        let zh = |e: f64| C::from_polar(1.0, e * (0.5 * z).ln());
        let g = |y: f64| gamma(C::new(0.5, y));
        let eb = |s: f64| C::from_polar(1.0, s * self.beta);
        let i = C::i();
        let a1 = eb(-1.0) / two_pi * bp(yp) * bm(-ym) * g(-ym) * g(yp) * zh(ym - yp);
        let a2 = -i * eb(1.0) / two_pi * bp(-yp) * bm(-ym) * g(-ym) * g(-yp) * zh(ym + yp);
        let a3 = i * eb(-1.0) / two_pi * bp(yp) * bm(ym) * g(ym) * g(yp) * zh(-(ym + yp));
        let a4 = eb(1.0) / two_pi * bp(-yp) * bm(ym) * g(ym) * g(-yp) * zh(-(ym - yp));
        AlMatrix {
            m: Mat2([a1, a2, a3, a4]),
            log_scale: z * self.a_total,
        }
    }

    /// Predicted physical coefficients at large real z (K-gauge phases
    /// included; beta cancels out of the physical normalisation).
    pub fn predict_scattering(&self, z: f64) -> ScatteringTriple {
        let yp = self.y_plus();
        let ym = self.y_minus();
        let two_pi = 2.0 * std::f64::consts::PI;
        let g = |y: f64| gamma(C::new(0.5, y));
        let i = C::i();
        let zh = |e: f64| C::from_polar(1.0, e * (0.5 * z).ln());
        let bp = |e: f64| C::from_polar(1.0, e * self.base_plus().ln());
        let bm = |e: f64| C::from_polar(1.0, e * self.base_minus().ln());
        let t_pref = two_pi * bp(-yp) * bm(ym) / (g(-ym) * g(yp));
        let t_log_abs = t_pref.norm().ln() - z * self.a_total;
        let t = t_pref * zh(-(ym - yp)) * C::new((-z * self.a_total).exp(), 0.0);
        let r = i * C::from_polar(1.0, -2.0 * self.k_phase) * bp(-2.0 * yp) * g(-yp) / g(yp)
            * zh(2.0 * yp);
        let l = i * C::from_polar(1.0, 2.0 * self.k_phase) * bm(2.0 * ym) * g(ym) / g(-ym)
            * zh(-2.0 * ym);
        ScatteringTriple {
            t,
            r,
            l,
            t_log_abs,
        }
    }

    /// |T| prefactor 2 pi / (|Gamma(1/2 - i y_-)| |Gamma(1/2 + i y_+)|).
    pub fn t_prefactor_abs(&self) -> f64 {
        let gm = crate::special::abs_gamma_half_line(self.y_minus());
        let gp = crate::special::abs_gamma_half_line(self.y_plus());
        2.0 * std::f64::consts::PI / (gm * gp)
    }

    /// omega_+(k) of the limiting Sturm-Liouville potential
    /// Q_+ = omega_+ / (A - X)^2.
    pub fn omega_pot_plus(&self) -> C {
        let y = self.y_plus();
        C::new(y * y, y)
    }
}

/// Sturm-Liouville form of the radial problem under X = integral of a.
#[derive(Debug, Clone)]
pub struct Liouville {
    pub lambda: f64,
    /// X(x_i) on the profile grid, strictly increasing in (0, A).
    pub big_x: Vec<f64>,
    /// A - X(x_i), accumulated from the right for relative accuracy.
    pub rem: Vec<f64>,
    pub a_total: f64,
    /// Q(X, k) on the profile grid.
    pub q_pot: Vec<C>,
}

/// Tabulate the Liouville coordinate and the Sturm-Liouville potential
/// Q(X,k) = (lambda - c)^2/a^2 + i (a c' + a' (lambda - c))/a^3.
pub fn liouville_transform(profile: &RadialProfile, lambda: f64) -> Liouville {
    let big_x = profile.liouville_x();
    let rem = profile.liouville_x_complement();
    let p = &profile.params;
    let h = &profile.horizon;
    let mut q_pot = Vec::with_capacity(profile.n());
    for i in 0..profile.n() {
        let pt = &profile.points[i];
        let a = profile.a[i];
        let c = profile.c[i];
        let ap = potential_a_prime(p, h, pt);
        let cp = potential_c_prime(p, h, pt, profile.k);
        let re = (lambda - c) * (lambda - c) / (a * a);
        let im = (a * cp + ap * (lambda - c)) / (a * a * a);
        q_pot.push(C::new(re, im));
    }
    Liouville {
        lambda,
        big_x,
        rem,
        a_total: profile.a_total,
        q_pot,
    }
}

impl Liouville {
    /// The limiting diffeomorphism h_+(X) = ln(A - X)/kappa_+ + C_+.
    pub fn h_plus(&self, model: &AsymptoticModel, x: f64) -> f64 {
        (self.a_total - x).ln() / model.kappa_plus
            + (-model.kappa_plus / model.a_plus).ln() / model.kappa_plus
    }

    pub fn h_minus(&self, model: &AsymptoticModel, x: f64) -> f64 {
        x.ln() / model.kappa_minus + (model.kappa_minus / model.a_minus).ln() / model.kappa_minus
    }
}

/// Closed-form Bessel approximants (f1+, f2+, g1-, g2-) at Liouville
/// coordinate X for coupling z.
pub fn bessel_approximants(model: &AsymptoticModel, z: f64, x: f64) -> (C, C, C, C) {
    let a = model.a_total;
    assert!(x > 0.0 && x < a, "X must lie in (0, A)");
    let zh = C::new(0.5 * z, 0.0);
    let bp = C::new(model.base_plus(), 0.0);
    let bm = C::new(model.base_minus(), 0.0);
    let i = C::i();
    let nu_p = model.nu_plus();
    let mu_p = model.mu_plus();
    let nu_m = model.nu_minus();
    let mu_m = model.mu_minus();
    let iyp = C::new(0.0, model.y_plus());
    let iym = C::new(0.0, model.y_minus());
    let f1 = C::from_polar(1.0, -model.beta)
        * bp.powc(iyp)
        * gamma(C::new(1.0, 0.0) - nu_p)
        * (a - x).sqrt()
        * zh.powc(nu_p)
        * bessel_i(-nu_p, z * (a - x));
    let f2 = -i
        * bp.powc(-iyp)
        * gamma(C::new(1.0, 0.0) - mu_p)
        * (a - x).sqrt()
        * zh.powc(mu_p)
        * bessel_i(C::new(1.0, 0.0) - mu_p, z * (a - x));
    let g1 = bm.powc(iym)
        * gamma(C::new(1.0, 0.0) - nu_m)
        * x.sqrt()
        * zh.powc(nu_m)
        * bessel_i(-nu_m, z * x);
    let g2 = i
        * bm.powc(-iym)
        * gamma(C::new(1.0, 0.0) - mu_m)
        * x.sqrt()
        * zh.powc(mu_m)
        * bessel_i(C::new(1.0, 0.0) - mu_m, z * x);
    (f1, f2, g1, g2)
}

/// f1+ scaled by e^{-z(A-X)} (finite at any z).
pub fn f1_plus_scaled(model: &AsymptoticModel, z: f64, x: f64) -> C {
    let a = model.a_total;
    let zh = C::new(0.5 * z, 0.0);
    let nu_p = model.nu_plus();
    let iyp = C::new(0.0, model.y_plus());
    C::from_polar(1.0, -model.beta)
        * C::new(model.base_plus(), 0.0).powc(iyp)
        * gamma(C::new(1.0, 0.0) - nu_p)
        * (a - x).sqrt()
        * zh.powc(nu_p)
        * bessel_i_scaled(-nu_p, z * (a - x))
}

/// Verdict of the |a_Lj(z)| monotonicity scan.
#[derive(Debug, Clone)]
pub struct MonotonicityReport {
    /// ln |a_Lj| on the scanned grid.
    pub log_abs: Vec<f64>,
    /// First z after which the sequence increases strictly.
    pub turnover: f64,
    /// Whether the whole grid was already strictly increasing.
    pub increasing_everywhere: bool,
}

/// Assert |a_Lj(z)| is strictly increasing beyond a detected turnover on an
/// increasing real z grid (ODE-path regime). A decrease in the last 30% of
/// the grid is an invariant violation.
pub fn monotonicity_check(
    profile: &RadialProfile,
    lambda: f64,
    z_grid: &[f64],
    j: usize,
) -> Result<MonotonicityReport> {
    if z_grid.len() < 3 {
        return Err(Error::Config("monotonicity scan needs >= 3 points".into()));
    }
    let engine = ScatteringEngine::new(profile, lambda);
    let log_abs: Vec<f64> = z_grid
        .iter()
        .map(|&z| {
            engine
                .al(C::new(z, 0.0), PathChoice::Ode)
                .map(|al| al.log_abs(j))
        })
        .collect::<Result<_>>()?;
    let mut last_decrease: Option<usize> = None;
    for i in 0..log_abs.len() - 1 {
        if log_abs[i + 1] <= log_abs[i] {
            last_decrease = Some(i + 1);
        }
    }
    match last_decrease {
        None => Ok(MonotonicityReport {
            log_abs,
            turnover: z_grid[0],
            increasing_everywhere: true,
        }),
        Some(idx) => {
            if idx >= (0.7 * z_grid.len() as f64) as usize {
                return Err(Error::Numerical(format!(
                    "|a_L{}| still non-monotone at z = {:.3} (beyond the turnover margin)",
                    j + 1,
                    z_grid[idx]
                )));
            }
            Ok(MonotonicityReport {
                log_abs,
                turnover: z_grid[idx],
                increasing_everywhere: false,
            })
        }
    }
}
