//! Kerr-Newman-de-Sitter exterior geometry: horizon structure, the
//! Regge-Wheeler coordinate, and the scalar potentials consumed by the
//! radial and angular solvers.
//!
//! The horizon polynomial is always evaluated in factored form once its
//! roots are known, and radial positions carry their exact distances to the
//! event and cosmological horizons. This keeps the exponentially small
//! tails of the potentials accurate far beyond where `r` itself can resolve
//! the distance to a horizon in f64.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{adaptive_simpson, bisect, newton_bisect};

/// Strict rotation bound: a^2 Lambda / 3 < 7 - 4 sqrt(3).
pub const ROTATION_BOUND: f64 = 7.0 - 4.0 * 1.732_050_807_568_877_2;

/// Physical inputs plus the two gauge constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlackHoleParams {
    /// Mass M > 0 (geometric units).
    pub mass: f64,
    /// Electric charge Q.
    pub charge: f64,
    /// Angular momentum per unit mass a.
    pub spin: f64,
    /// Cosmological constant Lambda > 0.
    pub cosmological: f64,
    /// Electric charge q of the Dirac field.
    pub field_charge: f64,
    /// Integration constant of the Regge-Wheeler coordinate.
    pub c0: f64,
    /// Integration constant K of the phase primitive C(x,k).
    pub k_phase: f64,
}

impl BlackHoleParams {
    pub fn new(mass: f64, charge: f64, spin: f64, cosmological: f64, field_charge: f64) -> Self {
        BlackHoleParams {
            mass,
            charge,
            spin,
            cosmological,
            field_charge,
            c0: 0.0,
            k_phase: 0.0,
        }
    }

    pub fn with_gauge(mut self, c0: f64, k_phase: f64) -> Self {
        self.c0 = c0;
        self.k_phase = k_phase;
        self
    }

    /// zeta = a^2 Lambda / 3.
    pub fn zeta(&self) -> f64 {
        self.spin * self.spin * self.cosmological / 3.0
    }

    /// E = 1 + a^2 Lambda / 3.
    pub fn e_const(&self) -> f64 {
        1.0 + self.zeta()
    }

    /// Horizon polynomial Delta_r(r) = (r^2+a^2)(1 - Lambda r^2/3) - 2Mr + Q^2.
    pub fn delta_r(&self, r: f64) -> f64 {
        let a2 = self.spin * self.spin;
        (r * r + a2) * (1.0 - self.cosmological * r * r / 3.0) - 2.0 * self.mass * r
            + self.charge * self.charge
    }

    pub fn delta_r_prime(&self, r: f64) -> f64 {
        let a2 = self.spin * self.spin;
        2.0 * r * (1.0 - self.cosmological * r * r / 3.0)
            + (r * r + a2) * (-2.0 * self.cosmological * r / 3.0)
            - 2.0 * self.mass
    }

    /// Delta_theta = 1 + (a^2 Lambda / 3) cos^2 theta.
    pub fn delta_theta(&self, theta: f64) -> f64 {
        1.0 + self.zeta() * theta.cos() * theta.cos()
    }

    /// b(theta) = a sin(theta) / sqrt(Delta_theta).
    pub fn b_theta(&self, theta: f64) -> f64 {
        self.spin * theta.sin() / self.delta_theta(theta).sqrt()
    }
}

/// Why a parameter set was rejected.
#[derive(Debug, Clone, PartialEq)]
pub enum RejectReason {
    NonpositiveMass,
    NonpositiveCosmological,
    /// a^2 Lambda/3 reached or exceeded 7 - 4 sqrt(3); extremal rotation.
    RotationBoundNotStrict {
        value: f64,
    },
    /// Delta_r does not present four simple real roots in the expected order.
    RootStructure(String),
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RejectReason::NonpositiveMass => write!(f, "M > 0 violated"),
            RejectReason::NonpositiveCosmological => write!(f, "Lambda > 0 violated"),
            RejectReason::RotationBoundNotStrict { value } => write!(
                f,
                "rotation bound not strict: a^2*Lambda/3 = {value} >= 7 - 4*sqrt(3)"
            ),
            RejectReason::RootStructure(s) => write!(f, "root structure: {s}"),
        }
    }
}

/// Admissibility verdict; rejection is a value, not an error.
#[derive(Debug, Clone, PartialEq)]
pub enum Admissibility {
    Accept,
    Reject(RejectReason),
}

impl Admissibility {
    pub fn is_accept(&self) -> bool {
        matches!(self, Admissibility::Accept)
    }
}

/// Check the admissibility conditions: positivity, the strict rotation
/// bound and the four-simple-real-roots structure of Delta_r.
pub fn validate_params(p: &BlackHoleParams) -> Admissibility {
    if !(p.mass > 0.0) {
        return Admissibility::Reject(RejectReason::NonpositiveMass);
    }
    if !(p.cosmological > 0.0) {
        return Admissibility::Reject(RejectReason::NonpositiveCosmological);
    }
    let zeta = p.zeta();
    if zeta >= ROTATION_BOUND {
        return Admissibility::Reject(RejectReason::RotationBoundNotStrict { value: zeta });
    }
    match isolate_roots(p) {
        Ok(_) => Admissibility::Accept,
        Err(msg) => Admissibility::Reject(RejectReason::RootStructure(msg)),
    }
}

/// Sign-change bracketing on a fine grid followed by bisection and a Newton
/// polish. Returns the roots ordered r_n < 0 < r_c < r_- < r_+.
fn isolate_roots(p: &BlackHoleParams) -> std::result::Result<[f64; 4], String> {
    // Lambda -> 0 limit locates the cosmological root near sqrt(3/Lambda).
    let r_guess = (3.0 / p.cosmological).sqrt();
    let r_max = 1.5 * (r_guess + 2.0 * p.mass + p.spin.abs() + p.charge.abs());
    let scale = p.delta_r(0.0).abs().max(p.mass * p.mass);

    let mut roots = Vec::new();
    let scan = |lo: f64, hi: f64, n: usize, roots: &mut Vec<f64>| {
        let mut prev_x = lo;
        let mut prev_f = p.delta_r(lo);
        for i in 1..=n {
            let x = lo + (hi - lo) * i as f64 / n as f64;
            let f = p.delta_r(x);
            if prev_f == 0.0 {
                roots.push(prev_x);
            } else if (prev_f < 0.0) != (f < 0.0) {
                let r0 = bisect(|r| p.delta_r(r), prev_x, x, 1e-13 * (1.0 + x.abs()));
                let r = newton_bisect(
                    |r| (p.delta_r(r), p.delta_r_prime(r)),
                    prev_x,
                    x,
                    r0,
                    1e-15,
                );
                roots.push(r);
            }
            prev_x = x;
            prev_f = f;
        }
    };
    scan(-3.0 * r_max, 0.0, 30_000, &mut roots);
    let negative = roots.len();
    scan(0.0, r_max, 60_000, &mut roots);
    let positive = roots.len() - negative;

    if negative != 1 || positive != 3 {
        return Err(format!(
            "found {negative} negative / {positive} positive simple roots (need 1 / 3)"
        ));
    }
    let r = [roots[0], roots[1], roots[2], roots[3]];
    for (i, &rj) in r.iter().enumerate() {
        if p.delta_r(rj).abs() > 1e-10 * scale {
            return Err(format!("root {i} failed to refine: residual {:e}", p.delta_r(rj)));
        }
        if p.delta_r_prime(rj).abs() < 1e-8 * scale.max(1.0) {
            return Err(format!("root {i} is not simple within tolerance"));
        }
    }
    // Delta_r must stay positive on the exterior (r_-, r_+).
    for i in 1..1000 {
        let rr = r[2] + (r[3] - r[2]) * i as f64 / 1000.0;
        if p.delta_r(rr) <= 0.0 {
            return Err(format!("Delta_r not positive at interior r = {rr}"));
        }
    }
    Ok(r)
}

/// Which horizon an asymptotic quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Event horizon, x -> -infinity.
    Minus,
    /// Cosmological horizon, x -> +infinity.
    Plus,
}

/// Horizon radii, surface gravities and derived constants.
#[derive(Debug, Clone, Copy)]
pub struct HorizonData {
    pub r_n: f64,
    pub r_c: f64,
    pub r_minus: f64,
    pub r_plus: f64,
    pub kappa_n: f64,
    pub kappa_c: f64,
    pub kappa_minus: f64,
    pub kappa_plus: f64,
    /// E = 1 + a^2 Lambda / 3.
    pub e_const: f64,
    /// A = integral of a(x) over the line; set by [`capital_a`].
    pub a_total: Option<f64>,
}

impl HorizonData {
    pub fn roots(&self) -> [f64; 4] {
        [self.r_n, self.r_c, self.r_minus, self.r_plus]
    }

    pub fn kappas(&self) -> [f64; 4] {
        [self.kappa_n, self.kappa_c, self.kappa_minus, self.kappa_plus]
    }

    pub fn r_side(&self, side: Side) -> f64 {
        match side {
            Side::Minus => self.r_minus,
            Side::Plus => self.r_plus,
        }
    }

    pub fn kappa_side(&self, side: Side) -> f64 {
        match side {
            Side::Minus => self.kappa_minus,
            Side::Plus => self.kappa_plus,
        }
    }
}

/// Horizon structure of an admissible parameter set.
pub fn horizon_roots(p: &BlackHoleParams) -> Result<HorizonData> {
    if let Admissibility::Reject(reason) = validate_params(p) {
        return Err(Error::RootIsolation(format!(
            "parameters inadmissible: {reason}"
        )));
    }
    let r = isolate_roots(p).map_err(Error::RootIsolation)?;
    let a2 = p.spin * p.spin;
    let kappa = |rj: f64| p.delta_r_prime(rj) / (2.0 * (rj * rj + a2));
    Ok(HorizonData {
        r_n: r[0],
        r_c: r[1],
        r_minus: r[2],
        r_plus: r[3],
        kappa_n: kappa(r[0]),
        kappa_c: kappa(r[1]),
        kappa_minus: kappa(r[2]),
        kappa_plus: kappa(r[3]),
        e_const: p.e_const(),
        a_total: None,
    })
}

/// Omega_{+/-}(k) = (a E k + q Q r_{+/-}) / (r_{+/-}^2 + a^2).
pub fn omega(p: &BlackHoleParams, h: &HorizonData, side: Side, k: f64) -> f64 {
    let rj = h.r_side(side);
    (p.spin * p.e_const() * k + p.field_charge * p.charge * rj) / (rj * rj + p.spin * p.spin)
}

/// A radial position between the horizons carrying exact horizon distances:
/// `d_minus = r - r_minus`, `d_plus = r_plus - r` (both positive).
#[derive(Debug, Clone, Copy)]
pub struct RadialPoint {
    pub r: f64,
    pub d_minus: f64,
    pub d_plus: f64,
}

impl RadialPoint {
    pub fn from_r(r: f64, h: &HorizonData) -> Result<Self> {
        if !(r > h.r_minus && r < h.r_plus) {
            return Err(Error::Domain(format!(
                "r = {r} is not strictly between the horizons ({}, {})",
                h.r_minus, h.r_plus
            )));
        }
        Ok(RadialPoint {
            r,
            d_minus: r - h.r_minus,
            d_plus: h.r_plus - r,
        })
    }
}

/// Factored horizon polynomial (Lambda/3)(r - r_n)(r - r_c) d_minus d_plus;
/// positive and cancellation-free throughout the exterior.
pub fn delta_r_factored(p: &BlackHoleParams, h: &HorizonData, pt: &RadialPoint) -> f64 {
    (p.cosmological / 3.0) * (pt.r - h.r_n) * (pt.r - h.r_c) * pt.d_minus * pt.d_plus
}

/// a(x) = sqrt(Delta_r) / (r^2 + a^2) at a radial point.
pub fn potential_a(p: &BlackHoleParams, h: &HorizonData, pt: &RadialPoint) -> f64 {
    delta_r_factored(p, h, pt).sqrt() / (pt.r * pt.r + p.spin * p.spin)
}

/// c(x,k) = (a E k + q Q r) / (r^2 + a^2) at a radial point.
pub fn potential_c(p: &BlackHoleParams, pt: &RadialPoint, k: f64) -> f64 {
    (p.spin * p.e_const() * k + p.field_charge * p.charge * pt.r)
        / (pt.r * pt.r + p.spin * p.spin)
}

/// c(x,k) - Omega_{side}(k) in factored form: the difference vanishes
/// linearly in the horizon distance, and the factored product keeps full
/// relative accuracy deep into the tails where direct subtraction drowns
/// in rounding.
pub fn potential_c_minus_omega(
    p: &BlackHoleParams,
    h: &HorizonData,
    pt: &RadialPoint,
    side: Side,
    k: f64,
) -> f64 {
    let om = omega(p, h, side, k);
    let (d, rj) = match side {
        Side::Minus => (pt.d_minus, h.r_minus),
        Side::Plus => (-pt.d_plus, h.r_plus),
    };
    d * (p.field_charge * p.charge - om * (pt.r + rj)) / (pt.r * pt.r + p.spin * p.spin)
}

/// d a / d x = (d a / d r) * Delta_r / (r^2 + a^2).
pub fn potential_a_prime(p: &BlackHoleParams, h: &HorizonData, pt: &RadialPoint) -> f64 {
    let a2 = p.spin * p.spin;
    let w = pt.r * pt.r + a2;
    let delta = delta_r_factored(p, h, pt);
    let sq = delta.sqrt();
    // da/dr = Delta'/(2 sqrt(Delta) w) - 2 r sqrt(Delta)/w^2
    let da_dr = p.delta_r_prime(pt.r) / (2.0 * sq * w) - 2.0 * pt.r * sq / (w * w);
    da_dr * delta / w
}

/// d c / d x = (d c / d r) * Delta_r / (r^2 + a^2).
pub fn potential_c_prime(p: &BlackHoleParams, h: &HorizonData, pt: &RadialPoint, k: f64) -> f64 {
    let a2 = p.spin * p.spin;
    let w = pt.r * pt.r + a2;
    let num = p.spin * p.e_const() * k + p.field_charge * p.charge * pt.r;
    let dc_dr = (p.field_charge * p.charge * w - num * 2.0 * pt.r) / (w * w);
    dc_dr * delta_r_factored(p, h, pt) / w
}

/// Smooth part of the Regge-Wheeler coordinate expressed through the
/// distance to the event horizon: x = ln(d)/(2 kappa_-) + phi_minus(d).
fn phi_minus(h: &HorizonData, c0: f64, d: f64) -> f64 {
    (h.r_plus - h.r_minus - d).ln() / (2.0 * h.kappa_plus)
        + (h.r_minus - h.r_c + d).ln() / (2.0 * h.kappa_c)
        + (h.r_minus - h.r_n + d).ln() / (2.0 * h.kappa_n)
        + c0
}

fn phi_minus_prime(h: &HorizonData, d: f64) -> f64 {
    -1.0 / (2.0 * h.kappa_plus * (h.r_plus - h.r_minus - d))
        + 1.0 / (2.0 * h.kappa_c * (h.r_minus - h.r_c + d))
        + 1.0 / (2.0 * h.kappa_n * (h.r_minus - h.r_n + d))
}

/// Counterpart at the cosmological horizon: x = ln(d)/(2 kappa_+) + phi_plus(d),
/// d = r_plus - r.
fn phi_plus(h: &HorizonData, c0: f64, d: f64) -> f64 {
    (h.r_plus - h.r_minus - d).ln() / (2.0 * h.kappa_minus)
        + (h.r_plus - h.r_c - d).ln() / (2.0 * h.kappa_c)
        + (h.r_plus - h.r_n - d).ln() / (2.0 * h.kappa_n)
        + c0
}

fn phi_plus_prime(h: &HorizonData, d: f64) -> f64 {
    -1.0 / (2.0 * h.kappa_minus * (h.r_plus - h.r_minus - d))
        - 1.0 / (2.0 * h.kappa_c * (h.r_plus - h.r_c - d))
        - 1.0 / (2.0 * h.kappa_n * (h.r_plus - h.r_n - d))
}

/// Closed-form Regge-Wheeler coordinate of the point, with integration
/// constant `c0`. The log-sum follows from the partial-fraction expansion
/// of (r^2+a^2)/Delta_r over the four simple roots.
pub fn regge_wheeler_x_of(pt: &RadialPoint, h: &HorizonData, c0: f64) -> f64 {
    pt.d_minus.ln() / (2.0 * h.kappa_minus)
        + pt.d_plus.ln() / (2.0 * h.kappa_plus)
        + (pt.r - h.r_c).ln() / (2.0 * h.kappa_c)
        + (pt.r - h.r_n).ln() / (2.0 * h.kappa_n)
        + c0
}

/// Regge-Wheeler coordinate of a radius strictly between the horizons.
pub fn regge_wheeler_x(r: f64, h: &HorizonData, c0: f64) -> Result<f64> {
    let pt = RadialPoint::from_r(r, h)?;
    Ok(regge_wheeler_x_of(&pt, h, c0))
}

/// Invert the Regge-Wheeler coordinate. All real x are valid; the returned
/// point carries exact horizon distances even when they are far below the
/// resolution of `r` itself.
pub fn radius_from_x(x: f64, h: &HorizonData, c0: f64) -> RadialPoint {
    let span = h.r_plus - h.r_minus;
    let r_mid = 0.5 * (h.r_minus + h.r_plus);
    let x_mid = regge_wheeler_x_of(&RadialPoint::from_r(r_mid, h).unwrap(), h, c0);
    if x <= x_mid {
        // Solve in u = ln(d_minus); f is strictly increasing in u.
        let f = |u: f64| {
            let d = u.exp();
            (
                u / (2.0 * h.kappa_minus) + phi_minus(h, c0, d) - x,
                1.0 / (2.0 * h.kappa_minus) + d * phi_minus_prime(h, d),
            )
        };
        let hi = (0.5 * span).ln();
        let lo = (2.0 * h.kappa_minus * (x - phi_minus(h, c0, 0.0)) - 5.0).max(-690.0);
        let u0 = (2.0 * h.kappa_minus * (x - phi_minus(h, c0, 0.0))).clamp(lo, hi);
        let u = newton_bisect(f, lo.min(hi - 1.0), hi, u0, 1e-14);
        let d = u.exp();
        RadialPoint {
            r: h.r_minus + d,
            d_minus: d,
            d_plus: span - d,
        }
    } else {
        // Mirror branch in v = ln(d_plus); f is strictly decreasing in v.
        let f = |v: f64| {
            let d = v.exp();
            (
                v / (2.0 * h.kappa_plus) + phi_plus(h, c0, d) - x,
                1.0 / (2.0 * h.kappa_plus) + d * phi_plus_prime(h, d),
            )
        };
        let hi = (0.5 * span).ln();
        let lo = (2.0 * h.kappa_plus * (x - phi_plus(h, c0, 0.0)) - 5.0).max(-690.0);
        let v0 = (2.0 * h.kappa_plus * (x - phi_plus(h, c0, 0.0))).clamp(lo, hi);
        let v = newton_bisect(f, lo.min(hi - 1.0), hi, v0, 1e-14);
        let d = v.exp();
        RadialPoint {
            r: h.r_plus - d,
            d_minus: span - d,
            d_plus: d,
        }
    }
}

/// A = integral of a(x) dx over the line, evaluated in the r coordinate as
/// the integral of Delta_r^{-1/2} over (r_-, r_+). The inverse square-root
/// endpoint singularities are removed by the substitutions r = r_- + s^2
/// and r = r_+ - s^2.
pub fn capital_a(p: &BlackHoleParams, h: &HorizonData) -> f64 {
    let lam3 = p.cosmological / 3.0;
    let r_mid = 0.5 * (h.r_minus + h.r_plus);
    // Left piece: integrand 2 / sqrt((Lambda/3)(r-r_n)(r-r_c)(r_+ - r)).
    let left = adaptive_simpson(
        |s| {
            let r = h.r_minus + s * s;
            2.0 / (lam3 * (r - h.r_n) * (r - h.r_c) * (h.r_plus - r)).sqrt()
        },
        0.0,
        (r_mid - h.r_minus).sqrt(),
        1e-12,
    );
    let right = adaptive_simpson(
        |s| {
            let r = h.r_plus - s * s;
            2.0 / (lam3 * (r - h.r_n) * (r - h.r_c) * (r - h.r_minus)).sqrt()
        },
        0.0,
        (h.r_plus - r_mid).sqrt(),
        1e-12,
    );
    left + right
}

/// Amplitudes of the exponential tails a(x) ~ a_pm e^{kappa_pm x}.
pub fn tail_amplitudes(p: &BlackHoleParams, h: &HorizonData, c0: f64) -> (f64, f64) {
    let a2 = p.spin * p.spin;
    let am = (2.0 * h.kappa_minus / (h.r_minus * h.r_minus + a2)).sqrt()
        * (-h.kappa_minus * phi_minus(h, c0, 0.0)).exp();
    let ap = (-2.0 * h.kappa_plus / (h.r_plus * h.r_plus + a2)).sqrt()
        * (-h.kappa_plus * phi_plus(h, c0, 0.0)).exp();
    (am, ap)
}

/// Closed form of the phase primitive C(x,k) via partial fractions of
/// (a E k + q Q r)/Delta_r: C = sum_j rho_j ln|r - r_j| + gauge(k).
#[derive(Debug, Clone, Copy)]
pub struct PhasePrimitive {
    rho_n: f64,
    rho_c: f64,
    rho_minus: f64,
    rho_plus: f64,
    gauge: f64,
    pub omega_minus: f64,
    pub omega_plus: f64,
    pub beta: f64,
}

impl PhasePrimitive {
    pub fn new(p: &BlackHoleParams, h: &HorizonData, k: f64) -> Self {
        let num = |rj: f64| p.spin * p.e_const() * k + p.field_charge * p.charge * rj;
        let rho_n = num(h.r_n) / p.delta_r_prime(h.r_n);
        let rho_c = num(h.r_c) / p.delta_r_prime(h.r_c);
        let rho_minus = omega(p, h, Side::Minus, k) / (2.0 * h.kappa_minus);
        let rho_plus = omega(p, h, Side::Plus, k) / (2.0 * h.kappa_plus);
        let omega_minus = omega(p, h, Side::Minus, k);
        let omega_plus = omega(p, h, Side::Plus, k);
        let span = h.r_plus - h.r_minus;
        // Fix the additive constant so C(x) -> Omega_- x + K as x -> -inf.
        let gauge = p.k_phase + omega_minus * phi_minus(h, p.c0, 0.0)
            - rho_n * (h.r_minus - h.r_n).ln()
            - rho_c * (h.r_minus - h.r_c).ln()
            - rho_plus * span.ln();
        // beta(k) read off from the x -> +inf expansion.
        let beta = rho_n * ((h.r_plus - h.r_n) / (h.r_minus - h.r_n)).ln()
            + rho_c * ((h.r_plus - h.r_c) / (h.r_minus - h.r_c)).ln()
            + (rho_minus - rho_plus) * span.ln()
            + omega_minus * phi_minus(h, p.c0, 0.0)
            - omega_plus * phi_plus(h, p.c0, 0.0);
        PhasePrimitive {
            rho_n,
            rho_c,
            rho_minus,
            rho_plus,
            gauge,
            omega_minus,
            omega_plus,
            beta,
        }
    }

    pub fn eval(&self, h: &HorizonData, pt: &RadialPoint) -> f64 {
        self.rho_n * (pt.r - h.r_n).ln()
            + self.rho_c * (pt.r - h.r_c).ln()
            + self.rho_minus * pt.d_minus.ln()
            + self.rho_plus * pt.d_plus.ln()
            + self.gauge
    }
}

/// beta(k), the relative phase constant between the two horizon gauges.
pub fn beta_k(p: &BlackHoleParams, h: &HorizonData, k: f64) -> f64 {
    PhasePrimitive::new(p, h, k).beta
}

/// Uniform Regge-Wheeler grid specification.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

/// Range where both tails of a(x) have dropped below `tail_eps`, sampled
/// no coarser than `max_spacing`.
pub fn suggested_grid(
    p: &BlackHoleParams,
    h: &HorizonData,
    tail_eps: f64,
    max_spacing: f64,
) -> GridSpec {
    let (am, ap) = tail_amplitudes(p, h, p.c0);
    let x_min = (tail_eps / am).ln() / h.kappa_minus;
    let x_max = (tail_eps / ap).ln() / h.kappa_plus;
    let n = ((x_max - x_min) / max_spacing).ceil() as usize + 1;
    GridSpec {
        x_min,
        x_max,
        n: n.max(8),
    }
}

/// Sampled radial data for one angular mode k.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    pub params: BlackHoleParams,
    pub horizon: HorizonData,
    pub k: f64,
    pub x: Vec<f64>,
    /// Grid spacing.
    pub h: f64,
    pub points: Vec<RadialPoint>,
    pub a: Vec<f64>,
    pub c: Vec<f64>,
    /// Phase primitive C(x,k).
    pub big_c: Vec<f64>,
    /// q_k(x) = a(x) e^{2i C(x,k)}.
    pub q: Vec<Complex64>,
    pub omega_minus: f64,
    pub omega_plus: f64,
    pub beta: f64,
    /// Tail amplitudes of a(x).
    pub a_minus: f64,
    pub a_plus: f64,
    /// A = integral of a over the whole line.
    pub a_total: f64,
    /// Exact tail integrals of a beyond the grid ends (leading order).
    pub tail_left: f64,
    pub tail_right: f64,
    phase: PhasePrimitive,
}

/// Sample geometry and potentials for mode `k` on a uniform grid.
pub fn build_radial_profile(
    p: &BlackHoleParams,
    h: &HorizonData,
    k: f64,
    grid: &GridSpec,
) -> Result<RadialProfile> {
    if !(grid.x_min < grid.x_max) || grid.n < 8 {
        return Err(Error::Config(format!(
            "invalid grid: x_min={}, x_max={}, n={}",
            grid.x_min, grid.x_max, grid.n
        )));
    }
    let n = grid.n;
    let step = (grid.x_max - grid.x_min) / (n - 1) as f64;
    let phase = PhasePrimitive::new(p, h, k);
    let mut x = Vec::with_capacity(n);
    let mut points = Vec::with_capacity(n);
    let mut a = Vec::with_capacity(n);
    let mut c = Vec::with_capacity(n);
    let mut big_c = Vec::with_capacity(n);
    let mut q = Vec::with_capacity(n);
    for i in 0..n {
        let xi = grid.x_min + step * i as f64;
        let pt = radius_from_x(xi, h, p.c0);
        let ai = potential_a(p, h, &pt);
        let ci = potential_c(p, &pt, k);
        let cci = phase.eval(h, &pt);
        x.push(xi);
        a.push(ai);
        c.push(ci);
        big_c.push(cci);
        q.push(Complex64::from_polar(ai, 2.0 * cci));
        points.push(pt);
    }
    if a[0] > 1e-8 || a[n - 1] > 1e-8 {
        return Err(Error::Config(format!(
            "grid truncation too coarse: a(x_min)={:.3e}, a(x_max)={:.3e} exceed 1e-8",
            a[0],
            a[n - 1]
        )));
    }
    let (a_minus, a_plus) = tail_amplitudes(p, h, p.c0);
    let a_total = capital_a(p, h);
    let tail_left = a[0] / h.kappa_minus;
    let tail_right = a[n - 1] / (-h.kappa_plus);
    Ok(RadialProfile {
        params: *p,
        horizon: HorizonData {
            a_total: Some(a_total),
            ..*h
        },
        k,
        x,
        h: step,
        points,
        a,
        c,
        big_c,
        q,
        omega_minus: phase.omega_minus,
        omega_plus: phase.omega_plus,
        beta: phase.beta,
        a_minus,
        a_plus,
        a_total,
        tail_left,
        tail_right,
        phase,
    })
}

impl RadialProfile {
    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn x_min(&self) -> f64 {
        self.x[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.x.last().unwrap()
    }

    /// Evaluate (a, c, C) at an arbitrary x from the closed forms.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let pt = radius_from_x(x, &self.horizon, self.params.c0);
        (
            potential_a(&self.params, &self.horizon, &pt),
            potential_c(&self.params, &pt, self.k),
            self.phase.eval(&self.horizon, &pt),
        )
    }

    /// q_k at an arbitrary x.
    pub fn eval_q(&self, x: f64) -> Complex64 {
        let (a, _, cc) = self.eval(x);
        Complex64::from_polar(a, 2.0 * cc)
    }

    /// X(x) = integral of a from -infinity to x, per-sample (Liouville grid).
    pub fn liouville_x(&self) -> Vec<f64> {
        let cum = crate::numerics::cumulative_integral(self.h, &self.a);
        cum.into_iter().map(|v| v + self.tail_left).collect()
    }

    /// A - X(x) accumulated from the right end, so the exponentially small
    /// values near the cosmological horizon keep full relative accuracy.
    pub fn liouville_x_complement(&self) -> Vec<f64> {
        let rev: Vec<f64> = self.a.iter().rev().copied().collect();
        let cum = crate::numerics::cumulative_integral(self.h, &rev);
        let n = self.n();
        (0..n)
            .map(|i| cum[n - 1 - i] + self.tail_right)
            .collect()
    }
}
