//! The lambda-dependent angular eigenvalue problem on (0, pi): ordered
//! positive eigenvalues mu_kl(lambda), eigenfunctions, Frobenius expansions
//! at the poles, and growth certificates for the eigenvalue distribution.
//!
//! The first-order 2x2 system has regular singular points at both poles
//! (the k/sin(theta) term). Eigenvalues are found by double-sided shooting:
//! both ends are initialised from truncated Frobenius series, integrated to
//! the midpoint, and matched through the Wronskian determinant, scanning
//! and bisecting in mu. Spinors with u1 purely imaginary and u2 real close
//! under the flow, so the integration runs in a real 2-vector form.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::BlackHoleParams;
use crate::numerics::{cumulative_integral, Dopri5, SymBanded};
use crate::special::Poly;

/// One angular mode: half-integer k and positive index l.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularMode {
    pub k: f64,
    pub l: u32,
}

impl AngularMode {
    pub fn new(k: f64, l: u32) -> Result<Self> {
        let twice = 2.0 * k;
        if twice.fract() != 0.0 || (twice as i64) % 2 == 0 {
            return Err(Error::Domain(format!(
                "k = {k} is not a half-integer outside the integers"
            )));
        }
        if l < 1 {
            return Err(Error::Domain("l must be >= 1".into()));
        }
        Ok(AngularMode { k, l })
    }
}

/// Scalar data defining the reduced angular system for one (k, mu).
#[derive(Debug, Clone, Copy)]
pub struct AngularSystem {
    pub k: f64,
    pub mu: f64,
    /// zeta = a^2 Lambda / 3.
    pub zeta: f64,
    /// xi = a lambda.
    pub xi: f64,
}

impl AngularSystem {
    pub fn new(p: &BlackHoleParams, lambda: f64, k: f64, mu: f64) -> Self {
        AngularSystem {
            k,
            mu,
            zeta: p.zeta(),
            xi: p.spin * lambda,
        }
    }

    /// Diagonal coefficients (d1, d2) and coupling g = mu / sqrt(Delta_theta)
    /// of the real first-order form y' = [[d1, g], [-g, d2]] y.
    pub fn coeffs(&self, theta: f64) -> (f64, f64, f64) {
        let s = theta.sin();
        let dt = 1.0 + self.zeta * theta.cos() * theta.cos();
        let diag_common = self.zeta * (2.0 * theta).sin() / (4.0 * dt);
        let tilt = (self.zeta * self.k - self.xi) * s / dt;
        let d1 = -self.k / s + diag_common - tilt;
        let d2 = self.k / s + diag_common + tilt;
        let g = self.mu / dt.sqrt();
        (d1, d2, g)
    }

    fn rhs(&self, theta: f64, y: &[f64; 2]) -> [f64; 2] {
        let (d1, d2, g) = self.coeffs(theta);
        [d1 * y[0] + g * y[1], -g * y[0] + d2 * y[1]]
    }

    /// Apply the full complex angular operator to (u, u') samples.
    pub fn apply_operator(
        &self,
        theta: f64,
        u: [Complex64; 2],
        du: [Complex64; 2],
    ) -> [Complex64; 2] {
        let s = theta.sin();
        let dt = 1.0 + self.zeta * theta.cos() * theta.cos();
        let sq = dt.sqrt();
        let c2 = self.zeta * (2.0 * theta).sin() / (4.0 * dt);
        let c3 = self.k / s + (self.zeta * self.k - self.xi) * s / dt;
        let i = Complex64::new(0.0, 1.0);
        [
            sq * (-i * du[1] + i * c2 * u[1] + i * c3 * u[1]),
            sq * (-i * du[0] + i * c2 * u[0] - i * c3 * u[0]),
        ]
    }
}

/// Truncated Frobenius solution theta^{|k|} (v0 + v1 theta + ...) at the
/// pole theta = 0, in the real 2-vector form.
#[derive(Debug, Clone)]
pub struct FrobeniusSeries {
    pub exponent: f64,
    /// Real-form coefficients v^n.
    pub coeffs: Vec<[f64; 2]>,
}

impl FrobeniusSeries {
    pub fn eval(&self, theta: f64) -> [f64; 2] {
        let mut acc = [0.0, 0.0];
        for v in self.coeffs.iter().rev() {
            acc = [acc[0] * theta + v[0], acc[1] * theta + v[1]];
        }
        let p = theta.powf(self.exponent);
        [acc[0] * p, acc[1] * p]
    }

    pub fn eval_deriv(&self, theta: f64) -> [f64; 2] {
        // d/dtheta theta^{e + n} = (e + n) theta^{e + n - 1}
        let mut acc = [0.0, 0.0];
        let e = self.exponent;
        for (n, v) in self.coeffs.iter().enumerate().rev() {
            let w = e + n as f64;
            let t = theta.powf(w - 1.0);
            acc[0] += w * v[0] * t;
            acc[1] += w * v[1] * t;
        }
        acc
    }

    /// Coefficients as complex spinor components (u1 = i w1, u2 real).
    pub fn complex_coeffs(&self) -> Vec<[Complex64; 2]> {
        self.coeffs
            .iter()
            .map(|v| [Complex64::new(0.0, v[0]), Complex64::new(v[1], 0.0)])
            .collect()
    }
}

/// Taylor coefficients of the matrix theta * A(theta) about theta = 0, in
/// the real form: A_n = [[p_n, mu q_n], [-mu q_n, r_n]].
struct SystemTaylor {
    p: Vec<f64>,
    q: Vec<f64>,
    r: Vec<f64>,
}

fn system_taylor(sys: &AngularSystem, order: usize) -> SystemTaylor {
    let n = order + 1;
    let sin = Poly::sin(n);
    let cos = Poly::cos(n);
    let cos2 = cos.mul(&cos);
    let delta = Poly::constant(1.0, n).add(&cos2.scale(sys.zeta));
    let inv_delta = delta.recip();
    let inv_sqrt_delta = delta.sqrt().recip();
    // theta / sin(theta)
    let t_over_sin = sin.shift_down(1).recip();
    // theta sin(2 theta) / (4 Delta) = theta * 2 sin cos / (4 Delta)
    let sin_cos = sin.mul(&cos);
    let s2d = shift_up(&sin_cos.mul(&inv_delta).scale(0.5), 1, n);
    // theta sin(theta) / Delta
    let sd = shift_up(&sin.mul(&inv_delta), 1, n);
    // theta / sqrt(Delta)
    let tisq = shift_up(&inv_sqrt_delta, 1, n);

    let tilt = sys.zeta * sys.k - sys.xi;
    let mut p = Vec::with_capacity(n + 1);
    let mut q = Vec::with_capacity(n + 1);
    let mut r = Vec::with_capacity(n + 1);
    for j in 0..=order {
        p.push(-sys.k * t_over_sin.0[j] + sys.zeta * s2d.0[j] - tilt * sd.0[j]);
        r.push(sys.k * t_over_sin.0[j] + sys.zeta * s2d.0[j] + tilt * sd.0[j]);
        q.push(tisq.0[j]);
    }
    SystemTaylor { p, q, r }
}

fn shift_up(poly: &Poly, m: usize, order: usize) -> Poly {
    let mut out = Poly::zero(order);
    for j in 0..=order {
        if j >= m && j - m <= poly.order() {
            out.0[j] = poly.0[j - m];
        }
    }
    out
}

/// Construct the regular Frobenius solution at theta = 0 by the standard
/// induction: v0 spans the |k|-eigenvector of A_0 and
/// ((|k|+n) I - A_0) v^n = sum_{j<n} A_{n-j} v^j.
pub fn frobenius_series(
    lambda: f64,
    k: f64,
    mu: f64,
    p: &BlackHoleParams,
    order: usize,
) -> FrobeniusSeries {
    let sys = AngularSystem::new(p, lambda, k, mu);
    let tay = system_taylor(&sys, order);
    let e = k.abs();
    let v0 = if k > 0.0 { [0.0, 1.0] } else { [1.0, 0.0] };
    let mut coeffs = vec![v0];
    for n in 1..=order {
        let mut rhs = [0.0, 0.0];
        for j in 0..n {
            let m = n - j;
            let v = coeffs[j];
            // A_m v in real form; off-diagonal carries the mu factor.
            rhs[0] += tay.p[m] * v[0] + mu * tay.q[m] * v[1];
            rhs[1] += -mu * tay.q[m] * v[0] + tay.r[m] * v[1];
        }
        // (e + n) I - A_0 = diag(e + n + k, e + n - k)
        let d1 = e + n as f64 + k;
        let d2 = e + n as f64 - k;
        coeffs.push([rhs[0] / d1, rhs[1] / d2]);
    }
    FrobeniusSeries {
        exponent: e,
        coeffs,
    }
}

/// Maximum residual of the truncated series in the first-order system on a
/// grid of (0, theta_max].
pub fn series_ode_residual(
    series: &FrobeniusSeries,
    lambda: f64,
    k: f64,
    mu: f64,
    p: &BlackHoleParams,
    theta_max: f64,
) -> f64 {
    let sys = AngularSystem::new(p, lambda, k, mu);
    let mut worst: f64 = 0.0;
    let n = 200;
    for i in 1..=n {
        let theta = theta_max * i as f64 / n as f64;
        let y = series.eval(theta);
        let dy = series.eval_deriv(theta);
        let f = sys.rhs(theta, &y);
        let r = ((dy[0] - f[0]).powi(2) + (dy[1] - f[1]).powi(2)).sqrt();
        worst = worst.max(r);
    }
    worst
}

/// Solver knobs; defaults follow the residual-controlled choices
/// epsilon = 1e-4 with series order 8.
#[derive(Debug, Clone, Copy)]
pub struct AngularOpts {
    pub epsilon: f64,
    pub series_order: usize,
    pub rtol: f64,
    /// Nodes of the output theta grid (inclusive of both poles).
    pub n_theta: usize,
    /// Scan step for eigenvalue bracketing.
    pub scan_step: f64,
}

impl Default for AngularOpts {
    fn default() -> Self {
        AngularOpts {
            epsilon: 1e-4,
            series_order: 8,
            rtol: 1e-11,
            n_theta: 4096,
            scan_step: 0.1,
        }
    }
}

/// Frobenius data at theta = pi: the mirror map u -> Gamma^3 u(pi - theta)
/// preserves the system, so the regular solution at pi is the component
/// swap of the regular series at 0 evaluated in pi - theta.
fn right_end_init(series: &FrobeniusSeries, eps: f64) -> [f64; 2] {
    let v = series.eval(eps);
    [v[1], v[0]]
}

struct Shooter<'a> {
    sys: AngularSystem,
    opts: &'a AngularOpts,
    theta_match: f64,
}

impl<'a> Shooter<'a> {
    fn new(p: &BlackHoleParams, lambda: f64, k: f64, mu: f64, opts: &'a AngularOpts) -> Self {
        Shooter {
            sys: AngularSystem::new(p, lambda, k, mu),
            opts,
            theta_match: std::f64::consts::FRAC_PI_2,
        }
    }

    fn endpoints(&self, series: &FrobeniusSeries) -> ([f64; 2], [f64; 2]) {
        let eps = self.opts.epsilon;
        (series.eval(eps), right_end_init(series, eps))
    }

    /// Integrate both sides to the matching angle; returns unit-normalised
    /// end states (left, right).
    fn shoot(&self, series: &FrobeniusSeries) -> Result<([f64; 2], [f64; 2])> {
        let eps = self.opts.epsilon;
        let (y_left0, y_right0) = self.endpoints(series);
        let ode = Dopri5::<2> {
            rtol: self.opts.rtol,
            atol: 1e-290,
            max_steps: 2_000_000,
        };
        let norm0 = |y: [f64; 2]| {
            let n = (y[0] * y[0] + y[1] * y[1]).sqrt();
            [y[0] / n, y[1] / n]
        };
        let yl = ode.solve(
            |t, y| self.sys.rhs(t, y),
            eps,
            self.theta_match,
            norm0(y_left0),
        )?;
        let yr = ode.solve(
            |t, y| self.sys.rhs(t, y),
            std::f64::consts::PI - eps,
            self.theta_match,
            norm0(y_right0),
        )?;
        Ok((norm0(yl), norm0(yr)))
    }

    fn matching_det(&self, series: &FrobeniusSeries) -> Result<f64> {
        let (yl, yr) = self.shoot(series)?;
        Ok(yl[0] * yr[1] - yl[1] * yr[0])
    }
}

fn matching_det(
    p: &BlackHoleParams,
    lambda: f64,
    k: f64,
    mu: f64,
    opts: &AngularOpts,
) -> Result<f64> {
    let series = frobenius_series(lambda, k, mu, p, opts.series_order);
    Shooter::new(p, lambda, k, mu, opts).matching_det(&series)
}

/// Analytic growth window for mu_kl with the explicit perturbation constants
/// C1 = 2 (e^{1/26} - 1)(1 + 1/26), C2 = C1 / 4.
pub fn growth_window(k: f64, l: u32, xi: f64) -> (f64, f64) {
    let e26 = (1.0f64 / 26.0).exp();
    let c1 = 2.0 * (e26 - 1.0) * (1.0 + 1.0 / 26.0);
    let c2 = c1 / 4.0;
    let base = k.abs() - 0.5 + l as f64;
    (
        (2.0 - e26) * base - c1 * k.abs() - c2 - xi.abs(),
        e26 * base + c1 * k.abs() + c2 + xi.abs(),
    )
}

/// The l_max smallest positive eigenvalues of the angular operator,
/// strictly increasing, each simple.
pub fn angular_eigenvalues(
    lambda: f64,
    k: f64,
    l_max: u32,
    p: &BlackHoleParams,
) -> Result<Vec<f64>> {
    angular_eigenvalues_opts(lambda, k, l_max, p, &AngularOpts::default())
}

pub fn angular_eigenvalues_opts(
    lambda: f64,
    k: f64,
    l_max: u32,
    p: &BlackHoleParams,
    opts: &AngularOpts,
) -> Result<Vec<f64>> {
    if l_max < 1 {
        return Err(Error::Domain("l_max must be >= 1".into()));
    }
    let xi = p.spin * lambda;
    let (_, hi_last) = growth_window(k, l_max, xi);
    let mut lo = 2e-3;
    let hi = hi_last + 1.0;
    let mut eigen = Vec::new();
    let mut prev_mu = lo;
    let mut prev_det = matching_det(p, lambda, k, lo, opts)?;
    let step = opts.scan_step;
    while lo < hi && (eigen.len() as u32) < l_max {
        let next = (prev_mu + step).min(hi);
        let det = matching_det(p, lambda, k, next, opts)?;
        if prev_det == 0.0 {
            eigen.push(prev_mu);
        } else if (prev_det < 0.0) != (det < 0.0) {
            let mu = crate::numerics::bisect(
                |m| matching_det(p, lambda, k, m, opts).unwrap_or(f64::NAN),
                prev_mu,
                next,
                1e-12,
            );
            eigen.push(mu);
        }
        prev_mu = next;
        prev_det = det;
        lo = next;
        if (next - hi).abs() < 1e-12 {
            break;
        }
    }
    if (eigen.len() as u32) < l_max {
        return Err(Error::EigenConvergence {
            l: eigen.len() as u32 + 1,
            detail: format!(
                "only {} sign changes of the matching Wronskian in (0, {hi:.3}]",
                eigen.len()
            ),
        });
    }
    eigen.truncate(l_max as usize);
    for w in eigen.windows(2) {
        if w[1] - w[0] <= 1e-6 {
            return Err(Error::EigenConvergence {
                l: 0,
                detail: format!("eigenvalue gap {:.3e} below simplicity floor", w[1] - w[0]),
            });
        }
    }
    Ok(eigen)
}

/// Mode (k, l) with eigenvalue, sampled eigenfunction and Frobenius data.
#[derive(Debug, Clone)]
pub struct AngularEigenpair {
    pub mode: AngularMode,
    pub lambda: f64,
    pub mu: f64,
    pub theta: Vec<f64>,
    pub u1: Vec<Complex64>,
    pub u2: Vec<Complex64>,
    /// Frobenius coefficients in the v0 = (0,1) (resp. (1,0)) normalisation.
    pub frobenius: Vec<[Complex64; 2]>,
    pub zeta: f64,
    pub xi: f64,
    /// Max operator residual ||A_k u - mu u|| on interior grid points.
    pub residual: f64,
}

/// L^2-normalised eigenfunction for an eigenvalue `mu` previously located
/// by [`angular_eigenvalues`]. Phase convention: u2 > 0 as theta -> 0+.
pub fn angular_eigenfunction(
    lambda: f64,
    k: f64,
    l: u32,
    mu: f64,
    p: &BlackHoleParams,
) -> Result<AngularEigenpair> {
    angular_eigenfunction_opts(lambda, k, l, mu, p, &AngularOpts::default())
}

pub fn angular_eigenfunction_opts(
    lambda: f64,
    k: f64,
    l: u32,
    mu: f64,
    p: &BlackHoleParams,
    opts: &AngularOpts,
) -> Result<AngularEigenpair> {
    let mode = AngularMode::new(k, l)?;
    let sys = AngularSystem::new(p, lambda, k, mu);
    let series = frobenius_series(lambda, k, mu, p, opts.series_order);
    let eps = opts.epsilon;
    let n = opts.n_theta;
    let h = std::f64::consts::PI / n as f64;
    let theta: Vec<f64> = (0..=n).map(|i| h * i as f64).collect();
    let im = n / 2;
    let theta_match = theta[im];

    let ode = Dopri5::<2> {
        rtol: opts.rtol,
        atol: 1e-290,
        max_steps: 2_000_000,
    };

    let mut y = vec![[0.0f64; 2]; n + 1];
    // Left sweep: series below eps, integration up to the matching node.
    let mut first_ode = n + 1;
    for (i, &t) in theta.iter().enumerate() {
        if t <= eps {
            y[i] = series.eval(t);
        } else {
            first_ode = i;
            break;
        }
    }
    let left_nodes: Vec<f64> = theta[first_ode..=im].to_vec();
    let y0 = series.eval(eps);
    ode.solve_sampled(
        |t, v| sys.rhs(t, v),
        eps,
        theta_match,
        y0,
        &left_nodes,
        |j, v| {
            y[first_ode + j] = *v;
        },
    )?;

    // Right sweep, mirrored init, integrated downward to the matching node.
    let mut yr = vec![[0.0f64; 2]; n + 1];
    let mut last_ode = 0;
    for i in (0..=n).rev() {
        let t = theta[i];
        if std::f64::consts::PI - t <= eps {
            let v = series.eval(std::f64::consts::PI - t);
            yr[i] = [v[1], v[0]];
        } else {
            last_ode = i;
            break;
        }
    }
    let right_nodes: Vec<f64> = (im..=last_ode).rev().map(|i| theta[i]).collect();
    let yr0 = right_end_init(&series, eps);
    ode.solve_sampled(
        |t, v| sys.rhs(t, v),
        std::f64::consts::PI - eps,
        theta_match,
        yr0,
        &right_nodes,
        |j, v| {
            yr[last_ode - j] = *v;
        },
    )?;

    // Glue: the two sweeps must be parallel at the matching node.
    let yl_m = y[im];
    let yr_m = yr[im];
    let denom = yr_m[0] * yr_m[0] + yr_m[1] * yr_m[1];
    let s = (yl_m[0] * yr_m[0] + yl_m[1] * yr_m[1]) / denom;
    let mismatch =
        (yl_m[0] - s * yr_m[0]).hypot(yl_m[1] - s * yr_m[1]) / (yl_m[0].hypot(yl_m[1])).max(1e-300);
    if mismatch > 1e-5 {
        return Err(Error::EigenConvergence {
            l,
            detail: format!("shooting mismatch {mismatch:.3e} at the matching angle (mu off?)"),
        });
    }
    for i in im + 1..=n {
        y[i] = [s * yr[i][0], s * yr[i][1]];
    }

    // L^2 normalisation with positive u2 near the pole.
    let density: Vec<f64> = y.iter().map(|v| v[0] * v[0] + v[1] * v[1]).collect();
    let norm2 = *cumulative_integral(h, &density).last().unwrap();
    // Positive scale only: the series construction already fixes the sign
    // of the leading coefficient (u2 > 0 near theta = 0 for k > 0).
    let scale = 1.0 / norm2.sqrt();
    for v in y.iter_mut() {
        v[0] *= scale;
        v[1] *= scale;
    }

    let u1: Vec<Complex64> = y.iter().map(|v| Complex64::new(0.0, v[0])).collect();
    let u2: Vec<Complex64> = y.iter().map(|v| Complex64::new(v[1], 0.0)).collect();

    // Operator residual via 5-point derivatives on the interior window
    // (kept away from the poles where the stencil error blows up with
    // the theta^{|k|-4} derivative growth).
    let mut residual: f64 = 0.0;
    let lo_t = 0.05;
    for i in 2..n - 1 {
        let t = theta[i];
        if t < lo_t || t > std::f64::consts::PI - lo_t {
            continue;
        }
        let du = |c: &Vec<Complex64>| {
            (c[i - 2] - c[i - 1] * 8.0 + c[i + 1] * 8.0 - c[i + 2]) / (12.0 * h)
        };
        let app = sys.apply_operator(t, [u1[i], u2[i]], [du(&u1), du(&u2)]);
        let r = ((app[0] - mu * u1[i]).norm_sqr() + (app[1] - mu * u2[i]).norm_sqr()).sqrt();
        residual = residual.max(r);
    }

    Ok(AngularEigenpair {
        mode,
        lambda,
        mu,
        theta,
        u1,
        u2,
        frobenius: series.complex_coeffs(),
        zeta: sys.zeta,
        xi: sys.xi,
        residual,
    })
}

/// Assemble the finite-difference matrix of the regularised real-form
/// operator on a staggered uniform grid.
///
/// Regularisation: the substitution theta = pi sin^2(s/2) maps the
/// theta^{|k|} endpoint branches (half-integer exponents) to odd-integer
/// powers of s, so the transformed eigenfunctions are analytic across both
/// poles and plain second-order differences converge cleanly. In s the
/// problem reads B y = mu W y with the smooth weight W = diag(theta'(s));
/// the symmetric reduction W^{-1/2} B W^{-1/2} is applied entrywise.
///
/// Staggering (u2 on the n interior full nodes, w1 on the n+1 half nodes)
/// avoids the spurious doubler branch of central differences; interleaved
/// ordering gives a symmetric tridiagonal matrix with zero diagonal. The
/// lower block is the exact transpose of the discretised upper block,
/// consistent because (sqrt(Delta))' = -sqrt(Delta)(d1 + d2).
pub fn fd_matrix(lambda: f64, k: f64, p: &BlackHoleParams, n: usize) -> SymBanded {
    let sys = AngularSystem::new(p, lambda, k, 1.0);
    let h = std::f64::consts::PI / (n as f64 + 1.0);
    let theta_of = |s: f64| 0.5 * std::f64::consts::PI * (1.0 - s.cos());
    let theta_prime = |s: f64| 0.5 * std::f64::consts::PI * s.sin();
    let mut m = SymBanded::zeros(2 * n + 1, 1);
    for j in 0..=n {
        let t = h * (j as f64 + 0.5);
        let th = theta_of(t);
        let tp = theta_prime(t);
        let (_, d2, _) = sys.coeffs(th);
        let sq = (1.0 + sys.zeta * th.cos() * th.cos()).sqrt();
        let w_row = tp;
        // Row w1(t_j) = index 2j; u2(s_j) = index 2j - 1.
        // Upper block: -(sqrt(D)/theta')(d/ds - theta' d2), midpoint-averaged.
        if j >= 1 {
            let w_col = theta_prime(h * j as f64);
            m.add(
                2 * j,
                2 * j - 1,
                sq * (1.0 / (tp * h) + 0.5 * d2) / (w_row * w_col).sqrt() * tp,
            );
        }
        if j < n {
            let w_col = theta_prime(h * (j as f64 + 1.0));
            m.add(
                2 * j,
                2 * j + 1,
                -sq * (1.0 / (tp * h) - 0.5 * d2) / (w_row * w_col).sqrt() * tp,
            );
        }
    }
    m
}

/// Positive eigenvalues of the finite-difference discretisation, smallest
/// first, by inertia bisection. Independent of the shooting path.
pub fn fd_eigenvalues(lambda: f64, k: f64, p: &BlackHoleParams, l_max: u32, n: usize) -> Vec<f64> {
    let m = fd_matrix(lambda, k, p, n);
    // 2n+1 eigenvalues: n exact +/- pairs plus one kernel vector, so
    // exactly n lie below zero and the l-th positive is the (n+1+l)-th.
    let below_zero = n + 1;
    let hi = gershgorin_max(&m);
    let mut out = Vec::with_capacity(l_max as usize);
    let mut lo = 0.0;
    for l in 1..=l_max {
        let idx = below_zero + l as usize;
        let mu = m.eigenvalue_by_index(idx, lo, hi, 1e-12);
        out.push(mu);
        lo = mu;
    }
    out
}

fn gershgorin_max(m: &SymBanded) -> f64 {
    let mut hi = 0.0f64;
    for i in 0..m.n {
        let mut row = m.band[0][i].abs();
        for d in 1..=m.bw {
            if i + d < m.n {
                row += m.band[d][i].abs();
            }
            if i >= d {
                row += m.band[d][i - d].abs();
            }
        }
        hi = hi.max(row);
    }
    hi + 1.0
}

/// Richardson-extrapolated FD eigenvalues over grids n, 2n, 4n with the
/// empirically fitted convergence order (the theta^{|k|} endpoint behaviour
/// degrades plain second-order convergence for small |k|).
pub fn fd_eigenvalues_richardson(
    lambda: f64,
    k: f64,
    p: &BlackHoleParams,
    l_max: u32,
    n: usize,
) -> Vec<f64> {
    let e1 = fd_eigenvalues(lambda, k, p, l_max, n);
    let e2 = fd_eigenvalues(lambda, k, p, l_max, 2 * n);
    let e4 = fd_eigenvalues(lambda, k, p, l_max, 4 * n);
    (0..l_max as usize)
        .map(|i| {
            let d1 = e1[i] - e2[i];
            let d2 = e2[i] - e4[i];
            if d2.abs() < 1e-15 || d1 / d2 <= 1.0 {
                return e4[i];
            }
            let ratio = d1 / d2; // ~2^p
            e4[i] + d2 / (ratio - 1.0)
        })
        .collect()
}

/// Partial sums of 1/mu_kl up to L, their log-slope, and the small-l fit of
/// the growth-window constants.
#[derive(Debug, Clone)]
pub struct MuntzCertificate {
    pub k: f64,
    pub lambda: f64,
    /// (L, sum_{l<=L} 1/mu_kl) at the requested checkpoints.
    pub partial_sums: Vec<(u32, f64)>,
    /// Slope of partial sum against ln L over the checkpoint range.
    pub log_slope: f64,
    /// Eigenvalues used (FD path).
    pub eigenvalues: Vec<f64>,
}

/// Certify the Muentz divergence of sum 1/mu_kl: partial sums grow like a
/// positive multiple of log L. Eigenvalues come from the banded FD path so
/// the certificate scales to large l.
pub fn muntz_certificate(
    lambda: f64,
    k: f64,
    big_l: u32,
    p: &BlackHoleParams,
) -> Result<MuntzCertificate> {
    if big_l < 10 {
        return Err(Error::Domain("certificate needs L >= 10".into()));
    }
    let n = (24 * big_l as usize).max(6000);
    let mus = fd_eigenvalues(lambda, k, p, big_l, n);
    let mut partial_sums = Vec::new();
    let mut sum = 0.0;
    let mut checkpoints: Vec<u32> = (1..=8).map(|j| big_l * j / 8).filter(|&v| v >= 4).collect();
    checkpoints.dedup();
    let mut ci = 0;
    for (i, m) in mus.iter().enumerate() {
        sum += 1.0 / m;
        let l = (i + 1) as u32;
        if ci < checkpoints.len() && l == checkpoints[ci] {
            partial_sums.push((l, sum));
            ci += 1;
        }
    }
    let xs: Vec<f64> = partial_sums.iter().map(|(l, _)| (*l as f64).ln()).collect();
    let ys: Vec<f64> = partial_sums.iter().map(|(_, s)| *s).collect();
    let fit = crate::numerics::fit_line(&xs, &ys);
    Ok(MuntzCertificate {
        k,
        lambda,
        partial_sums,
        log_slope: fit.slope,
        eigenvalues: mus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_params() -> BlackHoleParams {
        BlackHoleParams::new(1.0, 0.2, 0.2, 0.02, 0.5)
    }

    /// Parameters that zero out the angular tilt: the operator reduces to
    /// the spherical Dirac restriction with spectrum |k| - 1/2 + l.
    fn round_sphere() -> BlackHoleParams {
        BlackHoleParams::new(1.0, 0.2, 0.0, 0.02, 0.5)
    }

    #[test]
    fn frobenius_low_order_coefficients() {
        let p = sample_params();
        let k = 0.5;
        let mu = 1.3;
        let lambda = 0.3;
        let s = frobenius_series(lambda, k, mu, &p, 4);
        let zeta = p.zeta();
        // v0 = (0, 1)
        assert_eq!(s.coeffs[0], [0.0, 1.0]);
        // v1 = (mu/((2k+1) sqrt(1+zeta)), 0) in the real form.
        let v1 = mu / ((2.0 * k + 1.0) * (1.0 + zeta).sqrt());
        assert!((s.coeffs[1][0] - v1).abs() < 1e-14);
        assert!(s.coeffs[1][1].abs() < 1e-14);
        // Second component of v2 from the closed form.
        let v22 = 0.5
            * (k / 6.0 + zeta / (2.0 * (1.0 + zeta))
                + (zeta * k - p.spin * lambda) / (1.0 + zeta)
                - mu * mu / ((2.0 * k + 1.0) * (1.0 + zeta)));
        assert!(
            (s.coeffs[2][1] - v22).abs() < 1e-13,
            "v2 = {:?} vs {v22}",
            s.coeffs[2]
        );
        assert!(s.coeffs[2][0].abs() < 1e-14);
    }

    #[test]
    fn round_sphere_spectrum_is_exact() {
        let p = round_sphere();
        for &k in &[0.5f64, 1.5] {
            let mus = angular_eigenvalues(0.0, k, 3, &p).unwrap();
            for (i, mu) in mus.iter().enumerate() {
                let exact = k.abs() - 0.5 + (i + 1) as f64;
                assert!(
                    (mu - exact).abs() < 1e-8,
                    "k={k}, l={}: mu={mu} vs {exact}",
                    i + 1
                );
            }
        }
    }

    #[test]
    fn eigenvalues_sit_in_growth_window() {
        let p = sample_params();
        let lambda = 0.3;
        let xi = p.spin * lambda;
        let mus = angular_eigenvalues(lambda, 0.5, 4, &p).unwrap();
        for (i, mu) in mus.iter().enumerate() {
            let (lo, hi) = growth_window(0.5, (i + 1) as u32, xi);
            assert!(*mu >= lo && *mu <= hi, "mu_{} = {mu} outside [{lo}, {hi}]", i + 1);
        }
    }

    #[test]
    fn eigenfunction_normalised_with_small_residual() {
        let p = sample_params();
        let lambda = 0.3;
        let k = 0.5;
        let mus = angular_eigenvalues(lambda, k, 2, &p).unwrap();
        let pair = angular_eigenfunction(lambda, k, 1, mus[0], &p).unwrap();
        let h = pair.theta[1] - pair.theta[0];
        let dens: Vec<f64> = pair
            .u1
            .iter()
            .zip(&pair.u2)
            .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
            .collect();
        let norm = cumulative_integral(h, &dens).last().copied().unwrap();
        assert!((norm - 1.0).abs() < 1e-8, "norm^2 = {norm}");
        assert!(pair.residual < 1e-6, "residual {}", pair.residual);
        // Positive u2 near the pole.
        assert!(pair.u2[4].re > 0.0);
    }

    #[test]
    fn negative_k_uses_mirror_exponent() {
        let p = sample_params();
        let s = frobenius_series(0.3, -0.5, 1.1, &p, 4);
        assert_eq!(s.coeffs[0], [1.0, 0.0]);
        assert_eq!(s.exponent, 0.5);
        let mus = angular_eigenvalues(0.3, -0.5, 2, &p).unwrap();
        assert!(mus[0] > 0.0 && mus[1] > mus[0]);
    }

    #[test]
    fn fd_oracle_close_on_round_sphere() {
        let p = round_sphere();
        let mus = fd_eigenvalues_richardson(0.0, 0.5, &p, 3, 500);
        for (i, mu) in mus.iter().enumerate() {
            let exact = (i + 1) as f64;
            assert!(
                (mu - exact).abs() < 2e-5,
                "fd mu_{} = {mu} vs {exact}",
                i + 1
            );
        }
    }
}
