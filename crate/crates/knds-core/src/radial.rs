//! Jost/Faddeev solutions of the one-dimensional radial Dirac system, the
//! transfer matrix A_L(lambda, k, z), and the scattering coefficients in
//! both normalisations, for real and complex coupling z.
//!
//! Two independent computation paths are maintained by design: the Volterra
//! series of iterated double integrals (valid for |z| A below the series
//! cap) and direct ODE integration of the Jost systems with an explicit
//! exponential renormalisation e^{rho (A - X)} factored out (the large-z
//! workhorse). The two must agree on their overlap; tests enforce it.

use num_complex::Complex64;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::geometry::RadialProfile;
use crate::numerics::{cumulative_integral, Dopri5};

type C = Complex64;

/// Coupling cap of the series path: cosh(30) stays comfortably inside f64.
pub const SERIES_CAP: f64 = 30.0;

/// Row-major 2x2 complex matrix [a, b; c, d].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [C; 4]);

impl Mat2 {
    pub fn identity() -> Self {
        Mat2([C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(1.0, 0.0)])
    }

    pub fn det(&self) -> C {
        self.0[0] * self.0[3] - self.0[1] * self.0[2]
    }

    /// Adjugate: adj(M) M = det(M) I.
    pub fn adj(&self) -> Mat2 {
        Mat2([self.0[3], -self.0[1], -self.0[2], self.0[0]])
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &o.0;
        Mat2([
            a[0] * b[0] + a[1] * b[2],
            a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3],
        ])
    }

    /// e^{i Gamma^1 lambda x} = diag(e^{i lambda x}, e^{-i lambda x}).
    pub fn free_phase(lambda: f64, x: f64) -> Mat2 {
        Mat2([
            C::from_polar(1.0, lambda * x),
            C::new(0.0, 0.0),
            C::new(0.0, 0.0),
            C::from_polar(1.0, -lambda * x),
        ])
    }

    pub fn scale(&self, s: C) -> Mat2 {
        Mat2([self.0[0] * s, self.0[1] * s, self.0[2] * s, self.0[3] * s])
    }

    pub fn max_norm(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, v| m.max(v.norm()))
    }
}

/// Transfer matrix entries with an explicit scalar exponent factored out:
/// a_Lj = m[j] * exp(log_scale).
#[derive(Debug, Clone, Copy)]
pub struct AlMatrix {
    pub m: Mat2,
    pub log_scale: f64,
}

impl AlMatrix {
    /// a_Lj as a plain complex number (may overflow for extreme z;
    /// use [`AlMatrix::log_abs`] in that regime).
    pub fn entry(&self, j: usize) -> C {
        self.m.0[j] * self.log_scale.exp()
    }

    /// ln |a_Lj|.
    pub fn log_abs(&self, j: usize) -> f64 {
        self.m.0[j].norm().ln() + self.log_scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JostMethod {
    Series,
    Ode,
}

impl std::fmt::Display for JostMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            JostMethod::Series => write!(f, "series"),
            JostMethod::Ode => write!(f, "ode"),
        }
    }
}

/// Sampled Faddeev matrices and the transfer matrix for one (lambda, k, z).
///
/// Samples are renormalised: M_L(x[i]) = ml[i] * exp(ml_log[i]) and
/// similarly on the right. The series path carries zero log-scales.
#[derive(Debug, Clone)]
pub struct JostData {
    pub lambda: f64,
    pub k: f64,
    pub z: C,
    pub method: JostMethod,
    pub x: Vec<f64>,
    pub ml: Vec<Mat2>,
    pub ml_log: Vec<f64>,
    pub mr: Vec<Mat2>,
    pub mr_log: Vec<f64>,
    pub a_total: f64,
    pub al: AlMatrix,
}

impl JostData {
    /// det F_L at sample i (equals det M_L; the free phase is unimodular).
    pub fn det_fl(&self, i: usize) -> C {
        self.ml[i].det() * (2.0 * self.ml_log[i]).exp()
    }

    pub fn det_fr(&self, i: usize) -> C {
        self.mr[i].det() * (2.0 * self.mr_log[i]).exp()
    }

    /// F_L at sample i.
    pub fn f_left(&self, i: usize) -> Mat2 {
        self.ml[i]
            .mul(&Mat2::free_phase(self.lambda, self.x[i]))
            .scale(C::new(self.ml_log[i].exp(), 0.0))
    }

    pub fn f_right(&self, i: usize) -> Mat2 {
        self.mr[i]
            .mul(&Mat2::free_phase(self.lambda, self.x[i]))
            .scale(C::new(self.mr_log[i].exp(), 0.0))
    }
}

// ---------------------------------------------------------------------------
// Volterra series path
// ---------------------------------------------------------------------------

/// Scalar coefficient series of the transfer-matrix entries:
///   a_L1 = 1 - i sum_n c1[n] z^{2n+2}     a_L2 = -i sum_n c2[n] z^{2n+1}
///   a_L3 =  i sum_n c3[n] z^{2n+1}        a_L4 = 1 + i sum_n c4[n] z^{2n+2}
/// Built once per (profile, lambda); evaluation at any z inside the cap is
/// then a short polynomial sum.
#[derive(Debug, Clone)]
pub struct AlSeries {
    pub lambda: f64,
    pub a_total: f64,
    pub c1: Vec<C>,
    pub c2: Vec<C>,
    pub c3: Vec<C>,
    pub c4: Vec<C>,
}

struct LeftIterates {
    m1: Vec<C>,
    m2: Vec<C>,
    m3: Vec<C>,
    m4: Vec<C>,
}

struct SeriesContext<'a> {
    profile: &'a RadialProfile,
    /// e^{2 i lambda x_i}
    e_plus: Vec<C>,
    /// e^{-2 i lambda x_i}
    e_minus: Vec<C>,
}

impl<'a> SeriesContext<'a> {
    fn new(profile: &'a RadialProfile, lambda: f64) -> Self {
        let e_plus: Vec<C> = profile.x.iter().map(|&x| C::from_polar(1.0, 2.0 * lambda * x)).collect();
        let e_minus: Vec<C> = e_plus.iter().map(|v| v.conj()).collect();
        SeriesContext { profile, e_plus, e_minus }
    }

    fn n(&self) -> usize {
        self.profile.n()
    }

    /// Cumulative-from-the-right integral: out[i] = int_{x_i}^{x_max} f.
    fn cum_right(&self, f: &[C]) -> Vec<C> {
        let cum = cumulative_integral(self.profile.h, f);
        let total = *cum.last().unwrap();
        cum.into_iter().map(|v| total - v).collect()
    }

    /// Cumulative-from-the-left integral: out[i] = int_{x_min}^{x_i} f.
    fn cum_left(&self, f: &[C]) -> Vec<C> {
        cumulative_integral(self.profile.h, f)
    }

    fn full_integral(&self, f: &[C]) -> C {
        *cumulative_integral(self.profile.h, f).last().unwrap()
    }

    fn left_seed(&self) -> LeftIterates {
        let n = self.n();
        let q = &self.profile.q;
        let ones = vec![C::new(1.0, 0.0); n];
        // m_L2^0 = -i e^{2 i lambda x} int_x^inf e^{-2 i lambda y} q(y) dy
        let f2: Vec<C> = (0..n).map(|i| self.e_minus[i] * q[i]).collect();
        let m2: Vec<C> = self
            .cum_right(&f2)
            .iter()
            .enumerate()
            .map(|(i, v)| -C::i() * self.e_plus[i] * v)
            .collect();
        // m_L3^0 = +i e^{-2 i lambda x} int_x^inf e^{2 i lambda y} conj(q) dy
        let f3: Vec<C> = (0..n).map(|i| self.e_plus[i] * q[i].conj()).collect();
        let m3: Vec<C> = self
            .cum_right(&f3)
            .iter()
            .enumerate()
            .map(|(i, v)| C::i() * self.e_minus[i] * v)
            .collect();
        LeftIterates {
            m1: ones.clone(),
            m2,
            m3,
            m4: ones,
        }
    }

    fn left_step(&self, prev: &LeftIterates) -> LeftIterates {
        let n = self.n();
        let q = &self.profile.q;
        // m1: inner e^{2 i lambda t} conj(q) m1; outer e^{-2 i lambda y} q.
        let inner1: Vec<C> = (0..n).map(|i| self.e_plus[i] * q[i].conj() * prev.m1[i]).collect();
        let h1 = self.cum_right(&inner1);
        let outer1: Vec<C> = (0..n).map(|i| self.e_minus[i] * q[i] * h1[i]).collect();
        let m1 = self.cum_right(&outer1);
        // m2: inner conj(q) m2; outer e^{-2 i lambda y} q, prefactor e^{2 i lambda x}.
        let inner2: Vec<C> = (0..n).map(|i| q[i].conj() * prev.m2[i]).collect();
        let h2 = self.cum_right(&inner2);
        let outer2: Vec<C> = (0..n).map(|i| self.e_minus[i] * q[i] * h2[i]).collect();
        let m2: Vec<C> = self
            .cum_right(&outer2)
            .iter()
            .enumerate()
            .map(|(i, v)| self.e_plus[i] * v)
            .collect();
        // m3: mirror of m2 with q <-> conj(q), phases conjugated.
        let inner3: Vec<C> = (0..n).map(|i| q[i] * prev.m3[i]).collect();
        let h3 = self.cum_right(&inner3);
        let outer3: Vec<C> = (0..n).map(|i| self.e_plus[i] * q[i].conj() * h3[i]).collect();
        let m3: Vec<C> = self
            .cum_right(&outer3)
            .iter()
            .enumerate()
            .map(|(i, v)| self.e_minus[i] * v)
            .collect();
        // m4: inner e^{-2 i lambda t} q m4; outer e^{2 i lambda y} conj(q).
        let inner4: Vec<C> = (0..n).map(|i| self.e_minus[i] * q[i] * prev.m4[i]).collect();
        let h4 = self.cum_right(&inner4);
        let outer4: Vec<C> = (0..n).map(|i| self.e_plus[i] * q[i].conj() * h4[i]).collect();
        let m4 = self.cum_right(&outer4);
        LeftIterates { m1, m2, m3, m4 }
    }

    /// Scalar transfer-matrix coefficient integrals of the current iterate.
    fn al_coeffs(&self, it: &LeftIterates) -> (C, C, C, C) {
        let n = self.n();
        let q = &self.profile.q;
        let f1: Vec<C> = (0..n).map(|i| q[i] * it.m3[i]).collect();
        let f2: Vec<C> = (0..n).map(|i| self.e_minus[i] * q[i] * it.m4[i]).collect();
        let f3: Vec<C> = (0..n).map(|i| self.e_plus[i] * q[i].conj() * it.m1[i]).collect();
        let f4: Vec<C> = (0..n).map(|i| q[i].conj() * it.m2[i]).collect();
        (
            self.full_integral(&f1),
            self.full_integral(&f2),
            self.full_integral(&f3),
            self.full_integral(&f4),
        )
    }
}

/// Number of series terms needed so the cosh/sinh tail bound drops below
/// `tol` relative to cosh(za_cap).
fn series_terms_needed(za_cap: f64, tol: f64) -> usize {
    let target = tol * za_cap.cosh().max(1.0);
    let mut term = 1.0f64;
    let mut m = 0usize;
    while term > target && m < 400 {
        m += 2;
        term *= za_cap * za_cap / ((m - 1) as f64 * m as f64);
    }
    m / 2 + 1
}

impl AlSeries {
    /// Iterate the Volterra recursion far enough for any |z| A <= cap.
    pub fn build(profile: &RadialProfile, lambda: f64) -> Self {
        Self::build_truncated(profile, lambda, series_terms_needed(SERIES_CAP, 1e-17))
    }

    /// Only the first `n_terms` coefficients; enough for small-z work such
    /// as the z-derivative at the origin.
    pub fn build_truncated(profile: &RadialProfile, lambda: f64, n_terms: usize) -> Self {
        let ctx = SeriesContext::new(profile, lambda);
        let mut c1 = Vec::with_capacity(n_terms);
        let mut c2 = Vec::with_capacity(n_terms);
        let mut c3 = Vec::with_capacity(n_terms);
        let mut c4 = Vec::with_capacity(n_terms);
        let mut it = ctx.left_seed();
        for n in 0..n_terms {
            let (a1, a2, a3, a4) = ctx.al_coeffs(&it);
            c1.push(a1);
            c2.push(a2);
            c3.push(a3);
            c4.push(a4);
            if n + 1 < n_terms {
                it = ctx.left_step(&it);
            }
        }
        AlSeries {
            lambda,
            a_total: profile.a_total,
            c1,
            c2,
            c3,
            c4,
        }
    }

    /// Evaluate A_L(z); refuses above the series cap.
    pub fn eval(&self, z: C) -> Result<AlMatrix> {
        let za = z.norm() * self.a_total;
        if za > SERIES_CAP {
            return Err(Error::SeriesCap {
                za,
                cap: SERIES_CAP,
            });
        }
        let z2 = z * z;
        let mut a1 = C::new(0.0, 0.0);
        let mut a2 = C::new(0.0, 0.0);
        let mut a3 = C::new(0.0, 0.0);
        let mut a4 = C::new(0.0, 0.0);
        let mut zp = z; // z^{2n+1}
        for n in 0..self.c1.len() {
            a2 += self.c2[n] * zp;
            a3 += self.c3[n] * zp;
            let zp2 = zp * z; // z^{2n+2}
            a1 += self.c1[n] * zp2;
            a4 += self.c4[n] * zp2;
            zp *= z2;
        }
        let i = C::i();
        Ok(AlMatrix {
            m: Mat2([
                C::new(1.0, 0.0) - i * a1,
                -i * a2,
                i * a3,
                C::new(1.0, 0.0) + i * a4,
            ]),
            log_scale: 0.0,
        })
    }

    /// d a_L2 / dz at z = 0 (the first Volterra moment).
    pub fn al2_derivative_at_zero(&self) -> C {
        -C::i() * self.c2[0]
    }
}

/// Coefficients of a_L2 = -i sum_n c2[n] z^{2n+1} alone: only the m_L4
/// iterates feed a_L2, so small-z reflection data over dense lambda grids
/// comes at a quarter of the full series cost.
pub fn al2_series_coefficients(profile: &RadialProfile, lambda: f64, n_terms: usize) -> Vec<C> {
    let ctx = SeriesContext::new(profile, lambda);
    let n = ctx.n();
    let q = &profile.q;
    let mut m4: Vec<C> = vec![C::new(1.0, 0.0); n];
    let mut out = Vec::with_capacity(n_terms);
    for t in 0..n_terms {
        let f2: Vec<C> = (0..n).map(|i| ctx.e_minus[i] * q[i] * m4[i]).collect();
        out.push(ctx.full_integral(&f2));
        if t + 1 < n_terms {
            // m_L4 step: inner e^{-2 i lambda t} q m4, outer e^{2 i lambda} conj(q).
            let h4 = ctx.cum_right(&f2);
            let outer: Vec<C> = (0..n).map(|i| ctx.e_plus[i] * q[i].conj() * h4[i]).collect();
            m4 = ctx.cum_right(&outer);
        }
    }
    out
}

/// Evaluate a_L2(z) from coefficients produced by
/// [`al2_series_coefficients`].
pub fn al2_from_coefficients(coeffs: &[C], z: C) -> C {
    let z2 = z * z;
    let mut zp = z;
    let mut acc = C::new(0.0, 0.0);
    for c in coeffs {
        acc += c * zp;
        zp *= z2;
    }
    -C::i() * acc
}

/// Faddeev/Jost data by the Volterra series, sampled on the profile grid.
///
/// `n_terms` caps the iteration count; the tail bound
/// (|z| A)^{2n} / (2n)! must fall below `tol` within the cap or the
/// computation refuses with a configuration error.
pub fn faddeev_series(
    profile: &RadialProfile,
    lambda: f64,
    z: C,
    n_terms: usize,
    tol: f64,
) -> Result<JostData> {
    let za = z.norm() * profile.a_total;
    if za > SERIES_CAP {
        return Err(Error::SeriesCap {
            za,
            cap: SERIES_CAP,
        });
    }
    let needed = series_terms_needed(za.max(1e-6), tol);
    if needed > n_terms {
        return Err(Error::Config(format!(
            "series needs {needed} terms for |z|A = {za:.2} at tol {tol:.1e}, capped at {n_terms}"
        )));
    }
    let ctx = SeriesContext::new(profile, lambda);
    let n = ctx.n();
    let mut it = ctx.left_seed();
    // Mirror iterates on the right side.
    let seed_r = right_seed(&ctx);
    let mut it_r = seed_r;

    let z2 = z * z;
    let mut ml: Vec<Mat2> = (0..n).map(|_| Mat2::identity()).collect();
    let mut mr: Vec<Mat2> = (0..n).map(|_| Mat2::identity()).collect();
    // Seed sums: even entries start at 1 (n = 0 iterate), odd entries at z^1.
    for i in 0..n {
        ml[i] = Mat2([C::new(1.0, 0.0), it.m2[i] * z, it.m3[i] * z, C::new(1.0, 0.0)]);
        mr[i] = Mat2([
            C::new(1.0, 0.0),
            it_r.m2[i] * z,
            it_r.m3[i] * z,
            C::new(1.0, 0.0),
        ]);
    }
    let mut zp_even = z2; // z^{2n} for n >= 1
    let mut zp_odd = z * z2; // z^{2n+1} for n >= 1
    for _ in 1..needed {
        it = ctx.left_step(&it);
        it_r = right_step(&ctx, &it_r);
        for i in 0..n {
            ml[i].0[0] += it.m1[i] * zp_even;
            ml[i].0[3] += it.m4[i] * zp_even;
            ml[i].0[1] += it.m2[i] * zp_odd;
            ml[i].0[2] += it.m3[i] * zp_odd;
            mr[i].0[0] += it_r.m1[i] * zp_even;
            mr[i].0[3] += it_r.m4[i] * zp_even;
            mr[i].0[1] += it_r.m2[i] * zp_odd;
            mr[i].0[2] += it_r.m3[i] * zp_odd;
        }
        zp_even *= z2;
        zp_odd *= z2;
    }
    let data = JostData {
        lambda,
        k: profile.k,
        z,
        method: JostMethod::Series,
        x: profile.x.clone(),
        ml,
        ml_log: vec![0.0; n],
        mr,
        mr_log: vec![0.0; n],
        a_total: profile.a_total,
        al: AlMatrix {
            m: Mat2::identity(),
            log_scale: 0.0,
        },
    };
    let al = al_matrix(profile, &data)?;
    Ok(JostData { al, ..data })
}

fn right_seed(ctx: &SeriesContext) -> LeftIterates {
    let n = ctx.n();
    let q = &ctx.profile.q;
    let ones = vec![C::new(1.0, 0.0); n];
    // m_R2^0 = +i e^{2 i lambda x} int_{-inf}^x e^{-2 i lambda y} q(y) dy
    let f2: Vec<C> = (0..n).map(|i| ctx.e_minus[i] * q[i]).collect();
    let m2: Vec<C> = ctx
        .cum_left(&f2)
        .iter()
        .enumerate()
        .map(|(i, v)| C::i() * ctx.e_plus[i] * v)
        .collect();
    // m_R3^0 = -i e^{-2 i lambda x} int_{-inf}^x e^{2 i lambda y} conj(q) dy
    let f3: Vec<C> = (0..n).map(|i| ctx.e_plus[i] * q[i].conj()).collect();
    let m3: Vec<C> = ctx
        .cum_left(&f3)
        .iter()
        .enumerate()
        .map(|(i, v)| -C::i() * ctx.e_minus[i] * v)
        .collect();
    LeftIterates {
        m1: ones.clone(),
        m2,
        m3,
        m4: ones,
    }
}

fn right_step(ctx: &SeriesContext, prev: &LeftIterates) -> LeftIterates {
    let n = ctx.n();
    let q = &ctx.profile.q;
    // m_R1: kernel e^{-2 i lambda (y - t)} q(y) conj(q)(t).
    let inner1: Vec<C> = (0..n).map(|i| ctx.e_plus[i] * q[i].conj() * prev.m1[i]).collect();
    let h1 = ctx.cum_left(&inner1);
    let outer1: Vec<C> = (0..n).map(|i| ctx.e_minus[i] * q[i] * h1[i]).collect();
    let m1 = ctx.cum_left(&outer1);
    // m_R2: prefactor e^{2 i lambda x}.
    let inner2: Vec<C> = (0..n).map(|i| q[i].conj() * prev.m2[i]).collect();
    let h2 = ctx.cum_left(&inner2);
    let outer2: Vec<C> = (0..n).map(|i| ctx.e_minus[i] * q[i] * h2[i]).collect();
    let m2: Vec<C> = ctx
        .cum_left(&outer2)
        .iter()
        .enumerate()
        .map(|(i, v)| ctx.e_plus[i] * v)
        .collect();
    let inner3: Vec<C> = (0..n).map(|i| q[i] * prev.m3[i]).collect();
    let h3 = ctx.cum_left(&inner3);
    let outer3: Vec<C> = (0..n).map(|i| ctx.e_plus[i] * q[i].conj() * h3[i]).collect();
    let m3: Vec<C> = ctx
        .cum_left(&outer3)
        .iter()
        .enumerate()
        .map(|(i, v)| ctx.e_minus[i] * v)
        .collect();
    let inner4: Vec<C> = (0..n).map(|i| ctx.e_minus[i] * q[i] * prev.m4[i]).collect();
    let h4 = ctx.cum_left(&inner4);
    let outer4: Vec<C> = (0..n).map(|i| ctx.e_plus[i] * q[i].conj() * h4[i]).collect();
    let m4 = ctx.cum_left(&outer4);
    LeftIterates { m1, m2, m3, m4 }
}

// ---------------------------------------------------------------------------
// ODE path
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct JostOpts {
    pub rtol: f64,
    /// Keep every `stride`-th profile node in the sampled output.
    pub stride: usize,
}

impl Default for JostOpts {
    fn default() -> Self {
        JostOpts {
            rtol: 1e-12,
            stride: 64,
        }
    }
}

/// Pack the two columns of a 2x2 complex matrix into a real state.
fn pack(m: &Mat2) -> [f64; 8] {
    [
        m.0[0].re, m.0[0].im, m.0[2].re, m.0[2].im, // column 1
        m.0[1].re, m.0[1].im, m.0[3].re, m.0[3].im, // column 2
    ]
}

fn unpack(y: &[f64; 8]) -> Mat2 {
    Mat2([
        C::new(y[0], y[1]),
        C::new(y[4], y[5]),
        C::new(y[2], y[3]),
        C::new(y[6], y[7]),
    ])
}

/// RHS of the renormalised Faddeev system. With M = F e^{-i Gamma^1 lambda x}
/// the free oscillation enters only through the commutator,
///   M' = i lambda (Gamma^1 M - M Gamma^1) + i z Gamma^1 V M + sgn rho a M,
/// which keeps the diagonal entries free of trivial phase accumulation
/// (and makes z = 0 exact). sgn = +1 renormalises the left solution
/// (envelope e^{rho (A - X)}), sgn = -1 the right one (e^{rho X}).
struct JostRhs<'a> {
    profile: &'a RadialProfile,
    lambda: f64,
    z: C,
    rho: f64,
    sgn: f64,
}

impl<'a> JostRhs<'a> {
    fn eval(&self, x: f64, y: &[f64; 8]) -> [f64; 8] {
        let (a, _, cc) = self.profile.eval(x);
        let q = C::from_polar(a, 2.0 * cc);
        let two_il = C::new(0.0, 2.0 * self.lambda);
        let izq = C::i() * self.z * q;
        let izqc = C::i() * self.z * q.conj();
        let damp = self.sgn * self.rho * a;
        let m1 = C::new(y[0], y[1]);
        let m3 = C::new(y[2], y[3]);
        let m2 = C::new(y[4], y[5]);
        let m4 = C::new(y[6], y[7]);
        let d1 = izq * m3 + damp * m1;
        let d3 = -two_il * m3 - izqc * m1 + damp * m3;
        let d2 = two_il * m2 + izq * m4 + damp * m2;
        let d4 = -izqc * m2 + damp * m4;
        [d1.re, d1.im, d3.re, d3.im, d2.re, d2.im, d4.re, d4.im]
    }
}

/// Jost solutions by direct integration of the radial system
/// Gamma^1 D_x psi = (lambda + z V_k) psi from both ends, with the scalar
/// envelope e^{rho sigma} factored out (rho = |Re z|) to avoid overflow.
pub fn jost_from_ode(profile: &RadialProfile, lambda: f64, z: C) -> Result<JostData> {
    jost_from_ode_opts(profile, lambda, z, &JostOpts::default())
}

pub fn jost_from_ode_opts(
    profile: &RadialProfile,
    lambda: f64,
    z: C,
    opts: &JostOpts,
) -> Result<JostData> {
    if profile.a[0] > 1e-11 || profile.a[profile.n() - 1] > 1e-11 {
        return Err(Error::Config(
            "profile tails too fat for Jost asymptotics (need a < 1e-11 at both ends)".into(),
        ));
    }
    let rho = z.re.abs();
    let n = profile.n();
    let stride = opts.stride.max(1);
    let idx: Vec<usize> = {
        let mut v: Vec<usize> = (0..n).step_by(stride).collect();
        if *v.last().unwrap() != n - 1 {
            v.push(n - 1);
        }
        v
    };
    let xs: Vec<f64> = idx.iter().map(|&i| profile.x[i]).collect();
    let lx = profile.liouville_x();

    let ode = Dopri5::<8> {
        rtol: opts.rtol,
        atol: 1e-280,
        max_steps: 50_000_000,
    };

    // Left Faddeev matrix: integrate from x_max down with the growing
    // envelope e^{rho (A - X)} factored out.
    let rhs_l = JostRhs {
        profile,
        lambda,
        z,
        rho,
        sgn: 1.0,
    };
    let x_max = profile.x_max();
    let wl0 = Mat2::identity().scale(C::new((-rho * profile.tail_right).exp(), 0.0));
    let mut ml: Vec<Mat2> = vec![Mat2::identity(); idx.len()];
    let rev_xs: Vec<f64> = xs.iter().rev().copied().collect();
    ode.solve_sampled(
        |x, y| rhs_l.eval(x, y),
        x_max,
        profile.x_min(),
        pack(&wl0),
        &rev_xs,
        |j, y| {
            ml[idx.len() - 1 - j] = unpack(y);
        },
    )?;

    // Right Faddeev matrix: integrate from x_min up, envelope e^{rho X}.
    let rhs_r = JostRhs {
        profile,
        lambda,
        z,
        rho,
        sgn: -1.0,
    };
    let x_min = profile.x_min();
    let vr0 = Mat2::identity().scale(C::new((-rho * profile.tail_left).exp(), 0.0));
    let mut mr: Vec<Mat2> = vec![Mat2::identity(); idx.len()];
    ode.solve_sampled(
        |x, y| rhs_r.eval(x, y),
        x_min,
        x_max,
        pack(&vr0),
        &xs,
        |j, y| {
            mr[j] = unpack(y);
        },
    )?;

    let mut ml_log = Vec::with_capacity(idx.len());
    let mut mr_log = Vec::with_capacity(idx.len());
    for &i in idx.iter() {
        ml_log.push(rho * (profile.a_total - lx[i]));
        mr_log.push(rho * lx[i]);
    }

    let data = JostData {
        lambda,
        k: profile.k,
        z,
        method: JostMethod::Ode,
        x: xs,
        ml,
        ml_log,
        mr,
        mr_log,
        a_total: profile.a_total,
        al: AlMatrix {
            m: Mat2::identity(),
            log_scale: 0.0,
        },
    };
    let al = al_matrix(profile, &data)?;
    Ok(JostData { al, ..data })
}

/// Transfer matrix from Faddeev data. Series data integrates the closed
/// representation of the entries; ODE data solves F_L = F_R A_L at an
/// interior sample (the one nearest the Liouville midpoint).
pub fn al_matrix(profile: &RadialProfile, jost: &JostData) -> Result<AlMatrix> {
    match jost.method {
        JostMethod::Series => {
            let ctx = SeriesContext::new(profile, jost.lambda);
            let n = profile.n();
            if jost.ml.len() != n {
                return Err(Error::Config(
                    "series Jost data must be sampled on the full profile grid".into(),
                ));
            }
            let z = jost.z;
            let q = &profile.q;
            let f1: Vec<C> = (0..n).map(|i| q[i] * jost.ml[i].0[2]).collect();
            let f2: Vec<C> = (0..n).map(|i| ctx.e_minus[i] * q[i] * jost.ml[i].0[3]).collect();
            let f3: Vec<C> = (0..n)
                .map(|i| ctx.e_plus[i] * q[i].conj() * jost.ml[i].0[0])
                .collect();
            let f4: Vec<C> = (0..n).map(|i| q[i].conj() * jost.ml[i].0[1]).collect();
            let i = C::i();
            Ok(AlMatrix {
                m: Mat2([
                    C::new(1.0, 0.0) - i * z * ctx.full_integral(&f1),
                    -i * z * ctx.full_integral(&f2),
                    i * z * ctx.full_integral(&f3),
                    C::new(1.0, 0.0) + i * z * ctx.full_integral(&f4),
                ]),
                log_scale: 0.0,
            })
        }
        JostMethod::Ode => {
            // Pick the sample nearest X = A/2 so both renormalised factors
            // are O(1) there.
            let lx = profile.liouville_x();
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (j, &xj) in jost.x.iter().enumerate() {
                let i = ((xj - profile.x_min()) / profile.h).round() as usize;
                let d = (lx[i.min(lx.len() - 1)] - 0.5 * profile.a_total).abs();
                if d < best_d {
                    best_d = d;
                    best = j;
                }
            }
            let phase = Mat2::free_phase(jost.lambda, jost.x[best]);
            let fl = jost.ml[best].mul(&phase);
            let fr = jost.mr[best].mul(&phase);
            // A_L = adj(F_R) F_L; det F_R = 1 is enforced, not divided out,
            // since the numerical determinant of the renormalised factor
            // cancels below noise at large rho.
            Ok(AlMatrix {
                m: fr.adj().mul(&fl),
                log_scale: jost.ml_log[best] + jost.mr_log[best],
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Scattering coefficients
// ---------------------------------------------------------------------------

/// One triple of scattering coefficients (either normalisation).
#[derive(Debug, Clone, Copy)]
pub struct ScatteringTriple {
    pub t: C,
    pub r: C,
    pub l: C,
    /// ln |T|, valid even when T underflows.
    pub t_log_abs: f64,
}

/// A pole of the analytically continued transmission coefficient: data,
/// not a failure.
#[derive(Debug, Clone, Copy)]
pub struct PoleReport {
    pub z: C,
    pub residue: Option<C>,
}

#[derive(Debug, Clone, Copy)]
pub enum HatScattering {
    Coeffs(ScatteringTriple),
    Pole(PoleReport),
}

/// Unphysical (hat) coefficients from the transfer matrix:
/// T = 1/a_L1, R = -a_L2/a_L1, L = a_L3/a_L1.
pub fn scattering_hat(al: &AlMatrix, z: C) -> HatScattering {
    let a1 = al.m.0[0];
    if a1.norm() <= 1e-12 * al.m.max_norm() {
        return HatScattering::Pole(PoleReport { z, residue: None });
    }
    let t_log_abs = -al.log_scale - a1.norm().ln();
    let t = C::from_polar(t_log_abs.exp(), -a1.arg());
    HatScattering::Coeffs(ScatteringTriple {
        t,
        r: -al.m.0[1] / a1,
        l: al.m.0[2] / a1,
        t_log_abs,
    })
}

/// Physical coefficients from the hat ones:
/// T = e^{-i beta} T^, R = e^{-2i(beta + K)} R^, L = e^{2iK} L^.
pub fn scattering_physical(hat: &ScatteringTriple, beta_k: f64, k_phase: f64) -> ScatteringTriple {
    ScatteringTriple {
        t: hat.t * C::from_polar(1.0, -beta_k),
        r: hat.r * C::from_polar(1.0, -2.0 * (beta_k + k_phase)),
        l: hat.l * C::from_polar(1.0, 2.0 * k_phase),
        t_log_abs: hat.t_log_abs,
    }
}

/// (lambda, k, z) -> coefficients in both normalisations.
#[derive(Debug, Clone, Copy)]
pub struct ScatteringRecord {
    pub lambda: f64,
    pub k: f64,
    pub z: C,
    pub hat: ScatteringTriple,
    pub phys: ScatteringTriple,
    /// (c0, K) gauge under which the record was produced.
    pub gauge: (f64, f64),
    pub omega_minus: f64,
    pub omega_plus: f64,
    pub method: JostMethod,
}

#[derive(Debug, Clone, Copy)]
pub enum Scattered {
    Record(ScatteringRecord),
    Pole(PoleReport),
}

/// Apply the Regge-Wheeler translation x -> x + c to a record:
/// T -> e^{i c (Omega_+ - Omega_-)} T, R -> e^{-2 i c lambda^+} R,
/// L -> e^{2 i c lambda^-} L (hat entries transform with T unchanged).
/// The T phase is the one forced by unitarity (T conj(R) + L conj(T) = 0
/// must be preserved: the two terms need equal phase shifts, pinning
/// arg T -> arg T + c (lambda^- - lambda^+)).
pub fn rw_translation_covariance(record: &ScatteringRecord, c: f64) -> ScatteringRecord {
    let lam_plus = record.lambda - record.omega_plus;
    let lam_minus = record.lambda - record.omega_minus;
    let phys = ScatteringTriple {
        t: record.phys.t * C::from_polar(1.0, c * (record.omega_plus - record.omega_minus)),
        r: record.phys.r * C::from_polar(1.0, -2.0 * c * lam_plus),
        l: record.phys.l * C::from_polar(1.0, 2.0 * c * lam_minus),
        t_log_abs: record.phys.t_log_abs,
    };
    let hat = ScatteringTriple {
        t: record.hat.t,
        r: record.hat.r * C::from_polar(1.0, -2.0 * c * lam_plus),
        l: record.hat.l * C::from_polar(1.0, 2.0 * c * lam_minus),
        t_log_abs: record.hat.t_log_abs,
    };
    ScatteringRecord {
        hat,
        phys,
        gauge: (record.gauge.0 + c, record.gauge.1),
        ..*record
    }
}

/// Which Jost path to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathChoice {
    /// Series inside the cap, ODE beyond.
    Auto,
    Series,
    Ode,
}

/// Scattering evaluator for one (profile, lambda); caches the Volterra
/// coefficient series lazily and is safe to share across threads.
pub struct ScatteringEngine<'a> {
    pub profile: &'a RadialProfile,
    pub lambda: f64,
    series: OnceLock<AlSeries>,
    pub ode_opts: JostOpts,
}

impl<'a> ScatteringEngine<'a> {
    pub fn new(profile: &'a RadialProfile, lambda: f64) -> Self {
        ScatteringEngine {
            profile,
            lambda,
            series: OnceLock::new(),
            ode_opts: JostOpts::default(),
        }
    }

    pub fn al_series(&self, z: C) -> Result<AlMatrix> {
        self.series
            .get_or_init(|| AlSeries::build(self.profile, self.lambda))
            .eval(z)
    }

    pub fn series_ref(&self) -> &AlSeries {
        self.series
            .get_or_init(|| AlSeries::build(self.profile, self.lambda))
    }

    pub fn al_ode(&self, z: C) -> Result<AlMatrix> {
        // A_L only: no interior sampling needed beyond the matching point.
        let opts = JostOpts {
            stride: self.profile.n(),
            ..self.ode_opts
        };
        Ok(jost_from_ode_opts(self.profile, self.lambda, z, &opts)?.al)
    }

    pub fn al(&self, z: C, path: PathChoice) -> Result<AlMatrix> {
        match path {
            PathChoice::Series => self.al_series(z),
            PathChoice::Ode => self.al_ode(z),
            PathChoice::Auto => {
                if z.norm() * self.profile.a_total <= SERIES_CAP {
                    self.al_series(z)
                } else {
                    self.al_ode(z)
                }
            }
        }
    }

    /// Full record (hat + physical) at z, or a pole report.
    pub fn record(&self, z: C, path: PathChoice) -> Result<Scattered> {
        let al = self.al(z, path)?;
        match scattering_hat(&al, z) {
            HatScattering::Pole(mut p) => {
                p.residue = self.residue_estimate(z, path).ok();
                Ok(Scattered::Pole(p))
            }
            HatScattering::Coeffs(hat) => {
                let phys =
                    scattering_physical(&hat, self.profile.beta, self.profile.params.k_phase);
                Ok(Scattered::Record(ScatteringRecord {
                    lambda: self.lambda,
                    k: self.profile.k,
                    z,
                    hat,
                    phys,
                    gauge: (self.profile.params.c0, self.profile.params.k_phase),
                    omega_minus: self.profile.omega_minus,
                    omega_plus: self.profile.omega_plus,
                    method: if z.norm() * self.profile.a_total <= SERIES_CAP
                        && path != PathChoice::Ode
                    {
                        JostMethod::Series
                    } else {
                        JostMethod::Ode
                    },
                }))
            }
        }
    }

    /// Residue of 1/a_L1 at a simple zero: 1 / a_L1'(z0) by central
    /// differences in z.
    fn residue_estimate(&self, z0: C, path: PathChoice) -> Result<C> {
        let dz = 1e-5 * (1.0 + z0.norm());
        let ap = self.al(z0 + dz, path)?;
        let am = self.al(z0 - dz, path)?;
        let da = (ap.entry(0) - am.entry(0)) / (2.0 * dz);
        Ok(1.0 / da)
    }

    /// Record that must not be a pole (real z); errors otherwise.
    pub fn record_real(&self, z: f64, path: PathChoice) -> Result<ScatteringRecord> {
        match self.record(C::new(z, 0.0), path)? {
            Scattered::Record(r) => Ok(r),
            Scattered::Pole(p) => Err(Error::Numerical(format!(
                "unexpected transmission pole at real z = {}",
                p.z
            ))),
        }
    }
}

/// Physical reduced scattering matrix S_kl = [[T, R], [L, T]] at
/// z = mu_kl(lambda).
pub fn reduced_matrix(
    profile: &RadialProfile,
    lambda: f64,
    l: u32,
) -> Result<([[C; 2]; 2], f64)> {
    let mus = crate::angular::angular_eigenvalues(lambda, profile.k, l, &profile.params)?;
    let mu = mus[l as usize - 1];
    let engine = ScatteringEngine::new(profile, lambda);
    let rec = engine.record_real(mu, PathChoice::Auto)?;
    Ok((
        [
            [rec.phys.t, rec.phys.r],
            [rec.phys.l, rec.phys.t],
        ],
        mu,
    ))
}
