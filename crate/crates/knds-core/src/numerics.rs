//! Shared numerical kernels: adaptive Runge-Kutta integration, quadrature,
//! root finding, line fits and a banded symmetric inertia eigensolver.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dormand-Prince 5(4) Butcher tableau.
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
// b - bhat, including the k7 weight.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const C: [f64; 5] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0];

fn axpy<const N: usize>(y: &mut [f64; N], a: f64, x: &[f64; N]) {
    for i in 0..N {
        y[i] += a * x[i];
    }
}

/// Adaptive Dormand-Prince 5(4) integrator on fixed-size real states.
pub struct Dopri5<const N: usize> {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl<const N: usize> Default for Dopri5<N> {
    fn default() -> Self {
        Dopri5 {
            rtol: 1e-12,
            atol: 1e-14,
            max_steps: 50_000_000,
        }
    }
}

impl<const N: usize> Dopri5<N> {
    /// Integrate y' = f(x, y) from `x0` to `x1` (either direction).
    pub fn solve<F>(&self, f: F, x0: f64, x1: f64, y0: [f64; N]) -> Result<[f64; N]>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let mut f = f;
        let mut y = y0;
        let mut x = x0;
        self.advance(&mut f, &mut x, x1, &mut y, None)?;
        Ok(y)
    }

    /// Integrate while recording the state at every point of `samples`
    /// (must be ordered in the direction of integration and lie in
    /// [min(x0,x1), max(x0,x1)]).
    pub fn solve_sampled<F, R>(
        &self,
        f: F,
        x0: f64,
        x1: f64,
        y0: [f64; N],
        samples: &[f64],
        mut record: R,
    ) -> Result<[f64; N]>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
        R: FnMut(usize, &[f64; N]),
    {
        let mut f = f;
        let mut y = y0;
        let mut x = x0;
        for (i, &xs) in samples.iter().enumerate() {
            if (xs - x).abs() > 1e-14 * (1.0 + xs.abs()) {
                self.advance(&mut f, &mut x, xs, &mut y, None)?;
            }
            x = xs;
            record(i, &y);
        }
        if (x1 - x).abs() > 1e-14 * (1.0 + x1.abs()) {
            self.advance(&mut f, &mut x, x1, &mut y, None)?;
        }
        Ok(y)
    }

    fn advance<F>(
        &self,
        f: &mut F,
        x: &mut f64,
        x_end: f64,
        y: &mut [f64; N],
        mut h_init: Option<f64>,
    ) -> Result<()>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let dir = if x_end >= *x { 1.0 } else { -1.0 };
        let span = (x_end - *x).abs();
        if span == 0.0 {
            return Ok(());
        }
        let mut h = h_init.take().unwrap_or(span.min(1e-2)) * dir;
        let mut k1 = f(*x, y);
        let mut nsteps = 0usize;
        loop {
            nsteps += 1;
            if nsteps > self.max_steps {
                return Err(Error::Numerical(format!(
                    "integrator exceeded {} steps (step size underflow in stiff regime?)",
                    self.max_steps
                )));
            }
            if (x_end - *x).abs() <= 1e-300 {
                return Ok(());
            }
            if (h.abs()) > (x_end - *x).abs() {
                h = x_end - *x;
            }

            let mut y2 = *y;
            axpy(&mut y2, h * A2[0], &k1);
            let k2 = f(*x + C[0] * h, &y2);

            let mut y3 = *y;
            axpy(&mut y3, h * A3[0], &k1);
            axpy(&mut y3, h * A3[1], &k2);
            let k3 = f(*x + C[1] * h, &y3);

            let mut y4 = *y;
            axpy(&mut y4, h * A4[0], &k1);
            axpy(&mut y4, h * A4[1], &k2);
            axpy(&mut y4, h * A4[2], &k3);
            let k4 = f(*x + C[2] * h, &y4);

            let mut y5 = *y;
            axpy(&mut y5, h * A5[0], &k1);
            axpy(&mut y5, h * A5[1], &k2);
            axpy(&mut y5, h * A5[2], &k3);
            axpy(&mut y5, h * A5[3], &k4);
            let k5 = f(*x + C[3] * h, &y5);

            let mut y6 = *y;
            axpy(&mut y6, h * A6[0], &k1);
            axpy(&mut y6, h * A6[1], &k2);
            axpy(&mut y6, h * A6[2], &k3);
            axpy(&mut y6, h * A6[3], &k4);
            axpy(&mut y6, h * A6[4], &k5);
            let k6 = f(*x + C[4] * h, &y6);

            let mut ynew = *y;
            axpy(&mut ynew, h * B[0], &k1);
            axpy(&mut ynew, h * B[2], &k3);
            axpy(&mut ynew, h * B[3], &k4);
            axpy(&mut ynew, h * B[4], &k5);
            axpy(&mut ynew, h * B[5], &k6);
            let k7 = f(*x + h, &ynew);

            // Vector-scaled error: components of a rotating state pass
            // through zero, so the tolerance is set by the state norm.
            let mut ymax = 0.0f64;
            for i in 0..N {
                ymax = ymax.max(y[i].abs()).max(ynew[i].abs());
            }
            let sc = self.atol + self.rtol * ymax;
            let mut err2 = 0.0;
            for i in 0..N {
                let e = h
                    * (E[0] * k1[i]
                        + E[2] * k3[i]
                        + E[3] * k4[i]
                        + E[4] * k5[i]
                        + E[5] * k6[i]
                        + E[6] * k7[i]);
                err2 += (e / sc) * (e / sc);
            }
            let err = (err2 / N as f64).sqrt();

            if err <= 1.0 {
                *x += h;
                *y = ynew;
                k1 = k7;
                let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
                h *= fac;
            } else {
                let fac = (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                h *= fac;
                if h.abs() < 1e-14 * (1.0 + x.abs()) {
                    return Err(Error::Numerical(format!(
                        "step size underflow at x = {x} (weighted error {err:.3e})"
                    )));
                }
            }
        }
    }
}

/// Adaptive Simpson quadrature for complex-valued integrands.
pub fn adaptive_simpson_c<F>(mut f: F, a: f64, b: f64, tol: f64) -> Complex64
where
    F: FnMut(f64) -> Complex64,
{
    fn simpson(fa: Complex64, fm: Complex64, fb: Complex64, h: f64) -> Complex64 {
        (fa + fm * 4.0 + fb) * (h / 6.0)
    }
    fn recurse<F>(
        f: &mut F,
        a: f64,
        b: f64,
        fa: Complex64,
        fm: Complex64,
        fb: Complex64,
        whole: Complex64,
        tol: f64,
        depth: u32,
    ) -> Complex64
    where
        F: FnMut(f64) -> Complex64,
    {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if depth == 0 || delta.norm() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let fa = f(a);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(fa, fm, fb, b - a);
    recurse(&mut f, a, b, fa, fm, fb, whole, tol, 48)
}

pub fn adaptive_simpson<F>(mut f: F, a: f64, b: f64, tol: f64) -> f64
where
    F: FnMut(f64) -> f64,
{
    adaptive_simpson_c(|x| Complex64::new(f(x), 0.0), a, b, tol).re
}

/// Nodes and weights of 5-point Gauss-Legendre on [-1, 1].
const GL5_X: [f64; 5] = [
    -0.906179845938663993,
    -0.538469310105683091,
    0.0,
    0.538469310105683091,
    0.906179845938663993,
];
const GL5_W: [f64; 5] = [
    0.236926885056189088,
    0.478628670499366468,
    0.568888888888888889,
    0.478628670499366468,
    0.236926885056189088,
];

/// 5-point Gauss-Legendre quadrature on [a, b] (exact through degree 9).
pub fn gauss5<F>(mut f: F, a: f64, b: f64) -> f64
where
    F: FnMut(f64) -> f64,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for i in 0..5 {
        s += GL5_W[i] * f(c + h * GL5_X[i]);
    }
    s * h
}

pub trait LinScalar:
    Copy + Default + std::ops::Add<Output = Self> + std::ops::Mul<f64, Output = Self>
{
}
impl LinScalar for f64 {}
impl LinScalar for Complex64 {}

/// Cumulative integral of uniformly sampled data, fourth order.
///
/// Returns `I` with `I[j] = integral from x[0] to x[j]`, using the
/// two-point-centred cubic rule on interior intervals and one-sided
/// cubic rules on the boundary intervals. Requires at least 4 samples.
pub fn cumulative_integral<T: LinScalar>(h: f64, f: &[T]) -> Vec<T> {
    let n = f.len();
    assert!(n >= 4, "cumulative_integral needs at least 4 samples");
    let mut out = Vec::with_capacity(n);
    out.push(T::default());
    let c = h / 24.0;
    for j in 0..n - 1 {
        let seg = if j == 0 {
            (f[0] * 9.0 + f[1] * 19.0 + f[2] * (-5.0) + f[3] * 1.0) * c
        } else if j == n - 2 {
            (f[n - 1] * 9.0 + f[n - 2] * 19.0 + f[n - 3] * (-5.0) + f[n - 4] * 1.0) * c
        } else {
            (f[j - 1] * (-1.0) + f[j] * 13.0 + f[j + 1] * 13.0 + f[j + 2] * (-1.0)) * c
        };
        let prev = out[j];
        out.push(prev + seg);
    }
    out
}

/// Plain bisection for a bracketed sign change; `f(lo)` and `f(hi)` must
/// have opposite signs.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64
where
    F: FnMut(f64) -> f64,
{
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol {
            return mid;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (flo < 0.0) != (fm < 0.0) {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    0.5 * (lo + hi)
}

/// Safeguarded Newton: keeps the iterate inside [lo, hi], bisecting when a
/// Newton step leaves the bracket or stalls.
pub fn newton_bisect<F>(mut fdf: F, mut lo: f64, mut hi: f64, x0: f64, tol: f64) -> f64
where
    F: FnMut(f64) -> (f64, f64),
{
    let (flo, _) = fdf(lo);
    let mut x = x0.clamp(lo, hi);
    for _ in 0..100 {
        let (fx, dfx) = fdf(x);
        if fx == 0.0 {
            return x;
        }
        if (flo < 0.0) != (fx < 0.0) {
            hi = x;
        } else {
            lo = x;
        }
        let step = fx / dfx;
        let mut xn = x - step;
        if !xn.is_finite() || xn <= lo || xn >= hi {
            xn = 0.5 * (lo + hi);
        }
        if (xn - x).abs() <= tol * (1.0 + x.abs()) {
            return xn;
        }
        x = xn;
    }
    x
}

/// Golden-section minimisation of a unimodal function on [a, b].
pub fn golden_min<F>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    const INVPHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    (x, fx)
}

/// Ordinary least-squares line fit y = slope * x + intercept.
#[derive(Debug, Clone, Copy)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// RMS residual of the fit.
    pub resid_rms: f64,
    /// RMS residual divided by the RMS of the centred data.
    pub resid_rel: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut r2 = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let e = y - slope * x - intercept;
        r2 += e * e;
    }
    let resid_rms = (r2 / n).sqrt();
    let scale = (syy / n).sqrt().max(1e-300);
    LineFit {
        slope,
        intercept,
        resid_rms,
        resid_rel: resid_rms / scale,
    }
}

/// Least squares for y = c0 + c1 * x + c2 * g(x) with explicit basis columns.
/// Returns (coefficients, rms residual).
pub fn fit_basis3(b0: &[f64], b1: &[f64], b2: &[f64], ys: &[f64]) -> Result<([f64; 3], f64)> {
    let (c, res) = fit_ls(&[b0, b1, b2], ys)?;
    Ok(([c[0], c[1], c[2]], res))
}

/// General dense least squares over explicit basis columns (normal
/// equations with column equilibration and partial pivoting). Returns
/// (coefficients, rms residual).
pub fn fit_ls(columns: &[&[f64]], ys: &[f64]) -> Result<(Vec<f64>, f64)> {
    let m = columns.len();
    let n = ys.len();
    assert!(m >= 1 && n >= m);
    // Scale each column to unit rms so the normal equations stay sane for
    // bases with wildly different magnitudes (1, ln z, 1/z^4, ...).
    let scales: Vec<f64> = columns
        .iter()
        .map(|c| {
            let s = (c.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
            if s == 0.0 {
                1.0
            } else {
                s
            }
        })
        .collect();
    let mut ata = vec![vec![0.0f64; m + 1]; m];
    for i in 0..n {
        for p in 0..m {
            for q in 0..m {
                ata[p][q] += columns[p][i] / scales[p] * (columns[q][i] / scales[q]);
            }
            ata[p][m] += columns[p][i] / scales[p] * ys[i];
        }
    }
    // Gaussian elimination with partial pivoting on the augmented system.
    for col in 0..m {
        let mut piv = col;
        for r in col + 1..m {
            if ata[r][col].abs() > ata[piv][col].abs() {
                piv = r;
            }
        }
        ata.swap(col, piv);
        let p = ata[col][col];
        if p.abs() < 1e-12 * (1.0 + ata[col].iter().fold(0.0f64, |s, v| s.max(v.abs()))) {
            return Err(Error::IllConditioned(format!(
                "normal-equation pivot {p:.3e} collapsed (basis columns nearly dependent)"
            )));
        }
        for r in col + 1..m {
            let f = ata[r][col] / p;
            for c in col..=m {
                ata[r][c] -= f * ata[col][c];
            }
        }
    }
    let mut coeff = vec![0.0f64; m];
    for i in (0..m).rev() {
        let mut s = ata[i][m];
        for j in i + 1..m {
            s -= ata[i][j] * coeff[j];
        }
        coeff[i] = s / ata[i][i];
    }
    // Undo the column scaling.
    for (c, s) in coeff.iter_mut().zip(&scales) {
        *c /= s;
    }
    let mut r2 = 0.0;
    for i in 0..n {
        let mut e = ys[i];
        for p in 0..m {
            e -= coeff[p] * columns[p][i];
        }
        r2 += e * e;
    }
    Ok((coeff, (r2 / n as f64).sqrt()))
}

/// Solve a 3x3 linear system by Gaussian elimination with partial pivoting.
/// Fails when the scaled pivot collapses (near-singular system).
pub fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Result<[f64; 3]> {
    let mut m = [[0.0f64; 4]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = a[i][j];
        }
        m[i][3] = b[i];
    }
    let mut scale = [0.0f64; 3];
    for i in 0..3 {
        scale[i] = m[i][..3].iter().fold(0.0f64, |s, v| s.max(v.abs()));
        if scale[i] == 0.0 {
            return Err(Error::IllConditioned("zero row in 3x3 system".into()));
        }
    }
    for col in 0..3 {
        let mut piv = col;
        for r in col + 1..3 {
            if (m[r][col] / scale[r]).abs() > (m[piv][col] / scale[piv]).abs() {
                piv = r;
            }
        }
        m.swap(col, piv);
        scale.swap(col, piv);
        let p = m[col][col];
        if p.abs() < 1e-13 * scale[col] {
            return Err(Error::IllConditioned(format!(
                "pivot {:.3e} below conditioning floor (rows too close to dependent)",
                p
            )));
        }
        for r in col + 1..3 {
            let f = m[r][col] / p;
            for c in col..4 {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    let mut x = [0.0f64; 3];
    for i in (0..3).rev() {
        let mut s = m[i][3];
        for j in i + 1..3 {
            s -= m[i][j] * x[j];
        }
        x[i] = s / m[i][i];
    }
    Ok(x)
}

/// Unwrap a sequence of phases in place so consecutive jumps stay below pi.
pub fn unwrap_phases(phases: &mut [f64]) {
    for i in 1..phases.len() {
        let mut d = phases[i] - phases[i - 1];
        while d > std::f64::consts::PI {
            phases[i] -= 2.0 * std::f64::consts::PI;
            d = phases[i] - phases[i - 1];
        }
        while d < -std::f64::consts::PI {
            phases[i] += 2.0 * std::f64::consts::PI;
            d = phases[i] - phases[i - 1];
        }
    }
}

/// Symmetric banded matrix in lower-band storage: `band[d][i]` holds
/// A[i + d][i], d = 0..=bw.
pub struct SymBanded {
    pub n: usize,
    pub bw: usize,
    pub band: Vec<Vec<f64>>,
}

impl SymBanded {
    pub fn zeros(n: usize, bw: usize) -> Self {
        let band = (0..=bw).map(|d| vec![0.0; n - d.min(n)]).collect();
        SymBanded { n, bw, band }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        assert!(d <= self.bw, "entry outside band");
        self.band[d][lo] += v;
    }

    /// Number of eigenvalues strictly below `sigma`, by counting negative
    /// pivots of the LDL^T factorisation of A - sigma I. Collapsed pivots
    /// are replaced by -pivmin (LAPACK dstebz convention), which keeps the
    /// Sturm count deterministic without overflow.
    pub fn count_below(&self, sigma: f64) -> usize {
        let n = self.n;
        let bw = self.bw;
        let scale = self
            .band
            .iter()
            .flat_map(|row| row.iter())
            .fold(1.0f64, |s, v| s.max(v.abs()))
            .max(sigma.abs());
        let pivmin = 1e-130 * scale;
        // Work rows: rolling window of the factorisation.
        let mut d = vec![0.0f64; n];
        let mut l = vec![vec![0.0f64; n]; bw]; // l[d-1][i] = L[i+d][i]
        let mut count = 0usize;
        for i in 0..n {
            let mut di = self.band[0][i] - sigma;
            for k in i.saturating_sub(bw)..i {
                let lik = l[i - k - 1][k];
                di -= lik * lik * d[k];
            }
            if di.abs() < pivmin {
                di = -pivmin;
            }
            d[i] = di;
            if di < 0.0 {
                count += 1;
            }
            for r in i + 1..(i + bw + 1).min(n) {
                let mut v = if r - i <= bw {
                    self.band[r - i][i]
                } else {
                    0.0
                };
                for k in r.saturating_sub(bw)..i {
                    v -= l[r - k - 1][k] * l[i - k - 1][k] * d[k];
                }
                l[r - i - 1][i] = v / di;
            }
        }
        count
    }

    /// j-th smallest eigenvalue (1-based) inside [lo, hi] via inertia
    /// bisection. Assumes count_below(lo) < j <= count_below(hi).
    pub fn eigenvalue_by_index(&self, j: usize, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
        while hi - lo > tol * (1.0 + lo.abs().max(hi.abs())) {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) >= j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}
