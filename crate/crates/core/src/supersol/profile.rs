//! Tabulation of the monotone standing profile `sigma_p` of `sigma'' + h_p(sigma) = 0`.
//!
//! The first integral `(sigma')^2 = G(sigma)` has double zeros at both ends,
//! `G(s) = s^2 (1 - s)^2 Q(s)` with `Q(0) = alpha_p` and `Q(1) = 1 - alpha_p`.
//! In the logit variable `t = ln(sigma / (1 - sigma))` the profile solves the
//! regular autonomous equation `t' = sqrt(Q(sigma(t)))`, whose slope tends to
//! the exponential tail rates `sqrt(alpha_p)` and `sqrt(1 - alpha_p)`. Nothing
//! is singular in these coordinates, so the profile is integrated directly on
//! the output grid, outward from `sigma(0) = 1/2`.

use crate::error::{Error, Result};

use super::alpha_p;

/// Default spacing of tabulated profiles.
pub const DEFAULT_STEP: f64 = 1.0 / 128.0;

/// Largest number of RK4 substeps per grid interval before giving up.
const MAX_SUBSTEPS: usize = 256;

/// Where the series expansion of `Q` around `s = 1` takes over.
const SERIES_SWITCH: f64 = 0.05;

/// `1 / (1 + e^{-t})`.
#[inline]
pub fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Generalized binomial coefficients `C(q, j)` for `j = 0..n`.
fn binomials(q: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut c = 1.0;
    out.push(c);
    for j in 1..=n {
        c *= (q - (j as f64 - 1.0)) / j as f64;
        out.push(c);
    }
    out
}

/// `Q(s) = G(s) / (s^2 (1 - s)^2)` evaluated without cancellation.
/// `s` and `one_minus_s` are passed separately so both stay accurate near the ends.
#[derive(Debug, Clone)]
pub struct QFactor {
    p: f64,
    alpha: f64,
    series: Vec<f64>,
}

impl QFactor {
    pub fn new(p: f64) -> Self {
        const TERMS: usize = 48;
        let cp = binomials(p, TERMS);
        let cq = binomials(p - 1.0, TERMS);
        // coefficient of eps^(j-2) in Q(1 - eps)
        let series = (2..=TERMS)
            .map(|j| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * (2.0 * cp[j] / (p + 2.0) - 2.0 * cq[j] / (p + 1.0))
            })
            .collect();
        Self {
            p,
            alpha: alpha_p(p),
            series,
        }
    }

    pub fn eval(&self, s: f64, one_minus_s: f64) -> f64 {
        let p = self.p;
        if one_minus_s >= SERIES_SWITCH {
            let r = self.alpha * (1.0 - 2.0 / 3.0 * s) - 2.0 / (p + 1.0) * s.powf(p - 1.0)
                + 2.0 / (p + 2.0) * s.powf(p);
            r / (one_minus_s * one_minus_s)
        } else {
            // Horner in eps; terms fall off like eps^j
            self.series
                .iter()
                .rev()
                .fold(0.0, |acc, &c| acc * one_minus_s + c)
        }
    }
}

/// Tabulated monotone profile `sigma_p` on a uniform symmetric grid with
/// `sigma(0) = 1/2`.
#[derive(Debug, Clone)]
pub struct SigmoidProfile {
    pub p: f64,
    pub xs: Vec<f64>,
    pub sigma: Vec<f64>,
    /// `sigma'` from the first integral, `sigma (1 - sigma) sqrt(Q(sigma))`.
    pub dsigma: Vec<f64>,
    /// Position where `sigma = 1/2`.
    pub normalization: f64,
    logit: Vec<f64>,
    step: f64,
    q: QFactor,
}

fn slope(q: &QFactor, t: f64) -> f64 {
    q.eval(logistic(t), logistic(-t)).sqrt()
}

fn rk4(q: &QFactor, mut t: f64, h: f64, substeps: usize) -> f64 {
    let k = h / substeps as f64;
    for _ in 0..substeps {
        let k1 = slope(q, t);
        let k2 = slope(q, t + 0.5 * k * k1);
        let k3 = slope(q, t + 0.5 * k * k2);
        let k4 = slope(q, t + k * k3);
        t += k / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    t
}

/// Logit values at `n` grid points `0, h, 2h, ...` (or `0, -h, ...` for `h < 0`).
fn march(q: &QFactor, h: f64, n: usize, substeps: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut t = 0.0;
    out.push(t);
    for _ in 0..n {
        t = rk4(q, t, h, substeps);
        out.push(t);
    }
    out
}

fn march_to_tol(q: &QFactor, h: f64, n: usize, tol: f64) -> Result<Vec<f64>> {
    let mut substeps = 1;
    let mut coarse = march(q, h, n, substeps);
    while substeps < MAX_SUBSTEPS {
        substeps *= 2;
        let fine = march(q, h, n, substeps);
        // error measured in sigma: d sigma = sigma (1 - sigma) d t
        let diff = coarse
            .iter()
            .zip(&fine)
            .map(|(a, b)| (a - b).abs() * logistic(*b) * logistic(-*b))
            .fold(0.0, f64::max);
        if diff <= tol {
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(Error::Profile(format!(
        "RK4 did not reach tolerance {tol:e} with {MAX_SUBSTEPS} substeps"
    )))
}

/// Half-width that puts both ends of `sigma_p` within `1e-7` of its limits.
pub fn auto_span(p: f64) -> f64 {
    let alpha = alpha_p(p);
    let slow = f64::min(alpha.sqrt(), (1.0 - alpha).sqrt());
    (1e7f64.ln() / slow + 2.0).ceil()
}

/// Tabulates `sigma_p` on `[-span, span]` with spacing [`DEFAULT_STEP`].
pub fn sigma_profile(p: f64, tol: f64, span: f64) -> Result<SigmoidProfile> {
    sigma_profile_with_step(p, tol, span, DEFAULT_STEP)
}

pub fn sigma_profile_with_step(p: f64, tol: f64, span: f64, step: f64) -> Result<SigmoidProfile> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "p",
            value: p,
            reason: "exponent must exceed 1",
        });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol",
            value: tol,
            reason: "must be positive",
        });
    }
    if !(span > 0.0 && span.is_finite()) || !(step > 0.0 && step < span) {
        return Err(Error::InvalidParameter {
            name: "span",
            value: span,
            reason: "need 0 < step < span",
        });
    }
    let q = QFactor::new(p);
    let n = (span / step).ceil() as usize;
    let right = march_to_tol(&q, step, n, tol)?;
    let left = march_to_tol(&q, -step, n, tol)?;

    let logit: Vec<f64> = left
        .iter()
        .rev()
        .chain(right.iter().skip(1))
        .copied()
        .collect();
    let xs: Vec<f64> = (0..logit.len())
        .map(|i| (i as f64 - n as f64) * step)
        .collect();
    let sigma: Vec<f64> = logit.iter().map(|&t| logistic(t)).collect();
    let dsigma: Vec<f64> = logit
        .iter()
        .map(|&t| {
            let (s, e) = (logistic(t), logistic(-t));
            s * e * q.eval(s, e).sqrt()
        })
        .collect();

    let (first, last) = (sigma[0], sigma[sigma.len() - 1]);
    if !(first < 1e-6 && last > 1.0 - 1e-6) {
        return Err(Error::Profile(format!(
            "span {span} too short: sigma ranges over [{first:e}, 1 - {:e}]",
            1.0 - last
        )));
    }
    Ok(SigmoidProfile {
        p,
        xs,
        sigma,
        dsigma,
        normalization: 0.0,
        logit,
        step,
        q,
    })
}

impl SigmoidProfile {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Logit `ln(sigma / (1 - sigma))` at each grid point.
    pub fn logit(&self) -> &[f64] {
        &self.logit
    }

    /// `1 - sigma` at each grid point, accurate near `sigma = 1`.
    pub fn one_minus_sigma(&self) -> Vec<f64> {
        self.logit.iter().map(|&t| logistic(-t)).collect()
    }

    /// Exponential decay rates of `sigma` at `-inf` and of `1 - sigma` at `+inf`.
    pub fn tail_rates(&self) -> (f64, f64) {
        let alpha = alpha_p(self.p);
        (alpha.sqrt(), (1.0 - alpha).sqrt())
    }

    pub fn q_factor(&self) -> &QFactor {
        &self.q
    }

    /// Logit of `sigma` at arbitrary `x`: cubic Hermite inside the grid (the
    /// slope `sqrt(Q)` is known exactly), continued along the exponential
    /// tails outside it.
    pub fn logit_at(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let (x0, xn) = (self.xs[0], self.xs[n - 1]);
        if x <= x0 {
            return self.logit[0] + self.tail_rates().0 * (x - x0);
        }
        if x >= xn {
            return self.logit[n - 1] + self.tail_rates().1 * (x - xn);
        }
        let i = (((x - x0) / self.step).floor() as usize).min(n - 2);
        let h = self.step;
        let u = (x - self.xs[i]) / h;
        let (t0, t1) = (self.logit[i], self.logit[i + 1]);
        let (m0, m1) = (slope(&self.q, t0) * h, slope(&self.q, t1) * h);
        let u2 = u * u;
        let u3 = u2 * u;
        (2.0 * u3 - 3.0 * u2 + 1.0) * t0
            + (u3 - 2.0 * u2 + u) * m0
            + (-2.0 * u3 + 3.0 * u2) * t1
            + (u3 - u2) * m1
    }

    pub fn sigma_at(&self, x: f64) -> f64 {
        logistic(self.logit_at(x))
    }

    /// Two-column `x value` table for plotting.
    pub fn to_table(&self) -> String {
        let mut out = String::from("x sigma\n");
        for (x, s) in self.xs.iter().zip(&self.sigma) {
            out.push_str(&format!(
                "{} {}\n",
                crate::fmt::g12(*x),
                crate::fmt::g12(*s)
            ));
        }
        out
    }
}
