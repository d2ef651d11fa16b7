//! Stationary supersolutions of the cooperative system and their numerical
//! certification.
//!
//! Two families are provided: the power-sigmoid pair
//! `(phi, psi) = (sigma_p(a x)^p, sigma_p(a x))` and the piecewise profile used
//! for small diffusion ratios ([`degenerate`]). A pair is a supersolution when
//!
//! ```text
//! I = phi'' + f(phi, psi) <= 0,   J = (d/r) psi'' + g(phi, psi) <= 0
//! ```
//!
//! plus the derivative jump conditions at any corner.

pub mod degenerate;
pub mod profile;

pub use degenerate::{
    degenerate_build, degenerate_residuals, h_star, h_star_forms, matching_mismatch,
    DegenerateSupersol,
};
pub use profile::{auto_span, sigma_profile, sigma_profile_with_step, SigmoidProfile};

use crate::error::{Error, Result};
use crate::model::CompetitionParams;
use crate::theory;

/// Default certification tolerance on `I`, `J` and the jumps.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Largest accepted discrepancy between analytic and finite-difference derivatives.
pub const DERIVATIVE_CHECK_TOL: f64 = 1e-6;

/// `alpha_p = 6 / ((p + 1)(p + 2))`.
pub fn alpha_p(p: f64) -> f64 {
    6.0 / ((p + 1.0) * (p + 2.0))
}

/// Checked version of [`alpha_p`].
pub fn alpha_p_checked(p: f64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "p",
            value: p,
            reason: "exponent must exceed 1",
        });
    }
    Ok(alpha_p(p))
}

/// Balanced bistable nonlinearity with zeros `0`, `alpha_p^{1/(p-1)}`, `1`.
pub fn h_p(s: f64, p: f64) -> f64 {
    let alpha = alpha_p(p);
    if s >= 0.0 {
        s * (1.0 - s) * (s.powf(p - 1.0) - alpha)
    } else {
        -alpha * s
    }
}

/// `G(s) = -2 int_0^s h_p`, the first integral `(sigma')^2 = G(sigma)`.
pub fn first_integral(p: f64, s: f64) -> f64 {
    let alpha = alpha_p(p);
    alpha * s * s - 2.0 / 3.0 * alpha * s.powi(3) - 2.0 / (p + 1.0) * s.powf(p + 1.0)
        + 2.0 / (p + 2.0) * s.powf(p + 2.0)
}

/// Exponent `p` and spatial scaling `a` of a power-sigmoid candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupersolCandidate {
    p: f64,
    a: f64,
    /// Kept exactly: at `p = m(k2)` condition (d) admits a single `a^2`.
    a2: f64,
}

impl SupersolCandidate {
    pub fn new(p: f64, a: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "p",
                value: p,
                reason: "exponent must exceed 1",
            });
        }
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "a",
                value: a,
                reason: "scaling must be positive",
            });
        }
        Ok(Self { p, a, a2: a * a })
    }

    /// Candidate from the squared scaling, which the conditions are stated in.
    pub fn from_a_squared(p: f64, a2: f64) -> Result<Self> {
        let cand = Self::new(p, a2.sqrt())?;
        Ok(Self { a2, ..cand })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn a_squared(&self) -> f64 {
        self.a2
    }
}

/// Truth of the four sufficient conditions (a)-(d) on `(p, a)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Prop21Conditions {
    pub a: bool,
    pub b: bool,
    pub c: bool,
    pub d: bool,
}

impl Prop21Conditions {
    pub fn all(&self) -> bool {
        self.a && self.b && self.c && self.d
    }
}

/// Bounds on `a^2` implied by each condition for a fixed exponent.
#[derive(Debug, Clone, Copy)]
struct SquaredScaleBounds {
    /// (a): `a^2 < upper_a`
    upper_a: f64,
    /// (b), latter clause: `a^2 >= lower_b` when `p > k1`
    lower_b: Option<f64>,
    /// (c): `a^2 <= upper_c`, meaningful only when `p < 2 k1`
    upper_c: f64,
    lower_d: f64,
    upper_d: f64,
}

impl SquaredScaleBounds {
    fn new(p: f64, params: &CompetitionParams) -> Self {
        let (k1, k2, ratio) = (params.k1(), params.k2(), params.ratio());
        let pp = (p + 1.0) * (p + 2.0);
        Self {
            upper_a: pp / (6.0 * p * p) * (k1 - 1.0),
            lower_b: (p > k1).then(|| pp * (p - k1) / (p * (p - 1.0) * (p + 4.0))),
            upper_c: (2.0 * k1 - p) / (2.0 * p),
            lower_d: (k2 - 1.0) / ratio * pp / ((p - 1.0) * (p + 4.0)),
            upper_d: pp / (6.0 * ratio),
        }
    }

    fn check(&self, p: f64, k1: f64, a2: f64) -> Prop21Conditions {
        Prop21Conditions {
            a: a2 < self.upper_a,
            b: self.lower_b.is_none_or(|lo| a2 >= lo),
            c: p < 2.0 * k1 && a2 <= self.upper_c,
            d: self.lower_d <= a2 && a2 <= self.upper_d,
        }
    }

    /// Midpoint of the admissible `a^2` interval, if it is non-empty.
    fn midpoint(&self, p: f64, k1: f64) -> Option<f64> {
        if !(p < 2.0 * k1) {
            return None;
        }
        let lo = self.lower_d.max(self.lower_b.unwrap_or(0.0));
        let hi = self.upper_c.min(self.upper_d);
        if lo <= hi && lo < self.upper_a {
            let top = hi.min(self.upper_a);
            let a2 = 0.5 * (lo + top);
            Some(a2).filter(|&a2| a2 > 0.0 && self.check(p, k1, a2) == Prop21Conditions::all_true())
        } else {
            None
        }
    }
}

impl Prop21Conditions {
    fn all_true() -> Self {
        Self {
            a: true,
            b: true,
            c: true,
            d: true,
        }
    }
}

pub fn prop21_conditions(cand: &SupersolCandidate, params: &CompetitionParams) -> Prop21Conditions {
    SquaredScaleBounds::new(cand.p, params).check(cand.p, params.k1(), cand.a2)
}

/// Coefficients of `I = s^p (A + B s + C s^{p-1} + D s^p)` for the power-sigmoid pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbcCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    p: f64,
}

impl AbcCoefficients {
    pub fn sum(&self) -> f64 {
        self.a + self.b + self.c + self.d
    }

    /// (A) `A < 0`, equivalent to condition (a).
    pub fn cond_a(&self) -> bool {
        self.a < 0.0
    }

    /// (B) `p A + (p - 1) B + C <= 0`, equivalent to condition (b).
    pub fn cond_b(&self) -> bool {
        self.p * self.a + (self.p - 1.0) * self.b + self.c <= 0.0
    }

    /// (C) `p A + (p - 2) B <= 0`, equivalent to condition (c).
    pub fn cond_c(&self) -> bool {
        self.p * self.a + (self.p - 2.0) * self.b <= 0.0
    }

    /// `I / s^p` at `s`.
    pub fn reduced_residual(&self, s: f64) -> f64 {
        self.a + self.b * s + self.c * s.powf(self.p - 1.0) + self.d * s.powf(self.p)
    }
}

pub fn abc_coefficients(cand: &SupersolCandidate, params: &CompetitionParams) -> AbcCoefficients {
    let (p, a2, k1) = (cand.p, cand.a2, params.k1());
    let pp = (p + 1.0) * (p + 2.0);
    AbcCoefficients {
        a: 6.0 * p * p / pp * a2 - (k1 - 1.0),
        b: -2.0 * p * (2.0 * p + 1.0) / pp * a2 + k1,
        c: -p * (3.0 * p - 1.0) / (p + 1.0) * a2,
        d: 3.0 * p * p / (p + 2.0) * a2 - 1.0,
        p,
    }
}

/// Picks `(p, a)` following the constructive proof of (N1)/(N2):
/// `p = k1` if `k1 < 2`, `p = 2` if `m(k2) <= 2 <= k1`, `p = m(k2)` otherwise.
/// With `p = m(k2)` condition (d) pins `a^2 = k2 r / d`; other exponents take
/// the midpoint of the admissible `a^2` interval. Returns `None` when no
/// admissible scaling exists.
pub fn choose_p_a(params: &CompetitionParams) -> Option<SupersolCandidate> {
    let (k1, k2) = (params.k1(), params.k2());
    let mk2 = theory::m(k2);
    let p = if k1 >= mk2 {
        if k1 < 2.0 {
            k1
        } else if mk2 <= 2.0 {
            2.0
        } else {
            mk2
        }
    } else {
        mk2
    };

    let candidate = if p == mk2 {
        let pinned = k2 / params.ratio();
        let bounds = SquaredScaleBounds::new(p, params);
        if bounds.check(p, k1, pinned).all() {
            Some((p, pinned))
        } else {
            // (d) is a single point at p = m(k2); nudge p until rounding leaves it non-empty
            let mut q = p;
            (0..64).find_map(|_| {
                q = q.next_up();
                SquaredScaleBounds::new(q, params)
                    .midpoint(q, k1)
                    .map(|a2| (q, a2))
            })
        }
    } else {
        SquaredScaleBounds::new(p, params)
            .midpoint(p, k1)
            .map(|a2| (p, a2))
    };

    let (p, a2) = candidate?;
    let cand = SupersolCandidate::from_a_squared(p, a2).ok()?;
    prop21_conditions(&cand, params).all().then_some(cand)
}

/// Power-sigmoid pair tabulated on the rescaled grid `x / a`, with analytic
/// derivatives from the profile's first integral.
#[derive(Debug, Clone)]
pub struct SupersolutionTable {
    pub xs: Vec<f64>,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub dphi: Vec<f64>,
    pub dpsi: Vec<f64>,
    pub ddphi: Vec<f64>,
    pub ddpsi: Vec<f64>,
    one_minus_psi: Vec<f64>,
    step: f64,
}

impl SupersolutionTable {
    /// Shifts the grid by `dx`; the pair is autonomous so residuals are unchanged.
    pub fn translated(mut self, dx: f64) -> Self {
        self.xs.iter_mut().for_each(|x| *x += dx);
        self
    }

    pub fn to_table(&self) -> String {
        let mut out = String::from("x phi psi\n");
        for i in 0..self.xs.len() {
            out.push_str(&format!(
                "{} {} {}\n",
                crate::fmt::g12(self.xs[i]),
                crate::fmt::g12(self.phi[i]),
                crate::fmt::g12(self.psi[i])
            ));
        }
        out
    }
}

pub fn build_supersolution(
    cand: &SupersolCandidate,
    profile: &SigmoidProfile,
) -> Result<SupersolutionTable> {
    if cand.p != profile.p {
        return Err(Error::Profile(format!(
            "profile exponent {} does not match candidate exponent {}",
            profile.p, cand.p
        )));
    }
    let (p, a, a2) = (cand.p, cand.a, cand.a2);
    let q = profile.q_factor();
    let one_minus = profile.one_minus_sigma();
    let n = profile.len();
    let mut table = SupersolutionTable {
        xs: profile.xs.iter().map(|x| x / a).collect(),
        phi: Vec::with_capacity(n),
        psi: profile.sigma.clone(),
        dphi: Vec::with_capacity(n),
        dpsi: Vec::with_capacity(n),
        ddphi: Vec::with_capacity(n),
        ddpsi: Vec::with_capacity(n),
        one_minus_psi: one_minus.clone(),
        step: profile.step() / a,
    };
    for (i, (&s, &e)) in profile.sigma.iter().zip(&one_minus).enumerate() {
        let g = s * s * e * e * q.eval(s, e);
        let ds = profile.dsigma[i];
        // sigma'' = -h_p(sigma), written with the accurate 1 - s
        let dds = -s * e * (s.powf(p - 1.0) - alpha_p(p));
        table.phi.push(s.powf(p));
        table.dphi.push(p * s.powf(p - 1.0) * a * ds);
        table
            .ddphi
            .push(a2 * (p * (p - 1.0) * s.powf(p - 2.0) * g + p * s.powf(p - 1.0) * dds));
        table.dpsi.push(a * ds);
        table.ddpsi.push(a2 * dds);
    }
    Ok(table)
}

/// Maxima of the supersolution residuals and, for piecewise pairs, the jumps
/// `phi'(0-) - phi'(0+)` and `psi'(0-) - psi'(0+)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub max_i: f64,
    pub max_i_at: f64,
    pub max_j: f64,
    pub max_j_at: f64,
    pub jump_phi: Option<f64>,
    pub jump_psi: Option<f64>,
    pub tol: f64,
    pub certified: bool,
}

impl ResidualReport {
    pub(crate) fn finish(mut self) -> Self {
        let jumps_ok = self.jump_phi.is_none_or(|j| j >= -self.tol)
            && self.jump_psi.is_none_or(|j| j >= -self.tol);
        self.certified = self.max_i <= self.tol && self.max_j <= self.tol && jumps_ok;
        self
    }
}

pub(crate) fn argmax(xs: &[f64], values: impl Iterator<Item = f64>) -> (f64, f64) {
    values
        .zip(xs)
        .fold((f64::NEG_INFINITY, f64::NAN), |best, (v, &x)| {
            if v > best.0 {
                (v, x)
            } else {
                best
            }
        })
}

/// Worst mismatch between fourth-order finite differences of `values` and the
/// supplied analytic first and second derivatives.
fn derivative_mismatch(values: &[f64], first: &[f64], second: &[f64], h: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 2..values.len().saturating_sub(2) {
        let (m2, m1, c, p1, p2) = (
            values[i - 2],
            values[i - 1],
            values[i],
            values[i + 1],
            values[i + 2],
        );
        let d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
        let d2 = (-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * h * h);
        worst = worst.max((d1 - first[i]).abs()).max((d2 - second[i]).abs());
    }
    worst
}

/// Evaluates `I` and `J` on the tabulated grid and certifies them against `tol`.
pub fn residuals_ij(
    table: &SupersolutionTable,
    params: &CompetitionParams,
    tol: f64,
) -> Result<ResidualReport> {
    let mismatch = derivative_mismatch(&table.phi, &table.dphi, &table.ddphi, table.step).max(
        derivative_mismatch(&table.psi, &table.dpsi, &table.ddpsi, table.step),
    );
    if !(mismatch <= DERIVATIVE_CHECK_TOL) {
        return Err(Error::GridTooCoarse {
            error: mismatch,
            limit: DERIVATIVE_CHECK_TOL,
        });
    }
    let (k1, k2, ratio) = (params.k1(), params.k2(), params.ratio());
    let n = table.xs.len();
    let i_vals = (0..n).map(|i| {
        let (phi, e) = (table.phi[i], table.one_minus_psi[i]);
        table.ddphi[i] + phi * (1.0 - phi - k1 * e)
    });
    let j_vals = (0..n).map(|i| {
        let (phi, psi, e) = (table.phi[i], table.psi[i], table.one_minus_psi[i]);
        ratio * table.ddpsi[i] + e * (k2 * phi - psi)
    });
    let (max_i, max_i_at) = argmax(&table.xs, i_vals);
    let (max_j, max_j_at) = argmax(&table.xs, j_vals);
    Ok(ResidualReport {
        max_i,
        max_i_at,
        max_j,
        max_j_at,
        jump_phi: None,
        jump_psi: None,
        tol,
        certified: false,
    }
    .finish())
}

/// Outcome of the full power-sigmoid pipeline for one parameter tuple.
#[derive(Debug, Clone)]
pub struct Certification {
    pub candidate: SupersolCandidate,
    pub conditions: Prop21Conditions,
    pub coefficients: AbcCoefficients,
    pub report: ResidualReport,
}

/// Profile, table and residual report for a given candidate.
pub fn certify_candidate(
    cand: &SupersolCandidate,
    params: &CompetitionParams,
    tol: f64,
) -> Result<Certification> {
    let profile = sigma_profile(cand.p, 1e-12, auto_span(cand.p))?;
    let table = build_supersolution(cand, &profile)?;
    let report = residuals_ij(&table, params, tol)?;
    Ok(Certification {
        candidate: *cand,
        conditions: prop21_conditions(cand, params),
        coefficients: abc_coefficients(cand, params),
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(d: f64, r: f64, k1: f64, k2: f64) -> CompetitionParams {
        CompetitionParams::new(d, r, k1, k2).unwrap()
    }

    #[test]
    fn alpha_values() {
        assert_eq!(alpha_p(2.0), 0.5);
        assert!((alpha_p(4.0) - 0.2).abs() < 1e-16);
        assert!(alpha_p_checked(1.0).is_err());
        let mut prev = 1.0;
        for i in 1..50 {
            let a = alpha_p(1.0 + 0.2 * i as f64);
            assert!(a < prev && a > 0.0);
            prev = a;
        }
    }

    #[test]
    fn h_zeros() {
        for p in [1.5, 2.0, 3.0, 5.0] {
            assert_eq!(h_p(0.0, p), 0.0);
            assert_eq!(h_p(1.0, p), 0.0);
            let mid = alpha_p(p).powf(1.0 / (p - 1.0));
            assert!(h_p(mid, p).abs() < 1e-15);
            // C^1 at zero: slope -alpha on both sides
            let eps = 1e-12;
            let right = h_p(eps, p) / eps;
            let left = h_p(-eps, p) / -eps;
            assert!((right - left).abs() < 1e-5, "p={p}");
        }
        assert_eq!(h_p(0.5, 2.0), 0.0);
    }

    #[test]
    fn first_integral_ends() {
        for p in [1.5, 2.0, 3.0, 5.0] {
            assert_eq!(first_integral(p, 0.0), 0.0);
            assert!(first_integral(p, 1.0).abs() < 1e-16);
        }
    }

    #[test]
    fn symmetric_point_recipe() {
        let q = params(11.0, 1.0, 3.0, 3.0);
        let cand = choose_p_a(&q).unwrap();
        assert!((cand.p() - theory::m(3.0)).abs() < 1e-12);
        assert!((cand.a_squared() - 3.0 / 11.0).abs() < 1e-12);
        assert!(prop21_conditions(&cand, &q).all());
    }

    #[test]
    fn outside_n1_n2_has_no_candidate() {
        let q = params(1.0, 1.0, 2.0, 2.0);
        assert!(!theory::criterion_n1(&q) && !theory::criterion_n2(&q));
        assert!(choose_p_a(&q).is_none());
        assert!(choose_p_a(&params(1.0, 1.0, 1.1, 5.0)).is_none());
    }

    #[test]
    fn condition_edges() {
        let q = params(2.0, 1.0, 3.0, 2.0);
        let cand = SupersolCandidate::new(2.0, 1e-6).unwrap();
        assert!(!prop21_conditions(&cand, &q).d);

        // (a) fails exactly at equality
        let p = 2.5;
        let a2 = (p + 1.0) * (p + 2.0) * (q.k1() - 1.0) / (6.0 * p * p);
        let cand = SupersolCandidate::new(p, a2.sqrt()).unwrap();
        let conds = SquaredScaleBounds::new(p, &q).check(p, q.k1(), a2);
        assert!(!conds.a);
        let _ = cand;
    }

    #[test]
    fn coefficient_example() {
        let q = params(1.0, 1.0, 3.0, 2.0);
        let cand = SupersolCandidate::new(2.0, 1.0).unwrap();
        let abc = abc_coefficients(&cand, &q);
        assert_eq!(abc.a, 0.0);
        assert!(!abc.cond_a());
        assert!(abc.sum().abs() < 1e-14);
    }

    #[test]
    fn p2_table_matches_closed_form() {
        let prof = sigma_profile(2.0, 1e-12, 40.0).unwrap();
        let cand = SupersolCandidate::new(2.0, 1.0).unwrap();
        let table = build_supersolution(&cand, &prof).unwrap();
        for (i, &x) in table.xs.iter().enumerate().step_by(97) {
            let s = profile::logistic(x / 2f64.sqrt());
            assert!((table.phi[i] - s * s).abs() < 1e-12);
            assert!(table.phi[i] <= table.psi[i]);
        }
        let wrong = SupersolCandidate::new(3.0, 1.0).unwrap();
        assert!(build_supersolution(&wrong, &prof).is_err());
    }

    #[test]
    fn certification_and_translation() {
        let q = params(11.0, 1.0, 3.0, 3.0);
        let cand = choose_p_a(&q).unwrap();
        let prof = sigma_profile(cand.p(), 1e-12, auto_span(cand.p())).unwrap();
        let table = build_supersolution(&cand, &prof).unwrap();
        let report = residuals_ij(&table, &q, DEFAULT_TOL).unwrap();
        assert!(report.certified, "{report:?}");
        let shifted = residuals_ij(&table.clone().translated(3.25), &q, DEFAULT_TOL).unwrap();
        assert_eq!(shifted.max_i, report.max_i);
        assert_eq!(shifted.max_j, report.max_j);
        assert!((shifted.max_j_at - report.max_j_at - 3.25).abs() < 1e-12);
    }

    #[test]
    fn violated_lower_bound_detected() {
        let q = params(11.0, 1.0, 3.0, 3.0);
        let p = theory::m(3.0);
        let lower = SquaredScaleBounds::new(p, &q).lower_d;
        let cand = SupersolCandidate::from_a_squared(p, 0.5 * lower).unwrap();
        assert!(!prop21_conditions(&cand, &q).d);
        let cert = certify_candidate(&cand, &q, DEFAULT_TOL).unwrap();
        assert!(cert.report.max_j > 0.0);
        assert!(!cert.report.certified);
    }

    #[test]
    fn coarse_grid_rejected() {
        let q = params(11.0, 1.0, 3.0, 3.0);
        let cand = choose_p_a(&q).unwrap();
        let prof = sigma_profile_with_step(cand.p(), 1e-10, 60.0, 0.75).unwrap();
        let table = build_supersolution(&cand, &prof).unwrap();
        assert!(matches!(
            residuals_ij(&table, &q, DEFAULT_TOL),
            Err(Error::GridTooCoarse { .. })
        ));
    }
}
