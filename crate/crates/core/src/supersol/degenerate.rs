//! Piecewise supersolution for small diffusion ratios.
//!
//! For `x < 0` the pair is `psi = k2 phi + delta` with
//! `phi = beta mu (1 - mu)`, `mu = logistic(gamma (x - xi))`, which makes `I`
//! vanish identically; for `x >= 0` it is `psi = 1` with
//! `phi = 1 - 6 lambda (1 - lambda)`, `lambda = logistic(x - eta)`.
//! Both pieces meet at `phi(0) = (1 - delta) / k2`. What remains to check is
//! `J <= 0` on the left piece, which holds iff `d/r <= H*`, and the corner
//! condition `phi'(0-) >= phi'(0+)`, which holds iff `delta <= delta3`.

use num_traits::Num;

use crate::error::{Error, Result};
use crate::model::CompetitionParams;

use super::profile::logistic;
use super::{argmax, ResidualReport};

/// Explicit pieces and the constants that define them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegenerateSupersol {
    pub k1: f64,
    pub k2: f64,
    pub delta: f64,
    /// `sqrt(k1 (1 - delta) - 1)`
    pub gamma: f64,
    /// `6 gamma^2 / (k1 k2 - 1)`
    pub beta: f64,
    /// Translation of the left piece, `> 0`.
    pub xi: f64,
    /// Translation of the right piece, `< 0`.
    pub eta: f64,
    /// `phi(0) / beta`, in `(1/6, 1/4]`.
    pub m0: f64,
    /// `phi / beta` where `H` is minimal, `< 1/6`.
    pub m_star: f64,
}

/// Admissible offsets for `(k1, k2)`: returns `(delta2, delta3)`.
pub fn delta_limits(k1: f64, k2: f64) -> (f64, f64) {
    let delta2 = 1.0 - 3.0 * k2 / (k1 * k2 + 2.0);
    let delta3 = 1.0 - (k2 * k2 / k1).cbrt();
    (delta2, delta3)
}

fn m0_of(k1: f64, k2: f64, delta: f64) -> f64 {
    (1.0 - delta) * (k1 * k2 - 1.0) / (6.0 * k2 * (k1 * (1.0 - delta) - 1.0))
}

fn m_star_of(m0: f64) -> f64 {
    m0 - (m0 * (m0 - 1.0 / 6.0)).sqrt()
}

fn check_delta(k1: f64, k2: f64, delta: f64) -> Result<()> {
    if !(k1 > 3.0 - 2.0 / k2) {
        return Err(Error::DegeneratePrecondition(format!(
            "k1 > 3 - 2/k2 (k1 = {k1}, k2 = {k2})"
        )));
    }
    let (delta2, _) = delta_limits(k1, k2);
    if !(delta > 0.0 && delta < delta2) {
        return Err(Error::InadmissibleDelta {
            delta,
            reason: format!("need 0 < delta < delta2 = {delta2}"),
        });
    }
    Ok(())
}

/// The two closed forms of `H*` for `(k1, k2, delta)`.
pub fn h_star_forms(k1: f64, k2: f64, delta: f64) -> Result<(f64, f64)> {
    check_delta(k1, k2, delta)?;
    let gamma2 = k1 * (1.0 - delta) - 1.0;
    let m0 = m0_of(k1, k2, delta);
    let ms = m_star_of(m0);
    let via_minimizer = delta * (m0 - ms) / (gamma2 * ms * (1.0 - 6.0 * ms));
    let root = m0.sqrt() + (m0 - 1.0 / 6.0).sqrt();
    let closed = 6.0 * delta / gamma2 * root * root;
    Ok((via_minimizer, closed))
}

/// Largest `d/r` for which `J <= 0` on the left piece.
pub fn h_star(params: &CompetitionParams, delta: f64) -> Result<f64> {
    let (first, second) = h_star_forms(params.k1(), params.k2(), delta)?;
    debug_assert!((first - second).abs() <= 1e-12 * second.abs().max(1.0));
    Ok(second)
}

/// Builds the piecewise supersolution. `delta = None` uses `delta3`, the
/// largest offset for which the corner condition holds.
/// Mismatch of `(phi')^2` at `phi = 1/k2` between the left piece
/// `(k1 - 1) phi^2 - (2/3)(k1 k2 - 1) phi^3` and the right piece
/// `-phi^2 + (2/3) phi^3 + 1/3` of the `d -> 0` standing wave. Vanishes exactly
/// at `k1 = k2^2` and increases strictly in `k1`. Generic so that it can be
/// evaluated in exact rational arithmetic.
pub fn matching_mismatch<T: Num + Copy>(k1: T, k2: T) -> T {
    let one = T::one();
    let two = one + one;
    let three = two + one;
    let inv2 = one / (k2 * k2);
    let inv3 = inv2 / k2;
    let left = (k1 - one) * inv2 - two * (k1 * k2 - one) * inv3 / three;
    let right = two * inv3 / three + one / three - inv2;
    left - right
}

pub fn degenerate_build(
    params: &CompetitionParams,
    delta: Option<f64>,
) -> Result<DegenerateSupersol> {
    let (k1, k2) = (params.k1(), params.k2());
    if !(k1 > k2 * k2) {
        return Err(Error::DegeneratePrecondition(format!(
            "k1 > k2^2 (k1 = {k1}, k2^2 = {})",
            k2 * k2
        )));
    }
    let delta = delta.unwrap_or_else(|| delta_limits(k1, k2).1);
    check_delta(k1, k2, delta)?;

    let gamma = (k1 * (1.0 - delta) - 1.0).sqrt();
    let beta = 6.0 * gamma * gamma / (k1 * k2 - 1.0);
    let m0 = m0_of(k1, k2, delta);
    if !(m0 > 1.0 / 6.0 && m0 <= 0.25) {
        return Err(Error::InadmissibleDelta {
            delta,
            reason: format!("m0 = {m0} outside (1/6, 1/4]"),
        });
    }
    let m_star = m_star_of(m0);

    // mu(0) is the root of mu (1 - mu) = m0 below 1/2, so that xi > 0
    let mu0 = 0.5 * (1.0 - (1.0 - 4.0 * m0).max(0.0).sqrt());
    let xi = ((1.0 - mu0) / mu0).ln() / gamma;

    // lambda(0) > 1/2 solves 1 - 6 lambda (1 - lambda) = phi(0), so eta < 0
    let phi0 = (1.0 - delta) / k2;
    let lam0 = 0.5 * (1.0 + (1.0 - 4.0 * (1.0 - phi0) / 6.0).sqrt());
    let eta = -(lam0 / (1.0 - lam0)).ln();

    Ok(DegenerateSupersol {
        k1,
        k2,
        delta,
        gamma,
        beta,
        xi,
        eta,
        m0,
        m_star,
    })
}

impl DegenerateSupersol {
    fn mu(&self, x: f64) -> f64 {
        logistic(self.gamma * (x - self.xi))
    }

    fn lambda(&self, x: f64) -> f64 {
        logistic(x - self.eta)
    }

    pub fn phi(&self, x: f64) -> f64 {
        if x < 0.0 {
            let mu = self.mu(x);
            self.beta * mu * (1.0 - mu)
        } else {
            let lam = self.lambda(x);
            1.0 - 6.0 * lam * (1.0 - lam)
        }
    }

    pub fn psi(&self, x: f64) -> f64 {
        if x < 0.0 {
            self.k2 * self.phi(x) + self.delta
        } else {
            1.0
        }
    }

    /// `phi'` by differentiating the explicit pieces (one-sided at 0).
    pub fn dphi(&self, x: f64, left: bool) -> f64 {
        if x < 0.0 || (x == 0.0 && left) {
            let mu = self.mu(x);
            self.beta * self.gamma * mu * (1.0 - mu) * (1.0 - 2.0 * mu)
        } else {
            let lam = self.lambda(x);
            -6.0 * lam * (1.0 - lam) * (1.0 - 2.0 * lam)
        }
    }

    /// `phi''` by differentiating the explicit pieces.
    pub fn ddphi(&self, x: f64) -> f64 {
        if x < 0.0 {
            let mu = self.mu(x);
            let w = mu * (1.0 - mu);
            self.beta * self.gamma * self.gamma * w * (1.0 - 6.0 * w)
        } else {
            let lam = self.lambda(x);
            let w = lam * (1.0 - lam);
            -6.0 * w * (1.0 - 6.0 * w)
        }
    }

    /// Value of `phi(0)` from the continuity condition.
    pub fn phi0(&self) -> f64 {
        (1.0 - self.delta) / self.k2
    }

    /// One-sided slopes `(phi'(0-), phi'(0+))` from the first integrals of the two pieces.
    pub fn corner_slopes(&self) -> (f64, f64) {
        let y = self.phi0();
        let left = (self.k1 * (1.0 - self.delta) - 1.0) * y * y
            - 2.0 / 3.0 * (self.k1 * self.k2 - 1.0) * y.powi(3);
        let right = -y * y + 2.0 / 3.0 * y.powi(3) + 1.0 / 3.0;
        (left.max(0.0).sqrt(), right.max(0.0).sqrt())
    }

    /// Position on the left piece where `phi = m_star beta`, the minimizer of `H`.
    pub fn h_minimizer_position(&self) -> f64 {
        let mu = 0.5 * (1.0 - (1.0 - 4.0 * self.m_star).sqrt());
        self.xi + (mu / (1.0 - mu)).ln() / self.gamma
    }
}

/// Grid spacing for degenerate residual sweeps.
const GRID_STEP: f64 = 1.0 / 256.0;

/// Certifies the piecewise pair for `params`: `I` and `J` on a grid covering
/// both pieces (plus the minimizer of `H`) and both corner conditions.
pub fn degenerate_residuals(
    ds: &DegenerateSupersol,
    params: &CompetitionParams,
    tol: f64,
) -> Result<ResidualReport> {
    if params.k1() != ds.k1 || params.k2() != ds.k2 {
        return Err(Error::DegeneratePrecondition(
            "parameters do not match the constructed supersolution".into(),
        ));
    }
    let left_span = 40.0 / ds.gamma;
    let right_span = 40.0;
    let n_left = (left_span / GRID_STEP).ceil() as usize;
    let n_right = (right_span / GRID_STEP).ceil() as usize;
    let mut xs: Vec<f64> = (1..=n_left)
        .rev()
        .map(|i| -(i as f64) * GRID_STEP)
        .collect();
    xs.push(ds.h_minimizer_position());
    xs.extend((0..=n_right).map(|i| i as f64 * GRID_STEP));
    xs.sort_by(f64::total_cmp);

    let ratio = params.ratio();
    let i_vals: Vec<f64> = xs
        .iter()
        .map(|&x| ds.ddphi(x) + params.reaction_f(ds.phi(x), ds.psi(x)))
        .collect();
    let j_vals: Vec<f64> = xs
        .iter()
        .map(|&x| {
            let dd_psi = if x < 0.0 { ds.k2 * ds.ddphi(x) } else { 0.0 };
            ratio * dd_psi + params.reaction_g(ds.phi(x), ds.psi(x))
        })
        .collect();
    let (max_i, max_i_at) = argmax(&xs, i_vals.into_iter());
    let (max_j, max_j_at) = argmax(&xs, j_vals.into_iter());

    let (left, right) = ds.corner_slopes();
    Ok(ResidualReport {
        max_i,
        max_i_at,
        max_j,
        max_j_at,
        jump_phi: Some(left - right),
        // psi'(0-) = k2 phi'(0-), psi'(0+) = 0
        jump_psi: Some(ds.k2 * left),
        tol,
        certified: false,
    }
    .finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(d: f64, k1: f64, k2: f64) -> CompetitionParams {
        CompetitionParams::new(d, 1.0, k1, k2).unwrap()
    }

    #[test]
    fn auto_delta_constants() {
        let q = params(0.05, 8.0, 2.0);
        let ds = degenerate_build(&q, None).unwrap();
        let kappa = 16f64.cbrt();
        assert!((ds.delta - (1.0 - 0.5f64.cbrt())).abs() < 1e-15);
        let m0 = (kappa * kappa + kappa + 1.0) / (6.0 * kappa * (kappa + 1.0));
        assert!((ds.m0 - m0).abs() < 1e-12);
        assert!(ds.m0 > 1.0 / 6.0 && ds.m_star < 1.0 / 6.0);
        assert!(ds.xi > 0.0 && ds.eta < 0.0);
        assert!((ds.phi(-1e-300) - ds.phi0()).abs() < 1e-12);
        assert!((ds.phi(0.0) - ds.phi0()).abs() < 1e-12);
        assert!((ds.psi(-1e-300) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn corner_slopes_match_explicit_derivatives() {
        let q = params(0.05, 8.0, 2.0);
        for delta in [0.05, 0.15, 0.2] {
            let ds = degenerate_build(&q, Some(delta)).unwrap();
            let (left, right) = ds.corner_slopes();
            assert!((left - ds.dphi(0.0, true)).abs() < 1e-12);
            assert!((right - ds.dphi(0.0, false)).abs() < 1e-12);
        }
    }

    #[test]
    fn certification_against_h_star() {
        let good = degenerate_residuals(
            &degenerate_build(&params(0.05, 8.0, 2.0), None).unwrap(),
            &params(0.05, 8.0, 2.0),
            1e-8,
        )
        .unwrap();
        assert!(good.certified, "{good:?}");
        assert!(good.max_i.abs() < 1e-12);
        assert!(good.jump_psi.unwrap() > 0.0);

        let q = params(0.1, 8.0, 2.0);
        let bad = degenerate_residuals(&degenerate_build(&q, None).unwrap(), &q, 1e-8).unwrap();
        assert!(!bad.certified);
        assert!(bad.max_j > 1e-8 && bad.max_j_at < 0.0);
    }

    #[test]
    fn corner_fails_beyond_delta3() {
        let q = params(0.01, 8.0, 2.0);
        let (delta2, delta3) = delta_limits(8.0, 2.0);
        assert!(delta3 < delta2);
        let ds = degenerate_build(&q, Some(0.5 * (delta3 + delta2))).unwrap();
        let report = degenerate_residuals(&ds, &q, 1e-8).unwrap();
        assert!(report.jump_phi.unwrap() < -1e-8);
        assert!(!report.certified);
    }

    #[test]
    fn build_errors() {
        assert!(degenerate_build(&params(0.05, 4.0, 2.0), None).is_err());
        let (delta2, _) = delta_limits(8.0, 2.0);
        assert!(degenerate_build(&params(0.05, 8.0, 2.0), Some(delta2)).is_err());
        assert!(degenerate_build(&params(0.05, 8.0, 2.0), Some(0.0)).is_err());
        assert!(h_star(&params(0.05, 8.0, 2.0), 1.5).is_err());
    }

    #[test]
    fn h_star_regression() {
        let q = params(0.05, 8.0, 2.0);
        let (_, delta3) = delta_limits(8.0, 2.0);
        let (a, b) = h_star_forms(8.0, 2.0, delta3).unwrap();
        assert!((a - b).abs() < 1e-12);
        let bound = crate::theory::degenerate_ratio_bound(8.0, 2.0).unwrap();
        assert!((b - bound).abs() < 1e-12);
        assert!((h_star(&q, delta3).unwrap() - 0.0746).abs() < 1e-4);
    }

    #[test]
    fn matching_mismatch_values() {
        assert_eq!(matching_mismatch(4.0, 2.0), 0.0);
        assert!((matching_mismatch(5.0_f64, 2.0) - 1.0 / 12.0).abs() < 1e-15);
        assert!(matching_mismatch(3.9, 2.0) < 0.0);
    }
}
