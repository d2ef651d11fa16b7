//! Parameter containers, equilibria, reaction terms and the transforms between
//! the competitive system, its alternative `(alpha, beta, gamma)` form, and
//! the cooperative system `(u, v) = (U, 1 - V)`.

use crate::error::{Error, Result};

/// Parameters `(d, r, k1, k2)` of the competition system under strong competition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompetitionParams {
    d: f64,
    r: f64,
    k1: f64,
    k2: f64,
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        });
    }
    if value <= 0.0 {
        return Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive",
        });
    }
    Ok(value)
}

impl CompetitionParams {
    /// Validates `(d, r, k1, k2)`. Inequalities are strict with no epsilon.
    pub fn new(d: f64, r: f64, k1: f64, k2: f64) -> Result<Self> {
        let d = positive("d", d)?;
        let r = positive("r", r)?;
        let k1 = positive("k1", k1)?;
        let k2 = positive("k2", k2)?;
        if !(k1 > 1.0 && k2 > 1.0) {
            return Err(Error::StrongCompetitionViolated { k1, k2 });
        }
        Ok(Self { d, r, k1, k2 })
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }

    pub fn k2(&self) -> f64 {
        self.k2
    }

    /// The ratio `d / r`, which is all the stationary criteria depend on.
    pub fn ratio(&self) -> f64 {
        self.d / self.r
    }

    /// Coexistence state `(U*, V*)` of the competitive system.
    pub fn coexistence(&self) -> (f64, f64) {
        let denom = self.k1 * self.k2 - 1.0;
        ((self.k1 - 1.0) / denom, (self.k2 - 1.0) / denom)
    }

    pub fn equilibria(&self) -> Equilibria {
        Equilibria {
            stable_a: (0.0, 1.0),
            stable_b: (1.0, 0.0),
            trivial: (0.0, 0.0),
            coexistence: self.coexistence(),
        }
    }

    /// `f(u, v) = u (1 - u - k1 (1 - v))`, defined for all real arguments.
    pub fn reaction_f(&self, u: f64, v: f64) -> f64 {
        u * (1.0 - u - self.k1 * (1.0 - v))
    }

    /// `g(u, v) = (1 - v) (k2 u - v)`, defined for all real arguments.
    pub fn reaction_g(&self, u: f64, v: f64) -> f64 {
        (1.0 - v) * (self.k2 * u - v)
    }

    /// Exchanges the roles of the two species: `(1/d, 1/r, k2, k1)`.
    pub fn reflect(&self) -> Self {
        Self {
            d: 1.0 / self.d,
            r: 1.0 / self.r,
            k1: self.k2,
            k2: self.k1,
        }
    }

    /// `r = 1` and `k1 = k2`, compared exactly.
    pub fn is_symmetric(&self) -> bool {
        self.r == 1.0 && self.k1 == self.k2
    }

    pub fn to_lv1(&self) -> Lv1Params {
        Lv1Params {
            d: self.d,
            alpha: self.r,
            beta: self.r * self.k2,
            gamma: self.k1 / self.r,
        }
    }
}

/// The four constant states of the competitive system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibria {
    pub stable_a: (f64, f64),
    pub stable_b: (f64, f64),
    pub trivial: (f64, f64),
    pub coexistence: (f64, f64),
}

/// Parameters of the alternative form
/// `U_t = U_xx + U(1 - U - gamma V)`, `V_t = d V_xx + V(alpha - beta U - V)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lv1Params {
    pub d: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Lv1Params {
    pub fn new(d: f64, alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let d = positive("d", d)?;
        let alpha = positive("alpha", alpha)?;
        let beta = positive("beta", beta)?;
        let gamma = positive("gamma", gamma)?;
        if !(1.0 / gamma < alpha && alpha < beta) {
            return Err(Error::InvalidLv1 { alpha, beta, gamma });
        }
        Ok(Self {
            d,
            alpha,
            beta,
            gamma,
        })
    }

    /// `r = alpha`, `k1 = alpha gamma`, `k2 = beta / alpha`.
    pub fn to_lv2(&self) -> Result<CompetitionParams> {
        CompetitionParams::new(
            self.d,
            self.alpha,
            self.alpha * self.gamma,
            self.beta / self.alpha,
        )
    }
}

/// `(U, V) -> (U, 1 - V)`. The map is its own inverse.
pub fn to_cooperative(u_big: f64, v_big: f64) -> (f64, f64) {
    (u_big, 1.0 - v_big)
}

/// Inverse of [`to_cooperative`].
pub fn from_cooperative(u: f64, v: f64) -> (f64, f64) {
    (u, 1.0 - v)
}

/// Coexistence state `(u*, v*)` in cooperative coordinates.
pub fn cooperative_coexistence(params: &CompetitionParams) -> (f64, f64) {
    let denom = params.k1() * params.k2() - 1.0;
    (
        (params.k1() - 1.0) / denom,
        params.k2() * (params.k1() - 1.0) / denom,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(d: f64, r: f64, k1: f64, k2: f64) -> CompetitionParams {
        CompetitionParams::new(d, r, k1, k2).unwrap()
    }

    #[test]
    fn validation() {
        assert!(CompetitionParams::new(1.0, 1.0, 2.0, 2.0).is_ok());
        let err = CompetitionParams::new(1.0, 1.0, 1.0, 2.0).unwrap_err();
        assert!(err.to_string().contains("strong competition violated"));
        assert!(CompetitionParams::new(11.0 / 2.0, 1.0, 11.0 / 6.0, 11.0 / 6.0).is_ok());
        assert!(CompetitionParams::new(0.0, 1.0, 2.0, 2.0).is_err());
        assert!(CompetitionParams::new(1.0, -1.0, 2.0, 2.0).is_err());
        assert!(CompetitionParams::new(f64::NAN, 1.0, 2.0, 2.0).is_err());
        assert!(CompetitionParams::new(1.0, 1.0, f64::INFINITY, 2.0).is_err());
        assert!(CompetitionParams::new(1.0, 1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn coexistence_values() {
        let (u, v) = p(1.0, 1.0, 2.0, 2.0).coexistence();
        assert!((u - 1.0 / 3.0).abs() < 1e-15 && (v - 1.0 / 3.0).abs() < 1e-15);

        let q = p(1.0, 1.0, 2.0, 4.0);
        let (u, v) = q.coexistence();
        assert!((u - 1.0 / 7.0).abs() < 1e-15);
        assert!((v - 3.0 / 7.0).abs() < 1e-15);
        assert!(q.reaction_f(u, 1.0 - v).abs() < 1e-15);
        assert!(q.reaction_g(u, 1.0 - v).abs() < 1e-15);

        let (u, v) = p(3.0, 0.5, 2.7, 2.7).coexistence();
        assert_eq!(u, v);
    }

    #[test]
    fn reaction_terms() {
        let q = p(1.0, 1.0, 3.0, 2.0);
        assert_eq!(q.reaction_f(0.0, 0.7), 0.0);
        assert_eq!(q.reaction_f(1.0, 1.0), 0.0);
        assert_eq!(q.reaction_g(1.0, 1.0), 0.0);
        assert_eq!(q.reaction_g(0.3, 1.0), 0.0);
        assert!((q.reaction_g(0.5, 0.5) - 0.25).abs() < 1e-15);
        // no clamping outside [0, 1]
        assert!(q.reaction_f(1.2, 1.0) < 0.0);
        assert!((q.reaction_g(0.0, 1.5) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn cooperative_transform() {
        assert_eq!(to_cooperative(0.0, 1.0), (0.0, 0.0));
        assert_eq!(to_cooperative(1.0, 0.0), (1.0, 1.0));
        let q = p(1.0, 1.0, 2.0, 4.0);
        let (ub, vb) = q.coexistence();
        let (u, v) = to_cooperative(ub, vb);
        let (us, vs) = cooperative_coexistence(&q);
        assert!((u - us).abs() < 1e-15 && (v - vs).abs() < 1e-15);
        assert_eq!(from_cooperative(u, v), (ub, 1.0 - (1.0 - vb)));
    }

    #[test]
    fn lv1_correspondence() {
        let lv1 = Lv1Params::new(1.0, 2.0, 6.0, 1.0).unwrap();
        let lv2 = lv1.to_lv2().unwrap();
        assert_eq!((lv2.r(), lv2.k1(), lv2.k2()), (2.0, 2.0, 3.0));

        let lv2 = Lv1Params::new(0.7, 1.0, 3.5, 2.5)
            .unwrap()
            .to_lv2()
            .unwrap();
        assert_eq!((lv2.r(), lv2.k1(), lv2.k2()), (1.0, 2.5, 3.5));

        // alpha <= 1/gamma violates the LV1 condition and k1 > 1 alike
        assert!(Lv1Params::new(1.0, 0.5, 6.0, 2.0).is_err());
        assert!(CompetitionParams::new(1.0, 0.5, 0.5 * 2.0, 6.0 / 0.5).is_err());
    }

    #[test]
    fn reflect_is_involution() {
        let q = p(2.0, 1.0, 3.0, 2.0);
        let refl = q.reflect();
        assert_eq!(
            (refl.d(), refl.r(), refl.k1(), refl.k2()),
            (0.5, 1.0, 2.0, 3.0)
        );
        assert_eq!(refl.reflect(), q);
        let s = p(1.0, 1.0, 2.5, 2.5);
        assert_eq!(s.reflect(), s);
    }
}
