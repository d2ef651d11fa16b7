//! Explicit sufficient conditions for the sign of the wave speed.
//!
//! Every predicate here is a sharp-edged sufficient condition: inequalities are
//! evaluated exactly as stated (strict or non-strict) with no tolerance padding.
//! Positive-speed conditions are obtained from negative-speed ones through the
//! reflection identity `c(d, r, k1, k2) = -sqrt(d r) c(1/d, 1/r, k2, k1)`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::model::CompetitionParams;

/// Which sign a criterion proves when it holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarity {
    Negative,
    Positive,
}

impl Polarity {
    pub fn flip(self) -> Self {
        match self {
            Polarity::Negative => Polarity::Positive,
            Polarity::Positive => Polarity::Negative,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CriterionId {
    N1,
    N2,
    Neg3,
    Pos1,
    S1,
    S2,
    DegNeg,
    DegPos,
    PriorI,
    PriorII,
    PriorIII,
    PriorVII,
    PriorVIII,
}

impl CriterionId {
    pub const ALL: [CriterionId; 13] = [
        CriterionId::N1,
        CriterionId::N2,
        CriterionId::Neg3,
        CriterionId::Pos1,
        CriterionId::S1,
        CriterionId::S2,
        CriterionId::DegNeg,
        CriterionId::DegPos,
        CriterionId::PriorI,
        CriterionId::PriorII,
        CriterionId::PriorIII,
        CriterionId::PriorVII,
        CriterionId::PriorVIII,
    ];

    pub const PRIORS: [CriterionId; 5] = [
        CriterionId::PriorI,
        CriterionId::PriorII,
        CriterionId::PriorIII,
        CriterionId::PriorVII,
        CriterionId::PriorVIII,
    ];

    pub fn polarity(self) -> Polarity {
        match self {
            CriterionId::Pos1 | CriterionId::DegPos => Polarity::Positive,
            _ => Polarity::Negative,
        }
    }

    /// Short label used in reports and as CSV column name.
    pub fn label(self) -> &'static str {
        match self {
            CriterionId::N1 => "N1",
            CriterionId::N2 => "N2",
            CriterionId::Neg3 => "neg3",
            CriterionId::Pos1 => "pos1",
            CriterionId::S1 => "S1",
            CriterionId::S2 => "S2",
            CriterionId::DegNeg => "degenerate",
            CriterionId::DegPos => "degenerate-pos",
            CriterionId::PriorI => "prior-i",
            CriterionId::PriorII => "prior-ii",
            CriterionId::PriorIII => "prior-iii",
            CriterionId::PriorVII => "prior-vii",
            CriterionId::PriorVIII => "prior-viii",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.label() == label)
    }

    pub fn is_prior(self) -> bool {
        Self::PRIORS.contains(&self)
    }
}

impl fmt::Display for CriterionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A criterion that held, possibly on the reflected parameter tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Firing {
    pub criterion: CriterionId,
    pub reflected: bool,
}

impl Firing {
    pub fn polarity(&self) -> Polarity {
        if self.reflected {
            self.criterion.polarity().flip()
        } else {
            self.criterion.polarity()
        }
    }
}

impl fmt::Display for Firing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.reflected {
            write!(f, "{} (reflected)", self.criterion)
        } else {
            write!(f, "{}", self.criterion)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Negative,
    Positive,
    Inconclusive,
}

impl Sign {
    pub fn flip(self) -> Self {
        match self {
            Sign::Negative => Sign::Positive,
            Sign::Positive => Sign::Negative,
            Sign::Inconclusive => Sign::Inconclusive,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sign::Negative => "negative",
            Sign::Positive => "positive",
            Sign::Inconclusive => "inconclusive",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "negative" => Some(Sign::Negative),
            "positive" => Some(Sign::Positive),
            "inconclusive" => Some(Sign::Inconclusive),
            _ => None,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Combined classification. `fired` is empty iff `sign` is inconclusive and
/// never mixes polarities.
#[derive(Debug, Clone, PartialEq)]
pub struct SignVerdict {
    pub sign: Sign,
    pub fired: Vec<Firing>,
    /// Whether any firing came from the reflected tuple.
    pub reflected: bool,
}

/// Bracket `k_lower < k* < k_upper` of the zero-speed threshold in `k1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdBounds {
    pub k_lower: f64,
    pub k_upper: f64,
}

/// `m(k) = (sqrt(24k + 1) - 3) / 2` for `k >= 1`.
pub fn m_of_k(k: f64) -> Result<f64> {
    if !(k >= 1.0) || !k.is_finite() {
        return Err(Error::InvalidParameter {
            name: "k",
            value: k,
            reason: "m(k) is defined for k >= 1",
        });
    }
    Ok(m(k))
}

#[inline]
pub(crate) fn m(k: f64) -> f64 {
    ((24.0 * k + 1.0).sqrt() - 3.0) / 2.0
}

/// Lower bound on `d/r` in (N1), or `None` when `k1 < m(k2)`.
pub fn n1_ratio_bound(k1: f64, k2: f64) -> Option<f64> {
    let mk2 = m(k2);
    if k1 < mk2 {
        return None;
    }
    let bound = if k1 < 2.0 {
        6.0 * k1 * k1 / ((k1 - 1.0).powi(2) * (k1 + 4.0)) * (k2 - 1.0)
    } else if k2 <= 2.0 {
        4.0 / (k1 - 1.0) * (k2 - 1.0)
    } else {
        2.0 * k2 * mk2 / (2.0 * k1 - mk2)
    };
    Some(bound)
}

/// Open interval `(lower, upper)` for `d/r` in (N2), or `None` when the
/// criterion cannot hold for any ratio.
pub fn n2_ratio_interval(k1: f64, k2: f64) -> Option<(f64, f64)> {
    let mk2 = m(k2);
    if !(1.0 < k1 && k1 < mk2) {
        return None;
    }
    let upper = mk2 * (k2 - 1.0) / (mk2 - k1);
    let lower = if k2 <= 2.0 {
        mk2 * mk2 / (k1 - 1.0)
    } else {
        // the supersolution also needs p = m(k2) < 2 k1
        if 2.0 * k1 <= mk2 {
            return None;
        }
        2.0 * k2 * mk2 / (2.0 * k1 - mk2)
    };
    Some((lower, upper))
}

pub fn criterion_n1(params: &CompetitionParams) -> bool {
    n1_ratio_bound(params.k1(), params.k2()).is_some_and(|b| params.ratio() > b)
}

pub fn criterion_n2(params: &CompetitionParams) -> bool {
    n2_ratio_interval(params.k1(), params.k2())
        .is_some_and(|(lo, hi)| lo < params.ratio() && params.ratio() < hi)
}

/// Infimum over `k1` of the (neg3) region for the given `d/r` and `k2`.
pub fn neg3_threshold(ratio: f64, k2: f64) -> f64 {
    if k2 <= 2.0 {
        f64::max(2.0, 1.0 + 4.0 / ratio * (k2 - 1.0))
    } else {
        m(k2) * f64::max(1.0, 0.5 + k2 / ratio)
    }
}

/// Supremum over `k1 - 1` of the (pos1) region for the given `d/r` and `k2`.
pub fn pos1_excess(ratio: f64, k2: f64) -> f64 {
    if k2 <= 2.0 {
        (k2 - 1.0) * (k2 + 4.0) / 6.0 * f64::min(1.0, (k2 - 1.0) / (ratio * k2 * k2))
    } else {
        (k2 - 1.0) * f64::min((k2 + 4.0) / 6.0, 1.0 / (4.0 * ratio))
    }
}

pub fn corollary_neg3(params: &CompetitionParams) -> bool {
    params.k1() > neg3_threshold(params.ratio(), params.k2())
}

pub fn corollary_pos1(params: &CompetitionParams) -> bool {
    let excess = params.k1() - 1.0;
    0.0 < excess && excess < pos1_excess(params.ratio(), params.k2())
}

/// (S1) and (S2) for the symmetric system `r = 1`, `k1 = k2 = k`.
pub fn criterion_s1_s2(d: f64, k: f64) -> (bool, bool) {
    if !(d > 0.0 && k > 1.0) {
        return (false, false);
    }
    let mk = m(k);
    let s1 = k >= 2.0 && d > 2.0 * k * mk / (2.0 * k - mk);
    let s2 = 1.0 < k && k < 2.0 && mk * mk / (k - 1.0) < d && d < mk * (k - 1.0) / (mk - k);
    (s1, s2)
}

/// Upper bound on `d/r` of the small-diffusion criterion, or `None` unless `k1 > k2^2`.
pub fn degenerate_ratio_bound(k1: f64, k2: f64) -> Option<f64> {
    if !(k1 > k2 * k2) {
        return None;
    }
    let kappa = (k1 * k2).cbrt();
    let lead = 1.0 - k1.powf(-1.0 / 3.0) * k2.powf(2.0 / 3.0);
    let root = (kappa * kappa + kappa + 1.0).sqrt() + 1.0;
    Some(lead * root * root / (kappa * (kappa - 1.0) * (kappa + 1.0).powi(2)))
}

pub fn criterion_degenerate(params: &CompetitionParams) -> bool {
    degenerate_ratio_bound(params.k1(), params.k2()).is_some_and(|b| params.ratio() < b)
}

fn prior_vii(d: f64, k: f64) -> bool {
    let q = 3.0 * k - 1.0;
    let first = k - d * (k - 1.0) / q;
    let second = 4.0 * d * (k - 1.0) / (q * q)
        + (2.0 * d * (k + 1.0) / (q * q) - k).floor() * (k * (5.0 - 3.0 * k) / 2.0).floor();
    f64::max(first, second) < 1.0
}

/// Previously known negative-speed regions for the symmetric system.
/// The limiting regions without quantitative data are not represented.
pub fn prior_regions(d: f64, k: f64) -> BTreeMap<CriterionId, bool> {
    let mut out = BTreeMap::new();
    let valid = d > 0.0 && k > 1.0;
    // isolated point (11/2, 11/6); the products are exact for the nearest doubles
    let i = valid && 2.0 * d == 11.0 && 6.0 * k == 11.0;
    let ii = valid && d == 4.0 && 4.0 * k >= 5.0 && 3.0 * k <= 4.0;
    let iii = valid && {
        let excluded = (d * (k - 1.0) - 2.0 * k).abs() <= 8.0 * f64::EPSILON * 2.0 * k;
        3.0 * k > 5.0 && k < 2.0 && 4.0 < d && d * (k - 1.0) < 4.0 && !excluded
    };
    let vii = valid && prior_vii(d, k);
    let viii = valid && 3.0 * k > 5.0 && k < 2.0 && 4.0 < d && d * (2.0 - k) < 2.0;
    out.insert(CriterionId::PriorI, i);
    out.insert(CriterionId::PriorII, ii);
    out.insert(CriterionId::PriorIII, iii);
    out.insert(CriterionId::PriorVII, vii);
    out.insert(CriterionId::PriorVIII, viii);
    out
}

/// Direct (unreflected) evaluation of every criterion. S1, S2 and the prior
/// regions only apply to the symmetric system and are `false` elsewhere.
pub fn evaluate_all(params: &CompetitionParams) -> BTreeMap<CriterionId, bool> {
    let mut out = BTreeMap::new();
    out.insert(CriterionId::N1, criterion_n1(params));
    out.insert(CriterionId::N2, criterion_n2(params));
    out.insert(CriterionId::Neg3, corollary_neg3(params));
    out.insert(CriterionId::Pos1, corollary_pos1(params));
    out.insert(CriterionId::DegNeg, criterion_degenerate(params));
    out.insert(CriterionId::DegPos, criterion_degenerate(&params.reflect()));
    let symmetric = params.is_symmetric();
    let (s1, s2) = if symmetric {
        criterion_s1_s2(params.d(), params.k1())
    } else {
        (false, false)
    };
    out.insert(CriterionId::S1, s1);
    out.insert(CriterionId::S2, s2);
    for (id, hit) in prior_regions(params.d(), params.k1()) {
        out.insert(id, symmetric && hit);
    }
    out
}

/// Criteria re-evaluated on the reflected tuple. The degenerate pair is left
/// out because [`CriterionId::DegPos`] already is the reflected degenerate test.
/// (pos1) is included: for `k1 > 2` it reaches beyond reflected (N1).
const REFLECTABLE: [CriterionId; 11] = [
    CriterionId::N1,
    CriterionId::N2,
    CriterionId::Neg3,
    CriterionId::Pos1,
    CriterionId::S1,
    CriterionId::S2,
    CriterionId::PriorI,
    CriterionId::PriorII,
    CriterionId::PriorIII,
    CriterionId::PriorVII,
    CriterionId::PriorVIII,
];

/// Combines every criterion into a verdict.
///
/// Returns [`Error::PolarityConflict`] if criteria of both polarities fire,
/// which cannot happen for correct sufficient conditions.
pub fn classify(params: &CompetitionParams) -> Result<SignVerdict> {
    let mut fired: Vec<Firing> = evaluate_all(params)
        .into_iter()
        .filter(|&(_, hit)| hit)
        .map(|(criterion, _)| Firing {
            criterion,
            reflected: false,
        })
        .collect();
    let mirrored = evaluate_all(&params.reflect());
    fired.extend(
        REFLECTABLE
            .iter()
            .filter(|id| mirrored[id])
            .map(|&criterion| Firing {
                criterion,
                reflected: true,
            }),
    );

    let (negative, positive): (Vec<Firing>, Vec<Firing>) = fired
        .iter()
        .partition(|f| f.polarity() == Polarity::Negative);
    if !negative.is_empty() && !positive.is_empty() {
        return Err(Error::PolarityConflict {
            negative: negative.iter().map(ToString::to_string).collect(),
            positive: positive.iter().map(ToString::to_string).collect(),
        });
    }
    let sign = if !negative.is_empty() {
        Sign::Negative
    } else if !positive.is_empty() {
        Sign::Positive
    } else {
        Sign::Inconclusive
    };
    let reflected = fired.iter().any(|f| f.reflected);
    Ok(SignVerdict {
        sign,
        fired,
        reflected,
    })
}

/// Bracket of the threshold `k*(d, r, k2)` from (neg3) and (pos1).
pub fn kstar_bounds(d: f64, r: f64, k2: f64) -> Result<ThresholdBounds> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "d",
            value: d,
            reason: "must be positive",
        });
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "r",
            value: r,
            reason: "must be positive",
        });
    }
    if !(k2 > 1.0 && k2.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "k2",
            value: k2,
            reason: "must exceed 1",
        });
    }
    let ratio = d / r;
    Ok(ThresholdBounds {
        k_lower: 1.0 + pos1_excess(ratio, k2),
        k_upper: neg3_threshold(ratio, k2),
    })
}

/// Determinacy thresholds `1 < k1_star < k1_dstar` for a fixed `k2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeterminacyThresholds {
    /// Speed is positive for every `d, r` when `1 < k1 <= k1_star`.
    pub k1_star: f64,
    /// Speed is negative for every `d, r` when `k1 >= k1_dstar`.
    pub k1_dstar: f64,
}

const COVERAGE_REL_TOL: f64 = 1e-6;

/// Log-uniform ratio samples over `[1e-6, 1e6]`, 20 per decade.
fn ratio_samples() -> impl Iterator<Item = f64> {
    (0..=240).map(|i| 10f64.powf(-6.0 + i as f64 / 20.0))
}

/// Whether {N1, N2, degenerate} together cover every `d/r > 0` at `(k1, k2)`.
///
/// The (N1) region is `d/r > b1(k1)` and the degenerate region is
/// `d/r < b0(k1)`, so coverage is the single inequality `b1 < b0`. The
/// sampled sweep double-checks it through the public predicates.
pub fn covers_all_ratios(k1: f64, k2: f64) -> bool {
    let analytic = match (n1_ratio_bound(k1, k2), degenerate_ratio_bound(k1, k2)) {
        (Some(b1), Some(b0)) => b1 < b0,
        _ => false,
    };
    analytic
        && ratio_samples().all(|ratio| {
            CompetitionParams::new(ratio, 1.0, k1, k2)
                .is_ok_and(|p| criterion_n1(&p) || criterion_n2(&p) || criterion_degenerate(&p))
        })
}

fn bisect(mut good: f64, mut bad: f64, covered: impl Fn(f64) -> bool) -> f64 {
    while (good - bad).abs() > COVERAGE_REL_TOL * good.abs().max(bad.abs()) {
        let mid = 0.5 * (good + bad);
        if covered(mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    good
}

/// Estimates of the determinacy thresholds reachable with the criteria in this
/// module. Being built from sufficient conditions, `k1_dstar` over-estimates
/// and `k1_star` under-estimates the true thresholds.
pub fn determinacy_thresholds(k2: f64, search_cap: f64) -> Result<DeterminacyThresholds> {
    if !(k2 > 1.0 && k2.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "k2",
            value: k2,
            reason: "must exceed 1",
        });
    }
    let negative = |k1: f64| covers_all_ratios(k1, k2);
    // with the roles swapped, k1 plays the part of k2
    let positive = |k1: f64| covers_all_ratios(k2, k1);

    // negative side: march upward from k2^2 until coverage, then bisect back
    let mut below = f64::max(k2 * k2, m(k2));
    let mut above = below * 1.05;
    while !negative(above) {
        below = above;
        above *= 1.05;
        if above > search_cap {
            return Err(Error::SearchCapExceeded { cap: search_cap });
        }
    }
    let k1_dstar = bisect(above, below, negative);

    // positive side: coverage holds as k1 -> 1+; march the excess k1 - 1 upward
    let mut excess = 1e-9;
    if !positive(1.0 + excess) {
        return Err(Error::SearchCapExceeded { cap: search_cap });
    }
    while positive(1.0 + 2.0 * excess) {
        excess *= 2.0;
        if 1.0 + excess > k1_dstar {
            return Err(Error::SearchCapExceeded { cap: search_cap });
        }
    }
    let k1_star = bisect(1.0 + excess, 1.0 + 2.0 * excess, positive);

    Ok(DeterminacyThresholds { k1_star, k1_dstar })
}
