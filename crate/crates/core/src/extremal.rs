//! Erasure and symmetric channels matched to a target `E0`, and the
//! extremality inequalities they satisfy after one polarization step.
//!
//! For a fixed `ρ > 0`, the BEC and the BSC with the same `E0(ρ)` as a given
//! channel bracket the `E0` of its minus transform (BEC below, BSC above). For
//! the plus transform the orientation depends on `ρ`: BSC below and BEC above
//! on `(0, 1] ∪ [2, ∞)`, reversed on `[1, 2]`, with all three values equal at
//! `ρ = 1` and `ρ = 2`.

use serde::Serialize;

use crate::channel::{
    g_inverse_gap, make_bec, make_bsc, z_rep, z_rho_from_e0, Bdmc, Rho, ZRep,
};
use crate::error::{Error, Result};
use crate::numeric::bisect_increasing;
use crate::transform::{e0_minus_formula, e0_plus_formula, le, zrep_minus, zrep_plus};

/// Equality tolerance at the regime boundaries `ρ ∈ {1, 2}`.
pub const BOUNDARY_TOL: f64 = 1e-10;
/// Slack for E0 targets slightly outside `[0, ρ]` because of rounding.
const TARGET_SLACK: f64 = 1e-12;

/// Orientation of the plus-side inequalities, named after the curvature of
/// `t ↦ h(ρ, g⁻¹(ρ, t), z)` that drives it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlusRegime {
    /// `ρ ∈ (0, 1) ∪ (2, ∞)`: BSC below, BEC above.
    Concave,
    /// `ρ ∈ (1, 2)`: BEC below, BSC above.
    Convex,
    /// `ρ ∈ {1, 2}`: all three coincide.
    Affine,
}

impl PlusRegime {
    pub fn of(rho: f64) -> Self {
        if rho == 1.0 || rho == 2.0 {
            PlusRegime::Affine
        } else if rho > 1.0 && rho < 2.0 {
            PlusRegime::Convex
        } else {
            PlusRegime::Concave
        }
    }
}

fn check_target(rho: Rho, e0_target: f64) -> Result<(Rho, f64)> {
    let rho = rho.require_positive()?;
    let r = rho.value();
    if !e0_target.is_finite() || e0_target < -TARGET_SLACK || e0_target > r + TARGET_SLACK {
        return Err(Error::TargetOutOfRange {
            target: e0_target,
            rho: r,
        });
    }
    Ok((rho, e0_target.clamp(0.0, r)))
}

/// Erasure probability of the BEC with `E0(ρ) = e0_target`, in closed form
/// `ε = (2^ρ·2^{−E0} − 1)/(2^ρ − 1)`.
pub fn matched_bec(rho: Rho, e0_target: f64) -> Result<f64> {
    let (rho, target) = check_target(rho, e0_target)?;
    matched_epsilon(rho, target)
}

fn matched_bsc_gap(rho: Rho, target: f64) -> f64 {
    if target <= 0.0 {
        return 1.0;
    }
    if target >= rho.value() {
        return 0.0;
    }
    g_inverse_gap(rho.value(), (-target).exp2())
}

fn matched_epsilon(rho: Rho, target: f64) -> Result<f64> {
    if target <= 0.0 {
        Ok(1.0)
    } else if target >= rho.value() {
        Ok(0.0)
    } else {
        z_rho_from_e0(rho, target)
    }
}

/// Crossover probability `p ∈ [0, ½]` of the BSC with `E0(ρ) = e0_target`.
pub fn matched_bsc(rho: Rho, e0_target: f64) -> Result<f64> {
    let (rho, target) = check_target(rho, e0_target)?;
    Ok(0.5 * matched_bsc_gap(rho, target))
}

/// The BEC and BSC sharing one `E0(ρ)` value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchedExtremes {
    pub rho: f64,
    pub e0_target: f64,
    pub bec_epsilon: f64,
    pub bsc_p: f64,
    /// `1 − 2p`.
    pub z_bsc: f64,
}

impl MatchedExtremes {
    pub fn new(rho: Rho, e0_target: f64) -> Result<Self> {
        let (rho, target) = check_target(rho, e0_target)?;
        let gap = matched_bsc_gap(rho, target);
        Ok(MatchedExtremes {
            rho: rho.value(),
            e0_target: target,
            bec_epsilon: matched_epsilon(rho, target)?,
            bsc_p: 0.5 * gap,
            z_bsc: 1.0 - gap,
        })
    }

    pub fn for_channel(rho: Rho, w: &Bdmc) -> Result<Self> {
        MatchedExtremes::new(rho, z_rep(w).e0(rho))
    }

    pub fn bec_rep(&self) -> ZRep {
        ZRep::bec(self.bec_epsilon).expect("matched epsilon is a probability")
    }

    pub fn bsc_rep(&self) -> ZRep {
        ZRep::point_gap(2.0 * self.bsc_p).expect("matched p is in [0, 1/2]")
    }

    pub fn bec(&self) -> Bdmc {
        make_bec(self.bec_epsilon).expect("matched epsilon is a probability")
    }

    pub fn bsc(&self) -> Bdmc {
        make_bsc(self.bsc_p).expect("matched p is in [0, 1/2]")
    }
}

/// E0 of one transform applied to the BEC pair, the actual pair, and the BSC pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Triple {
    pub bec: f64,
    pub actual: f64,
    pub bsc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremalityReport {
    pub rho: f64,
    pub regime: PlusRegime,
    pub matched: [MatchedExtremes; 2],
    pub minus: Triple,
    pub plus: Triple,
    /// `E0(BEC pair⁻) ≤ E0(W⁻)`.
    pub minus_lower: bool,
    /// `E0(W⁻) ≤ E0(BSC pair⁻)`.
    pub minus_upper: bool,
    /// Lower plus bound for the regime (BSC when concave, BEC when convex);
    /// at the boundary, `|E0(BSC pair⁺) − E0(W⁺)| ≤ BOUNDARY_TOL`.
    pub plus_lower: bool,
    /// Upper plus bound for the regime; at the boundary,
    /// `|E0(BEC pair⁺) − E0(W⁺)| ≤ BOUNDARY_TOL`.
    pub plus_upper: bool,
}

impl ExtremalityReport {
    pub fn holds(&self) -> bool {
        self.minus_lower && self.minus_upper && self.plus_lower && self.plus_upper
    }
}

fn plus_verdicts(regime: PlusRegime, t: &Triple) -> (bool, bool) {
    match regime {
        PlusRegime::Concave => (le(t.bsc, t.actual), le(t.actual, t.bec)),
        PlusRegime::Convex => (le(t.bec, t.actual), le(t.actual, t.bsc)),
        PlusRegime::Affine => (
            (t.bsc - t.actual).abs() <= BOUNDARY_TOL,
            (t.bec - t.actual).abs() <= BOUNDARY_TOL,
        ),
    }
}

pub fn theorem1_report(rho: Rho, w1: &Bdmc, w2: &Bdmc) -> Result<ExtremalityReport> {
    theorem1_from_reps(rho, &z_rep(w1), &z_rep(w2))
}

pub fn theorem1_from_reps(rho: Rho, r1: &ZRep, r2: &ZRep) -> Result<ExtremalityReport> {
    let rho = rho.require_positive()?;
    let m1 = MatchedExtremes::new(rho, r1.e0(rho))?;
    let m2 = MatchedExtremes::new(rho, r2.e0(rho))?;
    let (bec1, bec2) = (m1.bec_rep(), m2.bec_rep());
    let (bsc1, bsc2) = (m1.bsc_rep(), m2.bsc_rep());

    let minus = Triple {
        bec: e0_minus_formula(rho, &bec1, &bec2),
        actual: e0_minus_formula(rho, r1, r2),
        bsc: e0_minus_formula(rho, &bsc1, &bsc2),
    };
    let plus = Triple {
        bec: e0_plus_formula(rho, &bec1, &bec2),
        actual: e0_plus_formula(rho, r1, r2),
        bsc: e0_plus_formula(rho, &bsc1, &bsc2),
    };
    let regime = PlusRegime::of(rho.value());
    let (plus_lower, plus_upper) = plus_verdicts(regime, &plus);
    Ok(ExtremalityReport {
        rho: rho.value(),
        regime,
        matched: [m1, m2],
        minus,
        plus,
        minus_lower: le(minus.bec, minus.actual),
        minus_upper: le(minus.actual, minus.bsc),
        plus_lower,
        plus_upper,
    })
}

/// `lower ≤ actual ≤ upper` on the spread `X(W⁺) − X(W⁻)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpreadSandwich {
    pub bsc: f64,
    pub actual: f64,
    pub bec: f64,
    pub lower_holds: bool,
    pub upper_holds: bool,
}

impl SpreadSandwich {
    fn new(bsc: f64, actual: f64, bec: f64) -> Self {
        SpreadSandwich {
            bsc,
            actual,
            bec,
            lower_holds: le(bsc, actual),
            upper_holds: le(actual, bec),
        }
    }

    pub fn holds(&self) -> bool {
        self.lower_holds && self.upper_holds
    }
}

/// Polarization spread for identical copies, in E0 (for `ρ ∈ (0, 1]`) and in
/// symmetric capacity (the `ρ → 0` statement).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Corollary1Verdict {
    pub rho: f64,
    pub e0: Option<SpreadSandwich>,
    pub capacity: SpreadSandwich,
}

impl Corollary1Verdict {
    pub fn holds(&self) -> bool {
        self.capacity.holds() && self.e0.is_none_or(|s| s.holds())
    }
}

/// BSC crossover `p` with `1 − h2(p) = capacity`.
pub fn capacity_matched_bsc(capacity: f64) -> f64 {
    let c = capacity.clamp(0.0, 1.0);
    // Capacity decreases in the gap 1 − z = 2p.
    let gap = bisect_increasing(
        |gap| -ZRep::point_gap(gap).expect("gap in [0, 1]").capacity(),
        -c,
        0.0,
        1.0,
        0.0,
    );
    0.5 * gap
}

fn capacity_spread(rep: &ZRep) -> f64 {
    zrep_plus(rep, rep).capacity() - zrep_minus(rep, rep).capacity()
}

pub fn corollary1_check(rho: Rho, w: &Bdmc) -> Result<Corollary1Verdict> {
    if rho.value() > 1.0 {
        return Err(Error::RegimeViolation {
            rho: rho.value(),
            requirement: "rho in [0, 1]",
        });
    }
    let rep = z_rep(w);

    let e0 = if rho.value() > 0.0 {
        let m = MatchedExtremes::new(rho, rep.e0(rho))?;
        let (bec, bsc) = (m.bec_rep(), m.bsc_rep());
        let spread = |r: &ZRep| e0_plus_formula(rho, r, r) - e0_minus_formula(rho, r, r);
        Some(SpreadSandwich::new(spread(&bsc), spread(&rep), spread(&bec)))
    } else {
        None
    };

    let cap = rep.capacity();
    let eps = 1.0 - cap;
    let bsc = ZRep::point_gap(2.0 * capacity_matched_bsc(cap))?;
    let capacity = SpreadSandwich::new(
        capacity_spread(&bsc),
        capacity_spread(&rep),
        // I(BEC⁺) − I(BEC⁻) = (1 − ε²) − (1 − ε)² = 2ε(1 − ε).
        2.0 * eps * (1.0 - eps),
    );
    Ok(Corollary1Verdict {
        rho: rho.value(),
        e0,
        capacity,
    })
}

/// Generalized Bhattacharyya parameters `Z(ρ, ·)` of the transforms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Corollary2Verdict {
    pub rho: f64,
    pub regime: PlusRegime,
    pub z: f64,
    pub minus: Triple,
    pub plus: Triple,
    /// `Z(ρ, BSC⁻) ≤ Z(ρ, W⁻)`.
    pub minus_lower: bool,
    /// `Z(ρ, W⁻) ≤ Z(ρ, BEC⁻)`.
    pub minus_upper: bool,
    pub plus_lower: bool,
    pub plus_upper: bool,
    /// `Z(ρ, BEC⁻) = 2Z − Z²` within [`BOUNDARY_TOL`].
    pub bec_minus_closed_form: bool,
    /// `Z(ρ, BEC⁺) = Z²` within [`BOUNDARY_TOL`].
    pub bec_plus_closed_form: bool,
}

impl Corollary2Verdict {
    pub fn holds(&self) -> bool {
        self.minus_lower
            && self.minus_upper
            && self.plus_lower
            && self.plus_upper
            && self.bec_minus_closed_form
            && self.bec_plus_closed_form
    }
}

pub fn corollary2_check(rho: Rho, w: &Bdmc) -> Result<Corollary2Verdict> {
    let rho = rho.require_positive()?;
    let rep = z_rep(w);
    let report = theorem1_from_reps(rho, &rep, &rep)?;
    let zr = |e0: f64| z_rho_from_e0(rho, e0);
    let to_z = |t: &Triple| -> Result<Triple> {
        Ok(Triple {
            bec: zr(t.bec)?,
            actual: zr(t.actual)?,
            bsc: zr(t.bsc)?,
        })
    };
    let minus = to_z(&report.minus)?;
    let plus = to_z(&report.plus)?;
    let z = rep.z_rho(rho)?;

    // Z(ρ, ·) decreases in E0, so every orientation flips relative to E0.
    let (plus_lower, plus_upper) = match report.regime {
        PlusRegime::Concave => (le(plus.bec, plus.actual), le(plus.actual, plus.bsc)),
        PlusRegime::Convex => (le(plus.bsc, plus.actual), le(plus.actual, plus.bec)),
        PlusRegime::Affine => (
            (plus.bec - plus.actual).abs() <= BOUNDARY_TOL,
            (plus.bsc - plus.actual).abs() <= BOUNDARY_TOL,
        ),
    };
    Ok(Corollary2Verdict {
        rho: rho.value(),
        regime: report.regime,
        z,
        minus,
        plus,
        minus_lower: le(minus.bsc, minus.actual),
        minus_upper: le(minus.actual, minus.bec),
        plus_lower,
        plus_upper,
        bec_minus_closed_form: (minus.bec - (2.0 * z - z * z)).abs() <= BOUNDARY_TOL,
        bec_plus_closed_form: (plus.bec - z * z).abs() <= BOUNDARY_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{capacity, e0_direct, make_bec, make_bsc};
    use crate::numeric::binary_entropy;
    use crate::random::ChannelSampler;

    fn rho(v: f64) -> Rho {
        Rho::new(v).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn regimes() {
        assert_eq!(PlusRegime::of(0.5), PlusRegime::Concave);
        assert_eq!(PlusRegime::of(1.0), PlusRegime::Affine);
        assert_eq!(PlusRegime::of(1.5), PlusRegime::Convex);
        assert_eq!(PlusRegime::of(2.0), PlusRegime::Affine);
        assert_eq!(PlusRegime::of(3.0), PlusRegime::Concave);
    }

    #[test]
    fn matched_bec_examples() {
        for r in [0.5, 1.0, 4.0] {
            assert_eq!(matched_bec(rho(r), 0.0).unwrap(), 1.0);
            assert_eq!(matched_bec(rho(r), r).unwrap(), 0.0);
        }
        assert!(close(matched_bec(rho(1.0), 0.415_037_499_278_843_8).unwrap(), 0.5, 1e-15));
        assert!(matches!(matched_bec(rho(1.0), 1.5), Err(Error::TargetOutOfRange { .. })));
        assert!(matched_bec(rho(1.0), -0.1).is_err());
        assert!(matched_bec(rho(0.0), 0.0).is_err());
    }

    #[test]
    fn matched_bsc_examples() {
        for r in [0.5, 1.0, 4.0] {
            assert_eq!(matched_bsc(rho(r), 0.0).unwrap(), 0.5);
            assert_eq!(matched_bsc(rho(r), r).unwrap(), 0.0);
        }
        let p = matched_bsc(rho(1.0), -(0.9f64).log2()).unwrap();
        assert!(close(p, 0.2, 1e-13));
        assert!(matched_bsc(rho(2.0), 2.5).is_err());
    }

    #[test]
    fn matching_round_trips() {
        for r in [0.1, 0.5, 1.0, 1.5, 3.0, 10.0, 64.0] {
            for i in 0..=40 {
                let t = r * i as f64 / 40.0;
                let m = MatchedExtremes::new(rho(r), t).unwrap();
                assert!(close(e0_direct(rho(r), &m.bec()), t, 1e-10), "bec {r} {t}");
                assert!(close(e0_direct(rho(r), &m.bsc()), t, 1e-10), "bsc {r} {t}");
                assert!(close(m.bsc_rep().e0(rho(r)), t, 1e-10));
            }
        }
    }

    #[test]
    fn self_matched_bec_collapses() {
        let w = make_bec(0.4).unwrap();
        for r in [0.5, 1.0, 1.5, 2.0, 3.0] {
            let rep = theorem1_report(rho(r), &w, &w).unwrap();
            assert!(rep.holds(), "{rep:?}");
            assert!(close(rep.minus.bec, rep.minus.actual, 1e-12));
            assert!(close(rep.plus.bec, rep.plus.actual, 1e-12));
        }
    }

    #[test]
    fn bsc_plus_equality_at_rho_one() {
        let w = make_bsc(0.11).unwrap();
        let rep = theorem1_report(rho(1.0), &w, &w).unwrap();
        assert_eq!(rep.regime, PlusRegime::Affine);
        assert!(close(rep.plus.actual, rep.plus.bec, 1e-10));
        assert!(close(rep.plus.actual, rep.plus.bsc, 1e-10));
        assert!(rep.holds());
    }

    #[test]
    fn theorem_on_random_channels() {
        let mut s = ChannelSampler::new(99);
        for _ in 0..40 {
            let (w1, w2) = (s.channel(4), s.channel(4));
            for r in [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 3.0, 8.0] {
                let rep = theorem1_report(rho(r), &w1, &w2).unwrap();
                assert!(rep.holds(), "{rep:?}");
            }
        }
    }

    #[test]
    fn corollary1_examples() {
        let bec = make_bec(0.3).unwrap();
        let v = corollary1_check(rho(0.7), &bec).unwrap();
        assert!(v.holds());
        let e0 = v.e0.unwrap();
        assert!(close(e0.actual, e0.bec, 1e-12));
        assert!(close(v.capacity.actual, v.capacity.bec, 1e-12));

        let bsc = make_bsc(0.2).unwrap();
        let v = corollary1_check(rho(0.7), &bsc).unwrap();
        assert!(v.holds());
        assert!(close(v.e0.unwrap().actual, v.e0.unwrap().bsc, 1e-10));
        assert!(close(v.capacity.actual, v.capacity.bsc, 1e-10));

        let w = Bdmc::new([(0.1, 0.6), (0.5, 0.1), (0.4, 0.3)]).unwrap();
        let v = corollary1_check(rho(0.7), &w).unwrap();
        assert!(v.holds());
        let e0 = v.e0.unwrap();
        assert!(e0.bsc < e0.actual && e0.actual < e0.bec);

        assert!(corollary1_check(rho(0.0), &w).unwrap().e0.is_none());
        assert!(matches!(corollary1_check(rho(1.5), &w), Err(Error::RegimeViolation { .. })));
    }

    #[test]
    fn capacity_matched_bsc_inverts_capacity() {
        for c in [0.0, 0.1, 0.5, 0.9, 1.0] {
            let p = capacity_matched_bsc(c);
            assert!(close(1.0 - binary_entropy(p), c, 1e-12));
            assert!(close(capacity(&make_bsc(p).unwrap()), c, 1e-12));
        }
    }

    #[test]
    fn corollary2_examples() {
        let eps = 0.35;
        let w = make_bec(eps).unwrap();
        for r in [0.5, 1.0, 1.5, 2.0, 4.0] {
            let v = corollary2_check(rho(r), &w).unwrap();
            assert!(v.holds(), "{v:?}");
            assert!(close(v.minus.actual, 2.0 * eps - eps * eps, 1e-12));
            assert!(close(v.plus.actual, eps * eps, 1e-12));
        }
        let v = corollary2_check(rho(1.5), &Bdmc::noiseless()).unwrap();
        for x in [v.z, v.minus.actual, v.plus.actual, v.minus.bec, v.plus.bsc] {
            assert!(x.abs() < 1e-15);
        }
        assert!(corollary2_check(rho(0.0), &w).is_err());
    }

    #[test]
    fn corollary2_agrees_with_theorem_verdicts() {
        let mut s = ChannelSampler::new(5);
        for _ in 0..30 {
            let w = s.channel(5);
            for r in [0.3, 1.0, 1.4, 2.0, 5.0] {
                let t = theorem1_report(rho(r), &w, &w).unwrap();
                let c = corollary2_check(rho(r), &w).unwrap();
                assert_eq!(t.holds(), c.holds());
                assert!(c.holds());
            }
        }
    }
}
