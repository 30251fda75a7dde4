//! One-step polarization of a channel pair.
//!
//! Every quantity is available two ways: by building the synthesized channel
//! explicitly over the product alphabet, and through the Z-representations of
//! the two inputs. The explicit route is kept deliberately naive so that it can
//! serve as the oracle for the other one.

use serde::Serialize;

use crate::channel::{
    capacity, e0_direct, g_split, neg_log2, z_rep, Atom, Bdmc, Likelihoods, Rho, ZRep,
};
use crate::error::{Error, Result};
use crate::numeric::compensated_sum;

/// Slack applied to every inequality verdict.
pub const VERDICT_SLACK: f64 = 1e-9;

/// `W⁻(y1 y2 | u1) = Σ_{u2} ½ W1(y1 | u1⊕u2) W2(y2 | u2)`.
///
/// Output `(y1, y2)` is stored at index `y1·|Y2| + y2`.
pub fn minus_synth(w1: &Bdmc, w2: &Bdmc) -> Bdmc {
    let mut rows = Vec::with_capacity(w1.len() * w2.len());
    for a in w1.outputs() {
        for b in w2.outputs() {
            rows.push(Likelihoods {
                w0: 0.5 * (a.w0 * b.w0 + a.w1 * b.w1),
                w1: 0.5 * (a.w1 * b.w0 + a.w0 * b.w1),
            });
        }
    }
    Bdmc::from_products(rows)
}

/// `W⁺(y1 y2 u1 | u2) = ½ W1(y1 | u1⊕u2) W2(y2 | u2)`.
///
/// Output `(y1, y2, u1)` is stored at index `2(y1·|Y2| + y2) + u1`.
pub fn plus_synth(w1: &Bdmc, w2: &Bdmc) -> Bdmc {
    let mut rows = Vec::with_capacity(2 * w1.len() * w2.len());
    for a in w1.outputs() {
        for b in w2.outputs() {
            rows.push(Likelihoods {
                w0: 0.5 * a.w0 * b.w0,
                w1: 0.5 * a.w1 * b.w1,
            });
            rows.push(Likelihoods {
                w0: 0.5 * a.w1 * b.w0,
                w1: 0.5 * a.w0 * b.w1,
            });
        }
    }
    Bdmc::from_products(rows)
}

/// Both synthesized channels over their full product alphabets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolarPair {
    pub minus: Bdmc,
    pub plus: Bdmc,
}

impl PolarPair {
    pub fn synthesize(w1: &Bdmc, w2: &Bdmc) -> Self {
        PolarPair {
            minus: minus_synth(w1, w2),
            plus: plus_synth(w1, w2),
        }
    }
}

/// An evaluation of `h`, in `[2^{-ρ}, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct HValue(f64);

impl HValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// `h` from `1 ± z1` and `1 ± z2`.
///
/// Expanding the weights into the `g` terms gives
/// `h = ½(½(p1p2)^s + ½(m1m2)^s)^{1+ρ} + ½(½(p1m2)^s + ½(m1p2)^s)^{1+ρ}`
/// with `p = 1 + z`, `m = 1 − z`, `s = 1/(1+ρ)`. This form has no division,
/// so the `z1 z2 = 1` corner needs no special case.
#[inline]
pub(crate) fn h_split(rho: f64, p1: f64, m1: f64, p2: f64, m2: f64) -> f64 {
    let s = 1.0 / (1.0 + rho);
    let same = 0.5 * (p1 * p2).powf(s) + 0.5 * (m1 * m2).powf(s);
    let cross = 0.5 * (p1 * m2).powf(s) + 0.5 * (m1 * p2).powf(s);
    0.5 * (same.powf(1.0 + rho) + cross.powf(1.0 + rho))
}

#[inline]
fn h_atoms(rho: f64, a: &Atom, b: &Atom) -> f64 {
    h_split(rho, 1.0 + a.z, a.gap, 1.0 + b.z, b.gap)
}

/// `h(ρ, z1, z2) = ½(1+z1z2) g(ρ, (z1+z2)/(1+z1z2)) + ½(1−z1z2) g(ρ, (z1−z2)/(1−z1z2))`.
pub fn h(rho: Rho, z1: f64, z2: f64) -> Result<HValue> {
    for (what, z) in [("z1", z1), ("z2", z2)] {
        if !(z.is_finite() && (0.0..=1.0).contains(&z)) {
            return Err(Error::Domain {
                what,
                value: z,
                domain: "[0, 1]",
            });
        }
    }
    Ok(HValue(h_split(rho.value(), 1.0 + z1, 1.0 - z1, 1.0 + z2, 1.0 - z2)))
}

/// `E[g(ρ, Z1 Z2)]`.
fn expected_g_minus(rho: Rho, r1: &ZRep, r2: &ZRep) -> f64 {
    let r = rho.value();
    compensated_sum(r1.atoms().iter().flat_map(|a| {
        r2.atoms().iter().map(move |b| {
            let gap = a.gap + a.z * b.gap;
            a.p * b.p * g_split(r, 1.0 + a.z * b.z, gap)
        })
    }))
}

/// `E[h(ρ, Z1, Z2)]`.
fn expected_h(rho: Rho, r1: &ZRep, r2: &ZRep) -> f64 {
    let r = rho.value();
    compensated_sum(
        r1.atoms()
            .iter()
            .flat_map(|a| r2.atoms().iter().map(move |b| a.p * b.p * h_atoms(r, a, b))),
    )
}

/// `E0(ρ, W⁻) = −log2 E[g(ρ, Z1 Z2)]`.
pub fn e0_minus_formula(rho: Rho, r1: &ZRep, r2: &ZRep) -> f64 {
    neg_log2(expected_g_minus(rho, r1, r2))
}

/// `E0(ρ, W⁺) = −log2 E[h(ρ, Z1, Z2)]`.
pub fn e0_plus_formula(rho: Rho, r1: &ZRep, r2: &ZRep) -> f64 {
    neg_log2(expected_h(rho, r1, r2))
}

/// Z-representation of `W⁻`: atoms `z_i z_j` with masses `p_i q_j`.
pub fn zrep_minus(r1: &ZRep, r2: &ZRep) -> ZRep {
    let mut atoms = Vec::with_capacity(r1.len() * r2.len());
    for a in r1.atoms() {
        for b in r2.atoms() {
            atoms.push(Atom {
                z: a.z * b.z,
                gap: a.gap + a.z * b.gap,
                p: a.p * b.p,
            });
        }
    }
    ZRep::canonical(atoms)
}

/// Z-representation of `W⁺`. Each atom pair splits into
/// `(z_i+z_j)/(1+z_iz_j)` with mass `p_iq_j(1+z_iz_j)/2` and
/// `|z_i−z_j|/(1−z_iz_j)` with mass `p_iq_j(1−z_iz_j)/2`; the second atom is
/// omitted when `z_iz_j = 1`.
pub fn zrep_plus(r1: &ZRep, r2: &ZRep) -> ZRep {
    let mut atoms = Vec::with_capacity(2 * r1.len() * r2.len());
    for a in r1.atoms() {
        for b in r2.atoms() {
            let mass = a.p * b.p;
            let sum = 1.0 + a.z * b.z;
            atoms.push(Atom {
                z: (a.z + b.z) / sum,
                gap: a.gap * b.gap / sum,
                p: 0.5 * mass * sum,
            });
            // `hi` is the atom closer to 1.
            let (hi, lo) = if a.gap <= b.gap { (a, b) } else { (b, a) };
            let diff = hi.gap + hi.z * lo.gap;
            if diff > 0.0 {
                atoms.push(Atom {
                    z: (lo.gap - hi.gap) / diff,
                    gap: hi.gap * (1.0 + lo.z) / diff,
                    p: 0.5 * mass * diff,
                });
            }
        }
    }
    ZRep::canonical(atoms)
}

/// E0 values of the four channels in the ordering
/// `E0(W⁻) ≤ E0(Wi) ≤ E0(W⁺)`, with one verdict per inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderingVerdict {
    pub rho: f64,
    pub e0_minus: f64,
    pub e0_w1: f64,
    pub e0_w2: f64,
    pub e0_plus: f64,
    pub minus_le_w1: bool,
    pub minus_le_w2: bool,
    pub w1_le_plus: bool,
    pub w2_le_plus: bool,
}

impl OrderingVerdict {
    pub fn holds(&self) -> bool {
        self.minus_le_w1 && self.minus_le_w2 && self.w1_le_plus && self.w2_le_plus
    }
}

#[inline]
pub(crate) fn le(a: f64, b: f64) -> bool {
    b - a >= -VERDICT_SLACK
}

pub fn check_ordering(rho: Rho, w1: &Bdmc, w2: &Bdmc) -> OrderingVerdict {
    let (r1, r2) = (z_rep(w1), z_rep(w2));
    ordering_from_reps(rho, &r1, &r2)
}

pub fn ordering_from_reps(rho: Rho, r1: &ZRep, r2: &ZRep) -> OrderingVerdict {
    let e0_minus = e0_minus_formula(rho, r1, r2);
    let e0_plus = e0_plus_formula(rho, r1, r2);
    let e0_w1 = r1.e0(rho);
    let e0_w2 = r2.e0(rho);
    OrderingVerdict {
        rho: rho.value(),
        e0_minus,
        e0_w1,
        e0_w2,
        e0_plus,
        minus_le_w1: le(e0_minus, e0_w1),
        minus_le_w2: le(e0_minus, e0_w2),
        w1_le_plus: le(e0_w1, e0_plus),
        w2_le_plus: le(e0_w2, e0_plus),
    }
}

/// `E0(W⁺) + E0(W⁻) ≥ E0(W1) + E0(W2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubmartingaleVerdict {
    pub rho: f64,
    pub transformed_sum: f64,
    pub original_sum: f64,
    pub holds: bool,
}

impl SubmartingaleVerdict {
    pub fn excess(&self) -> f64 {
        self.transformed_sum - self.original_sum
    }
}

pub fn check_submartingale(rho: Rho, w1: &Bdmc, w2: &Bdmc) -> SubmartingaleVerdict {
    let (r1, r2) = (z_rep(w1), z_rep(w2));
    submartingale_from_reps(rho, &r1, &r2)
}

pub fn submartingale_from_reps(rho: Rho, r1: &ZRep, r2: &ZRep) -> SubmartingaleVerdict {
    let transformed_sum = e0_plus_formula(rho, r1, r2) + e0_minus_formula(rho, r1, r2);
    let original_sum = r1.e0(rho) + r2.e0(rho);
    SubmartingaleVerdict {
        rho: rho.value(),
        transformed_sum,
        original_sum,
        holds: le(original_sum, transformed_sum),
    }
}

/// `I(W⁻) + I(W⁺) − I(W1) − I(W2)` on the explicitly synthesized channels;
/// zero by the chain rule.
pub fn chain_rule_gap(w1: &Bdmc, w2: &Bdmc) -> f64 {
    let pair = PolarPair::synthesize(w1, w2);
    (capacity(&pair.minus) + capacity(&pair.plus)) - (capacity(w1) + capacity(w2))
}

/// Explicit-synthesis E0 of both transforms, for cross-checks.
pub fn e0_synthesized(rho: Rho, w1: &Bdmc, w2: &Bdmc) -> (f64, f64) {
    let pair = PolarPair::synthesize(w1, w2);
    (e0_direct(rho, &pair.minus), e0_direct(rho, &pair.plus))
}
