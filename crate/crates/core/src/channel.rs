//! Binary-input channels, the Gallager function under uniform inputs, and the
//! Z-representation that reduces every E0 computation to an expectation of
//! `g(ρ, Z)`.
//!
//! All information quantities are in bits.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{binary_entropy, bisect_increasing, compensated_sum};

/// Largest admissible tilting parameter.
pub const RHO_MAX: f64 = 64.0;
/// Tolerance on likelihood row sums.
pub const PROB_TOL: f64 = 1e-12;
/// Atoms closer than this (in `z`, and relatively in `1 - z`) are merged.
pub const MERGE_TOL: f64 = 1e-12;
/// Atoms with mass at or below this are dropped.
pub const MASS_FLOOR: f64 = 1e-15;

/// Gallager's tilting parameter, `0 ≤ ρ ≤ RHO_MAX`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Rho(f64);

impl Rho {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && (0.0..=RHO_MAX).contains(&value) {
            Ok(Rho(value))
        } else {
            Err(Error::InvalidRho(value))
        }
    }

    /// Same as [`Rho::new`] but also rejects `ρ = 0`.
    pub fn positive(value: f64) -> Result<Self> {
        let rho = Self::new(value)?;
        if value == 0.0 {
            return Err(Error::RegimeViolation {
                rho: value,
                requirement: "rho > 0",
            });
        }
        Ok(rho)
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `2^{-ρ}`, the value of `g(ρ, 1)`.
    #[inline]
    pub fn floor(self) -> f64 {
        (-self.0).exp2()
    }

    pub fn require_positive(self) -> Result<Self> {
        Rho::positive(self.0)
    }
}

impl TryFrom<f64> for Rho {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Rho::new(v)
    }
}

impl std::fmt::Display for Rho {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

fn check_probability(what: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::ProbabilityOutOfRange { what, value })
    }
}

fn check_unit(what: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::Domain {
            what,
            value,
            domain: "[0, 1]",
        })
    }
}

// ---------------------------------------------------------------------------
// g(ρ, z)
// ---------------------------------------------------------------------------

/// `g` evaluated from `1 + z` and `1 - z` directly. Callers that know `1 - z`
/// more accurately than `z` itself (atoms close to 1) go through here.
#[inline]
pub(crate) fn g_split(rho: f64, one_plus: f64, one_minus: f64) -> f64 {
    let s = 1.0 / (1.0 + rho);
    (0.5 * one_plus.powf(s) + 0.5 * one_minus.powf(s)).powf(1.0 + rho)
}

/// `g` from the complement `gap = 1 - z`.
#[inline]
pub(crate) fn g_gap(rho: f64, gap: f64) -> f64 {
    g_split(rho, 2.0 - gap, gap)
}

/// Complement `1 − z` of the point where `g(ρ, ·)` takes the value `t`, for
/// `ρ > 0`. Bisection runs on `u = (1 − z)^{1/(1+ρ)}`: for large `ρ` the
/// complement itself sits far below the resolution of a fixed number of
/// halvings of `[0, 1]`. Values of `t` outside `[2^{−ρ}, 1]` saturate.
pub(crate) fn g_inverse_gap(rho: f64, t: f64) -> f64 {
    if t >= 1.0 {
        return 1.0;
    }
    if t <= (-rho).exp2() {
        return 0.0;
    }
    let u = bisect_increasing(|u| g_gap(rho, u.powf(1.0 + rho)), t, 0.0, 1.0, 0.0);
    u.powf(1.0 + rho)
}

/// `g(ρ, z) = (½(1+z)^{1/(1+ρ)} + ½(1−z)^{1/(1+ρ)})^{1+ρ}`, in `[2^{-ρ}, 1]`.
pub fn g(rho: Rho, z: f64) -> Result<f64> {
    let z = check_unit("z", z)?;
    Ok(g_split(rho.value(), 1.0 + z, 1.0 - z))
}

/// `g` for any `ρ > -1`, including the negative branch that only the shape
/// scan needs. No domain checks.
pub fn g_extended(rho: f64, z: f64) -> f64 {
    g_split(rho, 1.0 + z, 1.0 - z)
}

// ---------------------------------------------------------------------------
// Channels
// ---------------------------------------------------------------------------

/// Likelihood pair `(W(y|0), W(y|1))` of one output symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Likelihoods {
    pub w0: f64,
    pub w1: f64,
}

/// A finite-output binary-input memoryless channel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bdmc {
    outputs: Vec<Likelihoods>,
}

impl Bdmc {
    /// Validates the rows. Each column must sum to 1 within [`PROB_TOL`]; a
    /// column inside the tolerance is rescaled to sum exactly.
    pub fn new<I>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut outputs = Vec::new();
        for (row, (w0, w1)) in rows.into_iter().enumerate() {
            for (input, value) in [(0u8, w0), (1u8, w1)] {
                if !(value.is_finite() && (0.0..=1.0).contains(&value)) {
                    return Err(Error::InvalidLikelihood { row, input, value });
                }
            }
            outputs.push(Likelihoods { w0, w1 });
        }
        if outputs.is_empty() {
            return Err(Error::EmptyChannel);
        }
        let s0 = compensated_sum(outputs.iter().map(|o| o.w0));
        let s1 = compensated_sum(outputs.iter().map(|o| o.w1));
        for (input, sum) in [(0u8, s0), (1u8, s1)] {
            if (sum - 1.0).abs() > PROB_TOL {
                return Err(Error::RowSum {
                    input,
                    sum,
                    tol: PROB_TOL,
                });
            }
        }
        Ok(Self::normalized(outputs, s0, s1))
    }

    fn normalized(mut outputs: Vec<Likelihoods>, s0: f64, s1: f64) -> Self {
        if s0 != 1.0 || s1 != 1.0 {
            for o in &mut outputs {
                o.w0 /= s0;
                o.w1 /= s1;
            }
        }
        Bdmc { outputs }
    }

    /// For rows produced from already-valid channels (products of likelihoods).
    pub(crate) fn from_products(outputs: Vec<Likelihoods>) -> Self {
        let s0 = compensated_sum(outputs.iter().map(|o| o.w0));
        let s1 = compensated_sum(outputs.iter().map(|o| o.w1));
        Self::normalized(outputs, s0, s1)
    }

    pub fn outputs(&self) -> &[Likelihoods] {
        &self.outputs
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    /// The channel whose output is independent of its input.
    pub fn useless() -> Self {
        Bdmc {
            outputs: vec![Likelihoods { w0: 1.0, w1: 1.0 }],
        }
    }

    pub fn noiseless() -> Self {
        Bdmc {
            outputs: vec![
                Likelihoods { w0: 1.0, w1: 0.0 },
                Likelihoods { w0: 0.0, w1: 1.0 },
            ],
        }
    }
}

/// Binary erasure channel: outputs `0`, `1`, and the erasure symbol, in that order.
pub fn make_bec(epsilon: f64) -> Result<Bdmc> {
    let e = check_probability("epsilon", epsilon)?;
    Ok(Bdmc {
        outputs: vec![
            Likelihoods { w0: 1.0 - e, w1: 0.0 },
            Likelihoods { w0: 0.0, w1: 1.0 - e },
            Likelihoods { w0: e, w1: e },
        ],
    })
}

/// Binary symmetric channel with crossover probability `p`.
pub fn make_bsc(p: f64) -> Result<Bdmc> {
    let p = check_probability("p", p)?;
    Ok(Bdmc {
        outputs: vec![
            Likelihoods { w0: 1.0 - p, w1: p },
            Likelihoods { w0: p, w1: 1.0 - p },
        ],
    })
}

// ---------------------------------------------------------------------------
// q/Δ decomposition and Z-representation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QDeltaEntry {
    pub q: f64,
    pub delta: f64,
}

/// Per-output `q = (w0+w1)/2` and `Δ = (w0−w1)/(w0+w1)`, so that
/// `w0 = q(1+Δ)` and `w1 = q(1−Δ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QDelta {
    pub entries: Vec<QDeltaEntry>,
}

impl QDelta {
    /// Likelihood pairs rebuilt from the decomposition.
    pub fn reconstruct(&self) -> Vec<Likelihoods> {
        self.entries
            .iter()
            .map(|e| Likelihoods {
                w0: e.q * (1.0 + e.delta),
                w1: e.q * (1.0 - e.delta),
            })
            .collect()
    }

    pub fn total_mass(&self) -> f64 {
        compensated_sum(self.entries.iter().map(|e| e.q))
    }
}

/// Outputs with `q = 0` are dropped.
pub fn q_delta(channel: &Bdmc) -> QDelta {
    let entries = channel
        .outputs()
        .iter()
        .filter_map(|o| {
            let total = o.w0 + o.w1;
            (total > 0.0).then(|| QDeltaEntry {
                q: 0.5 * total,
                delta: (o.w0 - o.w1) / total,
            })
        })
        .collect();
    QDelta { entries }
}

/// One support point of `Z = |Δ(Y)|`. `gap` carries `1 − z` at full relative
/// precision, which matters once `z` is within a few ulps of 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Atom {
    pub z: f64,
    pub gap: f64,
    pub p: f64,
}

impl Atom {
    pub fn new(z: f64, p: f64) -> Self {
        Atom { z, gap: 1.0 - z, p }
    }

    pub fn with_gap(gap: f64, p: f64) -> Self {
        Atom { z: 1.0 - gap, gap, p }
    }

    #[inline]
    pub(crate) fn g(&self, rho: f64) -> f64 {
        g_split(rho, 1.0 + self.z, self.gap)
    }
}

/// Discrete distribution of `Z ∈ [0, 1]`, sorted by `z` with merged duplicates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZRep {
    atoms: Vec<Atom>,
}

impl ZRep {
    /// Builds a representation from `(z, mass)` pairs.
    pub fn new<I>(atoms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut raw = Vec::new();
        for (z, p) in atoms {
            if !(z.is_finite() && (0.0..=1.0).contains(&z)) {
                return Err(Error::InvalidZRep(format!("atom z = {z} outside [0, 1]")));
            }
            if !(p.is_finite() && p >= 0.0) {
                return Err(Error::InvalidZRep(format!("atom mass {p} is negative")));
            }
            raw.push(Atom::new(z, p));
        }
        let rep = ZRep::canonical(raw);
        let total = rep.total_mass();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidZRep(format!("masses sum to {total}")));
        }
        Ok(rep)
    }

    /// Sorts, merges near-duplicate atoms (mass-weighted position) and drops
    /// atoms of negligible mass. The dropped mass is spread proportionally
    /// over the survivors so that the total is unchanged.
    pub(crate) fn canonical(mut atoms: Vec<Atom>) -> Self {
        let before = compensated_sum(atoms.iter().map(|a| a.p));
        let n = atoms.len();
        atoms.retain(|a| a.p > MASS_FLOOR);
        if atoms.len() < n {
            let after = compensated_sum(atoms.iter().map(|a| a.p));
            if after > 0.0 {
                let scale = before / after;
                atoms.iter_mut().for_each(|a| a.p *= scale);
            }
        }
        // Ascending z is descending gap; gap is the precise coordinate near 1.
        atoms.sort_by(|a, b| b.gap.total_cmp(&a.gap).then(a.z.total_cmp(&b.z)));
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        let mut anchor: Option<Atom> = None;
        for a in atoms {
            match (merged.last_mut(), anchor) {
                (Some(last), Some(first))
                    if (a.z - first.z).abs() <= MERGE_TOL
                        && (a.gap - first.gap).abs() <= MERGE_TOL * a.gap.max(first.gap) =>
                {
                    let p = last.p + a.p;
                    last.z = (last.z * last.p + a.z * a.p) / p;
                    last.gap = (last.gap * last.p + a.gap * a.p) / p;
                    last.p = p;
                }
                _ => {
                    merged.push(a);
                    anchor = Some(a);
                }
            }
        }
        ZRep { atoms: merged }
    }

    /// Point mass at `z`.
    pub fn point(z: f64) -> Result<Self> {
        ZRep::new([(z, 1.0)])
    }

    /// Point mass described by its complement `1 − z`.
    pub fn point_gap(gap: f64) -> Result<Self> {
        let gap = check_unit("1 - z", gap)?;
        Ok(ZRep {
            atoms: vec![Atom::with_gap(gap, 1.0)],
        })
    }

    /// `{(0, ε), (1, 1 − ε)}`.
    pub fn bec(epsilon: f64) -> Result<Self> {
        let e = check_probability("epsilon", epsilon)?;
        Ok(ZRep::canonical(vec![
            Atom::with_gap(1.0, e),
            Atom::with_gap(0.0, 1.0 - e),
        ]))
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        compensated_sum(self.atoms.iter().map(|a| a.p))
    }

    /// `E[g(ρ, Z)] = 2^{−E0(ρ)}`.
    pub fn expected_g(&self, rho: Rho) -> f64 {
        let r = rho.value();
        compensated_sum(self.atoms.iter().map(|a| a.p * a.g(r)))
    }

    pub fn e0(&self, rho: Rho) -> f64 {
        neg_log2(self.expected_g(rho))
    }

    /// Symmetric capacity `E[1 − h2((1 − Z)/2)]`.
    pub fn capacity(&self) -> f64 {
        compensated_sum(
            self.atoms
                .iter()
                .map(|a| a.p * (1.0 - binary_entropy(0.5 * a.gap))),
        )
    }

    /// `E[√(1 − Z²)]`.
    pub fn bhattacharyya(&self) -> f64 {
        compensated_sum(
            self.atoms
                .iter()
                .map(|a| a.p * (a.gap * (1.0 + a.z)).sqrt()),
        )
    }

    pub fn z_rho(&self, rho: Rho) -> Result<f64> {
        z_rho_from_expected_g(rho, self.expected_g(rho))
    }
}

/// `Z = |Δ(Y)|` with `Y ~ q`.
pub fn z_rep(channel: &Bdmc) -> ZRep {
    let atoms = channel
        .outputs()
        .iter()
        .filter_map(|o| {
            let total = o.w0 + o.w1;
            (total > 0.0).then(|| Atom {
                z: (o.w0 - o.w1).abs() / total,
                gap: 2.0 * o.w0.min(o.w1) / total,
                p: 0.5 * total,
            })
        })
        .collect();
    ZRep::canonical(atoms)
}

// ---------------------------------------------------------------------------
// Channel functionals
// ---------------------------------------------------------------------------

/// `E0(ρ, W) = −log2 Σ_y [½W(y|0)^{1/(1+ρ)} + ½W(y|1)^{1/(1+ρ)}]^{1+ρ}`.
pub fn e0_direct(rho: Rho, channel: &Bdmc) -> f64 {
    neg_log2(expected_direct(rho, channel))
}

/// `−log2 t` for an expected value of `g`, with `+0` rather than `−0` at
/// `t = 1`. The expectation never exceeds 1, but mass rounding can push `t` a
/// few ulps past it.
#[inline]
pub(crate) fn neg_log2(t: f64) -> f64 {
    0.0 - t.min(1.0).log2()
}

fn expected_direct(rho: Rho, channel: &Bdmc) -> f64 {
    let r = rho.value();
    let s = 1.0 / (1.0 + r);
    compensated_sum(
        channel
            .outputs()
            .iter()
            .map(|o| (0.5 * o.w0.powf(s) + 0.5 * o.w1.powf(s)).powf(1.0 + r)),
    )
}

/// `−log2 E[g(ρ, Z)]`.
pub fn e0_from_zrep(rho: Rho, rep: &ZRep) -> f64 {
    rep.e0(rho)
}

/// Uniform-input mutual information in bits.
pub fn capacity(channel: &Bdmc) -> f64 {
    compensated_sum(channel.outputs().iter().map(|o| {
        let q = 0.5 * (o.w0 + o.w1);
        let term = |w: f64| {
            if w > 0.0 {
                0.5 * w * (w / q).log2()
            } else {
                0.0
            }
        };
        term(o.w0) + term(o.w1)
    }))
}

/// `Z(W) = Σ_y √(W(y|0) W(y|1))`.
pub fn bhattacharyya(channel: &Bdmc) -> f64 {
    compensated_sum(channel.outputs().iter().map(|o| (o.w0 * o.w1).sqrt()))
}

/// `Z(ρ, W) = (2^ρ·2^{−E0} − 1)/(2^ρ − 1)`; undefined at `ρ = 0`.
pub fn z_rho(rho: Rho, channel: &Bdmc) -> Result<f64> {
    z_rho_from_expected_g(rho, expected_direct(rho, channel))
}

pub fn z_rho_from_e0(rho: Rho, e0: f64) -> Result<f64> {
    z_rho_from_expected_g(rho, (-e0).exp2())
}

fn z_rho_from_expected_g(rho: Rho, t: f64) -> Result<f64> {
    let rho = rho.require_positive()?;
    let r = rho.value();
    let scale = r.exp2();
    // Fused multiply-add keeps 2^ρ·t − 1 exact up to the rounding of t.
    let num = scale.mul_add(t, -1.0);
    let den = if r < 1.0 {
        (r * std::f64::consts::LN_2).exp_m1()
    } else {
        scale - 1.0
    };
    Ok((num / den).clamp(0.0, 1.0))
}

/// Per-ρ summary of a channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelStats {
    pub rho: f64,
    pub e0: f64,
    pub capacity: f64,
    pub bhattacharyya: f64,
    /// `None` at `ρ = 0`, where the generalized parameter is 0/0.
    pub z_rho: Option<f64>,
}

impl ChannelStats {
    pub fn of(rho: Rho, channel: &Bdmc) -> Self {
        let t = expected_direct(rho, channel);
        ChannelStats {
            rho: rho.value(),
            e0: neg_log2(t),
            capacity: capacity(channel),
            bhattacharyya: bhattacharyya(channel),
            z_rho: z_rho_from_expected_g(rho, t).ok(),
        }
    }
}
