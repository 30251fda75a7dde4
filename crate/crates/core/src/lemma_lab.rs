//! Numerical checks of the analytic facts behind the extremality results:
//! shape of `g`, convexity of `F`, the regime-dependent curvature of `H`,
//! and the elementary inequalities the proofs reduce to.
//!
//! Scans are falsification-capable: every cell records its worst signed
//! second difference and where it occurred, plus a trace of random probes
//! around that point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channel::{g_extended, g_gap, g_inverse_gap, Rho, RHO_MAX};
use crate::error::{Error, Result};
use crate::extremal::PlusRegime;
use crate::numeric::fmt_f64;
use crate::par::Exec;
use crate::transform::h_split;

/// Upper end of the `tanh`-space coordinates; `tanh(20)` is 1 in double precision.
pub const K_MAX: f64 = 20.0;
/// Cells with `ρ` below this have a degenerate `t`-interval and are skipped.
pub const DEGENERATE_RHO: f64 = 1e-3;
/// Tolerance on first differences in the `g` shape scan.
pub const MONOTONE_TOL: f64 = 1e-12;
/// Tolerance on the chord bound of `F`.
pub const CHORD_TOL: f64 = 1e-12;
/// Absolute floor of the tolerance used by the `J` and `R` checks.
pub const JR_ABS_TOL: f64 = 1e-10;
/// Rounding allowance of the `J` and `R` checks, in units of
/// `EPSILON · (sum of magnitudes of the cancelling terms)`.
pub const JR_ROUNDING_ULPS: f64 = 256.0;
/// Tolerance of the elementary inequalities `f1 ≥ f2` and the logit bound.
pub const ELEMENTARY_TOL: f64 = 1e-12;

fn domain(what: &'static str, value: f64, ok: bool, domain: &'static str) -> Result<f64> {
    if ok && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain {
            what,
            value,
            domain,
        })
    }
}

fn check_t(rho: Rho, t: f64) -> Result<f64> {
    let rho = rho.require_positive()?;
    let lo = rho.floor();
    // One part in 1e15 of slack for grids built in floating point.
    let slack = 1e-15;
    domain(
        "t",
        t,
        t >= lo * (1.0 - slack) && t <= 1.0 + slack,
        "[2^-rho, 1]",
    )?;
    Ok(t.clamp(lo, 1.0))
}

fn check_z(z: f64) -> Result<f64> {
    domain("z", z, (0.0..=1.0).contains(&z), "[0, 1]")
}

// ---------------------------------------------------------------------------
// g⁻¹, F, H
// ---------------------------------------------------------------------------

/// `1 − g⁻¹(ρ, t)`. Near `z = 1` the complement carries the precision that
/// `z` itself cannot.
pub fn g_inverse_complement(rho: Rho, t: f64) -> Result<f64> {
    let t = check_t(rho, t)?;
    Ok(g_inverse_gap(rho.value(), t))
}

/// The `z ∈ [0, 1]` with `g(ρ, z) = t`.
pub fn g_inverse(rho: Rho, t: f64) -> Result<f64> {
    Ok(1.0 - g_inverse_complement(rho, t)?)
}

/// `F(z, ρ, t) = g(ρ, z · g⁻¹(ρ, t))`.
pub fn f_func(z: f64, rho: Rho, t: f64) -> Result<f64> {
    let z = check_z(z)?;
    let gap_u = g_inverse_complement(rho, t)?;
    Ok(f_from_gap(rho.value(), z, gap_u))
}

#[inline]
fn f_from_gap(rho: f64, z: f64, gap_u: f64) -> f64 {
    // 1 − z·u = (1 − z) + z·(1 − u)
    g_gap(rho, (1.0 - z) + z * gap_u)
}

/// `H(z, ρ, t) = h(ρ, g⁻¹(ρ, t), z)`.
pub fn h_func(z: f64, rho: Rho, t: f64) -> Result<f64> {
    let z = check_z(z)?;
    let gap_u = g_inverse_complement(rho, t)?;
    Ok(h_from_gap(rho.value(), z, gap_u))
}

#[inline]
fn h_from_gap(rho: f64, z: f64, gap_u: f64) -> f64 {
    h_split(rho, 2.0 - gap_u, gap_u, 1.0 + z, 1.0 - z)
}

// ---------------------------------------------------------------------------
// Scans
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanConfig {
    /// `ρ` values; `(−1, 0]` is meaningful only for the `g` shape scan.
    pub rho_grid: Vec<f64>,
    /// `z` values in `[0, 1]`. Cell coordinates for the `F` and `H` scans,
    /// sampling points for the `g` shape scan.
    pub z_grid: Vec<f64>,
    /// Number of uniform steps on `[2^{−ρ}, 1]`.
    pub t_steps: usize,
    /// Bound on raw second differences (not divided by the step squared).
    pub curvature_tol: f64,
    /// Random probes drawn around each cell's worst grid point.
    pub counterexample_budget: usize,
    pub seed: u64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            rho_grid: vec![0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 8.0],
            z_grid: uniform_grid(0.0, 1.0, 20),
            t_steps: 512,
            curvature_tol: 1e-7,
            counterexample_budget: 8,
            seed: 0,
        }
    }
}

/// `n + 1` evenly spaced points from `lo` to `hi`, both ends exact.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| {
            if i == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / n as f64
            }
        })
        .collect()
}

fn sorted_nonempty(name: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::InvalidConfig(format!("{name} is empty")));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidConfig(format!("{name} has a non-finite entry")));
    }
    if v.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidConfig(format!("{name} is not sorted")));
    }
    Ok(())
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        sorted_nonempty("rho grid", &self.rho_grid)?;
        sorted_nonempty("z grid", &self.z_grid)?;
        if let Some(&r) = self.rho_grid.iter().find(|&&r| r <= -1.0 || r > RHO_MAX) {
            return Err(Error::InvalidConfig(format!(
                "rho = {r} outside (-1, {RHO_MAX}]"
            )));
        }
        if let Some(&z) = self.z_grid.iter().find(|z| !(0.0..=1.0).contains(*z)) {
            return Err(Error::InvalidConfig(format!("z = {z} outside [0, 1]")));
        }
        if self.t_steps < 8 {
            return Err(Error::InvalidConfig(format!(
                "t_steps = {} is below 8",
                self.t_steps
            )));
        }
        if !(self.curvature_tol > 0.0 && self.curvature_tol.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "curvature_tol = {} must be positive",
                self.curvature_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanKind {
    GShape,
    ConvexityF,
    CurvatureH,
}

impl ScanKind {
    pub fn name(self) -> &'static str {
        match self {
            ScanKind::GShape => "g_shape",
            ScanKind::ConvexityF => "convexity_f",
            ScanKind::CurvatureH => "curvature_h",
        }
    }
}

/// Sign expected of the second differences in a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Curvature {
    Concave,
    Convex,
    Affine,
}

impl Curvature {
    /// Amount by which `d` violates the expected sign (≤ 0 when it conforms).
    fn violation(self, d: f64) -> f64 {
        match self {
            Curvature::Concave => d,
            Curvature::Convex => -d,
            Curvature::Affine => d.abs(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Curvature::Concave => "concave",
            Curvature::Convex => "convex",
            Curvature::Affine => "affine",
        }
    }
}

impl From<PlusRegime> for Curvature {
    fn from(r: PlusRegime) -> Self {
        match r {
            PlusRegime::Concave => Curvature::Concave,
            PlusRegime::Convex => Curvature::Convex,
            PlusRegime::Affine => Curvature::Affine,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Pass,
    Fail,
    Skipped,
}

/// Second difference at a random point near the worst grid point, with half
/// the grid step, rescaled by 4 to be comparable with grid values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Probe {
    pub at: f64,
    pub second_difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellReport {
    pub rho: f64,
    /// Cell coordinate; absent for the `g` shape scan, where `z` is the scan variable.
    pub z: Option<f64>,
    pub expected: Curvature,
    pub status: CellStatus,
    /// Worst signed second difference for the expected curvature.
    pub worst: Option<f64>,
    /// Scan coordinate (`t`, or `z` for the `g` shape scan) of `worst`.
    pub at: Option<f64>,
    /// `g` shape only: worst signed first difference for the expected monotonicity.
    pub worst_first_difference: Option<f64>,
    /// `F` only: largest excess of `F` over its chord.
    pub chord_excess: Option<f64>,
    pub probes: Vec<Probe>,
    pub note: Option<String>,
}

impl CellReport {
    fn skipped(rho: f64, z: Option<f64>, expected: Curvature, note: &str) -> Self {
        CellReport {
            rho,
            z,
            expected,
            status: CellStatus::Skipped,
            worst: None,
            at: None,
            worst_first_difference: None,
            chord_excess: None,
            probes: Vec::new(),
            note: Some(note.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub kind: ScanKind,
    pub t_steps: usize,
    pub curvature_tol: f64,
    pub cells: Vec<CellReport>,
}

impl ScanReport {
    /// True when no cell failed. Skipped cells do not count either way.
    pub fn passed(&self) -> bool {
        self.cells.iter().all(|c| c.status != CellStatus::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CellReport> {
        self.cells.iter().filter(|c| c.status == CellStatus::Fail)
    }

    pub fn count(&self, status: CellStatus) -> usize {
        self.cells.iter().filter(|c| c.status == status).count()
    }

    pub fn csv_header() -> Vec<&'static str> {
        vec![
            "scan",
            "rho",
            "z",
            "expected",
            "status",
            "worst",
            "at",
            "worst_first_difference",
            "chord_excess",
            "probes",
            "note",
        ]
    }

    pub fn csv_records(&self) -> Vec<Vec<String>> {
        let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
        self.cells
            .iter()
            .map(|c| {
                vec![
                    self.kind.name().to_string(),
                    fmt_f64(c.rho),
                    opt(c.z),
                    c.expected.name().to_string(),
                    format!("{:?}", c.status).to_lowercase(),
                    opt(c.worst),
                    opt(c.at),
                    opt(c.worst_first_difference),
                    opt(c.chord_excess),
                    c.probes.len().to_string(),
                    c.note.clone().unwrap_or_default(),
                ]
            })
            .collect()
    }
}

/// Worst second difference along a sampled curve.
struct Worst {
    index: usize,
    value: f64,
    violation: f64,
}

fn worst_second_difference(ys: &[f64], expected: Curvature) -> Option<Worst> {
    let mut best: Option<Worst> = None;
    for i in 1..ys.len().saturating_sub(1) {
        let d = ys[i - 1] - 2.0 * ys[i] + ys[i + 1];
        let v = expected.violation(d);
        if best.as_ref().is_none_or(|b| v > b.violation) {
            best = Some(Worst {
                index: i,
                value: d,
                violation: v,
            });
        }
    }
    best
}

fn cell_rng(seed: u64, cell: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (cell as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Probes around `xs[i]` on a uniform grid with step `step`.
fn probes<F>(f: F, xs: &[f64], i: usize, step: f64, budget: usize, rng: &mut ChaCha8Rng) -> Vec<Probe>
where
    F: Fn(f64) -> f64,
{
    if budget == 0 || xs.len() < 3 {
        return Vec::new();
    }
    let h = 0.5 * step;
    let lo = xs[i.saturating_sub(1)] + h;
    let hi = xs[(i + 1).min(xs.len() - 1)] - h;
    if !(hi > lo) {
        return Vec::new();
    }
    (0..budget)
        .map(|_| {
            let x = rng.random_range(lo..=hi);
            let d = f(x - h) - 2.0 * f(x) + f(x + h);
            Probe {
                at: x,
                second_difference: 4.0 * d,
            }
        })
        .collect()
}

fn status(violation: f64, tol: f64) -> CellStatus {
    if violation > tol {
        CellStatus::Fail
    } else {
        CellStatus::Pass
    }
}

/// Shape of `z ↦ g(ρ, z)`: concave non-increasing for `ρ ≥ 0`, convex
/// non-decreasing for `ρ ∈ (−1, 0)`. On a non-uniform `z` grid the second
/// difference is the change of slope times the mean spacing.
pub fn scan_g_shape(config: &ScanConfig) -> Result<ScanReport> {
    scan_g_shape_with(config, Exec::default())
}

pub fn scan_g_shape_with(config: &ScanConfig, exec: Exec) -> Result<ScanReport> {
    config.validate()?;
    let zs = &config.z_grid;
    let cells = exec.map_range(config.rho_grid.len(), |ci| {
        let rho = config.rho_grid[ci];
        let (expected, sign) = if rho >= 0.0 {
            (Curvature::Concave, 1.0)
        } else {
            (Curvature::Convex, -1.0)
        };
        let ys: Vec<f64> = zs.iter().map(|&z| g_extended(rho, z)).collect();

        // Monotonicity: sign·Δg ≤ tol.
        let mut worst_first = f64::NEG_INFINITY;
        for w in ys.windows(2) {
            worst_first = worst_first.max(sign * (w[1] - w[0]));
        }

        let mut worst: Option<(usize, f64, f64)> = None;
        for i in 1..zs.len().saturating_sub(1) {
            let (h0, h1) = (zs[i] - zs[i - 1], zs[i + 1] - zs[i]);
            if h0 <= 0.0 || h1 <= 0.0 {
                continue;
            }
            let d = ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0) * 0.5 * (h0 + h1);
            let v = expected.violation(d);
            if worst.is_none_or(|(_, _, bv)| v > bv) {
                worst = Some((i, d, v));
            }
        }

        let mut rng = cell_rng(config.seed, ci);
        let probe_list = match worst {
            Some((i, _, _)) => {
                let step = (zs[i + 1] - zs[i]).min(zs[i] - zs[i - 1]);
                probes(|z| g_extended(rho, z), zs, i, step, config.counterexample_budget, &mut rng)
            }
            None => Vec::new(),
        };

        let first_ok = !(worst_first > MONOTONE_TOL);
        let second_violation = worst.map_or(f64::NEG_INFINITY, |w| w.2);
        CellReport {
            rho,
            z: None,
            expected,
            status: if first_ok {
                status(second_violation, config.curvature_tol)
            } else {
                CellStatus::Fail
            },
            worst: worst.map(|w| w.1),
            at: worst.map(|w| zs[w.0]),
            worst_first_difference: worst_first.is_finite().then_some(sign * worst_first),
            chord_excess: None,
            probes: probe_list,
            note: None,
        }
    });
    Ok(ScanReport {
        kind: ScanKind::GShape,
        t_steps: config.t_steps,
        curvature_tol: config.curvature_tol,
        cells,
    })
}

/// Per-ρ uniform `t` grid and the complements `1 − g⁻¹(ρ, t)` on it.
struct TGrid {
    rho: f64,
    ts: Vec<f64>,
    gaps: Vec<f64>,
    step: f64,
}

fn t_grids(config: &ScanConfig, exec: Exec) -> Vec<Option<TGrid>> {
    exec.map(&config.rho_grid, |&rho| {
        if rho < DEGENERATE_RHO {
            return None;
        }
        let lo = (-rho).exp2();
        let ts = uniform_grid(lo, 1.0, config.t_steps);
        let gaps = ts.iter().map(|&t| g_inverse_gap(rho, t)).collect();
        Some(TGrid {
            rho,
            ts,
            gaps,
            step: (1.0 - lo) / config.t_steps as f64,
        })
    })
}

fn t_scan<E, V>(config: &ScanConfig, exec: Exec, kind: ScanKind, expected_for: E, value: V) -> Result<ScanReport>
where
    E: Fn(f64) -> Curvature + Sync + Send,
    V: Fn(f64, f64, f64) -> f64 + Sync + Send,
{
    config.validate()?;
    let grids = t_grids(config, exec);
    let nz = config.z_grid.len();
    let cells = exec.map_range(grids.len() * nz, |ci| {
        let (ri, zi) = (ci / nz, ci % nz);
        let rho = config.rho_grid[ri];
        let z = config.z_grid[zi];
        let expected = expected_for(rho);
        let Some(grid) = &grids[ri] else {
            return CellReport::skipped(rho, Some(z), expected, "degenerate interval");
        };
        let ys: Vec<f64> = grid.gaps.iter().map(|&gap| value(grid.rho, z, gap)).collect();
        let worst = worst_second_difference(&ys, expected);

        let chord_excess = (kind == ScanKind::ConvexityF).then(|| {
            let (lo, g_z) = (grid.ts[0], g_extended(rho, z));
            grid.ts
                .iter()
                .zip(&ys)
                .map(|(&t, &f)| f - (1.0 + (g_z - 1.0) * (t - 1.0) / (lo - 1.0)))
                .fold(f64::NEG_INFINITY, f64::max)
        });

        let mut rng = cell_rng(config.seed, ci);
        let probe_list = match &worst {
            Some(w) => {
                let f = |t: f64| value(grid.rho, z, g_inverse_gap(grid.rho, t));
                probes(f, &grid.ts, w.index, grid.step, config.counterexample_budget, &mut rng)
            }
            None => Vec::new(),
        };

        let mut st = status(worst.as_ref().map_or(f64::NEG_INFINITY, |w| w.violation), config.curvature_tol);
        if chord_excess.is_some_and(|c| c > CHORD_TOL) {
            st = CellStatus::Fail;
        }
        CellReport {
            rho,
            z: Some(z),
            expected,
            status: st,
            worst: worst.as_ref().map(|w| w.value),
            at: worst.as_ref().map(|w| grid.ts[w.index]),
            worst_first_difference: None,
            chord_excess,
            probes: probe_list,
            note: None,
        }
    });
    Ok(ScanReport {
        kind,
        t_steps: config.t_steps,
        curvature_tol: config.curvature_tol,
        cells,
    })
}

/// Convexity of `t ↦ F(z, ρ, t)` and the chord bound
/// `F ≤ 1 + (g(ρ, z) − 1)(t − 1)/(2^{−ρ} − 1)`.
pub fn scan_convexity_f(config: &ScanConfig) -> Result<ScanReport> {
    scan_convexity_f_with(config, Exec::default())
}

pub fn scan_convexity_f_with(config: &ScanConfig, exec: Exec) -> Result<ScanReport> {
    t_scan(config, exec, ScanKind::ConvexityF, |_| Curvature::Convex, f_from_gap)
}

/// Curvature of `t ↦ H(z, ρ, t)`: concave for `ρ ∈ (0, 1) ∪ (2, ∞)`, convex
/// for `ρ ∈ (1, 2)`, affine at `ρ ∈ {1, 2}`.
pub fn scan_curvature_h(config: &ScanConfig) -> Result<ScanReport> {
    scan_curvature_h_with(config, Exec::default())
}

pub fn scan_curvature_h_with(config: &ScanConfig, exec: Exec) -> Result<ScanReport> {
    t_scan(
        config,
        exec,
        ScanKind::CurvatureH,
        |rho| PlusRegime::of(rho).into(),
        h_from_gap,
    )
}

/// `H` scan that expects every cell to be affine in `t`. Holds at `ρ ∈ {1, 2}`
/// and for `z = 0`; anywhere else it reports the curvature it finds.
pub fn scan_affine_h_with(config: &ScanConfig, exec: Exec) -> Result<ScanReport> {
    t_scan(config, exec, ScanKind::CurvatureH, |_| Curvature::Affine, h_from_gap)
}

// ---------------------------------------------------------------------------
// Elementary inequalities
// ---------------------------------------------------------------------------

/// `f1(x, k) − f2(x, k) = (1+x)^k((k+1)x² − kx + 1) − (1−x)^k((k+1)x² + kx + 1)`.
pub fn f1f2_gap(x: f64, k: f64) -> Result<f64> {
    domain("x", x, (0.0..=1.0).contains(&x), "[0, 1]")?;
    domain("k", k, (0.0..1.0).contains(&k), "[0, 1)")?;
    let q = (k + 1.0) * x * x + 1.0;
    Ok((1.0 + x).powf(k) * (q - k * x) - (1.0 - x).powf(k) * (q + k * x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogitVerdict {
    pub x: f64,
    /// `ln((1+x)/(1−x))`, natural log.
    pub lhs: f64,
    /// `2x/(1+x²)`.
    pub rhs: f64,
    pub holds: bool,
}

/// `ln((1+x)/(1−x)) ≥ 2x/(1+x²)` on `[0, 1)`.
pub fn logit_bound_check(x: f64) -> Result<LogitVerdict> {
    domain("x", x, (0.0..1.0).contains(&x), "[0, 1)")?;
    let lhs = x.ln_1p() - (-x).ln_1p();
    let rhs = 2.0 * x / (1.0 + x * x);
    Ok(LogitVerdict {
        x,
        lhs,
        rhs,
        holds: lhs - rhs >= -ELEMENTARY_TOL,
    })
}

/// Worst value found on a two-dimensional grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridVerdict {
    pub points: usize,
    pub worst: f64,
    pub at: (f64, f64),
    pub holds: bool,
}

/// `f1f2_gap` on `nx` values of `x ∈ [0, 1]` times `nk` values of `k ∈ [0, 1)`.
pub fn f1f2_grid(nx: usize, nk: usize) -> GridVerdict {
    let mut worst = (f64::INFINITY, (0.0, 0.0));
    for i in 0..nx {
        let x = if nx == 1 { 0.0 } else { i as f64 / (nx - 1) as f64 };
        for j in 0..nk {
            let k = j as f64 / nk as f64;
            let v = f1f2_gap(x, k).expect("grid inside the domain");
            if v < worst.0 {
                worst = (v, (x, k));
            }
        }
    }
    GridVerdict {
        points: nx * nk,
        worst: worst.0,
        at: worst.1,
        holds: worst.0 >= -ELEMENTARY_TOL,
    }
}

/// Logit bound at `x = i/n`, `i = 0..n`; reports the smallest `lhs − rhs`.
pub fn logit_grid(n: usize) -> GridVerdict {
    let mut worst = (f64::INFINITY, 0.0);
    for i in 0..n {
        let v = logit_bound_check(i as f64 / n as f64).expect("grid inside the domain");
        if v.lhs - v.rhs < worst.0 {
            worst = (v.lhs - v.rhs, v.x);
        }
    }
    GridVerdict {
        points: n,
        worst: worst.0,
        at: (worst.1, 0.0),
        holds: worst.0 >= -ELEMENTARY_TOL,
    }
}

// ---------------------------------------------------------------------------
// tanh coordinates
// ---------------------------------------------------------------------------

/// `ln cosh x` without overflow.
fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// `h(ρ, tanh k, tanh w)` in closed form:
/// `[cosh((k+w)/(1+ρ))^{1+ρ} + cosh((k−w)/(1+ρ))^{1+ρ}] / (2 cosh k cosh w)`.
pub fn h_tilde(rho: Rho, k: f64, w: f64) -> Result<f64> {
    domain("k", k, (0.0..=K_MAX).contains(&k), "[0, K_MAX]")?;
    domain("w", w, (0.0..=K_MAX).contains(&w), "[0, K_MAX]")?;
    let r = rho.value();
    let base = ln_cosh(k) + ln_cosh(w) + std::f64::consts::LN_2;
    let term = |x: f64| ((1.0 + r) * ln_cosh(x / (1.0 + r)) - base).exp();
    Ok(term(k + w) + term(k - w))
}

/// `h(ρ, tanh k, tanh w)` through the direct formula, with `1 ± tanh` taken
/// from exponentials so that large arguments keep their complements.
pub fn h_of_tanh(rho: Rho, k: f64, w: f64) -> f64 {
    // 1 − tanh x = 2/(1 + e^{2x})
    let m = |x: f64| 2.0 / (1.0 + (2.0 * x).exp());
    let (m1, m2) = (m(k), m(w));
    h_split(rho.value(), 2.0 - m1, m1, 2.0 - m2, m2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepVerdict {
    pub samples: usize,
    pub worst: f64,
    /// `(ρ, k, w)` of the worst sample.
    pub at: (f64, f64, f64),
    pub holds: bool,
}

/// `|h_tilde − h∘tanh|` on `n` random triples with `ρ ∈ [0, rho_max]` and
/// `k, w ∈ [0, K_MAX]`.
pub fn h_tilde_sweep(n: usize, rho_max: f64, seed: u64, tol: f64) -> Result<SweepVerdict> {
    let rho_max = Rho::new(rho_max)?.value();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = (0.0f64, (0.0, 0.0, 0.0));
    for _ in 0..n {
        let r = rng.random_range(0.0..=rho_max);
        let k = rng.random_range(0.0..=K_MAX);
        let w = rng.random_range(0.0..=K_MAX);
        let rho = Rho::new(r)?;
        let d = (h_tilde(rho, k, w)? - h_of_tanh(rho, k, w)).abs();
        if d > worst.0 || d.is_nan() {
            worst = (d, (r, k, w));
        }
    }
    Ok(SweepVerdict {
        samples: n,
        worst: worst.0,
        at: worst.1,
        holds: worst.0 <= tol,
    })
}

// ---------------------------------------------------------------------------
// J and R
// ---------------------------------------------------------------------------

fn check_wedge(a: f64, b: f64) -> Result<()> {
    domain("a", a, (0.0..=K_MAX).contains(&a), "[0, K_MAX]")?;
    domain("b", b, b.abs() <= a, "[-a, a]")?;
    Ok(())
}

/// The two cancelling terms of `J`, kept apart so that callers can size a
/// rounding allowance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Difference {
    pub left: f64,
    pub right: f64,
}

impl Difference {
    pub fn value(&self) -> f64 {
        self.left - self.right
    }

    /// Absolute tolerance: [`JR_ABS_TOL`] plus a rounding allowance
    /// proportional to the size of the terms.
    pub fn tolerance(&self) -> f64 {
        JR_ABS_TOL + JR_ROUNDING_ULPS * f64::EPSILON * (self.left.abs() + self.right.abs())
    }
}

/// `J = cosh(b)^{1−ρ} cosh(a − ρ(a+b)/2) − cosh(a)^{1−ρ} cosh(b − ρ(a+b)/2)`.
pub fn j_terms(rho: Rho, a: f64, b: f64) -> Result<Difference> {
    check_wedge(a, b)?;
    let r = rho.value();
    let c = r * (a + b) / 2.0;
    Ok(Difference {
        left: b.cosh().powf(1.0 - r) * (a - c).cosh(),
        right: a.cosh().powf(1.0 - r) * (b - c).cosh(),
    })
}

pub fn j_func(rho: Rho, a: f64, b: f64) -> Result<f64> {
    Ok(j_terms(rho, a, b)?.value())
}

/// `R(ρ, a, b)` together with the magnitude of its numerator terms divided by
/// the denominator.
pub fn r_terms(rho: Rho, a: f64, b: f64) -> Result<(f64, f64)> {
    check_wedge(a, b)?;
    let r = rho.value();
    let (s, d) = ((a + b) / 2.0, (a - b) / 2.0);
    let (ca, cb) = (a.cosh().powf(1.0 - r), b.cosh().powf(1.0 - r));
    let n1 = cb * a.cosh() * (s * r - d).sinh();
    let n2 = ca * b.cosh() * (s * r + d).sinh();
    let den = ca + cb;
    Ok(((n1 + n2) / den, (n1.abs() + n2.abs()) / den))
}

pub fn r_func(rho: Rho, a: f64, b: f64) -> Result<f64> {
    Ok(r_terms(rho, a, b)?.0)
}

/// `R(ρ, s, s)` with `s = (a+b)/2`: `cosh(s) sinh(ρ s)`.
pub fn r_bound(rho: Rho, a: f64, b: f64) -> f64 {
    let s = (a + b) / 2.0;
    s.cosh() * (rho.value() * s).sinh()
}

/// `J` and the `R` inequality over the wedge `a ∈ [0, k_max]`, `b ∈ [−a, a]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WedgeReport {
    pub rho: f64,
    pub regime: PlusRegime,
    pub points: usize,
    /// Smallest `J + tolerance`; `J ≥ 0` holds where this is non-negative.
    pub j_margin: f64,
    pub j_at: (f64, f64),
    /// Smallest `bound − R + tolerance`.
    pub r_margin: f64,
    pub r_at: (f64, f64),
    /// `J ≥ 0` everywhere, within tolerance.
    pub j_nonnegative: bool,
    /// `R ≤ cosh(s) sinh(ρ s)` everywhere, within tolerance.
    pub r_bounded: bool,
    /// Same two checks with the orientation flipped for `ρ ∈ (1, 2)`, where
    /// `H` is convex; identical to the literal checks elsewhere.
    pub regime_consistent: bool,
}

impl WedgeReport {
    pub fn holds(&self) -> bool {
        self.j_nonnegative && self.r_bounded
    }
}

pub fn wedge_scan(rho: Rho, n: usize, k_max: f64) -> Result<WedgeReport> {
    let k_max = domain("k_max", k_max, (0.0..=K_MAX).contains(&k_max), "[0, K_MAX]")?;
    if n < 2 {
        return Err(Error::InvalidConfig("wedge grid needs at least 2 points per side".into()));
    }
    let regime = PlusRegime::of(rho.value());
    let flip = if regime == PlusRegime::Convex { -1.0 } else { 1.0 };
    let mut j_lit = (f64::INFINITY, (0.0, 0.0));
    let mut r_lit = (f64::INFINITY, (0.0, 0.0));
    let mut oriented = f64::INFINITY;
    for i in 0..n {
        let a = if i == n - 1 { k_max } else { k_max * i as f64 / (n - 1) as f64 };
        for jx in 0..n {
            let b = if jx == n - 1 { a } else { -a + 2.0 * a * jx as f64 / (n - 1) as f64 };
            let j = j_terms(rho, a, b)?;
            let (jv, jt) = (j.value(), j.tolerance());
            if jv + jt < j_lit.0 {
                j_lit = (jv + jt, (a, b));
            }
            let (rv, rscale) = r_terms(rho, a, b)?;
            let bound = r_bound(rho, a, b);
            let rdiff = Difference {
                left: bound,
                right: rv,
            };
            let rt = JR_ABS_TOL + JR_ROUNDING_ULPS * f64::EPSILON * (rscale + bound.abs());
            let rm = rdiff.value() + rt;
            if rm < r_lit.0 {
                r_lit = (rm, (a, b));
            }
            oriented = oriented.min(flip * jv + jt).min(flip * rdiff.value() + rt);
        }
    }
    Ok(WedgeReport {
        rho: rho.value(),
        regime,
        points: n * n,
        j_margin: j_lit.0,
        j_at: j_lit.1,
        r_margin: r_lit.0,
        r_at: r_lit.1,
        j_nonnegative: j_lit.0 >= 0.0,
        r_bounded: r_lit.0 >= 0.0,
        regime_consistent: oriented >= 0.0,
    })
}

/// Monotonicity of `k' ↦ J(ρ, k'+w', k'−w')` on `k' ∈ [0, k_max − w']`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonotoneReport {
    pub rho: f64,
    pub w: f64,
    /// Smallest forward difference, oriented so that the expected direction
    /// is positive (increasing for concave `ρ`, decreasing for convex).
    pub worst_step: f64,
    pub at: f64,
    pub holds: bool,
}

pub fn j_monotone_along_k(rho: Rho, w: f64, k_max: f64, steps: usize) -> Result<MonotoneReport> {
    let span = k_max - w;
    domain("w", w, w >= 0.0 && span >= 0.0, "[0, k_max]")?;
    let flip = if PlusRegime::of(rho.value()) == PlusRegime::Convex { -1.0 } else { 1.0 };
    let ks = uniform_grid(0.0, span, steps.max(1));
    let mut prev: Option<Difference> = None;
    let mut worst = (f64::INFINITY, 0.0);
    for &k in &ks {
        let cur = j_terms(rho, (k + w).min(K_MAX), k - w)?;
        if let Some(p) = prev {
            let step = flip * (cur.value() - p.value());
            let tol = JR_ROUNDING_ULPS
                * f64::EPSILON
                * (cur.left.abs() + cur.right.abs() + p.left.abs() + p.right.abs());
            if step + tol < worst.0 {
                worst = (step + tol, k);
            }
        }
        prev = Some(cur);
    }
    Ok(MonotoneReport {
        rho: rho.value(),
        w,
        worst_step: worst.0,
        at: worst.1,
        holds: worst.0 >= -JR_ABS_TOL,
    })
}
