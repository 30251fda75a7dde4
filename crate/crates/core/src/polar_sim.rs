//! Multi-level polarization of identical copies, evolved on
//! Z-representations.
//!
//! Nodes are stored breadth-first with the minus child before the plus child,
//! so the children of node `i` sit at `2i + 1` and `2i + 2`. When a node's
//! support grows past `max_atoms` it is quantized (mass-preserving rounding of
//! `z` to cell centers) before being combined further; the flag is carried in
//! the records so that exact comparisons can skip the affected subtrees.

use serde::Serialize;

use crate::channel::{Atom, Bdmc, Rho, ZRep, z_rep};
use crate::error::{Error, Result};
use crate::extremal::{MatchedExtremes, PlusRegime};
use crate::numeric::fmt_f64;
use crate::par::Exec;
use crate::transform::{e0_minus_formula, e0_plus_formula, minus_synth, plus_synth, zrep_minus, zrep_plus};

pub const MAX_DEPTH: usize = 24;
/// Slack of the one-step envelope and martingale checks.
pub const SIM_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub depth: usize,
    pub rho_list: Vec<Rho>,
    /// Largest support a node may have before it is quantized.
    pub max_atoms: usize,
    /// Number of `z` cells used when quantizing; `max_atoms − 2` when absent
    /// (the exact atoms at 0 and 1 are kept apart).
    pub quantize_grid: Option<usize>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            depth: 6,
            rho_list: vec![Rho::new(1.0).expect("valid rho")],
            max_atoms: 1024,
            quantize_grid: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.depth > MAX_DEPTH {
            return Err(Error::InvalidConfig(format!(
                "depth {} exceeds {MAX_DEPTH}",
                self.depth
            )));
        }
        if self.max_atoms < 2 {
            return Err(Error::InvalidConfig(format!(
                "max_atoms = {} is below 2",
                self.max_atoms
            )));
        }
        let grid = self.grid();
        if grid == 0 || grid + 2 > self.max_atoms {
            return Err(Error::InvalidConfig(format!(
                "quantize grid {grid} must be in [1, max_atoms - 2]"
            )));
        }
        Ok(())
    }

    fn grid(&self) -> usize {
        self.quantize_grid
            .unwrap_or(self.max_atoms.saturating_sub(2))
    }
}

/// Mass-preserving rounding of interior atoms to the centers of `grid`
/// uniform cells on `(0, 1)`. Atoms at exactly 0 or 1 stay put.
pub fn quantize(rep: &ZRep, grid: usize) -> ZRep {
    let n = grid as f64;
    let atoms = rep
        .atoms()
        .iter()
        .map(|a| {
            if a.z == 0.0 || a.gap == 0.0 {
                *a
            } else {
                let cell = ((a.z * n).floor() as usize).min(grid - 1);
                Atom::new((cell as f64 + 0.5) / n, a.p)
            }
        })
        .collect();
    ZRep::canonical(atoms)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ChildKind {
    Minus,
    Plus,
}

impl ChildKind {
    pub fn symbol(self) -> char {
        match self {
            ChildKind::Minus => '-',
            ChildKind::Plus => '+',
        }
    }
}

/// One-step bounds on a child's E0, from the BEC and BSC matched to the parent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Envelope {
    pub lower: f64,
    pub upper: f64,
}

impl Envelope {
    pub fn brackets(&self, e0: f64) -> bool {
        e0 >= self.lower - SIM_SLACK && e0 <= self.upper + SIM_SLACK
    }
}

/// Bounds for the `kind` child of a parent with `E0(ρ) = parent_e0`: the
/// minus child lies between the BEC and BSC minus values, the plus child
/// between the plus values ordered by the regime of `ρ`.
pub fn envelope(rho: Rho, parent_e0: f64, kind: ChildKind) -> Result<Envelope> {
    let m = MatchedExtremes::new(rho, parent_e0)?;
    let (bec, bsc) = (m.bec_rep(), m.bsc_rep());
    let (at_bec, at_bsc) = match kind {
        ChildKind::Minus => (e0_minus_formula(rho, &bec, &bec), e0_minus_formula(rho, &bsc, &bsc)),
        ChildKind::Plus => (e0_plus_formula(rho, &bec, &bec), e0_plus_formula(rho, &bsc, &bsc)),
    };
    let (lower, upper) = match (kind, PlusRegime::of(rho.value())) {
        (ChildKind::Minus, _) | (ChildKind::Plus, PlusRegime::Convex) => (at_bec, at_bsc),
        (ChildKind::Plus, PlusRegime::Concave) => (at_bsc, at_bec),
        (ChildKind::Plus, PlusRegime::Affine) => (at_bec.min(at_bsc), at_bec.max(at_bsc)),
    };
    Ok(Envelope { lower, upper })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    /// Transforms from the root, over `-` and `+`; empty at the root.
    pub path: String,
    pub depth: usize,
    /// E0 per entry of the ρ list, in bits.
    pub e0: Vec<f64>,
    pub capacity: f64,
    /// `Z(ρ, ·)` per ρ; absent at `ρ = 0`.
    pub z_rho: Vec<Option<f64>>,
    /// One-step bounds per ρ; absent at the root and at `ρ = 0`.
    pub envelope: Vec<Option<Envelope>>,
    /// Support size of this node before any quantization.
    pub atoms: usize,
    /// This node was quantized before its children were formed.
    pub quantized: bool,
    /// Some ancestor was quantized, so this node is approximate.
    pub lineage_quantized: bool,
}

impl TrajectoryRecord {
    pub fn exact(&self) -> bool {
        !self.lineage_quantized
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolarTree {
    pub rho_list: Vec<Rho>,
    pub depth: usize,
    pub records: Vec<TrajectoryRecord>,
}

struct Node {
    rep: ZRep,
    path: String,
    /// Some ancestor was quantized.
    lineage: bool,
}

fn node_stats(rho_list: &[Rho], rep: &ZRep) -> (Vec<f64>, Vec<Option<f64>>) {
    let e0 = rho_list.iter().map(|&r| rep.e0(r)).collect();
    let z = rho_list.iter().map(|&r| rep.z_rho(r).ok()).collect();
    (e0, z)
}

/// Builds the full tree to `config.depth`.
pub fn polarize_tree(w: &Bdmc, config: &SimConfig) -> Result<PolarTree> {
    polarize_tree_with(w, config, Exec::default())
}

pub fn polarize_tree_with(w: &Bdmc, config: &SimConfig, exec: Exec) -> Result<PolarTree> {
    config.validate()?;
    polarize_rep_with(z_rep(w), config, exec)
}

/// Same as [`polarize_tree`] starting from a Z-representation.
pub fn polarize_rep_with(root: ZRep, config: &SimConfig, exec: Exec) -> Result<PolarTree> {
    config.validate()?;
    let rhos = &config.rho_list;
    let grid = config.grid();
    let total = (1usize << (config.depth + 1)) - 1;
    let mut records = Vec::with_capacity(total);

    // Emits the record of an exact node and returns what its children are built from.
    let settle = |rep: ZRep, path: String, lineage: bool, envelope: Vec<Option<Envelope>>, last: bool| {
        let (e0, z_rho) = node_stats(rhos, &rep);
        let atoms = rep.len();
        let quantized = !last && atoms > config.max_atoms;
        let depth = path.len();
        let record = TrajectoryRecord {
            path: path.clone(),
            depth,
            e0,
            capacity: rep.capacity(),
            z_rho,
            envelope,
            atoms,
            quantized,
            lineage_quantized: lineage,
        };
        let rep = if quantized { quantize(&rep, grid) } else { rep };
        (
            record,
            Node {
                rep,
                path,
                lineage: lineage || quantized,
            },
        )
    };

    let (rec, node) = settle(root, String::new(), false, vec![None; rhos.len()], config.depth == 0);
    records.push(rec);
    let mut level = vec![node];

    for d in 1..=config.depth {
        let last = d == config.depth;
        let children = exec.map(&level, |parent| -> Result<[(TrajectoryRecord, Node); 2]> {
            let parent_e0: Vec<f64> = rhos.iter().map(|&r| parent.rep.e0(r)).collect();
            let make = |kind: ChildKind| -> Result<(TrajectoryRecord, Node)> {
                let rep = match kind {
                    ChildKind::Minus => zrep_minus(&parent.rep, &parent.rep),
                    ChildKind::Plus => zrep_plus(&parent.rep, &parent.rep),
                };
                let env = rhos
                    .iter()
                    .zip(&parent_e0)
                    .map(|(&r, &e)| {
                        if r.value() > 0.0 {
                            envelope(r, e, kind).map(Some)
                        } else {
                            Ok(None)
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                let mut path = parent.path.clone();
                path.push(kind.symbol());
                Ok(settle(rep, path, parent.lineage, env, last))
            };
            Ok([make(ChildKind::Minus)?, make(ChildKind::Plus)?])
        });
        let mut next = Vec::with_capacity(level.len() * 2);
        for pair in children {
            for (rec, node) in pair? {
                records.push(rec);
                next.push(node);
            }
        }
        level = next;
    }
    Ok(PolarTree {
        rho_list: rhos.clone(),
        depth: config.depth,
        records,
    })
}

impl PolarTree {
    pub fn leaves(&self) -> &[TrajectoryRecord] {
        let first = (1usize << self.depth) - 1;
        &self.records[first..]
    }

    pub fn level(&self, d: usize) -> &[TrajectoryRecord] {
        &self.records[(1usize << d) - 1..(1usize << (d + 1)) - 1]
    }

    pub fn any_quantized(&self) -> bool {
        self.records.iter().any(|r| r.quantized)
    }

    /// Nodes whose envelope fails to bracket their E0 at some ρ.
    pub fn envelope_violations(&self) -> Vec<&TrajectoryRecord> {
        self.records
            .iter()
            .filter(|r| {
                r.envelope
                    .iter()
                    .zip(&r.e0)
                    .any(|(env, &e)| env.is_some_and(|env| !env.brackets(e)))
            })
            .collect()
    }

    pub fn mean_leaf_capacity(&self) -> f64 {
        let leaves = self.leaves();
        crate::numeric::compensated_sum(leaves.iter().map(|r| r.capacity)) / leaves.len() as f64
    }

    /// Number of leaves whose capacity lies outside `(lo, hi)`.
    pub fn leaves_outside(&self, lo: f64, hi: f64) -> usize {
        self.leaves()
            .iter()
            .filter(|r| !(r.capacity > lo && r.capacity < hi))
            .count()
    }

    pub fn csv_header(&self) -> Vec<String> {
        let mut h = vec!["path".to_string(), "depth".to_string()];
        for r in &self.rho_list {
            for name in ["e0", "envelope_lo", "envelope_hi", "z_rho"] {
                h.push(format!("{name}_rho={r}"));
            }
        }
        h.extend(
            ["capacity", "atoms", "quantized", "lineage_quantized"]
                .iter()
                .map(|s| s.to_string()),
        );
        h
    }

    pub fn csv_records(&self) -> Vec<Vec<String>> {
        let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
        self.records
            .iter()
            .map(|rec| {
                let mut row = vec![rec.path.clone(), rec.depth.to_string()];
                for i in 0..self.rho_list.len() {
                    row.push(fmt_f64(rec.e0[i]));
                    row.push(opt(rec.envelope[i].map(|e| e.lower)));
                    row.push(opt(rec.envelope[i].map(|e| e.upper)));
                    row.push(opt(rec.z_rho[i]));
                }
                row.push(fmt_f64(rec.capacity));
                row.push(rec.atoms.to_string());
                row.push(rec.quantized.to_string());
                row.push(rec.lineage_quantized.to_string());
                row
            })
            .collect()
    }
}

/// Closed-form erasure probability of every node of a BEC tree, breadth-first:
/// `ε → 2ε − ε²` on the minus side, `ε → ε²` on the plus side.
pub fn bec_recursion(epsilon: f64, depth: usize) -> Result<Vec<(String, f64)>> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::ProbabilityOutOfRange {
            what: "epsilon",
            value: epsilon,
        });
    }
    if depth > MAX_DEPTH {
        return Err(Error::InvalidConfig(format!("depth {depth} exceeds {MAX_DEPTH}")));
    }
    let mut out = Vec::with_capacity((1usize << (depth + 1)) - 1);
    out.push((String::new(), epsilon));
    let mut start = 0;
    for _ in 0..depth {
        let end = out.len();
        for i in start..end {
            let (path, e) = out[i].clone();
            out.push((format!("{path}-"), 2.0 * e - e * e));
            out.push((format!("{path}+"), e * e));
        }
        start = end;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MartingaleVerdict {
    pub rho: f64,
    /// Internal nodes checked; quantized nodes are skipped.
    pub checked: usize,
    pub skipped: usize,
    /// Largest `|I(−) + I(+) − 2 I|`.
    pub worst_capacity_defect: f64,
    /// Smallest `E0(+) + E0(−) − 2 E0`.
    pub worst_e0_excess: f64,
    pub capacity_holds: bool,
    pub e0_holds: bool,
    /// Paths of the first failing nodes.
    pub failing: Vec<String>,
}

impl MartingaleVerdict {
    pub fn holds(&self) -> bool {
        self.capacity_holds && self.e0_holds
    }
}

/// Capacity martingale and E0 submartingale at every internal node of a
/// complete breadth-first tree.
pub fn martingale_check(records: &[TrajectoryRecord], rho_index: usize, rho: Rho) -> Result<MartingaleVerdict> {
    let n = records.len();
    if !(n + 1).is_power_of_two() {
        return Err(Error::InvalidConfig(format!(
            "{n} records do not form a complete tree"
        )));
    }
    if records.first().is_some_and(|r| rho_index >= r.e0.len()) {
        return Err(Error::InvalidConfig(format!("rho index {rho_index} out of range")));
    }
    let mut v = MartingaleVerdict {
        rho: rho.value(),
        checked: 0,
        skipped: 0,
        worst_capacity_defect: 0.0,
        worst_e0_excess: f64::INFINITY,
        capacity_holds: true,
        e0_holds: true,
        failing: Vec::new(),
    };
    for i in 0..(n - 1) / 2 {
        let (node, minus, plus) = (&records[i], &records[2 * i + 1], &records[2 * i + 2]);
        if node.quantized {
            v.skipped += 1;
            continue;
        }
        v.checked += 1;
        let cap = (minus.capacity + plus.capacity - 2.0 * node.capacity).abs();
        let e0 = minus.e0[rho_index] + plus.e0[rho_index] - 2.0 * node.e0[rho_index];
        v.worst_capacity_defect = v.worst_capacity_defect.max(cap);
        v.worst_e0_excess = v.worst_e0_excess.min(e0);
        let (cap_ok, e0_ok) = (cap <= SIM_SLACK, e0 >= -SIM_SLACK);
        v.capacity_holds &= cap_ok;
        v.e0_holds &= e0_ok;
        if !(cap_ok && e0_ok) && v.failing.len() < 16 {
            v.failing.push(node.path.clone());
        }
    }
    if v.checked == 0 {
        v.worst_e0_excess = 0.0;
    }
    Ok(v)
}

/// Channel reached by following `path` with explicit product synthesis.
/// Output alphabets grow doubly exponentially; keep paths short.
pub fn synthesize_path(w: &Bdmc, path: &str) -> Result<Bdmc> {
    let mut cur = w.clone();
    for c in path.chars() {
        cur = match c {
            '-' | '−' => minus_synth(&cur, &cur),
            '+' => plus_synth(&cur, &cur),
            other => {
                return Err(Error::InvalidConfig(format!(
                    "path symbol {other:?} is not '-' or '+'"
                )))
            }
        };
    }
    Ok(cur)
}
