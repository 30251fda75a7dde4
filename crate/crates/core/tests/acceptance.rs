//! Acceptance suite. Each test prints one `criterion N: PASS|FAIL` line.
//!
//! cargo test -p polar-extrema --test acceptance -- --nocapture --test-threads=1

use std::time::{Duration, Instant};

use polar_extrema::extremal::{corollary1_check, corollary2_check, theorem1_from_reps, MatchedExtremes, PlusRegime};
use polar_extrema::lemma_lab::{
    f1f2_grid, h_tilde_sweep, logit_grid, scan_affine_h_with, scan_convexity_f, scan_curvature_h, scan_g_shape,
    uniform_grid, wedge_scan, ScanConfig, K_MAX,
};
use polar_extrema::polar_sim::{bec_recursion, polarize_tree, synthesize_path, SimConfig};
use polar_extrema::random::random_channels;
use polar_extrema::transform::{
    chain_rule_gap, e0_minus_formula, e0_plus_formula, e0_synthesized, ordering_from_reps, submartingale_from_reps,
};
use polar_extrema::{bhattacharyya, capacity, e0_direct, e0_from_zrep, make_bec, make_bsc, z_rep, Bdmc, Exec, Rho, ZRep};

const GRID: [f64; 7] = [0.25, 0.5, 1.0, 1.5, 2.0, 4.0, 8.0];
const EXTRA: [f64; 4] = [0.75, 1.25, 1.75, 3.0];
const SEED: u64 = 2024;

fn rho(v: f64) -> Rho {
    Rho::new(v).unwrap()
}

fn verdict(n: u32, ok: bool, elapsed: Duration, limit: Duration, detail: &str) {
    let in_time = elapsed < limit;
    let tag = if ok && in_time { "PASS" } else { "FAIL" };
    println!(
        "criterion {n}: {tag}  {detail}  [{:.2}s, limit {}s]",
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    assert!(ok, "criterion {n} failed: {detail}");
    assert!(in_time, "criterion {n} exceeded {limit:?}");
}

struct Pair {
    w1: Bdmc,
    w2: Bdmc,
    r1: ZRep,
    r2: ZRep,
}

fn pairs(n: usize) -> Vec<Pair> {
    let ws = random_channels(SEED, 2 * n, 2, 6);
    ws.chunks(2)
        .map(|c| Pair {
            r1: z_rep(&c[0]),
            r2: z_rep(&c[1]),
            w1: c[0].clone(),
            w2: c[1].clone(),
        })
        .collect()
}

/// Running maximum with the place it was seen.
#[derive(Default)]
struct Worst {
    value: f64,
    at: String,
}

impl Worst {
    fn see(&mut self, v: f64, at: impl FnOnce() -> String) {
        if v > self.value || v.is_nan() {
            self.value = v;
            self.at = at();
        }
    }
}

#[test]
fn criterion_1_representation() {
    let start = Instant::now();
    let ws = random_channels(SEED, 1000, 2, 6);
    let mut worst = Worst::default();
    for (i, w) in ws.iter().enumerate() {
        let rep = z_rep(w);
        for &r in &GRID {
            let d = (e0_from_zrep(rho(r), &rep) - e0_direct(rho(r), w)).abs();
            worst.see(d, || format!("channel {i}, rho {r}"));
        }
    }
    verdict(
        1,
        worst.value <= 1e-12,
        start.elapsed(),
        Duration::from_secs(5),
        &format!("max |zrep - direct| = {:.2e} ({}) over 7000 cases", worst.value, worst.at),
    );
}

#[test]
fn criterion_2_transform_formulas() {
    let start = Instant::now();
    let ps = pairs(500);
    let (mut synth, mut sym) = (Worst::default(), Worst::default());
    for (i, p) in ps.iter().enumerate() {
        for &r in &GRID {
            let rh = rho(r);
            let (sm, sp) = e0_synthesized(rh, &p.w1, &p.w2);
            let (fm, fp) = (e0_minus_formula(rh, &p.r1, &p.r2), e0_plus_formula(rh, &p.r1, &p.r2));
            synth.see((fm - sm).abs().max((fp - sp).abs()), || format!("pair {i}, rho {r}"));
            let (gm, gp) = (e0_minus_formula(rh, &p.r2, &p.r1), e0_plus_formula(rh, &p.r2, &p.r1));
            sym.see((fm - gm).abs().max((fp - gp).abs()), || format!("pair {i}, rho {r}"));
        }
    }
    verdict(
        2,
        synth.value <= 1e-10 && sym.value <= 1e-12,
        start.elapsed(),
        Duration::from_secs(30),
        &format!(
            "formula vs synthesis {:.2e} ({}), swap symmetry {:.2e} ({})",
            synth.value, synth.at, sym.value, sym.at
        ),
    );
}

#[test]
fn criterion_3_ordering_and_sum() {
    let start = Instant::now();
    let ps = pairs(500);
    let mut failures = Vec::new();
    let mut min_excess = f64::INFINITY;
    for (i, p) in ps.iter().enumerate() {
        for &r in &GRID {
            let o = ordering_from_reps(rho(r), &p.r1, &p.r2);
            let s = submartingale_from_reps(rho(r), &p.r1, &p.r2);
            min_excess = min_excess.min(s.excess());
            if !(o.holds() && s.holds) {
                failures.push(format!("pair {i} rho {r}"));
            }
        }
    }
    verdict(
        3,
        failures.is_empty(),
        start.elapsed(),
        Duration::from_secs(30),
        &format!(
            "{} of 3500 verdicts failed {:?}; smallest sum excess {min_excess:.2e}",
            failures.len(),
            &failures[..failures.len().min(4)]
        ),
    );
}

#[test]
fn criterion_4_extremality() {
    let start = Instant::now();
    let ps = pairs(500);
    let mut grid: Vec<f64> = GRID.iter().chain(EXTRA.iter()).copied().collect();
    grid.sort_by(f64::total_cmp);
    let mut failures = Vec::new();
    let mut boundary = Worst::default();
    for (i, p) in ps.iter().enumerate() {
        for &r in &grid {
            let rep = theorem1_from_reps(rho(r), &p.r1, &p.r2).unwrap();
            if !rep.holds() {
                failures.push(format!("pair {i} rho {r}"));
            }
            if rep.regime == PlusRegime::Affine {
                let t = rep.plus;
                let spread = (t.bec - t.actual).abs().max((t.bsc - t.actual).abs());
                boundary.see(spread, || format!("pair {i}, rho {r}"));
            }
        }
    }
    verdict(
        4,
        failures.is_empty() && boundary.value <= 1e-10,
        start.elapsed(),
        Duration::from_secs(60),
        &format!(
            "{} of {} reports failed {:?}; plus-side spread at rho 1, 2: {:.2e} ({})",
            failures.len(),
            ps.len() * grid.len(),
            &failures[..failures.len().min(4)],
            boundary.value,
            boundary.at
        ),
    );
}

#[test]
fn criterion_5_corollaries() {
    let start = Instant::now();
    let ws = random_channels(SEED + 1, 200, 2, 6);
    let mut failures = Vec::new();
    for (i, w) in ws.iter().enumerate() {
        for &r in [0.0, 0.25, 0.5, 1.0].iter() {
            if !corollary1_check(rho(r), w).unwrap().holds() {
                failures.push(format!("spread: channel {i} rho {r}"));
            }
        }
        for &r in GRID.iter().chain(EXTRA.iter()) {
            if !corollary2_check(rho(r), w).unwrap().holds() {
                failures.push(format!("Z(rho): channel {i} rho {r}"));
            }
        }
    }
    let mut self_match = Worst::default();
    for eps in [0.0, 0.05, 0.3, 0.5, 0.77, 0.99, 1.0] {
        let w = make_bec(eps).unwrap();
        let rep = z_rep(&w);
        for &r in &GRID {
            let m = MatchedExtremes::for_channel(rho(r), &w).unwrap();
            let t = theorem1_from_reps(rho(r), &rep, &rep).unwrap();
            let d = (m.bec_epsilon - eps)
                .abs()
                .max((t.minus.bec - t.minus.actual).abs())
                .max((t.plus.bec - t.plus.actual).abs());
            self_match.see(d, || format!("eps {eps}, rho {r}"));
        }
    }
    verdict(
        5,
        failures.is_empty() && self_match.value <= 1e-12,
        start.elapsed(),
        Duration::from_secs(60),
        &format!(
            "{} of {} verdicts failed {:?}; BEC self-matching {:.2e} ({})",
            failures.len(),
            200 * 15,
            &failures[..failures.len().min(4)],
            self_match.value,
            self_match.at
        ),
    );
}

#[test]
fn criterion_6_capacity_and_cutoff() {
    let start = Instant::now();
    let ps = pairs(500);
    let (mut slope, mut cutoff, mut chain) = (Worst::default(), Worst::default(), Worst::default());
    let small = rho(1e-6);
    for (i, p) in ps.iter().enumerate() {
        for (j, w) in [&p.w1, &p.w2].into_iter().enumerate() {
            slope.see((e0_direct(small, w) / 1e-6 - capacity(w)).abs(), || format!("channel {}", 2 * i + j));
            let cut = (2.0 / (1.0 + bhattacharyya(w))).log2();
            cutoff.see((e0_direct(rho(1.0), w) - cut).abs(), || format!("channel {}", 2 * i + j));
        }
        chain.see(chain_rule_gap(&p.w1, &p.w2).abs(), || format!("pair {i}"));
    }
    verdict(
        6,
        slope.value <= 1e-4 && cutoff.value <= 1e-12 && chain.value <= 1e-9,
        start.elapsed(),
        Duration::from_secs(30),
        &format!(
            "slope at 0 {:.2e} ({}), cutoff {:.2e} ({}), chain rule {:.2e} ({})",
            slope.value, slope.at, cutoff.value, cutoff.at, chain.value, chain.at
        ),
    );
}

#[test]
fn criterion_7_analytic_scans() {
    let start = Instant::now();
    let mut parts: Vec<(String, bool)> = Vec::new();

    let mut g_cfg = ScanConfig {
        z_grid: uniform_grid(0.0, 1.0, 1000),
        ..ScanConfig::default()
    };
    g_cfg.rho_grid.splice(0..0, [-0.9, -0.5, 0.0]);
    let g = scan_g_shape(&g_cfg).unwrap();
    parts.push((format!("g shape {}/{} cells", g.cells.len() - g.failures().count(), g.cells.len()), g.passed()));

    let cfg = ScanConfig::default();
    let f = scan_convexity_f(&cfg).unwrap();
    parts.push((format!("F convexity {}/{}", f.cells.len() - f.failures().count(), f.cells.len()), f.passed()));
    let h = scan_curvature_h(&cfg).unwrap();
    parts.push((format!("H curvature {}/{}", h.cells.len() - h.failures().count(), h.cells.len()), h.passed()));
    let affine_cfg = ScanConfig {
        rho_grid: vec![1.0, 2.0],
        ..ScanConfig::default()
    };
    let a = scan_affine_h_with(&affine_cfg, Exec::default()).unwrap();
    parts.push((format!("H affine at 1, 2 {}/{}", a.cells.len() - a.failures().count(), a.cells.len()), a.passed()));

    let f12 = f1f2_grid(200, 200);
    parts.push((format!("f1-f2 min {:.2e}", f12.worst), f12.holds));
    let lg = logit_grid(1000);
    parts.push((format!("logit min {:.2e}", lg.worst), lg.holds));
    let ht = h_tilde_sweep(10_000, 8.0, SEED, 1e-11).unwrap();
    parts.push((format!("h_tilde max {:.2e}", ht.worst), ht.holds));

    let mut oriented = true;
    for r in [0.25, 0.5, 1.0, 1.5, 2.0, 4.0] {
        let w = wedge_scan(rho(r), 100, K_MAX).unwrap();
        oriented &= w.regime_consistent;
        parts.push((
            format!(
                "J/R rho {r}: J margin {:.3e} at ({:.2}, {:.2}), R margin {:.3e}",
                w.j_margin, w.j_at.0, w.j_at.1, w.r_margin
            ),
            w.holds(),
        ));
    }
    let failed: Vec<&str> = parts.iter().filter(|p| !p.1).map(|p| p.0.as_str()).collect();
    for (d, ok) in &parts {
        println!("  {} {d}", if *ok { "ok  " } else { "FAIL" });
    }
    println!("  info: J/R with the inequality reversed on (1, 2): {}", if oriented { "holds" } else { "fails" });
    verdict(
        7,
        failed.is_empty(),
        start.elapsed(),
        Duration::from_secs(120),
        &format!("{} of {} checks failed: {failed:?}", failed.len(), parts.len()),
    );
}

#[test]
fn criterion_8_simulator() {
    let start = Instant::now();
    let rhos: Vec<Rho> = [0.5, 1.0, 2.0].map(rho).to_vec();
    let cfg = |depth| SimConfig {
        depth,
        rho_list: rhos.clone(),
        ..SimConfig::default()
    };

    let tree = polarize_tree(&make_bec(0.5).unwrap(), &cfg(10)).unwrap();
    let oracle = bec_recursion(0.5, 10).unwrap();
    let mut bec = Worst::default();
    let mut paths_match = tree.records.len() == oracle.len();
    for (rec, (path, eps)) in tree.records.iter().zip(&oracle) {
        paths_match &= rec.path == *path;
        bec.see((rec.capacity - (1.0 - eps)).abs(), || format!("{path} capacity"));
        for (k, r) in rhos.iter().enumerate() {
            let want = ZRep::bec(*eps).unwrap().e0(*r);
            bec.see((rec.e0[k] - want).abs(), || format!("{path} rho {}", r.value()));
        }
    }
    let mean = (tree.mean_leaf_capacity() - 0.5).abs();

    let w = make_bsc(0.11).unwrap();
    let small = polarize_tree(&w, &cfg(3)).unwrap();
    let mut bsc = Worst::default();
    for rec in &small.records {
        let ch = synthesize_path(&w, &rec.path).unwrap();
        bsc.see((rec.capacity - capacity(&ch)).abs(), || format!("{} capacity", rec.path));
        for (k, r) in rhos.iter().enumerate() {
            bsc.see((rec.e0[k] - e0_direct(*r, &ch)).abs(), || format!("{} rho {}", rec.path, r.value()));
        }
    }

    verdict(
        8,
        paths_match && !tree.any_quantized() && bec.value <= 1e-12 && bsc.value <= 1e-9 && mean <= 1e-9,
        start.elapsed(),
        Duration::from_secs(60),
        &format!(
            "BEC depth 10 vs recursion {:.2e} ({}); BSC depth 3 vs synthesis {:.2e} ({}); leaf mean defect {mean:.2e}",
            bec.value, bec.at, bsc.value, bsc.at
        ),
    );
}
