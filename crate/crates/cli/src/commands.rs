use anyhow::{bail, Result};
use polar_extrema::extremal::{
    corollary1_check, corollary2_check, theorem1_report, Corollary1Verdict, Corollary2Verdict,
    ExtremalityReport, BOUNDARY_TOL,
};
use polar_extrema::lemma_lab::{
    f1f2_grid, h_tilde_sweep, j_monotone_along_k, logit_grid, scan_affine_h_with,
    scan_convexity_f, scan_curvature_h, scan_g_shape, uniform_grid, wedge_scan, GridVerdict,
    MonotoneReport, ScanConfig, ScanReport, SweepVerdict, WedgeReport, K_MAX,
};
use polar_extrema::numeric::fmt_f64;
use polar_extrema::polar_sim::{
    bec_recursion, martingale_check, polarize_tree, MartingaleVerdict, SimConfig, SIM_SLACK,
};
use polar_extrema::random::random_channels;
use polar_extrema::transform::{
    check_ordering, check_submartingale, OrderingVerdict, SubmartingaleVerdict, VERDICT_SLACK,
};
use polar_extrema::{Bdmc, ChannelStats, Exec, Rho};
use serde::Serialize;

use crate::channel_file::{load_channel, ChannelSpecFile};
use crate::report::{write_csv, write_json, Format, RunManifest};
use crate::{CertifyArgs, E0Args, PolarizeArgs, RandomArgs, TransformArgs, VerifyArgs};

fn rhos(values: &[f64]) -> Result<Vec<Rho>> {
    if values.is_empty() {
        bail!("at least one --rho is required");
    }
    Ok(values.iter().map(|&r| Rho::new(r)).collect::<polar_extrema::Result<_>>()?)
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

// ---------------------------------------------------------------------------
// e0
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct E0Body {
    stats: Vec<ChannelStats>,
}

pub fn e0(args: &E0Args) -> Result<bool> {
    let rhos = rhos(&args.rho)?;
    let (_, w) = load_channel(&args.channel)?;
    let stats: Vec<ChannelStats> = rhos.iter().map(|&r| ChannelStats::of(r, &w)).collect();
    let manifest = RunManifest::new("e0", args, None)?;
    let out = args.output.out.as_deref();
    match args.output.format {
        Format::Json => write_json(out, &manifest, &E0Body { stats })?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = stats
                .iter()
                .map(|s| {
                    vec![
                        fmt_f64(s.rho),
                        fmt_f64(s.e0),
                        fmt_f64(s.capacity),
                        fmt_f64(s.bhattacharyya),
                        opt(s.z_rho),
                    ]
                })
                .collect();
            write_csv(out, &manifest, &["rho", "e0", "capacity", "bhattacharyya", "z_rho"], &rows)?
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Channel pairs
// ---------------------------------------------------------------------------

fn channel_pairs(files: &[std::path::PathBuf], random: &RandomArgs) -> Result<Vec<(Bdmc, Bdmc)>> {
    match (random.random, files.len()) {
        (Some(_), n) if n > 0 => bail!("--random cannot be combined with channel files"),
        (Some(n), _) => {
            if random.outputs == 0 {
                bail!("--outputs must be at least 1");
            }
            let chans = random_channels(random.seed, 2 * n, random.outputs, random.outputs);
            Ok(chans.chunks(2).map(|c| (c[0].clone(), c[1].clone())).collect())
        }
        (None, 1) => {
            let (_, w) = load_channel(&files[0])?;
            Ok(vec![(w.clone(), w)])
        }
        (None, 2) => {
            let (_, w1) = load_channel(&files[0])?;
            let (_, w2) = load_channel(&files[1])?;
            Ok(vec![(w1, w2)])
        }
        _ => bail!("give one or two channel files, or --random N"),
    }
}

fn seed_of(random: &RandomArgs) -> Option<u64> {
    random.random.map(|_| random.seed)
}

// ---------------------------------------------------------------------------
// transform
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct TransformRow {
    pair: usize,
    ordering: OrderingVerdict,
    submartingale: SubmartingaleVerdict,
}

#[derive(Serialize)]
struct TransformBody {
    all_hold: bool,
    results: Vec<TransformRow>,
}

pub fn transform(args: &TransformArgs) -> Result<bool> {
    let rhos = rhos(&args.rho)?;
    let pairs = channel_pairs(&args.channels, &args.random)?;
    let mut results = Vec::new();
    for (i, (w1, w2)) in pairs.iter().enumerate() {
        for &r in &rhos {
            results.push(TransformRow {
                pair: i,
                ordering: check_ordering(r, w1, w2),
                submartingale: check_submartingale(r, w1, w2),
            });
        }
    }
    let all_hold = results
        .iter()
        .all(|r| r.ordering.holds() && r.submartingale.holds);
    let manifest =
        RunManifest::new("transform", args, seed_of(&args.random))?.tolerance("verdict_slack", VERDICT_SLACK);
    let out = args.output.out.as_deref();
    match args.output.format {
        Format::Json => write_json(out, &manifest, &TransformBody { all_hold, results })?,
        Format::Csv => {
            let header = [
                "pair",
                "rho",
                "e0_minus",
                "e0_w1",
                "e0_w2",
                "e0_plus",
                "ordering_holds",
                "submartingale_excess",
                "submartingale_holds",
            ];
            let rows: Vec<Vec<String>> = results
                .iter()
                .map(|r| {
                    let o = &r.ordering;
                    vec![
                        r.pair.to_string(),
                        fmt_f64(o.rho),
                        fmt_f64(o.e0_minus),
                        fmt_f64(o.e0_w1),
                        fmt_f64(o.e0_w2),
                        fmt_f64(o.e0_plus),
                        o.holds().to_string(),
                        fmt_f64(r.submartingale.excess()),
                        r.submartingale.holds.to_string(),
                    ]
                })
                .collect();
            write_csv(out, &manifest, &header, &rows)?
        }
    }
    Ok(all_hold)
}

// ---------------------------------------------------------------------------
// verify-theorem
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct TheoremRow {
    pair: usize,
    report: ExtremalityReport,
}

#[derive(Serialize)]
struct CorollaryRow<T> {
    pair: usize,
    verdict: T,
}

#[derive(Serialize)]
struct VerifyBody {
    all_hold: bool,
    theorem: Vec<TheoremRow>,
    /// Identical copies of the first channel of each pair, rho in [0, 1].
    corollary1: Vec<CorollaryRow<Corollary1Verdict>>,
    /// Identical copies of the first channel of each pair, rho > 0.
    corollary2: Vec<CorollaryRow<Corollary2Verdict>>,
}

pub fn verify_theorem(args: &VerifyArgs) -> Result<bool> {
    let rhos = rhos(&args.rho)?;
    let pairs = channel_pairs(&args.channels, &args.random)?;
    let mut body = VerifyBody {
        all_hold: true,
        theorem: Vec::new(),
        corollary1: Vec::new(),
        corollary2: Vec::new(),
    };
    for (i, (w1, w2)) in pairs.iter().enumerate() {
        for &r in &rhos {
            if r.value() > 0.0 {
                body.theorem.push(TheoremRow {
                    pair: i,
                    report: theorem1_report(r, w1, w2)?,
                });
                body.corollary2.push(CorollaryRow {
                    pair: i,
                    verdict: corollary2_check(r, w1)?,
                });
            }
            if r.value() <= 1.0 {
                body.corollary1.push(CorollaryRow {
                    pair: i,
                    verdict: corollary1_check(r, w1)?,
                });
            }
        }
    }
    body.all_hold = body.theorem.iter().all(|t| t.report.holds())
        && body.corollary1.iter().all(|c| c.verdict.holds())
        && body.corollary2.iter().all(|c| c.verdict.holds());

    let manifest = RunManifest::new("verify-theorem", args, seed_of(&args.random))?
        .tolerance("verdict_slack", VERDICT_SLACK)
        .tolerance("boundary_equality", BOUNDARY_TOL);
    let out = args.output.out.as_deref();
    match args.output.format {
        Format::Json => write_json(out, &manifest, &body)?,
        Format::Csv => {
            let mut rows = Vec::new();
            let mut push = |check: &str, pair: usize, rho: f64, lo: f64, actual: f64, hi: f64, holds: bool| {
                rows.push(vec![
                    check.to_string(),
                    pair.to_string(),
                    fmt_f64(rho),
                    fmt_f64(lo),
                    fmt_f64(actual),
                    fmt_f64(hi),
                    holds.to_string(),
                ]);
            };
            for t in &body.theorem {
                let r = &t.report;
                push("theorem1_minus", t.pair, r.rho, r.minus.bec, r.minus.actual, r.minus.bsc, r.minus_lower && r.minus_upper);
                let (lo, hi) = match r.regime {
                    polar_extrema::extremal::PlusRegime::Convex => (r.plus.bec, r.plus.bsc),
                    _ => (r.plus.bsc, r.plus.bec),
                };
                push("theorem1_plus", t.pair, r.rho, lo, r.plus.actual, hi, r.plus_lower && r.plus_upper);
            }
            for c in &body.corollary1 {
                let v = &c.verdict;
                if let Some(e) = v.e0 {
                    push("corollary1_e0", c.pair, v.rho, e.bsc, e.actual, e.bec, e.holds());
                }
                let s = v.capacity;
                push("corollary1_capacity", c.pair, v.rho, s.bsc, s.actual, s.bec, s.holds());
            }
            for c in &body.corollary2 {
                let v = &c.verdict;
                push("corollary2_minus", c.pair, v.rho, v.minus.bsc, v.minus.actual, v.minus.bec, v.minus_lower && v.minus_upper);
                let (lo, hi) = match v.regime {
                    polar_extrema::extremal::PlusRegime::Convex => (v.plus.bsc, v.plus.bec),
                    _ => (v.plus.bec, v.plus.bsc),
                };
                push("corollary2_plus", c.pair, v.rho, lo, v.plus.actual, hi, v.plus_lower && v.plus_upper);
            }
            let header = ["check", "pair", "rho", "lower", "actual", "upper", "holds"];
            write_csv(out, &manifest, &header, &rows)?
        }
    }
    Ok(body.all_hold)
}

// ---------------------------------------------------------------------------
// certify-lemmas
// ---------------------------------------------------------------------------

const DEFAULT_RHO_GRID: [f64; 8] = [0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 8.0];
const G_SHAPE_NEGATIVE: [f64; 2] = [-0.9, -0.5];
const WEDGE_POINTS: usize = 100;
const H_TILDE_SAMPLES: usize = 10_000;
const H_TILDE_TOL: f64 = 1e-11;

#[derive(Serialize)]
struct CertifyBody {
    all_pass: bool,
    g_shape: ScanReport,
    convexity_f: ScanReport,
    curvature_h: ScanReport,
    affine_h: Option<ScanReport>,
    f1f2: GridVerdict,
    logit: GridVerdict,
    h_tilde: SweepVerdict,
    wedge: Vec<WedgeReport>,
    j_monotone: Vec<MonotoneReport>,
}

pub fn certify_lemmas(args: &CertifyArgs) -> Result<bool> {
    let user_grid = !args.rho.is_empty();
    let mut grid: Vec<f64> = if user_grid { args.rho.clone() } else { DEFAULT_RHO_GRID.to_vec() };
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let config = ScanConfig {
        rho_grid: grid.clone(),
        z_grid: uniform_grid(0.0, 1.0, args.z_steps.max(1)),
        t_steps: args.t_steps,
        curvature_tol: args.tol,
        counterexample_budget: args.probes,
        seed: args.seed,
    };
    config.validate()?;
    let positive: Vec<Rho> = grid
        .iter()
        .filter(|&&r| r >= 0.0)
        .map(|&r| Rho::new(r))
        .collect::<polar_extrema::Result<_>>()?;

    // The g shape scan samples z finely and, by default, covers the negative branch too.
    let mut g_grid = grid.clone();
    if !user_grid {
        g_grid.extend(G_SHAPE_NEGATIVE);
        g_grid.push(0.0);
        g_grid.sort_by(f64::total_cmp);
    }
    let g_config = ScanConfig {
        rho_grid: g_grid,
        z_grid: uniform_grid(0.0, 1.0, 1000),
        ..config.clone()
    };

    let rho_max = positive.iter().map(|r| r.value()).fold(0.0, f64::max);
    let body = CertifyBody {
        all_pass: false,
        g_shape: scan_g_shape(&g_config)?,
        convexity_f: scan_convexity_f(&config)?,
        curvature_h: scan_curvature_h(&config)?,
        affine_h: if args.affine_check {
            Some(scan_affine_h_with(&config, Exec::default())?)
        } else {
            None
        },
        f1f2: f1f2_grid(200, 200),
        logit: logit_grid(1000),
        h_tilde: h_tilde_sweep(H_TILDE_SAMPLES, rho_max, args.seed, H_TILDE_TOL)?,
        wedge: positive
            .iter()
            .map(|&r| wedge_scan(r, WEDGE_POINTS, K_MAX))
            .collect::<polar_extrema::Result<_>>()?,
        j_monotone: positive
            .iter()
            .flat_map(|&r| [0.0, 1.0, 5.0].map(move |w| (r, w)))
            .map(|(r, w)| j_monotone_along_k(r, w, K_MAX, 400))
            .collect::<polar_extrema::Result<_>>()?,
    };
    let all_pass = body.g_shape.passed()
        && body.convexity_f.passed()
        && body.curvature_h.passed()
        && body.affine_h.as_ref().is_none_or(|a| a.passed())
        && body.f1f2.holds
        && body.logit.holds
        && body.h_tilde.holds
        && body.wedge.iter().all(|w| w.regime_consistent)
        && body.j_monotone.iter().all(|m| m.holds);
    let body = CertifyBody { all_pass, ..body };

    let manifest = RunManifest::new("certify-lemmas", args, Some(args.seed))?
        .tolerance("curvature", args.tol)
        .tolerance("monotone", polar_extrema::lemma_lab::MONOTONE_TOL)
        .tolerance("chord", polar_extrema::lemma_lab::CHORD_TOL)
        .tolerance("elementary", polar_extrema::lemma_lab::ELEMENTARY_TOL)
        .tolerance("h_tilde", H_TILDE_TOL)
        .tolerance("jr_absolute", polar_extrema::lemma_lab::JR_ABS_TOL)
        .tolerance("jr_rounding_ulps", polar_extrema::lemma_lab::JR_ROUNDING_ULPS);
    let out = args.output.out.as_deref();
    match args.output.format {
        Format::Json => write_json(out, &manifest, &body)?,
        Format::Csv => {
            let mut rows = Vec::new();
            for scan in [Some(&body.g_shape), Some(&body.convexity_f), Some(&body.curvature_h), body.affine_h.as_ref()]
                .into_iter()
                .flatten()
            {
                rows.extend(scan.csv_records());
            }
            let status = |ok: bool| if ok { "pass" } else { "fail" }.to_string();
            let summary = |name: &str, rho: Option<f64>, ok: bool, worst: f64, at: f64| {
                vec![
                    name.to_string(),
                    opt(rho),
                    String::new(),
                    String::new(),
                    status(ok),
                    fmt_f64(worst),
                    fmt_f64(at),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                ]
            };
            rows.push(summary("f1f2", None, body.f1f2.holds, body.f1f2.worst, body.f1f2.at.0));
            rows.push(summary("logit", None, body.logit.holds, body.logit.worst, body.logit.at.0));
            rows.push(summary("h_tilde", None, body.h_tilde.holds, body.h_tilde.worst, body.h_tilde.at.1));
            for w in &body.wedge {
                rows.push(summary("wedge_j", Some(w.rho), w.regime_consistent, w.j_margin, w.j_at.0));
                rows.push(summary("wedge_r", Some(w.rho), w.regime_consistent, w.r_margin, w.r_at.0));
            }
            for m in &body.j_monotone {
                rows.push(summary("j_monotone", Some(m.rho), m.holds, m.worst_step, m.at));
            }
            write_csv(out, &manifest, &ScanReport::csv_header(), &rows)?
        }
    }
    Ok(all_pass)
}

// ---------------------------------------------------------------------------
// polarize
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct BecOracle {
    epsilon: f64,
    max_e0_error: f64,
    max_capacity_error: f64,
    matches: bool,
}

#[derive(Serialize)]
struct PolarizeBody {
    all_hold: bool,
    depth: usize,
    nodes: usize,
    root_capacity: f64,
    mean_leaf_capacity: f64,
    leaves_outside_0_01_0_99: usize,
    quantized_nodes: usize,
    envelope_violations: Vec<String>,
    martingale: Vec<MartingaleVerdict>,
    bec_oracle: Option<BecOracle>,
}

const BEC_ORACLE_TOL: f64 = 1e-12;

pub fn polarize(args: &PolarizeArgs) -> Result<bool> {
    let rhos = rhos(&args.rho)?;
    let (spec, w) = load_channel(&args.channel)?;
    let config = SimConfig {
        depth: args.depth,
        rho_list: rhos.clone(),
        max_atoms: args.max_atoms,
        quantize_grid: args.quantize,
    };
    let tree = polarize_tree(&w, &config)?;
    let martingale = rhos
        .iter()
        .enumerate()
        .map(|(i, &r)| martingale_check(&tree.records, i, r))
        .collect::<polar_extrema::Result<Vec<_>>>()?;

    let bec_oracle = match spec {
        ChannelSpecFile::Bec(eps) => {
            let oracle = bec_recursion(eps, args.depth)?;
            let (mut e0_err, mut cap_err) = (0.0f64, 0.0f64);
            for (rec, (_, e)) in tree.records.iter().zip(&oracle) {
                for (i, r) in rhos.iter().enumerate() {
                    let floor = r.floor();
                    let want = -(e * (1.0 - floor) + floor).log2();
                    e0_err = e0_err.max((rec.e0[i] - want).abs());
                }
                cap_err = cap_err.max((rec.capacity - (1.0 - e)).abs());
            }
            Some(BecOracle {
                epsilon: eps,
                max_e0_error: e0_err,
                max_capacity_error: cap_err,
                matches: e0_err <= BEC_ORACLE_TOL && cap_err <= BEC_ORACLE_TOL,
            })
        }
        _ => None,
    };

    let envelope_violations: Vec<String> = tree.envelope_violations().iter().map(|r| r.path.clone()).collect();
    let all_hold = envelope_violations.is_empty()
        && martingale.iter().all(|m| m.holds())
        && bec_oracle.as_ref().is_none_or(|o| o.matches);
    let body = PolarizeBody {
        all_hold,
        depth: tree.depth,
        nodes: tree.records.len(),
        root_capacity: tree.records[0].capacity,
        mean_leaf_capacity: tree.mean_leaf_capacity(),
        leaves_outside_0_01_0_99: tree.leaves_outside(0.01, 0.99),
        quantized_nodes: tree.records.iter().filter(|r| r.quantized).count(),
        envelope_violations,
        martingale,
        bec_oracle,
    };

    let manifest = RunManifest::new("polarize", args, None)?
        .tolerance("martingale", SIM_SLACK)
        .tolerance("envelope_slack", SIM_SLACK)
        .tolerance("bec_oracle", BEC_ORACLE_TOL);
    if let Some(path) = &args.trajectory {
        write_csv(Some(path), &manifest, &tree.csv_header(), &tree.csv_records())?;
    }
    let out = args.output.out.as_deref();
    match args.output.format {
        Format::Json => write_json(out, &manifest, &body)?,
        Format::Csv => write_csv(out, &manifest, &tree.csv_header(), &tree.csv_records())?,
    }
    Ok(all_hold)
}
