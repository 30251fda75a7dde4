use polar_extrema::extremal::{
    corollary2_check, matched_bec, matched_bsc, theorem1_from_reps, PlusRegime,
};
use polar_extrema::lemma_lab::{f_func, h_func, h_of_tanh, h_tilde, K_MAX};
use polar_extrema::polar_sim::{polarize_tree_with, quantize, synthesize_path, SimConfig};
use polar_extrema::transform::{
    e0_minus_formula, e0_plus_formula, e0_synthesized, minus_synth, ordering_from_reps, plus_synth,
    submartingale_from_reps, zrep_minus, zrep_plus,
};
use polar_extrema::{
    bhattacharyya, capacity, e0_direct, e0_from_zrep, g, make_bec, make_bsc, q_delta, z_rep, Bdmc,
    ChannelStats, Exec, Rho,
};
use proptest::prelude::*;

const GRID: [f64; 7] = [0.25, 0.5, 1.0, 1.5, 2.0, 4.0, 8.0];

fn rho(v: f64) -> Rho {
    Rho::new(v).unwrap()
}

/// Columns normalized from non-negative weights; roughly one weight in five
/// is exactly zero so that erasure-like and noiseless outputs show up.
fn channel(max_outputs: usize) -> impl Strategy<Value = Bdmc> {
    let weight = prop_oneof![1 => Just(0.0), 4 => 0.0..1.0f64];
    prop::collection::vec((weight.clone(), weight), 1..=max_outputs).prop_filter_map(
        "a column with no mass",
        |rows| {
            let s0: f64 = rows.iter().map(|r| r.0).sum();
            let s1: f64 = rows.iter().map(|r| r.1).sum();
            if s0 <= 1e-3 || s1 <= 1e-3 {
                return None;
            }
            Bdmc::new(rows.into_iter().map(|(a, b)| (a / s0, b / s1))).ok()
        },
    )
}

fn grid_rho() -> impl Strategy<Value = f64> {
    prop::sample::select(GRID.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn qdelta_reconstructs_channel(w in channel(6)) {
        let qd = q_delta(&w);
        prop_assert!((qd.total_mass() - 1.0).abs() <= 1e-12);
        let rebuilt = qd.reconstruct();
        let kept: Vec<_> = w.outputs().iter().filter(|o| o.w0 + o.w1 > 0.0).collect();
        prop_assert_eq!(rebuilt.len(), kept.len());
        for (r, o) in rebuilt.iter().zip(kept) {
            prop_assert!((r.w0 - o.w0).abs() <= 1e-15 && (r.w1 - o.w1).abs() <= 1e-15);
        }
    }

    #[test]
    fn zrep_is_canonical(w in channel(6)) {
        let rep = z_rep(&w);
        prop_assert!((rep.total_mass() - 1.0).abs() <= 1e-12);
        prop_assert!(rep.atoms().iter().all(|a| (0.0..=1.0).contains(&a.z) && a.p > 0.0));
        prop_assert!(rep.atoms().windows(2).all(|p| p[1].z - p[0].z > 1e-12));
    }

    #[test]
    fn representation_equivalence(w in channel(6), r in 0.0..8.0f64) {
        let d = e0_from_zrep(rho(r), &z_rep(&w)) - e0_direct(rho(r), &w);
        prop_assert!(d.abs() <= 1e-12, "{d}");
    }

    #[test]
    fn stats_in_range(w in channel(6), r in 0.0..64.0f64) {
        let s = ChannelStats::of(rho(r), &w);
        prop_assert!(s.e0 >= 0.0 && s.e0 <= r * (1.0 + 1e-15), "{s:?}");
        prop_assert!((0.0..=1.0).contains(&s.capacity));
        prop_assert!((0.0..=1.0).contains(&s.bhattacharyya));
        if r > 0.0 {
            let z = s.z_rho.unwrap();
            prop_assert!((0.0..=1.0).contains(&z));
        }
    }

    #[test]
    fn e0_increasing_and_concave_in_rho(w in channel(6), step in 0.01..0.5f64) {
        let e: Vec<f64> = (0..16).map(|i| e0_direct(rho(i as f64 * step), &w)).collect();
        for p in e.windows(2) {
            prop_assert!(p[1] - p[0] >= -1e-12, "{e:?}");
        }
        for p in e.windows(3) {
            prop_assert!(p[2] - 2.0 * p[1] + p[0] <= 1e-9, "{e:?}");
        }
    }

    #[test]
    fn g_shape_on_z(r in 0.0..16.0f64) {
        let zs: Vec<f64> = (0..=200).map(|i| i as f64 / 200.0).collect();
        let v: Vec<f64> = zs.iter().map(|&z| g(rho(r), z).unwrap()).collect();
        for p in v.windows(2) {
            prop_assert!(p[1] - p[0] <= 1e-12);
        }
        for p in v.windows(3) {
            prop_assert!(p[2] - 2.0 * p[1] + p[0] <= 1e-9);
        }
    }

    #[test]
    fn capacity_and_cutoff_links(w in channel(6)) {
        let slope = e0_direct(rho(1e-6), &w) / 1e-6;
        prop_assert!((slope - capacity(&w)).abs() <= 1e-4);
        let cut = (2.0 / (1.0 + bhattacharyya(&w))).log2();
        prop_assert!((e0_direct(rho(1.0), &w) - cut).abs() <= 1e-12);
    }

    #[test]
    fn synthesis_shapes(w1 in channel(4), w2 in channel(4)) {
        prop_assert_eq!(minus_synth(&w1, &w2).len(), w1.len() * w2.len());
        prop_assert_eq!(plus_synth(&w1, &w2).len(), 2 * w1.len() * w2.len());
    }

    #[test]
    fn formulas_match_synthesis(w1 in channel(6), w2 in channel(6), r in grid_rho()) {
        let (r1, r2) = (z_rep(&w1), z_rep(&w2));
        let (sm, sp) = e0_synthesized(rho(r), &w1, &w2);
        let fm = e0_minus_formula(rho(r), &r1, &r2);
        let fp = e0_plus_formula(rho(r), &r1, &r2);
        prop_assert!((fm - sm).abs() <= 1e-10 && (fp - sp).abs() <= 1e-10);
        prop_assert!((fm - e0_minus_formula(rho(r), &r2, &r1)).abs() <= 1e-12);
        prop_assert!((fp - e0_plus_formula(rho(r), &r2, &r1)).abs() <= 1e-12);
    }

    #[test]
    fn evolved_reps_are_representations(w1 in channel(5), w2 in channel(5), r in 0.0..16.0f64) {
        let (r1, r2) = (z_rep(&w1), z_rep(&w2));
        let (m, p) = (zrep_minus(&r1, &r2), zrep_plus(&r1, &r2));
        prop_assert!((e0_from_zrep(rho(r), &m) - e0_minus_formula(rho(r), &r1, &r2)).abs() <= 1e-12);
        prop_assert!((e0_from_zrep(rho(r), &p) - e0_plus_formula(rho(r), &r1, &r2)).abs() <= 1e-12);
    }

    #[test]
    fn ordering_and_sum(w1 in channel(6), w2 in channel(6), r in 0.0..16.0f64) {
        let (r1, r2) = (z_rep(&w1), z_rep(&w2));
        prop_assert!(ordering_from_reps(rho(r), &r1, &r2).holds());
        prop_assert!(submartingale_from_reps(rho(r), &r1, &r2).holds);
    }

    #[test]
    fn plus_at_rho_one_is_affine(w1 in channel(6), w2 in channel(6)) {
        let (r1, r2) = (z_rep(&w1), z_rep(&w2));
        let t = |rep| (-e0_from_zrep(rho(1.0), rep)).exp2();
        let want = 0.5 + 0.5 * (2.0 * t(&r1) - 1.0) * (2.0 * t(&r2) - 1.0);
        let got = (-e0_plus_formula(rho(1.0), &r1, &r2)).exp2();
        prop_assert!((got - want).abs() <= 1e-12);
    }

    #[test]
    fn matching_round_trip(r in 0.01..16.0f64, frac in 0.0..=1.0f64) {
        let t = frac * r;
        let eps = matched_bec(rho(r), t).unwrap();
        let p = matched_bsc(rho(r), t).unwrap();
        prop_assert!((e0_direct(rho(r), &make_bec(eps).unwrap()) - t).abs() <= 1e-10);
        prop_assert!((e0_direct(rho(r), &make_bsc(p).unwrap()) - t).abs() <= 1e-10);
    }

    #[test]
    fn extremality_holds(w1 in channel(5), w2 in channel(5), r in 0.01..12.0f64) {
        let rep = theorem1_from_reps(rho(r), &z_rep(&w1), &z_rep(&w2)).unwrap();
        prop_assert!(rep.holds(), "{rep:?}");
        prop_assert_eq!(rep.regime, PlusRegime::of(r));
    }

    #[test]
    fn corollary2_agrees_with_theorem(w in channel(5), r in 0.01..12.0f64) {
        let rep = z_rep(&w);
        let th = theorem1_from_reps(rho(r), &rep, &rep).unwrap();
        let c2 = corollary2_check(rho(r), &w).unwrap();
        prop_assert!(c2.holds(), "{c2:?}");
        prop_assert_eq!(th.holds(), c2.holds());
    }

    #[test]
    fn f_exchange_and_h_range(z in 0.0..=1.0f64, u in 0.0..=1.0f64, r in 0.01..8.0f64) {
        let rh = rho(r);
        let (gz, gu) = (g(rh, z).unwrap(), g(rh, u).unwrap());
        let a = f_func(z, rh, gu).unwrap();
        let b = f_func(u, rh, gz).unwrap();
        prop_assert!((a - b).abs() <= 1e-11, "{a} vs {b}");
        let hv = h_func(z, rh, gu).unwrap();
        prop_assert!(hv >= rh.floor() - 1e-11 && hv <= gu.min(gz) + 1e-11);
    }

    #[test]
    fn h_tilde_matches_tanh_form(r in 0.0..8.0f64, k in 0.0..=K_MAX, w in 0.0..=K_MAX) {
        let d = h_tilde(rho(r), k, w).unwrap() - h_of_tanh(rho(r), k, w);
        prop_assert!(d.abs() <= 1e-11);
    }

    #[test]
    fn quantize_keeps_mass_and_support(w in channel(6), grid in 1usize..64) {
        let q = quantize(&z_rep(&w), grid);
        prop_assert!((q.total_mass() - 1.0).abs() <= 1e-12);
        prop_assert!(q.len() <= grid + 2);
        prop_assert!(q.atoms().iter().all(|a| (0.0..=1.0).contains(&a.z)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn shallow_tree_matches_synthesis(w in channel(3), r in grid_rho()) {
        let cfg = SimConfig { depth: 2, rho_list: vec![rho(r)], ..SimConfig::default() };
        let tree = polarize_tree_with(&w, &cfg, Exec::Sequential).unwrap();
        for rec in &tree.records {
            let ch = synthesize_path(&w, &rec.path).unwrap();
            prop_assert!((rec.e0[0] - e0_direct(rho(r), &ch)).abs() <= 1e-9, "{}", rec.path);
        }
        prop_assert!(tree.envelope_violations().is_empty());
    }

    #[test]
    fn trees_bracket_and_agree_across_exec(w in channel(4), depth in 1usize..7) {
        let cfg = SimConfig {
            depth,
            rho_list: vec![rho(0.5), rho(1.5), rho(3.0)],
            max_atoms: 256,
            ..SimConfig::default()
        };
        let seq = polarize_tree_with(&w, &cfg, Exec::Sequential).unwrap();
        let par = polarize_tree_with(&w, &cfg, Exec::Parallel).unwrap();
        prop_assert_eq!(&seq, &par);
        prop_assert!(seq.envelope_violations().is_empty());
        for rec in &seq.records {
            for (k, r) in cfg.rho_list.iter().enumerate() {
                prop_assert!(rec.e0[k] >= -1e-15 && rec.e0[k] <= r.value() + 1e-12);
            }
        }
    }
}
