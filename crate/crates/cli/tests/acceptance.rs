//! Acceptance suite: one test per criterion, each printing a single
//! `acceptance criterion N (...): PASS` line (visible with `--nocapture`).
//!
//! Criteria 1, 2, and 4 verify exact metric and sampling contracts on the
//! public SNAP graphs ego-Facebook, ca-AstroPh, and (optionally) web-Google.
//! The files are not redistributable with this repository; the tests look
//! for them under `$GSAMP_DATA_DIR` or `<workspace>/data` and report SKIP
//! when absent. See the README for download instructions.
//!
//! The timing-sensitive criteria serialize on a global lock so concurrent
//! test threads cannot distort wall-clock measurements.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Mutex;
use std::time::Instant;

use gsamp_core::graph::{validate_sample, DegreeMode};
use gsamp_core::metrics::{
    avg_local_clustering, degree_stats, density, global_clustering, metrics_report,
    triangle_count, wcc_count, MetricsOptions,
};
use gsamp_core::sampling::{random_edge_sample, sample};
use gsamp_core::walk::{jump_target, random_walk_sample_detailed};
use gsamp_core::{
    keep_decision, naive, Algorithm, ExecutionContext, Graph, LocalCcMode, SampleConfig,
    SampleSize, WalkParams,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

static GATE: Mutex<()> = Mutex::new(());

fn serialized() -> std::sync::MutexGuard<'static, ()> {
    GATE.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .ancestors()
        .nth(2)
        .expect("workspace root exists")
        .to_path_buf()
}

fn data_file(name: &str) -> Option<PathBuf> {
    let bases = [
        std::env::var_os("GSAMP_DATA_DIR").map(PathBuf::from),
        Some(workspace_root().join("data")),
    ];
    bases
        .into_iter()
        .flatten()
        .map(|base| base.join(name))
        .find(|p| p.exists())
}

fn load(name: &str) -> Option<Graph> {
    let path = data_file(name)?;
    let ctx = ExecutionContext::new(2, 0).unwrap();
    Some(
        gsamp_core::io::read_edge_list(&ctx, path, &Default::default())
            .expect("dataset parses"),
    )
}

fn skip(criterion: &str, name: &str, dataset: &str) {
    println!(
        "acceptance criterion {criterion} ({name}): SKIP — {dataset} not found; \
         place it under data/ or set GSAMP_DATA_DIR (see README)"
    );
}

fn gsamp_bin(args: &[&str]) {
    let out = Command::new(env!("CARGO_BIN_EXE_gsamp"))
        .args(args)
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "gsamp {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Mean seconds per parallelism row from a bench CSV, keyed by
/// (algorithm, m, parallelism).
fn csv_seconds(path: &Path) -> Vec<(String, u64, usize, f64)> {
    std::fs::read_to_string(path)
        .expect("csv readable")
        .lines()
        .skip(1)
        .map(|line| {
            let fields: Vec<&str> = line.split(',').collect();
            (
                fields[0].to_string(),
                fields[2].parse().unwrap(),
                fields[3].parse().unwrap(),
                fields[4].parse().unwrap(),
            )
        })
        .collect()
}

#[test]
fn criterion_1_ego_facebook_original_row() {
    let _guard = serialized();
    let Some(g) = load("facebook_combined.txt") else {
        skip("1", "ego-Facebook original row", "facebook_combined.txt");
        return;
    };

    let report = metrics_report(&g, &MetricsOptions::default());
    assert_eq!(report.vertex_count, 4039);
    assert_eq!(report.edge_count, 88234);
    assert_eq!(report.triangles.value(), Some(&1_612_010));
    assert_eq!(report.wcc_count, 1);
    assert_eq!(report.d_min.value(), Some(&1));
    assert_eq!(report.d_max.value(), Some(&1045));
    let d = report.density.value().unwrap();
    assert!((d - 0.0054100).abs() <= 1e-7, "density {d}");
    let cg = report.global_cc.value().unwrap();
    assert!((cg - 0.5191743).abs() <= 1e-6, "global_cc {cg}");
    let cl = report.avg_local_cc.value().unwrap();
    assert!((cl - 0.3027734).abs() <= 1e-4, "avg_local_cc {cl}");

    // The stored-degree view agrees: this file lists each friendship once,
    // so the maximum in+out degree equals the undirected maximum.
    let max_stored = gsamp_core::graph::degree_dataset(&g, DegreeMode::Total)
        .iter()
        .map(|(_, d)| *d)
        .max()
        .unwrap();
    assert_eq!(max_stored, 1045);

    println!("acceptance criterion 1 (ego-Facebook original row): PASS");
}

#[test]
fn criterion_2_ca_astroph_original_row() {
    let _guard = serialized();
    let Some(g) = load("ca-AstroPh.txt") else {
        skip("2", "ca-AstroPh original row", "ca-AstroPh.txt");
        return;
    };

    assert_eq!(g.vertex_count(), 18772);
    assert_eq!(g.edge_count(), 396_160);
    assert_eq!(triangle_count(&g), 1_352_117);
    assert_eq!(wcc_count(&g), 290);
    assert_eq!(degree_stats(&g).unwrap().d_max, 504);
    let cg = global_clustering(&g).unwrap();
    assert!((cg - 0.3180837).abs() <= 1e-6, "global_cc {cg}");
    println!("acceptance criterion 2 (ca-AstroPh original row): PASS");

    // Optional at ~5M edges: verified only when the file is present.
    if let Some(g) = load("web-Google.txt") {
        assert_eq!(g.vertex_count(), 875_713);
        assert_eq!(g.edge_count(), 5_105_039);
        assert_eq!(triangle_count(&g), 13_391_903);
        assert_eq!(wcc_count(&g), 2746);
        println!("acceptance criterion 2 (web-Google original row, optional): PASS");
    }
}

#[test]
fn criterion_3_oracle_equivalence_and_sample_validity() {
    let _guard = serialized();

    // Part A: every metric against the naive sequential oracle on 200
    // random graphs with at most 30 vertices, self-loops and parallel
    // edges included.
    let mut rng = StdRng::seed_from_u64(20_240_901);
    for round in 0..200 {
        let g = random_graph(&mut rng, 30);
        assert_eq!(
            triangle_count(&g),
            naive::triangle_count(&g),
            "triangles, round {round}"
        );
        assert_eq!(
            wcc_count(&g),
            naive::wcc_union_find(&g),
            "wcc, round {round}"
        );
        check_real(density(&g).ok(), naive::density(&g), "density", round);
        check_real(
            global_clustering(&g).ok(),
            naive::global_clustering(&g),
            "global_cc",
            round,
        );
        for mode in [LocalCcMode::Directed, LocalCcMode::Undirected] {
            check_real(
                avg_local_clustering(&g, mode).ok(),
                naive::avg_local_clustering(&g, mode),
                "avg_local_cc",
                round,
            );
        }
        match (degree_stats(&g).ok(), naive::degree_stats(&g)) {
            (Some(a), Some((avg, min, max))) => {
                assert!((a.d_avg - avg).abs() <= 1e-12, "d_avg, round {round}");
                assert_eq!(a.d_min, min, "d_min, round {round}");
                assert_eq!(a.d_max, max, "d_max, round {round}");
            }
            (a, b) => assert_eq!(a.is_some(), b.is_some(), "degree stats, round {round}"),
        }
    }

    // Part B: sampler outputs are valid zero-degree-free samples on 100
    // random (graph, seed, s) triples.
    for round in 0..100 {
        let g = random_graph(&mut rng, 40);
        let seed = rng.random();
        let s = SampleSize::new(rng.random_range(0.0..=1.0)).unwrap();
        for algorithm in [Algorithm::Rv, Algorithm::Re, Algorithm::Rvn, Algorithm::Rw] {
            let mut config = SampleConfig::new(algorithm, s, seed);
            config.walkers = 1 + (round % 3).min(g.vertex_count().saturating_sub(1));
            let out = sample(&g, &config).expect("sampler runs");
            assert_eq!(
                validate_sample(&g, &out),
                Ok(()),
                "{algorithm:?}, round {round}"
            );
            for (id, d) in gsamp_core::graph::degree_dataset(&out, DegreeMode::Total).iter() {
                assert!(*d > 0, "{algorithm:?}, round {round}: vertex {id} isolated");
            }
        }
    }

    println!("acceptance criterion 3 (oracle equivalence + sample validity): PASS");
}

fn random_graph(rng: &mut StdRng, max_vertices: u64) -> Graph {
    let n = rng.random_range(1..=max_vertices);
    let p = [0.05f64, 0.1, 0.3, 0.6][rng.random_range(0..4)];
    let mut pairs = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.random_bool(p) {
                pairs.push((a, b));
            }
        }
    }
    for _ in 0..rng.random_range(0..4) {
        let v = rng.random_range(0..n);
        pairs.push((v, v));
    }
    if !pairs.is_empty() {
        for _ in 0..rng.random_range(0..5) {
            let i = rng.random_range(0..pairs.len());
            pairs.push(pairs[i]);
        }
    }
    // Vertices come from edge endpoints, so keep at least one edge: the
    // walk requires a non-empty vertex set.
    if pairs.is_empty() {
        pairs.push(if n == 1 { (0, 0) } else { (0, 1) });
    }
    let ctx = ExecutionContext::new(rng.random_range(1..5), 0).unwrap();
    Graph::from_edge_pairs(&ctx, &pairs)
}

fn check_real(got: Option<f64>, expected: Option<f64>, what: &str, round: usize) {
    match (got, expected) {
        (Some(a), Some(b)) => {
            assert!((a - b).abs() <= 1e-12, "{what}, round {round}: {a} vs {b}")
        }
        (a, b) => assert_eq!(a.is_some(), b.is_some(), "{what} defined-ness, round {round}"),
    }
}

#[test]
fn criterion_4_statistical_sampling_contracts_on_facebook() {
    let _guard = serialized();
    let Some(g) = load("facebook_combined.txt") else {
        skip(
            "4",
            "statistical sampling contracts",
            "facebook_combined.txt",
        );
        return;
    };
    let ids = g.sorted_vertex_ids();
    let s = SampleSize::new(0.4).unwrap();

    // RV: mean pre-filter keep fraction over 20 seeds.
    let mut kept_total = 0usize;
    for seed in 0..20u64 {
        kept_total += ids.iter().filter(|&&id| keep_decision(id, seed, s)).count();
    }
    let rv_fraction = kept_total as f64 / (20.0 * ids.len() as f64);
    assert!(
        (0.39..=0.41).contains(&rv_fraction),
        "RV keep fraction {rv_fraction}"
    );

    // RE: mean edge keep fraction over 20 seeds.
    let mut edges_total = 0usize;
    for seed in 0..20u64 {
        edges_total += random_edge_sample(&g, s, seed).edge_count();
    }
    let re_fraction = edges_total as f64 / (20.0 * g.edge_count() as f64);
    assert!(
        (0.39..=0.41).contains(&re_fraction),
        "RE keep fraction {re_fraction}"
    );

    // RW: halts with visited in [1616, 1620] (ceil(0.4·4039) = 1616,
    // plus at most walkers − 1 overshoot), before zero-degree removal.
    for seed in 0..20u64 {
        let params = WalkParams {
            sample_size: s,
            walkers: 5,
            jump_probability: 0.1,
            seed,
        };
        let (_, stats) = random_walk_sample_detailed(&g, &params).unwrap();
        assert_eq!(stats.target, 1616, "seed {seed}");
        assert!(
            (1616..=1620).contains(&stats.visited),
            "seed {seed}: visited {}",
            stats.visited
        );
    }

    println!("acceptance criterion 4 (statistical sampling contracts): PASS");
}

#[test]
fn criterion_5_determinism_under_parallelism() {
    let _guard = serialized();
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();

    for algorithm in ["rv", "re", "rvn", "rw"] {
        let mut reference: Option<Vec<u8>> = None;
        for parallelism in ["1", "2", "4", "8"] {
            let output = dir.path().join(format!("{algorithm}-{parallelism}.txt"));
            let mut args = vec![
                "sample",
                "--algorithm",
                algorithm,
                "--sample-size",
                "0.3",
                "--seed",
                "1234",
                "--generate",
                "n=100000,m=600000",
                "--parallelism",
                parallelism,
                "--output",
                output.to_str().unwrap(),
            ];
            if algorithm == "rw" {
                args.extend_from_slice(&["--walkers", "100"]);
            }
            gsamp_bin(&args);
            let bytes = std::fs::read(&output).unwrap();
            assert!(!bytes.is_empty(), "{algorithm} produced an empty sample");
            match &reference {
                None => reference = Some(bytes),
                Some(expected) => assert_eq!(
                    expected, &bytes,
                    "{algorithm}: output differs at parallelism {parallelism}"
                ),
            }
        }
    }

    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 300.0, "took {elapsed:.1}s, budget is 300s");
    println!(
        "acceptance criterion 5 (byte-identical outputs for P in {{1,2,4,8}}, {elapsed:.0}s): PASS"
    );
}

#[test]
fn criterion_6_speedup_and_data_scaling() {
    let _guard = serialized();
    let dir = tempfile::tempdir().unwrap();
    let hardware_threads = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);

    // Wall-time speedup at parallelism 8 versus 1 on a ≥5M-edge synthetic
    // graph; meaningful only with at least 8 hardware threads.
    if hardware_threads >= 8 {
        let csv = dir.path().join("speedup.csv");
        for algorithm in ["rvn", "rw"] {
            let mut args = vec![
                "bench",
                "--algorithm",
                algorithm,
                "--generate",
                "n=1000000,m=5000000",
                "--sample-size",
                "0.1",
                "--seed",
                "5",
                "--parallelism",
                "1,8",
                "--repetitions",
                "3",
                "--out",
                csv.to_str().unwrap(),
            ];
            if algorithm == "rw" {
                args.extend_from_slice(&["--walkers", "3000"]);
            }
            gsamp_bin(&args);
        }
        let rows = csv_seconds(&csv);
        for algorithm in ["rvn", "rw"] {
            let at = |p: usize| {
                rows.iter()
                    .find(|(a, _, rp, _)| a == algorithm && *rp == p)
                    .map(|(_, _, _, s)| *s)
                    .expect("row present")
            };
            let speedup = at(1) / at(8);
            assert!(
                speedup >= 2.0,
                "{algorithm}: speedup {speedup:.2} below 2.0"
            );
        }
        println!("acceptance criterion 6a (speedup ≥ 2.0 at parallelism 8): PASS");
    } else {
        println!(
            "acceptance criterion 6a (speedup ≥ 2.0 at parallelism 8): SKIP — \
             requires ≥ 8 hardware threads, this machine has {hardware_threads}"
        );
    }

    // Near-linear data scaling at fixed parallelism: quadrupling the edge
    // count (same vertex set) may cost at most 6x the runtime, for every
    // algorithm. Parallelism 1 gives the quietest wall-clock measurements;
    // the sub-100ms rv/re baselines get extra repetitions so one OS
    // scheduling spike cannot distort the mean.
    let csv = dir.path().join("scaling.csv");
    for algorithm in ["rv", "re", "rvn", "rw"] {
        let repetitions = if algorithm == "rvn" || algorithm == "rw" {
            "3"
        } else {
            "10"
        };
        for generate in ["n=1000000,m=1000000", "n=1000000,m=4000000"] {
            let mut args = vec![
                "bench",
                "--algorithm",
                algorithm,
                "--generate",
                generate,
                "--sample-size",
                "0.1",
                "--seed",
                "5",
                "--parallelism",
                "1",
                "--repetitions",
                repetitions,
                "--out",
                csv.to_str().unwrap(),
            ];
            if algorithm == "rw" {
                args.extend_from_slice(&["--walkers", "3000"]);
            }
            gsamp_bin(&args);
        }
    }
    let rows = csv_seconds(&csv);
    for algorithm in ["rv", "re", "rvn", "rw"] {
        let at = |m: u64| {
            rows.iter()
                .find(|(a, rm, _, _)| a == algorithm && *rm == m)
                .map(|(_, _, _, s)| *s)
                .expect("row present")
        };
        let small = at(1_000_000);
        let big = at(4_000_000);
        assert!(
            big <= 6.0 * small,
            "{algorithm}: {big:.2}s at 4M edges vs {small:.2}s at 1M (limit 6x)"
        );
    }
    println!("acceptance criterion 6b (4x edges within 6x runtime): PASS");
}

#[test]
fn criterion_7_walk_micro_semantics() {
    let _guard = serialized();

    // Directed 10-cycle, j = 0, one walker, s = 1: all vertices visited in
    // exactly nine supersteps.
    let ctx = ExecutionContext::new(2, 0).unwrap();
    let pairs: Vec<(u64, u64)> = (0..10u64).map(|i| (i, (i + 1) % 10)).collect();
    let cycle = Graph::from_edge_pairs(&ctx, &pairs);
    for seed in 0..5 {
        let params = WalkParams {
            sample_size: SampleSize::new(1.0).unwrap(),
            walkers: 1,
            jump_probability: 0.0,
            seed,
        };
        let (out, stats) = random_walk_sample_detailed(&cycle, &params).unwrap();
        assert_eq!(stats.visited, 10, "seed {seed}");
        assert_eq!(stats.supersteps, 9, "seed {seed}");
        assert_eq!(out.vertex_count(), 10);
    }

    // j = 1 uniformity: chi-squared over 10^5 jump steps on a 100-vertex
    // graph, against the 0.01-significance critical value for df = 99.
    let ids: Vec<u64> = (0..100u64).collect();
    let mut counts = vec![0u64; 100];
    let mut current = 0u64;
    for step in 0..100_000usize {
        current = jump_target(987, 0, step, current, &ids);
        counts[current as usize] += 1;
    }
    let expected = 1000.0;
    let chi2: f64 = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    assert!(
        chi2 < 134.642,
        "chi-squared {chi2:.2} exceeds the 0.01 critical value 134.642"
    );

    println!("acceptance criterion 7 (walk micro-semantics, chi2 = {chi2:.1}): PASS");
}
