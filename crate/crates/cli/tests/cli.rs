use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mlbound_core::bounds::{
    binary_sphere_bound, binary_tangential_bound, binary_tsb, tangential_sphere_bound_general,
    union_bound,
};
use mlbound_core::codes;
use mlbound_core::io::trellis_to_string;
use mlbound_core::special::q_function;
use mlbound_core::spectrum::{triangle_spectrum, DEFAULT_QUANTIZATION};
use mlbound_core::trellis::{bpsk_linear_code_trellis, trivial_trellis};
use mlbound_core::{ChannelParams, QuadratureConfig, Trellis};
use tempfile::TempDir;

const HEADER: &str = "snr_db,sigma,union,sb,tb,tsb,fer,fer_stderr,frames";

fn mlbound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mlbound"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn put(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn put_trellis(dir: &TempDir, name: &str, t: &Trellis) -> PathBuf {
    put(dir, name, &trellis_to_string(t))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

type Csv = Vec<BTreeMap<String, String>>;

fn read_csv(text: &str) -> Csv {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().expect("header").split(',').collect();
    assert_eq!(header.join(","), HEADER);
    lines
        .map(|l| {
            header
                .iter()
                .map(|h| h.to_string())
                .zip(l.split(',').map(String::from))
                .collect()
        })
        .collect()
}

fn num(row: &BTreeMap<String, String>, key: &str) -> f64 {
    row[key]
        .parse()
        .unwrap_or_else(|_| panic!("{key} = {:?}", row[key]))
}

fn hamming() -> Trellis {
    bpsk_linear_code_trellis(&codes::hamming74_generator()).unwrap()
}

fn antipodal() -> Trellis {
    trivial_trellis(&[vec![1.0], vec![-1.0]]).unwrap()
}

#[test]
fn two_codeword_spectrum_file() {
    let dir = TempDir::new().unwrap();
    let t = put_trellis(&dir, "pair.json", &antipodal());
    let out = dir.path().join("pair.spec");
    let o = mlbound(&["spectrum", "--trellis", s(&t), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.lines().any(|l| l == "A 0.000000000000 1"), "{text}");
    assert!(text.lines().any(|l| l == "A 4.000000000000 1"), "{text}");
    let said = String::from_utf8(o.stdout).unwrap();
    assert!(
        said.contains("2 entries") && said.contains("total mass 2"),
        "{said}"
    );
}

#[test]
fn hamming_spectrum_matches_weight_enumeration() {
    let dir = TempDir::new().unwrap();
    let t = put_trellis(&dir, "h.json", &hamming());
    let out = dir.path().join("h.spec");
    assert_eq!(
        code(&mlbound(&[
            "spectrum",
            "--trellis",
            s(&t),
            "--out",
            s(&out)
        ])),
        0
    );
    // BPSK maps Hamming weight w to squared distance 4w.
    let w = codes::weight_distribution(&codes::hamming74_generator()).unwrap();
    let want: Vec<(f64, f64)> = w.iter().map(|(&d, &a)| (4.0 * d as f64, a)).collect();
    let got: Vec<(f64, f64)> = std::fs::read_to_string(&out)
        .unwrap()
        .lines()
        .filter(|l| l.starts_with("A "))
        .map(|l| {
            let f: Vec<f64> = l[2..]
                .split_whitespace()
                .map(|x| x.parse().unwrap())
                .collect();
            (f[0], f[1])
        })
        .collect();
    assert_eq!(got, want);
    assert_eq!(
        want,
        vec![(0.0, 1.0), (12.0, 7.0), (16.0, 7.0), (28.0, 1.0)]
    );
}

#[test]
fn unreadable_trellis_leaves_no_output() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("never.spec");
    let o = mlbound(&[
        "spectrum",
        "--trellis",
        s(&dir.path().join("missing.json")),
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 1);
    assert!(!out.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn invalid_trellis_reports_lines() {
    let dir = TempDir::new().unwrap();
    let t = put(
        &dir,
        "bad.json",
        "{\n  \"n\": 1,\n  \"stages\": [\n    { \"nt\": 1, \"branches\": [\n      { \"from\": 0, \"to\": 3, \"label\": [1.0] }\n    ] }\n  ]\n}\n",
    );
    for args in [
        vec!["validate", "--trellis", s(&t)],
        vec!["spectrum", "--trellis", s(&t), "--out", "/dev/null"],
    ] {
        let o = mlbound(&args);
        assert_eq!(code(&o), 1);
        assert!(stderr(&o).contains("line 5"), "{}", stderr(&o));
    }
}

#[test]
fn union_only_sweep_gives_q_of_one() {
    let dir = TempDir::new().unwrap();
    let spec = put(
        &dir,
        "a.spec",
        "# n=1 eps=1e-9\nA 0.000000000000 1\nA 4.000000000000 1\n",
    );
    let o = mlbound(&[
        "sweep",
        "--spectrum",
        s(&spec),
        "--energy",
        "1",
        "--bounds",
        "union",
        "--snr-db",
        "0:0:1",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = read_csv(&String::from_utf8(o.stdout).unwrap());
    assert_eq!(rows.len(), 1);
    assert_eq!(num(&rows[0], "sigma"), 1.0);
    let want = q_function(1.0);
    assert!((num(&rows[0], "union") - want).abs() <= 1e-11 * want);
    for k in ["sb", "tb", "tsb", "fer", "fer_stderr", "frames"] {
        assert_eq!(rows[0][k], "");
    }
}

#[test]
fn missing_triangle_spectrum_is_named() {
    let dir = TempDir::new().unwrap();
    let spec = put(
        &dir,
        "a.spec",
        "# n=3 eps=1e-9\nA 0.000000000000 1\nA 12.000000000000 1\n",
    );
    let o = mlbound(&[
        "sweep",
        "--spectrum",
        s(&spec),
        "--energy",
        "3",
        "--bounds",
        "tsb",
        "--snr-db",
        "0:1:1",
    ]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("triangle spectrum"), "{}", stderr(&o));
}

#[test]
fn hamming_sweep_with_simulation() {
    let dir = TempDir::new().unwrap();
    let t = put_trellis(&dir, "h.json", &hamming());
    let out = dir.path().join("sweep.csv");
    let o = mlbound(&[
        "sweep",
        "--trellis",
        s(&t),
        "--snr-db",
        "0:8:1",
        "--frames",
        "100000",
        "--seed",
        "11",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = read_csv(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 9);
    let slack = 2.0 * (1e-8 + 1e-12);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(num(r, "snr_db"), i as f64);
        let (ub, sb, tb, tsb) = (num(r, "union"), num(r, "sb"), num(r, "tb"), num(r, "tsb"));
        assert!(
            tsb <= tb + slack && tb <= ub.min(1.0) + slack && sb <= ub.min(1.0) + slack,
            "{r:?}"
        );
        let floor = num(r, "fer") - 3.0 * num(r, "fer_stderr");
        assert!([ub, sb, tb, tsb].iter().all(|&v| v >= floor), "{r:?}");
        assert_eq!(r["frames"], "100000");
    }
}

#[test]
fn simulate_reproduces_frozen_reference() {
    // Frozen during development: seed 2026, σ = 1, 10^6 frames on the
    // antipodal pair gives 159197 frame errors.
    let dir = TempDir::new().unwrap();
    let t = put_trellis(&dir, "pair.json", &antipodal());
    let out = dir.path().join("sim.csv");
    let args = [
        "simulate",
        "--trellis",
        s(&t),
        "--sigma",
        "1",
        "--frames",
        "1000000",
        "--seed",
        "2026",
        "--out",
        s(&out),
    ];
    assert_eq!(code(&mlbound(&args)), 0);
    let rows = read_csv(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(rows[0]["fer"], "1.59197000000e-1");
    assert_eq!(rows[0]["frames"], "1000000");
    assert!((num(&rows[0], "fer") - q_function(1.0)).abs() <= 4.0 * num(&rows[0], "fer_stderr"));

    // A second run appends a row under the same header.
    let two = [
        "simulate",
        "--trellis",
        s(&t),
        "--sigma",
        "1",
        "--frames",
        "1000000",
        "--seed",
        "2026",
        "--workers",
        "3",
        "--out",
        s(&out),
    ];
    assert_eq!(code(&mlbound(&two)), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.matches(HEADER).count(), 1);
    let rows = read_csv(&text);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0], rows[1]);
}

#[test]
fn simulate_usage_errors() {
    let dir = TempDir::new().unwrap();
    let t = put_trellis(&dir, "pair.json", &antipodal());
    let zero = mlbound(&[
        "simulate",
        "--trellis",
        s(&t),
        "--sigma",
        "1",
        "--frames",
        "0",
        "--seed",
        "1",
    ]);
    assert_eq!(code(&zero), 1);
    assert!(stderr(&zero).contains("frames"));
    let no_seed = mlbound(&[
        "simulate",
        "--trellis",
        s(&t),
        "--sigma",
        "1",
        "--frames",
        "10",
    ]);
    assert_eq!(code(&no_seed), 1);
    let both = mlbound(&[
        "simulate",
        "--trellis",
        s(&t),
        "--sigma",
        "1",
        "--snr-db",
        "0",
        "--frames",
        "10",
        "--seed",
        "1",
    ]);
    assert_eq!(code(&both), 1);
    let sweep_no_seed = mlbound(&[
        "sweep",
        "--trellis",
        s(&t),
        "--bounds",
        "union",
        "--snr-db",
        "0:1:1",
        "--frames",
        "5",
    ]);
    assert_eq!(code(&sweep_no_seed), 1);
    assert!(stderr(&sweep_no_seed).contains("--seed"));
}

#[test]
fn simulate_echoes_sigma_from_snr() {
    let dir = TempDir::new().unwrap();
    let toy = codes::four_am_toy_trellis();
    let t = put_trellis(&dir, "toy.json", &toy);
    let o = mlbound(&[
        "simulate",
        "--trellis",
        s(&t),
        "--snr-db",
        "-3",
        "--frames",
        "1000",
        "--seed",
        "5",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let want = (toy.average_energy().unwrap() / (3.0 * 10f64.powf(-0.3))).sqrt();
    let rows = read_csv(text.lines().skip(1).collect::<Vec<_>>().join("\n").as_str());
    assert!((num(&rows[0], "sigma") - want).abs() <= 1e-11 * want);
    assert!(text.starts_with(&format!("sigma={want}")), "{text}");
}

#[test]
fn spectrum_files_round_trip_through_sweep() {
    let dir = TempDir::new().unwrap();
    let toy = codes::four_am_toy_trellis();
    let t = put_trellis(&dir, "toy.json", &toy);
    let (a, b) = (dir.path().join("a.spec"), dir.path().join("b.spec"));
    assert_eq!(
        code(&mlbound(&["spectrum", "--trellis", s(&t), "--out", s(&a)])),
        0
    );
    assert_eq!(
        code(&mlbound(&[
            "spectrum",
            "--trellis",
            s(&t),
            "--out",
            s(&b),
            "--kind",
            "triangle"
        ])),
        0
    );
    let from_files = mlbound(&[
        "sweep",
        "--spectrum",
        s(&a),
        "--triangle-spectrum",
        s(&b),
        "--snr-db",
        "0:4:2",
    ]);
    let in_process = mlbound(&["sweep", "--trellis", s(&t), "--snr-db", "0:4:2"]);
    assert_eq!(code(&from_files), 0, "{}", stderr(&from_files));
    let (x, y) = (
        read_csv(&String::from_utf8(from_files.stdout).unwrap()),
        read_csv(&String::from_utf8(in_process.stdout).unwrap()),
    );
    assert_eq!(x.len(), 3);
    for (p, q) in x.iter().zip(&y) {
        for k in ["snr_db", "sigma", "union", "sb", "tb", "tsb"] {
            let (u, v) = (num(p, k), num(q, k));
            assert!(
                (u - v).abs() <= 1e-12 * v.abs().max(1e-300),
                "{k}: {u} vs {v}"
            );
        }
    }

    // The B file alone carries the energy and, through its marginal, the A spectrum.
    let b_only = mlbound(&["sweep", "--triangle-spectrum", s(&b), "--snr-db", "0:4:2"]);
    assert_eq!(code(&b_only), 0, "{}", stderr(&b_only));
    let z = read_csv(&String::from_utf8(b_only.stdout).unwrap());
    for (p, q) in z.iter().zip(&y) {
        for k in ["sigma", "union", "sb", "tb", "tsb"] {
            let (u, v) = (num(p, k), num(q, k));
            assert!((u - v).abs() <= 1e-9 * v.abs(), "{k}: {u} vs {v}");
        }
    }

    // Rows print with 12 significant digits and parse back to themselves.
    for r in &y {
        for k in ["snr_db", "sigma", "union", "sb", "tb", "tsb"] {
            assert_eq!(format!("{:.11e}", num(r, k)), r[k]);
        }
    }
}

#[test]
fn weights_select_binary_bounds() {
    let dir = TempDir::new().unwrap();
    let w = put(
        &dir,
        "golay.w",
        "# n=23\n0 1\n7 253\n8 506\n11 1288\n12 1288\n15 506\n16 253\n23 1\n",
    );
    let o = mlbound(&["sweep", "--weights", s(&w), "--snr-db", "2:2:1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = read_csv(&String::from_utf8(o.stdout).unwrap());
    let weights = codes::weight_distribution(&codes::golay23_generator()).unwrap();
    let ch = ChannelParams::from_snr_db(2.0, 23, 23.0).unwrap();
    let q = QuadratureConfig::default();
    let (a, _) = mlbound_core::spectrum::binary_spectra_from_weights(&weights, 23).unwrap();
    let want = [
        ("union", union_bound(&a, &ch).unwrap().value),
        (
            "sb",
            binary_sphere_bound(&weights, 23, &ch, &q).unwrap().value,
        ),
        (
            "tb",
            binary_tangential_bound(&weights, 23, &ch, &q)
                .unwrap()
                .value,
        ),
        ("tsb", binary_tsb(&weights, 23, &ch, &q).unwrap().value),
    ];
    for (k, v) in want {
        assert!((num(&rows[0], k) - v).abs() <= 1e-11 * v, "{k}");
    }
}

#[test]
fn numerical_failures_exit_with_two() {
    // A zero-energy reference codeword has no tangential geometry.
    let dir = TempDir::new().unwrap();
    let t = put_trellis(
        &dir,
        "z.json",
        &trivial_trellis(&[vec![0.0; 3], vec![1.0; 3]]).unwrap(),
    );
    let o = mlbound(&[
        "sweep",
        "--trellis",
        s(&t),
        "--bounds",
        "tsb",
        "--energy",
        "1",
        "--snr-db",
        "0:0:1",
    ]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(stderr(&o).contains("zero-energy"), "{}", stderr(&o));
}

#[test]
fn sweep_usage_errors() {
    let dir = TempDir::new().unwrap();
    let t = put_trellis(&dir, "h.json", &hamming());
    for args in [
        vec!["sweep", "--trellis", s(&t), "--snr-db", "3:1:1"],
        vec!["sweep", "--trellis", s(&t), "--snr-db", "0:1:0"],
        vec![
            "sweep",
            "--trellis",
            s(&t),
            "--snr-db",
            "0:1:1",
            "--bounds",
            "ub",
        ],
        vec![
            "sweep",
            "--trellis",
            s(&t),
            "--snr-db",
            "0:1:1",
            "--bounds",
            "none",
        ],
        vec!["sweep", "--snr-db", "0:1:1"],
        vec![
            "sweep",
            "--trellis",
            s(&t),
            "--snr-db",
            "0:1:1",
            "--tolerance",
            "0.5",
        ],
        vec!["frobnicate"],
    ] {
        let o = mlbound(&args);
        assert_eq!(code(&o), 1, "{args:?}: {}", stderr(&o));
    }
    assert_eq!(code(&mlbound(&["--help"])), 0);
}

#[test]
fn sweep_is_independent_of_worker_count() {
    let dir = TempDir::new().unwrap();
    let t = put_trellis(&dir, "h.json", &hamming());
    let run = |w: &str| {
        let o = mlbound(&[
            "sweep",
            "--trellis",
            s(&t),
            "--bounds",
            "none",
            "--snr-db",
            "1:3:1",
            "--frames",
            "20000",
            "--seed",
            "8",
            "--workers",
            w,
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        o.stdout
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn general_tsb_matches_library() {
    let dir = TempDir::new().unwrap();
    let toy = codes::four_am_toy_trellis();
    let t = put_trellis(&dir, "toy.json", &toy);
    let o = mlbound(&[
        "sweep",
        "--trellis",
        s(&t),
        "--bounds",
        "tsb",
        "--snr-db",
        "5:5:1",
        "--tolerance",
        "1e-6",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = read_csv(&String::from_utf8(o.stdout).unwrap());
    let b = triangle_spectrum(&toy, DEFAULT_QUANTIZATION).unwrap();
    let ch = ChannelParams::from_snr_db(5.0, 3, toy.average_energy().unwrap()).unwrap();
    let q = QuadratureConfig {
        relative_tolerance: 1e-6,
        ..QuadratureConfig::default()
    };
    let v = tangential_sphere_bound_general(&b, &ch, &q).unwrap().value;
    assert!((num(&rows[0], "tsb") - v).abs() <= 1e-11 * v);
    assert_eq!(rows[0]["union"], "");
}
