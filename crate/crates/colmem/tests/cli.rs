use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use colmem::{formats, gexf, snapshot};
use tempfile::TempDir;

fn colmem(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_colmem"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) {
    let out = colmem(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Three planted clusters as edge and visit files, plus a run config.
fn workspace() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("synth.conf"), "n_nodes = 60\nseed = 3\n").unwrap();
    ok(
        dir.path(),
        &[
            "synth",
            "--config",
            "synth.conf",
            "--out",
            "g.snap",
            "--truth",
            "truth.csv",
            "--edges",
            "e.tsv",
            "--visits",
            "v.csv",
        ],
    );
    fs::write(
        dir.path().join("run.conf"),
        "edges = e.tsv\nvisits = v.csv\nout_dir = out\nhours = 744\nmin_visits = 50\nfilter = full\n\
         eval = true\neval.trials = 4\neval.fractions = 0.5, 1.0\ngnuplot = true\n",
    )
    .unwrap();
    dir
}

fn manifest(dir: &Path) -> serde_json::Value {
    let mut m: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap();
    m.as_object_mut().unwrap().remove("total_seconds");
    for s in m["stages"].as_array_mut().unwrap() {
        s.as_object_mut().unwrap().remove("seconds");
    }
    m
}

/// Every artifact except the manifest, by name.
fn artifacts(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().unwrap() != "manifest.json" {
                out.insert(
                    p.strip_prefix(dir).unwrap().to_path_buf(),
                    fs::read(&p).unwrap(),
                );
            }
        }
    }
    out
}

#[test]
fn full_run_writes_every_stage() {
    let ws = workspace();
    ok(ws.path(), &["run", "--config", "run.conf"]);
    let out = ws.path().join("out");
    for f in [
        "00_ingest.snap",
        "01_preprocess.snap",
        "02_learn.snap",
        "03_prune.snap",
        "ingest.json",
        "id_mapping.csv",
        "partition.csv",
        "stats.json",
        "eval.json",
        "graph.gexf",
        "plots/weight.dat",
    ] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let m = manifest(&out);
    let stages: Vec<&str> = m["stages"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["stage"].as_str().unwrap())
        .collect();
    assert_eq!(
        stages,
        [
            "ingest",
            "preprocess",
            "learn",
            "prune",
            "communities",
            "stats",
            "eval",
            "export"
        ]
    );
    assert_eq!(m["parameters"]["lambda"], "0.5");
    assert_eq!(m["seed"], 42);

    let stats: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("stats.json")).unwrap()).unwrap();
    assert_eq!(stats["communities"]["count"], 3);
    let q = stats["communities"]["modularity"].as_f64().unwrap();
    assert!(q > stats["initial_communities"]["modularity"].as_f64().unwrap());
}

#[test]
fn rerun_and_thread_count_change_nothing_but_timings() {
    let ws = workspace();
    ok(
        ws.path(),
        &["run", "--config", "run.conf", "--out-dir", "a"],
    );
    ok(
        ws.path(),
        &["run", "--config", "run.conf", "--out-dir", "b"],
    );
    ok(
        ws.path(),
        &[
            "run",
            "--config",
            "run.conf",
            "--out-dir",
            "c",
            "--threads",
            "4",
        ],
    );
    let (a, b, c) = (
        ws.path().join("a"),
        ws.path().join("b"),
        ws.path().join("c"),
    );
    assert_eq!(manifest(&a), manifest(&b));
    assert_eq!(artifacts(&a), artifacts(&b));
    assert_eq!(artifacts(&a), artifacts(&c));
    assert_eq!(manifest(&c)["parameters"]["threads"], "4");
}

#[test]
fn exported_communities_match_partition_file() {
    let ws = workspace();
    ok(ws.path(), &["run", "--config", "run.conf"]);
    let out = ws.path().join("out");
    let g = gexf::parse_gexf(formats::open(out.join("graph.gexf")).unwrap()).unwrap();
    let rows: BTreeMap<String, u32> =
        formats::read_partition(formats::open(out.join("partition.csv")).unwrap())
            .unwrap()
            .into_iter()
            .collect();
    assert_eq!(g.labels.len(), rows.len());
    for (l, c) in g.labels.iter().zip(&g.community) {
        assert_eq!(Some(rows[l]), *c, "{l}");
    }
    let pruned = snapshot::load(out.join("03_prune.snap")).unwrap();
    assert_eq!(g.edges.len(), pruned.edge_count());
}

#[test]
fn missing_input_fails_at_ingest() {
    let ws = workspace();
    fs::remove_file(ws.path().join("v.csv")).unwrap();
    let out = colmem(ws.path(), &["run", "--config", "run.conf"]);
    assert_eq!(out.status.code(), Some(11));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("[ingest]") && err.contains("v.csv"), "{err}");
}

#[test]
fn config_errors_exit_early() {
    let ws = workspace();
    fs::write(
        ws.path().join("typo.conf"),
        "edges = e.tsv\nvisits = v.csv\nout_dir = o\nlamda = 0.2\n",
    )
    .unwrap();
    let out = colmem(ws.path(), &["run", "--config", "typo.conf"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lamda"));
    assert!(!ws.path().join("o").exists());
    // clap usage errors keep their own code
    assert_eq!(
        colmem(ws.path(), &["learn", "--threads", "many"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn subcommands_chain() {
    let ws = workspace();
    let d = ws.path();
    ok(
        d,
        &[
            "ingest",
            "--edges",
            "e.tsv",
            "--visits",
            "v.csv",
            "--hours",
            "744",
            "--min-visits",
            "50",
            "--out",
            "i.snap",
            "--report",
            "i.json",
        ],
    );
    ok(
        d,
        &[
            "preprocess",
            "--snapshot",
            "i.snap",
            "--mode",
            "full",
            "--out",
            "p.snap",
        ],
    );
    ok(
        d,
        &[
            "preprocess",
            "--snapshot",
            "i.snap",
            "--window-month",
            "2014-10",
            "--out",
            "oct.snap",
        ],
    );
    ok(
        d,
        &[
            "learn",
            "--snapshot",
            "p.snap",
            "--threads",
            "3",
            "--out",
            "l.snap",
        ],
    );
    ok(
        d,
        &[
            "prune",
            "--snapshot",
            "l.snap",
            "--mapping",
            "map.csv",
            "--out",
            "w.snap",
        ],
    );
    ok(
        d,
        &[
            "communities",
            "--snapshot",
            "w.snap",
            "--out",
            "part.csv",
            "--report",
            "c.json",
        ],
    );
    ok(
        d,
        &[
            "stats",
            "--snapshot",
            "w.snap",
            "--partition",
            "part.csv",
            "--initial",
            "p.snap",
            "--report",
            "s.json",
            "--gnuplot",
            "plots",
        ],
    );
    ok(
        d,
        &["binarize", "--snapshot", "w.snap", "--out", "pattern.csv"],
    );
    ok(
        d,
        &[
            "recall",
            "--snapshot",
            "w.snap",
            "--pattern",
            "pattern.csv",
            "--out",
            "recalled.csv",
            "--report",
            "r.json",
        ],
    );
    ok(
        d,
        &[
            "export",
            "--snapshot",
            "w.snap",
            "--partition",
            "part.csv",
            "--out",
            "w.gexf",
        ],
    );
    ok(
        d,
        &["monthly", "--snapshot", "p.snap", "--report", "m.json"],
    );

    let w = snapshot::load(d.join("w.snap")).unwrap();
    let oct = snapshot::load(d.join("oct.snap")).unwrap();
    assert_eq!(oct.horizon(), 744 - 190);
    let members: Vec<String> = fs::read_to_string(d.join("truth.csv"))
        .unwrap()
        .lines()
        .filter(|l| l.split(',').nth(1) == Some("0"))
        .map(|l| l.split(',').next().unwrap().to_owned())
        .collect();
    let cluster: Vec<&str> = members
        .iter()
        .map(String::as_str)
        .filter(|l| w.node_id(l).is_some())
        .collect();
    formats::write_cluster(&cluster, formats::create(d.join("cluster.csv")).unwrap()).unwrap();
    ok(
        d,
        &[
            "eval",
            "--snapshot",
            "w.snap",
            "--cluster",
            "cluster.csv",
            "--fractions",
            "0.5..1.0:0.25",
            "--trials",
            "3",
            "--report",
            "e.json",
        ],
    );

    let r: serde_json::Value =
        serde_json::from_slice(&fs::read(d.join("r.json")).unwrap()).unwrap();
    assert_eq!(r["converged"], true);
    let e: serde_json::Value =
        serde_json::from_slice(&fs::read(d.join("e.json")).unwrap()).unwrap();
    assert_eq!(e["rows"].as_array().unwrap().len(), 3);
    assert_eq!(e["cluster_size"], cluster.len());
    assert_eq!(e["rows"][2]["event_window"]["mean"], 0.0);
    let m: serde_json::Value =
        serde_json::from_slice(&fs::read(d.join("m.json")).unwrap()).unwrap();
    assert_eq!(m["months"], serde_json::json!(["2014-09", "2014-10"]));
    let c: serde_json::Value =
        serde_json::from_slice(&fs::read(d.join("c.json")).unwrap()).unwrap();
    assert_eq!(c["count"], 3);
    assert!(d.join("plots/degree.dat").is_file());
}

#[test]
fn flags_override_config() {
    let ws = workspace();
    let d = ws.path();
    ok(
        d,
        &[
            "ingest",
            "--edges",
            "e.tsv",
            "--visits",
            "v.csv",
            "--hours",
            "744",
            "--min-visits",
            "50",
            "--out",
            "i.snap",
        ],
    );
    fs::write(
        d.join("learn.conf"),
        "snapshot = i.snap\nout = from_file.snap\nlambda = 0.9\n",
    )
    .unwrap();
    ok(d, &["learn", "--config", "learn.conf"]);
    ok(
        d,
        &[
            "learn",
            "--config",
            "learn.conf",
            "--lambda",
            "0.5",
            "--out",
            "from_flag.snap",
        ],
    );
    ok(
        d,
        &["learn", "--snapshot", "i.snap", "--out", "default.snap"],
    );
    let total = |f: &str| snapshot::load(d.join(f)).unwrap().total_weight();
    assert!(total("from_file.snap") < total("from_flag.snap"));
    assert_eq!(total("from_flag.snap"), total("default.snap"));
}
