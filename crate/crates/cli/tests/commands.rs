use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lesc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lesc")).args(args).output().expect("binary runs")
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn generate(dir: &Path, stem: &str, extra: &[&str]) -> (String, String) {
    let graph = path(dir, &format!("{stem}.txt"));
    let labels = path(dir, &format!("{stem}.labels"));
    let mut args = vec!["generate", "dsbm2", "--out", &graph, "--labels", &labels];
    args.extend_from_slice(extra);
    let out = lesc(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    (graph, labels)
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()).collect()
}

#[test]
fn complete_generation_has_every_pair_once() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--n1", "4", "--n2", "4", "--p", "1", "--q", "1", "--eta", "0", "--seed", "7"];
    let (graph, _) = generate(dir.path(), "g", &args);
    let text = fs::read_to_string(&graph).unwrap();
    assert_eq!(data_lines(&text).len(), 28);
    let out = lesc(&["generate", "dsbm2", "--n1", "4", "--n2", "4", "--p", "1", "--q", "1", "--eta", "0", "--seed", "7", "--out", &path(dir.path(), "h.txt")]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "N=8 |E|=28");
}

#[test]
fn empty_generation_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--n1", "5", "--n2", "3", "--p", "0", "--q", "0", "--eta", "0.2"];
    let (graph, _) = generate(dir.path(), "g", &args);
    let text = fs::read_to_string(&graph).unwrap();
    assert!(data_lines(&text).is_empty());
    assert!(text.starts_with('#'));
}

#[test]
fn generation_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--n1", "50", "--n2", "60", "--p", "0.1", "--q", "0.05", "--eta", "0.2", "--seed", "3", "--shuffle"];
    let (a, la) = generate(dir.path(), "a", &args);
    let (b, lb) = generate(dir.path(), "b", &args);
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
    assert_eq!(fs::read(la).unwrap(), fs::read(lb).unwrap());
}

#[test]
fn meta_generation_accepts_shapes_and_files() {
    let dir = tempfile::tempdir().unwrap();
    let graph = path(dir.path(), "m.txt");
    let out = lesc(&["generate", "meta", "--sizes", "20,20,20", "--shape", "path", "--p", "0.1", "--q", "0.1", "--eta", "0.1", "--out", &graph]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("N=60 "));
    let meta = path(dir.path(), "meta.json");
    fs::write(&meta, r#"{"k": 3, "oriented_pairs": [[0, 1], [2, 1]]}"#).unwrap();
    let out = lesc(&["generate", "meta", "--sizes", "20,20,20", "--meta", &meta, "--p", "0.1", "--q", "0.1", "--eta", "0.1", "--out", &graph]);
    assert!(out.status.success());
    let bad = lesc(&["generate", "meta", "--sizes", "20,20", "--meta", &meta, "--p", "0.1", "--q", "0.1", "--eta", "0.1", "--out", &graph]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn cluster_reports_ari_against_truth() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--n1", "400", "--n2", "400", "--p", "0.05", "--q", "0.05", "--eta", "0.05", "--seed", "1"];
    let (graph, labels) = generate(dir.path(), "g", &args);
    let pred = path(dir.path(), "pred.labels");
    let report = path(dir.path(), "report.json");
    let trace = path(dir.path(), "trace.csv");
    let out = lesc(&["cluster", "--graph", &graph, "--truth", &labels, "--out", &pred, "--report", &report, "--trace", &trace]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["method"], "lesc");
    assert!(json["ari"].as_f64().unwrap() >= 0.95);
    assert!(json["params"]["eta"].as_f64().unwrap() < 0.1);
    let rows = fs::read_to_string(&trace).unwrap();
    assert_eq!(rows.lines().count(), json["iterations"].as_u64().unwrap() as usize + 1);

    let eval = lesc(&["evaluate", "--truth", &labels, "--pred", &pred]);
    assert!(eval.status.success());
    let scored: serde_json::Value = serde_json::from_slice(&eval.stdout).unwrap();
    assert_eq!(scored["ari"], json["ari"]);
}

#[test]
fn unimplemented_baselines_exit_four() {
    let dir = tempfile::tempdir().unwrap();
    let (graph, _) = generate(dir.path(), "g", &["--n1", "5", "--n2", "5", "--p", "0.5", "--q", "0.5", "--eta", "0.1"]);
    for method in ["dscore", "disim", "simpherm"] {
        let out = lesc(&["cluster", "--graph", &graph, "--method", method]);
        assert_eq!(out.status.code(), Some(4), "{method}");
        let msg = String::from_utf8_lossy(&out.stderr).to_lowercase();
        assert!(msg.contains(method), "{msg}");
    }
    let out = lesc(&["cluster", "--graph", &graph, "--method", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn normalized_sym_on_weighted_graph() {
    let dir = tempfile::tempdir().unwrap();
    let graph = path(dir.path(), "w.txt");
    let mut text = String::from("# weighted\n");
    for (u, v, w) in [(0, 1, 3.0), (1, 2, 2.5), (2, 0, 1.0), (3, 4, 4.0), (4, 5, 0.5), (5, 3, 2.0), (2, 3, 0.1)] {
        text.push_str(&format!("{u} {v} {w}\n"));
    }
    fs::write(&graph, text).unwrap();
    let pred = path(dir.path(), "p.labels");
    let out = lesc(&["cluster", "--graph", &graph, "--method", "sym", "--normalize", "--out", &pred]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["normalized"], true);
    assert_eq!(data_lines(&fs::read_to_string(&pred).unwrap()).len(), 6);
}

#[test]
fn more_clusters_than_vertices_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let graph = path(dir.path(), "tiny.txt");
    fs::write(&graph, "# vertices 3\n0 1\n").unwrap();
    let out = lesc(&["cluster", "--graph", &graph, "--k", "3", "--method", "sym"]);
    assert!(out.status.success());
    let out = lesc(&["cluster", "--graph", &graph, "--k", "4", "--method", "sym"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn io_failures_exit_three() {
    let out = lesc(&["cluster", "--graph", "/nonexistent/graph.txt"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn theory_curve_endpoints() {
    let out = lesc(&["theory", "--points", "11"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 11);
    assert_eq!(rows.last().unwrap()[1], 0.0);
    assert!(rows.windows(2).all(|w| w[1][1] < w[0][1]));
    let one = lesc(&["theory", "--points", "1", "--eta-min", "0.2", "--eta-max", "0.2"]);
    assert_eq!(String::from_utf8_lossy(&one.stdout).lines().count(), 2);
    let bad = lesc(&["theory", "--eta-max", "0.7"]);
    assert_eq!(bad.status.code(), Some(2));
}

fn write_config(dir: &Path, name: &str, body: serde_json::Value) -> String {
    let p = path(dir, name);
    fs::write(&p, body.to_string()).unwrap();
    p
}

fn strip_runtime(csv_text: &str) -> Vec<String> {
    let mut lines = csv_text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let keep: Vec<usize> = (0..header.len()).filter(|&i| !header[i].ends_with("_secs")).collect();
    std::iter::once(header.join(","))
        .chain(lines.map(|l| {
            let cells: Vec<&str> = l.split(',').collect();
            keep.iter().map(|&i| cells[i]).collect::<Vec<_>>().join(",")
        }))
        .collect()
}

#[test]
fn single_point_benchmark_has_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let out_csv = path(dir.path(), "one.csv");
    let cfg = write_config(
        dir.path(),
        "one.json",
        serde_json::json!({"sizes": [40, 40], "p": [0.1], "q": [0.1], "eta": [0.1], "methods": ["lesc"], "output": out_csv}),
    );
    let out = lesc(&["benchmark", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_to_string(&out_csv).unwrap().lines().count(), 2);
    assert!(dir.path().join("one.aggregate.csv").exists());
}

#[test]
fn benchmark_reruns_match_apart_from_timings() {
    let dir = tempfile::tempdir().unwrap();
    let body = |out: &str| {
        serde_json::json!({"sizes": [60, 60], "p": [0.1], "q": [0.05, 0.1], "eta": [0.0, 0.2], "methods": ["lesc", "herm", "sym", "bibsym"], "replicates": 3, "seed": 4, "shuffle": true, "output": out})
    };
    let (a, b) = (path(dir.path(), "a.csv"), path(dir.path(), "b.csv"));
    for (name, out) in [("a.json", &a), ("b.json", &b)] {
        let cfg = write_config(dir.path(), name, body(out));
        assert!(lesc(&["benchmark", &cfg]).status.success());
    }
    let (ta, tb) = (fs::read_to_string(&a).unwrap(), fs::read_to_string(&b).unwrap());
    assert_eq!(ta.lines().count(), 1 + 4 * 4 * 3);
    assert_eq!(strip_runtime(&ta), strip_runtime(&tb));
}

#[test]
fn benchmark_thread_cap_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (path(dir.path(), "a.csv"), path(dir.path(), "b.csv"));
    for (threads, out) in [("1", &a), ("3", &b)] {
        let cfg = write_config(
            dir.path(),
            &format!("{threads}.json"),
            serde_json::json!({"sizes": [50, 50], "p": [0.1], "q": [0.1], "eta": [0.1], "methods": ["lesc"], "replicates": 4, "output": out}),
        );
        let status = Command::new(env!("CARGO_BIN_EXE_lesc"))
            .args(["benchmark", &cfg])
            .env("LESC_THREADS", threads)
            .status()
            .unwrap();
        assert!(status.success());
    }
    assert_eq!(
        strip_runtime(&fs::read_to_string(&a).unwrap()),
        strip_runtime(&fs::read_to_string(&b).unwrap())
    );
}

#[test]
fn invalid_benchmark_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        serde_json::json!({"sizes": [10, 10], "p": [], "q": [0.1], "eta": [0.1], "methods": ["lesc"], "output": path(dir.path(), "x.csv")}),
    );
    assert_eq!(lesc(&["benchmark", &cfg]).status.code(), Some(2));
    let cfg = write_config(
        dir.path(),
        "dscore.json",
        serde_json::json!({"sizes": [10, 10], "p": [0.1], "q": [0.1], "eta": [0.1], "methods": ["dscore"], "output": path(dir.path(), "x.csv")}),
    );
    assert_eq!(lesc(&["benchmark", &cfg]).status.code(), Some(4));
}
