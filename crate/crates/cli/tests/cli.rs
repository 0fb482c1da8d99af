use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/fixtures");

fn scenetree(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scenetree"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], dir: &Path) -> Output {
    let out = scenetree(args, dir);
    assert!(
        out.status.success(),
        "{args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn lines(path: &Path) -> Vec<Value> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn write_lines(path: &Path, values: &[Value]) {
    let text: String = values.iter().map(|v| format!("{v}\n")).collect();
    fs::write(path, text).unwrap();
}

fn scene(id: &str) -> Value {
    json!({
        "image_id": id, "width": 200, "height": 100,
        "objects": [
            {"name": "cabinet", "bbox": [0, 0, 100, 100], "parts": [
                {"part_name": "door", "bbox": [0, 0, 50, 100], "affordances": [
                    {"action": "open", "point": [25, 50]}
                ]},
                {"part_name": "handle", "bbox": [40, 40, 48, 60], "affordances": []}
            ]},
            {"name": "cup", "bbox": [120, 20, 180, 80], "parts": []}
        ]
    })
}

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run(&self, args: &[&str]) -> Output {
        ok(args, self.dir.path())
    }

    fn gt(&self) -> &'static str {
        write_lines(
            &self.path("gt.jsonl"),
            &[scene("a"), scene("b"), scene("c")],
        );
        "gt.jsonl"
    }
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn ground_truth_against_itself_scores_100() {
    let f = Fixture::new();
    let gt = f.gt();
    let out = f.run(&[
        "eval", "--gt", gt, "--pred", gt, "--iou", "0.5,0.75", "--out", "r.json",
    ]);
    let r = report(&f.path("r.json"));
    for t in r["thresholds"].as_array().unwrap() {
        for level in ["l1", "l2", "l3"] {
            assert_eq!(t[level]["f1_pct"], 100.0, "{level}");
        }
    }
    assert_eq!(r["parse_rate_pct"], 100.0);
    assert!(f.path("r.txt").exists());
    assert!(String::from_utf8_lossy(&out.stdout).contains("100.0"));
}

#[test]
fn missing_prediction_counts_as_missed_with_a_warning() {
    let f = Fixture::new();
    let gt = f.gt();
    write_lines(&f.path("pred.jsonl"), &[scene("a"), scene("b")]);
    let out = f.run(&[
        "eval",
        "--gt",
        gt,
        "--pred",
        "pred.jsonl",
        "--out",
        "r.json",
    ]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("no prediction for \"c\""));
    let r = report(&f.path("r.json"));
    let l1 = &r["thresholds"][0]["l1"];
    assert_eq!((l1["tp"].as_u64(), l1["fn"].as_u64()), (Some(4), Some(2)));
}

#[test]
fn malformed_prediction_line() {
    let f = Fixture::new();
    let gt = f.gt();
    let text = format!(
        "{}\n{{\"image_id\": \"b\", \"objects\": [\n{}\n",
        scene("a"),
        scene("c")
    );
    fs::write(f.path("pred.jsonl"), text).unwrap();

    let strict = scenetree(
        &[
            "eval",
            "--gt",
            gt,
            "--pred",
            "pred.jsonl",
            "--strict",
            "--out",
            "r.json",
        ],
        f.dir.path(),
    );
    assert!(!strict.status.success());
    assert!(String::from_utf8_lossy(&strict.stderr).contains("line 2"));

    let tolerant = f.run(&[
        "eval",
        "--gt",
        gt,
        "--pred",
        "pred.jsonl",
        "--out",
        "r.json",
    ]);
    assert!(String::from_utf8_lossy(&tolerant.stderr).contains("line 2"));
    assert_eq!(report(&f.path("r.json"))["thresholds"][0]["l1"]["fn"], 2);
}

#[test]
fn serialized_predictions_are_repaired_unless_strict() {
    let f = Fixture::new();
    let text = fs::read_to_string(Path::new(FIXTURES).join("nested_example.txt")).unwrap();
    fs::copy(
        Path::new(FIXTURES).join("flat_example.json"),
        f.path("g.json"),
    )
    .unwrap();
    f.run(&[
        "convert", "--in", "g.json", "--out", "gt.jsonl", "--width", "1000", "--height", "1000",
    ]);
    write_lines(
        &f.path("pred.jsonl"),
        &[json!({"image_id": "g", "output": text})],
    );

    f.run(&[
        "eval",
        "--gt",
        "gt.jsonl",
        "--pred",
        "pred.jsonl",
        "--pred-format",
        "serialized",
        "--out",
        "r.json",
    ]);
    let r = report(&f.path("r.json"));
    assert_eq!(r["thresholds"][0]["l3"]["f1_pct"], 100.0);

    let strict = scenetree(
        &[
            "eval",
            "--gt",
            "gt.jsonl",
            "--pred",
            "pred.jsonl",
            "--pred-format",
            "serialized",
            "--strict",
            "--out",
            "r.json",
        ],
        f.dir.path(),
    );
    assert!(!strict.status.success());
    assert!(String::from_utf8_lossy(&strict.stderr).contains("TRAILING_COMMA"));
}

#[test]
fn convert_example_and_round_trip() {
    let f = Fixture::new();
    fs::copy(
        Path::new(FIXTURES).join("flat_example.json"),
        f.path("g.json"),
    )
    .unwrap();
    let missing_size = scenetree(
        &["convert", "--in", "g.json", "--out", "h.jsonl"],
        f.dir.path(),
    );
    assert!(!missing_size.status.success());

    f.run(&[
        "convert", "--in", "g.json", "--out", "h.jsonl", "--width", "1000", "--height", "1000",
        "--report", "c.json",
    ]);
    let recs = lines(&f.path("h.jsonl"));
    assert_eq!(recs.len(), 1);
    let names: Vec<&str> = recs[0]["objects"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| o["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["microwave", "drawer"]);
    assert_eq!(recs[0]["objects"][0]["parts"].as_array().unwrap().len(), 2);
    assert_eq!(report(&f.path("c.json"))[0]["objects"], 2);

    f.run(&["flatten", "--in", "h.jsonl", "--out", "flat.jsonl"]);
    f.run(&["convert", "--in", "flat.jsonl", "--out", "back.jsonl"]);
    assert_eq!(
        fs::read(f.path("back.jsonl")).unwrap(),
        fs::read(f.path("h.jsonl")).unwrap()
    );
    f.run(&[
        "eval",
        "--gt",
        "h.jsonl",
        "--pred",
        "back.jsonl",
        "--out",
        "r.json",
    ]);
    assert_eq!(
        report(&f.path("r.json"))["thresholds"][0]["l3"]["f1_pct"],
        100.0
    );
}

#[test]
fn convert_empty_triplets() {
    let f = Fixture::new();
    fs::write(
        f.path("e.json"),
        r#"{"image_id": "e", "width": 10, "height": 10, "triplets": []}"#,
    )
    .unwrap();
    f.run(&["convert", "--in", "e.json", "--out", "h.jsonl"]);
    let recs = lines(&f.path("h.jsonl"));
    assert_eq!(recs[0]["objects"], json!([]));
}

#[test]
fn convert_reports_schema_errors_with_position() {
    let f = Fixture::new();
    fs::write(
        f.path("bad.json"),
        r#"{"width": 10, "height": 10, "triplets": [{"object": "cup"}]}"#,
    )
    .unwrap();
    let out = scenetree(
        &["convert", "--in", "bad.json", "--out", "h.jsonl"],
        f.dir.path(),
    );
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("object_box") && err.contains("byte 41"),
        "{err}"
    );
}

#[test]
fn complete_then_validate_has_no_errors() {
    let f = Fixture::new();
    let gt = f.gt();
    let before = scenetree(&["validate", "--in", gt, "--strict"], f.dir.path());
    f.run(&["complete", "--in", gt, "--out", "c.jsonl"]);
    f.run(&["validate", "--in", "c.jsonl", "--report", "v.json"]);
    let v = report(&f.path("v.json"));
    assert_eq!(v["errors"], 0);
    let recs = lines(&f.path("c.jsonl"));
    assert_eq!(
        recs[0]["objects"][1]["parts"][0]["part_name"],
        "__placeholder_part__"
    );
    // Placeholder-free input passes both ways.
    assert!(before.status.success());
}

#[test]
fn validate_fails_on_errors() {
    let f = Fixture::new();
    let mut bad = scene("x");
    bad["objects"][0]["bbox"] = json!([50, 50, 10, 10]);
    write_lines(&f.path("bad.jsonl"), &[scene("a"), bad]);
    fs::write(
        f.path("bad.jsonl"),
        format!(
            "{}not json\n",
            fs::read_to_string(f.path("bad.jsonl")).unwrap()
        ),
    )
    .unwrap();
    let out = scenetree(&["validate", "--in", "bad.jsonl"], f.dir.path());
    assert!(!out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("line 3") && stdout.contains("x:"),
        "{stdout}"
    );
}

#[test]
fn reconstruct_assigns_and_cleans() {
    let f = Fixture::new();
    let mut s = scene("a");
    s["objects"][0]["parts"][0]["affordances"] = json!([]);
    write_lines(&f.path("s.jsonl"), &[s]);
    write_lines(
        &f.path("ann.jsonl"),
        &[json!({"image_id": "a", "object_index": 0, "annotations": [
            {"action": "open", "point": [20, 50], "interaction_part": "Door"},
            {"action": "pull", "point": [44, 50]},
            {"action": "lift", "point": [150, 50], "box": null, "confidence": null}
        ]})],
    );
    f.run(&[
        "reconstruct",
        "--scenes",
        "s.jsonl",
        "--annotations",
        "ann.jsonl",
        "--out",
        "o.jsonl",
        "--report",
        "q.json",
    ]);
    let q = report(&f.path("q.json"));
    assert_eq!(q["counts"]["assigned_textual"], 1);
    assert_eq!(q["counts"]["assigned_geometric"], 1);
    assert_eq!(q["counts"]["dropped_unassigned"], 1);
    let rec = &lines(&f.path("o.jsonl"))[0];
    assert_eq!(
        rec["objects"][0]["parts"][1]["affordances"][0]["action"],
        "pull"
    );

    write_lines(
        &f.path("bad.jsonl"),
        &[json!({"image_id": "a", "object_index": 9, "annotations": []})],
    );
    let out = scenetree(
        &[
            "reconstruct",
            "--scenes",
            "s.jsonl",
            "--annotations",
            "bad.jsonl",
            "--out",
            "o.jsonl",
        ],
        f.dir.path(),
    );
    assert!(!out.status.success());
}

#[test]
fn sample_stage_two() {
    let f = Fixture::new();
    let np: String = (0..6).map(|i| format!("n{i}\n")).collect();
    fs::write(f.path("np.txt"), np).unwrap();
    write_lines(&f.path("ps.jsonl"), &[scene("p0"), scene("p1")]);
    f.run(&[
        "sample",
        "--nonpseudo",
        "np.txt",
        "--pseudo",
        "ps.jsonl",
        "--stage",
        "2",
        "--n",
        "10",
        "--seed",
        "3",
        "--out",
        "m.jsonl",
    ]);
    let ms = lines(&f.path("m.jsonl"));
    assert_eq!(ms.len(), 4);
    for (e, m) in ms.iter().enumerate() {
        assert_eq!(m["epoch"], e);
        let entries = m["entries"].as_array().unwrap();
        assert_eq!(entries.len(), 10);
        assert_eq!(entries.iter().filter(|x| x["pool"] == "pseudo").count(), 3);
    }

    fs::write(f.path("empty.txt"), "").unwrap();
    let out = scenetree(
        &[
            "sample",
            "--nonpseudo",
            "np.txt",
            "--pseudo",
            "empty.txt",
            "--stage",
            "3",
            "--n",
            "4",
            "--out",
            "m.jsonl",
        ],
        f.dir.path(),
    );
    assert!(!out.status.success());
    let bad_stage = scenetree(
        &[
            "sample",
            "--nonpseudo",
            "np.txt",
            "--pseudo",
            "empty.txt",
            "--stage",
            "4",
            "--n",
            "4",
            "--out",
            "m.jsonl",
        ],
        f.dir.path(),
    );
    assert!(!bad_stage.status.success());
}

#[test]
fn sample_reads_a_stage_table() {
    let f = Fixture::new();
    fs::write(f.path("np.txt"), "a\nb\n").unwrap();
    fs::write(f.path("ps.txt"), "x\n").unwrap();
    fs::write(
        f.path("stages.toml"),
        "[[stages]]\nstage_id = 1\npseudo_fraction = 0.25\nepochs = 1\nmain_lr = 1e-5\nvision_lr = 1e-6\n",
    )
    .unwrap();
    f.run(&[
        "sample",
        "--nonpseudo",
        "np.txt",
        "--pseudo",
        "ps.txt",
        "--stage",
        "1",
        "--n",
        "8",
        "--stages-config",
        "stages.toml",
        "--out",
        "m.jsonl",
    ]);
    let ms = lines(&f.path("m.jsonl"));
    assert_eq!(ms.len(), 1);
    assert_eq!(
        ms[0]["entries"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|x| x["pool"] == "pseudo")
            .count(),
        2
    );
}

#[test]
fn stats_on_the_example() {
    let f = Fixture::new();
    fs::copy(
        Path::new(FIXTURES).join("flat_example.json"),
        f.path("g.json"),
    )
    .unwrap();
    f.run(&[
        "convert", "--in", "g.json", "--out", "h.jsonl", "--width", "1000", "--height", "1000",
    ]);
    f.run(&[
        "stats", "--in", "h.jsonl", "--top-k", "30", "--out", "s.json",
    ]);
    let s = report(&f.path("s.json"));
    assert_eq!(s["parts_per_object"], 1.5);
    assert_eq!(s["affordances_per_part"], 1.0);
    assert!(fs::read_to_string(f.path("s.txt"))
        .unwrap()
        .contains("1.500"));
}

#[test]
fn reruns_are_byte_identical() {
    let f = Fixture::new();
    let gt = f.gt();
    let mut pred = scene("b");
    pred["objects"][0]["bbox"] = json!([2, 0, 100, 96]);
    write_lines(&f.path("pred.jsonl"), &[scene("c"), pred, scene("a")]);
    fs::write(f.path("ids.txt"), "a\nb\nc\n").unwrap();
    let runs = |tag: &str| {
        let out = |name: &str| format!("{tag}-{name}");
        f.run(&[
            "eval",
            "--gt",
            gt,
            "--pred",
            "pred.jsonl",
            "--iou",
            "0.5,0.75",
            "--out",
            &out("eval.json"),
        ]);
        f.run(&[
            "complete",
            "--in",
            "pred.jsonl",
            "--out",
            &out("complete.jsonl"),
        ]);
        f.run(&["flatten", "--in", "pred.jsonl", "--out", &out("flat.jsonl")]);
        f.run(&["stats", "--in", "pred.jsonl", "--out", &out("stats.json")]);
        f.run(&[
            "sample",
            "--nonpseudo",
            "ids.txt",
            "--pseudo",
            "ids.txt",
            "--stage",
            "3",
            "--n",
            "7",
            "--seed",
            "11",
            "--out",
            &out("m.jsonl"),
        ]);
    };
    runs("one");
    runs("two");
    for name in [
        "eval.json",
        "eval.txt",
        "complete.jsonl",
        "flat.jsonl",
        "stats.json",
        "stats.txt",
        "m.jsonl",
    ] {
        let a = fs::read(f.path(&format!("one-{name}"))).unwrap();
        let b = fs::read(f.path(&format!("two-{name}"))).unwrap();
        assert_eq!(a, b, "{name}");
    }
    // Output records are ordered by image id whatever the input order.
    let ids: Vec<String> = lines(&f.path("one-complete.jsonl"))
        .iter()
        .map(|r| r["image_id"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(ids, ["a", "b", "c"]);
}
