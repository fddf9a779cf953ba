use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dpdm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dpdm")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name).to_str().unwrap().to_string()
}

/// "key<TAB>value" lines of a text rendering.
fn text_pairs(s: &str) -> BTreeMap<String, String> {
    s.lines()
        .filter_map(|l| l.split_once('\t'))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

#[test]
fn layered_dist_gives_g_one_eighth() {
    let o = dpdm(&["dist", "--mech", "lay", "--eps", "0.1", "--a", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(text_pairs(&out)["7"], "0.125");
    assert!(out.trim_end().lines().last().unwrap().starts_with("no_sale\t"));
}

#[test]
fn seeded_auction_repeats() {
    let a = dpdm(&["auction", "--mech", "rec", "--seed", "7"]);
    let b = dpdm(&["auction", "--mech", "rec", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("winner\t"));
}

#[test]
fn dp_suite_passes_at_five_buyers() {
    let o = dpdm(&["verify", "dp", "--max-nodes", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("4 properties, 0 failed"));
}

#[test]
fn tree_of_the_example() {
    let o = dpdm(&["tree"]);
    let out = stdout(&o);
    assert!(out.contains("7\t6\t3\n"), "{out}");
    assert_eq!(text_pairs(&out)["d_max"], "3");
}

#[test]
fn files_match_the_builtin_example() {
    let (g, v) = (data("seven_buyer.edges"), data("seven_buyer.values"));
    for cmd in ["tree", "dist"] {
        let from_files = dpdm(&[cmd, "--graph", &g, "--values", &v]);
        assert_eq!(from_files.status.code(), Some(0));
        assert_eq!(from_files.stdout, dpdm(&[cmd]).stdout);
    }
}

#[test]
fn json_and_text_carry_the_same_numbers() {
    for mech in ["rec", "lay", "emd", "emwd", "idm"] {
        let text = text_pairs(&stdout(&dpdm(&["dist", "--mech", mech, "--eps", "0.3"])));
        let json: serde_json::Value =
            serde_json::from_str(&stdout(&dpdm(&["dist", "--mech", mech, "--eps", "0.3", "--format", "json"])))
                .unwrap();
        for (id, p) in json["prob"].as_object().unwrap() {
            assert_eq!(p.as_f64().unwrap(), text[id].parse::<f64>().unwrap(), "{mech} {id}");
        }
        assert_eq!(json["no_sale"].as_f64().unwrap(), text["no_sale"].parse::<f64>().unwrap());
    }
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["dist", "--mech", "vcg"],
        vec!["dist", "--values", "x"],
        vec!["dist", "--eps", "-1"],
        vec!["dist", "--mech", "rec", "--a", "3"],
        vec!["dist", "--mech", "lay", "--a", "1"],
        vec!["verify", "everything"],
        vec!["verify", "dp", "--max-nodes", "0"],
        vec!["sweep"],
        vec![],
    ] {
        assert_eq!(dpdm(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn io_and_input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("none").to_str().unwrap().to_string();
    assert_eq!(dpdm(&["tree", "--graph", &missing, "--values", &missing]).status.code(), Some(1));
    assert_eq!(dpdm(&["dist", "--instance", &missing]).status.code(), Some(1));
    assert_eq!(dpdm(&["sweep", &missing]).status.code(), Some(1));
    // A valuation above the bound.
    assert_eq!(dpdm(&["dist", "--v-max", "12"]).status.code(), Some(1));
}

#[test]
fn unknown_seller_is_a_usage_error() {
    let o = dpdm(&["tree", "--graph", &data("seven_buyer.edges"), "--values", &data("seven_buyer.values"), "--seller", "99"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failed_properties_exit_one_and_save_counterexamples() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cex");
    let o = dpdm(&[
        "verify",
        "neighbor-ic",
        "--max-nodes",
        "2",
        "--instances",
        "400",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    let file = out.join("neighbor-ic-digraph_LAY.json");
    assert!(file.exists());

    // The counterexample replays.
    let replay = dpdm(&["dist", "--instance", file.to_str().unwrap(), "--format", "json"]);
    assert_eq!(replay.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&replay)).unwrap();
    assert_eq!(v["mechanism"], "LAY");
    // Flags override the file.
    let replay = dpdm(&["dist", "--instance", file.to_str().unwrap(), "--mech", "rec", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&replay)).unwrap();
    assert_eq!(v["mechanism"], "REC");
}

#[test]
fn sweep_writes_results_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.cfg");
    fs::write(&cfg, "dataset = s\ngraph = gnm:25:60\nruns = 10\nepsilons = 0.1, 0.2\nlaws = uniform\n").unwrap();
    let out = dir.path().join("out");
    let o = dpdm(&["sweep", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "4", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1 + 5 * 2);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",10,4")));
    assert!(out.join("results.csv").exists());
    assert!(out.join("s_uniform.svg").exists());
}
