use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn scenario(name: &str) -> PathBuf {
    root().join("scenarios").join(name)
}

fn run(args: &[&str], out: &Path, threads: Option<&str>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ncindex"));
    c.args(args).arg("--out").arg(out);
    if let Some(t) = threads {
        c.env("NCINDEX_THREADS", t);
    }
    c.output().expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn identities_count_zero_is_an_empty_pass() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["identities", "--count", "0"], dir.path(), None);
    assert!(o.status.success());
    let v = json(&dir.path().join("identities.json"));
    assert_eq!(v["pass"], true);
    assert_eq!(v["report"]["tallies"].as_array().unwrap().len(), 0);
}

#[test]
fn identities_are_bit_identical_under_a_seed() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(run(&["identities", "--count", "12", "--seed", "9"], a.path(), None).status.success());
    assert!(run(&["identities", "--count", "12", "--seed", "9"], b.path(), None).status.success());
    let read = |d: &Path| std::fs::read(d.join("identities.json")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn trivial_scenario_has_index_zero() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario("trivial.scn");
    let o = run(&["index", "--scenario", s.to_str().unwrap()], dir.path(), None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&dir.path().join("index.json"));
    assert_eq!(v["report"]["rank_index"], 0);
    assert_eq!(v["scenario"], "trivial");
    assert_eq!(v["scenario_hash"].as_str().unwrap().len(), 64);
    assert_eq!(v["conventions"]["chain_sign_odd"], -1.0);
    let o = run(&["chern", "--scenario", s.to_str().unwrap()], dir.path(), None);
    assert!(o.status.success());
    let table = std::fs::read_to_string(dir.path().join("ch_deg0.csv")).unwrap();
    assert_eq!(table.lines().count(), 2);
}

#[test]
fn compact_z2_has_unit_character_and_matches_brute_force() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["chern", "--scenario", scenario("compact_z2.scn").to_str().unwrap()], dir.path(), None);
    assert!(o.status.success());
    let v = json(&dir.path().join("chern.json"));
    assert_eq!(v["report"]["ch0_is_unit"], true);
    assert_eq!(v["report"]["brute_force_agrees"], true);
}

#[test]
fn torus_and_free_circle_localize() {
    for name in ["torus_involution.scn", "torus_involution_flip.scn", "free_circle.scn"] {
        let dir = tempfile::tempdir().unwrap();
        let o = run(&["localize", "--scenario", scenario(name).to_str().unwrap()], dir.path(), None);
        assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
        let v = json(&dir.path().join("localize.json"));
        assert_eq!(v["pass"], true);
        for e in v["report"]["localization"]["entries"].as_array().unwrap() {
            assert!(e["gap_min_t"].as_f64().unwrap() <= v["report"]["localization"]["tolerance"].as_f64().unwrap());
        }
    }
}

#[test]
fn thread_count_does_not_change_reports() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let s = scenario("compact_z2.scn");
    assert!(run(&["jlo", "--scenario", s.to_str().unwrap()], a.path(), Some("1")).status.success());
    assert!(run(&["jlo", "--scenario", s.to_str().unwrap()], b.path(), Some("4")).status.success());
    for f in ["jlo.json", "jlo.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap());
    }
}

fn torus_variant(dir: &Path, edit: impl Fn(&str) -> String) -> PathBuf {
    let text = std::fs::read_to_string(scenario("torus_involution.scn")).unwrap();
    let p = dir.join("variant.scn");
    std::fs::write(&p, edit(&text)).unwrap();
    p
}

#[test]
fn wrong_spin_lift_fails_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    // flipping the lift at one fixed point moves the sum by i/2 * 2
    let p = torus_variant(dir.path(), |t| t.replace("fixed.g1@00 = 1; torus:0,0; 0; 1; 1,0; 1; 1", "fixed.g1@00 = 1; torus:0,0; 0; 1; 1,0; 1; -1"));
    let o = run(&["localize", "--scenario", p.to_str().unwrap()], dir.path(), None);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&dir.path().join("localize.json"))["pass"], false);
}

#[test]
fn errors_exit_two_with_scenario_context() {
    let dir = tempfile::tempdir().unwrap();
    let p = torus_variant(dir.path(), |t| t.replace("n_max = 0", "n_max = 1\nk_max = 0"));
    let o = run(&["chern", "--scenario", p.to_str().unwrap()], dir.path(), None);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("torus-involution") && err.contains("k_max >= 1"), "{err}");

    let missing = torus_variant(dir.path(), |t| t.lines().filter(|l| !l.starts_with("fixed.g3@22")).collect::<Vec<_>>().join("\n"));
    let o = run(&["localize", "--scenario", missing.to_str().unwrap()], dir.path(), None);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["index", "--scenario", scenario("free_circle.scn").to_str().unwrap()], dir.path(), None);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["chern"], dir.path(), None);
    assert_eq!(o.status.code(), Some(2));
}
