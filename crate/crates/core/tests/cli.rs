use std::process::{Command, Output};

fn celab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_celab"))
        .args(args)
        .env_remove("CELAB_BUDGET")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn enumerate_a_script() {
    let o = celab(&["enumerate", "--term", "(script (0 (5)))", "--stage", "3"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "{5}\n");
}

#[test]
fn verify_e1_to_e0_seed_7() {
    let o = celab(&["verify", "--reduction", "e1_to_e0", "--seed", "7", "--size", "25", "--budget", "2000"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn exit_codes() {
    let mutant = celab(&["verify", "--reduction", "eqce_to_e0", "--size", "10", "--mutant"]);
    assert_eq!(mutant.status.code(), Some(2));
    let starved = celab(&["verify", "--reduction", "eqce_to_e0", "--size", "4", "--budget", "3"]);
    assert_eq!(starved.status.code(), Some(3));
    for bad in [
        &["enumerate", "--term", "(script (0 5))"][..],
        &["verify", "--reduction", "nope"],
        &["reduce", "--reduction", "min_n", "--term", "(script)"],
        &["corpus", "--relation", "no_such_relation"],
        &["frobnicate"],
    ] {
        assert_eq!(celab(bad).status.code(), Some(4), "{bad:?}");
    }
}

#[test]
fn budget_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_celab"))
        .args(["verify", "--reduction", "eqce_to_e0", "--size", "4"])
        .env("CELAB_BUDGET", "3")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn reports_are_byte_identical() {
    let args = ["verify", "--reduction", "e0_to_e1", "--seed", "3", "--size", "12"];
    let a = celab(&args);
    assert_eq!(stdout(&a), stdout(&celab(&args)));
    let seq: Vec<&str> = args.iter().copied().chain(["--sequential"]).collect();
    assert_eq!(stdout(&a), stdout(&celab(&seq)));
}

#[test]
fn hierarchy_matches_goldens() {
    let dot = celab(&["hierarchy", "--format", "dot"]);
    assert_eq!(stdout(&dot), include_str!("golden/hierarchy.dot"));
    let json = celab(&["hierarchy", "--format", "json"]);
    assert_eq!(stdout(&json), include_str!("golden/hierarchy.json"));
}

#[test]
fn corpus_round_trip() {
    let dir = std::env::temp_dir().join(format!("celab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("eq_ce.json");
    let p = path.to_str().unwrap();
    assert!(celab(&["corpus", "--relation", "eq_ce", "--seed", "1", "--size", "10", "--out", p]).status.success());
    let read = celab(&["corpus", "--read", p]);
    assert!(read.status.success());
    assert!(stdout(&read).contains("10 cases over eq_ce"));
    let o = celab(&["verify", "--reduction", "eqce_to_e0", "--corpus", p]);
    assert_eq!(o.status.code(), Some(0));
    std::fs::write(&path, "{\"version\": 1}").unwrap();
    assert_eq!(celab(&["corpus", "--read", p]).status.code(), Some(4));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn reduce_prints_term_and_index() {
    let o = celab(&["reduce", "--reduction", "eqce_to_e0", "--term", "(script (0 (1 2)))"]);
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("(op eqce_to_e0 (args (script (0 (1 2)))))"));
    assert!(lines.next().unwrap().starts_with("index "));
    let pair = celab(&["reduce", "--reduction", "basic_module", "--term", "(script)", "--term", "(script (0 (3)))"]);
    assert_eq!(stdout(&pair).lines().count(), 4);
}
