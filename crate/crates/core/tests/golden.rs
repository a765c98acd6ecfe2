//! Hierarchy output against the checked-in files. `CELAB_BLESS=1`
//! rewrites them.

use std::path::PathBuf;

use celab::relations::hierarchy::hierarchy_graph;

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

pub fn check(name: &str, actual: &str) -> Result<(), String> {
    let path = golden(name);
    if std::env::var_os("CELAB_BLESS").is_some() {
        std::fs::write(&path, actual).map_err(|e| e.to_string())?;
    }
    let want = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if want == actual {
        Ok(())
    } else {
        let line = want.lines().zip(actual.lines()).position(|(a, b)| a != b);
        Err(format!("{name} differs from the golden file (first differing line {line:?})"))
    }
}

#[test]
fn hierarchy_dot() {
    check("hierarchy.dot", &hierarchy_graph().to_dot()).unwrap();
}

#[test]
fn hierarchy_json() {
    check("hierarchy.json", &hierarchy_graph().to_json()).unwrap();
}
