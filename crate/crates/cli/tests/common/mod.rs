#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use pddlforge_cli::service::Service;
use tempfile::TempDir;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn copy_dir(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for e in fs::read_dir(from).unwrap() {
        let e = e.unwrap();
        let target = to.join(e.file_name());
        if e.file_type().unwrap().is_dir() {
            copy_dir(&e.path(), &target);
        } else {
            fs::copy(e.path(), target).unwrap();
        }
    }
}

/// A scratch copy of a fixture project's inputs (no domain yet).
pub fn project_copy(name: &str) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let src = fixtures().join(name);
    fs::copy(src.join("project.cfg"), dir.path().join("project.cfg")).unwrap();
    for sub in ["cassettes", "problems"] {
        copy_dir(&src.join(sub), &dir.path().join(sub));
    }
    dir
}

/// A scratch copy with the domain constructed from the committed cassette.
pub fn constructed(name: &str) -> TempDir {
    let dir = project_copy(name);
    Service::new(dir.path()).construct(false).unwrap();
    dir
}

/// Drops timing fields, which differ between otherwise identical runs.
pub fn without_timings(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(m) => {
            m.remove("wall_ms");
            m.remove("wallMs");
            m.values_mut().for_each(without_timings);
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(without_timings),
        _ => {}
    }
}
