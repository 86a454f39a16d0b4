// SPDX-License-Identifier: Apache-2.0

//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any
//! criterion fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, ExitCode};

use geofcs::cumulants::Numerics;
use geofcs::verify::{self, Outcome};

fn read_tree(dir: &Path) -> std::io::Result<BTreeMap<String, Vec<u8>>> {
    let mut files = BTreeMap::new();
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        files.insert(
            entry.file_name().to_string_lossy().into_owned(),
            std::fs::read(entry.path())?,
        );
    }
    Ok(files)
}

/// `preset fig2` twice through the binary, compared byte for byte.
fn reproducibility() -> Outcome {
    let fail = |detail: String| Outcome {
        id: 11,
        name: "reproducibility",
        passed: false,
        detail,
    };
    let Ok(root) = tempfile::tempdir() else {
        return fail("cannot create scratch directory".into());
    };
    let mut trees = Vec::new();
    for run in ["first", "second"] {
        let out = root.path().join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_geofcs"))
            .args(["--out", &out.to_string_lossy(), "preset", "fig2"])
            .output();
        match status {
            Ok(o) if o.status.success() => {}
            Ok(o) => return fail(format!("{run} run exited with {}", o.status)),
            Err(e) => return fail(format!("{run} run did not start: {e}")),
        }
        match read_tree(&out) {
            Ok(t) => trees.push(t),
            Err(e) => return fail(format!("cannot read {run} output: {e}")),
        }
    }
    let passed = !trees[0].is_empty() && trees[0] == trees[1];
    Outcome {
        id: 11,
        name: "reproducibility",
        passed,
        detail: format!("{} files, identical: {}", trees[0].len(), trees[0] == trees[1]),
    }
}

fn main() -> ExitCode {
    let n = Numerics::default();
    let checks: Vec<Box<dyn Fn() -> Outcome>> = vec![
        Box::new(verify::zero_eigenvalue),
        Box::new(|| verify::route_agreement(&n)),
        Box::new(|| verify::oracle_agreement(&n)),
        Box::new(|| verify::exchange_symmetries(&n)),
        Box::new(|| verify::diagonal_zero(&n)),
        Box::new(|| verify::geometricity_decay(&n)),
        Box::new(|| verify::gc_recovery(&n)),
        Box::new(|| verify::tur_suite(&n)),
        Box::new(|| verify::degenerate_drive(&n)),
        Box::new(verify::low_temperature_scaling),
        Box::new(reproducibility),
    ];
    let mut failed = 0;
    for check in &checks {
        let outcome = check();
        println!("{outcome}");
        if !outcome.passed {
            failed += 1;
        }
    }
    println!("{} passed, {failed} failed", checks.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
