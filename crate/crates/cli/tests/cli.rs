use std::path::Path;
use std::process::{Command, Output};

fn trilocate(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trilocate"))
        .args(args)
        .env("TRILOCATE_OUT_DIR", out_dir)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_owned).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_owned).collect()).collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn generated_mesh_validates() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("out");
    let base = base.to_str().unwrap();
    let gen = trilocate(&["gen-mesh", "--m", "4", "--csv", base], dir.path());
    assert!(gen.status.success(), "{}", stderr(&gen));
    assert!(dir.path().join("out.node").exists());
    let val = trilocate(&["validate", "--mesh", base], dir.path());
    assert!(val.status.success(), "{}", stderr(&val));
    assert!(String::from_utf8_lossy(&val.stdout).contains("25 nodes, 32 triangles"));

    let gen = trilocate(&["gen-mesh", "--n-points", "60", "--seed", "3", "--out", base], dir.path());
    assert!(gen.status.success(), "{}", stderr(&gen));
    assert!(trilocate(&["validate", "--mesh", base], dir.path()).status.success());
}

#[test]
fn walk_c_on_disconnected_mesh_fails() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("split");
    std::fs::write(
        base.with_extension("node"),
        "6 2 0 0\n1 0 0\n2 1 0\n3 0 1\n4 3 3\n5 4 3\n6 3 4\n",
    )
    .unwrap();
    std::fs::write(base.with_extension("ele"), "2 3 0\n1 1 2 3\n2 4 5 6\n").unwrap();
    let base = base.to_str().unwrap();
    let o = trilocate(&["bench-locate", "--mesh", base, "--locator", "walk-c"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("disconnected"), "{}", stderr(&o));

    let o = trilocate(&["bench-locate", "--mesh", base, "--locator", "walk-b"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn autonomous_field_needs_no_element_changes_after_first_step() {
    let dir = tempfile::tempdir().unwrap();
    let steps = dir.path().join("steps.csv");
    let snaps = dir.path().join("snaps.csv");
    let o = trilocate(
        &[
            "sl-run",
            "--n-points",
            "800",
            "--locator",
            "walk-b",
            "--c1",
            "0",
            "--courant",
            "3",
            "--snapshot-every",
            "2",
            "--snapshots",
            snaps.to_str().unwrap(),
            "--csv",
            steps.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("(after step 1: 0)"));
    let (header, rows) = csv_rows(&steps);
    let changes = column(&header, "element_changes");
    assert!(rows.len() > 3);
    assert!(rows[0][changes].parse::<u64>().unwrap() > 0);
    for r in &rows[1..] {
        assert_eq!(r[changes], "0");
    }
    let (header, rows) = csv_rows(&snaps);
    assert_eq!(header, ["step", "time", "node", "x", "y", "value"]);
    assert_eq!(rows.len() % 804, 0);
}

#[test]
fn benchmark_reports_default_to_out_dir_and_merge() {
    let dir = tempfile::tempdir().unwrap();
    let o = trilocate(
        &["bench-locate", "--n-points", "300", "--locator", "quadtree", "--distance", "0.001"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let locate = dir.path().join("bench-locate.csv");
    let (header, rows) = csv_rows(&locate);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][column(&header, "locator")], "quadtree");
    assert_eq!(rows[0][column(&header, "fallbacks")], "0");

    let o = trilocate(&["bench-storage", "--m", "4,8,16"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let storage = dir.path().join("bench-storage.csv");
    assert_eq!(csv_rows(&storage).1.len(), 3);

    let merged = dir.path().join("all.csv");
    let o = trilocate(
        &[
            "report",
            locate.to_str().unwrap(),
            storage.to_str().unwrap(),
            "--csv",
            merged.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = csv_rows(&merged);
    assert_eq!(rows.len(), 4);
    assert!(header.iter().any(|h| h == "qt_bytes") && header.iter().any(|h| h == "locate_secs_per_step"));
}

#[test]
fn profile_has_a_row_per_locator() {
    let dir = tempfile::tempdir().unwrap();
    let o = trilocate(
        &[
            "bench-profile",
            "--m",
            "20",
            "--locator",
            "walk-a,structured",
            "--reps",
            "1",
            "--t-final",
            "0.3",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, rows) = csv_rows(&dir.path().join("bench-profile.csv"));
    assert_eq!(rows.len(), 2);
}

#[test]
fn configuration_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope");
    let cases: Vec<Vec<&str>> = vec![
        vec!["validate", "--mesh", missing.to_str().unwrap()],
        vec!["bench-locate", "--m", "4", "--bogus"],
        vec!["bench-locate", "--n-points", "50", "--locator", "structured"],
        vec!["bench-locate", "--m", "4", "--locator", "walk-z"],
        vec!["bench-locate", "--m", "4", "--n-points", "9"],
        vec!["bench-locate", "--m", "4", "--courant", "-1"],
        vec!["bench-storage", "--m", "4,8"],
        vec!["gen-mesh", "--m", "4"],
    ];
    for args in cases {
        let o = trilocate(&args, dir.path());
        assert!(!o.status.success(), "{args:?} should fail");
        assert!(!stderr(&o).is_empty(), "{args:?} printed no message");
    }
}
