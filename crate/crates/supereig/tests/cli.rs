use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use supereig::meshio::read_mesh;
use supereig::report::sci3;
use supereig_core::{Domain, Triangulation};

fn supereig(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_supereig")).args(args).output().expect("spawn")
}

fn run_ok(args: &[&str]) {
    let o = supereig(args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn mesh_command_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("eq.txt");
    run_ok(&["mesh", "--domain", "equilateral-triangle", "--level", "3", "--out", p.to_str().unwrap()]);
    let m = read_mesh(std::io::BufReader::new(fs::File::open(&p).unwrap())).unwrap();
    let want = Triangulation::build(Domain::EquilateralTriangle, 3).unwrap();
    assert_eq!(m.vertices(), want.vertices());
    assert_eq!(m.triangles(), want.triangles());
    assert_eq!(m.edges(), want.edges());
}

#[test]
fn csv_and_json_carry_the_same_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let (j, c) = (dir.path().join("j"), dir.path().join("c"));
    let common = ["run", "--example", "1", "--element", "cr,ecr", "--levels", "2..4", "--k", "2", "--post", "all"];
    run_ok(&[&common[..], &["--format", "json", "--out", j.to_str().unwrap()]].concat());
    run_ok(&[&common[..], &["--format", "csv", "--out", c.to_str().unwrap()]].concat());
    let report = json(&j.join("report.json"));
    let mut tables = 0;
    for run in report["runs"].as_array().unwrap() {
        for t in run["tables"].as_array().unwrap() {
            tables += 1;
            let name = format!("{}_lambda{}.csv", t["element"].as_str().unwrap(), t["index"].as_u64().unwrap() + 1);
            let mut rd = csv::Reader::from_path(c.join(name)).unwrap();
            let head = rd.headers().unwrap().clone();
            let rows: Vec<csv::StringRecord> = rd.records().map(Result::unwrap).collect();
            let jrows = t["rows"].as_array().unwrap();
            assert_eq!(rows.len(), jrows.len());
            for (r, jr) in rows.iter().zip(jrows) {
                for col in ["h", "lambda_h", "error", "error_rea", "error_cea", "error_exp"] {
                    let i = head.iter().position(|h| h == col).unwrap();
                    let want = jr[col].as_f64().map_or_else(|| "NA".to_owned(), sci3);
                    assert_eq!(&r[i], want, "{col}");
                }
            }
        }
    }
    assert_eq!(tables, 4);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let outs: Vec<Vec<u8>> = ["a", "b"]
        .iter()
        .map(|s| {
            let d = dir.path().join(s);
            run_ok(&["run", "--example", "3", "--levels", "2..4", "--k", "2", "--post", "all", "--out", d.to_str().unwrap()]);
            fs::read(d.join("report.json")).unwrap()
        })
        .collect();
    assert_eq!(outs[0], outs[1]);
}

#[test]
fn published_cr_errors_for_the_square() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["run", "--example", "1", "--levels", "3..5", "--post", "exp", "--format", "csv", "--out", dir.path().to_str().unwrap()]);
    let s = fs::read_to_string(dir.path().join("cr_lambda1.csv")).unwrap();
    let rows: Vec<Vec<&str>> = s.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[1][5], "-8.47E-02");
    assert_eq!(rows[2][11], "3.72E-05");
    assert_eq!(rows[0][6], "NA");
}

#[test]
fn failures_emit_an_error_object() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for (args, kind) in [
        (vec!["run", "--example", "7", "--levels", "3", "--out", out], "invalid_input"),
        (vec!["run", "--example", "1", "--element", "p1", "--post", "cea", "--levels", "3", "--out", out], "invalid_input"),
        (vec!["run", "--example", "1", "--levels", "3", "--k", "0", "--out", out], "usage"),
        (vec!["run", "--levels", "3", "--out", out], "usage"),
        (vec!["run", "--domain", "unit-square", "--neumann", "9", "--levels", "3", "--out", out], "configuration"),
        (vec!["mesh", "--domain", "circle", "--out", out], "usage"),
    ] {
        let o = supereig(&args);
        assert!(!o.status.success(), "{args:?}");
        let v: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap_or_else(|_| panic!("{args:?}"));
        assert_eq!(v["error"]["kind"], kind, "{args:?}");
        assert!(!v["error"]["message"].as_str().unwrap().is_empty());
    }
}

#[test]
fn oversized_levels_are_truncated() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["run", "--example", "1", "--levels", "10..11", "--out", dir.path().to_str().unwrap()]);
    let v = json(&dir.path().join("report.json"));
    assert_eq!(v["runs"][0]["truncated_at"], 10);
    assert!(v["runs"][0]["levels"].as_array().unwrap().is_empty());
    assert_eq!(v["references"][0]["exact"], true);
}

#[test]
fn l_shape_uses_computed_references() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["run", "--example", "4", "--levels", "2..3", "--k", "3", "--out", dir.path().to_str().unwrap()]);
    let v = json(&dir.path().join("report.json"));
    let refs = v["references"].as_array().unwrap();
    assert_eq!(refs[0]["exact"], false);
    assert_eq!(refs[2]["exact"], true);
    let pi2 = std::f64::consts::PI.powi(2);
    assert!((refs[2]["value"].as_f64().unwrap() - 2.0 * pi2).abs() < 1e-12);
    assert_eq!(v["runs"][0]["levels"][0]["mesh"], "T1");
}

#[test]
fn fields_and_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    run_ok(&["run", "--example", "2", "--levels", "2..3", "--fields", "--export-matrices", "--out", d.to_str().unwrap()]);
    let v = json(&d.join("report.json"));
    let mesh = Triangulation::build(Domain::UnitSquare, 3).unwrap();
    let f = &v["runs"][0]["levels"][1]["fields"][0];
    assert_eq!(f["kind"], "cr");
    assert_eq!(f["values"].as_array().unwrap().len(), mesh.n_edges());
    assert_eq!(f["recovered"].as_array().unwrap().len(), mesh.n_edges());
    let a = fs::read_to_string(d.join("cr_level3_stiffness.coo")).unwrap();
    let entries: Vec<(usize, usize, f64)> = a
        .lines()
        .map(|l| {
            let p: Vec<&str> = l.split(' ').collect();
            (p[0].parse().unwrap(), p[1].parse().unwrap(), p[2].parse().unwrap())
        })
        .collect();
    let n = v["runs"][0]["levels"][1]["n_dofs"].as_u64().unwrap() as usize;
    assert!(entries.iter().all(|e| e.0 < n && e.1 < n));
    for &(i, j, x) in &entries {
        let t = entries.iter().find(|e| e.0 == j && e.1 == i).unwrap();
        assert!((t.2 - x).abs() <= 1e-14 * x.abs().max(1.0));
    }
    assert!(d.join("cr_level3_mass.coo").exists());
}
