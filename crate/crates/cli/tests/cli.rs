use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cbpkit::families::{make_cbp_q, FamilyParamsQ};
use cbpkit::Field;
use tempfile::TempDir;

fn cbpkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cbpkit"))
        .args(args)
        .env_remove("CBPKIT_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn construct(dir: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let path = dir.join(name);
    let mut args = vec!["construct"];
    args.extend_from_slice(extra);
    args.extend_from_slice(&["--out", path.to_str().unwrap()]);
    let o = cbpkit(&args);
    assert!(o.status.success(), "construct failed: {}", stderr(&o));
    path
}

fn gf11(dir: &Path, name: &str, eps: &str) -> PathBuf {
    construct(
        dir,
        name,
        &["q", "--prime", "11", "--d", "4", "--q", "3", "--eps", eps],
    )
}

fn matrix_block(text: &str, name: &str) -> Vec<String> {
    let header = format!("matrix {name}");
    text.lines()
        .skip_while(|l| *l != header)
        .skip(1)
        .take_while(|l| !l.starts_with("matrix "))
        .map(str::to_string)
        .collect()
}

#[test]
fn construct_writes_the_family_pair() {
    let dir = TempDir::new().unwrap();
    let text = fs::read_to_string(gf11(dir.path(), "a.txt", "2")).unwrap();
    let f = Field::prime(11).unwrap();
    let pair = make_cbp_q(&FamilyParamsQ::new(4, f.from_i64(3), f.from_i64(2)).unwrap());
    let render = |m: &cbpkit::exactla::Matrix| -> Vec<String> {
        m.rows()
            .iter()
            .map(|r| {
                r.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect()
    };
    assert!(text.starts_with("cbpkit.pair/1\nfield prime 11\nd 4\n"));
    assert_eq!(matrix_block(&text, "A"), render(&pair.a));
    assert_eq!(matrix_block(&text, "Astar"), render(&pair.astar));
}

#[test]
fn cyclotomic_eps_zero_gives_the_shift_pair() {
    let o = cbpkit(&[
        "construct",
        "q",
        "--cyclotomic",
        "5",
        "--d",
        "4",
        "--eps",
        "0",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let a = matrix_block(&text, "A");
    for (i, row) in a.iter().enumerate() {
        let toks: Vec<&str> = row.split(' ').collect();
        for (j, t) in toks.iter().enumerate() {
            let one = (i + 4) % 5 == j;
            assert_eq!(
                *t,
                if one { "(1,0,0,0)" } else { "(0,0,0,0)" },
                "A[{i}][{j}]"
            );
        }
    }
    let diag: Vec<String> = matrix_block(&text, "Astar")
        .iter()
        .enumerate()
        .map(|(i, r)| r.split(' ').nth(i).unwrap().to_string())
        .collect();
    assert_eq!(
        diag,
        [
            "(1,0,0,0)",
            "(0,1,0,0)",
            "(0,0,1,0)",
            "(0,0,0,1)",
            "(-1,-1,-1,-1)"
        ]
    );
}

#[test]
fn gamma_in_prime_field_is_rejected() {
    let o = cbpkit(&["construct", "p", "--prime", "5", "--d", "4", "--gamma", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("not among 0,1,2,…,d"), "{}", stderr(&o));
}

#[test]
fn classify_round_trip_and_json_is_stable() {
    let dir = TempDir::new().unwrap();
    let a = gf11(dir.path(), "a.txt", "2");
    let o = cbpkit(&["classify", a.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("canonical form: q family, d = 4, q = 3, eps = 2\n"));
    let j1 = cbpkit(&["classify", "--json", a.to_str().unwrap()]);
    let j2 = cbpkit(&["classify", "--json", a.to_str().unwrap()]);
    assert_eq!(j1.stdout, j2.stdout);
    let v: serde_json::Value = serde_json::from_slice(&j1.stdout).unwrap();
    assert_eq!(v["schema"], "cbpkit.classify/1");
    assert_eq!(v["form"]["case"], "q");
    assert_eq!(v["form"]["param"], 2);
}

#[test]
fn perturbed_pair_exits_two() {
    let dir = TempDir::new().unwrap();
    let a = gf11(dir.path(), "a.txt", "2");
    let text = fs::read_to_string(&a).unwrap();
    assert!(text.contains("\n4 8 0 0 0\n"));
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, text.replace("\n4 8 0 0 0\n", "\n4 9 0 0 0\n")).unwrap();
    let o = cbpkit(&["classify", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("profile system inconsistent"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn one_by_one_pair_is_trivial() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("one.txt");
    fs::write(
        &p,
        "cbpkit.pair/1\nfield prime 7\nd 0\nmatrix A\n3\nmatrix Astar\n5\n",
    )
    .unwrap();
    let o = cbpkit(&["classify", p.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "canonical form: trivial (d = 0)\n");
}

#[test]
fn equivalence_verdicts() {
    let dir = TempDir::new().unwrap();
    let a = gf11(dir.path(), "a.json", "2");
    // q·ε = 6
    let b = gf11(dir.path(), "b.txt", "6");
    let (a, b) = (a.to_str().unwrap(), b.to_str().unwrap());

    let same = cbpkit(&["equiv", a, a]);
    assert!(same.status.success());
    let out = stdout(&same);
    assert!(out.starts_with("equivalent (iso)\nsigma:\n"));
    assert!(out.contains("  1 0 0 0 0\n  0 1 0 0 0\n"));

    assert_eq!(
        cbpkit(&["equiv", a, b, "--mode", "iso"]).status.code(),
        Some(3)
    );
    let aff = cbpkit(&["equiv", a, b, "--mode", "affine", "--json"]);
    assert!(aff.status.success());
    let v: serde_json::Value = serde_json::from_slice(&aff.stdout).unwrap();
    assert_eq!(v["equivalent"], true);
    assert!(v["sigma"].is_array() && v["affine"].is_object());

    let c = construct(
        dir.path(),
        "c.txt",
        &["q", "--prime", "31", "--d", "4", "--eps", "3"],
    );
    let o = cbpkit(&["equiv", a, c.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("field mismatch"));
}

#[test]
fn dual_twice_restores_the_matrices() {
    let dir = TempDir::new().unwrap();
    let a = gf11(dir.path(), "a.txt", "2");
    let d1 = dir.path().join("d1.txt");
    let d2 = dir.path().join("d2.txt");
    assert!(
        cbpkit(&["dual", a.to_str().unwrap(), "--out", d1.to_str().unwrap()])
            .status
            .success()
    );
    assert!(
        cbpkit(&["dual", d1.to_str().unwrap(), "--out", d2.to_str().unwrap()])
            .status
            .success()
    );
    let (t0, t1, t2) = (
        fs::read_to_string(&a).unwrap(),
        fs::read_to_string(&d1).unwrap(),
        fs::read_to_string(&d2).unwrap(),
    );
    assert_eq!(matrix_block(&t1, "A"), matrix_block(&t0, "Astar"));
    assert_eq!(matrix_block(&t2, "A"), matrix_block(&t0, "A"));
    assert_eq!(matrix_block(&t2, "Astar"), matrix_block(&t0, "Astar"));
}

#[test]
fn extra_matrices_and_json_output() {
    let dir = TempDir::new().unwrap();
    let g = construct(
        dir.path(),
        "g.json",
        &[
            "p",
            "--extension",
            "5",
            "--d",
            "4",
            "--gamma",
            "(0,1)",
            "--with-transition",
            "--with-raising",
        ],
    );
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&g).unwrap()).unwrap();
    assert_eq!(v["schema"], "cbpkit.pair/1");
    assert_eq!(v["field"]["kind"], "extension");
    assert_eq!(v["extra"]["P"].as_array().unwrap().len(), 5);
    assert_eq!(v["extra"]["R"].as_array().unwrap().len(), 5);
    let o = cbpkit(&["classify", g.to_str().unwrap()]);
    assert!(stdout(&o).starts_with("canonical form: p family, d = 4, gamma = (0,1)\n"));
}

#[test]
fn hessenberg_export() {
    let dir = TempDir::new().unwrap();
    let a = gf11(dir.path(), "a.txt", "2");
    let o = cbpkit(&["export-hessenberg", a.to_str().unwrap()]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.lines().any(|l| l == "theta_0 = 1"));
    assert!(out.lines().any(|l| l.starts_with("phi_4 = ")));
    assert!(out.lines().any(|l| l.starts_with("xi_star = ")));

    let small = construct(
        dir.path(),
        "s.txt",
        &["q", "--prime", "11", "--d", "1", "--eps", "3"],
    );
    assert_eq!(
        cbpkit(&["export-hessenberg", small.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn selftest_filter_and_seed() {
    let o = cbpkit(&["selftest", "--only", "qvandermonde"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 1);
    assert!(out.starts_with("qvandermonde  PASS"));

    let seeded = Command::new(env!("CARGO_BIN_EXE_cbpkit"))
        .args(["selftest", "--only", "oracle,vandermonde", "--d-max", "4"])
        .env("CBPKIT_SEED", "7")
        .output()
        .unwrap();
    assert!(seeded.status.success());
    assert_eq!(stdout(&seeded).lines().count(), 2);

    assert_eq!(
        cbpkit(&["selftest", "--only", "nonsense"]).status.code(),
        Some(1)
    );
}

#[test]
fn unreadable_input_exits_one() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("junk.txt");
    fs::write(&p, "hello\n").unwrap();
    assert_eq!(
        cbpkit(&["classify", p.to_str().unwrap()]).status.code(),
        Some(1)
    );
    assert_eq!(
        cbpkit(&["classify", "/nonexistent/file"]).status.code(),
        Some(1)
    );
}
