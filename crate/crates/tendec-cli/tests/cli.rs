//! End-to-end tests driving the binary: exit codes, file round trips, and
//! the subcommand contracts.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tendec"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn write(dir: &TempDir, name: &str, contents: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, contents).unwrap();
    path
}

const DIAGONAL: &str = "tensor v1\nfield 2 1\ndims 2 2 2\n1 0\n0 0\n0 0\n0 1\n";

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn decompose_finds_and_verifies() {
    let dir = TempDir::new().unwrap();
    let tensor = write(&dir, "diag.tensor", DIAGONAL);
    let out_path = dir.path().join("diag.decomp");

    let out = run(&[
        "decompose",
        "--rank",
        "2",
        "--in",
        path_str(&tensor),
        "--out",
        path_str(&out_path),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&out_path).unwrap();
    assert!(text.starts_with("decomposition v1\nfield 2 1\nrank 2\ndims 2 2 2\n"));

    let verify = run(&["verify", "--in", path_str(&tensor), "--decomp", path_str(&out_path)]);
    assert_eq!(code(&verify), 0);
    assert_eq!(String::from_utf8_lossy(&verify.stdout).trim(), "ok");
}

#[test]
fn decompose_proves_absence() {
    let dir = TempDir::new().unwrap();
    let tensor = write(&dir, "diag.tensor", DIAGONAL);
    let out = run(&["decompose", "--rank", "1", "--in", path_str(&tensor)]);
    assert_eq!(code(&out), 1);
}

#[test]
fn decompose_input_errors() {
    let dir = TempDir::new().unwrap();

    let bad = write(&dir, "bad.tensor", "tensor v9\nfield 2 1\ndims 1 1 1\n0\n");
    let out = run(&["decompose", "--rank", "2", "--in", path_str(&bad)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));

    let wild = write(&dir, "wild.tensor", "tensor v1\nfield 2 1\ndims 1 1 2\n1 *\n");
    let out = run(&["decompose", "--rank", "2", "--in", path_str(&wild)]);
    assert_eq!(code(&out), 2);

    let missing = dir.path().join("nope.tensor");
    let out = run(&["decompose", "--rank", "2", "--in", path_str(&missing)]);
    assert_eq!(code(&out), 2);

    let tensor = write(&dir, "diag.tensor", DIAGONAL);
    let out = run(&["decompose", "--rank", "5", "--in", path_str(&tensor)]);
    assert_eq!(code(&out), 2);
}

#[test]
fn decompose_budget_exhaustion() {
    let dir = TempDir::new().unwrap();
    let tensor = write(&dir, "diag.tensor", DIAGONAL);
    let out = run(&[
        "decompose",
        "--rank",
        "2",
        "--in",
        path_str(&tensor),
        "--budget",
        "1",
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn verify_detects_mismatch() {
    let dir = TempDir::new().unwrap();
    let tensor = write(&dir, "diag.tensor", DIAGONAL);
    let zero = write(
        &dir,
        "zero.decomp",
        "decomposition v1\nfield 2 1\nrank 2\ndims 2 2 2\n0 0\n0 0\n0 0\n0 0\n0 0\n0 0\n",
    );
    let out = run(&["verify", "--in", path_str(&tensor), "--decomp", path_str(&zero)]);
    assert_eq!(code(&out), 1);

    // Wildcard cells are skipped: an all-wild tensor matches anything.
    let wild = write(&dir, "wild.tensor", "tensor v1\nfield 2 1\ndims 2 2 2\n* *\n* *\n* *\n* *\n");
    let out = run(&["verify", "--in", path_str(&wild), "--decomp", path_str(&zero)]);
    assert_eq!(code(&out), 0);

    let other_dims = write(
        &dir,
        "odd.decomp",
        "decomposition v1\nfield 2 1\nrank 1\ndims 1 1 1\n1\n1\n1\n",
    );
    let out = run(&["verify", "--in", path_str(&tensor), "--decomp", path_str(&other_dims)]);
    assert_eq!(code(&out), 2);
}

#[test]
fn rank1w_tensor_modes() {
    let dir = TempDir::new().unwrap();
    let solvable = write(
        &dir,
        "one.tensor",
        "tensor v1\nfield 3 1\ndims 2 2 2\n2 *\n* *\n* *\n* *\n",
    );
    let out_path = dir.path().join("one.decomp");
    let out = run(&[
        "rank1w",
        "--in",
        path_str(&solvable),
        "--out",
        path_str(&out_path),
    ]);
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("a = "));
    // The emitted rank-1 decomposition verifies against the tensor.
    let verify = run(&["verify", "--in", path_str(&solvable), "--decomp", path_str(&out_path)]);
    assert_eq!(code(&verify), 0);

    let unsat = write(
        &dir,
        "unsat.tensor",
        "tensor v1\nfield 2 1\ndims 2 2 2\n1 *\n* 0\n* *\n* 1\n",
    );
    let out = run(&["rank1w", "--in", path_str(&unsat)]);
    assert_eq!(code(&out), 1);
}

#[test]
fn rank1w_matrix_mode() {
    let dir = TempDir::new().unwrap();
    let mat = write(&dir, "m.matrix", "matrix v1\nfield 2 1\ndims 2 2\n1 *\n* 1\n");
    let out = run(&["rank1w", "--matrix", "--in", path_str(&mat)]);
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.trim(), "a = 1 1\nb = 1 1");

    let rank2 = write(&dir, "r2.matrix", "matrix v1\nfield 2 1\ndims 2 2\n1 1\n1 0\n");
    let out = run(&["rank1w", "--matrix", "--in", path_str(&rank2)]);
    assert_eq!(code(&out), 1);
}

#[test]
fn reduce_nae_gadget() {
    let dir = TempDir::new().unwrap();
    let cnf = write(&dir, "one.cnf", "c single clause\np nae 3 1\n1 2 3 0\n");
    let out_path = dir.path().join("gadget.tensor");
    let out = run(&["reduce-nae", "--in", path_str(&cnf), "--out", path_str(&out_path)]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(&out_path).unwrap();
    assert!(text.starts_with("tensor v1\nfield 2 1\ndims 6 6 6\n"));
    let fixed = text
        .lines()
        .skip(3)
        .flat_map(|l| l.split_whitespace())
        .filter(|t| *t != "*")
        .count();
    assert_eq!(fixed, 25);

    let unsat = write(&dir, "unsat.cnf", "p nae 1 1\n1 1 1 0\n");
    let out = run(&["reduce-nae", "--in", path_str(&unsat), "--out", path_str(&out_path)]);
    assert_eq!(code(&out), 1);

    let bad = write(&dir, "bad.cnf", "p nae 1 1\n1 2 1 0\n");
    let out = run(&["reduce-nae", "--in", path_str(&bad), "--out", path_str(&out_path)]);
    assert_eq!(code(&out), 2);
}

#[test]
fn oracle_subcommands() {
    let dir = TempDir::new().unwrap();
    let tensor = write(&dir, "diag.tensor", DIAGONAL);

    let out = run(&["oracle", "decompose", "--rank", "2", "--in", path_str(&tensor)]);
    assert_eq!(code(&out), 0);
    let out = run(&["oracle", "decompose", "--rank", "1", "--in", path_str(&tensor)]);
    assert_eq!(code(&out), 1);
    let out = run(&[
        "oracle", "decompose", "--rank", "2", "--in", path_str(&tensor), "--budget", "3",
    ]);
    assert_eq!(code(&out), 3);

    let out = run(&["oracle", "rank2-enum", "--in", path_str(&tensor)]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "solutions: 2");

    let wild = write(&dir, "w.tensor", "tensor v1\nfield 2 1\ndims 2 2 2\n1 *\n* *\n* *\n* 1\n");
    let out = run(&["oracle", "rank1w", "--in", path_str(&wild)]);
    assert_eq!(code(&out), 0);
}

#[test]
fn reduce_then_enumerate_matches_satisfiability() {
    // x != y and x != !y is unsatisfiable; the emitted gadget must have no
    // rank-2 completion. A single not-all-equal clause is satisfiable and
    // its gadget must have one.
    let dir = TempDir::new().unwrap();
    let gadget = dir.path().join("g.tensor");

    let unsat = write(&dir, "u.cnf", "p nae 2 2\n1 1 2 0\n1 1 -2 0\n");
    assert_eq!(code(&run(&["reduce-nae", "--in", path_str(&unsat), "--out", path_str(&gadget)])), 0);
    let out = run(&["oracle", "rank2-enum", "--in", path_str(&gadget)]);
    assert_eq!(code(&out), 1);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "solutions: 0");

    let sat = write(&dir, "s.cnf", "p nae 2 1\n1 1 2 0\n");
    assert_eq!(code(&run(&["reduce-nae", "--in", path_str(&sat), "--out", path_str(&gadget)])), 0);
    let out = run(&["oracle", "rank2-enum", "--in", path_str(&gadget)]);
    assert_eq!(code(&out), 0);
}
