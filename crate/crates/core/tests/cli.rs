use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_altcong"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn temp(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("altcong-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn gen(name: &str, args: &[&str]) -> PathBuf {
    let path = temp(name, "");
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["-o", path.to_str().unwrap()]);
    let o = run(&full);
    assert!(o.status.success(), "{}", stderr(&o));
    path
}

#[test]
fn ne2_has_no_equilibrium() {
    let f = gen("ne2.game", &["ne2"]);
    let o = run(&["analyze", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("NE: 0\n"), "{out}");
    assert!(out.contains("PoA: undefined"), "{out}");
}

#[test]
fn emitted_file_round_trips() {
    let f = gen("ne2-rt.game", &["ne2"]);
    let text = fs::read_to_string(&f).unwrap();
    let o = run(&["parse", f.to_str().unwrap()]);
    assert!(o.status.success());
    let canonical: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    assert_eq!(stdout(&o), canonical);
    let again = temp("ne2-rt2.game", &stdout(&o));
    assert_eq!(stdout(&run(&["emit", again.to_str().unwrap()])), canonical);
}

#[test]
fn malformed_input_exits_2() {
    let bad = temp("bad.game", "players 2\nresources 1\nlatency 1 1 0\nstrategy 1 1 : 1\nstrategy 2 1 : 4\n");
    let o = run(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 5"), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());

    let spite = temp(
        "spite.game",
        "players 2\nresources 1\nlatency 1 1 0\nstrategy 1 1 : 1\nstrategy 2 1 : 1\ngamma dense\n1 -1/2\n0 1\n",
    );
    let o = run(&["parse", spite.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("spite unsupported"));

    let o = run(&["analyze", "/nonexistent/file.game"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tree_lists_all_up_profile() {
    let f = gen("tree1.game", &["tree", "--h", "1"]);
    let out = stdout(&run(&["nash", f.to_str().unwrap()]));
    assert!(out.contains("(1,1,1,1,1,1,1,1,1) SUM = 81/5"), "{out}");
}

#[test]
fn identity_singleton_game_ratios_are_one() {
    let f = temp(
        "links.game",
        "players 2\nresources 2\nlatency 1 1 0\nlatency 2 1 0\nstrategy 1 1 : 1\nstrategy 1 2 : 2\nstrategy 2 1 : 1\nstrategy 2 2 : 2\n",
    );
    let out = stdout(&run(&["analyze", f.to_str().unwrap()]));
    assert!(out.contains("PoA: 1 "), "{out}");
    assert!(out.contains("PoS: 1 "), "{out}");
}

#[test]
fn dynamics_reports_cycle() {
    let f = gen("ne2-dyn.game", &["ne2"]);
    let out = stdout(&run(&["dynamics", f.to_str().unwrap(), "--start", "1,1,1", "--policy", "first-improver"]));
    assert!(out.contains("cycle of length 6: (2,1,1) -> (2,2,1)"), "{out}");
    let o = run(&["dynamics", f.to_str().unwrap(), "--start", "1,1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn potential_exit_codes() {
    let f = gen("ne2-pot.game", &["ne2"]);
    assert_eq!(run(&["potential", f.to_str().unwrap(), "--kind", "rs-forced"]).status.code(), Some(1));
    assert_eq!(run(&["potential", f.to_str().unwrap(), "--kind", "rs"]).status.code(), Some(2));
    let g = gen("gv.game", &["random", "--seed", "4", "--context", "gammav"]);
    let o = run(&["potential", g.to_str().unwrap(), "--kind", "gammav"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn certify_and_perturb() {
    let o = run(&["certify", "poa173", "--grid", "20", "20"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("(3,1)"));
    let o = run(&["certify", "gammav-poa", "--grid", "10", "10", "--vbar", "3/4", "--vund", "1/2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("theta=6 "), "{}", stdout(&o));
    let o = run(&["certify", "gammav-pos", "--grid", "10", "10", "--v", "1/4", "--perturb", "x=1/100"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn export_lp_counts_rows() {
    let f = gen("ne2-lp.game", &["ne2"]);
    let out = stdout(&run(&["export-lp", f.to_str().unwrap(), "--profiles", "1,1,1", "2,2,2"]));
    assert!(out.starts_with("\\ primal"));
    let rows = out.lines().filter(|l| l.starts_with(" nash") || l.starts_with(" norm")).count();
    assert_eq!(rows, 4);
    let t = gen("tree-lp.game", &["tree", "--h", "1"]);
    let out = stdout(&run(&["export-lp", t.to_str().unwrap(), "--profiles", "1,1,1,1,1,1,1,1,1", "2,2,2,2,2,2,2,2,2", "--dual"]));
    assert_eq!(out.lines().filter(|l| l.starts_with(" r")).count(), 10);
}

#[test]
fn verify_small_grid_and_corruption() {
    let o = run(&["verify-paper", "--grid", "5", "5", "--sweep", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.lines().filter(|l| l.starts_with("PASS")).count() >= 10);
    let again = stdout(&run(&["verify", "--grid", "5", "5", "--sweep", "5", "--jobs", "1"]));
    assert_eq!(out, again, "output must be deterministic");

    let o = run(&["verify-paper", "--grid", "5", "5", "--sweep", "5", "--corrupt-ne2-alpha", "8=1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL ne2-table"));
}
