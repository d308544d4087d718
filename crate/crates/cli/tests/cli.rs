//! End-to-end runs of the `umaf` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use umaf_cli::{BenchRecord, SolveReport};

fn umaf(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_umaf")).args(args).current_dir(dir).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn report(out: &Output) -> SolveReport {
    assert!(out.status.success() || out.status.code() == Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn identical_trees_give_one_block() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.nwk", "((a,b),((c,d),(e,f)));\n");
    let r = report(&umaf(&["solve", "--tree1", "a.nwk", "--tree2", "a.nwk", "--json"], dir.path()));
    assert_eq!((r.maf_size, r.branch_nodes, r.optimal), (1, 0, true));
    assert_eq!(r.blocks.len(), r.maf_size);
    assert_eq!(r.method, "branch-and-price");
}

#[test]
fn quartet_solve_matches_oracle() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "q1.nwk", "((a,b),(c,d));");
    write(dir.path(), "q2.nwk", "((a,c),(b,d));");
    let s = report(&umaf(&["solve", "--tree1", "q1.nwk", "--tree2", "q2.nwk", "--json"], dir.path()));
    let o = report(&umaf(&["oracle", "--tree1", "q1.nwk", "--tree2", "q2.nwk", "--json"], dir.path()));
    assert_eq!((s.maf_size, o.maf_size), (2, 2));
    assert_eq!(o.method, "brute-force");
    // The text form is the default.
    let text = umaf(&["solve", "--tree1", "q1.nwk", "--tree2", "q2.nwk"], dir.path());
    assert!(String::from_utf8(text.stdout).unwrap().starts_with("uMAF size:      2"));
}

#[test]
fn generated_pair_respects_move_bound_after_reduction() {
    let dir = tempfile::tempdir().unwrap();
    let g = umaf(&["gen", "--taxa", "50", "--skew", "50", "--tbr", "5", "--seed", "1", "--out", "p"], dir.path());
    assert!(g.status.success());
    assert_eq!(fs::read_to_string(dir.path().join("p.manifest")).unwrap(), "50 50 5 1\n");
    let r = report(&umaf(&["solve", "--tree1", "p.t1.nwk", "--tree2", "p.t2.nwk", "--reduce", "--json"], dir.path()));
    assert!(r.reduced && r.optimal);
    assert!(r.maf_size <= 6);
    let mut all: Vec<String> = r.blocks.concat();
    all.sort();
    assert_eq!(all.len(), 50);
    all.dedup();
    assert_eq!(all.len(), 50);
}

#[test]
fn reduce_writes_trees_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.nwk", "((a,b),(c,(d,e)));");
    write(dir.path(), "b.nwk", "((a,b),(d,(c,e)));");
    let out = umaf(&["reduce", "--tree1", "a.nwk", "--tree2", "b.nwk", "--out", "r"], dir.path());
    assert!(out.status.success());
    let trace: umaf::reduce::ReductionTrace = fs::read_to_string(dir.path().join("r.trace")).unwrap().parse().unwrap();
    assert_eq!(trace.len(), 1);
    let t1 = umaf::newick::parse(fs::read_to_string(dir.path().join("r.t1.nwk")).unwrap().trim()).unwrap();
    assert_eq!(t1.num_taxa(), 4);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "q1.nwk", "((a,b),(c,d));");
    write(dir.path(), "x.nwk", "((a,b),(c,e));");
    // Usage errors.
    assert_eq!(umaf(&["solve", "--tree1", "q1.nwk"], dir.path()).status.code(), Some(2));
    assert_eq!(umaf(&["solve", "--tree1", "q1.nwk", "--tree2", "q1.nwk", "--strategy", "best"], dir.path()).status.code(), Some(2));
    assert_eq!(umaf(&["frobnicate"], dir.path()).status.code(), Some(2));
    // I/O, parse and taxon errors.
    assert_eq!(umaf(&["solve", "--tree1", "q1.nwk", "--tree2", "missing.nwk"], dir.path()).status.code(), Some(1));
    write(dir.path(), "bad.nwk", "((a,b),(c,d);");
    assert_eq!(umaf(&["solve", "--tree1", "q1.nwk", "--tree2", "bad.nwk"], dir.path()).status.code(), Some(1));
    let mismatch = umaf(&["solve", "--tree1", "q1.nwk", "--tree2", "x.nwk"], dir.path());
    assert_eq!(mismatch.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&mismatch.stderr).contains("taxon"));
}

#[test]
fn time_limit_exits_three_with_partial_report() {
    let dir = tempfile::tempdir().unwrap();
    umaf(&["gen", "--taxa", "60", "--skew", "50", "--tbr", "15", "--seed", "2", "--out", "h"], dir.path());
    let out = umaf(&["solve", "--tree1", "h.t1.nwk", "--tree2", "h.t2.nwk", "--time-limit", "0.000001", "--json"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let r = report(&out);
    assert!(!r.optimal);
    assert_eq!(r.blocks.iter().map(Vec::len).sum::<usize>(), 60);
}

#[test]
fn bench_writes_one_line_per_instance() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "m.txt", "# t s k seed\n8 50 2 3\n\n12 90 3 4\n10 70 1 5\n");
    for jobs in ["1", "3"] {
        let out = umaf(&["bench", "--manifest", "m.txt", "--out", "b.jsonl", "--jobs", jobs], dir.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let text = fs::read_to_string(dir.path().join("b.jsonl")).unwrap();
        let mut recs: Vec<BenchRecord> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        recs.sort_by_key(|r| r.id);
        assert_eq!(recs.iter().map(|r| (r.id, r.t, r.report.seed)).collect::<Vec<_>>(), [(0, 8, Some(3)), (1, 12, Some(4)), (2, 10, Some(5))]);
        assert!(recs.iter().all(|r| r.report.maf_size <= r.k + 1));
    }
    write(dir.path(), "bad.txt", "8 50 2\n");
    assert_eq!(umaf(&["bench", "--manifest", "bad.txt", "--out", "b.jsonl"], dir.path()).status.code(), Some(1));
}

#[test]
fn seeded_pipeline_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = || {
        umaf(&["gen", "--taxa", "30", "--skew", "70", "--tbr", "6", "--seed", "9", "--out", "d"], dir.path());
        umaf(&["solve", "--tree1", "d.t1.nwk", "--tree2", "d.t2.nwk", "--reduce", "--json", "--zero-times"], dir.path()).stdout
    };
    let a = run();
    assert!(!a.is_empty());
    assert_eq!(a, run());
}
