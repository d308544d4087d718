//! The solve / gen / reduce / bench pipelines behind the subcommands.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use umaf::gen::{generate_pair, GenSpec};
use umaf::newick::{parse, serialize};
use umaf::oracle::brute_umaf;
use umaf::reduce::{lift_forest, reduce, Reduced};
use umaf::{PhyloTree, SolverConfig};

use crate::report::{BenchRecord, SolveReport};

#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    pub config: SolverConfig,
    pub reduce: bool,
    pub zero_times: bool,
}

pub fn read_tree(path: &Path) -> Result<PhyloTree> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(text.trim()).with_context(|| format!("parsing {}", path.display()))
}

/// Optionally reduces, solves, lifts back and reports.
pub fn solve_pair(t1: &PhyloTree, t2: &PhyloTree, opts: &SolveOptions) -> Result<SolveReport> {
    let start = Instant::now();
    if !t1.same_taxa(t2) {
        bail!("the two trees are over different taxon sets");
    }
    let mut report = if opts.reduce {
        let r = reduce(t1, t2)?;
        let out = umaf::bnp::solve(&r.t1, &r.t2, &opts.config)?;
        let lifted = lift_forest(t1, t2, &out.forest, &r.t1, &r.trace)?;
        SolveReport::from_solve(t1, &lifted, &out, &opts.config, true, start.elapsed())
    } else {
        let out = umaf::bnp::solve(t1, t2, &opts.config)?;
        SolveReport::from_solve(t1, &out.forest, &out, &opts.config, false, start.elapsed())
    };
    if opts.zero_times {
        report.zero_times();
    }
    Ok(report)
}

pub fn oracle_pair(t1: &PhyloTree, t2: &PhyloTree, zero_times: bool) -> Result<SolveReport> {
    let start = Instant::now();
    let f = brute_umaf(t1, t2)?;
    let mut report = SolveReport::from_oracle(t1, &f, start.elapsed());
    if zero_times {
        report.zero_times();
    }
    Ok(report)
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn manifest_line(spec: &GenSpec) -> String {
    format!("{} {} {} {}", spec.t, spec.s, spec.k, spec.seed)
}

/// Writes `<prefix>.t1.nwk`, `<prefix>.t2.nwk` and `<prefix>.manifest`.
pub fn write_generated(spec: &GenSpec, prefix: &Path) -> Result<Vec<PathBuf>> {
    let (t1, t2) = generate_pair(spec)?;
    let paths = vec![with_suffix(prefix, ".t1.nwk"), with_suffix(prefix, ".t2.nwk"), with_suffix(prefix, ".manifest")];
    fs::write(&paths[0], serialize(&t1) + "\n")?;
    fs::write(&paths[1], serialize(&t2) + "\n")?;
    fs::write(&paths[2], manifest_line(spec) + "\n")?;
    Ok(paths)
}

/// Writes `<prefix>.t1.nwk`, `<prefix>.t2.nwk` and `<prefix>.trace`.
pub fn write_reduced(r: &Reduced, prefix: &Path) -> Result<Vec<PathBuf>> {
    let paths = vec![with_suffix(prefix, ".t1.nwk"), with_suffix(prefix, ".t2.nwk"), with_suffix(prefix, ".trace")];
    fs::write(&paths[0], serialize(&r.t1) + "\n")?;
    fs::write(&paths[1], serialize(&r.t2) + "\n")?;
    fs::write(&paths[2], r.trace.to_string())?;
    Ok(paths)
}

/// One `t s k seed` quadruple per line; blank lines and `#` comments skipped.
pub fn parse_manifest(text: &str) -> Result<Vec<GenSpec>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 4 {
            bail!("manifest line {}: expected \"t s k seed\", got {line:?}", i + 1);
        }
        let bad = || format!("manifest line {}: bad number in {line:?}", i + 1);
        let spec = GenSpec {
            t: f[0].parse().with_context(bad)?,
            s: f[1].parse().with_context(bad)?,
            k: f[2].parse().with_context(bad)?,
            seed: f[3].parse().with_context(bad)?,
        };
        spec.validate().with_context(bad)?;
        out.push(spec);
    }
    Ok(out)
}

pub fn bench_one(id: usize, spec: &GenSpec, opts: &SolveOptions) -> Result<BenchRecord> {
    let (t1, t2) = generate_pair(spec)?;
    let mut report = solve_pair(&t1, &t2, opts)?;
    report.seed = Some(spec.seed);
    Ok(BenchRecord { id, t: spec.t, s: spec.s, k: spec.k, report })
}

/// Solves every spec on `jobs` worker threads and writes one JSON line per
/// instance in completion order. Returns false if any instance hit the time
/// limit.
pub fn bench(specs: &[GenSpec], opts: &SolveOptions, jobs: usize, out: &mut (dyn Write + Send)) -> Result<bool> {
    let next = AtomicUsize::new(0);
    let sink = Mutex::new((out, true));
    let worker = || -> Result<()> {
        loop {
            let id = next.fetch_add(1, Ordering::SeqCst);
            let Some(spec) = specs.get(id) else { return Ok(()) };
            let rec = bench_one(id, spec, opts).with_context(|| format!("instance {id} ({})", manifest_line(spec)))?;
            let line = serde_json::to_string(&rec)?;
            let mut guard = sink.lock().unwrap();
            writeln!(guard.0, "{line}")?;
            guard.1 &= rec.report.optimal;
        }
    };
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..jobs.max(1)).map(|_| s.spawn(worker)).collect();
        handles.into_iter().try_for_each(|h| h.join().expect("bench worker panicked"))
    })?;
    let (out, all_optimal) = sink.into_inner().unwrap();
    out.flush()?;
    Ok(all_optimal)
}
