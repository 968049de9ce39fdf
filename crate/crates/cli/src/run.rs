//! Benchmark execution: build, setup, accelerated solve, reports.

use crate::manifest::RunManifest;
use airamg::hierarchy::{setup, HierarchySummary};
use airamg::krylov::solve;
use airamg::problems::block_diag_prescale;
use airamg::rng::Lcg64;
use airamg::{AmgError, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Wall-clock figures; excluded from determinism comparisons.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Timing {
    pub setup_seconds: f64,
    pub solve_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub manifest_hash: String,
    pub kind: String,
    pub n: usize,
    pub iterations: usize,
    /// "converged" or "DNC" (did not converge within max_iters).
    pub status: String,
    pub gamma: f64,
    pub operator_complexity: f64,
    pub grid_complexity: f64,
    pub work_per_digit: f64,
    pub hierarchy: HierarchySummary,
    pub residual_history: Vec<f64>,
    pub seed: u64,
}

impl BenchmarkReport {
    pub fn converged(&self) -> bool {
        self.status == "converged"
    }
}

/// Builds the problem, prescales when configured, runs the accelerated solve
/// with a zero right-hand side and the seeded random initial guess, and
/// writes the JSON report plus the residual-history CSV when paths are set.
pub fn run_benchmark(manifest: &RunManifest) -> Result<(BenchmarkReport, Timing)> {
    let a0 = manifest.problem.build()?;
    let t0 = std::time::Instant::now();
    let h = setup(&a0, &manifest.solver)?;
    let setup_seconds = t0.elapsed().as_secs_f64();
    let a = match manifest.solver.prescale_block {
        Some(bs) => block_diag_prescale(&a0, bs)?,
        None => a0,
    };
    let n = a.n_rows();
    let x0 = Lcg64::new(manifest.seed).vector(n);
    let b = vec![0.0; n];
    let t1 = std::time::Instant::now();
    let (_, mut rep) = solve(&a, &b, &x0, &h, &manifest.krylov)?;
    let solve_seconds = t1.elapsed().as_secs_f64();
    rep.set_complexity(h.operator_complexity());

    let report = BenchmarkReport {
        manifest_hash: manifest.hash(),
        kind: format!("{:?}", manifest.problem.kind),
        n,
        iterations: rep.iterations,
        status: if rep.converged {
            "converged".into()
        } else {
            "DNC".into()
        },
        gamma: rep.gamma,
        operator_complexity: rep.oc,
        grid_complexity: h.grid_complexity(),
        work_per_digit: rep.work_per_digit,
        hierarchy: h.summary(),
        residual_history: rep.residual_history,
        seed: manifest.seed,
    };
    let timing = Timing {
        setup_seconds,
        solve_seconds,
    };

    if let Some(path) = &manifest.output.report_json {
        let mut doc = serde_json::to_value(&report).map_err(|e| AmgError::Parse(e.to_string()))?;
        doc["timing"] =
            serde_json::to_value(&timing).map_err(|e| AmgError::Parse(e.to_string()))?;
        std::fs::write(
            path,
            format!("{}\n", serde_json::to_string_pretty(&doc).unwrap()),
        )?;
    }
    if let Some(path) = &manifest.output.residuals_csv {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "iteration,residual")?;
        for (i, r) in report.residual_history.iter().enumerate() {
            writeln!(f, "{i},{r:.16e}")?;
        }
        f.flush()?;
    }
    Ok((report, timing))
}

/// Parameter axis of a sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum SweepAxis {
    GridSize(Vec<usize>),
    Alpha(Vec<f64>),
}

impl SweepAxis {
    fn label(&self) -> &'static str {
        match self {
            SweepAxis::GridSize(_) => "grid",
            SweepAxis::Alpha(_) => "alpha",
        }
    }

    fn len(&self) -> usize {
        match self {
            SweepAxis::GridSize(v) => v.len(),
            SweepAxis::Alpha(v) => v.len(),
        }
    }

    fn apply(&self, idx: usize, manifest: &mut RunManifest) -> String {
        match self {
            SweepAxis::GridSize(v) => {
                let g = v[idx];
                manifest.problem.nx = g;
                manifest.problem.ny = g;
                manifest.problem.nz = g;
                g.to_string()
            }
            SweepAxis::Alpha(v) => {
                manifest.problem.alpha = v[idx];
                format!("{}", v[idx])
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: String,
    pub value: String,
    pub method: String,
    pub n: usize,
    pub iterations: usize,
    pub status: String,
    pub gamma: f64,
    pub operator_complexity: f64,
    pub work_per_digit: f64,
    pub manifest_hash: String,
}

/// Cartesian sweep over the axis values; each point reruns the manifest with
/// the axis value substituted. Individual failures are recorded as rows with
/// an error status and the sweep continues. Points run in parallel, capped
/// by the AIRAMG_THREADS environment variable.
pub fn run_sweep(template: &RunManifest, axis: &SweepAxis) -> Result<Vec<SweepRow>> {
    if axis.len() == 0 {
        return Err(AmgError::InvalidConfig("sweep axis is empty".into()));
    }
    let points: Vec<RunManifest> = (0..axis.len())
        .map(|i| {
            let mut m = template.clone();
            m.output = Default::default(); // per-point artifacts not written
            axis.apply(i, &mut m);
            m
        })
        .collect();

    let threads = std::env::var("AIRAMG_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&t| t >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|p| p.get())
                .unwrap_or(1)
        })
        .min(points.len());

    let mut results: Vec<Option<std::result::Result<BenchmarkReport, String>>> =
        vec![None; points.len()];
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots: Vec<std::sync::Mutex<Option<std::result::Result<BenchmarkReport, String>>>> = (0
        ..points.len())
        .map(|_| std::sync::Mutex::new(None))
        .collect();
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= points.len() {
                    break;
                }
                let outcome = run_benchmark(&points[i])
                    .map(|(rep, _)| rep)
                    .map_err(|e| e.to_string());
                *slots[i].lock().unwrap() = Some(outcome);
            });
        }
    });
    for (r, s) in results.iter_mut().zip(&slots) {
        *r = s.lock().unwrap().take();
    }

    let method = format!("{:?}", template.solver.method);
    let mut rows = Vec::with_capacity(points.len());
    for (i, outcome) in results.into_iter().enumerate() {
        let mut probe = template.clone();
        let value = axis.apply(i, &mut probe);
        let row = match outcome.expect("sweep point executed") {
            Ok(rep) => SweepRow {
                axis: axis.label().into(),
                value,
                method: method.clone(),
                n: rep.n,
                iterations: rep.iterations,
                status: rep.status.clone(),
                gamma: rep.gamma,
                operator_complexity: rep.operator_complexity,
                work_per_digit: rep.work_per_digit,
                manifest_hash: rep.manifest_hash,
            },
            Err(msg) => SweepRow {
                axis: axis.label().into(),
                value,
                method: method.clone(),
                n: 0,
                iterations: 0,
                status: format!("error: {msg}"),
                gamma: f64::NAN,
                operator_complexity: f64::NAN,
                work_per_digit: f64::NAN,
                manifest_hash: points[i].hash(),
            },
        };
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_sweep_csv(rows: &[SweepRow], path: &std::path::Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        f,
        "axis,value,method,n,iterations,status,gamma,operator_complexity,work_per_digit,manifest_hash"
    )?;
    for r in rows {
        writeln!(
            f,
            "{},{},{},{},{},{},{:.6e},{:.6},{:.6},{}",
            r.axis,
            r.value,
            r.method,
            r.n,
            r.iterations,
            r.status,
            r.gamma,
            r.operator_complexity,
            r.work_per_digit,
            r.manifest_hash
        )?;
    }
    f.flush()?;
    Ok(())
}
