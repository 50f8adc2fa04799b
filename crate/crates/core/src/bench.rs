//! Random stable systems, certified-zero test cases and the benchmark runner.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::analysis::{bilinear, evalfr, max_singular_value, BilinearMap};
use crate::error::{Error, Result};
use crate::kernels::Tolerance;
use crate::nullrank::{check_nullrank, CheckOptions, Method, MethodResult};
use crate::system::{DescriptorSystem, Timing};

/// Orders used by the default benchmark.
pub const DEFAULT_ORDERS: [usize; 9] = [1, 2, 3, 5, 10, 20, 50, 100, 200];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorSpec {
    pub n: usize,
    pub p: usize,
    pub m: usize,
    pub timing: Timing,
    pub seed: u64,
    /// Upper bound on eigenvalue moduli, in `(0, 1)`.
    pub spectral_margin: f64,
}

impl GeneratorSpec {
    pub fn discrete(n: usize, p: usize, m: usize, seed: u64) -> Self {
        GeneratorSpec { n, p, m, timing: Timing::Discrete, seed, spectral_margin: 0.95 }
    }
}

fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Stable standard system `(A, I, B, C, D)` with `A = Q·H·Qᵀ`.
///
/// `H` is block diagonal with real 1×1 blocks in `(−margin, margin)` and 2×2
/// scaled rotations of modulus in `(0, margin)`; `Q` is a random orthogonal
/// matrix. `B`, `C`, `D` have standard normal entries.
pub fn random_stable_system(spec: &GeneratorSpec) -> DescriptorSystem {
    assert!(spec.spectral_margin > 0.0 && spec.spectral_margin < 1.0, "spectral margin must lie in (0, 1)");
    let (n, margin) = (spec.n, spec.spectral_margin);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut h = DMatrix::zeros(n, n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && rng.random_bool(0.5) {
            let r = margin * rng.random::<f64>();
            let (s, c) = rng.random_range(0.0..PI).sin_cos();
            h[(i, i)] = r * c;
            h[(i, i + 1)] = r * s;
            h[(i + 1, i)] = -r * s;
            h[(i + 1, i + 1)] = r * c;
            i += 2;
        } else {
            h[(i, i)] = rng.random_range(-margin..margin);
            i += 1;
        }
    }
    let q = gaussian(n, n, &mut rng).qr().q();
    let a = &q * h * q.transpose();
    let b = gaussian(n, spec.m, &mut rng);
    let c = gaussian(spec.p, n, &mut rng);
    let d = gaussian(spec.p, spec.m, &mut rng);
    DescriptorSystem::standard(a, b, c, d, spec.timing).expect("generator dimensions are consistent")
}

/// `Rᵀ(1/z)` realized by transposing after the substitution.
fn conjugate_transposed_last(r: &DescriptorSystem) -> Result<DescriptorSystem> {
    Ok(bilinear(r, &BilinearMap::RECIPROCAL)?.transpose())
}

/// A realization of the zero 3×2 matrix: the conjugate of a random stable
/// 2×3 system computed in two ways and subtracted.
///
/// The first path substitutes `z → 1/z` and then transposes (order `n + 3`),
/// the second transposes first (order `n + 2`), so the result has order `2n + 5`.
pub fn build_zero_case(n: usize, seed: u64) -> DescriptorSystem {
    let r = random_stable_system(&GeneratorSpec::discrete(n, 2, 3, seed));
    let path_a = conjugate_transposed_last(&r).expect("reciprocal map is not degenerate");
    let path_b = r.conjugate().expect("discrete system");
    path_a.subtract(&path_b).expect("conjugates share dimensions")
}

/// `R~ − S~` for independent random stable `R`, `S`: a nonzero 3×2 matrix.
pub fn build_control_case(n: usize, seed: u64) -> DescriptorSystem {
    let r = random_stable_system(&GeneratorSpec::discrete(n, 2, 3, seed));
    let s = random_stable_system(&GeneratorSpec::discrete(n, 2, 3, seed ^ 0x9e37_79b9_7f4a_7c15));
    let r_conj = r.conjugate().expect("discrete system");
    let s_conj = conjugate_transposed_last(&s).expect("reciprocal map is not degenerate");
    r_conj.subtract(&s_conj).expect("conjugates share dimensions")
}

/// Checks that `G` vanishes at three random points of the unit circle, which
/// separates the poles of `R` from those of its conjugate.
pub fn verify_zero_case(sys: &DescriptorSystem, seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(7);
    for _ in 0..3 {
        let z = Complex::from_polar(1.0, rng.random_range(0.0..2.0 * PI));
        let g = evalfr(sys, z)?;
        let scale = 1.0 + sys.b().norm() * sys.c().norm() + sys.d().norm();
        let gain = max_singular_value(&g);
        if gain > 1e-8 * scale {
            return Err(Error::Unsupported(format!(
                "zero case failed its spot check: |G({:.4}{:+.4}i)| = {gain:.3e}",
                z.re, z.im
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    /// Requested order of `R`.
    pub n: usize,
    /// Actual order of the zero case.
    pub order: usize,
    pub seed: u64,
    /// Decisions and timings indexed M1..M5; `None` for methods not run.
    pub decisions: [Option<bool>; 5],
    pub timings: [Option<f64>; 5],
    pub results: Vec<MethodResult>,
    pub diagnostics: Vec<String>,
}

impl BenchRow {
    fn from_results(n: usize, order: usize, seed: u64, results: Vec<MethodResult>) -> Self {
        let mut decisions = [None; 5];
        let mut timings = [None; 5];
        let mut diagnostics = Vec::new();
        for r in &results {
            let k = r.method.id() as usize - 1;
            decisions[k] = Some(r.is_null);
            timings[k] = Some(r.elapsed);
            if !r.is_null {
                diagnostics.extend(r.diagnostics.iter().map(|d| format!("M{}: {d}", r.method)));
            }
        }
        BenchRow { n, order, seed, decisions, timings, results, diagnostics }
    }

    pub fn decision(&self, m: Method) -> Option<bool> {
        self.decisions[m.id() as usize - 1]
    }

    pub fn timing(&self, m: Method) -> Option<f64> {
        self.timings[m.id() as usize - 1]
    }
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    /// Ordered by `(n, seed)`.
    pub rows: Vec<BenchRow>,
    /// Total elapsed seconds per method over all rows.
    pub totals: [f64; 5],
}

pub fn totals(rows: &[BenchRow]) -> [f64; 5] {
    let mut t = [0.0; 5];
    for row in rows {
        for (acc, x) in t.iter_mut().zip(row.timings) {
            *acc += x.unwrap_or(0.0);
        }
    }
    t
}

/// Runs one zero case: build, spot check, then all requested methods.
pub fn run_case(n: usize, seed: u64, tol: Tolerance, methods: &[Method]) -> Result<BenchRow> {
    let sys = build_zero_case(n, seed);
    verify_zero_case(&sys, seed)?;
    let opts = CheckOptions { methods: methods.to_vec(), tol, seed, ..CheckOptions::default() };
    Ok(BenchRow::from_results(n, sys.order(), seed, check_nullrank(&sys, &opts)))
}

/// Runs `seeds_per_order` zero cases per order with seeds `base_seed, base_seed + 1, ...`.
///
/// A case failing its spot check aborts the run: a broken generator must not
/// produce a table.
pub fn run_benchmark(
    orders: &[usize],
    tol: Tolerance,
    seeds_per_order: u32,
    methods: &[Method],
    base_seed: u64,
) -> Result<BenchReport> {
    let mut orders = orders.to_vec();
    orders.sort_unstable();
    orders.dedup();
    let mut rows = Vec::with_capacity(orders.len() * seeds_per_order as usize);
    for &n in &orders {
        for s in 0..seeds_per_order as u64 {
            rows.push(run_case(n, base_seed.wrapping_add(s), tol, methods)?);
        }
    }
    let totals = totals(&rows);
    Ok(BenchReport { rows, totals })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Csv,
}

pub const CSV_HEADER: &str = "n,N,seed,m1,m2,m3,m4,m5,t1,t2,t3,t4,t5";

fn render_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let mut fields = vec![r.n.to_string(), r.order.to_string(), r.seed.to_string()];
        fields.extend(r.decisions.iter().map(|d| d.map_or(String::new(), |b| (b as u8).to_string())));
        fields.extend(r.timings.iter().map(|t| t.map_or(String::new(), |t| format!("{t:.6}"))));
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn render_text(rows: &[BenchRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:>5} {:>5}  {:>7} {:>7} {:>7} {:>7} {:>7}", "n", "N", "M1", "M2", "M3", "M4", "M5");
    if rows.is_empty() {
        return out;
    }
    let mut i = 0;
    while i < rows.len() {
        let n = rows[i].n;
        let group: Vec<&BenchRow> = rows[i..].iter().take_while(|r| r.n == n).collect();
        i += group.len();
        let _ = write!(out, "{:>5} {:>5} ", n, group[0].order);
        for k in 0..5 {
            let run = group.iter().filter(|r| r.decisions[k].is_some()).count();
            let null = group.iter().filter(|r| r.decisions[k] == Some(true)).count();
            let cell = if run == 0 { "-".to_string() } else { format!("{null}/{run}") };
            let _ = write!(out, " {cell:>7}");
        }
        out.push('\n');
    }
    let t = totals(rows);
    let _ = writeln!(out);
    let _ = writeln!(out, "total elapsed (s)");
    let _ = writeln!(out, "{:>11}  {:>7} {:>7} {:>7} {:>7} {:>7}", "", "M1", "M2", "M3", "M4", "M5");
    let _ = write!(out, "{:>11} ", "");
    for x in t {
        let _ = write!(out, " {x:>7.2}");
    }
    out.push('\n');
    out
}

/// Text mimics a decision table (null count per order) followed by total
/// timings; CSV has one line per case.
pub fn render_report(rows: &[BenchRow], format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => render_text(rows),
        ReportFormat::Csv => render_csv(rows),
    }
}
