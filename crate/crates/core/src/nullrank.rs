//! The five null-rank tests and a dispatcher running any subset of them.
//!
//! | method | criterion |
//! |--------|-----------|
//! | M1 | minimal realization has order 0 and a zero feedthrough |
//! | M2 | peak gain after a random bilinear substitution is below `tol` |
//! | M3 | structural normal rank of the system pencil minus `n` is 0 |
//! | M4 | rank of `G(λ)` at sampled frequencies is 0 |
//! | M5 | rank of `S(λ)` at sampled frequencies minus `n` is 0 |

use std::f64::consts::PI;
use std::fmt;

use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{bilinear, evalfr, peak_gain, BilinearMap};
use crate::error::{Error, Result};
use crate::kernels::{rank_svd, Tolerance};
use crate::reductions::{kronecker_like, minimal_realization, system_pencil};
use crate::system::DescriptorSystem;

type C64 = Complex<f64>;

/// Grid points on the stability boundary used by M2 (ten random points are added).
pub const PEAK_GAIN_GRID: usize = 200;
const BILINEAR_ATTEMPTS: usize = 3;
const POLE_REDRAWS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    M1,
    M2,
    M3,
    M4,
    M5,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::M1, Method::M2, Method::M3, Method::M4, Method::M5];

    /// 1-based method number.
    pub fn id(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_id(id: u8) -> Option<Method> {
        Method::ALL.get((id as usize).wrapping_sub(1)).copied()
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id())
    }
}

/// Method-specific data backing a decision.
#[derive(Debug, Clone, PartialEq)]
pub enum Evidence {
    /// M1: order and feedthrough rank of the minimal realization.
    MinimalRealization { order: usize, rank_d: usize },
    /// M2: peak gain of the transformed system and the threshold it was compared with.
    PeakGain { gain: f64, threshold: f64 },
    /// M3: structural normal rank.
    NormalRank(i64),
    /// M4, M5: sampled normal-rank estimate.
    SampledRank { rank: i64, samples: usize },
    /// The method stopped on an error; see the diagnostics.
    Unavailable,
}

impl fmt::Display for Evidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Evidence::MinimalRealization { order, rank_d } => write!(f, "order:{order},rankD:{rank_d}"),
            Evidence::PeakGain { gain, .. } => write!(f, "gain:{gain:.6e}"),
            Evidence::NormalRank(r) => write!(f, "rank:{r}"),
            Evidence::SampledRank { rank, samples } => write!(f, "rank:{rank},samples:{samples}"),
            Evidence::Unavailable => f.write_str("none"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MethodResult {
    pub method: Method,
    pub is_null: bool,
    pub evidence: Evidence,
    /// Wall-clock seconds.
    pub elapsed: f64,
    pub diagnostics: Vec<String>,
}

impl MethodResult {
    fn new(method: Method, is_null: bool, evidence: Evidence) -> Self {
        MethodResult { method, is_null, evidence, elapsed: 0.0, diagnostics: Vec::new() }
    }

    fn failed(method: Method, err: &Error) -> Self {
        MethodResult { diagnostics: vec![err.to_string()], ..MethodResult::new(method, false, Evidence::Unavailable) }
    }

    /// The estimated normal rank, for methods that produce one.
    pub fn rank(&self) -> Option<i64> {
        match self.evidence {
            Evidence::NormalRank(r) | Evidence::SampledRank { rank: r, .. } => Some(r),
            _ => None,
        }
    }
}

/// Where sample frequencies are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SampleDistribution {
    /// Real values uniform on `(0, 1)`.
    #[default]
    RealUnit,
    /// Complex values uniform on the unit circle.
    UnitCircle,
}

impl SampleDistribution {
    fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> C64 {
        match self {
            SampleDistribution::RealUnit => loop {
                let x: f64 = rng.random();
                if x > 0.0 {
                    return C64::new(x, 0.0);
                }
            },
            SampleDistribution::UnitCircle => C64::from_polar(1.0, rng.random_range(0.0..2.0 * PI)),
        }
    }
}

/// Frequencies at which M4 and M5 evaluate.
///
/// The first `k` values of a set with `k + 1` samples equal the set with `k`
/// samples, so adding samples can only raise the estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySampleSet {
    pub values: Vec<C64>,
    pub seed: u64,
    pub distribution: SampleDistribution,
}

impl FrequencySampleSet {
    pub fn draw(count: usize, seed: u64, distribution: SampleDistribution) -> Self {
        assert!(count > 0, "at least one frequency sample is required");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..count).map(|_| distribution.draw(&mut rng)).collect();
        FrequencySampleSet { values, seed, distribution }
    }

    pub fn from_values(values: Vec<C64>) -> Self {
        assert!(!values.is_empty(), "at least one frequency sample is required");
        FrequencySampleSet { values, seed: 0, distribution: SampleDistribution::RealUnit }
    }

    /// Replacement values for samples that hit a pole.
    fn redraw_rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(1);
        rng
    }
}

/// M1: the minimal realization must have order 0 and `rank D = 0`.
pub fn method1_minreal(sys: &DescriptorSystem, tol: Tolerance) -> MethodResult {
    match minimal_realization(sys, tol) {
        Ok((min, report)) => {
            let rank_d = rank_svd(min.d(), tol);
            let mut res = MethodResult::new(
                Method::M1,
                report.final_order == 0 && rank_d == 0,
                Evidence::MinimalRealization { order: report.final_order, rank_d },
            );
            res.diagnostics.push(format!(
                "removed {} uncontrollable, {} unobservable, {} non-dynamic",
                report.removed_uncontrollable, report.removed_unobservable, report.removed_nondynamic
            ));
            res
        }
        Err(e) => MethodResult::failed(Method::M1, &Error::RankDecision(format!("stage failure: {e}"))),
    }
}

/// Threshold compared with the peak gain. A default tolerance scales with the data.
fn gain_threshold(sys: &DescriptorSystem, tol: Tolerance) -> f64 {
    let scale = sys.b().norm() * sys.c().norm() + sys.d().norm();
    let dim = sys.order() + sys.inputs().max(sys.outputs());
    tol.threshold(dim, dim, scale)
}

/// M2: `G(g(δ))` is evaluated over the stability boundary for a random
/// bilinear map `g`; the largest gain must be below the threshold.
pub fn method2_norm<R: Rng + ?Sized>(sys: &DescriptorSystem, tol: Tolerance, rng: &mut R) -> Result<MethodResult> {
    let threshold = gain_threshold(sys, tol);
    let mut last_err = None;
    for _ in 0..BILINEAR_ATTEMPTS {
        let map = BilinearMap::random(rng, false);
        let grid_seed = rng.random::<u64>();
        let transformed = bilinear(sys, &map)?;
        match peak_gain(&transformed, PEAK_GAIN_GRID, grid_seed) {
            Ok(gain) => {
                let is_null = sys.inputs() == 0 || sys.outputs() == 0 || gain < threshold || gain == 0.0;
                let mut res = MethodResult::new(Method::M2, is_null, Evidence::PeakGain { gain, threshold });
                res.diagnostics.push(format!("map a={:.4} b={:.4} c={:.4} d={:.4}", map.a, map.b, map.c, map.d));
                return Ok(res);
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(Error::Unsupported(format!(
        "transformed system not evaluable after {BILINEAR_ATTEMPTS} bilinear maps: {}",
        last_err.expect("at least one attempt")
    )))
}

/// M3: `rank G = rank S − n` with `rank S` read off a Kronecker-like form.
pub fn method3_nrank(sys: &DescriptorSystem, tol: Tolerance) -> MethodResult {
    // Reversal keeps the normal rank; its right-structure chain is better
    // conditioned for systems with poles inside the unit disk.
    match kronecker_like(&system_pencil(sys).reversed(), tol) {
        Ok(k) => {
            let r = k.normal_rank() as i64 - sys.order() as i64;
            let mut res = MethodResult::new(Method::M3, r == 0, Evidence::NormalRank(r));
            res.diagnostics.push(format!(
                "blocks right {}x{}, regular {}, left {}x{}",
                k.m_r, k.n_r, k.n_reg, k.m_l, k.n_l
            ));
            res
        }
        Err(e) => MethodResult::failed(Method::M3, &Error::RankDecision(format!("reduction failure: {e}"))),
    }
}

/// M4: `r = max rank G(λ_z)` over the samples. Samples that hit a pole are redrawn.
pub fn method4_freq(sys: &DescriptorSystem, tol: Tolerance, samples: &FrequencySampleSet) -> Result<MethodResult> {
    let mut redraw = samples.redraw_rng();
    let mut r = 0;
    let mut redraws = 0;
    for (i, &first) in samples.values.iter().enumerate() {
        let mut lambda = first;
        let mut attempt = 0;
        let g = loop {
            match evalfr(sys, lambda) {
                Ok(g) => break g,
                Err(Error::EvaluationAtPole { .. }) if attempt < POLE_REDRAWS => {
                    attempt += 1;
                    redraws += 1;
                    lambda = samples.distribution.draw(&mut redraw);
                }
                Err(Error::EvaluationAtPole { .. }) => return Err(Error::NoFrequency(i)),
                Err(e) => return Err(e),
            }
        };
        r = r.max(rank_svd(&g, tol));
    }
    let r = r as i64;
    let mut res = MethodResult::new(Method::M4, r == 0, Evidence::SampledRank { rank: r, samples: samples.values.len() });
    if redraws > 0 {
        res.diagnostics.push(format!("{redraws} sample(s) redrawn at poles"));
    }
    Ok(res)
}

/// M5: `r = max rank S(λ_z) − n` over the samples.
pub fn method5_pencil(sys: &DescriptorSystem, tol: Tolerance, samples: &FrequencySampleSet) -> MethodResult {
    let pencil = system_pencil(sys);
    let best = samples
        .values
        .iter()
        .map(|&lambda| {
            if lambda.im == 0.0 {
                rank_svd(&pencil.at_real(lambda.re), tol)
            } else {
                rank_svd(&pencil.at(lambda), tol)
            }
        })
        .max()
        .unwrap_or(0);
    let r = best as i64 - sys.order() as i64;
    MethodResult::new(Method::M5, r == 0, Evidence::SampledRank { rank: r, samples: samples.values.len() })
}

#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub methods: Vec<Method>,
    pub tol: Tolerance,
    pub seed: u64,
    pub sample_count: usize,
    pub distribution: SampleDistribution,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            methods: Method::ALL.to_vec(),
            tol: Tolerance::new(1e-7),
            seed: 0,
            sample_count: 1,
            distribution: SampleDistribution::RealUnit,
        }
    }
}

/// Wall-clock timer. wasm32 has no monotonic clock, so timings read 0 there.
struct Stopwatch {
    #[cfg(not(target_arch = "wasm32"))]
    start: std::time::Instant,
}

impl Stopwatch {
    fn start() -> Self {
        Stopwatch {
            #[cfg(not(target_arch = "wasm32"))]
            start: std::time::Instant::now(),
        }
    }

    fn seconds(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        return self.start.elapsed().as_secs_f64();
        #[cfg(target_arch = "wasm32")]
        return 0.0;
    }
}

/// Independent random stream of one method.
fn method_rng(seed: u64, method: Method) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(method.id() as u64);
    rng
}

/// Runs one method with its own seed-derived randomness; errors become a
/// non-null result carrying the message.
pub fn run_method(sys: &DescriptorSystem, method: Method, opts: &CheckOptions) -> MethodResult {
    let watch = Stopwatch::start();
    let samples = || {
        let seed = method_rng(opts.seed, method).random::<u64>();
        FrequencySampleSet::draw(opts.sample_count.max(1), seed, opts.distribution)
    };
    let mut res = match method {
        Method::M1 => method1_minreal(sys, opts.tol),
        Method::M2 => method2_norm(sys, opts.tol, &mut method_rng(opts.seed, method))
            .unwrap_or_else(|e| MethodResult::failed(method, &e)),
        Method::M3 => method3_nrank(sys, opts.tol),
        Method::M4 => method4_freq(sys, opts.tol, &samples()).unwrap_or_else(|e| MethodResult::failed(method, &e)),
        Method::M5 => method5_pencil(sys, opts.tol, &samples()),
    };
    res.elapsed = watch.seconds();
    res
}

/// Runs the requested methods in order M1..M5 (duplicates collapse).
pub fn check_nullrank(sys: &DescriptorSystem, opts: &CheckOptions) -> Vec<MethodResult> {
    let mut methods = opts.methods.clone();
    methods.sort();
    methods.dedup();
    methods.into_iter().map(|m| run_method(sys, m, opts)).collect()
}

/// Sampled normal-rank estimate of `G` (M5).
pub fn normal_rank_estimate(sys: &DescriptorSystem, tol: Tolerance, seed: u64, samples: usize) -> i64 {
    let opts = CheckOptions { methods: vec![Method::M5], tol, seed, sample_count: samples, ..CheckOptions::default() };
    run_method(sys, Method::M5, &opts).rank().expect("M5 always yields a rank")
}
