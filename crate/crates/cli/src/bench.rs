//! Per-stage timing of forward + backward_input + backward_kernel.
//!
//! Every requested backend runs `warmup` unrecorded repetitions, then the
//! `active` repetitions are interleaved across backends so slow drift of the
//! machine affects all of them alike.

use std::time::Instant;

use phasorconv::flops::StageTimes;
use phasorconv::{Backend, ConvEngine, ConvParams, FlopLedger, OpCost, Real, RealTensor4, Stage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::CliError;

pub const MIN_ACTIVE: usize = 3;

pub const CSV_HEADER: &str = "backend,B,f1,f2,N,K,P,stage,median_ns,iqr_ns,mul,add,div,sqrt,trig";

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub batches: Vec<usize>,
    pub in_channels: usize,
    pub out_channels: usize,
    pub image: usize,
    pub kernel: usize,
    pub padding: usize,
    pub backends: Vec<Backend>,
    pub warmup: usize,
    pub active: usize,
    pub threads: usize,
    pub seed: u64,
    pub omit_timing: bool,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Environment {
    pub scalar: String,
    pub threads: usize,
    pub profile: String,
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq, Eq)]
pub struct Geometry {
    pub batch: usize,
    pub in_channels: usize,
    pub out_channels: usize,
    pub image: usize,
    pub kernel: usize,
    pub padding: usize,
    pub fft_len: usize,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct StageRow {
    pub stage: String,
    pub median_ns: u64,
    pub iqr_ns: u64,
    pub ops: OpCost,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct BenchRow {
    pub backend: Backend,
    pub geometry: Geometry,
    pub stages: Vec<StageRow>,
    /// Wall time of one forward + backward repetition.
    pub total: StageRow,
    pub wraps: u64,
}

impl BenchRow {
    pub fn stage(&self, stage: Stage) -> &StageRow {
        self.stages
            .iter()
            .find(|s| s.stage == stage.name())
            .expect("every stage is reported")
    }

    /// Stage rows then the total. The direct backend has no pipeline stages
    /// to break out, so it contributes only its total.
    fn printed_stages(&self) -> impl Iterator<Item = &StageRow> {
        let stages = if self.backend == Backend::DirectSpatial {
            &[][..]
        } else {
            &self.stages[..]
        };
        stages.iter().chain(std::iter::once(&self.total))
    }
}

/// Rect against phasor at one batch size. Ratios are `rect / phasor`.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Comparison {
    pub batch: usize,
    pub speedup: Option<f64>,
    pub product_speedup: Option<f64>,
    pub product_mul_ratio: f64,
    pub product_mul_add_ratio: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct BenchReport {
    pub kind: String,
    pub environment: Environment,
    pub warmup: usize,
    pub active: usize,
    pub rows: Vec<BenchRow>,
    pub comparisons: Vec<Comparison>,
}

/// Linear-interpolated quantile of sorted samples.
pub fn quantile(sorted: &[u64], q: f64) -> f64 {
    match sorted.len() {
        0 => 0.0,
        1 => sorted[0] as f64,
        n => {
            let pos = q * (n - 1) as f64;
            let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
            let frac = pos - lo as f64;
            sorted[lo] as f64 * (1.0 - frac) + sorted[hi] as f64 * frac
        }
    }
}

/// `(median, interquartile range)` in whole nanoseconds.
pub fn median_iqr(samples: &[u64]) -> (u64, u64) {
    let mut s = samples.to_vec();
    s.sort_unstable();
    let med = quantile(&s, 0.5).round() as u64;
    let iqr = (quantile(&s, 0.75) - quantile(&s, 0.25)).round() as u64;
    (med, iqr)
}

struct Inputs<T> {
    x: RealTensor4<T>,
    w: RealTensor4<T>,
}

fn one_rep<T: Real>(
    engine: &ConvEngine,
    params: &ConvParams<T>,
    inputs: &Inputs<T>,
) -> Result<(StageTimes, u64, FlopLedger), CliError> {
    let mut times = StageTimes::new();
    let mut ledger = FlopLedger::new();
    let t0 = Instant::now();
    let y = engine.forward_timed(&inputs.x, &inputs.w, params, &mut ledger, Some(&mut times))?;
    engine.backward_input_timed(&y, &inputs.w, params, &mut ledger, Some(&mut times))?;
    engine.backward_kernel_timed(&y, &inputs.x, params, &mut ledger, Some(&mut times))?;
    Ok((times, t0.elapsed().as_nanos() as u64, ledger))
}

fn random_inputs<T: Real>(params: &ConvParams<T>, seed: u64) -> Inputs<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |dims| RealTensor4::from_fn(dims, |_| T::from_f64(rng.random_range(-1.0..1.0)));
    Inputs {
        x: draw(params.input_dims()),
        w: draw(params.kernel_dims()),
    }
}

pub fn validate(config: &BenchConfig) -> Result<(), CliError> {
    if config.active < MIN_ACTIVE {
        return Err(CliError::Usage(format!(
            "--active {} is too small; at least {MIN_ACTIVE} active repetitions are required",
            config.active
        )));
    }
    if config.batches.is_empty() || config.backends.is_empty() {
        return Err(CliError::Usage("need at least one batch size and one backend".into()));
    }
    Ok(())
}

/// Runs the benchmark. `fixtures` replaces the random input and kernel when
/// given; their shapes must match the geometry of every batch size.
pub fn run<T: Real>(
    config: &BenchConfig,
    fixtures: Option<(RealTensor4<T>, RealTensor4<T>)>,
) -> Result<BenchReport, CliError> {
    validate(config)?;
    let mut rows = Vec::new();
    let mut comparisons = Vec::new();
    for &batch in &config.batches {
        let params = ConvParams::<T>::new(
            batch,
            config.in_channels,
            config.out_channels,
            config.image,
            config.kernel,
            config.padding,
        )?;
        let inputs = match &fixtures {
            Some((x, w)) => {
                x.expect_dims("input fixture", params.input_dims())?;
                w.expect_dims("kernel fixture", params.kernel_dims())?;
                Inputs {
                    x: x.clone(),
                    w: w.clone(),
                }
            }
            None => random_inputs(&params, config.seed),
        };
        let engines: Vec<ConvEngine> = config
            .backends
            .iter()
            .map(|&b| ConvEngine::new(b).with_threads(config.threads))
            .collect();

        let mut ledgers = Vec::with_capacity(engines.len());
        for engine in &engines {
            let mut last = None;
            for _ in 0..config.warmup {
                last = Some(one_rep(engine, &params, &inputs)?.2);
            }
            // counts are identical across repetitions; keep one ledger
            ledgers.push(match last {
                Some(l) => l,
                None => one_rep(engine, &params, &inputs)?.2,
            });
        }
        let mut stage_samples = vec![vec![Vec::with_capacity(config.active); Stage::ALL.len()]; engines.len()];
        let mut totals = vec![Vec::with_capacity(config.active); engines.len()];
        for _ in 0..config.active {
            for (e, engine) in engines.iter().enumerate() {
                let (times, total, _) = one_rep(engine, &params, &inputs)?;
                for (s, &stage) in Stage::ALL.iter().enumerate() {
                    stage_samples[e][s].push(times.get(stage).as_nanos() as u64);
                }
                totals[e].push(total);
            }
        }

        let geometry = Geometry {
            batch,
            in_channels: config.in_channels,
            out_channels: config.out_channels,
            image: config.image,
            kernel: config.kernel,
            padding: config.padding,
            fft_len: params.plan().fft_len(),
        };
        let timing = |samples: &[u64]| {
            if config.omit_timing {
                (0, 0)
            } else {
                median_iqr(samples)
            }
        };
        let first_row = rows.len();
        for (e, &backend) in config.backends.iter().enumerate() {
            let ledger = &ledgers[e];
            let stages = Stage::ALL
                .iter()
                .enumerate()
                .map(|(s, &stage)| {
                    let (median_ns, iqr_ns) = timing(&stage_samples[e][s]);
                    StageRow {
                        stage: stage.name().to_string(),
                        median_ns,
                        iqr_ns,
                        ops: ledger.cost(stage),
                    }
                })
                .collect();
            let (median_ns, iqr_ns) = timing(&totals[e]);
            rows.push(BenchRow {
                backend,
                geometry,
                stages,
                total: StageRow {
                    stage: "total".into(),
                    median_ns,
                    iqr_ns,
                    ops: ledger.total(),
                },
                wraps: ledger.wraps(),
            });
        }
        let batch_rows = &rows[first_row..];
        let find = |b: Backend| batch_rows.iter().find(|r| r.backend == b);
        if let (Some(rect), Some(phasor)) = (find(Backend::SpectralRect), find(Backend::SpectralPhasor)) {
            comparisons.push(compare(batch, rect, phasor, config.omit_timing));
        }
    }
    Ok(BenchReport {
        kind: "bench".into(),
        environment: Environment {
            scalar: T::NAME.into(),
            threads: config.threads,
            profile: if cfg!(debug_assertions) { "debug" } else { "release" }.into(),
            timing: !config.omit_timing,
        },
        warmup: config.warmup,
        active: config.active,
        rows,
        comparisons,
    })
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        f64::NAN
    } else {
        a as f64 / b as f64
    }
}

fn compare(batch: usize, rect: &BenchRow, phasor: &BenchRow, omit_timing: bool) -> Comparison {
    let (rp, pp) = (rect.stage(Stage::SpectralProduct), phasor.stage(Stage::SpectralProduct));
    let timed = |a: u64, b: u64| (!omit_timing).then(|| ratio(a, b)).filter(|r| r.is_finite());
    Comparison {
        batch,
        speedup: timed(rect.total.median_ns, phasor.total.median_ns),
        product_speedup: timed(rp.median_ns, pp.median_ns),
        product_mul_ratio: ratio(rp.ops.mul, pp.ops.mul),
        product_mul_add_ratio: ratio(rp.ops.mul_add(), pp.ops.mul_add()),
    }
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let g = row.geometry;
            for s in row.printed_stages() {
                let o = s.ops;
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                    row.backend,
                    g.batch,
                    g.in_channels,
                    g.out_channels,
                    g.image,
                    g.kernel,
                    g.padding,
                    s.stage,
                    s.median_ns,
                    s.iqr_ns,
                    o.mul,
                    o.add,
                    o.div,
                    o.sqrt,
                    o.trig
                ));
            }
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{} · threads {} · {} build · warmup {} · active {}\n",
            self.environment.scalar, self.environment.threads, self.environment.profile, self.warmup, self.active
        );
        for row in &self.rows {
            let g = row.geometry;
            out.push_str(&format!(
                "\n{} B={} f1={} f2={} N={} K={} P={} L={}\n",
                row.backend, g.batch, g.in_channels, g.out_channels, g.image, g.kernel, g.padding, g.fft_len
            ));
            out.push_str(&format!(
                "  {:<20} {:>14} {:>12} {:>14} {:>14} {:>10} {:>12}\n",
                "stage", "median_ns", "iqr_ns", "mul", "add", "sqrt", "trig"
            ));
            for s in row.printed_stages() {
                out.push_str(&format!(
                    "  {:<20} {:>14} {:>12} {:>14} {:>14} {:>10} {:>12}\n",
                    s.stage, s.median_ns, s.iqr_ns, s.ops.mul, s.ops.add, s.ops.sqrt, s.ops.trig
                ));
            }
        }
        if !self.comparisons.is_empty() {
            out.push_str("\nrect / phasor\n");
            out.push_str(&format!(
                "  {:>6} {:>10} {:>16} {:>10} {:>14}\n",
                "B", "speedup", "product_speedup", "mul_ratio", "mul_add_ratio"
            ));
            let show = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.3}"));
            for c in &self.comparisons {
                out.push_str(&format!(
                    "  {:>6} {:>10} {:>16} {:>10.2} {:>14.2}\n",
                    c.batch,
                    show(c.speedup),
                    show(c.product_speedup),
                    c.product_mul_ratio,
                    c.product_mul_add_ratio
                ));
            }
        }
        out
    }
}
