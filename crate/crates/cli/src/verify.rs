//! Cross-module invariant suites behind `phasorconv verify`.

use std::time::Instant;

use phasorconv::complexforms::{mul_phasor, mul_rect, to_phasor, to_rectangular};
use phasorconv::flops::reconcile;
use phasorconv::nn::{loss_and_grads, train, Batch, NetConfig, SyntheticDataset, TinyNet, TrainConfig};
use phasorconv::spectral::{dft_1d_naive, fft_1d, irfft2_checked, plan_fft, rfft2, Direction};
use phasorconv::{Backend, CRect, ConvEngine, ConvParams, CostModel, FlopLedger, RealTensor4, Stage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    Small,
    FullDesk,
}

impl Scale {
    fn pick(self, small: usize, full: usize) -> usize {
        match self {
            Scale::Small => small,
            Scale::FullDesk => full,
        }
    }
}

/// `le`: pass when `measured ≤ tolerance`; `ge`: pass when `measured ≥ tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    Le,
    Ge,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct VerifyReport {
    pub kind: String,
    pub scale: Scale,
    pub seed: u64,
    pub sabotage_conj: bool,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub elapsed_ms: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub scale: Scale,
    pub seed: u64,
    pub threads: usize,
    pub sabotage_conj: bool,
    pub omit_timing: bool,
}

struct Suite {
    config: VerifyConfig,
    rng: ChaCha8Rng,
    checks: Vec<Check>,
}

fn check(name: &str, measured: f64, tolerance: f64, bound: Bound, detail: String) -> Check {
    let passed = match bound {
        Bound::Le => measured <= tolerance,
        Bound::Ge => measured >= tolerance,
    };
    Check {
        name: name.into(),
        passed,
        measured,
        tolerance,
        bound,
        detail,
    }
}

fn random_tensor(rng: &mut ChaCha8Rng, dims: [usize; 4]) -> RealTensor4<f64> {
    RealTensor4::from_fn(dims, |_| rng.random_range(-1.0..1.0))
}

fn rel(a: &RealTensor4<f64>, b: &RealTensor4<f64>) -> f64 {
    a.max_abs_diff(b) / b.max_abs().max(f64::MIN_POSITIVE)
}

fn central_difference(
    t: &RealTensor4<f64>,
    mut f: impl FnMut(&RealTensor4<f64>) -> Result<f64, CliError>,
) -> Result<RealTensor4<f64>, CliError> {
    const H: f64 = 1e-6;
    let mut probe = t.clone();
    let mut out = RealTensor4::zeros(t.dims());
    for k in 0..t.len() {
        let v = t.data()[k];
        probe.data_mut()[k] = v + H;
        let up = f(&probe)?;
        probe.data_mut()[k] = v - H;
        let down = f(&probe)?;
        probe.data_mut()[k] = v;
        out.data_mut()[k] = (up - down) / (2.0 * H);
    }
    Ok(out)
}

impl Suite {
    fn engine(&self, backend: Backend) -> ConvEngine {
        let e = ConvEngine::new(backend).with_threads(self.config.threads);
        if self.config.sabotage_conj {
            e.with_flipped_conjugation()
        } else {
            e
        }
    }

    fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    /// B ≤ 4, f₁, f₂ ≤ 8, N ≤ 32, K ∈ {1, 2, 3, 5, 7}, P ≤ 2.
    fn random_params(&mut self, max_b: usize, max_f: usize, max_n: usize) -> ConvParams<f64> {
        let k = [1, 2, 3, 5, 7][self.rng.random_range(0..5)];
        let n = self.rng.random_range(k.max(2)..=max_n.max(k));
        ConvParams::new(
            self.rng.random_range(1..=max_b),
            self.rng.random_range(1..=max_f),
            self.rng.random_range(1..=max_f),
            n,
            k,
            self.rng.random_range(0..=2),
        )
        .expect("generated geometry is valid")
    }

    fn fft(&mut self) -> Result<(), CliError> {
        let mut worst: f64 = 0.0;
        for log in 1..=8 {
            let n = 1usize << log;
            let x: Vec<CRect<f64>> = (0..n)
                .map(|_| CRect::new(self.rng.random_range(-1.0..1.0), self.rng.random_range(-1.0..1.0)))
                .collect();
            for dir in [Direction::Forward, Direction::Inverse] {
                let fast = fft_1d(&x, dir)?;
                let slow = dft_1d_naive(&x, dir)?;
                let scale = slow.iter().map(|v| v.norm()).fold(0.0, f64::max);
                let err = fast
                    .iter()
                    .zip(&slow)
                    .map(|(a, b)| (*a - *b).norm())
                    .fold(0.0, f64::max);
                worst = worst.max(err / scale);
            }
        }
        self.push(check(
            "fft_vs_naive_dft",
            worst,
            1e-10,
            Bound::Le,
            "lengths 2..256, both directions".into(),
        ));

        let (mut round, mut parseval, mut residue): (f64, f64, f64) = (0.0, 0.0, 0.0);
        for l in [16, 32] {
            let plan = plan_fft::<f64>(l, 1, 0)?;
            for _ in 0..4 {
                let x = random_tensor(&mut self.rng, [1, 1, l, l]);
                let spec = rfft2(x.data(), &plan)?;
                let (back, res) = irfft2_checked(&spec, &plan)?;
                round = round.max(
                    back.iter()
                        .zip(x.data())
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max),
                );
                let max_spec = spec.re().iter().chain(spec.im()).fold(0.0f64, |m, v| m.max(v.abs()));
                residue = residue.max(res / max_spec);
                let h = l / 2 + 1;
                let time: f64 = x.data().iter().map(|v| v * v).sum();
                let mut freq = 0.0;
                for e in 0..l * h {
                    let col = e % h;
                    let w = if col == 0 || col == l / 2 { 1.0 } else { 2.0 };
                    freq += w * (spec.re()[e].powi(2) + spec.im()[e].powi(2));
                }
                parseval = parseval.max((time - freq / (l * l) as f64).abs() / time);
            }
        }
        self.push(check(
            "rfft2_round_trip",
            round,
            1e-12,
            Bound::Le,
            "random 16×16 and 32×32 planes".into(),
        ));
        self.push(check(
            "irfft2_residue",
            residue,
            1e-10,
            Bound::Le,
            "imaginary residue / max|X|".into(),
        ));
        self.push(check(
            "parseval",
            parseval,
            1e-9,
            Bound::Le,
            "relative energy difference".into(),
        ));
        Ok(())
    }

    fn complex_forms(&mut self) {
        let (mut round, mut product): (f64, f64) = (0.0, 0.0);
        for _ in 0..2000 {
            let scale = 10f64.powf(self.rng.random_range(-3.0..3.0));
            let z1 = CRect::new(
                self.rng.random_range(-1.0..1.0) * scale,
                self.rng.random_range(-1.0..1.0) * scale,
            );
            let z2 = CRect::new(self.rng.random_range(-1.0..1.0), self.rng.random_range(-1.0..1.0));
            let back = to_rectangular(to_phasor(z1));
            round = round.max((back - z1).norm() / z1.norm());
            let via_phasor = to_rectangular(mul_phasor(to_phasor(z1), to_phasor(z2)));
            product = product.max((via_phasor - mul_rect(z1, z2)).norm() / (z1.norm() * z2.norm()));
        }
        self.push(check(
            "phasor_round_trip",
            round,
            8.0 * f64::EPSILON,
            Bound::Le,
            "relative, 2000 random values".into(),
        ));
        self.push(check(
            "phasor_product_equivalence",
            product,
            16.0 * f64::EPSILON,
            Bound::Le,
            "relative to |z1||z2|".into(),
        ));
    }

    fn equivalence(&mut self) -> Result<(), CliError> {
        let count = self.config.scale.pick(40, 200);
        let (mut fwd, mut bwd_in, mut bwd_k): (f64, f64, f64) = (0.0, 0.0, 0.0);
        for _ in 0..count {
            let params = self.random_params(4, 8, 32);
            let x = random_tensor(&mut self.rng, params.input_dims());
            let w = random_tensor(&mut self.rng, params.kernel_dims());
            let g = random_tensor(&mut self.rng, params.output_dims());
            let mut outs = Vec::new();
            for backend in Backend::ALL {
                let e = self.engine(backend);
                let mut l = FlopLedger::new();
                outs.push((
                    e.forward(&x, &w, &params, &mut l)?,
                    e.backward_input(&g, &w, &params, &mut l)?,
                    e.backward_kernel(&g, &x, &params, &mut l)?,
                ));
            }
            for a in 0..outs.len() {
                for b in a + 1..outs.len() {
                    fwd = fwd.max(outs[a].0.max_abs_diff(&outs[b].0));
                    bwd_in = bwd_in.max(outs[a].1.max_abs_diff(&outs[b].1));
                    bwd_k = bwd_k.max(outs[a].2.max_abs_diff(&outs[b].2));
                }
            }
        }
        let detail = format!("{count} random geometries, pairwise over direct/rect/phasor, max abs");
        self.push(check("forward_equivalence", fwd, 1e-9, Bound::Le, detail.clone()));
        self.push(check(
            "backward_input_equivalence",
            bwd_in,
            1e-9,
            Bound::Le,
            detail.clone(),
        ));
        self.push(check("backward_kernel_equivalence", bwd_k, 1e-9, Bound::Le, detail));
        Ok(())
    }

    fn gradients(&mut self) -> Result<(), CliError> {
        let count = self.config.scale.pick(5, 20);
        let (mut ex, mut ew): (f64, f64) = (0.0, 0.0);
        let half_square = |y: &RealTensor4<f64>| y.data().iter().map(|v| v * v).sum::<f64>() / 2.0;
        for _ in 0..count {
            let params = self.random_params(2, 3, 6);
            let x = random_tensor(&mut self.rng, params.input_dims());
            let w = random_tensor(&mut self.rng, params.kernel_dims());
            for backend in Backend::ALL {
                let e = self.engine(backend);
                let mut l = FlopLedger::new();
                let y = e.forward(&x, &w, &params, &mut l)?;
                let dx = e.backward_input(&y, &w, &params, &mut l)?;
                let dw = e.backward_kernel(&y, &x, &params, &mut l)?;
                let nx = central_difference(&x, |t| {
                    Ok(half_square(&e.forward(t, &w, &params, &mut FlopLedger::new())?))
                })?;
                let nw = central_difference(&w, |t| {
                    Ok(half_square(&e.forward(&x, t, &params, &mut FlopLedger::new())?))
                })?;
                ex = ex.max(rel(&dx, &nx));
                ew = ew.max(rel(&dw, &nw));
            }
        }
        let detail = format!("L = Σy²/2, central h = 1e-6, {count} instances × 3 backends");
        self.push(check(
            "gradient_input_finite_difference",
            ex,
            1e-6,
            Bound::Le,
            detail.clone(),
        ));
        self.push(check("gradient_kernel_finite_difference", ew, 1e-6, Bound::Le, detail));
        Ok(())
    }

    fn counts(&mut self) -> Result<(), CliError> {
        let mut geometries: Vec<(usize, usize, usize, usize, usize, usize)> = vec![(2, 3, 4, 16, 3, 1)];
        for _ in 0..self.config.scale.pick(11, 29) {
            let p = self.random_params(3, 4, 16);
            geometries.push((
                p.batch(),
                p.in_channels(),
                p.out_channels(),
                p.image(),
                p.kernel(),
                p.padding(),
            ));
        }
        let (mut reduction_defect, mut reconcile_failures, mut worked) = (0u64, 0u64, 0u64);
        for (i, &(b, f1, f2, n, k, p)) in geometries.iter().enumerate() {
            let params = ConvParams::<f64>::new(b, f1, f2, n, k, p)?;
            let model = CostModel::new(b, f1, f2, n, k, p)?;
            let x = random_tensor(&mut self.rng, params.input_dims());
            let w = random_tensor(&mut self.rng, params.kernel_dims());
            let mut product = Vec::new();
            for backend in [Backend::SpectralRect, Backend::SpectralPhasor] {
                let e = self.engine(backend);
                let mut ledger = FlopLedger::new();
                let y = e.forward(&x, &w, &params, &mut ledger)?;
                if i == 0 {
                    worked += ledger.cost(Stage::SpectralProduct).mul;
                }
                e.backward_input(&y, &w, &params, &mut ledger)?;
                e.backward_kernel(&y, &x, &params, &mut ledger)?;
                if !reconcile(&ledger, &model)?.exact_match() {
                    reconcile_failures += 1;
                }
                product.push(ledger.cost(Stage::SpectralProduct));
            }
            let (r, ph) = (product[0], product[1]);
            reduction_defect += r.mul.abs_diff(4 * ph.mul) + r.mul_add().abs_diff(3 * ph.mul_add());
        }
        let n = geometries.len();
        self.push(check(
            "product_reduction_exact",
            reduction_defect as f64,
            0.0,
            Bound::Le,
            format!("Σ |rect.mul − 4·phasor.mul| + |rect.mul_add − 3·phasor.mul_add| over {n} geometries"),
        ));
        self.push(check(
            "reconcile_exact",
            reconcile_failures as f64,
            0.0,
            Bound::Le,
            format!("ledgers failing exact reconciliation, {n} geometries × 2 backends"),
        ));
        self.push(check(
            "worked_example_counts",
            worked.abs_diff(52_224 + 13_056) as f64,
            0.0,
            Bound::Le,
            "B=2 f1=3 f2=4 L=32 forward: 52,224 rect + 13,056 phasor multiplies".into(),
        ));
        Ok(())
    }

    fn network(&mut self) -> Result<(), CliError> {
        let config = NetConfig {
            in_channels: 1,
            filters: 3,
            image: 8,
            kernel: 3,
            padding: 1,
            classes: 3,
        };
        let data = SyntheticDataset::<f64>::generate(self.config.seed, 3, 8, 2)?;
        let batch = data.batch(&[0, 1]);
        let mut worst: f64 = 0.0;
        for backend in Backend::ALL {
            let net = TinyNet::<f64>::new(config, backend, self.config.seed)?.with_engine(self.engine(backend));
            let (_, grads) = loss_and_grads(&net, &batch, &mut FlopLedger::new())?;
            let loss = |n: &TinyNet<f64>, b: &Batch<f64>| -> Result<f64, CliError> {
                Ok(loss_and_grads(n, b, &mut FlopLedger::new())?.0)
            };
            let numeric = central_difference(&net.conv_w, |t| {
                let mut probe = net.clone();
                probe.conv_w = t.clone();
                loss(&probe, &batch)
            })?;
            worst = worst.max(rel(&grads.conv_w, &numeric));
            let numeric = central_difference(&batch.images, |t| {
                loss(
                    &net,
                    &Batch {
                        images: t.clone(),
                        labels: batch.labels.clone(),
                    },
                )
            })?;
            worst = worst.max(rel(&grads.input, &numeric));
        }
        self.push(check(
            "network_gradient_finite_difference",
            worst,
            1e-5,
            Bound::Le,
            "conv weights and input, 2-sample batch, 3 backends".into(),
        ));
        Ok(())
    }

    fn training(&mut self) -> Result<(), CliError> {
        let steps = self.config.scale.pick(40, 300);
        let run = |backend| train::<f64>(&TrainConfig::new(backend, steps, 0.05, 7));
        let rect = run(Backend::SpectralRect)?;
        let phasor = run(Backend::SpectralPhasor)?;
        self.push(check(
            "training_parity",
            phasor.max_relative_gap(&rect),
            1e-3,
            Bound::Le,
            format!("{steps} steps, seed 7, max per-step relative loss gap phasor vs rect"),
        ));
        let again = run(Backend::SpectralPhasor)?;
        let same = again.clone().without_timing() == phasor.clone().without_timing();
        self.push(check(
            "training_determinism",
            if same { 0.0 } else { 1.0 },
            0.0,
            Bound::Le,
            "repeat run differs (1) or matches (0)".into(),
        ));
        if self.config.scale == Scale::FullDesk {
            let direct = run(Backend::DirectSpatial)?;
            let accuracy = [&rect, &phasor, &direct]
                .iter()
                .map(|t| t.final_accuracy)
                .fold(f64::INFINITY, f64::min);
            self.push(check(
                "training_accuracy",
                accuracy,
                0.9,
                Bound::Ge,
                "minimum held-out accuracy over direct/rect/phasor".into(),
            ));
        }
        Ok(())
    }
}

pub fn run(config: &VerifyConfig) -> Result<VerifyReport, CliError> {
    let t0 = Instant::now();
    let mut suite = Suite {
        config: config.clone(),
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        checks: Vec::new(),
    };
    suite.fft()?;
    suite.complex_forms();
    suite.equivalence()?;
    suite.gradients()?;
    suite.counts()?;
    suite.network()?;
    suite.training()?;
    let passed = suite.checks.iter().all(|c| c.passed);
    Ok(VerifyReport {
        kind: "verify".into(),
        scale: config.scale,
        seed: config.seed,
        sabotage_conj: config.sabotage_conj,
        passed,
        checks: suite.checks,
        elapsed_ms: (!config.omit_timing).then(|| t0.elapsed().as_millis() as u64),
    })
}

impl VerifyReport {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let op = match c.bound {
                Bound::Le => "≤",
                Bound::Ge => "≥",
            };
            out.push_str(&format!(
                "{} {:<36} {:>12.3e} {op} {:<10.3e} {}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.measured,
                c.tolerance,
                c.detail
            ));
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        out.push_str(&format!("{} checks, {failed} failed\n", self.checks.len()));
        out
    }
}
