//! `flops` and `train` subcommands.

use phasorconv::flops::{
    flops_baseline_paper, flops_phasor_model, ElementConvention, PhasorCostBreakdown, ProductForm,
};
use phasorconv::nn::{train, TrainConfig, TrainTrace};
use phasorconv::{Backend, CostModel, Real};
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct FlopsReport {
    pub kind: String,
    pub model: CostModel,
    /// `2·C·N²·log₂N·[B·f₁ + B·f₂ + f₂·f₁] + 4·B·f₂·f₁·N²`, always at `N`.
    pub baseline: f64,
    pub baseline_fft_term: f64,
    pub baseline_product_term: u64,
    pub phasor: PhasorCostBreakdown,
    /// FFT term plus phasor product and both conversions (mul + add).
    pub phasor_total: f64,
    /// FFT term plus rectangular product (mul + add).
    pub rect_total: f64,
}

pub fn flops_report(model: CostModel) -> FlopsReport {
    let textbook = model
        .with_convention(ElementConvention::PaperN)
        .with_form(ProductForm::Rect);
    let phasor = flops_phasor_model(&model.with_form(ProductForm::Phasor));
    FlopsReport {
        kind: "flops".into(),
        model,
        baseline: flops_baseline_paper(&model),
        baseline_fft_term: textbook.fft_term(),
        baseline_product_term: textbook.product_multiplies(),
        phasor_total: phasor.fft + phasor.phasor_total_mul_add() as f64,
        rect_total: phasor.fft + phasor.rect_product.mul_add() as f64,
        phasor,
    }
}

impl FlopsReport {
    pub fn to_table(&self) -> String {
        let m = &self.model;
        let p = &self.phasor;
        let convention = match m.convention {
            ElementConvention::PaperN => "paper-n",
            ElementConvention::ImplementedL => "impl-l",
        };
        let mut out = format!(
            "B={} f1={} f2={} N={} K={} P={} L={} C={} variant={convention}\n\n",
            m.batch, m.in_channels, m.out_channels, m.image, m.kernel, m.padding, m.fft_len, m.c_fft
        );
        out.push_str("baseline 2·C·N²·log2N·[B·f1 + B·f2 + f2·f1] + 4·B·f2·f1·N²\n");
        out.push_str(&format!("  fft term       {:>20.1}\n", self.baseline_fft_term));
        out.push_str(&format!("  product term   {:>20}\n", self.baseline_product_term));
        out.push_str(&format!("  total          {:>20.1}\n\n", self.baseline));
        out.push_str(&format!(
            "itemized forward pass, {} spectral elements per slab\n",
            p.elements
        ));
        out.push_str(&format!(
            "  {:<22} {:>14} {:>14} {:>12} {:>12}\n",
            "", "mul", "add", "sqrt", "trig"
        ));
        for (name, c) in [
            ("rect product", p.rect_product),
            ("phasor product", p.phasor_product),
            ("convert in", p.convert_in),
            ("convert out", p.convert_out),
        ] {
            out.push_str(&format!(
                "  {:<22} {:>14} {:>14} {:>12} {:>12}\n",
                name, c.mul, c.add, c.sqrt, c.trig
            ));
        }
        out.push_str(&format!("  fft term       {:>20.1}\n", p.fft));
        out.push_str(&format!("  rect total     {:>20.1}\n", self.rect_total));
        out.push_str(&format!(
            "  phasor total   {:>20.1}  (conversions included)\n\n",
            self.phasor_total
        ));
        out.push_str(&format!(
            "product-stage reduction: {:.2}× (multiplies), {:.2}× (mul+add)\n",
            p.multiply_reduction, p.mul_add_reduction
        ));
        out
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct TrainComparison {
    pub baseline: Backend,
    pub candidate: Backend,
    /// Largest per-step `|candidate − baseline| / |baseline|` loss gap.
    pub max_relative_gap: f64,
    /// Total candidate time over total baseline time.
    pub time_ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct TrainReport {
    pub kind: String,
    pub traces: Vec<TrainTrace>,
    pub comparison: Option<TrainComparison>,
}

pub fn train_report<T: Real>(
    base: &TrainConfig,
    backends: &[Backend],
    omit_timing: bool,
) -> Result<TrainReport, CliError> {
    let mut traces = Vec::with_capacity(backends.len());
    for &backend in backends {
        let trace = train::<T>(&TrainConfig {
            backend,
            ..base.clone()
        })?;
        traces.push(if omit_timing { trace.without_timing() } else { trace });
    }
    let comparison = match traces.as_slice() {
        [a, b] => Some(TrainComparison {
            baseline: a.backend,
            candidate: b.backend,
            max_relative_gap: b.max_relative_gap(a),
            time_ratio: (!omit_timing && a.total_nanos() > 0).then(|| b.total_nanos() as f64 / a.total_nanos() as f64),
        }),
        _ => None,
    };
    Ok(TrainReport {
        kind: "train".into(),
        traces,
        comparison,
    })
}

impl TrainReport {
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for t in &self.traces {
            out.push_str(&format!(
                "{} {}: {} steps, loss {:.6} → {:.6}, held-out accuracy {:.3}, {:.1} ms\n",
                t.backend,
                t.scalar,
                t.steps,
                t.losses[0],
                t.losses[t.losses.len() - 1],
                t.final_accuracy,
                t.total_nanos() as f64 / 1e6
            ));
        }
        if let Some(c) = &self.comparison {
            let ratio = c.time_ratio.map_or("-".to_string(), |r| format!("{r:.3}"));
            out.push_str(&format!(
                "{} vs {}: max per-step relative loss gap {:.3e}, time ratio {ratio}\n",
                c.candidate, c.baseline, c.max_relative_gap
            ));
        }
        out
    }
}
