//! Runtime operation ledger and analytical cost models.

mod model;

pub use model::{
    flops_baseline_paper, flops_phasor_model, predict_call, reconcile, CostModel, ElementConvention,
    PhasorCostBreakdown, ProductForm, ReconcileReport, StageCheck, StagePrediction,
};

use std::fmt;
use std::ops::{Index, IndexMut};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::complexforms::OpCost;
use crate::convengine::{Backend, ConvOp};

/// Pipeline stage an operation is charged to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    RfftInput,
    RfftKernel,
    SpectralProduct,
    ChannelReduce,
    PhasorConvertIn,
    PhasorConvertOut,
    IrfftOutput,
    CropPad,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::RfftInput,
        Stage::RfftKernel,
        Stage::PhasorConvertIn,
        Stage::SpectralProduct,
        Stage::PhasorConvertOut,
        Stage::ChannelReduce,
        Stage::IrfftOutput,
        Stage::CropPad,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            Stage::RfftInput => "rfft_input",
            Stage::RfftKernel => "rfft_kernel",
            Stage::SpectralProduct => "spectral_product",
            Stage::ChannelReduce => "channel_reduce",
            Stage::PhasorConvertIn => "phasor_convert_in",
            Stage::PhasorConvertOut => "phasor_convert_out",
            Stage::IrfftOutput => "irfft_output",
            Stage::CropPad => "crop_pad",
        }
    }

    const fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-stage table indexed by [`Stage`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PerStage<V>([V; 8]);

impl<V> Index<Stage> for PerStage<V> {
    type Output = V;

    fn index(&self, s: Stage) -> &V {
        &self.0[s.slot()]
    }
}

impl<V> IndexMut<Stage> for PerStage<V> {
    fn index_mut(&mut self, s: Stage) -> &mut V {
        &mut self.0[s.slot()]
    }
}

/// Geometry and backend of one engine call, recorded so that a ledger can be
/// reconciled against a cost model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallRecord {
    pub op: ConvOp,
    pub backend: Backend,
    pub batch: usize,
    pub in_channels: usize,
    pub out_channels: usize,
    pub image: usize,
    pub kernel: usize,
    pub padding: usize,
    pub fft_len: usize,
}

/// Operation counters split by pipeline stage.
///
/// Counts only grow. Merging two ledgers sums them componentwise.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FlopLedger {
    costs: PerStage<OpCost>,
    transforms: PerStage<u64>,
    wraps: u64,
    calls: Vec<CallRecord>,
}

impl FlopLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn charge(&mut self, stage: Stage, cost: OpCost) {
        self.costs[stage] += cost;
    }

    /// Records `n` 2-D transforms executed in `stage`.
    pub fn count_transforms(&mut self, stage: Stage, n: u64) {
        self.transforms[stage] += n;
    }

    /// Records `n` angle normalizations, kept apart from the arithmetic
    /// counters.
    pub fn count_wraps(&mut self, n: u64) {
        self.wraps += n;
    }

    pub fn record_call(&mut self, call: CallRecord) {
        self.calls.push(call);
    }

    pub fn cost(&self, stage: Stage) -> OpCost {
        self.costs[stage]
    }

    pub fn transforms(&self, stage: Stage) -> u64 {
        self.transforms[stage]
    }

    pub fn wraps(&self) -> u64 {
        self.wraps
    }

    pub fn calls(&self) -> &[CallRecord] {
        &self.calls
    }

    pub fn total(&self) -> OpCost {
        Stage::ALL.iter().map(|&s| self.costs[s]).sum()
    }

    pub fn merge(&mut self, other: &FlopLedger) {
        for s in Stage::ALL {
            self.costs[s] += other.costs[s];
            self.transforms[s] += other.transforms[s];
        }
        self.wraps += other.wraps;
        self.calls.extend_from_slice(&other.calls);
    }

    /// Counter-only view, for comparisons that should ignore call history.
    pub fn counters(&self) -> (PerStage<OpCost>, PerStage<u64>, u64) {
        (self.costs, self.transforms, self.wraps)
    }
}

/// Wall time per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StageTimes(PerStage<Duration>);

impl StageTimes {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, stage: Stage, d: Duration) {
        self.0[stage] += d;
    }

    pub fn get(&self, stage: Stage) -> Duration {
        self.0[stage]
    }

    pub fn total(&self) -> Duration {
        Stage::ALL.iter().map(|&s| self.0[s]).sum()
    }

    pub fn merge(&mut self, other: &StageTimes) {
        for s in Stage::ALL {
            self.0[s] += other.0[s];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ledger_from(v: &[u64]) -> FlopLedger {
        let mut l = FlopLedger::new();
        for (i, &x) in v.iter().enumerate() {
            let s = Stage::ALL[i % 8];
            l.charge(s, OpCost::new(x, 2 * x, 0, x % 3, x % 5));
            l.count_transforms(s, x % 7);
            l.count_wraps(x % 11);
        }
        l
    }

    #[test]
    fn new_ledger_is_zero() {
        let l = FlopLedger::new();
        assert!(l.total().is_zero());
        assert_eq!(l.wraps(), 0);
        assert!(Stage::ALL.iter().all(|&s| l.transforms(s) == 0));
    }

    #[test]
    fn stage_names_are_unique() {
        let mut names: Vec<_> = Stage::ALL.iter().map(|s| s.name()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 8);
    }

    proptest! {
        #[test]
        fn merge_is_commutative_and_associative(
            a in proptest::collection::vec(0u64..1000, 0..12),
            b in proptest::collection::vec(0u64..1000, 0..12),
            c in proptest::collection::vec(0u64..1000, 0..12),
        ) {
            let (la, lb, lc) = (ledger_from(&a), ledger_from(&b), ledger_from(&c));
            let mut ab = la.clone();
            ab.merge(&lb);
            let mut ba = lb.clone();
            ba.merge(&la);
            prop_assert_eq!(ab.counters(), ba.counters());

            let mut ab_c = ab.clone();
            ab_c.merge(&lc);
            let mut bc = lb.clone();
            bc.merge(&lc);
            let mut a_bc = la.clone();
            a_bc.merge(&bc);
            prop_assert_eq!(ab_c, a_bc);
        }

        #[test]
        fn charges_never_decrease(v in proptest::collection::vec(0u64..1000, 1..20)) {
            let mut l = FlopLedger::new();
            let mut prev = l.total();
            for (i, &x) in v.iter().enumerate() {
                l.charge(Stage::ALL[i % 8], OpCost::new(x, x, 0, 0, 0));
                let now = l.total();
                prop_assert!(now.mul >= prev.mul && now.add >= prev.add);
                prev = now;
            }
        }
    }
}
