mod common;

use common::*;
use phasorconv::convengine::{backward_input, backward_kernel, forward};
use phasorconv::flops::{flops_baseline_paper, flops_phasor_model, reconcile, ElementConvention, ProductForm};
use phasorconv::{Backend, ConvParams, CostModel, Error, FlopLedger, OpCost, Stage};
use proptest::prelude::*;

fn run_all(backend: Backend, params: &ConvParams<f64>, seed: u64) -> FlopLedger {
    let mut r = rng(seed);
    let x = random_tensor(&mut r, params.input_dims());
    let w = random_tensor(&mut r, params.kernel_dims());
    let mut ledger = FlopLedger::new();
    let y = forward(&x, &w, params, backend, &mut ledger).unwrap();
    backward_input(&y, &w, params, backend, &mut ledger).unwrap();
    backward_kernel(&y, &x, params, backend, &mut ledger).unwrap();
    ledger
}

/// Hand count of product pairs for forward + both backward ops:
/// every op pairs `B·f₁·f₂` planes, each over `L·(L/2+1)` elements.
fn expected_pairs(b: u64, f1: u64, f2: u64, l: u64) -> u64 {
    3 * b * f1 * f2 * l * (l / 2 + 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn product_stage_reduction_is_exact(b in 0usize..=3, f1 in 1usize..=4, f2 in 1usize..=4, n in 3usize..=12, k in 1usize..=3, p in 0usize..=2) {
        let params = ConvParams::<f64>::new(b, f1, f2, n, k, p).unwrap();
        let rect = run_all(Backend::SpectralRect, &params, 1).cost(Stage::SpectralProduct);
        let phasor = run_all(Backend::SpectralPhasor, &params, 1).cost(Stage::SpectralProduct);
        let pairs = expected_pairs(b as u64, f1 as u64, f2 as u64, params.plan().fft_len() as u64);
        prop_assert_eq!(rect, OpCost::new(4 * pairs, 2 * pairs, 0, 0, 0));
        prop_assert_eq!(phasor, OpCost::new(pairs, pairs, 0, 0, 0));
        prop_assert_eq!(rect.mul, 4 * phasor.mul);
        prop_assert_eq!(rect.mul_add(), 3 * phasor.mul_add());
    }

    #[test]
    fn reconcile_is_exact_for_every_call_mix(b in 1usize..=3, f1 in 1usize..=4, f2 in 1usize..=4, n in 3usize..=12, k in 1usize..=3, p in 0usize..=2) {
        let params = ConvParams::<f64>::new(b, f1, f2, n, k, p).unwrap();
        let model = CostModel::new(b, f1, f2, n, k, p).unwrap();
        for backend in [Backend::SpectralRect, Backend::SpectralPhasor] {
            let report = reconcile(&run_all(backend, &params, 2), &model).unwrap();
            prop_assert!(report.exact_match(), "{backend}: {report:?}");
        }
    }
}

#[test]
fn worked_example_counts() {
    let params = ConvParams::<f64>::new(2, 3, 4, 16, 3, 1).unwrap();
    assert_eq!(params.plan().fft_len(), 32);
    let mut r = rng(3);
    let x = random_tensor(&mut r, params.input_dims());
    let w = random_tensor(&mut r, params.kernel_dims());
    let model = CostModel::new(2, 3, 4, 16, 3, 1).unwrap();
    let mut muls = Vec::new();
    for backend in [Backend::SpectralRect, Backend::SpectralPhasor] {
        let mut ledger = FlopLedger::new();
        forward(&x, &w, &params, backend, &mut ledger).unwrap();
        let report = reconcile(&ledger, &model).unwrap();
        assert!(report.exact_match());
        for stage in [
            Stage::SpectralProduct,
            Stage::PhasorConvertIn,
            Stage::PhasorConvertOut,
            Stage::ChannelReduce,
        ] {
            assert!(report.stage(stage).matches, "{backend} {stage}");
        }
        muls.push(ledger.cost(Stage::SpectralProduct).mul);
    }
    assert_eq!(muls, vec![52_224, 13_056]);
}

#[test]
fn conversion_counts_are_itemized() {
    // B=2, f₁=3, f₂=4, L=32: 2·3 input spectra and 4·3 kernel spectra in,
    // one conversion out per product pair.
    let params = ConvParams::<f64>::new(2, 3, 4, 16, 3, 1).unwrap();
    let mut r = rng(4);
    let x = random_tensor(&mut r, params.input_dims());
    let w = random_tensor(&mut r, params.kernel_dims());
    let mut ledger = FlopLedger::new();
    forward(&x, &w, &params, Backend::SpectralPhasor, &mut ledger).unwrap();
    let e = 32 * 17;
    assert_eq!(
        ledger.cost(Stage::PhasorConvertIn),
        OpCost::new(2, 1, 0, 1, 1).times((6 + 12) * e)
    );
    assert_eq!(
        ledger.cost(Stage::PhasorConvertOut),
        OpCost::new(2, 0, 0, 0, 2).times(24 * e)
    );
    assert_eq!(ledger.wraps(), 24 * e);
    assert_eq!(ledger.transforms(Stage::RfftInput), 6);
    assert_eq!(ledger.transforms(Stage::RfftKernel), 12);
    assert_eq!(ledger.transforms(Stage::IrfftOutput), 8);
}

#[test]
fn direct_and_zero_batch_charge_nothing() {
    let params = ConvParams::<f64>::new(0, 3, 4, 8, 3, 1).unwrap();
    for backend in Backend::ALL {
        let ledger = run_all(backend, &params, 5);
        assert!(ledger.total().is_zero(), "{backend}");
        assert_eq!(ledger.wraps(), 0);
    }
    let ledger = run_all(Backend::DirectSpatial, &ConvParams::new(2, 2, 2, 8, 3, 1).unwrap(), 5);
    assert!(ledger.total().is_zero());
}

#[test]
fn reconcile_rejects_other_geometry() {
    let params = ConvParams::<f64>::new(2, 3, 4, 16, 3, 1).unwrap();
    let ledger = run_all(Backend::SpectralRect, &params, 6);
    let other = CostModel::new(2, 3, 5, 16, 3, 1).unwrap();
    assert!(matches!(reconcile(&ledger, &other), Err(Error::GeometryMismatch(_))));
}

#[test]
fn analytical_models_agree_with_hand_values() {
    let base = CostModel::new(1, 1, 1, 2, 1, 0).unwrap().with_c_fft(1.0);
    assert_eq!(flops_baseline_paper(&base), 40.0);
    let m = CostModel::new(8, 3, 4, 16, 3, 1)
        .unwrap()
        .with_convention(ElementConvention::PaperN)
        .with_form(ProductForm::Phasor);
    let breakdown = flops_phasor_model(&m);
    assert_eq!(breakdown.phasor_product.mul, 24_576);
    assert_eq!(breakdown.rect_product.mul, 4 * 24_576);
    assert_eq!(breakdown.multiply_reduction, 4.0);
    assert_eq!(breakdown.mul_add_reduction, 3.0);
}
