use phasorconv::nn::{loss_and_grads, sgd_step, train, NetConfig, SyntheticDataset, TinyNet, TrainConfig};
use phasorconv::{Backend, FlopLedger};

#[test]
fn default_run_learns_with_backend_parity() {
    let rect = train::<f64>(&TrainConfig::new(Backend::SpectralRect, 300, 0.05, 7)).unwrap();
    let phasor = train::<f64>(&TrainConfig::new(Backend::SpectralPhasor, 300, 0.05, 7)).unwrap();
    let direct = train::<f64>(&TrainConfig::new(Backend::DirectSpatial, 300, 0.05, 7)).unwrap();
    assert_eq!(rect.losses.len(), 301);
    assert!(phasor.max_relative_gap(&rect) <= 1e-3);
    for (d, r) in direct.losses.iter().zip(&rect.losses) {
        assert!((d - r).abs() <= 1e-6);
    }
    for t in [&rect, &phasor, &direct] {
        assert!(t.final_accuracy >= 0.9, "{}: {}", t.backend, t.final_accuracy);
        assert!(t.losses[300] < t.losses[0]);
    }
}

#[test]
fn zero_steps_records_the_initial_loss() {
    let t = train::<f64>(&TrainConfig::new(Backend::SpectralPhasor, 0, 0.05, 7)).unwrap();
    assert_eq!(t.losses.len(), 1);
    assert!((t.losses[0] - 4f64.ln()).abs() < 0.1, "{}", t.losses[0]);
}

#[test]
fn identical_seeds_give_bitwise_identical_parameters() {
    let run = || {
        let mut net = TinyNet::<f64>::new(NetConfig::default(), Backend::SpectralPhasor, 42).unwrap();
        let data = SyntheticDataset::generate(42, 4, 12, 40).unwrap();
        for step in 0..10 {
            let idx: Vec<usize> = (0..4).map(|i| (step * 4 + i) % 40).collect();
            let (_, g) = loss_and_grads(&net, &data.batch(&idx), &mut FlopLedger::new()).unwrap();
            sgd_step(&mut net, &g, 0.05).unwrap();
        }
        net
    };
    let (a, b) = (run(), run());
    assert_eq!(a.conv_w, b.conv_w);
    assert_eq!(a.dense_w, b.dense_w);
    assert_eq!(a.dense_b, b.dense_b);
}

#[test]
fn traces_are_deterministic_and_serializable() {
    let config = TrainConfig {
        train_samples: 64,
        test_samples: 32,
        ..TrainConfig::new(Backend::SpectralPhasor, 20, 0.05, 3)
    };
    let a = train::<f32>(&config).unwrap().without_timing();
    let b = train::<f32>(&config).unwrap().without_timing();
    assert_eq!(a, b);
    assert_eq!(a.scalar, "f32");
    assert!(a.ops.iter().all(|c| c.mul > 0));
}
