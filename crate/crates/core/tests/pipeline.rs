//! End-to-end behaviour across modules: networks built from the same
//! parameters under both simulators, file round trips, and timing shape.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use onespike::bench::{time_pass, BenchModel};
use onespike::data::{gen_synthetic, load_spikes, save_spikes, DatasetMeta, EncodedDataset, SpikeSource};
use onespike::training::{
    load_checkpoint, save_checkpoint, AdamConfig, yinyang_splits, ModelVariant, Network, NetworkConfig, TrainConfig, Trainer,
};
use onespike::Tensor;

fn random_net(variant: ModelVariant, sizes: &[usize], inputs: usize, steps: usize, seed: u64, gain: f64) -> Network<f64> {
    let mut cfg = NetworkConfig::dense(inputs, sizes, variant, steps, 1.0);
    cfg.seed = seed;
    let mut net = Network::<f64>::new(cfg).unwrap();
    // push the hidden layers into the spiking regime
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for p in &mut net.layers {
        for w in p.weights.data_mut() {
            *w = *w * gain + rng.random_range(0.0..gain);
        }
    }
    net
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fast_and_sequential_networks_agree(
        seed in 0u64..10_000,
        b in 1usize..4,
        inputs in 1usize..12,
        h1 in 1usize..16,
        h2 in 1usize..16,
        steps in 1usize..60,
        gain in 1.0f64..30.0,
        density in 0.05f64..0.6,
    ) {
        let sizes = [h1, h2, 3];
        let fast = random_net(ModelVariant::FastSingle, &sizes, inputs, steps, seed, gain);
        let mut seq = fast.clone();
        seq.cfg.variant = ModelVariant::SeqSingle;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let x = Tensor::from_fn(&[b, inputs, steps], |_| if rng.random_bool(density) { 1.0 } else { 0.0 });
        let tf = fast.forward(&x).unwrap();
        let ts = seq.forward(&x).unwrap();
        for l in 0..2 {
            prop_assert_eq!(tf.layers[l].output(), ts.layers[l].output());
        }
        let diff = fast.scores(&tf).unwrap().max_abs_diff(&seq.scores(&ts).unwrap()).unwrap();
        prop_assert!(diff < 1e-9, "scores differ by {}", diff);
    }
}

#[test]
fn checkpoint_round_trip_preserves_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let (train, test) = yinyang_splits(256, 64, 4, 30).unwrap();
    let net = NetworkConfig::dense(4, &[12, 3], ModelVariant::FastSingle, 30, 1.0);
    let tc = TrainConfig {
        epochs: 2,
        lr: 1e-3,
        batch_size: 64,
        milestones: vec![],
        adam: AdamConfig::default(),
    };
    let mut tr = Trainer::<f32>::from_config(net, tc).unwrap();
    tr.run_epoch(&train).unwrap();
    let path = dir.path().join("m.snnc");
    save_checkpoint(&path, &tr).unwrap();
    let back = load_checkpoint::<f32>(&path).unwrap();
    assert_eq!(back.epoch, 1);
    assert_eq!(back.net.layers, tr.net.layers);

    let (x, _) = SpikeSource::<f32>::batch(&test, &(0..64).collect::<Vec<_>>()).unwrap();
    let a = tr.net.scores(&tr.net.forward(&x).unwrap()).unwrap();
    let b = back.net.scores(&back.net.forward(&x).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn spike_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let spikes = gen_synthetic::<f32>(5, 7, 33, 1.0, (0.0, 200.0), 9).unwrap();
    let meta = DatasetMeta {
        steps: 33,
        dt_ms: 1.0,
        inputs: 7,
        classes: 2,
        encoder: "synthetic".into(),
        seed: 9,
    };
    let ds = EncodedDataset::from_spikes(&spikes, vec![0, 1, 1, 0, 1], meta).unwrap();
    let path = dir.path().join("s.snnt");
    save_spikes(&path, &ds).unwrap();
    let back = load_spikes(&path).unwrap();
    assert_eq!(back.spikes::<f32>(), spikes);
    assert_eq!(SpikeSource::<f32>::labels(&back), &[0, 1, 1, 0, 1]);
}

#[test]
fn sequential_cost_is_linear_in_steps() {
    let model = BenchModel::<f32>::new(ModelVariant::SeqSingle, 64, 1, false, 0).unwrap();
    let time = |t: usize| {
        let x = gen_synthetic::<f32>(32, 64, t, 1.0, (0.0, 200.0), 1).unwrap();
        time_pass(&model, &x, 7, 2).unwrap().total_ms
    };
    let (short, long) = (time(256), time(512));
    let ratio = long / short;
    assert!((1.7..=2.5).contains(&ratio), "T 256 -> 512 took {short:.2} -> {long:.2} ms (ratio {ratio:.2})");
}
