use onespike::data::SpikeSource;
use onespike::training::*;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let lr: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(1e-3);
    let epochs: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(10);
    let init = match args.get(3).map(String::as_str) { Some("wide") => InitScheme::Wide, _ => InitScheme::Uniform };
    let (train, test) = load_mnist(&mnist_dir(None), 100, Some(10_000), None).unwrap();
    let mut net = NetworkConfig::dense(784, &[1000, 10], ModelVariant::FastSingle, 100, 1.0);
    net.seed = 13;
    net.init = init;
    let tc = TrainConfig { epochs, lr, batch_size: 128, milestones: vec![15, 90, 120], adam: AdamConfig::default() };
    let mut tr = Trainer::<f32>::from_config(net, tc).unwrap();
    let sub = train.take(2000);
    for _ in 0..epochs {
        let m = tr.run_epoch(&train).unwrap();
        let e = evaluate(&tr.net, &test, 500).unwrap();
        let t = evaluate(&tr.net, &sub, 500).unwrap();
        println!("ep {} loss {:.4} acc {:.4} | train-eval {:.4} test {:.4} loss {:.4} spikes {:.1} ({:.0}s) n={}", m.epoch, m.loss, m.accuracy, t.accuracy, e.accuracy, e.loss, e.hidden_spikes_per_sample, m.seconds, SpikeSource::<f32>::len(&test));
    }
}
