use onespike::data::{gen_yinyang, TtfsDataset, TtfsEncoderCfg};
use onespike::training::*;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let variant: ModelVariant = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(ModelVariant::FastSingle);
    let init = match args.get(2).map(String::as_str) { Some("zero") => InitScheme::Zero, Some("uniform") => InitScheme::Uniform, _ => InitScheme::Wide };
    let epochs: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(30);
    let lr: f64 = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(1e-3);
    let milestones: Vec<usize> = args.get(5).map(|s| s.split(',').filter(|x| !x.is_empty()).map(|x| x.parse().unwrap()).collect()).unwrap_or(vec![50, 100]);
    let enc = TtfsEncoderCfg { i_max: 1.0, steps: 100 };
    let (x, y) = gen_yinyang::<f64>(20000, 1).unwrap();
    let train_ds = TtfsDataset::from_tensor(&x, y, 3, enc).unwrap();
    let (x, y) = gen_yinyang::<f64>(10000, 2).unwrap();
    let test_ds = TtfsDataset::from_tensor(&x, y, 3, enc).unwrap();
    let mut cfg = NetworkConfig::dense(4, &[120, 10], variant, 100, 1.0);
    cfg.init = init;
    let tc = TrainConfig { epochs, lr, batch_size: 128, milestones, adam: AdamConfig::default() };
    let mut tr = Trainer::<f32>::from_config(cfg, tc).unwrap();
    for _ in 0..epochs {
        let m = tr.run_epoch(&train_ds).unwrap();
        let e = evaluate(&tr.net, &test_ds, 1000).unwrap();
        let stats: Vec<String> = tr.net.layers.iter().map(|l| {
            let b = l.beta.data();
            let (lo, hi) = b.iter().fold((f32::MAX, f32::MIN), |(a, c), &x| (a.min(x), c.max(x)));
            let ones = b.iter().filter(|&&x| x >= 1.0).count();
            let wmax = l.weights.data().iter().fold(0f32, |a, &x| a.max(x.abs()));
            let bmax = l.bias.data().iter().fold(0f32, |a, &x| a.max(x.abs()));
            format!("beta[{lo:.3},{hi:.3}] at1={ones} |w|max={wmax:.2} |b|max={bmax:.2}")
        }).collect();
        println!("   {}", stats.join(" / "));
        println!("ep {} loss {:.4} acc {:.4} act {:.4} | test {:.4} spikes/sample {:.2} ({:.1}s)", m.epoch, m.loss, m.accuracy, m.hidden_spikes_per_neuron, e.accuracy, e.hidden_spikes_per_sample, m.seconds);
    }
}
