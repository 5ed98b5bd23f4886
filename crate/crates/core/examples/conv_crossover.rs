//! Times both convolution backends across sequence lengths.
//!
//! `cargo run --release --example conv_crossover`

use std::time::Instant;

use onespike::fastpath::{decay_kernel, phi_with};
use onespike::numerics::{causal_conv_backward_opts, causal_conv_with, ConvBackend};
use onespike::Tensor;

fn ms<F: FnMut()>(reps: usize, mut f: F) -> f64 {
    f();
    let t = Instant::now();
    for _ in 0..reps {
        f();
    }
    t.elapsed().as_secs_f64() * 1e3 / reps as f64
}

fn main() {
    let (b, n) = (128, 100);
    println!("steps,direct_fwd_ms,transform_fwd_ms,direct_bwd_ms,transform_bwd_ms,direct_phi_ms,transform_phi_ms");
    for steps in [16usize, 32, 64, 96, 128, 192, 256, 384, 512, 1024] {
        let x = Tensor::<f32>::from_fn(&[b, n, steps], |i| ((i * 2654435761) % 7 == 0) as u8 as f32);
        let k = decay_kernel(&Tensor::full(&[n], 0.9f32), steps).unwrap();
        let reps = (20_000 / steps).clamp(2, 50);
        let mut row = vec![steps as f64];
        for be in [ConvBackend::Direct, ConvBackend::Transform] {
            row.push(ms(reps, || {
                causal_conv_with(&x, &k, be).unwrap();
            }));
        }
        for be in [ConvBackend::Direct, ConvBackend::Transform] {
            row.push(ms(reps, || {
                causal_conv_backward_opts(&x, &x, &k, be, true, true).unwrap();
            }));
        }
        for be in [ConvBackend::Direct, ConvBackend::Transform] {
            row.push(ms(reps, || {
                phi_with(&x, be).unwrap();
            }));
        }
        println!("{}", row.iter().map(|v| format!("{v:.2}")).collect::<Vec<_>>().join(","));
    }
}
