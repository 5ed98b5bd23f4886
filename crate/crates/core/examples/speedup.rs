//! Fast vs sequential single-spike timing at n=100, b=128.
//!
//! `cargo run --release --example speedup -- 128,512,2048`

#[global_allocator]
static ALLOC: mimalloc::MiMalloc = mimalloc::MiMalloc;

use onespike::bench::{report_csv, run_sweep, SweepSpec};

fn main() {
    let steps: Vec<usize> = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "128,512,2048".into())
        .split(',')
        .map(|s| s.parse().expect("step count"))
        .collect();
    let spec = SweepSpec {
        steps,
        reps: 3,
        warmup: 1,
        ..Default::default()
    };
    let report = run_sweep::<f32>(&spec).expect("sweep");
    print!("{}", report_csv(&report.records));
}
