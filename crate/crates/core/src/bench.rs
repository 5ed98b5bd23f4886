//! Forward/backward timing of fast and sequential models over a parameter grid.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{gen_synthetic, DEFAULT_RATE_RANGE};
use crate::fastpath::{fast_layer_backward, fast_layer_forward};
use crate::neuron::{beta_from_tau, DEFAULT_SURROGATE_SLOPE};
use crate::numerics::{ConvBackend, Real, Tensor};
use crate::seq::{seq_layer_backward, seq_layer_forward, Firing, LayerGrads, LayerParams, SpikeMode};
use crate::training::{LayerTrace, ModelVariant};
use crate::{Error, Result};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Grid points whose estimated footprint exceeds this are skipped by default.
pub const DEFAULT_MEMORY_LIMIT: u64 = 3 << 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub units: Vec<usize>,
    pub steps: Vec<usize>,
    pub batches: Vec<usize>,
    pub layers: Vec<usize>,
    pub models: Vec<ModelVariant>,
    pub reps: usize,
    pub warmup: usize,
    /// One sweep per entry: `false` trains β, `true` freezes it.
    pub fixed_beta: Vec<bool>,
    pub seed: u64,
    pub memory_limit: u64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            units: vec![100],
            steps: vec![128],
            batches: vec![128],
            layers: vec![1],
            models: vec![ModelVariant::FastSingle, ModelVariant::SeqSingle],
            reps: 10,
            warmup: 3,
            fixed_beta: vec![false],
            seed: 0,
            memory_limit: DEFAULT_MEMORY_LIMIT,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.reps < 3 || self.warmup < 1 {
            return Err(Error::Config(format!(
                "need at least 3 repetitions and 1 warmup pass, got {} and {}",
                self.reps, self.warmup
            )));
        }
        let lists = [&self.units, &self.steps, &self.batches, &self.layers];
        if lists.iter().any(|l| l.is_empty() || l.contains(&0)) || self.models.is_empty() || self.fixed_beta.is_empty() {
            return Err(Error::Config("every sweep axis needs at least one positive value".into()));
        }
        Ok(())
    }
}

/// One timed grid point. Times are medians in milliseconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub model: String,
    pub n: usize,
    pub t: usize,
    pub b: usize,
    pub layers: usize,
    pub fwd_ms: f64,
    pub bwd_ms: f64,
    pub total_ms: f64,
    /// Median absolute deviation of the total.
    pub mad_ms: f64,
    /// Baseline total over this model's total; `None` on baseline rows.
    pub speedup_vs_seq: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedPoint {
    pub model: String,
    pub n: usize,
    pub t: usize,
    pub b: usize,
    pub layers: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub schema_version: u32,
    pub records: Vec<BenchRecord>,
    pub skipped: Vec<SkippedPoint>,
}

/// A stack of equally sized spiking layers; the benchmark loss is the sum of
/// the last layer's output spikes.
#[derive(Debug, Clone)]
pub struct BenchModel<T> {
    pub variant: ModelVariant,
    pub params: Vec<LayerParams<T>>,
    pub backend: ConvBackend,
    pub slope: T,
}

impl<T: Real> BenchModel<T> {
    pub fn new(variant: ModelVariant, n: usize, layers: usize, fixed_beta: bool, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bound = (1.0 / n as f64).sqrt();
        let beta = T::lit(beta_from_tau(10.0, 1.0)?);
        let params = (0..layers)
            .map(|_| {
                LayerParams::new(
                    Tensor::from_fn(&[n, n], |_| T::lit(rng.random_range(-bound..bound))),
                    Tensor::zeros(&[n]),
                    Tensor::full(&[n], beta),
                    !fixed_beta,
                )
            })
            .collect::<Result<_>>()?;
        Ok(BenchModel {
            variant,
            params,
            backend: ConvBackend::Auto,
            slope: T::lit(DEFAULT_SURROGATE_SLOPE),
        })
    }

    pub fn forward(&self, input: &Tensor<T>) -> Result<Vec<LayerTrace<T>>> {
        let mut traces: Vec<LayerTrace<T>> = Vec::with_capacity(self.params.len());
        for p in &self.params {
            let x = traces.last().map_or(input, |t| t.output());
            traces.push(match self.variant {
                ModelVariant::FastSingle => LayerTrace::Fast(fast_layer_forward(x, p, self.backend)?),
                ModelVariant::SeqSingle => LayerTrace::Seq(seq_layer_forward(x, p, Firing::Spiking(SpikeMode::Single))?),
                ModelVariant::SeqMulti => LayerTrace::Seq(seq_layer_forward(x, p, Firing::Spiking(SpikeMode::Multi))?),
            });
        }
        Ok(traces)
    }

    pub fn backward(&self, input: &Tensor<T>, traces: &[LayerTrace<T>]) -> Result<Vec<LayerGrads<T>>> {
        let top = traces.last().ok_or_else(|| Error::State("no traces".into()))?.output();
        let mut upstream = Tensor::full(top.shape(), T::one());
        let mut grads = Vec::with_capacity(traces.len());
        for l in (0..traces.len()).rev() {
            let x = if l == 0 { input } else { traces[l - 1].output() };
            let p = &self.params[l];
            let mut g = match &traces[l] {
                LayerTrace::Fast(t) => fast_layer_backward(t, x, p, &upstream, self.slope, l > 0, self.backend)?,
                LayerTrace::Seq(t) => seq_layer_backward(t, x, p, &upstream, self.slope, l > 0)?,
                LayerTrace::FastReadout(_) => return Err(Error::State("unexpected readout trace".into())),
            };
            if let Some(gi) = g.input.take() {
                upstream = gi;
            }
            grads.push(g);
        }
        grads.reverse();
        Ok(grads)
    }

    /// Rough peak bytes of one forward+backward pass.
    pub fn estimate_bytes(variant: ModelVariant, n: usize, t: usize, b: usize, layers: usize) -> u64 {
        let plane = (n * t * b) as u64 * std::mem::size_of::<T>() as u64;
        let per_layer = match variant {
            ModelVariant::FastSingle => 5,
            _ => 3,
        };
        // saved traces + gradient temporaries (including the f64 phi buffers)
        plane * (per_layer * layers as u64 + 8)
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Median timings of repeated passes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassTiming {
    pub fwd_ms: f64,
    pub bwd_ms: f64,
    pub total_ms: f64,
    pub mad_ms: f64,
}

/// Runs `warmup` untimed passes, then `reps` timed forward+backward passes.
pub fn time_pass<T: Real>(model: &BenchModel<T>, batch: &Tensor<T>, reps: usize, warmup: usize) -> Result<PassTiming> {
    if reps == 0 {
        return Err(Error::Config("need at least one repetition".into()));
    }
    let run = |model: &BenchModel<T>| -> Result<(f64, f64)> {
        let t0 = Instant::now();
        let traces = model.forward(batch)?;
        let t1 = Instant::now();
        let grads = model.backward(batch, &traces)?;
        let t2 = Instant::now();
        if grads.iter().any(|g| !g.weights.all_finite()) {
            return Err(Error::Numeric(format!("non-finite gradient in {} benchmark", model.variant)));
        }
        let ms = |d: std::time::Duration| d.as_secs_f64() * 1e3;
        Ok((ms(t1 - t0), ms(t2 - t1)))
    };
    for _ in 0..warmup {
        run(model)?;
    }
    let (mut f, mut b, mut tot) = (Vec::with_capacity(reps), Vec::with_capacity(reps), Vec::with_capacity(reps));
    for _ in 0..reps {
        let (fw, bw) = run(model)?;
        f.push(fw);
        b.push(bw);
        tot.push(fw + bw);
    }
    let total_ms = median(&mut tot);
    let mut dev: Vec<f64> = tot.iter().map(|x| (x - total_ms).abs()).collect();
    Ok(PassTiming {
        fwd_ms: median(&mut f),
        bwd_ms: median(&mut b),
        total_ms,
        mad_ms: median(&mut dev),
    })
}

fn model_id(variant: ModelVariant, fixed_beta: bool) -> String {
    if fixed_beta {
        format!("{}+fixed-beta", variant.id())
    } else {
        variant.id().to_string()
    }
}

/// Times every grid point and model. Speedups are relative to `seq-single`
/// at the same point and β mode.
pub fn run_sweep<T: Real>(spec: &SweepSpec) -> Result<SweepReport> {
    spec.validate()?;
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for &fixed in &spec.fixed_beta {
        for &layers in &spec.layers {
            for &n in &spec.units {
                for &t in &spec.steps {
                    for &b in &spec.batches {
                        let input = gen_synthetic::<T>(b, n, t, 1.0, DEFAULT_RATE_RANGE, spec.seed)?;
                        let mut point: Vec<(ModelVariant, BenchRecord)> = Vec::new();
                        for &variant in &spec.models {
                            let need = BenchModel::<T>::estimate_bytes(variant, n, t, b, layers);
                            if need > spec.memory_limit {
                                skipped.push(SkippedPoint {
                                    model: model_id(variant, fixed),
                                    n,
                                    t,
                                    b,
                                    layers,
                                    reason: format!("estimated {} MiB exceeds limit of {} MiB", need >> 20, spec.memory_limit >> 20),
                                });
                                continue;
                            }
                            let model = BenchModel::<T>::new(variant, n, layers, fixed, spec.seed)?;
                            let tm = time_pass(&model, &input, spec.reps, spec.warmup)?;
                            point.push((
                                variant,
                                BenchRecord {
                                    model: model_id(variant, fixed),
                                    n,
                                    t,
                                    b,
                                    layers,
                                    fwd_ms: tm.fwd_ms,
                                    bwd_ms: tm.bwd_ms,
                                    total_ms: tm.total_ms,
                                    mad_ms: tm.mad_ms,
                                    speedup_vs_seq: None,
                                },
                            ));
                        }
                        let base = point
                            .iter()
                            .find(|(v, _)| *v == ModelVariant::SeqSingle)
                            .map(|(_, r)| r.total_ms);
                        for (v, mut r) in point {
                            if v != ModelVariant::SeqSingle {
                                r.speedup_vs_seq = base.map(|s| s / r.total_ms);
                            }
                            records.push(r);
                        }
                    }
                }
            }
        }
    }
    Ok(SweepReport {
        schema_version: REPORT_SCHEMA_VERSION,
        records,
        skipped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    /// `.json` means JSON, anything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => ReportFormat::Json,
            _ => ReportFormat::Csv,
        }
    }
}

pub const CSV_HEADER: &str = "model,n,t,b,layers,fwd_ms,bwd_ms,total_ms,mad_ms,speedup_vs_seq";

pub fn report_csv(records: &[BenchRecord]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in records {
        let speedup = r.speedup_vs_seq.map(|x| format!("{x:.4}")).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{:.4},{:.4},{:.4},{:.4},{}",
            r.model, r.n, r.t, r.b, r.layers, r.fwd_ms, r.bwd_ms, r.total_ms, r.mad_ms, speedup
        );
    }
    s
}

pub fn emit_report(report: &SweepReport, path: impl AsRef<Path>, format: ReportFormat) -> Result<()> {
    if report.records.is_empty() {
        return Err(Error::Config("no benchmark records to write".into()));
    }
    let body = match format {
        ReportFormat::Csv => report_csv(&report.records),
        ReportFormat::Json => serde_json::to_string_pretty(report).map_err(|e| Error::Format(e.to_string()))?,
    };
    std::fs::write(path, body)?;
    Ok(())
}

pub fn read_report_json(path: impl AsRef<Path>) -> Result<SweepReport> {
    let r: SweepReport = serde_json::from_slice(&std::fs::read(path)?).map_err(|e| Error::Format(e.to_string()))?;
    if r.schema_version != REPORT_SCHEMA_VERSION {
        return Err(Error::Format(format!("unsupported report schema {}", r.schema_version)));
    }
    Ok(r)
}
