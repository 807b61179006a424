//! `vocoder`: command-line front end for the neural vocoder engine.
//!
//! Subcommands: `features` (OPNV dump → feature matrix), `synth` (feature
//! matrix + model → WAV), `bench`, `model-info`, `make-test-model`.
//! Exit codes: 0 success, 1 I/O failure, 2 format/validation failure.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use log::{debug, info};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use vocoder_core::features::{
    load_feature_dump, lpc_from_conditioning, ConditioningVector, FeatureExtractor, NUM_FEATURES,
};
use vocoder_core::nnet::{
    equivalent_units, flop_count, load_model, random_model, save_model, ModelConfig,
};
use vocoder_core::vocoder::{synth_frame, SynthState};
use vocoder_core::{Error, ModelWeightsF32, FRAME_SIZE, SAMPLE_RATE};

use vocoder_cli::fmtx::{read_fmtx, write_fmtx, FMTX_COLS};
use vocoder_cli::wav;

#[derive(Parser)]
#[command(name = "vocoder", version, about = "Neural vocoder engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a decoder parameter dump (OPNV) to a feature matrix (FMTX).
    Features {
        /// Input OPNV dump.
        input: PathBuf,
        /// Output feature matrix (38 conditioning + 16 LPC columns).
        output: PathBuf,
        /// Print a JSON summary (frame count, per-column mean/variance).
        #[arg(long)]
        json_summary: bool,
    },
    /// Synthesize audio from a feature matrix and a model file.
    Synth {
        /// Input feature matrix (FMTX).
        features: PathBuf,
        /// Model file (LPNW).
        model: PathBuf,
        /// Output WAV (PCM 16-bit mono 16 kHz).
        output: PathBuf,
        /// Sampling seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Laplace scale of the excitation-feedback noise, in μ-law codes.
        #[arg(long, default_value_t = 0.0)]
        noise_scale: f64,
    },
    /// Measure synthesis throughput on randomized conditioning features.
    Bench {
        /// Model file (LPNW).
        model: PathBuf,
        /// Seconds of audio to synthesize per stream.
        #[arg(long, default_value_t = 1.0)]
        seconds: f64,
        /// Number of independent synthesis streams (threads).
        #[arg(long, default_value_t = 1)]
        streams: usize,
        /// Feature/sampling seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Emit the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Print model shapes, densities, weight totals, and checksum.
    ModelInfo {
        /// Model file (LPNW).
        model: PathBuf,
    },
    /// Generate a deterministic random-weight model file.
    MakeTestModel {
        /// Output model path.
        output: PathBuf,
        /// Generator seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Base sizing: "reference" (384 units) or "small" (64 units).
        #[arg(long, default_value = "small")]
        config: String,
        /// Override the sample-rate GRU width (positive multiple of 16).
        #[arg(long)]
        n_a: Option<usize>,
    },
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => 1,
        _ => 2,
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter("VOCODER_LOG")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Features {
            input,
            output,
            json_summary,
        } => cmd_features(&input, &output, json_summary),
        Command::Synth {
            features,
            model,
            output,
            seed,
            noise_scale,
        } => cmd_synth(&features, &model, &output, seed, noise_scale),
        Command::Bench {
            model,
            seconds,
            streams,
            seed,
            json,
        } => cmd_bench(&model, seconds, streams, seed, json),
        Command::ModelInfo { model } => cmd_model_info(&model),
        Command::MakeTestModel {
            output,
            seed,
            config,
            n_a,
        } => cmd_make_test_model(&output, seed, &config, n_a),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}

// ---------------------------------------------------------------------------
// features
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct FeatureSummary {
    frames: usize,
    cols: usize,
    mean: Vec<f32>,
    variance: Vec<f32>,
}

fn cmd_features(input: &Path, output: &Path, json_summary: bool) -> vocoder_core::Result<()> {
    let file = std::fs::File::open(input)?;
    let frames = load_feature_dump::<f32, _>(std::io::BufReader::new(file))?;
    info!("loaded {} frames from {}", frames.len(), input.display());

    let extractor = FeatureExtractor::<f32>::new();
    let mut window = vec![0.0f32; FRAME_SIZE];
    let mut rows = Vec::with_capacity(frames.len());
    for frame in &frames {
        let cond = extractor.conditioning_from_frame(frame, &window)?;
        let lpc = lpc_from_conditioning(&cond)?.lpc;
        let mut row = Vec::with_capacity(FMTX_COLS);
        row.extend_from_slice(&cond.flatten());
        row.extend_from_slice(lpc.coeffs());
        rows.push(row);
        window.copy_from_slice(frame.decoded());
    }
    write_fmtx(output, &rows)?;

    if json_summary {
        let n = rows.len().max(1) as f64;
        let mut mean = vec![0.0f64; FMTX_COLS];
        let mut m2 = vec![0.0f64; FMTX_COLS];
        for row in &rows {
            for (c, &v) in row.iter().enumerate() {
                mean[c] += v as f64;
                m2[c] += (v as f64) * (v as f64);
            }
        }
        let summary = FeatureSummary {
            frames: rows.len(),
            cols: FMTX_COLS,
            mean: mean.iter().map(|&s| (s / n) as f32).collect(),
            variance: mean
                .iter()
                .zip(&m2)
                .map(|(&s, &s2)| ((s2 / n) - (s / n) * (s / n)).max(0.0) as f32)
                .collect(),
        };
        println!("{}", serde_json::to_string(&summary).expect("summary serializes"));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

fn cmd_synth(
    features: &Path,
    model_path: &Path,
    output: &Path,
    seed: u64,
    noise_scale: f64,
) -> vocoder_core::Result<()> {
    if !(noise_scale >= 0.0 && noise_scale.is_finite()) {
        return Err(Error::invalid(format!("--noise-scale {noise_scale} invalid")));
    }
    let model: ModelWeightsF32 = load_model(model_path)?;
    let rows = read_fmtx(features)?;
    let mut state = SynthState::new(&model, seed);
    state.noise_scale = noise_scale;
    let mut samples = Vec::with_capacity(rows.len() * FRAME_SIZE);
    for row in &rows {
        let c = ConditioningVector::from_flat(&row[..NUM_FEATURES])?;
        samples.extend(synth_frame(&mut state, &c, &model)?);
    }
    wav::write_wav(output, &samples)?;
    info!(
        "wrote {} samples ({:.2} s) to {}",
        samples.len(),
        samples.len() as f64 / SAMPLE_RATE as f64,
        output.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct BenchReport {
    streams: usize,
    frames_per_stream: usize,
    synthesized_seconds: f64,
    wall_seconds: f64,
    real_time_factor: f64,
    analytic_gflops: f64,
    achieved_gflops: f64,
}

fn random_conditioning(rng: &mut ChaCha8Rng) -> ConditioningVector<f32> {
    let mut flat = [0.0f32; NUM_FEATURES];
    for v in flat.iter_mut().take(2 * 18) {
        *v = rng.gen_range(-0.3..0.3);
    }
    flat[NUM_FEATURES - 2] = rng.gen_range(-0.5..0.5);
    flat[NUM_FEATURES - 1] = rng.gen_range(0.0..1.0);
    ConditioningVector::from_flat(&flat).expect("valid synthetic features")
}

fn cmd_bench(
    model_path: &Path,
    seconds: f64,
    streams: usize,
    seed: u64,
    json: bool,
) -> vocoder_core::Result<()> {
    if !(seconds >= 0.0 && seconds.is_finite()) {
        return Err(Error::invalid(format!("--seconds {seconds} invalid")));
    }
    if streams == 0 {
        return Err(Error::invalid("--streams must be positive"));
    }
    let model: ModelWeightsF32 = load_model(model_path)?;
    let frames = (seconds * SAMPLE_RATE as f64 / FRAME_SIZE as f64).ceil() as usize;
    debug!("benchmarking {frames} frames on {streams} stream(s)");

    let start = Instant::now();
    std::thread::scope(|scope| -> vocoder_core::Result<()> {
        let handles: Vec<_> = (0..streams)
            .map(|i| {
                let model = &model;
                scope.spawn(move || -> vocoder_core::Result<usize> {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x9e37));
                    let mut state = SynthState::new(model, seed + i as u64);
                    let mut produced = 0;
                    for _ in 0..frames {
                        let c = random_conditioning(&mut rng);
                        produced += synth_frame(&mut state, &c, model)?.len();
                    }
                    Ok(produced)
                })
            })
            .collect();
        for h in handles {
            h.join().expect("bench thread panicked")?;
        }
        Ok(())
    })?;
    let wall = start.elapsed().as_secs_f64();

    let report = flop_count(&model.config);
    let analytic_gflops = report.gflops();
    let synthesized = streams as f64 * frames as f64 * FRAME_SIZE as f64 / SAMPLE_RATE as f64;
    let rtf = if wall > 0.0 { synthesized / wall } else { 0.0 };
    let out = BenchReport {
        streams,
        frames_per_stream: frames,
        synthesized_seconds: synthesized,
        wall_seconds: wall,
        real_time_factor: rtf,
        analytic_gflops,
        achieved_gflops: analytic_gflops * rtf,
    };
    if json {
        println!("{}", serde_json::to_string(&out).expect("report serializes"));
    } else {
        println!("streams:              {}", out.streams);
        println!("frames per stream:    {}", out.frames_per_stream);
        println!("synthesized seconds:  {:.3}", out.synthesized_seconds);
        println!("wall seconds:         {:.3}", out.wall_seconds);
        println!("real-time factor:     {:.3}", out.real_time_factor);
        println!("analytic GFLOPS:      {:.3}", out.analytic_gflops);
        println!("achieved GFLOP/s:     {:.3}", out.achieved_gflops);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// model-info
// ---------------------------------------------------------------------------

fn cmd_model_info(model_path: &Path) -> vocoder_core::Result<()> {
    let model: ModelWeightsF32 = load_model(model_path)?;
    let bytes = std::fs::read(model_path)?;
    let checksum = u64::from_le_bytes(bytes[bytes.len() - 8..].try_into().unwrap());
    let c = &model.config;
    let mean_density = (c.density_h + c.density_u + c.density_r) / 3.0;
    let eq = equivalent_units(c.n_a, mean_density);

    println!(
        "config: n_a={} gru_b={} features={} frame-adapted={}",
        c.n_a, c.gru_b_units, c.feature_dim, c.frame_adapted
    );
    println!(
        "densities: W_h={:.3} W_u={:.3} W_r={:.3} (mean {:.3})",
        c.density_h, c.density_u, c.density_r, mean_density
    );
    println!(
        "equivalent units at mean density: {eq:.1} \
         (sqrt(d*n^2+n); note the integer part is {}, not {})",
        eq as u64,
        eq as u64 - 1
    );
    println!(
        "temperature: beta = 1 + {}*pitch_gain, prune below {}*max",
        c.temperature.beta_slope, c.temperature.threshold_ratio
    );
    println!("layers:");
    for (name, rows, cols) in [
        ("frame conv1", model.frame_rate.conv1_w.rows(), model.frame_rate.conv1_w.cols()),
        ("frame conv2", model.frame_rate.conv2_w.rows(), model.frame_rate.conv2_w.cols()),
        ("frame dense1", model.frame_rate.dense1_w.rows(), model.frame_rate.dense1_w.cols()),
        ("frame dense2", model.frame_rate.dense2_w.rows(), model.frame_rate.dense2_w.cols()),
        ("frame g proj", model.frame_rate.g_proj_w.rows(), model.frame_rate.g_proj_w.cols()),
        ("frame gb proj", model.frame_rate.gb_proj_w.rows(), model.frame_rate.gb_proj_w.cols()),
        ("GRU_B input", model.gru_b.w_in.rows(), model.gru_b.w_in.cols()),
        ("GRU_B recurrent", model.gru_b.w_rec.rows(), model.gru_b.w_rec.cols()),
        ("dual_fc (x2)", model.dual_fc.w1.rows(), model.dual_fc.w1.cols()),
    ] {
        println!("  {name:<16} {rows} x {cols}");
    }
    for (name, m) in [
        ("GRU_A W_u", &model.gru_a.w_u),
        ("GRU_A W_r", &model.gru_a.w_r),
        ("GRU_A W_h", &model.gru_a.w_h),
    ] {
        println!(
            "  {name:<16} {} x {}  blocks={} nonzeros={} density={:.4}",
            m.rows(),
            m.cols(),
            m.blocks().len(),
            m.nonzeros(),
            m.density()
        );
    }
    let report = flop_count(c);
    println!("sample-rate weights: {}", report.sample_rate_weights);
    println!("frame-rate weights:  {}", report.frame_rate_weights);
    println!("analytic total:      {:.3} GFLOPS", report.gflops());
    println!("checksum: {checksum:#018x}");
    Ok(())
}

// ---------------------------------------------------------------------------
// make-test-model
// ---------------------------------------------------------------------------

fn cmd_make_test_model(
    output: &Path,
    seed: u64,
    config_name: &str,
    n_a: Option<usize>,
) -> vocoder_core::Result<()> {
    let mut config = match config_name {
        "reference" => ModelConfig::reference(),
        "small" => ModelConfig::small(),
        other => {
            return Err(Error::invalid(format!(
                "unknown config \"{other}\" (expected \"reference\" or \"small\")"
            )))
        }
    };
    if let Some(n) = n_a {
        config.n_a = n;
    }
    config.validate()?;
    let model: ModelWeightsF32 = random_model(&config, seed)?;

    // save_model writes in one shot; route it through a temp file so an
    // interrupted run leaves nothing behind at the target path.
    let tmp = output.with_extension("lpnw.tmp");
    save_model(&tmp, &model)?;
    std::fs::rename(&tmp, output).map_err(|e| {
        std::fs::remove_file(&tmp).ok();
        Error::from(e)
    })?;
    info!("wrote model ({} units, seed {seed}) to {}", config.n_a, output.display());
    Ok(())
}
