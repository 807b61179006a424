//! Model container, binary model file format, random initialization, and
//! the weight/FLOP accounting model.
//!
//! File layout (all little-endian): magic `LPNW`, version `u32`, the
//! configuration block, every weight tensor as f32 in a fixed order, and a
//! trailing FNV-1a 64-bit checksum over all preceding bytes.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::features::NUM_FEATURES;
use crate::nnet::dense::DenseMatrix;
use crate::nnet::dual_fc::{DualFcWeights, NUM_CLASSES};
use crate::nnet::frame_rate::{FrameRateWeights, FRAME_VECTOR_DIM};
use crate::nnet::gru::{ContribTable, GruAWeights, GruBWeights, GruTables};
use crate::nnet::sampling::TemperatureConfig;
use crate::nnet::sparse::{prune_to_blocks, BlockSparseMatrix, SparseBlock, BLOCK_ROWS};
use crate::scalar::Real;

pub const MODEL_MAGIC: [u8; 4] = *b"LPNW";
pub const MODEL_VERSION: u32 = 1;

/// Shape and sampling metadata stored in the model file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    /// Sample-rate GRU width (multiple of 16).
    pub n_a: usize,
    /// Second, dense GRU width.
    pub gru_b_units: usize,
    /// Conditioning vector width.
    pub feature_dim: usize,
    /// Recurrent candidate-gate matrix density.
    pub density_h: f64,
    /// Update-gate matrix density.
    pub density_u: f64,
    /// Reset-gate matrix density.
    pub density_r: f64,
    pub temperature: TemperatureConfig,
    /// Whether the frame-rate weights were adapted (fine-tuned) against
    /// decoded speech. Informational; inference is unaffected.
    pub frame_adapted: bool,
}

impl ModelConfig {
    /// The reference sizing: 384 sparse units, 16 dense units,
    /// densities 20%/5%/5%.
    pub fn reference() -> Self {
        Self {
            n_a: 384,
            gru_b_units: 16,
            feature_dim: NUM_FEATURES,
            density_h: 0.2,
            density_u: 0.05,
            density_r: 0.05,
            temperature: TemperatureConfig::default(),
            frame_adapted: false,
        }
    }

    /// A small sizing for fast tests.
    pub fn small() -> Self {
        Self {
            n_a: 64,
            gru_b_units: 16,
            feature_dim: NUM_FEATURES,
            density_h: 0.2,
            density_u: 0.05,
            density_r: 0.05,
            temperature: TemperatureConfig::default(),
            frame_adapted: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_a == 0 || self.n_a % BLOCK_ROWS != 0 {
            return Err(Error::invalid(format!(
                "GRU_A width {} must be a positive multiple of {BLOCK_ROWS}",
                self.n_a
            )));
        }
        if self.gru_b_units == 0 {
            return Err(Error::invalid("GRU_B width must be positive"));
        }
        if self.feature_dim != NUM_FEATURES {
            return Err(Error::invalid(format!(
                "feature dim {} unsupported (expected {NUM_FEATURES})",
                self.feature_dim
            )));
        }
        for d in [self.density_h, self.density_u, self.density_r] {
            if !(d > 0.0 && d <= 1.0) {
                return Err(Error::invalid(format!("density {d} outside (0, 1]")));
            }
        }
        Ok(())
    }

    /// Block count a pruned `n_a x n_a` matrix must carry at density `d`.
    pub fn expected_blocks(&self, d: f64) -> usize {
        (((d * (self.n_a * self.n_a) as f64) / BLOCK_ROWS as f64).floor() as usize).max(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelWeights<S: Real> {
    pub config: ModelConfig,
    pub frame_rate: FrameRateWeights<S>,
    pub gru_a: GruAWeights<S>,
    pub gru_b: GruBWeights<S>,
    pub dual_fc: DualFcWeights<S>,
}

impl<S: Real> ModelWeights<S> {
    /// Cross-checks every tensor shape against the configuration,
    /// including the stored sparse block counts.
    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        self.frame_rate.validate()?;
        self.gru_a.validate()?;
        self.gru_b.validate()?;
        self.dual_fc.validate()?;
        if self.gru_a.units() != self.config.n_a {
            return Err(Error::ShapeMismatch("GRU_A width vs config".into()));
        }
        if self.gru_b.units() != self.config.gru_b_units {
            return Err(Error::ShapeMismatch("GRU_B width vs config".into()));
        }
        if self.gru_b.w_in.cols() != self.config.n_a {
            return Err(Error::ShapeMismatch("GRU_B input width vs config".into()));
        }
        if self.frame_rate.gru_a_units() != self.config.n_a
            || self.frame_rate.gru_b_units() != self.config.gru_b_units
        {
            return Err(Error::ShapeMismatch("frame projection width vs config".into()));
        }
        if self.dual_fc.w1.cols() != self.config.gru_b_units {
            return Err(Error::ShapeMismatch("dual_fc input width vs config".into()));
        }
        for (m, d, name) in [
            (&self.gru_a.w_h, self.config.density_h, "W_h"),
            (&self.gru_a.w_u, self.config.density_u, "W_u"),
            (&self.gru_a.w_r, self.config.density_r, "W_r"),
        ] {
            let want = self.config.expected_blocks(d);
            if m.blocks().len() != want {
                return Err(Error::invalid(format!(
                    "{name} has {} blocks, config density {d} implies {want}",
                    m.blocks().len()
                )));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Random initialization
// ---------------------------------------------------------------------------

/// Builds a model with Gaussian(0, 0.08) weights, pruned to the configured
/// densities. Deterministic in the seed.
pub fn random_model<S: Real>(config: &ModelConfig, seed: u64) -> Result<ModelWeights<S>> {
    config.validate()?;
    fn draw<S: Real>(n: usize, normal: &Normal<f64>, rng: &mut ChaCha8Rng) -> Vec<S> {
        (0..n).map(|_| S::from_f64c(normal.sample(rng))).collect()
    }
    fn dense<S: Real>(
        r: usize,
        c: usize,
        normal: &Normal<f64>,
        rng: &mut ChaCha8Rng,
    ) -> Result<DenseMatrix<S>> {
        DenseMatrix::new(r, c, draw(r * c, normal, rng))
    }
    fn sparse<S: Real>(
        n: usize,
        density: f64,
        normal: &Normal<f64>,
        rng: &mut ChaCha8Rng,
    ) -> Result<BlockSparseMatrix<S>> {
        prune_to_blocks(&dense(n, n, normal, rng)?, density)
    }
    fn table<S: Real>(
        n: usize,
        normal: &Normal<f64>,
        rng: &mut ChaCha8Rng,
    ) -> Result<ContribTable<S>> {
        ContribTable::new(n, draw(256 * n, normal, rng))
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rng = &mut rng;
    let nm = &Normal::new(0.0f64, 0.08).expect("valid stddev");
    let (n_a, n_b, d) = (config.n_a, config.gru_b_units, FRAME_VECTOR_DIM);

    let frame_rate = FrameRateWeights {
        conv1_w: dense(d, 3 * NUM_FEATURES, nm, rng)?,
        conv1_b: draw(d, nm, rng),
        conv2_w: dense(d, 3 * d, nm, rng)?,
        conv2_b: draw(d, nm, rng),
        dense1_w: dense(d, d, nm, rng)?,
        dense1_b: draw(d, nm, rng),
        dense2_w: dense(d, d, nm, rng)?,
        dense2_b: draw(d, nm, rng),
        g_proj_w: dense(3 * n_a, d, nm, rng)?,
        g_proj_b: draw(3 * n_a, nm, rng),
        gb_proj_w: dense(3 * n_b, d, nm, rng)?,
        gb_proj_b: draw(3 * n_b, nm, rng),
    };
    let gru_a = GruAWeights {
        w_u: sparse(n_a, config.density_u, nm, rng)?,
        w_r: sparse(n_a, config.density_r, nm, rng)?,
        w_h: sparse(n_a, config.density_h, nm, rng)?,
        tables: GruTables {
            u_s: table(n_a, nm, rng)?,
            u_y: table(n_a, nm, rng)?,
            u_e: table(n_a, nm, rng)?,
            r_s: table(n_a, nm, rng)?,
            r_y: table(n_a, nm, rng)?,
            r_e: table(n_a, nm, rng)?,
            h_s: table(n_a, nm, rng)?,
            h_y: table(n_a, nm, rng)?,
            h_e: table(n_a, nm, rng)?,
        },
    };
    let gru_b = GruBWeights {
        w_in: dense(3 * n_b, n_a, nm, rng)?,
        w_rec: dense(3 * n_b, n_b, nm, rng)?,
    };
    let dual = DualFcWeights {
        w1: dense(NUM_CLASSES, n_b, nm, rng)?,
        w2: dense(NUM_CLASSES, n_b, nm, rng)?,
        a1: draw(NUM_CLASSES, nm, rng),
        a2: draw(NUM_CLASSES, nm, rng),
    };
    let model = ModelWeights {
        config: *config,
        frame_rate,
        gru_a,
        gru_b,
        dual_fc: dual,
    };
    model.validate()?;
    Ok(model)
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

fn fnv1a64(data: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in data {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn f32(&mut self, v: f32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn scalars<S: Real>(&mut self, vs: &[S]) {
        for v in vs {
            self.f32(v.to_f64c() as f32);
        }
    }

    fn vec<S: Real>(&mut self, vs: &[S]) {
        self.u32(vs.len() as u32);
        self.scalars(vs);
    }

    fn dense<S: Real>(&mut self, m: &DenseMatrix<S>) {
        self.u32(m.rows() as u32);
        self.u32(m.cols() as u32);
        for r in 0..m.rows() {
            self.scalars(m.row(r));
        }
    }

    fn sparse<S: Real>(&mut self, m: &BlockSparseMatrix<S>) {
        self.u32(m.rows() as u32);
        self.u32(m.cols() as u32);
        self.u32(m.blocks().len() as u32);
        for b in m.blocks() {
            self.u32(b.row_start as u32);
            self.u32(b.col as u32);
            self.scalars(&b.values);
        }
    }

    fn table<S: Real>(&mut self, t: &ContribTable<S>) {
        self.u32(t.width() as u32);
        self.scalars(t.data());
    }
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.data.len() {
            return Err(Error::format(
                self.pos as u64,
                format!("truncated: need {n} bytes, {} remain", self.data.len() - self.pos),
            ));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn scalar<S: Real>(&mut self) -> Result<S> {
        let off = self.pos as u64;
        let v = self.f32()?;
        if !v.is_finite() {
            return Err(Error::format(off, "non-finite weight"));
        }
        Ok(S::from_f64c(v as f64))
    }

    fn scalars<S: Real>(&mut self, n: usize) -> Result<Vec<S>> {
        (0..n).map(|_| self.scalar()).collect()
    }

    fn vec<S: Real>(&mut self) -> Result<Vec<S>> {
        let n = self.u32()? as usize;
        self.scalars(n)
    }

    fn dense<S: Real>(&mut self) -> Result<DenseMatrix<S>> {
        let off = self.pos as u64;
        let rows = self.u32()? as usize;
        let cols = self.u32()? as usize;
        if rows > 1 << 20 || cols > 1 << 20 {
            return Err(Error::format(off, format!("implausible matrix {rows}x{cols}")));
        }
        let data = self.scalars(rows * cols)?;
        DenseMatrix::new(rows, cols, data)
    }

    fn sparse<S: Real>(&mut self) -> Result<BlockSparseMatrix<S>> {
        let off = self.pos as u64;
        let rows = self.u32()? as usize;
        let cols = self.u32()? as usize;
        let nblocks = self.u32()? as usize;
        if nblocks > rows.saturating_mul(cols) {
            return Err(Error::format(off, format!("implausible block count {nblocks}")));
        }
        let mut blocks = Vec::with_capacity(nblocks);
        for _ in 0..nblocks {
            let row_start = self.u32()? as usize;
            let col = self.u32()? as usize;
            let vals = self.scalars::<S>(BLOCK_ROWS)?;
            let mut values = [S::zero(); BLOCK_ROWS];
            values.copy_from_slice(&vals);
            blocks.push(SparseBlock { row_start, col, values });
        }
        BlockSparseMatrix::new(rows, cols, blocks)
    }

    fn table<S: Real>(&mut self) -> Result<ContribTable<S>> {
        let width = self.u32()? as usize;
        let data = self.scalars(256 * width)?;
        ContribTable::new(width, data)
    }
}

/// Serializes a model and writes it to `path`.
pub fn save_model<S: Real>(path: &Path, model: &ModelWeights<S>) -> Result<()> {
    model.validate()?;
    let mut w = Writer { buf: Vec::new() };
    w.buf.extend_from_slice(&MODEL_MAGIC);
    w.u32(MODEL_VERSION);
    let c = &model.config;
    w.u32(c.n_a as u32);
    w.u32(c.gru_b_units as u32);
    w.u32(c.feature_dim as u32);
    w.f64(c.density_h);
    w.f64(c.density_u);
    w.f64(c.density_r);
    w.f32(c.temperature.beta_slope);
    w.f32(c.temperature.threshold_ratio);
    w.u32(c.frame_adapted as u32);

    let fr = &model.frame_rate;
    w.dense(&fr.conv1_w);
    w.vec(&fr.conv1_b);
    w.dense(&fr.conv2_w);
    w.vec(&fr.conv2_b);
    w.dense(&fr.dense1_w);
    w.vec(&fr.dense1_b);
    w.dense(&fr.dense2_w);
    w.vec(&fr.dense2_b);
    w.dense(&fr.g_proj_w);
    w.vec(&fr.g_proj_b);
    w.dense(&fr.gb_proj_w);
    w.vec(&fr.gb_proj_b);

    w.sparse(&model.gru_a.w_u);
    w.sparse(&model.gru_a.w_r);
    w.sparse(&model.gru_a.w_h);
    for t in model.gru_a.tables.all() {
        w.table(t);
    }
    w.dense(&model.gru_b.w_in);
    w.dense(&model.gru_b.w_rec);
    w.dense(&model.dual_fc.w1);
    w.dense(&model.dual_fc.w2);
    w.vec(&model.dual_fc.a1);
    w.vec(&model.dual_fc.a2);

    let checksum = fnv1a64(&w.buf);
    w.buf.extend_from_slice(&checksum.to_le_bytes());
    std::fs::write(path, &w.buf)?;
    Ok(())
}

/// Reads and fully validates a model file, checksum included.
pub fn load_model<S: Real>(path: &Path) -> Result<ModelWeights<S>> {
    let data = std::fs::read(path)?;
    if data.len() < MODEL_MAGIC.len() + 4 + 8 {
        return Err(Error::format(0, "file too short for a model"));
    }
    let (body, tail) = data.split_at(data.len() - 8);
    let stored = u64::from_le_bytes(tail.try_into().unwrap());
    let computed = fnv1a64(body);
    if stored != computed {
        return Err(Error::Checksum { stored, computed });
    }

    let mut r = Reader { data: body, pos: 0 };
    let magic = r.take(4)?;
    if magic != MODEL_MAGIC {
        return Err(Error::format(0, format!("bad magic {magic:02x?}")));
    }
    let version = r.u32()?;
    if version != MODEL_VERSION {
        return Err(Error::format(4, format!("unsupported version {version}")));
    }
    let config = ModelConfig {
        n_a: r.u32()? as usize,
        gru_b_units: r.u32()? as usize,
        feature_dim: r.u32()? as usize,
        density_h: r.f64()?,
        density_u: r.f64()?,
        density_r: r.f64()?,
        temperature: TemperatureConfig {
            beta_slope: r.f32()?,
            threshold_ratio: r.f32()?,
        },
        frame_adapted: {
            let off = r.pos as u64;
            match r.u32()? {
                0 => false,
                1 => true,
                v => return Err(Error::format(off, format!("bad adapted flag {v}"))),
            }
        },
    };
    config.validate()?;

    let frame_rate = FrameRateWeights {
        conv1_w: r.dense()?,
        conv1_b: r.vec()?,
        conv2_w: r.dense()?,
        conv2_b: r.vec()?,
        dense1_w: r.dense()?,
        dense1_b: r.vec()?,
        dense2_w: r.dense()?,
        dense2_b: r.vec()?,
        g_proj_w: r.dense()?,
        g_proj_b: r.vec()?,
        gb_proj_w: r.dense()?,
        gb_proj_b: r.vec()?,
    };
    let w_u = r.sparse()?;
    let w_r = r.sparse()?;
    let w_h = r.sparse()?;
    let mut tables = Vec::with_capacity(9);
    for _ in 0..9 {
        tables.push(r.table()?);
    }
    let mut it = tables.into_iter();
    let gru_a = GruAWeights {
        w_u,
        w_r,
        w_h,
        tables: GruTables {
            u_s: it.next().unwrap(),
            u_y: it.next().unwrap(),
            u_e: it.next().unwrap(),
            r_s: it.next().unwrap(),
            r_y: it.next().unwrap(),
            r_e: it.next().unwrap(),
            h_s: it.next().unwrap(),
            h_y: it.next().unwrap(),
            h_e: it.next().unwrap(),
        },
    };
    let gru_b = GruBWeights {
        w_in: r.dense()?,
        w_rec: r.dense()?,
    };
    let dual_fc = DualFcWeights {
        w1: r.dense()?,
        w2: r.dense()?,
        a1: r.vec()?,
        a2: r.vec()?,
    };
    if r.pos != body.len() {
        return Err(Error::format(
            r.pos as u64,
            format!("{} trailing bytes", body.len() - r.pos),
        ));
    }
    let model = ModelWeights {
        config,
        frame_rate,
        gru_a,
        gru_b,
        dual_fc,
    };
    model.validate()?;
    Ok(model)
}

// ---------------------------------------------------------------------------
// Complexity accounting
// ---------------------------------------------------------------------------

/// One line of the complexity budget. `weights` counts stored multiplicative
/// parameters evaluated on this path (embedding lookups carry none).
#[derive(Debug, Clone, PartialEq)]
pub struct FlopItem {
    pub name: String,
    /// Evaluation rate in events per second (16000 or 100).
    pub rate_hz: f64,
    pub weights: usize,
    /// Floating-point operations per event.
    pub flops_per_event: f64,
}

impl FlopItem {
    pub fn flops_per_second(&self) -> f64 {
        self.rate_hz * self.flops_per_event
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlopReport {
    pub items: Vec<FlopItem>,
    /// Weights on the per-sample path (the figure bounded near 72k).
    pub sample_rate_weights: usize,
    pub frame_rate_weights: usize,
}

impl FlopReport {
    pub fn total_flops_per_second(&self) -> f64 {
        self.items.iter().map(FlopItem::flops_per_second).sum()
    }

    pub fn gflops(&self) -> f64 {
        self.total_flops_per_second() / 1e9
    }
}

/// Cost model: a multiply-accumulate is 2 FLOPs, an activation
/// (sigmoid/tanh/exp) 4, and plain adds or multiplies 1 each.
pub fn flop_count(config: &ModelConfig) -> FlopReport {
    const SAMPLE_HZ: f64 = crate::SAMPLE_RATE as f64;
    const FRAME_HZ: f64 = crate::SAMPLE_RATE as f64 / crate::FRAME_SIZE as f64;
    let n_a = config.n_a;
    let n_b = config.gru_b_units;
    let d = FRAME_VECTOR_DIM;

    let nnz = |density: f64| config.expected_blocks(density) * BLOCK_ROWS;
    let gru_a_nnz = nnz(config.density_u) + nnz(config.density_r) + nnz(config.density_h);
    let gru_b_weights = 3 * n_b * n_a + 3 * n_b * n_b;
    let dual_weights = 2 * NUM_CLASSES * n_b;

    let mut items = vec![
        FlopItem {
            name: "GRU_A sparse matvec".into(),
            rate_hz: SAMPLE_HZ,
            weights: gru_a_nnz,
            flops_per_event: 2.0 * gru_a_nnz as f64,
        },
        FlopItem {
            // 9 table rows + 3 frame contributions, added per unit.
            name: "GRU_A lookups and frame adds".into(),
            rate_hz: SAMPLE_HZ,
            weights: 0,
            flops_per_event: 12.0 * n_a as f64,
        },
        FlopItem {
            // 3 n_a activations plus the gated state blend.
            name: "GRU_A activations".into(),
            rate_hz: SAMPLE_HZ,
            weights: 0,
            flops_per_event: (3 * 4 + 4) as f64 * n_a as f64,
        },
        FlopItem {
            name: "GRU_B".into(),
            rate_hz: SAMPLE_HZ,
            weights: gru_b_weights,
            flops_per_event: 2.0 * gru_b_weights as f64 + (3 + 3 * 4 + 4) as f64 * n_b as f64,
        },
        FlopItem {
            name: "dual_fc".into(),
            rate_hz: SAMPLE_HZ,
            weights: dual_weights,
            flops_per_event: 2.0 * dual_weights as f64 + (2 * 4 + 3) as f64 * NUM_CLASSES as f64,
        },
        FlopItem {
            name: "softmax and sampling".into(),
            rate_hz: SAMPLE_HZ,
            weights: 0,
            flops_per_event: 8.0 * NUM_CLASSES as f64,
        },
    ];

    let fr_macs = [
        ("frame conv1 (x3 windows)", 3 * d * 3 * NUM_FEATURES, 3 * d),
        ("frame conv2", d * 3 * d, d),
        ("frame dense1", d * d, d),
        ("frame dense2", d * d, d),
        ("frame g projection", 3 * n_a * d, 0),
        ("frame gb projection", 3 * n_b * d, 0),
    ];
    let mut frame_rate_weights = 0;
    for (name, macs, activations) in fr_macs {
        // conv1's weight matrix is shared by its three windows.
        let weights = if name.starts_with("frame conv1") { macs / 3 } else { macs };
        frame_rate_weights += weights + activations.max(0);
        items.push(FlopItem {
            name: name.into(),
            rate_hz: FRAME_HZ,
            weights,
            flops_per_event: 2.0 * macs as f64 + 4.0 * activations as f64,
        });
    }
    // Biases of the two per-gate projections live in the g/gb vectors.
    frame_rate_weights += 3 * n_a + 3 * n_b;

    FlopReport {
        items,
        sample_rate_weights: gru_a_nnz + gru_b_weights + dual_weights,
        frame_rate_weights,
    }
}
