//! Fixed 320-point spectral analysis: power spectrum, Bark-like band
//! energies, the 18-coefficient cepstrum pair, and LPC frequency response.
//!
//! Only the 320-point / 161-bin configuration is public; this is not a
//! general FFT surface.

use crate::dsp::lpc::{LpcCoeffs, LPC_ORDER};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Analysis transform length (20 ms at 16 kHz).
pub const FFT_SIZE: usize = 320;
/// Number of non-redundant power-spectrum bins (0..8000 Hz, 50 Hz spacing).
pub const NUM_BINS: usize = FFT_SIZE / 2 + 1;
/// Number of band energies / cepstral coefficients.
pub const NUM_BANDS: usize = 18;

/// Band edges in Hz, Bark-like widening over 0..8 kHz.
pub const BAND_EDGES_HZ: [u32; NUM_BANDS + 1] = [
    0, 200, 400, 600, 800, 1000, 1200, 1400, 1600, 2000, 2400, 2800, 3200, 4000, 4800, 5600,
    6400, 7200, 8000,
];

/// Log floor applied before the cepstral transform (silence frames).
pub const BAND_LOG_FLOOR: f64 = 1e-10;

const BIN_HZ: f64 = 16_000.0 / FFT_SIZE as f64; // 50 Hz

/// Band index for a power-spectrum bin. Bands are half-open on the right
/// except the last, which absorbs the 8000 Hz bin.
pub fn bin_band(bin: usize) -> usize {
    debug_assert!(bin < NUM_BINS);
    let f = bin as f64 * BIN_HZ;
    for b in 0..NUM_BANDS {
        if f < BAND_EDGES_HZ[b + 1] as f64 {
            return b;
        }
    }
    NUM_BANDS - 1
}

/// Number of bins assigned to each band.
pub fn band_bin_counts() -> [usize; NUM_BANDS] {
    let mut counts = [0usize; NUM_BANDS];
    for k in 0..NUM_BINS {
        counts[bin_band(k)] += 1;
    }
    counts
}

/// 320-point periodic Hann window.
pub fn hann_window<S: Real>() -> Vec<S> {
    (0..FFT_SIZE)
        .map(|n| {
            let w = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * n as f64 / FFT_SIZE as f64).cos();
            S::from_f64c(w)
        })
        .collect()
}

/// Precomputed twiddle tables for the fixed 320-point power spectrum.
pub struct SpectrumAnalyzer<S: Real> {
    // cos/sin of 2*pi*k*n/320 for k in 0..161, n in 0..320, row-major by k.
    cos_tab: Vec<S>,
    sin_tab: Vec<S>,
}

impl<S: Real> Default for SpectrumAnalyzer<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Real> SpectrumAnalyzer<S> {
    pub fn new() -> Self {
        let mut cos_tab = Vec::with_capacity(NUM_BINS * FFT_SIZE);
        let mut sin_tab = Vec::with_capacity(NUM_BINS * FFT_SIZE);
        for k in 0..NUM_BINS {
            for n in 0..FFT_SIZE {
                let w = 2.0 * std::f64::consts::PI * (k * n % FFT_SIZE) as f64 / FFT_SIZE as f64;
                cos_tab.push(S::from_f64c(w.cos()));
                sin_tab.push(S::from_f64c(w.sin()));
            }
        }
        Self { cos_tab, sin_tab }
    }

    /// Power spectrum `|X_k|^2` of a 320-sample frame on the 161-bin grid.
    pub fn power_spectrum(&self, frame: &[S]) -> Result<Vec<S>> {
        if frame.len() != FFT_SIZE {
            return Err(Error::ShapeMismatch(format!(
                "expected {FFT_SIZE}-sample frame, got {}",
                frame.len()
            )));
        }
        let mut power = Vec::with_capacity(NUM_BINS);
        for k in 0..NUM_BINS {
            let cos_row = &self.cos_tab[k * FFT_SIZE..(k + 1) * FFT_SIZE];
            let sin_row = &self.sin_tab[k * FFT_SIZE..(k + 1) * FFT_SIZE];
            let mut re = S::zero();
            let mut im = S::zero();
            for n in 0..FFT_SIZE {
                re += frame[n] * cos_row[n];
                im -= frame[n] * sin_row[n];
            }
            power.push(re * re + im * im);
        }
        Ok(power)
    }
}

/// Sums power-spectrum bins into the 18 bands. Each bin contributes to
/// exactly one band, so total energy is preserved.
pub fn band_energies<S: Real>(power: &[S]) -> Result<[S; NUM_BANDS]> {
    if power.len() != NUM_BINS {
        return Err(Error::ShapeMismatch(format!(
            "expected {NUM_BINS} bins, got {}",
            power.len()
        )));
    }
    if let Some(i) = power.iter().position(|&p| p < S::zero()) {
        return Err(Error::invalid(format!("negative power bin at index {i}")));
    }
    let mut bands = [S::zero(); NUM_BANDS];
    for (k, &p) in power.iter().enumerate() {
        bands[bin_band(k)] += p;
    }
    Ok(bands)
}

/// 18 cepstral coefficients: orthonormal DCT-II of the log band energies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cepstrum18<S: Real> {
    c: [S; NUM_BANDS],
}

impl<S: Real> Cepstrum18<S> {
    pub fn new(c: [S; NUM_BANDS]) -> Result<Self> {
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite cepstral coefficient"));
        }
        Ok(Self { c })
    }

    pub fn zero() -> Self {
        Self {
            c: [S::zero(); NUM_BANDS],
        }
    }

    pub fn coeffs(&self) -> &[S; NUM_BANDS] {
        &self.c
    }
}

fn dct_scale(k: usize) -> f64 {
    if k == 0 {
        (1.0 / NUM_BANDS as f64).sqrt()
    } else {
        (2.0 / NUM_BANDS as f64).sqrt()
    }
}

/// `c = DCT-II(log10(bands + eps))`, orthonormal.
pub fn cepstrum_from_bands<S: Real>(bands: &[S; NUM_BANDS]) -> Cepstrum18<S> {
    let logs: Vec<f64> = bands
        .iter()
        .map(|&b| (b.to_f64c().max(0.0) + BAND_LOG_FLOOR).log10())
        .collect();
    let mut c = [S::zero(); NUM_BANDS];
    for k in 0..NUM_BANDS {
        let mut acc = 0.0;
        for (n, &x) in logs.iter().enumerate() {
            acc += x * (std::f64::consts::PI * (2 * n + 1) as f64 * k as f64
                / (2 * NUM_BANDS) as f64)
                .cos();
        }
        c[k] = S::from_f64c(dct_scale(k) * acc);
    }
    Cepstrum18 { c }
}

/// Inverse of [`cepstrum_from_bands`]: IDCT then exponentiation.
/// Recovers `bands + eps`.
pub fn bands_from_cepstrum<S: Real>(cepstrum: &Cepstrum18<S>) -> [S; NUM_BANDS] {
    let mut bands = [S::zero(); NUM_BANDS];
    for n in 0..NUM_BANDS {
        let mut acc = 0.0;
        for k in 0..NUM_BANDS {
            acc += dct_scale(k)
                * cepstrum.c[k].to_f64c()
                * (std::f64::consts::PI * (2 * n + 1) as f64 * k as f64 / (2 * NUM_BANDS) as f64)
                    .cos();
        }
        bands[n] = S::from_f64c(10f64.powf(acc));
    }
    bands
}

/// Power response `1 / |A(e^{jw_k})|^2` of the synthesis filter on the
/// 161-bin grid, with `A(z) = 1 - sum a_i z^{-i}`.
pub fn lpc_frequency_response<S: Real>(lpc: &LpcCoeffs<S>) -> Result<Vec<S>> {
    let mut out = Vec::with_capacity(NUM_BINS);
    for k in 0..NUM_BINS {
        let w = 2.0 * std::f64::consts::PI * k as f64 / FFT_SIZE as f64;
        let mut re = 1.0f64;
        let mut im = 0.0f64;
        for (i, &a) in lpc.coeffs().iter().enumerate() {
            let ang = w * (i + 1) as f64;
            re -= a.to_f64c() * ang.cos();
            im += a.to_f64c() * ang.sin();
        }
        let mag2 = re * re + im * im;
        let resp = 1.0 / mag2;
        if !resp.is_finite() || resp > 1e12 {
            return Err(Error::NumericalInstability(format!(
                "LPC response {resp:.3e} at bin {k}"
            )));
        }
        out.push(S::from_f64c(resp));
    }
    Ok(out)
}

/// Interpolates 18 per-bin band levels onto the 161-bin grid,
/// piecewise-linear in the log domain with constant extrapolation beyond
/// the outermost band centers.
pub fn interp_bands_to_bins<S: Real>(levels: &[S; NUM_BANDS]) -> Vec<S> {
    let centers: Vec<f64> = (0..NUM_BANDS)
        .map(|b| (BAND_EDGES_HZ[b] + BAND_EDGES_HZ[b + 1]) as f64 / 2.0)
        .collect();
    let logs: Vec<f64> = levels
        .iter()
        .map(|&v| (v.to_f64c().max(0.0) + BAND_LOG_FLOOR).ln())
        .collect();
    (0..NUM_BINS)
        .map(|k| {
            let f = k as f64 * BIN_HZ;
            let lv = if f <= centers[0] {
                logs[0]
            } else if f >= centers[NUM_BANDS - 1] {
                logs[NUM_BANDS - 1]
            } else {
                let mut b = 0;
                while centers[b + 1] < f {
                    b += 1;
                }
                let t = (f - centers[b]) / (centers[b + 1] - centers[b]);
                logs[b] + t * (logs[b + 1] - logs[b])
            };
            S::from_f64c(lv.exp())
        })
        .collect()
}

/// First 17 autocorrelation lags of the signal whose 320-point power
/// spectrum is `power` (inverse DFT of the symmetrically extended spectrum).
pub fn autocorr_from_power<S: Real>(power: &[S]) -> Result<[S; LPC_ORDER + 1]> {
    if power.len() != NUM_BINS {
        return Err(Error::ShapeMismatch(format!(
            "expected {NUM_BINS} bins, got {}",
            power.len()
        )));
    }
    let mut r = [S::zero(); LPC_ORDER + 1];
    for (m, rm) in r.iter_mut().enumerate() {
        let mut acc = power[0].to_f64c();
        acc += power[NUM_BINS - 1].to_f64c() * (std::f64::consts::PI * m as f64).cos();
        for k in 1..NUM_BINS - 1 {
            acc += 2.0
                * power[k].to_f64c()
                * (2.0 * std::f64::consts::PI * k as f64 * m as f64 / FFT_SIZE as f64).cos();
        }
        *rm = S::from_f64c(acc / FFT_SIZE as f64);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn bin_counts_partition_all_bins() {
        let counts = band_bin_counts();
        assert_eq!(counts.iter().sum::<usize>(), NUM_BINS);
        // 50 Hz bins: 4 per 200 Hz band, widening with the edges.
        assert_eq!(counts[0], 4);
        assert_eq!(counts[17], 17); // includes the 8000 Hz bin
    }

    #[test]
    fn flat_spectrum_band_energies_equal_counts() {
        let power = vec![1.0f64; NUM_BINS];
        let bands = band_energies(&power).unwrap();
        let counts = band_bin_counts();
        for b in 0..NUM_BANDS {
            assert_eq!(bands[b], counts[b] as f64);
        }
    }

    #[test]
    fn single_bin_at_100hz_hits_band_zero() {
        let mut power = vec![0.0f64; NUM_BINS];
        power[2] = 3.0; // 100 Hz
        let bands = band_energies(&power).unwrap();
        assert_eq!(bands[0], 3.0);
        assert!(bands[1..].iter().all(|&b| b == 0.0));
    }

    #[test]
    fn band_energy_sum_preserved() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let power: Vec<f64> = (0..NUM_BINS).map(|_| rng.gen_range(0.0..10.0)).collect();
            let bands = band_energies(&power).unwrap();
            let total: f64 = power.iter().sum();
            let banded: f64 = bands.iter().sum();
            assert!((total - banded).abs() <= 1e-12 * total.max(1.0));
        }
    }

    #[test]
    fn negative_bin_rejected() {
        let mut power = vec![0.0f64; NUM_BINS];
        power[7] = -1.0;
        assert!(band_energies(&power).is_err());
    }

    #[test]
    fn flat_bands_cepstrum_nearly_zero() {
        let bands = [1.0f64; NUM_BANDS];
        let c = cepstrum_from_bands(&bands);
        // log10(1 + eps) ~ eps/ln(10): only c0 can be (negligibly) nonzero.
        assert!(c.coeffs()[0].abs() < 1e-9);
        for &v in &c.coeffs()[1..] {
            assert!(v.abs() < 1e-15);
        }
    }

    #[test]
    fn cepstrum_round_trip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let mut bands = [0.0f64; NUM_BANDS];
            for b in bands.iter_mut() {
                *b = rng.gen_range(1e-6..100.0f64);
            }
            let rec = bands_from_cepstrum(&cepstrum_from_bands(&bands));
            for n in 0..NUM_BANDS {
                let want = bands[n] + BAND_LOG_FLOOR;
                assert!(
                    ((rec[n] - want) / want).abs() < 1e-9,
                    "band {n}: {} vs {}",
                    rec[n],
                    want
                );
            }
        }
    }

    #[test]
    fn dct_basis_vectors_have_unit_norm() {
        // Orthonormality check on the transform matrix.
        for n in 0..NUM_BANDS {
            let mut norm = 0.0f64;
            for k in 0..NUM_BANDS {
                let v = dct_scale(k)
                    * (std::f64::consts::PI * (2 * n + 1) as f64 * k as f64
                        / (2 * NUM_BANDS) as f64)
                        .cos();
                norm += v * v;
            }
            assert!((norm - 1.0).abs() < 1e-12, "column {n} norm {norm}");
        }
    }

    #[test]
    fn zero_lpc_response_is_flat() {
        let resp = lpc_frequency_response(&LpcCoeffs::<f64>::zero()).unwrap();
        assert!(resp.iter().all(|&r| r == 1.0));
    }

    #[test]
    fn ar1_response_at_dc() {
        let mut a = [0.0f64; LPC_ORDER];
        a[0] = 0.9;
        let resp = lpc_frequency_response(&LpcCoeffs::new(a).unwrap()).unwrap();
        assert!((resp[0] - 100.0).abs() < 1e-9);
    }

    #[test]
    fn response_matches_naive_polynomial_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            // Stable random LPC from small reflection coefficients.
            let mut a = [0.0f64; LPC_ORDER];
            for m in 1..=LPC_ORDER {
                let k: f64 = rng.gen_range(-0.5..0.5);
                let prev = a;
                a[m - 1] = k;
                for i in 1..m {
                    a[i - 1] = prev[i - 1] - k * prev[m - 1 - i];
                }
            }
            let resp = lpc_frequency_response(&LpcCoeffs::new(a).unwrap()).unwrap();
            for k in 0..NUM_BINS {
                // Horner evaluation of A(z^{-1}) as an independent route.
                let w = 2.0 * std::f64::consts::PI * k as f64 / FFT_SIZE as f64;
                let (zr, zi) = (w.cos(), -w.sin());
                let (mut hr, mut hi) = (-a[LPC_ORDER - 1], 0.0f64);
                for i in (0..LPC_ORDER - 1).rev() {
                    let (nr, ni) = (hr * zr - hi * zi - a[i], hr * zi + hi * zr);
                    hr = nr;
                    hi = ni;
                }
                let (ar, ai) = (1.0 + hr * zr - hi * zi, hr * zi + hi * zr);
                let want = 1.0 / (ar * ar + ai * ai);
                let got = resp[k];
                assert!(
                    ((got - want) / want).abs() < 1e-9,
                    "bin {k}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn power_spectrum_of_cosine() {
        // Full-scale cosine at exactly bin 10 (500 Hz).
        let an = SpectrumAnalyzer::<f64>::new();
        let frame: Vec<f64> = (0..FFT_SIZE)
            .map(|n| (2.0 * std::f64::consts::PI * 10.0 * n as f64 / FFT_SIZE as f64).cos())
            .collect();
        let p = an.power_spectrum(&frame).unwrap();
        // |X_10| = N/2 for an on-grid cosine.
        assert!((p[10] - (FFT_SIZE as f64 / 2.0).powi(2)).abs() < 1e-6);
        let rest: f64 = p.iter().enumerate().filter(|(k, _)| *k != 10).map(|(_, v)| v).sum();
        assert!(rest < 1e-12 * p[10]);
    }

    #[test]
    fn autocorr_of_flat_spectrum_is_impulse() {
        let power = vec![2.0f64; NUM_BINS];
        let r = autocorr_from_power(&power).unwrap();
        assert!((r[0] - 2.0).abs() < 1e-12);
        for &v in &r[1..] {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn interp_flat_levels_is_flat() {
        let levels = [3.0f64; NUM_BANDS];
        let grid = interp_bands_to_bins(&levels);
        for &g in &grid {
            assert!((g - (3.0 + BAND_LOG_FLOOR)).abs() < 1e-9);
        }
    }
}
