//! Pulse-shaping kernels, time-domain pulsone synthesis, the discretized Zak
//! transform and peak-power metrics.
//!
//! A frame is synthesized as a train of delay pulses `w1(t - p/B)` located on
//! the `1/B` grid. The train is windowed in time by `W2`, the inverse Fourier
//! transform of the Doppler pulse, centred so the window covers delay
//! positions symmetrically.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::dd::{QuasiPeriodicGrid, ZakParams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum PulseKind {
    Sinc,
    Rrc,
}

/// Separable pulse `w_tx(τ,ν) = √(BT) g_τ(Bτ) g_ν(Tν)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PulseShape {
    pub kind: PulseKind,
    pub beta_tau: f64,
    pub beta_nu: f64,
}

impl PulseShape {
    pub fn sinc() -> Self {
        Self { kind: PulseKind::Sinc, beta_tau: 0.0, beta_nu: 0.0 }
    }

    pub fn rrc(beta_tau: f64, beta_nu: f64) -> Result<Self> {
        let ok = |b: f64| (0.0..=1.0).contains(&b);
        if !ok(beta_tau) || !ok(beta_nu) {
            return Err(Error::InvalidParameter("roll-off must lie in [0, 1]"));
        }
        Ok(Self { kind: PulseKind::Rrc, beta_tau, beta_nu })
    }

    fn beta(&self, beta: f64) -> f64 {
        match self.kind {
            PulseKind::Sinc => 0.0,
            PulseKind::Rrc => beta,
        }
    }

    pub fn effective_beta_tau(&self) -> f64 {
        self.beta(self.beta_tau)
    }

    pub fn effective_beta_nu(&self) -> f64 {
        self.beta(self.beta_nu)
    }

    /// Normalized delay kernel `g_τ(x)`.
    pub fn delay_kernel(&self, x: f64) -> f64 {
        rrc_value(self.effective_beta_tau(), x)
    }

    /// Normalized Doppler kernel `g_ν(x)`.
    pub fn doppler_kernel(&self, x: f64) -> f64 {
        rrc_value(self.effective_beta_nu(), x)
    }

    /// Fourier transform of the Doppler kernel, `G(f)`; `W2(t) = G(t/T)/√T`.
    pub fn doppler_window(&self, f: f64) -> f64 {
        srrc_spectrum(self.effective_beta_nu(), f)
    }

    /// Half-width of `G`'s support in units of `T`.
    pub fn window_half_width(&self) -> f64 {
        (1.0 + self.effective_beta_nu()) / 2.0
    }
}

pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Root-raised-cosine pulse with roll-off `beta`, unit energy, zeros at the
/// nonzero integers of its raised-cosine autocorrelation.
pub fn rrc_value(beta: f64, x: f64) -> f64 {
    if beta == 0.0 {
        return sinc(x);
    }
    if x == 0.0 {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    let edge = 1.0 / (4.0 * beta);
    if (x.abs() - edge).abs() < 1e-12 * edge.max(1.0) {
        let a = PI / (4.0 * beta);
        return beta / core::f64::consts::SQRT_2
            * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    let px = PI * x;
    let num = (px * (1.0 - beta)).sin() + 4.0 * beta * x * (px * (1.0 + beta)).cos();
    num / (px * (1.0 - (4.0 * beta * x) * (4.0 * beta * x)))
}

/// Square-root raised-cosine spectrum: flat to `(1-β)/2`, quarter-cosine
/// roll-off to `(1+β)/2`. With `β = 0` this is the rectangle, half valued at
/// the edges.
pub fn srrc_spectrum(beta: f64, f: f64) -> f64 {
    let f = f.abs();
    let lo = (1.0 - beta) / 2.0;
    let hi = (1.0 + beta) / 2.0;
    if beta == 0.0 {
        return if f < 0.5 {
            1.0
        } else if f == 0.5 {
            0.5
        } else {
            0.0
        };
    }
    if f <= lo {
        1.0
    } else if f < hi {
        (PI / (2.0 * beta) * (f - lo)).cos()
    } else {
        0.0
    }
}

/// Centre of the time window: `T/2 - τp/(2M)`, which places the `N` pulses of
/// every delay bin strictly inside a length-`T` window.
pub fn frame_center(params: &ZakParams) -> f64 {
    params.duration() / 2.0 - params.tau_p() / (2.0 * params.m() as f64)
}

/// Uniformly sampled complex baseband signal.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TDSignal {
    pub sample_rate: f64,
    pub t0: f64,
    pub samples: Vec<Complex64>,
}

impl TDSignal {
    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 / self.sample_rate
    }

    /// `∫|s|² dt` approximated by the sample sum.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// A frame as weighted delay pulses `Σ_p c_p w1(t - p/B)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseTrain {
    params: ZakParams,
    pulse: PulseShape,
    first: i64,
    coeffs: Vec<Complex64>,
}

impl PulseTrain {
    /// Expands a grid into its pulse coefficients. The set of pulse positions
    /// depends only on the geometry and pulse shape, so every frame of the
    /// same configuration shares one time axis.
    pub fn from_grid(x: &QuasiPeriodicGrid, pulse: PulseShape) -> Self {
        let params = *x.params();
        let (m, n) = (params.m() as i64, params.n() as i64);
        let tau_p = params.tau_p();
        let b = params.bandwidth();
        let t = params.duration();
        let tc = frame_center(&params);
        let half = pulse.window_half_width() * t;
        let n_lo = ((tc - half) / tau_p).floor() as i64 - 1;
        let n_hi = ((tc + half) / tau_p).ceil() as i64 + 1;

        // Doppler DFT per delay row: D[k][r] = Σ_l x[k,l] e^{j2π r l/N}.
        let roots: Vec<Complex64> =
            (0..n).map(|r| Complex64::from_polar(1.0, 2.0 * PI * r as f64 / n as f64)).collect();
        let mut dft = vec![Complex64::new(0.0, 0.0); (m * n) as usize];
        for k in 0..m {
            for l in 0..n {
                let v = x.value(k as usize, l as usize);
                if v == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for r in 0..n {
                    dft[(k * n + r) as usize] += v * roots[((r * l) % n) as usize];
                }
            }
        }

        let first = n_lo * m;
        let last = n_hi * m + m - 1;
        let scale = tau_p.sqrt() / t.sqrt();
        let coeffs = (first..=last)
            .map(|p| {
                let (s, k) = (p.div_euclid(m), p.rem_euclid(m));
                let w = pulse.doppler_window((p as f64 / b - tc) / t);
                if w == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                dft[(k * n + s.rem_euclid(n)) as usize] * (scale * w)
            })
            .collect();
        Self { params, pulse, first, coeffs }
    }

    /// `(p, c_p)` for every pulse position.
    pub fn coefficients(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().enumerate().map(move |(i, c)| (self.first + i as i64, *c))
    }

    /// Continuous-time value; `n_lobes = None` keeps the delay pulses untruncated.
    pub fn eval(&self, t: f64, n_lobes: Option<usize>) -> Complex64 {
        let b = self.params.bandwidth();
        let sb = b.sqrt();
        let mut acc = Complex64::new(0.0, 0.0);
        for (p, c) in self.coefficients() {
            let x = b * t - p as f64;
            if let Some(lim) = n_lobes {
                if x.abs() > lim as f64 {
                    continue;
                }
            }
            acc += c * (sb * self.pulse.delay_kernel(x));
        }
        acc
    }

    /// Samples the train at `n_os · B` with delay pulses truncated to
    /// `n_lobes` lobes on each side.
    pub fn sample(&self, n_os: usize, n_lobes: usize) -> Result<TDSignal> {
        if n_os < 2 {
            return Err(Error::InvalidParameter("oversampling must be at least 2"));
        }
        if n_lobes == 0 {
            return Err(Error::InvalidParameter("n_lobes must be at least 1"));
        }
        let b = self.params.bandwidth();
        let (os, lobes) = (n_os as i64, n_lobes as i64);
        let sb = b.sqrt();
        let kernel: Vec<f64> = (-lobes * os..=lobes * os)
            .map(|j| sb * self.pulse.delay_kernel(j as f64 / os as f64))
            .collect();
        let len = ((self.coeffs.len() as i64 - 1 + 2 * lobes) * os + 1) as usize;
        let mut samples = vec![Complex64::new(0.0, 0.0); len];
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let start = i * n_os;
            for (j, kv) in kernel.iter().enumerate() {
                samples[start + j] += c * *kv;
            }
        }
        Ok(TDSignal {
            sample_rate: n_os as f64 * b,
            t0: (self.first - lobes) as f64 / b,
            samples,
        })
    }
}

/// Time-domain realization of the `(k, l)` point pulsone.
pub fn synthesize_pulsone(
    k: i64,
    l: i64,
    params: ZakParams,
    pulse: PulseShape,
    n_os: usize,
    n_lobes: usize,
) -> Result<TDSignal> {
    synthesize_frame(&QuasiPeriodicGrid::point_pulse(params, k, l), pulse, n_os, n_lobes)
}

/// Time-domain realization of a whole DD frame.
pub fn synthesize_frame(
    x: &QuasiPeriodicGrid,
    pulse: PulseShape,
    n_os: usize,
    n_lobes: usize,
) -> Result<TDSignal> {
    PulseTrain::from_grid(x, pulse).sample(n_os, n_lobes)
}

/// Zak-domain samples on a `delay_bins x doppler_bins` grid, where the delay
/// axis is one period `τp` sampled at the signal rate.
#[derive(Debug, Clone, PartialEq)]
pub struct ZakGrid {
    pub delay_bins: usize,
    pub doppler_bins: usize,
    pub sample_rate: f64,
    pub t0: f64,
    /// Row-major, `a * doppler_bins + b`.
    pub values: Vec<Complex64>,
}

impl ZakGrid {
    pub fn get(&self, a: usize, b: usize) -> Complex64 {
        self.values[a * self.doppler_bins + b]
    }
}

fn samples_per_period(sample_rate: f64, params: &ZakParams) -> Result<usize> {
    let p = sample_rate * params.tau_p();
    let r = p.round();
    if r < 1.0 || (p - r).abs() > 1e-9 * r {
        return Err(Error::Dimension("sample rate must give an integer number of samples per period"));
    }
    Ok(r as usize)
}

/// Discretized Zak transform `X[a,b] = √τp Σ_k s(τ_a + kτp) e^{-j2πkb/K}`
/// over the `K` whole delay periods spanned by the signal.
pub fn zak_transform(s: &TDSignal, params: &ZakParams) -> Result<ZakGrid> {
    let p = samples_per_period(s.sample_rate, params)?;
    if s.samples.is_empty() || !s.samples.len().is_multiple_of(p) {
        return Err(Error::Dimension("signal must span a whole number of delay periods"));
    }
    let periods = s.samples.len() / p;
    let roots: Vec<Complex64> = (0..periods)
        .map(|r| Complex64::from_polar(1.0, -2.0 * PI * r as f64 / periods as f64))
        .collect();
    let scale = params.tau_p().sqrt();
    let mut values = vec![Complex64::new(0.0, 0.0); p * periods];
    for a in 0..p {
        for b in 0..periods {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..periods {
                acc += s.samples[a + k * p] * roots[(k * b) % periods];
            }
            values[a * periods + b] = acc * scale;
        }
    }
    Ok(ZakGrid { delay_bins: p, doppler_bins: periods, sample_rate: s.sample_rate, t0: s.t0, values })
}

/// Inverse of [`zak_transform`]: `s(τ_a + kτp) = √τp νp · mean_b X[a,b] e^{j2πkb/K}`.
pub fn inverse_zak(z: &ZakGrid, params: &ZakParams) -> Result<TDSignal> {
    let p = samples_per_period(z.sample_rate, params)?;
    if p != z.delay_bins || z.values.len() != z.delay_bins * z.doppler_bins {
        return Err(Error::Dimension("Zak grid does not match the sample rate"));
    }
    let periods = z.doppler_bins;
    let roots: Vec<Complex64> = (0..periods)
        .map(|r| Complex64::from_polar(1.0, 2.0 * PI * r as f64 / periods as f64))
        .collect();
    let scale = params.tau_p().sqrt() * params.nu_p() / periods as f64;
    let mut samples = vec![Complex64::new(0.0, 0.0); p * periods];
    for a in 0..p {
        for k in 0..periods {
            let mut acc = Complex64::new(0.0, 0.0);
            for b in 0..periods {
                acc += z.values[a * periods + b] * roots[(k * b) % periods];
            }
            samples[a + k * p] = acc * scale;
        }
    }
    Ok(TDSignal { sample_rate: z.sample_rate, t0: z.t0, samples })
}

fn mean_power(s: &TDSignal) -> Result<f64> {
    if s.samples.is_empty() {
        return Err(Error::UndefinedMetric("empty signal"));
    }
    let mean = s.samples.iter().map(|v| v.norm_sqr()).sum::<f64>() / s.samples.len() as f64;
    if mean == 0.0 {
        return Err(Error::UndefinedMetric("zero signal"));
    }
    Ok(mean)
}

/// Peak-to-average power ratio in dB.
pub fn papr(s: &TDSignal) -> Result<f64> {
    let mean = mean_power(s)?;
    let peak = s.samples.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
    Ok(10.0 * (peak / mean).log10())
}

/// Fraction of samples whose instantaneous-to-average power ratio is at
/// least each threshold (dB).
pub fn iapr_ccdf(s: &TDSignal, thresholds_db: &[f64]) -> Result<Vec<f64>> {
    let mean = mean_power(s)?;
    let len = s.samples.len() as f64;
    Ok(thresholds_db
        .iter()
        .map(|th| {
            let lim = mean * 10f64.powf(th / 10.0);
            s.samples.iter().filter(|v| v.norm_sqr() >= lim).count() as f64 / len
        })
        .collect())
}

/// Average power of one frame: energy spread over `period`.
fn frame_power(s: &TDSignal, period: f64) -> Result<f64> {
    if !(period > 0.0) {
        return Err(Error::InvalidParameter("period must be positive"));
    }
    let mean = s.energy() / period;
    if !(mean > 0.0) {
        return Err(Error::UndefinedMetric("zero signal"));
    }
    Ok(mean)
}

/// PAPR in dB against the energy per frame period rather than the mean over
/// all samples, which would count the pulse tails as extra airtime.
pub fn papr_per_frame(s: &TDSignal, period: f64) -> Result<f64> {
    let mean = frame_power(s, period)?;
    let peak = s.samples.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
    Ok(10.0 * (peak / mean).log10())
}

/// IAPR CCDF over the samples in `[start, start + period)`, against the
/// energy per frame period.
pub fn iapr_ccdf_per_frame(s: &TDSignal, start: f64, period: f64, thresholds_db: &[f64]) -> Result<Vec<f64>> {
    let mean = frame_power(s, period)?;
    let inside: Vec<f64> = (0..s.len())
        .filter(|&i| {
            let t = s.time(i);
            t >= start && t < start + period
        })
        .map(|i| s.samples[i].norm_sqr())
        .collect();
    if inside.is_empty() {
        return Err(Error::UndefinedMetric("no samples in the frame interval"));
    }
    let len = inside.len() as f64;
    Ok(thresholds_db
        .iter()
        .map(|th| {
            let lim = mean * 10f64.powf(th / 10.0);
            inside.iter().filter(|&&v| v >= lim).count() as f64 / len
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rrc_special_points() {
        for x in [-2.3, -0.7, 0.0, 0.4, 1.0, 3.5] {
            assert_eq!(rrc_value(0.0, x), sinc(x));
        }
        for beta in [0.1, 0.35, 0.6, 1.0] {
            assert!((rrc_value(beta, 0.0) - (1.0 - beta + 4.0 * beta / PI)).abs() < 1e-15);
            let xs = 1.0 / (4.0 * beta);
            let at = rrc_value(beta, xs);
            for d in [1e-6, -1e-6] {
                assert!((at - rrc_value(beta, xs + d)).abs() < 1e-4);
                assert!((at - rrc_value(beta, -xs + d)).abs() < 1e-4);
            }
        }
        // β = 0.6 at x = 1/2.4: (0.6/√2)((1+2/π)sin(5π/12) + (1-2/π)cos(5π/12))
        assert!((rrc_value(0.6, 1.0 / 2.4) - 0.710_601_173_980_937_5).abs() < 1e-12);
    }

    #[test]
    fn rrc_zero_roll_off_matches_sinc_shape() {
        let a = PulseShape::rrc(0.0, 0.0).unwrap();
        let s = PulseShape::sinc();
        for x in [-1.5, -0.5, 0.0, 0.25, 2.0] {
            assert_eq!(a.delay_kernel(x), s.delay_kernel(x));
            assert_eq!(a.doppler_window(x), s.doppler_window(x));
        }
        assert!(PulseShape::rrc(1.2, 0.0).is_err());
    }

    #[test]
    fn srrc_spectrum_energy() {
        // ∫ G² = 1 for any roll-off
        for beta in [0.0, 0.3, 0.6, 1.0] {
            let steps = 200_000;
            let h = 2.0 / steps as f64;
            let e: f64 = (0..steps).map(|i| srrc_spectrum(beta, -1.0 + (i as f64 + 0.5) * h).powi(2) * h).sum();
            assert!((e - 1.0).abs() < 1e-6, "{beta} {e}");
        }
    }

    fn small() -> ZakParams {
        ZakParams::new(7, 9, 15e3).unwrap()
    }

    #[test]
    fn sinc_pulsone_peaks_every_period() {
        let p = small();
        let s = synthesize_pulsone(0, 0, p, PulseShape::sinc(), 4, 16).unwrap();
        let step = 1.0 / s.sample_rate;
        for n in 0..9 {
            let t = n as f64 * p.tau_p();
            let i = ((t - s.t0) / step).round() as usize;
            let here = s.samples[i].norm();
            assert!(here > s.samples[i - 1].norm() && here > s.samples[i + 1].norm());
            assert!((here - (p.bandwidth() / 9.0).sqrt()).abs() < 1e-3 * here);
        }
        let outside = ((-p.tau_p() - s.t0) / step).round() as usize;
        assert!(s.samples[outside].norm() < 0.05 * (p.bandwidth() / 9.0).sqrt());
    }

    #[test]
    fn pulsone_tone_frequency() {
        let p = small();
        let l = 3;
        let s = synthesize_pulsone(2, l, p, PulseShape::sinc(), 4, 16).unwrap();
        // Scan tone frequencies within one Doppler period.
        let steps = 360;
        let mut best = (0.0, 0.0);
        for i in 0..steps {
            let f = p.nu_p() * i as f64 / steps as f64;
            let c: Complex64 = s
                .samples
                .iter()
                .enumerate()
                .map(|(j, v)| v * Complex64::from_polar(1.0, -2.0 * PI * f * s.time(j)))
                .sum();
            if c.norm() > best.1 {
                best = (f, c.norm());
            }
        }
        let expect = l as f64 * p.nu_p() / 9.0;
        assert!((best.0 - expect).abs() <= p.nu_p() / steps as f64);
    }

    #[test]
    fn energy_matches_dd_energy() {
        let p = ZakParams::default();
        for pulse in [PulseShape::sinc(), PulseShape::rrc(0.6, 0.6).unwrap()] {
            for (k, l) in [(0, 0), (16, 19), (30, 36), (7, 2)] {
                let s = synthesize_pulsone(k, l, p, pulse, 4, 16).unwrap();
                assert!((s.energy() - 1.0).abs() < 0.02, "{pulse:?} {k} {l} {}", s.energy());
            }
        }
    }

    #[test]
    fn frame_is_superposition() {
        let p = small();
        let pulse = PulseShape::rrc(0.5, 0.3).unwrap();
        let x = QuasiPeriodicGrid::from_fn(p, |k, l| Complex64::new((k * l) as f64 * 0.1, k as f64 - 3.0));
        let whole = synthesize_frame(&x, pulse, 4, 8).unwrap();
        let mut sum = vec![Complex64::new(0.0, 0.0); whole.len()];
        for k in 0..7 {
            for l in 0..9 {
                let part = synthesize_pulsone(k, l, p, pulse, 4, 8).unwrap();
                assert_eq!(part.t0, whole.t0);
                for (a, b) in sum.iter_mut().zip(&part.samples) {
                    *a += b * x.value(k as usize, l as usize);
                }
            }
        }
        let err = whole.samples.iter().zip(&sum).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-9);
        let zero = synthesize_frame(&QuasiPeriodicGrid::zeros(p), pulse, 4, 8).unwrap();
        assert!(zero.samples.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn sampled_train_matches_continuous_eval() {
        let p = small();
        let pulse = PulseShape::rrc(0.6, 0.6).unwrap();
        let x = QuasiPeriodicGrid::point_pulse(p, 4, 2);
        let train = PulseTrain::from_grid(&x, pulse);
        let s = train.sample(4, 16).unwrap();
        for i in (0..s.len()).step_by(37) {
            assert!((s.samples[i] - train.eval(s.time(i), Some(16))).norm() < 1e-9);
        }
    }

    #[test]
    fn zak_round_trip() {
        let p = small();
        let fs = 4.0 * p.bandwidth();
        let len = 4 * 7 * 9;
        let samples = (0..len)
            .map(|i| {
                let t = i as f64 / fs;
                Complex64::from_polar(1.0, 2.0 * PI * 3.1e4 * t) + Complex64::new(sinc(t * 2e4 - 3.0), 0.0)
            })
            .collect();
        let s = TDSignal { sample_rate: fs, t0: 0.0, samples };
        let z = zak_transform(&s, &p).unwrap();
        let back = inverse_zak(&z, &p).unwrap();
        let err = s.samples.iter().zip(&back.samples).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-9);

        let zero = TDSignal { sample_rate: fs, t0: 0.0, samples: vec![Complex64::new(0.0, 0.0); len] };
        assert!(zak_transform(&zero, &p).unwrap().values.iter().all(|v| v.norm() == 0.0));
        let short = TDSignal { sample_rate: fs, t0: 0.0, samples: vec![Complex64::new(0.0, 0.0); len - 1] };
        assert!(zak_transform(&short, &p).is_err());
    }

    #[test]
    fn zak_of_pulsone_is_concentrated() {
        let p = ZakParams::default();
        let n_os = 4;
        let s = synthesize_pulsone(0, 0, p, PulseShape::sinc(), n_os, 16).unwrap();
        // One frame, starting half a delay bin before the first pulse.
        let start = ((-0.5 / p.bandwidth() - s.t0) * s.sample_rate).round() as usize;
        let per = n_os * p.m();
        let frame = TDSignal {
            sample_rate: s.sample_rate,
            t0: s.time(start),
            samples: s.samples[start..start + per * p.n()].to_vec(),
        };
        let z = zak_transform(&frame, &p).unwrap();
        let total: f64 = z.values.iter().map(|v| v.norm_sqr()).sum();
        // Delay distance is circular: the left tail of the pulse at τ = 0
        // shows up at the end of the period.
        let centre = (n_os / 2) as i64;
        let dist = |a: usize| {
            let d = (a as i64 - centre).rem_euclid(per as i64);
            d.min(per as i64 - d) as usize
        };
        let cell: f64 = (0..per).filter(|a| dist(*a) <= 2 * n_os).map(|a| z.get(a, 0).norm_sqr()).sum();
        assert!(cell / total >= 0.95, "{}", cell / total);
    }

    #[test]
    fn papr_basics() {
        let flat = TDSignal {
            sample_rate: 1.0,
            t0: 0.0,
            samples: (0..64).map(|i| Complex64::from_polar(2.0, i as f64)).collect(),
        };
        assert!(papr(&flat).unwrap().abs() < 1e-12);
        assert_eq!(iapr_ccdf(&flat, &[-1.0, 1.0]).unwrap(), vec![1.0, 0.0]);
        let zero = TDSignal { sample_rate: 1.0, t0: 0.0, samples: vec![Complex64::new(0.0, 0.0); 4] };
        assert!(papr(&zero).is_err());
    }

    #[test]
    fn frame_papr_of_pulsone() {
        let p = ZakParams::default();
        let s = synthesize_pulsone(16, 19, p, PulseShape::rrc(0.6, 0.6).unwrap(), 4, 16).unwrap();
        let t = p.duration();
        let db = papr_per_frame(&s, t).unwrap();
        // Roughly M times the RRC peak.
        assert!((13.0..17.0).contains(&db), "{db}");
        let start = frame_center(&p) - t / 2.0;
        let c = iapr_ccdf_per_frame(&s, start, t, &[-100.0, db + 0.01]).unwrap();
        assert_eq!(c, vec![1.0, 0.0]);
        assert!(papr_per_frame(&s, 0.0).is_err());
    }
}
