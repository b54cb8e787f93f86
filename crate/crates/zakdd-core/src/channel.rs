//! Doubly-spread channel model and the discrete effective DD filter.
//!
//! `h_eff = w_rx *σ h_phy *σ w_tx`, sampled at `(k/B, l/T)`. For a path
//! `(h, τ, ν)` the sifted integrand separates into a delay integral and a
//! Doppler integral, both evaluated by the trapezoid rule over the truncated
//! receive pulse.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::dd::{twisted_conv, DDTap, QuasiPeriodicGrid, SparseDDTaps, ZakParams};
use crate::waveform::{frame_center, PulseShape};
use crate::{Error, Result};

/// Path delays of the vehicular-A profile, microseconds.
pub const VEH_A_DELAYS_US: [f64; 6] = [0.0, 0.31, 0.71, 1.09, 1.73, 2.51];
/// Mean relative path powers of the vehicular-A profile, dB.
pub const VEH_A_POWERS_DB: [f64; 6] = [0.0, -1.0, -9.0, -10.0, -15.0, -20.0];

/// One propagation path of `h_phy(τ,ν) = Σ h_i δ(τ-τ_i) δ(ν-ν_i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChannelPath {
    pub gain: Complex64,
    /// Seconds, non-negative.
    pub delay: f64,
    /// Hertz.
    pub doppler: f64,
}

impl ChannelPath {
    pub fn new(gain: Complex64, delay: f64, doppler: f64) -> Result<Self> {
        if !(delay >= 0.0 && delay.is_finite()) || !doppler.is_finite() {
            return Err(Error::InvalidParameter("path delay must be finite and non-negative"));
        }
        Ok(Self { gain, delay, doppler })
    }
}

/// How path Dopplers are assigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum DopplerProfile {
    /// `ν_i = ν_max cos θ_i` with random angles.
    Table,
    /// `{ν, -ν, ν/2, -ν/2, ν/4, -ν/4}`.
    Fixed,
}

/// Linear vehicular-A path powers normalized to unit sum.
pub fn veh_a_powers() -> [f64; 6] {
    let lin = VEH_A_POWERS_DB.map(|db| 10f64.powf(db / 10.0));
    let total: f64 = lin.iter().sum();
    lin.map(|p| p / total)
}

pub fn fixed_dopplers(nu_max: f64) -> [f64; 6] {
    [nu_max, -nu_max, nu_max / 2.0, -nu_max / 2.0, nu_max / 4.0, -nu_max / 4.0]
}

/// Vehicular-A paths from unit-variance gain draws and angle draws (ignored
/// for the fixed profile).
pub fn veh_a_paths(
    nu_max: f64,
    profile: DopplerProfile,
    unit_gains: &[Complex64; 6],
    angles: &[f64; 6],
) -> Result<Vec<ChannelPath>> {
    if !(nu_max >= 0.0) {
        return Err(Error::InvalidParameter("nu_max must be non-negative"));
    }
    let powers = veh_a_powers();
    let fixed = fixed_dopplers(nu_max);
    (0..6)
        .map(|i| {
            let doppler = match profile {
                DopplerProfile::Table => nu_max * angles[i].cos(),
                DopplerProfile::Fixed => fixed[i],
            };
            ChannelPath::new(unit_gains[i] * powers[i].sqrt(), VEH_A_DELAYS_US[i] * 1e-6, doppler)
        })
        .collect()
}

/// Inclusive index window on which `h_eff` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DDWindow {
    pub k_min: i64,
    pub k_max: i64,
    pub l_min: i64,
    pub l_max: i64,
}

impl DDWindow {
    /// Covers every path's delay and Doppler plus `tail` bins on each side.
    pub fn around(paths: &[ChannelPath], params: &ZakParams, tail: i64) -> Self {
        let (b, t) = (params.bandwidth(), params.duration());
        let (mut kd, mut ku, mut ld, mut lu) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for p in paths {
            kd = kd.min(p.delay * b);
            ku = ku.max(p.delay * b);
            ld = ld.min(p.doppler * t);
            lu = lu.max(p.doppler * t);
        }
        Self {
            k_min: kd.floor() as i64 - tail,
            k_max: ku.ceil() as i64 + tail,
            l_min: ld.floor() as i64 - tail,
            l_max: lu.ceil() as i64 + tail,
        }
    }

    pub fn width(&self) -> usize {
        (self.k_max - self.k_min + 1) as usize
    }

    pub fn height(&self) -> usize {
        (self.l_max - self.l_min + 1) as usize
    }
}

/// Trapezoid quadrature over the truncated receive pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuadratureSpec {
    /// Nodes per `1/B` along delay and per `1/T` along Doppler.
    pub points_per_bin: usize,
    /// One-sided truncation of `w_rx`, in bins.
    pub n_lobes: usize,
    /// Taps below `floor · max|h|` are dropped.
    pub floor: f64,
    /// Fail when a tap on the window border exceeds this fraction of the peak.
    pub edge_tolerance: Option<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { points_per_bin: 8, n_lobes: 16, floor: 1e-6, edge_tolerance: None }
    }
}

/// Trapezoid nodes `-L + j/P` and weights over `[-L, L]`.
fn nodes(spec: &QuadratureSpec) -> (Vec<f64>, Vec<f64>) {
    let p = spec.points_per_bin as i64;
    let l = spec.n_lobes as i64;
    let count = 2 * l * p + 1;
    let h = 1.0 / p as f64;
    let x = (0..count).map(|j| -(l as f64) + j as f64 * h).collect();
    let w = (0..count).map(|j| if j == 0 || j == count - 1 { h / 2.0 } else { h }).collect();
    (x, w)
}

/// Samples of `h_eff` on `window`, before flooring.
pub fn h_eff_grid(
    paths: &[ChannelPath],
    pulse: &PulseShape,
    params: &ZakParams,
    window: &DDWindow,
    quad: &QuadratureSpec,
) -> Result<Vec<Complex64>> {
    if quad.points_per_bin == 0 || quad.n_lobes == 0 {
        return Err(Error::InvalidParameter("quadrature needs nodes"));
    }
    if window.k_max < window.k_min || window.l_max < window.l_min {
        return Err(Error::InvalidParameter("empty window"));
    }
    let (b, t) = (params.bandwidth(), params.duration());
    let mn = params.mn() as f64;
    let tc = frame_center(params);
    let (x, w) = nodes(quad);
    let p = quad.points_per_bin as i64;
    let lobes = quad.n_lobes as i64;
    let (width, height) = (window.width(), window.height());
    let mut out = vec![Complex64::new(0.0, 0.0); width * height];

    let gv: Vec<f64> = x.iter().zip(&w).map(|(v, wt)| pulse.doppler_kernel(*v) * wt).collect();
    for path in paths {
        let du = path.delay * b;
        let dv = path.doppler * t;
        let nu_over_b = path.doppler / b;

        // Delay factor: ∫ g(u) g(k - u - Du) e^{j2π(ν/B)(k - u - Du)} du.
        let i1: Vec<Complex64> = (window.k_min..=window.k_max)
            .map(|k| {
                x.iter()
                    .zip(&w)
                    .map(|(u, wt)| {
                        let a = k as f64 - u - du;
                        Complex64::from_polar(
                            pulse.delay_kernel(*u) * pulse.delay_kernel(a) * wt,
                            2.0 * PI * nu_over_b * a,
                        )
                    })
                    .sum()
            })
            .collect();

        // Doppler factor: ∫ g(v) g(l - v - Dv) e^{j2π v k/MN} dv. The shifted
        // kernel is tabulated once, indexed by (l + L)P - j.
        let i_lo = (window.l_min + lobes) * p - 2 * lobes * p;
        let i_hi = (window.l_max + lobes) * p;
        let shifted: Vec<f64> =
            (i_lo..=i_hi).map(|i| pulse.doppler_kernel(i as f64 / p as f64 - dv)).collect();

        for (ki, k) in (window.k_min..=window.k_max).enumerate() {
            if i1[ki] == Complex64::new(0.0, 0.0) {
                continue;
            }
            let twist: Vec<Complex64> = x
                .iter()
                .zip(&gv)
                .map(|(v, g)| Complex64::from_polar(*g, 2.0 * PI * v * k as f64 / mn))
                .collect();
            for (li, l) in (window.l_min..=window.l_max).enumerate() {
                let base = ((l + lobes) * p - i_lo) as usize;
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, tw) in twist.iter().enumerate() {
                    acc += tw * shifted[base - j];
                }
                let centring = Complex64::from_polar(1.0, -2.0 * PI * (l as f64 / t - path.doppler) * tc);
                out[ki * height + li] += path.gain * i1[ki] * acc * centring;
            }
        }
    }
    Ok(out)
}

/// Discrete effective channel on `window`, floored and checked for
/// truncation.
pub fn compute_h_eff(
    paths: &[ChannelPath],
    pulse: &PulseShape,
    params: &ZakParams,
    window: &DDWindow,
    quad: &QuadratureSpec,
) -> Result<SparseDDTaps> {
    let grid = h_eff_grid(paths, pulse, params, window, quad)?;
    let height = window.height();
    let peak = grid.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if let Some(tol) = quad.edge_tolerance {
        let edge = grid
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let (ki, li) = (i / height, i % height);
                ki == 0 || li == 0 || ki + 1 == window.width() || li + 1 == height
            })
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max);
        if peak > 0.0 && edge > tol * peak {
            return Err(Error::TruncatedSupport { edge_ratio: edge / peak });
        }
    }
    let limit = quad.floor * peak;
    let taps = grid
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm() >= limit && v.norm() > 0.0)
        .map(|(i, v)| {
            DDTap::new(window.k_min + (i / height) as i64, window.l_min + (i % height) as i64, *v)
        })
        .collect();
    SparseDDTaps::new(taps)
}

/// Smallest set of taps, greedy by magnitude, holding at least
/// `energy_fraction` of the filter energy.
pub fn estimate_support(h: &SparseDDTaps, energy_fraction: f64) -> Result<Vec<(i64, i64)>> {
    if !(energy_fraction > 0.0 && energy_fraction <= 1.0) {
        return Err(Error::InvalidParameter("energy fraction must lie in (0, 1]"));
    }
    let mut taps: Vec<&DDTap> = h.iter().filter(|t| t.g.norm_sqr() > 0.0).collect();
    if energy_fraction == 1.0 {
        return Ok(taps.iter().map(|t| (t.k, t.l)).collect());
    }
    taps.sort_by(|a, b| b.g.norm_sqr().total_cmp(&a.g.norm_sqr()));
    let goal = energy_fraction * h.energy();
    let mut acc = 0.0;
    let mut out = Vec::new();
    for t in taps {
        if acc >= goal {
            break;
        }
        acc += t.g.norm_sqr();
        out.push((t.k, t.l));
    }
    out.sort_unstable();
    Ok(out)
}

/// Received grid `h *σ x + n` with `noise` the fundamental-domain noise
/// samples (extended quasi-periodically like any grid).
pub fn receive(h: &SparseDDTaps, x: &QuasiPeriodicGrid, noise: &[Complex64]) -> Result<QuasiPeriodicGrid> {
    let y = twisted_conv(h, x);
    if noise.len() != x.params().mn() {
        return Err(Error::Dimension("noise needs M*N samples"));
    }
    let values = y.values().iter().zip(noise).map(|(a, b)| a + b).collect();
    QuasiPeriodicGrid::from_values(*x.params(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::PulseShape;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn veh_a_tables() {
        let paths = veh_a_paths(815.0, DopplerProfile::Fixed, &[c(1.0, 0.0); 6], &[0.0; 6]).unwrap();
        let delays: Vec<f64> = paths.iter().map(|p| p.delay * 1e6).collect();
        assert!(delays.iter().zip(VEH_A_DELAYS_US).all(|(a, b)| (a - b).abs() < 1e-12));
        let d: Vec<f64> = paths.iter().map(|p| p.doppler).collect();
        assert_eq!(d, vec![815.0, -815.0, 407.5, -407.5, 203.75, -203.75]);
        let total: f64 = veh_a_powers().iter().sum();
        assert!((total - 1.0).abs() < 1e-15);
        assert!((veh_a_powers()[0] / veh_a_powers()[1] - 10f64.powf(0.1)).abs() < 1e-12);

        let angles = [0.3, 1.9, 2.8, 3.7, 4.4, 6.1];
        let paths = veh_a_paths(500.0, DopplerProfile::Table, &[c(1.0, 0.0); 6], &angles).unwrap();
        assert!(paths.iter().all(|p| p.doppler.abs() <= 500.0));
        assert!(ChannelPath::new(c(1.0, 0.0), -1e-6, 0.0).is_err());
    }

    #[test]
    fn identity_path_gives_unit_tap() {
        let p = ZakParams::new(11, 13, 30e3).unwrap();
        let path = [ChannelPath::new(c(1.0, 0.0), 0.0, 0.0).unwrap()];
        let win = DDWindow { k_min: -4, k_max: 4, l_min: -4, l_max: 4 };
        let q = QuadratureSpec { n_lobes: 64, ..Default::default() };
        let h = compute_h_eff(&path, &PulseShape::sinc(), &p, &win, &q).unwrap();
        // The sinc tails beyond the truncation carry about 1/(π²L) per axis.
        assert!((h.gain(0, 0) - c(1.0, 0.0)).norm() < 5e-3, "{}", h.gain(0, 0));
        for t in h.iter().filter(|t| (t.k, t.l) != (0, 0)) {
            assert!(t.g.norm() < 2e-3, "{t:?}");
        }
    }

    #[test]
    fn integer_delay_moves_the_peak() {
        let p = ZakParams::new(11, 13, 30e3).unwrap();
        let b = p.bandwidth();
        let path = [ChannelPath::new(c(1.0, 0.0), 2.0 / b, 0.0).unwrap()];
        let win = DDWindow { k_min: -3, k_max: 7, l_min: -3, l_max: 3 };
        let h = compute_h_eff(&path, &PulseShape::sinc(), &p, &win, &QuadratureSpec::default()).unwrap();
        let peak = h.iter().max_by(|a, b| a.g.norm().total_cmp(&b.g.norm())).unwrap();
        assert_eq!((peak.k, peak.l), (2, 0));
        let reference = compute_h_eff(
            &[ChannelPath::new(c(1.0, 0.0), 0.0, 0.0).unwrap()],
            &PulseShape::sinc(),
            &p,
            &win,
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!((peak.g.norm() - reference.gain(0, 0).norm()).abs() < 0.01 * reference.gain(0, 0).norm());
    }

    #[test]
    fn fractional_delay_leaks_like_sinc() {
        // With zero Doppler the delay factor is the sinc autocorrelation,
        // sinc(k - Du), and the Doppler factor at l = 0 is close to one.
        let p = ZakParams::new(11, 13, 30e3).unwrap();
        let b = p.bandwidth();
        let du = 1.4;
        let path = [ChannelPath::new(c(1.0, 0.0), du / b, 0.0).unwrap()];
        let win = DDWindow { k_min: -6, k_max: 8, l_min: 0, l_max: 0 };
        let q = QuadratureSpec { n_lobes: 64, ..Default::default() };
        let h = h_eff_grid(&path, &PulseShape::sinc(), &p, &win, &q).unwrap();
        for (i, k) in (-6..=8).enumerate() {
            let expect = crate::waveform::sinc(k as f64 - du).abs();
            assert!((h[i].norm() - expect).abs() < 0.01, "{k}: {} vs {expect}", h[i].norm());
        }
    }

    #[test]
    fn quadrature_converges() {
        let p = ZakParams::default();
        let paths = [
            ChannelPath::new(c(0.8, 0.1), 0.31e-6, 412.0).unwrap(),
            ChannelPath::new(c(-0.3, 0.4), 1.73e-6, -633.0).unwrap(),
        ];
        let pulse = PulseShape::rrc(0.6, 0.6).unwrap();
        let win = DDWindow::around(&paths, &p, 6);
        let a = h_eff_grid(&paths, &pulse, &p, &win, &QuadratureSpec::default()).unwrap();
        let fine = QuadratureSpec { points_per_bin: 16, ..Default::default() };
        let bb = h_eff_grid(&paths, &pulse, &p, &win, &fine).unwrap();
        let num: f64 = a.iter().zip(&bb).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = bb.iter().map(|y| y.norm_sqr()).sum();
        assert!((num / den).sqrt() < 0.005);
    }

    #[test]
    fn doppler_spread_grows_with_nu_max() {
        let p = ZakParams::default();
        let pulse = PulseShape::rrc(0.6, 0.6).unwrap();
        let spread = |nu: f64| {
            let paths = veh_a_paths(nu, DopplerProfile::Fixed, &[c(1.0, 0.0); 6], &[0.0; 6]).unwrap();
            let win = DDWindow::around(&paths, &p, 8);
            let h = compute_h_eff(&paths, &pulse, &p, &win, &QuadratureSpec::default()).unwrap();
            let s = estimate_support(&h, 0.99).unwrap();
            let lo = s.iter().map(|x| x.1).min().unwrap();
            let hi = s.iter().map(|x| x.1).max().unwrap();
            hi - lo
        };
        assert!(spread(12e3) > spread(815.0) + 10);
    }

    #[test]
    fn edge_check_and_floor() {
        let p = ZakParams::default();
        let path = [ChannelPath::new(c(1.0, 0.0), 0.5 / p.bandwidth(), 0.0).unwrap()];
        let win = DDWindow { k_min: -1, k_max: 2, l_min: -1, l_max: 1 };
        let strict = QuadratureSpec { edge_tolerance: Some(1e-3), ..Default::default() };
        assert!(matches!(
            compute_h_eff(&path, &PulseShape::sinc(), &p, &win, &strict),
            Err(Error::TruncatedSupport { .. })
        ));
        let loose = QuadratureSpec { floor: 0.5, ..Default::default() };
        let h = compute_h_eff(&path, &PulseShape::sinc(), &p, &win, &loose).unwrap();
        assert_eq!(h.support(), vec![(0, 0), (1, 0)]);
    }

    #[test]
    fn support_estimation() {
        let h = SparseDDTaps::new(vec![
            DDTap::new(0, 0, c(3.0, 0.0)),
            DDTap::new(1, 2, c(0.0, 1.0)),
            DDTap::new(2, -1, c(0.1, 0.0)),
        ])
        .unwrap();
        assert_eq!(estimate_support(&h, 1.0).unwrap().len(), 3);
        assert_eq!(estimate_support(&h, 0.5).unwrap(), vec![(0, 0)]);
        assert_eq!(estimate_support(&h, 0.95).unwrap(), vec![(0, 0), (1, 2)]);
        let one = SparseDDTaps::single(4, 4, c(0.2, 0.0));
        assert_eq!(estimate_support(&one, 1e-3).unwrap(), vec![(4, 4)]);
        assert!(estimate_support(&h, 0.0).is_err());
    }

    #[test]
    fn noiseless_receive_is_twisted_conv() {
        let p = ZakParams::new(5, 7, 1e3).unwrap();
        let x = QuasiPeriodicGrid::from_fn(p, |k, l| c(k as f64, l as f64));
        let h = SparseDDTaps::single(1, -1, c(0.5, 0.5));
        let y = receive(&h, &x, &[c(0.0, 0.0); 35]).unwrap();
        assert_eq!(y, twisted_conv(&h, &x));
        assert!(receive(&h, &x, &[c(0.0, 0.0); 3]).is_err());
    }
}
