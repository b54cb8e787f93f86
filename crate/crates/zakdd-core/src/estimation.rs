//! Model-free estimation of `h_eff` by reading a cross-ambiguity surface on a
//! region around the expected support.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::ambiguity::cross_ambiguity_at;
use crate::dd::{DDTap, QuasiPeriodicGrid, SparseDDTaps};
use crate::spreading::{aliased_positions, DDLattice};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EstimationReport {
    pub taps: SparseDDTaps,
    pub read_region: Vec<(i64, i64)>,
    /// Region cells that overlap a lattice translate of another region cell.
    pub aliased: Vec<(i64, i64)>,
    pub nmse: Option<f64>,
    pub predicted_nmse: Option<f64>,
}

impl EstimationReport {
    pub fn new(taps: SparseDDTaps, read_region: Vec<(i64, i64)>) -> Self {
        Self { taps, read_region, aliased: Vec::new(), nmse: None, predicted_nmse: None }
    }

    pub fn is_aliased(&self, k: i64, l: i64) -> bool {
        self.aliased.binary_search(&(k, l)).is_ok()
    }
}

fn read(y: &QuasiPeriodicGrid, x: &QuasiPeriodicGrid, region: &[(i64, i64)], scale: f64) -> Result<SparseDDTaps> {
    let values = cross_ambiguity_at(y, x, region)?;
    SparseDDTaps::new(region.iter().zip(values).map(|(&(k, l), v)| DDTap::new(k, l, v * scale)).collect())
}

/// Point-pilot estimate `ĥ[k,l] = A_{y,x_p}[k,l]` on `region`. The pilot is
/// taken with unit amplitude; divide by `√E_p` for a scaled pilot.
pub fn estimate_point(y: &QuasiPeriodicGrid, k_p: i64, l_p: i64, region: &[(i64, i64)]) -> Result<SparseDDTaps> {
    read(y, &QuasiPeriodicGrid::point_pulse(*y.params(), k_p, l_p), region, 1.0)
}

/// Spread-pilot estimate `ĥ[k,l] = A_{y,x_s}[k,l] / √E_p` on `region`.
pub fn estimate_spread(
    y: &QuasiPeriodicGrid,
    x_s: &QuasiPeriodicGrid,
    e_p: f64,
    region: &[(i64, i64)],
) -> Result<SparseDDTaps> {
    if !(e_p > 0.0) {
        return Err(Error::InvalidParameter("pilot energy must be positive"));
    }
    read(y, x_s, region, 1.0 / e_p.sqrt())
}

/// Spread-pilot estimate with the region's aliasing under `lattice` flagged.
pub fn estimate_spread_report(
    y: &QuasiPeriodicGrid,
    x_s: &QuasiPeriodicGrid,
    e_p: f64,
    region: &[(i64, i64)],
    lattice: &DDLattice,
) -> Result<EstimationReport> {
    let taps = estimate_spread(y, x_s, e_p, region)?;
    let mut report = EstimationReport::new(taps, region.to_vec());
    report.aliased = aliased_positions(region, lattice);
    Ok(report)
}

pub fn threshold_taps(taps: &SparseDDTaps, sigma_est: f64, factor: f64) -> SparseDDTaps {
    let limit = factor * sigma_est;
    taps.filter(|t| t.g.norm() >= limit)
}

/// `(1/MN)(1 + ρ_d)/ρ_p`, the per-tap error normalized by the channel energy.
pub fn predicted_nmse(rho_d: f64, rho_p: f64, mn: usize) -> Result<f64> {
    if !(rho_p > 0.0) || !(rho_d >= 0.0) || mn == 0 {
        return Err(Error::InvalidParameter("need rho_p > 0, rho_d >= 0, MN > 0"));
    }
    Ok((1.0 + rho_d) / (rho_p * mn as f64))
}

/// `Σ_R |h - ĥ|² / Σ_R |h|²` over `region`.
pub fn measure_nmse(h: &SparseDDTaps, h_hat: &SparseDDTaps, region: &[(i64, i64)]) -> Result<f64> {
    let den: f64 = region.iter().map(|&(k, l)| h.gain(k, l).norm_sqr()).sum();
    if den == 0.0 {
        return Err(Error::UndefinedMetric("channel has no energy in the region"));
    }
    let num: f64 = region.iter().map(|&(k, l)| (h.gain(k, l) - h_hat.gain(k, l)).norm_sqr()).sum();
    Ok(num / den)
}

/// Mean per-cell error over `region` divided by `Σ_R |h|²`; the quantity
/// [`predicted_nmse`] forecasts.
pub fn measure_tap_nmse(h: &SparseDDTaps, h_hat: &SparseDDTaps, region: &[(i64, i64)]) -> Result<f64> {
    Ok(measure_nmse(h, h_hat, region)? / region.len() as f64)
}

/// Bounding box of `support` grown by `dilate` bins on every side.
pub fn bounding_region(support: &[(i64, i64)], dilate: i64) -> Vec<(i64, i64)> {
    if support.is_empty() {
        return Vec::new();
    }
    let k0 = support.iter().map(|p| p.0).min().unwrap() - dilate;
    let k1 = support.iter().map(|p| p.0).max().unwrap() + dilate;
    let l0 = support.iter().map(|p| p.1).min().unwrap() - dilate;
    let l1 = support.iter().map(|p| p.1).max().unwrap() + dilate;
    (k0..=k1).flat_map(|k| (l0..=l1).map(move |l| (k, l))).collect()
}

/// Shifts every region cell by `(dk, dl)`.
pub fn shift_region(region: &[(i64, i64)], dk: i64, dl: i64) -> Vec<(i64, i64)> {
    region.iter().map(|&(k, l)| (k + dk, l + dl)).collect()
}
