//! Random channel draws and DD-domain noise.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use zakdd_core::channel::{receive, veh_a_paths, ChannelPath, DopplerProfile};
use zakdd_core::dd::{QuasiPeriodicGrid, SparseDDTaps, ZakParams};

use crate::rng::{complex_gaussian, trial_rng};

/// Vehicular-A draw: Rayleigh path gains with the tabulated powers and
/// `ν_i = ν_max cos θ_i`.
pub fn sample_veha<R: Rng + ?Sized>(nu_max: f64, profile: DopplerProfile, rng: &mut R) -> anyhow::Result<Vec<ChannelPath>> {
    let gains: [Complex64; 6] = std::array::from_fn(|_| complex_gaussian(rng, 1.0));
    let angles: [f64; 6] = std::array::from_fn(|_| rng.random::<f64>() * 2.0 * PI);
    Ok(veh_a_paths(nu_max, profile, &gains, &angles)?)
}

/// A channel realization that can be replayed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRecord {
    pub seed: u64,
    pub trial: u64,
    pub nu_max: f64,
    pub profile: DopplerProfile,
    pub paths: Vec<ChannelPath>,
}

impl ChannelRecord {
    pub fn draw(seed: u64, trial: u64, nu_max: f64, profile: DopplerProfile) -> anyhow::Result<Self> {
        let paths = sample_veha(nu_max, profile, &mut trial_rng(seed, trial))?;
        Ok(Self { seed, trial, nu_max, profile, paths })
    }
}

/// `MN` i.i.d. noise samples with variance `n0` each.
pub fn dd_noise<R: Rng + ?Sized>(rng: &mut R, n0: f64, params: &ZakParams) -> Vec<Complex64> {
    (0..params.mn()).map(|_| complex_gaussian(rng, n0)).collect()
}

/// `h *σ x + n` with fresh noise of per-sample variance `n0`.
pub fn apply_channel<R: Rng + ?Sized>(
    h: &SparseDDTaps,
    x: &QuasiPeriodicGrid,
    n0: f64,
    rng: &mut R,
) -> anyhow::Result<QuasiPeriodicGrid> {
    let noise = dd_noise(rng, n0, x.params());
    Ok(receive(h, x, &noise)?)
}
