//! Monte Carlo link trials: channel draw, frame, estimation, cancellation,
//! equalization and metrics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use zakdd_core::channel::{compute_h_eff, estimate_support, ChannelPath, DDWindow, DopplerProfile, QuadratureSpec};
use zakdd_core::dd::{twisted_conv, QuasiPeriodicGrid, SparseDDTaps, ZakParams};
use zakdd_core::estimation::{
    bounding_region, estimate_point, estimate_spread, measure_nmse, measure_tap_nmse, predicted_nmse,
    threshold_taps,
};
use zakdd_core::isac::{
    assemble_frame_with, ber, build_equalizer, cancel_pilot, detect_qpsk, masked_bits, mmse_equalize, sir,
    GuardRegion, Pilot,
};
use zakdd_core::spreading::{aliased_positions, lattice_lq, ChirpSpec, DDLattice};
use zakdd_core::waveform::PulseShape;

use crate::channel::{apply_channel, sample_veha};
use crate::rng::{random_bits, trial_rng};

/// How the receiver learns the channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PilotMode {
    /// Chirp-spread pilot superimposed on data everywhere.
    Spread { q: i64 },
    /// Point pilot at the frame centre with a blank 7×7 guard.
    Guard7x7,
    /// No pilot; the receiver is given the true `h_eff`.
    PerfectCsi,
}

impl PilotMode {
    pub fn label(&self) -> &'static str {
        match self {
            PilotMode::Spread { .. } => "spread",
            PilotMode::Guard7x7 => "guard7x7",
            PilotMode::PerfectCsi => "perfect_csi",
        }
    }

    pub fn q(&self) -> Option<i64> {
        match self {
            PilotMode::Spread { q } => Some(*q),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkSetup {
    pub params: ZakParams,
    pub pulse: PulseShape,
    pub quad: QuadratureSpec,
    /// Extra bins around the path spread when evaluating `h_eff`.
    pub tail: i64,
    pub nu_max: f64,
    pub profile: DopplerProfile,
    pub rho_d_db: f64,
    pub pdr_db: f64,
    pub pilot: PilotMode,
    /// Energy share of `h_eff` whose bounding box (grown by one bin) is read.
    pub support_fraction: f64,
    /// Estimated taps below `factor · σ_est` are discarded.
    pub threshold_factor: f64,
    pub equalize: bool,
}

impl LinkSetup {
    pub fn new(params: ZakParams, pulse: PulseShape, pilot: PilotMode) -> Self {
        Self {
            params,
            pulse,
            quad: QuadratureSpec::default(),
            tail: 6,
            nu_max: 815.0,
            profile: DopplerProfile::Table,
            rho_d_db: 25.0,
            pdr_db: 10.0,
            pilot,
            support_fraction: 0.999,
            threshold_factor: 3.0,
            equalize: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: u64,
    /// `Σ_R|h-ĥ|²/Σ_R|h|²` over the read region, before thresholding.
    pub nmse: f64,
    /// Region NMSE divided by the number of read cells.
    pub tap_nmse: f64,
    pub predicted_nmse: f64,
    pub ber: Option<f64>,
    pub sir_db: Option<f64>,
    pub region_cells: usize,
    pub aliased_cells: usize,
}

fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

/// Per-setup state shared by all trials.
#[derive(Debug, Clone)]
pub struct Prepared {
    pilot: Pilot,
    pilot_grid: QuasiPeriodicGrid,
    lattice: Option<DDLattice>,
}

pub fn prepare(setup: &LinkSetup) -> anyhow::Result<Prepared> {
    let p = setup.params;
    let (pilot, lattice) = match setup.pilot {
        PilotMode::Spread { q } => (
            Pilot::Spread { spec: ChirpSpec::new(q, p.m(), p.n())?, k_p: 0, l_p: 0 },
            Some(lattice_lq(p.m(), p.n(), q)?),
        ),
        PilotMode::Guard7x7 => (
            Pilot::Point { k_p: (p.m() as i64 + 1) / 2, l_p: (p.n() as i64 + 1) / 2, guard: GuardRegion::Rect7x7 },
            None,
        ),
        PilotMode::PerfectCsi => (Pilot::Point { k_p: 0, l_p: 0, guard: GuardRegion::None }, None),
    };
    Ok(Prepared { pilot, pilot_grid: pilot.grid(p)?, lattice })
}

/// One frame with its own channel, bits and noise, all drawn from the
/// `(seed, trial)` stream.
pub fn run_trial(setup: &LinkSetup, seed: u64, trial: u64) -> anyhow::Result<TrialOutcome> {
    run_prepared(setup, &prepare(setup)?, seed, trial)
}

pub fn run_prepared(setup: &LinkSetup, prep: &Prepared, seed: u64, trial: u64) -> anyhow::Result<TrialOutcome> {
    let p = setup.params;
    let mn = p.mn();
    let mut rng = trial_rng(seed, trial);
    let paths = sample_veha(setup.nu_max, setup.profile, &mut rng)?;
    let h = channel_filter(setup, &paths)?;

    let e_d = 1.0;
    let rho_d = db(setup.rho_d_db);
    let h_energy = h.energy();
    let n0 = e_d * h_energy / (mn as f64 * rho_d);
    let e_p = match setup.pilot {
        PilotMode::PerfectCsi => 0.0,
        _ => e_d * db(setup.pdr_db),
    };
    let pilot = prep.pilot;
    let bits = random_bits(&mut rng, 2 * mn);
    let frame = assemble_frame_with(&bits, e_d, e_p, &pilot, prep.pilot_grid.clone())?;
    let y = apply_channel(&h, &frame.transmit(), n0, &mut rng)?;

    let support = estimate_support(&h, setup.support_fraction)?;
    let mut region = bounding_region(&support, 1);
    let rho_p = e_p * h_energy / (mn as f64 * n0);
    let (raw, predicted, aliased) = match setup.pilot {
        PilotMode::Spread { .. } => {
            let aliased = prep.lattice.as_ref().map_or(0, |l| aliased_positions(&region, l).len());
            (estimate_spread(&y, &frame.pilot, e_p, &region)?, predicted_nmse(rho_d, rho_p, mn)?, aliased)
        }
        PilotMode::Guard7x7 => {
            // Only cells whose response to the pilot stays inside the guard
            // are free of data.
            region.retain(|&(k, l)| k.abs() <= 3 && l.abs() <= 3);
            let (k_p, l_p) = pilot.position();
            let est = estimate_point(&y, k_p, l_p, &region)?.scaled((1.0 / e_p.sqrt()).into());
            // Only the noise term is predicted for a guarded point pilot.
            (est, predicted_nmse(0.0, rho_p, mn)?, 0)
        }
        PilotMode::PerfectCsi => (h.clone(), 0.0, 0),
    };
    let (nmse, tap_nmse) = match setup.pilot {
        PilotMode::PerfectCsi => (0.0, 0.0),
        _ => (measure_nmse(&h, &raw, &region)?, measure_tap_nmse(&h, &raw, &region)?),
    };
    let h_hat = match setup.pilot {
        PilotMode::PerfectCsi => raw,
        _ => threshold_taps(&raw, (predicted * h_energy).sqrt(), setup.threshold_factor),
    };

    let (ber_value, sir_db) = if setup.equalize {
        let y_d = cancel_pilot(&y, &h_hat, &frame.pilot, e_p);
        let residual = cancel_pilot(&twisted_conv(&h, &frame.pilot_component()), &h_hat, &frame.pilot, e_p);
        let data_rx = twisted_conv(&h, &frame.data_component());
        let detected = if h_hat.is_empty() {
            vec![1u8; 2 * mn]
        } else {
            let model = build_equalizer(&h_hat, n0, e_d, p)?;
            detect_qpsk(&mmse_equalize(&model, &y_d)?)
        };
        let b = ber(&masked_bits(&detected, &frame.mask), &frame.sent_bits())?;
        let s = if e_p > 0.0 { Some(sir(&residual, &data_rx)) } else { None };
        (Some(b), s)
    } else {
        (None, None)
    };

    Ok(TrialOutcome {
        trial,
        nmse,
        tap_nmse,
        predicted_nmse: predicted,
        ber: ber_value,
        sir_db,
        region_cells: region.len(),
        aliased_cells: aliased,
    })
}

/// `h_eff` for a path set on a window covering the spread plus `setup.tail`.
pub fn channel_filter(setup: &LinkSetup, paths: &[ChannelPath]) -> anyhow::Result<SparseDDTaps> {
    let window = DDWindow::around(paths, &setup.params, setup.tail);
    Ok(compute_h_eff(paths, &setup.pulse, &setup.params, &window, &setup.quad)?)
}

/// Trials `0..trials` in parallel, returned in trial order.
pub fn run_batch(setup: &LinkSetup, seed: u64, trials: u64) -> anyhow::Result<Vec<TrialOutcome>> {
    let prep = prepare(setup)?;
    (0..trials).into_par_iter().map(|t| run_prepared(setup, &prep, seed, t)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub trials: usize,
    pub nmse: f64,
    pub tap_nmse: f64,
    pub predicted_nmse: f64,
    pub ber: Option<f64>,
    /// Mean of the finite per-trial values, dB.
    pub sir_db: Option<f64>,
}

pub fn summarize(outcomes: &[TrialOutcome]) -> BatchSummary {
    let n = outcomes.len().max(1) as f64;
    let mean = |f: &dyn Fn(&TrialOutcome) -> f64| outcomes.iter().map(f).sum::<f64>() / n;
    let bers: Vec<f64> = outcomes.iter().filter_map(|o| o.ber).collect();
    let sirs: Vec<f64> = outcomes.iter().filter_map(|o| o.sir_db).filter(|s| s.is_finite()).collect();
    BatchSummary {
        trials: outcomes.len(),
        nmse: mean(&|o| o.nmse),
        tap_nmse: mean(&|o| o.tap_nmse),
        predicted_nmse: mean(&|o| o.predicted_nmse),
        ber: (!bers.is_empty()).then(|| bers.iter().sum::<f64>() / bers.len() as f64),
        sir_db: (!sirs.is_empty()).then(|| sirs.iter().sum::<f64>() / sirs.len() as f64),
    }
}
