//! The experiment runners behind each subcommand. Each writes its CSV files
//! plus a JSON sidecar with the resolved configuration into `out`.

use std::path::{Path, PathBuf};

use zakdd_core::ambiguity::self_ambiguity;
use zakdd_core::dd::QuasiPeriodicGrid;
use zakdd_core::isac::{assemble_frame_with, effective_throughput, Pilot, ThroughputMode};
use zakdd_core::spreading::{lattice_lq, spread_pilot, ChirpSpec};
use zakdd_core::waveform::{frame_center, iapr_ccdf_per_frame, papr_per_frame, synthesize_frame, synthesize_pulsone};

use crate::channel::ChannelRecord;
use crate::config::{Experiment, ExperimentConfig, ModeConfig};
use crate::io::{fmt_float, fmt_opt, read_rows, write_csv, write_json};
use crate::rng::{random_bits, trial_rng};
use crate::sim::{channel_filter, run_batch, TrialOutcome};

pub struct RunOptions {
    /// Reuse per-point files already present in `out/points`.
    pub resume: bool,
}

pub fn run(experiment: Experiment, cfg: &ExperimentConfig, out: &Path, opts: &RunOptions) -> anyhow::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out)?;
    let mut resolved = cfg.clone();
    resolved.experiment = Some(experiment);
    resolved.output = Some(out.to_path_buf());
    let sidecar = out.join(format!("{}.json", experiment.name()));
    write_json(&sidecar, &resolved)?;
    let mut files = match experiment {
        Experiment::Ambiguity => ambiguity(cfg, out)?,
        Experiment::Lattice => lattice(cfg, out)?,
        Experiment::Papr => papr_experiment(cfg, out)?,
        Experiment::Heff => heff(cfg, out)?,
        Experiment::NmseSweep => sweep(cfg, out, false, opts)?,
        Experiment::BerSweep => sweep(cfg, out, true, opts)?,
        Experiment::Throughput => throughput(cfg, out)?,
    };
    files.push(sidecar);
    Ok(files)
}

fn ambiguity(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let p = cfg.zak_params()?;
    let spec = ChirpSpec::new(cfg.chirp.q, p.m(), p.n())?;
    let mut rows = Vec::new();
    for (label, grid) in [("point", QuasiPeriodicGrid::point_pulse(p, 0, 0)), ("spread", spread_pilot(&spec, 0, 0, p)?)] {
        let amb = self_ambiguity(&grid);
        let mn = amb.period() as i64;
        for k in 0..mn {
            for l in 0..mn {
                let v = amb.get(k, l);
                if v.norm() > 1e-9 {
                    rows.push(vec![
                        label.to_string(),
                        k.to_string(),
                        l.to_string(),
                        fmt_float(v.norm()),
                        fmt_float(v.re),
                        fmt_float(v.im),
                    ]);
                }
            }
        }
    }
    let path = out.join("ambiguity.csv");
    write_csv(&path, &["pilot", "k", "l", "abs", "re", "im"], &rows)?;
    Ok(vec![path])
}

fn lattice(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let lat = lattice_lq(cfg.params.m, cfg.params.n, cfg.chirp.q)?;
    let rows: Vec<Vec<String>> = lat.points().iter().map(|(k, l)| vec![k.to_string(), l.to_string()]).collect();
    let path = out.join("lattice.csv");
    write_csv(&path, &["k", "l"], &rows)?;
    Ok(vec![path])
}

fn papr_experiment(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let p = cfg.zak_params()?;
    let pulse = cfg.pulse_shape()?;
    let (n_os, lobes) = (cfg.waveform.n_os, cfg.waveform.n_lobes);
    let spec = ChirpSpec::new(cfg.chirp.q, p.m(), p.n())?;
    let spread = spread_pilot(&spec, 0, 0, p)?;
    let (kc, lc) = ((p.m() as i64 + 1) / 2, (p.n() as i64 + 1) / 2);
    // Pulse tails spill past the frame; average power is energy per frame.
    let t_frame = p.duration();
    let start = frame_center(&p) - t_frame / 2.0;
    let mut rows = vec![
        vec!["point".into(), "0".into(), "nan".into(), fmt_float(papr_per_frame(&synthesize_pulsone(kc, lc, p, pulse, n_os, lobes)?, t_frame)?)],
        vec!["spread".into(), "0".into(), "nan".into(), fmt_float(papr_per_frame(&synthesize_frame(&spread, pulse, n_os, lobes)?, t_frame)?)],
    ];
    let thresholds = &cfg.waveform.iapr_thresholds_db;
    let mut ccdf_rows = Vec::new();
    let pilot = Pilot::Spread { spec, k_p: 0, l_p: 0 };
    for pdr_db in cfg.powers.pdr_db.values() {
        let mut pooled = vec![0.0; thresholds.len()];
        for t in 0..cfg.channel.trials {
            let mut rng = trial_rng(cfg.seed, t);
            let bits = random_bits(&mut rng, 2 * p.mn());
            let frame = assemble_frame_with(&bits, 1.0, 10f64.powf(pdr_db / 10.0), &pilot, spread.clone())?;
            let s = synthesize_frame(&frame.transmit(), pulse, n_os, lobes)?;
            rows.push(vec!["spread+data".into(), t.to_string(), fmt_float(pdr_db), fmt_float(papr_per_frame(&s, t_frame)?)]);
            for (acc, v) in pooled.iter_mut().zip(iapr_ccdf_per_frame(&s, start, t_frame, thresholds)?) {
                *acc += v / cfg.channel.trials as f64;
            }
        }
        for (th, v) in thresholds.iter().zip(pooled) {
            ccdf_rows.push(vec![fmt_float(pdr_db), fmt_float(*th), fmt_float(v)]);
        }
    }
    let a = out.join("papr.csv");
    write_csv(&a, &["signal", "trial", "PDR_dB", "papr_dB"], &rows)?;
    let b = out.join("iapr_ccdf.csv");
    write_csv(&b, &["PDR_dB", "threshold_dB", "probability"], &ccdf_rows)?;
    Ok(vec![a, b])
}

fn heff(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<Vec<PathBuf>> {
    // Every ν_max reuses the same gain and angle draws, so only the Doppler
    // spread changes between realizations.
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for nu_max in cfg.channel.nu_max.values() {
        let record = ChannelRecord::draw(cfg.seed, 0, nu_max, cfg.channel.profile)?;
        let setup = cfg.link_setup(ModeConfig::PerfectCsi, nu_max, 0.0)?;
        let h = channel_filter(&setup, &record.paths)?;
        rows.extend(h.iter().map(|t| {
            vec![
                fmt_float(nu_max),
                t.k.to_string(),
                t.l.to_string(),
                fmt_float(t.g.re),
                fmt_float(t.g.im),
                fmt_float(t.g.norm()),
            ]
        }));
        records.push(record);
    }
    let a = out.join("heff.csv");
    write_csv(&a, &["nu_max", "k", "l", "re", "im", "abs"], &rows)?;
    let b = out.join("channel.json");
    write_json(&b, &records)?;
    Ok(vec![a, b])
}

const TRIAL_HEADER: [&str; 11] =
    ["seed", "trial", "nu_max", "PDR_dB", "rho_d_dB", "mode", "q", "NMSE", "BER", "SIR_dB", "throughput"];

fn mode_name(mode: ModeConfig) -> &'static str {
    match mode {
        ModeConfig::Spread => "spread",
        ModeConfig::Guard7x7 => "guard7x7",
        ModeConfig::PerfectCsi => "perfect_csi",
    }
}

fn throughput_mode(mode: ModeConfig) -> ThroughputMode {
    match mode {
        ModeConfig::Guard7x7 => ThroughputMode::Guard7x7,
        _ => ThroughputMode::Spread,
    }
}

fn parse(s: &str) -> f64 {
    s.parse().unwrap_or(f64::NAN)
}

fn mean_finite(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        f64::NAN
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

fn sweep(cfg: &ExperimentConfig, out: &Path, equalize: bool, opts: &RunOptions) -> anyhow::Result<Vec<PathBuf>> {
    let p = cfg.zak_params()?;
    let pulse = cfg.pulse_shape()?;
    let (bt, bn) = (pulse.effective_beta_tau(), pulse.effective_beta_nu());
    let mut all = Vec::new();
    let mut summary = Vec::new();
    for nu in cfg.channel.nu_max.values() {
        for &mode in &cfg.modes {
            let pdrs = if mode == ModeConfig::PerfectCsi { vec![0.0] } else { cfg.powers.pdr_db.values() };
            for pdr in pdrs {
                let q = if mode == ModeConfig::Spread { cfg.chirp.q.to_string() } else { "nan".into() };
                let key = format!("{}_q{}_nu{}_pdr{}.csv", mode_name(mode), q, fmt_float(nu), fmt_float(pdr));
                let point_file = out.join("points").join(key);
                let rows = if opts.resume && point_file.exists() {
                    read_rows(&point_file)?
                } else {
                    let mut setup = cfg.link_setup(mode, nu, pdr)?;
                    setup.equalize = equalize;
                    let outcomes = run_batch(&setup, cfg.seed, cfg.channel.trials)?;
                    let rows = trial_rows(cfg, nu, pdr, mode, &q, &outcomes, p.m(), p.n(), bt, bn)?;
                    write_csv(&point_file, &TRIAL_HEADER, &rows)?;
                    rows
                };
                let col = |i: usize| rows.iter().map(move |r| parse(&r[i]));
                let predicted = if mode == ModeConfig::Spread {
                    let rho_d = 10f64.powf(cfg.powers.rho_d_db / 10.0);
                    zakdd_core::estimation::predicted_nmse(rho_d, rho_d * 10f64.powf(pdr / 10.0), p.mn())?
                } else {
                    f64::NAN
                };
                summary.push(vec![
                    fmt_float(nu),
                    fmt_float(pdr),
                    fmt_float(cfg.powers.rho_d_db),
                    mode_name(mode).to_string(),
                    q.clone(),
                    rows.len().to_string(),
                    fmt_float(mean_finite(col(7))),
                    fmt_float(predicted),
                    fmt_float(mean_finite(col(8))),
                    fmt_float(mean_finite(col(9))),
                    fmt_float(mean_finite(col(10))),
                ]);
                all.extend(rows);
            }
        }
    }
    let name = if equalize { "ber_sweep" } else { "nmse_sweep" };
    let a = out.join(format!("{name}.csv"));
    write_csv(&a, &TRIAL_HEADER, &all)?;
    let b = out.join(format!("{name}_summary.csv"));
    write_csv(
        &b,
        &["nu_max", "PDR_dB", "rho_d_dB", "mode", "q", "trials", "NMSE", "predicted_NMSE", "BER", "SIR_dB", "throughput"],
        &summary,
    )?;
    Ok(vec![a, b])
}

#[allow(clippy::too_many_arguments)]
fn trial_rows(
    cfg: &ExperimentConfig,
    nu: f64,
    pdr: f64,
    mode: ModeConfig,
    q: &str,
    outcomes: &[TrialOutcome],
    m: usize,
    n: usize,
    bt: f64,
    bn: f64,
) -> anyhow::Result<Vec<Vec<String>>> {
    outcomes
        .iter()
        .map(|o| {
            let tp = match o.ber {
                Some(r) => Some(effective_throughput(r, m, n, bt, bn, throughput_mode(mode))?),
                None => None,
            };
            Ok(vec![
                cfg.seed.to_string(),
                o.trial.to_string(),
                fmt_float(nu),
                fmt_float(pdr),
                fmt_float(cfg.powers.rho_d_db),
                mode_name(mode).to_string(),
                q.to_string(),
                fmt_float(o.tap_nmse),
                fmt_opt(o.ber),
                fmt_opt(o.sir_db),
                fmt_opt(tp),
            ])
        })
        .collect()
}

fn throughput(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let pulse = cfg.pulse_shape()?;
    let (m, n) = (cfg.params.m, cfg.params.n);
    let (bt, bn) = (pulse.effective_beta_tau(), pulse.effective_beta_nu());
    let rows = cfg
        .ber_values
        .iter()
        .map(|&r| {
            let mut row = vec![fmt_float(r)];
            for mode in [ThroughputMode::Spread, ThroughputMode::Guard7x7, ThroughputMode::GuardStrip] {
                row.push(fmt_float(effective_throughput(r, m, n, bt, bn, mode)?));
            }
            Ok(row)
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let path = out.join("throughput.csv");
    write_csv(&path, &["BER", "spread", "guard7x7", "guard_strip"], &rows)?;
    Ok(vec![path])
}
