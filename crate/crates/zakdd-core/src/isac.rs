//! ISAC frames: QPSK data plus a pilot, pilot cancellation, LMMSE detection
//! and link metrics.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::dd::{twisted_conv, PhaseTable, QuasiPeriodicGrid, SparseDDTaps, ZakParams};
use crate::linalg::{conjugate_gradient, lu_solve};
use crate::spreading::{spread_pilot, ChirpSpec};
use crate::{Error, Result};

/// Gray-mapped QPSK: first bit sets the real sign, second the imaginary sign.
pub fn qpsk_map(bits: &[u8]) -> Result<Vec<Complex64>> {
    if !bits.len().is_multiple_of(2) || bits.iter().any(|&b| b > 1) {
        return Err(Error::InvalidParameter("QPSK needs an even number of 0/1 bits"));
    }
    let sign = |b: u8| if b == 0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
    Ok(bits.chunks(2).map(|p| Complex64::new(sign(p[1]), sign(p[0]))).collect())
}

pub fn detect_qpsk(symbols: &[Complex64]) -> Vec<u8> {
    symbols.iter().flat_map(|s| [(s.im < 0.0) as u8, (s.re < 0.0) as u8]).collect()
}

pub fn ber(bits: &[u8], reference: &[u8]) -> Result<f64> {
    if bits.len() != reference.len() || bits.is_empty() {
        return Err(Error::Dimension("bit vectors must be non-empty and equally long"));
    }
    let errors = bits.iter().zip(reference).filter(|(a, b)| a != b).count();
    Ok(errors as f64 / bits.len() as f64)
}

/// Where data symbols are blanked to keep a point pilot readable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum GuardRegion {
    None,
    /// 7×7 rectangle centred on the pilot.
    Rect7x7,
    /// Seven delay bins centred on the pilot, all Doppler bins.
    Strip,
}

/// `true` where a data symbol is carried.
pub fn data_mask(guard: GuardRegion, k_p: i64, l_p: i64, params: &ZakParams) -> Vec<bool> {
    let (m, n) = (params.m() as i64, params.n() as i64);
    let near = |a: i64, c: i64, period: i64| {
        let d = (a - c).rem_euclid(period);
        d.min(period - d) <= 3
    };
    (0..m)
        .flat_map(|k| (0..n).map(move |l| (k, l)))
        .map(|(k, l)| match guard {
            GuardRegion::None => true,
            GuardRegion::Rect7x7 => !(near(k, k_p, m) && near(l, l_p, n)),
            GuardRegion::Strip => !near(k, k_p, m),
        })
        .collect()
}

/// Pilot carried alongside the data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pilot {
    Spread { spec: ChirpSpec, k_p: i64, l_p: i64 },
    Point { k_p: i64, l_p: i64, guard: GuardRegion },
}

impl Pilot {
    pub fn position(&self) -> (i64, i64) {
        match *self {
            Pilot::Spread { k_p, l_p, .. } | Pilot::Point { k_p, l_p, .. } => (k_p, l_p),
        }
    }

    pub fn guard(&self) -> GuardRegion {
        match *self {
            Pilot::Spread { .. } => GuardRegion::None,
            Pilot::Point { guard, .. } => guard,
        }
    }

    /// Unit-energy pilot grid.
    pub fn grid(&self, params: ZakParams) -> Result<QuasiPeriodicGrid> {
        match *self {
            Pilot::Spread { spec, k_p, l_p } => spread_pilot(&spec, k_p, l_p, params),
            Pilot::Point { k_p, l_p, .. } => Ok(QuasiPeriodicGrid::point_pulse(params, k_p, l_p)),
        }
    }
}

/// `x = √E_d·x_d + √E_p·x_s` with `x_d` holding QPSK symbols over `√MN`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsacFrame {
    pub data: QuasiPeriodicGrid,
    pub pilot: QuasiPeriodicGrid,
    pub e_d: f64,
    pub e_p: f64,
    /// Two bits per DD cell; bits under a guard are carried but not sent.
    pub bits: Vec<u8>,
    pub mask: Vec<bool>,
}

impl IsacFrame {
    pub fn transmit(&self) -> QuasiPeriodicGrid {
        &(&self.data * self.e_d.sqrt()) + &(&self.pilot * self.e_p.sqrt())
    }

    pub fn data_component(&self) -> QuasiPeriodicGrid {
        &self.data * self.e_d.sqrt()
    }

    pub fn pilot_component(&self) -> QuasiPeriodicGrid {
        &self.pilot * self.e_p.sqrt()
    }

    /// Bits that were actually sent, in cell order.
    pub fn sent_bits(&self) -> Vec<u8> {
        masked_bits(&self.bits, &self.mask)
    }
}

/// Keeps the bit pairs of cells where `mask` is set.
pub fn masked_bits(bits: &[u8], mask: &[bool]) -> Vec<u8> {
    bits.chunks(2).zip(mask).filter(|(_, &m)| m).flat_map(|(b, _)| b.iter().copied()).collect()
}

pub fn assemble_frame(bits: &[u8], e_d: f64, e_p: f64, pilot: &Pilot, params: ZakParams) -> Result<IsacFrame> {
    assemble_frame_with(bits, e_d, e_p, pilot, pilot.grid(params)?)
}

/// As [`assemble_frame`] with the unit-energy pilot grid supplied, so that
/// trials can share one.
pub fn assemble_frame_with(
    bits: &[u8],
    e_d: f64,
    e_p: f64,
    pilot: &Pilot,
    pilot_grid: QuasiPeriodicGrid,
) -> Result<IsacFrame> {
    let params = *pilot_grid.params();
    let mn = params.mn();
    if bits.len() != 2 * mn {
        return Err(Error::Dimension("QPSK frame needs 2*M*N bits"));
    }
    if !(e_d >= 0.0 && e_p >= 0.0) {
        return Err(Error::InvalidParameter("energies must be non-negative"));
    }
    let (k_p, l_p) = pilot.position();
    let mask = data_mask(pilot.guard(), k_p, l_p, &params);
    let scale = 1.0 / (mn as f64).sqrt();
    let symbols: Vec<Complex64> = qpsk_map(bits)?
        .into_iter()
        .zip(&mask)
        .map(|(s, &m)| if m { s * scale } else { Complex64::new(0.0, 0.0) })
        .collect();
    Ok(IsacFrame {
        data: QuasiPeriodicGrid::from_values(params, symbols)?,
        pilot: pilot_grid,
        e_d,
        e_p,
        bits: bits.to_vec(),
        mask,
    })
}

/// `y - √E_p·(ĥ *σ x_s)`.
pub fn cancel_pilot(y: &QuasiPeriodicGrid, h_hat: &SparseDDTaps, x_s: &QuasiPeriodicGrid, e_p: f64) -> QuasiPeriodicGrid {
    y - &(&twisted_conv(h_hat, x_s) * e_p.sqrt())
}

/// Matrix form `y = H x + n` of the twisted convolution on the fundamental
/// domain, with `H` held as sparse columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualizerModel {
    params: ZakParams,
    columns: Vec<Vec<(usize, Complex64)>>,
    pub noise_var: f64,
    pub symbol_var: f64,
}

impl EqualizerModel {
    pub fn params(&self) -> &ZakParams {
        &self.params
    }

    /// Nonzero entries `(row, value)` of column `k'·N + l'`.
    pub fn column(&self, j: usize) -> &[(usize, Complex64)] {
        &self.columns[j]
    }

    pub fn dense(&self) -> Vec<Complex64> {
        let mn = self.params.mn();
        let mut h = vec![Complex64::new(0.0, 0.0); mn * mn];
        for (j, col) in self.columns.iter().enumerate() {
            for &(i, v) in col {
                h[i * mn + j] = v;
            }
        }
        h
    }

    fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (col, xj) in self.columns.iter().zip(x) {
            for &(i, v) in col {
                out[i] += v * xj;
            }
        }
    }

    fn apply_adjoint(&self, y: &[Complex64], out: &mut [Complex64]) {
        for (col, o) in self.columns.iter().zip(out.iter_mut()) {
            *o = col.iter().map(|&(i, v)| v.conj() * y[i]).sum();
        }
    }

    fn lambda(&self) -> f64 {
        self.noise_var / self.symbol_var
    }

    fn descale(&self, x: Vec<Complex64>) -> Vec<Complex64> {
        let s = 1.0 / self.symbol_var.sqrt();
        x.into_iter().map(|v| v * s).collect()
    }
}

pub fn build_equalizer(h: &SparseDDTaps, n0: f64, e_d: f64, params: ZakParams) -> Result<EqualizerModel> {
    if h.is_empty() || h.max_abs() == 0.0 {
        return Err(Error::InvalidParameter("channel must be nonzero"));
    }
    if !(n0 >= 0.0 && e_d > 0.0) {
        return Err(Error::InvalidParameter("need N0 >= 0 and E_d > 0"));
    }
    let (m, n) = (params.m() as i64, params.n() as i64);
    let ph = PhaseTable::new(params.mn());
    let mut columns = Vec::with_capacity(params.mn());
    for kc in 0..m {
        for lc in 0..n {
            let mut col: Vec<(usize, Complex64)> = Vec::with_capacity(h.len());
            for t in h.iter() {
                let (kk, ll) = ((kc + t.k).rem_euclid(m), (lc + t.l).rem_euclid(n));
                let a = kk - t.k;
                // The input sample at (a, ll - l_t) is the replica of (kc, lc)
                // shifted by (a - kc)/M delay periods.
                let shift = (a - kc) / m;
                let v = t.g * ph.at(shift * lc * m) * ph.at(t.l * a);
                col.push(((kk * n + ll) as usize, v));
            }
            col.sort_unstable_by_key(|e| e.0);
            col.dedup_by(|b, a| {
                if a.0 == b.0 {
                    a.1 += b.1;
                    true
                } else {
                    false
                }
            });
            columns.push(col);
        }
    }
    Ok(EqualizerModel { params, columns, noise_var: n0, symbol_var: e_d / params.mn() as f64 })
}

/// LMMSE estimate `(HᴴH + λI)⁻¹ Hᴴ y` by conjugate gradients, returned at
/// unit-symbol scale.
pub fn mmse_equalize(model: &EqualizerModel, y: &QuasiPeriodicGrid) -> Result<Vec<Complex64>> {
    let mn = model.params.mn();
    if y.params().mn() != mn {
        return Err(Error::Dimension("received grid does not match the equalizer"));
    }
    let mut rhs = vec![Complex64::new(0.0, 0.0); mn];
    model.apply_adjoint(y.values(), &mut rhs);
    let lambda = model.lambda();
    let mut tmp = vec![Complex64::new(0.0, 0.0); mn];
    let tmp = core::cell::RefCell::new(&mut tmp);
    let x = conjugate_gradient(
        |v, out| {
            let mut t = tmp.borrow_mut();
            model.apply(v, &mut t);
            model.apply_adjoint(&t, out);
            for (o, vi) in out.iter_mut().zip(v) {
                *o += vi * lambda;
            }
        },
        &rhs,
        1e-10,
        10 * mn,
    )?;
    Ok(model.descale(x))
}

/// The same estimate through a dense LU factorization.
pub fn mmse_equalize_dense(model: &EqualizerModel, y: &QuasiPeriodicGrid) -> Result<Vec<Complex64>> {
    let mn = model.params.mn();
    if y.params().mn() != mn {
        return Err(Error::Dimension("received grid does not match the equalizer"));
    }
    let h = model.dense();
    let mut a = vec![Complex64::new(0.0, 0.0); mn * mn];
    for i in 0..mn {
        for j in 0..mn {
            a[i * mn + j] = (0..mn).map(|r| h[r * mn + i].conj() * h[r * mn + j]).sum();
        }
        a[i * mn + i] += model.lambda();
    }
    let mut rhs = vec![Complex64::new(0.0, 0.0); mn];
    model.apply_adjoint(y.values(), &mut rhs);
    Ok(model.descale(lu_solve(a, rhs)?))
}

/// Data-to-residual-pilot power ratio in dB; `+∞` for a zero residual.
pub fn sir(residual: &QuasiPeriodicGrid, data: &QuasiPeriodicGrid) -> f64 {
    let r = residual.energy();
    if r == 0.0 {
        return f64::INFINITY;
    }
    10.0 * (data.energy() / r).log10()
}

/// `H(p)` in bits with `H(0) = H(1) = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ThroughputMode {
    Spread,
    Guard7x7,
    GuardStrip,
}

/// Reliable bits per subframe over `BT(1+β_τ)(1+β_ν)`, in bits/s/Hz.
pub fn effective_throughput(r: f64, m: usize, n: usize, beta_tau: f64, beta_nu: f64, mode: ThroughputMode) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidParameter("BER must lie in [0, 1]"));
    }
    let mn = (m * n) as f64;
    let symbols = match mode {
        ThroughputMode::Spread => mn,
        ThroughputMode::Guard7x7 => mn - 49.0,
        ThroughputMode::GuardStrip => mn - 7.0 * n as f64,
    };
    Ok(2.0 * symbols * (1.0 - binary_entropy(r)) / (mn * (1.0 + beta_tau) * (1.0 + beta_nu)))
}
