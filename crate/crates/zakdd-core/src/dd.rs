//! Quasi-periodic delay-Doppler grids, sparse DD filters and twisted
//! convolution.
//!
//! A discrete quasi-periodic signal is stored by its `M x N` fundamental
//! domain. Reads outside the domain go through the extension rule
//! `x[k + nM, l + mN] = e^{j2πnl/N} x[k, l]`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::{Error, Result};

const REL_TOL: f64 = 1e-12;

/// Frame geometry: delay/Doppler periods and grid sizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZakParams {
    m: usize,
    n: usize,
    tau_p: f64,
    nu_p: f64,
    b: f64,
    t: f64,
}

impl ZakParams {
    /// Builds the geometry from the grid sizes and the Doppler period.
    pub fn new(m: usize, n: usize, nu_p: f64) -> Result<Self> {
        if !(nu_p.is_finite() && nu_p > 0.0) {
            return Err(Error::InvalidParameter("nu_p must be positive"));
        }
        let tau_p = 1.0 / nu_p;
        Self::from_parts(m, n, tau_p, nu_p, m as f64 * nu_p, n as f64 * tau_p)
    }

    /// Builds the geometry from all six quantities, checking consistency.
    pub fn from_parts(m: usize, n: usize, tau_p: f64, nu_p: f64, b: f64, t: f64) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidParameter("M and N must be at least 1"));
        }
        let close = |a: f64, e: f64| (a - e).abs() <= REL_TOL * e.abs().max(f64::MIN_POSITIVE);
        if !close(nu_p * tau_p, 1.0) {
            return Err(Error::InvalidParameter("nu_p * tau_p must equal 1"));
        }
        if !close(b, m as f64 * nu_p) || !close(t, n as f64 * tau_p) {
            return Err(Error::InvalidParameter("B = M nu_p and T = N tau_p"));
        }
        Ok(Self { m, n, tau_p, nu_p, b, t })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mn(&self) -> usize {
        self.m * self.n
    }

    pub fn tau_p(&self) -> f64 {
        self.tau_p
    }

    pub fn nu_p(&self) -> f64 {
        self.nu_p
    }

    /// Bandwidth `B = M nu_p`.
    pub fn bandwidth(&self) -> f64 {
        self.b
    }

    /// Frame duration `T = N tau_p`.
    pub fn duration(&self) -> f64 {
        self.t
    }
}

impl Default for ZakParams {
    fn default() -> Self {
        Self::new(31, 37, 30e3).expect("default geometry is valid")
    }
}

/// Table of the `MN`-th roots of unity, `at(t) = e^{j2πt/MN}`.
#[derive(Debug, Clone)]
pub struct PhaseTable {
    period: i64,
    roots: Vec<Complex64>,
}

impl PhaseTable {
    pub fn new(period: usize) -> Self {
        let roots = (0..period)
            .map(|t| Complex64::from_polar(1.0, 2.0 * PI * t as f64 / period as f64))
            .collect();
        Self { period: period as i64, roots }
    }

    #[inline]
    pub fn at(&self, t: i64) -> Complex64 {
        self.roots[t.rem_euclid(self.period) as usize]
    }

    pub fn period(&self) -> usize {
        self.period as usize
    }
}

/// An `M x N` fundamental domain of a discrete quasi-periodic DD signal.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiPeriodicGrid {
    params: ZakParams,
    values: Vec<Complex64>,
}

impl QuasiPeriodicGrid {
    pub fn zeros(params: ZakParams) -> Self {
        Self { params, values: vec![Complex64::new(0.0, 0.0); params.mn()] }
    }

    /// Wraps row-major fundamental-domain values (`k * N + l`).
    pub fn from_values(params: ZakParams, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != params.mn() {
            return Err(Error::Dimension("grid needs M*N values"));
        }
        Ok(Self { params, values })
    }

    pub fn from_fn(params: ZakParams, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let n = params.n();
        let values = (0..params.mn()).map(|i| f(i / n, i % n)).collect();
        Self { params, values }
    }

    /// The quasi-periodic unit pulse located at `(k_p, l_p)`.
    pub fn point_pulse(params: ZakParams, k_p: i64, l_p: i64) -> Self {
        let (m, n) = (params.m() as i64, params.n() as i64);
        let kk = k_p.rem_euclid(m);
        let ll = l_p.rem_euclid(n);
        let shift = (kk - k_p) / m;
        let mut grid = Self::zeros(params);
        grid.values[(kk * n + ll) as usize] = unit_phase(shift * ll, n);
        grid
    }

    pub fn params(&self) -> &ZakParams {
        &self.params
    }

    /// Row-major fundamental-domain values.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Fundamental-domain value, `k < M`, `l < N`.
    pub fn value(&self, k: usize, l: usize) -> Complex64 {
        self.values[k * self.params.n() + l]
    }

    /// Extension accessor at any integer `(k, l)`.
    pub fn get(&self, k: i64, l: i64) -> Complex64 {
        let (m, n) = (self.params.m() as i64, self.params.n() as i64);
        let kk = k.rem_euclid(m);
        let ll = l.rem_euclid(n);
        let shift = (k - kk) / m;
        self.values[(kk * n + ll) as usize] * unit_phase(shift * ll, n)
    }

    /// Extension accessor using a precomputed `MN` phase table.
    #[inline]
    pub fn at(&self, k: i64, l: i64, phases: &PhaseTable) -> Complex64 {
        let (m, n) = (self.params.m() as i64, self.params.n() as i64);
        let kk = k.rem_euclid(m);
        let ll = l.rem_euclid(n);
        let shift = (k - kk) / m;
        self.values[(kk * n + ll) as usize] * phases.at(shift * ll * m)
    }

    /// Fundamental-domain energy.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self { params: self.params, values: self.values.iter().map(|v| v * c).collect() }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(
            (self.params.m(), self.params.n()),
            (other.params.m(), other.params.n()),
            "grids with different geometry"
        );
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect();
        Self { params: self.params, values }
    }
}

impl Add for &QuasiPeriodicGrid {
    type Output = QuasiPeriodicGrid;
    fn add(self, rhs: Self) -> QuasiPeriodicGrid {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &QuasiPeriodicGrid {
    type Output = QuasiPeriodicGrid;
    fn sub(self, rhs: Self) -> QuasiPeriodicGrid {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<Complex64> for &QuasiPeriodicGrid {
    type Output = QuasiPeriodicGrid;
    fn mul(self, rhs: Complex64) -> QuasiPeriodicGrid {
        self.scaled(rhs)
    }
}

impl Mul<f64> for &QuasiPeriodicGrid {
    type Output = QuasiPeriodicGrid;
    fn mul(self, rhs: f64) -> QuasiPeriodicGrid {
        self.scaled(Complex64::new(rhs, 0.0))
    }
}

/// `e^{j2π t/n}` evaluated with the exponent reduced first.
fn unit_phase(t: i64, n: i64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * t.rem_euclid(n) as f64 / n as f64)
}

/// Encodes an `M x N` symbol matrix (row-major) as a quasi-periodic grid.
pub fn encode_symbols(
    symbols: &[Complex64],
    shape: (usize, usize),
    params: ZakParams,
) -> Result<QuasiPeriodicGrid> {
    if shape != (params.m(), params.n()) || symbols.len() != params.mn() {
        return Err(Error::Dimension("symbol matrix must be M x N"));
    }
    QuasiPeriodicGrid::from_values(params, symbols.to_vec())
}

/// One tap of a sparse DD filter.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DDTap {
    pub k: i64,
    pub l: i64,
    pub g: Complex64,
}

impl DDTap {
    pub fn new(k: i64, l: i64, g: Complex64) -> Self {
        Self { k, l, g }
    }
}

/// A finite set of DD taps with unique positions, kept sorted by `(k, l)`.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SparseDDTaps {
    taps: Vec<DDTap>,
}

impl SparseDDTaps {
    pub fn empty() -> Self {
        Self { taps: Vec::new() }
    }

    /// Rejects duplicate positions.
    pub fn new(mut taps: Vec<DDTap>) -> Result<Self> {
        taps.sort_by_key(|t| (t.k, t.l));
        if taps.windows(2).any(|w| (w[0].k, w[0].l) == (w[1].k, w[1].l)) {
            return Err(Error::InvalidParameter("duplicate tap position"));
        }
        Ok(Self { taps })
    }

    /// Sums gains of taps sharing a position.
    pub fn accumulate(taps: impl IntoIterator<Item = DDTap>) -> Self {
        let mut taps: Vec<DDTap> = taps.into_iter().collect();
        taps.sort_by_key(|t| (t.k, t.l));
        let mut merged: Vec<DDTap> = Vec::with_capacity(taps.len());
        for t in taps {
            match merged.last_mut() {
                Some(last) if (last.k, last.l) == (t.k, t.l) => last.g += t.g,
                _ => merged.push(t),
            }
        }
        Self { taps: merged }
    }

    pub fn single(k: i64, l: i64, g: Complex64) -> Self {
        Self { taps: vec![DDTap::new(k, l, g)] }
    }

    pub fn iter(&self) -> impl Iterator<Item = &DDTap> + '_ {
        self.taps.iter()
    }

    pub fn as_slice(&self) -> &[DDTap] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn get(&self, k: i64, l: i64) -> Option<Complex64> {
        self.taps
            .binary_search_by_key(&(k, l), |t| (t.k, t.l))
            .ok()
            .map(|i| self.taps[i].g)
    }

    /// Gain at `(k, l)`, zero when absent.
    pub fn gain(&self, k: i64, l: i64) -> Complex64 {
        self.get(k, l).unwrap_or_default()
    }

    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|t| t.g.norm_sqr()).sum()
    }

    /// Positions of the nonzero taps.
    pub fn support(&self) -> Vec<(i64, i64)> {
        self.taps
            .iter()
            .filter(|t| t.g != Complex64::new(0.0, 0.0))
            .map(|t| (t.k, t.l))
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.taps.iter().map(|t| t.g.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self { taps: self.taps.iter().map(|t| DDTap::new(t.k, t.l, t.g * c)).collect() }
    }

    pub fn filter(&self, mut keep: impl FnMut(&DDTap) -> bool) -> Self {
        Self { taps: self.taps.iter().copied().filter(|t| keep(t)).collect() }
    }

    /// Tap-level twisted convolution `self *σ other` (no wrapping), with the
    /// phase kernel of an `MN` grid.
    pub fn twisted(&self, other: &Self, mn: usize) -> Self {
        let ph = PhaseTable::new(mn);
        Self::accumulate(self.taps.iter().flat_map(|a| {
            let ph = &ph;
            other
                .taps
                .iter()
                .map(move |b| DDTap::new(a.k + b.k, a.l + b.l, a.g * b.g * ph.at(a.l * b.k)))
        }))
    }
}

impl FromIterator<DDTap> for SparseDDTaps {
    fn from_iter<I: IntoIterator<Item = DDTap>>(iter: I) -> Self {
        Self::accumulate(iter)
    }
}

/// Discrete twisted convolution of a sparse filter with a quasi-periodic grid:
/// `y[k,l] = Σ g x[k-k', l-l'] e^{j2π l'(k-k')/MN}`.
pub fn twisted_conv(h: &SparseDDTaps, x: &QuasiPeriodicGrid) -> QuasiPeriodicGrid {
    let p = *x.params();
    let (m, n) = (p.m() as i64, p.n() as i64);
    let ph = PhaseTable::new(p.mn());
    let mut out = QuasiPeriodicGrid::zeros(p);
    for k in 0..m {
        for l in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for t in &h.taps {
                let dk = k - t.k;
                acc += t.g * x.at(dk, l - t.l, &ph) * ph.at(t.l * dk);
            }
            out.values[(k * n + l) as usize] = acc;
        }
    }
    out
}

/// An `MN x MN` array read modulo `MN` on both axes.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicFilter {
    period: usize,
    values: Vec<Complex64>,
}

impl PeriodicFilter {
    pub fn zeros(period: usize) -> Self {
        Self { period, values: vec![Complex64::new(0.0, 0.0); period * period] }
    }

    pub fn from_fn(period: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let values = (0..period * period).map(|i| f(i / period, i % period)).collect();
        Self { period, values }
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, k: i64, l: i64) -> Complex64 {
        let p = self.period as i64;
        self.values[(k.rem_euclid(p) * p + l.rem_euclid(p)) as usize]
    }

    /// Nonzero entries within one period as `(k, l, value)`.
    pub fn nonzeros(&self) -> impl Iterator<Item = (i64, i64, Complex64)> + '_ {
        let p = self.period;
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != Complex64::new(0.0, 0.0))
            .map(move |(i, v)| ((i / p) as i64, (i % p) as i64, *v))
    }
}

/// `MN`-periodic extension of a finite filter; congruent taps accumulate.
pub fn periodic_extension(taps: &SparseDDTaps, mn: usize) -> PeriodicFilter {
    let mut w = PeriodicFilter::zeros(mn);
    let p = mn as i64;
    for t in taps.iter() {
        w.values[(t.k.rem_euclid(p) * p + t.l.rem_euclid(p)) as usize] += t.g;
    }
    w
}

/// `MN`-periodic twisted convolution `w ⊛σ x`.
pub fn periodic_twisted_conv(w: &PeriodicFilter, x: &QuasiPeriodicGrid) -> Result<QuasiPeriodicGrid> {
    let p = *x.params();
    if w.period() != p.mn() {
        return Err(Error::Dimension("filter period must equal M*N of the grid"));
    }
    let (m, n, mn) = (p.m() as i64, p.n() as i64, p.mn() as i64);
    let ph = PhaseTable::new(p.mn());
    let w_nnz: Vec<(i64, i64, Complex64)> = w.nonzeros().collect();
    let x_nnz: Vec<(i64, i64, Complex64)> = (0..m)
        .flat_map(|k| (0..n).map(move |l| (k, l)))
        .map(|(k, l)| (k, l, x.value(k as usize, l as usize)))
        .filter(|(_, _, v)| *v != Complex64::new(0.0, 0.0))
        .collect();

    let mut out = QuasiPeriodicGrid::zeros(p);
    if (x_nnz.len() as i64) * mn < w_nnz.len() as i64 {
        // Walk the replicas of the few nonzero input cells instead of the
        // dense filter: each output sees N delay and M Doppler replicas.
        for k in 0..m {
            for l in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for &(a, b, v) in &x_nnz {
                    let n_lo = (k - mn - a).div_euclid(m) + 1;
                    for s in n_lo..n_lo + n {
                        let kk = a + s * m;
                        let vs = v * ph.at(s * b * m);
                        let m_lo = (l - mn - b).div_euclid(n) + 1;
                        for r in m_lo..m_lo + m {
                            let lp = l - (b + r * n);
                            acc += w.get(k - kk, lp) * vs * ph.at(lp * kk);
                        }
                    }
                }
                out.values[(k * n + l) as usize] = acc;
            }
        }
    } else {
        for k in 0..m {
            for l in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for &(kw, lw, g) in &w_nnz {
                    let dk = k - kw;
                    acc += g * x.at(dk, l - lw, &ph) * ph.at(lw * dk);
                }
                out.values[(k * n + l) as usize] = acc;
            }
        }
    }
    Ok(out)
}
