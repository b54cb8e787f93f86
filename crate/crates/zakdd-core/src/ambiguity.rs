//! Discrete cross- and self-ambiguity functions of quasi-periodic grids.
//!
//! `A_{a,b}[k,l] = Σ_{k'<M, l'<N} a[k',l'] b*[k'-k, l'-l] e^{-j2π l(k'-k)/MN}`,
//! periodic with period `MN` on both axes.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::dd::{PhaseTable, QuasiPeriodicGrid, SparseDDTaps};
use crate::{Error, Result};

/// A dense `MN x MN` ambiguity surface, read modulo `MN`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguitySurface {
    period: usize,
    values: Vec<Complex64>,
}

impl AmbiguitySurface {
    pub fn period(&self) -> usize {
        self.period
    }

    /// Row-major values over `[0, MN)^2`.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, k: i64, l: i64) -> Complex64 {
        let p = self.period as i64;
        self.values[(k.rem_euclid(p) * p + l.rem_euclid(p)) as usize]
    }

    /// Twisted convolution of a tap filter with the surface,
    /// `Σ g A[k-k', l-l'] e^{j2π l'(k-k')/MN}`.
    pub fn twisted_by(&self, g: &SparseDDTaps) -> AmbiguitySurface {
        let p = self.period as i64;
        let ph = PhaseTable::new(self.period);
        let mut values = Vec::with_capacity(self.values.len());
        for k in 0..p {
            for l in 0..p {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in g.iter() {
                    acc += t.g * self.get(k - t.k, l - t.l) * ph.at(t.l * (k - t.k));
                }
                values.push(acc);
            }
        }
        AmbiguitySurface { period: self.period, values }
    }
}

fn check_pair(a: &QuasiPeriodicGrid, b: &QuasiPeriodicGrid) -> Result<()> {
    let (pa, pb) = (a.params(), b.params());
    if (pa.m(), pa.n()) != (pb.m(), pb.n()) {
        return Err(Error::Dimension("ambiguity operands must share M and N"));
    }
    Ok(())
}

#[inline]
fn cell(
    a_cells: &[(i64, i64, Complex64)],
    b: &QuasiPeriodicGrid,
    k: i64,
    l: i64,
    ph: &PhaseTable,
) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &(kp, lp, v) in a_cells {
        acc += v * b.at(kp - k, lp - l, ph).conj() * ph.at(-l * (kp - k));
    }
    acc
}

/// Nonzero samples of `a` over the window `[k0, k0+M) x [l0, l0+N)`.
fn window_cells(a: &QuasiPeriodicGrid, k0: i64, l0: i64, ph: &PhaseTable) -> Vec<(i64, i64, Complex64)> {
    let (m, n) = (a.params().m() as i64, a.params().n() as i64);
    let mut cells = Vec::new();
    for kp in k0..k0 + m {
        for lp in l0..l0 + n {
            let v = a.at(kp, lp, ph);
            if v != Complex64::new(0.0, 0.0) {
                cells.push((kp, lp, v));
            }
        }
    }
    cells
}

/// Full cross-ambiguity surface `A_{a,b}`.
pub fn cross_ambiguity(a: &QuasiPeriodicGrid, b: &QuasiPeriodicGrid) -> Result<AmbiguitySurface> {
    cross_ambiguity_over(a, b, (0, 0))
}

/// Cross-ambiguity with the summation window starting at `origin` instead of
/// `(0, 0)`. The result does not depend on the window.
pub fn cross_ambiguity_over(
    a: &QuasiPeriodicGrid,
    b: &QuasiPeriodicGrid,
    origin: (i64, i64),
) -> Result<AmbiguitySurface> {
    check_pair(a, b)?;
    let period = a.params().mn();
    let ph = PhaseTable::new(period);
    let cells = window_cells(a, origin.0, origin.1, &ph);
    let p = period as i64;
    let mut values = Vec::with_capacity(period * period);
    for k in 0..p {
        for l in 0..p {
            values.push(cell(&cells, b, k, l, &ph));
        }
    }
    Ok(AmbiguitySurface { period, values })
}

/// Cross-ambiguity evaluated only at the listed `(k, l)` positions.
pub fn cross_ambiguity_at(
    a: &QuasiPeriodicGrid,
    b: &QuasiPeriodicGrid,
    positions: &[(i64, i64)],
) -> Result<Vec<Complex64>> {
    check_pair(a, b)?;
    let ph = PhaseTable::new(a.params().mn());
    let nonzero = |g: &QuasiPeriodicGrid| g.values().iter().filter(|v| v.norm_sqr() > 0.0).count();
    if nonzero(b) < nonzero(a) {
        // A_{a,b}[k,l] = conj(A_{b,a}[-k,-l]) e^{j2π kl/MN}; sum over the sparser operand.
        let cells = window_cells(b, 0, 0, &ph);
        return Ok(positions
            .iter()
            .map(|&(k, l)| cell(&cells, a, -k, -l, &ph).conj() * ph.at(k * l))
            .collect());
    }
    let cells = window_cells(a, 0, 0, &ph);
    Ok(positions.iter().map(|&(k, l)| cell(&cells, b, k, l, &ph)).collect())
}

pub fn self_ambiguity(a: &QuasiPeriodicGrid) -> AmbiguitySurface {
    cross_ambiguity(a, a).expect("a grid shares its own geometry")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::ZakParams;
    use core::f64::consts::PI;

    #[test]
    fn zero_shift_is_energy() {
        let p = ZakParams::new(5, 7, 1e3).unwrap();
        let x = QuasiPeriodicGrid::from_fn(p, |k, l| Complex64::new(k as f64 - 2.0, (l * l) as f64 * 0.1));
        let a = cross_ambiguity_at(&x, &x, &[(0, 0)]).unwrap()[0];
        assert!((a.re - x.energy()).abs() < 1e-12 && a.im.abs() < 1e-12);
    }

    #[test]
    fn point_pulse_on_period_lattice() {
        let p = ZakParams::new(11, 13, 1e3).unwrap();
        let a = self_ambiguity(&QuasiPeriodicGrid::point_pulse(p, 0, 0));
        for k in 0..143i64 {
            for l in 0..143i64 {
                let v = a.get(k, l);
                if k % 11 == 0 && l % 13 == 0 {
                    assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);
                } else {
                    assert!(v.norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn shifted_point_pulse_phase() {
        let p = ZakParams::new(11, 13, 1e3).unwrap();
        let a = self_ambiguity(&QuasiPeriodicGrid::point_pulse(p, 2, 3));
        let expect = Complex64::from_polar(1.0, 2.0 * PI * 3.0 / 13.0);
        assert!((a.get(11, 0) - expect).norm() < 1e-12);
    }

    #[test]
    fn zero_grid_zero_surface() {
        let p = ZakParams::new(5, 7, 1e3).unwrap();
        let a = self_ambiguity(&QuasiPeriodicGrid::zeros(p));
        assert!(a.values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn mismatched_geometry_rejected() {
        let a = QuasiPeriodicGrid::zeros(ZakParams::new(5, 7, 1e3).unwrap());
        let b = QuasiPeriodicGrid::zeros(ZakParams::new(7, 5, 1e3).unwrap());
        assert!(cross_ambiguity(&a, &b).is_err());
    }

    #[test]
    fn windowed_readout_matches_surface() {
        let p = ZakParams::new(5, 7, 1e3).unwrap();
        let dense = QuasiPeriodicGrid::from_fn(p, |k, l| Complex64::new((k * 3 + l) as f64 % 4.0, l as f64 - 2.0));
        let sparse = QuasiPeriodicGrid::point_pulse(p, 2, 3);
        let at = [(0, 0), (1, -2), (7, 30), (-4, 11)];
        for (a, b) in [(&dense, &sparse), (&sparse, &dense)] {
            let full = cross_ambiguity(a, b).unwrap();
            let some = cross_ambiguity_at(a, b, &at).unwrap();
            for (v, &(k, l)) in some.iter().zip(&at) {
                assert!((v - full.get(k, l)).norm() < 1e-10);
            }
        }
    }
}
