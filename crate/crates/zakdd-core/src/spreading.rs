//! Chirp spreading filters, spread pilots and the support lattice of their
//! self-ambiguity.
//!
//! The chirp `w[k,l] = (1/MN) e^{j2πq(k²+l²)/MN}` spreads a point pulse over
//! the whole frame. The self-ambiguity of the result has unit magnitude on
//! the lattice `Λq = {(k,l) : [2qk - l]_M = 0, [k - lθ]_N = 0}` with
//! `θ = [(2q)^{-1} - 2q]_MN`, and vanishes elsewhere.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::dd::{periodic_twisted_conv, PeriodicFilter, PhaseTable, QuasiPeriodicGrid, ZakParams};
use crate::{Error, Result};

/// Slope and grid sizes of a chirp filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChirpSpec {
    q: i64,
    m: usize,
    n: usize,
}

impl ChirpSpec {
    /// `m` and `n` must be odd primes and `q` coprime to both.
    pub fn new(q: i64, m: usize, n: usize) -> Result<Self> {
        if !is_odd_prime(m) || !is_odd_prime(n) {
            return Err(Error::InvalidChirp("M and N must be odd primes"));
        }
        let (mi, ni) = (m as i64, n as i64);
        if gcd(q, mi) != 1 || gcd(q, ni) != 1 {
            return Err(Error::InvalidChirp("q must be coprime to M and N"));
        }
        if gcd(2 * q, mi * ni) != 1 {
            return Err(Error::InvalidChirp("2q must be invertible modulo MN"));
        }
        Ok(Self { q, m, n })
    }

    pub fn q(&self) -> i64 {
        self.q
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
}

fn is_odd_prime(p: usize) -> bool {
    p >= 3 && p % 2 == 1 && (3..).step_by(2).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Inverse of `a` modulo `m` in `[0, m)`, by the extended Euclidean algorithm.
pub fn mod_inverse(a: i64, m: i64) -> Result<i64> {
    if m < 2 {
        return Err(Error::InvalidParameter("modulus must be at least 2"));
    }
    let (mut r0, mut r1) = (a.rem_euclid(m), m);
    let (mut s0, mut s1) = (1i64, 0i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    if r0 != 1 {
        return Err(Error::NoInverse { a, m });
    }
    Ok(s0.rem_euclid(m))
}

/// The `MN`-periodic chirp filter.
pub fn chirp_filter(spec: &ChirpSpec) -> PeriodicFilter {
    let mn = spec.mn();
    let ph = PhaseTable::new(mn);
    let scale = 1.0 / mn as f64;
    let q = spec.q;
    PeriodicFilter::from_fn(mn, |k, l| {
        let (k, l) = (k as i64, l as i64);
        ph.at(q * ((k * k + l * l) % mn as i64)) * scale
    })
}

/// The chirp-spread pilot `w ⊛σ x_p` for a point pulse at `(k_p, l_p)`.
pub fn spread_pilot(spec: &ChirpSpec, k_p: i64, l_p: i64, params: ZakParams) -> Result<QuasiPeriodicGrid> {
    if (spec.m(), spec.n()) != (params.m(), params.n()) {
        return Err(Error::Dimension("chirp and frame must share M and N"));
    }
    periodic_twisted_conv(&chirp_filter(spec), &QuasiPeriodicGrid::point_pulse(params, k_p, l_p))
}

/// A set of DD points in `[0, MN)^2`, invariant under shifts by `MN`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DDLattice {
    period: usize,
    points: Vec<(i64, i64)>,
    theta: Option<i64>,
}

impl DDLattice {
    /// The period lattice `{(nM, mN)}`.
    pub fn period_lattice(m: usize, n: usize) -> Self {
        let mn = (m * n) as i64;
        let mut points: Vec<(i64, i64)> = (0..n as i64)
            .flat_map(|a| (0..m as i64).map(move |b| ((a * m as i64) % mn, (b * n as i64) % mn)))
            .collect();
        points.sort_unstable();
        Self { period: m * n, points, theta: None }
    }

    /// Builds a lattice from explicit points; they are reduced modulo `period`.
    pub fn from_points(period: usize, points: impl IntoIterator<Item = (i64, i64)>) -> Self {
        let p = period as i64;
        let mut points: Vec<(i64, i64)> =
            points.into_iter().map(|(k, l)| (k.rem_euclid(p), l.rem_euclid(p))).collect();
        points.sort_unstable();
        points.dedup();
        Self { period, points, theta: None }
    }

    pub fn period(&self) -> usize {
        self.period
    }

    /// Sorted points in `[0, MN)^2`.
    pub fn points(&self) -> &[(i64, i64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `θ = [(2q)^{-1} - 2q]_MN` for chirp lattices.
    pub fn theta(&self) -> Option<i64> {
        self.theta
    }

    /// Membership of an arbitrary integer point, modulo `MN`.
    pub fn contains(&self, k: i64, l: i64) -> bool {
        let p = self.period as i64;
        self.points.binary_search(&(k.rem_euclid(p), l.rem_euclid(p))).is_ok()
    }
}

/// All points of `Λq` in `[0, MN)^2`.
pub fn lattice_lq(m: usize, n: usize, q: i64) -> Result<DDLattice> {
    let spec = ChirpSpec::new(q, m, n)?;
    let mn = spec.mn() as i64;
    let two_q = (2 * q).rem_euclid(mn);
    let theta = (mod_inverse(two_q, mn)? - two_q).rem_euclid(mn);
    let (mi, ni) = (m as i64, n as i64);
    let mut points = Vec::with_capacity(spec.mn());
    for k in 0..mn {
        for l in 0..mn {
            if (2 * q * k - l).rem_euclid(mi) == 0 && (k - l * theta).rem_euclid(ni) == 0 {
                points.push((k, l));
            }
        }
    }
    Ok(DDLattice { period: spec.mn(), points, theta: Some(theta) })
}

/// Pairs of distinct support points whose difference lies on the lattice.
fn conflicts<'a>(
    support: &'a [(i64, i64)],
    lattice: &'a DDLattice,
) -> impl Iterator<Item = ((i64, i64), (i64, i64))> + 'a {
    support.iter().enumerate().flat_map(move |(i, &a)| {
        support[i + 1..]
            .iter()
            .filter(move |&&b| a != b && lattice.contains(b.0 - a.0, b.1 - a.1))
            .map(move |&b| (a, b))
    })
}

/// Weak crystallization: no two distinct support points differ by a lattice
/// point, so the lattice translates of the support do not overlap.
pub fn crystallization_check(support: &[(i64, i64)], lattice: &DDLattice) -> bool {
    conflicts(support, lattice).next().is_none()
}

/// Support points that collide with another support point under some
/// lattice translate.
pub fn aliased_positions(support: &[(i64, i64)], lattice: &DDLattice) -> Vec<(i64, i64)> {
    let mut out: Vec<(i64, i64)> = conflicts(support, lattice).flat_map(|(a, b)| [a, b]).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// A single chirp coefficient, without building the `MN x MN` table.
pub fn chirp_value(spec: &ChirpSpec, k: i64, l: i64) -> Complex64 {
    let mn = spec.mn() as i64;
    let t = (spec.q * ((k * k + l * l).rem_euclid(mn))).rem_euclid(mn);
    Complex64::from_polar(1.0 / mn as f64, 2.0 * core::f64::consts::PI * t as f64 / mn as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambiguity::self_ambiguity;
    use core::f64::consts::PI;

    #[test]
    fn inverses() {
        assert_eq!(mod_inverse(1, 143), Ok(1));
        assert_eq!(mod_inverse(10, 143), Ok(43));
        assert_eq!(mod_inverse(11, 143), Err(Error::NoInverse { a: 11, m: 143 }));
        assert_eq!(mod_inverse(-10, 143), Ok(100));
        assert!(mod_inverse(3, 1).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(ChirpSpec::new(5, 11, 13).is_ok());
        assert!(ChirpSpec::new(11, 11, 13).is_err());
        assert!(ChirpSpec::new(3, 9, 13).is_err());
        assert!(ChirpSpec::new(3, 2, 13).is_err());
        assert!(ChirpSpec::new(3, 7, 7).is_ok());
        assert!(ChirpSpec::new(7, 7, 7).is_err());
    }

    #[test]
    fn chirp_values() {
        let spec = ChirpSpec::new(5, 11, 13).unwrap();
        let w = chirp_filter(&spec);
        assert!((w.get(0, 0) - Complex64::new(1.0 / 143.0, 0.0)).norm() < 1e-16);
        let expect = Complex64::from_polar(1.0 / 143.0, 2.0 * PI * 10.0 / 143.0);
        assert!((w.get(1, 1) - expect).norm() < 1e-16);
        assert_eq!(w.get(1 + 143, 1), w.get(1, 1));
        assert!((chirp_value(&spec, 1 + 143, -1) - expect).norm() < 1e-16);
    }

    #[test]
    fn spread_pilot_unit_energy() {
        for (m, n, q, kp, lp) in [(5, 7, 1, 0, 0), (11, 13, 5, 3, 4), (7, 11, 3, -2, 20)] {
            let p = ZakParams::new(m, n, 1e3).unwrap();
            let spec = ChirpSpec::new(q, m, n).unwrap();
            let xs = spread_pilot(&spec, kp, lp, p).unwrap();
            assert!((xs.energy() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn example_lattices() {
        let l5 = lattice_lq(11, 13, 5).unwrap();
        assert_eq!(l5.theta(), Some(33));
        assert_eq!(l5.len(), 143);
        assert!(l5.contains(3, 19) && l5.contains(8, 3));
        let generated = DDLattice::from_points(
            143,
            (0..143i64).flat_map(|i| (0..143i64).map(move |j| (3 * i + 8 * j, 19 * i + 3 * j))),
        );
        assert_eq!(generated, DDLattice { theta: None, ..l5.clone() });

        let l4 = lattice_lq(11, 13, 4).unwrap();
        assert!(l4.contains(24, 5) && l4.contains(5, 7));
    }

    #[test]
    fn self_ambiguity_support_is_lattice() {
        for (m, n, q) in [(11, 13, 5), (7, 7, 3)] {
            let p = ZakParams::new(m, n, 1e3).unwrap();
            let spec = ChirpSpec::new(q, m, n).unwrap();
            let a = self_ambiguity(&spread_pilot(&spec, 0, 0, p).unwrap());
            let lat = lattice_lq(m, n, q).unwrap();
            assert_eq!(lat.len(), m * n);
            let mn = (m * n) as i64;
            for k in 0..mn {
                for l in 0..mn {
                    let v = a.get(k, l).norm();
                    let expect = if lat.contains(k, l) { 1.0 } else { 0.0 };
                    assert!((v - expect).abs() < 1e-9, "({k},{l}) {v}");
                }
            }
        }
    }

    #[test]
    fn crystallization_cases() {
        let l5 = lattice_lq(11, 13, 5).unwrap();
        let l4 = lattice_lq(11, 13, 4).unwrap();
        assert!(crystallization_check(&[], &l5));
        assert!(crystallization_check(&[(2, 3)], &l5));

        let rect: Vec<(i64, i64)> = (0..6).flat_map(|k| (-4..4).map(move |l| (k, l))).collect();
        assert!(crystallization_check(&rect, &l5));
        assert!(!crystallization_check(&rect, &l4));
        let aliased = aliased_positions(&rect, &l4);
        assert!(aliased.contains(&(0, -4)) && aliased.contains(&(5, 3)));
        assert!(aliased.iter().all(|&(k, l)| rect.iter().any(|&(a, b)| {
            let d = (k - a, l - b);
            d != (0, 0) && l4.contains(d.0, d.1)
        })));

        let period = DDLattice::period_lattice(11, 13);
        assert_eq!(period.len(), 143);
        let small: Vec<(i64, i64)> = (0..10).flat_map(|k| (-6..6).map(move |l| (k, l))).collect();
        assert!(crystallization_check(&small, &period));
        assert!(!crystallization_check(&[(0, 0), (11, 0)], &period));
        assert!(!crystallization_check(&[(0, 0), (143, 0)], &l5));
    }
}
