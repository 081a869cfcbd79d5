//! Differential entropy of satisfaction scores, estimated with a Gaussian KDE.
//!
//! The entropy measures how well a proposition spreads a population apart:
//! widely scattered scores give a high value, near-identical scores a low one,
//! and identical scores the [`EntropyValue::Degenerate`] sentinel.

use std::cmp::Ordering;
use std::f64::consts::PI;

use thiserror::Error;

use crate::scalar::Scalar;

/// Quadrature resolution used unless the bandwidth demands a finer grid.
pub const DEFAULT_GRID_POINTS: usize = 512;
/// Smallest accepted grid.
pub const MIN_GRID_POINTS: usize = 64;
/// Bandwidth floor for near-constant samples.
pub const BANDWIDTH_FLOOR: f64 = 1e-4;
/// How far past the sample range the support extends, in bandwidths.
pub const SUPPORT_BANDWIDTHS: f64 = 4.0;
/// Entropies closer than this compare equal.
pub const ENTROPY_TOLERANCE: f64 = 1e-9;

const MAX_GRID_POINTS: usize = 1 << 16;
const KERNEL_CUTOFF: f64 = 9.0;

#[derive(Debug, Error, PartialEq)]
pub enum EntropyError {
    #[error("cannot estimate a density from an empty sample")]
    EmptySample,
    #[error("grid needs at least {MIN_GRID_POINTS} points, got {0}")]
    GridTooSmall(usize),
    #[error("sample contains a non-finite value")]
    NonFinite,
}

/// Gaussian kernel density estimate tabulated on an even grid.
#[derive(Clone, Debug)]
pub struct DensityEstimate<T> {
    sample: Vec<T>,
    bandwidth: T,
    grid: Vec<T>,
    density: Vec<T>,
    degenerate: bool,
}

impl<T: Scalar> DensityEstimate<T> {
    pub fn sample(&self) -> &[T] {
        &self.sample
    }

    pub fn bandwidth(&self) -> T {
        self.bandwidth
    }

    pub fn grid(&self) -> &[T] {
        &self.grid
    }

    pub fn density(&self) -> &[T] {
        &self.density
    }

    /// All sample values are identical.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Kernel density at an arbitrary point.
    pub fn density_at(&self, x: T) -> T {
        gaussian_mixture(&self.sample, self.bandwidth, x)
    }

    /// Trapezoidal integral of the tabulated density.
    pub fn total_mass(&self) -> T {
        trapezoid(&self.grid, &self.density)
    }

    /// `-∫ β log β` over the grid, with `0 log 0 = 0`.
    pub fn entropy_integral(&self) -> T {
        let integrand: Vec<T> = self
            .density
            .iter()
            .map(|&b| if b > T::zero() { -b * b.ln() } else { T::zero() })
            .collect();
        trapezoid(&self.grid, &integrand)
    }
}

fn gaussian_mixture<T: Scalar>(sample: &[T], bw: T, x: T) -> T {
    let norm = T::one() / (T::from_usize_lossy(sample.len()) * bw * T::lit((2.0 * PI).sqrt()));
    let half = T::lit(0.5);
    let sum: T = sample
        .iter()
        .map(|&xi| {
            let z = (x - xi) / bw;
            (-half * z * z).exp()
        })
        .sum();
    norm * sum
}

/// Mixture density on the grid `lo + i * step`, accumulating each kernel only
/// where it exceeds ~1e-18 of its peak.
fn tabulate<T: Scalar>(sample: &[T], bw: T, grid: &[T], step: T) -> Vec<T> {
    let (lo, n) = (grid[0], grid.len());
    let norm = T::one() / (T::from_usize_lossy(sample.len()) * bw * T::lit((2.0 * PI).sqrt()));
    let half = T::lit(0.5);
    let reach = (KERNEL_CUTOFF * bw.as_f64() / step.as_f64()).ceil() as isize + 1;
    let mut density = vec![T::zero(); n];
    for &xi in sample {
        let centre = ((xi - lo) / step).as_f64().round() as isize;
        let first = (centre - reach).max(0) as usize;
        let last = (centre + reach).min(n as isize - 1);
        if last < first as isize {
            continue;
        }
        for (d, &x) in density[first..=last as usize].iter_mut().zip(&grid[first..=last as usize]) {
            let z = (x - xi) / bw;
            *d = *d + (-half * z * z).exp();
        }
    }
    density.iter_mut().for_each(|d| *d = *d * norm);
    density
}

fn trapezoid<T: Scalar>(xs: &[T], ys: &[T]) -> T {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| (x[1] - x[0]) * (y[0] + y[1]) * T::lit(0.5))
        .sum()
}

/// Linear-interpolation quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Silverman's rule of thumb, `1.06 σ̂ n^(-1/5)` with `σ̂ = min(std, IQR/1.34)`.
/// A zero IQR falls back to the standard deviation; the result is floored.
pub fn silverman_bandwidth<T: Scalar>(sample: &[T]) -> T {
    let xs: Vec<f64> = sample.iter().map(|x| x.as_f64()).collect();
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return T::lit(BANDWIDTH_FLOOR);
    }
    let mean = xs.iter().sum::<f64>() / n;
    let std = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let mut sorted = xs.clone();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let sigma = if iqr > 0.0 { std.min(iqr / 1.34) } else { std };
    T::lit((1.06 * sigma * n.powf(-0.2)).max(BANDWIDTH_FLOOR))
}

/// KDE with the default grid resolution.
pub fn kde<T: Scalar>(sample: &[T]) -> Result<DensityEstimate<T>, EntropyError> {
    kde_with_grid(sample, DEFAULT_GRID_POINTS)
}

/// KDE tabulated on at least `points` grid points. The grid is refined when the
/// spacing would exceed half a bandwidth.
pub fn kde_with_grid<T: Scalar>(
    sample: &[T],
    points: usize,
) -> Result<DensityEstimate<T>, EntropyError> {
    if sample.is_empty() {
        return Err(EntropyError::EmptySample);
    }
    if points < MIN_GRID_POINTS {
        return Err(EntropyError::GridTooSmall(points));
    }
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(EntropyError::NonFinite);
    }
    let first = sample[0];
    let degenerate = sample.iter().all(|&x| x == first);
    let bw = silverman_bandwidth(sample);
    let lo_s = sample.iter().copied().fold(T::zero(), T::min);
    let hi_s = sample.iter().copied().fold(T::one(), T::max);
    let pad = bw * T::lit(SUPPORT_BANDWIDTHS);
    let (lo, hi) = (lo_s - pad, hi_s + pad);
    let width = (hi - lo).as_f64();
    let needed = (width / (0.5 * bw.as_f64())).ceil() as usize + 1;
    let n = points.max(needed.min(MAX_GRID_POINTS));
    let step = (hi - lo) / T::from_usize_lossy(n - 1);
    let grid: Vec<T> = (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo + step * T::from_usize_lossy(i)
            }
        })
        .collect();
    let density = tabulate(sample, bw, &grid, step);
    Ok(DensityEstimate {
        sample: sample.to_vec(),
        bandwidth: bw,
        grid,
        density,
        degenerate,
    })
}

/// Differential entropy in nats, or the sentinel for a constant sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EntropyValue<T> {
    /// Zero spread; ranks below every finite entropy.
    Degenerate,
    Finite(T),
}

impl<T: Scalar> EntropyValue<T> {
    pub fn is_degenerate(&self) -> bool {
        matches!(self, EntropyValue::Degenerate)
    }

    /// Finite value, or `-inf` for the sentinel.
    pub fn as_f64(&self) -> f64 {
        match self {
            EntropyValue::Degenerate => f64::NEG_INFINITY,
            EntropyValue::Finite(h) => h.as_f64(),
        }
    }

    /// Total order; finite values within `tol` are equal.
    pub fn compare(&self, other: &Self, tol: f64) -> Ordering {
        match (self, other) {
            (EntropyValue::Degenerate, EntropyValue::Degenerate) => Ordering::Equal,
            (EntropyValue::Degenerate, _) => Ordering::Less,
            (_, EntropyValue::Degenerate) => Ordering::Greater,
            (EntropyValue::Finite(a), EntropyValue::Finite(b)) => {
                let d = a.as_f64() - b.as_f64();
                if d.abs() <= tol {
                    Ordering::Equal
                } else if d < 0.0 {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
        }
    }

    /// Strictly greater than `other`.
    pub fn exceeds(&self, other: &Self) -> bool {
        self.compare(other, 0.0) == Ordering::Greater
    }
}

impl<T: Scalar> PartialOrd for EntropyValue<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.compare(other, 0.0))
    }
}

pub fn differential_entropy<T: Scalar>(sample: &[T]) -> Result<EntropyValue<T>, EntropyError> {
    differential_entropy_with_grid(sample, DEFAULT_GRID_POINTS)
}

pub fn differential_entropy_with_grid<T: Scalar>(
    sample: &[T],
    points: usize,
) -> Result<EntropyValue<T>, EntropyError> {
    let est = kde_with_grid(sample, points)?;
    if est.is_degenerate() {
        return Ok(EntropyValue::Degenerate);
    }
    Ok(EntropyValue::Finite(est.entropy_integral()))
}

/// Which sample the proposition discriminates better; ties within 1e-9 are equal.
pub fn discriminative_compare<T: Scalar>(a: &[T], b: &[T]) -> Result<Ordering, EntropyError> {
    let ha = differential_entropy(a)?;
    let hb = differential_entropy(b)?;
    Ok(ha.compare(&hb, ENTROPY_TOLERANCE))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_sample_is_an_error() {
        assert_eq!(kde::<f64>(&[]).unwrap_err(), EntropyError::EmptySample);
        assert_eq!(
            differential_entropy::<f64>(&[]).unwrap_err(),
            EntropyError::EmptySample
        );
        assert_eq!(
            kde_with_grid(&[0.1, 0.2], 10).unwrap_err(),
            EntropyError::GridTooSmall(10)
        );
    }

    #[test]
    fn constant_sample_is_degenerate() {
        let s = [0.5f64; 8];
        assert!(kde(&s).unwrap().is_degenerate());
        assert_eq!(differential_entropy(&s).unwrap(), EntropyValue::Degenerate);
        assert!(differential_entropy(&[0.3f64]).unwrap().is_degenerate());
    }

    #[test]
    fn sentinel_ranks_below_everything() {
        let d = EntropyValue::<f64>::Degenerate;
        assert!(d < EntropyValue::Finite(-1e300));
        assert_eq!(d.compare(&d, 0.0), Ordering::Equal);
        assert!(!d.exceeds(&d));
        assert_eq!(d.as_f64(), f64::NEG_INFINITY);
    }

    #[test]
    fn spread_beats_concentrated() {
        let spread = [0.1f64, 0.3, 0.5, 0.7, 0.9];
        let tight = [0.49f64, 0.50, 0.50, 0.51, 0.50];
        assert_eq!(discriminative_compare(&spread, &tight).unwrap(), Ordering::Greater);
        assert_eq!(discriminative_compare(&spread, &spread).unwrap(), Ordering::Equal);
        assert_eq!(
            discriminative_compare(&spread, &[0.2f64; 5]).unwrap(),
            Ordering::Greater
        );
    }

    #[test]
    fn density_has_unit_mass() {
        for s in [
            vec![0.0f64, 0.0, 1.0, 1.0],
            vec![0.1, 0.3, 0.5, 0.7, 0.9],
            vec![0.49, 0.5, 0.5, 0.51, 0.5],
            vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.3],
        ] {
            let est = kde(&s).unwrap();
            assert!((est.total_mass() - 1.0).abs() < 1e-3, "{s:?}: {}", est.total_mass());
            assert!(est.grid().len() >= DEFAULT_GRID_POINTS);
        }
    }

    #[test]
    fn bimodal_peaks_near_clusters() {
        let mut s = vec![0.1f64; 10];
        s.extend(vec![0.9f64; 10]);
        let est = kde(&s).unwrap();
        let at = |x: f64| est.density_at(x);
        assert!(at(0.1) > at(0.5) * 2.0);
        assert!(at(0.9) > at(0.5) * 2.0);
        let (grid, dens) = (est.grid(), est.density());
        let left_peak = (0..grid.len())
            .filter(|&i| grid[i] < 0.5)
            .max_by(|&a, &b| dens[a].total_cmp(&dens[b]))
            .unwrap();
        assert!((grid[left_peak] - 0.1).abs() < 0.02);
    }

    #[test]
    fn silverman_uses_robust_spread() {
        // std ~0.316, IQR 0 -> falls back to std
        let s = [0.0f64, 0.0, 0.0, 0.0, 1.0];
        let bw = silverman_bandwidth(&s);
        let expect = 1.06 * (0.2f64).sqrt() * 5f64.powf(-0.2);
        assert!((bw - expect).abs() < 1e-12);
        assert_eq!(silverman_bandwidth(&[0.5f64, 0.5]), BANDWIDTH_FLOOR);
    }

    #[test]
    fn single_precision_entropy_orders_the_same() {
        let spread = [0.1f32, 0.3, 0.5, 0.7, 0.9];
        let tight = [0.49f32, 0.50, 0.50, 0.51, 0.50];
        assert_eq!(discriminative_compare(&spread, &tight).unwrap(), Ordering::Greater);
    }
}
