//! Dyadic rectangles, partial sums and the rough Littlewood-Paley square
//! function `S(f) = (sum_R |S_R f|^2)^{1/2}`.
//!
//! Per axis a rectangle is `[2^{k-1}, 2^k)` (sign `+`) or `(-2^k, -2^{k-1}]`
//! (sign `-`). Frequency zero belongs to no rectangle, so the mean of `f` is
//! ignored by the square function; in `d >= 2` the same holds for every
//! frequency with a zero coordinate.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::field::{tensor_product, Domain, SampledField, SpectralPlan, ACTIVE_TOL};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Sign {
    #[cfg_attr(feature = "serde", serde(rename = "-"))]
    Minus,
    #[cfg_attr(feature = "serde", serde(rename = "+"))]
    Plus,
}

/// One signed dyadic interval per axis.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DyadicRectangle {
    pub axes: Vec<(Sign, i32)>,
}

/// `(sign, k)` with `2^{k-1} <= |x| < 2^k`, or `None` for `x = 0`.
pub fn dyadic_index(x: f64) -> Option<(Sign, i32)> {
    if x == 0.0 || !x.is_finite() {
        return None;
    }
    let a = x.abs();
    let mut k = libm::floor(libm::log2(a)) as i32 + 1;
    // guard the rounding of log2 at powers of two
    if a < libm::exp2((k - 1) as f64) {
        k -= 1;
    } else if a >= libm::exp2(k as f64) {
        k += 1;
    }
    Some((if x > 0.0 { Sign::Plus } else { Sign::Minus }, k))
}

impl DyadicRectangle {
    pub fn new(axes: Vec<(Sign, i32)>) -> Self {
        Self { axes }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn contains(&self, xi: &[f64]) -> bool {
        xi.len() == self.axes.len()
            && xi.iter().zip(&self.axes).all(|(&x, &ax)| dyadic_index(x) == Some(ax))
    }

    /// The rectangle containing `xi`, if no coordinate is zero.
    pub fn containing(xi: &[f64]) -> Option<Self> {
        let axes: Option<Vec<_>> = xi.iter().map(|&x| dyadic_index(x)).collect();
        axes.map(Self::new)
    }
}

/// The family of rectangles with every exponent in `[k_min, k_max]`, each
/// meeting the grid.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DyadicPartition {
    pub domain: Domain,
    pub k_min: i32,
    pub k_max: i32,
    pub rectangles: Vec<DyadicRectangle>,
}

impl DyadicPartition {
    pub fn len(&self) -> usize {
        self.rectangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rectangles.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// Whether `xi` lies in a rectangle of the family.
    pub fn covers(&self, xi: &[f64]) -> bool {
        match DyadicRectangle::containing(xi) {
            Some(r) => r.axes.iter().all(|&(_, k)| (self.k_min..=self.k_max).contains(&k)) && self.rectangles.binary_search(&r).is_ok(),
            None => false,
        }
    }

    pub fn position(&self, rect: &DyadicRectangle) -> Option<usize> {
        self.rectangles.binary_search(rect).ok()
    }
}

pub fn build_partition(domain: &Domain, k_min: i32, k_max: i32) -> Result<DyadicPartition> {
    if k_min > k_max {
        return Err(Error::InvalidParameter(format!("empty exponent range [{k_min}, {k_max}]")));
    }
    let top = libm::exp2(k_max as f64);
    if top > domain.nyquist() {
        return Err(Error::NyquistOverflow(format!(
            "2^{k_max} = {top} exceeds Nyquist {}",
            domain.nyquist()
        )));
    }
    let d = domain.dim();
    // per-axis intervals that contain at least one grid frequency
    let mut axis: Vec<(Sign, i32)> = Vec::new();
    let (lo, hi) = domain.band();
    for k in k_min..=k_max {
        for sign in [Sign::Minus, Sign::Plus] {
            let hit = (lo..hi).any(|m| dyadic_index(m as f64 / domain.period()) == Some((sign, k)));
            if hit {
                axis.push((sign, k));
            }
        }
    }
    let mut rectangles = Vec::with_capacity(axis.len().pow(d as u32));
    for idx in 0..axis.len().pow(d as u32) {
        let mut rest = idx;
        let mut axes = Vec::with_capacity(d);
        for _ in 0..d {
            axes.push(axis[rest % axis.len()]);
            rest /= axis.len();
        }
        rectangles.push(DyadicRectangle::new(axes));
    }
    rectangles.sort();
    Ok(DyadicPartition {
        domain: *domain,
        k_min,
        k_max,
        rectangles,
    })
}

/// `S_R f`: the Fourier restriction of `f` to `R`.
pub fn partial_sum(f: &SampledField, rect: &DyadicRectangle) -> Result<SampledField> {
    let domain = *f.domain();
    if rect.dim() != domain.dim() {
        return Err(Error::DomainMismatch(format!(
            "rectangle of dimension {} on a {}-d field",
            rect.dim(),
            domain.dim()
        )));
    }
    let plan = SpectralPlan::new(domain);
    let spec = plan.forward(f)?;
    let coeffs: Vec<Complex64> = (0..domain.len())
        .map(|k| {
            let xi = domain.physical_frequency(k);
            if rect.contains(&xi[..domain.dim()]) {
                spec.coeffs()[k]
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    let mut out = Vec::new();
    plan.inverse_values(&coeffs, &mut out);
    Ok(SampledField::new(domain, out)?)
}

/// Groups the active spectral slots of `f` by rectangle. The mean is skipped;
/// any other active slot outside the partition is an error.
fn group_by_rectangle(
    spec: &crate::field::FourierSpectrum,
    partition: &DyadicPartition,
) -> Result<BTreeMap<usize, Vec<usize>>> {
    let domain = *spec.domain();
    let d = domain.dim();
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for k in spec.active_slots(ACTIVE_TOL) {
        let xi = domain.physical_frequency(k);
        if xi[..d].iter().all(|&v| v == 0.0) {
            continue;
        }
        let pos = DyadicRectangle::containing(&xi[..d])
            .and_then(|r| partition.position(&r))
            .ok_or_else(|| Error::UncoveredFrequency(domain.frequency(k)[..d].to_vec()))?;
        groups.entry(pos).or_default().push(k);
    }
    Ok(groups)
}

/// `S(f) = (sum_R |S_R f|^2)^{1/2}`; the mean of `f` is ignored.
pub fn square_function(f: &SampledField, partition: &DyadicPartition) -> Result<SampledField> {
    let domain = *f.domain();
    domain.check_same(&partition.domain, "dyadic square function")?;
    let plan = SpectralPlan::new(domain);
    let spec = plan.forward(f)?;
    let groups = group_by_rectangle(&spec, partition)?;
    let n = domain.len();
    let mut acc = vec![0.0; n];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let mut out = Vec::with_capacity(n);
    for slots in groups.values() {
        buf.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for &k in slots {
            buf[k] = spec.coeffs()[k];
        }
        plan.inverse_values(&buf, &mut out);
        for i in 0..n {
            acc[i] += out[i].norm_sqr();
        }
    }
    Ok(SampledField::from_real_unchecked(domain, acc.into_iter().map(libm::sqrt).collect()))
}

/// `max |S(f1 (x) f2) - S(f1) (x) S(f2)|` with the product partition.
pub fn tensor_factorization_check(f1: &SampledField, f2: &SampledField, partition: &DyadicPartition) -> Result<f64> {
    if partition.dim() != 1 {
        return Err(Error::InvalidParameter("tensor check takes a one-dimensional partition".into()));
    }
    let s1 = square_function(f1, partition)?;
    let s2 = square_function(f2, partition)?;
    let product = tensor_product(f1, f2)?;
    let product_partition = build_partition(product.domain(), partition.k_min, partition.k_max)?;
    let s12 = square_function(&product, &product_partition)?;
    Ok(s12.max_diff(&tensor_product(&s1, &s2)?))
}
