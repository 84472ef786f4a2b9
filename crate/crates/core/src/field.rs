//! Sampled functions on the torus and the truncated line, their spectra,
//! `L_p` norms, tensor products and periodization.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::fft::Fft;
use crate::{Error, Result, TAU};

/// Whether a grid models `T^d` or a period-`L` stand-in for `R^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum DomainKind {
    Torus,
    Line,
}

/// A uniform grid with `samples` points per axis over `[-L/2, L/2)^dim`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Domain {
    kind: DomainKind,
    dim: usize,
    period: f64,
    samples: usize,
}

impl Domain {
    pub const MAX_DIM: usize = 3;
    pub const MIN_SAMPLES: usize = 4;

    pub fn new(kind: DomainKind, dim: usize, period: f64, samples: usize) -> Result<Self> {
        if dim == 0 || dim > Self::MAX_DIM {
            return Err(Error::InvalidDomain(format!(
                "dimension {dim} outside 1..={}",
                Self::MAX_DIM
            )));
        }
        if samples < Self::MIN_SAMPLES || !samples.is_power_of_two() {
            return Err(Error::InvalidDomain(format!(
                "samples per axis {samples} must be a power of two >= {}",
                Self::MIN_SAMPLES
            )));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidDomain(format!("period {period} must be positive")));
        }
        if kind == DomainKind::Torus && period != 1.0 {
            return Err(Error::InvalidDomain(format!("torus period must be 1, got {period}")));
        }
        Ok(Self {
            kind,
            dim,
            period,
            samples,
        })
    }

    pub fn torus(dim: usize, samples: usize) -> Result<Self> {
        Self::new(DomainKind::Torus, dim, 1.0, samples)
    }

    pub fn line(dim: usize, period: f64, samples: usize) -> Result<Self> {
        Self::new(DomainKind::Line, dim, period, samples)
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    /// Total number of grid points, `N^d`.
    pub fn len(&self) -> usize {
        self.samples.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.samples as f64
    }

    pub fn cell_volume(&self) -> f64 {
        libm::pow(self.spacing(), self.dim as f64)
    }

    /// Coordinate of grid index `j` along one axis: `-L/2 + jL/N`.
    pub fn coordinate(&self, j: usize) -> f64 {
        -0.5 * self.period + j as f64 * self.spacing()
    }

    /// Half-open integer band `[-N/2, N/2)` of representable frequencies.
    pub fn band(&self) -> (i64, i64) {
        let h = (self.samples / 2) as i64;
        (-h, h)
    }

    /// Largest physical frequency magnitude on one axis, `N / 2L`.
    pub fn nyquist(&self) -> f64 {
        self.samples as f64 / (2.0 * self.period)
    }

    /// Integer frequency stored at FFT slot `k` of one axis.
    pub fn freq_of_slot(&self, k: usize) -> i64 {
        if k < self.samples / 2 {
            k as i64
        } else {
            k as i64 - self.samples as i64
        }
    }

    pub fn slot_of_freq(&self, m: i64) -> Option<usize> {
        let (lo, hi) = self.band();
        if m < lo || m >= hi {
            None
        } else if m >= 0 {
            Some(m as usize)
        } else {
            Some((m + self.samples as i64) as usize)
        }
    }

    /// Per-axis indices of a flat row-major index (unused axes are zero).
    pub fn axes(&self, flat: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        let mut rest = flat;
        for axis in (0..self.dim).rev() {
            out[axis] = rest % self.samples;
            rest /= self.samples;
        }
        out
    }

    pub fn flat(&self, axes: &[usize]) -> usize {
        axes[..self.dim]
            .iter()
            .fold(0, |acc, &j| acc * self.samples + j)
    }

    pub fn position(&self, flat: usize) -> [f64; 3] {
        let ax = self.axes(flat);
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = self.coordinate(ax[a]);
        }
        x
    }

    /// Integer frequency vector stored at a flat spectral slot.
    pub fn frequency(&self, flat: usize) -> [i64; 3] {
        let ax = self.axes(flat);
        let mut m = [0i64; 3];
        for a in 0..self.dim {
            m[a] = self.freq_of_slot(ax[a]);
        }
        m
    }

    /// Physical frequency `m / L` at a flat spectral slot.
    pub fn physical_frequency(&self, flat: usize) -> [f64; 3] {
        let m = self.frequency(flat);
        let mut xi = [0.0; 3];
        for a in 0..self.dim {
            xi[a] = m[a] as f64 / self.period;
        }
        xi
    }

    pub fn slot_of_frequency(&self, m: &[i64]) -> Option<usize> {
        if m.len() != self.dim {
            return None;
        }
        let mut axes = [0usize; 3];
        for a in 0..self.dim {
            axes[a] = self.slot_of_freq(m[a])?;
        }
        Some(self.flat(&axes))
    }

    pub(crate) fn check_same(&self, other: &Domain, what: &str) -> Result<()> {
        if self != other {
            return Err(Error::DomainMismatch(format!(
                "{what}: {self:?} vs {other:?}"
            )));
        }
        Ok(())
    }
}

/// Euclidean norm of the first `dim` entries.
pub(crate) fn norm3(v: &[f64; 3], dim: usize) -> f64 {
    libm::sqrt(v[..dim].iter().map(|x| x * x).sum())
}

/// A complex-valued function sampled on a [`Domain`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    domain: Domain,
    values: Vec<Complex64>,
}

impl SampledField {
    pub fn new(domain: Domain, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::SizeMismatch {
                expected: domain.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidParameter(format!("non-finite sample at index {i}")));
        }
        Ok(Self { domain, values })
    }

    pub fn from_real(domain: Domain, values: Vec<f64>) -> Result<Self> {
        Self::new(domain, values.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
    }

    /// Samples `f` at every grid position (only the first `dim` coordinates are meaningful).
    pub fn from_fn(domain: Domain, mut f: impl FnMut(&[f64]) -> Complex64) -> Result<Self> {
        let values = (0..domain.len())
            .map(|i| {
                let x = domain.position(i);
                f(&x[..domain.dim()])
            })
            .collect();
        Self::new(domain, values)
    }

    pub fn zeros(domain: Domain) -> Self {
        Self {
            domain,
            values: vec![Complex64::new(0.0, 0.0); domain.len()],
        }
    }

    pub fn constant(domain: Domain, c: Complex64) -> Self {
        Self {
            domain,
            values: vec![c; domain.len()],
        }
    }

    pub(crate) fn from_parts_unchecked(domain: Domain, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), domain.len());
        Self { domain, values }
    }

    pub(crate) fn from_real_unchecked(domain: Domain, values: Vec<f64>) -> Self {
        Self::from_parts_unchecked(
            domain,
            values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
        )
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn abs(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_parts_unchecked(self.domain, self.values.iter().map(|v| v * c).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.domain.check_same(&other.domain, "add")?;
        Ok(Self::from_parts_unchecked(
            self.domain,
            self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Average of the samples; equals `f^(0)` on either kind of domain.
    pub fn mean(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.values.len() as f64
    }

    /// `int f`: the mean on the torus, the rectangle rule on the line.
    pub fn integral(&self) -> Complex64 {
        match self.domain.kind {
            DomainKind::Torus => self.mean(),
            DomainKind::Line => self.values.iter().sum::<Complex64>() * self.domain.cell_volume(),
        }
    }

    /// Cyclic translation by whole samples: `out(x) = f(x - shift * h)`.
    pub fn translate(&self, shift: &[i64]) -> Self {
        let n = self.domain.samples as i64;
        let mut out = vec![Complex64::new(0.0, 0.0); self.values.len()];
        for (i, v) in self.values.iter().enumerate() {
            let ax = self.domain.axes(i);
            let mut moved = [0usize; 3];
            for a in 0..self.domain.dim {
                moved[a] = (ax[a] as i64 + shift[a]).rem_euclid(n) as usize;
            }
            out[self.domain.flat(&moved)] = *v;
        }
        Self::from_parts_unchecked(self.domain, out)
    }

    /// Max pointwise modulus of the difference.
    pub fn max_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Normalized Fourier-series coefficients `c_m` of a [`SampledField`],
/// stored in FFT slot order. On the line, `L^d c_m` approximates the
/// continuous transform `f^(m/L)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSpectrum {
    domain: Domain,
    coeffs: Vec<Complex64>,
}

impl FourierSpectrum {
    pub fn new(domain: Domain, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != domain.len() {
            return Err(Error::SizeMismatch {
                expected: domain.len(),
                got: coeffs.len(),
            });
        }
        Ok(Self { domain, coeffs })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn coeff(&self, m: &[i64]) -> Option<Complex64> {
        self.domain.slot_of_frequency(m).map(|k| self.coeffs[k])
    }

    /// `sum |c_m|^2`, equal to the mean of `|f|^2`.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Slots whose coefficient exceeds `rel_tol` times the largest one.
    pub fn active_slots(&self, rel_tol: f64) -> Vec<usize> {
        let peak = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return Vec::new();
        }
        (0..self.coeffs.len())
            .filter(|&k| self.coeffs[k].norm() > rel_tol * peak)
            .collect()
    }

    /// Continuous-transform value `L^d c_m` at a slot (equal to `c_m` on the torus).
    pub fn transform_value(&self, slot: usize) -> Complex64 {
        self.coeffs[slot] * libm::pow(self.domain.period, self.domain.dim as f64)
    }
}

/// Relative threshold below which spectral coefficients count as zero.
pub(crate) const ACTIVE_TOL: f64 = 1e-13;

/// An FFT plan bound to a domain; reusable across many transforms.
#[derive(Debug, Clone)]
pub struct SpectralPlan {
    domain: Domain,
    fft: Fft,
}

impl SpectralPlan {
    pub fn new(domain: Domain) -> Self {
        Self {
            domain,
            fft: Fft::new(domain.samples),
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    fn parity(&self, flat: usize) -> f64 {
        let ax = self.domain.axes(flat);
        if ax[..self.domain.dim].iter().sum::<usize>() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn forward(&self, field: &SampledField) -> Result<FourierSpectrum> {
        self.domain.check_same(&field.domain, "transform")?;
        let mut buf = field.values.clone();
        self.fft.run_nd(&mut buf, self.domain.dim, false);
        let inv = 1.0 / self.domain.len() as f64;
        // grid starts at -L/2, contributing (-1)^m per axis
        for (k, c) in buf.iter_mut().enumerate() {
            *c *= self.parity(k) * inv;
        }
        Ok(FourierSpectrum {
            domain: self.domain,
            coeffs: buf,
        })
    }

    /// Synthesizes sample values from coefficients in slot order.
    pub fn inverse_values(&self, coeffs: &[Complex64], out: &mut Vec<Complex64>) {
        out.clear();
        out.extend(
            coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c * self.parity(k)),
        );
        self.fft.run_nd(out, self.domain.dim, true);
    }

    pub fn inverse(&self, spectrum: &FourierSpectrum) -> Result<SampledField> {
        self.domain.check_same(&spectrum.domain, "inverse transform")?;
        let mut out = Vec::with_capacity(spectrum.coeffs.len());
        self.inverse_values(&spectrum.coeffs, &mut out);
        Ok(SampledField::from_parts_unchecked(self.domain, out))
    }
}

/// Builds the trigonometric polynomial with exactly the given coefficients.
pub fn synth(domain: Domain, terms: &[(Vec<i64>, Complex64)]) -> Result<SampledField> {
    let mut coeffs = vec![Complex64::new(0.0, 0.0); domain.len()];
    let (lo, hi) = domain.band();
    for (m, c) in terms {
        if m.len() != domain.dim() {
            return Err(Error::InvalidParameter(format!(
                "frequency {m:?} has {} components, domain has dimension {}",
                m.len(),
                domain.dim()
            )));
        }
        let slot = domain
            .slot_of_frequency(m)
            .ok_or_else(|| Error::FrequencyOutOfBand {
                freq: m.clone(),
                lo,
                hi,
            })?;
        coeffs[slot] += *c;
    }
    SpectralPlan::new(domain).inverse(&FourierSpectrum { domain, coeffs })
}

pub fn transform(field: &SampledField) -> FourierSpectrum {
    SpectralPlan::new(field.domain)
        .forward(field)
        .expect("plan built from the field's own domain")
}

pub fn inverse_transform(spectrum: &FourierSpectrum) -> SampledField {
    SpectralPlan::new(spectrum.domain)
        .inverse(spectrum)
        .expect("plan built from the spectrum's own domain")
}

pub const P_MIN: f64 = 1.0;
pub const P_MAX: f64 = 256.0;

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if !(P_MIN..=P_MAX).contains(&p) {
        return Err(Error::ExponentOutOfRange {
            p,
            lo: P_MIN,
            hi: P_MAX,
        });
    }
    Ok(())
}

/// `L_p` norm of nonnegative samples with the domain's measure.
pub fn lp_norm_of_moduli(domain: &Domain, moduli: &[f64], p: f64) -> Result<f64> {
    check_exponent(p)?;
    let peak = moduli.iter().copied().fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(0.0);
    }
    // factor out the peak so |f|^p cannot overflow at large p
    let sum: f64 = moduli.iter().map(|&v| libm::pow(v / peak, p)).sum();
    let measure = match domain.kind() {
        DomainKind::Torus => 1.0 / moduli.len() as f64,
        DomainKind::Line => domain.cell_volume(),
    };
    Ok(peak * libm::pow(sum * measure, 1.0 / p))
}

/// `||f||_p` for `p` in `[1, 256]`: normalized Haar measure on the torus,
/// rectangle rule with cell volume `(L/N)^d` on the line.
pub fn lp_norm(field: &SampledField, p: f64) -> Result<f64> {
    lp_norm_of_moduli(&field.domain, &field.abs(), p)
}

/// `(f1 (x) f2)(x, y) = f1(x) f2(y)` on the product domain.
pub fn tensor_product(f1: &SampledField, f2: &SampledField) -> Result<SampledField> {
    let (a, b) = (f1.domain, f2.domain);
    if a.kind != b.kind || a.samples != b.samples || a.period != b.period {
        return Err(Error::DomainMismatch(format!(
            "tensor factors must share kind, period and N: {a:?} vs {b:?}"
        )));
    }
    let domain = Domain::new(a.kind, a.dim + b.dim, a.period, a.samples)?;
    let mut values = Vec::with_capacity(domain.len());
    for u in &f1.values {
        for v in &f2.values {
            values.push(u * v);
        }
    }
    Ok(SampledField::from_parts_unchecked(domain, values))
}

/// Result of [`periodize`].
#[derive(Debug, Clone)]
pub struct Periodized {
    pub field: SampledField,
    /// Fraction of `|f_t|` mass lying more than three periods from the origin.
    pub tail_estimate: f64,
    pub decay_warning: bool,
}

pub const PERIODIZE_TAIL_BUDGET: f64 = 1e-8;

/// Continuous Fourier transform of the sampled line function at `xi`,
/// `sum_j f(x_j) e^{-2 pi i xi.x_j} h^d`.
pub fn line_transform_at(field: &SampledField, xi: &[f64]) -> Complex64 {
    let d = field.domain.dim;
    let cell = field.domain.cell_volume();
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, v) in field.values.iter().enumerate() {
        if v.re == 0.0 && v.im == 0.0 {
            continue;
        }
        let x = field.domain.position(i);
        let phase: f64 = (0..d).map(|a| xi[a] * x[a]).sum();
        let angle = -TAU * phase;
        acc += v * Complex64::new(libm::cos(angle), libm::sin(angle));
    }
    acc * cell
}

/// Periodization `f~_t(x) = sum_m f_t(x + m)` of the dilation
/// `f_t(x) = t^{-d} f(x/t)`, built from its Fourier series `f~_t^(m) = f^(tm)`.
pub fn periodize(f: &SampledField, t: f64, torus_samples: usize) -> Result<Periodized> {
    if f.domain.kind != DomainKind::Line {
        return Err(Error::DomainMismatch("periodize expects a line field".into()));
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidParameter(format!("dilation t = {t} must be positive")));
    }
    let d = f.domain.dim;
    let torus = Domain::torus(d, torus_samples)?;

    let mass: f64 = f.values.iter().map(|v| v.norm()).sum();
    let mut tail = 0.0;
    for (i, v) in f.values.iter().enumerate() {
        let x = f.domain.position(i);
        if x[..d].iter().any(|c| (t * c).abs() > 3.0) {
            tail += v.norm();
        }
    }
    let tail_estimate = if mass > 0.0 { tail / mass } else { 0.0 };

    // Separable phases: e^{-2 pi i t m x_j} per axis.
    let n = f.domain.samples;
    let nt = torus_samples;
    let mut phases = vec![Complex64::new(0.0, 0.0); nt * n];
    for k in 0..nt {
        let m = torus.freq_of_slot(k) as f64;
        for j in 0..n {
            let angle = -TAU * t * m * f.domain.coordinate(j);
            phases[k * n + j] = Complex64::new(libm::cos(angle), libm::sin(angle));
        }
    }
    let cell = f.domain.cell_volume();
    let nonzero: Vec<(usize, [usize; 3])> = (0..f.values.len())
        .filter(|&i| f.values[i] != Complex64::new(0.0, 0.0))
        .map(|i| (i, f.domain.axes(i)))
        .collect();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); torus.len()];
    for (slot, c) in coeffs.iter_mut().enumerate() {
        let ks = torus.axes(slot);
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, ax) in &nonzero {
            let mut ph = Complex64::new(1.0, 0.0);
            for a in 0..d {
                ph *= phases[ks[a] * n + ax[a]];
            }
            acc += f.values[*i] * ph;
        }
        *c = acc * cell;
    }
    let field = SpectralPlan::new(torus).inverse(&FourierSpectrum {
        domain: torus,
        coeffs,
    })?;
    Ok(Periodized {
        field,
        tail_estimate,
        decay_warning: tail_estimate > PERIODIZE_TAIL_BUDGET,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_field;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn domain_validation() {
        assert!(Domain::torus(1, 3).is_err());
        assert!(Domain::torus(1, 2).is_err());
        assert!(Domain::torus(4, 8).is_err());
        assert!(Domain::line(1, -1.0, 8).is_err());
        assert!(Domain::line(2, 4.0, 16).is_ok());
    }

    #[test]
    fn synth_constant_and_character() {
        let d = Domain::torus(1, 64).unwrap();
        let one = synth(d, &[(vec![0], c(1.0))]).unwrap();
        assert!(one.values().iter().all(|v| (v - c(1.0)).norm() < 1e-12));

        let ch = synth(d, &[(vec![3], c(1.0))]).unwrap();
        for (j, v) in ch.values().iter().enumerate() {
            let x = d.coordinate(j);
            let want = Complex64::new(libm::cos(TAU * 3.0 * x), libm::sin(TAU * 3.0 * x));
            assert!((v - want).norm() < 1e-12);
        }
    }

    #[test]
    fn synth_conjugate_pair_is_real_cosine() {
        let d = Domain::torus(1, 64).unwrap();
        let f = synth(d, &[(vec![3], c(1.0)), (vec![-3], c(1.0))]).unwrap();
        for (j, v) in f.values().iter().enumerate() {
            assert!(v.im.abs() < 1e-12);
            assert!((v.re - 2.0 * libm::cos(6.0 * core::f64::consts::PI * d.coordinate(j))).abs() < 1e-12);
        }
    }

    #[test]
    fn synth_rejects_out_of_band() {
        let d = Domain::torus(1, 16).unwrap();
        let err = synth(d, &[(vec![8], c(1.0))]).unwrap_err();
        assert_eq!(
            err,
            Error::FrequencyOutOfBand {
                freq: vec![8],
                lo: -8,
                hi: 8
            }
        );
        assert!(synth(d, &[(vec![-8], c(1.0))]).is_ok());
    }

    #[test]
    fn character_transforms_to_one_hot() {
        let d = Domain::torus(1, 32).unwrap();
        let s = transform(&synth(d, &[(vec![5], c(1.0))]).unwrap());
        for k in 0..32 {
            let want = if d.freq_of_slot(k) == 5 { 1.0 } else { 0.0 };
            assert!((s.coeffs()[k] - c(want)).norm() < 1e-12);
        }
    }

    #[test]
    fn round_trip_and_parseval_all_dims() {
        for (dim, n) in [(1, 256), (2, 32), (3, 8)] {
            for kind in [DomainKind::Torus, DomainKind::Line] {
                let period = if kind == DomainKind::Torus { 1.0 } else { 3.0 };
                let d = Domain::new(kind, dim, period, n).unwrap();
                let f = random_field(d, 7 + dim as u64);
                let s = transform(&f);
                let back = inverse_transform(&s);
                let scale = f.max_abs();
                assert!(back.max_diff(&f) / scale < 1e-10);
                let mean_sq: f64 =
                    f.values().iter().map(|v| v.norm_sqr()).sum::<f64>() / d.len() as f64;
                assert!((s.energy() - mean_sq).abs() / mean_sq < 1e-10);
            }
        }
    }

    #[test]
    fn unimodular_character_has_unit_norm() {
        let d = Domain::torus(1, 128).unwrap();
        let f = synth(d, &[(vec![7], c(1.0))]).unwrap();
        for p in [1.0, 1.5, 2.0, 7.0, 256.0] {
            assert!((lp_norm(&f, p).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(lp_norm(&f, 0.5).is_err());
        assert!(lp_norm(&f, 300.0).is_err());
    }

    #[test]
    fn lp_norm_homogeneous() {
        let d = Domain::line(1, 4.0, 128).unwrap();
        let f = random_field(d, 3);
        let z = Complex64::new(-1.5, 2.0);
        for p in [1.0, 3.0, 40.0] {
            let a = lp_norm(&f.scale(z), p).unwrap();
            let b = z.norm() * lp_norm(&f, p).unwrap();
            assert!((a - b).abs() / b < 1e-12);
        }
    }

    #[test]
    fn poisson_norm_scales_like_s_to_minus_one_over_p_prime() {
        let d = Domain::line(1, 64.0, 1 << 14).unwrap();
        let poisson = |s: f64| {
            SampledField::from_fn(d, |x| {
                c(s / (core::f64::consts::PI * (x[0] * x[0] + s * s)))
            })
            .unwrap()
        };
        let ss = [0.01, 0.02, 0.05, 0.1];
        for p in [2.0, 4.0] {
            let xs: Vec<f64> = ss.iter().map(|s| libm::log(*s)).collect();
            let ys: Vec<f64> = ss
                .iter()
                .map(|&s| libm::log(lp_norm(&poisson(s), p).unwrap()))
                .collect();
            let fit = crate::estimate::least_squares(&xs, &ys);
            let want = -(1.0 - 1.0 / p);
            assert!((fit.0 - want).abs() < 0.05 * want.abs(), "p={p} slope {}", fit.0);
        }
    }

    #[test]
    fn tensor_of_characters_and_identity() {
        let d = Domain::torus(1, 16).unwrap();
        let a = synth(d, &[(vec![2], c(1.0))]).unwrap();
        let b = synth(d, &[(vec![-3], c(1.0))]).unwrap();
        let ab = tensor_product(&a, &b).unwrap();
        let want = synth(Domain::torus(2, 16).unwrap(), &[(vec![2, -3], c(1.0))]).unwrap();
        assert!(ab.max_diff(&want) < 1e-12);

        let one = SampledField::constant(d, c(1.0));
        let lifted = tensor_product(&one, &a).unwrap();
        for (i, v) in lifted.values().iter().enumerate() {
            assert!((v - a.values()[i % 16]).norm() < 1e-15);
        }
    }

    #[test]
    fn tensor_norm_factorizes_and_spectrum_is_outer_product() {
        let d = Domain::line(1, 2.0, 32).unwrap();
        let f1 = random_field(d, 11);
        let f2 = random_field(d, 12);
        let t = tensor_product(&f1, &f2).unwrap();
        let lhs = lp_norm(&t, 3.0).unwrap();
        let rhs = lp_norm(&f1, 3.0).unwrap() * lp_norm(&f2, 3.0).unwrap();
        assert!((lhs - rhs).abs() / rhs < 1e-10);

        let (s1, s2, st) = (transform(&f1), transform(&f2), transform(&t));
        for i in 0..32 {
            for j in 0..32 {
                let want = s1.coeffs()[i] * s2.coeffs()[j];
                assert!((st.coeffs()[i * 32 + j] - want).norm() < 1e-12);
            }
        }
        let bad = Domain::line(1, 3.0, 32).unwrap();
        assert!(tensor_product(&f1, &random_field(bad, 1)).is_err());
    }

    #[test]
    fn periodize_compact_support_is_identity() {
        // line spacing 1/64 contains the torus grid, so periodization is exact
        let line = Domain::line(1, 4.0, 256).unwrap();
        let bump = |x: f64| {
            if x.abs() < 0.2 {
                libm::exp(-1.0 / (1.0 - (x / 0.2) * (x / 0.2)))
            } else {
                0.0
            }
        };
        let f = SampledField::from_fn(line, |x| c(bump(x[0]))).unwrap();
        let p = periodize(&f, 1.0, 64).unwrap();
        assert!(!p.decay_warning);
        for (j, v) in p.field.values().iter().enumerate() {
            let x = p.field.domain().coordinate(j);
            assert!((v - c(bump(x))).norm() < 1e-12);
        }
    }

    #[test]
    fn periodized_heat_kernel_is_theta_function() {
        let s = 0.01;
        let heat = |x: f64| libm::exp(-x * x / (4.0 * s)) / libm::sqrt(4.0 * core::f64::consts::PI * s);
        let line = Domain::line(1, 8.0, 1024).unwrap();
        let f = SampledField::from_fn(line, |x| c(heat(x[0]))).unwrap();
        let p = periodize(&f, 1.0, 128).unwrap();
        assert!((p.field.integral().re - 1.0).abs() < 1e-8);
        for (j, v) in p.field.values().iter().enumerate() {
            let x = p.field.domain().coordinate(j);
            let lattice: f64 = (-5..=5).map(|k| heat(x + k as f64)).sum();
            assert!((v.re - lattice).abs() < 1e-8 * lattice.max(1.0));
        }
    }

    #[test]
    fn periodized_spectrum_samples_dilated_transform() {
        let s = 0.02;
        let line = Domain::line(1, 8.0, 2048).unwrap();
        let f = SampledField::from_fn(line, |x| {
            c(libm::exp(-x[0] * x[0] / (4.0 * s)) / libm::sqrt(4.0 * core::f64::consts::PI * s))
        })
        .unwrap();
        for t in [0.5, 0.25] {
            let p = periodize(&f, t, 64).unwrap();
            let spec = transform(&p.field);
            for m in -10i64..10 {
                let xi = t * m as f64;
                let want = libm::exp(-4.0 * core::f64::consts::PI * core::f64::consts::PI * s * xi * xi);
                assert!((spec.coeff(&[m]).unwrap() - c(want)).norm() < 1e-6, "t={t} m={m}");
            }
        }
    }

    #[test]
    fn periodize_flags_slow_decay() {
        let line = Domain::line(1, 64.0, 1024).unwrap();
        let f = SampledField::from_fn(line, |x| c(1.0 / (1.0 + x[0] * x[0]))).unwrap();
        let p = periodize(&f, 1.0, 32).unwrap();
        assert!(p.decay_warning);
        assert!(p.tail_estimate > 1e-3);
    }

    #[test]
    fn translation_moves_samples() {
        let d = Domain::torus(2, 8).unwrap();
        let f = random_field(d, 5);
        let g = f.translate(&[1, -2]);
        assert_eq!(g.values()[d.flat(&[1, 6])], f.values()[d.flat(&[0, 0])]);
        assert!(g.translate(&[-1, 2]).max_diff(&f) == 0.0);
    }
}
