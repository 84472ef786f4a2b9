//! Poisson and heat semigroups, kernel profiles given by their Fourier
//! transforms, Hölder-class validation, Calderón pairs and the smooth dyadic
//! partition of unity.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::field::{line_transform_at, norm3, Domain, DomainKind, FourierSpectrum, SampledField, SpectralPlan};
use crate::quad::LogTimeGrid;
use crate::{random, Error, Result, TAU};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum SemigroupKind {
    Poisson,
    Heat,
}

impl SemigroupKind {
    /// Spectral scale the symbol decays in: `|xi|` or `|xi|^2`.
    pub fn scale(self, xi_norm: f64) -> f64 {
        match self {
            SemigroupKind::Poisson => xi_norm,
            SemigroupKind::Heat => xi_norm * xi_norm,
        }
    }

    /// `e^{-2 pi t |xi|}` or `e^{-4 pi^2 t |xi|^2}`.
    pub fn symbol(self, t: f64, xi_norm: f64) -> f64 {
        match self {
            SemigroupKind::Poisson => libm::exp(-TAU * t * xi_norm),
            SemigroupKind::Heat => libm::exp(-TAU * TAU * t * xi_norm * xi_norm),
        }
    }

    /// Exponent rate `a` with symbol `e^{-a t}`.
    pub fn rate(self, xi_norm: f64) -> f64 {
        match self {
            SemigroupKind::Poisson => TAU * xi_norm,
            SemigroupKind::Heat => TAU * TAU * xi_norm * xi_norm,
        }
    }
}

/// `P_t` or `H_t` in dimension `dim`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SemigroupKernel {
    pub kind: SemigroupKind,
    pub t: f64,
    pub dim: usize,
}

/// `c_d = Gamma((d+1)/2) / pi^{(d+1)/2}`, the unit-mass Poisson constant.
pub fn poisson_constant(dim: usize) -> f64 {
    let a = (dim as f64 + 1.0) / 2.0;
    libm::tgamma(a) / libm::pow(PI, a)
}

impl SemigroupKernel {
    pub fn new(kind: SemigroupKind, t: f64, dim: usize) -> Result<Self> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidParameter(format!("semigroup time t = {t} must be positive")));
        }
        if dim == 0 || dim > Domain::MAX_DIM {
            return Err(Error::InvalidParameter(format!("dimension {dim} outside 1..=3")));
        }
        Ok(Self { kind, t, dim })
    }

    pub fn poisson(t: f64, dim: usize) -> Result<Self> {
        Self::new(SemigroupKind::Poisson, t, dim)
    }

    pub fn heat(t: f64, dim: usize) -> Result<Self> {
        Self::new(SemigroupKind::Heat, t, dim)
    }

    pub fn symbol(&self, xi: &[f64]) -> f64 {
        let n = libm::sqrt(xi.iter().map(|v| v * v).sum());
        self.kind.symbol(self.t, n)
    }

    /// Closed-form kernel on `R^d`.
    pub fn value(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let d = self.dim as f64;
        match self.kind {
            SemigroupKind::Poisson => {
                poisson_constant(self.dim) * self.t / libm::pow(r2 + self.t * self.t, (d + 1.0) / 2.0)
            }
            SemigroupKind::Heat => {
                libm::pow(2.0 * TAU * self.t, -d / 2.0) * libm::exp(-r2 / (4.0 * self.t))
            }
        }
    }

    /// Fraction of the kernel's mass outside the cube `[-L/2, L/2)^d`.
    pub fn spatial_tail(&self, period: f64) -> f64 {
        let h = period / 2.0;
        let inside_1d = match self.kind {
            SemigroupKind::Heat => libm::erf(h / (2.0 * libm::sqrt(self.t))),
            SemigroupKind::Poisson if self.dim == 1 => 2.0 / PI * libm::atan(h / self.t),
            SemigroupKind::Poisson => {
                // the ball of radius L/2 sits inside the cube
                let rho = h / self.t;
                return ball_tail_poisson(self.dim, rho);
            }
        };
        1.0 - libm::pow(inside_1d, self.dim as f64)
    }
}

/// Poisson mass outside the ball of radius `rho * t`.
fn ball_tail_poisson(dim: usize, rho: f64) -> f64 {
    match dim {
        2 => 1.0 / libm::sqrt(1.0 + rho * rho),
        _ => {
            // d = 3: 1 - (2/pi)(atan rho - rho / (1 + rho^2))
            1.0 - 2.0 / PI * (libm::atan(rho) - rho / (1.0 + rho * rho))
        }
    }
}

/// Symbol values `e^{-2 pi t |xi|}` (or heat) at every spectral slot of `domain`,
/// with `xi = m / L`.
pub fn kernel_symbol(kernel: &SemigroupKernel, domain: &Domain) -> Vec<f64> {
    (0..domain.len())
        .map(|k| {
            let xi = domain.physical_frequency(k);
            kernel.kind.symbol(kernel.t, norm3(&xi, domain.dim()))
        })
        .collect()
}

/// Largest symbol value at or beyond the Nyquist frequency, relative to `symbol(0) = 1`.
pub fn spectral_tail(kernel: &SemigroupKernel, domain: &Domain) -> f64 {
    kernel.kind.symbol(kernel.t, domain.nyquist())
}

pub const KERNEL_TAIL_BUDGET: f64 = 1e-6;

/// The kernel of `e^{-t A}` on the sampled domain, synthesized from its
/// symbol. On the line this is the period-`L` kernel, whose convolution is
/// the exact multiplier on the big torus; it integrates to one over a period.
pub fn kernel_field(kernel: &SemigroupKernel, domain: &Domain) -> Result<SampledField> {
    if kernel.dim != domain.dim() {
        return Err(Error::DomainMismatch(format!(
            "kernel dimension {} vs domain dimension {}",
            kernel.dim,
            domain.dim()
        )));
    }
    let tail = spectral_tail(kernel, domain);
    if tail > KERNEL_TAIL_BUDGET {
        return Err(Error::TailBudget {
            what: format!("{:?} kernel at t = {} beyond Nyquist", kernel.kind, kernel.t),
            estimate: tail,
            budget: KERNEL_TAIL_BUDGET,
        });
    }
    let scale = match domain.kind() {
        DomainKind::Torus => 1.0,
        DomainKind::Line => libm::pow(domain.period(), -(domain.dim() as f64)),
    };
    let coeffs = kernel_symbol(kernel, domain)
        .into_iter()
        .map(|s| Complex64::new(s * scale, 0.0))
        .collect();
    SpectralPlan::new(*domain).inverse(&FourierSpectrum::new(*domain, coeffs)?)
}

/// Gap between `e^{-2 pi t |xi|}` and its Bochner subordination
/// `pi^{-1/2} int_0^inf e^{-s} s^{-1/2} e^{-4 pi^2 (t^2 / 4s) |xi|^2} ds`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SubordinationReport {
    pub gaps: Vec<f64>,
    pub max_gap: f64,
}

/// Quadrature of the subordination integral on `s_grid`; the tail below
/// `s_min` is added in closed form (exactly for `xi = 0`, by its Laplace
/// bound otherwise).
pub fn subordination_check(t: f64, xi_norms: &[f64], s_grid: &LogTimeGrid) -> Result<SubordinationReport> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("t = {t} must be positive")));
    }
    if s_grid.t_min() > 1e-6 || s_grid.t_max() < 1e3 {
        return Err(Error::InvalidGrid(format!(
            "subordination grid [{}, {}] must cover [1e-6, 1e3]",
            s_grid.t_min(),
            s_grid.t_max()
        )));
    }
    let s0 = s_grid.t_min();
    let gaps: Vec<f64> = xi_norms
        .iter()
        .map(|&xi| {
            let a = PI * PI * t * t * xi * xi;
            let q = s_grid.integrate(|s| libm::exp(-s - a / s) * libm::sqrt(s)).value;
            let lower = if a == 0.0 {
                libm::sqrt(PI) * libm::erf(libm::sqrt(s0))
            } else {
                libm::pow(s0, 1.5) * libm::exp(-a / s0) / a
            };
            let rhs = (q + lower) / libm::sqrt(PI);
            (rhs - libm::exp(-TAU * t * xi)).abs()
        })
        .collect();
    let max_gap = gaps.iter().copied().fold(0.0, f64::max);
    Ok(SubordinationReport { gaps, max_gap })
}

/// `t d/dt P_t(x)` for the Poisson kernel on `R^d`, as a function of `|x|`.
pub fn poisson_g_kernel(dim: usize, r: f64, t: f64) -> f64 {
    let u = r * r + t * t;
    let d = dim as f64;
    poisson_constant(dim) * t * (u - (d + 1.0) * t * t) / libm::pow(u, (d + 3.0) / 2.0)
}

/// Radial derivative of [`poisson_g_kernel`].
pub fn poisson_g_kernel_dr(dim: usize, r: f64, t: f64) -> f64 {
    let u = r * r + t * t;
    let d = dim as f64;
    let inner = u - (d + 3.0) / 2.0 * (u - (d + 1.0) * t * t);
    poisson_constant(dim) * t * 2.0 * r * inner / libm::pow(u, (d + 5.0) / 2.0)
}

/// Size and smoothness constants of the `L_2(dt/t)`-valued Poisson g-kernel.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegularityReport {
    /// `max |x|^d ||K(x)||`.
    pub size_constant: f64,
    /// `max |x|^{d+1} ||grad K(x)||`.
    pub smoothness_constant: f64,
}

pub fn poisson_g_kernel_regularity(dim: usize, radii: &[f64], grid: &LogTimeGrid) -> RegularityReport {
    let d = dim as f64;
    let mut size: f64 = 0.0;
    let mut smooth: f64 = 0.0;
    for &r in radii {
        let k2 = grid.integrate(|t| poisson_g_kernel(dim, r, t).powi_2()).value;
        let g2 = grid.integrate(|t| poisson_g_kernel_dr(dim, r, t).powi_2()).value;
        size = size.max(libm::pow(r, d) * libm::sqrt(k2));
        smooth = smooth.max(libm::pow(r, d + 1.0) * libm::sqrt(g2));
    }
    RegularityReport {
        size_constant: size,
        smoothness_constant: smooth,
    }
}

trait Square {
    fn powi_2(self) -> f64;
}

impl Square for f64 {
    fn powi_2(self) -> f64 {
        self * self
    }
}

/// A kernel `phi` on `R^d` known through its Fourier transform.
pub trait KernelSymbol: Send + Sync + core::fmt::Debug {
    fn dim(&self) -> usize;

    /// `phi^(xi) = int phi(x) e^{-2 pi i xi.x} dx`.
    fn ft(&self, xi: &[f64]) -> Complex64;

    /// `phi^(r e_1)`; equals `ft` at any point of norm `r` when `phi` is radial.
    fn radial(&self, r: f64) -> Complex64 {
        let mut xi = [0.0; 3];
        xi[0] = r;
        self.ft(&xi[..self.dim()])
    }
}

/// `phi = t d/dt P_t |_{t=1}`, with `phi^(xi) = -2 pi |xi| e^{-2 pi |xi|}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonDerivative {
    pub dim: usize,
}

impl KernelSymbol for PoissonDerivative {
    fn dim(&self) -> usize {
        self.dim
    }

    fn ft(&self, xi: &[f64]) -> Complex64 {
        let a = TAU * libm::sqrt(xi.iter().map(|v| v * v).sum());
        Complex64::new(-a * libm::exp(-a), 0.0)
    }
}

/// `c * phi`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaled<K> {
    pub inner: K,
    pub factor: f64,
}

impl<K: KernelSymbol> KernelSymbol for Scaled<K> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn ft(&self, xi: &[f64]) -> Complex64 {
        self.inner.ft(xi) * self.factor
    }
}

impl<K: KernelSymbol + ?Sized> KernelSymbol for Box<K> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn ft(&self, xi: &[f64]) -> Complex64 {
        (**self).ft(xi)
    }
}

impl<K: KernelSymbol + ?Sized> KernelSymbol for &K {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn ft(&self, xi: &[f64]) -> Complex64 {
        (**self).ft(xi)
    }
}

/// A kernel given by samples on a line domain; its transform is the direct
/// Riemann sum, accurate when the samples decay inside the box. The samples
/// carry no information beyond the Nyquist frequency, where `ft` is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledKernel {
    field: SampledField,
}

impl SampledKernel {
    pub fn new(field: SampledField) -> Result<Self> {
        if field.domain().kind() != DomainKind::Line {
            return Err(Error::DomainMismatch("sampled kernels live on the line".into()));
        }
        Ok(Self { field })
    }

    pub fn field(&self) -> &SampledField {
        &self.field
    }
}

impl KernelSymbol for SampledKernel {
    fn dim(&self) -> usize {
        self.field.domain().dim()
    }

    fn ft(&self, xi: &[f64]) -> Complex64 {
        let nyq = self.field.domain().nyquist();
        if xi.iter().any(|v| v.abs() >= nyq) {
            return Complex64::new(0.0, 0.0);
        }
        line_transform_at(&self.field, xi)
    }
}

/// Samples of a kernel on a line domain, synthesized from `phi^(m/L)` so the
/// result is the period-`L` version of `phi` (with exact mean `phi^(0)`).
pub fn profile_field(phi: &dyn KernelSymbol, domain: &Domain) -> Result<SampledField> {
    if domain.kind() != DomainKind::Line || domain.dim() != phi.dim() {
        return Err(Error::DomainMismatch(format!(
            "profile of a {}-d kernel needs a {}-d line domain",
            phi.dim(),
            phi.dim()
        )));
    }
    let scale = libm::pow(domain.period(), -(domain.dim() as f64));
    let coeffs = (0..domain.len())
        .map(|k| {
            let xi = domain.physical_frequency(k);
            phi.ft(&xi[..domain.dim()]) * scale
        })
        .collect();
    SpectralPlan::new(*domain).inverse(&FourierSpectrum::new(*domain, coeffs)?)
}

/// `epsilon > 0`, `delta in (0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HolderParams {
    pub epsilon: f64,
    pub delta: f64,
}

impl HolderParams {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "Hölder parameters need epsilon > 0 and delta in (0, 1], got ({epsilon}, {delta})"
            )));
        }
        Ok(Self { epsilon, delta })
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HolderReport {
    pub decay_margin: f64,
    pub holder_margin: f64,
    pub mean: f64,
    pub pass: bool,
}

pub const HOLDER_PAIRS: usize = 100_000;
pub const HOLDER_SEED: u64 = 0x486f_6c64;
const MARGIN_SLACK: f64 = 1e-3;
const MEAN_BUDGET: f64 = 1e-6;

/// Evaluates the decay, smoothness and mean-zero conditions of the class
/// `H_{epsilon, delta}` on the samples. Smoothness is checked on a seeded
/// random subsample of point pairs.
pub fn check_holder_class(phi: &SampledField, params: HolderParams) -> HolderReport {
    let domain = *phi.domain();
    let d = domain.dim();
    let a = d as f64 + params.epsilon;
    let b = a + params.delta;
    let n = domain.len();
    let mut radius = Vec::with_capacity(n);
    let mut decay: f64 = 0.0;
    for i in 0..n {
        let r = norm3(&domain.position(i), d);
        radius.push(r);
        decay = decay.max(phi.values()[i].norm() * libm::pow(1.0 + r, a));
    }
    let mut holder: f64 = 0.0;
    let mut rng = random::rng(HOLDER_SEED);
    for _ in 0..HOLDER_PAIRS {
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        if i == j {
            continue;
        }
        let (x, y) = (domain.position(i), domain.position(j));
        let mut dist2 = 0.0;
        for k in 0..d {
            dist2 += (x[k] - y[k]) * (x[k] - y[k]);
        }
        let hd = libm::pow(libm::sqrt(dist2), params.delta);
        let bound = hd * (libm::pow(1.0 + radius[i], -b) + libm::pow(1.0 + radius[j], -b));
        let lhs = (phi.values()[i] - phi.values()[j]).norm();
        holder = holder.max(lhs / bound);
    }
    let mean = phi.integral().norm();
    HolderReport {
        decay_margin: decay,
        holder_margin: holder,
        mean,
        pass: decay <= 1.0 + MARGIN_SLACK && holder <= 1.0 + MARGIN_SLACK && mean <= MEAN_BUDGET,
    }
}

/// Record of `int_0^inf phi^(t xi) psi^(t xi) dt/t` on a set of frequencies.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CalderonPair {
    pub xis: Vec<Vec<f64>>,
    pub values: Vec<Complex64Pair>,
    pub max_deviation: f64,
    pub quadrature_error: f64,
}

/// Complex number as a plain pair, for serialization.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Complex64Pair {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Complex64Pair {
    fn from(c: Complex64) -> Self {
        Self { re: c.re, im: c.im }
    }
}

pub const CALDERON_TAIL_BUDGET: f64 = 1e-8;

pub fn calderon_product(
    phi: &dyn KernelSymbol,
    psi: &dyn KernelSymbol,
    xis: &[Vec<f64>],
    grid: &LogTimeGrid,
) -> Result<CalderonPair> {
    let mut values = Vec::with_capacity(xis.len());
    let mut worst: f64 = 0.0;
    let mut qerr: f64 = 0.0;
    for xi in xis {
        if xi.len() != phi.dim() || xi.len() != psi.dim() {
            return Err(Error::InvalidParameter(format!("frequency {xi:?} has the wrong dimension")));
        }
        if xi.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidParameter("the frequency set must exclude 0".into()));
        }
        let at = |t: f64| {
            let txi: Vec<f64> = xi.iter().map(|v| v * t).collect();
            phi.ft(&txi) * psi.ft(&txi)
        };
        let vals: Vec<Complex64> = grid.nodes().iter().map(|&t| at(t)).collect();
        let peak = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let ends = vals[0].norm().max(vals[vals.len() - 1].norm());
        if ends > CALDERON_TAIL_BUDGET * peak.max(f64::MIN_POSITIVE) {
            return Err(Error::TailBudget {
                what: format!("Calderón integrand at xi = {xi:?} on [{}, {}]", grid.t_min(), grid.t_max()),
                estimate: ends / peak,
                budget: CALDERON_TAIL_BUDGET,
            });
        }
        let re = grid.integrate_values(&vals.iter().map(|v| v.re).collect::<Vec<_>>());
        let im = grid.integrate_values(&vals.iter().map(|v| v.im).collect::<Vec<_>>());
        let v = Complex64::new(re.value, im.value);
        worst = worst.max((v - 1.0).norm());
        qerr = qerr.max(re.error.max(im.error));
        values.push(v.into());
    }
    Ok(CalderonPair {
        xis: xis.to_vec(),
        values,
        max_deviation: worst,
        quadrature_error: qerr,
    })
}

/// `c = int |phi^(t e_1)|^2 dt/t` for a radial kernel.
pub fn calderon_constant(phi: &dyn KernelSymbol, grid: &LogTimeGrid) -> f64 {
    grid.integrate(|t| phi.radial(t).norm_sqr()).value
}

/// `psi = phi / c` with `c = int |phi^(t e_1)|^2 dt/t`, so that
/// `int phi^(t xi) psi^(t xi) dt/t = 1` for real radial `phi^`.
pub fn make_calderon_partner<K: KernelSymbol + Clone>(phi: &K, grid: &LogTimeGrid) -> Result<Scaled<K>> {
    let c = calderon_constant(phi, grid);
    if !(1e-6..=1e6).contains(&c) {
        return Err(Error::Degenerate(format!(
            "Calderón constant {c:.3e} outside [1e-6, 1e6]"
        )));
    }
    Ok(Scaled {
        inner: phi.clone(),
        factor: 1.0 / c,
    })
}

/// `e^{-1/u}` smoothstep from 0 at `u <= 0` to 1 at `u >= 1`.
fn smoothstep(u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let a = libm::exp(-1.0 / u);
    let b = libm::exp(-1.0 / (1.0 - u));
    a / (a + b)
}

/// Smooth bump equal to 1 on `[1, 2]`, vanishing outside `(1/2, 4)`.
pub fn eta(s: f64) -> f64 {
    if s <= 0.5 || s >= 4.0 {
        return 0.0;
    }
    let l = libm::log2(s);
    if l < 0.0 {
        smoothstep(l + 1.0)
    } else if l <= 1.0 {
        1.0
    } else {
        smoothstep(2.0 - l)
    }
}

/// `sum_j eta(2^{-j} s)`, invariant under `s -> 2s`.
pub fn eta_denominator(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let j0 = libm::floor(libm::log2(s)) as i32;
    (j0 - 2..=j0 + 2).map(|j| eta(s * libm::exp2(-(j as f64)))).sum()
}

/// `phi^(s) = eta(s) / sum_j eta(2^{-j} s)`, supported in `(1/2, 4)`.
pub fn bump_profile(s: f64) -> f64 {
    let e = eta(s);
    if e == 0.0 {
        0.0
    } else {
        e / eta_denominator(s)
    }
}

/// The family `phi^_k(xi) = phi^(2^{-k} |xi|)` for `k_min <= k <= k_max` on
/// a one-dimensional domain.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BumpFamily {
    pub domain: Domain,
    pub k_min: i32,
    pub k_max: i32,
}

impl BumpFamily {
    pub fn ks(&self) -> impl Iterator<Item = i32> {
        self.k_min..=self.k_max
    }

    pub fn value(&self, k: i32, xi: f64) -> f64 {
        bump_profile(libm::exp2(-(k as f64)) * xi.abs())
    }

    /// Open support `(2^{k-1}, 2^{k+2})` of `phi^_k` in `|xi|`.
    pub fn support(&self, k: i32) -> (f64, f64) {
        (libm::exp2(k as f64 - 1.0), libm::exp2(k as f64 + 2.0))
    }

    pub fn sum(&self, xi: f64) -> f64 {
        self.ks().map(|k| self.value(k, xi)).sum()
    }

    pub fn sum_of_squares(&self, xi: f64) -> f64 {
        self.ks().map(|k| self.value(k, xi).powi_2()).sum()
    }

    /// `|xi|` band on which every bump touching `xi` belongs to the family.
    pub fn covered_band(&self) -> (f64, f64) {
        (libm::exp2(self.k_min as f64 + 1.0), libm::exp2(self.k_max as f64))
    }

    pub fn covers(&self, xi: f64) -> bool {
        let (lo, hi) = self.covered_band();
        (lo..=hi).contains(&xi.abs())
    }

    /// Symbol of `phi_k` at every slot of the domain.
    pub fn symbol(&self, k: i32) -> Vec<f64> {
        (0..self.domain.len())
            .map(|slot| self.value(k, self.domain.physical_frequency(slot)[0]))
            .collect()
    }
}

pub fn dyadic_bump_partition(domain: &Domain, k_min: i32, k_max: i32) -> Result<BumpFamily> {
    if domain.dim() != 1 {
        return Err(Error::InvalidDomain(format!(
            "bump partition is one-dimensional, got d = {}",
            domain.dim()
        )));
    }
    if k_min > k_max {
        return Err(Error::InvalidParameter(format!("empty range k in [{k_min}, {k_max}]")));
    }
    let top = libm::exp2(k_max as f64 + 2.0);
    if top > domain.nyquist() {
        return Err(Error::NyquistOverflow(format!(
            "bump k = {k_max} reaches |xi| = {top} beyond Nyquist {}",
            domain.nyquist()
        )));
    }
    Ok(BumpFamily {
        domain: *domain,
        k_min,
        k_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{lp_norm, transform};
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn symbols_at_zero_and_semigroup_law() {
        let h = SemigroupKernel::heat(1.0, 2).unwrap();
        assert_eq!(h.symbol(&[0.0, 0.0]), 1.0);
        let (a, b, c) = (
            SemigroupKind::Poisson.symbol(0.3, 1.7),
            SemigroupKind::Poisson.symbol(0.7, 1.7),
            SemigroupKind::Poisson.symbol(1.0, 1.7),
        );
        assert!((a * b - c).abs() < 1e-12);
        assert!(SemigroupKernel::poisson(0.0, 1).is_err());
    }

    #[test]
    fn poisson_constant_matches_low_dimensions() {
        assert!((poisson_constant(1) - 1.0 / PI).abs() < 1e-15);
        assert!((poisson_constant(2) - 1.0 / TAU).abs() < 1e-15);
        assert!((poisson_constant(3) - 1.0 / (PI * PI)).abs() < 1e-15);
    }

    #[test]
    fn closed_form_kernels_have_unit_mass() {
        // independent trapezoid in polar form on [0, R]
        for dim in 1..=3usize {
            for kind in [SemigroupKind::Poisson, SemigroupKind::Heat] {
                let k = SemigroupKernel::new(kind, 0.3, dim).unwrap();
                let sphere = [2.0, TAU, 2.0 * TAU][dim - 1];
                let r_max = 4000.0;
                let n = 4_000_000;
                let h = r_max / n as f64;
                let mut mass = 0.0;
                for i in 0..=n {
                    let r = i as f64 * h;
                    let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                    let mut x = [0.0; 3];
                    x[0] = r;
                    mass += w * h * sphere * libm::pow(r, dim as f64 - 1.0) * k.value(&x[..dim]);
                }
                let truncated = match (kind, dim) {
                    (SemigroupKind::Heat, _) => 0.0,
                    (SemigroupKind::Poisson, 1) => 1.0 - 2.0 / PI * libm::atan(r_max / 0.3),
                    (SemigroupKind::Poisson, _) => ball_tail_poisson(dim, r_max / 0.3),
                };
                assert!((mass + truncated - 1.0).abs() < 1e-5, "{kind:?} d={dim}: {mass}");
            }
        }
    }

    #[test]
    fn sampled_poisson_kernel_integrates_to_one() {
        let d = Domain::line(1, 8.0, 4096).unwrap();
        let k = SemigroupKernel::poisson(0.05, 1).unwrap();
        let f = kernel_field(&k, &d).unwrap();
        assert!((f.integral().re - 1.0).abs() < 1e-6);
    }

    #[test]
    fn kernel_field_matches_lattice_sum() {
        let d = Domain::line(1, 8.0, 4096).unwrap();
        let k = SemigroupKernel::poisson(0.05, 1).unwrap();
        let f = kernel_field(&k, &d).unwrap();
        for j in (0..4096).step_by(97) {
            let x = d.coordinate(j);
            // period-8 sum of the closed form, with an analytic far tail
            let mut want: f64 = (-2000..=2000).map(|m| k.value(&[x + 8.0 * m as f64])).sum();
            want += 2.0 * 0.05 / (PI * 8.0 * 8.0 * 2000.5);
            assert!((f.values()[j].re - want).abs() < 1e-6 * want.max(1.0), "x={x}");
        }
    }

    #[test]
    fn kernel_field_checks_budget() {
        let d = Domain::line(1, 8.0, 64).unwrap();
        let k = SemigroupKernel::poisson(1e-3, 1).unwrap();
        match kernel_field(&k, &d) {
            Err(Error::TailBudget { estimate, .. }) => assert!(estimate > 1e-6),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn kernel_and_symbol_agree() {
        let d = Domain::line(2, 4.0, 64).unwrap();
        let k = SemigroupKernel::heat(0.01, 2).unwrap();
        let s = transform(&kernel_field(&k, &d).unwrap());
        let sym = kernel_symbol(&k, &d);
        for (slot, c) in s.coeffs().iter().enumerate() {
            assert!((s.transform_value(slot) - sym[slot]).norm() < 1e-10, "{c}");
        }
    }

    #[test]
    fn subordination_gap() {
        let g = LogTimeGrid::new(1e-6, 1e3, 400).unwrap();
        let r = subordination_check(1.0, &[0.0, 1.0], &g).unwrap();
        assert!(r.gaps[0] < 1e-6, "{}", r.gaps[0]);
        assert!(r.gaps[1] < 1e-6, "{}", r.gaps[1]);
        let mut last = f64::INFINITY;
        for n in [24, 48, 96] {
            let g = LogTimeGrid::new(1e-6, 1e3, n).unwrap();
            let gap = subordination_check(1.0, &[1.0], &g).unwrap().max_gap;
            assert!(gap < last, "n={n}: {gap} vs {last}");
            last = gap;
        }
        assert!(subordination_check(1.0, &[1.0], &LogTimeGrid::new(1e-4, 1e3, 50).unwrap()).is_err());
    }

    #[test]
    fn g_kernel_regularity_constant_is_stable() {
        let radii: Vec<f64> = (0..41).map(|i| libm::pow(10.0, -1.0 + i as f64 / 20.0)).collect();
        for dim in 1..=3 {
            let g = LogTimeGrid::new(1e-6, 1e4, 1024).unwrap();
            let a = poisson_g_kernel_regularity(dim, &radii, &g);
            let b = poisson_g_kernel_regularity(dim, &radii, &g.refined());
            assert!(a.size_constant.is_finite() && a.size_constant > 0.0);
            assert!((a.size_constant - b.size_constant).abs() < 1e-6 * a.size_constant);
            assert!((a.smoothness_constant - b.smoothness_constant).abs() < 1e-6 * a.smoothness_constant);
        }
    }

    #[test]
    fn g_kernel_is_inverse_of_derivative_symbol() {
        let phi = PoissonDerivative { dim: 1 };
        let d = Domain::line(1, 256.0, 1 << 14).unwrap();
        let f = profile_field(&phi, &d).unwrap();
        for j in [4096usize, 8000, 8192, 9000] {
            let x = d.coordinate(j);
            let periodic: f64 = (-400..=400).map(|m| poisson_g_kernel(1, (x + 256.0 * m as f64).abs(), 1.0)).sum();
            assert!((f.values()[j].re - periodic).abs() < 1e-6, "x={x}");
        }
    }

    fn derivative_profile() -> SampledField {
        let d = Domain::line(1, 64.0, 4096).unwrap();
        profile_field(&Scaled { inner: PoissonDerivative { dim: 1 }, factor: 0.5 }, &d).unwrap()
    }

    #[test]
    fn holder_class_of_derivative_profile() {
        let params = HolderParams::new(0.5, 1.0).unwrap();
        let rep = check_holder_class(&derivative_profile(), params);
        assert!(rep.pass, "{rep:?}");
        assert!(rep.mean < 1e-12);

        // independent margin evaluation on a dense set of x
        let mut decay: f64 = 0.0;
        for i in 0..20000 {
            let x = -32.0 + i as f64 * 64.0 / 20000.0;
            decay = decay.max(0.5 * poisson_g_kernel(1, x.abs(), 1.0).abs() * libm::pow(1.0 + x.abs(), 1.5));
        }
        assert!((decay - rep.decay_margin).abs() < 1e-3, "{decay} vs {}", rep.decay_margin);
    }

    #[test]
    fn heat_kernel_fails_mean_zero() {
        let d = Domain::line(1, 16.0, 1024).unwrap();
        let h = kernel_field(&SemigroupKernel::heat(0.5, 1).unwrap(), &d).unwrap();
        let rep = check_holder_class(&h, HolderParams::new(0.5, 1.0).unwrap());
        assert!(!rep.pass);
        assert!((rep.mean - 1.0).abs() < 1e-6);
        let zero = check_holder_class(&SampledField::zeros(d), HolderParams::new(0.5, 1.0).unwrap());
        assert!(zero.pass && zero.decay_margin == 0.0 && zero.holder_margin == 0.0);
    }

    fn xi_set() -> Vec<Vec<f64>> {
        vec![vec![0.5], vec![1.0], vec![3.0], vec![-2.0]]
    }

    #[test]
    fn calderon_poisson_pair() {
        let grid = LogTimeGrid::new(1e-8, 1e3, 1024).unwrap();
        let phi = PoissonDerivative { dim: 1 };
        // oracle: int s e^{-4 pi s} ds = 1/(16 pi^2), so the phi.phi integral is 1/4
        let oracle = {
            let n = 200_000;
            let h = 20.0 / n as f64;
            (0..=n)
                .map(|i| {
                    let s = i as f64 * h;
                    let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                    w * h * TAU * TAU * s * libm::exp(-2.0 * TAU * s)
                })
                .sum::<f64>()
        };
        assert!((oracle - 0.25).abs() < 1e-7);
        let psi = Scaled { inner: phi, factor: 1.0 / oracle };
        let pair = calderon_product(&phi, &psi, &xi_set(), &grid).unwrap();
        assert!(pair.max_deviation < 1e-6, "{pair:?}");

        let same = calderon_product(&phi, &phi, &xi_set(), &grid).unwrap();
        for v in &same.values {
            assert!((v.re - 0.25).abs() < 1e-6);
        }
        let doubled: Vec<Vec<f64>> = xi_set().iter().map(|x| vec![2.0 * x[0]]).collect();
        let again = calderon_product(&phi, &phi, &doubled, &grid).unwrap();
        for (a, b) in same.values.iter().zip(&again.values) {
            assert!((a.re - b.re).abs() < 1e-8);
        }
    }

    #[test]
    fn calderon_rejects_zero_and_short_grids() {
        let phi = PoissonDerivative { dim: 1 };
        let g = LogTimeGrid::new(1e-8, 1e3, 256).unwrap();
        assert!(calderon_product(&phi, &phi, &[vec![0.0]], &g).is_err());
        let short = LogTimeGrid::new(1e-2, 1e1, 64).unwrap();
        assert!(matches!(
            calderon_product(&phi, &phi, &[vec![1.0]], &short),
            Err(Error::TailBudget { .. })
        ));
    }

    #[test]
    fn partner_of_derivative_profile_is_four_times() {
        let grid = LogTimeGrid::new(1e-8, 1e3, 1024).unwrap();
        let phi = PoissonDerivative { dim: 1 };
        let psi = make_calderon_partner(&phi, &grid).unwrap();
        assert!((psi.factor - 4.0).abs() < 1e-6);
        let pair = calderon_product(&phi, &psi, &xi_set(), &grid).unwrap();
        assert!(pair.max_deviation < 1e-6);

        let scaled = Scaled { inner: phi, factor: 3.0 };
        let psi3 = make_calderon_partner(&scaled, &grid).unwrap();
        assert!((psi3.factor * 3.0 * 3.0 - 4.0).abs() < 1e-5);
        let net = psi3.ft(&[1.0]) / phi.ft(&[1.0]);
        assert!((net.re - 4.0 / 3.0).abs() < 1e-5);

        let zero = Scaled { inner: phi, factor: 0.0 };
        assert!(make_calderon_partner(&zero, &grid).is_err());
    }

    #[test]
    fn sampled_kernel_transform_matches_analytic() {
        let d = Domain::line(1, 128.0, 1 << 13).unwrap();
        let phi = PoissonDerivative { dim: 1 };
        let sk = SampledKernel::new(profile_field(&phi, &d).unwrap()).unwrap();
        for xi in [0.25, 0.5, 1.3] {
            assert!((sk.ft(&[xi]) - phi.ft(&[xi])).norm() < 1e-3);
        }
    }

    #[test]
    fn bump_partition_of_unity() {
        let d = Domain::torus(1, 256).unwrap();
        let fam = dyadic_bump_partition(&d, -2, 5).unwrap();
        assert!((fam.sum(3.0) - 1.0).abs() < 1e-12);
        for m in 1..=32 {
            assert!((fam.sum(m as f64) - 1.0).abs() < 1e-10, "m={m}");
        }
        for k in fam.ks() {
            assert_eq!(fam.value(k, libm::exp2(k as f64 - 2.0)), 0.0);
            let (lo, hi) = fam.support(k);
            for m in 1..128 {
                let xi = m as f64;
                if xi <= lo || xi >= hi {
                    assert_eq!(fam.value(k, xi), 0.0);
                }
            }
        }
        assert!(matches!(dyadic_bump_partition(&d, 0, 6), Err(Error::NyquistOverflow(_))));
        assert!(dyadic_bump_partition(&Domain::torus(2, 16).unwrap(), 0, 1).is_err());
    }

    #[test]
    fn bump_denominator_at_least_one() {
        // direct evaluation over all shifts that can reach [1/2, 4]
        for i in 0..=7000 {
            let s = 0.5 + 3.5 * i as f64 / 7000.0;
            let direct: f64 = (-6..=6).map(|j| eta(s * libm::exp2(-(j as f64)))).sum();
            assert!(direct >= 1.0 - 1e-15, "s={s}");
            assert!((direct - eta_denominator(s)).abs() < 1e-15);
        }
    }

    #[test]
    fn profile_norm_is_dilation_consistent() {
        let d = Domain::line(1, 64.0, 4096).unwrap();
        let f = derivative_profile();
        assert!(lp_norm(&f, 2.0).unwrap() > 0.0);
        assert_eq!(f.domain(), &d);
    }

    proptest! {
        #[test]
        fn semigroup_law(t1 in 1e-3f64..5.0, t2 in 1e-3f64..5.0, xi in 0.0f64..20.0) {
            for kind in [SemigroupKind::Poisson, SemigroupKind::Heat] {
                let lhs = kind.symbol(t1, xi) * kind.symbol(t2, xi);
                prop_assert!((lhs - kind.symbol(t1 + t2, xi)).abs() < 1e-12);
            }
        }

        #[test]
        fn symbol_decreasing(t in 1e-3f64..5.0, a in 0.0f64..10.0, b in 0.0f64..10.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-9);
            for kind in [SemigroupKind::Poisson, SemigroupKind::Heat] {
                let (s_lo, s_hi) = (kind.symbol(t, lo), kind.symbol(t, hi));
                prop_assert!(s_hi <= s_lo && s_hi >= 0.0 && s_lo <= 1.0);
            }
        }

        #[test]
        fn calderon_dilation_invariant(xi in 0.3f64..3.0, lambda in 0.5f64..2.0) {
            let grid = LogTimeGrid::new(1e-9, 1e4, 768).unwrap();
            let phi = PoissonDerivative { dim: 1 };
            let a = calderon_product(&phi, &phi, &[vec![xi]], &grid).unwrap();
            let b = calderon_product(&phi, &phi, &[vec![lambda * xi]], &grid).unwrap();
            prop_assert!((a.values[0].re - b.values[0].re).abs() < 1e-8);
        }
    }
}
