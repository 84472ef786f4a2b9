//! Extremal families behind the lower-bound growth orders: Poisson dilates,
//! lacunary series, the stopped random walk, and Gaussian moments.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::estimate::{fit_points, ratio_curve, ExponentFit, Measurement, RatioCurve, RatioKind, Regime};
use crate::field::{lp_norm, synth, Domain, DomainKind, SampledField};
use crate::kernels::{kernel_field, SemigroupKernel, SemigroupKind};
use crate::quad::LogTimeGrid;
use crate::random::{complex_gaussian, split};
use crate::sqfun::{g_semigroup, g_torus_radial_detailed, Derivative};
use crate::{Error, Result, TAU};

/// `lim_{x -> inf} x G^P(P_s)(x) = 1/(pi sqrt 6)` on the line.
pub const FAR_FIELD_CONSTANT: f64 = 0.129_949_466_872_279_37;

/// `t d/dt P_{t+s}(x)` for the one-dimensional Poisson kernel.
pub fn poisson_dilate_integrand(x: f64, s: f64, t: f64) -> f64 {
    let u = t + s;
    let (x2, u2) = (x * x, u * u);
    t / PI * (x2 - u2) / ((x2 + u2) * (x2 + u2))
}

/// `G^P(P_s)(x)` on the line by quadrature in `log t` around the scale `|x| + s`.
pub fn poisson_dilate_g(x: f64, s: f64) -> f64 {
    let scale = x.abs() + s;
    let (lo, hi, n) = (-30.0, 12.0, 4200);
    let h = (hi - lo) / n as f64;
    let mut acc = 0.0;
    for k in 0..=n {
        let t = scale * libm::exp(lo + k as f64 * h);
        let v = poisson_dilate_integrand(x, s, t);
        let w = if k == 0 || k == n { 0.5 } else { 1.0 };
        acc += w * v * v;
    }
    libm::sqrt(acc * h)
}

/// Discretization of the dilate experiment.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DilateSetup {
    /// One-dimensional line domain.
    pub domain: Domain,
    pub grid: LogTimeGrid,
    /// Half-width of the window in which grid values are trusted.
    pub core_radius: f64,
    /// End of the geometric far-field grid; beyond it `G ~ c/x` is integrated exactly.
    pub far_limit: f64,
    pub far_points: usize,
}

impl DilateSetup {
    /// `N = 2^16`, `L = 64`, 512 nodes on `[1e-4, 1e3]`, core `|x| <= 1/2`.
    pub fn standard() -> Self {
        Self {
            domain: Domain::line(1, 64.0, 1 << 16).expect("valid domain"),
            grid: LogTimeGrid::new(1e-4, 1e3, 512).expect("valid grid"),
            core_radius: 0.5,
            far_limit: 1e6,
            far_points: 2000,
        }
    }
}

/// Ratios `||G^P(P_s)||_p / ||P_s||_p` per `(p, s)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DilateReport {
    pub ss: Vec<f64>,
    /// Both norms over the sampled window only.
    pub windowed: RatioCurve,
    /// Window core plus the line far field.
    pub completed: RatioCurve,
    /// `[p][s]` tables behind the two curves.
    pub windowed_table: Vec<Vec<f64>>,
    pub completed_table: Vec<Vec<f64>>,
}

/// Smallest symbol value at Nyquist for a resolved dilate.
pub const DILATE_TAIL_BUDGET: f64 = 1e-8;

struct DilateMember {
    g: SampledField,
    f: SampledField,
    /// `(weight, x)` of the geometric far-field nodes on `[R, X]`.
    far: Vec<(f64, f64)>,
    far_g: Vec<f64>,
    far_f: Vec<f64>,
    core: Vec<(usize, f64)>,
    s: f64,
}

impl DilateMember {
    fn completed_integrals(&self, p: f64, x_max: f64) -> (f64, f64) {
        let mut ig = 0.0;
        let mut if_ = 0.0;
        for &(i, w) in &self.core {
            ig += w * libm::pow(self.g.values()[i].re, p);
            if_ += w * libm::pow(self.f.values()[i].re.abs(), p);
        }
        let mut tail_g = 0.0;
        let mut tail_f = 0.0;
        for (k, &(w, _)) in self.far.iter().enumerate() {
            tail_g += w * libm::pow(self.far_g[k], p);
            tail_f += w * libm::pow(self.far_f[k], p);
        }
        tail_g += libm::pow(FAR_FIELD_CONSTANT, p) * libm::pow(x_max, 1.0 - p) / (p - 1.0);
        // int_X^inf (s/pi)^p x^{-2p} dx, dropping s^2 against x^2
        tail_f += libm::pow(self.s / PI, p) * libm::pow(x_max, 1.0 - 2.0 * p) / (2.0 * p - 1.0);
        (ig + 2.0 * tail_g, if_ + 2.0 * tail_f)
    }
}

fn dilate_member(s: f64, setup: &DilateSetup) -> Result<DilateMember> {
    let domain = setup.domain;
    let edge = libm::exp(-TAU * s * domain.nyquist());
    if edge > DILATE_TAIL_BUDGET {
        return Err(Error::UnresolvedSpectrum(format!(
            "P_s with s = {s}: symbol {edge:.2e} at Nyquist exceeds {DILATE_TAIL_BUDGET:e}"
        )));
    }
    if 10.0 * s > setup.core_radius {
        return Err(Error::UnresolvedSpectrum(format!(
            "s = {s} is not small against the core radius {}",
            setup.core_radius
        )));
    }
    let f = kernel_field(&SemigroupKernel::poisson(s, 1)?, &domain)?;
    let g = g_semigroup(&f, SemigroupKind::Poisson, Derivative::Time, &setup.grid)?;

    let h = domain.spacing();
    let steps = libm::round(setup.core_radius / h) as i64;
    let radius = steps as f64 * h;
    let core: Vec<(usize, f64)> = (0..domain.samples())
        .filter_map(|i| {
            let k = libm::round(domain.coordinate(i) / h) as i64;
            if k.abs() < steps {
                Some((i, h))
            } else if k.abs() == steps {
                Some((i, h / 2.0))
            } else {
                None
            }
        })
        .collect();

    let m = setup.far_points;
    let (a, b) = (libm::log(radius), libm::log(setup.far_limit));
    let du = (b - a) / (m - 1) as f64;
    let far: Vec<(f64, f64)> = (0..m)
        .map(|k| {
            let x = libm::exp(a + k as f64 * du);
            let w = if k == 0 || k == m - 1 { 0.5 } else { 1.0 };
            (w * du * x, x)
        })
        .collect();
    let far_g = far.iter().map(|&(_, x)| poisson_dilate_g(x, s)).collect();
    let far_f = far.iter().map(|&(_, x)| s / (PI * (x * x + s * s))).collect();
    Ok(DilateMember { g, f, far, far_g, far_f, core, s })
}

/// Lower bounds for `L^P_{c,p}` from the family `f = P_s`, `s in ss`.
pub fn poisson_dilate_bound(ss: &[f64], ps: &[f64], setup: &DilateSetup) -> Result<DilateReport> {
    let domain = setup.domain;
    if domain.kind() != DomainKind::Line || domain.dim() != 1 {
        return Err(Error::DomainMismatch("dilates live on a one-dimensional line domain".into()));
    }
    if let Some(&p) = ps.iter().find(|&&p| !(p > 1.0 && p <= 2.0)) {
        return Err(Error::ExponentOutOfRange { p, lo: 1.0, hi: 2.0 });
    }
    if setup.far_limit <= setup.core_radius || setup.far_points < 2 {
        return Err(Error::InvalidParameter("far-field grid must extend past the core".into()));
    }
    let members: Vec<DilateMember> = ss.iter().map(|&s| dilate_member(s, setup)).collect::<Result<_>>()?;

    let mut windowed_table = vec![vec![0.0; ss.len()]; ps.len()];
    let mut completed_table = vec![vec![0.0; ss.len()]; ps.len()];
    for (i, &p) in ps.iter().enumerate() {
        for (j, m) in members.iter().enumerate() {
            windowed_table[i][j] = lp_norm(&m.g, p)? / lp_norm(&m.f, p)?;
            let (ig, if_) = m.completed_integrals(p, setup.far_limit);
            completed_table[i][j] = libm::pow(ig / if_, 1.0 / p);
        }
    }
    let curve = |name: &str, table: &[Vec<f64>]| {
        ratio_curve("g-poisson", name, ss.len(), ps, RatioKind::Cotype, |j, p| {
            let i = ps.iter().position(|&q| q == p).expect("p from list");
            Ok(Measurement { op_norm: table[i][j], f_norm: 1.0, error: 0.0 })
        })
    };
    Ok(DilateReport {
        ss: ss.to_vec(),
        windowed: curve("poisson-dilates-windowed", &windowed_table)?,
        completed: curve("poisson-dilates-completed", &completed_table)?,
        windowed_table,
        completed_table,
    })
}

/// `f = sum_{k=1}^K a_k e^{2 pi i 2^k x}` on the torus.
pub fn lacunary_field(a: &[Complex64], domain: &Domain) -> Result<SampledField> {
    if domain.kind() != DomainKind::Torus || domain.dim() != 1 {
        return Err(Error::DomainMismatch("lacunary series live on the circle".into()));
    }
    let k = a.len() as u32;
    if k >= 63 || (1u64 << k) as f64 >= domain.nyquist() {
        return Err(Error::NyquistOverflow(format!(
            "frequency 2^{k} reaches Nyquist {}",
            domain.nyquist()
        )));
    }
    let terms: Vec<(Vec<i64>, Complex64)> = a.iter().enumerate().map(|(i, &c)| (vec![1i64 << (i + 1)], c)).collect();
    synth(*domain, &terms)
}

fn l2(a: &[Complex64]) -> f64 {
    libm::sqrt(a.iter().map(|c| c.norm_sqr()).sum())
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LacunaryReport {
    /// `(p, ||G^H f||_p / ||a||_2)`.
    pub ratios: Vec<(f64, f64)>,
    /// `max_p max(ratio, 1/ratio)`.
    pub distortion: f64,
    /// Largest relative fine-vs-coarse gap of the radial quadrature.
    pub quadrature_error: f64,
}

/// Compares `||G^H(f)||_{L_p(T)}` with `||a||_2` for the radial heat g-function.
pub fn lacunary_identity_check(a: &[Complex64], ps: &[f64], domain: &Domain, grid: &LogTimeGrid) -> Result<LacunaryReport> {
    let norm_a = l2(a);
    if norm_a == 0.0 {
        return Err(Error::Degenerate("zero coefficient vector".into()));
    }
    let f = lacunary_field(a, domain)?;
    let g = g_torus_radial_detailed(&f, SemigroupKind::Heat, grid)?;
    let mut ratios = Vec::with_capacity(ps.len());
    let mut distortion = 1.0f64;
    let mut quadrature_error = 0.0f64;
    for &p in ps {
        let (v, err) = g.norm_with_error(p)?;
        let r = v / norm_a;
        distortion = distortion.max(r.max(1.0 / r));
        quadrature_error = quadrature_error.max(err / v);
        ratios.push((p, r));
    }
    Ok(LacunaryReport { ratios, distortion, quadrature_error })
}

/// `p = 4 * 2^{j/2}`, `j = 0..=8`: nine points spanning `[4, 64]`.
pub fn khintchine_p_grid() -> Vec<f64> {
    (0..=8).map(|j| 4.0 * libm::exp2(j as f64 / 2.0)).collect()
}

/// Ratio curve `||sum a_k e^{i 2^k x}||_p / ||a||_2` with its slope in `log p`.
pub fn khintchine_growth(a: &[Complex64], ps: &[f64], domain: &Domain) -> Result<(RatioCurve, ExponentFit)> {
    if a.len() < 10 {
        return Err(Error::InvalidParameter(format!("need K >= 10 terms, got {}", a.len())));
    }
    if let Some(&p) = ps.iter().find(|&&p| !(4.0..=64.0).contains(&p)) {
        return Err(Error::ExponentOutOfRange { p, lo: 4.0, hi: 64.0 });
    }
    let norm_a = l2(a);
    if norm_a == 0.0 {
        return Err(Error::Degenerate("zero coefficient vector".into()));
    }
    let f = lacunary_field(a, domain)?;
    let curve = ratio_curve("identity", "lacunary", 1, ps, RatioKind::Cotype, |_, p| {
        Ok(Measurement { op_norm: lp_norm(&f, p)?, f_norm: norm_a, error: 0.0 })
    })?;
    let fit = fit_points(&curve.ps(), &curve.values(), Regime::PToInfinity, (4.0, 64.0))?;
    Ok((curve, fit))
}

/// Exact `num / 2^exp`, kept reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DyadicRational {
    pub num: u128,
    pub exp: u32,
}

impl DyadicRational {
    pub fn new(num: u128, exp: u32) -> Self {
        let (mut num, mut exp) = (num, exp);
        if num == 0 {
            return Self { num: 0, exp: 0 };
        }
        while exp > 0 && num % 2 == 0 {
            num /= 2;
            exp -= 1;
        }
        Self { num, exp }
    }

    /// `2^{-e}`.
    pub fn pow2_inv(e: u32) -> Self {
        Self { num: 1, exp: e }
    }

    pub fn value(self) -> f64 {
        self.num as f64 * libm::exp2(-(self.exp as f64))
    }

    pub fn add(self, other: Self) -> Self {
        let e = self.exp.max(other.exp);
        Self::new((self.num << (e - self.exp)) + (other.num << (e - other.exp)), e)
    }
}

/// Exact laws of the simple random walk stopped at `+-2`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MartingaleResult {
    pub horizon: usize,
    /// `P(tau = j)`, `j = 0..=K`.
    pub tau: Vec<DyadicRational>,
    /// `P(A_j)` with `A_j = {tau = j, |cos theta_k| >= 1/sqrt 2 for k <= j}`.
    pub a: Vec<DyadicRational>,
    /// `P(tau > K)`.
    pub survival: DyadicRational,
    /// `(p, F(p))`, `F(p) = (sum_{even j <= K} (j/2)^{p/2} P(A_j))^{1/p}`.
    pub functional: Vec<(f64, f64)>,
}

pub const MAX_HORIZON: usize = 40;

/// Dynamic programming over walk states `{-1, 0, 1}` with absorption at `+-2`.
///
/// Each step of `theta_k` falls in one of three cells: `cos >= 1/sqrt 2`
/// (measure 1/4, `eps = +1`), `cos <= -1/sqrt 2` (1/4, `eps = -1`), or
/// `|cos| < 1/sqrt 2` (1/2, either sign). `tau` counts sign paths over
/// `2^j`; `A_j` keeps only the two outer cells, so it counts the same paths
/// over `4^j`.
pub fn martingale_enumerate(k: usize, ps: &[f64]) -> Result<MartingaleResult> {
    if k % 2 == 1 || k == 0 || k > MAX_HORIZON {
        return Err(Error::InvalidParameter(format!(
            "horizon K = {k} must be even and in [2, {MAX_HORIZON}]"
        )));
    }
    // counts[s + 1] = number of unabsorbed sign paths at position s
    let mut counts = [0u128, 1, 0];
    let mut tau = vec![DyadicRational::new(0, 0); k + 1];
    let mut a = vec![DyadicRational::new(0, 0); k + 1];
    for j in 1..=k {
        let mut next = [0u128; 3];
        let mut absorbed = 0u128;
        for (idx, &c) in counts.iter().enumerate() {
            let pos = idx as i32 - 1;
            for step in [-1, 1] {
                let q = pos + step;
                if q.abs() == 2 {
                    absorbed += c;
                } else {
                    next[(q + 1) as usize] += c;
                }
            }
        }
        counts = next;
        tau[j] = DyadicRational::new(absorbed, j as u32);
        a[j] = DyadicRational::new(absorbed, 2 * j as u32);
    }
    let survival = DyadicRational::new(counts.iter().sum(), k as u32);
    let functional = ps
        .iter()
        .map(|&p| {
            let sum: f64 = (1..=k / 2)
                .map(|m| libm::pow(m as f64, p / 2.0) * a[2 * m].value())
                .sum();
            (p, libm::pow(sum, 1.0 / p))
        })
        .collect();
    Ok(MartingaleResult { horizon: k, tau, a, survival, functional })
}

/// Slope of `log F(p)` against `log p` on `[4, 64]`.
pub fn martingale_growth(result: &MartingaleResult) -> Result<ExponentFit> {
    let (ps, vs): (Vec<f64>, Vec<f64>) = result.functional.iter().copied().unzip();
    fit_points(&ps, &vs, Regime::PToInfinity, (4.0, 64.0))
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MonteCarlo {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
}

pub const MIN_SAMPLES: usize = 100_000;

/// `E|g|^{2p} / (E|g|^p)^2 = Gamma(p + 1) / Gamma(p/2 + 1)^2`.
fn relative_variance(p: f64) -> f64 {
    let g = libm::tgamma(p / 2.0 + 1.0);
    libm::tgamma(p + 1.0) / (g * g) - 1.0
}

fn check_moment_request(p: f64, samples: usize) -> Result<()> {
    if !(1.0..=16.0).contains(&p) {
        return Err(Error::ExponentOutOfRange { p, lo: 1.0, hi: 16.0 });
    }
    // relative standard error of the p-th moment at most 10%
    let need = libm::ceil(100.0 * relative_variance(p)) as usize;
    let need = need.max(MIN_SAMPLES);
    if samples < need {
        return Err(Error::InvalidParameter(format!(
            "{samples} samples cannot resolve E|g|^{p}; need at least {need}"
        )));
    }
    Ok(())
}

fn mean_and_error(values: impl Iterator<Item = f64>) -> (f64, f64, usize) {
    let (mut n, mut mean, mut m2) = (0usize, 0.0, 0.0);
    for v in values {
        n += 1;
        let d = v - mean;
        mean += d / n as f64;
        m2 += d * (v - mean);
    }
    let var = m2 / (n as f64 - 1.0);
    (mean, libm::sqrt(var / n as f64), n)
}

/// `gamma_p^p = E|g|^p` for a standard complex Gaussian (`E|g|^2 = 1`).
pub fn gaussian_moment(p: f64, samples: usize, seed: u64) -> Result<MonteCarlo> {
    check_moment_request(p, samples)?;
    let mut rng = split(seed, 0);
    let (estimate, std_error, samples) =
        mean_and_error((0..samples).map(|_| libm::pow(complex_gaussian(&mut rng).norm(), p)));
    Ok(MonteCarlo { estimate, std_error, samples })
}

/// `Gamma(p/2 + 1)`, the exact value of `E|g|^p`.
pub fn gaussian_moment_exact(p: f64) -> f64 {
    libm::tgamma(p / 2.0 + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MzReport {
    pub p: f64,
    /// `E|sum alpha_k g_k|^p`.
    pub lhs: f64,
    /// `gamma_p^p ||alpha||_2^p` with `gamma_p^p` from the first coordinate.
    pub rhs: f64,
    /// `|lhs - rhs| / rhs`.
    pub error: f64,
    /// Standard error of `error`.
    pub std_error: f64,
}

/// `E|sum alpha_k g_k|^p = gamma_p^p ||alpha||_2^p`, both sides from one stream.
pub fn mz_tensor_check(alpha: &[Complex64], p: f64, samples: usize, seed: u64) -> Result<MzReport> {
    check_moment_request(p, samples)?;
    let norm = l2(alpha);
    if norm == 0.0 {
        return Err(Error::Degenerate("zero coefficient vector".into()));
    }
    let scale = libm::pow(norm, p);
    let mut rng = split(seed, 1);
    let mut lhs = Vec::with_capacity(samples);
    let mut gam = Vec::with_capacity(samples);
    let mut g = vec![Complex64::new(0.0, 0.0); alpha.len()];
    for _ in 0..samples {
        g.iter_mut().for_each(|v| *v = complex_gaussian(&mut rng));
        let s: Complex64 = alpha.iter().zip(&g).map(|(a, b)| a * b).sum();
        lhs.push(libm::pow(s.norm(), p));
        gam.push(libm::pow(g[0].norm(), p));
    }
    let (l, _, _) = mean_and_error(lhs.iter().copied());
    let (gm, _, _) = mean_and_error(gam.iter().copied());
    let (d, d_err, _) = mean_and_error(lhs.iter().zip(&gam).map(|(a, b)| a / scale - b));
    Ok(MzReport {
        p,
        lhs: l,
        rhs: gm * scale,
        error: libm::fabs(d) / gm,
        std_error: d_err / gm,
    })
}
