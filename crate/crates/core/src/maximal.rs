//! Sharp maximal function, `BMO_q` norms and the Carleson-box maximal
//! function over a family of dyadic cubes.
//!
//! Level `j` splits every axis of the sample cube into `2^j` intervals of
//! side `2^{-j} L`. Means over a cube are sample averages, so the sup over
//! the family is an exact finite maximum.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::field::{lp_norm_of_moduli, Domain, SampledField, SpectralPlan, ACTIVE_TOL};
use crate::kernels::KernelSymbol;
use crate::quad::LogTimeGrid;
use crate::random::{random_trig_poly, PolySpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CubeFamily {
    domain: Domain,
    j_min: u32,
    j_max: u32,
}

impl CubeFamily {
    /// Levels `j_min..=j_max`; each cube side must hold at least 2 samples.
    pub fn new(domain: Domain, j_min: u32, j_max: u32) -> Result<Self> {
        let n = domain.samples();
        if !n.is_power_of_two() {
            return Err(Error::InvalidDomain(format!("dyadic cubes need a power-of-two grid, got {n}")));
        }
        let finest = n.trailing_zeros().saturating_sub(1);
        if j_min > j_max || j_max > finest {
            return Err(Error::InvalidParameter(format!(
                "cube levels [{j_min}, {j_max}] outside [0, {finest}] for N = {n}"
            )));
        }
        Ok(Self { domain, j_min, j_max })
    }

    /// All levels the grid resolves.
    pub fn all(domain: Domain) -> Result<Self> {
        Self::new(domain, 0, domain.samples().trailing_zeros().saturating_sub(1))
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn levels(&self) -> core::ops::RangeInclusive<u32> {
        self.j_min..=self.j_max
    }

    pub fn side(&self, j: u32) -> f64 {
        self.domain.period() / (1u64 << j) as f64
    }

    pub fn smallest_side(&self) -> f64 {
        self.side(self.j_max)
    }

    pub fn largest_side(&self) -> f64 {
        self.side(self.j_min)
    }

    pub fn cubes_at(&self, j: u32) -> usize {
        (1usize << j).pow(self.domain.dim() as u32)
    }

    /// Flat index of the level-`j` cube containing grid point `flat`.
    pub fn cube_of(&self, j: u32, flat: usize) -> usize {
        let per = self.domain.samples() >> j;
        let axes = self.domain.axes(flat);
        let cells = 1usize << j;
        let mut idx = 0;
        for a in (0..self.domain.dim()).rev() {
            idx = idx * cells + axes[a] / per;
        }
        idx
    }

    pub fn len(&self) -> usize {
        self.levels().map(|j| self.cubes_at(j)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Per-cube averages of `values` at level `j`, indexed by [`CubeFamily::cube_of`].
fn cube_means(cubes: &CubeFamily, j: u32, values: &[f64]) -> Vec<f64> {
    let mut sums = vec![0.0; cubes.cubes_at(j)];
    for (i, v) in values.iter().enumerate() {
        sums[cubes.cube_of(j, i)] += v;
    }
    let per = (cubes.domain.samples() >> j).pow(cubes.domain.dim() as u32) as f64;
    sums.iter_mut().for_each(|s| *s /= per);
    sums
}

/// `f^#(x) = sup_{Q containing x} (|Q|^{-1} int_Q |f - <f>_Q|^2)^{1/2}`.
pub fn sharp_maximal(f: &SampledField, cubes: &CubeFamily) -> Result<SampledField> {
    let domain = *f.domain();
    domain.check_same(cubes.domain(), "sharp maximal function")?;
    let n = domain.len();
    let mut best = vec![0.0f64; n];
    for j in cubes.levels() {
        let count = cubes.cubes_at(j);
        let owner: Vec<usize> = (0..n).map(|i| cubes.cube_of(j, i)).collect();
        let mut mean = vec![Complex64::new(0.0, 0.0); count];
        for (i, v) in f.values().iter().enumerate() {
            mean[owner[i]] += v;
        }
        let per = (n / count) as f64;
        mean.iter_mut().for_each(|m| *m /= per);
        let mut osc = vec![0.0; count];
        for (i, v) in f.values().iter().enumerate() {
            osc[owner[i]] += (v - mean[owner[i]]).norm_sqr();
        }
        for i in 0..n {
            best[i] = best[i].max(osc[owner[i]] / per);
        }
    }
    Ok(SampledField::from_real_unchecked(domain, best.into_iter().map(libm::sqrt).collect()))
}

/// `||f^#||_q` for `q in (2, 256]`.
pub fn bmo_q_norm(f: &SampledField, q: f64, cubes: &CubeFamily) -> Result<f64> {
    if !(q > 2.0 && q <= crate::field::P_MAX) {
        return Err(Error::ExponentOutOfRange { p: q, lo: 2.0, hi: crate::field::P_MAX });
    }
    let sharp = sharp_maximal(f, cubes)?;
    let moduli: Vec<f64> = sharp.values().iter().map(|v| v.re).collect();
    lp_norm_of_moduli(sharp.domain(), &moduli, q)
}

/// Weights of the log-`t` trapezoid rule over `[t_min, upper]`; the last
/// partial interval uses the linear interpolant.
pub fn truncated_weights(grid: &LogTimeGrid, upper: f64) -> Vec<f64> {
    let nodes = grid.nodes();
    let mut w = vec![0.0; nodes.len()];
    if upper <= nodes[0] {
        return w;
    }
    let u: Vec<f64> = nodes.iter().map(|&t| libm::log(t)).collect();
    let top = libm::log(upper.min(grid.t_max()));
    for k in 0..nodes.len() - 1 {
        let (a, b) = (u[k], u[k + 1]);
        if top <= a {
            break;
        }
        let h = b - a;
        let s = (top.min(b) - a) / h;
        // int_0^s ((1 - x) e_k + x e_{k+1}) h dx
        w[k] += h * (s - s * s / 2.0);
        w[k + 1] += h * s * s / 2.0;
    }
    w
}

/// `C^phi(f)(x) = sup_{Q containing x} (|Q|^{-1} int_{T(Q)} |phi_t * f|^2 dy dt/t)^{1/2}`
/// with `T(Q) = Q x (0, side(Q)]`, `phi_t^(xi) = phi^(t xi)`.
pub fn carleson_maximal(
    f: &SampledField,
    phi: &dyn KernelSymbol,
    cubes: &CubeFamily,
    grid: &LogTimeGrid,
) -> Result<SampledField> {
    let domain = *f.domain();
    domain.check_same(cubes.domain(), "Carleson maximal function")?;
    if phi.dim() != domain.dim() {
        return Err(Error::DomainMismatch(format!("{}-d kernel on a {}-d field", phi.dim(), domain.dim())));
    }
    if grid.t_min() >= cubes.smallest_side() {
        return Err(Error::UnresolvedSpectrum(format!(
            "t_min = {} is not below the smallest cube side {}",
            grid.t_min(),
            cubes.smallest_side()
        )));
    }
    if grid.t_max() < cubes.largest_side() {
        return Err(Error::UnresolvedSpectrum(format!(
            "t_max = {} is below the largest cube side {}",
            grid.t_max(),
            cubes.largest_side()
        )));
    }
    let levels: Vec<u32> = cubes.levels().collect();
    let weights: Vec<Vec<f64>> = levels.iter().map(|&j| truncated_weights(grid, cubes.side(j))).collect();

    let plan = SpectralPlan::new(domain);
    let spec = plan.forward(f)?;
    let active = spec.active_slots(ACTIVE_TOL);
    let d = domain.dim();
    let n = domain.len();
    let mut energy = vec![vec![0.0; n]; levels.len()];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let mut out = Vec::with_capacity(n);
    for (i, &t) in grid.nodes().iter().enumerate() {
        if weights.iter().all(|w| w[i] == 0.0) {
            continue;
        }
        buf.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for &k in &active {
            let xi = domain.physical_frequency(k);
            let txi = [t * xi[0], t * xi[1], t * xi[2]];
            buf[k] = spec.coeffs()[k] * phi.ft(&txi[..d]);
        }
        plan.inverse_values(&buf, &mut out);
        for (l, w) in weights.iter().enumerate() {
            if w[i] != 0.0 {
                for (acc, v) in energy[l].iter_mut().zip(&out) {
                    *acc += w[i] * v.norm_sqr();
                }
            }
        }
    }
    let mut best = vec![0.0f64; n];
    for (l, &j) in levels.iter().enumerate() {
        let means = cube_means(cubes, j, &energy[l]);
        for (i, b) in best.iter_mut().enumerate() {
            *b = b.max(means[cubes.cube_of(j, i)]);
        }
    }
    Ok(SampledField::from_real_unchecked(domain, best.into_iter().map(|v| libm::sqrt(v.max(0.0))).collect()))
}

/// Floor applied to `f^#` in pointwise ratios.
pub const SHARP_FLOOR: f64 = 1e-8;

/// `max_x C^phi(f)(x) / max(f^#(x), 1e-8)`.
pub fn carleson_bmo_ratio(
    f: &SampledField,
    phi: &dyn KernelSymbol,
    cubes: &CubeFamily,
    grid: &LogTimeGrid,
) -> Result<f64> {
    let c = carleson_maximal(f, phi, cubes, grid)?;
    let s = sharp_maximal(f, cubes)?;
    Ok(c.values()
        .iter()
        .zip(s.values())
        .map(|(a, b)| a.re / b.re.max(SHARP_FLOOR))
        .fold(0.0, f64::max))
}

/// Member `index` of the seeded band-limited corpus: a real mean-zero
/// trigonometric polynomial with `|m_a| <= band`.
pub fn carleson_corpus_member(domain: Domain, band: i64, seed: u64, index: u64) -> Result<SampledField> {
    let spec = PolySpec { band, mean_zero: true, real: true };
    random_trig_poly(domain, spec, seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ index)
}
