//! Vector-valued Fourier multipliers `T_phi` (line) and `M_phi` (torus) and
//! the de Leeuw transference experiments.
//!
//! A symbol maps a frequency to a vector in `Y`, a finite weighted `l2`
//! space: either a [`LogTimeGrid`] standing in for `L2(R_+, dt/t)` or
//! `l2` over a finite index set. Inputs are scalar.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::dyadic::{dyadic_index, DyadicRectangle, Sign};
use crate::estimate::{ratio_curve, Measurement, RatioCurve, RatioKind};
use crate::field::{lp_norm, lp_norm_of_moduli, periodize, synth, Domain, DomainKind, SampledField, SpectralPlan, ACTIVE_TOL};
use crate::quad::LogTimeGrid;
use crate::{Error, Result, TAU};

/// `xi -> phi(xi) in Y`, evaluated one component at a time.
pub trait VectorSymbol: Send + Sync + core::fmt::Debug {
    fn dim(&self) -> usize;
    fn components(&self) -> usize;
    /// Weight of component `c` in the norm of `Y`.
    fn weight(&self, c: usize) -> f64;
    fn component(&self, xi: &[f64], c: usize) -> Result<Complex64>;
    /// Declared bound `M` on `sup_xi ||phi(xi)||_Y`.
    fn bound(&self) -> f64;

    /// Whether `component(xi, c)` can be nonzero; lets callers skip work.
    fn support_hint(&self, _xi: &[f64], _c: usize) -> bool {
        true
    }

    fn norm_at(&self, xi: &[f64]) -> Result<f64> {
        let mut s = 0.0;
        for c in 0..self.components() {
            if self.support_hint(xi, c) {
                s += self.weight(c) * self.component(xi, c)?.norm_sqr();
            }
        }
        Ok(libm::sqrt(s))
    }
}

impl<S: VectorSymbol + ?Sized> VectorSymbol for &S {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn components(&self) -> usize {
        (**self).components()
    }
    fn weight(&self, c: usize) -> f64 {
        (**self).weight(c)
    }
    fn component(&self, xi: &[f64], c: usize) -> Result<Complex64> {
        (**self).component(xi, c)
    }
    fn bound(&self) -> f64 {
        (**self).bound()
    }
    fn support_hint(&self, xi: &[f64], c: usize) -> bool {
        (**self).support_hint(xi, c)
    }
}

impl<S: VectorSymbol + ?Sized> VectorSymbol for Box<S> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn components(&self) -> usize {
        (**self).components()
    }
    fn weight(&self, c: usize) -> f64 {
        (**self).weight(c)
    }
    fn component(&self, xi: &[f64], c: usize) -> Result<Complex64> {
        (**self).component(xi, c)
    }
    fn bound(&self) -> f64 {
        (**self).bound()
    }
    fn support_hint(&self, xi: &[f64], c: usize) -> bool {
        (**self).support_hint(xi, c)
    }
}

/// `phi(xi)(t) = -2 pi t |xi| e^{-2 pi t |xi|}` on the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonGSymbol {
    pub dim: usize,
    pub grid: LogTimeGrid,
}

impl VectorSymbol for PoissonGSymbol {
    fn dim(&self) -> usize {
        self.dim
    }
    fn components(&self) -> usize {
        self.grid.len()
    }
    fn weight(&self, c: usize) -> f64 {
        self.grid.weights()[c]
    }
    fn component(&self, xi: &[f64], c: usize) -> Result<Complex64> {
        let r = libm::sqrt(xi.iter().map(|v| v * v).sum());
        let s = TAU * self.grid.nodes()[c] * r;
        Ok(Complex64::new(-s * libm::exp(-s), 0.0))
    }
    fn bound(&self) -> f64 {
        0.5
    }
}

/// Indicator vector `(1_R(xi))_R` over the rectangles with every exponent in
/// `[k_min, k_max]`. Frequencies with a zero coordinate map to 0; other
/// frequencies outside the range are undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicSymbol {
    pub dim: usize,
    pub k_min: i32,
    pub k_max: i32,
}

impl DyadicSymbol {
    fn per_axis(&self) -> usize {
        2 * (self.k_max - self.k_min + 1) as usize
    }

    /// Component index of the rectangle containing `xi`.
    pub fn index_of(&self, xi: &[f64]) -> Result<Option<usize>> {
        let Some(rect) = DyadicRectangle::containing(xi) else {
            return Ok(None);
        };
        let mut idx = 0;
        for &(sign, k) in rect.axes.iter().rev() {
            if !(self.k_min..=self.k_max).contains(&k) {
                return Err(Error::SymbolUndefined(xi.to_vec()));
            }
            let s = match sign {
                Sign::Minus => 0,
                Sign::Plus => 1,
            };
            idx = idx * self.per_axis() + 2 * (k - self.k_min) as usize + s;
        }
        Ok(Some(idx))
    }
}

impl VectorSymbol for DyadicSymbol {
    fn dim(&self) -> usize {
        self.dim
    }
    fn components(&self) -> usize {
        self.per_axis().pow(self.dim as u32)
    }
    fn weight(&self, _c: usize) -> f64 {
        1.0
    }
    fn component(&self, xi: &[f64], c: usize) -> Result<Complex64> {
        Ok(Complex64::new(if self.index_of(xi)? == Some(c) { 1.0 } else { 0.0 }, 0.0))
    }
    fn bound(&self) -> f64 {
        1.0
    }
    fn support_hint(&self, xi: &[f64], c: usize) -> bool {
        // undefined frequencies must still reach `component` to report
        !matches!(self.index_of(xi), Ok(Some(i)) if i != c) && !matches!(self.index_of(xi), Ok(None))
    }
}

/// The scalar identity multiplier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSymbol {
    pub dim: usize,
}

impl VectorSymbol for UnitSymbol {
    fn dim(&self) -> usize {
        self.dim
    }
    fn components(&self) -> usize {
        1
    }
    fn weight(&self, _c: usize) -> f64 {
        1.0
    }
    fn component(&self, _xi: &[f64], _c: usize) -> Result<Complex64> {
        Ok(Complex64::new(1.0, 0.0))
    }
    fn bound(&self) -> f64 {
        1.0
    }
}

/// `psi(xi_1..xi_k) = phi(xi_1..xi_k, 0..0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Restricted<S> {
    pub inner: S,
    pub k: usize,
}

/// Restriction of a symbol on `R^d` to `R^k`, `1 <= k < d`.
pub fn restrict_symbol<S: VectorSymbol>(symbol: S, k: usize) -> Result<Restricted<S>> {
    if k == 0 || k >= symbol.dim() {
        return Err(Error::InvalidParameter(format!(
            "cannot restrict a {}-d symbol to dimension {k}",
            symbol.dim()
        )));
    }
    Ok(Restricted { inner: symbol, k })
}

impl<S: VectorSymbol> Restricted<S> {
    fn embed(&self, xi: &[f64]) -> [f64; 3] {
        let mut out = [0.0; 3];
        out[..self.k].copy_from_slice(&xi[..self.k]);
        out
    }
}

impl<S: VectorSymbol> VectorSymbol for Restricted<S> {
    fn dim(&self) -> usize {
        self.k
    }
    fn components(&self) -> usize {
        self.inner.components()
    }
    fn weight(&self, c: usize) -> f64 {
        self.inner.weight(c)
    }
    fn component(&self, xi: &[f64], c: usize) -> Result<Complex64> {
        let e = self.embed(xi);
        self.inner.component(&e[..self.inner.dim()], c)
    }
    fn bound(&self) -> f64 {
        self.inner.bound()
    }
    fn support_hint(&self, xi: &[f64], c: usize) -> bool {
        let e = self.embed(xi);
        self.inner.support_hint(&e[..self.inner.dim()], c)
    }
}

/// `phi^(t)(xi) = phi(t xi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dilated<S> {
    pub inner: S,
    pub t: f64,
}

impl<S: VectorSymbol> Dilated<S> {
    fn scaled(&self, xi: &[f64]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (o, v) in out.iter_mut().zip(xi) {
            *o = self.t * v;
        }
        out
    }
}

impl<S: VectorSymbol> VectorSymbol for Dilated<S> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn components(&self) -> usize {
        self.inner.components()
    }
    fn weight(&self, c: usize) -> f64 {
        self.inner.weight(c)
    }
    fn component(&self, xi: &[f64], c: usize) -> Result<Complex64> {
        let s = self.scaled(xi);
        self.inner.component(&s[..xi.len()], c)
    }
    fn bound(&self) -> f64 {
        self.inner.bound()
    }
    fn support_hint(&self, xi: &[f64], c: usize) -> bool {
        let s = self.scaled(xi);
        self.inner.support_hint(&s[..xi.len()], c)
    }
}

/// A `Y`-valued field: one sampled component per coordinate of `Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub domain: Domain,
    pub weights: Vec<f64>,
    pub components: Vec<Vec<Complex64>>,
}

impl VectorField {
    /// `x -> ||F(x)||_Y`.
    pub fn pointwise_norm(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.domain.len()];
        for (w, comp) in self.weights.iter().zip(&self.components) {
            for (a, v) in acc.iter_mut().zip(comp) {
                *a += w * v.norm_sqr();
            }
        }
        acc.into_iter().map(libm::sqrt).collect()
    }

    /// `||F||_{L_p(Y)}`.
    pub fn norm(&self, p: f64) -> Result<f64> {
        lp_norm_of_moduli(&self.domain, &self.pointwise_norm(), p)
    }
}

/// Runs the multiplier one component at a time; `sink(c, values)` receives
/// each component field. Components that vanish on the spectrum are skipped.
fn stream_multiplier(
    f: &SampledField,
    symbol: &dyn VectorSymbol,
    mut sink: impl FnMut(usize, &[Complex64]),
) -> Result<()> {
    let domain = *f.domain();
    if symbol.dim() != domain.dim() {
        return Err(Error::DomainMismatch(format!(
            "{}-d symbol on a {}-d field",
            symbol.dim(),
            domain.dim()
        )));
    }
    let plan = SpectralPlan::new(domain);
    let spec = plan.forward(f)?;
    let active = spec.active_slots(ACTIVE_TOL);
    let d = domain.dim();
    let xis: Vec<[f64; 3]> = active.iter().map(|&k| domain.physical_frequency(k)).collect();
    let n = domain.len();
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let mut out = Vec::with_capacity(n);
    for c in 0..symbol.components() {
        buf.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        let mut live = false;
        for (&k, xi) in active.iter().zip(&xis) {
            if !symbol.support_hint(&xi[..d], c) {
                continue;
            }
            let v = symbol.component(&xi[..d], c)?;
            if v != Complex64::new(0.0, 0.0) {
                buf[k] = spec.coeffs()[k] * v;
                live = true;
            }
        }
        if live {
            plan.inverse_values(&buf, &mut out);
            sink(c, &out);
        }
    }
    Ok(())
}

/// `T_phi f` on a line domain or `M_phi f` on the torus:
/// `(phi(xi) f^(xi))^` per active frequency.
pub fn apply_multiplier(f: &SampledField, symbol: &dyn VectorSymbol) -> Result<VectorField> {
    let n = f.domain().len();
    let mut components = vec![Vec::new(); symbol.components()];
    stream_multiplier(f, symbol, |c, vals| components[c] = vals.to_vec())?;
    for comp in components.iter_mut().filter(|c| c.is_empty()) {
        *comp = vec![Complex64::new(0.0, 0.0); n];
    }
    Ok(VectorField {
        domain: *f.domain(),
        weights: (0..symbol.components()).map(|c| symbol.weight(c)).collect(),
        components,
    })
}

/// `x -> ||(T_phi f)(x)||_Y` without storing the components.
pub fn multiplier_norm_field(f: &SampledField, symbol: &dyn VectorSymbol) -> Result<SampledField> {
    let domain = *f.domain();
    let mut acc = vec![0.0; domain.len()];
    stream_multiplier(f, symbol, |c, vals| {
        let w = symbol.weight(c);
        for (a, v) in acc.iter_mut().zip(vals) {
            *a += w * v.norm_sqr();
        }
    })?;
    Ok(SampledField::from_real_unchecked(domain, acc.into_iter().map(libm::sqrt).collect()))
}

/// `||T_phi f||_{L_p(Y)}`.
pub fn multiplier_norm(f: &SampledField, symbol: &dyn VectorSymbol, p: f64) -> Result<f64> {
    lp_norm(&multiplier_norm_field(f, symbol)?, p)
}

/// A trigonometric polynomial as `(frequency, coefficient)` terms.
pub type TrigPoly = [(Vec<i64>, Complex64)];

/// Largest value of the Gaussian window allowed at the domain boundary.
pub const WINDOW_TAIL_BUDGET: f64 = 1e-8;

/// `P(x) e^{-4 pi^2 t |x|^2}` sampled on a line domain.
pub fn gaussian_window(poly: &TrigPoly, t: f64, domain: &Domain) -> Result<SampledField> {
    if domain.kind() != DomainKind::Line {
        return Err(Error::DomainMismatch("the Gaussian window lives on a line domain".into()));
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidParameter(format!("window parameter t = {t} must be positive")));
    }
    let half = domain.period() / 2.0;
    let edge = libm::exp(-4.0 * PI * PI * t * half * half);
    if edge > WINDOW_TAIL_BUDGET {
        return Err(Error::TailBudget {
            what: "Gaussian window".into(),
            estimate: edge,
            budget: WINDOW_TAIL_BUDGET,
        });
    }
    let d = domain.dim();
    for (m, _) in poly {
        if m.len() != d {
            return Err(Error::DomainMismatch(format!("{}-d frequency on a {d}-d domain", m.len())));
        }
        if m.iter().any(|&v| v.unsigned_abs() as f64 >= domain.nyquist()) {
            return Err(Error::FrequencyOutOfBand {
                freq: m.clone(),
                lo: -(libm::ceil(domain.nyquist()) as i64),
                hi: libm::ceil(domain.nyquist()) as i64,
            });
        }
    }
    SampledField::from_fn(*domain, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let w = libm::exp(-4.0 * PI * PI * t * r2);
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, a) in poly {
            let phase: f64 = m.iter().zip(x).map(|(&k, &y)| k as f64 * y).sum();
            acc += a * Complex64::from_polar(1.0, TAU * phase);
        }
        acc * w
    })
}

/// `(4 pi p t)^{d/(2p)} ||T_phi(P H_t^)||_{L_p(R^d; Y)}`, which tends to
/// `||M_phi P||_{L_p(T^d; Y)}` as `t -> 0`.
pub fn gaussian_window_norm(poly: &TrigPoly, symbol: &dyn VectorSymbol, p: f64, t: f64, domain: &Domain) -> Result<f64> {
    let f = gaussian_window(poly, t, domain)?;
    let norm = multiplier_norm(&f, symbol, p)?;
    let d = domain.dim() as f64;
    Ok(libm::pow(4.0 * PI * p * t, d / (2.0 * p)) * norm)
}

/// `||M_phi P||_{L_p(T^d; Y)}` on a torus grid.
pub fn periodic_norm(poly: &TrigPoly, symbol: &dyn VectorSymbol, p: f64, torus: &Domain) -> Result<f64> {
    multiplier_norm(&synth(*torus, poly)?, symbol, p)
}

/// Largest `|x_a|` at which `f` is nonzero.
pub fn support_radius(f: &SampledField) -> f64 {
    let d = f.domain().dim();
    f.values()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm() > 0.0)
        .map(|(i, _)| f.domain().position(i)[..d].iter().fold(0.0f64, |m, c| m.max(c.abs())))
        .fold(0.0, f64::max)
}

/// `t^{d/p'} ||M_{phi^(t)}(f~_t)||_{L_p(T^d; Y)}`, which tends to
/// `||T_phi f||_{L_p(R^d; Y)}` as `t -> 0`.
pub fn periodization_norm(
    f: &SampledField,
    symbol: &dyn VectorSymbol,
    p: f64,
    t: f64,
    torus_samples: usize,
) -> Result<f64> {
    let radius = support_radius(f);
    if t * radius >= 0.5 {
        return Err(Error::SupportOverflow(format!(
            "dilated support radius {} does not fit in [-1/2, 1/2)",
            t * radius
        )));
    }
    let per = periodize(f, t, torus_samples)?;
    let dilated = Dilated { inner: symbol, t };
    let norm = multiplier_norm(&per.field, &dilated, p)?;
    let d = f.domain().dim() as f64;
    let p_conj = p / (p - 1.0);
    Ok(libm::pow(t, d / p_conj) * norm)
}

/// One-sided comparison of periodic and line lower-bound estimates.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TransferenceReport {
    pub p: f64,
    /// `max ||M_phi P||_p / ||P||_p` over the torus set.
    pub periodic_max: f64,
    /// `max ||T_phi f||_p / ||f||_p` over the line set.
    pub line_max: f64,
    /// `max ||P||_p / ||M_phi P||_p`, recorded but not asserted.
    pub periodic_inverse_max: f64,
    pub line_inverse_max: f64,
    pub tol: f64,
    /// `periodic_max <= line_max (1 + tol)`.
    pub holds: bool,
}

pub const TRANSFERENCE_TOL: f64 = 0.05;

fn ratio_pair(f: &SampledField, symbol: &dyn VectorSymbol, p: f64) -> Result<(f64, f64)> {
    let op = multiplier_norm(f, symbol, p)?;
    let base = lp_norm(f, p)?;
    Ok((op / base, base / op))
}

/// Compares `||M_phi||` and `||T_phi||` lower bounds on finite test sets at `p`.
pub fn transference_inequality_check(
    periodic_symbol: &dyn VectorSymbol,
    line_symbol: &dyn VectorSymbol,
    p: f64,
    torus_set: &[SampledField],
    line_set: &[SampledField],
) -> Result<TransferenceReport> {
    if torus_set.is_empty() || line_set.is_empty() {
        return Err(Error::Degenerate("transference needs nonempty test sets".into()));
    }
    let fold = |set: &[SampledField], symbol: &dyn VectorSymbol| -> Result<(f64, f64)> {
        let mut best = (0.0f64, 0.0f64);
        for f in set {
            let (a, b) = ratio_pair(f, symbol, p)?;
            best = (best.0.max(a), best.1.max(b));
        }
        Ok(best)
    };
    let (periodic_max, periodic_inverse_max) = fold(torus_set, periodic_symbol)?;
    let (line_max, line_inverse_max) = fold(line_set, line_symbol)?;
    Ok(TransferenceReport {
        p,
        periodic_max,
        line_max,
        periodic_inverse_max,
        line_inverse_max,
        tol: TRANSFERENCE_TOL,
        holds: periodic_max <= line_max * (1.0 + TRANSFERENCE_TOL),
    })
}

/// Ratio curve `||T_phi f||_p / ||f||_p` over a family, one point per `p`.
pub fn multiplier_ratio_curve(
    name: &str,
    family: &str,
    symbol: &dyn VectorSymbol,
    members: &[SampledField],
    ps: &[f64],
    kind: RatioKind,
) -> Result<RatioCurve> {
    let norms: Vec<SampledField> = members
        .iter()
        .map(|f| multiplier_norm_field(f, symbol))
        .collect::<Result<_>>()?;
    ratio_curve(name, family, members.len(), ps, kind, |i, p| {
        Ok(Measurement {
            op_norm: lp_norm(&norms[i], p)?,
            f_norm: lp_norm(&members[i], p)?,
            error: 0.0,
        })
    })
}

/// Outcome of the (H1)-(H4) validators on a frequency grid.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HypothesisReport {
    /// Measured `sup ||phi(xi)||_Y` over the band.
    pub measured_bound: f64,
    pub declared_bound: f64,
    pub h1: bool,
    /// Largest `||phi(xi) - phi(xi')||_Y` over grid neighbours in one dyadic block.
    pub max_jump: f64,
    pub modulus: f64,
    pub h2: bool,
    /// Finite-dimensional `Y`: holds by construction.
    pub h3: bool,
    /// Bounded symbols on a finite grid act boundedly: holds by construction.
    pub h4: bool,
}

/// Checks boundedness on the band `|m_a| < N/2` and the jump surrogate for
/// strong continuity on dyadic blocks. Frequencies where the symbol is
/// undefined are skipped.
pub fn validate_hypotheses(symbol: &dyn VectorSymbol, domain: &Domain, modulus: f64) -> Result<HypothesisReport> {
    let d = domain.dim();
    if symbol.dim() != d {
        return Err(Error::DomainMismatch(format!("{}-d symbol on a {d}-d domain", symbol.dim())));
    }
    let (lo, _) = domain.band();
    let eval = |slot: usize| -> Option<Vec<Complex64>> {
        let xi = domain.physical_frequency(slot);
        (0..symbol.components())
            .map(|c| symbol.component(&xi[..d], c))
            .collect::<Result<Vec<_>>>()
            .ok()
    };
    let values: Vec<Option<Vec<Complex64>>> = (0..domain.len()).map(eval).collect();
    let weights: Vec<f64> = (0..symbol.components()).map(|c| symbol.weight(c)).collect();
    let norm = |v: &[Complex64]| libm::sqrt(v.iter().zip(&weights).map(|(z, w)| w * z.norm_sqr()).sum());
    let measured_bound = values.iter().flatten().map(|v| norm(v)).fold(0.0, f64::max);

    let block = |slot: usize| -> Option<Vec<(Sign, i32)>> {
        let xi = domain.physical_frequency(slot);
        xi[..d].iter().map(|&v| dyadic_index(v)).collect()
    };
    let mut max_jump = 0.0f64;
    for slot in 0..domain.len() {
        let Some(a) = &values[slot] else { continue };
        let m = domain.frequency(slot);
        for axis in 0..d {
            let mut next = m;
            next[axis] += 1;
            if next[axis] >= -lo {
                continue;
            }
            let Some(other) = domain.slot_of_frequency(&next[..d]) else { continue };
            let Some(b) = &values[other] else { continue };
            if block(slot).is_none() || block(slot) != block(other) {
                continue;
            }
            let diff: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
            max_jump = max_jump.max(norm(&diff));
        }
    }
    Ok(HypothesisReport {
        measured_bound,
        declared_bound: symbol.bound(),
        h1: measured_bound.is_finite() && measured_bound <= symbol.bound() * (1.0 + 1e-9),
        max_jump,
        modulus,
        h2: max_jump <= modulus,
        h3: true,
        h4: true,
    })
}

/// `int_{R^d} P(x) H_t(x) dx` with the heat kernel
/// `H_t(x) = (4 pi t)^{-d/2} e^{-|x|^2/(4t)}`, by a Riemann sum on `domain`.
pub fn ergodic_average(poly: &TrigPoly, t: f64, domain: &Domain) -> Result<Complex64> {
    if domain.kind() != DomainKind::Line {
        return Err(Error::DomainMismatch("ergodic average lives on a line domain".into()));
    }
    let half = domain.period() / 2.0;
    let edge = libm::exp(-half * half / (4.0 * t));
    if edge > WINDOW_TAIL_BUDGET {
        return Err(Error::TailBudget {
            what: "heat kernel".into(),
            estimate: edge,
            budget: WINDOW_TAIL_BUDGET,
        });
    }
    let d = domain.dim() as f64;
    let norm = libm::pow(4.0 * PI * t, -d / 2.0);
    let heat = SampledField::from_fn(*domain, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        Complex64::new(norm * libm::exp(-r2 / (4.0 * t)), 0.0)
    })?;
    let p = synth_unchecked(poly, domain)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (a, b) in p.values().iter().zip(heat.values()) {
        acc += a * b;
    }
    Ok(acc * domain.cell_volume())
}

/// Samples `P` pointwise on any domain; frequencies are integers in `x`.
fn synth_unchecked(poly: &TrigPoly, domain: &Domain) -> Result<SampledField> {
    SampledField::from_fn(*domain, |x| {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, a) in poly {
            let phase: f64 = m.iter().zip(x).map(|(&k, &y)| k as f64 * y).sum();
            acc += a * Complex64::from_polar(1.0, TAU * phase);
        }
        acc
    })
}
