//! Built-in experiments. Each one turns a [`Params`] into curves, fits,
//! verdict rows and auxiliary tables.

use lpsq_core::dyadic::{build_partition, square_function, tensor_factorization_check};
use lpsq_core::estimate::{
    fit_exponent, fit_points, ratio_curve, ExperimentOutcome, Measurement, RatioCurve, RatioKind, Regime, Verdict,
};
use lpsq_core::extremal::{
    gaussian_moment, gaussian_moment_exact, khintchine_growth, khintchine_p_grid, lacunary_identity_check,
    martingale_enumerate, martingale_growth, mz_tensor_check, poisson_dilate_bound, DilateSetup, DyadicRational,
};
use lpsq_core::field::{line_transform_at, lp_norm, synth, transform};
use lpsq_core::kernels::{PoissonDerivative, SemigroupKind};
use lpsq_core::maximal::{carleson_bmo_ratio, carleson_corpus_member, CubeFamily};
use lpsq_core::random::{random_coefficients, random_trig_poly, random_unit_vector, PolySpec};
use lpsq_core::sqfun::{g_semigroup, g_semigroup_detailed, g_torus_radial, Derivative};
use lpsq_core::transference::{
    gaussian_window, gaussian_window_norm, multiplier_ratio_curve, periodic_norm, periodization_norm,
    transference_inequality_check, Dilated, DyadicSymbol, PoissonGSymbol, VectorSymbol,
};
use lpsq_core::{Complex64, Domain, DomainKind, Error, LogTimeGrid, Result, SampledField};
use serde::Serialize;

use crate::config::Overrides;

/// Resolved parameters of one experiment.
///
/// `tolerance` is the acceptance tolerance: an error bound for exact
/// identities, or the half-width of the slope window for growth orders.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Params {
    pub dim: usize,
    pub samples: usize,
    pub period: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub nodes: usize,
    pub ps: Vec<f64>,
    pub family: usize,
    pub draws: usize,
    pub seed: u64,
    pub tolerance: f64,
}

pub const DEFAULT_SEED: u64 = 20_240_601;

impl Params {
    fn base(samples: usize, tolerance: f64) -> Self {
        Self {
            dim: 1,
            samples,
            period: 1.0,
            t_min: 1e-4,
            t_max: 1e2,
            nodes: 512,
            ps: vec![2.0],
            family: 1,
            draws: 0,
            seed: DEFAULT_SEED,
            tolerance,
        }
    }

    fn grid_of(mut self, t_min: f64, t_max: f64, nodes: usize) -> Self {
        (self.t_min, self.t_max, self.nodes) = (t_min, t_max, nodes);
        self
    }

    fn ps_of(mut self, ps: &[f64]) -> Self {
        self.ps = ps.to_vec();
        self
    }

    fn family_of(mut self, family: usize) -> Self {
        self.family = family;
        self
    }

    pub fn apply(&mut self, o: &Overrides) {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = o.$f.clone() { self.$f = v; } )* };
        }
        set!(dim, samples, period, t_min, t_max, nodes, ps, family, draws, seed, tolerance);
    }

    pub fn domain(&self, kind: DomainKind) -> Result<Domain> {
        let period = if kind == DomainKind::Torus { 1.0 } else { self.period };
        Domain::new(kind, self.dim, period, self.samples)
    }

    pub fn grid(&self) -> Result<LogTimeGrid> {
        LogTimeGrid::new(self.t_min, self.t_max, self.nodes)
    }

    fn member_seed(&self, index: u64) -> u64 {
        self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(index)
    }
}

/// Auxiliary CSV written next to the curves.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

macro_rules! row {
    ($($v:expr),* $(,)?) => { vec![$($v.to_string()),*] };
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Output {
    pub outcome: ExperimentOutcome,
    pub tables: Vec<Table>,
}

pub struct Entry {
    pub name: &'static str,
    /// Claim addressed, embedded in every verdict row.
    pub citation: &'static str,
    pub kind: DomainKind,
    pub defaults: fn() -> Params,
    /// Cheap precondition checks run before any experiment starts.
    pub check: fn(&Params) -> Result<()>,
    pub run: fn(&Params) -> Result<Output>,
}

impl Entry {
    pub fn params(&self, o: &Overrides) -> Params {
        let mut p = (self.defaults)();
        p.apply(o);
        p
    }

    pub fn validate(&self, p: &Params) -> Result<()> {
        p.domain(self.kind)?;
        p.grid()?;
        if p.ps.is_empty() {
            return Err(Error::InvalidGrid("empty p-grid".into()));
        }
        if let Some(&bad) = p.ps.iter().find(|&&q| !(q >= lpsq_core::field::P_MIN && q <= lpsq_core::field::P_MAX)) {
            return Err(Error::ExponentOutOfRange { p: bad, lo: lpsq_core::field::P_MIN, hi: lpsq_core::field::P_MAX });
        }
        if p.family == 0 {
            return Err(Error::InvalidParameter("family_size must be positive".into()));
        }
        if !(p.tolerance.is_finite() && p.tolerance >= 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance {} must be nonnegative", p.tolerance)));
        }
        (self.check)(p)
    }
}

fn no_check(_: &Params) -> Result<()> {
    Ok(())
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn character(d: Domain, m: i64) -> Result<SampledField> {
    synth(d, &[(vec![m; d.dim()], one())])
}

fn max_dev(f: &SampledField, target: f64) -> f64 {
    f.values().iter().map(|v| (v - target).norm()).fold(0.0, f64::max)
}

/// Largest `|m|` that stays strictly inside the band of `d`.
fn inner_band(d: &Domain, cap: i64) -> i64 {
    (d.samples() as i64 / 2 - 1).min(cap)
}

fn outcome(name: &str) -> ExperimentOutcome {
    ExperimentOutcome { name: name.into(), ..Default::default() }
}

/// Slope window `claimed +- tolerance`.
fn slope_verdict(name: &str, citation: &str, claimed: f64, p: &Params, slope: f64) -> Verdict {
    Verdict::windowed(name, citation, slope, (claimed - p.tolerance, claimed + p.tolerance), Some(slope))
}

fn bound_verdict(name: &str, citation: &str, observed: f64, bound: f64) -> Verdict {
    Verdict::windowed(name, citation, observed, (0.0, bound), None)
}

fn curve_from_table(op: &str, family: &str, ps: &[f64], kind: RatioKind, table: &[Vec<f64>]) -> Result<RatioCurve> {
    // table[member][p index]
    ratio_curve(op, family, table.len(), ps, kind, |i, q| {
        let j = ps.iter().position(|&x| x == q).expect("p from the grid");
        Ok(Measurement { op_norm: table[i][j], f_norm: 1.0, error: 0.0 })
    })
}

pub const G_CHARACTER: &str = "g-character-value";
const G_CHARACTER_CITE: &str = "(g-function) G(f) = (∫₀^∞ t|∂ₜPₜf|² dt)^{1/2} equals 1/2 on every character";

fn g_character_value(p: &Params) -> Result<Output> {
    let d = p.domain(DomainKind::Torus)?;
    let grid = p.grid()?;
    let mut out = outcome(G_CHARACTER);
    let mut table = Table::new("g-character-value", &["m", "min_G", "max_G", "max_error"]);
    let mut worst = 0.0f64;
    for m in [1i64, 3, 7] {
        let g = g_semigroup(&character(d, m)?, SemigroupKind::Poisson, Derivative::Time, &grid)?;
        let re: Vec<f64> = g.values().iter().map(|v| v.re).collect();
        let err = max_dev(&g, 0.5);
        worst = worst.max(err);
        let lo = re.iter().copied().fold(f64::MAX, f64::min);
        let hi = re.iter().copied().fold(f64::MIN, f64::max);
        table.push(row![m, lo, hi, err]);
    }
    out.verdicts.push(bound_verdict(G_CHARACTER, G_CHARACTER_CITE, worst, p.tolerance));
    Ok(Output { outcome: out, tables: vec![table] })
}

pub const G_PARSEVAL: &str = "g-parseval";
const G_PARSEVAL_CITE: &str = "(g-function) Plancherel: ‖G(f)‖₂ = ½‖f‖₂ for mean-zero f";

fn g_parseval(p: &Params) -> Result<Output> {
    let d = p.domain(DomainKind::Torus)?;
    let grid = p.grid()?;
    let spec = PolySpec { band: inner_band(&d, 40), mean_zero: true, real: false };
    let mut table = Table::new("g-parseval", &["member", "ratio_p2", "relative_error", "quadrature_error"]);
    let mut gs = Vec::with_capacity(p.family);
    let mut fs = Vec::with_capacity(p.family);
    let mut worst = 0.0f64;
    for i in 0..p.family {
        let f = random_trig_poly(d, spec, p.member_seed(i as u64))?;
        let g = g_semigroup_detailed(&f, SemigroupKind::Poisson, Derivative::Time, &grid)?;
        let (gn, gerr) = g.norm_with_error(2.0)?;
        let ratio = gn / lp_norm(&f, 2.0)?;
        let rel = (ratio / 0.5 - 1.0).abs();
        worst = worst.max(rel);
        table.push(row![i, ratio, rel, gerr / gn]);
        gs.push(g.field);
        fs.push(f);
    }
    let curve = ratio_curve("g-poisson", "random-mean-zero", fs.len(), &p.ps, RatioKind::Cotype, |i, q| {
        Ok(Measurement { op_norm: lp_norm(&gs[i], q)?, f_norm: lp_norm(&fs[i], q)?, error: 0.0 })
    })?;
    let mut out = outcome(G_PARSEVAL);
    out.curves.push(curve);
    out.verdicts.push(bound_verdict(G_PARSEVAL, G_PARSEVAL_CITE, worst, p.tolerance));
    Ok(Output { outcome: out, tables: vec![table] })
}

pub const HEAT_CHARACTER: &str = "heat-torus-character";
const HEAT_CHARACTER_CITE: &str = "(gT) heat g-function on 𝕋: G(e_n)² = n⁴/((2n²−1)·2n²)";

/// `int_0^1 (1 - r) (a r^{a-1})^2 dr = a^2 B(2a - 1, 2)` with `a = n^2`.
pub fn heat_character_square(n: f64) -> f64 {
    let a = n * n;
    a * a / ((2.0 * a - 1.0) * 2.0 * a)
}

fn heat_torus_character(p: &Params) -> Result<Output> {
    let d = p.domain(DomainKind::Torus)?;
    let grid = p.grid()?;
    let mut table = Table::new("heat-torus-character", &["n", "G_squared", "closed_form", "relative_error"]);
    let mut worst = 0.0f64;
    for n in [1i64, 2, 4] {
        let g = g_torus_radial(&character(d, n)?, SemigroupKind::Heat, &grid)?;
        let want = heat_character_square(n as f64);
        let rel = g
            .values()
            .iter()
            .map(|v| (v.norm_sqr() / want - 1.0).abs())
            .fold(0.0, f64::max);
        worst = worst.max(rel);
        table.push(row![n, g.values()[0].norm_sqr(), want, rel]);
    }
    let mut out = outcome(HEAT_CHARACTER);
    out.verdicts.push(bound_verdict(HEAT_CHARACTER, HEAT_CHARACTER_CITE, worst, p.tolerance));
    Ok(Output { outcome: out, tables: vec![table] })
}

pub const DYADIC: &str = "dyadic-square-function";
const DYADIC_CITE: &str = "(multi-parameter) dyadic square function: S(e₅) = 1, Parseval, tensor factorization";

fn dyadic_k_max(d: &Domain) -> i32 {
    (d.samples() / 2).trailing_zeros() as i32
}

fn dyadic_square(p: &Params) -> Result<Output> {
    let d = p.domain(DomainKind::Torus)?;
    if d.dim() != 1 {
        return Err(Error::InvalidParameter("the dyadic experiment runs on the circle (d = 1)".into()));
    }
    let partition = build_partition(&d, 1, dyadic_k_max(&d))?;
    let mut out = outcome(DYADIC);
    let mut table = Table::new("dyadic-square-function", &["check", "deviation"]);

    let s5 = square_function(&character(d, 5)?, &partition)?;
    let e5 = max_dev(&s5, 1.0);
    table.push(row!["S(e_5) - 1", e5]);

    let spec = PolySpec { band: inner_band(&d, i64::MAX), mean_zero: false, real: false };
    let mut iso = 0.0f64;
    let mut fs = Vec::with_capacity(p.family);
    let mut ss = Vec::with_capacity(p.family);
    for i in 0..p.family {
        let f = random_trig_poly(d, spec, p.member_seed(i as u64))?;
        let s = square_function(&f, &partition)?;
        let spec_f = transform(&f);
        let zero = d.slot_of_frequency(&[0]).expect("zero is in band");
        let centered: f64 = spec_f
            .coeffs()
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != zero)
            .map(|(_, c)| c.norm_sqr())
            .sum::<f64>()
            .sqrt();
        iso = iso.max((lp_norm(&s, 2.0)? - centered).abs() / centered);
        fs.push(f.sub(&SampledField::constant(d, f.mean()))?);
        ss.push(s);
    }
    table.push(row!["| ||S f||_2 - ||f - f^(0)||_2 | / ||f - f^(0)||_2", iso]);

    let small = Domain::torus(1, 64)?;
    let part1 = build_partition(&small, 1, dyadic_k_max(&small))?;
    let tspec = PolySpec { band: 31, mean_zero: true, real: false };
    let mut tensor = 0.0f64;
    for i in 0..3u64 {
        let f1 = random_trig_poly(small, tspec, p.member_seed(1000 + 2 * i))?;
        let f2 = random_trig_poly(small, tspec, p.member_seed(1001 + 2 * i))?;
        tensor = tensor.max(tensor_factorization_check(&f1, &f2, &part1)?);
    }
    table.push(row!["S(f1 (x) f2) - S(f1) S(f2)", tensor]);

    for v in [e5, iso, tensor] {
        out.verdicts.push(bound_verdict(DYADIC, DYADIC_CITE, v, p.tolerance));
    }

    let c = ratio_curve("dyadic-S", "random", fs.len(), &p.ps, RatioKind::Cotype, |i, q| {
        Ok(Measurement { op_norm: lp_norm(&ss[i], q)?, f_norm: lp_norm(&fs[i], q)?, error: 0.0 })
    })?;
    let t = ratio_curve("dyadic-S", "random", fs.len(), &p.ps, RatioKind::Type, |i, q| {
        Ok(Measurement { op_norm: lp_norm(&fs[i], q)?, f_norm: lp_norm(&ss[i], q)?, error: 0.0 })
    })?;
    let below_two: Vec<f64> = p.ps.iter().copied().filter(|&q| q < 2.0).collect();
    if below_two.len() >= lpsq_core::estimate::MIN_FIT_POINTS {
        let window = (below_two[0], below_two[below_two.len() - 1]);
        let fit = fit_exponent(&t, Regime::PToOne, window)?;
        out.verdicts.push(Verdict::exploratory(DYADIC, fit.slope, Some(fit.slope)));
        out.fits.push(fit);
    }
    out.curves.extend([c, t]);
    Ok(Output { outcome: out, tables: vec![table] })
}

pub const POISSON_DILATES: &str = "poisson-dilates";
const POISSON_DILATES_CITE: &str = "(PH ML) L_{c,p} ≳ p′ as p → 1, extremal family P_s";
pub const DILATE_SCALES: [f64; 3] = [0.01, 0.02, 0.04];

fn poisson_dilates(p: &Params) -> Result<Output> {
    let setup = DilateSetup {
        domain: p.domain(DomainKind::Line)?,
        grid: p.grid()?,
        core_radius: 0.5,
        far_limit: 1e6,
        far_points: 2000,
    };
    let report = poisson_dilate_bound(&DILATE_SCALES, &p.ps, &setup)?;
    let window = window_of(&p.ps);
    let fit = fit_exponent(&report.completed, Regime::PToOne, window)?;
    let windowed = fit_exponent(&report.windowed, Regime::PToOne, window)?;
    let mut table = Table::new("poisson-dilates", &["p", "s", "windowed", "completed"]);
    for (i, &q) in p.ps.iter().enumerate() {
        for (j, &s) in DILATE_SCALES.iter().enumerate() {
            table.push(row![q, s, report.windowed_table[i][j], report.completed_table[i][j]]);
        }
    }
    let mut out = outcome(POISSON_DILATES);
    out.verdicts.push(slope_verdict(POISSON_DILATES, POISSON_DILATES_CITE, 1.0, p, fit.slope));
    out.verdicts.push(Verdict::exploratory(POISSON_DILATES, windowed.slope, Some(windowed.slope)));
    out.fits.extend([fit, windowed]);
    out.curves.extend([report.completed, report.windowed]);
    Ok(Output { outcome: out, tables: vec![table] })
}

fn window_of(ps: &[f64]) -> (f64, f64) {
    let lo = ps.iter().copied().fold(f64::MAX, f64::min);
    let hi = ps.iter().copied().fold(f64::MIN, f64::max);
    (lo, hi)
}

pub const LACUNARY: &str = "lacunary-heat-identity";
const LACUNARY_CITE: &str = "(lacunary g-function) ‖G^H f‖_p ≈ ‖a‖₂ for f = Σ a_k e^{2πi2^k x}";
pub const LACUNARY_TERMS: usize = 8;

fn lacunary(p: &Params) -> Result<Output> {
    let d = p.domain(DomainKind::Torus)?;
    let grid = p.grid()?;
    let mut table = Table::new("lacunary-heat-identity", &["member", "p", "ratio", "quadrature_error"]);
    let mut ratios = Vec::with_capacity(p.family);
    let mut distortion = 1.0f64;
    for i in 0..p.family {
        let a = random_unit_vector(LACUNARY_TERMS, p.member_seed(i as u64));
        let r = lacunary_identity_check(&a, &p.ps, &d, &grid)?;
        for &(q, v) in &r.ratios {
            table.push(row![i, q, v, r.quadrature_error]);
        }
        distortion = distortion.max(r.distortion);
        ratios.push(r.ratios.iter().map(|x| x.1).collect::<Vec<_>>());
    }
    let inverse: Vec<Vec<f64>> = ratios.iter().map(|r| r.iter().map(|v| 1.0 / v).collect()).collect();
    let mut out = outcome(LACUNARY);
    out.curves.push(curve_from_table("g-heat-radial", "lacunary-unit", &p.ps, RatioKind::Cotype, &ratios)?);
    out.curves.push(curve_from_table("g-heat-radial", "lacunary-unit", &p.ps, RatioKind::Type, &inverse)?);
    out.verdicts.push(bound_verdict(LACUNARY, LACUNARY_CITE, distortion, p.tolerance));
    Ok(Output { outcome: out, tables: vec![table] })
}

pub const KHINTCHINE: &str = "khintchine-sqrt-p";
const KHINTCHINE_CITE: &str = "(PH ML) lacunary Khintchine constant \"is of order $\\sqrt p$\"";

fn khintchine(p: &Params) -> Result<Output> {
    let d = p.domain(DomainKind::Torus)?;
    let a = vec![one(); p.family];
    let (curve, fit) = khintchine_growth(&a, &p.ps, &d)?;
    let mut out = outcome(KHINTCHINE);
    out.verdicts.push(slope_verdict(KHINTCHINE, KHINTCHINE_CITE, 0.5, p, fit.slope));
    out.fits.push(fit);
    out.curves.push(curve);
    Ok(Output { outcome: out, tables: vec![] })
}

pub const MARTINGALE: &str = "martingale-sqrt-p";
const MARTINGALE_CITE: &str = "(PH ML) \"simple random walk stopped at $\\pm 2$\": F(p) of order √p";

fn fraction(x: DyadicRational) -> String {
    format!("{}/2^{}", x.num, x.exp)
}

fn martingale(p: &Params) -> Result<Output> {
    let r = martingale_enumerate(p.family, &p.ps)?;
    let mut table = Table::new("martingale-sqrt-p", &["j", "P(tau=j)", "P(A_j)", "P(tau=j) value", "P(A_j) value"]);
    let mut mismatches = 0usize;
    for j in 1..=r.horizon {
        let (tau, a) = (r.tau[j], r.a[j]);
        let ok = if j % 2 == 1 {
            tau.num == 0 && a.num == 0
        } else {
            let e = j as u32 / 2;
            tau == DyadicRational::pow2_inv(e) && a == DyadicRational::pow2_inv(3 * e)
        };
        mismatches += usize::from(!ok);
        table.push(row![j, fraction(tau), fraction(a), tau.value(), a.value()]);
    }
    let fit = martingale_growth(&r)?;
    let values: Vec<Vec<f64>> = vec![r.functional.iter().map(|x| x.1).collect()];
    let mut out = outcome(MARTINGALE);
    out.curves.push(curve_from_table("martingale-F", "stopped-walk", &p.ps, RatioKind::Cotype, &values)?);
    out.verdicts.push(slope_verdict(MARTINGALE, MARTINGALE_CITE, 0.5, p, fit.slope));
    out.verdicts.push(Verdict::windowed(MARTINGALE, MARTINGALE_CITE, mismatches as f64, (0.0, 0.0), None));
    out.fits.push(fit);
    Ok(Output { outcome: out, tables: vec![table] })
}

pub const DELEEUW_WINDOW: &str = "deleeuw-window";
const DELEEUW_WINDOW_CITE: &str = "(link1) (4πpt)^{d/2p}‖T_φ(P·e^{−4π²t|x|²})‖_p → ‖M_φ P‖_p as t → 0";
pub const WINDOW_TS: [f64; 3] = [1e-1, 1e-2, 1e-3];

fn z_plus_z2() -> Vec<(Vec<i64>, Complex64)> {
    vec![(vec![1], one()), (vec![2], one())]
}

fn deleeuw_window(p: &Params) -> Result<Output> {
    let line = p.domain(DomainKind::Line)?;
    let symbol = PoissonGSymbol { dim: line.dim(), grid: p.grid()? };
    let poly = z_plus_z2();
    let q = p.ps[0];
    let exact = periodic_norm(&poly, &symbol, q, &Domain::torus(1, 16)?)?;
    let mut table = Table::new("deleeuw-window", &["t", "window_norm", "periodic_norm", "relative_error"]);
    let mut errors = Vec::new();
    for t in WINDOW_TS {
        let v = gaussian_window_norm(&poly, &symbol, q, t, &line)?;
        let err = (v - exact).abs() / exact;
        table.push(row![t, v, exact, err]);
        errors.push(err);
    }
    let increases = errors.windows(2).filter(|w| w[1] >= w[0]).count();
    let mut out = outcome(DELEEUW_WINDOW);
    out.verdicts.push(bound_verdict(DELEEUW_WINDOW, DELEEUW_WINDOW_CITE, errors[errors.len() - 1], p.tolerance));
    out.verdicts.push(Verdict::windowed(DELEEUW_WINDOW, DELEEUW_WINDOW_CITE, increases as f64, (0.0, 0.0), None));
    Ok(Output { outcome: out, tables: vec![table] })
}

pub const DELEEUW_PERIODIZATION: &str = "deleeuw-periodization";
const DELEEUW_PERIODIZATION_CITE: &str = "(link2) t^{d/p′}‖M_{φ(t·)} f̃_t‖_p → ‖T_φ f‖_p as t → 0";
pub const PERIODIZATION_TS: [f64; 2] = [1.0 / 64.0, 1.0 / 128.0];

/// `exp(-1/(1 - x^2))` on `(-1, 1)`.
pub fn bump(x: f64) -> f64 {
    if x.abs() < 1.0 {
        (-1.0 / (1.0 - x * x)).exp()
    } else {
        0.0
    }
}

/// `(int |f^(xi)|^2 ||phi(xi)||^2 dxi)^{1/2}` by a Riemann sum on `|xi| <= 16`.
fn line_parseval(f: &SampledField, symbol: &dyn VectorSymbol) -> Result<f64> {
    let h = 1.0 / 256.0;
    let mut acc = 0.0;
    for k in -4096i64..=4096 {
        let xi = k as f64 * h;
        acc += line_transform_at(f, &[xi]).norm_sqr() * symbol.norm_at(&[xi])?.powi(2) * h;
    }
    Ok(acc.sqrt())
}

fn deleeuw_periodization(p: &Params) -> Result<Output> {
    let line = p.domain(DomainKind::Line)?;
    if line.dim() != 1 {
        return Err(Error::InvalidParameter("the periodization experiment runs on the line (d = 1)".into()));
    }
    let f = SampledField::from_fn(line, |x| Complex64::new(bump(x[0]), 0.0))?;
    let symbol = PoissonGSymbol { dim: 1, grid: p.grid()? };
    let q = p.ps[0];
    if q != 2.0 {
        return Err(Error::ExponentOutOfRange { p: q, lo: 2.0, hi: 2.0 });
    }
    let target = line_parseval(&f, &symbol)?;
    let torus_samples = 8 * line.samples();
    let mut table = Table::new("deleeuw-periodization", &["t", "periodized_norm", "line_norm", "gap"]);
    let mut out = outcome(DELEEUW_PERIODIZATION);
    for (i, t) in PERIODIZATION_TS.into_iter().enumerate() {
        let v = periodization_norm(&f, &symbol, q, t, torus_samples)?;
        let gap = (v - target).abs() / target;
        table.push(row![t, v, target, gap]);
        let bound = p.tolerance / (1 << i) as f64;
        out.verdicts.push(bound_verdict(DELEEUW_PERIODIZATION, DELEEUW_PERIODIZATION_CITE, gap, bound));
    }
    Ok(Output { outcome: out, tables: vec![table] })
}

pub const TRANSFERENCE: &str = "transference-dyadic";
const TRANSFERENCE_CITE: &str = "(RvsT) periodic lower bound ≤ line lower bound for the dyadic multiplier";
pub const TRANSFERENCE_TORUS_SAMPLES: usize = 256;
pub const TRANSFERENCE_WINDOW_T: f64 = 1e-4;
pub const TRANSFERENCE_BAND: i64 = 15;

/// `2^{1/12}`: irrational, and `m t` stays in the block of `m` for `|m| <= 15`,
/// so the dilated symbol agrees with the dyadic one on the torus set while
/// its block edges sit at least 0.1 away from every integer.
pub fn transference_dilation() -> f64 {
    2f64.powf(1.0 / 12.0)
}

fn transference(p: &Params) -> Result<Output> {
    let line = p.domain(DomainKind::Line)?;
    let torus = Domain::new(DomainKind::Torus, line.dim(), 1.0, TRANSFERENCE_TORUS_SAMPLES)?;
    let spec = PolySpec { band: TRANSFERENCE_BAND, mean_zero: true, real: false };
    let polys: Vec<_> = (0..p.family).map(|i| random_coefficients(line.dim(), spec, p.member_seed(i as u64))).collect();
    let tset = polys.iter().map(|q| synth(torus, q)).collect::<Result<Vec<_>>>()?;
    let lset = polys
        .iter()
        .map(|q| gaussian_window(q, TRANSFERENCE_WINDOW_T, &line))
        .collect::<Result<Vec<_>>>()?;
    // one block of headroom for the dilated window spectrum
    let k_max = 65 - (TRANSFERENCE_BAND as u64).leading_zeros() as i32;
    let symbol = Dilated { inner: DyadicSymbol { dim: line.dim(), k_min: -1, k_max }, t: transference_dilation() };
    let mut table = Table::new(
        "transference-dyadic",
        &["p", "periodic_max", "line_max", "periodic_inverse_max", "line_inverse_max"],
    );
    let mut out = outcome(TRANSFERENCE);
    for &q in &p.ps {
        let r = transference_inequality_check(&symbol, &symbol, q, &tset, &lset)?;
        table.push(row![q, r.periodic_max, r.line_max, r.periodic_inverse_max, r.line_inverse_max]);
        out.verdicts.push(bound_verdict(TRANSFERENCE, TRANSFERENCE_CITE, r.periodic_max / r.line_max, 1.0 + p.tolerance));
        let inv = r.periodic_inverse_max / r.line_inverse_max;
        out.verdicts.push(Verdict::exploratory(TRANSFERENCE, inv, None));
    }
    out.curves.push(multiplier_ratio_curve("dyadic", "torus-set", &symbol, &tset, &p.ps, RatioKind::Cotype)?);
    out.curves.push(multiplier_ratio_curve("dyadic", "line-set", &symbol, &lset, &p.ps, RatioKind::Cotype)?);
    Ok(Output { outcome: out, tables: vec![table] })
}

pub const GAUSSIAN: &str = "gaussian-mz";
const GAUSSIAN_CITE: &str = "(MZ) E|Σα_k g_k|^p = γ_p^p ‖α‖₂^p, γ_p^p = Γ(p/2 + 1)";
pub const MZ_LENGTH: usize = 6;

fn gaussian(p: &Params) -> Result<Output> {
    let mut table = Table::new("gaussian-mz", &["check", "p", "estimate", "exact_or_rhs", "std_error", "z"]);
    let mut out = outcome(GAUSSIAN);
    for (k, &q) in p.ps.iter().enumerate() {
        let m = gaussian_moment(q, p.draws, p.member_seed(k as u64))?;
        let exact = gaussian_moment_exact(q);
        let z = (m.estimate - exact).abs() / m.std_error;
        table.push(row!["moment", q, m.estimate, exact, m.std_error, z]);
        out.verdicts.push(bound_verdict(GAUSSIAN, GAUSSIAN_CITE, z, p.tolerance));
    }
    for i in 0..p.family {
        let alpha = random_unit_vector(MZ_LENGTH, p.member_seed(1000 + i as u64));
        for (k, &q) in p.ps.iter().enumerate() {
            let r = mz_tensor_check(&alpha, q, p.draws, p.member_seed(2000 + (i * p.ps.len() + k) as u64))?;
            let z = r.error / r.std_error;
            table.push(row![format!("mz-{i}"), q, r.lhs, r.rhs, r.std_error, z]);
            out.verdicts.push(bound_verdict(GAUSSIAN, GAUSSIAN_CITE, z, p.tolerance));
        }
    }
    Ok(Output { outcome: out, tables: vec![table] })
}

pub const CARLESON: &str = "carleson-bmo";
const CARLESON_CITE: &str = "(carleson-BMO) \"The following inequality is known\": sup C^φ(f)/f^♯ bounded, stable as N doubles";
pub const CARLESON_BAND: i64 = 8;

fn carleson_ratios(p: &Params, samples: usize) -> Result<Vec<f64>> {
    let d = Domain::new(DomainKind::Torus, p.dim, 1.0, samples)?;
    // fixed levels so that the two resolutions test the same cubes
    let cubes = CubeFamily::new(d, 1, 5)?;
    let grid = p.grid()?;
    let phi = PoissonDerivative { dim: p.dim };
    (0..p.family as u64)
        .map(|i| carleson_bmo_ratio(&carleson_corpus_member(d, CARLESON_BAND, p.seed, i)?, &phi, &cubes, &grid))
        .collect()
}

fn carleson(p: &Params) -> Result<Output> {
    let coarse = carleson_ratios(p, p.samples)?;
    let fine = carleson_ratios(p, 2 * p.samples)?;
    let mut table = Table::new("carleson-corpus", &["member", "ratio_N", "ratio_2N"]);
    for (i, (a, b)) in coarse.iter().zip(&fine).enumerate() {
        table.push(row![i, a, b]);
    }
    let (c1, c2) = (coarse.iter().copied().fold(0.0, f64::max), fine.iter().copied().fold(0.0, f64::max));
    table.push(row!["max", c1, c2]);
    let mut out = outcome(CARLESON);
    out.verdicts.push(bound_verdict(CARLESON, CARLESON_CITE, (c2 / c1 - 1.0).abs(), p.tolerance));
    Ok(Output { outcome: out, tables: vec![table] })
}

fn check_carleson(p: &Params) -> Result<()> {
    let d = Domain::new(DomainKind::Torus, p.dim, 1.0, p.samples)?;
    CubeFamily::new(d, 1, 5)?;
    if p.t_min >= 1.0 / 32.0 || p.t_max < 0.5 {
        return Err(Error::InvalidGrid("Carleson boxes need t_min < 1/32 and t_max >= 1/2".into()));
    }
    Ok(())
}

pub const G_TYPE: &str = "g-type-exploratory";
const G_TYPE_CITE: &str = "(pb on LP) optimal order of L^P_{t,p} as p → ∞ is open";

fn g_type(p: &Params) -> Result<Output> {
    let d = p.domain(DomainKind::Torus)?;
    let grid = p.grid()?;
    let spec = PolySpec { band: inner_band(&d, 20), mean_zero: true, real: true };
    let fs = (0..p.family)
        .map(|i| random_trig_poly(d, spec, p.member_seed(i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let gs = fs
        .iter()
        .map(|f| g_semigroup(f, SemigroupKind::Poisson, Derivative::Time, &grid))
        .collect::<Result<Vec<_>>>()?;
    let t = ratio_curve("g-poisson", "random-real", fs.len(), &p.ps, RatioKind::Type, |i, q| {
        Ok(Measurement { op_norm: lp_norm(&fs[i], q)?, f_norm: lp_norm(&gs[i], q)?, error: 0.0 })
    })?;
    let fit = fit_points(&t.ps(), &t.values(), Regime::PToInfinity, window_of(&p.ps))?;
    let mut out = outcome(G_TYPE);
    out.verdicts.push(Verdict::exploratory(G_TYPE, fit.slope, Some(fit.slope)));
    out.fits.push(fit);
    out.curves.push(t);
    Ok(Output { outcome: out, tables: vec![] })
}

fn sqrt_grid() -> Vec<f64> {
    khintchine_p_grid()
}

pub static CATALOG: &[Entry] = &[
    Entry {
        name: G_CHARACTER,
        citation: G_CHARACTER_CITE,
        kind: DomainKind::Torus,
        defaults: || Params::base(1024, 1e-3),
        check: no_check,
        run: g_character_value,
    },
    Entry {
        name: G_PARSEVAL,
        citation: G_PARSEVAL_CITE,
        kind: DomainKind::Torus,
        defaults: || Params::base(256, 1e-3).ps_of(&[4.0 / 3.0, 2.0, 3.0, 4.0]).family_of(20),
        check: no_check,
        run: g_parseval,
    },
    Entry {
        name: HEAT_CHARACTER,
        citation: HEAT_CHARACTER_CITE,
        kind: DomainKind::Torus,
        defaults: || Params::base(64, 1e-3).grid_of(1e-5, 10.0, 512),
        check: no_check,
        run: heat_torus_character,
    },
    Entry {
        name: DYADIC,
        citation: DYADIC_CITE,
        kind: DomainKind::Torus,
        defaults: || Params::base(256, 1e-10).ps_of(&[1.1, 1.2, 1.35, 1.5, 2.0, 3.0, 4.0]).family_of(10),
        check: |p| {
            if p.samples < 8 {
                return Err(Error::InvalidParameter("the dyadic experiment needs N >= 8".into()));
            }
            Ok(())
        },
        run: dyadic_square,
    },
    Entry {
        name: POISSON_DILATES,
        citation: POISSON_DILATES_CITE,
        kind: DomainKind::Line,
        defaults: || Params {
            period: 64.0,
            ..Params::base(1 << 16, 0.3).grid_of(1e-4, 1e3, 512).ps_of(&[1.05, 1.1, 1.2, 1.33, 1.5])
        },
        check: |p| {
            if p.ps.iter().any(|&q| q <= 1.0 || q > 2.0) {
                return Err(Error::ExponentOutOfRange { p: p.ps[0], lo: 1.0, hi: 2.0 });
            }
            Ok(())
        },
        run: poisson_dilates,
    },
    Entry {
        name: LACUNARY,
        citation: LACUNARY_CITE,
        kind: DomainKind::Torus,
        defaults: || Params::base(1024, 8.0).grid_of(1e-9, 10.0, 1024).ps_of(&[2.0, 4.0, 8.0, 16.0]).family_of(10),
        check: |p| {
            if (1usize << LACUNARY_TERMS) >= p.samples / 2 {
                return Err(Error::NyquistOverflow(format!("2^{LACUNARY_TERMS} needs N > {}", 1usize << (LACUNARY_TERMS + 1))));
            }
            Ok(())
        },
        run: lacunary,
    },
    Entry {
        name: KHINTCHINE,
        citation: KHINTCHINE_CITE,
        kind: DomainKind::Torus,
        defaults: || Params { ps: sqrt_grid(), ..Params::base(16384, 0.15).family_of(12) },
        check: |p| {
            if p.family >= 63 || (1u64 << p.family) as f64 >= p.samples as f64 / 2.0 {
                return Err(Error::NyquistOverflow(format!("2^{} does not fit below N/2 = {}", p.family, p.samples / 2)));
            }
            Ok(())
        },
        run: khintchine,
    },
    Entry {
        name: MARTINGALE,
        citation: MARTINGALE_CITE,
        kind: DomainKind::Torus,
        defaults: || Params { ps: sqrt_grid(), ..Params::base(4, 0.15).family_of(40) },
        check: |p| martingale_enumerate(p.family, &[]).map(|_| ()),
        run: martingale,
    },
    Entry {
        name: DELEEUW_WINDOW,
        citation: DELEEUW_WINDOW_CITE,
        kind: DomainKind::Line,
        defaults: || Params { period: 64.0, ..Params::base(1024, 0.05) },
        check: no_check,
        run: deleeuw_window,
    },
    Entry {
        name: DELEEUW_PERIODIZATION,
        citation: DELEEUW_PERIODIZATION_CITE,
        kind: DomainKind::Line,
        defaults: || Params { period: 4.0, ..Params::base(512, 0.02) },
        check: |p| {
            if p.period / 2.0 <= 1.0 {
                return Err(Error::InvalidDomain("the bump on [-1, 1] needs L > 2".into()));
            }
            Ok(())
        },
        run: deleeuw_periodization,
    },
    Entry {
        name: TRANSFERENCE,
        citation: TRANSFERENCE_CITE,
        kind: DomainKind::Line,
        defaults: || Params { period: 256.0, ..Params::base(16384, 0.05).ps_of(&[4.0 / 3.0, 2.0, 4.0]).family_of(10) },
        check: no_check,
        run: transference,
    },
    Entry {
        name: GAUSSIAN,
        citation: GAUSSIAN_CITE,
        kind: DomainKind::Torus,
        defaults: || Params { draws: 200_000, ..Params::base(4, 3.0).ps_of(&[2.0, 4.0]).family_of(5) },
        check: |p| {
            if p.draws < lpsq_core::extremal::MIN_SAMPLES {
                return Err(Error::InvalidParameter(format!(
                    "draws = {} below the minimum {}",
                    p.draws,
                    lpsq_core::extremal::MIN_SAMPLES
                )));
            }
            Ok(())
        },
        run: gaussian,
    },
    Entry {
        name: CARLESON,
        citation: CARLESON_CITE,
        kind: DomainKind::Torus,
        defaults: || Params::base(128, 0.2).grid_of(1e-4, 1.0, 160).family_of(50),
        check: check_carleson,
        run: carleson,
    },
    Entry {
        name: G_TYPE,
        citation: G_TYPE_CITE,
        kind: DomainKind::Torus,
        defaults: || Params { ps: sqrt_grid(), ..Params::base(256, 0.0).family_of(10) },
        check: no_check,
        run: g_type,
    },
];

pub fn names() -> Vec<&'static str> {
    CATALOG.iter().map(|e| e.name).collect()
}

pub fn find(name: &str) -> Option<&'static Entry> {
    CATALOG.iter().find(|e| e.name == name)
}
