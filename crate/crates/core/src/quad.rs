//! Geometric quadrature in the semigroup parameter.
//!
//! A [`LogTimeGrid`] discretizes `int_0^inf F(t) dt/t` by the trapezoid rule
//! in `u = log t`. Every integral comes with a halving estimate: the same
//! rule on every other node, compared with the full rule.

use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result, TAU};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LogTimeGrid {
    t_min: f64,
    t_max: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    coarse: Vec<f64>,
}

/// Value of a quadrature together with its halving error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

/// Trapezoid weights in log t for increasing `nodes`.
fn trapezoid(logs: &[f64]) -> Vec<f64> {
    let n = logs.len();
    let mut w = alloc::vec![0.0; n];
    for i in 0..n - 1 {
        let h = logs[i + 1] - logs[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    w
}

impl LogTimeGrid {
    pub const DEFAULT_NODES: usize = 512;
    pub const DEFAULT_T_MIN: f64 = 1e-4;
    pub const DEFAULT_T_MAX: f64 = 1e4;

    pub fn new(t_min: f64, t_max: f64, n: usize) -> Result<Self> {
        if !(t_min.is_finite() && t_min > 0.0 && t_max.is_finite() && t_max > t_min) {
            return Err(Error::InvalidGrid(format!(
                "need 0 < t_min < t_max, got [{t_min}, {t_max}]"
            )));
        }
        if n < 3 {
            return Err(Error::InvalidGrid(format!("need at least 3 nodes, got {n}")));
        }
        let (a, b) = (libm::log(t_min), libm::log(t_max));
        let h = (b - a) / (n - 1) as f64;
        let logs: Vec<f64> = (0..n).map(|j| a + h * j as f64).collect();
        let mut nodes: Vec<f64> = logs.iter().map(|&u| libm::exp(u)).collect();
        nodes[0] = t_min;
        nodes[n - 1] = t_max;
        let weights = trapezoid(&logs);

        // every other node, always keeping the last one
        let mut keep: Vec<usize> = (0..n).step_by(2).collect();
        if *keep.last().unwrap() != n - 1 {
            keep.push(n - 1);
        }
        let sub: Vec<f64> = keep.iter().map(|&i| logs[i]).collect();
        let sub_w = trapezoid(&sub);
        let mut coarse = alloc::vec![0.0; n];
        for (i, w) in keep.into_iter().zip(sub_w) {
            coarse[i] = w;
        }
        Ok(Self {
            t_min,
            t_max,
            nodes,
            weights,
            coarse,
        })
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights for `int F(t) dt/t`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weights of the every-other-node rule (zero on dropped nodes).
    pub fn coarse_weights(&self) -> &[f64] {
        &self.coarse
    }

    /// The same span with twice the node spacing resolution.
    pub fn refined(&self) -> Self {
        Self::new(self.t_min, self.t_max, 2 * self.len() - 1).expect("refining a valid grid")
    }

    /// `int F dt/t` from values sampled at the nodes.
    pub fn integrate_values(&self, values: &[f64]) -> Quadrature {
        let fine: f64 = values.iter().zip(&self.weights).map(|(v, w)| v * w).sum();
        let coarse: f64 = values.iter().zip(&self.coarse).map(|(v, w)| v * w).sum();
        Quadrature {
            value: fine,
            error: (fine - coarse).abs(),
        }
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> Quadrature {
        let values: Vec<f64> = self.nodes.iter().map(|&t| f(t)).collect();
        self.integrate_values(&values)
    }

    /// Weights for `int_0^1 (1 - r) |F(r)|^2 dr` under `r = e^{-2 pi t}`:
    /// `w_j * t_j * 2 pi r_j (1 - r_j)` for integrands given in `t`.
    pub fn radial_weights(&self) -> Vec<f64> {
        self.radial_from(&self.weights)
    }

    pub fn radial_coarse_weights(&self) -> Vec<f64> {
        self.radial_from(&self.coarse)
    }

    fn radial_from(&self, base: &[f64]) -> Vec<f64> {
        self.nodes
            .iter()
            .zip(base)
            .map(|(&t, &w)| {
                let r = libm::exp(-TAU * t);
                let one_minus_r = -libm::expm1(-TAU * t);
                w * t * TAU * r * one_minus_r
            })
            .collect()
    }

    /// Checks that `t_min * s_max < lo` and `t_max * s_min > hi`, where `s` is
    /// the spectral scale the integrand decays in.
    pub fn check_resolves(&self, s_min: f64, s_max: f64, lo: f64, hi: f64) -> Result<()> {
        if self.t_min * s_max >= lo {
            return Err(Error::UnresolvedSpectrum(format!(
                "small-t side: t_min * s_max = {:.3e} must be below {lo}",
                self.t_min * s_max
            )));
        }
        if self.t_max * s_min <= hi {
            return Err(Error::UnresolvedSpectrum(format!(
                "large-t side: t_max * s_min = {:.3e} must exceed {hi}",
                self.t_max * s_min
            )));
        }
        Ok(())
    }
}

impl Default for LogTimeGrid {
    fn default() -> Self {
        Self::new(Self::DEFAULT_T_MIN, Self::DEFAULT_T_MAX, Self::DEFAULT_NODES)
            .expect("default grid is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(LogTimeGrid::new(0.0, 1.0, 10).is_err());
        assert!(LogTimeGrid::new(1.0, 1.0, 10).is_err());
        assert!(LogTimeGrid::new(1e-3, 1.0, 2).is_err());
    }

    #[test]
    fn nodes_increase_and_weights_positive() {
        let g = LogTimeGrid::default();
        assert_eq!(g.len(), 512);
        assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
        assert!(g.weights().iter().all(|&w| w > 0.0));
        let total: f64 = g.weights().iter().sum();
        assert!((total - libm::log(1e8)).abs() < 1e-10);
        let coarse: f64 = g.coarse_weights().iter().sum();
        assert!((coarse - total).abs() < 1e-10);
    }

    #[test]
    fn poisson_character_integral_is_quarter() {
        let g = LogTimeGrid::new(1e-4, 1e2, 512).unwrap();
        for m in [1.0, 3.0, 7.0] {
            let q = g.integrate(|t| {
                let a = TAU * t * m;
                a * a * libm::exp(-2.0 * a)
            });
            assert!((q.value - 0.25).abs() < 1e-4, "m={m}: {}", q.value);
            assert!(q.error < 1e-6);
        }
    }

    #[test]
    fn doubling_nodes_is_stable() {
        let g = LogTimeGrid::default();
        let f = |t: f64| t * t * libm::exp(-t);
        let a = g.integrate(f).value;
        let b = g.refined().integrate(f).value;
        assert!((a - 1.0).abs() < 1e-6);
        assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn radial_weights_reproduce_beta_integrals() {
        let g = LogTimeGrid::new(1e-9, 10.0, 2048).unwrap();
        let w = g.radial_weights();
        for n in [1.0f64, 2.0, 4.0] {
            let k = n * n;
            let got: f64 = g
                .nodes()
                .iter()
                .zip(&w)
                .map(|(&t, w)| {
                    let amp = k * libm::exp(-TAU * t * (k - 1.0));
                    w * amp * amp
                })
                .sum();
            let want = libm::pow(n, 4.0) / ((2.0 * k - 1.0) * 2.0 * k);
            assert!((got - want).abs() / want < 1e-6, "n={n} {got} {want}");
        }
    }

    #[test]
    fn resolution_check_names_side() {
        let g = LogTimeGrid::new(1e-2, 1e2, 64).unwrap();
        let e = g.check_resolves(1.0, 100.0, 0.1, 10.0).unwrap_err();
        assert!(format!("{e}").contains("small-t"));
        let e = g.check_resolves(0.01, 1.0, 0.1, 10.0).unwrap_err();
        assert!(format!("{e}").contains("large-t"));
        assert!(g.check_resolves(1.0, 1.0, 0.1, 10.0).is_ok());
    }
}
