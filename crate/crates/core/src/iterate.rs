//! Fixed-point iteration `x_{n+1} = T_{A_γ,B_γ} x_n`.

use crate::error::{Error, Result};
use crate::linalg::Point;
use crate::splitting::{Order, SplitPair, TForm};

/// Number of trailing residual ratios averaged into the rate estimate.
pub const RATE_WINDOW: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    /// `x_0, …, x_N`
    pub iterates: Vec<Point>,
    /// `J_{A_γ} x_n` for every iterate.
    pub shadows: Vec<Point>,
    /// `‖x_{n+1} − x_n‖`, length `N`.
    pub residuals: Vec<f64>,
    pub converged: bool,
    /// Geometric mean of the last ratios `r_{n+1} / r_n`; `None` with fewer than two nonzero residuals.
    pub rate: Option<f64>,
}

impl IterationTrace {
    pub fn last(&self) -> &Point {
        self.iterates.last().expect("trace holds x_0")
    }

    pub fn steps(&self) -> usize {
        self.residuals.len()
    }
}

/// Iterates from `x0` until `‖x_{n+1} − x_n‖ ≤ stop_tol` or `max_iters` steps.
pub fn iterate(pair: &SplitPair, x0: &Point, max_iters: usize, stop_tol: f64) -> Result<IterationTrace> {
    if max_iters == 0 {
        return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
    }
    if !(stop_tol > 0.0) {
        return Err(Error::InvalidParameter(format!("stop_tol must be positive, got {stop_tol}")));
    }
    let mut iterates = vec![x0.clone()];
    let mut shadows = vec![pair.jg_a().eval(x0)?];
    let mut residuals = Vec::new();
    let mut x = x0.clone();
    for _ in 0..max_iters {
        let next = pair.aac(Order::Forward, TForm::Def, &x)?;
        if !next.is_finite() {
            return Err(Error::NonFinite("iterate"));
        }
        let r = next.distance(&x);
        shadows.push(pair.jg_a().eval(&next)?);
        iterates.push(next.clone());
        residuals.push(r);
        x = next;
        if r <= stop_tol {
            break;
        }
    }
    let converged = residuals.last().is_some_and(|r| *r <= stop_tol);
    let rate = estimate_rate(&residuals);
    Ok(IterationTrace { iterates, shadows, residuals, converged, rate })
}

/// Geometric mean of the last [`RATE_WINDOW`] consecutive residual ratios.
pub fn estimate_rate(residuals: &[f64]) -> Option<f64> {
    let ratios: Vec<f64> = residuals
        .windows(2)
        .filter(|w| w[0] > 0.0 && w[1] > 0.0)
        .map(|w| w[1] / w[0])
        .collect();
    if ratios.is_empty() {
        return None;
    }
    let tail = &ratios[ratios.len().saturating_sub(RATE_WINDOW)..];
    Some((tail.iter().map(|r| r.ln()).sum::<f64>() / tail.len() as f64).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::ModelInstance;
    use crate::operator::{AacParams, Operator, PerturbationParams};

    #[test]
    fn worked_instance_converges() {
        let pair = ModelInstance::worked().split_pair();
        let x0 = Point::new(vec![2.0, 0.0]).unwrap();
        let trace = iterate(&pair, &x0, 60, 1e-10).unwrap();
        assert!(trace.converged);
        let star = Point::new(vec![2.0 / 3.0, -1.0]).unwrap();
        assert!(trace.last().distance(&star) <= 1e-8);
        assert!((trace.rate.unwrap() - 0.625).abs() <= 0.01);
        assert_eq!(trace.iterates.len(), trace.residuals.len() + 1);
        assert_eq!(trace.shadows.len(), trace.iterates.len());
        assert!(trace.residuals.windows(2).skip(1).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn scalar_contraction() {
        let gamma = 0.3;
        let pair = SplitPair::new(
            &Operator::constant(Point::zeros(2)),
            &Operator::constant(Point::zeros(2)),
            PerturbationParams::new(gamma, Point::zeros(2)).unwrap(),
            AacParams::new(1.0).unwrap(),
        )
        .unwrap();
        let x0 = Point::new(vec![1.0, -4.0]).unwrap();
        let trace = iterate(&pair, &x0, 200, 1e-12).unwrap();
        let c = (2.0 * gamma - 1.0_f64).powi(2);
        assert!(trace.iterates[1].distance(&(&x0 * c)) <= 1e-15);
        assert!(trace.converged);
        assert!((trace.rate.unwrap() - c).abs() <= 1e-9);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let pair = ModelInstance::worked().split_pair();
        let trace = iterate(&pair, &Point::zeros(2), 3, 1e-12).unwrap();
        assert!(!trace.converged);
        assert_eq!(trace.steps(), 3);
        assert!(iterate(&pair, &Point::zeros(2), 0, 1e-12).is_err());
        assert!(iterate(&pair, &Point::zeros(2), 5, 0.0).is_err());
    }
}
