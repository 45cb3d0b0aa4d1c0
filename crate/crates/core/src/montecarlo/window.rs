//! The small-frequency window `max_n ||xi^{(n)}|| N^{n/2 - eps_n} <= 1`.

use serde::{Deserialize, Serialize};

use crate::algebra::GradedBasis;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyWindow {
    /// `eps_1 > eps_2 > ... > eps_s > 0`.
    pub epsilons: Vec<f64>,
}

impl FrequencyWindow {
    /// Requires `eps_n > n eps_{n+1} > 0`.
    pub fn new(epsilons: Vec<f64>) -> Result<Self> {
        if epsilons.is_empty() || epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(Error::InvalidConfig("epsilons must be positive".into()));
        }
        for (i, w) in epsilons.windows(2).enumerate() {
            let n = (i + 1) as f64;
            if w[0] <= n * w[1] {
                return Err(Error::InvalidConfig(format!(
                    "eps_{} = {} must exceed {} * eps_{} = {}",
                    i + 1,
                    w[0],
                    i + 1,
                    i + 2,
                    n * w[1]
                )));
            }
        }
        Ok(FrequencyWindow { epsilons })
    }

    /// `eps_n = 4^{s-n} / 100`.
    pub fn default_for(step: usize) -> Self {
        FrequencyWindow {
            epsilons: (1..=step).map(|n| 4f64.powi((step - n) as i32) * 1e-2).collect(),
        }
    }

    /// `max_n ||xi^{(n)}|| N^{n/2 - eps_n}`; the window is where this is at
    /// most one.
    pub fn gauge(&self, basis: &GradedBasis, xi: &[f64], n_walk: usize) -> Result<f64> {
        if self.epsilons.len() != basis.step() {
            return Err(Error::InvalidConfig(format!(
                "{} epsilons for a step-{} algebra",
                self.epsilons.len(),
                basis.step()
            )));
        }
        let nw = n_walk as f64;
        Ok((1..=basis.step())
            .map(|lvl| {
                let norm = xi[basis.level_range(lvl)].iter().map(|v| v * v).sum::<f64>().sqrt();
                norm * nw.powf(lvl as f64 / 2.0 - self.epsilons[lvl - 1])
            })
            .fold(0.0, f64::max))
    }

    pub fn contains(&self, basis: &GradedBasis, xi: &[f64], n_walk: usize) -> Result<bool> {
        Ok(self.gauge(basis, xi, n_walk)? <= 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn default_chain_is_valid() {
        for s in 1..=3 {
            let w = FrequencyWindow::default_for(s);
            assert!(FrequencyWindow::new(w.epsilons.clone()).is_ok());
        }
        assert!(FrequencyWindow::new(vec![0.1, 0.1]).is_err());
        assert!(FrequencyWindow::new(vec![0.1, 0.05, 0.025]).is_err());
        assert!(FrequencyWindow::new(vec![0.1, 0.04, 0.01]).is_ok());
    }

    #[test]
    fn membership() {
        let basis = catalog::heisenberg3().algebra.basis().clone();
        let w = FrequencyWindow::default_for(2);
        let n = 64;
        // eta N^{-n/2} is inside exactly when ||eta^{(n)}|| <= N^{eps_n}
        let inside = [0.5 / 8.0, 0.0, 1.0 / 64.0];
        assert!(w.contains(&basis, &inside, n).unwrap());
        let outside = [2.0 / 8.0, 0.0, 0.0];
        assert!(!w.contains(&basis, &outside, n).unwrap());
        let g = w.gauge(&basis, &[1.0 / 8.0, 0.0, 0.0], n).unwrap();
        assert!((g - 64f64.powf(-0.04)).abs() < 1e-12);
    }
}
