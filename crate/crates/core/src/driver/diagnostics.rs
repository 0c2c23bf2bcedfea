//! Convergence-condition products from the multi-modes theory.
//!
//! The analysis constants are unknown; they enter as user-supplied
//! stand-ins. A value `>= 1` only means convergence is not guaranteed by
//! the theory, so it produces a warning, never an error.

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticInputs {
    pub epsilon: f64,
    pub k: f64,
    pub c0: f64,
    pub c0_hat: f64,
    pub mu: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    /// `7 eps sqrt(C0) (1+k) (1+mu)`, finite-modes expansion.
    pub sigma: f64,
    /// `14 Ĉ0 sqrt(C0) (1+k) (1+mu) eps`, IP-DG mode error.
    pub sigma_hat: f64,
    /// `4 Ĉ0 (1+k) eps`, discrete mode stability.
    pub sigma_tilde: f64,
    pub mu: f64,
    pub warnings: Vec<String>,
}

pub fn diagnostics(inp: &DiagnosticInputs) -> Diagnostics {
    let one_k = 1.0 + inp.k;
    let one_mu = 1.0 + inp.mu;
    let sigma = 7.0 * inp.epsilon * inp.c0.sqrt() * one_k * one_mu;
    let sigma_hat = 14.0 * inp.c0_hat * inp.c0.sqrt() * one_k * one_mu * inp.epsilon;
    let sigma_tilde = 4.0 * inp.c0_hat * one_k * inp.epsilon;
    let warnings = [("sigma", sigma), ("sigma_hat", sigma_hat), ("sigma_tilde", sigma_tilde)]
        .iter()
        .filter(|(_, v)| *v >= 1.0)
        .map(|(name, v)| format!("{name} = {v:.4} >= 1: mode convergence not guaranteed"))
        .collect();
    Diagnostics {
        sigma,
        sigma_hat,
        sigma_tilde,
        mu: inp.mu,
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs(epsilon: f64) -> DiagnosticInputs {
        DiagnosticInputs {
            epsilon,
            k: 2.0,
            c0: 1.0,
            c0_hat: 1.0,
            mu: 1.0,
        }
    }

    #[test]
    fn zero_epsilon_has_no_warnings() {
        let d = diagnostics(&inputs(0.0));
        assert_eq!((d.sigma, d.sigma_hat, d.sigma_tilde), (0.0, 0.0, 0.0));
        assert!(d.warnings.is_empty());
    }

    #[test]
    fn sigma_arithmetic() {
        let d = diagnostics(&inputs(0.1));
        assert!((d.sigma - 4.2).abs() < 1e-12);
        assert!((d.sigma_hat - 8.4).abs() < 1e-12);
        assert!((d.sigma_tilde - 1.2).abs() < 1e-12);
    }

    #[test]
    fn large_epsilon_warns() {
        let d = diagnostics(&inputs(0.9));
        assert_eq!(d.warnings.len(), 3);
    }
}
