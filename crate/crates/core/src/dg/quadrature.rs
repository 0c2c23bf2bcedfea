//! Tensor Gauss-Legendre rules on the reference cube and reference square.

use crate::{Error, Result};

/// Gauss-Legendre nodes and weights on `[0, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// `q`-point rule, exact for polynomials of degree `2q - 1`.
    pub fn new(q: usize) -> Result<Self> {
        if q == 0 || q > 32 {
            return Err(Error::config(format!("quadrature order {q} not in 1..=32")));
        }
        let mut nodes = vec![0.0; q];
        let mut weights = vec![0.0; q];
        // Newton iteration on P_q starting from the Chebyshev guess.
        for i in 0..q.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(q, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(q, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // map [-1,1] -> [0,1]
            nodes[i] = 0.5 * (1.0 - x);
            nodes[q - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = 0.5 * w;
            weights[q - 1 - i] = 0.5 * w;
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = if n == 0 {
        0.0
    } else {
        n as f64 * (x * p1 - p0) / (x * x - 1.0)
    };
    (p, dp)
}

/// Points and weights of a tensor rule on the unit cube (`dim = 3`) or the
/// unit square (`dim = 2`). Weights sum to one.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn cube(q: usize) -> Result<Self> {
        let g = GaussLegendre::new(q)?;
        let mut points = Vec::with_capacity(q * q * q);
        let mut weights = Vec::with_capacity(q * q * q);
        for (a, wa) in g.nodes.iter().zip(&g.weights) {
            for (b, wb) in g.nodes.iter().zip(&g.weights) {
                for (c, wc) in g.nodes.iter().zip(&g.weights) {
                    points.push([*a, *b, *c]);
                    weights.push(wa * wb * wc);
                }
            }
        }
        Ok(Self { points, weights })
    }

    /// Rule on the unit square; the third coordinate is unused (zero).
    pub fn square(q: usize) -> Result<Self> {
        let g = GaussLegendre::new(q)?;
        let mut points = Vec::with_capacity(q * q);
        let mut weights = Vec::with_capacity(q * q);
        for (a, wa) in g.nodes.iter().zip(&g.weights) {
            for (b, wb) in g.nodes.iter().zip(&g.weights) {
                points.push([*a, *b, 0.0]);
                weights.push(wa * wb);
            }
        }
        Ok(Self { points, weights })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate_1d(q: usize, f: impl Fn(f64) -> f64) -> f64 {
        let g = GaussLegendre::new(q).unwrap();
        g.nodes.iter().zip(&g.weights).map(|(x, w)| w * f(*x)).sum()
    }

    #[test]
    fn rejects_bad_orders() {
        assert!(GaussLegendre::new(0).is_err());
        assert!(GaussLegendre::new(33).is_err());
    }

    #[test]
    fn exact_up_to_degree_2q_minus_1() {
        for q in 1..=8 {
            for d in 0..2 * q {
                let got = integrate_1d(q, |x| x.powi(d as i32));
                let want = 1.0 / (d as f64 + 1.0);
                assert!((got - want).abs() < 1e-14, "q={q} d={d}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn weights_positive_and_sum_to_one() {
        for q in 1..=8 {
            let r = QuadratureRule::cube(q).unwrap();
            assert_eq!(r.len(), q * q * q);
            assert!(r.weights.iter().all(|&w| w > 0.0));
            assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            let s = QuadratureRule::square(q).unwrap();
            assert!((s.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn two_point_cube_rule_integrates_cubic_monomials() {
        let r = QuadratureRule::cube(2).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    let got: f64 = r
                        .points
                        .iter()
                        .zip(&r.weights)
                        .map(|(p, w)| w * p[0].powi(a) * p[1].powi(b) * p[2].powi(c))
                        .sum();
                    let want = 1.0 / ((a + 1) * (b + 1) * (c + 1)) as f64;
                    assert!((got - want).abs() < 1e-14 * want.max(1.0));
                }
            }
        }
    }
}
