use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::spin_algebra::BlochVector;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    for i in 0..order.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_order(x) and its derivative
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = order as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

/// Product rule on the unit sphere: Gauss-Legendre in `cos(theta)` times a uniform
/// azimuthal grid, normalized to the uniform probability measure.
#[derive(Clone, Debug)]
pub struct SphereQuadrature {
    order: usize,
    nodes: Vec<(BlochVector, f64)>,
}

impl SphereQuadrature {
    /// `order` Gauss-Legendre nodes times `order` azimuthal nodes; exact for
    /// polynomials in the direction components up to degree `order - 1`.
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(domain("quadrature order must be positive"));
        }
        let (zs, ws) = gauss_legendre(order);
        let mut nodes = Vec::with_capacity(order * order);
        for (z, w) in zs.iter().zip(&ws) {
            let rho = (1.0 - z * z).max(0.0).sqrt();
            for l in 0..order {
                let phi = 2.0 * PI * (l as f64 + 0.5) / order as f64;
                nodes.push((
                    BlochVector::new(rho * phi.cos(), rho * phi.sin(), *z),
                    w / (2.0 * order as f64),
                ));
            }
        }
        Ok(Self { order, nodes })
    }

    /// Default rule for an `n`-qubit integrand: `(2N + 4) x (2N + 4)` nodes.
    pub fn for_qubits(n: u32) -> Self {
        Self::new(2 * n as usize + 4).expect("positive order")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn exact_degree(&self) -> usize {
        self.order - 1
    }

    pub fn nodes(&self) -> &[(BlochVector, f64)] {
        &self.nodes
    }

    pub fn integrate(&self, f: impl Fn(&BlochVector) -> f64) -> f64 {
        self.nodes.iter().map(|(v, w)| w * f(v)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn double_factorial(k: i64) -> f64 {
        if k <= 0 {
            1.0
        } else {
            k as f64 * double_factorial(k - 2)
        }
    }

    /// Uniform-measure average of x^a y^b z^c over the sphere.
    fn monomial_average(a: u32, b: u32, c: u32) -> f64 {
        if a % 2 == 1 || b % 2 == 1 || c % 2 == 1 {
            return 0.0;
        }
        double_factorial(a as i64 - 1)
            * double_factorial(b as i64 - 1)
            * double_factorial(c as i64 - 1)
            / double_factorial((a + b + c) as i64 + 1)
    }

    #[test]
    fn legendre_rule_integrates_polynomials() {
        for order in 1..30 {
            let (x, w) = gauss_legendre(order);
            assert_abs_diff_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-13);
            for deg in 0..(2 * order) {
                let exact = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg as f64 + 1.0)
                };
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                assert_abs_diff_eq!(got, exact, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn sphere_rule_is_exact_to_declared_degree() {
        for order in [1usize, 4, 9, 16] {
            let q = SphereQuadrature::new(order).unwrap();
            assert_abs_diff_eq!(q.integrate(|_| 1.0), 1.0, epsilon = 1e-12);
            assert!(q.nodes().iter().all(|(_, w)| *w > 0.0));
            let deg = q.exact_degree() as u32;
            for a in 0..=deg {
                for b in 0..=deg - a {
                    for c in 0..=deg - a - b {
                        let got = q.integrate(|v| {
                            v.x.powi(a as i32) * v.y.powi(b as i32) * v.z.powi(c as i32)
                        });
                        assert_abs_diff_eq!(got, monomial_average(a, b, c), epsilon = 1e-13);
                    }
                }
            }
        }
    }
}
