//! Gauss quadrature rules and the normalized Hermite functions used for the
//! transverse mode profiles.

use std::f64::consts::PI;

/// Fills `out[0..=max_order]` with the normalized Hermite functions
/// `h_n(xi) = (2^n n! sqrt(pi))^(-1/2) H_n(xi) exp(-xi^2/2)`.
///
/// Uses the three-term recurrence on the normalized functions, which stays
/// finite for every argument a double can hold.
pub fn hermite_functions(xi: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = PI.powf(-0.25) * (-0.5 * xi * xi).exp();
    if out.len() > 1 {
        out[1] = 2f64.sqrt() * xi * out[0];
    }
    for n in 1..out.len() - 1 {
        let nf = n as f64;
        out[n + 1] = (2.0 / (nf + 1.0)).sqrt() * xi * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
    }
}

/// Value of the single normalized Hermite function `h_n(xi)`.
pub fn hermite_function(n: usize, xi: f64) -> f64 {
    let mut buf = vec![0.0; n + 1];
    hermite_functions(xi, &mut buf);
    buf[n]
}

/// Gauss-Hermite rule for weight `exp(-x^2)` on the real line.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// `weights[i] * exp(nodes[i]^2)`: the weights for integrating an
    /// unweighted function that already carries its own Gaussian decay.
    scaled: Vec<f64>,
}

impl GaussHermite {
    /// Builds an `n`-point rule by Newton iteration on the orthonormal
    /// Hermite polynomials.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Hermite rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let pim4 = PI.powf(-0.25);
        let nf = n as f64;
        let half = n.div_ceil(2);
        let mut z = 0.0;
        for i in 0..half {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * nodes[0],
                3 => 1.91 * z - 0.91 * nodes[1],
                _ => 2.0 * z - nodes[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..100 {
                let (p1, d) = orthonormal_hermite(n, z, pim4);
                pp = d;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            let (_, d) = orthonormal_hermite(n, z, pim4);
            pp = if d != 0.0 { d } else { pp };
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            weights[i] = 2.0 / (pp * pp);
            weights[n - 1 - i] = weights[i];
        }
        // ascending order
        nodes.reverse();
        weights.reverse();
        let scaled = nodes.iter().zip(&weights).map(|(x, w)| (w.ln() + x * x).exp()).collect();
        GaussHermite { nodes, weights, scaled }
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

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weights for `∫ f(x) dx` when `f` decays like a Gaussian itself.
    pub fn scaled_weights(&self) -> &[f64] {
        &self.scaled
    }

    /// `∫ exp(-x^2) f(x) dx`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Orthonormal Hermite polynomial of degree `n` at `z` and its derivative.
fn orthonormal_hermite(n: usize, z: f64, pim4: f64) -> (f64, f64) {
    let mut p1 = pim4;
    let mut p2 = 0.0;
    for j in 0..n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
    }
    (p1, (2.0 * n as f64).sqrt() * p2)
}

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut pp = 1.0;
            for _ in 0..100 {
                let (p1, d) = legendre(n, z);
                pp = d;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 {
                    break;
                }
            }
            let (_, d) = legendre(n, z);
            if d != 0.0 {
                pp = d;
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
            weights[n - 1 - i] = weights[i];
        }
        GaussLegendre { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫_a^b f(x) dx`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        half * self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(mid + half * x)).sum::<f64>()
    }

    /// Composite rule over `panels` equal sub-intervals of `[a, b]`.
    pub fn integrate_composite<F: Fn(f64) -> f64>(&self, a: f64, b: f64, panels: usize, f: F) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|p| {
                let lo = a + h * p as f64;
                self.integrate(lo, lo + h, &f)
            })
            .sum()
    }
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p1 = 1.0;
    let mut p2 = 0.0;
    for j in 0..n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
    }
    let nf = n as f64;
    (p1, nf * (z * p1 - p2) / (z * z - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hermite_rule_moments() {
        for n in [16, 32, 64, 128] {
            let q = GaussHermite::new(n);
            assert_relative_eq!(q.integrate(|_| 1.0), PI.sqrt(), max_relative = 1e-13);
            assert_relative_eq!(q.integrate(|x| x * x), PI.sqrt() / 2.0, max_relative = 1e-13);
            assert_relative_eq!(q.integrate(|x| x.powi(4)), 0.75 * PI.sqrt(), max_relative = 1e-12);
            let e = std::f64::consts::E;
            assert_relative_eq!(q.integrate(|x| x.cos()), PI.sqrt() / e.powf(0.25), max_relative = 1e-12);
        }
    }

    #[test]
    fn nodes_are_sorted_and_symmetric() {
        let q = GaussHermite::new(65);
        assert!(q.nodes().windows(2).all(|w| w[0] < w[1]));
        assert!(q.nodes()[32].abs() < 1e-14);
        for i in 0..65 {
            assert_relative_eq!(q.nodes()[i], -q.nodes()[64 - i], epsilon = 1e-14);
        }
    }

    #[test]
    fn hermite_functions_are_orthonormal() {
        let q = GaussHermite::new(64);
        let mut buf = [0.0; 9];
        let mut gram = [[0.0; 9]; 9];
        for (&x, &w) in q.nodes().iter().zip(q.scaled_weights()) {
            hermite_functions(x, &mut buf);
            for i in 0..9 {
                for j in 0..9 {
                    gram[i][j] += w * buf[i] * buf[j];
                }
            }
        }
        for (i, row) in gram.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((v - expected).abs() < 1e-12, "({i},{j}) = {v}");
            }
        }
    }

    #[test]
    fn hermite_function_matches_explicit_polynomial() {
        // H_2 = 4x^2 - 2, norm (2^2 2! sqrt(pi))^(-1/2)
        let x = 0.7;
        let expected = (4.0 * x * x - 2.0) * (-x * x / 2.0f64).exp() / (8.0 * PI.sqrt()).sqrt();
        assert_relative_eq!(hermite_function(2, x), expected, max_relative = 1e-14);
    }

    #[test]
    fn legendre_rule() {
        let q = GaussLegendre::new(10);
        assert_relative_eq!(q.integrate(0.0, 1.0, |x| x.powi(19)), 1.0 / 20.0, max_relative = 1e-13);
        assert_relative_eq!(q.integrate(0.0, PI, f64::sin), 2.0, max_relative = 1e-13);
        assert_relative_eq!(q.integrate_composite(0.0, 10.0, 7, |x| x.exp()), 10f64.exp() - 1.0, max_relative = 1e-12);
    }
}
