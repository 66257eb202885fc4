//! Brute-force cross-check: projected gradient descent with Armijo steps on
//! the discrete functional, directly in node values, from `u ∝ 1` and random
//! smooth positive starts. Slow but free of the Newton machinery.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::LogSobolevProblem;
use crate::geometry::ScalarField;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleOptions {
    pub starts: usize,
    pub seed: u64,
    pub max_iterations: usize,
    /// Stop once the projected gradient norm drops below this.
    pub gradient_tolerance: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { starts: 4, seed: 1, max_iterations: 200_000, gradient_tolerance: 1e-8 }
    }
}

impl LogSobolevProblem {
    /// Smallest functional value reached over the starts.
    pub fn projected_gradient_minimum(&self, opts: &OracleOptions) -> f64 {
        let mut starts = vec![self.uniform()];
        for i in 0..opts.starts {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(i as u64));
            starts.push(self.random_start(&mut rng));
        }
        starts
            .into_iter()
            .map(|u| self.projected_descent(u, opts))
            .fold(f64::INFINITY, f64::min)
    }

    fn projected_descent(&self, mut u: Vec<f64>, opts: &OracleOptions) -> f64 {
        let grid = self.snap.grid().clone();
        let q = self.quadrature();
        let w = self.weight();
        let four_t = 4.0 * self.t;
        let a = self.coefficient.values().to_vec();
        let mut value = self.functional_of(&u);
        let mut step = 1e-3;
        for _ in 0..opts.max_iterations {
            let lu = self.apply_l(&ScalarField::from_raw(&grid, u.clone()));
            // gradient with respect to the w·dμ inner product
            let g: Vec<f64> = (0..u.len())
                .map(|i| 2.0 * (-four_t * lu[i] + a[i] * u[i] - 2.0 * u[i] * u[i].ln() - u[i]))
                .collect();
            let along = w * crate::geometry::neumaier_sum((0..u.len()).map(|i| g[i] * u[i] * q[i]));
            let p: Vec<f64> = (0..u.len()).map(|i| g[i] - along * u[i]).collect();
            let size = (w * p.iter().zip(&q).map(|(x, y)| x * x * y).sum::<f64>()).sqrt();
            if size < opts.gradient_tolerance {
                break;
            }
            let mut moved = false;
            while step > 1e-16 {
                let trial = self.normalized(u.iter().zip(&p).map(|(v, d)| v - step * d).collect());
                let f = self.functional_of(&trial);
                if f <= value - 1e-4 * step * size * size {
                    u = trial;
                    value = f;
                    step *= 1.5;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if !moved {
                break;
            }
        }
        value
    }
}
