//! Small dense least-squares tools: Householder QR, polynomial fits and a
//! Levenberg-Marquardt driver with caller-supplied Jacobians.

/// Solves the linear least-squares problem `min ‖A p − y‖` by Householder QR.
///
/// `rows` holds the design matrix row by row. Returns `None` when `A` is
/// rank deficient to working precision.
pub fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Option<Vec<f64>> {
    let m = rows.len();
    let n = rows.first()?.len();
    if m < n || y.len() != m {
        return None;
    }
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    let mut b = y.to_vec();
    let norm_a = a.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    for k in 0..n {
        let alpha = (k..m).map(|i| a[i][k] * a[i][k]).sum::<f64>().sqrt();
        if alpha <= 1e-14 * norm_a {
            return None;
        }
        let alpha = if a[k][k] > 0.0 { -alpha } else { alpha };
        let mut v: Vec<f64> = (k..m).map(|i| a[i][k]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for j in k..n {
            let dot: f64 = (k..m).map(|i| v[i - k] * a[i][j]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k..m {
                a[i][j] -= f * v[i - k];
            }
        }
        let dot: f64 = (k..m).map(|i| v[i - k] * b[i]).sum();
        let f = 2.0 * dot / vnorm2;
        for i in k..m {
            b[i] -= f * v[i - k];
        }
    }
    let mut p = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = ((k + 1)..n).map(|j| a[k][j] * p[j]).sum();
        p[k] = (b[k] - s) / a[k][k];
    }
    Some(p)
}

/// Gaussian elimination with partial pivoting for a small square system.
pub fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[piv][k] == 0.0 || !a[piv][k].is_finite() {
            return None;
        }
        a.swap(k, piv);
        b.swap(k, piv);
        for i in (k + 1)..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = ((k + 1)..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    Some(x)
}

/// Polynomial in the scaled variable `u = (x − center)/scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub center: f64,
    pub scale: f64,
    /// Coefficients of `u^k`, lowest order first.
    pub coeffs: Vec<f64>,
}

impl Polynomial {
    /// Least-squares fit of the given degree over `(x, y)` samples, centred on
    /// `center` and scaled by the half-span of the samples.
    pub fn fit(xs: &[f64], ys: &[f64], degree: usize, center: f64) -> Option<Self> {
        Self::fit_powers(xs, ys, &(0..=degree).collect::<Vec<_>>(), center)
    }

    /// Fit restricted to the listed powers of `u`; unlisted coefficients are zero.
    pub fn fit_powers(xs: &[f64], ys: &[f64], powers: &[usize], center: f64) -> Option<Self> {
        let scale = xs.iter().map(|x| (x - center).abs()).fold(0.0, f64::max);
        if scale == 0.0 || xs.len() < powers.len() {
            return None;
        }
        let rows: Vec<Vec<f64>> = xs.iter().map(|x| powers.iter().map(|&p| ((x - center) / scale).powi(p as i32)).collect()).collect();
        let sol = least_squares(&rows, ys)?;
        let degree = powers.iter().copied().max().unwrap_or(0);
        let mut coeffs = vec![0.0; degree + 1];
        for (&p, c) in powers.iter().zip(sol) {
            coeffs[p] = c;
        }
        Some(Polynomial { center, scale, coeffs })
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.derivative(x, 0)
    }

    /// `order`-th derivative with respect to `x` (not `u`).
    pub fn derivative(&self, x: f64, order: usize) -> f64 {
        let u = (x - self.center) / self.scale;
        let mut sum = 0.0;
        for (k, &c) in self.coeffs.iter().enumerate().skip(order) {
            let falling: f64 = ((k - order + 1)..=k).map(|v| v as f64).product();
            sum += c * falling * u.powi((k - order) as i32);
        }
        sum / self.scale.powi(order as i32)
    }

    /// Real stationary points in `[lo, hi]`, found by scanning `p'` for sign
    /// changes and polishing with bisection.
    pub fn stationary_points(&self, lo: f64, hi: f64) -> Vec<f64> {
        let n = 400;
        let f = |x: f64| self.derivative(x, 1);
        let mut out = Vec::new();
        let mut x0 = lo;
        let mut f0 = f(x0);
        for i in 1..=n {
            let x1 = lo + (hi - lo) * i as f64 / n as f64;
            let f1 = f(x1);
            if f0 == 0.0 {
                out.push(x0);
            } else if f0 * f1 < 0.0 {
                out.push(bisect(&f, x0, x1, f0));
            }
            x0 = x1;
            f0 = f1;
        }
        if f0 == 0.0 {
            out.push(x0);
        }
        out
    }
}

/// Bisection to full double precision; `f(a)` must differ in sign from `f(b)`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Outcome of a Levenberg-Marquardt run.
#[derive(Debug, Clone, PartialEq)]
pub struct LmReport {
    pub params: Vec<f64>,
    /// `½‖r‖²` at the solution.
    pub cost: f64,
    pub iterations: usize,
    pub initial_gradient: f64,
    pub final_gradient: f64,
    pub converged: bool,
}

/// Minimizes `½‖r(p)‖²`. `model(p)` returns the residual vector and its
/// Jacobian (one row per residual).
pub fn levenberg_marquardt<F>(model: F, p0: &[f64], max_iter: usize) -> LmReport
where
    F: Fn(&[f64]) -> (Vec<f64>, Vec<Vec<f64>>),
{
    let n = p0.len();
    let mut p = p0.to_vec();
    let (mut r, mut jac) = model(&p);
    let mut cost = 0.5 * r.iter().map(|v| v * v).sum::<f64>();
    let gradient = |r: &[f64], jac: &[Vec<f64>]| -> Vec<f64> { (0..n).map(|k| jac.iter().zip(r).map(|(row, ri)| row[k] * ri).sum()).collect() };
    let norm = |g: &[f64]| g.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut g = gradient(&r, &jac);
    let initial_gradient = norm(&g);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = initial_gradient == 0.0 || cost == 0.0;
    while !converged && iterations < max_iter {
        iterations += 1;
        let mut jtj = vec![vec![0.0; n]; n];
        for row in &jac {
            for a in 0..n {
                for b in 0..n {
                    jtj[a][b] += row[a] * row[b];
                }
            }
        }
        let mut improved = false;
        for _ in 0..40 {
            let mut a = jtj.clone();
            for k in 0..n {
                a[k][k] += lambda * jtj[k][k].max(1e-30);
            }
            let Some(step) = solve_square(a, g.iter().map(|v| -v).collect()) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(&step).map(|(a, b)| a + b).collect();
            let (rt, jt) = model(&trial);
            let ct = 0.5 * rt.iter().map(|v| v * v).sum::<f64>();
            if ct.is_finite() && ct <= cost {
                let step_small = step.iter().zip(&trial).all(|(s, t)| s.abs() <= 1e-15 * t.abs().max(1e-12));
                let cost_drop = cost - ct;
                p = trial;
                r = rt;
                jac = jt;
                cost = ct;
                g = gradient(&r, &jac);
                lambda = (lambda / 10.0).max(1e-15);
                improved = true;
                if step_small || cost_drop <= 1e-30 * cost.max(1e-300) {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if norm(&g) <= 1e-12 * initial_gradient || cost <= 1e-32 {
            converged = true;
        }
        if !improved {
            // no downhill step at any damping: a (numerical) stationary point
            converged = norm(&g) <= 1e-9 * initial_gradient || cost <= 1e-28;
            break;
        }
    }
    let final_gradient = norm(&g);
    if !converged && final_gradient <= 1e-9 * initial_gradient {
        converged = true;
    }
    LmReport { params: p, cost, iterations, initial_gradient, final_gradient, converged }
}
