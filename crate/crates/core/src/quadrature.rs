//! Gauss-Legendre rules on `[-1, 1]` and their tensor products.

/// `n`-point Gauss-Legendre rule as `(points, weights)`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "quadrature needs at least one point");
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        points[i] = -x;
        points[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        points[n / 2] = 0.0;
    }
    (points, weights)
}

/// Value and derivative of the Legendre polynomial `P_n` at `x`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tensor-product rule with `counts[d]` points in direction `d`.
#[derive(Debug, Clone)]
pub struct TensorRule {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl TensorRule {
    pub fn new(counts: &[usize]) -> Self {
        let rules: Vec<_> = counts.iter().map(|&n| gauss_legendre(n)).collect();
        let total: usize = counts.iter().product();
        let mut points = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        for q in 0..total {
            let mut rest = q;
            let mut pt = Vec::with_capacity(counts.len());
            let mut w = 1.0;
            for (d, &n) in counts.iter().enumerate() {
                let i = rest % n;
                rest /= n;
                pt.push(rules[d].0[i]);
                w *= rules[d].1[i];
            }
            points.push(pt);
            weights.push(w);
        }
        TensorRule { points, weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}
