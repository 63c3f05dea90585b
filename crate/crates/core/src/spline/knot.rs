//! Open knot vectors and univariate B-spline basis evaluation.

use serde::{Deserialize, Serialize};

use crate::error::{IgaError, Result};

/// A non-decreasing, open knot vector together with its polynomial degree.
///
/// The number of basis functions is `knots.len() - degree - 1`. Both end knots
/// are repeated exactly `degree + 1` times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawKnotVector", into = "RawKnotVector")]
pub struct KnotVector {
    knots: Vec<f64>,
    degree: usize,
}

#[derive(Serialize, Deserialize)]
struct RawKnotVector {
    degree: usize,
    knots: Vec<f64>,
}

impl TryFrom<RawKnotVector> for KnotVector {
    type Error = IgaError;
    fn try_from(raw: RawKnotVector) -> Result<Self> {
        KnotVector::new(raw.knots, raw.degree)
    }
}

impl From<KnotVector> for RawKnotVector {
    fn from(kv: KnotVector) -> Self {
        RawKnotVector { degree: kv.degree, knots: kv.knots }
    }
}

/// Non-zero basis values and derivatives on one knot span.
///
/// `ders[k][j]` is the `k`-th derivative of basis function `span - degree + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisEval {
    pub span: usize,
    pub ders: Vec<Vec<f64>>,
}

impl BasisEval {
    pub fn values(&self) -> &[f64] {
        &self.ders[0]
    }

    /// Global index of the first non-zero basis function.
    pub fn first_index(&self) -> usize {
        self.span + 1 - self.ders[0].len()
    }
}

impl KnotVector {
    pub fn new(knots: Vec<f64>, degree: usize) -> Result<Self> {
        let p = degree;
        if knots.len() < 2 * (p + 1) {
            return Err(IgaError::KnotVector(format!(
                "{} knots is too few for degree {p}",
                knots.len()
            )));
        }
        if knots.iter().any(|k| !k.is_finite()) {
            return Err(IgaError::KnotVector("non-finite knot".into()));
        }
        if knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(IgaError::KnotVector("knots must be non-decreasing".into()));
        }
        let first = knots[0];
        let last = knots[knots.len() - 1];
        if !(last > first) {
            return Err(IgaError::KnotVector("knot range has zero length".into()));
        }
        let lead = knots.iter().take_while(|&&k| k == first).count();
        let trail = knots.iter().rev().take_while(|&&k| k == last).count();
        if lead != p + 1 || trail != p + 1 {
            return Err(IgaError::KnotVector(format!(
                "not open: end multiplicities {lead} and {trail}, expected {}",
                p + 1
            )));
        }
        let mut i = 0;
        while i < knots.len() {
            let m = knots[i..].iter().take_while(|&&k| k == knots[i]).count();
            if m > p + 1 {
                return Err(IgaError::KnotVector(format!(
                    "knot {} has multiplicity {m} > degree + 1",
                    knots[i]
                )));
            }
            i += m;
        }
        Ok(KnotVector { knots, degree })
    }

    /// Open uniform knot vector on `[lo, hi]` with `spans` equal spans.
    pub fn uniform(degree: usize, spans: usize, lo: f64, hi: f64) -> Result<Self> {
        if spans == 0 {
            return Err(IgaError::Argument("at least one span required".into()));
        }
        let mut knots = vec![lo; degree + 1];
        for s in 1..spans {
            knots.push(lo + (hi - lo) * s as f64 / spans as f64);
        }
        knots.extend(std::iter::repeat_n(hi, degree + 1));
        KnotVector::new(knots, degree)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_basis(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    pub fn first(&self) -> f64 {
        self.knots[0]
    }

    pub fn last(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    /// Span index `i` with `knots[i] <= xi < knots[i+1]`; the last knot maps into
    /// the final non-degenerate span.
    pub fn find_span(&self, xi: f64) -> Result<usize> {
        let (lo, hi) = (self.first(), self.last());
        if !(xi >= lo && xi <= hi) {
            return Err(IgaError::Domain { value: xi, lo, hi });
        }
        let n = self.num_basis();
        if xi >= self.knots[n] {
            return Ok(n - 1);
        }
        // Binary search in [p, n): knots[low] <= xi < knots[high].
        let mut low = self.degree;
        let mut high = n;
        while high - low > 1 {
            let mid = (low + high) / 2;
            if xi < self.knots[mid] {
                high = mid;
            } else {
                low = mid;
            }
        }
        Ok(low)
    }

    /// Basis functions non-zero on the span containing `xi` and their derivatives
    /// up to `max_order`.
    pub fn basis_and_derivs(&self, xi: f64, max_order: usize) -> Result<BasisEval> {
        let span = self.find_span(xi)?;
        Ok(self.basis_and_derivs_in_span(span, xi, max_order))
    }

    /// Same as [`basis_and_derivs`](Self::basis_and_derivs) with the span given by the
    /// caller. `xi` may lie on the closure of the span.
    pub fn basis_and_derivs_in_span(&self, span: usize, xi: f64, max_order: usize) -> BasisEval {
        let p = self.degree;
        let u = &self.knots;
        // ndu holds basis values (upper triangle incl. diagonal) and knot differences (lower).
        let mut ndu = vec![vec![0.0; p + 1]; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        ndu[0][0] = 1.0;
        for j in 1..=p {
            left[j] = xi - u[span + 1 - j];
            right[j] = u[span + j] - xi;
            let mut saved = 0.0;
            for r in 0..j {
                ndu[j][r] = right[r + 1] + left[j - r];
                let temp = if ndu[j][r] == 0.0 { 0.0 } else { ndu[r][j - 1] / ndu[j][r] };
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }

        let mut ders = vec![vec![0.0; p + 1]; max_order + 1];
        for j in 0..=p {
            ders[0][j] = ndu[j][p];
        }
        if max_order == 0 {
            return BasisEval { span, ders };
        }

        let mut a = [vec![0.0; p + 1], vec![0.0; p + 1]];
        for r in 0..=p {
            let (mut s1, mut s2) = (0usize, 1usize);
            a[0][0] = 1.0;
            for k in 1..=max_order.min(p) {
                let mut d = 0.0;
                let rk = r as isize - k as isize;
                let pk = p - k;
                if r >= k {
                    let denom = ndu[pk + 1][rk as usize];
                    a[s2][0] = if denom == 0.0 { 0.0 } else { a[s1][0] / denom };
                    d = a[s2][0] * ndu[rk as usize][pk];
                }
                let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
                let j2 = if r as isize - 1 <= pk as isize { k - 1 } else { p - r };
                for j in j1..=j2 {
                    let idx = (rk + j as isize) as usize;
                    let denom = ndu[pk + 1][idx];
                    a[s2][j] =
                        if denom == 0.0 { 0.0 } else { (a[s1][j] - a[s1][j - 1]) / denom };
                    d += a[s2][j] * ndu[idx][pk];
                }
                if r <= pk {
                    let denom = ndu[pk + 1][r];
                    a[s2][k] = if denom == 0.0 { 0.0 } else { -a[s1][k - 1] / denom };
                    d += a[s2][k] * ndu[r][pk];
                }
                ders[k][r] = d;
                std::mem::swap(&mut s1, &mut s2);
            }
        }
        let mut factor = p as f64;
        for k in 1..=max_order.min(p) {
            for v in ders[k].iter_mut() {
                *v *= factor;
            }
            factor *= (p - k) as f64;
        }
        BasisEval { span, ders }
    }

    /// Non-degenerate spans as `(span index, lo, hi)`, in increasing order.
    pub fn spans(&self) -> Vec<(usize, f64, f64)> {
        let p = self.degree;
        (p..self.num_basis())
            .filter(|&i| self.knots[i + 1] > self.knots[i])
            .map(|i| (i, self.knots[i], self.knots[i + 1]))
            .collect()
    }

    /// Distinct knot values in increasing order.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v = self.knots.clone();
        v.dedup();
        v
    }

    pub fn multiplicity(&self, value: f64) -> usize {
        self.knots.iter().filter(|&&k| k == value).count()
    }

    /// Greville abscissae, one per basis function.
    pub fn greville(&self) -> Vec<f64> {
        let p = self.degree;
        if p == 0 {
            return (0..self.num_basis())
                .map(|i| 0.5 * (self.knots[i] + self.knots[i + 1]))
                .collect();
        }
        (0..self.num_basis())
            .map(|i| self.knots[i + 1..=i + p].iter().sum::<f64>() / p as f64)
            .collect()
    }

    /// Knot vector after inserting `xi` once (no validation of multiplicity beyond `new`).
    pub(crate) fn with_inserted(&self, xi: f64) -> Result<KnotVector> {
        let pos = self.knots.partition_point(|&k| k <= xi);
        let mut knots = self.knots.clone();
        knots.insert(pos, xi);
        KnotVector::new(knots, self.degree)
    }
}
