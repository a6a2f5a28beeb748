//! Quadrature rules, adaptive integration, series acceleration and root bracketing.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = 1.0;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
                }
                pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            let w = 2.0 / ((1.0 - z * z) * pp * pp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Applies the rule on [a, b].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(c + h * x);
        }
        acc * h
    }

    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (c + h * x, w * h))
    }
}

/// Gauss rule on [0, 1] for the weight t^beta, beta > -1.
///
/// Golub–Welsch on the Jacobi matrix of the (alpha=0, beta) Jacobi polynomials.
pub fn gauss_jacobi_left(n: usize, beta: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if beta <= -1.0 || n == 0 {
        return Err(Error::DomainError(format!("Gauss-Jacobi needs beta > -1, got {beta}")));
    }
    let (a, b) = (0.0_f64, beta);
    let mut jm = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let diag = if k == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            let t = 2.0 * kf + a + b;
            (b * b - a * a) / (t * (t + 2.0))
        };
        jm[(k, k)] = diag;
        if k + 1 < n {
            let k1 = kf + 1.0;
            let t = 2.0 * k1 + a + b;
            let num = 4.0 * k1 * (k1 + a) * (k1 + b) * (k1 + a + b);
            let den = t * t * (t + 1.0) * (t - 1.0);
            let off = (num / den).sqrt();
            jm[(k, k + 1)] = off;
            jm[(k + 1, k)] = off;
        }
    }
    let mu0 = 2f64.powf(a + b + 1.0) * statrs::function::gamma::gamma(a + 1.0) * statrs::function::gamma::gamma(b + 1.0)
        / statrs::function::gamma::gamma(a + b + 2.0);
    let eig = SymmetricEigen::new(jm);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            let x = eig.eigenvalues[i];
            // map x in [-1, 1] to t = (1 + x) / 2, weight (1+x)^b -> 2^b t^b, dx = 2 dt
            let t = 0.5 * (1.0 + x);
            let w = mu0 * v0 * v0 / 2f64.powf(b + 1.0);
            (t, w)
        })
        .collect();
    pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap_or(Ordering::Equal));
    Ok(pairs.into_iter().unzip())
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-300, rel: 1e-12, max_intervals: 4000 }
    }
}

impl Tolerance {
    pub fn rel(rel: f64) -> Self {
        Self { rel, ..Self::default() }
    }
}

struct Interval {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.partial_cmp(&other.err).unwrap_or(Ordering::Equal)
    }
}

thread_local! {
    static PAIR: (GaussLegendre, GaussLegendre) = (GaussLegendre::new(10), GaussLegendre::new(21));
}

fn pair_estimate<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    PAIR.with(|(lo, hi)| {
        let coarse = lo.integrate(a, b, &mut *f);
        let fine = hi.integrate(a, b, &mut *f);
        (fine, (fine - coarse).abs())
    })
}

/// Globally adaptive Gauss–Legendre (10/21 pair) integration on [a, b].
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (v, e) = pair_estimate(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Interval { a, b, value: v, err: e });
    let mut total = v;
    let mut err = e;
    let mut count = 1;
    loop {
        if !total.is_finite() {
            return Err(Error::QuadratureFailure(format!("non-finite integrand on [{a}, {b}]")));
        }
        if err <= tol.abs.max(tol.rel * total.abs()) {
            return Ok(total);
        }
        if count >= tol.max_intervals {
            if err <= 1e3 * tol.abs.max(tol.rel * total.abs()) {
                return Ok(total);
            }
            return Err(Error::QuadratureFailure(format!(
                "[{a:e}, {b:e}]: error {err:e} after {count} intervals"
            )));
        }
        let worst = heap.pop().expect("heap holds every interval");
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1) = pair_estimate(&mut f, worst.a, mid);
        let (v2, e2) = pair_estimate(&mut f, mid, worst.b);
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.err;
        heap.push(Interval { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Interval { a: mid, b: worst.b, value: v2, err: e2 });
        count += 1;
        // refresh the running sums now and then to shed accumulated rounding
        if count % 256 == 0 {
            total = heap.iter().map(|i| i.value).sum();
            err = heap.iter().map(|i| i.err).sum();
        }
    }
}

/// Integrates g over [a, b] with 0 < a < b in the variable u = ln r.
pub fn integrate_log<F: FnMut(f64) -> f64>(mut g: F, a: f64, b: f64, tol: Tolerance) -> Result<f64> {
    integrate(
        |u| {
            let r = u.exp();
            g(r) * r
        },
        a.ln(),
        b.ln(),
        tol,
    )
}

/// Integrates g over (0, infinity) given the algebraic tail sum_k amp_k r^{-exp_k}
/// that g follows beyond `r_cut`; g must be integrable at 0.
pub fn integrate_half_line<F: FnMut(f64) -> f64>(
    mut g: F,
    tail: &[(f64, f64)],
    r_lo: f64,
    r_cut: f64,
    tol: Tolerance,
) -> Result<f64> {
    let head = g(r_lo) * r_lo;
    let body = integrate_log(&mut g, r_lo, r_cut, tol)?;
    let mut rest = 0.0;
    for &(amp, e) in tail {
        if e <= 1.0 {
            return Err(Error::NotIntegrable(format!("tail exponent {e} <= 1")));
        }
        rest += amp * r_cut.powf(1.0 - e) / (e - 1.0);
    }
    Ok(head + body + rest)
}

/// Wynn epsilon extrapolation of a sequence of partial sums.
pub fn wynn_epsilon(sums: &[f64]) -> f64 {
    let n = sums.len();
    if n < 3 {
        return *sums.last().unwrap_or(&0.0);
    }
    let mut prev = vec![0.0; n + 1];
    let mut cur: Vec<f64> = sums.to_vec();
    let mut best = sums[n - 1];
    let mut k = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let diff = cur[i + 1] - cur[i];
            if diff == 0.0 || !diff.is_finite() {
                // converged column: keep the value of the even column
                return if k % 2 == 0 { cur[i + 1] } else { best };
            }
            next.push(prev[i + 1] + 1.0 / diff);
        }
        k += 1;
        prev = cur;
        cur = next;
        if k % 2 == 0 {
            if let Some(&v) = cur.last() {
                if v.is_finite() {
                    best = v;
                }
            }
        }
    }
    best
}

/// Brent's method on a bracket [a, b] with f(a) f(b) <= 0.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64, max_iter: usize) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::BracketFailure(format!("f({a:e}) and f({b:e}) share a sign")));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    Err(Error::BracketFailure(format!("Brent did not converge in {max_iter} iterations")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let gl = GaussLegendre::new(8);
        let v = gl.integrate(0.0, 2.0, |x| x.powi(15));
        assert!((v - 2f64.powi(16) / 16.0).abs() < 1e-10);
        let total: f64 = gl.weights.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn jacobi_rule_matches_moments() {
        let (t, w) = gauss_jacobi_left(12, -0.8).unwrap();
        for k in 0..10 {
            let exact = 1.0 / (k as f64 + 0.2);
            let approx: f64 = t.iter().zip(&w).map(|(t, w)| w * t.powi(k)).sum();
            assert!((approx - exact).abs() < 1e-12 * exact, "moment {k}");
        }
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let v = integrate(|x: f64| x.sqrt().recip(), 0.0, 1.0, Tolerance::rel(1e-10)).unwrap();
        assert!((v - 2.0).abs() < 1e-8);
    }

    #[test]
    fn half_line_with_tail() {
        // int_0^inf dr / (1 + r^2) = pi / 2
        let v = integrate_half_line(|r| 1.0 / (1.0 + r * r), &[(1.0, 2.0), (-1.0, 4.0), (1.0, 6.0)], 1e-12, 1e4, Tolerance::rel(1e-13)).unwrap();
        assert!((v - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn wynn_accelerates_alternating_harmonic() {
        let mut s = 0.0;
        let sums: Vec<f64> = (1..=20)
            .map(|k| {
                s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
                s
            })
            .collect();
        assert!((wynn_epsilon(&sums) - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn brent_finds_cosine_root() {
        let r = brent(f64::cos, 1.0, 2.0, 1e-15, 100).unwrap();
        assert!((r - PI / 2.0).abs() < 1e-14);
    }
}
