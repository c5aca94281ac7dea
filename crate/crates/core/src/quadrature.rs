//! Gauss-Jacobi rules on [0, 1] and collapsed tensor rules on simplices.
//!
//! A Dirichlet(c_0, ..., c_d) variable on the d-simplex factors through
//! stick-breaking into independent Beta variables,
//! `x_k = u_k Π_{l<k} (1 - u_l)` with `u_k ~ Beta(c_k, Σ_{l>k} c_l)`.
//! Tensorizing one Gauss-Jacobi rule per stick absorbs both the Dirichlet
//! weight and the Duffy Jacobian, so a polynomial of total degree `D` in the
//! barycentric coordinates is integrated exactly once `2m - 1 >= D`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Gauss rule for `∫_0^1 g(t) t^a (1 - t)^b dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub a: f64,
    pub b: f64,
}

impl QuadRule1D {
    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * g(t)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `ln B(p, q)`.
pub fn ln_beta(p: f64, q: f64) -> f64 {
    libm::lgamma(p) + libm::lgamma(q) - libm::lgamma(p + q)
}

fn check_exponent(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > -1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("weight exponent {name} = {v} must exceed -1")))
    }
}

/// `m`-point Gauss-Jacobi rule on [0, 1] for the weight `t^a (1 - t)^b`.
///
/// Nodes come from the eigenvalues of the Jacobi matrix (Golub-Welsch) and
/// are then polished by Newton steps on the three-term recurrence; weights
/// are the squared first eigenvector components times `B(a + 1, b + 1)`.
pub fn gauss_jacobi(m: usize, a: f64, b: f64) -> Result<QuadRule1D> {
    if m == 0 {
        return Err(Error::Argument("Gauss-Jacobi rule needs at least one node".into()));
    }
    check_exponent("a", a)?;
    check_exponent("b", b)?;
    let (diag, off) = recurrence(m, a, b);
    let mut jm = DMatrix::<f64>::zeros(m, m);
    for k in 0..m {
        jm[(k, k)] = diag[k];
        if k + 1 < m {
            jm[(k, k + 1)] = off[k];
            jm[(k + 1, k)] = off[k];
        }
    }
    let eig = SymmetricEigen::new(jm);
    let mass = ln_beta(a + 1.0, b + 1.0).exp();
    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|k| {
            let v0 = eig.eigenvectors[(0, k)];
            (eig.eigenvalues[k], v0 * v0 * mass)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    for (t, _) in pairs.iter_mut() {
        *t = polish(*t, &diag, &off);
    }
    Ok(QuadRule1D {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
        a,
        b,
    })
}

// Recurrence of the orthonormal polynomials for t^a (1-t)^b on [0,1]:
// diagonal entries and off-diagonal entries of the Jacobi matrix.
fn recurrence(m: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    // On [-1, 1] with weight (1-x)^al (1+x)^be, t = (1+x)/2 gives be = a, al = b.
    let (al, be) = (b, a);
    let s = al + be;
    let diag = (0..m)
        .map(|k| {
            let x = if k == 0 {
                (be - al) / (s + 2.0)
            } else {
                let kk = 2.0 * k as f64 + s;
                (be * be - al * al) / (kk * (kk + 2.0))
            };
            0.5 * (1.0 + x)
        })
        .collect();
    let off = (1..m)
        .map(|k| {
            let kf = k as f64;
            let kk = 2.0 * kf + s;
            let bk = if k == 1 {
                4.0 * (1.0 + al) * (1.0 + be) / ((2.0 + s).powi(2) * (3.0 + s))
            } else {
                4.0 * kf * (kf + al) * (kf + be) * (kf + s) / (kk * kk * (kk + 1.0) * (kk - 1.0))
            };
            0.5 * bk.sqrt()
        })
        .collect();
    (diag, off)
}

// Newton refinement of a zero of the degree-m orthonormal polynomial.
fn polish(mut t: f64, diag: &[f64], off: &[f64]) -> f64 {
    let m = diag.len();
    for _ in 0..3 {
        // p_{k+1} = ((t - d_k) p_k - o_{k-1} p_{k-1}) / o_k, with o_{m-1} := 1
        let (mut p_prev, mut p) = (0.0, 1.0);
        let (mut dp_prev, mut dp) = (0.0, 0.0);
        for k in 0..m {
            let o_prev = if k == 0 { 0.0 } else { off[k - 1] };
            let o = if k + 1 < m { off[k] } else { 1.0 };
            let p_next = ((t - diag[k]) * p - o_prev * p_prev) / o;
            let dp_next = (p + (t - diag[k]) * dp - o_prev * dp_prev) / o;
            p_prev = p;
            p = p_next;
            dp_prev = dp;
            dp = dp_next;
        }
        if dp == 0.0 || !dp.is_finite() {
            break;
        }
        let step = p / dp;
        if !step.is_finite() || step.abs() > 1e-8 {
            break;
        }
        t -= step;
        if step.abs() < 1e-17 {
            break;
        }
    }
    t
}

/// Cubature on the unit simplex with `N = d + 1` barycentric coordinates.
///
/// Weights integrate against a probability density: `Σ w = 1` and
/// `Σ w g(x) ≈ E[g]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexRule<const N: usize> {
    pub nodes: Vec<[f64; N]>,
    pub weights: Vec<f64>,
    /// Dirichlet exponents `c_i - 1` of the target weight (all zero for plain rules).
    pub exponents: [f64; N],
}

impl<const N: usize> SimplexRule<N> {
    pub fn expectation(&self, g: impl Fn(&[f64; N]) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, &w)| w * g(x)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn dimension(&self) -> usize {
        N - 1
    }

    /// Scales every weight by `c`.
    pub fn scaled(mut self, c: f64) -> Self {
        self.weights.iter_mut().for_each(|w| *w *= c);
        self
    }

    /// Multiplies each weight by `f(node)`.
    pub fn reweighted(mut self, f: impl Fn(&[f64; N]) -> f64) -> Self {
        for (x, w) in self.nodes.iter().zip(self.weights.iter_mut()) {
            *w *= f(x);
        }
        self
    }

    /// Concatenation of two rules (mixture of their measures).
    pub fn concat(mut self, other: Self) -> Self {
        self.nodes.extend(other.nodes);
        self.weights.extend(other.weights);
        self
    }
}

/// Collapsed Gauss-Jacobi rule for the normalized Dirichlet density
/// `∝ Π x_i^{exponents_i}` on the `(N-1)`-simplex, `m` points per direction.
///
/// Exact for barycentric polynomials of total degree `<= 2m - 1`.
pub fn simplex_rule_weighted<const N: usize>(exponents: [f64; N], m: usize) -> Result<SimplexRule<N>> {
    if N < 2 {
        return Err(Error::Argument(
            "simplex rules need at least two barycentric coordinates".into(),
        ));
    }
    for (i, &e) in exponents.iter().enumerate() {
        check_exponent(&format!("exponent[{i}]"), e)?;
    }
    let shapes: [f64; N] = exponents.map(|e| e + 1.0);
    // one Beta(c_k, Σ_{l>k} c_l) rule per stick
    let mut sticks = Vec::with_capacity(N - 1);
    for k in 0..N - 1 {
        let rest: f64 = shapes[k + 1..].iter().sum();
        let rule = gauss_jacobi(m, shapes[k] - 1.0, rest - 1.0)?;
        let norm = (-ln_beta(shapes[k], rest)).exp();
        sticks.push((rule.nodes, rule.weights.iter().map(|w| w * norm).collect::<Vec<_>>()));
    }
    let total = m.pow((N - 1) as u32);
    let mut nodes = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    let mut idx = vec![0usize; N - 1];
    for _ in 0..total {
        let mut x = [0.0; N];
        let mut rem = 1.0;
        let mut w = 1.0;
        for k in 0..N - 1 {
            let (u, wu) = (sticks[k].0[idx[k]], sticks[k].1[idx[k]]);
            x[k] = rem * u;
            rem *= 1.0 - u;
            w *= wu;
        }
        x[N - 1] = rem;
        nodes.push(x);
        weights.push(w);
        // odometer, last stick fastest
        for k in (0..N - 1).rev() {
            idx[k] += 1;
            if idx[k] < m {
                break;
            }
            idx[k] = 0;
        }
    }
    Ok(SimplexRule {
        nodes,
        weights,
        exponents,
    })
}

/// Rule for the uniform density on the `(N-1)`-simplex, exact up to
/// `target_degree`.
pub fn simplex_rule_plain<const N: usize>(target_degree: usize) -> Result<SimplexRule<N>> {
    if target_degree == 0 {
        return Err(Error::Argument("target degree must be >= 1".into()));
    }
    simplex_rule_weighted([0.0; N], points_for_degree(target_degree))
}

/// Smallest `m` with `2m - 1 >= degree`.
pub fn points_for_degree(degree: usize) -> usize {
    degree / 2 + 1
}
