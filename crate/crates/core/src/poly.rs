//! Sparse polynomials in the barycentric coordinates of an (N-1)-simplex.
//!
//! Terms are not homogenized: a constant and `λ_1 + ... + λ_N` are distinct
//! representations of the same function. [`BaryPoly::to_lambda_basis`]
//! produces the canonical 10-coefficient form on a tetrahedron.

use std::fmt;

use crate::simplex::EDGE_PAIRS;

/// Polynomial `Σ c_k Π x_i^{e_ki}` over `N` barycentric variables.
#[derive(Debug, Clone, PartialEq)]
pub struct BaryPoly<const N: usize> {
    terms: Vec<([u8; N], f64)>,
}

impl<const N: usize> Default for BaryPoly<N> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<const N: usize> BaryPoly<N> {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial([0; N], c)
    }

    pub fn var(i: usize) -> Self {
        let mut e = [0; N];
        e[i] = 1;
        Self::monomial(e, 1.0)
    }

    pub fn monomial(exps: [u8; N], coef: f64) -> Self {
        let mut p = Self::zero();
        p.push(exps, coef);
        p
    }

    /// `x_i * x_j` (or `x_i^2` when `i == j`).
    pub fn product(i: usize, j: usize) -> Self {
        let mut e = [0; N];
        e[i] += 1;
        e[j] += 1;
        Self::monomial(e, 1.0)
    }

    /// `Σ x_i^2`.
    pub fn sum_of_squares() -> Self {
        (0..N).fold(Self::zero(), |acc, i| acc + Self::product(i, i))
    }

    fn push(&mut self, exps: [u8; N], coef: f64) {
        if coef == 0.0 {
            return;
        }
        match self.terms.binary_search_by(|(e, _)| e.cmp(&exps)) {
            Ok(k) => {
                self.terms[k].1 += coef;
                if self.terms[k].1 == 0.0 {
                    self.terms.remove(k);
                }
            }
            Err(k) => self.terms.insert(k, (exps, coef)),
        }
    }

    pub fn terms(&self) -> &[([u8; N], f64)] {
        &self.terms
    }

    pub fn coefficient(&self, exps: [u8; N]) -> f64 {
        self.terms
            .binary_search_by(|(e, _)| e.cmp(&exps))
            .map(|k| self.terms[k].1)
            .unwrap_or(0.0)
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|(e, _)| e.iter().map(|&k| k as u32).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut p = Self::zero();
        for &(e, v) in &self.terms {
            p.push(e, v * c);
        }
        p
    }

    pub fn eval(&self, x: &[f64; N]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| e.iter().zip(x).fold(*c, |acc, (&k, &xi)| acc * xi.powi(k as i32)))
            .sum()
    }

    /// Integrates each monomial with `moment` and sums.
    pub fn integrate(&self, mut moment: impl FnMut(&[u8; N]) -> f64) -> f64 {
        self.terms.iter().map(|(e, c)| c * moment(e)).sum()
    }

    /// Substitutes variables: `x_i -> y_{map[i]}`, or `x_i -> 0` when `map[i]` is `None`.
    pub fn substitute<const M: usize>(&self, map: &[Option<usize>; N]) -> BaryPoly<M> {
        let mut p = BaryPoly::<M>::zero();
        'term: for &(e, c) in &self.terms {
            let mut out = [0u8; M];
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                match map[i] {
                    Some(r) => out[r] += k,
                    None => continue 'term,
                }
            }
            p.push(out, c);
        }
        p
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.iter().fold(0.0, |m, (_, c)| m.max(c.abs()))
    }
}

impl BaryPoly<4> {
    /// Coefficients in `Λ = [λ1, λ2, λ3, λ4, λ1λ2, λ1λ3, λ1λ4, λ2λ3, λ2λ4, λ3λ4]`,
    /// using `Σλ = 1` to homogenize constants and squares.
    ///
    /// Panics when the polynomial has degree above two.
    pub fn to_lambda_basis(&self) -> [f64; 10] {
        let mut out = [0.0; 10];
        for &(e, c) in &self.terms {
            let deg: u8 = e.iter().sum();
            match deg {
                0 => out[..4].iter_mut().for_each(|v| *v += c),
                1 => {
                    let i = e.iter().position(|&k| k == 1).unwrap();
                    out[i] += c;
                }
                2 => {
                    if let Some(i) = e.iter().position(|&k| k == 2) {
                        // λ_i^2 = λ_i - Σ_{k≠i} λ_i λ_k
                        out[i] += c;
                        for (b, &(p, q)) in EDGE_PAIRS.iter().enumerate() {
                            if p == i || q == i {
                                out[4 + b] -= c;
                            }
                        }
                    } else {
                        let mut idx = e.iter().enumerate().filter(|(_, &k)| k == 1).map(|(i, _)| i);
                        let (p, q) = (idx.next().unwrap(), idx.next().unwrap());
                        let b = EDGE_PAIRS.iter().position(|&pq| pq == (p, q)).unwrap();
                        out[4 + b] += c;
                    }
                }
                _ => panic!("to_lambda_basis expects a polynomial of degree <= 2"),
            }
        }
        out
    }

    /// Inverse of [`BaryPoly::to_lambda_basis`].
    pub fn from_lambda_basis(coeffs: &[f64; 10]) -> Self {
        let mut p = Self::zero();
        for i in 0..4 {
            p.push(Self::var(i).terms[0].0, coeffs[i]);
        }
        for (b, &(i, j)) in EDGE_PAIRS.iter().enumerate() {
            p.push(Self::product(i, j).terms[0].0, coeffs[4 + b]);
        }
        p
    }
}

impl<const N: usize> std::ops::Add for BaryPoly<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (e, c) in rhs.terms {
            self.push(e, c);
        }
        self
    }
}

impl<const N: usize> std::ops::Sub for BaryPoly<N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + rhs.scale(-1.0)
    }
}

impl<const N: usize> std::ops::Mul for &BaryPoly<N> {
    type Output = BaryPoly<N>;
    fn mul(self, rhs: Self) -> BaryPoly<N> {
        let mut p = BaryPoly::zero();
        for &(ea, ca) in &self.terms {
            for &(eb, cb) in &rhs.terms {
                let mut e = ea;
                for (x, y) in e.iter_mut().zip(eb) {
                    *x += y;
                }
                p.push(e, ca * cb);
            }
        }
        p
    }
}

impl<const N: usize> fmt::Display for BaryPoly<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " {} ", if *c < 0.0 { '-' } else { '+' })?;
            } else if *c < 0.0 {
                write!(f, "-")?;
            }
            write!(f, "{}", c.abs())?;
            for (i, &p) in e.iter().enumerate() {
                match p {
                    0 => {}
                    1 => write!(f, "*x{}", i + 1)?,
                    _ => write!(f, "*x{}^{}", i + 1, p)?,
                }
            }
        }
        Ok(())
    }
}
