//! Probability densities on faces, volumes and edges, their exact moments,
//! and the quadratic enrichment polynomials orthogonal to affine functions.
//!
//! Every density is normalized to mass one on its simplex, so integrals
//! against it are expectations and do not depend on the physical size of
//! the face, edge or tetrahedron.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::poly::BaryPoly;
use crate::quadrature::{simplex_rule_weighted, SimplexRule};
use crate::simplex::EDGE_PAIRS;

/// Exact moment `E[Π x_i^{k_i}]` of the Dirichlet(shapes) law, by rising factorials.
pub fn dirichlet_moment<const N: usize>(shapes: &[f64; N], exps: &[u8; N]) -> f64 {
    let total: f64 = shapes.iter().sum();
    let mut num = 1.0;
    let mut den = 1.0;
    let mut step = 0.0;
    for (&c, &k) in shapes.iter().zip(exps) {
        for s in 0..k {
            num *= c + s as f64;
            den *= total + step;
            step += 1.0;
        }
    }
    num / den
}

/// A normalized density on the simplex with `N` barycentric coordinates.
pub trait Density<const N: usize> {
    /// `E[Π x_i^{k_i}]` in closed form.
    fn moment(&self, exps: &[u8; N]) -> f64;

    /// Cubature realizing expectations under the density, `m` points per direction.
    fn rule(&self, m: usize) -> Result<SimplexRule<N>>;

    fn validate(&self) -> Result<()>;

    /// `E[p]` for a polynomial `p`.
    fn expect(&self, p: &BaryPoly<N>) -> f64 {
        p.integrate(|e| self.moment(e))
    }

    /// `<p, q>` under the density.
    fn inner(&self, p: &BaryPoly<N>, q: &BaryPoly<N>) -> f64 {
        self.expect(&(p * q))
    }
}

// Shared symmetric families on an (N-1)-simplex.
#[derive(Debug, Clone, Copy)]
enum Family {
    Dirichlet(f64),
    SymmetricQuadratic,
}

impl Family {
    fn moment<const N: usize>(self, exps: &[u8; N]) -> f64 {
        match self {
            Family::Dirichlet(c) => dirichlet_moment(&[c; N], exps),
            Family::SymmetricQuadratic => {
                // (N+1)/2 Σ x_r^2 has mass one under the uniform law
                let scale = (N as f64 + 1.0) / 2.0;
                (0..N)
                    .map(|r| {
                        let mut e = *exps;
                        e[r] += 2;
                        dirichlet_moment(&[1.0; N], &e)
                    })
                    .sum::<f64>()
                    * scale
            }
        }
    }

    fn rule<const N: usize>(self, m: usize) -> Result<SimplexRule<N>> {
        match self {
            Family::Dirichlet(c) => simplex_rule_weighted([c - 1.0; N], m),
            Family::SymmetricQuadratic => {
                let scale = (N as f64 + 1.0) / 2.0;
                Ok(
                    simplex_rule_weighted([0.0; N], m + 1)?
                        .reweighted(|x| scale * x.iter().map(|v| v * v).sum::<f64>()),
                )
            }
        }
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{name} must be a positive finite number, got {v}"
        )))
    }
}

/// Density on a face, in face barycentric coordinates (μ1, μ2, μ3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FaceDensity {
    Uniform,
    /// `2 (μ1² + μ2² + μ3²)`.
    SymmetricQuadratic,
    /// Symmetric Dirichlet with shape α.
    Dirichlet(f64),
}

impl FaceDensity {
    fn family(&self) -> Family {
        match *self {
            FaceDensity::Uniform => Family::Dirichlet(1.0),
            FaceDensity::SymmetricQuadratic => Family::SymmetricQuadratic,
            FaceDensity::Dirichlet(a) => Family::Dirichlet(a),
        }
    }
}

impl Density<3> for FaceDensity {
    fn moment(&self, exps: &[u8; 3]) -> f64 {
        self.family().moment(exps)
    }

    fn rule(&self, m: usize) -> Result<SimplexRule<3>> {
        self.family().rule(m)
    }

    fn validate(&self) -> Result<()> {
        match *self {
            FaceDensity::Dirichlet(a) => check_positive("alpha", a),
            _ => Ok(()),
        }
    }
}

/// Density on the tetrahedron, in (λ1, ..., λ4).
#[derive(Debug, Clone, PartialEq)]
pub enum VolumeDensity {
    Uniform,
    /// `(5/2) (λ1² + λ2² + λ3² + λ4²)`.
    SymmetricQuadratic,
    /// Symmetric Dirichlet with shape β (or γ).
    Dirichlet(f64),
    /// `θ · uniform + (1 - θ) · Dirichlet(γ)`.
    Blend {
        theta: f64,
        gamma: f64,
    },
    /// Convex combination `Σ w_k Dirichlet(γ_k)`, entries `(w_k, γ_k)`.
    Mixture(Vec<(f64, f64)>),
}

impl VolumeDensity {
    /// Components as `(weight, shape)` pairs when the density is a Dirichlet mixture.
    fn components(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            VolumeDensity::Uniform => Some(vec![(1.0, 1.0)]),
            VolumeDensity::Dirichlet(g) => Some(vec![(1.0, *g)]),
            VolumeDensity::Blend { theta, gamma } => Some(vec![(*theta, 1.0), (1.0 - theta, *gamma)]),
            VolumeDensity::Mixture(c) => Some(c.clone()),
            VolumeDensity::SymmetricQuadratic => None,
        }
    }
}

impl Density<4> for VolumeDensity {
    fn moment(&self, exps: &[u8; 4]) -> f64 {
        match self.components() {
            Some(comps) => comps
                .iter()
                .filter(|(w, _)| *w != 0.0)
                .map(|&(w, g)| w * Family::Dirichlet(g).moment(exps))
                .sum(),
            None => Family::SymmetricQuadratic.moment(exps),
        }
    }

    fn rule(&self, m: usize) -> Result<SimplexRule<4>> {
        let Some(comps) = self.components() else {
            return Family::SymmetricQuadratic.rule(m);
        };
        let mut out: Option<SimplexRule<4>> = None;
        for (w, g) in comps.into_iter().filter(|(w, _)| *w != 0.0) {
            let r = Family::Dirichlet(g).rule::<4>(m)?.scaled(w);
            out = Some(match out {
                Some(acc) => acc.concat(r),
                None => r,
            });
        }
        out.ok_or_else(|| Error::Domain("mixture has no positive weight".into()))
    }

    fn validate(&self) -> Result<()> {
        match self {
            VolumeDensity::Uniform | VolumeDensity::SymmetricQuadratic => Ok(()),
            VolumeDensity::Dirichlet(g) => check_positive("beta/gamma", *g),
            VolumeDensity::Blend { theta, gamma } => {
                if !(0.0..=1.0).contains(theta) {
                    return Err(Error::Domain(format!("theta must lie in [0, 1], got {theta}")));
                }
                check_positive("gamma", *gamma)
            }
            VolumeDensity::Mixture(c) => {
                if c.is_empty() {
                    return Err(Error::Domain("empty mixture".into()));
                }
                for &(w, g) in c {
                    if !(w >= 0.0) {
                        return Err(Error::Domain(format!("mixture weight {w} is negative")));
                    }
                    check_positive("mixture shape", g)?;
                }
                let total: f64 = c.iter().map(|p| p.0).sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::Domain(format!("mixture weights sum to {total}, not 1")));
                }
                Ok(())
            }
        }
    }
}

/// Beta(ζ, ν) density `t^{ζ-1} (1-t)^{ν-1} / B(ζ, ν)` on an edge.
///
/// As a simplex density it lives on the coordinates `(1 - t, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeDensity {
    pub zeta: f64,
    pub nu: f64,
}

impl EdgeDensity {
    pub fn new(zeta: f64, nu: f64) -> Result<Self> {
        let d = Self { zeta, nu };
        d.validate()?;
        Ok(d)
    }

    pub fn uniform() -> Self {
        Self { zeta: 1.0, nu: 1.0 }
    }

    fn shapes(&self) -> [f64; 2] {
        [self.nu, self.zeta]
    }

    /// `E[t^k] = Π_{s<k} (ζ + s) / (ζ + ν + s)`.
    pub fn t_moment(&self, k: u8) -> f64 {
        (0..k)
            .map(|s| (self.zeta + s as f64) / (self.zeta + self.nu + s as f64))
            .product()
    }
}

impl Density<2> for EdgeDensity {
    fn moment(&self, exps: &[u8; 2]) -> f64 {
        dirichlet_moment(&self.shapes(), exps)
    }

    fn rule(&self, m: usize) -> Result<SimplexRule<2>> {
        simplex_rule_weighted(self.shapes().map(|c| c - 1.0), m)
    }

    fn validate(&self) -> Result<()> {
        check_positive("zeta", self.zeta)?;
        check_positive("nu", self.nu)
    }
}

/// Free-function form of [`Density::moment`].
pub fn density_moment<const N: usize>(density: &impl Density<N>, exps: &[u8; N]) -> f64 {
    density.moment(exps)
}

/// Largest `|<p, x_i>|` over the affine generators `x_1, ..., x_N` (which span
/// the constants as well, since `Σ x_i = 1`), together with `|<p, 1>|`.
pub fn affine_residual<const N: usize>(density: &impl Density<N>, p: &BaryPoly<N>) -> f64 {
    let mut r = density.expect(p).abs();
    for i in 0..N {
        r = r.max(density.inner(p, &BaryPoly::var(i)).abs());
    }
    r
}

/// Removes from `seed` its orthogonal projection onto the affine functions.
///
/// The result keeps the seed's pure quadratic terms and is orthogonal to every
/// affine function under `density`.
pub fn gram_schmidt_enrich<const N: usize>(seed: &BaryPoly<N>, density: &impl Density<N>) -> Result<BaryPoly<N>> {
    if seed.degree() > 2 {
        return Err(Error::Argument(format!("seed {seed} has degree above two")));
    }
    let scale = seed.max_abs_coefficient();
    let cross = reduced_cross_terms(seed)
        .into_iter()
        .fold(0.0_f64, |m, c| m.max(c.abs()));
    if !(cross > 1e-12 * scale) {
        return Err(Error::DegenerateSeed(format!("seed {seed} lies in the affine span")));
    }
    let gram = DMatrix::from_fn(N, N, |i, j| density.moment(&unit2::<N>(i, j)));
    let rhs = DVector::from_fn(N, |i, _| density.inner(seed, &BaryPoly::var(i)));
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::Domain("affine Gram matrix is not positive definite".into()))?;
    let c = chol.solve(&rhs);
    let proj = (0..N).fold(BaryPoly::zero(), |acc, i| acc + BaryPoly::var(i).scale(c[i]));
    Ok(seed.clone() - proj)
}

/// Cross coefficients of `x_i x_j` after reducing squares with
/// `x_i^2 = x_i - Σ_{k≠i} x_i x_k`; all vanish exactly when `p` is affine
/// on the simplex. Projection onto affine functions leaves them unchanged.
fn reduced_cross_terms<const N: usize>(p: &BaryPoly<N>) -> Vec<f64> {
    let mut out = Vec::with_capacity(N * (N - 1) / 2);
    for i in 0..N {
        for j in i + 1..N {
            let c = p.coefficient(unit2(i, j)) - p.coefficient(unit2(i, i)) - p.coefficient(unit2(j, j));
            out.push(c);
        }
    }
    out
}

fn unit2<const N: usize>(i: usize, j: usize) -> [u8; N] {
    let mut e = [0; N];
    e[i] += 1;
    e[j] += 1;
    e
}

/// The constant `c` in `q = μ1² + μ2² + μ3² - c`.
pub fn face_constant(density: &FaceDensity) -> f64 {
    match *density {
        FaceDensity::Uniform => 0.5,
        FaceDensity::SymmetricQuadratic => 8.0 / 15.0,
        FaceDensity::Dirichlet(a) => (a + 1.0) / (3.0 * a + 1.0),
    }
}

/// `q = Σ μ_r² - c`, orthogonal to affine functions on the face.
pub fn face_ortho_quadratic(density: &FaceDensity) -> BaryPoly<3> {
    BaryPoly::sum_of_squares() - BaryPoly::constant(face_constant(density))
}

/// Parameters `(h, k)` of the closed form `λiλj + h - k (λi + λj)` when one exists.
pub fn volume_hk(density: &VolumeDensity) -> Option<(f64, f64)> {
    let dirichlet = |b: f64| {
        (
            b * b / (2.0 * (2.0 * b + 1.0) * (4.0 * b + 1.0)),
            b / (2.0 * (2.0 * b + 1.0)),
        )
    };
    match density {
        VolumeDensity::Uniform => Some(dirichlet(1.0)),
        VolumeDensity::Dirichlet(b) => Some(dirichlet(*b)),
        VolumeDensity::SymmetricQuadratic => Some((23.0 / 840.0, 3.0 / 20.0)),
        VolumeDensity::Blend { .. } | VolumeDensity::Mixture(_) => None,
    }
}

fn pair_quadratic(density: &VolumeDensity, i: usize, j: usize) -> Result<BaryPoly<4>> {
    let seed = BaryPoly::product(i, j);
    match volume_hk(density) {
        Some((h, k)) => Ok(seed + BaryPoly::constant(h) - (BaryPoly::var(i) + BaryPoly::var(j)).scale(k)),
        None => gram_schmidt_enrich(&seed, density),
    }
}

/// `(ρ1, ρ2)` built on the seeds λ1λ2 and λ1λ3.
pub fn volume_ortho_pair(density: &VolumeDensity) -> Result<(BaryPoly<4>, BaryPoly<4>)> {
    Ok((pair_quadratic(density, 0, 1)?, pair_quadratic(density, 0, 2)?))
}

/// `ψ_ij` for the six pairs in basis order (12, 13, 14, 23, 24, 34).
pub fn volumetric_psi(density: &VolumeDensity) -> Result<[BaryPoly<4>; 6]> {
    let mut out: [BaryPoly<4>; 6] = Default::default();
    for (slot, &(i, j)) in out.iter_mut().zip(EDGE_PAIRS.iter()) {
        *slot = pair_quadratic(density, i, j)?;
    }
    Ok(out)
}

/// Monic quadratic in `t` orthogonal to `{1, t}` under Beta(ζ, ν), as a
/// polynomial in the edge coordinates `(1 - t, t)`.
pub fn edge_ortho_quadratic(density: &EdgeDensity) -> Result<BaryPoly<2>> {
    gram_schmidt_enrich(&BaryPoly::product(1, 1), density)
}

/// Coefficients `[c0, c1, c2]` of `c0 + c1 t + c2 t²` for a polynomial in `(1 - t, t)`.
pub fn edge_coefficients(p: &BaryPoly<2>) -> [f64; 3] {
    let mut out = [0.0; 3];
    for &([a, b], c) in p.terms() {
        assert!(a + b <= 2, "edge polynomial of degree above two");
        // (1 - t)^a t^b
        for s in 0..=a {
            let binom = match (a, s) {
                (2, 1) => 2.0,
                _ => 1.0,
            };
            let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
            out[(b + s) as usize] += c * binom * sign;
        }
    }
    out
}
