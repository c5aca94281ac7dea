//! Local histopolation elements: degrees of freedom, the functional matrix
//! `H = [M N; 0 D]`, unisolvence diagnostics, basis extraction and the
//! reconstruction operators.
//!
//! Every functional is an expectation under a normalized density expressed
//! in barycentric coordinates, so `H` does not depend on the tetrahedron and
//! is assembled once per strategy. Matrix entries come from closed-form
//! moments only; quadrature is reserved for general target functions.

use std::collections::HashMap;
use std::fmt;

use nalgebra::{SMatrix, SVector};

use crate::density::{
    edge_ortho_quadratic, face_ortho_quadratic, volume_ortho_pair, volumetric_psi, Density, EdgeDensity, FaceDensity,
    VolumeDensity,
};
use crate::error::{Error, Result};
use crate::poly::BaryPoly;
use crate::simplex::{BarycentricPoint, EdgeFrame, FaceFrame, EDGE_PAIRS};

/// Smallest admissible shape parameter; the moment matrices degenerate as
/// any shape tends to zero.
pub const PARAM_FLOOR: f64 = 1e-3;

/// Relative pivot threshold for declaring `rank(D) = 6`.
pub const RANK_PIVOT_TOL: f64 = 1e-14;

/// Condition numbers of `H` above this are flagged.
pub const CONDITION_WARN: f64 = 1e12;

pub type Mat6 = SMatrix<f64, 6, 6>;
pub type Mat10 = SMatrix<f64, 10, 10>;

/// Which six enriched functionals complete the four face averages.
#[derive(Debug, Clone, PartialEq)]
pub enum StrategyKind {
    /// Linear element with the four uniform face averages only.
    Classical,
    /// Face moments `L_j` against `q_j` plus the two volume moments `V_k`.
    FaceVolume { face: FaceDensity, volume: VolumeDensity },
    /// Six volume moments `F_ij` against `ψ_ij`.
    Volumetric { volume: VolumeDensity },
    /// Six edge moments `L_ij` against an orthogonal edge quadratic.
    EdgeFace { edge: EdgeDensity },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    /// Density of the face averages `I_j`.
    pub face_average: FaceDensity,
}

impl StrategyConfig {
    pub fn classical() -> Self {
        Self {
            kind: StrategyKind::Classical,
            face_average: FaceDensity::Uniform,
        }
    }

    /// Dirichlet face-volume family: face shape α, volume shape β.
    pub fn face_volume(alpha: f64, beta: f64) -> Self {
        Self::face_volume_with(FaceDensity::Dirichlet(alpha), VolumeDensity::Dirichlet(beta))
    }

    /// Face-volume strategy with arbitrary densities; `I_j` uses the face density.
    pub fn face_volume_with(face: FaceDensity, volume: VolumeDensity) -> Self {
        Self {
            kind: StrategyKind::FaceVolume { face, volume },
            face_average: face,
        }
    }

    pub fn volumetric(volume: VolumeDensity) -> Self {
        Self {
            kind: StrategyKind::Volumetric { volume },
            face_average: FaceDensity::Uniform,
        }
    }

    pub fn volumetric_blend(theta: f64, gamma: f64) -> Self {
        Self::volumetric(VolumeDensity::Blend { theta, gamma })
    }

    pub fn edge_face(zeta: f64, nu: f64) -> Self {
        Self {
            kind: StrategyKind::EdgeFace {
                edge: EdgeDensity { zeta, nu },
            },
            face_average: FaceDensity::Uniform,
        }
    }

    pub fn is_classical(&self) -> bool {
        matches!(self.kind, StrategyKind::Classical)
    }

    /// Short method id: `classical`, `fv`, `vol` or `ef`.
    pub fn method_id(&self) -> &'static str {
        match self.kind {
            StrategyKind::Classical => "classical",
            StrategyKind::FaceVolume { .. } => "fv",
            StrategyKind::Volumetric { .. } => "vol",
            StrategyKind::EdgeFace { .. } => "ef",
        }
    }

    /// Parameters as `key=value` pairs joined by `;`.
    pub fn params_string(&self) -> String {
        fn face(d: &FaceDensity) -> String {
            match d {
                FaceDensity::Uniform => "face=uniform".into(),
                FaceDensity::SymmetricQuadratic => "face=symquad".into(),
                FaceDensity::Dirichlet(a) => format!("alpha={a}"),
            }
        }
        fn volume(d: &VolumeDensity, shape: &str) -> String {
            match d {
                VolumeDensity::Uniform => "volume=uniform".into(),
                VolumeDensity::SymmetricQuadratic => "volume=symquad".into(),
                VolumeDensity::Dirichlet(g) => format!("{shape}={g}"),
                VolumeDensity::Blend { theta, gamma } => format!("theta={theta};gamma={gamma}"),
                VolumeDensity::Mixture(c) => {
                    let parts: Vec<String> = c.iter().map(|(w, g)| format!("{w}x{g}")).collect();
                    format!("mixture={}", parts.join("+"))
                }
            }
        }
        match &self.kind {
            StrategyKind::Classical => String::new(),
            StrategyKind::FaceVolume { face: f, volume: v } => format!("{};{}", face(f), volume(v, "beta")),
            StrategyKind::Volumetric { volume: v } => volume(v, "gamma"),
            StrategyKind::EdgeFace { edge } => format!("zeta={};nu={}", edge.zeta, edge.nu),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let floor = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() && v >= PARAM_FLOOR {
                Ok(())
            } else {
                Err(Error::Domain(format!(
                    "{name} = {v} is below the admissible floor {PARAM_FLOOR}"
                )))
            }
        };
        let check_face = |d: &FaceDensity| -> Result<()> {
            d.validate()?;
            match *d {
                FaceDensity::Dirichlet(a) => floor("alpha", a),
                _ => Ok(()),
            }
        };
        let check_volume = |d: &VolumeDensity| -> Result<()> {
            d.validate()?;
            match d {
                VolumeDensity::Dirichlet(g) => floor("beta/gamma", *g),
                VolumeDensity::Blend { gamma, .. } => floor("gamma", *gamma),
                VolumeDensity::Mixture(c) => c.iter().try_for_each(|&(_, g)| floor("mixture shape", g)),
                _ => Ok(()),
            }
        };
        check_face(&self.face_average)?;
        match &self.kind {
            StrategyKind::Classical => Ok(()),
            StrategyKind::FaceVolume { face, volume } => {
                check_face(face)?;
                check_volume(volume)
            }
            StrategyKind::Volumetric { volume } => check_volume(volume),
            StrategyKind::EdgeFace { edge } => {
                edge.validate()?;
                floor("zeta", edge.zeta)?;
                floor("nu", edge.nu)
            }
        }
    }
}

impl fmt::Display for StrategyConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.params_string();
        if p.is_empty() {
            write!(f, "{}", self.method_id())
        } else {
            write!(f, "{}({})", self.method_id(), p.replace(';', ", "))
        }
    }
}

/// A weighted integral functional on `P2(T)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Functional {
    /// `∫_{F_j} p · w · ω_j` in face coordinates.
    Face {
        face: FaceFrame,
        density: FaceDensity,
        weight: BaryPoly<3>,
    },
    /// `∫_T p · w · Ω`.
    Volume {
        density: VolumeDensity,
        weight: BaryPoly<4>,
    },
    /// `∫_0^1 p(x_ij(t)) · w(t) · ω_ij(t) dt`, with `w` in edge coordinates `(1 - t, t)`.
    Edge {
        edge: EdgeFrame,
        density: EdgeDensity,
        weight: BaryPoly<2>,
    },
}

impl Functional {
    fn face_map(face: &FaceFrame) -> [Option<usize>; 4] {
        let mut map = [None; 4];
        for (r, &i) in face.labels().iter().enumerate() {
            map[i] = Some(r);
        }
        map
    }

    fn edge_map(edge: &EdgeFrame) -> [Option<usize>; 4] {
        let (i, j) = edge.endpoints();
        let mut map = [None; 4];
        map[i] = Some(0);
        map[j] = Some(1);
        map
    }

    /// Exact value on a polynomial in the tetrahedron's barycentrics.
    pub fn apply(&self, p: &BaryPoly<4>) -> f64 {
        match self {
            Functional::Face { face, density, weight } => {
                let restricted: BaryPoly<3> = p.substitute(&Self::face_map(face));
                density.inner(&restricted, weight)
            }
            Functional::Volume { density, weight } => density.inner(p, weight),
            Functional::Edge { edge, density, weight } => {
                let restricted: BaryPoly<2> = p.substitute(&Self::edge_map(edge));
                density.inner(&restricted, weight)
            }
        }
    }

    /// Quadrature nodes (tetrahedron barycentrics) and weights realizing the
    /// functional on general functions, `m` points per direction.
    pub fn stencil(&self, m: usize) -> Result<Vec<(BarycentricPoint, f64)>> {
        Ok(match self {
            Functional::Face { face, density, weight } => {
                let rule = density.rule(m)?;
                rule.nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(x, w)| (face.lift(*x), w * weight.eval(x)))
                    .collect()
            }
            Functional::Volume { density, weight } => {
                let rule = density.rule(m)?;
                rule.nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(x, w)| (BarycentricPoint(*x), w * weight.eval(x)))
                    .collect()
            }
            Functional::Edge { edge, density, weight } => {
                let rule = density.rule(m)?;
                let (i, j) = edge.endpoints();
                rule.nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(x, w)| {
                        let mut l = [0.0; 4];
                        l[i] = x[0];
                        l[j] = x[1];
                        (BarycentricPoint(l), w * weight.eval(x))
                    })
                    .collect()
            }
        })
    }

    pub fn label(&self) -> String {
        match self {
            Functional::Face { face, weight, .. } => {
                let kind = if weight.degree() == 0 { "I" } else { "L" };
                format!("{kind}{}", face.opposite() + 1)
            }
            Functional::Volume { .. } => "V".into(),
            Functional::Edge { edge, .. } => {
                let (i, j) = edge.endpoints();
                format!("L{}{}", i + 1, j + 1)
            }
        }
    }
}

/// The degrees of freedom of a strategy, in [`DofVector`] order.
pub fn functionals(cfg: &StrategyConfig) -> Result<Vec<Functional>> {
    cfg.validate()?;
    let mut out: Vec<Functional> = FaceFrame::all()
        .into_iter()
        .map(|face| Functional::Face {
            face,
            density: cfg.face_average,
            weight: BaryPoly::constant(1.0),
        })
        .collect();
    match &cfg.kind {
        StrategyKind::Classical => {}
        StrategyKind::FaceVolume { face, volume } => {
            let q = face_ortho_quadratic(face);
            for f in FaceFrame::all() {
                out.push(Functional::Face {
                    face: f,
                    density: *face,
                    weight: q.clone(),
                });
            }
            let (r1, r2) = volume_ortho_pair(volume)?;
            for weight in [r1, r2] {
                out.push(Functional::Volume {
                    density: volume.clone(),
                    weight,
                });
            }
        }
        StrategyKind::Volumetric { volume } => {
            for weight in volumetric_psi(volume)? {
                out.push(Functional::Volume {
                    density: volume.clone(),
                    weight,
                });
            }
        }
        StrategyKind::EdgeFace { edge } => {
            let q = edge_ortho_quadratic(edge)?;
            for e in EdgeFrame::all() {
                out.push(Functional::Edge {
                    edge: e,
                    density: *edge,
                    weight: q.clone(),
                });
            }
        }
    }
    Ok(out)
}

/// The quadratic basis `B = {λ1λ2, λ1λ3, λ1λ4, λ2λ3, λ2λ4, λ3λ4}`.
pub fn quadratic_basis() -> [BaryPoly<4>; 6] {
    EDGE_PAIRS.map(|(i, j)| BaryPoly::product(i, j))
}

/// `Λ = [λ1, ..., λ4, λ1λ2, ..., λ3λ4]`.
pub fn lambda_basis() -> [BaryPoly<4>; 10] {
    let mut out: [BaryPoly<4>; 10] = Default::default();
    for i in 0..4 {
        out[i] = BaryPoly::var(i);
    }
    for (b, p) in quadratic_basis().into_iter().enumerate() {
        out[4 + b] = p;
    }
    out
}

/// Matrix of the six enriched functionals on the basis B.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadMomentMatrix {
    pub matrix: Mat6,
    pub strategy: StrategyConfig,
}

pub fn assemble_d(cfg: &StrategyConfig) -> Result<QuadMomentMatrix> {
    if cfg.is_classical() {
        return Err(Error::Argument("the classical element has no quadratic block".into()));
    }
    let fs = functionals(cfg)?;
    let basis = quadratic_basis();
    let matrix = Mat6::from_fn(|r, c| fs[4 + r].apply(&basis[c]));
    Ok(QuadMomentMatrix {
        matrix,
        strategy: cfg.clone(),
    })
}

/// Closed-form `D^fv_{α,β}` from the entries `d_α, v_β, u_β, w_β`.
pub fn closed_form_d_fv(alpha: f64, beta: f64) -> Mat6 {
    let a = alpha;
    let d = -2.0 * a / (9.0 * (3.0 * a + 1.0).powi(2) * (3.0 * a + 2.0));
    let (s, t, z) = volume_entries(beta);
    let mut m = Mat6::zeros();
    for j in 0..4 {
        for (c, &(p, q)) in EDGE_PAIRS.iter().enumerate() {
            if p != j && q != j {
                m[(j, c)] = d;
            }
        }
    }
    let v_rows = [[s, t, t, t, t, z], [t, s, t, t, z, t]];
    for (r, row) in v_rows.iter().enumerate() {
        for c in 0..6 {
            m[(4 + r, c)] = row[c];
        }
    }
    m
}

/// `(s_γ, t_γ, z_γ)`: diagonal, adjacent-pair and opposite-pair entries of
/// the Dirichlet volume moment matrix.
pub fn volume_entries(g: f64) -> (f64, f64, f64) {
    let p = 1.0 + 2.0 * g;
    let q = 1.0 + 4.0 * g;
    let r = 3.0 + 4.0 * g;
    let s = g * (5.0 * g * g + 5.0 * g + 1.0) / (8.0 * p * p * q * q * r);
    let t = -g * g / (16.0 * p * q * q * r);
    let z = g.powi(3) / (8.0 * p * p * q * q * r);
    (s, t, z)
}

/// Closed-form `D^vol_γ`.
pub fn closed_form_d_vol(gamma: f64) -> Mat6 {
    let (s, t, z) = volume_entries(gamma);
    Mat6::from_fn(|r, c| {
        if r == c {
            s
        } else if r + c == 5 {
            // pairs (12,34), (13,24), (14,23) are disjoint
            z
        } else {
            t
        }
    })
}

pub fn closed_form_det_fv(alpha: f64, beta: f64) -> f64 {
    let (a, b) = (alpha, beta);
    a.powi(4) * b * b
        / (2.0
            * (3.0 * (3.0 * a + 1.0)).powi(8)
            * (3.0 * a + 2.0).powi(4)
            * (2.0 * b + 1.0).powi(2)
            * (4.0 * b + 1.0).powi(2)
            * (4.0 * b + 3.0).powi(2))
}

pub fn closed_form_det_vol(gamma: f64) -> f64 {
    let g = gamma;
    g.powi(6) * (g + 1.0).powi(4)
        / (2f64.powi(18) * (2.0 * g + 1.0).powi(9) * (4.0 * g + 1.0).powi(7) * (4.0 * g + 3.0).powi(6))
}

/// Outcome of the rank test on `D`. A failed check is reported, not raised.
#[derive(Debug, Clone, PartialEq)]
pub struct UnisolvenceReport {
    pub strategy: StrategyConfig,
    pub det: f64,
    pub closed_form_det: Option<f64>,
    pub relative_error: Option<f64>,
    pub rank6: bool,
    /// Set for volumetric strategies only.
    pub spd: Option<bool>,
    /// Smallest full-pivot LU pivot over the largest matrix entry.
    pub min_pivot_ratio: f64,
}

impl UnisolvenceReport {
    pub fn passed(&self) -> bool {
        self.rank6 && self.spd.unwrap_or(true)
    }
}

fn shape_of_face(d: &FaceDensity) -> Option<f64> {
    match *d {
        FaceDensity::Uniform => Some(1.0),
        FaceDensity::Dirichlet(a) => Some(a),
        FaceDensity::SymmetricQuadratic => None,
    }
}

fn shape_of_volume(d: &VolumeDensity) -> Option<f64> {
    match *d {
        VolumeDensity::Uniform => Some(1.0),
        VolumeDensity::Dirichlet(b) => Some(b),
        _ => None,
    }
}

fn pivot_ratio(m: &Mat6) -> f64 {
    let scale = m.amax();
    if scale == 0.0 {
        return 0.0;
    }
    let lu = m.full_piv_lu();
    let u = lu.u();
    (0..6).map(|k| u[(k, k)].abs()).fold(f64::INFINITY, f64::min) / scale
}

pub fn is_spd(m: &Mat6) -> bool {
    let asym = (m - m.transpose()).amax();
    asym <= 1e-12 * m.amax() && m.cholesky().is_some()
}

pub fn unisolvence_check(cfg: &StrategyConfig) -> Result<UnisolvenceReport> {
    let d = assemble_d(cfg)?.matrix;
    let det = d.determinant();
    let closed_form_det = match &cfg.kind {
        StrategyKind::FaceVolume { face, volume } => shape_of_face(face)
            .zip(shape_of_volume(volume))
            .map(|(a, b)| closed_form_det_fv(a, b)),
        StrategyKind::Volumetric { volume } => shape_of_volume(volume).map(closed_form_det_vol),
        _ => None,
    };
    let relative_error = closed_form_det.map(|c| ((det - c) / c).abs());
    let min_pivot_ratio = pivot_ratio(&d);
    let rank6 = det.abs() > 1e-300 && min_pivot_ratio > RANK_PIVOT_TOL;
    let spd = matches!(cfg.kind, StrategyKind::Volumetric { .. }).then(|| is_spd(&d));
    Ok(UnisolvenceReport {
        strategy: cfg.clone(),
        det,
        closed_form_det,
        relative_error,
        rank6,
        spd,
        min_pivot_ratio,
    })
}

/// Degree-two polynomial on a tetrahedron in Λ coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Poly2OnTet(pub [f64; 10]);

impl Poly2OnTet {
    pub fn evaluate(&self, lambda: &BarycentricPoint) -> f64 {
        let l = &lambda.0;
        let c = &self.0;
        let mut v = c[0] * l[0] + c[1] * l[1] + c[2] * l[2] + c[3] * l[3];
        for (b, &(i, j)) in EDGE_PAIRS.iter().enumerate() {
            v += c[4 + b] * l[i] * l[j];
        }
        v
    }

    pub fn to_bary(&self) -> BaryPoly<4> {
        BaryPoly::from_lambda_basis(&self.0)
    }

    pub fn from_bary(p: &BaryPoly<4>) -> Self {
        Self(p.to_lambda_basis())
    }
}

/// Free-function form of [`Poly2OnTet::evaluate`].
pub fn evaluate(p: &Poly2OnTet, lambda: &BarycentricPoint) -> f64 {
    p.evaluate(lambda)
}

/// Values of the ten functionals: `[I1..I4, enriched six in strategy order]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DofVector(pub [f64; 10]);

/// The assembled element: `H`, its inverse and diagnostics.
#[derive(Debug, Clone)]
pub struct ElementOperator {
    strategy: StrategyConfig,
    functionals: Vec<Functional>,
    h: Mat10,
    h_inv: Mat10,
    condition: f64,
}

pub fn assemble_h(cfg: &StrategyConfig) -> Result<ElementOperator> {
    let report = unisolvence_check(cfg)?;
    if !report.rank6 {
        return Err(Error::Unisolvence {
            strategy: cfg.to_string(),
            reason: format!(
                "rank(D) < 6 (det = {:e}, min pivot ratio = {:e})",
                report.det, report.min_pivot_ratio
            ),
        });
    }
    let functionals = functionals(cfg)?;
    let basis = lambda_basis();
    let h = Mat10::from_fn(|r, c| functionals[r].apply(&basis[c]));
    let h_inv = h.full_piv_lu().try_inverse().ok_or_else(|| Error::Unisolvence {
        strategy: cfg.to_string(),
        reason: "H is singular".into(),
    })?;
    let condition = one_norm(&h) * one_norm(&h_inv);
    Ok(ElementOperator {
        strategy: cfg.clone(),
        functionals,
        h,
        h_inv,
        condition,
    })
}

fn one_norm(m: &Mat10) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

impl ElementOperator {
    pub fn strategy(&self) -> &StrategyConfig {
        &self.strategy
    }

    pub fn functionals(&self) -> &[Functional] {
        &self.functionals
    }

    pub fn h(&self) -> &Mat10 {
        &self.h
    }

    pub fn h_inv(&self) -> &Mat10 {
        &self.h_inv
    }

    /// 1-norm condition number of `H`.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn ill_conditioned(&self) -> bool {
        self.condition > CONDITION_WARN
    }

    /// Basis function `χ_ℓ` (zero-based `ℓ`), the ℓ-th column of `H⁻¹`.
    pub fn basis_function(&self, l: usize) -> Poly2OnTet {
        let col = self.h_inv.column(l);
        Poly2OnTet(std::array::from_fn(|i| col[i]))
    }

    /// `Σ_ℓ dofs_ℓ χ_ℓ`.
    pub fn reconstruct(&self, dofs: &DofVector) -> Poly2OnTet {
        let c = self.h_inv * SVector::<f64, 10>::from_row_slice(&dofs.0);
        Poly2OnTet(std::array::from_fn(|i| c[i]))
    }

    /// Exact DOFs of a polynomial.
    pub fn dofs_of(&self, p: &BaryPoly<4>) -> DofVector {
        DofVector(std::array::from_fn(|k| self.functionals[k].apply(p)))
    }

    /// Max deviation of `H(χ_ℓ)` from `e_ℓ` over all ℓ, by exact functionals.
    pub fn kronecker_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for l in 0..10 {
            let chi = self.basis_function(l).to_bary();
            for (k, f) in self.functionals.iter().enumerate() {
                let expect = if k == l { 1.0 } else { 0.0 };
                worst = worst.max((f.apply(&chi) - expect).abs());
            }
        }
        worst
    }
}

/// Free-function form of [`ElementOperator::reconstruct`].
pub fn reconstruct(op: &ElementOperator, dofs: &DofVector) -> Poly2OnTet {
    op.reconstruct(dofs)
}

/// `Σ_j a_j (1 - 3λ_j)` in Λ coefficients.
pub fn classical_project(face_averages: [f64; 4]) -> Poly2OnTet {
    let total: f64 = face_averages.iter().sum();
    let mut c = [0.0; 10];
    for i in 0..4 {
        c[i] = total - 3.0 * face_averages[i];
    }
    Poly2OnTet(c)
}

/// Either the classical linear element or an assembled quadratic one.
#[derive(Debug, Clone)]
pub enum LocalMethod {
    Classical { functionals: Vec<Functional> },
    Quadratic(Box<ElementOperator>),
}

impl LocalMethod {
    pub fn new(cfg: &StrategyConfig) -> Result<Self> {
        if cfg.is_classical() {
            Ok(LocalMethod::Classical {
                functionals: functionals(cfg)?,
            })
        } else {
            Ok(LocalMethod::Quadratic(Box::new(assemble_h(cfg)?)))
        }
    }

    pub fn functionals(&self) -> &[Functional] {
        match self {
            LocalMethod::Classical { functionals } => functionals,
            LocalMethod::Quadratic(op) => op.functionals(),
        }
    }

    pub fn n_dofs(&self) -> usize {
        self.functionals().len()
    }

    /// Reconstruction from the first `n_dofs()` entries of `dofs`.
    pub fn reconstruct(&self, dofs: &[f64; 10]) -> Poly2OnTet {
        match self {
            LocalMethod::Classical { .. } => classical_project([dofs[0], dofs[1], dofs[2], dofs[3]]),
            LocalMethod::Quadratic(op) => op.reconstruct(&DofVector(*dofs)),
        }
    }
}

/// Merged quadrature nodes of all functionals: one row of up to ten
/// weights per distinct barycentric node.
#[derive(Debug, Clone)]
pub struct DofStencil {
    pub points: Vec<BarycentricPoint>,
    pub weights: Vec<[f64; 10]>,
    pub n_dofs: usize,
}

impl DofStencil {
    pub fn new(functionals: &[Functional], m: usize) -> Result<Self> {
        let mut index: HashMap<[u64; 4], usize> = HashMap::new();
        let mut points = Vec::new();
        let mut weights: Vec<[f64; 10]> = Vec::new();
        for (k, f) in functionals.iter().enumerate() {
            for (p, w) in f.stencil(m)? {
                let key = p.0.map(f64::to_bits);
                let slot = *index.entry(key).or_insert_with(|| {
                    points.push(p);
                    weights.push([0.0; 10]);
                    points.len() - 1
                });
                weights[slot][k] += w;
            }
        }
        Ok(Self {
            points,
            weights,
            n_dofs: functionals.len(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Applies the stencil to values `f(point_k)` in point order.
    pub fn apply(&self, values: impl IntoIterator<Item = f64>) -> [f64; 10] {
        let mut out = [0.0; 10];
        for (v, w) in values.into_iter().zip(&self.weights) {
            for k in 0..self.n_dofs {
                out[k] += v * w[k];
            }
        }
        out
    }
}
