//! Target functions, DOF evaluation on physical cells, mesh L1 errors, the
//! grid-search tuner and the convergence study.
//!
//! Parallel loops run over cells; per-cell results are collected in cell
//! order and summed sequentially, so every reported number is independent
//! of the thread count.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use crate::element::{DofStencil, DofVector, LocalMethod, Poly2OnTet, StrategyConfig};
use crate::error::{Error, Result};
use crate::quadrature::{simplex_rule_plain, SimplexRule};
use crate::simplex::{BarycentricPoint, Point3, TetMesh, Tetrahedron};

/// Default candidate set for α, β, γ, ζ and ν.
pub const DEFAULT_SHAPE_GRID: [f64; 6] = [0.5, 1.0, 1.5, 2.0, 3.0, 5.0];
/// Default candidate set for θ.
pub const DEFAULT_THETA_GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];
pub const DEFAULT_MESHES: [usize; 5] = [5, 10, 15, 20, 25];

type Evaluator = Arc<dyn Fn(Point3) -> f64 + Send + Sync>;

/// A scalar function on the unit cube.
#[derive(Clone)]
pub struct TargetFunction {
    id: String,
    eval: Evaluator,
}

impl fmt::Debug for TargetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TargetFunction").field("id", &self.id).finish()
    }
}

fn radius(p: Point3) -> f64 {
    ((p.x - 0.5).powi(2) + (p.y - 0.5).powi(2) + (p.z - 0.5).powi(2)).sqrt()
}

impl TargetFunction {
    pub fn custom(id: impl Into<String>, f: impl Fn(Point3) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            id: id.into(),
            eval: Arc::new(f),
        }
    }

    /// The validation functions `f1..f8` (`k` is one-based).
    pub fn standard(k: usize) -> Option<Self> {
        let f: fn(Point3) -> f64 = match k {
            1 => |p| (2.0 * PI * p.x).sin() * (2.0 * PI * p.y).sin() * (2.0 * PI * p.z).sin(),
            2 => |p| (2.0 * PI * p.x * p.y * p.z).sin(),
            3 => |p| 1.0 / (p.x * p.x + p.y * p.y + p.z * p.z + 25.0),
            4 => |p| (p.x * p.x + p.y * p.y + p.z * p.z).exp(),
            5 => |p| p.x.sin() * p.y.cos() * (-p.z * p.z).exp(),
            6 => |p| p.x.powi(3).abs() + p.y.powi(3).abs() + p.z.powi(3).abs(),
            7 => radius,
            8 => |p| {
                let r = radius(p);
                (10.0 * r).sin() * (-r).exp()
            },
            _ => return None,
        };
        Some(Self::custom(format!("f{k}"), f))
    }

    pub fn all_standard() -> Vec<Self> {
        (1..=8).filter_map(Self::standard).collect()
    }

    /// Parses `f1`..`f8`.
    pub fn by_id(id: &str) -> Result<Self> {
        id.strip_prefix('f')
            .and_then(|k| k.parse().ok())
            .and_then(Self::standard)
            .ok_or_else(|| Error::Argument(format!("unknown function id `{id}` (expected f1..f8)")))
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn eval(&self, p: Point3) -> f64 {
        (self.eval)(p)
    }
}

/// Quadrature resolution for DOFs and for error integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadSettings {
    /// Gauss-Jacobi points per direction for the functionals.
    pub dof_points: usize,
    /// Polynomial degree integrated exactly by the error rule.
    pub error_degree: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self {
            dof_points: 8,
            error_degree: 8,
        }
    }
}

impl QuadSettings {
    pub fn validate(&self) -> Result<()> {
        if self.dof_points == 0 {
            return Err(Error::Argument(
                "quadrature needs at least one point per direction".into(),
            ));
        }
        Ok(())
    }
}

/// A strategy ready to run on many cells: operator plus merged DOF stencil.
#[derive(Debug, Clone)]
pub struct Projector {
    config: StrategyConfig,
    method: LocalMethod,
    stencil: DofStencil,
}

impl Projector {
    pub fn new(cfg: &StrategyConfig, quad: &QuadSettings) -> Result<Self> {
        quad.validate()?;
        let method = LocalMethod::new(cfg)?;
        let stencil = DofStencil::new(method.functionals(), quad.dof_points)?;
        Ok(Self {
            config: cfg.clone(),
            method,
            stencil,
        })
    }

    pub fn config(&self) -> &StrategyConfig {
        &self.config
    }

    pub fn method(&self) -> &LocalMethod {
        &self.method
    }

    /// DOFs of `f` on `tet`; entries past the strategy's DOF count are zero.
    pub fn dofs(&self, f: &TargetFunction, tet: &Tetrahedron, cell: usize) -> Result<[f64; 10]> {
        let mut values = Vec::with_capacity(self.stencil.len());
        for p in &self.stencil.points {
            let v = f.eval(tet.point_from_barycentric(p));
            if !v.is_finite() {
                return Err(Error::Evaluation {
                    function: f.id().to_string(),
                    cell,
                });
            }
            values.push(v);
        }
        Ok(self.stencil.apply(values))
    }

    pub fn project(&self, f: &TargetFunction, tet: &Tetrahedron, cell: usize) -> Result<Poly2OnTet> {
        Ok(self.method.reconstruct(&self.dofs(f, tet, cell)?))
    }
}

/// The ten functionals of `f` on `tet`, computed by weighted quadrature.
pub fn compute_dofs(
    f: &TargetFunction,
    tet: &Tetrahedron,
    cfg: &StrategyConfig,
    quad: &QuadSettings,
) -> Result<DofVector> {
    Ok(DofVector(Projector::new(cfg, quad)?.dofs(f, tet, 0)?))
}

fn error_rule(quad: &QuadSettings) -> Result<SimplexRule<4>> {
    simplex_rule_plain::<4>(quad.error_degree)
}

fn cell_error(f: &TargetFunction, mesh: &TetMesh, proj: &Projector, rule: &SimplexRule<4>, cell: usize) -> Result<f64> {
    let tet = mesh.tetrahedron(cell);
    let p = proj.project(f, &tet, cell)?;
    let mut acc = 0.0;
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        let lambda = BarycentricPoint(*x);
        let v = f.eval(tet.point_from_barycentric(&lambda));
        if !v.is_finite() {
            return Err(Error::Evaluation {
                function: f.id().to_string(),
                cell,
            });
        }
        acc += w * (v - p.evaluate(&lambda)).abs();
    }
    Ok(acc * tet.volume())
}

fn mesh_error(f: &TargetFunction, mesh: &TetMesh, proj: &Projector, rule: &SimplexRule<4>) -> Result<f64> {
    let per_cell: Vec<f64> = (0..mesh.len())
        .into_par_iter()
        .map(|c| cell_error(f, mesh, proj, rule, c))
        .collect::<Result<_>>()?;
    Ok(per_cell.iter().sum())
}

/// `Σ_K ∫_K |f - π f|` over the mesh.
pub fn l1_error(f: &TargetFunction, mesh: &TetMesh, cfg: &StrategyConfig, quad: &QuadSettings) -> Result<f64> {
    let proj = Projector::new(cfg, quad)?;
    mesh_error(f, mesh, &proj, &error_rule(quad)?)
}

/// The two-parameter families tuned by grid search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TuneFamily {
    /// `(α, β)`.
    FaceVolume,
    /// `(θ, γ)`.
    Volumetric,
    /// `(ζ, ν)`.
    EdgeFace,
}

impl TuneFamily {
    pub fn config(&self, a: f64, b: f64) -> StrategyConfig {
        match self {
            TuneFamily::FaceVolume => StrategyConfig::face_volume(a, b),
            TuneFamily::Volumetric => StrategyConfig::volumetric_blend(a, b),
            TuneFamily::EdgeFace => StrategyConfig::edge_face(a, b),
        }
    }

    pub fn parameter_names(&self) -> (&'static str, &'static str) {
        match self {
            TuneFamily::FaceVolume => ("alpha", "beta"),
            TuneFamily::Volumetric => ("theta", "gamma"),
            TuneFamily::EdgeFace => ("zeta", "nu"),
        }
    }

    /// Default candidate sets.
    pub fn default_grids(&self) -> (Vec<f64>, Vec<f64>) {
        let first = match self {
            TuneFamily::Volumetric => DEFAULT_THETA_GRID.to_vec(),
            _ => DEFAULT_SHAPE_GRID.to_vec(),
        };
        (first, DEFAULT_SHAPE_GRID.to_vec())
    }
}

#[derive(Debug, Clone)]
pub struct TuningGrid {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    pub functions: Vec<TargetFunction>,
    pub meshes: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub first: f64,
    pub second: f64,
    pub total_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuningResult {
    pub family: TuneFamily,
    pub best: (f64, f64),
    pub best_error: f64,
    /// Accumulated error per candidate, outer parameter major.
    pub surface: Vec<SurfacePoint>,
}

impl TuningResult {
    pub fn surface_csv(&self) -> String {
        let (a, b) = self.family.parameter_names();
        let mut out = format!("{a},{b},total_l1_error\n");
        for p in &self.surface {
            out.push_str(&format!("{},{},{:e}\n", p.first, p.second, p.total_error));
        }
        out
    }
}

/// Exhaustive search minimizing `Σ_f Σ_n` L1 error; ties keep the earlier
/// candidate (outer loop over the first parameter).
pub fn grid_search(grid: &TuningGrid, family: TuneFamily, quad: &QuadSettings) -> Result<TuningResult> {
    if grid.first.is_empty() || grid.second.is_empty() || grid.functions.is_empty() || grid.meshes.is_empty() {
        return Err(Error::Argument(
            "tuning grid has an empty candidate, function or mesh set".into(),
        ));
    }
    let meshes: Vec<TetMesh> = grid.meshes.iter().map(|&n| TetMesh::build(n)).collect::<Result<_>>()?;
    let rule = error_rule(quad)?;
    let mut surface = Vec::with_capacity(grid.first.len() * grid.second.len());
    let mut best = (grid.first[0], grid.second[0]);
    let mut best_error = f64::INFINITY;
    for &a in &grid.first {
        for &b in &grid.second {
            let proj = Projector::new(&family.config(a, b), quad)?;
            let mut total = 0.0;
            for f in &grid.functions {
                for mesh in &meshes {
                    total += mesh_error(f, mesh, &proj, &rule)?;
                }
            }
            surface.push(SurfacePoint {
                first: a,
                second: b,
                total_error: total,
            });
            if total < best_error {
                best_error = total;
                best = (a, b);
            }
        }
    }
    Ok(TuningResult {
        family,
        best,
        best_error,
        surface,
    })
}

/// Classical projector plus the three quadratic strategies at the
/// default parameters `(α,β) = (2,2)`, `(θ,γ) = (0.5,2)`,
/// `(ζ,ν) = (2,2)`.
pub fn default_methods() -> Vec<StrategyConfig> {
    vec![
        StrategyConfig::classical(),
        StrategyConfig::face_volume(2.0, 2.0),
        StrategyConfig::volumetric_blend(0.5, 2.0),
        StrategyConfig::edge_face(2.0, 2.0),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub function: String,
    pub n: usize,
    pub method: String,
    pub params: String,
    pub l1_error: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ErrorReport {
    pub rows: Vec<ErrorRow>,
}

pub const CSV_HEADER: &str = "function,n,method,params,l1_error,seconds";

impl ErrorReport {
    /// CSV text. Wall times are written only when `timing` is set, so the
    /// default output is reproducible byte for byte.
    pub fn to_csv(&self, timing: bool) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let secs = if timing { r.seconds } else { 0.0 };
            out.push_str(&format!(
                "{},{},{},{},{:e},{}\n",
                r.function, r.n, r.method, r.params, r.l1_error, secs
            ));
        }
        out
    }

    /// Errors of one `(function, method)` series ordered by `n`.
    pub fn series(&self, function: &str, method: &str) -> Vec<(usize, f64)> {
        let mut s: Vec<(usize, f64)> = self
            .rows
            .iter()
            .filter(|r| r.function == function && r.method == method)
            .map(|r| (r.n, r.l1_error))
            .collect();
        s.sort_by_key(|&(n, _)| n);
        s
    }

    pub fn get(&self, function: &str, n: usize, method: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.function == function && r.n == n && r.method == method)
            .map(|r| r.l1_error)
    }
}

/// One L1 error row per `(function, mesh, method)`, in that nesting order.
pub fn convergence_study(
    functions: &[TargetFunction],
    meshes: &[usize],
    methods: &[StrategyConfig],
    quad: &QuadSettings,
) -> Result<ErrorReport> {
    let projectors: Vec<Projector> = methods.iter().map(|m| Projector::new(m, quad)).collect::<Result<_>>()?;
    let built: Vec<TetMesh> = meshes.iter().map(|&n| TetMesh::build(n)).collect::<Result<_>>()?;
    let rule = error_rule(quad)?;
    let mut rows = Vec::new();
    for f in functions {
        for mesh in &built {
            for proj in &projectors {
                let start = Instant::now();
                let err = mesh_error(f, mesh, proj, &rule)?;
                rows.push(ErrorRow {
                    function: f.id().to_string(),
                    n: mesh.n(),
                    method: proj.config().method_id().to_string(),
                    params: proj.config().params_string(),
                    l1_error: err,
                    seconds: start.elapsed().as_secs_f64(),
                });
            }
        }
    }
    Ok(ErrorReport { rows })
}

/// Errors nonincreasing along refinement, allowing at most one increase
/// smaller than `tol` relative.
pub fn is_refinement_monotone(errors: &[f64], tol: f64) -> bool {
    let mut inversions = 0;
    for w in errors.windows(2) {
        if w[1] > w[0] {
            inversions += 1;
            if w[1] > w[0] * (1.0 + tol) {
                return false;
            }
        }
    }
    inversions <= 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::{assemble_h, Functional};
    use crate::poly::BaryPoly;

    fn skewed_tet() -> Tetrahedron {
        Tetrahedron::new([
            Point3::new(0.1, 0.2, 0.0),
            Point3::new(1.3, 0.1, 0.2),
            Point3::new(0.4, 0.9, 0.1),
            Point3::new(0.3, 0.4, 1.1),
        ])
        .unwrap()
    }

    fn all_strategies() -> Vec<StrategyConfig> {
        vec![
            StrategyConfig::face_volume(1.0, 1.0),
            StrategyConfig::face_volume(0.5, 3.0),
            StrategyConfig::volumetric_blend(0.5, 2.0),
            StrategyConfig::edge_face(2.0, 0.5),
        ]
    }

    #[test]
    fn constant_and_affine_dofs() {
        let tet = skewed_tet();
        let one = TargetFunction::custom("one", |_| 1.0);
        let affine = TargetFunction::custom("affine", |p| 2.0 - p.x + 3.0 * p.y + 0.5 * p.z);
        for cfg in all_strategies() {
            let d = compute_dofs(&one, &tet, &cfg, &QuadSettings::default()).unwrap().0;
            for k in 0..10 {
                let expect = if k < 4 { 1.0 } else { 0.0 };
                assert!((d[k] - expect).abs() < 1e-13, "{cfg}: {d:?}");
            }
            let d = compute_dofs(&affine, &tet, &cfg, &QuadSettings::default()).unwrap().0;
            assert!(d[4..].iter().all(|v| v.abs() < 1e-12), "{cfg}: {d:?}");
        }
    }

    #[test]
    fn lambda_product_face_moment() {
        let tet = skewed_tet();
        let t2 = tet.clone();
        let f = TargetFunction::custom("l1l2", move |p| {
            let l = t2.barycentric(p).0;
            l[0] * l[1]
        });
        let d = compute_dofs(
            &f,
            &tet,
            &StrategyConfig::face_volume(1.0, 1.0),
            &QuadSettings::default(),
        )
        .unwrap();
        // λ1λ2 vanishes on the faces opposite vertices 1 and 2
        assert!(d.0[4].abs() < 1e-15 && d.0[5].abs() < 1e-15);
        assert!((d.0[6] - -1.0 / 360.0).abs() < 1e-14);
        assert!((d.0[7] - -1.0 / 360.0).abs() < 1e-14);
    }

    #[test]
    fn quadrature_dofs_match_exact_functionals() {
        let p = BaryPoly::<4>::sum_of_squares() + BaryPoly::product(0, 2).scale(-2.5) + BaryPoly::var(3);
        let tet = Tetrahedron::reference();
        let pc = p.clone();
        let t2 = tet.clone();
        let f = TargetFunction::custom("p", move |x| pc.eval(&t2.barycentric(x).0));
        for cfg in all_strategies() {
            let op = assemble_h(&cfg).unwrap();
            let exact = op.dofs_of(&p).0;
            let quad = compute_dofs(&f, &tet, &cfg, &QuadSettings::default()).unwrap().0;
            for k in 0..10 {
                assert!((exact[k] - quad[k]).abs() < 1e-13, "{cfg} dof {k}");
            }
        }
    }

    #[test]
    fn projector_property() {
        let tet = skewed_tet();
        let f = TargetFunction::standard(4).unwrap();
        for cfg in all_strategies() {
            let proj = Projector::new(&cfg, &QuadSettings::default()).unwrap();
            let d = proj.dofs(&f, &tet, 0).unwrap();
            let pi = proj.method().reconstruct(&d).to_bary();
            for (k, func) in proj.method().functionals().iter().enumerate() {
                let _: &Functional = func;
                assert!((func.apply(&pi) - d[k]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn reproduction_on_mesh() {
        let mesh = TetMesh::build(5).unwrap();
        let quad = QuadSettings::default();
        let q = TargetFunction::custom("q", |p| 1.0 + p.x * p.y - 2.0 * p.z * p.z + 0.3 * p.x);
        for cfg in all_strategies() {
            assert!(l1_error(&q, &mesh, &cfg, &quad).unwrap() < 1e-9);
        }
        let a = TargetFunction::custom("a", |p| 1.0 + 2.0 * p.x - p.y + 0.25 * p.z);
        assert!(l1_error(&a, &mesh, &StrategyConfig::classical(), &quad).unwrap() < 1e-11);
    }

    #[test]
    fn grid_search_tie_keeps_first_and_single_candidate() {
        let grid = TuningGrid {
            first: vec![1.0],
            second: vec![1.0],
            functions: vec![TargetFunction::standard(3).unwrap()],
            meshes: vec![3],
        };
        let r = grid_search(&grid, TuneFamily::FaceVolume, &QuadSettings::default()).unwrap();
        assert_eq!(r.best, (1.0, 1.0));
        // a quadratic target is reproduced by every candidate: all totals tie near zero
        let grid = TuningGrid {
            first: vec![1.0, 1.0],
            second: vec![2.0, 2.0],
            functions: vec![TargetFunction::custom("c", |_| 1.0)],
            meshes: vec![2],
        };
        let r = grid_search(&grid, TuneFamily::EdgeFace, &QuadSettings::default()).unwrap();
        assert_eq!(r.surface.len(), 4);
        assert_eq!(r.best, (1.0, 2.0));
        let empty = TuningGrid { first: vec![], ..grid };
        assert!(grid_search(&empty, TuneFamily::EdgeFace, &QuadSettings::default()).is_err());
    }

    #[test]
    fn evaluation_failure_reports_cell() {
        let mesh = TetMesh::build(2).unwrap();
        let bad = TargetFunction::custom("bad", |p| if p.x > 0.5 { f64::NAN } else { 0.0 });
        let err = l1_error(&bad, &mesh, &StrategyConfig::classical(), &QuadSettings::default()).unwrap_err();
        assert!(matches!(err, Error::Evaluation { .. }));
    }

    #[test]
    fn csv_shape() {
        let report = convergence_study(
            &[TargetFunction::standard(3).unwrap()],
            &[3],
            &default_methods(),
            &QuadSettings::default(),
        )
        .unwrap();
        let csv = report.to_csv(false);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 5);
        assert!(lines[1..]
            .iter()
            .all(|l| l.split(',').count() == 6 && l.ends_with(",0")));
    }

    #[test]
    fn monotonicity_helper() {
        assert!(is_refinement_monotone(&[4.0, 3.0, 2.0], 0.05));
        assert!(is_refinement_monotone(&[4.0, 3.0, 3.1, 2.0], 0.05));
        assert!(!is_refinement_monotone(&[4.0, 3.0, 3.5], 0.05));
        assert!(!is_refinement_monotone(&[4.0, 4.1, 3.0, 3.1], 0.05));
    }

    #[test]
    fn unknown_function_id() {
        assert!(TargetFunction::by_id("f9").is_err());
        assert_eq!(TargetFunction::by_id("f7").unwrap().id(), "f7");
    }
}
