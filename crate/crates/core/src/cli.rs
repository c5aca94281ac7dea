//! Command-line front end: `check`, `tune`, `converge` and `project`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::element::{assemble_h, unisolvence_check, StrategyConfig};
use crate::error::Error;
use crate::experiment::{
    convergence_study, default_methods, grid_search, ErrorReport, Projector, QuadSettings, TargetFunction, TuneFamily,
    TuningGrid, DEFAULT_MESHES,
};
use crate::simplex::{BarycentricPoint, Point3, Tetrahedron};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 2;
pub const EXIT_UNWRITABLE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "histotet",
    version,
    about = "Quadratic weighted histopolation on tetrahedral meshes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Gauss-Jacobi points per direction for the degrees of freedom.
    #[arg(long, global = true, default_value_t = 8)]
    pub quad_m: usize,

    /// Polynomial degree integrated exactly by the L1 error rule.
    #[arg(long, global = true, default_value_t = 8)]
    pub error_degree: usize,

    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Unisolvence diagnostics (det, closed form, rank, SPD) over parameter grids.
    Check(CheckArgs),
    /// Grid search for the density parameters minimizing the accumulated L1 error.
    Tune(TuneArgs),
    /// L1 errors of the projectors on refined meshes; writes errors.csv and SVG plots.
    Converge(ConvergeArgs),
    /// Project one function on one tetrahedron and print the details.
    Project(ProjectArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Classical,
    Fv,
    Vol,
    Ef,
}

impl StrategyArg {
    fn family(self) -> Option<TuneFamily> {
        match self {
            StrategyArg::Classical => None,
            StrategyArg::Fv => Some(TuneFamily::FaceVolume),
            StrategyArg::Vol => Some(TuneFamily::Volumetric),
            StrategyArg::Ef => Some(TuneFamily::EdgeFace),
        }
    }
}

/// Density parameters; each accepts a comma-separated list.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    #[arg(long, value_delimiter = ',')]
    pub alpha: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub beta: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub theta: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub gamma: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub zeta: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub nu: Vec<f64>,
}

impl ParamArgs {
    fn lists(&self, family: TuneFamily) -> (&[f64], &[f64]) {
        match family {
            TuneFamily::FaceVolume => (&self.alpha, &self.beta),
            TuneFamily::Volumetric => (&self.theta, &self.gamma),
            TuneFamily::EdgeFace => (&self.zeta, &self.nu),
        }
    }

    /// Candidate lists, falling back to the default grids.
    fn grids(&self, family: TuneFamily) -> (Vec<f64>, Vec<f64>) {
        let (a, b) = self.lists(family);
        let (da, db) = family.default_grids();
        (
            if a.is_empty() { da } else { a.to_vec() },
            if b.is_empty() { db } else { b.to_vec() },
        )
    }

    /// A single configuration: first value of each list, else the given default.
    fn single(&self, family: TuneFamily, default: (f64, f64)) -> StrategyConfig {
        let (a, b) = self.lists(family);
        family.config(
            a.first().copied().unwrap_or(default.0),
            b.first().copied().unwrap_or(default.1),
        )
    }
}

const DEFAULT_PARAMS: [(TuneFamily, (f64, f64)); 3] = [
    (TuneFamily::FaceVolume, (2.0, 2.0)),
    (TuneFamily::Volumetric, (0.5, 2.0)),
    (TuneFamily::EdgeFace, (2.0, 2.0)),
];

fn default_params(family: TuneFamily) -> (f64, f64) {
    DEFAULT_PARAMS
        .iter()
        .find(|(f, _)| *f == family)
        .map(|(_, p)| *p)
        .unwrap()
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Family to check (default: fv, vol and ef).
    #[arg(long, value_enum)]
    pub strategy: Option<StrategyArg>,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Also write check.csv into this directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    #[arg(long, value_enum)]
    pub strategy: StrategyArg,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Mesh parameters n (6(n-1)^3 cells each).
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_MESHES.to_vec())]
    pub n: Vec<usize>,
    /// Validation functions.
    #[arg(long, value_delimiter = ',', default_values_t = default_functions())]
    pub functions: Vec<String>,
    /// Functions excluded from tuning.
    #[arg(long, value_delimiter = ',')]
    pub holdout: Vec<String>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    /// Run one method only (default: classical, fv, vol and ef).
    #[arg(long, value_enum)]
    pub strategy: Option<StrategyArg>,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_MESHES.to_vec())]
    pub n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = default_functions())]
    pub functions: Vec<String>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Record wall time in the `seconds` column (otherwise 0, keeping output reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    #[arg(long, value_enum, default_value = "fv")]
    pub strategy: StrategyArg,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Target function id.
    #[arg(long, default_value = "f4")]
    pub function: String,
    /// Vertices as `x,y,z;x,y,z;x,y,z;x,y,z` (default: reference tetrahedron).
    #[arg(long)]
    pub tet: Option<String>,
}

fn default_functions() -> Vec<String> {
    (1..=8).map(|k| format!("f{k}")).collect()
}

fn parse_functions(ids: &[String]) -> Result<Vec<TargetFunction>, Error> {
    ids.iter().map(|s| TargetFunction::by_id(s.trim())).collect()
}

fn parse_tet(s: &str) -> Result<Tetrahedron, Error> {
    let pts: Vec<Point3> = s
        .split(';')
        .map(|v| {
            let c: Vec<f64> = v
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| Error::Argument(format!("bad coordinate in `{v}`: {e}")))?;
            match c[..] {
                [x, y, z] => Ok(Point3::new(x, y, z)),
                _ => Err(Error::Argument(format!("vertex `{v}` needs three coordinates"))),
            }
        })
        .collect::<Result<_, _>>()?;
    let v: [Point3; 4] = pts
        .try_into()
        .map_err(|_| Error::Argument("a tetrahedron needs four vertices".into()))?;
    Tetrahedron::new(v)
}

fn ensure_dir(dir: &Path) -> Result<(), i32> {
    fs::create_dir_all(dir).map_err(|e| {
        eprintln!("error: cannot create output directory {}: {e}", dir.display());
        EXIT_UNWRITABLE
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), i32> {
    fs::write(path, contents).map_err(|e| {
        eprintln!("error: cannot write {}: {e}", path.display());
        EXIT_UNWRITABLE
    })
}

fn fail(e: Error) -> i32 {
    eprintln!("error: {e}");
    match e {
        Error::Domain(_) | Error::Unisolvence { .. } => EXIT_CHECK_FAILED,
        _ => EXIT_ERROR,
    }
}

/// Parses `args` and runs; returns the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> i32 {
    if let Some(t) = cli.threads {
        // a second initialization in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
    }
    let quad = QuadSettings {
        dof_points: cli.quad_m,
        error_degree: cli.error_degree,
    };
    let result = match cli.command {
        Command::Check(a) => cmd_check(&a),
        Command::Tune(a) => cmd_tune(&a, &quad),
        Command::Converge(a) => cmd_converge(&a, &quad),
        Command::Project(a) => cmd_project(&a, &quad),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(code) => code,
    }
}

/// Diagnostics table; exit code 2 when any candidate fails.
pub fn cmd_check(args: &CheckArgs) -> Result<(), i32> {
    let families: Vec<TuneFamily> = match args.strategy {
        None => vec![TuneFamily::FaceVolume, TuneFamily::Volumetric, TuneFamily::EdgeFace],
        Some(s) => match s.family() {
            Some(f) => vec![f],
            None => {
                println!("classical element: four face averages, always unisolvent");
                return Ok(());
            }
        },
    };
    let mut csv = String::from("method,params,det,closed_form_det,relative_error,rank6,spd\n");
    let mut all_ok = true;
    println!(
        "{:<8} {:<26} {:>13} {:>13} {:>10} {:>6} {:>5}",
        "method", "params", "det", "closed form", "rel err", "rank6", "spd"
    );
    for family in families {
        let (first, second) = args.params.grids(family);
        for &a in &first {
            for &b in &second {
                let cfg = family.config(a, b);
                let report = match unisolvence_check(&cfg) {
                    Ok(r) => r,
                    Err(e) => {
                        eprintln!("rejected {cfg}: {e}");
                        all_ok = false;
                        continue;
                    }
                };
                let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.6e}"));
                let spd = report.spd.map_or("-".to_string(), |s| s.to_string());
                println!(
                    "{:<8} {:<26} {:>13.6e} {:>13} {:>10} {:>6} {:>5}",
                    cfg.method_id(),
                    cfg.params_string(),
                    report.det,
                    opt(report.closed_form_det),
                    report.relative_error.map_or("-".to_string(), |x| format!("{x:.2e}")),
                    report.rank6,
                    spd
                );
                let _ = writeln!(
                    csv,
                    "{},{},{:e},{},{},{},{}",
                    cfg.method_id(),
                    cfg.params_string(),
                    report.det,
                    report.closed_form_det.map_or(String::new(), |x| format!("{x:e}")),
                    report.relative_error.map_or(String::new(), |x| format!("{x:e}")),
                    report.rank6,
                    report.spd.map_or(String::new(), |s| s.to_string())
                );
                all_ok &= report.passed();
            }
        }
    }
    if let Some(dir) = &args.out {
        ensure_dir(dir)?;
        write_file(&dir.join("check.csv"), &csv)?;
    }
    if all_ok {
        Ok(())
    } else {
        eprintln!("unisolvence check failed");
        Err(EXIT_CHECK_FAILED)
    }
}

pub fn cmd_tune(args: &TuneArgs, quad: &QuadSettings) -> Result<(), i32> {
    let Some(family) = args.strategy.family() else {
        eprintln!("error: the classical element has no parameters to tune");
        return Err(EXIT_CHECK_FAILED);
    };
    let (first, second) = args.params.grids(family);
    let functions: Vec<TargetFunction> = parse_functions(&args.functions)
        .map_err(fail)?
        .into_iter()
        .filter(|f| !args.holdout.iter().any(|h| h.trim() == f.id()))
        .collect();
    let grid = TuningGrid {
        first,
        second,
        functions,
        meshes: args.n.clone(),
    };
    if grid.first.is_empty() || grid.second.is_empty() || grid.functions.is_empty() || grid.meshes.is_empty() {
        eprintln!("error: empty tuning grid");
        return Err(EXIT_CHECK_FAILED);
    }
    ensure_dir(&args.out)?;
    let result = grid_search(&grid, family, quad).map_err(fail)?;
    write_file(&args.out.join("tuning_surface.csv"), &result.surface_csv())?;
    let (a, b) = family.parameter_names();
    println!(
        "optimal {a} = {}, {b} = {} (accumulated L1 error {:e})",
        result.best.0, result.best.1, result.best_error
    );
    Ok(())
}

fn converge_methods(args: &ConvergeArgs) -> Vec<StrategyConfig> {
    let resolve = |family: TuneFamily| args.params.single(family, default_params(family));
    match args.strategy {
        None => default_methods()
            .into_iter()
            .map(|m| match m.method_id() {
                "fv" => resolve(TuneFamily::FaceVolume),
                "vol" => resolve(TuneFamily::Volumetric),
                "ef" => resolve(TuneFamily::EdgeFace),
                _ => m,
            })
            .collect(),
        Some(StrategyArg::Classical) => vec![StrategyConfig::classical()],
        Some(s) => vec![resolve(s.family().unwrap())],
    }
}

pub fn cmd_converge(args: &ConvergeArgs, quad: &QuadSettings) -> Result<(), i32> {
    let functions = parse_functions(&args.functions).map_err(fail)?;
    let methods = converge_methods(args);
    for m in &methods {
        m.validate().map_err(fail)?;
    }
    ensure_dir(&args.out)?;
    let report = convergence_study(&functions, &args.n, &methods, quad).map_err(fail)?;
    write_file(&args.out.join("errors.csv"), &report.to_csv(args.timing))?;
    for f in &functions {
        let svg = convergence_svg(&report, f.id(), &methods);
        write_file(&args.out.join(format!("convergence_{}.svg", f.id())), &svg)?;
    }
    println!(
        "wrote {} rows to {}",
        report.rows.len(),
        args.out.join("errors.csv").display()
    );
    Ok(())
}

pub fn cmd_project(args: &ProjectArgs, quad: &QuadSettings) -> Result<(), i32> {
    let f = TargetFunction::by_id(&args.function).map_err(fail)?;
    let tet = match &args.tet {
        Some(s) => parse_tet(s).map_err(fail)?,
        None => Tetrahedron::reference(),
    };
    let cfg = match args.strategy.family() {
        Some(family) => args.params.single(family, default_params(family)),
        None => StrategyConfig::classical(),
    };
    let proj = Projector::new(&cfg, quad).map_err(fail)?;
    let dofs = proj.dofs(&f, &tet, 0).map_err(fail)?;
    let pi = proj.method().reconstruct(&dofs);
    println!("strategy: {cfg}");
    println!("function: {}", f.id());
    let labels: Vec<String> = proj.method().functionals().iter().map(|x| x.label()).collect();
    println!("dofs:");
    for (l, v) in labels.iter().zip(&dofs) {
        println!("  {l:<4} {v:+.15e}");
    }
    if !cfg.is_classical() {
        let op = assemble_h(&cfg).map_err(fail)?;
        println!(
            "cond_1(H) = {:.6e}{}",
            op.condition(),
            if op.ill_conditioned() {
                "  (ill-conditioned)"
            } else {
                ""
            }
        );
    }
    let names = ["λ1", "λ2", "λ3", "λ4", "λ1λ2", "λ1λ3", "λ1λ4", "λ2λ3", "λ2λ4", "λ3λ4"];
    println!("reconstruction coefficients:");
    for (n, c) in names.iter().zip(&pi.0) {
        println!("  {n:<6} {c:+.15e}");
    }
    println!("samples (λ, f, π f, |f - π f|):");
    let samples = [
        BarycentricPoint::CENTROID,
        BarycentricPoint([0.1, 0.2, 0.3, 0.4]),
        BarycentricPoint([0.7, 0.1, 0.1, 0.1]),
        BarycentricPoint([0.0, 0.5, 0.25, 0.25]),
        BarycentricPoint([0.5, 0.5, 0.0, 0.0]),
    ];
    for l in samples {
        let v = f.eval(tet.point_from_barycentric(&l));
        let p = pi.evaluate(&l);
        println!("  {:?}  {v:+.12e}  {p:+.12e}  {:.3e}", l.0, (v - p).abs());
    }
    Ok(())
}

/// Log-log chart of error against `n`, one polyline per method.
pub fn convergence_svg(report: &ErrorReport, function: &str, methods: &[StrategyConfig]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 440.0;
    const L: f64 = 80.0;
    const R: f64 = 150.0;
    const T: f64 = 40.0;
    const B: f64 = 60.0;
    const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

    let series: Vec<(String, Vec<(usize, f64)>)> = methods
        .iter()
        .map(|m| {
            let pts = report
                .series(function, m.method_id())
                .into_iter()
                .filter(|&(_, e)| e > 0.0 && e.is_finite())
                .collect();
            (m.to_string(), pts)
        })
        .collect();
    let all: Vec<(usize, f64)> = series.iter().flat_map(|(_, p)| p.iter().copied()).collect();

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">L1 error, {}</text>"#,
        (L + W - R) / 2.0,
        xml_escape(function)
    );
    if all.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }

    let (nmin, nmax) = all.iter().fold((usize::MAX, 0), |(a, b), &(n, _)| (a.min(n), b.max(n)));
    let (lx0, mut lx1) = ((nmin as f64).log10(), (nmax as f64).log10());
    if lx1 <= lx0 {
        lx1 = lx0 + 1.0;
    }
    let (emin, emax) = all
        .iter()
        .fold((f64::INFINITY, 0.0_f64), |(a, b), &(_, e)| (a.min(e), b.max(e)));
    let ly0 = emin.log10().floor();
    let ly1 = emax.log10().ceil().max(ly0 + 1.0);
    let px = |n: f64| L + (n.log10() - lx0) / (lx1 - lx0) * (W - L - R);
    let py = |e: f64| H - B - (e.log10() - ly0) / (ly1 - ly0) * (H - T - B);

    let _ = writeln!(
        svg,
        r#"<rect x="{L}" y="{T}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - L - R,
        H - T - B
    );
    let mut ns: Vec<usize> = all.iter().map(|&(n, _)| n).collect();
    ns.sort_unstable();
    ns.dedup();
    for n in ns {
        let x = px(n as f64);
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="#ddd"/><text x="{x:.2}" y="{}" text-anchor="middle">{n}</text>"##,
            T,
            H - B,
            H - B + 18.0
        );
    }
    let mut d = ly0 as i32;
    while d as f64 <= ly1 {
        let y = py(10f64.powi(d));
        let _ = writeln!(
            svg,
            r##"<line x1="{L}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">1e{d}</text>"##,
            W - R,
            L - 6.0,
            y + 4.0
        );
        d += 1;
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">n</text>"#,
        (L + W - R) / 2.0,
        H - 18.0
    );

    for (k, (label, pts)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        if !pts.is_empty() {
            let path: Vec<String> = pts
                .iter()
                .map(|&(n, e)| format!("{:.2},{:.2}", px(n as f64), py(e)))
                .collect();
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                path.join(" ")
            );
            for &(n, e) in pts {
                let _ = writeln!(
                    svg,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                    px(n as f64),
                    py(e)
                );
            }
        }
        let ly = T + 16.0 + 20.0 * k as f64;
        let lx = W - R + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 18.0,
            lx + 24.0,
            ly + 4.0,
            xml_escape(label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
