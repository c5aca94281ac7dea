//! Barycentric geometry on tetrahedra, exact simplex moments and the
//! structured Kuhn meshes of the unit cube.
//!
//! Vertex, face and edge indices are zero-based throughout: face `j` is the
//! face opposite vertex `j`, edge `(i, j)` always has `i < j`.

use crate::error::{Error, Result};

/// Tolerance used for point-in-cell queries.
pub const INSIDE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    fn sub(self, o: Point3) -> [f64; 3] {
        [self.x - o.x, self.y - o.y, self.z - o.z]
    }
}

/// Barycentric coordinates of a point with respect to a tetrahedron.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarycentricPoint(pub [f64; 4]);

impl BarycentricPoint {
    pub const CENTROID: BarycentricPoint = BarycentricPoint([0.25; 4]);

    /// Builds a point, checking that the coordinates sum to one.
    pub fn new(lambda: [f64; 4]) -> Result<Self> {
        let s: f64 = lambda.iter().sum();
        if (s - 1.0).abs() > 1e-12 || lambda.iter().any(|l| !l.is_finite()) {
            return Err(Error::Domain(format!("barycentric coordinates must sum to 1, got {s}")));
        }
        Ok(Self(lambda))
    }

    pub fn vertex(i: usize) -> Self {
        let mut l = [0.0; 4];
        l[i] = 1.0;
        Self(l)
    }

    pub fn is_inside(&self, tol: f64) -> bool {
        self.0.iter().all(|&l| l >= -tol)
    }
}

/// A nondegenerate tetrahedron with a cached affine inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct Tetrahedron {
    vertices: [Point3; 4],
    volume: f64,
    // rows map (p - v0) to (lambda_1, lambda_2, lambda_3)
    inverse: [[f64; 3]; 3],
}

impl Tetrahedron {
    pub fn new(vertices: [Point3; 4]) -> Result<Self> {
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::Geometry("non-finite vertex".into()));
        }
        let e1 = vertices[1].sub(vertices[0]);
        let e2 = vertices[2].sub(vertices[0]);
        let e3 = vertices[3].sub(vertices[0]);
        // columns e1, e2, e3
        let det = e1[0] * (e2[1] * e3[2] - e2[2] * e3[1]) - e2[0] * (e1[1] * e3[2] - e1[2] * e3[1])
            + e3[0] * (e1[1] * e2[2] - e1[2] * e2[1]);
        let scale = [e1, e2, e3]
            .iter()
            .flat_map(|e| e.iter())
            .fold(0.0_f64, |m, v| m.max(v.abs()));
        if !(det.abs() > 1e-14 * scale.powi(3)) {
            return Err(Error::Geometry(format!(
                "degenerate tetrahedron (signed 6*volume = {det:e})"
            )));
        }
        // inverse of [e1 e2 e3] via cofactors; rows of the inverse are
        // cross products of the other two columns
        let cross = |a: [f64; 3], b: [f64; 3]| {
            [
                a[1] * b[2] - a[2] * b[1],
                a[2] * b[0] - a[0] * b[2],
                a[0] * b[1] - a[1] * b[0],
            ]
        };
        let r1 = cross(e2, e3);
        let r2 = cross(e3, e1);
        let r3 = cross(e1, e2);
        let inverse = [r1, r2, r3].map(|r| r.map(|v| v / det));
        Ok(Self {
            vertices,
            volume: det.abs() / 6.0,
            inverse,
        })
    }

    /// The reference tetrahedron with vertices 0, e1, e2, e3.
    pub fn reference() -> Self {
        Self::new([
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(0.0, 0.0, 1.0),
        ])
        .expect("reference tetrahedron is nondegenerate")
    }

    pub fn vertices(&self) -> &[Point3; 4] {
        &self.vertices
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn centroid(&self) -> Point3 {
        self.point_from_barycentric(&BarycentricPoint::CENTROID)
    }

    pub fn barycentric(&self, p: Point3) -> BarycentricPoint {
        let d = p.sub(self.vertices[0]);
        let mut l = [0.0; 4];
        for (k, row) in self.inverse.iter().enumerate() {
            l[k + 1] = row[0] * d[0] + row[1] * d[1] + row[2] * d[2];
        }
        l[0] = 1.0 - l[1] - l[2] - l[3];
        BarycentricPoint(l)
    }

    pub fn point_from_barycentric(&self, lambda: &BarycentricPoint) -> Point3 {
        let mut p = Point3::default();
        for (l, v) in lambda.0.iter().zip(&self.vertices) {
            p.x += l * v.x;
            p.y += l * v.y;
            p.z += l * v.z;
        }
        p
    }

    pub fn contains(&self, p: Point3) -> bool {
        self.barycentric(p).is_inside(INSIDE_TOL)
    }
}

/// Free function form of [`Tetrahedron::barycentric`].
pub fn barycentric(tet: &Tetrahedron, p: Point3) -> BarycentricPoint {
    tet.barycentric(p)
}

/// Free function form of [`Tetrahedron::point_from_barycentric`].
pub fn point_from_barycentric(tet: &Tetrahedron, lambda: &BarycentricPoint) -> Point3 {
    tet.point_from_barycentric(lambda)
}

/// Labels of the face opposite vertex `opposite`: the three face
/// coordinates are the tetrahedron's lambdas with index != opposite, in
/// ascending index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaceFrame {
    opposite: usize,
    labels: [usize; 3],
}

impl FaceFrame {
    pub fn new(opposite: usize) -> Self {
        assert!(opposite < 4, "face index out of range");
        let mut labels = [0; 3];
        let mut r = 0;
        for i in 0..4 {
            if i != opposite {
                labels[r] = i;
                r += 1;
            }
        }
        Self { opposite, labels }
    }

    pub fn all() -> [FaceFrame; 4] {
        [0, 1, 2, 3].map(FaceFrame::new)
    }

    pub fn opposite(&self) -> usize {
        self.opposite
    }

    /// Tetrahedron vertex index carrying face coordinate `r`.
    pub fn labels(&self) -> [usize; 3] {
        self.labels
    }

    /// Lifts face coordinates to tetrahedron barycentrics (lambda_opposite = 0).
    pub fn lift(&self, mu: [f64; 3]) -> BarycentricPoint {
        let mut l = [0.0; 4];
        for (r, &i) in self.labels.iter().enumerate() {
            l[i] = mu[r];
        }
        BarycentricPoint(l)
    }

    /// Face coordinates of a point lying on the face.
    pub fn restrict(&self, lambda: &BarycentricPoint) -> [f64; 3] {
        self.labels.map(|i| lambda.0[i])
    }
}

/// The edge from vertex `i` to vertex `j`, parametrized by
/// `t -> (1 - t) v_i + t v_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeFrame {
    i: usize,
    j: usize,
}

/// Edges in the order of the quadratic basis B.
pub const EDGE_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

impl EdgeFrame {
    pub fn new(i: usize, j: usize) -> Self {
        assert!(i < j && j < 4, "edge must satisfy i < j < 4");
        Self { i, j }
    }

    pub fn all() -> [EdgeFrame; 6] {
        EDGE_PAIRS.map(|(i, j)| EdgeFrame::new(i, j))
    }

    pub fn endpoints(&self) -> (usize, usize) {
        (self.i, self.j)
    }

    pub fn at(&self, t: f64) -> BarycentricPoint {
        let mut l = [0.0; 4];
        l[self.i] = 1.0 - t;
        l[self.j] = t;
        BarycentricPoint(l)
    }
}

/// Normalized Dirichlet-type moment of the unit d-simplex:
/// `(1/|S_d|) ∫ Π λ_i^{a_i} = d! Π Γ(a_i + 1) / Γ(d + 1 + Σ a_i)`.
///
/// `exponents` must hold `d + 1` entries, each strictly greater than -1.
pub fn simplex_moment(exponents: &[f64]) -> Result<f64> {
    let d = exponents
        .len()
        .checked_sub(1)
        .filter(|&d| d >= 1)
        .ok_or_else(|| Error::Argument("simplex_moment needs at least two exponents (d >= 1)".into()))?;
    if let Some(a) = exponents.iter().find(|&&a| !(a > -1.0) || !a.is_finite()) {
        return Err(Error::Domain(format!("moment exponent {a} must exceed -1")));
    }
    let sum: f64 = exponents.iter().sum();
    let mut log = libm::lgamma(d as f64 + 1.0) - libm::lgamma(d as f64 + 1.0 + sum);
    for &a in exponents {
        log += libm::lgamma(a + 1.0);
    }
    Ok(log.exp())
}

/// Structured tetrahedral partition of the unit cube.
#[derive(Debug, Clone)]
pub struct TetMesh {
    n: usize,
    vertices: Vec<Point3>,
    cells: Vec<[usize; 4]>,
}

/// The six monotone lattice paths from corner (0,0,0) to (1,1,1) of a cube,
/// given as the order in which the axes are incremented.
const KUHN_PATHS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

impl TetMesh {
    /// Uniform grid of `(n-1)^3` cubes on `[0,1]^3`, each cut into six
    /// tetrahedra sharing the (0,0,0)-(1,1,1) diagonal.
    ///
    /// Cell vertices are listed along the monotone path: the cube's low
    /// corner, then one step along the first axis of the permutation, then
    /// a second step, then the high corner. Cells are emitted cube by cube
    /// (x fastest, then y, then z), six per cube in [`KUHN_PATHS`] order.
    pub fn build(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Argument(format!("mesh parameter n must be >= 2, got {n}")));
        }
        let h = 1.0 / (n - 1) as f64;
        let idx = |i: usize, j: usize, k: usize| i + n * (j + n * k);
        let mut vertices = Vec::with_capacity(n * n * n);
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    vertices.push(Point3::new(i as f64 * h, j as f64 * h, k as f64 * h));
                }
            }
        }
        let m = n - 1;
        let mut cells = Vec::with_capacity(6 * m * m * m);
        for k in 0..m {
            for j in 0..m {
                for i in 0..m {
                    for path in KUHN_PATHS {
                        let mut c = [i, j, k];
                        let mut cell = [idx(c[0], c[1], c[2]); 4];
                        for (s, &axis) in path.iter().enumerate() {
                            c[axis] += 1;
                            cell[s + 1] = idx(c[0], c[1], c[2]);
                        }
                        cells.push(cell);
                    }
                }
            }
        }
        Ok(Self { n, vertices, cells })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn cells(&self) -> &[[usize; 4]] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn tetrahedron(&self, cell: usize) -> Tetrahedron {
        let c = self.cells[cell];
        Tetrahedron::new(c.map(|v| self.vertices[v])).expect("mesh cells are nondegenerate")
    }

    pub fn tetrahedra(&self) -> impl Iterator<Item = Tetrahedron> + '_ {
        (0..self.cells.len()).map(|c| self.tetrahedron(c))
    }

    /// First cell containing `p` (ties on shared boundaries go to the lowest index).
    pub fn locate(&self, p: Point3) -> Option<usize> {
        (0..self.cells.len()).find(|&c| self.tetrahedron(c).contains(p))
    }
}

/// Free function form of [`TetMesh::build`].
pub fn build_mesh(n: usize) -> Result<TetMesh> {
    TetMesh::build(n)
}
