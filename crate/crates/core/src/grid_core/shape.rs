use nalgebra::{DMatrix, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::{Point, MAX_DIM};
use crate::error::{Error, Result};
use crate::numeric::unit_ball_volume;

/// Anything with a membership test and a bounding box can be rasterized.
pub trait Region: Sync {
    fn dim(&self) -> usize;
    fn contains(&self, p: &Point) -> bool;
    /// Axis-aligned bounding box, `None` for the empty set.
    fn bounding_box(&self) -> Option<(Point, Point)>;
}

/// Invertible affine map `x -> linear * x + shift`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub linear: Vec<Vec<f64>>,
    pub shift: Vec<f64>,
}

impl AffineMap {
    pub fn new(linear: Vec<Vec<f64>>, shift: Vec<f64>) -> Result<Self> {
        let map = Self { linear, shift };
        map.validate()?;
        Ok(map)
    }

    pub fn identity(dim: usize) -> Self {
        let linear = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self {
            linear,
            shift: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.shift.len();
        if !(1..=MAX_DIM).contains(&d) {
            return Err(Error::InvalidShape(format!("affine map of dimension {d}")));
        }
        if self.linear.len() != d || self.linear.iter().any(|row| row.len() != d) {
            return Err(Error::InvalidShape(
                "affine linear part must be d x d".into(),
            ));
        }
        if self
            .linear
            .iter()
            .flatten()
            .chain(&self.shift)
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidShape("non-finite affine coefficient".into()));
        }
        let det = self.det();
        if det == 0.0 || !det.is_finite() || det.abs() < 1e-300 {
            return Err(Error::SingularMap(det));
        }
        Ok(())
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| self.linear[i][j])
    }

    pub fn det(&self) -> f64 {
        self.matrix().determinant()
    }

    /// `self ∘ inner`, i.e. `x -> self(inner(x))`.
    pub fn compose(&self, inner: &AffineMap) -> Result<AffineMap> {
        if self.dim() != inner.dim() {
            return Err(Error::arg("composing affine maps of different dimension"));
        }
        let a = self.matrix();
        let b = inner.matrix();
        let ab = &a * &b;
        let shift = &a * nalgebra::DVector::from_column_slice(&inner.shift)
            + nalgebra::DVector::from_column_slice(&self.shift);
        AffineMap::new(rows(&ab), shift.iter().copied().collect())
    }

    pub fn inverse(&self) -> Result<AffineMap> {
        let inv = self
            .matrix()
            .try_inverse()
            .ok_or(Error::SingularMap(self.det()))?;
        let shift = -(&inv * nalgebra::DVector::from_column_slice(&self.shift));
        AffineMap::new(rows(&inv), shift.iter().copied().collect())
    }

    pub fn apply(&self, p: &Point) -> Point {
        let d = self.dim();
        let mut out = [0.0; MAX_DIM];
        for i in 0..d {
            out[i] = self.shift[i] + (0..d).map(|j| self.linear[i][j] * p[j]).sum::<f64>();
        }
        out
    }

    /// Linear part embedded in a 3x3 matrix with identity on unused axes.
    fn padded(&self) -> (Matrix3<f64>, Vector3<f64>) {
        let mut m = Matrix3::identity();
        let mut s = Vector3::zeros();
        for i in 0..self.dim() {
            s[i] = self.shift[i];
            for j in 0..self.dim() {
                m[(i, j)] = self.linear[i][j];
            }
        }
        (m, s)
    }
}

pub(crate) fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Analytic set description. Ellipsoids are `{x : (x - c)^T A (x - c) <= 1}`
/// with `A` symmetric positive definite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ShapeSpec {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Ellipsoid {
        center: Vec<f64>,
        matrix: Vec<Vec<f64>>,
    },
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    Union {
        parts: Vec<ShapeSpec>,
    },
    Difference {
        base: Box<ShapeSpec>,
        removed: Box<ShapeSpec>,
    },
    AffineImage {
        map: AffineMap,
        shape: Box<ShapeSpec>,
    },
}

impl ShapeSpec {
    pub fn ball(center: &[f64], radius: f64) -> Self {
        ShapeSpec::Ball {
            center: center.to_vec(),
            radius,
        }
    }

    /// Ball of the given measure centred at the origin.
    pub fn centered_ball(dim: usize, measure: f64) -> Self {
        let r = (measure / unit_ball_volume(dim)).powf(1.0 / dim as f64);
        ShapeSpec::Ball {
            center: vec![0.0; dim],
            radius: r,
        }
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        ShapeSpec::Box {
            lo: vec![lo],
            hi: vec![hi],
        }
    }

    pub fn cuboid(lo: &[f64], hi: &[f64]) -> Self {
        ShapeSpec::Box {
            lo: lo.to_vec(),
            hi: hi.to_vec(),
        }
    }

    pub fn ellipsoid(center: &[f64], matrix: Vec<Vec<f64>>) -> Self {
        ShapeSpec::Ellipsoid {
            center: center.to_vec(),
            matrix,
        }
    }

    pub fn union(parts: Vec<ShapeSpec>) -> Self {
        ShapeSpec::Union { parts }
    }

    pub fn difference(base: ShapeSpec, removed: ShapeSpec) -> Self {
        ShapeSpec::Difference {
            base: Box::new(base),
            removed: Box::new(removed),
        }
    }

    /// Dimension, or `None` for a shape without any dimensional leaf (an empty union).
    pub fn dim(&self) -> Option<usize> {
        match self {
            ShapeSpec::Ball { center, .. } | ShapeSpec::Ellipsoid { center, .. } => {
                Some(center.len())
            }
            ShapeSpec::Box { lo, .. } => Some(lo.len()),
            ShapeSpec::Union { parts } => parts.iter().find_map(|p| p.dim()),
            ShapeSpec::Difference { base, removed } => base.dim().or_else(|| removed.dim()),
            ShapeSpec::AffineImage { map, .. } => Some(map.dim()),
        }
    }

    /// Checks every invariant of the variant tree and returns the dimension.
    pub fn validate(&self) -> Result<Option<usize>> {
        let d = self.dim();
        if let Some(d) = d {
            if !(1..=MAX_DIM).contains(&d) {
                return Err(Error::InvalidShape(format!("dimension {d} not in 1..=3")));
            }
        }
        self.validate_inner(d)?;
        Ok(d)
    }

    fn validate_inner(&self, d: Option<usize>) -> Result<()> {
        let check_dim = |len: usize| -> Result<()> {
            match d {
                Some(d) if d != len => Err(Error::InvalidShape(format!(
                    "mixed dimensions {d} and {len}"
                ))),
                _ => Ok(()),
            }
        };
        let finite = |xs: &[f64]| xs.iter().all(|v| v.is_finite());
        match self {
            ShapeSpec::Ball { center, radius } => {
                check_dim(center.len())?;
                if !(radius.is_finite() && *radius > 0.0) || !finite(center) {
                    return Err(Error::InvalidShape(format!("ball radius {radius}")));
                }
            }
            ShapeSpec::Ellipsoid { center, matrix } => {
                check_dim(center.len())?;
                let n = center.len();
                if matrix.len() != n || matrix.iter().any(|r| r.len() != n) || !finite(center) {
                    return Err(Error::InvalidShape("ellipsoid matrix must be d x d".into()));
                }
                let m = DMatrix::from_fn(n, n, |i, j| matrix[i][j]);
                let asym = (&m - m.transpose()).amax();
                if asym > 1e-12 * m.amax().max(1.0) {
                    return Err(Error::InvalidShape(
                        "ellipsoid matrix is not symmetric".into(),
                    ));
                }
                let eig = m.symmetric_eigenvalues();
                if eig.iter().any(|&l| !(l.is_finite() && l > 0.0)) {
                    return Err(Error::InvalidShape(
                        "ellipsoid matrix is not positive definite".into(),
                    ));
                }
            }
            ShapeSpec::Box { lo, hi } => {
                check_dim(lo.len())?;
                if lo.len() != hi.len() || !finite(lo) || !finite(hi) {
                    return Err(Error::InvalidShape(
                        "box corners of different length".into(),
                    ));
                }
                if lo.iter().zip(hi).any(|(a, b)| a >= b) {
                    return Err(Error::InvalidShape(
                        "box requires lo < hi componentwise".into(),
                    ));
                }
            }
            ShapeSpec::Union { parts } => {
                for p in parts {
                    p.validate_inner(d)?;
                }
            }
            ShapeSpec::Difference { base, removed } => {
                base.validate_inner(d)?;
                removed.validate_inner(d)?;
            }
            ShapeSpec::AffineImage { map, shape } => {
                check_dim(map.dim())?;
                map.validate()?;
                shape.validate_inner(d)?;
            }
        }
        Ok(())
    }

    /// Exact Lebesgue measure where it is available in closed form: balls,
    /// ellipsoids, boxes, unions of pairwise disjoint boxes and affine images thereof.
    pub fn exact_measure(&self) -> Option<f64> {
        match self {
            ShapeSpec::Ball { center, radius } => {
                Some(unit_ball_volume(center.len()) * radius.powi(center.len() as i32))
            }
            ShapeSpec::Ellipsoid { center, matrix } => {
                let n = center.len();
                let det = DMatrix::from_fn(n, n, |i, j| matrix[i][j]).determinant();
                Some(unit_ball_volume(n) / det.sqrt())
            }
            ShapeSpec::Box { lo, hi } => Some(lo.iter().zip(hi).map(|(a, b)| b - a).product()),
            ShapeSpec::Union { parts } => match parts.len() {
                0 => Some(0.0),
                1 => parts[0].exact_measure(),
                _ => {
                    let boxes: Option<Vec<(&Vec<f64>, &Vec<f64>)>> = parts
                        .iter()
                        .map(|p| match p {
                            ShapeSpec::Box { lo, hi } => Some((lo, hi)),
                            _ => None,
                        })
                        .collect();
                    let boxes = boxes?;
                    for (i, a) in boxes.iter().enumerate() {
                        for b in &boxes[i + 1..] {
                            let overlap =
                                a.0.iter()
                                    .zip(a.1)
                                    .zip(b.0.iter().zip(b.1))
                                    .all(|((alo, ahi), (blo, bhi))| alo < bhi && blo < ahi);
                            if overlap {
                                return None;
                            }
                        }
                    }
                    parts.iter().map(|p| p.exact_measure()).sum()
                }
            },
            ShapeSpec::Difference { base, removed } => {
                let disjoint = match (base.bounding_box(), removed.bounding_box()) {
                    (_, None) => true,
                    (None, _) => return Some(0.0),
                    (Some((alo, ahi)), Some((blo, bhi))) => {
                        (0..self.dim()?).any(|a| ahi[a] <= blo[a] || bhi[a] <= alo[a])
                    }
                };
                if disjoint {
                    base.exact_measure()
                } else {
                    None
                }
            }
            ShapeSpec::AffineImage { map, shape } => Some(map.det().abs() * shape.exact_measure()?),
        }
    }

    /// Conservative axis-aligned bounding box.
    pub fn bounding_box(&self) -> Option<(Point, Point)> {
        let d = self.dim()?;
        let mut lo = [0.0; MAX_DIM];
        let mut hi = [0.0; MAX_DIM];
        match self {
            ShapeSpec::Ball { center, radius } => {
                for a in 0..d {
                    lo[a] = center[a] - radius;
                    hi[a] = center[a] + radius;
                }
            }
            ShapeSpec::Ellipsoid { center, matrix } => {
                let m = DMatrix::from_fn(d, d, |i, j| matrix[i][j]);
                let inv = m.try_inverse()?;
                for a in 0..d {
                    let w = inv[(a, a)].sqrt();
                    lo[a] = center[a] - w;
                    hi[a] = center[a] + w;
                }
            }
            ShapeSpec::Box { lo: l, hi: h } => {
                lo[..d].copy_from_slice(l);
                hi[..d].copy_from_slice(h);
            }
            ShapeSpec::Union { parts } => {
                let mut any = false;
                lo = [f64::INFINITY; MAX_DIM];
                hi = [f64::NEG_INFINITY; MAX_DIM];
                for (plo, phi) in parts.iter().filter_map(|p| p.bounding_box()) {
                    any = true;
                    for a in 0..d {
                        lo[a] = lo[a].min(plo[a]);
                        hi[a] = hi[a].max(phi[a]);
                    }
                }
                if !any {
                    return None;
                }
                for a in d..MAX_DIM {
                    lo[a] = 0.0;
                    hi[a] = 0.0;
                }
            }
            ShapeSpec::Difference { base, .. } => return base.bounding_box(),
            ShapeSpec::AffineImage { map, shape } => {
                let (ilo, ihi) = shape.bounding_box()?;
                lo = [f64::INFINITY; MAX_DIM];
                hi = [f64::NEG_INFINITY; MAX_DIM];
                for corner in 0..(1usize << d) {
                    let mut p = [0.0; MAX_DIM];
                    for a in 0..d {
                        p[a] = if corner >> a & 1 == 1 { ihi[a] } else { ilo[a] };
                    }
                    let q = map.apply(&p);
                    for a in 0..d {
                        lo[a] = lo[a].min(q[a]);
                        hi[a] = hi[a].max(q[a]);
                    }
                }
                for a in d..MAX_DIM {
                    lo[a] = 0.0;
                    hi[a] = 0.0;
                }
            }
        }
        Some((lo, hi))
    }

    /// Precomputes inverses and padded matrices for fast membership tests.
    pub fn compile(&self) -> Result<CompiledShape> {
        let dim = self.validate()?.unwrap_or(1);
        Ok(CompiledShape {
            dim,
            node: Node::build(self),
            bbox: self.bounding_box(),
        })
    }

    /// The ellipsoid's `(center, A)` when this shape is affinely a ball
    /// (ball, ellipsoid, or affine image of one of those).
    pub fn as_ellipsoid(&self) -> Option<(Vec<f64>, DMatrix<f64>)> {
        match self {
            ShapeSpec::Ball { center, radius } => {
                let d = center.len();
                Some((center.clone(), DMatrix::identity(d, d) / (radius * radius)))
            }
            ShapeSpec::Ellipsoid { center, matrix } => {
                let d = center.len();
                Some((center.clone(), DMatrix::from_fn(d, d, |i, j| matrix[i][j])))
            }
            ShapeSpec::AffineImage { map, shape } => {
                let (c, a) = shape.as_ellipsoid()?;
                // x = T y + b, y in E  <=>  (T^{-1}(x - b) - c)^T A (...) <= 1
                let t = map.matrix();
                let tinv = t.clone().try_inverse()?;
                let a2 = tinv.transpose() * a * &tinv;
                let c2 = map.apply(&pad(&c));
                Some((c2[..c.len()].to_vec(), a2))
            }
            ShapeSpec::Union { parts } if parts.len() == 1 => parts[0].as_ellipsoid(),
            _ => None,
        }
    }
}

pub(crate) fn pad(v: &[f64]) -> Point {
    let mut p = [0.0; MAX_DIM];
    p[..v.len()].copy_from_slice(v);
    p
}

/// Returns the affine image of `shape`, applied analytically (no resampling).
pub fn apply_affine(map: &AffineMap, shape: &ShapeSpec) -> Result<ShapeSpec> {
    map.validate()?;
    if let Some(d) = shape.validate()? {
        if d != map.dim() {
            return Err(Error::arg(format!(
                "map of dimension {} applied to shape of dimension {d}",
                map.dim()
            )));
        }
    }
    Ok(ShapeSpec::AffineImage {
        map: map.clone(),
        shape: Box::new(shape.clone()),
    })
}

#[derive(Debug, Clone)]
enum Node {
    Ball {
        c: Vector3<f64>,
        r2: f64,
    },
    Ellipsoid {
        c: Vector3<f64>,
        a: Matrix3<f64>,
    },
    Box {
        lo: Point,
        hi: Point,
    },
    Union(Vec<Node>),
    Difference(Box<Node>, Box<Node>),
    Affine {
        inv: Matrix3<f64>,
        shift: Vector3<f64>,
        inner: Box<Node>,
    },
}

impl Node {
    fn build(spec: &ShapeSpec) -> Node {
        match spec {
            ShapeSpec::Ball { center, radius } => Node::Ball {
                c: Vector3::from(pad(center)),
                r2: radius * radius,
            },
            ShapeSpec::Ellipsoid { center, matrix } => {
                let mut a = Matrix3::zeros();
                for (i, row) in matrix.iter().enumerate() {
                    for (j, v) in row.iter().enumerate() {
                        a[(i, j)] = *v;
                    }
                }
                Node::Ellipsoid {
                    c: Vector3::from(pad(center)),
                    a,
                }
            }
            ShapeSpec::Box { lo, hi } => {
                let mut l = [f64::NEG_INFINITY; MAX_DIM];
                let mut h = [f64::INFINITY; MAX_DIM];
                l[..lo.len()].copy_from_slice(lo);
                h[..hi.len()].copy_from_slice(hi);
                Node::Box { lo: l, hi: h }
            }
            ShapeSpec::Union { parts } => Node::Union(parts.iter().map(Node::build).collect()),
            ShapeSpec::Difference { base, removed } => {
                Node::Difference(Box::new(Node::build(base)), Box::new(Node::build(removed)))
            }
            ShapeSpec::AffineImage { map, shape } => {
                let (m, s) = map.padded();
                let inv = m.try_inverse().unwrap_or_else(Matrix3::identity);
                Node::Affine {
                    inv,
                    shift: s,
                    inner: Box::new(Node::build(shape)),
                }
            }
        }
    }

    fn contains(&self, p: &Vector3<f64>) -> bool {
        match self {
            Node::Ball { c, r2 } => (p - c).norm_squared() <= *r2,
            Node::Ellipsoid { c, a } => {
                let v = p - c;
                v.dot(&(a * v)) <= 1.0
            }
            Node::Box { lo, hi } => (0..MAX_DIM).all(|i| lo[i] <= p[i] && p[i] <= hi[i]),
            Node::Union(parts) => parts.iter().any(|n| n.contains(p)),
            Node::Difference(a, b) => a.contains(p) && !b.contains(p),
            Node::Affine { inv, shift, inner } => inner.contains(&(inv * (p - shift))),
        }
    }
}

/// A validated [`ShapeSpec`] prepared for repeated membership queries.
#[derive(Debug, Clone)]
pub struct CompiledShape {
    dim: usize,
    node: Node,
    bbox: Option<(Point, Point)>,
}

impl Region for CompiledShape {
    fn dim(&self) -> usize {
        self.dim
    }

    fn contains(&self, p: &Point) -> bool {
        self.node.contains(&Vector3::from(*p))
    }

    fn bounding_box(&self) -> Option<(Point, Point)> {
        self.bbox
    }
}
