//! Smooth strictly convex bodies and hypersurface germs.
//!
//! Every body is the sublevel set `{F < level}` of a convex function `F`;
//! the boundary is `{F = level}` and the exterior normal is `∇F / |∇F|`.

mod germ;
mod line;
mod volume;

pub use germ::GraphGerm;
pub use line::OrientedLine;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::numeric::{find_root, orthonormal_complement, sorted_symmetric_eigen, Matrix, Vector};

#[derive(Clone, Debug)]
enum Shape {
    /// `yᵀ A y`.
    Ellipsoid { a: Matrix, a_inv: Matrix },
    /// `Σ |y_i / a_i|^p`.
    Superellipsoid { semi: Vector, p: f64 },
    /// `(1 - w) Σ (y_i / a_i)^2 + w Σ |y_i / a_i|^p`.
    Blend { semi: Vector, p: f64, w: f64 },
    /// `h(ŷ) - y_n`, level 0.
    Germ(GraphGerm),
    /// Support function of the inner body, level 1.
    Polar(Box<ConvexBody>),
    /// `F_inner(M⁻¹ y)`.
    Linear {
        inner: Box<ConvexBody>,
        map: Matrix,
        inverse: Matrix,
    },
    /// Gauge of a convex polygon given by counter-clockwise vertices.
    Polygon { vertices: Vec<Vector> },
}

/// A convex body (or germ) in `ℝⁿ`, immutable after construction.
#[derive(Clone, Debug)]
pub struct ConvexBody {
    shape: Shape,
    center: Vector,
    /// Radius of a ball about `interior_point()` containing the body.
    bound: f64,
}

fn check_semi_axes(semi: &[f64]) -> Result<Vector> {
    if semi.len() < 2 {
        return Err(Error::Domain("bodies need dimension at least 2".into()));
    }
    if semi.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
        return Err(Error::Domain("semi-axes must be positive".into()));
    }
    Ok(Vector::from_column_slice(semi))
}

fn seed_directions(n: usize) -> Vec<Vector> {
    match n {
        2 => (0..8)
            .map(|k| {
                let t = k as f64 * std::f64::consts::FRAC_PI_4;
                Vector::from_vec(vec![t.cos(), t.sin()])
            })
            .collect(),
        3 => {
            let mut out = Vec::with_capacity(26);
            for i in -1..=1 {
                for j in -1..=1 {
                    for k in -1..=1 {
                        if (i, j, k) != (0, 0, 0) {
                            out.push(Vector::from_vec(vec![i as f64, j as f64, k as f64]).normalize());
                        }
                    }
                }
            }
            out
        }
        _ => (0..2 * n)
            .map(|k| {
                let mut e = Vector::zeros(n);
                e[k / 2] = if k % 2 == 0 { 1.0 } else { -1.0 };
                e
            })
            .collect(),
    }
}

impl ConvexBody {
    fn build(shape: Shape, center: Vector) -> Result<Self> {
        let mut body = ConvexBody {
            shape,
            center,
            bound: 0.0,
        };
        body.bound = body.compute_bound()?;
        Ok(body)
    }

    /// `{ yᵀ A y < 1 }` for symmetric positive definite `A`.
    pub fn ellipsoid(a: Matrix) -> Result<Self> {
        let n = a.nrows();
        if n < 2 || a.ncols() != n {
            return Err(Error::Domain("ellipsoid matrix must be square, n >= 2".into()));
        }
        if (&a - a.transpose()).norm() > 1e-12 * a.norm() {
            return Err(Error::Domain("ellipsoid matrix must be symmetric".into()));
        }
        let a = (&a + a.transpose()) * 0.5;
        let (vals, _) = sorted_symmetric_eigen(&a);
        if vals[0] <= 0.0 {
            return Err(Error::ConvexityViolation { eigenvalue: vals[0] });
        }
        let a_inv = a
            .clone()
            .cholesky()
            .ok_or(Error::ConvexityViolation { eigenvalue: vals[0] })?
            .inverse();
        ConvexBody::build(Shape::Ellipsoid { a, a_inv }, Vector::zeros(n))
    }

    /// Axis-aligned ellipsoid `Σ (x_i / a_i)^2 < 1`.
    pub fn ellipsoid_axes(semi: &[f64]) -> Result<Self> {
        let semi = check_semi_axes(semi)?;
        let a = Matrix::from_diagonal(&semi.map(|s| 1.0 / (s * s)));
        ConvexBody::ellipsoid(a)
    }

    pub fn ball(n: usize, radius: f64) -> Result<Self> {
        ConvexBody::ellipsoid_axes(&vec![radius; n])
    }

    /// `Σ |x_i / a_i|^p < 1` with `p >= 2`.
    pub fn superellipsoid(semi: &[f64], p: f64) -> Result<Self> {
        let semi_v = check_semi_axes(semi)?;
        if !(p >= 2.0) || !p.is_finite() {
            return Err(Error::Domain("superellipsoid exponent must be finite and >= 2".into()));
        }
        if p == 2.0 {
            return ConvexBody::ellipsoid_axes(semi);
        }
        let n = semi_v.len();
        ConvexBody::build(Shape::Superellipsoid { semi: semi_v, p }, Vector::zeros(n))
    }

    /// Interpolation between the ellipsoid (`weight = 0`) and the
    /// superellipsoid (`weight = 1`) with the same semi-axes.
    pub fn blend(semi: &[f64], p: f64, weight: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::Domain("blend weight must lie in [0, 1]".into()));
        }
        if weight == 0.0 {
            return ConvexBody::ellipsoid_axes(semi);
        }
        if weight == 1.0 {
            return ConvexBody::superellipsoid(semi, p);
        }
        let semi_v = check_semi_axes(semi)?;
        if !(p >= 2.0) || !p.is_finite() {
            return Err(Error::Domain("blend exponent must be finite and >= 2".into()));
        }
        let n = semi_v.len();
        ConvexBody::build(Shape::Blend { semi: semi_v, p, w: weight }, Vector::zeros(n))
    }

    /// Epigraph of a graph germ; only local operations are available.
    pub fn germ(germ: GraphGerm) -> Self {
        let n = germ.dim();
        let bound = germ.radius();
        ConvexBody {
            shape: Shape::Germ(germ),
            center: Vector::zeros(n),
            bound,
        }
    }

    /// Convex polygon; vertices may be given in any order.
    pub fn polygon(vertices: Vec<Vector>) -> Result<Self> {
        if vertices.len() < 3 || vertices.iter().any(|v| v.len() != 2) {
            return Err(Error::Domain("polygon needs at least three planar vertices".into()));
        }
        let m = vertices.len() as f64;
        let centroid = vertices.iter().fold(Vector::zeros(2), |acc, v| acc + v) / m;
        let mut rel: Vec<Vector> = vertices.iter().map(|v| v - &centroid).collect();
        rel.sort_by(|a, b| a[1].atan2(a[0]).partial_cmp(&b[1].atan2(b[0])).unwrap());
        let k = rel.len();
        for i in 0..k {
            let e1 = &rel[(i + 1) % k] - &rel[i];
            let e2 = &rel[(i + 2) % k] - &rel[(i + 1) % k];
            if e1[0] * e2[1] - e1[1] * e2[0] <= 0.0 {
                return Err(Error::Domain("polygon vertices are not strictly convex".into()));
            }
        }
        ConvexBody::build(Shape::Polygon { vertices: rel }, centroid)
    }

    /// Image of the body under the invertible linear map `m`.
    pub fn linear_image(&self, m: &Matrix) -> Result<Self> {
        let n = self.dim();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: m.nrows(),
            });
        }
        let inverse = m
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Domain("linear map is singular".into()))?;
        match &self.shape {
            Shape::Ellipsoid { a, .. } => {
                let a2 = inverse.transpose() * a * &inverse;
                let mut body = ConvexBody::ellipsoid((&a2 + a2.transpose()) * 0.5)?;
                body.center = m * &self.center;
                Ok(body)
            }
            Shape::Polygon { vertices } => {
                let c = &self.center;
                ConvexBody::polygon(vertices.iter().map(|v| m * (v + c)).collect())
            }
            _ => ConvexBody::build(
                Shape::Linear {
                    inner: Box::new(self.clone()),
                    map: m.clone(),
                    inverse,
                },
                Vector::zeros(n),
            ),
        }
    }

    /// Homothety `x ↦ λx` about the origin.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::Domain("scale factor must be positive".into()));
        }
        let center = &self.center * lambda;
        let shape = match &self.shape {
            Shape::Ellipsoid { a, a_inv } => Shape::Ellipsoid {
                a: a / (lambda * lambda),
                a_inv: a_inv * (lambda * lambda),
            },
            Shape::Superellipsoid { semi, p } => Shape::Superellipsoid {
                semi: semi * lambda,
                p: *p,
            },
            Shape::Blend { semi, p, w } => Shape::Blend {
                semi: semi * lambda,
                p: *p,
                w: *w,
            },
            Shape::Polygon { vertices } => Shape::Polygon {
                vertices: vertices.iter().map(|v| v * lambda).collect(),
            },
            _ => {
                let n = self.dim();
                return self.linear_image(&(Matrix::identity(n, n) * lambda));
            }
        };
        ConvexBody::build(shape, center)
    }

    pub fn translated(&self, offset: &Vector) -> Result<Self> {
        if offset.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: offset.len(),
            });
        }
        let mut body = self.clone();
        body.center += offset;
        Ok(body)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn is_germ(&self) -> bool {
        matches!(self.shape, Shape::Germ(_))
    }

    pub fn is_smooth(&self) -> bool {
        match &self.shape {
            Shape::Polygon { .. } => false,
            Shape::Polar(inner) | Shape::Linear { inner, .. } => inner.is_smooth(),
            _ => true,
        }
    }

    pub fn graph_germ(&self) -> Option<&GraphGerm> {
        match &self.shape {
            Shape::Germ(g) => Some(g),
            _ => None,
        }
    }

    /// Matrix `A` when the body is an ellipsoid `{⟨A(x - c), x - c⟩ < 1}`.
    pub fn ellipsoid_matrix(&self) -> Option<&Matrix> {
        match &self.shape {
            Shape::Ellipsoid { a, .. } => Some(a),
            _ => None,
        }
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    /// Short human-readable description of the representation.
    pub fn kind(&self) -> &'static str {
        match &self.shape {
            Shape::Ellipsoid { .. } => "ellipsoid",
            Shape::Superellipsoid { .. } => "superellipsoid",
            Shape::Blend { .. } => "blend",
            Shape::Germ(_) => "germ",
            Shape::Polar(_) => "polar",
            Shape::Linear { .. } => "linear-image",
            Shape::Polygon { .. } => "polygon",
        }
    }

    pub fn level(&self) -> f64 {
        match &self.shape {
            Shape::Germ(_) => 0.0,
            Shape::Linear { inner, .. } => inner.level(),
            _ => 1.0,
        }
    }

    pub fn interior_point(&self) -> Vector {
        match &self.shape {
            Shape::Germ(g) => {
                let mut p = self.center.clone();
                p[self.dim() - 1] += 0.25 * g.radius();
                p
            }
            Shape::Linear { inner, map, .. } => &self.center + map * inner.interior_point(),
            _ => self.center.clone(),
        }
    }

    /// Radius of a ball about `interior_point()` that contains the body
    /// (the evaluation radius for germs).
    pub fn bounding_radius(&self) -> f64 {
        self.bound
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.bound
    }

    fn compute_bound(&self) -> Result<f64> {
        let n = self.dim() as f64;
        Ok(match &self.shape {
            Shape::Ellipsoid { a, .. } => {
                let (vals, _) = sorted_symmetric_eigen(a);
                1.0 / vals[0].sqrt()
            }
            Shape::Superellipsoid { semi, .. } | Shape::Blend { semi, .. } => {
                n.sqrt() * semi.max()
            }
            Shape::Germ(g) => g.radius(),
            Shape::Polygon { vertices } => vertices.iter().map(|v| v.norm()).fold(0.0, f64::max),
            Shape::Linear { inner, map, .. } => {
                let sv = map.clone().svd(false, false).singular_values;
                sv.max() * inner.bound
            }
            Shape::Polar(inner) => {
                // 1 / (inradius of the inner body about the origin), from a
                // sampled minimum of its support function with margin.
                let dirs = crate::sampling::sphere_grid(self.dim(), 400);
                let mut hmin = f64::INFINITY;
                for u in &dirs {
                    hmin = hmin.min(inner.support(u)?);
                }
                if !(hmin > 0.0) {
                    return Err(Error::OriginNotInterior);
                }
                1.25 / hmin
            }
        })
    }

    /// Defining function `F` at an absolute point.
    pub fn value(&self, x: &Vector) -> Result<f64> {
        self.check_dim(x)?;
        let y = x - &self.center;
        Ok(match &self.shape {
            Shape::Ellipsoid { a, .. } => y.dot(&(a * &y)),
            Shape::Superellipsoid { semi, p } => {
                y.iter().zip(semi.iter()).map(|(yi, ai)| (yi / ai).abs().powf(*p)).sum()
            }
            Shape::Blend { semi, p, w } => y
                .iter()
                .zip(semi.iter())
                .map(|(yi, ai)| {
                    let s = (yi / ai).abs();
                    (1.0 - w) * s * s + w * s.powf(*p)
                })
                .sum(),
            Shape::Germ(g) => {
                let n = y.len();
                g.height(&y.as_slice()[..n - 1]) - y[n - 1]
            }
            Shape::Polar(inner) => inner.support(&y)?,
            Shape::Linear { inner, inverse, .. } => inner.value(&(inverse * &y))?,
            Shape::Polygon { vertices } => polygon_gauge(vertices, &y).0,
        })
    }

    /// `F` along a curve given by coordinate jets.
    pub fn value_jet(&self, x: &[Jet]) -> Result<Jet> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let y: Vec<Jet> = x.iter().zip(self.center.iter()).map(|(xi, ci)| *xi - *ci).collect();
        let abs_pow = |s: Jet, p: f64| -> Result<Jet> {
            if p.fract() == 0.0 && (p as i64) % 2 == 0 {
                Ok(s.powi(p as u32))
            } else if s.value() > 0.0 {
                Ok(s.powf(p))
            } else if s.value() < 0.0 {
                Ok((-s).powf(p))
            } else {
                Err(Error::Domain("power term is not analytic at a coordinate zero".into()))
            }
        };
        Ok(match &self.shape {
            Shape::Ellipsoid { a, .. } => {
                let mut acc = Jet::constant(0.0);
                for i in 0..y.len() {
                    for j in 0..y.len() {
                        acc = acc + y[i] * y[j] * a[(i, j)];
                    }
                }
                acc
            }
            Shape::Superellipsoid { semi, p } => {
                let mut acc = Jet::constant(0.0);
                for (yi, ai) in y.iter().zip(semi.iter()) {
                    acc = acc + abs_pow(yi.scale(1.0 / ai), *p)?;
                }
                acc
            }
            Shape::Blend { semi, p, w } => {
                let mut acc = Jet::constant(0.0);
                for (yi, ai) in y.iter().zip(semi.iter()) {
                    let s = yi.scale(1.0 / ai);
                    acc = acc + (s * s).scale(1.0 - w) + abs_pow(s, *p)?.scale(*w);
                }
                acc
            }
            Shape::Germ(g) => {
                let n = y.len();
                g.poly().eval_jet(&y[..n - 1]) - y[n - 1]
            }
            Shape::Linear { inner, inverse, .. } => {
                let mapped: Vec<Jet> = (0..y.len())
                    .map(|i| {
                        let mut acc = Jet::constant(0.0);
                        for (j, yj) in y.iter().enumerate() {
                            acc = acc + *yj * inverse[(i, j)];
                        }
                        acc
                    })
                    .collect();
                inner.value_jet(&mapped)?
            }
            Shape::Polar(_) | Shape::Polygon { .. } => return Err(Error::NonSmooth),
        })
    }

    /// `∇F` at an absolute point (a subgradient for polygons).
    pub fn gradient(&self, x: &Vector) -> Result<Vector> {
        self.check_dim(x)?;
        let y = x - &self.center;
        Ok(match &self.shape {
            Shape::Ellipsoid { a, .. } => a * &y * 2.0,
            Shape::Superellipsoid { semi, p } => Vector::from_iterator(
                y.len(),
                y.iter().zip(semi.iter()).map(|(yi, ai)| {
                    let s = yi / ai;
                    p * s.abs().powf(p - 1.0) * s.signum() / ai
                }),
            ),
            Shape::Blend { semi, p, w } => Vector::from_iterator(
                y.len(),
                y.iter().zip(semi.iter()).map(|(yi, ai)| {
                    let s = yi / ai;
                    ((1.0 - w) * 2.0 * s + w * p * s.abs().powf(p - 1.0) * s.signum()) / ai
                }),
            ),
            Shape::Germ(g) => {
                let n = y.len();
                let gh = g.gradient(&y.as_slice()[..n - 1]);
                let mut out = Vector::from_element(n, -1.0);
                out.rows_mut(0, n - 1).copy_from(&gh);
                out
            }
            Shape::Polar(inner) => {
                let norm = y.norm();
                if norm == 0.0 {
                    return Err(Error::NonSmooth);
                }
                inner.gauss_inverse(&(&y / norm))?
            }
            Shape::Linear { inner, inverse, .. } => {
                inverse.transpose() * inner.gradient(&(inverse * &y))?
            }
            Shape::Polygon { vertices } => polygon_gauge(vertices, &y).1,
        })
    }

    /// Hessian of `F` at an absolute point.
    pub fn hessian(&self, x: &Vector) -> Result<Matrix> {
        self.check_dim(x)?;
        let y = x - &self.center;
        let n = y.len();
        Ok(match &self.shape {
            Shape::Ellipsoid { a, .. } => a * 2.0,
            Shape::Superellipsoid { semi, p } => Matrix::from_diagonal(&Vector::from_iterator(
                n,
                y.iter().zip(semi.iter()).map(|(yi, ai)| {
                    p * (p - 1.0) * (yi / ai).abs().powf(p - 2.0) / (ai * ai)
                }),
            )),
            Shape::Blend { semi, p, w } => Matrix::from_diagonal(&Vector::from_iterator(
                n,
                y.iter().zip(semi.iter()).map(|(yi, ai)| {
                    ((1.0 - w) * 2.0 + w * p * (p - 1.0) * (yi / ai).abs().powf(p - 2.0))
                        / (ai * ai)
                }),
            )),
            Shape::Germ(g) => {
                let mut h = Matrix::zeros(n, n);
                h.view_mut((0, 0), (n - 1, n - 1))
                    .copy_from(&g.hessian(&y.as_slice()[..n - 1]));
                h
            }
            Shape::Polar(inner) => {
                let norm = y.norm();
                if norm == 0.0 {
                    return Err(Error::NonSmooth);
                }
                inner.support_hessian(&(&y / norm))? / norm
            }
            Shape::Linear { inner, inverse, .. } => {
                inverse.transpose() * inner.hessian(&(inverse * &y))? * inverse
            }
            Shape::Polygon { .. } => return Err(Error::NonSmooth),
        })
    }

    fn check_dim(&self, x: &Vector) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    fn require_smooth(&self) -> Result<()> {
        if self.is_smooth() {
            Ok(())
        } else {
            Err(Error::NonSmooth)
        }
    }

    /// Distance-like residual `|F - level| / |∇F|` of a point.
    pub fn boundary_residual(&self, p: &Vector) -> Result<f64> {
        let f = self.value(p)? - self.level();
        let g = self.gradient(p)?.norm();
        Ok(if g > 0.0 { f.abs() / g } else { f.abs() })
    }

    pub fn contains(&self, x: &Vector) -> Result<bool> {
        Ok(self.value(x)? < self.level())
    }

    fn check_boundary(&self, p: &Vector) -> Result<()> {
        let residual = self.boundary_residual(p)?;
        if residual > 1e-9 * self.bound.max(1.0) {
            return Err(Error::NotOnBoundary { residual });
        }
        Ok(())
    }

    /// Unit exterior normal at a boundary point.
    pub fn exterior_normal(&self, p: &Vector) -> Result<Vector> {
        self.require_smooth()?;
        self.check_boundary(p)?;
        Ok(self.gradient(p)?.normalize())
    }

    /// Exit point of the ray `origin + t ω` (`t > 0`) from an interior
    /// `origin`.
    pub fn ray_exit(&self, origin: &Vector, omega: &Vector) -> Result<Vector> {
        let w = omega.normalize();
        if let Some(t) = self.closed_form_ray(origin, &w) {
            return Ok(origin + &w * t);
        }
        let level = self.level();
        if self.value(origin)? >= level {
            return Err(Error::Domain("ray origin is not interior".into()));
        }
        let reach = (origin - self.interior_point()).norm() + 1.01 * self.bound;
        let phi = |t: f64| self.value(&(origin + &w * t)).map_or(f64::NAN, |v| v - level);
        let dphi = |t: f64| {
            self.gradient(&(origin + &w * t))
                .map_or(f64::NAN, |g| g.dot(&w))
        };
        if !(phi(reach) > 0.0) {
            return Err(Error::Domain("ray leaves the evaluation region".into()));
        }
        let t = find_root(phi, dphi, 0.0, reach)?;
        Ok(origin + &w * t)
    }

    fn closed_form_ray(&self, origin: &Vector, w: &Vector) -> Option<f64> {
        if origin != &self.center {
            return None;
        }
        match &self.shape {
            Shape::Ellipsoid { a, .. } => Some(1.0 / w.dot(&(a * w)).sqrt()),
            Shape::Superellipsoid { semi, p } => Some(
                w.iter()
                    .zip(semi.iter())
                    .map(|(wi, ai)| (wi / ai).abs().powf(*p))
                    .sum::<f64>()
                    .powf(-1.0 / p),
            ),
            Shape::Polygon { vertices } => Some(1.0 / polygon_gauge(vertices, w).0),
            Shape::Polar(inner) => inner.support(w).ok().map(|h| 1.0 / h),
            _ => None,
        }
    }

    /// Boundary point in direction `ω` from `interior_point()`.
    pub fn radial_boundary_point(&self, omega: &Vector) -> Result<Vector> {
        self.ray_exit(&self.interior_point(), omega)
    }

    /// Gauge (Minkowski functional) about the absolute origin.
    pub fn gauge(&self, x: &Vector) -> Result<f64> {
        let r = x.norm();
        if r == 0.0 {
            return Ok(0.0);
        }
        let origin = Vector::zeros(self.dim());
        let exit = self.ray_exit(&origin, x)?;
        Ok(r / exit.norm())
    }

    /// Support function `h(u) = max_{x ∈ K} ⟨x, u⟩` for any vector `u`.
    pub fn support(&self, u: &Vector) -> Result<f64> {
        self.check_dim(u)?;
        let shift = self.center.dot(u);
        Ok(shift
            + match &self.shape {
                Shape::Ellipsoid { a_inv, .. } => u.dot(&(a_inv * u)).sqrt(),
                Shape::Superellipsoid { semi, p } => {
                    let q = p / (p - 1.0);
                    u.iter()
                        .zip(semi.iter())
                        .map(|(ui, ai)| (ui * ai).abs().powf(q))
                        .sum::<f64>()
                        .powf(1.0 / q)
                }
                Shape::Polygon { vertices } => vertices
                    .iter()
                    .map(|v| v.dot(u))
                    .fold(f64::NEG_INFINITY, f64::max),
                Shape::Linear { inner, map, .. } => inner.support(&(map.transpose() * u))?,
                Shape::Polar(inner) => inner.gauge(u)?,
                Shape::Germ(_) => {
                    return Err(Error::Domain("support function of an unbounded germ".into()))
                }
                Shape::Blend { .. } => {
                    let r = u.norm();
                    if r == 0.0 {
                        return Ok(0.0);
                    }
                    (self.gauss_inverse(&(u / r))? - &self.center).dot(u)
                }
            })
    }

    /// Hessian of the support function at a unit vector: `E S⁻¹ Eᵀ` with
    /// `S` the second fundamental form at the point with normal `u`.
    pub fn support_hessian(&self, u: &Vector) -> Result<Matrix> {
        let u = u.normalize();
        let p = self.gauss_inverse(&u)?;
        let e = orthonormal_complement(&u);
        let s = self.sff_in_frame(&p, &e)?;
        let s_inv = s
            .try_inverse()
            .ok_or(Error::ConvexityViolation { eigenvalue: 0.0 })?;
        Ok(&e * s_inv * e.transpose())
    }

    /// Boundary point with exterior normal `u`.
    pub fn gauss_inverse(&self, u: &Vector) -> Result<Vector> {
        self.check_dim(u)?;
        self.require_smooth()?;
        let norm = u.norm();
        if !(norm > 0.0) {
            return Err(Error::Domain("normal must be nonzero".into()));
        }
        let u = u / norm;
        match &self.shape {
            Shape::Ellipsoid { a_inv, .. } => {
                let w = a_inv * &u;
                Ok(&self.center + &w / w.dot(&u).sqrt())
            }
            Shape::Superellipsoid { semi, p } => {
                let w: Vec<f64> = u
                    .iter()
                    .zip(semi.iter())
                    .map(|(ui, ai)| (ai * ui.abs()).powf(1.0 / (p - 1.0)))
                    .collect();
                let tau = w.iter().map(|wi| wi.powf(*p)).sum::<f64>().powf(-1.0 / p);
                Ok(&self.center
                    + Vector::from_iterator(
                        u.len(),
                        (0..u.len()).map(|i| semi[i] * u[i].signum() * w[i] * tau),
                    ))
            }
            Shape::Germ(g) => {
                let n = u.len();
                let un = u[n - 1];
                if un > -1e-12 {
                    return Err(Error::Domain("normal is outside the germ's Gauss image".into()));
                }
                let slope = u.rows(0, n - 1).into_owned() / (-un);
                let xh = g.solve_gradient(&slope)?;
                let mut p = Vector::zeros(n);
                p.rows_mut(0, n - 1).copy_from(&xh);
                p[n - 1] = g.height(xh.as_slice());
                Ok(&self.center + p)
            }
            Shape::Polar(inner) => {
                let x = inner.ray_exit(&Vector::zeros(u.len()), &u)?;
                Ok(&self.center + inner.legendre_point(&x)?)
            }
            Shape::Linear { inner, map, .. } => {
                Ok(&self.center + map * inner.gauss_inverse(&(map.transpose() * &u))?)
            }
            Shape::Blend { .. } => self.gauss_inverse_newton(&u),
            Shape::Polygon { .. } => Err(Error::NonSmooth),
        }
    }

    /// Damped Newton on `∇F(y) = λu, F(y) = level` with multistart seeds.
    fn gauss_inverse_newton(&self, u: &Vector) -> Result<Vector> {
        let n = u.len();
        let level = self.level();
        let mut seeds = vec![u.clone()];
        seeds.extend(seed_directions(n));
        let mut best = (usize::MAX, f64::INFINITY);
        for seed in &seeds {
            let Ok(mut y) = self.radial_boundary_point(seed) else {
                continue;
            };
            let mut lambda = self.gradient(&y)?.dot(u).max(1e-3);
            let residual = |y: &Vector, lambda: f64| -> Result<Vector> {
                let g = self.gradient(y)?;
                let mut r = Vector::zeros(n + 1);
                r.rows_mut(0, n).copy_from(&(g - u * lambda));
                r[n] = self.value(y)? - level;
                Ok(r)
            };
            let mut r = residual(&y, lambda)?;
            for it in 0..100 {
                let rn = r.norm();
                let g = self.gradient(&y)?;
                if rn <= 1e-13 * (1.0 + g.norm()) {
                    if lambda > 0.0 && g.normalize().dot(u) > 1.0 - 1e-12 {
                        return Ok(y);
                    }
                    break;
                }
                let h = self.hessian(&y)?;
                let mut j = Matrix::zeros(n + 1, n + 1);
                j.view_mut((0, 0), (n, n)).copy_from(&h);
                for i in 0..n {
                    j[(i, n)] = -u[i];
                    j[(n, i)] = g[i];
                }
                let Some(step) = j.lu().solve(&r) else {
                    break;
                };
                let mut t = 1.0;
                let mut accepted = false;
                while t > 1e-8 {
                    let y2 = &y - step.rows(0, n) * t;
                    let l2 = lambda - step[n] * t;
                    if let Ok(r2) = residual(&y2, l2) {
                        if r2.norm() < rn {
                            y = y2;
                            lambda = l2;
                            r = r2;
                            accepted = true;
                            break;
                        }
                    }
                    t *= 0.5;
                }
                if !accepted {
                    if rn < best.1 {
                        best = (it, rn);
                    }
                    if rn <= 1e-11 * (1.0 + g.norm()) && lambda > 0.0 && g.normalize().dot(u) > 1.0 - 1e-12 {
                        return Ok(y);
                    }
                    break;
                }
            }
            if r.norm() < best.1 {
                best = (100, r.norm());
            }
        }
        Err(Error::Convergence {
            iterations: best.0,
            residual: best.1,
        })
    }

    fn sff_in_frame(&self, p: &Vector, e: &Matrix) -> Result<Matrix> {
        let g = self.gradient(p)?.norm();
        let h = self.hessian(p)?;
        let s = e.transpose() * h * e / g;
        Ok((&s + s.transpose()) * 0.5)
    }

    /// Orthonormal tangent frame at a boundary point (columns). In the
    /// plane the single column is the normal rotated by +90°.
    pub fn tangent_frame(&self, p: &Vector) -> Result<Matrix> {
        Ok(orthonormal_complement(&self.exterior_normal(p)?))
    }

    /// Second fundamental form in the frame of `tangent_frame(p)`.
    pub fn second_fundamental_form(&self, p: &Vector) -> Result<Matrix> {
        let e = self.tangent_frame(p)?;
        let s = self.sff_in_frame(p, &e)?;
        let (vals, _) = sorted_symmetric_eigen(&s);
        if vals[0] <= 1e-14 * vals[vals.len() - 1].abs().max(1.0) {
            return Err(Error::ConvexityViolation { eigenvalue: vals[0] });
        }
        Ok(s)
    }

    /// Other endpoint of the chord through boundary point `a` parallel to
    /// `d`, shot in whichever of `±d` enters the body.
    pub fn chord_second_intersection(&self, a: &Vector, d: &Vector) -> Result<Vector> {
        self.check_dim(d)?;
        let n_a = self.exterior_normal(a)?;
        let d = d.normalize();
        let slope = n_a.dot(&d);
        if slope == 0.0 {
            return Err(Error::DegenerateChord { length: 0.0 });
        }
        let dir = if slope < 0.0 { d } else { -d };
        let level = self.level();
        let diam = self.diameter();
        let phi = |t: f64| self.value(&(a + &dir * t)).map_or(f64::NAN, |v| v - level);
        let dphi = |t: f64| self.gradient(&(a + &dir * t)).map_or(f64::NAN, |g| g.dot(&dir));
        let eps = 1e-6 * diam;
        if !(phi(eps) < 0.0) {
            return Err(Error::DegenerateChord { length: eps });
        }
        let step = 1e-2 * diam;
        let mut lo = eps;
        loop {
            let hi = lo + step;
            if hi > diam * 1.01 + step {
                return Err(Error::Domain("chord leaves the evaluation region".into()));
            }
            let f = phi(hi);
            if f.is_nan() {
                return Err(Error::Domain("chord leaves the evaluation region".into()));
            }
            if f >= 0.0 {
                let t = find_root(&phi, &dphi, lo, hi)?;
                return Ok(a + &dir * t);
            }
            lo = hi;
        }
    }

    /// Parameters `(t_in, t_out)` where the line enters and leaves the body.
    pub fn line_intersections(&self, line: &OrientedLine) -> Result<(f64, f64)> {
        self.check_dim(line.point())?;
        let x0 = line.point();
        let v = line.direction();
        let level = self.level();
        let sc = (self.interior_point() - x0).dot(v);
        let reach = 1.01 * self.bound + (self.interior_point() - line.at(sc)).norm();
        let (lo, hi) = (sc - reach, sc + reach);
        let phi = |t: f64| self.value(&line.at(t)).map_or(f64::NAN, |f| f - level);
        let dphi = |t: f64| self.gradient(&line.at(t)).map_or(f64::NAN, |g| g.dot(v));
        let ddphi = |t: f64| {
            self.hessian(&line.at(t))
                .map_or(f64::NAN, |h| v.dot(&(h * v)))
        };
        if !(phi(lo) > 0.0 && phi(hi) > 0.0) {
            return Err(Error::Domain("line is not bracketed by the evaluation region".into()));
        }
        let t_min = if dphi(lo) >= 0.0 {
            lo
        } else if dphi(hi) <= 0.0 {
            hi
        } else {
            find_root(&dphi, &ddphi, lo, hi)?
        };
        if !(phi(t_min) < 0.0) {
            return Err(Error::Miss);
        }
        let t_in = find_root(&phi, &dphi, lo, t_min)?;
        let t_out = find_root(&phi, &dphi, t_min, hi)?;
        Ok((t_in, t_out))
    }

    /// Polar body `{y : ⟨x, y⟩ ≤ 1 for all x ∈ K}`.
    pub fn polar_dual(&self) -> Result<ConvexBody> {
        if self.is_germ() {
            return Err(Error::Domain("polar of an unbounded germ".into()));
        }
        let origin = Vector::zeros(self.dim());
        if !self.contains(&origin)? {
            return Err(Error::OriginNotInterior);
        }
        let centered = self.center.iter().all(|c| *c == 0.0);
        match &self.shape {
            Shape::Ellipsoid { a_inv, .. } if centered => ConvexBody::ellipsoid(a_inv.clone()),
            Shape::Polar(inner) if centered => Ok((**inner).clone()),
            Shape::Polygon { vertices } => {
                let abs: Vec<Vector> = vertices.iter().map(|v| v + &self.center).collect();
                let k = abs.len();
                let dual = (0..k)
                    .map(|i| {
                        let (p, q) = (&abs[i], &abs[(i + 1) % k]);
                        let normal = Vector::from_vec(vec![q[1] - p[1], p[0] - q[0]]);
                        &normal / normal.dot(p)
                    })
                    .collect();
                ConvexBody::polygon(dual)
            }
            _ => ConvexBody::build(Shape::Polar(Box::new(self.clone())), origin),
        }
    }

    /// Legendre image `n(v) / ⟨n(v), v⟩` of a boundary point.
    pub fn legendre_point(&self, v: &Vector) -> Result<Vector> {
        let n = self.exterior_normal(v)?;
        let s = n.dot(v);
        if !(s > 1e-14 * v.norm().max(1.0)) {
            return Err(Error::OriginNotInterior);
        }
        Ok(n / s)
    }

    /// Volume with an error estimate (zero for exact formulas).
    pub fn volume(&self) -> Result<(f64, f64)> {
        volume::volume(self)
    }

    /// Vertices of a polygon body.
    pub fn polygon_vertices(&self) -> Option<Vec<Vector>> {
        match &self.shape {
            Shape::Polygon { vertices } => {
                Some(vertices.iter().map(|v| v + &self.center).collect())
            }
            _ => None,
        }
    }
}

/// Gauge of a polygon about its center and the outward normal (scaled by
/// the inverse edge offset) of the active edge.
fn polygon_gauge(vertices: &[Vector], y: &Vector) -> (f64, Vector) {
    let k = vertices.len();
    let mut best = (f64::NEG_INFINITY, Vector::zeros(2));
    for i in 0..k {
        let (p, q) = (&vertices[i], &vertices[(i + 1) % k]);
        let normal = Vector::from_vec(vec![q[1] - p[1], p[0] - q[0]]);
        let g = &normal / normal.dot(p);
        let val = g.dot(y);
        if val > best.0 {
            best = (val, g);
        }
    }
    best
}
