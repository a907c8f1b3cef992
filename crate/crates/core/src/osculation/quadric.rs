use super::conic::{conic_from_jet, conic_height, ConicQuadric};
use super::pair::{GraphPair, SectionGraph};
use crate::convex_body::{ConvexBody, GraphGerm};
use crate::error::{Error, Result};
use crate::jet::{Jet, ORDER};
use crate::numeric::{find_root, Matrix, Vector};
use crate::poly::Poly;
use crate::projectivity::deviation_exponent;
use crate::sampling::sphere_grid;

/// Orthonormal frame at a boundary point `O`: column 0 spans the line `L`,
/// the last column is the inward normal, and the section plane `Π` is
/// spanned by these two.
#[derive(Clone, Debug)]
pub struct PlanarSectionFrame {
    origin: Vector,
    basis: Matrix,
}

impl PlanarSectionFrame {
    pub fn new(origin: Vector, basis: Matrix) -> Result<Self> {
        let n = origin.len();
        if basis.nrows() != n || basis.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: basis.ncols(),
            });
        }
        let defect = (basis.transpose() * &basis - Matrix::identity(n, n)).norm();
        if defect > 1e-10 {
            return Err(Error::Precondition("frame is not orthonormal".into()));
        }
        Ok(PlanarSectionFrame { origin, basis })
    }

    /// The coordinate frame of a graph germ.
    pub fn standard(n: usize) -> Self {
        PlanarSectionFrame {
            origin: Vector::zeros(n),
            basis: Matrix::identity(n, n),
        }
    }

    /// Normal section of `body` at the boundary point `p` through the
    /// tangent direction `along`.
    pub fn normal_section(body: &ConvexBody, p: &Vector, along: &Vector) -> Result<Self> {
        let n = body.dim();
        let inward = -body.exterior_normal(p)?;
        let e1 = along - &inward * along.dot(&inward);
        if e1.norm() < 1e-8 * along.norm().max(f64::MIN_POSITIVE) {
            return Err(Error::Precondition("section line must be tangent".into()));
        }
        let e1 = e1.normalize();
        let mut cols = vec![e1.clone()];
        if n > 2 {
            let pair = Matrix::from_columns(&[e1.clone(), inward.clone()]);
            let mut extra = Vec::new();
            for k in 0..n {
                let mut e = Vector::zeros(n);
                e[k] = 1.0;
                let mut w = &e - &pair * (pair.transpose() * &e);
                for b in &extra {
                    let b: &Vector = b;
                    w -= b * b.dot(&w);
                }
                if w.norm() > 1e-6 {
                    extra.push(w.normalize());
                }
                if extra.len() == n - 2 {
                    break;
                }
            }
            cols.extend(extra);
        }
        cols.push(inward);
        PlanarSectionFrame::new(p.clone(), Matrix::from_columns(&cols))
    }

    pub fn origin(&self) -> &Vector {
        &self.origin
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn to_local(&self, x: &Vector) -> Vector {
        self.basis.transpose() * (x - &self.origin)
    }

    pub fn to_world(&self, y: &Vector) -> Vector {
        &self.origin + &self.basis * y
    }

    fn is_standard(&self) -> bool {
        let n = self.dim();
        self.origin.norm() == 0.0 && (&self.basis - Matrix::identity(n, n)).norm() == 0.0
    }
}

/// Height `h(s)` (as a jet at `s = 0`) of the boundary over the line
/// `p + s t`, measured along `inward`.
pub(crate) fn implicit_height(body: &ConvexBody, p: &Vector, t: &Vector, inward: &Vector) -> Result<Jet> {
    let g0 = body.gradient(p)?.dot(inward);
    if !(g0 < 0.0) {
        return Err(Error::Precondition("height direction must point inward".into()));
    }
    let level = body.level();
    let s = Jet::variable(0.0);
    let mut h = Jet::constant(0.0);
    for _ in 0..ORDER + 2 {
        let x: Vec<Jet> = (0..p.len())
            .map(|k| s.scale(t[k]) + h.scale(inward[k]) + p[k])
            .collect();
        let r = body.value_jet(&x)? - level;
        h = h - r.scale(1.0 / g0);
        h.c[0] = 0.0;
    }
    Ok(h)
}

fn monomials(m: usize, degree: u32) -> Vec<Vec<u32>> {
    if m == 1 {
        return vec![vec![degree]];
    }
    let mut out = Vec::new();
    for first in (0..=degree).rev() {
        for mut rest in monomials(m - 1, degree - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Taylor polynomial (through `degree`) of the boundary of `body` written
/// as a graph in the local coordinates of `frame`.
pub fn local_graph_germ(body: &ConvexBody, frame: &PlanarSectionFrame, degree: u32) -> Result<GraphGerm> {
    if let Some(g) = body.graph_germ() {
        if frame.is_standard() {
            return Ok(g.clone());
        }
        return Err(Error::Precondition("graph germs are read in their own frame".into()));
    }
    let n = body.dim();
    let m = n - 1;
    let degree = degree.min(ORDER as u32);
    let inward = frame.basis.column(n - 1).into_owned();
    let tangent = frame.basis.columns(0, m).into_owned();
    let dirs = if m == 1 {
        vec![Vector::from_element(1, 1.0)]
    } else {
        sphere_grid(m, 4 * monomials(m, degree).len() + 8)
    };
    let jets: Vec<Jet> = dirs
        .iter()
        .map(|w| implicit_height(body, &frame.origin, &(&tangent * w), &inward))
        .collect::<Result<_>>()?;
    let mut terms = Vec::new();
    for k in 2..=degree {
        let monos = monomials(m, k);
        let a = Matrix::from_fn(dirs.len(), monos.len(), |r, c| {
            monos[c]
                .iter()
                .zip(dirs[r].iter())
                .map(|(&e, w)| w.powi(e as i32))
                .product()
        });
        let b = Vector::from_iterator(dirs.len(), jets.iter().map(|j| j.c[k as usize]));
        let coef = a
            .svd(true, true)
            .solve(&b, 1e-14)
            .map_err(|e| Error::DegenerateData(e.to_string()))?;
        for (mono, c) in monos.into_iter().zip(coef.iter()) {
            if c.abs() > 1e-15 {
                terms.push((mono, *c));
            }
        }
    }
    GraphGerm::new(Poly::from_terms(m, terms), 0.1 * body.diameter())
}

/// The osculating quadric `Γ` along the section `β = Π ∩ α`, in the local
/// form
/// `A x₁² + B x₁xₙ + C xₙ² + x₁Σc_j x_j + ⟨M x̂, x̂⟩ - xₙ(1 + Σd_j x_j) = 0`,
/// where `xₙ = A x₁² + B x₁xₙ + C xₙ²` is the osculating conic `γ` of `β`.
#[derive(Clone, Debug)]
pub struct OsculatingQuadric {
    pub frame: PlanarSectionFrame,
    pub section: [f64; 3],
    pub c: Vector,
    pub a: Matrix,
    /// `x₁² x_j` Taylor coefficients of the graph of `α`.
    pub s: Vector,
    pub d: Vector,
    pub local: ConicQuadric,
    pub world: ConicQuadric,
}

impl OsculatingQuadric {
    fn assemble(
        frame: PlanarSectionFrame,
        section: [f64; 3],
        c: Vector,
        a: Matrix,
        s: Vector,
        d: Vector,
    ) -> Result<Self> {
        let n = frame.dim();
        let last = n - 1;
        let mut m = Matrix::zeros(n + 1, n + 1);
        m[(0, 0)] = section[0];
        m[(0, last)] = 0.5 * section[1];
        m[(last, 0)] = 0.5 * section[1];
        m[(last, last)] = section[2];
        m[(last, n)] = -0.5;
        m[(n, last)] = -0.5;
        for j in 1..last {
            m[(0, j)] = 0.5 * c[j - 1];
            m[(j, 0)] = 0.5 * c[j - 1];
            m[(last, j)] = -0.5 * d[j - 1];
            m[(j, last)] = -0.5 * d[j - 1];
            for k in 1..last {
                m[(j, k)] = a[(j - 1, k - 1)];
            }
        }
        let local = ConicQuadric::from_matrix(&m)?;
        let bt = frame.basis.transpose();
        let world = local.pullback(&bt, &(-(&bt * &frame.origin)))?;
        Ok(OsculatingQuadric {
            frame,
            section,
            c,
            a,
            s,
            d,
            local,
            world,
        })
    }

    /// Same construction with prescribed `d_j` (used to probe the
    /// uniqueness condition).
    pub fn with_d(&self, d: Vector) -> Result<Self> {
        OsculatingQuadric::assemble(
            self.frame.clone(),
            self.section,
            self.c.clone(),
            self.a.clone(),
            self.s.clone(),
            d,
        )
    }

    /// `(c, M, d)` of the normal form in which `γ` is the parabola
    /// `xₙ = A x₁²`; fails when the section has a cubic term or a
    /// non-parabolic osculating conic.
    pub fn normal_form(&self, tol: f64) -> Result<(&Vector, &Matrix, &Vector)> {
        let [a, b, c] = self.section;
        if b.abs() > tol * a.abs() {
            return Err(Error::FrameNormalization(format!(
                "section has an x1^3 term (B = {b:.3e})"
            )));
        }
        if c.abs() > tol * a.abs() {
            return Err(Error::FrameNormalization(format!(
                "osculating conic is not a parabola (C = {c:.3e})"
            )));
        }
        Ok((&self.c, &self.a, &self.d))
    }

    /// Local height of `γ` over `L`.
    pub fn section_height(&self, x1: f64) -> f64 {
        conic_height(self.section, x1)
    }

    /// Exterior unit normal of `Γ` (local coordinates) at the point of `γ`
    /// over `x1`.
    pub fn section_normal(&self, x1: f64) -> Vector {
        let n = self.frame.dim();
        let mut y = Vector::zeros(n);
        y[0] = x1;
        y[n - 1] = self.section_height(x1);
        let g = self.local.gradient(&y);
        let g = g.normalize();
        if g[n - 1] > 0.0 {
            -g
        } else {
            g
        }
    }
}

pub fn osculating_quadric_along_curve(alpha: &ConvexBody, frame: &PlanarSectionFrame) -> Result<OsculatingQuadric> {
    let n = alpha.dim();
    if frame.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: frame.dim(),
        });
    }
    let germ = local_graph_germ(alpha, frame, 5)?;
    let along = |k: u32| {
        let mut e = vec![0u32; n - 1];
        e[0] = k;
        germ.coeff(&e)
    };
    let section = conic_from_jet(along(2), along(3), along(4))?;
    let mixed = |i: usize, ei: u32, j: usize, ej: u32| {
        let mut e = vec![0u32; n - 1];
        e[i] += ei;
        e[j] += ej;
        germ.coeff(&e)
    };
    let k = n.saturating_sub(2);
    let c = Vector::from_fn(k, |j, _| mixed(0, 1, j + 1, 1));
    let s = Vector::from_fn(k, |j, _| mixed(0, 2, j + 1, 1));
    let a = Matrix::from_fn(k, k, |i, j| {
        if i == j {
            mixed(i + 1, 2, i + 1, 0)
        } else {
            0.5 * mixed(i + 1, 1, j + 1, 1)
        }
    });
    let d = Vector::from_fn(k, |j, _| (section[1] * c[j] - s[j]) / section[0]);
    OsculatingQuadric::assemble(frame.clone(), section, c, a, s, d)
}

/// The section `β` of `α` read through the frame, with exact boundary
/// evaluation.
struct BodySection<'a> {
    body: &'a ConvexBody,
    frame: &'a PlanarSectionFrame,
    guess: GraphGerm,
}

impl<'a> BodySection<'a> {
    fn new(body: &'a ConvexBody, frame: &'a PlanarSectionFrame) -> Result<Self> {
        Ok(BodySection {
            body,
            frame,
            guess: local_graph_germ(body, frame, 5)?,
        })
    }

    fn local_point(&self, x1: f64, y: f64) -> Vector {
        let n = self.frame.dim();
        let mut p = Vector::zeros(n);
        p[0] = x1;
        p[n - 1] = y;
        p
    }

    fn solve(&self, x1: f64) -> Result<f64> {
        if self.body.is_germ() {
            let mut x = vec![0.0; self.frame.dim() - 1];
            x[0] = x1;
            return Ok(self.guess.height(&x));
        }
        let n = self.frame.dim();
        let inward = self.frame.basis.column(n - 1).into_owned();
        let mut x = vec![0.0; n - 1];
        x[0] = x1;
        let guess = self.guess.height(&x);
        let level = self.body.level();
        let at = |y: f64| self.frame.to_world(&self.local_point(x1, y));
        let phi = |y: f64| self.body.value(&at(y)).map_or(f64::NAN, |v| v - level);
        let dphi = |y: f64| {
            self.body
                .gradient(&at(y))
                .map_or(f64::NAN, |g| g.dot(&inward))
        };
        let width = 0.5 * guess.abs() + 1e-12 * self.body.diameter();
        find_root(phi, dphi, guess - width, guess + width)
    }

    fn normal(&self, x1: f64) -> Result<Vector> {
        let y = self.solve(x1)?;
        let n = self.frame.dim();
        if self.body.is_germ() {
            let mut x = vec![0.0; n - 1];
            x[0] = x1;
            let g = self.guess.gradient(&x);
            let mut v = Vector::from_element(n, -1.0);
            v.rows_mut(0, n - 1).copy_from(&g);
            return Ok(v.normalize());
        }
        let p = self.frame.to_world(&self.local_point(x1, y));
        Ok(self.frame.basis.transpose() * self.body.exterior_normal(&p)?)
    }
}

impl SectionGraph for BodySection<'_> {
    fn level_at(&self, x: f64) -> Result<f64> {
        self.solve(x)
    }

    fn slope_at(&self, x: f64) -> Result<f64> {
        let nrm = self.normal(x)?;
        Ok(-nrm[0] / nrm[nrm.len() - 1])
    }
}

struct QuadricSection<'a>(&'a OsculatingQuadric);

impl SectionGraph for QuadricSection<'_> {
    fn level_at(&self, x: f64) -> Result<f64> {
        Ok(self.0.section_height(x))
    }

    fn slope_at(&self, x: f64) -> Result<f64> {
        let [a, b, c] = self.0.section;
        let y = self.0.section_height(x);
        Ok((2.0 * a * x + b * y) / (1.0 - b * x - 2.0 * c * y))
    }
}

/// Normals of `α` at `ζ(x₁)` and of `Γ` at `x₁`, in local coordinates,
/// with `x₁ = t / (2A)` for a unit-curvature parameter `t`.
fn paired_normals(alpha: &ConvexBody, quad: &OsculatingQuadric, t: f64) -> Result<(Vector, Vector)> {
    let beta = BodySection::new(alpha, &quad.frame)?;
    let gamma = QuadricSection(quad);
    let x1 = t / (2.0 * quad.section[0]);
    let zeta = GraphPair::new(&beta, &gamma).zeta(x1)?;
    Ok((beta.normal(zeta)?, quad.section_normal(x1)))
}

/// Fits `|n_γ(x₁) - n_β(ζ(x₁))| ≈ C t^k` over a grid of unit-curvature
/// parameters `t`; returns `(k, C)`.
pub fn normal_field_gap(alpha: &ConvexBody, quad: &OsculatingQuadric, grid: &[f64]) -> Result<(f64, f64)> {
    deviation_exponent(
        |t| paired_normals(alpha, quad, t).map(|(b, g)| (b - g).norm()),
        |_| Ok(0.0),
        grid,
    )
}

/// Angle gap `ψ_β(ζ) - ψ_γ(x₁)` between the projections of the two normals
/// to `Π`, at the unit-curvature parameter `t`.
pub fn psi_gap(alpha: &ConvexBody, quad: &OsculatingQuadric, t: f64) -> Result<f64> {
    let (b, g) = paired_normals(alpha, quad, t)?;
    let n = b.len();
    let angle = |v: &Vector| v[n - 1].atan2(v[0]);
    Ok(angle(&b) - angle(&g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::dyadic_grid;

    fn germ3(terms: &[(&[u32], f64)]) -> ConvexBody {
        let poly = Poly::from_terms(2, terms.iter().map(|(e, c)| (e.to_vec(), *c)));
        ConvexBody::germ(GraphGerm::new(poly, 1.0).unwrap())
    }

    #[test]
    fn monomial_enumeration() {
        assert_eq!(monomials(2, 3).len(), 4);
        assert_eq!(monomials(3, 2).len(), 6);
        assert!(monomials(3, 4).iter().all(|m| m.iter().sum::<u32>() == 4));
    }

    #[test]
    fn local_expansion_of_ellipsoid() {
        let body = ConvexBody::ellipsoid_axes(&[2.0, 1.0, 0.5]).unwrap();
        let p = Vector::from_vec(vec![0.0, 0.0, -0.5]);
        let frame = PlanarSectionFrame::normal_section(&body, &p, &Vector::from_vec(vec![1.0, 0.0, 0.0])).unwrap();
        let g = local_graph_germ(&body, &frame, 4).unwrap();
        // z = 0.5 (1 - sqrt(1 - x²/4 - y²)) = x²/16 + y²/4 + ...
        assert!((g.coeff(&[2, 0]) - 0.5 / 8.0).abs() < 1e-12);
        assert!((g.coeff(&[0, 2]) - 0.25).abs() < 1e-12);
        assert!(g.coeff(&[1, 1]).abs() < 1e-12);
        assert!((g.coeff(&[0, 4]) - 0.5 / 8.0).abs() < 1e-10);
    }

    #[test]
    fn sphere_is_its_own_osculating_quadric() {
        let sphere = ConvexBody::ball(3, 1.0).unwrap();
        let exact = ConicQuadric::from_coeffs(3, vec![1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0]).unwrap();
        for (p, l) in [
            ([0.0, 0.0, -1.0], [1.0, 0.0, 0.0]),
            ([0.6, 0.0, 0.8], [0.0, 1.0, 0.0]),
            ([0.48, 0.6, 0.64], [-0.6, 0.48, 0.0]),
        ] {
            let p = Vector::from_column_slice(&p);
            let frame = PlanarSectionFrame::normal_section(&sphere, &p, &Vector::from_column_slice(&l)).unwrap();
            let q = osculating_quadric_along_curve(&sphere, &frame).unwrap();
            assert!(q.world.distance(&exact) < 1e-9, "{:?}", q.world);
            assert!(q.d.norm() < 1e-9);
        }
    }

    #[test]
    fn normal_form_coefficients() {
        let body = germ3(&[(&[2, 0], 1.0), (&[1, 1], 1.0), (&[0, 2], 1.0), (&[2, 1], 0.3)]);
        let q = osculating_quadric_along_curve(&body, &PlanarSectionFrame::standard(3)).unwrap();
        let (c, a, d) = q.normal_form(1e-12).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-15 && (a[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((d[0] + 0.3).abs() < 1e-15);
        let restricted = q
            .local
            .pullback(
                &Matrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]),
                &Vector::zeros(3),
            )
            .unwrap();
        let gamma = ConicQuadric::from_coeffs(2, vec![1.0, 0.0, 0.0, 0.0, -1.0, 0.0]).unwrap();
        assert!(restricted.distance(&gamma) < 1e-12);

        let flat = germ3(&[(&[2, 0], 0.5), (&[0, 2], 0.5), (&[1, 2], 0.4)]);
        let q = osculating_quadric_along_curve(&flat, &PlanarSectionFrame::standard(3)).unwrap();
        assert!(q.d.norm() == 0.0);

        let cubic = germ3(&[(&[2, 0], 0.5), (&[0, 2], 0.5), (&[3, 0], 0.1)]);
        let q = osculating_quadric_along_curve(&cubic, &PlanarSectionFrame::standard(3)).unwrap();
        assert!(matches!(q.normal_form(1e-12), Err(Error::FrameNormalization(_))));
    }

    #[test]
    fn normal_gap_orders() {
        let grid = dyadic_grid(4, 12);
        let alpha = germ3(&[
            (&[2, 0], 0.5),
            (&[0, 2], 0.5),
            (&[1, 1], 0.2),
            (&[2, 1], 0.3),
            (&[3, 1], 0.4),
            (&[5, 0], 0.05),
        ]);
        let q = osculating_quadric_along_curve(&alpha, &PlanarSectionFrame::standard(3)).unwrap();
        let (k, _) = normal_field_gap(&alpha, &q, &grid).unwrap();
        assert!((2.8..=3.5).contains(&k), "{k}");
        let mild = germ3(&[(&[2, 0], 0.5), (&[0, 2], 0.5), (&[2, 1], 0.3), (&[5, 0], 0.05)]);
        let q = osculating_quadric_along_curve(&mild, &PlanarSectionFrame::standard(3)).unwrap();
        for delta in [1e-2, 1e-3] {
            let off = q.with_d(&q.d + Vector::from_element(1, delta)).unwrap();
            let (k, _) = normal_field_gap(&mild, &off, &grid).unwrap();
            assert!((k - 2.0).abs() < 0.2, "{k}");
        }
        let sphere = ConvexBody::ball(3, 1.0).unwrap();
        let p = Vector::from_vec(vec![0.0, 0.0, -1.0]);
        let frame = PlanarSectionFrame::normal_section(&sphere, &p, &Vector::from_vec(vec![1.0, 0.0, 0.0])).unwrap();
        let q = osculating_quadric_along_curve(&sphere, &frame).unwrap();
        for t in &grid {
            let (b, g) = paired_normals(&sphere, &q, *t).unwrap();
            assert!((b - g).norm() < 1e-11);
        }
        let paraboloid = germ3(&[(&[2, 0], 0.5), (&[0, 2], 0.5)]);
        let q = osculating_quadric_along_curve(&paraboloid, &PlanarSectionFrame::standard(3)).unwrap();
        assert!(matches!(
            normal_field_gap(&paraboloid, &q, &grid),
            Err(Error::Indistinguishable)
        ));
    }

    #[test]
    fn psi_gap_leading_term() {
        let c = 0.05;
        let alpha = germ3(&[(&[2, 0], 0.5), (&[0, 2], 0.5), (&[2, 1], 0.3), (&[5, 0], c)]);
        let q = osculating_quadric_along_curve(&alpha, &PlanarSectionFrame::standard(3)).unwrap();
        let (k, coef) = deviation_exponent(|t| psi_gap(&alpha, &q, t), |_| Ok(0.0), &dyadic_grid(4, 9)).unwrap();
        assert!((k - 4.0).abs() < 0.2, "{k}");
        assert!((coef - 4.0 * c).abs() < 0.1 * 4.0 * c, "{coef}");
    }
}
