//! Reflection laws: the parallel-chord involution of a convex hypersurface,
//! T-billiard reflection, Euclidean and projective-billiard reflections, and
//! the two equivalent Finsler (Minkowski) reflection laws.

use crate::convex_body::{ConvexBody, OrientedLine};
use crate::error::{Error, Result};
use crate::numeric::{find_root, Vector};

/// Incidence angles below this (radians) count as grazing.
pub const GRAZING_ANGLE: f64 = 1e-6;

/// A class of parallel lines, identified by a unit direction up to sign.
#[derive(Clone, Debug, PartialEq)]
pub struct ParallelClass {
    direction: Vector,
}

impl ParallelClass {
    pub fn new(direction: &Vector) -> Result<Self> {
        let r = direction.norm();
        if !(r > 0.0) {
            return Err(Error::Domain("parallel class needs a nonzero direction".into()));
        }
        Ok(ParallelClass {
            direction: direction / r,
        })
    }

    pub fn direction(&self) -> &Vector {
        &self.direction
    }

    pub fn dim(&self) -> usize {
        self.direction.len()
    }
}

/// Linear hyperplane `{x : ⟨η, x⟩ = 0}` given by a unit normal `η`.
#[derive(Clone, Debug, PartialEq)]
pub struct Hyperplane {
    normal: Vector,
}

impl Hyperplane {
    pub fn new(normal: &Vector) -> Result<Self> {
        let r = normal.norm();
        if !(r > 0.0) {
            return Err(Error::Domain("hyperplane needs a nonzero normal".into()));
        }
        Ok(Hyperplane { normal: normal / r })
    }

    pub fn normal(&self) -> &Vector {
        &self.normal
    }
}

/// Line field transversal to a hypersurface, with a transversality margin
/// `|⟨N, n⟩| ≥ margin` between unit vectors.
pub struct TransversalField<F: Fn(&Vector) -> Vector> {
    field: F,
    margin: f64,
}

impl<F: Fn(&Vector) -> Vector> TransversalField<F> {
    pub fn new(field: F, margin: f64) -> Self {
        TransversalField { field, margin }
    }

    /// Unit direction of the line at `q`, checked against the normal there.
    pub fn line_at(&self, q: &Vector, normal: &Vector) -> Result<Vector> {
        let nq = (self.field)(q);
        let r = nq.norm();
        if !(r > 0.0) {
            return Err(Error::Precondition("transversal field vanishes".into()));
        }
        let nq = nq / r;
        if nq.dot(&normal.normalize()).abs() < self.margin {
            return Err(Error::Precondition(
                "line field is not transversal to the tangent plane".into(),
            ));
        }
        Ok(nq)
    }
}

/// The involution `n(A) ↦ n(B)` of the Gauss sphere of `t`, where `AB` is the
/// chord of `∂t` in class `cls` through the point with normal `u`.
pub fn parallel_chord_involution(t: &ConvexBody, cls: &ParallelClass, u: &Vector) -> Result<Vector> {
    let u = u.normalize();
    if u.dot(cls.direction()).abs() <= 1e-14 {
        return Ok(u);
    }
    let a = t.gauss_inverse(&u)?;
    let b = t.chord_second_intersection(&a, cls.direction())?;
    t.exterior_normal(&b)
}

/// Reflection of `v` in the hyperplane orthogonal to the unit `normal`.
pub fn euclidean_reflect(normal: &Vector, v: &Vector) -> Vector {
    v - normal * (2.0 * v.dot(normal))
}

fn last_hit(k: &ConvexBody, line: &OrientedLine) -> Result<(Vector, Vector)> {
    let (_, t_out) = k.line_intersections(line)?;
    let q = line.at(t_out);
    let n_k = k.gradient(&q)?.normalize();
    let angle = line.direction().dot(&n_k).abs().min(1.0).asin();
    if angle < GRAZING_ANGLE {
        return Err(Error::Grazing { angle });
    }
    Ok((q, n_k))
}

/// T-billiard reflection: the line leaves `K` at its last intersection `q`
/// and continues from `q` with direction `R_L(v)`, `L` the class of the
/// normal of `∂K` at `q`.
pub fn t_billiard_reflect(k: &ConvexBody, t: &ConvexBody, line: &OrientedLine) -> Result<OrientedLine> {
    let (q, n_k) = last_hit(k, line)?;
    let cls = ParallelClass::new(&n_k)?;
    let out = parallel_chord_involution(t, &cls, line.direction())?;
    OrientedLine::new(q, out)
}

/// Euclidean billiard reflection of a line at its last intersection with
/// `K`.
pub fn euclidean_billiard_reflect(k: &ConvexBody, line: &OrientedLine) -> Result<OrientedLine> {
    let (q, n_k) = last_hit(k, line)?;
    OrientedLine::new(q, euclidean_reflect(&n_k, line.direction()))
}

/// Projective-billiard reflection at `q`: the affine involution fixing the
/// tangent hyperplane (normal `nu`) pointwise and negating the transversal
/// direction `n_dir`.
pub fn projective_billiard_reflect(
    q: &Vector,
    nu: &Vector,
    n_dir: &Vector,
    incoming: &OrientedLine,
) -> Result<OrientedLine> {
    let w = q - incoming.point();
    let v = incoming.direction();
    let off = (&w - v * w.dot(v)).norm();
    if off > 1e-9 * w.norm().max(1.0) {
        return Err(Error::Precondition("incoming line does not pass through q".into()));
    }
    let nu = nu.normalize();
    let n_dir = n_dir.normalize();
    let s = nu.dot(&n_dir);
    if s.abs() < 1e-12 {
        return Err(Error::Precondition(
            "transversal line lies in the tangent plane".into(),
        ));
    }
    let c = nu.dot(v);
    if c == 0.0 {
        return OrientedLine::new(q.clone(), v.clone());
    }
    OrientedLine::new(q.clone(), v - &n_dir * (2.0 * c / s))
}

fn check_indicatrix(i: &ConvexBody, h: &Hyperplane, u: &Vector) -> Result<()> {
    if i.dim() != h.normal().len() || i.dim() != u.len() {
        return Err(Error::DimensionMismatch {
            expected: i.dim(),
            got: u.len(),
        });
    }
    let angle = u.normalize().dot(h.normal()).abs().min(1.0).asin();
    if angle < GRAZING_ANGLE {
        return Err(Error::Grazing { angle });
    }
    Ok(())
}

/// Finsler reflection by the Legendre law: `v ∈ ∂I` with `D(u) - D(v)`
/// vanishing on `H`.
pub fn finsler_reflect_legendre(i: &ConvexBody, h: &Hyperplane, u: &Vector) -> Result<Vector> {
    check_indicatrix(i, h, u)?;
    let j = i.polar_dual()?;
    let du = i.legendre_point(u)?;
    let dv = j.chord_second_intersection(&du, h.normal())?;
    j.legendre_point(&dv)
}

/// Finsler reflection by the concurrency law: the tangent hyperplanes of
/// `∂I` at `u` and `v` meet inside `H` (or are parallel).
pub fn finsler_reflect_concurrency(i: &ConvexBody, h: &Hyperplane, u: &Vector) -> Result<Vector> {
    check_indicatrix(i, h, u)?;
    let eta = h.normal();
    let n_u = i.exterior_normal(u)?;
    let tangential = eta - &n_u * eta.dot(&n_u);
    if tangential.norm() < 1e-12 {
        // Parallel tangent planes: the antipode of a symmetric indicatrix.
        return i.gauss_inverse(&-&n_u);
    }
    let e = tangential.normalize();
    // A point s0 of T_u ∩ H: s0 = a n_u + b e with ⟨n_u, s0⟩ = ⟨n_u, u⟩ and
    // ⟨η, s0⟩ = 0.
    let c_u = n_u.dot(u);
    let a = c_u;
    let b = -a * eta.dot(&n_u) / eta.dot(&e);
    let s0 = &n_u * a + &e * b;
    // Supporting hyperplanes through T_u ∩ H have normals in span(n_u, e).
    let m = |th: f64| &n_u * th.cos() + &e * th.sin();
    let dm = |th: f64| &e * th.cos() - &n_u * th.sin();
    let psi = |th: f64| i.support(&m(th)).map_or(f64::NAN, |hv| hv - m(th).dot(&s0));
    let dpsi = |th: f64| {
        i.gauss_inverse(&m(th))
            .map_or(f64::NAN, |p| (p - &s0).dot(&dm(th)))
    };
    let tau = std::f64::consts::TAU;
    let steps = 720;
    let start = 1e-3;
    let mut lo = start;
    let mut f_lo = psi(lo);
    for k in 1..=steps {
        let hi = start + (tau - 2.0 * start) * k as f64 / steps as f64;
        let f_hi = psi(hi);
        if f_lo.is_nan() || f_hi.is_nan() {
            return Err(Error::Convergence {
                iterations: k,
                residual: f64::NAN,
            });
        }
        if (f_lo < 0.0) != (f_hi < 0.0) {
            let th = find_root(&psi, &dpsi, lo, hi)?;
            return i.gauss_inverse(&m(th));
        }
        lo = hi;
        f_lo = f_hi;
    }
    Err(Error::Grazing { angle: 0.0 })
}

/// Image of a line under `q ↦ b ∘ q` (componentwise), direction renormalized.
pub fn rescale_conjugate(b: &Vector, line: &OrientedLine) -> Result<OrientedLine> {
    if b.len() != line.dim() {
        return Err(Error::DimensionMismatch {
            expected: line.dim(),
            got: b.len(),
        });
    }
    if b.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::Domain("rescaling factors must be positive".into()));
    }
    OrientedLine::new(
        line.point().component_mul(b),
        line.direction().component_mul(b),
    )
}
