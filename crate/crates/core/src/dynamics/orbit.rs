use crate::convex_body::{ConvexBody, OrientedLine};
use crate::error::{Error, Result};
use crate::numeric::Vector;
use crate::reflection::t_billiard_reflect;

/// How an orbit computation ended.
#[derive(Clone, Debug, PartialEq)]
pub enum OrbitStatus {
    Complete,
    /// Stopped before the requested number of steps.
    Truncated { step: usize, reason: Error },
}

/// A T-billiard orbit: bounce points on `∂K`, the direction leaving each
/// bounce, and the lengths `h_T(q_{i+1} - q_i)` of the closed segments.
#[derive(Clone, Debug)]
pub struct Orbit {
    pub points: Vec<Vector>,
    pub directions: Vec<Vector>,
    pub lengths: Vec<f64>,
    pub action: f64,
    pub closed: bool,
    pub status: OrbitStatus,
}

/// Length of the directed chord `v` in the norm-like functional `h_T`.
pub fn finsler_length(t: &ConvexBody, v: &Vector) -> Result<f64> {
    t.support(v)
}

impl Orbit {
    /// A closed polygon `q_0 .. q_{m-1}` with segment lengths `h_T`;
    /// consecutive vertices must be distinct.
    pub fn closed_polygon(t: &ConvexBody, points: Vec<Vector>) -> Result<Self> {
        let m = points.len();
        if m < 2 {
            return Err(Error::DegenerateData("closed orbit needs at least two vertices".into()));
        }
        let scale = points.iter().map(|p| p.norm()).fold(1.0, f64::max);
        let mut directions = Vec::with_capacity(m);
        let mut lengths = Vec::with_capacity(m);
        for i in 0..m {
            let step = &points[(i + 1) % m] - &points[i];
            if step.norm() <= 1e-9 * scale {
                return Err(Error::DegenerateData(format!(
                    "vertices {i} and {} coincide",
                    (i + 1) % m
                )));
            }
            lengths.push(finsler_length(t, &step)?);
            directions.push(step.normalize());
        }
        Ok(Orbit {
            action: lengths.iter().sum(),
            points,
            directions,
            lengths,
            closed: true,
            status: OrbitStatus::Complete,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Smallest `p ≥ 1` with `q_{i+p} = q_i` and matching directions for
    /// every recorded `i`, if any.
    pub fn period(&self, tol: f64) -> Option<usize> {
        let k = self.points.len();
        (1..k).find(|&p| {
            (0..k - p).all(|i| {
                (&self.points[i + p] - &self.points[i]).norm() <= tol
                    && (&self.directions[i + p] - &self.directions[i]).norm() <= tol
            })
        })
    }
}

/// Applies the T-billiard map `steps` times to `line`; the first bounce is
/// the exit point of `line` from `K`.
pub fn iterate_t_billiard(k: &ConvexBody, t: &ConvexBody, line: &OrientedLine, steps: usize) -> Result<Orbit> {
    k.line_intersections(line)?;
    let mut points = Vec::with_capacity(steps);
    let mut directions = Vec::with_capacity(steps);
    let mut status = OrbitStatus::Complete;
    let mut current = line.clone();
    for step in 0..steps {
        match t_billiard_reflect(k, t, &current) {
            Ok(next) => {
                points.push(next.point().clone());
                directions.push(next.direction().clone());
                current = next;
            }
            Err(reason) => {
                status = OrbitStatus::Truncated { step, reason };
                break;
            }
        }
    }
    let lengths = points
        .windows(2)
        .map(|w| finsler_length(t, &(&w[1] - &w[0])))
        .collect::<Result<Vec<_>>>()?;
    let mut orbit = Orbit {
        action: lengths.iter().sum(),
        points,
        directions,
        lengths,
        closed: false,
        status,
    };
    orbit.closed = orbit.period(1e-9 * k.diameter()).is_some();
    Ok(orbit)
}

/// One piece of a (K, T)-billiard orbit in `ℝⁿ × ℝⁿ`.
#[derive(Clone, Debug)]
pub enum KTSegment {
    /// `q` moves along `n_T(p)` with `p ∈ ∂T` fixed.
    QMove { p: Vector, from: Vector, to: Vector },
    /// `p` moves along `-n_K(q)` with `q ∈ ∂K` fixed.
    PMove { q: Vector, from: Vector, to: Vector },
}

#[derive(Clone, Debug)]
pub struct KTOrbit {
    pub segments: Vec<KTSegment>,
    pub status: OrbitStatus,
}

impl KTOrbit {
    /// End points of the `q`-moves, i.e. the bounce points on `∂K`.
    pub fn q_projection(&self) -> Vec<Vector> {
        self.segments
            .iter()
            .filter_map(|s| match s {
                KTSegment::QMove { to, .. } => Some(to.clone()),
                _ => None,
            })
            .collect()
    }
}

/// The orbit of the characteristic flow on `∂(K × T)` over the T-billiard
/// orbit of `line`, with `steps` bounces.
pub fn lift_kt_orbit(k: &ConvexBody, t: &ConvexBody, line: &OrientedLine, steps: usize) -> Result<KTOrbit> {
    let (t_in, _) = k.line_intersections(line)?;
    let mut q = line.at(t_in);
    let mut p = t.gauss_inverse(line.direction())?;
    let mut current = line.clone();
    let mut segments = Vec::with_capacity(2 * steps);
    let mut status = OrbitStatus::Complete;
    for step in 0..steps {
        let (_, t_out) = match k.line_intersections(&current) {
            Ok(v) => v,
            Err(reason) => {
                status = OrbitStatus::Truncated { step, reason };
                break;
            }
        };
        let q_next = current.at(t_out);
        segments.push(KTSegment::QMove {
            p: p.clone(),
            from: q.clone(),
            to: q_next.clone(),
        });
        let next = match t_billiard_reflect(k, t, &current) {
            Ok(l) => l,
            Err(reason) => {
                status = OrbitStatus::Truncated { step, reason };
                break;
            }
        };
        let n_k = k.exterior_normal(&q_next)?;
        let p_next = t.chord_second_intersection(&p, &(-&n_k))?;
        segments.push(KTSegment::PMove {
            q: q_next.clone(),
            from: p.clone(),
            to: p_next.clone(),
        });
        q = q_next;
        p = p_next;
        // The lifted state restarts from the reflected line through q.
        current = OrientedLine::new(next.point().clone(), t.exterior_normal(&p)?)?;
    }
    Ok(KTOrbit { segments, status })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reflection::{euclidean_billiard_reflect, rescale_conjugate};
    use crate::sampling::random_unit_vector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn diameter_orbit_in_the_disk() {
        let disk = ConvexBody::ball(2, 1.0).unwrap();
        let line = OrientedLine::new(v(&[0.0, 0.0]), v(&[1.0, 0.0])).unwrap();
        let orbit = iterate_t_billiard(&disk, &disk, &line, 6).unwrap();
        assert_eq!(orbit.period(1e-12), Some(2));
        assert!(orbit.closed);
        assert!(orbit.lengths.iter().all(|l| (l - 2.0).abs() < 1e-12));
        assert!((orbit.lengths[0] + orbit.lengths[1] - 4.0).abs() < 1e-12);
        let empty = iterate_t_billiard(&disk, &disk, &line, 0).unwrap();
        assert!(empty.is_empty() && empty.status == OrbitStatus::Complete);

        let lift = lift_kt_orbit(&disk, &disk, &line, 2).unwrap();
        assert_eq!(lift.segments.len(), 4);
        let ends: Vec<Vector> = lift.q_projection();
        assert!((&ends[0] - v(&[1.0, 0.0])).norm() < 1e-12);
        assert!((&ends[1] - v(&[-1.0, 0.0])).norm() < 1e-12);
    }

    #[test]
    fn disk_orbits_keep_their_caustic() {
        let disk = ConvexBody::ball(2, 1.0).unwrap();
        let ball = ConvexBody::ball(2, 3.0).unwrap();
        let line = OrientedLine::new(v(&[0.0, 0.3]), v(&[1.0, 0.2])).unwrap();
        let orbit = iterate_t_billiard(&disk, &ball, &line, 40).unwrap();
        let dist = |p: &Vector, d: &Vector| (p[0] * d[1] - p[1] * d[0]).abs();
        let d0 = dist(&orbit.points[0], &orbit.directions[0]);
        for (p, d) in orbit.points.iter().zip(&orbit.directions) {
            assert!((dist(p, d) - d0).abs() < 1e-10);
        }
    }

    #[test]
    fn ellipse_orbit_is_conjugate_to_euclidean_orbit() {
        let b = v(&[2.0, 0.5]);
        let t = ConvexBody::ellipsoid_axes(&[2.0, 0.5]).unwrap();
        let k = ConvexBody::superellipsoid(&[1.0, 1.3], 4.0).unwrap();
        let line = OrientedLine::new(v(&[0.1, -0.2]), v(&[0.6, 0.8])).unwrap();
        let orbit = iterate_t_billiard(&k, &t, &line, 12).unwrap();
        // Each bounce matches the Euclidean bounce in the rescaled body.
        let k_img = k.linear_image(&crate::numeric::Matrix::from_diagonal(&b)).unwrap();
        let inv = b.map(|x| 1.0 / x);
        let mut prev = line.clone();
        for (p, d) in orbit.points.iter().zip(&orbit.directions) {
            let img = euclidean_billiard_reflect(&k_img, &rescale_conjugate(&b, &prev).unwrap()).unwrap();
            let back = rescale_conjugate(&inv, &img).unwrap();
            assert!((back.point() - p).norm() < 1e-10);
            assert!((back.direction() - d).norm() < 1e-10);
            prev = OrientedLine::new(p.clone(), d.clone()).unwrap();
        }
    }

    #[test]
    fn lift_projects_to_the_t_billiard_polygon() {
        let k = ConvexBody::ellipsoid_axes(&[1.5, 1.0]).unwrap();
        let t = ConvexBody::superellipsoid(&[1.0, 0.7], 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let point = random_unit_vector(&mut rng, 2) * rng.gen_range(0.0..0.8);
            let line = OrientedLine::new(point, random_unit_vector(&mut rng, 2)).unwrap();
            let orbit = iterate_t_billiard(&k, &t, &line, 6).unwrap();
            let lift = lift_kt_orbit(&k, &t, &line, 6).unwrap();
            for (a, b) in lift.q_projection().iter().zip(&orbit.points) {
                assert!((a - b).norm() < 1e-9);
            }
            for s in &lift.segments {
                match s {
                    KTSegment::QMove { p, from, to } => {
                        let dir = (to - from).normalize();
                        let n_t = t.exterior_normal(p).unwrap();
                        assert!((dir - n_t).norm() < 1e-9);
                    }
                    KTSegment::PMove { q, from, to } => {
                        let dir = (to - from).normalize();
                        let n_k = k.exterior_normal(q).unwrap();
                        assert!((dir + n_k).norm() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn repeated_vertices_are_rejected() {
        let disk = ConvexBody::ball(2, 1.0).unwrap();
        let pts = vec![v(&[1.0, 0.0]), v(&[1.0, 0.0]), v(&[-1.0, 0.0])];
        assert!(matches!(Orbit::closed_polygon(&disk, pts), Err(Error::DegenerateData(_))));
    }
}
