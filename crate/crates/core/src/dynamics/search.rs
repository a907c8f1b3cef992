use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::orbit::Orbit;
use crate::convex_body::ConvexBody;
use crate::error::{Error, Result};
use crate::numeric::{orthonormal_complement, Matrix, Vector};
use crate::sampling::random_unit_vector;

/// Parameters of the multistart critical-point search.
#[derive(Clone, Debug)]
pub struct SearchPlan {
    pub multistarts: usize,
    pub seed: u64,
    pub max_iterations: usize,
    /// Required norm of the action gradient.
    pub tolerance: f64,
}

impl Default for SearchPlan {
    fn default() -> Self {
        SearchPlan {
            multistarts: 32,
            seed: 0,
            max_iterations: 500,
            tolerance: 1e-8,
        }
    }
}

/// A closed T-billiard polygon found by the search.
#[derive(Clone, Debug)]
pub struct ClosedOrbit {
    pub orbit: Orbit,
    /// Norm of the action gradient in boundary coordinates.
    pub stationarity: f64,
    pub converged: bool,
    pub start: usize,
}

/// Action `Σ h_T(q_{i+1} - q_i)` of a closed polygon whose vertices are
/// the boundary points of `K` with outer normals `u_i`.
struct ActionProblem<'a> {
    k: &'a ConvexBody,
    t: &'a ConvexBody,
    m: usize,
}

impl ActionProblem<'_> {
    fn vertices(&self, us: &[Vector]) -> Result<Vec<Vector>> {
        us.iter().map(|u| self.k.gauss_inverse(u)).collect()
    }

    #[cfg(test)]
    fn action(&self, us: &[Vector]) -> Result<f64> {
        let q = self.vertices(us)?;
        (0..self.m)
            .map(|i| self.t.support(&(&q[(i + 1) % self.m] - &q[i])))
            .sum()
    }

    /// `∂A/∂q_i = ∇h_T(q_i - q_{i-1}) - ∇h_T(q_{i+1} - q_i)`.
    fn q_gradient(&self, q: &[Vector]) -> Result<Vec<Vector>> {
        let m = self.m;
        let grad_h = |v: &Vector| -> Result<Vector> {
            let r = v.norm();
            if r == 0.0 {
                return Err(Error::DegenerateData("coincident vertices".into()));
            }
            self.t.gauss_inverse(&(v / r))
        };
        let steps: Vec<Vector> = (0..m)
            .map(|i| grad_h(&(&q[(i + 1) % m] - &q[i])))
            .collect::<Result<_>>()?;
        Ok((0..m)
            .map(|i| &steps[(i + m - 1) % m] - &steps[i])
            .collect())
    }

    /// Gradient in the tangent charts `u_i + E_i ξ_i` of the normals.
    fn gradient(&self, us: &[Vector], frames: &[Matrix]) -> Result<Vector> {
        let q = self.vertices(us)?;
        let g = self.q_gradient(&q)?;
        let n = self.k.dim();
        let mut out = Vector::zeros(self.m * (n - 1));
        for i in 0..self.m {
            let h = self.k.support_hessian(&us[i])?;
            let gi = frames[i].transpose() * (h * &g[i]);
            out.rows_mut(i * (n - 1), n - 1).copy_from(&gi);
        }
        Ok(out)
    }

    fn moved(us: &[Vector], frames: &[Matrix], xi: &Vector) -> Vec<Vector> {
        let d = frames[0].ncols();
        us.iter()
            .zip(frames)
            .enumerate()
            .map(|(i, (u, e))| (u + e * xi.rows(i * d, d)).normalize())
            .collect()
    }

    fn solve(&self, mut us: Vec<Vector>, plan: &SearchPlan) -> Result<(Vec<Vector>, f64)> {
        let n = self.k.dim();
        let dim = self.m * (n - 1);
        let mut mu = 1e-3;
        let mut frames: Vec<Matrix> = us.iter().map(orthonormal_complement).collect();
        let mut f = self.gradient(&us, &frames)?;
        for _ in 0..plan.max_iterations {
            if f.norm() <= 0.1 * plan.tolerance {
                break;
            }
            let h = 1e-6;
            let mut jac = Matrix::zeros(dim, dim);
            for c in 0..dim {
                let mut e = Vector::zeros(dim);
                e[c] = h;
                let fp = self.gradient(&Self::moved(&us, &frames, &e), &frames)?;
                let fm = self.gradient(&Self::moved(&us, &frames, &(-&e)), &frames)?;
                jac.set_column(c, &((fp - fm) / (2.0 * h)));
            }
            let jt = jac.transpose();
            let normal = &jt * &jac;
            let rhs = -(&jt * &f);
            let mut improved = false;
            for _ in 0..30 {
                let damped = &normal + Matrix::identity(dim, dim) * (mu * normal.diagonal().max().max(1e-12));
                let Some(step) = damped.lu().solve(&rhs) else {
                    mu *= 10.0;
                    continue;
                };
                let cand = Self::moved(&us, &frames, &step);
                let cand_frames: Vec<Matrix> = cand.iter().map(orthonormal_complement).collect();
                if let Ok(fc) = self.gradient(&cand, &cand_frames) {
                    if fc.norm() < f.norm() {
                        us = cand;
                        frames = cand_frames;
                        f = fc;
                        mu = (mu / 3.0).max(1e-12);
                        improved = true;
                        break;
                    }
                }
                mu *= 4.0;
            }
            if !improved {
                break;
            }
        }
        let r = f.norm();
        Ok((us, r))
    }
}

fn seed_normals(n: usize, m: usize, start: usize, seed: u64) -> Vec<Vector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1_000_003).wrapping_add(start as u64));
    let a = random_unit_vector(&mut rng, n);
    let b = {
        let w = random_unit_vector(&mut rng, n);
        let w = &w - &a * a.dot(&w);
        w.normalize()
    };
    let in_plane = |theta: f64| &a * theta.cos() + &b * theta.sin();
    let jitter = |rng: &mut ChaCha8Rng, u: Vector, size: f64| {
        (u + random_unit_vector(rng, n) * size).normalize()
    };
    match start % 4 {
        0 => {
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            (0..m)
                .map(|i| in_plane(phase + std::f64::consts::TAU * i as f64 / m as f64))
                .collect()
        }
        1 => (0..m)
            .map(|i| {
                let u = if i % 2 == 0 { a.clone() } else { -&a };
                jitter(&mut rng, u, 0.1)
            })
            .collect(),
        2 => {
            let mut angles: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
            angles.sort_by(|x, y| x.partial_cmp(y).unwrap());
            angles.into_iter().map(|t| jitter(&mut rng, in_plane(t), 0.05)).collect()
        }
        _ => (0..m).map(|_| random_unit_vector(&mut rng, n)).collect(),
    }
}

/// Searches for closed T-billiard polygons with `m` bounces as critical
/// points of the action with pairwise distinct consecutive vertices, and
/// returns the one of least action (or, if none converged, the best
/// stationarity reached).
pub fn closed_orbit_search(k: &ConvexBody, t: &ConvexBody, m: usize, plan: &SearchPlan) -> Result<ClosedOrbit> {
    if m < 2 {
        return Err(Error::Domain("closed orbits need at least two bounces".into()));
    }
    if !k.is_smooth() || !t.is_smooth() || k.is_germ() || t.is_germ() {
        return Err(Error::NonSmooth);
    }
    if k.dim() != t.dim() {
        return Err(Error::DimensionMismatch {
            expected: k.dim(),
            got: t.dim(),
        });
    }
    if plan.multistarts == 0 {
        return Err(Error::Plan("at least one start is required".into()));
    }
    let problem = ActionProblem { k, t, m };
    let min_gap = 1e-3 * k.diameter();
    let results: Vec<Option<ClosedOrbit>> = (0..plan.multistarts)
        .into_par_iter()
        .map(|s| {
            let seeds = seed_normals(k.dim(), m, s, plan.seed);
            let (us, r) = problem.solve(seeds, plan).ok()?;
            let q = problem.vertices(&us).ok()?;
            if (0..m).any(|i| (&q[(i + 1) % m] - &q[i]).norm() < min_gap) {
                return None;
            }
            let orbit = Orbit::closed_polygon(t, q).ok()?;
            Some(ClosedOrbit {
                orbit,
                stationarity: r,
                converged: r <= plan.tolerance,
                start: s,
            })
        })
        .collect();
    let candidates: Vec<ClosedOrbit> = results.into_iter().flatten().collect();
    let converged = candidates
        .iter()
        .filter(|c| c.converged)
        .min_by(|a, b| {
            a.orbit
                .action
                .partial_cmp(&b.orbit.action)
                .unwrap()
                .then(a.start.cmp(&b.start))
        });
    if let Some(best) = converged {
        return Ok(best.clone());
    }
    candidates
        .into_iter()
        .min_by(|a, b| {
            a.stationarity
                .partial_cmp(&b.stationarity)
                .unwrap()
                .then(a.start.cmp(&b.start))
        })
        .ok_or(Error::Convergence {
            iterations: plan.max_iterations,
            residual: f64::INFINITY,
        })
}

/// Per-bounce-count results of a capacity estimate.
#[derive(Clone, Debug)]
pub struct CapacityReport {
    pub value: f64,
    pub rows: Vec<(usize, Option<ClosedOrbit>)>,
}

/// Least action over converged closed orbits with `2..=m_max` bounces.
pub fn capacity_estimate(k: &ConvexBody, t: &ConvexBody, m_max: usize, plan: &SearchPlan) -> Result<CapacityReport> {
    if m_max < 2 {
        return Err(Error::Domain("m_max must be at least 2".into()));
    }
    let rows: Vec<(usize, Option<ClosedOrbit>)> = (2..=m_max)
        .into_par_iter()
        .map(|m| (m, closed_orbit_search(k, t, m, plan).ok()))
        .collect();
    let value = rows
        .iter()
        .filter_map(|(_, c)| c.as_ref().filter(|c| c.converged).map(|c| c.orbit.action))
        .fold(f64::INFINITY, f64::min);
    if !value.is_finite() {
        return Err(Error::Convergence {
            iterations: plan.max_iterations,
            residual: f64::INFINITY,
        });
    }
    Ok(CapacityReport { value, rows })
}

fn is_centrally_symmetric(k: &ConvexBody) -> Result<bool> {
    let n = k.dim();
    let dirs = crate::sampling::sphere_grid(n, 64);
    let scale = k.bounding_radius();
    for u in dirs {
        if (k.support(&u)? - k.support(&(-&u))?).abs() > 1e-9 * scale {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `vol(K) · vol(K°)` with an error estimate.
pub fn mahler_product(k: &ConvexBody) -> Result<(f64, f64)> {
    if !is_centrally_symmetric(k)? {
        return Err(Error::Precondition("body must be centrally symmetric".into()));
    }
    let (v, ev) = k.volume()?;
    let (w, ew) = k.polar_dual()?.volume()?;
    Ok((v * w, v * ew + w * ev))
}

/// `c(K × T)ⁿ / (n! vol(K) vol(T))`.
pub fn viterbo_ratio(k: &ConvexBody, t: &ConvexBody, m_max: usize, plan: &SearchPlan) -> Result<f64> {
    let n = k.dim();
    let cap = capacity_estimate(k, t, m_max, plan)?.value;
    let fact: f64 = (1..=n).map(|i| i as f64).product();
    Ok(cap.powi(n as i32) / (fact * k.volume()?.0 * t.volume()?.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reflection::t_billiard_reflect;
    use crate::OrientedLine;

    fn plan() -> SearchPlan {
        SearchPlan {
            multistarts: 16,
            ..SearchPlan::default()
        }
    }

    #[test]
    fn action_gradient_matches_finite_differences() {
        let k = ConvexBody::ellipsoid_axes(&[1.4, 1.0, 0.8]).unwrap();
        let t = ConvexBody::superellipsoid(&[1.0, 0.8, 1.1], 3.0).unwrap();
        let problem = ActionProblem { k: &k, t: &t, m: 4 };
        let us = seed_normals(3, 4, 3, 7);
        let frames: Vec<Matrix> = us.iter().map(orthonormal_complement).collect();
        let g = problem.gradient(&us, &frames).unwrap();
        let h = 1e-5;
        for c in 0..g.len() {
            let mut e = Vector::zeros(g.len());
            e[c] = h;
            let ap = problem.action(&ActionProblem::moved(&us, &frames, &e)).unwrap();
            let am = problem.action(&ActionProblem::moved(&us, &frames, &(-&e))).unwrap();
            assert!(((ap - am) / (2.0 * h) - g[c]).abs() < 1e-7, "{c}");
        }
    }

    #[test]
    fn disk_orbits() {
        let disk = ConvexBody::ball(2, 1.0).unwrap();
        let two = closed_orbit_search(&disk, &disk, 2, &plan()).unwrap();
        assert!(two.converged && (two.orbit.action - 4.0).abs() < 1e-9);
        let three = closed_orbit_search(&disk, &disk, 3, &plan()).unwrap();
        assert!(three.converged);
        assert!((three.orbit.action - 3.0 * 3f64.sqrt()).abs() < 1e-8, "{}", three.orbit.action);
    }

    #[test]
    fn critical_polygons_obey_the_reflection_law() {
        let k = ConvexBody::ellipsoid_axes(&[1.4, 1.0]).unwrap();
        let t = ConvexBody::superellipsoid(&[1.0, 0.8], 3.0).unwrap();
        for m in [2, 3] {
            let found = closed_orbit_search(&k, &t, m, &plan()).unwrap();
            assert!(found.converged);
            let q = &found.orbit.points;
            for i in 0..m {
                let prev = &q[(i + m - 1) % m];
                let line = OrientedLine::through(prev, &q[i]).unwrap();
                let out = t_billiard_reflect(&k, &t, &line).unwrap();
                assert!((out.point() - &q[i]).norm() < 1e-8);
                assert!((out.direction() - &found.orbit.directions[i]).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn capacity_scaling_and_rescaling() {
        let disk = ConvexBody::ball(2, 1.0).unwrap();
        let base = capacity_estimate(&disk, &disk, 3, &plan()).unwrap().value;
        assert!((base - 4.0).abs() < 1e-9);
        for lambda in [0.5, 2.0] {
            let scaled = capacity_estimate(&disk.scaled(lambda).unwrap(), &disk, 3, &plan()).unwrap().value;
            assert!((scaled - lambda * base).abs() < 1e-6);
        }
        let k = ConvexBody::ellipsoid_axes(&[2.0, 1.0]).unwrap();
        let t = ConvexBody::ellipsoid_axes(&[0.5, 1.0]).unwrap();
        let c = capacity_estimate(&k, &t, 3, &plan()).unwrap().value;
        assert!((c - 4.0).abs() < 1e-6, "{c}");

        // Monotone under inclusion; the inner ellipse's shortest orbit is
        // the bouncing minor axis.
        let inner = ConvexBody::ellipsoid_axes(&[1.0, 0.8]).unwrap();
        let c_inner = capacity_estimate(&inner, &disk, 3, &plan()).unwrap().value;
        assert!((c_inner - 3.2).abs() < 1e-8 && c_inner <= base);
    }

    #[test]
    fn mahler_examples() {
        let disk = ConvexBody::ball(2, 1.0).unwrap();
        let (p, _) = mahler_product(&disk).unwrap();
        assert!((p - std::f64::consts::PI.powi(2)).abs() < 1e-12);
        let square = ConvexBody::polygon(
            [[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]]
                .iter()
                .map(|c| Vector::from_column_slice(c))
                .collect(),
        )
        .unwrap();
        let (p, e) = mahler_product(&square).unwrap();
        assert!((p - 8.0).abs() < 1e-12 && e == 0.0);
        let ellipse = ConvexBody::ellipsoid_axes(&[3.0, 0.4]).unwrap();
        assert!((mahler_product(&ellipse).unwrap().0 - std::f64::consts::PI.powi(2)).abs() < 1e-10);
        let off = disk.translated(&Vector::from_vec(vec![0.3, 0.0])).unwrap();
        assert!(matches!(mahler_product(&off), Err(Error::Precondition(_))));
        let r = viterbo_ratio(&disk, &disk, 3, &plan()).unwrap();
        assert!((r - 16.0 / (2.0 * std::f64::consts::PI.powi(2))).abs() < 1e-8);
    }
}
