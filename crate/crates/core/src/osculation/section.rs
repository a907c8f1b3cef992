use crate::convex_body::ConvexBody;
use crate::error::{Error, Result};
use crate::numeric::{Matrix, Vector};

/// An affine 2-plane through `point` spanned by orthonormal `u`, `v`.
#[derive(Clone, Debug)]
pub struct SectionPlane {
    pub point: Vector,
    pub u: Vector,
    pub v: Vector,
}

impl SectionPlane {
    /// Orthonormalizes the spanning pair.
    pub fn new(point: Vector, u: &Vector, v: &Vector) -> Result<Self> {
        let u = u.normalize();
        let w = v - &u * u.dot(v);
        if !(w.norm() > 1e-10) {
            return Err(Error::DegenerateData("plane spanning vectors are parallel".into()));
        }
        Ok(SectionPlane {
            point,
            u,
            v: w.normalize(),
        })
    }
}

/// RMS Sampson distance of sampled section points from their best-fit
/// conic, relative to the section diameter.
pub fn planar_section_conic_residual(body: &ConvexBody, plane: &SectionPlane, samples: usize) -> Result<f64> {
    if samples < 6 {
        return Err(Error::Plan("conic fit needs at least six points".into()));
    }
    if !body.contains(&plane.point)? {
        return Err(Error::Precondition("plane base point must be interior".into()));
    }
    let pts: Vec<(f64, f64)> = (0..samples)
        .map(|i| {
            let t = 2.0 * std::f64::consts::PI * i as f64 / samples as f64;
            let dir = &plane.u * t.cos() + &plane.v * t.sin();
            let p = body.ray_exit(&plane.point, &dir)? - &plane.point;
            Ok((p.dot(&plane.u), p.dot(&plane.v)))
        })
        .collect::<Result<_>>()?;
    let k = pts.len() as f64;
    let (mx, my) = (
        pts.iter().map(|p| p.0).sum::<f64>() / k,
        pts.iter().map(|p| p.1).sum::<f64>() / k,
    );
    let scale = pts
        .iter()
        .map(|p| (p.0 - mx).hypot(p.1 - my))
        .fold(0.0, f64::max);
    let local: Vec<(f64, f64)> = pts.iter().map(|p| ((p.0 - mx) / scale, (p.1 - my) / scale)).collect();
    let design = Matrix::from_fn(local.len(), 6, |r, c| {
        let (x, y) = local[r];
        [x * x, x * y, y * y, x, y, 1.0][c]
    });
    let svd = design.svd(false, true);
    let vt = svd.v_t.ok_or_else(|| Error::DegenerateData("conic fit failed".into()))?;
    let imin = svd.singular_values.imin();
    let q: Vec<f64> = vt.row(imin).iter().copied().collect();
    let mut diameter: f64 = 0.0;
    for a in &pts {
        for b in &pts {
            diameter = diameter.max((a.0 - b.0).hypot(a.1 - b.1));
        }
    }
    let ms = local
        .iter()
        .map(|&(x, y)| {
            let val = q[0] * x * x + q[1] * x * y + q[2] * y * y + q[3] * x + q[4] * y + q[5];
            let gx = 2.0 * q[0] * x + q[1] * y + q[3];
            let gy = q[1] * x + 2.0 * q[2] * y + q[4];
            (val / gx.hypot(gy)).powi(2)
        })
        .sum::<f64>()
        / k;
    Ok(ms.sqrt() * scale / diameter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::random_unit_vector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quadric_sections_are_conics() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let body = ConvexBody::ellipsoid_axes(&[2.0, 1.0, 0.6]).unwrap();
        let sphere = ConvexBody::ball(3, 1.5).unwrap();
        for _ in 0..20 {
            let point = random_unit_vector(&mut rng, 3) * 0.3;
            let plane = SectionPlane::new(
                point,
                &random_unit_vector(&mut rng, 3),
                &random_unit_vector(&mut rng, 3),
            )
            .unwrap();
            assert!(planar_section_conic_residual(&body, &plane, 64).unwrap() < 1e-9);
            assert!(planar_section_conic_residual(&sphere, &plane, 64).unwrap() < 1e-12);
        }
        let plane = SectionPlane::new(
            Vector::zeros(3),
            &Vector::from_vec(vec![1.0, 0.0, 0.0]),
            &Vector::from_vec(vec![0.0, 1.0, 0.0]),
        )
        .unwrap();
        assert!(matches!(
            planar_section_conic_residual(&body, &plane, 5),
            Err(Error::Plan(_))
        ));
    }

    #[test]
    fn quartic_sections_are_not_conics() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let body = ConvexBody::superellipsoid(&[1.0, 1.0, 1.0], 4.0).unwrap();
        let mut least = f64::INFINITY;
        for _ in 0..50 {
            let point = random_unit_vector(&mut rng, 3) * 0.3;
            let plane = SectionPlane::new(
                point,
                &random_unit_vector(&mut rng, 3),
                &random_unit_vector(&mut rng, 3),
            )
            .unwrap();
            least = least.min(planar_section_conic_residual(&body, &plane, 64).unwrap());
        }
        assert!(least > 1e-4, "{least}");
    }
}
