//! Projective structure of sphere involutions: cross-ratios, harmonic
//! involution fits, jets at a fixed point and deviation exponents.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::convex_body::ConvexBody;
use crate::error::{Error, Result};
use crate::numeric::{
    fit_power_law, orthonormal_complement, projective_distance, Matrix, Vector,
};
use crate::reflection::{parallel_chord_involution, ParallelClass};
use crate::sampling::random_unit_vector;

fn det2(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Cross-ratio `(p1, p2; p3, p4)` of four collinear points of projective
/// space, given by representative vectors. In an affine chart this is
/// `(x1 - x3)(x2 - x4) / ((x1 - x4)(x2 - x3))`.
pub fn cross_ratio(points: &[Vector; 4]) -> Result<f64> {
    let n = points[0].len();
    if points.iter().any(|p| p.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: points.iter().map(|p| p.len()).find(|&l| l != n).unwrap_or(n),
        });
    }
    let unit: Vec<Vector> = points.iter().map(|p| p.normalize()).collect();
    // Orthonormal basis of the 2-plane spanned by the points.
    let e1 = unit[0].clone();
    let mut e2 = None;
    let mut best = 0.0;
    for p in &unit[1..] {
        let w = p - &e1 * p.dot(&e1);
        if w.norm() > best {
            best = w.norm();
            e2 = Some(w);
        }
    }
    if best < 1e-12 {
        return Err(Error::DegenerateData("coincident points".into()));
    }
    let e2 = e2.unwrap() / best;
    let coords: Vec<[f64; 2]> = unit.iter().map(|p| [p.dot(&e1), p.dot(&e2)]).collect();
    for (p, c) in unit.iter().zip(&coords) {
        let off = (p - &e1 * c[0] - &e2 * c[1]).norm();
        if off > 1e-9 {
            return Err(Error::DegenerateData("points are not collinear".into()));
        }
    }
    let d13 = det2(&coords[0], &coords[2]);
    let d24 = det2(&coords[1], &coords[3]);
    let d14 = det2(&coords[0], &coords[3]);
    let d23 = det2(&coords[1], &coords[2]);
    let tiny = 1e-14;
    if [d13, d24, d14, d23].iter().any(|d| d.abs() < tiny)
        || det2(&coords[0], &coords[1]).abs() < tiny
        || det2(&coords[2], &coords[3]).abs() < tiny
    {
        return Err(Error::DegenerateData("coincident points".into()));
    }
    Ok(d13 * d24 / (d14 * d23))
}

/// Cross-ratio of four points of the projective line in the chart `x`,
/// with `f64::INFINITY` standing for the point at infinity.
pub fn cross_ratio_scalar(x: [f64; 4]) -> Result<f64> {
    let lift = |t: f64| {
        if t.is_infinite() {
            Vector::from_vec(vec![1.0, 0.0])
        } else {
            Vector::from_vec(vec![t, 1.0])
        }
    };
    cross_ratio(&[lift(x[0]), lift(x[1]), lift(x[2]), lift(x[3])])
}

/// A projective transformation of `RP^{n-1}`, as a matrix up to scale.
#[derive(Clone, Debug)]
pub struct ProjectiveMap {
    matrix: Matrix,
    fixed_hyperplane: Option<Vector>,
    fixed_point: Option<Vector>,
}

impl ProjectiveMap {
    pub fn new(matrix: Matrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Domain("projective map needs a square matrix".into()));
        }
        if matrix.determinant().abs() < 1e-14 * matrix.norm().powi(matrix.nrows() as i32) {
            return Err(Error::DegenerateData("singular projective map".into()));
        }
        Ok(ProjectiveMap {
            matrix,
            fixed_hyperplane: None,
            fixed_point: None,
        })
    }

    /// Harmonic involution fixing `{⟨η, x⟩ = 0}` pointwise and the point
    /// `p` off it: `x ↦ x - 2 ⟨η, x⟩ / ⟨η, p⟩ p`.
    pub fn harmonic(eta: &Vector, p: &Vector) -> Result<Self> {
        let s = eta.dot(p);
        if s.abs() < 1e-14 * eta.norm() * p.norm() {
            return Err(Error::DegenerateData("fixed point lies on the fixed hyperplane".into()));
        }
        let n = eta.len();
        let matrix = Matrix::identity(n, n) - p * eta.transpose() * (2.0 / s);
        Ok(ProjectiveMap {
            matrix,
            fixed_hyperplane: Some(eta.normalize()),
            fixed_point: Some(p.normalize()),
        })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn fixed_hyperplane(&self) -> Option<&Vector> {
        self.fixed_hyperplane.as_ref()
    }

    pub fn fixed_point(&self) -> Option<&Vector> {
        self.fixed_point.as_ref()
    }

    /// Image as a unit representative.
    pub fn apply(&self, x: &Vector) -> Vector {
        (&self.matrix * x).normalize()
    }

    /// Relative distance of `M²` from a multiple of the identity.
    pub fn involution_defect(&self) -> f64 {
        let m2 = &self.matrix * &self.matrix;
        let n = m2.nrows();
        let c = m2.trace() / n as f64;
        (&m2 - Matrix::identity(n, n) * c).norm() / m2.norm()
    }
}

/// An involution of (a patch of) the unit sphere with a distinguished fixed
/// vector `n_O` and axis `d ⊥ n_O`; the 1D chart is `t = ⟨u, d⟩ / ⟨u, n_O⟩`.
pub struct SphereInvolutionSampler<'a> {
    map: Box<dyn Fn(&Vector) -> Result<Vector> + Send + Sync + 'a>,
    fixed: Vector,
    axis: Vector,
}

impl<'a> SphereInvolutionSampler<'a> {
    pub fn new<F>(map: F, fixed: &Vector, axis: &Vector) -> Result<Self>
    where
        F: Fn(&Vector) -> Result<Vector> + Send + Sync + 'a,
    {
        let fixed = fixed.normalize();
        let axis = axis.normalize();
        if fixed.dot(&axis).abs() > 1e-12 {
            return Err(Error::Precondition("chart axis must be orthogonal to the fixed vector".into()));
        }
        Ok(SphereInvolutionSampler {
            map: Box::new(map),
            fixed,
            axis,
        })
    }

    /// Parallel-chord involution of `t` for chords along `axis`, centered at
    /// the fixed normal `fixed ⊥ axis`.
    pub fn from_chords(t: &'a ConvexBody, axis: &Vector, fixed: &Vector) -> Result<Self> {
        let cls = ParallelClass::new(axis)?;
        SphereInvolutionSampler::new(
            move |u: &Vector| parallel_chord_involution(t, &cls, u),
            fixed,
            axis,
        )
    }

    pub fn dim(&self) -> usize {
        self.fixed.len()
    }

    pub fn fixed(&self) -> &Vector {
        &self.fixed
    }

    pub fn axis(&self) -> &Vector {
        &self.axis
    }

    pub fn apply(&self, u: &Vector) -> Result<Vector> {
        (self.map)(u)
    }

    pub fn chart(&self, u: &Vector) -> f64 {
        u.dot(&self.axis) / u.dot(&self.fixed)
    }

    pub fn from_chart(&self, t: f64) -> Vector {
        (&self.fixed + &self.axis * t).normalize()
    }

    /// The involution read in the 1D chart.
    pub fn chart_map(&self, t: f64) -> Result<f64> {
        Ok(self.chart(&self.apply(&self.from_chart(t))?))
    }
}

/// Sampling plan for projectivity tests on a patch of chart radius `scale`.
#[derive(Clone, Debug)]
pub struct SamplePlan {
    pub scale: f64,
    pub count: usize,
    pub seed: u64,
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan {
            scale: 0.3,
            count: 16,
            seed: 1,
        }
    }
}

/// Zero (to rounding) iff the involution is the lift of a projective map on
/// the sampled patch: cross-ratio defect in dimension two, harmonic-fit
/// residual otherwise.
pub fn projectivity_residual(f: &SphereInvolutionSampler, plan: &SamplePlan) -> Result<f64> {
    if !(plan.scale > 0.0) {
        return Err(Error::Plan("patch scale must be positive".into()));
    }
    if f.dim() == 2 {
        let ts: Vec<f64> = (0..plan.count)
            .map(|i| -plan.scale + 2.0 * plan.scale * i as f64 / (plan.count.max(2) - 1) as f64)
            .filter(|t| t.abs() >= 1e-3 * plan.scale)
            .collect();
        if ts.len() < 4 {
            return Err(Error::Plan("cross-ratio test needs at least four samples".into()));
        }
        let pts: Vec<Vector> = ts.iter().map(|&t| f.from_chart(t)).collect();
        let imgs: Vec<Vector> = pts
            .par_iter()
            .map(|u| f.apply(u))
            .collect::<Result<Vec<_>>>()?;
        let k = pts.len();
        let mut worst: f64 = 0.0;
        for a in 0..k {
            for b in a + 1..k {
                for c in b + 1..k {
                    for d in c + 1..k {
                        let before = cross_ratio(&[
                            pts[a].clone(),
                            pts[b].clone(),
                            pts[c].clone(),
                            pts[d].clone(),
                        ])?;
                        let after = cross_ratio(&[
                            imgs[a].clone(),
                            imgs[b].clone(),
                            imgs[c].clone(),
                            imgs[d].clone(),
                        ])?;
                        worst = worst.max((before - after).abs());
                    }
                }
            }
        }
        Ok(worst)
    } else {
        let pairs = sample_cap_pairs(f, plan)?;
        let (_, residual) = fit_projective_involution(&pairs, f.axis())?;
        Ok(residual)
    }
}

/// `(u, f(u))` pairs on a spherical cap about the fixed vector.
pub fn sample_cap_pairs(f: &SphereInvolutionSampler, plan: &SamplePlan) -> Result<Vec<(Vector, Vector)>> {
    let n = f.dim();
    if plan.count < n {
        return Err(Error::Plan(format!("need at least {n} samples")));
    }
    let tangent = orthonormal_complement(f.fixed());
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let mut pts = Vec::with_capacity(plan.count);
    while pts.len() < plan.count {
        let w = &tangent * random_unit_vector(&mut rng, n - 1);
        let r = plan.scale * (0.2 + 0.8 * rand::Rng::gen::<f64>(&mut rng));
        let u = (f.fixed() + w * r).normalize();
        if u.dot(f.axis()).abs() < 1e-2 * plan.scale {
            continue;
        }
        pts.push(u);
    }
    pts.into_par_iter()
        .map(|u| f.apply(&u).map(|v| (u, v)))
        .collect()
}

/// Least-squares fit of a harmonic involution `x ↦ x - 2⟨d, x⟩ P` fixing
/// the hyperplane `d^⊥` pointwise (with `⟨d, P⟩ = 1`). Returns the map and
/// the RMS projective distance between data and model images.
pub fn fit_projective_involution(pairs: &[(Vector, Vector)], d: &Vector) -> Result<(ProjectiveMap, f64)> {
    let n = d.len();
    if pairs.len() < n {
        return Err(Error::DegenerateData(format!(
            "need at least {n} pairs, got {}",
            pairs.len()
        )));
    }
    let d = d.normalize();
    let e = orthonormal_complement(&d);
    let mut a = Matrix::zeros(n * pairs.len(), n - 1);
    let mut b = Vector::zeros(n * pairs.len());
    for (k, (u, fu)) in pairs.iter().enumerate() {
        let fu = fu.normalize();
        let q = Matrix::identity(n, n) - &fu * fu.transpose();
        let delta = d.dot(u);
        let block_a = &q * &e * (2.0 * delta);
        let block_b = &q * (u - &d * (2.0 * delta));
        a.view_mut((k * n, 0), (n, n - 1)).copy_from(&block_a);
        b.rows_mut(k * n, n).copy_from(&block_b);
    }
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    if !(sv.min() > 1e-10 * smax.max(f64::MIN_POSITIVE)) {
        return Err(Error::DegenerateData("rank-deficient involution fit".into()));
    }
    let coef = svd
        .solve(&b, 1e-14)
        .map_err(|e| Error::DegenerateData(e.to_string()))?;
    let p = &d + &e * coef;
    let map = ProjectiveMap::harmonic(&d, &p)?;
    let ms: f64 = pairs
        .iter()
        .map(|(u, fu)| projective_distance(fu, &map.apply(u)).powi(2))
        .sum::<f64>()
        / pairs.len() as f64;
    Ok((map, ms.sqrt()))
}

/// Coefficients `(a1, a2)` of `f(t) = a1 t + a2 t² + O(t³)` for a map with
/// `f(0) = 0`, by central differences with two Richardson levels from step
/// `h`.
pub fn two_jet_at_fixed_point<F>(f: F, h: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let d = |s: f64| -> Result<(f64, f64)> {
        let (fp, fm) = (f(s)?, f(-s)?);
        Ok(((fp - fm) / (2.0 * s), (fp + fm) / (2.0 * s * s)))
    };
    let (d0, d1, d2) = (d(h)?, d(h / 2.0)?, d(h / 4.0)?);
    let rich = |x: f64, y: f64| (4.0 * y - x) / 3.0;
    let r1 = (rich(d0.0, d1.0), rich(d0.1, d1.1));
    let r2 = (rich(d1.0, d2.0), rich(d1.1, d2.1));
    let agree = |x: f64, y: f64| (x - y).abs() <= 1e-6 * x.abs().max(y.abs()).max(1.0);
    if !agree(r1.0, r2.0) || !agree(r1.1, r2.1) {
        return Err(Error::Precision(format!(
            "Richardson levels disagree: a1 {} vs {}, a2 {} vs {}",
            r1.0, r2.0, r1.1, r2.1
        )));
    }
    Ok(((16.0 * r2.0 - r1.0) / 15.0, (16.0 * r2.1 - r1.1) / 15.0))
}

/// Round-off floor below which differences are discarded.
pub const DEVIATION_FLOOR: f64 = 1e3 * f64::EPSILON;

/// Fits `|f(t) - g(t)| ≈ |C| t^k` over the grid; returns `(k, C)` with the
/// sign of `C` taken from the data.
pub fn deviation_exponent<F, G>(f: F, g: G, grid: &[f64]) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
    G: Fn(f64) -> Result<f64>,
{
    let mut samples = Vec::with_capacity(grid.len());
    for &t in grid {
        let diff = f(t)? - g(t)?;
        if diff.abs() >= DEVIATION_FLOOR {
            samples.push((t, diff));
        }
    }
    if samples.len() < 2 {
        return Err(Error::Indistinguishable);
    }
    fit_power_law(&samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::dyadic_grid;
    use rand::Rng;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn cross_ratio_examples() {
        assert!((cross_ratio_scalar([0.0, 1.0, 2.0, f64::INFINITY]).unwrap() - 2.0).abs() < 1e-15);
        assert!((cross_ratio_scalar([-1.0, 1.0, 0.0, f64::INFINITY]).unwrap() + 1.0).abs() < 1e-15);
        assert!(cross_ratio_scalar([0.0, 0.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn cross_ratio_is_projectively_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let m = Matrix::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0));
            let (a, b) = (random_unit_vector(&mut rng, 3), random_unit_vector(&mut rng, 3));
            let pts: Vec<Vector> = (0..4)
                .map(|_| &a * rng.gen_range(-1.0..1.0) + &b * rng.gen_range(-1.0..1.0))
                .collect();
            let Ok(before) = cross_ratio(&[pts[0].clone(), pts[1].clone(), pts[2].clone(), pts[3].clone()]) else {
                continue;
            };
            if before.abs() > 1e3 {
                continue;
            }
            let img: Vec<Vector> = pts.iter().map(|p| &m * p).collect();
            let after = cross_ratio(&[img[0].clone(), img[1].clone(), img[2].clone(), img[3].clone()]).unwrap();
            assert!((before - after).abs() < 1e-10 * before.abs().max(1.0));
        }
    }

    #[test]
    fn harmonic_fit_recovers_exact_data() {
        let d = v(&[0.0, 0.0, 1.0]);
        let p = v(&[0.3, -0.2, 1.0]);
        let map = ProjectiveMap::harmonic(&d, &p).unwrap();
        assert!(map.involution_defect() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pairs: Vec<(Vector, Vector)> = (0..20)
            .map(|_| {
                let u = random_unit_vector(&mut rng, 3);
                let fu = map.apply(&u);
                (u, fu)
            })
            .collect();
        let (fit, residual) = fit_projective_involution(&pairs, &d).unwrap();
        assert!(residual < 1e-10);
        assert!(projective_distance(fit.fixed_point().unwrap(), &p) < 1e-10);
    }

    #[test]
    fn ellipse_chord_map_is_the_predicted_harmonic_involution() {
        let a = Matrix::from_row_slice(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.0, -0.2, 0.1, -0.2, 0.5]);
        let body = ConvexBody::ellipsoid(a.clone()).unwrap();
        let d = v(&[0.2, 0.5, 1.0]).normalize();
        let fixed = orthonormal_complement(&d).column(0).into_owned();
        let sampler = SphereInvolutionSampler::from_chords(&body, &d, &fixed).unwrap();
        let ad = &a * &d;
        let predicted = ProjectiveMap::harmonic(&d, &(&ad / ad.dot(&d))).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let u = random_unit_vector(&mut rng, 3);
            if u.dot(&d).abs() < 0.05 {
                continue;
            }
            let fu = sampler.apply(&u).unwrap();
            assert!(projective_distance(&fu, &predicted.apply(&u)) < 1e-12);
        }
        let residual = projectivity_residual(&sampler, &SamplePlan::default()).unwrap();
        assert!(residual < 1e-9, "{residual}");
    }

    #[test]
    fn two_jet_examples() {
        let c = 0.7;
        let (a1, a2) = two_jet_at_fixed_point(|t| Ok(-t / (1.0 + c * t)), 1e-2).unwrap();
        assert!((a1 + 1.0).abs() < 1e-9 && (a2 - c).abs() < 1e-9);
        let (a1, a2) = two_jet_at_fixed_point(|t| Ok(-t), 1e-2).unwrap();
        assert!((a1 + 1.0).abs() < 1e-12 && a2.abs() < 1e-12);
        let circle = ConvexBody::ball(2, 1.0).unwrap();
        let s = SphereInvolutionSampler::from_chords(&circle, &v(&[1.0, 0.0]), &v(&[0.0, -1.0])).unwrap();
        let (a1, a2) = two_jet_at_fixed_point(|t| s.chart_map(t), 1e-2).unwrap();
        assert!((a1 + 1.0).abs() < 1e-6 && a2.abs() < 1e-6);
    }

    #[test]
    fn deviation_of_projective_involutions() {
        let grid = dyadic_grid(4, 12);
        let (k, c) = deviation_exponent(
            |t| Ok(-t / (1.0 + 0.5 * t)),
            |t| Ok(-t / (1.0 - 0.3 * t)),
            &grid,
        )
        .unwrap();
        assert!((k - 2.0).abs() < 0.1, "{k}");
        assert!((c - 0.8).abs() < 0.2);
        assert!(matches!(
            deviation_exponent(|t| Ok(-t), |t| Ok(-t), &grid),
            Err(Error::Indistinguishable)
        ));
    }
}
