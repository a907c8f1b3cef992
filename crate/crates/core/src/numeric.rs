//! Small numerical kernels shared by the geometric modules: bracketed
//! root finding, power-law fits, tangent frames.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

fn different_signs(x: f64, y: f64) -> bool {
    (x < 0.0) != (y < 0.0)
}

/// Safeguarded Newton iteration on a sign-changing bracket `[lo, hi]`.
///
/// Falls back to bisection whenever the Newton step leaves the bracket and
/// runs until the bracket collapses to adjacent floats, so the result is
/// accurate to machine precision for well-conditioned roots.
pub fn find_root<F, DF>(f: F, df: DF, mut lo: f64, mut hi: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    DF: Fn(f64) -> f64,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !f_lo.is_finite() || !f_hi.is_finite() || !different_signs(f_lo, f_hi) {
        return Err(Error::Convergence {
            iterations: 0,
            residual: f_lo.abs().min(f_hi.abs()),
        });
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..400 {
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if different_signs(f_lo, fx) {
            hi = x;
        } else {
            lo = x;
            f_lo = fx;
        }
        let d = df(x);
        let mut next = x - fx / d;
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        if next == x || next == lo || next == hi {
            return Ok(x);
        }
        // Newton steps that stall in place still shrink the bracket through
        // the sign test above, so the loop terminates on adjacent floats.
        if (hi - lo) <= 2.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// Orthonormal basis (as columns) of the orthogonal complement of `u`.
pub fn orthonormal_complement(u: &Vector) -> Matrix {
    let n = u.len();
    let un = u.normalize();
    if n == 2 {
        return Matrix::from_column_slice(2, 1, &[-un[1], un[0]]);
    }
    let mut basis: Vec<Vector> = Vec::with_capacity(n - 1);
    // Gram-Schmidt over the coordinate axes, least aligned with u first.
    let mut axes: Vec<usize> = (0..n).collect();
    axes.sort_by(|&a, &b| un[a].abs().partial_cmp(&un[b].abs()).unwrap());
    for &k in &axes {
        if basis.len() == n - 1 {
            break;
        }
        let mut e = Vector::zeros(n);
        e[k] = 1.0;
        e -= &un * un[k];
        for b in &basis {
            let c = b.dot(&e);
            e -= b * c;
        }
        let norm = e.norm();
        if norm > 1e-8 {
            basis.push(e / norm);
        }
    }
    Matrix::from_columns(&basis)
}

/// Angle between two points of projective space given by representative
/// vectors, after sign alignment.
pub fn projective_distance(a: &Vector, b: &Vector) -> f64 {
    let a = a.normalize();
    let b = b.normalize();
    let b = if a.dot(&b) < 0.0 { -b } else { b };
    // atan2 of the sine and cosine keeps accuracy near zero.
    let sin = (&a - &b).norm() * (&a + &b).norm() / 2.0;
    let cos = a.dot(&b);
    sin.atan2(cos)
}

/// Least-squares fit of `|y| = |C| * x^k`; returns `(k, C)` with the sign of
/// `C` taken from the majority sign of the samples.
pub fn fit_power_law(samples: &[(f64, f64)]) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y != 0.0 && y.is_finite())
        .map(|&(x, y)| (x.ln(), y.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::Plan("power-law fit needs at least two samples".into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::Plan("power-law fit needs distinct abscissae".into()));
    }
    let k = sxy / sxx;
    let log_c = my - k * mx;
    let positives = samples.iter().filter(|(_, y)| *y > 0.0).count();
    let sign = if 2 * positives >= samples.len() { 1.0 } else { -1.0 };
    Ok((k, sign * log_c.exp()))
}

/// Dyadic grid `2^-j` for `j` in `first..=last`, decreasing.
pub fn dyadic_grid(first: i32, last: i32) -> Vec<f64> {
    (first..=last).map(|j| 2f64.powi(-j)).collect()
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Symmetric eigen-decomposition returning eigenvalues in ascending order
/// together with matching eigenvectors as columns.
pub fn sorted_symmetric_eigen(m: &Matrix) -> (Vector, Matrix) {
    let eig = m.clone().symmetric_eigen();
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let vals = Vector::from_iterator(idx.len(), idx.iter().map(|&i| eig.eigenvalues[i]));
    let vecs = Matrix::from_columns(
        &idx.iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    (vals, vecs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root_of_cubic_to_machine_precision() {
        let r = find_root(|x| x * x * x - 2.0, |x| 3.0 * x * x, 0.0, 2.0).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 4.0 * f64::EPSILON);
    }

    #[test]
    fn root_requires_bracket() {
        assert!(find_root(|x| x * x + 1.0, |x| 2.0 * x, -1.0, 1.0).is_err());
    }

    #[test]
    fn complement_is_orthonormal() {
        let u = Vector::from_vec(vec![0.3, -0.4, 0.5, 0.1]);
        let e = orthonormal_complement(&u);
        assert_eq!(e.ncols(), 3);
        let g = e.transpose() * &e;
        assert!((g - Matrix::identity(3, 3)).norm() < 1e-12);
        assert!((e.transpose() * u).norm() < 1e-12);
    }

    #[test]
    fn power_law_recovers_exponent_and_sign() {
        let s: Vec<(f64, f64)> = dyadic_grid(2, 10)
            .into_iter()
            .map(|t| (t, -0.7 * t.powi(3)))
            .collect();
        let (k, c) = fit_power_law(&s).unwrap();
        assert!((k - 3.0).abs() < 1e-12);
        assert!((c + 0.7).abs() < 1e-12);
    }

    #[test]
    fn projective_distance_ignores_sign() {
        let a = Vector::from_vec(vec![1.0, 0.0]);
        let b = Vector::from_vec(vec![-1.0, 1e-9]);
        assert!(projective_distance(&a, &b) < 2e-9);
    }
}
