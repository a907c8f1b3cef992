use std::f64::consts::PI;

use super::{ConvexBody, Shape};
use crate::error::{Error, Result};
use crate::numeric::Vector;

/// Volume of the Euclidean unit ball in `ℝⁿ`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / n as f64 * unit_ball_volume(n - 2),
    }
}

/// Nodes and weights of `m`-point Gauss-Legendre quadrature on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn shoelace(vertices: &[Vector]) -> f64 {
    let k = vertices.len();
    0.5 * (0..k)
        .map(|i| {
            let (p, q) = (&vertices[i], &vertices[(i + 1) % k]);
            p[0] * q[1] - p[1] * q[0]
        })
        .sum::<f64>()
        .abs()
}

fn planar_area(body: &ConvexBody, samples: usize) -> Result<f64> {
    let o = body.interior_point();
    let mut acc = 0.0;
    for i in 0..samples {
        let t = 2.0 * PI * i as f64 / samples as f64;
        let r = (body.radial_boundary_point(&Vector::from_vec(vec![t.cos(), t.sin()]))? - &o).norm();
        acc += r * r;
    }
    Ok(0.5 * acc * 2.0 * PI / samples as f64)
}

fn spatial_volume(body: &ConvexBody, rings: usize) -> Result<f64> {
    let o = body.interior_point();
    let (nodes, weights) = gauss_legendre(rings);
    let sectors = 2 * rings;
    let mut acc = 0.0;
    for (z, w) in nodes.iter().zip(&weights) {
        let s = (1.0 - z * z).sqrt();
        for j in 0..sectors {
            let t = 2.0 * PI * j as f64 / sectors as f64;
            let dir = Vector::from_vec(vec![s * t.cos(), s * t.sin(), *z]);
            let r = (body.radial_boundary_point(&dir)? - &o).norm();
            acc += w * r.powi(3);
        }
    }
    Ok(acc * 2.0 * PI / sectors as f64 / 3.0)
}

pub(super) fn volume(body: &ConvexBody) -> Result<(f64, f64)> {
    match &body.shape {
        Shape::Germ(_) => Err(Error::Domain("volume of an unbounded germ".into())),
        Shape::Ellipsoid { a, .. } => {
            Ok((unit_ball_volume(body.dim()) / a.determinant().sqrt(), 0.0))
        }
        Shape::Polygon { vertices } => Ok((shoelace(vertices), 0.0)),
        Shape::Linear { inner, map, .. } => {
            let det = map.determinant().abs();
            let (v, e) = inner.volume()?;
            Ok((det * v, det * e))
        }
        _ => match body.dim() {
            2 => {
                let fine = planar_area(body, 2048)?;
                let coarse = planar_area(body, 1024)?;
                Ok((fine, (fine - coarse).abs()))
            }
            3 => {
                let fine = spatial_volume(body, 96)?;
                let coarse = spatial_volume(body, 48)?;
                Ok((fine, (fine - coarse).abs()))
            }
            n => Err(Error::Domain(format!(
                "quadrature volume is implemented for n = 2, 3 (got {n})"
            ))),
        },
    }
}
