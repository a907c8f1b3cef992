//! Deterministic direction samples and seeded random helpers.

use rand::Rng;

use crate::numeric::Vector;

/// Uniformly distributed unit vector (rejection from the cube).
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vector {
    loop {
        let v = Vector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let r = v.norm();
        if r > 1e-3 && r <= 1.0 {
            return v / r;
        }
    }
}

/// Deterministic, roughly uniform set of about `count` unit vectors.
pub fn sphere_grid(n: usize, count: usize) -> Vec<Vector> {
    match n {
        2 => (0..count)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
                Vector::from_vec(vec![t.cos(), t.sin()])
            })
            .collect(),
        3 => {
            // Fibonacci lattice.
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - (2 * k + 1) as f64 / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let t = golden * k as f64;
                    Vector::from_vec(vec![r * t.cos(), r * t.sin(), z])
                })
                .collect()
        }
        _ => {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(n as u64);
            (0..count).map(|_| random_unit_vector(&mut rng, n)).collect()
        }
    }
}
