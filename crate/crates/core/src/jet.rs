//! Truncated Taylor series ("jets") with arithmetic, used to obtain exact
//! high-order derivatives of closed-form curves and graph functions.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Highest retained Taylor order.
pub const ORDER: usize = 9;

/// Taylor coefficients `c[k] = f^(k)(t0) / k!` of a function around `t0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub c: [f64; ORDER + 1],
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; ORDER + 1];
        c[0] = v;
        Jet { c }
    }

    /// The independent variable `t` expanded at `t0`.
    pub fn variable(t0: f64) -> Self {
        let mut c = [0.0; ORDER + 1];
        c[0] = t0;
        c[1] = 1.0;
        Jet { c }
    }

    pub fn from_coeffs(coeffs: &[f64]) -> Self {
        let mut c = [0.0; ORDER + 1];
        for (dst, src) in c.iter_mut().zip(coeffs) {
            *dst = *src;
        }
        Jet { c }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// `k`-th derivative at the expansion point.
    pub fn derivative_at(&self, k: usize) -> f64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.c[k] * fact
    }

    /// Series of the derivative; the top coefficient is lost.
    pub fn differentiate(&self) -> Self {
        let mut c = [0.0; ORDER + 1];
        for k in 0..ORDER {
            c[k] = (k + 1) as f64 * self.c[k + 1];
        }
        Jet { c }
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut c = self.c;
        c.iter_mut().for_each(|x| *x *= s);
        Jet { c }
    }

    pub fn recip(&self) -> Self {
        Jet::constant(1.0) / *self
    }

    pub fn exp(&self) -> Self {
        let mut e = [0.0; ORDER + 1];
        e[0] = self.c[0].exp();
        for k in 1..=ORDER {
            let mut s = 0.0;
            for j in 1..=k {
                s += j as f64 * self.c[j] * e[k - j];
            }
            e[k] = s / k as f64;
        }
        Jet { c: e }
    }

    pub fn ln(&self) -> Self {
        let a0 = self.c[0];
        let mut l = [0.0; ORDER + 1];
        l[0] = a0.ln();
        for k in 1..=ORDER {
            let mut s = k as f64 * self.c[k];
            for j in 1..k {
                s -= j as f64 * l[j] * self.c[k - j];
            }
            l[k] = s / (k as f64 * a0);
        }
        Jet { c: l }
    }

    /// `self^p` for a positive leading coefficient.
    pub fn powf(&self, p: f64) -> Self {
        let a0 = self.c[0];
        let mut r = [0.0; ORDER + 1];
        r[0] = a0.powf(p);
        for k in 1..=ORDER {
            let mut s = 0.0;
            for j in 1..=k {
                s += (p * j as f64 - (k - j) as f64) * self.c[j] * r[k - j];
            }
            r[k] = s / (k as f64 * a0);
        }
        Jet { c: r }
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut r = Jet::constant(1.0);
        for _ in 0..n {
            r = r * *self;
        }
        r
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    pub fn sin_cos(&self) -> (Self, Self) {
        let mut s = [0.0; ORDER + 1];
        let mut co = [0.0; ORDER + 1];
        s[0] = self.c[0].sin();
        co[0] = self.c[0].cos();
        for k in 1..=ORDER {
            let mut ss = 0.0;
            let mut cc = 0.0;
            for j in 1..=k {
                ss += j as f64 * self.c[j] * co[k - j];
                cc -= j as f64 * self.c[j] * s[k - j];
            }
            s[k] = ss / k as f64;
            co[k] = cc / k as f64;
        }
        (Jet { c: s }, Jet { c: co })
    }

    pub fn sin(&self) -> Self {
        self.sin_cos().0
    }

    pub fn cos(&self) -> Self {
        self.sin_cos().1
    }

    /// Composition `self ∘ inner` where `self` is a series in a local
    /// variable and `inner` has zero constant term.
    pub fn compose(&self, inner: &Jet) -> Self {
        debug_assert!(inner.c[0] == 0.0);
        let mut r = Jet::constant(self.c[ORDER]);
        for k in (0..ORDER).rev() {
            r = r * *inner + Jet::constant(self.c[k]);
        }
        r
    }

    /// Same series with the constant term removed, i.e. as a function of
    /// the displacement from the expansion point.
    pub fn centered(&self) -> Self {
        let mut c = self.c;
        c[0] = 0.0;
        Jet { c }
    }

    /// Compositional inverse of a series with zero constant term and
    /// nonzero linear term.
    pub fn revert(&self) -> Self {
        let a1 = self.c[1];
        let x = Jet::variable(0.0);
        let mut tau = x.scale(1.0 / a1);
        let higher = {
            let mut c = self.c;
            c[0] = 0.0;
            c[1] = 0.0;
            Jet { c }
        };
        for _ in 0..=ORDER {
            tau = (x - higher.compose(&tau)).scale(1.0 / a1);
        }
        tau
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let mut c = self.c;
        for k in 0..=ORDER {
            c[k] += o.c[k];
        }
        Jet { c }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        let mut c = self.c;
        for k in 0..=ORDER {
            c[k] -= o.c[k];
        }
        Jet { c }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut c = [0.0; ORDER + 1];
        for i in 0..=ORDER {
            if self.c[i] == 0.0 {
                continue;
            }
            for j in 0..=(ORDER - i) {
                c[i + j] += self.c[i] * o.c[j];
            }
        }
        Jet { c }
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let b0 = o.c[0];
        let mut q = [0.0; ORDER + 1];
        for k in 0..=ORDER {
            let mut s = self.c[k];
            for j in 1..=k {
                s -= o.c[j] * q[k - j];
            }
            q[k] = s / b0;
        }
        Jet { c: q }
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, o: f64) -> Jet {
        let mut c = self.c;
        c[0] += o;
        Jet { c }
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, o: f64) -> Jet {
        self + (-o)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, o: f64) -> Jet {
        self.scale(o)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_ln_sin_match_closed_forms() {
        let t = Jet::variable(0.3);
        let e = t.exp();
        for k in 0..=ORDER {
            assert!((e.derivative_at(k) - 0.3f64.exp()).abs() < 1e-12);
        }
        let l = t.ln();
        // d^3/dt^3 ln t = 2/t^3
        assert!((l.derivative_at(3) - 2.0 / 0.027).abs() < 1e-9);
        let (s, c) = t.sin_cos();
        assert!((s.derivative_at(2) + 0.3f64.sin()).abs() < 1e-14);
        assert!((c.derivative_at(1) + 0.3f64.sin()).abs() < 1e-14);
    }

    #[test]
    fn powf_and_division() {
        let t = Jet::variable(2.0);
        let p = t.powf(1.5);
        // f'' = 0.75 t^-0.5
        assert!((p.derivative_at(2) - 0.75 / 2f64.sqrt()).abs() < 1e-13);
        let q = Jet::constant(1.0) / t;
        assert!((q.derivative_at(3) + 6.0 / 16.0).abs() < 1e-13);
    }

    #[test]
    fn reversion_inverts_series() {
        let x = Jet::variable(0.0);
        let s = x + x * x * 0.5 + x.powi(3) * (-0.2);
        let r = s.revert();
        let id = s.compose(&r);
        assert!((id.c[1] - 1.0).abs() < 1e-14);
        for k in 2..=ORDER {
            assert!(id.c[k].abs() < 1e-12, "order {k}: {}", id.c[k]);
        }
    }
}
