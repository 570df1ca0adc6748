//! Truncated univariate Taylor series to order 6, used to read off the
//! low-order coefficients of the phi families exactly at s = 0.

pub const ORDER: usize = 6;

/// Coefficients `c[k]` of `sum c[k] s^k`, truncated past `s^6`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Series(pub [f64; ORDER + 1]);

impl Series {
    pub fn zero() -> Self {
        Series([0.0; ORDER + 1])
    }

    pub fn constant(v: f64) -> Self {
        let mut s = Self::zero();
        s.0[0] = v;
        s
    }

    /// The identity series `s`.
    pub fn var() -> Self {
        let mut s = Self::zero();
        s.0[1] = 1.0;
        s
    }

    pub fn add(&self, o: &Series) -> Series {
        let mut r = *self;
        for k in 0..=ORDER {
            r.0[k] += o.0[k];
        }
        r
    }

    pub fn scale(&self, f: f64) -> Series {
        let mut r = *self;
        for k in 0..=ORDER {
            r.0[k] *= f;
        }
        r
    }

    pub fn mul(&self, o: &Series) -> Series {
        let mut r = Series::zero();
        for i in 0..=ORDER {
            for j in 0..=(ORDER - i) {
                r.0[i + j] += self.0[i] * o.0[j];
            }
        }
        r
    }

    /// `self^alpha` for series with nonzero constant term (J.C.P. Miller
    /// recurrence).
    pub fn powf(&self, alpha: f64) -> Series {
        let a0 = self.0[0];
        assert!(a0 != 0.0, "powf of series with zero constant term");
        let mut b = Series::zero();
        b.0[0] = a0.powf(alpha);
        for n in 1..=ORDER {
            let mut acc = 0.0;
            for k in 1..=n {
                acc += (alpha * k as f64 - (n - k) as f64) * self.0[k] * b.0[n - k];
            }
            b.0[n] = acc / (n as f64 * a0);
        }
        b
    }

    pub fn recip(&self) -> Series {
        self.powf(-1.0)
    }

    pub fn sqrt(&self) -> Series {
        self.powf(0.5)
    }

    /// Coefficient `a_k = phi^(k)(0)/k!`.
    pub fn coeff(&self, k: usize) -> f64 {
        self.0[k]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_of_one_plus_ks2() {
        // sqrt(1 + k s^2) = 1 + k/2 s^2 - k^2/8 s^4 + k^3/16 s^6
        let k = 0.7;
        let mut base = Series::constant(1.0);
        base.0[2] = k;
        let s = base.sqrt();
        assert!((s.0[0] - 1.0).abs() < 1e-15);
        assert!((s.0[2] - k / 2.0).abs() < 1e-14);
        assert!((s.0[4] + k * k / 8.0).abs() < 1e-14);
        assert!((s.0[6] - k * k * k / 16.0).abs() < 1e-14);
    }

    #[test]
    fn recip_times_self_is_one() {
        let mut a = Series::constant(2.0);
        a.0[1] = -0.3;
        a.0[3] = 0.5;
        let p = a.mul(&a.recip());
        assert!((p.0[0] - 1.0).abs() < 1e-14);
        for k in 1..=ORDER {
            assert!(p.0[k].abs() < 1e-14);
        }
    }
}
