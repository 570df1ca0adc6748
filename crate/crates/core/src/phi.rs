//! The phi(s) families: closed forms, the quartic ODE family, the
//! singular quadrature families, the Taylor-coefficient map and the
//! regularity scan.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jet::{Jet, Real};
use crate::quad::simpson;
use crate::taylor::{Series, ORDER};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn val(&self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Every phi family appearing in the classification statements.
#[derive(Clone, Debug)]
pub enum PhiFamily {
    /// phi = eps*s + sqrt(1 + k s^2)
    RandersType { eps: f64, k: f64 },
    /// phi solving the quartic-coefficient ODE with phi(0)=1, phi'(0)=eps
    QuarticOde(Arc<OdePhi>),
    /// phi = sqrt(1 - k s^2) + c s^2 / sqrt(1 - k s^2)
    SquareRoot { k: f64, c: f64 },
    /// phi = 1 +/- s^2
    Quadratic { sign: Sign },
    /// phi = sqrt(b^2-s^2)/b + sqrt(b^2-s^2) * int_0^s c (t^2/(1-k t^2))^m / (b^2-t^2)^{3/2} dt
    IntegerPower { b: f64, c: f64, k: f64, m: u32 },
    /// Same with exponent m - 1/2.
    HalfPower { b: f64, c: f64, k: f64, m: u32 },
    /// phi = (b + ct*s^2)/sqrt(b^2 - s^2)
    SingularB { b: f64, ctilde: f64 },
}

/// Dense solution of the quartic-coefficient linear ODE
/// `(1 + (k1+k3) s^2 + k2 s^4) phi'' = (k1 + k2 s^2)(phi - s phi')`.
#[derive(Debug)]
pub struct OdePhi {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub eps: f64,
    pub s_max: f64,
    h: f64,
    /// (phi, phi') at nodes -s_max ..= s_max, spacing `h`.
    nodes: Vec<(f64, f64)>,
    /// Max plug-back residual observed at the verification checkpoints.
    pub residual: f64,
}

fn quartic_coeff(k1: f64, k2: f64, k3: f64, s: f64) -> f64 {
    1.0 + (k1 + k3) * s * s + k2 * s.powi(4)
}

/// Residual of the quartic ODE at one sample.
pub fn phi_ode_residual(k1: f64, k2: f64, k3: f64, s: f64, phi: f64, dphi: f64, ddphi: f64) -> f64 {
    quartic_coeff(k1, k2, k3, s) * ddphi - (k1 + k2 * s * s) * (phi - s * dphi)
}

const ODE_STEPS: usize = 2048;

/// Integrate the quartic ODE on `[-s_max, s_max]` with a classical
/// fixed-step fourth-order scheme, `phi(0) = 1`, `phi'(0) = eps`.
pub fn solve_phi_ode(k1: f64, k2: f64, k3: f64, eps: f64, s_max: f64, tol: f64) -> Result<OdePhi> {
    if s_max <= 0.0 {
        return Err(Error::RangeViolation("s_max must be positive".into()));
    }
    let h = s_max / ODE_STEPS as f64;
    // the coefficient must stay away from zero on the whole interval
    let mut min_coeff = f64::INFINITY;
    for i in 0..=4 * ODE_STEPS {
        let s = -s_max + i as f64 * h / 2.0;
        min_coeff = min_coeff.min(quartic_coeff(k1, k2, k3, s).abs());
    }
    if min_coeff < 1e-8 {
        return Err(Error::SingularODE);
    }
    let rhs = |s: f64, y: (f64, f64)| -> (f64, f64) {
        (
            y.1,
            (k1 + k2 * s * s) * (y.0 - s * y.1) / quartic_coeff(k1, k2, k3, s),
        )
    };
    let step = |s: f64, y: (f64, f64), h: f64| -> (f64, f64) {
        let k1v = rhs(s, y);
        let k2v = rhs(s + h / 2.0, (y.0 + h / 2.0 * k1v.0, y.1 + h / 2.0 * k1v.1));
        let k3v = rhs(s + h / 2.0, (y.0 + h / 2.0 * k2v.0, y.1 + h / 2.0 * k2v.1));
        let k4v = rhs(s + h, (y.0 + h * k3v.0, y.1 + h * k3v.1));
        (
            y.0 + h / 6.0 * (k1v.0 + 2.0 * k2v.0 + 2.0 * k3v.0 + k4v.0),
            y.1 + h / 6.0 * (k1v.1 + 2.0 * k2v.1 + 2.0 * k3v.1 + k4v.1),
        )
    };
    let mut nodes = vec![(0.0, 0.0); 2 * ODE_STEPS + 1];
    nodes[ODE_STEPS] = (1.0, eps);
    let mut y = (1.0, eps);
    for i in 0..ODE_STEPS {
        y = step(i as f64 * h, y, h);
        nodes[ODE_STEPS + 1 + i] = y;
    }
    y = (1.0, eps);
    for i in 0..ODE_STEPS {
        y = step(-(i as f64) * h, y, -h);
        nodes[ODE_STEPS - 1 - i] = y;
    }
    let sol = OdePhi {
        k1,
        k2,
        k3,
        eps,
        s_max,
        h,
        nodes,
        residual: 0.0,
    };
    // plug-back verification at 50 checkpoints
    let mut residual = 0.0f64;
    for i in 0..50 {
        let s = -s_max + (2.0 * s_max) * (i as f64 + 0.5) / 50.0;
        let (p, dp, ddp) = sol.eval(s)?;
        residual = residual.max(phi_ode_residual(k1, k2, k3, s, p, dp, ddp).abs());
    }
    if residual > tol {
        return Err(Error::SingularODE);
    }
    Ok(OdePhi { residual, ..sol })
}

impl OdePhi {
    /// Cubic-Hermite dense output; phi'' is read off the ODE itself.
    pub fn eval(&self, s: f64) -> Result<(f64, f64, f64)> {
        if s.abs() > self.s_max {
            return Err(Error::DomainExit(format!("|s| = {} > s_max", s.abs())));
        }
        let t = (s + self.s_max) / self.h;
        let i = (t.floor() as usize).min(self.nodes.len() - 2);
        let u = t - i as f64;
        let (p0, d0) = self.nodes[i];
        let (p1, d1) = self.nodes[i + 1];
        let h = self.h;
        let (u2, u3) = (u * u, u * u * u);
        let phi = (2.0 * u3 - 3.0 * u2 + 1.0) * p0
            + (u3 - 2.0 * u2 + u) * h * d0
            + (-2.0 * u3 + 3.0 * u2) * p1
            + (u3 - u2) * h * d1;
        let dphi = ((6.0 * u2 - 6.0 * u) * p0
            + (3.0 * u2 - 4.0 * u + 1.0) * h * d0
            + (-6.0 * u2 + 6.0 * u) * p1
            + (3.0 * u2 - 2.0 * u) * h * d1)
            / h;
        let ddphi =
            (self.k1 + self.k2 * s * s) * (phi - s * dphi) / quartic_coeff(self.k1, self.k2, self.k3, s);
        Ok((phi, dphi, ddphi))
    }
}

/// Integrand of the singular families, with its derivative:
/// `g(t) = c (t^2/(1-k t^2))^pw / (b^2-t^2)^{3/2}`.
fn singular_integrand_jet(b: f64, cc: f64, k: f64, pw: f64, s: f64) -> (f64, f64) {
    if s == 0.0 {
        // the one family with a first-power kernel has a genuine kink here;
        // we return the right-hand limit
        let d = if (2.0 * pw - 1.0).abs() < 1e-12 {
            cc / b.powi(3)
        } else {
            0.0
        };
        return (0.0, d);
    }
    let t = Jet::<1>::var(s, 0);
    let one = Jet::<1>::constant(1.0);
    let b2 = Jet::<1>::constant(b * b);
    let w = t * t / (one - Jet::constant(k) * t * t);
    let wp = if pw == pw.round() {
        w.powi(pw as i32)
    } else {
        w.powf(pw)
    };
    let g = Jet::constant(cc) * (b2 - t * t).powf(-1.5) * wp;
    (g.v, g.g[0])
}

/// `int_0^s c/(b^2-t^2)^{3/2} (t^2/(1-k t^2))^pw dt`, computed after the
/// substitution `t = b sin(theta)` which removes the endpoint singularity.
pub fn singular_kernel_quadrature(b: f64, c: f64, k: f64, pw: f64, s: f64) -> Result<f64> {
    if s.abs() >= b {
        return Err(Error::DomainExit(format!("|s| = {} >= b = {b}", s.abs())));
    }
    if (1.0 - k * s * s) <= 1e-9 {
        return Err(Error::DomainExit("1 - k s^2 vanishes on [0, s]".into()));
    }
    let theta_max = (s / b).asin();
    let f = |theta: f64| {
        let (sn, cs) = theta.sin_cos();
        let s2 = b * b * sn * sn;
        (c / (b * b * cs * cs)) * (s2 / (1.0 - k * s2)).powf(pw)
    };
    Ok(simpson(&f, 0.0, theta_max, 1e-13))
}

impl PhiFamily {
    pub fn quartic_ode(k1: f64, k2: f64, k3: f64, eps: f64, s_max: f64) -> Result<Self> {
        Ok(PhiFamily::QuarticOde(Arc::new(solve_phi_ode(
            k1, k2, k3, eps, s_max, 1e-8,
        )?)))
    }

    /// Largest |s| the family accepts (open bound).
    pub fn s_bound(&self) -> f64 {
        match self {
            PhiFamily::RandersType { k, .. } => {
                if *k < 0.0 {
                    (-1.0 / k).sqrt()
                } else {
                    f64::INFINITY
                }
            }
            PhiFamily::QuarticOde(sol) => sol.s_max,
            PhiFamily::SquareRoot { k, .. } => {
                if *k > 0.0 {
                    (1.0 / k).sqrt()
                } else {
                    f64::INFINITY
                }
            }
            PhiFamily::Quadratic { .. } => f64::INFINITY,
            PhiFamily::IntegerPower { b, k, .. } | PhiFamily::HalfPower { b, k, .. } => {
                if *k > 0.0 {
                    b.min((1.0 / k).sqrt())
                } else {
                    *b
                }
            }
            PhiFamily::SingularB { b, .. } => *b,
        }
    }

    /// (phi, phi', phi'') at `s`.
    pub fn phi_jet(&self, s: f64) -> Result<(f64, f64, f64)> {
        let bound = self.s_bound();
        if s.abs() >= bound * (1.0 - 1e-9) {
            return Err(Error::DomainExit(format!(
                "|s| = {} outside regular interval (bound {bound})",
                s.abs()
            )));
        }
        let j = Jet::<1>::var(s, 0);
        let one = Jet::<1>::constant(1.0);
        let out = match self {
            PhiFamily::RandersType { eps, k } => {
                Jet::constant(*eps) * j + (one + Jet::constant(*k) * j * j).sqrt()
            }
            PhiFamily::SquareRoot { k, c } => {
                let r = (one - Jet::constant(*k) * j * j).sqrt();
                r + Jet::constant(*c) * j * j / r
            }
            PhiFamily::Quadratic { sign } => one + Jet::constant(sign.val()) * j * j,
            PhiFamily::SingularB { b, ctilde } => {
                (Jet::constant(*b) + Jet::constant(*ctilde) * j * j)
                    * (Jet::constant(b * b) - j * j).powf(-0.5)
            }
            PhiFamily::QuarticOde(sol) => {
                return sol.eval(s);
            }
            PhiFamily::IntegerPower { b, c, k, m } => {
                return singular_phi_jet(*b, *c, *k, *m as f64, s);
            }
            PhiFamily::HalfPower { b, c, k, m } => {
                return singular_phi_jet(*b, *c, *k, *m as f64 - 0.5, s);
            }
        };
        if !out.is_finite() {
            return Err(Error::NumericalBlowup);
        }
        Ok((out.v, out.g[0], out.h[0][0]))
    }

    /// Lift phi through an arbitrary second-order jet of s.
    pub fn lift<R: Real>(&self, s: R) -> Result<R> {
        let (f0, f1, f2) = self.phi_jet(s.value())?;
        Ok(s.compose(f0, f1, f2))
    }

    /// Taylor coefficients a_0..a_6 of phi at s = 0 (right-sided where
    /// the family is only one-sidedly smooth).
    pub fn taylor_series(&self) -> Series {
        match self {
            PhiFamily::RandersType { eps, k } => {
                let mut base = Series::constant(1.0);
                base.0[2] = *k;
                let mut out = base.sqrt();
                out.0[1] += eps;
                out
            }
            PhiFamily::SquareRoot { k, c } => {
                let mut base = Series::constant(1.0);
                base.0[2] = -k;
                let mut cs2 = Series::zero();
                cs2.0[2] = *c;
                base.sqrt().add(&cs2.mul(&base.powf(-0.5)))
            }
            PhiFamily::Quadratic { sign } => {
                let mut out = Series::constant(1.0);
                out.0[2] = sign.val();
                out
            }
            PhiFamily::SingularB { b, ctilde } => {
                let mut num = Series::constant(*b);
                num.0[2] = *ctilde;
                let mut den = Series::constant(b * b);
                den.0[2] = -1.0;
                num.mul(&den.powf(-0.5))
            }
            PhiFamily::QuarticOde(sol) => {
                // coefficient recurrence obtained by expanding the ODE
                let (k1, k2, k3) = (sol.k1, sol.k2, sol.k3);
                let mut a = [0.0f64; ORDER + 3];
                a[0] = 1.0;
                a[1] = sol.eps;
                for n in 0..=ORDER - 2 {
                    let nf = n as f64;
                    let prev2 = if n >= 2 { a[n - 2] } else { 0.0 };
                    let num = k1 * (1.0 - nf) * a[n] + k2 * (3.0 - nf) * prev2
                        - (k1 + k3) * nf * (nf - 1.0) * a[n]
                        - k2 * (nf - 2.0) * (nf - 3.0) * prev2;
                    a[n + 2] = num / ((nf + 2.0) * (nf + 1.0));
                }
                let mut out = Series::zero();
                out.0.copy_from_slice(&a[..=ORDER]);
                out
            }
            PhiFamily::IntegerPower { b, c, k, m } => {
                singular_taylor(*b, *c, *k, *m as f64)
            }
            PhiFamily::HalfPower { b, c, k, m } => {
                singular_taylor(*b, *c, *k, *m as f64 - 0.5)
            }
        }
    }
}

fn singular_phi_jet(b: f64, c: f64, k: f64, pw: f64, s: f64) -> Result<(f64, f64, f64)> {
    let i = singular_kernel_quadrature(b, c, k, pw, s)?;
    let (g, gp) = singular_integrand_jet(b, c, k, pw, s);
    let a = (b * b - s * s).sqrt();
    let ap = -s / a;
    let app = -b * b / a.powi(3);
    let base = 1.0 / b + i;
    let phi = a * base;
    let dphi = ap * base + a * g;
    let ddphi = app * base + 2.0 * ap * g + a * gp;
    if !(phi.is_finite() && dphi.is_finite() && ddphi.is_finite()) {
        return Err(Error::NumericalBlowup);
    }
    Ok((phi, dphi, ddphi))
}

fn singular_taylor(b: f64, c: f64, k: f64, pw: f64) -> Series {
    // integrand = c * t^(2*pw) * (b^2 - t^2)^{-3/2} (1 - k t^2)^{-pw};
    // the even factor expanded to order 6, the monomial kept symbolic
    let mut be = Series::constant(b * b);
    be.0[2] = -1.0;
    let mut ke = Series::constant(1.0);
    ke.0[2] = -k;
    let even = be.powf(-1.5).mul(&ke.powf(-pw)).scale(c);
    let q = 2.0 * pw; // exponent of the monomial, integer-valued
    let qi = q.round() as usize;
    // integrate termwise: t^(q+2j) -> s^(q+2j+1)/(q+2j+1)
    let mut integral = Series::zero();
    for j in 0..=ORDER / 2 {
        let e = qi + 2 * j + 1;
        if e <= ORDER {
            integral.0[e] = even.0[2 * j] / e as f64;
        }
    }
    let a_series = be.sqrt();
    a_series.scale(1.0 / b).add(&a_series.mul(&integral))
}

/// First three constants of the quartic ODE recovered from the Taylor
/// coefficients; errors out on the Randers-type degeneracy.
pub fn taylor_to_k(family: &PhiFamily) -> Result<(f64, f64, f64)> {
    let t = family.taylor_series();
    let (a2, a4, a6) = (t.coeff(2), t.coeff(4), t.coeff(6));
    let den = 2.0 * a4 + a2 * a2;
    if den.abs() <= 1e-12 * (1.0 + a2 * a2) {
        return Err(Error::RandersTypeDegenerate);
    }
    let k1 = 2.0 * a2;
    let k2 = 2.0 * (a4 * a2 * a2 - 5.0 * a2 * a6 + 12.0 * a4 * a4) / den;
    let k3 = -(11.0 * a2 * a4 + 5.0 * a6 + 3.0 * a2 * a2 * a2) / den;
    Ok((k1, k2, k3))
}

/// Minimum of `phi - s phi' + (rho^2 - s^2) phi''` over `|s| <= rho`:
/// positive iff the metric is regular up to 1-form norm `rho`.
pub fn regularity_margin(family: &PhiFamily, rho: f64) -> Result<f64> {
    if rho >= family.s_bound() {
        return Err(Error::DomainExit(format!(
            "rho = {rho} >= family bound {}",
            family.s_bound()
        )));
    }
    let n = 4096usize;
    let mut min = f64::INFINITY;
    for i in 0..=n {
        let s = -rho + 2.0 * rho * i as f64 / n as f64;
        let (p, dp, ddp) = family.phi_jet(s)?;
        min = min.min(p - s * dp + (rho * rho - s * s) * ddp);
    }
    Ok(min)
}

/// Bisect for the radius where the regularity margin crosses zero.
pub fn regularity_zero_crossing(family: &PhiFamily, rho_lo: f64, rho_hi: f64) -> Result<f64> {
    let mut lo = rho_lo;
    let mut hi = rho_hi;
    let m_lo = regularity_margin(family, lo)?;
    let m_hi = regularity_margin(family, hi)?;
    if m_lo.signum() == m_hi.signum() {
        return Err(Error::PrerequisiteFailed(
            "regularity margin does not change sign on the bracket".into(),
        ));
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let m = regularity_margin(family, mid)?;
        if m.signum() == m_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_phi(family: &PhiFamily, s: f64, h: f64) -> (f64, f64) {
        let p = |s: f64| family.phi_jet(s).unwrap().0;
        (
            (p(s + h) - p(s - h)) / (2.0 * h),
            (p(s + h) - 2.0 * p(s) + p(s - h)) / (h * h),
        )
    }

    #[test]
    fn square_root_family_at_zero() {
        let fam = PhiFamily::SquareRoot { k: 0.4, c: 0.9 };
        let (p, dp, ddp) = fam.phi_jet(0.0).unwrap();
        assert!((p - 1.0).abs() < 1e-15);
        assert!(dp.abs() < 1e-15);
        assert!((ddp - (2.0 * 0.9 - 0.4)).abs() < 1e-12);
    }

    #[test]
    fn quadratic_family_values() {
        let fam = PhiFamily::Quadratic { sign: Sign::Plus };
        let (p, dp, ddp) = fam.phi_jet(0.5).unwrap();
        assert!((p - 1.25).abs() < 1e-15);
        assert!((dp - 1.0).abs() < 1e-15);
        assert!((ddp - 2.0).abs() < 1e-15);
    }

    #[test]
    fn integer_power_at_zero() {
        let fam = PhiFamily::IntegerPower {
            b: 1.0,
            c: 1.0,
            k: 0.0,
            m: 1,
        };
        let (p, dp, _) = fam.phi_jet(0.0).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
        assert!(dp.abs() < 1e-12);
    }

    #[test]
    fn integer_power_m1_k0_closed_form() {
        // int_0^s t^2/(1-t^2)^{3/2} dt = s/sqrt(1-s^2) - asin(s) for b=1
        let fam = PhiFamily::IntegerPower {
            b: 1.0,
            c: 1.0,
            k: 0.0,
            m: 1,
        };
        for s in [-0.6, -0.2, 0.3, 0.5, 0.7] {
            let a = (1.0 - s * s as f64).sqrt();
            let want = a + a * (s / a - f64::asin(s));
            let (p, _, _) = fam.phi_jet(s).unwrap();
            assert!((p - want).abs() < 1e-10, "s={s}: {p} vs {want}");
        }
    }

    #[test]
    fn phi_derivatives_match_fd_oracle() {
        let families = [
            PhiFamily::RandersType { eps: 0.5, k: 0.3 },
            PhiFamily::SquareRoot { k: 0.4, c: 1.0 },
            PhiFamily::Quadratic { sign: Sign::Minus },
            PhiFamily::SingularB { b: 1.0, ctilde: 0.7 },
            PhiFamily::IntegerPower {
                b: 1.0,
                c: 0.8,
                k: 0.2,
                m: 2,
            },
            PhiFamily::HalfPower {
                b: 1.0,
                c: 0.8,
                k: 0.0,
                m: 2,
            },
        ];
        for fam in &families {
            for s in [-0.45, -0.2, 0.15, 0.4] {
                let (_, dp, ddp) = fam.phi_jet(s).unwrap();
                let (fd1, fd2) = fd_phi(fam, s, 1e-5);
                assert!((dp - fd1).abs() < 1e-6, "{fam:?} at {s}");
                assert!((ddp - fd2).abs() < 1e-4, "{fam:?} at {s}");
            }
        }
    }

    #[test]
    fn quadrature_odd_symmetry_and_zero() {
        assert_eq!(singular_kernel_quadrature(1.0, 1.0, 0.0, 1.0, 0.0).unwrap(), 0.0);
        let plus = singular_kernel_quadrature(1.0, 1.0, 0.0, 1.0, 0.5).unwrap();
        let minus = singular_kernel_quadrature(1.0, 1.0, 0.0, 1.0, -0.5).unwrap();
        assert!((plus + minus).abs() < 1e-12);
        // unsubstituted integral as an independent oracle (no endpoint
        // singularity this far from t = b)
        let direct = simpson(&|t: f64| t * t / (1.0 - t * t).powf(1.5), 0.0, 0.5, 1e-12);
        assert!((plus - direct).abs() < 1e-9);
    }

    #[test]
    fn taylor_map_on_quadratic() {
        let (k1, k2, k3) =
            taylor_to_k(&PhiFamily::Quadratic { sign: Sign::Plus }).unwrap();
        assert!((k1 - 2.0).abs() < 1e-12 && k2.abs() < 1e-12 && (k3 + 3.0).abs() < 1e-12);
        let (k1, k2, k3) =
            taylor_to_k(&PhiFamily::Quadratic { sign: Sign::Minus }).unwrap();
        assert!((k1 + 2.0).abs() < 1e-12 && k2.abs() < 1e-12 && (k3 - 3.0).abs() < 1e-12);
    }

    #[test]
    fn randers_type_is_degenerate() {
        let err = taylor_to_k(&PhiFamily::RandersType { eps: 0.3, k: 0.8 });
        assert_eq!(err.unwrap_err(), Error::RandersTypeDegenerate);
    }

    #[test]
    fn square_root_family_substitution() {
        // k1 = 2c - k and k3 = -3c - k
        let (k, c) = (0.4, 1.1);
        let (k1, _k2, k3) = taylor_to_k(&PhiFamily::SquareRoot { k, c }).unwrap();
        assert!((k1 - (2.0 * c - k)).abs() < 1e-9);
        assert!((k3 - (-3.0 * c - k)).abs() < 1e-9);
    }

    #[test]
    fn ode_reproduces_square_root_family() {
        let (k, c) = (0.3, 0.8);
        let k1 = 2.0 * c - k;
        let k3 = -3.0 * c - k;
        let k2 = (2.0 * k1 + 3.0 * k3) * (3.0 * k1 + 2.0 * k3) / 25.0;
        let ode = PhiFamily::quartic_ode(k1, k2, k3, 0.0, 0.6).unwrap();
        let closed = PhiFamily::SquareRoot { k, c };
        for i in 0..=20 {
            let s = -0.5 + i as f64 * 0.05;
            let (p, _, _) = ode.phi_jet(s).unwrap();
            let (q, _, _) = closed.phi_jet(s).unwrap();
            assert!((p - q).abs() < 1e-7, "s={s}: {p} vs {q}");
        }
    }

    #[test]
    fn degenerate_ode_is_constant() {
        let ode = PhiFamily::quartic_ode(0.0, 0.0, 0.0, 0.0, 1.0).unwrap();
        let (p, dp, ddp) = ode.phi_jet(0.77).unwrap();
        assert!((p - 1.0).abs() < 1e-12 && dp.abs() < 1e-12 && ddp.abs() < 1e-12);
    }

    #[test]
    fn ode_plugback_residual_small() {
        let ode = solve_phi_ode(0.7, -0.3, 0.2, 0.0, 0.8, 1e-8).unwrap();
        assert!(ode.residual <= 1e-8);
    }

    #[test]
    fn phi_zero_is_one_for_every_family() {
        let families = [
            PhiFamily::RandersType { eps: 0.2, k: 0.5 },
            PhiFamily::SquareRoot { k: 0.3, c: 0.6 },
            PhiFamily::Quadratic { sign: Sign::Plus },
            PhiFamily::SingularB { b: 0.8, ctilde: 0.4 },
            PhiFamily::IntegerPower {
                b: 1.0,
                c: 1.0,
                k: 0.1,
                m: 1,
            },
            PhiFamily::HalfPower {
                b: 1.0,
                c: 1.0,
                k: 0.1,
                m: 1,
            },
            PhiFamily::quartic_ode(0.5, 0.2, -0.4, 0.0, 0.7).unwrap(),
        ];
        for f in &families {
            assert!((f.phi_jet(0.0).unwrap().0 - 1.0).abs() <= 1e-10, "{f:?}");
            assert!((f.taylor_series().coeff(0) - 1.0).abs() <= 1e-10, "{f:?}");
        }
    }

    #[test]
    fn regularity_margin_quadratic_plus() {
        let fam = PhiFamily::Quadratic { sign: Sign::Plus };
        let m = regularity_margin(&fam, 0.9).unwrap();
        assert!((m - 0.19).abs() < 1e-9);
        let z = regularity_zero_crossing(&fam, 0.9, 1.1).unwrap();
        assert!((z - 1.0).abs() < 1e-6);
    }

    #[test]
    fn regularity_margin_quadratic_minus() {
        let fam = PhiFamily::Quadratic { sign: Sign::Minus };
        let m = regularity_margin(&fam, 0.8).unwrap();
        assert!((m + 0.28).abs() < 1e-9);
        let z = regularity_zero_crossing(&fam, 0.5, 0.9).unwrap();
        assert!((z - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6);
    }
}
