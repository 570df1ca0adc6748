//! Builders for the explicit metric families and the two deformations:
//! the B/(u,v) parametrizations, the conformally flat projectively flat
//! example, the singular rotational examples, and the alpha- and
//! beta-deformations used to reach conformal form.

use crate::betacalc::GridSpec;
use crate::diffcore::{x_jet, Point};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::fields::{
    conformal_pair, DomainBox, ExcludedLocus, MetricPair, OneFormField, RiemannMetricField,
};
use crate::phi::{PhiFamily, Sign};

/// A complex-analytic f = u + iv given by its components.
#[derive(Clone, Debug)]
pub struct HolomorphicPair {
    pub u: Expr,
    pub v: Expr,
}

impl HolomorphicPair {
    /// Max Cauchy-Riemann residual |u_1 - v_2|, |u_2 + v_1| on the grid.
    pub fn cauchy_riemann_residual(&self, domain: &DomainBox, grid: &GridSpec) -> Result<f64> {
        let mut max = 0.0f64;
        for p in grid.points(domain) {
            let u = x_jet(|x1, x2| self.u.eval(x1, x2), &p)?;
            let v = x_jet(|x1, x2| self.v.eval(x1, x2), &p)?;
            max = max
                .max((u.grad[0] - v.grad[1]).abs())
                .max((u.grad[1] + v.grad[0]).abs());
        }
        Ok(max)
    }
}

/// The identity function f(z) = z.
pub fn holomorphic_z() -> HolomorphicPair {
    HolomorphicPair {
        u: Expr::x1(),
        v: Expr::x2(),
    }
}

fn grid_scan<T>(domain: &DomainBox, f: impl Fn(&Point) -> Result<T>) -> Result<Vec<T>> {
    GridSpec::default()
        .points(domain)
        .iter()
        .map(f)
        .collect::<Result<Vec<T>>>()
}

/// The B/(u,v) parametrization of the quadratic-family metrics:
/// `alpha^2 = {B |y|^2/(u^2+v^2) -+ 9(1 +- B + B^2) beta^2} / (1 -+ B)^3`,
/// `beta = B (u y^1 + v y^2) / ((1 +- 2B)^{3/2} (u^2+v^2))`.
pub fn build_th2(
    b_field: Expr,
    f: HolomorphicPair,
    sign: Sign,
    domain: DomainBox,
) -> Result<MetricPair> {
    let sg = sign.val();
    let upper = b_field.clone();
    // range of B: (0, 1) for the plus sign, (0, 1/2) for the minus sign
    let b_hi = if sign == Sign::Plus { 1.0 } else { 0.5 };
    for v in grid_scan(&domain, |p| Ok(upper.eval_f64(p.x1, p.x2)))? {
        if !(v > 0.0 && v < b_hi) {
            return Err(Error::RangeViolation(format!(
                "B = {v} outside (0, {b_hi})"
            )));
        }
    }
    let w2 = f.u.square() + f.v.square();
    for v in grid_scan(&domain, |p| Ok(w2.eval_f64(p.x1, p.x2)))? {
        if v <= 0.0 {
            return Err(Error::DegenerateForm);
        }
    }
    let cr = f.cauchy_riemann_residual(&domain, &GridSpec::default())?;
    if cr > 1e-8 {
        return Err(Error::ConstraintViolation(format!(
            "(u, v) is not complex analytic: Cauchy-Riemann residual {cr}"
        )));
    }
    let b = b_field;
    let one_msb = 1.0 - sg * b.clone(); // 1 -+ B
    let one_p2sb = 1.0 + sg * 2.0 * b.clone(); // 1 +- 2B
    let quad = 1.0 + sg * b.clone() + b.square(); // 1 +- B + B^2
    let b1 = b.clone() * f.u.clone() / (one_p2sb.powc(1.5) * w2.clone());
    let b2 = b.clone() * f.v.clone() / (one_p2sb.powc(1.5) * w2.clone());
    let diag = b.clone() / (one_msb.powc(3.0) * w2.clone());
    let cross = -(sg * 9.0) * quad / one_msb.powc(3.0);
    let alpha = RiemannMetricField {
        a11: diag.clone() + cross.clone() * b1.square(),
        a12: cross.clone() * b1.clone() * b2.clone(),
        a22: diag + cross * b2.square(),
    };
    let pair = MetricPair::new(alpha, OneFormField { b1, b2 }, domain)
        .with_excluded(vec![ExcludedLocus::non_zero("u^2 + v^2 = 0", w2)]);
    for p in GridSpec::default().points(&pair.domain) {
        if pair.admissible(&p) && !pair.positive_definite_at(&p) {
            return Err(Error::SingularMetric);
        }
    }
    Ok(pair)
}

/// Parameters of the quartic-ODE-family parametrization.
#[derive(Clone, Debug)]
pub struct Th001Params {
    pub b_field: Expr,
    pub f: HolomorphicPair,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub domain: DomainBox,
}

/// A special closed-form solution of the parametrizing PDEs:
/// sigma = x^1, u and v trigonometric times e^{-x^1}; B comes out
/// constant for the constants (k1, k2, k3) = (0, 1, 0).
pub fn th001_special(c1: f64, c2: f64, domain: DomainBox) -> Result<Th001Params> {
    let w = c1 * c1 + c2 * c2;
    if !(w > 0.0 && w < 1.0) {
        return Err(Error::RangeViolation(
            "c1^2 + c2^2 must lie in (0, 1)".into(),
        ));
    }
    // e^{2 sigma} = B / (c(B)^2 (u^2+v^2)) with c^2 = sqrt(1+B^2) forces
    // B/sqrt(1+B^2) = c1^2 + c2^2, a constant
    let b_const = w / (1.0 - w * w).sqrt();
    let e = (-Expr::x1()).exp();
    Ok(Th001Params {
        b_field: Expr::constant(b_const),
        f: HolomorphicPair {
            u: (c2 * Expr::x2().sin() - c1 * Expr::x2().cos()) * e.clone(),
            v: (c1 * Expr::x2().sin() + c2 * Expr::x2().cos()) * e,
        },
        k1: 0.0,
        k2: 1.0,
        k3: 0.0,
        domain,
    })
}

/// sigma as defined by the parametrization:
/// `e^{2 sigma} = B / (c(B)^2 (u^2 + v^2))`.
pub fn th001_sigma(params: &Th001Params) -> Expr {
    let w2 = params.f.u.square() + params.f.v.square();
    let c = params.b_field.c_of_b(params.k1, params.k2, params.k3);
    (params.b_field.clone() / (c.square() * w2)).ln() * 0.5
}

/// Max residual of the parametrizing PDEs
/// `u_1 = v_2, u_2 = -v_1, v_1 + sigma_1 v = u sigma_2` on the grid.
pub fn th001_pde_residual(params: &Th001Params) -> Result<f64> {
    let sigma = th001_sigma(params);
    let mut max = 0.0f64;
    for p in GridSpec::default().points(&params.domain) {
        let u = x_jet(|x1, x2| params.f.u.eval(x1, x2), &p)?;
        let v = x_jet(|x1, x2| params.f.v.eval(x1, x2), &p)?;
        let s = x_jet(|x1, x2| sigma.eval(x1, x2), &p)?;
        max = max
            .max((u.grad[0] - v.grad[1]).abs())
            .max((u.grad[1] + v.grad[0]).abs())
            .max((v.grad[0] + s.grad[0] * v.value - u.value * s.grad[1]).abs());
    }
    Ok(max)
}

/// The quartic-ODE-family parametrization:
/// `alpha = sqrt(B)/c * |y|/sqrt(u^2+v^2)`,
/// `beta = B (u y^1 + v y^2) / (c (u^2+v^2))`, c the stated integral of B.
pub fn build_th001(params: &Th001Params) -> Result<MetricPair> {
    let (k1, k2, k3) = (params.k1, params.k2, params.k3);
    if (k2 - (2.0 * k1 + 3.0 * k3) * (3.0 * k1 + 2.0 * k3) / 25.0).abs() < 1e-12
        || (k2 - k1 * k3).abs() < 1e-12
    {
        return Err(Error::RangeViolation(
            "(k1, k2, k3) violate the class inequalities".into(),
        ));
    }
    let mut b_max = 0.0f64;
    for v in grid_scan(&params.domain, |p| Ok(params.b_field.eval_f64(p.x1, p.x2)))? {
        if v <= 0.0 {
            return Err(Error::RangeViolation(format!("B = {v} must be positive")));
        }
        b_max = b_max.max(v);
    }
    // the integrand denominator must stay positive up to max B
    for i in 0..=256 {
        let t = b_max * i as f64 / 256.0;
        if 1.0 + (k1 + k3) * t + k2 * t * t <= 0.0 {
            return Err(Error::RangeViolation(
                "1 + (k1+k3) t + k2 t^2 vanishes on [0, max B]".into(),
            ));
        }
    }
    let res = th001_pde_residual(params)?;
    if res > 1e-7 {
        return Err(Error::ConstraintViolation(format!(
            "(B, u, v) do not satisfy the parametrizing PDEs: residual {res}"
        )));
    }
    let w2 = params.f.u.square() + params.f.v.square();
    let c = params.b_field.c_of_b(k1, k2, k3);
    let diag = params.b_field.clone() / (c.square() * w2.clone());
    let alpha = RiemannMetricField {
        a11: diag.clone(),
        a12: Expr::constant(0.0),
        a22: diag,
    };
    let beta = OneFormField {
        b1: params.b_field.clone() * params.f.u.clone() / (c.clone() * w2.clone()),
        b2: params.b_field.clone() * params.f.v.clone() / (c * w2.clone()),
    };
    Ok(
        MetricPair::new(alpha, beta, params.domain).with_excluded(vec![ExcludedLocus::non_zero(
            "u^2 + v^2 = 0",
            w2,
        )]),
    )
}

/// The conformally flat projectively flat example:
/// `alpha = e^sigma |y|, beta = e^sigma (xi y^1 + eta y^2)` with xi, eta,
/// sigma built from the disk factor `c3 -+ (x^1+c1)^2 -+ (x^2+c2)^2`.
pub fn build_pf_example(
    c1: f64,
    c2: f64,
    c3: f64,
    c4: f64,
    sign: Sign,
    domain: DomainBox,
) -> Result<MetricPair> {
    if c3 <= 0.0 {
        return Err(Error::RangeViolation("c3 must be positive".into()));
    }
    let sg = sign.val();
    let u1 = Expr::x1() + c1;
    let u2 = Expr::x2() + c2;
    let disk = c3 - sg * (u1.square() + u2.square());
    let root = disk.sqrt();
    let xi = (sg / 2f64.sqrt()) * u2.clone() / root.clone();
    let eta = -(sg / 2f64.sqrt()) * u1.clone() / root;
    let es = disk.clone() * c4.exp(); // e^sigma with sigma = ln(disk) + c4
    let alpha = RiemannMetricField {
        a11: es.square(),
        a12: Expr::constant(0.0),
        a22: es.square(),
    };
    let beta = OneFormField {
        b1: es.clone() * xi,
        b2: es * eta,
    };
    let pair = MetricPair::new(alpha, beta, domain)
        .with_excluded(vec![ExcludedLocus::positive("disk factor <= 0", disk)]);
    if GridSpec::default()
        .points(&pair.domain)
        .iter()
        .all(|p| !pair.admissible(p))
    {
        return Err(Error::RangeViolation(
            "no admissible points in the declared domain".into(),
        ));
    }
    Ok(pair)
}

/// Which singular phi family a rotational example uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SingularVariant {
    /// integer power m in the kernel
    IntegerPower { m: u32 },
    /// half-integer power m - 1/2
    HalfPower { m: u32 },
}

/// Conformally flat pair for the singular classes (constant b), with
/// the matching quadrature-based phi family.
pub fn build_singular_family(
    sigma: Expr,
    xi: Expr,
    eta: Expr,
    b: f64,
    c: f64,
    k: f64,
    variant: SingularVariant,
    domain: DomainBox,
) -> Result<(MetricPair, PhiFamily)> {
    let pair = conformal_pair(sigma, xi, eta, b, domain)?;
    let family = match variant {
        SingularVariant::IntegerPower { m } => PhiFamily::IntegerPower { b, c, k, m },
        SingularVariant::HalfPower { m } => PhiFamily::HalfPower { b, c, k, m },
    };
    Ok((pair, family))
}

/// The first rotational example: sigma = (m - 1/2) ln|x|^2, xi = x^2,
/// eta = -x^1, with the integer-power kernel at k = 0.
pub fn ex01_pair(m: u32, b: f64, c: f64, domain: DomainBox) -> Result<(MetricPair, PhiFamily)> {
    let r2 = Expr::x1().square() + Expr::x2().square();
    build_singular_family(
        r2.ln() * (m as f64 - 0.5),
        Expr::x2(),
        -Expr::x1(),
        b,
        c,
        0.0,
        SingularVariant::IntegerPower { m },
        domain,
    )
}

/// The second rotational example: sigma = (m - 1) ln|x|^2 with the
/// half-power kernel at k = 0.
pub fn ex02_pair(m: u32, b: f64, c: f64, domain: DomainBox) -> Result<(MetricPair, PhiFamily)> {
    let r2 = Expr::x1().square() + Expr::x2().square();
    build_singular_family(
        r2.ln() * (m as f64 - 1.0),
        Expr::x2(),
        -Expr::x1(),
        b,
        c,
        0.0,
        SingularVariant::HalfPower { m },
        domain,
    )
}

/// tau-tilde of a conformally flat pair:
/// `2 tau b e^sigma (xi^2+eta^2)^{3/2} = (xi^2+eta^2)(xi s1 + eta s2)
///  - xi eta eta_1 + xi^2 eta_2 + eta^2 xi_1 - xi eta xi_2`.
pub fn singular_tau_tilde(
    sigma: &Expr,
    xi: &Expr,
    eta: &Expr,
    b: f64,
    p: &Point,
) -> Result<f64> {
    let s = x_jet(|x1, x2| sigma.eval(x1, x2), p)?;
    let xj = x_jet(|x1, x2| xi.eval(x1, x2), p)?;
    let ej = x_jet(|x1, x2| eta.eval(x1, x2), p)?;
    let (x, e) = (xj.value, ej.value);
    let n2 = x * x + e * e;
    if n2 < 1e-12 {
        return Err(Error::DegenerateForm);
    }
    let num = n2 * (x * s.grad[0] + e * s.grad[1]) - x * e * ej.grad[0] + x * x * ej.grad[1]
        + e * e * xj.grad[0]
        - x * e * xj.grad[1];
    Ok(num / (2.0 * b * s.value.exp() * n2.powf(1.5)))
}

/// The nonclosedness indicator of the same construction; nonzero iff
/// beta is not closed.
pub fn singular_nonclosedness(sigma: &Expr, xi: &Expr, eta: &Expr, p: &Point) -> Result<f64> {
    let s = x_jet(|x1, x2| sigma.eval(x1, x2), p)?;
    let xj = x_jet(|x1, x2| xi.eval(x1, x2), p)?;
    let ej = x_jet(|x1, x2| eta.eval(x1, x2), p)?;
    let (x, e) = (xj.value, ej.value);
    let n2 = x * x + e * e;
    Ok(n2 * (x * s.grad[1] - e * s.grad[0]) - x * x * ej.grad[0] - x * e * ej.grad[1]
        + x * e * xj.grad[0]
        + e * e * xj.grad[1])
}

/// Express b^2 = a^{ij} b_i b_j of a pair as a field expression.
fn beta_norm2_expr(pair: &MetricPair) -> Expr {
    let a11 = pair.alpha.a11.clone();
    let a12 = pair.alpha.a12.clone();
    let a22 = pair.alpha.a22.clone();
    let b1 = pair.beta.b1.clone();
    let b2 = pair.beta.b2.clone();
    let det = a11.clone() * a22.clone() - a12.square();
    (a22 * b1.square() - 2.0 * a12 * b1 * b2.clone() + a11 * b2.square()) / det
}

/// Deform alpha into conformal position while keeping beta:
/// `alpha~^2 = xi(b^2) alpha^2 + eta(b^2) beta^2` with
/// `xi = (1 -+ b^2)^3/(1 +- 2b^2)^{3/2}` and eta simplified to
/// `+-9 (1 +- b^2 + b^4)/(1 +- 2b^2)^{3/2}`, smooth through b = 0.
pub fn deform_th2(pair: &MetricPair, sign: Sign) -> Result<MetricPair> {
    let sg = sign.val();
    let b2e = beta_norm2_expr(pair);
    for p in GridSpec::default().points(&pair.domain) {
        if !pair.admissible(&p) {
            continue;
        }
        let v = b2e.eval_f64(p.x1, p.x2);
        if 1.0 + sg * 2.0 * v <= 0.0 || (sign == Sign::Minus && v >= 0.5) {
            return Err(Error::RangeViolation(format!(
                "b^2 = {v} outside the deformable range"
            )));
        }
    }
    let denom = (1.0 + sg * 2.0 * b2e.clone()).powc(1.5);
    let xi = (1.0 - sg * b2e.clone()).powc(3.0) / denom.clone();
    let eta = sg * 9.0 * (1.0 + sg * b2e.clone() + b2e.square()) / denom;
    let alpha = RiemannMetricField {
        a11: xi.clone() * pair.alpha.a11.clone() + eta.clone() * pair.beta.b1.square(),
        a12: xi.clone() * pair.alpha.a12.clone()
            + eta.clone() * pair.beta.b1.clone() * pair.beta.b2.clone(),
        a22: xi * pair.alpha.a22.clone() + eta * pair.beta.b2.square(),
    };
    Ok(MetricPair::new(alpha, pair.beta.clone(), pair.domain)
        .with_excluded(pair.excluded.clone()))
}

/// The closing Douglas example: `alpha = e^sigma |y|,
/// beta = e^sigma (x^2 y^1 - x^1 y^2)` with
/// `sigma = -(3/2) ln(1 +- 2(x^1)^2 +- 2(x^2)^2) + c`; beta is not
/// closed and its r-part satisfies the dual-sign class with tau = 0.
pub fn closing_example(sign: Sign, c: f64, domain: DomainBox) -> Result<MetricPair> {
    let sg = sign.val();
    let factor = 1.0 + sg * 2.0 * (Expr::x1().square() + Expr::x2().square());
    let es = factor.powc(-1.5) * c.exp();
    let alpha = RiemannMetricField {
        a11: es.square(),
        a12: Expr::constant(0.0),
        a22: es.square(),
    };
    let beta = OneFormField {
        b1: es.clone() * Expr::x2(),
        b2: -(es * Expr::x1()),
    };
    let mut excluded = vec![ExcludedLocus::non_zero(
        "xi^2 + eta^2 = 0",
        Expr::x1().square() + Expr::x2().square(),
    )];
    if sign == Sign::Minus {
        excluded.push(ExcludedLocus::positive("conformal factor <= 0", factor));
    }
    Ok(MetricPair::new(alpha, beta, domain).with_excluded(excluded))
}

/// Keep alpha, scale beta by the constant 1/c.
pub fn deform_th001(pair: &MetricPair, c: f64) -> Result<MetricPair> {
    if c <= 0.0 {
        return Err(Error::RangeViolation("c must be positive".into()));
    }
    let beta = OneFormField {
        b1: pair.beta.b1.clone() / c,
        b2: pair.beta.b2.clone() / c,
    };
    Ok(MetricPair::new(pair.alpha.clone(), beta, pair.domain)
        .with_excluded(pair.excluded.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::betacalc::closedness_scan;
    use crate::expr::c_of_b_derivs;
    use crate::fields::beta_norm2;

    fn th2_domain() -> DomainBox {
        DomainBox::new((0.5, 1.5), (0.5, 1.5))
    }

    #[test]
    fn identity_map_is_holomorphic() {
        let f = holomorphic_z();
        let r = f
            .cauchy_riemann_residual(&th2_domain(), &GridSpec::default())
            .unwrap();
        assert!(r < 1e-12);
    }

    #[test]
    fn non_holomorphic_pair_rejected() {
        let f = HolomorphicPair {
            u: Expr::x1().square(),
            v: Expr::x2(),
        };
        let err = build_th2(Expr::constant(0.25), f, Sign::Plus, th2_domain());
        assert!(matches!(err.unwrap_err(), Error::ConstraintViolation(_)));
    }

    #[test]
    fn th2_norm_reproduces_b() {
        let b = Expr::parse("0.25 + 0.1*x1").unwrap();
        let pair = build_th2(b.clone(), holomorphic_z(), Sign::Plus, th2_domain()).unwrap();
        for p in GridSpec::default().points(&pair.domain) {
            let want = b.eval_f64(p.x1, p.x2);
            let got = beta_norm2(&pair, &p).unwrap();
            assert!((got - want).abs() < 1e-9, "at ({}, {}): {got} vs {want}", p.x1, p.x2);
            assert!(pair.positive_definite_at(&p));
        }
    }

    #[test]
    fn th2_range_violations() {
        let err = build_th2(
            Expr::constant(1.2),
            holomorphic_z(),
            Sign::Plus,
            th2_domain(),
        );
        assert!(matches!(err.unwrap_err(), Error::RangeViolation(_)));
        let err = build_th2(
            Expr::constant(0.75),
            holomorphic_z(),
            Sign::Minus,
            th2_domain(),
        );
        assert!(matches!(err.unwrap_err(), Error::RangeViolation(_)));
    }

    #[test]
    fn special_triple_solves_the_pdes() {
        let params = th001_special(0.6, 0.0, th2_domain()).unwrap();
        assert!(th001_pde_residual(&params).unwrap() <= 1e-9);
        assert!(
            params
                .f
                .cauchy_riemann_residual(&params.domain, &GridSpec::default())
                .unwrap()
                < 1e-9
        );
    }

    #[test]
    fn c_of_b_closed_form_for_0_1_0() {
        // (k1, k2, k3) = (0, 1, 0): c(B) = (1 + B^2)^{1/4}
        let (c, _, _) = c_of_b_derivs(0.0, 1.0, 0.0, 0.5);
        assert!((c - 1.25f64.powf(0.25)).abs() < 1e-10);
    }

    #[test]
    fn th001_norm_reproduces_b() {
        let params = th001_special(0.6, 0.0, th2_domain()).unwrap();
        let pair = build_th001(&params).unwrap();
        let want = params.b_field.eval_f64(1.0, 1.0);
        for p in GridSpec::default().points(&pair.domain) {
            let got = beta_norm2(&pair, &p).unwrap();
            assert!((got - want).abs() < 1e-9);
        }
    }

    #[test]
    fn th001_rejects_bad_triples() {
        // u, v violating the third PDE for sigma derived from (B, u, v)
        let params = Th001Params {
            b_field: Expr::constant(0.5),
            f: HolomorphicPair {
                u: Expr::x1(),
                v: 2.0 * Expr::x2(),
            },
            k1: 0.0,
            k2: 1.0,
            k3: 0.0,
            domain: th2_domain(),
        };
        assert!(matches!(
            build_th001(&params).unwrap_err(),
            Error::ConstraintViolation(_)
        ));
        // class inequalities: k2 = k1 k3 is out
        let params = Th001Params {
            k1: 1.0,
            k2: 0.25,
            k3: 0.25,
            ..th001_special(0.6, 0.0, th2_domain()).unwrap()
        };
        assert!(matches!(
            build_th001(&params).unwrap_err(),
            Error::RangeViolation(_)
        ));
    }

    #[test]
    fn pf_example_beta_not_closed() {
        let domain = DomainBox::new((-0.4, 0.4), (-0.4, 0.4));
        let pair = build_pf_example(0.0, 0.0, 1.0, 0.0, Sign::Plus, domain).unwrap();
        let s12 = closedness_scan(&pair, &GridSpec::default()).unwrap();
        assert!(s12 > 1e-3);
    }

    #[test]
    fn pf_example_domain_validation() {
        let domain = DomainBox::new((2.0, 3.0), (2.0, 3.0));
        // disk factor 1 - |x|^2 is negative everywhere on that box
        let err = build_pf_example(0.0, 0.0, 1.0, 0.0, Sign::Plus, domain);
        assert!(matches!(err.unwrap_err(), Error::RangeViolation(_)));
    }

    #[test]
    fn rotational_tau_tilde_vanishes() {
        let sigma = Expr::parse("0.7*(x1*x1 + x2*x2)").unwrap();
        let xi = Expr::x2();
        let eta = -Expr::x1();
        for p in [Point::new(1.0, 0.3), Point::new(0.4, -0.8)] {
            let t = singular_tau_tilde(&sigma, &xi, &eta, 0.5, &p).unwrap();
            assert!(t.abs() < 1e-12);
            assert!(singular_nonclosedness(&sigma, &xi, &eta, &p).unwrap().abs() > 1e-6);
        }
    }

    #[test]
    fn ex01_nonclosedness_indicator() {
        let m = 1u32;
        let sigma = (Expr::x1().square() + Expr::x2().square()).ln() * (m as f64 - 0.5);
        let ind =
            singular_nonclosedness(&sigma, &Expr::x2(), &(-Expr::x1()), &Point::new(1.0, 0.0))
                .unwrap();
        assert!(ind.abs() > 1e-6);
    }

    #[test]
    fn deform_th2_norm_formula() {
        let b = Expr::parse("0.25 + 0.05*x2").unwrap();
        let pair = build_th2(b.clone(), holomorphic_z(), Sign::Plus, th2_domain()).unwrap();
        let deformed = deform_th2(&pair, Sign::Plus).unwrap();
        for p in GridSpec::default().points(&pair.domain) {
            let b2 = beta_norm2(&pair, &p).unwrap();
            let want = b2 / (1.0 + 2.0 * b2).powf(1.5);
            let got = beta_norm2(&deformed, &p).unwrap();
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn deform_th001_scales_norm() {
        let pair = crate::fields::flat_pair(
            Expr::constant(0.3),
            Expr::x1(),
            DomainBox::new((-1.0, 1.0), (-1.0, 1.0)),
        );
        let p = Point::new(0.4, 0.2);
        let b2 = beta_norm2(&pair, &p).unwrap();
        let scaled = deform_th001(&pair, 2.5).unwrap();
        assert!((beta_norm2(&scaled, &p).unwrap() - b2 / 6.25).abs() < 1e-12);
        let same = deform_th001(&pair, 1.0).unwrap();
        assert!((beta_norm2(&same, &p).unwrap() - b2).abs() < 1e-15);
        assert!(deform_th001(&pair, 0.0).is_err());
    }
}
