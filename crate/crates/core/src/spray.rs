//! Spray coefficients by two independent routes (the generic
//! fundamental-tensor formula and the (alpha, beta) closed form), the
//! projective factor and a geodesic integrator.

use crate::betacalc::decompose;
use crate::diffcore::{xy_jet, Direction, Finsler, Point};
use crate::error::{Error, Result};
use crate::fields::{christoffel, MetricPair};
use crate::jet::Jet;
use crate::phi::PhiFamily;

/// F = alpha * phi(beta/alpha) as a jet-evaluable Finsler function.
#[derive(Clone)]
pub struct AbMetric {
    pub pair: MetricPair,
    pub family: PhiFamily,
}

impl AbMetric {
    pub fn new(pair: MetricPair, family: PhiFamily) -> Self {
        AbMetric { pair, family }
    }
}

impl Finsler for AbMetric {
    fn jet4(&self, p: &Point, y: &Direction) -> Result<Jet<4>> {
        use crate::jet::Real;
        if y.is_zero() {
            return Err(Error::DegenerateDirection);
        }
        self.pair.check_interior(p)?;
        let x1 = Jet::<4>::var(p.x1, 0);
        let x2 = Jet::<4>::var(p.x2, 1);
        let y1 = Jet::<4>::var(y.y1, 2);
        let y2 = Jet::<4>::var(y.y2, 3);
        let a11 = self.pair.alpha.a11.eval(x1, x2);
        let a12 = self.pair.alpha.a12.eval(x1, x2);
        let a22 = self.pair.alpha.a22.eval(x1, x2);
        let b1 = self.pair.beta.b1.eval(x1, x2);
        let b2 = self.pair.beta.b2.eval(x1, x2);
        let alpha2 = a11 * y1 * y1 + Jet::constant(2.0) * a12 * y1 * y2 + a22 * y2 * y2;
        if alpha2.v <= 0.0 {
            return Err(Error::SingularMetric);
        }
        let alpha = alpha2.sqrt();
        let beta = b1 * y1 + b2 * y2;
        let s = beta / alpha;
        let phi = self.family.lift(s)?;
        let f = alpha * phi;
        if !f.is_finite() {
            return Err(Error::NumericalBlowup);
        }
        Ok(f)
    }
}

/// Spray coefficients through the fundamental tensor of F:
/// `G^i = 1/4 g^{il} { [F^2]_{x^k y^l} y^k - [F^2]_{x^l} }`.
pub fn spray_generic<F: Finsler + ?Sized>(f: &F, p: &Point, y: &Direction) -> Result<[f64; 2]> {
    let j = f.jet4(p, y)?;
    let f2 = j * j;
    // g_ij = 1/2 [F^2]_{y^i y^j}
    let g = [
        [0.5 * f2.h[2][2], 0.5 * f2.h[2][3]],
        [0.5 * f2.h[3][2], 0.5 * f2.h[3][3]],
    ];
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    let scale = g[0][0].abs().max(g[1][1].abs()).max(1e-30);
    if det.abs() < 1e-12 * scale * scale {
        return Err(Error::SingularFundamentalTensor);
    }
    let g_inv = [
        [g[1][1] / det, -g[0][1] / det],
        [-g[0][1] / det, g[0][0] / det],
    ];
    let yv = [y.y1, y.y2];
    let mut rhs = [0.0; 2];
    for (l, r) in rhs.iter_mut().enumerate() {
        *r = f2.h[0][2 + l] * yv[0] + f2.h[1][2 + l] * yv[1] - f2.g[l];
    }
    let mut out = [0.0; 2];
    for (i, o) in out.iter_mut().enumerate() {
        *o = 0.25 * (g_inv[i][0] * rhs[0] + g_inv[i][1] * rhs[1]);
    }
    Ok(out)
}

/// Everything the (alpha, beta) spray formula produces at one (p, y).
#[derive(Clone, Copy, Debug)]
pub struct SprayData {
    pub g: [f64; 2],
    pub g_alpha: [f64; 2],
    pub q: f64,
    pub theta: f64,
    pub psi: f64,
    pub delta: f64,
    pub s: f64,
    pub b2: f64,
}

/// Spray coefficients through the closed (alpha, beta) formula:
/// `G^i = G^i_a + alpha Q s^i_0 + {Theta y^i / alpha + Psi b^i}(-2 alpha Q s_0 + r_00)`
/// with `Q = phi'/(phi - s phi')`, `Delta = 1 + sQ + (b^2 - s^2) Q'`.
pub fn spray_ab(
    pair: &MetricPair,
    family: &PhiFamily,
    p: &Point,
    y: &Direction,
) -> Result<SprayData> {
    if y.is_zero() {
        return Err(Error::DegenerateDirection);
    }
    let ch = christoffel(pair, p)?;
    let d = decompose(pair, p)?;
    let yv = [y.y1, y.y2];
    let alpha = d.alpha_0(yv);
    let beta = d.beta_0(yv);
    let s = beta / alpha;
    let (phi, dphi, ddphi) = family.phi_jet(s)?;
    let denom = phi - s * dphi;
    if denom.abs() < 1e-12 {
        return Err(Error::SprayFormulaSingular);
    }
    let q = dphi / denom;
    // dQ/ds collapses to phi'' phi / (phi - s phi')^2
    let qp = ddphi * phi / (denom * denom);
    let delta = 1.0 + s * q + (d.b2 - s * s) * qp;
    if delta.abs() < 1e-12 {
        return Err(Error::SprayFormulaSingular);
    }
    let theta = (q - s * qp) / (2.0 * delta);
    let psi = qp / (2.0 * delta);
    let g_alpha = ch.spray(yv);
    let s0 = d.s_0(yv);
    let s0_up = d.s_0_up(yv);
    let r00 = d.r_00(yv);
    let core = -2.0 * alpha * q * s0 + r00;
    let mut g = [0.0; 2];
    for i in 0..2 {
        g[i] = g_alpha[i]
            + alpha * q * s0_up[i]
            + theta * core / alpha * yv[i]
            + psi * core * d.b_up[i];
    }
    Ok(SprayData {
        g,
        g_alpha,
        q,
        theta,
        psi,
        delta,
        s,
        b2: d.b2,
    })
}

/// Projective factor `P = F_{x^m} y^m / (2F)`.
pub fn projective_factor<F: Finsler + ?Sized>(f: &F, p: &Point, y: &Direction) -> Result<f64> {
    let j = xy_jet(f, p, y)?;
    if j.value <= 0.0 {
        return Err(Error::NotPositive);
    }
    Ok((j.f_x[0] * y.y1 + j.f_x[1] * y.y2) / (2.0 * j.value))
}

/// A geodesic polyline with its straightness summary.
#[derive(Clone, Debug)]
pub struct GeodesicTrace {
    /// (t, position, velocity) along the trace.
    pub points: Vec<(f64, Point, [f64; 2])>,
    /// Max distance of a trace point to the chord through the endpoints,
    /// normalized by the trace's polyline length.
    pub chord_deviation: f64,
    /// True when evaluation failed mid-trace and the trace was cut short.
    pub truncated: bool,
}

/// Integrate `d2x/dt2 = -2 G(x, dx/dt)` with fixed-step fourth-order
/// steps, the initial velocity normalized so t is F-arclength.
pub fn geodesic_trace<F: Finsler + ?Sized>(
    f: &F,
    p0: &Point,
    y0: &Direction,
    arclen: f64,
    steps: usize,
) -> Result<GeodesicTrace> {
    if y0.is_zero() {
        return Err(Error::DegenerateDirection);
    }
    let f0 = f.value(p0, y0)?;
    if f0 <= 0.0 {
        return Err(Error::NotPositive);
    }
    let mut state = [p0.x1, p0.x2, y0.y1 / f0, y0.y2 / f0];
    let h = arclen / steps as f64;
    let rhs = |s: &[f64; 4]| -> Result<[f64; 4]> {
        let g = spray_generic(f, &Point::new(s[0], s[1]), &Direction::new(s[2], s[3]))?;
        Ok([s[2], s[3], -2.0 * g[0], -2.0 * g[1]])
    };
    let mut points = Vec::with_capacity(steps + 1);
    points.push((0.0, Point::new(state[0], state[1]), [state[2], state[3]]));
    let mut truncated = false;
    'outer: for n in 0..steps {
        let mut ks = [[0.0; 4]; 4];
        let coeffs = [0.0, 0.5, 0.5, 1.0];
        for stage in 0..4 {
            let mut probe = state;
            if stage > 0 {
                for i in 0..4 {
                    probe[i] += h * coeffs[stage] * ks[stage - 1][i];
                }
            }
            match rhs(&probe) {
                Ok(k) => ks[stage] = k,
                Err(_) => {
                    truncated = true;
                    break 'outer;
                }
            }
        }
        for i in 0..4 {
            state[i] += h / 6.0 * (ks[0][i] + 2.0 * ks[1][i] + 2.0 * ks[2][i] + ks[3][i]);
        }
        points.push((
            (n + 1) as f64 * h,
            Point::new(state[0], state[1]),
            [state[2], state[3]],
        ));
    }
    Ok(GeodesicTrace {
        chord_deviation: chord_deviation(&points),
        points,
        truncated,
    })
}

fn chord_deviation(points: &[(f64, Point, [f64; 2])]) -> f64 {
    if points.len() < 3 {
        return 0.0;
    }
    let a = &points[0].1;
    let b = &points[points.len() - 1].1;
    let mut length = 0.0;
    for w in points.windows(2) {
        length += ((w[1].1.x1 - w[0].1.x1).powi(2) + (w[1].1.x2 - w[0].1.x2).powi(2)).sqrt();
    }
    if length < 1e-300 {
        return 0.0;
    }
    let (dx, dy) = (b.x1 - a.x1, b.x2 - a.x2);
    let chord2 = dx * dx + dy * dy;
    let mut max = 0.0f64;
    for (_, p, _) in points {
        let d = if chord2 < 1e-300 {
            ((p.x1 - a.x1).powi(2) + (p.x2 - a.x2).powi(2)).sqrt()
        } else {
            let t = ((p.x1 - a.x1) * dx + (p.x2 - a.x2) * dy) / chord2;
            let t = t.clamp(0.0, 1.0);
            let (px, py) = (a.x1 + t * dx, a.x2 + t * dy);
            ((p.x1 - px).powi(2) + (p.x2 - py).powi(2)).sqrt()
        };
        max = max.max(d);
    }
    max / length
}
