//! The Riemannian metric alpha and 1-form beta as analytic fields,
//! their Christoffel symbols, and the conformally flat constructor.

use crate::diffcore::Point;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jet::Jet;

/// Rectangular evaluation domain in the plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DomainBox {
    pub x1: (f64, f64),
    pub x2: (f64, f64),
}

impl DomainBox {
    pub fn new(x1: (f64, f64), x2: (f64, f64)) -> Self {
        DomainBox { x1, x2 }
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.x1 >= self.x1.0 && p.x1 <= self.x1.1 && p.x2 >= self.x2.0 && p.x2 <= self.x2.1
    }

    /// Box shrunk inward by `margin` (a fraction of each side length).
    pub fn shrunk(&self, margin: f64) -> DomainBox {
        let d1 = (self.x1.1 - self.x1.0) * margin;
        let d2 = (self.x2.1 - self.x2.0) * margin;
        DomainBox {
            x1: (self.x1.0 + d1, self.x1.1 - d1),
            x2: (self.x2.0 + d2, self.x2.1 - d2),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LocusKind {
    /// The expression must stay bounded away from zero.
    NonZero,
    /// The expression must stay positive (with margin).
    Positive,
}

/// A locus where evaluation is forbidden, given by the expression whose
/// degeneracy defines it.
#[derive(Clone, Debug)]
pub struct ExcludedLocus {
    pub description: String,
    pub kind: LocusKind,
    pub expr: Expr,
}

/// Threshold below which a family/locus denominator counts as singular.
pub const LOCUS_THRESHOLD: f64 = 1e-6;

impl ExcludedLocus {
    pub fn non_zero(description: &str, expr: Expr) -> Self {
        ExcludedLocus {
            description: description.to_string(),
            kind: LocusKind::NonZero,
            expr,
        }
    }

    pub fn positive(description: &str, expr: Expr) -> Self {
        ExcludedLocus {
            description: description.to_string(),
            kind: LocusKind::Positive,
            expr,
        }
    }

    pub fn excludes(&self, p: &Point) -> bool {
        let v = self.expr.eval_f64(p.x1, p.x2);
        match self.kind {
            LocusKind::NonZero => v.abs() < LOCUS_THRESHOLD,
            LocusKind::Positive => v < LOCUS_THRESHOLD,
        }
    }
}

/// Symmetric positive definite metric field; entries (a11, a12, a22).
#[derive(Clone, Debug)]
pub struct RiemannMetricField {
    pub a11: Expr,
    pub a12: Expr,
    pub a22: Expr,
}

#[derive(Clone, Debug)]
pub struct OneFormField {
    pub b1: Expr,
    pub b2: Expr,
}

#[derive(Clone, Debug)]
pub struct MetricPair {
    pub alpha: RiemannMetricField,
    pub beta: OneFormField,
    pub domain: DomainBox,
    pub excluded: Vec<ExcludedLocus>,
}

/// Christoffel symbols and the inverse metric at a point.
#[derive(Clone, Copy, Debug)]
pub struct ChristoffelData {
    /// `gamma[i][j][k]` = Gamma^i_{jk}, symmetric in (j, k).
    pub gamma: [[[f64; 2]; 2]; 2],
    pub a_inv: [[f64; 2]; 2],
    pub a: [[f64; 2]; 2],
}

impl MetricPair {
    pub fn new(alpha: RiemannMetricField, beta: OneFormField, domain: DomainBox) -> Self {
        MetricPair {
            alpha,
            beta,
            domain,
            excluded: Vec::new(),
        }
    }

    pub fn with_excluded(mut self, excluded: Vec<ExcludedLocus>) -> Self {
        self.excluded = excluded;
        self
    }

    pub fn admissible(&self, p: &Point) -> bool {
        self.domain.contains(p) && !self.excluded.iter().any(|l| l.excludes(p))
    }

    pub fn check_interior(&self, p: &Point) -> Result<()> {
        if !self.domain.contains(p) {
            return Err(Error::DomainExit(format!("({}, {})", p.x1, p.x2)));
        }
        if let Some(l) = self.excluded.iter().find(|l| l.excludes(p)) {
            return Err(Error::DomainExit(l.description.clone()));
        }
        Ok(())
    }

    pub fn metric_at(&self, p: &Point) -> [[f64; 2]; 2] {
        let a11 = self.alpha.a11.eval_f64(p.x1, p.x2);
        let a12 = self.alpha.a12.eval_f64(p.x1, p.x2);
        let a22 = self.alpha.a22.eval_f64(p.x1, p.x2);
        [[a11, a12], [a12, a22]]
    }

    pub fn oneform_at(&self, p: &Point) -> [f64; 2] {
        [
            self.beta.b1.eval_f64(p.x1, p.x2),
            self.beta.b2.eval_f64(p.x1, p.x2),
        ]
    }

    /// Metric entries with first and second x-derivatives.
    pub fn metric_jets(&self, p: &Point) -> [Jet<2>; 3] {
        let (x1, x2) = (Jet::var(p.x1, 0), Jet::var(p.x2, 1));
        [
            self.alpha.a11.eval(x1, x2),
            self.alpha.a12.eval(x1, x2),
            self.alpha.a22.eval(x1, x2),
        ]
    }

    pub fn oneform_jets(&self, p: &Point) -> [Jet<2>; 2] {
        let (x1, x2) = (Jet::var(p.x1, 0), Jet::var(p.x2, 1));
        [self.beta.b1.eval(x1, x2), self.beta.b2.eval(x1, x2)]
    }

    pub fn positive_definite_at(&self, p: &Point) -> bool {
        let a = self.metric_at(p);
        let det = a[0][0] * a[1][1] - a[0][1] * a[0][1];
        a[0][0] > 0.0 && det > 0.0
    }

    /// b^2 = a^{ij} b_i b_j with its x-derivatives.
    pub fn beta_norm2_jet(&self, p: &Point) -> Result<Jet<2>> {
        let [a11, a12, a22] = self.metric_jets(p);
        let [b1, b2] = self.oneform_jets(p);
        let det = a11 * a22 - a12 * a12;
        if det.v.abs() < 1e-14 {
            return Err(Error::SingularMetric);
        }
        Ok((a22 * b1 * b1 - a12 * b1 * b2 - a12 * b1 * b2 + a11 * b2 * b2) / det)
    }
}

/// Levi-Civita Christoffel symbols of the metric at `p`, with the
/// metric and its inverse.
pub fn christoffel(pair: &MetricPair, p: &Point) -> Result<ChristoffelData> {
    pair.check_interior(p)?;
    let [a11, a12, a22] = pair.metric_jets(p);
    let a = [[a11.v, a12.v], [a12.v, a22.v]];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det.abs() < 1e-14 || a[0][0] <= 0.0 || det <= 0.0 {
        return Err(Error::SingularMetric);
    }
    let a_inv = [
        [a[1][1] / det, -a[0][1] / det],
        [-a[0][1] / det, a[0][0] / det],
    ];
    // da[i][j][k] = d a_ij / d x^k
    let entry = |i: usize, j: usize| if i == 0 && j == 0 {
        &a11
    } else if i == 1 && j == 1 {
        &a22
    } else {
        &a12
    };
    let mut da = [[[0.0; 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                da[i][j][k] = entry(i, j).g[k];
            }
        }
    }
    let mut gamma = [[[0.0; 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let mut acc = 0.0;
                for l in 0..2 {
                    acc += a_inv[i][l] * (da[l][j][k] + da[l][k][j] - da[j][k][l]);
                }
                gamma[i][j][k] = 0.5 * acc;
            }
        }
    }
    Ok(ChristoffelData { gamma, a_inv, a })
}

impl ChristoffelData {
    /// Riemannian spray G^i_alpha = (1/2) Gamma^i_{jk} y^j y^k.
    pub fn spray(&self, y: [f64; 2]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for (i, gi) in g.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..2 {
                for k in 0..2 {
                    acc += self.gamma[i][j][k] * y[j] * y[k];
                }
            }
            *gi = 0.5 * acc;
        }
        g
    }
}

/// b^2 at a point.
pub fn beta_norm2(pair: &MetricPair, p: &Point) -> Result<f64> {
    pair.check_interior(p)?;
    Ok(pair.beta_norm2_jet(p)?.v)
}

/// Conformally flat pair: alpha = e^sigma |y|, beta the unit-normalized
/// 1-form of (xi, eta) scaled by the constant b, so that the alpha-norm
/// of beta is b everywhere.
pub fn conformal_pair(
    sigma: Expr,
    xi: Expr,
    eta: Expr,
    b: f64,
    domain: DomainBox,
) -> Result<MetricPair> {
    if b <= 0.0 {
        return Err(Error::RangeViolation("b must be positive".into()));
    }
    let e2s = (sigma.clone() * 2.0).exp();
    let norm = (xi.square() + eta.square()).sqrt();
    let es = sigma.exp();
    let alpha = RiemannMetricField {
        a11: e2s.clone(),
        a12: Expr::constant(0.0),
        a22: e2s,
    };
    let beta = OneFormField {
        b1: b * es.clone() * xi.clone() / norm.clone(),
        b2: b * es * eta.clone() / norm,
    };
    Ok(MetricPair::new(alpha, beta, domain).with_excluded(vec![ExcludedLocus::non_zero(
        "xi^2 + eta^2 = 0",
        xi.square() + eta.square(),
    )]))
}

/// Flat alpha (identity metric) with the given 1-form.
pub fn flat_pair(b1: Expr, b2: Expr, domain: DomainBox) -> MetricPair {
    MetricPair::new(
        RiemannMetricField {
            a11: Expr::constant(1.0),
            a12: Expr::constant(0.0),
            a22: Expr::constant(1.0),
        },
        OneFormField { b1, b2 },
        domain,
    )
}
