//! Covariant derivative of beta and its r/s decomposition, plus the
//! grid scans for closedness of beta and constancy of b.

use crate::diffcore::Point;
use crate::error::Result;
use crate::fields::{christoffel, DomainBox, MetricPair};

/// Uniform scan grid over the declared box, shrunk by a margin fraction.
#[derive(Clone, Copy, Debug)]
pub struct GridSpec {
    pub n1: usize,
    pub n2: usize,
    pub margin: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            n1: 17,
            n2: 17,
            margin: 0.05,
        }
    }
}

impl GridSpec {
    pub fn with_resolution(n: usize) -> Self {
        GridSpec {
            n1: n,
            n2: n,
            ..Default::default()
        }
    }

    /// All grid points of the shrunk box, row-major, no admissibility
    /// filtering (callers decide how to treat excluded points).
    pub fn points(&self, domain: &DomainBox) -> Vec<Point> {
        let inner = domain.shrunk(self.margin);
        let mut out = Vec::with_capacity(self.n1 * self.n2);
        for i in 0..self.n1 {
            let t1 = if self.n1 == 1 { 0.5 } else { i as f64 / (self.n1 - 1) as f64 };
            for j in 0..self.n2 {
                let t2 = if self.n2 == 1 { 0.5 } else { j as f64 / (self.n2 - 1) as f64 };
                out.push(Point::new(
                    inner.x1.0 + t1 * (inner.x1.1 - inner.x1.0),
                    inner.x2.0 + t2 * (inner.x2.1 - inner.x2.0),
                ));
            }
        }
        out
    }

    /// Grid points that pass the pair's admissibility test.
    pub fn admissible_points(&self, pair: &MetricPair) -> Vec<Point> {
        self.points(&pair.domain)
            .into_iter()
            .filter(|p| pair.admissible(p))
            .collect()
    }
}

/// Full r/s decomposition of the covariant derivative of beta at a point.
#[derive(Clone, Copy, Debug)]
pub struct BetaDecomposition {
    /// b_{i|j} = db_i/dx^j - b_k Gamma^k_{ij}
    pub bij: [[f64; 2]; 2],
    /// symmetric part r_ij
    pub r: [[f64; 2]; 2],
    /// antisymmetric part s_ij
    pub s: [[f64; 2]; 2],
    /// r_j = b^i r_ij
    pub r_i: [f64; 2],
    /// s_j = b^i s_ij
    pub s_i: [f64; 2],
    /// s^i = a^{ik} s_k
    pub s_up: [f64; 2],
    /// b_i (lowered) and b^i (raised)
    pub b: [f64; 2],
    pub b_up: [f64; 2],
    pub b2: f64,
    pub a: [[f64; 2]; 2],
    pub a_inv: [[f64; 2]; 2],
}

impl BetaDecomposition {
    /// r_00 = r_ij y^i y^j
    pub fn r_00(&self, y: [f64; 2]) -> f64 {
        let mut acc = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                acc += self.r[i][j] * y[i] * y[j];
            }
        }
        acc
    }

    /// s_0 = s_i y^i
    pub fn s_0(&self, y: [f64; 2]) -> f64 {
        self.s_i[0] * y[0] + self.s_i[1] * y[1]
    }

    /// s^i_0 = a^{ik} s_{kj} y^j
    pub fn s_0_up(&self, y: [f64; 2]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (i, o) in out.iter_mut().enumerate() {
            for k in 0..2 {
                for j in 0..2 {
                    *o += self.a_inv[i][k] * self.s[k][j] * y[j];
                }
            }
        }
        out
    }

    /// beta(y) = b_i y^i
    pub fn beta_0(&self, y: [f64; 2]) -> f64 {
        self.b[0] * y[0] + self.b[1] * y[1]
    }

    /// alpha(y) = sqrt(a_ij y^i y^j)
    pub fn alpha_0(&self, y: [f64; 2]) -> f64 {
        let mut acc = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                acc += self.a[i][j] * y[i] * y[j];
            }
        }
        acc.sqrt()
    }
}

pub fn decompose(pair: &MetricPair, p: &Point) -> Result<BetaDecomposition> {
    let ch = christoffel(pair, p)?;
    let bj = pair.oneform_jets(p);
    let b = [bj[0].v, bj[1].v];
    // db[i][j] = d b_i / d x^j
    let db = [bj[0].g, bj[1].g];
    let mut bij = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = db[i][j];
            for k in 0..2 {
                acc -= b[k] * ch.gamma[k][i][j];
            }
            bij[i][j] = acc;
        }
    }
    let mut r = [[0.0; 2]; 2];
    let mut s = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = 0.5 * (bij[i][j] + bij[j][i]);
            s[i][j] = 0.5 * (bij[i][j] - bij[j][i]);
        }
    }
    let mut b_up = [0.0; 2];
    for (i, o) in b_up.iter_mut().enumerate() {
        *o = ch.a_inv[i][0] * b[0] + ch.a_inv[i][1] * b[1];
    }
    let mut r_i = [0.0; 2];
    let mut s_i = [0.0; 2];
    for j in 0..2 {
        for i in 0..2 {
            r_i[j] += b_up[i] * r[i][j];
            s_i[j] += b_up[i] * s[i][j];
        }
    }
    let mut s_up = [0.0; 2];
    for (i, o) in s_up.iter_mut().enumerate() {
        *o = ch.a_inv[i][0] * s_i[0] + ch.a_inv[i][1] * s_i[1];
    }
    Ok(BetaDecomposition {
        bij,
        r,
        s,
        r_i,
        s_i,
        s_up,
        b,
        b_up,
        b2: b_up[0] * b[0] + b_up[1] * b[1],
        a: ch.a,
        a_inv: ch.a_inv,
    })
}

/// max |s_12| over the admissible grid: zero iff beta is closed there.
pub fn closedness_scan(pair: &MetricPair, grid: &GridSpec) -> Result<f64> {
    let mut max = 0.0f64;
    for p in grid.admissible_points(pair) {
        max = max.max(decompose(pair, &p)?.s[0][1].abs());
    }
    Ok(max)
}

/// max |grad(b^2)| over the admissible grid: zero iff b is constant.
pub fn b_constancy_scan(pair: &MetricPair, grid: &GridSpec) -> Result<f64> {
    let mut max = 0.0f64;
    for p in grid.admissible_points(pair) {
        let g = pair.beta_norm2_jet(&p)?.g;
        max = max.max((g[0] * g[0] + g[1] * g[1]).sqrt());
    }
    Ok(max)
}
