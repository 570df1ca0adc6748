//! Verdict-producing checks: the Douglas cubic fit, Hamel residuals,
//! classification-equation residuals with recovery of the free scalars,
//! projective-factor formulas and conformality of deformed pairs.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::betacalc::{decompose, BetaDecomposition, GridSpec};
use crate::diffcore::{xy_jet, Direction, Finsler, Point};
use crate::error::{Error, Result};
use crate::fields::{christoffel, MetricPair, LOCUS_THRESHOLD};
use crate::linalg::{least_squares, max_abs};
use crate::phi::PhiFamily;
use crate::spray::{projective_factor, spray_ab, spray_generic, AbMetric};

pub const DEFAULT_TOL_DOUGLAS: f64 = 1e-7;
pub const DEFAULT_TOL_HAMEL: f64 = 1e-7;
pub const DEFAULT_TOL_CLASS: f64 = 1e-6;
pub const DEFAULT_ANGLES: usize = 64;
pub const DIRECTION_SAMPLES: usize = 16;
/// Above this exclusion fraction a report is inconclusive, not pass/fail.
pub const MAX_EXCLUSION_FRACTION: f64 = 0.2;

/// The classification equations, each binding the parameters it needs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class")]
pub enum ClassId {
    DouglasI { k1: f64, k2: f64, k3: f64 },
    DouglasII { c: f64, k: f64 },
    DouglasIII,
    DouglasIV,
    DouglasCor { plus: bool },
    DouglasSing,
    PfI { k1: f64, k2: f64, k3: f64 },
    PfII { c: f64, k: f64 },
    PfIII { m: u32, k: f64 },
    PfIV { m: u32, k: f64 },
    PfCor { plus: bool },
}

impl ClassId {
    pub fn name(&self) -> &'static str {
        match self {
            ClassId::DouglasI { .. } => "DOUGLAS_I",
            ClassId::DouglasII { .. } => "DOUGLAS_II",
            ClassId::DouglasIII => "DOUGLAS_III",
            ClassId::DouglasIV => "DOUGLAS_IV",
            ClassId::DouglasCor { .. } => "DOUGLAS_COR",
            ClassId::DouglasSing => "DOUGLAS_SING",
            ClassId::PfI { .. } => "PF_I",
            ClassId::PfII { .. } => "PF_II",
            ClassId::PfIII { .. } => "PF_III",
            ClassId::PfIV { .. } => "PF_IV",
            ClassId::PfCor { .. } => "PF_COR",
        }
    }

    pub fn is_spray_class(&self) -> bool {
        matches!(
            self,
            ClassId::PfI { .. }
                | ClassId::PfII { .. }
                | ClassId::PfIII { .. }
                | ClassId::PfIV { .. }
                | ClassId::PfCor { .. }
        )
    }
}

/// Scalars recovered by the least-squares fits at one grid point.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct RecoveredScalars {
    pub tau: f64,
    /// The s-term coefficient of the second Douglas class, paired with
    /// its closed-form value for comparison.
    pub d: Option<(f64, f64)>,
    /// 1-form coefficients (c1, c2) of rho for the spray classes.
    pub rho: Option<[f64; 2]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub grid: String,
    pub per_point_residuals: Vec<f64>,
    pub max_residual: f64,
    pub mean_residual: f64,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub recovered: Vec<RecoveredScalars>,
    pub verdict: Verdict,
    pub tolerance: f64,
    pub excluded_points: usize,
    pub total_points: usize,
    pub seed: u64,
}

fn finish_report(
    check: &str,
    grid: &GridSpec,
    residuals: Vec<f64>,
    recovered: Vec<RecoveredScalars>,
    tol: f64,
    excluded: usize,
    total: usize,
    seed: u64,
) -> VerificationReport {
    let max = residuals.iter().fold(0.0f64, |m, r| m.max(*r));
    let mean = if residuals.is_empty() {
        0.0
    } else {
        residuals.iter().sum::<f64>() / residuals.len() as f64
    };
    let verdict = if total == 0 || (excluded as f64) > MAX_EXCLUSION_FRACTION * total as f64 {
        Verdict::Inconclusive
    } else if max <= tol {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    VerificationReport {
        check: check.to_string(),
        grid: format!("{}x{} margin {}", grid.n1, grid.n2, grid.margin),
        per_point_residuals: residuals,
        max_residual: max,
        mean_residual: mean,
        recovered,
        verdict,
        tolerance: tol,
        excluded_points: excluded,
        total_points: total,
        seed,
    }
}

/// Outcome of fitting `G^1 y^2 - G^2 y^1` to a homogeneous cubic over
/// circle samples.
#[derive(Clone, Copy, Debug)]
pub struct DouglasFit {
    /// max |misfit| / max |data| over the usable angles (0/0 -> 0)
    pub residual: f64,
    pub used_angles: usize,
    pub excluded_angles: usize,
}

/// Least-squares fit of the Douglas cubic at one base point, sampling
/// the spray provider over `n_angles` unit directions.
pub fn douglas_fit_residual<G>(provider: G, n_angles: usize) -> Result<DouglasFit>
where
    G: Fn(&Direction) -> Result<[f64; 2]>,
{
    let mut design = Vec::new();
    let mut data = Vec::new();
    let mut excluded = 0usize;
    let mut g_scale = 0.0f64;
    for k in 0..n_angles {
        let th = 2.0 * std::f64::consts::PI * k as f64 / n_angles as f64;
        let (sn, cs) = th.sin_cos();
        let y = Direction::new(cs, sn);
        match provider(&y) {
            Ok(g) => {
                design.push(vec![cs * cs * cs, cs * cs * sn, cs * sn * sn, sn * sn * sn]);
                data.push(g[0] * sn - g[1] * cs);
                g_scale = g_scale.max(g[0].abs()).max(g[1].abs());
            }
            Err(_) => excluded += 1,
        }
    }
    if data.len() < 8 {
        return Err(Error::InsufficientSamples(8));
    }
    let (_, misfit) = least_squares(&design, &data)?;
    let scale = max_abs(&data);
    // a cubic of roundoff noise is a structural zero, not a 100% misfit
    let noise_floor = 1e-10 * g_scale.max(1.0);
    let residual = if scale <= noise_floor {
        0.0
    } else {
        max_abs(&misfit) / scale
    };
    Ok(DouglasFit {
        residual,
        used_angles: data.len(),
        excluded_angles: excluded,
    })
}

/// Douglas cubic fit across the grid, spray coefficients from the
/// (alpha, beta) closed form.
pub fn douglas_check(
    metric: &AbMetric,
    grid: &GridSpec,
    n_angles: usize,
    tol: f64,
) -> VerificationReport {
    let points = grid.admissible_points(&metric.pair);
    let total = points.len();
    let mut residuals = Vec::new();
    let mut excluded = 0usize;
    for p in points {
        let fit = douglas_fit_residual(
            |y| spray_ab(&metric.pair, &metric.family, &p, y).map(|d| d.g),
            n_angles,
        );
        match fit {
            Ok(f) => residuals.push(f.residual),
            Err(_) => excluded += 1,
        }
    }
    finish_report("douglas", grid, residuals, Vec::new(), tol, excluded, total, 0)
}

/// Hamel's projective-flatness residual `F_{x^m y^l} y^m - F_{x^l}`.
pub fn hamel_residual<F: Finsler + ?Sized>(f: &F, p: &Point, y: &Direction) -> Result<[f64; 2]> {
    let j = xy_jet(f, p, y)?;
    let yv = [y.y1, y.y2];
    let mut out = [0.0; 2];
    for (l, o) in out.iter_mut().enumerate() {
        *o = j.f_xy[0][l] * yv[0] + j.f_xy[1][l] * yv[1] - j.f_x[l];
    }
    Ok(out)
}

/// Hamel residual relative to |F_x| at one sample (absolute when F has
/// no x-dependence to compare against).
pub fn hamel_relative<F: Finsler + ?Sized>(f: &F, p: &Point, y: &Direction) -> Result<f64> {
    let j = xy_jet(f, p, y)?;
    let yv = [y.y1, y.y2];
    let mut res = [0.0; 2];
    for (l, r) in res.iter_mut().enumerate() {
        *r = j.f_xy[0][l] * yv[0] + j.f_xy[1][l] * yv[1] - j.f_x[l];
    }
    let rn = (res[0] * res[0] + res[1] * res[1]).sqrt();
    let fx = (j.f_x[0] * j.f_x[0] + j.f_x[1] * j.f_x[1]).sqrt();
    Ok(if fx < 1e-12 { rn } else { rn / fx })
}

/// Hamel scan over grid x directions; samples with |s| above `s_cap`
/// are skipped (for the singular families), evaluation failures count
/// as exclusions.
pub fn hamel_check(
    metric: &AbMetric,
    grid: &GridSpec,
    n_dirs: usize,
    s_cap: Option<f64>,
    tol: f64,
) -> VerificationReport {
    let points = grid.admissible_points(&metric.pair);
    let total = points.len();
    let mut residuals = Vec::new();
    let mut excluded = 0usize;
    for p in points {
        let mut worst: Option<f64> = None;
        let mut point_ok = true;
        for k in 0..n_dirs {
            let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / n_dirs as f64;
            let (sn, cs) = th.sin_cos();
            let y = Direction::new(cs, sn);
            if let Some(cap) = s_cap {
                // skip directions outside the family's sampled cone
                let d = match decompose(&metric.pair, &p) {
                    Ok(d) => d,
                    Err(_) => {
                        point_ok = false;
                        break;
                    }
                };
                let s = d.beta_0([cs, sn]) / d.alpha_0([cs, sn]);
                if s.abs() > cap {
                    continue;
                }
            }
            match hamel_relative(metric, &p, &y) {
                Ok(r) => worst = Some(worst.unwrap_or(0.0).max(r)),
                Err(_) => {
                    point_ok = false;
                    break;
                }
            }
        }
        match (point_ok, worst) {
            (true, Some(w)) => residuals.push(w),
            _ => excluded += 1,
        }
    }
    finish_report("hamel", grid, residuals, Vec::new(), tol, excluded, total, 0)
}

/// Symmetric tensor entries in the fit order (11, 12, 22).
fn sym_entries(t: &[[f64; 2]; 2]) -> [f64; 3] {
    [t[0][0], t[0][1], t[1][1]]
}

fn outer_sym(a: &[f64; 2], b: &[f64; 2]) -> [[f64; 2]; 2] {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i] * b[j] + a[j] * b[i];
        }
    }
    out
}

enum BetaFit {
    /// residual entries and the per-point recovered scalars
    Point(Vec<f64>, RecoveredScalars),
    Excluded,
}

fn beta_fit_at(class: &ClassId, d: &BetaDecomposition) -> Result<BetaFit> {
    let b2 = d.b2;
    let a = d.a;
    let bb = outer_sym(&d.b, &d.b); // 2 b_i b_j as symmetric pair sum
    let bs = outer_sym(&d.b, &d.s_i); // b_i s_j + b_j s_i
    match class {
        ClassId::DouglasI { k1, k2, k3 } => {
            // full b_{i|j} matched: forces the antisymmetric part to zero
            let mut design = Vec::new();
            let mut rhs = Vec::new();
            for i in 0..2 {
                for j in 0..2 {
                    design.push(vec![
                        2.0 * ((1.0 + k1 * b2) * a[i][j] + (k2 * b2 + k3) * 0.5 * bb[i][j]),
                    ]);
                    rhs.push(d.bij[i][j]);
                }
            }
            let (x, misfit) = least_squares(&design, &rhs)?;
            Ok(BetaFit::Point(
                misfit,
                RecoveredScalars {
                    tau: x[0],
                    ..Default::default()
                },
            ))
        }
        ClassId::DouglasII { c, k } => {
            let denom = 1.0 - (k + c) * b2;
            if denom.abs() < LOCUS_THRESHOLD {
                return Ok(BetaFit::Excluded);
            }
            let mut design = Vec::new();
            let mut rhs = Vec::new();
            let tau_col = |i: usize, j: usize| {
                2.0 * ((1.0 + (2.0 * c - k) * b2) * a[i][j]
                    - (k + 3.0 * c - (k + c) * k * b2) * 0.5 * bb[i][j])
            };
            for (i, j) in [(0, 0), (0, 1), (1, 1)] {
                design.push(vec![tau_col(i, j), bs[i][j]]);
                rhs.push(d.r[i][j]);
            }
            let (x, misfit) = least_squares(&design, &rhs)?;
            let d_formula = (3.0 * c - k - (2.0 * c - k) * k * b2) / denom;
            // a rank-deficient s-column (closed beta) leaves d unconstrained
            let s_scale = bs.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
            let d_pair = if s_scale < 1e-12 {
                (d_formula, d_formula)
            } else {
                (x[1], d_formula)
            };
            Ok(BetaFit::Point(
                misfit,
                RecoveredScalars {
                    tau: x[0],
                    d: Some(d_pair),
                    ..Default::default()
                },
            ))
        }
        ClassId::DouglasIII | ClassId::DouglasIV => {
            if b2 < LOCUS_THRESHOLD {
                return Ok(BetaFit::Excluded);
            }
            let mut misfit = Vec::new();
            for (i, j) in [(0, 0), (0, 1), (1, 1)] {
                misfit.push(d.r[i][j] + bs[i][j] / b2);
            }
            Ok(BetaFit::Point(misfit, RecoveredScalars::default()))
        }
        ClassId::DouglasCor { plus } => {
            let sg = if *plus { 1.0 } else { -1.0 };
            let denom = sg - b2;
            if denom.abs() < LOCUS_THRESHOLD {
                return Ok(BetaFit::Excluded);
            }
            let mut design = Vec::new();
            let mut rhs = Vec::new();
            for (i, j) in [(0, 0), (0, 1), (1, 1)] {
                design.push(vec![
                    2.0 * ((1.0 + sg * 2.0 * b2) * a[i][j] - sg * 3.0 * 0.5 * bb[i][j]),
                ]);
                rhs.push(d.r[i][j] - 3.0 / denom * bs[i][j]);
            }
            let (x, misfit) = least_squares(&design, &rhs)?;
            Ok(BetaFit::Point(
                misfit,
                RecoveredScalars {
                    tau: x[0],
                    ..Default::default()
                },
            ))
        }
        ClassId::DouglasSing => {
            if b2 < LOCUS_THRESHOLD {
                return Ok(BetaFit::Excluded);
            }
            let mut design = Vec::new();
            let mut rhs = Vec::new();
            for (i, j) in [(0, 0), (0, 1), (1, 1)] {
                design.push(vec![2.0 * (b2 * a[i][j] - 0.5 * bb[i][j])]);
                rhs.push(d.r[i][j] + bs[i][j] / b2);
            }
            let (x, misfit) = least_squares(&design, &rhs)?;
            Ok(BetaFit::Point(
                misfit,
                RecoveredScalars {
                    tau: x[0],
                    ..Default::default()
                },
            ))
        }
        _ => Err(Error::Config(format!(
            "{} is a spray-identity class, not a beta class",
            class.name()
        ))),
    }
}

/// Classification residual of the beta equation of `class` over the grid.
pub fn class_beta_residual(
    class: &ClassId,
    pair: &MetricPair,
    grid: &GridSpec,
    tol: f64,
) -> Result<VerificationReport> {
    if class.is_spray_class() {
        return Err(Error::Config(format!(
            "{} needs class_spray_residual",
            class.name()
        )));
    }
    let points = grid.admissible_points(pair);
    let total = points.len();
    let mut residuals = Vec::new();
    let mut recovered = Vec::new();
    let mut excluded = 0usize;
    for p in points {
        let dec = match decompose(pair, &p) {
            Ok(d) => d,
            Err(_) => {
                excluded += 1;
                continue;
            }
        };
        match beta_fit_at(class, &dec) {
            Ok(BetaFit::Point(misfit, rec)) => {
                residuals.push(max_abs(&misfit));
                recovered.push(rec);
            }
            Ok(BetaFit::Excluded) => excluded += 1,
            Err(Error::Config(msg)) => return Err(Error::Config(msg)),
            Err(_) => excluded += 1,
        }
    }
    Ok(finish_report(
        &format!("class:{}", class.name()),
        grid,
        residuals,
        recovered,
        tol,
        excluded,
        total,
        0,
    ))
}

struct SprayFitRow {
    design: Vec<f64>,
    rhs: f64,
}

/// Build the per-direction rows of the spray-identity fit at one point.
/// Unknown layout: [c1, c2] or [c1, c2, tau].
fn spray_fit_rows(
    class: &ClassId,
    d: &BetaDecomposition,
    g_alpha: &dyn Fn([f64; 2]) -> [f64; 2],
    y: [f64; 2],
) -> Result<Vec<SprayFitRow>> {
    let alpha2 = {
        let a = d.alpha_0(y);
        a * a
    };
    let beta = d.beta_0(y);
    let beta2 = beta * beta;
    let b2 = d.b2;
    let ga = g_alpha(y);
    let mut rows = Vec::with_capacity(2);
    for i in 0..2 {
        // rho y^i contributes c1 y^1 y^i + c2 y^2 y^i
        let rho_cols = [y[0] * y[i], y[1] * y[i]];
        let (tau_col, known) = match class {
            ClassId::PfI { k1, k2, .. } => {
                (Some(-(k1 * alpha2 + k2 * beta2) * d.b_up[i]), 0.0)
            }
            ClassId::PfII { c, k } => {
                let denom = 1.0 - (c + k) * b2;
                if denom.abs() < LOCUS_THRESHOLD {
                    return Err(Error::SprayFormulaSingular);
                }
                let tau_col = -((2.0 * c - k) * alpha2 + (c + k) * k * beta2) * d.b_up[i];
                let known = ((2.0 * c - k) * (1.0 - k * b2) * alpha2 + c * k * beta2) / denom
                    * d.s_up[i];
                (Some(tau_col), known)
            }
            ClassId::PfIII { m, k } => {
                if b2 < LOCUS_THRESHOLD {
                    return Err(Error::SprayFormulaSingular);
                }
                let mf = *m as f64;
                (
                    None,
                    -((2.0 * mf - 1.0) * alpha2 + k * beta2) / (2.0 * mf * b2) * d.s_up[i],
                )
            }
            ClassId::PfIV { m, k } => {
                if b2 < LOCUS_THRESHOLD {
                    return Err(Error::SprayFormulaSingular);
                }
                let mf = *m as f64;
                (
                    None,
                    -(2.0 * (mf - 1.0) * alpha2 + k * beta2) / ((2.0 * mf - 1.0) * b2)
                        * d.s_up[i],
                )
            }
            ClassId::PfCor { plus } => {
                let sg = if *plus { 1.0 } else { -1.0 };
                let denom = b2 - sg;
                if denom.abs() < LOCUS_THRESHOLD {
                    return Err(Error::SprayFormulaSingular);
                }
                (
                    Some(-sg * 2.0 * alpha2 * d.b_up[i]),
                    -2.0 * alpha2 / denom * d.s_up[i],
                )
            }
            _ => {
                return Err(Error::Config(format!(
                    "{} is a beta class, not a spray-identity class",
                    class.name()
                )))
            }
        };
        let mut design = vec![rho_cols[0], rho_cols[1]];
        if let Some(t) = tau_col {
            design.push(t);
        }
        rows.push(SprayFitRow {
            design,
            rhs: ga[i] - known,
        });
    }
    Ok(rows)
}

fn spray_fit_at(
    class: &ClassId,
    pair: &MetricPair,
    p: &Point,
    n_dirs: usize,
) -> Result<(Vec<f64>, RecoveredScalars)> {
    let ch = christoffel(pair, p)?;
    let d = decompose(pair, p)?;
    let mut design = Vec::new();
    let mut rhs = Vec::new();
    for k in 0..n_dirs {
        let th = 2.0 * std::f64::consts::PI * k as f64 / n_dirs as f64;
        let (sn, cs) = th.sin_cos();
        let rows = spray_fit_rows(class, &d, &|y| ch.spray(y), [cs, sn])?;
        for row in rows {
            design.push(row.design);
            rhs.push(row.rhs);
        }
    }
    let (x, misfit) = least_squares(&design, &rhs)?;
    let rec = RecoveredScalars {
        tau: if x.len() > 2 { x[2] } else { 0.0 },
        d: None,
        rho: Some([x[0], x[1]]),
    };
    Ok((misfit, rec))
}

/// Residual of the class's spray identity for G_alpha over the grid,
/// with rho (and tau where present) recovered per point.
pub fn class_spray_residual(
    class: &ClassId,
    pair: &MetricPair,
    grid: &GridSpec,
    tol: f64,
) -> Result<VerificationReport> {
    if !class.is_spray_class() {
        return Err(Error::Config(format!(
            "{} needs class_beta_residual",
            class.name()
        )));
    }
    let points = grid.admissible_points(pair);
    let total = points.len();
    let mut residuals = Vec::new();
    let mut recovered = Vec::new();
    let mut excluded = 0usize;
    for p in points {
        match spray_fit_at(class, pair, &p, DIRECTION_SAMPLES) {
            Ok((misfit, rec)) => {
                residuals.push(max_abs(&misfit));
                recovered.push(rec);
            }
            Err(Error::Config(msg)) => return Err(Error::Config(msg)),
            Err(_) => excluded += 1,
        }
    }
    Ok(finish_report(
        &format!("class:{}", class.name()),
        grid,
        residuals,
        recovered,
        tol,
        excluded,
        total,
        0,
    ))
}

/// Closed-form projective factor of the class against the direct
/// `F_{x^m}y^m / (2F)`, with rho and tau refit at the point.
pub fn projective_factor_check(
    class: &ClassId,
    pair: &MetricPair,
    family: &PhiFamily,
    p: &Point,
    y: &Direction,
) -> Result<f64> {
    let (misfit, rec) = spray_fit_at(class, pair, p, DIRECTION_SAMPLES)?;
    if max_abs(&misfit) > 1e-4 {
        return Err(Error::PrerequisiteFailed(format!(
            "{} spray identity does not hold at the point",
            class.name()
        )));
    }
    let d = decompose(pair, p)?;
    let yv = [y.y1, y.y2];
    let alpha = d.alpha_0(yv);
    let s = d.beta_0(yv) / alpha;
    let s0 = d.s_0(yv);
    let (phi, dphi, _) = family.phi_jet(s)?;
    let [c1, c2] = rec.rho.unwrap();
    let rho = c1 * yv[0] + c2 * yv[1];
    let tau = rec.tau;
    let b2 = d.b2;
    let p_formula = match class {
        ClassId::PfI { k1, k2, k3 } => {
            rho + tau
                * alpha
                * ((1.0 + (k1 + k3) * s * s + k2 * s.powi(4)) * dphi / phi
                    - (k1 + k2 * s * s) * s)
        }
        ClassId::PfII { c, k } => {
            let sig1 = ((k - 2.0 * c) * (c - k) * k * b2 + 4.0 * c * c - 3.0 * k * c + k * k)
                * s
                * s
                + (2.0 * c - k) * (1.0 - k * b2);
            let sig2 = (1.0 - (c + k) * b2) * (1.0 + (c - k) * s * s);
            rho - 4.0 * c * c * s.powi(3) / (1.0 + (c - k) * s * s) * tau * alpha
                + sig1 / sig2 * s0
        }
        ClassId::PfIII { m, k } => {
            let mf = *m as f64;
            rho - (s * (1.0 - k * s * s) * dphi + ((2.0 * mf - 1.0) + k * s * s) * phi)
                / (2.0 * mf * b2 * phi)
                * s0
        }
        ClassId::PfIV { m, k } => {
            let mf = *m as f64;
            rho - (s * (1.0 - k * b2) * dphi + (2.0 * (mf - 1.0) + k * s * s) * phi)
                / ((2.0 * mf - 1.0) * b2 * phi)
                * s0
        }
        ClassId::PfCor { plus } => {
            let sg = if *plus { 1.0 } else { -1.0 };
            rho - 4.0 * s.powi(3) / (1.0 + sg * s * s) * tau * alpha
                - 2.0 * (2.0 * s * s + sg) / ((b2 - sg) * (s * s + sg)) * s0
        }
        _ => {
            return Err(Error::Config(format!(
                "{} has no projective-factor formula",
                class.name()
            )))
        }
    };
    let metric = AbMetric::new(pair.clone(), family.clone());
    let p_direct = projective_factor(&metric, p, y)?;
    Ok((p_formula - p_direct).abs() / p_direct.abs().max(1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConformalityMode {
    /// fit r_ij = lambda a_ij
    Thm2,
    /// fit the full b_{i|j} = lambda a_ij (conformal and closed)
    Thm001,
}

/// Conformality of the deformed pair: the symmetrized covariant
/// derivative must be pointwise proportional to the metric.
pub fn conformality_residual(
    pair: &MetricPair,
    mode: ConformalityMode,
    grid: &GridSpec,
    tol: f64,
) -> Result<VerificationReport> {
    let points = grid.admissible_points(pair);
    let total = points.len();
    let mut residuals = Vec::new();
    let mut recovered = Vec::new();
    let mut excluded = 0usize;
    for p in points {
        let d = match decompose(pair, &p) {
            Ok(d) => d,
            Err(_) => {
                excluded += 1;
                continue;
            }
        };
        let (entries, targets): (Vec<f64>, Vec<f64>) = match mode {
            ConformalityMode::Thm2 => (
                sym_entries(&d.a).to_vec(),
                sym_entries(&d.r).to_vec(),
            ),
            ConformalityMode::Thm001 => {
                let mut e = Vec::new();
                let mut t = Vec::new();
                for i in 0..2 {
                    for j in 0..2 {
                        e.push(d.a[i][j]);
                        t.push(d.bij[i][j]);
                    }
                }
                (e, t)
            }
        };
        let design: Vec<Vec<f64>> = entries.iter().map(|&e| vec![e]).collect();
        match least_squares(&design, &targets) {
            Ok((x, misfit)) => {
                residuals.push(max_abs(&misfit));
                recovered.push(RecoveredScalars {
                    tau: x[0],
                    ..Default::default()
                });
            }
            Err(_) => excluded += 1,
        }
    }
    Ok(finish_report(
        &format!("conformality:{mode:?}"),
        grid,
        residuals,
        recovered,
        tol,
        excluded,
        total,
        0,
    ))
}

/// Max normalized disagreement between the generic and the closed-form
/// spray at `n` seeded random regular samples.
pub fn spray_cross_validation(
    pair: &MetricPair,
    family: &PhiFamily,
    n: usize,
    seed: u64,
) -> Result<f64> {
    let metric = AbMetric::new(pair.clone(), family.clone());
    let inner = pair.domain.shrunk(0.05);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut accepted = 0usize;
    let mut attempts = 0usize;
    while accepted < n {
        attempts += 1;
        if attempts > 100 * n {
            return Err(Error::InsufficientSamples(n));
        }
        let p = Point::new(
            rng.gen_range(inner.x1.0..=inner.x1.1),
            rng.gen_range(inner.x2.0..=inner.x2.1),
        );
        if !pair.admissible(&p) {
            continue;
        }
        let th = rng.gen_range(0.0..std::f64::consts::TAU);
        let y = Direction::new(th.cos(), th.sin());
        let (generic, ab) = match (
            spray_generic(&metric, &p, &y),
            spray_ab(pair, family, &p, &y),
        ) {
            (Ok(g), Ok(a)) => (g, a),
            _ => continue,
        };
        let diff = ((generic[0] - ab.g[0]).powi(2) + (generic[1] - ab.g[1]).powi(2)).sqrt();
        let scale = (generic[0] * generic[0] + generic[1] * generic[1]).sqrt().max(1.0);
        worst = worst.max(diff / scale);
        accepted += 1;
    }
    Ok(worst)
}
