//! Harnack-type inequalities for positive solutions of `∂ₜu = Lu`, evaluated
//! as pointwise defect fields (right side minus left side; a non-negative
//! defect means the inequality holds at that node).
//!
//! `∂ₜu` is always taken from the equation as `Lu`, never from time
//! differences. Times are measured from the start of the solution, which is
//! the time origin the inequalities refer to.

use std::fmt;
use std::io::Write;

use crate::error::{invalid, Result};
use crate::geometry::WeightedManifold;
use crate::heatflow::{dt_log_u, HeatState};
use crate::operator::gradient;

/// Default relative tolerance of a report, scaled by the inequality's
/// constant term.
pub const DEFAULT_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Inequality {
    Hamilton,
    LiYau,
    Integrated,
    /// `Kt`-prefactor form of the sup-bound estimate.
    SupBound,
    /// `(K + 1/t)` form of the sup-bound estimate.
    SupBoundVariant,
    KernelDtLower,
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Inequality::Hamilton => "hamilton",
            Inequality::LiYau => "li_yau",
            Inequality::Integrated => "integrated",
            Inequality::SupBound => "sup_bound",
            Inequality::SupBoundVariant => "sup_bound_variant",
            Inequality::KernelDtLower => "kernel_dt_lower",
        })
    }
}

#[derive(Debug, Clone)]
pub struct HarnackReport {
    pub inequality: Inequality,
    pub t: f64,
    pub m: f64,
    pub k: f64,
    /// Sup bound `A`, for the sup-bound estimates.
    pub a: Option<f64>,
    pub defect: Vec<f64>,
    pub min_defect: f64,
    pub argmin: usize,
    /// Natural scale of the inequality (its constant term).
    pub scale: f64,
    pub tol: f64,
    pub ok: bool,
}

impl HarnackReport {
    fn new(inequality: Inequality, t: f64, m: f64, k: f64, a: Option<f64>, defect: Vec<f64>, scale: f64) -> Self {
        let (argmin, min_defect) = defect
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |(j, lo), (i, &d)| if d < lo { (i, d) } else { (j, lo) });
        let tol = DEFAULT_REL_TOL * scale;
        Self {
            inequality,
            t,
            m,
            k,
            a,
            defect,
            min_defect,
            argmin,
            scale,
            tol,
            ok: min_defect >= -tol,
        }
    }

    /// Same report judged against an absolute tolerance.
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self.ok = self.min_defect >= -tol;
        self
    }

    /// Worst defect in units of the natural scale.
    pub fn relative_min_defect(&self) -> f64 {
        self.min_defect / self.scale
    }

    pub fn write_defect_csv<W: Write>(&self, manifold: &WeightedManifold, out: W) -> std::io::Result<()> {
        let label = format!("{} defect t={} m={} K={}", self.inequality, self.t, self.m, self.k);
        crate::operator::write_field_csv(manifold, &label, &self.defect, out)
    }
}

/// Summary CSV: one row per report.
pub fn write_reports_csv<W: Write>(reports: &[HarnackReport], mut out: W) -> std::io::Result<()> {
    writeln!(out, "# witten-lab harnack-report v1")?;
    writeln!(out, "inequality,t,m,K,min_defect,argmin_node,tol,ok")?;
    for r in reports {
        writeln!(
            out,
            "{},{:.17e},{},{:.17e},{:.17e},{},{:.6e},{}",
            r.inequality, r.t, r.m, r.k, r.min_defect, r.argmin, r.tol, r.ok
        )?;
    }
    Ok(())
}

fn check_m(manifold: &WeightedManifold, m: f64) -> Result<()> {
    if !m.is_finite() || m < manifold.dim() as f64 {
        return Err(invalid(
            "m",
            format!("dimension parameter {m} must be finite and at least n = {}", manifold.dim()),
        ));
    }
    Ok(())
}

fn check_k(k: f64) -> Result<()> {
    if !(k.is_finite() && k >= 0.0) {
        return Err(invalid("K", format!("curvature bound {k} must be finite and non-negative")));
    }
    Ok(())
}

fn check_t(t: f64) -> Result<()> {
    if !(t.is_finite() && t > 0.0) {
        return Err(invalid("t", format!("time {t} must be positive")));
    }
    Ok(())
}

/// `(Lu/u, |∇u|²/u²)` per node.
fn log_derivatives(manifold: &WeightedManifold, state: &HeatState) -> Result<(Vec<f64>, Vec<f64>)> {
    let dt = dt_log_u(manifold, state)?;
    let g = gradient(manifold, &state.u);
    let grad_sq = (0..manifold.len())
        .map(|i| g.norm_sq_at(i) / (state.u[i] * state.u[i]))
        .collect();
    Ok((dt, grad_sq))
}

/// `(m/2t)e^{4Kt} + e^{2Kt}·∂ₜu/u − |∇u|²/u²`.
pub fn hamilton_harnack_defect(manifold: &WeightedManifold, state: &HeatState, m: f64, k: f64) -> Result<HarnackReport> {
    check_m(manifold, m)?;
    check_k(k)?;
    let t = state.time;
    check_t(t)?;
    let (dt, grad_sq) = log_derivatives(manifold, state)?;
    let rhs = m / (2.0 * t) * (4.0 * k * t).exp();
    let growth = (2.0 * k * t).exp();
    let defect = dt.iter().zip(&grad_sq).map(|(d, g)| rhs + growth * d - g).collect();
    Ok(HarnackReport::new(Inequality::Hamilton, t, m, k, None, defect, rhs))
}

/// `m/2t + ∂ₜu/u − |∇u|²/u²`.
pub fn li_yau_defect(manifold: &WeightedManifold, state: &HeatState, m: f64) -> Result<HarnackReport> {
    check_m(manifold, m)?;
    let t = state.time;
    check_t(t)?;
    let (dt, grad_sq) = log_derivatives(manifold, state)?;
    let rhs = m / (2.0 * t);
    let defect = dt.iter().zip(&grad_sq).map(|(d, g)| rhs + d - g).collect();
    Ok(HarnackReport::new(Inequality::LiYau, t, m, 0.0, None, defect, rhs))
}

/// Right side of the integrated Harnack inequality.
pub fn integrated_harnack_rhs(m: f64, k: f64, tau: f64, big_t: f64, d: f64) -> f64 {
    let gap = big_t - tau;
    let spatial = 0.25 * (2.0 * k * tau).exp() * (1.0 + 2.0 * k * gap) * d * d / gap;
    let temporal = 0.5 * m * ((2.0 * k * big_t).exp() - (2.0 * k * tau).exp());
    (big_t / tau).powf(0.5 * m) * (spatial + temporal).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratedCheck {
    pub x: usize,
    pub y: usize,
    pub tau: f64,
    pub big_t: f64,
    pub m: f64,
    pub k: f64,
    pub distance: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub tol: f64,
    pub ok: bool,
}

fn snapshot_at(snapshots: &[HeatState], t: f64) -> Result<&HeatState> {
    snapshots
        .iter()
        .find(|s| (s.time - t).abs() <= 1e-12 * t.abs().max(1.0))
        .ok_or_else(|| invalid("snapshots", format!("no snapshot at t = {t}")))
}

#[allow(clippy::too_many_arguments)]
/// `u(x,τ)/u(y,T) ≤ (T/τ)^{m/2} exp{¼e^{2Kτ}[1+2K(T−τ)]d²/(T−τ) + (m/2)[e^{2KT}−e^{2Kτ}]}`.
pub fn integrated_harnack_check(
    manifold: &WeightedManifold,
    snapshots: &[HeatState],
    x: usize,
    y: usize,
    tau: f64,
    big_t: f64,
    m: f64,
    k: f64,
) -> Result<IntegratedCheck> {
    check_m(manifold, m)?;
    check_k(k)?;
    check_t(tau)?;
    if !(tau < big_t) {
        return Err(invalid("tau", format!("need τ < T, got τ = {tau}, T = {big_t}")));
    }
    if x >= manifold.len() || y >= manifold.len() {
        return Err(invalid("x", "node out of range"));
    }
    let early = snapshot_at(snapshots, tau)?;
    let late = snapshot_at(snapshots, big_t)?;
    early.check_positive()?;
    late.check_positive()?;
    let distance = manifold.distance(x, y);
    let lhs = early.u[x] / late.u[y];
    let rhs = integrated_harnack_rhs(m, k, tau, big_t, distance);
    let tol = DEFAULT_REL_TOL;
    Ok(IntegratedCheck {
        x,
        y,
        tau,
        big_t,
        m,
        k,
        distance,
        lhs,
        rhs,
        tol,
        ok: lhs <= rhs * (1.0 + tol),
    })
}

/// All ordered pairs of `nodes`.
pub fn integrated_harnack_pairs(
    manifold: &WeightedManifold,
    snapshots: &[HeatState],
    nodes: &[usize],
    tau: f64,
    big_t: f64,
    m: f64,
    k: f64,
) -> Result<Vec<IntegratedCheck>> {
    let mut out = Vec::with_capacity(nodes.len() * nodes.len());
    for &x in nodes {
        for &y in nodes {
            out.push(integrated_harnack_check(manifold, snapshots, x, y, tau, big_t, m, k)?);
        }
    }
    Ok(out)
}

pub fn write_integrated_csv<W: Write>(checks: &[IntegratedCheck], mut out: W) -> std::io::Result<()> {
    writeln!(out, "# witten-lab integrated-harnack v1")?;
    writeln!(out, "x,y,tau,T,m,K,distance,lhs,rhs,ok")?;
    for c in checks {
        writeln!(
            out,
            "{},{},{},{},{},{:.17e},{:.17e},{:.17e},{:.17e},{}",
            c.x, c.y, c.tau, c.big_t, c.m, c.k, c.distance, c.lhs, c.rhs, c.ok
        )?;
    }
    Ok(())
}

/// Sup of `u` over a run, with the safety factor `1 + 1e−12`.
pub fn sup_over(snapshots: &[HeatState]) -> f64 {
    snapshots
        .iter()
        .map(HeatState::max)
        .fold(f64::NEG_INFINITY, f64::max)
        * (1.0 + 1e-12)
}

/// `K/(1 − e^{−Kt})`, with its `K → 0` limit `1/t`.
pub fn sup_bound_prefactor(k: f64, t: f64) -> f64 {
    let x = k * t;
    if x == 0.0 {
        1.0 / t
    } else {
        // −expm1(−x) = 1 − e^{−x} without cancellation for small x.
        k / -(-x).exp_m1()
    }
}

#[derive(Debug, Clone)]
pub struct SupBoundReports {
    /// `K/(1−e^{−Kt})[m + 4log(A/u)] − ∂ₜu/u − |∇u|²/u²`.
    pub standard: HarnackReport,
    /// `(K + 1/t)[m + 4log(A/u)] − ∂ₜu/u`.
    pub variant: HarnackReport,
}

pub fn sup_bound_defect(manifold: &WeightedManifold, state: &HeatState, m: f64, k: f64, a: f64) -> Result<SupBoundReports> {
    check_m(manifold, m)?;
    check_k(k)?;
    let t = state.time;
    check_t(t)?;
    if !(a.is_finite() && a >= state.max()) {
        return Err(invalid("A", format!("sup bound {a} is below max u = {}", state.max())));
    }
    let (dt, grad_sq) = log_derivatives(manifold, state)?;
    let pre = sup_bound_prefactor(k, t);
    let pre_variant = k + 1.0 / t;
    let bracket: Vec<f64> = state.u.iter().map(|u| m + 4.0 * (a / u).ln()).collect();
    let standard = bracket
        .iter()
        .zip(dt.iter().zip(&grad_sq))
        .map(|(b, (d, g))| pre * b - (d + g))
        .collect();
    let variant = bracket.iter().zip(&dt).map(|(b, d)| pre_variant * b - d).collect();
    Ok(SupBoundReports {
        standard: HarnackReport::new(Inequality::SupBound, t, m, k, Some(a), standard, pre * m),
        variant: HarnackReport::new(Inequality::SupBoundVariant, t, m, k, Some(a), variant, pre_variant * m),
    })
}

#[derive(Debug, Clone)]
pub struct KernelDtReport {
    pub m: f64,
    pub k: f64,
    pub source: usize,
    /// Lower-bound defects `∂ₜlog u + (m/2t)e^{2Kt}`, one per snapshot.
    pub lower: Vec<HarnackReport>,
    /// Smallest `C` with `∂ₜlog u ≤ C(1 + 1/√t + d/t)²` over the run.
    pub fitted_c: f64,
    pub ok: bool,
}

/// Lower bound `∂ₜ log u ≥ −(m/2t)e^{2Kt}` for a kernel run from `source`,
/// plus the fitted constant of the upper shape `(1 + 1/√t + d(x, x0)/t)²`.
pub fn kernel_dt_log_bounds(
    manifold: &WeightedManifold,
    snapshots: &[HeatState],
    source: usize,
    m: f64,
    k: f64,
) -> Result<KernelDtReport> {
    check_m(manifold, m)?;
    check_k(k)?;
    if source >= manifold.len() {
        return Err(invalid("x0", "source node out of range"));
    }
    let mut lower = Vec::with_capacity(snapshots.len());
    let mut fitted_c = f64::NEG_INFINITY;
    for s in snapshots {
        let t = s.time;
        check_t(t)?;
        let dt = dt_log_u(manifold, s)?;
        let bound = m / (2.0 * t) * (2.0 * k * t).exp();
        let defect = dt.iter().map(|d| d + bound).collect();
        lower.push(HarnackReport::new(Inequality::KernelDtLower, t, m, k, None, defect, bound));
        for (i, d) in dt.iter().enumerate() {
            let shape = 1.0 + 1.0 / t.sqrt() + manifold.distance(source, i) / t;
            fitted_c = fitted_c.max(d / (shape * shape));
        }
    }
    let ok = lower.iter().all(|r| r.ok);
    Ok(KernelDtReport {
        m,
        k,
        source,
        lower,
        fitted_c,
        ok,
    })
}
