//! Boltzmann entropy, the normalized entropy `H_{m,K}`, the W-entropy
//! `W_{m,K} = d/dt(t·H_{m,K})` and the four-term formula for `dW/dt`.
//!
//! `Φ_{m,K}` is the antiderivative of `(m/2t)e^{4Kt}` fixed so that `K = 0`
//! gives `(m/2)(log 4πt + 1)`:
//! `Φ_{m,K}(t) = (m/2)(log 4πt + 1) + (m/2)·Σ_{j≥1} (4Kt)^j/(j·j!)`.

use std::f64::consts::PI;
use std::io::Write;

use crate::error::{invalid, Result};
use crate::geometry::{bakry_emery_tensor, rank_one_coefficient, WeightedManifold};
use crate::heatflow::{advance, evolve_on_path, EvolveOptions, HeatState, ManifoldPath, Scheme};
use crate::operator::{gamma2, gradient, gradient_and_hessian, SymTensorField};

fn check_t(t: f64) -> Result<()> {
    if !(t.is_finite() && t > 0.0) {
        return Err(invalid("t", format!("time {t} must be positive")));
    }
    Ok(())
}

fn check_mk(m: f64, k: f64) -> Result<()> {
    if !(m.is_finite() && m > 0.0) {
        return Err(invalid("m", format!("dimension parameter {m} must be finite and positive")));
    }
    if !(k.is_finite() && k >= 0.0) {
        return Err(invalid("K", format!("curvature bound {k} must be finite and non-negative")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub value: f64,
    /// Bound on the neglected tail.
    pub remainder: f64,
    pub terms: usize,
}

/// `Σ_{j≥1} x^j/(j·j!)` for `x ≥ 0`, summed until the geometric tail bound
/// drops below `1e−17` of the partial sum.
pub fn exponential_integral_series(x: f64) -> SeriesSum {
    if x == 0.0 {
        return SeriesSum {
            value: 0.0,
            remainder: 0.0,
            terms: 0,
        };
    }
    // term_j = x^j / (j·j!), and term_{j+1}/term_j = x·j/(j+1)².
    let mut power = x; // x^j / j!
    let mut sum = x;
    let mut j = 1usize;
    loop {
        let jf = j as f64;
        power *= x / (jf + 1.0);
        let next = power / (jf + 1.0);
        sum += next;
        j += 1;
        let ratio = x / (j as f64 + 1.0);
        if ratio < 0.5 {
            let remainder = next * ratio / (1.0 - ratio);
            if remainder <= 1e-17 * sum || !sum.is_finite() {
                return SeriesSum {
                    value: sum,
                    remainder,
                    terms: j,
                };
            }
        }
    }
}

/// `Φ_{m,K}(t)` with its series remainder bound.
pub fn phi_mk_series(t: f64, m: f64, k: f64) -> Result<SeriesSum> {
    check_t(t)?;
    check_mk(m, k)?;
    let s = exponential_integral_series(4.0 * k * t);
    Ok(SeriesSum {
        value: 0.5 * m * ((4.0 * PI * t).ln() + 1.0) + 0.5 * m * s.value,
        remainder: 0.5 * m * s.remainder,
        terms: s.terms,
    })
}

pub fn phi_mk(t: f64, m: f64, k: f64) -> Result<f64> {
    phi_mk_series(t, m, k).map(|s| s.value)
}

/// `Φ′_{m,K}(t) = (m/2t)e^{4Kt}`.
pub fn phi_mk_derivative(t: f64, m: f64, k: f64) -> f64 {
    m / (2.0 * t) * (4.0 * k * t).exp()
}

/// `−(m/2t)[e^{4Kt}(1+4Kt) − (1+Kt)²]`, the monotonicity bound and the
/// fourth term of the `dW/dt` formula.
pub fn monotonicity_bound(t: f64, m: f64, k: f64) -> f64 {
    let x = k * t;
    -m / (2.0 * t) * ((4.0 * x).exp() * (1.0 + 4.0 * x) - (1.0 + x) * (1.0 + x))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyValue {
    /// `H = −∫u log u dμ`
    pub h: f64,
    /// `dH/dt = ∫|∇log u|² u dμ`
    pub dh_dt: f64,
}

pub fn entropy_h(manifold: &WeightedManifold, state: &HeatState) -> Result<EntropyValue> {
    state.check_positive()?;
    let w = manifold.weights();
    let h = -state
        .u
        .iter()
        .zip(w)
        .map(|(u, w)| u * u.ln() * w)
        .sum::<f64>();
    let g = gradient(manifold, &state.u);
    let dh_dt = (0..manifold.len())
        .map(|i| g.norm_sq_at(i) / state.u[i] * w[i])
        .sum();
    Ok(EntropyValue { h, dh_dt })
}

/// `d²H/dt² = −2∫Γ₂(∇log u, ∇log u) u dμ`.
pub fn entropy_second_derivative(manifold: &WeightedManifold, state: &HeatState) -> Result<f64> {
    second_derivative_with_shift(manifold, state, 0.0)
}

/// Same with `Ric(L)` replaced by `shift·g + Ric(L)` (the `½∂ₜg` term of a
/// conformal flow).
pub(crate) fn second_derivative_with_shift(manifold: &WeightedManifold, state: &HeatState, shift: f64) -> Result<f64> {
    state.check_positive()?;
    let f: Vec<f64> = state.u.iter().map(|u| u.ln()).collect();
    let g2 = gamma2(manifold, &f);
    let grad = if shift != 0.0 { Some(gradient(manifold, &f)) } else { None };
    Ok(-2.0
        * (0..manifold.len())
            .map(|i| {
                let extra = grad.as_ref().map_or(0.0, |g| shift * g.norm_sq_at(i));
                (g2[i] + extra) * state.u[i] * manifold.weights()[i]
            })
            .sum::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WEntropy {
    pub h: f64,
    pub dh_dt: f64,
    pub phi: f64,
    pub h_mk: f64,
    pub w: f64,
}

/// `H_{m,K} = H − Φ` and `W_{m,K} = H_{m,K} + t(dH/dt − Φ′)`.
pub fn w_entropy(manifold: &WeightedManifold, state: &HeatState, m: f64, k: f64) -> Result<WEntropy> {
    let t = state.time;
    let phi = phi_mk(t, m, k)?;
    let e = entropy_h(manifold, state)?;
    let h_mk = e.h - phi;
    Ok(WEntropy {
        h: e.h,
        dh_dt: e.dh_dt,
        phi,
        h_mk,
        w: h_mk + t * (e.dh_dt - phi_mk_derivative(t, m, k)),
    })
}

/// Normalization of the alternative entropy `H̃_{m,K} = H − N(t)`:
/// `N(t) = (m/2)(1 + log 4πt) + (mKt/2)(1 + Kt/6)`.
pub fn tilde_normalization(t: f64, m: f64, k: f64) -> (f64, f64) {
    let value = 0.5 * m * (1.0 + (4.0 * PI * t).ln()) + 0.5 * m * k * t * (1.0 + k * t / 6.0);
    let derivative = m / (2.0 * t) + 0.5 * m * k + m * k * k * t / 6.0;
    (value, derivative)
}

/// `W̃_{m,K} = d/dt(t·H̃_{m,K})`.
pub fn tilde_w_entropy(manifold: &WeightedManifold, state: &HeatState, m: f64, k: f64) -> Result<f64> {
    let t = state.time;
    check_t(t)?;
    check_mk(m, k)?;
    let e = entropy_h(manifold, state)?;
    let (n, dn) = tilde_normalization(t, m, k);
    Ok(e.h - n + t * (e.dh_dt - dn))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TildeComparison {
    /// `Ψ = Φ_{m,K} − N`
    pub psi: f64,
    /// `d/dt(tΨ)`, which equals `W̃ − W`
    pub d_dt_tpsi: f64,
    /// `d²/dt²(tΨ)` from the termwise-differentiated series
    pub d2_dt2_tpsi: f64,
    /// `(m/2t)[e^{4Kt}(1+4Kt) − (1+Kt)²]`
    pub target: f64,
    pub identity_residual: f64,
}

/// `Σ_{j≥1} (4K)^j t^{j−1}/j!`, the `t`-derivative of the Φ series.
fn series_derivative(t: f64, k: f64) -> f64 {
    let x = 4.0 * k * t;
    if x == 0.0 {
        return 0.0;
    }
    // Σ_{j≥1} x^{j−1}/j! · 4K
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut j = 1.0;
    while term > 1e-18 * sum {
        j += 1.0;
        term *= x / j;
        sum += term;
    }
    4.0 * k * sum
}

pub fn tilde_w_comparison(m: f64, k: f64, t: f64) -> Result<TildeComparison> {
    check_t(t)?;
    check_mk(m, k)?;
    let phi = phi_mk(t, m, k)?;
    let (n, dn) = tilde_normalization(t, m, k);
    let psi = phi - n;
    let d_dt_tpsi = psi + t * (phi_mk_derivative(t, m, k) - dn);
    // d²/dt²(tΨ) = 2Ψ′ + tΨ″, with Φ′ = (m/2t) + (m/2)S′ and Φ″ from S″.
    let s1 = series_derivative(t, k);
    let x = 4.0 * k * t;
    let s2 = if x == 0.0 {
        0.0
    } else {
        // S″(t) = d/dt[(e^{4Kt} − 1)/t]
        (4.0 * k * t * (4.0 * k * t).exp() - (4.0 * k * t).exp_m1()) / (t * t)
    };
    let dphi = m / (2.0 * t) + 0.5 * m * s1;
    let d2phi = -m / (2.0 * t * t) + 0.5 * m * s2;
    let d2n = -m / (2.0 * t * t) + m * k * k / 6.0;
    let d2_dt2_tpsi = 2.0 * (dphi - dn) + t * (d2phi - d2n);
    let target = -monotonicity_bound(t, m, k);
    Ok(TildeComparison {
        psi,
        d_dt_tpsi,
        d2_dt2_tpsi,
        target,
        identity_residual: d2_dt2_tpsi - target,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
    pub formula: f64,
}

/// Four-term formula for `dW_{m,K}/dt`:
/// `T1 = −2t∫|∇²log u + (K/2 + 1/2t)g|² u`,
/// `T2 = −2t∫(Ric_{m,n}(L) + Kg)(∇log u, ∇log u) u`,
/// `T3 = −(2t/(m−n))∫|∇φ·∇log u − (m−n)(1+Kt)/2t|² u`,
/// `T4 = −(m/2t)[e^{4Kt}(1+4Kt) − (1+Kt)²]`.
/// With `m = n` (constant φ only) `T3 = 0`.
pub fn w_derivative_decomposition(manifold: &WeightedManifold, state: &HeatState, m: f64, k: f64) -> Result<Decomposition> {
    decomposition_with_shift(manifold, state, m, k, 0.0)
}

/// Decomposition with `shift·g` added to the tensor in `T2`.
pub(crate) fn decomposition_with_shift(
    manifold: &WeightedManifold,
    state: &HeatState,
    m: f64,
    k: f64,
    shift: f64,
) -> Result<Decomposition> {
    let t = state.time;
    check_t(t)?;
    check_mk(m, k)?;
    if m.is_infinite() {
        return Err(invalid("m", "the W-entropy formula needs finite m"));
    }
    let coeff = rank_one_coefficient(manifold, m)?;
    state.check_positive()?;
    let ric = SymTensorField {
        dim: manifold.dim(),
        entries: bakry_emery_tensor(manifold, m)?,
    };
    let f: Vec<f64> = state.u.iter().map(|u| u.ln()).collect();
    let (g, hess) = gradient_and_hessian(manifold, &f);
    let gphi = gradient(manifold, manifold.potential());
    let w = manifold.weights();
    let c = 0.5 * k + 0.5 / t;
    let gap = m - manifold.dim() as f64;
    let target = gap * (1.0 + k * t) / (2.0 * t);
    let (mut i1, mut i2, mut i3) = (0.0, 0.0, 0.0);
    for i in 0..manifold.len() {
        let uw = state.u[i] * w[i];
        i1 += hess.shifted_norm_sq_at(i, c) * uw;
        i2 += (ric.quad_at(i, &g) + (k + shift) * g.norm_sq_at(i)) * uw;
        if coeff > 0.0 {
            let d = gphi.dot_at(&g, i) - target;
            i3 += d * d * uw;
        }
    }
    let t1 = -2.0 * t * i1;
    let t2 = -2.0 * t * i2;
    let t3 = -2.0 * t * coeff * i3;
    let t4 = monotonicity_bound(t, m, k);
    Ok(Decomposition {
        t1,
        t2,
        t3,
        t4,
        formula: t1 + t2 + t3 + t4,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalTerms {
    /// `−2t∫|∇²log u + g/2t|² u`
    pub hessian: f64,
    /// `−2t∫Ric_{m,n}(L)(∇log u, ∇log u) u`
    pub ricci: f64,
    /// `−(2t/(m−n))∫(∇log u·∇φ − (m−n)/2t)² u`
    pub drift: f64,
    pub total: f64,
}

/// The `K = 0` formula for `dW_m/dt`, assembled term by term on its own.
pub fn classical_w_derivative(manifold: &WeightedManifold, state: &HeatState, m: f64) -> Result<ClassicalTerms> {
    let t = state.time;
    check_t(t)?;
    state.check_positive()?;
    let coeff = rank_one_coefficient(manifold, m)?;
    let n = manifold.dim() as f64;
    let ric = bakry_emery_tensor(manifold, m)?;
    let f: Vec<f64> = state.u.iter().map(|u| u.ln()).collect();
    let (g, hess) = gradient_and_hessian(manifold, &f);
    let gphi = gradient(manifold, manifold.potential());
    let mut hessian = 0.0;
    let mut ricci = 0.0;
    let mut drift = 0.0;
    for i in 0..manifold.len() {
        let uw = state.u[i] * manifold.weights()[i];
        let h = hess.entries[i];
        let r = ric[i];
        let s = 1.0 / (2.0 * t);
        let (hn, rq) = if manifold.dim() == 1 {
            let gx = g.components[0][i];
            ((h[0] + s).powi(2), r[0] * gx * gx)
        } else {
            let (gx, gy) = (g.components[0][i], g.components[1][i]);
            (
                (h[0] + s).powi(2) + 2.0 * h[1] * h[1] + (h[2] + s).powi(2),
                r[0] * gx * gx + 2.0 * r[1] * gx * gy + r[2] * gy * gy,
            )
        };
        hessian += hn * uw;
        ricci += rq * uw;
        if coeff > 0.0 {
            let d = g.dot_at(&gphi, i) - (m - n) / (2.0 * t);
            drift += d * d * uw;
        }
    }
    let hessian = -2.0 * t * hessian;
    let ricci = -2.0 * t * ricci;
    let drift = -2.0 * t * coeff * drift;
    Ok(ClassicalTerms {
        hessian,
        ricci,
        drift,
        total: hessian + ricci + drift,
    })
}

/// One row of an entropy series, evaluated at `t` from the states at
/// `t − h`, `t`, `t + h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyRow {
    pub t: f64,
    pub h: f64,
    pub dh_dt: f64,
    pub d2h_dt2: f64,
    /// Centered differences of `H`.
    pub dh_dt_fd: f64,
    pub d2h_dt2_fd: f64,
    pub phi: f64,
    pub h_mk: f64,
    pub w: f64,
    pub w_tilde: f64,
    /// Centered difference of `W_{m,K}`.
    pub dw_dt_numeric: f64,
    pub terms: Decomposition,
    pub residual: f64,
    pub bound: f64,
    /// Super Ricci flow margin on flows.
    pub margin: Option<f64>,
}

impl EntropyRow {
    /// `|dW_numeric − formula| / (1 + |formula|)`.
    pub fn relative_residual(&self) -> f64 {
        self.residual.abs() / (1.0 + self.terms.formula.abs())
    }

    pub fn dh_relative_error(&self) -> f64 {
        (self.dh_dt - self.dh_dt_fd).abs() / self.dh_dt.abs().max(f64::MIN_POSITIVE)
    }

    pub fn d2h_relative_error(&self) -> f64 {
        (self.d2h_dt2 - self.d2h_dt2_fd).abs() / self.d2h_dt2.abs().max(f64::MIN_POSITIVE)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropySeries {
    pub m: f64,
    pub k: f64,
    /// Half-width of the centered differences.
    pub fd_step: f64,
    pub rows: Vec<EntropyRow>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOptions {
    pub fd_step: f64,
    /// Crank–Nicolson substeps per `fd_step` inside each stencil.
    pub substeps: usize,
    pub evolve: EvolveOptions,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self {
            fd_step: 1e-3,
            substeps: 20,
            evolve: EvolveOptions {
                error_target: 1e-9,
                ..EvolveOptions::default()
            },
        }
    }
}

/// Evolves `initial` and assembles an entropy row at each probe time. Each
/// stencil is integrated with fixed substeps so that the centered
/// differences see a smooth trajectory.
pub fn entropy_series(
    manifold: &WeightedManifold,
    initial: &HeatState,
    probe_times: &[f64],
    m: f64,
    k: f64,
    options: &SeriesOptions,
) -> Result<EntropySeries> {
    series_on_path(manifold, initial, probe_times, m, k, options, |_| Ok((0.0, None)))
}

/// `extra(t)` returns the `½∂ₜg` coefficient at `t` and an optional flow
/// margin for the row.
pub(crate) fn series_on_path<P, F>(
    path: &P,
    initial: &HeatState,
    probe_times: &[f64],
    m: f64,
    k: f64,
    options: &SeriesOptions,
    extra: F,
) -> Result<EntropySeries>
where
    P: ManifoldPath + ?Sized,
    F: Fn(f64) -> Result<(f64, Option<f64>)>,
{
    check_mk(m, k)?;
    let h = options.fd_step;
    if !(h > 0.0) || options.substeps == 0 {
        return Err(invalid("fd_step", "finite-difference step and substeps must be positive"));
    }
    if probe_times.windows(2).any(|w| w[1] - w[0] < 2.0 * h) {
        return Err(invalid("times", "probe times must ascend with gaps of at least 2·fd_step"));
    }
    let mut rows = Vec::with_capacity(probe_times.len());
    let mut state = initial.clone();
    for &t in probe_times {
        if t - h <= initial.time {
            return Err(invalid("times", format!("probe time {t} leaves no room for the stencil")));
        }
        let ev = evolve_on_path(path, &state, &[t - h], &options.evolve, true)?;
        let start = ev.snapshots.into_iter().next().expect("one snapshot");
        let mut stencil = vec![start.clone()];
        let dt = h / options.substeps as f64;
        let mut cur = start;
        for leg in 0..2 {
            for j in 0..options.substeps {
                let t0 = t - h + (leg * options.substeps + j) as f64 * dt;
                let (u, _) = advance(path, t0, &cur.u, dt, Scheme::CrankNicolson)?;
                cur = HeatState::new(t0 + dt, u);
            }
            cur.time = t + leg as f64 * h;
            cur.check_positive()?;
            stencil.push(cur.clone());
        }

        let mut values = Vec::with_capacity(3);
        for s in &stencil {
            let mf = path.at(s.time)?;
            let we = w_entropy(&mf, s, m, k)?;
            let (n, dn) = tilde_normalization(s.time, m, k);
            values.push((we, we.h - n + s.time * (we.dh_dt - dn)));
        }
        let mid = &stencil[1];
        let mf = path.at(t)?;
        let (shift, margin) = extra(t)?;
        let terms = decomposition_with_shift(&mf, mid, m, k, shift)?;
        let d2h = second_derivative_with_shift(&mf, mid, shift)?;
        let (lo, c, hi) = (values[0].0, values[1].0, values[2].0);
        let dw = (hi.w - lo.w) / (2.0 * h);
        rows.push(EntropyRow {
            t,
            h: c.h,
            dh_dt: c.dh_dt,
            d2h_dt2: d2h,
            dh_dt_fd: (hi.h - lo.h) / (2.0 * h),
            d2h_dt2_fd: (hi.h - 2.0 * c.h + lo.h) / (h * h),
            phi: c.phi,
            h_mk: c.h_mk,
            w: c.w,
            w_tilde: values[1].1,
            dw_dt_numeric: dw,
            terms,
            residual: dw - terms.formula,
            bound: terms.t4,
            margin,
        });
        state = stencil.pop().expect("stencil end");
    }
    Ok(EntropySeries {
        m,
        k,
        fd_step: h,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityCheck {
    pub ok: bool,
    /// Largest `formula − bound` over the rows.
    pub worst_excess: f64,
    pub slack: f64,
}

/// `dW/dt (formula) ≤ −(m/2t)[e^{4Kt}(1+4Kt) − (1+Kt)²] + slack` at every
/// row; the slack is relative to `1 + |bound|`.
pub fn w_monotonicity_check(series: &EntropySeries, rel_slack: f64) -> MonotonicityCheck {
    let mut worst = f64::NEG_INFINITY;
    let mut ok = true;
    for r in &series.rows {
        let excess = r.terms.formula - r.bound;
        worst = worst.max(excess);
        if excess > rel_slack * (1.0 + r.bound.abs()) {
            ok = false;
        }
    }
    MonotonicityCheck {
        ok,
        worst_excess: worst,
        slack: rel_slack,
    }
}

impl EntropySeries {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "# witten-lab entropy-series v1 m={} K={} fd_step={} phi_normalization=log4pit+1",
            self.m, self.k, self.fd_step
        )?;
        writeln!(
            out,
            "t,H,dH_dt,d2H_dt2,dH_dt_fd,d2H_dt2_fd,Phi,H_mK,W_mK,W_tilde,dW_dt_numeric,T1,T2,T3,T4,dW_dt_formula,residual,monotonicity_bound,flow_margin"
        )?;
        for r in &self.rows {
            let margin = r.margin.map_or(String::new(), |v| format!("{v:.17e}"));
            writeln!(
                out,
                "{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{}",
                r.t,
                r.h,
                r.dh_dt,
                r.d2h_dt2,
                r.dh_dt_fd,
                r.d2h_dt2_fd,
                r.phi,
                r.h_mk,
                r.w,
                r.w_tilde,
                r.dw_dt_numeric,
                r.terms.t1,
                r.terms.t2,
                r.terms.t3,
                r.terms.t4,
                r.terms.formula,
                r.residual,
                r.bound,
                margin
            )?;
        }
        Ok(())
    }

    /// Plain `key = value` summary of the series.
    pub fn summary(&self, rel_slack: f64) -> String {
        let mono = w_monotonicity_check(self, rel_slack);
        let worst_residual = self.rows.iter().map(EntropyRow::relative_residual).fold(0.0, f64::max);
        let worst_dh = self.rows.iter().map(EntropyRow::dh_relative_error).fold(0.0, f64::max);
        let worst_d2h = self.rows.iter().map(EntropyRow::d2h_relative_error).fold(0.0, f64::max);
        let t1_t3_sign = self.rows.iter().all(|r| r.terms.t1 <= 0.0 && r.terms.t3 <= 0.0);
        format!(
            "m = {}\nK = {}\nrows = {}\nphi_normalization = log(4 pi t) + 1\nmonotonicity_ok = {}\nworst_monotonicity_excess = {:e}\nworst_w_residual = {:e}\nworst_dh_rel_error = {:e}\nworst_d2h_rel_error = {:e}\nt1_t3_nonpositive = {}\n",
            self.m,
            self.k,
            self.rows.len(),
            mono.ok,
            mono.worst_excess,
            worst_residual,
            worst_dh,
            worst_d2h,
            t1_t3_sign
        )
    }
}
