//! Conformal flows `g(t) = e^{2λ(t)}g₀` with a space-constant log-factor,
//! coupled to the potential through the conjugate equation
//! `∂ₜφ = ½Tr(∂ₜg) = nλ′`, i.e. `φ(t) = φ₀ + n(λ(t) − λ(0))`. The measure
//! `e^{−φ}dv` is then independent of `t` and `L(t) = e^{−2λ(t)}L₀`.

use std::borrow::Cow;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::entropy::{decomposition_with_shift, entropy_h, second_derivative_with_shift, series_on_path, Decomposition, EntropySeries, SeriesOptions};
use crate::error::{invalid, Result};
use crate::geometry::{bakry_emery_tensor, refined_tensor_min, tensor_min_eig, WeightedManifold};
use crate::heatflow::{evolve_on_path, EvolveOptions, Evolution, HeatState, ManifoldPath};

/// Named families for the log-factor `λ(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum FlowFamily {
    Constant { lambda0: f64 },
    /// `λ₀ + rate·t`
    Linear { lambda0: f64, rate: f64 },
    /// `λ₀ + amplitude·sin(ωt + phase)`
    Sinusoidal {
        lambda0: f64,
        amplitude: f64,
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
}

impl FlowFamily {
    pub fn lambda(&self, t: f64) -> f64 {
        match *self {
            FlowFamily::Constant { lambda0 } => lambda0,
            FlowFamily::Linear { lambda0, rate } => lambda0 + rate * t,
            FlowFamily::Sinusoidal {
                lambda0,
                amplitude,
                omega,
                phase,
            } => lambda0 + amplitude * (omega * t + phase).sin(),
        }
    }

    /// `λ′(t)`; `½∂ₜg = λ′g`.
    pub fn lambda_rate(&self, t: f64) -> f64 {
        match *self {
            FlowFamily::Constant { .. } => 0.0,
            FlowFamily::Linear { rate, .. } => rate,
            FlowFamily::Sinusoidal {
                amplitude,
                omega,
                phase,
                ..
            } => amplitude * omega * (omega * t + phase).cos(),
        }
    }

    fn params(&self) -> Vec<f64> {
        match *self {
            FlowFamily::Constant { lambda0 } => vec![lambda0],
            FlowFamily::Linear { lambda0, rate } => vec![lambda0, rate],
            FlowFamily::Sinusoidal {
                lambda0,
                amplitude,
                omega,
                phase,
            } => vec![lambda0, amplitude, omega, phase],
        }
    }
}

/// A conformal flow over `[0, horizon]`.
#[derive(Debug, Clone)]
pub struct FlowSpec {
    base: WeightedManifold,
    family: FlowFamily,
    horizon: f64,
}

/// Builds a flow and checks that the measure weights agree to `1e−14` at
/// `t = 0, T/2, T`.
pub fn make_flow(base: WeightedManifold, family: FlowFamily, horizon: f64) -> Result<FlowSpec> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(invalid("flow.horizon", format!("horizon {horizon} must be positive")));
    }
    if family.params().iter().any(|p| !p.is_finite()) {
        return Err(invalid("flow.params", "flow parameters must be finite"));
    }
    let flow = FlowSpec { base, family, horizon };
    let reference = flow.manifold_at(0.0)?;
    for t in [0.5 * horizon, horizon] {
        let drift = flow.measure_drift(&reference, t)?;
        if drift > 1e-14 {
            return Err(invalid("flow", format!("measure drifts by {drift:e} at t = {t}")));
        }
    }
    Ok(flow)
}

impl FlowSpec {
    pub fn base(&self) -> &WeightedManifold {
        &self.base
    }

    pub fn family(&self) -> FlowFamily {
        self.family
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn is_static(&self) -> bool {
        matches!(self.family, FlowFamily::Constant { lambda0 } if lambda0 == 0.0)
            || matches!(self.family, FlowFamily::Linear { lambda0, rate } if lambda0 == 0.0 && rate == 0.0)
    }

    /// `(M, g(t), φ(t))`. A static flow returns the base itself.
    pub fn manifold_at(&self, t: f64) -> Result<WeightedManifold> {
        if !t.is_finite() {
            return Err(invalid("t", "time must be finite"));
        }
        if self.is_static() {
            return Ok(self.base.clone());
        }
        let lambda = self.family.lambda(t);
        let shift = self.base.dim() as f64 * (lambda - self.family.lambda(0.0));
        self.base
            .with_conformal(self.base.metric_factor() * lambda.exp(), shift)
    }

    /// Largest relative change of a measure weight between `reference` and
    /// `g(t)`.
    pub fn measure_drift(&self, reference: &WeightedManifold, t: f64) -> Result<f64> {
        let at = self.manifold_at(t)?;
        Ok(at
            .weights()
            .iter()
            .zip(reference.weights())
            .map(|(a, b)| ((a - b) / b).abs())
            .fold(0.0, f64::max))
    }
}

impl ManifoldPath for FlowSpec {
    fn at(&self, t: f64) -> Result<Cow<'_, WeightedManifold>> {
        self.manifold_at(t).map(Cow::Owned)
    }
}

#[derive(Debug, Clone)]
pub struct MarginSlice {
    pub t: f64,
    /// Smallest eigenvalue of `½∂ₜg + Ric_{m,n}(L) + Kg` per node, in an
    /// orthonormal frame of `g(t)`.
    pub values: Vec<f64>,
    /// Minimum refined between nodes.
    pub min_value: f64,
}

#[derive(Debug, Clone)]
pub struct FlowMargin {
    pub m: f64,
    pub k: f64,
    pub slices: Vec<MarginSlice>,
    pub min_value: f64,
    pub tol: f64,
    pub ok: bool,
}

impl FlowMargin {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# witten-lab flow-margin v1 m={} K={}", self.m, self.k)?;
        writeln!(out, "t,node,margin")?;
        for s in &self.slices {
            for (i, v) in s.values.iter().enumerate() {
                writeln!(out, "{:.17e},{i},{v:.17e}", s.t)?;
            }
        }
        Ok(())
    }
}

/// Default tolerance of the super Ricci flow condition.
pub const MARGIN_TOL: f64 = 1e-10;

fn margin_slice(flow: &FlowSpec, m: f64, k: f64, t: f64) -> Result<MarginSlice> {
    let mf = flow.manifold_at(t)?;
    let tensor = bakry_emery_tensor(&mf, m)?;
    let shift = flow.family.lambda_rate(t) + k;
    let dim = mf.dim();
    let values: Vec<f64> = tensor.iter().map(|&x| tensor_min_eig(dim, x) + shift).collect();
    let min_value = if mf.is_potential_constant() {
        shift
    } else {
        refined_tensor_min(&mf, &tensor, shift).0
    };
    Ok(MarginSlice { t, values, min_value })
}

/// `½∂ₜg + Ric_{m,n}(L) + Kg ≥ 0` at the sampled times.
pub fn super_ricci_flow_margin(flow: &FlowSpec, m: f64, k: f64, times: &[f64]) -> Result<FlowMargin> {
    if !(k.is_finite()) {
        return Err(invalid("K", "curvature bound must be finite"));
    }
    if times.is_empty() {
        return Err(invalid("times", "need at least one sample time"));
    }
    let slices = times
        .iter()
        .map(|&t| margin_slice(flow, m, k, t))
        .collect::<Result<Vec<_>>>()?;
    let min_value = slices.iter().map(|s| s.min_value).fold(f64::INFINITY, f64::min);
    Ok(FlowMargin {
        m,
        k,
        slices,
        min_value,
        tol: MARGIN_TOL,
        ok: min_value >= -MARGIN_TOL,
    })
}

/// Smallest `K ≥ 0` for which the margin is non-negative at all `times`.
pub fn fit_flow_k(flow: &FlowSpec, m: f64, times: &[f64]) -> Result<f64> {
    let margin = super_ricci_flow_margin(flow, m, 0.0, times)?;
    Ok((-margin.min_value).max(0.0))
}

/// `n + 1` equally spaced times on `[0, T]`.
pub fn uniform_times(horizon: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| horizon * i as f64 / n as f64).collect()
}

/// Heat flow of `L(t)`; the measure is shared by all `t`, so mass is
/// conserved as in the static case.
pub fn evolve_heat_on_flow(flow: &FlowSpec, initial: &HeatState, times: &[f64], options: &EvolveOptions) -> Result<Evolution> {
    if let Some(&last) = times.last() {
        if last > flow.horizon * (1.0 + 1e-12) {
            return Err(invalid("times", format!("snapshot {last} is past the flow horizon {}", flow.horizon)));
        }
    }
    evolve_on_path(flow, initial, times, options, true)
}

/// Four-term `dW/dt` formula with `½∂ₜg + Ric_{m,n}(L) + Kg` in `T2`.
pub fn w_decomposition_on_flow(flow: &FlowSpec, state: &HeatState, m: f64, k: f64) -> Result<Decomposition> {
    let mf = flow.manifold_at(state.time)?;
    decomposition_with_shift(&mf, state, m, k, flow.family.lambda_rate(state.time))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipationRow {
    pub t: f64,
    pub h: f64,
    /// `∫|∇log u|²_{g(t)} u dμ`
    pub dh_dt: f64,
    /// `−2∫[|∇²log u|² + (½∂ₜg + Ric(L))(∇log u, ∇log u)] u dμ`
    pub d2h_dt2: f64,
    /// Three-point differences of `H` over neighbouring snapshots.
    pub dh_dt_fd: Option<f64>,
    pub d2h_dt2_fd: Option<f64>,
}

/// Entropy dissipation along a flow run, with finite-difference cross-checks
/// at interior snapshots (non-uniform three-point stencils).
pub fn entropy_dissipation_on_flow(flow: &FlowSpec, snapshots: &[HeatState]) -> Result<Vec<DissipationRow>> {
    let mut rows = Vec::with_capacity(snapshots.len());
    for s in snapshots {
        let mf = flow.manifold_at(s.time)?;
        let e = entropy_h(&mf, s)?;
        let d2 = second_derivative_with_shift(&mf, s, flow.family.lambda_rate(s.time))?;
        rows.push(DissipationRow {
            t: s.time,
            h: e.h,
            dh_dt: e.dh_dt,
            d2h_dt2: d2,
            dh_dt_fd: None,
            d2h_dt2_fd: None,
        });
    }
    for i in 1..rows.len().saturating_sub(1) {
        let (a, b, c) = (rows[i - 1], rows[i], rows[i + 1]);
        let h1 = b.t - a.t;
        let h2 = c.t - b.t;
        let d1 = -h2 / (h1 * (h1 + h2)) * a.h + (h2 - h1) / (h1 * h2) * b.h + h1 / (h2 * (h1 + h2)) * c.h;
        let d2 = 2.0 * (a.h / (h1 * (h1 + h2)) - b.h / (h1 * h2) + c.h / (h2 * (h1 + h2)));
        rows[i].dh_dt_fd = Some(d1);
        rows[i].d2h_dt2_fd = Some(d2);
    }
    Ok(rows)
}

/// Entropy series along a flow; each row carries the refined flow margin at
/// its time.
pub fn flow_entropy_series(
    flow: &FlowSpec,
    initial: &HeatState,
    probe_times: &[f64],
    m: f64,
    k: f64,
    options: &SeriesOptions,
) -> Result<EntropySeries> {
    series_on_path(flow, initial, probe_times, m, k, options, |t| {
        let slice = margin_slice(flow, m, k, t)?;
        Ok((flow.family.lambda_rate(t), Some(slice.min_value)))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_manifold, ManifoldConfig, PotentialConfig};
    use std::f64::consts::PI;

    fn circle(pot: PotentialConfig) -> WeightedManifold {
        build_manifold(&ManifoldConfig::circle(64, 2.0 * PI, pot)).unwrap()
    }

    #[test]
    fn shrinking_circle_keeps_measure() {
        let base = circle(PotentialConfig::cosine(0.5, 1.0));
        let flow = make_flow(base.clone(), FlowFamily::Linear { lambda0: 0.0, rate: -0.5 }, 2.0).unwrap();
        let at = flow.manifold_at(1.0).unwrap();
        assert!((at.metric_factor() - (-0.5f64).exp()).abs() < 1e-15);
        for (p, q) in at.potential().iter().zip(base.potential()) {
            assert!((p - q + 0.5).abs() < 1e-15);
        }
        assert!(flow.measure_drift(&base, 1.7).unwrap() < 1e-14);
    }

    #[test]
    fn static_flow_is_the_base() {
        let base = circle(PotentialConfig::cosine(1.0, 1.0));
        let flow = make_flow(base.clone(), FlowFamily::Constant { lambda0: 0.0 }, 1.0).unwrap();
        assert!(flow.is_static());
        assert_eq!(flow.manifold_at(0.3).unwrap().weights(), base.weights());
    }

    #[test]
    fn rejects_bad_flows() {
        let base = circle(PotentialConfig::zero());
        assert!(make_flow(base.clone(), FlowFamily::Linear { lambda0: 0.0, rate: f64::NAN }, 1.0).is_err());
        assert!(make_flow(base, FlowFamily::Constant { lambda0: 0.0 }, 0.0).is_err());
    }

    #[test]
    fn margin_of_unit_rate_shrinking() {
        // ½∂ₜg = −g, φ₀ ≡ 0: condition is K ≥ 1.
        let base = circle(PotentialConfig::zero());
        let flow = make_flow(base, FlowFamily::Linear { lambda0: 0.0, rate: -1.0 }, 1.0).unwrap();
        let times = uniform_times(1.0, 4);
        assert!(super_ricci_flow_margin(&flow, 2.0, 1.0, &times).unwrap().ok);
        assert!(!super_ricci_flow_margin(&flow, 2.0, 0.99, &times).unwrap().ok);
        assert!((fit_flow_k(&flow, 2.0, &times).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn static_flat_margin_is_zero() {
        let flow = make_flow(circle(PotentialConfig::zero()), FlowFamily::Constant { lambda0: 0.0 }, 1.0).unwrap();
        let m = super_ricci_flow_margin(&flow, 2.0, 0.0, &[0.0, 0.5, 1.0]).unwrap();
        assert!(m.ok);
        assert!(m.slices.iter().all(|s| s.values.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn flow_family_toml() {
        let f: FlowFamily = toml::from_str("family = \"sinusoidal\"\nlambda0 = 0.0\namplitude = 1.0\nomega = 1.0").unwrap();
        assert_eq!(f.lambda_rate(0.0), 1.0);
        assert!(toml::from_str::<FlowFamily>("family = \"linear\"\nlambda0 = 0.0").is_err());
    }
}
