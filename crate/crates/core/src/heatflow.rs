//! Heat flow `∂ₜu = Lu` for the Witten Laplacian.
//!
//! Time stepping is the θ-scheme (Crank–Nicolson by default, implicit Euler on
//! request). Each implicit solve runs preconditioned conjugate gradients on
//! the symmetrized system `W^{1/2}(I − θΔt L)W^{-1/2}`, preconditioned by the
//! FFT-diagonal inverse of `I − θΔt Δ`. Because constants lie in the kernel of
//! `L`, the final iterate is shifted by a constant so that its μ-mass equals
//! the mass of the right-hand side exactly.
//!
//! The spectral first derivative drops the Nyquist mode, so on even grids `L`
//! also annihilates the alternating modes `(−1)^i`. Initial states are
//! μ-orthogonalized against those modes; otherwise they would persist forever.

use std::borrow::Cow;
use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::geometry::{ManifoldConfig, PotentialConfig, WeightedManifold};
use crate::operator::{integrate_mu, witten_laplacian};

/// Relative residual target of the implicit solves.
pub const CG_TOLERANCE: f64 = 1e-13;
const CG_MAX_ITER: usize = 5000;

/// Positive density sampled on the grid at time `time`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatState {
    pub time: f64,
    pub u: Vec<f64>,
}

impl HeatState {
    pub fn new(time: f64, u: Vec<f64>) -> Self {
        Self { time, u }
    }

    pub fn mass(&self, manifold: &WeightedManifold) -> f64 {
        integrate_mu(manifold, &self.u)
    }

    pub fn min(&self) -> f64 {
        self.u.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.u.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// First non-positive node, if any.
    pub fn check_positive(&self) -> Result<()> {
        match self.u.iter().position(|&v| !(v > 0.0)) {
            Some(node) => Err(Error::Positivity {
                node,
                time: self.time,
                value: self.u[node],
            }),
            None => Ok(()),
        }
    }

    /// CSV rows `(t, node, u)`; the header is written when `header` is set.
    pub fn write_csv<W: Write>(&self, mut out: W, header: bool) -> std::io::Result<()> {
        if header {
            writeln!(out, "# witten-lab snapshot v1")?;
            writeln!(out, "t,node,u")?;
        }
        for (i, v) in self.u.iter().enumerate() {
            writeln!(out, "{:.17e},{i},{v:.17e}", self.time)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    CrankNicolson,
    /// L-stable first-order fallback for strongly non-smooth data.
    ImplicitEuler,
}

impl Scheme {
    fn theta(self) -> f64 {
        match self {
            Scheme::CrankNicolson => 0.5,
            Scheme::ImplicitEuler => 1.0,
        }
    }
}

/// A possibly time-dependent family of weighted manifolds sharing one
/// measure μ. Static manifolds return themselves.
pub trait ManifoldPath {
    fn at(&self, t: f64) -> Result<Cow<'_, WeightedManifold>>;
}

impl ManifoldPath for WeightedManifold {
    fn at(&self, _t: f64) -> Result<Cow<'_, WeightedManifold>> {
        Ok(Cow::Borrowed(self))
    }
}

/// Solves `(I − c·L) x = b` where `L` is the Witten Laplacian of `manifold`.
pub(crate) fn solve_shifted(manifold: &WeightedManifold, c: f64, b: &[f64], guess: &[f64]) -> Result<(Vec<f64>, usize)> {
    let n = b.len();
    let w = manifold.weights();
    let sqrt_w: Vec<f64> = w.iter().map(|w| w.sqrt()).collect();
    let spectral = manifold.spectral();
    let inv_a2 = manifold.metric_factor().powi(-2);

    // Symmetrized operator S y = W^{1/2} (I − cL) W^{-1/2} y.
    let apply = |y: &[f64]| -> Vec<f64> {
        let x: Vec<f64> = y.iter().zip(&sqrt_w).map(|(y, s)| y / s).collect();
        let lx = witten_laplacian(manifold, &x);
        x.iter()
            .zip(&lx)
            .zip(&sqrt_w)
            .map(|((x, l), s)| s * (x - c * l))
            .collect()
    };
    let sizes = manifold.sizes().to_vec();
    let periods = manifold.periods().to_vec();
    let precondition = |r: &[f64]| -> Vec<f64> {
        let mut spec = spectral.forward(r);
        let nx = sizes[0];
        let ny = if sizes.len() > 1 { sizes[1] } else { 1 };
        let k = |j: usize, n: usize, p: f64| -> f64 {
            if n.is_multiple_of(2) && j == n / 2 {
                0.0
            } else {
                let s = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
                2.0 * PI * s / p
            }
        };
        for iy in 0..ny {
            let ky = if ny > 1 { k(iy, ny, periods[1]) } else { 0.0 };
            for ix in 0..nx {
                let kx = k(ix, nx, periods[0]);
                let d = 1.0 + c * inv_a2 * (kx * kx + ky * ky);
                spec[iy * nx + ix] /= Complex64::new(d, 0.0);
            }
        }
        spectral.backward(spec)
    };
    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(a, b)| a * b).sum() };

    let rhs: Vec<f64> = b.iter().zip(&sqrt_w).map(|(b, s)| b * s).collect();
    let rhs_norm = dot(&rhs, &rhs).sqrt();
    let mut y: Vec<f64> = guess.iter().zip(&sqrt_w).map(|(g, s)| g * s).collect();
    let mut iterations = 0;
    if rhs_norm > 0.0 {
        let sy = apply(&y);
        let mut r: Vec<f64> = rhs.iter().zip(&sy).map(|(b, s)| b - s).collect();
        let mut z = precondition(&r);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut res = dot(&r, &r).sqrt() / rhs_norm;
        while res > CG_TOLERANCE {
            if iterations >= CG_MAX_ITER {
                return Err(Error::SolverDivergence {
                    iterations,
                    residual: res,
                });
            }
            let sp = apply(&p);
            let alpha = rz / dot(&p, &sp);
            for i in 0..n {
                y[i] += alpha * p[i];
                r[i] -= alpha * sp[i];
            }
            z = precondition(&r);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
            res = dot(&r, &r).sqrt() / rhs_norm;
            iterations += 1;
        }
    }
    let mut x: Vec<f64> = y.iter().zip(&sqrt_w).map(|(y, s)| y / s).collect();
    let defect = (integrate_mu(manifold, b) - integrate_mu(manifold, &x)) / manifold.total_measure();
    x.iter_mut().for_each(|v| *v += defect);
    Ok((x, iterations))
}

/// One θ-step from `t` to `t + dt` on a manifold path; returns the new
/// density and the number of solver iterations.
pub(crate) fn advance<P: ManifoldPath + ?Sized>(
    path: &P,
    t: f64,
    u: &[f64],
    dt: f64,
    scheme: Scheme,
) -> Result<(Vec<f64>, usize)> {
    let theta = scheme.theta();
    let now = path.at(t)?;
    let next = path.at(t + dt)?;
    let rhs: Vec<f64> = if theta < 1.0 {
        let lu = witten_laplacian(&now, u);
        u.iter()
            .zip(&lu)
            .map(|(u, l)| u + (1.0 - theta) * dt * l)
            .collect()
    } else {
        u.to_vec()
    };
    solve_shifted(&next, theta * dt, &rhs, &rhs)
}

/// One Crank–Nicolson step.
pub fn step(manifold: &WeightedManifold, state: &HeatState, dt: f64) -> Result<HeatState> {
    step_with(manifold, state, dt, Scheme::CrankNicolson)
}

/// One step of the chosen scheme; fails with the offending node if the
/// result is not positive.
pub fn step_with(manifold: &WeightedManifold, state: &HeatState, dt: f64, scheme: Scheme) -> Result<HeatState> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(invalid("dt", format!("time step {dt} must be positive")));
    }
    let (u, _) = advance(manifold, state.time, &state.u, dt, scheme)?;
    let next = HeatState::new(state.time + dt, u);
    next.check_positive()?;
    Ok(next)
}

/// Fixed-step integration to `t_end` with `steps` equal steps, on a static
/// manifold or a flow.
pub fn evolve_fixed<P: ManifoldPath + ?Sized>(
    path: &P,
    state: &HeatState,
    t_end: f64,
    steps: usize,
    scheme: Scheme,
) -> Result<HeatState> {
    if !(t_end > state.time) || steps == 0 {
        return Err(invalid("t_end", "need t_end > t and at least one step"));
    }
    let dt = (t_end - state.time) / steps as f64;
    let mut s = state.clone();
    for k in 0..steps {
        let t = state.time + k as f64 * dt;
        let (u, _) = advance(path, t, &s.u, dt, scheme)?;
        s = HeatState::new(state.time + (k + 1) as f64 * dt, u);
        s.check_positive()?;
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    /// Step-doubling local error target (relative sup-norm).
    pub error_target: f64,
    pub initial_dt: f64,
    pub max_dt: f64,
    pub min_dt: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            error_target: 1e-8,
            initial_dt: 1e-4,
            max_dt: 0.25,
            min_dt: 1e-14,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub dt: f64,
    pub error: f64,
    pub iterations: usize,
}

/// Record of an adaptive run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    pub steps: Vec<StepRecord>,
    pub rejected: usize,
}

impl Manifest {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# witten-lab evolution-manifest v1 rejected={}", self.rejected)?;
        writeln!(out, "t,dt,error_estimate,cg_iterations")?;
        for s in &self.steps {
            writeln!(out, "{:.17e},{:.17e},{:.6e},{}", s.t, s.dt, s.error, s.iterations)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub snapshots: Vec<HeatState>,
    pub manifest: Manifest,
}

/// Adaptive Crank–Nicolson evolution with step-doubling error control,
/// returning snapshots at the requested times.
pub fn evolve(
    manifold: &WeightedManifold,
    initial: &HeatState,
    times: &[f64],
    options: &EvolveOptions,
) -> Result<Evolution> {
    evolve_on_path(manifold, initial, times, options, true)
}

pub(crate) fn evolve_on_path<P: ManifoldPath + ?Sized>(
    path: &P,
    initial: &HeatState,
    times: &[f64],
    options: &EvolveOptions,
    require_positive: bool,
) -> Result<Evolution> {
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("times", "snapshot times must be strictly ascending"));
    }
    if let Some(&first) = times.first() {
        if first < initial.time {
            return Err(invalid("times", "first snapshot precedes the initial state"));
        }
    }
    let mut manifest = Manifest::default();
    let mut snapshots = Vec::with_capacity(times.len());
    let mut t = initial.time;
    let mut u = initial.u.clone();
    let mut dt = options.initial_dt;
    let scale = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));

    for &target in times {
        while t < target {
            let mut h = dt.min(options.max_dt);
            let landing = target - t <= h * (1.0 + 1e-12);
            if landing {
                h = target - t;
            }
            let (big, it0) = advance(path, t, &u, h, Scheme::CrankNicolson)?;
            let (half, it1) = advance(path, t, &u, 0.5 * h, Scheme::CrankNicolson)?;
            let (small, it2) = advance(path, t + 0.5 * h, &half, 0.5 * h, Scheme::CrankNicolson)?;
            let diff = big
                .iter()
                .zip(&small)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            let err = diff / scale(&small).max(f64::MIN_POSITIVE);
            let positive = !require_positive || small.iter().all(|&v| v > 0.0);
            if err <= options.error_target && positive {
                t = if landing { target } else { t + h };
                u = small;
                manifest.steps.push(StepRecord {
                    t,
                    dt: h,
                    error: err,
                    iterations: it0 + it1 + it2,
                });
                let grow = if err > 0.0 {
                    0.9 * (options.error_target / err).powf(1.0 / 3.0)
                } else {
                    3.0
                };
                if !landing || h >= dt {
                    dt = h * grow.clamp(0.2, 3.0);
                }
            } else {
                manifest.rejected += 1;
                let shrink = if positive {
                    (0.9 * (options.error_target / err).powf(1.0 / 3.0)).clamp(0.1, 0.5)
                } else {
                    0.25
                };
                dt = h * shrink;
                if dt < options.min_dt {
                    if !positive {
                        let node = small.iter().position(|&v| !(v > 0.0)).unwrap_or(0);
                        return Err(Error::Positivity {
                            node,
                            time: t + h,
                            value: small[node],
                        });
                    }
                    return Err(invalid("dt", format!("step size underflow at t = {t}")));
                }
            }
        }
        snapshots.push(HeatState::new(target, u.clone()));
    }
    Ok(Evolution {
        snapshots,
        manifest,
    })
}

/// `∂ₜ log u = Lu/u`, evaluated through the equation.
pub fn dt_log_u(manifold: &WeightedManifold, state: &HeatState) -> Result<Vec<f64>> {
    state.check_positive()?;
    let lu = witten_laplacian(manifold, &state.u);
    Ok(lu.iter().zip(&state.u).map(|(l, u)| l / u).collect())
}

/// Default kernel start time: the squared geodesic grid spacing.
pub fn default_t0(manifold: &WeightedManifold) -> f64 {
    let h = (0..manifold.dim())
        .map(|a| manifold.spacing(a))
        .fold(f64::INFINITY, f64::min)
        * manifold.metric_factor();
    h * h
}

/// Wrapped Gaussian `Σⱼ (4πt)^{-1/2} exp(−(d + jℓ)²/4t)` on a circle of
/// length `ℓ`, summed over images until terms drop below 1e−18 of the
/// leading one.
pub(crate) fn wrapped_gaussian(d: f64, length: f64, t: f64) -> f64 {
    let reach = (4.0 * t * 42.0).sqrt() / length;
    let jmax = reach.ceil() as i64 + 1;
    let norm = (4.0 * PI * t).sqrt();
    (-jmax..=jmax)
        .map(|j| {
            let s = d + j as f64 * length;
            (-s * s / (4.0 * t)).exp()
        })
        .sum::<f64>()
        / norm
}

/// Heat kernel `p_t(·, x0)` of a constant-potential flat model, as a density
/// with respect to μ.
pub fn flat_kernel(manifold: &WeightedManifold, source: usize, t: f64) -> Vec<f64> {
    let a = manifold.metric_factor();
    let c0 = manifold.coordinates(source);
    let rescale = manifold.potential()[0].exp();
    (0..manifold.len())
        .map(|i| {
            let c = manifold.coordinates(i);
            let mut p = rescale;
            for axis in 0..manifold.dim() {
                let period = manifold.periods()[axis];
                let d = (c[axis] - c0[axis]).rem_euclid(period);
                p *= wrapped_gaussian(a * d, a * period, t);
            }
            p
        })
        .collect()
}

fn alternating_modes(manifold: &WeightedManifold) -> Vec<Vec<f64>> {
    let nx = manifold.sizes()[0];
    let sign = |k: usize| if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut modes = vec![(0..manifold.len()).map(|i| sign(i % nx)).collect::<Vec<f64>>()];
    if manifold.dim() == 2 {
        modes.push((0..manifold.len()).map(|i| sign(i / nx)).collect());
        modes.push((0..manifold.len()).map(|i| sign(i % nx + i / nx)).collect());
    }
    modes
}

/// Removes the μ-projection onto the spurious alternating null modes of the
/// discrete `L`, keeping the μ-mass.
pub fn remove_alternating_modes(manifold: &WeightedManifold, u: &mut [f64]) {
    let w = manifold.weights();
    let inner = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).zip(w).map(|((a, b), w)| a * b * w).sum() };
    let mut basis: Vec<Vec<f64>> = vec![vec![1.0; manifold.len()]];
    for mut v in alternating_modes(manifold) {
        for b in &basis {
            let c = inner(&v, b) / inner(b, b);
            v.iter_mut().zip(b).for_each(|(v, b)| *v -= c * b);
        }
        basis.push(v);
    }
    for b in basis.iter().skip(1) {
        let c = inner(u, b) / inner(b, b);
        u.iter_mut().zip(b).for_each(|(u, b)| *u -= c * b);
    }
}

/// Unit-mass approximation of the heat kernel `p_{t0}(·, x0)`.
///
/// Constant-potential models use the exact wrapped-Gaussian expansion.
/// Additively separable potentials use a product of one-axis kernels from the
/// eigen decomposition of the discrete operator. Anything else starts from a
/// normalized discrete delta, ramped by Crank–Nicolson substeps to `t0/100`
/// and then evolved adaptively to `t0`.
pub fn initial_delta(manifold: &WeightedManifold, source: usize, t0: f64) -> Result<HeatState> {
    if !(t0.is_finite() && t0 > 0.0) {
        return Err(invalid("t0", format!("start time {t0} must be positive")));
    }
    if source >= manifold.len() {
        return Err(invalid("x0", format!("node {source} is out of range")));
    }
    if manifold.is_potential_constant() {
        let mut u = flat_kernel(manifold, source, t0);
        let mass = integrate_mu(manifold, &u);
        u.iter_mut().for_each(|v| *v /= mass);
        let state = HeatState::new(t0, u);
        state.check_positive()?;
        return Ok(state);
    }
    if let Some(factors) = axis_factors(manifold)? {
        let nx = manifold.sizes()[0];
        let parts: Vec<Vec<f64>> = factors
            .iter()
            .enumerate()
            .map(|(axis, m1)| {
                let s = if axis == 0 { source % nx } else { source / nx };
                eigen_kernel(m1, s, t0)
            })
            .collect();
        let u: Vec<f64> = (0..manifold.len())
            .map(|i| match parts.len() {
                1 => parts[0][i],
                _ => parts[0][i % nx] * parts[1][i / nx],
            })
            .collect();
        let state = HeatState::new(t0, u);
        state.check_positive()?;
        return Ok(state);
    }
    warm_up_delta(manifold, source, t0)
}

/// One-dimensional factors of a manifold whose potential splits as
/// `φ(x, y) = f(x) + g(y)`; the discrete `L` then acts axis by axis and its
/// kernel is the product of the factor kernels. `None` if φ does not split.
pub(crate) fn axis_factors(manifold: &WeightedManifold) -> Result<Option<Vec<WeightedManifold>>> {
    let a = manifold.metric_factor();
    let phi = manifold.potential();
    let circle = |n: usize, period: f64, samples: Vec<f64>| -> Result<WeightedManifold> {
        let config = ManifoldConfig::circle(n, period, PotentialConfig::samples(samples));
        WeightedManifold::new(&config)?.with_conformal(a, 0.0)
    };
    if manifold.dim() == 1 {
        return Ok(Some(vec![circle(manifold.sizes()[0], manifold.periods()[0], phi.to_vec())?]));
    }
    let (nx, ny) = (manifold.sizes()[0], manifold.sizes()[1]);
    let scale = phi.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for iy in 0..ny {
        for ix in 0..nx {
            let mixed = phi[iy * nx + ix] - phi[ix] - phi[iy * nx] + phi[0];
            if mixed.abs() > 1e-12 * scale {
                return Ok(None);
            }
        }
    }
    let fx: Vec<f64> = phi[..nx].to_vec();
    let gy: Vec<f64> = (0..ny).map(|iy| phi[iy * nx] - phi[0]).collect();
    Ok(Some(vec![
        circle(nx, manifold.periods()[0], fx)?,
        circle(ny, manifold.periods()[1], gy)?,
    ]))
}

/// `e^{tL}` applied to the unit-mass delta at `source`, from the spectral
/// decomposition of the symmetrized one-dimensional operator
/// `W^{1/2} L W^{-1/2}`. The two-dimensional null space (constants and the
/// alternating mode) is replaced by the equilibrium `1/μ(M)`.
pub(crate) fn eigen_kernel(manifold: &WeightedManifold, source: usize, t: f64) -> Vec<f64> {
    let n = manifold.len();
    let sw: Vec<f64> = manifold.weights().iter().map(|w| w.sqrt()).collect();
    let mut s = DMatrix::<f64>::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = witten_laplacian(manifold, &e);
        e[j] = 0.0;
        for i in 0..n {
            s[(i, j)] = sw[i] * col[i] / sw[j];
        }
    }
    let s = (&s + s.transpose()) * 0.5;
    let eig = SymmetricEigen::new(s);
    let top = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut u = vec![1.0 / manifold.total_measure(); n];
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda.abs() <= 1e-8 * top {
            continue;
        }
        let c = (t * lambda).exp() * eig.eigenvectors[(source, k)] / sw[source];
        if c == 0.0 {
            continue;
        }
        for i in 0..n {
            u[i] += c * eig.eigenvectors[(i, k)] / sw[i];
        }
    }
    u
}

/// Discrete delta at `source` advanced to `t0`: a geometric ramp of
/// Crank–Nicolson substeps to `t0/100`, then adaptive stepping to `t0`.
/// Errors made early in the ramp sit in modes that decay by `t0`.
pub(crate) fn warm_up_delta(manifold: &WeightedManifold, source: usize, t0: f64) -> Result<HeatState> {
    let mut u = vec![0.0; manifold.len()];
    u[source] = 1.0 / manifold.weights()[source];
    remove_alternating_modes(manifold, &mut u);

    let t_ramp = 0.01 * t0;
    let (first, ratio, count) = warmup_ramp(manifold, t_ramp);
    let mut t = 0.0;
    let mut dt = first;
    for k in 0..count {
        let h = if k + 1 == count { t_ramp - t } else { dt };
        u = advance(manifold, t, &u, h, Scheme::CrankNicolson)?.0;
        t += h;
        dt *= ratio;
    }
    let options = EvolveOptions {
        error_target: 1e-10,
        initial_dt: dt / ratio,
        ..EvolveOptions::default()
    };
    let ev = evolve_on_path(manifold, &HeatState::new(t_ramp, u), &[t0], &options, false)?;
    let state = ev.snapshots.into_iter().next().expect("one snapshot requested");
    state.check_positive()?;
    Ok(state)
}

/// First substep, growth ratio and substep count of the warm-up ramp. The
/// first substep resolves the stiffest grid mode; steps then grow by at most
/// 10% each.
fn warmup_ramp(manifold: &WeightedManifold, t0: f64) -> (f64, f64, usize) {
    let (lo, hi) = crate::geometry::min_max(manifold.weights());
    let h = (0..manifold.dim())
        .map(|a| manifold.spacing(a))
        .fold(f64::INFINITY, f64::min)
        * manifold.metric_factor();
    let stiff = manifold.dim() as f64 * (PI / h).powi(2) * (hi / lo);
    let first = (0.1 / stiff).min(t0 / 16.0);
    let ratio: f64 = 1.1;
    let count = ((1.0 + t0 * (ratio - 1.0) / first).ln() / ratio.ln()).ceil().max(1.0) as usize;
    let first = t0 * (ratio - 1.0) / (ratio.powi(count as i32) - 1.0);
    (first, ratio, count)
}

/// Smooth concentrated initial density at `t = 0`:
/// `u ∝ exp(κ Σₐ cos(2π(xₐ − x0ₐ)/Cₐ))`, normalized to unit μ-mass.
pub fn initial_bump(manifold: &WeightedManifold, source: usize, kappa: f64) -> Result<HeatState> {
    if !(kappa.is_finite() && kappa >= 0.0) {
        return Err(invalid("kappa", format!("concentration {kappa} must be non-negative")));
    }
    if source >= manifold.len() {
        return Err(invalid("x0", format!("node {source} is out of range")));
    }
    let c0 = manifold.coordinates(source);
    let mut u: Vec<f64> = (0..manifold.len())
        .map(|i| {
            let c = manifold.coordinates(i);
            let s: f64 = (0..manifold.dim())
                .map(|a| (2.0 * PI * (c[a] - c0[a]) / manifold.periods()[a]).cos() - 1.0)
                .sum();
            (kappa * s).exp()
        })
        .collect();
    remove_alternating_modes(manifold, &mut u);
    let mass = integrate_mu(manifold, &u);
    u.iter_mut().for_each(|v| *v /= mass);
    let state = HeatState::new(0.0, u);
    state.check_positive()?;
    Ok(state)
}

/// The equilibrium density `1/μ(M)`.
pub fn uniform_state(manifold: &WeightedManifold, time: f64) -> HeatState {
    HeatState::new(time, vec![1.0 / manifold.total_measure(); manifold.len()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_manifold;

    fn circle(pot: PotentialConfig) -> WeightedManifold {
        build_manifold(&ManifoldConfig::circle(128, 2.0 * PI, pot)).unwrap()
    }

    #[test]
    fn uniform_state_is_stationary() {
        let m = circle(PotentialConfig::cosine(1.0, 1.0));
        let s = uniform_state(&m, 1.0);
        for dt in [1e-3, 0.1, 10.0] {
            let next = step(&m, &s, dt).unwrap();
            for (a, b) in next.u.iter().zip(&s.u) {
                assert!((a - b).abs() < 1e-14 * b);
            }
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let m = circle(PotentialConfig::zero());
        let s = uniform_state(&m, 0.0);
        assert!(step(&m, &s, 0.0).is_err());
        assert!(step(&m, &s, -1.0).is_err());
        assert!(initial_delta(&m, 0, 0.0).is_err());
        assert!(initial_delta(&m, 0, -1.0).is_err());
        assert!(initial_delta(&m, 999, 0.1).is_err());
        assert!(evolve(&m, &s, &[0.2, 0.1], &EvolveOptions::default()).is_err());
    }

    #[test]
    fn step_reports_positivity_violation() {
        let m = circle(PotentialConfig::zero());
        let mut u = vec![1.0; m.len()];
        u[3] = -1.0;
        match step(&m, &HeatState::new(0.0, u), 1e-9) {
            Err(Error::Positivity { node, .. }) => assert_eq!(node, 3),
            other => panic!("expected positivity error, got {other:?}"),
        }
    }

    #[test]
    fn mass_is_conserved_by_steps() {
        let m = circle(PotentialConfig::cosine(1.0, 1.0));
        let s = initial_bump(&m, 5, 4.0).unwrap();
        let mut cur = s.clone();
        for _ in 0..20 {
            cur = step(&m, &cur, 0.05).unwrap();
        }
        assert!((cur.mass(&m) - 1.0).abs() < 1e-13);
        let ie = step_with(&m, &s, 0.3, Scheme::ImplicitEuler).unwrap();
        assert!((ie.mass(&m) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn alternating_modes_are_removed() {
        let m = build_manifold(&ManifoldConfig::torus(16, 2.0 * PI, PotentialConfig::cosine(1.0, 1.0))).unwrap();
        let mut u: Vec<f64> = (0..m.len()).map(|i| 1.0 + if i % 2 == 0 { 0.3 } else { -0.3 }).collect();
        let before = integrate_mu(&m, &u);
        remove_alternating_modes(&m, &mut u);
        assert!((integrate_mu(&m, &u) - before).abs() < 1e-13);
        let lu = witten_laplacian(&m, &u);
        let s: Vec<f64> = (0..m.len()).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let _ = lu;
        let proj: f64 = u.iter().zip(&s).zip(m.weights()).map(|((u, s), w)| u * s * w).sum::<f64>();
        let ref_proj: f64 = s.iter().zip(m.weights()).map(|(s, w)| s * w).sum::<f64>() * before / m.total_measure();
        assert!((proj - ref_proj).abs() < 1e-12);
    }

    #[test]
    fn flat_kernel_symmetry() {
        let m = circle(PotentialConfig::zero());
        let s = initial_delta(&m, 10, 0.05).unwrap();
        for d in 1..60 {
            let a = s.u[m.node(10 + d, 0)];
            let b = s.u[m.node(10 - d, 0)];
            assert!((a - b).abs() <= 1e-12 * a.max(b).max(1e-300));
        }
    }

    #[test]
    fn warm_up_delta_is_positive_and_normalized() {
        let m = circle(PotentialConfig::cosine(1.0, 1.0));
        let s = initial_delta(&m, 0, 0.3).unwrap();
        assert!((s.mass(&m) - 1.0).abs() < 1e-12);
        assert!(s.min() > 0.0);
        assert_eq!(s.time, 0.3);
    }

    #[test]
    fn warm_up_and_eigen_kernels_track_wrapped_gaussian() {
        let m = circle(PotentialConfig::zero());
        let t0 = 0.25;
        let exact = flat_kernel(&m, 0, t0);
        let peak = exact[0];
        let w = warm_up_delta(&m, 0, t0).unwrap();
        let err = w.u.iter().zip(&exact).fold(0.0f64, |e, (a, b)| e.max((a - b).abs()));
        assert!(err < 1e-7 * peak, "warm-up error {err:e}");
        let factor = &axis_factors(&m).unwrap().unwrap()[0];
        let e = eigen_kernel(factor, 0, t0);
        let rel = e.iter().zip(&exact).fold(0.0f64, |r, (a, b)| r.max(((a - b) / b).abs()));
        assert!(rel < 1e-7, "eigen kernel error {rel:e}");
    }

    #[test]
    fn separable_torus_kernel_is_a_product() {
        let pot = PotentialConfig::cosine_sine(0.5, 1.0, 0.3, 1.0);
        let t = build_manifold(&ManifoldConfig::torus(16, 2.0 * PI, pot)).unwrap();
        let factors = axis_factors(&t).unwrap().expect("separable");
        let k = initial_delta(&t, t.node(3, 5), 0.4).unwrap();
        assert!((k.mass(&t) - 1.0).abs() < 1e-12);
        let kx = eigen_kernel(&factors[0], 3, 0.4);
        let ky = eigen_kernel(&factors[1], 5, 0.4);
        for i in 0..t.len() {
            assert!((k.u[i] - kx[i % 16] * ky[i / 16]).abs() < 1e-15);
        }
        let mut samples = t.potential().to_vec();
        samples[17] += 0.1;
        let bumpy = build_manifold(&ManifoldConfig {
            potential: PotentialConfig::samples(samples),
            ..ManifoldConfig::torus(16, 2.0 * PI, PotentialConfig::zero())
        })
        .unwrap();
        assert!(axis_factors(&bumpy).unwrap().is_none());
    }

    #[test]
    fn dt_log_u_closed_form() {
        let m = circle(PotentialConfig::zero());
        let t: f64 = 0.7;
        let u: Vec<f64> = (0..m.len())
            .map(|i| (1.0 + (-t).exp() * m.coordinates(i)[0].cos()) / (2.0 * PI))
            .collect();
        let d = dt_log_u(&m, &HeatState::new(t, u)).unwrap();
        for (i, v) in d.iter().enumerate() {
            let c = m.coordinates(i)[0].cos();
            let e = (-t).exp();
            assert!((v + e * c / (1.0 + e * c)).abs() < 1e-10, "{}", v + e * c / (1.0 + e * c));
        }
        let s = uniform_state(&m, 1.0);
        assert!(dt_log_u(&m, &s).unwrap().iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn manifest_csv() {
        let m = circle(PotentialConfig::zero());
        let s = initial_bump(&m, 0, 2.0).unwrap();
        let ev = evolve(&m, &s, &[0.1, 0.2], &EvolveOptions::default()).unwrap();
        let mut buf = Vec::new();
        ev.manifest.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# witten-lab evolution-manifest v1"));
        assert_eq!(text.lines().count(), 2 + ev.manifest.steps.len());
        assert_eq!(ev.snapshots.len(), 2);
        assert_eq!(ev.snapshots[1].time, 0.2);
    }
}
