//! Discrete weighted manifolds on periodic grids and their Bakry–Émery
//! curvature.
//!
//! Every model is flat: the metric is a uniform conformal scale `a` times the
//! coordinate metric, so all curvature enters through the potential `φ`.
//! Tensors are reported in the orthonormal frame `a⁻¹∂ᵢ`.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::spectral::{Interpolant, Spectral};

/// Rank-one divisions by `m − n` below this gap are treated as `m = n`.
pub const DIMENSION_GAP_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Circle,
    #[serde(rename = "flat_torus_2d")]
    FlatTorus2d,
}

impl Model {
    pub fn dim(self) -> usize {
        match self {
            Model::Circle => 1,
            Model::FlatTorus2d => 2,
        }
    }
}

/// Potential `φ`, either from a closed-form family or sampled at nodes.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    Zero,
    /// `a·cos(k·x)`
    Cosine { amplitude: f64, wavenumber: f64 },
    /// `a·cos(k·x) + b·sin(l·y)` (torus only)
    CosineSine {
        a: f64,
        k: f64,
        b: f64,
        l: f64,
    },
    Samples(Vec<f64>),
}

impl Potential {
    fn eval(&self, x: f64, y: f64) -> f64 {
        match *self {
            Potential::Zero => 0.0,
            Potential::Cosine {
                amplitude,
                wavenumber,
            } => amplitude * (wavenumber * x).cos(),
            Potential::CosineSine { a, k, b, l } => a * (k * x).cos() + b * (l * y).sin(),
            Potential::Samples(_) => unreachable!("sampled potentials are not evaluated pointwise"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialFamily {
    #[default]
    Zero,
    Cosine,
    CosineSine,
    Samples,
}

/// `[manifold.potential]` section of a config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    #[serde(default)]
    pub family: PotentialFamily,
    #[serde(default)]
    pub params: Vec<f64>,
    #[serde(default)]
    pub samples: Vec<f64>,
}

impl PotentialConfig {
    pub fn to_potential(&self) -> Result<Potential> {
        let want = |n: usize| -> Result<()> {
            if self.params.len() != n {
                return Err(invalid(
                    "potential.params",
                    format!("family {:?} takes {n} parameters, got {}", self.family, self.params.len()),
                ));
            }
            Ok(())
        };
        Ok(match self.family {
            PotentialFamily::Zero => Potential::Zero,
            PotentialFamily::Cosine => {
                want(2)?;
                Potential::Cosine {
                    amplitude: self.params[0],
                    wavenumber: self.params[1],
                }
            }
            PotentialFamily::CosineSine => {
                want(4)?;
                Potential::CosineSine {
                    a: self.params[0],
                    k: self.params[1],
                    b: self.params[2],
                    l: self.params[3],
                }
            }
            PotentialFamily::Samples => Potential::Samples(self.samples.clone()),
        })
    }
}

/// Manifold description as read from the `[manifold]` table of a config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldConfig {
    pub model: Model,
    pub grid: Vec<usize>,
    pub period: Vec<f64>,
    #[serde(default)]
    pub potential: PotentialConfig,
}

impl ManifoldConfig {
    pub fn circle(n: usize, period: f64, potential: PotentialConfig) -> Self {
        Self {
            model: Model::Circle,
            grid: vec![n],
            period: vec![period],
            potential,
        }
    }

    pub fn torus(n: usize, period: f64, potential: PotentialConfig) -> Self {
        Self {
            model: Model::FlatTorus2d,
            grid: vec![n, n],
            period: vec![period, period],
            potential,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Same config with every grid size multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        let mut out = self.clone();
        for n in &mut out.grid {
            *n *= factor;
        }
        out
    }
}

impl PotentialConfig {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn cosine(amplitude: f64, wavenumber: f64) -> Self {
        Self {
            family: PotentialFamily::Cosine,
            params: vec![amplitude, wavenumber],
            samples: Vec::new(),
        }
    }

    pub fn cosine_sine(a: f64, k: f64, b: f64, l: f64) -> Self {
        Self {
            family: PotentialFamily::CosineSine,
            params: vec![a, k, b, l],
            samples: Vec::new(),
        }
    }

    pub fn samples(samples: Vec<f64>) -> Self {
        Self {
            family: PotentialFamily::Samples,
            params: Vec::new(),
            samples,
        }
    }
}

/// A periodic weighted manifold `(M, g, e^{−φ} dv)` sampled on a uniform grid.
#[derive(Debug, Clone)]
pub struct WeightedManifold {
    model: Model,
    sizes: Vec<usize>,
    periods: Vec<f64>,
    scale: f64,
    potential_kind: Potential,
    potential: Vec<f64>,
    weights: Vec<f64>,
    cell: f64,
    spectral: Arc<Spectral>,
}

/// Builds a manifold from a config; see [`WeightedManifold::new`].
pub fn build_manifold(config: &ManifoldConfig) -> Result<WeightedManifold> {
    WeightedManifold::new(config)
}

fn check_periodic(name: &'static str, wavenumber: f64, period: f64) -> Result<()> {
    if !wavenumber.is_finite() {
        return Err(invalid(name, "wavenumber must be finite"));
    }
    let cycles = wavenumber * period / (2.0 * PI);
    if (cycles - cycles.round()).abs() > 1e-9 * (1.0 + cycles.abs()) {
        return Err(invalid(
            name,
            format!("wavenumber {wavenumber} is not periodic on a period of {period}"),
        ));
    }
    Ok(())
}

impl WeightedManifold {
    pub fn new(config: &ManifoldConfig) -> Result<Self> {
        let dim = config.model.dim();
        if config.grid.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "model {:?} needs {dim} grid sizes, got {}",
                config.model,
                config.grid.len()
            )));
        }
        if config.period.len() != dim {
            return Err(invalid(
                "period",
                format!("model {:?} needs {dim} periods, got {}", config.model, config.period.len()),
            ));
        }
        for &n in &config.grid {
            if n < 16 || n % 2 != 0 {
                return Err(Error::InvalidGrid(format!(
                    "grid size {n} must be even and at least 16"
                )));
            }
        }
        for &p in &config.period {
            if !(p.is_finite() && p > 0.0) {
                return Err(invalid("period", format!("circumference {p} must be positive")));
            }
        }
        let potential_kind = config.potential.to_potential()?;
        match &potential_kind {
            Potential::Cosine { wavenumber, .. } => check_periodic("potential.params", *wavenumber, config.period[0])?,
            Potential::CosineSine { k, l, .. } => {
                if dim != 2 {
                    return Err(invalid("potential.family", "cosine_sine needs a two-dimensional model"));
                }
                check_periodic("potential.params", *k, config.period[0])?;
                check_periodic("potential.params", *l, config.period[1])?;
            }
            _ => {}
        }

        let spectral = Arc::new(Spectral::new(&config.grid, &config.period));
        let mut manifold = Self {
            model: config.model,
            sizes: config.grid.clone(),
            periods: config.period.clone(),
            scale: 1.0,
            potential_kind: potential_kind.clone(),
            potential: Vec::new(),
            weights: Vec::new(),
            cell: config
                .grid
                .iter()
                .zip(&config.period)
                .map(|(&n, &p)| p / n as f64)
                .product(),
            spectral,
        };
        let potential = match potential_kind {
            Potential::Samples(samples) => {
                if samples.len() != manifold.len() {
                    return Err(Error::LengthMismatch {
                        expected: manifold.len(),
                        found: samples.len(),
                    });
                }
                samples
            }
            kind => (0..manifold.len())
                .map(|i| {
                    let [x, y] = manifold.coordinates(i);
                    kind.eval(x, y)
                })
                .collect(),
        };
        if let Some(bad) = potential.iter().position(|v| !v.is_finite()) {
            return Err(invalid("potential.samples", format!("non-finite value at node {bad}")));
        }
        manifold.potential = potential;
        manifold.weights = manifold.compute_weights();
        manifold.validate_measure()?;
        Ok(manifold)
    }

    fn compute_weights(&self) -> Vec<f64> {
        let volume = self.scale.powi(self.dim() as i32) * self.cell;
        self.potential.iter().map(|p| (-p).exp() * volume).collect()
    }

    fn validate_measure(&self) -> Result<()> {
        if let Some(bad) = self.weights.iter().position(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(invalid(
                "potential",
                format!("measure weight at node {bad} is {} (φ too large in magnitude)", self.weights[bad]),
            ));
        }
        Ok(())
    }

    /// Copy of this manifold with metric `scale²·g₀` and potential `φ + shift`.
    /// Used by conformal flows; the spectral plans are shared.
    pub fn with_conformal(&self, scale: f64, potential_shift: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(invalid("metric_factor", format!("conformal scale {scale} must be positive")));
        }
        if !potential_shift.is_finite() {
            return Err(invalid("potential", "potential shift must be finite"));
        }
        let mut out = self.clone();
        out.scale = scale;
        if potential_shift != 0.0 {
            out.potential.iter_mut().for_each(|p| *p += potential_shift);
            out.potential_kind = Potential::Samples(out.potential.clone());
        }
        out.weights = out.compute_weights();
        out.validate_measure()?;
        Ok(out)
    }

    pub fn model(&self) -> Model {
        self.model
    }

    /// Topological dimension `n`.
    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Coordinate periods (circumferences before conformal scaling).
    pub fn periods(&self) -> &[f64] {
        &self.periods
    }

    /// Number of grid nodes.
    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Uniform conformal factor `a` with `g = a²·g₀` (1 for the base models).
    pub fn metric_factor(&self) -> f64 {
        self.scale
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn potential_kind(&self) -> &Potential {
        &self.potential_kind
    }

    /// Node weights `w(x) = e^{−φ(x)} √det g · cell`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Coordinate cell volume.
    pub fn cell_volume(&self) -> f64 {
        self.cell
    }

    /// `μ(M) = Σ w(x)`.
    pub fn total_measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_potential_constant(&self) -> bool {
        match self.potential_kind {
            Potential::Zero => true,
            Potential::Cosine { amplitude, .. } => amplitude == 0.0,
            Potential::CosineSine { a, b, .. } => a == 0.0 && b == 0.0,
            Potential::Samples(_) => {
                let (lo, hi) = min_max(&self.potential);
                hi - lo <= 1e-14 * (1.0 + hi.abs().max(lo.abs()))
            }
        }
    }

    /// Grid spacing along `axis` in coordinate units.
    pub fn spacing(&self, axis: usize) -> f64 {
        self.periods[axis] / self.sizes[axis] as f64
    }

    /// Coordinates of a node (`y = 0` on the circle).
    pub fn coordinates(&self, node: usize) -> [f64; 2] {
        let nx = self.sizes[0];
        let ix = node % nx;
        let iy = node / nx;
        let x = ix as f64 * self.spacing(0);
        let y = if self.dim() == 2 {
            iy as f64 * self.spacing(1)
        } else {
            0.0
        };
        [x, y]
    }

    /// Node index of grid position `(ix, iy)`, wrapping periodically.
    pub fn node(&self, ix: i64, iy: i64) -> usize {
        let nx = self.sizes[0] as i64;
        let ix = ix.rem_euclid(nx) as usize;
        if self.dim() == 1 {
            ix
        } else {
            let ny = self.sizes[1] as i64;
            iy.rem_euclid(ny) as usize * nx as usize + ix
        }
    }

    /// Geodesic distance between a coordinate point and a node.
    pub fn distance_to(&self, point: [f64; 2], node: usize) -> f64 {
        let c = self.coordinates(node);
        let mut sq = 0.0;
        for axis in 0..self.dim() {
            let p = self.periods[axis];
            let d = (c[axis] - point[axis]).rem_euclid(p);
            let d = d.min(p - d);
            sq += d * d;
        }
        self.scale * sq.sqrt()
    }

    /// Geodesic distance between two nodes: minimal arc on the circle, minimum
    /// over lattice translates on the torus.
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        self.distance_to(self.coordinates(a), b)
    }

    /// Largest ball radius that does not wrap around: half the smallest
    /// circumference.
    pub fn injectivity_scale(&self) -> f64 {
        let min_period = self.periods.iter().cloned().fold(f64::INFINITY, f64::min);
        0.5 * self.scale * min_period
    }

    pub(crate) fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    /// Band-limited interpolant of node samples (coordinate arguments).
    pub(crate) fn interpolant(&self, f: &[f64]) -> Interpolant {
        self.spectral.interpolant(f)
    }
}

pub(crate) fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// Smallest eigenvalue of the symmetric matrix `[[a, b], [b, c]]`.
pub(crate) fn min_eig2(a: f64, b: f64, c: f64) -> f64 {
    let mean = 0.5 * (a + c);
    let half = 0.5 * (a - c);
    mean - (half * half + b * b).sqrt()
}

/// Pointwise smallest eigenvalue of `Ric_{m,n}(L)` and the derived curvature
/// bound.
#[derive(Debug, Clone)]
pub struct CurvatureField {
    /// Dimension parameter (`f64::INFINITY` for `Ric(L)`).
    pub m: f64,
    pub values: Vec<f64>,
    /// Minimum of the band-limited curvature field, refined between nodes.
    pub min_value: f64,
    pub argmin: [f64; 2],
    pub admissible_k: f64,
}

impl CurvatureField {
    pub fn node_min(&self) -> f64 {
        min_max(&self.values).0
    }

    /// CSV export: `node_index, x[, y], ric_mn_value`.
    pub fn write_csv<W: Write>(&self, manifold: &WeightedManifold, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# witten-lab curvature v1 m={}", self.m)?;
        if manifold.dim() == 1 {
            writeln!(out, "node_index,x,ric_mn_value")?;
        } else {
            writeln!(out, "node_index,x,y,ric_mn_value")?;
        }
        for (i, v) in self.values.iter().enumerate() {
            let [x, y] = manifold.coordinates(i);
            if manifold.dim() == 1 {
                writeln!(out, "{i},{x:.17e},{v:.17e}")?;
            } else {
                writeln!(out, "{i},{x:.17e},{y:.17e},{v:.17e}")?;
            }
        }
        Ok(())
    }
}

/// Coefficient of the rank-one term `∇φ⊗∇φ/(m − n)`; zero for `m = ∞` and
/// for the constant-potential `m = n` case.
pub(crate) fn rank_one_coefficient(manifold: &WeightedManifold, m: f64) -> Result<f64> {
    let n = manifold.dim() as f64;
    if m.is_nan() {
        return Err(invalid("m", "dimension parameter is NaN"));
    }
    if m.is_infinite() {
        if m < 0.0 {
            return Err(invalid("m", "dimension parameter must be at least n"));
        }
        return Ok(0.0);
    }
    let gap = m - n;
    if gap < -DIMENSION_GAP_EPS {
        return Err(invalid("m", format!("m = {m} is below the dimension n = {n}")));
    }
    if gap < DIMENSION_GAP_EPS {
        if !manifold.is_potential_constant() {
            return Err(invalid("m", "m = n is only allowed for a constant potential"));
        }
        return Ok(0.0);
    }
    Ok(1.0 / gap)
}

/// Per-node components of `Ric_{m,n}(L)` in the orthonormal frame, stored as
/// `[xx, xy, yy]` (only `xx` on the circle).
pub(crate) fn bakry_emery_tensor(manifold: &WeightedManifold, m: f64) -> Result<Vec<[f64; 3]>> {
    let coeff = rank_one_coefficient(manifold, m)?;
    if manifold.is_potential_constant() {
        return Ok(vec![[0.0; 3]; manifold.len()]);
    }
    let spectral = manifold.spectral();
    let inv_a = 1.0 / manifold.metric_factor();
    let spec = spectral.forward(manifold.potential());
    let scale2 = inv_a * inv_a;
    if manifold.dim() == 1 {
        let dx = spectral.derivative_of(&spec, 0);
        let dxx = spectral.second_derivative_of(&spec, 0, 0);
        Ok(dx
            .iter()
            .zip(&dxx)
            .map(|(g, h)| [scale2 * (h - coeff * g * g), 0.0, 0.0])
            .collect())
    } else {
        let dx = spectral.derivative_of(&spec, 0);
        let dy = spectral.derivative_of(&spec, 1);
        let dxx = spectral.second_derivative_of(&spec, 0, 0);
        let dxy = spectral.second_derivative_of(&spec, 0, 1);
        let dyy = spectral.second_derivative_of(&spec, 1, 1);
        Ok((0..manifold.len())
            .map(|i| {
                [
                    scale2 * (dxx[i] - coeff * dx[i] * dx[i]),
                    scale2 * (dxy[i] - coeff * dx[i] * dy[i]),
                    scale2 * (dyy[i] - coeff * dy[i] * dy[i]),
                ]
            })
            .collect())
    }
}

pub(crate) fn tensor_min_eig(dim: usize, t: [f64; 3]) -> f64 {
    if dim == 1 {
        t[0]
    } else {
        min_eig2(t[0], t[1], t[2])
    }
}

/// Minimum of the smallest eigenvalue of a band-limited tensor field,
/// refined between nodes by golden-section search on the interpolant.
pub(crate) fn refined_tensor_min(
    manifold: &WeightedManifold,
    tensor: &[[f64; 3]],
    shift: f64,
) -> (f64, [f64; 2]) {
    let dim = manifold.dim();
    let values: Vec<f64> = tensor.iter().map(|&t| tensor_min_eig(dim, t) + shift).collect();
    let comps: Vec<Interpolant> = (0..if dim == 1 { 1 } else { 3 })
        .map(|c| {
            let f: Vec<f64> = tensor.iter().map(|t| t[c]).collect();
            manifold.interpolant(&f)
        })
        .collect();
    let eval = |x: f64, y: f64| -> f64 {
        if dim == 1 {
            comps[0].eval(x, 0.0) + shift
        } else {
            min_eig2(comps[0].eval(x, y), comps[1].eval(x, y), comps[2].eval(x, y)) + shift
        }
    };
    refine_min(manifold, &values, eval)
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - r * (hi - lo);
    let mut d = lo + r * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - r * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + r * (hi - lo);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Refines the minimum of node samples using a pointwise evaluator of the
/// underlying smooth field. Starts from the lowest discrete local minima.
pub(crate) fn refine_min<F: Fn(f64, f64) -> f64>(
    manifold: &WeightedManifold,
    values: &[f64],
    eval: F,
) -> (f64, [f64; 2]) {
    let dim = manifold.dim();
    let nx = manifold.sizes()[0] as i64;
    let ny = if dim == 2 { manifold.sizes()[1] as i64 } else { 1 };
    let mut candidates: Vec<usize> = Vec::new();
    for iy in 0..ny {
        for ix in 0..nx {
            let i = manifold.node(ix, iy);
            let v = values[i];
            let mut is_min = true;
            'nb: for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if (dx == 0 && dy == 0) || (dim == 1 && dy != 0) {
                        continue;
                    }
                    if values[manifold.node(ix + dx, iy + dy)] < v {
                        is_min = false;
                        break 'nb;
                    }
                }
            }
            if is_min {
                candidates.push(i);
            }
        }
    }
    candidates.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    candidates.truncate(6);

    let (mut best, mut best_pt) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, &v)| (v, manifold.coordinates(i)))
        .unwrap_or((f64::INFINITY, [0.0, 0.0]));
    let hx = manifold.spacing(0);
    let hy = if dim == 2 { manifold.spacing(1) } else { 0.0 };
    for node in candidates {
        let [mut x, mut y] = manifold.coordinates(node);
        let mut val = values[node];
        let sweeps = if dim == 1 { 1 } else { 6 };
        for _ in 0..sweeps {
            let (nxp, fx) = golden_section(|s| eval(s, y), x - hx, x + hx, 60);
            if fx < val {
                x = nxp;
                val = fx;
            }
            if dim == 2 {
                let (nyp, fy) = golden_section(|s| eval(x, s), y - hy, y + hy, 60);
                if fy < val {
                    y = nyp;
                    val = fy;
                }
            }
        }
        if val < best {
            best = val;
            best_pt = [x, y];
        }
    }
    (best, best_pt)
}

/// Smallest eigenvalue of `Ric_{m,n}(L) = Ric + ∇²φ − ∇φ⊗∇φ/(m − n)` at every
/// node (`Ric ≡ 0` on the flat models). Pass `f64::INFINITY` for `Ric(L)`.
pub fn ricci_bakry_emery(manifold: &WeightedManifold, m: f64) -> Result<CurvatureField> {
    let tensor = bakry_emery_tensor(manifold, m)?;
    let dim = manifold.dim();
    let values: Vec<f64> = tensor.iter().map(|&t| tensor_min_eig(dim, t)).collect();
    let (min_value, argmin) = if manifold.is_potential_constant() {
        (0.0, manifold.coordinates(0))
    } else {
        refined_tensor_min(manifold, &tensor, 0.0)
    };
    Ok(CurvatureField {
        m,
        values,
        min_value,
        argmin,
        admissible_k: (-min_value).max(0.0),
    })
}

/// Outcome of a weighted Bishop–Gromov comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallVolumeCheck {
    pub ratio: f64,
    pub bound: f64,
    pub tol: f64,
    pub ok: bool,
}

/// Relative slack allowed on the Bishop–Gromov bound (quadrature error).
pub const BALL_RATIO_TOL: f64 = 1e-9;

/// `μ(B(y, R))/μ(B(y, r)) ≤ (R/r)^m · exp(√((m−1)K)·R)`.
pub fn ball_volume_ratio_check(
    manifold: &WeightedManifold,
    m: f64,
    k: f64,
    center: usize,
    r: f64,
    big_r: f64,
) -> Result<BallVolumeCheck> {
    if !(m.is_finite() && m >= manifold.dim() as f64) {
        return Err(invalid("m", format!("m = {m} must be finite and at least n")));
    }
    if !(k.is_finite() && k >= 0.0) {
        return Err(invalid("K", format!("K = {k} must be non-negative")));
    }
    if center >= manifold.len() {
        return Err(invalid("y", format!("node {center} is out of range")));
    }
    if !(r > 0.0 && r < big_r) {
        return Err(invalid("r", format!("need 0 < r < R, got r = {r}, R = {big_r}")));
    }
    if big_r > manifold.injectivity_scale() {
        return Err(invalid(
            "R",
            format!("R = {big_r} exceeds the injectivity scale {}", manifold.injectivity_scale()),
        ));
    }
    let ratio = ball_measure(manifold, center, big_r) / ball_measure(manifold, center, r);
    let bound = (big_r / r).powf(m) * (((m - 1.0) * k).sqrt() * big_r).exp();
    Ok(BallVolumeCheck {
        ratio,
        bound,
        tol: BALL_RATIO_TOL,
        ok: ratio <= bound * (1.0 + BALL_RATIO_TOL),
    })
}

/// `μ(B(y, ρ))` by exact integration of the density interpolant (circle) or
/// polar Gauss–Legendre quadrature (torus).
pub fn ball_measure(manifold: &WeightedManifold, center: usize, radius: f64) -> f64 {
    let density: Vec<f64> = manifold
        .weights()
        .iter()
        .map(|w| w / manifold.cell_volume())
        .collect();
    let interp = manifold.interpolant(&density);
    let [cx, cy] = manifold.coordinates(center);
    let rho = radius / manifold.metric_factor();
    if manifold.dim() == 1 {
        return interp.integrate_interval(cx - rho, cx + rho);
    }
    let (nodes, wts) = gauss_legendre(48);
    let n_theta = 128;
    let mut total = 0.0;
    for (s, ws) in nodes.iter().zip(&wts) {
        let radial = 0.5 * rho * (s + 1.0);
        let mut ring = 0.0;
        for j in 0..n_theta {
            let th = 2.0 * PI * j as f64 / n_theta as f64;
            ring += interp.eval(cx + radial * th.cos(), cy + radial * th.sin());
        }
        total += ws * 0.5 * rho * radial * ring * 2.0 * PI / n_theta as f64;
    }
    total
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}
