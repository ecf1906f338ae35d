//! Discrete differential operators on a [`WeightedManifold`].
//!
//! Scalar fields are plain node vectors. All derivatives are spectral and
//! expressed in the orthonormal frame, so on a conformally scaled model the
//! gradient carries a factor `1/a` and the Hessian `1/a²`.
//!
//! The Witten Laplacian is assembled in divergence form,
//! `L f = w⁻¹ Σₐ Dₐ(w Dₐ f)`, with `D` the real skew spectral derivative. This
//! makes `L` self-adjoint in `⟨·,·⟩_μ` and `Σ w·Lf = 0` up to rounding.

use std::io::Write;

use rand::Rng;

use crate::geometry::{bakry_emery_tensor, WeightedManifold};

/// Per-node vector in the orthonormal frame.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub components: Vec<Vec<f64>>,
}

impl VectorField {
    pub fn len(&self) -> usize {
        self.components[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dot_at(&self, other: &VectorField, i: usize) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a[i] * b[i])
            .sum()
    }

    pub fn norm_sq_at(&self, i: usize) -> f64 {
        self.components.iter().map(|c| c[i] * c[i]).sum()
    }

    pub fn norm_sq(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.norm_sq_at(i)).collect()
    }

    pub fn dot(&self, other: &VectorField) -> Vec<f64> {
        (0..self.len()).map(|i| self.dot_at(other, i)).collect()
    }
}

/// Per-node symmetric tensor stored as `[xx, xy, yy]`; only `xx` is used on
/// the circle. Symmetry holds by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensorField {
    pub dim: usize,
    pub entries: Vec<[f64; 3]>,
}

impl SymTensorField {
    pub fn trace_at(&self, i: usize) -> f64 {
        let t = self.entries[i];
        if self.dim == 1 {
            t[0]
        } else {
            t[0] + t[2]
        }
    }

    /// Frobenius norm squared `|T|²`.
    pub fn norm_sq_at(&self, i: usize) -> f64 {
        let t = self.entries[i];
        if self.dim == 1 {
            t[0] * t[0]
        } else {
            t[0] * t[0] + 2.0 * t[1] * t[1] + t[2] * t[2]
        }
    }

    /// `|T + c·g|²` at a node.
    pub fn shifted_norm_sq_at(&self, i: usize, c: f64) -> f64 {
        let t = self.entries[i];
        if self.dim == 1 {
            (t[0] + c).powi(2)
        } else {
            (t[0] + c).powi(2) + 2.0 * t[1] * t[1] + (t[2] + c).powi(2)
        }
    }

    /// Quadratic form `T(v, v)` at a node.
    pub fn quad_at(&self, i: usize, v: &VectorField) -> f64 {
        let t = self.entries[i];
        if self.dim == 1 {
            t[0] * v.components[0][i].powi(2)
        } else {
            let (a, b) = (v.components[0][i], v.components[1][i]);
            t[0] * a * a + 2.0 * t[1] * a * b + t[2] * b * b
        }
    }
}

fn check_len(manifold: &WeightedManifold, f: &[f64]) {
    assert_eq!(
        f.len(),
        manifold.len(),
        "field length does not match the grid"
    );
}

/// Spectral gradient in the orthonormal frame.
pub fn gradient(manifold: &WeightedManifold, f: &[f64]) -> VectorField {
    check_len(manifold, f);
    let spectral = manifold.spectral();
    let spec = spectral.forward(f);
    let inv_a = 1.0 / manifold.metric_factor();
    let components = (0..manifold.dim())
        .map(|axis| {
            let mut d = spectral.derivative_of(&spec, axis);
            d.iter_mut().for_each(|v| *v *= inv_a);
            d
        })
        .collect();
    VectorField { components }
}

/// Gradient and Hessian from one forward transform.
pub fn gradient_and_hessian(manifold: &WeightedManifold, f: &[f64]) -> (VectorField, SymTensorField) {
    check_len(manifold, f);
    let spectral = manifold.spectral();
    let spec = spectral.forward(f);
    let inv_a = 1.0 / manifold.metric_factor();
    let inv_a2 = inv_a * inv_a;
    let dim = manifold.dim();
    let components: Vec<Vec<f64>> = (0..dim)
        .map(|axis| {
            let mut d = spectral.derivative_of(&spec, axis);
            d.iter_mut().for_each(|v| *v *= inv_a);
            d
        })
        .collect();
    let entries = if dim == 1 {
        spectral
            .second_derivative_of(&spec, 0, 0)
            .into_iter()
            .map(|v| [v * inv_a2, 0.0, 0.0])
            .collect()
    } else {
        let xx = spectral.second_derivative_of(&spec, 0, 0);
        let xy = spectral.second_derivative_of(&spec, 0, 1);
        let yy = spectral.second_derivative_of(&spec, 1, 1);
        (0..f.len())
            .map(|i| [xx[i] * inv_a2, xy[i] * inv_a2, yy[i] * inv_a2])
            .collect()
    };
    (VectorField { components }, SymTensorField { dim, entries })
}

/// Spectral Hessian `∇²f` (full mixed partials on the torus).
pub fn hessian(manifold: &WeightedManifold, f: &[f64]) -> SymTensorField {
    gradient_and_hessian(manifold, f).1
}

/// Flat Laplace–Beltrami operator, the trace of the spectral Hessian.
pub fn laplacian(manifold: &WeightedManifold, f: &[f64]) -> Vec<f64> {
    let h = hessian(manifold, f);
    (0..f.len()).map(|i| h.trace_at(i)).collect()
}

/// Witten Laplacian `Lf = e^{φ} div(e^{−φ} ∇f)` in divergence form.
pub fn witten_laplacian(manifold: &WeightedManifold, f: &[f64]) -> Vec<f64> {
    check_len(manifold, f);
    let spectral = manifold.spectral();
    let w = manifold.weights();
    let inv_a2 = manifold.metric_factor().powi(-2);
    let mut out = vec![0.0; f.len()];
    for axis in 0..manifold.dim() {
        let flux: Vec<f64> = spectral
            .axis_derivative(f, axis)
            .iter()
            .zip(w)
            .map(|(d, w)| d * w)
            .collect();
        let div = spectral.axis_derivative(&flux, axis);
        for ((o, d), w) in out.iter_mut().zip(&div).zip(w) {
            *o += d / w;
        }
    }
    out.iter_mut().for_each(|v| *v *= inv_a2);
    out
}

/// `Δf − ∇φ·∇f`, the non-divergence form used only as a cross-check.
pub fn drift_laplacian(manifold: &WeightedManifold, f: &[f64]) -> Vec<f64> {
    let lap = laplacian(manifold, f);
    let gf = gradient(manifold, f);
    let gphi = gradient(manifold, manifold.potential());
    lap.iter()
        .enumerate()
        .map(|(i, l)| l - gphi.dot_at(&gf, i))
        .collect()
}

/// `∫ f dμ` by the periodic trapezoid rule.
pub fn integrate_mu(manifold: &WeightedManifold, f: &[f64]) -> f64 {
    check_len(manifold, f);
    f.iter().zip(manifold.weights()).map(|(f, w)| f * w).sum()
}

/// `⟨f, h⟩_μ`.
pub fn inner_mu(manifold: &WeightedManifold, f: &[f64], h: &[f64]) -> f64 {
    check_len(manifold, f);
    check_len(manifold, h);
    f.iter()
        .zip(h)
        .zip(manifold.weights())
        .map(|((f, h), w)| f * h * w)
        .sum()
}

/// `Ric(L)(v, v)` with `Ric(L) = Ric + ∇²φ` at every node.
pub(crate) fn ric_l_quadratic(manifold: &WeightedManifold, v: &VectorField) -> Vec<f64> {
    let tensor = SymTensorField {
        dim: manifold.dim(),
        entries: bakry_emery_tensor(manifold, f64::INFINITY).expect("m = ∞ is always admissible"),
    };
    (0..manifold.len()).map(|i| tensor.quad_at(i, v)).collect()
}

/// `Γ₂(f, f) = |∇²f|² + Ric(L)(∇f, ∇f)`.
pub fn gamma2(manifold: &WeightedManifold, f: &[f64]) -> Vec<f64> {
    let (g, h) = gradient_and_hessian(manifold, f);
    let ric = ric_l_quadratic(manifold, &g);
    (0..f.len()).map(|i| h.norm_sq_at(i) + ric[i]).collect()
}

/// Node-wise residual of the Bochner–Weitzenböck identity
/// `L|∇f|² − 2⟨∇f, ∇Lf⟩ = 2|∇²f|² + 2Ric(L)(∇f, ∇f)`.
#[derive(Debug, Clone)]
pub struct BochnerResidual {
    pub residual: Vec<f64>,
    /// Largest node magnitude among the four terms.
    pub term_scale: f64,
}

impl BochnerResidual {
    pub fn max_abs(&self) -> f64 {
        self.residual.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    /// `max |residual| / (1 + term_scale)`.
    pub fn relative(&self) -> f64 {
        self.max_abs() / (1.0 + self.term_scale)
    }
}

pub fn bochner_residual(manifold: &WeightedManifold, f: &[f64]) -> BochnerResidual {
    let (g, h) = gradient_and_hessian(manifold, f);
    let grad_sq = g.norm_sq();
    let l_grad_sq = witten_laplacian(manifold, &grad_sq);
    let lf = witten_laplacian(manifold, f);
    let g_lf = gradient(manifold, &lf);
    let ric = ric_l_quadratic(manifold, &g);
    let mut term_scale: f64 = 0.0;
    let residual = (0..f.len())
        .map(|i| {
            let terms = [
                l_grad_sq[i],
                2.0 * g.dot_at(&g_lf, i),
                2.0 * h.norm_sq_at(i),
                2.0 * ric[i],
            ];
            term_scale = terms.iter().fold(term_scale, |m, t| m.max(t.abs()));
            terms[0] - terms[1] - terms[2] - terms[3]
        })
        .collect();
    BochnerResidual {
        residual,
        term_scale,
    }
}

/// Random real trigonometric polynomial with wavenumber indices `|j| ≤ band`
/// per axis and coefficients uniform in `[-1, 1]`.
pub fn random_band_limited<R: Rng + ?Sized>(manifold: &WeightedManifold, band: usize, rng: &mut R) -> Vec<f64> {
    let dim = manifold.dim();
    let b = band as i64;
    let mut terms = Vec::new();
    let ky_range = if dim == 2 { -b..=b } else { 0..=0 };
    for jy in ky_range {
        for jx in -b..=b {
            terms.push((jx, jy, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        }
    }
    let periods = manifold.periods();
    (0..manifold.len())
        .map(|i| {
            let [x, y] = manifold.coordinates(i);
            terms
                .iter()
                .map(|&(jx, jy, a, c)| {
                    let mut phase = 2.0 * std::f64::consts::PI * jx as f64 * x / periods[0];
                    if dim == 2 {
                        phase += 2.0 * std::f64::consts::PI * jy as f64 * y / periods[1];
                    }
                    a * phase.cos() + c * phase.sin()
                })
                .sum()
        })
        .collect()
}

/// CSV export of a scalar field: `node, x[, y], value`.
pub fn write_field_csv<W: Write>(
    manifold: &WeightedManifold,
    label: &str,
    values: &[f64],
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "# witten-lab field v1 {label}")?;
    if manifold.dim() == 1 {
        writeln!(out, "node,x,value")?;
    } else {
        writeln!(out, "node,x,y,value")?;
    }
    for (i, v) in values.iter().enumerate() {
        let [x, y] = manifold.coordinates(i);
        if manifold.dim() == 1 {
            writeln!(out, "{i},{x:.17e},{v:.17e}")?;
        } else {
            writeln!(out, "{i},{x:.17e},{y:.17e},{v:.17e}")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_manifold, ManifoldConfig, PotentialConfig};
    use rand::rngs::StdRng;
    use rand::SeedableRng;
    use std::f64::consts::PI;

    fn circle(pot: PotentialConfig) -> WeightedManifold {
        build_manifold(&ManifoldConfig::circle(256, 2.0 * PI, pot)).unwrap()
    }

    fn xs(m: &WeightedManifold) -> Vec<f64> {
        (0..m.len()).map(|i| m.coordinates(i)[0]).collect()
    }

    #[test]
    fn constants_are_annihilated() {
        let m = circle(PotentialConfig::cosine(1.0, 1.0));
        let c = vec![3.5; m.len()];
        assert!(gradient(&m, &c).components[0].iter().all(|v| v.abs() < 1e-13));
        assert!(witten_laplacian(&m, &c).iter().all(|v| v.abs() < 1e-12));
        assert!(gamma2(&m, &c).iter().all(|v| v.abs() < 1e-24));
        assert!(bochner_residual(&m, &c).max_abs() < 1e-12);
    }

    #[test]
    fn gradient_of_closed_forms() {
        let m = circle(PotentialConfig::zero());
        let x = xs(&m);
        let f: Vec<f64> = x.iter().map(|x| x.sin()).collect();
        let g = gradient(&m, &f);
        for (d, x) in g.components[0].iter().zip(&x) {
            assert!((d - x.cos()).abs() < 1e-12);
        }
        let t = build_manifold(&ManifoldConfig::torus(64, 2.0 * PI, PotentialConfig::zero())).unwrap();
        let f: Vec<f64> = (0..t.len())
            .map(|i| {
                let [x, y] = t.coordinates(i);
                x.cos() + y.sin()
            })
            .collect();
        let g = gradient(&t, &f);
        for i in 0..t.len() {
            let [x, y] = t.coordinates(i);
            assert!((g.components[0][i] + x.sin()).abs() < 1e-12);
            assert!((g.components[1][i] - y.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn witten_laplacian_matches_drift_form() {
        let m = circle(PotentialConfig::zero());
        let x = xs(&m);
        let f: Vec<f64> = x.iter().map(|x| x.sin()).collect();
        for (l, x) in witten_laplacian(&m, &f).iter().zip(&x) {
            assert!((l + x.sin()).abs() < 1e-10);
        }
        let m = circle(PotentialConfig::cosine(1.0, 1.0));
        let lf = witten_laplacian(&m, &f);
        let drift = drift_laplacian(&m, &f);
        for i in 0..m.len() {
            let x = x[i];
            let exact = -x.sin() + x.sin() * x.cos();
            assert!((lf[i] - exact).abs() < 1e-10);
            assert!((drift[i] - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn integrals() {
        let m = circle(PotentialConfig::zero());
        let x = xs(&m);
        let f: Vec<f64> = x.iter().map(|x| x.sin().powi(2)).collect();
        assert!((integrate_mu(&m, &f) - PI).abs() < 1e-13);
        let m = circle(PotentialConfig::cosine(1.0, 1.0));
        let inv = vec![1.0 / m.total_measure(); m.len()];
        assert!((integrate_mu(&m, &inv) - 1.0).abs() < 1e-14);
        assert_eq!(integrate_mu(&m, &vec![1.0; m.len()]), m.total_measure());
    }

    #[test]
    fn gamma2_closed_forms() {
        let m = circle(PotentialConfig::zero());
        let x = xs(&m);
        let f: Vec<f64> = x.iter().map(|x| x.sin()).collect();
        for (g, x) in gamma2(&m, &f).iter().zip(&x) {
            assert!((g - x.sin().powi(2)).abs() < 1e-10);
        }
        let m = circle(PotentialConfig::cosine(1.0, 1.0));
        let f: Vec<f64> = x.iter().map(|x| 2.0 + x.sin()).collect();
        for (g, x) in gamma2(&m, &f).iter().zip(&x) {
            // (f″)² + φ″ (f′)² with φ″ = −cos x
            let exact = x.sin().powi(2) - x.cos() * x.cos().powi(2);
            assert!((g - exact).abs() < 1e-11);
        }
    }

    #[test]
    fn bochner_examples() {
        let m = circle(PotentialConfig::zero());
        let x = xs(&m);
        let f: Vec<f64> = x.iter().map(|x| x.sin()).collect();
        let r = bochner_residual(&m, &f).max_abs();
        assert!(r < 1e-8, "{r}");
        let m = circle(PotentialConfig::cosine(1.0, 1.0));
        let f: Vec<f64> = x.iter().map(|x| (2.0 * x).sin()).collect();
        assert!(bochner_residual(&m, &f).max_abs() < 1e-8);
    }

    #[test]
    fn laplacian_is_negative_and_symmetric() {
        let m = build_manifold(&ManifoldConfig::torus(32, 2.0 * PI, PotentialConfig::cosine_sine(0.7, 1.0, 0.4, 1.0))).unwrap();
        let mut rng = StdRng::seed_from_u64(7);
        let f = random_band_limited(&m, 5, &mut rng);
        let h = random_band_limited(&m, 5, &mut rng);
        let a = inner_mu(&m, &f, &witten_laplacian(&m, &h));
        let b = inner_mu(&m, &h, &witten_laplacian(&m, &f));
        assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()));
        assert!(inner_mu(&m, &f, &witten_laplacian(&m, &f)) < 0.0);
    }

    #[test]
    fn csv_has_versioned_header() {
        let m = circle(PotentialConfig::zero());
        let mut buf = Vec::new();
        write_field_csv(&m, "u", &vec![1.0; m.len()], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# witten-lab field v1 u\nnode,x,value\n0,"));
        assert_eq!(text.lines().count(), 2 + m.len());
    }
}
