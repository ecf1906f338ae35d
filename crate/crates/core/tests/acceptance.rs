//! End-to-end acceptance run: twelve criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so every line is printed even when an
//! earlier criterion fails. The process exits non-zero if any criterion fails.

use std::error::Error;
use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::SeedableRng;

use witten_lab::entropy::{
    classical_w_derivative, entropy_series, tilde_w_comparison, w_derivative_decomposition, w_monotonicity_check,
    EntropySeries, SeriesOptions,
};
use witten_lab::geometry::ricci_bakry_emery;
use witten_lab::harnack::{
    hamilton_harnack_defect, integrated_harnack_check, integrated_harnack_pairs, kernel_dt_log_bounds, li_yau_defect,
    sup_bound_defect, sup_over,
};
use witten_lab::heatflow::{
    evolve, evolve_fixed, flat_kernel, initial_bump, initial_delta, EvolveOptions, HeatState, Scheme,
};
use witten_lab::operator::{bochner_residual, inner_mu, integrate_mu, random_band_limited, witten_laplacian};
use witten_lab::ricciflow::{
    entropy_dissipation_on_flow, evolve_heat_on_flow, fit_flow_k, flow_entropy_series, make_flow,
    super_ricci_flow_margin, uniform_times, w_decomposition_on_flow, FlowFamily,
};
use witten_lab::{build_manifold, ManifoldConfig, PotentialConfig, WeightedManifold};

type Res<T> = Result<T, Box<dyn Error>>;

const SNAPSHOTS: [f64; 5] = [0.05, 0.1, 0.5, 1.0, 2.0];
const CIRCLE_N: usize = 256;
const TORUS_N: usize = 64;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn circle(n: usize, period: f64, pot: PotentialConfig) -> WeightedManifold {
    build_manifold(&ManifoldConfig::circle(n, period, pot)).expect("circle")
}

fn torus(n: usize, period: f64, pot: PotentialConfig) -> WeightedManifold {
    build_manifold(&ManifoldConfig::torus(n, period, pot)).expect("torus")
}

/// One cell of the model matrix, evolved from a bump at `t = 0`.
struct Model {
    label: String,
    manifold: WeightedManifold,
    ms: Vec<f64>,
    initial: HeatState,
    snapshots: Vec<HeatState>,
    sample: Vec<usize>,
}

fn potentials() -> [(&'static str, PotentialConfig); 3] {
    [
        ("phi=0", PotentialConfig::zero()),
        ("phi=0.5cos", PotentialConfig::cosine(0.5, 1.0)),
        ("phi=cos", PotentialConfig::cosine(1.0, 1.0)),
    ]
}

fn model_matrix(scale: usize) -> Res<Vec<Model>> {
    let mut out = Vec::new();
    for (name, pot) in potentials() {
        for dim in [1, 2] {
            let (manifold, kappa, sample) = if dim == 1 {
                let n = CIRCLE_N * scale;
                let m = circle(n, 2.0 * PI, pot.clone());
                let sample = (0..8).map(|j| j * n / 8).collect();
                (m, 8.0, sample)
            } else {
                let n = TORUS_N * scale;
                let m = torus(n, 2.0 * PI, pot.clone());
                let sample = (0..4)
                    .flat_map(|i| (0..2).map(move |j| (i * n / 4, j * n / 2)))
                    .map(|(ix, iy)| m.node(ix as i64, iy as i64))
                    .collect();
                (m, 4.0, sample)
            };
            let n = dim as f64;
            let mut ms = vec![n + 1.0, n + 2.0, 2.0 * n];
            ms.sort_by(f64::total_cmp);
            ms.dedup();
            let source = manifold.node(manifold.sizes()[0] as i64 / 3, 0);
            let initial = initial_bump(&manifold, source, kappa)?;
            let times = [0.05, 0.1, 0.2, 0.5, 1.0, 2.0];
            let ev = evolve(&manifold, &initial, &times, &EvolveOptions::default())?;
            out.push(Model {
                label: format!("{}/{name}", if dim == 1 { "circle" } else { "torus" }),
                manifold,
                ms,
                initial,
                snapshots: ev.snapshots,
                sample,
            });
        }
    }
    Ok(out)
}

fn at(snaps: &[HeatState], t: f64) -> &HeatState {
    snaps.iter().find(|s| (s.time - t).abs() < 1e-12).expect("snapshot")
}

fn admissible(manifold: &WeightedManifold, m: f64) -> Res<f64> {
    Ok(ricci_bakry_emery(manifold, m)?.admissible_k)
}

fn c1_bochner() -> Res<Outcome> {
    let mut rng = StdRng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for pot in [PotentialConfig::zero(), PotentialConfig::cosine(1.0, 1.0)] {
        for (m, band) in [(circle(CIRCLE_N, 2.0 * PI, pot.clone()), 10), (torus(TORUS_N, 2.0 * PI, pot), 6)] {
            for _ in 0..50 {
                let f = random_band_limited(&m, band, &mut rng);
                worst = worst.max(bochner_residual(&m, &f).relative());
            }
        }
    }
    Ok(outcome(worst <= 1e-8, format!("max relative residual {worst:.2e} (tol 1e-8)")))
}

fn c2_self_adjoint_mass() -> Res<Outcome> {
    let mut rng = StdRng::seed_from_u64(2);
    let mut worst_sa: f64 = 0.0;
    for pot in [PotentialConfig::zero(), PotentialConfig::cosine(1.0, 1.0)] {
        for (m, band) in [(circle(CIRCLE_N, 2.0 * PI, pot.clone()), 10), (torus(TORUS_N, 2.0 * PI, pot), 6)] {
            for _ in 0..20 {
                let f = random_band_limited(&m, band, &mut rng);
                let h = random_band_limited(&m, band, &mut rng);
                let lf = witten_laplacian(&m, &f);
                let lh = witten_laplacian(&m, &h);
                let a = inner_mu(&m, &f, &lh);
                let b = inner_mu(&m, &h, &lf);
                let norm = |v: &[f64]| inner_mu(&m, v, v).sqrt();
                let scale = (norm(&f) * norm(&lh)).max(norm(&h) * norm(&lf));
                worst_sa = worst_sa.max((a - b).abs() / scale);
            }
        }
    }
    // Kernel runs on a circle small enough that t = 1e−3 is resolvable.
    let mut worst_drift: f64 = 0.0;
    for pot in [PotentialConfig::zero(), PotentialConfig::cosine(0.5, 4.0 * PI)] {
        let m = circle(CIRCLE_N, 0.5, pot);
        let start = initial_delta(&m, 0, 1e-3)?;
        let m0 = start.mass(&m);
        let ev = evolve(&m, &start, &[0.01, 0.1, 0.5, 1.0, 2.0], &EvolveOptions::default())?;
        for s in &ev.snapshots {
            worst_drift = worst_drift.max((s.mass(&m) - m0).abs());
        }
    }
    Ok(outcome(
        worst_sa <= 1e-10 && worst_drift <= 1e-10,
        format!("self-adjointness {worst_sa:.2e} (tol 1e-10), mass drift {worst_drift:.2e} (tol 1e-10)"),
    ))
}

fn c3_li_yau() -> Res<Outcome> {
    let t = 1e-3;
    let m = circle(CIRCLE_N, 0.5, PotentialConfig::zero());
    let s = initial_delta(&m, 0, t)?;
    let r = li_yau_defect(&m, &s, 1.0)?;
    let hi = 1e-3 / (2.0 * t);
    Ok(outcome(
        r.min_defect >= -1e-8 && r.min_defect <= hi,
        format!("min defect {:.3e} in [-1e-8, {hi:.1e}]", r.min_defect),
    ))
}

fn c4_hamilton(models: &[Model]) -> Res<Outcome> {
    let mut worst = f64::INFINITY;
    let mut where_ = String::new();
    let mut count = 0;
    for md in models {
        for &m in &md.ms {
            let k = admissible(&md.manifold, m)?;
            for &t in &SNAPSHOTS {
                let r = hamilton_harnack_defect(&md.manifold, at(&md.snapshots, t), m, k)?;
                count += 1;
                if r.relative_min_defect() < worst {
                    worst = r.relative_min_defect();
                    where_ = format!("{} m={m} K={k:.4} t={t}", md.label);
                }
            }
        }
    }
    Ok(outcome(
        worst >= -1e-6,
        format!("{count} reports, worst relative defect {worst:.3e} at {where_}"),
    ))
}

fn c5_integrated(models: &[Model]) -> Res<Outcome> {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    let mut all = true;
    for md in models {
        for &m in &md.ms {
            let k = admissible(&md.manifold, m)?;
            for (tau, big_t) in [(0.05, 0.2), (0.1, 0.5)] {
                for c in integrated_harnack_pairs(&md.manifold, &md.snapshots, &md.sample, tau, big_t, m, k)? {
                    count += 1;
                    all &= c.ok;
                    worst = worst.max(c.lhs / c.rhs);
                }
            }
        }
    }
    // Diagonal, K = 0, exact kernels of the flat models: u(x,τ)/u(x,T) → (T/τ)^{n/2}.
    let mut diag_err: f64 = 0.0;
    for (m, dim) in [
        (circle(CIRCLE_N, 2.0 * PI, PotentialConfig::zero()), 1.0),
        (torus(TORUS_N, 2.0 * PI, PotentialConfig::zero()), 2.0),
    ] {
        for (tau, big_t) in [(0.05, 0.2), (0.1, 0.5)] {
            let snaps: Vec<HeatState> = [tau, big_t]
                .iter()
                .map(|&t| {
                    let mut u = flat_kernel(&m, 0, t);
                    let mass = integrate_mu(&m, &u);
                    u.iter_mut().for_each(|v| *v /= mass);
                    HeatState::new(t, u)
                })
                .collect();
            let c = integrated_harnack_check(&m, &snaps, 0, 0, tau, big_t, dim, 0.0)?;
            let expect = (big_t / tau).powf(0.5 * dim);
            all &= c.ok;
            diag_err = diag_err.max((c.lhs / expect - 1.0).abs());
        }
    }
    Ok(outcome(
        all && diag_err <= 0.01,
        format!("{count} pairs, max lhs/rhs {worst:.4}; diagonal K=0 ratio error {diag_err:.2e} (tol 1e-2)"),
    ))
}

fn c6_sup_bound(models: &[Model]) -> Res<Outcome> {
    let mut worst = f64::INFINITY;
    let mut ordered = true;
    let mut count = 0;
    for md in models {
        let mut all = md.snapshots.clone();
        all.push(md.initial.clone());
        let a = sup_over(&all);
        for &m in &md.ms {
            let k = admissible(&md.manifold, m)?.max(0.1);
            for &t in &SNAPSHOTS {
                let r = sup_bound_defect(&md.manifold, at(&md.snapshots, t), m, k, a)?;
                count += 1;
                worst = worst.min(r.standard.relative_min_defect()).min(r.variant.relative_min_defect());
                ordered &= r.variant.defect.iter().zip(&r.standard.defect).all(|(v, s)| v >= s);
            }
        }
    }
    Ok(outcome(
        worst >= -1e-6 && ordered,
        format!("{count} report pairs, worst relative defect {worst:.3e}, variant >= standard: {ordered}"),
    ))
}

const KERNEL_TIMES: [f64; 5] = [0.25, 0.3, 0.5, 1.0, 2.0];

/// Kernel snapshots of a separable model, each built directly from the
/// eigen decomposition of the discrete operator.
fn kernel_snapshots(manifold: &WeightedManifold) -> Res<Vec<HeatState>> {
    Ok(KERNEL_TIMES
        .iter()
        .map(|&t| initial_delta(manifold, 0, t))
        .collect::<Result<_, _>>()?)
}

fn kernel_fit(manifold: &WeightedManifold, m: f64) -> Res<(bool, f64, f64)> {
    let k = admissible(manifold, m)?;
    let r = kernel_dt_log_bounds(manifold, &kernel_snapshots(manifold)?, 0, m, k)?;
    let worst = r.lower.iter().map(|l| l.relative_min_defect()).fold(f64::INFINITY, f64::min);
    Ok((r.ok, worst, r.fitted_c))
}

fn c7_kernel_dt() -> Res<Outcome> {
    let mut ok = true;
    let mut parts = Vec::new();
    type Case = (&'static str, fn(usize) -> WeightedManifold, usize, f64);
    let cases: [Case; 2] = [
        ("circle", |n| circle(n, 2.0 * PI, PotentialConfig::cosine(1.0, 1.0)), CIRCLE_N, 2.0),
        ("torus", |n| torus(n, 2.0 * PI, PotentialConfig::cosine(1.0, 1.0)), TORUS_N, 3.0),
    ];
    for (label, make, n, m) in cases {
        let (ok1, w1, c1) = kernel_fit(&make(n), m)?;
        let (ok2, w2, c2) = kernel_fit(&make(2 * n), m)?;
        let drift = (c2 / c1 - 1.0).abs();
        ok &= ok1 && ok2 && drift <= 0.05;
        parts.push(format!(
            "{label}: worst lower defect {:.2e}, C {c1:.5} -> {c2:.5} ({:.2}%)",
            w1.min(w2),
            100.0 * drift
        ));
    }
    // The time-stepped kernel agrees with the direct one.
    let m = circle(CIRCLE_N, 2.0 * PI, PotentialConfig::cosine(1.0, 1.0));
    let direct = kernel_snapshots(&m)?;
    let ev = evolve(&m, &direct[0], &KERNEL_TIMES[1..], &EvolveOptions::default())?;
    let mut gap: f64 = 0.0;
    for (s, d) in ev.snapshots.iter().zip(&direct[1..]) {
        let scale = d.max();
        gap = s.u.iter().zip(&d.u).fold(gap, |g, (a, b)| g.max((a - b).abs() / scale));
    }
    ok &= gap <= 1e-6;
    parts.push(format!("stepped vs direct kernel {gap:.1e}"));
    Ok(outcome(ok, parts.join("; ")))
}

fn series_for(md: &Model, m: f64, k: f64) -> Res<EntropySeries> {
    Ok(entropy_series(&md.manifold, &md.initial, &SNAPSHOTS, m, k, &SeriesOptions::default())?)
}

fn c8_dissipation(models: &[Model]) -> Res<Outcome> {
    let (mut e1, mut e2): (f64, f64) = (0.0, 0.0);
    for md in models.iter().filter(|md| md.label.ends_with("phi=cos")) {
        let m = md.ms[0];
        let s = series_for(md, m, admissible(&md.manifold, m)?)?;
        for r in &s.rows {
            e1 = e1.max(r.dh_relative_error());
            e2 = e2.max(r.d2h_relative_error());
        }
    }
    Ok(outcome(
        e1 <= 1e-4 && e2 <= 1e-3,
        format!("dH/dt error {e1:.2e} (tol 1e-4), d2H/dt2 error {e2:.2e} (tol 1e-3)"),
    ))
}

fn c9_w_formula(models: &[Model]) -> Res<Outcome> {
    let mut resid: f64 = 0.0;
    let mut mono = true;
    let mut excess = f64::NEG_INFINITY;
    for md in models {
        for &m in &md.ms {
            let k = admissible(&md.manifold, m)?;
            let s = series_for(md, m, k)?;
            for r in &s.rows {
                resid = resid.max(r.relative_residual());
            }
            let mc = w_monotonicity_check(&s, 1e-9);
            mono &= mc.ok;
            excess = excess.max(mc.worst_excess);
        }
    }
    // K = 0 reduction against the independently assembled classical terms.
    let mut classical: f64 = 0.0;
    for md in models {
        for &m in &md.ms {
            for &t in &SNAPSHOTS {
                let st = at(&md.snapshots, t);
                let d = w_derivative_decomposition(&md.manifold, st, m, 0.0)?;
                let c = classical_w_derivative(&md.manifold, st, m)?;
                for (a, b) in [(d.t1, c.hessian), (d.t2, c.ricci), (d.t3, c.drift), (d.formula, c.total)] {
                    classical = classical.max((a - b).abs() / (1.0 + b.abs()));
                }
                classical = classical.max(d.t4.abs());
            }
        }
    }
    Ok(outcome(
        resid <= 1e-3 && mono && classical <= 1e-10,
        format!(
            "formula residual {resid:.2e} (tol 1e-3), monotone {mono} (max formula-bound {excess:.2e}), K=0 terms {classical:.2e} (tol 1e-10)"
        ),
    ))
}

fn c10_comparison() -> Res<Outcome> {
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        let m = 1.0 + i as f64;
        for j in 0..10 {
            let k = 0.1 * j as f64;
            for l in 0..10 {
                let t = 0.1 * (l + 1) as f64;
                let c = tilde_w_comparison(m, k, t)?;
                worst = worst.max(c.identity_residual.abs() / (1.0 + c.target.abs()));
            }
        }
    }
    let spot = tilde_w_comparison(2.0, 1.0, 1.0)?;
    let expect = 5.0 * 4f64.exp() - 4.0;
    let spot_err = (spot.d2_dt2_tpsi / expect - 1.0).abs();
    Ok(outcome(
        worst <= 1e-9 && spot_err <= 1e-6,
        format!(
            "lattice residual {worst:.2e} (tol 1e-9), spot {:.6} vs {expect:.6} ({spot_err:.1e})",
            spot.d2_dt2_tpsi
        ),
    ))
}

fn c11_flows() -> Res<Outcome> {
    let base = circle(CIRCLE_N, 2.0 * PI, PotentialConfig::cosine(0.5, 1.0));
    let opts = EvolveOptions::default();
    let source = base.node(CIRCLE_N as i64 / 3, 0);
    let initial = initial_bump(&base, source, 8.0)?;

    // Static flow against the fixed-metric pipeline.
    let still = make_flow(base.clone(), FlowFamily::Constant { lambda0: 0.0 }, 2.0)?;
    let a = evolve_heat_on_flow(&still, &initial, &SNAPSHOTS, &opts)?;
    let b = evolve(&base, &initial, &SNAPSHOTS, &opts)?;
    let mut static_err: f64 = 0.0;
    for (p, q) in a.snapshots.iter().zip(&b.snapshots) {
        let scale = q.max();
        for (x, y) in p.u.iter().zip(&q.u) {
            static_err = static_err.max((x - y).abs() / scale);
        }
        let d1 = w_decomposition_on_flow(&still, p, 2.0, 0.25)?;
        let d2 = w_derivative_decomposition(&base, q, 2.0, 0.25)?;
        static_err = static_err.max((d1.formula - d2.formula).abs() / (1.0 + d2.formula.abs()));
    }
    for row in entropy_dissipation_on_flow(&still, &a.snapshots)? {
        let s = at(&b.snapshots, row.t);
        let h = witten_lab::entropy::entropy_h(&base, s)?;
        static_err = static_err.max((row.h - h.h).abs() / (1.0 + h.h.abs()));
        static_err = static_err.max((row.dh_dt - h.dh_dt).abs() / (1.0 + h.dh_dt.abs()));
    }

    // Shrinking circle with the fitted K.
    let shrink = make_flow(base.clone(), FlowFamily::Linear { lambda0: 0.0, rate: -0.5 }, 2.0)?;
    let mut fit_times = uniform_times(2.0, 40);
    fit_times.extend(SNAPSHOTS);
    fit_times.sort_by(f64::total_cmp);
    let m = 2.0;
    let k = fit_flow_k(&shrink, m, &fit_times)?;
    let margin = super_ricci_flow_margin(&shrink, m, k, &fit_times)?;
    let series = flow_entropy_series(&shrink, &initial, &SNAPSHOTS, m, k, &SeriesOptions::default())?;
    let mono = w_monotonicity_check(&series, 1e-9);
    let resid = series.rows.iter().map(|r| r.relative_residual()).fold(0.0, f64::max);

    // μ is fixed along the flow.
    let mut mu_drift: f64 = 0.0;
    for &t in &fit_times {
        mu_drift = mu_drift.max(shrink.measure_drift(&base, t)?);
    }

    // Time change: on λ = −t/2 with constant φ, u(t) = v(e^t − 1) for the static v.
    let flat = circle(64, 2.0 * PI, PotentialConfig::zero());
    let flow = make_flow(flat.clone(), FlowFamily::Linear { lambda0: 0.0, rate: -0.5 }, 1.0)?;
    let u0: Vec<f64> = (0..64)
        .map(|i| (1.0 + 0.5 * flat.coordinates(i)[0].cos()) / (2.0 * PI))
        .collect();
    let start = HeatState::new(0.0, u0);
    let oracle = |s: f64| -> Vec<f64> {
        (0..64)
            .map(|i| (1.0 + 0.5 * (-s).exp() * flat.coordinates(i)[0].cos()) / (2.0 * PI))
            .collect()
    };
    let exact = oracle(1f64.exp() - 1.0);
    let errs: Vec<f64> = [10, 20, 40]
        .iter()
        .map(|&n| -> Res<f64> {
            let s = evolve_fixed(&flow, &start, 1.0, n, Scheme::CrankNicolson)?;
            Ok(s.u.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
        })
        .collect::<Res<_>>()?;
    let ratios = [errs[0] / errs[1], errs[1] / errs[2]];
    let order_ok = ratios.iter().all(|r| (3.6..=4.4).contains(r));

    let ok = static_err <= 1e-12 && margin.ok && mono.ok && mu_drift <= 1e-14 && order_ok;
    Ok(outcome(
        ok,
        format!(
            "static {static_err:.1e}; shrinking K={k:.4} margin {:.1e}, max formula-T4 {:.2e}, formula residual {resid:.1e}; mu drift {mu_drift:.1e}; time-change ratios {:.3}, {:.3}",
            margin.min_value, mono.worst_excess, ratios[0], ratios[1]
        ),
    ))
}

/// Ok-flags of the pointwise inequalities over the model matrix.
fn inequality_flags(models: &[Model]) -> Res<Vec<bool>> {
    let mut flags = Vec::new();
    for md in models {
        let mut all = md.snapshots.clone();
        all.push(md.initial.clone());
        let a = sup_over(&all);
        for &m in &md.ms {
            let k = admissible(&md.manifold, m)?;
            for &t in &SNAPSHOTS {
                let s = at(&md.snapshots, t);
                flags.push(hamilton_harnack_defect(&md.manifold, s, m, k)?.ok);
                let sb = sup_bound_defect(&md.manifold, s, m, k.max(0.1), a)?;
                flags.push(sb.standard.ok);
                flags.push(sb.variant.ok);
            }
            let n = md.manifold.sizes()[0] as i64;
            let nodes: Vec<usize> = (0..8).map(|j| md.manifold.node(j * n / 8, 0)).collect();
            for (tau, big_t) in [(0.05, 0.2), (0.1, 0.5)] {
                let pairs = integrated_harnack_pairs(&md.manifold, &md.snapshots, &nodes, tau, big_t, m, k)?;
                flags.push(pairs.iter().all(|c| c.ok));
            }
        }
    }
    Ok(flags)
}

fn c12_convergence(models: &[Model]) -> Res<Outcome> {
    let mut ratios = Vec::new();
    // Circle: cos x decays like e^{−t}; torus: cos x cos y like e^{−2t}.
    let cases: [(WeightedManifold, f64); 2] = [
        (circle(64, 2.0 * PI, PotentialConfig::zero()), 1.0),
        (torus(32, 2.0 * PI, PotentialConfig::zero()), 2.0),
    ];
    for (m, rate) in cases {
        let shape: Vec<f64> = (0..m.len())
            .map(|i| {
                let [x, y] = m.coordinates(i);
                if m.dim() == 1 {
                    x.cos()
                } else {
                    x.cos() * y.cos()
                }
            })
            .collect();
        let mass = m.total_measure();
        let start = HeatState::new(0.0, shape.iter().map(|c| (1.0 + 0.5 * c) / mass).collect());
        let exact: Vec<f64> = shape.iter().map(|c| (1.0 + 0.5 * (-rate).exp() * c) / mass).collect();
        let errs: Vec<f64> = [10, 20, 40]
            .iter()
            .map(|&n| -> Res<f64> {
                let s = evolve_fixed(&m, &start, 1.0, n, Scheme::CrankNicolson)?;
                Ok(s.u.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            })
            .collect::<Res<_>>()?;
        ratios.push(errs[0] / errs[1]);
        ratios.push(errs[1] / errs[2]);
    }
    let order_ok = ratios.iter().all(|r| (3.6..=4.4).contains(r));

    let coarse = inequality_flags(models)?;
    let fine_models = model_matrix(2)?;
    let fine = inequality_flags(&fine_models)?;
    let same = coarse == fine;
    let passing = coarse.iter().filter(|&&f| f).count();
    Ok(outcome(
        order_ok && same,
        format!(
            "dt-halving ratios [{}]; {} flags unchanged under N -> 2N: {same} ({passing} ok)",
            ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join(", "),
            coarse.len()
        ),
    ))
}

fn report(id: usize, name: &str, budget: Option<f64>, f: impl FnOnce() -> Res<Outcome>) -> bool {
    let clock = Instant::now();
    let result = f();
    let secs = clock.elapsed().as_secs_f64();
    let in_budget = budget.is_none_or(|b| secs <= b);
    let budget_text = budget.map_or(String::new(), |b| format!(" / {b:.0} s"));
    let (ok, detail) = match result {
        Ok(o) => (o.ok && in_budget, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    println!(
        "{} {id:>2} {name:<28} [{secs:.2} s{budget_text}] {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    ok
}

fn main() -> ExitCode {
    let mut results = Vec::new();
    results.push(report(1, "bochner identity", Some(5.0), c1_bochner));
    results.push(report(2, "self-adjointness and mass", Some(10.0), c2_self_adjoint_mass));
    results.push(report(3, "li-yau near-equality", Some(10.0), c3_li_yau));

    let clock = Instant::now();
    let models = match model_matrix(1) {
        Ok(m) => m,
        Err(e) => {
            println!("FAIL model matrix evolution: {e}");
            return ExitCode::FAILURE;
        }
    };
    let shared = clock.elapsed().as_secs_f64();
    println!("     model matrix evolved in {shared:.2} s (counted in criterion 4)");

    results.push(report(4, "hamilton harnack", Some(120.0 - shared), || c4_hamilton(&models)));
    results.push(report(5, "integrated harnack", Some(30.0), || c5_integrated(&models)));
    results.push(report(6, "sup-bound harnack", Some(30.0), || c6_sup_bound(&models)));
    results.push(report(7, "kernel derivative bounds", Some(30.0), c7_kernel_dt));
    results.push(report(8, "entropy dissipation", Some(30.0), || c8_dissipation(&models)));
    results.push(report(9, "w-entropy formula", Some(120.0), || c9_w_formula(&models)));
    results.push(report(10, "comparison identity", Some(1.0), c10_comparison));
    results.push(report(11, "flows", Some(60.0), c11_flows));
    results.push(report(12, "convergence", None, || c12_convergence(&models)));

    let passed = results.iter().filter(|&&r| r).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
