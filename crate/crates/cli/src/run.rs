//! Pipeline: build → curvature → evolve → checks, with CSV output per check
//! and a plain-text summary.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::rngs::StdRng;
use rand::SeedableRng;

use witten_lab::entropy::{entropy_series, w_monotonicity_check, EntropyRow, EntropySeries, SeriesOptions};
use witten_lab::geometry::{ball_volume_ratio_check, ricci_bakry_emery};
use witten_lab::harnack::{
    hamilton_harnack_defect, integrated_harnack_pairs, kernel_dt_log_bounds, li_yau_defect, sup_bound_defect,
    sup_over, write_integrated_csv, write_reports_csv, HarnackReport,
};
use witten_lab::heatflow::{evolve, initial_bump, initial_delta, EvolveOptions, HeatState, Manifest};
use witten_lab::operator::{bochner_residual, random_band_limited};
use witten_lab::ricciflow::{fit_flow_k, flow_entropy_series, make_flow, super_ricci_flow_margin, uniform_times};
use witten_lab::{Error as CoreError, WeightedManifold};

use crate::config::{bad, CheckName, ConfigError, ExperimentConfig, InitialKind, KMode, Validated};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Curvature,
    Simulate,
    Harnack,
    Entropy,
    Flow,
    All,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Curvature => "curvature",
            Command::Simulate => "simulate",
            Command::Harnack => "harnack",
            Command::Entropy => "entropy",
            Command::Flow => "flow",
            Command::All => "all",
        }
    }

    /// Checks a subcommand may run.
    pub fn group(self) -> &'static [CheckName] {
        use CheckName::*;
        match self {
            Command::Curvature => &[Curvature, Bochner],
            Command::Simulate => &[Mass],
            Command::Harnack => &[LiYau, Hamilton, Integrated, SupBound, KernelDt],
            Command::Entropy => &[Entropy],
            Command::Flow => &[Flow],
            Command::All => &CheckName::ALL,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides `output.dir`.
    pub out: Option<PathBuf>,
    /// Overrides `checks.select`.
    pub checks: Option<Vec<CheckName>>,
    pub grid_scale: usize,
    pub seed: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{context}: {source}")]
    Numerical {
        context: String,
        #[source]
        source: CoreError,
    },
    #[error("writing {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 2,
            _ => 1,
        }
    }
}

trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, RunError>;
}

impl<T> Context<T> for Result<T, CoreError> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, RunError> {
        self.map_err(|source| RunError::Numerical {
            context: what(),
            source,
        })
    }
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: CheckName,
    pub ok: bool,
    pub lines: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub outcomes: Vec<CheckOutcome>,
    pub summary: String,
    pub out_dir: PathBuf,
}

impl RunReport {
    pub fn ok(&self) -> bool {
        self.outcomes.iter().all(|o| o.ok)
    }
}

/// Writes through a temporary file and renames, so readers never see a
/// partial file.
fn write_file<F>(dir: &Path, name: &str, body: F) -> Result<(), RunError>
where
    F: FnOnce(&mut BufWriter<fs::File>) -> io::Result<()>,
{
    let path = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    let io_err = |source| RunError::Io {
        path: path.clone(),
        source,
    };
    let file = fs::File::create(&tmp).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(io_err)?;
    drop(w);
    fs::rename(&tmp, &path).map_err(io_err)
}

fn fmt_m(m: f64) -> String {
    if m.is_infinite() {
        "inf".to_string()
    } else {
        format!("{m}")
    }
}

/// Resolves the selected checks for a subcommand.
pub fn select(config: &ExperimentConfig, command: Command, opts: &RunOptions) -> Result<Vec<CheckName>, ConfigError> {
    let wanted = opts.checks.as_ref().unwrap_or(&config.checks.select);
    let key = if opts.checks.is_some() { "--check" } else { "checks.select" };
    let selected: Vec<CheckName> = CheckName::ALL
        .into_iter()
        .filter(|c| wanted.contains(c) && command.group().contains(c))
        .collect();
    if selected.is_empty() {
        let names: Vec<&str> = command.group().iter().map(|c| c.as_str()).collect();
        return Err(bad(
            key,
            format!(
                "no selected check belongs to `{}` (its checks: {})",
                command.name(),
                names.join(", ")
            ),
        ));
    }
    Ok(selected)
}

struct Context_<'a> {
    v: &'a Validated,
    dir: PathBuf,
    seed: u64,
    start: HeatState,
    /// Start state (if `t > 0`) followed by the evolved snapshots.
    snapshots: Vec<HeatState>,
    manifest: Manifest,
}

impl Context_<'_> {
    fn manifold(&self) -> &WeightedManifold {
        &self.v.manifold
    }

    fn config(&self) -> &ExperimentConfig {
        &self.v.config
    }

    fn k_for(&self, m: f64) -> Result<f64, RunError> {
        let h = &self.config().harnack;
        match h.k_mode {
            KMode::Explicit => Ok(h.k.expect("validated")),
            KMode::Admissible | KMode::Fitted => Ok(ricci_bakry_emery(self.manifold(), m)
                .context(|| format!("curvature for m = {m}"))?
                .admissible_k),
        }
    }

    fn judge(&self, report: HarnackReport) -> HarnackReport {
        let h = &self.config().harnack;
        match h.abs_tol {
            Some(t) => report.with_tol(t),
            None => {
                let tol = h.tol * report.scale;
                report.with_tol(tol)
            }
        }
    }

    fn checked_snapshots(&self) -> impl Iterator<Item = &HeatState> {
        self.snapshots.iter().filter(|s| s.time > 0.0)
    }
}

fn evolution_times(v: &Validated, selected: &[CheckName]) -> Vec<f64> {
    let mut times = v.config.solver.times.clone();
    if selected.contains(&CheckName::Integrated) {
        for &[tau, big_t] in &v.config.harnack.pairs {
            times.push(tau);
            times.push(big_t);
        }
    }
    times.sort_by(f64::total_cmp);
    times.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    times
}

/// Runs `command` for `config`.
pub fn run_experiment(config: &ExperimentConfig, command: Command, opts: &RunOptions) -> Result<RunReport, RunError> {
    let selected = select(config, command, opts)?;
    let grid_scale = opts.grid_scale.max(1);
    let v = config.validate(&selected, grid_scale)?;
    let dir = opts.out.clone().unwrap_or_else(|| config.output.dir.clone());
    fs::create_dir_all(&dir).map_err(|source| RunError::Io {
        path: dir.clone(),
        source,
    })?;

    let manifold = &v.manifold;
    let s = &config.solver;
    let start = match s.initial {
        InitialKind::Kernel => {
            let t0 = s.t0.unwrap_or_else(|| witten_lab::heatflow::default_t0(manifold));
            initial_delta(manifold, v.source, t0).context(|| "kernel start".to_string())?
        }
        InitialKind::Bump => initial_bump(manifold, v.source, s.kappa).context(|| "bump start".to_string())?,
    };

    let needs_evolution = selected
        .iter()
        .any(|c| matches!(c, CheckName::Mass | CheckName::LiYau | CheckName::Hamilton | CheckName::Integrated | CheckName::SupBound | CheckName::KernelDt));
    let (snapshots, manifest) = if needs_evolution {
        let options = EvolveOptions {
            error_target: s.error_target,
            ..EvolveOptions::default()
        };
        let ev = evolve(manifold, &start, &evolution_times(&v, &selected), &options)
            .context(|| "heat evolution".to_string())?;
        let mut snaps = vec![start.clone()];
        snaps.extend(ev.snapshots);
        (snaps, ev.manifest)
    } else {
        (vec![start.clone()], Manifest::default())
    };

    let ctx = Context_ {
        v: &v,
        dir: dir.clone(),
        seed: opts.seed,
        start,
        snapshots,
        manifest,
    };

    let mut outcomes = Vec::new();
    for &check in &selected {
        let outcome = match check {
            CheckName::Curvature => curvature(&ctx)?,
            CheckName::Bochner => bochner(&ctx)?,
            CheckName::Mass => mass(&ctx)?,
            CheckName::LiYau => pointwise(&ctx, check)?,
            CheckName::Hamilton => pointwise(&ctx, check)?,
            CheckName::SupBound => sup_bound(&ctx)?,
            CheckName::Integrated => integrated(&ctx)?,
            CheckName::KernelDt => kernel_dt(&ctx)?,
            CheckName::Entropy => entropy(&ctx)?,
            CheckName::Flow => flow(&ctx)?,
        };
        outcomes.push(outcome);
    }

    let summary = render_summary(&v, command, grid_scale, &outcomes);
    write_file(&dir, "summary.txt", |w| w.write_all(summary.as_bytes()))?;
    Ok(RunReport {
        outcomes,
        summary,
        out_dir: dir,
    })
}

fn render_summary(v: &Validated, command: Command, grid_scale: usize, outcomes: &[CheckOutcome]) -> String {
    let mc = &v.config.manifold;
    let mut s = String::new();
    s.push_str("witten-lab summary v1\n");
    s.push_str(&format!("command = {}\n", command.name()));
    s.push_str(&format!(
        "model = {:?}, grid = {:?}, period = {:?}, potential = {:?} {:?}\n",
        mc.model,
        v.manifold.sizes(),
        mc.period,
        mc.potential.family,
        mc.potential.params
    ));
    s.push_str(&format!("grid_scale = {grid_scale}\n"));
    for o in outcomes {
        s.push_str(&format!("[{}] {}\n", if o.ok { "ok" } else { "FAIL" }, o.name));
        for l in &o.lines {
            s.push_str(&format!("    {l}\n"));
        }
    }
    let ok = outcomes.iter().all(|o| o.ok);
    s.push_str(&format!("overall = {}\n", if ok { "PASS" } else { "FAIL" }));
    s
}

fn curvature(ctx: &Context_) -> Result<CheckOutcome, RunError> {
    let manifold = ctx.manifold();
    let mut lines = Vec::new();
    let mut ok = true;
    let mut ms = ctx.v.harnack_m.clone();
    ms.push(f64::INFINITY);
    for &m in &ms {
        let field = ricci_bakry_emery(manifold, m).context(|| format!("curvature for m = {}", fmt_m(m)))?;
        write_file(&ctx.dir, &format!("curvature_m{}.csv", fmt_m(m)), |w| field.write_csv(manifold, w))?;
        let mut line = format!(
            "m = {}: min Ric_mn = {:.6e} (node min {:.6e}), admissible K = {:.6e}",
            fmt_m(m),
            field.min_value,
            field.node_min(),
            field.admissible_k
        );
        if m.is_finite() {
            let k = ctx.k_for(m)?;
            let inj = manifold.injectivity_scale();
            let n = manifold.len();
            let mut worst: f64 = 0.0;
            for c in [0, n / 4, n / 2, 3 * n / 4] {
                let b = ball_volume_ratio_check(manifold, m, k, c, inj / 8.0, inj / 2.0)
                    .context(|| "ball volume comparison".to_string())?;
                ok &= b.ok;
                worst = worst.max(b.ratio / b.bound);
            }
            line.push_str(&format!("; ball-volume ratio/bound <= {worst:.6} at K = {k:.6e}"));
        }
        lines.push(line);
    }
    Ok(CheckOutcome {
        name: CheckName::Curvature,
        ok,
        lines,
    })
}

fn bochner(ctx: &Context_) -> Result<CheckOutcome, RunError> {
    let manifold = ctx.manifold();
    let band = if manifold.dim() == 1 { 10 } else { 6 };
    let mut rng = StdRng::seed_from_u64(ctx.seed);
    let rows: Vec<(f64, f64)> = (0..50)
        .map(|_| {
            let f = random_band_limited(manifold, band, &mut rng);
            let r = bochner_residual(manifold, &f);
            (r.max_abs(), r.relative())
        })
        .collect();
    write_file(&ctx.dir, "bochner.csv", |w| {
        writeln!(w, "# witten-lab bochner v1 seed={} band={band}", ctx.seed)?;
        writeln!(w, "sample,max_abs_residual,relative_residual")?;
        for (i, (a, r)) in rows.iter().enumerate() {
            writeln!(w, "{i},{a:.6e},{r:.6e}")?;
        }
        Ok(())
    })?;
    let worst = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(CheckOutcome {
        name: CheckName::Bochner,
        ok: worst <= 1e-8,
        lines: vec![format!("50 fields, band {band}, seed {}: worst relative residual {worst:.3e} (tol 1e-8)", ctx.seed)],
    })
}

fn mass(ctx: &Context_) -> Result<CheckOutcome, RunError> {
    let manifold = ctx.manifold();
    write_file(&ctx.dir, "snapshots.csv", |w| {
        for (i, s) in ctx.snapshots.iter().enumerate() {
            s.write_csv(&mut *w, i == 0)?;
        }
        Ok(())
    })?;
    write_file(&ctx.dir, "manifest.csv", |w| ctx.manifest.write_csv(w))?;
    let m0 = ctx.start.mass(manifold);
    let drift = ctx
        .snapshots
        .iter()
        .map(|s| (s.mass(manifold) - m0).abs())
        .fold(0.0, f64::max);
    Ok(CheckOutcome {
        name: CheckName::Mass,
        ok: drift <= 1e-10,
        lines: vec![
            format!(
                "{} snapshots, {} accepted steps, {} rejected",
                ctx.snapshots.len(),
                ctx.manifest.steps.len(),
                ctx.manifest.rejected
            ),
            format!("mass drift {drift:.3e} (tol 1e-10)"),
        ],
    })
}

fn worst_line(reports: &[HarnackReport]) -> String {
    match reports.iter().min_by(|a, b| a.relative_min_defect().total_cmp(&b.relative_min_defect())) {
        Some(r) => format!(
            "worst: t = {}, m = {}, K = {:.6e}, min defect {:.6e} at node {} (relative {:.3e}, tol {:.3e})",
            r.t,
            r.m,
            r.k,
            r.min_defect,
            r.argmin,
            r.relative_min_defect(),
            r.tol
        ),
        None => "no reports".to_string(),
    }
}

fn pointwise(ctx: &Context_, check: CheckName) -> Result<CheckOutcome, RunError> {
    let manifold = ctx.manifold();
    let mut reports = Vec::new();
    for &m in &ctx.v.harnack_m {
        let k = ctx.k_for(m)?;
        for s in ctx.checked_snapshots() {
            let r = match check {
                CheckName::LiYau => li_yau_defect(manifold, s, m),
                _ => hamilton_harnack_defect(manifold, s, m, k),
            }
            .context(|| format!("{check} at t = {}", s.time))?;
            reports.push(ctx.judge(r));
        }
    }
    write_file(&ctx.dir, &format!("{check}.csv"), |w| write_reports_csv(&reports, w))?;
    if let Some(worst) = reports
        .iter()
        .min_by(|a, b| a.relative_min_defect().total_cmp(&b.relative_min_defect()))
    {
        write_file(&ctx.dir, &format!("{check}_worst_defect.csv"), |w| worst.write_defect_csv(manifold, w))?;
    }
    let ok = reports.iter().all(|r| r.ok);
    let mut lines = vec![format!("{} reports", reports.len())];
    lines.push(worst_line(&reports));
    if check == CheckName::LiYau {
        for &m in &ctx.v.harnack_m {
            let k = ctx.k_for(m)?;
            if k > 0.0 {
                lines.push(format!("m = {m}: needs Ric_mn >= 0 but K = {k:.6e}; reported for reference"));
            }
        }
    }
    Ok(CheckOutcome { name: check, ok, lines })
}

fn sup_bound(ctx: &Context_) -> Result<CheckOutcome, RunError> {
    let manifold = ctx.manifold();
    let a = sup_over(&ctx.snapshots);
    let mut reports = Vec::new();
    let mut ordered = true;
    for &m in &ctx.v.harnack_m {
        let k = ctx.k_for(m)?;
        for s in ctx.checked_snapshots() {
            let r = sup_bound_defect(manifold, s, m, k, a).context(|| format!("sup bound at t = {}", s.time))?;
            ordered &= r.variant.defect.iter().zip(&r.standard.defect).all(|(v, s)| v >= s);
            reports.push(ctx.judge(r.standard));
            reports.push(ctx.judge(r.variant));
        }
    }
    write_file(&ctx.dir, "sup_bound.csv", |w| write_reports_csv(&reports, w))?;
    Ok(CheckOutcome {
        name: CheckName::SupBound,
        ok: ordered && reports.iter().all(|r| r.ok),
        lines: vec![
            format!("A = {a:.6e}, {} reports", reports.len()),
            worst_line(&reports),
            format!("(K + 1/t) form dominates the Kt form node-wise: {ordered}"),
        ],
    })
}

fn integrated(ctx: &Context_) -> Result<CheckOutcome, RunError> {
    let manifold = ctx.manifold();
    let h = &ctx.config().harnack;
    let count = h.sample_nodes.min(manifold.len());
    let nodes: Vec<usize> = (0..count).map(|j| j * manifold.len() / count).collect();
    let mut checks = Vec::new();
    for &m in &ctx.v.harnack_m {
        let k = ctx.k_for(m)?;
        for &[tau, big_t] in &h.pairs {
            checks.extend(
                integrated_harnack_pairs(manifold, &ctx.snapshots, &nodes, tau, big_t, m, k)
                    .context(|| format!("integrated Harnack for (τ, T) = ({tau}, {big_t})"))?,
            );
        }
    }
    write_file(&ctx.dir, "integrated.csv", |w| write_integrated_csv(&checks, w))?;
    let worst = checks.iter().map(|c| c.lhs / c.rhs).fold(0.0, f64::max);
    Ok(CheckOutcome {
        name: CheckName::Integrated,
        ok: checks.iter().all(|c| c.ok),
        lines: vec![format!("{} pairs, max lhs/rhs = {worst:.6}", checks.len())],
    })
}

fn kernel_dt(ctx: &Context_) -> Result<CheckOutcome, RunError> {
    let manifold = ctx.manifold();
    let mut lines = Vec::new();
    let mut ok = true;
    let mut all = Vec::new();
    for &m in &ctx.v.harnack_m {
        let k = ctx.k_for(m)?;
        let r = kernel_dt_log_bounds(manifold, &ctx.snapshots, ctx.v.source, m, k)
            .context(|| "kernel time-derivative bounds".to_string())?;
        let lower: Vec<HarnackReport> = r.lower.into_iter().map(|x| ctx.judge(x)).collect();
        ok &= lower.iter().all(|x| x.ok);
        lines.push(format!("m = {m}, K = {k:.6e}: fitted upper-shape C = {:.6e}", r.fitted_c));
        lines.push(worst_line(&lower));
        all.extend(lower);
    }
    write_file(&ctx.dir, "kernel_dt.csv", |w| write_reports_csv(&all, w))?;
    Ok(CheckOutcome {
        name: CheckName::KernelDt,
        ok,
        lines,
    })
}

struct SeriesVerdict {
    ok: bool,
    lines: Vec<String>,
}

fn judge_series(ctx: &Context_, s: &EntropySeries, with_dissipation: bool) -> SeriesVerdict {
    let e = &ctx.config().entropy;
    let worst = |f: fn(&EntropyRow) -> f64| s.rows.iter().map(f).fold(0.0, f64::max);
    let resid = worst(EntropyRow::relative_residual);
    let dh = worst(EntropyRow::dh_relative_error);
    let d2h = worst(EntropyRow::d2h_relative_error);
    let mono = w_monotonicity_check(s, e.slack);
    let mut ok = resid <= e.residual_tol && mono.ok;
    if with_dissipation {
        ok &= dh <= e.dh_tol && d2h <= e.d2h_tol;
    }
    SeriesVerdict {
        ok,
        lines: vec![
            format!("m = {}, K = {:.6e}, {} probes", s.m, s.k, s.rows.len()),
            format!("dW/dt formula residual {resid:.3e} (tol {:.1e})", e.residual_tol),
            format!(
                "monotonicity: max(formula − bound) = {:.6e}, ok = {} (slack {:.1e})",
                mono.worst_excess, mono.ok, e.slack
            ),
            format!(
                "dissipation: dH/dt error {dh:.3e} (tol {:.1e}), d2H/dt2 error {d2h:.3e} (tol {:.1e})",
                e.dh_tol, e.d2h_tol
            ),
        ],
    }
}

fn series_options(ctx: &Context_) -> SeriesOptions {
    let e = &ctx.config().entropy;
    SeriesOptions {
        fd_step: e.fd_step,
        substeps: e.substeps,
        ..SeriesOptions::default()
    }
}

fn entropy(ctx: &Context_) -> Result<CheckOutcome, RunError> {
    let manifold = ctx.manifold();
    let cfg = ctx.config();
    let probes = cfg.entropy.probes.clone().unwrap_or_else(|| cfg.solver.times.clone());
    let mut ok = true;
    let mut lines = Vec::new();
    for &m in &ctx.v.entropy_m {
        let k = ctx.k_for(m)?;
        let s = entropy_series(manifold, &ctx.start, &probes, m, k, &series_options(ctx))
            .context(|| format!("entropy series for m = {m}"))?;
        write_file(&ctx.dir, &format!("entropy_m{m}.csv"), |w| s.write_csv(w))?;
        let verdict = judge_series(ctx, &s, true);
        ok &= verdict.ok;
        lines.extend(verdict.lines);
    }
    Ok(CheckOutcome {
        name: CheckName::Entropy,
        ok,
        lines,
    })
}

fn flow(ctx: &Context_) -> Result<CheckOutcome, RunError> {
    let cfg = ctx.config();
    let f = cfg.flow.as_ref().expect("validated");
    let spec = make_flow(ctx.manifold().clone(), f.lambda, f.horizon).context(|| "flow construction".to_string())?;
    let h = cfg.entropy.fd_step;
    let probes: Vec<f64> = f.probes.clone().unwrap_or_else(|| {
        cfg.solver
            .times
            .iter()
            .copied()
            .filter(|&t| t + h <= f.horizon && t - h > ctx.start.time)
            .collect()
    });
    let mut samples = uniform_times(f.horizon, f.margin_samples);
    samples.extend(probes.iter().flat_map(|&t| [t - h, t, t + h]));
    samples.sort_by(f64::total_cmp);
    let k = match f.k_mode {
        KMode::Explicit => f.k.expect("validated"),
        KMode::Admissible | KMode::Fitted => fit_flow_k(&spec, f.m, &samples).context(|| "fitting K".to_string())?,
    };
    let margin = super_ricci_flow_margin(&spec, f.m, k, &samples).context(|| "flow margin".to_string())?;
    write_file(&ctx.dir, "flow_margin.csv", |w| margin.write_csv(w))?;
    let mut lines = vec![
        format!(
            "lambda = {:?}, horizon = {}, m = {}, K = {k:.6e} ({:?})",
            f.lambda, f.horizon, f.m, f.k_mode
        ),
        format!("super Ricci flow margin min = {:.6e}, ok = {}", margin.min_value, margin.ok),
    ];
    let mut drift: f64 = 0.0;
    for &t in &samples {
        drift = drift.max(spec.measure_drift(ctx.manifold(), t).context(|| "measure drift".to_string())?);
    }
    lines.push(format!("measure drift {drift:.3e} (tol 1e-14)"));
    let mut ok = margin.ok && drift <= 1e-14;
    if probes.is_empty() {
        lines.push("no probe times inside the horizon; entropy series skipped".to_string());
    } else {
        let s = flow_entropy_series(&spec, &ctx.start, &probes, f.m, k, &series_options(ctx))
            .context(|| "entropy series along the flow".to_string())?;
        write_file(&ctx.dir, "flow_entropy.csv", |w| s.write_csv(w))?;
        let verdict = judge_series(ctx, &s, false);
        ok &= verdict.ok;
        lines.extend(verdict.lines.into_iter().take(3));
    }
    Ok(CheckOutcome {
        name: CheckName::Flow,
        ok,
        lines,
    })
}
