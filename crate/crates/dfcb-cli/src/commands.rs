//! The four batch commands. Grid evaluation is parallel; every output file
//! is written once, after reduction, by the calling thread.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use dfcb::{
    discrepancy_report, lax_residual, pde_residual_fd, pde_residual_jet, DfcbError,
    DiscrepancyReport, ExplicitOnefold, ExplicitTwofold, Jet, JetField, JetShape, LaxReport, Mode,
    Point, PointField, ResidualReport, TransformedSolution, TrivialBackground,
};

use crate::config::{RunConfig, SweepAxis};

/// Shortest round-trip decimal; masked values as the literal `nan`.
fn fmt(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v}")
    }
}

fn write(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display()))
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleSummary {
    pub config: RunConfig,
    pub rows: usize,
    pub mask_count: usize,
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
}

/// Writes `sample.csv` (header `x,y,t,u,v`, x-fastest node order) and
/// `sample_summary.json`.
pub fn cmd_sample(config: &RunConfig, out: &Path) -> anyhow::Result<SampleSummary> {
    let sol = config.solution()?;
    let nodes: Vec<Point> = config.grid.nodes().collect();
    let values: Vec<Option<(f64, f64)>> = nodes
        .par_iter()
        .map(|&p| match sol.uv_values(p) {
            Ok(pair) => Ok(Some(pair)),
            Err(DfcbError::SingularPoint { .. }) => Ok(None),
            Err(e) => Err(anyhow::anyhow!("{e}")),
        })
        .collect::<anyhow::Result<_>>()?;

    let mut csv = String::from("x,y,t,u,v\n");
    let mut mask_count = 0usize;
    let (mut u_min, mut u_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut v_min, mut v_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for (p, val) in nodes.iter().zip(&values) {
        let (u, v) = match val {
            Some((u, v)) => {
                u_min = u_min.min(*u);
                u_max = u_max.max(*u);
                v_min = v_min.min(*v);
                v_max = v_max.max(*v);
                (*u, *v)
            }
            None => {
                mask_count += 1;
                (f64::NAN, f64::NAN)
            }
        };
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt(p.x),
            fmt(p.y),
            fmt(p.t),
            fmt(u),
            fmt(v)
        ));
    }
    write(&out.join("sample.csv"), &csv)?;

    let summary = SampleSummary {
        config: config.clone(),
        rows: nodes.len(),
        mask_count,
        u_min,
        u_max,
        v_min,
        v_max,
    };
    write(&out.join("sample_summary.json"), &serde_json::to_string_pretty(&summary)?)?;
    Ok(summary)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorruptTarget {
    U,
    V,
}

impl std::str::FromStr for CorruptTarget {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s {
            "u" => Ok(CorruptTarget::U),
            "v" => Ok(CorruptTarget::V),
            other => anyhow::bail!("--corrupt field must be `u` or `v`, got `{other}`"),
        }
    }
}

/// The verify target with `delta·sin(x)` added to one component — a smooth
/// perturbation the x-derivative terms cannot miss.
struct Corrupted<'a> {
    sol: &'a TransformedSolution,
    target: CorruptTarget,
    delta: f64,
}

impl JetField for Corrupted<'_> {
    fn uv_jets(&self, p: Point) -> dfcb::Result<(Jet, Jet)> {
        let (u, v) = self.sol.eval_uv_jets(p)?;
        let bump = |shape: JetShape| {
            Jet::affine(p, shape, 1.0, 0.0, 0.0).unwrap().sin().scale(self.delta)
        };
        Ok(match self.target {
            CorruptTarget::U => (u.add(&bump(u.shape()))?, v),
            CorruptTarget::V => (u, v.add(&bump(v.shape()))?),
        })
    }
}

impl PointField for Corrupted<'_> {
    fn uv(&self, p: Point) -> dfcb::Result<(f64, f64)> {
        let (u, v) = self.sol.uv_values(p)?;
        let bump = self.delta * p.x.sin();
        Ok(match self.target {
            CorruptTarget::U => (u + bump, v),
            CorruptTarget::V => (u, v + bump),
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionLine {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CriterionLine {
    fn new(name: &str, value: f64, tolerance: f64) -> CriterionLine {
        CriterionLine { name: name.into(), value, tolerance, pass: value <= tolerance }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub lines: Vec<CriterionLine>,
    pub pass: bool,
    pub first_violation: Option<String>,
    pub lax: Vec<LaxReport>,
    pub pde_jet: ResidualReport,
    pub pde_fd: ResidualReport,
    pub mode_max_rel: f64,
}

/// Writes `verify_report.json`; exit-status policy is the caller's.
pub fn cmd_verify(
    config: &RunConfig,
    out: &Path,
    pde_tolerance_override: Option<f64>,
    corrupt: Option<(CorruptTarget, f64)>,
) -> anyhow::Result<VerifyReport> {
    let mut tol = config.tolerances;
    if let Some(t) = pde_tolerance_override {
        tol.pde = t;
    }
    let coeffs = config.coeffs();
    let bg = TrivialBackground::new(coeffs);
    let sol = config.solution()?;

    // Lax residual of every seed eigenfunction over the trivial background
    let mut lax_reports = Vec::new();
    let mut lax_worst = 0.0f64;
    for seed in &config.seeds {
        let rep = lax_residual(
            &bg,
            &coeffs,
            |p| seed.eval(p, JetShape::new(4, 2, 1)),
            seed.k,
            &config.grid,
        )?;
        lax_worst = lax_worst.max(rep.max_res_l).max(rep.max_res_m);
        lax_reports.push(rep);
    }

    // PDE residuals of the (possibly corrupted) solution, jets then FD
    let (pde_jet, pde_fd) = match corrupt {
        Some((target, delta)) => {
            let field = Corrupted { sol: &sol, target, delta };
            (
                pde_residual_jet(&field, &coeffs, &config.grid)?,
                pde_residual_fd(
                    &field,
                    &coeffs,
                    &config.grid,
                    (config.fd_steps.hx, config.fd_steps.hy, config.fd_steps.ht),
                )?,
            )
        }
        None => (
            pde_residual_jet(&sol, &coeffs, &config.grid)?,
            pde_residual_fd(
                &sol,
                &coeffs,
                &config.grid,
                (config.fd_steps.hx, config.fd_steps.hy, config.fd_steps.ht),
            )?,
        ),
    };

    // wronskian-direct vs iterated-onefold agreement over the grid
    let direct = TransformedSolution::new(bg, config.seeds.clone(), Mode::WronskianDirect)?;
    let iterated = TransformedSolution::new(bg, config.seeds.clone(), Mode::IteratedOnefold)?;
    let mode_max_rel = config
        .grid
        .nodes()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&p| match (direct.uv_values(p), iterated.uv_values(p)) {
            (Ok((du, dv)), Ok((iu, iv))) => Ok((du - iu)
                .abs()
                .max((dv - iv).abs())
                / du.abs().max(dv.abs()).max(1.0)),
            (Err(DfcbError::SingularPoint { .. }), _)
            | (_, Err(DfcbError::SingularPoint { .. })) => Ok(0.0),
            (Err(e), _) | (_, Err(e)) => Err(anyhow::anyhow!("{e}")),
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;

    let lines = vec![
        CriterionLine::new("lax_res", lax_worst, tol.lax),
        CriterionLine::new("pde_jet_res_u", pde_jet.max_res_u, tol.pde),
        CriterionLine::new("pde_jet_res_v", pde_jet.max_res_v, tol.pde),
        CriterionLine::new("pde_fd_res_u", pde_fd.max_res_u, tol.pde_fd),
        CriterionLine::new("pde_fd_res_v", pde_fd.max_res_v, tol.pde_fd),
        CriterionLine::new("mode_equivalence", mode_max_rel, tol.mode),
    ];
    let first_violation = lines.iter().find(|l| !l.pass).map(|l| l.name.clone());
    let report = VerifyReport {
        pass: first_violation.is_none(),
        first_violation,
        lines,
        lax: lax_reports,
        pde_jet,
        pde_fd,
        mode_max_rel,
    };
    write(&out.join("verify_report.json"), &serde_json::to_string_pretty(&report)?)?;
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepSummary {
    pub axis: SweepAxis,
    /// (param, t, amplitude) rows sorted by (param, t).
    pub rows: Vec<(f64, f64, f64)>,
    pub files: Vec<String>,
}

/// Per value: rebuild the solution and report A(t) = max over the (x, y)
/// window of |u − H(t)|. One CSV per value plus `sweep_summary.csv`.
pub fn cmd_sweep(config: &RunConfig, out: &Path) -> anyhow::Result<SweepSummary> {
    let sweep = config
        .sweep
        .clone()
        .ok_or_else(|| anyhow::anyhow!("sweep: section missing from config"))?;
    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    let mut files = Vec::new();
    for (i, &value) in sweep.values.iter().enumerate() {
        let cfg = config.with_sweep_value(sweep.axis, value);
        cfg.validate().map_err(|e| anyhow::anyhow!("sweep.values[{i}]: {e}"))?;
        let sol = cfg.solution()?;
        let sample = sol.sample(&cfg.grid)?;
        let coeffs = cfg.coeffs();
        let slice = cfg.grid.nx * cfg.grid.ny;
        let mut csv = String::new();
        csv.push_str(&format!(
            "# axis = {}, param = {}\n",
            match sweep.axis {
                SweepAxis::Damping => "damping",
                SweepAxis::Forcing => "forcing",
            },
            fmt(value)
        ));
        csv.push_str("# amplitude = max over (x,y) window of |u - H(t)|\n");
        csv.push_str("t,amplitude\n");
        for (k, &t) in cfg.grid.ts().iter().enumerate() {
            let h = coeffs.h.eval(t);
            let amp = sample.u[k * slice..(k + 1) * slice]
                .iter()
                .filter(|u| u.is_finite())
                .map(|u| (u - h).abs())
                .fold(f64::NAN, f64::max);
            csv.push_str(&format!("{},{}\n", fmt(t), fmt(amp)));
            rows.push((value, t, amp));
        }
        let name = format!("sweep_{i:03}.csv");
        write(&out.join(&name), &csv)?;
        files.push(name);
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut combined = String::from("param,t,amplitude\n");
    for (p, t, a) in &rows {
        combined.push_str(&format!("{},{},{}\n", fmt(*p), fmt(*t), fmt(*a)));
    }
    write(&out.join("sweep_summary.csv"), &combined)?;
    Ok(SweepSummary { axis: sweep.axis, rows, files })
}

/// Compares the printed closed-form displays against the pipeline; fold must
/// be 1 or 2. Writes `compare_explicit.json` and a plain-text table. The
/// returned report's exit policy: only the pipeline side's residual health
/// counts.
pub fn cmd_compare_explicit(
    config: &RunConfig,
    out: &Path,
    tolerance_override: Option<f64>,
) -> anyhow::Result<DiscrepancyReport> {
    let tolerance = tolerance_override.unwrap_or(1e-8);
    let coeffs = config.coeffs();
    let sol = config.solution()?;
    let onefold;
    let twofold;
    let explicit: &dyn PointField = match config.fold {
        1 => {
            onefold = ExplicitOnefold::new(config.seeds[0], coeffs);
            &onefold
        }
        2 => {
            twofold = ExplicitTwofold::new(config.seeds[0], config.seeds[1], coeffs);
            &twofold
        }
        n => anyhow::bail!("fold: compare-explicit covers the printed displays (1 or 2), got {n}"),
    };
    let report = discrepancy_report(explicit, &sol, &config.grid, tolerance)?;

    let mut text = String::new();
    text.push_str(&format!(
        "classification: {:?}\nmax_rel_u = {:.6e}  max_rel_v = {:.6e}  (tolerance {:.1e})\n",
        report.classification, report.max_rel_u, report.max_rel_v, tolerance
    ));
    text.push_str(&format!(
        "pipeline residual (jet): u {:.3e}, v {:.3e} | explicit residual (fd): u {:.3e}, v {:.3e}\n",
        report.darboux_residual.max_res_u,
        report.darboux_residual.max_res_v,
        report.explicit_residual.max_res_u,
        report.explicit_residual.max_res_v
    ));
    if config.fold == 2 {
        let g = &config.grid;
        let center = Point::new(
            0.5 * (g.x0 + g.x1),
            0.5 * (g.y0 + g.y1),
            0.5 * (g.t0 + g.t1),
        );
        let two = ExplicitTwofold::new(config.seeds[0], config.seeds[1], coeffs);
        match two.symbols(center) {
            Ok(sy) => text.push_str(&format!(
                "symbol magnitudes at ({}, {}, {}): {}\n",
                fmt(center.x),
                fmt(center.y),
                fmt(center.t),
                serde_json::to_string(&sy)?
            )),
            Err(e) => text.push_str(&format!("symbol magnitudes at grid center: {e}\n")),
        }
    }
    text.push_str("x,y,t,u_explicit,u_darboux,rel_u,v_explicit,v_darboux,rel_v\n");
    for r in &report.rows {
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            fmt(r.x),
            fmt(r.y),
            fmt(r.t),
            fmt(r.u_explicit),
            fmt(r.u_darboux),
            fmt(r.rel_u),
            fmt(r.v_explicit),
            fmt(r.v_darboux),
            fmt(r.rel_v)
        ));
    }
    write(&out.join("compare_explicit.txt"), &text)?;
    write(&out.join("compare_explicit.json"), &serde_json::to_string_pretty(&report)?)?;
    Ok(report)
}
