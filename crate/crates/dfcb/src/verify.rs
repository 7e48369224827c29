//! Residual verification of candidate (u, v) pairs against the DFCB system
//!
//!   u_t − 2u_y + (3/2)u_xx − 3v_x − S(t)u − T(t) = 0
//!   v_t − 2v_y − u_y + u_xxx + P(t)u·u_x − (3/2)v_xx + R(t)u_x − S(t)v − T(t) = 0
//!
//! once with exact jet derivatives and once with an independent second-order
//! finite-difference discretization, including a convergence-order fit.
//! Forward time integration is deliberately absent: the u-equation carries the
//! anti-diffusive sign in x, so the initial-value problem is ill-posed and
//! residual verification is the usable test.

use serde::Serialize;

use crate::coeffs::Coefficients;
use crate::error::{DfcbError, Result};
use crate::grid::GridSpec;
use crate::jet::{Jet, Point};

/// Any term beyond this magnitude marks the node as (near-)singular.
pub const TERM_BLOWUP: f64 = 1e12;

/// A field that can produce derivative-carrying jets of (u, v) at a point.
pub trait JetField {
    fn uv_jets(&self, p: Point) -> Result<(Jet, Jet)>;
}

/// A field evaluatable pointwise (used by the FD route and samplers).
pub trait PointField {
    fn uv(&self, p: Point) -> Result<(f64, f64)>;
}

impl JetField for crate::darboux::TransformedSolution {
    fn uv_jets(&self, p: Point) -> Result<(Jet, Jet)> {
        self.eval_uv_jets(p)
    }
}

impl PointField for crate::darboux::TransformedSolution {
    fn uv(&self, p: Point) -> Result<(f64, f64)> {
        self.uv_values(p)
    }
}

impl PointField for crate::seeds::TrivialBackground {
    fn uv(&self, p: Point) -> Result<(f64, f64)> {
        let h = self.coeffs.h.eval(p.t);
        Ok((h, h))
    }
}

impl JetField for crate::seeds::TrivialBackground {
    fn uv_jets(&self, p: Point) -> Result<(Jet, Jet)> {
        Ok((self.u_jet(p, crate::darboux::U_SHAPE), self.v_jet(p, crate::darboux::V_SHAPE)))
    }
}

/// Per-equation residual statistics over a grid, normalized per node by
/// max(1, largest participating term magnitude).
#[derive(Clone, Debug, Default, Serialize)]
pub struct ResidualReport {
    pub max_res_u: f64,
    pub rms_res_u: f64,
    pub max_res_v: f64,
    pub rms_res_v: f64,
    pub masked: usize,
    pub samples: usize,
    /// Largest raw derivative magnitude seen (used to relate FD truncation
    /// error to step size).
    pub deriv_scale: f64,
}

struct NodeTerms {
    terms_u: [f64; 6],
    terms_v: [f64; 9],
}

impl NodeTerms {
    #[allow(clippy::too_many_arguments)]
    fn build(
        coeffs: &Coefficients,
        t: f64,
        u: f64,
        ut: f64,
        uy: f64,
        ux: f64,
        uxx: f64,
        uxxx: f64,
        v: f64,
        vt: f64,
        vy: f64,
        vx: f64,
        vxx: f64,
    ) -> Result<NodeTerms> {
        let s = coeffs.s(t)?;
        let tt = coeffs.t_term(t)?;
        let p = coeffs.p(t)?;
        let r = coeffs.r(t)?;
        Ok(NodeTerms {
            terms_u: [ut, -2.0 * uy, 1.5 * uxx, -3.0 * vx, -s * u, -tt],
            terms_v: [
                vt,
                -2.0 * vy,
                -uy,
                uxxx,
                p * u * ux,
                -1.5 * vxx,
                r * ux,
                -s * v,
                -tt,
            ],
        })
    }

    fn blows_up(&self) -> bool {
        self.terms_u.iter().chain(self.terms_v.iter()).any(|t| t.abs() > TERM_BLOWUP)
    }

    fn residuals(&self) -> (f64, f64) {
        let scale_u = self.terms_u.iter().fold(1.0f64, |m, t| m.max(t.abs()));
        let scale_v = self.terms_v.iter().fold(1.0f64, |m, t| m.max(t.abs()));
        let res_u: f64 = self.terms_u.iter().sum();
        let res_v: f64 = self.terms_v.iter().sum();
        (res_u.abs() / scale_u, res_v.abs() / scale_v)
    }
}

struct Accum {
    rep: ResidualReport,
    sum_u: f64,
    sum_v: f64,
}

impl Accum {
    fn new() -> Accum {
        Accum { rep: ResidualReport::default(), sum_u: 0.0, sum_v: 0.0 }
    }

    fn push(&mut self, terms: &NodeTerms) {
        if terms.blows_up() {
            self.rep.masked += 1;
            return;
        }
        let (ru, rv) = terms.residuals();
        self.rep.max_res_u = self.rep.max_res_u.max(ru);
        self.rep.max_res_v = self.rep.max_res_v.max(rv);
        self.sum_u += ru * ru;
        self.sum_v += rv * rv;
        self.rep.samples += 1;
    }

    fn mask(&mut self) {
        self.rep.masked += 1;
    }

    fn finish(mut self) -> ResidualReport {
        if self.rep.samples > 0 {
            self.rep.rms_res_u = (self.sum_u / self.rep.samples as f64).sqrt();
            self.rep.rms_res_v = (self.sum_v / self.rep.samples as f64).sqrt();
        }
        self.rep
    }
}

/// Residuals with every derivative taken from the jets — exact to roundoff.
pub fn pde_residual_jet(
    field: &dyn JetField,
    coeffs: &Coefficients,
    grid: &GridSpec,
) -> Result<ResidualReport> {
    let mut acc = Accum::new();
    for p in grid.nodes() {
        let (u, v) = match field.uv_jets(p) {
            Ok(pair) => pair,
            Err(DfcbError::SingularPoint { .. }) => {
                acc.mask();
                continue;
            }
            Err(e) => return Err(e),
        };
        let terms = NodeTerms::build(
            coeffs,
            p.t,
            u.value(),
            u.partial(0, 0, 1)?,
            u.partial(0, 1, 0)?,
            u.partial(1, 0, 0)?,
            u.partial(2, 0, 0)?,
            u.partial(3, 0, 0)?,
            v.value(),
            v.partial(0, 0, 1)?,
            v.partial(0, 1, 0)?,
            v.partial(1, 0, 0)?,
            v.partial(2, 0, 0)?,
        )?;
        acc.rep.deriv_scale = acc.rep.deriv_scale.max(u.partial(3, 0, 0)?.abs());
        acc.push(&terms);
    }
    Ok(acc.finish())
}

/// Residuals with all derivatives from second-order central differences;
/// u_xxx uses the 5-point antisymmetric stencil.
pub fn pde_residual_fd(
    field: &dyn PointField,
    coeffs: &Coefficients,
    grid: &GridSpec,
    steps: (f64, f64, f64),
) -> Result<ResidualReport> {
    let (hx, hy, ht) = steps;
    let mut acc = Accum::new();
    'node: for p in grid.nodes() {
        // samples needed: x offsets -2..2, y and t offsets -1..1
        let mut ux_s = [(0.0, 0.0); 5];
        for (m, s) in ux_s.iter_mut().enumerate() {
            let off = m as f64 - 2.0;
            match field.uv(Point::new(p.x + off * hx, p.y, p.t)) {
                Ok(pair) => *s = pair,
                Err(DfcbError::SingularPoint { .. }) => {
                    acc.mask();
                    continue 'node;
                }
                Err(e) => return Err(e),
            }
        }
        let eval = |q: Point| -> std::result::Result<(f64, f64), ()> {
            field.uv(q).map_err(|_| ())
        };
        let (ym, yp, tm, tp) = match (
            eval(Point::new(p.x, p.y - hy, p.t)),
            eval(Point::new(p.x, p.y + hy, p.t)),
            eval(Point::new(p.x, p.y, p.t - ht)),
            eval(Point::new(p.x, p.y, p.t + ht)),
        ) {
            (Ok(a), Ok(b), Ok(c), Ok(d)) => (a, b, c, d),
            _ => {
                acc.mask();
                continue 'node;
            }
        };
        let (u0, v0) = ux_s[2];
        let ux = (ux_s[3].0 - ux_s[1].0) / (2.0 * hx);
        let uxx = (ux_s[3].0 - 2.0 * u0 + ux_s[1].0) / (hx * hx);
        let uxxx =
            (ux_s[4].0 - 2.0 * ux_s[3].0 + 2.0 * ux_s[1].0 - ux_s[0].0) / (2.0 * hx * hx * hx);
        let vx = (ux_s[3].1 - ux_s[1].1) / (2.0 * hx);
        let vxx = (ux_s[3].1 - 2.0 * v0 + ux_s[1].1) / (hx * hx);
        let uy = (yp.0 - ym.0) / (2.0 * hy);
        let vy = (yp.1 - ym.1) / (2.0 * hy);
        let ut = (tp.0 - tm.0) / (2.0 * ht);
        let vt = (tp.1 - tm.1) / (2.0 * ht);
        let terms =
            NodeTerms::build(coeffs, p.t, u0, ut, uy, ux, uxx, uxxx, v0, vt, vy, vx, vxx)?;
        acc.rep.deriv_scale = acc.rep.deriv_scale.max(uxxx.abs());
        acc.push(&terms);
    }
    Ok(acc.finish())
}

/// FD residual norms down a ladder of step sizes with a log-log slope fit.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub steps: Vec<f64>,
    pub norms: Vec<f64>,
    /// Fitted slope; `None` when the residual is already at roundoff and the
    /// fit is degenerate.
    pub order: Option<f64>,
}

pub fn convergence_order(
    field: &dyn PointField,
    coeffs: &Coefficients,
    grid: &GridSpec,
    ladder: &[f64],
) -> Result<ConvergenceReport> {
    if ladder.len() < 3 || ladder.windows(2).any(|w| w[1] >= w[0]) {
        return Err(DfcbError::InsufficientLevels(ladder.len()));
    }
    let mut norms = Vec::with_capacity(ladder.len());
    for &h in ladder {
        let rep = pde_residual_fd(field, coeffs, grid, (h, h, h))?;
        norms.push(rep.max_res_u.max(rep.max_res_v));
    }
    let order = if norms.iter().any(|&n| n < 1e-14) {
        None
    } else {
        Some(loglog_slope(ladder, &norms))
    };
    Ok(ConvergenceReport { steps: ladder.to_vec(), norms, order })
}

fn loglog_slope(h: &[f64], norm: &[f64]) -> f64 {
    let n = h.len() as f64;
    let xs: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = norm.iter().map(|v| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}
