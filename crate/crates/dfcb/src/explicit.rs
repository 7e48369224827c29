//! Literal transcription of the printed closed-form one-fold (Θ, Θ₁, Θ₂)
//! and two-fold (Θ₃–Θ₇, Γ) solution displays.
//!
//! The transcription is verbatim — no sign or term fixes — so it doubles as a
//! typo detector: wherever a display disagrees with the residual-validated
//! Wronskian construction, the discrepancy is reported, never silently
//! reconciled.

use serde::Serialize;

use crate::coeffs::Coefficients;
use crate::darboux::TransformedSolution;
use crate::error::{DfcbError, Result};
use crate::grid::GridSpec;
use crate::jet::{Jet, JetShape, Point, Var, EPS_SING};
use crate::seeds::SeedSpec;
use crate::verify::{pde_residual_fd, pde_residual_jet, PointField, ResidualReport};

const XSHAPE: JetShape = JetShape::new(1, 0, 0);

/// Jet (x-order 1) of `value + slope·(x − x0)`.
fn x_affine(base: Point, value: f64, slope: f64) -> Jet {
    let xvar = Jet::variable(Var::X, base, XSHAPE).unwrap();
    xvar.add_scalar(-base.x).scale(slope).add_scalar(value)
}

/// A ratio with the zero-numerator convention: an identically vanishing
/// numerator contributes nothing even where the printed denominator also
/// degenerates (every such case in the displays is the trivial reduction).
fn ratio(num: f64, den: f64, symbol: &str) -> Result<f64> {
    if num == 0.0 {
        return Ok(0.0);
    }
    if den.abs() < EPS_SING {
        return Err(DfcbError::SingularPoint { symbol: symbol.into(), magnitude: den.abs() });
    }
    Ok(num / den)
}

/// Phase and trig building blocks of one seed at a point.
struct SeedParts {
    e1: f64,
    e2: f64,
    sin3: Jet,
    cos3: Jet,
}

impl SeedParts {
    fn at(seed: &SeedSpec, p: Point) -> SeedParts {
        let k = seed.k;
        let k2 = k * k;
        let k3 = k2 * k;
        let d1 = k3 * p.y + (2.0 * k3 + 1.5 * k2) * p.t;
        let d2 = -2.0 * k3 * p.y - 4.0 * k3 * p.t;
        let xi3 = x_affine(p, k * p.x + 2.0 * k3 * p.y + (4.0 * k3 + 3.0 * k2) * p.t, k);
        SeedParts { e1: d1.exp(), e2: d2.exp(), sin3: xi3.sin(), cos3: xi3.cos() }
    }
}

/// The printed one-fold display symbols for one seed, at value level.
struct OnefoldSymbols {
    theta: f64,
    theta1: f64,
    theta2: f64,
}

fn onefold_symbols(seed: &SeedSpec, p: Point) -> OnefoldSymbols {
    let SeedSpec { k, c1, c2, c3 } = *seed;
    let parts = SeedParts::at(seed, p);
    let (e1, e2) = (parts.e1, parts.e2);
    let sin3 = parts.sin3.value();
    let cos3 = parts.cos3.value();
    // sin 2ξ3, cos 2ξ3 from the same phase
    let xi3 = {
        let k2 = k * k;
        let k3 = k2 * k;
        k * p.x + 2.0 * k3 * p.y + (4.0 * k3 + 3.0 * k2) * p.t
    };
    let sin2x = (2.0 * xi3).sin();
    let cos2x = (2.0 * xi3).cos();
    let k2 = k * k;
    let k3 = k2 * k;

    let theta = c1 * e1 + c2 * e2 * sin3 + c3 * e2 * cos3;
    // verbatim: both cross terms carry cos ξ3
    let theta1 =
        k2 * e2 * ((c2 * c2 + c3 * c3) * e2 + c1 * c3 * e1 * cos3 + c1 * c2 * e1 * cos3);
    let theta2 = k3
        * e2
        * (3.0 * c1 * c2 * c2 * e1 * e2
            + 3.0 * c1 * c3 * c3 * e1 * e2
            + 2.0
                * (c1 * c1 * (c2 + c3) * e1 * e1
                    + (c3.powi(3) - c2.powi(3) + c2 * c2 * c3 - c2 * c3 * c3) * e2 * e2)
                * cos3
            - (c1 * c2 * c2 - c1 * c3 * c3) * e1 * e2 * cos2x
            + 2.0 * (c1 * c1 * c2 - c1 * c1 * c3) * e1 * e1 * sin3
            + 2.0 * c2.powi(3) * e2 * e2 * sin3
            + 2.0 * c2 * c2 * c3 * e2 * e2 * sin3
            + 2.0 * c2 * c3 * c3 * e2 * e2 * sin3
            + 2.0 * c3.powi(3) * e2 * e2 * sin3
            + 2.0 * c1 * c2 * c3 * e1 * e2 * sin2x);
    OnefoldSymbols { theta, theta1, theta2 }
}

/// The printed one-fold solution u[1] = H − 3ΛΘ₁/Θ², v[1] = H − 3ΛΘ₂/(2Θ³).
#[derive(Clone, Copy, Debug)]
pub struct ExplicitOnefold {
    pub seed: SeedSpec,
    pub coeffs: Coefficients,
}

impl ExplicitOnefold {
    pub fn new(seed: SeedSpec, coeffs: Coefficients) -> Self {
        Self { seed, coeffs }
    }

    pub fn eval(&self, p: Point) -> Result<(f64, f64)> {
        let h = self.coeffs.h.eval(p.t);
        let lam = self.coeffs.lambda_checked(p.t)?;
        let sy = onefold_symbols(&self.seed, p);
        let u = h - 3.0 * lam * ratio(sy.theta1, sy.theta * sy.theta, "Theta^2")?;
        let v = h - 3.0 * lam * ratio(sy.theta2, 2.0 * sy.theta.powi(3), "2*Theta^3")?;
        Ok((u, v))
    }
}

impl PointField for ExplicitOnefold {
    fn uv(&self, p: Point) -> Result<(f64, f64)> {
        self.eval(p)
    }
}

/// The printed two-fold solution u[2] = H + 3ΛΘ₃/Θ₄,
/// v[2] = H + 3ΛΓ/(Θ³Θ₃Θ₄²Θ₆).
#[derive(Clone, Copy, Debug)]
pub struct ExplicitTwofold {
    pub seed1: SeedSpec,
    pub seed2: SeedSpec,
    pub coeffs: Coefficients,
}

impl ExplicitTwofold {
    pub fn new(seed1: SeedSpec, seed2: SeedSpec, coeffs: Coefficients) -> Self {
        Self { seed1, seed2, coeffs }
    }

    pub fn eval(&self, p: Point) -> Result<(f64, f64)> {
        let h = self.coeffs.h.eval(p.t);
        let lam = self.coeffs.lambda_checked(p.t)?;
        let sy = self.symbols(p)?;
        let u = h + 3.0 * lam * ratio(sy.theta3, sy.theta4, "Theta4")?;
        let v = h
            + 3.0
                * lam
                * ratio(
                    sy.gamma,
                    sy.theta.powi(3) * sy.theta3 * sy.theta4 * sy.theta4 * sy.theta6,
                    "Theta^3*Theta3*Theta4^2*Theta6",
                )?;
        Ok((u, v))
    }

    /// Values of every printed symbol at `p` (for discrepancy logging).
    pub fn symbols(&self, p: Point) -> Result<TwofoldSymbols> {
        let SeedSpec { k: k1, c1, c2, c3 } = self.seed1;
        let SeedSpec { k: k2, c1: p1, c2: p2, c3: p3 } = self.seed2;
        let s1 = SeedParts::at(&self.seed1, p);
        let s2 = SeedParts::at(&self.seed2, p);
        let (e1, e2) = (s1.e1, s1.e2);
        let (f1, f2) = (s2.e1, s2.e2);
        let cst = |v: f64| Jet::constant(v, p, XSHAPE);

        // seed-1 combinations (of ξ3)
        let comb1 = |a: f64, b_cos: f64, b_sin: f64| -> Jet {
            cst(a * c1 * e1)
                .add(&s1.cos3.scale(b_cos * e2))
                .unwrap()
                .add(&s1.sin3.scale(b_sin * e2))
                .unwrap()
        };
        let a_j = comb1(1.0, 2.0 * c2, -2.0 * c3);
        let c_j = comb1(1.0, c3, c2); // = Θ as printed
        let e_j = comb1(1.0, c2 + c3, c2 - c3); // = Θ₇
        let g_j = comb1(1.0, 2.0 * (c2 - c3), -2.0 * (c2 + c3));

        // seed-2 combinations (of δ3)
        let comb2 = |a: f64, b_cos: f64, b_sin: f64| -> Jet {
            cst(a * p1 * f1)
                .add(&s2.cos3.scale(b_cos * f2))
                .unwrap()
                .add(&s2.sin3.scale(b_sin * f2))
                .unwrap()
        };
        let b_j = comb2(1.0, p3, p2);
        let d_j = comb2(1.0, 2.0 * p2, -2.0 * p3);
        let f_j = comb2(1.0, p2 + p3, p2 - p3);
        let h_j = comb2(1.0, 2.0 * (p2 - p3), -2.0 * (p2 + p3));
        // Θ₄'s inner second factor, 2p₃ verbatim from the display
        let theta4_inner2 = comb2(1.0, p2 + 2.0 * p3, p2 - 2.0 * p3);
        // Θ₆'s second factor as printed mixes seed-2 amplitudes with ξ₃ trig
        let theta6_inner2 = cst(p1 * f1)
            .add(&s1.cos3.scale((p2 + p3) * f2))
            .unwrap()
            .add(&s1.sin3.scale((p2 - p3) * f2))
            .unwrap();

        let k12 = k1 * k1;
        let k13 = k12 * k1;
        let k22 = k2 * k2;
        let k23 = k22 * k2;

        let sq = |j: &Jet| j.mul(j).unwrap();
        let bracket1 = a_j.mul(&b_j).unwrap().scale(k12).sub(&c_j.mul(&d_j).unwrap().scale(k22))?;
        let bracket2 =
            e_j.mul(&b_j).unwrap().scale(-k1).add(&c_j.mul(&f_j).unwrap().scale(k2))?;
        let bracket3 = g_j
            .mul(&b_j)
            .unwrap()
            .scale(-k13)
            .sub(&a_j.mul(&f_j).unwrap().scale(k12 * k2))?
            .add(&e_j.mul(&d_j).unwrap().scale(k1 * k22))?
            .add(&c_j.mul(&h_j).unwrap().scale(k23))?;
        let theta3 = bracket2.mul(&bracket3)?.sub(&sq(&bracket1))?;
        let theta4 = sq(&e_j
            .mul(&b_j)
            .unwrap()
            .scale(k1)
            .sub(&c_j.mul(&theta4_inner2).unwrap().scale(k2))?);

        let theta5 = -k12 * a_j.value() * b_j.value() + k22 * c_j.value() * d_j.value();
        let theta6 =
            -k1 * e_j.value() * b_j.value() + k2 * c_j.value() * theta6_inner2.value();
        let theta7 = e_j.value();

        let one = onefold_symbols(&self.seed1, p);
        let (theta, theta1, theta2) = (one.theta, one.theta1, one.theta2);
        let t3 = theta3.value();
        let t3x = theta3.partial(1, 0, 0)?;
        let t4 = theta4.value();
        let t4x = theta4.partial(1, 0, 0)?;

        // Γ as printed, Θ₄Θ₄² included
        let gamma = theta * t3 * t3 * t4 * theta5
            - theta * theta * t3 * t3 * t4 * theta6 * theta7
            + theta * theta1 * t3 * t4 * t4 * t4 * theta5
            - theta1 * t3 * t4 * t4 * theta6 * theta7
            - theta.powi(3) * theta2 * t4 * t4 * theta6
            + theta.powi(3) * t3 * t4 * theta6 * t3x
            - theta.powi(3) * t3 * t3 * theta6 * t4x;

        Ok(TwofoldSymbols {
            theta,
            theta1,
            theta2,
            theta3: t3,
            theta3_x: t3x,
            theta4: t4,
            theta4_x: t4x,
            theta5,
            theta6,
            theta7,
            gamma,
        })
    }
}

/// Pointwise values of the printed two-fold symbols.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TwofoldSymbols {
    pub theta: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub theta3_x: f64,
    pub theta4: f64,
    pub theta4_x: f64,
    pub theta5: f64,
    pub theta6: f64,
    pub theta7: f64,
    pub gamma: f64,
}

impl PointField for ExplicitTwofold {
    fn uv(&self, p: Point) -> Result<(f64, f64)> {
        self.eval(p)
    }
}

/// One grid node of an explicit-vs-pipeline comparison.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DiscrepancyRow {
    pub x: f64,
    pub y: f64,
    pub t: f64,
    pub u_explicit: f64,
    pub u_darboux: f64,
    pub v_explicit: f64,
    pub v_darboux: f64,
    pub rel_u: f64,
    pub rel_v: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    /// Both constructions agree within tolerance.
    Agree,
    /// The pipeline passes the PDE residual while the printed display does
    /// not: suspected typo in the printed display.
    SuspectedDisplayTypo,
    /// Neither side is clean; no verdict.
    Inconclusive,
}

/// Max/RMS relative discrepancy per component plus the PDE residual of each
/// construction, so the faulty side is identifiable.
#[derive(Clone, Debug, Serialize)]
pub struct DiscrepancyReport {
    pub max_rel_u: f64,
    pub rms_rel_u: f64,
    pub max_rel_v: f64,
    pub rms_rel_v: f64,
    pub compared: usize,
    pub masked: usize,
    pub tolerance: f64,
    pub darboux_residual: ResidualReport,
    pub explicit_residual: ResidualReport,
    pub classification: Classification,
    pub rows: Vec<DiscrepancyRow>,
}

/// FD step used for the explicit side's residual (pointwise values only).
const EXPLICIT_FD_STEP: f64 = 1e-3;

pub fn discrepancy_report(
    explicit: &dyn PointField,
    pipeline: &TransformedSolution,
    grid: &GridSpec,
    tolerance: f64,
) -> Result<DiscrepancyReport> {
    grid.validate()?;
    let mut rows = Vec::new();
    let mut masked = 0usize;
    let (mut max_u, mut max_v, mut sum_u, mut sum_v) = (0.0f64, 0.0f64, 0.0, 0.0);
    for p in grid.nodes() {
        let pair = (explicit.uv(p), pipeline.uv_values(p));
        let ((ue, ve), (ud, vd)) = match pair {
            (Ok(a), Ok(b)) => (a, b),
            (Err(DfcbError::SingularPoint { .. }), _) | (_, Err(DfcbError::SingularPoint { .. })) => {
                masked += 1;
                continue;
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        let rel_u = (ue - ud).abs() / 1.0f64.max(ue.abs()).max(ud.abs());
        let rel_v = (ve - vd).abs() / 1.0f64.max(ve.abs()).max(vd.abs());
        max_u = max_u.max(rel_u);
        max_v = max_v.max(rel_v);
        sum_u += rel_u * rel_u;
        sum_v += rel_v * rel_v;
        rows.push(DiscrepancyRow {
            x: p.x,
            y: p.y,
            t: p.t,
            u_explicit: ue,
            u_darboux: ud,
            v_explicit: ve,
            v_darboux: vd,
            rel_u,
            rel_v,
        });
    }
    let compared = rows.len();
    let coeffs = *pipeline.coeffs();
    let darboux_residual = pde_residual_jet(pipeline, &coeffs, grid)?;
    let h = EXPLICIT_FD_STEP;
    let explicit_residual = pde_residual_fd(explicit, &coeffs, grid, (h, h, h))?;

    // FD truncation floor for a clean solution at this step size
    let fd_floor = 100.0 * h * h * (1.0 + explicit_residual.deriv_scale);
    let darboux_clean = darboux_residual.max_res_u.max(darboux_residual.max_res_v) <= 1e-8;
    let explicit_clean =
        explicit_residual.max_res_u.max(explicit_residual.max_res_v) <= fd_floor;
    let agree = max_u.max(max_v) <= tolerance;
    let classification = if agree && darboux_clean {
        Classification::Agree
    } else if darboux_clean && !explicit_clean {
        Classification::SuspectedDisplayTypo
    } else {
        Classification::Inconclusive
    };

    let denom = compared.max(1) as f64;
    Ok(DiscrepancyReport {
        max_rel_u: max_u,
        rms_rel_u: (sum_u / denom).sqrt(),
        max_rel_v: max_v,
        rms_rel_v: (sum_v / denom).sqrt(),
        compared,
        masked,
        tolerance,
        darboux_residual,
        explicit_residual,
        classification,
        rows,
    })
}
