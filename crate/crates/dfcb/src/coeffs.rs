//! Admissible time profiles Λ(t), H(t) and the derived equation coefficients
//! P(t) = 1/Λ, R(t) = −H/Λ, S(t) = Λ′/Λ, T(t) = H′ − (Λ′/Λ)H.
//!
//! The catalog is a small set of closed-form families so every derivative is
//! exact; new regimes are added as enum variants rather than through an
//! expression parser.

use serde::{Deserialize, Serialize};

use crate::error::{DfcbError, Result};
use crate::jet::{Jet, JetShape, Point};

/// Λ values below this magnitude are treated as degenerate (Λ divides every
/// coefficient).
pub const LAMBDA_MIN: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum TimeProfile {
    /// c
    Constant { c: f64 },
    /// a·t + b
    Linear { a: f64, b: f64 },
    /// a·e^{b·t}
    Exponential { a: f64, b: f64 },
    /// a·sin(ω·t + φ) + d
    SinusoidalOffset { a: f64, omega: f64, phi: f64, d: f64 },
}

impl TimeProfile {
    /// Closed-form derivatives [p(t), p′(t), ..., p^(order)(t)].
    pub fn eval_derivs(&self, t: f64, order: usize) -> Vec<f64> {
        (0..=order)
            .map(|m| match *self {
                TimeProfile::Constant { c } => {
                    if m == 0 {
                        c
                    } else {
                        0.0
                    }
                }
                TimeProfile::Linear { a, b } => match m {
                    0 => a * t + b,
                    1 => a,
                    _ => 0.0,
                },
                TimeProfile::Exponential { a, b } => a * b.powi(m as i32) * (b * t).exp(),
                TimeProfile::SinusoidalOffset { a, omega, phi, d } => {
                    let shifted = a
                        * omega.powi(m as i32)
                        * (omega * t + phi + m as f64 * std::f64::consts::FRAC_PI_2).sin();
                    if m == 0 {
                        shifted + d
                    } else {
                        shifted
                    }
                }
            })
            .collect()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_derivs(t, 0)[0]
    }

    pub fn deriv(&self, t: f64) -> f64 {
        self.eval_derivs(t, 1)[1]
    }

    /// Jet of the profile as a function of t alone (all x, y coefficients
    /// zero).
    pub fn to_jet(&self, base: Point, shape: JetShape) -> Jet {
        let derivs = self.eval_derivs(base.t, shape.order_t);
        let mut jet = Jet::zero(base, shape);
        let mut fact = 1.0;
        for (k, d) in derivs.iter().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            // only pure-t multi-indices are populated
            jet = jet.add(&t_monomial(base, shape, k, d / fact)).unwrap();
        }
        jet
    }
}

fn t_monomial(base: Point, shape: JetShape, k: usize, coeff: f64) -> Jet {
    let mut jet = Jet::zero(base, shape);
    if k == 0 {
        return jet.add_scalar(coeff);
    }
    // build (t - t0)^k scaled; with only a t-order this is a single coefficient
    let t = Jet::variable(crate::jet::Var::T, base, shape).unwrap();
    let shifted = t.add_scalar(-base.t);
    let mut p = shifted.clone();
    for _ in 1..k {
        p = p.mul(&shifted).unwrap();
    }
    jet = jet.add(&p.scale(coeff)).unwrap();
    jet
}

/// The pair (Λ, H) defining the DFCB coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub lambda: TimeProfile,
    pub h: TimeProfile,
}

impl Coefficients {
    pub fn new(lambda: TimeProfile, h: TimeProfile) -> Self {
        Self { lambda, h }
    }

    pub fn lambda_checked(&self, t: f64) -> Result<f64> {
        let v = self.lambda.eval(t);
        if v.abs() < LAMBDA_MIN {
            return Err(DfcbError::DegenerateLambda { t, magnitude: v.abs() });
        }
        Ok(v)
    }

    /// S(t) = Λ′/Λ
    pub fn s(&self, t: f64) -> Result<f64> {
        Ok(self.lambda.deriv(t) / self.lambda_checked(t)?)
    }

    /// T(t) = H′ − (Λ′/Λ)·H
    pub fn t_term(&self, t: f64) -> Result<f64> {
        Ok(self.h.deriv(t) - self.s(t)? * self.h.eval(t))
    }

    /// P(t) = 1/Λ
    pub fn p(&self, t: f64) -> Result<f64> {
        Ok(1.0 / self.lambda_checked(t)?)
    }

    /// R(t) = −H/Λ
    pub fn r(&self, t: f64) -> Result<f64> {
        Ok(-self.h.eval(t) / self.lambda_checked(t)?)
    }

    /// Check Λ is bounded away from zero over [t0, t1], sampled densely.
    /// Λ sampled at 257 points: rejects both a near-zero sample and a sign
    /// change between samples (the latter implies a zero in between).
    pub fn check_t_range(&self, t0: f64, t1: f64) -> Result<()> {
        let n = 256;
        let mut prev: Option<f64> = None;
        for i in 0..=n {
            let t = t0 + (t1 - t0) * i as f64 / n as f64;
            let lam = self.lambda_checked(t)?;
            if let Some(p) = prev {
                if p.signum() != lam.signum() {
                    return Err(DfcbError::DegenerateLambda { t, magnitude: 0.0 });
                }
            }
            prev = Some(lam);
        }
        Ok(())
    }
}
