//! Truncated multivariate Taylor (jet) arithmetic in the three variables
//! (x, y, t).
//!
//! A jet stores the scaled mixed partials `∂x^i ∂y^j ∂t^k f / (i! j! k!)` of a
//! scalar field at a base point, up to per-variable orders fixed by a
//! [`JetShape`]. Arithmetic and elementary-function composition are closed on
//! jets, so every derivative the construction and the residual checks need is
//! exact to roundoff.

use crate::error::{DfcbError, Result};

/// Values with magnitude below this are treated as poles by `log`/`recip`.
pub const EPS_SING: f64 = 1e-10;

/// Per-variable truncation orders of a jet.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct JetShape {
    pub order_x: usize,
    pub order_y: usize,
    pub order_t: usize,
}

impl JetShape {
    pub const fn new(order_x: usize, order_y: usize, order_t: usize) -> Self {
        Self { order_x, order_y, order_t }
    }

    pub fn len(&self) -> usize {
        (self.order_x + 1) * (self.order_y + 1) * (self.order_t + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * (self.order_y + 1) + j) * (self.order_t + 1) + k
    }

    pub fn contains(&self, i: usize, j: usize, k: usize) -> bool {
        i <= self.order_x && j <= self.order_y && k <= self.order_t
    }

    pub fn fits_in(&self, other: &JetShape) -> bool {
        self.order_x <= other.order_x
            && self.order_y <= other.order_y
            && self.order_t <= other.order_t
    }

    pub fn min(&self, other: &JetShape) -> JetShape {
        JetShape::new(
            self.order_x.min(other.order_x),
            self.order_y.min(other.order_y),
            self.order_t.min(other.order_t),
        )
    }

    /// Bound on the nilpotency degree of the value-free part of a jet.
    pub fn total_order(&self) -> usize {
        self.order_x + self.order_y + self.order_t
    }
}

/// A sample point in (x, y, t).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64, t: f64) -> Self {
        Self { x, y, t }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
    T,
}

/// Truncated Taylor expansion of a scalar field at a base point.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    shape: JetShape,
    base: Point,
    c: Vec<f64>,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|m| m as f64).product()
}

impl Jet {
    pub fn zero(base: Point, shape: JetShape) -> Jet {
        Jet { shape, base, c: vec![0.0; shape.len()] }
    }

    pub fn constant(value: f64, base: Point, shape: JetShape) -> Jet {
        let mut j = Jet::zero(base, shape);
        j.c[0] = value;
        j
    }

    /// The coordinate function of `var`; requires order ≥ 1 in that variable.
    pub fn variable(var: Var, base: Point, shape: JetShape) -> Result<Jet> {
        let (value, i, j, k) = match var {
            Var::X => (base.x, 1, 0, 0),
            Var::Y => (base.y, 0, 1, 0),
            Var::T => (base.t, 0, 0, 1),
        };
        if !shape.contains(i, j, k) {
            return Err(DfcbError::OutOfShape(i, j, k));
        }
        let mut jet = Jet::constant(value, base, shape);
        jet.c[shape.idx(i, j, k)] = 1.0;
        Ok(jet)
    }

    /// Affine function c0 + cx·x + cy·y + ct·t evaluated around `base`.
    /// Variables with a zero coefficient need no order in the shape.
    pub fn affine(base: Point, shape: JetShape, cx: f64, cy: f64, ct: f64) -> Result<Jet> {
        let value = cx * base.x + cy * base.y + ct * base.t;
        let mut jet = Jet::constant(value, base, shape);
        for (coef, i, j, k) in [(cx, 1, 0, 0), (cy, 0, 1, 0), (ct, 0, 0, 1)] {
            if coef != 0.0 {
                if !shape.contains(i, j, k) {
                    return Err(DfcbError::OutOfShape(i, j, k));
                }
                jet.c[shape.idx(i, j, k)] = coef;
            }
        }
        Ok(jet)
    }

    pub fn shape(&self) -> JetShape {
        self.shape
    }

    pub fn base(&self) -> Point {
        self.base
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    fn coeff(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[self.shape.idx(i, j, k)]
    }

    /// The mixed partial ∂x^i ∂y^j ∂t^k at the base point.
    pub fn partial(&self, i: usize, j: usize, k: usize) -> Result<f64> {
        if !self.shape.contains(i, j, k) {
            return Err(DfcbError::OutOfShape(i, j, k));
        }
        Ok(self.coeff(i, j, k) * factorial(i) * factorial(j) * factorial(k))
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.c.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    fn check_compat(&self, other: &Jet) -> Result<()> {
        if self.shape != other.shape || self.base != other.base {
            return Err(DfcbError::ShapeMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Jet) -> Result<Jet> {
        self.check_compat(other)?;
        let mut out = self.clone();
        for (a, b) in out.c.iter_mut().zip(&other.c) {
            *a += b;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Jet) -> Result<Jet> {
        self.check_compat(other)?;
        let mut out = self.clone();
        for (a, b) in out.c.iter_mut().zip(&other.c) {
            *a -= b;
        }
        Ok(out)
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut out = self.clone();
        for a in out.c.iter_mut() {
            *a *= s;
        }
        out
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut out = self.clone();
        out.c[0] += s;
        out
    }

    /// Truncated Cauchy product; terms whose multi-index leaves the shape are
    /// dropped.
    pub fn mul(&self, other: &Jet) -> Result<Jet> {
        self.check_compat(other)?;
        let sh = self.shape;
        let mut out = Jet::zero(self.base, sh);
        for i1 in 0..=sh.order_x {
            for j1 in 0..=sh.order_y {
                for k1 in 0..=sh.order_t {
                    let a = self.coeff(i1, j1, k1);
                    if a == 0.0 {
                        continue;
                    }
                    for i2 in 0..=sh.order_x - i1 {
                        for j2 in 0..=sh.order_y - j1 {
                            for k2 in 0..=sh.order_t - k1 {
                                let b = other.coeff(i2, j2, k2);
                                if b == 0.0 {
                                    continue;
                                }
                                let idx = sh.idx(i1 + i2, j1 + j2, k1 + k2);
                                out.c[idx] += a * b;
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Restriction to a smaller shape (same base point).
    pub fn truncate(&self, shape: JetShape) -> Result<Jet> {
        if !shape.fits_in(&self.shape) {
            return Err(DfcbError::ShapeMismatch);
        }
        let mut out = Jet::zero(self.base, shape);
        for i in 0..=shape.order_x {
            for j in 0..=shape.order_y {
                for k in 0..=shape.order_t {
                    out.c[shape.idx(i, j, k)] = self.coeff(i, j, k);
                }
            }
        }
        Ok(out)
    }

    /// Derivative with respect to `var`; the order in that variable drops by
    /// one.
    pub fn deriv(&self, var: Var) -> Result<Jet> {
        let sh = self.shape;
        let new_shape = match var {
            Var::X if sh.order_x >= 1 => JetShape::new(sh.order_x - 1, sh.order_y, sh.order_t),
            Var::Y if sh.order_y >= 1 => JetShape::new(sh.order_x, sh.order_y - 1, sh.order_t),
            Var::T if sh.order_t >= 1 => JetShape::new(sh.order_x, sh.order_y, sh.order_t - 1),
            Var::X => return Err(DfcbError::OutOfShape(1, 0, 0)),
            Var::Y => return Err(DfcbError::OutOfShape(0, 1, 0)),
            Var::T => return Err(DfcbError::OutOfShape(0, 0, 1)),
        };
        let mut out = Jet::zero(self.base, new_shape);
        for i in 0..=new_shape.order_x {
            for j in 0..=new_shape.order_y {
                for k in 0..=new_shape.order_t {
                    let v = match var {
                        Var::X => (i + 1) as f64 * self.coeff(i + 1, j, k),
                        Var::Y => (j + 1) as f64 * self.coeff(i, j + 1, k),
                        Var::T => (k + 1) as f64 * self.coeff(i, j, k + 1),
                    };
                    out.c[new_shape.idx(i, j, k)] = v;
                }
            }
        }
        Ok(out)
    }

    pub fn dx(&self) -> Result<Jet> {
        self.deriv(Var::X)
    }

    pub fn dxn(&self, m: usize) -> Result<Jet> {
        let mut j = self.clone();
        for _ in 0..m {
            j = j.deriv(Var::X)?;
        }
        Ok(j)
    }

    /// Composition with a univariate function g given its derivatives at the
    /// jet's value: `derivs[m] = g^(m)(value)`. The inner jet splits into
    /// value + nilpotent part; the series is summed by Horner, truncation
    /// bounding the nilpotency degree.
    pub fn compose(&self, derivs: &[f64]) -> Jet {
        let depth = self.shape.total_order();
        debug_assert!(derivs.len() > depth);
        let mut nil = self.clone();
        nil.c[0] = 0.0;
        let mut out = Jet::constant(derivs[depth] / factorial(depth), self.base, self.shape);
        for m in (0..depth).rev() {
            // shapes always match here
            out = out.mul(&nil).unwrap().add_scalar(derivs[m] / factorial(m));
        }
        out
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let derivs = vec![e; self.shape.total_order() + 1];
        self.compose(&derivs)
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        let derivs: Vec<f64> = (0..=self.shape.total_order()).map(|m| cycle[m % 4]).collect();
        self.compose(&derivs)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        let derivs: Vec<f64> = (0..=self.shape.total_order()).map(|m| cycle[m % 4]).collect();
        self.compose(&derivs)
    }

    /// log of the magnitude; derivatives are those of log f for either sign of
    /// the value, which is all the logarithmic-derivative formulas use.
    pub fn log(&self) -> Result<Jet> {
        let v = self.value();
        if v.abs() < EPS_SING {
            return Err(DfcbError::SingularPoint { symbol: "log".into(), magnitude: v.abs() });
        }
        let n = self.shape.total_order();
        let mut derivs = vec![0.0; n + 1];
        derivs[0] = v.abs().ln();
        let mut vp = v;
        for (m, d) in derivs.iter_mut().enumerate().skip(1) {
            let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
            *d = sign * factorial(m - 1) / vp;
            vp *= v;
        }
        Ok(self.compose(&derivs))
    }

    pub fn recip(&self) -> Result<Jet> {
        let v = self.value();
        if v.abs() < EPS_SING {
            return Err(DfcbError::SingularPoint { symbol: "recip".into(), magnitude: v.abs() });
        }
        let n = self.shape.total_order();
        let mut derivs = vec![0.0; n + 1];
        let mut vp = v;
        for (m, d) in derivs.iter_mut().enumerate() {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            *d = sign * factorial(m) / vp;
            vp *= v;
        }
        Ok(self.compose(&derivs))
    }
}

/// Determinant of a small square matrix of jets by cofactor expansion along
/// the first row. Division-free, so nearly-singular pivots are not an issue;
/// the factorial cost is irrelevant at n ≤ 5.
pub fn jet_det(rows: &[Vec<Jet>]) -> Result<Jet> {
    let n = rows.len();
    if n == 0 || n > 5 || rows.iter().any(|r| r.len() != n) {
        return Err(DfcbError::ShapeMismatch);
    }
    if n == 1 {
        return Ok(rows[0][0].clone());
    }
    let mut det: Option<Jet> = None;
    for col in 0..n {
        let minor: Vec<Vec<Jet>> = rows[1..]
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != col)
                    .map(|(_, j)| j.clone())
                    .collect()
            })
            .collect();
        let mut term = rows[0][col].mul(&jet_det(&minor)?)?;
        if col % 2 == 1 {
            term = term.scale(-1.0);
        }
        det = Some(match det {
            None => term,
            Some(d) => d.add(&term)?,
        });
    }
    Ok(det.unwrap())
}
