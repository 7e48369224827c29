//! Seed eigenfunctions over the trivial background, and the Lax operators
//! L = ∂x³ + ((u−H)/Λ)∂x + ((v−H)/Λ)I and
//! M = ∂x³ + (3/2)∂x² + ((u−H)/Λ)∂x + ∂y + ((u+v−2H)/Λ)I
//! with residual checks of Lψ = ψ_y, ψ_t = Mψ.

use serde::{Deserialize, Serialize};

use crate::coeffs::Coefficients;
use crate::error::Result;
use crate::grid::GridSpec;
use crate::jet::{Jet, JetShape, Point, Var};
use crate::DfcbError;

/// One eigenfunction of the trivial-background Lax pair:
/// ψ = c1·e^{ξ1} + c2·e^{ξ2}·sin ξ3 + c3·e^{ξ2}·cos ξ3.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedSpec {
    pub k: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl SeedSpec {
    pub fn new(k: f64, c1: f64, c2: f64, c3: f64) -> Self {
        Self { k, c1, c2, c3 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.c1 == 0.0 && self.c2 == 0.0 && self.c3 == 0.0 {
            return Err(DfcbError::InvalidSeeds(
                "superposition coefficients (c1, c2, c3) must not all vanish".into(),
            ));
        }
        Ok(())
    }

    /// k = 0 makes the seed constant in x; legal but useless for a transform.
    pub fn is_degenerate(&self) -> bool {
        self.k == 0.0
    }

    pub fn phases(&self) -> PhaseSet {
        let k = self.k;
        let k2 = k * k;
        let k3 = k2 * k;
        PhaseSet {
            xi1: Phase { cx: k, cy: k3, ct: 2.0 * k3 + 1.5 * k2 },
            xi2: Phase { cx: k, cy: -2.0 * k3, ct: -4.0 * k3 },
            xi3: Phase { cx: k, cy: 2.0 * k3, ct: 4.0 * k3 + 3.0 * k2 },
        }
    }

    /// Jet of ψ at `base`.
    pub fn eval(&self, base: Point, shape: JetShape) -> Result<Jet> {
        let ph = self.phases();
        let e1 = ph.xi1.jet(base, shape)?.exp();
        let e2 = ph.xi2.jet(base, shape)?.exp();
        let xi3 = ph.xi3.jet(base, shape)?;
        let trig = xi3.sin().scale(self.c2).add(&xi3.cos().scale(self.c3))?;
        e1.scale(self.c1).add(&e2.mul(&trig)?)
    }

    /// Scalar ψ value (closed form, independent of the jet path).
    pub fn eval_scalar(&self, p: Point) -> f64 {
        let ph = self.phases();
        self.c1 * ph.xi1.value(p).exp()
            + ph.xi2.value(p).exp()
                * (self.c2 * ph.xi3.value(p).sin() + self.c3 * ph.xi3.value(p).cos())
    }
}

/// Affine phase cx·x + cy·y + ct·t.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Phase {
    pub cx: f64,
    pub cy: f64,
    pub ct: f64,
}

impl Phase {
    pub fn value(&self, p: Point) -> f64 {
        self.cx * p.x + self.cy * p.y + self.ct * p.t
    }

    pub fn jet(&self, base: Point, shape: JetShape) -> Result<Jet> {
        Jet::affine(base, shape, self.cx, self.cy, self.ct)
    }
}

/// The three phases of one seed; all share the x-coefficient k.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseSet {
    pub xi1: Phase,
    pub xi2: Phase,
    pub xi3: Phase,
}

/// Anything that can report pointwise potential values (u, v).
pub trait Potentials {
    fn uv(&self, p: Point) -> Result<(f64, f64)>;
}

/// The trivial solution u = v = H(t).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrivialBackground {
    pub coeffs: Coefficients,
}

impl TrivialBackground {
    pub fn new(coeffs: Coefficients) -> Self {
        Self { coeffs }
    }

    pub fn u_jet(&self, base: Point, shape: JetShape) -> Jet {
        self.coeffs.h.to_jet(base, shape)
    }

    pub fn v_jet(&self, base: Point, shape: JetShape) -> Jet {
        self.coeffs.h.to_jet(base, shape)
    }
}

impl Potentials for TrivialBackground {
    fn uv(&self, p: Point) -> Result<(f64, f64)> {
        let h = self.coeffs.h.eval(p.t);
        Ok((h, h))
    }
}

/// Jet of Lψ, truncated to x-order − 3.
pub fn apply_l(pot: &dyn Potentials, coeffs: &Coefficients, psi: &Jet) -> Result<Jet> {
    let p = psi.base();
    let (u, v) = pot.uv(p)?;
    let lam = coeffs.lambda_checked(p.t)?;
    let h = coeffs.h.eval(p.t);
    let sh = psi.shape();
    let out_shape = JetShape::new(sh.order_x - 3, sh.order_y, sh.order_t);
    let d3 = psi.dxn(3)?;
    let d1 = psi.dx()?.truncate(out_shape)?;
    let p0 = psi.truncate(out_shape)?;
    d3.add(&d1.scale((u - h) / lam))?.add(&p0.scale((v - h) / lam))
}

/// Jet of Mψ, truncated to (x-order − 3, y-order − 1).
pub fn apply_m(pot: &dyn Potentials, coeffs: &Coefficients, psi: &Jet) -> Result<Jet> {
    let p = psi.base();
    let (u, v) = pot.uv(p)?;
    let lam = coeffs.lambda_checked(p.t)?;
    let h = coeffs.h.eval(p.t);
    let sh = psi.shape();
    let out_shape = JetShape::new(sh.order_x - 3, sh.order_y - 1, sh.order_t);
    let d3 = psi.dxn(3)?.truncate(out_shape)?;
    let d2 = psi.dxn(2)?.truncate(out_shape)?;
    let d1 = psi.dx()?.truncate(out_shape)?;
    let dy = psi.deriv(Var::Y)?.truncate(out_shape)?;
    let p0 = psi.truncate(out_shape)?;
    d3.add(&d2.scale(1.5))?
        .add(&d1.scale((u - h) / lam))?
        .add(&dy)?
        .add(&p0.scale((u + v - 2.0 * h) / lam))
}

/// Residual statistics of the Lax equations over a grid.
#[derive(Clone, Debug, Default, Serialize)]
pub struct LaxReport {
    pub max_res_l: f64,
    pub rms_res_l: f64,
    pub max_res_m: f64,
    pub rms_res_m: f64,
    pub masked: usize,
    pub samples: usize,
}

/// Max/RMS over the grid of |Lψ − ψ_y| and |ψ_t − Mψ|, normalized by
/// max(1, |ψ|·(1+|k|)³). Singular samples are masked, not fatal.
pub fn lax_residual<F>(
    pot: &dyn Potentials,
    coeffs: &Coefficients,
    psi_field: F,
    k_scale: f64,
    grid: &GridSpec,
) -> Result<LaxReport>
where
    F: Fn(Point) -> Result<Jet>,
{
    let mut rep = LaxReport::default();
    let mut sum_l = 0.0;
    let mut sum_m = 0.0;
    for p in grid.nodes() {
        let psi = match psi_field(p) {
            Ok(j) => j,
            Err(DfcbError::SingularPoint { .. }) => {
                rep.masked += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let scale = 1.0f64.max(psi.value().abs() * (1.0 + k_scale.abs()).powi(3));
        let res_l = (apply_l(pot, coeffs, &psi)?.value() - psi.deriv(Var::Y)?.value()).abs() / scale;
        let res_m = (psi.deriv(Var::T)?.value() - apply_m(pot, coeffs, &psi)?.value()).abs() / scale;
        rep.max_res_l = rep.max_res_l.max(res_l);
        rep.max_res_m = rep.max_res_m.max(res_m);
        sum_l += res_l * res_l;
        sum_m += res_m * res_m;
        rep.samples += 1;
    }
    if rep.samples > 0 {
        rep.rms_res_l = (sum_l / rep.samples as f64).sqrt();
        rep.rms_res_m = (sum_m / rep.samples as f64).sqrt();
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::TimeProfile;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    const ORIGIN: Point = Point::new(0.0, 0.0, 0.0);

    fn trivial(lambda: TimeProfile, h: TimeProfile) -> TrivialBackground {
        TrivialBackground::new(Coefficients::new(lambda, h))
    }

    fn flat() -> TrivialBackground {
        trivial(TimeProfile::Constant { c: 1.0 }, TimeProfile::Constant { c: 0.0 })
    }

    fn random_seed(rng: &mut StdRng) -> SeedSpec {
        let k = loop {
            let k: f64 = rng.gen_range(-2.0..2.0);
            if k.abs() > 0.05 {
                break k;
            }
        };
        loop {
            let s = SeedSpec::new(
                k,
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
            );
            if s.validate().is_ok() {
                break s;
            }
        }
    }

    #[test]
    fn seed_value_at_origin() {
        let s = SeedSpec::new(1.0, 1.0, 1.0, 1.0);
        let j = s.eval(ORIGIN, JetShape::new(3, 1, 1)).unwrap();
        assert!((j.value() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn pure_exponential_phase_coefficients() {
        let s = SeedSpec::new(1.0, 1.0, 0.0, 0.0);
        let j = s.eval(ORIGIN, JetShape::new(3, 1, 1)).unwrap();
        assert!((j.partial(1, 0, 0).unwrap() - 1.0).abs() < 1e-15);
        assert!((j.partial(0, 1, 0).unwrap() - 1.0).abs() < 1e-15);
        assert!((j.partial(0, 0, 1).unwrap() - 3.5).abs() < 1e-15);
    }

    #[test]
    fn seed_partials_match_finite_differences() {
        let mut rng = StdRng::seed_from_u64(53);
        let h = 1e-5;
        let s = SeedSpec::new(0.5, 0.0, 1.0, 0.0);
        for _ in 0..100 {
            let p = Point::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let jet = s.eval(p, JetShape::new(3, 1, 1)).unwrap();
            let cases: [(fn(Point, f64) -> Point, (usize, usize, usize)); 3] = [
                (|q, d| Point::new(q.x + d, q.y, q.t), (1, 0, 0)),
                (|q, d| Point::new(q.x, q.y + d, q.t), (0, 1, 0)),
                (|q, d| Point::new(q.x, q.y, q.t + d), (0, 0, 1)),
            ];
            for (shift, (i, j, k)) in cases {
                let fd = (s.eval_scalar(shift(p, h)) - s.eval_scalar(shift(p, -h))) / (2.0 * h);
                let exact = jet.partial(i, j, k).unwrap();
                assert!((fd - exact).abs() <= 1e-6 * (1.0 + exact.abs()));
            }
        }
    }

    #[test]
    fn phases_restrict_to_printed_offsets() {
        let s = SeedSpec::new(0.7, 1.0, 1.0, 1.0);
        let ph = s.phases();
        let k = 0.7f64;
        let k3 = k.powi(3);
        assert_eq!(ph.xi1.cx, k);
        assert_eq!(ph.xi2.cx, k);
        assert_eq!(ph.xi3.cx, k);
        // ξ1 = kx + d1, ξ2 = kx + d2 with the printed d1, d2
        let p = Point::new(0.0, 1.3, -0.4);
        let d1 = k3 * p.y + (2.0 * k3 + 1.5 * k * k) * p.t;
        let d2 = -2.0 * k3 * p.y - 4.0 * k3 * p.t;
        assert!((ph.xi1.value(p) - d1).abs() < 1e-15);
        assert!((ph.xi2.value(p) - d2).abs() < 1e-15);
    }

    #[test]
    fn l_reduces_to_third_derivative_on_trivial_background() {
        let bg = flat();
        let s = SeedSpec::new(1.2, 0.4, -0.8, 1.1);
        let p = Point::new(0.3, -0.2, 0.6);
        let psi = s.eval(p, JetShape::new(5, 1, 1)).unwrap();
        let l = apply_l(&bg, &bg.coeffs, &psi).unwrap();
        assert!(
            (l.value() - psi.partial(3, 0, 0).unwrap()).abs()
                < 1e-12 * (1.0 + psi.value().abs())
        );
    }

    #[test]
    fn l_equals_y_derivative_for_pure_exponential() {
        let bg = flat();
        let s = SeedSpec::new(1.0, 1.0, 0.0, 0.0);
        let psi = s.eval(ORIGIN, JetShape::new(4, 1, 1)).unwrap();
        let l = apply_l(&bg, &bg.coeffs, &psi).unwrap();
        assert!((l.value() - 1.0).abs() < 1e-14);
        assert!((l.value() - psi.deriv(Var::Y).unwrap().value()).abs() < 1e-14);
    }

    #[test]
    fn m_matches_t_derivative_at_origin() {
        let bg = flat();
        let s = SeedSpec::new(1.0, 1.0, 0.0, 0.0);
        let psi = s.eval(ORIGIN, JetShape::new(4, 2, 1)).unwrap();
        let m = apply_m(&bg, &bg.coeffs, &psi).unwrap();
        assert!((m.value() - 3.5).abs() < 1e-14);
        assert!((m.value() - psi.deriv(Var::T).unwrap().value()).abs() < 1e-14);
    }

    #[test]
    fn lax_identity_for_random_seeds() {
        let mut rng = StdRng::seed_from_u64(59);
        let grid = GridSpec {
            x0: -2.0,
            x1: 2.0,
            nx: 5,
            y0: -2.0,
            y1: 2.0,
            ny: 5,
            t0: -2.0,
            t1: 2.0,
            nt: 5,
        };
        let backgrounds = [
            flat(),
            trivial(
                TimeProfile::Exponential { a: 1.0, b: 0.1 },
                TimeProfile::SinusoidalOffset { a: 0.2, omega: 1.0, phi: 0.0, d: 0.0 },
            ),
            trivial(
                TimeProfile::SinusoidalOffset { a: 0.3, omega: 0.7, phi: 0.1, d: 2.0 },
                TimeProfile::Linear { a: 0.4, b: -0.2 },
            ),
        ];
        for bg in &backgrounds {
            for _ in 0..10 {
                let s = random_seed(&mut rng);
                let rep = lax_residual(
                    bg,
                    &bg.coeffs,
                    |p| s.eval(p, JetShape::new(4, 2, 1)),
                    s.k,
                    &grid,
                )
                .unwrap();
                assert!(rep.max_res_l <= 1e-9, "L residual {}", rep.max_res_l);
                assert!(rep.max_res_m <= 1e-9, "M residual {}", rep.max_res_m);
            }
        }
    }

    #[test]
    fn perturbed_eigenfunction_fails_the_lax_check() {
        let bg = flat();
        let s = SeedSpec::new(0.8, 1.0, 1.0, 1.0);
        let grid =
            GridSpec { x0: -1.0, x1: 1.0, nx: 5, y0: -1.0, y1: 1.0, ny: 3, t0: 0.0, t1: 1.0, nt: 3 };
        let rep = lax_residual(
            &bg,
            &bg.coeffs,
            |p| {
                let shape = JetShape::new(4, 2, 1);
                let psi = s.eval(p, shape)?;
                let bump = Jet::affine(p, shape, 1.0, 0.0, 0.0)?.sin().scale(0.1);
                psi.add(&bump)
            },
            s.k,
            &grid,
        )
        .unwrap();
        assert!(rep.max_res_l > 1e-3);
    }

    #[test]
    fn empty_grid_yields_empty_report() {
        let bg = flat();
        let s = SeedSpec::new(0.8, 1.0, 0.0, 0.0);
        let grid =
            GridSpec { x0: 0.0, x1: 1.0, nx: 0, y0: 0.0, y1: 1.0, ny: 1, t0: 0.0, t1: 1.0, nt: 1 };
        let rep =
            lax_residual(&bg, &bg.coeffs, |p| s.eval(p, JetShape::new(4, 2, 1)), s.k, &grid)
                .unwrap();
        assert_eq!(rep.samples, 0);
        assert_eq!(rep.masked, 0);
        assert_eq!(rep.max_res_l, 0.0);
    }

    #[test]
    fn all_zero_coefficients_rejected() {
        assert!(SeedSpec::new(1.0, 0.0, 0.0, 0.0).validate().is_err());
        assert!(SeedSpec::new(0.0, 1.0, 0.0, 0.0).validate().is_ok());
        assert!(SeedSpec::new(0.0, 1.0, 0.0, 0.0).is_degenerate());
    }
}
