//! One-fold and N-fold Darboux transformations over the trivial background.
//!
//! The N-fold potentials come out of logarithmic x-derivatives of nested
//! Wronskians:
//!   u[N] = u + 3Λ ∂x² log W(ψ1..ψN)
//!   v[N] = v + N·u_x + 3Λ Σ_{r=1..N} ( ∂x log(W_r/W_{r−1}) · ∂x² log(W_r/W_{r−1})
//!                                      + ∂x³ log W_r )
//! with W_0 ≡ 1. Both the direct Wronskian evaluation and the iterated
//! one-fold recursion are implemented; their agreement is an executable form
//! of the inductive equivalence proof and is exercised by the tests.

use serde::{Deserialize, Serialize};

use crate::error::{DfcbError, Result};
use crate::grid::GridSpec;
use crate::jet::{jet_det, Jet, JetShape, Point, EPS_SING};
use crate::seeds::{Potentials, SeedSpec, TrivialBackground};

/// Shape carried by transformed u jets: enough for u_xxx, u_y, u_t.
pub const U_SHAPE: JetShape = JetShape::new(3, 1, 1);
/// Shape carried by transformed v jets: enough for v_xx, v_y, v_t.
pub const V_SHAPE: JetShape = JetShape::new(2, 1, 1);

/// Maximum fold count (keeps determinants at size ≤ 5 including the ψ column
/// of eigenfunction transforms).
pub const MAX_FOLD: usize = 4;

/// One application of the transformation, keeping the coefficient
/// B = −∂x log ψ_seed as a jet at the step's base point.
#[derive(Clone, Debug)]
pub struct DarbouxStep {
    pub seed: SeedSpec,
    pub b: Jet,
}

impl DarbouxStep {
    /// B is defined wherever |ψ_seed| stays above the singularity threshold.
    pub fn at(seed: SeedSpec, base: Point, shape: JetShape) -> Result<DarbouxStep> {
        let psi = seed.eval(base, shape)?;
        let b = psi.log()?.dx()?.scale(-1.0);
        Ok(DarbouxStep { seed, b })
    }
}

/// W(ψ1..ψN) = det(θ1..θN), θ_j = (ψ_j, ∂xψ_j, ..., ∂x^{N−1}ψ_j)ᵀ.
/// Derivative rows are index shifts of the seed jets, so the seeds are
/// evaluated with N−1 extra x-orders.
pub fn wronskian(seeds: &[SeedSpec], point: Point, shape: JetShape) -> Result<Jet> {
    let n = seeds.len();
    if n == 0 || n > MAX_FOLD + 1 {
        return Err(DfcbError::InvalidSeeds(format!("wronskian size {n} unsupported")));
    }
    let eval_shape = JetShape::new(shape.order_x + n - 1, shape.order_y, shape.order_t);
    let psis: Vec<Jet> =
        seeds.iter().map(|s| s.eval(point, eval_shape)).collect::<Result<_>>()?;
    wronskian_of_jets(&psis, shape)
}

/// Same Wronskian, but over already-evaluated eigenfunction jets.
pub fn wronskian_of_jets(psis: &[Jet], shape: JetShape) -> Result<Jet> {
    let n = psis.len();
    let rows: Vec<Vec<Jet>> = (0..n)
        .map(|i| psis.iter().map(|psi| psi.dxn(i)?.truncate(shape)).collect())
        .collect::<Result<_>>()?;
    jet_det(&rows)
}

/// ψ[1] = (∂x − ∂x log ψ_seed)ψ; the result loses one x-order.
pub fn onefold_eigenfunction(seed: &SeedSpec, psi: &Jet) -> Result<Jet> {
    let seed_jet = seed.eval(psi.base(), psi.shape())?;
    apply_onefold(&seed_jet, psi)
}

fn apply_onefold(seed_jet: &Jet, psi: &Jet) -> Result<Jet> {
    let sh = psi.shape();
    let out = JetShape::new(sh.order_x - 1, sh.order_y, sh.order_t);
    let dlog = seed_jet.log()?.dx()?.truncate(out)?;
    psi.dx()?.sub(&dlog.mul(&psi.truncate(out)?)?)
}

/// One-fold potentials u[1] = u + 3Λ ∂x² log ψ1,
/// v[1] = v + u_x + 3Λ(∂x log ψ1 · ∂x² log ψ1 + ∂x³ log ψ1).
pub fn onefold_potentials(
    background: &TrivialBackground,
    seed: &SeedSpec,
    point: Point,
) -> Result<(Jet, Jet)> {
    TransformedSolution::new(*background, vec![*seed], Mode::WronskianDirect)?.eval_uv_jets(point)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    WronskianDirect,
    IteratedOnefold,
}

/// An N-fold Darboux-transformed solution over the trivial background.
#[derive(Clone, Debug)]
pub struct TransformedSolution {
    pub background: TrivialBackground,
    pub seeds: Vec<SeedSpec>,
    pub mode: Mode,
}

impl TransformedSolution {
    /// Fold count comes from `seeds.len()`; zero seeds is the background
    /// itself. Equal wavenumbers are rejected here: the degeneracy is
    /// structural, not pointwise.
    pub fn new(
        background: TrivialBackground,
        seeds: Vec<SeedSpec>,
        mode: Mode,
    ) -> Result<TransformedSolution> {
        if seeds.len() > MAX_FOLD {
            return Err(DfcbError::InvalidSeeds(format!(
                "fold {} exceeds maximum {MAX_FOLD}",
                seeds.len()
            )));
        }
        for (i, s) in seeds.iter().enumerate() {
            s.validate()?;
            for (j, s2) in seeds.iter().enumerate().skip(i + 1) {
                if s.k == s2.k {
                    return Err(DfcbError::InvalidSeeds(format!(
                        "seeds {i} and {j} share wavenumber k = {}; the Wronskian degenerates",
                        s.k
                    )));
                }
            }
        }
        Ok(TransformedSolution { background, seeds, mode })
    }

    pub fn fold(&self) -> usize {
        self.seeds.len()
    }

    pub fn coeffs(&self) -> &crate::coeffs::Coefficients {
        &self.background.coeffs
    }

    /// Jets of (u[N], v[N]) at `point`, shaped [`U_SHAPE`] / [`V_SHAPE`].
    pub fn eval_uv_jets(&self, point: Point) -> Result<(Jet, Jet)> {
        self.coeffs().lambda_checked(point.t)?;
        if self.seeds.is_empty() {
            return Ok((
                self.background.u_jet(point, U_SHAPE),
                self.background.v_jet(point, V_SHAPE),
            ));
        }
        match self.mode {
            Mode::WronskianDirect => self.eval_direct(point),
            Mode::IteratedOnefold => self.eval_iterated(point),
        }
    }

    pub fn uv_values(&self, point: Point) -> Result<(f64, f64)> {
        let (u, v) = self.eval_uv_jets(point)?;
        Ok((u.value(), v.value()))
    }

    fn eval_direct(&self, point: Point) -> Result<(Jet, Jet)> {
        let n = self.seeds.len();
        let coeffs = self.coeffs();
        let seed_shape = JetShape::new(n + 4, 1, 1);
        let w_shape = JetShape::new(5, 1, 1);
        let psis: Vec<Jet> =
            self.seeds.iter().map(|s| s.eval(point, seed_shape)).collect::<Result<_>>()?;

        // log W_r for r = 1..N, naming the smallest degenerate r on failure
        let mut log_ws = Vec::with_capacity(n);
        for r in 1..=n {
            let w = wronskian_of_jets(&psis[..r], w_shape)?;
            let mag = w.value().abs();
            if mag < EPS_SING {
                return Err(DfcbError::SingularPoint { symbol: format!("W_{r}"), magnitude: mag });
            }
            log_ws.push(w.log()?);
        }

        let lam_u = coeffs.lambda.to_jet(point, U_SHAPE).scale(3.0);
        let u_bg = self.background.u_jet(point, JetShape::new(4, 1, 1));
        let u = u_bg
            .truncate(U_SHAPE)?
            .add(&lam_u.mul(&log_ws[n - 1].dxn(2)?.truncate(U_SHAPE)?)?)?;

        let lam_v = coeffs.lambda.to_jet(point, V_SHAPE).scale(3.0);
        let mut acc = Jet::zero(point, V_SHAPE);
        for r in 0..n {
            let ratio_log = if r == 0 { log_ws[0].clone() } else { log_ws[r].sub(&log_ws[r - 1])? };
            let d1 = ratio_log.dx()?.truncate(V_SHAPE)?;
            let d2 = ratio_log.dxn(2)?.truncate(V_SHAPE)?;
            acc = acc.add(&d1.mul(&d2)?)?.add(&log_ws[r].dxn(3)?)?;
        }
        let v = self
            .background
            .v_jet(point, V_SHAPE)
            .add(&u_bg.dx()?.truncate(V_SHAPE)?.scale(n as f64))?
            .add(&lam_v.mul(&acc)?)?;
        Ok((u, v))
    }

    /// The proof's recursion: consume one seed per step, transforming the
    /// remaining eigenfunctions alongside the potentials.
    fn eval_iterated(&self, point: Point) -> Result<(Jet, Jet)> {
        let n = self.seeds.len();
        let coeffs = self.coeffs();
        let seed_shape = JetShape::new(n + 4, 1, 1);
        let mut psis: Vec<Jet> =
            self.seeds.iter().map(|s| s.eval(point, seed_shape)).collect::<Result<_>>()?;

        let big = JetShape::new(n + 4, 1, 1);
        let mut u = self.background.u_jet(point, big);
        let mut v = self.background.v_jet(point, big);

        for m in 0..n {
            let phi = psis[m].clone();
            let mag = phi.value().abs();
            if mag < EPS_SING {
                return Err(DfcbError::SingularPoint {
                    symbol: format!("psi_{}[{}]", m + 1, m),
                    magnitude: mag,
                });
            }
            let log_phi = phi.log()?;
            let d1 = log_phi.dx()?;
            let d2 = log_phi.dxn(2)?;
            let d3 = log_phi.dxn(3)?;

            let u_shape = d2.shape();
            let v_shape = d3.shape();
            let lam_u = coeffs.lambda.to_jet(point, u_shape).scale(3.0);
            let lam_v = coeffs.lambda.to_jet(point, v_shape).scale(3.0);

            let ux = u.dx()?.truncate(v_shape)?;
            let nonlinear = d1.truncate(v_shape)?.mul(&d2.truncate(v_shape)?)?;
            v = v
                .truncate(v_shape)?
                .add(&ux)?
                .add(&lam_v.mul(&nonlinear.add(&d3)?)?)?;
            u = u.truncate(u_shape)?.add(&lam_u.mul(&d2)?)?;

            for psi in psis.iter_mut().skip(m + 1) {
                *psi = apply_onefold(&phi, psi)?;
            }
        }
        Ok((u.truncate(U_SHAPE)?, v.truncate(V_SHAPE)?))
    }

    /// Jet of the transformed eigenfunction W(ψ1..ψN, ψ)/W(ψ1..ψN) built from
    /// an extra seed, with `extra_x` spare x-orders for downstream Lax checks.
    pub fn transformed_eigenfunction(
        &self,
        extra_seed: &SeedSpec,
        point: Point,
        out_shape: JetShape,
    ) -> Result<Jet> {
        let n = self.seeds.len();
        let eval_shape =
            JetShape::new(out_shape.order_x + n, out_shape.order_y, out_shape.order_t);
        let mut psis: Vec<Jet> =
            self.seeds.iter().map(|s| s.eval(point, eval_shape)).collect::<Result<_>>()?;
        psis.push(extra_seed.eval(point, eval_shape)?);
        // iterate the one-fold map; equals the Wronskian quotient
        for m in 0..n {
            let phi = psis[m].clone();
            if phi.value().abs() < EPS_SING {
                return Err(DfcbError::SingularPoint {
                    symbol: format!("psi_{}[{}]", m + 1, m),
                    magnitude: phi.value().abs(),
                });
            }
            for psi in psis.iter_mut().skip(m + 1) {
                *psi = apply_onefold(&phi, psi)?;
            }
        }
        psis.last().unwrap().truncate(out_shape)
    }

    /// Grid sample with singular nodes masked as NaN.
    pub fn sample(&self, grid: &GridSpec) -> Result<FieldSample> {
        grid.validate()?;
        let mut u = Vec::with_capacity(grid.len());
        let mut v = Vec::with_capacity(grid.len());
        let mut masked = Vec::new();
        for (idx, p) in grid.nodes().enumerate() {
            match self.uv_values(p) {
                Ok((uu, vv)) => {
                    u.push(uu);
                    v.push(vv);
                }
                Err(DfcbError::SingularPoint { .. }) => {
                    u.push(f64::NAN);
                    v.push(f64::NAN);
                    masked.push(idx);
                }
                Err(e) => return Err(e),
            }
        }
        Ok(FieldSample { grid: *grid, u, v, masked })
    }
}

impl Potentials for TransformedSolution {
    fn uv(&self, p: Point) -> Result<(f64, f64)> {
        self.uv_values(p)
    }
}

/// (u, v) arrays over a grid, x-fastest then y then t; masked nodes hold NaN.
#[derive(Clone, Debug)]
pub struct FieldSample {
    pub grid: GridSpec,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub masked: Vec<usize>,
}

impl FieldSample {
    pub fn mask_count(&self) -> usize {
        self.masked.len()
    }

    pub fn valid_count(&self) -> usize {
        self.u.len() - self.masked.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{Coefficients, TimeProfile};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    const ORIGIN: Point = Point::new(0.0, 0.0, 0.0);

    fn flat() -> TrivialBackground {
        TrivialBackground::new(Coefficients::new(
            TimeProfile::Constant { c: 1.0 },
            TimeProfile::Constant { c: 0.0 },
        ))
    }

    fn varying() -> TrivialBackground {
        TrivialBackground::new(Coefficients::new(
            TimeProfile::Exponential { a: 1.0, b: 0.1 },
            TimeProfile::SinusoidalOffset { a: 0.3, omega: 1.0, phi: 0.2, d: 0.5 },
        ))
    }

    fn random_seed(rng: &mut StdRng, lo: f64, hi: f64) -> SeedSpec {
        SeedSpec::new(
            rng.gen_range(lo..hi),
            rng.gen_range(0.2..1.5),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        )
    }

    #[test]
    fn wronskian_of_one_is_the_eigenfunction() {
        let s = SeedSpec::new(0.9, 1.0, 0.5, -0.3);
        let p = Point::new(0.4, -0.1, 0.2);
        let shape = JetShape::new(3, 1, 1);
        let w = wronskian(&[s], p, shape).unwrap();
        let psi = s.eval(p, shape).unwrap();
        assert!((w.value() - psi.value()).abs() < 1e-13);
        assert!(w.sub(&psi).unwrap().max_abs_coeff() < 1e-13);
    }

    #[test]
    fn two_exponentials_give_the_closed_form() {
        let (k1, k2) = (0.7, -0.4);
        let s1 = SeedSpec::new(k1, 1.0, 0.0, 0.0);
        let s2 = SeedSpec::new(k2, 1.0, 0.0, 0.0);
        let p = Point::new(0.3, 0.2, -0.5);
        let w = wronskian(&[s1, s2], p, JetShape::new(2, 1, 1)).unwrap();
        let xi = |k: f64| {
            let k3 = k * k * k;
            k * p.x + k3 * p.y + (2.0 * k3 + 1.5 * k * k) * p.t
        };
        let expected = (k2 - k1) * (xi(k1) + xi(k2)).exp();
        assert!((w.value() - expected).abs() < 1e-12 * expected.abs().max(1.0));
    }

    #[test]
    fn wronskian_matches_finite_difference_determinant() {
        let seeds = [
            SeedSpec::new(0.8, 1.0, 0.4, -0.2),
            SeedSpec::new(-0.5, 0.3, 1.0, 0.6),
            SeedSpec::new(1.3, 0.2, -0.7, 0.9),
        ];
        let p = Point::new(0.2, -0.3, 0.4);
        let h = 1e-2;
        // rows: ψ, ψ_x, ψ_xx by fourth-order central differences
        let mut m = [[0.0f64; 3]; 3];
        for (j, s) in seeds.iter().enumerate() {
            let f = |off: f64| s.eval_scalar(Point::new(p.x + off * h, p.y, p.t));
            m[0][j] = f(0.0);
            m[1][j] = (-f(2.0) + 8.0 * f(1.0) - 8.0 * f(-1.0) + f(-2.0)) / (12.0 * h);
            m[2][j] = (-f(2.0) + 16.0 * f(1.0) - 30.0 * f(0.0) + 16.0 * f(-1.0) - f(-2.0))
                / (12.0 * h * h);
        }
        let det3 = |m: &[[f64; 3]; 3]| {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        };
        let w = wronskian(&seeds, p, JetShape::new(0, 1, 1)).unwrap();
        let scale = w.value().abs().max(1.0);
        assert!((w.value() - det3(&m)).abs() < 1e-5 * scale);
    }

    #[test]
    fn onefold_potential_values_at_origin() {
        // ψ = e^{ξ2}cos ξ3, k = 1, Λ = 1, H = 0:
        // ∂x² log ψ at the origin is −k², so u[1] = −3 there.
        let bg = flat();
        let s = SeedSpec::new(1.0, 0.0, 0.0, 1.0);
        let (u, _v) = onefold_potentials(&bg, &s, ORIGIN).unwrap();
        assert!((u.value() + 3.0).abs() < 1e-12);
    }

    #[test]
    fn onefold_annihilates_its_own_seed() {
        let s = SeedSpec::new(0.9, 1.0, 0.5, -0.3);
        let p = Point::new(0.3, -0.2, 0.1);
        let psi = s.eval(p, JetShape::new(4, 1, 1)).unwrap();
        let out = onefold_eigenfunction(&s, &psi).unwrap();
        assert!(out.max_abs_coeff() < 1e-12 * psi.max_abs_coeff().max(1.0));
    }

    #[test]
    fn onefold_eigenfunction_is_a_wronskian_quotient() {
        let s1 = SeedSpec::new(0.9, 1.0, 0.5, -0.3);
        let s2 = SeedSpec::new(-0.6, 0.4, 0.8, 0.2);
        let p = Point::new(0.2, 0.1, -0.4);
        let shape = JetShape::new(4, 1, 1);
        let psi = s2.eval(p, shape).unwrap();
        let out_shape = JetShape::new(3, 1, 1);
        let lhs = onefold_eigenfunction(&s1, &psi)
            .unwrap()
            .mul(&s1.eval(p, out_shape).unwrap())
            .unwrap();
        let rhs = wronskian(&[s1, s2], p, out_shape).unwrap();
        let scale = rhs.max_abs_coeff().max(1.0);
        assert!(lhs.sub(&rhs).unwrap().max_abs_coeff() < 1e-11 * scale);
    }

    #[test]
    fn direct_and_iterated_modes_agree() {
        let mut rng = StdRng::seed_from_u64(71);
        let mut compared = 0usize;
        for bg in [flat(), varying()] {
            for n in 2..=3usize {
                for _ in 0..6 {
                    let mut seeds = Vec::new();
                    for i in 0..n {
                        // spread wavenumbers so the seeds stay independent
                        let lo = -1.2 + 0.9 * i as f64;
                        seeds.push(random_seed(&mut rng, lo, lo + 0.7));
                    }
                    let direct =
                        TransformedSolution::new(bg, seeds.clone(), Mode::WronskianDirect).unwrap();
                    let iterated =
                        TransformedSolution::new(bg, seeds, Mode::IteratedOnefold).unwrap();
                    let p = Point::new(
                        rng.gen_range(-0.5..0.5),
                        rng.gen_range(-0.5..0.5),
                        rng.gen_range(-0.5..0.5),
                    );
                    let (du, dv) = match direct.eval_uv_jets(p) {
                        Ok(pair) => pair,
                        Err(DfcbError::SingularPoint { .. }) => continue,
                        Err(e) => panic!("{e}"),
                    };
                    let (iu, iv) = iterated.eval_uv_jets(p).unwrap();
                    let su = du.max_abs_coeff().max(1.0);
                    let sv = dv.max_abs_coeff().max(1.0);
                    if su > 1e6 || sv > 1e6 {
                        // near a pole both routes lose digits to cancellation
                        continue;
                    }
                    assert!(du.sub(&iu).unwrap().max_abs_coeff() < 1e-6 * su);
                    assert!(dv.sub(&iv).unwrap().max_abs_coeff() < 1e-6 * sv);
                    compared += 1;
                }
            }
        }
        assert!(compared >= 15, "only {compared} well-conditioned samples");
    }

    #[test]
    fn pure_exponential_seeds_leave_the_background_unchanged() {
        let bg = varying();
        let seeds =
            vec![SeedSpec::new(0.7, 1.0, 0.0, 0.0), SeedSpec::new(-0.4, 2.0, 0.0, 0.0)];
        let sol = TransformedSolution::new(bg, seeds, Mode::WronskianDirect).unwrap();
        let p = Point::new(0.3, -0.2, 0.6);
        let (u, v) = sol.uv_values(p).unwrap();
        let h = bg.coeffs.h.eval(p.t);
        assert!((u - h).abs() < 1e-10 * h.abs().max(1.0));
        assert!((v - h).abs() < 1e-10 * h.abs().max(1.0));
    }

    #[test]
    fn sample_masks_singular_nodes_as_nan() {
        // ψ = e^{ξ2}cos ξ3 vanishes at x = π/2 on the y = t = 0 slice
        let bg = flat();
        let s = SeedSpec::new(1.0, 0.0, 0.0, 1.0);
        let sol = TransformedSolution::new(bg, vec![s], Mode::WronskianDirect).unwrap();
        let half_pi = std::f64::consts::FRAC_PI_2;
        let grid = GridSpec {
            x0: half_pi - 1.0,
            x1: half_pi + 1.0,
            nx: 3,
            y0: 0.0,
            y1: 1.0,
            ny: 1,
            t0: 0.0,
            t1: 1.0,
            nt: 1,
        };
        let fs = sol.sample(&grid).unwrap();
        assert_eq!(fs.mask_count(), 1);
        assert_eq!(fs.valid_count(), 2);
        assert_eq!(fs.masked, vec![1]);
        assert!(fs.u[1].is_nan() && fs.v[1].is_nan());
        assert!(fs.u[0].is_finite() && fs.u[2].is_finite());
    }

    #[test]
    fn construction_rejects_bad_seed_sets() {
        let bg = flat();
        let mk = |k: f64| SeedSpec::new(k, 1.0, 0.2, 0.3);
        let too_many: Vec<SeedSpec> = (0..5).map(|i| mk(0.3 + 0.2 * i as f64)).collect();
        assert!(TransformedSolution::new(bg, too_many, Mode::WronskianDirect).is_err());
        assert!(
            TransformedSolution::new(bg, vec![mk(0.5), mk(0.5)], Mode::WronskianDirect).is_err()
        );
        let empty = TransformedSolution::new(bg, vec![], Mode::WronskianDirect).unwrap();
        let (u, v) = empty.uv_values(ORIGIN).unwrap();
        assert_eq!((u, v), (bg.coeffs.h.eval(0.0), bg.coeffs.h.eval(0.0)));
    }

    #[test]
    fn transformed_eigenfunction_annihilated_by_used_seeds() {
        let s1 = SeedSpec::new(0.8, 1.0, 0.3, 0.1);
        let s2 = SeedSpec::new(-0.5, 0.6, 0.9, -0.4);
        let sol = TransformedSolution::new(flat(), vec![s1, s2], Mode::WronskianDirect).unwrap();
        let p = Point::new(0.1, 0.2, -0.3);
        let shape = JetShape::new(2, 1, 1);
        // feeding back a seed that was already consumed must give zero
        let out = sol.transformed_eigenfunction(&s2, p, shape).unwrap();
        assert!(out.max_abs_coeff() < 1e-10);
        // a fresh seed must not be annihilated
        let fresh = sol
            .transformed_eigenfunction(&SeedSpec::new(1.4, 1.0, 0.2, 0.2), p, shape)
            .unwrap();
        assert!(fresh.max_abs_coeff() > 1e-6);
    }
}
