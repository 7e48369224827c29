//! Run configuration: one JSON document per run, all physical parameters
//! explicit; defaults exist only for tolerances, FD steps and the mode.

use serde::{Deserialize, Serialize};

use dfcb::{Coefficients, GridSpec, Mode, SeedSpec, TimeProfile, TransformedSolution,
    TrivialBackground, MAX_FOLD};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub lax: f64,
    pub pde: f64,
    pub pde_fd: f64,
    pub mode: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { lax: 1e-9, pde: 1e-8, pde_fd: 1e-3, mode: 1e-10 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FdSteps {
    pub hx: f64,
    pub hy: f64,
    pub ht: f64,
}

impl Default for FdSteps {
    fn default() -> Self {
        FdSteps { hx: 1e-3, hy: 1e-3, ht: 1e-3 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    /// Varies the leading parameter of Λ (c, a, b, a by profile family).
    Damping,
    /// Varies the amplitude of H (c or a by profile family).
    Forcing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seeds: Vec<SeedSpec>,
    pub lambda: TimeProfile,
    pub h: TimeProfile,
    pub fold: usize,
    #[serde(default)]
    pub mode: Mode,
    pub grid: GridSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub fd_steps: FdSteps,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

impl RunConfig {
    pub fn load(path: &std::path::Path) -> anyhow::Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
        let config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    /// All module-level preconditions, with field-path error messages.
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.fold > MAX_FOLD {
            anyhow::bail!("fold: {} exceeds the maximum of {MAX_FOLD}", self.fold);
        }
        if self.fold != self.seeds.len() {
            anyhow::bail!(
                "fold: {} does not match seeds length {}",
                self.fold,
                self.seeds.len()
            );
        }
        for (i, s) in self.seeds.iter().enumerate() {
            s.validate().map_err(|e| anyhow::anyhow!("seeds[{i}]: {e}"))?;
            for (j, s2) in self.seeds.iter().enumerate().take(i) {
                if s.k == s2.k {
                    anyhow::bail!("seeds[{i}].k: duplicates seeds[{j}].k = {}", s2.k);
                }
            }
        }
        self.grid.validate().map_err(|e| anyhow::anyhow!("grid: {e}"))?;
        self.coeffs()
            .check_t_range(self.grid.t0, self.grid.t1)
            .map_err(|e| anyhow::anyhow!("lambda: {e}"))?;
        Ok(())
    }

    pub fn coeffs(&self) -> Coefficients {
        Coefficients::new(self.lambda, self.h)
    }

    pub fn solution(&self) -> anyhow::Result<TransformedSolution> {
        TransformedSolution::new(
            TrivialBackground::new(self.coeffs()),
            self.seeds.clone(),
            self.mode,
        )
        .map_err(|e| anyhow::anyhow!("seeds: {e}"))
    }

    /// The sweep axis parameter rewritten to `value`.
    pub fn with_sweep_value(&self, axis: SweepAxis, value: f64) -> RunConfig {
        let mut out = self.clone();
        let target = match axis {
            SweepAxis::Damping => &mut out.lambda,
            SweepAxis::Forcing => &mut out.h,
        };
        *target = match (*target, axis) {
            (TimeProfile::Constant { .. }, _) => TimeProfile::Constant { c: value },
            (TimeProfile::Linear { b, .. }, _) => TimeProfile::Linear { a: value, b },
            (TimeProfile::Exponential { a, .. }, SweepAxis::Damping) => {
                TimeProfile::Exponential { a, b: value }
            }
            (TimeProfile::Exponential { b, .. }, SweepAxis::Forcing) => {
                TimeProfile::Exponential { a: value, b }
            }
            (TimeProfile::SinusoidalOffset { omega, phi, d, .. }, _) => {
                TimeProfile::SinusoidalOffset { a: value, omega, phi, d }
            }
        };
        out
    }
}
