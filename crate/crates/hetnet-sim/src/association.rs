//! Biased cell selection, USF/CSF scheduling, per-UE spectral
//! efficiency, and the network-wide 5th-percentile score.

use serde::{Deserialize, Serialize};

use crate::deployment::{NetworkLayout, UabsPosition};
use crate::radio::{BaseScene, PowerModel, SirBundle, SubframeClass, UeLink};
use crate::units::db_to_linear;
use crate::{Error, Result};

/// Interference coordination flavor.
///
/// The flavor never changes the arithmetic; it only constrains the power
/// factor `alpha` (1 without coordination, 0 for fully blanked
/// subframes) and labels output records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IcicMode {
    #[serde(rename = "none")]
    NoIcic,
    Eicic,
    Feicic,
}

impl IcicMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            IcicMode::NoIcic => "none",
            IcicMode::Eicic => "eicic",
            IcicMode::Feicic => "feicic",
        }
    }
}

impl std::fmt::Display for IcicMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for IcicMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(IcicMode::NoIcic),
            "eicic" => Ok(IcicMode::Eicic),
            "feicic" => Ok(IcicMode::Feicic),
            other => Err(Error::InvalidParameter(format!(
                "unknown ICIC mode {other:?}, expected none, eicic, or feicic"
            ))),
        }
    }
}

/// Operating ranges for the coordination parameters; shared by config
/// validation, the parameter grid, and the genetic optimizer.
pub const TAU_DB_RANGE: (f64, f64) = (0.0, 15.0);
pub const RHO_DB_RANGE: (f64, f64) = (20.0, 40.0);
pub const RHO_PRIME_DB_RANGE: (f64, f64) = (-20.0, -10.0);

/// One coordination configuration, stored in linear units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcicConfig {
    pub mode: IcicMode,
    /// MBS power factor in coordinated subframes.
    pub alpha: f64,
    /// USF duty cycle of the frame.
    pub beta: f64,
    /// Range-expansion bias applied to the aerial tier.
    pub tau: f64,
    /// Macro scheduling threshold: UEs above it move to the CSF.
    pub rho: f64,
    /// Aerial scheduling threshold: UEs at or below it move to the CSF.
    pub rho_prime: f64,
}

impl IcicConfig {
    pub fn new(
        mode: IcicMode,
        alpha: f64,
        beta: f64,
        tau_db: f64,
        rho_db: f64,
        rho_prime_db: f64,
    ) -> Result<Self> {
        let range_check = |name: &str, v: f64, (lo, hi): (f64, f64)| {
            if (lo..=hi).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{name} must lie in [{lo}, {hi}] dB, got {v}"
                )))
            }
        };
        range_check("tau", tau_db, TAU_DB_RANGE)?;
        range_check("rho", rho_db, RHO_DB_RANGE)?;
        range_check("rho_prime", rho_prime_db, RHO_PRIME_DB_RANGE)?;
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in [0, 1], got {alpha}"
            )));
        }
        match mode {
            IcicMode::Eicic if alpha != 0.0 => {
                return Err(Error::InvalidParameter(format!(
                    "eicic blanks coordinated subframes entirely, so alpha must be 0, got {alpha}"
                )));
            }
            IcicMode::NoIcic if alpha != 1.0 => {
                return Err(Error::InvalidParameter(format!(
                    "without coordination alpha must be 1, got {alpha}"
                )));
            }
            _ => {}
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "beta must lie strictly between 0 and 1, got {beta}"
            )));
        }
        Ok(IcicConfig {
            mode,
            alpha,
            beta,
            tau: db_to_linear(tau_db),
            rho: db_to_linear(rho_db),
            rho_prime: db_to_linear(rho_prime_db),
        })
    }

    pub fn no_icic(beta: f64, tau_db: f64, rho_db: f64, rho_prime_db: f64) -> Result<Self> {
        IcicConfig::new(IcicMode::NoIcic, 1.0, beta, tau_db, rho_db, rho_prime_db)
    }

    pub fn eicic(beta: f64, tau_db: f64, rho_db: f64, rho_prime_db: f64) -> Result<Self> {
        IcicConfig::new(IcicMode::Eicic, 0.0, beta, tau_db, rho_db, rho_prime_db)
    }

    pub fn feicic(alpha: f64, beta: f64, tau_db: f64, rho_db: f64, rho_prime_db: f64) -> Result<Self> {
        IcicConfig::new(IcicMode::Feicic, alpha, beta, tau_db, rho_db, rho_prime_db)
    }
}

/// Serving tier of a UE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tier {
    Mbs,
    Uabs,
}

/// Outcome of cell selection and scheduling for one UE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UeAssignment {
    pub ue: usize,
    pub tier: Tier,
    /// Index of the serving cell within its tier.
    pub cell: usize,
    pub class: SubframeClass,
    /// SIR the UE sees in its scheduled subframe class.
    pub sir: f64,
}

/// Selects the serving tier by range-expansion bias, then the subframe
/// class by the tier's scheduling threshold.
///
/// The macro tier wins only strictly: a UE whose macro SIR equals the
/// biased aerial SIR goes to the aerial tier.
pub fn assign_ue(bundle: &SirBundle, icic: &IcicConfig, ue: usize) -> UeAssignment {
    if bundle.gamma_usf_moi > icic.tau * bundle.gamma_usf_uoi {
        let cell = bundle
            .moi
            .expect("macro tier cannot win selection without an MBS");
        if bundle.gamma_usf_moi <= icic.rho {
            UeAssignment {
                ue,
                tier: Tier::Mbs,
                cell,
                class: SubframeClass::Usf,
                sir: bundle.gamma_usf_moi,
            }
        } else {
            UeAssignment {
                ue,
                tier: Tier::Mbs,
                cell,
                class: SubframeClass::Csf,
                sir: bundle.gamma_csf_moi,
            }
        }
    } else {
        let cell = bundle
            .uoi
            .expect("aerial tier cannot win selection without a UABS");
        if bundle.gamma_usf_uoi > icic.rho_prime {
            UeAssignment {
                ue,
                tier: Tier::Uabs,
                cell,
                class: SubframeClass::Usf,
                sir: bundle.gamma_usf_uoi,
            }
        } else {
            UeAssignment {
                ue,
                tier: Tier::Uabs,
                cell,
                class: SubframeClass::Csf,
                sir: bundle.gamma_csf_uoi,
            }
        }
    }
}

/// Scheduled-UE counts per cell and subframe class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleCounts {
    pub usf_mbs: Vec<u32>,
    pub csf_mbs: Vec<u32>,
    pub usf_uabs: Vec<u32>,
    pub csf_uabs: Vec<u32>,
}

/// Network-wide totals of the four scheduling classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassTotals {
    pub usf_mue: u32,
    pub csf_mue: u32,
    pub usf_uue: u32,
    pub csf_uue: u32,
}

impl ClassTotals {
    pub fn sum(&self) -> u32 {
        self.usf_mue + self.csf_mue + self.usf_uue + self.csf_uue
    }
}

impl ScheduleCounts {
    pub fn tally(assignments: &[UeAssignment], n_mbs: usize, n_uabs: usize) -> Self {
        let mut counts = ScheduleCounts {
            usf_mbs: vec![0; n_mbs],
            csf_mbs: vec![0; n_mbs],
            usf_uabs: vec![0; n_uabs],
            csf_uabs: vec![0; n_uabs],
        };
        for a in assignments {
            let slot = match (a.tier, a.class) {
                (Tier::Mbs, SubframeClass::Usf) => &mut counts.usf_mbs[a.cell],
                (Tier::Mbs, SubframeClass::Csf) => &mut counts.csf_mbs[a.cell],
                (Tier::Uabs, SubframeClass::Usf) => &mut counts.usf_uabs[a.cell],
                (Tier::Uabs, SubframeClass::Csf) => &mut counts.csf_uabs[a.cell],
            };
            *slot += 1;
        }
        counts
    }

    pub fn totals(&self) -> ClassTotals {
        ClassTotals {
            usf_mue: self.usf_mbs.iter().sum(),
            csf_mue: self.csf_mbs.iter().sum(),
            usf_uue: self.usf_uabs.iter().sum(),
            csf_uue: self.csf_uabs.iter().sum(),
        }
    }
}

/// Spectral efficiency of one UE given its cell's scheduling load.
///
/// Macro UEs split the frame by the USF duty cycle `beta`; aerial UEs
/// share their subframe class round-robin within the serving UABS.
/// The UE must be included in `counts`, so its own class count is
/// at least 1.
pub fn ue_spectral_efficiency(a: &UeAssignment, counts: &ScheduleCounts, icic: &IcicConfig) -> f64 {
    let rate = (1.0 + a.sir).log2();
    match (a.tier, a.class) {
        (Tier::Mbs, SubframeClass::Usf) => {
            let n = counts.usf_mbs[a.cell];
            assert!(n >= 1, "scheduled UE missing from its cell's USF count");
            icic.beta * rate / n as f64
        }
        (Tier::Mbs, SubframeClass::Csf) => {
            let n = counts.csf_mbs[a.cell];
            assert!(n >= 1, "scheduled UE missing from its cell's CSF count");
            (1.0 - icic.beta) * rate / n as f64
        }
        (Tier::Uabs, SubframeClass::Usf) => {
            let n = counts.usf_uabs[a.cell];
            assert!(n >= 1, "scheduled UE missing from its cell's USF count");
            rate / n as f64
        }
        (Tier::Uabs, SubframeClass::Csf) => {
            let n = counts.csf_uabs[a.cell];
            assert!(n >= 1, "scheduled UE missing from its cell's CSF count");
            rate / n as f64
        }
    }
}

/// Nearest-rank percentile: the k-th smallest value with
/// k = ceil(len * numer / denom), clamped to at least 1.
fn nearest_rank(values: &[f64], numer: usize, denom: usize) -> f64 {
    let rank = (values.len() * numer).div_ceil(denom).max(1);
    let mut v = values.to_vec();
    let (_, kth, _) = v.select_nth_unstable_by(rank - 1, f64::total_cmp);
    *kth
}

/// The 5th-percentile spectral efficiency over all UEs (nearest rank).
pub fn fifth_percentile_se(se_values: &[f64]) -> Result<f64> {
    if se_values.is_empty() {
        return Err(Error::EmptyInput("spectral-efficiency list"));
    }
    Ok(nearest_rank(se_values, 1, 20))
}

/// Full outcome of evaluating one coordination configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalOutcome {
    pub se_5pct: f64,
    pub se_per_ue: Vec<f64>,
    pub assignments: Vec<UeAssignment>,
    pub counts: ScheduleCounts,
}

/// Precomputed link budgets for one layout, ready to score many
/// coordination configurations cheaply.
#[derive(Debug, Clone)]
pub struct NetworkEvaluator {
    links: Vec<UeLink>,
    n_mbs: usize,
    n_uabs: usize,
    sir_cap: f64,
}

impl NetworkEvaluator {
    pub fn new(layout: &NetworkLayout, pm: &PowerModel) -> Result<Self> {
        let scene = BaseScene::new(layout, pm)?;
        NetworkEvaluator::from_scene(&scene, &layout.uabs)
    }

    /// Builds an evaluator from a precomputed macro side plus one UABS
    /// placement. This is the only construction path, so hex-grid and
    /// optimizer evaluations of identical geometry match bit for bit.
    pub fn from_scene(scene: &BaseScene, uabs: &[UabsPosition]) -> Result<Self> {
        Ok(NetworkEvaluator {
            links: scene.with_uabs(uabs)?,
            n_mbs: scene.n_mbs(),
            n_uabs: uabs.len(),
            sir_cap: scene.power_model().sir_cap,
        })
    }

    pub fn n_ue(&self) -> usize {
        self.links.len()
    }

    /// Scores one coordination configuration.
    pub fn evaluate(&self, icic: &IcicConfig) -> Result<EvalOutcome> {
        let assignments: Vec<UeAssignment> = self
            .links
            .iter()
            .enumerate()
            .map(|(i, link)| assign_ue(&link.sir_bundle(icic.alpha, self.sir_cap), icic, i))
            .collect();
        let counts = ScheduleCounts::tally(&assignments, self.n_mbs, self.n_uabs);
        let se_per_ue: Vec<f64> = assignments
            .iter()
            .map(|a| ue_spectral_efficiency(a, &counts, icic))
            .collect();
        let se_5pct = fifth_percentile_se(&se_per_ue)?;
        Ok(EvalOutcome {
            se_5pct,
            se_per_ue,
            assignments,
            counts,
        })
    }
}

/// One-shot evaluation of a layout under one configuration.
pub fn evaluate_network(
    layout: &NetworkLayout,
    icic: &IcicConfig,
    pm: &PowerModel,
) -> Result<EvalOutcome> {
    NetworkEvaluator::new(layout, pm)?.evaluate(icic)
}
