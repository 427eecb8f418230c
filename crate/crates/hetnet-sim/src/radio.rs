//! Received powers, interference sums, and the four USF/CSF SIR values
//! each UE sees from its nearest macro and aerial cells.
//!
//! The macro-tier and aerial-tier interference sums are kept separate so
//! a reduced-power subframe scales the macro side in O(1) and so a fixed
//! macro layer can be reused across many candidate UABS placements.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::deployment::{GroundPoint, NetworkLayout, Region, UabsPosition};
use crate::units::dbm_to_watts;
use crate::{Error, Result};

/// SIR reported when an interference denominator is exactly zero.
pub const DEFAULT_SIR_CAP: f64 = 1e9;

/// Subframe classes of the time-domain ICIC frame split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubframeClass {
    /// Uncoordinated subframe: every cell transmits at full power.
    Usf,
    /// Coordinated subframe: MBSs blank or reduce power by the ICIC factor.
    Csf,
}

/// Transmit powers (watts), antenna gain factors, and path-loss exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerModel {
    pub p_mbs: f64,
    pub p_uabs: f64,
    pub k_mbs: f64,
    pub k_uabs: f64,
    pub delta: f64,
    /// Substituted for a ratio whose denominator is exactly zero.
    pub sir_cap: f64,
}

impl PowerModel {
    pub fn new(p_mbs: f64, p_uabs: f64, k_mbs: f64, k_uabs: f64, delta: f64) -> Result<Self> {
        let pm = PowerModel {
            p_mbs,
            p_uabs,
            k_mbs,
            k_uabs,
            delta,
            sir_cap: DEFAULT_SIR_CAP,
        };
        pm.validate()?;
        Ok(pm)
    }

    pub fn from_dbm(
        p_mbs_dbm: f64,
        p_uabs_dbm: f64,
        k_mbs: f64,
        k_uabs: f64,
        delta: f64,
    ) -> Result<Self> {
        PowerModel::new(
            dbm_to_watts(p_mbs_dbm),
            dbm_to_watts(p_uabs_dbm),
            k_mbs,
            k_uabs,
            delta,
        )
    }

    pub fn with_sir_cap(mut self, cap: f64) -> Result<Self> {
        if !(cap > 0.0 && cap.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "SIR cap must be positive and finite, got {cap}"
            )));
        }
        self.sir_cap = cap;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("MBS power", self.p_mbs), ("UABS power", self.p_uabs)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v} W"
                )));
            }
        }
        for (name, v) in [("MBS gain factor", self.k_mbs), ("UABS gain factor", self.k_uabs)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in (0, 1], got {v}"
                )));
            }
        }
        if !(self.delta >= 2.0 && self.delta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "path-loss exponent must be at least 2, got {}",
                self.delta
            )));
        }
        Ok(())
    }

    /// Effective MBS radiated power: gain factor times transmit power.
    pub fn effective_mbs(&self) -> f64 {
        self.k_mbs * self.p_mbs
    }

    pub fn effective_uabs(&self) -> f64 {
        self.k_uabs * self.p_uabs
    }
}

impl Default for PowerModel {
    /// 46 dBm macro, 30 dBm aerial, unit gain factors, exponent 4.
    fn default() -> Self {
        PowerModel::from_dbm(46.0, 30.0, 1.0, 1.0, 4.0).unwrap()
    }
}

/// Power received over distance `d`: effective power divided by d^delta.
pub fn received_power(effective_power: f64, distance: f64, delta: f64) -> Result<f64> {
    if distance == 0.0 {
        return Err(Error::DegenerateGeometry);
    }
    Ok(effective_power * path_gain(distance * distance, delta))
}

/// Path gain as a function of squared distance, with fast paths for the
/// common integer exponents.
#[inline]
fn path_gain(dist_sq: f64, delta: f64) -> f64 {
    if delta == 4.0 {
        1.0 / (dist_sq * dist_sq)
    } else if delta == 2.0 {
        1.0 / dist_sq
    } else {
        dist_sq.powf(-delta / 2.0)
    }
}

#[inline]
fn mbs_dist_sq(ue: &GroundPoint, m: &GroundPoint, mbs_height: f64) -> f64 {
    let dx = ue.x - m.x;
    let dy = ue.y - m.y;
    dx * dx + dy * dy + mbs_height * mbs_height
}

#[inline]
fn uabs_dist_sq(ue: &GroundPoint, u: &UabsPosition) -> f64 {
    let dx = ue.x - u.x;
    let dy = ue.y - u.y;
    dx * dx + dy * dy + u.altitude * u.altitude
}

/// Indices and distances (meters) of the serving candidates of each tier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearestCells {
    /// Nearest MBS, the macrocell of interest.
    pub moi: Option<(usize, f64)>,
    /// Nearest UABS, the aerial cell of interest.
    pub uoi: Option<(usize, f64)>,
}

/// Finds the nearest MBS and nearest UABS; ties go to the lower index.
pub fn nearest_cells(ue: &GroundPoint, layout: &NetworkLayout) -> Result<NearestCells> {
    let moi = argmin(layout.mbs.iter().map(|m| mbs_dist_sq(ue, m, layout.mbs_height)));
    let uoi = argmin(layout.uabs.iter().map(|u| uabs_dist_sq(ue, u)));
    if moi.is_none() && uoi.is_none() {
        return Err(Error::NoServingCandidates);
    }
    if let Some((_, d2)) = moi {
        if d2 == 0.0 {
            return Err(Error::DegenerateGeometry);
        }
    }
    // UABS altitude is positive, so aerial distances are never zero.
    Ok(NearestCells {
        moi: moi.map(|(i, d2)| (i, d2.sqrt())),
        uoi: uoi.map(|(i, d2)| (i, d2.sqrt())),
    })
}

fn argmin(dists: impl Iterator<Item = f64>) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, d) in dists.enumerate() {
        match best {
            Some((_, bd)) if d >= bd => {}
            _ => best = Some((i, d)),
        }
    }
    best
}

/// Aggregate interference at `ue` from every cell except the excluded
/// serving candidates. In a CSF, macro-tier terms are scaled by `alpha`.
///
/// Positions must be distinct from the UE; the serving candidates are the
/// only cells that can coincide with it, and they are excluded.
pub fn interference_sum(
    ue: &GroundPoint,
    layout: &NetworkLayout,
    pm: &PowerModel,
    class: SubframeClass,
    alpha: f64,
    exclude_moi: Option<usize>,
    exclude_uoi: Option<usize>,
) -> f64 {
    let (z_mbs, z_uabs) = split_interference(ue, layout, pm, exclude_moi, exclude_uoi);
    match class {
        SubframeClass::Usf => z_mbs + z_uabs,
        SubframeClass::Csf => alpha * z_mbs + z_uabs,
    }
}

fn split_interference(
    ue: &GroundPoint,
    layout: &NetworkLayout,
    pm: &PowerModel,
    exclude_moi: Option<usize>,
    exclude_uoi: Option<usize>,
) -> (f64, f64) {
    let pe_mbs = pm.effective_mbs();
    let mut z_mbs = 0.0;
    for (i, m) in layout.mbs.iter().enumerate() {
        if Some(i) == exclude_moi {
            continue;
        }
        z_mbs += pe_mbs * path_gain(mbs_dist_sq(ue, m, layout.mbs_height), pm.delta);
    }
    let pe_uabs = pm.effective_uabs();
    let mut z_uabs = 0.0;
    for (i, u) in layout.uabs.iter().enumerate() {
        if Some(i) == exclude_uoi {
            continue;
        }
        z_uabs += pe_uabs * path_gain(uabs_dist_sq(ue, u), pm.delta);
    }
    (z_mbs, z_uabs)
}

/// The four downlink SIR values of one UE plus its serving candidates.
///
/// `gamma_usf_moi` and `gamma_csf_moi` are the SIRs toward the nearest
/// MBS in uncoordinated and coordinated subframes; the `uoi` pair is the
/// same toward the nearest UABS. Interference always excludes both
/// serving candidates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SirBundle {
    pub gamma_usf_moi: f64,
    pub gamma_csf_moi: f64,
    pub gamma_usf_uoi: f64,
    pub gamma_csf_uoi: f64,
    pub moi: Option<usize>,
    pub uoi: Option<usize>,
}

/// Zero-denominator rule: a positive signal over zero interference
/// saturates at the cap; zero over zero is zero.
#[inline]
fn ratio(num: f64, den: f64, cap: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num > 0.0 {
        cap
    } else {
        0.0
    }
}

/// Per-UE link budget against a fixed layout, split by tier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UeLink {
    pub moi: Option<usize>,
    pub uoi: Option<usize>,
    /// Received power from the nearest MBS (0 without MBSs).
    pub s_mbs: f64,
    /// Received power from the nearest UABS (0 without UABSs).
    pub s_uabs: f64,
    /// Macro-tier interference, excluding the nearest MBS.
    pub z_mbs: f64,
    /// Aerial-tier interference, excluding the nearest UABS.
    pub z_uabs: f64,
}

impl UeLink {
    pub fn compute(ue: &GroundPoint, layout: &NetworkLayout, pm: &PowerModel) -> Result<UeLink> {
        let near = nearest_cells(ue, layout)?;
        let (moi, s_mbs, z_mbs) = tier_link(
            layout.mbs.iter().map(|m| mbs_dist_sq(ue, m, layout.mbs_height)),
            pm.effective_mbs(),
            pm.delta,
        );
        let (uoi, s_uabs, z_uabs) = tier_link(
            layout.uabs.iter().map(|u| uabs_dist_sq(ue, u)),
            pm.effective_uabs(),
            pm.delta,
        );
        debug_assert_eq!(moi, near.moi.map(|(i, _)| i));
        debug_assert_eq!(uoi, near.uoi.map(|(i, _)| i));
        Ok(UeLink {
            moi,
            uoi,
            s_mbs,
            s_uabs,
            z_mbs,
            z_uabs,
        })
    }

    /// Applies an ICIC power factor to produce the four SIR values.
    pub fn sir_bundle(&self, alpha: f64, cap: f64) -> SirBundle {
        let z_usf = self.z_mbs + self.z_uabs;
        let z_csf = alpha * self.z_mbs + self.z_uabs;
        SirBundle {
            gamma_usf_moi: ratio(self.s_mbs, self.s_uabs + z_usf, cap),
            gamma_csf_moi: ratio(alpha * self.s_mbs, self.s_uabs + z_csf, cap),
            gamma_usf_uoi: ratio(self.s_uabs, self.s_mbs + z_usf, cap),
            gamma_csf_uoi: ratio(self.s_uabs, alpha * self.s_mbs + z_csf, cap),
            moi: self.moi,
            uoi: self.uoi,
        }
    }
}

/// Signal and interference for one tier: two passes so the interference
/// sum never suffers cancellation from subtracting the serving term.
fn tier_link(
    dists_sq: impl Iterator<Item = f64> + Clone,
    effective_power: f64,
    delta: f64,
) -> (Option<usize>, f64, f64) {
    let best = argmin(dists_sq.clone());
    match best {
        None => (None, 0.0, 0.0),
        Some((idx, d2)) => {
            let s = effective_power * path_gain(d2, delta);
            let mut z = 0.0;
            for (i, d2) in dists_sq.enumerate() {
                if i != idx {
                    z += effective_power * path_gain(d2, delta);
                }
            }
            (Some(idx), s, z)
        }
    }
}

/// Computes the SIR bundle of one UE directly from a layout.
pub fn compute_sir_bundle(
    ue: &GroundPoint,
    layout: &NetworkLayout,
    pm: &PowerModel,
    alpha: f64,
) -> Result<SirBundle> {
    UeLink::compute(ue, layout, pm).map(|l| l.sir_bundle(alpha, pm.sir_cap))
}

/// Macro-side link budget for a fixed macro layer and UE drop, reusable
/// across candidate UABS placements.
#[derive(Debug, Clone)]
pub struct BaseScene {
    ue: Vec<GroundPoint>,
    /// Per-UE (nearest MBS, signal, macro interference).
    mbs_links: Vec<(Option<usize>, f64, f64)>,
    n_mbs: usize,
    pm: PowerModel,
    region: Region,
}

impl BaseScene {
    /// Precomputes the macro side. The layout's UABS list is ignored;
    /// candidates are supplied later via [`BaseScene::with_uabs`].
    pub fn new(layout: &NetworkLayout, pm: &PowerModel) -> Result<Self> {
        let mbs_links = layout
            .ue
            .par_iter()
            .with_min_len(64)
            .map(|ue| {
                let (moi, s, z) = tier_link(
                    layout.mbs.iter().map(|m| mbs_dist_sq(ue, m, layout.mbs_height)),
                    pm.effective_mbs(),
                    pm.delta,
                );
                if !s.is_finite() {
                    return Err(Error::DegenerateGeometry);
                }
                Ok((moi, s, z))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BaseScene {
            ue: layout.ue.clone(),
            mbs_links,
            n_mbs: layout.mbs.len(),
            pm: *pm,
            region: layout.region,
        })
    }

    pub fn n_mbs(&self) -> usize {
        self.n_mbs
    }

    pub fn n_ue(&self) -> usize {
        self.ue.len()
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn power_model(&self) -> &PowerModel {
        &self.pm
    }

    /// Completes the per-UE link budgets for one UABS placement.
    pub fn with_uabs(&self, uabs: &[UabsPosition]) -> Result<Vec<UeLink>> {
        if self.n_mbs == 0 && uabs.is_empty() {
            return Err(Error::NoServingCandidates);
        }
        debug_assert!(uabs.iter().all(|u| u.altitude > 0.0));
        Ok(self
            .ue
            .par_iter()
            .zip(&self.mbs_links)
            .with_min_len(64)
            .map(|(ue, &(moi, s_mbs, z_mbs))| {
                let (uoi, s_uabs, z_uabs) = tier_link(
                    uabs.iter().map(|u| uabs_dist_sq(ue, u)),
                    self.pm.effective_uabs(),
                    self.pm.delta,
                );
                UeLink {
                    moi,
                    uoi,
                    s_mbs,
                    s_uabs,
                    z_mbs,
                    z_uabs,
                }
            })
            .collect())
    }
}
