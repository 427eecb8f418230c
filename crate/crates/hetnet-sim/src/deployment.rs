//! Network geometry: Poisson-dropped MBSs and UEs, hexagonal UABS
//! placement, and the destruction step that models a partial macro
//! network outage.

use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Rectangular simulation region anchored at the origin, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub width: f64,
    pub height: f64,
}

impl Region {
    pub fn new(width: f64, height: f64) -> Result<Self> {
        if width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite() {
            Ok(Region { width, height })
        } else {
            Err(Error::InvalidParameter(format!(
                "region dimensions must be positive and finite, got {width} x {height}"
            )))
        }
    }

    pub fn area_m2(&self) -> f64 {
        self.width * self.height
    }

    pub fn area_km2(&self) -> f64 {
        self.area_m2() / 1e6
    }

    /// Containment is inclusive: boundary points belong to the region.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        (0.0..=self.width).contains(&x) && (0.0..=self.height).contains(&y)
    }
}

/// Planar position of an MBS or a UE, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundPoint {
    pub x: f64,
    pub y: f64,
}

/// UABS position. Every UABS in a layout flies at the same altitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UabsPosition {
    pub x: f64,
    pub y: f64,
    pub altitude: f64,
}

/// Positions of every station and UE for one drop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkLayout {
    pub region: Region,
    pub mbs: Vec<GroundPoint>,
    pub uabs: Vec<UabsPosition>,
    pub ue: Vec<GroundPoint>,
    /// MBS antenna height in meters; 0 keeps MBS-to-UE distances planar.
    #[serde(default)]
    pub mbs_height: f64,
}

impl NetworkLayout {
    /// Builds a layout, enforcing containment, at least one UE, and a
    /// single positive altitude shared by all UABSs.
    pub fn new(
        region: Region,
        mbs: Vec<GroundPoint>,
        uabs: Vec<UabsPosition>,
        ue: Vec<GroundPoint>,
    ) -> Result<Self> {
        let layout = NetworkLayout {
            region,
            mbs,
            uabs,
            ue,
            mbs_height: 0.0,
        };
        layout.validate()?;
        Ok(layout)
    }

    pub fn with_mbs_height(mut self, height: f64) -> Result<Self> {
        if !(height >= 0.0 && height.is_finite()) {
            return Err(Error::InvalidLayout(format!(
                "MBS height must be non-negative and finite, got {height}"
            )));
        }
        self.mbs_height = height;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.ue.is_empty() {
            return Err(Error::InvalidLayout("layout has no UEs".into()));
        }
        for (label, pts) in [("MBS", &self.mbs), ("UE", &self.ue)] {
            if let Some(p) = pts.iter().find(|p| !self.region.contains(p.x, p.y)) {
                return Err(Error::InvalidLayout(format!(
                    "{label} at ({}, {}) lies outside the region",
                    p.x, p.y
                )));
            }
        }
        if let Some(u) = self.uabs.iter().find(|u| !self.region.contains(u.x, u.y)) {
            return Err(Error::InvalidLayout(format!(
                "UABS at ({}, {}) lies outside the region",
                u.x, u.y
            )));
        }
        if let Some(first) = self.uabs.first() {
            if !(first.altitude > 0.0 && first.altitude.is_finite()) {
                return Err(Error::InvalidLayout(format!(
                    "UABS altitude must be positive and finite, got {}",
                    first.altitude
                )));
            }
            if let Some(u) = self.uabs.iter().find(|u| u.altitude != first.altitude) {
                return Err(Error::InvalidLayout(format!(
                    "UABS altitudes differ: {} vs {}",
                    first.altitude, u.altitude
                )));
            }
        }
        Ok(())
    }

    /// Writes the layout as pretty-printed JSON.
    pub fn write_snapshot(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), self)
            .map_err(|e| Error::format(path, e.to_string()))
    }

    pub fn read_snapshot(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let layout: NetworkLayout = serde_json::from_reader(std::io::BufReader::new(file))
            .map_err(|e| Error::format(path, e.to_string()))?;
        layout.validate()?;
        Ok(layout)
    }
}

/// Samples a homogeneous Poisson point process over the region.
///
/// The point count is Poisson with mean `intensity_per_km2 * area`;
/// positions are independent and uniform. Zero intensity yields an
/// empty list.
pub fn sample_ppp<R: Rng + ?Sized>(
    intensity_per_km2: f64,
    region: Region,
    rng: &mut R,
) -> Vec<GroundPoint> {
    assert!(
        intensity_per_km2 >= 0.0 && intensity_per_km2.is_finite(),
        "PPP intensity must be non-negative and finite"
    );
    let expected = intensity_per_km2 * region.area_km2();
    if expected == 0.0 {
        return Vec::new();
    }
    let count = Poisson::new(expected).expect("positive Poisson mean").sample(rng) as usize;
    (0..count)
        .map(|_| GroundPoint {
            x: rng.random_range(0.0..=region.width),
            y: rng.random_range(0.0..=region.height),
        })
        .collect()
}

/// Axial-coordinate steps around a hexagonal ring.
const HEX_DIRS: [(i64, i64); 6] = [(1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1)];

/// Places `n` UABSs on a hexagonal lattice centered in the region.
///
/// Nodes are enumerated inside out (center, then ring by ring) and the
/// first `n` are kept, so small counts stay clustered at the center.
/// The lattice pitch matches the density `n / area` but shrinks if
/// needed so every ring fits inside the region.
pub fn place_hex_grid(n: usize, region: Region, altitude: f64) -> Result<Vec<UabsPosition>> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "hex grid needs at least one node".into(),
        ));
    }
    if !(altitude > 0.0 && altitude.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "UABS altitude must be positive and finite, got {altitude}"
        )));
    }

    // Smallest ring count R with 1 + 3R(R+1) >= n.
    let mut rings = 0u64;
    while 1 + 3 * rings * (rings + 1) < n as u64 {
        rings += 1;
    }

    let density_pitch = (2.0 * region.area_m2() / (3f64.sqrt() * n as f64)).sqrt();
    let pitch = if rings == 0 {
        density_pitch
    } else {
        // Ring k reaches k * pitch from the center, so this bound keeps
        // every node inside the region.
        density_pitch.min(region.width.min(region.height) / (2.0 * rings as f64))
    };

    let cx = region.width / 2.0;
    let cy = region.height / 2.0;
    let place = |q: i64, r: i64| UabsPosition {
        x: cx + pitch * (q as f64 + r as f64 / 2.0),
        y: cy + pitch * (3f64.sqrt() / 2.0) * r as f64,
        altitude,
    };

    let mut nodes = Vec::with_capacity(n);
    nodes.push(place(0, 0));
    'outer: for k in 1..=rings as i64 {
        let (mut q, mut r) = (-k, k);
        for (dq, dr) in HEX_DIRS {
            for _ in 0..k {
                if nodes.len() == n {
                    break 'outer;
                }
                nodes.push(place(q, r));
                q += dq;
                r += dr;
            }
        }
    }
    Ok(nodes)
}

/// Removes a random fraction of MBSs, rounding half up, and returns the
/// layout of survivors in their original order.
pub fn destroy_mbs<R: Rng + ?Sized>(
    layout: &NetworkLayout,
    fraction: f64,
    rng: &mut R,
) -> NetworkLayout {
    assert!(
        (0.0..=1.0).contains(&fraction),
        "destroyed fraction must lie in [0, 1]"
    );
    let n = layout.mbs.len();
    let n_destroy = ((fraction * n as f64 + 0.5).floor() as usize).min(n);
    let mut result = layout.clone();
    if n_destroy == 0 {
        return result;
    }
    let mut keep = vec![true; n];
    for idx in rand::seq::index::sample(rng, n, n_destroy) {
        keep[idx] = false;
    }
    result.mbs = layout
        .mbs
        .iter()
        .zip(&keep)
        .filter_map(|(p, &k)| k.then_some(*p))
        .collect();
    result
}
