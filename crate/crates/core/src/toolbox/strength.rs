//! Strength labels offered by each tool and the single table mapping them to
//! numeric parameters.

use serde::{Deserialize, Serialize};

use crate::Vec3;

/// Outlier removal and downsampling aggressiveness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggressiveness {
    Weak,
    Medium,
    Strong,
}

/// Sponge thickness and spray radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EraserSize {
    Small,
    Medium,
    Big,
}

/// Spray cone height.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SprayDepth {
    Shallow,
    Medium,
    Deep,
}

impl Aggressiveness {
    pub const ALL: [Aggressiveness; 3] = [Self::Weak, Self::Medium, Self::Strong];

    fn slot(self) -> usize {
        self as usize
    }
}

impl EraserSize {
    pub const ALL: [EraserSize; 3] = [Self::Small, Self::Medium, Self::Big];

    fn slot(self) -> usize {
        self as usize
    }
}

impl SprayDepth {
    pub const ALL: [SprayDepth; 3] = [Self::Shallow, Self::Medium, Self::Deep];

    fn slot(self) -> usize {
        self as usize
    }
}

/// Numeric value behind every strength label, in meters unless noted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrengthTable {
    /// Neighbors per point for outlier statistics.
    pub outlier_neighbors: usize,
    /// Standard-deviation multiplier (unitless), weak/medium/strong.
    pub outlier_std_ratio: [f64; 3],
    pub voxel_size: [f64; 3],
    /// Sponge half extents (width, height, thickness), small/medium/big.
    pub sponge_half_extents: [[f64; 3]; 3],
    pub spray_radius: [f64; 3],
    pub spray_depth: [f64; 3],
}

impl Default for StrengthTable {
    fn default() -> Self {
        Self {
            outlier_neighbors: 20,
            outlier_std_ratio: [3.0, 2.0, 1.0],
            voxel_size: [0.01, 0.02, 0.04],
            sponge_half_extents: [[0.05, 0.035, 0.01], [0.10, 0.07, 0.02], [0.15, 0.105, 0.04]],
            spray_radius: [0.05, 0.10, 0.20],
            spray_depth: [0.5, 1.0, 2.0],
        }
    }
}

impl StrengthTable {
    pub fn outlier_std_ratio(&self, s: Aggressiveness) -> f64 {
        self.outlier_std_ratio[s.slot()]
    }

    pub fn voxel_size(&self, s: Aggressiveness) -> f64 {
        self.voxel_size[s.slot()]
    }

    pub fn sponge_half_extents(&self, s: EraserSize) -> Vec3 {
        Vec3::from(self.sponge_half_extents[s.slot()])
    }

    pub fn spray_radius(&self, s: EraserSize) -> f64 {
        self.spray_radius[s.slot()]
    }

    pub fn spray_depth(&self, d: SprayDepth) -> f64 {
        self.spray_depth[d.slot()]
    }
}
