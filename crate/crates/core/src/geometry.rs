//! Tank geometry and the layered discretization of the depth axis.
//!
//! The `z` axis points downward with its origin at the feed level: the
//! effluent weir sits at `z = -H` and the underflow outlet at `z = B`.
//! Above the feed the tank is rectangular, the bottom part (`b <= z <= B`)
//! is a truncated cone and the middle part blends linearly between the two
//! cross-sections.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TankConfig {
    /// Depth of the effluent level above the feed, `H` [m].
    pub height_above_feed: f64,
    /// Depth of the underflow outlet below the feed, `B` [m].
    pub depth_below_feed: f64,
    /// Depth below the feed where the conical part begins, `b` [m].
    pub cone_start: f64,
    /// Radius of the bottom opening of the cone, `r` [m].
    pub bottom_radius: f64,
    /// Area of the rectangular upper part, `A0` [m²].
    pub top_area: f64,
    /// Number of interior computational layers.
    pub layers: usize,
}

impl Default for TankConfig {
    fn default() -> Self {
        TankConfig {
            height_above_feed: 1.25,
            depth_below_feed: 1.1,
            cone_start: 0.51,
            bottom_radius: 0.18,
            top_area: 1.0 * 1.2,
            layers: 100,
        }
    }
}

impl TankConfig {
    pub fn with_layers(mut self, layers: usize) -> Self {
        self.layers = layers;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("height_above_feed", self.height_above_feed),
            ("bottom_radius", self.bottom_radius),
            ("top_area", self.top_area),
            ("cone_start", self.cone_start),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid("tank", format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.cone_start < self.depth_below_feed) {
            return Err(Error::invalid(
                "tank",
                format!(
                    "cone_start ({}) must be smaller than depth_below_feed ({})",
                    self.cone_start, self.depth_below_feed
                ),
            ));
        }
        if self.layers < 3 {
            return Err(Error::invalid("tank", format!("layers must be at least 3, got {}", self.layers)));
        }
        Ok(())
    }

    fn cone_offset(&self) -> f64 {
        3f64.sqrt() * self.bottom_radius + self.depth_below_feed
    }

    /// Area of the cone formula at depth `z`.
    fn cone_area(&self, z: f64) -> f64 {
        let w = self.cone_offset() - z;
        PI / 3.0 * w * w
    }

    /// The area increment `Ã` of the transition part.
    fn transition_increment(&self) -> f64 {
        self.cone_area(self.cone_start) - self.top_area
    }

    /// Total tank volume between the effluent level and the outlet [m³].
    pub fn volume(&self) -> f64 {
        self.antiderivative(self.depth_below_feed)
    }

    /// Cross-sectional area at depth `z`, continued as constants outside
    /// `[-H, B]` for the effluent and underflow boundary layers.
    pub fn area_extended(&self, z: f64) -> f64 {
        let z = z.clamp(-self.height_above_feed, self.depth_below_feed);
        self.area_unchecked(z)
    }

    fn area_unchecked(&self, z: f64) -> f64 {
        if z < 0.0 {
            self.top_area
        } else if z < self.cone_start {
            self.top_area + z / self.cone_start * self.transition_increment()
        } else {
            self.cone_area(z)
        }
    }

    /// `∫_{-H}^{z} A`, extended linearly outside the tank.
    fn antiderivative(&self, z: f64) -> f64 {
        let h = self.height_above_feed;
        let big_b = self.depth_below_feed;
        let b = self.cone_start;
        if z < 0.0 {
            return self.top_area * (z + h);
        }
        let upper = self.top_area * h;
        if z < b {
            return upper + self.top_area * z + self.transition_increment() * z * z / (2.0 * b);
        }
        let middle = upper + self.top_area * b + self.transition_increment() * b / 2.0;
        let c = self.cone_offset();
        if z <= big_b {
            return middle + PI / 9.0 * ((c - b).powi(3) - (c - z).powi(3));
        }
        middle + PI / 9.0 * ((c - b).powi(3) - (c - big_b).powi(3)) + self.cone_area(big_b) * (z - big_b)
    }

    /// Exact mean of the (extended) area over `[z0, z1]`.
    pub fn mean_area(&self, z0: f64, z1: f64) -> f64 {
        (self.antiderivative(z1) - self.antiderivative(z0)) / (z1 - z0)
    }
}

/// Cross-sectional area `A(z)` for `-H <= z <= B`.
pub fn area(z: f64, cfg: &TankConfig) -> Result<f64> {
    if !(z >= -cfg.height_above_feed && z <= cfg.depth_below_feed) {
        return Err(Error::domain(format!(
            "depth {z} outside [{}, {}]",
            -cfg.height_above_feed, cfg.depth_below_feed
        )));
    }
    Ok(cfg.area_unchecked(z))
}

/// The layered discretization used by the solver.
///
/// Cells are numbered from the top: cell 0 is the effluent layer above the
/// tank, cells `1..=N` are inside, and cell `N + 1` is the underflow layer.
/// Face `j + 1/2` (for `j = -1..=N+1`) is stored at index `j + 1`.
#[derive(Debug, Clone)]
pub struct Grid {
    pub config: TankConfig,
    pub dz: f64,
    pub z_centers: Vec<f64>,
    pub area_cells: Vec<f64>,
    pub z_faces: Vec<f64>,
    pub area_faces: Vec<f64>,
    /// Index of the layer containing the feed inlet.
    pub feed_layer: usize,
}

impl Grid {
    pub fn layers(&self) -> usize {
        self.config.layers
    }

    /// Number of stored cells including both boundary layers.
    pub fn cells(&self) -> usize {
        self.config.layers + 2
    }

    /// Indicator of the tank interior for cell `j`.
    pub fn inside_cell(&self, j: usize) -> bool {
        j >= 1 && j <= self.config.layers
    }

    /// Indicator of the tank interior for the face stored at index `k`
    /// (face `k - 1/2`). The faces at `z = -H` and `z = B` count as outside.
    pub fn inside_face(&self, k: usize) -> bool {
        k >= 2 && k <= self.config.layers
    }
}

pub fn build_grid(cfg: &TankConfig) -> Result<Grid> {
    cfg.validate()?;
    let n = cfg.layers;
    let h = cfg.height_above_feed;
    let dz = (h + cfg.depth_below_feed) / n as f64;
    let z_centers: Vec<f64> = (0..n + 2).map(|j| -h + (j as f64 - 0.5) * dz).collect();
    let area_cells = z_centers
        .iter()
        .map(|&z| cfg.mean_area(z - 0.5 * dz, z + 0.5 * dz))
        .collect();
    let z_faces: Vec<f64> = (0..n + 3).map(|k| -h + (k as f64 - 1.0) * dz).collect();
    let area_faces = z_faces
        .iter()
        .map(|&z| cfg.mean_area(z - 0.5 * dz, z + 0.5 * dz))
        .collect();
    let feed_layer = (h / dz).ceil() as usize;
    Ok(Grid {
        config: *cfg,
        dz,
        z_centers,
        area_cells,
        z_faces,
        area_faces,
        feed_layer,
    })
}
