//! Cross-sectional area of the pilot tank and its layered discretization.

use reactive_settling::geometry::{area, build_grid, TankConfig};

fn main() -> reactive_settling::Result<()> {
    let tank = TankConfig::default();
    println!("volume {:.4} m³", tank.volume());
    for z in [-1.25, -0.5, 0.0, 0.51, 0.8, 1.1] {
        println!("area({z:+.2}) = {:.4} m²", area(z, &tank)?);
    }

    let grid = build_grid(&tank.with_layers(20))?;
    println!("dz = {:.4} m, feed inlet in layer {}", grid.dz, grid.feed_layer);
    for j in 0..grid.cells() {
        let role = match j {
            0 => "effluent",
            j if j == grid.cells() - 1 => "underflow",
            j if j == grid.feed_layer => "feed",
            _ => "",
        };
        println!("{j:3} z = {:+.4}  A = {:.4} {role}", grid.z_centers[j], grid.area_cells[j]);
    }
    Ok(())
}
