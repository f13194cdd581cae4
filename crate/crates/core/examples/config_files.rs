//! Load a bundled scenario configuration, adjust it and write the resolved
//! configuration together with a batch curve file.

use std::path::Path;

use reactive_settling::induction::BatchCurve;
use reactive_settling::io::{read_batch_curve, write_batch_curve, RunConfig};

fn main() -> reactive_settling::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/scenario_h.toml");
    let mut cfg = RunConfig::load(&path)?;
    cfg.tank.layers = 60;
    cfg.validate()?;
    let scenario = cfg.scenario.resolve()?;
    println!("scenario {} with Q_f = {} m³/h", scenario.label, scenario.feed_flow.at(0.0));

    let out = std::env::temp_dir().join("reactive-settling-example");
    std::fs::create_dir_all(&out).map_err(|source| reactive_settling::Error::Io {
        path: out.clone(),
        source,
    })?;
    let resolved = out.join("resolved_config.toml");
    std::fs::write(&resolved, cfg.resolved_toml()?).map_err(|source| reactive_settling::Error::Io {
        path: resolved.clone(),
        source,
    })?;
    println!("wrote {}", resolved.display());

    let curve = BatchCurve::new(vec![0.0, 0.1, 0.2, 0.3, 0.4], vec![1.0, 0.62, 0.31, 0.22, 0.2], 2.1)?;
    let file = out.join("curve.csv");
    write_batch_curve(&file, &curve)?;
    assert_eq!(read_batch_curve(&file)?, curve);
    println!("{}", std::fs::read_to_string(&file).unwrap_or_default());
    Ok(())
}
