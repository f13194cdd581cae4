//! Reaction rates of the biokinetic model for the initial tank contents and
//! for a sludge without ammonia, where nitrification must stop.

use reactive_settling::asm1::{rate_vector, reactions, Asm1Params, Particulates, Solubles};
use reactive_settling::scenario;

fn show(label: &str, c: &Particulates, s: &Solubles, p: &Asm1Params) {
    let (rc, rs) = reactions(c, s, p);
    println!("{label}");
    println!("  process rates [g/(m³ d)]: {:?}", rate_vector(c, s, p).map(|r| (r * 1e3).round() / 1e3));
    for (name, r) in Particulates::NAMES.iter().zip(rc.0) {
        println!("  {name:5} {r:+12.4}");
    }
    for (name, r) in Solubles::NAMES.iter().zip(rs.0) {
        println!("  {name:5} {r:+12.4}");
    }
}

fn main() {
    let params = Asm1Params::default();
    let c = scenario::initial_particulates();
    let mut s = scenario::initial_solubles();
    show("initial tank contents (per day)", &c, &s, &params);
    s.0[Solubles::S_NH] = 0.0;
    show("no ammonia (per hour)", &c, &s, &params.per_hour());
}
