//! Hindered settling, compression and feed-inlet mixing with the calibrated
//! parameters, printed as columns ready for plotting.

use reactive_settling::constitutive::{d_comp, d_mix, sigma_e, v_hs, DispersionParams, SettlingModel, SettlingParams};

fn main() -> reactive_settling::Result<()> {
    let params = SettlingParams::default();
    let model = SettlingModel::new(params)?;
    println!("x_kg_m3,v_hs_m_h,sigma_e_pa,d_comp_m2_h,d_c_m2_h2");
    for i in 0..=40 {
        let x = 0.25 * i as f64;
        println!(
            "{x},{:.6},{:.6},{:.6e},{:.6e}",
            v_hs(x, &params),
            sigma_e(x, &params),
            d_comp(x, &params),
            model.d_c(x)
        );
    }

    let dispersion = DispersionParams::fitted();
    let (q_u, q_e) = (0.15, 0.5);
    println!("\nz_m,d_mix_m2_h");
    for i in 0..=24 {
        let z = -0.6 + 0.05 * i as f64;
        println!("{z:.2},{:.6}", d_mix(z, q_u, q_e, &dispersion));
    }
    Ok(())
}
