//! Static LCOS of the reference storage designs, plus a sensitivity of the
//! battery to its yearly full load hours.
//!
//! cargo run --example static_lcos

use storval::analysis::{static_lcos, ReferenceStorage};

fn main() -> anyhow::Result<()> {
    println!("{:<14} {:>9} {:>10} {:>6} {:>5}", "design", "EUR/kWh", "roundtrip", "FLH", "E/P");
    for design in ReferenceStorage::ALL {
        let a = design.assumptions();
        println!(
            "{:<14} {:>9.3} {:>9.1}% {:>6} {:>5}",
            design.name(),
            static_lcos(&a)?,
            100.0 * a.roundtrip_efficiency(),
            a.yearly_full_load_hours,
            a.discharge_ratio_hours
        );
    }

    println!("\nbattery LCOS by full load hours");
    let mut a = ReferenceStorage::Battery.assumptions();
    for flh in [500.0, 1000.0, 2000.0, 3400.0, 5000.0] {
        a.yearly_full_load_hours = flh;
        println!("  {flh:>6} h  {:.3} EUR/kWh", static_lcos(&a)?);
    }
    Ok(())
}
