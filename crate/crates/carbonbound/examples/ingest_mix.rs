//! Parsing an energy-mix file and converting it to grid carbon intensity.
//!
//! Builds a small mix file with a deliberate two-hour dropout, parses it
//! (the gap is forward-filled and logged), and applies the shipped
//! emission factors.
//!
//! Run with: cargo run --release -p carbonbound --example ingest_mix

use std::io::Write;

use carbonbound::ingest::{mix_to_carbon_intensity, parse_mix_table, EmissionFactorTable};
use carbonbound::timeseries::RegionId;

fn main() {
    let dir = std::env::temp_dir().join("carbonbound_ingest_mix");
    std::fs::create_dir_all(&dir).unwrap();
    let mix_path = dir.join("mix.csv");

    // six hours of mix with hours 02:00 and 03:00 missing
    let mut f = std::fs::File::create(&mix_path).unwrap();
    writeln!(f, "timestamp,coal,natural_gas,wind,solar").unwrap();
    writeln!(f, "2022-07-01T00:00:00Z,120,300,180,0").unwrap();
    writeln!(f, "2022-07-01T01:00:00Z,120,280,200,0").unwrap();
    writeln!(f, "2022-07-01T04:00:00Z,110,260,210,20").unwrap();
    writeln!(f, "2022-07-01T05:00:00Z,100,240,200,60").unwrap();
    drop(f);

    let (rows, fills) = parse_mix_table(&mix_path).unwrap();
    println!(
        "parsed {} rows ({} forward-filled):",
        rows.len(),
        fills.len()
    );
    for row in &rows {
        let filled = if fills.contains(row.stamp) {
            "  <- filled"
        } else {
            ""
        };
        let total: f64 = row.generation.values().sum();
        println!("  {}  total {total:6.1} MWh{filled}", row.stamp);
    }

    // factors ship as an editable file; nothing is hard-coded
    let factors_path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/emission_factors.csv");
    let factors = EmissionFactorTable::parse(factors_path.as_ref()).unwrap();

    let region = RegionId::new("CISO").unwrap();
    let ci = mix_to_carbon_intensity(&region, &rows, &factors).unwrap();
    println!("\ngrid carbon intensity (generation-weighted factor average):");
    for (stamp, value) in ci.stamps().zip(ci.values()) {
        println!("  {stamp}  {value:6.1} gCO2eq/kWh");
    }
    println!("\nmore wind and solar in the later hours pushes the average down.");
    println!("filled hours are recorded so evaluation can exclude them.");
}
