//! A user-supplied coverage table read from CSV.

use std::fs::File;
use std::path::Path;

use qproc::process::CoverageTable;
use qproc::{EventFamily, PathSpace, QProcess, SiteCount};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/coverage_gamma1.csv");
    let m = SiteCount::new(2)?;
    let table = CoverageTable::from_csv(PathSpace::new(m), File::open(path)?)?;
    let family = EventFamily::coverage_table(table, "gamma1 = 1");
    let walk = QProcess::new(
        qproc::FiniteUnitarySystem::two_site_walk(),
        qproc::InitialState::basis(m, 0)?,
        PathSpace::new(m),
    )?;
    let r = walk.evaluate_suitability(&family, 8, 2, 1e-12)?;
    for (t, v) in &r.values {
        println!("t={t} {v:.12}");
    }
    println!("{} limit {:?}", r.verdict, r.limit);
    Ok(())
}
