//! Limits of local expectations for non-cylinder events.

use qproc::process::{builtin_families, FamilyKind};
use qproc::{QProcess, SiteCount};

fn main() -> qproc::Result<()> {
    let walk = QProcess::two_site_walk();
    let m = SiteCount::new(2)?;
    for f in builtin_families(m) {
        // point families decay like 2^-t but never enumerate paths
        let t_max = match f.kind() {
            FamilyKind::Countable | FamilyKind::Complement => 40,
            _ => 14,
        };
        let r = walk.evaluate_suitability(&f, t_max, 4, 1e-9)?;
        let nu = f.classical_measure(walk.space()).map(|v| format!("{v:.6}")).unwrap_or("-".into());
        let lim = r.limit.map(|v| format!("{v:.9}")).unwrap_or("-".into());
        println!("{:<40} {:<14} limit {lim:<12} nu {nu}", f.name(), r.verdict.to_string());
    }
    Ok(())
}
