//! The two-site hopper started at the origin: exact Gaussian-integer
//! amplitudes against direct path sums.

use qproc::walk::walk_table;
use qproc::QProcess;

fn gaussian((re, im): &(String, String)) -> String {
    match im.strip_prefix('-') {
        Some(abs) => format!("{re}-{abs}i"),
        None => format!("{re}+{im}i"),
    }
}

fn main() -> qproc::Result<()> {
    let walk = QProcess::two_site_walk();
    let table = walk_table(&walk, 12, 12)?;
    println!("{:>3} {:>10} {:>10} {:>8} {:>8}", "t", "G", "F", "mu(E)", "mu(G)");
    for r in &table.rows {
        let (g, f) = r.g.as_ref().zip(r.f.as_ref()).map(|(g, f)| (gaussian(g), gaussian(f))).unwrap_or_default();
        println!(
            "{:>3} {:>10} {:>10} {:>8} {:>8}",
            r.t,
            g,
            f,
            r.mu_e_exact.clone().unwrap_or_default(),
            r.mu_g_exact.clone().unwrap_or_default()
        );
    }
    println!("max |exact - direct| = {:e}", table.max_diff());
    Ok(())
}
