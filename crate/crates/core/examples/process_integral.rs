//! Integrals of random variables on the path space against the process.

use qproc::quantization::{process_integral, ProcessVariable};
use qproc::QProcess;

fn main() -> qproc::Result<()> {
    let walk = QProcess::two_site_walk();
    let space = *walk.space();
    for t in 0..8 {
        let pos: Vec<f64> = (0..space.checked_len(t)?).map(|i| space.final_site(t, i) as f64).collect();
        let f = ProcessVariable::cylinder(&walk, t, pos)?;
        let r = process_integral(&walk, &f, t + 6, 4, 1e-9)?;
        println!("position at t={t}: {} {:?}", r.verdict, r.limit);
    }
    Ok(())
}
