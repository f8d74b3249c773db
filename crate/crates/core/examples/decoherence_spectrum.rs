//! Spectrum of the decoherence matrix for a random three-site system,
//! checked against a dense Hermitian eigensolve.

use nalgebra::SymmetricEigen;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qproc::random::{random_state, random_stationary};
use qproc::{PathSpace, QProcess, SiteCount};

fn main() -> qproc::Result<()> {
    let m = SiteCount::new(3)?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let proc = QProcess::new(random_stationary(m, &mut rng), random_state(m, &mut rng), PathSpace::new(m))?;
    for n in 0..5 {
        let st = proc.state(n)?;
        let sp = st.spectrum();
        let ev: Vec<String> = sp.eigenvalues.iter().map(|v| format!("{v:.6}")).collect();
        print!("n={n} |paths|={:<4} eigenvalues [{}]", st.len(), ev.join(", "));
        let dense = st.dense_matrix(4096)?;
        let mut d: Vec<f64> = SymmetricEigen::new(dense.clone()).eigenvalues.iter().copied().collect();
        d.sort_by(|a, b| b.total_cmp(a));
        let err = qproc::unitary::max_abs_diff(&sp.reconstruct(st.len()), &dense);
        println!("  dense top {:.6}  reconstruction {err:.1e}", d[0]);
    }
    Ok(())
}
