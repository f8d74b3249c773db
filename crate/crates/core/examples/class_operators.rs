//! Class operators and the decoherence functional they induce.

use qproc::unitary::max_abs_diff;
use qproc::{CylinderEvent, FiniteUnitarySystem, InitialState, PathSpace, QProcess, SiteCount};

fn main() -> qproc::Result<()> {
    let m = SiteCount::new(2)?;
    let walk = QProcess::new(FiniteUnitarySystem::two_site_walk(), InitialState::basis(m, 0)?, PathSpace::new(m))?;
    let sys = walk.system();
    let space = *walk.space();
    for n in 1..5 {
        let all = CylinderEvent::all(space, n)?;
        let c = sys.class_operator(&all)?;
        let e = CylinderEvent::final_site(space, n, 1)?;
        let ce = sys.class_operator(&e)?;
        let psi = walk.initial_state().vector();
        let amp = &ce * psi;
        println!(
            "n={n} |C(all) - U(n,0)| = {:.1e}  <C(E)psi, C(E)psi> = {:.6}  mu(E) = {:.6}",
            max_abs_diff(&c, &sys.propagator(n, 0)?),
            amp.norm_squared(),
            walk.q_measure(&e)?
        );
    }
    Ok(())
}
