//! Rank-to-rank consistency and grade-2 additivity on a random system.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qproc::random::{random_partition, random_state, random_system};
use qproc::{PathSpace, QProcess, SiteCount};

fn main() -> qproc::Result<()> {
    let m = SiteCount::new(3)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let proc = QProcess::new(random_system(m, 6, &mut rng), random_state(m, &mut rng), PathSpace::new(m))?;
    for t in 0..5 {
        let r = proc.verify_consistency(t, 1 << 16, 42)?;
        println!("t={t} pairs={:<6} exhaustive={:<5} residual {:.1e}", r.pairs, r.exhaustive, r.max_residual);
    }
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let p = random_partition(*proc.space(), 4, 3, &mut rng);
        worst = worst.max(proc.grade2_residual(&p[0], &p[1], &p[2])?);
    }
    println!("grade-2 residual over 200 triples: {worst:.1e}");
    Ok(())
}
