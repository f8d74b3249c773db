//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::SymmetricEigen;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qproc::pathspace::{flip_count, flip_count_reflection, flip_count_vector};
use qproc::quantization::{
    indicator_operator, q_integral, quantize, simple_expansion, tail_sum_integral, two_valued_spectrum,
    QuantizedOperator,
};
use qproc::random::{random_partition, random_state, random_stationary, random_system, random_event};
use qproc::walk::{f_closed_form, gf_sequence, g_closed_form, scaled_norm, walk_table, GaussianInt};
use qproc::{
    ComplexMatrix, CylinderEvent, DiscreteMeasureSpace, EventFamily, NPath, PathSpace, QProcess, RandomVariable,
    SiteCount, StateOperator, Verdict,
};

const WALK_T_MAX: usize = 16;
const WALK_DIRECT_TOL: f64 = 1e-12;
const WALK_RUNTIME_SECS: f64 = 5.0;
const SPECTRAL_PAIR_TOL: f64 = 1e-9;
const SPECTRAL_SUM_TOL: f64 = 1e-10;
const POSITION_TOL: f64 = 1e-10;
const WALK_CONSISTENCY_TOL: f64 = 1e-12;
const SAMPLED_CONSISTENCY_TOL: f64 = 1e-10;
const GRADE2_TOL: f64 = 1e-10;
const GRAM_MIN_EIGEN: f64 = -1e-10;
const RANK_STABLE_TOL: f64 = 1e-12;
const LIMIT_TOL: f64 = 1e-10;
const LEMMA24_TOL: f64 = 1e-14;
const QUANT_TOL: f64 = 1e-10;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn sc(m: usize) -> SiteCount {
    SiteCount::new(m).unwrap()
}

fn half() -> BigRational {
    BigRational::new(1.into(), 2.into())
}

fn periodic(t: usize) -> BigRational {
    match t % 4 {
        0 => BigRational::from_integer(0.into()),
        2 => BigRational::from_integer(1.into()),
        _ => half(),
    }
}

fn c1_period_four() -> Outcome {
    let proc = QProcess::two_site_walk();
    let start = Instant::now();
    let table = walk_table(&proc, WALK_T_MAX, WALK_T_MAX).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let seq = gf_sequence(WALK_T_MAX);
    let mut worst = 0.0f64;
    for row in &table.rows {
        let exact = scaled_norm(&seq[row.t].0, row.t);
        ensure(exact == periodic(row.t), || format!("exact μ_{}(E) = {exact}", row.t))?;
        let direct = row.direct_mu_e.ok_or("missing direct value")?;
        let target = if row.t % 4 == 0 { 0.0 } else if row.t % 4 == 2 { 1.0 } else { 0.5 };
        worst = worst.max((direct - target).abs());
    }
    ensure(worst <= WALK_DIRECT_TOL, || format!("direct gap {worst:e}"))?;
    ensure(secs < WALK_RUNTIME_SECS, || format!("took {secs:.2}s"))?;
    Ok(format!("t=0..{WALK_T_MAX}, direct gap {worst:.1e}, {secs:.2}s"))
}

fn c2_complement() -> Outcome {
    let proc = QProcess::two_site_walk();
    let table = walk_table(&proc, WALK_T_MAX, WALK_T_MAX).map_err(|e| e.to_string())?;
    let seq = gf_sequence(WALK_T_MAX);
    let one = BigRational::from_integer(1.into());
    let mut worst = 0.0f64;
    for row in &table.rows {
        let e = scaled_norm(&seq[row.t].0, row.t);
        let g = scaled_norm(&seq[row.t].1, row.t);
        ensure(g == &one - &e, || format!("exact μ(G)+μ(E) ≠ 1 at t={}", row.t))?;
        // E and G computed as separate events, never from one another
        let space = *proc.space();
        let ev_e = CylinderEvent::final_site(space, row.t, 1).unwrap();
        let ev_g = CylinderEvent::final_site(space, row.t, 0).unwrap();
        let me = proc.q_measure(&ev_e).unwrap();
        let mg = proc.q_measure(&ev_g).unwrap();
        worst = worst.max((mg - (1.0 - me)).abs());
    }
    ensure(worst <= WALK_DIRECT_TOL, || format!("direct gap {worst:e}"))?;
    Ok(format!("t=0..{WALK_T_MAX}, direct gap {worst:.1e}"))
}

fn c3_seeds() -> Outcome {
    let gi = |re: i64, im: i64| GaussianInt::new(BigInt::from(re), BigInt::from(im));
    let seq = gf_sequence(4 * 8 + 3);
    let g_seed = [gi(0, 0), gi(0, 1), gi(0, 2), gi(0, 2)];
    let f_seed = [gi(1, 0), gi(1, 0), gi(0, 0), gi(-2, 0)];
    for j in 0..4 {
        ensure(seq[j].0 == g_seed[j] && seq[j].1 == f_seed[j], || format!("seed {j}"))?;
    }
    for k in 0..=8u32 {
        let s = BigInt::from(-4).pow(k);
        for j in 0..4 {
            let t = 4 * k as usize + j;
            let g = GaussianInt::new(&s * &g_seed[j].re, &s * &g_seed[j].im);
            let f = GaussianInt::new(&s * &f_seed[j].re, &s * &f_seed[j].im);
            ensure(seq[t].0 == g && seq[t].1 == f, || format!("recursion at t={t}"))?;
            ensure(g_closed_form(t) == g && f_closed_form(t) == f, || format!("closed form at t={t}"))?;
        }
    }
    Ok("G(0..3), F(0..3) and (−4)^k scaling for k ≤ 8".into())
}

fn random_process(rng: &mut ChaCha8Rng, m: usize, n: usize, pinned: bool) -> QProcess {
    let k = sc(m);
    let sys = if rng.random_bool(0.5) {
        random_stationary(k, rng)
    } else {
        random_system(k, n.max(1), rng)
    };
    if pinned {
        let s = rng.random_range(0..m);
        QProcess::new(sys, qproc::InitialState::basis(k, s).unwrap(), PathSpace::with_fixed_initial(k, s).unwrap())
            .unwrap()
    } else {
        QProcess::new(sys, random_state(k, rng), PathSpace::new(k)).unwrap()
    }
}

fn projector(vecs: &[Vec<Complex64>], len: usize) -> ComplexMatrix {
    let mut p = ComplexMatrix::zeros(len, len);
    for v in vecs {
        for i in 0..len {
            for j in 0..len {
                p[(i, j)] += v[i] * v[j].conj();
            }
        }
    }
    p
}

fn c4_spectral_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_pair = 0.0f64;
    let mut worst_sum = 0.0f64;
    for trial in 0..50 {
        let m = 2 + trial % 2;
        let n = rng.random_range(0..=3);
        let proc = random_process(&mut rng, m, n, trial % 5 == 0);
        let st = proc.state(n).unwrap();
        let len = st.len();
        let sp = st.spectrum();
        worst_sum = worst_sum.max((sp.eigenvalue_sum() - 1.0).abs());
        let dense = st.dense_matrix(4096).unwrap();
        let eig = SymmetricEigen::new(dense);
        let dense_nonzero = eig.eigenvalues.iter().filter(|v| v.abs() > SPECTRAL_PAIR_TOL).count();
        let pairs: Vec<_> = sp.pairs.iter().flatten().filter(|p| p.eigenvalue > SPECTRAL_PAIR_TOL).collect();
        ensure(dense_nonzero == pairs.len(), || {
            format!("trial {trial}: {dense_nonzero} dense vs {} structured nonzero eigenvalues", pairs.len())
        })?;
        // degenerate eigenvalues are compared through their eigenspace projectors
        let mut done = vec![false; pairs.len()];
        for i in 0..pairs.len() {
            if done[i] {
                continue;
            }
            let lam = pairs[i].eigenvalue;
            let cluster: Vec<usize> =
                (0..pairs.len()).filter(|&j| (pairs[j].eigenvalue - lam).abs() <= 1e-7).collect();
            cluster.iter().for_each(|&j| done[j] = true);
            let ours = projector(&cluster.iter().map(|&j| pairs[j].to_dense(len)).collect::<Vec<_>>(), len);
            let cols: Vec<usize> =
                (0..len).filter(|&c| (eig.eigenvalues[c] - lam).abs() <= 1e-7).collect();
            ensure(cols.len() == cluster.len(), || format!("trial {trial}: multiplicity mismatch at λ={lam}"))?;
            let theirs = projector(
                &cols.iter().map(|&c| eig.eigenvectors.column(c).iter().copied().collect()).collect::<Vec<_>>(),
                len,
            );
            for &c in &cols {
                worst_pair = worst_pair.max((eig.eigenvalues[c] - pairs[cluster[0]].eigenvalue).abs());
            }
            worst_pair = worst_pair.max(qproc::unitary::max_abs_diff(&ours, &theirs));
        }
    }
    ensure(worst_pair <= SPECTRAL_PAIR_TOL, || format!("eigenpair gap {worst_pair:e}"))?;
    ensure(worst_sum <= SPECTRAL_SUM_TOL, || format!("λ-sum gap {worst_sum:e}"))?;
    Ok(format!("50 systems, eigenpair gap {worst_pair:.1e}, λ-sum gap {worst_sum:.1e}"))
}

fn c5_position() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let m = rng.random_range(2..=4);
        let n = rng.random_range(0..=5);
        let proc = random_process(&mut rng, m, n, false);
        let p = proc.state(n).unwrap().position_distribution();
        let u = proc.system().propagator(n, 0).unwrap();
        let phi = u * proc.initial_state().vector();
        for i in 0..m {
            worst = worst.max((p[i] - phi[i].norm_sqr()).abs());
        }
    }
    ensure(worst <= POSITION_TOL, || format!("gap {worst:e}"))?;
    Ok(format!("100 draws, gap {worst:.1e}"))
}

fn c6_consistency() -> Outcome {
    let walk = QProcess::two_site_walk();
    let mut walk_worst = 0.0f64;
    for t in 0..=6 {
        let r = walk.verify_consistency(t, 1 << 20, 0).unwrap();
        ensure(r.exhaustive, || format!("walk rank {t} was sampled"))?;
        walk_worst = walk_worst.max(r.max_residual);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut sampled = 0.0f64;
    for trial in 0..10 {
        let t = 3 + trial % 3;
        let proc = random_process(&mut rng, 3, t + 1, false);
        let r = proc.verify_consistency(t, 2000, trial as u64).unwrap();
        ensure(!r.exhaustive, || "m=3 check was exhaustive".into())?;
        sampled = sampled.max(r.max_residual);
    }
    ensure(walk_worst <= WALK_CONSISTENCY_TOL, || format!("walk residual {walk_worst:e}"))?;
    ensure(sampled <= SAMPLED_CONSISTENCY_TOL, || format!("sampled residual {sampled:e}"))?;
    Ok(format!("walk t≤6 exhaustive {walk_worst:.1e}, m=3 sampled {sampled:.1e}"))
}

fn c7_grade2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    let mut min_gram = f64::INFINITY;
    let mut count = 0;
    for config in 0..10 {
        let (proc, n) = if config == 0 {
            (QProcess::two_site_walk(), 5)
        } else {
            let m = 2 + config % 2;
            let n = 1 + config % 4;
            (random_process(&mut rng, m, n, config % 3 == 0), n)
        };
        let space = *proc.space();
        for _ in 0..50 {
            let parts = random_partition(space, n, 3, &mut rng);
            worst = worst.max(proc.grade2_residual(&parts[0], &parts[1], &parts[2]).unwrap());
            count += 1;
        }
        let st = proc.state(n).unwrap();
        for _ in 0..5 {
            let parts = random_partition(space, n, 5, &mut rng);
            let g = ComplexMatrix::from_fn(5, 5, |i, j| st.decoherence_functional(&parts[i], &parts[j]).unwrap());
            let ev = SymmetricEigen::new(g).eigenvalues;
            min_gram = min_gram.min(ev.iter().copied().fold(f64::INFINITY, f64::min));
        }
    }
    ensure(worst <= GRADE2_TOL, || format!("residual {worst:e}"))?;
    ensure(min_gram >= GRAM_MIN_EIGEN, || format!("Gram eigenvalue {min_gram:e}"))?;
    Ok(format!("{count} triples, residual {worst:.1e}, min Gram eigenvalue {min_gram:.1e}"))
}

fn c8_suitable() -> Outcome {
    let walk = QProcess::two_site_walk();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut spread = 0.0f64;
    for trial in 0..12 {
        let (proc, n) = if trial < 4 {
            (QProcess::two_site_walk(), 1 + trial)
        } else {
            let n = 1 + trial % 3;
            (random_process(&mut rng, 2 + trial % 2, 12, trial % 2 == 0), n)
        };
        let ev = random_event(*proc.space(), n, 0.4, &mut rng);
        let mu = proc.q_measure(&ev).unwrap();
        let fam = EventFamily::cylinder(ev);
        for t in n..n + 6 {
            spread = spread.max((proc.local_expectation(&fam, t).unwrap() - mu).abs());
        }
    }
    ensure(spread <= RANK_STABLE_TOL, || format!("cylinder spread {spread:e}"))?;
    let m2 = sc(2);
    let p = |v: Vec<usize>| NPath::new(v, m2).unwrap();
    let cases = [
        (EventFamily::singleton(m2, p(vec![0])).unwrap(), 0.0),
        (EventFamily::singleton(m2, p(vec![0, 1, 1, 0])).unwrap(), 0.0),
        (EventFamily::complement_of_countable(m2, vec![p(vec![0, 1]), p(vec![0, 0, 0])]).unwrap(), 1.0),
        (EventFamily::visits_site(m2, 0).unwrap(), 1.0),
        (EventFamily::never_visits_site(m2, 0).unwrap(), 0.0),
    ];
    let mut worst = 0.0f64;
    for (fam, target) in &cases {
        let r = walk.evaluate_suitability(fam, 64, 4, 1e-12).unwrap();
        ensure(r.verdict == Verdict::Suitable, || format!("{} is {}", fam.name(), r.verdict))?;
        worst = worst.max((r.limit.unwrap() - target).abs());
    }
    ensure(worst <= LIMIT_TOL, || format!("limit gap {worst:e}"))?;
    Ok(format!("cylinder spread {spread:.1e}, family limit gap {worst:.1e}"))
}

fn random_space(rng: &mut ChaCha8Rng, n: usize) -> DiscreteMeasureSpace {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    let mut w: Vec<f64> = w.iter().map(|x| x / s).collect();
    let rest: f64 = w[1..].iter().sum();
    w[0] = 1.0 - rest;
    DiscreteMeasureSpace::new(w).unwrap()
}

fn random_rho(rng: &mut ChaCha8Rng, n: usize) -> StateOperator {
    let v: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    StateOperator::pure(&v).unwrap()
}

/// `k ≤ n` disjoint nonempty sets; the first `k` points seed one set each.
fn disjoint_sets(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut sets: Vec<Vec<usize>> = (0..k).map(|i| vec![i]).collect();
    for x in k..n {
        let b = rng.random_range(0..=k);
        if b < k {
            sets[b].push(x);
        }
    }
    sets
}

fn c9_quantization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    // exact rank-1 on dyadic weights
    let dy = DiscreteMeasureSpace::new(vec![0.25, 0.25, 0.25, 0.0625, 0.0625, 0.0625, 0.0625]).unwrap();
    for mask in 1u32..(1 << 7) {
        let set: Vec<usize> = (0..7).filter(|&x| mask & (1 << x) != 0).collect();
        let op = quantize(&dy, &RandomVariable::indicator(7, &set).unwrap()).unwrap();
        ensure(op == indicator_operator(&dy, &set).unwrap(), || format!("χ̂ not |χ⟩⟨χ| for {set:?}"))?;
        ensure(op.matrix().trace() == dy.measure(&set).unwrap(), || format!("trace ≠ ν(A) for {set:?}"))?;
        let ev = op.eigenvalues();
        ensure(ev[1..].iter().all(|v| v.abs() < 1e-15), || format!("rank > 1 for {set:?}"))?;
    }
    // disjoint supports
    let mut lemma = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(2..9);
        let sp = random_space(&mut rng, n);
        let sets = disjoint_sets(&mut rng, n, 2);
        let mk = |rng: &mut ChaCha8Rng, s: &Vec<usize>| {
            let mut v = vec![0.0; n];
            s.iter().for_each(|&x| v[x] = rng.random_range(0.1..5.0));
            RandomVariable::new(v).unwrap()
        };
        let f1 = quantize(&sp, &mk(&mut rng, &sets[0])).unwrap();
        let f2 = quantize(&sp, &mk(&mut rng, &sets[1])).unwrap();
        lemma = lemma.max((f1.matrix() * f2.matrix()).amax());
        let sum = QuantizedOperator::from_matrix(f1.matrix() + f2.matrix());
        lemma = lemma.max((sum.operator_norm() - f1.operator_norm().max(f2.operator_norm())).abs());
    }
    ensure(lemma <= LEMMA24_TOL, || format!("disjoint-support gap {lemma:e}"))?;
    // two-valued spectra
    let mut two = 0.0f64;
    for draw in 0..200 {
        let n = rng.random_range(2..8);
        let sp = random_space(&mut rng, n);
        let sets = disjoint_sets(&mut rng, n, 2);
        let alpha = rng.random_range(0.1..3.0);
        let beta = if draw % 4 == 3 { -rng.random_range(0.1..3.0) } else { alpha + rng.random_range(0.01..3.0) };
        let s = two_valued_spectrum(&sp, &sets[0], &sets[1], alpha, beta).unwrap();
        let f = RandomVariable::simple(n, &sets, &[alpha, beta]).unwrap();
        let op = quantize(&sp, &f).unwrap();
        let nonzero: Vec<f64> = op.eigenvalues().into_iter().filter(|v| v.abs() > 1e-12).collect();
        ensure(nonzero.len() == 2, || format!("draw {draw}: {} nonzero eigenvalues", nonzero.len()))?;
        two = two.max((nonzero[0] - s.lambda_plus).abs()).max((nonzero[1] - s.lambda_minus).abs());
        for (u, l) in [(&s.u_plus, s.lambda_plus), (&s.u_minus, s.lambda_minus)] {
            let u = nalgebra::DVector::from_column_slice(u);
            two = two.max((op.matrix() * &u - &u * l).amax());
        }
    }
    ensure(two <= QUANT_TOL, || format!("two-valued gap {two:e}"))?;
    // pair expansion
    let mut expansion = 0.0f64;
    for draw in 0..60 {
        let (n, k) = match draw % 3 {
            0 => (7, 3),
            1 => (8, 5),
            _ => (rng.random_range(4..10), rng.random_range(1..5)),
        };
        let sp = if draw % 3 == 0 { dy.clone() } else { random_space(&mut rng, n) };
        let sets = disjoint_sets(&mut rng, n, k);
        let alphas: Vec<f64> = (0..k)
            .map(|_| if draw % 3 == 0 { rng.random_range(-8i32..8) as f64 / 4.0 } else { rng.random_range(-3.0..3.0) })
            .collect();
        let e = simple_expansion(&sp, &sets, &alphas).unwrap();
        let d = quantize(&sp, &RandomVariable::simple(n, &sets, &alphas).unwrap()).unwrap();
        expansion = expansion.max(e.max_abs_diff(&d));
    }
    ensure(expansion <= QUANT_TOL, || format!("expansion gap {expansion:e}"))?;
    // tail sum
    let mut tail = 0.0f64;
    for _ in 0..300 {
        let n = rng.random_range(1..9);
        let sp = random_space(&mut rng, n);
        let k = rng.random_range(1..5).min(n);
        let sets = disjoint_sets(&mut rng, n, k);
        let alphas: Vec<f64> = (0..k).map(|_| rng.random_range(-4.0..4.0)).collect();
        let f = RandomVariable::simple(n, &sets, &alphas).unwrap();
        let rho = random_rho(&mut rng, n);
        tail = tail.max((q_integral(&rho, &sp, &f).unwrap() - tail_sum_integral(&rho, &sp, &f).unwrap()).abs());
    }
    ensure(tail <= QUANT_TOL, || format!("tail-sum gap {tail:e}"))?;
    Ok(format!(
        "disjoint {lemma:.1e}, two-valued {two:.1e}, expansion {expansion:.1e}, tail-sum {tail:.1e}"
    ))
}

fn c10_classical() -> Outcome {
    for m in 2..=5usize {
        let k = sc(m);
        let free = PathSpace::new(k);
        for t in 0..=10usize {
            let expected = BigRational::new(BigInt::from(m - 1).pow(t as u32), BigInt::from(m).pow(t as u32 + 1));
            for j in 0..m {
                let fam = EventFamily::first_visit_at(k, j, t).unwrap();
                let got = fam.classical_measure_exact(&free).unwrap();
                ensure(got == expected, || format!("ν(B_{t}) for m={m}, j={j}: {got}"))?;
                if (m as u64).pow(t as u32 + 1) <= 1 << 16 {
                    let ev = CylinderEvent::from_predicate(free, t, |s| s[..t].iter().all(|&x| x != j) && s[t] == j)
                        .unwrap();
                    ensure(ev.classical_measure_exact() == expected, || format!("count for m={m}, t={t}"))?;
                }
            }
        }
    }
    let pinned = PathSpace::with_fixed_initial(sc(2), 0).unwrap();
    for n in 0..=12usize {
        let c = flip_count_vector(n);
        let direct: Vec<u32> = pinned.paths(n).unwrap().map(|p| flip_count(&p) as u32).collect();
        ensure(c == direct, || format!("c_{n} differs from direct flip counts"))?;
        if n < 12 {
            let next = flip_count_vector(n + 1);
            let mut built = c.clone();
            built.extend(c.iter().rev().map(|v| v + 1));
            ensure(next == built, || format!("c_{} recursion", n + 1))?;
            for j in 0..(1u64 << n) {
                let (l, r) = flip_count_reflection(sc(2), n, j).unwrap();
                ensure(l == r, || format!("reflection n={n}, j={j}"))?;
            }
        }
    }
    Ok("ν(Bₜ) for m ≤ 5, t ≤ 10; flip-count vectors for n ≤ 12".into())
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("period-4 walk table", c1_period_four),
        ("complement table", c2_complement),
        ("G/F seeds and recursion", c3_seeds),
        ("spectral oracle", c4_spectral_oracle),
        ("position distribution", c5_position),
        ("consistency", c6_consistency),
        ("grade-2 additivity", c7_grade2),
        ("suitable-set extension", c8_suitable),
        ("quantization suite", c9_quantization),
        ("classical baselines", c10_classical),
    ];
    if std::env::var_os("ACCEPTANCE_BACKTRACE").is_none() {
        panic::set_hook(Box::new(|_| {}));
    }
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
