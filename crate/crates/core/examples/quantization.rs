//! Quantized random variables on a finite probability space.

use num_complex::Complex64;

use qproc::quantization::{q_integral, quantize, simple_expansion, tail_sum_integral, two_valued_spectrum};
use qproc::{DiscreteMeasureSpace, RandomVariable, StateOperator};

fn main() -> qproc::Result<()> {
    let space = DiscreteMeasureSpace::new(vec![0.1, 0.2, 0.3, 0.4])?;
    let f = RandomVariable::new(vec![2.0, -1.0, 0.5, 3.0])?;
    let op = quantize(&space, &f)?;
    println!("eigenvalues of f^: {:?}", op.eigenvalues());
    println!("||f^|| = {:.6} <= ||f||_2 = {:.6}", op.operator_norm(), space.l2_norm(&f)?);

    let rho = StateOperator::pure(&[1.0, 1.0, 0.0, 1.0].map(|x: f64| Complex64::new(x, 0.0)))?;
    println!("integral {:.12}  tail sum {:.12}", q_integral(&rho, &space, &f)?, tail_sum_integral(&rho, &space, &f)?);

    let half = DiscreteMeasureSpace::uniform(2)?;
    let s = two_valued_spectrum(&half, &[0], &[1], 1.0, 2.0)?;
    println!("two-valued: lambda+ {:.6} lambda- {:.6}", s.lambda_plus, s.lambda_minus);

    let sets = vec![vec![0], vec![1], vec![2, 3]];
    let alphas = [1.0, -2.0, 4.0];
    let direct = quantize(&space, &RandomVariable::simple(4, &sets, &alphas)?)?;
    let expanded = simple_expansion(&space, &sets, &alphas)?;
    println!("pair expansion error {:.1e}", direct.max_abs_diff(&expanded));
    Ok(())
}
