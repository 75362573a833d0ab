use rug::{Assign, Complex, Float};

use crate::error::{Error, Result};
use crate::numeric::PrecisionContext;

use super::{residual_norm_complex, ComplexMatrix, Lu};

fn normalize(v: &mut [Complex], bits: u32) {
    let mut norm = Float::new(bits);
    for x in v.iter() {
        norm += Float::with_val(bits, x.norm_ref());
    }
    let norm = norm.sqrt();
    for x in v.iter_mut() {
        *x /= &norm;
    }
}

/// `v^H A v` for unit `v`.
fn rayleigh(a: &ComplexMatrix, v: &[Complex], bits: u32) -> Complex {
    let av = a.mul_vec(v);
    let mut acc = Complex::new(bits);
    let mut tmp = Complex::new(bits);
    for (x, y) in v.iter().zip(&av) {
        tmp.assign(x.conj_ref());
        tmp *= y;
        acc += &tmp;
    }
    acc
}

fn shifted_lu(a: &ComplexMatrix, mu: &Complex, bits: u32) -> Option<Lu<Complex>> {
    let n = a.order();
    let mut data: Vec<Complex> = a.entries().iter().map(|z| Complex::with_val(bits, z)).collect();
    for i in 0..n {
        data[i * n + i] -= mu;
    }
    Lu::factor(n, data)
}

/// Eigenvector for the eigenvalue nearest `mu`, returned with the
/// Rayleigh-refined eigenvalue. The vector has unit 2-norm.
pub fn inverse_iteration(a: &ComplexMatrix, mu: &Complex, ctx: &PrecisionContext) -> Result<(Complex, Vec<Complex>)> {
    let n = a.order();
    let bits = ctx.bits();
    let lu = match shifted_lu(a, mu, bits) {
        Some(lu) => lu,
        None => {
            // An exact eigenvalue as shift: nudge it once.
            let mut scale = Float::with_val(bits, mu.abs_ref());
            if scale < 1 {
                scale.assign(1u32);
            }
            let nudged = Complex::with_val(bits, mu + scale * ctx.pow10_neg(ctx.digits() as i64 / 2));
            shifted_lu(a, &nudged, bits).ok_or(Error::ShiftSingular)?
        }
    };
    let fro = a.frobenius();
    let target = Float::with_val(bits, &fro * ctx.refinement_tol());
    let accept = Float::with_val(bits, &fro * ctx.contract_tol(5));

    // Deterministic start vector with no special alignment.
    let mut v: Vec<Complex> = (0..n)
        .map(|k| Complex::with_val(bits, (1 + (k * 7919) % 97, 0)) / 97u32)
        .collect();
    normalize(&mut v, bits);
    let mut best: Option<(Float, Complex, Vec<Complex>)> = None;
    for _ in 0..(8 + ctx.digits() as usize / 20) {
        v = lu.solve(&v);
        normalize(&mut v, bits);
        let refined = rayleigh(a, &v, bits);
        let r = residual_norm_complex(a, &refined, &v);
        let improved = best.as_ref().is_none_or(|(b, _, _)| r < *b);
        if improved {
            best = Some((r.clone(), refined, v.clone()));
        }
        if r <= target || !improved {
            break;
        }
    }
    let (r, refined, v) = best.expect("at least one iteration");
    if r > accept {
        return Err(Error::ConvergenceFailure {
            solver: "inverse iteration",
            iterations: 8 + ctx.digits() as usize / 20,
        });
    }
    Ok((refined, v))
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::super::Matrix;
    use super::*;
    use crate::numeric::make_context;

    fn real_matrix(ctx: &PrecisionContext, n: usize, vals: &[f64]) -> ComplexMatrix {
        Matrix::from_vec(n, vals.iter().map(|&v| Complex::with_val(ctx.bits(), (v, 0))).collect())
    }

    #[test]
    fn diagonal_shift() {
        let ctx = make_context(30).unwrap();
        let a = real_matrix(&ctx, 2, &[1.0, 0.0, 0.0, 2.0]);
        let (mu, v) = inverse_iteration(&a, &Complex::with_val(ctx.bits(), (1.0000001, 0)), &ctx).unwrap();
        assert!(Float::with_val(ctx.bits(), v[1].abs_ref()) < ctx.contract_tol(5));
        assert!(close(&Float::with_val(ctx.bits(), v[0].abs_ref()), &ctx.real(1), &ctx.contract_tol(5)));
        assert!(close(mu.real(), &ctx.real(1), &ctx.contract_tol(5)));
    }

    #[test]
    fn symmetric_pair_and_exact_shift() {
        let ctx = make_context(30).unwrap();
        let a = real_matrix(&ctx, 2, &[2.0, 1.0, 1.0, 2.0]);
        let (_, v) = inverse_iteration(&a, &Complex::with_val(ctx.bits(), (3.001, 0)), &ctx).unwrap();
        let ratio = Complex::with_val(ctx.bits(), &v[0] / &v[1]);
        assert!(close(ratio.real(), &ctx.real(1), &ctx.contract_tol(5)));
        // Exactly singular shift falls back to a perturbed one.
        let (mu, _) = inverse_iteration(&a, &Complex::with_val(ctx.bits(), (3, 0)), &ctx).unwrap();
        assert!(close(mu.real(), &ctx.real(3), &ctx.contract_tol(5)));
    }

    #[test]
    fn residual_on_random_matrix() {
        let ctx = make_context(40).unwrap();
        let re = lcg_values(21, 16);
        let im = lcg_values(22, 16);
        let a = Matrix::from_fn(4, |i, j| Complex::with_val(ctx.bits(), (re[i * 4 + j], im[i * 4 + j])));
        let values = super::super::qr_eigen_complex(&a, &ctx).unwrap();
        for mu in &values {
            let (refined, v) = inverse_iteration(&a, mu, &ctx).unwrap();
            let r = residual_norm_complex(&a, &refined, &v);
            assert!(r <= Float::with_val(ctx.bits(), a.frobenius() * ctx.contract_tol(5)));
        }
    }
}
