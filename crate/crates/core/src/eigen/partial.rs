use nalgebra::{DMatrix, SymmetricEigen};
use rug::{Assign, Complex, Float};

use crate::error::{Error, Result, Warning};
use crate::numeric::PrecisionContext;

use super::{convergence_failure, jacobi_eigen, EigenResult, Lu, Matrix, RealMatrix};

fn dot(a: &[Float], b: &[Float], tmp: &mut Float) -> Float {
    let mut acc = Float::new(tmp.prec());
    for (x, y) in a.iter().zip(b) {
        tmp.assign(x * y);
        acc += &*tmp;
    }
    acc
}

/// Orthonormalizes `block` against `basis` and itself (modified Gram-Schmidt,
/// two passes). Fails if a column collapses.
fn orthonormalize(block: &mut [Vec<Float>], basis: &[Vec<Float>], bits: u32) -> bool {
    let mut tmp = Float::new(bits);
    for i in 0..block.len() {
        let (prev, rest) = block.split_at_mut(i);
        let x = &mut rest[0];
        for _ in 0..2 {
            for q in basis.iter().chain(prev.iter()) {
                let c = dot(q, x, &mut tmp);
                for (xe, qe) in x.iter_mut().zip(q) {
                    tmp.assign(&c * qe);
                    *xe -= &tmp;
                }
            }
        }
        let norm = dot(x, x, &mut tmp).sqrt();
        if norm.is_zero() {
            return false;
        }
        for xe in x.iter_mut() {
            *xe /= &norm;
        }
    }
    true
}

/// Lowest `k` eigenpairs of a real symmetric matrix by shift-invert block
/// inverse iteration. A double-precision eigendecomposition supplies the
/// shifts, the start vectors, and the grouping of near-degenerate levels;
/// each group is then iterated at full precision against a fixed LU factor,
/// deflated against earlier groups, and separated by Rayleigh-Ritz.
pub fn partial_eigen(a: &RealMatrix, k: usize, ctx: &PrecisionContext) -> Result<EigenResult> {
    let n = a.order();
    if k == 0 || k > n {
        return Err(Error::InvalidOption(format!("need 1 <= k <= {n}, got {k}")));
    }
    if !a.is_symmetric() {
        return Err(Error::InvalidOption("partial solver needs a symmetric matrix".into()));
    }
    let bits = ctx.bits();
    let approx = a.to_f64();
    if approx.iter().any(|x| !x.is_finite()) {
        log::warn!("matrix entries exceed double range; using the full Jacobi solver");
        return truncated_full(a, k, ctx);
    }
    let seed = SymmetricEigen::new(DMatrix::from_row_slice(n, n, &approx));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| seed.eigenvalues[i].total_cmp(&seed.eigenvalues[j]));
    let lam: Vec<f64> = order.iter().map(|&i| seed.eigenvalues[i]).collect();
    let spread = lam.iter().fold(1f64, |m, x| m.max(x.abs()));
    let gap_tol = 1e-7 * spread;

    // Groups of levels closer than double precision can be trusted to split.
    let mut groups: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=n {
        if i == n || lam[i] - lam[i - 1] >= gap_tol {
            groups.push((start, i));
            if i >= k {
                break;
            }
            start = i;
        }
    }

    let fro = a.frobenius();
    let target = Float::with_val(bits, &fro * ctx.refinement_tol());
    let accept = Float::with_val(bits, &fro * ctx.contract_tol(5));
    let max_iter = 20 + ctx.digits() as usize / 5;

    let mut basis: Vec<Vec<Float>> = Vec::new();
    let mut values: Vec<Float> = Vec::new();
    let mut bound = Float::new(bits);
    let mut tmp = Float::new(bits);
    let mut total_iter = 0;

    for &(g0, g1) in &groups {
        let size = g1 - g0;
        let center = lam[g0..g1].iter().sum::<f64>() / size as f64;
        let lu = factor_shifted(a, &Float::with_val(bits, center), ctx)?;
        let mut block: Vec<Vec<Float>> = order[g0..g1]
            .iter()
            .map(|&c| (0..n).map(|r| Float::with_val(bits, seed.eigenvectors[(r, c)])).collect())
            .collect();
        if !orthonormalize(&mut block, &basis, bits) {
            return Err(convergence_failure("partial (start block)", 0));
        }
        let mut done = None;
        for it in 1..=max_iter {
            total_iter += 1;
            for col in block.iter_mut() {
                *col = lu.solve(col);
            }
            if !orthonormalize(&mut block, &basis, bits) {
                return Err(convergence_failure("partial (block collapse)", it));
            }
            let (theta, ritz, resid) = rayleigh_ritz(a, &block, ctx)?;
            let worst = resid.iter().fold(Float::new(bits), |m, r| if *r > m { r.clone() } else { m });
            block = ritz;
            if worst <= target || it == max_iter {
                done = Some((theta, worst, it));
                break;
            }
        }
        let (theta, worst, it) = done.expect("loop runs at least once");
        log::debug!("partial: levels {g0}..{g1} after {it} iterations, residual {:.3e}", worst.to_f64());
        if worst > accept {
            return Err(convergence_failure("partial", total_iter));
        }
        if worst > bound {
            bound.assign(&worst);
        }
        values.extend(theta);
        basis.extend(block);
    }

    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap_or(std::cmp::Ordering::Equal));
    idx.truncate(k);
    let vals: Vec<Float> = idx.iter().map(|&i| values[i].clone()).collect();

    let mut warnings = Vec::new();
    let mut i = 0;
    while i + 1 < vals.len() {
        let mut j = i;
        while j + 1 < vals.len() && unresolved(&vals[j], &vals[j + 1], ctx, &mut tmp) {
            j += 1;
        }
        if j > i {
            warnings.push(Warning::Cluster { first: i, last: j });
        }
        i = j + 1;
    }

    Ok(EigenResult {
        values: vals.iter().map(|v| Complex::with_val(bits, (v, 0))).collect(),
        vectors: Some(
            idx.iter()
                .map(|&i| basis[i].iter().map(|x| Complex::with_val(bits, (x, 0))).collect())
                .collect(),
        ),
        residual_bound: bound,
        warnings,
    })
}

fn unresolved(a: &Float, b: &Float, ctx: &PrecisionContext, tmp: &mut Float) -> bool {
    tmp.assign(b - a);
    tmp.abs_mut();
    let scale = Float::with_val(a.prec(), a.abs_ref()).max(&Float::with_val(a.prec(), 1));
    *tmp <= Float::with_val(a.prec(), scale * ctx.contract_tol(5))
}

fn factor_shifted(a: &RealMatrix, mu: &Float, ctx: &PrecisionContext) -> Result<Lu<Float>> {
    let n = a.order();
    let bits = ctx.bits();
    let build = |mu: &Float| {
        let mut data: Vec<Float> = a.entries().iter().map(|x| Float::with_val(bits, x)).collect();
        for i in 0..n {
            data[i * n + i] -= mu;
        }
        Lu::factor(n, data)
    };
    if let Some(lu) = build(mu) {
        return Ok(lu);
    }
    let scale = Float::with_val(bits, mu.abs_ref()).max(&Float::with_val(bits, 1));
    let nudged = Float::with_val(bits, mu + scale * ctx.pow10_neg(ctx.digits() as i64 / 2));
    build(&nudged).ok_or(Error::ShiftSingular)
}

/// Ritz values, Ritz vectors, and their residual norms for an orthonormal block.
fn rayleigh_ritz(
    a: &RealMatrix,
    block: &[Vec<Float>],
    ctx: &PrecisionContext,
) -> Result<(Vec<Float>, Vec<Vec<Float>>, Vec<Float>)> {
    let bits = ctx.bits();
    let m = block.len();
    let n = a.order();
    let mut tmp = Float::new(bits);
    let aw: Vec<Vec<Float>> = block.iter().map(|w| a.mul_vec(w)).collect();
    let mut proj = vec![Float::new(bits); m * m];
    for i in 0..m {
        for j in 0..=i {
            let mut h = dot(&block[i], &aw[j], &mut tmp);
            if i != j {
                h += dot(&block[j], &aw[i], &mut tmp);
                h /= 2u32;
            }
            proj[i * m + j].assign(&h);
            proj[j * m + i] = h;
        }
    }
    let small = jacobi_eigen(&Matrix::from_vec(m, proj), ctx, true)?;
    let y = small.vectors.expect("vectors requested");
    let mut theta = Vec::with_capacity(m);
    let mut ritz = Vec::with_capacity(m);
    let mut resid = Vec::with_capacity(m);
    for (value, coeffs) in small.values.iter().zip(&y) {
        let mut u = vec![Float::new(bits); n];
        let mut au = vec![Float::new(bits); n];
        for (c, (w, awj)) in coeffs.iter().zip(block.iter().zip(&aw)) {
            let c = c.real();
            for r in 0..n {
                tmp.assign(c * &w[r]);
                u[r] += &tmp;
                tmp.assign(c * &awj[r]);
                au[r] += &tmp;
            }
        }
        let th = value.real().clone();
        let mut acc = Float::new(bits);
        for (x, y) in au.iter().zip(&u) {
            tmp.assign(&th * y);
            tmp -= x;
            acc += Float::with_val(bits, tmp.square_ref());
        }
        theta.push(th);
        ritz.push(u);
        resid.push(acc.sqrt());
    }
    Ok((theta, ritz, resid))
}

fn truncated_full(a: &RealMatrix, k: usize, ctx: &PrecisionContext) -> Result<EigenResult> {
    let mut full = jacobi_eigen(a, ctx, true)?;
    full.values.truncate(k);
    if let Some(v) = full.vectors.as_mut() {
        v.truncate(k);
    }
    Ok(full)
}
