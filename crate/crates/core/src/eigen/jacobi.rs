use rug::ops::NegAssign;
use rug::{Assign, Complex, Float};

use crate::error::{Error, Result};
use crate::numeric::PrecisionContext;

use super::{convergence_failure, EigenResult, RealMatrix};

/// Applies the plane rotation `(x, y) <- (c x - s y, s x + c y)` in place.
#[inline]
fn rotate(x: &mut Float, y: &mut Float, c: &Float, s: &Float, t1: &mut Float, t2: &mut Float) {
    t1.assign(x.mul_sub_mul_ref(c, y, s));
    t2.assign(x.mul_add_mul_ref(s, y, c));
    std::mem::swap(x, t1);
    std::mem::swap(y, t2);
}

/// Two distinct mutable elements of one slice.
#[inline]
fn pair(v: &mut [Float], i: usize, j: usize) -> (&mut Float, &mut Float) {
    debug_assert!(i < j);
    let (lo, hi) = v.split_at_mut(j);
    (&mut lo[i], &mut hi[0])
}

/// All eigenpairs of a real symmetric matrix by cyclic-by-rows Jacobi
/// rotations.
pub fn jacobi_eigen(a: &RealMatrix, ctx: &PrecisionContext, want_vectors: bool) -> Result<EigenResult> {
    if !a.is_symmetric() {
        return Err(Error::InvalidOption("Jacobi solver needs a symmetric matrix".into()));
    }
    let n = a.order();
    let bits = ctx.bits();
    let mut m: Vec<Float> = a.entries().iter().map(|x| Float::with_val(bits, x)).collect();
    let mut v: Vec<Float> = if want_vectors {
        (0..n * n)
            .map(|k| Float::with_val(bits, u32::from(k / n == k % n)))
            .collect()
    } else {
        Vec::new()
    };

    let fro = a.frobenius();
    let tol = Float::with_val(bits, &fro * ctx.refinement_tol());
    let max_sweeps = 30 + ctx.digits() as usize / 10;

    let mut d: Vec<Float> = (0..n).map(|i| m[i * n + i].clone()).collect();
    let mut b = d.clone();
    let mut z: Vec<Float> = (0..n).map(|_| Float::new(bits)).collect();
    let (mut t1, mut t2) = (Float::new(bits), Float::new(bits));
    let (mut c, mut s, mut t, mut theta, mut h) =
        (Float::new(bits), Float::new(bits), Float::new(bits), Float::new(bits), Float::new(bits));
    let mut absval = Float::new(bits);

    let mut sweep = 0;
    loop {
        // Off-diagonal size at the start of the sweep.
        let mut sum = Float::new(bits);
        let mut max = Float::new(bits);
        for p in 0..n {
            for q in p + 1..n {
                absval.assign(m[p * n + q].abs_ref());
                sum += &absval;
                if absval > max {
                    max.assign(&absval);
                }
            }
        }
        if max <= tol {
            break;
        }
        if sweep >= max_sweeps {
            return Err(convergence_failure("jacobi", sweep));
        }
        sweep += 1;
        let thresh = if sweep < 4 {
            Float::with_val(bits, &sum / (5 * n * n) as u64)
        } else {
            Float::new(bits)
        };
        log::trace!("jacobi sweep {sweep}: max off-diagonal {:.3e}", max.to_f64());

        for p in 0..n {
            for q in p + 1..n {
                absval.assign(m[p * n + q].abs_ref());
                if absval <= tol || absval <= thresh {
                    continue;
                }
                // tan of the rotation angle, smaller root of t^2 + 2 theta t - 1 = 0.
                h.assign(&d[q] - &d[p]);
                theta.assign(&h / &m[p * n + q]);
                theta /= 2u32;
                t.assign(theta.square_ref());
                t += 1u32;
                t.sqrt_mut();
                if theta.is_sign_negative() {
                    t -= &theta;
                    t.recip_mut();
                    t.neg_assign();
                } else {
                    t += &theta;
                    t.recip_mut();
                }
                c.assign(t.square_ref());
                c += 1u32;
                c.recip_sqrt_mut();
                s.assign(&t * &c);
                h.assign(&t * &m[p * n + q]);
                z[p] -= &h;
                z[q] += &h;
                d[p] -= &h;
                d[q] += &h;
                m[p * n + q].assign(0u32);

                for j in 0..p {
                    let (x, y) = pair(&mut m, j * n + p, j * n + q);
                    rotate(x, y, &c, &s, &mut t1, &mut t2);
                }
                for j in p + 1..q {
                    let (x, y) = pair(&mut m, p * n + j, j * n + q);
                    rotate(x, y, &c, &s, &mut t1, &mut t2);
                }
                for j in q + 1..n {
                    let (x, y) = pair(&mut m, p * n + j, q * n + j);
                    rotate(x, y, &c, &s, &mut t1, &mut t2);
                }
                if want_vectors {
                    // Columns p and q of V, stored as rows of Vᵀ for locality.
                    let (x_row, y_row) = {
                        let (lo, hi) = v.split_at_mut(q * n);
                        (&mut lo[p * n..(p + 1) * n], &mut hi[..n])
                    };
                    for (x, y) in x_row.iter_mut().zip(y_row.iter_mut()) {
                        rotate(x, y, &c, &s, &mut t1, &mut t2);
                    }
                }
            }
        }
        for i in 0..n {
            b[i] += &z[i];
            d[i].assign(&b[i]);
            z[i].assign(0u32);
        }
    }
    log::debug!("jacobi converged in {sweep} sweeps (N={n})");

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap_or(std::cmp::Ordering::Equal));
    let values: Vec<Complex> = order.iter().map(|&i| Complex::with_val(bits, (&d[i], 0))).collect();

    let (vectors, residual_bound) = if want_vectors {
        let vecs: Vec<Vec<Float>> = order.iter().map(|&i| v[i * n..(i + 1) * n].to_vec()).collect();
        let mut bound = Float::new(bits);
        for (k, vec) in vecs.iter().enumerate() {
            let av = a.mul_vec(vec);
            let mut acc = Float::new(bits);
            for (x, y) in av.iter().zip(vec) {
                t1.assign(&d[order[k]] * y);
                t1 -= x;
                acc += Float::with_val(bits, t1.square_ref());
            }
            let r = acc.sqrt();
            if r > bound {
                bound = r;
            }
        }
        let cvecs = vecs
            .into_iter()
            .map(|vec| vec.into_iter().map(|x| Complex::with_val(bits, (x, 0))).collect())
            .collect();
        (Some(cvecs), bound)
    } else {
        // Frobenius norm of what is left off the diagonal bounds the eigenvalue error.
        let mut acc = Float::new(bits);
        for p in 0..n {
            for q in p + 1..n {
                acc += Float::with_val(bits, m[p * n + q].square_ref());
            }
        }
        acc *= 2u32;
        (None, acc.sqrt())
    };

    Ok(EigenResult {
        values,
        vectors,
        residual_bound,
        warnings: Vec::new(),
    })
}
