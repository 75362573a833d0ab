use rug::{Assign, Complex, Float};

use crate::error::Result;
use crate::numeric::PrecisionContext;

use super::{cmp_complex, convergence_failure, ComplexMatrix};

fn abs(z: &Complex) -> Float {
    Float::with_val(z.prec().0, z.abs_ref())
}

/// Householder reduction to upper Hessenberg form, row-major in place.
fn hessenberg(h: &mut [Complex], n: usize, bits: u32) {
    let mut tmp = Complex::new(bits);
    for k in 0..n.saturating_sub(2) {
        // x = H[k+1.., k]
        let mut norm2 = Float::new(bits);
        for i in k + 1..n {
            norm2 += Float::with_val(bits, h[i * n + k].norm_ref());
        }
        if norm2.is_zero() {
            continue;
        }
        let norm = norm2.clone().sqrt();
        let x0 = h[(k + 1) * n + k].clone();
        // alpha = -e^{i arg x0} |x|, so v0 = x0 - alpha has no cancellation.
        let phase = if x0.is_zero() {
            Complex::with_val(bits, 1)
        } else {
            Complex::with_val(bits, &x0 / abs(&x0))
        };
        let alpha = Complex::with_val(bits, -(phase * &norm));
        let mut v: Vec<Complex> = (k + 1..n).map(|i| h[i * n + k].clone()).collect();
        v[0] -= &alpha;
        let mut vnorm2 = Float::new(bits);
        for x in &v {
            vnorm2 += Float::with_val(bits, x.norm_ref());
        }
        if vnorm2.is_zero() {
            continue;
        }
        let beta = Float::with_val(bits, 2u32) / vnorm2;

        // Left: H <- (I - beta v v^H) H on rows k+1.., columns k..
        for j in k..n {
            let mut s = Complex::new(bits);
            for (vi, i) in v.iter().zip(k + 1..n) {
                tmp.assign(vi.conj_ref());
                tmp *= &h[i * n + j];
                s += &tmp;
            }
            s *= &beta;
            for (vi, i) in v.iter().zip(k + 1..n) {
                tmp.assign(vi * &s);
                h[i * n + j] -= &tmp;
            }
        }
        // Right: H <- H (I - beta v v^H) on columns k+1..
        let vc: Vec<Complex> = v.iter().map(|x| Complex::with_val(bits, x.conj_ref())).collect();
        for i in 0..n {
            let row = &mut h[i * n + k + 1..(i + 1) * n];
            let mut s = Complex::new(bits);
            for (x, vj) in row.iter().zip(&v) {
                tmp.assign(x * vj);
                s += &tmp;
            }
            s *= &beta;
            for (x, vj) in row.iter_mut().zip(&vc) {
                tmp.assign(&s * vj);
                *x -= &tmp;
            }
        }
        // Exact zeros below the subdiagonal.
        h[(k + 1) * n + k].assign(&alpha);
        for i in k + 2..n {
            h[i * n + k].assign(0u32);
        }
    }
}

/// Rotation `G = [[c, s], [-conj(s), c]]` with `G (a, b)ᵀ = (r, 0)ᵀ`.
fn givens(a: &Complex, b: &Complex, bits: u32) -> (Float, Complex) {
    let na = abs(a);
    let nb = abs(b);
    if nb.is_zero() {
        return (Float::with_val(bits, 1), Complex::new(bits));
    }
    if na.is_zero() {
        return (Float::new(bits), Complex::with_val(bits, b.conj_ref()) / nb);
    }
    let r = Float::with_val(bits, na.hypot_ref(&nb));
    let c = Float::with_val(bits, &na / &r);
    let s = Complex::with_val(bits, a / na) * Complex::with_val(bits, b.conj_ref()) / r;
    (c, s)
}

/// Eigenvalue of `[[a, b], [c, d]]` nearest `d`.
fn wilkinson(a: &Complex, b: &Complex, c: &Complex, d: &Complex, bits: u32) -> Complex {
    let half_diff = Complex::with_val(bits, a - d) / 2u32;
    let disc = (Complex::with_val(bits, half_diff.square_ref()) + Complex::with_val(bits, b * c)).sqrt();
    let mean = Complex::with_val(bits, a + d) / 2u32;
    let plus = Complex::with_val(bits, &mean + &disc);
    let minus = Complex::with_val(bits, &mean - &disc);
    if abs(&Complex::with_val(bits, &plus - d)) <= abs(&Complex::with_val(bits, &minus - d)) {
        plus
    } else {
        minus
    }
}

/// All eigenvalues of a square complex matrix, ascending by real part.
pub fn qr_eigen_complex(a: &ComplexMatrix, ctx: &PrecisionContext) -> Result<Vec<Complex>> {
    let n = a.order();
    let bits = ctx.bits();
    let mut h: Vec<Complex> = a.entries().iter().map(|z| Complex::with_val(bits, z)).collect();
    hessenberg(&mut h, n, bits);

    let tol = ctx.refinement_tol();
    let fro = a.frobenius();
    let floor = Float::with_val(bits, &fro * &tol);
    let cap = 50 * n.max(1);
    let mut values: Vec<Complex> = Vec::with_capacity(n);
    let mut tmp = Complex::new(bits);
    let mut t2 = Complex::new(bits);
    let mut rotations: Vec<(Float, Complex)> = Vec::with_capacity(n);

    let mut hi = n;
    let mut iterations = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        let last = hi - 1;
        // Deflate at the lowest negligible subdiagonal of the active block.
        let mut lo = last;
        while lo > 0 {
            let sub = abs(&h[lo * n + lo - 1]);
            let mut scale = abs(&h[(lo - 1) * n + lo - 1]) + abs(&h[lo * n + lo]);
            scale *= &tol;
            if sub <= scale || sub <= floor {
                h[lo * n + lo - 1].assign(0u32);
                break;
            }
            lo -= 1;
        }
        if lo == last {
            values.push(h[last * n + last].clone());
            hi = last;
            iterations = 0;
            continue;
        }
        iterations += 1;
        total += 1;
        if iterations > cap {
            return Err(convergence_failure("complex QR", total));
        }

        let mut mu = if iterations % 11 == 10 {
            // Exceptional shift to break cycles.
            let mut m = h[last * n + last].clone();
            m += abs(&h[last * n + last - 1]) * Float::with_val(bits, 0.75);
            m
        } else {
            wilkinson(
                &h[(last - 1) * n + last - 1],
                &h[(last - 1) * n + last],
                &h[last * n + last - 1],
                &h[last * n + last],
                bits,
            )
        };
        for i in lo..=last {
            h[i * n + i] -= &mu;
        }
        rotations.clear();
        for k in lo..last {
            let (c, s) = givens(&h[k * n + k], &h[(k + 1) * n + k], bits);
            let sc = Complex::with_val(bits, s.conj_ref());
            for j in k..=last {
                let (top, bottom) = h.split_at_mut((k + 1) * n);
                let x = &mut top[k * n + j];
                let y = &mut bottom[j];
                // x' = c x + s y,  y' = -conj(s) x + c y
                tmp.assign(&s * &*y);
                t2.assign(&*x * &c);
                t2 += &tmp;
                tmp.assign(&sc * &*x);
                *y *= &c;
                *y -= &tmp;
                std::mem::swap(x, &mut t2);
            }
            h[(k + 1) * n + k].assign(0u32);
            rotations.push((c, s));
        }
        for (idx, (c, s)) in rotations.iter().enumerate() {
            let k = lo + idx;
            let sc = Complex::with_val(bits, s.conj_ref());
            for i in lo..=(k + 1).min(last) {
                let row = &mut h[i * n + k..i * n + k + 2];
                let (xs, ys) = row.split_at_mut(1);
                let (x, y) = (&mut xs[0], &mut ys[0]);
                // x' = x c + y conj(s),  y' = -x s + y c
                tmp.assign(&*y * &sc);
                t2.assign(&*x * c);
                t2 += &tmp;
                tmp.assign(&*x * s);
                *y *= c;
                *y -= &tmp;
                std::mem::swap(x, &mut t2);
            }
        }
        for i in lo..=last {
            h[i * n + i] += &mu;
        }
        mu.assign(0u32);
    }
    log::debug!("complex QR: {total} iterations for N={n}");
    values.sort_by(cmp_complex);
    Ok(values)
}
