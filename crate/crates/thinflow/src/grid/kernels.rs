//! Low-level numeric kernels with a sequential and a rayon-parallel variant.
//!
//! Reductions accumulate fixed-size chunk partials and fold the partials in
//! chunk order, so the sequential and parallel paths produce bitwise-identical
//! results and repeated runs are reproducible regardless of thread count.
//! The `*_seq` variants stay compiled under the `parallel` feature so the
//! bench suite can compare both.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length of the fixed reduction tree.
pub const CHUNK: usize = 2048;

#[inline]
fn chunk_dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

pub fn dot_seq(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (ca, cb) in a.chunks(CHUNK).zip(b.chunks(CHUNK)) {
        acc += chunk_dot(ca, cb);
    }
    acc
}

#[cfg(feature = "parallel")]
pub fn dot_par(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let partials: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(ca, cb)| chunk_dot(ca, cb))
        .collect();
    let mut acc = 0.0;
    for p in partials {
        acc += p;
    }
    acc
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    #[cfg(feature = "parallel")]
    {
        if a.len() >= CHUNK * 2 {
            return dot_par(a, b);
        }
    }
    dot_seq(a, b)
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn sum_seq(a: &[f64]) -> f64 {
    let mut acc = 0.0;
    for chunk in a.chunks(CHUNK) {
        let mut part = 0.0;
        for x in chunk {
            part += x;
        }
        acc += part;
    }
    acc
}

#[cfg(feature = "parallel")]
pub fn sum_par(a: &[f64]) -> f64 {
    let partials: Vec<f64> = a
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut part = 0.0;
            for x in chunk {
                part += x;
            }
            part
        })
        .collect();
    let mut acc = 0.0;
    for p in partials {
        acc += p;
    }
    acc
}

#[inline]
pub fn sum(a: &[f64]) -> f64 {
    #[cfg(feature = "parallel")]
    {
        if a.len() >= CHUNK * 2 {
            return sum_par(a);
        }
    }
    sum_seq(a)
}

/// Maximum of |a_i|; max is order-independent so a plain parallel reduce is fine.
pub fn max_abs(a: &[f64]) -> f64 {
    #[cfg(feature = "parallel")]
    {
        if a.len() >= CHUNK * 2 {
            return a
                .par_chunks(CHUNK)
                .map(|c| c.iter().fold(0.0f64, |m, x| m.max(x.abs())))
                .reduce(|| 0.0, f64::max);
        }
    }
    a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// y += alpha * x
pub fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    debug_assert_eq!(y.len(), x.len());
    #[cfg(feature = "parallel")]
    {
        if y.len() >= CHUNK * 2 {
            y.par_chunks_mut(CHUNK)
                .zip(x.par_chunks(CHUNK))
                .for_each(|(cy, cx)| {
                    for (yi, xi) in cy.iter_mut().zip(cx) {
                        *yi += alpha * xi;
                    }
                });
            return;
        }
    }
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// p = r + beta * p
pub fn xpby(p: &mut [f64], r: &[f64], beta: f64) {
    debug_assert_eq!(p.len(), r.len());
    #[cfg(feature = "parallel")]
    {
        if p.len() >= CHUNK * 2 {
            p.par_chunks_mut(CHUNK)
                .zip(r.par_chunks(CHUNK))
                .for_each(|(cp, cr)| {
                    for (pi, ri) in cp.iter_mut().zip(cr) {
                        *pi = ri + beta * *pi;
                    }
                });
            return;
        }
    }
    for (pi, ri) in p.iter_mut().zip(r) {
        *pi = ri + beta * *pi;
    }
}

/// Fill disjoint rows of `out` in parallel; `f(row_index, row_slice)` is pure
/// per row, so the result does not depend on the execution order.
pub fn for_each_row<F>(out: &mut [f64], row_len: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    debug_assert_eq!(out.len() % row_len, 0);
    #[cfg(feature = "parallel")]
    {
        if out.len() >= CHUNK {
            out.par_chunks_mut(row_len)
                .enumerate()
                .for_each(|(j, row)| f(j, row));
            return;
        }
    }
    for (j, row) in out.chunks_mut(row_len).enumerate() {
        f(j, row);
    }
}

/// Sequential variant of [`for_each_row`], kept for benchmarking.
pub fn for_each_row_seq<F>(out: &mut [f64], row_len: usize, f: F)
where
    F: Fn(usize, &mut [f64]),
{
    for (j, row) in out.chunks_mut(row_len).enumerate() {
        f(j, row);
    }
}

/// Compensated (Neumaier) sum for audit-grade accumulation.
pub fn compensated_sum(a: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &x in a {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(n: usize) -> Vec<f64> {
        (0..n).map(|i| (i as f64).sin() * 1.0e3 + 0.5).collect()
    }

    #[test]
    fn dot_par_matches_seq_bitwise() {
        #[cfg(feature = "parallel")]
        {
            for n in [1, 100, CHUNK, CHUNK + 1, 10 * CHUNK + 37] {
                let a = ramp(n);
                let b: Vec<f64> = a.iter().map(|x| x * 0.25 - 1.0).collect();
                assert_eq!(dot_seq(&a, &b).to_bits(), dot_par(&a, &b).to_bits());
                assert_eq!(sum_seq(&a).to_bits(), sum_par(&a).to_bits());
            }
        }
    }

    #[test]
    fn compensated_sum_handles_cancellation() {
        let a = [1.0e16, 1.0, -1.0e16, 1.0];
        assert_eq!(compensated_sum(&a), 2.0);
    }

    #[test]
    fn max_abs_basic() {
        assert_eq!(max_abs(&[-3.0, 2.0, 0.5]), 3.0);
        assert_eq!(max_abs(&[]), 0.0);
    }
}
