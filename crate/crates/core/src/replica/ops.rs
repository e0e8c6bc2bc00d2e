//! Small dense kernels. Reductions use eight fixed accumulators so the summation
//! order (and therefore every result bit) is independent of the target's SIMD width.

use num_traits::Float;

const LANES: usize = 8;

#[inline]
pub(crate) fn dot<T: Float>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [T::zero(); LANES];
    let ca = a.chunks_exact(LANES);
    let cb = b.chunks_exact(LANES);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..LANES {
            acc[k] = acc[k] + x[k] * y[k];
        }
    }
    let mut tail = T::zero();
    for (x, y) in ra.iter().zip(rb) {
        tail = tail + *x * *y;
    }
    let s01 = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    let s23 = (acc[4] + acc[5]) + (acc[6] + acc[7]);
    (s01 + s23) + tail
}

/// `y += alpha · x`
#[inline]
pub(crate) fn axpy<T: Float>(alpha: T, x: &[T], y: &mut [T]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * xi;
    }
}

/// `out = W x + b` for row-major `W` with `out.len()` rows.
pub(crate) fn affine<T: Float>(w: &[T], b: &[T], x: &[T], out: &mut [T]) {
    let cols = x.len();
    for ((o, row), &bi) in out.iter_mut().zip(w.chunks_exact(cols)).zip(b) {
        *o = bi + dot(row, x);
    }
}

/// `dx += Wᵀ dz`
pub(crate) fn affine_back_input<T: Float>(w: &[T], dz: &[T], dx: &mut [T]) {
    let cols = dx.len();
    for (row, &g) in w.chunks_exact(cols).zip(dz) {
        if g != T::zero() {
            axpy(g, row, dx);
        }
    }
}

/// `dW += dz xᵀ`
pub(crate) fn outer_acc<T: Float>(dz: &[T], x: &[T], dw: &mut [T]) {
    let cols = x.len();
    for (row, &g) in dw.chunks_exact_mut(cols).zip(dz) {
        if g != T::zero() {
            axpy(g, x, row);
        }
    }
}

/// `dW += dz xᵀ`, `db += dz`
pub(crate) fn affine_back_params<T: Float>(dz: &[T], x: &[T], dw: &mut [T], db: &mut [T]) {
    outer_acc(dz, x, dw);
    axpy(T::one(), dz, db);
}

#[inline]
pub(crate) fn sigmoid<T: Float>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;

    #[test]
    fn dot_matches_naive() {
        for n in [0usize, 1, 7, 8, 9, 37, 111] {
            let a: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
            let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.11).cos()).collect();
            let naive: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
            assert!((dot(&a, &b) - naive).abs() < 1e-12);
        }
    }

    #[test]
    fn affine_and_transpose() {
        // W = [[1, 2, 3], [4, 5, 6]]
        let w = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let mut out = [0.0; 2];
        affine(&w, &[0.5, -0.5], &[1.0, 0.0, -1.0], &mut out);
        assert_eq!(out, [-1.5, -2.5]);
        let mut dx = [0.0; 3];
        affine_back_input(&w, &[1.0, 2.0], &mut dx);
        assert_eq!(dx, [9.0, 12.0, 15.0]);
        let mut dw = vec![0.0; 6];
        let mut db = [0.0; 2];
        affine_back_params(&[1.0, 2.0], &[1.0, 0.0, -1.0], &mut dw, &mut db);
        assert_eq!(dw, [1.0, 0.0, -1.0, 2.0, 0.0, -2.0]);
        assert_eq!(db, [1.0, 2.0]);
    }
}
