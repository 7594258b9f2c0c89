//! Dense LU solve backing the exact policy-evaluation path.

/// Solve `a x = b` in place for square row-major `a` (`n x n`); on success
/// the solution replaces `b`. Partial pivoting; returns `false` when a
/// pivot collapses, i.e. the system is singular to working precision.
pub fn solve_in_place(a: &mut [f64], b: &mut [f64], n: usize) -> bool {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    for k in 0..n {
        let mut piv = k;
        let mut best = a[k * n + k].abs();
        for i in k + 1..n {
            let v = a[i * n + k].abs();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best == 0.0 {
            return false;
        }
        if piv != k {
            for j in k..n {
                a.swap(k * n + j, piv * n + j);
            }
            b.swap(k, piv);
        }
        let inv = 1.0 / a[k * n + k];
        for i in k + 1..n {
            let f = a[i * n + k] * inv;
            if f == 0.0 {
                continue;
            }
            a[i * n + k] = 0.0;
            for j in k + 1..n {
                a[i * n + j] -= f * a[k * n + j];
            }
            b[i] -= f * b[k];
        }
    }
    for i in (0..n).rev() {
        let mut x = b[i];
        for j in i + 1..n {
            x -= a[i * n + j] * b[j];
        }
        b[i] = x / a[i * n + i];
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn solves_a_known_system() {
        // x = (1, -2, 3) for this matrix.
        let mut a = vec![2.0, 1.0, -1.0, -3.0, -1.0, 2.0, -2.0, 1.0, 2.0];
        let mut b = vec![-3.0, 5.0, 2.0];
        assert!(solve_in_place(&mut a, &mut b, 3));
        assert_abs_diff_eq!(b[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b[1], -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b[2], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn reports_singularity() {
        let mut a = vec![1.0, 2.0, 2.0, 4.0];
        let mut b = vec![1.0, 2.0];
        assert!(!solve_in_place(&mut a, &mut b, 2));
    }

    #[test]
    fn roundtrips_a_random_well_conditioned_system() {
        // Diagonally dominant 20x20 built from a fixed linear congruence.
        let n = 20;
        let mut seed = 0x2545f4914f6cdd1du64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            let mut row_abs = 0.0;
            for j in 0..n {
                let v = next();
                a[i * n + j] = v;
                row_abs += v.abs();
            }
            a[i * n + i] += row_abs + 1.0;
        }
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64) - 7.5).collect();
        let mut b = vec![0.0; n];
        for i in 0..n {
            b[i] = (0..n).map(|j| a[i * n + j] * x_true[j]).sum();
        }
        let mut a_copy = a.clone();
        assert!(solve_in_place(&mut a_copy, &mut b, n));
        for i in 0..n {
            assert_abs_diff_eq!(b[i], x_true[i], epsilon = 1e-9);
        }
    }
}
