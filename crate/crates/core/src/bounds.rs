//! Closed-form EMD bounds for clusters of a duplicate-free confidential
//! attribute, and the cluster size they imply for a target closeness level.

use crate::error::{Error, Result};

fn check_nk(n: usize, k: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::param("n", format!("need n >= 2, got {n}")));
    }
    if k < 2 || k > n {
        return Err(Error::param("k", format!("need 2 <= k <= n = {n}, got {k}")));
    }
    Ok(())
}

/// Smallest EMD any cluster of `k` out of `n` distinct-valued records can reach:
/// `(n + k)(n - k) / (4 n (n - 1) k)`.
///
/// Attained when `k` divides `n` and `n / k` is odd; otherwise only a lower bound.
pub fn min_emd_bound(n: usize, k: usize) -> Result<f64> {
    check_nk(n, k)?;
    let (n, k) = (n as f64, k as f64);
    Ok((n + k) * (n - k) / (4.0 * n * (n - 1.0) * k))
}

/// Largest EMD of a cluster holding one record from each of `k` equal
/// rank-ordered subsets: `(n - k) / (2 (n - 1) k)`.
pub fn max_emd_bound(n: usize, k: usize) -> Result<f64> {
    check_nk(n, k)?;
    let (n, k) = (n as f64, k as f64);
    Ok((n - k) / (2.0 * (n - 1.0) * k))
}

/// Cluster size for which the one-record-per-subset construction is `t`-close:
/// `max(k, ceil(n / (2 (n - 1) t + 1)))`.
pub fn required_cluster_size(n: usize, k: usize, t: f64) -> Result<usize> {
    if n < 2 {
        return Err(Error::param("n", format!("need n >= 2, got {n}")));
    }
    if k < 2 {
        return Err(Error::param("k", format!("need k >= 2, got {k}")));
    }
    if t.is_nan() || t <= 0.0 || t.is_infinite() {
        return Err(Error::param("t", format!("need t > 0, got {t}")));
    }
    let x = n as f64 / (2.0 * (n as f64 - 1.0) * t + 1.0);
    // guard against x landing a rounding error above an integer
    let nearest = x.round();
    let size = if (x - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        x.ceil()
    };
    Ok(k.max(size as usize))
}

/// Grows `k` until the remainder `n mod k` fits in `floor(n / k)` clusters,
/// applying `k += floor((n mod k) / floor(n / k))` to a fixed point.
pub fn adjust_cluster_size(n: usize, k: usize) -> usize {
    if k == 0 || k >= n {
        return k;
    }
    let mut k = k;
    loop {
        let (q, r) = (n / k, n % k);
        if r <= q {
            return k;
        }
        k += r / q;
    }
}

/// 0-based ranks of the cluster taking the median of each of the `k`
/// groups of `n / k` consecutive ranks (lower median when `n / k` is even).
pub fn median_construction(n: usize, k: usize) -> Vec<usize> {
    let g = n / k;
    (0..k).map(|i| i * g + (g - 1) / 2).collect()
}

/// 0-based ranks of the cluster taking the minimum of each group.
pub fn min_end_construction(n: usize, k: usize) -> Vec<usize> {
    let g = n / k;
    (0..k).map(|i| i * g).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_bound_values() {
        assert!((min_emd_bound(6, 2).unwrap() - 32.0 / 240.0).abs() < 1e-15);
        assert_eq!(min_emd_bound(9, 9).unwrap(), 0.0);
        let v = min_emd_bound(1080, 10).unwrap();
        let exact = 1090.0 * 1070.0 / (4.0 * 1080.0 * 1079.0 * 10.0);
        assert!((v - exact).abs() < 1e-15);
        assert!((v - 0.025021024).abs() < 1e-9);
    }

    #[test]
    fn max_bound_values() {
        assert!((max_emd_bound(6, 2).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(max_emd_bound(12, 12).unwrap(), 0.0);
        let v = max_emd_bound(1080, 2).unwrap();
        assert!((v - 0.24977).abs() < 1e-5);
        assert!(v < 0.25);
    }

    #[test]
    fn bounds_reject_bad_domain() {
        assert!(min_emd_bound(1, 1).is_err());
        assert!(min_emd_bound(5, 6).is_err());
        assert!(max_emd_bound(5, 1).is_err());
    }

    #[test]
    fn required_sizes_for_1080_records() {
        assert_eq!(required_cluster_size(1080, 2, 0.01).unwrap(), 48);
        assert_eq!(required_cluster_size(1080, 2, 0.05).unwrap(), 10);
        assert_eq!(required_cluster_size(1080, 15, 0.05).unwrap(), 15);
        assert!(required_cluster_size(1080, 2, 0.0).is_err());
        assert!(required_cluster_size(1080, 2, -0.1).is_err());
    }

    #[test]
    fn required_size_is_monotone_in_t() {
        let mut last = usize::MAX;
        for i in 1..=100 {
            let s = required_cluster_size(500, 3, i as f64 / 100.0).unwrap();
            assert!(s >= 3 && s <= last);
            last = s;
        }
    }

    #[test]
    fn adjustment() {
        assert_eq!(adjust_cluster_size(1080, 48), 49);
        assert_eq!(adjust_cluster_size(1080, 10), 10);
        assert_eq!(adjust_cluster_size(100, 7), 7);
        assert_eq!(adjust_cluster_size(10, 6), 10);
        for n in 2..200 {
            for k in 2..=n {
                let a = adjust_cluster_size(n, k);
                assert!(a >= k && a <= n);
                assert!(n % a <= n / a, "n={n} k={k} -> {a}");
            }
        }
    }

    #[test]
    fn constructions() {
        assert_eq!(median_construction(6, 2), vec![1, 4]);
        assert_eq!(median_construction(8, 2), vec![1, 5]);
        assert_eq!(min_end_construction(6, 2), vec![0, 3]);
    }
}
