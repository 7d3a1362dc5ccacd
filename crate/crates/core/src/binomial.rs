//! Binomial probability helpers.
//!
//! Probabilities are assembled in log space. Binomial coefficients use
//! exact integer arithmetic up to m = 64 and a log-factorial table beyond,
//! which keeps the tails accurate enough for the large-m consistency
//! sweeps.

/// Largest m for which binomial coefficients are computed as exact integers.
pub const EXACT_COEFF_LIMIT: usize = 64;

/// Exact C(m, k) for m <= 64 (values fit comfortably in u128).
pub fn binomial_coeff_exact(m: usize, k: usize) -> u128 {
    assert!(m <= EXACT_COEFF_LIMIT, "exact coefficients only up to m=64");
    if k > m {
        return 0;
    }
    let k = k.min(m - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (m - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// ln(m!) via compensated (Kahan) summation of ln(i); keeps the absolute
/// error near machine precision for desk-scale m.
pub fn ln_factorial(m: usize) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for i in 2..=m {
        let term = (i as f64).ln() - carry;
        let next = sum + term;
        carry = (next - sum) - term;
        sum = next;
    }
    sum
}

fn ln_binomial_coeff(m: usize, k: usize) -> f64 {
    if m <= EXACT_COEFF_LIMIT {
        (binomial_coeff_exact(m, k) as f64).ln()
    } else {
        ln_factorial(m) - ln_factorial(k) - ln_factorial(m - k)
    }
}

/// P{X = k} for X ~ Binomial(m, p).
pub fn binomial_pmf(m: usize, k: usize, p: f64) -> f64 {
    assert!((0.0..=1.0).contains(&p), "p={p} outside [0,1]");
    if k > m {
        return 0.0;
    }
    // Degenerate endpoints avoid 0 * ln 0.
    if p == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if k == m { 1.0 } else { 0.0 };
    }
    let ln_pmf =
        ln_binomial_coeff(m, k) + k as f64 * p.ln() + (m - k) as f64 * (1.0 - p).ln();
    ln_pmf.exp()
}

/// P{X <= k} for X ~ Binomial(m, p).
pub fn binomial_cdf(m: usize, k: usize, p: f64) -> f64 {
    if k >= m {
        return 1.0;
    }
    // Sum the shorter tail for accuracy.
    if (k as f64) < m as f64 * p {
        (0..=k).map(|i| binomial_pmf(m, i, p)).sum::<f64>().min(1.0)
    } else {
        let upper: f64 = (k + 1..=m).map(|i| binomial_pmf(m, i, p)).sum();
        (1.0 - upper).clamp(0.0, 1.0)
    }
}

/// Expected sign of (theta - theta_hat) where theta_hat = K/m with
/// K ~ Binomial(m, theta_star) — the closed form of the expected sample
/// Wasserstein gradient, with ties contributing zero (sgn(0) = 0):
///
/// E sgn(theta - theta_hat) = P{theta_hat < theta} - P{theta_hat > theta}
///                          = 2 P{theta_hat < theta} - 1 + P{theta_hat = theta}.
pub fn expected_sign_against_binomial_mean(m: usize, theta_star: f64, theta: f64) -> f64 {
    let mut below = 0.0;
    let mut tie = 0.0;
    for k in 0..=m {
        let frac = k as f64 / m as f64;
        if frac < theta {
            below += binomial_pmf(m, k, theta_star);
        } else if frac == theta {
            tie = binomial_pmf(m, k, theta_star);
        }
    }
    2.0 * below - 1.0 + tie
}

/// The median interval [lo, hi] of Binomial(m, p): `lo` is the smallest k
/// with CDF(k) >= 1/2 and `hi` the smallest k with CDF(k) > 1/2. The two
/// differ exactly when the CDF hits 1/2, in which case every point of
/// [lo, hi] is a median.
pub fn binomial_median_interval(m: usize, p: f64) -> (usize, usize) {
    let mut lo = None;
    let mut hi = None;
    let mut acc = 0.0;
    for k in 0..=m {
        acc += binomial_pmf(m, k, p);
        if lo.is_none() && acc >= 0.5 {
            lo = Some(k);
        }
        if hi.is_none() && acc > 0.5 {
            hi = Some(k);
            break;
        }
    }
    (lo.unwrap_or(m), hi.unwrap_or(m))
}

/// Multinomial weight of an outcome-count vector under the given
/// probabilities: m!/(prod counts_i!) * prod p_i^{counts_i}, with
/// m = sum(counts).
pub fn multinomial_weight(counts: &[usize], probs: &[f64]) -> f64 {
    assert_eq!(counts.len(), probs.len());
    let m: usize = counts.iter().sum();
    let mut ln_coeff = if m <= EXACT_COEFF_LIMIT {
        let mut acc: u128 = 1;
        let mut remaining = m;
        for &c in counts {
            // Product of binomial coefficients equals the multinomial one.
            acc *= binomial_coeff_exact(remaining, c);
            remaining -= c;
        }
        (acc as f64).ln()
    } else {
        ln_factorial(m) - counts.iter().map(|&c| ln_factorial(c)).sum::<f64>()
    };
    for (&c, &p) in counts.iter().zip(probs) {
        if c == 0 {
            continue;
        }
        if p == 0.0 {
            return 0.0;
        }
        ln_coeff += c as f64 * p.ln();
    }
    ln_coeff.exp()
}
