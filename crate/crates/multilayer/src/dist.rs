//! Discrete probability kernels shared by the exact solvers: binomial and
//! hypergeometric pmfs through a log-factorial table, binomial tail, Poisson.

/// Table of ln(k!) for k up to a fixed bound. Shared, immutable after
/// construction, so solvers can fan out over it in parallel.
///
/// Stored as hi/lo pairs from compensated summation: ln(k!) grows to ~1e5
/// while log-binomials are small differences of such values, and a single
/// f64 per entry would already cost ~1e-11 of absolute accuracy at
/// n ~ 1e4.
#[derive(Debug, Clone)]
pub struct LogFactorial {
    hi: Vec<f64>,
    lo: Vec<f64>,
}

impl LogFactorial {
    pub fn new(max_n: usize) -> Self {
        let mut hi = vec![0.0; max_n + 1];
        let mut lo = vec![0.0; max_n + 1];
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for k in 1..=max_n {
            let x = (k as f64).ln();
            let t = sum + x;
            comp += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
            sum = t;
            hi[k] = sum;
            lo[k] = comp;
        }
        LogFactorial { hi, lo }
    }

    pub fn ln_fact(&self, k: usize) -> f64 {
        self.hi[k] + self.lo[k]
    }

    pub fn ln_choose(&self, n: usize, k: usize) -> f64 {
        if k > n {
            return f64::NEG_INFINITY;
        }
        neumaier_sum(&[
            self.hi[n],
            -self.hi[k],
            -self.hi[n - k],
            self.lo[n],
            -self.lo[k],
            -self.lo[n - k],
        ])
    }
}

fn neumaier_sum(terms: &[f64]) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for &x in terms {
        let t = sum + x;
        comp += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
    }
    sum + comp
}

/// B(m; n, q): probability of `m` successes in `n` independent trials.
pub fn binom_pmf(m: u32, n: u32, q: f64) -> f64 {
    binom_pmf_with(&LogFactorial::new(n as usize), m, n, q)
}

pub fn binom_pmf_with(lf: &LogFactorial, m: u32, n: u32, q: f64) -> f64 {
    if m > n {
        return 0.0;
    }
    // Degenerate rates are exact point masses; the log route would produce
    // 0 * -inf there.
    if q <= 0.0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    if q >= 1.0 {
        return if m == n { 1.0 } else { 0.0 };
    }
    let (m_f, rest) = (m as f64, (n - m) as f64);
    (lf.ln_choose(n as usize, m as usize) + m_f * q.ln() + rest * (-q).ln_1p()).exp()
}

/// Whole pmf row B(.; n, q); sums to 1 up to rounding.
pub fn binom_pmf_vec(n: u32, q: f64) -> Vec<f64> {
    let lf = LogFactorial::new(n as usize);
    (0..=n).map(|m| binom_pmf_with(&lf, m, n, q)).collect()
}

/// P[Binom(j, p) >= k]; 1 for k = 0, 0 for k > j.
pub fn binom_ccdf(k: u32, j: u32, p: f64) -> f64 {
    binom_ccdf_with(&LogFactorial::new(j as usize), k, j, p)
}

pub fn binom_ccdf_with(lf: &LogFactorial, k: u32, j: u32, p: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > j {
        return 0.0;
    }
    // Sum the shorter side for accuracy.
    if 2 * k > j {
        (k..=j).map(|l| binom_pmf_with(lf, l, j, p)).sum()
    } else {
        let head: f64 = (0..k).map(|l| binom_pmf_with(lf, l, j, p)).sum();
        (1.0 - head).max(0.0)
    }
}

/// H(j; n, m, k) = C(m, j) C(n - m, k - j) / C(n, k): overlap of a uniformly
/// random k-subset with a fixed m-subset of an n-set. Out-of-support j gives 0.
pub fn hypergeom_pmf(j: u32, n: u32, m: u32, k: u32) -> f64 {
    hypergeom_pmf_with(&LogFactorial::new(n as usize), j, n, m, k)
}

pub fn hypergeom_pmf_with(lf: &LogFactorial, j: u32, n: u32, m: u32, k: u32) -> f64 {
    if j > m || j > k || k - j > n - m {
        return 0.0;
    }
    (lf.ln_choose(m as usize, j as usize)
        + lf.ln_choose((n - m) as usize, (k - j) as usize)
        - lf.ln_choose(n as usize, k as usize))
    .exp()
}

/// Poisson pmf with a finite rate; rate 0 is a point mass at 0.
pub fn poisson_pmf(w: u32, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return if w == 0 { 1.0 } else { 0.0 };
    }
    let lf = LogFactorial::new(w as usize);
    (w as f64 * lambda.ln() - lambda - lf.ln_fact(w as usize)).exp()
}

/// P[Poisson(lambda) >= k].
pub fn poisson_tail(k: u32, lambda: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if lambda == 0.0 {
        return 0.0;
    }
    let mut head = 0.0;
    let mut term = (-lambda).exp();
    for w in 0..k {
        head += term;
        term *= lambda / (w + 1) as f64;
    }
    (1.0 - head).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binom_edge_and_symmetric_cases() {
        let q = 0.37;
        assert!((binom_pmf(0, 7, q) - (1.0 - q).powi(7)).abs() < 1e-15);
        assert!((binom_pmf(2, 4, 0.5) - 0.375).abs() < 1e-15);
        assert_eq!(binom_pmf(5, 4, 0.5), 0.0);
    }

    #[test]
    fn binom_exact_rational_value() {
        // 120 * (3/10)^3 * (7/10)^7 = 0.266827932 exactly.
        assert!((binom_pmf(3, 10, 0.3) - 0.266827932).abs() < 1e-12);
    }

    #[test]
    fn binom_row_normalizes_at_large_n() {
        for &(n, q) in &[(100u32, 0.3), (10_000, 0.07), (10_000, 0.9)] {
            let total: f64 = binom_pmf_vec(n, q).iter().sum();
            assert!((total - 1.0).abs() < 1e-12, "n={n} q={q} total={total}");
        }
    }

    #[test]
    fn hypergeom_cases() {
        // Full overlap: all k drawn from the m = n marked elements.
        for j in 0..=3u32 {
            let v = hypergeom_pmf(j, 5, 5, 3);
            assert_eq!(v, if j == 3 { 1.0 } else { 0.0 });
        }
        assert!((hypergeom_pmf(0, 4, 2, 2) - 1.0 / 6.0).abs() < 1e-15);
        // C(3,1) C(3,1) / C(6,2) = 9/15.
        assert!((hypergeom_pmf(1, 6, 3, 2) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn hypergeom_support_sums_to_one() {
        let lf = LogFactorial::new(10_000);
        for &(n, m, k) in &[(10u32, 4u32, 7u32), (50, 20, 20), (10_000, 77, 143)] {
            let total: f64 = (0..=k.min(m)).map(|j| hypergeom_pmf_with(&lf, j, n, m, k)).sum();
            assert!((total - 1.0).abs() < 1e-12, "({n},{m},{k}) total={total}");
        }
    }

    #[test]
    fn ccdf_cases() {
        assert_eq!(binom_ccdf(1, 0, 1.0), 0.0);
        assert_eq!(binom_ccdf(1, 2, 1.0), 1.0);
        assert!((binom_ccdf(1, 2, 0.5) - 0.75).abs() < 1e-15);
        // P[Binom(3, 0.4) >= 2] = 3 * 0.16 * 0.6 + 0.064 = 0.352.
        assert!((binom_ccdf(2, 3, 0.4) - 0.352).abs() < 1e-15);
        assert_eq!(binom_ccdf(0, 5, 0.2), 1.0);
    }

    #[test]
    fn poisson_pmf_and_tail() {
        assert!((poisson_pmf(0, 1.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((poisson_tail(1, 1.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!((poisson_tail(2, 1.0) - (1.0 - 2.0 * (-1.0f64).exp())).abs() < 1e-15);
        assert_eq!(poisson_tail(3, 0.0), 0.0);
        assert_eq!(poisson_tail(0, 2.5), 1.0);
    }
}
