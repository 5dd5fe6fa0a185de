//! Configuration law, cluster-size and active-link generating functions for a
//! line of `n` links under uniform node activation `q`, no link thinning and
//! union merge (threshold 1).
//!
//! Everything is driven by one family of polynomials `P_k(q)` and the derived
//! per-layer factors `base(j) = 1 - (j-1) q^2 + P_j(q)`: `base(j)^M` is the
//! probability that a line of `j - 1` links has no active link.

use crate::dist::binom_pmf_vec;
use crate::error::{Error, Result};
use crate::model::LinkConfiguration;

/// Line instance: `n` links (`n + 1` nodes), activation probability `q`,
/// `layers` merged layers. Node positions are 1-based along the line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSpec {
    pub n: usize,
    pub q: f64,
    pub layers: u32,
}

impl LineSpec {
    pub fn new(n: usize, q: f64, layers: u32) -> Result<Self> {
        if n < 1 {
            return Err(Error::Validation("a line needs at least one link".into()));
        }
        if layers < 1 {
            return Err(Error::Validation("at least one layer is required".into()));
        }
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Validation(format!("q = {q} outside [0, 1]")));
        }
        Ok(LineSpec { n, q, layers })
    }

    fn m(&self) -> i32 {
        self.layers as i32
    }

    /// Degenerate activation handled by explicit limits instead of the
    /// recursions: q = 0 leaves everything inactive, q = 1 everything active.
    fn degenerate(&self) -> Option<bool> {
        if self.q <= 0.0 {
            Some(false)
        } else if self.q >= 1.0 {
            Some(true)
        } else {
            None
        }
    }
}

/// Values `P_1(q) .. P_N(q)` of the recursion
/// `P_k = (1-q) P_{k-1} + q (1-q) P_{k-2} + q^3 + (k-3) q^4`, `P_1 = P_2 = 0`.
#[derive(Debug, Clone)]
pub struct PolyPTable {
    values: Vec<f64>,
}

impl PolyPTable {
    /// `P_k(q)`; `k` is 1-based.
    pub fn value(&self, k: usize) -> f64 {
        self.values[k - 1]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn poly_p_table(q: f64, n_max: usize) -> PolyPTable {
    assert!(n_max >= 1);
    let qbar = 1.0 - q;
    let q3 = q * q * q;
    let q4 = q3 * q;
    let mut values = vec![0.0; n_max];
    for k in 3..=n_max {
        values[k - 1] =
            qbar * values[k - 2] + q * qbar * values[k - 3] + q3 + (k as f64 - 3.0) * q4;
    }
    PolyPTable { values }
}

/// Shared per-instance tables: `base[j]` and `base[j]^M` for `j = 0..=max_j`,
/// with `base[0] = 1` by convention.
struct Tables {
    base: Vec<f64>,
    base_pow: Vec<f64>,
}

impl Tables {
    fn build(spec: &LineSpec, max_j: usize) -> Tables {
        let p = poly_p_table(spec.q, max_j.max(1));
        let q2 = spec.q * spec.q;
        let mut base = vec![1.0; max_j + 1];
        for j in 1..=max_j {
            base[j] = 1.0 - (j as f64 - 1.0) * q2 + p.value(j);
        }
        let base_pow = base.iter().map(|b| b.powi(spec.m())).collect();
        Tables { base, base_pow }
    }

    /// P[line of k links all inactive] = base(k+1)^M.
    fn all_zero(&self, k: usize) -> f64 {
        self.base_pow[k + 1]
    }

    /// Same, given the line's last node sits in `m` layers.
    fn all_zero_given(&self, spec: &LineSpec, k: usize, m: u32) -> f64 {
        if k == 0 {
            return 1.0;
        }
        let qbar = 1.0 - spec.q;
        qbar.powi(m as i32)
            * self.base[k - 1].powi(m as i32)
            * self.base[k].powi(spec.m() - m as i32)
    }
}

/// P[all `n` links inactive | last node in `m` layers].
pub fn q_all_zero_given_m(n: usize, m: u32, spec: &LineSpec) -> Result<f64> {
    if n < 1 {
        return Err(Error::Validation("n must be at least 1".into()));
    }
    if m > spec.layers {
        return Err(Error::Validation(format!("m = {m} exceeds layer count {}", spec.layers)));
    }
    match spec.degenerate() {
        Some(false) => Ok(1.0),
        Some(true) => Ok(0.0),
        None => Ok(Tables::build(spec, n).all_zero_given(spec, n, m)),
    }
}

/// P[all `n` links inactive].
pub fn q_all_zero(n: usize, spec: &LineSpec) -> Result<f64> {
    if n < 1 {
        return Err(Error::Validation("n must be at least 1".into()));
    }
    match spec.degenerate() {
        Some(false) => Ok(1.0),
        Some(true) => Ok(0.0),
        None => Ok(Tables::build(spec, n + 1).all_zero(n)),
    }
}

/// Expansion coefficients for one configuration (`h`) together with the two
/// generic columns `h_hat[b]` used by the cluster-size expansion, which
/// correspond to the configurations `(b, 1, 1, ...)`.
#[derive(Debug, Clone)]
pub struct HCoefficients {
    pub h: Vec<f64>,
    pub h_hat: [Vec<f64>; 2],
}

fn h_from_tables(x: &LinkConfiguration, tables: &Tables) -> Vec<f64> {
    let n = x.len();
    let sign = |l: usize| if x.get(l - 1) { -1.0 } else { 1.0 };
    let mut h = vec![0.0; n + 1];
    h[0] = 1.0;
    if n >= 1 {
        h[1] = if x.get(0) { 1.0 } else { 0.0 };
    }
    for j in 2..=n {
        if !x.get(j - 1) {
            continue;
        }
        let mut acc = 0.0;
        let mut prod = 1.0; // product of signs over l = r+1 ..= j-1
        for r in (0..j).rev() {
            acc += tables.base_pow[j - r] * h[r] * prod;
            if r > 0 {
                prod *= sign(r);
            }
        }
        h[j] = acc;
    }
    h
}

fn h_hat_from_tables(b: usize, n: usize, tables: &Tables) -> Vec<f64> {
    let mut hh = vec![0.0; n + 1];
    hh[0] = 1.0;
    if n >= 1 {
        hh[1] = b as f64;
    }
    for j in 2..=n {
        let lead = if (j - b) % 2 == 0 { 1.0 } else { -1.0 };
        let mut acc = lead * tables.base_pow[j];
        for r in 1..j {
            let s = if (j - r - 1) % 2 == 0 { 1.0 } else { -1.0 };
            acc += s * tables.base_pow[j - r] * hh[r];
        }
        hh[j] = acc;
    }
    hh
}

pub fn h_coefficients(x: &LinkConfiguration, spec: &LineSpec) -> Result<HCoefficients> {
    if x.len() != spec.n {
        return Err(Error::Validation(format!(
            "configuration has {} bits for a line of {} links",
            x.len(),
            spec.n
        )));
    }
    let tables = Tables::build(spec, spec.n);
    Ok(HCoefficients {
        h: h_from_tables(x, &tables),
        h_hat: [
            h_hat_from_tables(0, spec.n, &tables),
            h_hat_from_tables(1, spec.n, &tables),
        ],
    })
}

fn config_prob_inner(
    x: &LinkConfiguration,
    tables: &Tables,
    all_zero: impl Fn(usize) -> f64,
) -> f64 {
    let n = x.len();
    let sign = |l: usize| if x.get(l - 1) { -1.0 } else { 1.0 };
    let h = h_from_tables(x, tables);
    let mut acc = 0.0;
    let mut prod = 1.0; // product of signs over l = j+1 ..= n
    for j in (0..=n).rev() {
        acc += h[j] * all_zero(n - j) * prod;
        if j > 0 {
            prod *= sign(j);
        }
    }
    acc.clamp(0.0, 1.0)
}

/// P[links in state `x` | last node in `m` layers].
pub fn config_prob_given_m(x: &LinkConfiguration, m: u32, spec: &LineSpec) -> Result<f64> {
    if x.len() != spec.n {
        return Err(Error::Validation("configuration length mismatch".into()));
    }
    if m > spec.layers {
        return Err(Error::Validation(format!("m = {m} exceeds layer count {}", spec.layers)));
    }
    if let Some(active) = spec.degenerate() {
        let matches = x.bits().iter().all(|&b| b == active);
        return Ok(if matches { 1.0 } else { 0.0 });
    }
    let tables = Tables::build(spec, spec.n);
    Ok(config_prob_inner(x, &tables, |k| tables.all_zero_given(spec, k, m)))
}

/// P[links in state `x`].
pub fn config_prob(x: &LinkConfiguration, spec: &LineSpec) -> Result<f64> {
    if x.len() != spec.n {
        return Err(Error::Validation("configuration length mismatch".into()));
    }
    if let Some(active) = spec.degenerate() {
        let matches = x.bits().iter().all(|&b| b == active);
        return Ok(if matches { 1.0 } else { 0.0 });
    }
    let tables = Tables::build(spec, spec.n + 1);
    Ok(config_prob_inner(x, &tables, |k| tables.all_zero(k)))
}

/// P[C = c] for the component of the line's end node, sizes `c = 1..=n+1`
/// laid out at index `c - 1`. Size `c` means the last `c - 1` links are
/// active and the next one inactive.
fn cluster_dist_inner(
    n: usize,
    h_hat: &[Vec<f64>; 2],
    all_zero: &impl Fn(usize) -> f64,
) -> Vec<f64> {
    if n == 0 {
        return vec![1.0];
    }
    let mut out = vec![0.0; n + 1];
    out[0] = all_zero(1);
    // Sizes 2..=n: trailing run of i-1 active links capped by an inactive one.
    for i in 2..=n {
        let mut acc = if (i - 1) % 2 == 0 { all_zero(i) } else { -all_zero(i) };
        for j in 1..=i {
            let s = if (i - j) % 2 == 0 { 1.0 } else { -1.0 };
            acc += s * h_hat[0][j] * all_zero(i - j);
        }
        out[i - 1] = acc.clamp(0.0, 1.0);
    }
    // Size n+1: every link active.
    let mut acc = 0.0;
    for j in 0..=n {
        let s = if (n - j) % 2 == 0 { 1.0 } else { -1.0 };
        acc += s * h_hat[1][j] * all_zero(n - j);
    }
    out[n] = acc.clamp(0.0, 1.0);
    out
}

/// Distribution of the end node's component size over `1..=n+1`.
pub fn cluster_size_distribution(n: usize, spec: &LineSpec) -> Vec<f64> {
    match spec.degenerate() {
        Some(false) => {
            let mut out = vec![0.0; n + 1];
            out[0] = 1.0;
            return out;
        }
        Some(true) => {
            let mut out = vec![0.0; n + 1];
            out[n] = 1.0;
            return out;
        }
        None => {}
    }
    let tables = Tables::build(spec, n + 1);
    let h_hat = [
        h_hat_from_tables(0, n, &tables),
        h_hat_from_tables(1, n, &tables),
    ];
    cluster_dist_inner(n, &h_hat, &|k| tables.all_zero(k))
}

/// Conditional pgf `E[z^C | last node in m layers]` of the end node's
/// component size in a line of `n` links; `n = 0` gives `z`.
pub fn cluster_pgf_right(n: usize, m: u32, z: f64, spec: &LineSpec) -> Result<f64> {
    if m > spec.layers {
        return Err(Error::Validation(format!("m = {m} exceeds layer count {}", spec.layers)));
    }
    match spec.degenerate() {
        Some(false) => return Ok(z),
        Some(true) => return Ok(z.powi(n as i32 + 1)),
        None => {}
    }
    let tables = Tables::build(spec, n.max(1));
    let h_hat = [
        h_hat_from_tables(0, n, &tables),
        h_hat_from_tables(1, n, &tables),
    ];
    let dist = cluster_dist_inner(n, &h_hat, &|k| tables.all_zero_given(spec, k, m));
    Ok(pgf_value(&dist, z))
}

fn pgf_value(dist: &[f64], z: f64) -> f64 {
    let mut acc = 0.0;
    let mut zc = z;
    for &p in dist {
        acc += p * zc;
        zc *= z;
    }
    acc
}

/// pgf of the component size of node `i` (1-based position) in a line of `n`
/// links. Splits at node `i` into two conditionally independent arms.
pub fn cluster_pgf(n: usize, i: usize, z: f64, spec: &LineSpec) -> Result<f64> {
    if i < 1 || i > n + 1 {
        return Err(Error::Validation(format!("node position {i} outside 1..={}", n + 1)));
    }
    if z == 0.0 {
        return Err(Error::Validation("pgf is evaluated with z != 0".into()));
    }
    match spec.degenerate() {
        Some(false) => return Ok(z),
        Some(true) => return Ok(z.powi(n as i32 + 1)),
        None => {}
    }
    let (left, right) = (i - 1, n + 1 - i);
    let tables = Tables::build(spec, n.max(1) + 1);
    let max_arm = left.max(right);
    let h_hat = [
        h_hat_from_tables(0, max_arm, &tables),
        h_hat_from_tables(1, max_arm, &tables),
    ];
    let weights = binom_pmf_vec(spec.layers, spec.q);
    let mut acc = 0.0;
    for (m, &w) in weights.iter().enumerate() {
        let given = |k: usize| tables.all_zero_given(spec, k, m as u32);
        let left_pgf = pgf_value(&cluster_dist_inner(left, &h_hat, &given), z);
        let right_pgf = pgf_value(&cluster_dist_inner(right, &h_hat, &given), z);
        acc += w * left_pgf * right_pgf;
    }
    Ok(acc / z)
}

/// E[component size of node `i`] (1-based position) in a line of `n` links.
pub fn expected_cluster_size(n: usize, i: usize, spec: &LineSpec) -> Result<f64> {
    if i < 1 || i > n + 1 {
        return Err(Error::Validation(format!("node position {i} outside 1..={}", n + 1)));
    }
    let arm_mean = |k: usize| -> f64 {
        cluster_size_distribution(k, spec)
            .iter()
            .enumerate()
            .map(|(idx, &p)| (idx + 1) as f64 * p)
            .sum()
    };
    Ok(arm_mean(i - 1) + arm_mean(n + 1 - i) - 1.0)
}

/// The mixing operator `F`: expectation of `values[I]` with
/// `I ~ Binom(M - m, q)`, the number of free layers the next node joins.
pub fn binomial_mix(values: &[f64], m: u32, spec: &LineSpec) -> f64 {
    let rest = spec.layers - m;
    let row = binom_pmf_vec(rest, spec.q);
    (0..=rest as usize).map(|i| row[i] * values[i]).sum()
}

/// The mixing operator `G`: expectation of `values[I + J]` restricted to
/// `J >= 1`, with `J ~ Binom(m, q)` shared layers and `I ~ Binom(M - m, q)`
/// free layers. Zero for `m = 0`.
pub fn binomial_mix_shared(values: &[f64], m: u32, spec: &LineSpec) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let rest = spec.layers - m;
    let row_rest = binom_pmf_vec(rest, spec.q);
    let row_shared = binom_pmf_vec(m, spec.q);
    let mut acc = 0.0;
    for j in 1..=m as usize {
        let mut inner = 0.0;
        for i in 0..=rest as usize {
            inner += row_rest[i] * values[i + j];
        }
        acc += row_shared[j] * inner;
    }
    acc
}

/// pgf of the number of active links in a line of `n` links, by the
/// conditional recursion over the shared-layer count of the moving endpoint.
pub fn active_links_pgf(n: usize, z: f64, spec: &LineSpec) -> Result<f64> {
    if n < 1 {
        return Err(Error::Validation("n must be at least 1".into()));
    }
    match spec.degenerate() {
        Some(false) => return Ok(1.0),
        Some(true) => return Ok(z.powi(n as i32)),
        None => {}
    }
    let m_total = spec.layers;
    let qbar = 1.0 - spec.q;
    let mut cond: Vec<f64> = (0..=m_total)
        .map(|m| {
            let miss = qbar.powi(m as i32);
            miss + z * (1.0 - miss)
        })
        .collect();
    for _ in 2..=n {
        let next: Vec<f64> = (0..=m_total)
            .map(|m| {
                qbar.powi(m as i32) * binomial_mix(&cond, m, spec)
                    + z * binomial_mix_shared(&cond, m, spec)
            })
            .collect();
        cond = next;
    }
    let weights = binom_pmf_vec(m_total, spec.q);
    Ok(weights.iter().zip(&cond).map(|(w, v)| w * v).sum())
}

/// E[number of active links] = n (1 - (1 - q^2)^M).
pub fn expected_active_links(n: usize, spec: &LineSpec) -> f64 {
    n as f64 * (1.0 - (1.0 - spec.q * spec.q).powi(spec.m()))
}
