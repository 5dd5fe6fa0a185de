//! Large-layer-count limits: per-link Poisson rates under power-law parameter
//! scalings, the node regularity condition for asymptotic link independence,
//! limiting configuration probabilities, the uniform-scaling trichotomy, and
//! the finite-layer diagnostics for independent non-identical layers.

use num_rational::Rational64;

use crate::dist::poisson_tail;
use crate::error::{Error, Result};
use crate::graph::BaseGraph;
use crate::model::{LinkConfiguration, ModelParams, NonIdenticalParams};

/// Scaling exponents are exact rationals so comparisons against the critical
/// sum 1 never suffer float rounding.
pub type Exponent = Rational64;

/// Power-law parameter scalings `p_l ~ c_l M^(-alpha_l)`,
/// `q_i ~ d_i M^(-beta_i)` indexed by link and node.
#[derive(Debug, Clone)]
pub struct ScalingSpec {
    pub alpha: Vec<Exponent>,
    pub c: Vec<f64>,
    pub beta: Vec<Exponent>,
    pub d: Vec<f64>,
}

impl ScalingSpec {
    pub fn uniform(g: &BaseGraph, alpha: Exponent, c: f64, beta: Exponent, d: f64) -> Self {
        ScalingSpec {
            alpha: vec![alpha; g.num_links()],
            c: vec![c; g.num_links()],
            beta: vec![beta; g.num_nodes()],
            d: vec![d; g.num_nodes()],
        }
    }

    pub fn validate(&self, g: &BaseGraph) -> Result<()> {
        if self.alpha.len() != g.num_links() || self.c.len() != g.num_links() {
            return Err(Error::Validation("link scaling entries do not cover every link".into()));
        }
        if self.beta.len() != g.num_nodes() || self.d.len() != g.num_nodes() {
            return Err(Error::Validation("node scaling entries do not cover every node".into()));
        }
        let zero = Rational64::from_integer(0);
        if self.alpha.iter().any(|a| *a < zero) || self.beta.iter().any(|b| *b < zero) {
            return Err(Error::Validation("exponents must be non-negative".into()));
        }
        if self.c.iter().any(|&c| c <= 0.0) || self.d.iter().any(|&d| d <= 0.0) {
            return Err(Error::Validation("coefficients must be positive".into()));
        }
        Ok(())
    }

    /// Materialize the parameters at a finite layer count (clamped into
    /// (0, 1]); useful for convergence experiments against exact solvers.
    pub fn params_at(&self, layers: u32, threshold: u32) -> ModelParams {
        let m = layers as f64;
        let value = |coeff: f64, expo: &Exponent| -> f64 {
            let e = *expo.numer() as f64 / *expo.denom() as f64;
            (coeff * m.powf(-e)).min(1.0)
        };
        ModelParams {
            layers,
            threshold,
            p: self.alpha.iter().zip(&self.c).map(|(a, &c)| value(c, a)).collect(),
            q: self.beta.iter().zip(&self.d).map(|(b, &d)| value(d, b)).collect(),
        }
    }

    /// Uniform (alpha, c, beta, d) if every link and node agrees.
    pub fn as_uniform(&self) -> Option<(Exponent, f64, Exponent, f64)> {
        let alpha = *self.alpha.first()?;
        let c = *self.c.first()?;
        let beta = *self.beta.first()?;
        let d = *self.d.first()?;
        if self.alpha.iter().all(|a| *a == alpha)
            && self.c.iter().all(|&x| x == c)
            && self.beta.iter().all(|b| *b == beta)
            && self.d.iter().all(|&x| x == d)
        {
            Some((alpha, c, beta, d))
        } else {
            None
        }
    }
}

/// Limiting multiplicity rate of one link; infinity is a tag, never a float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinkRate {
    Finite(f64),
    Infinite,
}

impl LinkRate {
    pub fn as_finite(&self) -> Option<f64> {
        match self {
            LinkRate::Finite(v) => Some(*v),
            LinkRate::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, LinkRate::Infinite)
    }
}

/// Per-link limiting Poisson rates.
#[derive(Debug, Clone)]
pub struct PoissonLimit {
    pub lambda: Vec<LinkRate>,
}

impl PoissonLimit {
    /// Direct construction from known rates.
    pub fn from_rates(lambda: Vec<LinkRate>) -> Self {
        PoissonLimit { lambda }
    }
}

/// Rates induced by a scaling spec: the sum `alpha_l + beta_i + beta_j`
/// against 1 decides 0 / finite / infinite, compared in exact rationals.
pub fn poisson_lambda(spec: &ScalingSpec, g: &BaseGraph) -> Result<PoissonLimit> {
    spec.validate(g)?;
    let one = Rational64::from_integer(1);
    let lambda = g
        .links()
        .iter()
        .enumerate()
        .map(|(l, &(i, j))| {
            let total = spec.alpha[l] + spec.beta[i] + spec.beta[j];
            if total > one {
                LinkRate::Finite(0.0)
            } else if total == one {
                LinkRate::Finite(spec.c[l] * spec.d[i] * spec.d[j])
            } else {
                LinkRate::Infinite
            }
        })
        .collect();
    Ok(PoissonLimit { lambda })
}

/// A node failing the independence condition: exponent at least 1 while
/// touching two or more critical links.
#[derive(Debug, Clone)]
pub struct RegularityViolation {
    pub node: usize,
    pub beta: Exponent,
    pub critical_neighbors: Vec<usize>,
}

/// Independence requires `beta_k < 1` whenever node `k` has at least two
/// neighbors whose link sits exactly on the critical scaling manifold.
pub fn check_regularity(spec: &ScalingSpec, g: &BaseGraph) -> Vec<RegularityViolation> {
    let one = Rational64::from_integer(1);
    let mut violations = Vec::new();
    for k in 0..g.num_nodes() {
        let critical: Vec<usize> = g
            .neighbors(k)
            .iter()
            .copied()
            .filter(|&i| {
                let l = g.link_between(k, i).expect("adjacency is consistent");
                spec.alpha[l] + spec.beta[k] + spec.beta[i] == one
            })
            .collect();
        if critical.len() >= 2 && spec.beta[k] >= one {
            violations.push(RegularityViolation { node: k, beta: spec.beta[k], critical_neighbors: critical });
        }
    }
    violations
}

/// Limiting P[link active] for threshold `k`.
pub fn limit_link_active(rate: LinkRate, threshold: u32) -> f64 {
    match rate {
        LinkRate::Infinite => 1.0,
        LinkRate::Finite(lambda) => poisson_tail(threshold, lambda),
    }
}

/// Limiting configuration probability: product of per-link Poisson tails and
/// heads. Only meaningful when the regularity condition holds; see
/// [`limit_config_prob_checked`] for the gated variant.
pub fn limit_config_prob(x: &LinkConfiguration, limit: &PoissonLimit, threshold: u32) -> f64 {
    x.bits()
        .iter()
        .zip(&limit.lambda)
        .map(|(&active, &rate)| {
            let tail = limit_link_active(rate, threshold);
            if active {
                tail
            } else {
                1.0 - tail
            }
        })
        .product()
}

/// As [`limit_config_prob`], erroring out when the independence condition
/// fails (the product form is not the limit there).
pub fn limit_config_prob_checked(
    x: &LinkConfiguration,
    spec: &ScalingSpec,
    g: &BaseGraph,
    threshold: u32,
) -> Result<f64> {
    let violations = check_regularity(spec, g);
    if let Some(v) = violations.first() {
        return Err(Error::Validation(format!(
            "regularity violated at node {} (beta = {})",
            v.node, v.beta
        )));
    }
    Ok(limit_config_prob(x, &poisson_lambda(spec, g)?, threshold))
}

/// Limit shape of the merged network under uniform scaling.
#[derive(Debug, Clone, PartialEq)]
pub enum Regime {
    Empty,
    Full,
    ErdosRenyiLike { link_prob: f64 },
}

/// `alpha + 2 beta` against 1 decides empty / full / link-percolated.
pub fn trichotomy(alpha: Exponent, beta: Exponent, c: f64, d: f64, threshold: u32) -> Regime {
    let one = Rational64::from_integer(1);
    let total = alpha + beta + beta;
    if total > one {
        Regime::Empty
    } else if total < one {
        Regime::Full
    } else {
        Regime::ErdosRenyiLike { link_prob: poisson_tail(threshold, c * d * d) }
    }
}

/// Activation coefficient above which the limit network percolates, given
/// the base graph's bond-percolation threshold.
pub fn giant_component_threshold(p_c: f64) -> Result<f64> {
    if !(0.0 < p_c && p_c < 1.0) {
        return Err(Error::Validation(format!("p_c = {p_c} outside (0, 1)")));
    }
    Ok((-(1.0 - p_c).ln()).sqrt())
}

/// Independent-link line metrics in the limit: expected end-node cluster size
/// and expected active links for a line of `n` links.
pub fn limit_cluster_metrics(n: usize, rate: LinkRate, threshold: u32) -> (f64, f64) {
    let p_a = limit_link_active(rate, threshold);
    let cluster = if (1.0 - p_a).abs() < f64::EPSILON {
        (n + 1) as f64
    } else {
        (1.0 - p_a.powi(n as i32 + 1)) / (1.0 - p_a)
    };
    (cluster, n as f64 * p_a)
}

/// Finite-layer quantities whose limits drive the non-identical-layer
/// independence theorem: per-link sum and max of the per-layer link rates,
/// and the expected co-existence count for endpoint-sharing link pairs.
#[derive(Debug, Clone)]
pub struct OverlapDiagnostics {
    pub sum_r: Vec<f64>,
    pub max_r: Vec<f64>,
    /// (link, link, shared node, expected number of layers carrying both).
    pub overlap: Vec<(usize, usize, usize, f64)>,
}

pub fn nonidentical_diagnostics(params: &NonIdenticalParams, g: &BaseGraph) -> OverlapDiagnostics {
    let layers = params.layers() as usize;
    let e = g.num_links();
    let mut sum_r = vec![0.0f64; e];
    let mut max_r = vec![0.0f64; e];
    for m in 0..layers {
        for (l, &(i, j)) in g.links().iter().enumerate() {
            let r = params.p[m][l] * params.q[m][i] * params.q[m][j];
            sum_r[l] += r;
            max_r[l] = max_r[l].max(r);
        }
    }
    let mut overlap = Vec::new();
    for a in 0..e {
        for b in (a + 1)..e {
            let (i, j) = g.link(a);
            let (s, t) = g.link(b);
            let shared = [i, j].iter().copied().find(|&v| v == s || v == t);
            let Some(shared) = shared else { continue };
            let other_a = if i == shared { j } else { i };
            let other_b = if s == shared { t } else { s };
            let mut r = 0.0;
            for m in 0..layers {
                // Shared endpoint counted once.
                r += params.p[m][a]
                    * params.p[m][b]
                    * params.q[m][shared]
                    * params.q[m][other_a]
                    * params.q[m][other_b];
            }
            overlap.push((a, b, shared, r));
        }
    }
    OverlapDiagnostics { sum_r, max_r, overlap }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> Exponent {
        Rational64::new(n, d)
    }

    #[test]
    fn lambda_cases() {
        let g = BaseGraph::path(1);
        // Critical: 0 + 1/2 + 1/2 = 1 exactly.
        let spec = ScalingSpec::uniform(&g, rat(0, 1), 1.0, rat(1, 2), 0.8);
        let lim = poisson_lambda(&spec, &g).unwrap();
        assert_eq!(lim.lambda[0], LinkRate::Finite(0.8 * 0.8));

        let spec = ScalingSpec::uniform(&g, rat(1, 5), 1.0, rat(1, 2), 1.0);
        assert_eq!(poisson_lambda(&spec, &g).unwrap().lambda[0], LinkRate::Finite(0.0));

        let spec = ScalingSpec::uniform(&g, rat(0, 1), 1.0, rat(2, 5), 1.0);
        assert!(poisson_lambda(&spec, &g).unwrap().lambda[0].is_infinite());

        // Thirds hit the critical manifold exactly in rational arithmetic.
        let spec = ScalingSpec::uniform(&g, rat(1, 3), 2.0, rat(1, 3), 1.5);
        assert_eq!(
            poisson_lambda(&spec, &g).unwrap().lambda[0],
            LinkRate::Finite(2.0 * 1.5 * 1.5)
        );
    }

    #[test]
    fn regularity_violation_at_center() {
        let g = BaseGraph::path(2);
        let mut spec = ScalingSpec::uniform(&g, rat(0, 1), 1.0, rat(0, 1), 0.9);
        spec.beta[1] = rat(1, 1);
        let violations = check_regularity(&spec, &g);
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].node, 1);
        assert_eq!(violations[0].critical_neighbors.len(), 2);

        // All exponents below one: clean.
        let spec = ScalingSpec::uniform(&g, rat(0, 1), 1.0, rat(1, 2), 1.0);
        assert!(check_regularity(&spec, &g).is_empty());
    }

    #[test]
    fn regularity_needs_two_critical_links() {
        // Hub with one critical link: no violation regardless of the hub's exponent.
        let g = BaseGraph::star_with_branches(&[1, 1, 1]);
        let mut spec = ScalingSpec::uniform(&g, rat(0, 1), 1.0, rat(0, 1), 1.0);
        spec.beta[0] = rat(1, 1);
        // Make only the first link critical: alpha 0 + beta0 1 + beta1 0 = 1.
        spec.alpha[1] = rat(1, 2);
        spec.alpha[2] = rat(1, 2);
        assert!(check_regularity(&spec, &g).is_empty());
    }

    #[test]
    fn limit_config_product_form() {
        let g = BaseGraph::path(3);
        let d = 0.9f64;
        let spec = ScalingSpec::uniform(&g, rat(0, 1), 1.0, rat(1, 2), d);
        let lim = poisson_lambda(&spec, &g).unwrap();
        let lam = d * d;
        for mask in 0u64..8 {
            let x = LinkConfiguration::from_mask(mask, 3);
            let active = x.count_ones() as i32;
            let expect = (-lam * (3 - active) as f64).exp() * (1.0 - (-lam).exp()).powi(active);
            let got = limit_config_prob(&x, &lim, 1);
            assert!((got - expect).abs() < 1e-14);
        }
        let total: f64 = (0u64..8)
            .map(|m| limit_config_prob(&LinkConfiguration::from_mask(m, 3), &lim, 1))
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn limit_config_degenerate_rates() {
        let zero = PoissonLimit::from_rates(vec![LinkRate::Finite(0.0); 2]);
        assert_eq!(limit_config_prob(&LinkConfiguration::all_zeros(2), &zero, 1), 1.0);
        assert_eq!(limit_config_prob(&LinkConfiguration::all_ones(2), &zero, 1), 0.0);

        let inf = PoissonLimit::from_rates(vec![LinkRate::Infinite; 2]);
        assert_eq!(limit_config_prob(&LinkConfiguration::all_ones(2), &inf, 3), 1.0);

        // Single link, rate 1, threshold 2: tail beyond the first two terms.
        let lim = PoissonLimit::from_rates(vec![LinkRate::Finite(1.0)]);
        let on = limit_config_prob(&LinkConfiguration::all_ones(1), &lim, 2);
        assert!((on - (1.0 - 2.0 * (-1.0f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn checked_variant_gates_on_regularity() {
        let g = BaseGraph::path(2);
        let mut spec = ScalingSpec::uniform(&g, rat(0, 1), 1.0, rat(0, 1), 0.9);
        spec.beta[1] = rat(1, 1);
        let err = limit_config_prob_checked(&LinkConfiguration::all_zeros(2), &spec, &g, 1);
        assert!(err.is_err());
    }

    #[test]
    fn trichotomy_cases() {
        assert_eq!(trichotomy(rat(0, 1), rat(3, 5), 1.0, 1.0, 1), Regime::Empty);
        assert_eq!(trichotomy(rat(0, 1), rat(2, 5), 1.0, 1.0, 1), Regime::Full);
        match trichotomy(rat(0, 1), rat(1, 2), 1.0, 1.0, 1) {
            Regime::ErdosRenyiLike { link_prob } => {
                assert!((link_prob - (1.0 - (-1.0f64).exp())).abs() < 1e-14);
            }
            other => panic!("unexpected regime {other:?}"),
        }
    }

    #[test]
    fn giant_threshold_algebra() {
        let p_c = 1.0 - (-1.0f64).exp();
        assert!((giant_component_threshold(p_c).unwrap() - 1.0).abs() < 1e-12);
        assert!((giant_component_threshold(0.5).unwrap() - 0.5f64.ln().abs().sqrt()).abs() < 1e-12);
        assert!(giant_component_threshold(1e-12).unwrap() < 1e-5);
        assert!(giant_component_threshold(0.0).is_err());
        assert!(giant_component_threshold(1.0).is_err());
    }

    #[test]
    fn limit_line_metrics() {
        let (c1, _) = limit_cluster_metrics(1, LinkRate::Finite(1.0), 1);
        assert!((c1 - 1.632120559).abs() / 1.632120559 < 1e-6);
        let (_, l20) = limit_cluster_metrics(20, LinkRate::Finite(1.0), 1);
        assert!((l20 - 12.64241118).abs() / 12.64241118 < 1e-6);
        let (full, links) = limit_cluster_metrics(7, LinkRate::Infinite, 2);
        assert_eq!(full, 8.0);
        assert_eq!(links, 7.0);
    }

    #[test]
    fn diagnostics_identical_layers() {
        let g = BaseGraph::path(2);
        let layers = 6usize;
        let (p, q) = (0.8, 0.5);
        let params = NonIdenticalParams {
            threshold: 1,
            p: vec![vec![p; 2]; layers],
            q: vec![vec![q; 3]; layers],
        };
        let diag = nonidentical_diagnostics(&params, &g);
        let r = p * q * q;
        assert!((diag.sum_r[0] - layers as f64 * r).abs() < 1e-12);
        assert!((diag.max_r[0] - r).abs() < 1e-15);
        assert_eq!(diag.overlap.len(), 1);
        let (a, b, shared, value) = diag.overlap[0];
        assert_eq!((a, b, shared), (0, 1, 1));
        // Shared endpoint: sum of r^2 / q over layers.
        assert!((value - layers as f64 * r * r / q).abs() < 1e-12);
    }

    #[test]
    fn diagnostics_two_layer_toy() {
        let g = BaseGraph::path(1);
        let params = NonIdenticalParams {
            threshold: 1,
            p: vec![vec![0.1], vec![0.2]],
            q: vec![vec![1.0, 1.0], vec![1.0, 1.0]],
        };
        let diag = nonidentical_diagnostics(&params, &g);
        assert!((diag.sum_r[0] - 0.3).abs() < 1e-15);
        assert!((diag.max_r[0] - 0.2).abs() < 1e-15);
        assert!(diag.overlap.is_empty());
    }
}
