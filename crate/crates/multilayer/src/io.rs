//! Text formats: graph files, parameter files (identical and per-layer),
//! scaling files and configuration strings. Lines starting with `#` and blank
//! lines are ignored everywhere.
//!
//! Graph file: a header `n m`, then `m` lines `u v` with 0-based node ids.
//!
//! Parameter file: `M <int>`, `K <int>`, uniform `p <prob>` / `q <prob>`,
//! per-element overrides `p <u> <v> <prob>` and `q <i> <prob>`.
//!
//! Per-layer parameter file: `M`/`K` as above, uniform `p <prob>` /
//! `q <prob>`, per-layer overrides `p <layer> <u> <v> <prob>` and
//! `q <layer> <i> <prob>` with 1-based layer ids.
//!
//! Scaling file: `alpha`/`c` per link, `beta`/`d` per node, each either
//! uniform (`alpha <expo>`) or per element (`alpha <u> <v> <expo>`,
//! `beta <i> <expo>`). Exponents are exact rationals: `1/2`, `3`, or a
//! finite decimal like `0.25`.

use num_rational::Rational64;

use crate::asymptotic::ScalingSpec;
use crate::error::{Error, Result};
use crate::graph::BaseGraph;
use crate::model::{LinkConfiguration, ModelParams, NonIdenticalParams};

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(idx, line)| (idx + 1, line.trim()))
        .filter(|(_, line)| !line.is_empty() && !line.starts_with('#'))
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse(format!("line {line}: {}", msg.into()))
}

fn parse_num<T: std::str::FromStr>(line: usize, token: &str, what: &str) -> Result<T> {
    token
        .parse::<T>()
        .map_err(|_| parse_err(line, format!("expected {what}, got {token:?}")))
}

pub fn parse_graph(text: &str) -> Result<BaseGraph> {
    let mut lines = data_lines(text);
    let (header_no, header) = lines
        .next()
        .ok_or_else(|| Error::Parse("empty graph file".into()))?;
    let mut it = header.split_whitespace();
    let n: usize = parse_num(header_no, it.next().unwrap_or(""), "node count")?;
    let m: usize = parse_num(
        header_no,
        it.next()
            .ok_or_else(|| parse_err(header_no, "header needs `n m`"))?,
        "link count",
    )?;
    if it.next().is_some() {
        return Err(parse_err(header_no, "trailing tokens after `n m`"));
    }
    if n > 1_000_000 || m > 10_000_000 {
        return Err(Error::SizeCap(format!("graph header {n} {m} is unreasonably large")));
    }
    let mut links = Vec::with_capacity(m);
    for _ in 0..m {
        let (no, line) = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("expected {m} link lines")))?;
        let mut it = line.split_whitespace();
        let u: usize = parse_num(no, it.next().unwrap_or(""), "node id")?;
        let v: usize = parse_num(
            no,
            it.next().ok_or_else(|| parse_err(no, "link line needs `u v`"))?,
            "node id",
        )?;
        if it.next().is_some() {
            return Err(parse_err(no, "trailing tokens after `u v`"));
        }
        links.push((u, v));
    }
    if let Some((no, _)) = lines.next() {
        return Err(parse_err(no, "unexpected content after the last link"));
    }
    BaseGraph::new(n, links)
}

pub fn parse_params(text: &str, g: &BaseGraph) -> Result<ModelParams> {
    let mut layers: Option<u32> = None;
    let mut threshold = 1u32;
    let mut p = vec![1.0; g.num_links()];
    let mut q = vec![1.0; g.num_nodes()];
    for (no, line) in data_lines(text) {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match (tokens[0], tokens.len()) {
            ("M", 2) => layers = Some(parse_num(no, tokens[1], "layer count")?),
            ("K", 2) => threshold = parse_num(no, tokens[1], "threshold")?,
            ("p", 2) => p.fill(parse_num(no, tokens[1], "probability")?),
            ("q", 2) => q.fill(parse_num(no, tokens[1], "probability")?),
            ("p", 4) => {
                let u: usize = parse_num(no, tokens[1], "node id")?;
                let v: usize = parse_num(no, tokens[2], "node id")?;
                let link = lookup_link(no, g, u, v)?;
                p[link] = parse_num(no, tokens[3], "probability")?;
            }
            ("q", 3) => {
                let i: usize = parse_num(no, tokens[1], "node id")?;
                check_node(no, g, i)?;
                q[i] = parse_num(no, tokens[2], "probability")?;
            }
            _ => return Err(parse_err(no, format!("unrecognized line {line:?}"))),
        }
    }
    let layers = layers.ok_or_else(|| Error::Parse("parameter file must set M".into()))?;
    Ok(ModelParams { layers, threshold, p, q })
}

pub fn parse_layer_params(text: &str, g: &BaseGraph) -> Result<NonIdenticalParams> {
    let mut layers: Option<usize> = None;
    let mut threshold = 1u32;
    let mut p: Vec<Vec<f64>> = Vec::new();
    let mut q: Vec<Vec<f64>> = Vec::new();
    for (no, line) in data_lines(text) {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens[0] == "M" && tokens.len() == 2 {
            let m: usize = parse_num(no, tokens[1], "layer count")?;
            if !(1..=1_000_000).contains(&m) {
                return Err(parse_err(no, format!("layer count {m} out of range")));
            }
            layers = Some(m);
            p = vec![vec![1.0; g.num_links()]; m];
            q = vec![vec![1.0; g.num_nodes()]; m];
            continue;
        }
        if tokens[0] == "K" && tokens.len() == 2 {
            threshold = parse_num(no, tokens[1], "threshold")?;
            continue;
        }
        if layers.is_none() {
            return Err(parse_err(no, "M must come before per-layer entries"));
        }
        let m = layers.unwrap();
        match (tokens[0], tokens.len()) {
            ("p", 2) => {
                let v: f64 = parse_num(no, tokens[1], "probability")?;
                p.iter_mut().for_each(|row| row.fill(v));
            }
            ("q", 2) => {
                let v: f64 = parse_num(no, tokens[1], "probability")?;
                q.iter_mut().for_each(|row| row.fill(v));
            }
            ("p", 5) => {
                let layer: usize = parse_num(no, tokens[1], "layer id")?;
                if layer < 1 || layer > m {
                    return Err(parse_err(no, format!("layer {layer} outside 1..={m}")));
                }
                let u: usize = parse_num(no, tokens[2], "node id")?;
                let v: usize = parse_num(no, tokens[3], "node id")?;
                let link = lookup_link(no, g, u, v)?;
                p[layer - 1][link] = parse_num(no, tokens[4], "probability")?;
            }
            ("q", 4) => {
                let layer: usize = parse_num(no, tokens[1], "layer id")?;
                if layer < 1 || layer > m {
                    return Err(parse_err(no, format!("layer {layer} outside 1..={m}")));
                }
                let i: usize = parse_num(no, tokens[2], "node id")?;
                check_node(no, g, i)?;
                q[layer - 1][i] = parse_num(no, tokens[3], "probability")?;
            }
            _ => return Err(parse_err(no, format!("unrecognized line {line:?}"))),
        }
    }
    if layers.is_none() {
        return Err(Error::Parse("per-layer parameter file must set M".into()));
    }
    Ok(NonIdenticalParams { threshold, p, q })
}

pub fn parse_scaling(text: &str, g: &BaseGraph) -> Result<ScalingSpec> {
    let zero = Rational64::from_integer(0);
    let mut spec = ScalingSpec {
        alpha: vec![zero; g.num_links()],
        c: vec![1.0; g.num_links()],
        beta: vec![zero; g.num_nodes()],
        d: vec![1.0; g.num_nodes()],
    };
    for (no, line) in data_lines(text) {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match (tokens[0], tokens.len()) {
            ("alpha", 2) => spec.alpha.fill(parse_exponent_at(no, tokens[1])?),
            ("beta", 2) => spec.beta.fill(parse_exponent_at(no, tokens[1])?),
            ("c", 2) => spec.c.fill(parse_num(no, tokens[1], "coefficient")?),
            ("d", 2) => spec.d.fill(parse_num(no, tokens[1], "coefficient")?),
            ("alpha", 4) => {
                let u: usize = parse_num(no, tokens[1], "node id")?;
                let v: usize = parse_num(no, tokens[2], "node id")?;
                let link = lookup_link(no, g, u, v)?;
                spec.alpha[link] = parse_exponent_at(no, tokens[3])?;
            }
            ("c", 4) => {
                let u: usize = parse_num(no, tokens[1], "node id")?;
                let v: usize = parse_num(no, tokens[2], "node id")?;
                let link = lookup_link(no, g, u, v)?;
                spec.c[link] = parse_num(no, tokens[3], "coefficient")?;
            }
            ("beta", 3) => {
                let i: usize = parse_num(no, tokens[1], "node id")?;
                check_node(no, g, i)?;
                spec.beta[i] = parse_exponent_at(no, tokens[2])?;
            }
            ("d", 3) => {
                let i: usize = parse_num(no, tokens[1], "node id")?;
                check_node(no, g, i)?;
                spec.d[i] = parse_num(no, tokens[2], "coefficient")?;
            }
            _ => return Err(parse_err(no, format!("unrecognized line {line:?}"))),
        }
    }
    spec.validate(g)?;
    Ok(spec)
}

fn lookup_link(no: usize, g: &BaseGraph, u: usize, v: usize) -> Result<usize> {
    if u >= g.num_nodes() || v >= g.num_nodes() {
        return Err(parse_err(no, format!("node id in ({u}, {v}) out of range")));
    }
    g.link_between(u, v)
        .ok_or_else(|| parse_err(no, format!("({u}, {v}) is not a link of the graph")))
}

fn check_node(no: usize, g: &BaseGraph, i: usize) -> Result<()> {
    if i >= g.num_nodes() {
        return Err(parse_err(no, format!("node id {i} out of range")));
    }
    Ok(())
}

/// Exact rational from `a/b`, an integer, or a finite decimal.
pub fn parse_exponent(token: &str) -> Result<Rational64> {
    let bad = || Error::Parse(format!("cannot read {token:?} as a rational"));
    if let Some((num, den)) = token.split_once('/') {
        let n: i64 = num.trim().parse().map_err(|_| bad())?;
        let d: i64 = den.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Rational64::new(n, d));
    }
    if let Some((whole, frac)) = token.split_once('.') {
        if frac.len() > 15 || frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let w: i64 = if whole.is_empty() || whole == "-" {
            0
        } else {
            whole.parse().map_err(|_| bad())?
        };
        let scale = 10i64.pow(frac.len() as u32);
        let f: i64 = frac.parse().map_err(|_| bad())?;
        let numer = w.checked_mul(scale).and_then(|x| {
            if negative {
                x.checked_sub(f)
            } else {
                x.checked_add(f)
            }
        });
        return numer.map(|n| Rational64::new(n, scale)).ok_or_else(bad);
    }
    let n: i64 = token.parse().map_err(|_| bad())?;
    Ok(Rational64::from_integer(n))
}

fn parse_exponent_at(no: usize, token: &str) -> Result<Rational64> {
    parse_exponent(token).map_err(|e| parse_err(no, e.to_string()))
}

/// Configuration from `all-ones`, `all-zeros`, or a 0/1 string whose
/// character `l` is the state of link `l`.
pub fn parse_config(token: &str, num_links: usize) -> Result<LinkConfiguration> {
    match token {
        "all-ones" => return Ok(LinkConfiguration::all_ones(num_links)),
        "all-zeros" => return Ok(LinkConfiguration::all_zeros(num_links)),
        _ => {}
    }
    if token.len() != num_links {
        return Err(Error::Parse(format!(
            "configuration {token:?} has {} bits, expected {num_links}",
            token.len()
        )));
    }
    let mut bits = Vec::with_capacity(num_links);
    for ch in token.chars() {
        match ch {
            '0' => bits.push(false),
            '1' => bits.push(true),
            _ => return Err(Error::Parse(format!("configuration bit {ch:?} is not 0/1"))),
        }
    }
    Ok(LinkConfiguration::new(bits))
}

/// Floats are printed with 17 significant digits so tables round-trip.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_round_trip() {
        let g = parse_graph("# comment\n3 2\n0 1\n1 2\n").unwrap();
        assert_eq!(g.num_nodes(), 3);
        assert_eq!(g.num_links(), 2);
        assert_eq!(g.link(0), (0, 1));

        assert!(parse_graph("").is_err());
        assert!(parse_graph("3 2\n0 1\n").is_err());
        assert!(parse_graph("2 1\n0 1\n0 1 extra\n").is_err());
        assert!(parse_graph("2 1\n0 5\n").is_err());
    }

    #[test]
    fn params_with_overrides() {
        let g = parse_graph("3 2\n0 1\n1 2\n").unwrap();
        let text = "M 4\nK 2\np 0.9\nq 0.5\np 1 2 0.75\nq 0 0.25\n";
        let params = parse_params(text, &g).unwrap();
        assert_eq!(params.layers, 4);
        assert_eq!(params.threshold, 2);
        assert_eq!(params.p, vec![0.9, 0.75]);
        assert_eq!(params.q, vec![0.25, 0.5, 0.5]);

        assert!(parse_params("K 1\n", &g).is_err());
        assert!(parse_params("M 2\np 0 2 0.5\n", &g).is_err());
    }

    #[test]
    fn layer_params_with_overrides() {
        let g = parse_graph("2 1\n0 1\n").unwrap();
        let text = "M 2\nK 1\np 0.9\nq 0.8\np 2 0 1 0.1\nq 1 0 0.3\n";
        let params = parse_layer_params(text, &g).unwrap();
        assert_eq!(params.layers(), 2);
        assert_eq!(params.p, vec![vec![0.9], vec![0.1]]);
        assert_eq!(params.q[0], vec![0.3, 0.8]);
        assert!(parse_layer_params("p 0.5\nM 2\n", &g).is_err());
        assert!(parse_layer_params("M 2\np 3 0 1 0.5\n", &g).is_err());
    }

    #[test]
    fn scaling_file() {
        let g = parse_graph("3 2\n0 1\n1 2\n").unwrap();
        let text = "alpha 0\nbeta 1/2\nd 1.5\nbeta 1 0.25\nc 0 1 2\n";
        let spec = parse_scaling(text, &g).unwrap();
        assert_eq!(spec.beta[0], Rational64::new(1, 2));
        assert_eq!(spec.beta[1], Rational64::new(1, 4));
        assert_eq!(spec.c, vec![2.0, 1.0]);
        assert_eq!(spec.d, vec![1.5; 3]);
        assert!(parse_scaling("alpha -1\n", &g).is_err());
    }

    #[test]
    fn exponent_forms() {
        assert_eq!(parse_exponent("1/2").unwrap(), Rational64::new(1, 2));
        assert_eq!(parse_exponent("3").unwrap(), Rational64::from_integer(3));
        assert_eq!(parse_exponent("0.25").unwrap(), Rational64::new(1, 4));
        assert_eq!(parse_exponent("1.5").unwrap(), Rational64::new(3, 2));
        assert!(parse_exponent("1/0").is_err());
        assert!(parse_exponent("abc").is_err());
        assert!(parse_exponent("0.12x").is_err());
    }

    #[test]
    fn config_strings() {
        let x = parse_config("1011", 4).unwrap();
        assert_eq!(x.to_mask(), Some(0b1101));
        assert_eq!(parse_config("all-ones", 3).unwrap().count_ones(), 3);
        assert_eq!(parse_config("all-zeros", 3).unwrap().count_ones(), 0);
        assert!(parse_config("10", 3).is_err());
        assert!(parse_config("10x", 3).is_err());
    }

    #[test]
    fn float_formatting_has_17_digits() {
        let s = format_float(4.163106496);
        assert!(s.starts_with("4.163106496"));
        let parsed: f64 = s.parse().unwrap();
        assert_eq!(parsed, 4.163106496);
    }
}
