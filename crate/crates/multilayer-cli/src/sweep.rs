//! Sweep syntax shared by the subcommands: `start..stop`, `start..stop..step`,
//! a comma list, or a single value. Ranges are inclusive.

pub fn parse_u32(s: &str) -> Result<Vec<u32>, String> {
    if let Some((range, step)) = split_stepped(s) {
        let (lo, hi) = parse_bounds::<u32>(range)?;
        let step: u32 = parse_one(step)?;
        if step == 0 {
            return Err("step must be positive".into());
        }
        return Ok((lo..=hi).step_by(step as usize).collect());
    }
    if let Some((lo, hi)) = s.split_once("..") {
        let (lo, hi): (u32, u32) = (parse_one(lo)?, parse_one(hi)?);
        if lo > hi {
            return Err(format!("empty range {s}"));
        }
        return Ok((lo..=hi).collect());
    }
    s.split(',').map(parse_one).collect()
}

pub fn parse_f64(s: &str) -> Result<Vec<f64>, String> {
    if let Some((range, step)) = split_stepped(s) {
        let (lo, hi) = parse_bounds::<f64>(range)?;
        let step: f64 = parse_one(step)?;
        if step <= 0.0 {
            return Err("step must be positive".into());
        }
        let mut out = Vec::new();
        let mut i = 0u64;
        loop {
            let v = lo + step * i as f64;
            if v > hi + step * 1e-9 {
                break;
            }
            out.push(v.min(hi));
            i += 1;
        }
        return Ok(out);
    }
    if s.contains("..") {
        return Err(format!("float range {s} needs an explicit step (lo..hi..step)"));
    }
    s.split(',').map(parse_one).collect()
}

fn split_stepped(s: &str) -> Option<(&str, &str)> {
    // lo..hi..step: split at the second "..".
    let first = s.find("..")?;
    let rest = &s[first + 2..];
    let second = rest.find("..")?;
    Some((&s[..first + 2 + second], &rest[second + 2..]))
}

fn parse_bounds<T: std::str::FromStr>(s: &str) -> Result<(T, T), String> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| format!("expected lo..hi in {s}"))?;
    Ok((parse_one(lo)?, parse_one(hi)?))
}

fn parse_one<T: std::str::FromStr>(s: &str) -> Result<T, String> {
    s.trim()
        .parse::<T>()
        .map_err(|_| format!("cannot parse {s:?} as a number"))
}
