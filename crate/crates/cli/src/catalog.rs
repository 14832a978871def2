//! `name:params` shorthand for the built-in states.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tsallis_monogamy::qstate::{
    example3_state, example4_state, example5_state, generalized_w, generalized_w_standard, ghz, haar_random,
    random_mixed, w_state, State,
};
use tsallis_monogamy::scan::parse_scalar;
use tsallis_monogamy::{Error, Result};

pub const NAMES: &str = "w:N, ghz:N, generalized-w:θ,φ, generalized-w-std:θ,φ, example3:θ, example4, \
                         example5, haar:d1,d2,..., mixed:RANK:d1,d2,...";

fn numbers(text: &str, want: usize, spec: &str) -> Result<Vec<f64>> {
    let v = text.split(',').map(parse_scalar).collect::<Result<Vec<_>>>()?;
    if v.len() != want {
        return Err(Error::Parse(format!("'{spec}' needs {want} parameter(s)")));
    }
    Ok(v)
}

fn dims(text: &str, spec: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|d| match d.trim().parse::<usize>() {
            Ok(d) if d >= 2 => Ok(d),
            _ => Err(Error::Parse(format!("bad dimension '{d}' in '{spec}'"))),
        })
        .collect()
}

fn count(text: &str, spec: &str) -> Result<usize> {
    text.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad count '{text}' in '{spec}'")))
}

/// Builds a catalog state; random entries draw from `seed`.
pub fn build(spec: &str, seed: u64) -> Result<State> {
    let (name, params) = match spec.split_once(':') {
        Some((n, p)) => (n, Some(p)),
        None => (spec, None),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pure = |r: Result<_>| r.map(State::Pure);
    match (name, params) {
        ("w", Some(n)) => pure(w_state(count(n, spec)?)),
        ("ghz", Some(n)) => pure(ghz(count(n, spec)?)),
        ("generalized-w", Some(p)) => {
            let v = numbers(p, 2, spec)?;
            pure(generalized_w(v[0], v[1]))
        }
        ("generalized-w-std", Some(p)) => {
            let v = numbers(p, 2, spec)?;
            pure(generalized_w_standard(v[0], v[1]))
        }
        ("example3", Some(p)) => Ok(State::Pure(example3_state(numbers(p, 1, spec)?[0]))),
        ("example4", None) => Ok(State::Pure(example4_state())),
        ("example5", None) => Ok(State::Pure(example5_state())),
        ("haar", Some(d)) => pure(haar_random(&dims(d, spec)?, &mut rng)),
        ("mixed", Some(p)) => {
            let (rank, d) = p
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("'{spec}' must read mixed:RANK:d1,d2,...")))?;
            random_mixed(&dims(d, spec)?, count(rank, spec)?, &mut rng).map(State::Mixed)
        }
        _ => Err(Error::Parse(format!("unknown state '{spec}'; known: {NAMES}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names() {
        assert!(matches!(build("w:3", 0).unwrap(), State::Pure(_)));
        assert!(matches!(build("mixed:2:2,3", 1).unwrap(), State::Mixed(_)));
        assert_eq!(build("generalized-w:π/2,π/4", 0).unwrap().dims(), &[2, 2, 2]);
        assert_eq!(build("example3:0.785", 0).unwrap().dims(), &[4, 2, 2]);
        assert!(matches!(build("nope:1", 0), Err(Error::Parse(_))));
        assert!(matches!(build("w:x", 0), Err(Error::Parse(_))));
        assert!(matches!(build("w:9", 0), Err(Error::Domain(_))));
        assert!(matches!(build("generalized-w:1", 0), Err(Error::Parse(_))));
    }
}
