//! The `--ideal` syntax: `unit`, `class:k`, or `prime:p[.k]^e*q[.l]^f*...`.

use std::collections::BTreeMap;
use std::fmt;

use quatgenus::field::{BaseField, FieldIdeal};
use quatgenus::linalg::int;
use quatgenus::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IdealSpec {
    /// Product of primes: `(p, index among primes above p) -> exponent`.
    Primes(BTreeMap<(u64, usize), i64>),
    /// Index into the narrow class representatives.
    NarrowClass(usize),
}

impl IdealSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |why: &str| Error::Parse(format!("ideal '{s}': {why}"));
        if s == "unit" {
            return Ok(IdealSpec::Primes(BTreeMap::new()));
        }
        if let Some(k) = s.strip_prefix("class:") {
            return k
                .parse()
                .map(IdealSpec::NarrowClass)
                .map_err(|_| bad("class index must be a non-negative integer"));
        }
        let body = s
            .strip_prefix("prime:")
            .ok_or_else(|| bad("expected unit, class:k or prime:..."))?;
        let mut factors = BTreeMap::new();
        for f in body.split('*') {
            let (base, e) = match f.split_once('^') {
                Some((b, e)) => (b, e.parse::<i64>().map_err(|_| bad("bad exponent"))?),
                None => (f, 1),
            };
            let (p, idx) = match base.split_once('.') {
                Some((p, i)) => (p, i.parse::<usize>().map_err(|_| bad("bad prime index"))?),
                None => (base, 0),
            };
            let p: u64 = p.parse().map_err(|_| bad("bad prime"))?;
            if p < 2 || !is_prime(p) {
                return Err(bad(&format!("{p} is not a rational prime")));
            }
            *factors.entry((p, idx)).or_insert(0) += e;
        }
        factors.retain(|_, e| *e != 0);
        Ok(IdealSpec::Primes(factors))
    }

    /// The fractional ideal this spec denotes in `k`.
    pub fn resolve(&self, k: &BaseField) -> Result<FieldIdeal> {
        match self {
            IdealSpec::NarrowClass(i) => {
                k.class_groups()
                    .narrow_reps
                    .get(*i)
                    .cloned()
                    .ok_or_else(|| {
                        Error::Parse(format!(
                            "narrow class {i} out of range (h+ = {})",
                            k.class_groups().h_plus
                        ))
                    })
            }
            IdealSpec::Primes(factors) => {
                let mut acc = k.unit_ideal();
                for (&(p, idx), &e) in factors {
                    let above = k.primes_above(&int(p as i64));
                    let pr = above.get(idx).ok_or_else(|| {
                        Error::Parse(format!(
                            "prime {p}.{idx} does not exist ({} prime(s) above {p})",
                            above.len()
                        ))
                    })?;
                    acc = k.ideal_mul(&acc, &k.ideal_pow(&pr.ideal, e));
                }
                Ok(acc)
            }
        }
    }
}

impl fmt::Display for IdealSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdealSpec::NarrowClass(i) => write!(f, "class:{i}"),
            IdealSpec::Primes(m) if m.is_empty() => write!(f, "unit"),
            IdealSpec::Primes(m) => {
                let parts: Vec<String> = m
                    .iter()
                    .map(|(&(p, idx), &e)| {
                        let mut s = p.to_string();
                        if idx != 0 {
                            s += &format!(".{idx}");
                        }
                        if e != 1 {
                            s += &format!("^{e}");
                        }
                        s
                    })
                    .collect();
                write!(f, "prime:{}", parts.join("*"))
            }
        }
    }
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}
