//! `Ratio<i64>` as `"a/b"` (or `"a"` when integral).

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serializer};

pub fn to_string(r: &Ratio<i64>) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse(s: &str) -> Option<Ratio<i64>> {
    match s.split_once('/') {
        Some((a, b)) => {
            let n: i64 = a.trim().parse().ok()?;
            let d: i64 = b.trim().parse().ok()?;
            (d != 0).then(|| Ratio::new(n, d))
        }
        None => Some(Ratio::from_integer(s.trim().parse().ok()?)),
    }
}

pub fn serialize<S: Serializer>(r: &Ratio<i64>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&to_string(r))
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Ratio<i64>, D::Error> {
    let s = String::deserialize(d)?;
    parse(&s).ok_or_else(|| serde::de::Error::custom(format!("bad rational {s:?}")))
}
