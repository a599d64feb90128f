//! Rationals serialised as `"p/q"` strings (or `"p"` when integral).

use num_rational::Ratio;
use serde::{de::Error, Deserialize, Deserializer, Serializer};
use std::fmt::Display;
use std::str::FromStr;

pub fn serialize<T, S>(r: &Ratio<T>, s: S) -> Result<S::Ok, S::Error>
where
    T: Clone + num_integer::Integer + Display,
    S: Serializer,
{
    s.collect_str(r)
}

pub fn deserialize<'de, T, D>(d: D) -> Result<Ratio<T>, D::Error>
where
    T: Clone + num_integer::Integer + FromStr,
    D: Deserializer<'de>,
{
    let s = String::deserialize(d)?;
    let (num, den) = match s.split_once('/') {
        Some((n, q)) => (n.trim(), q.trim()),
        None => (s.trim(), "1"),
    };
    let num = num.parse::<T>().map_err(|_| D::Error::custom("bad numerator"))?;
    let den = den.parse::<T>().map_err(|_| D::Error::custom("bad denominator"))?;
    if den.is_zero() {
        return Err(D::Error::custom("zero denominator"));
    }
    Ok(Ratio::new(num, den))
}

pub mod vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<T, S>(v: &[Ratio<T>], s: S) -> Result<S::Ok, S::Error>
    where
        T: Clone + num_integer::Integer + Display,
        S: Serializer,
    {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&r.to_string())?;
        }
        seq.end()
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<Vec<Ratio<T>>, D::Error>
    where
        T: Clone + num_integer::Integer + FromStr,
        D: Deserializer<'de>,
    {
        let raw = Vec::<String>::deserialize(d)?;
        raw.into_iter()
            .map(|s| {
                let de: serde::de::value::StringDeserializer<D::Error> =
                    serde::de::IntoDeserializer::into_deserializer(s);
                super::deserialize(de)
            })
            .collect()
    }
}
