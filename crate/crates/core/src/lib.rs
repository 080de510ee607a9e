//! Newton polytopes of hypersurfaces from a homotopy-continuation oracle, and
//! tropical membership tests built on it.

pub mod numerics;
pub mod oracle;
pub mod poly;
pub mod polytope;
pub mod tracker;
pub mod tropical;
pub mod witness;

/// Exact rational number used for directions.
pub type Rational = num_rational::Ratio<i64>;

/// Serde for rational vectors as strings such as `"3/2"`.
pub(crate) mod rational_strings {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    use super::Rational;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|r| r.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        Vec::<String>::deserialize(d)?.iter().map(|t| t.parse().map_err(D::Error::custom)).collect()
    }
}
