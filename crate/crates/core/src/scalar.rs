//! Scalar values and datatypes shared by the metadata model, the query
//! language and the catalog.

use std::fmt;

/// Datatype of a property. Datasets only carry these three kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Datatype {
    Real,
    Integer,
    Text,
}

impl Datatype {
    pub fn as_str(self) -> &'static str {
        match self {
            Datatype::Real => "real",
            Datatype::Integer => "integer",
            Datatype::Text => "text",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "real" => Some(Datatype::Real),
            "integer" => Some(Datatype::Integer),
            "text" => Some(Datatype::Text),
            _ => None,
        }
    }

    /// Column datatype name used in VO table descriptions.
    pub fn vo_name(self) -> &'static str {
        match self {
            Datatype::Real => "double",
            Datatype::Integer => "long",
            Datatype::Text => "char",
        }
    }

    pub fn is_numeric(self) -> bool {
        !matches!(self, Datatype::Text)
    }
}

impl fmt::Display for Datatype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A tagged scalar value.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Real(f64),
    Integer(i64),
    Text(String),
}

impl Scalar {
    pub fn datatype(&self) -> Datatype {
        match self {
            Scalar::Real(_) => Datatype::Real,
            Scalar::Integer(_) => Datatype::Integer,
            Scalar::Text(_) => Datatype::Text,
        }
    }

    /// Bitwise equality: reals compare by bit pattern, so `-0.0 != 0.0` and
    /// identical NaNs are equal.
    pub fn bit_eq(&self, other: &Scalar) -> bool {
        match (self, other) {
            (Scalar::Real(a), Scalar::Real(b)) => a.to_bits() == b.to_bits(),
            (a, b) => a == b,
        }
    }
}

/// Shortest decimal form of a finite real that parses back to the same bits.
pub fn format_real(v: f64) -> String {
    let mut buf = ryu::Buffer::new();
    buf.format_finite(v).to_owned()
}

/// Identifier grammar shared by property names and the query lexer:
/// a letter followed by letters, digits or underscores.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Words the query language reserves. Matching ignores case.
pub const RESERVED_WORDS: [&str; 4] = ["and", "or", "not", "between"];

pub fn is_reserved_word(s: &str) -> bool {
    RESERVED_WORDS.iter().any(|w| w.eq_ignore_ascii_case(s))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identifiers() {
        assert!(is_identifier("clump_mass"));
        assert!(is_identifier("a1"));
        assert!(!is_identifier("1a"));
        assert!(!is_identifier("_a"));
        assert!(!is_identifier(""));
        assert!(!is_identifier("a-b"));
    }

    #[test]
    fn reserved_any_case() {
        assert!(is_reserved_word("AND"));
        assert!(is_reserved_word("Between"));
        assert!(!is_reserved_word("android"));
    }

    #[test]
    fn real_formatting_is_shortest_roundtrip() {
        assert_eq!(format_real(100.0), "100.0");
        assert_eq!(format_real(1e5), "100000.0");
        assert_eq!(format_real(0.1), "0.1");
        for v in [1e300, -2.5e-3, f64::MIN_POSITIVE, 123456.789] {
            assert_eq!(format_real(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }
}
