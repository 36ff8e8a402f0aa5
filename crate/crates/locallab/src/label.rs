//! Label values used on the node and half-edge planes.
//!
//! A label is either an atomic symbol or a tuple of labels. Composed
//! problems use flat tuples with one component per layer; structured
//! atomic values (Turing triples, pointer outputs) are small tuples
//! themselves and are treated as opaque by the composition machinery,
//! which tracks component counts explicitly instead of inspecting shape.

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::de::{SeqAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A node or half-edge label.
///
/// Labels are copied pervasively when neighborhood fragments are extracted,
/// so both variants share their storage: cloning a label is a reference
/// count bump, not a deep copy.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Label {
    /// Atomic symbol, e.g. `T`, `Ch_L`, `accept`.
    Sym(Arc<str>),
    /// Tuple of labels, e.g. a per-layer output stack or a Turing triple.
    Tuple(Arc<Vec<Label>>),
}

impl Label {
    /// Atomic label from a string-ish value.
    pub fn sym(s: impl Into<String>) -> Self {
        Label::Sym(s.into().into())
    }

    /// Tuple label from parts.
    pub fn tuple(parts: impl IntoIterator<Item = Label>) -> Self {
        Label::Tuple(Arc::new(parts.into_iter().collect()))
    }

    /// The quiescent / "no label on this plane" symbol `⊥`.
    pub fn bot() -> Self {
        static CACHE: OnceLock<Label> = OnceLock::new();
        CACHE.get_or_init(|| Label::sym(BOT)).clone()
    }

    /// The composition sentinel `∅` marking a discarded later-layer slot.
    /// Distinct from `⊥`, which is itself a meaningful good-side output.
    pub fn null() -> Self {
        static CACHE: OnceLock<Label> = OnceLock::new();
        CACHE.get_or_init(|| Label::sym(NULL)).clone()
    }

    /// True if this is the atomic symbol `s`.
    pub fn is(&self, s: &str) -> bool {
        matches!(self, Label::Sym(v) if &**v == s)
    }

    pub fn is_bot(&self) -> bool {
        self.is(BOT)
    }

    pub fn is_null(&self) -> bool {
        self.is(NULL)
    }

    /// Component `i` of a label viewed as an `arity`-tuple. Arity 1 treats
    /// the label itself as its only component regardless of shape, so
    /// structured atomic labels survive un-inspected.
    pub fn component(&self, i: usize, arity: usize) -> &Label {
        if arity == 1 {
            debug_assert_eq!(i, 0);
            return self;
        }
        match self {
            Label::Tuple(parts) if parts.len() == arity => &parts[i],
            other => panic!("label {other} is not an {arity}-tuple"),
        }
    }

    /// Components of an `arity`-tuple as a slice-like vector (clones for
    /// arity 1 to keep a uniform return shape).
    pub fn components(&self, arity: usize) -> Vec<&Label> {
        (0..arity).map(|i| self.component(i, arity)).collect()
    }

    /// Concatenate two labels viewed as tuples of the given arities into a
    /// flat `(left_arity + right_arity)`-tuple.
    pub fn concat(left: &Label, left_arity: usize, right: &Label, right_arity: usize) -> Label {
        let mut parts: Vec<Label> = Vec::with_capacity(left_arity + right_arity);
        parts.extend(left.components(left_arity).into_iter().cloned());
        parts.extend(right.components(right_arity).into_iter().cloned());
        Label::tuple(parts)
    }
}

// Untagged on-disk shape: a symbol is a JSON string, a tuple a JSON array.
impl Serialize for Label {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Label::Sym(s) => serializer.serialize_str(s),
            Label::Tuple(parts) => parts.serialize(serializer),
        }
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct LabelVisitor;
        impl<'de> Visitor<'de> for LabelVisitor {
            type Value = Label;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a label: a string or an array of labels")
            }

            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<Label, E> {
                Ok(Label::sym(v))
            }

            fn visit_string<E: serde::de::Error>(self, v: String) -> Result<Label, E> {
                Ok(Label::sym(v))
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Label, A::Error> {
                let mut parts = Vec::with_capacity(seq.size_hint().unwrap_or(0));
                while let Some(p) = seq.next_element::<Label>()? {
                    parts.push(p);
                }
                Ok(Label::tuple(parts))
            }
        }
        deserializer.deserialize_any(LabelVisitor)
    }
}

/// Quiescent symbol.
pub const BOT: &str = "⊥";
/// Composition discard sentinel.
pub const NULL: &str = "∅";

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Sym(s) => f.write_str(s),
            Label::Tuple(parts) => {
                f.write_str("(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{p}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label::sym(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_round_trip_shapes() {
        let l = Label::tuple([Label::sym("T"), Label::bot(), Label::tuple([Label::sym("pointer"), Label::sym("L")])]);
        assert_eq!(l.to_string(), "(T,⊥,(pointer,L))");
    }

    #[test]
    fn serde_sym_is_string_and_tuple_is_array() {
        let l = Label::tuple([Label::sym("a"), Label::sym("b")]);
        assert_eq!(serde_json::to_string(&l).unwrap(), r#"["a","b"]"#);
        let s: Label = serde_json::from_str(r#""x""#).unwrap();
        assert_eq!(s, Label::sym("x"));
        let t: Label = serde_json::from_str(r#"["x",["y","z"]]"#).unwrap();
        assert_eq!(t, Label::tuple([Label::sym("x"), Label::tuple([Label::sym("y"), Label::sym("z")])]));
    }

    #[test]
    fn components_respect_declared_arity() {
        let triple = Label::tuple([Label::sym("0"), Label::sym("H"), Label::sym("q0")]);
        // Arity 1: the triple is one opaque component.
        assert_eq!(triple.component(0, 1), &triple);
        // Arity 3: individual parts.
        assert_eq!(triple.component(1, 3), &Label::sym("H"));
    }

    #[test]
    fn concat_flattens() {
        let a = Label::tuple([Label::sym("x"), Label::sym("y")]);
        let b = Label::sym("z");
        assert_eq!(
            Label::concat(&a, 2, &b, 1),
            Label::tuple([Label::sym("x"), Label::sym("y"), Label::sym("z")])
        );
    }
}
