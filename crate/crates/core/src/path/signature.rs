use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::scene::VertexClass;

/// Maximum number of vertices a signature can hold.
pub const MAX_SIGNATURE_LEN: usize = 16;

/// Camera-first sequence of vertex classes, packed two bits per vertex.
///
/// Ordering is the lexicographic order of the textual form (`"EDL" < "EDSL"`),
/// which is what partition selection uses to break ties.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature {
    bits: u32,
    len: u8,
}

#[inline]
fn code(c: VertexClass) -> u32 {
    match c {
        VertexClass::E => 0,
        VertexClass::D => 1,
        VertexClass::S => 2,
        VertexClass::L => 3,
    }
}

#[inline]
fn decode(v: u32) -> VertexClass {
    match v & 3 {
        0 => VertexClass::E,
        1 => VertexClass::D,
        2 => VertexClass::S,
        _ => VertexClass::L,
    }
}

impl Signature {
    pub const EMPTY: Signature = Signature { bits: 0, len: 0 };

    pub fn from_classes(classes: impl IntoIterator<Item = VertexClass>) -> Self {
        let mut s = Self::EMPTY;
        for c in classes {
            s = s.push(c);
        }
        s
    }

    #[inline]
    pub fn push(self, c: VertexClass) -> Self {
        assert!((self.len as usize) < MAX_SIGNATURE_LEN, "signature too long");
        Signature { bits: self.bits | (code(c) << (2 * self.len as u32)), len: self.len + 1 }
    }

    #[inline]
    pub fn len(self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(self, i: usize) -> VertexClass {
        assert!(i < self.len());
        decode(self.bits >> (2 * i as u32))
    }

    pub fn classes(self) -> impl Iterator<Item = VertexClass> {
        (0..self.len()).map(move |i| self.get(i))
    }

    /// Number of path segments (`len - 1`).
    #[inline]
    pub fn segments(self) -> usize {
        self.len().saturating_sub(1)
    }

    /// Index of the first diffuse vertex, if any.
    pub fn first_diffuse(self) -> Option<usize> {
        self.classes().position(|c| c == VertexClass::D)
    }

    /// Whether a run of at least two consecutive specular vertices occurs.
    pub fn has_specular_chain(self) -> bool {
        (1..self.len()).any(|i| self.get(i) == VertexClass::S && self.get(i - 1) == VertexClass::S)
    }

    pub fn contains(self, c: VertexClass) -> bool {
        self.classes().any(|x| x == c)
    }
}

impl Ord for Signature {
    fn cmp(&self, other: &Self) -> Ordering {
        self.classes()
            .map(VertexClass::as_char)
            .cmp(other.classes().map(VertexClass::as_char))
    }
}

impl PartialOrd for Signature {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in self.classes() {
            write!(f, "{}", c.as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Signature({self})")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseSignatureError(pub String);

impl fmt::Display for ParseSignatureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid signature `{}`", self.0)
    }
}

impl std::error::Error for ParseSignatureError {}

impl FromStr for Signature {
    type Err = ParseSignatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.len() > MAX_SIGNATURE_LEN {
            return Err(ParseSignatureError(s.into()));
        }
        let classes: Option<Vec<_>> = s.chars().map(VertexClass::from_char).collect();
        classes.map(Signature::from_classes).ok_or_else(|| ParseSignatureError(s.into()))
    }
}
