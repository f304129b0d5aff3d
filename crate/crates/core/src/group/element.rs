use std::fmt;

use smallvec::SmallVec;

/// Coordinate storage; six inline slots cover UT(4) without spilling.
pub type Coords = SmallVec<[i64; 6]>;

/// A group element as a tuple of canonical coordinates.
///
/// Elements do not carry their parent; sets ([`crate::GSet`]) and group
/// handles ([`crate::Group`]) do. The derived ordering is numeric
/// lexicographic order on coordinates and is the canonical scan order used
/// for every tie-break in the crate.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element(pub Coords);

impl Element {
    pub fn new(coords: &[i64]) -> Self {
        Element(SmallVec::from_slice(coords))
    }

    pub fn zeros(arity: usize) -> Self {
        Element(SmallVec::from_elem(0, arity))
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl From<Vec<i64>> for Element {
    fn from(v: Vec<i64>) -> Self {
        Element(SmallVec::from_vec(v))
    }
}

impl From<&[i64]> for Element {
    fn from(v: &[i64]) -> Self {
        Element::new(v)
    }
}

/// Heisenberg element labelled (x-entry, y-entry, corner), i.e. the matrix
/// `[[1,a,c],[0,1,b],[0,0,1]]`, stored in row-major order `(a, c, b)`.
pub fn heis(a: i64, b: i64, c: i64) -> Element {
    Element::new(&[a, c, b])
}
