//! Concrete group backends: finite/free abelian groups, unitriangular
//! matrix groups over `Z` or `Z/m`, and flat direct products of those.

use std::fmt;
use std::str::FromStr;

use super::element::{Coords, Element};
use crate::error::{Error, Result};

/// Moduli above this bound are rejected so products of residues fit in `i64`.
pub const MAX_MODULUS: u64 = 1 << 28;
/// Largest supported unitriangular matrix size.
pub const MAX_MATRIX: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GroupDescriptor {
    /// `Z/m1 x Z/m2 x ...`, a zero modulus standing for `Z`.
    FiniteAbelian { moduli: Vec<u64> },
    /// Upper unitriangular `n x n` matrices with entries in `Z/m` (`Z` if `m = 0`).
    Unitriangular { n: usize, modulus: u64 },
    /// Flat direct product of the other two kinds.
    DirectProduct(Vec<GroupDescriptor>),
}

fn check_modulus(m: u64) -> Result<()> {
    if m > MAX_MODULUS {
        return Err(Error::InvalidDescriptor(format!(
            "modulus {m} exceeds {MAX_MODULUS}"
        )));
    }
    Ok(())
}

impl GroupDescriptor {
    pub fn abelian(moduli: &[u64]) -> Result<Self> {
        if moduli.is_empty() {
            return Err(Error::InvalidDescriptor("empty modulus list".into()));
        }
        for &m in moduli {
            check_modulus(m)?;
        }
        Ok(GroupDescriptor::FiniteAbelian {
            moduli: moduli.to_vec(),
        })
    }

    pub fn unitriangular(n: usize, modulus: u64) -> Result<Self> {
        if !(2..=MAX_MATRIX).contains(&n) {
            return Err(Error::InvalidDescriptor(format!(
                "matrix size {n} outside 2..={MAX_MATRIX}"
            )));
        }
        check_modulus(modulus)?;
        Ok(GroupDescriptor::Unitriangular { n, modulus })
    }

    /// Heisenberg group `UT(3, Z/m)`.
    pub fn heisenberg(modulus: u64) -> Self {
        GroupDescriptor::Unitriangular { n: 3, modulus }
    }

    pub fn product(factors: Vec<GroupDescriptor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidDescriptor("empty direct product".into()));
        }
        if factors
            .iter()
            .any(|f| matches!(f, GroupDescriptor::DirectProduct(_)))
        {
            return Err(Error::InvalidDescriptor(
                "direct products must be flat".into(),
            ));
        }
        Ok(GroupDescriptor::DirectProduct(factors))
    }

    /// Number of coordinates of an element.
    pub fn arity(&self) -> usize {
        match self {
            GroupDescriptor::FiniteAbelian { moduli } => moduli.len(),
            GroupDescriptor::Unitriangular { n, .. } => n * (n - 1) / 2,
            GroupDescriptor::DirectProduct(fs) => fs.iter().map(|f| f.arity()).sum(),
        }
    }

    /// Modulus of every coordinate, in storage order.
    pub fn coordinate_moduli(&self) -> Vec<u64> {
        match self {
            GroupDescriptor::FiniteAbelian { moduli } => moduli.clone(),
            GroupDescriptor::Unitriangular { n, modulus } => vec![*modulus; n * (n - 1) / 2],
            GroupDescriptor::DirectProduct(fs) => {
                fs.iter().flat_map(|f| f.coordinate_moduli()).collect()
            }
        }
    }

    /// Upper bound on the nilpotency step of any subgroup.
    pub fn structural_step(&self) -> usize {
        match self {
            GroupDescriptor::FiniteAbelian { .. } => 1,
            GroupDescriptor::Unitriangular { n, .. } => n - 1,
            GroupDescriptor::DirectProduct(fs) => {
                fs.iter().map(|f| f.structural_step()).max().unwrap_or(1)
            }
        }
    }

    pub fn is_abelian(&self) -> bool {
        self.structural_step() <= 1
    }

    pub fn is_finite(&self) -> bool {
        self.coordinate_moduli().iter().all(|&m| m > 0)
    }

    /// True when every coordinate is an unbounded integer.
    pub fn is_torsion_free(&self) -> bool {
        self.coordinate_moduli().iter().all(|&m| m == 0)
    }

    pub fn order(&self) -> Option<u128> {
        let mut acc: u128 = 1;
        for m in self.coordinate_moduli() {
            if m == 0 {
                return None;
            }
            acc = acc.checked_mul(m as u128)?;
        }
        Some(acc)
    }

    pub fn identity(&self) -> Element {
        Element::zeros(self.arity())
    }

    /// Reduce raw coordinates into canonical range.
    pub fn reduce(&self, coords: &mut [i64]) {
        for (c, m) in coords.iter_mut().zip(self.coordinate_moduli()) {
            if m > 0 {
                *c = c.rem_euclid(m as i64);
            }
        }
    }

    /// Check arity and canonical range.
    pub fn validate(&self, e: &Element) -> Result<()> {
        if e.arity() != self.arity() {
            return Err(Error::InvalidElement(format!(
                "element {e:?} has arity {}, expected {}",
                e.arity(),
                self.arity()
            )));
        }
        for (c, m) in e.coords().iter().zip(self.coordinate_moduli()) {
            if m > 0 && !(0..m as i64).contains(c) {
                return Err(Error::InvalidElement(format!(
                    "coordinate {c} of {e:?} outside [0,{m})"
                )));
            }
        }
        Ok(())
    }

    /// Build an element from raw coordinates, reducing residues.
    pub fn element(&self, coords: &[i64]) -> Result<Element> {
        if coords.len() != self.arity() {
            return Err(Error::InvalidElement(format!(
                "got {} coordinates, expected {}",
                coords.len(),
                self.arity()
            )));
        }
        let mut e = Element::new(coords);
        self.reduce(&mut e.0);
        Ok(e)
    }

    pub fn mul(&self, a: &Element, b: &Element) -> Element {
        let mut out = Coords::from_elem(0, a.arity());
        self.mul_into(a.coords(), b.coords(), &mut out);
        Element(out)
    }

    pub fn inv(&self, a: &Element) -> Element {
        let mut out = Coords::from_elem(0, a.arity());
        self.inv_into(a.coords(), &mut out);
        Element(out)
    }

    fn mul_into(&self, a: &[i64], b: &[i64], out: &mut [i64]) {
        match self {
            GroupDescriptor::FiniteAbelian { moduli } => {
                for i in 0..a.len() {
                    out[i] = reduce_one(a[i] + b[i], moduli[i]);
                }
            }
            GroupDescriptor::Unitriangular { n, modulus } => ut_mul(*n, *modulus, a, b, out),
            GroupDescriptor::DirectProduct(fs) => {
                let mut off = 0;
                for f in fs {
                    let k = f.arity();
                    f.mul_into(&a[off..off + k], &b[off..off + k], &mut out[off..off + k]);
                    off += k;
                }
            }
        }
    }

    fn inv_into(&self, a: &[i64], out: &mut [i64]) {
        match self {
            GroupDescriptor::FiniteAbelian { moduli } => {
                for i in 0..a.len() {
                    out[i] = reduce_one(-a[i], moduli[i]);
                }
            }
            GroupDescriptor::Unitriangular { n, modulus } => ut_inv(*n, *modulus, a, out),
            GroupDescriptor::DirectProduct(fs) => {
                let mut off = 0;
                for f in fs {
                    let k = f.arity();
                    f.inv_into(&a[off..off + k], &mut out[off..off + k]);
                    off += k;
                }
            }
        }
    }

    /// Generators of the whole group: unit vectors, or elementary matrices
    /// `I + E_{i,i+1}`.
    pub fn standard_generators(&self) -> Vec<Element> {
        let arity = self.arity();
        let mut out = Vec::new();
        match self {
            GroupDescriptor::FiniteAbelian { moduli } => {
                for (i, &m) in moduli.iter().enumerate() {
                    if m != 1 {
                        let mut e = Element::zeros(arity);
                        e.0[i] = 1;
                        out.push(e);
                    }
                }
            }
            GroupDescriptor::Unitriangular { n, modulus } => {
                if *modulus != 1 {
                    for i in 0..n - 1 {
                        let mut e = Element::zeros(arity);
                        e.0[ut_index(*n, i, i + 1)] = 1;
                        out.push(e);
                    }
                }
            }
            GroupDescriptor::DirectProduct(fs) => {
                let mut off = 0;
                for f in fs {
                    for g in f.standard_generators() {
                        let mut e = Element::zeros(arity);
                        e.0[off..off + g.arity()].copy_from_slice(g.coords());
                        out.push(e);
                    }
                    off += f.arity();
                }
            }
        }
        out
    }

    /// Every element of a finite group, in canonical order.
    pub fn enumerate(&self, limit: usize) -> Result<Vec<Element>> {
        let order = self
            .order()
            .ok_or_else(|| Error::budget("enumerating an infinite group", limit as u64))?;
        if order > limit as u128 {
            return Err(Error::budget("enumerating group", limit as u64));
        }
        let moduli = self.coordinate_moduli();
        let mut out = Vec::with_capacity(order as usize);
        let mut cur = Element::zeros(moduli.len());
        loop {
            out.push(cur.clone());
            let mut i = moduli.len();
            loop {
                if i == 0 {
                    return Ok(out);
                }
                i -= 1;
                cur.0[i] += 1;
                if (cur.0[i] as u64) < moduli[i] {
                    break;
                }
                cur.0[i] = 0;
            }
        }
    }

    /// Canonical byte encoding: fixed-width little-endian per coordinate,
    /// zigzag-mapped 8-byte words for unbounded coordinates.
    pub fn encode(&self, e: &Element) -> Vec<u8> {
        let mut out = Vec::new();
        for (&c, m) in e.coords().iter().zip(self.coordinate_moduli()) {
            if m == 0 {
                let z = ((c << 1) ^ (c >> 63)) as u64;
                out.extend_from_slice(&z.to_le_bytes());
            } else {
                let width = width_for(m);
                out.extend_from_slice(&(c as u64).to_le_bytes()[..width]);
            }
        }
        out
    }

    /// Inverse of [`GroupDescriptor::encode`].
    pub fn decode(&self, bytes: &[u8]) -> Result<Element> {
        let mut coords = Coords::new();
        let mut pos = 0;
        for m in self.coordinate_moduli() {
            let width = if m == 0 { 8 } else { width_for(m) };
            if pos + width > bytes.len() {
                return Err(Error::Parse("truncated encoding".into()));
            }
            let mut buf = [0u8; 8];
            buf[..width].copy_from_slice(&bytes[pos..pos + width]);
            let raw = u64::from_le_bytes(buf);
            let c = if m == 0 {
                ((raw >> 1) as i64) ^ -((raw & 1) as i64)
            } else {
                raw as i64
            };
            coords.push(c);
            pos += width;
        }
        if pos != bytes.len() {
            return Err(Error::Parse("trailing bytes in encoding".into()));
        }
        Ok(Element(coords))
    }
}

fn width_for(m: u64) -> usize {
    let bits = 64 - (m.saturating_sub(1)).leading_zeros() as usize;
    bits.div_ceil(8).max(1)
}

#[inline]
fn reduce_one(v: i64, m: u64) -> i64 {
    if m == 0 {
        v
    } else {
        v.rem_euclid(m as i64)
    }
}

/// Row-major index of entry `(i, j)`, `i < j`, of an `n x n` unitriangular matrix.
#[inline]
pub fn ut_index(n: usize, i: usize, j: usize) -> usize {
    i * (n - 1) - i * i.saturating_sub(1) / 2 + (j - i - 1)
}

fn ut_mul(n: usize, m: u64, a: &[i64], b: &[i64], out: &mut [i64]) {
    for i in 0..n {
        for j in i + 1..n {
            let mut v = a[ut_index(n, i, j)] + b[ut_index(n, i, j)];
            for k in i + 1..j {
                v += a[ut_index(n, i, k)] * b[ut_index(n, k, j)];
            }
            out[ut_index(n, i, j)] = reduce_one(v, m);
        }
    }
}

fn ut_inv(n: usize, m: u64, a: &[i64], out: &mut [i64]) {
    // Solve a * x = I column by column, moving up from the diagonal.
    for j in 1..n {
        for i in (0..j).rev() {
            let mut v = -a[ut_index(n, i, j)];
            for k in i + 1..j {
                v -= a[ut_index(n, i, k)] * out[ut_index(n, k, j)];
            }
            out[ut_index(n, i, j)] = reduce_one(v, m);
        }
    }
}

impl fmt::Display for GroupDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupDescriptor::FiniteAbelian { moduli } => {
                write!(f, "ab:")?;
                for (i, m) in moduli.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{m}")?;
                }
                Ok(())
            }
            GroupDescriptor::Unitriangular { n, modulus } => write!(f, "ut:{n}:{modulus}"),
            GroupDescriptor::DirectProduct(fs) => {
                write!(f, "prod:")?;
                for (i, g) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "({g})")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for GroupDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse_u64 = |t: &str| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| Error::Parse(format!("bad integer '{t}' in '{s}'")))
        };
        if let Some(rest) = s.strip_prefix("ab:") {
            let moduli = rest.split(',').map(parse_u64).collect::<Result<Vec<_>>>()?;
            GroupDescriptor::abelian(&moduli)
        } else if let Some(rest) = s.strip_prefix("ut:") {
            let mut parts = rest.split(':');
            let n = parts
                .next()
                .ok_or_else(|| Error::Parse(format!("missing size in '{s}'")))?;
            let m = parts
                .next()
                .ok_or_else(|| Error::Parse(format!("missing modulus in '{s}'")))?;
            if parts.next().is_some() {
                return Err(Error::Parse(format!("trailing fields in '{s}'")));
            }
            GroupDescriptor::unitriangular(parse_u64(n)? as usize, parse_u64(m)?)
        } else if let Some(rest) = s.strip_prefix("prod:") {
            let mut factors = Vec::new();
            for part in rest.split(';') {
                let part = part.trim();
                let inner = part
                    .strip_prefix('(')
                    .and_then(|p| p.strip_suffix(')'))
                    .ok_or_else(|| Error::Parse(format!("factor '{part}' not parenthesised")))?;
                factors.push(inner.parse()?);
            }
            GroupDescriptor::product(factors)
        } else {
            Err(Error::Parse(format!("unknown backend spec '{s}'")))
        }
    }
}
