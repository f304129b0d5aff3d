//! Exact group arithmetic, subgroups and quotients.

mod descriptor;
mod element;
mod pc;
mod quotient;
mod subgroup;
mod text;

use std::fmt;
use std::sync::Arc;

pub use descriptor::{ut_index, GroupDescriptor, MAX_MATRIX, MAX_MODULUS};
pub use element::{heis, Coords, Element};
pub use pc::PcSubgroup;
pub use quotient::QuotientView;
pub use subgroup::{
    derived_subgroup, lower_central_series, normal_closure, span, step_of, step_of_generated,
    Normality, SubgroupHandle,
};
pub use text::{parse_set, write_set};
pub(crate) use subgroup::normal_closure_of;

use crate::error::{Error, Result};

/// Normal subgroup factored out by a quotient handle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Kernel {
    /// Fully enumerated, sorted.
    Finite(Vec<Element>),
    /// Subgroup of a torsion-free backend in polycyclic form.
    Lattice(PcSubgroup),
}

impl Kernel {
    pub fn contains(&self, e: &Element) -> bool {
        match self {
            Kernel::Finite(v) => v.binary_search(e).is_ok(),
            Kernel::Lattice(pc) => pc.contains(e),
        }
    }

    pub fn len(&self) -> Option<usize> {
        match self {
            Kernel::Finite(v) => Some(v.len()),
            Kernel::Lattice(pc) if pc.is_trivial() => Some(1),
            Kernel::Lattice(_) => None,
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.len() == Some(1)
    }

    /// Least element of the coset `e·kernel`.
    fn rep(&self, desc: &GroupDescriptor, e: &Element) -> Element {
        match self {
            Kernel::Finite(v) => v
                .iter()
                .map(|k| desc.mul(e, k))
                .min()
                .expect("kernel contains the identity"),
            Kernel::Lattice(pc) => pc.reduce(e),
        }
    }
}

/// A concrete backend, optionally taken modulo a normal subgroup.
///
/// Elements of a quotient are stored as coset representatives in the
/// coordinates of the backend; every operation returns representatives.
#[derive(Clone)]
pub struct Group {
    desc: Arc<GroupDescriptor>,
    kernel: Option<Arc<Kernel>>,
}

impl PartialEq for Group {
    fn eq(&self, other: &Self) -> bool {
        self.desc == other.desc
            && match (&self.kernel, &other.kernel) {
                (None, None) => true,
                (Some(a), Some(b)) => Arc::ptr_eq(a, b) || a == b,
                _ => false,
            }
    }
}

impl Eq for Group {}

impl fmt::Debug for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kernel {
            None => write!(f, "{}", self.desc),
            Some(k) => match k.len() {
                Some(n) => write!(f, "{}/N[{n}]", self.desc),
                None => write!(f, "{}/N[inf]", self.desc),
            },
        }
    }
}

impl From<GroupDescriptor> for Group {
    fn from(desc: GroupDescriptor) -> Self {
        Group::new(desc)
    }
}

impl Group {
    pub fn new(desc: GroupDescriptor) -> Self {
        Group {
            desc: Arc::new(desc),
            kernel: None,
        }
    }

    pub fn parse(spec: &str) -> Result<Self> {
        Ok(Group::new(spec.parse()?))
    }

    /// Quotient of the backend by `kernel`; normality is the caller's
    /// responsibility (see [`QuotientView`]).
    pub(crate) fn with_kernel(desc: Arc<GroupDescriptor>, kernel: Kernel) -> Self {
        if kernel.is_trivial() {
            return Group { desc, kernel: None };
        }
        Group {
            desc,
            kernel: Some(Arc::new(kernel)),
        }
    }

    pub fn descriptor(&self) -> &GroupDescriptor {
        &self.desc
    }

    pub(crate) fn descriptor_arc(&self) -> &Arc<GroupDescriptor> {
        &self.desc
    }

    pub fn kernel(&self) -> Option<&Kernel> {
        self.kernel.as_deref()
    }

    pub fn is_quotient(&self) -> bool {
        self.kernel.is_some()
    }

    /// The backend without any quotient.
    pub fn ambient(&self) -> Group {
        Group {
            desc: self.desc.clone(),
            kernel: None,
        }
    }

    pub fn arity(&self) -> usize {
        self.desc.arity()
    }

    pub fn structural_step(&self) -> usize {
        self.desc.structural_step()
    }

    pub fn is_abelian(&self) -> bool {
        self.desc.is_abelian()
    }

    pub fn is_finite(&self) -> bool {
        self.desc.is_finite()
    }

    pub fn is_torsion_free(&self) -> bool {
        self.desc.is_torsion_free() && self.kernel.is_none()
    }

    pub fn order(&self) -> Option<u128> {
        let base = self.desc.order()?;
        match &self.kernel {
            None => Some(base),
            Some(k) => Some(base / k.len()? as u128),
        }
    }

    pub fn identity(&self) -> Element {
        self.desc.identity()
    }

    pub fn is_identity(&self, e: &Element) -> bool {
        e.is_zero()
    }

    /// Canonical representative of `e`.
    pub fn canonical(&self, e: &Element) -> Element {
        match &self.kernel {
            None => e.clone(),
            Some(k) => k.rep(&self.desc, e),
        }
    }

    /// Validate coordinates and return the canonical representative.
    pub fn element(&self, coords: &[i64]) -> Result<Element> {
        let e = self.desc.element(coords)?;
        Ok(self.canonical(&e))
    }

    pub fn validate(&self, e: &Element) -> Result<()> {
        self.desc.validate(e)?;
        if self.kernel.is_some() && self.canonical(e) != *e {
            return Err(Error::InvalidElement(format!(
                "{e:?} is not a coset representative in {self}"
            )));
        }
        Ok(())
    }

    pub fn mul(&self, a: &Element, b: &Element) -> Element {
        let p = self.desc.mul(a, b);
        match &self.kernel {
            None => p,
            Some(k) => k.rep(&self.desc, &p),
        }
    }

    pub fn inv(&self, a: &Element) -> Element {
        let p = self.desc.inv(a);
        match &self.kernel {
            None => p,
            Some(k) => k.rep(&self.desc, &p),
        }
    }

    /// `a⁻¹b⁻¹ab`.
    pub fn commutator(&self, a: &Element, b: &Element) -> Element {
        let ab = self.desc.mul(a, b);
        let ba = self.desc.mul(b, a);
        let c = self.desc.mul(&self.desc.inv(&ba), &ab);
        self.canonical(&c)
    }

    /// `g a g⁻¹`.
    pub fn conjugate(&self, g: &Element, a: &Element) -> Element {
        let c = self.desc.mul(&self.desc.mul(g, a), &self.desc.inv(g));
        self.canonical(&c)
    }

    pub fn pow(&self, a: &Element, k: i64) -> Element {
        let mut base = if k < 0 { self.desc.inv(a) } else { a.clone() };
        let mut k = k.unsigned_abs();
        let mut acc = self.desc.identity();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.desc.mul(&acc, &base);
            }
            base = self.desc.mul(&base, &base);
            k >>= 1;
        }
        self.canonical(&acc)
    }

    /// Order of `a`, if finite and at most `limit`.
    pub fn element_order(&self, a: &Element, limit: u64) -> Option<u64> {
        let mut cur = a.clone();
        for k in 1..=limit {
            if self.is_identity(&cur) {
                return Some(k);
            }
            cur = self.mul(&cur, a);
        }
        None
    }

    /// Generators of the whole group (representatives of the backend's).
    pub fn standard_generators(&self) -> Vec<Element> {
        let mut gens: Vec<Element> = self
            .desc
            .standard_generators()
            .iter()
            .map(|g| self.canonical(g))
            .filter(|g| !g.is_zero())
            .collect();
        gens.sort();
        gens.dedup();
        gens
    }

    /// Every element (representative) of a finite group, in canonical order.
    pub fn enumerate(&self, limit: usize) -> Result<Vec<Element>> {
        match &self.kernel {
            None => self.desc.enumerate(limit),
            Some(k) => {
                let all = self.desc.enumerate(limit.saturating_mul(k.len().unwrap_or(1)))?;
                let mut reps: Vec<Element> = all.into_iter().filter(|e| self.canonical(e) == *e).collect();
                reps.sort();
                Ok(reps)
            }
        }
    }

    pub fn encode(&self, e: &Element) -> Vec<u8> {
        self.desc.encode(e)
    }

    pub fn decode(&self, bytes: &[u8]) -> Result<Element> {
        let e = self.desc.decode(bytes)?;
        self.validate(&e)?;
        Ok(e)
    }

    pub fn ensure_same(&self, other: &Group) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ParentMismatch {
                left: self.to_string(),
                right: other.to_string(),
            })
        }
    }
}
