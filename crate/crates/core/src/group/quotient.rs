//! Quotients by verified normal subgroups.

use super::{Element, Group, Kernel, PcSubgroup, SubgroupHandle};
use crate::error::{Error, Result};
use crate::setcalc::GSet;

/// The projection `π: G → G/N`.
///
/// Representatives are least elements (canonical order) of their coset in
/// the coordinates of the backend, so `rep(a) = rep(b)` iff `a b⁻¹ ∈ N`.
#[derive(Debug, Clone)]
pub struct QuotientView {
    parent: Group,
    quotient: Group,
    kernel_size: Option<usize>,
}

impl QuotientView {
    /// Quotient of `kernel.group()` by `kernel`, which must be normal in the
    /// whole parent group.
    pub fn new(kernel: &SubgroupHandle) -> Result<Self> {
        QuotientView::within(kernel, &kernel.group().standard_generators())
    }

    /// Quotient of `⟨normalizers⟩` by a kernel normalised by `normalizers`.
    /// Representatives of elements outside `⟨normalizers⟩` are meaningless.
    pub fn within(kernel: &SubgroupHandle, normalizers: &[Element]) -> Result<Self> {
        let parent = kernel.group().clone();
        for g in normalizers {
            if !kernel.is_normalized_by(g) {
                return Err(Error::NotNormal(format!(
                    "kernel is not normalised by generator {g:?}"
                )));
            }
        }
        let desc = parent.descriptor_arc().clone();
        let base = parent.ambient();
        // Full preimage in the backend: kernel representatives times the parent's kernel.
        let kern = match parent.kernel() {
            None | Some(Kernel::Finite(_)) => {
                let lower: Vec<Element> = match parent.kernel() {
                    Some(Kernel::Finite(v)) => v.clone(),
                    _ => vec![base.identity()],
                };
                let mut all = Vec::with_capacity(kernel.len() * lower.len());
                for k in kernel.elements().iter() {
                    for n in &lower {
                        all.push(base.mul(k, n));
                    }
                }
                all.sort_unstable();
                all.dedup();
                Kernel::Finite(all)
            }
            Some(Kernel::Lattice(pc)) => {
                let mut pc = pc.clone();
                pc.extend(kernel.generators(), &[])?;
                Kernel::Lattice(pc)
            }
        };
        let kernel_size = kernel.len();
        Ok(QuotientView {
            quotient: Group::with_kernel(desc, kern),
            parent,
            kernel_size: Some(kernel_size),
        })
    }

    /// Quotient of a torsion-free backend by a subgroup in polycyclic form;
    /// normality is checked on the backend's generators.
    pub fn from_lattice(parent: &Group, pc: PcSubgroup) -> Result<Self> {
        QuotientView::lattice_within(parent, pc, &parent.standard_generators())
    }

    /// As [`QuotientView::from_lattice`], normalised only by `normalizers`.
    pub fn lattice_within(parent: &Group, pc: PcSubgroup, normalizers: &[Element]) -> Result<Self> {
        if parent.is_quotient() {
            return Err(Error::Unsupported("lattice kernels need a plain backend".into()));
        }
        for g in normalizers.iter().cloned() {
            for b in pc.basis() {
                for h in [g.clone(), parent.inv(&g)] {
                    if !pc.contains(&parent.conjugate(&h, b)) {
                        return Err(Error::NotNormal(format!(
                            "lattice kernel not normalised by {h:?}"
                        )));
                    }
                }
            }
        }
        let kernel_size = if pc.is_trivial() { Some(1) } else { None };
        Ok(QuotientView {
            quotient: Group::with_kernel(parent.descriptor_arc().clone(), Kernel::Lattice(pc)),
            parent: parent.clone(),
            kernel_size,
        })
    }

    pub fn trivial(parent: &Group) -> Self {
        QuotientView {
            parent: parent.clone(),
            quotient: parent.clone(),
            kernel_size: Some(1),
        }
    }

    pub fn parent(&self) -> &Group {
        &self.parent
    }

    pub fn quotient(&self) -> &Group {
        &self.quotient
    }

    /// `|N|` relative to the parent, when finite.
    pub fn kernel_size(&self) -> Option<usize> {
        self.kernel_size
    }

    pub fn rep(&self, a: &Element) -> Element {
        self.quotient.canonical(a)
    }

    pub fn in_kernel(&self, a: &Element) -> bool {
        self.rep(a).is_zero()
    }

    /// `π(A)`.
    pub fn project(&self, a: &GSet) -> Result<GSet> {
        self.parent.ensure_same(a.group())?;
        Ok(a.map(&self.quotient, |e| self.rep(e)))
    }

    /// Elements of `a` whose image lies in `p` (a set in the quotient).
    pub fn preimage_in(&self, p: &GSet, a: &GSet) -> Result<GSet> {
        self.quotient.ensure_same(p.group())?;
        self.parent.ensure_same(a.group())?;
        Ok(a.filter(|e| p.contains(&self.rep(e))))
    }

    /// Lift a quotient set back to parent representatives (no change of
    /// coordinates).
    pub fn lift(&self, p: &GSet) -> Result<GSet> {
        self.quotient.ensure_same(p.group())?;
        Ok(p.map(&self.parent, |e| self.parent.canonical(e)))
    }
}
