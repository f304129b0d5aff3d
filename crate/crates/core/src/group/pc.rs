//! Induced polycyclic sequences for subgroups of torsion-free backends.
//!
//! Coordinates are visited in depth order: by superdiagonal, then by row,
//! factor by factor for products. The elements vanishing before depth `d`
//! form a normal subgroup on which coordinate `d` is additive, so a subgroup
//! can be kept in echelon form with at most one basis element per depth.
//! Sifting against the basis decides membership, and reducing each pivot
//! coordinate into `[0, e)` yields a canonical coset representative.

use std::collections::VecDeque;
use std::sync::Arc;

use super::descriptor::GroupDescriptor;
use super::element::Element;
use crate::error::{Error, Result};

/// Upper bound on queue work while closing a generating set.
const MAX_SIFTS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PcSubgroup {
    desc: Arc<GroupDescriptor>,
    /// Storage positions in depth order.
    order: Vec<usize>,
    /// Basis element per depth; its coordinate at that depth is positive.
    basis: Vec<Option<Element>>,
}

fn depth_order(desc: &GroupDescriptor) -> Vec<usize> {
    // (layer, factor, rank within factor, storage position)
    let mut keyed: Vec<(usize, usize, usize, usize)> = Vec::new();
    let factors: Vec<&GroupDescriptor> = match desc {
        GroupDescriptor::DirectProduct(fs) => fs.iter().collect(),
        other => vec![other],
    };
    let mut off = 0;
    for (fi, f) in factors.iter().enumerate() {
        match f {
            GroupDescriptor::FiniteAbelian { moduli } => {
                for i in 0..moduli.len() {
                    keyed.push((1, fi, i, off + i));
                }
            }
            GroupDescriptor::Unitriangular { n, .. } => {
                for i in 0..*n {
                    for j in i + 1..*n {
                        let pos = off + super::descriptor::ut_index(*n, i, j);
                        keyed.push((j - i, fi, i, pos));
                    }
                }
            }
            GroupDescriptor::DirectProduct(_) => unreachable!("products are flat"),
        }
        off += f.arity();
    }
    keyed.sort();
    keyed.into_iter().map(|k| k.3).collect()
}

fn pow(desc: &GroupDescriptor, g: &Element, k: i64) -> Element {
    let mut base = if k < 0 { desc.inv(g) } else { g.clone() };
    let mut k = k.unsigned_abs();
    let mut acc = desc.identity();
    while k > 0 {
        if k & 1 == 1 {
            acc = desc.mul(&acc, &base);
        }
        base = desc.mul(&base, &base);
        k >>= 1;
    }
    acc
}

fn commutator(desc: &GroupDescriptor, a: &Element, b: &Element) -> Element {
    let ab = desc.mul(a, b);
    let ba = desc.mul(b, a);
    desc.mul(&desc.inv(&ba), &ab)
}

impl PcSubgroup {
    pub fn trivial(desc: Arc<GroupDescriptor>) -> Result<Self> {
        if !desc.is_torsion_free() {
            return Err(Error::Unsupported(format!(
                "polycyclic subgroups need a torsion-free backend, got {desc}"
            )));
        }
        let order = depth_order(&desc);
        let basis = vec![None; order.len()];
        Ok(PcSubgroup { desc, order, basis })
    }

    /// Subgroup generated by `gens`, closed under conjugation by `conj`
    /// (pass an empty slice for a plain subgroup).
    pub fn generate(
        desc: Arc<GroupDescriptor>,
        gens: &[Element],
        conj: &[Element],
    ) -> Result<Self> {
        let mut pc = PcSubgroup::trivial(desc)?;
        pc.extend(gens, conj)?;
        Ok(pc)
    }

    pub fn extend(&mut self, gens: &[Element], conj: &[Element]) -> Result<()> {
        let mut conjugators: Vec<Element> = Vec::new();
        for c in conj {
            conjugators.push(c.clone());
            conjugators.push(self.desc.inv(c));
        }
        conjugators.sort();
        conjugators.dedup();
        let mut queue: VecDeque<Element> = gens.iter().cloned().collect();
        let mut work = 0usize;
        while let Some(g) = queue.pop_front() {
            work += 1;
            if work > MAX_SIFTS {
                return Err(Error::budget("polycyclic closure", MAX_SIFTS as u64));
            }
            if let Some((depth, extra)) = self.insert(g) {
                let b = self.basis[depth].clone().expect("just inserted");
                let b_inv = self.desc.inv(&b);
                for other in self.basis.iter().flatten() {
                    let o_inv = self.desc.inv(other);
                    for (x, y) in [(&b, other), (&b_inv, other), (&b, &o_inv), (&b_inv, &o_inv)] {
                        queue.push_back(commutator(&self.desc, x, y));
                    }
                }
                for c in &conjugators {
                    let ci = self.desc.inv(c);
                    queue.push_back(self.desc.mul(&self.desc.mul(c, &b), &ci));
                }
                queue.extend(extra);
            }
        }
        Ok(())
    }

    /// Sift `g`; on a non-member return the residue and the depth of its
    /// first non-reducible coordinate.
    fn sift(&self, mut g: Element) -> Option<(Element, usize)> {
        for (d, &pos) in self.order.iter().enumerate() {
            let c = g.0[pos];
            if c == 0 {
                continue;
            }
            match &self.basis[d] {
                Some(b) => {
                    let e = b.0[pos];
                    if c % e != 0 {
                        return Some((g, d));
                    }
                    g = self.desc.mul(&g, &pow(&self.desc, b, -(c / e)));
                }
                None => return Some((g, d)),
            }
        }
        None
    }

    /// Insert `g`; returns the depth whose basis element changed and any
    /// residues that still need sifting.
    fn insert(&mut self, g: Element) -> Option<(usize, Vec<Element>)> {
        let (r, d) = self.sift(g)?;
        let pos = self.order[d];
        match self.basis[d].take() {
            None => {
                let r = if r.0[pos] < 0 { self.desc.inv(&r) } else { r };
                self.basis[d] = Some(r);
                Some((d, Vec::new()))
            }
            Some(b) => {
                // Euclid on the pivot coordinate; the pair spans the same subgroup throughout.
                let (mut a, mut c) = (b, r);
                while c.0[pos] != 0 {
                    let q = a.0[pos] / c.0[pos];
                    a = self.desc.mul(&a, &pow(&self.desc, &c, -q));
                    std::mem::swap(&mut a, &mut c);
                }
                if a.0[pos] < 0 {
                    a = self.desc.inv(&a);
                }
                self.basis[d] = Some(a);
                Some((d, vec![c]))
            }
        }
    }

    pub fn contains(&self, g: &Element) -> bool {
        self.sift(g.clone()).is_none()
    }

    /// Canonical representative of the left coset `g·S`.
    pub fn reduce(&self, g: &Element) -> Element {
        let mut g = g.clone();
        for (d, &pos) in self.order.iter().enumerate() {
            if let Some(b) = &self.basis[d] {
                let e = b.0[pos];
                let q = g.0[pos].div_euclid(e);
                if q != 0 {
                    g = self.desc.mul(&g, &pow(&self.desc, b, -q));
                }
            }
        }
        g
    }

    pub fn basis(&self) -> impl Iterator<Item = &Element> {
        self.basis.iter().flatten()
    }

    pub fn is_trivial(&self) -> bool {
        self.basis.iter().all(|b| b.is_none())
    }

    /// Hirsch length (number of basis elements).
    pub fn rank(&self) -> usize {
        self.basis.iter().flatten().count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::element::heis;

    fn ut3() -> Arc<GroupDescriptor> {
        Arc::new(GroupDescriptor::heisenberg(0))
    }

    #[test]
    fn derived_subgroup_of_heisenberg_is_centre() {
        let d = ut3();
        let x = heis(1, 0, 0);
        let y = heis(0, 1, 0);
        let c = commutator(&d, &x, &y);
        let pc = PcSubgroup::generate(d.clone(), &[c], &[x.clone(), y.clone()]).unwrap();
        assert_eq!(pc.rank(), 1);
        assert!(pc.contains(&heis(0, 0, 5)));
        assert!(pc.contains(&heis(0, 0, -3)));
        assert!(!pc.contains(&heis(1, 0, 0)));
        assert_eq!(pc.reduce(&heis(2, -1, 17)), heis(2, -1, 0));
    }

    #[test]
    fn index_two_subgroup_of_centre() {
        let d = ut3();
        // <x^2, y> has derived subgroup <z^2>
        let x2 = heis(2, 0, 0);
        let y = heis(0, 1, 0);
        let c = commutator(&d, &x2, &y);
        let pc = PcSubgroup::generate(d.clone(), &[c], &[x2, y]).unwrap();
        assert!(pc.contains(&heis(0, 0, 2)));
        assert!(!pc.contains(&heis(0, 0, 1)));
        assert_eq!(pc.reduce(&heis(0, 0, 7)), heis(0, 0, 1));
        assert_eq!(pc.reduce(&heis(0, 0, -7)), heis(0, 0, 1));
    }

    #[test]
    fn full_group_from_generators() {
        let d = ut3();
        let pc = PcSubgroup::generate(d.clone(), &[heis(1, 0, 0), heis(0, 1, 0)], &[]).unwrap();
        assert_eq!(pc.rank(), 3);
        assert!(pc.contains(&heis(-4, 9, 11)));
        assert!(pc.reduce(&heis(-4, 9, 11)).is_zero());
    }

    #[test]
    fn euclid_merges_pivots() {
        let d = Arc::new(GroupDescriptor::abelian(&[0, 0]).unwrap());
        let pc = PcSubgroup::generate(
            d,
            &[Element::new(&[4, 1]), Element::new(&[6, 0])],
            &[],
        )
        .unwrap();
        // lattice spanned by (4,1),(6,0): index |det| = 6
        assert!(pc.contains(&Element::new(&[2, -1])));
        assert!(!pc.contains(&Element::new(&[1, 0])));
        let mut reps: Vec<Element> = Vec::new();
        for a in -6..6 {
            for b in -6..6 {
                reps.push(pc.reduce(&Element::new(&[a, b])));
            }
        }
        reps.sort();
        reps.dedup();
        assert_eq!(reps.len(), 6);
    }

    #[test]
    fn rejects_finite_backends() {
        let d = Arc::new(GroupDescriptor::heisenberg(3));
        assert!(PcSubgroup::trivial(d).is_err());
    }
}
