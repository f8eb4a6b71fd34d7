//! Finite Abelian groups `ℤ_{N₁} × … × ℤ_{N_k}`, their subgroups, coset
//! transversals and characters.
//!
//! The dual group is identified with the group itself through the pairing
//! `⟨g, γ⟩ = exp(2πi Σ_j g_j γ_j / N_j)`, so characters are plain
//! [`GroupElement`]s. Groups are enumerated eagerly; elements are indexed in
//! mixed radix with the first factor most significant, which makes the index
//! order coincide with the lexicographic order of residue vectors.

use std::fmt;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::linalg::CMatrix;

/// Upper bound on enumerated group orders.
pub const MAX_ORDER: usize = 1 << 20;

/// Residue vector of a group element (or, through self-duality, a character).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement(Vec<u64>);

impl GroupElement {
    pub fn residues(&self) -> &[u64] {
        &self.0
    }

    /// Comma separated residues, e.g. `"1,0"`.
    pub fn label(&self) -> String {
        self.0
            .iter()
            .map(|r| r.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupSpec {
    factors: Vec<u64>,
    order: usize,
    // common denominator of all pairing phases
    lcm: u64,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl GroupSpec {
    pub fn new(factors: &[u64]) -> Result<Self> {
        if factors.is_empty() {
            return invalid("group needs at least one cyclic factor");
        }
        let mut order: usize = 1;
        let mut lcm: u64 = 1;
        for &n in factors {
            if n == 0 {
                return invalid("cyclic factor of order 0");
            }
            order = match order.checked_mul(n as usize) {
                Some(o) if o <= MAX_ORDER => o,
                _ => return invalid(format!("group order exceeds {MAX_ORDER}")),
            };
            lcm = lcm / gcd(lcm, n) * n;
        }
        Ok(Self {
            factors: factors.to_vec(),
            order,
            lcm,
        })
    }

    pub fn cyclic(n: u64) -> Result<Self> {
        Self::new(&[n])
    }

    pub fn factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of cyclic factors.
    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement(vec![0; self.rank()])
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        g.0.len() == self.rank() && g.0.iter().zip(&self.factors).all(|(r, n)| r < n)
    }

    pub fn check(&self, g: &GroupElement) -> Result<()> {
        if self.contains(g) {
            Ok(())
        } else {
            invalid(format!("{g} is not an element of ℤ{:?}", self.factors))
        }
    }

    /// Element with the given residues, which must already be reduced.
    pub fn element(&self, residues: &[i64]) -> Result<GroupElement> {
        if residues.len() != self.rank() {
            return invalid(format!(
                "element has {} components, group has {} factors",
                residues.len(),
                self.rank()
            ));
        }
        for (&r, &n) in residues.iter().zip(&self.factors) {
            if r < 0 || r as u64 >= n {
                return invalid(format!("residue {r} out of range for ℤ_{n}"));
            }
        }
        Ok(GroupElement(residues.iter().map(|&r| r as u64).collect()))
    }

    /// Element obtained by reducing arbitrary integers modulo the factors.
    pub fn reduce(&self, residues: &[i64]) -> Result<GroupElement> {
        if residues.len() != self.rank() {
            return invalid("component count does not match group rank");
        }
        Ok(GroupElement(
            residues
                .iter()
                .zip(&self.factors)
                .map(|(&r, &n)| r.rem_euclid(n as i64) as u64)
                .collect(),
        ))
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        GroupElement(
            a.0.iter()
                .zip(&b.0)
                .zip(&self.factors)
                .map(|((x, y), n)| (x + y) % n)
                .collect(),
        )
    }

    pub fn neg(&self, a: &GroupElement) -> GroupElement {
        GroupElement(
            a.0.iter()
                .zip(&self.factors)
                .map(|(x, n)| (n - x) % n)
                .collect(),
        )
    }

    pub fn sub(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        self.add(a, &self.neg(b))
    }

    pub fn index_of(&self, g: &GroupElement) -> usize {
        g.0.iter()
            .zip(&self.factors)
            .fold(0usize, |acc, (r, n)| acc * (*n as usize) + *r as usize)
    }

    pub fn element_at(&self, mut index: usize) -> GroupElement {
        let mut res = vec![0u64; self.rank()];
        for (slot, &n) in res.iter_mut().zip(&self.factors).rev() {
            *slot = (index % n as usize) as u64;
            index /= n as usize;
        }
        GroupElement(res)
    }

    /// All elements in lexicographic order.
    pub fn elements(&self) -> Vec<GroupElement> {
        (0..self.order).map(|i| self.element_at(i)).collect()
    }

    /// Phase of `⟨g, γ⟩` as an integer `k` with `⟨g, γ⟩ = exp(2πi k / L)`,
    /// `L` the least common multiple of the factors.
    pub fn pairing_phase(&self, g: &GroupElement, gamma: &GroupElement) -> u64 {
        let l = self.lcm;
        g.0.iter()
            .zip(&gamma.0)
            .zip(&self.factors)
            .fold(0u64, |acc, ((x, y), n)| {
                let term = ((x * y) % n) * (l / n);
                (acc + term) % l
            })
    }

    /// The character pairing `⟨g, γ⟩`.
    pub fn pairing(&self, g: &GroupElement, gamma: &GroupElement) -> Complex64 {
        unit_root(self.pairing_phase(g, gamma), self.lcm)
    }

    /// Denominator `L` of [`GroupSpec::pairing_phase`].
    pub fn phase_denominator(&self) -> u64 {
        self.lcm
    }
}

/// `exp(2πi k / l)`, exact on quarter turns.
pub(crate) fn unit_root(k: u64, l: u64) -> Complex64 {
    let k = k % l;
    if (4 * k).is_multiple_of(l) {
        return match 4 * k / l {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    let theta = 2.0 * std::f64::consts::PI * (k as f64) / (l as f64);
    Complex64::new(theta.cos(), theta.sin())
}

/// A subgroup stored as its sorted element list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup {
    parent: GroupSpec,
    elements: Vec<GroupElement>,
    members: Vec<bool>,
}

impl Subgroup {
    pub fn trivial(group: &GroupSpec) -> Self {
        Self::from_sorted(group, vec![group.zero()])
    }

    pub fn whole(group: &GroupSpec) -> Self {
        Self::from_sorted(group, group.elements())
    }

    fn from_sorted(group: &GroupSpec, elements: Vec<GroupElement>) -> Self {
        let mut members = vec![false; group.order()];
        for e in &elements {
            members[group.index_of(e)] = true;
        }
        Self {
            parent: group.clone(),
            elements,
            members,
        }
    }

    /// Validates that `elements` form a subgroup of `group`.
    pub fn from_elements(group: &GroupSpec, elements: &[GroupElement]) -> Result<Self> {
        for e in elements {
            group.check(e)?;
        }
        let mut sorted = elements.to_vec();
        sorted.sort();
        sorted.dedup();
        let sub = Self::from_sorted(group, sorted);
        if !sub.contains(&group.zero()) {
            return invalid("subset does not contain the identity");
        }
        for a in &sub.elements {
            if !sub.contains(&group.neg(a)) {
                return invalid(format!("subset not closed under negation at {a}"));
            }
            for b in &sub.elements {
                if !sub.contains(&group.add(a, b)) {
                    return invalid(format!("subset not closed under addition: {a} + {b}"));
                }
            }
        }
        Ok(sub)
    }

    pub fn parent(&self) -> &GroupSpec {
        &self.parent
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.parent.contains(g) && self.members[self.parent.index_of(g)]
    }
}

/// Smallest subgroup containing `generators`.
pub fn subgroup_closure(group: &GroupSpec, generators: &[GroupElement]) -> Result<Subgroup> {
    for g in generators {
        group.check(g)?;
    }
    let mut members = vec![false; group.order()];
    let zero = group.zero();
    members[group.index_of(&zero)] = true;
    let mut frontier = vec![zero];
    // in a finite group, closing {0} under "+ generator" already gives the subgroup
    while let Some(x) = frontier.pop() {
        for g in generators {
            let y = group.add(&x, g);
            let idx = group.index_of(&y);
            if !members[idx] {
                members[idx] = true;
                frontier.push(y);
            }
        }
    }
    let elements = (0..group.order())
        .filter(|&i| members[i])
        .map(|i| group.element_at(i))
        .collect();
    Ok(Subgroup {
        parent: group.clone(),
        elements,
        members,
    })
}

/// Characters `η` with `⟨h, η⟩ = 1` for all `h ∈ H`.
pub fn annihilator(group: &GroupSpec, subgroup: &Subgroup) -> Result<Subgroup> {
    ensure_parent(group, subgroup)?;
    let elements = group
        .elements()
        .into_iter()
        .filter(|eta| {
            subgroup
                .elements()
                .iter()
                .all(|h| group.pairing_phase(h, eta) == 0)
        })
        .collect();
    Ok(Subgroup::from_sorted(group, elements))
}

fn ensure_parent(group: &GroupSpec, subgroup: &Subgroup) -> Result<()> {
    if subgroup.parent() != group {
        return invalid(format!(
            "subgroup of ℤ{:?} used with ℤ{:?}",
            subgroup.parent().factors(),
            group.factors()
        ));
    }
    Ok(())
}

/// Cosets of a subgroup with their lexicographically minimal representatives.
///
/// Coset `ω` is the index of its representative in the sorted representative
/// list; the representative map `ω ↦ s(ω)` is the canonical section.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transversal {
    parent: GroupSpec,
    subgroup: Subgroup,
    representatives: Vec<GroupElement>,
    coset_index: Vec<usize>,
}

/// Coset transversal of `G/H`.
pub fn transversal(group: &GroupSpec, subgroup: &Subgroup) -> Result<Transversal> {
    ensure_parent(group, subgroup)?;
    let unassigned = usize::MAX;
    let mut coset_index = vec![unassigned; group.order()];
    let mut representatives = Vec::with_capacity(group.order() / subgroup.order());
    // scanning in lexicographic order makes the first hit the minimal member
    for idx in 0..group.order() {
        if coset_index[idx] != unassigned {
            continue;
        }
        let g = group.element_at(idx);
        let w = representatives.len();
        for h in subgroup.elements() {
            coset_index[group.index_of(&group.add(&g, h))] = w;
        }
        representatives.push(g);
    }
    Ok(Transversal {
        parent: group.clone(),
        subgroup: subgroup.clone(),
        representatives,
        coset_index,
    })
}

/// Coset transversal of `Ĝ/H^⊥`, with `Ĝ` identified with `G`.
pub fn dual_transversal(group: &GroupSpec, subgroup: &Subgroup) -> Result<Transversal> {
    let ann = annihilator(group, subgroup)?;
    transversal(group, &ann)
}

impl Transversal {
    pub fn parent(&self) -> &GroupSpec {
        &self.parent
    }

    pub fn subgroup(&self) -> &Subgroup {
        &self.subgroup
    }

    pub fn representatives(&self) -> &[GroupElement] {
        &self.representatives
    }

    pub fn representative(&self, coset: usize) -> &GroupElement {
        &self.representatives[coset]
    }

    /// Number of cosets.
    pub fn len(&self) -> usize {
        self.representatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.representatives.is_empty()
    }

    pub fn coset_of(&self, g: &GroupElement) -> usize {
        self.coset_index[self.parent.index_of(g)]
    }

    pub fn coset_members(&self, coset: usize) -> Vec<GroupElement> {
        let rep = &self.representatives[coset];
        self.subgroup
            .elements()
            .iter()
            .map(|h| self.parent.add(rep, h))
            .collect()
    }

    /// `g · ω`, the coset of `g + s(ω)`.
    pub fn act(&self, g: &GroupElement, coset: usize) -> usize {
        self.coset_of(&self.parent.add(g, &self.representatives[coset]))
    }

    /// Quotient group difference `ω₁ − ω₂`.
    pub fn quotient_sub(&self, a: usize, b: usize) -> usize {
        self.coset_of(
            &self
                .parent
                .sub(&self.representatives[a], &self.representatives[b]),
        )
    }

    /// Quotient group sum `ω₁ + ω₂`.
    pub fn quotient_add(&self, a: usize, b: usize) -> usize {
        self.act(&self.representatives[a], b)
    }

    /// Validates an alternative section: one member of each coset, in coset order.
    pub fn check_section(&self, section: &[GroupElement]) -> Result<()> {
        if section.len() != self.len() {
            return invalid(format!(
                "section has {} points, quotient has {} cosets",
                section.len(),
                self.len()
            ));
        }
        for (w, s) in section.iter().enumerate() {
            self.parent.check(s)?;
            if self.coset_of(s) != w {
                return invalid(format!("section point {s} is not in coset {w}"));
            }
        }
        Ok(())
    }
}

/// Unitary DFT matrix, entry `(g, γ)` equal to `⟨g, γ⟩ / √|G|`.
pub fn dft_matrix(group: &GroupSpec) -> CMatrix {
    let n = group.order();
    let scale = 1.0 / (n as f64).sqrt();
    let elems = group.elements();
    CMatrix::from_fn(n, n, |i, j| group.pairing(&elems[i], &elems[j]) * scale)
}
