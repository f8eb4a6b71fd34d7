//! The system Hilbert space `ℋ = ⊕_{γ∈Λ} ℋ_γ` on which the symmetry acts
//! diagonally, `U(g)` multiplying the `γ` component by `⟨g, γ⟩`.

use std::collections::HashSet;

use num_complex::Complex64;

use crate::abelian::{dual_transversal, transversal, GroupElement, GroupSpec, Subgroup, Transversal};
use crate::error::{invalid, Result};
use crate::linalg::CMatrix;

/// Characters carrying a nonzero multiplicity, with flat indexing of `ℋ`.
///
/// Flat index `offset(e) + i` addresses basis vector `i` of the entry `e`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spectrum {
    group: GroupSpec,
    subgroup: Subgroup,
    outcomes: Transversal,
    dual: Transversal,
    entries: Vec<(GroupElement, usize)>,
    offsets: Vec<usize>,
    entry_of_flat: Vec<usize>,
    dim: usize,
}

/// Spectrum entries that share a dual coset `γ + H^⊥`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetBlock {
    /// Index of the coset in the dual transversal.
    pub coset: usize,
    /// Entry indices, in spectrum order.
    pub entries: Vec<usize>,
}

impl Spectrum {
    pub fn new(
        group: &GroupSpec,
        subgroup: &Subgroup,
        entries: &[(GroupElement, usize)],
    ) -> Result<Self> {
        if entries.is_empty() {
            return invalid("spectrum must contain at least one character");
        }
        let mut seen = HashSet::new();
        for (gamma, mult) in entries {
            group.check(gamma)?;
            if *mult == 0 {
                return invalid(format!("character {gamma} has multiplicity 0"));
            }
            if !seen.insert(gamma.clone()) {
                return invalid(format!("character {gamma} listed twice"));
            }
        }
        let outcomes = transversal(group, subgroup)?;
        let dual = dual_transversal(group, subgroup)?;
        let mut offsets = Vec::with_capacity(entries.len());
        let mut entry_of_flat = Vec::new();
        let mut dim = 0;
        for (e, (_, mult)) in entries.iter().enumerate() {
            offsets.push(dim);
            entry_of_flat.extend(std::iter::repeat_n(e, *mult));
            dim += mult;
        }
        Ok(Self {
            group: group.clone(),
            subgroup: subgroup.clone(),
            outcomes,
            dual,
            entries: entries.to_vec(),
            offsets,
            entry_of_flat,
            dim,
        })
    }

    /// Every character with multiplicity one, in group order.
    pub fn regular(group: &GroupSpec, subgroup: &Subgroup) -> Result<Self> {
        let entries: Vec<_> = group.elements().into_iter().map(|g| (g, 1)).collect();
        Self::new(group, subgroup, &entries)
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn subgroup(&self) -> &Subgroup {
        &self.subgroup
    }

    /// Transversal of the value space `Ω = G/H`.
    pub fn outcomes(&self) -> &Transversal {
        &self.outcomes
    }

    /// Transversal of `Ĝ/H^⊥`.
    pub fn dual_cosets(&self) -> &Transversal {
        &self.dual
    }

    pub fn num_outcomes(&self) -> usize {
        self.outcomes.len()
    }

    pub fn entries(&self) -> &[(GroupElement, usize)] {
        &self.entries
    }

    pub fn character(&self, entry: usize) -> &GroupElement {
        &self.entries[entry].0
    }

    pub fn multiplicity(&self, entry: usize) -> usize {
        self.entries[entry].1
    }

    pub fn offset(&self, entry: usize) -> usize {
        self.offsets[entry]
    }

    /// Dimension of `ℋ`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn flatten(&self, entry: usize, i: usize) -> usize {
        debug_assert!(i < self.multiplicity(entry));
        self.offsets[entry] + i
    }

    pub fn unflatten(&self, flat: usize) -> (usize, usize) {
        let e = self.entry_of_flat[flat];
        (e, flat - self.offsets[e])
    }

    pub fn entry_of_flat(&self, flat: usize) -> usize {
        self.entry_of_flat[flat]
    }

    pub fn entry_index(&self, gamma: &GroupElement) -> Option<usize> {
        self.entries.iter().position(|(g, _)| g == gamma)
    }

    pub fn coset_of_entry(&self, entry: usize) -> usize {
        self.dual.coset_of(&self.entries[entry].0)
    }

    /// Whether matrix entries between the two spectrum entries may be nonzero
    /// in a covariant effect, i.e. `γ₁ − γ₂ ∈ H^⊥`.
    pub fn same_coset(&self, a: usize, b: usize) -> bool {
        self.coset_of_entry(a) == self.coset_of_entry(b)
    }

    /// Diagonal of `U(g)` as one phase per flat index.
    pub fn rep_diagonal(&self, g: &GroupElement) -> Vec<Complex64> {
        let phases: Vec<Complex64> = self
            .entries
            .iter()
            .map(|(gamma, _)| self.group.pairing(g, gamma))
            .collect();
        (0..self.dim).map(|f| phases[self.entry_of_flat[f]]).collect()
    }

    /// The unitary `U(g)`.
    pub fn rep_matrix(&self, g: &GroupElement) -> CMatrix {
        let diag = self.rep_diagonal(g);
        CMatrix::from_fn(self.dim, self.dim, |i, j| {
            if i == j {
                diag[i]
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Whether `γ ↦ n(γ)` (zero off `Λ`) is constant on every dual coset,
    /// the condition for sharp covariant observables to exist.
    pub fn pvm_existence(&self) -> bool {
        (0..self.dual.len()).all(|c| {
            let mults: Vec<usize> = self
                .dual
                .coset_members(c)
                .iter()
                .map(|gamma| self.entry_index(gamma).map_or(0, |e| self.multiplicity(e)))
                .collect();
            mults.windows(2).all(|w| w[0] == w[1])
        })
    }

    /// Spectrum entries grouped by dual coset, cosets in transversal order.
    pub fn coset_blocks(&self) -> Vec<CosetBlock> {
        let mut blocks: Vec<CosetBlock> = Vec::new();
        for e in 0..self.entries.len() {
            let c = self.coset_of_entry(e);
            match blocks.iter_mut().find(|b| b.coset == c) {
                Some(b) => b.entries.push(e),
                None => blocks.push(CosetBlock {
                    coset: c,
                    entries: vec![e],
                }),
            }
        }
        blocks.sort_by_key(|b| b.coset);
        blocks
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::subgroup_closure;
    use crate::linalg::max_abs;

    fn z(n: u64) -> GroupSpec {
        GroupSpec::cyclic(n).unwrap()
    }

    fn spec(n: u64, h_gen: Option<i64>, chars: &[(i64, usize)]) -> Result<Spectrum> {
        let g = z(n);
        let h = match h_gen {
            Some(x) => subgroup_closure(&g, &[g.element(&[x]).unwrap()]).unwrap(),
            None => Subgroup::trivial(&g),
        };
        let entries: Vec<_> = chars
            .iter()
            .map(|&(c, m)| (g.element(&[c]).unwrap(), m))
            .collect();
        Spectrum::new(&g, &h, &entries)
    }

    #[test]
    fn make_spectrum_examples() {
        assert_eq!(spec(4, None, &[(0, 1), (1, 1)]).unwrap().dim(), 2);
        let g = z(5);
        assert_eq!(Spectrum::regular(&g, &Subgroup::trivial(&g)).unwrap().dim(), 5);
        assert!(spec(4, None, &[(0, 1), (0, 2)]).is_err());
        assert!(spec(4, None, &[(0, 0)]).is_err());
        assert!(spec(4, None, &[]).is_err());
    }

    #[test]
    fn rep_matrix_examples() {
        let s = spec(4, None, &[(0, 1), (1, 1)]).unwrap();
        let g = s.group().element(&[1]).unwrap();
        let u = s.rep_matrix(&g);
        assert_eq!(u[(0, 0)], Complex64::new(1.0, 0.0));
        assert_eq!(u[(1, 1)], Complex64::new(0.0, 1.0));
        let zero = s.group().zero();
        assert!(max_abs(&(s.rep_matrix(&zero) - CMatrix::identity(2, 2))) == 0.0);
        let r = Spectrum::regular(&z(2), &Subgroup::trivial(&z(2))).unwrap();
        let u = r.rep_matrix(&r.group().element(&[1]).unwrap());
        assert_eq!(u[(1, 1)], Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn pvm_existence_examples() {
        assert!(!spec(4, Some(2), &[(0, 1), (1, 1)]).unwrap().pvm_existence());
        assert!(spec(4, Some(2), &[(0, 1), (2, 1)]).unwrap().pvm_existence());
        let g = z(6);
        assert!(Spectrum::regular(&g, &Subgroup::trivial(&g)).unwrap().pvm_existence());
    }

    #[test]
    fn coset_block_examples() {
        let s = spec(4, Some(2), &[(0, 1), (1, 1), (2, 1)]).unwrap();
        let blocks = s.coset_blocks();
        assert_eq!(blocks.len(), 2);
        assert_eq!(blocks[0].entries, vec![0, 2]);
        assert_eq!(blocks[1].entries, vec![1]);
        let s = spec(4, None, &[(0, 1), (1, 2), (3, 1)]).unwrap();
        assert_eq!(s.coset_blocks().len(), 1);
        let s = spec(4, Some(2), &[(3, 2)]).unwrap();
        assert_eq!(s.coset_blocks().len(), 1);
    }

    #[test]
    fn flat_index_round_trip() {
        let s = spec(6, Some(3), &[(0, 2), (5, 1), (2, 3)]).unwrap();
        assert_eq!(s.dim(), 6);
        for e in 0..3 {
            for i in 0..s.multiplicity(e) {
                assert_eq!(s.unflatten(s.flatten(e, i)), (e, i));
            }
        }
    }
}
