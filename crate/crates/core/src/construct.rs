//! Builders for covariant observables.
//!
//! Every covariant observable on `G/H` is determined by a field of isometries
//! `W(γ): ℋ_γ → ℂ^m`. With counting measures on the dual cosets and weight
//! `1/|Ω|` per outcome, the effect at outcome `[g]` has entries
//!
//! ```text
//! M([g])_{(γ₁,i),(γ₂,j)} = ⟨g, γ₁ − γ₂⟩ · ⟨W(γ₁)e_i, W(γ₂)e_j⟩ / |Ω|   if γ₁ − γ₂ ∈ H^⊥
//!                        = 0                                          otherwise.
//! ```
//!
//! Summing over outcomes kills every block with `γ₁ ≠ γ₂` (character
//! orthogonality on `G/H`) and leaves `W(γ)*W(γ) = I` on the diagonal, so
//! `Σ_ω M(ω) = I`.
//!
//! Only the inner products matter, so the same data is carried by the coset
//! blocked [`GramStructure`]; [`extract_gram`] reads it back from the
//! effect at the identity coset.

use num_complex::Complex64;

use crate::abelian::{GroupSpec, Subgroup, Transversal};
use crate::error::{invalid, Error, Result};
use crate::linalg::{self, eigh, frobenius, hermiticity_residual, CMatrix};
use crate::povm::{check_covariance, validate_povm, CovariantPovm, Tolerances};
use crate::repspace::Spectrum;

/// Per-character isometries `W(γ)` into a common ambient space `ℂ^m`.
#[derive(Debug, Clone)]
pub struct IsometryField {
    spectrum: Spectrum,
    ambient_dim: usize,
    maps: Vec<CMatrix>,
}

impl IsometryField {
    /// `maps[e]` is the `m × n(γ_e)` matrix of entry `e`.
    pub fn new(
        spectrum: &Spectrum,
        ambient_dim: usize,
        maps: Vec<CMatrix>,
        tol: &Tolerances,
    ) -> Result<Self> {
        if maps.len() != spectrum.entries().len() {
            return invalid(format!(
                "{} isometries for {} spectrum entries",
                maps.len(),
                spectrum.entries().len()
            ));
        }
        for (e, w) in maps.iter().enumerate() {
            let n = spectrum.multiplicity(e);
            if w.nrows() != ambient_dim || w.ncols() != n {
                return invalid(format!(
                    "isometry for {} is {}×{}, expected {ambient_dim}×{n}",
                    spectrum.character(e),
                    w.nrows(),
                    w.ncols()
                ));
            }
            let res = frobenius(&(w.adjoint() * w - linalg::identity(n)));
            if res > tol.eq_tol {
                return invalid(format!(
                    "W({})*W({}) deviates from identity by {res:.3e}",
                    spectrum.character(e),
                    spectrum.character(e)
                ));
            }
        }
        Ok(Self {
            spectrum: spectrum.clone(),
            ambient_dim,
            maps,
        })
    }

    /// `W(γ) = [I; 0]` for every character, `m = max n(γ)`.
    pub fn constant(spectrum: &Spectrum) -> Self {
        let m = spectrum
            .entries()
            .iter()
            .map(|(_, n)| *n)
            .max()
            .unwrap_or(1);
        let maps = spectrum
            .entries()
            .iter()
            .map(|(_, n)| CMatrix::identity(m, *n))
            .collect();
        Self {
            spectrum: spectrum.clone(),
            ambient_dim: m,
            maps,
        }
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn maps(&self) -> &[CMatrix] {
        &self.maps
    }

    pub fn map(&self, entry: usize) -> &CMatrix {
        &self.maps[entry]
    }

    /// `V·W(γ)` for a unitary `V` on the ambient space.
    pub fn left_multiplied(&self, v: &CMatrix, tol: &Tolerances) -> Result<Self> {
        let maps = self.maps.iter().map(|w| v * w).collect();
        Self::new(&self.spectrum, self.ambient_dim, maps, tol)
    }

    /// Coset-blocked inner products `W(γ₁)*W(γ₂)`.
    pub fn gram(&self, tol: &Tolerances) -> Result<GramStructure> {
        let matrices = self
            .spectrum
            .coset_blocks()
            .iter()
            .map(|block| {
                let stacked = stack_columns(block.entries.iter().map(|&e| &self.maps[e]));
                stacked.adjoint() * stacked
            })
            .collect();
        GramStructure::new(&self.spectrum, matrices, tol)
    }

    /// Whether every character of each occupied dual coset is present and
    /// `W(γ₂)*W(γ₁)` is unitary for all `γ₁, γ₂` in a common coset.
    pub fn is_unitary_on_cosets(&self, tol: &Tolerances) -> bool {
        let coset_size = self.spectrum.dual_cosets().subgroup().order();
        self.spectrum.coset_blocks().iter().all(|block| {
            block.entries.len() == coset_size
                && block.entries.iter().all(|&a| {
                block.entries.iter().all(|&b| {
                    let x = self.maps[b].adjoint() * &self.maps[a];
                    x.nrows() == x.ncols()
                        && frobenius(&(x.adjoint() * &x - linalg::identity(x.ncols())))
                            <= tol.eq_tol
                        && frobenius(&(&x * x.adjoint() - linalg::identity(x.nrows())))
                            <= tol.eq_tol
                })
            })
        })
    }
}

fn stack_columns<'a>(mats: impl Iterator<Item = &'a CMatrix>) -> CMatrix {
    let mats: Vec<&CMatrix> = mats.collect();
    let rows = mats.first().map_or(0, |m| m.nrows());
    let cols: usize = mats.iter().map(|m| m.ncols()).sum();
    let mut out = linalg::zeros(rows, cols);
    let mut at = 0;
    for m in mats {
        out.view_mut((0, at), (rows, m.ncols())).copy_from(m);
        at += m.ncols();
    }
    out
}

/// Gram matrix of one dual coset.
#[derive(Debug, Clone)]
pub struct CosetGram {
    /// Dual coset index.
    pub coset: usize,
    /// Spectrum entries of the coset, in spectrum order.
    pub entries: Vec<usize>,
    /// Local offset of each entry inside `matrix`.
    pub offsets: Vec<usize>,
    /// `Σ n(γ)` square PSD matrix with identity diagonal blocks.
    pub matrix: CMatrix,
    /// Numerical rank, the dimension of the coset's dilation fiber.
    pub rank: usize,
}

impl CosetGram {
    /// Block `⟨W(γ_a)e_i, W(γ_b)e_j⟩` for local positions `a`, `b`.
    pub fn block(&self, a: usize, b: usize, spectrum: &Spectrum) -> CMatrix {
        let na = spectrum.multiplicity(self.entries[a]);
        let nb = spectrum.multiplicity(self.entries[b]);
        self.matrix
            .view((self.offsets[a], self.offsets[b]), (na, nb))
            .into_owned()
    }
}

/// Complete coordinates of a covariant observable: one Gram matrix per dual
/// coset that meets the spectrum.
#[derive(Debug, Clone)]
pub struct GramStructure {
    spectrum: Spectrum,
    cosets: Vec<CosetGram>,
}

fn numerical_rank(values: &[f64], rank_tol: f64) -> usize {
    let top = values.iter().copied().fold(0.0_f64, f64::max);
    values.iter().filter(|&&v| v > rank_tol * top).count()
}

impl GramStructure {
    /// `matrices` follow [`Spectrum::coset_blocks`] order.
    pub fn new(spectrum: &Spectrum, matrices: Vec<CMatrix>, tol: &Tolerances) -> Result<Self> {
        let blocks = spectrum.coset_blocks();
        if matrices.len() != blocks.len() {
            return invalid(format!(
                "{} Gram matrices for {} dual cosets",
                matrices.len(),
                blocks.len()
            ));
        }
        let mut cosets = Vec::with_capacity(blocks.len());
        for (block, matrix) in blocks.into_iter().zip(matrices) {
            let mut offsets = Vec::with_capacity(block.entries.len());
            let mut size = 0;
            for &e in &block.entries {
                offsets.push(size);
                size += spectrum.multiplicity(e);
            }
            if matrix.nrows() != size || matrix.ncols() != size {
                return invalid(format!(
                    "Gram matrix of dual coset {} is {}×{}, expected {size}×{size}",
                    block.coset,
                    matrix.nrows(),
                    matrix.ncols()
                ));
            }
            if hermiticity_residual(&matrix) > tol.eq_tol {
                return invalid(format!("Gram matrix of dual coset {} is not Hermitian", block.coset));
            }
            for (k, &e) in block.entries.iter().enumerate() {
                let n = spectrum.multiplicity(e);
                let diag = matrix.view((offsets[k], offsets[k]), (n, n)).into_owned();
                let res = frobenius(&(diag - linalg::identity(n)));
                if res > tol.eq_tol {
                    return invalid(format!(
                        "diagonal Gram block of {} deviates from identity by {res:.3e}",
                        spectrum.character(e)
                    ));
                }
            }
            let (values, _) = eigh(&matrix);
            if let Some(&lo) = values.first() {
                if lo < -tol.psd_tol {
                    return invalid(format!(
                        "Gram matrix of dual coset {} has eigenvalue {lo:.3e}",
                        block.coset
                    ));
                }
            }
            cosets.push(CosetGram {
                coset: block.coset,
                entries: block.entries,
                offsets,
                rank: numerical_rank(&values, tol.rank_tol),
                matrix,
            });
        }
        Ok(Self {
            spectrum: spectrum.clone(),
            cosets,
        })
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn cosets(&self) -> &[CosetGram] {
        &self.cosets
    }

    /// Dimension of the minimal dilation space, `Σ` of coset ranks.
    pub fn rank(&self) -> usize {
        self.cosets.iter().map(|c| c.rank).sum()
    }

    /// `G_{γ_a γ_b}` for spectrum entries `a`, `b`; `None` across cosets.
    pub fn block(&self, a: usize, b: usize) -> Option<CMatrix> {
        let c = self
            .cosets
            .iter()
            .find(|c| c.entries.contains(&a) && c.entries.contains(&b))?;
        let la = c.entries.iter().position(|&e| e == a)?;
        let lb = c.entries.iter().position(|&e| e == b)?;
        Some(c.block(la, lb, &self.spectrum))
    }
}

/// Effects from coset Gram matrices via the finite effect formula.
pub(crate) fn effects_from_gram(spectrum: &Spectrum, gram: &GramStructure) -> Vec<CMatrix> {
    let group = spectrum.group();
    let outcomes = spectrum.outcomes();
    let n_out = outcomes.len();
    let weight = 1.0 / n_out as f64;
    let d = spectrum.dim();
    (0..n_out)
        .map(|w| {
            let s = outcomes.representative(w);
            let phases: Vec<Complex64> = spectrum
                .entries()
                .iter()
                .map(|(gamma, _)| group.pairing(s, gamma))
                .collect();
            let mut eff = linalg::zeros(d, d);
            for c in gram.cosets() {
                for (la, &a) in c.entries.iter().enumerate() {
                    for (lb, &b) in c.entries.iter().enumerate() {
                        // ⟨s, γ_a − γ_b⟩ = ⟨s, γ_a⟩ conj⟨s, γ_b⟩
                        let ph = phases[a] * phases[b].conj() * weight;
                        let (na, nb) = (spectrum.multiplicity(a), spectrum.multiplicity(b));
                        for i in 0..na {
                            for j in 0..nb {
                                eff[(spectrum.offset(a) + i, spectrum.offset(b) + j)] =
                                    ph * c.matrix[(c.offsets[la] + i, c.offsets[lb] + j)];
                            }
                        }
                    }
                }
            }
            eff
        })
        .collect()
}

fn assert_valid(m: &CovariantPovm, tol: &Tolerances) -> Result<()> {
    let v = validate_povm(m, tol);
    let c = check_covariance(m, tol);
    if !v.passes() || !c.is_covariant {
        return Err(Error::NumericalInconsistency(format!(
            "constructed observable fails validation: min eigenvalue {:.3e}, normalization {:.3e}, covariance {:.3e}",
            v.min_eigenvalue, v.normalization_residual, c.max_residual
        )));
    }
    Ok(())
}

pub fn build_from_gram(gram: &GramStructure, tol: &Tolerances) -> Result<CovariantPovm> {
    let effects = effects_from_gram(gram.spectrum(), gram);
    let m = CovariantPovm::new(gram.spectrum().clone(), effects)?;
    assert_valid(&m, tol)?;
    Ok(m)
}

pub fn build_from_isometries(field: &IsometryField, tol: &Tolerances) -> Result<CovariantPovm> {
    let gram = field.gram(tol)?;
    Ok(build_from_gram(&gram, tol)?.with_provenance(field.clone()))
}

/// Reads the Gram structure off the effect at the identity coset,
/// `G_{γ₁γ₂} = |Ω| · M([0])` restricted to the coset blocks.
pub fn extract_gram(m: &CovariantPovm, tol: &Tolerances) -> Result<GramStructure> {
    let spec = m.spectrum();
    let zero_coset = spec.outcomes().coset_of(&spec.group().zero());
    let e0 = m.effect(zero_coset).scale(m.num_outcomes() as f64);
    let off = crate::povm::block_structure_residual(m);
    if off > tol.eq_tol {
        return Err(Error::NotCovariantStructure(format!(
            "effects couple different dual cosets (residual {off:.3e})"
        )));
    }
    let matrices = spec
        .coset_blocks()
        .iter()
        .map(|block| {
            let flat: Vec<usize> = block
                .entries
                .iter()
                .flat_map(|&e| (0..spec.multiplicity(e)).map(move |i| spec.offset(e) + i))
                .collect();
            CMatrix::from_fn(flat.len(), flat.len(), |i, j| e0[(flat[i], flat[j])])
        })
        .collect();
    GramStructure::new(spec, matrices, tol).map_err(|e| match e {
        Error::InvalidInput(msg) => Error::NotCovariantStructure(msg),
        other => other,
    })
}

/// Minimal factorization of a Gram structure, one coordinate slot per coset.
#[derive(Debug, Clone)]
pub(crate) struct CosetFactor {
    pub coset: usize,
    pub entries: Vec<usize>,
    /// First coordinate of this coset's slot in the dilation space.
    pub slot: usize,
    /// Slot dimension, the coset rank.
    pub dim: usize,
    /// `dim × n(γ)` local isometries, in entry order.
    pub maps: Vec<CMatrix>,
}

#[derive(Debug, Clone)]
pub(crate) struct Factorization {
    pub cosets: Vec<CosetFactor>,
    pub total_dim: usize,
}

impl Factorization {
    /// Isometry of entry `e` embedded in the full dilation space.
    pub fn embedded(&self, spectrum: &Spectrum, e: usize) -> CMatrix {
        let mut w = linalg::zeros(self.total_dim, spectrum.multiplicity(e));
        for c in &self.cosets {
            if let Some(k) = c.entries.iter().position(|&x| x == e) {
                w.view_mut((c.slot, 0), (c.dim, c.maps[k].ncols()))
                    .copy_from(&c.maps[k]);
            }
        }
        w
    }
}

pub(crate) fn factorize(gram: &GramStructure, tol: &Tolerances) -> Result<Factorization> {
    let spec = gram.spectrum();
    let mut cosets = Vec::with_capacity(gram.cosets().len());
    let mut slot = 0;
    for c in gram.cosets() {
        let (values, vectors) = eigh(&c.matrix);
        let top = values.last().copied().unwrap_or(0.0);
        if let Some(&lo) = values.first() {
            if lo < -tol.psd_tol {
                return invalid(format!(
                    "Gram matrix of dual coset {} has eigenvalue {lo:.3e}",
                    c.coset
                ));
            }
        }
        let kept: Vec<usize> = (0..values.len())
            .filter(|&k| values[k] > tol.rank_tol * top)
            .rev()
            .collect();
        // V = diag(√λ) Q*, rows ordered by decreasing eigenvalue
        let size = c.matrix.nrows();
        let v = CMatrix::from_fn(kept.len(), size, |r, col| {
            vectors[(col, kept[r])].conj() * values[kept[r]].sqrt()
        });
        let maps = c
            .entries
            .iter()
            .enumerate()
            .map(|(k, &e)| {
                v.view((0, c.offsets[k]), (kept.len(), spec.multiplicity(e)))
                    .into_owned()
            })
            .collect();
        cosets.push(CosetFactor {
            coset: c.coset,
            entries: c.entries.clone(),
            slot,
            dim: kept.len(),
            maps,
        });
        slot += kept.len();
    }
    Ok(Factorization {
        cosets,
        total_dim: slot,
    })
}

/// Kolmogorov factorization of a Gram structure into a minimal isometry
/// field, `m = Σ_c rank_c`, each coset in its own coordinate slot.
pub fn isometries_from_gram(gram: &GramStructure, tol: &Tolerances) -> Result<IsometryField> {
    let fac = factorize(gram, tol)?;
    let spec = gram.spectrum();
    let maps: Vec<CMatrix> = (0..spec.entries().len())
        .map(|e| {
            let w = fac.embedded(spec, e);
            // clipped eigenvalues leave W*W ≈ I only up to rank_tol; re-orthonormalize
            polar_isometry(&w)
        })
        .collect();
    // relaxed check: the clipping above is allowed to perturb by rank_tol
    let relaxed = Tolerances {
        eq_tol: tol.eq_tol.max(10.0 * tol.rank_tol),
        ..*tol
    };
    IsometryField::new(spec, fac.total_dim, maps, &relaxed)
}

/// Nearest isometry `W (W*W)^{-1/2}`.
fn polar_isometry(w: &CMatrix) -> CMatrix {
    let n = w.ncols();
    let gram = w.adjoint() * w;
    if frobenius(&(&gram - linalg::identity(n))) < 1e-14 {
        return w.clone();
    }
    let (vals, vecs) = eigh(&gram);
    let inv_sqrt = CMatrix::from_fn(n, n, |i, j| {
        if i == j && vals[i] > 0.0 {
            Complex64::new(1.0 / vals[i].sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    w * (&vecs * inv_sqrt * vecs.adjoint())
}

/// Nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    weights: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(weights: Vec<f64>, tol: &Tolerances) -> Result<Self> {
        if weights.is_empty() {
            return invalid("empty probability vector");
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < -tol.psd_tol) {
            return invalid(format!("probability weight {w} is negative or not finite"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > tol.eq_tol {
            return invalid(format!("probability weights sum to {total}"));
        }
        Ok(Self {
            weights: weights.into_iter().map(|w| w.max(0.0)).collect(),
        })
    }

    pub fn point_mass(len: usize, at: usize) -> Result<Self> {
        if at >= len {
            return invalid(format!("point mass at {at} outside 0..{len}"));
        }
        let mut weights = vec![0.0; len];
        weights[at] = 1.0;
        Ok(Self { weights })
    }

    pub fn uniform(len: usize) -> Result<Self> {
        if len == 0 {
            return invalid("empty probability vector");
        }
        Ok(Self {
            weights: vec![1.0 / len as f64; len],
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// The support point if all mass sits on one outcome.
    pub fn point_mass_at(&self, tol: &Tolerances) -> Option<usize> {
        self.weights
            .iter()
            .position(|&w| (w - 1.0).abs() <= tol.eq_tol)
    }

    /// Affine combination `t·self + (1 − t)·other`.
    pub fn mix(&self, t: f64, other: &Self) -> Result<Self> {
        if self.len() != other.len() || !(0.0..=1.0).contains(&t) {
            return invalid("incompatible probability vectors or weight outside [0, 1]");
        }
        Ok(Self {
            weights: self
                .weights
                .iter()
                .zip(&other.weights)
                .map(|(a, b)| t * a + (1.0 - t) * b)
                .collect(),
        })
    }

    /// `(ρ₁ ∗ ρ₂)(ω) = Σ_q ρ₁(q) ρ₂(ω − q)` on the quotient group.
    pub fn convolve(&self, other: &Self, quotient: &Transversal) -> Result<Self> {
        let n = quotient.len();
        if self.len() != n || other.len() != n {
            return invalid("probability vectors do not match the quotient");
        }
        let mut weights = vec![0.0; n];
        for (q, &a) in self.weights.iter().enumerate() {
            for (r, &b) in other.weights.iter().enumerate() {
                weights[quotient.quotient_add(q, r)] += a * b;
            }
        }
        Ok(Self { weights })
    }
}

/// `(ρ ∗ M)(ω) = Σ_q ρ(q) M(ω − q)`, shifts taken in the quotient group.
pub fn convolve(rho: &ProbabilityVector, m: &CovariantPovm) -> Result<CovariantPovm> {
    let quotient = m.spectrum().outcomes();
    if rho.len() != quotient.len() {
        return invalid(format!(
            "probability vector over {} points, value space has {}",
            rho.len(),
            quotient.len()
        ));
    }
    let d = m.dim();
    let effects = (0..quotient.len())
        .map(|w| {
            rho.weights()
                .iter()
                .enumerate()
                .filter(|(_, &p)| p != 0.0)
                .fold(linalg::zeros(d, d), |acc, (q, &p)| {
                    acc + m.effect(quotient.quotient_sub(w, q)).scale(p)
                })
        })
        .collect();
    CovariantPovm::new(m.spectrum().clone(), effects)
}

/// A function `η` on a finite group with `η(0) = 1` and PSD kernel
/// `[η(γ₁ − γ₂)]`.
#[derive(Debug, Clone)]
pub struct PositiveTypeFunction {
    group: GroupSpec,
    values: Vec<Complex64>,
}

impl PositiveTypeFunction {
    /// `values` are indexed by group element index.
    pub fn new(group: &GroupSpec, values: Vec<Complex64>, tol: &Tolerances) -> Result<Self> {
        if values.len() != group.order() {
            return invalid(format!(
                "{} values for a group of order {}",
                values.len(),
                group.order()
            ));
        }
        let f = Self {
            group: group.clone(),
            values,
        };
        let at_zero = f.values[group.index_of(&group.zero())];
        if (at_zero - Complex64::new(1.0, 0.0)).norm() > tol.eq_tol {
            return invalid(format!("η(0) = {at_zero}, expected 1"));
        }
        let kernel = f.kernel();
        if hermiticity_residual(&kernel) > tol.eq_tol {
            return invalid("η(−γ) ≠ conj η(γ): kernel is not Hermitian");
        }
        let lo = linalg::min_eigenvalue(&kernel);
        if lo < -tol.psd_tol {
            return invalid(format!(
                "η is not of positive type: kernel eigenvalue {lo:.3e}"
            ));
        }
        Ok(f)
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `[η(γ₁ − γ₂)]` over all group elements.
    pub fn kernel(&self) -> CMatrix {
        let g = &self.group;
        let elems = g.elements();
        CMatrix::from_fn(g.order(), g.order(), |i, j| {
            self.values[g.index_of(&g.sub(&elems[i], &elems[j]))]
        })
    }
}

/// `η(γ) = Σ_q ρ(q) conj⟨q, γ⟩`.
pub fn eta_from_rho(
    group: &GroupSpec,
    rho: &ProbabilityVector,
    tol: &Tolerances,
) -> Result<PositiveTypeFunction> {
    if rho.len() != group.order() {
        return invalid("probability vector does not match the group order");
    }
    let elems = group.elements();
    let values = elems
        .iter()
        .map(|gamma| {
            elems
                .iter()
                .zip(rho.weights())
                .map(|(q, &p)| group.pairing(q, gamma).conj() * p)
                .sum()
        })
        .collect();
    PositiveTypeFunction::new(group, values, tol)
}

/// `ρ(q) = |G|⁻¹ Σ_γ η(γ) ⟨q, γ⟩`.
pub fn rho_from_eta(eta: &PositiveTypeFunction, tol: &Tolerances) -> Result<ProbabilityVector> {
    let group = eta.group();
    let elems = group.elements();
    let n = group.order() as f64;
    let mut weights = Vec::with_capacity(elems.len());
    for q in &elems {
        let z: Complex64 = elems
            .iter()
            .zip(eta.values())
            .map(|(gamma, &v)| group.pairing(q, gamma) * v)
            .sum::<Complex64>()
            / n;
        if z.im.abs() > tol.eq_tol {
            return Err(Error::NumericalInconsistency(format!(
                "inverse transform has imaginary part {:.3e}",
                z.im
            )));
        }
        weights.push(z.re);
    }
    ProbabilityVector::new(weights, tol)
}

/// Invariant position observable on `ℤ_N` with Gram kernel `η(γ₁ − γ₂)`,
/// `η` the transform of `ρ`.
pub fn invariant_from_rho(
    n: u64,
    rho: &ProbabilityVector,
    tol: &Tolerances,
) -> Result<CovariantPovm> {
    let group = GroupSpec::cyclic(n)?;
    let spectrum = Spectrum::regular(&group, &Subgroup::trivial(&group))?;
    let eta = eta_from_rho(&group, rho, tol)?;
    // the regular spectrum lists characters in group order, so the kernel is the Gram matrix
    let gram = GramStructure::new(&spectrum, vec![eta.kernel()], tol)?;
    build_from_gram(&gram, tol)
}
