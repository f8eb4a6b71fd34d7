//! Extremality tests with certificates and witness decompositions.
//!
//! Both tests reduce to the nullspace of a real-linear map on Hermitian
//! unknowns:
//!
//! * covariant: block operators `A_c` on each coset slot of the dilation
//!   space with `W(γ)* A_c W(γ) = 0` for every character `γ` of the coset;
//! * global: one operator `D(ω)` per outcome on the whole dilation space with
//!   `Σ_ω J_ω* D(ω) J_ω = 0`, where `J_ω` is the outcome component of the
//!   minimal Naimark dilation.
//!
//! A nonzero nullspace element, scaled to operator norm one, perturbs the
//! observable in both directions while keeping it positive, which gives the
//! witnesses `M± ` with `M = (M⁺ + M⁻)/2`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::abelian::GroupElement;
use crate::construct::{self, extract_gram, factorize, Factorization, GramStructure};
use crate::error::{Error, Result};
use crate::linalg::{self, eigh, frobenius, nullspace, op_norm, CMatrix, HermitianBasis, Nullspace};
use crate::povm::{check_covariance, distance, mix, validate_povm, CovariantPovm, Tolerances};
use crate::repspace::Spectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Extreme,
    NotExtreme,
}

impl Verdict {
    pub fn is_extreme(self) -> bool {
        self == Verdict::Extreme
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Extreme => "Extreme",
            Verdict::NotExtreme => "NotExtreme",
        })
    }
}

/// A nonzero Hermitian perturbation direction.
#[derive(Debug, Clone)]
pub enum Certificate {
    /// One block per dual coset, acting on that coset's slot.
    Covariant {
        cosets: Vec<usize>,
        blocks: Vec<CMatrix>,
    },
    /// One operator per outcome on the full dilation space, for the given section.
    Global {
        section: Vec<GroupElement>,
        components: Vec<CMatrix>,
    },
    /// Operator on the factor space of a moment observable.
    Moment { operator: CMatrix },
}

impl Certificate {
    /// Largest operator norm over the blocks.
    pub fn norm(&self) -> f64 {
        let blocks: &[CMatrix] = match self {
            Certificate::Covariant { blocks, .. } => blocks,
            Certificate::Global { components, .. } => components,
            Certificate::Moment { operator } => std::slice::from_ref(operator),
        };
        blocks.iter().map(op_norm).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Residuals {
    /// Frobenius norm of the constraint map applied to the certificate.
    pub constraint: f64,
    /// `max_ω ‖(M⁺(ω) + M⁻(ω))/2 − M(ω)‖`.
    pub reconstruction: f64,
    /// Smallest witness effect eigenvalue.
    pub witness_min_eigenvalue: f64,
    /// Largest witness normalization residual.
    pub witness_normalization: f64,
}

#[derive(Debug, Clone)]
pub struct ExtremalityReport<W = CovariantPovm> {
    pub verdict: Verdict,
    /// Real dimension of the perturbation nullspace.
    pub perturbation_dim: usize,
    pub certificate: Option<Certificate>,
    pub witnesses: Option<(W, W)>,
    pub residuals: Residuals,
    /// Singular values of the constraint matrix, descending, padded with
    /// zeros up to the number of unknowns.
    pub singular_values: Vec<f64>,
    pub sigma_max: f64,
    pub threshold: f64,
    pub smallest_retained: Option<f64>,
}

impl<W> ExtremalityReport<W> {
    fn from_nullspace(ns: &Nullspace) -> Self {
        let dim = ns.dim();
        Self {
            verdict: if dim == 0 {
                Verdict::Extreme
            } else {
                Verdict::NotExtreme
            },
            perturbation_dim: dim,
            certificate: None,
            witnesses: None,
            residuals: Residuals::default(),
            singular_values: ns.singular_values.clone(),
            sigma_max: ns.sigma_max,
            threshold: ns.threshold,
            smallest_retained: ns.smallest_retained(),
        }
    }
}

/// Block-diagonal covariant constraint map: coset `c` carries a Hermitian
/// unknown of size `dims[c]` and a constraint `V* A V = 0` per map.
pub(crate) struct BlockProblem {
    pub dims: Vec<usize>,
    pub maps: Vec<Vec<CMatrix>>,
}

impl BlockProblem {
    fn from_factorization(fac: &Factorization) -> Self {
        Self {
            dims: fac.cosets.iter().map(|c| c.dim).collect(),
            maps: fac.cosets.iter().map(|c| c.maps.clone()).collect(),
        }
    }

    fn unknowns(&self) -> usize {
        self.dims.iter().map(|d| d * d).sum()
    }

    fn rows(&self) -> usize {
        self.maps
            .iter()
            .flatten()
            .map(|v| v.ncols() * v.ncols())
            .sum()
    }

    fn matrix(&self) -> DMatrix<f64> {
        let mut a = DMatrix::<f64>::zeros(self.rows(), self.unknowns());
        let (mut row0, mut col0) = (0, 0);
        for (dim, maps) in self.dims.iter().zip(&self.maps) {
            let basis = HermitianBasis::new(*dim);
            let block_rows: usize = maps.iter().map(|v| v.ncols() * v.ncols()).sum();
            for k in 0..basis.len() {
                let b = basis.element(k);
                let mut r = row0;
                for v in maps {
                    let out = HermitianBasis::new(v.ncols()).coords(&(v.adjoint() * &b * v));
                    for (i, x) in out.into_iter().enumerate() {
                        a[(r + i, col0 + k)] = x;
                    }
                    r += v.ncols() * v.ncols();
                }
            }
            row0 += block_rows;
            col0 += basis.len();
        }
        a
    }

    fn blocks(&self, x: &[f64]) -> Vec<CMatrix> {
        let mut at = 0;
        self.dims
            .iter()
            .map(|&d| {
                let basis = HermitianBasis::new(d);
                let b = basis.from_coords(&x[at..at + basis.len()]);
                at += basis.len();
                b
            })
            .collect()
    }

    fn residual(&self, blocks: &[CMatrix]) -> f64 {
        self.maps
            .iter()
            .zip(blocks)
            .flat_map(|(maps, a)| maps.iter().map(move |v| frobenius(&(v.adjoint() * a * v))))
            .map(|r| r * r)
            .sum::<f64>()
            .sqrt()
    }
}

/// Flips the sign so that the first coordinate of near-maximal size is positive.
fn canonical_sign(x: &mut [f64]) {
    let top = x.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if let Some(&pivot) = x.iter().find(|v| v.abs() > 0.5 * top) {
        if pivot < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

/// Scales blocks to largest operator norm one.
fn normalize_blocks(blocks: &mut [CMatrix]) {
    let n = blocks.iter().map(op_norm).fold(0.0, f64::max);
    if n > 0.0 {
        for b in blocks.iter_mut() {
            *b = b.unscale(n);
        }
    }
}

fn certificate_limit(tol: &Tolerances, unknowns: usize) -> f64 {
    tol.eq_tol.max(tol.rank_tol) * (unknowns.max(1) as f64).sqrt()
}

/// Solves the block problem; returns the report skeleton and, when the
/// nullspace is nonzero, the normalized certificate blocks.
pub(crate) fn solve_blocks<W>(
    problem: &BlockProblem,
    tol: &Tolerances,
) -> Result<(ExtremalityReport<W>, Option<Vec<CMatrix>>)> {
    let ns = nullspace(&problem.matrix(), tol.rank_tol)?;
    let mut report = ExtremalityReport::from_nullspace(&ns);
    let blocks = ns.basis.first().map(|v| {
        let mut x: Vec<f64> = v.iter().copied().collect();
        canonical_sign(&mut x);
        let mut blocks = problem.blocks(&x);
        normalize_blocks(&mut blocks);
        blocks
    });
    if let Some(b) = &blocks {
        report.residuals.constraint = problem.residual(b);
    }
    Ok((report, blocks))
}

fn witness_residuals(
    m: &CovariantPovm,
    plus: &CovariantPovm,
    minus: &CovariantPovm,
    tol: &Tolerances,
    require_covariance: bool,
) -> Result<Residuals> {
    let vp = validate_povm(plus, tol);
    let vm = validate_povm(minus, tol);
    let rec = distance(&mix(0.5, plus, minus)?, m)?;
    let res = Residuals {
        constraint: 0.0,
        reconstruction: rec,
        witness_min_eigenvalue: vp.min_eigenvalue.min(vm.min_eigenvalue),
        witness_normalization: vp.normalization_residual.max(vm.normalization_residual),
    };
    let covariant = !require_covariance
        || (check_covariance(plus, tol).is_covariant && check_covariance(minus, tol).is_covariant);
    if !vp.passes() || !vm.passes() || !covariant || rec > tol.eq_tol {
        return Err(Error::NumericalInconsistency(format!(
            "witnesses fail verification: min eigenvalue {:.3e}, normalization {:.3e}, reconstruction {:.3e}, covariant {covariant}",
            res.witness_min_eigenvalue, res.witness_normalization, rec
        )));
    }
    Ok(res)
}

/// Decides extremality within the covariant observables.
pub fn covariant_extreme_test(m: &CovariantPovm, tol: &Tolerances) -> Result<ExtremalityReport> {
    let gram = extract_gram(m, tol)?;
    let fac = factorize(&gram, tol)?;
    let problem = BlockProblem::from_factorization(&fac);
    let (mut report, blocks) = solve_blocks(&problem, tol)?;
    if let Some(blocks) = blocks {
        let cert = Certificate::Covariant {
            cosets: fac.cosets.iter().map(|c| c.coset).collect(),
            blocks,
        };
        let constraint = report.residuals.constraint;
        let (plus, minus) = witnesses_from_certificate(m, &cert, tol)?;
        report.residuals = witness_residuals(m, &plus, &minus, tol, true)?;
        report.residuals.constraint = constraint;
        report.certificate = Some(cert);
        report.witnesses = Some((plus, minus));
    }
    Ok(report)
}

/// Outcome components `J_ω : ℋ → 𝐇` of the minimal Naimark dilation for a
/// section `s`, with `Σ_ω J_ω* J_ω = I` and `J_ω* J_ω = M(ω)`.
#[derive(Debug, Clone)]
pub struct NaimarkDilation {
    section: Vec<GroupElement>,
    ambient_dim: usize,
    components: Vec<CMatrix>,
}

impl NaimarkDilation {
    /// Dilation for the canonical section.
    pub fn minimal(m: &CovariantPovm, tol: &Tolerances) -> Result<Self> {
        let section = m.spectrum().outcomes().representatives().to_vec();
        Self::with_section(m, &section, tol)
    }

    pub fn with_section(m: &CovariantPovm, section: &[GroupElement], tol: &Tolerances) -> Result<Self> {
        let spec = m.spectrum();
        spec.outcomes().check_section(section)?;
        let gram = extract_gram(m, tol)?;
        let fac = factorize(&gram, tol)?;
        Ok(Self::from_factorization(spec, &fac, section))
    }

    pub(crate) fn from_factorization(spec: &Spectrum, fac: &Factorization, section: &[GroupElement]) -> Self {
        let group = spec.group();
        let scale = 1.0 / (section.len() as f64).sqrt();
        let embedded: Vec<CMatrix> = (0..spec.entries().len())
            .map(|e| fac.embedded(spec, e))
            .collect();
        let components = section
            .iter()
            .map(|s| {
                let mut j = linalg::zeros(fac.total_dim, spec.dim());
                for (e, (gamma, n)) in spec.entries().iter().enumerate() {
                    let ph = group.pairing(s, gamma).conj() * scale;
                    j.view_mut((0, spec.offset(e)), (fac.total_dim, *n))
                        .copy_from(&embedded[e].map(|z| z * ph));
                }
                j
            })
            .collect();
        Self {
            section: section.to_vec(),
            ambient_dim: fac.total_dim,
            components,
        }
    }

    pub fn section(&self) -> &[GroupElement] {
        &self.section
    }

    /// `dim 𝐇`.
    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn components(&self) -> &[CMatrix] {
        &self.components
    }

    /// `J` as one `|Ω|·m × d_ℋ` matrix.
    pub fn stacked(&self) -> CMatrix {
        let m = self.ambient_dim;
        let d = self.components.first().map_or(0, |j| j.ncols());
        let mut out = linalg::zeros(self.components.len() * m, d);
        for (w, j) in self.components.iter().enumerate() {
            out.view_mut((w * m, 0), (m, d)).copy_from(j);
        }
        out
    }

    /// `J*J = I`.
    pub fn isometry_residual(&self) -> f64 {
        let d = self.components.first().map_or(0, |j| j.ncols());
        let total = self
            .components
            .iter()
            .fold(linalg::zeros(d, d), |acc, j| acc + j.adjoint() * j);
        frobenius(&(total - linalg::identity(d)))
    }

    /// Whether `J` is onto, i.e. square with `JJ* = I`.
    pub fn is_unitary(&self, tol: &Tolerances) -> bool {
        let j = self.stacked();
        j.nrows() == j.ncols()
            && frobenius(&(&j * j.adjoint() - linalg::identity(j.nrows()))) <= tol.eq_tol
    }

    /// `J_ω* X J_ω` for each outcome.
    pub fn compress(&self, x: &[CMatrix]) -> Vec<CMatrix> {
        self.components
            .iter()
            .zip(x)
            .map(|(j, x)| j.adjoint() * x * j)
            .collect()
    }
}

fn global_matrix(dil: &NaimarkDilation) -> DMatrix<f64> {
    let m = dil.ambient_dim;
    let d = dil.components.first().map_or(0, |j| j.ncols());
    let inner = HermitianBasis::new(m);
    let outer = HermitianBasis::new(d);
    let mut a = DMatrix::<f64>::zeros(outer.len(), dil.components.len() * inner.len());
    let mut col = 0;
    let mut buf = vec![0.0; outer.len()];
    for j in &dil.components {
        for k in 0..inner.len() {
            outer.write_coords(&(j.adjoint() * inner.element(k) * j), &mut buf);
            a.column_mut(col).copy_from_slice(&buf);
            col += 1;
        }
    }
    a
}

fn global_residual(dil: &NaimarkDilation, components: &[CMatrix]) -> f64 {
    let d = dil.components.first().map_or(0, |j| j.ncols());
    frobenius(
        &dil.compress(components)
            .into_iter()
            .fold(linalg::zeros(d, d), |acc, x| acc + x),
    )
}

/// Decides extremality among all observables on the outcome set, using the
/// canonical section.
pub fn global_extreme_test(m: &CovariantPovm, tol: &Tolerances) -> Result<ExtremalityReport> {
    let section = m.spectrum().outcomes().representatives().to_vec();
    global_extreme_test_with_section(m, &section, tol)
}

pub fn global_extreme_test_with_section(
    m: &CovariantPovm,
    section: &[GroupElement],
    tol: &Tolerances,
) -> Result<ExtremalityReport> {
    let dil = NaimarkDilation::with_section(m, section, tol)?;
    let ns = nullspace(&global_matrix(&dil), tol.rank_tol)?;
    let mut report = ExtremalityReport::from_nullspace(&ns);
    if let Some(v) = ns.basis.first() {
        let mut x: Vec<f64> = v.iter().copied().collect();
        canonical_sign(&mut x);
        let inner = HermitianBasis::new(dil.ambient_dim);
        let mut components: Vec<CMatrix> = x
            .chunks(inner.len())
            .map(|c| inner.from_coords(c))
            .collect();
        normalize_blocks(&mut components);
        let constraint = global_residual(&dil, &components);
        let cert = Certificate::Global {
            section: section.to_vec(),
            components,
        };
        let (plus, minus) = witnesses_from_certificate(m, &cert, tol)?;
        report.residuals = witness_residuals(m, &plus, &minus, tol, false)?;
        report.residuals.constraint = constraint;
        report.certificate = Some(cert);
        report.witnesses = Some((plus, minus));
    }
    Ok(report)
}

/// Builds `M⁺, M⁻` from a certificate of norm at most one.
///
/// Covariant certificates replace each Gram block `V*V` by `V*(I ± A)V`;
/// global certificates give `M±(ω) = J_ω*(I ± D(ω))J_ω`.
pub fn witnesses_from_certificate(
    m: &CovariantPovm,
    cert: &Certificate,
    tol: &Tolerances,
) -> Result<(CovariantPovm, CovariantPovm)> {
    let norm = cert.norm();
    if norm > 1.0 + tol.eq_tol {
        return Err(Error::InvalidCertificate(format!(
            "certificate norm {norm:.6} exceeds 1"
        )));
    }
    let spec = m.spectrum();
    match cert {
        Certificate::Covariant { cosets, blocks } => {
            let gram = extract_gram(m, tol)?;
            let fac = factorize(&gram, tol)?;
            let problem = BlockProblem::from_factorization(&fac);
            let expected: Vec<usize> = fac.cosets.iter().map(|c| c.coset).collect();
            if *cosets != expected
                || blocks.len() != problem.dims.len()
                || blocks
                    .iter()
                    .zip(&problem.dims)
                    .any(|(b, &d)| b.nrows() != d || b.ncols() != d)
            {
                return Err(Error::InvalidCertificate(
                    "certificate blocks do not match the dilation structure".into(),
                ));
            }
            check_hermitian(blocks, tol)?;
            let res = problem.residual(blocks);
            if res > certificate_limit(tol, problem.unknowns()) {
                return Err(Error::InvalidCertificate(format!(
                    "constraint residual {res:.3e} too large"
                )));
            }
            let side = |sign: f64| -> Result<CovariantPovm> {
                let matrices = fac
                    .cosets
                    .iter()
                    .zip(blocks)
                    .map(|(c, a)| {
                        let v = stack_maps(&c.maps, c.dim);
                        let shifted = linalg::identity(c.dim) + a.scale(sign);
                        v.adjoint() * shifted * v
                    })
                    .collect();
                let relaxed = Tolerances {
                    eq_tol: tol.eq_tol.max(res * 10.0),
                    ..*tol
                };
                let g = GramStructure::new(spec, matrices, &relaxed)?;
                CovariantPovm::new(spec.clone(), construct::effects_from_gram(spec, &g))
            };
            Ok((side(1.0)?, side(-1.0)?))
        }
        Certificate::Global {
            section,
            components,
        } => {
            let dil = NaimarkDilation::with_section(m, section, tol)?;
            if components.len() != dil.components.len()
                || components
                    .iter()
                    .any(|c| c.nrows() != dil.ambient_dim || c.ncols() != dil.ambient_dim)
            {
                return Err(Error::InvalidCertificate(
                    "certificate components do not match the dilation".into(),
                ));
            }
            check_hermitian(components, tol)?;
            let res = global_residual(&dil, components);
            let unknowns = components.len() * dil.ambient_dim * dil.ambient_dim;
            if res > certificate_limit(tol, unknowns) {
                return Err(Error::InvalidCertificate(format!(
                    "constraint residual {res:.3e} too large"
                )));
            }
            let eye = linalg::identity(dil.ambient_dim);
            let side = |sign: f64| -> Result<CovariantPovm> {
                let shifted: Vec<CMatrix> = components.iter().map(|d| &eye + d.scale(sign)).collect();
                CovariantPovm::new(spec.clone(), dil.compress(&shifted))
            };
            Ok((side(1.0)?, side(-1.0)?))
        }
        Certificate::Moment { .. } => Err(Error::InvalidCertificate(
            "moment certificates apply to moment observables".into(),
        )),
    }
}

fn check_hermitian(blocks: &[CMatrix], tol: &Tolerances) -> Result<()> {
    let worst = blocks
        .iter()
        .map(linalg::hermiticity_residual)
        .fold(0.0, f64::max);
    if worst > tol.eq_tol {
        return Err(Error::InvalidCertificate(format!(
            "certificate is not Hermitian (residual {worst:.3e})"
        )));
    }
    Ok(())
}

fn stack_maps(maps: &[CMatrix], rows: usize) -> CMatrix {
    let cols: usize = maps.iter().map(|v| v.ncols()).sum();
    let mut out = linalg::zeros(rows, cols);
    let mut at = 0;
    for v in maps {
        out.view_mut((0, at), (rows, v.ncols())).copy_from(v);
        at += v.ncols();
    }
    out
}

/// Dimension of the minimal dilation space.
pub fn rank_of(m: &CovariantPovm, tol: &Tolerances) -> Result<usize> {
    Ok(extract_gram(m, tol)?.rank())
}

/// Whether the spectrum carries rank one observables: all characters in a
/// single dual coset, each with multiplicity one.
pub fn rank1_admissible(spec: &Spectrum) -> bool {
    spec.coset_blocks().len() == 1 && spec.entries().iter().all(|(_, n)| *n == 1)
}

/// An explicit two-sided perturbation `M ± εΔ` found by sampling.
#[derive(Debug, Clone)]
pub struct MidpointDecomposition {
    pub plus: CovariantPovm,
    pub minus: CovariantPovm,
    /// Direction at the identity coset, operator norm one.
    pub direction: CMatrix,
    pub epsilon: f64,
    /// Zero-based index of the successful trial.
    pub trial: usize,
}

const ORACLE_MAX_ITER: usize = 5000;

/// Searches for a covariant midpoint decomposition by sampling random
/// directions.
///
/// Each trial draws a Gaussian Hermitian matrix on the range of the identity
/// coset effect and alternately projects onto that range and onto covariant
/// zero-sum directions. A surviving direction is scaled to the largest step
/// keeping the identity effect positive, halved, transported to every
/// outcome, and the two resulting observables are validated directly.
/// Finding one proves the observable is not extreme in the covariant set;
/// finding none proves nothing.
pub fn midpoint_oracle(
    m: &CovariantPovm,
    trials: usize,
    seed: u64,
    tol: &Tolerances,
) -> Option<MidpointDecomposition> {
    let spec = m.spectrum();
    let outcomes = spec.outcomes();
    let origin = outcomes.coset_of(&spec.group().zero());
    let (values, vectors) = eigh(m.effect(origin));
    let top = values.last().copied().unwrap_or(0.0);
    let keep: Vec<usize> = (0..values.len())
        .filter(|&k| values[k] > tol.rank_tol.max(f64::EPSILON) * top)
        .collect();
    let r = keep.len();
    if r == 0 {
        return None;
    }
    let q = CMatrix::from_fn(spec.dim(), r, |i, k| vectors[(i, keep[k])]);
    let lambda: Vec<f64> = keep.iter().map(|&k| values[k]).collect();
    let d = spec.dim();
    // allowed: same dual coset but different characters
    let allowed = DMatrix::<bool>::from_fn(d, d, |i, j| {
        let (a, b) = (spec.entry_of_flat(i), spec.entry_of_flat(j));
        a != b && spec.same_coset(a, b)
    });
    let project_f = |x: &CMatrix| -> CMatrix {
        CMatrix::from_fn(d, d, |i, j| {
            if allowed[(i, j)] {
                x[(i, j)]
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let mut y = CMatrix::from_fn(r, r, |_, _| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        });
        y = linalg::hermitian_part(&y);
        let start = frobenius(&y);
        if start == 0.0 {
            continue;
        }
        let mut collapsed = false;
        for _ in 0..ORACLE_MAX_ITER {
            let full = &q * &y * q.adjoint();
            let fy = project_f(&full);
            let leak = frobenius(&(&full - &fy));
            y = q.adjoint() * fy * &q;
            let norm = frobenius(&y);
            if norm < 1e-9 * start {
                collapsed = true;
                break;
            }
            if leak < 1e-12 * norm {
                break;
            }
        }
        if collapsed {
            continue;
        }
        let mut delta = project_f(&(&q * &y * q.adjoint()));
        delta = linalg::hermitian_part(&delta);
        let n = op_norm(&delta);
        if n == 0.0 {
            continue;
        }
        delta = delta.unscale(n);
        let compressed = q.adjoint() * &delta * &q;
        let whitened = CMatrix::from_fn(r, r, |i, j| {
            compressed[(i, j)] / (lambda[i] * lambda[j]).sqrt()
        });
        let rho = op_norm(&whitened);
        if rho == 0.0 {
            continue;
        }
        let epsilon = 0.5 / rho;
        if epsilon <= tol.psd_tol {
            continue;
        }
        let side = |sign: f64| -> Option<CovariantPovm> {
            let effects = (0..outcomes.len())
                .map(|w| {
                    let u = spec.rep_diagonal(outcomes.representative(w));
                    let moved = CMatrix::from_fn(d, d, |i, j| u[i] * delta[(i, j)] * u[j].conj());
                    m.effect(w) + moved.scale(sign * epsilon)
                })
                .collect();
            let p = CovariantPovm::new(spec.clone(), effects).ok()?;
            (validate_povm(&p, tol).passes() && check_covariance(&p, tol).is_covariant).then_some(p)
        };
        if let (Some(plus), Some(minus)) = (side(1.0), side(-1.0)) {
            return Some(MidpointDecomposition {
                plus,
                minus,
                direction: delta,
                epsilon,
                trial,
            });
        }
    }
    None
}
