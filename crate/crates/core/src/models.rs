//! Preset observables and circle-valued moment observables.

pub mod laguerre;

use num_complex::Complex64;

use crate::abelian::{subgroup_closure, GroupSpec, Subgroup};
use crate::construct::{build_from_isometries, convolve, invariant_from_rho, IsometryField, ProbabilityVector};
use crate::error::{invalid, Error, Result};
use crate::extremality::{covariant_extreme_test, solve_blocks, BlockProblem, Certificate, ExtremalityReport, Verdict};
use crate::linalg::{self, eigh, frobenius, hermiticity_residual, CMatrix};
use crate::povm::{is_pvm, CovariantPovm, Tolerances};
use crate::repspace::Spectrum;

/// `ℤ_N` acting on itself, regular spectrum, constant isometries: the
/// projections onto the Fourier basis vectors.
pub fn canonical_position(n: u64) -> Result<CovariantPovm> {
    let g = GroupSpec::cyclic(n)?;
    let spectrum = Spectrum::regular(&g, &Subgroup::trivial(&g))?;
    build_from_isometries(&IsometryField::constant(&spectrum), &Tolerances::default())
}

/// Rank one qubit observable on `ℤ_N`: characters `{0, 1}` with equal
/// one-dimensional isometries. Requires `N ≥ 3`.
pub fn qubit_cyclic(n: u64) -> Result<CovariantPovm> {
    if n < 3 {
        return invalid(format!("qubit_cyclic needs N ≥ 3, got {n}"));
    }
    let g = GroupSpec::cyclic(n)?;
    let entries = [(g.element(&[0])?, 1), (g.element(&[1])?, 1)];
    let spectrum = Spectrum::new(&g, &Subgroup::trivial(&g), &entries)?;
    build_from_isometries(&IsometryField::constant(&spectrum), &Tolerances::default())
}

/// Position difference on `ℤ_N × ℤ_N` with outcomes `ℤ_N × ℤ_N / diagonal`.
///
/// Outcome `k` has representative `(0, k)`; without noise its effect
/// projects onto position pairs `(w, z)` with `z − w = k`. Noise is applied
/// by convolution on the outcome group.
pub fn position_difference(n: u64, noise: &ProbabilityVector) -> Result<CovariantPovm> {
    if n < 2 {
        return invalid(format!("position_difference needs N ≥ 2, got {n}"));
    }
    let g = GroupSpec::new(&[n, n])?;
    let diagonal = subgroup_closure(&g, &[g.element(&[1, 1])?])?;
    let spectrum = Spectrum::regular(&g, &diagonal)?;
    if noise.len() != spectrum.num_outcomes() {
        return invalid(format!(
            "noise over {} points, expected {}",
            noise.len(),
            spectrum.num_outcomes()
        ));
    }
    let tol = Tolerances::default();
    let sharp = build_from_isometries(&IsometryField::constant(&spectrum), &tol)?;
    if noise.point_mass_at(&tol) == Some(0) {
        return Ok(sharp);
    }
    convolve(noise, &sharp)
}

/// Extreme points of the translation invariant observables on `ℤ_N` are the
/// point masses; the verdict is cross-checked against [`is_pvm`] and
/// [`covariant_extreme_test`].
pub fn invariant_extreme_classify(rho: &ProbabilityVector, tol: &Tolerances) -> Result<Verdict> {
    let m = invariant_from_rho(rho.len() as u64, rho, tol)?;
    let point = rho.point_mass_at(tol).is_some();
    let sharp = is_pvm(&m, tol)?;
    let cov = covariant_extreme_test(&m, tol)?.verdict;
    let verdict = if point { Verdict::Extreme } else { Verdict::NotExtreme };
    if sharp != point || cov != verdict {
        return Err(Error::NumericalInconsistency(format!(
            "point mass {point}, sharp {sharp}, covariant verdict {cov}"
        )));
    }
    Ok(verdict)
}

/// Phase-like observable on the circle determined by a correlation matrix
/// `C_kl = ⟨ξ_k, ξ_l⟩` over a finite index set `Z ⊂ ℤ`.
///
/// The effect of an arc `B` is `Σ_kl C_kl ∫_B z^{Z_k − Z_l} dz/2π |k⟩⟨l|`.
#[derive(Debug, Clone)]
pub struct MomentObservable {
    indices: Vec<i64>,
    correlation: CMatrix,
}

/// Fourier modes of a perturbation left unconstrained by the moments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeModes {
    /// Modes `|m| ≤ window` were examined.
    pub window: i64,
    /// Free modes inside the window, ascending.
    pub modes: Vec<i64>,
    /// Every mode with `|m| > window` is free as well.
    pub all_beyond_window_free: bool,
}

impl MomentObservable {
    pub fn new(indices: Vec<i64>, correlation: CMatrix, tol: &Tolerances) -> Result<Self> {
        let d = indices.len();
        if d == 0 {
            return invalid("index set is empty");
        }
        let mut sorted = indices.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return invalid("index set has repeated entries");
        }
        if correlation.nrows() != d || correlation.ncols() != d {
            return invalid(format!(
                "correlation matrix is {}×{}, expected {d}×{d}",
                correlation.nrows(),
                correlation.ncols()
            ));
        }
        if hermiticity_residual(&correlation) > tol.eq_tol {
            return invalid("correlation matrix is not Hermitian");
        }
        if let Some(k) = (0..d).find(|&k| (correlation[(k, k)] - Complex64::new(1.0, 0.0)).norm() > tol.eq_tol) {
            return invalid(format!("correlation diagonal entry {k} is {}", correlation[(k, k)]));
        }
        let lo = linalg::min_eigenvalue(&correlation);
        if lo < -tol.psd_tol {
            return invalid(format!("correlation matrix has eigenvalue {lo:.3e}"));
        }
        Ok(Self {
            indices,
            correlation,
        })
    }

    /// Indices `0..d`, all-ones correlation.
    pub fn canonical_phase(d: usize) -> Result<Self> {
        Self::new(
            (0..d as i64).collect(),
            CMatrix::from_element(d, d, Complex64::new(1.0, 0.0)),
            &Tolerances::default(),
        )
    }

    /// Indices `0..d`, identity correlation.
    pub fn trivial_phase(d: usize) -> Result<Self> {
        Self::new((0..d as i64).collect(), linalg::identity(d), &Tolerances::default())
    }

    pub fn indices(&self) -> &[i64] {
        &self.indices
    }

    pub fn correlation(&self) -> &CMatrix {
        &self.correlation
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    /// Effect of the arc from `theta1` to `theta2`, `0 ≤ θ₂ − θ₁ ≤ 2π`.
    pub fn effects_on_arc(&self, theta1: f64, theta2: f64) -> Result<CMatrix> {
        let len = theta2 - theta1;
        if !(0.0..=2.0 * std::f64::consts::PI + 1e-12).contains(&len) {
            return invalid(format!("arc [{theta1}, {theta2}] is not within one turn"));
        }
        let d = self.dim();
        Ok(CMatrix::from_fn(d, d, |k, l| {
            self.correlation[(k, l)] * arc_moment(self.indices[k] - self.indices[l], theta1, theta2)
        }))
    }

    /// Modes `m` of a perturbation not touched by any moment, i.e. `m ∉ Z − Z`.
    pub fn free_modes(&self) -> FreeModes {
        let lo = *self.indices.iter().min().expect("nonempty");
        let hi = *self.indices.iter().max().expect("nonempty");
        let window = hi - lo + 1;
        let mut diffs: Vec<i64> = self
            .indices
            .iter()
            .flat_map(|a| self.indices.iter().map(move |b| a - b))
            .collect();
        diffs.sort_unstable();
        diffs.dedup();
        let modes = (-window..=window)
            .filter(|m| diffs.binary_search(m).is_err())
            .collect();
        FreeModes {
            window,
            modes,
            all_beyond_window_free: true,
        }
    }

    fn factor(&self, tol: &Tolerances) -> CMatrix {
        let (values, vectors) = eigh(&self.correlation);
        let top = values.last().copied().unwrap_or(0.0);
        let kept: Vec<usize> = (0..values.len())
            .filter(|&k| values[k] > tol.rank_tol * top)
            .rev()
            .collect();
        CMatrix::from_fn(kept.len(), self.dim(), |r, c| {
            vectors[(c, kept[r])].conj() * values[kept[r]].sqrt()
        })
    }
}

/// `∫_{θ₁}^{θ₂} e^{imθ} dθ / 2π`.
pub fn arc_moment(m: i64, theta1: f64, theta2: f64) -> Complex64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    if m == 0 {
        return Complex64::new((theta2 - theta1) / two_pi, 0.0);
    }
    let mf = m as f64;
    let num = Complex64::from_polar(1.0, mf * theta2) - Complex64::from_polar(1.0, mf * theta1);
    num / Complex64::new(0.0, two_pi * mf)
}

/// Extremality of a moment observable within the rotation covariant
/// observables: no nonzero Hermitian `A` on the factor space of `C` with
/// `⟨ξ_k, A ξ_k⟩ = 0` for all `k`.
pub fn moment_covariant_extreme(
    obs: &MomentObservable,
    tol: &Tolerances,
) -> Result<ExtremalityReport<MomentObservable>> {
    let v = obs.factor(tol);
    let r = v.nrows();
    let problem = BlockProblem {
        dims: vec![r],
        maps: vec![(0..obs.dim()).map(|k| v.columns(k, 1).into_owned()).collect()],
    };
    let (mut report, blocks) = solve_blocks::<MomentObservable>(&problem, tol)?;
    if let Some(mut blocks) = blocks {
        let a = blocks.remove(0);
        let side = |sign: f64| {
            let c = v.adjoint() * (linalg::identity(r) + a.scale(sign)) * &v;
            let relaxed = Tolerances {
                eq_tol: tol.eq_tol.max(10.0 * report.residuals.constraint),
                ..*tol
            };
            MomentObservable::new(obs.indices.clone(), linalg::hermitian_part(&c), &relaxed)
        };
        let (plus, minus) = (side(1.0)?, side(-1.0)?);
        let mid = (plus.correlation() + minus.correlation()).scale(0.5);
        report.residuals.reconstruction = frobenius(&(mid - obs.correlation()));
        report.residuals.witness_min_eigenvalue =
            linalg::min_eigenvalue(plus.correlation()).min(linalg::min_eigenvalue(minus.correlation()));
        report.certificate = Some(Certificate::Moment { operator: a });
        report.witnesses = Some((plus, minus));
    }
    Ok(report)
}
