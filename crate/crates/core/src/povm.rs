//! Observables on `Ω = G/H`: effect matrices, validity checks and mixing.

use num_complex::Complex64;

use crate::construct::IsometryField;
use crate::error::{invalid, Error, Result};
use crate::linalg::{self, frobenius, hermiticity_residual, min_eigenvalue, op_norm, CMatrix};
use crate::repspace::Spectrum;

/// Environment variable overriding the default tolerances.
pub const TOLERANCE_ENV: &str = "COVEXT_TOL";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Allowed negative eigenvalue magnitude.
    pub psd_tol: f64,
    /// Allowed deviation in equality checks.
    pub eq_tol: f64,
    /// Singular values below `rank_tol · σ_max` count as zero.
    pub rank_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            psd_tol: 1e-9,
            eq_tol: 1e-9,
            rank_tol: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn new(psd_tol: f64, eq_tol: f64, rank_tol: f64) -> Result<Self> {
        for (name, v) in [("psd_tol", psd_tol), ("eq_tol", eq_tol), ("rank_tol", rank_tol)] {
            if !(v >= 0.0 && v.is_finite()) {
                return invalid(format!("{name} must be a finite nonnegative number, got {v}"));
            }
        }
        Ok(Self {
            psd_tol,
            eq_tol,
            rank_tol,
        })
    }

    /// Parses either a single number applied to all three tolerances, or a
    /// comma separated list like `psd=1e-8,eq=1e-10`; missing keys keep
    /// their defaults.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(v) = s.parse::<f64>() {
            return Self::new(v, v, v);
        }
        let mut tol = Self::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("bad tolerance term `{part}`")))?;
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad tolerance value `{value}`")))?;
            match key.trim() {
                "psd" | "psd_tol" => tol.psd_tol = v,
                "eq" | "eq_tol" => tol.eq_tol = v,
                "rank" | "rank_tol" => tol.rank_tol = v,
                other => return invalid(format!("unknown tolerance `{other}`")),
            }
        }
        Self::new(tol.psd_tol, tol.eq_tol, tol.rank_tol)
    }

    /// Defaults, overridden by `COVEXT_TOL` when set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(TOLERANCE_ENV) {
            Ok(s) => Self::parse(&s),
            Err(_) => Ok(Self::default()),
        }
    }
}

/// An observable on the cosets of `H`, stored as dense effects in the
/// character basis of the spectrum.
///
/// Construction only checks shapes. Positivity, normalization and covariance
/// are verified by [`validate_povm`] and [`check_covariance`], so corrupted
/// data stays representable and detectable.
#[derive(Debug, Clone)]
pub struct CovariantPovm {
    spectrum: Spectrum,
    effects: Vec<CMatrix>,
    provenance: Option<IsometryField>,
}

impl CovariantPovm {
    pub fn new(spectrum: Spectrum, effects: Vec<CMatrix>) -> Result<Self> {
        if effects.len() != spectrum.num_outcomes() {
            return invalid(format!(
                "{} effects for {} outcomes",
                effects.len(),
                spectrum.num_outcomes()
            ));
        }
        let d = spectrum.dim();
        if let Some((w, e)) = effects
            .iter()
            .enumerate()
            .find(|(_, e)| e.nrows() != d || e.ncols() != d)
        {
            return invalid(format!(
                "effect {w} is {}×{}, expected {d}×{d}",
                e.nrows(),
                e.ncols()
            ));
        }
        Ok(Self {
            spectrum,
            effects,
            provenance: None,
        })
    }

    /// All effects equal to `I/|Ω|`.
    pub fn trivial(spectrum: &Spectrum) -> Self {
        let n = spectrum.num_outcomes();
        let e = linalg::identity(spectrum.dim()).scale(1.0 / n as f64);
        Self {
            spectrum: spectrum.clone(),
            effects: vec![e; n],
            provenance: None,
        }
    }

    pub fn with_provenance(mut self, field: IsometryField) -> Self {
        self.provenance = Some(field);
        self
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn effects(&self) -> &[CMatrix] {
        &self.effects
    }

    pub fn effect(&self, outcome: usize) -> &CMatrix {
        &self.effects[outcome]
    }

    pub fn num_outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn dim(&self) -> usize {
        self.spectrum.dim()
    }

    pub fn provenance(&self) -> Option<&IsometryField> {
        self.provenance.as_ref()
    }

    fn ensure_same_space(&self, other: &Self) -> Result<()> {
        if self.spectrum != other.spectrum {
            return invalid("observables live on different spectra or value spaces");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PovmValidity {
    pub is_positive: bool,
    pub is_normalized: bool,
    /// Most negative eigenvalue over all effects.
    pub min_eigenvalue: f64,
    /// Frobenius norm of `Σ_ω M(ω) − I`.
    pub normalization_residual: f64,
    /// Largest entry of `M(ω) − M(ω)*` over all effects.
    pub hermiticity_residual: f64,
}

impl PovmValidity {
    pub fn passes(&self) -> bool {
        self.is_positive && self.is_normalized
    }
}

pub fn validate_povm(m: &CovariantPovm, tol: &Tolerances) -> PovmValidity {
    let herm = m
        .effects
        .iter()
        .map(hermiticity_residual)
        .fold(0.0, f64::max);
    let min_eig = m
        .effects
        .iter()
        .map(min_eigenvalue)
        .fold(f64::INFINITY, f64::min);
    let total = m
        .effects
        .iter()
        .fold(linalg::zeros(m.dim(), m.dim()), |acc, e| acc + e);
    let norm_res = frobenius(&(total - linalg::identity(m.dim())));
    PovmValidity {
        is_positive: herm <= tol.eq_tol && min_eig >= -tol.psd_tol,
        is_normalized: norm_res <= tol.eq_tol,
        min_eigenvalue: min_eig,
        normalization_residual: norm_res,
        hermiticity_residual: herm,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceReport {
    pub is_covariant: bool,
    /// `max_{g,ω} ‖U(g)M(ω)U(g)* − M(g·ω)‖_F`.
    pub max_residual: f64,
    /// Largest effect entry at a position with `γ₁ − γ₂ ∉ H^⊥`.
    pub block_residual: f64,
}

pub fn check_covariance(m: &CovariantPovm, tol: &Tolerances) -> CovarianceReport {
    let spec = &m.spectrum;
    let outcomes = spec.outcomes();
    let mut worst = 0.0_f64;
    for g in spec.group().elements() {
        let u = spec.rep_diagonal(&g);
        for (w, e) in m.effects.iter().enumerate() {
            let target = &m.effects[outcomes.act(&g, w)];
            let mut acc = 0.0;
            for i in 0..e.nrows() {
                for j in 0..e.ncols() {
                    let moved = u[i] * e[(i, j)] * u[j].conj();
                    acc += (moved - target[(i, j)]).norm_sqr();
                }
            }
            worst = worst.max(acc.sqrt());
        }
    }
    let block = block_structure_residual(m);
    CovarianceReport {
        is_covariant: worst <= tol.eq_tol && block <= tol.eq_tol,
        max_residual: worst,
        block_residual: block,
    }
}

/// Largest effect entry linking characters in different dual cosets.
pub fn block_structure_residual(m: &CovariantPovm) -> f64 {
    let spec = &m.spectrum;
    let d = spec.dim();
    let mut worst = 0.0_f64;
    for e in &m.effects {
        for i in 0..d {
            for j in 0..d {
                if !spec.same_coset(spec.entry_of_flat(i), spec.entry_of_flat(j)) {
                    worst = worst.max(e[(i, j)].norm());
                }
            }
        }
    }
    worst
}

/// Whether every effect is a projection.
///
/// When the observable carries its isometry field, the unitarity criterion on
/// `W(γ₂)*W(γ₁)` within each dual coset is evaluated as well, and a
/// disagreement between the two is reported as an error.
pub fn is_pvm(m: &CovariantPovm, tol: &Tolerances) -> Result<bool> {
    let idempotent = m.effects.iter().all(|e| {
        hermiticity_residual(e) <= tol.eq_tol && frobenius(&(e * e - e)) <= tol.eq_tol
    });
    if let Some(field) = &m.provenance {
        let by_field = field.is_unitary_on_cosets(tol);
        if by_field != idempotent {
            return Err(Error::NumericalInconsistency(format!(
                "effects idempotent: {idempotent}, isometry field unitary on cosets: {by_field}"
            )));
        }
    }
    Ok(idempotent)
}

/// `t·M₁ + (1 − t)·M₂`.
pub fn mix(t: f64, m1: &CovariantPovm, m2: &CovariantPovm) -> Result<CovariantPovm> {
    if !(0.0..=1.0).contains(&t) {
        return invalid(format!("mixing weight {t} outside [0, 1]"));
    }
    m1.ensure_same_space(m2)?;
    let effects = m1
        .effects
        .iter()
        .zip(&m2.effects)
        .map(|(a, b)| a.scale(t) + b.scale(1.0 - t))
        .collect();
    CovariantPovm::new(m1.spectrum.clone(), effects)
}

/// Outcome distribution `p(ω) = tr(ρ M(ω))`.
pub fn apply_to_state(m: &CovariantPovm, rho: &CMatrix, tol: &Tolerances) -> Result<Vec<f64>> {
    let d = m.dim();
    if rho.nrows() != d || rho.ncols() != d {
        return invalid(format!("state is {}×{}, expected {d}×{d}", rho.nrows(), rho.ncols()));
    }
    if hermiticity_residual(rho) > tol.eq_tol {
        return invalid("state is not Hermitian");
    }
    let tr = rho.trace();
    if (tr - Complex64::new(1.0, 0.0)).norm() > tol.eq_tol {
        return invalid(format!("state has trace {tr}"));
    }
    let lo = min_eigenvalue(rho);
    if lo < -tol.psd_tol {
        return invalid(format!("state has negative eigenvalue {lo}"));
    }
    Ok(m.effects
        .iter()
        .map(|e| {
            // tr(ρE) = Σ ρ_ij E_ji
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..d {
                for j in 0..d {
                    acc += rho[(i, j)] * e[(j, i)];
                }
            }
            acc.re
        })
        .collect())
}

/// `max_ω ‖M₁(ω) − M₂(ω)‖` in operator norm.
pub fn distance(m1: &CovariantPovm, m2: &CovariantPovm) -> Result<f64> {
    m1.ensure_same_space(m2)?;
    Ok(m1
        .effects
        .iter()
        .zip(&m2.effects)
        .map(|(a, b)| op_norm(&(a - b)))
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::{GroupSpec, Subgroup};
    use crate::linalg::c64;
    use crate::models::{canonical_position, qubit_cyclic};

    fn regular(n: u64) -> Spectrum {
        let g = GroupSpec::cyclic(n).unwrap();
        Spectrum::regular(&g, &Subgroup::trivial(&g)).unwrap()
    }

    #[test]
    fn validate_examples() {
        let tol = Tolerances::default();
        let triv = CovariantPovm::trivial(&regular(3));
        assert!(validate_povm(&triv, &tol).passes());

        let mut effects = triv.effects().to_vec();
        effects[0][(0, 0)] = c64(-0.1, 0.0);
        effects[1][(0, 0)] += c64(0.1 + 1.0 / 3.0, 0.0);
        let bad = CovariantPovm::new(triv.spectrum().clone(), effects).unwrap();
        let v = validate_povm(&bad, &tol);
        assert!(!v.is_positive);
        assert!(v.min_eigenvalue < -0.09);

        let doubled: Vec<_> = triv.effects().iter().map(|e| e.scale(2.0)).collect();
        let v = validate_povm(&CovariantPovm::new(triv.spectrum().clone(), doubled).unwrap(), &tol);
        assert!(v.is_positive && !v.is_normalized);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let s = regular(2);
        assert!(CovariantPovm::new(s.clone(), vec![linalg::identity(2)]).is_err());
        assert!(CovariantPovm::new(s, vec![linalg::identity(3), linalg::identity(3)]).is_err());
    }

    #[test]
    fn covariance_examples() {
        let tol = Tolerances::default();
        let canon = canonical_position(8).unwrap();
        let rep = check_covariance(&canon, &tol);
        assert!(rep.is_covariant && rep.max_residual < 1e-12);

        let mut effects = canon.effects().to_vec();
        effects.swap(1, 2);
        let swapped = CovariantPovm::new(canon.spectrum().clone(), effects).unwrap();
        assert!(!check_covariance(&swapped, &tol).is_covariant);

        assert!(check_covariance(&CovariantPovm::trivial(&regular(5)), &tol).is_covariant);
    }

    #[test]
    fn pvm_examples() {
        let tol = Tolerances::default();
        assert!(is_pvm(&canonical_position(8).unwrap(), &tol).unwrap());
        let q = qubit_cyclic(4).unwrap();
        // eigenvalues of (1/4)[[1, i^-j], [i^j, 1]] are 0 and 1/2
        let (vals, _) = linalg::eigh(q.effect(1));
        assert!(vals[0].abs() < 1e-12 && (vals[1] - 0.5).abs() < 1e-12);
        assert!(!is_pvm(&q, &tol).unwrap());
        assert!(!is_pvm(&CovariantPovm::trivial(&regular(2)), &tol).unwrap());
    }

    #[test]
    fn mix_examples() {
        let canon = canonical_position(2).unwrap();
        let shifted = CovariantPovm::new(
            canon.spectrum().clone(),
            vec![canon.effect(1).clone(), canon.effect(0).clone()],
        )
        .unwrap();
        assert!(distance(&mix(1.0, &canon, &shifted).unwrap(), &canon).unwrap() < 1e-15);
        assert!(distance(&mix(0.5, &canon, &canon).unwrap(), &canon).unwrap() < 1e-15);
        let half = mix(0.5, &canon, &shifted).unwrap();
        let triv = CovariantPovm::trivial(canon.spectrum());
        assert!(distance(&half, &triv).unwrap() < 1e-15);
        assert!(mix(1.5, &canon, &shifted).is_err());
        assert!(mix(0.5, &canon, &canonical_position(3).unwrap()).is_err());
    }

    #[test]
    fn state_examples() {
        let tol = Tolerances::default();
        let triv = CovariantPovm::trivial(&regular(4));
        let mut rho = linalg::zeros(4, 4);
        rho[(2, 2)] = c64(1.0, 0.0);
        let p = apply_to_state(&triv, &rho, &tol).unwrap();
        assert!(p.iter().all(|x| (x - 0.25).abs() < 1e-15));

        // |x⟩ in the character basis is the x-th DFT column
        let canon = canonical_position(5).unwrap();
        let f = crate::abelian::dft_matrix(canon.spectrum().group());
        let v = f.column(3).into_owned();
        let p = apply_to_state(&canon, &(&v * v.adjoint()), &tol).unwrap();
        for (x, px) in p.iter().enumerate() {
            let want = if x == 3 { 1.0 } else { 0.0 };
            assert!((px - want).abs() < 1e-12);
        }

        let mixed = linalg::identity(2).scale(0.5);
        let p = apply_to_state(&qubit_cyclic(4).unwrap(), &mixed, &tol).unwrap();
        assert!(p.iter().all(|x| (x - 0.25).abs() < 1e-15));

        assert!(apply_to_state(&canon, &linalg::identity(5), &tol).is_err());
    }

    #[test]
    fn distance_examples() {
        let canon = canonical_position(2).unwrap();
        assert_eq!(distance(&canon, &canon).unwrap(), 0.0);
        let triv = CovariantPovm::trivial(canon.spectrum());
        assert!((distance(&canon, &triv).unwrap() - 0.5).abs() < 1e-12);
        let q = qubit_cyclic(4).unwrap();
        let t = CovariantPovm::trivial(q.spectrum());
        let half = mix(0.5, &q, &t).unwrap();
        let full = distance(&q, &t).unwrap();
        assert!((distance(&q, &half).unwrap() - 0.5 * full).abs() < 1e-12);
    }

    #[test]
    fn tolerance_parsing() {
        assert_eq!(Tolerances::parse("1e-6").unwrap(), Tolerances::new(1e-6, 1e-6, 1e-6).unwrap());
        let t = Tolerances::parse("psd=1e-7, rank=1e-11").unwrap();
        assert_eq!(t.psd_tol, 1e-7);
        assert_eq!(t.eq_tol, 1e-9);
        assert_eq!(t.rank_tol, 1e-11);
        assert!(Tolerances::parse("foo=1").is_err());
        assert!(Tolerances::parse("-1").is_err());
    }
}
