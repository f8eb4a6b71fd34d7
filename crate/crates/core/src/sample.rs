//! Seeded random instances for tests, benchmarks and the acceptance suite.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::abelian::{subgroup_closure, GroupElement, GroupSpec, Transversal};
use crate::construct::{build_from_isometries, IsometryField, ProbabilityVector};
use crate::error::Result;
use crate::linalg::CMatrix;
use crate::povm::{CovariantPovm, Tolerances};
use crate::repspace::Spectrum;

/// Limits for [`random_spectrum`].
#[derive(Debug, Clone, Copy)]
pub struct InstanceShape {
    pub max_order: usize,
    pub max_dim: usize,
    pub max_multiplicity: usize,
}

impl Default for InstanceShape {
    fn default() -> Self {
        Self {
            max_order: 8,
            max_dim: 6,
            max_multiplicity: 2,
        }
    }
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    })
}

/// Haar-distributed unitary via QR with phase correction.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    random_isometry(rng, n, n)
}

/// `rows × cols` isometry, `rows ≥ cols`.
pub fn random_isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let qr = gaussian_matrix(rng, rows, cols).qr();
    let (q, r) = (qr.q(), qr.r());
    let mut q = q.columns(0, cols).into_owned();
    for k in 0..cols {
        let d = r[(k, k)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            q.column_mut(k).scale_mut(1.0);
            let col = q.column(k) * phase;
            q.set_column(k, &col);
        }
    }
    q
}

/// Cyclic factor lists with product at most `max_order`.
fn factorizations(max_order: usize) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    for n in 2..=max_order as u64 {
        out.push(vec![n]);
    }
    for a in 2..=max_order as u64 {
        for b in a..=max_order as u64 {
            if (a * b) as usize <= max_order {
                out.push(vec![a, b]);
            }
        }
    }
    out
}

/// Random group, subgroup and spectrum within `shape`.
pub fn random_spectrum<R: Rng + ?Sized>(rng: &mut R, shape: &InstanceShape) -> Result<Spectrum> {
    let choices = factorizations(shape.max_order.max(2));
    let factors = &choices[rng.random_range(0..choices.len())];
    let group = GroupSpec::new(factors)?;
    let elems = group.elements();
    let gens: Vec<GroupElement> = (0..rng.random_range(0..=1))
        .map(|_| elems[rng.random_range(0..elems.len())].clone())
        .collect();
    let subgroup = subgroup_closure(&group, &gens)?;
    let mut chars = elems.clone();
    chars.shuffle(rng);
    let budget = shape.max_dim.max(1);
    let mut entries = Vec::new();
    let mut dim = 0;
    let target = rng.random_range(1..=budget);
    for gamma in chars {
        if dim >= target {
            break;
        }
        let room = (target - dim).min(shape.max_multiplicity.max(1));
        let n = rng.random_range(1..=room);
        entries.push((gamma, n));
        dim += n;
    }
    entries.sort();
    Spectrum::new(&group, &subgroup, &entries)
}

/// Independent random isometries into `ℂ^ambient_dim`.
pub fn random_isometry_field<R: Rng + ?Sized>(
    rng: &mut R,
    spectrum: &Spectrum,
    ambient_dim: usize,
) -> Result<IsometryField> {
    let maps = spectrum
        .entries()
        .iter()
        .map(|(_, n)| random_isometry(rng, ambient_dim, *n))
        .collect();
    IsometryField::new(spectrum, ambient_dim, maps, &Tolerances::default())
}

/// Random covariant observable with ambient dimension drawn between the
/// largest multiplicity and `max_ambient`.
pub fn random_covariant_povm<R: Rng + ?Sized>(
    rng: &mut R,
    spectrum: &Spectrum,
    max_ambient: usize,
) -> Result<CovariantPovm> {
    let top = spectrum.entries().iter().map(|(_, n)| *n).max().unwrap_or(1);
    let m = rng.random_range(top..=max_ambient.max(top));
    let field = random_isometry_field(rng, spectrum, m)?;
    build_from_isometries(&field, &Tolerances::default())
}

/// Probability vector with full support.
pub fn random_probability<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Result<ProbabilityVector> {
    let raw: Vec<f64> = (0..len).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    ProbabilityVector::new(raw.into_iter().map(|w| w / total).collect(), &Tolerances::default())
}

/// One uniformly chosen member from each coset.
pub fn random_section<R: Rng + ?Sized>(rng: &mut R, quotient: &Transversal) -> Vec<GroupElement> {
    (0..quotient.len())
        .map(|w| {
            let members = quotient.coset_members(w);
            members[rng.random_range(0..members.len())].clone()
        })
        .collect()
}
