//! Potentials of the Dirac system, the integral operators `M1`/`M2`, and the
//! Neumann-series solution of the mu-tilde equations.
//!
//! The modulation sandwich `e^{-ix.k} Tbar[ e^{ix.k} g ]` is applied as the
//! frequency-shifted symbol operator [`crate::spectral::teodorescu_shifted`]:
//! the two are identical in exact arithmetic, and the shifted form stays
//! accurate when `|k|` exceeds the grid's Nyquist frequency. The second
//! component is therefore stored demodulated (`nu2 = e^{-ix.k} mu2`), which
//! is smooth on the grid; `mu2` itself is reconstructed pointwise on demand.
//!
//! ```
//! use calderon3d::dirac::{potentials_from_gamma, solve_mu};
//! use calderon3d::grid::{sample_phantom, Grid3, Phantom};
//! use calderon3d::quat::Vec3;
//!
//! let g = Grid3::default_box(12);
//! let gamma = sample_phantom(&Phantom::default_smooth(), g).unwrap();
//! let pots = potentials_from_gamma(&gamma).unwrap();
//! // the Neumann series contracts at large |k|
//! let mu = solve_mu(&pots, Vec3::new(0.0, 0.0, 32.0), 1e-8, 50).unwrap();
//! assert!(*mu.residuals.last().unwrap() < 1e-8);
//! ```

use num_complex::Complex64;

use crate::cgo::modulation;
use crate::error::{Error, Result};
use crate::grid::{Grid3, QField};
use crate::quat::{CQuat, Vec3};
use crate::spectral::{apply_d, teodorescu_shifted, teodorescu_spectral, DVariant, TVariant};

/// The pair `q1 = -(1/2) Dbar(gamma)/gamma`, `q2 = -(1/2) D(gamma)/gamma`.
#[derive(Debug, Clone)]
pub struct DiracPotentials {
    pub q1: QField,
    pub q2: QField,
}

impl DiracPotentials {
    pub fn grid(&self) -> Grid3 {
        self.q1.grid
    }

    /// Max pointwise defect of the scalar-conductivity symmetry `q1 = bar(q2)`.
    pub fn conjugacy_defect(&self) -> f64 {
        self.q1
            .values
            .iter()
            .zip(&self.q2.values)
            .map(|(a, b)| a.sub(&b.bar()).norm())
            .fold(0.0, f64::max)
    }
}

/// Build the Dirac potentials from a scalar conductivity field.
///
/// `gamma` must be scalar-valued (no `e1,e2,e3` components), equal to 1 on
/// the padding shell, with `Re(gamma)` bounded away from zero.
pub fn potentials_from_gamma(gamma: &QField) -> Result<DiracPotentials> {
    let g = gamma.grid;
    let mut min_re = f64::INFINITY;
    for q in &gamma.values {
        if q.vec().norm() > 1e-12 {
            return Err(Error::Config(
                "potentials_from_gamma: gamma must be scalar-valued".into(),
            ));
        }
        min_re = min_re.min(q.sc().re);
    }
    if min_re <= 0.0 {
        return Err(Error::PositivityViolation {
            min_re,
            floor: 0.0,
        });
    }
    // derivatives act on gamma - 1, which is compactly supported inside the
    // box, so the periodic spectral derivative is exact up to truncation
    let fluct = gamma.sub(&QField::constant(g, CQuat::ONE));
    let dg = apply_d(&fluct, DVariant::D);
    let dbg = apply_d(&fluct, DVariant::Dbar);
    let div = |d: &QField| {
        QField {
            grid: g,
            values: d
                .values
                .iter()
                .zip(&gamma.values)
                .map(|(n, den)| n.scale_c(Complex64::new(-0.5, 0.0) / den.sc()))
                .collect(),
        }
    };
    Ok(DiracPotentials {
        q1: div(&dbg),
        q2: div(&dg),
    })
}

/// Which of the two integral operators to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MOperator {
    M1,
    M2,
}

/// Apply `M1 f = T[ e^{-ix.k} Tbar[ e^{ix.k} f q2 ] q1 ]` or
/// `M2 f = Tbar[ e^{ix.k} T[ e^{-ix.k} f q1 ] q2 ]` (potentials multiply
/// from the right, modulations are scalar).
pub fn apply_m(f: &QField, which: MOperator, pots: &DiracPotentials, k: Vec3) -> QField {
    match which {
        MOperator::M1 => {
            let inner = teodorescu_shifted(&f.mul_pointwise(&pots.q2), TVariant::Tbar, k, 1.0);
            teodorescu_spectral(&inner.mul_pointwise(&pots.q1), TVariant::T)
        }
        MOperator::M2 => {
            let g = f.grid;
            let demod = QField::from_fn_indexed(g, |idx, x| {
                f.values[idx].scale_c(modulation(x, k, -1))
            });
            let inner = teodorescu_spectral(&demod.mul_pointwise(&pots.q1), TVariant::T);
            let shifted = teodorescu_shifted(&inner.mul_pointwise(&pots.q2), TVariant::Tbar, k, 1.0);
            QField::from_fn_indexed(g, |idx, x| shifted.values[idx].scale_c(modulation(x, k, 1)))
        }
    }
}

/// Demodulated form of `M2`: `N2 nu = Tbar_{+k}[ T[ nu q1 ] q2 ]`, so that
/// `M2 f = e^{ix.k} N2[ e^{-ix.k} f ]`. This is the operator actually
/// iterated for the second component.
pub fn apply_m2_demodulated(nu: &QField, pots: &DiracPotentials, k: Vec3) -> QField {
    let inner = teodorescu_spectral(&nu.mul_pointwise(&pots.q1), TVariant::T);
    teodorescu_shifted(&inner.mul_pointwise(&pots.q2), TVariant::Tbar, k, 1.0)
}

/// Solution of the mu-tilde integral equations at one spectral parameter.
#[derive(Debug, Clone)]
pub struct MuPair {
    pub mu1: QField,
    /// Demodulated second component `nu2 = e^{-ix.k} mu2` (smooth on the grid).
    pub nu2: QField,
    pub k: Vec3,
    /// Residual per iteration of the Neumann solve.
    pub residuals: Vec<f64>,
}

impl MuPair {
    /// `mu2` sampled at the grid nodes (exact pointwise remodulation).
    pub fn mu2(&self) -> QField {
        let k = self.k;
        QField::from_fn_indexed(self.nu2.grid, |idx, x| {
            self.nu2.values[idx].scale_c(modulation(x, k, 1))
        })
    }

    /// Iteration log as CSV rows `k0,k1,k2,iter,residual`.
    pub fn log_csv(&self) -> String {
        let mut out = String::new();
        for (i, r) in self.residuals.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{:e}\n",
                self.k.0[0], self.k.0[1], self.k.0[2], i, r
            ));
        }
        out
    }
}

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 50;

/// Neumann/Picard solve of `[I - M1] mu1 = 1`, then
/// `nu2 = Tbar_{+k}[ mu1 q2 ]` (the partial sums of the two series coincide).
///
/// Errors with [`Error::NonContractive`] when the update norm grows on three
/// consecutive iterations - the signature of `|k|` below the contraction
/// threshold for this phantom.
pub fn solve_mu(
    pots: &DiracPotentials,
    k: Vec3,
    tol: f64,
    max_iter: usize,
) -> Result<MuPair> {
    let g = pots.grid();
    let one = QField::constant(g, CQuat::ONE);
    let mut mu1 = one.clone();
    let mut residuals = Vec::new();
    let mut grew = 0usize;
    let mut prev = f64::INFINITY;
    let mut converged = false;
    for _ in 0..max_iter {
        let next = one.add(&apply_m(&mu1, MOperator::M1, pots, k));
        let update = next.sub(&mu1).l2_norm();
        let scale = next.l2_norm().max(1e-300);
        let res = update / scale;
        residuals.push(res);
        mu1 = next;
        if res < tol {
            converged = true;
            break;
        }
        if res > prev {
            grew += 1;
            if grew >= 3 {
                return Err(Error::NonContractive { k_norm: k.norm() });
            }
        } else {
            grew = 0;
        }
        prev = res;
    }
    if !converged && residuals.last().copied().unwrap_or(f64::INFINITY) > tol {
        // ran out of iterations without blowing up; treat as non-contractive
        // only if the tail is not still shrinking
        if residuals.len() >= 2 && residuals[residuals.len() - 1] >= residuals[residuals.len() - 2]
        {
            return Err(Error::NonContractive { k_norm: k.norm() });
        }
    }
    let nu2 = teodorescu_shifted(&mu1.mul_pointwise(&pots.q2), TVariant::Tbar, k, 1.0);
    Ok(MuPair {
        mu1,
        nu2,
        k,
        residuals,
    })
}

/// Power-type probe of the operator norm of `M1` at one `k`: the largest
/// per-application amplification seen over several random starts.
pub fn operator_norm_probe(
    pots: &DiracPotentials,
    k: Vec3,
    starts: usize,
    iters: usize,
    seed: u64,
) -> f64 {
    use rand::{Rng, SeedableRng};
    let g = pots.grid();
    let mut best: f64 = 0.0;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..starts {
        let mut f = QField {
            grid: g,
            values: (0..g.len())
                .map(|_| {
                    CQuat(std::array::from_fn(|_| {
                        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                    }))
                })
                .collect(),
        };
        let mut norm = f.l2_norm();
        f = f.scale(1.0 / norm);
        let mut last_ratio = 0.0;
        for _ in 0..iters {
            let next = apply_m(&f, MOperator::M1, pots, k);
            norm = next.l2_norm();
            if norm < 1e-300 {
                last_ratio = 0.0;
                break;
            }
            last_ratio = norm;
            f = next.scale(1.0 / norm);
        }
        best = best.max(last_ratio);
    }
    best
}

/// Empirical contraction threshold: bisect on `|k|` along a fixed direction
/// for the smallest magnitude at which the Neumann solve converges.
pub fn contraction_threshold(
    pots: &DiracPotentials,
    dir: Vec3,
    mut lo: f64,
    mut hi: f64,
    steps: usize,
) -> Result<f64> {
    let dir = dir
        .normalize()
        .ok_or(Error::DegenerateDirection(dir.0))?;
    let converges = |r: f64| solve_mu(pots, dir.scale(r), DEFAULT_TOL, DEFAULT_MAX_ITER).is_ok();
    if converges(lo) {
        return Ok(lo);
    }
    if !converges(hi) {
        return Err(Error::NonContractive { k_norm: hi });
    }
    for _ in 0..steps {
        let mid = 0.5 * (lo + hi);
        if converges(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
