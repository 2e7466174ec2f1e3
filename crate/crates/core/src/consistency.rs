//! Consistency between the conductivity equation and the Dirac system.
//!
//! For scalar `u` and scalar `gamma`, the pair
//! `phi = gamma^{1/2} (Dbar u, D u)` satisfies the algebraic identity
//!
//! ```text
//! D phi1 - phi2 q1  =  gamma^{-1/2} div(gamma grad u)  =  Dbar phi2 - phi1 q2
//! ```
//!
//! so `u` solves the conductivity equation exactly when `phi` solves the
//! Dirac system. The checks here evaluate both sides numerically.
//!
//! Two derivative backends are provided. The spectral backend is exact for
//! periodic band-limited data. The centered finite-difference backend, with
//! norms restricted to interior nodes, handles the polynomial oracles
//! (`u = x0`, `u = x0*x1`, ...) that are not periodic on the box; centered
//! differences are exact on polynomials of degree <= 2 per axis.
//!
//! ```
//! use num_complex::Complex64;
//! use calderon3d::consistency::{conductivity_residual, dirac_residual, phi_from_u, Deriv};
//! use calderon3d::dirac::potentials_from_gamma;
//! use calderon3d::grid::{Grid3, QField};
//! use calderon3d::quat::CQuat;
//!
//! // u = x0*x1 is harmonic; with gamma = 1 both sides of the identity vanish
//! let g = Grid3::default_box(16);
//! let gamma = QField::constant(g, CQuat::ONE);
//! let pots = potentials_from_gamma(&gamma).unwrap();
//! let u = QField::from_fn(g, |x| CQuat::scalar(x.0[0] * x.0[1]));
//! let phi = phi_from_u(&u, &gamma, Deriv::CenteredFd);
//! let (r1, r2) = dirac_residual(&phi, &pots, Deriv::CenteredFd);
//! assert!(r1 < 1e-8 && r2 < 1e-8);
//! assert!(conductivity_residual(&u, &gamma, Deriv::CenteredFd) < 1e-8);
//! ```


use crate::dirac::DiracPotentials;
use crate::grid::QField;
use crate::quat::CQuat;
use crate::spectral::{apply_d, partial, DVariant};

/// Derivative backend for the consistency checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Deriv {
    /// Exact for periodic band-limited fields.
    Spectral,
    /// Second-order centered differences; callers should restrict norms to
    /// the interior (see [`interior_l2`]) because the stencil wraps around
    /// the box faces.
    CenteredFd,
}

/// The transformed pair `phi = gamma^{1/2} (Dbar u, D u)` with its
/// conductivity.
#[derive(Debug, Clone)]
pub struct PhiPair {
    pub phi1: QField,
    pub phi2: QField,
    pub gamma: QField,
}

impl PhiPair {
    /// Max pointwise defect of the symmetry `phi1 = bar(phi2)`, which holds
    /// exactly for real `gamma` and real scalar `u`.
    pub fn symmetry_defect(&self) -> f64 {
        self.phi1
            .values
            .iter()
            .zip(&self.phi2.values)
            .map(|(a, b)| a.sub(&b.bar()).norm())
            .fold(0.0, f64::max)
    }
}

fn d_field(f: &QField, variant: DVariant, deriv: Deriv) -> QField {
    match deriv {
        Deriv::Spectral => apply_d(f, variant),
        Deriv::CenteredFd => {
            let sign = match variant {
                DVariant::D => 1.0,
                DVariant::Dbar => -1.0,
            };
            let p: [QField; 3] = std::array::from_fn(|a| partial_fd(f, a));
            QField::from_fn_indexed(f.grid, |idx, _| {
                let mut out = p[0].values[idx];
                for a in 1..3 {
                    out = out.add(&CQuat::unit(a).scale(sign).mul(&p[a].values[idx]));
                }
                out
            })
        }
    }
}

fn partial_deriv(f: &QField, axis: usize, deriv: Deriv) -> QField {
    match deriv {
        Deriv::Spectral => partial(f, axis),
        Deriv::CenteredFd => partial_fd(f, axis),
    }
}

/// Centered finite difference along one axis (wrapping at the box faces).
fn partial_fd(f: &QField, axis: usize) -> QField {
    let g = f.grid;
    let n = g.n;
    let inv2h = 1.0 / (2.0 * g.h);
    QField::from_fn_indexed(g, |idx, _| {
        let k = idx % n;
        let j = (idx / n) % n;
        let i = idx / (n * n);
        let mut up = [i, j, k];
        let mut dn = [i, j, k];
        up[axis] = (up[axis] + 1) % n;
        dn[axis] = (dn[axis] + n - 1) % n;
        f.values[g.idx(up[0], up[1], up[2])]
            .sub(&f.values[g.idx(dn[0], dn[1], dn[2])])
            .scale(inv2h)
    })
}

/// L2 norm restricted to nodes with `|x|_inf <= frac * half-width`.
pub fn interior_l2(f: &QField, frac: f64) -> f64 {
    let g = f.grid;
    let half = -g.origin.0[0];
    let cut = frac * half;
    let mut acc = 0.0;
    for (idx, x) in g.nodes() {
        if x.0.iter().all(|c| c.abs() <= cut) {
            acc += f.values[idx].norm_sqr();
        }
    }
    (acc * g.h.powi(3)).sqrt()
}

const INTERIOR_FRAC: f64 = 0.7;

fn region_l2(f: &QField, deriv: Deriv) -> f64 {
    match deriv {
        Deriv::Spectral => f.l2_norm(),
        Deriv::CenteredFd => interior_l2(f, INTERIOR_FRAC),
    }
}

/// Principal branch square root, well defined for `Re gamma > 0`.
pub fn sqrt_gamma(gamma: &QField) -> QField {
    gamma.map(|q| CQuat::from_complex(q.sc().sqrt()))
}

/// Build `phi1 = gamma^{1/2} Dbar u`, `phi2 = gamma^{1/2} D u` for scalar
/// `u`.
pub fn phi_from_u(u: &QField, gamma: &QField, deriv: Deriv) -> PhiPair {
    let root = sqrt_gamma(gamma);
    let phi1 = root.mul_pointwise(&d_field(u, DVariant::Dbar, deriv));
    let phi2 = root.mul_pointwise(&d_field(u, DVariant::D, deriv));
    PhiPair {
        phi1,
        phi2,
        gamma: gamma.clone(),
    }
}

/// Relative L2 residuals of the Dirac system
/// `(D phi1 - phi2 q1, Dbar phi2 - phi1 q2)`, with right multiplication by
/// the potentials. Each residual is normalized by the larger of the two
/// terms it balances; a zero pair reports zero.
pub fn dirac_residual(phi: &PhiPair, pots: &DiracPotentials, deriv: Deriv) -> (f64, f64) {
    let r1 = d_field(&phi.phi1, DVariant::D, deriv).sub(&phi.phi2.mul_pointwise(&pots.q1));
    let r2 = d_field(&phi.phi2, DVariant::Dbar, deriv).sub(&phi.phi1.mul_pointwise(&pots.q2));
    let s1 = region_l2(&d_field(&phi.phi1, DVariant::D, deriv), deriv)
        .max(region_l2(&phi.phi2.mul_pointwise(&pots.q1), deriv));
    let s2 = region_l2(&d_field(&phi.phi2, DVariant::Dbar, deriv), deriv)
        .max(region_l2(&phi.phi1.mul_pointwise(&pots.q2), deriv));
    let rel = |num: f64, den: f64| if den == 0.0 { num } else { num / den };
    (
        rel(region_l2(&r1, deriv), s1),
        rel(region_l2(&r2, deriv), s2),
    )
}

/// Relative L2 norm of `div(gamma grad u)` for scalar `u` and scalar
/// `gamma`, normalized by `||gamma||_inf` times the Frobenius L2 norm of
/// the Hessian of `u` (a scale that does not vanish for harmonic `u`).
pub fn conductivity_residual(u: &QField, gamma: &QField, deriv: Deriv) -> f64 {
    let grad: [QField; 3] = std::array::from_fn(|a| partial_deriv(u, a, deriv));
    let flux: [QField; 3] = std::array::from_fn(|a| gamma.mul_pointwise(&grad[a]));
    let mut div = partial_deriv(&flux[0], 0, deriv);
    for (a, f) in flux.iter().enumerate().skip(1) {
        div = div.add(&partial_deriv(f, a, deriv));
    }
    let mut hess = 0.0;
    for (a, ga) in grad.iter().enumerate() {
        for b in a..3 {
            let h2 = region_l2(&partial_deriv(ga, b, deriv), deriv).powi(2);
            hess += if b == a { h2 } else { 2.0 * h2 };
        }
    }
    let scale = gamma.linf_norm() * hess.sqrt();
    let num = region_l2(&div, deriv);
    if scale == 0.0 {
        num
    } else {
        num / scale
    }
}

/// The scalar field `gamma^{-1/2} div(gamma grad u)` that the Dirac
/// residuals equal under the transformation identity.
pub fn identity_rhs(u: &QField, gamma: &QField, deriv: Deriv) -> QField {
    let grad: [QField; 3] = std::array::from_fn(|a| partial_deriv(u, a, deriv));
    let flux: [QField; 3] = std::array::from_fn(|a| gamma.mul_pointwise(&grad[a]));
    let mut div = partial_deriv(&flux[0], 0, deriv);
    for (a, f) in flux.iter().enumerate().skip(1) {
        div = div.add(&partial_deriv(f, a, deriv));
    }
    let root = sqrt_gamma(gamma);
    QField::from_fn_indexed(u.grid, |idx, _| {
        div.values[idx].scale_c(1.0 / root.values[idx].sc())
    })
}

/// CSV rows `label,dirac_r1,dirac_r2,conductivity` for a battery of checks.
pub fn battery_csv(rows: &[(String, f64, f64, f64)]) -> String {
    let mut out = String::from("label,dirac_r1,dirac_r2,conductivity\n");
    for (label, r1, r2, c) in rows {
        out.push_str(&format!("{label},{r1:e},{r2:e},{c:e}\n"));
    }
    out
}
