//! Spectral parameters `zeta = kperp + i k/2` with `zeta . zeta = 0`, the
//! exponentially growing monogenic seed `E(x, zeta) = e^{x.zeta} bar(zeta)`,
//! and the unimodular modulation weights `e^{±i x.k}`.
//!
//! ```
//! use calderon3d::cgo::make_zeta;
//! use calderon3d::quat::Vec3;
//!
//! let zp = make_zeta(Vec3::new(3.0, -1.0, 2.0), None).unwrap();
//! // zeta lies on the complex null cone and is a zero divisor
//! assert!(zp.null_defect().norm() < 1e-12);
//! assert!(zp.zero_divisor_defect() < 1e-12);
//! ```

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quat::{embed_c, CQuat, CVec3, Vec3};

/// A null complex frequency parameterized by a real vector `k`.
#[derive(Debug, Clone, Copy)]
pub struct SpectralParam {
    pub k: Vec3,
    pub kperp: Vec3,
    pub zeta_vec: CVec3,
    pub zeta_quat: CQuat,
}

impl SpectralParam {
    /// `zeta . zeta` (complex bilinear dot); zero by construction.
    pub fn null_defect(&self) -> Complex64 {
        self.zeta_vec.dot(&self.zeta_vec)
    }

    /// `zeta_quat * bar(zeta_quat)`; zero divisor by construction.
    pub fn zero_divisor_defect(&self) -> f64 {
        self.zeta_quat.mul(&self.zeta_quat.bar()).norm()
    }
}

/// Deterministic `kperp` selection: without a constraint, cross `k` with the
/// coordinate axis of smallest `|k_a|` (lowest index on ties); with `xi`,
/// cross with `xi`. Magnitude `|k|/2` is forced by `zeta . zeta = 0`.
pub fn make_zeta(k: Vec3, constraint: Option<Vec3>) -> Result<SpectralParam> {
    let kn = k.norm();
    if kn == 0.0 {
        return Err(Error::DegenerateDirection(k.0));
    }
    let cross = match constraint {
        Some(xi) => k.cross(&xi),
        None => {
            let mut axis = 0;
            for a in 1..3 {
                if k.0[a].abs() < k.0[axis].abs() {
                    axis = a;
                }
            }
            let mut e = Vec3::ZERO;
            e.0[axis] = 1.0;
            k.cross(&e)
        }
    };
    let dir = cross.normalize().ok_or(Error::DegenerateDirection(k.0))?;
    let kperp = dir.scale(kn / 2.0);
    let zeta_vec = CVec3::from_real_imag(kperp, k.scale(0.5));
    let zeta_quat = embed_c(zeta_vec);
    Ok(SpectralParam {
        k,
        kperp,
        zeta_vec,
        zeta_quat,
    })
}

/// `E(x, zeta) = e^{x.zeta} bar(zeta)`, left-monogenic in `x` and growing
/// like `e^{x.kperp}` in magnitude.
pub fn exp_growing(x: Vec3, zp: &SpectralParam) -> CQuat {
    let phase = zp.zeta_vec.dot_real(&x);
    zp.zeta_quat.bar().scale_c(phase.exp())
}

/// Scalar weight `e^{sign * i * x.k}`; modulus exactly 1.
pub fn modulation(x: Vec3, k: Vec3, sign: i32) -> Complex64 {
    Complex64::new(0.0, sign.signum() as f64 * x.dot(&k)).exp()
}
