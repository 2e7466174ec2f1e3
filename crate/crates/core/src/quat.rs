//! Complex quaternions (the algebra `C (x) H`) and the paravector embedding of
//! `R^3`.
//!
//! Elements are written `a = a0 + a1 e1 + a2 e2 + a3 e3` with complex
//! coefficients. The basis obeys `e1 e2 = e3 = -e2 e1` and `ei^2 = -1`.
//! Spatial points embed as paravectors: `(v0, v1, v2) -> v0 + v1 e1 + v2 e2`,
//! the `e3` direction only ever arises through products.
//!
//! The 2x2 complex matrix representation `e_a -> -i sigma_a` is an algebra
//! isomorphism and serves as the independent oracle for every identity:
//!
//! ```
//! use num_complex::Complex64;
//! use calderon3d::quat::{matrix_distance, matrix_mul, matrix_rep, CQuat};
//!
//! let a = CQuat::new(
//!     Complex64::new(1.0, 0.5),
//!     Complex64::new(-0.3, 0.0),
//!     Complex64::new(0.2, 1.0),
//!     Complex64::new(0.0, -0.7),
//! );
//! let b = a.bar();
//! // products agree with matrix products
//! let d = matrix_distance(
//!     &matrix_rep(&a.mul(&b)),
//!     &matrix_mul(&matrix_rep(&a), &matrix_rep(&b)),
//! );
//! assert!(d < 1e-14);
//! // a * bar(a) is the (scalar) quadratic form
//! assert!((a.mul(&b).sc() - a.quadratic_form()).norm() < 1e-14);
//! ```
//!
//! Three conjugations are in play:
//! - quaternionic `bar(a)`: negates the `e`-components (anti-automorphism),
//! - complex: conjugates each coefficient,
//! - Hermitian: both at once.
//!
//! The norm is the Euclidean norm of the eight real coefficients, equivalently
//! `sqrt(Sc(herm(a) * a))`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Conjugation modes on `C (x) H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conjugation {
    /// `bar(a)`: negate e1, e2, e3 components.
    Quat,
    /// `a^c`: complex-conjugate every coefficient.
    Complex,
    /// `bar(a)^dag`: quaternionic and complex conjugation combined.
    Herm,
}

/// Scale-invariant zero-divisor detection threshold for [`CQuat::inverse`].
pub const ZERO_DIVISOR_TOL: f64 = 1e-12;

/// A complex quaternion with coefficients of `1, e1, e2, e3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CQuat(pub [Complex64; 4]);

/// Basis products: `BASIS_MUL[a][b] = (index, sign)` with `e_a e_b = sign * e_index`.
const BASIS_MUL: [[(usize, f64); 4]; 4] = [
    [(0, 1.0), (1, 1.0), (2, 1.0), (3, 1.0)],
    [(1, 1.0), (0, -1.0), (3, 1.0), (2, -1.0)],
    [(2, 1.0), (3, -1.0), (0, -1.0), (1, 1.0)],
    [(3, 1.0), (2, 1.0), (1, -1.0), (0, -1.0)],
];

impl CQuat {
    pub const ZERO: CQuat = CQuat([Complex64::new(0.0, 0.0); 4]);
    pub const ONE: CQuat = CQuat([
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
    ]);

    pub fn new(c0: Complex64, c1: Complex64, c2: Complex64, c3: Complex64) -> Self {
        CQuat([c0, c1, c2, c3])
    }

    /// Basis unit `e_j` (`e_0 = 1`).
    pub fn unit(j: usize) -> Self {
        let mut q = CQuat::ZERO;
        q.0[j] = Complex64::new(1.0, 0.0);
        q
    }

    /// A real scalar quaternion.
    pub fn scalar(s: f64) -> Self {
        Self::from_complex(Complex64::new(s, 0.0))
    }

    /// A complex scalar quaternion.
    pub fn from_complex(c: Complex64) -> Self {
        let mut q = CQuat::ZERO;
        q.0[0] = c;
        q
    }

    /// Quaternionic product. Complex `i` commutes with `e1, e2, e3`.
    pub fn mul(&self, rhs: &CQuat) -> CQuat {
        let mut out = CQuat::ZERO;
        for a in 0..4 {
            if self.0[a] == Complex64::new(0.0, 0.0) {
                continue;
            }
            for b in 0..4 {
                let (idx, sign) = BASIS_MUL[a][b];
                out.0[idx] += self.0[a] * rhs.0[b] * sign;
            }
        }
        out
    }

    pub fn conjugate(&self, mode: Conjugation) -> CQuat {
        let c = |z: Complex64| z.conj();
        match mode {
            Conjugation::Quat => CQuat([self.0[0], -self.0[1], -self.0[2], -self.0[3]]),
            Conjugation::Complex => CQuat([c(self.0[0]), c(self.0[1]), c(self.0[2]), c(self.0[3])]),
            Conjugation::Herm => CQuat([c(self.0[0]), -c(self.0[1]), -c(self.0[2]), -c(self.0[3])]),
        }
    }

    /// Quaternionic conjugate `bar(a)`.
    pub fn bar(&self) -> CQuat {
        self.conjugate(Conjugation::Quat)
    }

    /// Scalar part `a0`.
    pub fn sc(&self) -> Complex64 {
        self.0[0]
    }

    /// Vector part `a - Sc(a)`.
    pub fn vec(&self) -> CQuat {
        CQuat([Complex64::new(0.0, 0.0), self.0[1], self.0[2], self.0[3]])
    }

    /// The `C_2` inner product `Sc(herm(a) * b)`.
    pub fn inner(&self, rhs: &CQuat) -> Complex64 {
        self.conjugate(Conjugation::Herm).mul(rhs).sc()
    }

    /// Euclidean norm of the eight real coefficients.
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    /// `a * bar(a) = a0^2 + a1^2 + a2^2 + a3^2`, a complex scalar.
    pub fn quadratic_form(&self) -> Complex64 {
        self.0.iter().map(|z| z * z).sum()
    }

    /// Inverse `bar(a) / (a * bar(a))`.
    ///
    /// Complex quaternions contain zero divisors; returns
    /// [`Error::ZeroDivisor`] when `|a * bar(a)| < 1e-12 * norm(a)^2`.
    pub fn inverse(&self) -> Result<CQuat> {
        let q = self.quadratic_form();
        if q.norm() < ZERO_DIVISOR_TOL * self.norm_sqr() {
            return Err(Error::ZeroDivisor(q.norm()));
        }
        Ok(self.bar().scale_c(q.inv()))
    }

    pub fn add(&self, rhs: &CQuat) -> CQuat {
        CQuat([
            self.0[0] + rhs.0[0],
            self.0[1] + rhs.0[1],
            self.0[2] + rhs.0[2],
            self.0[3] + rhs.0[3],
        ])
    }

    pub fn sub(&self, rhs: &CQuat) -> CQuat {
        CQuat([
            self.0[0] - rhs.0[0],
            self.0[1] - rhs.0[1],
            self.0[2] - rhs.0[2],
            self.0[3] - rhs.0[3],
        ])
    }

    pub fn neg(&self) -> CQuat {
        CQuat([-self.0[0], -self.0[1], -self.0[2], -self.0[3]])
    }

    /// Scale by a real factor.
    pub fn scale(&self, s: f64) -> CQuat {
        CQuat([self.0[0] * s, self.0[1] * s, self.0[2] * s, self.0[3] * s])
    }

    /// Scale by a complex factor (commutes with the basis).
    pub fn scale_c(&self, s: Complex64) -> CQuat {
        CQuat([self.0[0] * s, self.0[1] * s, self.0[2] * s, self.0[3] * s])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl std::ops::Add for CQuat {
    type Output = CQuat;
    fn add(self, rhs: CQuat) -> CQuat {
        CQuat::add(&self, &rhs)
    }
}

impl std::ops::Sub for CQuat {
    type Output = CQuat;
    fn sub(self, rhs: CQuat) -> CQuat {
        CQuat::sub(&self, &rhs)
    }
}

impl std::ops::Mul for CQuat {
    type Output = CQuat;
    fn mul(self, rhs: CQuat) -> CQuat {
        CQuat::mul(&self, &rhs)
    }
}

impl std::ops::Neg for CQuat {
    type Output = CQuat;
    fn neg(self) -> CQuat {
        CQuat::neg(&self)
    }
}

/// A real 3-vector; spatial points, frequencies `k` and `xi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub const ZERO: Vec3 = Vec3([0.0; 3]);

    pub fn new(v0: f64, v1: f64, v2: f64) -> Self {
        Vec3([v0, v1, v2])
    }

    pub fn dot(&self, rhs: &Vec3) -> f64 {
        self.0[0] * rhs.0[0] + self.0[1] * rhs.0[1] + self.0[2] * rhs.0[2]
    }

    pub fn cross(&self, rhs: &Vec3) -> Vec3 {
        Vec3([
            self.0[1] * rhs.0[2] - self.0[2] * rhs.0[1],
            self.0[2] * rhs.0[0] - self.0[0] * rhs.0[2],
            self.0[0] * rhs.0[1] - self.0[1] * rhs.0[0],
        ])
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: f64) -> Vec3 {
        Vec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }

    pub fn add(&self, rhs: &Vec3) -> Vec3 {
        Vec3([
            self.0[0] + rhs.0[0],
            self.0[1] + rhs.0[1],
            self.0[2] + rhs.0[2],
        ])
    }

    pub fn sub(&self, rhs: &Vec3) -> Vec3 {
        Vec3([
            self.0[0] - rhs.0[0],
            self.0[1] - rhs.0[1],
            self.0[2] - rhs.0[2],
        ])
    }

    pub fn normalize(&self) -> Option<Vec3> {
        let n = self.norm();
        if n == 0.0 {
            None
        } else {
            Some(self.scale(1.0 / n))
        }
    }
}

/// A complex 3-vector; the spectral parameter `zeta` in vector form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CVec3(pub [Complex64; 3]);

impl CVec3 {
    pub fn from_real_imag(re: Vec3, im: Vec3) -> Self {
        CVec3([
            Complex64::new(re.0[0], im.0[0]),
            Complex64::new(re.0[1], im.0[1]),
            Complex64::new(re.0[2], im.0[2]),
        ])
    }

    /// Complex-bilinear dot product `a.b = a0 b0 + a1 b1 + a2 b2` (no conjugation).
    pub fn dot(&self, rhs: &CVec3) -> Complex64 {
        self.0[0] * rhs.0[0] + self.0[1] * rhs.0[1] + self.0[2] * rhs.0[2]
    }

    /// Pairing with a real vector.
    pub fn dot_real(&self, rhs: &Vec3) -> Complex64 {
        self.0[0] * rhs.0[0] + self.0[1] * rhs.0[1] + self.0[2] * rhs.0[2]
    }

    pub fn conj(&self) -> CVec3 {
        CVec3([self.0[0].conj(), self.0[1].conj(), self.0[2].conj()])
    }
}

/// Paravector embedding `(v0, v1, v2) -> v0 + v1 e1 + v2 e2`.
pub fn embed(v: Vec3) -> CQuat {
    CQuat([
        Complex64::new(v.0[0], 0.0),
        Complex64::new(v.0[1], 0.0),
        Complex64::new(v.0[2], 0.0),
        Complex64::new(0.0, 0.0),
    ])
}

/// Paravector embedding of a complex vector.
pub fn embed_c(v: CVec3) -> CQuat {
    CQuat([v.0[0], v.0[1], v.0[2], Complex64::new(0.0, 0.0)])
}

/// Embedding of `i*v` for real `v`; shows up as the symbol of `D`.
pub fn embed_i(v: Vec3) -> CQuat {
    CQuat([
        Complex64::new(0.0, v.0[0]),
        Complex64::new(0.0, v.0[1]),
        Complex64::new(0.0, v.0[2]),
        Complex64::new(0.0, 0.0),
    ])
}

/// Faithful 2x2 complex matrix representation: `1 -> I`, `e_a -> -i sigma_a`
/// (Pauli matrices), complex coefficients acting as scalars. Multiplication
/// of quaternions corresponds to matrix multiplication, which makes this an
/// independent oracle for the product, conjugations, and inverses.
pub fn matrix_rep(q: &CQuat) -> [[Complex64; 2]; 2] {
    let i = Complex64::new(0.0, 1.0);
    let (s, a, b, c) = (q.0[0], q.0[1], q.0[2], q.0[3]);
    // -i*sigma1 = [[0,-i],[-i,0]], -i*sigma2 = [[0,-1],[1,0]],
    // -i*sigma3 = [[-i,0],[0,i]]
    [
        [s - i * c, -i * a - b],
        [-i * a + b, s + i * c],
    ]
}

/// Frobenius distance between two matrix representations.
pub fn matrix_distance(m: &[[Complex64; 2]; 2], n: &[[Complex64; 2]; 2]) -> f64 {
    let mut acc = 0.0;
    for r in 0..2 {
        for c in 0..2 {
            acc += (m[r][c] - n[r][c]).norm_sqr();
        }
    }
    acc.sqrt()
}

/// Matrix product helper for the representation oracle.
pub fn matrix_mul(m: &[[Complex64; 2]; 2], n: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            for t in 0..2 {
                out[r][c] += m[r][t] * n[t][c];
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn matrix_representation_is_multiplicative() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..1000 {
            let a = random_cquat(&mut rng);
            let b = random_cquat(&mut rng);
            let lhs = matrix_rep(&a.mul(&b));
            let rhs = matrix_mul(&matrix_rep(&a), &matrix_rep(&b));
            let scale = a.norm() * b.norm();
            assert!(matrix_distance(&lhs, &rhs) < 1e-14 * scale.max(1.0));
        }
        // basis sanity: the representation is faithful on the units
        for j in 1..4 {
            let u = CQuat::unit(j);
            assert!(matrix_distance(&matrix_rep(&u.mul(&u)), &matrix_rep(&CQuat::ONE.neg())) < 1e-15);
        }
    }

    pub(crate) fn random_cquat(rng: &mut impl Rng) -> CQuat {
        CQuat([
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        ])
    }

    #[test]
    fn basis_products() {
        let e1 = CQuat::unit(1);
        let e2 = CQuat::unit(2);
        let e3 = CQuat::unit(3);
        assert_eq!(e1.mul(&e2), e3);
        assert_eq!(e2.mul(&e1), e3.neg());
        assert_eq!(e1.mul(&e1), CQuat::ONE.neg());
        assert_eq!(e2.mul(&e2), CQuat::ONE.neg());
        assert_eq!(e3.mul(&e3), CQuat::ONE.neg());
    }

    #[test]
    fn one_plus_e1_times_one_minus_e1() {
        let a = CQuat::ONE.add(&CQuat::unit(1));
        let b = CQuat::ONE.sub(&CQuat::unit(1));
        assert_eq!(a.mul(&b), CQuat::scalar(2.0));
    }

    #[test]
    fn conjugation_examples() {
        let e3 = CQuat::unit(3);
        assert_eq!(e3.conjugate(Conjugation::Quat), e3.neg());
        // herm(i*e1) = i*e1: conjugating i and negating e1 cancel.
        let ie1 = CQuat::unit(1).scale_c(Complex64::new(0.0, 1.0));
        assert_eq!(ie1.conjugate(Conjugation::Herm), ie1);
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..200 {
            let x = random_cquat(&mut rng);
            let y = random_cquat(&mut rng);
            // anti-automorphism
            let lhs = x.mul(&y).bar();
            let rhs = y.bar().mul(&x.bar());
            assert!(lhs.sub(&rhs).norm() < 1e-13);
            assert_eq!(x.bar().bar(), x);
        }
    }

    #[test]
    fn scalar_vector_split() {
        let a = CQuat::scalar(3.0).add(&CQuat::unit(1).scale(2.0));
        assert_eq!(a.sc(), Complex64::new(3.0, 0.0));
        assert_eq!(CQuat::scalar(5.0).vec(), CQuat::ZERO);
        let mut rng = StdRng::seed_from_u64(8);
        for _ in 0..50 {
            let x = random_cquat(&mut rng);
            let back = CQuat::from_complex(x.sc()).add(&x.vec());
            assert_eq!(back, x);
        }
    }

    #[test]
    fn norms_and_inner() {
        let a = CQuat::ONE.add(&CQuat::unit(1));
        assert!((a.norm() - 2f64.sqrt()).abs() < 1e-15);
        let ie2 = CQuat::unit(2).scale_c(Complex64::new(0.0, 1.0));
        assert!((ie2.norm() - 1.0).abs() < 1e-15);
        assert_eq!(CQuat::unit(1).inner(&CQuat::unit(2)), Complex64::new(0.0, 0.0));
        // lambda * bar(lambda) is a complex scalar
        let mut rng = StdRng::seed_from_u64(9);
        for _ in 0..100 {
            let x = random_cquat(&mut rng);
            let prod = x.mul(&x.bar());
            assert!(prod.vec().norm() < 1e-13);
            assert!((prod.sc() - x.quadratic_form()).norm() < 1e-13);
            // Sc(herm(x) x) real nonnegative
            let n = x.conjugate(Conjugation::Herm).mul(&x).sc();
            assert!(n.im.abs() < 1e-13 && n.re >= 0.0);
        }
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(
            CQuat::scalar(2.0).inverse().unwrap(),
            CQuat::scalar(0.5)
        );
        let ie2 = CQuat::unit(2).scale_c(Complex64::new(0.0, 1.0));
        let inv = ie2.inverse().unwrap();
        assert!(inv.sub(&ie2).norm() < 1e-15);
        assert!(inv.mul(&ie2).sub(&CQuat::ONE).norm() < 1e-15);
        // a null quaternion: e1 + i e2
        let null = CQuat::unit(1).add(&CQuat::unit(2).scale_c(Complex64::new(0.0, 1.0)));
        assert!(matches!(null.inverse(), Err(Error::ZeroDivisor(_))));
    }

    #[test]
    fn real_inverse_is_bar_over_norm_sqr() {
        let mut rng = StdRng::seed_from_u64(10);
        for _ in 0..100 {
            let x = CQuat([
                Complex64::new(rng.gen_range(-1.0..1.0), 0.0),
                Complex64::new(rng.gen_range(-1.0..1.0), 0.0),
                Complex64::new(rng.gen_range(-1.0..1.0), 0.0),
                Complex64::new(rng.gen_range(-1.0..1.0), 0.0),
            ]);
            if x.norm() < 0.1 {
                continue;
            }
            let inv = x.inverse().unwrap();
            let expect = x.bar().scale(1.0 / x.norm_sqr());
            assert!(inv.sub(&expect).norm() < 1e-13);
        }
    }

    #[test]
    fn embed_examples() {
        assert_eq!(embed(Vec3::new(1.0, 0.0, 0.0)), CQuat::ONE);
        assert_eq!(embed(Vec3::new(0.0, 1.0, 0.0)), CQuat::unit(1));
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..100 {
            let xi = Vec3::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            );
            let q = embed(xi);
            let prod = q.mul(&q.bar());
            assert!((prod.sc().re - xi.dot(&xi)).abs() < 1e-13);
            assert!(prod.vec().norm() < 1e-14);
        }
    }

    #[test]
    fn submultiplicativity() {
        // The Euclidean norm on complexified quaternions is submultiplicative
        // with constant sqrt(2), and the constant is attained: for
        // a = 1 + i*e1, |a*a| = 2*sqrt(2) = sqrt(2)*|a|^2. Constant 1 fails.
        let a = CQuat::ONE.add(&CQuat::unit(1).scale_c(Complex64::new(0.0, 1.0)));
        assert!((a.mul(&a).norm() - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        assert!(a.mul(&a).norm() > a.norm() * a.norm() * 1.2);

        let c = 2f64.sqrt();
        let mut rng = StdRng::seed_from_u64(12);
        for _ in 0..10_000 {
            let a = random_cquat(&mut rng);
            let b = random_cquat(&mut rng);
            assert!(a.mul(&b).norm() <= c * a.norm() * b.norm() * (1.0 + 1e-12));
        }
    }
}
