//! FFT plumbing and Fourier-symbol operators on the periodic padded box:
//! spectral Cauchy-Riemann derivatives and the symbol form of the Teodorescu
//! transform, including the frequency-shifted variant used by the modulated
//! Dirac integral operators.
//!
//! On the reciprocal lattice the operator `D` acts by left multiplication
//! with `i * embed(xi)`, and `Dbar` with `i * bar(embed(xi))`. Their inverses
//! are therefore exact multipliers away from the zero mode:
//!
//! `m_T(xi) = -i * bar(embed(xi)) / |xi|^2`,  `m_Tbar(xi) = -i * embed(xi) / |xi|^2`.
//!
//! The shifted variant evaluates the multiplier at `xi + k` with the true
//! (unwrapped) shift, which is what keeps large-`|k|` modulated solves
//! meaningful on a fixed grid.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::grid::{Grid3, QField};
use crate::quat::{embed, CQuat, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// In-place 3-D FFT on a flat C-order cube of side `n`.
/// The inverse direction includes the `1/n^3` normalization.
pub fn fft3(data: &mut [Complex64], n: usize, dir: Direction) {
    assert_eq!(data.len(), n * n * n);
    let mut planner = FftPlanner::new();
    let fft = match dir {
        Direction::Forward => planner.plan_fft_forward(n),
        Direction::Inverse => planner.plan_fft_inverse(n),
    };
    let mut scratch = vec![Complex64::new(0.0, 0.0); n];

    // axis 2 (contiguous)
    for row in data.chunks_exact_mut(n) {
        fft.process(row);
    }
    // axis 1
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                scratch[j] = data[(i * n + j) * n + k];
            }
            fft.process(&mut scratch);
            for j in 0..n {
                data[(i * n + j) * n + k] = scratch[j];
            }
        }
    }
    // axis 0
    for j in 0..n {
        for k in 0..n {
            for i in 0..n {
                scratch[i] = data[(i * n + j) * n + k];
            }
            fft.process(&mut scratch);
            for i in 0..n {
                data[(i * n + j) * n + k] = scratch[i];
            }
        }
    }
    if dir == Direction::Inverse {
        let s = 1.0 / (n as f64).powi(3);
        for v in data.iter_mut() {
            *v *= s;
        }
    }
}

/// Cauchy-Riemann operator variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DVariant {
    /// `D = d0 + e1 d1 + e2 d2`
    D,
    /// `Dbar = d0 - e1 d1 - e2 d2`
    Dbar,
}

/// Teodorescu variants (right inverses of `D` and `Dbar` respectively).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TVariant {
    T,
    Tbar,
}

/// Transform a field to its four component spectra.
fn forward_components(f: &QField) -> [Vec<Complex64>; 4] {
    std::array::from_fn(|c| {
        let mut data = f.component(c);
        fft3(&mut data, f.grid.n, Direction::Forward);
        data
    })
}

fn inverse_components(grid: Grid3, mut comps: [Vec<Complex64>; 4]) -> QField {
    for c in comps.iter_mut() {
        fft3(c, grid.n, Direction::Inverse);
    }
    QField::from_components(grid, comps)
}

/// Apply a frequency-dependent LEFT quaternion multiplier to a field:
/// `out = IFFT[ m(xi_bin) * FFT[f] ]`.
fn apply_left_multiplier(f: &QField, m: impl Fn(Vec3) -> CQuat) -> QField {
    let g = f.grid;
    let spec = forward_components(f);
    let mut out: [Vec<Complex64>; 4] =
        std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); g.len()]);
    for mi in 0..g.n {
        for mj in 0..g.n {
            for mk in 0..g.n {
                let idx = g.idx(mi, mj, mk);
                let mult = m(g.xi(mi, mj, mk));
                let fhat = CQuat([spec[0][idx], spec[1][idx], spec[2][idx], spec[3][idx]]);
                let prod = mult.mul(&fhat);
                for c in 0..4 {
                    out[c][idx] = prod.0[c];
                }
            }
        }
    }
    inverse_components(g, out)
}

/// Spectral Cauchy-Riemann derivative: `D f` or `Dbar f` with the quaternion
/// units multiplying the partial derivatives from the left.
pub fn apply_d(f: &QField, variant: DVariant) -> QField {
    let sign = match variant {
        DVariant::D => 1.0,
        DVariant::Dbar => -1.0,
    };
    apply_left_multiplier(f, |xi| {
        CQuat([
            Complex64::new(0.0, xi.0[0]),
            Complex64::new(0.0, sign * xi.0[1]),
            Complex64::new(0.0, sign * xi.0[2]),
            Complex64::new(0.0, 0.0),
        ])
    })
}

/// Spectral gradient component `d f / d x_axis`.
pub fn partial(f: &QField, axis: usize) -> QField {
    apply_left_multiplier(f, |xi| CQuat::from_complex(Complex64::new(0.0, xi.0[axis])))
}

/// Spectral Laplacian (test oracle for `D Dbar = Delta`).
pub fn laplacian(f: &QField) -> QField {
    apply_left_multiplier(f, |xi| CQuat::scalar(-xi.dot(&xi)))
}

/// Teodorescu multiplier at frequency `eta`, zero at the mean mode.
fn t_symbol(eta: Vec3, variant: TVariant) -> CQuat {
    let n2 = eta.dot(&eta);
    if n2 < 1e-28 {
        return CQuat::ZERO;
    }
    let q = match variant {
        TVariant::T => embed(eta).bar(),
        TVariant::Tbar => embed(eta),
    };
    q.scale_c(Complex64::new(0.0, -1.0 / n2))
}

/// Symbol (periodic) form of the Teodorescu transform: exact right inverse of
/// the spectral `D` (resp. `Dbar`) up to the zero mode.
pub fn teodorescu_spectral(f: &QField, variant: TVariant) -> QField {
    apply_left_multiplier(f, |xi| t_symbol(xi, variant))
}

/// Frequency-shifted Teodorescu: `e^{-sign * i x.k} T[ e^{sign * i x.k} f ]`
/// realized as the multiplier `m(xi + sign*k)`. Exact in exact arithmetic and
/// free of modulation aliasing for any `|k|`.
pub fn teodorescu_shifted(f: &QField, variant: TVariant, k: Vec3, sign: f64) -> QField {
    apply_left_multiplier(f, |xi| t_symbol(xi.add(&k.scale(sign)), variant))
}
