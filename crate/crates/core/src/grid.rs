//! Uniform cubic grids, quaternion-valued fields, conductivity phantoms,
//! and continuum-normalized discrete Fourier transforms.
//!
//! The grid is cell-centered and symmetric about the box center, so odd
//! kernels cancel exactly over symmetric neighborhoods. The default box is
//! `[-1.5, 1.5]^3` at `N = 32`, holding the unit ball with a padding shell of
//! at least `N/8` cells where every compactly supported field must vanish.
//!
//! ```
//! use calderon3d::grid::{dft3, idft3, sample_phantom, Grid3, Phantom};
//!
//! let g = Grid3::default_box(16);
//! let gamma = sample_phantom(&Phantom::default_smooth(), g).unwrap();
//! // the continuum-normalized transforms invert each other exactly
//! let roundtrip = idft3(&dft3(&gamma));
//! assert!(roundtrip.rel_l2_error(&gamma) < 1e-12);
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quat::{CQuat, Vec3};
use crate::spectral;

/// Uniform cubic grid, cell-centered nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid3 {
    /// Coordinate of node (0,0,0).
    pub origin: Vec3,
    /// Node spacing.
    pub h: f64,
    /// Nodes per axis.
    pub n: usize,
}

impl Grid3 {
    /// Cube `[-half, half]^3` with `n` cell-centered nodes per axis.
    pub fn centered(half: f64, n: usize) -> Self {
        let h = 2.0 * half / n as f64;
        Grid3 {
            origin: Vec3::new(-half + 0.5 * h, -half + 0.5 * h, -half + 0.5 * h),
            h,
            n,
        }
    }

    /// Default desk-scale grid: box `[-1.5, 1.5]^3`, `N = 32`.
    pub fn default_box(n: usize) -> Self {
        Self::centered(1.5, n)
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    pub fn node(&self, i: usize, j: usize, k: usize) -> Vec3 {
        Vec3::new(
            self.origin.0[0] + self.h * i as f64,
            self.origin.0[1] + self.h * j as f64,
            self.origin.0[2] + self.h * k as f64,
        )
    }

    /// Iterate nodes in C order, yielding (flat index, position).
    pub fn nodes(&self) -> impl Iterator<Item = (usize, Vec3)> + '_ {
        let n = self.n;
        (0..n).flat_map(move |i| {
            (0..n).flat_map(move |j| (0..n).map(move |k| (self.idx(i, j, k), self.node(i, j, k))))
        })
    }

    /// Width of the padding shell in cells (`N/8`).
    pub fn padding_cells(&self) -> usize {
        (self.n / 8).max(1)
    }

    /// True if the node at grid index (i,j,k) lies in the outer padding shell.
    pub fn in_padding(&self, i: usize, j: usize, k: usize) -> bool {
        let p = self.padding_cells();
        let hi = self.n - p;
        i < p || j < p || k < p || i >= hi || j >= hi || k >= hi
    }

    /// Reciprocal-lattice frequency for FFT bin `m` along one axis.
    pub fn xi_axis(&self, m: usize) -> f64 {
        let n = self.n as isize;
        let m = m as isize;
        let m_signed = if m < (n + 1) / 2 { m } else { m - n };
        2.0 * std::f64::consts::PI * m_signed as f64 / (self.n as f64 * self.h)
    }

    /// Frequency vector of FFT bin (mi, mj, mk).
    pub fn xi(&self, mi: usize, mj: usize, mk: usize) -> Vec3 {
        Vec3::new(self.xi_axis(mi), self.xi_axis(mj), self.xi_axis(mk))
    }

    /// Reciprocal-lattice step `2*pi / (N h)`.
    pub fn xi_step(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.n as f64 * self.h)
    }
}

/// A complex-quaternion-valued field sampled on a [`Grid3`].
#[derive(Debug, Clone, PartialEq)]
pub struct QField {
    pub grid: Grid3,
    pub values: Vec<CQuat>,
}

impl QField {
    pub fn zeros(grid: Grid3) -> Self {
        QField {
            grid,
            values: vec![CQuat::ZERO; grid.len()],
        }
    }

    pub fn constant(grid: Grid3, c: CQuat) -> Self {
        QField {
            grid,
            values: vec![c; grid.len()],
        }
    }

    /// Sample a pointwise function of linear index and position.
    pub fn from_fn_indexed(grid: Grid3, f: impl Fn(usize, Vec3) -> CQuat) -> Self {
        let mut values = vec![CQuat::ZERO; grid.len()];
        for (idx, x) in grid.nodes() {
            values[idx] = f(idx, x);
        }
        QField { grid, values }
    }

    /// Sample a pointwise function of position.
    pub fn from_fn(grid: Grid3, f: impl Fn(Vec3) -> CQuat + Sync) -> Self {
        let mut values = vec![CQuat::ZERO; grid.len()];
        for (idx, x) in grid.nodes() {
            values[idx] = f(x);
        }
        QField { grid, values }
    }

    pub fn map(&self, f: impl Fn(&CQuat) -> CQuat) -> QField {
        QField {
            grid: self.grid,
            values: self.values.iter().map(f).collect(),
        }
    }

    /// Pointwise `self(x) * rhs(x)` in quaternion order.
    pub fn mul_pointwise(&self, rhs: &QField) -> QField {
        assert_eq!(self.grid, rhs.grid);
        QField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&rhs.values)
                .map(|(a, b)| a.mul(b))
                .collect(),
        }
    }

    pub fn add(&self, rhs: &QField) -> QField {
        assert_eq!(self.grid, rhs.grid);
        QField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&rhs.values)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &QField) -> QField {
        assert_eq!(self.grid, rhs.grid);
        QField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&rhs.values)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> QField {
        self.map(|q| q.scale(s))
    }

    /// Grid L2 norm `sqrt(h^3 * sum |f|^2)`.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.values.iter().map(|q| q.norm_sqr()).sum();
        (s * self.grid.h.powi(3)).sqrt()
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().map(|q| q.norm()).fold(0.0, f64::max)
    }

    /// Relative L2 distance `|self - rhs| / |rhs|`.
    pub fn rel_l2_error(&self, reference: &QField) -> f64 {
        self.sub(reference).l2_norm() / reference.l2_norm()
    }

    /// Max norm over the padding shell, a surrogate for decay at infinity.
    pub fn padding_linf(&self) -> f64 {
        let g = self.grid;
        let mut m: f64 = 0.0;
        for i in 0..g.n {
            for j in 0..g.n {
                for k in 0..g.n {
                    if g.in_padding(i, j, k) {
                        m = m.max(self.values[g.idx(i, j, k)].norm());
                    }
                }
            }
        }
        m
    }

    /// Trilinear interpolation at an arbitrary point inside the grid.
    pub fn interp(&self, x: Vec3) -> CQuat {
        let g = self.grid;
        let mut out = CQuat::ZERO;
        let mut base = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for a in 0..3 {
            let t = (x.0[a] - g.origin.0[a]) / g.h;
            let f = t.floor();
            let i = (f as isize).clamp(0, g.n as isize - 2) as usize;
            base[a] = i;
            frac[a] = (t - i as f64).clamp(0.0, 1.0);
        }
        for di in 0..2 {
            for dj in 0..2 {
                for dk in 0..2 {
                    let w = (if di == 0 { 1.0 - frac[0] } else { frac[0] })
                        * (if dj == 0 { 1.0 - frac[1] } else { frac[1] })
                        * (if dk == 0 { 1.0 - frac[2] } else { frac[2] });
                    let v = self.values[g.idx(base[0] + di, base[1] + dj, base[2] + dk)];
                    out = out.add(&v.scale(w));
                }
            }
        }
        out
    }

    /// Extract one complex component (0..4) as a flat array.
    pub fn component(&self, c: usize) -> Vec<Complex64> {
        self.values.iter().map(|q| q.0[c]).collect()
    }

    /// Assemble from four complex component arrays.
    pub fn from_components(grid: Grid3, comps: [Vec<Complex64>; 4]) -> QField {
        let values = (0..grid.len())
            .map(|i| CQuat([comps[0][i], comps[1][i], comps[2][i], comps[3][i]]))
            .collect();
        QField { grid, values }
    }
}

/// Radial bump profiles for phantom inclusions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// `exp(1 - 1/(1 - r^2/rho^2))` for `r < rho`; C-infinity, closed-form gradient.
    Smooth,
    /// `max(0, 1 - r/rho)`; Lipschitz but not differentiable at the apex.
    Cone,
}

/// One radial inclusion added to the unit background.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Bump {
    pub center: Vec3,
    pub radius: f64,
    /// Complex amplitude; `gamma = 1 + sum a_j * profile_j`.
    pub amplitude: Complex64,
    pub profile: Profile,
}

impl Bump {
    /// Profile value at position `x` (1 at the center, 0 outside the support).
    pub fn profile_at(&self, x: Vec3) -> f64 {
        let r = x.sub(&self.center).norm();
        let t = r / self.radius;
        match self.profile {
            Profile::Smooth => {
                if t < 1.0 {
                    (1.0 - 1.0 / (1.0 - t * t)).exp()
                } else {
                    0.0
                }
            }
            Profile::Cone => (1.0 - t).max(0.0),
        }
    }

    /// Gradient of the profile (analytic for the smooth mollifier).
    pub fn profile_grad(&self, x: Vec3) -> Vec3 {
        let d = x.sub(&self.center);
        let r = d.norm();
        let rho = self.radius;
        let t = r / rho;
        match self.profile {
            Profile::Smooth => {
                if t < 1.0 && r > 1e-14 {
                    // d/dr exp(1 - 1/(1-t^2)) = exp(...) * (-2t/rho) / (1-t^2)^2
                    let s = 1.0 - t * t;
                    let dpdr = self.profile_at(x) * (-2.0 * t / rho) / (s * s);
                    d.scale(dpdr / r)
                } else {
                    Vec3::ZERO
                }
            }
            Profile::Cone => {
                if t < 1.0 && r > 1e-14 {
                    d.scale(-1.0 / (rho * r))
                } else {
                    Vec3::ZERO
                }
            }
        }
    }
}

/// A synthetic conductivity: unit background plus bumps.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Phantom {
    pub bumps: Vec<Bump>,
    /// Floor for `Re gamma`.
    #[serde(default = "default_floor")]
    pub positivity_floor: f64,
}

fn default_floor() -> f64 {
    0.1
}

impl Phantom {
    pub fn trivial() -> Self {
        Phantom {
            bumps: vec![],
            positivity_floor: default_floor(),
        }
    }

    /// The default test phantom: one smooth dip of contrast `0.3 + 0.1i`,
    /// radius 0.4, slightly off-center; `min Re gamma = 0.7`.
    pub fn default_smooth() -> Self {
        Phantom {
            bumps: vec![Bump {
                center: Vec3::new(0.2, -0.1, 0.1),
                radius: 0.4,
                amplitude: Complex64::new(-0.3, -0.1),
                profile: Profile::Smooth,
            }],
            positivity_floor: default_floor(),
        }
    }

    /// Analytic gamma value at a point.
    pub fn gamma_at(&self, x: Vec3) -> Complex64 {
        let mut g = Complex64::new(1.0, 0.0);
        for b in &self.bumps {
            g += b.amplitude * b.profile_at(x);
        }
        g
    }

    /// Analytic gradient of gamma.
    pub fn gamma_grad_at(&self, x: Vec3) -> [Complex64; 3] {
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for b in &self.bumps {
            let gr = b.profile_grad(x);
            for a in 0..3 {
                out[a] += b.amplitude * gr.0[a];
            }
        }
        out
    }

    /// Analytic Dirac potential `q2 = -(1/2) (D gamma) / gamma` as a paravector.
    pub fn q2_at(&self, x: Vec3) -> CQuat {
        let g = self.gamma_at(x);
        let dg = self.gamma_grad_at(x);
        let f = Complex64::new(-0.5, 0.0) / g;
        CQuat([f * dg[0], f * dg[1], f * dg[2], Complex64::new(0.0, 0.0)])
    }
}

/// Sample a phantom onto a grid as a scalar-valued [`QField`].
///
/// Fails with [`Error::PositivityViolation`] if `Re gamma` dips below the
/// phantom's floor anywhere on the grid.
pub fn sample_phantom(ph: &Phantom, grid: Grid3) -> Result<QField> {
    let mut f = QField::zeros(grid);
    let mut min_re = f64::INFINITY;
    for (idx, x) in grid.nodes() {
        let g = ph.gamma_at(x);
        min_re = min_re.min(g.re);
        f.values[idx] = CQuat::from_complex(g);
    }
    if min_re < ph.positivity_floor {
        return Err(Error::PositivityViolation {
            min_re,
            floor: ph.positivity_floor,
        });
    }
    Ok(f)
}

/// Continuum-normalized forward transform on the full reciprocal lattice:
/// `fhat(xi_m) = h^3 * sum_x e^{-i x.xi} f(x)`, component-wise.
///
/// Output is laid out like the input grid with bin `m` at FFT position `m`
/// (use [`Grid3::xi`] for the frequency of a bin).
pub fn dft3(f: &QField) -> QField {
    let g = f.grid;
    let comps: [Vec<Complex64>; 4] = std::array::from_fn(|c| {
        let mut data = f.component(c);
        spectral::fft3(&mut data, g.n, spectral::Direction::Forward);
        // continuum normalization: h^3 and the origin phase
        apply_origin_phase(&mut data, g, -1.0);
        for v in data.iter_mut() {
            *v *= g.h.powi(3);
        }
        data
    });
    QField::from_components(g, comps)
}

/// Inverse of [`dft3`] with `(2 pi)^{-3}` normalization:
/// `f(x) = (2 pi)^{-3} * dxi^3 * sum_m e^{+i x.xi_m} fhat(xi_m)`.
pub fn idft3(fhat: &QField) -> QField {
    let g = fhat.grid;
    // (2pi)^{-3} (dxi)^3 N^3 / (h^3? ...): ifft3 divides by N^3, so scale by
    // N^3 dxi^3 / (2pi)^3 = 1 / h^3.
    let scale = 1.0 / g.h.powi(3);
    let comps: [Vec<Complex64>; 4] = std::array::from_fn(|c| {
        let mut data = fhat.component(c);
        apply_origin_phase(&mut data, g, 1.0);
        spectral::fft3(&mut data, g.n, spectral::Direction::Inverse);
        for v in data.iter_mut() {
            *v *= scale;
        }
        data
    });
    QField::from_components(g, comps)
}

/// Multiply spectrum bins by `e^{sign * i * origin . xi_m}`.
fn apply_origin_phase(data: &mut [Complex64], g: Grid3, sign: f64) {
    let phases: Vec<Vec<Complex64>> = (0..3)
        .map(|axis| {
            (0..g.n)
                .map(|m| {
                    let xi = g.xi_axis(m);
                    Complex64::from_polar(1.0, sign * g.origin.0[axis] * xi)
                })
                .collect()
        })
        .collect();
    for i in 0..g.n {
        for j in 0..g.n {
            for k in 0..g.n {
                data[g.idx(i, j, k)] *= phases[0][i] * phases[1][j] * phases[2][k];
            }
        }
    }
}

/// Evaluate `h^3 * sum_x e^{-i x.xi} f(x)` at one arbitrary frequency.
pub fn dft_at(f: &QField, xi: Vec3) -> CQuat {
    let g = f.grid;
    let mut acc = CQuat::ZERO;
    for (idx, x) in g.nodes() {
        let v = &f.values[idx];
        if v.norm_sqr() == 0.0 {
            continue;
        }
        let ph = Complex64::from_polar(1.0, -x.dot(&xi));
        acc = acc.add(&v.scale_c(ph));
    }
    acc.scale(g.h.powi(3))
}

/// The mixed norm `sup_x ( sum_k w_k |f(x,k)|^p )^{1/p}` over `|k| > R`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SNorm {
    /// Exponent, must be > 2.
    pub p: f64,
    /// Radial cutoff; all samples must satisfy `|k| > R`.
    pub r_cutoff: f64,
    pub k_samples: Vec<Vec3>,
}

impl SNorm {
    pub fn new(p: f64, r_cutoff: f64, k_samples: Vec<Vec3>) -> Result<Self> {
        if p <= 2.0 {
            return Err(Error::Config(format!("snorm.p must be > 2, got {p}")));
        }
        if k_samples.is_empty() {
            return Err(Error::Config("snorm.k_samples is empty".into()));
        }
        if let Some(k) = k_samples.iter().find(|k| k.norm() <= r_cutoff) {
            return Err(Error::Config(format!(
                "snorm sample |k| = {:.3} inside cutoff R = {}",
                k.norm(),
                r_cutoff
            )));
        }
        Ok(SNorm {
            p,
            r_cutoff,
            k_samples,
        })
    }

    /// Evaluate on fields indexed by k-sample (unit total k-measure).
    pub fn eval(&self, fields: &[QField]) -> f64 {
        assert_eq!(fields.len(), self.k_samples.len());
        let n_nodes = fields[0].grid.len();
        let w = 1.0 / self.k_samples.len() as f64;
        let mut sup: f64 = 0.0;
        for idx in 0..n_nodes {
            let s: f64 = fields
                .iter()
                .map(|f| w * f.values[idx].norm().powf(self.p))
                .sum();
            sup = sup.max(s.powf(1.0 / self.p));
        }
        sup
    }
}
