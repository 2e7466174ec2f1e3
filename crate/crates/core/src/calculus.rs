//! The Teodorescu transform as a free-space lattice convolution with the
//! generalized Cauchy kernel, boundary integral operators on a triangulated
//! sphere, and the Borel-Pompeiu identity as a computable residual.
//!
//! Two discretizations of `T` coexist in this crate. This module's kernel
//! convolution is the free-space transform (right inverse of `D` up to
//! quadrature error that shrinks with the grid). The symbol form in
//! [`crate::spectral`] is its periodic counterpart used inside the Dirac
//! solver where frequency shifts matter.
//!
//! ```
//! use calderon3d::calculus::{right_inverse_residual, CauchyKernel};
//! use calderon3d::grid::{Grid3, QField};
//! use calderon3d::quat::CQuat;
//! use calderon3d::spectral::TVariant;
//!
//! // a smooth bump supported in the unit ball
//! let g = Grid3::default_box(16);
//! let f = QField::from_fn(g, |x| {
//!     let r2 = x.dot(&x);
//!     if r2 < 1.0 {
//!         CQuat::scalar((1.0 - 1.0 / (1.0 - r2)).exp())
//!     } else {
//!         CQuat::ZERO
//!     }
//! });
//! // D(Tf) = f up to quadrature error that shrinks with the grid
//! let res = right_inverse_residual(&f, TVariant::T, &CauchyKernel::new(g));
//! assert!(res < 0.11);
//! ```

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Grid3, QField};
use crate::quat::{embed, CQuat, Vec3};
use crate::spectral::{self, Direction, TVariant};

const OMEGA: f64 = 4.0 * std::f64::consts::PI;

/// Generalized Cauchy kernel `E(d) = -(1/omega) * bar(embed(d)) / |d|^3`,
/// with `E(0) = 0` (odd kernel, vanishing principal value on a symmetric cell).
pub fn cauchy_kernel(offset: Vec3) -> CQuat {
    let r = offset.norm();
    if r < 1e-300 {
        return CQuat::ZERO;
    }
    embed(offset).bar().scale(-1.0 / (OMEGA * r.powi(3)))
}

/// Conjugate kernel `Ebar(d) = -(1/omega) * embed(d) / |d|^3` (for `Tbar`).
pub fn cauchy_kernel_bar(offset: Vec3) -> CQuat {
    let r = offset.norm();
    if r < 1e-300 {
        return CQuat::ZERO;
    }
    embed(offset).scale(-1.0 / (OMEGA * r.powi(3)))
}

/// Precomputed kernel spectra on the doubled (zero-padded) lattice, so that
/// one circular convolution equals the free-space linear convolution on the
/// original grid.
pub struct CauchyKernel {
    grid: Grid3,
    m: usize,
    spectra: [[Vec<Complex64>; 4]; 2], // [T, Tbar]
}

impl CauchyKernel {
    pub fn new(grid: Grid3) -> Self {
        let m = 2 * grid.n;
        let spectra = [TVariant::T, TVariant::Tbar].map(|variant| {
            let mut comps: [Vec<Complex64>; 4] =
                std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); m * m * m]);
            for i in 0..m {
                for j in 0..m {
                    for k in 0..m {
                        let d = Vec3::new(
                            signed_offset(i, m) as f64 * grid.h,
                            signed_offset(j, m) as f64 * grid.h,
                            signed_offset(k, m) as f64 * grid.h,
                        );
                        // T f(x) = sum_y E(y - x) f(y) h^3; as a convolution over
                        // d = x - y the kernel sample is E(-d) = -E(d).
                        let val = match variant {
                            TVariant::T => cauchy_kernel(d).neg(),
                            TVariant::Tbar => cauchy_kernel_bar(d).neg(),
                        };
                        let idx = (i * m + j) * m + k;
                        for c in 0..4 {
                            comps[c][idx] = val.0[c];
                        }
                    }
                }
            }
            for c in comps.iter_mut() {
                spectral::fft3(c, m, Direction::Forward);
            }
            comps
        });
        CauchyKernel { grid, m, spectra }
    }

    pub fn grid(&self) -> Grid3 {
        self.grid
    }

    /// Apply `T` (or `Tbar`) to a field supported in the box interior.
    pub fn apply(&self, f: &QField, variant: TVariant) -> QField {
        assert_eq!(f.grid, self.grid, "kernel/grid mismatch");
        let n = self.grid.n;
        let m = self.m;
        let vi = match variant {
            TVariant::T => 0,
            TVariant::Tbar => 1,
        };
        // zero-pad the field components and transform
        let fspec: [Vec<Complex64>; 4] = std::array::from_fn(|c| {
            let mut data = vec![Complex64::new(0.0, 0.0); m * m * m];
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        data[(i * m + j) * m + k] = f.values[self.grid.idx(i, j, k)].0[c];
                    }
                }
            }
            spectral::fft3(&mut data, m, Direction::Forward);
            data
        });
        // quaternion product in the spectral domain: out_c = sum sign K_a F_b
        let kspec = &self.spectra[vi];
        let mut out: [Vec<Complex64>; 4] =
            std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); m * m * m]);
        for a in 0..4 {
            for b in 0..4 {
                let (idx_c, sign) = basis_product(a, b);
                let dst = &mut out[idx_c];
                let ka = &kspec[a];
                let fb = &fspec[b];
                if sign > 0.0 {
                    dst.iter_mut()
                        .zip(ka.iter().zip(fb))
                        .for_each(|(o, (x, y))| *o += x * y);
                } else {
                    dst.iter_mut()
                        .zip(ka.iter().zip(fb))
                        .for_each(|(o, (x, y))| *o -= x * y);
                }
            }
        }
        let h3 = self.grid.h.powi(3);
        let comps: [Vec<Complex64>; 4] = std::array::from_fn(|c| {
            let mut data = std::mem::take(&mut out[c]);
            spectral::fft3(&mut data, m, Direction::Inverse);
            let mut slice = vec![Complex64::new(0.0, 0.0); n * n * n];
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        slice[self.grid.idx(i, j, k)] = data[(i * m + j) * m + k] * h3;
                    }
                }
            }
            slice
        });
        QField::from_components(self.grid, comps)
    }
}

fn signed_offset(i: usize, m: usize) -> isize {
    let i = i as isize;
    let m = m as isize;
    if i < m / 2 {
        i
    } else {
        i - m
    }
}

/// `e_a e_b = sign * e_idx` (same table as the quaternion product).
fn basis_product(a: usize, b: usize) -> (usize, f64) {
    const TABLE: [[(usize, f64); 4]; 4] = [
        [(0, 1.0), (1, 1.0), (2, 1.0), (3, 1.0)],
        [(1, 1.0), (0, -1.0), (3, 1.0), (2, -1.0)],
        [(2, 1.0), (3, -1.0), (0, -1.0), (1, 1.0)],
        [(3, 1.0), (2, 1.0), (1, -1.0), (0, -1.0)],
    ];
    TABLE[a][b]
}

/// Free-space Teodorescu transform by kernel convolution.
pub fn teodorescu(f: &QField, variant: TVariant, kernel: &CauchyKernel) -> QField {
    kernel.apply(f, variant)
}

/// Relative L2 residual of `D_fd(T f) - f` over interior nodes, with a
/// centered finite-difference `D` (variant-matched). The transform output is
/// a free-space potential, not box-periodic, so a local derivative is the
/// honest way to measure the right-inverse identity.
pub fn right_inverse_residual(f: &QField, variant: TVariant, kernel: &CauchyKernel) -> f64 {
    let tf = kernel.apply(f, variant);
    let g = f.grid;
    let sign = match variant {
        TVariant::T => 1.0,
        TVariant::Tbar => -1.0,
    };
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 1..g.n - 1 {
        for j in 1..g.n - 1 {
            for k in 1..g.n - 1 {
                let d0 = tf.values[g.idx(i + 1, j, k)]
                    .sub(&tf.values[g.idx(i - 1, j, k)])
                    .scale(1.0 / (2.0 * g.h));
                let d1 = tf.values[g.idx(i, j + 1, k)]
                    .sub(&tf.values[g.idx(i, j - 1, k)])
                    .scale(sign / (2.0 * g.h));
                let d2 = tf.values[g.idx(i, j, k + 1)]
                    .sub(&tf.values[g.idx(i, j, k - 1)])
                    .scale(sign / (2.0 * g.h));
                let dtf = d0
                    .add(&CQuat::unit(1).mul(&d1))
                    .add(&CQuat::unit(2).mul(&d2));
                num += dtf.sub(&f.values[g.idx(i, j, k)]).norm_sqr();
                den += f.values[g.idx(i, j, k)].norm_sqr();
            }
        }
    }
    (num / den.max(1e-300)).sqrt()
}

/// One triangle of the boundary mesh.
#[derive(Debug, Clone, Copy)]
pub struct Triangle {
    pub vertices: [Vec3; 3],
    pub centroid: Vec3,
    pub area: f64,
    /// Outward unit normal embedded as a paravector.
    pub normal: Vec3,
}

/// Triangulated sphere boundary with one-point (centroid) quadrature.
#[derive(Debug, Clone)]
pub struct BoundaryMesh {
    pub triangles: Vec<Triangle>,
    pub radius: f64,
}

impl BoundaryMesh {
    /// Icosphere of the given subdivision level (level 4 = 5120 triangles).
    pub fn icosphere(level: u32, radius: f64) -> Self {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let mut verts: Vec<Vec3> = vec![
            Vec3::new(-1.0, phi, 0.0),
            Vec3::new(1.0, phi, 0.0),
            Vec3::new(-1.0, -phi, 0.0),
            Vec3::new(1.0, -phi, 0.0),
            Vec3::new(0.0, -1.0, phi),
            Vec3::new(0.0, 1.0, phi),
            Vec3::new(0.0, -1.0, -phi),
            Vec3::new(0.0, 1.0, -phi),
            Vec3::new(phi, 0.0, -1.0),
            Vec3::new(phi, 0.0, 1.0),
            Vec3::new(-phi, 0.0, -1.0),
            Vec3::new(-phi, 0.0, 1.0),
        ]
        .into_iter()
        .map(|v| v.normalize().unwrap())
        .collect();
        let mut faces: Vec<[usize; 3]> = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        use std::collections::HashMap;
        for _ in 0..level {
            let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
            let mut next = Vec::with_capacity(faces.len() * 4);
            for f in &faces {
                let mut mid = [0usize; 3];
                for e in 0..3 {
                    let (a, b) = (f[e], f[(e + 1) % 3]);
                    let key = (a.min(b), a.max(b));
                    mid[e] = *midpoint.entry(key).or_insert_with(|| {
                        let m = verts[a].add(&verts[b]).scale(0.5).normalize().unwrap();
                        verts.push(m);
                        verts.len() - 1
                    });
                }
                next.push([f[0], mid[0], mid[2]]);
                next.push([f[1], mid[1], mid[0]]);
                next.push([f[2], mid[2], mid[1]]);
                next.push([mid[0], mid[1], mid[2]]);
            }
            faces = next;
        }
        let triangles = faces
            .iter()
            .map(|f| {
                let v = [
                    verts[f[0]].scale(radius),
                    verts[f[1]].scale(radius),
                    verts[f[2]].scale(radius),
                ];
                Self::make_triangle(v)
            })
            .collect();
        BoundaryMesh { triangles, radius }
    }

    fn make_triangle(v: [Vec3; 3]) -> Triangle {
        let centroid = v[0].add(&v[1]).add(&v[2]).scale(1.0 / 3.0);
        let cross = v[1].sub(&v[0]).cross(&v[2].sub(&v[0]));
        let area = 0.5 * cross.norm();
        let mut normal = cross.normalize().unwrap_or(Vec3::new(1.0, 0.0, 0.0));
        // orient outward (positive against the radial direction)
        if normal.dot(&centroid) < 0.0 {
            normal = normal.scale(-1.0);
        }
        Triangle {
            vertices: v,
            centroid,
            area,
            normal,
        }
    }

    pub fn total_area(&self) -> f64 {
        self.triangles.iter().map(|t| t.area).sum()
    }

    /// Typical centroid spacing, used as the accuracy horizon for
    /// near-boundary evaluation.
    pub fn resolution(&self) -> f64 {
        (self.total_area() / self.triangles.len() as f64).sqrt()
    }

    /// Distance of a point to the sphere surface.
    pub fn dist_to_boundary(&self, x: Vec3) -> f64 {
        (x.norm() - self.radius).abs()
    }

    /// Export as flat triangle soup: one line per triangle, nine floats.
    pub fn write_soup(&self, w: &mut impl std::io::Write) -> Result<()> {
        for t in &self.triangles {
            let v = &t.vertices;
            writeln!(
                w,
                "{} {} {} {} {} {} {} {} {}",
                v[0].0[0],
                v[0].0[1],
                v[0].0[2],
                v[1].0[0],
                v[1].0[1],
                v[1].0[2],
                v[2].0[0],
                v[2].0[1],
                v[2].0[2]
            )?;
        }
        Ok(())
    }

    /// Import triangle soup written by [`BoundaryMesh::write_soup`].
    pub fn read_soup(r: impl std::io::BufRead) -> Result<Self> {
        let mut triangles = Vec::new();
        let mut max_r: f64 = 0.0;
        for line in r.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|s| s.parse::<f64>().map_err(|e| Error::Parse(e.to_string())))
                .collect::<Result<_>>()?;
            if vals.len() != 9 {
                return Err(Error::Parse(format!(
                    "expected 9 floats per line, got {}",
                    vals.len()
                )));
            }
            let v = [
                Vec3::new(vals[0], vals[1], vals[2]),
                Vec3::new(vals[3], vals[4], vals[5]),
                Vec3::new(vals[6], vals[7], vals[8]),
            ];
            for vert in &v {
                max_r = max_r.max(vert.norm());
            }
            triangles.push(Self::make_triangle(v));
        }
        Ok(BoundaryMesh {
            triangles,
            radius: max_r,
        })
    }
}

/// Boundary operator variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FVariant {
    /// `F` with kernel `bar(y-x)`: produces left-monogenic fields (`D F = 0`).
    F,
    /// `Fbar` with kernel `(y-x)` and conjugated normal (`Dbar Fbar = 0`).
    Fbar,
}

/// Cauchy boundary integral at an off-boundary point:
/// `(F g)(x) = (1/omega) sum_T bar(y_c - x)/|y_c - x|^3 * alpha * g * area`.
pub fn cauchy_boundary(
    g: &[CQuat],
    x: Vec3,
    mesh: &BoundaryMesh,
    variant: FVariant,
) -> Result<CQuat> {
    let res = mesh.resolution();
    let dist = mesh.dist_to_boundary(x);
    if dist < res {
        return Err(Error::TooCloseToBoundary { dist, res });
    }
    Ok(cauchy_boundary_unchecked(g, x, mesh, variant))
}

fn cauchy_boundary_unchecked(g: &[CQuat], x: Vec3, mesh: &BoundaryMesh, variant: FVariant) -> CQuat {
    assert_eq!(g.len(), mesh.triangles.len());
    let mut acc = CQuat::ZERO;
    for (t, gv) in mesh.triangles.iter().zip(g) {
        let d = t.centroid.sub(&x);
        let r = d.norm();
        let kern = match variant {
            FVariant::F => embed(d).bar().mul(&embed(t.normal)),
            FVariant::Fbar => embed(d).mul(&embed(t.normal).bar()),
        };
        acc = acc.add(&kern.mul(gv).scale(t.area / (OMEGA * r.powi(3))));
    }
    acc
}

/// Singular boundary operator `S` (the Plemelj trace companion of `F`):
/// same quadrature as [`cauchy_boundary`] with factor `1/(2 pi)` and the
/// self-triangle omitted as a principal-value surrogate.
///
/// With this normalization the projector `P = (I + S)/2` and the identity
/// `S 1 = 1` hold; the scalar identity `1 + Sc(. 1) = 1/2` holds for the
/// principal-value Cauchy integral [`principal_value_cauchy`] = `-S/2`.
pub fn singular_boundary(g: &[CQuat], mesh: &BoundaryMesh) -> Vec<CQuat> {
    assert_eq!(g.len(), mesh.triangles.len());
    let two_pi = 2.0 * std::f64::consts::PI;
    mesh.triangles
        .par_iter()
        .enumerate()
        .map(|(i, ti)| {
            let x = ti.centroid;
            let mut acc = CQuat::ZERO;
            for (j, t) in mesh.triangles.iter().enumerate() {
                if i == j {
                    continue;
                }
                let d = t.centroid.sub(&x);
                let r = d.norm();
                let kern = embed(d).bar().mul(&embed(t.normal));
                acc = acc.add(&kern.mul(&g[j]).scale(t.area / (two_pi * r.powi(3))));
            }
            acc
        })
        .collect()
}

/// Principal value of the Cauchy integral itself (kernel `E`, factor
/// `1/omega`, self-triangle omitted); equals `-S/2`. The scalar identity
/// `1 + Sc((. )1) = 1/2` from the classical operator calculus holds for this
/// operator.
pub fn principal_value_cauchy(g: &[CQuat], mesh: &BoundaryMesh) -> Vec<CQuat> {
    singular_boundary(g, mesh)
        .into_iter()
        .map(|q| q.scale(-0.5))
        .collect()
}

/// Plemelj projector `P = (I + S)/2` applied to boundary data.
pub fn plemelj_projector(g: &[CQuat], mesh: &BoundaryMesh) -> Vec<CQuat> {
    singular_boundary(g, mesh)
        .iter()
        .zip(g)
        .map(|(sg, gv)| sg.add(gv).scale(0.5))
        .collect()
}

/// Interpolate a grid field to the mesh centroids (the trace surrogate).
pub fn trace_to_mesh(f: &QField, mesh: &BoundaryMesh) -> Vec<CQuat> {
    mesh.triangles.iter().map(|t| f.interp(t.centroid)).collect()
}

/// Relative L2 residual of `F(tr f) + T(Df * 1_Omega) - f` over interior
/// test points (grid nodes with `|x| <= frac * radius`).
///
/// `Df` is taken by centered finite differences: the Borel-Pompeiu identity
/// only sees `f` on the closure of Omega, and local differencing keeps
/// non-periodic test fields (like `f = x0`) honest.
pub fn borel_pompeiu_residual(
    f: &QField,
    mesh: &BoundaryMesh,
    kernel: &CauchyKernel,
) -> f64 {
    let g = f.grid;
    let trace = trace_to_mesh(f, mesh);

    // centered finite differences, restricted to Omega
    let mut df = QField::zeros(g);
    for i in 1..g.n - 1 {
        for j in 1..g.n - 1 {
            for k in 1..g.n - 1 {
                if g.node(i, j, k).norm() > mesh.radius {
                    continue;
                }
                let d0 = f.values[g.idx(i + 1, j, k)]
                    .sub(&f.values[g.idx(i - 1, j, k)])
                    .scale(1.0 / (2.0 * g.h));
                let d1 = f.values[g.idx(i, j + 1, k)]
                    .sub(&f.values[g.idx(i, j - 1, k)])
                    .scale(1.0 / (2.0 * g.h));
                let d2 = f.values[g.idx(i, j, k + 1)]
                    .sub(&f.values[g.idx(i, j, k - 1)])
                    .scale(1.0 / (2.0 * g.h));
                df.values[g.idx(i, j, k)] = d0
                    .add(&CQuat::unit(1).mul(&d1))
                    .add(&CQuat::unit(2).mul(&d2));
            }
        }
    }
    let tdf = teodorescu(&df, TVariant::T, kernel);

    let interior: Vec<(usize, Vec3)> = g
        .nodes()
        .filter(|(_, x)| x.norm() <= 0.6 * mesh.radius)
        .collect();
    let terms: Vec<(f64, f64)> = interior
        .par_iter()
        .map(|(idx, x)| {
            let fb = cauchy_boundary_unchecked(&trace, *x, mesh, FVariant::F);
            let lhs = fb.add(&tdf.values[*idx]);
            let err = lhs.sub(&f.values[*idx]).norm_sqr();
            (err, f.values[*idx].norm_sqr())
        })
        .collect();
    let num: f64 = terms.iter().map(|t| t.0).sum();
    let den: f64 = terms.iter().map(|t| t.1).sum();
    (num / den.max(1e-300)).sqrt()
}
