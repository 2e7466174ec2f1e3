//! Numerical toolkit for the quaternionic treatment of the 3-D
//! complex-conductivity inverse boundary value problem.
//!
//! The pipeline factors the conductivity equation through a Dirac system
//! over the complex quaternions: a conductivity `gamma` determines
//! potentials `(q1, q2)`; exponentially growing solutions at a spectral
//! parameter `k` determine scattering data `h(xi)`; and averaging `h` over
//! large annuli in `k` recovers the Fourier coefficients of `q2`, hence
//! `gamma`. The modules follow that order:
//!
//! * [`quat`] — the algebra `C (x) H`, conjugations, paravector embedding;
//! * [`grid`], [`spectral`] — fields, phantoms, FFTs, symbol operators;
//! * [`calculus`] — Teodorescu transform, boundary integrals, Borel-Pompeiu;
//! * [`cgo`] — null spectral parameters and growing exponentials;
//! * [`dirac`] — the potentials and the Neumann-series solver;
//! * [`scatter`] — volume and boundary scattering forms;
//! * [`recon`] — annulus averaging, `q2` inversion, conductivity recovery;
//! * [`consistency`] — the conductivity/Dirac transformation identity;
//! * [`verify`], [`config`], [`io`] — property suites, run configs, dumps.
//!
//! # Quickstart
//!
//! Recover the Fourier coefficient of the second Dirac potential at one
//! frequency from scattering data at a single large `|k|`:
//!
//! ```
//! use calderon3d::dirac::{potentials_from_gamma, solve_mu};
//! use calderon3d::grid::{dft_at, sample_phantom, Grid3, Phantom};
//! use calderon3d::quat::Vec3;
//! use calderon3d::recon::qhat_single;
//! use calderon3d::scatter::h_volume;
//!
//! let g = Grid3::default_box(16);
//! let gamma = sample_phantom(&Phantom::default_smooth(), g).unwrap();
//! let pots = potentials_from_gamma(&gamma).unwrap();
//!
//! let xi = Vec3::new(g.xi_step(), 0.0, 0.0);
//! let k = Vec3::new(0.0, 0.0, 64.0);
//! let mu = solve_mu(&pots, k, 1e-8, 50).unwrap();
//! let h = h_volume(xi, &mu, &pots);
//!
//! // single-parameter inversion: qhat2(xi) = (i xi)^{-1} h + O(mu1 - 1)
//! let qhat = qhat_single(xi, h).unwrap();
//! let truth = dft_at(&pots.q2, xi);
//! assert!(qhat.sub(&truth).norm() / truth.norm() < 0.05);
//! ```

pub mod calculus;
pub mod cgo;
pub mod consistency;
pub mod dirac;
pub mod error;
pub mod config;
pub mod grid;
pub mod io;
pub mod quat;
pub mod recon;
pub mod scatter;
pub mod verify;
pub mod spectral;

pub use error::{Error, Result};
