//! Verification suites: fast, seeded property checks per module, with
//! machine-readable verdicts. These are the runtime counterpart of the unit
//! tests, sized so that the full battery completes in minutes.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calculus::{
    borel_pompeiu_residual, principal_value_cauchy, right_inverse_residual, singular_boundary,
    BoundaryMesh, CauchyKernel,
};
use crate::cgo::{exp_growing, make_zeta, modulation};
use crate::config::RunConfig;
use crate::consistency::{conductivity_residual, dirac_residual, phi_from_u, Deriv};
use crate::dirac::{operator_norm_probe, potentials_from_gamma, solve_mu};
use crate::error::{Error, Result};
use crate::grid::{sample_phantom, Grid3, Phantom, QField};
use crate::quat::{
    embed_i, matrix_distance, matrix_mul, matrix_rep, CQuat, Vec3,
};
use crate::recon::{
    annulus_measure, gamma_from_q2, qhat_annulus, qhat_single, AnnulusRule, QhatTable,
};
use crate::scatter::{admissibility, admissible_partners, forward, SolverSettings};
use crate::spectral::{apply_d, laplacian, DVariant};

/// One property verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verdict {
    pub suite: String,
    pub property: String,
    pub passed: bool,
    /// Measured value and threshold, human-readable.
    pub detail: String,
}

/// Aggregated verification report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub verdicts: Vec<Verdict>,
    pub passed: bool,
}

struct Recorder {
    suite: String,
    verdicts: Vec<Verdict>,
}

impl Recorder {
    fn new(suite: &str) -> Self {
        Recorder {
            suite: suite.into(),
            verdicts: Vec::new(),
        }
    }

    fn check(&mut self, property: &str, passed: bool, detail: String) {
        self.verdicts.push(Verdict {
            suite: self.suite.clone(),
            property: property.into(),
            passed,
            detail,
        });
    }

    fn le(&mut self, property: &str, value: f64, threshold: f64) {
        self.check(
            property,
            value <= threshold,
            format!("{value:.3e} <= {threshold:.1e}"),
        );
    }
}

fn random_cquat(rng: &mut impl Rng) -> CQuat {
    CQuat(std::array::from_fn(|_| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    }))
}

fn suite_algebra(seed: u64) -> Vec<Verdict> {
    let mut r = Recorder::new("algebra");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_mul: f64 = 0.0;
    let mut worst_bar: f64 = 0.0;
    let mut worst_inv: f64 = 0.0;
    let mut worst_norm: f64 = 0.0;
    for _ in 0..10_000 {
        let a = random_cquat(&mut rng);
        let b = random_cquat(&mut rng);
        let scale = (a.norm() * b.norm()).max(1.0);
        // product against the matrix oracle
        let d = matrix_distance(
            &matrix_rep(&a.mul(&b)),
            &matrix_mul(&matrix_rep(&a), &matrix_rep(&b)),
        );
        worst_mul = worst_mul.max(d / scale);
        // anti-automorphism bar(ab) = bar(b) bar(a)
        let d = a.mul(&b).bar().sub(&b.bar().mul(&a.bar())).norm();
        worst_bar = worst_bar.max(d / scale);
        // norm submultiplicativity with the sharp constant sqrt(2)
        let d = a.mul(&b).norm() - 2f64.sqrt() * a.norm() * b.norm();
        worst_norm = worst_norm.max(d / scale);
        // inverse when the quadratic form is bounded away from zero
        if a.quadratic_form().norm() > 0.1 {
            if let Ok(inv) = a.inverse() {
                let d = a.mul(&inv).sub(&CQuat::ONE).norm();
                worst_inv = worst_inv.max(d);
            }
        }
    }
    r.le("product matches matrix representation", worst_mul, 1e-14);
    r.le("bar is an anti-automorphism", worst_bar, 1e-14);
    r.le("norm submultiplicative with sqrt(2)", worst_norm, 1e-14);
    r.le("two-sided inverse", worst_inv, 1e-12);
    // multiplication table
    let e1 = CQuat::unit(1);
    let e2 = CQuat::unit(2);
    let e3 = CQuat::unit(3);
    let table_ok = e1.mul(&e2).sub(&e3).norm() == 0.0
        && e1.mul(&e1).add(&CQuat::ONE).norm() == 0.0
        && e2.mul(&e2).add(&CQuat::ONE).norm() == 0.0
        && e3.mul(&e3).add(&CQuat::ONE).norm() == 0.0;
    r.check("multiplication table", table_ok, "e1e2=e3, ea^2=-1".into());
    r.verdicts
}

fn suite_calculus(_seed: u64) -> Vec<Verdict> {
    let mut r = Recorder::new("calculus");
    let bump = |g: Grid3| {
        QField::from_fn(g, |x| {
            let r2 = x.dot(&x);
            if r2 < 1.0 {
                CQuat::new(
                    Complex64::new((1.0 - 1.0 / (1.0 - r2)).exp(), 0.0),
                    Complex64::new(0.4 * (1.0 - 1.0 / (1.0 - r2)).exp(), 0.0),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(0.0, 0.0),
                )
            } else {
                CQuat::ZERO
            }
        })
    };
    let mut res = Vec::new();
    for n in [16usize, 24] {
        let g = Grid3::default_box(n);
        let kernel = CauchyKernel::new(g);
        res.push(right_inverse_residual(
            &bump(g),
            crate::spectral::TVariant::T,
            &kernel,
        ));
    }
    r.le("right inverse D(Tf)=f at n=24", res[1], 8e-2);
    r.check(
        "right inverse refines",
        res[1] < res[0],
        format!("{:.3e} -> {:.3e}", res[0], res[1]),
    );
    let g = Grid3::default_box(16);
    let kernel = CauchyKernel::new(g);
    let mesh = BoundaryMesh::icosphere(3, 1.0);
    let bp = borel_pompeiu_residual(
        &QField::from_fn(g, |x| CQuat::new(Complex64::new(x.0[0], 0.0), 0.0.into(), 0.0.into(), 0.0.into())),
        &mesh,
        &kernel,
    );
    r.le("Borel-Pompeiu residual (level 3, n=16)", bp, 0.10);
    let ones = vec![CQuat::ONE; mesh.triangles.len()];
    let s1 = singular_boundary(&ones, &mesh);
    let worst = s1
        .iter()
        .map(|q| q.sub(&CQuat::ONE).sc().norm())
        .fold(0.0, f64::max);
    r.le("Plemelj singular operator S1 = 1 (scalar)", worst, 0.15);
    let pv = principal_value_cauchy(&ones, &mesh);
    let worst = pv
        .iter()
        .map(|q| (q.sc() + Complex64::new(0.5, 0.0)).norm())
        .fold(0.0, f64::max);
    r.le("principal value Sc(C1) = -1/2", worst, 0.08);
    r.verdicts
}

fn suite_cgo(seed: u64) -> Vec<Verdict> {
    let mut r = Recorder::new("cgo");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc60);
    let mut worst_null: f64 = 0.0;
    let mut worst_zd: f64 = 0.0;
    for _ in 0..1000 {
        let k = Vec3::new(
            rng.gen_range(-40.0..40.0),
            rng.gen_range(-40.0..40.0),
            rng.gen_range(-40.0..40.0),
        );
        if k.norm() < 1.0 {
            continue;
        }
        let zp = make_zeta(k, None).unwrap();
        worst_null = worst_null.max(zp.null_defect().norm() / k.norm().powi(2));
        worst_zd = worst_zd.max(zp.zero_divisor_defect() / k.norm().powi(2));
    }
    r.le("zeta . zeta = 0", worst_null, 1e-14);
    r.le("zeta zetabar = 0 (zero divisor)", worst_zd, 1e-14);
    // finite-difference monogenicity of the growing exponential
    let mut worst_mono: f64 = 0.0;
    for _ in 0..50 {
        let k = Vec3::new(
            rng.gen_range(-8.0..8.0),
            rng.gen_range(-8.0..8.0),
            rng.gen_range(-8.0..8.0),
        );
        if k.norm() < 1.0 {
            continue;
        }
        let zp = make_zeta(k, None).unwrap();
        let x = Vec3::new(
            rng.gen_range(-0.5..0.5),
            rng.gen_range(-0.5..0.5),
            rng.gen_range(-0.5..0.5),
        );
        let h = 1e-5;
        let mut dq = CQuat::ZERO;
        for a in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp.0[a] += h;
            xm.0[a] -= h;
            let diff = exp_growing(xp, &zp).sub(&exp_growing(xm, &zp)).scale(1.0 / (2.0 * h));
            dq = dq.add(&if a == 0 { diff } else { CQuat::unit(a).mul(&diff) });
        }
        worst_mono = worst_mono.max(dq.norm() / exp_growing(x, &zp).norm().max(1e-30) / k.norm().max(1.0));
    }
    r.le("E(x, zeta) is monogenic (finite differences)", worst_mono, 1e-4);
    // modulation identities
    let x = Vec3::new(0.3, -0.2, 0.7);
    let k = Vec3::new(1.0, 2.0, -0.5);
    let m = modulation(x, k, 1) * modulation(x, k, -1);
    r.le(
        "modulation inverse pair",
        (m - Complex64::new(1.0, 0.0)).norm(),
        1e-14,
    );
    r.verdicts
}

fn suite_dirac(cfg: &RunConfig) -> Vec<Verdict> {
    let mut r = Recorder::new("dirac");
    let g = Grid3::default_box(cfg.grid.n.min(24));
    let gamma = match sample_phantom(&cfg.phantom, g) {
        Ok(f) => f,
        Err(e) => {
            r.check("phantom sampling", false, format!("{e}"));
            return r.verdicts;
        }
    };
    let pots = match potentials_from_gamma(&gamma) {
        Ok(p) => p,
        Err(e) => {
            r.check("potential construction", false, format!("{e}"));
            return r.verdicts;
        }
    };
    r.le("scalar-gamma conjugacy q1 = bar(q2)", pots.conjugacy_defect(), 1e-10);
    let k = Vec3::new(0.0, 0.0, 32.0);
    match solve_mu(&pots, k, cfg.solver.tol, cfg.solver.max_iter) {
        Ok(mu) => {
            let final_res = *mu.residuals.last().unwrap_or(&f64::NAN);
            r.le("Neumann solve converges at |k| = 32", final_res, cfg.solver.tol);
            let shell = mu.nu2.padding_linf();
            let interior = mu.nu2.linf_norm();
            r.le(
                "nu2 decays toward the box faces",
                shell / interior.max(1e-300),
                0.2,
            );
        }
        Err(e) => r.check("Neumann solve at |k| = 32", false, format!("{e}")),
    }
    let norms: Vec<f64> = [16.0, 64.0]
        .iter()
        .map(|t| operator_norm_probe(&pots, Vec3::new(0.0, 0.0, *t), 3, 4, cfg.seed))
        .collect();
    r.check(
        "operator norm decreases in |k|",
        norms[1] < norms[0],
        format!("{:.3e} -> {:.3e}", norms[0], norms[1]),
    );
    r.verdicts
}

fn suite_scatter(cfg: &RunConfig) -> Vec<Verdict> {
    let mut r = Recorder::new("scatter");
    let xi = Vec3::new(2.0, 0.0, 0.0);
    match admissible_partners(xi, 24.0, 4) {
        Ok(ks) => {
            let worst = ks
                .iter()
                .map(|&k| admissibility(xi, k).map(|a| a.defect).unwrap_or(f64::INFINITY) / xi.dot(&xi))
                .fold(0.0, f64::max);
            r.le("partner family is admissible", worst, 1e-10);
        }
        Err(e) => r.check("partner family", false, format!("{e}")),
    }
    // trivial phantom gives a zero table
    let g = Grid3::default_box(cfg.grid.n.min(16));
    let gamma = sample_phantom(&Phantom::trivial(), g).unwrap();
    let xis = vec![Vec3::new(g.xi_step(), 0.0, 0.0)];
    let ks = vec![Vec3::new(0.0, 0.0, 24.0)];
    match forward(&gamma, "trivial", &xis, &ks, &SolverSettings::default()) {
        Ok(table) => {
            let worst = table
                .entries
                .iter()
                .map(|e| {
                    e.h.iter().map(|c| c.norm()).sum::<f64>()
                })
                .fold(0.0, f64::max);
            r.le("trivial phantom scatters to zero", worst, 1e-12);
        }
        Err(e) => r.check("trivial forward", false, format!("{e}")),
    }
    r.verdicts
}

fn suite_recon(cfg: &RunConfig) -> Vec<Verdict> {
    let mut r = Recorder::new("recon");
    let rule = match AnnulusRule::new(cfg.recon.r, cfg.recon.n_radial, cfg.recon.n_angular) {
        Ok(rule) => rule,
        Err(e) => {
            r.check("annulus rule", false, format!("{e}"));
            return r.verdicts;
        }
    };
    let total: f64 = rule
        .nodes()
        .iter()
        .map(|(k, w)| w / k.norm().powi(3))
        .sum();
    let exact = annulus_measure();
    r.le(
        "annulus rule integrates |k|^-3 to 4 pi ln 2",
        (total - exact).abs() / exact,
        0.01,
    );
    let xi = Vec3::new(1.0, -2.0, 0.3);
    let rec = qhat_annulus(xi, &rule, |_| Ok(embed_i(xi))).unwrap();
    r.le(
        "synthetic h = i xi reconstructs 1",
        rec.sub(&CQuat::ONE).norm(),
        0.01,
    );
    let c = random_cquat(&mut ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xec0));
    let rec = qhat_single(xi, embed_i(xi).mul(&c)).unwrap();
    r.le("left inverse of i xi", rec.sub(&c).norm() / c.norm(), 1e-13);
    r.check(
        "xi = 0 rejected",
        matches!(qhat_single(Vec3::ZERO, c), Err(Error::DivisionByZero)),
        "DivisionByZero".into(),
    );
    // trivial table inverts to gamma = 1
    let g = Grid3::default_box(16);
    let kernel = CauchyKernel::new(g);
    let q2 = crate::recon::invert_q2(g, &QhatTable { entries: vec![] });
    match gamma_from_q2(&q2, &kernel) {
        Ok(gr) => {
            let dev = gr
                .gamma
                .sub(&QField::constant(g, CQuat::ONE))
                .linf_norm();
            r.le("trivial data recover unit conductivity", dev, 1e-6);
        }
        Err(e) => r.check("trivial recovery", false, format!("{e}")),
    }
    r.verdicts
}

fn suite_consistency(cfg: &RunConfig) -> Vec<Verdict> {
    let mut r = Recorder::new("consistency");
    let g = Grid3::default_box(cfg.grid.n.min(24));
    let s = g.xi_step();
    let u = QField::from_fn(g, |x| {
        CQuat::from_complex(Complex64::new((s * x.0[0]).sin() * (s * x.0[1]).cos(), 0.0))
    });
    let via_d = apply_d(&apply_d(&u, DVariant::Dbar), DVariant::D);
    r.le(
        "Laplacian = D Dbar (spectral)",
        via_d.rel_l2_error(&laplacian(&u)),
        1e-10,
    );
    let unit = QField::constant(g, CQuat::ONE);
    let unit_pots = potentials_from_gamma(&unit).unwrap();
    let harmonic = QField::from_fn(g, |x| {
        CQuat::from_complex(Complex64::new(x.0[0] * x.0[1], 0.0))
    });
    let phi = phi_from_u(&harmonic, &unit, Deriv::CenteredFd);
    let (r1, r2) = dirac_residual(&phi, &unit_pots, Deriv::CenteredFd);
    r.le("harmonic u solves the Dirac system (r1)", r1, 1e-8);
    r.le("harmonic u solves the Dirac system (r2)", r2, 1e-8);
    r.le(
        "harmonic u solves the conductivity equation",
        conductivity_residual(&harmonic, &unit, Deriv::CenteredFd),
        1e-8,
    );
    let non = QField::from_fn(g, |x| CQuat::from_complex(Complex64::new(x.0[0] * x.0[0], 0.0)));
    let phi = phi_from_u(&non, &unit, Deriv::CenteredFd);
    let (r1, _) = dirac_residual(&phi, &unit_pots, Deriv::CenteredFd);
    r.check(
        "non-solutions produce O(1) residuals",
        r1 > 0.05,
        format!("{r1:.3e} > 5e-2"),
    );
    r.verdicts
}

/// Run one named suite (or `all`) and aggregate the verdicts.
pub fn run_suites(names: &[String], cfg: &RunConfig) -> Result<VerifyReport> {
    const ALL: [&str; 7] = [
        "algebra",
        "calculus",
        "cgo",
        "dirac",
        "scatter",
        "recon",
        "consistency",
    ];
    let mut selected: Vec<String> = Vec::new();
    for name in names {
        if name == "all" {
            for s in ALL {
                if !selected.iter().any(|x| x == s) {
                    selected.push(s.to_string());
                }
            }
        } else if !selected.contains(name) {
            selected.push(name.clone());
        }
    }
    let mut verdicts = Vec::new();
    for suite in &selected {
        let vs = match suite.as_str() {
            "algebra" => suite_algebra(cfg.seed),
            "calculus" => suite_calculus(cfg.seed),
            "cgo" => suite_cgo(cfg.seed),
            "dirac" => suite_dirac(cfg),
            "scatter" => suite_scatter(cfg),
            "recon" => suite_recon(cfg),
            "consistency" => suite_consistency(cfg),
            other => return Err(Error::Config(format!("unknown suite '{other}'"))),
        };
        verdicts.extend(vs);
    }
    let passed = verdicts.iter().all(|v| v.passed);
    Ok(VerifyReport {
        seed: cfg.seed,
        verdicts,
        passed,
    })
}

/// Quick self-consistency helper used by the forward command: relative size
/// of the boundary form against the volume form on one admissible pair.
pub fn boundary_volume_ratio(
    gamma: &QField,
    xi: Vec3,
    k: Vec3,
    mesh_level: u32,
    settings: &SolverSettings,
) -> Result<f64> {
    let pots = potentials_from_gamma(gamma)?;
    let mu = solve_mu(&pots, k, settings.tol, settings.max_iter)?;
    let hv = crate::scatter::h_volume(xi, &mu, &pots);
    let mesh = BoundaryMesh::icosphere(mesh_level, 1.0);
    let hb = crate::scatter::h_boundary(xi, k, &mu, &mesh)?;
    Ok(hb.norm() / hv.norm().max(1e-300))
}
