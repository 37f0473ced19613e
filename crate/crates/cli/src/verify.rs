//! The verify meta-pipeline: exact identities on seeded samples plus a
//! monotonicity sweep over a fixed corpus of specs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use hemicirc::ergohollow::{hollow_trajectory, TrajectoryReport};
use hemicirc::factorize::{mass_sweep, term_blocks, MassSweep};
use hemicirc::hemicirc::{psi_dense, theta_dense};
use hemicirc::powers::{blowup, delta_identity_holds};
use hemicirc::seqspec::{ExponentSchedule, SequenceSpec};
use hemicirc::{Dense, FiniteAbelianGroup, Hemi, HemicirculantMatrix, QPoly, Rational};

use crate::{default_family, pair_trajectories, subring_stats, CliError, RunConfig, DEFAULT_FAMILY_SIZE};

/// Horizon cap for the corpus sweep; keeps verify at desk scale.
pub const SWEEP_HORIZON: usize = 10;
pub const MASS_DEPTH: usize = 8;
pub const IDENTITY_SAMPLES: usize = 20;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryLine {
    pub spec: String,
    pub label: String,
    pub samples: usize,
    pub non_increasing: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MassLine {
    pub spec: String,
    pub l: usize,
    pub s_l: f64,
    pub non_increasing: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub trajectories: Vec<TrajectoryLine>,
    pub mass: Vec<MassLine>,
    pub all_pass: bool,
}

/// Every trajectory and mass estimate the sweep produced.
#[derive(Clone, Debug, Default)]
pub struct Sweep {
    pub trajectories: Vec<(String, TrajectoryReport)>,
    pub mass: Vec<(String, MassSweep)>,
}

pub fn corpus() -> Vec<(String, SequenceSpec)> {
    let tri = ExponentSchedule::recurrence(vec![1, 1, 1], vec![1, 1, 1]).expect("valid recurrence");
    vec![
        ("dyadic-Z2".into(), SequenceSpec::circulant_half(2, ExponentSchedule::geometric(2))),
        ("dyadic-Z3".into(), SequenceSpec::circulant_half(3, ExponentSchedule::geometric(2))),
        ("ternary-Z3".into(), SequenceSpec::circulant_half(3, ExponentSchedule::geometric(3))),
        ("fibonacci-Z2".into(), SequenceSpec::circulant_half(2, ExponentSchedule::fibonacci())),
        ("tribonacci-Z2".into(), SequenceSpec::circulant_half(2, tri)),
        ("dyadic-Z4".into(), SequenceSpec::circulant_half(4, ExponentSchedule::geometric(2))),
    ]
}

/// Trajectories (hollow and pair) and mass sweeps for every spec.
pub fn monotonicity_sweep(specs: &[(String, SequenceSpec)], horizon: usize) -> hemicirc::Result<Sweep> {
    let mut sweep = Sweep::default();
    let family = default_family(DEFAULT_FAMILY_SIZE);
    let ls = [0usize, 1, 2];
    for (name, spec) in specs {
        let n = spec.group().n();
        for a in 1..n {
            sweep.trajectories.push((name.clone(), hollow_trajectory(spec, a, 0, horizon)?));
        }
        for t in pair_trajectories(spec, horizon)? {
            sweep.trajectories.push((name.clone(), t));
        }
        let d = horizon.min(MASS_DEPTH);
        let blocks = term_blocks(spec, d + ls.len())?;
        sweep.mass.push((name.clone(), mass_sweep(&family, &blocks, &ls, d)?));
    }
    Ok(sweep)
}

fn random_hemi(rng: &mut ChaCha8Rng, group: &FiniteAbelianGroup) -> HemicirculantMatrix {
    let coeffs = (0..group.n())
        .map(|_| {
            QPoly::from_terms((0..rng.gen_range(0..3)).map(|_| {
                (rng.gen_range(-4i64..=4).into(), Rational::new(rng.gen_range(-5..=5), rng.gen_range(1..=4)))
            }))
        })
        .collect();
    Hemi::new(group.clone(), coeffs).expect("one coefficient per element")
}

fn random_nonneg(rng: &mut ChaCha8Rng) -> QPoly {
    QPoly::from_terms((0..rng.gen_range(1..4)).map(|_| (rng.gen_range(-5i64..=5).into(), Rational::new(rng.gen_range(1..=5), 3))))
}

fn check(name: &str, pass: bool, detail: String) -> Check {
    Check { name: name.into(), pass, detail }
}

fn identity_checks(seed: u64, samples: usize) -> hemicirc::Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let dz3 = SequenceSpec::circulant_half(3, ExponentSchedule::geometric(2));
    let g3 = pair_trajectories(&dz3, 0)?;
    let close = g3.iter().all(|t| (t.samples[0].value - 0.75).abs() < 1e-12 && t.samples[0].err < 1e-12);
    out.push(check("pair norm of (I+xP)/2 over Z3 is 3/4", close, format!("{} pairs, within 1e-12", g3.len())));

    let mut ok = true;
    for orders in [&[2u64, 2][..], &[3], &[4]] {
        let g = FiniteAbelianGroup::new(orders)?;
        for _ in 0..IDENTITY_SAMPLES {
            let m = random_hemi(&mut rng, &g);
            let back = Hemi::fourier_inverse(&m.to_cyclo().eigenvalues()?, &g)?;
            ok &= back == m.to_cyclo();
        }
    }
    out.push(check("fourier_inverse after eigenvalues is the identity", ok, "Z2xZ2, Z3, Z4; exact".into()));

    let mut ok = true;
    for orders in [&[2u64][..], &[2, 2]] {
        let g = FiniteAbelianGroup::new(orders)?;
        let theta = theta_dense::<Rational>(&g);
        let psi = psi_dense::<Rational>(&g);
        ok &= theta.mul(&psi)? == Dense::identity(g.n());
        for _ in 0..IDENTITY_SAMPLES {
            let m = random_hemi(&mut rng, &g);
            let n = random_hemi(&mut rng, &g);
            ok &= theta.mul(&m.tensor(&n).to_dense())? == m.mul(&n)?.to_dense().mul(&theta)?;
        }
    }
    out.push(check("theta(M x N) = (MN) theta and theta psi = id", ok, "Z2, Z2xZ2".into()));

    let ok = (2..=6).map(delta_identity_holds).collect::<hemicirc::Result<Vec<_>>>()?.into_iter().all(|b| b);
    out.push(check("Delta Q Delta^-1 = xP", ok, "n = 2..6".into()));

    let mut ok = true;
    for _ in 0..IDENTITY_SAMPLES {
        let (p, q) = (random_nonneg(&mut rng), random_nonneg(&mut rng));
        let n = rng.gen_range(1..=5);
        ok &= blowup(&p.mul(&q), n)? == blowup(&p, n)?.mul(&blowup(&q, n)?)?;
    }
    out.push(check("blowup is multiplicative", ok, format!("{IDENTITY_SAMPLES} random pairs")));

    let s = subring_stats(samples, seed)?;
    out.push(check(
        "subring bounds",
        s.total_violations() == 0,
        format!("{} samples, {} violations", samples, s.total_violations()),
    ));
    Ok(out)
}

pub fn verify_suite(spec: Option<&SequenceSpec>, cfg: &RunConfig) -> Result<VerifyReport, CliError> {
    let mut checks = identity_checks(cfg.seed, cfg.samples)?;
    let mut specs = corpus();
    if let Some(s) = spec {
        if s.group().n() > 1 {
            specs.push((s.label().unwrap_or("input").to_string(), s.clone()));
        }
    }
    let sweep = monotonicity_sweep(&specs, cfg.horizon.min(SWEEP_HORIZON))?;
    let trajectories: Vec<TrajectoryLine> = sweep
        .trajectories
        .iter()
        .map(|(s, t)| TrajectoryLine {
            spec: s.clone(),
            label: t.label.clone(),
            samples: t.samples.len(),
            non_increasing: t.non_increasing,
        })
        .collect();
    let mut mass = Vec::new();
    let mut records = true;
    for (s, m) in &sweep.mass {
        records &= m.record_non_decreasing();
        mass.extend(m.estimates.iter().map(|e| MassLine {
            spec: s.clone(),
            l: e.l,
            s_l: e.s_l,
            non_increasing: e.non_increasing,
        }));
    }
    checks.push(check(
        "trajectories non-increasing in d",
        trajectories.iter().all(|t| t.non_increasing),
        format!("{} trajectories", trajectories.len()),
    ));
    checks.push(check(
        "mass estimates non-increasing in d, records non-decreasing in l",
        records && mass.iter().all(|m| m.non_increasing),
        format!("{} estimates", mass.len()),
    ));
    let all_pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport { checks, trajectories, mass, all_pass })
}
