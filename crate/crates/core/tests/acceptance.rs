//! Acceptance gate. Every check prints one PASS/FAIL line; any failure makes
//! the binary exit non-zero.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use sip_interp::oracle::{self, OracleConfig};
use sip_interp::regulariser::{
    mollify_radial, norm_monotonicity_probe, tangential_monotonicity_probe, Mollifier, Piecewise,
    Witness,
};
use sip_interp::sampling::{dense_unit_direction, log_uniform, unit_direction};
use sip_interp::solver::{solve_min_norm, verify_representer, DualObjective, SolverConfig};
use sip_interp::space::{
    duality_continuity_probe, james_orthogonality_check, modulus_of_smoothness_estimate,
    tangent_component,
};
use sip_interp::suite::{problem_suite, random_problem, SuiteSpec};
use sip_interp::{RadialProfile, Regulariser, RegulariserSpec, Space, Vector};

const P_LIST: [f64; 6] = [1.2, 1.5, 2.0, 3.0, 4.0, 7.0];
const DIMS: [usize; 5] = [1, 2, 3, 5, 10];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

fn random_space<R: Rng>(rng: &mut R, p: f64, dim: usize) -> Space {
    let w = (0..dim).map(|_| log_uniform(rng, 0.25, 4.0)).collect();
    Space::weighted(p, w).unwrap()
}

fn scaled<R: Rng>(rng: &mut R, space: &Space) -> Vector {
    let r = log_uniform(rng, 1e-2, 1e2);
    &unit_direction(rng, space) * r
}

fn sip_axioms() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut lin, mut hom, mut pos, mut cs) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    let triples = 10_000;
    for k in 0..triples {
        let p = P_LIST[k % P_LIST.len()];
        let dim = DIMS[(k / P_LIST.len()) % DIMS.len()];
        let s = random_space(&mut rng, p, dim);
        let (x, y, z) = (scaled(&mut rng, &s), scaled(&mut rng, &s), scaled(&mut rng, &s));
        let (a, b) = (gaussian(&mut rng), gaussian(&mut rng));
        let lambda = gaussian(&mut rng) * log_uniform(&mut rng, 1e-2, 1e2);
        let (nx, ny, nz) = (x.norm(), y.norm(), z.norm());

        let lhs = (&(&x * a) + &(&y * b)).sip(&z);
        lin = lin.max((lhs - a * x.sip(&z) - b * y.sip(&z)).abs() / ((a.abs() * nx + b.abs() * ny) * nz));
        hom = hom.max((x.sip(&(&y * lambda)) - lambda * x.sip(&y)).abs() / (lambda.abs() * nx * ny));
        let xx = x.sip(&x);
        let definite = if xx > 0.0 { (xx - nx * nx).abs() / (nx * nx) } else { 1.0 };
        pos = pos.max(definite);
        cs = cs.max(((x.sip(&y).abs() - nx * ny) / (nx * ny)).max(0.0));
    }
    let zero = Space::new(3, 3.0).unwrap().zero();
    let zero_ok = zero.sip(&zero) == 0.0;
    let elapsed = start.elapsed();
    let worst = lin.max(hom).max(pos).max(cs);
    outcome(
        worst <= 1e-9 && zero_ok && elapsed < Duration::from_secs(10),
        format!(
            "{triples} triples: linearity {lin:.1e}, homogeneity {hom:.1e}, positivity {pos:.1e}, \
             Cauchy-Schwarz {cs:.1e} (tol 1e-9), {:.2}s (limit 10s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn riesz_isometry() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut iso, mut trip) = (0.0_f64, 0.0_f64);
    for k in 0..1000 {
        let s = random_space(&mut rng, P_LIST[k % 6], DIMS[(k / 6) % 5]);
        let x = scaled(&mut rng, &s);
        let xs = x.duality_map();
        iso = iso.max((xs.dual_norm() - x.norm()).abs() / x.norm());
        let back = xs.inverse_duality_map();
        trip = trip.max((&back - &x).norm() / x.norm());
    }
    outcome(
        iso <= 1e-10 && trip <= 1e-10,
        format!("1000 vectors: isometry {iso:.1e}, round trip {trip:.1e} (tol 1e-10)"),
    )
}

fn norm_derivative() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0_f64;
    let h = 1e-5;
    for k in 0..1000 {
        let s = random_space(&mut rng, P_LIST[k % 6], DIMS[(k / 6) % 5]);
        // dense x keeps p < 2 away from the coordinate singularity
        let x = dense_unit_direction(&mut rng, &s);
        let y = unit_direction(&mut rng, &s);
        let fd = ((&x + &(&y * h)).norm() - (&x - &(&y * h)).norm()) / (2.0 * h);
        worst = worst.max((fd - y.sip(&x) / x.norm()).abs());
    }
    outcome(worst <= 1e-6, format!("1000 pairs: max |FD - [y,x]/‖x‖| = {worst:.1e} (tol 1e-6)"))
}

fn james_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut lam, mut drop, mut smallest_converse) = (0.0_f64, 0.0_f64, f64::INFINITY);
    let mut flagged = 0;
    for k in 0..1000 {
        let dim = DIMS[(k / 6) % 5].max(2);
        let s = random_space(&mut rng, P_LIST[k % 6], dim);
        let x = dense_unit_direction(&mut rng, &s);
        let g = unit_direction(&mut rng, &s);
        let t = tangent_component(&g, &x).unwrap();
        let t = &t * (1.0 / t.norm());
        let check = james_orthogonality_check(&t, &x).unwrap();
        lam = lam.max(check.lambda_star.abs());
        drop = drop.max(x.norm() - check.min_norm);
        flagged += usize::from(!check.is_orthogonal);

        // converse: tilt the tangent toward x by a definite amount
        let tilt = log_uniform(&mut rng, 0.05, 1.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let y = &t + &(&x * tilt);
        let c = james_orthogonality_check(&y, &x).unwrap();
        smallest_converse = smallest_converse.min(c.lambda_star.abs());
    }
    outcome(
        lam <= 1e-6 && drop <= 1e-8 && smallest_converse > 1e-4 && flagged == 0,
        format!(
            "1000 tangent pairs: max |λ*| {lam:.1e} (tol 1e-6), max norm drop {drop:.1e} (tol 1e-8), \
             {flagged} misclassified; 1000 tilted pairs: min |λ*| {smallest_converse:.2e} (> 1e-4)"
        ),
    )
}

fn dual_gradient() -> Outcome {
    let spec = SuiteSpec {
        count: 100,
        seed: 5,
        ..SuiteSpec::default()
    };
    let problems = problem_suite(&spec).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0_f64;
    for problem in &problems {
        let dual = DualObjective::new(problem);
        let c: Vec<f64> = (0..problem.len()).map(|_| gaussian(&mut rng)).collect();
        let g = dual.gradient(&c);
        let h = 1e-6;
        for i in 0..c.len() {
            let (mut up, mut dn) = (c.clone(), c.clone());
            up[i] += h;
            dn[i] -= h;
            let fd = (dual.value(&up) - dual.value(&dn)) / (2.0 * h);
            worst = worst.max((fd - g[i]).abs());
        }
    }
    outcome(
        worst <= 1e-6,
        format!("100 (problem, c) pairs: max |FD φ - residual| = {worst:.1e} (tol 1e-6)"),
    )
}

fn solver_vs_oracle() -> Outcome {
    let start = Instant::now();
    let problems = problem_suite(&SuiteSpec::default()).unwrap();
    let reg = Regulariser::power(1.0).unwrap();
    let (mut dist, mut gap, mut dev, mut feas) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for problem in &problems {
        let sol = solve_min_norm(problem, &SolverConfig::default()).unwrap();
        let direct = oracle::solve_constrained_direct(problem, &reg, &OracleConfig::default()).unwrap();
        dist = dist.max((&direct - &sol.f).norm() / (1.0 + sol.f.norm()));
        gap = gap.max(sol.peaking_gap);
        dev = dev.max(verify_representer(&sol, problem));
        feas = feas.max(problem.constraint_residual(&direct));
    }
    let elapsed = start.elapsed();
    outcome(
        dist <= 1e-4 && gap <= 1e-8 && dev <= 1e-8 && feas <= 1e-6 && elapsed < Duration::from_secs(60),
        format!(
            "50 problems: distance {dist:.1e} (tol 1e-4), peaking gap {gap:.1e} (tol 1e-8), \
             representer {dev:.1e} (tol 1e-8), oracle residual {feas:.1e}, {:.1}s (limit 60s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn increasing_piecewise() -> Regulariser {
    Regulariser::Radial(RadialProfile::Piecewise(
        Piecewise::new(
            vec![0.05, 20.0],
            vec![0.0, 0.2, 25.0],
            vec![0.15, 21.0],
            Some(vec![2.0, 1.0, 1.0]),
        )
        .unwrap(),
    ))
}

fn regulariser_independence() -> Outcome {
    let spec = SuiteSpec {
        count: 20,
        max_dim: 4,
        seed: 7,
        ..SuiteSpec::default()
    };
    let problems = problem_suite(&spec).unwrap();
    let regs = [
        Regulariser::power(0.5).unwrap(),
        Regulariser::power(1.0).unwrap(),
        Regulariser::power(2.0).unwrap(),
        increasing_piecewise(),
    ];
    let mut worst = 0.0_f64;
    for problem in &problems {
        let sols: Vec<Vector> = regs
            .iter()
            .map(|r| oracle::solve_constrained_direct(problem, r, &OracleConfig::default()).unwrap())
            .collect();
        for i in 0..sols.len() {
            for j in 0..i {
                let scale = 1.0 + sols[i].norm().max(sols[j].norm());
                worst = worst.max((&sols[i] - &sols[j]).norm() / scale);
            }
        }
    }
    outcome(
        worst <= 1e-4,
        format!("20 problems x 4 regularisers: max pairwise distance {worst:.1e} (tol 1e-4)"),
    )
}

fn hilbert_reduction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let dim = rng.random_range(1..=8);
        let m = rng.random_range(1..=dim.min(4));
        let problem = random_problem(&mut rng, dim, m, 2.0, true).unwrap();
        let sol = solve_min_norm(&problem, &SolverConfig::default()).unwrap();
        // min Σ w f² s.t. Σ w x_i f = y: f = X_wᵀ (X_w W⁻¹ X_wᵀ)⁻¹ y / w
        let w = problem.space().weights();
        let b = DMatrix::from_fn(m, dim, |i, j| problem.points()[i].coords()[j] * w[j].sqrt());
        let normal = &b * b.transpose();
        let lam = normal.cholesky().unwrap().solve(&DVector::from_column_slice(problem.targets()));
        let g = b.transpose() * lam;
        let expect: Vec<f64> = (0..dim).map(|j| g[j] / w[j].sqrt()).collect();
        let diff: f64 = sol.f.coords().iter().zip(&expect).map(|(a, b)| (a - b).powi(2)).sum();
        let size: f64 = expect.iter().map(|v| v * v).sum();
        worst = worst.max((diff / size).sqrt());
    }
    outcome(worst <= 1e-10, format!("100 problems: max relative error {worst:.1e} (tol 1e-10)"))
}

fn admissibility_probes() -> Outcome {
    let spaces = [Space::new(3, 1.5).unwrap(), Space::weighted(3.0, vec![1.0, 2.0, 0.5, 1.5]).unwrap()];
    let radial = [
        Regulariser::power(0.25).unwrap(),
        Regulariser::power(0.5).unwrap(),
        Regulariser::power(1.0).unwrap(),
        Regulariser::power(2.0).unwrap(),
        Regulariser::from_spec(&RegulariserSpec::Piecewise {
            knots: vec![0.5, 1.0, 3.0],
            values: vec![0.0, 1.0, 1.0, 4.0],
            at_jump: vec![0.5, 1.0, 2.0],
            slopes: None,
        })
        .unwrap(),
        increasing_piecewise(),
    ];
    let mut radial_pass = true;
    for s in &spaces {
        for r in &radial {
            radial_pass &= tangential_monotonicity_probe(r, s, 10_000, 9).unwrap().passed();
            radial_pass &= norm_monotonicity_probe(r, s, 10_000, 9).unwrap().passed();
        }
    }
    let abs_first = Regulariser::from_spec(&RegulariserSpec::BuiltinCustom {
        name: "abs_first_coord".into(),
    })
    .unwrap();
    let s = Space::new(2, 2.0).unwrap();
    let report = tangential_monotonicity_probe(&abs_first, &s, 1000, 9).unwrap();
    let margin = match &report.witness {
        Some(w @ Witness::Tangential { f, f_t, .. }) => {
            // re-verify the certificate from scratch
            let f = s.vector(f.clone()).unwrap();
            let t = s.vector(f_t.clone()).unwrap();
            let orthogonal = t.sip(&f).abs() <= 1e-10 * t.norm() * f.norm();
            let drop = abs_first.evaluate(&f).unwrap() - abs_first.evaluate(&(&f + &t)).unwrap();
            if orthogonal && (drop - w.margin()).abs() < 1e-12 {
                drop
            } else {
                f64::NAN
            }
        }
        _ => f64::NAN,
    };
    outcome(
        radial_pass && margin >= 0.1,
        format!(
            "{} radial regularisers x {} spaces pass both probes at 1e4 samples: {radial_pass}; \
             abs_first_coord counterexample margin {margin:.3} (>= 0.1) within 1000 samples",
            radial.len(),
            spaces.len()
        ),
    )
}

fn mollification() -> Outcome {
    let width = 0.3;
    let m = Mollifier::new(width, 16).unwrap();
    let linear = RadialProfile::power(0.5).unwrap();
    let mut shift_err = 0.0_f64;
    for k in 0..200 {
        let s = k as f64 * 0.05;
        shift_err = shift_err.max((m.profile_at(&linear, s) - (s + width / 2.0)).abs());
    }

    let step = RadialProfile::Piecewise(Piecewise::new(vec![1.0], vec![0.0, 1.0], vec![0.5], None).unwrap());
    let n = 20_000;
    let h = 3.0 / n as f64;
    let mut max_jump = 0.0_f64;
    let mut monotone = true;
    let mut prev = m.profile_at(&step, 0.0);
    for i in 1..=n {
        let v = m.profile_at(&step, i as f64 * h);
        max_jump = max_jump.max((v - prev).abs());
        monotone &= v >= prev - 1e-15;
        prev = v;
    }
    let bound = 2.0 * h * m.kernel_max();

    let space = Space::new(3, 3.0).unwrap();
    let mollified = mollify_radial(&Regulariser::Radial(step), &space, width, 16).unwrap();
    let probe = tangential_monotonicity_probe(&mollified, &space, 10_000, 10).unwrap();
    outcome(
        shift_err <= 1e-8 && max_jump <= bound && monotone && probe.passed(),
        format!(
            "linear shift error {shift_err:.1e} (tol 1e-8); step max jump {max_jump:.2e} \
             (bound {bound:.2e}), monotone {monotone}; tangential probe {:?}",
            probe.verdict
        ),
    )
}

fn smoothness_probes() -> Outcome {
    let deltas = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5];
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [1.5, 3.0] {
        let s = Space::new(3, p).unwrap();
        let ratios: Vec<f64> = deltas
            .iter()
            .map(|&d| modulus_of_smoothness_estimate(&s, d, 400) / d)
            .collect();
        let decreasing = ratios.windows(2).all(|w| w[1] < w[0]);
        let last = *ratios.last().unwrap();
        ok &= decreasing && last < 0.05;
        parts.push(format!("p={p}: ρ(δ)/δ {:.2e} -> {last:.2e} decreasing {decreasing}", ratios[0]));
    }
    let mut continuity = true;
    for (p, dim) in [(1.5, 5), (2.0, 3), (3.0, 4), (4.0, 2), (7.0, 3)] {
        let report = duality_continuity_probe(&Space::new(dim, p).unwrap(), 200, 11);
        continuity &= report.monotone;
    }
    ok &= continuity;
    parts.push(format!("duality-map distances monotone on every sample: {continuity}"));
    outcome(ok, parts.join("; "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("semi-inner-product axioms", sip_axioms),
        ("Riesz isometry and round trip", riesz_isometry),
        ("norm derivative identity", norm_derivative),
        ("James orthogonality equivalence", james_equivalence),
        ("dual gradient identity", dual_gradient),
        ("representer solver vs oracle", solver_vs_oracle),
        ("regulariser independence", regulariser_independence),
        ("Hilbert reduction", hilbert_reduction),
        ("admissibility probes", admissibility_probes),
        ("mollification", mollification),
        ("smoothness and continuity probes", smoothness_probes),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("aborted: {msg}"))
        });
        let verdict = if result.passed { "PASS" } else { "FAIL" };
        failures += usize::from(!result.passed);
        println!(
            "criterion {:>2} {verdict} {name} [{:.1}s]: {}",
            i + 1,
            start.elapsed().as_secs_f64(),
            result.detail
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}

