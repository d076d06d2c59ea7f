//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::process::ExitCode;
use std::time::Instant;

use krylov::config::DEFAULT_SEED;
use krylov::verify::{run_verify, SuiteReport, VerifyOptions, PAIRS};
use krylov_core::solver::{
    homotopy_solve, manufactured_coefficients_analytic, residual, HomotopyPlan, Problem, Solution, SolverState,
};
use krylov_core::torus::{complex_hessian, integral_condition_gap, sample_fourier};
use krylov_core::{Coefficients, FourierMode, FourierSpec, HermitianField, HermitianForm, Profile, TorusGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TRIALS: u64 = 100_000;

struct Verdict {
    passed: bool,
    detail: String,
}

impl Verdict {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Verdict { passed, detail: detail.into() }
    }
}

fn suites(names: &[&str]) -> Vec<SuiteReport> {
    run_verify(&VerifyOptions {
        seed: DEFAULT_SEED,
        trials: TRIALS,
        suites: Some(names.iter().map(|s| s.to_string()).collect()),
        flip_newton_sign: false,
    })
}

/// Pass when every suite passed with at least `min_cases` judged cases.
fn suite_verdict(names: &[&str], min_cases: u64) -> Verdict {
    let reports = suites(names);
    let mut passed = reports.len() == names.len();
    let mut parts = Vec::new();
    for r in &reports {
        let ok = r.passed && r.cases >= min_cases;
        passed &= ok;
        let worst = r.worst_margin.map_or("none".into(), |w| format!("{w:.2e}"));
        let skipped = if r.skipped > 0 { format!(", {} skipped", r.skipped) } else { String::new() };
        parts.push(format!(
            "{} {}/{} worst {worst} tol {:.0e}{skipped}",
            r.name,
            r.cases - r.failures,
            r.cases,
            r.tolerance
        ));
    }
    Verdict::new(passed, parts.join("; "))
}

fn pair_cases() -> u64 {
    TRIALS * PAIRS.len() as u64
}

fn criterion1() -> Verdict {
    let start = Instant::now();
    let mut v = suite_verdict(&["oracle-subset", "oracle-charpoly"], TRIALS);
    let secs = start.elapsed().as_secs_f64();
    v.passed &= secs < 60.0;
    v.detail = format!("{}; {secs:.1} s (limit 60 s)", v.detail);
    v
}

fn criterion2() -> Verdict {
    suite_verdict(&["identities", "euler"], TRIALS)
}

fn criterion3() -> Verdict {
    suite_verdict(
        &["newton", "newton-maclaurin", "garding", "quotient-deleted", "ratio-upper", "quotient-bounds", "grad-sum"],
        pair_cases(),
    )
}

fn criterion4() -> Verdict {
    suite_verdict(
        &["ellipticity", "strict-ellipticity", "concavity-midpoint", "tangent", "second-derivative", "f-gradient"],
        // f-gradient skips cases whose central difference is unresolved
        pair_cases() * 99 / 100,
    )
}

fn criterion8() -> Verdict {
    suite_verdict(&["cone-frame"], pair_cases())
}

fn modes() -> FourierSpec {
    FourierSpec::new(vec![
        FourierMode::new(vec![1, 0, 0, 0], 0.4, 0.0),
        FourierMode::new(vec![0, 0, 0, 1], 0.3, 0.7),
        FourierMode::new(vec![0, 1, 0, 0], 0.2, 1.3),
    ])
}

/// A converged solve, for the integral audit.
struct Solved {
    label: String,
    problem: Problem,
    solution: Solution,
}

fn gap_of(s: &Solved) -> (f64, f64) {
    let p = &s.problem;
    let nodes = p.grid().nodes();
    let top: Vec<f64> = p.coefficients().alpha()[p.k() - 1].to_field(nodes).iter().map(|a| a + s.solution.a).collect();
    let folded = p.coefficients().clone().with_top(Profile::Field(top)).expect("same shape");
    let chi = p.chi0().add(&complex_hessian(&s.solution.state.u)).expect("same grid");
    let h = p.grid().spacing();
    (integral_condition_gap(&chi, &folded).expect("valid").gap, 5.0 * h * h)
}

fn criterion5(solved: &mut Vec<Solved>) -> Verdict {
    let start = Instant::now();
    let mut passed = true;
    let mut errors = Vec::new();
    let mut parts = Vec::new();
    for points in [8, 16] {
        let grid = TorusGrid::new(2, points).expect("valid grid");
        let chi0 = HermitianField::constant(grid, &HermitianForm::identity(2)).expect("grid");
        let lower = Coefficients::new(2, 2, vec![Profile::Constant(0.5), Profile::Constant(0.0)], None).expect("valid");
        let top = manufactured_coefficients_analytic(&modes(), &chi0, &lower).expect("inside the cone");
        let c = lower.with_top(Profile::Field(top.into_values())).expect("valid");
        let problem = match Problem::new(chi0, c) {
            Ok(p) => p,
            Err(e) => return Verdict::new(false, format!("N={points}: {e}")),
        };
        let solution = match homotopy_solve(&problem, &HomotopyPlan::default()) {
            Ok(s) => s,
            Err(e) => return Verdict::new(false, format!("N={points}: {e}")),
        };
        let h = grid.spacing();
        let exact = sample_fourier(&modes(), &grid).expect("no aliasing").recentered();
        let err = solution.state.u.axpy(-1.0, &exact).expect("same grid").linf();
        let ok = solution.residual.linf <= 1e-9 && solution.a.abs() <= 1e-6 && err <= 5.0 * h * h;
        passed &= ok;
        parts.push(format!(
            "N={points}: residual {:.1e}, |a| {:.1e}, error {err:.3e} (5h² {:.3e})",
            solution.residual.linf,
            solution.a.abs(),
            5.0 * h * h
        ));
        errors.push(err);
        solved.push(Solved { label: format!("manufactured N={points}"), problem, solution });
    }
    let ratio = errors[0] / errors[1];
    let secs = start.elapsed().as_secs_f64();
    passed &= (3.0..=5.0).contains(&ratio) && secs < 300.0;
    parts.push(format!("ratio {ratio:.3} in [3, 5]; {secs:.1} s (limit 300 s)"));
    Verdict::new(passed, parts.join("; "))
}

fn random_spec(rng: &mut ChaCha8Rng, axes: usize, amplitude: f64) -> FourierSpec {
    FourierSpec::new(
        (0..rng.gen_range(1..=3))
            .map(|_| {
                let wave = (0..axes).map(|_| rng.gen_range(-1..=1)).collect();
                FourierMode::new(wave, rng.gen_range(-amplitude..amplitude), rng.gen_range(0.0..6.3))
            })
            .collect(),
    )
}

/// A random valid problem: `χ_0 = c·I + ∂∂̄w`, positive or vanishing lower
/// coefficients, sign-free top coefficient; resampled until the cone
/// condition holds.
fn random_problem(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Problem {
    let grid = TorusGrid::new(n, 8).expect("valid grid");
    loop {
        let c = rng.gen_range(0.5..3.0);
        let w = sample_fourier(&random_spec(rng, 2 * n, 0.3), &grid).expect("no aliasing");
        let base = HermitianField::constant(grid, &HermitianForm::scaled_identity(n, c)).expect("grid");
        let chi0 = base.add(&complex_hessian(&w)).expect("same grid");
        let mut alpha = Vec::with_capacity(k);
        for _ in 0..k - 1 {
            let vanish = rng.gen_bool(0.3);
            alpha.push(if vanish {
                Profile::Constant(0.0)
            } else if rng.gen_bool(0.5) {
                Profile::Constant(rng.gen_range(0.05..1.0))
            } else {
                let bump = sample_fourier(&random_spec(rng, 2 * n, 1.0), &grid).expect("no aliasing");
                let base = rng.gen_range(0.05..1.0);
                let lo = bump.min();
                Profile::Field(bump.values().iter().map(|b| base + 0.5 * (b - lo)).collect())
            });
        }
        let bump = sample_fourier(&random_spec(rng, 2 * n, 0.5), &grid).expect("no aliasing");
        let top0 = rng.gen_range(-1.0..1.0);
        alpha.push(Profile::Field(bump.values().iter().map(|b| top0 + b).collect()));
        let Ok(coeffs) = Coefficients::new(n, k, alpha, None) else { continue };
        if let Ok(p) = Problem::new(chi0, coeffs) {
            return p;
        }
    }
}

/// `χ_0 = c·I + ∂∂̄w`; constants balance the algebraic equation at `c·I`;
/// `α_1 = c_1 + ψ(1 + bump) ≥ c_1`; floors `(α_0, c_1)`.
fn floors_problem(psi: f64) -> Problem {
    let grid = TorusGrid::new(2, 8).expect("valid grid");
    let (c0, alpha0) = (1.2f64, 0.5);
    let c1 = 2.0 * (c0 * c0 - alpha0) / (2.0 * c0);
    let w = sample_fourier(
        &FourierSpec::new(vec![
            FourierMode::new(vec![1, 0, 1, 0], 0.2, 0.0),
            FourierMode::new(vec![0, 1, 0, 0], 0.15, 0.4),
        ]),
        &grid,
    )
    .expect("no aliasing");
    let base = HermitianField::constant(grid, &HermitianForm::scaled_identity(2, c0)).expect("grid");
    let chi0 = base.add(&complex_hessian(&w)).expect("same grid");
    let bump = sample_fourier(&FourierSpec::single(vec![0, 0, 1, 1], 1.0, 0.0), &grid).expect("no aliasing");
    let top: Vec<f64> = bump.values().iter().map(|b| c1 + psi * (1.0 + b)).collect();
    let c = Coefficients::new(2, 2, vec![Profile::Constant(alpha0), Profile::Field(top)], Some(vec![alpha0, c1]))
        .expect("valid");
    Problem::new(chi0, c).expect("cone condition holds")
}

fn criterion6(solved: &mut Vec<Solved>) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let mut worst_start: f64 = 0.0;
    let mut count = 0;
    for (n, k) in [(2, 2), (3, 2), (3, 3)] {
        for _ in 0..8 {
            let p = random_problem(&mut rng, n, k);
            match residual(&SolverState::initial(&p), &p) {
                Ok(r) => worst_start = worst_start.max(r.linf),
                Err(e) => return Verdict::new(false, format!("t=0 residual failed: {e}")),
            }
            count += 1;
        }
    }
    let mut passed = worst_start <= 1e-12;
    let mut parts = vec![format!("t=0 residual max {worst_start:.1e} over {count} random problems (tol 1e-12)")];
    for psi in [0.0, 0.05] {
        let p = floors_problem(psi);
        match homotopy_solve(&p, &HomotopyPlan::default()) {
            Ok(sol) => {
                let chi = p.chi0().add(&complex_hessian(&sol.state.u)).expect("same grid");
                let floor_gap =
                    integral_condition_gap(&chi, p.coefficients()).expect("valid").floor_gap.unwrap_or(f64::NAN);
                passed &= sol.a <= 1e-8;
                parts.push(format!("floors ψ={psi}: a {:.2e} (≤ 1e-8), floor gap {floor_gap:.2e}", sol.a));
                solved.push(Solved { label: format!("floors ψ={psi}"), problem: p, solution: sol });
            }
            Err(e) => {
                passed = false;
                parts.push(format!("floors ψ={psi}: {e}"));
            }
        }
    }
    Verdict::new(passed, parts.join("; "))
}

fn criterion7(solved: &[Solved]) -> Verdict {
    let mut passed = !solved.is_empty();
    let mut parts = Vec::new();
    for s in solved {
        let (gap, bound) = gap_of(s);
        passed &= gap.abs() <= bound;
        parts.push(format!("{}: |gap| {:.1e} (5h² {bound:.2e})", s.label, gap.abs()));
    }
    Verdict::new(passed, parts.join("; "))
}

fn main() -> ExitCode {
    let mut solved = Vec::new();
    let criteria: Vec<(&str, Box<dyn FnOnce(&mut Vec<Solved>) -> Verdict>)> = vec![
        ("oracle equivalence", Box::new(|_| criterion1())),
        ("identity suite", Box::new(|_| criterion2())),
        ("inequality suite", Box::new(|_| criterion3())),
        ("ellipticity and concavity certificates", Box::new(|_| criterion4())),
        ("manufactured solve", Box::new(criterion5)),
        ("continuity-method structure", Box::new(criterion6)),
        ("integral condition audit", Box::new(|s: &mut Vec<Solved>| criterion7(s))),
        ("cone checker consistency", Box::new(|_| criterion8())),
    ];
    let mut all = true;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let v = check(&mut solved);
        all &= v.passed;
        println!("criterion {} {name}: {} ({})", i + 1, if v.passed { "PASS" } else { "FAIL" }, v.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
