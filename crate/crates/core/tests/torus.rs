use krylov_core::spectral::charpoly_oracle;
use krylov_core::symfun::in_gamma;
use krylov_core::torus::{chi_field, complex_hessian, mean_sigmas, sample_fourier};
use krylov_core::{binomial, FourierMode, FourierSpec, HermitianField, HermitianForm, Spectrum, TorusGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn potential() -> FourierSpec {
    FourierSpec::new(vec![
        FourierMode::new(vec![1, 0, 1, 0], 0.3, 0.1),
        FourierMode::new(vec![0, 1, -1, 1], 0.2, 0.9),
        FourierMode::new(vec![2, 0, 0, -1], 0.1, 2.0),
    ])
}

fn max_error(points: usize) -> f64 {
    let grid = TorusGrid::new(2, points).unwrap();
    let discrete = complex_hessian(&sample_fourier(&potential(), &grid).unwrap());
    let exact = potential().analytic_hessian(&grid).unwrap();
    (0..grid.nodes())
        .flat_map(|node| {
            discrete.entries(node).iter().zip(exact.entries(node)).map(|(a, b)| (a - b).norm()).collect::<Vec<_>>()
        })
        .fold(0.0, f64::max)
}

#[test]
fn stencil_is_second_order() {
    let ratio = max_error(8) / max_error(16);
    assert!((2.8..=5.2).contains(&ratio), "{ratio}");
}

#[test]
fn hessian_is_hermitian_with_zero_mean_trace() {
    let grid = TorusGrid::new(2, 8).unwrap();
    let h = complex_hessian(&sample_fourier(&potential(), &grid).unwrap());
    assert!(h.hermitian_defect() == 0.0);
    let traces: Vec<f64> = (0..grid.nodes()).map(|node| h.entries(node)[0].re + h.entries(node)[3].re).collect();
    assert!(krylov_core::torus::pairwise_mean(&traces).abs() < 1e-12);
}

#[test]
fn mean_sigma_matches_charpoly_for_constant_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 2..=3 {
        let grid = TorusGrid::new(n, 8).unwrap();
        for _ in 0..5 {
            let re: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let im: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let form = HermitianForm::from_parts(n, &re, &im).unwrap();
            let field = HermitianField::constant(grid, &form).unwrap();
            let means = mean_sigmas(&field).unwrap();
            let c = charpoly_oracle(&form).unwrap();
            for l in 0..=n {
                let lhs = means[l] * binomial(n, l) as f64;
                assert!((lhs - c[l]).abs() <= 1e-12 * (1.0 + c[l].abs()), "{lhs} {}", c[l]);
            }
        }
    }
}

#[test]
fn cone_flags_agree_with_membership() {
    let grid = TorusGrid::new(2, 8).unwrap();
    let chi0 = HermitianField::constant(grid, &HermitianForm::scaled_identity(2, 0.15)).unwrap();
    let u = sample_fourier(&potential(), &grid).unwrap();
    let chi = chi_field(&chi0, &u, 1).unwrap();
    let flags = chi.cone_flags(1).unwrap();
    assert!(flags.iter().any(|&f| f) && flags.iter().any(|&f| !f));
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let node = rng.gen_range(0..grid.nodes());
        let lambda = Spectrum::new(chi.eigenvalues(node).unwrap()).unwrap();
        assert_eq!(flags[node], in_gamma(&lambda, 1).unwrap().inside);
    }
}

#[test]
fn eigenvalues_stay_near_constant_background() {
    let grid = TorusGrid::new(2, 8).unwrap();
    let c = 2.0;
    let chi0 = HermitianField::constant(grid, &HermitianForm::scaled_identity(2, c)).unwrap();
    let small = FourierSpec::new(
        potential().modes.into_iter().map(|m| FourierMode { amplitude: 0.05 * m.amplitude, ..m }).collect(),
    );
    let u = sample_fourier(&small, &grid).unwrap();
    let h = complex_hessian(&u);
    let chi = chi_field(&chi0, &u, 2).unwrap();
    for node in 0..grid.nodes() {
        let bound = HermitianForm::new(2, h.entries(node).to_vec()).unwrap().frobenius_norm();
        for lambda in chi.eigenvalues(node).unwrap() {
            assert!((lambda - c).abs() <= bound + 1e-14);
        }
    }
}
