use std::f64::consts::PI;

use fsilab::elliptic::{dirichlet_map, neumann_potential, NeumannData};
use fsilab::{BeamField, Error, Grid, ScalarField};

fn max_err(a: &ScalarField, b: &ScalarField) -> f64 {
    a.0.iter().zip(&b.0).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `-psi'' = 1` on `[-1, 0]`, `psi'(-1) = 0`, `psi'(0) = -1`, mean zero:
/// `psi = -y^2/2 - y + c` with `int_{-1}^0 psi = -1/6 + 1/2 + c = 0`.
fn neumann_error(n: usize) -> f64 {
    let g = Grid::unit(n).unwrap();
    let data = NeumannData { f: ScalarField::from_fn(&g, |_, _| 1.0), chi: BeamField::from_fn(&g, |_| -1.0) };
    let psi = neumann_potential(&g, &data).unwrap();
    max_err(&psi, &ScalarField::from_fn(&g, |_, y| -y * y / 2.0 - y - 1.0 / 3.0))
}

fn dirichlet_error(n: usize) -> f64 {
    let g = Grid::unit(n).unwrap();
    let d = dirichlet_map(&g, &BeamField::from_fn(&g, |x| (PI * x).sin())).unwrap();
    max_err(&d, &ScalarField::from_fn(&g, |x, y| (PI * x).sin() * (PI * (y + 1.0)).sinh() / PI.sinh()))
}

#[test]
fn gauge_constant_is_minus_one_third() {
    // midpoint rule on the closed form
    let m = 100_000;
    let mean: f64 = (0..m).map(|k| -1.0 + (k as f64 + 0.5) / m as f64).map(|y| -y * y / 2.0 - y).sum::<f64>() / m as f64;
    assert!((mean - 1.0 / 3.0).abs() < 1e-9);
}

#[test]
fn neumann_second_order() {
    let (a, b, c) = (neumann_error(16), neumann_error(32), neumann_error(64));
    assert!(a < 1e-2);
    for r in [a / b, b / c] {
        assert!((3.5..=4.5).contains(&r), "{a} {b} {c}");
    }
}

#[test]
fn dirichlet_second_order() {
    let (a, b, c) = (dirichlet_error(16), dirichlet_error(32), dirichlet_error(64));
    assert!(a < 1e-2);
    for r in [a / b, b / c] {
        assert!((3.5..=4.5).contains(&r), "{a} {b} {c}");
    }
}

#[test]
fn degenerate_and_invalid_data() {
    let g = Grid::unit(10).unwrap();
    let z = neumann_potential(&g, &NeumannData { f: ScalarField::zeros(&g), chi: BeamField::zeros(&g) }).unwrap();
    assert!(z.0.iter().all(|v| v.abs() < 1e-14));
    let bad = NeumannData { f: ScalarField::from_fn(&g, |_, _| 1.0), chi: BeamField::zeros(&g) };
    assert!(matches!(neumann_potential(&g, &bad), Err(Error::IncompatibleData { .. })));
    assert!(dirichlet_map(&g, &BeamField::zeros(&g)).unwrap().0.iter().all(|v| *v == 0.0));
    let jump = BeamField::from_fn(&g, |x| 1.0 - x);
    assert!(matches!(dirichlet_map(&g, &jump), Err(Error::NonzeroEndpoints { .. })));
}
