use fsilab::ambient::Preset;
use fsilab::generator::{kernel_vector, smallest_singular_value_h0};
use fsilab::lab::{Lab, LabParams};
use fsilab::state::State;
use fsilab::{BeamField, Grid, ScalarField};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn zero_lab(n: usize) -> Lab {
    Lab::new(LabParams::new(Grid::unit(n).unwrap())).unwrap()
}

fn preset_lab(n: usize) -> Lab {
    Lab::new(LabParams::new(Grid::unit(n).unwrap()).with_ambient(Preset::Compressive, 0.001).with_constants(0.01, 6.0))
        .unwrap()
}

fn random_vec(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

#[test]
fn zero_maps_to_zero() {
    let lab = preset_lab(8);
    let y = lab.gen.apply(&vec![0.0; lab.dim()]).unwrap();
    assert!(y.iter().all(|v| *v == 0.0));
    assert!(lab.gen.apply(&[0.0; 3]).is_err());
}

/// Plate-only quartic at U = 0: the only nonzero row is `w2 <- -d4 w1 = -24`,
/// exact away from the two nodes next to the clamped ends.
#[test]
fn clamped_quartic_plate_rows() {
    let lab = zero_lab(16);
    let g = *lab.grid();
    let l = &lab.gen.layout;
    let mut s = State::zeros(&g);
    s.w1 = BeamField::from_fn(&g, |x| x * x * (1.0 - x) * (1.0 - x));
    let gy = lab.gen.apply(&l.pack(&s).unwrap()).unwrap();
    assert!(gy[..l.off_w1()].iter().all(|v| v.abs() < 1e-10));
    assert!(l.w1(&gy).iter().all(|v| v.abs() < 1e-12));
    let w2 = l.w2(&gy);
    for v in &w2[1..g.nx - 1] {
        assert!((v + 24.0).abs() < 1e-7, "{v}");
    }
}

/// `p = x2` at U = 0: interior velocity rows give `-grad p = (0, -1)`, the
/// pressure rows vanish in the interior, and the plate row picks up the
/// discrete trace `p|top - hy/2 = -hy/2` of the summation-by-parts closure.
#[test]
fn linear_pressure_rows() {
    let lab = zero_lab(10);
    let g = *lab.grid();
    let l = &lab.gen.layout;
    let mut s = State::zeros(&g);
    s.p = ScalarField::from_fn(&g, |_, y| y);
    let gy = lab.gen.apply(&l.pack(&s).unwrap()).unwrap();
    let st = l.unpack(&gy).unwrap();
    for j in 1..g.ny {
        for i in 1..=g.nx {
            let k = g.idx(i, j);
            assert!(st.u.c1[k].abs() < 1e-10);
            assert!((st.u.c2[k] + 1.0).abs() < 1e-10, "{}", st.u.c2[k]);
            assert!(st.p.0[k].abs() < 1e-10);
        }
    }
    for v in l.w2(&gy) {
        assert!((v + 0.5 * g.hy).abs() < 1e-10, "{v}");
    }
}

#[test]
fn zero_mean_subspace_is_invariant() {
    for lab in [zero_lab(12), preset_lab(12)] {
        let m = &lab.metric;
        let mn = fsilab::linalg::norm2(m.mean_vector());
        for seed in 0..10 {
            let y = m.project_h0(&random_vec(lab.dim(), seed));
            let gy = lab.gen.apply(&y).unwrap();
            assert!(m.mean_functional(&gy).abs() <= 1e-8 * mn * fsilab::linalg::norm2(&y));
        }
    }
}

#[test]
fn adjoint_identity_and_involution() {
    for lab in [zero_lab(12), preset_lab(12)] {
        let m = &lab.metric;
        for seed in 0..20 {
            let x = m.project_h0(&random_vec(lab.dim(), seed));
            let y = m.project_h0(&random_vec(lab.dim(), 1000 + seed));
            let gx = lab.gen.apply(&x).unwrap();
            let lhs = m.inner(&gx, &y);
            let rhs = m.inner(&x, &lab.gen.adjoint_apply(m, &y));
            assert!((lhs - rhs).abs() <= 1e-10 * m.norm(&x) * m.norm(&y) * m.norm(&gx) / m.norm(&x));
            let back = lab.gen.adjoint_of_adjoint_apply(m, &x);
            let d: Vec<f64> = back.iter().zip(&gx).map(|(a, b)| a - b).collect();
            assert!(m.norm(&d) <= 1e-10 * m.norm(&gx));
        }
    }
}

/// At U = 0 the metric is block diagonal and the plate block of `G` is
/// `[[0, I], [-K/h, D]]` with `D` the symmetric interface viscous load. In the
/// adjoint the skew coupling reverses sign and `D` is unchanged.
#[test]
fn plate_block_of_adjoint_flips_skew_part() {
    let lab = zero_lab(12);
    let l = &lab.gen.layout;
    let (n, nb) = (lab.dim(), l.nb());
    let close = |a: &[f64], b: &[f64], sign: f64| {
        let scale = fsilab::linalg::max_abs(b).max(1e-300);
        a.iter().zip(b).all(|(x, y)| (x - sign * y).abs() < 1e-9 * scale)
    };
    for seed in 0..5 {
        let r = random_vec(nb, seed);
        // displacement only
        let mut y = vec![0.0; n];
        y[l.off_w1()..l.off_w2()].copy_from_slice(&r);
        let gy = lab.gen.apply(&y).unwrap();
        let ay = lab.gen.adjoint_apply(&lab.metric, &y);
        assert!(l.w1(&gy).iter().chain(l.w1(&ay)).all(|v| v.abs() < 1e-9));
        assert!(close(l.w2(&ay), l.w2(&gy), -1.0));
        // velocity only
        let mut y = vec![0.0; n];
        y[l.off_w2()..].copy_from_slice(&r);
        let gy = lab.gen.apply(&y).unwrap();
        let ay = lab.gen.adjoint_apply(&lab.metric, &y);
        assert!(close(l.w1(&gy), &r, 1.0));
        assert!(close(l.w1(&ay), &r, -1.0));
        assert!(close(l.w2(&ay), l.w2(&gy), 1.0));
    }
}

#[test]
fn kernel_vector_geometry() {
    let mut ratios = Vec::new();
    for n in [12, 24] {
        let lab = zero_lab(n);
        let k = kernel_vector(&lab.gen, &lab.metric).unwrap();
        assert!(k.residual < 1e-8);
        assert!(k.mean_ratio >= 0.01);
        assert!(k.velocity_norm < 1e-8, "{}", k.velocity_norm);
        ratios.push(k.mean_ratio);
        let s = smallest_singular_value_h0(&lab.gen, &lab.metric, 80).unwrap();
        assert!(s > 0.0 && s.is_finite());
    }
    assert!((ratios[1] / ratios[0] - 1.0).abs() < 0.2);
    let lab = preset_lab(12);
    let k = kernel_vector(&lab.gen, &lab.metric).unwrap();
    assert!(k.mean_ratio >= 0.01);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generator_is_linear(a in -5.0f64..5.0, b in -5.0f64..5.0, s1 in 0u64..1000, s2 in 0u64..1000) {
        let lab = preset_lab(8);
        let x = random_vec(lab.dim(), s1);
        let y = random_vec(lab.dim(), s2);
        let comb: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let lhs = lab.gen.apply(&comb).unwrap();
        let (gx, gy) = (lab.gen.apply(&x).unwrap(), lab.gen.apply(&y).unwrap());
        let scale = fsilab::linalg::max_abs(&gx).max(fsilab::linalg::max_abs(&gy)) * (a.abs() + b.abs()).max(1.0);
        for k in 0..lab.dim() {
            prop_assert!((lhs[k] - a * gx[k] - b * gy[k]).abs() <= 1e-12 * scale);
        }
    }
}
