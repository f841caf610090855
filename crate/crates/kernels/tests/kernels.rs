use radon_algebra::{DilationSpec, MultiIndex};
use radon_kernels::*;

fn family(profile: Profile, jmax: u32, e: &DilationSpec, a: f64) -> BumpFamily {
    make_bump_family(BumpParams { k: 6, a, profile }, jmax, e).unwrap()
}

/// Composite trapezoid over the support box, independent of the closed-form integrals.
fn quad(b: &TensorBump, m: usize) -> f64 {
    let n = b.n();
    let mut idx = vec![0usize; n];
    let mut acc = 0.0;
    'outer: loop {
        let mut w = 1.0;
        let t: Vec<f64> = (0..n)
            .map(|i| {
                let h = 2.0 * b.radius[i] / m as f64;
                w *= if idx[i] == 0 || idx[i] == m { 0.5 * h } else { h };
                -b.radius[i] + idx[i] as f64 * h
            })
            .collect();
        acc += w * b.eval(&t);
        for i in (0..n).rev() {
            idx[i] += 1;
            if idx[i] <= m {
                continue 'outer;
            }
            idx[i] = 0;
        }
        break;
    }
    acc
}

#[test]
fn cancellation_integrals_vanish() {
    let es = [
        DilationSpec::isotropic(1),
        DilationSpec::standard(2),
        DilationSpec::isotropic(2),
        DilationSpec::new(vec![vec![1, 0], vec![2, 0], vec![0, 1]]).unwrap(),
    ];
    for e in &es {
        for p in [Profile::Even, Profile::Odd, Profile::Random { seed: 3 }] {
            let f = family(p, 3, e, 1.0);
            let r = f.cancellation_residual(256);
            assert!(r <= 1e-10, "{e} {p:?}: {r:e}");
        }
    }
}

#[test]
fn unconstrained_member_is_the_plain_bump() {
    let e = DilationSpec::standard(2);
    let f = family(Profile::Even, 2, &e, 1.0);
    let b = f.member(&[0, 0]).unwrap();
    assert_eq!(b.terms.len(), 1);
    let r = 1.0 / 2f64.sqrt();
    let t = [0.3, -0.2];
    let want: f64 = t.iter().map(|x| (1.0 - (x / r) * (x / r)).powi(6) * (1.0 + (x / r) * (x / r))).product();
    assert!((b.eval(&t) - want).abs() < 1e-14);
    assert!(quad(b, 200) > 0.1);
}

#[test]
fn odd_profile_needs_no_projection() {
    let e = DilationSpec::isotropic(1);
    let f = family(Profile::Odd, 3, &e, 1.0);
    let b0 = f.member(&[0]).unwrap();
    for j in 1..=3 {
        assert_eq!(f.member(&[j]).unwrap(), b0);
    }
}

#[test]
fn projected_bump_integrates_to_zero() {
    let e = DilationSpec::isotropic(1);
    let f = family(Profile::Random { seed: 11 }, 1, &e, 1.0);
    assert!(quad(f.member(&[0]).unwrap(), 4000).abs() > 1e-3);
    assert!(quad(f.member(&[1]).unwrap(), 4000).abs() <= 1e-10);
}

#[test]
fn family_is_uniformly_bounded() {
    let f = family(Profile::Random { seed: 2 }, 4, &DilationSpec::standard(2), 1.0);
    assert_eq!(f.bound.order, 4);
    assert!(f.bound.value.is_finite() && f.bound.value > 0.0);
}

#[test]
fn single_term_kernel() {
    let e = DilationSpec::isotropic(1);
    let f = family(Profile::Even, 0, &e, 1.0);
    let g = GridSpec::centered(1, 64, 1.0);
    let k = synth_kernel(&f, 0, &g).unwrap();
    let b = f.member(&[0]).unwrap();
    for i in 0..64 {
        assert!((k.values[i] - b.eval(&[g.coord(0, i)])).abs() < 1e-14);
    }
}

#[test]
fn grid_resolution_is_checked() {
    let e = DilationSpec::isotropic(1);
    let f = family(Profile::Odd, 8, &e, 1.0);
    let err = synth_kernel(&f, 8, &GridSpec::centered(1, 1024, 1.0)).unwrap_err();
    assert!(matches!(err, KernelError::UnderResolved { axis: 0, .. }));
    assert!(synth_kernel(&f, 8, &GridSpec::centered(1, 4096, 1.0)).is_ok());
    let err = synth_kernel(&f, 2, &GridSpec::centered(1, 4096, 0.5)).unwrap_err();
    assert!(matches!(err, KernelError::Domain(_)));
}

fn cz_constant(jmax: u32) -> f64 {
    let e = DilationSpec::isotropic(1);
    let f = family(Profile::Odd, jmax, &e, 1.0);
    let k = synth_kernel(&f, jmax, &GridSpec::centered(1, 4096, 1.0)).unwrap();
    validate_product_bounds(&k, &[MultiIndex(vec![0])]).unwrap()[0].constant
}

#[test]
fn one_parameter_constant_is_stable_in_j() {
    let c: Vec<f64> = (6..=8).map(cz_constant).collect();
    assert!(c.iter().all(|x| x.is_finite() && *x > 0.0));
    assert!(drift(&c) <= 0.10, "{c:?}");
}

#[test]
fn derivative_constants_are_finite() {
    let e = DilationSpec::isotropic(1);
    let mut c = Vec::new();
    for j in 6..=8 {
        let f = family(Profile::Odd, j, &e, 1.0);
        let k = synth_kernel(&f, j, &GridSpec::centered(1, 4096, 1.0)).unwrap();
        c.push(validate_product_bounds(&k, &[MultiIndex(vec![1])]).unwrap()[0].constant);
    }
    assert!(c.iter().all(|x| x.is_finite() && *x > 0.0));
    assert!(drift(&c) <= 0.25, "{c:?}");
}

#[test]
fn tensor_kernel_factors() {
    let a = 2f64.sqrt();
    let e2 = DilationSpec::standard(2);
    let f2 = family(Profile::Odd, 4, &e2, a);
    let g2 = GridSpec::centered(2, 512, 1.0);
    let k2 = synth_kernel(&f2, 4, &g2).unwrap();
    let f1 = family(Profile::Odd, 4, &DilationSpec::isotropic(1), 1.0);
    let k1 = synth_kernel(&f1, 4, &GridSpec::centered(1, 512, 1.0)).unwrap();
    let scale = k1.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in (0..512).step_by(7) {
        for j in (0..512).step_by(5) {
            let want = k1.values[i] * k1.values[j];
            let got = k2.values[i * 512 + j];
            assert!((got - want).abs() <= 1e-8 * scale * scale, "({i},{j}): {got} vs {want}");
        }
    }
    let c2 = validate_product_bounds(&k2, &[MultiIndex(vec![0, 0])]).unwrap()[0].constant;
    let c1 = validate_product_bounds(&k1, &[MultiIndex(vec![0])]).unwrap()[0].constant;
    assert!((c2 / (c1 * c1) - 1.0).abs() <= 0.2, "{c2} vs {}", c1 * c1);
}

#[test]
fn zero_kernel_has_zero_constants() {
    let e = DilationSpec::standard(2);
    let f = BumpFamily::zero(&e, 2, 1.0);
    let k = synth_kernel(&f, 2, &GridSpec::centered(2, 128, 1.0)).unwrap();
    let cs = validate_product_bounds(&k, &[MultiIndex(vec![0, 0]), MultiIndex(vec![1, 0]), MultiIndex(vec![0, 1])]).unwrap();
    assert!(cs.iter().all(|c| c.constant == 0.0));
}

#[test]
fn non_product_dilations_are_rejected() {
    let e = DilationSpec::new(vec![vec![1, 1]]).unwrap();
    let f = family(Profile::Odd, 1, &e, 1.0);
    let k = synth_kernel(&f, 1, &GridSpec::centered(1, 256, 1.0)).unwrap();
    assert!(matches!(validate_product_bounds(&k, &[MultiIndex(vec![0])]), Err(KernelError::NonProduct(_))));
}

#[test]
fn dilation_covariance() {
    // Shifting every j by one equals rescaling the argument by 2.
    let e = DilationSpec::isotropic(1);
    let f = family(Profile::Odd, 6, &e, 1.0);
    let k5 = DyadicKernel::new(f.clone(), 5).unwrap();
    let b = f.member(&[1]).unwrap();
    for i in 0..200 {
        let t = -1.0 + (i as f64 + 0.5) / 100.0;
        let shifted: f64 = (1..=6).map(|j| b.eval_dilated(&[t], &[j], &e)).sum();
        let lhs = shifted + f.member(&[0]).unwrap().eval_dilated(&[t], &[0], &e);
        let rhs = 2.0 * k5.eval(&[2.0 * t]) + f.member(&[0]).unwrap().eval(&[t]);
        assert!((lhs - rhs).abs() < 1e-10, "t={t}");
    }
}

#[test]
fn dilation_preserves_integrals() {
    let e = DilationSpec::standard(2);
    let f = family(Profile::Even, 0, &e, 1.0);
    let b = f.member(&[0, 0]).unwrap();
    let want = b.integral();
    assert!((quad(b, 400) - want).abs() < 1e-10);
    let g = GridSpec::centered(2, 1024, 1.0);
    for j in [[0u32, 0], [1, 0], [2, 3]] {
        let mut acc = 0.0;
        for flat in 0..g.len() {
            acc += b.eval_dilated(&g.point(flat), &j, &e);
        }
        acc *= g.cell_volume();
        assert!((acc - want).abs() < 1e-9 * want.abs(), "j={j:?}: {acc} vs {want}");
    }
}

#[test]
fn grid_dump_round_trip() {
    let e = DilationSpec::standard(2);
    let f = family(Profile::Random { seed: 5 }, 2, &e, 1.0);
    let k = synth_kernel(&f, 2, &GridSpec::centered(2, 96, 1.0)).unwrap();
    let mut buf = Vec::new();
    k.to_dump().write_to(&mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("radon-grid 1\nN 2\nnu 2\n"));
    let d = GridDump::read_from(buf.as_slice()).unwrap();
    let back = GridKernel::from_dump(&d).unwrap();
    assert_eq!(back.values, k.values);
    assert_eq!(back.grid, k.grid);
    assert_eq!(back.kernel.family.members, k.kernel.family.members);
    assert!(GridDump::read_from("radon-grid 1\nshape 2\ndomain 0 1\nvalues\n1\n".as_bytes()).is_err());
}
