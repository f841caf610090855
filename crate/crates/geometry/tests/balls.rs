use radon_algebra::{MultiIndex, Poly, Q};
use radon_geometry::*;
use radon_lie::{VectorField, WeightedField};

fn wf(comps: Vec<Poly>, d: &[u32]) -> WeightedField {
    let n = comps.len();
    WeightedField::new(VectorField::new(n, comps).unwrap(), d.to_vec()).unwrap()
}

fn grushin() -> Vec<WeightedField> {
    let x1 = Poly::var(2, 0);
    vec![wf(vec![Poly::one(2), Poly::zero(2)], &[1]), wf(vec![Poly::zero(2), x1], &[1])]
}

fn euclid() -> Vec<WeightedField> {
    vec![wf(vec![Poly::one(2), Poly::zero(2)], &[1]), wf(vec![Poly::zero(2), Poly::one(2)], &[1])]
}

#[test]
fn euclidean_disc_extents() {
    let p = BallParams { seed: 3, ..Default::default() };
    for d0 in [0.5, 0.1] {
        let b = cc_ball_sample(&euclid(), &[0.0, 0.0], &[d0], &p).unwrap();
        assert_eq!(b.discarded, 0);
        for e in &b.extents {
            assert!((e / d0 - 1.0).abs() <= 0.05, "extent {e} vs {d0}");
        }
        // Points stay in the closed disc.
        assert!(b.points.iter().all(|q| (q[0] * q[0] + q[1] * q[1]).sqrt() <= d0 * (1.0 + 1e-9)));
    }
}

#[test]
fn zero_radius_is_the_center() {
    let b = cc_ball_sample(&grushin(), &[0.3, -0.2], &[0.0], &BallParams { paths: 200, ..Default::default() }).unwrap();
    assert!(b.points.iter().all(|q| q == &vec![0.3, -0.2]));
    assert!(b.extents.iter().all(|&e| e == 0.0));
}

#[test]
fn grushin_second_axis_scales_quadratically() {
    let deltas = [0.05, 0.1, 0.2, 0.4];
    let p = BallParams { seed: 11, ..Default::default() };
    let ext: Vec<f64> = deltas.iter().map(|&d| cc_ball_sample(&grushin(), &[0.0, 0.0], &[d], &p).unwrap().extents[1]).collect();
    let slope = loglog_slope(&deltas, &ext);
    assert!((1.8..=2.2).contains(&slope), "slope {slope}");
    let ext1: Vec<f64> = deltas.iter().map(|&d| cc_ball_sample(&grushin(), &[0.0, 0.0], &[d], &p).unwrap().extents[0]).collect();
    let s1 = loglog_slope(&deltas, &ext1);
    assert!((s1 - 1.0).abs() < 0.05, "first axis slope {s1}");
}

#[test]
fn extents_are_monotone_in_delta() {
    let p = BallParams { paths: 2000, seed: 5, ..Default::default() };
    let x1 = Poly::var(2, 0);
    let s = vec![wf(vec![Poly::one(2), Poly::zero(2)], &[1, 0]), wf(vec![Poly::zero(2), x1], &[0, 1])];
    let grid = [0.1, 0.2, 0.4, 0.8];
    for axis in 0..2 {
        let mut prev: Option<Vec<f64>> = None;
        for &v in &grid {
            let mut d = vec![0.5, 0.5];
            d[axis] = v;
            let e = cc_ball_sample(&s, &[0.0, 0.0], &d, &p).unwrap().extents;
            if let Some(pe) = &prev {
                for (a, b) in pe.iter().zip(&e) {
                    assert!(*b >= a * 0.9, "axis {axis}: {pe:?} -> {e:?}");
                }
            }
            prev = Some(e);
        }
    }
}

#[test]
fn escapes_are_discarded_and_counted() {
    // x' = x² blows up in finite time from x = 1.
    let s = vec![wf(vec![Poly::monomial(1, MultiIndex(vec![2]), Q::from_integer(50.into()))], &[1])];
    let p = BallParams { paths: 100, domain_radius: 5.0, ..Default::default() };
    let b = cc_ball_sample(&s, &[1.0], &[1.0], &p).unwrap();
    assert!(b.discarded > 0);
    assert_eq!(b.discarded + b.points.len(), 100);
}

#[test]
fn cloud_export_and_control_records() {
    let p = BallParams { paths: 50, keep_controls: true, ..Default::default() };
    let b = cc_ball_sample(&euclid(), &[0.0, 0.0], &[0.5], &p).unwrap();
    assert_eq!(b.controls.len(), b.points.len());
    for c in &b.controls {
        assert_eq!(c.segments.len(), 32);
        assert!(c.segments.iter().all(|a| a.iter().map(|v| v * v).sum::<f64>() < 1.0));
    }
    let mut buf = Vec::new();
    b.write_cloud(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), b.points.len());
    assert!(text.lines().all(|l| l.split_whitespace().count() == 2));
}

#[test]
fn sampling_is_deterministic_under_seed() {
    let p = BallParams { paths: 300, seed: 9, ..Default::default() };
    let a = cc_ball_sample(&grushin(), &[0.0, 0.0], &[0.3], &p).unwrap();
    let b = cc_ball_sample(&grushin(), &[0.0, 0.0], &[0.3], &p).unwrap();
    assert_eq!(a.points, b.points);
}
