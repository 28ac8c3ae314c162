mod common;

use common::{assert_sound, random_f};
use gpbound::bounds::{hypercube_problem, lower_bound_with, BoundOptions, PathChoice};
use gpbound::hypercube::{compare_with_gp, trivial_bound};
use gpbound::poly::SparsePolynomial;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Instance {
    f: SparsePolynomial,
    scale: Vec<f64>,
    d: u32,
}

fn instance(rng: &mut ChaCha8Rng, clamp_tops: bool) -> Instance {
    let n = rng.gen_range(1..=3);
    let d = 2 * rng.gen_range(1..=3u32);
    let t = rng.gen_range(1..=8);
    let mut f = random_f(rng, n, d, t);
    if clamp_tops {
        f = f.filter_terms(|a, c| a.corner_index(d).is_none() || c <= 0.0);
    }
    let scale = (0..n).map(|_| rng.gen_range(0.3..3.0)).collect();
    Instance { f, scale, d }
}

fn check_sound(inst: &Instance) {
    let p = hypercube_problem(&inst.f, &inst.scale, inst.d).unwrap();
    let opts = BoundOptions {
        path: PathChoice::Canonical,
        ..BoundOptions::default()
    };
    assert_sound(&p, &lower_bound_with(&p, None, &opts).unwrap(), None);
}

#[test]
fn gp_bound_dominates_trivial_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for case in 0..200 {
        let inst = instance(&mut rng, false);
        let c = compare_with_gp(&inst.f, &inst.scale, inst.d).unwrap();
        let gp = c.gp_bound.unwrap_or_else(|| panic!("case {case}: {c:?}"));
        assert!(
            gp >= c.f_tr - 1e-6,
            "case {case}: gp {gp} < f_tr {}",
            c.f_tr
        );
        assert!(c.dominance_holds);
        check_sound(&inst);
    }
}

#[test]
fn bounds_agree_when_top_coefficients_are_nonpositive() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for case in 0..200 {
        let inst = instance(&mut rng, true);
        let c = compare_with_gp(&inst.f, &inst.scale, inst.d).unwrap();
        assert!(c.equality_expected);
        let gp = c.gp_bound.unwrap();
        assert!(
            (gp - c.f_tr).abs() <= 1e-5 * (1.0 + c.f_tr.abs()),
            "case {case}: gp {gp} vs f_tr {} for {}",
            c.f_tr,
            inst.f
        );
        assert_eq!(c.equality_holds, Some(true));
        check_sound(&inst);
    }
}

#[test]
fn trivial_bound_reduces_to_the_unit_box() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..200 {
        let inst = instance(&mut rng, false);
        let a = trivial_bound(&inst.f, &inst.scale).unwrap().f_tr;
        let unit = vec![1.0; inst.f.n()];
        let b = trivial_bound(&inst.f.rescale(&inst.scale).unwrap(), &unit)
            .unwrap()
            .f_tr;
        assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{a} vs {b}");
    }
}

#[test]
fn trivial_bound_is_a_lower_bound_on_the_box() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for _ in 0..50 {
        let inst = instance(&mut rng, false);
        let f_tr = trivial_bound(&inst.f, &inst.scale).unwrap().f_tr;
        for _ in 0..200 {
            let x: Vec<f64> = inst.scale.iter().map(|&s| rng.gen_range(-s..=s)).collect();
            assert!(inst.f.evaluate(&x).unwrap() >= f_tr - 1e-9);
        }
    }
}

#[test]
fn single_variable_remark() {
    let f = common::poly("x1^2 - x1", 1);
    let c = compare_with_gp(&f, &[1.0], 2).unwrap();
    assert_eq!(c.f_tr, -1.0);
    assert!((c.gp_bound.unwrap() + 0.25).abs() <= 1e-4);
    assert_eq!(c.equality_holds, None);
}
