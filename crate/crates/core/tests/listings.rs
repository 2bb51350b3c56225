use fmm_lab::catalog::builtin;
use fmm_lab::slp::{verify_slp, OpCount};
use fmm_lab::{apply_one_level, Dyadic, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ops(a: usize, s: usize) -> OpCount {
    OpCount { additions: a, shifts: s, products: 0 }
}

#[test]
fn accurate_listing_counts() {
    let b = builtin("acc-4x4x4").unwrap();
    let l = b.slp_l.as_ref().unwrap().count_ops();
    let r = b.slp_r.as_ref().unwrap().count_ops();
    let p = b.slp_p.as_ref().unwrap().count_ops();
    assert_eq!(l, ops(104, 0));
    assert_eq!(r, ops(88, 16));
    assert_eq!(p, ops(129, 18));
    assert_eq!((l + r + p).linear_ops(), 355);
    assert_eq!(b.slp_had.as_ref().unwrap().count_ops().products, 48);
}

#[test]
fn winograd_listing_counts() {
    let b = builtin("winograd").unwrap();
    let total = b.slp_l.as_ref().unwrap().count_ops()
        + b.slp_r.as_ref().unwrap().count_ops()
        + b.slp_p.as_ref().unwrap().count_ops();
    assert_eq!(total, ops(15, 0));
}

#[test]
fn listings_compute_the_scheme() {
    let b = builtin("acc-4x4x4").unwrap();
    assert!(verify_slp(b.slp_l.as_ref().unwrap(), b.scheme.l()));
    assert!(verify_slp(b.slp_r.as_ref().unwrap(), b.scheme.r()));
    assert!(verify_slp(b.slp_p.as_ref().unwrap(), b.scheme.p()));
}

#[test]
fn change_of_basis_programs_within_budget() {
    let alt = builtin("acc-4x4x4-alt").unwrap().alt.unwrap();
    let l = alt.cob_l.count_ops();
    let r = alt.cob_r.count_ops();
    let p = alt.cob_p.count_ops();
    eprintln!("cob L {l}, R {r}, P {p}");
    assert_eq!(l.linear_ops(), 103);
    assert!(r.linear_ops() <= 111, "{r}");
    assert!(p.linear_ops() <= 154, "{p}");
    let core = alt.core_l.count_ops() + alt.core_r.count_ops() + alt.core_p.count_ops();
    assert_eq!(core.linear_ops(), 7);
}

#[test]
fn pipeline_matches_matrix_form_on_random_integers() {
    let b = builtin("acc-4x4x4").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let mut gen = || Matrix::from_fn(4, 4, |_, _| Dyadic::from(rng.random_range(-50i64..=50)));
        let (x, y) = (gen(), gen());
        let via_slp = b.apply_slps(&x, &y).unwrap();
        assert_eq!(via_slp, apply_one_level(&b.scheme, &x, &y).unwrap());
        assert_eq!(via_slp, fmm_lab::classical_multiply(&x, &y).unwrap());
    }
}
