//! Worked examples with values derived by hand (or by an independent dense
//! computation) and frozen here.

use std::f64::consts::PI;

use qdilate::ando::{
    special_ando_tuple, star_ando_tuple, verify_prop1, verify_prop2, verify_tuple,
};
use qdilate::hardy::{
    extract_symbol, materialize, obs_op, obs_tail_identity, symbol_compose, symbol_is_inner,
    TwistedSymbol,
};
use qdilate::lifts::{douglas_lift, nonisolifts_fixture, schaffer_lift, verify_lift};
use qdilate::matcore::{
    c64, cis, complete_to_unitary, defect, identity, power_limit, psd_sqrt, CMatrix, SubspaceBasis,
    C64,
};
use qdilate::model::{
    canonical_unitary_pair, canonicity_transport, char_fn, char_triple, delta_fn, fundamental_ops,
    model_compress, model_space, verify_admissible, verify_coincidence, verify_unique_canonical,
    CharFunction, DiskGrid,
};
use qdilate::pseudolift::{douglas_pseudo_lift, is_pseudo_lift, is_pseudo_triple, PseudoTriple};
use qdilate::qpair::{
    cnu_decompose, gen_clock_shift, gen_conjugated, gen_direct_sum, gen_nilpotent, QPair,
};
use qdilate::Error;

fn diag(entries: &[C64]) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(entries))
}

fn real(x: f64) -> C64 {
    c64(x, 0.0)
}

fn scalar_pair(c: f64) -> QPair {
    QPair::validate(real(1.0), diag(&[real(c)]), diag(&[real(1.0)]), 1e-12).unwrap()
}

#[test]
fn psd_sqrt_of_random_gram() {
    let a = CMatrix::from_fn(5, 5, |r, c| {
        c64(
            (r as f64 + 1.0) * 0.3 - c as f64 * 0.2,
            (r * c) as f64 * 0.1 - 0.4,
        )
    });
    let h = &a * a.adjoint();
    let s = psd_sqrt(&h, 1e-10).unwrap();
    assert!((&s * &s - &h).norm() < 1e-10);
    assert!((&s - s.adjoint()).norm() < 1e-12);
}

#[test]
fn completion_sends_second_axis_to_first() {
    let e0 = CMatrix::from_column_slice(2, 1, &[real(1.0), real(0.0)]);
    let e1 = CMatrix::from_column_slice(2, 1, &[real(0.0), real(1.0)]);
    let source = SubspaceBasis::new(e1.clone()).unwrap();
    let target = SubspaceBasis::new(e0.clone()).unwrap();
    let partial = &e0 * e1.adjoint();
    let u = complete_to_unitary(&source, &target, &partial).unwrap();
    assert!((u.adjoint() * &u - identity(2)).norm() < 1e-12);
    assert!((&u * &e1 - &e0).norm() < 1e-12);
}

#[test]
fn power_limit_keeps_the_unimodular_diagonal() {
    let a = power_limit(&diag(&[real(1.0), real(0.5)]), 1e-14, 64).unwrap();
    assert!((a - diag(&[real(1.0), real(0.0)])).norm() < 1e-12);
}

#[test]
fn generators_fix_the_twist() {
    assert_eq!(gen_clock_shift(1, 0.7).unwrap().q(), real(1.0));
    let p3 = gen_clock_shift(3, 1.0).unwrap();
    assert!((p3.q() - cis(2.0 * PI / 3.0)).norm() < 1e-15);
    let t = p3.product();
    assert!((t.adjoint() * &t - identity(3)).norm() < 1e-12);
    let p2 = gen_clock_shift(2, 0.5).unwrap();
    assert!((p2.q() - real(-1.0)).norm() < 1e-15);
    assert!(gen_nilpotent(2, c64(0.0, 1.0), real(1.0), real(1.0)).is_ok());
    assert!(gen_nilpotent(3, cis(1.0), real(0.9), real(0.9)).is_ok());
    for q in [cis(0.3), cis(2.9), real(-1.0)] {
        assert!(gen_nilpotent(4, q, real(0.0), real(0.8)).is_ok());
    }
}

#[test]
fn conjugation_preserves_product_spectrum() {
    let pair = gen_nilpotent(3, cis(1.0), real(0.9), c64(0.3, 0.5)).unwrap();
    let (conj, w) = gen_conjugated(&pair, 11).unwrap();
    let back = w.adjoint() * conj.product() * &w;
    assert!((back - pair.product()).norm() < 1e-12);
    let mut a: Vec<f64> = qdilate::matcore::singular_values(&pair.product());
    let mut b: Vec<f64> = qdilate::matcore::singular_values(&conj.product());
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn unitary_plus_nilpotent_splits() {
    let u = gen_clock_shift(2, 1.0).unwrap();
    let n = gen_nilpotent(3, real(-1.0), real(0.9), real(0.7)).unwrap();
    let pair = gen_direct_sum(&[u, n]).unwrap();
    let split = cnu_decompose(&pair.product(), 1e-8).unwrap();
    assert_eq!(split.unitary_part.dim(), 2);
    assert_eq!(split.cnu_part.dim(), 3);
    assert!(gen_direct_sum(&[]).is_err());
}

#[test]
fn zero_pair_tuple_by_hand() {
    // (0,0) on C: D_T = D_T1 = D_T2 = 1, Λ(1) = (0, 1), U(0, 1) = (1, 0).
    let pair = QPair::zero(1, cis(0.4)).unwrap();
    let t = special_ando_tuple(&pair).unwrap();
    let expected = CMatrix::from_column_slice(2, 1, &[real(0.0), real(1.0)]);
    assert!((&t.lambda - &expected).norm() < 1e-15);
    let image = &t.u * &expected;
    assert!((image - CMatrix::from_column_slice(2, 1, &[real(1.0), real(0.0)])).norm() < 1e-15);
    assert!(verify_prop1(&t, &pair, 1e-12).passed());
}

#[test]
fn clock_shift_half_tuple_is_valid() {
    let pair = gen_clock_shift(2, 0.5).unwrap();
    let t = special_ando_tuple(&pair).unwrap();
    assert!(verify_tuple(&t, &pair, 1e-10).passed());
    // D_T1² = D_T2² = 0.75·I, D_T² = (1 − 0.0625)·I.
    assert_eq!((t.defect1.dim(), t.defect2.dim(), t.d_dim()), (2, 2, 2));
    let s = star_ando_tuple(&pair).unwrap();
    assert!(verify_prop2(&s, &pair, 1e-10).passed());
}

#[test]
fn shift_twist_composition() {
    // (M_z R_q)(M_z R_q) = M_z (q M_z R_q) R_q = q M_{z²} R_{q²}.
    let q = cis(0.7);
    let s = TwistedSymbol::new(q, 1, vec![qdilate::matcore::zeros(2, 2), identity(2)]).unwrap();
    let ss = symbol_compose(&s, &s).unwrap();
    assert_eq!(ss.twist(), 2);
    assert_eq!(ss.degree(), 2);
    assert!(ss.coeffs()[0].norm() < 1e-15 && ss.coeffs()[1].norm() < 1e-15);
    assert!((&ss.coeffs()[2] - identity(2) * q).norm() < 1e-15);
}

#[test]
fn projection_pencil_is_inner() {
    let p = diag(&[real(1.0), real(0.0), real(1.0)]);
    let u = qdilate::qpair::random_unitary(3, 5);
    let pp = identity(3) - &p;
    let s = TwistedSymbol::new(real(1.0), 0, vec![&pp * &u, &p * &u]).unwrap();
    let (inner, resid) = symbol_is_inner(&s);
    assert!(inner && resid < 1e-12);
}

#[test]
fn pencil_matrix_at_degree_one() {
    let q = cis(1.0);
    let a = CMatrix::from_row_slice(1, 1, &[c64(0.2, 0.1)]);
    let b = CMatrix::from_row_slice(1, 1, &[c64(-0.5, 0.3)]);
    let m = materialize(
        &TwistedSymbol::new(q, 1, vec![a.clone(), b.clone()]).unwrap(),
        1,
    )
    .unwrap()
    .matrix;
    let want = CMatrix::from_row_slice(2, 2, &[a[(0, 0)], real(0.0), b[(0, 0)], q * a[(0, 0)]]);
    assert!((m - want).norm() < 1e-15);
}

#[test]
fn observability_of_a_half() {
    let t = diag(&[real(0.5)]);
    let ds = defect(&t.adjoint(), None).unwrap();
    let o = obs_op(&t, &ds, 5);
    for n in 0..=5 {
        let want = 0.75f64.sqrt() * 0.5f64.powi(n as i32);
        assert!((o[(n, 0)].norm() - want).abs() < 1e-15);
    }
    let h = CMatrix::from_column_slice(1, 1, &[real(1.0)]);
    let (lhs, rhs) = obs_tail_identity(&t, 3, &h).unwrap();
    assert!((lhs - (1.0 - 0.5f64.powi(8))).abs() < 1e-15);
    assert!((rhs - (1.0 - 0.5f64.powi(8))).abs() < 1e-15);
}

#[test]
fn symbol_extraction() {
    let q = cis(2.0);
    let zr = TwistedSymbol::new(q, 1, vec![qdilate::matcore::zeros(2, 2), identity(2)]).unwrap();
    let a = materialize(&zr, 6).unwrap().matrix;
    let (s, resid) = extract_symbol(&a, 2, q, 6, 1e-12).unwrap();
    assert_eq!(s.degree(), 1);
    assert!(s.coeffs()[0].norm() < 1e-15 && (&s.coeffs()[1] - identity(2)).norm() < 1e-15);
    assert!(resid < 1e-15);
    let u = qdilate::qpair::random_unitary(14, 3);
    assert!(matches!(
        extract_symbol(&u, 2, q, 6, 1e-9),
        Err(Error::NotQCommutant { .. })
    ));
}

#[test]
fn clock_shift_lifts_at_sixteen() {
    let pair = gen_clock_shift(3, 0.9).unwrap();
    let t = special_ando_tuple(&pair).unwrap();
    let s = star_ando_tuple(&pair).unwrap();
    assert!(
        verify_lift(&schaffer_lift(&pair, &t, 16).unwrap(), &pair, 1e-10)
            .unwrap()
            .passed()
    );
    assert!(
        verify_lift(&douglas_lift(&pair, &s, 16).unwrap(), &pair, 1e-9)
            .unwrap()
            .passed()
    );
}

#[test]
fn example_discriminators() {
    // Pair A: V2V1* − qV1*V2 = −P₀ on degrees ≤ N−1, Frobenius norm 1.
    let fx = nonisolifts_fixture(8, cis(1.0)).unwrap();
    assert!((fx.discriminator_a - 1.0).abs() < 1e-12);
    assert!(fx.discriminator_b < 1e-12);
    assert!(fx.checks.passed());
    assert!(nonisolifts_fixture(2, cis(1.0)).unwrap().checks.passed());
    assert!(matches!(
        nonisolifts_fixture(1, cis(1.0)),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn nilpotent_fundamentals_by_hand() {
    // n = 2, q = i, c = d = 0.8: T = cdq·E₁₀, D_{T*}² = diag(1, 1 − 0.4096),
    // D G₁ D = 0.288·E₀₁ and D G₂ D = 0.8·diag(−i, 0.36).
    let q = c64(0.0, 1.0);
    let pair = gen_nilpotent(2, q, real(0.8), real(0.8)).unwrap();
    let fp = fundamental_ops(&pair).unwrap();
    let b = fp.defect_star.basis.columns();
    let g1 = b * &fp.g1 * b.adjoint();
    let g2 = b * &fp.g2 * b.adjoint();
    let r = 0.5904f64.sqrt();
    let want1 = CMatrix::from_row_slice(2, 2, &[real(0.0), real(0.288 / r), real(0.0), real(0.0)]);
    let want2 = diag(&[c64(0.0, -0.8), real(0.288 / 0.5904)]);
    assert!((g1 - want1).norm() < 1e-12);
    assert!((g2 - want2).norm() < 1e-12);
}

#[test]
fn canonical_pair_of_unitary_plus_nilpotent() {
    let u = gen_clock_shift(2, 1.0).unwrap();
    let n = gen_nilpotent(2, real(-1.0), real(0.6), real(0.9)).unwrap();
    let pair = gen_direct_sum(&[u.clone(), n]).unwrap();
    let cp = canonical_unitary_pair(&pair).unwrap();
    assert_eq!(cp.dim(), 2);
    let y = cp.coords();
    // Y = R*Q reads the first two coordinates; W_i = Y T_i Y* there.
    let embed = |m: &CMatrix| {
        &y * qdilate::matcore::block_diag(&[m, &qdilate::matcore::zeros(2, 2)]) * y.adjoint()
    };
    assert!((&cp.w1 - embed(u.t1())).norm() < 1e-10);
    assert!((&cp.w2 - embed(u.t2())).norm() < 1e-10);
}

#[test]
fn canonicity_transport_cases() {
    let pair = gen_clock_shift(3, 1.0).unwrap();
    assert!(canonicity_transport(&pair, &pair, &identity(3), 1e-12)
        .unwrap()
        .passed());
    let (conj, w) = gen_conjugated(&pair, 4).unwrap();
    assert!(canonicity_transport(&pair, &conj, &w, 1e-10)
        .unwrap()
        .passed());
    let bad = qdilate::qpair::random_unitary(3, 99);
    assert!(matches!(
        canonicity_transport(&pair, &conj, &bad, 1e-10),
        Err(Error::NotIntertwiner { .. })
    ));
}

#[test]
fn unique_canonical_pair() {
    let pair = gen_clock_shift(2, 1.0).unwrap();
    let cp = canonical_unitary_pair(&pair).unwrap();
    assert!(verify_unique_canonical(&pair, &cp.w1, &cp.w2).unwrap().0);
    let rotated = &cp.w1 * cis(0.1);
    let (ok, checks) = verify_unique_canonical(&pair, &rotated, &cp.w2).unwrap();
    assert!(!ok && !checks.passed());
    let cnu = gen_nilpotent(3, cis(0.5), real(0.9), real(0.9)).unwrap();
    let empty = qdilate::matcore::zeros(0, 0);
    assert!(verify_unique_canonical(&cnu, &empty, &empty).unwrap().0);
}

#[test]
fn blaschke_values() {
    // Θ(z) = (z − c)/(1 − cz); at c = 0.5, z = 0.3 + 0.4i this is
    // (−0.2 + 0.4i)/(0.85 − 0.2i) = (−0.25 + 0.3i)/0.7625.
    let t = diag(&[real(0.5)]);
    let th = char_fn(&t, c64(0.3, 0.4)).unwrap();
    let want = c64(-0.25 / 0.7625, 0.3 / 0.7625);
    assert!((th[(0, 0)].norm() - want.norm()).abs() < 1e-15);
    let f = CharFunction::new(&t).unwrap();
    let phase = f.defect_star().basis.columns()[(0, 0)].conj() * f.defect().basis.columns()[(0, 0)];
    assert!((th[(0, 0)] * phase - want).norm() < 1e-15);
    let zero = char_fn(&qdilate::matcore::zeros(3, 3), c64(0.2, -0.6)).unwrap();
    assert!((zero - identity(3) * c64(0.2, -0.6)).norm() < 1e-15);
    for k in 0..64 {
        let zeta = cis(2.0 * PI * k as f64 / 64.0);
        assert!(delta_fn(&t, zeta).unwrap().norm() < 1e-8);
        assert!(
            delta_fn(&qdilate::matcore::zeros(2, 2), zeta)
                .unwrap()
                .norm()
                < 1e-8
        );
    }
}

#[test]
fn characteristic_triple_cases() {
    let zero = char_triple(&QPair::zero(1, cis(0.3)).unwrap()).unwrap();
    assert!(zero.fundamental.g1.norm() < 1e-15 && zero.fundamental.g2.norm() < 1e-15);
    assert_eq!(zero.unitary.dim(), 0);
    assert!(
        (zero.theta.eval(c64(0.5, 0.1)).unwrap()[(0, 0)].norm() - c64(0.5, 0.1).norm()).abs()
            < 1e-15
    );
    let nil = char_triple(&gen_nilpotent(3, cis(1.0), real(0.9), real(0.9)).unwrap()).unwrap();
    assert_eq!(nil.unitary.dim(), 0);
    assert!(matches!(
        char_triple(&gen_clock_shift(2, 1.0).unwrap()),
        Err(Error::NotCnu { unitary_dim: 2 })
    ));
}

#[test]
fn model_space_and_compression_of_scalars() {
    let t = diag(&[real(0.5)]);
    let ds = defect(&t.adjoint(), None).unwrap();
    let (basis, _) = model_space(&t, &ds, 40).unwrap();
    assert_eq!(basis.dim(), 1);
    // Normalized geometric column √0.75·(1, 0.5, 0.25, …).
    for n in 0..5 {
        let want = 0.75f64.sqrt() * 0.5f64.powi(n);
        assert!((basis.columns()[(n as usize, 0)].norm() - want).abs() < 1e-10);
    }
    let tz = qdilate::matcore::zeros(2, 2);
    let (bz, _) = model_space(&tz, &defect(&tz, None).unwrap(), 3).unwrap();
    assert_eq!(bz.dim(), 2);
    assert!(bz.columns().rows(2, 6).norm() < 1e-15);

    let mc = model_compress(&QPair::zero(1, cis(1.0)).unwrap(), 2).unwrap();
    assert_eq!(mc.m1.shape(), (1, 1));
    assert!(mc.m1.norm() < 1e-15 && mc.m2.norm() < 1e-15);
    let mc = model_compress(&scalar_pair(0.6), 60).unwrap();
    assert!((mc.m1[(0, 0)] - real(0.6)).norm() < 1e-10);
    assert!((mc.m2[(0, 0)] - real(1.0)).norm() < 1e-10);
}

#[test]
fn coincidence_cases() {
    let grid = DiskGrid::default();
    let a = char_triple(&scalar_pair(0.3)).unwrap();
    let b = char_triple(&scalar_pair(0.4)).unwrap();
    let one = identity(1);
    assert!(verify_coincidence(&a, &a, &one, &one, &grid, 1e-12)
        .unwrap()
        .passed());
    let mut worst = f64::INFINITY;
    for k in 0..8 {
        let (u, us) = (
            identity(1) * cis(k as f64),
            identity(1) * cis(0.7 * k as f64),
        );
        let c = verify_coincidence(&a, &b, &u, &us, &grid, 1e-9).unwrap();
        worst = worst.min(c.get("coincide.theta").unwrap().residual);
    }
    assert!(worst > 1e-2);
}

#[test]
fn admissibility_cases() {
    let z = qdilate::matcore::zeros(2, 2);
    let theta = vec![z.clone(), identity(2)];
    let ad = verify_admissible(&z, &z, &theta, cis(1.0), 6, 1e-10).unwrap();
    assert!(ad.checks.passed());
    assert_eq!(ad.h_dim, 2);
    let ad = verify_admissible(&identity(2), &identity(2), &theta, cis(1.0), 6, 1e-10).unwrap();
    assert!(!ad.checks.get("admissible.cond1").unwrap().pass);
}

#[test]
fn pseudo_triple_examples() {
    let pair = gen_nilpotent(3, cis(1.0), c64(0.7, 0.2), c64(0.5, -0.6)).unwrap();
    let d = douglas_pseudo_lift(&pair, 10).unwrap();
    assert!(is_pseudo_triple(&d.triple, 1e-10).passed());
    assert!(is_pseudo_lift(&d.pi, &d.triple, &pair, 1e-10)
        .unwrap()
        .passed());
    let swapped = PseudoTriple {
        w1: d.triple.w2.clone(),
        w2: d.triple.w1.clone(),
        ..d.triple.clone()
    };
    let r = is_pseudo_triple(&swapped, 1e-10);
    assert!(r.get("pseudo.factor").unwrap().residual > 0.1);
    let zeroed = PseudoTriple {
        w1: d.triple.w1.clone() * real(0.0),
        w2: d.triple.w2.clone() * real(0.0),
        ..d.triple.clone()
    };
    assert!(is_pseudo_triple(&zeroed, 1e-10).passed());
    let bumped = qdilate::pseudolift::perturb_corner(&d.triple, 0.1);
    assert!(!is_pseudo_lift(&d.pi, &bumped, &pair, 1e-10)
        .unwrap()
        .passed());
    let narrowed = qdilate::pseudolift::restrict_embedding(&d.pi, 1);
    let r = is_pseudo_lift(&narrowed, &d.triple, &pair, 1e-10).unwrap();
    assert!(!r.get("pseudo.lift.minimal").unwrap().pass);
}
