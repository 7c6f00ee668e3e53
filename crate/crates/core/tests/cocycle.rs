use ncindex_core::algebra::GroupSpec;
use ncindex_core::cocycle::*;
use ncindex_core::scalar::Q;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smallvec::smallvec;

fn pt(x: &[i64]) -> LatticePoint {
    x.iter().cloned().collect()
}

fn random_lattice_element(rng: &mut ChaCha8Rng, d: usize, window: i64, terms: usize) -> GroupRingElement<LatticePoint> {
    let mut b = GroupRingElement::new();
    for _ in 0..terms {
        let g: LatticePoint = (0..d).map(|_| rng.gen_range(-window..=window)).collect();
        *b.entry(g).or_insert_with(|| Q::from(0)) += Q::from(rng.gen_range(-3i64..=3));
    }
    b
}

fn random_finite_element(rng: &mut ChaCha8Rng, order: usize) -> GroupRingElement<usize> {
    (0..order).map(|g| (g, Q::from(rng.gen_range(-3i64..=3)))).collect()
}

fn all_tuples(order: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out.into_iter().flat_map(|t| (0..order).map(move |g| [t.clone(), vec![g]].concat())).collect();
    }
    out
}

#[test]
fn window_examples_are_exact() {
    let z = Lattice { d: 1 };
    let v = lattice_coordinate(0);
    for k in -6i64..=6 {
        let got = group_cocycle_pairing(&z, &v, Some(&delta(pt(&[-k]))), &[delta(pt(&[k]))]).unwrap();
        assert_eq!(got, Q::from(k));
        // mismatched support: the single summand needs b₀ at -k
        let off = group_cocycle_pairing(&z, &v, Some(&delta(pt(&[1 - k]))), &[delta(pt(&[k]))]).unwrap();
        assert_eq!(off, Q::from(0));
    }
    let zero = GroupCocycle::new("zero", 1, true, |_: &[LatticePoint]| Q::from(0));
    assert_eq!(group_cocycle_pairing(&z, &zero, Some(&delta(pt(&[-2]))), &[delta(pt(&[2]))]).unwrap(), Q::from(0));
    assert_eq!(group_cocycle_pairing(&z, &v, None, &[delta(pt(&[2]))]).unwrap(), Q::from(0));
    assert!(group_cocycle_pairing(&z, &v, Some(&delta(pt(&[0]))), &[]).is_err());
}

#[test]
fn determinant_pairing_on_z2() {
    let z2 = Lattice { d: 2 };
    let v = lattice_determinant();
    let (a, b) = (pt(&[2, 1]), pt(&[-1, 3]));
    let b0 = delta(pt(&[-1, -4]));
    // φ(δ_{-(a+b)} dδ_a dδ_b) = v(b, a) = det(b, a)
    let got = group_cocycle_pairing(&z2, &v, Some(&b0), &[delta(a), delta(b)]).unwrap();
    assert_eq!(got, Q::from(-7));
}

#[test]
fn standard_cocycles_satisfy_the_cocycle_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let z = Lattice { d: 1 };
    let tuples: Vec<Vec<LatticePoint>> = (0..200).map(|_| (0..2).map(|_| smallvec![rng.gen_range(-9..=9)]).collect()).collect();
    assert_eq!(lattice_coordinate(0).cocycle_defect(&z, &tuples).unwrap(), Q::from(0));
    let z2 = Lattice { d: 2 };
    let tuples: Vec<Vec<LatticePoint>> =
        (0..200).map(|_| (0..3).map(|_| smallvec![rng.gen_range(-9..=9), rng.gen_range(-9..=9)]).collect()).collect();
    assert_eq!(lattice_determinant().cocycle_defect(&z2, &tuples).unwrap(), Q::from(0));
    let normal: Vec<Vec<LatticePoint>> = vec![vec![pt(&[0, 0]), pt(&[1, 2])], vec![pt(&[3, 1]), pt(&[-3, -1])]];
    assert!(lattice_determinant().check_normalized(&z2, &normal).is_ok());

    let g = GroupSpec::cyclic(4);
    let u = vec![Q::from(0), Q::from(5), Q::from(0), Q::from(-5)];
    let v = finite_coboundary(&g, u).unwrap();
    assert!(v.normalized);
    assert_eq!(v.cocycle_defect(&g, &all_tuples(4, 3)).unwrap(), Q::from(0));
    assert!(v.check_normalized(&g, &all_tuples(4, 2)).is_ok());
    let bad = finite_coboundary(&g, vec![Q::from(0), Q::from(1), Q::from(2), Q::from(3)]).unwrap();
    assert!(!bad.normalized && bad.check_normalized(&g, &all_tuples(4, 2)).is_err());
}

#[test]
fn cyclic_and_closed_on_the_window() {
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    let z = Lattice { d: 1 };
    let v = lattice_coordinate(0);
    for _ in 0..30 {
        let args: Vec<_> = (0..3).map(|_| random_lattice_element(&mut rng, 1, 5, 4)).collect();
        assert_eq!(cyclicity_defect(&z, &v, &args[..2]).unwrap(), Q::from(0));
        assert_eq!(hochschild_defect(&z, &v, &args).unwrap(), Q::from(0));
    }
    let z2 = Lattice { d: 2 };
    let v = lattice_determinant();
    for _ in 0..20 {
        let args: Vec<_> = (0..4).map(|_| random_lattice_element(&mut rng, 2, 3, 4)).collect();
        assert_eq!(cyclicity_defect(&z2, &v, &args[..3]).unwrap(), Q::from(0));
        assert_eq!(hochschild_defect(&z2, &v, &args).unwrap(), Q::from(0));
    }
}

#[test]
fn cyclic_and_closed_over_z4() {
    let mut rng = ChaCha8Rng::seed_from_u64(63);
    let g = GroupSpec::cyclic(4);
    // Normalized 1-cocycles with trivial complex coefficients on a finite group are zero.
    let zero = GroupCocycle::new("zero", 1, true, |_: &[usize]| Q::from(0));
    let v = finite_coboundary(&g, vec![Q::from(0), Q::from(2), Q::from(0), Q::from(-2)]).unwrap();
    for _ in 0..30 {
        let args: Vec<_> = (0..4).map(|_| random_finite_element(&mut rng, 4)).collect();
        assert_eq!(cyclicity_defect(&g, &zero, &args[..2]).unwrap(), Q::from(0));
        assert_eq!(hochschild_defect(&g, &zero, &args[..3]).unwrap(), Q::from(0));
        assert_eq!(cyclicity_defect(&g, &v, &args[..3]).unwrap(), Q::from(0));
        assert_eq!(hochschild_defect(&g, &v, &args).unwrap(), Q::from(0));
    }
}

#[test]
fn non_cocycles_fail_the_checks() {
    // Normalized but not a cocycle: v(g) = g² on Z is not additive.
    let z = Lattice { d: 1 };
    let v = GroupCocycle::new("square", 1, true, |g: &[LatticePoint]| Q::from(g[0][0] * g[0][0]));
    let tuples = vec![vec![pt(&[1]), pt(&[2])]];
    assert!(v.cocycle_defect(&z, &tuples).unwrap() > 0);
    let args = vec![delta(pt(&[1])), delta(pt(&[2])), delta(pt(&[-3]))];
    assert_ne!(hochschild_defect(&z, &v, &args).unwrap(), Q::from(0));
}

#[test]
fn convolution_reverses_the_group_law() {
    let g = GroupSpec::from_table(
        vec![vec![0, 1, 2, 3, 4, 5], vec![1, 2, 0, 5, 3, 4], vec![2, 0, 1, 4, 5, 3], vec![3, 4, 5, 0, 1, 2], vec![4, 5, 3, 2, 0, 1], vec![5, 3, 4, 1, 2, 0]],
        "S3",
    )
    .unwrap();
    for (a, b) in [(1usize, 3usize), (3, 1), (4, 5)] {
        let p = group_ring_mul(&g, &delta(a), &delta(b));
        assert_eq!(p, delta(g.mul(b, a)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn det_phi_is_cyclic(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z2 = Lattice { d: 2 };
        let args: Vec<_> = (0..3).map(|_| random_lattice_element(&mut rng, 2, 2, 3)).collect();
        prop_assert_eq!(cyclicity_defect(&z2, &lattice_determinant(), &args).unwrap(), Q::from(0));
    }
}
