use nalgebra::SymmetricEigen;
use ncindex_core::algebra::{GroupSpec, Haar};
use ncindex_core::assembly::*;
use ncindex_core::chern::{canonical_idempotent, cutoff_function, CutOff};
use ncindex_core::scalar::{q_to_f64, C64};
use ncindex_core::spectral::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn random_mat<R: Rng>(rng: &mut R, r: usize, k: usize) -> CMat {
    CMat::from_fn(r, k, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn scalar(x: f64) -> CMat {
    CMat::from_element(1, 1, c(x, 0.0))
}

#[test]
fn lift_examples() {
    let t = parametrix_lift(&AlmostInvertiblePair::new(scalar(1.0), scalar(1.0)).unwrap()).unwrap();
    let swap = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
    assert!(max_abs(&(t - swap)) < 1e-15);
    let t = parametrix_lift(&AlmostInvertiblePair::new(scalar(0.0), scalar(0.0)).unwrap()).unwrap();
    let sign = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
    assert!(max_abs(&(t - sign)) < 1e-15);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10 {
        let pair = AlmostInvertiblePair::with_pseudo_inverse(random_mat(&mut rng, 3, 2)).unwrap();
        let t = parametrix_lift(&pair).unwrap();
        assert!(max_abs(&(&t * &t - CMat::identity(5, 5))) <= 1e-10);
    }
}

#[test]
fn index_examples() {
    let q = CMat::from_row_slice(1, 2, &[c(1.0, 0.0), c(0.0, 0.0)]);
    assert_eq!(index_class(&AlmostInvertiblePair::with_pseudo_inverse(q).unwrap()).unwrap().index, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let q = random_mat(&mut rng, 3, 3);
    assert_eq!(index_class(&AlmostInvertiblePair::with_pseudo_inverse(q).unwrap()).unwrap().index, 0);
    for (p, q) in [(3usize, 1usize), (1, 4), (2, 2)] {
        let pair = AlmostInvertiblePair::new(CMat::zeros(q, p), CMat::zeros(p, q)).unwrap();
        let class = index_class(&pair).unwrap();
        assert_eq!(class.index, p as i64 - q as i64);
        // e1 = diag(1, 0) blocks when Q = 0.
        assert!(max_abs(&(&class.e1 - &class.e1 * &class.e1)) < 1e-15);
        assert_eq!(class.e1.trace().re, p as f64);
    }
}

#[test]
fn index_is_independent_of_the_parametrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..25 {
        let (p, q) = (rng.gen_range(1..5usize), rng.gen_range(1..5usize));
        // Rank-deficient Q so the kernels are nontrivial on both sides.
        let r = rng.gen_range(0..=p.min(q));
        let qm = random_mat(&mut rng, q, r) * random_mat(&mut rng, r, p);
        let base = index_class(&AlmostInvertiblePair::with_pseudo_inverse(qm.clone()).unwrap()).unwrap();
        let pinv = AlmostInvertiblePair::with_pseudo_inverse(qm.clone()).unwrap().p;
        let k = random_mat(&mut rng, p, q);
        let moved = index_class(&AlmostInvertiblePair::new(qm, pinv + k).unwrap()).unwrap();
        assert_eq!(base.index, moved.index);
        worst = worst.max((base.trace - moved.trace).abs());
    }
    assert!(worst <= 1e-8, "{worst:e}");
}

fn free_z2(haar: Haar) -> SpectralModel {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    random_finite_model(&mut rng, Parity::Even, true, haar)
}

fn squares(cut: &CutOff, points: usize) -> Vec<f64> {
    (0..points).map(|x| q_to_f64(&cut.pair(x, x))).collect()
}

fn average<R: Rng>(rng: &mut R, model: &SpectralModel) -> CMat {
    let n = model.dim();
    let m = random_mat(rng, n, n);
    let mut t = CMat::zeros(n, n);
    for r in &model.rep {
        t += r.adjoint() * &m * r;
    }
    t / c(model.rep.len() as f64, 0.0)
}

#[test]
fn theta_of_one_is_the_canonical_idempotent() {
    for haar in [Haar::Counting, Haar::Normalized] {
        let m = free_z2(haar);
        let ma = m.model_algebra().unwrap();
        let gset = ma.gset.clone().unwrap();
        let cut = cutoff_function(&m.group, &gset, haar).unwrap();
        let cm = cutoff_matrix(&m, &squares(&cut, gset.points())).unwrap();
        let theta = theta_map(&CMat::identity(4, 4), &m, &cm);
        let (_, e) = canonical_idempotent(&m.group, &gset, haar, &cut).unwrap();
        let mut expect = vec![CMat::zeros(4, 4); 2];
        for (l, v) in e.coeffs.iter().enumerate() {
            for (g, mat) in m.rho_letter(&ma, l as u32).unwrap() {
                expect[g] += mat * c(q_to_f64(v), 0.0);
            }
        }
        for g in 0..2 {
            assert!(max_abs(&(&theta[g] - &expect[g])) < 1e-14);
        }
        let zero = theta_map(&CMat::zeros(4, 4), &m, &cm);
        assert!(zero.iter().all(|z| max_abs(z) == 0.0));
    }
}

#[test]
fn theta_is_multiplicative_on_invariant_operators() {
    let m = free_z2(Haar::Counting);
    let gset = m.infer_gset().unwrap().unwrap();
    let cut = cutoff_function(&m.group, &gset, m.haar).unwrap();
    let cm = cutoff_matrix(&m, &squares(&cut, gset.points())).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let (t1, t2) = (average(&mut rng, &m), average(&mut rng, &m));
        let r = theta_homomorphism_residual(&t1, &t2, &m, &cm).unwrap();
        assert!(r <= 1e-10, "{r:e}");
    }
    // A constant c = 1 on a free Z/2 with counting measure is not a cut-off.
    let bad = CMat::identity(4, 4);
    assert!(theta_homomorphism_residual(&CMat::identity(4, 4), &CMat::identity(4, 4), &m, &bad).is_none());
}

/// Even template with G = Z/2 acting by diag signs on each chirality, D = 0.
fn z2_template(plus: &[f64], minus: &[f64]) -> SpectralModel {
    let n = plus.len() + minus.len();
    let grading: Vec<f64> = (0..n).map(|i| if i < plus.len() { 1.0 } else { -1.0 }).collect();
    let diag: Vec<C64> = plus.iter().chain(minus).map(|&s| c(s, 0.0)).collect();
    SpectralModel::new(
        "z2-template",
        Parity::Even,
        Some(grading),
        CMat::zeros(n, n),
        GroupSpec::cyclic(2),
        Haar::Normalized,
        vec![CMat::identity(n, n), CMat::from_diagonal(&nalgebra::DVector::from_vec(diag))],
        FunctionRep::ConstantsOnly,
    )
    .unwrap()
}

/// Tr(r(g) on ker Q) - Tr(r(g) on ker Q*), kernels from the spectrum of Q*Q and QQ*.
fn kernel_character(q: &CMat, rp: &[f64], rm: &[f64]) -> f64 {
    let part = |m: CMat, r: &[f64]| -> f64 {
        let eig = SymmetricEigen::new(m);
        let mut s = 0.0;
        for (k, l) in eig.eigenvalues.iter().enumerate() {
            if l.abs() < 1e-9 {
                let v = eig.eigenvectors.column(k);
                s += v.iter().zip(r).map(|(z, x)| z.norm_sqr() * x).sum::<f64>();
            }
        }
        s
    };
    part(q.adjoint() * q, rp) - part(q * q.adjoint(), rm)
}

#[test]
fn pushed_index_on_trivial_group() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for (p, q) in [(3usize, 1usize), (2, 4)] {
        let m = index_model(&mut rng, p, q);
        let dp = CMat::from_fn(q, p, |i, j| m.dirac[(p + i, j)]);
        let pair = AlmostInvertiblePair::with_pseudo_inverse(dp).unwrap();
        let cm = cutoff_matrix(&m, &[1.0]).unwrap();
        let v = assembly_index_pushed(&pair, &m, &cm).unwrap();
        assert_eq!(v.len(), 1);
        assert!((v[0] - c(p as f64 - q as f64, 0.0)).norm() < 1e-10);
    }
}

#[test]
fn pushed_index_matches_kernel_character_and_heat_trace() {
    let rp = [1.0, 1.0, -1.0, -1.0];
    let rm = [1.0, -1.0, -1.0];
    let template = z2_template(&rp, &rm);
    let cm = cutoff_matrix(&template, &[1.0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        // Q respects the eigenspaces of r; block ranks vary with k.
        let mut q = CMat::zeros(3, 4);
        for i in 0..3 {
            for j in 0..4 {
                if rm[i] == rp[j] && !(k % 3 == 0 && rm[i] < 0.0) {
                    q[(i, j)] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                }
            }
        }
        let pair = AlmostInvertiblePair::with_pseudo_inverse(q.clone()).unwrap();
        let pushed = assembly_index_pushed(&pair, &template, &cm).unwrap();
        let model = pair_model(&pair, &template).unwrap();
        for g in 0..2 {
            let signs_p: Vec<f64> = rp.iter().map(|s| if g == 0 { 1.0 } else { *s }).collect();
            let signs_m: Vec<f64> = rm.iter().map(|s| if g == 0 { 1.0 } else { *s }).collect();
            let ch = kernel_character(&q, &signs_p, &signs_m);
            worst = worst.max((pushed[g] - c(ch, 0.0)).norm());
            worst = worst.max((pushed[g] - equivariant_trace(&model, g, 0.8)).norm());
        }
        let ms = mckean_singer(&model, &[0.3, 1.0, 2.0], 1e-9).unwrap();
        assert!(ms.pass);
        assert!((pushed[0].re - ms.rank_index as f64).abs() < 1e-10);
    }
    assert!(worst < 1e-9, "{worst:e}");
}

#[test]
fn pushed_index_rejects_non_equivariant_pairs() {
    let template = z2_template(&[1.0, -1.0], &[1.0]);
    let q = CMat::from_row_slice(1, 2, &[c(1.0, 0.0), c(1.0, 0.0)]);
    let pair = AlmostInvertiblePair::with_pseudo_inverse(q).unwrap();
    assert!(assembly_index_pushed(&pair, &template, &CMat::identity(3, 3)).is_err());
}

#[test]
fn external_product_examples() {
    let c1 = circle_model(2, 1, 1, 0.0);
    let zero = SpectralModel::new(
        "zero",
        Parity::Odd,
        None,
        CMat::zeros(2, 2),
        GroupSpec::trivial(),
        Haar::Normalized,
        vec![CMat::identity(2, 2)],
        FunctionRep::ConstantsOnly,
    )
    .unwrap();
    let p = external_product_oddodd(&c1, &zero).unwrap();
    let d1sq = (&c1.dirac * &c1.dirac).kronecker(&CMat::identity(2, 2));
    let k = d1sq.nrows();
    let sq = &p.dirac * &p.dirac;
    assert!(max_abs(&(sq.view((0, 0), (k, k)) - &d1sq)) < 1e-12);
    assert!(max_abs(&(sq.view((k, k), (k, k)) - &d1sq)) < 1e-12);

    let c2 = circle_model(1, 1, 1, 0.0);
    let p = external_product_oddodd(&c1, &c2).unwrap();
    let mut got: Vec<f64> = p.eigenvalues().to_vec();
    got.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut expect = Vec::new();
    for n in -2i64..=2 {
        for m in -1i64..=1 {
            let r = ((n * n + m * m) as f64).sqrt();
            expect.push(r);
            expect.push(-r);
        }
    }
    expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (a, b) in got.iter().zip(&expect) {
        assert!((a - b).abs() < 1e-12);
    }

    // Kernel of D1 + i D2 is the product of the factors' kernels; the index vanishes.
    for (t1, t2) in [(0.0, 0.0), (0.5, 0.0), (-1.0, 1.0)] {
        let a = circle_model(2, 1, 1, t1);
        let b = circle_model(2, 1, 1, t2);
        let p = external_product_oddodd(&a, &b).unwrap();
        let ka = kernel_dim(&a.dirac);
        let kb = kernel_dim(&b.dirac);
        let kk = a.dim() * b.dim();
        let plus = CMat::from_fn(kk, kk, |i, j| p.dirac[(kk + i, j)]);
        assert_eq!(kernel_dim(&plus), ka * kb);
        assert_eq!(rank_index(&p).unwrap(), 0);
    }
    assert!(external_product_oddodd(&p, &c1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn lift_squares_to_one_for_any_pair(p in 1usize..5, q in 1usize..5, seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pair = AlmostInvertiblePair::new(random_mat(&mut rng, q, p), random_mat(&mut rng, p, q)).unwrap();
        let t = parametrix_lift(&pair).unwrap();
        let scale = 1.0 + max_abs(&t);
        prop_assert!(max_abs(&(&t * &t - CMat::identity(p + q, p + q))) <= 1e-12 * scale * scale);
        let class = index_class(&pair).unwrap();
        prop_assert_eq!(class.index, p as i64 - q as i64);
    }
}
