//! Helpers shared by the integration tests: random operators and chains, and an
//! adaptive Gauss-Kronrod quadrature used as an independent oracle for simplex brackets.

#![allow(dead_code)]

use malachite_base::num::basic::traits::One;
use ncindex_core::forms::{FormChain, Word};
use ncindex_core::jlo::OuterChain;
use ncindex_core::scalar::{C64, Q};
use ncindex_core::spectral::{c, SpectralModel, CMat};
use rand::Rng;

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn random_mat<R: Rng>(rng: &mut R, n: usize) -> CMat {
    CMat::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

// Adaptive Gauss-Kronrod (7/15) for vector-valued integrands.

pub const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
pub const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
pub const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

pub fn gk15(f: &dyn Fn(f64) -> Vec<C64>, a: f64, b: f64) -> (Vec<C64>, f64) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(mid);
    let mut k: Vec<C64> = fc.iter().map(|v| v * WGK[7]).collect();
    let mut g: Vec<C64> = fc.iter().map(|v| v * WG[3]).collect();
    for j in 0..7 {
        let dx = half * XGK[j];
        let (f1, f2) = (f(mid - dx), f(mid + dx));
        for i in 0..k.len() {
            let s = f1[i] + f2[i];
            k[i] += s * WGK[j];
            if j % 2 == 1 {
                g[i] += s * WG[j / 2];
            }
        }
    }
    let err = k.iter().zip(&g).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) * half;
    (k.into_iter().map(|v| v * half).collect(), err)
}

pub fn adaptive(f: &dyn Fn(f64) -> Vec<C64>, a: f64, b: f64, tol: f64, depth: usize) -> Vec<C64> {
    let (v, err) = gk15(f, a, b);
    if err <= tol || depth == 0 {
        return v;
    }
    let m = 0.5 * (a + b);
    let l = adaptive(f, a, m, 0.5 * tol, depth - 1);
    let r = adaptive(f, m, b, 0.5 * tol, depth - 1);
    l.iter().zip(&r).map(|(x, y)| x + y).collect()
}

/// Integral over the simplex {s_1 + ... + s_k <= 1} of f(s_1, .., s_k), nested one variable at a time.
pub fn simplex_quadrature(k: usize, f: &dyn Fn(&[f64]) -> Vec<C64>, tol: f64) -> Vec<C64> {
    fn level(k: usize, fixed: &mut Vec<f64>, rest: f64, f: &dyn Fn(&[f64]) -> Vec<C64>, tol: f64) -> Vec<C64> {
        if fixed.len() == k {
            return f(fixed);
        }
        let fixed_cell = std::cell::RefCell::new(fixed.clone());
        let g = |s: f64| {
            let mut v = fixed_cell.borrow().clone();
            v.push(s);
            level(k, &mut v, rest - s, f, tol)
        };
        adaptive(&g, 0.0, rest, tol, 12)
    }
    level(k, &mut Vec::new(), 1.0, f, tol)
}

pub fn flatten(m: &CMat) -> Vec<C64> {
    m.iter().cloned().collect()
}

pub fn unflatten(v: &[C64], n: usize) -> CMat {
    CMat::from_column_slice(n, n, v)
}

/// e^{-s_0 X} A_1 e^{-s_1 X} ... A_n e^{-s_n X} with X = t^2 D^2, by quadrature over the simplex.
pub fn bracket_by_quadrature(model: &SpectralModel, t: f64, mats: &[CMat]) -> CMat {
    let n = model.dim();
    if mats.is_empty() {
        return model.heat(t * t).unwrap();
    }
    let f = |s: &[f64]| {
        let s0 = 1.0 - s.iter().sum::<f64>();
        let mut acc = model.heat(s0.max(0.0) * t * t).unwrap();
        for (a, si) in mats.iter().zip(s) {
            acc = acc * a * model.heat(si * t * t).unwrap();
        }
        flatten(&acc)
    };
    unflatten(&simplex_quadrature(mats.len(), &f, 1e-12), n)
}

pub fn tensor_letter<R: Rng>(rng: &mut R, dim: u32) -> Word<u32> {
    if rng.gen_bool(0.5) {
        Word::letter(rng.gen_range(0..dim))
    } else {
        let head = if rng.gen_bool(0.3) { None } else { Some(rng.gen_range(0..dim)) };
        Word::new(head, &[rng.gen_range(0..dim), rng.gen_range(0..dim)])
    }
}

pub fn small_coeff<R: Rng>(rng: &mut R) -> Q {
    Q::from_signeds(rng.gen_range(-3i64..=3), 3)
}

pub fn combo<R: Rng>(rng: &mut R, dim: u32) -> Vec<(Word<u32>, Q)> {
    (0..3).map(|_| (tensor_letter(rng, dim), small_coeff(rng))).collect()
}

/// x_0 dx_1 ... dx_n expanded, each x_i a short combination of tensor words (x_0 may contain the unit).
pub fn outer<R: Rng>(rng: &mut R, dim: u32, n: usize, max: usize) -> OuterChain<Q> {
    let mut heads: Vec<(Option<Word<u32>>, Q)> = combo(rng, dim).into_iter().map(|(w, s)| (Some(w), s)).collect();
    heads.push((None, small_coeff(rng)));
    let mut acc: Vec<(Vec<Word<u32>>, Q)> = vec![(vec![], Q::ONE)];
    for _ in 0..n {
        let cb = combo(rng, dim);
        let mut next = vec![];
        for (t, s) in &acc {
            for (w, k) in &cb {
                let mut u = t.clone();
                u.push(w.clone());
                next.push((u, s.clone() * k.clone()));
            }
        }
        acc = next;
    }
    let mut x = FormChain::zero(max);
    for (h, ch) in &heads {
        for (t, s) in &acc {
            x.add_term(Word::new(h.clone(), t), ch.clone() * s.clone());
        }
    }
    x
}
