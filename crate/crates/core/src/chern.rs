//! Cut-off idempotents of crossed products, the idempotent lift ê in the
//! tensor algebra, the even cycle γ(ê), the homomorphism ψ into the crossed
//! product with the group tensor algebra, the map Ψ and the mixed forms ch_n(e).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use malachite_base::num::basic::traits::{One, Zero};
use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::algebra::{crossed_index, crossed_product, Algebra, AlgebraSpec, Element, GSetSpec, GroupSpec, Haar};
use crate::error::{Error, Result};
use crate::forms::{dg_mul, fedosov, fedosov_words, forms_to_tensor, tensor_to_forms, FormChain, Slots, TensorChain, Word};
use crate::manifold::{wedge_coeffs, FiniteModel, ManifoldModel};
use crate::scalar::{factorial_q, q_to_f64, Scalar, Q, QI};
use crate::ta::TruncatedTensorAlgebra;

/// Cut-off function c with sum_g w(g) c(g x)^2 = 1.
#[derive(Clone, Debug, PartialEq)]
pub enum CutOff {
    /// Constant on each orbit; only the squares are stored so they stay rational.
    OrbitConstant { squares: Vec<Q> },
    /// Rational values per point.
    Explicit { values: Vec<Q> },
}

impl CutOff {
    /// c(x) c(y) for x, y in one orbit (or any pair for explicit values).
    pub fn pair(&self, x: usize, y: usize) -> Q {
        match self {
            CutOff::OrbitConstant { squares } => {
                debug_assert_eq!(squares[x], squares[y]);
                squares[x].clone()
            }
            CutOff::Explicit { values } => &values[x] * &values[y],
        }
    }
    pub fn square(&self, x: usize) -> Q {
        self.pair(x, x)
    }
    pub fn value_f64(&self, x: usize) -> f64 {
        match self {
            CutOff::OrbitConstant { squares } => q_to_f64(&squares[x]).sqrt(),
            CutOff::Explicit { values } => q_to_f64(&values[x]),
        }
    }
}

/// Orbit-constant cut-off: c^2 = 1 / sum_g w(g) on every point.
pub fn cutoff_function(group: &GroupSpec, gset: &GSetSpec, haar: Haar) -> Result<CutOff> {
    if gset.points() == 0 {
        return Err(Error::InvalidAction("empty G-set".into()));
    }
    let total = haar.weight(group.order()) * Q::from(group.order() as u64);
    let sq = Q::ONE / total;
    let c = CutOff::OrbitConstant { squares: vec![sq; gset.points()] };
    check_cutoff(group, gset, haar, &c)?;
    Ok(c)
}

/// sum_g w(g) c(g x)^2 = 1 for every x.
pub fn check_cutoff(group: &GroupSpec, gset: &GSetSpec, haar: Haar, c: &CutOff) -> Result<()> {
    let w = haar.weight(group.order());
    for x in 0..gset.points() {
        let mut s = Q::ZERO;
        for g in 0..group.order() {
            s += &w * c.square(gset.act(g, x));
        }
        if s != Q::ONE {
            return Err(Error::Precondition(format!("cut-off identity fails at point {x}: sum = {s}")));
        }
    }
    Ok(())
}

/// e(g, x) = c(x) c(g x) in the crossed product basis, checked to be idempotent.
pub fn canonical_idempotent(group: &GroupSpec, gset: &GSetSpec, haar: Haar, c: &CutOff) -> Result<(AlgebraSpec<Q>, Element<Q>)> {
    let alg = crossed_product(group, gset, haar)?;
    let mut e = Element::zero(alg.dim());
    for g in 0..group.order() {
        for x in 0..gset.points() {
            e.coeffs[crossed_index(gset, g, x)] = c.pair(x, gset.act(g, x));
        }
    }
    if alg.mul(&e, &e) != e {
        return Err(Error::NotIdempotent("e * e differs from e in the crossed product".into()));
    }
    Ok((alg, e))
}

/// (2k)! / (k!)^2
pub fn lift_coefficient(k: u64) -> Q {
    factorial_q(2 * k) / (factorial_q(k) * factorial_q(k))
}

/// (-1)^n (2n)! / n!
pub fn gamma_coefficient(n: u64) -> Q {
    let v = factorial_q(2 * n) / factorial_q(n);
    if n % 2 == 1 {
        -v
    } else {
        v
    }
}

fn half<S: Scalar>() -> S {
    S::from_q(&Q::from_signeds(1, 2))
}

/// Check e * e = e for an element given as letters with coefficients.
pub fn check_idempotent<A: Algebra>(alg: &A, e: &[(A::Letter, A::Scalar)]) -> Result<()> {
    let mut sq: BTreeMap<A::Letter, A::Scalar> = BTreeMap::new();
    for (a, ca) in e {
        for (b, cb) in e {
            alg.multiply(a, b, &mut |k, s| {
                let v = s * ca.clone() * cb.clone();
                *sq.entry(k).or_insert_with(A::Scalar::zero) += v;
            });
        }
    }
    for (a, ca) in e {
        *sq.entry(a.clone()).or_insert_with(A::Scalar::zero) -= ca.clone();
    }
    if sq.values().all(|c| c.is_zero()) {
        Ok(())
    } else {
        Err(Error::NotIdempotent("e * e differs from e".into()))
    }
}

/// ê = e + sum_{k=1}^{k_max} (2k)!/(k!)^2 (e - 1/2)(de de)^k as even forms over A.
pub fn idempotent_lift<A: Algebra>(
    alg: &A,
    e: &[(A::Letter, A::Scalar)],
    k_max: usize,
) -> Result<FormChain<A::Letter, A::Scalar>> {
    check_idempotent(alg, e)?;
    let max = 2 * k_max;
    let mut out = FormChain::zero(max);
    for (a, c) in e {
        out.add_term(Word::letter(a.clone()), c.clone());
    }
    // heads: letters of e and the adjoined unit with -1/2
    let mut heads: Vec<(Option<A::Letter>, A::Scalar)> = e.iter().map(|(a, c)| (Some(a.clone()), c.clone())).collect();
    heads.push((None, -half::<A::Scalar>()));
    let mut tails: Vec<(Slots<A::Letter>, A::Scalar)> = vec![(SmallVec::new(), A::Scalar::one())];
    for k in 1..=k_max {
        for _ in 0..2 {
            let mut next = Vec::with_capacity(tails.len() * e.len());
            for (t, s) in &tails {
                for (a, c) in e {
                    let mut u = t.clone();
                    u.push(a.clone());
                    next.push((u, s.clone() * c.clone()));
                }
            }
            tails = next;
        }
        let coef = A::Scalar::from_q(&lift_coefficient(k as u64));
        for (h, ch) in &heads {
            for (t, s) in &tails {
                out.add_term(Word { head: h.clone(), tail: t.clone() }, coef.clone() * ch.clone() * s.clone());
            }
        }
    }
    Ok(out)
}

/// ê . ê - ê computed with Fedosov products truncated at the lift's degree.
pub fn lift_defect<A: Algebra>(alg: &A, lift: &FormChain<A::Letter, A::Scalar>) -> FormChain<A::Letter, A::Scalar> {
    fedosov(alg, lift, lift).minus(lift)
}

/// γ(ê) = ê + sum_{n=1}^{n_max} (-1)^n (2n)!/n! (ê - 1/2)(dê dê)^n as forms over TA_N,
/// with ê given as even forms over A (its words are the TA letters).
pub fn gamma_chern<A: Algebra>(
    ta: &TruncatedTensorAlgebra<A>,
    lift: &FormChain<A::Letter, A::Scalar>,
    n_max: usize,
    outer_max: usize,
) -> FormChain<Word<A::Letter>, A::Scalar> {
    let letters = ta.letters_of(lift);
    let mut out = FormChain::zero(outer_max);
    for (w, c) in &letters {
        out.add_term(Word::letter(w.clone()), c.clone());
    }
    let mut heads: Vec<(Option<Word<A::Letter>>, A::Scalar)> = letters.iter().map(|(w, c)| (Some(w.clone()), c.clone())).collect();
    heads.push((None, -half::<A::Scalar>()));
    let mut tails: Vec<(Slots<Word<A::Letter>>, A::Scalar)> = vec![(SmallVec::new(), A::Scalar::one())];
    for n in 1..=n_max {
        for _ in 0..2 {
            let mut next = Vec::with_capacity(tails.len() * letters.len());
            for (t, s) in &tails {
                for (w, c) in &letters {
                    let mut u = t.clone();
                    u.push(w.clone());
                    next.push((u, s.clone() * c.clone()));
                }
            }
            tails = next;
        }
        let coef = A::Scalar::from_q(&gamma_coefficient(n as u64));
        for (h, ch) in &heads {
            for (t, s) in &tails {
                out.add_term(Word { head: h.clone(), tail: t.clone() }, coef.clone() * ch.clone() * s.clone());
            }
        }
    }
    out
}

/// A = Omega_c(M) x G with letters (g, monomial) and (h, m)(k, m') = w (kh, m ^ m'^h).
pub struct CrossedAlgebra<'m, M: ManifoldModel> {
    pub model: &'m M,
    weight: QI,
}

impl<'m, M: ManifoldModel> CrossedAlgebra<'m, M> {
    pub fn new(model: &'m M) -> Self {
        let weight = QI::from_q(&model.haar().weight(model.group().order()));
        CrossedAlgebra { model, weight }
    }
}

impl<'m, M: ManifoldModel> Algebra for CrossedAlgebra<'m, M> {
    type Letter = (u32, M::Mono);
    type Scalar = QI;
    fn multiply(&self, a: &Self::Letter, b: &Self::Letter, out: &mut dyn FnMut(Self::Letter, QI)) {
        let (h, m) = a;
        let (k, m2) = b;
        let g = self.model.group().mul(*k as usize, *h as usize) as u32;
        let pulled = self.model.pullback(*h as usize, m2).expect("pullback inside the frequency cap");
        for (p, c) in wedge_coeffs(self.model, &[(m.clone(), QI::one())], &pulled) {
            out((g, p), c * self.weight.clone());
        }
    }
}

/// The crossed product letters of a finite model as (g, point).
pub fn finite_letter(gset: &GSetSpec, l: u32) -> (u32, u32) {
    let m = gset.points() as u32;
    (l / m, l % m)
}

/// Element of Omega_c(M) (x) Omega B: B-words over group elements with monomial coefficients.
#[derive(Debug)]
pub struct MixedForm<M: ManifoldModel> {
    pub terms: FxHashMap<(Word<u32>, M::Mono), QI>,
    pub max_degree: usize,
}

impl<M: ManifoldModel> Clone for MixedForm<M> {
    fn clone(&self) -> Self {
        MixedForm { terms: self.terms.clone(), max_degree: self.max_degree }
    }
}

impl<M: ManifoldModel> PartialEq for MixedForm<M> {
    fn eq(&self, o: &Self) -> bool {
        self.terms.len() == o.terms.len() && self.terms.iter().all(|(k, v)| o.terms.get(k) == Some(v))
    }
}

/// Concatenation product of a B-word: g_n ... g_0 (unit head skipped).
pub fn word_concat(group: &GroupSpec, w: &Word<u32>) -> usize {
    let mut acc = 0usize;
    if let Some(h) = w.head {
        acc = h as usize;
    }
    for &g in &w.tail {
        acc = group.mul(g as usize, acc);
    }
    acc
}

impl<M: ManifoldModel> MixedForm<M> {
    pub fn zero(max_degree: usize) -> Self {
        MixedForm { terms: FxHashMap::default(), max_degree }
    }
    pub fn add(&mut self, w: Word<u32>, m: M::Mono, c: QI) {
        if c.is_zero() || w.degree() > self.max_degree {
            return;
        }
        let e = self.terms.entry((w, m)).or_insert_with(QI::zero);
        *e += c;
        if e.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }
    fn add_fast(&mut self, w: Word<u32>, m: M::Mono, c: QI) {
        if c.is_zero() || w.degree() > self.max_degree {
            return;
        }
        *self.terms.entry((w, m)).or_insert_with(QI::zero) += c;
    }
    fn prune(&mut self) {
        self.terms.retain(|_, v| !v.is_zero());
    }
    pub fn add_form(&mut self, o: &Self, s: &QI) {
        for ((w, m), c) in &o.terms {
            self.add_fast(w.clone(), m.clone(), c.clone() * s.clone());
        }
        self.prune();
    }
    pub fn plus(&self, o: &Self) -> Self {
        let mut r = self.clone();
        r.add_form(o, &QI::one());
        r
    }
    pub fn minus(&self, o: &Self) -> Self {
        let mut r = self.clone();
        r.add_form(o, &-QI::one());
        r
    }
    pub fn scale(&self, s: &QI) -> Self {
        let mut r = Self::zero(self.max_degree);
        r.add_form(self, s);
        r
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn len(&self) -> usize {
        self.terms.len()
    }
    /// The unit of the crossed product: the constant function at the unit word.
    pub fn unit(model: &M, max_degree: usize) -> Self {
        let mut r = Self::zero(max_degree);
        for (m, c) in model.one() {
            r.add(Word::unit(), m, c);
        }
        r
    }
    /// Component of B-degree n.
    pub fn component(&self, n: usize) -> Self {
        let mut r = Self::zero(self.max_degree);
        for ((w, m), c) in &self.terms {
            if w.degree() == n {
                r.terms.insert((w.clone(), m.clone()), c.clone());
            }
        }
        r
    }
    pub fn manifold_part(&self, model: &M, k: usize) -> Self {
        let mut r = Self::zero(self.max_degree);
        for ((w, m), c) in &self.terms {
            if model.degree(m) == k {
                r.terms.insert((w.clone(), m.clone()), c.clone());
            }
        }
        r
    }
    /// The coefficient form at one B-word (a tuple in G^n or G^{n+1}).
    pub fn at(&self, w: &Word<u32>) -> Vec<(M::Mono, QI)> {
        let mut v: Vec<(M::Mono, QI)> = self.terms.iter().filter(|((u, _), _)| u == w).map(|((_, m), c)| (m.clone(), c.clone())).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }
    pub fn words(&self) -> Vec<Word<u32>> {
        let mut v: Vec<Word<u32>> = self.terms.keys().map(|(w, _)| w.clone()).collect();
        v.sort_by(|a, b| (a.degree(), a).cmp(&(b.degree(), b)));
        v.dedup();
        v
    }
    pub fn sorted(&self) -> Vec<(Word<u32>, M::Mono, QI)> {
        let mut v: Vec<_> = self.terms.iter().map(|((w, m), c)| (w.clone(), m.clone(), c.clone())).collect();
        v.sort_by(|a, b| (a.0.degree(), &a.0, &a.1).cmp(&(b.0.degree(), &b.0, &b.1)));
        v
    }

    /// De Rham coboundary on the coefficients.
    pub fn delta(&self, model: &M) -> Self {
        let mut r = Self::zero(self.max_degree);
        for ((w, m), c) in &self.terms {
            for (m2, s) in model.delta(m) {
                r.add_fast(w.clone(), m2, s * c.clone());
            }
        }
        r.prune();
        r
    }

    /// Crossed Fedosov product: scalar Fedosov product of the B-words with coefficient
    /// F ^ F'^{concat(u)}.
    pub fn fedosov(&self, model: &M, b_alg: &AlgebraSpec<Q>, o: &Self) -> Result<Self> {
        let max = self.max_degree.min(o.max_degree);
        let mut r = Self::zero(max);
        let mut cache: FxHashMap<(Word<u32>, Word<u32>), Vec<(Word<u32>, Q)>> = FxHashMap::default();
        for ((u, m), c) in &self.terms {
            let g = word_concat(model.group(), u);
            for ((v, m2), c2) in &o.terms {
                if u.degree() + v.degree() > max {
                    continue;
                }
                let pulled = model.pullback(g, m2)?;
                let coef = wedge_coeffs(model, &[(m.clone(), c.clone() * c2.clone())], &pulled);
                if coef.is_empty() {
                    continue;
                }
                let prod = cache.entry((u.clone(), v.clone())).or_insert_with(|| {
                    let mut p = FormChain::zero(max);
                    fedosov_words(b_alg, u, v, max, &mut p);
                    p.sorted_terms()
                });
                for (w, s) in prod.iter() {
                    for (mm, cc) in &coef {
                        r.add_fast(w.clone(), mm.clone(), cc.clone() * QI::from_q(s));
                    }
                }
            }
        }
        r.prune();
        Ok(r)
    }

    /// CSV rows: tuple, manifold degree, monomial, coefficient.
    pub fn to_csv(&self, model: &M) -> String {
        let mut s = String::from("tuple,manifold_degree,monomial,coefficient\n");
        for (w, m, c) in self.sorted() {
            let mut t: Vec<String> = Vec::new();
            match w.head {
                Some(h) => t.push(h.to_string()),
                None => t.push("1".into()),
            }
            t.extend(w.tail.iter().map(|g| g.to_string()));
            let _ = writeln!(s, "({}),{},{},{}", t.join(" "), model.degree(&m), model.describe(&m), c);
        }
        s
    }
}

/// psi on one form word over A: coefficient f_0 f_1^{g_0} f_2^{g_1 g_0} ... at the B-word of group letters.
pub fn psi_word<M: ManifoldModel, L>(
    model: &M,
    split: &dyn Fn(&L) -> (u32, Vec<(M::Mono, QI)>),
    w: &Word<L>,
    c: &QI,
    out: &mut MixedForm<M>,
) -> Result<()> {
    let group = model.group();
    let mut coef: Vec<(M::Mono, QI)> = model.one().into_iter().map(|(m, s)| (m, s * c.clone())).collect();
    let mut acc = 0usize;
    let mut head = None;
    if let Some(h) = &w.head {
        let (g, f) = split(h);
        coef = wedge_coeffs(model, &coef, &f);
        acc = g as usize;
        head = Some(g);
    }
    let mut tail: Slots<u32> = SmallVec::new();
    for a in &w.tail {
        let (g, f) = split(a);
        let mut pulled = Vec::new();
        for (m, s) in f {
            for (p, t) in model.pullback(acc, &m)? {
                pulled.push((p, t * s.clone()));
            }
        }
        coef = wedge_coeffs(model, &coef, &pulled);
        acc = group.mul(g as usize, acc);
        tail.push(g);
    }
    let bw = Word { head, tail };
    for (m, s) in coef {
        out.add_fast(bw.clone(), m, s);
    }
    Ok(())
}

/// psi on a chain of forms over A (the TA picture), landing in mixed forms.
pub fn psi<M: ManifoldModel, L: Clone + std::hash::Hash + Eq + Ord + std::fmt::Debug>(
    model: &M,
    split: &dyn Fn(&L) -> (u32, Vec<(M::Mono, QI)>),
    x: &FormChain<L, QI>,
    max_degree: usize,
) -> Result<MixedForm<M>> {
    let mut out = MixedForm::zero(max_degree);
    for (w, c) in x.sorted_terms() {
        if w.is_unit() {
            for (m, s) in model.one() {
                out.add_fast(Word::unit(), m, s * c.clone());
            }
            continue;
        }
        psi_word(model, split, &w, &c, &mut out)?;
    }
    out.prune();
    Ok(out)
}

/// Mixed form in the tensor picture: tensor words over G with monomial coefficients.
#[derive(Debug)]
pub struct MixedTensor<M: ManifoldModel> {
    pub terms: FxHashMap<(Slots<u32>, M::Mono), QI>,
}

impl<M: ManifoldModel> Clone for MixedTensor<M> {
    fn clone(&self) -> Self {
        MixedTensor { terms: self.terms.clone() }
    }
}

impl<M: ManifoldModel> PartialEq for MixedTensor<M> {
    fn eq(&self, o: &Self) -> bool {
        self.terms.len() == o.terms.len() && self.terms.iter().all(|(k, v)| o.terms.get(k) == Some(v))
    }
}

impl<M: ManifoldModel> MixedTensor<M> {
    pub fn zero() -> Self {
        MixedTensor { terms: FxHashMap::default() }
    }
    fn add(&mut self, w: Slots<u32>, m: M::Mono, c: QI) {
        if c.is_zero() {
            return;
        }
        *self.terms.entry((w, m)).or_insert_with(QI::zero) += c;
    }
    fn prune(&mut self) {
        self.terms.retain(|_, v| !v.is_zero());
    }
    /// Crossed concatenation: (x y)(g_1..g_{n+m}) = x(g_1..g_n) y(..)^{g_n ... g_1}.
    pub fn cross(&self, model: &M, o: &Self) -> Result<Self> {
        let mut r = Self::zero();
        for ((u, m), c) in &self.terms {
            let g = model.group().concat(&u.iter().map(|&x| x as usize).collect::<Vec<_>>());
            for ((v, m2), c2) in &o.terms {
                let pulled = model.pullback(g, m2)?;
                for (mm, cc) in wedge_coeffs(model, &[(m.clone(), c.clone() * c2.clone())], &pulled) {
                    let mut w = u.clone();
                    w.extend(v.iter().cloned());
                    r.add(w, mm, cc);
                }
            }
        }
        r.prune();
        Ok(r)
    }
}

/// Convert the even mixed form to the tensor picture, carrying coefficients.
pub fn mixed_to_tensor<M: ManifoldModel>(b_alg: &AlgebraSpec<Q>, x: &MixedForm<M>) -> Result<MixedTensor<M>> {
    let mut r = MixedTensor::zero();
    for ((w, m), c) in &x.terms {
        let t = forms_to_tensor(b_alg, &FormChain::single(x.max_degree, w.clone(), Q::ONE))?;
        for (tw, s) in &t.terms {
            r.add(tw.clone(), m.clone(), c.clone() * QI::from_q(s));
        }
    }
    r.prune();
    Ok(r)
}

pub fn tensor_to_mixed<M: ManifoldModel>(b_alg: &AlgebraSpec<Q>, t: &MixedTensor<M>, max_degree: usize) -> MixedForm<M> {
    let mut r = MixedForm::zero(max_degree);
    for ((tw, m), c) in &t.terms {
        let mut one = TensorChain::zero();
        one.add_term(tw.clone(), Q::ONE);
        for (w, s) in tensor_to_forms(b_alg, &one, max_degree).sorted_terms() {
            r.add_fast(w, m.clone(), c.clone() * QI::from_q(&s));
        }
    }
    r.prune();
    r
}

/// Scalar Fedosov product of B-words, as sorted terms.
fn fedosov_scalar(b_alg: &AlgebraSpec<Q>, x: &FormChain<u32, Q>, y: &FormChain<u32, Q>) -> FormChain<u32, Q> {
    let max = x.max_degree().min(y.max_degree());
    let mut r = FormChain::zero(max);
    for (u, a) in x.iter() {
        for (v, b) in y.iter() {
            let mut p = FormChain::zero(max);
            fedosov_words(b_alg, u, v, max, &mut p);
            r.add_scaled(&p, &(a.clone() * b.clone()));
        }
    }
    r
}

/// natural( P dZ Q ) in Omega^- B, via Omega^1 TB_natural = T̃B (x) B and (W, a) -> form(W) da.
/// Coefficients keep their original order F_P ^ F_Z^{P} ^ F_Q^{PZ}; moving F_Q in front of the
/// differential contributes (-1)^{|F_Q|}.
pub fn natural_product<M: ManifoldModel>(
    model: &M,
    b_alg: &AlgebraSpec<Q>,
    p: &MixedForm<M>,
    z: &MixedForm<M>,
    q: &MixedForm<M>,
    max_degree: usize,
) -> Result<MixedForm<M>> {
    let group = model.group();
    let mut r = MixedForm::zero(max_degree);
    let inner = max_degree.saturating_sub(1);
    let zt = mixed_to_tensor(b_alg, z)?;
    let mut rot_cache: FxHashMap<(Word<u32>, Slots<u32>, usize, Word<u32>), Vec<(Word<u32>, Q)>> = FxHashMap::default();
    for ((pw, pm), pc) in &p.terms {
        let gp = word_concat(group, pw);
        for ((zw, zm), zc) in &zt.terms {
            let gz = group.concat(&zw.iter().map(|&x| x as usize).collect::<Vec<_>>());
            let zpull = model.pullback(gp, zm)?;
            let fpz = wedge_coeffs(model, &[(pm.clone(), pc.clone() * zc.clone())], &zpull);
            if fpz.is_empty() {
                continue;
            }
            let gpz = group.mul(gz, gp);
            for ((qw, qm), qc) in &q.terms {
                let sign = if model.degree(qm) % 2 == 1 { -QI::one() } else { QI::one() };
                let qpull = model.pullback(gpz, qm)?;
                let coef = wedge_coeffs(model, &fpz, &qpull.iter().map(|(m, s)| (m.clone(), s.clone() * qc.clone() * sign.clone())).collect::<Vec<_>>());
                if coef.is_empty() {
                    continue;
                }
                for j in 0..zw.len() {
                    let key = (pw.clone(), zw.clone(), j, qw.clone());
                    let terms = rot_cache.entry(key).or_insert_with(|| {
                        // form(z_{j+1..}) . q . p . form(z_{..j-1}), then append dz_j
                        let piece = |s: &[u32]| -> FormChain<u32, Q> {
                            if s.is_empty() {
                                FormChain::single(inner, Word::unit(), Q::ONE)
                            } else {
                                let mut t = TensorChain::zero();
                                t.add_term(s.iter().cloned().collect(), Q::ONE);
                                tensor_to_forms(b_alg, &t, inner)
                            }
                        };
                        let right = piece(&zw[j + 1..]);
                        let left = piece(&zw[..j]);
                        let qf = FormChain::single(inner, qw.clone(), Q::ONE);
                        let pf = FormChain::single(inner, pw.clone(), Q::ONE);
                        let rot = fedosov_scalar(b_alg, &fedosov_scalar(b_alg, &fedosov_scalar(b_alg, &right, &qf), &pf), &left);
                        rot.sorted_terms()
                            .into_iter()
                            .map(|(mut w, s)| {
                                w.tail.push(zw[j]);
                                (w, s)
                            })
                            .collect()
                    });
                    for (w, s) in terms.iter() {
                        for (mm, cc) in &coef {
                            r.add_fast(w.clone(), mm.clone(), cc.clone() * QI::from_q(s));
                        }
                    }
                }
            }
        }
    }
    r.prune();
    Ok(r)
}

fn inv_factorial(n: usize) -> QI {
    QI::from_q(&(Q::ONE / factorial_q(n as u64)))
}

/// Iterated crossed product of a list of mixed forms, starting from `start`.
fn product_chain<M: ManifoldModel>(model: &M, b_alg: &AlgebraSpec<Q>, start: &MixedForm<M>, factors: &[&MixedForm<M>]) -> Result<MixedForm<M>> {
    let mut acc = start.clone();
    for f in factors {
        if acc.is_zero() {
            return Ok(acc);
        }
        acc = acc.fedosov(model, b_alg, f)?;
    }
    Ok(acc)
}

/// Psi on outer-degree-n data given by the images X_i = psi(x_i):
/// (1/n!)[X_0 δX_1 ... δX_n + sum_i natural(X_0 δX_1 .. dX_i .. δX_n)].
pub fn psi_big_images<M: ManifoldModel>(model: &M, b_alg: &AlgebraSpec<Q>, xs: &[MixedForm<M>], max_degree: usize) -> Result<MixedForm<M>> {
    let n = xs.len() - 1;
    let deltas: Vec<MixedForm<M>> = xs.iter().map(|x| x.delta(model)).collect();
    let dim = model.dimension();
    let mut out = MixedForm::zero(max_degree);
    if n <= dim {
        let refs: Vec<&MixedForm<M>> = deltas[1..].iter().collect();
        let first = product_chain(model, b_alg, &xs[0], &refs)?;
        out.add_form(&first, &QI::one());
    }
    if n >= 1 && n - 1 <= dim {
        for i in 1..=n {
            let pre: Vec<&MixedForm<M>> = deltas[1..i].iter().collect();
            let p = product_chain(model, b_alg, &xs[0], &pre)?;
            if p.is_zero() {
                continue;
            }
            let post: Vec<&MixedForm<M>> = deltas[i + 1..].iter().collect();
            let q = product_chain(model, b_alg, &MixedForm::unit(model, max_degree), &post)?;
            if q.is_zero() {
                continue;
            }
            let nat = natural_product(model, b_alg, &p, &xs[i], &q, max_degree)?;
            out.add_form(&nat, &QI::one());
        }
    }
    Ok(out.scale(&inv_factorial(n)))
}

/// Psi applied term by term to a chain over TA (outer words of TA letters).
pub fn psi_big<M: ManifoldModel, L: Clone + std::hash::Hash + Eq + Ord + std::fmt::Debug>(
    model: &M,
    split: &dyn Fn(&L) -> (u32, Vec<(M::Mono, QI)>),
    b_alg: &AlgebraSpec<Q>,
    x: &FormChain<Word<L>, QI>,
    max_degree: usize,
) -> Result<MixedForm<M>> {
    let mut out = MixedForm::zero(max_degree);
    let mut cache: FxHashMap<Word<L>, MixedForm<M>> = FxHashMap::default();
    let mut image = |l: &Word<L>| -> Result<MixedForm<M>> {
        if let Some(v) = cache.get(l) {
            return Ok(v.clone());
        }
        let mut m = MixedForm::zero(max_degree);
        psi_word(model, split, l, &QI::one(), &mut m)?;
        m.prune();
        cache.insert(l.clone(), m.clone());
        Ok(m)
    };
    for (w, c) in x.sorted_terms() {
        let mut xs = Vec::with_capacity(w.degree() + 1);
        xs.push(match &w.head {
            None => MixedForm::unit(model, max_degree),
            Some(h) => image(h)?,
        });
        for t in &w.tail {
            xs.push(image(t)?);
        }
        let v = psi_big_images(model, b_alg, &xs, max_degree)?;
        out.add_form(&v, &c);
    }
    Ok(out)
}

/// ch(e) = Psi(γ(ê)) summed over all B-degrees up to `max_degree`, using multilinearity in
/// the repeated slots: Psi((ê - 1/2)(dê)^{2n}) is built from psi(ê) once.
pub fn noncommutative_chern<M: ManifoldModel, L: Clone + std::hash::Hash + Eq + Ord + std::fmt::Debug>(
    model: &M,
    split: &dyn Fn(&L) -> (u32, Vec<(M::Mono, QI)>),
    lift: &FormChain<L, QI>,
    n_max: usize,
    max_degree: usize,
) -> Result<MixedForm<M>> {
    let b_alg = crate::algebra::group_algebra(model.group(), model.haar());
    let x = psi(model, split, lift, max_degree)?;
    let x0 = x.minus(&MixedForm::unit(model, max_degree).scale(&half()));
    let mut out = x.clone();
    for n in 1..=n_max {
        let mut xs = vec![x0.clone()];
        xs.extend(std::iter::repeat_n(x.clone(), 2 * n));
        let v = psi_big_images(model, &b_alg, &xs, max_degree)?;
        out.add_form(&v, &QI::from_q(&gamma_coefficient(n as u64)));
    }
    Ok(out)
}

/// ch_n(e): the B-degree n component.
pub fn chern_component<M: ManifoldModel>(ch: &MixedForm<M>, n: usize) -> MixedForm<M> {
    ch.component(n)
}

/// Split function for the finite crossed product basis.
pub fn finite_split(model: &FiniteModel) -> impl Fn(&u32) -> (u32, Vec<(u32, QI)>) + '_ {
    move |l: &u32| {
        let (g, x) = finite_letter(&model.gset, *l);
        (g, vec![(x, QI::one())])
    }
}

/// Split function for generic crossed algebra letters.
pub fn crossed_split<Mo: Clone>(l: &(u32, Mo)) -> (u32, Vec<(Mo, QI)>) {
    (l.0, vec![(l.1.clone(), QI::one())])
}

/// The cut-off idempotent of a finite model as QI letters of the crossed product.
pub fn finite_idempotent_letters(model: &FiniteModel, c: &CutOff) -> Result<Vec<(u32, QI)>> {
    let (_, e) = canonical_idempotent(&model.group, &model.gset, model.haar, c)?;
    Ok(e.coeffs.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(i, v)| (i as u32, QI::from_q(v))).collect())
}

/// (b + B) applied to an outer chain over TA, exact.
pub fn cycle_defect<A: Algebra>(ta: &TruncatedTensorAlgebra<A>, x: &FormChain<Word<A::Letter>, A::Scalar>) -> FormChain<Word<A::Letter>, A::Scalar> {
    crate::forms::b(ta, x).plus(&crate::forms::connes_b(ta, x))
}

/// DG product of outer chains, re-exported for oracles.
pub fn outer_mul<A: Algebra>(alg: &A, x: &FormChain<A::Letter, A::Scalar>, y: &FormChain<A::Letter, A::Scalar>) -> FormChain<A::Letter, A::Scalar> {
    dg_mul(alg, x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::catalogue_algebra;

    #[test]
    fn coefficients() {
        assert_eq!(lift_coefficient(1), Q::from(2));
        assert_eq!(lift_coefficient(2), Q::from(6));
        assert_eq!(gamma_coefficient(1), Q::from(-2));
        assert_eq!(gamma_coefficient(2), Q::from(12));
    }

    #[test]
    fn cutoffs_and_idempotents() {
        let g = GroupSpec::cyclic(2);
        let m = GSetSpec::regular(&g);
        let c = cutoff_function(&g, &m, Haar::Counting).unwrap();
        assert_eq!(c.square(0), Q::from_signeds(1, 2));
        let (_, e) = canonical_idempotent(&g, &m, Haar::Counting, &c).unwrap();
        assert!(e.coeffs.iter().all(|v| *v == Q::from_signeds(1, 2)));
        let c = cutoff_function(&g, &m, Haar::Normalized).unwrap();
        assert_eq!(c.square(0), Q::ONE);
    }

    #[test]
    fn lift_is_idempotent_in_scalar_case() {
        let a = catalogue_algebra(0);
        let e = vec![(0u32, Q::ONE)];
        for k in 0..4 {
            let l = idempotent_lift(&a, &e, k).unwrap();
            assert!(lift_defect(&a, &l).is_zero());
        }
    }

    #[test]
    fn lift_starts_with_the_idempotent() {
        let a = catalogue_algebra(0);
        let l = idempotent_lift(&a, &[(0u32, Q::ONE)], 2).unwrap();
        assert_eq!(l.homogeneous(0).sorted_terms(), vec![(Word::letter(0u32), Q::ONE)]);
        // 2(1 - 1/2) d1 d1 with 1 a letter of A, distinct from the adjoined unit
        assert_eq!(l.coeff(&Word::new(Some(0), &[0, 0])), Q::from(2));
        assert_eq!(l.coeff(&Word::new(None, &[0, 0])), Q::from(-1));
    }
}
