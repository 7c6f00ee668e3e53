//! Universal noncommutative differential forms over an algebra with an
//! adjoined unit, the operators d, b, kappa and Connes' B, the DG and
//! Fedosov products, and the correspondence with tensor words.
//!
//! A basis word `a0 da1 ... dan` stores `a0` as `head` (`None` is the
//! adjoined unit) and `a1..an` as `tail`.

use std::fmt;
use std::hash::Hash;

use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::algebra::Algebra;
use crate::error::{Error, Result};
use crate::scalar::{factorial_q, Scalar, Q};

pub type Slots<L> = SmallVec<[L; 8]>;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Word<L> {
    pub head: Option<L>,
    pub tail: Slots<L>,
}

impl<L: Clone> Word<L> {
    pub fn letter(a: L) -> Self {
        Word { head: Some(a), tail: SmallVec::new() }
    }
    pub fn unit() -> Self {
        Word { head: None, tail: SmallVec::new() }
    }
    pub fn new(head: Option<L>, tail: &[L]) -> Self {
        Word { head, tail: tail.iter().cloned().collect() }
    }
    pub fn degree(&self) -> usize {
        self.tail.len()
    }
    pub fn is_unit(&self) -> bool {
        self.head.is_none() && self.tail.is_empty()
    }
}

/// Record of terms discarded because they exceeded the retained degree.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TruncationReport {
    pub dropped_terms: usize,
    pub max_dropped_degree: usize,
}

impl TruncationReport {
    pub fn merge(&mut self, o: &TruncationReport) {
        self.dropped_terms += o.dropped_terms;
        self.max_dropped_degree = self.max_dropped_degree.max(o.max_dropped_degree);
    }
    pub fn is_clean(&self) -> bool {
        self.dropped_terms == 0
    }
}

/// Sparse finite linear combination of basis words, truncated above `max_degree`.
#[derive(Clone, Debug)]
pub struct FormChain<L: Hash + Eq, S> {
    terms: FxHashMap<Word<L>, S>,
    max_degree: usize,
    report: TruncationReport,
}

impl<L, S> PartialEq for FormChain<L, S>
where
    L: Clone + Hash + Eq,
    S: Scalar,
{
    fn eq(&self, o: &Self) -> bool {
        self.terms.len() == o.terms.len() && self.terms.iter().all(|(w, c)| o.terms.get(w) == Some(c))
    }
}

impl<L, S> FormChain<L, S>
where
    L: Clone + Hash + Eq + Ord + fmt::Debug,
    S: Scalar,
{
    pub fn zero(max_degree: usize) -> Self {
        FormChain { terms: FxHashMap::default(), max_degree, report: TruncationReport::default() }
    }

    pub fn from_terms(max_degree: usize, terms: impl IntoIterator<Item = (Word<L>, S)>) -> Self {
        let mut c = Self::zero(max_degree);
        for (w, s) in terms {
            c.add_term(w, s);
        }
        c
    }

    pub fn single(max_degree: usize, w: Word<L>, s: S) -> Self {
        Self::from_terms(max_degree, [(w, s)])
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }
    pub fn report(&self) -> &TruncationReport {
        &self.report
    }
    pub fn absorb_report(&mut self, r: &TruncationReport) {
        self.report.merge(r);
    }
    pub fn len(&self) -> usize {
        self.terms.len()
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn iter(&self) -> impl Iterator<Item = (&Word<L>, &S)> {
        self.terms.iter()
    }
    pub fn coeff(&self, w: &Word<L>) -> S {
        self.terms.get(w).cloned().unwrap_or_else(S::zero)
    }

    /// Terms in a deterministic order.
    pub fn sorted_terms(&self) -> Vec<(Word<L>, S)> {
        let mut v: Vec<_> = self.terms.iter().map(|(w, c)| (w.clone(), c.clone())).collect();
        v.sort_by(|a, b| (a.0.degree(), &a.0).cmp(&(b.0.degree(), &b.0)));
        v
    }

    pub fn add_term(&mut self, w: Word<L>, s: S) {
        if s.is_zero() {
            return;
        }
        if w.degree() > self.max_degree {
            self.report.dropped_terms += 1;
            self.report.max_dropped_degree = self.report.max_dropped_degree.max(w.degree());
            return;
        }
        match self.terms.entry(w) {
            std::collections::hash_map::Entry::Occupied(mut e) => {
                *e.get_mut() += s;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(s);
            }
        }
    }

    pub fn add_scaled(&mut self, o: &Self, s: &S) {
        self.report.merge(&o.report);
        for (w, c) in &o.terms {
            self.add_term(w.clone(), c.clone() * s.clone());
        }
    }
    pub fn add_chain(&mut self, o: &Self) {
        self.add_scaled(o, &S::one())
    }
    pub fn plus(&self, o: &Self) -> Self {
        let mut r = self.clone();
        r.add_chain(o);
        r
    }
    pub fn minus(&self, o: &Self) -> Self {
        let mut r = self.clone();
        r.add_scaled(o, &(-S::one()));
        r
    }
    pub fn scale(&self, s: &S) -> Self {
        let mut r = Self::zero(self.max_degree);
        r.add_scaled(self, s);
        r
    }

    pub fn with_max_degree(&self, max_degree: usize) -> Self {
        let mut r = Self::zero(max_degree);
        r.add_chain(self);
        r
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.terms.keys().map(|w| w.degree()).collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    pub fn homogeneous(&self, n: usize) -> Self {
        let mut r = Self::zero(self.max_degree);
        r.report = self.report;
        for (w, c) in &self.terms {
            if w.degree() == n {
                r.terms.insert(w.clone(), c.clone());
            }
        }
        r
    }

    /// Restrict to degrees strictly below `n`.
    pub fn below(&self, n: usize) -> Self {
        let mut r = Self::zero(self.max_degree);
        for (w, c) in &self.terms {
            if w.degree() < n {
                r.terms.insert(w.clone(), c.clone());
            }
        }
        r
    }

    pub fn filter_parity(&self, odd: bool) -> Self {
        let mut r = Self::zero(self.max_degree);
        r.report = self.report;
        for (w, c) in &self.terms {
            if (w.degree() % 2 == 1) == odd {
                r.terms.insert(w.clone(), c.clone());
            }
        }
        r
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.magnitude()).fold(0.0, f64::max)
    }

    pub fn map_letters<M, T>(&self, f: impl Fn(&L) -> M, g: impl Fn(&S) -> T) -> FormChain<M, T>
    where
        M: Clone + Hash + Eq + Ord + fmt::Debug,
        T: Scalar,
    {
        let mut r = FormChain::zero(self.max_degree);
        for (w, c) in &self.terms {
            r.add_term(Word { head: w.head.as_ref().map(&f), tail: w.tail.iter().map(&f).collect() }, g(c));
        }
        r
    }
}

fn push_product<A: Algebra>(
    alg: &A,
    a: &Option<A::Letter>,
    b: &Option<A::Letter>,
    f: &mut dyn FnMut(Option<A::Letter>, A::Scalar),
) {
    match (a, b) {
        (None, None) => f(None, A::Scalar::one()),
        (None, Some(x)) | (Some(x), None) => f(Some(x.clone()), A::Scalar::one()),
        (Some(x), Some(y)) => alg.multiply(x, y, &mut |k, c| f(Some(k), c)),
    }
}

fn sign<S: Scalar>(odd: bool) -> S {
    if odd {
        -S::one()
    } else {
        S::one()
    }
}

type Chain<A> = FormChain<<A as Algebra>::Letter, <A as Algebra>::Scalar>;

/// d(a0 da1 ... dan) = da0 da1 ... dan, and d kills words with a unit head.
pub fn d<L, S>(x: &FormChain<L, S>) -> FormChain<L, S>
where
    L: Clone + Hash + Eq + Ord + fmt::Debug,
    S: Scalar,
{
    let mut r = FormChain::zero(x.max_degree);
    r.report = x.report;
    for (w, c) in &x.terms {
        if let Some(h) = &w.head {
            let mut tail: Slots<L> = SmallVec::with_capacity(w.tail.len() + 1);
            tail.push(h.clone());
            tail.extend(w.tail.iter().cloned());
            r.add_term(Word { head: None, tail }, c.clone());
        }
    }
    r
}

/// Hochschild boundary; b vanishes on degree zero.
pub fn b<A: Algebra>(alg: &A, x: &Chain<A>) -> Chain<A> {
    let mut r = FormChain::zero(x.max_degree);
    r.report = x.report;
    for (w, c) in &x.terms {
        b_word(alg, w, c, &mut r);
    }
    r
}

fn b_word<A: Algebra>(alg: &A, w: &Word<A::Letter>, c: &A::Scalar, r: &mut Chain<A>) {
    let n = w.tail.len();
    if n == 0 {
        return;
    }
    // a0 a1 da2 ... dan
    push_product(alg, &w.head, &Some(w.tail[0].clone()), &mut |h, s| {
        r.add_term(Word { head: h, tail: w.tail[1..].iter().cloned().collect() }, s * c.clone());
    });
    for i in 1..n {
        let sg: A::Scalar = sign(i % 2 == 1);
        alg.multiply(&w.tail[i - 1], &w.tail[i], &mut |k, s| {
            let mut tail: Slots<A::Letter> = SmallVec::with_capacity(n - 1);
            tail.extend(w.tail[..i - 1].iter().cloned());
            tail.push(k);
            tail.extend(w.tail[i + 1..].iter().cloned());
            r.add_term(Word { head: w.head.clone(), tail }, s * c.clone() * sg.clone());
        });
    }
    let sg: A::Scalar = sign(n % 2 == 1);
    push_product(alg, &Some(w.tail[n - 1].clone()), &w.head, &mut |h, s| {
        r.add_term(Word { head: h, tail: w.tail[..n - 1].iter().cloned().collect() }, s * c.clone() * sg.clone());
    });
}

/// Karoubi operator kappa = 1 - (db + bd).
pub fn kappa<A: Algebra>(alg: &A, x: &Chain<A>) -> Chain<A> {
    let db = d(&b(alg, x));
    let bd = b(alg, &d(x));
    x.minus(&db).minus(&bd)
}

/// Connes' B = (1 + kappa + ... + kappa^n) d on degree n.
pub fn connes_b<A: Algebra>(alg: &A, x: &Chain<A>) -> Chain<A> {
    let mut r = FormChain::zero(x.max_degree);
    r.report = x.report;
    for n in x.degrees() {
        let mut v = d(&x.homogeneous(n));
        r.add_chain(&v);
        for _ in 0..n {
            v = kappa(alg, &v);
            r.add_chain(&v);
        }
    }
    r
}

/// Product in the DG algebra of forms.
pub fn dg_mul<A: Algebra>(alg: &A, x: &Chain<A>, y: &Chain<A>) -> Chain<A> {
    let max = x.max_degree.min(y.max_degree);
    let mut r = FormChain::zero(max);
    r.report = x.report;
    r.report.merge(&y.report);
    for (u, cu) in &x.terms {
        for (v, cv) in &y.terms {
            if u.degree() + v.degree() > max {
                r.report.dropped_terms += 1;
                r.report.max_dropped_degree = r.report.max_dropped_degree.max(u.degree() + v.degree());
                continue;
            }
            let c = cu.clone() * cv.clone();
            word_mul(alg, u, v, &mut |w, s| r.add_term(w, s * c.clone()));
        }
    }
    r
}

/// Product of two basis words in the DG algebra; degrees add.
pub fn word_mul<A: Algebra>(
    alg: &A,
    u: &Word<A::Letter>,
    v: &Word<A::Letter>,
    out: &mut dyn FnMut(Word<A::Letter>, A::Scalar),
) {
    let append = |mut w: Word<A::Letter>| {
        w.tail.extend(v.tail.iter().cloned());
        w
    };
    let Some(c) = &v.head else {
        out(append(u.clone()), A::Scalar::one());
        return;
    };
    let n = u.tail.len();
    if n == 0 {
        push_product(alg, &u.head, &Some(c.clone()), &mut |h, s| {
            out(append(Word { head: h, tail: SmallVec::new() }), s)
        });
        return;
    }
    // (a0 da1 ... dan) c
    let sg: A::Scalar = sign(n % 2 == 1);
    push_product(alg, &u.head, &Some(u.tail[0].clone()), &mut |h, s| {
        let mut tail: Slots<A::Letter> = u.tail[1..].iter().cloned().collect();
        tail.push(c.clone());
        out(append(Word { head: h, tail }), s * sg.clone());
    });
    for i in 1..=n {
        let sg: A::Scalar = sign((n - i) % 2 == 1);
        let next = if i < n { &u.tail[i] } else { c };
        alg.multiply(&u.tail[i - 1], next, &mut |k, s| {
            let mut tail: Slots<A::Letter> = SmallVec::with_capacity(n);
            tail.extend(u.tail[..i - 1].iter().cloned());
            tail.push(k);
            if i < n {
                tail.extend(u.tail[i + 1..].iter().cloned());
                tail.push(c.clone());
            }
            out(append(Word { head: u.head.clone(), tail }), s * sg.clone());
        });
    }
}

/// Fedosov product x . y = xy - dx dy.
pub fn fedosov<A: Algebra>(alg: &A, x: &Chain<A>, y: &Chain<A>) -> Chain<A> {
    let xy = dg_mul(alg, x, y);
    let dxdy = dg_mul(alg, &d(x), &d(y));
    xy.minus(&dxdy)
}

/// Fedosov product of two basis words, written into `out`; terms above `max` are counted in `dropped`.
pub fn fedosov_words<A: Algebra>(
    alg: &A,
    u: &Word<A::Letter>,
    v: &Word<A::Letter>,
    max: usize,
    out: &mut FormChain<A::Letter, A::Scalar>,
) {
    if u.degree() + v.degree() > max {
        out.report.dropped_terms += 1;
        out.report.max_dropped_degree = out.report.max_dropped_degree.max(u.degree() + v.degree());
        return;
    }
    word_mul(alg, u, v, &mut |w, s| out.add_term(w, s));
    if let (Some(hu), Some(hv)) = (&u.head, &v.head) {
        let mut du: Slots<A::Letter> = SmallVec::new();
        du.push(hu.clone());
        du.extend(u.tail.iter().cloned());
        let mut dv: Slots<A::Letter> = SmallVec::new();
        dv.push(hv.clone());
        dv.extend(v.tail.iter().cloned());
        du.extend(dv);
        out.add_term(Word { head: None, tail: du }, -A::Scalar::one());
    }
}

/// Rescale degree n by (-1)^[n/2] [n/2]!, or by its inverse.
pub fn rescale_normalization<L, S>(x: &FormChain<L, S>, inverse: bool) -> FormChain<L, S>
where
    L: Clone + Hash + Eq + Ord + fmt::Debug,
    S: Scalar,
{
    let mut r = FormChain::zero(x.max_degree);
    r.report = x.report;
    for (w, c) in &x.terms {
        let k = (w.degree() / 2) as u64;
        let f = factorial_q(k);
        let f = if inverse { Q::from(1) / f } else { f };
        let f = if k % 2 == 1 { -f } else { f };
        r.add_term(w.clone(), c.clone() * S::from_q(&f));
    }
    r
}

/// Linear combination of nonempty tensor words a1 (x) ... (x) am.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorChain<L: Hash + Eq, S> {
    pub terms: FxHashMap<Slots<L>, S>,
}

impl<L: Clone + Hash + Eq + Ord + fmt::Debug, S: Scalar> TensorChain<L, S> {
    pub fn zero() -> Self {
        TensorChain { terms: FxHashMap::default() }
    }
    pub fn add_term(&mut self, w: Slots<L>, s: S) {
        if s.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            std::collections::hash_map::Entry::Occupied(mut e) => {
                *e.get_mut() += s;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(s);
            }
        }
    }
    pub fn plus(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (w, c) in &o.terms {
            r.add_term(w.clone(), c.clone());
        }
        r
    }
    /// Concatenation product.
    pub fn concat(&self, o: &Self) -> Self {
        let mut r = Self::zero();
        for (u, a) in &self.terms {
            for (v, b) in &o.terms {
                let mut w = u.clone();
                w.extend(v.iter().cloned());
                r.add_term(w, a.clone() * b.clone());
            }
        }
        r
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Even forms to tensor words: a0 da1 ... da2n -> a0 (x) w(a1,a2) (x) ... with w(a,b) = ab - a(x)b.
pub fn forms_to_tensor<A: Algebra>(alg: &A, x: &Chain<A>) -> Result<TensorChain<A::Letter, A::Scalar>> {
    let mut r = TensorChain::zero();
    for (w, c) in &x.terms {
        if w.degree() % 2 == 1 {
            return Err(Error::Precondition("tensor correspondence needs even forms".into()));
        }
        if w.is_unit() {
            return Err(Error::Precondition("the adjoined unit has no tensor image".into()));
        }
        let mut acc: Vec<(Slots<A::Letter>, A::Scalar)> = vec![(
            w.head.iter().cloned().collect(),
            c.clone(),
        )];
        for pair in w.tail.chunks(2) {
            let mut next = Vec::new();
            for (p, s) in &acc {
                alg.multiply(&pair[0], &pair[1], &mut |k, t| {
                    let mut q = p.clone();
                    q.push(k);
                    next.push((q, s.clone() * t));
                });
                let mut q = p.clone();
                q.push(pair[0].clone());
                q.push(pair[1].clone());
                next.push((q, -s.clone()));
            }
            acc = next;
        }
        for (p, s) in acc {
            r.add_term(p, s);
        }
    }
    Ok(r)
}

/// Tensor words to even forms: a1 (x) ... (x) am -> a1 . ... . am (Fedosov).
pub fn tensor_to_forms<A: Algebra>(
    alg: &A,
    t: &TensorChain<A::Letter, A::Scalar>,
    max_degree: usize,
) -> Chain<A> {
    let mut r = FormChain::zero(max_degree);
    for (w, c) in &t.terms {
        let mut acc = FormChain::single(max_degree, Word::letter(w[0].clone()), c.clone());
        for a in &w[1..] {
            let mut next = FormChain::zero(max_degree);
            next.report = acc.report;
            for (u, s) in &acc.terms {
                let mut part = FormChain::zero(max_degree);
                fedosov_words(alg, u, &Word::letter(a.clone()), max_degree, &mut part);
                next.add_scaled(&part, s);
            }
            acc = next;
        }
        r.add_chain(&acc);
    }
    r
}

/// Apply a linear map letterwise to every slot of every word (the adjoined unit is fixed).
pub fn pushforward<L, M, S>(
    x: &FormChain<L, S>,
    rho: &dyn Fn(&L) -> Vec<(M, S)>,
) -> FormChain<M, S>
where
    L: Clone + Hash + Eq + Ord + fmt::Debug,
    M: Clone + Hash + Eq + Ord + fmt::Debug,
    S: Scalar,
{
    let mut r = FormChain::zero(x.max_degree);
    r.report = x.report;
    for (w, c) in &x.terms {
        let mut acc: Vec<(Word<M>, S)> = match &w.head {
            None => vec![(Word::unit(), c.clone())],
            Some(h) => rho(h).into_iter().map(|(m, s)| (Word::letter(m), s * c.clone())).collect(),
        };
        for a in &w.tail {
            let img = rho(a);
            let mut next = Vec::with_capacity(acc.len() * img.len());
            for (u, s) in &acc {
                for (m, t) in &img {
                    let mut v = u.clone();
                    v.tail.push(m.clone());
                    next.push((v, s.clone() * t.clone()));
                }
            }
            acc = next;
        }
        for (u, s) in acc {
            r.add_term(u, s);
        }
    }
    r
}

impl<S: Scalar> FormChain<u32, S> {
    /// Text form, one line per term: `deg n: coeff * [i0|i1|...|in]`, `u` marking the adjoined unit.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (w, c) in self.sorted_terms() {
            let head = w.head.map(|h| h.to_string()).unwrap_or_else(|| "u".into());
            let mut slots = vec![head];
            slots.extend(w.tail.iter().map(|x| x.to_string()));
            out.push_str(&format!("deg {}: {} * [{}]\n", w.degree(), c, slots.join("|")));
        }
        out
    }
}

impl FormChain<u32, Q> {
    pub fn from_text(text: &str, max_degree: usize) -> Result<Self> {
        let mut r = FormChain::zero(max_degree);
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| Error::Parse { line: i + 1, msg: msg.to_string() };
            let rest = line.strip_prefix("deg ").ok_or_else(|| err("expected 'deg'"))?;
            let (deg, rest) = rest.split_once(':').ok_or_else(|| err("expected ':'"))?;
            let deg: usize = deg.trim().parse().map_err(|_| err("bad degree"))?;
            let (coeff, word) = rest.split_once('*').ok_or_else(|| err("expected '*'"))?;
            let coeff: Q = coeff.trim().parse().map_err(|_| err("bad coefficient"))?;
            let word = word.trim().strip_prefix('[').and_then(|w| w.strip_suffix(']')).ok_or_else(|| err("expected [..]"))?;
            let slots: Vec<&str> = word.split('|').collect();
            let head = match slots[0].trim() {
                "u" => None,
                s => Some(s.parse::<u32>().map_err(|_| err("bad slot"))?),
            };
            let tail = slots[1..]
                .iter()
                .map(|s| s.trim().parse::<u32>().map_err(|_| err("bad slot")))
                .collect::<Result<Slots<u32>>>()?;
            if tail.len() != deg {
                return Err(err("degree does not match word length"));
            }
            r.add_term(Word { head, tail }, coeff);
        }
        Ok(r)
    }
}
