//! The tensor algebra TA realized as even forms over A with the Fedosov
//! product, truncated above a fixed form degree. Degree > N is an ideal, so
//! the truncation is an honest associative quotient.

use std::sync::Mutex;

use rustc_hash::FxHashMap;

use crate::algebra::Algebra;
use crate::forms::{fedosov_words, FormChain, Word};

type Letter<A> = Word<<A as Algebra>::Letter>;
type Entry<A> = Vec<(Letter<A>, <A as Algebra>::Scalar)>;

/// TA / (forms of degree > N). Letters are basis words of even degree other than the bare unit.
pub struct TruncatedTensorAlgebra<A: Algebra> {
    base: A,
    max_degree: usize,
    cache: Mutex<FxHashMap<(Letter<A>, Letter<A>), Entry<A>>>,
}

impl<A: Algebra> TruncatedTensorAlgebra<A> {
    pub fn new(base: A, max_degree: usize) -> Self {
        TruncatedTensorAlgebra { base, max_degree, cache: Mutex::new(FxHashMap::default()) }
    }
    pub fn base(&self) -> &A {
        &self.base
    }
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }
    /// Embed a form over A (even part, unit excluded) as a combination of TA letters.
    pub fn letters_of(&self, x: &FormChain<A::Letter, A::Scalar>) -> Vec<(Letter<A>, A::Scalar)> {
        x.sorted_terms()
            .into_iter()
            .filter(|(w, _)| w.degree() % 2 == 0 && !w.is_unit() && w.degree() <= self.max_degree)
            .collect()
    }
}

impl<A: Algebra> Algebra for TruncatedTensorAlgebra<A> {
    type Letter = Word<A::Letter>;
    type Scalar = A::Scalar;

    fn multiply(&self, a: &Self::Letter, b: &Self::Letter, out: &mut dyn FnMut(Self::Letter, Self::Scalar)) {
        let key = (a.clone(), b.clone());
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            for (w, c) in hit {
                out(w.clone(), c.clone());
            }
            return;
        }
        let mut prod = FormChain::zero(self.max_degree);
        fedosov_words(&self.base, a, b, self.max_degree, &mut prod);
        let entry: Entry<A> = prod.sorted_terms();
        for (w, c) in &entry {
            out(w.clone(), c.clone());
        }
        self.cache.lock().unwrap().insert(key, entry);
    }
}
