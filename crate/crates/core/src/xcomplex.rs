//! The X-complex X(TA) = TA + Omega^1 TA_natural, realized on even and odd
//! forms over A with the boundaries bbar (odd to even) and natural-d (even to odd).

use std::fmt;
use std::hash::Hash;

use crate::algebra::{Algebra, AlgebraSpec};
use crate::error::{Error, Result};
use crate::forms::{b, d, fedosov, forms_to_tensor, kappa, pushforward, tensor_to_forms, FormChain, TensorChain, Word};
use crate::scalar::Scalar;

type Chain<A> = FormChain<<A as Algebra>::Letter, <A as Algebra>::Scalar>;

/// Element of X(TA): even forms (TA) and odd forms (Omega^1 TA_natural).
#[derive(Clone, Debug)]
pub struct XChain<L: Hash + Eq, S> {
    pub even: FormChain<L, S>,
    pub odd: FormChain<L, S>,
}

impl<L: Clone + Hash + Eq, S: Scalar> PartialEq for XChain<L, S> {
    fn eq(&self, o: &Self) -> bool {
        self.even == o.even && self.odd == o.odd
    }
}

impl<L, S> XChain<L, S>
where
    L: Clone + Hash + Eq + Ord + fmt::Debug,
    S: Scalar,
{
    pub fn zero(max_degree: usize) -> Self {
        XChain { even: FormChain::zero(max_degree), odd: FormChain::zero(max_degree) }
    }
    /// Split a mixed chain by parity.
    pub fn from_forms(x: &FormChain<L, S>) -> Self {
        XChain { even: x.filter_parity(false), odd: x.filter_parity(true) }
    }
    pub fn total(&self) -> FormChain<L, S> {
        self.even.plus(&self.odd)
    }
    pub fn is_zero(&self) -> bool {
        self.even.is_zero() && self.odd.is_zero()
    }
    pub fn minus(&self, o: &Self) -> Self {
        XChain { even: self.even.minus(&o.even), odd: self.odd.minus(&o.odd) }
    }
    pub fn plus(&self, o: &Self) -> Self {
        XChain { even: self.even.plus(&o.even), odd: self.odd.plus(&o.odd) }
    }
    pub fn scale(&self, s: &S) -> Self {
        XChain { even: self.even.scale(s), odd: self.odd.scale(s) }
    }
    pub fn below(&self, n: usize) -> Self {
        XChain { even: self.even.below(n), odd: self.odd.below(n) }
    }
    pub fn max_abs(&self) -> f64 {
        self.even.max_abs().max(self.odd.max_abs())
    }
}

/// bbar = b - (1 + kappa) d on odd forms.
pub fn x_bbar<A: Algebra>(alg: &A, x: &Chain<A>) -> Result<Chain<A>> {
    if x.degrees().iter().any(|n| n % 2 == 0) {
        return Err(Error::Precondition("bbar acts on odd forms".into()));
    }
    let dx = d(x);
    Ok(b(alg, x).minus(&dx).minus(&kappa(alg, &dx)))
}

/// natural-d = sum_{i<=2n} kappa^i d - sum_{i<n} kappa^{2i} b on forms of degree 2n.
pub fn x_natd<A: Algebra>(alg: &A, x: &Chain<A>) -> Result<Chain<A>> {
    if x.degrees().iter().any(|n| n % 2 == 1) {
        return Err(Error::Precondition("natural-d acts on even forms".into()));
    }
    let mut r = FormChain::zero(x.max_degree());
    for deg in x.degrees() {
        let part = x.homogeneous(deg);
        let n = deg / 2;
        let mut v = d(&part);
        r.add_chain(&v);
        for _ in 1..=2 * n {
            v = kappa(alg, &v);
            r.add_chain(&v);
        }
        if n > 0 {
            let mut w = b(alg, &part);
            r.add_scaled(&w, &(-A::Scalar::one()));
            for _ in 1..n {
                w = kappa(alg, &kappa(alg, &w));
                r.add_scaled(&w, &(-A::Scalar::one()));
            }
        }
    }
    Ok(r)
}

/// The X-complex boundary: (bbar of the odd part, natural-d of the even part).
pub fn x_boundary<A: Algebra>(alg: &A, x: &XChain<A::Letter, A::Scalar>) -> Result<XChain<A::Letter, A::Scalar>> {
    Ok(XChain { even: x_bbar(alg, &x.odd)?, odd: x_natd(alg, &x.even)? })
}

/// natural(y dz) in Omega^- for even y, z, through Omega^1 TA_natural = T̃A (x) A and
/// (w, a) -> form(w) da: with z = a_1 (x) ... (x) a_m the j-th term is
/// form(a_{j+1}..a_m) . y . form(a_1..a_{j-1}) da_j.
pub fn natural_pairing<A: Algebra>(alg: &A, y: &Chain<A>, z: &Chain<A>, max_degree: usize) -> Result<Chain<A>> {
    let inner = max_degree.saturating_sub(1);
    let y = y.with_max_degree(inner);
    let mut r = FormChain::zero(max_degree);
    let piece = |s: &[A::Letter]| -> Chain<A> {
        if s.is_empty() {
            FormChain::single(inner, Word::unit(), A::Scalar::one())
        } else {
            let mut t = TensorChain::zero();
            t.add_term(s.iter().cloned().collect(), A::Scalar::one());
            tensor_to_forms(alg, &t, inner)
        }
    };
    let zt = forms_to_tensor(alg, &z.filter_parity(false).with_max_degree(max_degree))?;
    for (tw, c) in &zt.terms {
        for j in 0..tw.len() {
            let rot = fedosov(alg, &fedosov(alg, &piece(&tw[j + 1..]), &y), &piece(&tw[..j]));
            for (w, s) in rot.iter() {
                let mut w = w.clone();
                w.tail.push(tw[j].clone());
                r.add_term(w, s.clone() * c.clone());
            }
        }
    }
    Ok(r)
}

/// Check that a linear map between basis-constant algebras is multiplicative.
pub fn check_homomorphism<S: Scalar>(
    src: &AlgebraSpec<S>,
    dst: &AlgebraSpec<S>,
    rho: &dyn Fn(u32) -> Vec<(u32, S)>,
) -> Result<()> {
    let img = |i: u32| {
        let mut v = vec![S::zero(); dst.dim()];
        for (k, c) in rho(i) {
            v[k as usize] += c;
        }
        crate::algebra::Element { coeffs: v }
    };
    for i in 0..src.dim() {
        for j in 0..src.dim() {
            let mut lhs = crate::algebra::Element::zero(dst.dim());
            for (k, c) in src.basis_product(i, j) {
                lhs = lhs.add(&img(*k).scale(c));
            }
            let rhs = dst.mul(&img(i as u32), &img(j as u32));
            let diff = lhs.sub(&rhs);
            let bad = if S::EXACT { !diff.is_zero() } else { diff.max_abs() > 1e-10 };
            if bad {
                return Err(Error::NotHomomorphism(i, j));
            }
        }
    }
    Ok(())
}

/// Lift of an algebra homomorphism to X(TA) -> X(TB), applied slotwise.
pub fn x_morphism_from_hom<S: Scalar>(
    src: &AlgebraSpec<S>,
    dst: &AlgebraSpec<S>,
    rho: &dyn Fn(u32) -> Vec<(u32, S)>,
    x: &XChain<u32, S>,
) -> Result<XChain<u32, S>> {
    check_homomorphism(src, dst, rho)?;
    let f = |l: &u32| rho(*l);
    Ok(XChain { even: pushforward(&x.even, &f), odd: pushforward(&x.odd, &f) })
}
