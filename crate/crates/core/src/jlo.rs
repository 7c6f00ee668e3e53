//! The lift ρ* of tensor-algebra letters to operator-valued group forms, the
//! JLO components χ₀, χ₁ with values in X(TB), the Chern-Simons transgressions
//! and the Chern character χ(γ(ê)) of an idempotent.
//!
//! Operator forms are tables from B-words over G to matrices, kept in the
//! eigenbasis of D. The target X(TB) is realized as even and odd forms over the
//! group algebra B with complex coefficients.

use std::collections::BTreeMap;

use crate::algebra::AlgebraSpec;
use crate::chern::gamma_coefficient;
use crate::error::{Error, Result};
use crate::forms::{b, connes_b, fedosov_words, FormChain, Word};
use crate::scalar::{Scalar, C64, Q};
use crate::spectral::{c, tau_bracket_eigen, BracketTable, CMat, ModelAlgebra, Parity, SpectralModel};
use crate::ta::TruncatedTensorAlgebra;
use crate::xcomplex::{natural_pairing, x_bbar, x_natd, XChain};

/// Sign s in s (bbar + natural-d) χ^n = χ^{n-1} b + χ^{n+1} B, per parity of the model.
pub const CHAIN_SIGN_EVEN: f64 = 1.0;
pub const CHAIN_SIGN_ODD: f64 = -1.0;

/// Signs (ε, σ) in d_t χ = ε (bbar + natural-d) cs + σ (cs b + cs B), per parity of the model,
/// for cs the coefficient of dt with D inserted under the Koszul rule.
pub const TRANSGRESSION_SIGNS_EVEN: (f64, f64) = (1.0, 1.0);
pub const TRANSGRESSION_SIGNS_ODD: (f64, f64) = (-1.0, 1.0);

pub type GroupForm = FormChain<u32, C64>;
pub type OuterChain<S> = FormChain<Word<u32>, S>;

/// Element of Ω_c(G; ℓ¹): B-words with matrix values (eigenbasis of D).
#[derive(Clone, Debug, Default)]
pub struct OperatorForm {
    pub terms: BTreeMap<Word<u32>, CMat>,
}

impl OperatorForm {
    pub fn unit(dim: usize) -> Self {
        let mut f = OperatorForm::default();
        f.terms.insert(Word::unit(), CMat::identity(dim, dim));
        f
    }
    pub fn add(&mut self, w: Word<u32>, m: CMat) {
        match self.terms.get_mut(&w) {
            Some(v) => *v += m,
            None => {
                self.terms.insert(w, m);
            }
        }
    }
    pub fn add_scaled(&mut self, o: &OperatorForm, s: C64) {
        for (w, m) in &o.terms {
            self.add(w.clone(), m * s);
        }
    }
    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|m| m.iter().all(|z| z.norm() == 0.0))
    }
    /// [D, .] applied slotwise; D commutes with every r(g).
    pub fn commutator(&self, lambdas: &[f64]) -> OperatorForm {
        let mut f = OperatorForm::default();
        for (w, m) in &self.terms {
            let cm = CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * (lambdas[i] - lambdas[j]));
            f.terms.insert(w.clone(), cm);
        }
        f
    }
    pub fn max_abs_diff(&self, o: &OperatorForm) -> f64 {
        let mut worst: f64 = 0.0;
        for (w, m) in &self.terms {
            let d = match o.terms.get(w) {
                Some(n) => m - n,
                None => m.clone(),
            };
            worst = worst.max(d.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
        for (w, n) in &o.terms {
            if !self.terms.contains_key(w) {
                worst = worst.max(n.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        worst
    }
}

/// How the inserted operator D picks up a sign inside a transgression bracket.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Insertion {
    Plain,
    /// (-1) to the number of commutator entries standing before D.
    Koszul,
}

/// The insertion rule used by `chern_simons`, fixed against the transgression identity.
pub const INSERTION: Insertion = Insertion::Koszul;

/// A spectral model with its algebra, the representation of letters and the B-side data.
pub struct Jlo<'m> {
    pub model: &'m SpectralModel,
    pub ma: ModelAlgebra,
    pub b_alg: AlgebraSpec<C64>,
    /// Retained B-degree of target forms.
    pub max_degree: usize,
    /// Sign rule for D inside the transgression brackets.
    pub insertion: Insertion,
    gamma: CMat,
    dirac: OperatorForm,
    letters: Vec<Vec<(u32, CMat)>>,
}

impl<'m> Jlo<'m> {
    pub fn new(model: &'m SpectralModel, max_degree: usize) -> Result<Self> {
        let ma = model.model_algebra()?;
        let b_alg = crate::algebra::group_algebra(&model.group, model.haar).map_scalars(C64::from_q);
        let mut letters = Vec::new();
        for l in 0..ma.algebra.dim() as u32 {
            let v = model.rho_letter(&ma, l)?;
            letters.push(v.into_iter().map(|(g, m)| (g as u32, model.to_eigenbasis(&m))).collect());
        }
        let n = model.dim();
        let lam = model.eigenvalues();
        let mut dirac = OperatorForm::default();
        dirac.terms.insert(Word::unit(), CMat::from_fn(n, n, |i, j| if i == j { c(lam[i], 0.0) } else { c(0.0, 0.0) }));
        Ok(Jlo { insertion: INSERTION, gamma: model.grading_eigen(), model, ma, b_alg, max_degree, dirac, letters })
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    /// ρ*(a_0 da_1 ... da_2k)(g_0, ..., g_2k) = π(a_0(g_0)) r(g_0) ... π(a_2k(g_2k)) r(g_2k).
    pub fn rho_star(&self, w: &Word<u32>) -> OperatorForm {
        let n = self.dim();
        let mut acc: Vec<(Word<u32>, CMat)> = match &w.head {
            Some(l) => self.letters[*l as usize].iter().map(|(g, m)| (Word::letter(*g), m.clone())).collect(),
            None => vec![(Word::unit(), CMat::identity(n, n))],
        };
        for l in &w.tail {
            let mut next = Vec::with_capacity(acc.len());
            for (u, m) in &acc {
                for (g, a) in &self.letters[*l as usize] {
                    let mut v = u.clone();
                    v.tail.push(*g);
                    next.push((v, m * a));
                }
            }
            acc = next;
        }
        let mut f = OperatorForm::default();
        for (u, m) in acc {
            f.add(u, m);
        }
        f
    }

    /// ρ* of a combination of TA letters.
    pub fn rho_star_chain<S: Scalar>(&self, x: &[(Word<u32>, S)]) -> OperatorForm {
        let mut f = OperatorForm::default();
        for (w, s) in x {
            f.add_scaled(&self.rho_star(w), s.to_c64());
        }
        f
    }

    /// Operator form back in the original basis.
    pub fn to_original(&self, f: &OperatorForm) -> BTreeMap<Word<u32>, CMat> {
        f.terms.iter().map(|(w, m)| (w.clone(), self.model.from_eigenbasis(m))).collect()
    }

    /// τ⟨A_1, ..., A_m⟩_t closed through `close` (Γ, or M Γ for a trailing factor M),
    /// with the B-words multiplied by the Fedosov product.
    fn tau_forms(&self, table: &BracketTable, entries: &[&OperatorForm], close: &CMat, max: usize) -> GroupForm {
        let mut out = FormChain::zero(max);
        let mut mats: Vec<&CMat> = Vec::with_capacity(entries.len());
        let start = FormChain::single(max, Word::unit(), C64::one());
        self.tau_walk(table, entries, close, max, 0, &start, &mut mats, &mut out);
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn tau_walk<'a>(
        &self,
        table: &BracketTable,
        entries: &[&'a OperatorForm],
        close: &CMat,
        max: usize,
        budget: usize,
        prefix: &GroupForm,
        mats: &mut Vec<&'a CMat>,
        out: &mut GroupForm,
    ) {
        let k = mats.len();
        if k == entries.len() {
            let s = tau_bracket_eigen(self.model, close, table, mats);
            if s.norm() != 0.0 {
                out.add_scaled(prefix, &s);
            }
            return;
        }
        for (w, m) in &entries[k].terms {
            if budget + w.degree() > max {
                continue;
            }
            let mut next = FormChain::zero(max);
            for (u, s) in prefix.iter() {
                let mut p = FormChain::zero(max);
                fedosov_words(&self.b_alg, u, w, max, &mut p);
                next.add_scaled(&p, s);
            }
            if next.is_zero() {
                continue;
            }
            mats.push(m);
            self.tau_walk(table, entries, close, max, budget + w.degree(), &next, mats, out);
            mats.pop();
        }
    }

    /// natural τ(⟨entries⟩ dZ) in Omega^- B.
    fn tau_natural(&self, table: &BracketTable, entries: &[&OperatorForm], z: &OperatorForm) -> Result<GroupForm> {
        let max = self.max_degree;
        let mut out = FormChain::zero(max);
        for (wz, mz) in &z.terms {
            if wz.is_unit() {
                continue;
            }
            let close = mz * &self.gamma;
            let y = self.tau_forms(table, entries, &close, max - 1);
            if y.is_zero() {
                continue;
            }
            let zf = FormChain::single(max, wz.clone(), C64::one());
            out.add_chain(&natural_pairing(&self.b_alg, &y, &zf, max)?);
        }
        Ok(out)
    }

    fn cyclic_list<'a>(rhos: &'a [OperatorForm], comms: &'a [OperatorForm], i: usize, skip: bool) -> Vec<&'a OperatorForm> {
        // [D,ρ_{i+1}], ..., [D,ρ_n], ρ_0, [D,ρ_1], ..., [D,ρ_i] (ρ_i omitted when `skip`)
        let n = rhos.len() - 1;
        let mut v: Vec<&OperatorForm> = comms[i..n].iter().collect();
        v.push(&rhos[0]);
        let upto = if skip { i - 1 } else { i };
        v.extend(comms[..upto].iter());
        v
    }

    /// χ^n_0(ρ_0 dρ_1 ... dρ_n) for operator forms ρ_i = ρ*(x_i).
    pub fn chi0(&self, t: f64, rhos: &[OperatorForm]) -> GroupForm {
        let table = BracketTable::new(self.model, t);
        self.chi0_with(&table, t, rhos, None)
    }

    fn chi0_with(&self, table: &BracketTable, t: f64, rhos: &[OperatorForm], insert: Option<&OperatorForm>) -> GroupForm {
        let n = rhos.len() - 1;
        let comms: Vec<OperatorForm> = rhos[1..].iter().map(|r| r.commutator(self.model.eigenvalues())).collect();
        let mut out = FormChain::zero(self.max_degree);
        for i in 0..=n {
            let list = Self::cyclic_list(rhos, &comms, i, false);
            let sign = if (i * (n - i)) % 2 == 1 { -1.0 } else { 1.0 };
            match insert {
                None => out.add_scaled(&self.tau_forms(table, &list, &self.gamma, self.max_degree), &c(sign, 0.0)),
                Some(dop) => {
                    for (p, eps) in insertion_slots(self.insertion, &list, n - i) {
                        let mut l2 = list.clone();
                        l2.insert(p, dop);
                        out.add_scaled(&self.tau_forms(table, &l2, &self.gamma, self.max_degree), &c(sign * eps, 0.0));
                    }
                }
            }
        }
        out.scale(&c((-t).powi(n as i32), 0.0))
    }

    /// χ^{n+1}_1(ρ_0 dρ_1 ... dρ_{n+1}).
    pub fn chi1(&self, t: f64, rhos: &[OperatorForm]) -> Result<GroupForm> {
        let table = BracketTable::new(self.model, t);
        self.chi1_with(&table, t, rhos, None)
    }

    fn chi1_with(&self, table: &BracketTable, t: f64, rhos: &[OperatorForm], insert: Option<&OperatorForm>) -> Result<GroupForm> {
        let m = rhos.len() - 1;
        if m == 0 {
            return Err(Error::Precondition("chi_1 needs a form of degree at least one".into()));
        }
        let n = m - 1;
        let comms: Vec<OperatorForm> = rhos[1..].iter().map(|r| r.commutator(self.model.eigenvalues())).collect();
        let mut out = FormChain::zero(self.max_degree);
        for i in 1..=m {
            let list = Self::cyclic_list(rhos, &comms, i, true);
            let sign = if (i * (n + 1 - i)) % 2 == 1 { -1.0 } else { 1.0 };
            match insert {
                None => out.add_scaled(&self.tau_natural(table, &list, &rhos[i])?, &c(sign, 0.0)),
                Some(dop) => {
                    for (p, eps) in insertion_slots(self.insertion, &list, m - i) {
                        let mut l2 = list.clone();
                        l2.insert(p, dop);
                        out.add_scaled(&self.tau_natural(table, &l2, &rhos[i])?, &c(sign * eps, 0.0));
                    }
                }
            }
        }
        Ok(out.scale(&c((-t).powi(n as i32), 0.0)))
    }

    /// χ on a factored form ρ_0 dρ_1 ... dρ_n: χ_0 when n has the parity of the model, else χ_1.
    pub fn chi_factored(&self, table: &BracketTable, t: f64, rhos: &[OperatorForm]) -> Result<XChain<u32, C64>> {
        let n = rhos.len() - 1;
        let mut x = XChain::zero(self.max_degree);
        if n % 2 == parity_bit(self.model.parity) {
            x.even = self.chi0_with(table, t, rhos, None);
        } else if n > 0 {
            x.odd = self.chi1_with(table, t, rhos, None)?;
        }
        Ok(x)
    }

    /// Chern-Simons transgression on a factored form: cs_0 when n has the parity opposite to
    /// the model, else cs_1. Returned as the coefficient of dt.
    pub fn cs_factored(&self, table: &BracketTable, t: f64, rhos: &[OperatorForm]) -> Result<XChain<u32, C64>> {
        let n = rhos.len() - 1;
        let mut x = XChain::zero(self.max_degree);
        if n % 2 != parity_bit(self.model.parity) {
            x.even = self.chi0_with(table, t, rhos, Some(&self.dirac));
        } else if n > 0 {
            x.odd = self.chi1_with(table, t, rhos, Some(&self.dirac))?;
        }
        Ok(x)
    }

    fn outer_rhos(&self, w: &Word<Word<u32>>) -> Vec<OperatorForm> {
        let mut v = vec![match &w.head {
            Some(x) => self.rho_star(x),
            None => OperatorForm::unit(self.dim()),
        }];
        v.extend(w.tail.iter().map(|x| self.rho_star(x)));
        v
    }

    /// χ(x) for a chain of forms over TA.
    pub fn chi<S: Scalar>(&self, t: f64, x: &OuterChain<S>) -> Result<XChain<u32, C64>> {
        let table = BracketTable::new(self.model, t);
        let mut out = XChain::zero(self.max_degree);
        for (w, s) in x.sorted_terms() {
            let v = self.chi_factored(&table, t, &self.outer_rhos(&w))?;
            out = out.plus(&v.scale(&s.to_c64()));
        }
        Ok(out)
    }

    /// cs(x) for a chain of forms over TA (coefficient of dt).
    pub fn chern_simons<S: Scalar>(&self, t: f64, x: &OuterChain<S>) -> Result<XChain<u32, C64>> {
        let table = BracketTable::new(self.model, t);
        let mut out = XChain::zero(self.max_degree);
        for (w, s) in x.sorted_terms() {
            let v = self.cs_factored(&table, t, &self.outer_rhos(&w))?;
            out = out.plus(&v.scale(&s.to_c64()));
        }
        Ok(out)
    }

    /// X-complex boundary on the target.
    pub fn boundary(&self, x: &XChain<u32, C64>) -> Result<XChain<u32, C64>> {
        Ok(XChain { even: x_bbar(&self.b_alg, &x.odd)?, odd: x_natd(&self.b_alg, &x.even)? })
    }

    /// s (bbar + natural-d) χ(x) - χ(bx) - χ(Bx) on target degrees below `valid_below`.
    pub fn chain_map_residual(&self, ta: &TruncatedTensorAlgebra<&AlgebraSpec<Q>>, t: f64, x: &OuterChain<Q>, valid_below: usize) -> Result<f64> {
        let s = chain_sign(self.model.parity);
        let lhs = self.boundary(&self.chi(t, x)?)?.scale(&c(s, 0.0));
        let rhs = self.chi(t, &b(ta, x))?.plus(&self.chi(t, &connes_b(ta, x))?);
        Ok(lhs.minus(&rhs).below(valid_below).max_abs())
    }

    /// Parts of the transgression identity at time t with step h: d_t χ by central difference,
    /// the boundary of cs, and cs composed with b + B.
    pub fn transgression_parts(
        &self,
        ta: &TruncatedTensorAlgebra<&AlgebraSpec<Q>>,
        t: f64,
        h: f64,
        x: &OuterChain<Q>,
        valid_below: usize,
    ) -> Result<TransgressionParts> {
        let dchi = self.chi(t + h, x)?.minus(&self.chi(t - h, x)?).scale(&c(0.5 / h, 0.0)).below(valid_below);
        let dcs = self.boundary(&self.chern_simons(t, x)?)?.below(valid_below);
        let csb = self.chern_simons(t, &b(ta, x))?.plus(&self.chern_simons(t, &connes_b(ta, x))?).below(valid_below);
        Ok(TransgressionParts { dchi, dcs, csb })
    }

    /// ‖d_t χ - ε (bbar + natural-d) cs - σ (cs b + cs B)‖∞.
    pub fn transgression_check(&self, ta: &TruncatedTensorAlgebra<&AlgebraSpec<Q>>, t: f64, h: f64, x: &OuterChain<Q>, valid_below: usize) -> Result<f64> {
        let p = self.transgression_parts(ta, t, h, x, valid_below)?;
        Ok(p.residual(transgression_signs(self.model.parity)))
    }

    /// ch(tD) = χ(γ(ê)) assembled from the factored components
    /// χ^{2n}((ê - 1/2) dê ... dê) (χ_0 on even models, χ_1 on odd models).
    pub fn chern_cycle(&self, t: f64, lift: &FormChain<u32, Q>, n_max: usize) -> Result<XChain<u32, C64>> {
        if lift.max_degree() > self.max_degree {
            return Err(Error::Truncation(format!(
                "target truncation {} is below the lift degree {}",
                self.max_degree,
                lift.max_degree()
            )));
        }
        let table = BracketTable::new(self.model, t);
        let letters: Vec<(Word<u32>, Q)> = lift.sorted_terms().into_iter().filter(|(w, _)| !w.is_unit()).collect();
        let e = self.rho_star_chain(&letters);
        let mut e0 = e.clone();
        e0.add_scaled(&OperatorForm::unit(self.dim()), c(-0.5, 0.0));
        let mut out = self.chi_factored(&table, t, std::slice::from_ref(&e))?;
        for n in 1..=n_max {
            let mut rhos = vec![e0.clone()];
            rhos.extend(std::iter::repeat_n(e.clone(), 2 * n));
            let coef = crate::scalar::q_to_f64(&gamma_coefficient(n as u64));
            out = out.plus(&self.chi_factored(&table, t, &rhos)?.scale(&c(coef, 0.0)));
        }
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub struct TransgressionParts {
    pub dchi: XChain<u32, C64>,
    pub dcs: XChain<u32, C64>,
    pub csb: XChain<u32, C64>,
}

impl TransgressionParts {
    pub fn residual(&self, signs: (f64, f64)) -> f64 {
        self.dchi.minus(&self.dcs.scale(&c(signs.0, 0.0))).minus(&self.csb.scale(&c(signs.1, 0.0))).max_abs()
    }
}

fn parity_bit(p: Parity) -> usize {
    match p {
        Parity::Even => 0,
        Parity::Odd => 1,
    }
}

pub fn chain_sign(p: Parity) -> f64 {
    match p {
        Parity::Even => CHAIN_SIGN_EVEN,
        Parity::Odd => CHAIN_SIGN_ODD,
    }
}

pub fn transgression_signs(p: Parity) -> (f64, f64) {
    match p {
        Parity::Even => TRANSGRESSION_SIGNS_EVEN,
        Parity::Odd => TRANSGRESSION_SIGNS_ODD,
    }
}

/// Insertion slots 0..=len for D, with the sign of the frozen rule. The first `comms_before_rho0`
/// entries of the list and all entries after ρ_0 are commutators.
fn insertion_slots(rule: Insertion, list: &[&OperatorForm], comms_before_rho0: usize) -> Vec<(usize, f64)> {
    (0..=list.len())
        .map(|p| {
            let odd_before = if p <= comms_before_rho0 { p } else { p - 1 };
            let eps = match rule {
                Insertion::Plain => 1.0,
                Insertion::Koszul => {
                    if odd_before % 2 == 1 {
                        -1.0
                    } else {
                        1.0
                    }
                }
            };
            (p, eps)
        })
        .collect()
}

/// Group-form table as CSV rows: tuple, real part, imaginary part.
pub fn group_form_csv(x: &GroupForm) -> String {
    let mut s = String::from("head,tail,re,im\n");
    for (w, v) in x.sorted_terms() {
        let head = w.head.map(|h| h.to_string()).unwrap_or_else(|| "1".into());
        let tail: Vec<String> = w.tail.iter().map(|g| g.to_string()).collect();
        s.push_str(&format!("{},{},{:.16e},{:.16e}\n", head, tail.join(" "), v.re, v.im));
    }
    s
}
