//! Exact verification of the operator identities on universal forms, the
//! Fedosov product and the X-complex, for a given algebra and chain.

use rand::Rng;
use serde::Serialize;

use crate::algebra::{AlgebraSpec, Algebra};
use crate::forms::{b, connes_b, d, dg_mul, fedosov, forms_to_tensor, kappa, tensor_to_forms, FormChain, Slots, Word};
use crate::scalar::Q;
use crate::xcomplex::{x_bbar, x_natd};

#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub degree: usize,
    pub pass: bool,
    pub terms_checked: usize,
}

fn record(out: &mut Vec<IdentityCheck>, name: &str, degree: usize, residual: &FormChain<u32, Q>, size: usize) {
    out.push(IdentityCheck { name: name.into(), degree, pass: residual.is_zero() && residual.report().is_clean(), terms_checked: size });
}

/// Random chain of homogeneous degree `deg` with `terms` terms and small rational coefficients.
pub fn random_chain<R: Rng>(rng: &mut R, dim: usize, deg: usize, terms: usize, max_degree: usize) -> FormChain<u32, Q> {
    let mut c = FormChain::zero(max_degree);
    for _ in 0..terms {
        let head = if rng.gen_bool(0.3) { None } else { Some(rng.gen_range(0..dim) as u32) };
        let tail: Slots<u32> = (0..deg).map(|_| rng.gen_range(0..dim) as u32).collect();
        let num: i64 = rng.gen_range(-5..=5);
        let den: i64 = rng.gen_range(1..=3);
        c.add_term(Word { head, tail }, Q::from_signeds(num, den));
    }
    c
}

fn pow<F: Fn(&FormChain<u32, Q>) -> FormChain<u32, Q>>(f: F, x: &FormChain<u32, Q>, k: usize) -> FormChain<u32, Q> {
    let mut v = x.clone();
    for _ in 0..k {
        v = f(&v);
    }
    v
}

/// Identities of d, b, kappa and B on a homogeneous chain of degree `deg`.
/// The chain's truncation must leave room for degree `deg + 3`; any dropped term fails the check.
pub fn operator_identities(alg: &AlgebraSpec<Q>, x: &FormChain<u32, Q>, deg: usize) -> Vec<IdentityCheck> {
    let mut out = Vec::new();
    let n = x.len();
    let bx = b(alg, x);
    let dx = d(x);
    let kx = kappa(alg, x);
    let bbx = connes_b(alg, x);
    record(&mut out, "b^2", deg, &b(alg, &bx), n);
    record(&mut out, "d^2", deg, &d(&dx), n);
    record(&mut out, "[kappa,b]", deg, &kappa(alg, &bx).minus(&b(alg, &kx)), n);
    record(&mut out, "[kappa,d]", deg, &kappa(alg, &dx).minus(&d(&kx)), n);
    let b_bb = connes_b(alg, &bbx);
    record(&mut out, "B^2", deg, &b_bb, n);
    let anti = b(alg, &bbx).plus(&connes_b(alg, &bx));
    record(&mut out, "bB+Bb", deg, &anti, n);
    let bb_total = pow(|v| b(alg, v), x, 2).plus(&anti).plus(&b_bb);
    record(&mut out, "(b+B)^2", deg, &bb_total, n);
    record(&mut out, "1 - kappa - (db + bd)", deg, &x.minus(&kx).minus(&d(&bx)).minus(&b(alg, &dx)), n);
    record(&mut out, "kappa shuffle", deg, &kx.minus(&kappa_by_shuffle(alg, x)), n);
    record(&mut out, "kappa B - B", deg, &kappa(alg, &bbx).minus(&bbx), n);
    record(&mut out, "B kappa - B", deg, &connes_b(alg, &kx).minus(&bbx), n);
    // (kappa^n - 1)(kappa^{n+1} - 1) = 0 on degree n.
    let k1 = pow(|v| kappa(alg, v), x, deg + 1).minus(x);
    let poly = pow(|v| kappa(alg, v), &k1, deg).minus(&k1);
    record(&mut out, "(kappa^n-1)(kappa^(n+1)-1)", deg, &poly, n);
    out
}

/// κ(ω da) = (-1)^{|ω|} da ω on positive degrees and κ = 1 on degree zero.
pub fn kappa_by_shuffle(alg: &AlgebraSpec<Q>, x: &FormChain<u32, Q>) -> FormChain<u32, Q> {
    let mut r = FormChain::zero(x.max_degree());
    for (w, c) in x.iter() {
        let n = w.tail.len();
        if n == 0 {
            r.add_term(w.clone(), c.clone());
            continue;
        }
        let omega = FormChain::single(x.max_degree(), Word { head: w.head, tail: w.tail[..n - 1].iter().cloned().collect() }, Q::from(1));
        let da = FormChain::single(x.max_degree(), Word::new(None, &[w.tail[n - 1]]), Q::from(1));
        let s = if (n - 1) % 2 == 0 { c.clone() } else { -c.clone() };
        r.add_scaled(&dg_mul(alg, &da, &omega), &s);
    }
    r
}

/// Associativity of the Fedosov product and the tensor correspondence being
/// an inverse pair of algebra isomorphisms on even chains.
pub fn fedosov_identities(alg: &AlgebraSpec<Q>, xs: [&FormChain<u32, Q>; 3], max_degree: usize) -> Vec<IdentityCheck> {
    let mut out = Vec::new();
    let [x, y, z] = xs;
    let size = x.len() + y.len() + z.len();
    let lhs = fedosov(alg, &fedosov(alg, x, y), z);
    let rhs = fedosov(alg, x, &fedosov(alg, y, z));
    let deg = max_degree;
    record(&mut out, "fedosov associativity", deg, &lhs.minus(&rhs), size);
    // Tensor correspondence: forms -> tensors -> forms is the identity.
    let tx = forms_to_tensor(alg, x).expect("even chain");
    record(&mut out, "tensor correspondence roundtrip", deg, &tensor_to_forms(alg, &tx, max_degree).minus(x), x.len());
    // Intertwining: the Fedosov product corresponds to concatenation.
    let ty = forms_to_tensor(alg, y).expect("even chain");
    let prod = tensor_to_forms(alg, &tx.concat(&ty), max_degree);
    record(&mut out, "fedosov intertwines concatenation", deg, &prod.minus(&fedosov(alg, x, y)), size);
    out
}

/// The X-complex boundary squares to zero on degrees whose images stay below the truncation.
pub fn xcomplex_identities(alg: &AlgebraSpec<Q>, x_even: &FormChain<u32, Q>, x_odd: &FormChain<u32, Q>, valid_below: usize) -> Vec<IdentityCheck> {
    let mut out = Vec::new();
    let natd = x_natd(alg, x_even).expect("even");
    let r1 = x_bbar(alg, &natd).expect("odd").below(valid_below);
    record(&mut out, "bbar natd", valid_below, &r1, x_even.len());
    let bbar = x_bbar(alg, x_odd).expect("odd");
    let r2 = x_natd(alg, &bbar).expect("even").below(valid_below);
    record(&mut out, "natd bbar", valid_below, &r2, x_odd.len());
    out
}

/// Per-identity tally of a suite run.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct IdentityTally {
    pub name: String,
    pub runs: usize,
    pub failures: usize,
    pub max_degree: usize,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SuiteReport {
    pub seed: u64,
    pub algebras: usize,
    pub tallies: Vec<IdentityTally>,
    pub pass: bool,
}

const FEDOSOV_DEGREES: [(usize, usize, usize); 6] = [(0, 0, 0), (0, 2, 0), (2, 2, 2), (6, 0, 0), (4, 2, 0), (2, 0, 4)];

/// Runs every identity on `count` random algebras of dimension at most 4, with chain degrees
/// cycling through 0..=6 for the operators and even chains up to degree 6 for the Fedosov product.
pub fn identity_suite(seed: u64, count: usize) -> SuiteReport {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut tallies: std::collections::BTreeMap<String, IdentityTally> = Default::default();
    for i in 0..count {
        let alg = crate::algebra::random_algebra(&mut rng, 4);
        let deg = i % 7;
        let x = random_chain(&mut rng, alg.dim(), deg, 4, deg + 3);
        let mut checks = operator_identities(&alg, &x, deg);
        // The full product of degrees p, q, r reaches p + q + r + 4.
        let (p, q, r) = FEDOSOV_DEGREES[i % FEDOSOV_DEGREES.len()];
        let top = p + q + r + 4;
        // the bare unit has no tensor image
        let mut even = |deg: usize| {
            let c = random_chain(&mut rng, alg.dim(), deg, 3, top);
            FormChain::from_terms(top, c.iter().filter(|(w, _)| !w.is_unit()).map(|(w, s)| (w.clone(), s.clone())))
        };
        let (ex, ey, ez) = (even(p), even(q), even(r));
        checks.extend(fedosov_identities(&alg, [&ex, &ey, &ez], top));
        let xe = random_chain(&mut rng, alg.dim(), 2 * (i % 2), 3, 6);
        let xo = random_chain(&mut rng, alg.dim(), 1 + 2 * (i % 2), 3, 6);
        checks.extend(xcomplex_identities(&alg, &xe, &xo, 5));
        for c in checks {
            let t = tallies.entry(c.name.clone()).or_insert(IdentityTally { name: c.name.clone(), runs: 0, failures: 0, max_degree: 0 });
            t.runs += 1;
            t.failures += (!c.pass) as usize;
            t.max_degree = t.max_degree.max(c.degree);
        }
    }
    let tallies: Vec<IdentityTally> = tallies.into_values().collect();
    let pass = tallies.iter().all(|t| t.failures == 0);
    SuiteReport { seed, algebras: count, tallies, pass }
}

/// Letters used by a chain; handy for reports.
pub fn alphabet<A: Algebra>(x: &FormChain<A::Letter, A::Scalar>) -> usize {
    let mut v: Vec<_> = x.iter().flat_map(|(w, _)| w.head.iter().chain(w.tail.iter()).cloned().collect::<Vec<_>>()).collect();
    v.sort();
    v.dedup();
    v.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::random_algebra;
    use rand::SeedableRng;

    #[test]
    fn identities_on_small_random_algebras() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..4 {
            let a = random_algebra(&mut rng, 3);
            for deg in 0..3 {
                let x = random_chain(&mut rng, a.dim(), deg, 2, deg + 4);
                for c in operator_identities(&a, &x, deg) {
                    assert!(c.pass, "{} failed in degree {}", c.name, deg);
                }
            }
        }
    }
}
