//! Group cocycles and the cyclic cocycles φ_v they induce on a group ring, with exact
//! rational arithmetic. Discrete groups are either finite multiplication tables or the
//! lattice Z^d, whose group ring elements are finitely supported.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::sync::Arc;

use smallvec::SmallVec;

use crate::algebra::GroupSpec;
use crate::error::{Error, Result};
use crate::scalar::Q;

pub trait DiscreteGroup {
    type Elem: Clone + Ord + Debug;
    fn identity(&self) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Self::Elem;
}

impl DiscreteGroup for GroupSpec {
    type Elem = usize;
    fn identity(&self) -> usize {
        0
    }
    fn mul(&self, a: &usize, b: &usize) -> usize {
        GroupSpec::mul(self, *a, *b)
    }
    fn inv(&self, a: &usize) -> usize {
        GroupSpec::inv(self, *a)
    }
}

/// Z^d written additively.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    pub d: usize,
}

pub type LatticePoint = SmallVec<[i64; 2]>;

impl DiscreteGroup for Lattice {
    type Elem = LatticePoint;
    fn identity(&self) -> LatticePoint {
        SmallVec::from_elem(0, self.d)
    }
    fn mul(&self, a: &LatticePoint, b: &LatticePoint) -> LatticePoint {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }
    fn inv(&self, a: &LatticePoint) -> LatticePoint {
        a.iter().map(|x| -x).collect()
    }
}

/// Finitely supported function on G.
pub type GroupRingElement<E> = BTreeMap<E, Q>;

pub fn delta<E: Ord>(g: E) -> GroupRingElement<E> {
    let mut b = BTreeMap::new();
    b.insert(g, Q::from(1));
    b
}

/// Convolution (b₁ b₂)(g) = Σ_h b₁(h) b₂(g h⁻¹), so δ_h δ_k = δ_{kh}.
pub fn group_ring_mul<G: DiscreteGroup>(group: &G, b1: &GroupRingElement<G::Elem>, b2: &GroupRingElement<G::Elem>) -> GroupRingElement<G::Elem> {
    let mut out = BTreeMap::new();
    for (h, x) in b1 {
        for (k, y) in b2 {
            let g = group.mul(k, h);
            *out.entry(g).or_insert_with(|| Q::from(0)) += x * y;
        }
    }
    out.retain(|_, v| *v != Q::from(0));
    out
}

type CocycleFn<E> = Arc<dyn Fn(&[E]) -> Q + Send + Sync>;

/// Scalar function v(g_1, ..., g_n) on G^n.
#[derive(Clone)]
pub struct GroupCocycle<E> {
    pub arity: usize,
    pub normalized: bool,
    pub label: String,
    f: CocycleFn<E>,
}

impl<E> Debug for GroupCocycle<E> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GroupCocycle({}, arity {})", self.label, self.arity)
    }
}

impl<E: Clone + Ord + Debug> GroupCocycle<E> {
    pub fn new(label: &str, arity: usize, normalized: bool, f: impl Fn(&[E]) -> Q + Send + Sync + 'static) -> Self {
        GroupCocycle { arity, normalized, label: label.to_string(), f: Arc::new(f) }
    }
    pub fn eval(&self, gs: &[E]) -> Q {
        (self.f)(gs)
    }

    /// Max |δv| over the given (n+1)-tuples, with
    /// δv(g_1..g_{n+1}) = v(g_2..) + Σ_i (-1)^i v(.., g_i g_{i+1}, ..) + (-1)^{n+1} v(g_1..g_n).
    pub fn cocycle_defect<G: DiscreteGroup<Elem = E>>(&self, group: &G, tuples: &[Vec<E>]) -> Result<Q> {
        let n = self.arity;
        let mut worst = Q::from(0);
        for t in tuples {
            if t.len() != n + 1 {
                return Err(Error::DimensionMismatch { expected: n + 1, got: t.len() });
            }
            let mut s = self.eval(&t[1..]);
            for i in 0..n {
                let mut u: Vec<E> = t[..i].to_vec();
                u.push(group.mul(&t[i], &t[i + 1]));
                u.extend_from_slice(&t[i + 2..]);
                let v = self.eval(&u);
                if i % 2 == 0 {
                    s -= v;
                } else {
                    s += v;
                }
            }
            let last = self.eval(&t[..n]);
            if n.is_multiple_of(2) {
                s -= last;
            } else {
                s += last;
            }
            let a = if s < 0 { -s } else { s };
            if a > worst {
                worst = a;
            }
        }
        Ok(worst)
    }

    /// Checks v = 0 whenever some g_i = 1 or g_1 ... g_n = 1 on the given tuples.
    pub fn check_normalized<G: DiscreteGroup<Elem = E>>(&self, group: &G, tuples: &[Vec<E>]) -> Result<()> {
        let id = group.identity();
        for t in tuples {
            let prod = t.iter().skip(1).fold(t[0].clone(), |acc, g| group.mul(&acc, g));
            if (t.contains(&id) || prod == id) && self.eval(t) != 0 {
                return Err(Error::Precondition(format!("{} is not normalized at {t:?}", self.label)));
            }
        }
        Ok(())
    }
}

/// v(g) = g on Z.
pub fn lattice_coordinate(k: usize) -> GroupCocycle<LatticePoint> {
    GroupCocycle::new(&format!("x{k}"), 1, true, move |g: &[LatticePoint]| Q::from(g[0][k]))
}

/// v(g, h) = det(g, h) on Z².
pub fn lattice_determinant() -> GroupCocycle<LatticePoint> {
    GroupCocycle::new("det", 2, true, |g: &[LatticePoint]| Q::from(g[0][0] * g[1][1] - g[0][1] * g[1][0]))
}

/// Coboundary v(g, h) = u(h) - u(gh) + u(g) on a finite group; normalized when u(1) = 0 and
/// u(g⁻¹) = -u(g).
pub fn finite_coboundary(group: &GroupSpec, u: Vec<Q>) -> Result<GroupCocycle<usize>> {
    if u.len() != group.order() {
        return Err(Error::DimensionMismatch { expected: group.order(), got: u.len() });
    }
    let normalized = u[0] == 0 && (0..group.order()).all(|g| u[group.inv(g)] == -u[g].clone());
    let g2 = group.clone();
    Ok(GroupCocycle::new("coboundary", 2, normalized, move |gs| {
        &u[gs[1]] - &u[g2.mul(gs[0], gs[1])] + &u[gs[0]]
    }))
}

/// φ_v(b₀ db₁ ... dbₙ) = Σ v(gₙ, ..., g₁) b₀((gₙ ... g₁)⁻¹) b₁(g₁) ... bₙ(gₙ); b₀ = None is the
/// form db₁ ... dbₙ, on which φ_v vanishes.
pub fn group_cocycle_pairing<G: DiscreteGroup>(
    group: &G,
    v: &GroupCocycle<G::Elem>,
    b0: Option<&GroupRingElement<G::Elem>>,
    bs: &[GroupRingElement<G::Elem>],
) -> Result<Q> {
    if bs.len() != v.arity {
        return Err(Error::DimensionMismatch { expected: v.arity, got: bs.len() });
    }
    let Some(b0) = b0 else { return Ok(Q::from(0)) };
    let mut total = Q::from(0);
    let mut gs: Vec<G::Elem> = Vec::with_capacity(bs.len());
    walk(group, v, b0, bs, &mut gs, Q::from(1), group.identity(), &mut total);
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn walk<G: DiscreteGroup>(
    group: &G,
    v: &GroupCocycle<G::Elem>,
    b0: &GroupRingElement<G::Elem>,
    bs: &[GroupRingElement<G::Elem>],
    gs: &mut Vec<G::Elem>,
    weight: Q,
    prod: G::Elem,
    total: &mut Q,
) {
    let i = gs.len();
    if i == bs.len() {
        if let Some(x) = b0.get(&group.inv(&prod)) {
            let rev: Vec<G::Elem> = gs.iter().rev().cloned().collect();
            *total += weight * x * v.eval(&rev);
        }
        return;
    }
    for (g, y) in &bs[i] {
        // gₙ ... g₁: each new element multiplies on the left
        let p = group.mul(g, &prod);
        gs.push(g.clone());
        walk(group, v, b0, bs, gs, &weight * y, p, total);
        gs.pop();
    }
}

/// φ_v as an (n+1)-linear functional on group ring elements.
pub fn phi<G: DiscreteGroup>(group: &G, v: &GroupCocycle<G::Elem>, args: &[GroupRingElement<G::Elem>]) -> Result<Q> {
    if args.is_empty() {
        return Err(Error::DimensionMismatch { expected: v.arity + 1, got: 0 });
    }
    group_cocycle_pairing(group, v, Some(&args[0]), &args[1..])
}

/// φ(bₙ, b₀, ..., bₙ₋₁) - (-1)ⁿ φ(b₀, ..., bₙ).
pub fn cyclicity_defect<G: DiscreteGroup>(group: &G, v: &GroupCocycle<G::Elem>, args: &[GroupRingElement<G::Elem>]) -> Result<Q> {
    let n = v.arity;
    let mut rot = vec![args[n].clone()];
    rot.extend_from_slice(&args[..n]);
    let a = phi(group, v, &rot)?;
    let b = phi(group, v, args)?;
    Ok(if n % 2 == 0 { a - b } else { a + b })
}

/// (bφ)(b₀, ..., bₙ₊₁) = Σ_i (-1)^i φ(.., b_i b_{i+1}, ..) + (-1)^{n+1} φ(bₙ₊₁ b₀, b₁, ..., bₙ).
pub fn hochschild_defect<G: DiscreteGroup>(group: &G, v: &GroupCocycle<G::Elem>, args: &[GroupRingElement<G::Elem>]) -> Result<Q> {
    let n = v.arity;
    if args.len() != n + 2 {
        return Err(Error::DimensionMismatch { expected: n + 2, got: args.len() });
    }
    let mut s = Q::from(0);
    for i in 0..=n {
        let mut u: Vec<_> = args[..i].to_vec();
        u.push(group_ring_mul(group, &args[i], &args[i + 1]));
        u.extend_from_slice(&args[i + 2..]);
        let x = phi(group, v, &u)?;
        if i % 2 == 0 {
            s += x;
        } else {
            s -= x;
        }
    }
    let mut u = vec![group_ring_mul(group, &args[n + 1], &args[0])];
    u.extend_from_slice(&args[1..=n]);
    let x = phi(group, v, &u)?;
    if (n + 1) % 2 == 0 {
        s += x;
    } else {
        s -= x;
    }
    Ok(s)
}
