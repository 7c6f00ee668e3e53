//! Base spaces for crossed products: finite G-sets (forms in degree 0 only)
//! and flat tori with trigonometric-polynomial forms over Gaussian rationals,
//! acted on by affine maps x -> A x + pi b.

use std::fmt;
use std::hash::Hash;

use smallvec::SmallVec;

use crate::algebra::{GSetSpec, GroupSpec, Haar};
use crate::error::{Error, Result};
use crate::scalar::{Scalar, Q, QI};

/// A space with a left G-action, a DG algebra of forms spanned by monomials,
/// and pullbacks f^g = f o g.
pub trait ManifoldModel: Sync {
    type Mono: Clone + Eq + Hash + Ord + fmt::Debug + Send + Sync;
    fn group(&self) -> &GroupSpec;
    fn haar(&self) -> Haar;
    fn dimension(&self) -> usize;
    fn degree(&self, m: &Self::Mono) -> usize;
    /// Wedge product of monomials; `None` when it vanishes.
    fn wedge(&self, a: &Self::Mono, b: &Self::Mono) -> Option<(Self::Mono, QI)>;
    fn pullback(&self, g: usize, m: &Self::Mono) -> Result<Vec<(Self::Mono, QI)>>;
    fn delta(&self, m: &Self::Mono) -> Vec<(Self::Mono, QI)>;
    /// The constant function 1.
    fn one(&self) -> Vec<(Self::Mono, QI)>;
    fn describe(&self, m: &Self::Mono) -> String;
}

/// A finite G-set: functions are spanned by point indicators.
#[derive(Clone, Debug)]
pub struct FiniteModel {
    pub group: GroupSpec,
    pub gset: GSetSpec,
    pub haar: Haar,
}

impl ManifoldModel for FiniteModel {
    type Mono = u32;
    fn group(&self) -> &GroupSpec {
        &self.group
    }
    fn haar(&self) -> Haar {
        self.haar
    }
    fn dimension(&self) -> usize {
        0
    }
    fn degree(&self, _: &u32) -> usize {
        0
    }
    fn wedge(&self, a: &u32, b: &u32) -> Option<(u32, QI)> {
        (a == b).then(|| (*a, QI::one()))
    }
    fn pullback(&self, g: usize, m: &u32) -> Result<Vec<(u32, QI)>> {
        // delta_y(g x) = delta_{g^-1 y}(x)
        Ok(vec![(self.gset.act(self.group.inv(g), *m as usize) as u32, QI::one())])
    }
    fn delta(&self, _: &u32) -> Vec<(u32, QI)> {
        Vec::new()
    }
    fn one(&self) -> Vec<(u32, QI)> {
        (0..self.gset.points() as u32).map(|x| (x, QI::one())).collect()
    }
    fn describe(&self, m: &u32) -> String {
        format!("pt{m}")
    }
}

/// exp(i k.x) dx^I with I encoded as a bit mask.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TorusMono {
    pub k: SmallVec<[i32; 4]>,
    pub mask: u8,
}

/// Affine isometry x -> A x + pi b of the torus R^d / 2 pi Z^d.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineMap {
    pub a: Vec<Vec<i64>>,
    pub b: Vec<i64>,
}

impl AffineMap {
    pub fn identity(d: usize) -> Self {
        AffineMap { a: (0..d).map(|i| (0..d).map(|j| (i == j) as i64).collect()).collect(), b: vec![0; d] }
    }
    pub fn negation(d: usize) -> Self {
        AffineMap { a: (0..d).map(|i| (0..d).map(|j| -((i == j) as i64)).collect()).collect(), b: vec![0; d] }
    }
    /// self o other
    pub fn compose(&self, o: &AffineMap) -> AffineMap {
        let d = self.b.len();
        let a = (0..d).map(|i| (0..d).map(|j| (0..d).map(|k| self.a[i][k] * o.a[k][j]).sum()).collect()).collect();
        let b = (0..d).map(|i| ((0..d).map(|k| self.a[i][k] * o.b[k]).sum::<i64>() + self.b[i]).rem_euclid(2)).collect();
        AffineMap { a, b }
    }
    fn normalized(&self) -> AffineMap {
        AffineMap { a: self.a.clone(), b: self.b.iter().map(|x| x.rem_euclid(2)).collect() }
    }
}

#[derive(Clone, Debug)]
pub struct TorusModel {
    pub d: usize,
    pub group: GroupSpec,
    pub maps: Vec<AffineMap>,
    pub haar: Haar,
    pub frequency_cap: i32,
}

impl TorusModel {
    /// Checks that g -> maps[g] is a left action: maps[g h] = maps[g] o maps[h] modulo 2 pi.
    pub fn new(d: usize, group: GroupSpec, maps: Vec<AffineMap>, haar: Haar) -> Result<Self> {
        if d == 0 || d > 6 {
            return Err(Error::InvalidAction("torus dimension must lie in 1..=6".into()));
        }
        if maps.len() != group.order() {
            return Err(Error::DimensionMismatch { expected: group.order(), got: maps.len() });
        }
        for m in &maps {
            if m.a.len() != d || m.a.iter().any(|r| r.len() != d) || m.b.len() != d {
                return Err(Error::InvalidAction("affine map has wrong shape".into()));
            }
        }
        for g in 0..group.order() {
            for h in 0..group.order() {
                if maps[group.mul(g, h)].normalized() != maps[g].compose(&maps[h]) {
                    return Err(Error::InvalidAction(format!("affine maps fail the action law at ({g},{h})")));
                }
            }
        }
        Ok(TorusModel { d, group, maps, haar, frequency_cap: 64 })
    }

    /// Z/4 acting on T^d through x -> -x (the generator's square acts trivially).
    pub fn negation_z4(d: usize) -> Self {
        let maps = (0..4).map(|k| if k % 2 == 0 { AffineMap::identity(d) } else { AffineMap::negation(d) }).collect();
        TorusModel::new(d, GroupSpec::cyclic(4), maps, Haar::Normalized).expect("valid action")
    }

    pub fn mono(&self, k: &[i32], mask: u8) -> TorusMono {
        TorusMono { k: k.iter().cloned().collect(), mask }
    }

    /// Integral over T^d of the top-degree part divided by (2 pi)^d: the constant coefficient.
    pub fn integrate(&self, form: &[(TorusMono, QI)]) -> QI {
        let top = ((1u16 << self.d) - 1) as u8;
        let mut s = QI::zero();
        for (m, c) in form {
            if m.mask == top && m.k.iter().all(|&x| x == 0) {
                s += c.clone();
            }
        }
        s
    }

    /// Points fixed by g when A = -1 (isolated) or the whole torus when the map is trivial.
    pub fn fixed_set(&self, g: usize) -> Result<FixedSet> {
        let m = &self.maps[g];
        let id = AffineMap::identity(self.d);
        if m.normalized() == id {
            return Ok(FixedSet::Whole);
        }
        if m.a == AffineMap::negation(self.d).a {
            // 2x = pi b mod 2 pi: x = (pi/2) b + pi s with s in {0,1}^d; stored in units of pi/2.
            let mut pts = Vec::new();
            for s in 0..(1u32 << self.d) {
                let pt: Vec<i64> = (0..self.d).map(|i| m.b[i] + 2 * ((s >> i) & 1) as i64).collect();
                pts.push(pt);
            }
            return Ok(FixedSet::Points(pts));
        }
        if (0..self.d).all(|i| m.a[i][i] == 1) && m.b.iter().any(|&x| x != 0) && m.a == id.a {
            return Ok(FixedSet::Points(Vec::new()));
        }
        Err(Error::Unrepresentable(format!("fixed set of element {g} is not supported")))
    }

    /// Value of a degree-0 form at a point given in units of pi/2. Only points with
    /// integer coordinates in units of pi keep the value Gaussian rational.
    pub fn evaluate_at(&self, form: &[(TorusMono, QI)], pt_half_pi: &[i64]) -> Result<QI> {
        let mut s = QI::zero();
        for (m, c) in form {
            if m.mask != 0 {
                continue;
            }
            let phase: i64 = m.k.iter().zip(pt_half_pi).map(|(&k, &p)| k as i64 * p).sum::<i64>().rem_euclid(4);
            // exp(i pi/2 * phase)
            let z = match phase {
                0 => QI::one(),
                1 => QI::i(),
                2 => -QI::one(),
                _ => -QI::i(),
            };
            s += c.clone() * z;
        }
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FixedSet {
    Whole,
    /// Points in units of pi/2.
    Points(Vec<Vec<i64>>),
}

fn wedge_masks(a: u8, b: u8) -> Option<i32> {
    if a & b != 0 {
        return None;
    }
    // sign of moving each bit of b past the higher bits of a
    let mut swaps = 0;
    for j in 0..8 {
        if b & (1 << j) != 0 {
            swaps += (a >> (j + 1)).count_ones();
        }
    }
    Some(if swaps % 2 == 0 { 1 } else { -1 })
}

impl ManifoldModel for TorusModel {
    type Mono = TorusMono;
    fn group(&self) -> &GroupSpec {
        &self.group
    }
    fn haar(&self) -> Haar {
        self.haar
    }
    fn dimension(&self) -> usize {
        self.d
    }
    fn degree(&self, m: &TorusMono) -> usize {
        m.mask.count_ones() as usize
    }
    fn wedge(&self, a: &TorusMono, b: &TorusMono) -> Option<(TorusMono, QI)> {
        let s = wedge_masks(a.mask, b.mask)?;
        let k = a.k.iter().zip(&b.k).map(|(x, y)| x + y).collect();
        Some((TorusMono { k, mask: a.mask | b.mask }, QI::from_i64(s as i64)))
    }
    fn pullback(&self, g: usize, m: &TorusMono) -> Result<Vec<(TorusMono, QI)>> {
        let map = &self.maps[g];
        let d = self.d;
        // exp(i k.(A x + pi b)) = (-1)^{k.b} exp(i (A^T k).x)
        let k: SmallVec<[i32; 4]> = (0..d).map(|j| (0..d).map(|i| m.k[i] as i64 * map.a[i][j]).sum::<i64>() as i32).collect();
        if k.iter().any(|x| x.abs() > self.frequency_cap) {
            return Err(Error::Truncation(format!("pullback leaves the frequency cap {}", self.frequency_cap)));
        }
        let kb: i64 = (0..d).map(|i| m.k[i] as i64 * map.b[i]).sum();
        let phase = if kb.rem_euclid(2) == 0 { 1 } else { -1 };
        // dx_i -> sum_j A_ij dx_j, wedge in increasing i.
        let mut acc: Vec<(u8, i64)> = vec![(0, phase)];
        for i in 0..d {
            if m.mask & (1 << i) == 0 {
                continue;
            }
            let mut next = Vec::new();
            for (mask, c) in &acc {
                for j in 0..d {
                    let a = map.a[i][j];
                    if a == 0 {
                        continue;
                    }
                    if let Some(s) = wedge_masks(*mask, 1 << j) {
                        next.push((mask | (1 << j), c * a * s as i64));
                    }
                }
            }
            acc = next;
        }
        let mut out: Vec<(TorusMono, QI)> = Vec::new();
        for (mask, c) in acc {
            if c == 0 {
                continue;
            }
            match out.iter_mut().find(|(mm, _)| mm.mask == mask) {
                Some((_, v)) => *v += QI::from_i64(c),
                None => out.push((TorusMono { k: k.clone(), mask }, QI::from_i64(c))),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        Ok(out)
    }
    fn delta(&self, m: &TorusMono) -> Vec<(TorusMono, QI)> {
        // delta(exp(i k.x) dx^I) = sum_j i k_j dx_j ^ exp(i k.x) dx^I
        let mut out = Vec::new();
        for j in 0..self.d {
            if m.k[j] == 0 {
                continue;
            }
            if let Some(s) = wedge_masks(1 << j, m.mask) {
                out.push((
                    TorusMono { k: m.k.clone(), mask: m.mask | (1 << j) },
                    QI::new(Q::from(0), Q::from(m.k[j] as i64 * s as i64)),
                ));
            }
        }
        out
    }
    fn one(&self) -> Vec<(TorusMono, QI)> {
        vec![(TorusMono { k: SmallVec::from_elem(0, self.d), mask: 0 }, QI::one())]
    }
    fn describe(&self, m: &TorusMono) -> String {
        let ks: Vec<String> = m.k.iter().map(|x| x.to_string()).collect();
        let dx: Vec<String> = (0..self.d).filter(|i| m.mask & (1 << i) != 0).map(|i| format!("dx{}", i + 1)).collect();
        let mut s = format!("e^(i[{}].x)", ks.join(","));
        if !dx.is_empty() {
            s.push(' ');
            s.push_str(&dx.join("^"));
        }
        s
    }
}

/// A linear combination of monomials.
pub type Coefficient<M> = Vec<(<M as ManifoldModel>::Mono, QI)>;

/// Product of two coefficient forms, merged and sorted.
pub fn wedge_coeffs<M: ManifoldModel>(model: &M, a: &[(M::Mono, QI)], b: &[(M::Mono, QI)]) -> Vec<(M::Mono, QI)> {
    let mut out: std::collections::BTreeMap<M::Mono, QI> = Default::default();
    for (ma, ca) in a {
        for (mb, cb) in b {
            if let Some((m, s)) = model.wedge(ma, mb) {
                let v = ca.clone() * cb.clone() * s;
                let e = out.entry(m).or_insert_with(QI::zero);
                *e += v;
            }
        }
    }
    out.into_iter().filter(|(_, c)| !c.is_zero()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_pullback_and_delta_commute() {
        let t = TorusModel::negation_z4(2);
        let m = t.mono(&[2, -1], 0b01);
        for g in 0..4 {
            let lhs: Vec<_> = t.pullback(g, &m).unwrap().iter().flat_map(|(x, c)| t.delta(x).into_iter().map(move |(y, e)| (y, e * c.clone()))).collect();
            let mut rhs: Vec<(TorusMono, QI)> = Vec::new();
            for (x, c) in t.delta(&m) {
                for (y, e) in t.pullback(g, &x).unwrap() {
                    rhs.push((y, e * c.clone()));
                }
            }
            let norm = |v: Vec<(TorusMono, QI)>| wedge_coeffs(&t, &v, &t.one());
            assert_eq!(norm(lhs), norm(rhs));
        }
    }

    #[test]
    fn negation_fixes_four_points() {
        let t = TorusModel::negation_z4(2);
        assert_eq!(t.fixed_set(0).unwrap(), FixedSet::Whole);
        assert_eq!(t.fixed_set(2).unwrap(), FixedSet::Whole);
        match t.fixed_set(1).unwrap() {
            FixedSet::Points(p) => assert_eq!(p.len(), 4),
            _ => panic!(),
        }
    }

    #[test]
    fn bad_action_is_rejected() {
        let maps = vec![AffineMap::identity(1), AffineMap::negation(1), AffineMap::identity(1)];
        assert!(TorusModel::new(1, GroupSpec::cyclic(3), maps, Haar::Counting).is_err());
    }
}
