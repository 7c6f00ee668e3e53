//! Finite groups, finite G-sets, and finite-dimensional algebras given by
//! structure constants: weighted group algebras, crossed products,
//! unitalizations and small random catalogues.

use std::fmt::Debug;
use std::hash::Hash;
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{Scalar, Q};

/// Anything whose basis letters can be multiplied.
pub trait Algebra: Sync {
    type Letter: Clone + Eq + Hash + Ord + Debug + Send + Sync;
    type Scalar: Scalar;
    fn multiply(
        &self,
        a: &Self::Letter,
        b: &Self::Letter,
        out: &mut dyn FnMut(Self::Letter, Self::Scalar),
    );
}

/// Finite group given by its multiplication table; element 0 is the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupSpec {
    order: usize,
    table: Vec<u32>,
    inverse: Vec<u32>,
    pub label: String,
}

impl GroupSpec {
    pub fn from_table(rows: Vec<Vec<usize>>, label: &str) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidGroup("empty table".into()));
        }
        let mut table = Vec::with_capacity(n * n);
        for (g, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidGroup(format!("row {g} has length {}", row.len())));
            }
            for &h in row {
                if h >= n {
                    return Err(Error::InvalidGroup(format!("entry {h} out of range")));
                }
                table.push(h as u32);
            }
        }
        for g in 0..n {
            if table[g] as usize != g || table[g * n] as usize != g {
                return Err(Error::InvalidGroup("element 0 is not the identity".into()));
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let ab = table[a * n + b] as usize;
                    let bc = table[b * n + c] as usize;
                    if table[ab * n + c] != table[a * n + bc] {
                        return Err(Error::InvalidGroup(format!("not associative at ({a},{b},{c})")));
                    }
                }
            }
        }
        let mut inverse = vec![u32::MAX; n];
        for g in 0..n {
            for h in 0..n {
                if table[g * n + h] == 0 {
                    inverse[g] = h as u32;
                }
            }
            if inverse[g] == u32::MAX {
                return Err(Error::InvalidGroup(format!("element {g} has no inverse")));
            }
        }
        Ok(GroupSpec { order: n, table, inverse, label: label.to_string() })
    }

    pub fn trivial() -> Self {
        Self::cyclic(1)
    }

    pub fn cyclic(n: usize) -> Self {
        let rows = (0..n).map(|g| (0..n).map(|h| (g + h) % n).collect()).collect();
        Self::from_table(rows, &format!("cyclic:{n}")).expect("cyclic table is a group")
    }

    /// Direct product; element (g, h) has index g * |H| + h.
    pub fn product(a: &GroupSpec, b: &GroupSpec) -> Self {
        let (n, m) = (a.order, b.order);
        let rows = (0..n * m)
            .map(|x| {
                (0..n * m)
                    .map(|y| a.mul(x / m, y / m) * m + b.mul(x % m, y % m))
                    .collect()
            })
            .collect();
        Self::from_table(rows, &format!("product:{},{}", a.label, b.label))
            .expect("product of groups is a group")
    }

    pub fn order(&self) -> usize {
        self.order
    }
    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.table[g * self.order + h] as usize
    }
    pub fn inv(&self, g: usize) -> usize {
        self.inverse[g] as usize
    }
    /// Concatenation product g_n ... g_1 of a tuple (g_1, ..., g_n).
    pub fn concat(&self, tuple: &[usize]) -> usize {
        tuple.iter().fold(0, |acc, &g| self.mul(g, acc))
    }
    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|g| (0..self.order).all(|h| self.mul(g, h) == self.mul(h, g)))
    }
    pub fn element_order(&self, g: usize) -> usize {
        let mut k = 1;
        let mut x = g;
        while x != 0 {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }
}

/// Left action of a finite group on a finite set of points.
#[derive(Clone, Debug, PartialEq)]
pub struct GSetSpec {
    points: usize,
    order: usize,
    act: Vec<u32>,
    pub label: String,
}

impl GSetSpec {
    pub fn from_table(group: &GroupSpec, rows: Vec<Vec<usize>>, label: &str) -> Result<Self> {
        let n = group.order();
        if rows.len() != n {
            return Err(Error::InvalidAction(format!("expected {n} rows, got {}", rows.len())));
        }
        let points = rows[0].len();
        let mut act = Vec::with_capacity(n * points);
        for row in &rows {
            if row.len() != points || row.iter().any(|&x| x >= points) {
                return Err(Error::InvalidAction("row shape or entry out of range".into()));
            }
            act.extend(row.iter().map(|&x| x as u32));
        }
        let s = GSetSpec { points, order: n, act, label: label.to_string() };
        for x in 0..points {
            if s.act(0, x) != x {
                return Err(Error::InvalidAction(format!("identity moves point {x}")));
            }
        }
        for g in 0..n {
            for h in 0..n {
                for x in 0..points {
                    if s.act(group.mul(g, h), x) != s.act(g, s.act(h, x)) {
                        return Err(Error::InvalidAction(format!("(gh)x != g(hx) at ({g},{h},{x})")));
                    }
                }
            }
        }
        Ok(s)
    }

    /// G acting on itself by left translation.
    pub fn regular(group: &GroupSpec) -> Self {
        let rows = (0..group.order()).map(|g| (0..group.order()).map(|x| group.mul(g, x)).collect()).collect();
        Self::from_table(group, rows, "regular").expect("left translation is an action")
    }

    pub fn trivial(group: &GroupSpec, points: usize) -> Self {
        let rows = (0..group.order()).map(|_| (0..points).collect()).collect();
        Self::from_table(group, rows, "trivial").expect("trivial action")
    }

    pub fn points(&self) -> usize {
        self.points
    }
    pub fn group_order(&self) -> usize {
        self.order
    }
    pub fn act(&self, g: usize, x: usize) -> usize {
        self.act[g * self.points + x] as usize
    }
    pub fn orbit(&self, x: usize) -> Vec<usize> {
        let mut o: Vec<usize> = (0..self.order).map(|g| self.act(g, x)).collect();
        o.sort_unstable();
        o.dedup();
        o
    }
    pub fn fixed_points(&self, g: usize) -> Vec<usize> {
        (0..self.points).filter(|&x| self.act(g, x) == x).collect()
    }
}

fn read_table(path: &Path) -> Result<Vec<Vec<usize>>> {
    let text = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| Error::Parse { line: n + 1, msg: format!("bad table entry {t:?}") }))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// `cyclic:<n> | product:<spec>,<spec> | table:<file>`; table paths are relative to `dir`.
pub fn parse_group_spec(s: &str, dir: &Path) -> Result<GroupSpec> {
    let s = s.trim();
    if s == "trivial" {
        return Ok(GroupSpec::trivial());
    }
    let (kind, rest) = s.split_once(':').ok_or_else(|| Error::InvalidGroup(format!("unknown group spec {s:?}")))?;
    match kind {
        "cyclic" => {
            let n: usize = rest.trim().parse().map_err(|_| Error::InvalidGroup(format!("bad order in {s:?}")))?;
            if n == 0 {
                return Err(Error::InvalidGroup("cyclic:0".into()));
            }
            Ok(GroupSpec::cyclic(n))
        }
        "product" => {
            let (a, b) = rest.split_once(',').ok_or_else(|| Error::InvalidGroup(format!("product needs two factors: {s:?}")))?;
            Ok(GroupSpec::product(&parse_group_spec(a, dir)?, &parse_group_spec(b, dir)?))
        }
        "table" => GroupSpec::from_table(read_table(&dir.join(rest.trim()))?, s),
        _ => Err(Error::InvalidGroup(format!("unknown group spec {s:?}"))),
    }
}

/// `regular | trivial:<points> | table:<file>`, the table listing g x row by row.
pub fn parse_gset_spec(s: &str, group: &GroupSpec, dir: &Path) -> Result<GSetSpec> {
    let s = s.trim();
    if s == "regular" {
        return Ok(GSetSpec::regular(group));
    }
    match s.split_once(':') {
        Some(("trivial", n)) => {
            let n: usize = n.trim().parse().map_err(|_| Error::InvalidAction(format!("bad point count in {s:?}")))?;
            Ok(GSetSpec::trivial(group, n))
        }
        Some(("table", f)) => GSetSpec::from_table(group, read_table(&dir.join(f.trim()))?, s),
        _ => Err(Error::InvalidAction(format!("unknown gset spec {s:?}"))),
    }
}

/// Left Haar measure of a finite group: counting, or normalized to total mass one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Haar {
    Counting,
    Normalized,
}

impl Haar {
    pub fn weight(&self, order: usize) -> Q {
        match self {
            Haar::Counting => Q::from(1),
            Haar::Normalized => Q::from_signeds(1i64, order as i64),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    Generic(String),
    GroupAlgebra { group: GroupSpec, haar: Haar },
    CrossedProduct { group: GroupSpec, gset: GSetSpec, haar: Haar },
    Unitalization(Box<Provenance>),
}

/// Element of a finite-dimensional algebra in basis coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Element<S> {
    pub coeffs: Vec<S>,
}

impl<S: Scalar> Element<S> {
    pub fn zero(dim: usize) -> Self {
        Element { coeffs: vec![S::zero(); dim] }
    }
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut e = Self::zero(dim);
        e.coeffs[i] = S::one();
        e
    }
    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }
    pub fn add(&self, o: &Self) -> Self {
        Element { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.clone() + b.clone()).collect() }
    }
    pub fn sub(&self, o: &Self) -> Self {
        Element { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.clone() - b.clone()).collect() }
    }
    pub fn scale(&self, s: &S) -> Self {
        Element { coeffs: self.coeffs.iter().map(|a| a.clone() * s.clone()).collect() }
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }
    pub fn support(&self) -> impl Iterator<Item = (usize, &S)> {
        self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero())
    }
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.magnitude()).fold(0.0, f64::max)
    }
}

/// Finite-dimensional associative algebra given by sparse structure constants.
#[derive(Clone, Debug)]
pub struct AlgebraSpec<S> {
    dim: usize,
    products: Vec<Vec<(u32, S)>>,
    unit: Option<Element<S>>,
    pub provenance: Provenance,
}

impl<S: Scalar> AlgebraSpec<S> {
    /// `products[i * dim + j]` lists the expansion of e_i e_j. Associativity is checked.
    pub fn new(dim: usize, products: Vec<Vec<(u32, S)>>, provenance: Provenance) -> Result<Self> {
        if products.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: products.len() });
        }
        let mut alg = AlgebraSpec { dim, products, unit: None, provenance };
        for p in alg.products.iter_mut() {
            p.retain(|(_, c)| !c.is_zero());
            p.sort_by_key(|(k, _)| *k);
        }
        alg.check_associative()?;
        alg.unit = alg.find_unit();
        Ok(alg)
    }

    fn check_associative(&self) -> Result<()> {
        let tol = 1e-10;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let ij = Element { coeffs: self.dense(i, j) };
                for k in 0..self.dim {
                    let left = self.mul(&ij, &Element::basis(self.dim, k));
                    let jk = Element { coeffs: self.dense(j, k) };
                    let right = self.mul(&Element::basis(self.dim, i), &jk);
                    let diff = left.sub(&right);
                    let bad = if S::EXACT { !diff.is_zero() } else { diff.max_abs() > tol };
                    if bad {
                        return Err(Error::NotAssociative(i, j, k));
                    }
                }
            }
        }
        Ok(())
    }

    fn dense(&self, i: usize, j: usize) -> Vec<S> {
        let mut v = vec![S::zero(); self.dim];
        for (k, c) in &self.products[i * self.dim + j] {
            v[*k as usize] += c.clone();
        }
        v
    }

    /// Unit if the basis spans a unital algebra, found by solving u e_j = e_j.
    fn find_unit(&self) -> Option<Element<S>> {
        // Left multiplication operator L(u) e_j = sum_i u_i e_i e_j; solve L(u) = id on all j.
        let n = self.dim;
        let rows = n * n;
        let mut m: Vec<Vec<S>> = vec![vec![S::zero(); n + 1]; 2 * rows];
        for j in 0..n {
            for i in 0..n {
                for (k, c) in &self.products[i * n + j] {
                    m[j * n + *k as usize][i] += c.clone();
                }
                for (k, c) in &self.products[j * n + i] {
                    m[rows + j * n + *k as usize][i] += c.clone();
                }
            }
            m[j * n + j][n] = S::one();
            m[rows + j * n + j][n] = S::one();
        }
        let sol = solve_exact(m, n)?;
        let u = Element { coeffs: sol };
        for j in 0..n {
            let ej = Element::basis(n, j);
            let l = self.mul(&u, &ej).sub(&ej);
            let r = self.mul(&ej, &u).sub(&ej);
            if l.max_abs() > 1e-9 || r.max_abs() > 1e-9 {
                return None;
            }
        }
        Some(u)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn unit(&self) -> Option<&Element<S>> {
        self.unit.as_ref()
    }
    pub fn basis_product(&self, i: usize, j: usize) -> &[(u32, S)] {
        &self.products[i * self.dim + j]
    }

    pub fn mul(&self, a: &Element<S>, b: &Element<S>) -> Element<S> {
        let mut out = Element::zero(self.dim);
        for (i, x) in a.support() {
            for (j, y) in b.support() {
                let xy = x.clone() * y.clone();
                for (k, c) in &self.products[i * self.dim + j] {
                    out.coeffs[*k as usize] += xy.clone() * c.clone();
                }
            }
        }
        out
    }

    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T) -> AlgebraSpec<T> {
        AlgebraSpec {
            dim: self.dim,
            products: self
                .products
                .iter()
                .map(|p| p.iter().map(|(k, c)| (*k, f(c))).collect())
                .collect(),
            unit: self.unit.as_ref().map(|u| Element { coeffs: u.coeffs.iter().map(&f).collect() }),
            provenance: self.provenance.clone(),
        }
    }

    /// Adjoin a new unit as the last basis vector.
    pub fn unitalize(&self) -> AlgebraSpec<S> {
        let n = self.dim + 1;
        let u = self.dim as u32;
        let mut products = vec![Vec::new(); n * n];
        for i in 0..self.dim {
            for j in 0..self.dim {
                products[i * n + j] = self.products[i * self.dim + j].clone();
            }
        }
        for i in 0..n {
            products[i * n + u as usize] = vec![(i as u32, S::one())];
            products[u as usize * n + i] = vec![(i as u32, S::one())];
        }
        AlgebraSpec::new(n, products, Provenance::Unitalization(Box::new(self.provenance.clone())))
            .expect("unitalization of an associative algebra is associative")
    }

    /// Re-express in the basis f_i = sum_a p[a][i] e_a; `p_inv` must be the inverse of `p`.
    pub fn change_basis(&self, p: &[Vec<S>], p_inv: &[Vec<S>]) -> Result<AlgebraSpec<S>> {
        let n = self.dim;
        let mut products = vec![Vec::new(); n * n];
        for i in 0..n {
            for j in 0..n {
                let fi = Element { coeffs: (0..n).map(|a| p[a][i].clone()).collect() };
                let fj = Element { coeffs: (0..n).map(|a| p[a][j].clone()).collect() };
                let prod = self.mul(&fi, &fj);
                let mut out = Vec::new();
                for k in 0..n {
                    let mut c = S::zero();
                    for (a, x) in prod.support() {
                        c += p_inv[k][a].clone() * x.clone();
                    }
                    if !c.is_zero() {
                        out.push((k as u32, c));
                    }
                }
                products[i * n + j] = out;
            }
        }
        AlgebraSpec::new(n, products, Provenance::Generic("basis change".into()))
    }
}

impl<A: Algebra> Algebra for &A {
    type Letter = A::Letter;
    type Scalar = A::Scalar;
    fn multiply(&self, a: &A::Letter, b: &A::Letter, out: &mut dyn FnMut(A::Letter, A::Scalar)) {
        (**self).multiply(a, b, out)
    }
}

impl<S: Scalar> Algebra for AlgebraSpec<S> {
    type Letter = u32;
    type Scalar = S;
    fn multiply(&self, a: &u32, b: &u32, out: &mut dyn FnMut(u32, S)) {
        for (k, c) in &self.products[*a as usize * self.dim + *b as usize] {
            out(*k, c.clone());
        }
    }
}

/// Gaussian elimination for an overdetermined consistent system; returns None if inconsistent.
fn solve_exact<S: Scalar>(mut m: Vec<Vec<S>>, n: usize) -> Option<Vec<S>> {
    let tol = if S::EXACT { 0.0 } else { 1e-12 };
    let mut row = 0;
    let mut pivots = Vec::new();
    for col in 0..n {
        let Some(p) = (row..m.len()).max_by(|&a, &b| {
            m[a][col].magnitude().partial_cmp(&m[b][col].magnitude()).unwrap()
        }) else {
            break;
        };
        if m[p][col].magnitude() <= tol {
            continue;
        }
        m.swap(row, p);
        let inv = m[row][col].inv()?;
        for c in 0..=n {
            let v = m[row][c].clone() * inv.clone();
            m[row][c] = v;
        }
        for r in 0..m.len() {
            if r != row && m[r][col].magnitude() > tol {
                let f = m[r][col].clone();
                for c in 0..=n {
                    let v = m[row][c].clone() * f.clone();
                    m[r][c] -= v;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    for r in row..m.len() {
        if m[r][n].magnitude() > if S::EXACT { 0.0 } else { 1e-9 } {
            return None;
        }
    }
    let mut x = vec![S::zero(); n];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = m[r][n].clone();
    }
    Some(x)
}

/// Weighted group algebra: delta_h * delta_k = w * delta_{kh}.
pub fn group_algebra(group: &GroupSpec, haar: Haar) -> AlgebraSpec<Q> {
    let n = group.order();
    let w = haar.weight(n);
    let mut products = vec![Vec::new(); n * n];
    for h in 0..n {
        for k in 0..n {
            products[h * n + k] = vec![(group.mul(k, h) as u32, w.clone())];
        }
    }
    AlgebraSpec::new(n, products, Provenance::GroupAlgebra { group: group.clone(), haar })
        .expect("group algebra is associative")
}

/// Index of the basis function delta_{(g, x)} in the crossed product.
pub fn crossed_index(gset: &GSetSpec, g: usize, x: usize) -> usize {
    g * gset.points() + x
}

/// Crossed product C(M) x G with (a1 a2)(g,x) = sum_h w a1(h,x) a2(g h^-1, h x).
pub fn crossed_product(group: &GroupSpec, gset: &GSetSpec, haar: Haar) -> Result<AlgebraSpec<Q>> {
    if gset.group_order() != group.order() {
        return Err(Error::DimensionMismatch { expected: group.order(), got: gset.group_order() });
    }
    let n = group.order();
    let m = gset.points();
    let dim = n * m;
    let w = haar.weight(n);
    let mut products = vec![Vec::new(); dim * dim];
    for h in 0..n {
        for y in 0..m {
            for k in 0..n {
                let z = gset.act(h, y);
                let i = crossed_index(gset, h, y);
                let j = crossed_index(gset, k, z);
                products[i * dim + j] = vec![(crossed_index(gset, group.mul(k, h), y) as u32, w.clone())];
            }
        }
    }
    AlgebraSpec::new(
        dim,
        products,
        Provenance::CrossedProduct { group: group.clone(), gset: gset.clone(), haar },
    )
}

/// Submultiplicative weight check sigma(gh) <= sigma(g) sigma(h).
pub fn check_submultiplicative(group: &GroupSpec, sigma: &[f64]) -> Result<()> {
    for g in 0..group.order() {
        for h in 0..group.order() {
            if sigma[group.mul(g, h)] > sigma[g] * sigma[h] * (1.0 + 1e-12) {
                return Err(Error::NotSubmultiplicative(g, h));
            }
        }
    }
    Ok(())
}

/// σ(n) = (1 + |n|)^α on Z.
pub fn polynomial_weight(alpha: f64) -> impl Fn(i64) -> f64 {
    move |n| (1.0 + n.unsigned_abs() as f64).powf(alpha)
}

/// σ(m + n) <= σ(m) σ(n) on the window |m|, |n| <= radius, for pairs whose sum stays in the window.
pub fn check_submultiplicative_window(radius: i64, sigma: &dyn Fn(i64) -> f64) -> Result<()> {
    for m in -radius..=radius {
        if sigma(m) <= 0.0 {
            return Err(Error::Precondition(format!("weight at {m} is not positive")));
        }
        for n in -radius..=radius {
            if (m + n).abs() <= radius && sigma(m + n) > sigma(m) * sigma(n) * (1.0 + 1e-12) {
                return Err(Error::Precondition(format!("weight fails submultiplicativity at ({m}, {n})")));
            }
        }
    }
    Ok(())
}

/// Weighted l1 norm sum_g w |b(g)| sigma(g); for crossed products the sup over points is used.
pub fn weighted_norm<S: Scalar>(alg: &AlgebraSpec<S>, a: &Element<S>, sigma: &[f64]) -> Result<f64> {
    match &alg.provenance {
        Provenance::GroupAlgebra { group, haar } => {
            check_submultiplicative(group, sigma)?;
            let w = crate::scalar::q_to_f64(&haar.weight(group.order()));
            Ok((0..group.order()).map(|g| w * a.coeffs[g].magnitude() * sigma[g]).sum())
        }
        Provenance::CrossedProduct { group, gset, haar } => {
            check_submultiplicative(group, sigma)?;
            let w = crate::scalar::q_to_f64(&haar.weight(group.order()));
            Ok((0..group.order())
                .map(|g| {
                    let sup = (0..gset.points())
                        .map(|x| a.coeffs[crossed_index(gset, g, x)].magnitude())
                        .fold(0.0, f64::max);
                    w * sup * sigma[g]
                })
                .sum())
        }
        _ => Err(Error::Precondition("weighted norm needs a group algebra or crossed product".into())),
    }
}

fn matrix_units() -> AlgebraSpec<Q> {
    // E_ab at index 2a + b.
    let mut products = vec![Vec::new(); 16];
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    if b == c {
                        products[(2 * a + b) * 4 + 2 * c + d] = vec![((2 * a + d) as u32, Q::from(1))];
                    }
                }
            }
        }
    }
    AlgebraSpec::new(4, products, Provenance::Generic("M2".into())).unwrap()
}

fn from_monomial_rule(dim: usize, name: &str, rule: impl Fn(usize, usize) -> Option<usize>) -> AlgebraSpec<Q> {
    let mut products = vec![Vec::new(); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            if let Some(k) = rule(i, j) {
                products[i * dim + j] = vec![(k as u32, Q::from(1))];
            }
        }
    }
    AlgebraSpec::new(dim, products, Provenance::Generic(name.into())).unwrap()
}

/// Direct sum of two algebras.
pub fn direct_sum(a: &AlgebraSpec<Q>, b: &AlgebraSpec<Q>) -> AlgebraSpec<Q> {
    let (n, m) = (a.dim(), b.dim());
    let d = n + m;
    let mut products = vec![Vec::new(); d * d];
    for i in 0..n {
        for j in 0..n {
            products[i * d + j] = a.basis_product(i, j).to_vec();
        }
    }
    for i in 0..m {
        for j in 0..m {
            products[(n + i) * d + n + j] =
                b.basis_product(i, j).iter().map(|(k, c)| (k + n as u32, c.clone())).collect();
        }
    }
    AlgebraSpec::new(d, products, Provenance::Generic("direct sum".into())).unwrap()
}

/// Catalogue of small algebras with integer structure constants.
pub fn catalogue_algebra(id: usize) -> AlgebraSpec<Q> {
    match id % 12 {
        0 => from_monomial_rule(1, "Q", |_, _| Some(0)),
        1 => from_monomial_rule(2, "Q^2", |i, j| (i == j).then_some(i)),
        2 => from_monomial_rule(3, "Q[x]/x^3", |i, j| (i + j < 3).then_some(i + j)),
        3 => from_monomial_rule(3, "xQ[x]/x^4", |i, j| (i + j + 2 <= 3).then_some(i + j + 1)),
        4 => matrix_units(),
        5 => from_monomial_rule(3, "upper triangular", |i, j| match (i, j) {
            (0, 0) => Some(0),
            (0, 1) => Some(1),
            (1, 2) => Some(1),
            (2, 2) => Some(2),
            _ => None,
        }),
        6 => group_algebra(&GroupSpec::cyclic(3), Haar::Counting),
        7 => group_algebra(&GroupSpec::product(&GroupSpec::cyclic(2), &GroupSpec::cyclic(2)), Haar::Counting),
        8 => {
            let g = GroupSpec::cyclic(2);
            crossed_product(&g, &GSetSpec::regular(&g), Haar::Counting).unwrap()
        }
        9 => from_monomial_rule(2, "E11,E12", |i, j| match (i, j) {
            (0, 0) => Some(0),
            (0, 1) => Some(1),
            _ => None,
        }),
        10 => from_monomial_rule(4, "Q[x]/x^4", |i, j| (i + j < 4).then_some(i + j)),
        _ => direct_sum(&from_monomial_rule(1, "Q", |_, _| Some(0)), &group_algebra(&GroupSpec::cyclic(2), Haar::Counting)),
    }
}

/// Random unimodular integer matrix with its inverse.
pub fn random_unimodular<R: Rng>(rng: &mut R, n: usize, steps: usize) -> (Vec<Vec<Q>>, Vec<Vec<Q>>) {
    let id = |n: usize| -> Vec<Vec<i64>> { (0..n).map(|i| (0..n).map(|j| (i == j) as i64).collect()).collect() };
    let mut p = id(n);
    let mut pinv = id(n);
    if n > 1 {
        for _ in 0..steps {
            let i = rng.gen_range(0..n);
            let mut j = rng.gen_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let s: i64 = if rng.gen_bool(0.5) { 1 } else { -1 };
            // p <- p (1 + s E_ij): column j += s * column i; pinv <- (1 - s E_ij) pinv: row i -= s * row j.
            for r in 0..n {
                p[r][j] += s * p[r][i];
            }
            for c in 0..n {
                pinv[i][c] -= s * pinv[j][c];
            }
        }
    }
    let conv = |m: Vec<Vec<i64>>| m.into_iter().map(|r| r.into_iter().map(Q::from).collect()).collect();
    (conv(p), conv(pinv))
}

/// Random algebra of dimension at most `max_dim`, in a randomly changed integer basis.
pub fn random_algebra<R: Rng>(rng: &mut R, max_dim: usize) -> AlgebraSpec<Q> {
    loop {
        let base = catalogue_algebra(rng.gen_range(0..12));
        if base.dim() > max_dim {
            continue;
        }
        let (p, pinv) = random_unimodular(rng, base.dim(), 3);
        return base.change_basis(&p, &pinv).expect("basis change preserves associativity");
    }
}
