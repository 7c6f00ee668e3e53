//! Finite-dimensional equivariant spectral models, heat operators, simplex
//! brackets via divided differences of exp(-x), and McKean-Singer checks.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rustc_hash::FxHashMap;

use crate::algebra::{crossed_product, group_algebra, Algebra, AlgebraSpec, GSetSpec, GroupSpec, Haar};
use crate::error::{Error, Result};
use crate::scalar::{q_to_f64, C64};

pub type CMat = DMatrix<C64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Parity {
    Even,
    Odd,
}

/// How functions on the base act on the Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub enum FunctionRep {
    /// Basis vector `i` lies over point `point_of[i]`; functions act diagonally.
    Points { points: usize, point_of: Vec<usize> },
    /// Only constant functions are representable.
    ConstantsOnly,
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// D = H-self-adjoint, odd for the grading in the even case, commuting with r(g);
/// r is an anti-homomorphism r(gh) = r(h) r(g).
#[derive(Clone, Debug)]
pub struct SpectralModel {
    pub label: String,
    pub parity: Parity,
    pub grading: Option<Vec<f64>>,
    pub dirac: CMat,
    pub group: GroupSpec,
    pub haar: Haar,
    pub rep: Vec<CMat>,
    pub functions: FunctionRep,
    eigenvalues: Vec<f64>,
    eigenvectors: CMat,
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// a * b, skipping the zero entries of a; representations and multiplication operators are
/// mostly monomial matrices.
pub fn sparse_mul(a: &CMat, b: &CMat) -> CMat {
    let nnz = a.iter().filter(|z| z.re != 0.0 || z.im != 0.0).count();
    if nnz * 8 > a.nrows() * a.ncols() {
        return a * b;
    }
    let mut out = CMat::zeros(a.nrows(), b.ncols());
    for k in 0..a.ncols() {
        for i in 0..a.nrows() {
            let x = a[(i, k)];
            if x.re != 0.0 || x.im != 0.0 {
                for j in 0..b.ncols() {
                    out[(i, j)] += x * b[(k, j)];
                }
            }
        }
    }
    out
}

impl SpectralModel {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        label: &str,
        parity: Parity,
        grading: Option<Vec<f64>>,
        dirac: CMat,
        group: GroupSpec,
        haar: Haar,
        rep: Vec<CMat>,
        functions: FunctionRep,
    ) -> Result<Self> {
        let n = dirac.nrows();
        let tol = 1e-10 * (1.0 + max_abs(&dirac));
        if dirac.ncols() != n {
            return Err(Error::Precondition("D must be square".into()));
        }
        if max_abs(&(&dirac - dirac.adjoint())) > tol {
            return Err(Error::Precondition("D is not self-adjoint".into()));
        }
        match (&parity, &grading) {
            (Parity::Even, Some(gr)) => {
                if gr.len() != n || gr.iter().any(|&s| s != 1.0 && s != -1.0) {
                    return Err(Error::Precondition("grading must be a diagonal of +-1".into()));
                }
                for i in 0..n {
                    for j in 0..n {
                        if gr[i] == gr[j] && dirac[(i, j)].norm() > tol {
                            return Err(Error::Precondition("D is not odd".into()));
                        }
                    }
                }
            }
            (Parity::Even, None) => return Err(Error::Precondition("even model needs a grading".into())),
            (Parity::Odd, Some(_)) => return Err(Error::Precondition("odd model has no grading".into())),
            (Parity::Odd, None) => {}
        }
        if rep.len() != group.order() {
            return Err(Error::DimensionMismatch { expected: group.order(), got: rep.len() });
        }
        for g in 0..group.order() {
            if max_abs(&(sparse_mul(&rep[g], &dirac) - sparse_mul(&dirac, &rep[g]))) > tol {
                return Err(Error::Precondition(format!("r({g}) does not commute with D")));
            }
            if let Some(gr) = &grading {
                for i in 0..n {
                    for j in 0..n {
                        if gr[i] != gr[j] && rep[g][(i, j)].norm() > 1e-12 {
                            return Err(Error::Precondition(format!("r({g}) is not even")));
                        }
                    }
                }
            }
            for h in 0..group.order() {
                let lhs = &rep[group.mul(g, h)];
                let rhs = sparse_mul(&rep[h], &rep[g]);
                if max_abs(&(lhs - rhs)) > 1e-10 {
                    return Err(Error::Precondition(format!("r is not anti-multiplicative at ({g},{h})")));
                }
            }
        }
        if let FunctionRep::Points { points, point_of } = &functions {
            if point_of.len() != n || point_of.iter().any(|&p| p >= *points) {
                return Err(Error::Precondition("point labels out of range".into()));
            }
        }
        let eig = SymmetricEigen::new(dirac.clone());
        let mut model = SpectralModel {
            label: label.to_string(),
            parity,
            grading,
            dirac,
            group,
            haar,
            rep,
            functions,
            eigenvalues: eig.eigenvalues.iter().cloned().collect(),
            eigenvectors: eig.eigenvectors,
        };
        model.check_covariance()?;
        Ok(model)
    }

    /// r(h) pi(f) = pi(f^h) r(h) with f^h(x) = f(hx); checked on point projections.
    fn check_covariance(&mut self) -> Result<()> {
        let FunctionRep::Points { points, .. } = self.functions.clone() else { return Ok(()) };
        let Some(gset) = self.infer_gset()? else { return Ok(()) };
        for h in 0..self.group.order() {
            for y in 0..points {
                let py = self.point_projection(y);
                let hy = gset.act(self.group.inv(h), y);
                let lhs = &self.rep[h] * &py;
                let rhs = self.point_projection(hy) * &self.rep[h];
                if max_abs(&(lhs - rhs)) > 1e-10 {
                    return Err(Error::Precondition(format!("r({h}) is not covariant at point {y}")));
                }
            }
        }
        Ok(())
    }

    /// The action on points seen by r: r(h) maps the fiber over y to the fiber over h^-1 y.
    pub fn infer_gset(&self) -> Result<Option<GSetSpec>> {
        let FunctionRep::Points { points, .. } = &self.functions else { return Ok(None) };
        let mut rows = Vec::new();
        for g in 0..self.group.order() {
            let mut row = vec![usize::MAX; *points];
            let gi = self.group.inv(g);
            for y in 0..*points {
                // target of fiber y under r(g^-1) is g y.
                let img = &self.rep[gi] * self.point_projection(y);
                let mut target = None;
                for x in 0..*points {
                    if max_abs(&(self.point_projection(x) * &img)) > 1e-12 {
                        target = Some(x);
                    }
                }
                row[y] = target.unwrap_or(y);
            }
            rows.push(row);
        }
        GSetSpec::from_table(&self.group, rows, "inferred").map(Some)
    }

    pub fn dim(&self) -> usize {
        self.dirac.nrows()
    }
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }
    pub fn eigenvectors(&self) -> &CMat {
        &self.eigenvectors
    }

    pub fn grading_matrix(&self) -> CMat {
        let n = self.dim();
        match &self.grading {
            Some(g) => CMat::from_diagonal(&nalgebra::DVector::from_iterator(n, g.iter().map(|&s| c(s, 0.0)))),
            None => CMat::identity(n, n),
        }
    }

    pub fn point_projection(&self, x: usize) -> CMat {
        let n = self.dim();
        match &self.functions {
            FunctionRep::Points { point_of, .. } => CMat::from_diagonal(&nalgebra::DVector::from_iterator(
                n,
                point_of.iter().map(|&p| if p == x { c(1.0, 0.0) } else { c(0.0, 0.0) }),
            )),
            FunctionRep::ConstantsOnly => CMat::identity(n, n),
        }
    }

    /// Multiplication operator of a function given by its values on points (or a constant).
    pub fn multiplication(&self, f: &[C64]) -> Result<CMat> {
        let n = self.dim();
        match &self.functions {
            FunctionRep::Points { points, point_of } => {
                if f.len() != *points {
                    return Err(Error::DimensionMismatch { expected: *points, got: f.len() });
                }
                Ok(CMat::from_diagonal(&nalgebra::DVector::from_iterator(n, point_of.iter().map(|&p| f[p]))))
            }
            FunctionRep::ConstantsOnly => {
                if f.len() != 1 {
                    return Err(Error::Unrepresentable("only constant functions act on this model".into()));
                }
                Ok(CMat::identity(n, n) * f[0])
            }
        }
    }

    /// Matrix expressed in the eigenbasis of D.
    pub fn to_eigenbasis(&self, m: &CMat) -> CMat {
        self.eigenvectors.adjoint() * sparse_mul(m, &self.eigenvectors)
    }
    pub fn from_eigenbasis(&self, m: &CMat) -> CMat {
        &self.eigenvectors * m * self.eigenvectors.adjoint()
    }

    /// Trace functional: supertrace (even) or sqrt(2i) times the trace (odd).
    pub fn tau_factor(&self) -> C64 {
        match self.parity {
            Parity::Even => c(1.0, 0.0),
            Parity::Odd => c(0.0, 2.0).sqrt(),
        }
    }

    /// Grading in the eigenbasis (identity in the odd case).
    pub fn grading_eigen(&self) -> CMat {
        self.to_eigenbasis(&self.grading_matrix())
    }

    /// exp(-s D^2).
    pub fn heat(&self, s: f64) -> Result<CMat> {
        if s < 0.0 {
            return Err(Error::Precondition("heat needs s >= 0".into()));
        }
        let n = self.dim();
        let diag = nalgebra::DVector::from_iterator(n, self.eigenvalues.iter().map(|l| c((-s * l * l).exp(), 0.0)));
        Ok(self.from_eigenbasis(&CMat::from_diagonal(&diag)))
    }

    /// The crossed product (finite base) or the group algebra of constants, with the
    /// function coordinates of each basis letter.
    pub fn model_algebra(&self) -> Result<ModelAlgebra> {
        match &self.functions {
            FunctionRep::Points { points, .. } => {
                let gset = self.infer_gset()?.expect("points model");
                let alg = crossed_product(&self.group, &gset, self.haar)?;
                let mut coords = Vec::new();
                for g in 0..self.group.order() {
                    for x in 0..*points {
                        let mut f = vec![c(0.0, 0.0); *points];
                        f[x] = c(1.0, 0.0);
                        coords.push(vec![(g, f)]);
                    }
                }
                Ok(ModelAlgebra { algebra: alg, coords, gset: Some(gset) })
            }
            FunctionRep::ConstantsOnly => {
                let alg = group_algebra(&self.group, self.haar);
                let coords = (0..self.group.order()).map(|g| vec![(g, vec![c(1.0, 0.0)])]).collect();
                Ok(ModelAlgebra { algebra: alg, coords, gset: None })
            }
        }
    }

    /// rho(a)(g) = pi(a(g)) r(g) for a basis letter.
    pub fn rho_letter(&self, ma: &ModelAlgebra, letter: u32) -> Result<Vec<(usize, CMat)>> {
        let mut out = Vec::new();
        for (g, f) in &ma.coords[letter as usize] {
            out.push((*g, sparse_mul(&self.multiplication(f)?, &self.rep[*g])));
        }
        Ok(out)
    }
}

/// Algebra acting on a model, with coordinates a(g) of each basis letter.
#[derive(Clone, Debug)]
pub struct ModelAlgebra {
    pub algebra: AlgebraSpec<crate::scalar::Q>,
    pub coords: Vec<Vec<(usize, Vec<C64>)>>,
    pub gset: Option<GSetSpec>,
}

impl ModelAlgebra {
    pub fn weight(&self, group: &GroupSpec, haar: Haar) -> f64 {
        q_to_f64(&haar.weight(group.order()))
    }
}

/// phi_n(x_0..x_n) = int over the n-simplex of exp(-sum s_i x_i), symmetric in its arguments.
pub fn simplex_exp(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    simplex_exp_sorted(&v)
}

const SERIES_SPREAD: f64 = 0.5;

fn simplex_exp_sorted(v: &[f64]) -> f64 {
    let n = v.len() - 1;
    let lo = v[0];
    let hi = v[n];
    if hi - lo < SERIES_SPREAD {
        let mid = 0.5 * (lo + hi);
        let y: Vec<f64> = v.iter().map(|x| x - mid).collect();
        return (-mid).exp() * series(&y);
    }
    let a = simplex_exp_sorted(&v[..n]);
    let b = simplex_exp_sorted(&v[1..]);
    (a - b) / (hi - lo)
}

/// sum_k (-1)^k h_k(y) / (n + k)!, h_k the complete homogeneous symmetric polynomials.
fn series(y: &[f64]) -> f64 {
    let n = y.len() - 1;
    let kmax = 40;
    // h[k] over the variables seen so far.
    let mut h = vec![0.0; kmax + 1];
    h[0] = 1.0;
    for &yi in y {
        for k in 1..=kmax {
            h[k] += yi * h[k - 1];
        }
    }
    let mut fact = 1.0;
    for k in 2..=n {
        fact *= k as f64;
    }
    let mut sum = 0.0;
    for (k, hk) in h.iter().enumerate() {
        if k > 0 {
            fact *= (n + k) as f64;
        }
        // No early exit: odd h_k vanish for node sets symmetric about the midpoint.
        let term = hk / fact;
        sum += if k % 2 == 0 { term } else { -term };
    }
    sum
}

/// Table of phi over all index paths of length n+1 through the eigenvalues x_i = t^2 lambda_i^2.
pub struct BracketTable {
    pub xs: Vec<f64>,
    cache: std::sync::Mutex<FxHashMap<Vec<u16>, f64>>,
}

impl BracketTable {
    pub fn new(model: &SpectralModel, t: f64) -> Self {
        BracketTable {
            xs: model.eigenvalues().iter().map(|l| t * t * l * l).collect(),
            cache: std::sync::Mutex::new(FxHashMap::default()),
        }
    }
    pub fn phi(&self, path: &[u16]) -> f64 {
        let mut key = path.to_vec();
        key.sort_unstable();
        if let Some(v) = self.cache.lock().unwrap().get(&key) {
            return *v;
        }
        let v = simplex_exp(&key.iter().map(|&i| self.xs[i as usize]).collect::<Vec<_>>());
        self.cache.lock().unwrap().insert(key, v);
        v
    }
}

/// <M_1, ..., M_n>_t for eigenbasis matrices, returned in the eigenbasis.
pub fn bracket_eigen(table: &BracketTable, mats: &[&CMat]) -> CMat {
    let n = table.xs.len();
    let mut out = CMat::zeros(n, n);
    if mats.is_empty() {
        for i in 0..n {
            out[(i, i)] = c(table.phi(&[i as u16]), 0.0);
        }
        return out;
    }
    let mut path = vec![0u16; mats.len() + 1];
    for i in 0..n {
        path[0] = i as u16;
        walk(table, mats, 0, c(1.0, 0.0), &mut path, &mut |j, v| out[(i, j)] += v);
    }
    out
}

fn walk(table: &BracketTable, mats: &[&CMat], depth: usize, acc: C64, path: &mut Vec<u16>, emit: &mut dyn FnMut(usize, C64)) {
    let from = path[depth] as usize;
    let m = mats[depth];
    for k in 0..table.xs.len() {
        let v = m[(from, k)];
        if v.norm() == 0.0 {
            continue;
        }
        path[depth + 1] = k as u16;
        let a = acc * v;
        if depth + 1 == mats.len() {
            emit(k, a * table.phi(&path[..]));
        } else {
            walk(table, mats, depth + 1, a, path, emit);
        }
    }
}

/// tau <M_1..M_n>_t for eigenbasis matrices: Tr(Gamma <..>) times the parity factor.
pub fn tau_bracket_eigen(model: &SpectralModel, gamma_eigen: &CMat, table: &BracketTable, mats: &[&CMat]) -> C64 {
    let n = table.xs.len();
    let factor = model.tau_factor();
    if mats.is_empty() {
        let mut s = c(0.0, 0.0);
        for i in 0..n {
            s += gamma_eigen[(i, i)] * table.phi(&[i as u16]);
        }
        return s * factor;
    }
    // Close the loop through Gamma: sum Gamma[j,i] <..>[i,j].
    let mut s = c(0.0, 0.0);
    let mut path = vec![0u16; mats.len() + 1];
    for i in 0..n {
        path[0] = i as u16;
        walk(table, mats, 0, c(1.0, 0.0), &mut path, &mut |j, v| s += gamma_eigen[(j, i)] * v);
    }
    s * factor
}

/// <M_1..M_n>_t in the original basis.
pub fn simplex_bracket(model: &SpectralModel, t: f64, mats: &[CMat]) -> CMat {
    let table = BracketTable::new(model, t);
    let e: Vec<CMat> = mats.iter().map(|m| model.to_eigenbasis(m)).collect();
    let refs: Vec<&CMat> = e.iter().collect();
    model.from_eigenbasis(&bracket_eigen(&table, &refs))
}

/// [D, M] computed in the eigenbasis.
pub fn commutator_eigen(model: &SpectralModel, m: &CMat) -> CMat {
    let l = model.eigenvalues();
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * (l[i] - l[j]))
}

/// Str(r(g) exp(-t^2 D^2)) in the even case, Tr(..) in the odd case.
pub fn equivariant_trace(model: &SpectralModel, g: usize, t: f64) -> C64 {
    // diagonal of U* (Γ r(g)) U only
    let u = &model.eigenvectors;
    let mu = sparse_mul(&sparse_mul(&model.grading_matrix(), &model.rep[g]), u);
    model
        .eigenvalues()
        .iter()
        .enumerate()
        .map(|(i, l)| u.column(i).dotc(&mu.column(i)) * (-t * t * l * l).exp())
        .sum()
}

/// Index by kernel ranks: dim ker D+ - dim ker D-.
pub fn rank_index(model: &SpectralModel) -> Result<i64> {
    let Some(gr) = &model.grading else { return Err(Error::Precondition("index needs an even model".into())) };
    let plus: Vec<usize> = (0..model.dim()).filter(|&i| gr[i] > 0.0).collect();
    let minus: Vec<usize> = (0..model.dim()).filter(|&i| gr[i] < 0.0).collect();
    let dp = CMat::from_fn(minus.len(), plus.len(), |i, j| model.dirac[(minus[i], plus[j])]);
    Ok(kernel_dim_strict(&dp)? as i64 - kernel_dim_strict(&dp.adjoint())? as i64)
}

pub fn kernel_dim(m: &CMat) -> usize {
    if m.ncols() == 0 {
        return 0;
    }
    if m.nrows() == 0 {
        return m.ncols();
    }
    let svd = m.clone().svd(false, false);
    let scale = svd.singular_values.iter().cloned().fold(1.0, f64::max);
    let rank = svd.singular_values.iter().filter(|&&s| s > 1e-9 * scale).count();
    m.ncols() - rank
}

/// Kernel dimension that refuses to decide when a singular value sits in [1e-11, 1e-7].
pub fn kernel_dim_strict(m: &CMat) -> Result<usize> {
    if m.nrows() > 0 && m.ncols() > 0 {
        let svd = m.clone().svd(false, false);
        if let Some(s) = svd.singular_values.iter().find(|&&s| (1e-11..=1e-7).contains(&s)) {
            return Err(Error::Precondition(format!("indeterminate kernel: singular value {s:e}")));
        }
    }
    Ok(kernel_dim(m))
}

/// Schatten p-norm (sum of p-th powers of singular values)^(1/p).
pub fn schatten_norm(m: &CMat, p: f64) -> Result<f64> {
    if p < 1.0 {
        return Err(Error::Precondition("Schatten norm needs p >= 1".into()));
    }
    if m.is_empty() {
        return Ok(0.0);
    }
    let svd = m.clone().svd(false, false);
    Ok(svd.singular_values.iter().map(|s| s.powf(p)).sum::<f64>().powf(1.0 / p))
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct McKeanSingerReport {
    pub label: String,
    pub times: Vec<f64>,
    pub supertraces: Vec<f64>,
    pub drift: f64,
    pub rank_index: i64,
    pub pass: bool,
}

/// Str exp(-t^2 D^2) over a list of times, its drift and agreement with the rank index.
pub fn mckean_singer(model: &SpectralModel, times: &[f64], tol: f64) -> Result<McKeanSingerReport> {
    let idx = rank_index(model)?;
    let vals: Vec<f64> = times.iter().map(|&t| equivariant_trace(model, 0, t).re).collect();
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let drift = hi - lo;
    let pass = drift <= tol && vals.iter().all(|v| (v - idx as f64).abs() <= tol);
    Ok(McKeanSingerReport { label: model.label.clone(), times: times.to_vec(), supertraces: vals, drift, rank_index: idx, pass })
}

fn random_c<R: Rng>(rng: &mut R) -> C64 {
    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Random 4x4 model on four points with one-dimensional fibers, graded +,-,+,- in the even
/// case. With `swap`, Z/2 exchanges points 0<->2 and 1<->3, acting with a sign on the
/// second pair so that D+ is not forced to be normal.
pub fn random_finite_model<R: Rng>(rng: &mut R, parity: Parity, swap: bool, haar: Haar) -> SpectralModel {
    let points = 4;
    let n = points;
    let point_of: Vec<usize> = (0..n).collect();
    let grading = match parity {
        Parity::Even => Some((0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect::<Vec<_>>()),
        Parity::Odd => None,
    };
    let group = if swap { GroupSpec::cyclic(2) } else { GroupSpec::trivial() };
    let mut rep = vec![CMat::identity(n, n)];
    if swap {
        let mut s = CMat::zeros(n, n);
        for i in 0..n {
            s[(i, (i + 2) % n)] = c(if i % 2 == 1 { -1.0 } else { 1.0 }, 0.0);
        }
        rep.push(s);
    }
    let mut m = CMat::from_fn(n, n, |_, _| random_c(rng));
    m = &m + m.adjoint();
    if let Some(gr) = &grading {
        for i in 0..n {
            for j in 0..n {
                if gr[i] == gr[j] {
                    m[(i, j)] = c(0.0, 0.0);
                }
            }
        }
    }
    // Average over the group so that D commutes with r.
    let mut d = CMat::zeros(n, n);
    for r in &rep {
        d += r.adjoint() * &m * r;
    }
    d /= c(rep.len() as f64, 0.0);
    SpectralModel::new(
        &format!("random-{}-{}", if parity == Parity::Even { "even" } else { "odd" }, if swap { "z2" } else { "trivial" }),
        parity,
        grading,
        d,
        group,
        haar,
        rep,
        FunctionRep::Points { points, point_of },
    )
    .expect("random model is valid")
}

/// Seeded random model of dimension `dim` with trivial group, one point per basis vector,
/// alternating grading in the even case.
pub fn random_model(seed: u64, dim: usize, parity: Parity) -> Result<SpectralModel> {
    use rand::SeedableRng;
    if dim == 0 || (parity == Parity::Even && dim < 2) {
        return Err(Error::Precondition("random even model needs both chiralities".into()));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let grading = match parity {
        Parity::Even => Some((0..dim).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect::<Vec<_>>()),
        Parity::Odd => None,
    };
    let mut d = CMat::from_fn(dim, dim, |_, _| random_c(&mut rng));
    d = &d + d.adjoint();
    if let Some(gr) = &grading {
        for i in 0..dim {
            for j in 0..dim {
                if gr[i] == gr[j] {
                    d[(i, j)] = c(0.0, 0.0);
                }
            }
        }
    }
    SpectralModel::new(
        &format!("random-{seed}-{dim}"),
        parity,
        grading,
        d,
        GroupSpec::trivial(),
        Haar::Counting,
        vec![CMat::identity(dim, dim)],
        FunctionRep::Points { points: dim, point_of: (0..dim).collect() },
    )
}

/// Even model on one point: D+ is a random p x q block of rank min(p,q) - deficit.
pub fn index_model<R: Rng>(rng: &mut R, p: usize, q: usize) -> SpectralModel {
    let n = p + q;
    let grading: Vec<f64> = (0..n).map(|i| if i < p { 1.0 } else { -1.0 }).collect();
    let mut d = CMat::zeros(n, n);
    for i in 0..q {
        for j in 0..p {
            let z = random_c(rng);
            d[(p + i, j)] = z;
            d[(j, p + i)] = z.conj();
        }
    }
    SpectralModel::new(
        &format!("index-{p}-{q}"),
        Parity::Even,
        Some(grading),
        d,
        GroupSpec::trivial(),
        Haar::Normalized,
        vec![CMat::identity(n, n)],
        FunctionRep::Points { points: 1, point_of: vec![0; n] },
    )
    .expect("index model is valid")
}

/// Circle Dirac operator on Fourier modes |n| <= cutoff, D = n + twist, with Z/order acting by
/// rotation through 2 pi step / order.
pub fn circle_model(cutoff: i64, order: usize, step: i64, twist: f64) -> SpectralModel {
    let modes: Vec<i64> = (-cutoff..=cutoff).collect();
    let n = modes.len();
    let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(n, modes.iter().map(|&k| c(k as f64 + twist, 0.0))));
    let group = GroupSpec::cyclic(order);
    let rep = (0..order)
        .map(|g| {
            let ang = 2.0 * std::f64::consts::PI * (g as i64 * step) as f64 / order as f64;
            CMat::from_diagonal(&nalgebra::DVector::from_iterator(n, modes.iter().map(|&k| C64::from_polar(1.0, ang * k as f64))))
        })
        .collect();
    SpectralModel::new(
        &format!("circle-{cutoff}-z{order}"),
        Parity::Odd,
        None,
        d,
        group,
        Haar::Normalized,
        rep,
        FunctionRep::ConstantsOnly,
    )
    .expect("circle model is valid")
}

/// Untwisted circle Dirac operator with Z/order acting by the basic rotation.
pub fn circle_dirac(cutoff: i64, order: usize) -> SpectralModel {
    circle_model(cutoff, order, 1, 0.0)
}

/// Index of a mode (n1, n2, s) on the torus model.
pub fn torus_index(cutoff: i64, n1: i64, n2: i64, s: usize) -> usize {
    let w = (2 * cutoff + 1) as usize;
    (((n1 + cutoff) as usize) * w + (n2 + cutoff) as usize) * 2 + s
}

/// Dirac operator on the flat square torus, spinors C^{1|1}, modes |n_i| <= cutoff.
/// With `involution`, G = Z/4 whose generator acts by x -> -x lifted to spinors by
/// `spin_sign * diag(i, -i)`; the generator's square acts trivially on the torus.
pub fn torus2_dirac(cutoff: i64, involution: bool, spin_sign: f64) -> SpectralModel {
    let w = (2 * cutoff + 1) as usize;
    let n = 2 * w * w;
    let mut d = CMat::zeros(n, n);
    for n1 in -cutoff..=cutoff {
        for n2 in -cutoff..=cutoff {
            let p = torus_index(cutoff, n1, n2, 0);
            let m = torus_index(cutoff, n1, n2, 1);
            d[(m, p)] = c(n1 as f64, n2 as f64);
            d[(p, m)] = c(n1 as f64, -n2 as f64);
        }
    }
    let grading: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let (group, rep) = if involution {
        let spin = [c(0.0, spin_sign), c(0.0, -spin_sign)];
        let mut u = CMat::zeros(n, n);
        for n1 in -cutoff..=cutoff {
            for n2 in -cutoff..=cutoff {
                for s in 0..2 {
                    // (r xi)_n = S xi_{-n}
                    u[(torus_index(cutoff, n1, n2, s), torus_index(cutoff, -n1, -n2, s))] = spin[s];
                }
            }
        }
        let mut rep = vec![CMat::identity(n, n)];
        for k in 1..4 {
            rep.push(sparse_mul(&rep[k - 1], &u));
        }
        (GroupSpec::cyclic(4), rep)
    } else {
        (GroupSpec::trivial(), vec![CMat::identity(n, n)])
    };
    SpectralModel::new(
        &format!("torus2-{cutoff}{}", if involution { "-involution" } else { "" }),
        Parity::Even,
        Some(grading),
        d,
        group,
        Haar::Normalized,
        rep,
        FunctionRep::ConstantsOnly,
    )
    .expect("torus model is valid")
}

/// Even model on H1 (x) H2 (x) C^{1|1} with D = [[0, D1 - i D2], [D1 + i D2, 0]] for odd models.
pub fn external_product_oddodd(m1: &SpectralModel, m2: &SpectralModel) -> Result<SpectralModel> {
    if m1.parity != Parity::Odd || m2.parity != Parity::Odd {
        return Err(Error::Precondition("external product takes two odd models".into()));
    }
    let (a, b) = (m1.dim(), m2.dim());
    let k = a * b;
    let d1 = m1.dirac.kronecker(&CMat::identity(b, b));
    let d2 = CMat::identity(a, a).kronecker(&m2.dirac);
    let i = c(0.0, 1.0);
    let plus = &d1 + &d2 * i;
    let minus = &d1 - &d2 * i;
    let mut d = CMat::zeros(2 * k, 2 * k);
    d.view_mut((k, 0), (k, k)).copy_from(&plus);
    d.view_mut((0, k), (k, k)).copy_from(&minus);
    let grading: Vec<f64> = (0..2 * k).map(|x| if x < k { 1.0 } else { -1.0 }).collect();
    let group = GroupSpec::product(&m1.group, &m2.group);
    let mut rep = Vec::new();
    for g1 in 0..m1.group.order() {
        for g2 in 0..m2.group.order() {
            let r = m1.rep[g1].kronecker(&m2.rep[g2]);
            let mut full = CMat::zeros(2 * k, 2 * k);
            full.view_mut((0, 0), (k, k)).copy_from(&r);
            full.view_mut((k, k), (k, k)).copy_from(&r);
            rep.push(full);
        }
    }
    SpectralModel::new(
        &format!("{}x{}", m1.label, m2.label),
        Parity::Even,
        Some(grading),
        d,
        group,
        m1.haar,
        rep,
        FunctionRep::ConstantsOnly,
    )
}

/// Symmetric check that a model algebra representation is multiplicative:
/// rho(ab) = rho(a) * rho(b) under convolution of tables.
pub fn check_rho_homomorphism(model: &SpectralModel, ma: &ModelAlgebra) -> Result<f64> {
    let w = ma.weight(&model.group, model.haar);
    let dim = ma.algebra.dim();
    let table = |l: u32| -> Result<Vec<(usize, CMat)>> { model.rho_letter(ma, l) };
    let mut worst: f64 = 0.0;
    for i in 0..dim as u32 {
        for j in 0..dim as u32 {
            let mut lhs: Vec<CMat> = vec![CMat::zeros(model.dim(), model.dim()); model.group.order()];
            ma.algebra.multiply(&i, &j, &mut |k, s| {
                for (g, m) in table(k).expect("representable") {
                    lhs[g] += &m * c(q_to_f64(&s), 0.0);
                }
            });
            let mut rhs: Vec<CMat> = vec![CMat::zeros(model.dim(), model.dim()); model.group.order()];
            for (h, a) in table(i)? {
                for (k, b) in table(j)? {
                    // (T1 T2)(g) = sum_h w T1(h) T2(g h^-1): g = k h.
                    rhs[model.group.mul(k, h)] += &a * &b * c(w, 0.0);
                }
            }
            for g in 0..model.group.order() {
                worst = worst.max(max_abs(&(&lhs[g] - &rhs[g])));
            }
        }
    }
    Ok(worst)
}
