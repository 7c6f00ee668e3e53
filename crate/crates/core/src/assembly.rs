//! Finite-scale assembly index: the involutive lift T of an almost invertible
//! pair, the idempotents e₁ and e₀, the map θ(T)(g) = c T r(g) c into matrix
//! valued functions on G, and the traces of θ(e₁) - θ(e₀).

use crate::error::{Error, Result};
use crate::scalar::C64;
use crate::spectral::{c, kernel_dim_strict, CMat, Parity, SpectralModel};

fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn block(tl: &CMat, tr: &CMat, bl: &CMat, br: &CMat) -> CMat {
    let (p, q) = (tl.nrows(), br.nrows());
    let mut m = CMat::zeros(p + q, p + q);
    m.view_mut((0, 0), (p, p)).copy_from(tl);
    m.view_mut((0, p), (p, q)).copy_from(tr);
    m.view_mut((p, 0), (q, p)).copy_from(bl);
    m.view_mut((p, p), (q, q)).copy_from(br);
    m
}

/// Q: H+ -> H- and P: H- -> H+, with the residuals PQ - 1 and QP - 1 recorded.
#[derive(Clone, Debug)]
pub struct AlmostInvertiblePair {
    pub q: CMat,
    pub p: CMat,
    pub residual_plus: f64,
    pub residual_minus: f64,
}

impl AlmostInvertiblePair {
    pub fn new(q: CMat, p: CMat) -> Result<Self> {
        if p.nrows() != q.ncols() || p.ncols() != q.nrows() {
            return Err(Error::DimensionMismatch { expected: q.ncols(), got: p.nrows() });
        }
        let (dp, dm) = (q.ncols(), q.nrows());
        let residual_plus = max_abs(&(&p * &q - CMat::identity(dp, dp)));
        let residual_minus = max_abs(&(&q * &p - CMat::identity(dm, dm)));
        Ok(AlmostInvertiblePair { q, p, residual_plus, residual_minus })
    }

    /// Q with its Moore-Penrose pseudo-inverse as parametrix.
    pub fn with_pseudo_inverse(q: CMat) -> Result<Self> {
        let p = if q.is_empty() {
            CMat::zeros(q.ncols(), q.nrows())
        } else {
            q.clone().pseudo_inverse(1e-12).map_err(|e| Error::Precondition(e.to_string()))?
        };
        Self::new(q, p)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.q.ncols(), self.q.nrows())
    }
}

/// T = [[1, 0], [Q, -1]] [[1, P], [0, 1]] [[1, 0], [-Q, 1]], checked against the closed form.
pub fn parametrix_lift(pair: &AlmostInvertiblePair) -> Result<CMat> {
    let (p_dim, q_dim) = pair.dims();
    let (q, p) = (&pair.q, &pair.p);
    let ip = CMat::identity(p_dim, p_dim);
    let iq = CMat::identity(q_dim, q_dim);
    let zpq = CMat::zeros(p_dim, q_dim);
    let a = block(&ip, &zpq, q, &(-&iq));
    let b = block(&ip, p, &CMat::zeros(q_dim, p_dim), &iq);
    let m = block(&ip, &zpq, &(-q), &iq);
    let product = a * b * m;
    let closed = block(&(&ip - p * q), p, &(q * c(2.0, 0.0) - q * p * q), &(q * p - &iq));
    let scale = 1.0 + max_abs(&closed);
    let gap = max_abs(&(&product - &closed));
    if gap > 1e-10 * scale * scale {
        return Err(Error::Precondition(format!("lift product and closed form differ by {gap:e}")));
    }
    Ok(closed)
}

/// Ind(Q) = [e₁] - [e₀] with its trace.
#[derive(Clone, Debug)]
pub struct IndexClass {
    pub lift: CMat,
    pub e1: CMat,
    pub e0: CMat,
    pub trace: f64,
    pub index: i64,
}

/// e₁ = T⁻¹ diag(1, 0) T, e₀ = diag(0, 1) and the integer Tr(e₁ - e₀), cross-checked by kernel ranks.
pub fn index_class(pair: &AlmostInvertiblePair) -> Result<IndexClass> {
    let (p_dim, q_dim) = pair.dims();
    let n = p_dim + q_dim;
    let t = parametrix_lift(pair)?;
    let scale = 1.0 + max_abs(&t);
    if max_abs(&(&t * &t - CMat::identity(n, n))) > 1e-10 * scale * scale {
        return Err(Error::Precondition("lift does not square to one".into()));
    }
    let proj = |plus: bool| CMat::from_fn(n, n, |i, j| if i == j && ((i < p_dim) == plus) { c(1.0, 0.0) } else { c(0.0, 0.0) });
    // T⁻¹ = T
    let e1 = &t * proj(true) * &t;
    let e0 = proj(false);
    let idem = max_abs(&(&e1 * &e1 - &e1));
    if idem > 1e-8 * scale.powi(4) {
        return Err(Error::NotIdempotent(format!("e1 squared differs from e1 by {idem:e}")));
    }
    let trace = (&e1 - &e0).trace().re;
    let index = trace.round();
    if (trace - index).abs() > 1e-8 {
        return Err(Error::Precondition(format!("Tr(e1 - e0) = {trace} is not an integer; the parametrix is too poor")));
    }
    let oracle = kernel_dim_strict(&pair.q)? as i64 - kernel_dim_strict(&pair.q.adjoint())? as i64;
    if oracle != index as i64 {
        return Err(Error::Precondition(format!("trace index {index} differs from kernel-rank index {oracle}")));
    }
    Ok(IndexClass { lift: t, e1, e0, trace, index: index as i64 })
}

/// θ(T)(g) = c T r(g) c for every g.
pub fn theta_map(t: &CMat, model: &SpectralModel, cutoff: &CMat) -> Vec<CMat> {
    model.rep.iter().map(|r| cutoff * t * r * cutoff).collect()
}

/// Σ_g w r(g) c² r(g)⁻¹ - 1, which vanishes exactly when c is a cut-off.
pub fn cutoff_defect(model: &SpectralModel, cutoff: &CMat) -> f64 {
    let w = crate::scalar::q_to_f64(&model.haar.weight(model.group.order()));
    let n = model.dim();
    let c2 = cutoff * cutoff;
    let mut acc = CMat::zeros(n, n);
    for r in &model.rep {
        acc += r * &c2 * r.adjoint() * c(w, 0.0);
    }
    max_abs(&(acc - CMat::identity(n, n)))
}

/// Convolution (f₁ * f₂)(g) = Σ_h w f₁(h) f₂(g h⁻¹).
pub fn convolve(model: &SpectralModel, f1: &[CMat], f2: &[CMat]) -> Vec<CMat> {
    let w = crate::scalar::q_to_f64(&model.haar.weight(model.group.order()));
    let n = model.dim();
    let mut out = vec![CMat::zeros(n, n); model.group.order()];
    for (h, a) in f1.iter().enumerate() {
        for (k, b) in f2.iter().enumerate() {
            out[model.group.mul(k, h)] += a * b * c(w, 0.0);
        }
    }
    out
}

/// max_g ‖θ(T₁T₂)(g) - (θ(T₁) * θ(T₂))(g)‖, or None when c fails the cut-off identity.
pub fn theta_homomorphism_residual(t1: &CMat, t2: &CMat, model: &SpectralModel, cutoff: &CMat) -> Option<f64> {
    let defect = cutoff_defect(model, cutoff);
    if defect > 1e-10 {
        eprintln!("warning: cut-off identity fails by {defect:e}; homomorphism check skipped");
        return None;
    }
    let lhs = theta_map(&(t1 * t2), model, cutoff);
    let rhs = convolve(model, &theta_map(t1, model, cutoff), &theta_map(t2, model, cutoff));
    Some(lhs.iter().zip(&rhs).map(|(a, b)| max_abs(&(a - b))).fold(0.0, f64::max))
}

/// Positions of the + and - basis vectors of an even model.
pub fn chirality_indices(model: &SpectralModel) -> Result<(Vec<usize>, Vec<usize>)> {
    let Some(gr) = &model.grading else {
        return Err(Error::Precondition("assembly needs an even model".into()));
    };
    let plus = (0..model.dim()).filter(|&i| gr[i] > 0.0).collect();
    let minus = (0..model.dim()).filter(|&i| gr[i] < 0.0).collect();
    Ok((plus, minus))
}

/// Matrix in block order (H+ then H-) moved to the model's basis order.
pub fn to_model_basis(model: &SpectralModel, m: &CMat) -> Result<CMat> {
    let (plus, minus) = chirality_indices(model)?;
    let order: Vec<usize> = plus.into_iter().chain(minus).collect();
    let mut out = CMat::zeros(model.dim(), model.dim());
    for (a, &i) in order.iter().enumerate() {
        for (b, &j) in order.iter().enumerate() {
            out[(i, j)] = m[(a, b)];
        }
    }
    Ok(out)
}

/// The chiral blocks of r(g) on H+ and H-.
fn chiral_rep(model: &SpectralModel, g: usize) -> Result<(CMat, CMat)> {
    let (plus, minus) = chirality_indices(model)?;
    let r = &model.rep[g];
    let sub = |ix: &[usize]| CMat::from_fn(ix.len(), ix.len(), |a, b| r[(ix[a], ix[b])]);
    Ok((sub(&plus), sub(&minus)))
}

/// g ↦ Tr(θ(e₁)(g) - θ(e₀)(g)) for an equivariant pair on the chiral halves of an even model.
pub fn assembly_index_pushed(pair: &AlmostInvertiblePair, model: &SpectralModel, cutoff: &CMat) -> Result<Vec<C64>> {
    let (plus, minus) = chirality_indices(model)?;
    if pair.dims() != (plus.len(), minus.len()) {
        return Err(Error::DimensionMismatch { expected: plus.len() + minus.len(), got: pair.q.ncols() + pair.q.nrows() });
    }
    for g in 0..model.group.order() {
        let (rp, rm) = chiral_rep(model, g)?;
        let dq = max_abs(&(&pair.q * &rp - &rm * &pair.q));
        let dp = max_abs(&(&pair.p * &rm - &rp * &pair.p));
        if dq > 1e-10 || dp > 1e-10 {
            return Err(Error::Precondition(format!("pair does not commute with r({g})")));
        }
    }
    let class = index_class(pair)?;
    let diff = to_model_basis(model, &(&class.e1 - &class.e0))?;
    Ok(theta_map(&diff, model, cutoff).iter().map(|m| m.trace()).collect())
}

/// Diagonal cut-off matrix from the squares c(x)² of a function on points.
pub fn cutoff_matrix(model: &SpectralModel, squares: &[f64]) -> Result<CMat> {
    let n = model.dim();
    match &model.functions {
        crate::spectral::FunctionRep::Points { point_of, .. } => {
            Ok(CMat::from_fn(n, n, |i, j| if i == j { c(squares[point_of[i]].sqrt(), 0.0) } else { c(0.0, 0.0) }))
        }
        crate::spectral::FunctionRep::ConstantsOnly => {
            if squares.len() != 1 {
                return Err(Error::Precondition("constants-only model takes one cut-off value".into()));
            }
            Ok(CMat::identity(n, n) * c(squares[0].sqrt(), 0.0))
        }
    }
}

/// The even model with D = [[0, Q*], [Q, 0]] on H+ ⊕ H- and r given blockwise.
pub fn pair_model(pair: &AlmostInvertiblePair, template: &SpectralModel) -> Result<SpectralModel> {
    if template.parity != Parity::Even {
        return Err(Error::Precondition("pair model needs an even template".into()));
    }
    let (p_dim, q_dim) = pair.dims();
    let d = block(&CMat::zeros(p_dim, p_dim), &pair.q.adjoint(), &pair.q, &CMat::zeros(q_dim, q_dim));
    SpectralModel::new(
        &format!("{}-pair", template.label),
        Parity::Even,
        template.grading.clone(),
        to_model_basis(template, &d)?,
        template.group.clone(),
        template.haar,
        template.rep.clone(),
        template.functions.clone(),
    )
}
