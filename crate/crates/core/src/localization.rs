//! The fixed-point side of the equivariant index formula: Â-genus, relative and
//! normal-spinor characters as differential forms on the fixed set, the
//! pointwise limit of ch_n(tD), and its comparison with the heat-kernel side.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use smallvec::SmallVec;

use crate::algebra::{GroupSpec, Haar};
use crate::chern::{word_concat, MixedForm};
use crate::error::{Error, Result};
use crate::forms::{FormChain, Word};
use crate::jlo::Jlo;
use crate::manifold::{FiniteModel, FixedSet, ManifoldModel, TorusModel, TorusMono};
use crate::scalar::{Scalar, C64, Q, QI};
use crate::spectral::{c, CMat, Parity};

/// Element of the exterior algebra on `dim` generators, keyed by bit masks.
#[derive(Clone, Debug, PartialEq)]
pub struct Form {
    pub dim: usize,
    pub terms: BTreeMap<u32, C64>,
}

fn mask_sign(a: u32, b: u32) -> Option<f64> {
    if a & b != 0 {
        return None;
    }
    let mut swaps = 0;
    for j in 0..32 {
        if b & (1 << j) != 0 {
            swaps += (a >> (j + 1)).count_ones();
        }
    }
    Some(if swaps % 2 == 0 { 1.0 } else { -1.0 })
}

impl Form {
    pub fn zero(dim: usize) -> Self {
        Form { dim, terms: BTreeMap::new() }
    }
    pub fn constant(dim: usize, v: C64) -> Self {
        let mut f = Form::zero(dim);
        if v.norm() != 0.0 {
            f.terms.insert(0, v);
        }
        f
    }
    /// dx_{i_1} ^ ... ^ dx_{i_k} for increasing indices.
    pub fn basis(dim: usize, idx: &[usize], v: C64) -> Self {
        let mut f = Form::constant(dim, c(1.0, 0.0));
        for &i in idx {
            let mut g = Form::zero(dim);
            g.terms.insert(1 << i, c(1.0, 0.0));
            f = f.wedge(&g);
        }
        f.scale(v)
    }
    pub fn constant_term(&self) -> C64 {
        self.terms.get(&0).cloned().unwrap_or(c(0.0, 0.0))
    }
    pub fn coeff(&self, mask: u32) -> C64 {
        self.terms.get(&mask).cloned().unwrap_or(c(0.0, 0.0))
    }
    pub fn add(&self, o: &Form) -> Form {
        let mut f = self.clone();
        for (m, v) in &o.terms {
            *f.terms.entry(*m).or_insert(c(0.0, 0.0)) += v;
        }
        f
    }
    pub fn scale(&self, s: C64) -> Form {
        Form { dim: self.dim, terms: self.terms.iter().map(|(m, v)| (*m, v * s)).collect() }
    }
    pub fn wedge(&self, o: &Form) -> Form {
        let mut f = Form::zero(self.dim);
        for (a, x) in &self.terms {
            for (b, y) in &o.terms {
                if let Some(s) = mask_sign(*a, *b) {
                    *f.terms.entry(a | b).or_insert(c(0.0, 0.0)) += x * y * s;
                }
            }
        }
        f
    }
    pub fn max_degree(&self) -> usize {
        self.terms.iter().filter(|(_, v)| v.norm() != 0.0).map(|(m, _)| m.count_ones() as usize).max().unwrap_or(0)
    }
    pub fn max_abs_diff(&self, o: &Form) -> f64 {
        self.add(&o.scale(c(-1.0, 0.0))).terms.values().map(|v| v.norm()).fold(0.0, f64::max)
    }
    /// Σ_k a_k x^k for a form x without constant term (nilpotent), truncated by degree.
    pub fn power_series(&self, coeffs: &[C64]) -> Form {
        let mut out = Form::constant(self.dim, coeffs.first().cloned().unwrap_or(c(0.0, 0.0)));
        let mut pow = Form::constant(self.dim, c(1.0, 0.0));
        for a in coeffs.iter().skip(1) {
            pow = pow.wedge(self);
            if pow.terms.values().all(|v| v.norm() == 0.0) {
                break;
            }
            out = out.add(&pow.scale(*a));
        }
        out
    }
    /// exp of an even form.
    pub fn exp(&self) -> Result<Form> {
        let c0 = self.constant_term();
        let nil = self.add(&Form::constant(self.dim, -c0));
        let coeffs = taylor(self.dim, |k| c(1.0 / factorial(k), 0.0));
        Ok(nil.power_series(&coeffs).scale(c0.exp()))
    }
    /// Inverse of a form with nonzero constant term.
    pub fn inverse(&self) -> Result<Form> {
        let c0 = self.constant_term();
        if c0.norm() < 1e-300 {
            return Err(Error::Precondition("form with vanishing constant term is not invertible".into()));
        }
        let nil = self.add(&Form::constant(self.dim, -c0)).scale(c0.inv());
        let coeffs = taylor(self.dim, |k| c(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0));
        Ok(nil.power_series(&coeffs).scale(c0.inv()))
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn taylor(dim: usize, a: impl Fn(usize) -> C64) -> Vec<C64> {
    (0..=dim).map(a).collect()
}

/// Square matrix with form entries.
pub type FormMatrix = Vec<Vec<Form>>;

pub fn form_matrix_zero(n: usize, dim: usize) -> FormMatrix {
    vec![vec![Form::zero(dim); n]; n]
}

fn fm_mul(a: &FormMatrix, b: &FormMatrix, dim: usize) -> FormMatrix {
    let n = a.len();
    let mut out = form_matrix_zero(n, dim);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out[i][j] = out[i][j].add(&a[i][k].wedge(&b[k][j]));
            }
        }
    }
    out
}

fn fm_trace(a: &FormMatrix, dim: usize) -> Form {
    a.iter().enumerate().fold(Form::zero(dim), |s, (i, row)| s.add(&row[i]))
}

/// Bernoulli numbers B_2, B_4, ..., B_16.
const BERNOULLI_EVEN: [(i64, i64); 8] = [(1, 6), (-1, 30), (1, 42), (-1, 30), (5, 66), (-691, 2730), (7, 6), (-3617, 510)];

/// Â = det^{1/2}((R/2) / sinh(R/2)) = exp(-½ Σ_k B_{2k} / (2k (2k)!) tr R^{2k}).
pub fn a_hat(r0: &FormMatrix, dim: usize) -> Result<Form> {
    let n = r0.len();
    if r0.iter().any(|row| row.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: r0.iter().map(|r| r.len()).find(|&l| l != n).unwrap_or(n) });
    }
    let mut log = Form::zero(dim);
    if n == 0 {
        return Ok(Form::constant(dim, c(1.0, 0.0)));
    }
    let r2 = fm_mul(r0, r0, dim);
    let mut pow = r2.clone();
    // Terms of form degree above `dim` vanish.
    for (k, (num, den)) in BERNOULLI_EVEN.iter().enumerate().map(|(i, b)| (i + 1, b)) {
        if 4 * k > dim {
            break;
        }
        let b = *num as f64 / *den as f64;
        let coef = -0.5 * b / (2.0 * k as f64 * factorial(2 * k));
        log = log.add(&fm_trace(&pow, dim).scale(c(coef, 0.0)));
        pow = fm_mul(&pow, &r2, dim);
    }
    log.exp()
}

/// ch(E/S, g) = tr_s(r exp(-F)) for an endomorphism-valued two-form F.
pub fn ch_relative(f: &FormMatrix, r: &CMat, grading: &[f64], dim: usize) -> Result<Form> {
    let n = r.nrows();
    if f.len() != n || grading.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: f.len() });
    }
    let mut out = Form::zero(dim);
    let mut pow: FormMatrix = (0..n).map(|i| (0..n).map(|j| Form::constant(dim, if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) })).collect()).collect();
    for k in 0..=dim / 2 {
        let coef = c(if k % 2 == 0 { 1.0 } else { -1.0 } / factorial(k), 0.0);
        // tr(Γ r F^k)
        for i in 0..n {
            for j in 0..n {
                let w = r[(i, j)] * grading[i];
                if w.norm() != 0.0 {
                    out = out.add(&pow[j][i].scale(w * coef));
                }
            }
        }
        pow = fm_mul(&pow, f, dim);
    }
    Ok(out)
}

/// det(1 - g_N) = Π 4 sin²(θ_k / 2).
pub fn normal_determinant(angles: &[f64]) -> f64 {
    angles.iter().map(|t| 4.0 * (t / 2.0).sin().powi(2)).product()
}

fn check_angles(angles: &[f64]) -> Result<()> {
    for t in angles {
        if (t / 2.0).sin().abs() < 1e-12 {
            return Err(Error::Precondition(format!("normal angle {t} is trivial; the fixed set is misclassified")));
        }
    }
    Ok(())
}

fn i_power(k: usize) -> C64 {
    match k % 4 {
        0 => c(1.0, 0.0),
        1 => c(0.0, 1.0),
        2 => c(-1.0, 0.0),
        _ => c(0.0, -1.0),
    }
}

/// i^{q/2} Π 2 sin(θ_k / 2) times the sign, with θ_k taken in (0, 2π).
pub fn ch_normal_spinor_degree0(angles: &[f64], sign: f64) -> Result<C64> {
    check_angles(angles)?;
    let p: f64 = angles.iter().map(|t| 2.0 * (t.rem_euclid(2.0 * PI) / 2.0).sin()).product();
    Ok(i_power(angles.len()) * p * sign)
}

/// ch(S_N, g) = i^{q/2} det^{1/2}(1 - g_N exp(-R¹)) for R¹ preserving the normal planes, with
/// curvature two-form r_k on plane k (g_N exp(-R¹) rotates plane k by θ_k - r_k):
/// i^{q/2} sign Π 2 sin((θ_k - r_k) / 2).
pub fn ch_normal_spinor(angles: &[f64], r1: &[Form], sign: f64, dim: usize) -> Result<Form> {
    check_angles(angles)?;
    if !r1.is_empty() && r1.len() != angles.len() {
        return Err(Error::DimensionMismatch { expected: angles.len(), got: r1.len() });
    }
    let mut out = Form::constant(dim, i_power(angles.len()) * sign);
    for (k, t) in angles.iter().enumerate() {
        let a = t.rem_euclid(2.0 * PI) / 2.0;
        let factor = match r1.get(k) {
            None => Form::constant(dim, c(2.0 * a.sin(), 0.0)),
            Some(r) => {
                // 2 sin(a - u) with u = r/2: Σ_j 2 sin(a + jπ/2) (-u)^j / j!
                let u = r.scale(c(-0.5, 0.0));
                let coeffs = taylor(dim, |j| c(2.0 * (a + j as f64 * PI / 2.0).sin() / factorial(j), 0.0));
                u.power_series(&coeffs)
            }
        };
        out = out.wedge(&factor);
    }
    Ok(out)
}

/// A connected piece of a fixed set.
#[derive(Clone, Debug, PartialEq)]
pub enum Locus {
    FinitePoint(u32),
    /// Point of a torus in units of π/2.
    TorusPoint(Vec<i64>),
    /// The whole base (the element acts trivially).
    Whole,
}

/// Data of one fixed component M_g of an element g.
#[derive(Clone, Debug)]
pub struct FixedPointDatum {
    pub label: String,
    pub element: usize,
    pub locus: Locus,
    /// Dimension d of M_g.
    pub dim: usize,
    /// Codimension q of M_g.
    pub codim: usize,
    /// Rotation angles of g on the normal planes.
    pub angles: Vec<f64>,
    /// Graded character r^{E/S}(g) (used when no relative curvature is given).
    pub relative_character: C64,
    pub r0: FormMatrix,
    pub r1: Vec<Form>,
    /// Relative curvature F^{E/S} with r^{E/S}(g) and the grading of E/S.
    pub relative_bundle: Option<(FormMatrix, CMat, Vec<f64>)>,
    pub orientation: f64,
    pub spin_lift: f64,
}

impl FixedPointDatum {
    /// Flat fixed component: all curvatures vanish.
    #[allow(clippy::too_many_arguments)]
    pub fn flat(
        label: &str,
        element: usize,
        locus: Locus,
        dim: usize,
        angles: Vec<f64>,
        relative_character: C64,
        orientation: f64,
        spin_lift: f64,
    ) -> Result<Self> {
        let d = FixedPointDatum {
            label: label.to_string(),
            element,
            locus,
            dim,
            codim: 2 * angles.len(),
            angles,
            relative_character,
            r0: Vec::new(),
            r1: Vec::new(),
            relative_bundle: None,
            orientation,
            spin_lift,
        };
        d.validate(None)?;
        Ok(d)
    }

    pub fn validate(&self, total_dim: Option<usize>) -> Result<()> {
        if !self.codim.is_multiple_of(2) || self.codim != 2 * self.angles.len() {
            return Err(Error::Precondition(format!("{}: codimension {} is not twice the number of angles", self.label, self.codim)));
        }
        check_angles(&self.angles)?;
        if let Some(n) = total_dim {
            if self.dim + self.codim != n {
                return Err(Error::Precondition(format!("{}: d + q = {} differs from dim M = {n}", self.label, self.dim + self.codim)));
            }
        }
        Ok(())
    }

    /// Â(M_g) ch(E/S, g) / ch(S_N, g) as a form on M_g.
    pub fn characteristic_form(&self) -> Result<Form> {
        let d = self.dim;
        let ahat = a_hat(&self.r0, d)?;
        let rel = match &self.relative_bundle {
            Some((f, r, gr)) => ch_relative(f, r, gr, d)?,
            None => Form::constant(d, self.relative_character),
        };
        let normal = ch_normal_spinor(&self.angles, &self.r1, self.orientation * self.spin_lift, d)?;
        Ok(ahat.wedge(&rel).wedge(&normal.inverse()?))
    }
}

/// Base spaces whose fixed sets and integrals the formula needs.
pub trait LocalizationBase: ManifoldModel {
    fn fixed_loci(&self, g: usize) -> Result<Vec<Locus>>;
    /// ∫ over the locus of `char ^ form|_locus`.
    fn integrate_locus(&self, locus: &Locus, form: &[(Self::Mono, QI)], char: &Form) -> Result<C64>;
}

impl LocalizationBase for FiniteModel {
    fn fixed_loci(&self, g: usize) -> Result<Vec<Locus>> {
        Ok(self.gset.fixed_points(g).into_iter().map(|x| Locus::FinitePoint(x as u32)).collect())
    }
    fn integrate_locus(&self, locus: &Locus, form: &[(u32, QI)], char: &Form) -> Result<C64> {
        let Locus::FinitePoint(x) = locus else {
            return Err(Error::Precondition("finite model has only point loci".into()));
        };
        let v: C64 = form.iter().filter(|(m, _)| m == x).map(|(_, s)| s.to_c64()).sum();
        Ok(v * char.constant_term())
    }
}

/// ∫_{T^d} of the top part of char ^ form for trigonometric forms: (2π)^d times the
/// constant-frequency coefficient.
fn integrate_torus_top(d: usize, form: &[(TorusMono, QI)], char: &Form) -> C64 {
    let top = (1u32 << d) - 1;
    let mut s = c(0.0, 0.0);
    for (m, v) in form {
        if m.k.iter().any(|&k| k != 0) {
            continue;
        }
        let fm = m.mask as u32;
        for (cm, cv) in &char.terms {
            if cm | fm == top {
                if let Some(sign) = mask_sign(*cm, fm) {
                    s += cv * v.to_c64() * sign;
                }
            }
        }
    }
    s * (2.0 * PI).powi(d as i32)
}

impl LocalizationBase for TorusModel {
    fn fixed_loci(&self, g: usize) -> Result<Vec<Locus>> {
        Ok(match self.fixed_set(g)? {
            FixedSet::Whole => vec![Locus::Whole],
            FixedSet::Points(pts) => pts.into_iter().map(Locus::TorusPoint).collect(),
        })
    }
    fn integrate_locus(&self, locus: &Locus, form: &[(TorusMono, QI)], char: &Form) -> Result<C64> {
        match locus {
            Locus::TorusPoint(pt) => Ok(self.evaluate_at(form, pt)?.to_c64() * char.constant_term()),
            Locus::Whole => Ok(integrate_torus_top(self.d, form, char)),
            Locus::FinitePoint(_) => Err(Error::Precondition("torus has no finite-point loci".into())),
        }
    }
}

/// The circle R / 2πZ with Z/order acting by rotation through 2π step g / order. Functions are
/// trigonometric polynomials; pullbacks stay Gaussian rational for quarter-turn multiples.
#[derive(Clone, Debug)]
pub struct CircleRotation {
    pub group: GroupSpec,
    pub order: usize,
    pub step: i64,
    pub haar: Haar,
}

impl CircleRotation {
    pub fn new(order: usize, step: i64, haar: Haar) -> Self {
        CircleRotation { group: GroupSpec::cyclic(order), order, step, haar }
    }
    fn quarter_turns(&self, g: usize, k: i64) -> Result<i64> {
        // k * 2π step g / order = (π/2) * (4 k step g / order)
        let num = 4 * k * self.step * g as i64;
        if num.rem_euclid(self.order as i64) != 0 {
            return Err(Error::Unrepresentable(format!("rotation phase of frequency {k} under element {g} is not a quarter turn")));
        }
        Ok((num / self.order as i64).rem_euclid(4))
    }
}

impl ManifoldModel for CircleRotation {
    type Mono = TorusMono;
    fn group(&self) -> &GroupSpec {
        &self.group
    }
    fn haar(&self) -> Haar {
        self.haar
    }
    fn dimension(&self) -> usize {
        1
    }
    fn degree(&self, m: &TorusMono) -> usize {
        m.mask.count_ones() as usize
    }
    fn wedge(&self, a: &TorusMono, b: &TorusMono) -> Option<(TorusMono, QI)> {
        if a.mask & b.mask != 0 {
            return None;
        }
        Some((TorusMono { k: SmallVec::from_elem(a.k[0] + b.k[0], 1), mask: a.mask | b.mask }, QI::one()))
    }
    fn pullback(&self, g: usize, m: &TorusMono) -> Result<Vec<(TorusMono, QI)>> {
        let phase = match self.quarter_turns(g, m.k[0] as i64)? {
            0 => QI::one(),
            1 => QI::i(),
            2 => -QI::one(),
            _ => -QI::i(),
        };
        Ok(vec![(m.clone(), phase)])
    }
    fn delta(&self, m: &TorusMono) -> Vec<(TorusMono, QI)> {
        if m.k[0] == 0 || m.mask != 0 {
            return Vec::new();
        }
        vec![(TorusMono { k: m.k.clone(), mask: 1 }, QI::new(Q::from(0), Q::from(m.k[0] as i64)))]
    }
    fn one(&self) -> Vec<(TorusMono, QI)> {
        vec![(TorusMono { k: SmallVec::from_elem(0, 1), mask: 0 }, QI::one())]
    }
    fn describe(&self, m: &TorusMono) -> String {
        format!("e^(i{}x){}", m.k[0], if m.mask != 0 { " dx" } else { "" })
    }
}

impl LocalizationBase for CircleRotation {
    fn fixed_loci(&self, g: usize) -> Result<Vec<Locus>> {
        if (self.step * g as i64).rem_euclid(self.order as i64) == 0 {
            Ok(vec![Locus::Whole])
        } else {
            Ok(Vec::new())
        }
    }
    fn integrate_locus(&self, locus: &Locus, form: &[(TorusMono, QI)], char: &Form) -> Result<C64> {
        match locus {
            Locus::Whole => Ok(integrate_torus_top(1, form, char)),
            _ => Err(Error::Precondition("a rotation of the circle fixes nothing or everything".into())),
        }
    }
}

/// (2πi)^{d/2}; odd d takes the square root with the given branch sign.
pub fn two_pi_i_half_power(d: usize, odd_branch: f64) -> C64 {
    let base = c(0.0, 2.0 * PI);
    if d.is_multiple_of(2) {
        base.powi((d / 2) as i32)
    } else {
        base.sqrt().powi(d as i32) * odd_branch
    }
}

/// Σ_{M_g} (-1)^{q/2} / (2πi)^{d/2} ∫_{M_g} Â ch(E/S, g) / ch(S_N, g) ch_n(e)(ĝ), g = concatenation of ĝ.
pub fn localized_limit<M: LocalizationBase>(base: &M, data: &[FixedPointDatum], ch: &MixedForm<M>, tuple: &Word<u32>) -> Result<C64> {
    localized_limit_with_branch(base, data, ch, tuple, 1.0)
}

pub fn localized_limit_with_branch<M: LocalizationBase>(
    base: &M,
    data: &[FixedPointDatum],
    ch: &MixedForm<M>,
    tuple: &Word<u32>,
    odd_branch: f64,
) -> Result<C64> {
    let g = word_concat(base.group(), tuple);
    let loci = base.fixed_loci(g)?;
    let mine: Vec<&FixedPointDatum> = data.iter().filter(|d| d.element == g).collect();
    for l in &loci {
        if !mine.iter().any(|d| &d.locus == l) {
            return Err(Error::Precondition(format!("missing fixed-point data for element {g} at {l:?}")));
        }
    }
    let form = ch.at(tuple);
    let mut total = c(0.0, 0.0);
    for d in mine {
        if !loci.contains(&d.locus) {
            return Err(Error::Precondition(format!("{}: {:?} is not fixed by element {g}", d.label, d.locus)));
        }
        d.validate(Some(base.dimension()))?;
        let sign = if (d.codim / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let integral = base.integrate_locus(&d.locus, &form, &d.characteristic_form()?)?;
        total += integral * sign / two_pi_i_half_power(d.dim, odd_branch);
    }
    Ok(total)
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct ReportEntry {
    pub tuple: Vec<u32>,
    pub degree: usize,
    pub spectral: Vec<(f64, f64)>,
    pub fixed_point: (f64, f64),
    /// max over the grid minus min over the grid, in modulus.
    pub drift: f64,
    pub gap_min_t: f64,
    /// Gap after Richardson extrapolation in t² from the two smallest times.
    pub gap_extrapolated: f64,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct LocalizationReport {
    pub scenario: String,
    pub times: Vec<f64>,
    pub entries: Vec<ReportEntry>,
    pub tolerance: f64,
    pub pass: bool,
}

fn tuple_of(w: &Word<u32>) -> Vec<u32> {
    w.head.iter().chain(w.tail.iter()).cloned().collect()
}

/// Tabulates ch_n(tD)(ĝ) over the t-grid against the localized limit.
#[allow(clippy::too_many_arguments)]
pub fn compare_sides<M: LocalizationBase>(
    scenario: &str,
    jlo: &Jlo,
    lift: &FormChain<u32, Q>,
    n_max: usize,
    base: &M,
    data: &[FixedPointDatum],
    ch: &MixedForm<M>,
    tuples: &[Word<u32>],
    times: &[f64],
    tol: f64,
) -> Result<LocalizationReport> {
    if times.is_empty() {
        return Err(Error::Precondition("empty t-grid".into()));
    }
    let mut cycles = Vec::new();
    for &t in times {
        cycles.push(jlo.chern_cycle(t, lift, n_max)?);
    }
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&i, &j| times[i].partial_cmp(&times[j]).unwrap());
    let mut entries = Vec::new();
    for w in tuples {
        let fp = localized_limit(base, data, ch, w)?;
        let vals: Vec<C64> = cycles
            .iter()
            .map(|x| match jlo.model.parity {
                Parity::Even => x.even.coeff(w),
                Parity::Odd => x.odd.coeff(w),
            })
            .collect();
        let drift = vals.iter().flat_map(|a| vals.iter().map(move |b| (a - b).norm())).fold(0.0, f64::max);
        let v1 = vals[order[0]];
        let gap_min_t = (v1 - fp).norm();
        let gap_extrapolated = if order.len() > 1 {
            let (t1, t2) = (times[order[0]], times[order[1]]);
            let v2 = vals[order[1]];
            let v0 = (v1 * (t2 * t2) - v2 * (t1 * t1)) / (t2 * t2 - t1 * t1);
            (v0 - fp).norm()
        } else {
            gap_min_t
        };
        entries.push(ReportEntry {
            tuple: tuple_of(w),
            degree: w.degree(),
            spectral: vals.iter().map(|z| (z.re, z.im)).collect(),
            fixed_point: (fp.re, fp.im),
            drift,
            gap_min_t,
            gap_extrapolated,
        });
    }
    let pass = entries.iter().all(|e| e.gap_min_t <= tol);
    Ok(LocalizationReport { scenario: scenario.to_string(), times: times.to_vec(), entries, tolerance: tol, pass })
}

impl LocalizationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
