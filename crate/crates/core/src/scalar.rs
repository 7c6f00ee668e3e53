//! Scalar fields used throughout: exact rationals, exact Gaussian rationals
//! and complex doubles.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use malachite_base::num::basic::traits::{One, Zero};
use malachite_base::num::conversion::traits::RoundingFrom;
use malachite_base::rounding_modes::RoundingMode;
pub use malachite_q::Rational as Q;
pub use num_complex::Complex64 as C64;

/// Field operations required by the chain machinery.
pub trait Scalar:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    /// True when arithmetic is exact.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_i64(n: i64) -> Self;
    fn from_q(q: &Q) -> Self;
    fn inv(&self) -> Option<Self>;
    fn to_c64(&self) -> C64;
    /// Size used by tolerance checks; zero for exact zero.
    fn magnitude(&self) -> f64 {
        self.to_c64().norm()
    }
    fn from_frac(n: i64, d: i64) -> Self {
        Self::from_q(&Q::from_signeds(n, d))
    }
}

pub fn q_to_f64(q: &Q) -> f64 {
    f64::rounding_from(q, RoundingMode::Nearest).0
}

impl Scalar for Q {
    const EXACT: bool = true;
    fn zero() -> Self {
        Q::ZERO
    }
    fn one() -> Self {
        Q::ONE
    }
    fn is_zero(&self) -> bool {
        *self == Q::ZERO
    }
    fn from_i64(n: i64) -> Self {
        Q::from(n)
    }
    fn from_q(q: &Q) -> Self {
        q.clone()
    }
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(Q::ONE / self.clone())
        }
    }
    fn to_c64(&self) -> C64 {
        C64::new(q_to_f64(self), 0.0)
    }
    fn magnitude(&self) -> f64 {
        q_to_f64(self).abs()
    }
}

impl Scalar for C64 {
    const EXACT: bool = false;
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn from_i64(n: i64) -> Self {
        C64::new(n as f64, 0.0)
    }
    fn from_q(q: &Q) -> Self {
        C64::new(q_to_f64(q), 0.0)
    }
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(C64::new(1.0, 0.0) / *self)
        }
    }
    fn to_c64(&self) -> C64 {
        *self
    }
}

/// Exact element of Q(i).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct QI {
    pub re: Q,
    pub im: Q,
}

impl QI {
    pub fn new(re: Q, im: Q) -> Self {
        QI { re, im }
    }
    pub fn i() -> Self {
        QI::new(Q::ZERO, Q::ONE)
    }
    pub fn conj(&self) -> Self {
        QI::new(self.re.clone(), -self.im.clone())
    }
}

impl fmt::Display for QI {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im == Q::ZERO {
            write!(f, "{}", self.re)
        } else if self.re == Q::ZERO {
            write!(f, "{}i", self.im)
        } else {
            write!(f, "({}+{}i)", self.re, self.im)
        }
    }
}

impl Add for QI {
    type Output = QI;
    fn add(self, o: QI) -> QI {
        QI::new(self.re + o.re, self.im + o.im)
    }
}
impl Sub for QI {
    type Output = QI;
    fn sub(self, o: QI) -> QI {
        QI::new(self.re - o.re, self.im - o.im)
    }
}
impl Mul for QI {
    type Output = QI;
    fn mul(self, o: QI) -> QI {
        let re = &self.re * &o.re - &self.im * &o.im;
        let im = &self.re * &o.im + &self.im * &o.re;
        QI::new(re, im)
    }
}
impl Neg for QI {
    type Output = QI;
    fn neg(self) -> QI {
        QI::new(-self.re, -self.im)
    }
}
impl AddAssign for QI {
    fn add_assign(&mut self, o: QI) {
        self.re += o.re;
        self.im += o.im;
    }
}
impl SubAssign for QI {
    fn sub_assign(&mut self, o: QI) {
        self.re -= o.re;
        self.im -= o.im;
    }
}
impl MulAssign for QI {
    fn mul_assign(&mut self, o: QI) {
        *self = self.clone() * o;
    }
}

impl Scalar for QI {
    const EXACT: bool = true;
    fn zero() -> Self {
        QI::new(Q::ZERO, Q::ZERO)
    }
    fn one() -> Self {
        QI::new(Q::ONE, Q::ZERO)
    }
    fn is_zero(&self) -> bool {
        self.re == Q::ZERO && self.im == Q::ZERO
    }
    fn from_i64(n: i64) -> Self {
        QI::new(Q::from(n), Q::ZERO)
    }
    fn from_q(q: &Q) -> Self {
        QI::new(q.clone(), Q::ZERO)
    }
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = &self.re * &self.re + &self.im * &self.im;
        Some(QI::new(&self.re / &n, -(&self.im / &n)))
    }
    fn to_c64(&self) -> C64 {
        C64::new(q_to_f64(&self.re), q_to_f64(&self.im))
    }
}

/// Exact binomial-style factorial as a rational.
pub fn factorial_q(n: u64) -> Q {
    let mut acc = Q::ONE;
    for k in 2..=n {
        acc *= Q::from(k);
    }
    acc
}
