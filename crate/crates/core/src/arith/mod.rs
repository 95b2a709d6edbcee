//! Exact arithmetic in the real cyclotomic fields Q(2cos(pi/L)).

mod expr;
mod field;
pub mod interval;

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use expr::{parse_expr, parse_expr_list, ExprError};
pub use field::{cyclotomic, field_degree, minimal_polynomial};
use interval::Interval;

/// Default bound on the degree of any field an operation may lift into.
pub const DEFAULT_DEGREE_CAP: usize = 64;

static DEGREE_CAP: AtomicUsize = AtomicUsize::new(DEFAULT_DEGREE_CAP);

pub fn degree_cap() -> usize {
    DEGREE_CAP.load(AtomicOrdering::Relaxed)
}

/// Sets the process-wide degree cap. Values below 1 are clamped to 1.
pub fn set_degree_cap(cap: usize) {
    DEGREE_CAP.store(cap.max(1), AtomicOrdering::Relaxed);
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ArithError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("field level {lcm} has degree {degree}, above the cap {cap}")]
    DegreeCapExceeded { lcm: u64, degree: usize, cap: usize },
    #[error("invalid coefficient data: {0}")]
    Invalid(String),
}

/// An exact element of Q(theta_L), theta_L = 2cos(pi/L), stored at the
/// smallest level whose field contains it.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AlgebraicReal {
    level: u32,
    coeffs: Vec<BigRational>,
}

fn check_level(level: u64) -> Result<u32, ArithError> {
    let cap = degree_cap();
    let too_big = ArithError::DegreeCapExceeded {
        lcm: level,
        degree: usize::MAX,
        cap,
    };
    let l32: u32 = level.try_into().map_err(|_| too_big.clone())?;
    let degree = field_degree(l32);
    if degree > cap {
        return Err(ArithError::DegreeCapExceeded {
            lcm: level,
            degree,
            cap,
        });
    }
    Ok(l32)
}

impl AlgebraicReal {
    pub fn zero() -> Self {
        Self::from_rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Self::from_rational(BigRational::one())
    }

    pub fn from_rational(q: BigRational) -> Self {
        AlgebraicReal {
            level: 1,
            coeffs: vec![q],
        }
    }

    pub fn from_integer(n: BigInt) -> Self {
        Self::from_rational(BigRational::from_integer(n))
    }

    pub fn from_i64(n: i64) -> Self {
        Self::from_integer(BigInt::from(n))
    }

    /// Panics when `d` is zero.
    pub fn from_ratio(n: i64, d: i64) -> Self {
        Self::from_rational(BigRational::new(n.into(), d.into()))
    }

    /// 2cos(pi/m) for m >= 2.
    pub fn try_two_cos(m: u32) -> Result<Self, ArithError> {
        match m {
            0 | 1 => Err(ArithError::Invalid(format!("two_cos needs m >= 2, got {m}"))),
            2 => Ok(Self::zero()),
            3 => Ok(Self::one()),
            _ => {
                let level = check_level(m as u64)?;
                Self::from_coeffs(level, vec![BigRational::zero(), BigRational::one()])
            }
        }
    }

    /// Panics above the degree cap.
    pub fn two_cos(m: u32) -> Self {
        Self::try_two_cos(m).expect("two_cos")
    }

    /// Builds sum c_k theta_L^k, reducing and normalizing.
    pub fn from_coeffs(level: u32, coeffs: Vec<BigRational>) -> Result<Self, ArithError> {
        if level == 0 {
            return Err(ArithError::Invalid("level must be positive".into()));
        }
        let level = check_level(level as u64)?;
        let f = field::field(level);
        let reduced = f.reduce(coeffs);
        if level <= 3 {
            // theta is rational here: fold everything into the constant.
            return Ok(Self::from_rational(reduced.into_iter().next().unwrap()));
        }
        Ok(Self::canonical(level, reduced))
    }

    fn canonical(level: u32, coeffs: Vec<BigRational>) -> Self {
        if level == 1 {
            return AlgebraicReal { level, coeffs };
        }
        if coeffs[1..].iter().all(Zero::is_zero) {
            return Self::from_rational(coeffs.into_iter().next().unwrap());
        }
        for p in field::prime_factors(level as u64) {
            let d = level / p as u32;
            if d <= 3 {
                continue;
            }
            if let Some(u) = field::embedding(d, level).descend(&coeffs) {
                return Self::canonical(d, u);
            }
        }
        AlgebraicReal { level, coeffs }
    }

    /// The minimal level L such that the value lies in Q(2cos(pi/L)).
    pub fn level(&self) -> u32 {
        self.level
    }

    /// Coefficients over powers of theta at [`level`](Self::level).
    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.level == 1 && self.coeffs[0].is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.level == 1
    }

    pub fn to_rational(&self) -> Option<&BigRational> {
        if self.level == 1 {
            Some(&self.coeffs[0])
        } else {
            None
        }
    }

    pub fn is_integer(&self) -> bool {
        self.to_rational().is_some_and(|q| q.is_integer())
    }

    /// Coefficients written at a multiple of the current level.
    fn lifted(&self, level: u32) -> Vec<BigRational> {
        if self.level == level {
            return self.coeffs.clone();
        }
        let deg = field_degree(level);
        if self.level == 1 {
            let mut v = vec![BigRational::zero(); deg];
            v[0] = self.coeffs[0].clone();
            return v;
        }
        field::embedding(self.level, level).lift(&self.coeffs)
    }

    fn common_level(&self, other: &Self) -> Result<u32, ArithError> {
        if self.level == other.level {
            Ok(self.level)
        } else {
            check_level(field::lcm(self.level, other.level))
        }
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(&BigRational, &BigRational) -> BigRational,
    ) -> Result<Self, ArithError> {
        if self.level == 1 && other.level == 1 {
            return Ok(Self::from_rational(f(&self.coeffs[0], &other.coeffs[0])));
        }
        if other.level == 1 {
            let mut c = self.coeffs.clone();
            c[0] = f(&c[0], &other.coeffs[0]);
            for ck in c.iter_mut().skip(1) {
                *ck = f(ck, &BigRational::zero());
            }
            return Ok(AlgebraicReal { level: self.level, coeffs: c });
        }
        if self.level == 1 {
            let mut c: Vec<BigRational> = other
                .coeffs
                .iter()
                .map(|x| f(&BigRational::zero(), x))
                .collect();
            c[0] = f(&self.coeffs[0], &other.coeffs[0]);
            return Ok(AlgebraicReal { level: other.level, coeffs: c });
        }
        let level = self.common_level(other)?;
        let a = self.lifted(level);
        let b = other.lifted(level);
        let c = a.iter().zip(b.iter()).map(|(x, y)| f(x, y)).collect();
        Ok(Self::canonical(level, c))
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, ArithError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, ArithError> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, ArithError> {
        if self.level == 1 || other.level == 1 {
            let (q, x) = if self.level == 1 { (self, other) } else { (other, self) };
            let q = &q.coeffs[0];
            if q.is_zero() {
                return Ok(Self::zero());
            }
            return Ok(AlgebraicReal {
                level: x.level,
                coeffs: x.coeffs.iter().map(|c| c * q).collect(),
            });
        }
        let level = self.common_level(other)?;
        let f = field::field(level);
        let c = f.mul(&self.lifted(level), &other.lifted(level));
        Ok(Self::canonical(level, c))
    }

    pub fn try_inverse(&self) -> Result<Self, ArithError> {
        if self.is_zero() {
            return Err(ArithError::DivisionByZero);
        }
        if self.level == 1 {
            return Ok(Self::from_rational(self.coeffs[0].recip()));
        }
        let f = field::field(self.level);
        let d = f.deg;
        // Column k of the multiplication matrix is self * theta^k.
        let mut cols = Vec::with_capacity(d);
        let mut basis = vec![BigRational::zero(); d];
        basis[0] = BigRational::one();
        let theta = f.reduce(vec![BigRational::zero(), BigRational::one()]);
        let mut cur = self.coeffs.clone();
        for _ in 0..d {
            cols.push(cur.clone());
            cur = f.mul(&cur, &theta);
        }
        // Solve A x = e_0 with A[r][k] = cols[k][r].
        let mut a: Vec<Vec<BigRational>> = (0..d)
            .map(|r| (0..d).map(|k| cols[k][r].clone()).chain([basis[r].clone()]).collect())
            .collect();
        for col in 0..d {
            let p = (col..d)
                .find(|&r| !a[r][col].is_zero())
                .expect("nonzero field element is invertible");
            a.swap(col, p);
            let piv = a[col][col].clone();
            for v in a[col].iter_mut() {
                *v /= &piv;
            }
            for r in 0..d {
                if r != col && !a[r][col].is_zero() {
                    let factor = a[r][col].clone();
                    for k in col..=d {
                        let t = &factor * &a[col][k];
                        a[r][k] -= t;
                    }
                }
            }
        }
        let x = a.into_iter().map(|row| row[d].clone()).collect();
        Ok(Self::canonical(self.level, x))
    }

    pub fn try_div(&self, other: &Self) -> Result<Self, ArithError> {
        if other.is_zero() {
            return Err(ArithError::DivisionByZero);
        }
        if other.level == 1 {
            let q = other.coeffs[0].recip();
            return Ok(AlgebraicReal {
                level: self.level,
                coeffs: self.coeffs.iter().map(|c| c * &q).collect(),
            });
        }
        self.try_mul(&other.try_inverse()?)
    }

    /// Integer power, negative exponents invert.
    pub fn try_pow(&self, k: i32) -> Result<Self, ArithError> {
        let base = if k < 0 { self.try_inverse()? } else { self.clone() };
        let mut acc = Self::one();
        for _ in 0..k.unsigned_abs() {
            acc = acc.try_mul(&base)?;
        }
        Ok(acc)
    }

    /// A certified enclosure of the real value at the given precision.
    pub fn enclosure(&self, prec: u32) -> Interval {
        let theta = interval::theta_enclosure(self.level, prec);
        interval::eval_poly(&self.coeffs, &theta)
    }

    /// Sign of the real embedding: zero is structural, otherwise interval
    /// evaluation at doubling precision.
    pub fn sign(&self) -> i8 {
        if self.level == 1 {
            return match self.coeffs[0].numer().sign() {
                num_bigint::Sign::Minus => -1,
                num_bigint::Sign::NoSign => 0,
                num_bigint::Sign::Plus => 1,
            };
        }
        let mut prec = 64;
        loop {
            if let Some(s) = self.enclosure(prec).excludes_zero() {
                return s;
            }
            prec *= 2;
        }
    }

    pub fn is_positive(&self) -> bool {
        self.sign() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.sign() < 0
    }

    pub fn try_cmp(&self, other: &Self) -> Result<Ordering, ArithError> {
        if self.level == 1 && other.level == 1 {
            return Ok(self.coeffs[0].cmp(&other.coeffs[0]));
        }
        Ok(self.try_sub(other)?.sign().cmp(&0))
    }

    pub fn abs(&self) -> Self {
        if self.sign() < 0 {
            -self
        } else {
            self.clone()
        }
    }

    /// Nearest double to the real value.
    pub fn to_f64(&self) -> f64 {
        if let Some(q) = self.to_rational() {
            return q.to_f64().unwrap_or(f64::NAN);
        }
        let mut prec = 64;
        loop {
            let iv = self.enclosure(prec);
            let lo = iv.lo_rational();
            let hi = iv.hi_rational();
            let width = &hi - &lo;
            let mid = (lo + hi) / BigRational::from_integer(2.into());
            let small = width.is_zero()
                || width * (BigInt::one() << 60u32) <= mid.abs() && !mid.is_zero();
            if small || prec >= 4096 {
                return mid.to_f64().unwrap_or(f64::NAN);
            }
            prec *= 2;
        }
    }

    /// Decimal approximation rounded to 15 significant digits.
    pub fn approx(&self) -> f64 {
        let v = self.to_f64();
        if !v.is_finite() || v == 0.0 {
            return v;
        }
        format!("{:.14e}", v).parse().unwrap_or(v)
    }
}

impl Default for AlgebraicReal {
    fn default() -> Self {
        Self::zero()
    }
}

impl PartialOrd for AlgebraicReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Panics if comparing requires a field above the degree cap.
impl Ord for AlgebraicReal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.try_cmp(other).expect("comparison above degree cap")
    }
}

impl From<i64> for AlgebraicReal {
    fn from(n: i64) -> Self {
        Self::from_i64(n)
    }
}

impl From<BigRational> for AlgebraicReal {
    fn from(q: BigRational) -> Self {
        Self::from_rational(q)
    }
}

fn fmt_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for AlgebraicReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.level == 1 {
            return f.write_str(&fmt_rational(&self.coeffs[0]));
        }
        let theta = format!("c({})", self.level);
        let mut out = String::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let powers = vec![theta.as_str(); k].join("*");
            let term = if k == 0 {
                fmt_rational(c)
            } else if c.is_one() {
                powers
            } else if (-c).is_one() {
                format!("-{powers}")
            } else {
                format!("{}*{powers}", fmt_rational(c))
            };
            if !out.is_empty() && !term.starts_with('-') {
                out.push('+');
            }
            out.push_str(&term);
        }
        f.write_str(&out)
    }
}

impl fmt::Debug for AlgebraicReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Serialize, Deserialize)]
struct Wire {
    level: u32,
    coeffs: Vec<String>,
    #[serde(default, skip_deserializing)]
    approx: f64,
}

impl Serialize for AlgebraicReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        Wire {
            level: self.level,
            coeffs: self.coeffs.iter().map(|c| format!("{}/{}", c.numer(), c.denom())).collect(),
            approx: self.approx(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AlgebraicReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let w = Wire::deserialize(d)?;
        let coeffs = w
            .coeffs
            .iter()
            .map(|s| s.parse::<BigRational>().map_err(D::Error::custom))
            .collect::<Result<Vec<_>, _>>()?;
        AlgebraicReal::from_coeffs(w.level, coeffs).map_err(D::Error::custom)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $try:ident) => {
        impl $tr<&AlgebraicReal> for &AlgebraicReal {
            type Output = AlgebraicReal;
            fn $method(self, rhs: &AlgebraicReal) -> AlgebraicReal {
                self.$try(rhs).expect(stringify!($method))
            }
        }
        impl $tr<AlgebraicReal> for AlgebraicReal {
            type Output = AlgebraicReal;
            fn $method(self, rhs: AlgebraicReal) -> AlgebraicReal {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&AlgebraicReal> for AlgebraicReal {
            type Output = AlgebraicReal;
            fn $method(self, rhs: &AlgebraicReal) -> AlgebraicReal {
                (&self).$method(rhs)
            }
        }
        impl $tr<AlgebraicReal> for &AlgebraicReal {
            type Output = AlgebraicReal;
            fn $method(self, rhs: AlgebraicReal) -> AlgebraicReal {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);
binop!(Div, div, try_div);

impl Neg for &AlgebraicReal {
    type Output = AlgebraicReal;
    fn neg(self) -> AlgebraicReal {
        AlgebraicReal {
            level: self.level,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Neg for AlgebraicReal {
    type Output = AlgebraicReal;
    fn neg(self) -> AlgebraicReal {
        -&self
    }
}
