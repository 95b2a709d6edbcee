//! Dyadic fixed-point intervals with outward rounding, and certified
//! enclosures of pi and 2cos(pi/L).

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// The closed interval [lo, hi] * 2^-prec.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: BigInt,
    pub hi: BigInt,
    pub prec: u32,
}

fn floor_shift(x: &BigInt, bits: u32) -> BigInt {
    x.div_floor(&(BigInt::one() << bits))
}

fn ceil_shift(x: &BigInt, bits: u32) -> BigInt {
    -((-x).div_floor(&(BigInt::one() << bits)))
}

impl Interval {
    pub fn point(v: BigInt, prec: u32) -> Interval {
        Interval {
            lo: v.clone(),
            hi: v,
            prec,
        }
    }

    pub fn from_rational(q: &BigRational, prec: u32) -> Interval {
        let scaled = q.numer() << prec;
        let lo = scaled.div_floor(q.denom());
        let hi = -((-&scaled).div_floor(q.denom()));
        Interval { lo, hi, prec }
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval {
            lo: &self.lo + &o.lo,
            hi: &self.hi + &o.hi,
            prec: self.prec,
        }
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        Interval {
            lo: &self.lo - &o.hi,
            hi: &self.hi - &o.lo,
            prec: self.prec,
        }
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let c = [
            &self.lo * &o.lo,
            &self.lo * &o.hi,
            &self.hi * &o.lo,
            &self.hi * &o.hi,
        ];
        let min = c.iter().min().unwrap();
        let max = c.iter().max().unwrap();
        Interval {
            lo: floor_shift(min, self.prec),
            hi: ceil_shift(max, self.prec),
            prec: self.prec,
        }
    }

    pub fn scale_int(&self, k: i64) -> Interval {
        let k = BigInt::from(k);
        let (a, b) = (&self.lo * &k, &self.hi * &k);
        if k.is_negative() {
            Interval { lo: b, hi: a, prec: self.prec }
        } else {
            Interval { lo: a, hi: b, prec: self.prec }
        }
    }

    /// Division by a positive integer.
    pub fn div_int(&self, k: &BigInt) -> Interval {
        debug_assert!(k.is_positive());
        Interval {
            lo: self.lo.div_floor(k),
            hi: -((-&self.hi).div_floor(k)),
            prec: self.prec,
        }
    }

    pub fn widen(&self, ulps: &BigInt) -> Interval {
        Interval {
            lo: &self.lo - ulps,
            hi: &self.hi + ulps,
            prec: self.prec,
        }
    }

    /// Drops to a coarser precision, rounding outward.
    pub fn coarsen(&self, prec: u32) -> Interval {
        assert!(prec <= self.prec);
        let d = self.prec - prec;
        Interval {
            lo: floor_shift(&self.lo, d),
            hi: ceil_shift(&self.hi, d),
            prec,
        }
    }

    pub fn lo_rational(&self) -> BigRational {
        BigRational::new(self.lo.clone(), BigInt::one() << self.prec)
    }

    pub fn hi_rational(&self) -> BigRational {
        BigRational::new(self.hi.clone(), BigInt::one() << self.prec)
    }

    pub fn excludes_zero(&self) -> Option<i8> {
        if self.lo.is_positive() {
            Some(1)
        } else if self.hi.is_negative() {
            Some(-1)
        } else {
            None
        }
    }
}

/// atan(1/k) by its alternating series; every partial sum brackets the limit.
fn atan_inv(k: u64, prec: u32) -> Interval {
    let one = BigInt::one() << prec;
    let k2 = BigInt::from(k) * BigInt::from(k);
    let mut pow = BigInt::from(k);
    let mut sum = Interval::point(BigInt::zero(), prec);
    let mut j: u64 = 0;
    loop {
        let den = &pow * BigInt::from(2 * j + 1);
        let term = Interval::point(one.clone(), prec).div_int(&den);
        if term.hi <= BigInt::one() {
            return sum.widen(&BigInt::one());
        }
        sum = if j % 2 == 0 { sum.add(&term) } else { sum.sub(&term) };
        pow *= &k2;
        j += 1;
    }
}

/// Machin: pi = 16 atan(1/5) - 4 atan(1/239).
pub fn pi_enclosure(prec: u32) -> Interval {
    let a = atan_inv(5, prec);
    let b = atan_inv(239, prec);
    a.scale_int(16).sub(&b.scale_int(4))
}

/// cos on an interval inside (0, 1), where cos is decreasing and the
/// Taylor series alternates with decreasing terms.
fn cos_small(x: &Interval) -> Interval {
    let prec = x.prec;
    let x2 = x.mul(x);
    let mut term = Interval::point(BigInt::one() << prec, prec);
    let mut sum = term.clone();
    let mut j: u64 = 1;
    loop {
        term = term
            .mul(&x2)
            .div_int(&BigInt::from((2 * j - 1) * (2 * j)));
        if term.hi <= BigInt::one() {
            let r = term.hi.clone().max(BigInt::one());
            return sum.widen(&r);
        }
        sum = if j % 2 == 1 { sum.sub(&term) } else { sum.add(&term) };
        j += 1;
    }
}

fn theta_cache() -> &'static RwLock<HashMap<(u32, u32), Interval>> {
    static CACHE: OnceLock<RwLock<HashMap<(u32, u32), Interval>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Certified enclosure of 2cos(pi/L) at the given precision.
pub fn theta_enclosure(level: u32, prec: u32) -> Interval {
    if let Some(iv) = theta_cache().read().unwrap().get(&(level, prec)) {
        return iv.clone();
    }
    let iv = match level {
        1 => Interval::point(BigInt::from(-2) << prec, prec),
        2 => Interval::point(BigInt::zero(), prec),
        3 => Interval::point(BigInt::one() << prec, prec),
        _ => {
            let work = prec + 32;
            let pi = pi_enclosure(work);
            let x = pi.div_int(&BigInt::from(level));
            cos_small(&x).scale_int(2).coarsen(prec)
        }
    };
    theta_cache()
        .write()
        .unwrap()
        .insert((level, prec), iv.clone());
    iv
}

/// Horner evaluation of a rational polynomial over an interval argument.
pub fn eval_poly(coeffs: &[BigRational], x: &Interval) -> Interval {
    let prec = x.prec;
    let mut acc = Interval::point(BigInt::zero(), prec);
    for c in coeffs.iter().rev() {
        acc = acc.mul(x).add(&Interval::from_rational(c, prec));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    #[test]
    fn pi_bounds() {
        let iv = pi_enclosure(200);
        let lo = iv.lo_rational().to_f64().unwrap();
        let hi = iv.hi_rational().to_f64().unwrap();
        assert!(lo <= std::f64::consts::PI && std::f64::consts::PI <= hi);
        assert!(&iv.hi - &iv.lo < BigInt::from(1 << 12));
    }

    #[test]
    fn theta_bounds_contain_float_value() {
        for level in 4..60 {
            let iv = theta_enclosure(level, 64);
            let t = 2.0 * (std::f64::consts::PI / level as f64).cos();
            let lo = iv.lo_rational().to_f64().unwrap();
            let hi = iv.hi_rational().to_f64().unwrap();
            assert!(lo - 1e-15 <= t && t <= hi + 1e-15, "level {level}");
            assert!(hi - lo < 1e-15);
        }
    }

    #[test]
    fn outward_rounding_of_negative_values() {
        let q = BigRational::new((-1).into(), 3.into());
        let iv = Interval::from_rational(&q, 4);
        assert_eq!(iv.lo, BigInt::from(-6));
        assert_eq!(iv.hi, BigInt::from(-5));
    }
}
