//! Minimal polynomials of 2cos(pi/L) and the per-level tables used by
//! [`AlgebraicReal`](super::AlgebraicReal).

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Coefficients are stored low degree first.
pub(crate) type IntPoly = Vec<BigInt>;

fn cyclotomic_cache() -> &'static RwLock<HashMap<u64, Arc<IntPoly>>> {
    static CACHE: OnceLock<RwLock<HashMap<u64, Arc<IntPoly>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            if d * d != n {
                out.push(n / d);
            }
        }
        d += 1;
    }
    out.sort_unstable();
    out
}

pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub(crate) fn euler_phi(n: u64) -> u64 {
    prime_factors(n)
        .into_iter()
        .fold(n, |acc, p| acc / p * (p - 1))
}

/// Degree of 2cos(pi/L) over the rationals.
pub fn field_degree(level: u32) -> usize {
    if level <= 3 {
        1
    } else {
        (euler_phi(2 * level as u64) / 2) as usize
    }
}

/// Exact division of `num` by the monic polynomial `den`.
fn div_monic(num: &IntPoly, den: &IntPoly) -> IntPoly {
    let mut rem = num.clone();
    let dd = den.len() - 1;
    if rem.len() <= dd {
        return vec![BigInt::zero()];
    }
    let mut quot = vec![BigInt::zero(); rem.len() - dd];
    for k in (dd..rem.len()).rev() {
        let c = rem[k].clone();
        if c.is_zero() {
            continue;
        }
        quot[k - dd] = c.clone();
        for (j, dj) in den.iter().enumerate() {
            rem[k - dd + j] -= &c * dj;
        }
    }
    debug_assert!(rem.iter().all(Zero::is_zero));
    quot
}

/// The n-th cyclotomic polynomial, from (x^n - 1) divided by all proper
/// divisor cyclotomics.
pub fn cyclotomic(n: u64) -> Vec<BigInt> {
    assert!(n >= 1);
    if let Some(p) = cyclotomic_cache().read().unwrap().get(&n) {
        return p.as_ref().clone();
    }
    let mut poly: IntPoly = vec![BigInt::zero(); n as usize + 1];
    poly[0] = -BigInt::one();
    poly[n as usize] = BigInt::one();
    for d in divisors(n) {
        if d < n {
            poly = div_monic(&poly, &cyclotomic(d));
        }
    }
    cyclotomic_cache()
        .write()
        .unwrap()
        .insert(n, Arc::new(poly.clone()));
    poly
}

fn binomial(n: usize, k: usize) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

/// Minimal polynomial of 2cos(pi/L) over the rationals, monic with integer
/// coefficients, low degree first.
pub fn minimal_polynomial(level: u32) -> Vec<BigInt> {
    assert!(level >= 1, "level must be positive");
    match level {
        1 => return vec![BigInt::from(2), BigInt::one()],
        2 => return vec![BigInt::zero(), BigInt::one()],
        _ => {}
    }
    let phi = cyclotomic(2 * level as u64);
    let d = phi.len() - 1;
    let h = d / 2;
    let mut psi = vec![BigInt::zero(); h + 1];
    psi[h] = BigInt::one();
    for k in (0..h).rev() {
        let mut c = phi[h + k].clone();
        let mut kp = k + 2;
        while kp <= h {
            c -= &psi[kp] * binomial(kp, (kp - k) / 2);
            kp += 2;
        }
        psi[k] = c;
    }
    psi
}

/// Per-level data: the reduction polynomial and a power table.
#[derive(Debug)]
pub(crate) struct Field {
    pub level: u32,
    pub deg: usize,
    /// Monic minimal polynomial, low degree first, length deg+1.
    pub psi: Vec<BigRational>,
}

impl Field {
    fn new(level: u32) -> Field {
        let psi: Vec<BigRational> = minimal_polynomial(level)
            .into_iter()
            .map(BigRational::from_integer)
            .collect();
        Field {
            level,
            deg: psi.len() - 1,
            psi,
        }
    }

    /// Reduce a polynomial in theta modulo psi, returning exactly `deg` coefficients.
    pub fn reduce(&self, mut c: Vec<BigRational>) -> Vec<BigRational> {
        let d = self.deg;
        if c.len() > d {
            for k in (d..c.len()).rev() {
                let top = std::mem::replace(&mut c[k], BigRational::zero());
                if top.is_zero() {
                    continue;
                }
                for j in 0..d {
                    if !self.psi[j].is_zero() {
                        c[k - d + j] -= &top * &self.psi[j];
                    }
                }
            }
            c.truncate(d);
        }
        c.resize(d, BigRational::zero());
        c
    }

    pub fn mul(&self, a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if !y.is_zero() {
                    out[i + j] += x * y;
                }
            }
        }
        self.reduce(out)
    }
}

/// How a level-d element sits inside level L: the embedding columns and a
/// solver for the inverse problem.
#[derive(Debug)]
pub(crate) struct Embedding {
    /// cols[k] is theta_d^k written in the level-L basis.
    pub cols: Vec<Vec<BigRational>>,
    pivots: Vec<usize>,
    /// Inverse of the square submatrix of `cols` on the pivot rows.
    inv: Vec<Vec<BigRational>>,
}

impl Embedding {
    fn new(small: &Field, big: &Field) -> Embedding {
        let ratio = big.level / small.level;
        // theta_d = C_r(theta_L) where C_0 = 2, C_1 = x, C_{k+1} = x C_k - C_{k-1}.
        let x: Vec<BigRational> = big.reduce(vec![BigRational::zero(), BigRational::one()]);
        let mut prev = big.reduce(vec![BigRational::from_integer(2.into())]);
        let mut cur = x.clone();
        for _ in 1..ratio {
            let next: Vec<BigRational> = big
                .mul(&x, &cur)
                .into_iter()
                .zip(prev.iter())
                .map(|(a, b)| a - b)
                .collect();
            prev = std::mem::replace(&mut cur, next);
        }
        let theta_small = cur;
        let mut cols = Vec::with_capacity(small.deg);
        let mut power = big.reduce(vec![BigRational::one()]);
        for _ in 0..small.deg {
            cols.push(power.clone());
            power = big.mul(&power, &theta_small);
        }
        let (pivots, inv) = pivot_inverse(&cols, big.deg);
        Embedding { cols, pivots, inv }
    }

    pub fn lift(&self, c: &[BigRational]) -> Vec<BigRational> {
        let rows = self.cols[0].len();
        let mut out = vec![BigRational::zero(); rows];
        for (k, ck) in c.iter().enumerate() {
            if ck.is_zero() {
                continue;
            }
            for r in 0..rows {
                if !self.cols[k][r].is_zero() {
                    out[r] += ck * &self.cols[k][r];
                }
            }
        }
        out
    }

    /// Returns the level-d coefficients when `v` lies in the image.
    pub fn descend(&self, v: &[BigRational]) -> Option<Vec<BigRational>> {
        let d = self.pivots.len();
        let mut u = vec![BigRational::zero(); d];
        for (i, ui) in u.iter_mut().enumerate() {
            for (j, p) in self.pivots.iter().enumerate() {
                if !self.inv[i][j].is_zero() && !v[*p].is_zero() {
                    *ui += &self.inv[i][j] * &v[*p];
                }
            }
        }
        if self.lift(&u).as_slice() == v {
            Some(u)
        } else {
            None
        }
    }
}

/// Chooses rows making the column set square-invertible and returns the inverse.
fn pivot_inverse(cols: &[Vec<BigRational>], rows: usize) -> (Vec<usize>, Vec<Vec<BigRational>>) {
    let d = cols.len();
    // Work on the transpose: d rows (one per column) of length `rows`.
    let mut a: Vec<Vec<BigRational>> = cols.to_vec();
    let mut pivots = Vec::with_capacity(d);
    let mut used = vec![false; rows];
    for i in 0..d {
        let p = (0..rows)
            .find(|&r| !used[r] && !a[i][r].is_zero())
            .expect("embedding columns are independent");
        used[p] = true;
        pivots.push(p);
        let piv = a[i][p].clone();
        for k in 0..d {
            if k != i && !a[k][p].is_zero() {
                let f = &a[k][p] / &piv;
                for r in 0..rows {
                    let t = &f * &a[i][r];
                    a[k][r] -= t;
                }
            }
        }
    }
    // Square matrix S[r][k] = cols[k][pivots[r]]; invert it.
    let n = d;
    let mut s: Vec<Vec<BigRational>> = (0..n)
        .map(|r| (0..n).map(|k| cols[k][pivots[r]].clone()).collect())
        .collect();
    let mut inv: Vec<Vec<BigRational>> = (0..n)
        .map(|r| {
            (0..n)
                .map(|k| if r == k { BigRational::one() } else { BigRational::zero() })
                .collect()
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !s[r][col].is_zero()).expect("invertible");
        s.swap(col, p);
        inv.swap(col, p);
        let piv = s[col][col].clone();
        for k in 0..n {
            s[col][k] /= &piv;
            inv[col][k] /= &piv;
        }
        for r in 0..n {
            if r != col && !s[r][col].is_zero() {
                let f = s[r][col].clone();
                for k in 0..n {
                    let t1 = &f * &s[col][k];
                    s[r][k] -= t1;
                    let t2 = &f * &inv[col][k];
                    inv[r][k] -= t2;
                }
            }
        }
    }
    // inv maps pivot-row values (indexed by r) to coefficients (indexed by k):
    // S u = v_p  =>  u = S^{-1} v_p, and S^{-1} is `inv` with rows indexed by k.
    (pivots, inv)
}

fn field_cache() -> &'static RwLock<HashMap<u32, Arc<Field>>> {
    static CACHE: OnceLock<RwLock<HashMap<u32, Arc<Field>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

fn embedding_cache() -> &'static RwLock<HashMap<(u32, u32), Arc<Embedding>>> {
    static CACHE: OnceLock<RwLock<HashMap<(u32, u32), Arc<Embedding>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

pub(crate) fn field(level: u32) -> Arc<Field> {
    if let Some(f) = field_cache().read().unwrap().get(&level) {
        return f.clone();
    }
    let f = Arc::new(Field::new(level));
    field_cache()
        .write()
        .unwrap()
        .entry(level)
        .or_insert(f)
        .clone()
}

pub(crate) fn embedding(small: u32, big: u32) -> Arc<Embedding> {
    debug_assert!(big % small == 0);
    if let Some(e) = embedding_cache().read().unwrap().get(&(small, big)) {
        return e.clone();
    }
    let e = Arc::new(Embedding::new(&field(small), &field(big)));
    embedding_cache()
        .write()
        .unwrap()
        .entry((small, big))
        .or_insert(e)
        .clone()
}

pub(crate) fn lcm(a: u32, b: u32) -> u64 {
    (a as u64).lcm(&(b as u64))
}

/// Whether the integer polynomial has the given value as a root (used in tests).
#[allow(dead_code)]
pub(crate) fn eval_int_poly_f64(p: &[BigInt], x: f64) -> f64 {
    use num_traits::ToPrimitive;
    p.iter()
        .rev()
        .fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
}

#[allow(dead_code)]
pub(crate) fn max_abs_coeff(p: &[BigInt]) -> BigInt {
    p.iter().map(|c| c.abs()).max().unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn cyclotomic_small_cases() {
        assert_eq!(cyclotomic(1), ints(&[-1, 1]));
        assert_eq!(cyclotomic(2), ints(&[1, 1]));
        assert_eq!(cyclotomic(8), ints(&[1, 0, 0, 0, 1]));
        assert_eq!(cyclotomic(10), ints(&[1, -1, 1, -1, 1]));
        assert_eq!(cyclotomic(12), ints(&[1, 0, -1, 0, 1]));
    }

    #[test]
    fn minimal_polynomials_low_levels() {
        assert_eq!(minimal_polynomial(1), ints(&[2, 1]));
        assert_eq!(minimal_polynomial(2), ints(&[0, 1]));
        assert_eq!(minimal_polynomial(3), ints(&[-1, 1]));
        assert_eq!(minimal_polynomial(4), ints(&[-2, 0, 1]));
        assert_eq!(minimal_polynomial(5), ints(&[-1, -1, 1]));
        assert_eq!(minimal_polynomial(6), ints(&[-3, 0, 1]));
    }

    /// Oracle: the minimal polynomial is the product of (x - 2cos(k pi / L))
    /// over odd k coprime to 2L with k < L, evaluated numerically.
    #[test]
    fn minimal_polynomial_matches_conjugate_product() {
        for level in 3..=40u32 {
            let psi = minimal_polynomial(level);
            let conj: Vec<f64> = (1..level)
                .filter(|k| k % 2 == 1 && (*k as u64).gcd(&(2 * level as u64)) == 1)
                .map(|k| 2.0 * (std::f64::consts::PI * k as f64 / level as f64).cos())
                .collect();
            assert_eq!(psi.len() - 1, conj.len(), "degree at level {level}");
            assert_eq!(psi.len() - 1, field_degree(level));
            for x in [0.3, -1.1, 1.7] {
                let prod: f64 = conj.iter().map(|r| x - r).product();
                let val = eval_int_poly_f64(&psi, x);
                assert!((prod - val).abs() < 1e-6 * (1.0 + prod.abs()), "level {level}");
            }
            let theta = 2.0 * (std::f64::consts::PI / level as f64).cos();
            let scale = max_abs_coeff(&psi);
            use num_traits::ToPrimitive;
            assert!(eval_int_poly_f64(&psi, theta).abs() < 1e-7 * scale.to_f64().unwrap());
        }
    }

    #[test]
    fn embedding_round_trip() {
        let e = embedding(5, 10);
        let v = vec![BigRational::from_integer(3.into()), BigRational::new(1.into(), 2.into())];
        let lifted = e.lift(&v);
        assert_eq!(e.descend(&lifted), Some(v));
        let mut other = lifted.clone();
        other[1] += BigRational::one();
        assert_eq!(e.descend(&other), None);
    }
}
