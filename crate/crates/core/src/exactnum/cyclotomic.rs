use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::field::rational_to_f64;

/// Element of the cyclotomic field Q(ζ_n), stored on the power basis
/// ζ_n^0 .. ζ_n^{φ(n)-1} and reduced modulo the n-th cyclotomic polynomial.
///
/// Binary operations on elements of different orders first embed both into
/// Q(ζ_lcm).
#[derive(Clone, Debug)]
pub struct Cyclotomic {
    order: u64,
    coeffs: Vec<BigRational>,
}

fn cyclotomic_cache() -> &'static Mutex<HashMap<u64, Arc<Vec<BigInt>>>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<BigInt>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Coefficients (lowest degree first) of the n-th cyclotomic polynomial.
pub fn cyclotomic_polynomial(n: u64) -> Arc<Vec<BigInt>> {
    assert!(n >= 1, "cyclotomic polynomial of order 0");
    if let Some(p) = cyclotomic_cache().lock().unwrap().get(&n) {
        return p.clone();
    }
    // Φ_n = (x^n - 1) / Π_{d | n, d < n} Φ_d
    let mut num: Vec<BigInt> = vec![BigInt::zero(); n as usize + 1];
    num[0] = -BigInt::one();
    num[n as usize] = BigInt::one();
    for d in 1..n {
        if n.is_multiple_of(d) {
            let phi_d = cyclotomic_polynomial(d);
            num = exact_div_monic(&num, &phi_d);
        }
    }
    let p = Arc::new(num);
    cyclotomic_cache().lock().unwrap().insert(n, p.clone());
    p
}

fn exact_div_monic(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let nd = rem.len() - 1;
    let mut quot = vec![BigInt::zero(); nd - dd + 1];
    for k in (0..=nd - dd).rev() {
        let c = rem[k + dd].clone();
        if c.is_zero() {
            continue;
        }
        for (j, dj) in den.iter().enumerate() {
            rem[k + j] -= &c * dj;
        }
        quot[k] = c;
    }
    debug_assert!(rem.iter().all(|c| c.is_zero()));
    quot
}

/// Euler totient, the degree of Q(ζ_n).
pub fn totient(n: u64) -> usize {
    cyclotomic_polynomial(n).len() - 1
}

fn reduce(order: u64, mut poly: Vec<BigRational>) -> Vec<BigRational> {
    let phi = cyclotomic_polynomial(order);
    let deg = phi.len() - 1;
    while poly.len() > deg {
        let top = poly.pop().unwrap();
        if top.is_zero() {
            continue;
        }
        let shift = poly.len() - deg;
        for (j, pj) in phi.iter().enumerate().take(deg) {
            poly[shift + j] -= &top * BigRational::from_integer(pj.clone());
        }
    }
    poly.resize(deg, BigRational::zero());
    poly
}

fn trim(p: &mut Vec<BigRational>) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

fn poly_sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); a.len().max(b.len())];
    for (i, c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, c) in b.iter().enumerate() {
        out[i] -= c;
    }
    trim(&mut out);
    out
}

fn poly_divrem(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let mut rem = a.to_vec();
    trim(&mut rem);
    let db = b.len() - 1;
    if rem.len() < b.len() {
        return (Vec::new(), rem);
    }
    let lead = b[db].clone();
    let mut quot = vec![BigRational::zero(); rem.len() - db];
    while rem.len() >= b.len() {
        let k = rem.len() - b.len();
        let c = rem.last().unwrap() / &lead;
        for (j, bj) in b.iter().enumerate() {
            rem[k + j] -= &c * bj;
        }
        quot[k] = c;
        rem.pop();
        trim(&mut rem);
    }
    (quot, rem)
}

impl Cyclotomic {
    pub fn zero(order: u64) -> Self {
        Cyclotomic {
            order,
            coeffs: vec![BigRational::zero(); totient(order)],
        }
    }

    pub fn one(order: u64) -> Self {
        Self::from_rational(order, BigRational::one())
    }

    pub fn from_rational(order: u64, q: BigRational) -> Self {
        let mut z = Self::zero(order);
        z.coeffs[0] = q;
        z
    }

    /// Builds an element from an arbitrary polynomial in ζ_n.
    pub fn from_poly(order: u64, poly: Vec<BigRational>) -> Self {
        Cyclotomic {
            order,
            coeffs: reduce(order, poly),
        }
    }

    /// ζ_den^num, reduced in Q(ζ_den).
    pub fn root_of_unity(num: i64, den: u64) -> Self {
        assert!(den >= 1);
        let k = num.rem_euclid(den as i64) as usize;
        let mut poly = vec![BigRational::zero(); k + 1];
        poly[k] = BigRational::one();
        Self::from_poly(den, poly)
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_rational(&self) -> bool {
        self.coeffs.iter().skip(1).all(|c| c.is_zero())
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        self.is_rational().then(|| self.coeffs[0].clone())
    }

    /// Embeds into Q(ζ_n); `self.order()` must divide `n`.
    pub fn embed(&self, n: u64) -> Self {
        assert!(
            n.is_multiple_of(self.order),
            "cannot embed Q(ζ_{}) into Q(ζ_{})",
            self.order,
            n
        );
        if n == self.order {
            return self.clone();
        }
        let step = (n / self.order) as usize;
        let mut poly = vec![BigRational::zero(); step * self.coeffs.len().max(1)];
        for (k, c) in self.coeffs.iter().enumerate() {
            poly[k * step] = c.clone();
        }
        Self::from_poly(n, poly)
    }

    fn common(&self, other: &Self) -> (Self, Self) {
        if self.order == other.order {
            return (self.clone(), other.clone());
        }
        let n = self.order.lcm(&other.order);
        (self.embed(n), other.embed(n))
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.order == other.order {
            let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
            return Cyclotomic {
                order: self.order,
                coeffs,
            };
        }
        let (a, b) = self.common(other);
        a.add(&b)
    }

    pub fn neg(&self) -> Self {
        Cyclotomic {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.order != other.order {
            let (a, b) = self.common(other);
            return a.mul(&b);
        }
        if self.order == 1 {
            return Self::from_rational(1, &self.coeffs[0] * &other.coeffs[0]);
        }
        Self::from_poly(self.order, poly_mul(&self.coeffs, &other.coeffs))
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        Cyclotomic {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * q).collect(),
        }
    }

    /// Exact inverse via the extended Euclidean algorithm against Φ_n.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        if self.order == 1 {
            return Some(Self::from_rational(1, self.coeffs[0].recip()));
        }
        let phi: Vec<BigRational> = cyclotomic_polynomial(self.order)
            .iter()
            .map(|c| BigRational::from_integer(c.clone()))
            .collect();
        let mut a = self.coeffs.clone();
        trim(&mut a);
        // invariant: s * self ≡ r (mod Φ_n)
        let (mut r0, mut r1) = (phi, a);
        let (mut s0, mut s1): (Vec<BigRational>, Vec<BigRational>) = (Vec::new(), vec![BigRational::one()]);
        while r1.len() > 1 {
            let (q, r) = poly_divrem(&r0, &r1);
            let s = poly_sub(&s0, &poly_mul(&q, &s1));
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s);
            if r1.is_empty() {
                // gcd is nontrivial; cannot happen in a field
                return None;
            }
        }
        let c = r1[0].recip();
        let inv: Vec<BigRational> = s1.iter().map(|x| x * &c).collect();
        Some(Self::from_poly(self.order, inv))
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.order);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn complex_value(&self) -> Complex64 {
        let n = self.order as f64;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let angle = 2.0 * std::f64::consts::PI * k as f64 / n;
                Complex64::from_polar(rational_to_f64(c), angle)
            })
            .sum()
    }
}

impl PartialEq for Cyclotomic {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = self.common(other);
        a.coeffs == b.coeffs
    }
}

impl fmt::Display for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, "{}", if c.is_negative() { " - " } else { " + " })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            first = false;
            let a = c.abs();
            match k {
                0 => write!(f, "{}", a)?,
                1 => write!(f, "{}*z{}", a, self.order)?,
                _ => write!(f, "{}*z{}^{}", a, self.order, k)?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
