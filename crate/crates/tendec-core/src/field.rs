//! Construction of small finite fields `GF(p^k)` and exact element
//! arithmetic.
//!
//! Elements are plain integers `0..q-1`: the base-`p` digits of an element
//! are the coefficients of the polynomial it encodes (digit `i` is the
//! coefficient of `alpha^i`). Construction is deterministic: the modulus is
//! the irreducible monic polynomial with the smallest coefficient-integer
//! encoding, and the primitive element is the smallest generator of the
//! multiplicative group.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// A field element, always in `0..q-1` for its [`FieldSpec`].
pub type Elem = u32;

/// Default cap on the field order `q = p^k`.
pub const DEFAULT_ORDER_CAP: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldError {
    NonPrime(u32),
    ZeroExponent,
    OrderTooLarge { q: u64, cap: u64 },
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldError::NonPrime(p) => write!(f, "{p} is not prime"),
            FieldError::ZeroExponent => write!(f, "extension degree must be at least 1"),
            FieldError::OrderTooLarge { q, cap } => {
                write!(f, "field order {q} exceeds the cap {cap}")
            }
        }
    }
}

/// A concrete finite field `GF(p^k)`, immutable after construction.
#[derive(Debug, Clone)]
pub struct FieldSpec {
    p: u32,
    k: u32,
    q: u32,
    /// Monic modulus as coefficients low-to-high (length `k+1`); `None` for
    /// prime fields.
    modulus: Option<Vec<u32>>,
    primitive: Elem,
    /// `exp[t] = primitive^t` for `t` in `0..q-1`.
    exp: Vec<Elem>,
    /// Inverse of `exp` on nonzero elements; `log[0]` is a sentinel.
    log: Vec<u32>,
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.k == other.k
    }
}
impl Eq for FieldSpec {}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Digits of `e` in base `p`, low-to-high, padded to length `len`.
fn digits(mut e: u32, p: u32, len: usize) -> Vec<u32> {
    let mut out = vec![0; len];
    for slot in out.iter_mut() {
        *slot = e % p;
        e /= p;
    }
    debug_assert_eq!(e, 0);
    out
}

fn encode(digits: &[u32], p: u32) -> u32 {
    digits.iter().rev().fold(0, |acc, &d| acc * p + d)
}

/// Remainder of polynomial `a` modulo monic `m`, coefficients over `GF(p)`.
fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let deg_m = m.len() - 1;
    let mut r: Vec<u32> = a.to_vec();
    while r.len() > deg_m {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - deg_m;
        if lead != 0 {
            // m is monic, so the quotient digit is just `lead`.
            for i in 0..=deg_m {
                let sub = (lead as u64 * m[i] as u64) % p as u64;
                let cur = r[shift + i] as u64;
                r[shift + i] = ((cur + p as u64 - sub) % p as u64) as u32;
            }
        }
        debug_assert_eq!(*r.last().unwrap(), 0);
        r.pop();
    }
    r
}

fn poly_is_zero(a: &[u32]) -> bool {
    a.iter().all(|&c| c == 0)
}

/// Product of two element polynomials reduced modulo `m`.
fn poly_mul_mod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + ai as u64 * bj as u64) % p as u64;
        }
    }
    let prod: Vec<u32> = prod.into_iter().map(|c| c as u32).collect();
    let mut r = poly_rem(&prod, m, p);
    r.resize(m.len() - 1, 0);
    r
}

fn prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut d = 2;
    while (d as u64) * (d as u64) <= n as u64 {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

impl FieldSpec {
    /// Builds `GF(p^k)` with the default order cap.
    pub fn new(p: u32, k: u32) -> Result<FieldSpec, FieldError> {
        Self::with_cap(p, k, DEFAULT_ORDER_CAP)
    }

    pub fn with_cap(p: u32, k: u32, cap: u64) -> Result<FieldSpec, FieldError> {
        if k == 0 {
            return Err(FieldError::ZeroExponent);
        }
        if !is_prime(p) {
            return Err(FieldError::NonPrime(p));
        }
        let mut q: u64 = 1;
        for _ in 0..k {
            q *= p as u64;
            if q > cap {
                return Err(FieldError::OrderTooLarge { q, cap });
            }
        }
        let q = q as u32;

        let modulus = if k == 1 { None } else { Some(find_modulus(p, k)) };

        // Raw multiplication used to bootstrap the tables.
        let mul_raw = |a: Elem, b: Elem| -> Elem {
            match &modulus {
                None => ((a as u64 * b as u64) % p as u64) as u32,
                Some(m) => {
                    let da = digits(a, p, k as usize);
                    let db = digits(b, p, k as usize);
                    encode(&poly_mul_mod(&da, &db, m, p), p)
                }
            }
        };
        let pow_raw = |mut base: Elem, mut e: u32| -> Elem {
            let mut acc: Elem = 1;
            while e > 0 {
                if e & 1 == 1 {
                    acc = mul_raw(acc, base);
                }
                base = mul_raw(base, base);
                e >>= 1;
            }
            acc
        };

        // Smallest generator of the multiplicative group: e generates iff
        // e^((q-1)/l) != 1 for every prime l dividing q-1.
        let factors = prime_factors(q - 1);
        let mut primitive = 0;
        for e in 1..q {
            if factors.iter().all(|&l| pow_raw(e, (q - 1) / l) != 1) {
                primitive = e;
                break;
            }
        }
        debug_assert!(primitive != 0);

        let mut exp = Vec::with_capacity((q - 1) as usize);
        let mut log = vec![u32::MAX; q as usize];
        let mut cur: Elem = 1;
        for t in 0..q - 1 {
            debug_assert_eq!(log[cur as usize], u32::MAX, "period shorter than q-1");
            exp.push(cur);
            log[cur as usize] = t;
            cur = mul_raw(cur, primitive);
        }
        debug_assert_eq!(cur, 1);

        Ok(FieldSpec {
            p,
            k,
            q,
            modulus,
            primitive,
            exp,
            log,
        })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Monic modulus coefficients (low-to-high), absent for prime fields.
    pub fn modulus(&self) -> Option<&[u32]> {
        self.modulus.as_deref()
    }

    pub fn primitive(&self) -> Elem {
        self.primitive
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        0..self.q
    }

    #[inline]
    fn check(&self, a: Elem) {
        debug_assert!(a < self.q, "element {a} out of range for GF({})", self.q);
    }

    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        self.check(a);
        self.check(b);
        if self.k == 1 {
            return (a + b) % self.p;
        }
        let p = self.p;
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.k {
            out += (a % p + b % p) % p * place;
            place *= p;
            a /= p;
            b /= p;
        }
        out
    }

    pub fn neg(&self, a: Elem) -> Elem {
        self.check(a);
        if self.k == 1 {
            return (self.p - a) % self.p;
        }
        let p = self.p;
        let mut a = a;
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.k {
            out += (p - a % p) % p * place;
            place *= p;
            a /= p;
        }
        out
    }

    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.check(a);
        self.check(b);
        if a == 0 || b == 0 {
            return 0;
        }
        if self.k == 1 {
            return ((a as u64 * b as u64) % self.p as u64) as u32;
        }
        let t = (self.log[a as usize] + self.log[b as usize]) % (self.q - 1);
        self.exp[t as usize]
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn inv(&self, a: Elem) -> Elem {
        self.check(a);
        assert!(a != 0, "division by zero");
        if self.k == 1 {
            // Fermat: a^(p-2).
            let mut acc: u64 = 1;
            let mut base = a as u64;
            let mut e = self.p - 2;
            while e > 0 {
                if e & 1 == 1 {
                    acc = acc * base % self.p as u64;
                }
                base = base * base % self.p as u64;
                e >>= 1;
            }
            return acc as u32;
        }
        let t = (self.q - 1 - self.log[a as usize]) % (self.q - 1);
        self.exp[t as usize]
    }

    pub fn div(&self, a: Elem, b: Elem) -> Elem {
        self.mul(a, self.inv(b))
    }

    /// Discrete log base the primitive element. Panics on zero.
    pub fn dlog(&self, x: Elem) -> u32 {
        self.check(x);
        assert!(x != 0, "dlog of zero");
        self.log[x as usize]
    }

    /// `primitive^t` with `t` reduced modulo `q-1`.
    pub fn exp(&self, t: u64) -> Elem {
        self.exp[(t % (self.q as u64 - 1)) as usize]
    }

    pub fn pow(&self, a: Elem, mut e: u64) -> Elem {
        self.check(a);
        if a == 0 {
            return if e == 0 { 1 } else { 0 };
        }
        let mut acc: Elem = 1;
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }
}

/// The irreducible monic degree-`k` polynomial over `GF(p)` with the
/// smallest coefficient-integer encoding. Irreducibility is decided by a
/// full divisor test over all monic polynomials of degree up to `k/2`.
fn find_modulus(p: u32, k: u32) -> Vec<u32> {
    let k = k as usize;
    let mut low_count: u64 = 1;
    for _ in 0..k {
        low_count *= p as u64;
    }
    for m in 0..low_count {
        let mut f = digits(m as u32, p, k);
        f.push(1);
        if is_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("an irreducible polynomial of every degree exists over GF(p)")
}

fn is_irreducible(f: &[u32], p: u32) -> bool {
    let k = f.len() - 1;
    for d in 1..=k / 2 {
        let mut count: u64 = 1;
        for _ in 0..d {
            count *= p as u64;
        }
        for m in 0..count {
            let mut g = digits(m as u32, p, d);
            g.push(1);
            if poly_is_zero(&poly_rem(f, &g, p)) {
                return false;
            }
        }
    }
    true
}
