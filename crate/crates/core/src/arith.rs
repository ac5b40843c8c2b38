//! Exact integer kernel: factorization, primality, Kronecker symbol, CRT and
//! constrained prime search.
//!
//! Everything here is pure. Unbounded values use [`BigInt`]; the hot paths used
//! by the enumerator have `u64`/`i64` variants.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::{Integer, Roots};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Trial division bound used before falling back to Pollard rho.
pub const TRIAL_BOUND: u64 = 1_000_000;

/// Upper limit on candidates examined by [`find_prime`].
pub const PRIME_SEARCH_CAP: u64 = 50_000_000;

/// Deterministic Miller–Rabin bases for every n < 2^64.
const MR_BASES_64: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Number of Miller–Rabin rounds applied above 2^64.
const MR_ROUNDS_BIG: usize = 64;

fn small_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| sieve(TRIAL_BOUND))
}

/// All primes `<= n` by the sieve of Eratosthenes.
pub fn sieve(n: u64) -> Vec<u64> {
    let n = n as usize;
    if n < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        primes.push(i as u64);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    primes
}

/// A signed integer written as `sign * prod(p^e)` with strictly increasing primes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub value: BigInt,
    pub sign: i8,
    pub factors: Vec<(BigInt, u32)>,
}

impl Factorization {
    /// Recomputes `sign * prod(p^e)`.
    pub fn product(&self) -> BigInt {
        let mut acc = BigInt::from(self.sign);
        for (p, e) in &self.factors {
            acc *= num_traits::pow(p.clone(), *e as usize);
        }
        acc
    }

    pub fn exponent_of(&self, p: &BigInt) -> u32 {
        self.factors
            .iter()
            .find(|(q, _)| q == p)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn primes(&self) -> impl Iterator<Item = &BigInt> {
        self.factors.iter().map(|(p, _)| p)
    }
}

/// Factors a nonzero integer.
pub fn factorize(n: &BigInt) -> Result<Factorization> {
    if n.is_zero() {
        return Err(Error::Domain("cannot factor zero".into()));
    }
    let sign: i8 = if n.is_negative() { -1 } else { 1 };
    let mag = n.magnitude();
    let factors = match mag.to_u64() {
        Some(m) => factor_u64(m)
            .into_iter()
            .map(|(p, e)| (BigInt::from(p), e))
            .collect(),
        None => factor_big(mag),
    };
    Ok(Factorization {
        value: n.clone(),
        sign,
        factors,
    })
}

/// Factors `n >= 1` into `(prime, exponent)` pairs, primes increasing.
pub fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n <= 1 {
        return out;
    }
    for &p in small_primes() {
        if p * p > n {
            break;
        }
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
    }
    if n > 1 {
        let mut rest = Vec::new();
        split_u64(n, &mut rest);
        rest.sort_unstable();
        for p in rest {
            match out.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => out.push((p, 1)),
            }
        }
    }
    out
}

fn split_u64(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime_u64(n) {
        out.push(n);
        return;
    }
    let d = pollard_brent_u64(n);
    split_u64(d, out);
    split_u64(n / d, out);
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic primality test for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES_64 {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'bases: for &a in &MR_BASES_64 {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Brent's variant of Pollard rho. `n` must be composite and odd-or-even > 3.
/// Seeds are fixed so the output is reproducible.
fn pollard_brent_u64(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut g, mut q) = (2u64, 2u64, 1u64, 1u64);
        let mut r = 1u64;
        let mut ys = 0;
        const BATCH: u64 = 128;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..BATCH.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = q.gcd(&n);
                k += BATCH;
            }
            r <<= 1;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = x.abs_diff(ys).gcd(&n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
        c += 1;
    }
}

fn factor_big(n: &BigUint) -> Vec<(BigInt, u32)> {
    let mut n = n.clone();
    let mut out: Vec<(BigInt, u32)> = Vec::new();
    for &p in small_primes() {
        let pb = BigUint::from(p);
        if &pb * &pb > n {
            break;
        }
        let mut e = 0;
        while (&n % &pb).is_zero() {
            n /= &pb;
            e += 1;
        }
        if e > 0 {
            out.push((BigInt::from(p), e));
        }
        if let Some(small) = n.to_u64() {
            // Remaining cofactor fits the fast path.
            for (q, e) in factor_u64(small) {
                out.push((BigInt::from(q), e));
            }
            out.sort();
            return merge(out);
        }
    }
    if n > BigUint::one() {
        let mut rest = Vec::new();
        split_big(n, &mut rest);
        for p in rest {
            out.push((BigInt::from_biguint(Sign::Plus, p), 1));
        }
    }
    out.sort();
    merge(out)
}

fn merge(sorted: Vec<(BigInt, u32)>) -> Vec<(BigInt, u32)> {
    let mut out: Vec<(BigInt, u32)> = Vec::with_capacity(sorted.len());
    for (p, e) in sorted {
        match out.last_mut() {
            Some((q, f)) if *q == p => *f += e,
            _ => out.push((p, e)),
        }
    }
    out
}

fn split_big(n: BigUint, out: &mut Vec<BigUint>) {
    if n.is_one() {
        return;
    }
    if let Some(small) = n.to_u64() {
        let mut v = Vec::new();
        split_u64(small, &mut v);
        out.extend(v.into_iter().map(BigUint::from));
        return;
    }
    if is_probable_prime_big(&n) {
        out.push(n);
        return;
    }
    let d = pollard_brent_big(&n);
    let q = &n / &d;
    split_big(d, out);
    split_big(q, out);
}

fn pollard_brent_big(n: &BigUint) -> BigUint {
    if n.is_even() {
        return BigUint::from(2u8);
    }
    let mut c = BigUint::one();
    loop {
        let f = |x: &BigUint| (x * x + &c) % n;
        let mut y = BigUint::from(2u8);
        let mut x = y.clone();
        let mut ys = y.clone();
        let mut g = BigUint::one();
        let mut q = BigUint::one();
        let mut r: u64 = 1;
        const BATCH: u64 = 64;
        while g.is_one() {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g.is_one() {
                ys = y.clone();
                for _ in 0..BATCH.min(r - k) {
                    y = f(&y);
                    let diff = if x > y { &x - &y } else { &y - &x };
                    q = (q * diff) % n;
                }
                g = q.gcd(n);
                k += BATCH;
            }
            r <<= 1;
        }
        if &g == n {
            loop {
                ys = f(&ys);
                let diff = if x > ys { &x - &ys } else { &ys - &x };
                g = diff.gcd(n);
                if !g.is_one() {
                    break;
                }
            }
        }
        if &g != n {
            return g;
        }
        c += 1u8;
    }
}

fn is_probable_prime_big(n: &BigUint) -> bool {
    let one = BigUint::one();
    let two = BigUint::from(2u8);
    if n < &two {
        return false;
    }
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    // The first MR_ROUNDS_BIG primes serve as fixed bases.
    'bases: for &a in small_primes().iter().take(MR_ROUNDS_BIG) {
        let a = BigUint::from(a);
        if (n % &a).is_zero() {
            return n == &a;
        }
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Primality: deterministic below 2^64, 64 Miller–Rabin rounds above.
pub fn is_prime(n: &BigInt) -> bool {
    if !n.is_positive() {
        return false;
    }
    match n.to_u64() {
        Some(m) => is_prime_u64(m),
        None => is_probable_prime_big(n.magnitude()),
    }
}

/// Kronecker symbol `(a/n)` on 64-bit inputs.
pub fn kronecker_i64(a: i64, n: i64) -> i8 {
    kronecker_i128(a as i128, n as i128)
}

fn kronecker_i128(mut a: i128, mut n: i128) -> i8 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut result: i8 = 1;
    if n < 0 {
        n = -n;
        if a < 0 {
            result = -result;
        }
    }
    let tz = n.trailing_zeros();
    if tz > 0 {
        if a % 2 == 0 {
            return 0;
        }
        n >>= tz;
        if tz % 2 == 1 {
            let r = a.rem_euclid(8);
            if r == 3 || r == 5 {
                result = -result;
            }
        }
    }
    // n is now odd and positive: Jacobi symbol.
    a = a.rem_euclid(n);
    while a != 0 {
        let t = a.trailing_zeros();
        a >>= t;
        if t % 2 == 1 {
            let r = n % 8;
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// Kronecker symbol `(a/n)` for arbitrary integers.
pub fn kronecker(a: &BigInt, n: &BigInt) -> i8 {
    if let (Some(x), Some(y)) = (a.to_i128(), n.to_i128()) {
        if x.unsigned_abs() < (1 << 120) && y.unsigned_abs() < (1 << 120) {
            return kronecker_i128(x, y);
        }
    }
    if n.is_zero() {
        return if a.abs().is_one() { 1 } else { 0 };
    }
    let mut result: i8 = 1;
    let mut n = n.clone();
    if n.is_negative() {
        n = -n;
        if a.is_negative() {
            result = -result;
        }
    }
    let tz = n.trailing_zeros().unwrap_or(0);
    if tz > 0 {
        if a.is_even() {
            return 0;
        }
        n >>= tz;
        if tz % 2 == 1 {
            let r = a.mod_floor(&BigInt::from(8)).to_u8().unwrap();
            if r == 3 || r == 5 {
                result = -result;
            }
        }
    }
    let mut a = a.mod_floor(&n);
    let eight = BigInt::from(8);
    let four = BigInt::from(4);
    let three = BigInt::from(3);
    while !a.is_zero() {
        let t = a.trailing_zeros().unwrap_or(0);
        a >>= t;
        if t % 2 == 1 {
            let r = (&n % &eight).to_u8().unwrap();
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        if (&a % &four) == three && (&n % &four) == three {
            result = -result;
        }
        std::mem::swap(&mut a, &mut n);
        a = a.mod_floor(&n);
    }
    if n.is_one() {
        result
    } else {
        0
    }
}

/// Solves a system of congruences with pairwise coprime moduli.
///
/// Returns `(a, m)` with `0 <= a < m = prod(moduli)`.
pub fn crt(pairs: &[(BigInt, BigInt)]) -> Result<(BigInt, BigInt)> {
    for (i, (_, mi)) in pairs.iter().enumerate() {
        if mi <= &BigInt::one() {
            return Err(Error::Precondition(format!(
                "modulus {mi} at position {i} must exceed 1"
            )));
        }
        for (j, (_, mj)) in pairs.iter().enumerate().skip(i + 1) {
            let g = mi.gcd(mj);
            if !g.is_one() {
                return Err(Error::Precondition(format!(
                    "moduli {mi} (position {i}) and {mj} (position {j}) share the factor {g}"
                )));
            }
        }
    }
    let mut a = BigInt::zero();
    let mut m = BigInt::one();
    for (r, mi) in pairs {
        let r = r.mod_floor(mi);
        // a + m*t ≡ r (mod mi)
        let inv = mod_inverse(&m.mod_floor(mi), mi).expect("coprime moduli");
        let t = ((&r - &a) * inv).mod_floor(mi);
        a += &m * t;
        m *= mi;
        a = a.mod_floor(&m);
    }
    Ok((a, m))
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else if e.gcd == BigInt::from(-1) {
        Some((-e.x).mod_floor(m))
    } else {
        None
    }
}

/// Combines congruences whose moduli need not be coprime. `None` if inconsistent.
fn combine_congruences(congruences: &[(BigInt, BigInt)]) -> Option<(BigInt, BigInt)> {
    let mut a = BigInt::zero();
    let mut m = BigInt::one();
    for (r, mi) in congruences {
        let g = m.gcd(mi);
        let diff = r - &a;
        if !(&diff % &g).is_zero() {
            return None;
        }
        let mg = &m / &g;
        let mig = mi / &g;
        let inv = if mig.is_one() {
            BigInt::zero()
        } else {
            mod_inverse(&mg.mod_floor(&mig), &mig)?
        };
        let t = ((&diff / &g) * inv).mod_floor(&mig);
        a += &m * t;
        m = &mg * mi;
        a = a.mod_floor(&m);
    }
    Some((a, m))
}

/// Smallest prime `>= min` satisfying every congruence and not in `excluded`.
pub fn find_prime(
    min: &BigInt,
    congruences: &[(BigInt, BigInt)],
    excluded: &BTreeSet<BigInt>,
) -> Result<BigInt> {
    for (r, mi) in congruences {
        if !mi.is_positive() {
            return Err(Error::Precondition(format!("modulus {mi} must be positive")));
        }
        if !r.gcd(mi).is_one() {
            return Err(Error::Precondition(format!(
                "residue {r} is not coprime to modulus {mi}"
            )));
        }
    }
    let (r, m) = combine_congruences(congruences).ok_or_else(|| {
        Error::Precondition("congruence system has no solution".to_string())
    })?;
    let two = BigInt::from(2);
    let start = if min < &two { two } else { min.clone() };
    // first candidate >= start in the class r mod m
    let mut cand = &start + (&r - &start).mod_floor(&m);
    for _ in 0..PRIME_SEARCH_CAP {
        if !excluded.contains(&cand) && is_prime(&cand) {
            return Ok(cand);
        }
        cand += &m;
    }
    Err(Error::Capacity(format!(
        "no prime found in {PRIME_SEARCH_CAP} steps of the class {r} mod {m} starting at {start}"
    )))
}

/// True iff `n` has no square factor > 1. `n` must be nonzero.
pub fn is_squarefree_u64(n: u64) -> bool {
    factor_u64(n).iter().all(|&(_, e)| e == 1)
}

fn is_squarefree(n: &BigInt) -> bool {
    if n.is_zero() {
        return false;
    }
    factorize(n)
        .map(|f| f.factors.iter().all(|(_, e)| *e == 1))
        .unwrap_or(false)
}

/// `d = 1`, or `d` is the discriminant of a quadratic field.
pub fn is_fundamental_discriminant(d: &BigInt) -> bool {
    if d.is_one() {
        return true;
    }
    if d.is_zero() {
        return false;
    }
    let four = BigInt::from(4);
    match d.mod_floor(&four).to_u8().unwrap() {
        1 => is_squarefree(d),
        0 => {
            let m = d / &four;
            let r = m.mod_floor(&four).to_u8().unwrap();
            (r == 2 || r == 3) && is_squarefree(&m)
        }
        _ => false,
    }
}

/// `floor(sqrt(n))` for `n >= 0`.
pub fn isqrt_u64(n: u64) -> u64 {
    n.sqrt()
}

pub fn is_square_u64(n: u64) -> bool {
    let r = n.sqrt();
    r * r == n
}

pub fn is_square(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    let r = n.sqrt();
    &r * &r == *n
}

/// `p`-adic valuation of a nonzero integer.
pub fn valuation(n: &BigInt, p: &BigInt) -> u32 {
    let mut n = n.clone();
    let mut v = 0;
    while !n.is_zero() && (&n % p).is_zero() {
        n /= p;
        v += 1;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn factorize_examples() {
        let f = factorize(&big(556_423_205)).unwrap();
        assert_eq!(f.sign, 1);
        assert_eq!(
            f.factors,
            vec![(big(5), 1), (big(13), 3), (big(37), 3)]
        );
        assert_eq!(f.product(), big(556_423_205));

        let f = factorize(&big(-23)).unwrap();
        assert_eq!(f.sign, -1);
        assert_eq!(f.factors, vec![(big(23), 1)]);

        let f = factorize(&big(1)).unwrap();
        assert_eq!(f.sign, 1);
        assert!(f.factors.is_empty());

        assert!(matches!(factorize(&big(0)), Err(Error::Domain(_))));
    }

    #[test]
    fn factorize_needs_rho() {
        // two primes above the trial-division bound
        let p = 1_000_003u64;
        let q = 1_000_033u64;
        let f = factor_u64(p * q);
        assert_eq!(f, vec![(p, 1), (q, 1)]);
        let f = factor_u64(p * p * q);
        assert_eq!(f, vec![(p, 2), (q, 1)]);

        // beyond 64 bits
        let n = BigInt::from(p) * BigInt::from(q) * BigInt::from(4_294_967_311u64) * 18u32;
        let f = factorize(&n).unwrap();
        assert_eq!(f.product(), n);
        assert!(f.factors.iter().all(|(p, _)| is_prime(p)));
    }

    #[test]
    fn primality() {
        assert!(is_prime_u64(2));
        assert!(!is_prime_u64(1));
        assert!(is_prime_u64(18_446_744_073_709_551_557)); // largest 64-bit prime
        assert!(!is_prime_u64(3_215_031_751)); // strong pseudoprime to 2,3,5,7
        let m61 = (BigInt::one() << 127) - 1u8;
        assert!(is_prime(&m61));
        assert!(!is_prime(&(&m61 * 3u8)));
    }

    #[test]
    fn kronecker_examples() {
        assert_eq!(kronecker(&big(3), &big(7)), -1);
        for n in 1..50 {
            assert_eq!(kronecker(&big(1), &big(n)), 1);
        }
        assert_eq!(kronecker(&big(-3), &big(2)), -1);
        assert_eq!(kronecker(&big(5), &big(0)), 0);
        assert_eq!(kronecker(&big(-1), &big(0)), 1);
        assert_eq!(kronecker(&big(-1), &big(-1)), -1);
        assert_eq!(kronecker(&big(5), &big(13)), -1);
        // big path agrees with small path
        let a: BigInt = (BigInt::one() << 130) + 7u8;
        let n: BigInt = (BigInt::one() << 127) - 1u8;
        let small = kronecker(&a.mod_floor(&n), &n);
        assert_eq!(kronecker(&a, &n), small);
    }

    #[test]
    fn legendre_agrees_with_euler_criterion() {
        for &p in &[5u64, 7, 11, 13, 97, 101] {
            for a in 0..p {
                let euler = pow_mod(a, (p - 1) / 2, p);
                let expect = match euler {
                    0 => 0,
                    1 => 1,
                    _ => -1,
                };
                assert_eq!(kronecker_i64(a as i64, p as i64), expect, "({a}/{p})");
            }
        }
    }

    #[test]
    fn crt_examples() {
        let (a, m) = crt(&[(big(1), big(3)), (big(2), big(5))]).unwrap();
        assert_eq!((a, m), (big(7), big(15)));

        let (a, m) = crt(&[(big(0), big(11))]).unwrap();
        assert_eq!((a, m), (big(0), big(11)));

        let m = big(5) * big(61).pow(3) * big(109).pow(3);
        let r = big(5) * big(61).pow(2) * big(109).pow(2) - 1;
        let (a, mm) = crt(&[(r, m.clone())]).unwrap();
        assert_eq!(a, big(221_046_004));
        assert_eq!(mm, m);

        match crt(&[(big(1), big(6)), (big(2), big(10))]) {
            Err(Error::Precondition(msg)) => assert!(msg.contains("6") && msg.contains("10")),
            other => panic!("expected precondition error, got {other:?}"),
        }
    }

    #[test]
    fn find_prime_examples() {
        let mut ex = BTreeSet::new();
        ex.insert(big(13));
        assert_eq!(find_prime(&big(1), &[(big(1), big(12))], &ex).unwrap(), big(37));
        assert_eq!(
            find_prime(&big(1), &[(big(1), big(12)), (big(1), big(5))], &BTreeSet::new())
                .unwrap(),
            big(61)
        );
        assert_eq!(find_prime(&big(6), &[(big(1), big(4))], &BTreeSet::new()).unwrap(), big(13));
        assert!(find_prime(&big(1), &[(big(1), big(4)), (big(3), big(8))], &BTreeSet::new()).is_err());
        assert!(find_prime(&big(1), &[(big(2), big(4))], &BTreeSet::new()).is_err());
    }

    #[test]
    fn fundamental_discriminants() {
        assert!(is_fundamental_discriminant(&big(-23)));
        assert!(is_fundamental_discriminant(&big(1)));
        assert!(!is_fundamental_discriminant(&big(25)));
        assert!(is_fundamental_discriminant(&big(-4)));
        assert!(is_fundamental_discriminant(&big(8)));
        assert!(is_fundamental_discriminant(&big(-3)));
        assert!(!is_fundamental_discriminant(&big(-12)));
        assert!(!is_fundamental_discriminant(&big(0)));
        assert!(!is_fundamental_discriminant(&big(2)));
    }
}
