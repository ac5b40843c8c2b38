//! Construction and verification of progressions `a mod m` whose classes
//! `a + 1, ..., a + k` force a large genus number on every cubic field.
//!
//! For each `i` the class `a + i` is pinned modulo `q_i · p_i1^3 ⋯ p_in^3` to
//! `q_i · p_i1^2 ⋯ p_in^2`. Every prime `p_ij` then divides `f` exactly, is
//! `1 mod 3`, and so contributes to the genus number.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, crt, find_prime, is_prime, kronecker};
use crate::discshape;
use crate::enumerate::Sign;
use crate::error::{Error, Result};
use crate::genus;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SettingParams {
    pub sign: Sign,
    pub epsilon: BigRational,
    pub k: u32,
    pub h: u64,
}

impl SettingParams {
    pub fn new(sign: Sign, epsilon: BigRational, k: u32, h: u64) -> Result<Self> {
        if !epsilon.is_positive() || epsilon >= BigRational::one() {
            return Err(Error::Domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        if k == 0 || h == 0 {
            return Err(Error::Domain("k and H must be positive".into()));
        }
        Ok(SettingParams { sign, epsilon, k, h })
    }

    /// `max(k, floor(1/ε) + 1)`; every `q_i` must exceed it.
    pub fn q_floor(&self) -> BigInt {
        let inv: BigInt = self.epsilon.recip().floor().to_integer() + 1;
        inv.max(BigInt::from(self.k))
    }
}

/// `ceil(log H / log 3) + 2`, with the ceiling taken exactly.
pub fn rows_for(h: u64) -> u32 {
    let mut j = 0u32;
    let mut pow = 1u128;
    while pow < h as u128 {
        pow *= 3;
        j += 1;
    }
    j + 2
}

/// Parses `"p/q"` or an integer into a rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Domain(format!("expected a rational like 1/3, got {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CertificateJson", into = "CertificateJson")]
pub struct ProgressionCertificate {
    pub params: SettingParams,
    pub n: u32,
    pub q: Vec<BigInt>,
    /// `k` rows of `n` primes each.
    pub p: Vec<Vec<BigInt>>,
    pub m: BigInt,
    pub a: BigInt,
    pub strengthened_qr: bool,
}

#[derive(Serialize, Deserialize)]
struct CertificateJson {
    sign: Sign,
    epsilon: String,
    k: u32,
    #[serde(rename = "H")]
    h: u64,
    n: u32,
    #[serde(with = "crate::bigint_serde::vec")]
    q: Vec<BigInt>,
    #[serde(with = "crate::bigint_serde::matrix")]
    p: Vec<Vec<BigInt>>,
    #[serde(with = "crate::bigint_serde")]
    m: BigInt,
    #[serde(with = "crate::bigint_serde")]
    a: BigInt,
    strengthened_qr: bool,
}

impl From<ProgressionCertificate> for CertificateJson {
    fn from(c: ProgressionCertificate) -> Self {
        CertificateJson {
            sign: c.params.sign,
            epsilon: format_rational(&c.params.epsilon),
            k: c.params.k,
            h: c.params.h,
            n: c.n,
            q: c.q,
            p: c.p,
            m: c.m,
            a: c.a,
            strengthened_qr: c.strengthened_qr,
        }
    }
}

impl TryFrom<CertificateJson> for ProgressionCertificate {
    type Error = Error;

    fn try_from(j: CertificateJson) -> Result<Self> {
        Ok(ProgressionCertificate {
            params: SettingParams::new(j.sign, parse_rational(&j.epsilon)?, j.k, j.h)?,
            n: j.n,
            q: j.q,
            p: j.p,
            m: j.m,
            a: j.a,
            strengthened_qr: j.strengthened_qr,
        })
    }
}

impl ProgressionCertificate {
    /// `q_i · p_i1^2 ⋯ p_in^2`, the residue of `a + i` modulo `q_i · p_i1^3 ⋯ p_in^3`.
    pub fn target(&self, i: usize) -> (BigInt, BigInt) {
        let q = &self.q[i - 1];
        let row = &self.p[i - 1];
        let sq: BigInt = row.iter().map(|p| p * p).product();
        let cube: BigInt = row.iter().map(|p| p * p * p).product();
        (q * sq, q * cube)
    }

    pub fn k(&self) -> usize {
        self.params.k as usize
    }
}

/// Builds the certificate with the smallest admissible primes.
///
/// With `strengthen_qr`, each `p_ij` is additionally required to satisfy
/// `(q_i / p_ij) = 1`, which keeps the local density at `p_ij` positive.
pub fn construct_setting(params: &SettingParams, strengthen_qr: bool) -> Result<ProgressionCertificate> {
    let k = params.k as usize;
    let n = rows_for(params.h);
    let mut used: BTreeSet<BigInt> = BTreeSet::new();
    let mut q = Vec::with_capacity(k);
    let four = (BigInt::one(), BigInt::from(4));
    for _ in 0..k {
        let min = params.q_floor() + 1;
        let prime = find_prime(&min, std::slice::from_ref(&four), &used)?;
        used.insert(prime.clone());
        q.push(prime);
    }
    let twelve = (BigInt::one(), BigInt::from(12));
    let mut p = Vec::with_capacity(k);
    for qi in &q {
        let mut row = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let mut min = BigInt::from(params.k);
            let prime = loop {
                let cand = find_prime(&min, std::slice::from_ref(&twelve), &used)?;
                if !strengthen_qr || kronecker(qi, &cand) == 1 {
                    break cand;
                }
                min = cand + 1;
            };
            used.insert(prime.clone());
            row.push(prime);
        }
        p.push(row);
    }
    let mut cert = ProgressionCertificate {
        params: params.clone(),
        n,
        q,
        p,
        m: BigInt::zero(),
        a: BigInt::zero(),
        strengthened_qr: strengthen_qr,
    };
    let mut pairs = Vec::with_capacity(k);
    for i in 1..=k {
        let (target, modulus) = cert.target(i);
        pairs.push(((target - i).mod_floor(&modulus), modulus));
    }
    let (a, m) = crt(&pairs)?;
    cert.a = a;
    cert.m = m;
    Ok(cert)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn failed(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Re-derives every condition of the certificate from scratch.
pub fn verify_certificate(cert: &ProgressionCertificate) -> VerificationReport {
    let mut checks = Vec::new();
    let mut push = |name: String, passed: bool, detail: String| {
        checks.push(CheckResult { name, passed, detail });
    };
    let k = cert.params.k as usize;
    let eps = &cert.params.epsilon;

    let n_expected = rows_for(cert.params.h);
    push("rows".into(), cert.n == n_expected, format!("n = {}, expected {n_expected}", cert.n));

    let shape_ok = cert.q.len() == k && cert.p.len() == k && cert.p.iter().all(|r| r.len() == cert.n as usize);
    push("shape".into(), shape_ok, format!("{} q's and {} rows for k = {k}", cert.q.len(), cert.p.len()));
    if !shape_ok {
        return finish(checks);
    }

    let all: Vec<&BigInt> = cert.q.iter().chain(cert.p.iter().flatten()).collect();
    let non_prime: Vec<String> = all.iter().filter(|x| !is_prime(x)).map(|x| x.to_string()).collect();
    push("primality".into(), non_prime.is_empty(), format!("not prime: {non_prime:?}"));
    let distinct = all.iter().collect::<BTreeSet<_>>().len() == all.len();
    push("distinct".into(), distinct, format!("{} primes", all.len()));

    let floor = cert.params.q_floor();
    for (i, qi) in cert.q.iter().enumerate() {
        let i = i + 1;
        push(format!("q-size[i={i}]"), qi > &floor, format!("q = {qi}, must exceed {floor}"));
        push(format!("q-mod-4[i={i}]"), qi.mod_floor(&BigInt::from(4)).is_one(), format!("q = {qi}"));
        let margin = BigRational::new(qi - 1, qi.clone());
        push(
            format!("epsilon-margin[i={i}]"),
            margin > BigRational::one() - eps,
            format!("(q-1)/q = {} vs 1 - epsilon = {}", format_rational(&margin), format_rational(&(BigRational::one() - eps))),
        );
        for (j, pij) in cert.p[i - 1].iter().enumerate() {
            let j = j + 1;
            push(format!("p-size[i={i},j={j}]"), pij >= &BigInt::from(k), format!("p = {pij}, k = {k}"));
            push(
                format!("p-mod-12[i={i},j={j}]"),
                pij.mod_floor(&BigInt::from(12)).is_one(),
                format!("p = {pij}"),
            );
            if cert.strengthened_qr {
                let s = kronecker(qi, pij);
                push(format!("qr[i={i},j={j}]"), s == 1, format!("({qi}/{pij}) = {s}"));
            }
        }
    }

    let m_expected: BigInt =
        cert.q.iter().product::<BigInt>() * cert.p.iter().flatten().map(|p| p * p * p).product::<BigInt>();
    push("modulus".into(), cert.m == m_expected, format!("m = {}, product = {m_expected}", cert.m));
    push(
        "residue-range".into(),
        !cert.a.is_negative() && cert.a < cert.m,
        format!("a = {}", cert.a),
    );
    for i in 1..=k {
        let (target, modulus) = cert.target(i);
        let lhs = (&cert.a + i).mod_floor(&modulus);
        let rhs = target.mod_floor(&modulus);
        push(format!("crt-residue[i={i}]"), lhs == rhs, format!("a + {i} = {lhs}, expected {rhs} mod {modulus}"));
        for (j, pij) in cert.p[i - 1].iter().enumerate() {
            let cube = pij * pij * pij;
            let ok = !(&cert.a + i).is_multiple_of(&cube);
            push(format!("cube-free[i={i},j={j}]", j = j + 1), ok, format!("{pij}^3 vs a + {i}"));
        }
    }
    finish(checks)
}

fn finish(checks: Vec<CheckResult>) -> VerificationReport {
    VerificationReport { passed: checks.iter().all(|c| c.passed), checks }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeWitness {
    #[serde(with = "crate::bigint_serde")]
    pub prime: BigInt,
    pub valuation: u32,
    pub divides_f: bool,
    pub one_mod_three: bool,
    pub symbol: i8,
}

/// Why every cubic field of discriminant `delta` has class number above `H`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuaranteeProof {
    #[serde(with = "crate::bigint_serde")]
    pub delta: BigInt,
    pub i: usize,
    /// No cubic field has this discriminant, so the statement holds vacuously.
    pub vacuous: bool,
    pub reason: Option<String>,
    pub witnesses: Vec<PrimeWitness>,
    pub e: Option<u32>,
    #[serde(with = "crate::bigint_serde::option")]
    pub genus_number: Option<BigInt>,
    /// `3^(n-1)`, which the construction guarantees.
    #[serde(with = "crate::bigint_serde")]
    pub certified_bound: BigInt,
    pub h: u64,
}

pub fn guarantee_check(cert: &ProgressionCertificate, delta: &BigInt, i: usize) -> Result<GuaranteeProof> {
    if i == 0 || i > cert.k() {
        return Err(Error::Precondition(format!("class index {i} outside 1..={}", cert.k())));
    }
    if delta.is_zero() || discshape::sign_of(delta) != cert.params.sign.as_i64() as i8 {
        return Err(Error::Precondition(format!(
            "discriminant {delta} does not have the certificate's sign {}",
            cert.params.sign
        )));
    }
    let want = (&cert.a + i).mod_floor(&cert.m);
    if delta.mod_floor(&cert.m) != want {
        return Err(Error::Precondition(format!("{delta} is not congruent to a + {i} modulo m")));
    }
    let certified_bound = num_traits::pow(BigInt::from(3), (cert.n - 1) as usize);
    let shape = discshape::decompose(delta)?;
    let mut proof = GuaranteeProof {
        delta: delta.clone(),
        i,
        vacuous: false,
        reason: None,
        witnesses: Vec::new(),
        e: None,
        genus_number: None,
        certified_bound: certified_bound.clone(),
        h: cert.params.h,
    };
    if !shape.admissible {
        proof.vacuous = true;
        proof.reason = Some(format!(
            "no cubic field has this discriminant ({})",
            shape.failure_reason.map(|r| r.to_string()).unwrap_or_default()
        ));
        return Ok(proof);
    }
    let d = shape.fundamental()?.clone();
    for p in &cert.p[i - 1] {
        let w = PrimeWitness {
            prime: p.clone(),
            valuation: arith::valuation(delta, p),
            divides_f: shape.f_primes().contains(p),
            one_mod_three: (p % 3u32).is_one(),
            symbol: kronecker(&d, p),
        };
        if w.valuation != 2 || !w.divides_f || !w.one_mod_three || w.symbol != 1 {
            return Err(Error::Inconsistent(format!(
                "prime {p} fails the totally ramified split condition for {delta}: {w:?}"
            )));
        }
        proof.witnesses.push(w);
    }
    let g = genus::genus_number(&shape)?;
    if g.e < cert.n || g.genus_number < certified_bound || certified_bound <= BigInt::from(cert.params.h) {
        return Err(Error::Inconsistent(format!(
            "genus number {} (e = {}) does not reach the certified 3^(n-1) = {certified_bound} > H",
            g.genus_number, g.e
        )));
    }
    proof.e = Some(g.e);
    proof.genus_number = Some(g.genus_number);
    Ok(proof)
}

impl fmt::Display for ProgressionCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a = {} mod m = {} (q = {:?}, p = {:?})", self.a, self.m, self.q, self.p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    fn toy(strengthen: bool) -> ProgressionCertificate {
        let params = SettingParams::new(Sign::Positive, parse_rational("1/3").unwrap(), 1, 1).unwrap();
        construct_setting(&params, strengthen).unwrap()
    }

    #[test]
    fn strengthened_toy() {
        let c = toy(true);
        assert_eq!(c.n, 2);
        assert_eq!(c.q, vec![big(5)]);
        assert_eq!(c.p, vec![vec![big(61), big(109)]]);
        assert_eq!(c.m, big(5) * big(61).pow(3) * big(109).pow(3));
        assert_eq!(c.a, big(221_046_004));
        assert_eq!(c.a, big(5 * 61 * 61 * 109 * 109 - 1));
        assert!(verify_certificate(&c).passed);
    }

    #[test]
    fn literal_toy() {
        let c = toy(false);
        assert_eq!(c.p, vec![vec![big(13), big(37)]]);
        assert_eq!(c.m, big(556_423_205));
        assert_eq!(c.a, big(1_156_804));
        assert_eq!(&c.a + 1, big(5 * 169 * 1369));
        assert!(verify_certificate(&c).passed);
    }

    #[test]
    fn corrupted_residue_fails() {
        let mut c = toy(true);
        c.a += 1;
        let rep = verify_certificate(&c);
        assert!(!rep.passed);
        assert!(!rep.check("crt-residue[i=1]").unwrap().passed);
    }

    #[test]
    fn q_size_boundary() {
        let mut c = toy(true);
        c.q = vec![big(13)];
        assert!(verify_certificate(&c).check("q-size[i=1]").unwrap().passed);
        // floor(1/epsilon) + 1 = 14
        c.params.epsilon = parse_rational("1/13").unwrap();
        assert!(!verify_certificate(&c).check("q-size[i=1]").unwrap().passed);
    }

    #[test]
    fn rows_formula() {
        assert_eq!(rows_for(1), 2);
        assert_eq!(rows_for(3), 3);
        assert_eq!(rows_for(4), 4);
        assert_eq!(rows_for(9), 4);
        for h in 1..=1_000_000u64 {
            let n = rows_for(h);
            assert!(3u128.pow(n - 1) > h as u128);
            // minimality of the ceiling: 3^(n-3) < H unless n = 2
            assert!(n == 2 || 3u128.pow(n - 3) < h as u128);
        }
    }

    #[test]
    fn larger_settings_verify() {
        for (eps, k, h, sign) in [("1/5", 3, 10, Sign::Negative), ("1/2", 2, 100, Sign::Positive), ("2/7", 4, 1, Sign::Negative)] {
            let params = SettingParams::new(sign, parse_rational(eps).unwrap(), k, h).unwrap();
            for strengthen in [true, false] {
                let c = construct_setting(&params, strengthen).unwrap();
                let rep = verify_certificate(&c);
                assert!(rep.passed, "{:?}", rep.failed());
                assert_eq!(construct_setting(&params, strengthen).unwrap(), c);
            }
        }
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let c = toy(true);
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.starts_with("{\"sign\":\"+\",\"epsilon\":\"1/3\",\"k\":1,\"H\":1,\"n\":2"));
        let back: ProgressionCertificate = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        assert_eq!(serde_json::to_string(&back).unwrap(), s);
    }

    #[test]
    fn guarantee_examples() {
        let c = toy(true);
        let delta = &c.a + 1;
        let proof = guarantee_check(&c, &delta, 1).unwrap();
        assert!(!proof.vacuous);
        assert_eq!(proof.certified_bound, big(3));
        assert_eq!(proof.genus_number, Some(big(9)));
        let shifted = guarantee_check(&c, &(&delta + &c.m), 1).unwrap();
        assert_eq!(shifted.certified_bound, big(3));
        assert!(matches!(guarantee_check(&c, &(&delta * 61), 1), Err(Error::Precondition(_))));
        assert!(matches!(guarantee_check(&c, &delta, 2), Err(Error::Precondition(_))));
        assert!(matches!(guarantee_check(&c, &(-&delta), 1), Err(Error::Precondition(_))));
    }

    #[test]
    fn literal_class_is_vacuous() {
        let c = toy(false);
        let proof = guarantee_check(&c, &(&c.a + 1), 1).unwrap();
        assert!(proof.vacuous);
    }

    #[test]
    fn random_class_members() {
        use proptest::prelude::*;
        use proptest::test_runner::{Config, TestRunner};
        for sign in [Sign::Positive, Sign::Negative] {
            let params = SettingParams::new(sign, parse_rational("1/3").unwrap(), 1, 1).unwrap();
            let c = construct_setting(&params, true).unwrap();
            let mut runner = TestRunner::new(Config { cases: 100, ..Config::default() });
            runner
                .run(&(0i64..=1_000_000), |t| {
                    let delta = match sign {
                        Sign::Positive => &c.a + 1 + &c.m * t,
                        Sign::Negative => &c.a + 1 - &c.m * (t + 1),
                    };
                    let proof = guarantee_check(&c, &delta, 1).unwrap();
                    prop_assert!(proof.certified_bound > BigInt::from(c.params.h));
                    if !proof.vacuous {
                        prop_assert!(proof.genus_number.unwrap() >= proof.certified_bound);
                    }
                    Ok(())
                })
                .unwrap();
        }
    }
}
