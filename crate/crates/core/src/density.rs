//! Densities `C(m, a)` of cubic field discriminants in residue classes, in
//! exact rational arithmetic.
//!
//! For `p > 3` the local factors are
//!
//! | class mod `p^r`            | density                          | kind        |
//! |----------------------------|----------------------------------|-------------|
//! | `r = 1`, `p ∤ a`           | `p^2 / (p^3 - 1)`                | exact       |
//! | `r = 1`, `a = 0`           | `(p^2 - p) / (p^3 - 1)`          | lower bound |
//! | `r = 2`, `p ∤ a`           | `p / (p^3 - 1)`                  | exact       |
//! | `r = 2`, `v_p(a) = 1`      | `p / (p^3 - 1)`                  | exact       |
//! | `r = 2`, `a = 0`           | `(p - 1) / (p^3 - 1)`            | lower bound |
//! | `r = 3`, `p ∤ a`           | `1 / (p^3 - 1)`                  | exact       |
//! | `r = 3`, `a = a' p^2`      | `(1 + (-3a'/p)) / (p^3 - 1)`     | exact       |
//! | `r = 3`, `a = 0`           | `0`                              | exact       |
//!
//! and `C(m, a)` is their product over `p^r || m`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, kronecker};
use crate::enumerate::Sign;
use crate::error::{Error, Result};
use crate::progression::{format_rational, ProgressionCertificate};

/// `ζ(3)` to 60 decimal places.
pub const ZETA3: &str = "1.202056903159594285399738161511449990764986292340498881792271";

/// Exponent of the 3-torsion bound for quadratic class groups.
pub const KAPPA: f64 = 0.3193;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub c_plus: u32,
    pub c_minus: u32,
    pub k_plus: f64,
    pub k_minus: f64,
    pub zeta3: String,
    pub kappa: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            c_plus: 1,
            c_minus: 3,
            k_plus: 1.0,
            k_minus: 3f64.sqrt(),
            zeta3: ZETA3.to_string(),
            kappa: KAPPA,
        }
    }
}

pub fn zeta3_rational() -> BigRational {
    decimal_to_rational(ZETA3)
}

fn decimal_to_rational(s: &str) -> BigRational {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    let digits: BigInt = format!("{int}{frac}").parse().expect("decimal literal");
    BigRational::new(digits, num_traits::pow(BigInt::from(10), frac.len()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensityKind {
    Exact,
    LowerBound,
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Formula {
    /// Unit classes.
    #[serde(rename = "coprime")]
    Coprime,
    #[serde(rename = "p2-local")]
    P2Local,
    #[serde(rename = "p3-local")]
    P3Local,
    #[serde(rename = "zero-cube")]
    ZeroCube,
    #[serde(rename = "class0-bound")]
    Class0Bound,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(with = "crate::bigint_serde")]
    pub prime: BigInt,
    pub exponent: u32,
    pub formula: Formula,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityValue {
    #[serde(with = "rational_string")]
    pub value: BigRational,
    pub kind: DensityKind,
    /// Mass of the class if the densities of all other classes are exact:
    /// equal to `value` for exact densities, the complement for class 0.
    #[serde(with = "rational_string::option", default, skip_serializing_if = "Option::is_none")]
    pub implied: Option<BigRational>,
    pub provenance: Vec<Provenance>,
}

impl DensityValue {
    fn exact(value: BigRational, prime: &BigInt, exponent: u32, formula: Formula) -> Self {
        let kind = if value.is_zero() { DensityKind::Zero } else { DensityKind::Exact };
        DensityValue {
            implied: Some(value.clone()),
            value,
            kind,
            provenance: vec![Provenance { prime: prime.clone(), exponent, formula }],
        }
    }

    pub fn is_exact(&self) -> bool {
        self.kind != DensityKind::LowerBound
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.value)
    }
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    // scale to keep precision for tiny values
    let scale = 60usize;
    let num = r.numer() * num_traits::pow(BigInt::from(10), scale) / r.denom();
    num.to_f64().unwrap_or(f64::NAN) / 10f64.powi(scale as i32)
}

/// Ten significant digits, as printed by the CLI.
pub fn decimal_string(r: &BigRational) -> String {
    let x = ratio_to_f64(r);
    if x == 0.0 {
        "0".into()
    } else {
        format!("{:.9e}", x)
    }
}

mod rational_string {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_integer() {
            s.serialize_str(&v.numer().to_string())
        } else {
            s.serialize_str(&format_rational(v))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        crate::progression::parse_rational(&s).map_err(serde::de::Error::custom)
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(v: &Option<BigRational>, s: S) -> std::result::Result<S::Ok, S::Error> {
            match v {
                Some(r) => super::serialize(r, s),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<BigRational>, D::Error> {
            let s = Option::<String>::deserialize(d)?;
            s.map(|s| crate::progression::parse_rational(&s).map_err(serde::de::Error::custom))
                .transpose()
        }
    }
}

fn ratio(n: BigInt, d: BigInt) -> BigRational {
    BigRational::new(n, d)
}

/// Local density of `Δ ≡ a (mod p^r)`.
pub fn local_density(p: &BigInt, r: u32, a: &BigInt) -> Result<DensityValue> {
    if p <= &BigInt::from(3) {
        return Err(Error::UnsupportedPrime(p.to_string()));
    }
    if !arith::is_prime(p) {
        return Err(Error::Precondition(format!("{p} is not prime")));
    }
    if !(1..=3).contains(&r) {
        return Err(Error::UnsupportedModulus(format!("exponent {r} of {p} is outside 1..=3")));
    }
    let pr = num_traits::pow(p.clone(), r as usize);
    let a = a.mod_floor(&pr);
    let v = if a.is_zero() { r } else { arith::valuation(&a, p) };
    let p2 = p * p;
    let den = &p2 * p - 1;
    Ok(match (r, v) {
        (1, 0) => DensityValue::exact(ratio(p2, den), p, 1, Formula::Coprime),
        (1, _) => DensityValue {
            value: ratio(&p2 - p, den.clone()),
            kind: DensityKind::LowerBound,
            implied: Some(ratio(&p2 - 1, den)),
            provenance: vec![Provenance { prime: p.clone(), exponent: 1, formula: Formula::Class0Bound }],
        },
        (2, 0) => DensityValue::exact(ratio(p.clone(), den), p, 2, Formula::Coprime),
        (2, 1) => DensityValue::exact(ratio(p.clone(), den), p, 2, Formula::P2Local),
        (2, _) => {
            // the classes j p^2 mod p^3 for j = 1..p-1 sum to (p - 1)/(p^3 - 1)
            let value = ratio(p - 1, den);
            DensityValue {
                implied: Some(value.clone()),
                value,
                kind: DensityKind::LowerBound,
                provenance: vec![Provenance { prime: p.clone(), exponent: 2, formula: Formula::Class0Bound }],
            }
        }
        (3, 0) => DensityValue::exact(ratio(BigInt::one(), den), p, 3, Formula::Coprime),
        (3, 1) => {
            return Err(Error::UnsupportedModulus(format!(
                "no local density is available for classes of exact valuation 1 modulo {p}^3"
            )))
        }
        (3, 2) => {
            let cofactor = &a / &p2;
            let s = kronecker(&(cofactor * -3), p);
            DensityValue::exact(ratio(BigInt::from(1 + s), den), p, 3, Formula::P3Local)
        }
        _ => DensityValue::exact(BigRational::zero(), p, 3, Formula::ZeroCube),
    })
}

fn modulus_parts(m: &BigInt) -> Result<Vec<(BigInt, u32)>> {
    if !m.is_positive() {
        return Err(Error::UnsupportedModulus(format!("modulus must be positive, got {m}")));
    }
    let fac = arith::factorize(m)?;
    for (p, e) in &fac.factors {
        if p <= &BigInt::from(3) {
            return Err(Error::UnsupportedModulus(format!("{m} is divisible by {p}; only primes > 3 are supported")));
        }
        if *e > 3 {
            return Err(Error::UnsupportedModulus(format!("{p}^{e} divides {m}; exponents above 3 are not supported")));
        }
    }
    Ok(fac.factors)
}

/// `C(m, a)` as the product of local densities.
pub fn density(m: &BigInt, a: &BigInt) -> Result<DensityValue> {
    let parts = modulus_parts(m)?;
    let mut value = BigRational::one();
    let mut implied = Some(BigRational::one());
    let mut provenance = Vec::new();
    let mut kind = DensityKind::Exact;
    for (p, r) in &parts {
        let local = local_density(p, *r, a)?;
        value *= &local.value;
        implied = match (implied, &local.implied) {
            (Some(x), Some(y)) => Some(x * y),
            _ => None,
        };
        kind = match (kind, local.kind) {
            (DensityKind::Zero, _) | (_, DensityKind::Zero) => DensityKind::Zero,
            (DensityKind::LowerBound, _) | (_, DensityKind::LowerBound) => DensityKind::LowerBound,
            _ => DensityKind::Exact,
        };
        provenance.extend(local.provenance);
    }
    if kind == DensityKind::Zero {
        value = BigRational::zero();
    }
    Ok(DensityValue { value, kind, implied, provenance })
}

/// `(1/m)(1 - ε)^t` with `t` the number of primes exactly dividing `m`.
pub fn density_lower_bound(m: &BigInt, a: &BigInt, epsilon: &BigRational) -> Result<DensityValue> {
    let parts = modulus_parts(m)?;
    let floor: BigInt = epsilon.recip().floor().to_integer() + 1;
    let floor = floor.max(BigInt::from(3));
    let mut provenance = Vec::new();
    let mut t = 0usize;
    for (p, r) in &parts {
        if p <= &floor {
            return Err(Error::Precondition(format!(
                "prime {p} of the modulus must exceed max(3, floor(1/epsilon) + 1) = {floor}"
            )));
        }
        let local = local_density(p, *r, a)?;
        if local.kind == DensityKind::Zero {
            return Err(Error::ZeroDensity {
                prime: p.to_string(),
                detail: format!("the class {} mod {p}^{r} has density 0", a.mod_floor(&num_traits::pow(p.clone(), *r as usize))),
            });
        }
        if *r == 1 {
            t += 1;
        }
        provenance.extend(local.provenance);
    }
    let value = num_traits::pow(BigRational::one() - epsilon, t) / BigRational::from_integer(m.clone());
    Ok(DensityValue { value, kind: DensityKind::LowerBound, implied: None, provenance })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    /// `C(m,a) C^± X / (12 ζ(3))` when the density is exact.
    pub value: Option<f64>,
    /// The same main term evaluated at the density lower bound.
    pub lower: f64,
    /// The main term at the implied mass, when there is one.
    pub implied: Option<f64>,
    pub density: DensityValue,
}

/// Main term of `N3±(X; m, a)`; the secondary term of order `X^(5/6)` is omitted.
pub fn predict_count(sign: Sign, x: i64, m: &BigInt, a: &BigInt) -> Result<Prediction> {
    let dens = density(m, a)?;
    let factor = BigRational::from_integer(BigInt::from(sign.count_constant()) * x)
        / (BigRational::from_integer(BigInt::from(12)) * zeta3_rational());
    let eval = |r: &BigRational| ratio_to_f64(&(r * &factor));
    Ok(Prediction {
        value: dens.is_exact().then(|| eval(&dens.value)),
        lower: eval(&dens.value),
        implied: dens.implied.as_ref().map(eval),
        density: dens,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalFactorEntry {
    #[serde(with = "crate::bigint_serde")]
    pub prime: BigInt,
    pub exponent: u32,
    #[serde(with = "rational_string")]
    pub value: BigRational,
    pub kind: DensityKind,
    /// `(−3a'/p)` for the classes of valuation 2 modulo `p^3`.
    pub symbol: Option<i8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassDensityCheck {
    pub i: usize,
    pub coprime_to_other_rows: bool,
    pub factors: Vec<LocalFactorEntry>,
    pub vanishing: Vec<VanishingFactor>,
    /// Product of the local values (a lower bound because of the class-0 factor at `q_i`).
    #[serde(with = "rational_string")]
    pub product: BigRational,
    /// `(1 − ε)/m`.
    #[serde(with = "rational_string")]
    pub target: BigRational,
    pub certified: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VanishingFactor {
    #[serde(with = "crate::bigint_serde")]
    pub prime: BigInt,
    #[serde(with = "crate::bigint_serde")]
    pub q: BigInt,
    /// `(q_i / p_ij)`, equal to the symbol that decides the local factor.
    pub kronecker: i8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SettingDensityReport {
    pub strengthened_qr: bool,
    pub note: Option<String>,
    pub classes: Vec<ClassDensityCheck>,
    pub passed: bool,
}

/// Checks `C(m, a + i) > (1 − ε)/m` for every `i`.
pub fn setting_density_check(cert: &ProgressionCertificate) -> Result<SettingDensityReport> {
    let eps = &cert.params.epsilon;
    let target = (BigRational::one() - eps) / BigRational::from_integer(cert.m.clone());
    let mut classes = Vec::new();
    for i in 1..=cert.k() {
        let ai = &cert.a + i;
        let mut factors = Vec::new();
        let mut vanishing = Vec::new();
        let mut product = BigRational::one();
        let mut coprime = true;
        for (h, qh) in cert.q.iter().enumerate() {
            let h = h + 1;
            let local = local_density(qh, 1, &ai)?;
            if h != i && local.provenance[0].formula != Formula::Coprime {
                coprime = false;
            }
            product *= &local.value;
            factors.push(LocalFactorEntry { prime: qh.clone(), exponent: 1, value: local.value, kind: local.kind, symbol: None });
            for pj in &cert.p[h - 1] {
                let local = local_density(pj, 3, &ai)?;
                let symbol = if local.provenance[0].formula == Formula::P3Local {
                    let p2 = pj * pj;
                    Some(kronecker(&(ai.mod_floor(&(&p2 * pj)) / &p2 * -3), pj))
                } else {
                    None
                };
                if h != i && local.provenance[0].formula != Formula::Coprime {
                    coprime = false;
                }
                if local.kind == DensityKind::Zero {
                    vanishing.push(VanishingFactor { prime: pj.clone(), q: qh.clone(), kronecker: kronecker(qh, pj) });
                }
                product *= &local.value;
                factors.push(LocalFactorEntry { prime: pj.clone(), exponent: 3, value: local.value, kind: local.kind, symbol });
            }
        }
        let certified = vanishing.is_empty() && coprime && product > target;
        classes.push(ClassDensityCheck { i, coprime_to_other_rows: coprime, factors, vanishing, product, target: target.clone(), certified });
    }
    let passed = classes.iter().all(|c| c.certified);
    let note = (!cert.strengthened_qr).then(|| {
        "the certificate does not enforce (q_i/p_ij) = 1, so local factors at p_ij may vanish".to_string()
    });
    Ok(SettingDensityReport { strengthened_qr: cert.strengthened_qr, note, classes, passed })
}
