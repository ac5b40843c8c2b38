//! Necessary shape conditions for cubic field discriminants.
//!
//! A cubic discriminant has the form `d f^2`, `9 d f^2` or `81 d f^2` with `d`
//! a fundamental discriminant (or 1) and `f` squarefree and prime to 3, and
//! every prime `p | f` satisfies `(d/p) ≡ p (mod 3)`.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, kronecker};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeFailure {
    /// `p^3 | Δ` for some prime `p > 3`.
    CubeDivisor,
    /// No splitting into a fundamental discriminant times an admissible square.
    NonSquareResidueShape,
    /// Some `p | f` has `(d/p) ≢ p (mod 3)`.
    Satz6Condition,
    /// The power of 3 cannot occur.
    ThreeAdic,
}

impl fmt::Display for ShapeFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ShapeFailure::CubeDivisor => "cube-divisor",
            ShapeFailure::NonSquareResidueShape => "non-square-residue-shape",
            ShapeFailure::Satz6Condition => "satz6-condition",
            ShapeFailure::ThreeAdic => "three-adic",
        };
        f.write_str(s)
    }
}

/// `Δ = d · f^2 · 9^w`. The parts are present whenever the splitting exists,
/// even if a later condition fails.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscShape {
    #[serde(with = "crate::bigint_serde")]
    pub delta: BigInt,
    #[serde(with = "crate::bigint_serde::option")]
    pub d: Option<BigInt>,
    #[serde(with = "crate::bigint_serde::option")]
    pub f: Option<BigInt>,
    pub w: Option<u32>,
    pub admissible: bool,
    pub failure_reason: Option<ShapeFailure>,
    /// Primes dividing `f`, increasing.
    #[serde(skip)]
    f_primes: Vec<BigInt>,
}

impl DiscShape {
    fn failed(delta: &BigInt, reason: ShapeFailure) -> Self {
        DiscShape {
            delta: delta.clone(),
            d: None,
            f: None,
            w: None,
            admissible: false,
            failure_reason: Some(reason),
            f_primes: Vec::new(),
        }
    }

    pub fn f_primes(&self) -> &[BigInt] {
        &self.f_primes
    }

    fn require_admissible(&self) -> Result<()> {
        if self.admissible {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "{} is not an admissible cubic discriminant ({})",
                self.delta,
                self.failure_reason.map(|r| r.to_string()).unwrap_or_default()
            )))
        }
    }

    /// The fundamental part `d`; only meaningful for admissible shapes.
    pub fn fundamental(&self) -> Result<&BigInt> {
        self.require_admissible()?;
        Ok(self.d.as_ref().expect("admissible shape carries d"))
    }

    pub fn three_power(&self) -> Result<u32> {
        self.require_admissible()?;
        Ok(self.w.expect("admissible shape carries w"))
    }
}

pub fn decompose(delta: &BigInt) -> Result<DiscShape> {
    let fac = arith::factorize(delta)
        .map_err(|_| Error::Domain("a discriminant must be nonzero".into()))?;
    let two = BigInt::from(2);
    let three = BigInt::from(3);

    if fac.factors.iter().any(|(p, e)| *p > three && *e >= 3) {
        return Ok(DiscShape::failed(delta, ShapeFailure::CubeDivisor));
    }
    let v3 = fac.exponent_of(&three);
    if v3 == 2 || v3 >= 6 {
        return Ok(DiscShape::failed(delta, ShapeFailure::ThreeAdic));
    }
    let w = v3 / 2;

    let mut d_odd = BigInt::from(fac.sign);
    let mut f = BigInt::one();
    let mut f_primes = Vec::new();
    if v3 % 2 == 1 {
        d_odd *= &three;
    }
    for (p, e) in &fac.factors {
        if *p <= three {
            continue;
        }
        if *e == 1 {
            d_odd *= p;
        } else {
            f *= p;
            f_primes.push(p.clone());
        }
    }

    let odd_class = d_odd.mod_floor(&BigInt::from(4)).to_u8().unwrap();
    let v2 = fac.exponent_of(&two);
    let (d, two_in_f) = match v2 {
        0 if odd_class == 1 => (d_odd, false),
        2 if odd_class == 1 => (d_odd, true),
        2 => (d_odd * 4, false),
        3 => (d_odd * 8, false),
        // These carry 2 in f with an even d, which the mod 3 test rejects.
        4 if odd_class == 3 => (d_odd * 4, true),
        5 => (d_odd * 8, true),
        _ => return Ok(DiscShape::failed(delta, ShapeFailure::NonSquareResidueShape)),
    };
    if two_in_f {
        f *= &two;
        f_primes.insert(0, two.clone());
    }
    debug_assert!(arith::is_fundamental_discriminant(&d));

    let satz6 = f_primes.iter().all(|p| {
        let k = kronecker(&d, p) as i64;
        (BigInt::from(k) - p).mod_floor(&three).is_zero()
    });
    Ok(DiscShape {
        delta: delta.clone(),
        d: Some(d),
        f: Some(f),
        w: Some(w),
        admissible: satz6,
        failure_reason: (!satz6).then_some(ShapeFailure::Satz6Condition),
        f_primes,
    })
}

pub fn is_galois_disc(delta: &BigInt) -> Result<bool> {
    decompose(delta)?.require_admissible()?;
    Ok(arith::is_square(delta))
}

pub fn totally_ramified_primes(shape: &DiscShape) -> Result<BTreeSet<BigInt>> {
    let w = shape.three_power()?;
    let mut out: BTreeSet<BigInt> = shape.f_primes.iter().cloned().collect();
    if w >= 1 {
        out.insert(BigInt::from(3));
    }
    Ok(out)
}

/// Convenience for 64-bit discriminants.
pub fn decompose_i64(delta: i64) -> Result<DiscShape> {
    decompose(&BigInt::from(delta))
}

pub(crate) fn sign_of(delta: &BigInt) -> i8 {
    if delta.is_negative() {
        -1
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn decompose_examples() {
        let s = decompose(&big(-108)).unwrap();
        assert_eq!((s.d.clone(), s.f.clone(), s.w), (Some(big(-3)), Some(big(2)), Some(1)));
        assert!(s.admissible);

        let s = decompose(&big(25)).unwrap();
        assert!(!s.admissible);
        assert_eq!(s.failure_reason, Some(ShapeFailure::Satz6Condition));
        assert_eq!((s.d, s.f), (Some(big(1)), Some(big(5))));

        let s = decompose(&big(500)).unwrap();
        assert_eq!(s.failure_reason, Some(ShapeFailure::CubeDivisor));
        assert!(decompose(&big(0)).is_err());
    }

    #[test]
    fn small_field_discriminants_are_admissible() {
        for delta in [-23, -31, -44, -59, -76, -83, -87, -104, -107, -108, 49, 81, 148, 169, 229, 257, 316, 321, 361] {
            let s = decompose(&big(delta)).unwrap();
            assert!(s.admissible, "{delta}: {:?}", s.failure_reason);
            let d = s.d.unwrap();
            let f = s.f.unwrap();
            assert_eq!(d * &f * &f * big(9).pow(s.w.unwrap()), big(delta));
        }
    }

    #[test]
    fn rejects_impossible_shapes() {
        // odd and 3 mod 4
        assert_eq!(decompose(&big(-1)).unwrap().failure_reason, Some(ShapeFailure::NonSquareResidueShape));
        assert_eq!(decompose(&big(2 * 5)).unwrap().failure_reason, Some(ShapeFailure::NonSquareResidueShape));
        assert_eq!(decompose(&big(-9 * 23)).unwrap().failure_reason, Some(ShapeFailure::ThreeAdic));
        assert_eq!(decompose(&big(729 * 5)).unwrap().failure_reason, Some(ShapeFailure::ThreeAdic));
        // 2 | f with even d
        assert_eq!(decompose(&big(-16)).unwrap().failure_reason, Some(ShapeFailure::Satz6Condition));
        assert_eq!(decompose(&big(-16 * 3)).unwrap().failure_reason, Some(ShapeFailure::NonSquareResidueShape));
        // square with a prime 2 mod 3
        assert_eq!(decompose(&big(4)).unwrap().failure_reason, Some(ShapeFailure::Satz6Condition));
    }

    #[test]
    fn galois_examples() {
        assert!(is_galois_disc(&big(49)).unwrap());
        assert!(!is_galois_disc(&big(-23)).unwrap());
        assert!(is_galois_disc(&big(3969)).unwrap());
        assert!(is_galois_disc(&big(25)).is_err());
    }

    #[test]
    fn ramified_examples() {
        let set = |v: &[i64]| v.iter().map(|x| big(*x)).collect::<BTreeSet<_>>();
        assert_eq!(totally_ramified_primes(&decompose(&big(-108)).unwrap()).unwrap(), set(&[2, 3]));
        assert_eq!(totally_ramified_primes(&decompose(&big(-23)).unwrap()).unwrap(), set(&[]));
        assert_eq!(totally_ramified_primes(&decompose(&big(3969)).unwrap()).unwrap(), set(&[3, 7]));
    }

    #[test]
    fn reconstruction_over_a_range() {
        for delta in (-20_000i64..20_000).filter(|x| *x != 0) {
            let s = decompose(&big(delta)).unwrap();
            if s.admissible {
                let f = s.f.clone().unwrap();
                assert_eq!(s.d.clone().unwrap() * &f * &f * big(9).pow(s.w.unwrap()), big(delta));
                assert!(arith::is_fundamental_discriminant(s.d.as_ref().unwrap()));
                assert!(!(&f % 3u8).is_zero());
                assert_eq!(sign_of(&big(delta)), sign_of(s.d.as_ref().unwrap()));
            }
        }
    }
}
