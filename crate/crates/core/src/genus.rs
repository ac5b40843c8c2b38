//! Genus numbers of cubic fields from the discriminant alone, and the class
//! number lower bound they give.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::arith::kronecker;
use crate::discshape::{self, DiscShape};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenusData {
    #[serde(with = "crate::bigint_serde")]
    pub delta: BigInt,
    pub e: u32,
    pub galois: bool,
    #[serde(with = "crate::bigint_serde")]
    pub genus_number: BigInt,
    /// Any cubic field of this discriminant has class number divisible by this.
    #[serde(with = "crate::bigint_serde")]
    pub class_number_lower_bound: BigInt,
}

/// Number of odd totally ramified primes `p` with `(d/p) = 1`.
///
/// For `p > 3` the symbol and the residue of `p` mod 3 are both evaluated and
/// must agree.
pub fn ramified_qr_count(shape: &DiscShape) -> Result<u32> {
    let d = shape.fundamental()?;
    let mut e = 0;
    for p in discshape::totally_ramified_primes(shape)? {
        let small = p.to_u64();
        if small == Some(2) {
            continue;
        }
        let by_symbol = kronecker(d, &p) == 1;
        if small == Some(3) {
            e += by_symbol as u32;
            continue;
        }
        let by_residue = (&p % 3u32) == BigInt::one();
        if by_symbol != by_residue {
            return Err(Error::Inconsistent(format!(
                "at p = {p} for discriminant {}: ({d}/{p}) = {} but p mod 3 = {}",
                shape.delta,
                kronecker(d, &p),
                &p % 3u32
            )));
        }
        e += by_symbol as u32;
    }
    Ok(e)
}

pub fn genus_number(shape: &DiscShape) -> Result<GenusData> {
    let e = ramified_qr_count(shape)?;
    let galois = crate::arith::is_square(&shape.delta);
    let exponent = if galois {
        e.checked_sub(1).ok_or_else(|| {
            Error::Domain(format!(
                "square discriminant {} has no qualifying totally ramified prime, so no Galois cubic field has it",
                shape.delta
            ))
        })?
    } else {
        e
    };
    let g = num_traits::pow(BigInt::from(3), exponent as usize);
    Ok(GenusData {
        delta: shape.delta.clone(),
        e,
        galois,
        genus_number: g.clone(),
        class_number_lower_bound: g,
    })
}

pub fn class_number_lower_bound(delta: &BigInt) -> Result<BigInt> {
    let shape = discshape::decompose(delta)?;
    Ok(genus_number(&shape)?.class_number_lower_bound)
}

pub fn genus_of(delta: &BigInt) -> Result<GenusData> {
    genus_number(&discshape::decompose(delta)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discshape::decompose;

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn qr_counts() {
        assert_eq!(ramified_qr_count(&decompose(&big(49)).unwrap()).unwrap(), 1);
        assert_eq!(ramified_qr_count(&decompose(&big(-23)).unwrap()).unwrap(), 0);
        assert_eq!(ramified_qr_count(&decompose(&big(3969)).unwrap()).unwrap(), 2);
        assert!(ramified_qr_count(&decompose(&big(25)).unwrap()).is_err());
    }

    #[test]
    fn genus_numbers() {
        assert_eq!(genus_of(&big(49)).unwrap().genus_number, big(1));
        assert_eq!(genus_of(&big(-23)).unwrap().genus_number, big(1));
        // (-23/37) = -1, so 37 cannot divide f alongside d = -23
        let bad = big(-23 * 13 * 13 * 37 * 37);
        assert!(!decompose(&bad).unwrap().admissible);
        assert!(matches!(class_number_lower_bound(&bad), Err(Error::Precondition(_))));
        let delta = big(-23 * 13 * 13 * 31 * 31);
        let g = genus_of(&delta).unwrap();
        assert_eq!((g.e, g.genus_number), (2, big(9)));
        assert_eq!(class_number_lower_bound(&big(3969)).unwrap(), big(3));
        assert_eq!(class_number_lower_bound(&big(-23)).unwrap(), big(1));
        assert_eq!(class_number_lower_bound(&delta).unwrap(), big(9));
    }

    #[test]
    fn galois_without_qualifying_prime_is_an_error() {
        // 1 has the square shape with no ramified prime at all
        assert!(matches!(genus_of(&big(1)), Err(Error::Domain(_))));
    }

    #[test]
    fn appending_a_prime_multiplies_by_three() {
        let mut delta = big(-23);
        let mut expected = big(1);
        for p in [13i64, 31, 73, 127] {
            delta *= big(p * p);
            expected *= 3;
            assert_eq!(class_number_lower_bound(&delta).unwrap(), expected);
        }
    }

    #[test]
    fn satz6_violation_never_reaches_the_consistency_check() {
        // 7 = 1 mod 3 but (-23/7) = -1
        let shape = decompose(&big(-23 * 49)).unwrap();
        assert!(!shape.admissible);
        assert!(matches!(ramified_qr_count(&shape), Err(Error::Precondition(_))));
    }

    #[test]
    fn galois_and_non_galois_cases() {
        // 7^2 * 13^2: Galois, e = 2, so 3
        assert_eq!(class_number_lower_bound(&big(49 * 169)).unwrap(), big(3));
        // 2 ramified never contributes
        assert_eq!(genus_of(&big(-108)).unwrap().e, 0);
    }
}
