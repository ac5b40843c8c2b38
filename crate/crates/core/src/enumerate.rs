//! Exhaustive tabulation of cubic fields by discriminant.
//!
//! Each field corresponds to exactly one canonical form (see
//! [`CubicForm::reduce`]). The search runs over coefficient boxes implied by
//! the reduction conditions and keeps the irreducible, primitive, maximal
//! forms that are their own canonical representative.
//!
//! Negative discriminant, reduced and `a > 0`:
//!
//! ```text
//!   a <= (16X/27)^(1/4)
//!   |theta| <= 1/2 + (X/3)^(1/4) / a          (theta the real root)
//!   |z|^2   <= 1/4 + (X / 4a^4)^(1/3)         (z the complex root)
//!   b = -a(theta + 2 Re z),  c = a(2 theta Re z + |z|^2)
//! ```
//!
//! Positive discriminant, Hessian `(P, Q, R)` reduced: `1 <= P <= sqrt(X)`,
//! `|Q| <= P`, which bounds `c` given `(a, b)` and `d` given `(a, b, c)`.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::CubicForm;

/// Largest `X` accepted by table enumeration.
pub const DEFAULT_CAPACITY: i64 = 100_000_000;

/// Largest `|Δ|` accepted by the single-discriminant search, which solves
/// for the last coefficient instead of scanning it.
pub const MULTIPLICITY_CAPACITY: i64 = 10_000_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
}

impl Sign {
    pub fn of(delta: i64) -> Option<Sign> {
        match delta.signum() {
            1 => Some(Sign::Positive),
            -1 => Some(Sign::Negative),
            _ => None,
        }
    }

    pub fn as_i64(self) -> i64 {
        match self {
            Sign::Positive => 1,
            Sign::Negative => -1,
        }
    }

    /// `C^+ = 1`, `C^- = 3`.
    pub fn count_constant(self) -> u32 {
        match self {
            Sign::Positive => 1,
            Sign::Negative => 3,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Sign::Positive => "pos",
            Sign::Negative => "neg",
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Positive => "+",
            Sign::Negative => "-",
        })
    }
}

impl FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "pos" | "positive" | "plus" => Ok(Sign::Positive),
            "-" | "neg" | "negative" | "minus" => Ok(Sign::Negative),
            _ => Err(Error::Domain(format!("sign must be + or -, got {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldRecord {
    pub disc: i64,
    pub form: CubicForm,
    pub galois: bool,
}

impl FieldRecord {
    pub fn new(disc: i64, form: CubicForm) -> Self {
        FieldRecord { disc, form, galois: disc > 0 && crate::arith::is_square_u64(disc as u64) }
    }

    fn sort_key(&self) -> (u64, CubicForm) {
        (self.disc.unsigned_abs(), self.form)
    }
}

/// All cubic fields of one signature with `0 < ±Δ <= bound`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldTable {
    pub sign: Sign,
    pub bound: i64,
    /// Sorted by `(|disc|, form)`.
    pub records: Vec<FieldRecord>,
}

impl FieldTable {
    pub fn count(&self) -> u64 {
        self.records.len() as u64
    }

    /// Fields with `|Δ| < x` (the strict counting convention).
    pub fn count_below(&self, x: i64) -> Result<u64> {
        self.count_upto(x - 1)
    }

    /// Fields with `|Δ| <= x`, for `x` up to the table bound.
    pub fn count_upto(&self, x: i64) -> Result<u64> {
        if x > self.bound {
            return Err(Error::Precondition(format!(
                "table only reaches {} but {x} was requested",
                self.bound
            )));
        }
        let x = x.max(0) as u64;
        Ok(self.records.partition_point(|r| r.disc.unsigned_abs() <= x) as u64)
    }

    pub fn count_progression(&self, m: &BigInt, a: &BigInt) -> Result<u64> {
        check_residue(m, a)?;
        Ok(match (m.to_i128(), a.to_i128()) {
            (Some(m), Some(a)) => self
                .records
                .iter()
                .filter(|r| (r.disc as i128).rem_euclid(m) == a)
                .count() as u64,
            // A modulus beyond 128 bits exceeds every discriminant, so the
            // class is met only by a discriminant equal to its representative.
            _ => self
                .records
                .iter()
                .filter(|r| &BigInt::from(r.disc).mod_floor(m) == a)
                .count() as u64,
        })
    }

    pub fn multiplicity(&self, delta: i64) -> u64 {
        let lo = self.records.partition_point(|r| r.sort_key().0 < delta.unsigned_abs());
        self.records[lo..]
            .iter()
            .take_while(|r| r.disc.unsigned_abs() == delta.unsigned_abs())
            .filter(|r| r.disc == delta)
            .count() as u64
    }

    /// The sub-table with `|Δ| <= x`.
    pub fn truncated(&self, x: i64) -> Result<FieldTable> {
        let n = self.count_upto(x)? as usize;
        Ok(FieldTable { sign: self.sign, bound: x, records: self.records[..n].to_vec() })
    }

    /// Checks sortedness, sign, bound, and that every form is canonical.
    pub fn validate(&self) -> Result<()> {
        for w in self.records.windows(2) {
            if w[0].sort_key() >= w[1].sort_key() {
                return Err(Error::Inconsistent(format!(
                    "records out of order or duplicated: {:?} then {:?}",
                    w[0], w[1]
                )));
            }
        }
        for r in &self.records {
            if Sign::of(r.disc) != Some(self.sign) || r.disc.unsigned_abs() > self.bound as u64 {
                return Err(Error::Inconsistent(format!("record {r:?} outside table range")));
            }
            if r.form.disc()? != r.disc {
                return Err(Error::Inconsistent(format!("record {r:?} has the wrong discriminant")));
            }
        }
        Ok(())
    }
}

pub(crate) fn check_residue(m: &BigInt, a: &BigInt) -> Result<()> {
    if !m.is_positive() {
        return Err(Error::Domain(format!("modulus must be positive, got {m}")));
    }
    if a.is_negative() || a >= m {
        return Err(Error::Domain(format!("residue {a} is not in [0, {m})")));
    }
    Ok(())
}

/// Enumeration settings. Results never depend on `workers`.
#[derive(Clone, Copy, Debug)]
pub struct Enumerator {
    pub workers: usize,
    pub capacity: i64,
}

impl Default for Enumerator {
    fn default() -> Self {
        Enumerator {
            workers: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            capacity: DEFAULT_CAPACITY,
        }
    }
}

impl Enumerator {
    pub fn with_workers(workers: usize) -> Self {
        Enumerator { workers: workers.max(1), ..Default::default() }
    }

    pub fn enumerate(&self, sign: Sign, x: i64) -> Result<FieldTable> {
        if x < 0 {
            return Err(Error::Domain(format!("bound must be nonnegative, got {x}")));
        }
        let records = self.enumerate_range(sign, 0, x)?;
        Ok(FieldTable { sign, bound: x, records })
    }

    /// Fields with `lo < |Δ| <= hi`, sorted.
    pub fn enumerate_range(&self, sign: Sign, lo: i64, hi: i64) -> Result<Vec<FieldRecord>> {
        if hi > self.capacity {
            return Err(Error::Capacity(format!(
                "|disc| bound {hi} exceeds the enumeration capacity {}; use a smaller X or raise the capacity",
                self.capacity
            )));
        }
        if hi <= lo.max(0) {
            return Ok(Vec::new());
        }
        let lo = lo.max(0);
        let units = work_units(sign, hi);
        let next = AtomicUsize::new(0);
        let batches: Mutex<Vec<Vec<FieldRecord>>> = Mutex::new(Vec::new());
        let failure: Mutex<Option<Error>> = Mutex::new(None);
        std::thread::scope(|s| {
            for _ in 0..self.workers.max(1) {
                s.spawn(|| {
                    let mut local = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        let Some(&(a, b)) = units.get(i) else { break };
                        let res = match sign {
                            Sign::Negative => scan_negative(a, b, lo, hi, &mut local),
                            Sign::Positive => scan_positive(a, b, lo, hi, &mut local),
                        };
                        if let Err(e) = res {
                            failure.lock().unwrap().get_or_insert(e);
                            break;
                        }
                    }
                    local.sort_unstable_by_key(FieldRecord::sort_key);
                    batches.lock().unwrap().push(local);
                });
            }
        });
        if let Some(e) = failure.into_inner().unwrap() {
            return Err(e);
        }
        Ok(merge_batches(batches.into_inner().unwrap()))
    }

    /// Canonical forms of all fields with discriminant exactly `delta`.
    pub fn fields_with_disc(&self, delta: i64) -> Result<Vec<FieldRecord>> {
        let sign = Sign::of(delta).ok_or_else(|| Error::Domain("discriminant 0".into()))?;
        let x = delta.unsigned_abs();
        if x > MULTIPLICITY_CAPACITY as u64 {
            return Err(Error::Capacity(format!(
                "|disc| = {x} exceeds the single-discriminant capacity {MULTIPLICITY_CAPACITY}"
            )));
        }
        let x = x as i64;
        let units = work_units(sign, x);
        let next = AtomicUsize::new(0);
        let found: Mutex<Vec<FieldRecord>> = Mutex::new(Vec::new());
        let failure: Mutex<Option<Error>> = Mutex::new(None);
        std::thread::scope(|s| {
            for _ in 0..self.workers.max(1) {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(&(a, b)) = units.get(i) else { break };
                    let mut local = Vec::new();
                    if let Err(e) = solve_for_d(sign, a, b, delta, &mut local) {
                        failure.lock().unwrap().get_or_insert(e);
                        break;
                    }
                    found.lock().unwrap().extend(local);
                });
            }
        });
        if let Some(e) = failure.into_inner().unwrap() {
            return Err(e);
        }
        let mut out = found.into_inner().unwrap();
        out.sort_unstable_by_key(FieldRecord::sort_key);
        Ok(out)
    }
}

/// k-way merge of individually sorted batches.
fn merge_batches(mut batches: Vec<Vec<FieldRecord>>) -> Vec<FieldRecord> {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;
    batches.retain(|b| !b.is_empty());
    let total = batches.iter().map(Vec::len).sum();
    let mut out = Vec::with_capacity(total);
    let mut heap = BinaryHeap::new();
    let mut pos = vec![0usize; batches.len()];
    for (i, b) in batches.iter().enumerate() {
        heap.push(Reverse((b[0].sort_key(), i)));
    }
    while let Some(Reverse((_, i))) = heap.pop() {
        out.push(batches[i][pos[i]]);
        pos[i] += 1;
        if let Some(r) = batches[i].get(pos[i]) {
            heap.push(Reverse((r.sort_key(), i)));
        }
    }
    out
}

fn a_max(x: i64) -> i64 {
    ((16.0 * x as f64 / 27.0).powf(0.25)).floor() as i64 + 1
}

fn theta_max(a: i64, x: i64) -> f64 {
    0.5 + (x as f64 / 3.0).powf(0.25) / a as f64
}

fn z2_max(a: i64, x: i64) -> f64 {
    0.25 + (x as f64 / (4.0 * (a as f64).powi(4))).cbrt()
}

fn b_min(sign: Sign, a: i64, x: i64) -> i64 {
    let af = a as f64;
    match sign {
        Sign::Negative => -((af * theta_max(a, x) + af).ceil() as i64) - 1,
        Sign::Positive => -((1.5 * af + (x as f64).powf(0.25)).ceil() as i64) - 1,
    }
}

/// `(a, b)` pairs covering the search, in a fixed order.
fn work_units(sign: Sign, x: i64) -> Vec<(i64, i64)> {
    let mut units = Vec::new();
    for a in 1..=a_max(x) {
        for b in b_min(sign, a, x)..=0 {
            units.push((a, b));
        }
    }
    units
}

fn c_range(sign: Sign, a: i64, b: i64, x: i64) -> (i64, i64) {
    let (af, bf) = (a as f64, b as f64);
    match sign {
        Sign::Negative => {
            // nonempty window for ad - bc forces c > -a - b^2/a
            let lo = (-af - bf * bf / af).floor() as i64;
            let hi = (af * (theta_max(a, x) + z2_max(a, x))).ceil() as i64 + 1;
            (lo, hi)
        }
        Sign::Positive => {
            // 1 <= P = b^2 - 3ac <= sqrt(X)
            let lo = ((bf * bf - (x as f64).sqrt()) / (3.0 * af)).floor() as i64 - 1;
            let hi = (b * b - 1).div_euclid(3 * a);
            (lo, hi)
        }
    }
}

#[inline]
fn disc_fast(a: i64, b: i64, c: i64, d: i64) -> i128 {
    let (a, b, c, d) = (a as i128, b as i128, c as i128, d as i128);
    18 * a * b * c * d + b * b * c * c - 4 * a * c * c * c - 4 * b * b * b * d - 27 * a * a * d * d
}

fn accept(form: CubicForm, disc: i64, out: &mut Vec<FieldRecord>) -> Result<()> {
    if form.is_primitive() && form.is_irreducible() && form.is_maximal_with_disc(disc)? {
        out.push(FieldRecord::new(disc, form));
    }
    Ok(())
}

/// Real roots of `-27a^2 t^2 + beta t + gamma + x = 0`, widened by one.
fn d_window_for_disc_at_least(a: i64, beta: i128, gamma: i128, x: i64) -> Option<(i64, i64)> {
    let qa = 27.0 * (a as f64) * (a as f64);
    let (bf, gf) = (beta as f64, gamma as f64 + x as f64);
    let dq = bf * bf + 4.0 * qa * gf;
    if dq < 0.0 {
        return None;
    }
    let s = dq.sqrt();
    let r1 = (bf - s) / (2.0 * qa);
    let r2 = (bf + s) / (2.0 * qa);
    Some((r1.floor() as i64 - 1, r2.ceil() as i64 + 1))
}

fn scan_negative(a: i64, b: i64, lo: i64, hi: i64, out: &mut Vec<FieldRecord>) -> Result<()> {
    let (c_lo, c_hi) = c_range(Sign::Negative, a, b, hi);
    let (ai, bi) = (a as i128, b as i128);
    for c in c_lo..=c_hi {
        let ci = c as i128;
        // -(a-b)^2 - ac < ad - bc < (a+b)^2 + ac
        let w_lo = bi * ci - (ai - bi) * (ai - bi) - ai * ci;
        let w_hi = bi * ci + (ai + bi) * (ai + bi) + ai * ci;
        if w_hi - w_lo <= 1 {
            continue;
        }
        let mut d_lo = (w_lo.div_euclid(ai) + 1) as i64;
        let mut d_hi = ((w_hi - 1).div_euclid(ai)) as i64;
        if b == 0 {
            d_hi = d_hi.min(-1);
        }
        let beta = 18 * ai * bi * ci - 4 * bi * bi * bi;
        let gamma = bi * bi * ci * ci - 4 * ai * ci * ci * ci;
        match d_window_for_disc_at_least(a, beta, gamma, hi) {
            Some((r1, r2)) => {
                d_lo = d_lo.max(r1);
                d_hi = d_hi.min(r2);
            }
            None => continue,
        }
        for d in d_lo..=d_hi {
            let disc = disc_fast(a, b, c, d);
            if disc >= 0 || -disc > hi as i128 || -disc <= lo as i128 {
                continue;
            }
            let di = d as i128;
            if di * di - ai * ai + ai * ci - bi * di <= 0 {
                continue;
            }
            accept(CubicForm::new(a, b, c, d), disc as i64, out)?;
        }
    }
    Ok(())
}

fn scan_positive(a: i64, b: i64, lo: i64, hi: i64, out: &mut Vec<FieldRecord>) -> Result<()> {
    let (c_lo, c_hi) = c_range(Sign::Positive, a, b, hi);
    let (ai, bi) = (a as i128, b as i128);
    for c in c_lo..=c_hi {
        let ci = c as i128;
        let p = bi * bi - 3 * ai * ci;
        if p < 1 || p * p > hi as i128 {
            continue;
        }
        // |bc - 9ad| <= P
        let nine_a = 9 * ai;
        let d_lo = ceil_div(bi * ci - p, nine_a) as i64;
        let d_hi = (bi * ci + p).div_euclid(nine_a) as i64;
        for d in d_lo..=d_hi {
            if b == 0 && d >= 0 {
                continue;
            }
            let di = d as i128;
            let q = bi * ci - 9 * ai * di;
            let r = ci * ci - 3 * bi * di;
            if r < p {
                continue;
            }
            let disc = disc_fast(a, b, c, d);
            if disc <= lo as i128 || disc > hi as i128 {
                continue;
            }
            let form = CubicForm::new(a, b, c, d);
            // Off the boundary the only other reduced representative is
            // (a, -b, c, -d), which the sign conditions on b and d exclude.
            if (q.abs() == p || p == r) && (!form.is_irreducible() || form.reduce()? != form) {
                continue;
            }
            accept(form, disc as i64, out)?;
        }
    }
    Ok(())
}

fn ceil_div(n: i128, d: i128) -> i128 {
    -((-n).div_euclid(d))
}

/// Integer square root of a nonnegative `i128`, or `None` if not a square.
fn exact_sqrt(n: i128) -> Option<i128> {
    if n < 0 {
        return None;
    }
    let r = (n as u128).isqrt() as i128;
    (r * r == n).then_some(r)
}

fn solve_for_d(sign: Sign, a: i64, b: i64, delta: i64, out: &mut Vec<FieldRecord>) -> Result<()> {
    let x = delta.abs();
    let (c_lo, c_hi) = c_range(sign, a, b, x);
    let (ai, bi) = (a as i128, b as i128);
    let di = delta as i128;
    for c in c_lo..=c_hi {
        let ci = c as i128;
        if sign == Sign::Positive {
            let p = bi * bi - 3 * ai * ci;
            if p < 1 || p * p > x as i128 {
                continue;
            }
        }
        // 27a^2 d^2 - beta d + (delta - gamma) = 0
        let beta = 18 * ai * bi * ci - 4 * bi * bi * bi;
        let gamma = bi * bi * ci * ci - 4 * ai * ci * ci * ci;
        let qa = 27 * ai * ai;
        let Some(s) = beta
            .checked_mul(beta)
            .and_then(|bb| bb.checked_sub(4 * qa * (di - gamma)))
            .and_then(exact_sqrt)
        else {
            continue;
        };
        let mut roots = vec![beta - s, beta + s];
        roots.dedup();
        for num in roots {
            if num % (2 * qa) != 0 {
                continue;
            }
            let d = i64::try_from(num / (2 * qa)).map_err(|_| Error::overflow("solved coefficient"))?;
            let form = CubicForm::new(a, b, c, d);
            if form.disc_i128()? != di {
                continue;
            }
            if form.is_irreducible() && form.reduce()? == form {
                accept(form, delta, out)?;
            }
        }
    }
    Ok(())
}

pub fn enumerate_fields(sign: Sign, x: i64) -> Result<FieldTable> {
    Enumerator::default().enumerate(sign, x)
}

/// `N3±(X)`: fields with `0 < ±Δ < X` (strict, as in the counting function).
pub fn count(sign: Sign, x: i64) -> Result<u64> {
    Ok(enumerate_fields(sign, (x - 1).max(0))?.count())
}

/// `N3±(X; m, a)`: fields with `0 < ±Δ < X` and `Δ ≡ a (mod m)`.
pub fn count_progression(sign: Sign, x: i64, m: &BigInt, a: &BigInt) -> Result<u64> {
    check_residue(m, a)?;
    enumerate_fields(sign, (x - 1).max(0))?.count_progression(m, a)
}

/// Number of cubic fields with discriminant exactly `delta`.
pub fn multiplicity(delta: i64) -> Result<u64> {
    if delta.is_zero() {
        return Ok(0);
    }
    Ok(Enumerator::default().fields_with_disc(delta)?.len() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(sign: Sign, x: i64) -> FieldTable {
        Enumerator::with_workers(2).enumerate(sign, x).unwrap()
    }

    #[test]
    fn smallest_fields() {
        let t = table(Sign::Negative, 30);
        assert_eq!(t.records.len(), 1);
        assert_eq!(t.records[0].disc, -23);
        assert_eq!(t.records[0].form, CubicForm::new(1, 0, -1, -1).reduce().unwrap());
        assert!(table(Sign::Positive, 48).records.is_empty());
        let t = table(Sign::Positive, 49);
        assert_eq!(t.records.len(), 1);
        assert_eq!(t.records[0].disc, 49);
        assert!(t.records[0].galois);
        assert_eq!(table(Sign::Negative, 22).count(), 0);
        assert_eq!(table(Sign::Positive, 0).count(), 0);
    }

    #[test]
    fn known_positive_discriminants_below_1000() {
        let t = table(Sign::Positive, 999);
        let discs: Vec<i64> = t.records.iter().map(|r| r.disc).collect();
        assert_eq!(
            discs,
            vec![49, 81, 148, 169, 229, 257, 316, 321, 361, 404, 469, 473, 564, 568, 621, 697, 733, 756, 761, 785, 788, 837, 892, 940, 961, 985, 993]
        );
        t.validate().unwrap();
    }

    #[test]
    fn known_negative_discriminants() {
        let t = table(Sign::Negative, 108);
        let discs: Vec<i64> = t.records.iter().map(|r| r.disc).collect();
        assert_eq!(discs, vec![-23, -31, -44, -59, -76, -83, -87, -104, -107, -108]);
    }

    #[test]
    fn table_counts_and_progressions() {
        let t = table(Sign::Negative, 30);
        assert_eq!(t.count_progression(&BigInt::from(5), &BigInt::from(2)).unwrap(), 1);
        let t = table(Sign::Positive, 49);
        assert_eq!(t.count_progression(&BigInt::from(7), &BigInt::from(0)).unwrap(), 1);
        let t = table(Sign::Negative, 5000);
        let m = BigInt::from(5);
        let total: u64 = (0..5).map(|a| t.count_progression(&m, &BigInt::from(a)).unwrap()).sum();
        assert_eq!(total, t.count());
        assert!(t.count_progression(&m, &BigInt::from(5)).is_err());
    }

    #[test]
    fn strict_counting_convention() {
        assert_eq!(count(Sign::Negative, 22).unwrap(), 0);
        assert_eq!(count(Sign::Positive, 0).unwrap(), 0);
        assert_eq!(count(Sign::Negative, 23).unwrap(), 0);
        assert_eq!(count(Sign::Negative, 24).unwrap(), 1);
        assert_eq!(count(Sign::Negative, 3300).unwrap() - count(Sign::Negative, 3298).unwrap(), 4);
        // -3300 is itself a field discriminant
        assert_eq!(multiplicity(-3300).unwrap(), 1);
        let t = table(Sign::Negative, 3300);
        assert_eq!(t.count_below(3300).unwrap(), count(Sign::Negative, 3300).unwrap());
        assert_eq!(t.count_upto(3300).unwrap(), t.count_below(3300).unwrap() + 1);
    }

    #[test]
    fn multiplicity_examples() {
        assert_eq!(multiplicity(-3299).unwrap(), 4);
        assert_eq!(multiplicity(-24).unwrap(), 0);
        assert_eq!(multiplicity(49).unwrap(), 1);
        assert!(matches!(multiplicity(MULTIPLICITY_CAPACITY + 1), Err(Error::Capacity(_))));
    }

    #[test]
    fn single_disc_search_agrees_with_table() {
        for sign in [Sign::Negative, Sign::Positive] {
            let t = table(sign, 3000);
            for x in 1..=3000i64 {
                let delta = sign.as_i64() * x;
                let solved = Enumerator::with_workers(1).fields_with_disc(delta).unwrap();
                let listed: Vec<FieldRecord> =
                    t.records.iter().filter(|r| r.disc == delta).copied().collect();
                assert_eq!(solved, listed, "disc {delta}");
            }
        }
    }

    #[test]
    fn records_are_canonical_and_maximal() {
        for sign in [Sign::Negative, Sign::Positive] {
            for r in &table(sign, 20_000).records {
                assert_eq!(r.form.reduce().unwrap(), r.form);
                assert!(r.form.is_maximal().unwrap());
                let (p, q, rr) = r.form.hessian().unwrap();
                assert_eq!(q * q - 4 * p * rr, -3 * r.disc);
            }
        }
    }

    #[test]
    fn capacity_is_enforced() {
        assert!(matches!(
            Enumerator::default().enumerate(Sign::Positive, DEFAULT_CAPACITY + 1),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn worker_count_does_not_matter() {
        let one = Enumerator::with_workers(1).enumerate(Sign::Negative, 20_000).unwrap();
        for w in [2, 8] {
            assert_eq!(Enumerator::with_workers(w).enumerate(Sign::Negative, 20_000).unwrap(), one);
        }
    }

    #[test]
    fn ranges_concatenate() {
        let e = Enumerator::with_workers(2);
        let whole = e.enumerate_range(Sign::Positive, 0, 10_000).unwrap();
        let mut parts = e.enumerate_range(Sign::Positive, 0, 4_000).unwrap();
        parts.extend(e.enumerate_range(Sign::Positive, 4_000, 10_000).unwrap());
        assert_eq!(whole, parts);
    }
}
