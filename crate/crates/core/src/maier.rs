//! Maier matrices over a residue class.
//!
//! Row `t` and column `i` (for `1 <= i <= k`) hold the discriminant
//! `σ (b_i + t m)`, where `σ` is the sign and `b_i` is the least positive
//! integer with `σ b_i ≡ a + i (mod m)`. Every column therefore runs through
//! one signed class `Δ ≡ a + i (mod m)` in order of increasing `|Δ|`; when
//! `a + k <= m` and the sign is positive the entries are literally
//! `a + t m + i`. A cell's value is the number of cubic fields of that
//! discriminant, and a row is good when it holds more than `δ k m` fields.

use std::collections::BTreeMap;
use std::io::Write;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::density::{ratio_to_f64, KAPPA};
use crate::enumerate::{Enumerator, FieldRecord, Sign, MULTIPLICITY_CAPACITY};
use crate::error::{Error, Result};
use crate::genus;
use crate::progression::{format_rational, guarantee_check, ProgressionCertificate};

/// Constants of the informational curve `c δ X^(1 − κ − ε)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentConfig {
    pub c: f64,
    pub epsilon: f64,
    pub kappa: f64,
}

impl Default for ExponentConfig {
    fn default() -> Self {
        ExponentConfig { c: 1.0, epsilon: 0.01, kappa: KAPPA }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixParams {
    pub sign: Sign,
    pub a: BigInt,
    pub m: BigInt,
    pub k: u32,
    pub rows: u64,
    pub delta: BigRational,
}

impl MatrixParams {
    pub fn new(sign: Sign, a: BigInt, m: BigInt, k: u32, rows: u64, delta: BigRational) -> Result<Self> {
        if m <= BigInt::zero() {
            return Err(Error::Domain(format!("modulus must be positive, got {m}")));
        }
        if k == 0 || rows == 0 {
            return Err(Error::Domain("k and the number of rows must be positive".into()));
        }
        if delta < BigRational::zero() {
            return Err(Error::Domain(format!("delta must be nonnegative, got {}", format_rational(&delta))));
        }
        Ok(MatrixParams { sign, a, m, k, rows, delta })
    }

    /// `b_i` for `i = 1..=k`.
    fn offsets(&self) -> Vec<BigInt> {
        let s = BigInt::from(self.sign.as_i64());
        (1..=self.k)
            .map(|i| (s.clone() * (&self.a + i) - 1i32).mod_floor(&self.m) + 1)
            .collect()
    }

    pub fn cell_disc(&self, t: u64, i: u32) -> BigInt {
        let b = &self.offsets()[(i - 1) as usize];
        BigInt::from(self.sign.as_i64()) * (b + &self.m * t)
    }

    /// `δ k m`.
    pub fn row_threshold(&self) -> BigRational {
        &self.delta * BigRational::from_integer(&self.m * self.k)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaierReport {
    pub sign: Sign,
    #[serde(with = "crate::bigint_serde")]
    pub a: BigInt,
    #[serde(with = "crate::bigint_serde")]
    pub m: BigInt,
    pub k: u32,
    pub rows: u64,
    pub delta: String,
    pub row_threshold: String,
    /// Field counts per cell, indexed `[t][i - 1]`.
    pub good_entries: Vec<Vec<u64>>,
    pub good_rows: Vec<u64>,
    #[serde(rename = "G")]
    pub g: u64,
    pub per_row_field_count: Vec<u64>,
    pub column_sums: Vec<u64>,
    pub total_fields: u64,
    /// `c δ X^(1 − κ − ε)` with `X` the number of rows. Informational only.
    pub exponent_reference: f64,
    pub exponent_config: ExponentConfig,
}

impl MaierReport {
    pub fn good_entry_count(&self) -> u64 {
        self.good_entries.iter().flatten().filter(|&&v| v > 0).count() as u64
    }

    /// If every row held at most `2δkm` fields the total would be at most
    /// `2δkmX`; checks the contrapositive on this matrix.
    pub fn counting_identity_holds(&self) -> bool {
        let threshold = crate::progression::parse_rational(&self.row_threshold).expect("own output");
        let two = BigRational::from_integer(BigInt::from(2));
        let total = BigRational::from_integer(BigInt::from(self.total_fields));
        let cap = &two * &threshold * BigRational::from_integer(BigInt::from(self.rows));
        let some_row_large = self
            .per_row_field_count
            .iter()
            .any(|&c| BigRational::from_integer(BigInt::from(c)) > &two * &threshold);
        let row_sum: u64 = self.per_row_field_count.iter().sum();
        let col_sum: u64 = self.column_sums.iter().sum();
        row_sum == self.total_fields && col_sum == self.total_fields && (total <= cap || some_row_large)
    }

    /// CSV dump of the matrix: one line per row `t`, one column per `i`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.k).map(|i| format!("i{i}")));
        w.write_record(&header).map_err(csv_err)?;
        for (t, row) in self.good_entries.iter().enumerate() {
            let mut rec = vec![t.to_string()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Cubic fields in every cell, indexed `[t][i - 1]`.
fn cell_fields(enumr: &Enumerator, params: &MatrixParams) -> Result<Vec<Vec<Vec<FieldRecord>>>> {
    let offsets = params.offsets();
    let last = offsets.iter().max().expect("k > 0") + &params.m * (params.rows - 1);
    let too_big = || {
        Error::Capacity(format!(
            "largest |disc| in the matrix is {last}; pick a smaller modulus or fewer rows (toy mode: m = 5, a = 0, k = 4, rows = 2000)"
        ))
    };
    let last = last.to_i64().ok_or_else(too_big)?;
    let sign = params.sign;
    let disc = |t: u64, i: usize| -> i64 {
        let abs = (&offsets[i] + &params.m * t).to_i64().expect("bounded by last");
        sign.as_i64() * abs
    };
    let k = params.k as usize;
    if last <= enumr.capacity {
        let table = enumr.enumerate(sign, last)?;
        let mut by_disc: BTreeMap<i64, Vec<FieldRecord>> = BTreeMap::new();
        for r in &table.records {
            by_disc.entry(r.disc).or_default().push(*r);
        }
        return Ok((0..params.rows)
            .map(|t| (0..k).map(|i| by_disc.get(&disc(t, i)).cloned().unwrap_or_default()).collect())
            .collect());
    }
    if last > MULTIPLICITY_CAPACITY {
        return Err(too_big());
    }
    (0..params.rows)
        .map(|t| (0..k).map(|i| enumr.fields_with_disc(disc(t, i))).collect())
        .collect()
}

fn report_from_cells(params: &MatrixParams, cells: &[Vec<Vec<FieldRecord>>], cfg: &ExponentConfig) -> MaierReport {
    let good_entries: Vec<Vec<u64>> =
        cells.iter().map(|row| row.iter().map(|c| c.len() as u64).collect()).collect();
    let per_row_field_count: Vec<u64> = good_entries.iter().map(|r| r.iter().sum()).collect();
    let column_sums: Vec<u64> =
        (0..params.k as usize).map(|i| good_entries.iter().map(|r| r[i]).sum()).collect();
    let threshold = params.row_threshold();
    let good_rows: Vec<u64> = per_row_field_count
        .iter()
        .enumerate()
        .filter(|(_, &c)| BigRational::from_integer(BigInt::from(c)) > threshold)
        .map(|(t, _)| t as u64)
        .collect();
    let x = params.rows as f64;
    MaierReport {
        sign: params.sign,
        a: params.a.clone(),
        m: params.m.clone(),
        k: params.k,
        rows: params.rows,
        delta: format_rational(&params.delta),
        row_threshold: format_rational(&threshold),
        g: good_rows.len() as u64,
        good_rows,
        total_fields: per_row_field_count.iter().sum(),
        per_row_field_count,
        column_sums,
        good_entries,
        exponent_reference: cfg.c * ratio_to_f64(&params.delta) * x.powf(1.0 - cfg.kappa - cfg.epsilon),
        exponent_config: cfg.clone(),
    }
}

pub fn build_matrix(enumr: &Enumerator, params: &MatrixParams, cfg: &ExponentConfig) -> Result<MaierReport> {
    let cells = cell_fields(enumr, params)?;
    Ok(report_from_cells(params, &cells, cfg))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldCheck {
    pub t: u64,
    pub i: u32,
    pub disc: i64,
    pub fields: u64,
    #[serde(with = "crate::bigint_serde")]
    pub class_number_lower_bound: BigInt,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub matrix: MaierReport,
    #[serde(rename = "H")]
    pub h: u64,
    pub fields_checked: u64,
    pub checks: Vec<FieldCheck>,
    /// Rows holding at least `k/2` fields.
    pub half_k_rows: Vec<u64>,
    pub violations: u64,
}

/// Runs the matrix on the certificate's classes with `δ = (1 − ε)/(2m)` and
/// confirms `class_number_lower_bound > H` for every field found.
pub fn pipeline_check(
    enumr: &Enumerator,
    cert: &ProgressionCertificate,
    rows: u64,
    cfg: &ExponentConfig,
) -> Result<PipelineReport> {
    let eps = &cert.params.epsilon;
    let delta = (BigRational::one() - eps) / BigRational::from_integer(&cert.m * 2);
    let params = MatrixParams::new(cert.params.sign, cert.a.clone(), cert.m.clone(), cert.params.k, rows, delta)?;
    let cells = cell_fields(enumr, &params)?;
    let h = BigInt::from(cert.params.h);
    let mut checks = Vec::new();
    let mut fields_checked = 0;
    let mut violations = Vec::new();
    for (t, row) in cells.iter().enumerate() {
        for (i, cell) in row.iter().enumerate() {
            if cell.is_empty() {
                continue;
            }
            let disc = cell[0].disc;
            let big = BigInt::from(disc);
            guarantee_check(cert, &big, i + 1)?;
            let bound = genus::class_number_lower_bound(&big)?;
            if bound <= h {
                violations.push(format!("disc {disc} (t = {t}, i = {}) has bound {bound}", i + 1));
            }
            fields_checked += cell.len() as u64;
            checks.push(FieldCheck {
                t: t as u64,
                i: i as u32 + 1,
                disc,
                fields: cell.len() as u64,
                class_number_lower_bound: bound,
            });
        }
    }
    if !violations.is_empty() {
        return Err(Error::Inconsistent(format!(
            "class number lower bound not above H = {h}: {}",
            violations.join("; ")
        )));
    }
    let matrix = report_from_cells(&params, &cells, cfg);
    let half_k_rows = matrix
        .per_row_field_count
        .iter()
        .enumerate()
        .filter(|(_, &c)| 2 * c >= cert.params.k as u64)
        .map(|(t, _)| t as u64)
        .collect();
    Ok(PipelineReport { matrix, h: cert.params.h, fields_checked, checks, half_k_rows, violations: 0 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramLevel {
    pub multiplicity: u64,
    /// Number of discriminants with exactly this many fields.
    pub discriminants: u64,
    /// Smallest `|Δ|` reaching this multiplicity, and `|Δ|^κ` there.
    pub first_abs_disc: u64,
    pub kappa_curve: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityHistogram {
    pub sign: Sign,
    pub bound: i64,
    pub kappa: f64,
    pub levels: Vec<HistogramLevel>,
    pub max_multiplicity: u64,
    pub argmax: i64,
    /// `|argmax|^κ`, to compare with `max_multiplicity`.
    pub kappa_at_argmax: f64,
}

pub fn multiplicity_histogram(enumr: &Enumerator, sign: Sign, x: i64, kappa: f64) -> Result<MultiplicityHistogram> {
    let table = enumr.enumerate(sign, x)?;
    let mut per_disc: BTreeMap<u64, u64> = BTreeMap::new();
    for r in &table.records {
        *per_disc.entry(r.disc.unsigned_abs()).or_default() += 1;
    }
    let mut levels: BTreeMap<u64, (u64, u64)> = BTreeMap::new();
    for (&d, &mult) in &per_disc {
        let e = levels.entry(mult).or_insert((0, d));
        e.0 += 1;
    }
    let (max_multiplicity, argmax) = per_disc
        .iter()
        .fold((0, 0), |(bm, bd), (&d, &mult)| if mult > bm { (mult, d) } else { (bm, bd) });
    Ok(MultiplicityHistogram {
        sign,
        bound: x,
        kappa,
        levels: levels
            .into_iter()
            .map(|(multiplicity, (discriminants, first))| HistogramLevel {
                multiplicity,
                discriminants,
                first_abs_disc: first,
                kappa_curve: (first as f64).powf(kappa),
            })
            .collect(),
        max_multiplicity,
        argmax: sign.as_i64() * argmax as i64,
        kappa_at_argmax: (argmax as f64).powf(kappa),
    })
}
