//! Field table files, import of external tables and the on-disk cache.
//!
//! Table files are JSON lines, one `{"disc": .., "form": [a, b, c, d]}` per
//! record, sorted by `(|disc|, form)`. Imports also accept CSV with header
//! `disc,a,b,c,d`.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::enumerate::{Enumerator, FieldRecord, FieldTable, Sign};
use crate::error::{Error, Result};
use crate::forms::CubicForm;

/// Bumped whenever the on-disk record layout or the canonical form changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Line {
    disc: i64,
    form: CubicForm,
}

pub fn write_jsonl<W: Write>(records: &[FieldRecord], mut w: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, &Line { disc: r.disc, form: r.form })?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_jsonl<R: BufRead>(r: R) -> Result<Vec<FieldRecord>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Line = serde_json::from_str(&line)
            .map_err(|e| Error::Parse { line: i + 1, message: e.to_string() })?;
        out.push(FieldRecord::new(rec.disc, rec.form));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImportFormat {
    Csv,
    JsonLines,
}

impl ImportFormat {
    pub fn from_path(path: &Path) -> ImportFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => ImportFormat::Csv,
            _ => ImportFormat::JsonLines,
        }
    }
}

#[derive(Deserialize)]
struct CsvRow {
    disc: i64,
    a: i64,
    b: i64,
    c: i64,
    d: i64,
}

/// Reads an external table. Each defining form is checked against its stated
/// discriminant and replaced by its canonical representative.
pub fn import_table(path: &Path, format: ImportFormat) -> Result<Vec<FieldRecord>> {
    let file = fs::File::open(path)?;
    let raw: Vec<(usize, FieldRecord)> = match format {
        ImportFormat::JsonLines => read_jsonl(BufReader::new(file))?
            .into_iter()
            .enumerate()
            .map(|(i, r)| (i + 1, r))
            .collect(),
        ImportFormat::Csv => {
            let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
            let headers = rdr.headers().map_err(|e| csv_error(1, e))?.clone();
            if headers.iter().collect::<Vec<_>>() != ["disc", "a", "b", "c", "d"] {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("expected header disc,a,b,c,d, found {}", headers.iter().collect::<Vec<_>>().join(",")),
                });
            }
            let mut rows = Vec::new();
            for (i, row) in rdr.deserialize::<CsvRow>().enumerate() {
                let line = i + 2;
                let row = row.map_err(|e| csv_error(line, e))?;
                rows.push((line, FieldRecord::new(row.disc, CubicForm::new(row.a, row.b, row.c, row.d))));
            }
            rows
        }
    };
    let mut out = Vec::with_capacity(raw.len());
    for (line, r) in raw {
        let parse_err = |message: String| Error::Parse { line, message };
        let disc = r.form.disc().map_err(|e| parse_err(e.to_string()))?;
        if disc != r.disc {
            return Err(parse_err(format!(
                "form {} has discriminant {disc}, row says {}",
                r.form, r.disc
            )));
        }
        let form = r.form.reduce().map_err(|e| parse_err(e.to_string()))?;
        out.push(FieldRecord::new(disc, form));
    }
    out.sort_unstable_by_key(|r| (r.disc.unsigned_abs(), r.form));
    Ok(out)
}

fn csv_error(line: usize, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(line);
    Error::Parse { line, message: e.to_string() }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub disc: i64,
    pub reference: u64,
    pub computed: u64,
}

/// Differences between a reference table and a computed one, restricted to
/// the computed table's sign and bound.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossCheckReport {
    pub compared_range: (i64, i64),
    /// Discriminants in the reference that the computed table lacks.
    pub missing: Vec<i64>,
    /// Discriminants in the computed table that the reference lacks.
    pub extra: Vec<i64>,
    pub multiplicity_mismatches: Vec<Discrepancy>,
    /// Same discriminant, but a canonical form present on one side only.
    pub form_mismatches: Vec<(i64, CubicForm)>,
}

impl CrossCheckReport {
    pub fn is_empty(&self) -> bool {
        self.missing.is_empty()
            && self.extra.is_empty()
            && self.multiplicity_mismatches.is_empty()
            && self.form_mismatches.is_empty()
    }
}

pub fn cross_check(reference: &[FieldRecord], computed: &FieldTable) -> CrossCheckReport {
    let in_range = |r: &&FieldRecord| {
        Sign::of(r.disc) == Some(computed.sign) && r.disc.unsigned_abs() <= computed.bound as u64
    };
    let group = |rs: Vec<&FieldRecord>| {
        let mut m: BTreeMap<i64, Vec<CubicForm>> = BTreeMap::new();
        for r in rs {
            m.entry(r.disc).or_default().push(r.form);
        }
        m
    };
    let refs = group(reference.iter().filter(in_range).collect());
    let comp = group(computed.records.iter().filter(in_range).collect());
    let mut rep = CrossCheckReport {
        compared_range: (1, computed.bound),
        ..Default::default()
    };
    for (disc, forms) in &refs {
        match comp.get(disc) {
            None => rep.missing.push(*disc),
            Some(other) => {
                if other.len() != forms.len() {
                    rep.multiplicity_mismatches.push(Discrepancy {
                        disc: *disc,
                        reference: forms.len() as u64,
                        computed: other.len() as u64,
                    });
                }
                for f in forms.iter().filter(|f| !other.contains(f)) {
                    rep.form_mismatches.push((*disc, *f));
                }
                for f in other.iter().filter(|f| !forms.contains(f)) {
                    rep.form_mismatches.push((*disc, *f));
                }
            }
        }
    }
    rep.extra = comp.keys().filter(|d| !refs.contains_key(d)).copied().collect();
    rep
}

/// On-disk store of enumerated tables keyed by schema version, sign and bound.
#[derive(Clone, Debug)]
pub struct FieldCache {
    dir: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub sign: Sign,
    pub bound: i64,
    pub path: PathBuf,
    pub bytes: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CacheOutcome {
    /// A file for exactly this bound existed.
    Hit,
    /// Cut down from a larger cached table.
    Truncated { from: i64 },
    /// A smaller cached table was extended by enumerating the gap.
    Extended { from: i64 },
    Built,
}

impl FieldCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FieldCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_for(&self, sign: Sign, bound: i64) -> PathBuf {
        self.dir.join(format!("v{SCHEMA_VERSION}_{}_{bound}.jsonl", sign.tag()))
    }

    /// Cached tables of the current schema version.
    pub fn entries(&self) -> Result<Vec<CacheEntry>> {
        let mut out = Vec::new();
        let rd = match fs::read_dir(&self.dir) {
            Ok(rd) => rd,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(out),
            Err(e) => return Err(e.into()),
        };
        let prefix = format!("v{SCHEMA_VERSION}_");
        for entry in rd {
            let entry = entry?;
            let name = entry.file_name().to_string_lossy().into_owned();
            let Some(rest) = name.strip_prefix(&prefix).and_then(|r| r.strip_suffix(".jsonl")) else {
                continue;
            };
            let Some((tag, bound)) = rest.split_once('_') else { continue };
            let sign = match tag {
                "pos" => Sign::Positive,
                "neg" => Sign::Negative,
                _ => continue,
            };
            let Ok(bound) = bound.parse::<i64>() else { continue };
            out.push(CacheEntry { sign, bound, path: entry.path(), bytes: entry.metadata()?.len() });
        }
        out.sort_by_key(|e| (e.sign, e.bound));
        Ok(out)
    }

    fn read(&self, path: &Path, sign: Sign, bound: i64) -> Result<FieldTable> {
        let records = read_jsonl(BufReader::new(fs::File::open(path)?))?;
        let table = FieldTable { sign, bound, records };
        table.validate()?;
        Ok(table)
    }

    fn store(&self, table: &FieldTable) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path_for(table.sign, table.bound);
        let tmp = path.with_extension("jsonl.tmp");
        write_jsonl(&table.records, BufWriter::new(fs::File::create(&tmp)?))?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }

    /// The table for `(sign, x)`, reusing cached tables where possible.
    pub fn load_or_build(&self, enumerator: &Enumerator, sign: Sign, x: i64) -> Result<(FieldTable, CacheOutcome)> {
        let entries: Vec<CacheEntry> = self.entries()?.into_iter().filter(|e| e.sign == sign).collect();
        if let Some(e) = entries.iter().find(|e| e.bound == x) {
            return Ok((self.read(&e.path, sign, x)?, CacheOutcome::Hit));
        }
        if let Some(e) = entries.iter().filter(|e| e.bound > x).min_by_key(|e| e.bound) {
            let table = self.read(&e.path, sign, e.bound)?.truncated(x)?;
            return Ok((table, CacheOutcome::Truncated { from: e.bound }));
        }
        let (table, outcome) = match entries.iter().filter(|e| e.bound < x).max_by_key(|e| e.bound) {
            Some(e) => {
                let mut table = self.read(&e.path, sign, e.bound)?;
                table.records.extend(enumerator.enumerate_range(sign, e.bound, x)?);
                table.bound = x;
                (table, CacheOutcome::Extended { from: e.bound })
            }
            None => (enumerator.enumerate(sign, x)?, CacheOutcome::Built),
        };
        self.store(&table)?;
        Ok((table, outcome))
    }
}
