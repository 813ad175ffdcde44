//! Language vector views: ingestion, validation and alignment.
//!
//! A view is a dense `n × d` matrix with one row per language. Knowledge-base
//! vectors are expected to be imputed upstream (the lang2vec k-NN vectors are),
//! so missing cells are rejected instead of filled in.
//!
//! Codes are taken as given. Corpora keyed by ISO 639-1 need a manual mapping
//! for macro-languages before they line up with URIEL entries, e.g.
//! `zho → cmn`, `fas → pes`, `ara → arb`.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// ISO 639-3 language code: exactly three lowercase ASCII letters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct LanguageCode(String);

impl LanguageCode {
    pub fn new(code: impl AsRef<str>) -> Result<Self> {
        let code = code.as_ref();
        if code.len() == 3 && code.bytes().all(|b| b.is_ascii_lowercase()) {
            Ok(LanguageCode(code.to_owned()))
        } else {
            Err(Error::InvalidLanguageCode(code.to_owned()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for LanguageCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for LanguageCode {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        LanguageCode::new(value)
    }
}

impl From<LanguageCode> for String {
    fn from(code: LanguageCode) -> Self {
        code.0
    }
}

impl std::str::FromStr for LanguageCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LanguageCode::new(s)
    }
}

/// Parses a list of codes, failing on the first invalid one.
pub fn codes<S: AsRef<str>>(items: &[S]) -> Result<Vec<LanguageCode>> {
    items.iter().map(LanguageCode::new).collect()
}

/// One named vector characterization of a set of languages.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewMatrix {
    name: String,
    languages: Vec<LanguageCode>,
    data: DMatrix<f64>,
    feature_names: Option<Vec<String>>,
}

impl ViewMatrix {
    pub fn new(
        name: impl Into<String>,
        languages: Vec<LanguageCode>,
        data: DMatrix<f64>,
        feature_names: Option<Vec<String>>,
    ) -> Result<Self> {
        if languages.is_empty() || data.ncols() == 0 {
            return Err(Error::MalformedInput(
                "a view needs at least one language and one feature".into(),
            ));
        }
        if data.nrows() != languages.len() {
            return Err(Error::DimensionMismatch {
                expected: languages.len(),
                found: data.nrows(),
            });
        }
        if let Some(names) = &feature_names {
            if names.len() != data.ncols() {
                return Err(Error::DimensionMismatch {
                    expected: data.ncols(),
                    found: names.len(),
                });
            }
        }
        let mut seen = HashSet::with_capacity(languages.len());
        for code in &languages {
            if !seen.insert(code) {
                return Err(Error::DuplicateLanguage(code.to_string()));
            }
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::MalformedInput("non-finite value in view".into()));
        }
        Ok(ViewMatrix {
            name: name.into(),
            languages,
            data,
            feature_names,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn languages(&self) -> &[LanguageCode] {
        &self.languages
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn n_languages(&self) -> usize {
        self.languages.len()
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn index_of(&self, code: &LanguageCode) -> Option<usize> {
        self.languages.iter().position(|c| c == code)
    }

    pub fn row(&self, code: &LanguageCode) -> Option<Vec<f64>> {
        self.index_of(code).map(|i| self.data.row(i).iter().copied().collect())
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Returns the rows for `codes`, in that order.
    pub fn select(&self, codes: &[LanguageCode]) -> Result<ViewMatrix> {
        let index: HashMap<&LanguageCode, usize> = self.languages.iter().enumerate().map(|(i, c)| (c, i)).collect();
        let rows = codes
            .iter()
            .map(|c| {
                index
                    .get(c)
                    .copied()
                    .ok_or_else(|| Error::UnknownLanguage(c.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        let data = DMatrix::from_fn(rows.len(), self.dim(), |i, j| self.data[(rows[i], j)]);
        ViewMatrix::new(self.name.clone(), codes.to_vec(), data, self.feature_names.clone())
    }

    /// Writes the view as delimited text with a `lang` header. Values use
    /// 17 significant digits.
    pub fn write_delimited<W: Write>(&self, out: W, delimiter: u8) -> Result<()> {
        let mut writer = csv::WriterBuilder::new().delimiter(delimiter).from_writer(out);
        let mut header = vec!["lang".to_string()];
        match &self.feature_names {
            Some(names) => header.extend(names.iter().cloned()),
            None => header.extend((0..self.dim()).map(|j| format!("f{j}"))),
        }
        let csv_err = |e: csv::Error| Error::MalformedInput(e.to_string());
        writer.write_record(&header).map_err(csv_err)?;
        for (i, code) in self.languages.iter().enumerate() {
            let mut record = vec![code.to_string()];
            record.extend(self.data.row(i).iter().map(|v| format_real(*v)));
            writer.write_record(&record).map_err(csv_err)?;
        }
        writer.flush().map_err(|e| Error::io("<view output>", e))?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let format = ViewFormat::from_path(path);
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_delimited(std::io::BufWriter::new(file), format.delimiter())
    }
}

/// Formats a real with 17 significant digits.
pub fn format_real(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v:.16e}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViewFormat {
    Csv,
    Tsv,
}

impl ViewFormat {
    /// `.tsv` and `.tab` map to TSV, anything else to CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("tsv") || ext.eq_ignore_ascii_case("tab") => ViewFormat::Tsv,
            _ => ViewFormat::Csv,
        }
    }

    pub fn delimiter(self) -> u8 {
        match self {
            ViewFormat::Csv => b',',
            ViewFormat::Tsv => b'\t',
        }
    }
}

/// Loads a view file. The view is named after the file stem.
pub fn load_view(path: impl AsRef<Path>, format: ViewFormat) -> Result<ViewMatrix> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("view").to_string();
    parse_view(&text, format, name)
}

/// Parses view text: first column holds language codes, the rest are reals.
/// A header row is recognised when its first cell is `lang` or is not a
/// valid language code.
pub fn parse_view(text: &str, format: ViewFormat, name: impl Into<String>) -> Result<ViewMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(format.delimiter())
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());

    let mut header: Option<Vec<String>> = None;
    let mut languages = Vec::new();
    let mut values = Vec::new();
    let mut width: Option<usize> = None;

    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::MalformedInput(e.to_string()))?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(line + 1);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let first = record.get(0).unwrap_or("");
        let is_first_row = languages.is_empty() && header.is_none();
        if is_first_row && (first.eq_ignore_ascii_case("lang") || LanguageCode::new(first).is_err()) {
            if record.len() < 2 {
                return Err(Error::MalformedInput(format!(
                    "line {line}: header has no feature columns"
                )));
            }
            header = Some(record.iter().skip(1).map(str::to_owned).collect());
            width = Some(record.len() - 1);
            continue;
        }
        let row_width = record.len() - 1;
        match width {
            None if row_width == 0 => {
                return Err(Error::MalformedInput(format!(
                    "line {line}: row has no feature columns"
                )))
            }
            None => width = Some(row_width),
            Some(w) if w != row_width => {
                return Err(Error::MalformedInput(format!(
                    "line {line}: expected {w} values, found {row_width}"
                )))
            }
            Some(_) => {}
        }
        languages.push(LanguageCode::new(first)?);
        for (col, cell) in record.iter().enumerate().skip(1) {
            if cell.is_empty() {
                return Err(Error::MalformedInput(format!(
                    "line {line}, column {col}: missing value"
                )));
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| Error::MalformedInput(format!("line {line}, column {col}: not a number: {cell:?}")))?;
            if !v.is_finite() {
                return Err(Error::MalformedInput(format!(
                    "line {line}, column {col}: non-finite value"
                )));
            }
            values.push(v);
        }
    }

    let d = width.ok_or_else(|| Error::MalformedInput("empty view file".into()))?;
    if languages.is_empty() {
        return Err(Error::MalformedInput("view file has no data rows".into()));
    }
    let data = DMatrix::from_row_slice(languages.len(), d, &values);
    ViewMatrix::new(name, languages, data, header)
}

/// Two views restricted to their common languages, in sorted code order.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedViews {
    view_x: ViewMatrix,
    view_y: ViewMatrix,
    common: Vec<LanguageCode>,
}

impl AlignedViews {
    pub fn view_x(&self) -> &ViewMatrix {
        &self.view_x
    }

    pub fn view_y(&self) -> &ViewMatrix {
        &self.view_y
    }

    pub fn common(&self) -> &[LanguageCode] {
        &self.common
    }

    pub fn len(&self) -> usize {
        self.common.len()
    }

    pub fn is_empty(&self) -> bool {
        self.common.is_empty()
    }

    /// Restricts both views to `codes` (which must be common languages).
    pub fn subset(&self, codes: &[LanguageCode]) -> Result<AlignedViews> {
        let mut sorted: Vec<LanguageCode> = codes.to_vec();
        sorted.sort();
        sorted.dedup();
        if sorted.is_empty() {
            return Err(Error::NoCommonLanguages);
        }
        Ok(AlignedViews {
            view_x: self.view_x.select(&sorted)?,
            view_y: self.view_y.select(&sorted)?,
            common: sorted,
        })
    }
}

/// Restricts both views to the sorted intersection of their languages.
pub fn align(x: &ViewMatrix, y: &ViewMatrix) -> Result<AlignedViews> {
    let xs: BTreeSet<&LanguageCode> = x.languages.iter().collect();
    let ys: HashSet<&LanguageCode> = y.languages.iter().collect();
    let common: Vec<LanguageCode> = xs.into_iter().filter(|c| ys.contains(c)).cloned().collect();
    if common.is_empty() {
        return Err(Error::NoCommonLanguages);
    }
    Ok(AlignedViews {
        view_x: x.select(&common)?,
        view_y: y.select(&common)?,
        common,
    })
}

/// Family and corpus size of one language.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageMeta {
    pub code: LanguageCode,
    pub family: String,
    pub subfamily: Option<String>,
    pub train_size: u64,
}

#[derive(Deserialize)]
struct MetaRecord {
    lang: String,
    family: String,
    #[serde(default)]
    subfamily: Option<String>,
    size: String,
}

/// Loads a metadata CSV with header `lang,family,subfamily,size`.
pub fn load_meta(path: impl AsRef<Path>) -> Result<Vec<LanguageMeta>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_meta(&text)
}

pub fn parse_meta(text: &str) -> Result<Vec<LanguageMeta>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for record in reader.deserialize::<MetaRecord>() {
        let record = record.map_err(|e| Error::MalformedInput(e.to_string()))?;
        let code = LanguageCode::new(&record.lang)?;
        if record.family.is_empty() {
            return Err(Error::MalformedInput(format!("{code}: empty family")));
        }
        let train_size = record.size.parse::<u64>().map_err(|_| {
            Error::MalformedInput(format!("{code}: size {:?} is not a nonnegative integer", record.size))
        })?;
        if !seen.insert(code.clone()) {
            return Err(Error::DuplicateLanguage(code.to_string()));
        }
        out.push(LanguageMeta {
            code,
            family: record.family,
            subfamily: record.subfamily.filter(|s| !s.is_empty()),
            train_size,
        });
    }
    Ok(out)
}
