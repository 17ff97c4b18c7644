//! Column-major categorical database, CSV loading and synthetic generation.

use std::fs;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::rng;

/// A variable's state, 0-based.
pub type State = u16;

/// Largest supported arity (states must fit in [`State`]).
pub const MAX_ARITY: usize = State::MAX as usize + 1;

/// Complete database of `m` instances over `n` categorical variables,
/// stored column-major. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Database {
    arities: Vec<usize>,
    columns: Vec<Vec<State>>,
    m: usize,
}

impl Database {
    /// Builds a database from columns. Arities must cover every observed
    /// state; pass `None` to infer them as `1 + max state`.
    pub fn from_columns(columns: Vec<Vec<State>>, arities: Option<Vec<usize>>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::InvalidDatabase("no variables".into()));
        }
        let m = columns[0].len();
        if m == 0 {
            return Err(Error::InvalidDatabase("no instances".into()));
        }
        if let Some((i, c)) = columns.iter().enumerate().find(|(_, c)| c.len() != m) {
            return Err(Error::InvalidDatabase(format!("column {i} has {} entries, expected {m}", c.len())));
        }
        let observed: Vec<usize> =
            columns.iter().map(|c| c.iter().copied().max().map_or(1, |s| s as usize + 1)).collect();
        let arities = match arities {
            None => observed,
            Some(declared) => {
                if declared.len() != columns.len() {
                    return Err(Error::InvalidDatabase(format!(
                        "{} arities declared for {} variables",
                        declared.len(),
                        columns.len()
                    )));
                }
                for (i, (&d, &o)) in declared.iter().zip(&observed).enumerate() {
                    if d == 0 || d > MAX_ARITY {
                        return Err(Error::InvalidDatabase(format!("variable {i}: arity {d} out of range")));
                    }
                    if d < o {
                        return Err(Error::InvalidDatabase(format!(
                            "variable {i}: declared arity {d} but state {} observed",
                            o - 1
                        )));
                    }
                }
                declared
            }
        };
        Ok(Database { arities, columns, m })
    }

    /// Builds a database from row-major data.
    pub fn from_rows(rows: &[Vec<State>], arities: Option<Vec<usize>>) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        if let Some(p) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::Load {
                row: p + 1,
                message: format!("expected {n} values, found {}", rows[p].len()),
            });
        }
        let columns = (0..n).map(|i| rows.iter().map(|r| r[i]).collect()).collect();
        Self::from_columns(columns, arities)
    }

    /// Number of variables.
    pub fn n(&self) -> usize {
        self.columns.len()
    }

    /// Number of instances.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn arity(&self, var: usize) -> usize {
        self.arities[var]
    }

    pub fn arities(&self) -> &[usize] {
        &self.arities
    }

    pub fn column(&self, var: usize) -> &[State] {
        &self.columns[var]
    }

    pub fn columns(&self) -> &[Vec<State>] {
        &self.columns
    }

    /// Row-major copy of the data, `m * n` states.
    pub fn to_row_major(&self) -> Vec<State> {
        let n = self.n();
        let mut out = vec![0; self.m * n];
        for (i, col) in self.columns.iter().enumerate() {
            for (p, &s) in col.iter().enumerate() {
                out[p * n + i] = s;
            }
        }
        out
    }

    /// Per-state occurrence counts of one variable.
    pub fn histogram(&self, var: usize) -> Vec<u64> {
        let mut h = vec![0u64; self.arities[var]];
        for &s in &self.columns[var] {
            h[s as usize] += 1;
        }
        h
    }

    /// Plug-in entropy (natural log) of one variable's empirical distribution.
    pub fn entropy(&self, var: usize) -> f64 {
        let m = self.m as f64;
        self.histogram(var)
            .into_iter()
            .filter(|&c| c > 0)
            .map(|c| {
                let p = c as f64 / m;
                -p * p.ln()
            })
            .sum()
    }

    pub fn is_binary(&self) -> Result<()> {
        match self.arities.iter().position(|&r| r != 2) {
            None => Ok(()),
            Some(variable) => Err(Error::NonBinary { variable, arity: self.arities[variable] }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Delimiter {
    #[default]
    Comma,
    Char(u8),
    /// Any run of spaces or tabs.
    Whitespace,
}

/// How integer tokens in a file map onto 0-based states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StateBase {
    /// 1-based if the smallest token in the file is 1, otherwise 0-based.
    #[default]
    Auto,
    Zero,
    One,
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    pub delimiter: Delimiter,
    pub arities: Option<Vec<usize>>,
    pub base: StateBase,
}

/// Loads an integer matrix (rows = instances, columns = variables).
pub fn load_csv(path: impl AsRef<Path>, options: &LoadOptions) -> Result<Database> {
    let file = fs::File::open(path)?;
    parse_table(file, options)
}

/// Parses an integer matrix from any reader; see [`load_csv`].
pub fn parse_table(reader: impl Read, options: &LoadOptions) -> Result<Database> {
    let rows = match options.delimiter {
        Delimiter::Whitespace => read_whitespace(reader)?,
        Delimiter::Comma => read_delimited(reader, b',')?,
        Delimiter::Char(c) => read_delimited(reader, c)?,
    };
    if rows.is_empty() {
        return Err(Error::Input("empty file".into()));
    }
    let width = rows[0].1.len();
    for (row, tokens) in &rows {
        if tokens.len() != width {
            return Err(Error::Load {
                row: *row,
                message: format!("expected {width} values, found {}", tokens.len()),
            });
        }
    }
    let min = rows.iter().flat_map(|(_, r)| r.iter().copied()).min().unwrap_or(0);
    let offset = match options.base {
        StateBase::Auto => i64::from(min == 1),
        StateBase::Zero => 0,
        StateBase::One => 1,
    };
    if let Some(declared) = &options.arities {
        if declared.len() != width {
            return Err(Error::Input(format!("{} arities declared for {width} columns", declared.len())));
        }
    }
    let mut columns = vec![Vec::with_capacity(rows.len()); width];
    for (row, tokens) in &rows {
        for (i, &t) in tokens.iter().enumerate() {
            let s = t - offset;
            let limit = options.arities.as_ref().map_or(MAX_ARITY as i64, |a| a[i] as i64);
            if s < 0 || s >= limit {
                return Err(Error::Load {
                    row: *row,
                    message: format!("token {t} in column {} outside the variable's domain", i + 1),
                });
            }
            columns[i].push(s as State);
        }
    }
    Database::from_columns(columns, options.arities.clone())
}

type NumberedRows = Vec<(usize, Vec<i64>)>;

fn parse_token(token: &str, row: usize) -> Result<i64> {
    token
        .trim()
        .parse::<i64>()
        .map_err(|_| Error::Load { row, message: format!("not an integer: {token:?}") })
}

fn read_delimited(reader: impl Read, delimiter: u8) -> Result<NumberedRows> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Input(e.to_string()))?;
        let row = record.position().map_or(idx + 1, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let tokens = record.iter().map(|t| parse_token(t, row)).collect::<Result<Vec<_>>>()?;
        rows.push((row, tokens));
    }
    Ok(rows)
}

fn read_whitespace(mut reader: impl Read) -> Result<NumberedRows> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let tokens = line.split_whitespace().map(|t| parse_token(t, idx + 1)).collect::<Result<Vec<_>>>()?;
        rows.push((idx + 1, tokens));
    }
    Ok(rows)
}

/// Reads a sidecar arity declaration: one integer per variable, separated by
/// commas or whitespace.
pub fn load_arities(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path)?;
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().map_err(|_| Error::Input(format!("bad arity token {t:?}"))))
        .collect()
}

/// Arity specification for synthetic data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Arities {
    Uniform(usize),
    PerVariable(Vec<usize>),
    /// Each variable's arity drawn uniformly from `lo..=hi`.
    Range {
        lo: usize,
        hi: usize,
    },
}

/// Uniform random database. Column `i` is filled from the ChaCha8 stream `i`
/// of `seed` (see [`crate::rng`]), so the output is identical across runs and
/// platforms for the same arguments.
pub fn generate_synthetic(n: usize, m: usize, arities: &Arities, seed: u64) -> Result<Database> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidParameter("n and m must be at least 1".into()));
    }
    let arities = match arities {
        Arities::Uniform(r) => vec![*r; n],
        Arities::PerVariable(v) => {
            if v.len() != n {
                return Err(Error::InvalidParameter(format!("{} arities given for {n} variables", v.len())));
            }
            v.clone()
        }
        Arities::Range { lo, hi } => {
            if lo > hi {
                return Err(Error::InvalidParameter(format!("empty arity range {lo}-{hi}")));
            }
            let mut r = rng::stream(seed, rng::ARITY_STREAM);
            (0..n).map(|_| lo + rng::below(&mut r, (hi - lo + 1) as u32) as usize).collect()
        }
    };
    if let Some(i) = arities.iter().position(|&r| r == 0 || r > MAX_ARITY) {
        return Err(Error::InvalidParameter(format!("variable {i}: arity {} out of range", arities[i])));
    }
    let columns = arities
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let mut g = rng::stream(seed, i as u64);
            (0..m).map(|_| rng::below(&mut g, r as u32) as State).collect()
        })
        .collect();
    Database::from_columns(columns, Some(arities))
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = "1,1,1\n1,2,1\n2,1,2\n2,2,1\n3,2,1\n3,2,1\n3,1,2\n2,1,1\n";

    fn parse(text: &str, options: &LoadOptions) -> Result<Database> {
        parse_table(text.as_bytes(), options)
    }

    #[test]
    fn fixture_file_loads_one_based() {
        let db = parse(FIXTURE, &LoadOptions::default()).unwrap();
        assert_eq!((db.n(), db.m()), (3, 8));
        assert_eq!(db.arities(), &[3, 2, 2]);
        assert_eq!(db.column(0), &[0, 0, 1, 1, 2, 2, 2, 1]);
    }

    #[test]
    fn single_row_infers_unit_arities() {
        let db = parse("1,1,1\n", &LoadOptions::default()).unwrap();
        assert_eq!(db.arities(), &[1, 1, 1]);
        assert_eq!(db.m(), 1);
    }

    #[test]
    fn ragged_row_is_named() {
        let err = parse("1,2,1\n1,2\n2,2,1\n", &LoadOptions::default()).unwrap_err();
        match err {
            Error::Load { row, .. } => assert_eq!(row, 2),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn empty_file_is_rejected() {
        assert!(matches!(parse("", &LoadOptions::default()), Err(Error::Input(_))));
        assert!(matches!(parse("\n\n", &LoadOptions::default()), Err(Error::Input(_))));
    }

    #[test]
    fn declared_arity_wins_and_bounds_tokens() {
        let opts = LoadOptions { arities: Some(vec![4, 2, 3]), ..Default::default() };
        let db = parse(FIXTURE, &opts).unwrap();
        assert_eq!(db.arities(), &[4, 2, 3]);

        let small = LoadOptions { arities: Some(vec![2, 2, 2]), ..Default::default() };
        assert!(matches!(parse(FIXTURE, &small), Err(Error::Load { row: 5, .. })));
    }

    #[test]
    fn whitespace_and_zero_based() {
        let opts = LoadOptions { delimiter: Delimiter::Whitespace, ..Default::default() };
        let db = parse("0  1\t2\n1 0 0\n", &opts).unwrap();
        assert_eq!(db.arities(), &[2, 2, 3]);
        assert_eq!(db.column(2), &[2, 0]);
    }

    #[test]
    fn forced_base_overrides_detection() {
        let opts = LoadOptions { base: StateBase::Zero, arities: Some(vec![2, 2]), ..Default::default() };
        let db = parse("1,1\n1,1\n", &opts).unwrap();
        assert_eq!(db.column(0), &[1, 1]);
    }

    #[test]
    fn non_integer_token() {
        assert!(matches!(parse("1,x\n", &LoadOptions::default()), Err(Error::Load { row: 1, .. })));
        assert!(parse("-1,0\n", &LoadOptions::default()).is_err());
    }

    #[test]
    fn synthetic_is_deterministic_and_in_range() {
        let a = generate_synthetic(3, 8, &Arities::Uniform(2), 7).unwrap();
        let b = generate_synthetic(3, 8, &Arities::Uniform(2), 7).unwrap();
        assert_eq!(a, b);
        assert!(a.columns().iter().flatten().all(|&s| s < 2));
        let c = generate_synthetic(3, 8, &Arities::Uniform(2), 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn synthetic_arity_range() {
        let db = generate_synthetic(20, 1000, &Arities::Range { lo: 2, hi: 6 }, 1).unwrap();
        assert!(db.arities().iter().all(|r| (2..=6).contains(r)));
        assert!(db.arities().iter().any(|&r| r != db.arity(0)));
    }

    #[test]
    fn synthetic_rejects_zero_arity() {
        assert!(generate_synthetic(3, 8, &Arities::Uniform(0), 1).is_err());
        assert!(generate_synthetic(0, 8, &Arities::Uniform(2), 1).is_err());
    }

    #[test]
    fn entropy_orders_fixture_variables() {
        let db = parse(FIXTURE, &LoadOptions::default()).unwrap();
        assert!(db.entropy(2) < db.entropy(0));
        assert_eq!(db.histogram(2), vec![6, 2]);
    }
}
