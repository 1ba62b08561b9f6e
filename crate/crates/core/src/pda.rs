//! Placement delivery arrays: representation, text format, validation and
//! the derived quantities the retrieval scheme depends on.
//!
//! A `(K, F, Z, S)` PDA is an `F × K` array over `{*} ∪ [1:S]` where
//!
//! - **C1** every column holds exactly `Z` stars,
//! - **C2** every integer in `[1:S]` occurs at least once,
//! - **C3** two cells holding the same integer lie in distinct rows and
//!   columns (**C3a**) and the two crossing cells are stars (**C3b**).
//!
//! Rows index subfiles, columns index users. Internally rows and columns are
//! 0-based; every report and the text format use 1-based numbering.

use std::collections::BTreeMap;
use std::fmt;

use num::BigInt;
use num::BigRational;

use crate::error::PdaError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cell {
    Star,
    Int(u32),
}

impl Cell {
    pub fn is_star(self) -> bool {
        matches!(self, Cell::Star)
    }

    pub fn label(self) -> Option<u32> {
        match self {
            Cell::Star => None,
            Cell::Int(s) => Some(s),
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Star => f.write_str("*"),
            Cell::Int(s) => write!(f, "{s}"),
        }
    }
}

/// The four conditions a PDA must satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    C1,
    C2,
    C3a,
    C3b,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Condition::C1 => "C1",
            Condition::C2 => "C2",
            Condition::C3a => "C3a",
            Condition::C3b => "C3b",
        };
        f.write_str(name)
    }
}

/// One violated condition together with the cells that witness it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub condition: Condition,
    /// 1-based `(row, column)` pairs.
    pub cells: Vec<(usize, usize)>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.condition, self.message)?;
        if !self.cells.is_empty() {
            let cells: Vec<String> = self
                .cells
                .iter()
                .map(|(r, c)| format!("({r},{c})"))
                .collect();
            write!(f, " at {}", cells.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        Self {
            valid: violations.is_empty(),
            violations,
        }
    }

    pub fn has(&self, condition: Condition) -> bool {
        self.violations.iter().any(|v| v.condition == condition)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.valid {
            return f.write_str("valid");
        }
        write!(f, "{} violation(s)", self.violations.len())?;
        for v in &self.violations {
            write!(f, "\n  {v}")?;
        }
        Ok(())
    }
}

/// An `F × K` grid with declared `Z` and `S`, not yet known to be a PDA.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PdaArray {
    users: usize,
    rows: usize,
    declared_z: usize,
    declared_s: usize,
    cells: Vec<Cell>,
}

impl PdaArray {
    /// Builds a grid from explicit rows. Ragged or miscounted rows are a
    /// structural error, separate from condition violations.
    pub fn from_rows(
        users: usize,
        rows: usize,
        declared_z: usize,
        declared_s: usize,
        grid: Vec<Vec<Cell>>,
    ) -> Result<Self, PdaError> {
        if users == 0 || rows == 0 {
            return Err(PdaError::Malformed(format!(
                "K and F must be positive, got K={users} F={rows}"
            )));
        }
        if grid.len() != rows {
            return Err(PdaError::Malformed(format!(
                "expected {rows} rows, found {}",
                grid.len()
            )));
        }
        let mut cells = Vec::with_capacity(users * rows);
        for (f, row) in grid.into_iter().enumerate() {
            if row.len() != users {
                return Err(PdaError::Malformed(format!(
                    "row {} has {} entries, expected {users}",
                    f + 1,
                    row.len()
                )));
            }
            cells.extend(row);
        }
        Ok(Self {
            users,
            rows,
            declared_z,
            declared_s,
            cells,
        })
    }

    /// Builds a grid whose declared `Z` and `S` are read off the cells
    /// (stars in the first column, largest label).
    pub fn from_grid(grid: Vec<Vec<Cell>>) -> Result<Self, PdaError> {
        let rows = grid.len();
        let users = grid.first().map_or(0, Vec::len);
        let z = grid
            .iter()
            .filter(|r| r.first().is_some_and(|c| c.is_star()))
            .count();
        let s = grid
            .iter()
            .flatten()
            .filter_map(|c| c.label())
            .max()
            .unwrap_or(0) as usize;
        Self::from_rows(users, rows, z, s, grid)
    }

    /// Parses the `.pda` text format: a `K F Z S` header line followed by `F`
    /// lines of `K` tokens, each `*` or a decimal integer.
    pub fn parse(text: &str) -> Result<Self, PdaError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| PdaError::Malformed("empty input".into()))?;
        let nums: Vec<usize> = header
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| PdaError::Malformed(format!("bad header token `{t}`")))
            })
            .collect::<Result<_, _>>()?;
        let [k, f, z, s] = nums[..] else {
            return Err(PdaError::Malformed(format!(
                "header must hold K F Z S, found {} values",
                nums.len()
            )));
        };
        let mut grid = Vec::with_capacity(f);
        for (i, line) in lines.enumerate() {
            let row = line
                .split_whitespace()
                .map(|t| parse_token(t, i + 1))
                .collect::<Result<Vec<_>, _>>()?;
            grid.push(row);
        }
        Self::from_rows(k, f, z, s, grid)
    }

    /// Serializes to the `.pda` text format with single-space separation and
    /// a trailing newline.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} {} {} {}\n",
            self.users, self.rows, self.declared_z, self.declared_s
        );
        for f in 0..self.rows {
            let row: Vec<String> = (0..self.users)
                .map(|k| self.cell(f, k).to_string())
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn declared_z(&self) -> usize {
        self.declared_z
    }

    pub fn declared_s(&self) -> usize {
        self.declared_s
    }

    /// Cell at 0-based row `f`, column `k`.
    pub fn cell(&self, f: usize, k: usize) -> Cell {
        self.cells[f * self.users + k]
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }

    pub fn into_pda(self) -> Result<Pda, PdaError> {
        Pda::new(self)
    }
}

fn parse_token(token: &str, line: usize) -> Result<Cell, PdaError> {
    if token == "*" {
        return Ok(Cell::Star);
    }
    token
        .parse::<u32>()
        .map(Cell::Int)
        .map_err(|_| PdaError::Malformed(format!("bad token `{token}` on row {line}")))
}

/// Checks C1–C3 against the grid and its declared `Z` and `S`, collecting
/// every violation.
pub fn validate(array: &PdaArray) -> ValidationReport {
    let mut violations = Vec::new();
    let (rows, users) = (array.rows, array.users);

    for k in 0..users {
        let stars = (0..rows).filter(|&f| array.cell(f, k).is_star()).count();
        if stars != array.declared_z {
            violations.push(Violation {
                condition: Condition::C1,
                cells: Vec::new(),
                message: format!(
                    "column {} has {stars} stars, expected Z={}",
                    k + 1,
                    array.declared_z
                ),
            });
        }
    }

    let mut by_label: BTreeMap<u32, Vec<(usize, usize)>> = BTreeMap::new();
    for f in 0..rows {
        for k in 0..users {
            if let Cell::Int(s) = array.cell(f, k) {
                if s == 0 || s as usize > array.declared_s {
                    violations.push(Violation {
                        condition: Condition::C2,
                        cells: vec![(f + 1, k + 1)],
                        message: format!("integer {s} outside [1:{}]", array.declared_s),
                    });
                } else {
                    by_label.entry(s).or_default().push((f, k));
                }
            }
        }
    }

    for s in 1..=array.declared_s as u32 {
        if !by_label.contains_key(&s) {
            violations.push(Violation {
                condition: Condition::C2,
                cells: Vec::new(),
                message: format!("integer {s} never appears"),
            });
        }
    }

    for (s, cells) in &by_label {
        for (i, &(f1, k1)) in cells.iter().enumerate() {
            for &(f2, k2) in &cells[i + 1..] {
                if f1 == f2 || k1 == k2 {
                    let place = if f1 == f2 { "row" } else { "column" };
                    violations.push(Violation {
                        condition: Condition::C3a,
                        cells: vec![(f1 + 1, k1 + 1), (f2 + 1, k2 + 1)],
                        message: format!("integer {s} repeated in a {place}"),
                    });
                    continue;
                }
                if !array.cell(f1, k2).is_star() || !array.cell(f2, k1).is_star() {
                    violations.push(Violation {
                        condition: Condition::C3b,
                        cells: vec![
                            (f1 + 1, k1 + 1),
                            (f2 + 1, k2 + 1),
                            (f1 + 1, k2 + 1),
                            (f2 + 1, k1 + 1),
                        ],
                        message: format!("integer {s}: crossing cells are not both stars"),
                    });
                }
            }
        }
    }

    ValidationReport::from_violations(violations)
}

/// Where each integer of a valid PDA lives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OccupancyMap {
    /// `cells[s-1]` lists the 0-based `(row, column)` cells labelled `s`,
    /// ordered by row.
    cells: Vec<Vec<(usize, usize)>>,
    /// `users[s-1]` is `K_s`, 0-based and ascending.
    users: Vec<Vec<usize>>,
}

impl OccupancyMap {
    fn build(array: &PdaArray) -> Self {
        let s_count = array.declared_s;
        let mut cells = vec![Vec::new(); s_count];
        for f in 0..array.rows {
            for k in 0..array.users {
                if let Cell::Int(s) = array.cell(f, k) {
                    cells[s as usize - 1].push((f, k));
                }
            }
        }
        let users = cells
            .iter()
            .map(|c| {
                let mut ks: Vec<usize> = c.iter().map(|&(_, k)| k).collect();
                ks.sort_unstable();
                ks
            })
            .collect();
        Self { cells, users }
    }

    /// Number of distinct integers `S`.
    pub fn labels(&self) -> usize {
        self.cells.len()
    }

    /// `K_s` as 0-based column indices; `s` is 1-based.
    pub fn users_of(&self, s: u32) -> &[usize] {
        &self.users[s as usize - 1]
    }

    /// `K_s` with 1-based column numbers, as written in reports.
    pub fn users_of_one_based(&self, s: u32) -> Vec<usize> {
        self.users_of(s).iter().map(|k| k + 1).collect()
    }

    /// `|K_s|`.
    pub fn size(&self, s: u32) -> usize {
        self.users[s as usize - 1].len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.users.iter().map(Vec::len).collect()
    }

    /// The 0-based `(row, column)` cells holding `s`.
    pub fn cells_of(&self, s: u32) -> &[(usize, usize)] {
        &self.cells[s as usize - 1]
    }
}

/// The `(K, F, Z, S)` parameters of a PDA.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PdaParams {
    pub k: usize,
    pub f: usize,
    pub z: usize,
    pub s: usize,
}

impl fmt::Display for PdaParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.k, self.f, self.z, self.s)
    }
}

/// A grid known to satisfy C1–C3, with its occupancy precomputed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pda {
    array: PdaArray,
    occupancy: OccupancyMap,
}

impl Pda {
    pub fn new(array: PdaArray) -> Result<Self, PdaError> {
        let report = validate(&array);
        if !report.valid {
            return Err(PdaError::Invalid(report));
        }
        let occupancy = OccupancyMap::build(&array);
        Ok(Self { array, occupancy })
    }

    pub fn parse(text: &str) -> Result<Self, PdaError> {
        PdaArray::parse(text)?.into_pda()
    }

    pub fn params(&self) -> PdaParams {
        PdaParams {
            k: self.k(),
            f: self.f(),
            z: self.z(),
            s: self.s(),
        }
    }

    pub fn k(&self) -> usize {
        self.array.users
    }

    pub fn f(&self) -> usize {
        self.array.rows
    }

    pub fn z(&self) -> usize {
        self.array.declared_z
    }

    pub fn s(&self) -> usize {
        self.array.declared_s
    }

    pub fn cell(&self, f: usize, k: usize) -> Cell {
        self.array.cell(f, k)
    }

    pub fn array(&self) -> &PdaArray {
        &self.array
    }

    pub fn occupancy(&self) -> &OccupancyMap {
        &self.occupancy
    }

    /// `Some(g)` when every integer appears in exactly `g` columns.
    pub fn regularity(&self) -> Option<usize> {
        regularity(self)
    }

    /// `M/N = Z/F`.
    pub fn caching_ratio(&self) -> BigRational {
        caching_ratio(self)
    }

    /// A PDA with no integers: every user caches the whole library.
    pub fn is_full_cache(&self) -> bool {
        self.s() == 0
    }

    pub fn to_text(&self) -> String {
        self.array.to_text()
    }
}

impl fmt::Display for Pda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

pub fn occupancy(pda: &Pda) -> &OccupancyMap {
    pda.occupancy()
}

pub fn regularity(pda: &Pda) -> Option<usize> {
    let sizes = pda.occupancy.sizes();
    let first = *sizes.first()?;
    sizes.iter().all(|&g| g == first).then_some(first)
}

pub fn caching_ratio(pda: &Pda) -> BigRational {
    BigRational::new(BigInt::from(pda.z()), BigInt::from(pda.f()))
}
