use crate::error::{Error, Result};
use crate::params::StationSet;

const WORD_BITS: usize = 64;

/// A binary transmission schedule with `t` rows (time slots) and `n` columns
/// (stations). Entry `(i, j) = 1` means station `j` transmits in slot `i`
/// while it still holds an unsent packet. Rows and columns are 1-based in the
/// public API; bits are packed row-major into 64-bit words internally.
///
/// `t = 0` is a valid (empty) schedule; `n` must be at least 1.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ScheduleMatrix {
    t: usize,
    n: u32,
    wpr: usize,
    words: Vec<u64>,
}

fn words_per_row(n: u32) -> usize {
    (n as usize).div_ceil(WORD_BITS)
}

impl ScheduleMatrix {
    /// Builds a matrix from explicit rows of 0/1 entries. The row list must be
    /// non-empty (otherwise the column count would be undefined), all rows must
    /// have equal positive length, and every entry must be 0 or 1.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let first = rows.first().ok_or(Error::NoRows)?;
        let n = first.len() as u32;
        if n == 0 {
            return Err(Error::InvalidParams(
                "rows must have at least one column".into(),
            ));
        }
        let mut m = Self::zeros(rows.len(), n)?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n as usize {
                return Err(Error::RaggedRow {
                    row: i + 1,
                    got: row.len(),
                    want: n as usize,
                });
            }
            for (j, &v) in row.iter().enumerate() {
                match v {
                    0 => {}
                    1 => m.set(i, j),
                    other => {
                        return Err(Error::NonBinaryEntry {
                            row: i + 1,
                            col: j + 1,
                            value: (b'0' + other.min(9)) as char,
                        })
                    }
                }
            }
        }
        Ok(m)
    }

    /// Builds a `t x n` matrix by calling `f(slot, station)` for every entry
    /// in row-major order, with 1-based arguments.
    pub fn from_fn<F: FnMut(usize, u32) -> bool>(t: usize, n: u32, mut f: F) -> Result<Self> {
        let mut m = Self::zeros(t, n)?;
        for i in 0..t {
            for j in 0..n {
                if f(i + 1, j + 1) {
                    m.set(i, j as usize);
                }
            }
        }
        Ok(m)
    }

    /// The all-zero `t x n` matrix. `t = 0` is allowed; `n = 0` is not.
    pub fn zeros(t: usize, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("n must be at least 1".into()));
        }
        let wpr = words_per_row(n);
        Ok(Self {
            t,
            n,
            wpr,
            words: vec![0u64; t * wpr],
        })
    }

    /// The all-one `t x n` matrix.
    pub fn all_ones(t: usize, n: u32) -> Result<Self> {
        Self::from_fn(t, n, |_, _| true)
    }

    /// The `n x n` identity matrix: slot `i` schedules exactly station `i`.
    pub fn identity(n: u32) -> Result<Self> {
        Self::from_fn(n as usize, n, |i, j| i == j as usize)
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Entry at 1-based `(slot, station)`. Panics when out of range; use the
    /// fallible operations for untrusted indices.
    pub fn bit(&self, slot: usize, station: u32) -> bool {
        assert!(
            slot >= 1 && slot <= self.t,
            "slot {slot} out of range 1..={}",
            self.t
        );
        assert!(
            station >= 1 && station <= self.n,
            "station {station} out of range 1..={}",
            self.n
        );
        let idx = (station - 1) as usize;
        self.words[(slot - 1) * self.wpr + idx / WORD_BITS] >> (idx % WORD_BITS) & 1 == 1
    }

    fn set(&mut self, row0: usize, col0: usize) {
        self.words[row0 * self.wpr + col0 / WORD_BITS] |= 1u64 << (col0 % WORD_BITS);
    }

    /// Total number of 1-entries.
    pub fn ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub(crate) fn words_per_row(&self) -> usize {
        self.wpr
    }

    /// Word slice of 0-based row `row0`.
    pub(crate) fn row_words(&self, row0: usize) -> &[u64] {
        &self.words[row0 * self.wpr..(row0 + 1) * self.wpr]
    }

    /// Popcount of `row & mask` for a 0-based row and a word mask.
    pub(crate) fn row_mask_weight(&self, row0: usize, mask: &[u64]) -> u32 {
        self.row_words(row0)
            .iter()
            .zip(mask)
            .map(|(w, m)| (w & m).count_ones())
            .sum()
    }

    /// Number of 1-entries of row `slot` restricted to the stations in `s`.
    pub fn restricted_row_weight(&self, slot: usize, s: &StationSet) -> Result<u32> {
        if slot < 1 || slot > self.t {
            return Err(Error::SlotOutOfRange { slot, t: self.t });
        }
        s.validate_within(self.n)?;
        Ok(s.iter().filter(|&j| self.bit(slot, j)).count() as u32)
    }

    /// The `t x |S|` matrix formed by the columns in `s`, in ascending station
    /// order. `s` must be a non-empty subset of `1..=n`.
    pub fn column_submatrix(&self, s: &StationSet) -> Result<ScheduleMatrix> {
        if s.is_empty() {
            return Err(Error::InvalidParams(
                "column submatrix needs a non-empty station set".into(),
            ));
        }
        s.validate_within(self.n)?;
        let cols = s.members();
        Self::from_fn(self.t, cols.len() as u32, |i, j| {
            self.bit(i, cols[(j - 1) as usize])
        })
    }

    /// Vertical concatenation: the rows of each matrix in order. All matrices
    /// must share the same column count and the list must be non-empty.
    /// Stacking a single matrix yields a copy of it.
    pub fn stack(parts: &[ScheduleMatrix]) -> Result<ScheduleMatrix> {
        let first = parts.first().ok_or(Error::NoRows)?;
        let n = first.n;
        let mut words = Vec::new();
        let mut t = 0usize;
        for p in parts {
            if p.n != n {
                return Err(Error::ColumnCountMismatch {
                    expected: n,
                    got: p.n,
                });
            }
            words.extend_from_slice(&p.words);
            t += p.t;
        }
        Ok(ScheduleMatrix {
            t,
            n,
            wpr: first.wpr,
            words,
        })
    }

    /// Reorders columns: old station `j` becomes station `perm[j-1]` in the
    /// result. `perm` must be a bijection of `1..=n`.
    pub fn permute_columns(&self, perm: &[u32]) -> Result<ScheduleMatrix> {
        if perm.len() != self.n as usize {
            return Err(Error::ColumnCountMismatch {
                expected: self.n,
                got: perm.len() as u32,
            });
        }
        let mut seen = vec![false; self.n as usize];
        for &p in perm {
            if p < 1 || p > self.n {
                return Err(Error::StationOutOfRange {
                    station: p,
                    n: self.n,
                });
            }
            if seen[(p - 1) as usize] {
                return Err(Error::InvalidParams(format!(
                    "permutation maps two stations to {p}"
                )));
            }
            seen[(p - 1) as usize] = true;
        }
        let mut inv = vec![0u32; self.n as usize];
        for (j, &p) in perm.iter().enumerate() {
            inv[(p - 1) as usize] = j as u32 + 1;
        }
        Self::from_fn(self.t, self.n, |i, j| self.bit(i, inv[(j - 1) as usize]))
    }

    /// Serializes to the text format: a `MPRMAT 1 <t> <n>` header followed by
    /// `t` lines of `n` characters from `{0, 1}`.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(16 + self.t * (self.n as usize + 1));
        out.push_str(&format!("MPRMAT 1 {} {}\n", self.t, self.n));
        for i in 1..=self.t {
            for j in 1..=self.n {
                out.push(if self.bit(i, j) { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    /// Parses the text format produced by [`Self::to_text`]. Lines after the
    /// data block that are blank or start with `#` are ignored as comments.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (hline, header) = lines
            .by_ref()
            .find(|(_, l)| !l.trim().is_empty())
            .ok_or(Error::Parse {
                line: 1,
                msg: "missing header".into(),
            })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 || fields[0] != "MPRMAT" {
            return Err(Error::Parse {
                line: hline + 1,
                msg: format!("expected header `MPRMAT 1 <t> <n>`, got {header:?}"),
            });
        }
        if fields[1] != "1" {
            return Err(Error::Parse {
                line: hline + 1,
                msg: format!("unsupported format version {}", fields[1]),
            });
        }
        let t: usize = fields[2].parse().map_err(|_| Error::Parse {
            line: hline + 1,
            msg: format!("invalid row count {:?}", fields[2]),
        })?;
        let n: u32 = fields[3].parse().map_err(|_| Error::Parse {
            line: hline + 1,
            msg: format!("invalid column count {:?}", fields[3]),
        })?;
        if n == 0 {
            return Err(Error::Parse {
                line: hline + 1,
                msg: "n must be at least 1".into(),
            });
        }
        let mut m = Self::zeros(t, n)?;
        let mut read = 0usize;
        for (lineno, line) in lines.by_ref() {
            if read == t {
                let rest = line.trim();
                if rest.is_empty() || rest.starts_with('#') {
                    continue;
                }
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("unexpected content after {t} data rows: {line:?}"),
                });
            }
            let row = line.trim_end_matches(['\r']);
            if row.len() != n as usize {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("row has {} characters, expected {n}", row.len()),
                });
            }
            for (j, c) in row.chars().enumerate() {
                match c {
                    '0' => {}
                    '1' => m.set(read, j),
                    other => {
                        return Err(Error::Parse {
                            line: lineno + 1,
                            msg: format!("invalid character {other:?} at column {}", j + 1),
                        })
                    }
                }
            }
            read += 1;
        }
        if read < t {
            return Err(Error::Parse {
                line: text.lines().count(),
                msg: format!("expected {t} data rows, found {read}"),
            });
        }
        Ok(m)
    }
}

impl std::fmt::Debug for ScheduleMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ScheduleMatrix({}x{})", self.t, self.n)?;
        if self.t <= 16 && self.n <= 64 {
            for i in 1..=self.t {
                write!(f, "\n  ")?;
                for j in 1..=self.n {
                    write!(f, "{}", if self.bit(i, j) { '1' } else { '0' })?;
                }
            }
        }
        Ok(())
    }
}
