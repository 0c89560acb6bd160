//! Text file formats: tensors and matrices with optional wildcard cells,
//! decompositions, and NAE-3SAT instances in a DIMACS-style layout.
//!
//! All formats are whitespace-separated token streams with a leading
//! format tag; bodies are row-major with the last index fastest. Wildcard
//! cells are written as `*`.

use std::fmt;

use tendec_core::field::FieldSpec;
use tendec_core::matrix::Mat;
use tendec_core::reduction::{Literal, Nae3SatInstance};
use tendec_core::tensor::{Decomposition, Tensor3};
use tendec_core::wildcard::{Cell, WildMat, WildTensor3};

#[derive(Debug, Clone)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.col, self.msg)
    }
}

impl std::error::Error for ParseError {}

struct Tokens<'a> {
    items: Vec<(usize, usize, &'a str)>,
    pos: usize,
    last: (usize, usize),
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Tokens<'a> {
        let mut items = Vec::new();
        let mut last = (1, 1);
        for (ln, line) in text.lines().enumerate() {
            let mut col = 1;
            for tok in line.split_whitespace() {
                let off = line[col - 1..].find(tok).unwrap() + col;
                items.push((ln + 1, off, tok));
                col = off + tok.len();
                last = (ln + 1, col);
            }
        }
        Tokens { items, pos: 0, last }
    }

    fn err(&self, at: (usize, usize), msg: String) -> ParseError {
        ParseError { line: at.0, col: at.1, msg }
    }

    fn next(&mut self, what: &str) -> Result<(usize, usize, &'a str), ParseError> {
        match self.items.get(self.pos) {
            Some(&item) => {
                self.pos += 1;
                Ok(item)
            }
            None => Err(self.err(self.last, format!("unexpected end of input, expected {what}"))),
        }
    }

    fn expect(&mut self, word: &str) -> Result<(), ParseError> {
        let (l, c, tok) = self.next(&format!("`{word}`"))?;
        if tok != word {
            return Err(self.err((l, c), format!("expected `{word}`, found `{tok}`")));
        }
        Ok(())
    }

    fn number<T: core::str::FromStr>(&mut self, what: &str) -> Result<T, ParseError> {
        let (l, c, tok) = self.next(what)?;
        tok.parse()
            .map_err(|_| self.err((l, c), format!("expected {what}, found `{tok}`")))
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        match self.items.get(self.pos) {
            None => Ok(()),
            Some(&(l, c, tok)) => Err(self.err((l, c), format!("unexpected trailing token `{tok}`"))),
        }
    }
}

fn parse_field_header(toks: &mut Tokens<'_>) -> Result<(u32, u32), ParseError> {
    toks.expect("field")?;
    let p: u32 = toks.number("prime p")?;
    let k: u32 = toks.number("extension degree k")?;
    Ok((p, k))
}

fn parse_cells(
    toks: &mut Tokens<'_>,
    count: usize,
    q: u32,
) -> Result<Vec<Option<u32>>, ParseError> {
    let mut cells = Vec::with_capacity(count);
    for _ in 0..count {
        let (l, c, tok) = toks.next("a cell value or `*`")?;
        if tok == "*" {
            cells.push(None);
            continue;
        }
        let v: u32 = tok
            .parse()
            .map_err(|_| toks.err((l, c), format!("expected a cell value or `*`, found `{tok}`")))?;
        if v >= q {
            return Err(toks.err((l, c), format!("cell value {v} out of range for field order {q}")));
        }
        cells.push(Some(v));
    }
    Ok(cells)
}

/// A parsed tensor file, field parameters not yet materialized.
#[derive(Debug, Clone)]
pub struct ParsedTensor {
    pub p: u32,
    pub k: u32,
    pub dims: (usize, usize, usize),
    pub cells: Vec<Option<u32>>,
}

impl ParsedTensor {
    pub fn parse(text: &str) -> Result<ParsedTensor, ParseError> {
        let mut toks = Tokens::new(text);
        toks.expect("tensor")?;
        toks.expect("v1")?;
        let (p, k) = parse_field_header(&mut toks)?;
        let q = field_order(p, k);
        toks.expect("dims")?;
        let dp: usize = toks.number("dimension p")?;
        let dq: usize = toks.number("dimension q")?;
        let ds: usize = toks.number("dimension s")?;
        let cells = parse_cells(&mut toks, dp * dq * ds, q)?;
        toks.finish()?;
        Ok(ParsedTensor { p, k, dims: (dp, dq, ds), cells })
    }

    pub fn into_wild<'f>(&self, field: &'f FieldSpec) -> WildTensor3<'f> {
        let cells = self
            .cells
            .iter()
            .map(|c| match c {
                Some(v) => Cell::Fixed(*v),
                None => Cell::Wild,
            })
            .collect();
        WildTensor3::new(field, self.dims, cells)
    }

    /// Fails when any cell is a wildcard.
    pub fn into_tensor<'f>(&self, field: &'f FieldSpec) -> Option<Tensor3<'f>> {
        let data: Option<Vec<u32>> = self.cells.iter().copied().collect();
        Some(Tensor3::new(field, self.dims, data?))
    }
}

#[derive(Debug, Clone)]
pub struct ParsedMatrix {
    pub p: u32,
    pub k: u32,
    pub rows: usize,
    pub cols: usize,
    pub cells: Vec<Option<u32>>,
}

impl ParsedMatrix {
    pub fn parse(text: &str) -> Result<ParsedMatrix, ParseError> {
        let mut toks = Tokens::new(text);
        toks.expect("matrix")?;
        toks.expect("v1")?;
        let (p, k) = parse_field_header(&mut toks)?;
        let q = field_order(p, k);
        toks.expect("dims")?;
        let rows: usize = toks.number("row count")?;
        let cols: usize = toks.number("column count")?;
        let cells = parse_cells(&mut toks, rows * cols, q)?;
        toks.finish()?;
        Ok(ParsedMatrix { p, k, rows, cols, cells })
    }

    pub fn into_wild<'f>(&self, field: &'f FieldSpec) -> WildMat<'f> {
        let cells = self
            .cells
            .iter()
            .map(|c| match c {
                Some(v) => Cell::Fixed(*v),
                None => Cell::Wild,
            })
            .collect();
        WildMat::new(field, self.rows, self.cols, cells)
    }
}

#[derive(Debug, Clone)]
pub struct ParsedDecomposition {
    pub p: u32,
    pub k: u32,
    pub rank: usize,
    pub dims: (usize, usize, usize),
    pub a: Vec<u32>,
    pub b: Vec<u32>,
    pub c: Vec<u32>,
}

impl ParsedDecomposition {
    pub fn parse(text: &str) -> Result<ParsedDecomposition, ParseError> {
        let mut toks = Tokens::new(text);
        toks.expect("decomposition")?;
        toks.expect("v1")?;
        let (p, k) = parse_field_header(&mut toks)?;
        let q = field_order(p, k);
        toks.expect("rank")?;
        let rank: usize = toks.number("rank")?;
        toks.expect("dims")?;
        let dp: usize = toks.number("dimension p")?;
        let dq: usize = toks.number("dimension q")?;
        let ds: usize = toks.number("dimension s")?;
        let mut factor = |count: usize| -> Result<Vec<u32>, ParseError> {
            parse_cells(&mut toks, count, q).and_then(|cells| {
                cells
                    .into_iter()
                    .map(|c| {
                        c.ok_or(ParseError {
                            line: 0,
                            col: 0,
                            msg: "wildcards are not allowed in decompositions".into(),
                        })
                    })
                    .collect()
            })
        };
        let a = factor(rank * dp)?;
        let b = factor(rank * dq)?;
        let c = factor(rank * ds)?;
        toks.finish()?;
        Ok(ParsedDecomposition { p, k, rank, dims: (dp, dq, ds), a, b, c })
    }

    pub fn into_decomposition<'f>(&self, field: &'f FieldSpec) -> Decomposition<'f> {
        Decomposition::new(
            Mat::new(field, self.rank, self.dims.0, self.a.clone()),
            Mat::new(field, self.rank, self.dims.1, self.b.clone()),
            Mat::new(field, self.rank, self.dims.2, self.c.clone()),
        )
    }
}

fn field_order(p: u32, k: u32) -> u32 {
    // Overflow-tolerant: the FieldSpec constructor re-validates; this only
    // gates token range checks.
    (0..k).fold(1u64, |acc, _| (acc * p as u64).min(u32::MAX as u64)) as u32
}

pub fn write_wild_tensor(w: &WildTensor3<'_>) -> String {
    let f = w.field();
    let (p, q, s) = w.dims();
    let mut out = format!("tensor v1\nfield {} {}\ndims {p} {q} {s}\n", f.p(), f.k());
    for i in 0..p {
        for j in 0..q {
            let row: Vec<String> = (0..s)
                .map(|k| match w.get(i, j, k) {
                    Cell::Fixed(v) => v.to_string(),
                    Cell::Wild => "*".to_string(),
                })
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    }
    out
}

pub fn write_decomposition(d: &Decomposition<'_>) -> String {
    let f = d.a.field();
    let (p, q, s) = d.dims();
    let mut out = format!(
        "decomposition v1\nfield {} {}\nrank {}\ndims {p} {q} {s}\n",
        f.p(),
        f.k(),
        d.rank()
    );
    for m in [&d.a, &d.b, &d.c] {
        for r in 0..m.rows() {
            let row: Vec<String> = m.row(r).iter().map(|v| v.to_string()).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    }
    out
}

/// Parses `p nae <n> <m>` followed by `m` clauses of three nonzero signed
/// literals each, 0-terminated. `c` lines are comments.
pub fn parse_nae(text: &str) -> Result<Nae3SatInstance, ParseError> {
    let stripped: String = text
        .lines()
        .filter(|l| !l.trim_start().starts_with('c'))
        .collect::<Vec<_>>()
        .join("\n");
    let mut toks = Tokens::new(&stripped);
    toks.expect("p")?;
    toks.expect("nae")?;
    let n: usize = toks.number("variable count")?;
    let m: usize = toks.number("clause count")?;
    let mut clauses = Vec::with_capacity(m);
    for _ in 0..m {
        let mut lits = [Literal::pos(0); 3];
        for slot in lits.iter_mut() {
            let (l, c, tok) = toks.next("a literal")?;
            let v: i64 = tok
                .parse()
                .map_err(|_| toks.err((l, c), format!("expected a literal, found `{tok}`")))?;
            if v == 0 {
                return Err(toks.err((l, c), "clause has fewer than 3 literals".into()));
            }
            let var = v.unsigned_abs() as usize - 1;
            if var >= n {
                return Err(toks.err((l, c), format!("variable {} out of range", v.abs())));
            }
            *slot = Literal { var, negated: v < 0 };
        }
        let (l, c, tok) = toks.next("the clause terminator 0")?;
        if tok != "0" {
            return Err(toks.err((l, c), format!("expected the clause terminator 0, found `{tok}`")));
        }
        clauses.push(lits);
    }
    toks.finish()?;
    Ok(Nae3SatInstance::new(n, clauses))
}
