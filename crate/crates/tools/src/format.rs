//! Plain-text input files.
//!
//! Both formats are `key = value` lines; `#` starts a comment and a value
//! may continue over several lines while brackets are open.
//!
//! Module files (`.km`):
//!
//! ```text
//! p = 2            # characteristic
//! q = 4            # field size, a power of p (default p)
//! e = 1            # ramification index (default 1)
//! n = 2            # dimension (checked against A)
//! precision = 16   # optional absolute precision of every entry
//! A = [[1, u], [0, (a+1)*u^2]]
//! g = [[1, 0], [u^-1, 1]]   # optional lattice basis, columns = vectors
//! ```
//!
//! Kempf files (`.kf`): `q`, `m = dim M`, `n = dim N`, `S = [[...], ...]`
//! with rows spanning `S ⊂ F_q^m ⊗ F_q^n` (coordinate `k·n + l` is
//! `m_k ⊗ n_l`), and optionally filtered spaces
//! `alpha_m = [(w, [row]), ...]`, `alpha_n = [...]` given as lists of
//! (weight, basis vector) pairs.

use std::collections::BTreeMap;

use kisin_core::filtered::{FilteredSpace, FiltrationPair};
use kisin_core::fqlin::FqSubspace;
use kisin_core::module::{EtalePhiModule, KisinLattice};
use kisin_core::rational::Q;
use kisin_core::series::EXACT;
use kisin_core::{Error as CoreError, Field, Fq, LaurentSeries, SeriesMatrix};

use crate::error::{ToolError, ToolResult};
use crate::literal::{format_series, parse_series};

/// Key/value pairs with the line number each key started on.
fn key_values(text: &str) -> ToolResult<BTreeMap<String, (usize, String)>> {
    let mut out = BTreeMap::new();
    let mut pending: Option<(usize, String, String)> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some((start, key, mut val)) = pending.take() {
            val.push(' ');
            val.push_str(line);
            if depth(&val) > 0 {
                pending = Some((start, key, val));
            } else {
                insert(&mut out, start, key, val)?;
            }
            continue;
        }
        let (key, val) = line.split_once('=').ok_or_else(|| ToolError::parse(idx + 1, "expected `key = value`"))?;
        let (key, val) = (key.trim().to_string(), val.trim().to_string());
        if depth(&val) > 0 {
            pending = Some((idx + 1, key, val));
        } else {
            insert(&mut out, idx + 1, key, val)?;
        }
    }
    if let Some((start, key, _)) = pending {
        return Err(ToolError::parse(start, format!("unclosed bracket in `{key}`")));
    }
    Ok(out)
}

fn insert(out: &mut BTreeMap<String, (usize, String)>, line: usize, key: String, val: String) -> ToolResult<()> {
    if out.insert(key.clone(), (line, val)).is_some() {
        return Err(ToolError::parse(line, format!("duplicate key `{key}`")));
    }
    Ok(())
}

fn depth(s: &str) -> i64 {
    s.chars().map(|c| match c {
        '[' | '(' => 1,
        ']' | ')' => -1,
        _ => 0,
    }).sum()
}

/// Splits on `sep` outside all brackets.
fn split_top(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut d, mut start) = (0i64, 0);
    for (i, c) in s.char_indices() {
        match c {
            '[' | '(' => d += 1,
            ']' | ')' => d -= 1,
            c if c == sep && d == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn strip(s: &str, open: char, close: char, line: usize) -> ToolResult<&str> {
    let t = s.trim();
    t.strip_prefix(open)
        .and_then(|t| t.strip_suffix(close))
        .ok_or_else(|| ToolError::parse(line, format!("expected `{open}...{close}`, found `{t}`")))
}

/// `[[x, y], [z, w]]` as rows of raw entries.
fn matrix_rows(s: &str, line: usize) -> ToolResult<Vec<Vec<String>>> {
    let inner = strip(s, '[', ']', line)?;
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    split_top(inner, ',')
        .into_iter()
        .map(|row| Ok(split_top(strip(row, '[', ']', line)?, ',').into_iter().map(|x| x.trim().to_string()).collect()))
        .collect()
}

fn parse_int<T: std::str::FromStr>(kv: &BTreeMap<String, (usize, String)>, key: &str) -> ToolResult<Option<T>> {
    match kv.get(key) {
        None => Ok(None),
        Some((line, v)) => v.parse().map(Some).map_err(|_| ToolError::parse(*line, format!("`{key}` must be an integer"))),
    }
}

fn require<T>(v: Option<T>, key: &str) -> ToolResult<T> {
    v.ok_or_else(|| ToolError::parse(0, format!("missing key `{key}`")))
}

fn field_from(kv: &BTreeMap<String, (usize, String)>) -> ToolResult<Field> {
    let p: Option<u32> = parse_int(kv, "p")?;
    let q: Option<u32> = parse_int(kv, "q")?;
    let line = kv.get("q").or_else(|| kv.get("p")).map_or(0, |x| x.0);
    let field = match (p, q) {
        (None, None) => return Err(ToolError::parse(0, "missing key `p` or `q`")),
        (Some(p), None) => Field::new(p, 1),
        (_, Some(q)) => Field::with_size(q),
    }
    .map_err(|e| ToolError::parse(line, e.to_string()))?;
    if let Some(p) = p {
        if p != field.characteristic() {
            return Err(ToolError::parse(line, format!("q = {} is not a power of p = {p}", field.size())));
        }
    }
    Ok(field)
}

fn series_matrix(rows: &[Vec<String>], field: &Field, precision: Option<i64>, line: usize) -> ToolResult<SeriesMatrix> {
    let n = rows.len();
    let cols = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != cols) {
        return Err(ToolError::parse(line, "rows of unequal length"));
    }
    let mut entries = Vec::with_capacity(n * cols);
    for r in rows {
        for x in r {
            let mut s = parse_series(x, field).map_err(|m| ToolError::parse(line, format!("`{x}`: {m}")))?;
            if let Some(pr) = precision {
                s = s.truncate(pr);
            }
            entries.push(s);
        }
    }
    Ok(SeriesMatrix::from_entries(field, n, cols, entries))
}

fn format_matrix(m: &SeriesMatrix, precision: Option<i64>) -> String {
    let rows: Vec<String> = (0..m.rows())
        .map(|i| {
            let xs: Vec<String> = (0..m.cols())
                .map(|j| {
                    let x = m.get(i, j);
                    // the global precision is implied, so do not repeat it
                    let x = match precision {
                        Some(p) if x.prec() == p => x.with_prec(EXACT),
                        _ => x.clone(),
                    };
                    format_series(&x, m.field())
                })
                .collect();
            format!("[{}]", xs.join(", "))
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

/// A parsed module file.
#[derive(Clone, Debug)]
pub struct ModuleFile {
    pub field: Field,
    pub e: u32,
    pub precision: Option<i64>,
    pub a: SeriesMatrix,
    pub g: Option<SeriesMatrix>,
}

impl ModuleFile {
    pub fn parse(text: &str) -> ToolResult<Self> {
        let kv = key_values(text)?;
        for key in kv.keys() {
            if !["p", "q", "e", "n", "precision", "A", "g"].contains(&key.as_str()) {
                return Err(ToolError::parse(kv[key].0, format!("unknown key `{key}`")));
            }
        }
        let field = field_from(&kv)?;
        let e: u32 = parse_int(&kv, "e")?.unwrap_or(1);
        if e == 0 {
            return Err(ToolError::parse(kv["e"].0, "e must be positive"));
        }
        let precision: Option<i64> = parse_int(&kv, "precision")?;
        let (aline, atext) = require(kv.get("A"), "A")?;
        let a = series_matrix(&matrix_rows(atext, *aline)?, &field, precision, *aline)?;
        if !a.is_square() || a.rows() == 0 {
            return Err(ToolError::parse(*aline, "A must be a nonempty square matrix"));
        }
        if let Some(n) = parse_int::<usize>(&kv, "n")? {
            if n != a.rows() {
                return Err(ToolError::parse(kv["n"].0, format!("n = {n} but A is {}x{}", a.rows(), a.cols())));
            }
        }
        let g = match kv.get("g") {
            None => None,
            Some((line, text)) => {
                let g = series_matrix(&matrix_rows(text, *line)?, &field, precision, *line)?;
                if g.rows() != a.rows() || !g.is_square() {
                    return Err(ToolError::parse(*line, "g must have the shape of A"));
                }
                Some(g)
            }
        };
        let file = ModuleFile { field, e, precision, a, g };
        // reject non-invertible data here, with the core diagnostic
        file.module().map_err(|err| match err {
            // an uncertified determinant is a precision problem, not bad syntax
            CoreError::InsufficientPrecision(m) => {
                ToolError::Core(CoreError::InsufficientPrecision(format!("A (line {aline}): val det is not certified: {m}")))
            }
            other => ToolError::parse(*aline, format!("A is not invertible: {other}")),
        })?;
        if let Some((line, _)) = kv.get("g") {
            file.lattice().map_err(|err| ToolError::parse(*line, format!("g is not a lattice basis: {err}")))?;
        }
        Ok(file)
    }

    pub fn module(&self) -> kisin_core::Result<EtalePhiModule> {
        EtalePhiModule::new(&self.field, self.e, self.a.clone())
    }

    /// The lattice spanned by `g`, or the standard lattice.
    pub fn lattice(&self) -> kisin_core::Result<KisinLattice> {
        let m = self.module()?;
        match &self.g {
            Some(g) => m.lattice(g.clone()),
            None => Ok(m.standard_lattice()),
        }
    }

    /// Canonical text; parsing it gives back the same file.
    pub fn to_text(&self) -> String {
        let mut out = format!("p = {}\nq = {}\ne = {}\nn = {}\n", self.field.characteristic(), self.field.size(), self.e, self.a.rows());
        if let Some(p) = self.precision {
            out += &format!("precision = {p}\n");
        }
        out += &format!("A = {}\n", format_matrix(&self.a, self.precision));
        if let Some(g) = &self.g {
            out += &format!("g = {}\n", format_matrix(g, self.precision));
        }
        out
    }

    /// File text for an arbitrary lattice (basis and ambient Frobenius).
    pub fn from_lattice(l: &KisinLattice) -> Self {
        ModuleFile {
            field: l.field().clone(),
            e: l.e(),
            precision: None,
            a: l.parent().frobenius_matrix().clone(),
            g: Some(l.basis().clone()),
        }
    }
}

fn parse_q(s: &str, line: usize) -> ToolResult<Q> {
    let s = s.trim();
    let bad = || ToolError::parse(line, format!("`{s}` is not a rational number"));
    match s.split_once('/') {
        Some((n, d)) => {
            let (n, d): (i64, i64) = (n.trim().parse().map_err(|_| bad())?, d.trim().parse().map_err(|_| bad())?);
            if d == 0 {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from(s.parse::<i64>().map_err(|_| bad())?)),
    }
}

fn fq_row(items: &[String], field: &Field, line: usize) -> ToolResult<Vec<Fq>> {
    items
        .iter()
        .map(|x| {
            let s = parse_series(x, field).map_err(|m| ToolError::parse(line, format!("`{x}`: {m}")))?;
            match s.terms().collect::<Vec<_>>().as_slice() {
                [] => Ok(Fq::ZERO),
                [(0, c)] => Ok(*c),
                _ => Err(ToolError::parse(line, format!("`{x}` is not a field element"))),
            }
        })
        .collect()
}

/// A parsed Kempf file.
#[derive(Clone, Debug)]
pub struct KempfFile {
    pub field: Field,
    pub m: usize,
    pub n: usize,
    pub s: FqSubspace,
    pub alpha: Option<FiltrationPair>,
}

impl KempfFile {
    pub fn parse(text: &str) -> ToolResult<Self> {
        let kv = key_values(text)?;
        for key in kv.keys() {
            if !["p", "q", "m", "n", "S", "alpha_m", "alpha_n"].contains(&key.as_str()) {
                return Err(ToolError::parse(kv[key].0, format!("unknown key `{key}`")));
            }
        }
        let field = field_from(&kv)?;
        let m: usize = require(parse_int(&kv, "m")?, "m")?;
        let n: usize = require(parse_int(&kv, "n")?, "n")?;
        let (sline, stext) = require(kv.get("S"), "S")?;
        let rows: Vec<Vec<Fq>> =
            matrix_rows(stext, *sline)?.iter().map(|r| fq_row(r, &field, *sline)).collect::<ToolResult<_>>()?;
        if rows.iter().any(|r| r.len() != m * n) {
            return Err(ToolError::parse(*sline, format!("rows of S must have length m·n = {}", m * n)));
        }
        let s = FqSubspace::span(m * n, &rows, &field);
        let filtered = |key: &str, dim: usize| -> ToolResult<Option<FilteredSpace>> {
            let Some((line, text)) = kv.get(key) else { return Ok(None) };
            let inner = strip(text, '[', ']', *line)?;
            let mut basis = Vec::new();
            let mut weights = Vec::new();
            for item in split_top(inner, ',') {
                let pair = split_top(strip(item, '(', ')', *line)?, ',');
                let [w, v] = pair.as_slice() else { return Err(ToolError::parse(*line, "expected `(weight, [vector])`")) };
                weights.push(parse_q(w, *line)?);
                let items: Vec<String> = split_top(strip(v, '[', ']', *line)?, ',').into_iter().map(|x| x.trim().to_string()).collect();
                let row = fq_row(&items, &field, *line)?;
                if row.len() != dim {
                    return Err(ToolError::parse(*line, format!("vectors of `{key}` must have length {dim}")));
                }
                basis.push(row);
            }
            FilteredSpace::new(basis, weights, &field).map(Some).map_err(|e| ToolError::parse(*line, e.to_string()))
        };
        let alpha = match (filtered("alpha_m", m)?, filtered("alpha_n", n)?) {
            (Some(fm), Some(fn_)) => Some(FiltrationPair { m: fm, n: fn_ }),
            (None, None) => None,
            _ => return Err(ToolError::parse(0, "give both `alpha_m` and `alpha_n` or neither")),
        };
        Ok(KempfFile { field, m, n, s, alpha })
    }
}

/// Formats a field-element vector as `[x, y, ...]`.
pub fn format_vector(v: &[Fq], field: &Field) -> String {
    let xs: Vec<String> = v.iter().map(|&x| format_series(&LaurentSeries::monomial(x, 0), field)).collect();
    format!("[{}]", xs.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;

    const DIAG: &str = "# diag(1, u)\np = 2\ne = 1\nn = 2\nA = [[1, 0],\n     [0, u]]\n";

    #[test]
    fn module_file_round_trip() {
        let f = ModuleFile::parse(DIAG).unwrap();
        assert_eq!(f.lattice().unwrap().hodge_divisors(), &[0, 1]);
        let text = f.to_text();
        let again = ModuleFile::parse(&text).unwrap();
        assert_eq!(again.to_text(), text);
    }

    #[test]
    fn precision_is_applied_and_preserved() {
        let f = ModuleFile::parse("q = 4\nprecision = 8\nA = [[a, u^3], [0, (a+1)*u]]").unwrap();
        assert_eq!(f.a.get(0, 1).prec(), 8);
        let text = f.to_text();
        assert!(text.contains("precision = 8"));
        assert_eq!(ModuleFile::parse(&text).unwrap().to_text(), text);
    }

    #[test]
    fn diagnostics() {
        let e = ModuleFile::parse("p = 2\nA = [[1, 1], [1, 1]]").unwrap_err();
        assert!(matches!(e, ToolError::Parse { line: 2, .. }), "{e}");
        assert!(e.to_string().contains("not invertible"));
        assert!(matches!(ModuleFile::parse("p = 2\nA = [[1, 0]"), Err(ToolError::Parse { .. })));
        assert!(matches!(ModuleFile::parse("p = 2\nq = 9\nA = [[1]]"), Err(ToolError::Parse { .. })));
        assert!(matches!(ModuleFile::parse("p = 2\nB = [[1]]\nA = [[1]]"), Err(ToolError::Parse { line: 2, .. })));
        assert_eq!(ModuleFile::parse("p = 2\nA = [[u^]]").unwrap_err().exit_code(), 2);
        // determinant zero at the stated precision
        let e = ModuleFile::parse("p = 2\nprecision = 3\nA = [[u, u^2], [1, u]]").unwrap_err();
        assert_eq!(e.exit_code(), 3, "{e}");
        assert!(e.to_string().contains("val det is not certified"));
    }

    #[test]
    fn kempf_file() {
        let k = KempfFile::parse("q = 2\nm = 2\nn = 2\nS = [[1, 0, 0, 0]]\nalpha_m = [(-1, [1, 0]), (1, [0, 1])]\nalpha_n = [(-1, [1, 0]), (1, [0, 1])]").unwrap();
        assert_eq!(k.s.dim(), 1);
        let alpha = k.alpha.unwrap();
        assert_eq!(alpha.m.weights(), &[Q::from(-1), Q::from(1)]);
        assert!(KempfFile::parse("q = 2\nm = 2\nn = 2\nS = [[1, 0, 0]]").is_err());
    }
}
