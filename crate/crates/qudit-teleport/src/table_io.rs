//! Line-oriented text format for correction tables.
//!
//! A table file carries a `dimension` header, a `ruleset` name, and exactly
//! N³ rows of the form
//!
//! ```text
//! l m n : perm=[p_0 … p_{N-1}] phase=[t_0 … t_{N-1}]
//! ```
//!
//! meaning U = Σ_r ω^{t_r} |p_r,p_r⟩⟨r,r| on the diagonal subspace. Blank
//! lines and `#` comments are allowed anywhere. Phases are exponent integers
//! over N, never floats, so files round-trip exactly.

use std::fmt::Write as _;
use std::path::Path;

use crate::linalg::PhasePermOp;
use crate::protocol::{correction, diagonal_rows, op_from_diagonal_rows, CorrectionRuleset, Outcome};
use crate::{Error, Result};

/// One parsed table row: an outcome plus the diagonal data of its operator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableRow {
    pub outcome: Outcome,
    pub perm: Vec<usize>,
    pub phases: Vec<u32>,
}

impl TableRow {
    /// The full-space operator this row denotes.
    pub fn operator(&self, dim: usize) -> Result<PhasePermOp> {
        op_from_diagonal_rows(dim, &self.perm, &self.phases)
    }
}

/// A complete correction table: N³ rows in lexicographic (l, m, n) order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableFile {
    pub dimension: usize,
    pub ruleset: String,
    rows: Vec<TableRow>,
}

impl TableFile {
    /// Renders a built-in ruleset to rows by reading each correction's
    /// diagonal action.
    pub fn from_ruleset(rs: CorrectionRuleset, dim: usize) -> Result<Self> {
        let mut rows = Vec::with_capacity(dim * dim * dim);
        for o in Outcome::all(dim) {
            let op = correction(rs, dim, o)?;
            let (perm, phases) = diagonal_rows(&op, dim)?;
            rows.push(TableRow { outcome: o, perm, phases });
        }
        Ok(TableFile { dimension: dim, ruleset: rs.name().to_string(), rows })
    }

    pub fn rows(&self) -> &[TableRow] {
        &self.rows
    }

    pub fn row(&self, o: Outcome) -> &TableRow {
        let d = self.dimension;
        &self.rows[o.l * d * d + o.m * d + o.n]
    }

    /// The full-space operator for one outcome.
    pub fn operator(&self, o: Outcome) -> Result<PhasePermOp> {
        o.validate(self.dimension)?;
        self.row(o).operator(self.dimension)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# correction table: one row per outcome {{l m n}}");
        let _ = writeln!(out, "# row operator: sum_r w^phase[r] |perm[r],perm[r]><r,r|");
        let _ = writeln!(out, "dimension {}", self.dimension);
        let _ = writeln!(out, "ruleset {}", self.ruleset);
        for row in &self.rows {
            let perm: Vec<String> = row.perm.iter().map(|p| p.to_string()).collect();
            let phase: Vec<String> = row.phases.iter().map(|t| t.to_string()).collect();
            let _ = writeln!(
                out,
                "{} : perm=[{}] phase=[{}]",
                row.outcome,
                perm.join(" "),
                phase.join(" ")
            );
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Parses a table file, validating the header, every row, bijectivity of
    /// each perm, phase ranges, duplicates, and completeness.
    pub fn parse(text: &str) -> Result<Self> {
        let mut dimension: Option<usize> = None;
        let mut ruleset: Option<String> = None;
        let mut seen: Vec<Option<(usize, TableRow)>> = Vec::new();

        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let content = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix("dimension") {
                if dimension.is_some() {
                    return parse_err(line, "duplicate dimension header");
                }
                let d: usize = rest
                    .trim()
                    .parse()
                    .map_err(|_| parse_error(line, "dimension must be an integer"))?;
                if d < 2 {
                    return parse_err(line, "dimension must be at least 2");
                }
                dimension = Some(d);
                seen = vec![None; d * d * d];
                continue;
            }
            if let Some(rest) = content.strip_prefix("ruleset") {
                if ruleset.is_some() {
                    return parse_err(line, "duplicate ruleset header");
                }
                let name = rest.trim();
                if name.is_empty() {
                    return parse_err(line, "ruleset name missing");
                }
                ruleset = Some(name.to_string());
                continue;
            }
            let dim = match dimension {
                Some(d) => d,
                None => return parse_err(line, "row before dimension header"),
            };
            let row = parse_row(line, content, dim)?;
            let o = row.outcome;
            let idx = o.l * dim * dim + o.m * dim + o.n;
            if seen[idx].is_some() {
                return parse_err(line, &format!("duplicate row for outcome {o}"));
            }
            seen[idx] = Some((line, row));
        }

        let dimension = dimension.ok_or_else(|| parse_error(0, "missing dimension header"))?;
        let ruleset = ruleset.ok_or_else(|| parse_error(0, "missing ruleset header"))?;
        let mut rows = Vec::with_capacity(seen.len());
        for (idx, slot) in seen.into_iter().enumerate() {
            match slot {
                Some((_, row)) => rows.push(row),
                None => {
                    let d = dimension;
                    let o = Outcome::new(idx / (d * d), (idx / d) % d, idx % d);
                    return parse_err(0, &format!("missing row for outcome {o}"));
                }
            }
        }
        Ok(TableFile { dimension, ruleset, rows })
    }
}

fn parse_error(line: usize, msg: &str) -> Error {
    Error::Parse { line, msg: msg.to_string() }
}

fn parse_err<T>(line: usize, msg: &str) -> Result<T> {
    Err(parse_error(line, msg))
}

fn parse_row(line: usize, content: &str, dim: usize) -> Result<TableRow> {
    let (head, tail) = content
        .split_once(':')
        .ok_or_else(|| parse_error(line, "row needs `l m n : perm=[...] phase=[...]`"))?;
    let indices: Vec<usize> = head
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| parse_error(line, "outcome indices must be integers")))
        .collect::<Result<_>>()?;
    if indices.len() != 3 {
        return parse_err(line, "outcome needs exactly three indices");
    }
    let o = Outcome::new(indices[0], indices[1], indices[2]);
    if o.validate(dim).is_err() {
        return parse_err(line, &format!("outcome {o} out of range for dimension {dim}"));
    }

    let perm_list = bracket_list(line, tail, "perm")?;
    let phase_list = bracket_list(line, tail, "phase")?;
    if perm_list.len() != dim || phase_list.len() != dim {
        return parse_err(line, &format!("perm and phase need exactly {dim} entries"));
    }
    let perm: Vec<usize> = perm_list
        .iter()
        .map(|t| t.parse::<usize>().map_err(|_| parse_error(line, "perm entries must be integers")))
        .collect::<Result<_>>()?;
    let mut hit = vec![false; dim];
    for &p in &perm {
        if p >= dim || hit[p] {
            return parse_err(line, "perm must be a bijection");
        }
        hit[p] = true;
    }
    let phases: Vec<u32> = phase_list
        .iter()
        .map(|t| t.parse::<u32>().map_err(|_| parse_error(line, "phase entries must be integers")))
        .collect::<Result<_>>()?;
    if phases.iter().any(|&t| t >= dim as u32) {
        return parse_err(line, &format!("phase exponents must lie in 0..{dim}"));
    }
    Ok(TableRow { outcome: o, perm, phases })
}

fn bracket_list(line: usize, tail: &str, key: &str) -> Result<Vec<String>> {
    let marker = format!("{key}=[");
    let start = tail
        .find(&marker)
        .ok_or_else(|| parse_error(line, &format!("missing {key}=[...]")))?;
    let rest = &tail[start + marker.len()..];
    let end = rest
        .find(']')
        .ok_or_else(|| parse_error(line, &format!("unterminated {key} list")))?;
    Ok(rest[..end].split_whitespace().map(str::to_string).collect())
}

/// Outcomes where two parsed tables denote different operators.
pub fn compare_tables(a: &TableFile, b: &TableFile) -> Result<Vec<Outcome>> {
    if a.dimension != b.dimension {
        return Err(Error::DimensionMismatch(a.dimension, b.dimension));
    }
    let mut diffs = Vec::new();
    for o in Outcome::all(a.dimension) {
        let ua = a.operator(o)?;
        let ub = b.operator(o)?;
        if ua.max_entry_diff(&ub)? > crate::verifier::OP_DIFF_TOLERANCE {
            diffs.push(o);
        }
    }
    Ok(diffs)
}
