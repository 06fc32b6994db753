//! Output rendering: every report renders as an aligned table, CSV, or
//! JSON; graph reports additionally render as DOT.

use serde::Serialize;

use crate::CliError;

/// Output format selector.
#[derive(Copy, Clone, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
    Dot,
}

/// One rendered cell value: a real number or a group element tuple.
#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Real(f64),
    Group(Vec<u32>),
}

impl Cell {
    fn text(&self) -> String {
        match self {
            // Avoid the "-0.000000" artifact for tiny negative values.
            Cell::Real(v) => {
                let s = format!("{v:.6}");
                if s == "-0.000000" { "0.000000".into() } else { s }
            }
            Cell::Group(t) => {
                let parts: Vec<String> = t.iter().map(u32::to_string).collect();
                format!("({})", parts.join(","))
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AtomRow {
    pub atom: String,
    pub vars: Vec<usize>,
    pub value: Cell,
    pub zero: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiagramReport {
    pub functional: String,
    pub base: String,
    pub rows: Vec<AtomRow>,
    pub total: Cell,
}

#[derive(Clone, Debug, Serialize)]
pub struct TestReport {
    pub test: String,
    pub holds: bool,
    pub violations: Vec<String>,
    pub violating_vars: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct InferReport {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub is_mrf: bool,
    pub trivial_diagram: bool,
    #[serde(skip)]
    pub dot: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct StepRow {
    pub step: usize,
    pub divergence: f64,
    pub entropy: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SecondLawReport {
    pub series: Vec<StepRow>,
    pub divergence_non_increasing: bool,
    pub entropy_non_decreasing: bool,
    pub collapsed: bool,
    pub atoms: Vec<AtomRow>,
}

/// Renders `rows` of already-formatted cells as a left-aligned table.
fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let emit = |out: &mut String, cells: &[String]| {
        let line: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    };
    emit(&mut out, &header.iter().map(|h| h.to_string()).collect::<Vec<_>>());
    for row in rows {
        emit(&mut out, row);
    }
    out
}

/// Renders rows as CSV, quoting any field containing a comma.
fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let quote = |s: &str| {
        if s.contains(',') { format!("\"{s}\"") } else { s.to_string() }
    };
    let mut out = header.iter().map(|h| quote(h)).collect::<Vec<_>>().join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.iter().map(|c| quote(c)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

fn json<T: Serialize>(report: &T) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports always serialize");
    s.push('\n');
    s
}

fn flag(b: bool) -> String {
    if b { "yes".into() } else { "no".into() }
}

impl DiagramReport {
    pub fn render(&self, format: Format) -> Result<String, CliError> {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| vec![r.atom.clone(), r.value.text(), flag(r.zero)])
            .chain(std::iter::once(vec![
                "total".into(),
                self.total.text(),
                String::new(),
            ]))
            .collect();
        match format {
            Format::Table => Ok(table(&["atom", "value", "zero"], &rows)),
            Format::Csv => Ok(csv(&["atom", "value", "zero"], &rows)),
            Format::Json => Ok(json(self)),
            Format::Dot => Err(CliError::Usage(
                "dot output is only available for infer-graph".into(),
            )),
        }
    }
}

impl TestReport {
    pub fn render(&self, format: Format) -> Result<String, CliError> {
        let rows: Vec<Vec<String>> = if self.violations.is_empty() {
            vec![vec![self.test.clone(), flag(self.holds), String::new()]]
        } else {
            self.violations
                .iter()
                .enumerate()
                .map(|(k, v)| {
                    let first = if k == 0 { self.test.clone() } else { String::new() };
                    let verdict = if k == 0 { flag(self.holds) } else { String::new() };
                    vec![first, verdict, v.clone()]
                })
                .collect()
        };
        match format {
            Format::Table => Ok(table(&["test", "holds", "violation"], &rows)),
            Format::Csv => Ok(csv(&["test", "holds", "violation"], &rows)),
            Format::Json => Ok(json(self)),
            Format::Dot => Err(CliError::Usage(
                "dot output is only available for infer-graph".into(),
            )),
        }
    }
}

impl InferReport {
    pub fn render(&self, format: Format) -> Result<String, CliError> {
        let mut rows: Vec<Vec<String>> = self
            .edges
            .iter()
            .map(|&(a, b)| vec![a.to_string(), b.to_string()])
            .collect();
        rows.push(vec!["markov".into(), flag(self.is_mrf)]);
        rows.push(vec!["trivial".into(), flag(self.trivial_diagram)]);
        match format {
            Format::Table => Ok(table(&["edge", ""], &rows)),
            Format::Csv => Ok(csv(&["from", "to"], &rows)),
            Format::Json => Ok(json(self)),
            Format::Dot => Ok(self.dot.clone()),
        }
    }
}

impl SecondLawReport {
    pub fn render(&self, format: Format) -> Result<String, CliError> {
        let mut rows: Vec<Vec<String>> = self
            .series
            .iter()
            .map(|r| {
                vec![
                    format!("X{}", r.step),
                    Cell::Real(r.divergence).text(),
                    Cell::Real(r.entropy).text(),
                ]
            })
            .collect();
        rows.push(vec![
            "divergence non-increasing".into(),
            flag(self.divergence_non_increasing),
            String::new(),
        ]);
        rows.push(vec![
            "entropy non-decreasing".into(),
            flag(self.entropy_non_decreasing),
            String::new(),
        ]);
        rows.push(vec!["collapsed".into(), flag(self.collapsed), String::new()]);
        for a in &self.atoms {
            rows.push(vec![a.atom.clone(), a.value.text(), flag(a.zero)]);
        }
        match format {
            Format::Table => Ok(table(&["step", "divergence", "entropy"], &rows)),
            Format::Csv => Ok(csv(&["step", "divergence", "entropy"], &rows)),
            Format::Json => Ok(json(self)),
            Format::Dot => Err(CliError::Usage(
                "dot output is only available for infer-graph".into(),
            )),
        }
    }
}
