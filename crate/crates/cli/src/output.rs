use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
    Chart,
}

/// A finished report: JSON for machines, plain text for people.
pub struct Output {
    json: Value,
    table: String,
    chart: Option<String>,
    passed: bool,
}

impl Output {
    pub fn new(report: &impl Serialize, table: String) -> Result<Self, CliError> {
        let json = serde_json::to_value(report).map_err(|e| CliError::Internal(format!("serialising report: {e}")))?;
        Ok(Output { json, table, chart: None, passed: true })
    }

    pub fn with_chart(mut self, chart: String) -> Self {
        self.chart = Some(chart);
        self
    }

    pub fn passed(mut self, passed: bool) -> Self {
        self.passed = passed;
        self
    }

    pub fn render(self, format: Format) -> Result<(String, bool), CliError> {
        let text = match format {
            Format::Json => serde_json::to_string_pretty(&self.json).expect("values always serialise"),
            Format::Table => self.table,
            Format::Chart => self
                .chart
                .ok_or_else(|| CliError::Usage("--format chart is only available for `hfpss run`".into()))?,
        };
        Ok((text, self.passed))
    }
}

/// Left-aligned text columns.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    pub fn render(&self) -> String {
        let width = |i: usize| {
            std::iter::once(&self.header)
                .chain(&self.rows)
                .filter_map(|r| r.get(i))
                .map(|c| c.chars().count())
                .max()
                .unwrap_or(0)
        };
        let widths: Vec<usize> = (0..self.header.len()).map(width).collect();
        let line = |cells: &[String]| {
            let padded: Vec<String> =
                cells.iter().zip(&widths).map(|(c, &w)| format!("{c}{}", " ".repeat(w - c.chars().count()))).collect();
            padded.join("  ").trim_end().to_string()
        };
        let mut out = vec![line(&self.header)];
        out.extend(self.rows.iter().map(|r| line(r)));
        out.join("\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn columns_align_on_unicode() {
        let mut t = Table::new(&["k", "label"]);
        t.row(vec!["10".into(), "S^{2ρ}".into()]);
        t.row(vec!["1".into(), "x".into()]);
        assert_eq!(t.render(), "k   label\n10  S^{2ρ}\n1   x");
    }

    #[test]
    fn chart_needs_a_chart() {
        let out = Output::new(&1, String::new()).unwrap();
        assert!(matches!(out.render(Format::Chart), Err(CliError::Usage(_))));
    }
}
