//! Accuracy report: one row per (source, n), plus one aggregate row per
//! source with `n = all` holding the mean over the context lengths.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

pub const REPORT_HEADER: &str = "corpus,source,n,train_acc,test_acc";

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub corpus: String,
    pub source: String,
    /// Context length, or `None` for the aggregate row.
    pub n: Option<usize>,
    pub train_acc: f64,
    pub test_acc: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub rows: Vec<ReportRow>,
}

impl Report {
    /// Append the per-source `n = all` rows (means over the existing rows).
    pub fn add_aggregates(&mut self) {
        let mut sources: Vec<(String, String)> = Vec::new();
        for r in &self.rows {
            let key = (r.corpus.clone(), r.source.clone());
            if r.n.is_some() && !sources.contains(&key) {
                sources.push(key);
            }
        }
        for (corpus, source) in sources {
            let rows: Vec<&ReportRow> =
                self.rows.iter().filter(|r| r.n.is_some() && r.corpus == corpus && r.source == source).collect();
            let k = rows.len() as f64;
            let train_acc = rows.iter().map(|r| r.train_acc).sum::<f64>() / k;
            let test_acc = rows.iter().map(|r| r.test_acc).sum::<f64>() / k;
            self.rows.push(ReportRow { corpus, source, n: None, train_acc, test_acc });
        }
    }

    pub fn aggregate(&self, source: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.n.is_none() && r.source == source)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{REPORT_HEADER}")?;
        for r in &self.rows {
            let n = r.n.map_or_else(|| "all".to_string(), |n| n.to_string());
            writeln!(w, "{},{},{},{},{}", r.corpus, r.source, n, r.train_acc, r.test_acc)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        if lines.next().transpose()?.as_deref() != Some(REPORT_HEADER) {
            return Err(Error::format("report", 1, format!("expected header {REPORT_HEADER}")));
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            let bad = |msg: &str| Error::format("report", i + 2, msg);
            let f: Vec<&str> = line.split(',').collect();
            let [corpus, source, n, train, test] = f[..] else {
                return Err(bad("expected five fields"));
            };
            let n = match n {
                "all" => None,
                n => Some(n.parse().map_err(|_| bad("bad n"))?),
            };
            rows.push(ReportRow {
                corpus: corpus.into(),
                source: source.into(),
                n,
                train_acc: train.parse().map_err(|_| bad("bad train_acc"))?,
                test_acc: test.parse().map_err(|_| bad("bad test_acc"))?,
            });
        }
        Ok(Self { rows })
    }

    /// Fixed-width table with accuracies as percentages.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<16} {:<6} {:>4} {:>9} {:>9}", "corpus", "source", "n", "train %", "test %");
        for r in &self.rows {
            let n = r.n.map_or_else(|| "all".to_string(), |n| n.to_string());
            let _ = writeln!(
                s,
                "{:<16} {:<6} {:>4} {:>9.2} {:>9.2}",
                r.corpus,
                r.source,
                n,
                100.0 * r.train_acc,
                100.0 * r.test_acc
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(source: &str, n: usize, train: f64, test: f64) -> ReportRow {
        ReportRow { corpus: "toy".into(), source: source.into(), n: Some(n), train_acc: train, test_acc: test }
    }

    #[test]
    fn aggregates_average_per_source() {
        let mut r = Report { rows: vec![row("RE", 1, 0.5, 0.25), row("CE", 1, 1.0, 0.5), row("RE", 2, 0.7, 0.35)] };
        r.add_aggregates();
        let re = r.aggregate("RE").unwrap();
        assert!((re.train_acc - 0.6).abs() < 1e-12 && (re.test_acc - 0.3).abs() < 1e-12);
        assert_eq!(r.aggregate("CE").unwrap().test_acc, 0.5);
        assert_eq!(r.rows.len(), 5);
    }

    #[test]
    fn csv_round_trip() {
        let mut r = Report { rows: vec![row("RE", 3, 0.1 + 0.2, 1.0 / 3.0)] };
        r.add_aggregates();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(Report::read_csv(buf.as_slice()).unwrap(), r);
        assert!(String::from_utf8(buf).unwrap().contains("toy,RE,all,"));
    }
}
