//! Plain-text and binary file formats.
//!
//! | artifact      | layout                                                  |
//! |---------------|---------------------------------------------------------|
//! | vocabulary    | `token<TAB>id` per line, ids ascending from 1, no header |
//! | edge list     | `u<TAB>v` per line, `u < v`, sorted by `(u, v)`          |
//! | matrix        | LE `u64` rows, LE `u64` cols, then LE `f32` row-major     |
//! | dataset       | CSV `context_ids,target_id,real_len`, ids space-separated |
//! | GCN metrics   | CSV `epoch,loss,auc`                                     |
//! | LSTM metrics  | CSV `epoch,loss,train_acc`                               |
//!
//! Floats in text formats are written with Rust's shortest round-trip
//! representation, so a written value parses back to the same bits.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use gramweave_core::cograph::CooccurrenceGraph;
use gramweave_core::gcn::GcnEpochMetrics;
use gramweave_core::lstm::LstmEpochMetrics;
use gramweave_core::ngram::NGramExample;
use gramweave_core::numcore::Matrix;
use gramweave_core::{TokenId, Vocabulary};

use crate::error::{Error, Result};

const MATRIX_HEADER: usize = 16;

pub fn write_vocab<W: Write>(mut w: W, vocab: &Vocabulary) -> Result<()> {
    for (token, id) in vocab.iter() {
        writeln!(w, "{token}\t{id}")?;
    }
    Ok(())
}

pub fn read_vocab<R: BufRead>(r: R) -> Result<Vocabulary> {
    let mut tokens = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let (token, id) = line
            .split_once('\t')
            .ok_or_else(|| Error::format("vocabulary", lineno, "expected token<TAB>id"))?;
        let id: usize = id.parse().map_err(|_| Error::format("vocabulary", lineno, format!("bad id {id:?}")))?;
        if id != lineno {
            return Err(Error::format("vocabulary", lineno, format!("id {id} out of sequence")));
        }
        tokens.push(token.to_owned());
    }
    let vocab = Vocabulary::from_tokens(tokens.iter().cloned())?;
    if vocab.len() != tokens.len() {
        return Err(Error::format("vocabulary", 0, "duplicate token"));
    }
    Ok(vocab)
}

pub fn write_edges<W: Write>(mut w: W, graph: &CooccurrenceGraph) -> Result<()> {
    for (u, v) in graph.edges() {
        writeln!(w, "{u}\t{v}")?;
    }
    Ok(())
}

/// Parse an edge list over nodes `1..=n_nodes`.
pub fn read_edges<R: BufRead>(r: R, n_nodes: usize) -> Result<CooccurrenceGraph> {
    let mut edges = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let bad = || Error::format("edge list", i + 1, format!("expected u<TAB>v, got {line:?}"));
        let (u, v) = line.split_once('\t').ok_or_else(bad)?;
        let u: u32 = u.parse().map_err(|_| bad())?;
        let v: u32 = v.parse().map_err(|_| bad())?;
        edges.push((TokenId(u), TokenId(v)));
    }
    Ok(CooccurrenceGraph::from_edges(n_nodes, edges)?)
}

pub fn matrix_to_bytes(m: &Matrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(MATRIX_HEADER + 4 * m.len());
    out.extend_from_slice(&(m.rows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.cols() as u64).to_le_bytes());
    for x in m.as_slice() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

/// Decode a matrix file. The byte length must match the header exactly.
pub fn matrix_from_bytes(bytes: &[u8]) -> std::result::Result<Matrix, String> {
    if bytes.len() < MATRIX_HEADER {
        return Err(format!("{} bytes is shorter than the header", bytes.len()));
    }
    let rows = u64::from_le_bytes(bytes[0..8].try_into().unwrap());
    let cols = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(4))
        .and_then(|n| n.checked_add(MATRIX_HEADER as u64))
        .ok_or_else(|| format!("header {rows}x{cols} overflows"))?;
    if bytes.len() as u64 != expected {
        return Err(format!("{rows}x{cols} matrix needs {expected} bytes, found {}", bytes.len()));
    }
    let data = bytes[MATRIX_HEADER..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Matrix::from_vec(rows as usize, cols as usize, data).map_err(|e| e.to_string())
}

pub fn write_matrix<W: Write>(mut w: W, m: &Matrix) -> Result<()> {
    w.write_all(&matrix_to_bytes(m))?;
    Ok(())
}

pub fn read_matrix<R: Read>(mut r: R) -> Result<Matrix> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    matrix_from_bytes(&bytes).map_err(|msg| Error::format("matrix", 0, msg))
}

pub fn write_dataset<W: Write>(mut w: W, examples: &[NGramExample]) -> Result<()> {
    writeln!(w, "context_ids,target_id,real_len")?;
    for e in examples {
        let ids: Vec<String> = e.context.iter().map(|t| t.0.to_string()).collect();
        writeln!(w, "{},{},{}", ids.join(" "), e.target, e.real_len)?;
    }
    Ok(())
}

pub fn read_dataset<R: BufRead>(r: R) -> Result<Vec<NGramExample>> {
    let mut lines = r.lines();
    match lines.next().transpose()? {
        Some(h) if h == "context_ids,target_id,real_len" => {}
        _ => return Err(Error::format("dataset", 1, "missing header")),
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i + 2;
        let bad = |msg: &str| Error::format("dataset", lineno, msg);
        let fields: Vec<&str> = line.split(',').collect();
        let [ctx, target, real_len] = fields[..] else {
            return Err(bad("expected three fields"));
        };
        let context = ctx
            .split(' ')
            .map(|t| t.parse().map(TokenId))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| bad("bad context id"))?;
        let target = TokenId(target.parse().map_err(|_| bad("bad target id"))?);
        let real_len: usize = real_len.parse().map_err(|_| bad("bad real_len"))?;
        let example = NGramExample::new(context, target).map_err(|e| bad(&e.to_string()))?;
        if example.real_len != real_len {
            return Err(bad("real_len disagrees with the context"));
        }
        out.push(example);
    }
    Ok(out)
}

pub fn write_gcn_metrics<W: Write>(mut w: W, history: &[GcnEpochMetrics]) -> Result<()> {
    writeln!(w, "epoch,loss,auc")?;
    for m in history {
        writeln!(w, "{},{},{}", m.epoch, m.loss, m.auc)?;
    }
    Ok(())
}

pub fn write_lstm_metrics<W: Write>(mut w: W, history: &[LstmEpochMetrics]) -> Result<()> {
    writeln!(w, "epoch,loss,train_acc")?;
    for m in history {
        writeln!(w, "{},{},{}", m.epoch, m.loss, m.train_acc)?;
    }
    Ok(())
}

/// Create `path` and hand a buffered writer to `f`, flushing on success.
pub fn write_file<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let file = File::create(path).map_err(Error::io(path))?;
    let mut w = BufWriter::new(file);
    f(&mut w)?;
    w.flush().map_err(Error::io(path))
}

pub fn open_file(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(Error::io(path))
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(Error::io(path))
}
