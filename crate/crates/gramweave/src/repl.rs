//! Line-oriented suggestion loop.

use std::io::{BufRead, Write};

use crate::model::SuggestModel;

/// Read contexts line by line and answer each with one line of `k`
/// suggestions, until a blank line or end of input. Unusable contexts are
/// reported on the same line and the loop continues.
pub fn suggest_repl<R: BufRead, W: Write>(model: &SuggestModel, k: usize, input: R, mut output: W) -> std::io::Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            break;
        }
        match model.suggest(&line, k) {
            Ok(suggestions) => {
                let parts: Vec<String> = suggestions.iter().map(|s| format!("{} ({:.4})", s.token, s.probability)).collect();
                writeln!(output, "{}", parts.join("  "))?;
            }
            Err(e) => writeln!(output, "error: {e}")?,
        }
        output.flush()?;
    }
    Ok(())
}
