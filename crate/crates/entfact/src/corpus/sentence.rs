//! Rule-based sentence segmentation.

use super::SentenceSpan;

/// Splits on `.`, `!` or `?` followed by whitespace or end of text.
///
/// No abbreviation or quote handling is attempted. The returned spans are
/// ordered, non-overlapping, and jointly cover every non-whitespace byte.
pub fn split_sentences(text: &str) -> Vec<SentenceSpan> {
    let bytes = text.as_bytes();
    let mut spans = Vec::new();
    let mut start: Option<usize> = None;

    for (i, ch) in text.char_indices() {
        if start.is_none() {
            if ch.is_whitespace() {
                continue;
            }
            start = Some(i);
        }
        if matches!(ch, '.' | '!' | '?') {
            let next = i + 1;
            let at_end = next >= bytes.len();
            let followed_by_ws = !at_end
                && text[next..]
                    .chars()
                    .next()
                    .map(|c| c.is_whitespace())
                    .unwrap_or(false);
            if at_end || followed_by_ws {
                spans.push(SentenceSpan {
                    index: spans.len(),
                    start: start.take().unwrap(),
                    end: next,
                });
            }
        }
    }
    if let Some(s) = start {
        // Trailing sentence without a terminator runs to the last
        // non-whitespace byte.
        let end = text.trim_end().len();
        if end > s {
            spans.push(SentenceSpan {
                index: spans.len(),
                start: s,
                end,
            });
        }
    }
    spans
}
