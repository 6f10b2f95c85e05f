//! Fallback tokenizer for raw-text input.
//!
//! The pipeline normally consumes pre-lemmatized token lists; this tokenizer
//! is the documented approximation used when no token column is mapped.
//! Rules: lowercase, split on whitespace and punctuation, drop punctuation
//! except `%`, which is emitted as a standalone token (it is a filter
//! keyword).

/// Tokenize raw text with the default rules.
pub fn default_tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        if ch == '%' {
            flush(&mut cur, &mut tokens);
            tokens.push("%".to_string());
        } else if ch.is_alphanumeric() {
            for lower in ch.to_lowercase() {
                cur.push(lower);
            }
        } else {
            flush(&mut cur, &mut tokens);
        }
    }
    flush(&mut cur, &mut tokens);
    tokens
}

fn flush(cur: &mut String, tokens: &mut Vec<String>) {
    if !cur.is_empty() {
        tokens.push(std::mem::take(cur));
    }
}
