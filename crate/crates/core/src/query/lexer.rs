use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Number,
    String,
    CmpOp,
    And,
    Or,
    Not,
    Between,
    LParen,
    RParen,
}

/// A lexeme with its byte offset into the source text. For strings, `text`
/// holds the unescaped contents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub offset: usize,
    /// Byte length of the lexeme in the source.
    pub len: usize,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} {:?}", self.kind, self.text)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("lex error at offset {offset}: {message}")]
pub struct LexError {
    pub offset: usize,
    pub message: String,
}

fn lex_error(offset: usize, message: impl Into<String>) -> LexError {
    LexError {
        offset,
        message: message.into(),
    }
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, LexError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let start = i;
        let b = bytes[i];
        let kind = match b {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => {
                i += 1;
                TokenKind::LParen
            }
            b')' => {
                i += 1;
                TokenKind::RParen
            }
            b'=' => {
                i += 1;
                TokenKind::CmpOp
            }
            b'!' => {
                if bytes.get(i + 1) != Some(&b'=') {
                    return Err(lex_error(i, "expected '=' after '!'"));
                }
                i += 2;
                TokenKind::CmpOp
            }
            b'<' => {
                i += if matches!(bytes.get(i + 1), Some(b'=') | Some(b'>')) { 2 } else { 1 };
                TokenKind::CmpOp
            }
            b'>' => {
                i += if bytes.get(i + 1) == Some(&b'=') { 2 } else { 1 };
                TokenKind::CmpOp
            }
            b'\'' => {
                let (contents, end) = lex_string(text, i)?;
                tokens.push(Token {
                    kind: TokenKind::String,
                    text: contents,
                    offset: start,
                    len: end - start,
                });
                i = end;
                continue;
            }
            b'-' | b'0'..=b'9' => {
                i = lex_number(bytes, i)?;
                TokenKind::Number
            }
            b if b.is_ascii_alphabetic() => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                keyword(&text[start..i]).unwrap_or(TokenKind::Ident)
            }
            _ => {
                let c = text[i..].chars().next().unwrap_or('?');
                return Err(lex_error(i, format!("unexpected character {c:?}")));
            }
        };
        tokens.push(Token {
            kind,
            text: text[start..i].to_owned(),
            offset: start,
            len: i - start,
        });
    }
    Ok(tokens)
}

fn keyword(word: &str) -> Option<TokenKind> {
    [
        ("and", TokenKind::And),
        ("or", TokenKind::Or),
        ("not", TokenKind::Not),
        ("between", TokenKind::Between),
    ]
    .into_iter()
    .find(|(k, _)| k.eq_ignore_ascii_case(word))
    .map(|(_, kind)| kind)
}

fn digits(bytes: &[u8], mut i: usize) -> usize {
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    i
}

/// `-?d+(.d+)?([eE][+-]?d+)?`; returns the end offset.
fn lex_number(bytes: &[u8], start: usize) -> Result<usize, LexError> {
    let mut i = start;
    if bytes[i] == b'-' {
        i += 1;
    }
    let int_end = digits(bytes, i);
    if int_end == i {
        return Err(lex_error(i, "expected digit"));
    }
    i = int_end;
    if bytes.get(i) == Some(&b'.') {
        let frac_end = digits(bytes, i + 1);
        if frac_end == i + 1 {
            return Err(lex_error(i + 1, "expected digit after '.'"));
        }
        i = frac_end;
    }
    if matches!(bytes.get(i), Some(b'e') | Some(b'E')) {
        let mut j = i + 1;
        if matches!(bytes.get(j), Some(b'+') | Some(b'-')) {
            j += 1;
        }
        let exp_end = digits(bytes, j);
        if exp_end == j {
            return Err(lex_error(j, "expected exponent digits"));
        }
        i = exp_end;
    }
    if i < bytes.len() && (bytes[i].is_ascii_alphabetic() || bytes[i] == b'_' || bytes[i] == b'.') {
        return Err(lex_error(i, "malformed number"));
    }
    Ok(i)
}

/// Single-quoted, `''` escapes a quote. Returns contents and end offset.
fn lex_string(text: &str, start: usize) -> Result<(String, usize), LexError> {
    let bytes = text.as_bytes();
    let mut out = String::new();
    let mut i = start + 1;
    let mut run = i;
    loop {
        match bytes.get(i) {
            None => return Err(lex_error(start, "unterminated string")),
            Some(b'\'') if bytes.get(i + 1) == Some(&b'\'') => {
                out.push_str(&text[run..=i]);
                i += 2;
                run = i;
            }
            Some(b'\'') => {
                out.push_str(&text[run..i]);
                return Ok((out, i + 1));
            }
            Some(_) => i += 1,
        }
    }
}
