use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{Span, SyntaxError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    // keywords
    Forall,
    Exists,
    In,
    Eps,
    First,
    Last,
    Rev,
    Len,
    AnyInt,
    True,
    False,
    Old,
    // punctuation
    PlusPlus,
    Plus,
    Minus,
    Assign,
    Eq,
    EqEq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Iff,
    Imp,
    Bar,
    Amp,
    Bang,
    Dot,
    Comma,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Colon,
    Semi,
    LBrace,
    RBrace,
    Star,
    Caret,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => alloc::format!("identifier `{s}`"),
            Tok::Int(k) => alloc::format!("integer `{k}`"),
            Tok::Eof => "end of input".to_string(),
            other => alloc::format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Forall => "forall",
            Tok::Exists => "exists",
            Tok::In => "in",
            Tok::Eps => "eps",
            Tok::First => "first",
            Tok::Last => "last",
            Tok::Rev => "rev",
            Tok::Len => "len",
            Tok::AnyInt => "INT",
            Tok::True => "true",
            Tok::False => "false",
            Tok::Old => "old",
            Tok::PlusPlus => "++",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Assign => ":=",
            Tok::Eq => "=",
            Tok::EqEq => "==",
            Tok::Ne => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Iff => "<=>",
            Tok::Imp => "=>",
            Tok::Bar => "|",
            Tok::Amp => "&",
            Tok::Bang => "!",
            Tok::Dot => ".",
            Tok::Comma => ",",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Colon => ":",
            Tok::Semi => ";",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Star => "*",
            Tok::Caret => "^",
            Tok::Ident(_) | Tok::Int(_) | Tok::Eof => "",
        }
    }
}

/// Identifiers reserved for the undecidable extensions (equal-length
/// predicate, sum, per-value counting).
const RESERVED: &[&str] = &["elg", "sum", "count", "sp"];

/// Source text with a precomputed line table, used to turn byte offsets
/// into line/column diagnostics.
pub struct Source<'a> {
    pub text: &'a str,
    line_starts: Vec<usize>,
}

impl<'a> Source<'a> {
    pub fn new(text: &'a str) -> Self {
        let mut line_starts = alloc::vec![0];
        for (i, b) in text.bytes().enumerate() {
            if b == b'\n' {
                line_starts.push(i + 1);
            }
        }
        Source { text, line_starts }
    }

    /// 1-based line and column of a byte offset.
    pub fn line_col(&self, offset: usize) -> (usize, usize) {
        let line = match self.line_starts.binary_search(&offset) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let col = self.text[self.line_starts[line]..offset.min(self.text.len())]
            .chars()
            .count();
        (line + 1, col + 1)
    }

    pub fn parse_error(&self, at: usize, message: impl Into<String>) -> SyntaxError {
        let (line, col) = self.line_col(at);
        SyntaxError::Parse {
            line,
            col,
            message: message.into(),
        }
    }

    pub fn fragment_error(&self, at: usize, message: impl Into<String>) -> SyntaxError {
        let (line, col) = self.line_col(at);
        SyntaxError::Fragment {
            line,
            col,
            message: message.into(),
        }
    }
}

/// Splits `src` into tokens. `allow_internal` admits `$`-prefixed names,
/// which are reserved for generated variables.
pub fn tokenize(src: &Source<'_>, allow_internal: bool) -> Result<Vec<(Tok, Span)>, SyntaxError> {
    let text = src.text;
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let k: i64 = text[start..i]
                .parse()
                .map_err(|_| src.parse_error(start, "integer literal out of range"))?;
            out.push((Tok::Int(k), Span::new(start, i)));
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' || c == b'$' {
            i += 1;
            while i < bytes.len()
                && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'')
            {
                i += 1;
            }
            let word = &text[start..i];
            if word.starts_with('$') {
                if !allow_internal {
                    return Err(src.parse_error(
                        start,
                        "names starting with `$` are reserved for generated variables",
                    ));
                }
                if word.len() == 1 {
                    return Err(src.parse_error(start, "empty generated name"));
                }
            }
            let lower = word.to_ascii_lowercase();
            if RESERVED.contains(&lower.as_str()) {
                return Err(src.fragment_error(
                    start,
                    alloc::format!(
                        "`{word}` belongs to an undecidable extension of the theory \
                         (equal length, sum and counting functions are not supported)"
                    ),
                ));
            }
            let tok = match word {
                "forall" => Tok::Forall,
                "exists" => Tok::Exists,
                "in" => Tok::In,
                "eps" => Tok::Eps,
                "first" => Tok::First,
                "last" => Tok::Last,
                "rev" => Tok::Rev,
                "len" => Tok::Len,
                "INT" => Tok::AnyInt,
                "true" => Tok::True,
                "false" => Tok::False,
                "old" => Tok::Old,
                _ => Tok::Ident(word.to_string()),
            };
            out.push((tok, Span::new(start, i)));
            continue;
        }
        let next = bytes.get(i + 1).copied();
        let next2 = bytes.get(i + 2).copied();
        let (tok, len) = match (c, next, next2) {
            (b'<', Some(b'='), Some(b'>')) => (Tok::Iff, 3),
            (b'<', Some(b'='), _) => (Tok::Le, 2),
            (b'<', _, _) => (Tok::Lt, 1),
            (b'>', Some(b'='), _) => (Tok::Ge, 2),
            (b'>', _, _) => (Tok::Gt, 1),
            (b'=', Some(b'='), _) => (Tok::EqEq, 2),
            (b'=', Some(b'>'), _) => (Tok::Imp, 2),
            (b'=', _, _) => (Tok::Eq, 1),
            (b'!', Some(b'='), _) => (Tok::Ne, 2),
            (b'!', _, _) => (Tok::Bang, 1),
            (b'+', Some(b'+'), _) => (Tok::PlusPlus, 2),
            (b'+', _, _) => (Tok::Plus, 1),
            (b'-', _, _) => (Tok::Minus, 1),
            (b':', Some(b'='), _) => (Tok::Assign, 2),
            (b':', _, _) => (Tok::Colon, 1),
            (b'|', _, _) => (Tok::Bar, 1),
            (b'&', _, _) => (Tok::Amp, 1),
            (b'.', _, _) => (Tok::Dot, 1),
            (b',', _, _) => (Tok::Comma, 1),
            (b';', _, _) => (Tok::Semi, 1),
            (b'(', _, _) => (Tok::LParen, 1),
            (b')', _, _) => (Tok::RParen, 1),
            (b'[', _, _) => (Tok::LBracket, 1),
            (b']', _, _) => (Tok::RBracket, 1),
            (b'{', _, _) => (Tok::LBrace, 1),
            (b'}', _, _) => (Tok::RBrace, 1),
            (b'*', _, _) => (Tok::Star, 1),
            (b'^', _, _) => (Tok::Caret, 1),
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                if matches!(ch, 'σ' | 'Σ' | 'π' | '⊕') {
                    return Err(src.fragment_error(
                        start,
                        alloc::format!(
                            "`{ch}` denotes a function of an undecidable extension of the theory"
                        ),
                    ));
                }
                return Err(src.parse_error(start, alloc::format!("unexpected character `{ch}`")));
            }
        };
        i += len;
        out.push((tok, Span::new(start, i)));
    }
    out.push((Tok::Eof, Span::new(bytes.len(), bytes.len())));
    Ok(out)
}
