use crate::dsl::ParseError;
use crate::net::Cmp;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    /// `#name`, a counter reference.
    Counter(String),
    Int(i64),
    Str(String),
    Cmp(Cmp),
    Colon,
    Assign,
    LParen,
    RParen,
    Newline,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Counter(s) => format!("`#{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Str(_) => "string".into(),
            Tok::Cmp(c) => format!("`{c}`"),
            Tok::Colon => "`:`".into(),
            Tok::Assign => "`:=`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Newline => "end of line".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

/// Splits source text into tokens with 1-based positions.
///
/// `#` followed directly by an identifier character is a counter reference;
/// any other `#` starts a comment running to end of line.
pub(crate) fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;

    macro_rules! push {
        ($tok:expr, $l:expr, $c:expr) => {
            out.push(Spanned {
                tok: $tok,
                line: $l,
                col: $c,
            })
        };
    }

    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        match c {
            '\n' => {
                push!(Tok::Newline, l0, c0);
                i += 1;
                line += 1;
                col = 1;
            }
            ' ' | '\t' | '\r' => {
                i += 1;
                col += 1;
            }
            '#' => {
                if chars.get(i + 1).is_some_and(|n| n.is_ascii_alphanumeric() || *n == '_') {
                    let start = i + 1;
                    i += 1;
                    while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                        i += 1;
                    }
                    let name: String = chars[start..i].iter().collect();
                    col += i - start + 1;
                    push!(Tok::Counter(name), l0, c0);
                } else {
                    while i < chars.len() && chars[i] != '\n' {
                        i += 1;
                        col += 1;
                    }
                }
            }
            '"' => {
                let mut s = String::new();
                i += 1;
                col += 1;
                loop {
                    match chars.get(i) {
                        None | Some('\n') => {
                            return Err(ParseError::new(l0, c0, "unterminated string literal", vec![]));
                        }
                        Some('"') => {
                            i += 1;
                            col += 1;
                            break;
                        }
                        Some('\\') => {
                            let esc = match chars.get(i + 1) {
                                Some('"') => '"',
                                Some('\\') => '\\',
                                Some('n') => '\n',
                                _ => {
                                    return Err(ParseError::new(line, col, "invalid escape sequence", vec![]));
                                }
                            };
                            s.push(esc);
                            i += 2;
                            col += 2;
                        }
                        Some(&ch) => {
                            s.push(ch);
                            i += 1;
                            col += 1;
                        }
                    }
                }
                push!(Tok::Str(s), l0, c0);
            }
            '(' => {
                push!(Tok::LParen, l0, c0);
                i += 1;
                col += 1;
            }
            ')' => {
                push!(Tok::RParen, l0, c0);
                i += 1;
                col += 1;
            }
            ':' => {
                if chars.get(i + 1) == Some(&'=') {
                    push!(Tok::Assign, l0, c0);
                    i += 2;
                    col += 2;
                } else {
                    push!(Tok::Colon, l0, c0);
                    i += 1;
                    col += 1;
                }
            }
            '<' | '>' | '=' => {
                let two = chars.get(i + 1) == Some(&'=');
                let cmp = match (c, two) {
                    ('<', true) => Cmp::Le,
                    ('<', false) => Cmp::Lt,
                    ('>', true) => Cmp::Ge,
                    ('>', false) => Cmp::Gt,
                    ('=', true) => Cmp::Eq,
                    _ => Cmp::Eq,
                };
                push!(Tok::Cmp(cmp), l0, c0);
                let n = if two { 2 } else { 1 };
                i += n;
                col += n;
            }
            '-' if chars.get(i + 1).is_some_and(char::is_ascii_digit) => {
                let start = i;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                col += i - start;
                let n = s
                    .parse::<i64>()
                    .map_err(|_| ParseError::new(l0, c0, "integer out of range", vec![]))?;
                push!(Tok::Int(n), l0, c0);
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i < chars.len() && (chars[i].is_ascii_alphabetic() || chars[i] == '_') {
                    return Err(ParseError::new(l0, c0, "identifiers must not start with a digit", vec![]));
                }
                let s: String = chars[start..i].iter().collect();
                col += i - start;
                let n = s
                    .parse::<i64>()
                    .map_err(|_| ParseError::new(l0, c0, "integer out of range", vec![]))?;
                push!(Tok::Int(n), l0, c0);
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                col += i - start;
                push!(Tok::Ident(s), l0, c0);
            }
            other => {
                return Err(ParseError::new(
                    l0,
                    c0,
                    format!("unexpected character `{other}`"),
                    vec![],
                ));
            }
        }
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn hash_is_comment_or_counter() {
        assert_eq!(
            toks("#t2 > 3 # trailing"),
            vec![Tok::Counter("t2".into()), Tok::Cmp(Cmp::Gt), Tok::Int(3), Tok::Eof]
        );
    }

    #[test]
    fn negative_number_is_one_token() {
        let spanned = lex("place p init -1").unwrap();
        assert_eq!(spanned[3].tok, Tok::Int(-1));
        assert_eq!((spanned[3].line, spanned[3].col), (1, 14));
    }

    #[test]
    fn string_escapes() {
        assert_eq!(toks(r#""a\"b""#), vec![Tok::Str("a\"b".into()), Tok::Eof]);
    }
}
