use super::Diagnostic;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Number { value: f64, unit: Option<String> },
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Eq,
    Comma,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Number { value, unit } => format!("number `{value}{}`", unit.as_deref().unwrap_or("")),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

fn is_unit_char(c: char) -> bool {
    c.is_ascii_alphabetic() || c == 'µ' || c == 'μ' || c == '%'
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => advance(1, &mut i, &mut col),
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '{' | '}' | '(' | ')' | ';' | '=' | ',' => {
                let tok = match c {
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ';' => Tok::Semi,
                    '=' => Tok::Eq,
                    _ => Tok::Comma,
                };
                out.push(Token { tok, line: tl, col: tc });
                advance(1, &mut i, &mut col);
            }
            c if c.is_ascii_digit() || c == '.' || c == '-' || c == '+' => {
                let start = i;
                let mut j = i;
                if chars[j] == '-' || chars[j] == '+' {
                    j += 1;
                }
                while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                    j += 1;
                }
                // exponent only when followed by a digit, so `1e3` is a number and `1eV` is not
                if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                    let mut k = j + 1;
                    if k < chars.len() && (chars[k] == '-' || chars[k] == '+') {
                        k += 1;
                    }
                    if k < chars.len() && chars[k].is_ascii_digit() {
                        while k < chars.len() && chars[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let text: String = chars[start..j].iter().collect();
                let value: f64 = text.parse().map_err(|_| Diagnostic {
                    line: tl,
                    col: tc,
                    message: format!("malformed number `{text}`"),
                    expected: vec!["number".into()],
                })?;
                let ustart = j;
                while j < chars.len() && is_unit_char(chars[j]) {
                    j += 1;
                }
                let unit = (j > ustart).then(|| chars[ustart..j].iter().collect());
                out.push(Token { tok: Tok::Number { value, unit }, line: tl, col: tc });
                advance(j - i, &mut i, &mut col);
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                out.push(Token { tok: Tok::Ident(chars[start..j].iter().collect()), line: tl, col: tc });
                advance(j - i, &mut i, &mut col);
            }
            other => {
                return Err(Diagnostic {
                    line: tl,
                    col: tc,
                    message: format!("unexpected character `{other}`"),
                    expected: vec![],
                })
            }
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}
