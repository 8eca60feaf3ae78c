use super::{ParseError, Pos};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// `'a`: a type variable even when no binder is in sight.
    Tick(String),
    Int(i64),
    Str(String),
    Backslash,
    LocLambda,
    TyLambda,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Dot,
    Colon,
    Semi,
    At,
    Minus,
    Arrow,
    Star,
    Eq,
    Hash,
    Amp,
    Bang,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Tick(s) => format!("`'{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Str(_) => "string literal".into(),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::Backslash => "\\",
            Tok::LocLambda => "/\\",
            Tok::TyLambda => "/!\\",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::Colon => ":",
            Tok::Semi => ";",
            Tok::At => "@",
            Tok::Minus => "-",
            Tok::Arrow => "->",
            Tok::Star => "*",
            Tok::Eq => "=",
            Tok::Hash => "#",
            Tok::Amp => "&",
            Tok::Bang => "!",
            _ => "",
        }
    }
}

pub fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    let (mut line, mut col) = (1usize, 1usize);

    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, n: usize| {
        for _ in 0..n {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        }
    };

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let next = chars.get(i + 1).copied();
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1);
            continue;
        }
        if c == '-' && next == Some('-') {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col, 1);
            }
            continue;
        }
        if c.is_ascii_digit() || (c == '-' && next.is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            let mut j = i + 1;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let s: String = chars[start..j].iter().collect();
            let n = s
                .parse::<i64>()
                .map_err(|_| ParseError::new(pos, format!("integer literal `{s}` out of range")))?;
            toks.push((Tok::Int(n), pos));
            let n = j - start;
            advance(&mut i, &mut line, &mut col, n);
            continue;
        }
        if c.is_alphabetic() || c == '_' || (c == '\'' && next.is_some_and(is_ident_start)) {
            let tick = c == '\'';
            let start = if tick { i + 1 } else { i };
            let mut j = start + 1;
            while j < chars.len() && is_ident_char(chars[j]) {
                j += 1;
            }
            let s: String = chars[start..j].iter().collect();
            toks.push((if tick { Tok::Tick(s) } else { Tok::Ident(s) }, pos));
            let n = j - i;
            advance(&mut i, &mut line, &mut col, n);
            continue;
        }
        if c == '"' {
            let mut j = i + 1;
            loop {
                match chars.get(j) {
                    None | Some('\n') => {
                        return Err(ParseError::new(pos, "unterminated string literal"));
                    }
                    Some('\\') => j += 2,
                    Some('"') => break,
                    Some(_) => j += 1,
                }
            }
            let raw: String = chars[i..=j].iter().collect();
            let s: String = serde_json::from_str(&raw)
                .map_err(|e| ParseError::new(pos, format!("bad string literal: {e}")))?;
            toks.push((Tok::Str(s), pos));
            let n = j + 1 - i;
            advance(&mut i, &mut line, &mut col, n);
            continue;
        }
        let (tok, len) = match (c, next, chars.get(i + 2).copied()) {
            ('/', Some('!'), Some('\\')) => (Tok::TyLambda, 3),
            ('/', Some('\\'), _) => (Tok::LocLambda, 2),
            ('-', Some('>'), _) => (Tok::Arrow, 2),
            ('\\', _, _) => (Tok::Backslash, 1),
            ('(', _, _) => (Tok::LParen, 1),
            (')', _, _) => (Tok::RParen, 1),
            ('[', _, _) => (Tok::LBracket, 1),
            (']', _, _) => (Tok::RBracket, 1),
            ('{', _, _) => (Tok::LBrace, 1),
            ('}', _, _) => (Tok::RBrace, 1),
            (',', _, _) => (Tok::Comma, 1),
            ('.', _, _) => (Tok::Dot, 1),
            (':', _, _) => (Tok::Colon, 1),
            (';', _, _) => (Tok::Semi, 1),
            ('@', _, _) => (Tok::At, 1),
            ('-', _, _) => (Tok::Minus, 1),
            ('*', _, _) => (Tok::Star, 1),
            ('=', _, _) => (Tok::Eq, 1),
            ('#', _, _) => (Tok::Hash, 1),
            ('&', _, _) => (Tok::Amp, 1),
            ('!', _, _) => (Tok::Bang, 1),
            _ => return Err(ParseError::new(pos, format!("unexpected character `{c}`"))),
        };
        toks.push((tok, pos));
        advance(&mut i, &mut line, &mut col, len);
    }
    toks.push((Tok::Eof, Pos { line, col }));
    Ok(toks)
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|(t, _)| t).collect()
    }

    #[test]
    fn arrows_and_negatives() {
        assert_eq!(
            toks("a -l-> b -1"),
            vec![
                Tok::Ident("a".into()),
                Tok::Minus,
                Tok::Ident("l".into()),
                Tok::Arrow,
                Tok::Ident("b".into()),
                Tok::Int(-1),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn binders_and_comments() {
        assert_eq!(
            toks("/\\ /!\\ \\ -- note\n'a"),
            vec![
                Tok::LocLambda,
                Tok::TyLambda,
                Tok::Backslash,
                Tok::Tick("a".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn positions_track_lines() {
        let t = lex("x\n  y").unwrap();
        assert_eq!(t[1].1, Pos { line: 2, col: 3 });
    }

    #[test]
    fn string_escapes() {
        assert_eq!(toks(r#""a\"b\n""#)[0], Tok::Str("a\"b\n".into()));
        assert!(lex("\"open").is_err());
    }
}
