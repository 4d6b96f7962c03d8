use std::fmt;

use super::SpecError;

#[derive(Clone, Debug, PartialEq)]
pub enum TokenKind {
    Ident(String),
    /// Decimal literal, imaginary when written with an `i` suffix.
    Number { value: f64, imaginary: bool },
    /// Standalone `i`.
    ImagUnit,
    Dag,
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    /// 1-based column of the first character.
    pub col: usize,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Ident(s) => write!(f, "identifier '{s}'"),
            TokenKind::Number { value, imaginary } => {
                write!(f, "number '{value}{}'", if *imaginary { "i" } else { "" })
            }
            TokenKind::ImagUnit => f.write_str("'i'"),
            TokenKind::Dag => f.write_str("'dag'"),
            TokenKind::Plus => f.write_str("'+'"),
            TokenKind::Minus => f.write_str("'-'"),
            TokenKind::Star => f.write_str("'*'"),
            TokenKind::Caret => f.write_str("'^'"),
            TokenKind::LParen => f.write_str("'('"),
            TokenKind::RParen => f.write_str("')'"),
        }
    }
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, SpecError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let ch = chars[k];
        let col = k + 1;
        if ch.is_whitespace() {
            k += 1;
            continue;
        }
        let single = match ch {
            '+' => Some(TokenKind::Plus),
            '-' => Some(TokenKind::Minus),
            '*' => Some(TokenKind::Star),
            '^' => Some(TokenKind::Caret),
            '(' => Some(TokenKind::LParen),
            ')' => Some(TokenKind::RParen),
            _ => None,
        };
        if let Some(kind) = single {
            out.push(Token { kind, col });
            k += 1;
            continue;
        }
        if ch.is_ascii_alphabetic() {
            let start = k;
            while k < chars.len() && chars[k].is_ascii_alphanumeric() {
                k += 1;
            }
            let word: String = chars[start..k].iter().collect();
            let kind = match word.as_str() {
                "dag" => TokenKind::Dag,
                "i" => TokenKind::ImagUnit,
                _ => TokenKind::Ident(word),
            };
            out.push(Token { kind, col });
            continue;
        }
        if ch.is_ascii_digit() || (ch == '.' && chars.get(k + 1).is_some_and(|c| c.is_ascii_digit())) {
            let start = k;
            while k < chars.len() && (chars[k].is_ascii_digit() || chars[k] == '.') {
                k += 1;
            }
            // exponent, only when digits follow
            if k < chars.len() && (chars[k] == 'e' || chars[k] == 'E') {
                let mut j = k + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    k = j;
                }
            }
            let text: String = chars[start..k].iter().collect();
            let value: f64 = text
                .parse()
                .map_err(|_| SpecError::BadNumber { text: text.clone(), col })?;
            let imaginary = chars.get(k) == Some(&'i')
                && !chars.get(k + 1).is_some_and(|c| c.is_ascii_alphanumeric());
            if imaginary {
                k += 1;
            }
            out.push(Token {
                kind: TokenKind::Number { value, imaginary },
                col,
            });
            continue;
        }
        return Err(SpecError::IllegalCharacter { ch, col });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_tokens() {
        assert_eq!(tokenize("0.5*(I - Z1*Z2)*X2").unwrap().len(), 11);
    }

    #[test]
    fn imaginary_literal() {
        let t = tokenize("2i*a1^2").unwrap();
        let kinds: Vec<TokenKind> = t.into_iter().map(|t| t.kind).collect();
        assert_eq!(
            kinds,
            vec![
                TokenKind::Number { value: 2.0, imaginary: true },
                TokenKind::Star,
                TokenKind::Ident("a1".into()),
                TokenKind::Caret,
                TokenKind::Number { value: 2.0, imaginary: false },
            ]
        );
    }

    #[test]
    fn illegal_character_column() {
        assert_eq!(
            tokenize("Z1 $ X2"),
            Err(SpecError::IllegalCharacter { ch: '$', col: 4 })
        );
    }

    #[test]
    fn exponents_and_units() {
        let t = tokenize("1e-3 i dag .5").unwrap();
        assert_eq!(t[0].kind, TokenKind::Number { value: 1e-3, imaginary: false });
        assert_eq!(t[1].kind, TokenKind::ImagUnit);
        assert_eq!(t[2].kind, TokenKind::Dag);
        assert_eq!(t[3].kind, TokenKind::Number { value: 0.5, imaginary: false });
        assert!(matches!(tokenize("1.2.3"), Err(SpecError::BadNumber { col: 1, .. })));
    }
}
