use std::fmt;
use std::sync::Arc;

use super::ast::SourceLoc;
use super::FrontendError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Func,
    Let,
    Var,
    If,
    Else,
    For,
    In,
    Return,
    Assert,
    True,
    False,
    /// The `shape` keyword, as in `x.shape[1]`.
    Shape,
    Ident(String),
    Int(i64),
    /// `____`
    Hole,
    LParen,
    RParen,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Semi,
    Dot,
    Arrow,
    /// `|->`
    ShapeAssert,
    /// `..<`
    RangeExcl,
    Assign,
    EqEq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Slash,
    AndAnd,
    OrOr,
    Bang,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Func => "`func`",
            Tok::Let => "`let`",
            Tok::Var => "`var`",
            Tok::If => "`if`",
            Tok::Else => "`else`",
            Tok::For => "`for`",
            Tok::In => "`in`",
            Tok::Return => "`return`",
            Tok::Assert => "`assert`",
            Tok::True => "`true`",
            Tok::False => "`false`",
            Tok::Shape => "`shape`",
            Tok::Ident(_) => "identifier",
            Tok::Int(_) => "integer",
            Tok::Hole => "`____`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBrack => "`[`",
            Tok::RBrack => "`]`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::Comma => "`,`",
            Tok::Colon => "`:`",
            Tok::Semi => "`;`",
            Tok::Dot => "`.`",
            Tok::Arrow => "`->`",
            Tok::ShapeAssert => "`|->`",
            Tok::RangeExcl => "`..<`",
            Tok::Assign => "`=`",
            Tok::EqEq => "`==`",
            Tok::Ne => "`!=`",
            Tok::Lt => "`<`",
            Tok::Le => "`<=`",
            Tok::Gt => "`>`",
            Tok::Ge => "`>=`",
            Tok::Plus => "`+`",
            Tok::Minus => "`-`",
            Tok::Star => "`*`",
            Tok::Slash => "`/`",
            Tok::AndAnd => "`&&`",
            Tok::OrOr => "`||`",
            Tok::Bang => "`!`",
            Tok::Eof => "end of file",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub loc: SourceLoc,
}

fn keyword(word: &str) -> Option<Tok> {
    Some(match word {
        "func" => Tok::Func,
        "let" => Tok::Let,
        "var" => Tok::Var,
        "if" => Tok::If,
        "else" => Tok::Else,
        "for" => Tok::For,
        "in" => Tok::In,
        "return" => Tok::Return,
        "assert" => Tok::Assert,
        "true" => Tok::True,
        "false" => Tok::False,
        "shape" => Tok::Shape,
        "____" => Tok::Hole,
        _ => return None,
    })
}

/// Split `source` into tokens. The stream always ends with `Tok::Eof`.
pub fn tokenize(source: &str, file: &str) -> Result<Vec<Token>, FrontendError> {
    let file: Arc<str> = Arc::from(file);
    let chars: Vec<char> = source.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);

    while i < chars.len() {
        let c = chars[i];
        let loc = SourceLoc::new(file.clone(), line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let value = text.parse::<i64>().map_err(|_| FrontendError::Lex {
                loc: loc.clone(),
                msg: format!("integer literal `{text}` out of range"),
            })?;
            col += (i - start) as u32;
            out.push(Token { tok: Tok::Int(value), loc });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += (i - start) as u32;
            let tok = keyword(&word).unwrap_or(Tok::Ident(word));
            out.push(Token { tok, loc });
            continue;
        }

        let rest = &chars[i..];
        let starts = |s: &str| s.chars().zip(rest.iter()).filter(|(a, b)| a == *b).count() == s.len();
        let (tok, len) = if starts("|->") {
            (Tok::ShapeAssert, 3)
        } else if starts("..<") {
            (Tok::RangeExcl, 3)
        } else if starts("->") {
            (Tok::Arrow, 2)
        } else if starts("==") {
            (Tok::EqEq, 2)
        } else if starts("!=") {
            (Tok::Ne, 2)
        } else if starts("<=") {
            (Tok::Le, 2)
        } else if starts(">=") {
            (Tok::Ge, 2)
        } else if starts("&&") {
            (Tok::AndAnd, 2)
        } else if starts("||") {
            (Tok::OrOr, 2)
        } else {
            let t = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBrack,
                ']' => Tok::RBrack,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                ',' => Tok::Comma,
                ':' => Tok::Colon,
                ';' => Tok::Semi,
                '.' => Tok::Dot,
                '=' => Tok::Assign,
                '<' => Tok::Lt,
                '>' => Tok::Gt,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '!' => Tok::Bang,
                other => {
                    return Err(FrontendError::Lex {
                        loc,
                        msg: format!("unrecognized character `{other}`"),
                    })
                }
            };
            (t, 1)
        };
        i += len;
        col += len as u32;
        out.push(Token { tok, loc });
    }
    out.push(Token { tok: Tok::Eof, loc: SourceLoc::new(file, line, col) });
    Ok(out)
}
