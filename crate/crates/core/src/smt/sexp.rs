//! Minimal S-expression reader for solver responses.

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

impl Sexp {
    pub fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(a) => Some(a),
            Sexp::List(_) => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(l) => Some(l),
            Sexp::Atom(_) => None,
        }
    }

    /// Integer literal, including the `(- n)` form.
    pub fn int(&self) -> Option<i64> {
        match self {
            Sexp::Atom(a) => a.parse().ok(),
            Sexp::List(l) => match l.as_slice() {
                [Sexp::Atom(minus), n] if minus == "-" => n.int()?.checked_neg(),
                _ => None,
            },
        }
    }
}

/// Net parenthesis depth change of `text`, ignoring quoted symbols and
/// strings. Used to know when a multi-line response is complete.
pub fn depth_delta(text: &str) -> i64 {
    let mut depth = 0;
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            '|' => {
                for c in chars.by_ref() {
                    if c == '|' {
                        break;
                    }
                }
            }
            '"' => {
                for c in chars.by_ref() {
                    if c == '"' {
                        break;
                    }
                }
            }
            ';' => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        break;
                    }
                }
            }
            _ => {}
        }
    }
    depth
}

/// Parse every top-level expression of `text`.
pub fn parse_all(text: &str) -> Result<Vec<Sexp>, String> {
    let chars: Vec<char> = text.chars().collect();
    let mut pos = 0;
    let mut out = Vec::new();
    loop {
        skip_ws(&chars, &mut pos);
        if pos >= chars.len() {
            return Ok(out);
        }
        out.push(parse_one(&chars, &mut pos)?);
    }
}

fn skip_ws(chars: &[char], pos: &mut usize) {
    while *pos < chars.len() {
        if chars[*pos].is_whitespace() {
            *pos += 1;
        } else if chars[*pos] == ';' {
            while *pos < chars.len() && chars[*pos] != '\n' {
                *pos += 1;
            }
        } else {
            break;
        }
    }
}

fn parse_one(chars: &[char], pos: &mut usize) -> Result<Sexp, String> {
    skip_ws(chars, pos);
    match chars.get(*pos) {
        None => Err("unexpected end of input".into()),
        Some('(') => {
            *pos += 1;
            let mut items = Vec::new();
            loop {
                skip_ws(chars, pos);
                match chars.get(*pos) {
                    None => return Err("unbalanced parentheses".into()),
                    Some(')') => {
                        *pos += 1;
                        return Ok(Sexp::List(items));
                    }
                    _ => items.push(parse_one(chars, pos)?),
                }
            }
        }
        Some(')') => Err(format!("unexpected ')' at offset {pos}")),
        Some(&q) if q == '|' || q == '"' => {
            let start = *pos + 1;
            *pos += 1;
            while *pos < chars.len() && chars[*pos] != q {
                *pos += 1;
            }
            if *pos >= chars.len() {
                return Err("unterminated quoted atom".into());
            }
            let s: String = chars[start..*pos].iter().collect();
            *pos += 1;
            Ok(Sexp::Atom(s))
        }
        Some(_) => {
            let start = *pos;
            while *pos < chars.len() && !chars[*pos].is_whitespace() && !"()".contains(chars[*pos]) {
                *pos += 1;
            }
            Ok(Sexp::Atom(chars[start..*pos].iter().collect()))
        }
    }
}
