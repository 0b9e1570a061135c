use super::error::{ParseError, Pos};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Number(String),
    Sym(&'static str),
    Doc(String),
    Newline,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

/// Multi-character and Unicode symbols, longest first, with their canonical form.
const SYMBOLS: &[(&str, &str)] = &[
    ("<->", "↔"),
    ("<-", "←"),
    ("<=", "≤"),
    (">=", "≥"),
    (">>", "≫"),
    ("!=", "≠"),
    ("->", "→"),
    ("^^", "↑"),
    ("/\\", "∧"),
    ("\\/", "∨"),
    ("||", "∥"),
    ("|", "∣"),
    ("↔", "↔"),
    ("←", "←"),
    ("≤", "≤"),
    ("≥", "≥"),
    ("≫", "≫"),
    ("≠", "≠"),
    ("→", "→"),
    ("↑", "↑"),
    ("∧", "∧"),
    ("∨", "∨"),
    ("¬", "¬"),
    ("∣", "∣"),
    ("∥", "∥"),
    ("•", "•"),
    ("∀", "∀"),
    ("(", "("),
    (")", ")"),
    ("[", "["),
    ("]", "]"),
    ("{", "{"),
    ("}", "}"),
    (",", ","),
    (":", ":"),
    ("+", "+"),
    ("-", "-"),
    ("*", "*"),
    ("/", "/"),
    ("^", "^"),
    ("=", "="),
    ("<", "<"),
    (">", ">"),
];

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_' || (c.is_alphabetic() && !"λΠΣ".contains(c))
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\'' || c == '.' || (c.is_alphanumeric() && !c.is_ascii())
}

pub fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    macro_rules! advance {
        ($n:expr) => {{
            for _ in 0..$n {
                if chars[i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                i += 1;
            }
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c == '\n' {
            out.push(Token { tok: Tok::Newline, pos });
            advance!(1);
            continue;
        }
        if c.is_whitespace() {
            advance!(1);
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                advance!(1);
            }
            continue;
        }
        if starts_with(&chars, i, "/--") {
            let start = i + 3;
            let mut j = start;
            while j < chars.len() && !starts_with(&chars, j, "-/") {
                j += 1;
            }
            if j >= chars.len() {
                return Err(ParseError::syntax(pos, "unterminated doc comment"));
            }
            let text: String = chars[start..j].iter().collect();
            out.push(Token {
                tok: Tok::Doc(text.trim().to_string()),
                pos,
            });
            advance!(j + 2 - i);
            continue;
        }
        if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            out.push(Token {
                tok: Tok::Number(chars[i..j].iter().collect()),
                pos,
            });
            advance!(j - i);
            continue;
        }
        if is_ident_start(c) {
            let mut j = i;
            while j < chars.len() && is_ident_continue(chars[j]) {
                j += 1;
            }
            let word: String = chars[i..j].iter().collect();
            out.push(Token {
                tok: Tok::Ident(word),
                pos,
            });
            advance!(j - i);
            continue;
        }
        match SYMBOLS.iter().find(|(s, _)| starts_with(&chars, i, s)) {
            Some((s, canon)) => {
                out.push(Token {
                    tok: Tok::Sym(canon),
                    pos,
                });
                advance!(s.chars().count());
            }
            None => {
                return Err(ParseError::syntax(pos, format!("unexpected character `{c}`")));
            }
        }
    }
    Ok(out)
}

fn starts_with(chars: &[char], i: usize, s: &str) -> bool {
    let mut k = i;
    for c in s.chars() {
        if chars.get(k) != Some(&c) {
            return false;
        }
        k += 1;
    }
    true
}
