//! Error-tolerant Java lexer.
//!
//! Comments are dropped, literals collapse to a single token, and anything the
//! lexer does not recognise becomes a one-character punctuation token. It never
//! fails; truncated comments or literals simply run to end of input.

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Token {
    Ident(String),
    Punct(char),
    Literal,
}

impl Token {
    pub fn ident(&self) -> Option<&str> {
        match self {
            Token::Ident(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_punct(&self, c: char) -> bool {
        matches!(self, Token::Punct(p) if *p == c)
    }

    pub fn is_ident(&self, word: &str) -> bool {
        matches!(self, Token::Ident(s) if s == word)
    }
}

pub const KEYWORDS: &[&str] = &[
    "abstract",
    "assert",
    "boolean",
    "break",
    "byte",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extends",
    "final",
    "finally",
    "float",
    "for",
    "goto",
    "if",
    "implements",
    "import",
    "instanceof",
    "int",
    "interface",
    "long",
    "native",
    "new",
    "package",
    "private",
    "protected",
    "public",
    "return",
    "short",
    "static",
    "strictfp",
    "super",
    "switch",
    "synchronized",
    "this",
    "throw",
    "throws",
    "transient",
    "try",
    "void",
    "volatile",
    "while",
    "true",
    "false",
    "null",
    "var",
];

pub const PRIMITIVES: &[&str] = &[
    "boolean", "byte", "char", "short", "int", "long", "float", "double", "void",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

pub fn is_primitive(word: &str) -> bool {
    PRIMITIVES.contains(&word)
}

pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let n = chars.len();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < n {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '/' && i + 1 < n && chars[i + 1] == '/' {
            while i < n && chars[i] != '\n' {
                i += 1;
            }
        } else if c == '/' && i + 1 < n && chars[i + 1] == '*' {
            i += 2;
            while i < n && !(chars[i] == '*' && i + 1 < n && chars[i + 1] == '/') {
                i += 1;
            }
            i = (i + 2).min(n);
        } else if c == '"' {
            if i + 2 < n && chars[i + 1] == '"' && chars[i + 2] == '"' {
                // text block
                i += 3;
                while i < n && !(chars[i] == '"' && i + 2 < n && chars[i + 1] == '"' && chars[i + 2] == '"') {
                    if chars[i] == '\\' {
                        i += 1;
                    }
                    i += 1;
                }
                i = (i + 3).min(n);
            } else {
                i = skip_quoted(&chars, i, '"');
            }
            tokens.push(Token::Literal);
        } else if c == '\'' {
            i = skip_quoted(&chars, i, '\'');
            tokens.push(Token::Literal);
        } else if c.is_ascii_digit() {
            while i < n && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '.') {
                i += 1;
            }
            tokens.push(Token::Literal);
        } else if is_ident_start(c) {
            let start = i;
            while i < n && is_ident_part(chars[i]) {
                i += 1;
            }
            tokens.push(Token::Ident(chars[start..i].iter().collect()));
        } else {
            tokens.push(Token::Punct(c));
            i += 1;
        }
    }
    tokens
}

fn skip_quoted(chars: &[char], start: usize, quote: char) -> usize {
    let mut i = start + 1;
    while i < chars.len() {
        match chars[i] {
            '\\' => i += 2,
            '\n' => return i + 1,
            c if c == quote => return i + 1,
            _ => i += 1,
        }
    }
    chars.len()
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '$'
}

fn is_ident_part(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}

/// Reads a dotted name starting at `i`; returns the segments and the index after it.
pub fn dotted_name(tokens: &[Token], mut i: usize) -> (Vec<String>, usize) {
    let mut parts = Vec::new();
    while let Some(word) = tokens.get(i).and_then(Token::ident) {
        parts.push(word.to_string());
        i += 1;
        if tokens.get(i).is_some_and(|t| t.is_punct('.'))
            && tokens.get(i + 1).and_then(Token::ident).is_some()
        {
            i += 1;
        } else {
            break;
        }
    }
    (parts, i)
}

/// The declared package, if the compilation unit has a `package` declaration.
pub fn package_declaration(tokens: &[Token]) -> Option<String> {
    let mut i = 0;
    while i < tokens.len() {
        // annotations on the package declaration
        if tokens[i].is_punct('@') {
            let (_, next) = dotted_name(tokens, i + 1);
            i = skip_balanced(tokens, next, '(', ')');
            continue;
        }
        if tokens[i].is_ident("package") {
            let (parts, next) = dotted_name(tokens, i + 1);
            if !parts.is_empty() && tokens.get(next).is_some_and(|t| t.is_punct(';')) {
                return Some(parts.join("."));
            }
            return None;
        }
        return None;
    }
    None
}

/// If `tokens[i]` is `open`, returns the index just past the matching `close`; otherwise `i`.
pub fn skip_balanced(tokens: &[Token], i: usize, open: char, close: char) -> usize {
    if !tokens.get(i).is_some_and(|t| t.is_punct(open)) {
        return i;
    }
    let mut depth = 0usize;
    let mut j = i;
    while j < tokens.len() {
        if tokens[j].is_punct(open) {
            depth += 1;
        } else if tokens[j].is_punct(close) {
            depth -= 1;
            if depth == 0 {
                return j + 1;
            }
        }
        j += 1;
    }
    tokens.len()
}

/// Names of types declared at brace depth zero (`class`, `interface`, `enum`, `record`).
pub fn top_level_type_names(tokens: &[Token]) -> Vec<String> {
    let mut depth = 0i64;
    let mut names = Vec::new();
    for (i, tok) in tokens.iter().enumerate() {
        match tok {
            Token::Punct('{') => depth += 1,
            Token::Punct('}') => depth -= 1,
            Token::Ident(word) if depth == 0 => {
                let declares = matches!(word.as_str(), "class" | "interface" | "enum" | "record");
                // `@interface` declares an annotation type; `x.class` is a literal
                let after_dot = i > 0 && tokens[i - 1].is_punct('.');
                if declares && !after_dot {
                    if let Some(name) = tokens.get(i + 1).and_then(Token::ident) {
                        if !is_keyword(name) {
                            names.push(name.to_string());
                        }
                    }
                }
            }
            _ => {}
        }
    }
    names
}
