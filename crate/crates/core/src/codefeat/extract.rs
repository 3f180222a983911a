use std::collections::BTreeSet;

use crate::corpus::SourceFile;
use crate::java::{self, Token};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Import {
    /// Dotted path without a trailing `.*`.
    pub path: String,
    pub on_demand: bool,
    pub is_static: bool,
}

impl Import {
    /// The top-level type this import names, if any. On-demand imports of a
    /// package name no type.
    pub fn imported_type(&self) -> Option<String> {
        let parts: Vec<&str> = self.path.split('.').collect();
        if self.on_demand && !self.is_static {
            return None;
        }
        match first_type_segment(&parts) {
            Some(0) => None,
            Some(i) => Some(parts[..=i].join(".")),
            // all-lowercase single-type import: last segment is the type
            None if !self.is_static && parts.len() >= 2 => Some(self.path.clone()),
            None => None,
        }
    }

    /// Last segment of a single-type import.
    pub fn simple_name(&self) -> Option<&str> {
        if self.on_demand || self.is_static {
            return None;
        }
        self.path.rsplit('.').next()
    }
}

/// Raw type references of one compilation unit, before resolution.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypeRefs {
    pub package: Option<String>,
    pub imports: Vec<Import>,
    /// Unqualified names seen in type positions.
    pub simple: BTreeSet<String>,
    /// Package-qualified names, truncated to the top-level type.
    pub qualified: BTreeSet<String>,
    pub warnings: Vec<String>,
}

fn starts_upper(word: &str) -> bool {
    word.chars().next().is_some_and(char::is_uppercase)
}

fn has_lower(word: &str) -> bool {
    word.chars().any(char::is_lowercase)
}

fn first_type_segment<S: AsRef<str>>(parts: &[S]) -> Option<usize> {
    parts.iter().position(|p| starts_upper(p.as_ref()))
}

/// More than a tenth of the characters being control characters or U+FFFD
/// marks a file as binary or garbled.
fn looks_unreadable(text: &str) -> bool {
    let mut total = 0usize;
    let mut bad = 0usize;
    for c in text.chars() {
        total += 1;
        if c == '\u{FFFD}' || (c.is_control() && !matches!(c, '\n' | '\r' | '\t' | '\x0c')) {
            bad += 1;
        }
    }
    total > 0 && bad * 10 > total
}

pub fn parse_types(file: &SourceFile) -> TypeRefs {
    let mut refs = parse_types_text(&file.text);
    for w in &mut refs.warnings {
        w.push(' ');
        w.push_str(&file.path.display().to_string());
    }
    refs
}

/// Extracts type references from Java text. Never fails: unparseable regions
/// are skipped and garbled input yields an empty set with a warning.
pub fn parse_types_text(text: &str) -> TypeRefs {
    if looks_unreadable(text) {
        return TypeRefs {
            warnings: vec!["WARN unreadable_source".to_string()],
            ..TypeRefs::default()
        };
    }
    let tokens = java::tokenize(text);
    let mut scanner = Scanner {
        toks: &tokens,
        refs: TypeRefs {
            package: java::package_declaration(&tokens),
            ..TypeRefs::default()
        },
    };
    scanner.run();
    scanner.refs
}

struct TypeSpan {
    parts: Vec<String>,
    args: Vec<Vec<String>>,
    end: usize,
}

struct Scanner<'t> {
    toks: &'t [Token],
    refs: TypeRefs,
}

impl Scanner<'_> {
    fn ident(&self, i: usize) -> Option<&str> {
        self.toks.get(i).and_then(Token::ident)
    }

    fn punct(&self, i: usize, c: char) -> bool {
        self.toks.get(i).is_some_and(|t| t.is_punct(c))
    }

    fn run(&mut self) {
        let mut i = 0;
        while i < self.toks.len() {
            i = self.step(i);
        }
    }

    /// Handles the construct starting at `i`; returns where to continue.
    fn step(&mut self, i: usize) -> usize {
        match &self.toks[i] {
            Token::Ident(word) => match word.as_str() {
                "package" => self.skip_past(i, ';'),
                "import" => self.import(i),
                "extends" | "implements" | "throws" => self.type_list(i + 1, ','),
                "new" | "instanceof" => {
                    if let Some(span) = self.read_type(i + 1) {
                        self.record_span(&span);
                    }
                    i + 1
                }
                "catch" if self.punct(i + 1, '(') => self.type_list(i + 2, '|'),
                w if java::is_keyword(w) && !java::is_primitive(w) => i + 1,
                _ => {
                    if !(i > 0 && self.punct(i - 1, '.')) {
                        self.declaration_or_usage(i);
                    }
                    i + 1
                }
            },
            Token::Punct('@') => {
                // annotation name
                let (_, next) = java::dotted_name(self.toks, i + 1);
                next.max(i + 1)
            }
            Token::Punct('(') => {
                self.cast(i);
                i + 1
            }
            _ => i + 1,
        }
    }

    fn skip_past(&self, mut i: usize, c: char) -> usize {
        while i < self.toks.len() && !self.punct(i, c) {
            i += 1;
        }
        i + 1
    }

    fn import(&mut self, i: usize) -> usize {
        let mut j = i + 1;
        let is_static = self.ident(j) == Some("static");
        if is_static {
            j += 1;
        }
        let (parts, mut next) = java::dotted_name(self.toks, j);
        let mut on_demand = false;
        if self.punct(next, '.') && self.punct(next + 1, '*') {
            on_demand = true;
            next += 2;
        }
        if !parts.is_empty() && self.punct(next, ';') {
            self.refs.imports.push(Import {
                path: parts.join("."),
                on_demand,
                is_static,
            });
            next + 1
        } else {
            i + 1
        }
    }

    fn type_list(&mut self, mut i: usize, separator: char) -> usize {
        while let Some(span) = self.read_type(i) {
            self.record_span(&span);
            i = span.end;
            if self.punct(i, separator) {
                i += 1;
            } else {
                break;
            }
        }
        i
    }

    /// Reads `Name(.Name)* <args>? ([])* ...?` at `i`.
    fn read_type(&self, i: usize) -> Option<TypeSpan> {
        let first = self.ident(i)?;
        if java::is_keyword(first) && !java::is_primitive(first) {
            return None;
        }
        let (parts, mut end) = java::dotted_name(self.toks, i);
        if parts.iter().skip(1).any(|p| java::is_keyword(p)) {
            return None;
        }
        let mut args = Vec::new();
        if self.punct(end, '<') {
            if let Some((inner, after)) = self.generic_args(end) {
                args = inner;
                end = after;
            }
        }
        while self.punct(end, '[') && self.punct(end + 1, ']') {
            end += 2;
        }
        if self.punct(end, '.') && self.punct(end + 1, '.') && self.punct(end + 2, '.') {
            end += 3;
        }
        Some(TypeSpan { parts, args, end })
    }

    /// Dotted names inside a balanced `<...>` made only of type-argument tokens.
    fn generic_args(&self, open: usize) -> Option<(Vec<Vec<String>>, usize)> {
        let mut depth = 0usize;
        let mut names = Vec::new();
        let mut j = open;
        while j < self.toks.len() {
            match &self.toks[j] {
                Token::Punct('<') => depth += 1,
                Token::Punct('>') => {
                    depth -= 1;
                    if depth == 0 {
                        return Some((names, j + 1));
                    }
                }
                Token::Punct(',' | '?' | '[' | ']' | '&' | '.') => {}
                Token::Ident(w) if w == "extends" || w == "super" => {}
                Token::Ident(w) if java::is_keyword(w) && !java::is_primitive(w) => return None,
                Token::Ident(_) => {
                    let (parts, next) = java::dotted_name(self.toks, j);
                    names.push(parts);
                    j = next;
                    continue;
                }
                _ => return None,
            }
            j += 1;
        }
        None
    }

    fn record_span(&mut self, span: &TypeSpan) {
        self.record(&span.parts, false);
        for arg in &span.args {
            self.record(arg, false);
        }
    }

    /// Records a dotted name. In expression context (`strict`) a package
    /// prefix needs two segments and the type segment must not be ALL_CAPS.
    fn record(&mut self, parts: &[String], strict: bool) {
        if parts.is_empty() || parts.iter().any(|p| java::is_keyword(p)) {
            return;
        }
        match first_type_segment(parts) {
            Some(0) if !strict || (parts.len() >= 2 && has_lower(&parts[0])) => {
                self.refs.simple.insert(parts[0].clone());
            }
            Some(i) if i > 0 && (!strict || (i >= 2 && has_lower(&parts[i]))) => {
                self.refs.qualified.insert(parts[..=i].join("."));
            }
            _ => {}
        }
    }

    fn declaration_or_usage(&mut self, i: usize) {
        if let Some(span) = self.read_type(i) {
            let is_declaration = self.ident(span.end).is_some_and(|w| !java::is_keyword(w))
                && self.toks.get(span.end + 1).is_some_and(|t| {
                    matches!(t, Token::Punct('=' | ';' | ',' | ')' | ':' | '(' | '['))
                });
            if is_declaration {
                self.record_span(&span);
                return;
            }
        }
        let (parts, next) = java::dotted_name(self.toks, i);
        if parts.len() == 1 && self.punct(next, ':') && self.punct(next + 1, ':') {
            // method reference `Type::method`
            if starts_upper(&parts[0]) {
                self.refs.simple.insert(parts[0].clone());
            }
            return;
        }
        self.record(&parts, true);
    }

    fn cast(&mut self, open: usize) {
        let Some(span) = self.read_type(open + 1) else {
            return;
        };
        if !self.punct(span.end, ')') || java::is_primitive(&span.parts[0]) {
            return;
        }
        let last_upper = span.parts.last().is_some_and(|p| starts_upper(p));
        let operand_follows = match self.toks.get(span.end + 1) {
            Some(Token::Ident(w)) => !java::is_keyword(w) || matches!(w.as_str(), "this" | "new" | "super"),
            Some(Token::Literal) => true,
            Some(Token::Punct(c)) => matches!(c, '(' | '!' | '~'),
            None => false,
        };
        if last_upper && operand_follows {
            self.record_span(&span);
        }
    }
}
