//! Line-oriented N-Triples reader and the canonical writer used for hashing.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use flate2::read::MultiGzDecoder;

use super::term::{is_blank_label_char, is_valid_lang, BlankNode, Iri, Literal, Term, Triple};
use super::RdfError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    /// Collect malformed lines as errors and keep going.
    #[default]
    Lenient,
    /// Abort on the first malformed line.
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    MalformedIri,
    MalformedLiteral,
    MalformedBlankNode,
    MissingTerminatingDot,
    InvalidSubjectKind,
    InvalidPredicateKind,
    UnexpectedInput,
    InvalidUtf8,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {kind:?}: {reason}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParseOutput {
    pub triples: Vec<Triple>,
    pub errors: Vec<ParseError>,
}

pub fn parse_ntriples<R: BufRead>(mut reader: R, mode: ParseMode) -> Result<ParseOutput, RdfError> {
    let mut out = ParseOutput::default();
    let mut buf = Vec::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_no += 1;
        if buf.last() == Some(&b'\n') {
            buf.pop();
            if buf.last() == Some(&b'\r') {
                buf.pop();
            }
        }
        let result = match std::str::from_utf8(&buf) {
            Ok(line) => parse_line(line),
            Err(e) => Err(LineError::new(ParseErrorKind::InvalidUtf8, e.to_string())),
        };
        match result {
            Ok(Some(t)) => out.triples.push(t),
            Ok(None) => {}
            Err(e) => {
                let err = ParseError {
                    line: line_no,
                    kind: e.kind,
                    reason: e.reason,
                };
                if mode == ParseMode::Strict {
                    return Err(RdfError::Parse(err));
                }
                out.errors.push(err);
            }
        }
    }
    Ok(out)
}

pub fn parse_ntriples_str(input: &str, mode: ParseMode) -> Result<ParseOutput, RdfError> {
    parse_ntriples(input.as_bytes(), mode)
}

/// Reads a file, transparently gunzipping when the name ends in `.gz`.
pub fn read_ntriples_file(path: impl AsRef<Path>, mode: ParseMode) -> Result<ParseOutput, RdfError> {
    let path = path.as_ref();
    let file = File::open(path)?;
    let gz = path.extension().is_some_and(|e| e == "gz");
    let reader: Box<dyn Read> = if gz {
        Box::new(MultiGzDecoder::new(file))
    } else {
        Box::new(file)
    };
    parse_ntriples(BufReader::new(reader), mode)
}

/// Canonical N-Triples: one line per distinct triple in [`Triple`] order,
/// LF endings, no trailing whitespace.
pub fn canonical_serialize<'a, I>(triples: I) -> Vec<u8>
where
    I: IntoIterator<Item = &'a Triple>,
{
    let mut sorted: Vec<&Triple> = triples.into_iter().collect();
    if !sorted.windows(2).all(|w| w[0] < w[1]) {
        sorted.sort_unstable();
        sorted.dedup();
    }
    let mut out = Vec::with_capacity(sorted.len() * 80);
    for t in sorted {
        use std::io::Write;
        writeln!(out, "{t}").expect("writing to a Vec cannot fail");
    }
    out
}

#[derive(Debug)]
struct LineError {
    kind: ParseErrorKind,
    reason: String,
}

impl LineError {
    fn new(kind: ParseErrorKind, reason: impl fmt::Display) -> Self {
        LineError {
            kind,
            reason: reason.to_string(),
        }
    }
}

/// Parses one line. `Ok(None)` for blank and comment-only lines.
pub fn parse_line_str(line: &str) -> Result<Option<Triple>, ParseError> {
    parse_line(line).map_err(|e| ParseError {
        line: 1,
        kind: e.kind,
        reason: e.reason,
    })
}

fn parse_line(line: &str) -> Result<Option<Triple>, LineError> {
    let mut cur = Cursor { s: line, pos: 0 };
    cur.skip_ws();
    if cur.at_end() || cur.peek() == Some('#') {
        return Ok(None);
    }
    let subject = cur.term()?;
    if subject.is_literal() {
        return Err(LineError::new(
            ParseErrorKind::InvalidSubjectKind,
            "literal in subject position",
        ));
    }
    cur.require_ws()?;
    let predicate = cur.term()?;
    if !matches!(predicate, Term::Iri(_)) {
        return Err(LineError::new(
            ParseErrorKind::InvalidPredicateKind,
            "predicate must be an IRI",
        ));
    }
    cur.require_ws()?;
    let object = cur.term()?;
    cur.skip_ws();
    match cur.peek() {
        Some('.') => cur.bump(),
        None | Some('#') => {
            return Err(LineError::new(
                ParseErrorKind::MissingTerminatingDot,
                "expected '.' at end of statement",
            ))
        }
        Some(c) => {
            return Err(LineError::new(
                ParseErrorKind::UnexpectedInput,
                format!("unexpected {c:?}"),
            ))
        }
    }
    cur.skip_ws();
    match cur.peek() {
        None | Some('#') => {}
        Some(c) => {
            return Err(LineError::new(
                ParseErrorKind::UnexpectedInput,
                format!("unexpected {c:?} after '.'"),
            ))
        }
    }
    let triple = Triple::new(subject, predicate, object).expect("kinds checked above");
    Ok(Some(triple))
}

/// A complete N-Triples literal such as `"x"@en`, or `None`.
pub(crate) fn parse_literal_str(s: &str) -> Option<Term> {
    let mut cur = Cursor { s, pos: 0 };
    let term = cur.literal().ok()?;
    cur.at_end().then_some(term)
}

struct Cursor<'a> {
    s: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn rest(&self) -> &'a str {
        &self.s[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) {
        if let Some(c) = self.peek() {
            self.pos += c.len_utf8();
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.s.len()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t')) {
            self.bump();
        }
    }

    fn require_ws(&mut self) -> Result<(), LineError> {
        let before = self.pos;
        self.skip_ws();
        if self.pos == before {
            // `<a><b>` is legal N-Triples; only a literal or blank node needs separation,
            // and those cases fail later anyway.
            if !matches!(self.peek(), Some('<' | '"' | '_')) {
                return Err(match self.peek() {
                    None => LineError::new(ParseErrorKind::MissingTerminatingDot, "statement ends early"),
                    Some(c) => LineError::new(ParseErrorKind::UnexpectedInput, format!("unexpected {c:?}")),
                });
            }
        }
        Ok(())
    }

    fn term(&mut self) -> Result<Term, LineError> {
        match self.peek() {
            Some('<') => self.iri().map(Term::Iri),
            Some('_') => self.blank_node(),
            Some('"') => self.literal(),
            None => Err(LineError::new(
                ParseErrorKind::MissingTerminatingDot,
                "statement ends early",
            )),
            Some(c) => Err(LineError::new(
                ParseErrorKind::UnexpectedInput,
                format!("unexpected {c:?} where a term was expected"),
            )),
        }
    }

    fn iri(&mut self) -> Result<Iri, LineError> {
        debug_assert_eq!(self.peek(), Some('<'));
        self.bump();
        let mut value = String::new();
        loop {
            match self.peek() {
                None => return Err(LineError::new(ParseErrorKind::MalformedIri, "unterminated IRI")),
                Some('>') => {
                    self.bump();
                    break;
                }
                Some('\\') => {
                    self.bump();
                    let c = self
                        .uchar()
                        .map_err(|r| LineError::new(ParseErrorKind::MalformedIri, r))?;
                    value.push(c);
                }
                Some(c) => {
                    value.push(c);
                    self.bump();
                }
            }
        }
        Iri::new(value).map_err(|e| LineError::new(ParseErrorKind::MalformedIri, e))
    }

    /// After a backslash: `uXXXX` or `UXXXXXXXX`.
    fn uchar(&mut self) -> Result<char, String> {
        let width = match self.peek() {
            Some('u') => 4,
            Some('U') => 8,
            other => {
                return Err(format!(
                    "invalid escape \\{}",
                    other.map(String::from).unwrap_or_default()
                ))
            }
        };
        self.bump();
        let rest = self.rest();
        let hex = rest.get(..width).ok_or("truncated \\u escape")?;
        let code = u32::from_str_radix(hex, 16).map_err(|_| format!("bad hex digits {hex:?}"))?;
        if !hex.chars().all(|c| c.is_ascii_hexdigit()) {
            return Err(format!("bad hex digits {hex:?}"));
        }
        self.pos += width;
        char::from_u32(code).ok_or_else(|| format!("invalid code point U+{code:X}"))
    }

    fn blank_node(&mut self) -> Result<Term, LineError> {
        if !self.rest().starts_with("_:") {
            return Err(LineError::new(ParseErrorKind::MalformedBlankNode, "expected '_:'"));
        }
        self.pos += 2;
        let start = self.pos;
        while matches!(self.peek(), Some(c) if is_blank_label_char(c)) {
            self.bump();
        }
        // A label cannot end in '.', so give trailing dots back to the statement.
        while self.pos > start && self.s.as_bytes()[self.pos - 1] == b'.' {
            self.pos -= 1;
        }
        BlankNode::new(&self.s[start..self.pos])
            .map(Term::BlankNode)
            .map_err(|e| LineError::new(ParseErrorKind::MalformedBlankNode, e))
    }

    fn literal(&mut self) -> Result<Term, LineError> {
        let bad = |r: String| LineError::new(ParseErrorKind::MalformedLiteral, r);
        self.bump();
        let mut lexical = String::new();
        loop {
            match self.peek() {
                None => return Err(bad("unterminated string".into())),
                Some('"') => {
                    self.bump();
                    break;
                }
                Some('\\') => {
                    self.bump();
                    let c = match self.peek() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u' | 'U') => {
                            let c = self.uchar().map_err(bad)?;
                            lexical.push(c);
                            continue;
                        }
                        other => return Err(bad(format!("invalid escape {other:?}"))),
                    };
                    self.bump();
                    lexical.push(c);
                }
                Some(c) => {
                    lexical.push(c);
                    self.bump();
                }
            }
        }
        if self.rest().starts_with("^^") {
            self.pos += 2;
            if self.peek() != Some('<') {
                return Err(bad("datatype must be an IRI".into()));
            }
            let dt = self.iri()?;
            Ok(Term::Literal(Literal::typed(lexical, dt)))
        } else if self.peek() == Some('@') {
            self.bump();
            let start = self.pos;
            while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '-') {
                self.bump();
            }
            let tag = &self.s[start..self.pos];
            if !is_valid_lang(tag) {
                return Err(bad(format!("invalid language tag {tag:?}")));
            }
            Ok(Term::Literal(Literal::lang(lexical, tag).expect("validated")))
        } else {
            Ok(Term::Literal(Literal::simple(lexical)))
        }
    }
}
