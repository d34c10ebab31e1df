use std::cmp::Ordering;
use std::fmt;

use super::vocab;

/// Reasons a term or triple fails validation.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TermError {
    #[error("invalid IRI {0:?}")]
    InvalidIri(String),
    #[error("invalid blank node label {0:?}")]
    InvalidBlankNode(String),
    #[error("invalid language tag {0:?}")]
    InvalidLanguage(String),
    #[error("invalid literal {0:?}")]
    InvalidLiteral(String),
    #[error("literal cannot be used as a subject")]
    LiteralSubject,
    #[error("predicate must be an IRI")]
    NonIriPredicate,
}

/// An absolute IRI. Never empty, no whitespace, no characters that are
/// forbidden inside an N-Triples `IRIREF`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Iri(String);

impl Iri {
    pub fn new(value: impl Into<String>) -> Result<Self, TermError> {
        let value = value.into();
        if is_valid_iri(&value) {
            Ok(Iri(value))
        } else {
            Err(TermError::InvalidIri(value))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

impl serde::Serialize for Iri {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl Ord for Iri {
    fn cmp(&self, other: &Self) -> Ordering {
        // `<a!>` sorts before `<a>` in the serialized form, so compare with the brackets.
        bracketed(&self.0).cmp(bracketed(&other.0))
    }
}

impl PartialOrd for Iri {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn bracketed(s: &str) -> impl Iterator<Item = char> + '_ {
    std::iter::once('<').chain(s.chars()).chain(std::iter::once('>'))
}

fn is_forbidden_iri_char(c: char) -> bool {
    c <= ' ' || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\') || c.is_whitespace()
}

fn is_valid_iri(s: &str) -> bool {
    if s.is_empty() || s.chars().any(is_forbidden_iri_char) {
        return false;
    }
    // absolute: scheme ":" ...
    let Some((scheme, _)) = s.split_once(':') else {
        return false;
    };
    let mut chars = scheme.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlankNode(String);

impl BlankNode {
    /// Labels follow `[A-Za-z0-9][A-Za-z0-9._-]*` and may not end in `.`.
    pub fn new(label: impl Into<String>) -> Result<Self, TermError> {
        let label = label.into();
        let mut chars = label.chars();
        let ok = matches!(chars.next(), Some(c) if c.is_ascii_alphanumeric())
            && chars.all(is_blank_label_char)
            && !label.ends_with('.');
        if ok {
            Ok(BlankNode(label))
        } else {
            Err(TermError::InvalidBlankNode(label))
        }
    }

    pub fn label(&self) -> &str {
        &self.0
    }
}

pub(crate) fn is_blank_label_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-')
}

/// Literal with at most one of datatype / language tag.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Literal {
    lexical: String,
    annotation: LiteralAnnotation,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum LiteralAnnotation {
    Plain,
    Typed(Iri),
    Lang(String),
}

impl Literal {
    pub fn simple(lexical: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            annotation: LiteralAnnotation::Plain,
        }
    }

    pub fn typed(lexical: impl Into<String>, datatype: Iri) -> Self {
        Literal {
            lexical: lexical.into(),
            annotation: LiteralAnnotation::Typed(datatype),
        }
    }

    pub fn lang(lexical: impl Into<String>, language: impl Into<String>) -> Result<Self, TermError> {
        let language = language.into();
        if !is_valid_lang(&language) {
            return Err(TermError::InvalidLanguage(language));
        }
        Ok(Literal {
            lexical: lexical.into(),
            annotation: LiteralAnnotation::Lang(language),
        })
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    /// Explicit datatype, if one was written.
    pub fn datatype(&self) -> Option<&Iri> {
        match &self.annotation {
            LiteralAnnotation::Typed(dt) => Some(dt),
            _ => None,
        }
    }

    pub fn language(&self) -> Option<&str> {
        match &self.annotation {
            LiteralAnnotation::Lang(l) => Some(l),
            _ => None,
        }
    }

    /// The datatype the literal carries in RDF 1.1 terms (language-tagged
    /// literals are `rdf:langString`, plain ones `xsd:string`).
    pub fn effective_datatype(&self) -> &str {
        match &self.annotation {
            LiteralAnnotation::Plain => vocab::XSD_STRING,
            LiteralAnnotation::Typed(dt) => dt.as_str(),
            LiteralAnnotation::Lang(_) => vocab::RDF_LANG_STRING,
        }
    }

    /// Same annotation, new lexical form.
    pub fn with_lexical(&self, lexical: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            annotation: self.annotation.clone(),
        }
    }
}

pub(crate) fn is_valid_lang(tag: &str) -> bool {
    let mut parts = tag.split('-');
    let first_ok = matches!(parts.next(), Some(p) if !p.is_empty() && p.chars().all(|c| c.is_ascii_alphabetic()));
    first_ok && parts.all(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_alphanumeric()))
}

/// An RDF term.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Iri(Iri),
    BlankNode(BlankNode),
    Literal(Literal),
}

impl Term {
    pub fn iri(value: impl Into<String>) -> Result<Self, TermError> {
        Iri::new(value).map(Term::Iri)
    }

    pub fn blank(label: impl Into<String>) -> Result<Self, TermError> {
        BlankNode::new(label).map(Term::BlankNode)
    }

    pub fn literal(lexical: impl Into<String>) -> Self {
        Term::Literal(Literal::simple(lexical))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }

    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(i) => Some(i),
            _ => None,
        }
    }

    /// Human-oriented key used in reports: the bare IRI, `_:label` for blank
    /// nodes, and the N-Triples form for literals. Unambiguous because IRIs
    /// always carry a scheme.
    pub fn label(&self) -> String {
        match self {
            Term::Iri(i) => i.as_str().to_owned(),
            other => other.to_string(),
        }
    }

    /// Inverse of [`Term::label`]; also accepts `<iri>`.
    pub fn from_label(label: &str) -> Result<Self, TermError> {
        if label.starts_with('"') {
            super::ntriples::parse_literal_str(label).ok_or_else(|| TermError::InvalidLiteral(label.to_owned()))
        } else if let Some(rest) = label.strip_prefix("_:") {
            Term::blank(rest)
        } else if let Some(inner) = label.strip_prefix('<').and_then(|l| l.strip_suffix('>')) {
            Term::iri(inner)
        } else {
            Term::iri(label)
        }
    }

    pub(crate) fn canonical_chars(&self) -> impl Iterator<Item = char> + '_ {
        let (prefix, body, escape, mid, tail, suffix): (&'static str, &str, bool, &'static str, &str, &'static str) =
            match self {
                Term::Iri(i) => ("<", i.as_str(), false, "", "", ">"),
                Term::BlankNode(b) => ("_:", b.label(), false, "", "", ""),
                Term::Literal(l) => match &l.annotation {
                    LiteralAnnotation::Plain => ("\"", &l.lexical, true, "\"", "", ""),
                    LiteralAnnotation::Lang(lang) => ("\"", &l.lexical, true, "\"@", lang, ""),
                    LiteralAnnotation::Typed(dt) => ("\"", &l.lexical, true, "\"^^<", dt.as_str(), ">"),
                },
            };
        prefix
            .chars()
            .chain(body.chars().flat_map(move |c| Escaped::new(c, escape)))
            .chain(mid.chars())
            .chain(tail.chars())
            .chain(suffix.chars())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use fmt::Write;
        for c in self.canonical_chars() {
            f.write_char(c)?;
        }
        Ok(())
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Term::Iri(a), Term::Iri(b)) => a.cmp(b),
            _ => self.canonical_chars().cmp(other.canonical_chars()),
        }
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<Iri> for Term {
    fn from(i: Iri) -> Self {
        Term::Iri(i)
    }
}

impl From<BlankNode> for Term {
    fn from(b: BlankNode) -> Self {
        Term::BlankNode(b)
    }
}

impl From<Literal> for Term {
    fn from(l: Literal) -> Self {
        Term::Literal(l)
    }
}

/// Up to six output characters for one input character of a literal body.
#[derive(Clone, Debug)]
pub(crate) struct Escaped {
    buf: [char; 6],
    len: u8,
    pos: u8,
}

impl Escaped {
    fn new(c: char, escape: bool) -> Self {
        let mut buf = ['\0'; 6];
        let len = if !escape {
            buf[0] = c;
            1
        } else {
            match c {
                '"' | '\\' => {
                    buf[0] = '\\';
                    buf[1] = c;
                    2
                }
                '\n' | '\r' | '\t' | '\u{8}' | '\u{c}' => {
                    buf[0] = '\\';
                    buf[1] = match c {
                        '\n' => 'n',
                        '\r' => 'r',
                        '\t' => 't',
                        '\u{8}' => 'b',
                        _ => 'f',
                    };
                    2
                }
                c if (c as u32) < 0x20 || c == '\u{7f}' => {
                    const HEX: &[u8; 16] = b"0123456789ABCDEF";
                    let v = c as u32;
                    buf[0] = '\\';
                    buf[1] = 'u';
                    buf[2] = '0';
                    buf[3] = '0';
                    buf[4] = HEX[(v >> 4) as usize] as char;
                    buf[5] = HEX[(v & 0xf) as usize] as char;
                    6
                }
                c => {
                    buf[0] = c;
                    1
                }
            }
        };
        Escaped { buf, len, pos: 0 }
    }
}

impl Iterator for Escaped {
    type Item = char;

    fn next(&mut self) -> Option<char> {
        if self.pos < self.len {
            let c = self.buf[self.pos as usize];
            self.pos += 1;
            Some(c)
        } else {
            None
        }
    }
}

/// An RDF statement. Subjects are IRIs or blank nodes; predicates are IRIs.
///
/// Ordering is lexicographic over the canonical N-Triples forms of subject,
/// predicate and object, which is also the byte order of the serialized lines.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    subject: Term,
    predicate: Term,
    object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Result<Self, TermError> {
        if subject.is_literal() {
            return Err(TermError::LiteralSubject);
        }
        if !matches!(predicate, Term::Iri(_)) {
            return Err(TermError::NonIriPredicate);
        }
        Ok(Triple {
            subject,
            predicate,
            object,
        })
    }

    /// Convenience constructor for all-IRI triples.
    pub fn iris(s: &str, p: &str, o: &str) -> Result<Self, TermError> {
        Triple::new(Term::iri(s)?, Term::iri(p)?, Term::iri(o)?)
    }

    pub fn subject(&self) -> &Term {
        &self.subject
    }

    pub fn predicate(&self) -> &Term {
        &self.predicate
    }

    /// The predicate IRI; always present by construction.
    pub fn predicate_iri(&self) -> &Iri {
        match &self.predicate {
            Term::Iri(i) => i,
            _ => unreachable!("predicate is always an IRI"),
        }
    }

    pub fn object(&self) -> &Term {
        &self.object
    }

    pub fn into_parts(self) -> (Term, Term, Term) {
        (self.subject, self.predicate, self.object)
    }

    /// Canonical N-Triples line without the trailing newline.
    pub fn to_ntriples(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}
