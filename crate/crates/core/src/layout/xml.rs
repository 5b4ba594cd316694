//! A small XML reader covering what station layout files use: elements,
//! attributes, comments and an optional prolog. No namespaces, no entities,
//! no meaningful text content.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("malformed XML at {line}:{col}: {msg}")]
pub struct XmlError {
    pub line: u32,
    pub col: u32,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    pub name: String,
    pub attrs: Vec<(String, String)>,
    pub children: Vec<Element>,
    pub line: u32,
}

impl Element {
    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }
}

struct Scanner<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Scanner<'a> {
    fn new(src: &'a str) -> Self {
        Scanner { src: src.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn err(&self, msg: impl Into<String>) -> XmlError {
        XmlError { line: self.line, col: self.col, msg: msg.into() }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(b)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b) if b.is_ascii_whitespace()) {
            self.bump();
        }
    }

    fn eat(&mut self, b: u8) -> Result<(), XmlError> {
        match self.peek() {
            Some(c) if c == b => {
                self.bump();
                Ok(())
            }
            other => Err(self.err(format!(
                "expected '{}', found {}",
                b as char,
                other.map_or("end of input".to_string(), |c| format!("'{}'", c as char))
            ))),
        }
    }

    fn starts_with(&self, s: &str) -> bool {
        self.src[self.pos..].starts_with(s.as_bytes())
    }

    fn skip_str(&mut self, s: &str) {
        for _ in 0..s.len() {
            self.bump();
        }
    }

    fn name(&mut self) -> Result<String, XmlError> {
        let mut s = String::new();
        while let Some(b) = self.peek() {
            if b.is_ascii_alphanumeric() || b == b'_' || b == b'-' || b == b'.' || b == b':' {
                s.push(b as char);
                self.bump();
            } else {
                break;
            }
        }
        if s.is_empty() {
            return Err(self.err("expected a name"));
        }
        Ok(s)
    }

    fn skip_misc(&mut self) -> Result<(), XmlError> {
        loop {
            self.skip_ws();
            if self.starts_with("<!--") {
                self.skip_str("<!--");
                loop {
                    if self.starts_with("-->") {
                        self.skip_str("-->");
                        break;
                    }
                    if self.bump().is_none() {
                        return Err(self.err("unterminated comment"));
                    }
                }
            } else if self.starts_with("<?") {
                self.skip_str("<?");
                loop {
                    if self.starts_with("?>") {
                        self.skip_str("?>");
                        break;
                    }
                    if self.bump().is_none() {
                        return Err(self.err("unterminated processing instruction"));
                    }
                }
            } else {
                return Ok(());
            }
        }
    }

    fn element(&mut self) -> Result<Element, XmlError> {
        let line = self.line;
        self.eat(b'<')?;
        let name = self.name()?;
        let mut attrs = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'/') => {
                    self.bump();
                    self.eat(b'>')?;
                    return Ok(Element { name, attrs, children: Vec::new(), line });
                }
                Some(b'>') => {
                    self.bump();
                    break;
                }
                Some(_) => {
                    let key = self.name()?;
                    self.skip_ws();
                    self.eat(b'=')?;
                    self.skip_ws();
                    let quote = match self.peek() {
                        Some(q @ (b'"' | b'\'')) => {
                            self.bump();
                            q
                        }
                        _ => return Err(self.err("expected a quoted attribute value")),
                    };
                    let mut val = String::new();
                    loop {
                        match self.bump() {
                            Some(b) if b == quote => break,
                            Some(b) => val.push(b as char),
                            None => return Err(self.err("unterminated attribute value")),
                        }
                    }
                    attrs.push((key, val));
                }
                None => return Err(self.err("unterminated element")),
            }
        }
        // Children until the matching close tag. Text content is ignored.
        let mut children = Vec::new();
        loop {
            self.skip_misc()?;
            if self.starts_with("</") {
                self.skip_str("</");
                let close = self.name()?;
                if close != name {
                    return Err(self.err(format!("mismatched close tag </{close}> for <{name}>")));
                }
                self.skip_ws();
                self.eat(b'>')?;
                return Ok(Element { name, attrs, children, line });
            }
            match self.peek() {
                Some(b'<') => children.push(self.element()?),
                Some(_) => {
                    // Stray text; tolerate and skip to the next markup.
                    while let Some(b) = self.peek() {
                        if b == b'<' {
                            break;
                        }
                        self.bump();
                    }
                }
                None => return Err(self.err(format!("missing close tag for <{name}>"))),
            }
        }
    }
}

/// Parse a document and return its root element.
pub fn parse_document(src: &str) -> Result<Element, XmlError> {
    let mut sc = Scanner::new(src);
    sc.skip_misc()?;
    if sc.peek() != Some(b'<') {
        return Err(sc.err("expected a root element"));
    }
    let root = sc.element()?;
    sc.skip_misc()?;
    if sc.peek().is_some() {
        return Err(sc.err("content after the root element"));
    }
    Ok(root)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_nested_elements() {
        let doc = r#"<?xml version="1.0"?>
<!-- layout -->
<station name="X">
  <track id="T_1"/>
  <edge id="e1" from="a" to="b" track='T_1'></edge>
</station>"#;
        let root = parse_document(doc).unwrap();
        assert_eq!(root.name, "station");
        assert_eq!(root.attr("name"), Some("X"));
        assert_eq!(root.children.len(), 2);
        assert_eq!(root.children[1].attr("track"), Some("T_1"));
    }

    #[test]
    fn rejects_mismatched_tags() {
        assert!(parse_document("<a><b></a></b>").is_err());
        assert!(parse_document("<a>").is_err());
        assert!(parse_document("").is_err());
    }
}
