//! Lexer and recursive-descent parser for the assertion subset:
//!
//! ```text
//! assert property ( @(posedge ID) disable iff (ID) EXPR ) [else $error(STRING)] [;]
//! EXPR := TERM (("|->" | "==" | "!=") TERM)*
//! TERM := ID | NUMBER | $past(ID) | $stable(ID) | (EXPR)
//! ```

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SvaError {
    /// Byte offset into the checked text.
    pub offset: usize,
    pub message: String,
}

impl std::fmt::Display for SvaError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "at byte {}: {}", self.offset, self.message)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    System(String),
    Str(String),
    Op(&'static str),
    Punct(char),
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Number(s) => format!("number `{s}`"),
            Tok::System(s) => format!("`{s}`"),
            Tok::Str(_) => "string literal".into(),
            Tok::Op(s) => format!("`{s}`"),
            Tok::Punct(c) => format!("`{c}`"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, SvaError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |offset, message: String| SvaError { offset, message };
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if text[i..].starts_with("//") {
            i = text[i..].find('\n').map(|k| i + k).unwrap_or(bytes.len());
        } else if text[i..].starts_with("|->") {
            out.push((i, Tok::Op("|->")));
            i += 3;
        } else if text[i..].starts_with("==") {
            out.push((i, Tok::Op("==")));
            i += 2;
        } else if text[i..].starts_with("!=") {
            out.push((i, Tok::Op("!=")));
            i += 2;
        } else if matches!(c, '(' | ')' | '@' | ';') {
            out.push((i, Tok::Punct(c)));
            i += 1;
        } else if c == '"' {
            let start = i;
            i += 1;
            let mut s = String::new();
            loop {
                match bytes.get(i).map(|&b| b as char) {
                    None => return Err(err(start, "unterminated string literal".into())),
                    Some('"') => {
                        i += 1;
                        break;
                    }
                    Some('\\') if i + 1 < bytes.len() => {
                        let ch = text[i + 1..].chars().next().unwrap_or('\\');
                        s.push(ch);
                        i += 1 + ch.len_utf8();
                    }
                    Some(_) => {
                        let ch = text[i..].chars().next().unwrap_or(' ');
                        s.push(ch);
                        i += ch.len_utf8();
                    }
                }
            }
            out.push((start, Tok::Str(s)));
        } else if c == '$' || c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            i += 1;
            while i < bytes.len() && {
                let d = bytes[i] as char;
                d.is_ascii_alphanumeric() || matches!(d, '_' | '$' | '.')
            } {
                i += 1;
            }
            let word = &text[start..i];
            if word.ends_with('.') {
                return Err(err(start, format!("malformed identifier `{word}`")));
            }
            out.push((
                start,
                if c == '$' {
                    Tok::System(word.to_string())
                } else {
                    Tok::Ident(word.to_string())
                },
            ));
        } else if c.is_ascii_digit() || c == '\'' {
            let start = i;
            while i < bytes.len() && {
                let d = bytes[i] as char;
                d.is_ascii_alphanumeric() || matches!(d, '_' | '\'')
            } {
                i += 1;
            }
            let lit = &text[start..i];
            if !crate::lexicon::is_numeric(lit) && !lit.starts_with('\'') {
                return Err(err(start, format!("malformed number `{lit}`")));
            }
            out.push((start, Tok::Number(lit.to_string())));
        } else {
            let ch = text[i..].chars().next().unwrap_or(c);
            return Err(err(i, format!("unexpected character `{ch}`")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [(usize, Tok)],
    pos: usize,
    end: usize,
}

impl Parser<'_> {
    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.0).unwrap_or(self.end)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn fail<T>(&self, expected: &str) -> Result<T, SvaError> {
        let found = self.peek().map(Tok::describe).unwrap_or_else(|| "end of input".into());
        Err(SvaError {
            offset: self.offset(),
            message: format!("expected {expected}, found {found}"),
        })
    }

    fn keyword(&mut self, kw: &str) -> Result<(), SvaError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => self.fail(&format!("`{kw}`")),
        }
    }

    fn punct(&mut self, c: char) -> Result<(), SvaError> {
        match self.peek() {
            Some(Tok::Punct(p)) if *p == c => {
                self.pos += 1;
                Ok(())
            }
            _ => self.fail(&format!("`{c}`")),
        }
    }

    fn ident(&mut self) -> Result<(), SvaError> {
        match self.peek() {
            Some(Tok::Ident(s)) if !is_keyword(s) => {
                self.pos += 1;
                Ok(())
            }
            _ => self.fail("identifier"),
        }
    }

    fn expr(&mut self) -> Result<(), SvaError> {
        self.term()?;
        while let Some(Tok::Op(_)) = self.peek() {
            self.pos += 1;
            self.term()?;
        }
        Ok(())
    }

    fn term(&mut self) -> Result<(), SvaError> {
        match self.peek().cloned() {
            Some(Tok::Ident(s)) if !is_keyword(&s) => {
                self.pos += 1;
                Ok(())
            }
            Some(Tok::Number(_)) => {
                self.pos += 1;
                Ok(())
            }
            Some(Tok::System(s)) if s == "$past" || s == "$stable" => {
                self.pos += 1;
                self.punct('(')?;
                self.ident()?;
                self.punct(')')
            }
            Some(Tok::Punct('(')) => {
                self.pos += 1;
                self.expr()?;
                self.punct(')')
            }
            _ => self.fail("identifier, number, `$past(...)`, `$stable(...)` or `(`"),
        }
    }

    fn assertion(&mut self) -> Result<(), SvaError> {
        self.keyword("assert")?;
        self.keyword("property")?;
        self.punct('(')?;
        self.punct('@')?;
        self.punct('(')?;
        self.keyword("posedge")?;
        self.ident()?;
        self.punct(')')?;
        self.keyword("disable")?;
        self.keyword("iff")?;
        self.punct('(')?;
        self.ident()?;
        self.punct(')')?;
        self.expr()?;
        self.punct(')')?;
        if let Some(Tok::Ident(s)) = self.peek() {
            if s == "else" {
                self.pos += 1;
                match self.peek() {
                    Some(Tok::System(s)) if s == "$error" => self.pos += 1,
                    _ => return self.fail("`$error`"),
                }
                self.punct('(')?;
                match self.peek() {
                    Some(Tok::Str(_)) => self.pos += 1,
                    _ => return self.fail("string literal"),
                }
                self.punct(')')?;
            }
        }
        if let Some(Tok::Punct(';')) = self.peek() {
            self.pos += 1;
        }
        if self.pos < self.toks.len() {
            return self.fail("end of assertion");
        }
        Ok(())
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(s, "assert" | "property" | "posedge" | "disable" | "iff" | "else")
}

fn paren_errors(toks: &[(usize, Tok)]) -> Vec<SvaError> {
    let mut stack = Vec::new();
    let mut errors = Vec::new();
    for (off, t) in toks {
        match t {
            Tok::Punct('(') => stack.push(*off),
            Tok::Punct(')') if stack.pop().is_none() => {
                errors.push(SvaError {
                    offset: *off,
                    message: "unbalanced parentheses: unmatched `)`".into(),
                });
            }
            _ => {}
        }
    }
    errors.extend(stack.into_iter().map(|off| SvaError {
        offset: off,
        message: "unbalanced parentheses: unclosed `(`".into(),
    }));
    errors
}

/// Check one assertion (comments allowed) against the subset grammar.
pub fn validate_sva(text: &str) -> Result<(), Vec<SvaError>> {
    let toks = lex(text).map_err(|e| vec![e])?;
    let parens = paren_errors(&toks);
    if !parens.is_empty() {
        return Err(parens);
    }
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        end: text.len(),
    };
    p.assertion().map_err(|e| vec![e])
}

/// Split a `.sva` file into assertion blocks (text from one `assert` keyword
/// to the next) and validate each.
pub fn validate_sva_file(text: &str) -> Vec<(usize, Result<(), Vec<SvaError>>)> {
    let mut starts = Vec::new();
    let mut line_start = 0;
    for line in text.split_inclusive('\n') {
        if line.trim_start().starts_with("assert") {
            starts.push(line_start);
        }
        line_start += line.len();
    }
    let mut out = Vec::new();
    for (k, &s) in starts.iter().enumerate() {
        let e = starts.get(k + 1).copied().unwrap_or(text.len());
        out.push((s, validate_sva(&text[s..e])));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub const STALL_BLOCK: &str = "assert property (\n  @(posedge clk) disable iff (rst) // Security Property\n    aes.done |-> aes.out == $past(aes.key)\n  )\n  else // Error Message\n    $error(\"%m previous key has not been read\");\n";

    #[test]
    fn stall_block_parses() {
        assert_eq!(validate_sva(STALL_BLOCK), Ok(()));
        assert_eq!(
            validate_sva("assert property (@(posedge clk) disable iff (rst) (a == 1'b0) |-> $stable(b.c))"),
            Ok(())
        );
    }

    #[test]
    fn structured_errors() {
        let errs = validate_sva("assert property (").unwrap_err();
        assert!(errs[0].message.contains("unbalanced"));
        let errs = validate_sva("assert property (@(posedge clk) disable iff (rst) a |-> )").unwrap_err();
        assert!(errs[0].message.starts_with("expected identifier"));
        assert!(validate_sva("assert property (@(posedge clk) disable iff (rst) a &&& b)").is_err());
        assert!(validate_sva("assert property (@(posedge clk) disable iff (rst) $past(1))").is_err());
        assert!(validate_sva("assert property (@(posedge clk) disable iff (rst) a) else $error(\"x)").is_err());
        assert!(validate_sva("").is_err());
    }

    #[test]
    fn file_blocks() {
        let file = format!("// one\n{STALL_BLOCK}\n// two\n{STALL_BLOCK}");
        let res = validate_sva_file(&file);
        assert_eq!(res.len(), 2);
        assert!(res.iter().all(|(_, r)| r.is_ok()));
    }
}
