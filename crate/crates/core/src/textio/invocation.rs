//! Grammar for task-2 invocation strings.
//!
//! ```text
//! sequence   := ws call (ws [,;]? ws call)* ws
//! call       := name ws ( "(" ws [ pair (ws "," ws pair)* [ws ","] ] ws ")" )?
//! name       := ident | '"' ident '"'
//! pair       := key ws "=" ws quoted
//! key        := ident | quoted
//! quoted     := '"' ... '"' | "'" ... "'"      (backslash escapes the next char)
//! ident      := [A-Za-z_][A-Za-z0-9_.-]*
//! ```

use indexmap::IndexMap;

use crate::tool::ToolCall;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid invocation at byte {offset}: {message}")]
pub struct InvocationError {
    pub offset: usize,
    pub message: String,
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, InvocationError> {
        Err(InvocationError {
            offset: self.pos,
            message: message.into(),
        })
    }

    fn ident(&mut self) -> Result<&'a str, InvocationError> {
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                self.bump();
            }
            _ => return self.fail("expected an identifier"),
        }
        while self
            .peek()
            .is_some_and(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'))
        {
            self.bump();
        }
        Ok(&self.src[start..self.pos])
    }

    fn quoted(&mut self) -> Result<String, InvocationError> {
        let quote = match self.peek() {
            Some(q @ ('"' | '\'')) => q,
            _ => return self.fail("expected a quoted value"),
        };
        self.bump();
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return self.fail("unterminated quoted value"),
                Some('\\') => match self.bump() {
                    Some(c) => out.push(c),
                    None => return self.fail("dangling escape"),
                },
                Some(c) if c == quote => return Ok(out),
                Some(c) => out.push(c),
            }
        }
    }

    fn name(&mut self) -> Result<String, InvocationError> {
        if self.eat('"') {
            let name = self.ident()?.to_string();
            if !self.eat('"') {
                return self.fail("unterminated quoted tool name");
            }
            Ok(name)
        } else {
            Ok(self.ident()?.to_string())
        }
    }

    fn call(&mut self) -> Result<ToolCall, InvocationError> {
        let tool_name = self.name()?;
        let mut arguments = IndexMap::new();
        self.skip_ws();
        if self.eat('(') {
            self.skip_ws();
            while !self.eat(')') {
                let key = match self.peek() {
                    Some('"' | '\'') => self.quoted()?,
                    _ => self.ident()?.to_string(),
                };
                self.skip_ws();
                if !self.eat('=') {
                    return self.fail("expected `=` after parameter name");
                }
                self.skip_ws();
                let value = self.quoted()?;
                if arguments.contains_key(&key) {
                    return self.fail(format!("parameter `{key}` given twice"));
                }
                arguments.insert(key, value);
                self.skip_ws();
                if self.eat(',') {
                    self.skip_ws();
                } else if self.peek() != Some(')') {
                    return self.fail("expected `,` or `)`");
                }
            }
        }
        Ok(ToolCall {
            tool_name,
            arguments,
        })
    }
}

/// Parses one or more invocations from a single string.
pub fn parse_invocations(text: &str) -> Result<Vec<ToolCall>, InvocationError> {
    let mut cur = Cursor { src: text, pos: 0 };
    let mut calls = Vec::new();
    cur.skip_ws();
    if cur.peek().is_none() {
        return cur.fail("empty invocation");
    }
    while cur.peek().is_some() {
        calls.push(cur.call()?);
        cur.skip_ws();
        if cur.eat(',') || cur.eat(';') {
            cur.skip_ws();
            if cur.peek().is_none() {
                return cur.fail("trailing separator");
            }
        }
    }
    Ok(calls)
}

/// Parses exactly one invocation.
pub fn parse_invocation(text: &str) -> Result<ToolCall, InvocationError> {
    let mut calls = parse_invocations(text)?;
    if calls.len() != 1 {
        return Err(InvocationError {
            offset: 0,
            message: format!("expected one invocation, found {}", calls.len()),
        });
    }
    Ok(calls.remove(0))
}
