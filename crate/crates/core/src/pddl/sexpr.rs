//! S-expression reader with source positions and same-line comment capture.
//!
//! A `;` comment that shares a line with the end of a node is attached to
//! the last node completed on that line. This is how predicate descriptions,
//! parameter roles and action provenance survive a print/parse round trip.
//! Comments on their own line are dropped.

use std::fmt;

use super::error::PddlError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    Symbol(String),
    List(Vec<SExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SExpr {
    pub node: Node,
    pub line: usize,
    pub column: usize,
    pub comment: Option<String>,
}

impl SExpr {
    pub fn symbol(&self) -> Option<&str> {
        match &self.node {
            Node::Symbol(s) => Some(s),
            Node::List(_) => None,
        }
    }

    pub fn list(&self) -> Option<&[SExpr]> {
        match &self.node {
            Node::List(items) => Some(items),
            Node::Symbol(_) => None,
        }
    }

    /// Head symbol of a list, lowercased.
    pub fn head(&self) -> Option<String> {
        self.list()
            .and_then(|items| items.first())
            .and_then(|h| h.symbol())
            .map(|s| s.to_lowercase())
    }

    pub fn error(&self, message: impl Into<String>) -> PddlError {
        PddlError::syntax(self.line, self.column, self.token(), message)
    }

    /// Short rendering of the node for error messages.
    pub fn token(&self) -> String {
        let s = self.to_string();
        if s.chars().count() > 40 {
            let cut: String = s.chars().take(40).collect();
            format!("{cut}...")
        } else {
            s
        }
    }
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.node {
            Node::Symbol(s) => f.write_str(s),
            Node::List(items) => {
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
        }
    }
}

struct Frame {
    items: Vec<SExpr>,
    line: usize,
    column: usize,
}

/// Reads every top-level expression in `text`.
pub fn read_all(text: &str) -> Result<Vec<SExpr>, PddlError> {
    let mut stack: Vec<Frame> = vec![Frame {
        items: Vec::new(),
        line: 0,
        column: 0,
    }];
    // (stack depth, index within that frame, line the node ended on)
    let mut last: Option<(usize, usize, usize)> = None;

    let mut line = 1;
    let mut column = 1;
    let mut chars = text.char_indices().peekable();

    while let Some((start, c)) = chars.next() {
        let (tok_line, tok_col) = (line, column);
        match c {
            '\n' => {
                line += 1;
                column = 1;
                continue;
            }
            c if c.is_whitespace() => {}
            ';' => {
                let mut end = text.len();
                while let Some(&(i, ch)) = chars.peek() {
                    if ch == '\n' {
                        end = i;
                        break;
                    }
                    chars.next();
                }
                let comment = text[start + 1..end].trim().trim_start_matches(';').trim();
                if let Some((depth, idx, end_line)) = last {
                    if end_line == tok_line && depth < stack.len() && !comment.is_empty() {
                        let node = &mut stack[depth].items[idx];
                        node.comment = Some(match node.comment.take() {
                            Some(prev) => format!("{prev} {comment}"),
                            None => comment.to_string(),
                        });
                    }
                }
                column += text[start..end].chars().count();
                continue;
            }
            '(' => {
                stack.push(Frame {
                    items: Vec::new(),
                    line: tok_line,
                    column: tok_col,
                });
            }
            ')' => {
                if stack.len() == 1 {
                    return Err(PddlError::syntax(
                        tok_line,
                        tok_col,
                        ")",
                        "unbalanced closing parenthesis",
                    ));
                }
                let frame = stack.pop().expect("non-root frame");
                let depth = stack.len() - 1;
                let parent = stack.last_mut().expect("root frame");
                parent.items.push(SExpr {
                    node: Node::List(frame.items),
                    line: frame.line,
                    column: frame.column,
                    comment: None,
                });
                last = Some((depth, parent.items.len() - 1, tok_line));
            }
            _ => {
                let mut end = start + c.len_utf8();
                while let Some(&(i, ch)) = chars.peek() {
                    if ch.is_whitespace() || ch == '(' || ch == ')' || ch == ';' {
                        break;
                    }
                    end = i + ch.len_utf8();
                    chars.next();
                }
                let sym = &text[start..end];
                column += sym.chars().count() - 1;
                let depth = stack.len() - 1;
                let top = stack.last_mut().expect("root frame");
                top.items.push(SExpr {
                    node: Node::Symbol(sym.to_string()),
                    line: tok_line,
                    column: tok_col,
                    comment: None,
                });
                last = Some((depth, top.items.len() - 1, tok_line));
            }
        }
        column += 1;
    }

    if stack.len() > 1 {
        let open = stack.last().expect("open frame");
        return Err(PddlError::syntax(
            open.line,
            open.column,
            "(",
            "unbalanced opening parenthesis",
        ));
    }
    Ok(stack.pop().expect("root frame").items)
}

/// Reads exactly one expression, rejecting trailing content.
pub fn read_one(text: &str) -> Result<SExpr, PddlError> {
    let mut all = read_all(text)?;
    match all.len() {
        1 => Ok(all.remove(0)),
        0 => Err(PddlError::syntax(1, 1, "", "empty input")),
        _ => {
            let extra = &all[1];
            Err(extra.error("unexpected content after the expression"))
        }
    }
}

/// Finds the first parenthesis-balanced region of `text`, ignoring
/// surrounding prose. Returns the byte range.
pub fn find_balanced(text: &str) -> Option<(usize, usize)> {
    let start = text.find('(')?;
    let mut depth = 0usize;
    let mut in_comment = false;
    for (i, c) in text[start..].char_indices() {
        match c {
            '\n' => in_comment = false,
            _ if in_comment => {}
            ';' => in_comment = true,
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return Some((start, start + i + 1));
                }
            }
            _ => {}
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_lists_and_positions() {
        let exprs = read_all("(a (b c)\n  d)").unwrap();
        assert_eq!(exprs.len(), 1);
        let items = exprs[0].list().unwrap();
        assert_eq!(items[0].symbol(), Some("a"));
        assert_eq!(items[2].symbol(), Some("d"));
        assert_eq!((items[2].line, items[2].column), (2, 3));
    }

    #[test]
    fn trailing_comment_attaches_to_last_node_on_line() {
        let exprs = read_all("(p\n  (at ?x) ; true if x is here\n  ; dropped\n  (q))").unwrap();
        let items = exprs[0].list().unwrap();
        assert_eq!(items[1].comment.as_deref(), Some("true if x is here"));
        assert_eq!(items[2].comment, None);
    }

    #[test]
    fn unbalanced_reports_position() {
        match read_all("(a\n (b)").unwrap_err() {
            PddlError::Syntax { line, column, .. } => assert_eq!((line, column), (1, 1)),
            e => panic!("unexpected {e:?}"),
        }
        match read_all("(a))").unwrap_err() {
            PddlError::Syntax { column, token, .. } => {
                assert_eq!(column, 4);
                assert_eq!(token, ")");
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn balanced_region_inside_prose() {
        let text = "Sure! Here it is: (and (a) (b ;)\n)) and more";
        let (s, e) = find_balanced(text).unwrap();
        assert_eq!(&text[s..e], "(and (a) (b ;)\n))");
    }
}
