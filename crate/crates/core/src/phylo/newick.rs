//! Newick reading and writing.
//!
//! Branch lengths become node heights: a node sits at `max leaf depth −
//! depth`, so leaves of an ultrametric tree land at height zero. When a file
//! has no branch lengths at all every edge counts as 1; when only some edges
//! carry one, the rest count as 0. Internal node names (often support
//! values) are discarded.

use std::fmt::Write as _;
use std::path::Path;

use super::tree::PhyloTree;
use crate::error::{Error, Result};

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
}

struct Raw {
    label: Option<String>,
    length: Option<f64>,
    children: Vec<usize>,
}

impl<'a> Parser<'a> {
    fn fail<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::NewickParse {
            position: self.pos,
            message: message.into(),
        })
    }

    fn skip_blank(&mut self) -> Result<()> {
        loop {
            match self.text.get(self.pos) {
                Some(b) if b.is_ascii_whitespace() => self.pos += 1,
                Some(b'[') => {
                    let start = self.pos;
                    match self.text[start..].iter().position(|&b| b == b']') {
                        Some(end) => self.pos = start + end + 1,
                        None => return self.fail("unterminated comment"),
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn peek(&mut self) -> Result<Option<u8>> {
        self.skip_blank()?;
        Ok(self.text.get(self.pos).copied())
    }

    fn label(&mut self) -> Result<Option<String>> {
        if self.peek()? == Some(b'\'') {
            self.pos += 1;
            let mut out = Vec::new();
            loop {
                match self.text.get(self.pos) {
                    None => return self.fail("unterminated quoted label"),
                    Some(b'\'') if self.text.get(self.pos + 1) == Some(&b'\'') => {
                        out.push(b'\'');
                        self.pos += 2;
                    }
                    Some(b'\'') => {
                        self.pos += 1;
                        break;
                    }
                    Some(&b) => {
                        out.push(b);
                        self.pos += 1;
                    }
                }
            }
            return String::from_utf8(out)
                .map(Some)
                .or_else(|_| self.fail("label is not valid UTF-8"));
        }
        let start = self.pos;
        while let Some(&b) = self.text.get(self.pos) {
            if b"()[]':;,".contains(&b) || b.is_ascii_whitespace() {
                break;
            }
            self.pos += 1;
        }
        if start == self.pos {
            return Ok(None);
        }
        let raw =
            std::str::from_utf8(&self.text[start..self.pos]).or_else(|_| self.fail("label is not valid UTF-8"))?;
        Ok(Some(raw.replace('_', " ")))
    }

    fn length(&mut self) -> Result<Option<f64>> {
        if self.peek()? != Some(b':') {
            return Ok(None);
        }
        self.pos += 1;
        self.skip_blank()?;
        let start = self.pos;
        while let Some(&b) = self.text.get(self.pos) {
            if !(b.is_ascii_digit() || b"+-.eE".contains(&b)) {
                break;
            }
            self.pos += 1;
        }
        let token = std::str::from_utf8(&self.text[start..self.pos]).unwrap_or_default();
        match token.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Some(v)),
            _ => {
                self.pos = start;
                self.fail("expected a branch length")
            }
        }
    }

    fn subtree(&mut self, arena: &mut Vec<Raw>) -> Result<usize> {
        let id = arena.len();
        arena.push(Raw {
            label: None,
            length: None,
            children: Vec::new(),
        });
        if self.peek()? == Some(b'(') {
            let open = self.pos;
            self.pos += 1;
            let mut children = vec![self.subtree(arena)?];
            loop {
                match self.peek()? {
                    Some(b',') => {
                        self.pos += 1;
                        children.push(self.subtree(arena)?);
                    }
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    Some(_) => return self.fail("expected ',' or ')'"),
                    None => return self.fail("unbalanced parenthesis"),
                }
            }
            if children.len() < 2 {
                self.pos = open;
                return self.fail("internal node with a single child");
            }
            arena[id].children = children;
            self.label()?;
        } else {
            match self.label()? {
                Some(l) if !l.is_empty() => arena[id].label = Some(l),
                _ => return self.fail("expected a leaf label or '('"),
            }
        }
        arena[id].length = self.length()?;
        Ok(id)
    }
}

/// Parses a single `;`-terminated Newick tree.
pub fn parse_newick(text: &str) -> Result<PhyloTree> {
    let mut p = Parser {
        text: text.as_bytes(),
        pos: 0,
    };
    let mut arena = Vec::new();
    if p.peek()?.is_none() {
        return p.fail("empty input");
    }
    p.subtree(&mut arena)?;
    match p.peek()? {
        Some(b';') => p.pos += 1,
        Some(b')') => return p.fail("unbalanced parenthesis"),
        Some(_) => return p.fail("unexpected character"),
        None => return p.fail("missing ';'"),
    }
    if p.peek()?.is_some() {
        return p.fail("trailing characters after ';'");
    }

    let any_length = arena.iter().skip(1).any(|r| r.length.is_some());
    let edge = |r: &Raw| match (any_length, r.length) {
        (_, Some(v)) => v,
        (true, None) => 0.0,
        (false, None) => 1.0,
    };
    // Arena ids are preorder, so parents precede children.
    let mut depth = vec![0.0; arena.len()];
    for id in 0..arena.len() {
        for &c in &arena[id].children {
            depth[c] = depth[id] + edge(&arena[c]);
        }
    }
    let max_depth = (0..arena.len())
        .filter(|&i| arena[i].children.is_empty())
        .map(|i| depth[i])
        .fold(f64::NEG_INFINITY, f64::max);
    let parts = arena
        .into_iter()
        .zip(depth)
        .map(|(r, d)| (r.label, r.children, max_depth - d))
        .collect();
    PhyloTree::from_parts(parts)
}

pub fn read_newick(path: impl AsRef<Path>) -> Result<PhyloTree> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_newick(&text)
}

fn quote(label: &str) -> String {
    let plain = !label.is_empty()
        && label
            .bytes()
            .all(|b| !b"()[]':;,_".contains(&b) && !b.is_ascii_whitespace());
    if plain {
        label.to_owned()
    } else {
        format!("'{}'", label.replace('\'', "''"))
    }
}

/// Serializes a tree with branch lengths equal to parent height minus child
/// height, keeping the stored child order.
pub fn write_newick(t: &PhyloTree) -> String {
    fn emit(t: &PhyloTree, id: usize, out: &mut String) {
        let node = t.node(id);
        if node.is_leaf() {
            out.push_str(&quote(node.label.as_deref().unwrap_or_default()));
        } else {
            out.push('(');
            for (k, &c) in node.children.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                emit(t, c, out);
            }
            out.push(')');
        }
        if let Some(p) = node.parent {
            let _ = write!(out, ":{}", t.node(p).height - node.height);
        }
    }
    let mut out = String::new();
    emit(t, t.root(), &mut out);
    out.push(';');
    out
}
