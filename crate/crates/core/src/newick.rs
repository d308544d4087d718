//! Strict Newick reader and canonical writer for unrooted binary trees.
//!
//! Branch lengths and internal node labels are accepted and dropped. A
//! bifurcating top level is unrooted by suppressing the top vertex.

use thiserror::Error;

use crate::phylo::{PhyloTree, TreeBuilder, TreeError};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum NewickError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("duplicate leaf label {0:?}")]
    DuplicateLabel(String),
    #[error("vertex with {children} children is not binary after unrooting")]
    NonBinary { children: usize },
    #[error("tree needs at least 3 leaves, got {0}")]
    TooFewLeaves(usize),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

enum Node {
    Leaf(String),
    Inner(Vec<Node>),
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

const RESERVED: &[u8] = b"(),;:[]";

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, NewickError> {
        Err(NewickError::Syntax { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn label(&mut self) -> &'a str {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c.is_ascii_whitespace() || RESERVED.contains(&c) {
                break;
            }
            self.pos += 1;
        }
        // Only ASCII delimiters were skipped, so the slice stays valid UTF-8.
        std::str::from_utf8(&self.src[start..self.pos]).unwrap()
    }

    fn branch_length(&mut self) -> Result<(), NewickError> {
        if self.peek() == Some(b':') {
            self.pos += 1;
            let at = self.pos;
            let text = self.label();
            if text.parse::<f64>().is_err() {
                self.pos = at;
                return self.err(format!("invalid branch length {text:?}"));
            }
        }
        Ok(())
    }

    fn node(&mut self) -> Result<Node, NewickError> {
        match self.peek() {
            Some(b'[') => self.err("comments are not supported"),
            Some(b'(') => {
                self.pos += 1;
                let mut kids = vec![self.node()?];
                loop {
                    match self.peek() {
                        Some(b',') => {
                            self.pos += 1;
                            kids.push(self.node()?);
                        }
                        Some(b')') => {
                            self.pos += 1;
                            break;
                        }
                        Some(b'[') => return self.err("comments are not supported"),
                        Some(c) => return self.err(format!("expected ',' or ')', found {:?}", c as char)),
                        None => return self.err("unexpected end of input"),
                    }
                }
                // Internal node label (e.g. support value), discarded.
                self.label();
                self.branch_length()?;
                Ok(Node::Inner(kids))
            }
            _ => {
                let label = self.label();
                if label.is_empty() {
                    return match self.peek() {
                        Some(c) => self.err(format!("expected a leaf label, found {:?}", c as char)),
                        None => self.err("unexpected end of input"),
                    };
                }
                let label = label.to_string();
                self.branch_length()?;
                Ok(Node::Leaf(label))
            }
        }
    }

    fn document(&mut self) -> Result<Node, NewickError> {
        let root = self.node()?;
        match self.peek() {
            Some(b';') => self.pos += 1,
            Some(b'[') => return self.err("comments are not supported"),
            Some(c) => return self.err(format!("expected ';', found {:?}", c as char)),
            None => return self.err("missing terminating ';'"),
        }
        if self.peek().is_some() {
            return self.err("trailing characters after ';'");
        }
        Ok(root)
    }
}

/// Parses one tree.
pub fn parse(text: &str) -> Result<PhyloTree, NewickError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let root = p.document()?;

    let mut labels = Vec::new();
    collect_labels(&root, &mut labels);
    let mut sorted = labels.clone();
    sorted.sort();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(NewickError::DuplicateLabel(w[0].to_string()));
    }
    if labels.len() < 3 {
        return Err(NewickError::TooFewLeaves(labels.len()));
    }

    let mut b = TreeBuilder::new();
    match root {
        Node::Leaf(_) => unreachable!("a single leaf has fewer than 3 leaves"),
        Node::Inner(kids) => match kids.len() {
            3 => {
                let top = b.add_internal();
                for k in &kids {
                    let v = emit(&mut b, k)?;
                    b.add_edge(top, v);
                }
            }
            2 => {
                let a = emit(&mut b, &kids[0])?;
                let c = emit(&mut b, &kids[1])?;
                b.add_edge(a, c);
            }
            n => return Err(NewickError::NonBinary { children: n }),
        },
    }
    Ok(b.build()?)
}

fn collect_labels<'n>(node: &'n Node, out: &mut Vec<&'n str>) {
    match node {
        Node::Leaf(l) => out.push(l),
        Node::Inner(kids) => kids.iter().for_each(|k| collect_labels(k, out)),
    }
}

fn emit(b: &mut TreeBuilder, node: &Node) -> Result<usize, NewickError> {
    match node {
        Node::Leaf(l) => Ok(b.add_leaf(l.clone())),
        Node::Inner(kids) if kids.len() == 2 => {
            let v = b.add_internal();
            for k in kids {
                let c = emit(b, k)?;
                b.add_edge(v, c);
            }
            Ok(v)
        }
        Node::Inner(kids) => Err(NewickError::NonBinary { children: kids.len() }),
    }
}

/// Canonical Newick: trifurcation at the neighbour of the smallest label,
/// groups ordered by their smallest label.
pub fn serialize(tree: &PhyloTree) -> String {
    tree.to_canonical_newick()
}

/// Parses every non-empty line of `text` as a tree.
pub fn parse_many(text: &str) -> Result<Vec<PhyloTree>, NewickError> {
    text.lines().filter(|l| !l.trim().is_empty()).map(parse).collect()
}
