//! Grammar-driven parsing into a language-neutral concrete syntax tree.
//!
//! [`RawTree`] mirrors what the Tree-sitter parser produces: every node,
//! named or not, with its byte span and the grammar field it fills in its
//! parent. Trees are immutable once built and can be shared across threads.
//! A [`SyntaxParser`] is stateful; use one per worker.

use std::cell::RefCell;
use std::fmt::Write as _;
use std::sync::{Arc, LazyLock};

use thiserror::Error;

/// Pinned grammar release. Node counts in golden tests depend on it.
pub const GRAMMAR_VERSION: &str = "tree-sitter-python 0.25.0";

#[derive(Debug, Error)]
pub enum SyntaxError {
    #[error("failed to initialise grammar {grammar}: {reason}")]
    Grammar { grammar: String, reason: String },
    #[error("parser returned no tree")]
    NoTree,
    #[error("input is not valid UTF-8: {0}")]
    NotText(#[from] std::str::Utf8Error),
}

/// A grammar the parser layer can be instantiated with.
#[derive(Clone)]
pub struct Grammar {
    name: &'static str,
    version: &'static str,
    language: tree_sitter::Language,
    names: &'static NameTables,
}

/// Kind and field names with `'static` lifetime, indexed by grammar id.
struct NameTables {
    kinds: Vec<&'static str>,
    fields: Vec<&'static str>,
}

impl NameTables {
    fn build(language: &tree_sitter::Language) -> Self {
        let leak = |name: Option<&str>| -> &'static str {
            Box::leak(name.unwrap_or_default().to_string().into_boxed_str())
        };
        NameTables {
            kinds: (0..language.node_kind_count() as u16)
                .map(|id| leak(language.node_kind_for_id(id)))
                .collect(),
            // field ids start at 1
            fields: (0..=language.field_count() as u16)
                .map(|id| leak(language.field_name_for_id(id)))
                .collect(),
        }
    }
}

static PYTHON_NAMES: LazyLock<NameTables> =
    LazyLock::new(|| NameTables::build(&tree_sitter_python::LANGUAGE.into()));

impl Grammar {
    pub fn python() -> Self {
        Grammar {
            name: "python",
            version: GRAMMAR_VERSION,
            language: tree_sitter_python::LANGUAGE.into(),
            names: &PYTHON_NAMES,
        }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn version(&self) -> &'static str {
        self.version
    }

    /// Every node kind the grammar can emit, with its named flag.
    pub fn node_kinds(&self) -> Vec<(&'static str, bool)> {
        (0..self.names.kinds.len() as u16)
            .filter(|&id| self.language.node_kind_is_visible(id))
            .map(|id| {
                (
                    self.names.kinds[id as usize],
                    self.language.node_kind_is_named(id),
                )
            })
            .collect()
    }
}

impl std::fmt::Debug for Grammar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Grammar")
            .field("name", &self.name)
            .field("version", &self.version)
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawNode {
    pub kind: &'static str,
    pub named: bool,
    /// Grammar field this node fills in its parent, if any.
    pub field: Option<&'static str>,
    pub span: Span,
    /// Set on `ERROR` nodes and on nodes the parser inserted as missing.
    pub error: bool,
    pub children: Vec<RawNode>,
}

impl RawNode {
    pub fn text<'s>(&self, source: &'s str) -> &'s str {
        &source[self.span.start..self.span.end]
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn named_children(&self) -> impl Iterator<Item = &RawNode> {
        self.children.iter().filter(|c| c.named)
    }

    /// Preorder iterator over this node and all of its descendants.
    pub fn preorder(&self) -> Preorder<'_> {
        Preorder { stack: vec![self] }
    }
}

pub struct Preorder<'a> {
    stack: Vec<&'a RawNode>,
}

impl<'a> Iterator for Preorder<'a> {
    type Item = &'a RawNode;

    fn next(&mut self) -> Option<Self::Item> {
        let node = self.stack.pop()?;
        self.stack.extend(node.children.iter().rev());
        Some(node)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawTree {
    pub root: RawNode,
    pub source: Arc<str>,
    pub has_errors: bool,
    pub grammar_version: &'static str,
}

impl RawTree {
    pub fn text(&self, node: &RawNode) -> &str {
        node.text(&self.source)
    }

    /// First error or missing node in preorder.
    pub fn first_error(&self) -> Option<&RawNode> {
        self.root.preorder().find(|n| n.error)
    }

    /// Indented `kind [start..end] 'text'` dump, one node per line.
    pub fn debug_dump(&self) -> String {
        let mut out = String::new();
        dump_node(&self.root, &self.source, 0, &mut out);
        out
    }
}

fn dump_node(node: &RawNode, source: &str, depth: usize, out: &mut String) {
    let text = node.text(source).escape_debug().to_string();
    let _ = writeln!(
        out,
        "{:indent$}{} [{}..{}] '{}'",
        "",
        node.kind,
        node.span.start,
        node.span.end,
        text,
        indent = depth * 2
    );
    for child in &node.children {
        dump_node(child, source, depth + 1, out);
    }
}

/// Total node count, root inclusive, named and unnamed.
pub fn count_nodes(tree: &RawTree) -> usize {
    count_subtree(&tree.root)
}

pub fn count_subtree(node: &RawNode) -> usize {
    1 + node.children.iter().map(count_subtree).sum::<usize>()
}

pub fn count_named(node: &RawNode) -> usize {
    node.preorder().filter(|n| n.named).count()
}

/// Stateful parser bound to one grammar. Not meant to be shared between
/// threads; create one per worker.
pub struct SyntaxParser {
    grammar: Grammar,
    parser: tree_sitter::Parser,
}

impl SyntaxParser {
    pub fn new(grammar: Grammar) -> Result<Self, SyntaxError> {
        let mut parser = tree_sitter::Parser::new();
        parser
            .set_language(&grammar.language)
            .map_err(|e| SyntaxError::Grammar {
                grammar: grammar.name.to_string(),
                reason: e.to_string(),
            })?;
        Ok(SyntaxParser { grammar, parser })
    }

    pub fn python() -> Result<Self, SyntaxError> {
        Self::new(Grammar::python())
    }

    pub fn grammar(&self) -> &Grammar {
        &self.grammar
    }

    pub fn parse(&mut self, code: &str) -> Result<RawTree, SyntaxError> {
        let tree = self.parser.parse(code, None).ok_or(SyntaxError::NoTree)?;
        let root = tree.root_node();
        Ok(RawTree {
            has_errors: root.has_error(),
            root: convert(root, None, self.grammar.names),
            source: Arc::from(code),
            grammar_version: self.grammar.version,
        })
    }

    pub fn parse_bytes(&mut self, code: &[u8]) -> Result<RawTree, SyntaxError> {
        self.parse(std::str::from_utf8(code)?)
    }
}

fn convert(
    node: tree_sitter::Node<'_>,
    field: Option<&'static str>,
    names: &'static NameTables,
) -> RawNode {
    let mut children = Vec::with_capacity(node.child_count() as usize);
    let mut cursor = node.walk();
    if cursor.goto_first_child() {
        loop {
            let field = cursor
                .field_id()
                .and_then(|id| names.fields.get(id.get() as usize).copied());
            children.push(convert(cursor.node(), field, names));
            if !cursor.goto_next_sibling() {
                break;
            }
        }
    }
    RawNode {
        kind: names
            .kinds
            .get(node.kind_id() as usize)
            .copied()
            .unwrap_or("ERROR"),
        named: node.is_named(),
        field,
        span: Span {
            start: node.start_byte(),
            end: node.end_byte(),
        },
        error: node.is_error() || node.is_missing(),
        children,
    }
}

thread_local! {
    static PYTHON_PARSER: RefCell<Option<SyntaxParser>> = const { RefCell::new(None) };
}

/// Parse Python source with a per-thread parser instance.
pub fn parse_source(code: &str) -> Result<RawTree, SyntaxError> {
    PYTHON_PARSER.with(|cell| {
        let mut slot = cell.borrow_mut();
        if slot.is_none() {
            *slot = Some(SyntaxParser::python()?);
        }
        slot.as_mut().expect("parser initialised above").parse(code)
    })
}
