//! Structure-based traversal: bracket markers around every subtree.
//!
//! Each node renders a token `X`, which is the label, or `label_value` when
//! the node carries a value. Leaves emit `(X) X`; internal nodes emit
//! `(X`, their children, then `)X`. Tokens are joined by single spaces.
//!
//! Values are escaped so that `X` never contains raw whitespace or brackets:
//! `\\`, `\(`, `\)`, `\s` (space), `\t`, `\n`, `\r`, `\u{..}` for other
//! whitespace and `\_` for a literal underscore inside an unknown label.
//! Splitting `X` back into label and value needs the label vocabulary: the
//! longest known label that `X` equals or extends with `_` wins. When that
//! rule would misread a node, the encoder inserts the empty escape `\&`
//! right after the separator.

use std::collections::BTreeSet;
use std::sync::LazyLock;

use thiserror::Error;

use crate::augment::{AugNode, AugTree, RelabelRuleSet};
use crate::syntax::Grammar;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SbtError {
    #[error("empty sequence")]
    Empty,
    #[error("token {index}: unexpected token {token:?}")]
    UnexpectedToken { index: usize, token: String },
    #[error("token {index}: leaf {open:?} is not followed by its repeat")]
    MissingRepeat { index: usize, open: String },
    #[error("token {index}: close marker without a matching open")]
    Unbalanced { index: usize },
    #[error("token {index}: open {open:?} closed by {close:?}")]
    Mismatch {
        index: usize,
        open: String,
        close: String,
    },
    #[error("unclosed marker {open:?} at end of input")]
    Unclosed { open: String },
    #[error("token {index}: a second root starts here")]
    MultipleRoots { index: usize },
    #[error("token {index}: {reason}")]
    Escape { index: usize, reason: String },
}

/// Label-aware SBT encoder/decoder.
#[derive(Debug, Clone)]
pub struct SbtCodec {
    vocabulary: BTreeSet<String>,
}

static PYTHON_CODEC: LazyLock<SbtCodec> = LazyLock::new(|| {
    let grammar = Grammar::python();
    let default_rules = RelabelRuleSet::default();
    let variable_rules = RelabelRuleSet::with_variable_targets();
    let labels = grammar
        .node_kinds()
        .into_iter()
        .map(|(kind, _)| kind.to_string())
        .chain(default_rules.labels().map(String::from))
        .chain(variable_rules.labels().map(String::from));
    SbtCodec::new(labels)
});

impl SbtCodec {
    /// Labels containing whitespace, brackets or backslashes are left out of
    /// the vocabulary; such labels are always written fully escaped.
    pub fn new(labels: impl IntoIterator<Item = String>) -> Self {
        let vocabulary = labels
            .into_iter()
            .filter(|l| {
                !l.is_empty()
                    && !l
                        .chars()
                        .any(|c| c.is_whitespace() || matches!(c, '(' | ')' | '\\'))
            })
            .collect();
        SbtCodec { vocabulary }
    }

    /// Codec for the Python grammar's node kinds plus the built-in relabels.
    pub fn python() -> &'static SbtCodec {
        &PYTHON_CODEC
    }

    pub fn with_labels(&self, labels: impl IntoIterator<Item = String>) -> Self {
        SbtCodec::new(self.vocabulary.iter().cloned().chain(labels))
    }

    pub fn knows(&self, label: &str) -> bool {
        self.vocabulary.contains(label)
    }

    /// The joined `X` token for one node.
    pub fn encode_node(&self, label: &str, value: Option<&str>) -> String {
        let head = if self.knows(label) {
            label.to_string()
        } else {
            escape_label(label)
        };
        let Some(value) = value else {
            return head;
        };
        let token = format!("{head}_{}", escape_value(value));
        match self.decode_node(&token) {
            Ok((l, Some(v))) if l == label && v == value => token,
            // A vocabulary label would swallow part of the value.
            _ => format!("{head}_\\&{}", escape_value(value)),
        }
    }

    pub fn decode_node(&self, token: &str) -> Result<(String, Option<String>), String> {
        if self.knows(token) {
            return Ok((token.to_string(), None));
        }
        // Longest known label followed by the separator.
        let known = token
            .bytes()
            .enumerate()
            .filter(|&(_, b)| b == b'_')
            .map(|(i, _)| i)
            .rev()
            .find(|&i| self.knows(&token[..i]));
        if let Some(at) = known {
            return Ok((token[..at].to_string(), Some(unescape(&token[at + 1..])?)));
        }
        match find_unescaped(token, b'_') {
            Some(at) => Ok((unescape(&token[..at])?, Some(unescape(&token[at + 1..])?))),
            None => Ok((unescape(token)?, None)),
        }
    }

    pub fn encode(&self, tree: &AugTree) -> String {
        let mut tokens = Vec::with_capacity(2 * tree.node_count);
        self.encode_into(&tree.root, &mut tokens);
        tokens.join(" ")
    }

    fn encode_into(&self, node: &AugNode, tokens: &mut Vec<String>) {
        let x = self.encode_node(&node.label, node.value.as_deref());
        if node.children.is_empty() {
            tokens.push(format!("({x})"));
            tokens.push(x);
        } else {
            tokens.push(format!("({x}"));
            for child in &node.children {
                self.encode_into(child, tokens);
            }
            tokens.push(format!("){x}"));
        }
    }

    pub fn decode(&self, text: &str) -> Result<AugTree, SbtError> {
        if text.is_empty() {
            return Err(SbtError::Empty);
        }
        let tokens: Vec<&str> = text.split(' ').collect();
        let mut stack: Vec<(&str, AugNode)> = Vec::new();
        let mut root: Option<AugNode> = None;
        let mut index = 0;

        while index < tokens.len() {
            let token = tokens[index];
            let to_node = |x: &str| {
                self.decode_node(x)
                    .map(|(label, value)| AugNode {
                        label,
                        value,
                        children: Vec::new(),
                    })
                    .map_err(|reason| SbtError::Escape { index, reason })
            };
            if let Some(body) = token.strip_prefix('(') {
                if ends_with_unescaped(body, b')') {
                    let x = &body[..body.len() - 1];
                    if tokens.get(index + 1) != Some(&x) {
                        return Err(SbtError::MissingRepeat {
                            index,
                            open: x.to_string(),
                        });
                    }
                    if x.is_empty() {
                        return Err(SbtError::UnexpectedToken {
                            index,
                            token: token.to_string(),
                        });
                    }
                    let node = to_node(x)?;
                    attach(node, &mut stack, &mut root, index)?;
                    index += 2;
                    continue;
                }
                if body.is_empty() {
                    return Err(SbtError::UnexpectedToken {
                        index,
                        token: token.to_string(),
                    });
                }
                if stack.is_empty() && root.is_some() {
                    return Err(SbtError::MultipleRoots { index });
                }
                stack.push((body, to_node(body)?));
            } else if let Some(x) = token.strip_prefix(')') {
                let (open, node) = stack.pop().ok_or(SbtError::Unbalanced { index })?;
                if open != x {
                    return Err(SbtError::Mismatch {
                        index,
                        open: open.to_string(),
                        close: x.to_string(),
                    });
                }
                attach(node, &mut stack, &mut root, index)?;
            } else {
                return Err(SbtError::UnexpectedToken {
                    index,
                    token: token.to_string(),
                });
            }
            index += 1;
        }
        if let Some((open, _)) = stack.last() {
            return Err(SbtError::Unclosed {
                open: open.to_string(),
            });
        }
        root.map(AugTree::from_root).ok_or(SbtError::Empty)
    }
}

fn attach(
    node: AugNode,
    stack: &mut [(&str, AugNode)],
    root: &mut Option<AugNode>,
    index: usize,
) -> Result<(), SbtError> {
    match stack.last_mut() {
        Some((_, parent)) => parent.children.push(node),
        None if root.is_none() => *root = Some(node),
        None => return Err(SbtError::MultipleRoots { index }),
    }
    Ok(())
}

fn escape_value(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for c in value.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '(' => out.push_str("\\("),
            ')' => out.push_str("\\)"),
            ' ' => out.push_str("\\s"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c if c.is_whitespace() => out.push_str(&format!("\\u{{{:x}}}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

fn escape_label(label: &str) -> String {
    let mut out = String::with_capacity(label.len());
    for c in label.chars() {
        if c == '_' {
            out.push_str("\\_");
        } else {
            out.push_str(&escape_value(c.encode_utf8(&mut [0; 4])));
        }
    }
    out
}

fn unescape(text: &str) -> Result<String, String> {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('(') => out.push('('),
            Some(')') => out.push(')'),
            Some('_') => out.push('_'),
            Some('&') => {}
            Some('s') => out.push(' '),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('u') => {
                if chars.next() != Some('{') {
                    return Err("malformed \\u escape".into());
                }
                let hex: String = chars.by_ref().take_while(|&c| c != '}').collect();
                let c = u32::from_str_radix(&hex, 16)
                    .ok()
                    .and_then(char::from_u32)
                    .ok_or_else(|| format!("bad code point \\u{{{hex}}}"))?;
                out.push(c);
            }
            Some(other) => return Err(format!("unknown escape \\{other}")),
            None => return Err("dangling escape".into()),
        }
    }
    Ok(out)
}

fn find_unescaped(text: &str, target: u8) -> Option<usize> {
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b if b == target => return Some(i),
            _ => i += 1,
        }
    }
    None
}

fn ends_with_unescaped(text: &str, target: u8) -> bool {
    let bytes = text.as_bytes();
    if bytes.last() != Some(&target) {
        return false;
    }
    let backslashes = bytes[..bytes.len() - 1]
        .iter()
        .rev()
        .take_while(|&&b| b == b'\\')
        .count();
    backslashes % 2 == 0
}

pub fn sbt_text(tree: &AugTree) -> String {
    SbtCodec::python().encode(tree)
}

pub fn parse_sbt(text: &str) -> Result<AugTree, SbtError> {
    SbtCodec::python().decode(text)
}
