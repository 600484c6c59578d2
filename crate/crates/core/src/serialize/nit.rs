//! Node-index traversal: one fixed-field record per node in DFS preorder.
//!
//! Wire format:
//!
//! ```text
//! sequence = record *( "; " record )
//! record   = id " " label " [" [ id *( "," id ) ] "]" [ " " value ]
//! ```
//!
//! `id` is the record's 0-based preorder position. Labels and values escape
//! `\` as `\\`, `;` as `\;`, newline as `\n` and carriage return as `\r`.

use std::fmt;

use thiserror::Error;

use crate::augment::{AugNode, AugTree};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NitRecord {
    pub id: usize,
    pub label: String,
    pub children: Vec<usize>,
    pub value: Option<String>,
}

impl fmt::Display for NitRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} [", self.id, escape(&self.label))?;
        for (i, child) in self.children.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{child}")?;
        }
        f.write_str("]")?;
        if let Some(value) = &self.value {
            write!(f, " {}", escape(value))?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NitError {
    #[error("empty sequence")]
    Empty,
    #[error("record {record}: {reason}")]
    Malformed { record: usize, reason: String },
    #[error("record {record}: id {found} does not match its position")]
    IdMismatch { record: usize, found: usize },
    #[error("record {record}: child id {child} does not exist")]
    DanglingChild { record: usize, child: usize },
    #[error(
        "record {record}: child id {child} breaks preorder numbering (cycle or misordered child)"
    )]
    NotPreorder { record: usize, child: usize },
    #[error("record {record}: not reachable from the root")]
    Unreachable { record: usize },
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            ';' => out.push_str("\\;"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
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
            Some(';') => out.push(';'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some(other) => return Err(format!("unknown escape \\{other}")),
            None => return Err("dangling escape".into()),
        }
    }
    Ok(out)
}

/// Records of `tree` in DFS preorder.
pub fn nit_records(tree: &AugTree) -> Vec<NitRecord> {
    let mut records: Vec<NitRecord> = Vec::with_capacity(tree.node_count);
    let mut stack: Vec<(&AugNode, Option<usize>)> = vec![(&tree.root, None)];
    while let Some((node, parent)) = stack.pop() {
        let id = records.len();
        if let Some(parent) = parent {
            records[parent].children.push(id);
        }
        records.push(NitRecord {
            id,
            label: node.label.clone(),
            children: Vec::with_capacity(node.children.len()),
            value: node.value.clone(),
        });
        stack.extend(node.children.iter().rev().map(|c| (c, Some(id))));
    }
    records
}

pub fn nit_text(tree: &AugTree) -> String {
    nit_records(tree)
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Split on unescaped `;`, consuming the single space that follows it.
fn split_records(text: &str) -> Result<Vec<&str>, NitError> {
    let bytes = text.as_bytes();
    let mut records = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b';' => {
                records.push(&text[start..i]);
                if bytes.get(i + 1) != Some(&b' ') {
                    return Err(NitError::Malformed {
                        record: records.len() - 1,
                        reason: "separator must be \"; \"".into(),
                    });
                }
                i += 2;
                start = i;
            }
            _ => i += 1,
        }
    }
    records.push(&text[start.min(text.len())..]);
    Ok(records)
}

fn parse_record(index: usize, raw: &str) -> Result<NitRecord, NitError> {
    let bad = |reason: &str| NitError::Malformed {
        record: index,
        reason: reason.to_string(),
    };
    let (id, rest) = raw.split_once(' ').ok_or_else(|| bad("missing label"))?;
    let id: usize = id
        .parse()
        .map_err(|_| bad("id is not a non-negative integer"))?;
    let (label, rest) = rest
        .split_once(' ')
        .ok_or_else(|| bad("missing child list"))?;
    if label.is_empty() {
        return Err(bad("empty label"));
    }
    let rest = rest
        .strip_prefix('[')
        .ok_or_else(|| bad("child list must start with '['"))?;
    let (list, rest) = rest
        .split_once(']')
        .ok_or_else(|| bad("unterminated child list"))?;
    let children = if list.is_empty() {
        Vec::new()
    } else {
        list.split(',')
            .map(|c| c.parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| bad("child ids must be non-negative integers"))?
    };
    let value = match rest {
        "" => None,
        _ => {
            let value = rest
                .strip_prefix(' ')
                .ok_or_else(|| bad("value must follow the child list after one space"))?;
            Some(unescape(value).map_err(|e| bad(&e))?)
        }
    };
    Ok(NitRecord {
        id,
        label: unescape(label).map_err(|e| bad(&e))?,
        children,
        value,
    })
}

pub fn parse_nit_records(text: &str) -> Result<Vec<NitRecord>, NitError> {
    if text.is_empty() {
        return Err(NitError::Empty);
    }
    let records = split_records(text)?
        .into_iter()
        .enumerate()
        .map(|(i, raw)| parse_record(i, raw))
        .collect::<Result<Vec<_>, _>>()?;

    let n = records.len();
    for (index, record) in records.iter().enumerate() {
        if record.id != index {
            return Err(NitError::IdMismatch {
                record: index,
                found: record.id,
            });
        }
    }
    for (index, record) in records.iter().enumerate() {
        for &child in &record.children {
            if child <= index {
                return Err(NitError::NotPreorder {
                    record: index,
                    child,
                });
            }
            if child >= n {
                return Err(NitError::DanglingChild {
                    record: index,
                    child,
                });
            }
        }
    }

    // Child lists must reproduce the preorder numbering exactly.
    let mut next = 0;
    let mut stack = vec![(0usize, 0usize)];
    while let Some((index, parent)) = stack.pop() {
        if index != next {
            return Err(NitError::NotPreorder {
                record: parent,
                child: index,
            });
        }
        next += 1;
        stack.extend(records[index].children.iter().rev().map(|&c| (c, index)));
    }
    if next < n {
        return Err(NitError::Unreachable { record: next });
    }
    Ok(records)
}

pub fn parse_nit(text: &str) -> Result<AugTree, NitError> {
    let records = parse_nit_records(text)?;
    Ok(AugTree::from_root(build(&records, 0)))
}

fn build(records: &[NitRecord], index: usize) -> AugNode {
    let record = &records[index];
    AugNode {
        label: record.label.clone(),
        value: record.value.clone(),
        children: record.children.iter().map(|&c| build(records, c)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(label: &str, value: Option<&str>, children: Vec<AugNode>) -> AugNode {
        AugNode {
            label: label.into(),
            value: value.map(String::from),
            children,
        }
    }

    #[test]
    fn single_node() {
        let tree = AugTree::from_root(AugNode::leaf("module", None));
        assert_eq!(nit_text(&tree), "0 module []");
    }

    #[test]
    fn binary_operator_under_known_ids() {
        // module -> expression_statement -> binary_operator(+) -> a, b
        let tree = AugTree::from_root(node(
            "module",
            None,
            vec![node(
                "expression_statement",
                None,
                vec![node(
                    "binary_operator",
                    Some("+"),
                    vec![
                        AugNode::leaf("identifier", Some("a")),
                        AugNode::leaf("identifier", Some("b")),
                    ],
                )],
            )],
        ));
        assert_eq!(
            nit_text(&tree),
            "0 module [1]; 1 expression_statement [2]; 2 binary_operator [3,4] +; \
             3 identifier [] a; 4 identifier [] b"
        );
    }

    #[test]
    fn escapes_round_trip() {
        let tree = AugTree::from_root(node(
            "module",
            None,
            vec![
                AugNode::leaf("string", Some("'a; b\\n'\nx")),
                AugNode::leaf("a;b", Some("")),
                AugNode::leaf("c", Some(" lead and trail ")),
            ],
        ));
        let text = nit_text(&tree);
        assert!(!text.contains('\n'));
        assert_eq!(
            text,
            "0 module [1,2,3]; 1 string [] 'a\\; b\\\\n'\\nx; 2 a\\;b [] ; 3 c []  lead and trail "
        );
        assert_eq!(parse_nit(&text).unwrap().root, tree.root);
    }

    #[test]
    fn dangling_child() {
        assert_eq!(
            parse_nit("0 module [1]"),
            Err(NitError::DanglingChild {
                record: 0,
                child: 1
            })
        );
    }

    #[test]
    fn cycle_is_rejected() {
        assert_eq!(
            parse_nit("0 module [1]; 1 block [0]"),
            Err(NitError::NotPreorder {
                record: 1,
                child: 0
            })
        );
    }

    #[test]
    fn id_mismatch() {
        assert_eq!(
            parse_nit("0 module [2]; 2 block []"),
            Err(NitError::IdMismatch {
                record: 1,
                found: 2
            })
        );
    }

    #[test]
    fn misordered_children_are_rejected() {
        // 0 -> [1, 2], 1 -> [3]: node 3 would have to be numbered 2.
        assert!(matches!(
            parse_nit("0 m [1,2]; 1 a [3]; 2 b []; 3 c []"),
            Err(NitError::NotPreorder { .. })
        ));
        // shared child
        assert!(matches!(
            parse_nit("0 m [1,2]; 1 a [2]; 2 b []"),
            Err(NitError::NotPreorder { .. })
        ));
        // orphan
        assert!(matches!(
            parse_nit("0 m [1]; 1 a []; 2 b []"),
            Err(NitError::Unreachable { record: 2 })
        ));
    }

    #[test]
    fn malformed_records() {
        for (text, record) in [
            ("0 module", 0),
            ("x module []", 0),
            ("0 module [a]", 0),
            ("0 module [1];1 a []", 0),
            ("0 module [1]; 1 a [] \\q", 1),
            ("0 module []x", 0),
        ] {
            match parse_nit(text) {
                Err(NitError::Malformed { record: r, .. }) => assert_eq!(r, record, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
        assert_eq!(parse_nit(""), Err(NitError::Empty));
    }

    #[test]
    fn nested_preorder_accepted() {
        let text = "0 m [1,4]; 1 a [2,3]; 2 b []; 3 c []; 4 d [5]; 5 e []";
        let tree = parse_nit(text).unwrap();
        assert_eq!(tree.node_count, 6);
        assert_eq!(nit_text(&tree), text);
    }
}
