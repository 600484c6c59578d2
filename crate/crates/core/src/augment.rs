//! Lexical injection and structural normalization of raw syntax trees.
//!
//! Injection copies identifier names and literal text into terminal nodes and
//! applies contextual relabels (`identifier` in a function name slot becomes
//! `function_name`). Normalization drops unnamed tokens except a configured
//! whitelist and folds operator tokens into their expression node's value.
//! Both stages operate on [`LexTree`], which keeps the original kind, field
//! and named flag of every node so the stages can run in either order.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::syntax::{count_nodes, RawNode, RawTree, Span};

/// Literal values longer than this many characters are truncated.
pub const MAX_LITERAL_CHARS: usize = 64;
pub const TRUNCATION_MARKER: char = '…';

/// Leaf kinds whose source text becomes the node value.
const LEXICAL_LEAVES: &[&str] = &["identifier", "integer", "float"];
/// Kinds whose whole subtree collapses into a single valued leaf.
const COLLAPSED_LITERALS: &[&str] = &["string", "comment"];

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("tree contains a syntax error at bytes {}..{}", .0.start, .0.end)]
    ErrorTree(Span),
}

#[derive(Debug, Error)]
#[error("rule file line {line}: {reason}")]
pub struct RuleParseError {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Error)]
pub enum RuleFileError {
    #[error("cannot read rule file: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Parse(#[from] RuleParseError),
}

/// Which child of the context node a relabel rule addresses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Slot {
    /// Grammar field name, e.g. `name` or `left`.
    Field(String),
    /// Index among the parent's named children.
    Position(usize),
    Any,
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Field(name) => f.write_str(name),
            Slot::Position(i) => write!(f, "#{i}"),
            Slot::Any => f.write_str("*"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelabelRule {
    pub context: String,
    pub slot: Slot,
    pub original: String,
    pub label: String,
}

impl RelabelRule {
    pub fn new(context: &str, slot: Slot, original: &str, label: &str) -> Self {
        RelabelRule {
            context: context.to_string(),
            slot,
            original: original.to_string(),
            label: label.to_string(),
        }
    }

    fn matches(&self, parent_kind: &str, node: &LexNode, named_index: Option<usize>) -> bool {
        if self.context != parent_kind || self.original != node.kind {
            return false;
        }
        match &self.slot {
            Slot::Any => true,
            Slot::Field(name) => node.field.as_deref() == Some(name.as_str()),
            Slot::Position(i) => named_index == Some(*i),
        }
    }
}

/// Relabel rules, the retained-token whitelist and the operator-folding
/// parents. Rules are tried in order and the first match wins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelabelRuleSet {
    pub relabels: Vec<RelabelRule>,
    /// `(context kind, token kind)` pairs of unnamed tokens kept as nodes.
    pub retained: Vec<(String, String)>,
    /// Node kinds whose unnamed operator tokens are folded into their value.
    pub fold_parents: BTreeSet<String>,
}

impl Default for RelabelRuleSet {
    fn default() -> Self {
        RelabelRuleSet {
            relabels: vec![RelabelRule::new(
                "function_definition",
                Slot::Field("name".into()),
                "identifier",
                "function_name",
            )],
            retained: vec![("slice".into(), ":".into())],
            fold_parents: [
                "binary_operator",
                "unary_operator",
                "comparison_operator",
                "boolean_operator",
                "not_operator",
                "augmented_assignment",
            ]
            .into_iter()
            .map(String::from)
            .collect(),
        }
    }
}

impl RelabelRuleSet {
    /// Default rules plus `variable` for identifiers in assignment targets.
    pub fn with_variable_targets() -> Self {
        let mut rules = Self::default();
        for context in ["assignment", "augmented_assignment"] {
            rules.relabels.push(RelabelRule::new(
                context,
                Slot::Field("left".into()),
                "identifier",
                "variable",
            ));
        }
        rules
    }

    /// Labels introduced by relabel rules.
    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.relabels.iter().map(|r| r.label.as_str())
    }

    pub fn is_retained(&self, context: &str, token: &str) -> bool {
        self.retained
            .iter()
            .any(|(c, t)| c == context && t == token)
    }

    fn relabel_for(
        &self,
        parent_kind: &str,
        node: &LexNode,
        named_index: Option<usize>,
    ) -> Option<&str> {
        self.relabels
            .iter()
            .find(|r| r.matches(parent_kind, node, named_index))
            .map(|r| r.label.as_str())
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, RuleFileError> {
        let text = std::fs::read_to_string(path)?;
        Ok(Self::parse(&text)?)
    }

    /// Parse the plain-text rule format.
    ///
    /// ```text
    /// # comment
    /// [relabel]
    /// function_definition, name, identifier, function_name
    /// [whitelist]
    /// slice, :
    /// [fold]
    /// binary_operator
    /// ```
    ///
    /// The slot column takes a field name, `#n` for the n-th named child, or
    /// `*`. Sections present in the text replace the corresponding defaults;
    /// absent sections keep them.
    pub fn parse(text: &str) -> Result<Self, RuleParseError> {
        #[derive(Clone, Copy, PartialEq)]
        enum Section {
            Relabel,
            Whitelist,
            Fold,
        }

        let mut rules = Self::default();
        let mut section = None;
        let mut seen = BTreeSet::new();

        for (i, raw_line) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |reason: String| RuleParseError {
                line: line_no,
                reason,
            };
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let next = match name.trim() {
                    "relabel" => Section::Relabel,
                    "whitelist" => Section::Whitelist,
                    "fold" => Section::Fold,
                    other => return Err(err(format!("unknown section [{other}]"))),
                };
                if seen.insert(name.trim().to_string()) {
                    match next {
                        Section::Relabel => rules.relabels.clear(),
                        Section::Whitelist => rules.retained.clear(),
                        Section::Fold => rules.fold_parents.clear(),
                    }
                }
                section = Some(next);
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.iter().any(|c| c.is_empty()) {
                return Err(err("empty column".into()));
            }
            match section {
                None => return Err(err("rule outside of a section".into())),
                Some(Section::Relabel) => {
                    let [context, slot, original, label] = cols[..] else {
                        return Err(err(format!("expected 4 columns, found {}", cols.len())));
                    };
                    if label.chars().any(char::is_whitespace) {
                        return Err(err("label contains whitespace".into()));
                    }
                    let slot = if slot == "*" {
                        Slot::Any
                    } else if let Some(index) = slot.strip_prefix('#') {
                        Slot::Position(
                            index
                                .parse()
                                .map_err(|_| err(format!("bad position {slot:?}")))?,
                        )
                    } else {
                        Slot::Field(slot.to_string())
                    };
                    rules
                        .relabels
                        .push(RelabelRule::new(context, slot, original, label));
                }
                Some(Section::Whitelist) => {
                    let [context, token] = cols[..] else {
                        return Err(err(format!("expected 2 columns, found {}", cols.len())));
                    };
                    rules
                        .retained
                        .push((context.to_string(), token.to_string()));
                }
                Some(Section::Fold) => {
                    let [kind] = cols[..] else {
                        return Err(err(format!("expected 1 column, found {}", cols.len())));
                    };
                    rules.fold_parents.insert(kind.to_string());
                }
            }
        }
        Ok(rules)
    }

    /// Render in the format accepted by [`RelabelRuleSet::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::from("[relabel]\n");
        for r in &self.relabels {
            out.push_str(&format!(
                "{}, {}, {}, {}\n",
                r.context, r.slot, r.original, r.label
            ));
        }
        out.push_str("[whitelist]\n");
        for (c, t) in &self.retained {
            out.push_str(&format!("{c}, {t}\n"));
        }
        out.push_str("[fold]\n");
        for k in &self.fold_parents {
            out.push_str(k);
            out.push('\n');
        }
        out
    }
}

/// Working node shared by both augmentation stages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexNode {
    pub label: String,
    /// Grammar kind before any relabel.
    pub kind: String,
    pub field: Option<String>,
    pub named: bool,
    pub value: Option<String>,
    /// Source text, kept only for leaves, unnamed tokens and collapsible literals.
    pub text: Option<String>,
    pub children: Vec<LexNode>,
}

impl LexNode {
    fn from_raw(node: &RawNode, source: &str) -> Self {
        let keep_text =
            node.children.is_empty() || !node.named || COLLAPSED_LITERALS.contains(&node.kind);
        LexNode {
            label: node.kind.to_string(),
            kind: node.kind.to_string(),
            field: node.field.map(String::from),
            named: node.named,
            value: None,
            text: keep_text.then(|| node.text(source).to_string()),
            children: node
                .children
                .iter()
                .map(|c| LexNode::from_raw(c, source))
                .collect(),
        }
    }

    fn from_aug(node: &AugNode, parent: Option<&str>, rules: &RelabelRuleSet) -> Self {
        let named = !parent.is_some_and(|p| rules.is_retained(p, &node.label));
        LexNode {
            label: node.label.clone(),
            kind: node.label.clone(),
            field: None,
            named,
            value: node.value.clone(),
            text: None,
            children: node
                .children
                .iter()
                .map(|c| LexNode::from_aug(c, Some(&node.label), rules))
                .collect(),
        }
    }

    fn into_aug(self) -> AugNode {
        AugNode {
            label: self.label,
            value: self.value,
            children: self.children.into_iter().map(LexNode::into_aug).collect(),
        }
    }

    fn inject(&mut self, rules: &RelabelRuleSet) {
        if COLLAPSED_LITERALS.contains(&self.kind.as_str()) && self.named {
            if let Some(text) = &self.text {
                self.value = Some(truncate_literal(text));
            }
            self.children.clear();
            return;
        }
        if self.named && self.children.is_empty() && LEXICAL_LEAVES.contains(&self.kind.as_str()) {
            if let Some(text) = &self.text {
                self.value = Some(text.clone());
            }
        }
        let parent_kind = self.kind.clone();
        let mut named_index = 0;
        for child in &mut self.children {
            let position = child.named.then(|| {
                named_index += 1;
                named_index - 1
            });
            if let Some(label) = rules.relabel_for(&parent_kind, child, position) {
                child.label = label.to_string();
            }
            child.inject(rules);
        }
    }

    fn normalize(&mut self, rules: &RelabelRuleSet) {
        let folds = self.named && rules.fold_parents.contains(&self.kind);
        let mut operators = Vec::new();
        let context = self.kind.clone();
        self.children.retain(|child| {
            if child.named || rules.is_retained(&context, &child.kind) {
                return true;
            }
            if folds {
                if let Some(text) = &child.text {
                    operators.push(operator_symbol(text));
                }
            }
            false
        });
        if !operators.is_empty() {
            self.value = Some(operators.join(","));
        }
        for child in &mut self.children {
            child.normalize(rules);
        }
    }
}

/// Whitespace runs inside multi-token operators (`not in`) become `_`.
fn operator_symbol(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join("_")
}

fn truncate_literal(text: &str) -> String {
    match text.char_indices().nth(MAX_LITERAL_CHARS) {
        Some((cut, _)) => {
            let mut out = text[..cut].to_string();
            out.push(TRUNCATION_MARKER);
            out
        }
        None => text.to_string(),
    }
}

/// Tree between (or during) the two augmentation stages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexTree {
    pub root: LexNode,
    pub source_node_count: usize,
}

impl LexTree {
    pub fn from_raw(raw: &RawTree) -> Result<Self, AugmentError> {
        if raw.has_errors {
            let span = raw.first_error().map_or(raw.root.span, |n| n.span);
            return Err(AugmentError::ErrorTree(span));
        }
        Ok(LexTree {
            root: LexNode::from_raw(&raw.root, &raw.source),
            source_node_count: count_nodes(raw),
        })
    }

    /// Lift an augmented tree back into the working form. Whitelisted tokens
    /// are marked unnamed again so normalization recognises them.
    pub fn from_aug(tree: &AugTree, rules: &RelabelRuleSet) -> Self {
        LexTree {
            root: LexNode::from_aug(&tree.root, None, rules),
            source_node_count: tree.source_node_count,
        }
    }

    pub fn inject(mut self, rules: &RelabelRuleSet) -> Self {
        self.root.inject(rules);
        self
    }

    pub fn normalize(mut self, rules: &RelabelRuleSet) -> Self {
        self.root.normalize(rules);
        self
    }

    pub fn into_aug(self) -> AugTree {
        let root = self.root.into_aug();
        AugTree {
            node_count: root.count(),
            source_node_count: self.source_node_count,
            root,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AugNode {
    pub label: String,
    pub value: Option<String>,
    pub children: Vec<AugNode>,
}

impl AugNode {
    pub fn leaf(label: &str, value: Option<&str>) -> Self {
        AugNode {
            label: label.to_string(),
            value: value.map(String::from),
            children: Vec::new(),
        }
    }

    pub fn count(&self) -> usize {
        1 + self.children.iter().map(AugNode::count).sum::<usize>()
    }

    pub fn preorder(&self) -> impl Iterator<Item = &AugNode> {
        let mut stack = vec![self];
        std::iter::from_fn(move || {
            let node = stack.pop()?;
            stack.extend(node.children.iter().rev());
            Some(node)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugTree {
    pub root: AugNode,
    pub source_node_count: usize,
    pub node_count: usize,
}

impl AugTree {
    /// Wrap a bare node, e.g. one reconstructed from a serialized sequence.
    pub fn from_root(root: AugNode) -> Self {
        let node_count = root.count();
        AugTree {
            root,
            source_node_count: node_count,
            node_count,
        }
    }
}

pub fn inject_lexical(raw: &RawTree, rules: &RelabelRuleSet) -> Result<LexTree, AugmentError> {
    Ok(LexTree::from_raw(raw)?.inject(rules))
}

pub fn normalize_structure(tree: LexTree, rules: &RelabelRuleSet) -> AugTree {
    tree.normalize(rules).into_aug()
}

pub fn augment_with(raw: &RawTree, rules: &RelabelRuleSet) -> Result<AugTree, AugmentError> {
    Ok(normalize_structure(inject_lexical(raw, rules)?, rules))
}

pub fn augment(raw: &RawTree) -> Result<AugTree, AugmentError> {
    augment_with(raw, &RelabelRuleSet::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_source;
    use crate::BALANCE_CHECK;

    fn aug(code: &str) -> AugTree {
        augment(&parse_source(code).unwrap()).unwrap()
    }

    fn find<'a>(node: &'a AugNode, label: &str) -> Vec<&'a AugNode> {
        node.preorder().filter(|n| n.label == label).collect()
    }

    #[test]
    fn balance_check_shrinks_to_27() {
        let tree = aug(BALANCE_CHECK);
        assert_eq!(tree.source_node_count, 41);
        assert_eq!(tree.node_count, 27);
    }

    #[test]
    fn balance_check_top_shape() {
        let tree = aug(BALANCE_CHECK);
        assert_eq!(tree.root.label, "module");
        let def = &tree.root.children[0];
        assert_eq!(def.label, "function_definition");
        let labels: Vec<_> = def.children.iter().map(|c| c.label.as_str()).collect();
        assert_eq!(labels, ["function_name", "parameters", "block"]);
        assert_eq!(
            def.children[0].value.as_deref(),
            Some("check_negative_balance")
        );
    }

    #[test]
    fn parameters_stay_identifiers() {
        let tree = aug(BALANCE_CHECK);
        let params = &tree.root.children[0].children[1];
        assert_eq!(
            params.children,
            vec![AugNode::leaf("identifier", Some("operations"))]
        );
    }

    #[test]
    fn variable_rule_relabels_assignment_target() {
        let raw = parse_source("balance = 0").unwrap();
        let tree = augment_with(&raw, &RelabelRuleSet::with_variable_targets()).unwrap();
        let assignment = &find(&tree.root, "assignment")[0];
        assert_eq!(
            assignment.children,
            vec![
                AugNode::leaf("variable", Some("balance")),
                AugNode::leaf("integer", Some("0")),
            ]
        );
    }

    #[test]
    fn injection_alone_keeps_tokens() {
        let raw = parse_source("balance = 0").unwrap();
        let lex = inject_lexical(&raw, &RelabelRuleSet::with_variable_targets()).unwrap();
        let assignment = &lex.root.children[0].children[0];
        assert_eq!(assignment.children.len(), 3);
        assert_eq!(assignment.children[0].label, "variable");
        assert_eq!(assignment.children[0].value.as_deref(), Some("balance"));
        assert_eq!(assignment.children[1].kind, "=");
        assert_eq!(assignment.children[2].label, "integer");
        assert_eq!(assignment.children[2].value.as_deref(), Some("0"));
    }

    #[test]
    fn binary_operator_folds_symbol() {
        let tree = aug("a + b");
        let op = &find(&tree.root, "binary_operator")[0];
        assert_eq!(op.value.as_deref(), Some("+"));
        assert_eq!(
            op.children,
            vec![
                AugNode::leaf("identifier", Some("a")),
                AugNode::leaf("identifier", Some("b"))
            ]
        );
    }

    #[test]
    fn multi_token_comparison_joins_with_underscore() {
        let tree = aug("a not in b");
        let op = &find(&tree.root, "comparison_operator")[0];
        assert_eq!(op.value.as_deref(), Some("not_in"));
        assert_eq!(op.children.len(), 2);
        let chain = aug("a < b <= c");
        assert_eq!(
            find(&chain.root, "comparison_operator")[0].value.as_deref(),
            Some("<,<=")
        );
    }

    #[test]
    fn other_operators_fold() {
        assert_eq!(
            find(&aug("-a").root, "unary_operator")[0].value.as_deref(),
            Some("-")
        );
        assert_eq!(
            find(&aug("a and b").root, "boolean_operator")[0]
                .value
                .as_deref(),
            Some("and")
        );
        assert_eq!(
            find(&aug("not a").root, "not_operator")[0].value.as_deref(),
            Some("not")
        );
        assert_eq!(
            find(&aug("x += 1").root, "augmented_assignment")[0]
                .value
                .as_deref(),
            Some("+=")
        );
    }

    #[test]
    fn slice_colon_is_retained() {
        let tree = aug("x[1:2]");
        let slice = &find(&tree.root, "slice")[0];
        let labels: Vec<_> = slice.children.iter().map(|c| c.label.as_str()).collect();
        assert_eq!(labels, ["integer", ":", "integer"]);
        // the subscript brackets are dropped
        let subscript = &find(&tree.root, "subscript")[0];
        assert_eq!(subscript.children.len(), 2);
    }

    #[test]
    fn empty_module_is_single_node() {
        let tree = aug("");
        assert_eq!(tree.node_count, 1);
        assert_eq!(tree.root, AugNode::leaf("module", None));
    }

    #[test]
    fn return_false_has_valueless_child() {
        let tree = aug("return False");
        let ret = &find(&tree.root, "return_statement")[0];
        assert_eq!(ret.children, vec![AugNode::leaf("false", None)]);
    }

    #[test]
    fn strings_collapse_verbatim_and_truncate() {
        let tree = aug("x = 'a;b'");
        assert_eq!(
            find(&tree.root, "string")[0],
            &AugNode::leaf("string", Some("'a;b'"))
        );

        let long = format!("x = \"{}\"", "y".repeat(100));
        let tree = aug(&long);
        let value = find(&tree.root, "string")[0].value.clone().unwrap();
        assert_eq!(value.chars().count(), MAX_LITERAL_CHARS + 1);
        assert!(value.starts_with("\"yyy"));
        assert!(value.ends_with(TRUNCATION_MARKER));
    }

    #[test]
    fn error_tree_is_refused() {
        let raw = parse_source("def f(:").unwrap();
        assert!(matches!(augment(&raw), Err(AugmentError::ErrorTree(_))));
    }

    #[test]
    fn stage_order_is_interchangeable() {
        let rules = RelabelRuleSet::with_variable_targets();
        for code in [
            BALANCE_CHECK,
            "x[1:2] = f'{a}' + b\n",
            "a not in b and -c < d\n",
        ] {
            let raw = parse_source(code).unwrap();
            let forward = LexTree::from_raw(&raw)
                .unwrap()
                .inject(&rules)
                .normalize(&rules);
            let swapped = LexTree::from_raw(&raw)
                .unwrap()
                .normalize(&rules)
                .inject(&rules);
            assert_eq!(forward.into_aug(), swapped.into_aug());
        }
    }

    #[test]
    fn normalization_is_idempotent() {
        let rules = RelabelRuleSet::default();
        let tree = aug("def f(x):\n    return x[1:2] + -x\n");
        let again = normalize_structure(LexTree::from_aug(&tree, &rules), &rules);
        assert_eq!(again, tree);
    }

    #[test]
    fn rule_file_round_trip() {
        let rules = RelabelRuleSet::with_variable_targets();
        assert_eq!(RelabelRuleSet::parse(&rules.to_text()).unwrap(), rules);
    }

    #[test]
    fn rule_file_overrides_only_listed_sections() {
        let rules = RelabelRuleSet::parse(
            "# keep fold defaults\n[relabel]\nclass_definition, name, identifier, class_name\n\
             function_definition, #0, identifier, function_name\n[whitelist]\n",
        )
        .unwrap();
        assert_eq!(rules.relabels.len(), 2);
        assert_eq!(rules.relabels[1].slot, Slot::Position(0));
        assert!(rules.retained.is_empty());
        assert_eq!(rules.fold_parents, RelabelRuleSet::default().fold_parents);

        let tree =
            augment_with(&parse_source("class A:\n    x = a[1:2]\n").unwrap(), &rules).unwrap();
        assert_eq!(
            find(&tree.root, "class_name")[0].value.as_deref(),
            Some("A")
        );
        assert!(find(&tree.root, ":").is_empty());
    }

    #[test]
    fn rule_file_errors_carry_line() {
        let err = RelabelRuleSet::parse("[relabel]\na, b, c\n").unwrap_err();
        assert_eq!(err.line, 2);
        let err = RelabelRuleSet::parse("x, y\n").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(RelabelRuleSet::parse("[nope]\n").is_err());
        assert!(RelabelRuleSet::parse("[relabel]\na, b, c, new label\n").is_err());
    }
}
