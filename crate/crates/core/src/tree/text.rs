//! S-expression text form:
//! `(leaf +1)` | `(leaf -1)` | `(node <i> <neg-subtree> <pos-subtree>)`,
//! with 1-based variable numbers and arbitrary whitespace.

use super::{DecisionTree, TreeNode};
use crate::error::{Error, Result};

/// Canonical text: single spaces, no trailing newline.
pub fn serialize_tree(tree: &DecisionTree) -> String {
    fn write(node: &TreeNode, out: &mut String) {
        match node {
            TreeNode::Leaf(v) => out.push_str(if *v > 0 { "(leaf +1)" } else { "(leaf -1)" }),
            TreeNode::Internal { var, neg, pos } => {
                out.push_str("(node ");
                out.push_str(&(var + 1).to_string());
                out.push(' ');
                write(neg, out);
                out.push(' ');
                write(pos, out);
                out.push(')');
            }
        }
    }
    let mut out = String::new();
    write(tree.root(), &mut out);
    out
}

/// Parses a tree over `n` variables, validating it fully.
pub fn parse_tree(text: &str, n: usize) -> Result<DecisionTree> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let root = p.node()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("trailing input after tree"));
    }
    DecisionTree::new(n, root)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::TreeParse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn expect(&mut self, b: u8) -> Result<()> {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&b) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", b as char)))
        }
    }

    fn atom(&mut self) -> Result<&str> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let b = self.src[self.pos];
            if b.is_ascii_whitespace() || b == b'(' || b == b')' {
                break;
            }
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a token"));
        }
        std::str::from_utf8(&self.src[start..self.pos]).map_err(|_| self.err("invalid UTF-8"))
    }

    fn node(&mut self) -> Result<TreeNode> {
        self.expect(b'(')?;
        let node = match self.atom()? {
            "leaf" => match self.atom()? {
                "+1" => TreeNode::Leaf(1),
                "-1" => TreeNode::Leaf(-1),
                other => {
                    let msg = format!("leaf label must be +1 or -1, got {other:?}");
                    return Err(self.err(&msg));
                }
            },
            "node" => {
                let tok = self.atom()?.to_string();
                let var: usize = match tok.parse() {
                    Ok(v) => v,
                    Err(_) => return Err(self.err(&format!("bad variable index {tok:?}"))),
                };
                if var == 0 {
                    return Err(self.err("variable indices start at 1"));
                }
                let neg = self.node()?;
                let pos = self.node()?;
                TreeNode::split(var - 1, neg, pos)
            }
            other => {
                let msg = format!("expected 'leaf' or 'node', got {other:?}");
                return Err(self.err(&msg));
            }
        };
        self.expect(b')')?;
        Ok(node)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::tree::random_tree;
    use proptest::prelude::*;

    #[test]
    fn literals() {
        let t = parse_tree("(leaf +1)", 3).unwrap();
        assert_eq!(t, DecisionTree::constant(3, 1).unwrap());
        let t = parse_tree("  (node 1\n  (leaf -1)\t(leaf +1) ) ", 2).unwrap();
        assert_eq!(t.eval(&[1, -1]), 1);
        assert_eq!(t.eval(&[-1, -1]), -1);
        assert_eq!(serialize_tree(&t), "(node 1 (leaf -1) (leaf +1))");
    }

    #[test]
    fn malformed() {
        for bad in [
            "",
            "(leaf 1)",
            "(leaf +1",
            "(node 0 (leaf +1) (leaf -1))",
            "(nod 1)",
            "(leaf +1) x",
            "(node a (leaf +1) (leaf -1))",
        ] {
            assert!(parse_tree(bad, 3).is_err(), "{bad:?} should fail");
        }
        assert!(matches!(
            parse_tree("(node 1 (node 1 (leaf +1) (leaf -1)) (leaf -1))", 2),
            Err(Error::RepeatedVariable(1))
        ));
        assert!(matches!(
            parse_tree("(node 4 (leaf +1) (leaf -1))", 3),
            Err(Error::VariableOutOfRange { index: 4, n: 3 })
        ));
    }

    proptest! {
        #[test]
        fn round_trip(seed in any::<u64>(), n in 1usize..10, size_frac in 0.0f64..1.0) {
            let max = (1usize << n).min(40);
            let size = 1 + ((max - 1) as f64 * size_frac) as usize;
            let t = random_tree(n, size, &mut stream(seed, "tree", 0)).unwrap();
            let s = serialize_tree(&t);
            let back = parse_tree(&s, n).unwrap();
            prop_assert_eq!(&back, &t);
            prop_assert_eq!(serialize_tree(&back), s);
        }
    }
}
