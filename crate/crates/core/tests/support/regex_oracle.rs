//! A tiny backtracking matcher for the regex subset the rule patterns use:
//! literals, `.`, `*`, `?`, groups with `|`, `\b`, `\w`, `\s` and escaped
//! punctuation. ASCII case-insensitive. Written independently of the regex
//! crate so rule bits can be cross-checked.

#[derive(Debug, Clone)]
enum Node {
    Lit(char),
    Any,
    Word,
    Space,
    Boundary,
    Group(Vec<Vec<Node>>),
    Star(Box<Node>),
    Opt(Box<Node>),
}

pub struct Oracle {
    alts: Vec<Vec<Node>>,
}

impl Oracle {
    pub fn new(pattern: &str) -> Oracle {
        let chars: Vec<char> = pattern.chars().collect();
        let mut pos = 0;
        let alts = parse_alts(&chars, &mut pos);
        assert_eq!(pos, chars.len(), "unbalanced pattern {pattern:?}");
        Oracle { alts }
    }

    /// Unanchored search.
    pub fn is_match(&self, text: &str) -> bool {
        let t: Vec<char> = text.chars().collect();
        let root = [Node::Group(self.alts.clone())];
        (0..=t.len()).any(|start| m(&root, &t, start, &mut |_| true))
    }
}

fn parse_alts(p: &[char], pos: &mut usize) -> Vec<Vec<Node>> {
    let mut alts = vec![Vec::new()];
    while *pos < p.len() {
        let c = p[*pos];
        *pos += 1;
        let node = match c {
            ')' => {
                *pos -= 1;
                break;
            }
            '|' => {
                alts.push(Vec::new());
                continue;
            }
            '(' => {
                let inner = parse_alts(p, pos);
                assert_eq!(p.get(*pos), Some(&')'));
                *pos += 1;
                Node::Group(inner)
            }
            '.' => Node::Any,
            '\\' => {
                let e = p[*pos];
                *pos += 1;
                match e {
                    'b' => Node::Boundary,
                    'w' => Node::Word,
                    's' => Node::Space,
                    other => Node::Lit(other),
                }
            }
            '*' | '?' => {
                let last = alts
                    .last_mut()
                    .unwrap()
                    .pop()
                    .expect("quantifier without operand");
                if c == '*' {
                    Node::Star(Box::new(last))
                } else {
                    Node::Opt(Box::new(last))
                }
            }
            other => Node::Lit(other),
        };
        alts.last_mut().unwrap().push(node);
    }
    alts
}

fn is_word(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn at_boundary(t: &[char], i: usize) -> bool {
    let before = i > 0 && is_word(t[i - 1]);
    let after = i < t.len() && is_word(t[i]);
    before != after
}

/// Matches `nodes` at `i`, then hands the end position to `k`.
fn m(nodes: &[Node], t: &[char], i: usize, k: &mut dyn FnMut(usize) -> bool) -> bool {
    let Some((first, rest)) = nodes.split_first() else {
        return k(i);
    };
    let single = |pred: &dyn Fn(char) -> bool| i < t.len() && pred(t[i]);
    match first {
        Node::Lit(c) => single(&|x| x.eq_ignore_ascii_case(c)) && m(rest, t, i + 1, k),
        Node::Any => single(&|x| x != '\n') && m(rest, t, i + 1, k),
        Node::Word => single(&is_word) && m(rest, t, i + 1, k),
        Node::Space => single(&char::is_whitespace) && m(rest, t, i + 1, k),
        Node::Boundary => at_boundary(t, i) && m(rest, t, i, k),
        Node::Group(alts) => alts
            .iter()
            .any(|alt| m(alt, t, i, &mut |j| m(rest, t, j, k))),
        Node::Opt(inner) => {
            m(std::slice::from_ref(inner.as_ref()), t, i, &mut |j| {
                m(rest, t, j, k)
            }) || m(rest, t, i, k)
        }
        Node::Star(inner) => star(inner, rest, t, i, k),
    }
}

fn star(
    inner: &Node,
    rest: &[Node],
    t: &[char],
    i: usize,
    k: &mut dyn FnMut(usize) -> bool,
) -> bool {
    // greedy: one more repetition first, then the remainder
    m(std::slice::from_ref(inner), t, i, &mut |j| {
        j > i && star(inner, rest, t, j, k)
    }) || m(rest, t, i, k)
}
