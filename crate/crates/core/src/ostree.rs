//! Arena-backed order-statistic treaps.
//!
//! A [`Forest`] owns the nodes of any number of independent trees; a tree is
//! identified by its root link. Every node visit is tallied in a counter so
//! callers can charge data-structure work.

use std::cell::Cell;

type Link = Option<u32>;

#[derive(Clone, Debug)]
struct Node<K> {
    key: K,
    priority: u64,
    size: u32,
    left: Link,
    right: Link,
}

/// Root of one tree in a [`Forest`]. Empty by default.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Tree(Link);

impl Tree {
    pub fn is_empty(self) -> bool {
        self.0.is_none()
    }
}

#[derive(Clone, Debug)]
pub struct Forest<K> {
    nodes: Vec<Node<K>>,
    free: Vec<u32>,
    prio_state: u64,
    visits: Cell<u64>,
}

impl<K: Ord + Copy> Default for Forest<K> {
    fn default() -> Self {
        Self::new()
    }
}

impl<K: Ord + Copy> Forest<K> {
    pub fn new() -> Self {
        Forest {
            nodes: Vec::new(),
            free: Vec::new(),
            prio_state: 0x9E37_79B9_7F4A_7C15,
            visits: Cell::new(0),
        }
    }

    /// Total node visits since construction.
    pub fn visits(&self) -> u64 {
        self.visits.get()
    }

    /// Live nodes across all trees.
    pub fn live_nodes(&self) -> usize {
        self.nodes.len() - self.free.len()
    }

    #[inline]
    fn touch(&self) {
        self.visits.set(self.visits.get() + 1);
    }

    fn next_priority(&mut self) -> u64 {
        // splitmix64
        self.prio_state = self.prio_state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.prio_state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    fn alloc(&mut self, key: K) -> u32 {
        self.touch();
        let node = Node {
            key,
            priority: self.next_priority(),
            size: 1,
            left: None,
            right: None,
        };
        match self.free.pop() {
            Some(id) => {
                self.nodes[id as usize] = node;
                id
            }
            None => {
                self.nodes.push(node);
                (self.nodes.len() - 1) as u32
            }
        }
    }

    #[inline]
    fn size_of(&self, link: Link) -> usize {
        link.map_or(0, |id| self.nodes[id as usize].size as usize)
    }

    fn update(&mut self, id: u32) {
        let (l, r) = {
            let n = &self.nodes[id as usize];
            (n.left, n.right)
        };
        self.nodes[id as usize].size = (1 + self.size_of(l) + self.size_of(r)) as u32;
    }

    /// Builds a tree from strictly increasing keys in linear time.
    pub fn build_sorted(&mut self, keys: impl IntoIterator<Item = K>) -> Tree {
        // Cartesian-tree construction on the right spine.
        let mut spine: Vec<u32> = Vec::new();
        for key in keys {
            let id = self.alloc(key);
            let prio = self.nodes[id as usize].priority;
            let mut last: Link = None;
            while let Some(&top) = spine.last() {
                if self.nodes[top as usize].priority >= prio {
                    break;
                }
                spine.pop();
                self.update(top);
                last = Some(top);
            }
            self.nodes[id as usize].left = last;
            if let Some(&top) = spine.last() {
                debug_assert!(self.nodes[top as usize].key < key);
                self.nodes[top as usize].right = Some(id);
            }
            spine.push(id);
        }
        let root = spine.first().copied();
        while let Some(top) = spine.pop() {
            self.update(top);
        }
        Tree(root)
    }

    pub fn len(&self, tree: Tree) -> usize {
        self.size_of(tree.0)
    }

    /// Splits into keys `< key` (or `<= key` when `inclusive`) and the rest.
    fn split(&mut self, link: Link, key: K, inclusive: bool) -> (Link, Link) {
        let Some(id) = link else {
            return (None, None);
        };
        self.touch();
        let node_key = self.nodes[id as usize].key;
        let goes_left = if inclusive {
            node_key <= key
        } else {
            node_key < key
        };
        if goes_left {
            let right = self.nodes[id as usize].right;
            let (a, b) = self.split(right, key, inclusive);
            self.nodes[id as usize].right = a;
            self.update(id);
            (Some(id), b)
        } else {
            let left = self.nodes[id as usize].left;
            let (a, b) = self.split(left, key, inclusive);
            self.nodes[id as usize].left = b;
            self.update(id);
            (a, Some(id))
        }
    }

    fn merge(&mut self, a: Link, b: Link) -> Link {
        match (a, b) {
            (None, x) | (x, None) => x,
            (Some(x), Some(y)) => {
                self.touch();
                if self.nodes[x as usize].priority > self.nodes[y as usize].priority {
                    let r = self.nodes[x as usize].right;
                    self.nodes[x as usize].right = self.merge(r, Some(y));
                    self.update(x);
                    Some(x)
                } else {
                    let l = self.nodes[y as usize].left;
                    self.nodes[y as usize].left = self.merge(Some(x), l);
                    self.update(y);
                    Some(y)
                }
            }
        }
    }

    /// Inserts `key`; returns false (and leaves the tree alone) if present.
    pub fn insert(&mut self, tree: &mut Tree, key: K) -> bool {
        if self.contains(*tree, key) {
            return false;
        }
        let (l, r) = self.split(tree.0, key, false);
        let node = self.alloc(key);
        let l = self.merge(l, Some(node));
        tree.0 = self.merge(l, r);
        true
    }

    /// Removes `key`; returns whether it was present.
    pub fn remove(&mut self, tree: &mut Tree, key: K) -> bool {
        let (l, r) = self.split(tree.0, key, false);
        let (mid, r) = self.split(r, key, true);
        if let Some(id) = mid {
            debug_assert!(self.nodes[id as usize].size == 1);
            self.free.push(id);
        }
        tree.0 = self.merge(l, r);
        mid.is_some()
    }

    pub fn contains(&self, tree: Tree, key: K) -> bool {
        let mut cur = tree.0;
        while let Some(id) = cur {
            self.touch();
            let n = &self.nodes[id as usize];
            cur = match key.cmp(&n.key) {
                std::cmp::Ordering::Less => n.left,
                std::cmp::Ordering::Greater => n.right,
                std::cmp::Ordering::Equal => return true,
            };
        }
        false
    }

    /// Number of keys strictly less than `key`.
    pub fn rank(&self, tree: Tree, key: K) -> usize {
        let mut cur = tree.0;
        let mut below = 0;
        while let Some(id) = cur {
            self.touch();
            let n = &self.nodes[id as usize];
            if n.key < key {
                below += self.size_of(n.left) + 1;
                cur = n.right;
            } else {
                cur = n.left;
            }
        }
        below
    }

    /// The key of 0-based rank `r`, if the tree is that large.
    pub fn select(&self, tree: Tree, mut r: usize) -> Option<K> {
        let mut cur = tree.0;
        while let Some(id) = cur {
            self.touch();
            let n = &self.nodes[id as usize];
            let left = self.size_of(n.left);
            if r < left {
                cur = n.left;
            } else if r == left {
                return Some(n.key);
            } else {
                r -= left + 1;
                cur = n.right;
            }
        }
        None
    }

    /// In-order keys; test and debugging helper.
    pub fn keys(&self, tree: Tree) -> Vec<K> {
        let mut out = Vec::with_capacity(self.len(tree));
        let mut stack = Vec::new();
        let mut cur = tree.0;
        while cur.is_some() || !stack.is_empty() {
            while let Some(id) = cur {
                stack.push(id);
                cur = self.nodes[id as usize].left;
            }
            let id = stack.pop().unwrap();
            out.push(self.nodes[id as usize].key);
            cur = self.nodes[id as usize].right;
        }
        out
    }

    pub fn height(&self, tree: Tree) -> usize {
        fn go<K>(f: &[Node<K>], l: Link) -> usize {
            l.map_or(0, |id| {
                let n = &f[id as usize];
                1 + go(f, n.left).max(go(f, n.right))
            })
        }
        go(&self.nodes, tree.0)
    }
}
