use std::collections::HashMap;

use super::{PhyloTree, Taxon, Vertex};

/// A rooted subtree of an unrooted tree: the component containing `root`
/// after deleting the edge `{from, root}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Handle {
    pub from: Vertex,
    pub root: Vertex,
    /// The two child handles, `None` for a leaf-rooted (singleton) handle.
    pub children: Option<(usize, usize)>,
    /// Handle index of `root -> from`.
    pub reverse: usize,
    /// Taxa below `root`, sorted.
    pub leaves: Vec<Taxon>,
}

impl Handle {
    pub fn is_singleton(&self) -> bool {
        self.children.is_none()
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }
}

/// All `2·|E|` directed-edge handles of a tree, ordered by non-decreasing
/// leaf count so that children always precede their parent.
#[derive(Debug, Clone)]
pub struct RootedSubtrees {
    handles: Vec<Handle>,
    index: HashMap<(Vertex, Vertex), usize>,
}

impl RootedSubtrees {
    pub fn new(tree: &PhyloTree) -> Self {
        let mut directed: Vec<(Vertex, Vertex)> = Vec::new();
        for (u, v) in tree.edges() {
            directed.push((u, v));
            directed.push((v, u));
        }
        let mut leaves: HashMap<(Vertex, Vertex), Vec<Taxon>> = HashMap::new();
        for &(from, root) in &directed {
            collect_leaves(tree, from, root, &mut leaves);
        }
        directed.sort_by_key(|&(from, root)| (leaves[&(from, root)].len(), root, from));
        let index: HashMap<(Vertex, Vertex), usize> =
            directed.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let handles = directed
            .iter()
            .map(|&(from, root)| {
                let children = if tree.is_leaf(root) {
                    None
                } else {
                    let mut kids = tree.neighbors(root).iter().filter(|&&w| w != from);
                    let a = index[&(root, *kids.next().unwrap())];
                    let b = index[&(root, *kids.next().unwrap())];
                    Some((a.min(b), a.max(b)))
                };
                Handle {
                    from,
                    root,
                    children,
                    reverse: index[&(root, from)],
                    leaves: leaves[&(from, root)].clone(),
                }
            })
            .collect();
        RootedSubtrees { handles, index }
    }

    pub fn len(&self) -> usize {
        self.handles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.handles.is_empty()
    }

    pub fn get(&self, i: usize) -> &Handle {
        &self.handles[i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Handle> {
        self.handles.iter()
    }

    /// Index of the handle `from -> root`, if that edge exists.
    pub fn find(&self, from: Vertex, root: Vertex) -> Option<usize> {
        self.index.get(&(from, root)).copied()
    }
}

fn collect_leaves(
    tree: &PhyloTree,
    from: Vertex,
    root: Vertex,
    memo: &mut HashMap<(Vertex, Vertex), Vec<Taxon>>,
) {
    // Explicit post-order so caterpillars of any size do not overflow the stack.
    let mut stack = vec![(from, root, false)];
    while let Some((f, r, expanded)) = stack.pop() {
        if memo.contains_key(&(f, r)) {
            continue;
        }
        if tree.is_leaf(r) {
            memo.insert((f, r), vec![r]);
            continue;
        }
        let kids: Vec<Vertex> = tree.neighbors(r).iter().copied().filter(|&w| w != f).collect();
        if expanded {
            let mut all = memo[&(r, kids[0])].clone();
            all.extend_from_slice(&memo[&(r, kids[1])]);
            all.sort_unstable();
            memo.insert((f, r), all);
        } else {
            stack.push((f, r, true));
            for k in kids {
                if !memo.contains_key(&(r, k)) {
                    stack.push((r, k, false));
                }
            }
        }
    }
}
