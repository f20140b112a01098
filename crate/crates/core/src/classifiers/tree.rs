use super::Columns;

/// Node of a binary decision tree stored in an arena; the root is node 0.
#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    /// `x[feature] < threshold` goes left, anything else right.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn leaf(value: f64) -> Self {
        Self { nodes: vec![TreeNode::Leaf { value }] }
    }

    pub fn predict(&self, x: &[f32]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split { feature, threshold, left, right } => {
                    i = if f64::from(x[*feature]) < *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Longest root-to-leaf path, in edges.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], i: usize) -> usize {
            match &nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, TreeNode::Leaf { .. })).count()
    }

    /// Splits in depth-first order as `(feature, threshold)`.
    pub fn splits(&self) -> Vec<(usize, f64)> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                TreeNode::Split { feature, threshold, .. } => Some((*feature, *threshold)),
                TreeNode::Leaf { .. } => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub threshold: f64,
    pub gain: f64,
}

/// Threshold strictly between two consecutive distinct values.
pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo + (hi - lo) / 2.0;
    if m <= lo {
        hi
    } else {
        m
    }
}

/// Second-order split gain with L2 leaf penalty `lambda` and split cost `gamma`.
#[inline]
pub(crate) fn split_gain(gl: f64, hl: f64, gr: f64, hr: f64, lambda: f64, gamma: f64) -> f64 {
    let score = |g: f64, h: f64| g * g / (h + lambda);
    0.5 * (score(gl, hl) + score(gr, hr) - score(gl + gr, hl + hr)) - gamma
}

/// Best threshold along samples visited in ascending `x` order.
///
/// Earlier (smaller) thresholds win ties. Returns `None` when no candidate
/// has positive gain.
pub(crate) fn scan_sorted(order: &[u32], x: &[f64], g: &[f64], h: &[f64], lambda: f64, gamma: f64) -> Option<SplitCandidate> {
    let (gt, ht) = order
        .iter()
        .fold((0.0, 0.0), |(a, b), &i| (a + g[i as usize], b + h[i as usize]));
    let mut gl = 0.0;
    let mut hl = 0.0;
    let mut best: Option<SplitCandidate> = None;
    for w in order.windows(2) {
        let (i, j) = (w[0] as usize, w[1] as usize);
        gl += g[i];
        hl += h[i];
        if x[i] >= x[j] {
            continue;
        }
        let gain = split_gain(gl, hl, gt - gl, ht - hl, lambda, gamma);
        if gain > 0.0 && best.is_none_or(|b| gain > b.gain) {
            best = Some(SplitCandidate { threshold: midpoint(x[i], x[j]), gain });
        }
    }
    best
}

/// Best split of one feature column for gradient statistics `g`, `h`.
///
/// Candidates are midpoints between consecutive distinct sorted values; the
/// gain is `0.5 * [GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l)] - gamma`.
pub fn best_split(g: &[f64], h: &[f64], x: &[f64], lambda: f64, gamma: f64) -> Option<SplitCandidate> {
    assert!(g.len() == h.len() && h.len() == x.len(), "best_split: length mismatch");
    let mut order: Vec<u32> = (0..x.len() as u32).collect();
    order.sort_by(|&a, &b| x[a as usize].total_cmp(&x[b as usize]).then(a.cmp(&b)));
    scan_sorted(&order, x, g, h, lambda, gamma)
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct GradientTreeParams {
    pub max_depth: usize,
    pub lambda: f64,
    pub gamma: f64,
    pub learning_rate: f64,
}

/// Per-feature sample orders, sorted ascending by value, computed once per
/// training run.
pub(crate) fn presort(cols: &Columns) -> Vec<Vec<u32>> {
    (0..cols.d)
        .map(|j| {
            let x = cols.column(j);
            let mut order: Vec<u32> = (0..cols.n as u32).collect();
            order.sort_by(|&a, &b| x[a as usize].total_cmp(&x[b as usize]).then(a.cmp(&b)));
            order
        })
        .collect()
}

/// Exact-greedy regression tree on gradient statistics. Leaves hold
/// `-learning_rate * G / (H + lambda)`.
pub(crate) fn build_gradient_tree(
    cols: &Columns,
    sorted: &[Vec<u32>],
    g: &[f64],
    h: &[f64],
    params: GradientTreeParams,
) -> Tree {
    let mut builder = GradientTreeBuilder { cols, g, h, params, nodes: Vec::new(), goes_left: vec![false; cols.n] };
    builder.grow(sorted.to_vec(), 0);
    Tree { nodes: builder.nodes }
}

struct GradientTreeBuilder<'a> {
    cols: &'a Columns,
    g: &'a [f64],
    h: &'a [f64],
    params: GradientTreeParams,
    nodes: Vec<TreeNode>,
    goes_left: Vec<bool>,
}

impl GradientTreeBuilder<'_> {
    fn leaf_value(&self, members: &[u32]) -> f64 {
        let (gs, hs) = members
            .iter()
            .fold((0.0, 0.0), |(a, b), &i| (a + self.g[i as usize], b + self.h[i as usize]));
        -self.params.learning_rate * gs / (hs + self.params.lambda)
    }

    fn grow(&mut self, lists: Vec<Vec<u32>>, depth: usize) -> usize {
        let id = self.nodes.len();
        let members = &lists[0];
        let mut best: Option<(usize, SplitCandidate)> = None;
        if depth < self.params.max_depth && members.len() >= 2 {
            for (j, order) in lists.iter().enumerate() {
                let found = scan_sorted(order, self.cols.column(j), self.g, self.h, self.params.lambda, self.params.gamma);
                if let Some(c) = found {
                    if best.is_none_or(|(_, b)| c.gain > b.gain) {
                        best = Some((j, c));
                    }
                }
            }
        }
        let Some((feature, split)) = best else {
            let value = self.leaf_value(members);
            self.nodes.push(TreeNode::Leaf { value });
            return id;
        };

        let x = self.cols.column(feature);
        for &i in members {
            self.goes_left[i as usize] = x[i as usize] < split.threshold;
        }
        let mut left_lists = Vec::with_capacity(lists.len());
        let mut right_lists = Vec::with_capacity(lists.len());
        for order in &lists {
            let (l, r): (Vec<u32>, Vec<u32>) = order.iter().partition(|&&i| self.goes_left[i as usize]);
            left_lists.push(l);
            right_lists.push(r);
        }
        drop(lists);

        self.nodes.push(TreeNode::Split { feature, threshold: split.threshold, left: 0, right: 0 });
        let left = self.grow(left_lists, depth + 1);
        let right = self.grow(right_lists, depth + 1);
        self.nodes[id] = TreeNode::Split { feature, threshold: split.threshold, left, right };
        id
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_evaluated_gain() {
        let s = best_split(&[-1.0, -1.0, 1.0], &[1.0; 3], &[1.0, 2.0, 3.0], 1.0, 0.0).unwrap();
        assert_eq!(s.threshold, 2.5);
        let expected = 0.5 * (4.0 / 3.0 + 1.0 / 2.0 - 1.0 / 4.0);
        assert!((s.gain - expected).abs() < 1e-15, "{}", s.gain);
        assert!((s.gain - 0.791_666_666_666_666_6).abs() < 1e-12);
    }

    #[test]
    fn identical_values_have_no_split() {
        assert_eq!(best_split(&[-1.0, 1.0, 2.0], &[1.0; 3], &[4.0; 3], 1.0, 0.0), None);
    }

    #[test]
    fn penalty_dominates() {
        assert_eq!(best_split(&[1.0, 1.0], &[1.0, 1.0], &[0.0, 1.0], 1.0, 10.0), None);
    }

    #[test]
    fn unsorted_input() {
        let s = best_split(&[1.0, -1.0, -1.0], &[1.0; 3], &[3.0, 1.0, 2.0], 1.0, 0.0).unwrap();
        assert_eq!(s.threshold, 2.5);
    }

    #[test]
    fn midpoint_of_adjacent_floats_stays_above_low() {
        let lo = 1.0f64;
        let hi = f64::from_bits(lo.to_bits() + 1);
        let m = midpoint(lo, hi);
        assert!(lo < m && m <= hi);
    }

    #[test]
    fn tree_routing() {
        let t = Tree {
            nodes: vec![
                TreeNode::Split { feature: 1, threshold: 0.5, left: 1, right: 2 },
                TreeNode::Leaf { value: -1.0 },
                TreeNode::Leaf { value: 1.0 },
            ],
        };
        assert_eq!(t.predict(&[9.0, 0.4]), -1.0);
        assert_eq!(t.predict(&[9.0, 0.5]), 1.0);
        assert_eq!(t.depth(), 1);
        assert_eq!(t.n_leaves(), 2);
    }
}
