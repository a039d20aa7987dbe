//! Scenario-tree expansion: the rooted tree of partial stochastic histories.
//!
//! Depth-`d` nodes carry the joint outcomes of all stage-`d` stochastic
//! variables; leaves at depth `m` are full scenarios. Children of a node
//! enumerate the Cartesian product of the next stage's outcomes in
//! declaration-then-value order, so the tree (and everything compiled from
//! it) is deterministic.

use thiserror::Error;

use crate::model::StochasticModel;
use crate::rational::Rational;

/// Default cap on the number of scenarios a tree may expand to.
pub const DEFAULT_SCENARIO_CAP: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("SIZE_LIMIT: scenario tree would have {leaves} leaves, cap is {cap}")]
    SizeLimit { leaves: u128, cap: usize },
}

#[derive(Debug, Clone)]
pub struct Node {
    pub id: NodeId,
    /// Stage index of this node; the root sits at depth 0.
    pub depth: usize,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    /// Joint outcome on the edge from the parent: `(stochastic index, value)`
    /// for every stochastic variable of this node's stage.
    pub step: Vec<(usize, i64)>,
    /// Probability of `step` given the parent (product of outcome marginals).
    pub edge_prob: Rational,
    /// Probability of the full history from the root.
    pub prob: Rational,
    /// All stochastic assignments on the path from the root, in
    /// (stage, declaration) order.
    pub history: Vec<(usize, i64)>,
}

/// One leaf of the tree: a complete joint outcome with its probability.
#[derive(Debug, Clone, Copy)]
pub struct Scenario<'a> {
    pub index: usize,
    pub leaf: NodeId,
    pub prob: Rational,
    pub assignment: &'a [(usize, i64)],
}

#[derive(Debug, Clone)]
pub struct ScenarioTree {
    nodes: Vec<Node>,
    leaves: Vec<NodeId>,
    stage_count: usize,
}

impl ScenarioTree {
    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn stage_count(&self) -> usize {
        self.stage_count
    }

    pub fn leaf_ids(&self) -> &[NodeId] {
        &self.leaves
    }

    pub fn scenario_count(&self) -> usize {
        self.leaves.len()
    }

    pub fn scenarios(&self) -> impl Iterator<Item = Scenario<'_>> {
        self.leaves.iter().enumerate().map(|(index, &leaf)| {
            let node = self.node(leaf);
            Scenario {
                index,
                leaf,
                prob: node.prob,
                assignment: &node.history,
            }
        })
    }

    pub fn scenario(&self, index: usize) -> Scenario<'_> {
        let leaf = self.leaves[index];
        let node = self.node(leaf);
        Scenario {
            index,
            leaf,
            prob: node.prob,
            assignment: &node.history,
        }
    }

    /// The ancestor of `id` at the requested depth (possibly `id` itself).
    pub fn ancestor_at_depth(&self, id: NodeId, depth: usize) -> NodeId {
        let mut cur = id;
        while self.node(cur).depth > depth {
            cur = self.node(cur).parent.expect("non-root node has a parent");
        }
        assert_eq!(
            self.node(cur).depth,
            depth,
            "node shallower than requested depth"
        );
        cur
    }

    /// All nodes at the given depth, in left-to-right order.
    pub fn nodes_at_depth(&self, depth: usize) -> Vec<NodeId> {
        self.nodes
            .iter()
            .filter(|n| n.depth == depth)
            .map(|n| n.id)
            .collect()
    }

    /// Dotted path of child indices from the root; the root itself is `-`.
    pub fn node_path(&self, id: NodeId) -> String {
        let mut steps = Vec::new();
        let mut cur = id;
        while let Some(parent) = self.node(cur).parent {
            let idx = self
                .node(parent)
                .children
                .iter()
                .position(|&c| c == cur)
                .expect("child registered in parent");
            steps.push(idx.to_string());
            cur = parent;
        }
        if steps.is_empty() {
            "-".to_string()
        } else {
            steps.reverse();
            steps.join(".")
        }
    }
}

/// Exact probability of the scenario at `leaf`: the product of the marginal
/// probabilities along its history, recomputed from the model.
pub fn scenario_probability(
    model: &StochasticModel,
    tree: &ScenarioTree,
    leaf: NodeId,
) -> Rational {
    let node = tree.node(leaf);
    node.history
        .iter()
        .fold(Rational::ONE, |acc, &(si, value)| {
            let marginal = model.stochastics[si]
                .dist
                .iter()
                .find(|(v, _)| *v == value)
                .map(|(_, p)| *p)
                .expect("history value drawn from the distribution");
            acc * marginal
        })
}

/// Expands the model into its scenario tree. Fails with
/// [`TreeError::SizeLimit`] when the leaf count (the product of all
/// distribution sizes) exceeds `cap`.
pub fn build_scenario_tree(model: &StochasticModel, cap: usize) -> Result<ScenarioTree, TreeError> {
    let leaf_count: u128 = model
        .stochastics
        .iter()
        .fold(1u128, |acc, s| acc.saturating_mul(s.dist.len() as u128));
    if leaf_count > cap as u128 {
        return Err(TreeError::SizeLimit {
            leaves: leaf_count,
            cap,
        });
    }

    let mut nodes = vec![Node {
        id: NodeId(0),
        depth: 0,
        parent: None,
        children: Vec::new(),
        step: Vec::new(),
        edge_prob: Rational::ONE,
        prob: Rational::ONE,
        history: Vec::new(),
    }];
    let mut frontier = vec![NodeId(0)];

    for stage in 1..=model.stage_count {
        // Stochastic variables observed at this stage, declaration order.
        let stage_vars: Vec<usize> = model
            .stochastics
            .iter()
            .enumerate()
            .filter(|(_, s)| s.stage == stage)
            .map(|(i, _)| i)
            .collect();

        // Joint outcomes in declaration-then-value order: the first-declared
        // variable varies slowest.
        let mut outcomes: Vec<(Vec<(usize, i64)>, Rational)> = vec![(Vec::new(), Rational::ONE)];
        for &si in &stage_vars {
            let mut next = Vec::with_capacity(outcomes.len() * model.stochastics[si].dist.len());
            for (prefix, p) in &outcomes {
                for &(value, vp) in &model.stochastics[si].dist {
                    let mut step = prefix.clone();
                    step.push((si, value));
                    next.push((step, *p * vp));
                }
            }
            outcomes = next;
        }

        let mut next_frontier = Vec::with_capacity(frontier.len() * outcomes.len());
        for &parent in &frontier {
            for (step, edge_prob) in &outcomes {
                let id = NodeId(nodes.len());
                let parent_node = &nodes[parent.0];
                let mut history = parent_node.history.clone();
                history.extend_from_slice(step);
                let node = Node {
                    id,
                    depth: stage,
                    parent: Some(parent),
                    children: Vec::new(),
                    step: step.clone(),
                    edge_prob: *edge_prob,
                    prob: parent_node.prob * *edge_prob,
                    history,
                };
                nodes.push(node);
                nodes[parent.0].children.push(id);
                next_frontier.push(id);
            }
        }
        frontier = next_frontier;
    }

    debug_assert_eq!(frontier.len() as u128, leaf_count);
    Ok(ScenarioTree {
        nodes,
        leaves: frontier,
        stage_count: model.stage_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_model;

    #[test]
    fn leaf_count_is_product_of_distribution_sizes() {
        let model = parse_model(
            "stoch w1 in {0:1/2, 1:1/2} stage 1;\n\
             stoch w2 in {0:1/3, 1:1/3, 2:1/3} stage 1;\n\
             stoch w3 in {0:1/2, 1:1/2} stage 2;\n\
             int x in 0..1 stage 1;\n\
             x >= 0;\n",
        )
        .unwrap();
        let tree = build_scenario_tree(&model, DEFAULT_SCENARIO_CAP).unwrap();
        assert_eq!(tree.scenario_count(), 12);
        let total = tree.scenarios().fold(Rational::ZERO, |acc, s| acc + s.prob);
        assert_eq!(total, Rational::ONE);
    }

    #[test]
    fn no_stochastics_degenerates_to_one_scenario() {
        let model = parse_model("int x in 0..1 stage 1;\nx >= 0;\n").unwrap();
        let tree = build_scenario_tree(&model, DEFAULT_SCENARIO_CAP).unwrap();
        assert_eq!(tree.scenario_count(), 1);
        assert_eq!(tree.scenario(0).prob, Rational::ONE);
        assert!(tree.scenario(0).assignment.is_empty());
    }

    #[test]
    fn two_fair_coins() {
        let model = parse_model(
            "stoch a in {0:1/2, 1:1/2} stage 1;\n\
             stoch b in {0:1/2, 1:1/2} stage 1;\n\
             int x in 0..1 stage 1;\n\
             x >= 0;\n",
        )
        .unwrap();
        let tree = build_scenario_tree(&model, DEFAULT_SCENARIO_CAP).unwrap();
        assert_eq!(tree.scenario_count(), 4);
        for s in tree.scenarios() {
            assert_eq!(s.prob, Rational::new(1, 4));
        }
        // Declaration-then-value order: a varies slowest.
        let assignments: Vec<Vec<(usize, i64)>> =
            tree.scenarios().map(|s| s.assignment.to_vec()).collect();
        assert_eq!(assignments[0], vec![(0, 0), (1, 0)]);
        assert_eq!(assignments[1], vec![(0, 0), (1, 1)]);
        assert_eq!(assignments[2], vec![(0, 1), (1, 0)]);
        assert_eq!(assignments[3], vec![(0, 1), (1, 1)]);
    }

    #[test]
    fn probability_is_product_along_history() {
        let model = parse_model(
            "stoch w1 in {0:1/2, 1:1/2} stage 1;\n\
             stoch w2 in {0:1/3, 1:1/3, 2:1/3} stage 1;\n\
             int x in 0..1 stage 1;\n\
             x >= 0;\n",
        )
        .unwrap();
        let tree = build_scenario_tree(&model, DEFAULT_SCENARIO_CAP).unwrap();
        // Scenario {w1=0, w2=1} has probability 1/2 * 1/3 = 1/6.
        let s = tree
            .scenarios()
            .find(|s| s.assignment == [(0, 0), (1, 1)])
            .unwrap();
        assert_eq!(
            scenario_probability(&model, &tree, s.leaf),
            Rational::new(1, 6)
        );
        assert_eq!(s.prob, Rational::new(1, 6));
    }

    #[test]
    fn single_variable_probability() {
        let model =
            parse_model("stoch w in {5:2/3, 7:1/3} stage 1;\nint x in 0..1 stage 1;\nx >= 0;\n")
                .unwrap();
        let tree = build_scenario_tree(&model, DEFAULT_SCENARIO_CAP).unwrap();
        let s = tree.scenarios().find(|s| s.assignment == [(0, 5)]).unwrap();
        assert_eq!(
            scenario_probability(&model, &tree, s.leaf),
            Rational::new(2, 3)
        );
    }

    #[test]
    fn cap_is_enforced() {
        let model = parse_model(
            "stoch a in {0:1/2, 1:1/2} stage 1;\n\
             stoch b in {0:1/2, 1:1/2} stage 1;\n\
             int x in 0..1 stage 1;\n\
             x >= 0;\n",
        )
        .unwrap();
        let err = build_scenario_tree(&model, 3).unwrap_err();
        assert_eq!(err, TreeError::SizeLimit { leaves: 4, cap: 3 });
    }

    #[test]
    fn node_paths_and_ancestors() {
        let model = parse_model(
            "stoch w1 in {0:1/2, 1:1/2} stage 1;\n\
             stoch w2 in {0:1/2, 1:1/2} stage 2;\n\
             int x in 0..1 stage 1;\n\
             x >= 0;\n",
        )
        .unwrap();
        let tree = build_scenario_tree(&model, DEFAULT_SCENARIO_CAP).unwrap();
        assert_eq!(tree.node_path(tree.root()), "-");
        let last_leaf = *tree.leaf_ids().last().unwrap();
        assert_eq!(tree.node_path(last_leaf), "1.1");
        let mid = tree.ancestor_at_depth(last_leaf, 1);
        assert_eq!(tree.node_path(mid), "1");
        assert_eq!(tree.ancestor_at_depth(last_leaf, 0), tree.root());
    }
}
