//! Pure graph-level reasoning over causal DAGs: reachability, simple-path
//! enumeration, d-separation, and the back-door criterion.
//!
//! Two independent implementations of the d-separation rules coexist on
//! purpose: the fast reachability walk in [`CausalGraph::d_separated`] and
//! the exhaustive simple-path oracle in [`CausalGraph::d_separated_naive`].

use crate::scm::VariableId;
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

/// Role of a node inside a (possibly cross-world) causal graph.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NodeKind {
    Endogenous,
    Exogenous,
    /// Counterfactual copy of a base endogenous node.
    CounterfactualDuplicate,
    /// Node shared between the real and counterfactual worlds.
    TeleporterShared,
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum GraphError {
    #[error("unknown node {0}")]
    UnknownNode(VariableId),
    #[error("duplicate node {0}")]
    DuplicateNode(VariableId),
    #[error("edge endpoint {0} does not exist")]
    UnknownEdgeEndpoint(VariableId),
    #[error("exogenous node {0} has incoming edges")]
    ExogenousWithParents(VariableId),
    #[error("graph contains a cycle")]
    Cycle,
    #[error("query endpoints must differ")]
    SameEndpoints,
    #[error("endpoint {0} is in the conditioning set")]
    EndpointInConditioningSet(VariableId),
}

/// Immutable causal DAG with typed nodes.
#[derive(Clone, PartialEq, Debug)]
pub struct CausalGraph {
    nodes: Vec<(VariableId, NodeKind)>,
    index: HashMap<VariableId, usize>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl CausalGraph {
    pub fn new(
        nodes: Vec<(VariableId, NodeKind)>,
        edges: Vec<(VariableId, VariableId)>,
    ) -> Result<Self, GraphError> {
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, (id, _)) in nodes.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(GraphError::DuplicateNode(id.clone()));
            }
        }
        let mut parents = vec![Vec::new(); nodes.len()];
        let mut children = vec![Vec::new(); nodes.len()];
        for (from, to) in &edges {
            let fi = *index
                .get(from)
                .ok_or_else(|| GraphError::UnknownEdgeEndpoint(from.clone()))?;
            let ti = *index
                .get(to)
                .ok_or_else(|| GraphError::UnknownEdgeEndpoint(to.clone()))?;
            children[fi].push(ti);
            parents[ti].push(fi);
        }
        for v in parents.iter_mut().chain(children.iter_mut()) {
            v.sort_unstable();
            v.dedup();
        }
        for (i, (id, kind)) in nodes.iter().enumerate() {
            if matches!(kind, NodeKind::Exogenous) && !parents[i].is_empty() {
                return Err(GraphError::ExogenousWithParents(id.clone()));
            }
        }
        let g = CausalGraph {
            nodes,
            index,
            parents,
            children,
        };
        if g.topo_sort().is_none() {
            return Err(GraphError::Cycle);
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = &VariableId> {
        self.nodes.iter().map(|(id, _)| id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&VariableId, NodeKind)> {
        self.nodes.iter().map(|(id, k)| (id, *k))
    }

    pub fn kind_of(&self, id: &VariableId) -> Option<NodeKind> {
        self.index.get(id).map(|&i| self.nodes[i].1)
    }

    pub fn contains(&self, id: &VariableId) -> bool {
        self.index.contains_key(id)
    }

    pub fn edges(&self) -> impl Iterator<Item = (&VariableId, &VariableId)> {
        self.children.iter().enumerate().flat_map(move |(i, cs)| {
            cs.iter()
                .map(move |&c| (&self.nodes[i].0, &self.nodes[c].0))
        })
    }

    pub fn parents_of(&self, id: &VariableId) -> Result<Vec<&VariableId>, GraphError> {
        let i = self.idx(id)?;
        Ok(self.parents[i].iter().map(|&p| &self.nodes[p].0).collect())
    }

    pub fn children_of(&self, id: &VariableId) -> Result<Vec<&VariableId>, GraphError> {
        let i = self.idx(id)?;
        Ok(self.children[i].iter().map(|&c| &self.nodes[c].0).collect())
    }

    fn idx(&self, id: &VariableId) -> Result<usize, GraphError> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| GraphError::UnknownNode(id.clone()))
    }

    fn topo_sort(&self) -> Option<Vec<usize>> {
        let n = self.nodes.len();
        let mut indegree: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = queue.pop_front() {
            order.push(i);
            for &c in &self.children[i] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    queue.push_back(c);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// All nodes reachable from `v` by directed edges, excluding `v` itself.
    pub fn descendants(&self, v: &VariableId) -> Result<BTreeSet<VariableId>, GraphError> {
        let start = self.idx(v)?;
        let mut out = BTreeSet::new();
        let mut stack = vec![start];
        let mut seen = vec![false; self.nodes.len()];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            for &c in &self.children[i] {
                if !seen[c] {
                    seen[c] = true;
                    out.insert(self.nodes[c].0.clone());
                    stack.push(c);
                }
            }
        }
        Ok(out)
    }

    /// Mask of nodes that are in `seeds` or have a descendant in `seeds`.
    fn ancestors_or_self_mask(&self, seeds: &[usize]) -> Vec<bool> {
        let mut mask = vec![false; self.nodes.len()];
        let mut stack: Vec<usize> = Vec::new();
        for &s in seeds {
            if !mask[s] {
                mask[s] = true;
                stack.push(s);
            }
        }
        while let Some(i) = stack.pop() {
            for &p in &self.parents[i] {
                if !mask[p] {
                    mask[p] = true;
                    stack.push(p);
                }
            }
        }
        mask
    }

    fn check_query(
        &self,
        a: &VariableId,
        b: &VariableId,
        cond: &BTreeSet<VariableId>,
    ) -> Result<(usize, usize, Vec<usize>), GraphError> {
        if a == b {
            return Err(GraphError::SameEndpoints);
        }
        let ai = self.idx(a)?;
        let bi = self.idx(b)?;
        let mut ci = Vec::with_capacity(cond.len());
        for c in cond {
            if c == a || c == b {
                return Err(GraphError::EndpointInConditioningSet(c.clone()));
            }
            ci.push(self.idx(c)?);
        }
        Ok((ai, bi, ci))
    }

    /// Reachability-based d-separation: breadth-first walk over
    /// (node, arrival-direction) states with the chain/fork/collider rules.
    ///
    /// When the endpoints are d-connected, the witness is the
    /// lexicographically first unblocked simple path.
    pub fn d_separated(
        &self,
        a: &VariableId,
        b: &VariableId,
        cond: &BTreeSet<VariableId>,
    ) -> Result<SeparationVerdict, GraphError> {
        let (ai, bi, ci) = self.check_query(a, b, cond)?;
        let in_cond = {
            let mut m = vec![false; self.nodes.len()];
            for &c in &ci {
                m[c] = true;
            }
            m
        };
        // Collider openness: middle node or one of its descendants conditioned.
        let opens_collider = self.ancestors_or_self_mask(&ci);

        // State (node, arrival): Down = entered along an edge pointing at the
        // node, Up = entered against an edge (from one of its children).
        let n = self.nodes.len();
        let mut seen_down = vec![false; n];
        let mut seen_up = vec![false; n];
        let mut queue: VecDeque<(usize, bool)> = VecDeque::new();
        // Leaving the source is unconstrained.
        for &c in &self.children[ai] {
            if !seen_down[c] {
                seen_down[c] = true;
                queue.push_back((c, true));
            }
        }
        for &p in &self.parents[ai] {
            if !seen_up[p] {
                seen_up[p] = true;
                queue.push_back((p, false));
            }
        }
        let mut connected = false;
        while let Some((v, down)) = queue.pop_front() {
            if v == bi {
                connected = true;
                break;
            }
            if down {
                // Arrived at v along an incoming edge.
                if !in_cond[v] {
                    // Chain v -> child continues downward.
                    for &c in &self.children[v] {
                        if !seen_down[c] {
                            seen_down[c] = true;
                            queue.push_back((c, true));
                        }
                    }
                }
                if opens_collider[v] {
                    // Collider at v is open; bounce up to parents.
                    for &p in &self.parents[v] {
                        if !seen_up[p] {
                            seen_up[p] = true;
                            queue.push_back((p, false));
                        }
                    }
                }
            } else if !in_cond[v] {
                // Arrived from a child; fork and chain both pass when v is
                // unconditioned.
                for &c in &self.children[v] {
                    if !seen_down[c] {
                        seen_down[c] = true;
                        queue.push_back((c, true));
                    }
                }
                for &p in &self.parents[v] {
                    if !seen_up[p] {
                        seen_up[p] = true;
                        queue.push_back((p, false));
                    }
                }
            }
        }
        if !connected {
            return Ok(SeparationVerdict {
                separated: true,
                witness: None,
            });
        }
        let witness = self
            .all_paths(a, b)?
            .into_iter()
            .find(|p| !self.path_blocked(p, cond).expect("path from this graph"));
        debug_assert!(witness.is_some(), "reachability and path oracle disagree");
        Ok(SeparationVerdict {
            separated: false,
            witness,
        })
    }

    /// Every simple path between `a` and `b` in the undirected skeleton,
    /// ordered lexicographically by node-name sequence.
    pub fn all_paths(&self, a: &VariableId, b: &VariableId) -> Result<Vec<Path>, GraphError> {
        if a == b {
            return Err(GraphError::SameEndpoints);
        }
        let ai = self.idx(a)?;
        let bi = self.idx(b)?;
        // Undirected neighbors with the step direction, sorted by node name
        // so DFS emits paths in lexicographic order.
        let mut neighbors: Vec<Vec<(usize, StepDir)>> = vec![Vec::new(); self.nodes.len()];
        for (i, nb) in neighbors.iter_mut().enumerate() {
            for &c in &self.children[i] {
                nb.push((c, StepDir::Forward));
            }
            for &p in &self.parents[i] {
                nb.push((p, StepDir::Backward));
            }
            nb.sort_by(|(x, _), (y, _)| self.nodes[*x].0.cmp(&self.nodes[*y].0));
        }

        let mut out = Vec::new();
        let mut on_path = vec![false; self.nodes.len()];
        let mut nodes = vec![ai];
        let mut dirs: Vec<StepDir> = Vec::new();
        on_path[ai] = true;
        self.dfs_paths(
            ai,
            bi,
            &neighbors,
            &mut on_path,
            &mut nodes,
            &mut dirs,
            &mut out,
        );
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs_paths(
        &self,
        cur: usize,
        target: usize,
        neighbors: &[Vec<(usize, StepDir)>],
        on_path: &mut Vec<bool>,
        nodes: &mut Vec<usize>,
        dirs: &mut Vec<StepDir>,
        out: &mut Vec<Path>,
    ) {
        if cur == target {
            out.push(Path {
                nodes: nodes.iter().map(|&i| self.nodes[i].0.clone()).collect(),
                dirs: dirs.clone(),
            });
            return;
        }
        for &(next, dir) in &neighbors[cur] {
            if on_path[next] {
                continue;
            }
            on_path[next] = true;
            nodes.push(next);
            dirs.push(dir);
            self.dfs_paths(next, target, neighbors, on_path, nodes, dirs, out);
            dirs.pop();
            nodes.pop();
            on_path[next] = false;
        }
    }

    /// Whether a path is blocked by `cond`, applying the d-separation rules
    /// triple by triple.
    pub fn path_blocked(
        &self,
        path: &Path,
        cond: &BTreeSet<VariableId>,
    ) -> Result<bool, GraphError> {
        let ci: Vec<usize> = cond.iter().map(|c| self.idx(c)).collect::<Result<_, _>>()?;
        let opens_collider = self.ancestors_or_self_mask(&ci);
        for t in 1..path.nodes.len().saturating_sub(1) {
            let mid = &path.nodes[t];
            let mid_idx = self.idx(mid)?;
            let into_mid = path.dirs[t - 1] == StepDir::Forward;
            let out_of_mid = path.dirs[t] == StepDir::Forward;
            let is_collider = into_mid && !out_of_mid;
            if is_collider {
                if !opens_collider[mid_idx] {
                    return Ok(true);
                }
            } else if cond.contains(mid) {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Slow d-separation oracle: enumerate every simple path and apply the
    /// blocking rules clause by clause. Independent of [`Self::d_separated`].
    pub fn d_separated_naive(
        &self,
        a: &VariableId,
        b: &VariableId,
        cond: &BTreeSet<VariableId>,
    ) -> Result<SeparationVerdict, GraphError> {
        self.check_query(a, b, cond)?;
        let witness = self
            .all_paths(a, b)?
            .into_iter()
            .find(|p| !self.path_blocked(p, cond).expect("path from this graph"));
        Ok(SeparationVerdict {
            separated: witness.is_none(),
            witness,
        })
    }

    /// Back-door criterion for (`x`, `y`): no member of `z` is a descendant
    /// of `x`, and `z` blocks every path from `x` to `y` that starts with an
    /// edge into `x`.
    pub fn backdoor_admissible(
        &self,
        x: &VariableId,
        y: &VariableId,
        z: &BTreeSet<VariableId>,
    ) -> Result<bool, GraphError> {
        self.check_query(x, y, z)?;
        let desc = self.descendants(x)?;
        if z.iter().any(|m| desc.contains(m)) {
            return Ok(false);
        }
        for path in self.all_paths(x, y)? {
            let starts_into_x = path.dirs[0] == StepDir::Backward;
            if starts_into_x && !self.path_blocked(&path, z)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Direction of one step along a path: `Forward` follows the edge.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StepDir {
    Forward,
    Backward,
}

/// Simple path through the undirected skeleton, with edge directions.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Path {
    nodes: Vec<VariableId>,
    dirs: Vec<StepDir>,
}

impl Path {
    pub fn nodes(&self) -> &[VariableId] {
        &self.nodes
    }

    pub fn dirs(&self) -> &[StepDir] {
        &self.dirs
    }

    pub fn len_edges(&self) -> usize {
        self.dirs.len()
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, node) in self.nodes.iter().enumerate() {
            if i > 0 {
                let arrow = match self.dirs[i - 1] {
                    StepDir::Forward => " -> ",
                    StepDir::Backward => " <- ",
                };
                f.write_str(arrow)?;
            }
            write!(f, "{node}")?;
        }
        Ok(())
    }
}

/// Outcome of a d-separation query.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SeparationVerdict {
    pub separated: bool,
    /// An unblocked path, present exactly when `separated` is false.
    pub witness: Option<Path>,
}
