//! Sparse ADtree baseline.
//!
//! AD nodes hold the count of a conjunction; each has one vary node per
//! variable with a larger index. A vary node splits its parent's rows by the
//! variable's state, keeping a child AD node for every non-empty state except
//! the most common one (MCV), whose counts are recovered by subtraction. Nodes
//! covering at most `leaf_threshold` rows keep their row indexes instead of
//! children and are counted on demand.

use std::collections::HashMap;

use crate::aggregate::Aggregator;
use crate::bitmap::emit;
use crate::data::{Database, State};
use crate::error::{Error, Result};
use crate::query::{Assignment, QuerySpec};

pub const DEFAULT_LEAF_THRESHOLD: usize = 16;
pub const DEFAULT_NODE_CAP: usize = 1 << 26;

const ABSENT: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdTreeParams {
    pub leaf_threshold: usize,
    /// Maximum number of AD plus vary nodes before the build gives up.
    pub node_cap: usize,
}

impl Default for AdTreeParams {
    fn default() -> Self {
        AdTreeParams { leaf_threshold: DEFAULT_LEAF_THRESHOLD, node_cap: DEFAULT_NODE_CAP }
    }
}

#[derive(Debug, Clone)]
struct AdNode {
    count: u64,
    /// Vary nodes exist for variables `first_var..n`.
    first_var: u32,
    body: AdBody,
}

#[derive(Debug, Clone)]
enum AdBody {
    Leaf(Box<[u32]>),
    /// Index of the vary node for `first_var`; the rest follow contiguously.
    Vary(u32),
}

#[derive(Debug, Clone)]
struct VaryNode {
    mcv: State,
    /// Child AD node per state, `ABSENT` for the MCV and empty states.
    children: Box<[u32]>,
}

#[derive(Debug, Clone)]
pub struct AdTree {
    nodes: Vec<AdNode>,
    vary: Vec<VaryNode>,
    params: AdTreeParams,
    n: usize,
}

/// Contingency table keyed by states in reverse variable order.
type Contab = HashMap<Vec<State>, u64>;

impl AdTree {
    pub fn build(db: &Database, params: AdTreeParams) -> Result<Self> {
        let mut tree = AdTree { nodes: Vec::new(), vary: Vec::new(), params, n: db.n() };
        let all: Vec<u32> = (0..db.m() as u32).collect();
        tree.make_ad(db, 0, all)?;
        Ok(tree)
    }

    pub fn params(&self) -> AdTreeParams {
        self.params
    }

    pub fn ad_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn vary_nodes(&self) -> usize {
        self.vary.len()
    }

    pub fn leaf_lists(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n.body, AdBody::Leaf(_))).count()
    }

    pub fn root_count(&self) -> u64 {
        self.nodes[0].count
    }

    pub fn root_is_leaf_list(&self) -> bool {
        matches!(self.nodes[0].body, AdBody::Leaf(_))
    }

    fn reserve(&self, extra: usize) -> Result<()> {
        if self.nodes.len() + self.vary.len() + extra > self.params.node_cap {
            Err(Error::AdTreeNodeCap { cap: self.params.node_cap })
        } else {
            Ok(())
        }
    }

    fn make_ad(&mut self, db: &Database, first_var: usize, rows: Vec<u32>) -> Result<u32> {
        self.reserve(1)?;
        let id = self.nodes.len() as u32;
        let count = rows.len() as u64;
        if rows.len() <= self.params.leaf_threshold {
            self.nodes.push(AdNode {
                count,
                first_var: first_var as u32,
                body: AdBody::Leaf(rows.into_boxed_slice()),
            });
            return Ok(id);
        }
        let vary_count = self.n - first_var;
        self.reserve(1 + vary_count)?;
        let start = self.vary.len() as u32;
        self.nodes.push(AdNode { count, first_var: first_var as u32, body: AdBody::Vary(start) });
        for _ in 0..vary_count {
            self.vary.push(VaryNode { mcv: 0, children: Box::new([]) });
        }
        for var in first_var..self.n {
            let slot = start as usize + (var - first_var);
            self.vary[slot] = self.make_vary(db, var, &rows)?;
        }
        Ok(id)
    }

    fn make_vary(&mut self, db: &Database, var: usize, rows: &[u32]) -> Result<VaryNode> {
        let col = db.column(var);
        let mut groups: Vec<Vec<u32>> = vec![Vec::new(); db.arity(var)];
        for &r in rows {
            groups[col[r as usize] as usize].push(r);
        }
        let mut mcv = 0;
        for (s, g) in groups.iter().enumerate() {
            if g.len() > groups[mcv].len() {
                mcv = s;
            }
        }
        let mut children = vec![ABSENT; groups.len()];
        for (s, g) in groups.into_iter().enumerate() {
            if s != mcv && !g.is_empty() {
                children[s] = self.make_ad(db, var + 1, g)?;
            }
        }
        Ok(VaryNode { mcv: mcv as State, children: children.into_boxed_slice() })
    }

    fn vary_of(&self, node: &AdNode, start: u32, var: usize) -> &VaryNode {
        &self.vary[start as usize + var - node.first_var as usize]
    }

    /// Count of rows matching `pairs`, which must be sorted by variable.
    fn count_sorted(&self, db: &Database, id: u32, pairs: &[(usize, State)]) -> u64 {
        let node = &self.nodes[id as usize];
        let Some(&(var, state)) = pairs.first() else {
            return node.count;
        };
        match &node.body {
            AdBody::Leaf(rows) => {
                rows.iter().filter(|&&r| pairs.iter().all(|&(v, s)| db.column(v)[r as usize] == s)).count()
                    as u64
            }
            AdBody::Vary(start) => {
                let vary = self.vary_of(node, *start, var);
                let rest = &pairs[1..];
                if state == vary.mcv {
                    let marginal = self.count_sorted(db, id, rest);
                    let explicit: u64 = vary
                        .children
                        .iter()
                        .filter(|&&c| c != ABSENT)
                        .map(|&c| self.count_sorted(db, c, rest))
                        .sum();
                    marginal - explicit
                } else {
                    match vary.children[state as usize] {
                        ABSENT => 0,
                        c => self.count_sorted(db, c, rest),
                    }
                }
            }
        }
    }

    /// Rows matching `a`.
    pub fn count(&self, db: &Database, a: &Assignment) -> Result<u64> {
        a.validate(db)?;
        Ok(self.count_sorted(db, 0, &a.sorted()))
    }

    /// Contingency table over `vars` (ascending) below node `id`. Only
    /// non-zero cells are present.
    fn contab(&self, db: &Database, id: u32, vars: &[usize]) -> Contab {
        let node = &self.nodes[id as usize];
        let mut out = Contab::new();
        let Some(&var) = vars.first() else {
            out.insert(Vec::new(), node.count);
            return out;
        };
        match &node.body {
            AdBody::Leaf(rows) => {
                for &r in rows.iter() {
                    let key: Vec<State> = vars.iter().rev().map(|&v| db.column(v)[r as usize]).collect();
                    *out.entry(key).or_insert(0) += 1;
                }
            }
            AdBody::Vary(start) => {
                let vary = self.vary_of(node, *start, var);
                let rest = &vars[1..];
                let mut mcv_cells = self.contab(db, id, rest);
                for (s, &c) in vary.children.iter().enumerate() {
                    if c == ABSENT {
                        continue;
                    }
                    for (mut key, v) in self.contab(db, c, rest) {
                        let left = mcv_cells.get_mut(&key).expect("child cell missing from marginal");
                        *left -= v;
                        key.push(s as State);
                        out.insert(key, v);
                    }
                }
                for (mut key, v) in mcv_cells {
                    if v > 0 {
                        key.push(vary.mcv);
                        out.insert(key, v);
                    }
                }
            }
        }
        out
    }

    /// Materialises the contingency table of `q` and streams its non-zero
    /// cells into `agg`.
    pub fn query<A: Aggregator>(&self, db: &Database, q: &QuerySpec, agg: &mut A) -> Result<()> {
        q.validate(db.n())?;
        let mut vars: Vec<usize> = q.parents().to_vec();
        vars.push(q.target());
        vars.sort_unstable();
        // Position of each query variable within the reversed contab key.
        let key_pos = |v: usize| vars.len() - 1 - vars.binary_search(&v).unwrap();
        let parent_pos: Vec<usize> = q.parents().iter().map(|&p| key_pos(p)).collect();
        let target_pos = key_pos(q.target());

        let table = self.contab(db, 0, &vars);
        let mut grouped: HashMap<Vec<State>, Vec<(State, u64)>> = HashMap::new();
        for (key, count) in table {
            let parents: Vec<State> = parent_pos.iter().map(|&i| key[i]).collect();
            grouped.entry(parents).or_default().push((key[target_pos], count));
        }
        for (parents, cells) in grouped {
            let nij: u64 = cells.iter().map(|c| c.1).sum();
            for (t, nijk) in cells {
                emit(agg, &parents, t, nijk, nij)?;
            }
        }
        Ok(())
    }

    /// Structural checks: MCV counts non-negative and maximal, leaf lists
    /// exactly where the count is at most the threshold, children's variables
    /// increasing.
    pub fn check_invariants(&self, db: &Database) -> std::result::Result<(), String> {
        for (id, node) in self.nodes.iter().enumerate() {
            let is_leaf = matches!(node.body, AdBody::Leaf(_));
            if (node.count as usize <= self.params.leaf_threshold) != is_leaf {
                return Err(format!("node {id}: count {} vs leaf={is_leaf}", node.count));
            }
            let AdBody::Vary(start) = node.body else { continue };
            for var in node.first_var as usize..self.n {
                let vary = self.vary_of(node, start, var);
                if vary.children.len() != db.arity(var) {
                    return Err(format!("node {id}: vary {var} has wrong fan-out"));
                }
                if vary.children[vary.mcv as usize] != ABSENT {
                    return Err(format!("node {id}: MCV child of {var} materialised"));
                }
                let mut explicit = 0u64;
                for &c in vary.children.iter().filter(|&&c| c != ABSENT) {
                    let child = &self.nodes[c as usize];
                    if child.first_var as usize != var + 1 {
                        return Err(format!("node {c}: variable order broken"));
                    }
                    explicit += child.count;
                }
                let Some(mcv_count) = node.count.checked_sub(explicit) else {
                    return Err(format!("node {id}: negative MCV count for {var}"));
                };
                if vary
                    .children
                    .iter()
                    .filter(|&&c| c != ABSENT)
                    .any(|&c| self.nodes[c as usize].count > mcv_count)
                {
                    return Err(format!("node {id}: MCV of {var} is not most common"));
                }
            }
        }
        Ok(())
    }

    /// MCV state of the root's vary node for `var`, if the root is expanded.
    pub fn root_mcv(&self, var: usize) -> Option<State> {
        match self.nodes[0].body {
            AdBody::Vary(start) => Some(self.vary_of(&self.nodes[0], start, var).mcv),
            AdBody::Leaf(_) => None,
        }
    }

    /// MCV of `var`'s vary node under the AD node reached by following
    /// `path` (non-MCV states only). `None` if the path leaves the tree.
    pub fn mcv_at(&self, path: &[(usize, State)], var: usize) -> Option<State> {
        let mut id = 0u32;
        for &(v, s) in path {
            let node = &self.nodes[id as usize];
            let AdBody::Vary(start) = node.body else { return None };
            let vary = self.vary_of(node, start, v);
            match vary.children.get(s as usize) {
                Some(&c) if c != ABSENT => id = c,
                _ => return None,
            }
        }
        let node = &self.nodes[id as usize];
        match node.body {
            AdBody::Vary(start) if var >= node.first_var as usize && var < self.n => {
                Some(self.vary_of(node, start, var).mcv)
            }
            _ => None,
        }
    }
}

/// ADtree strategy: the tree plus the database its leaf lists point into.
#[derive(Debug, Clone)]
pub struct AdTreeEngine<'a> {
    db: &'a Database,
    tree: AdTree,
}

impl<'a> AdTreeEngine<'a> {
    pub fn build(db: &'a Database, params: AdTreeParams) -> Result<Self> {
        Ok(AdTreeEngine { db, tree: AdTree::build(db, params)? })
    }

    pub fn tree(&self) -> &AdTree {
        &self.tree
    }

    pub fn query<A: Aggregator>(&self, q: &QuerySpec, agg: &mut A) -> Result<()> {
        self.tree.query(self.db, q, agg)
    }

    pub fn count(&self, a: &Assignment) -> Result<u64> {
        self.tree.count(self.db, a)
    }
}

pub fn build_adtree(db: &Database, params: AdTreeParams) -> Result<AdTree> {
    AdTree::build(db, params)
}

pub fn adtree_count(tree: &AdTree, db: &Database, a: &Assignment) -> Result<u64> {
    tree.count(db, a)
}

/// Fails with a usage error when no tree was built.
pub fn adtree_query<A: Aggregator>(
    tree: Option<&AdTree>,
    db: &Database,
    q: &QuerySpec,
    mut agg: A,
) -> Result<A::Output> {
    let tree = tree.ok_or_else(|| Error::InvalidParameter("ADtree was not built".into()))?;
    tree.query(db, q, &mut agg)?;
    Ok(agg.result())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregate::RecordCollector;
    use crate::oracle::{oracle_count, oracle_query};

    fn fixture() -> Database {
        let rows: Vec<Vec<State>> =
            [[1, 1, 1], [1, 2, 1], [2, 1, 2], [2, 2, 1], [3, 2, 1], [3, 2, 1], [3, 1, 2], [2, 1, 1]]
                .iter()
                .map(|r| r.iter().map(|&s| s - 1).collect())
                .collect();
        Database::from_rows(&rows, None).unwrap()
    }

    fn params(leaf_threshold: usize) -> AdTreeParams {
        AdTreeParams { leaf_threshold, ..Default::default() }
    }

    #[test]
    fn full_expansion_on_fixture() {
        let db = fixture();
        let tree = AdTree::build(&db, params(0)).unwrap();
        assert_eq!(tree.root_count(), 8);
        assert_eq!(tree.leaf_lists(), 0);
        tree.check_invariants(&db).unwrap();
        for var in 0..3 {
            for s in 0..db.arity(var) as State {
                let a = Assignment::new(vec![(var, s)]).unwrap();
                assert_eq!(tree.count(&db, &a).unwrap(), oracle_count(&db, &a).unwrap());
            }
        }
        let a = Assignment::new(vec![(0, 2), (1, 1), (2, 0)]).unwrap();
        assert_eq!(tree.count(&db, &a).unwrap(), 2);
    }

    #[test]
    fn large_threshold_gives_single_leaf() {
        let db = fixture();
        for l in [8, 16, 100] {
            let tree = AdTree::build(&db, params(l)).unwrap();
            assert!(tree.root_is_leaf_list());
            assert_eq!(tree.ad_nodes(), 1);
            let q = QuerySpec::new(1, vec![0, 2]).unwrap();
            let mut c = RecordCollector::new();
            tree.query(&db, &q, &mut c).unwrap();
            assert_eq!(c.result(), oracle_query(&db, &q).unwrap());
        }
    }

    #[test]
    fn mcv_only_assignment_uses_subtraction() {
        let db = fixture();
        let tree = AdTree::build(&db, params(0)).unwrap();
        // Root MCVs: X1 ties between states 1 and 2 (3 rows each) -> 1;
        // X2 ties 4/4 -> 0; X3 -> 0.
        assert_eq!(tree.root_mcv(0), Some(1));
        assert_eq!(tree.root_mcv(1), Some(0));
        assert_eq!(tree.root_mcv(2), Some(0));
        let a = Assignment::new(vec![(0, 1), (1, 0), (2, 0)]).unwrap();
        assert_eq!(tree.count(&db, &a).unwrap(), oracle_count(&db, &a).unwrap());
    }

    #[test]
    fn node_cap_is_enforced() {
        let db = crate::data::generate_synthetic(12, 400, &crate::data::Arities::Uniform(3), 2).unwrap();
        let err = AdTree::build(&db, AdTreeParams { leaf_threshold: 0, node_cap: 100 }).unwrap_err();
        assert!(matches!(err, Error::AdTreeNodeCap { cap: 100 }));
    }

    #[test]
    fn query_without_tree_is_usage_error() {
        let db = fixture();
        let q = QuerySpec::new(0, vec![]).unwrap();
        assert!(matches!(
            adtree_query(None, &db, &q, RecordCollector::new()),
            Err(Error::InvalidParameter(_))
        ));
    }
}
