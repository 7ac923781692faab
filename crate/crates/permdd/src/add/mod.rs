//! Reduced, ordered, hash-consed algebraic decision diagrams over
//! arbitrary-precision integer terminals.
//!
//! An ADD names a total function `f: 2^X -> Z` over a fixed set of Boolean
//! column variables. All nodes live in an [`AddManager`]; an [`AddRef`] is a
//! cheap handle to a root node inside one manager. Canonicity is maintained
//! structurally: internal nodes satisfy `low != high`, variable labels occur
//! in strictly increasing diagram order on every path, and no two live nodes
//! share a `(variable, low, high)` triple or a terminal value. Two references
//! denote the same function if and only if they hold the same node id.

mod dot;

use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rustc_hash::FxHashMap;
use thiserror::Error;

pub use dot::write_dot;

/// A column variable, identified by its 0-based column index.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Var(pub u32);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for Var {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "x{}", self.0 + 1)
    }
}

/// Identifier of a node within one manager. The high bit selects between the
/// internal-node arena and the terminal arena.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct NodeId(u32);

const TERM_BIT: u32 = 1 << 31;

impl NodeId {
    fn internal(ix: usize) -> NodeId {
        debug_assert!((ix as u32) < TERM_BIT);
        NodeId(ix as u32)
    }

    fn terminal(ix: usize) -> NodeId {
        debug_assert!((ix as u32) < TERM_BIT);
        NodeId(ix as u32 | TERM_BIT)
    }

    pub fn is_terminal(self) -> bool {
        self.0 & TERM_BIT != 0
    }

    pub(crate) fn index(self) -> usize {
        (self.0 & !TERM_BIT) as usize
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct InternalNode {
    var: Var,
    lo: NodeId,
    hi: NodeId,
}

/// A handle to an ADD rooted at `root` inside the manager that produced it.
///
/// Handles are plain copies; passing one to a different manager is a
/// programming error and panics.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct AddRef {
    manager: u64,
    root: NodeId,
}

impl AddRef {
    pub fn root(self) -> NodeId {
        self.root
    }
}

/// The diagram variable order pi: a bijective ranking of the column
/// variables. Also reused as the cluster rank-order eta by the permanent
/// algorithms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableOrder {
    vars: Vec<Var>,
    rank: Vec<u32>,
}

impl VariableOrder {
    /// Column-index order: `x_1 < x_2 < ... < x_n`.
    pub fn identity(n: usize) -> VariableOrder {
        VariableOrder::from_vars((0..n as u32).map(Var).collect())
    }

    /// Builds an order from the variable sequence `vars[0] < vars[1] < ...`.
    /// Panics unless `vars` is a permutation of `0..vars.len()`.
    pub fn from_vars(vars: Vec<Var>) -> VariableOrder {
        let n = vars.len();
        let mut rank = vec![u32::MAX; n];
        for (pos, v) in vars.iter().enumerate() {
            assert!(v.index() < n, "variable {v} out of range for order of size {n}");
            assert!(rank[v.index()] == u32::MAX, "variable {v} listed twice");
            rank[v.index()] = pos as u32;
        }
        VariableOrder { vars, rank }
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    /// 0-based position of `v` in the order.
    pub fn rank(&self, v: Var) -> u32 {
        self.rank[v.index()]
    }

    pub fn contains(&self, v: Var) -> bool {
        v.index() < self.rank.len()
    }

    /// Variables from first to last.
    pub fn vars(&self) -> &[Var] {
        &self.vars
    }
}

/// Resource limits enforced cooperatively inside the apply loops.
#[derive(Clone, Copy, Debug)]
pub struct Limits {
    /// Maximum number of live nodes (internal + terminal).
    pub node_budget: usize,
    /// Wall-clock deadline checked every 2^16 cache operations.
    pub deadline: Option<Instant>,
}

impl Default for Limits {
    fn default() -> Limits {
        Limits {
            node_budget: DEFAULT_NODE_BUDGET,
            deadline: None,
        }
    }
}

/// Default live-node budget: exceeding it is an error, not a crash.
pub const DEFAULT_NODE_BUDGET: usize = 50_000_000;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum AddError {
    #[error("node budget of {budget} live nodes exceeded")]
    NodeBudgetExceeded { budget: usize },
    #[error("wall-clock deadline exceeded")]
    TimedOut,
    #[error("ite condition has terminal value {value}, expected 0 or 1")]
    NotBoolean { value: BigInt },
    #[error("variable {0} listed twice")]
    DuplicateVariable(Var),
    #[error("variable {0} is not part of the diagram order")]
    UnknownVariable(Var),
    #[error("empty variable list")]
    EmptyVariableList,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum BinOp {
    Sum,
    Product,
    Xor,
}

static NEXT_MANAGER_ID: std::sync::atomic::AtomicU64 = std::sync::atomic::AtomicU64::new(0);

/// Hash-consed store of ADD nodes for one diagram variable order.
///
/// A manager is single-threaded; run concurrent computations on separate
/// managers. There is no intra-instance garbage collection. [`AddManager::reset`]
/// drops every node and cache between instances.
pub struct AddManager {
    id: u64,
    order: VariableOrder,
    internals: Vec<InternalNode>,
    unique: FxHashMap<InternalNode, u32>,
    terminals: Vec<BigInt>,
    term_ids: FxHashMap<BigInt, u32>,
    bin_cache: FxHashMap<(BinOp, NodeId, NodeId), NodeId>,
    ite_cache: FxHashMap<(NodeId, NodeId, NodeId), NodeId>,
    abs_cache: FxHashMap<(NodeId, Var), NodeId>,
    zero: NodeId,
    one: NodeId,
    limits: Limits,
    cache_ops: u64,
    peak_nodes: usize,
    total_created: usize,
}

/// Deadline poll interval, in cache operations.
const TICK_MASK: u64 = (1 << 16) - 1;

impl AddManager {
    pub fn new(order: VariableOrder) -> AddManager {
        AddManager::with_limits(order, Limits::default())
    }

    pub fn with_limits(order: VariableOrder, limits: Limits) -> AddManager {
        let id = NEXT_MANAGER_ID.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        let mut mgr = AddManager {
            id,
            order,
            internals: Vec::new(),
            unique: FxHashMap::default(),
            terminals: Vec::new(),
            term_ids: FxHashMap::default(),
            bin_cache: FxHashMap::default(),
            ite_cache: FxHashMap::default(),
            abs_cache: FxHashMap::default(),
            zero: NodeId::terminal(0),
            one: NodeId::terminal(0),
            limits,
            cache_ops: 0,
            peak_nodes: 0,
            total_created: 0,
        };
        mgr.zero = mgr.mk_terminal(BigInt::zero()).expect("budget allows 2 nodes");
        mgr.one = mgr.mk_terminal(BigInt::one()).expect("budget allows 2 nodes");
        mgr
    }

    pub fn order(&self) -> &VariableOrder {
        &self.order
    }

    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.limits.deadline = deadline;
    }

    /// Live nodes (internal + terminal) currently in the store.
    pub fn live_nodes(&self) -> usize {
        self.internals.len() + self.terminals.len()
    }

    /// High-water mark of [`AddManager::live_nodes`]; never below the current count.
    pub fn peak_nodes(&self) -> usize {
        self.peak_nodes
    }

    /// Total nodes ever created, across resets.
    pub fn total_created(&self) -> usize {
        self.total_created
    }

    /// Drops every node and cache. Handles from before the reset are invalid.
    pub fn reset(&mut self) {
        self.internals.clear();
        self.unique.clear();
        self.terminals.clear();
        self.term_ids.clear();
        self.bin_cache.clear();
        self.ite_cache.clear();
        self.abs_cache.clear();
        self.zero = self.mk_terminal(BigInt::zero()).expect("budget allows 2 nodes");
        self.one = self.mk_terminal(BigInt::one()).expect("budget allows 2 nodes");
    }

    fn wrap(&self, root: NodeId) -> AddRef {
        AddRef { manager: self.id, root }
    }

    fn unwrap(&self, f: AddRef) -> NodeId {
        assert_eq!(f.manager, self.id, "AddRef used with a foreign manager");
        f.root
    }

    fn tick(&mut self) -> Result<(), AddError> {
        self.cache_ops += 1;
        if self.cache_ops & TICK_MASK == 0 {
            self.check_deadline()?;
        }
        Ok(())
    }

    fn check_deadline(&self) -> Result<(), AddError> {
        match self.limits.deadline {
            Some(d) if Instant::now() >= d => Err(AddError::TimedOut),
            _ => Ok(()),
        }
    }

    fn budget_check(&self) -> Result<(), AddError> {
        if self.live_nodes() >= self.limits.node_budget {
            Err(AddError::NodeBudgetExceeded {
                budget: self.limits.node_budget,
            })
        } else {
            Ok(())
        }
    }

    fn mk_terminal(&mut self, v: BigInt) -> Result<NodeId, AddError> {
        if let Some(&ix) = self.term_ids.get(&v) {
            return Ok(NodeId::terminal(ix as usize));
        }
        self.budget_check()?;
        let ix = self.terminals.len();
        self.terminals.push(v.clone());
        self.term_ids.insert(v, ix as u32);
        self.total_created += 1;
        self.peak_nodes = self.peak_nodes.max(self.live_nodes());
        Ok(NodeId::terminal(ix))
    }

    fn mk_node(&mut self, var: Var, lo: NodeId, hi: NodeId) -> Result<NodeId, AddError> {
        if lo == hi {
            return Ok(lo);
        }
        let node = InternalNode { var, lo, hi };
        if let Some(&ix) = self.unique.get(&node) {
            return Ok(NodeId::internal(ix as usize));
        }
        self.budget_check()?;
        let ix = self.internals.len();
        self.internals.push(node);
        self.unique.insert(node, ix as u32);
        self.total_created += 1;
        self.peak_nodes = self.peak_nodes.max(self.live_nodes());
        Ok(NodeId::internal(ix))
    }

    fn term_value(&self, id: NodeId) -> &BigInt {
        debug_assert!(id.is_terminal());
        &self.terminals[id.index()]
    }

    /// Rank of a node's top variable; terminals sort after every variable.
    fn top_rank(&self, id: NodeId) -> u32 {
        if id.is_terminal() {
            u32::MAX
        } else {
            self.order.rank(self.internals[id.index()].var)
        }
    }

    /// Both cofactors of `f` with respect to `v`, which must not lie below
    /// the top variable of `f`.
    fn cofactors(&self, f: NodeId, v: Var) -> (NodeId, NodeId) {
        if f.is_terminal() {
            return (f, f);
        }
        let node = self.internals[f.index()];
        if node.var == v {
            (node.lo, node.hi)
        } else {
            debug_assert!(self.order.rank(node.var) > self.order.rank(v));
            (f, f)
        }
    }

    /// The constant function `v`. Equal values share one node id.
    pub fn constant(&mut self, v: impl Into<BigInt>) -> Result<AddRef, AddError> {
        let id = self.mk_terminal(v.into())?;
        Ok(self.wrap(id))
    }

    /// The indicator of `x`: 1 on subsets containing `x`, 0 elsewhere.
    pub fn variable(&mut self, x: Var) -> Result<AddRef, AddError> {
        if !self.order.contains(x) {
            return Err(AddError::UnknownVariable(x));
        }
        let (zero, one) = (self.zero, self.one);
        let id = self.mk_node(x, zero, one)?;
        Ok(self.wrap(id))
    }

    /// Pointwise sum `f + g`.
    pub fn sum(&mut self, f: AddRef, g: AddRef) -> Result<AddRef, AddError> {
        let (f, g) = (self.unwrap(f), self.unwrap(g));
        let id = self.apply_bin(BinOp::Sum, f, g)?;
        Ok(self.wrap(id))
    }

    /// Pointwise product `f * g`.
    pub fn product(&mut self, f: AddRef, g: AddRef) -> Result<AddRef, AddError> {
        let (f, g) = (self.unwrap(f), self.unwrap(g));
        let id = self.apply_bin(BinOp::Product, f, g)?;
        Ok(self.wrap(id))
    }

    /// `c*g + (1-c)*h` for a 0/1-valued condition `c`.
    pub fn ite(&mut self, c: AddRef, g: AddRef, h: AddRef) -> Result<AddRef, AddError> {
        let (c, g, h) = (self.unwrap(c), self.unwrap(g), self.unwrap(h));
        self.require_boolean(c)?;
        let id = self.ite_rec(c, g, h)?;
        Ok(self.wrap(id))
    }

    /// Additive quantification: `(exists x. f)(t) = f(t) + f(t + {x})`.
    /// When `x` does not occur in `f` the result denotes `2*f`.
    pub fn abstract_sum(&mut self, f: AddRef, x: Var) -> Result<AddRef, AddError> {
        if !self.order.contains(x) {
            return Err(AddError::UnknownVariable(x));
        }
        let f = self.unwrap(f);
        let id = self.abstract_rec(f, x)?;
        Ok(self.wrap(id))
    }

    /// The 0/1-valued exclusive-or of distinct variables, combined in a
    /// balanced binary fashion to keep intermediates small.
    pub fn xor_all(&mut self, vars: &[Var]) -> Result<AddRef, AddError> {
        if vars.is_empty() {
            return Err(AddError::EmptyVariableList);
        }
        let mut seen = vec![false; self.order.len()];
        for &v in vars {
            if !self.order.contains(v) {
                return Err(AddError::UnknownVariable(v));
            }
            if seen[v.index()] {
                return Err(AddError::DuplicateVariable(v));
            }
            seen[v.index()] = true;
        }
        let id = self.xor_balanced(vars)?;
        Ok(self.wrap(id))
    }

    fn xor_balanced(&mut self, vars: &[Var]) -> Result<NodeId, AddError> {
        if vars.len() == 1 {
            let (zero, one) = (self.zero, self.one);
            return self.mk_node(vars[0], zero, one);
        }
        let (left, right) = vars.split_at(vars.len() / 2);
        let l = self.xor_balanced(left)?;
        let r = self.xor_balanced(right)?;
        self.apply_bin(BinOp::Xor, l, r)
    }

    fn apply_bin(&mut self, op: BinOp, f: NodeId, g: NodeId) -> Result<NodeId, AddError> {
        // Identity and annihilator shortcuts.
        match op {
            BinOp::Sum | BinOp::Xor => {
                if f == self.zero {
                    return Ok(g);
                }
                if g == self.zero {
                    return Ok(f);
                }
            }
            BinOp::Product => {
                if f == self.one {
                    return Ok(g);
                }
                if g == self.one {
                    return Ok(f);
                }
                if f == self.zero || g == self.zero {
                    return Ok(self.zero);
                }
            }
        }
        if f.is_terminal() && g.is_terminal() {
            let value = match op {
                BinOp::Sum => self.term_value(f) + self.term_value(g),
                BinOp::Product => self.term_value(f) * self.term_value(g),
                BinOp::Xor => {
                    // Reachable only from xor_all, which feeds 0/1 diagrams.
                    debug_assert!(f == self.one && g == self.one);
                    if self.term_value(f) == self.term_value(g) {
                        BigInt::zero()
                    } else {
                        BigInt::one()
                    }
                }
            };
            return self.mk_terminal(value);
        }
        // All three operations are commutative; order the key.
        let (f, g) = if f <= g { (f, g) } else { (g, f) };
        self.tick()?;
        if let Some(&r) = self.bin_cache.get(&(op, f, g)) {
            return Ok(r);
        }
        let rf = self.top_rank(f);
        let rg = self.top_rank(g);
        let v = if rf <= rg {
            self.internals[f.index()].var
        } else {
            self.internals[g.index()].var
        };
        let (fl, fh) = self.cofactors(f, v);
        let (gl, gh) = self.cofactors(g, v);
        let lo = self.apply_bin(op, fl, gl)?;
        let hi = self.apply_bin(op, fh, gh)?;
        let r = self.mk_node(v, lo, hi)?;
        self.bin_cache.insert((op, f, g), r);
        Ok(r)
    }

    fn ite_rec(&mut self, c: NodeId, g: NodeId, h: NodeId) -> Result<NodeId, AddError> {
        if c == self.one {
            return Ok(g);
        }
        if c == self.zero {
            return Ok(h);
        }
        debug_assert!(!c.is_terminal());
        if g == h {
            return Ok(g);
        }
        self.tick()?;
        if let Some(&r) = self.ite_cache.get(&(c, g, h)) {
            return Ok(r);
        }
        let rank = self
            .top_rank(c)
            .min(self.top_rank(g))
            .min(self.top_rank(h));
        let v = [c, g, h]
            .into_iter()
            .find(|&id| self.top_rank(id) == rank)
            .map(|id| self.internals[id.index()].var)
            .expect("some operand is internal");
        let (cl, ch) = self.cofactors(c, v);
        let (gl, gh) = self.cofactors(g, v);
        let (hl, hh) = self.cofactors(h, v);
        let lo = self.ite_rec(cl, gl, hl)?;
        let hi = self.ite_rec(ch, gh, hh)?;
        let r = self.mk_node(v, lo, hi)?;
        self.ite_cache.insert((c, g, h), r);
        Ok(r)
    }

    fn abstract_rec(&mut self, f: NodeId, x: Var) -> Result<NodeId, AddError> {
        let xr = self.order.rank(x);
        if f.is_terminal() || self.top_rank(f) > xr {
            // x absent below this point: both branches agree, so double.
            return self.apply_bin(BinOp::Sum, f, f);
        }
        let node = self.internals[f.index()];
        if node.var == x {
            return self.apply_bin(BinOp::Sum, node.lo, node.hi);
        }
        self.tick()?;
        if let Some(&r) = self.abs_cache.get(&(f, x)) {
            return Ok(r);
        }
        let lo = self.abstract_rec(node.lo, x)?;
        let hi = self.abstract_rec(node.hi, x)?;
        let r = self.mk_node(node.var, lo, hi)?;
        self.abs_cache.insert((f, x), r);
        Ok(r)
    }

    fn require_boolean(&self, c: NodeId) -> Result<(), AddError> {
        let mut stack = vec![c];
        let mut seen = FxHashMap::default();
        while let Some(id) = stack.pop() {
            if seen.insert(id, ()).is_some() {
                continue;
            }
            if id.is_terminal() {
                if id != self.zero && id != self.one {
                    return Err(AddError::NotBoolean {
                        value: self.term_value(id).clone(),
                    });
                }
            } else {
                let node = self.internals[id.index()];
                stack.push(node.lo);
                stack.push(node.hi);
            }
        }
        Ok(())
    }

    /// The value of `f` on the subset `tau` of variables set to true.
    pub fn evaluate(&self, f: AddRef, tau: &[Var]) -> BigInt {
        let mut member = vec![false; self.order.len()];
        for &v in tau {
            if v.index() < member.len() {
                member[v.index()] = true;
            }
        }
        let mut id = self.unwrap(f);
        while !id.is_terminal() {
            let node = self.internals[id.index()];
            id = if member[node.var.index()] { node.hi } else { node.lo };
        }
        self.term_value(id).clone()
    }

    /// If `f` is a single terminal, its value.
    pub fn terminal_value(&self, f: AddRef) -> Option<BigInt> {
        let id = self.unwrap(f);
        if id.is_terminal() {
            Some(self.term_value(id).clone())
        } else {
            None
        }
    }

    /// Distinct reachable (internal, terminal) node counts of `f`.
    pub fn node_count(&self, f: AddRef) -> (usize, usize) {
        let mut internal = 0usize;
        let mut terminal = 0usize;
        self.walk(self.unwrap(f), &mut |mgr, id| {
            if id.is_terminal() {
                terminal += 1;
            } else {
                internal += 1;
            }
            let _ = mgr;
        });
        (internal, terminal)
    }

    /// Variables occurring in `f`, in diagram order.
    pub fn support(&self, f: AddRef) -> Vec<Var> {
        let mut present = vec![false; self.order.len()];
        self.walk(self.unwrap(f), &mut |mgr, id| {
            if !id.is_terminal() {
                present[mgr.internals[id.index()].var.index()] = true;
            }
        });
        self.order
            .vars()
            .iter()
            .copied()
            .filter(|v| present[v.index()])
            .collect()
    }

    /// Distinct terminal values reachable from `f`, sorted ascending.
    pub fn terminal_values(&self, f: AddRef) -> Vec<BigInt> {
        let mut values = Vec::new();
        self.walk(self.unwrap(f), &mut |mgr, id| {
            if id.is_terminal() {
                values.push(mgr.term_value(id).clone());
            }
        });
        values.sort();
        values
    }

    fn walk(&self, root: NodeId, visit: &mut dyn FnMut(&AddManager, NodeId)) {
        let mut seen = FxHashMap::default();
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            if seen.insert(id, ()).is_some() {
                continue;
            }
            visit(self, id);
            if !id.is_terminal() {
                let node = self.internals[id.index()];
                stack.push(node.lo);
                stack.push(node.hi);
            }
        }
    }

    /// Panics unless every node reachable from `f` satisfies the reduction
    /// rule (`low != high`) and the ordering rule (ranks strictly increase
    /// toward the terminals).
    pub fn check_invariants(&self, f: AddRef) {
        self.walk(self.unwrap(f), &mut |mgr, id| {
            if !id.is_terminal() {
                let node = mgr.internals[id.index()];
                assert!(node.lo != node.hi, "reduction rule violated at {id:?}");
                let rank = mgr.order.rank(node.var);
                assert!(
                    mgr.top_rank(node.lo) > rank && mgr.top_rank(node.hi) > rank,
                    "ordering rule violated at {id:?}"
                );
            }
        });
    }

    pub(crate) fn node_children(&self, id: NodeId) -> Option<(Var, NodeId, NodeId)> {
        if id.is_terminal() {
            None
        } else {
            let node = self.internals[id.index()];
            Some((node.var, node.lo, node.hi))
        }
    }

    pub(crate) fn terminal_of(&self, id: NodeId) -> Option<&BigInt> {
        if id.is_terminal() {
            Some(self.term_value(id))
        } else {
            None
        }
    }
}

impl std::fmt::Debug for AddManager {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AddManager")
            .field("order", &self.order)
            .field("live_nodes", &self.live_nodes())
            .field("peak_nodes", &self.peak_nodes)
            .field("total_created", &self.total_created)
            .finish()
    }
}

#[cfg(test)]
mod tests;
