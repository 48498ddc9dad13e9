//! Phase spaces: finite forests of uniform-branching trees.
//!
//! A tree of height `r` is a copy of the ordinal `ω^r + 1`. Its points are
//! addressed by paths of naturals of length at most `r`: the empty path is
//! the top point, full-length paths are the isolated points, and a node is
//! the limit of its children as the child index grows. The outermost level
//! comes first in a path, so in a height-3 tree `D(k, j, i)` is the point
//! conventionally written `d_{i,j,k}`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::dsl::Atom;
use crate::error::{Error, Result};
use crate::ordinal::Ordinal;

/// Largest supported tree height.
pub const MAX_HEIGHT: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TreeSpec {
    pub id: Arc<str>,
    pub height: usize,
}

impl TreeSpec {
    pub fn new(id: &str, height: usize) -> Self {
        Self {
            id: Arc::from(id),
            height,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpaceSpec {
    trees: Vec<TreeSpec>,
}

impl SpaceSpec {
    pub fn new(trees: Vec<TreeSpec>) -> Result<Self> {
        if trees.is_empty() {
            return Err(Error::NoSpace);
        }
        for (i, t) in trees.iter().enumerate() {
            if t.height == 0 || t.height > MAX_HEIGHT {
                return Err(Error::InvalidDeclaration(format!(
                    "tree `{}` has height {}; supported heights are 1..={MAX_HEIGHT}",
                    t.id, t.height
                )));
            }
            if trees[..i].iter().any(|u| u.id == t.id) {
                return Err(Error::InvalidDeclaration(format!("duplicate tree `{}`", t.id)));
            }
        }
        Ok(Self { trees })
    }

    /// The derived set `X'`: every height drops by one, and a height-1 tree
    /// collapses to its top point (height 0).
    pub fn derived(&self) -> SpaceSpec {
        SpaceSpec {
            trees: self
                .trees
                .iter()
                .map(|t| TreeSpec {
                    id: t.id.clone(),
                    height: t.height.saturating_sub(1),
                })
                .collect(),
        }
    }

    pub fn trees(&self) -> &[TreeSpec] {
        &self.trees
    }

    pub fn tree(&self, id: &str) -> Option<&TreeSpec> {
        self.trees.iter().find(|t| &*t.id == id)
    }

    pub fn tree_index(&self, id: &str) -> Option<usize> {
        self.trees.iter().position(|t| &*t.id == id)
    }

    pub fn height(&self, id: &str) -> Result<usize> {
        self.tree(id)
            .map(|t| t.height)
            .ok_or_else(|| Error::UnknownTree(id.to_string()))
    }

    /// Checks that `p` names a declared tree and its path fits the height.
    pub fn check(&self, p: &Point) -> Result<()> {
        let h = self
            .tree(p.tree())
            .ok_or_else(|| Error::MalformedPoint(format!("{p}: unknown tree")))?
            .height;
        if p.depth() > h {
            return Err(Error::MalformedPoint(format!("{p}: path longer than height {h}")));
        }
        Ok(())
    }

    /// Interns the tree name so points share one allocation per tree.
    pub fn point(&self, tree: &str, path: Vec<u64>) -> Result<Point> {
        let t = self
            .tree(tree)
            .ok_or_else(|| Error::MalformedPoint(format!("unknown tree `{tree}`")))?;
        let p = Point {
            tree: t.id.clone(),
            path,
        };
        self.check(&p)?;
        Ok(p)
    }

    pub fn top(&self, tree: usize) -> Point {
        Point {
            tree: self.trees[tree].id.clone(),
            path: Vec::new(),
        }
    }

    pub fn parse_point(&self, literal: &str) -> Result<Point> {
        let p = Point::parse(literal)?;
        let path = p.path.clone();
        self.point(p.tree(), path)
    }

    pub fn is_isolated(&self, p: &Point) -> bool {
        self.tree(p.tree()).map(|t| t.height == p.depth()).unwrap_or(false)
    }

    /// Every internal point has a strictly increasing sequence of children
    /// converging to it, so the point set is always countably infinite.
    pub fn is_infinite(&self) -> bool {
        self.trees.iter().any(|t| t.height > 0)
    }
}

/// A point of the phase space: a tree name and a path.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    tree: Arc<str>,
    path: Vec<u64>,
}

impl Point {
    pub fn new(tree: &str, path: Vec<u64>) -> Self {
        Self {
            tree: Arc::from(tree),
            path,
        }
    }

    pub(crate) fn with_tree(tree: Arc<str>, path: Vec<u64>) -> Self {
        Self { tree, path }
    }

    pub fn tree(&self) -> &str {
        &self.tree
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    pub fn depth(&self) -> usize {
        self.path.len()
    }

    pub fn parent(&self) -> Option<Point> {
        if self.path.is_empty() {
            return None;
        }
        Some(Point {
            tree: self.tree.clone(),
            path: self.path[..self.path.len() - 1].to_vec(),
        })
    }

    pub fn child(&self, n: u64) -> Point {
        let mut path = self.path.clone();
        path.push(n);
        Point {
            tree: self.tree.clone(),
            path,
        }
    }

    /// `true` when `self` is `other` or lies in the subtree under `other`.
    pub fn is_below(&self, other: &Point) -> bool {
        self.tree == other.tree && self.path.starts_with(&other.path)
    }

    /// Parses a literal such as `D(0,0,0)` or `A()`.
    pub fn parse(literal: &str) -> Result<Point> {
        let bad = || Error::MalformedPoint(literal.to_string());
        let s = literal.trim();
        let open = s.find('(').ok_or_else(bad)?;
        let name = s[..open].trim();
        if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
            return Err(bad());
        }
        let inner = s[open + 1..].strip_suffix(')').ok_or_else(bad)?;
        let path = if inner.trim().is_empty() {
            Vec::new()
        } else {
            inner
                .split(',')
                .map(|c| c.trim().parse::<u64>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?
        };
        Ok(Point::new(name, path))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.tree)?;
        for (i, c) in self.path.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

/// Cantor-Bendixson rank: `height − |path|`, zero exactly for isolated points.
pub fn rank_of(space: &SpaceSpec, p: &Point) -> Result<usize> {
    space.check(p)?;
    Ok(space.height(p.tree())? - p.depth())
}

/// The basic clopen neighborhood `V_N(s) = {s} ∪ ⋃_{n ≥ N} subtree(s⌢n)`.
/// For an isolated `s` this is `{s}` whatever the cutoff.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborhoodDepth {
    pub node: Point,
    pub cutoff: u64,
}

impl NeighborhoodDepth {
    pub fn new(node: Point, cutoff: u64) -> Self {
        Self { node, cutoff }
    }

    pub fn contains(&self, p: &Point) -> bool {
        if !p.is_below(&self.node) {
            return false;
        }
        match p.path.get(self.node.depth()) {
            None => true,
            Some(&c) => c >= self.cutoff,
        }
    }
}

/// One entry of a family template.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    Fixed(u64),
    /// A symbolic auxiliary coordinate.
    Aux(String),
    /// The divergent index `t`.
    Divergent,
}

/// A sequence of points indexed by the divergent variable `t`, with
/// auxiliaries held symbolic and an optional constraint set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EscapeFamily {
    tree: Arc<str>,
    slots: Vec<Slot>,
    pub guard: Vec<Atom>,
}

/// Name the divergent variable uses inside family guards.
pub const DIVERGENT_VAR: &str = "t";

impl EscapeFamily {
    pub fn new(tree: &str, slots: Vec<Slot>) -> Result<Self> {
        Self::with_guard(Arc::from(tree), slots, Vec::new())
    }

    pub(crate) fn with_guard(tree: Arc<str>, slots: Vec<Slot>, guard: Vec<Atom>) -> Result<Self> {
        let fam = Self { tree, slots, guard };
        let n = fam.slots.iter().filter(|s| **s == Slot::Divergent).count();
        if n != 1 {
            return Err(Error::NotAFamily(format!(
                "{fam}: the divergent variable t must occur exactly once"
            )));
        }
        Ok(fam)
    }

    pub fn tree(&self) -> &str {
        &self.tree
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn divergent_position(&self) -> usize {
        self.slots
            .iter()
            .position(|s| *s == Slot::Divergent)
            .expect("validated on construction")
    }

    pub fn aux_names(&self) -> Vec<&str> {
        self.slots
            .iter()
            .filter_map(|s| match s {
                Slot::Aux(v) => Some(v.as_str()),
                _ => None,
            })
            .collect()
    }

    /// The member with divergent index `t` and the given auxiliary values.
    /// Missing auxiliaries default to 0.
    pub fn instance(&self, t: u64, aux: &HashMap<String, u64>) -> Point {
        let path = self
            .slots
            .iter()
            .map(|s| match s {
                Slot::Fixed(c) => *c,
                Slot::Aux(v) => aux.get(v).copied().unwrap_or(0),
                Slot::Divergent => t,
            })
            .collect();
        Point {
            tree: self.tree.clone(),
            path,
        }
    }

    pub fn check(&self, space: &SpaceSpec) -> Result<()> {
        let h = space.height(&self.tree)?;
        if self.slots.len() > h {
            return Err(Error::NotAFamily(format!("{self}: template longer than height {h}")));
        }
        Ok(())
    }
}

impl fmt::Display for EscapeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.tree)?;
        for (i, s) in self.slots.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            match s {
                Slot::Fixed(c) => write!(f, "{c}")?,
                Slot::Aux(v) => f.write_str(v)?,
                Slot::Divergent => f.write_str(DIVERGENT_VAR)?,
            }
        }
        f.write_str(")")?;
        if !self.guard.is_empty() {
            f.write_str("[")?;
            for (i, a) in self.guard.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str("]")?;
        }
        Ok(())
    }
}

/// A node template: a point whose path may mention auxiliaries. Limits of
/// families whose prefix contains auxiliaries are parametric.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NodeTemplate {
    pub tree: Arc<str>,
    pub slots: Vec<Slot>,
}

impl NodeTemplate {
    /// The concrete point, when no auxiliary occurs.
    pub fn point(&self) -> Option<Point> {
        let path = self
            .slots
            .iter()
            .map(|s| match s {
                Slot::Fixed(c) => Some(*c),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Point {
            tree: self.tree.clone(),
            path,
        })
    }

    pub fn is_parametric(&self) -> bool {
        self.point().is_none()
    }
}

impl fmt::Display for NodeTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.tree)?;
        for (i, s) in self.slots.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            match s {
                Slot::Fixed(c) => write!(f, "{c}")?,
                Slot::Aux(v) => f.write_str(v)?,
                Slot::Divergent => f.write_str(DIVERGENT_VAR)?,
            }
        }
        f.write_str(")")
    }
}

/// The limit of a family as `t → ∞`: the node given by the template prefix
/// strictly before the divergent entry. Entries after it do not matter.
pub fn limit_of_family(fam: &EscapeFamily) -> NodeTemplate {
    let k = fam.divergent_position();
    NodeTemplate {
        tree: fam.tree.clone(),
        slots: fam.slots[..k].to_vec(),
    }
}

/// Coefficient vector of the in-tree code, highest exponent first.
fn in_tree_coefficients(height: usize, path: &[u64]) -> Vec<u64> {
    // index i holds the coefficient of ω^(height - i)
    let mut c = vec![0u64; height + 1];
    for (t, &p) in path.iter().enumerate() {
        c[t + 1] += p;
    }
    c[path.len()] += 1;
    c
}

/// Ordinal code of a point. Within a height-`r` tree the path `p1..pm`
/// codes to `Σ ω^(r−t)·p_t + ω^(r−m)`, an order isomorphism onto the
/// nonzero ordinals up to `ω^r`; trees are concatenated in declaration
/// order.
pub fn ordinal_code(space: &SpaceSpec, p: &Point) -> Result<Ordinal> {
    space.check(p)?;
    let mut offset = Ordinal::zero();
    for t in space.trees() {
        if t.id == p.tree {
            let c = in_tree_coefficients(t.height, &p.path);
            let code = Ordinal::from_terms(
                c.iter()
                    .enumerate()
                    .map(|(i, &coef)| ((t.height - i) as u32, coef)),
            );
            return Ok(offset.add(&code));
        }
        offset = offset.add(&Ordinal::omega_pow(t.height as u32));
    }
    unreachable!("checked above")
}

/// Sort key agreeing with [`ordinal_code`] order, cheap to compute.
pub fn code_key(space: &SpaceSpec, p: &Point) -> (usize, Vec<u64>) {
    let idx = space.tree_index(p.tree()).unwrap_or(usize::MAX);
    let h = space.trees().get(idx).map(|t| t.height).unwrap_or(p.depth());
    (idx, in_tree_coefficients(h, &p.path))
}

/// All points whose coordinates are `< depth`, in ordinal-code order.
pub fn enumerate_truncation(space: &SpaceSpec, depth: u64) -> Vec<Point> {
    let mut out = Vec::new();
    for t in space.trees() {
        let mut pts = Vec::new();
        let mut frontier = vec![Vec::<u64>::new()];
        for level in 0..=t.height {
            let mut next = Vec::new();
            for path in frontier {
                if level < t.height {
                    for n in 0..depth {
                        let mut q = path.clone();
                        q.push(n);
                        next.push(q);
                    }
                }
                pts.push(path);
            }
            frontier = next;
        }
        pts.sort_by_cached_key(|path| in_tree_coefficients(t.height, path));
        out.extend(pts.into_iter().map(|path| Point {
            tree: t.id.clone(),
            path,
        }));
    }
    out
}
