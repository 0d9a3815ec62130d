//! Immutable concept taxonomy: a rooted DAG with typed relations,
//! definitions, and a surface-term index.
//!
//! The taxonomy is validated once at load time (single root, no cycles,
//! no undeclared concepts, relation inverses materialized) and is read-only
//! afterwards, so queries may run concurrently without synchronization.

mod load;

pub use load::load_taxonomy;

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::path::PathBuf;
use thiserror::Error;

/// Opaque concept identifier (a CUI-style token such as `C0018787`).
///
/// Non-empty and free of whitespace; unique within a taxonomy.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConceptId(String);

impl ConceptId {
    pub fn new(token: impl Into<String>) -> Result<Self, TaxonomyError> {
        let token = token.into();
        if token.is_empty() {
            return Err(TaxonomyError::InvalidConceptId {
                token,
                reason: "empty token",
            });
        }
        if token.chars().any(char::is_whitespace) {
            return Err(TaxonomyError::InvalidConceptId {
                token,
                reason: "contains whitespace",
            });
        }
        Ok(ConceptId(token))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ConceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::str::FromStr for ConceptId {
    type Err = TaxonomyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ConceptId::new(s)
    }
}

/// Typed relation between two concepts.
///
/// PAR/CHD are mutual inverses, as are RB/RN. TERM links a concept to its
/// associated-term concepts and carries no hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelationKind {
    Par,
    Chd,
    Rb,
    Rn,
    Term,
}

impl RelationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RelationKind::Par => "PAR",
            RelationKind::Chd => "CHD",
            RelationKind::Rb => "RB",
            RelationKind::Rn => "RN",
            RelationKind::Term => "TERM",
        }
    }

    /// Inverse kind, if the relation has one.
    pub fn inverse(self) -> Option<RelationKind> {
        match self {
            RelationKind::Par => Some(RelationKind::Chd),
            RelationKind::Chd => Some(RelationKind::Par),
            RelationKind::Rb => Some(RelationKind::Rn),
            RelationKind::Rn => Some(RelationKind::Rb),
            RelationKind::Term => None,
        }
    }
}

impl std::str::FromStr for RelationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "PAR" => Ok(RelationKind::Par),
            "CHD" => Ok(RelationKind::Chd),
            "RB" => Ok(RelationKind::Rb),
            "RN" => Ok(RelationKind::Rn),
            "TERM" => Ok(RelationKind::Term),
            other => Err(format!("unknown relation kind {other:?}")),
        }
    }
}

/// Which relation kinds form the hierarchy, and how depth is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeSet {
    ParChd,
    RbRn,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepthMode {
    /// Node count of the shortest root-to-concept path.
    Min,
    /// Node count of the longest root-to-concept path.
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HierarchyConfig {
    pub edge_set: EdgeSet,
    pub depth_mode: DepthMode,
}

impl Default for HierarchyConfig {
    fn default() -> Self {
        HierarchyConfig {
            edge_set: EdgeSet::ParChd,
            depth_mode: DepthMode::Min,
        }
    }
}

#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed line: {reason}")]
    MalformedLine {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("invalid concept id {token:?}: {reason}")]
    InvalidConceptId { token: String, reason: &'static str },
    #[error("duplicate concept {id}")]
    DuplicateConcept { id: ConceptId },
    #[error("undeclared ConceptId {id} ({context})")]
    UndeclaredConcept { id: ConceptId, context: String },
    #[error("cycle detected through {id}")]
    CycleDetected { id: ConceptId },
    #[error("multiple roots: {}", roots.iter().map(ConceptId::as_str).collect::<Vec<_>>().join(", "))]
    MultipleRoots { roots: Vec<ConceptId> },
    #[error("no root concept found")]
    NoRoot,
    #[error("unknown ConceptId {id}")]
    UnknownConcept { id: ConceptId },
    #[error("unreachable pair: no path between {a} and {b}")]
    UnreachablePair { a: ConceptId, b: ConceptId },
}

/// Unvalidated taxonomy parts, as parsed from files or built in memory.
///
/// `relations` entries read `source REL target`: `(a, PAR, b)` states that
/// `b` is a parent of `a`. Inverse edges (CHD for PAR, RN for RB) may be
/// omitted; [`RawTaxonomy::build`] materializes them.
#[derive(Debug, Default, Clone)]
pub struct RawTaxonomy {
    pub concepts: Vec<(ConceptId, String)>,
    pub relations: Vec<(ConceptId, RelationKind, ConceptId)>,
    pub definitions: Vec<(ConceptId, String)>,
    pub index: Vec<(String, ConceptId)>,
}

/// Validated, immutable concept taxonomy.
pub struct Taxonomy {
    ids: Vec<ConceptId>,
    ix_of: HashMap<String, u32>,
    preferred: Vec<String>,
    /// Upward hierarchy edges under the configured edge set, deduplicated.
    parents: Vec<Vec<u32>>,
    children: Vec<Vec<u32>>,
    /// All outgoing relation edges after inverse normalization, every kind.
    related: Vec<Vec<(RelationKind, u32)>>,
    definitions: Vec<Vec<String>>,
    index: BTreeMap<String, BTreeSet<u32>>,
    root: u32,
    depth: Vec<u32>,
    is_leaf: Vec<bool>,
    total_leaves: u32,
    config: HierarchyConfig,
}

impl RawTaxonomy {
    /// Validate and freeze into a queryable [`Taxonomy`].
    pub fn build(self, config: HierarchyConfig) -> Result<Taxonomy, TaxonomyError> {
        let n = self.concepts.len();
        let mut ids = Vec::with_capacity(n);
        let mut preferred = Vec::with_capacity(n);
        let mut ix_of: HashMap<String, u32> = HashMap::with_capacity(n);
        for (id, term) in self.concepts {
            if ix_of.contains_key(id.as_str()) {
                return Err(TaxonomyError::DuplicateConcept { id });
            }
            ix_of.insert(id.as_str().to_string(), ids.len() as u32);
            ids.push(id);
            preferred.push(term);
        }

        let resolve = |id: &ConceptId, context: &str| -> Result<u32, TaxonomyError> {
            ix_of
                .get(id.as_str())
                .copied()
                .ok_or_else(|| TaxonomyError::UndeclaredConcept {
                    id: id.clone(),
                    context: context.to_string(),
                })
        };

        // Normalize relations: materialize inverses, deduplicate.
        let mut related_sets: Vec<BTreeSet<(RelationKind, u32)>> = vec![BTreeSet::new(); n];
        for (src, kind, dst) in &self.relations {
            let s = resolve(src, "relations")?;
            let d = resolve(dst, "relations")?;
            related_sets[s as usize].insert((*kind, d));
            if let Some(inv) = kind.inverse() {
                related_sets[d as usize].insert((inv, s));
            }
        }

        let upward_kinds: &[RelationKind] = match config.edge_set {
            EdgeSet::ParChd => &[RelationKind::Par],
            EdgeSet::RbRn => &[RelationKind::Rb],
            EdgeSet::Both => &[RelationKind::Par, RelationKind::Rb],
        };
        let mut parents: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut children: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (s, rels) in related_sets.iter().enumerate() {
            let mut ups: BTreeSet<u32> = BTreeSet::new();
            for &(kind, d) in rels {
                if upward_kinds.contains(&kind) {
                    ups.insert(d);
                }
            }
            for d in ups {
                parents[s].push(d);
                children[d as usize].push(s as u32);
            }
        }
        for c in &mut children {
            c.sort_unstable();
            c.dedup();
        }

        let mut definitions: Vec<Vec<String>> = vec![Vec::new(); n];
        for (id, text) in &self.definitions {
            let ix = resolve(id, "definitions")?;
            definitions[ix as usize].push(text.clone());
        }

        let mut index: BTreeMap<String, BTreeSet<u32>> = BTreeMap::new();
        for (term, id) in &self.index {
            let ix = resolve(id, "index")?;
            index.entry(term.to_lowercase()).or_default().insert(ix);
        }

        // Cycle check via Kahn's algorithm over parent edges; the order it
        // yields (parents before children) also drives MAX-depth below.
        let mut remaining: Vec<u32> = parents.iter().map(|p| p.len() as u32).collect();
        let mut queue: VecDeque<u32> = (0..n as u32).filter(|&i| remaining[i as usize] == 0).collect();
        let mut topo: Vec<u32> = Vec::with_capacity(n);
        while let Some(c) = queue.pop_front() {
            topo.push(c);
            for &ch in &children[c as usize] {
                remaining[ch as usize] -= 1;
                if remaining[ch as usize] == 0 {
                    queue.push_back(ch);
                }
            }
        }
        if topo.len() != n {
            let on_cycle = (0..n).find(|&i| remaining[i] > 0).expect("cycle member");
            return Err(TaxonomyError::CycleDetected {
                id: ids[on_cycle].clone(),
            });
        }

        let roots: Vec<u32> = (0..n as u32).filter(|&i| parents[i as usize].is_empty()).collect();
        let root = match roots.as_slice() {
            [] => return Err(TaxonomyError::NoRoot),
            [r] => *r,
            many => {
                return Err(TaxonomyError::MultipleRoots {
                    roots: many.iter().map(|&i| ids[i as usize].clone()).collect(),
                })
            }
        };

        let depth = match config.depth_mode {
            DepthMode::Min => {
                let mut depth = vec![0u32; n];
                depth[root as usize] = 1;
                let mut q = VecDeque::from([root]);
                while let Some(c) = q.pop_front() {
                    for &ch in &children[c as usize] {
                        if depth[ch as usize] == 0 {
                            depth[ch as usize] = depth[c as usize] + 1;
                            q.push_back(ch);
                        }
                    }
                }
                depth
            }
            DepthMode::Max => {
                let mut depth = vec![1u32; n];
                for &c in &topo {
                    for &p in &parents[c as usize] {
                        depth[c as usize] = depth[c as usize].max(depth[p as usize] + 1);
                    }
                }
                depth
            }
        };

        let is_leaf: Vec<bool> = children.iter().map(Vec::is_empty).collect();
        let total_leaves = is_leaf.iter().filter(|&&l| l).count() as u32;

        let related: Vec<Vec<(RelationKind, u32)>> =
            related_sets.into_iter().map(|s| s.into_iter().collect()).collect();

        Ok(Taxonomy {
            ids,
            ix_of,
            preferred,
            parents,
            children,
            related,
            definitions,
            index,
            root,
            depth,
            is_leaf,
            total_leaves,
            config,
        })
    }
}

impl Taxonomy {
    pub fn config(&self) -> HierarchyConfig {
        self.config
    }

    pub fn root(&self) -> &ConceptId {
        &self.ids[self.root as usize]
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, c: &ConceptId) -> bool {
        self.ix_of.contains_key(c.as_str())
    }

    pub fn concepts(&self) -> impl Iterator<Item = &ConceptId> {
        self.ids.iter()
    }

    pub fn preferred_term(&self, c: &ConceptId) -> Result<&str, TaxonomyError> {
        Ok(&self.preferred[self.ix(c)? as usize])
    }

    /// Definition strings attached to `c` (may be empty).
    pub fn definitions_of(&self, c: &ConceptId) -> Result<&[String], TaxonomyError> {
        Ok(&self.definitions[self.ix(c)? as usize])
    }

    /// Senses of a surface term; lookup is case-insensitive. `None` when the
    /// term is not in the index.
    pub fn senses(&self, term: &str) -> Option<BTreeSet<ConceptId>> {
        self.index
            .get(&term.to_lowercase())
            .map(|s| s.iter().map(|&ix| self.ids[ix as usize].clone()).collect())
    }

    /// All indexed surface terms (lowercased), sorted.
    pub fn index_terms(&self) -> impl Iterator<Item = &str> {
        self.index.keys().map(String::as_str)
    }

    /// Outgoing relation edges of `c` (all kinds, inverses included),
    /// sorted by kind then target.
    pub fn related_of(&self, c: &ConceptId) -> Result<Vec<(RelationKind, ConceptId)>, TaxonomyError> {
        let ix = self.ix(c)?;
        Ok(self.related[ix as usize]
            .iter()
            .map(|&(k, d)| (k, self.ids[d as usize].clone()))
            .collect())
    }

    /// Reflexive transitive closure over parent edges; always contains `c`
    /// itself and the root.
    pub fn ancestors(&self, c: &ConceptId) -> Result<BTreeSet<ConceptId>, TaxonomyError> {
        let ix = self.ix(c)?;
        Ok(self.to_id_set(&self.ancestors_ix(ix)))
    }

    /// Transitive closure over child edges, excluding `c` itself.
    pub fn descendants(&self, c: &ConceptId) -> Result<BTreeSet<ConceptId>, TaxonomyError> {
        let ix = self.ix(c)?;
        Ok(self.to_id_set(&self.descendants_ix(ix)))
    }

    /// Node-count length of the root-to-`c` path (shortest or longest per
    /// the configured depth mode); `depth(root) == 1`.
    pub fn depth(&self, c: &ConceptId) -> Result<u32, TaxonomyError> {
        Ok(self.depth[self.ix(c)? as usize])
    }

    /// Node-count length of the shortest path between two concepts treating
    /// hierarchy edges as undirected; `spath(c, c) == 1`.
    pub fn spath(&self, c1: &ConceptId, c2: &ConceptId) -> Result<u32, TaxonomyError> {
        let a = self.ix(c1)?;
        let b = self.ix(c2)?;
        self.spath_ix(a, b).ok_or_else(|| TaxonomyError::UnreachablePair {
            a: c1.clone(),
            b: c2.clone(),
        })
    }

    /// Least common subsumers: shared ancestors with no shared-ancestor
    /// descendant also in the shared set. Non-empty on a validated taxonomy.
    pub fn lcs_set(&self, c1: &ConceptId, c2: &ConceptId) -> Result<BTreeSet<ConceptId>, TaxonomyError> {
        let a = self.ix(c1)?;
        let b = self.ix(c2)?;
        Ok(self.to_id_set(&self.lcs_set_ix(a, b)))
    }

    /// `(leaves, subsumers, max_leaves)` for the intrinsic-IC formula:
    /// leaf descendants of `c`, ancestors of `c` including itself, and the
    /// taxonomy-wide leaf count.
    pub fn leaf_stats(&self, c: &ConceptId) -> Result<(u32, u32, u32), TaxonomyError> {
        let ix = self.ix(c)?;
        let leaves = self
            .descendants_ix(ix)
            .iter()
            .filter(|&&d| self.is_leaf[d as usize])
            .count() as u32;
        let subsumers = self.ancestors_ix(ix).len() as u32;
        Ok((leaves, subsumers, self.total_leaves))
    }

    pub(crate) fn ix(&self, c: &ConceptId) -> Result<u32, TaxonomyError> {
        self.ix_of
            .get(c.as_str())
            .copied()
            .ok_or_else(|| TaxonomyError::UnknownConcept { id: c.clone() })
    }

    pub(crate) fn id_of(&self, ix: u32) -> &ConceptId {
        &self.ids[ix as usize]
    }

    pub(crate) fn senses_ix(&self, term: &str) -> Option<&BTreeSet<u32>> {
        self.index.get(&term.to_lowercase())
    }

    pub(crate) fn depth_ix(&self, ix: u32) -> u32 {
        self.depth[ix as usize]
    }

    pub(crate) fn definitions_ix(&self, ix: u32) -> &[String] {
        &self.definitions[ix as usize]
    }

    pub(crate) fn related_ix(&self, ix: u32) -> &[(RelationKind, u32)] {
        &self.related[ix as usize]
    }

    pub(crate) fn root_ix(&self) -> u32 {
        self.root
    }

    pub(crate) fn children_ix(&self, ix: u32) -> &[u32] {
        &self.children[ix as usize]
    }

    /// Sorted reflexive ancestor closure.
    pub(crate) fn ancestors_ix(&self, start: u32) -> Vec<u32> {
        self.closure(start, &self.parents, true)
    }

    /// Sorted descendant closure, exclusive of `start`.
    pub(crate) fn descendants_ix(&self, start: u32) -> Vec<u32> {
        self.closure(start, &self.children, false)
    }

    fn closure(&self, start: u32, adj: &[Vec<u32>], reflexive: bool) -> Vec<u32> {
        let mut seen = vec![false; self.ids.len()];
        let mut stack = vec![start];
        seen[start as usize] = true;
        let mut out = Vec::new();
        while let Some(c) = stack.pop() {
            if reflexive || c != start {
                out.push(c);
            }
            for &nx in &adj[c as usize] {
                if !seen[nx as usize] {
                    seen[nx as usize] = true;
                    stack.push(nx);
                }
            }
        }
        // Revisiting `start` through a longer route is impossible: the graph
        // is acyclic, so `start` never reappears downstream of itself.
        out.sort_unstable();
        out
    }

    pub(crate) fn spath_ix(&self, a: u32, b: u32) -> Option<u32> {
        if a == b {
            return Some(1);
        }
        let n = self.ids.len();
        let mut dist = vec![u32::MAX; n];
        dist[a as usize] = 0;
        let mut q = VecDeque::from([a]);
        while let Some(c) = q.pop_front() {
            let d = dist[c as usize];
            for &nx in self.parents[c as usize].iter().chain(&self.children[c as usize]) {
                if dist[nx as usize] == u32::MAX {
                    if nx == b {
                        return Some(d + 2); // edge count d+1, node count +1
                    }
                    dist[nx as usize] = d + 1;
                    q.push_back(nx);
                }
            }
        }
        None
    }

    pub(crate) fn lcs_set_ix(&self, a: u32, b: u32) -> Vec<u32> {
        let anc_a = self.ancestors_ix(a);
        let anc_b = self.ancestors_ix(b);
        let shared: Vec<u32> = intersect_sorted(&anc_a, &anc_b);
        let in_shared = |c: u32| shared.binary_search(&c).is_ok();
        shared
            .iter()
            .copied()
            .filter(|&s| !self.children[s as usize].iter().any(|&ch| in_shared(ch)))
            .collect()
    }

    /// Deepest member of the LCS set; depth ties break to the
    /// lexicographically smallest id so the choice is symmetric.
    pub(crate) fn deepest_lcs_ix(&self, a: u32, b: u32) -> u32 {
        let set = self.lcs_set_ix(a, b);
        set.into_iter()
            .max_by(|&x, &y| {
                self.depth[x as usize]
                    .cmp(&self.depth[y as usize])
                    .then_with(|| self.ids[y as usize].cmp(&self.ids[x as usize]))
            })
            .expect("lcs_set is non-empty on a validated taxonomy")
    }

    fn to_id_set(&self, ixs: &[u32]) -> BTreeSet<ConceptId> {
        ixs.iter().map(|&ix| self.ids[ix as usize].clone()).collect()
    }
}

fn intersect_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;

    pub fn cid(s: &str) -> ConceptId {
        ConceptId::new(s).unwrap()
    }

    /// Six-concept fixture: R; A, B children of R; A1, A2 children of A;
    /// B1 child of B. Definitions and index terms cover the corpus fixture.
    pub fn fixture_raw() -> RawTaxonomy {
        let rel = |a: &str, k: RelationKind, b: &str| (cid(a), k, cid(b));
        RawTaxonomy {
            concepts: vec![
                (cid("R"), "body".to_string()),
                (cid("A"), "heart".to_string()),
                (cid("A1"), "aorta".to_string()),
                (cid("A2"), "ventricle".to_string()),
                (cid("B"), "lung".to_string()),
                (cid("B1"), "bronchus".to_string()),
            ],
            relations: vec![
                rel("A", RelationKind::Par, "R"),
                rel("B", RelationKind::Par, "R"),
                rel("A1", RelationKind::Par, "A"),
                rel("A2", RelationKind::Par, "A"),
                rel("B1", RelationKind::Par, "B"),
            ],
            definitions: vec![
                (cid("R"), "body organ system".to_string()),
                (cid("A"), "heart muscle pump blood".to_string()),
                (cid("A1"), "aorta artery blood vessel".to_string()),
                (cid("A2"), "ventricle heart chamber blood".to_string()),
                (cid("B"), "lung organ air breath".to_string()),
                (cid("B1"), "bronchus airway tube air".to_string()),
            ],
            index: vec![
                ("body".to_string(), cid("R")),
                ("heart".to_string(), cid("A")),
                ("aorta".to_string(), cid("A1")),
                ("ventricle".to_string(), cid("A2")),
                ("lung".to_string(), cid("B")),
                ("bronchus".to_string(), cid("B1")),
                ("windpipe".to_string(), cid("B1")),
                ("pump".to_string(), cid("A")),
                ("pump".to_string(), cid("A2")),
            ],
        }
    }

    pub fn fixture() -> Taxonomy {
        fixture_raw().build(HierarchyConfig::default()).unwrap()
    }
}
