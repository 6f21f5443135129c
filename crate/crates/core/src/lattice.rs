//! Honeycomb lattices: tori, armchair nanotubes and finite sheets.
//!
//! Nanotubes and sheets are built on the brick-wall embedding of the
//! honeycomb: site `(x, y)` bonds horizontally to `(x ± 1, y)` and
//! vertically to `(x, y + 1)` when `x + y` is even. Sublattice A is the
//! even-parity class. See the README for diagrams.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::HermitianOperator;

type Label = (i64, i64, Sublattice);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sublattice {
    A,
    B,
}

impl Sublattice {
    pub fn other(self) -> Self {
        match self {
            Sublattice::A => Sublattice::B,
            Sublattice::B => Sublattice::A,
        }
    }

    /// σ in the Dirac-state phase: 0 for A, 1 for B.
    pub fn sigma(self) -> i64 {
        match self {
            Sublattice::A => 0,
            Sublattice::B => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SiteId {
    pub cell_alpha: i64,
    pub cell_beta: i64,
    pub sublattice: Sublattice,
    pub linear: usize,
    #[serde(default)]
    pub extra: bool,
}

impl SiteId {
    /// A site appended to the lattice (extra-site perturbation).
    pub fn extra_site(linear: usize) -> Self {
        SiteId { cell_alpha: 0, cell_beta: 0, sublattice: Sublattice::A, linear, extra: true }
    }

    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for SiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.extra {
            return write!(f, "extra{}", self.linear);
        }
        let s = match self.sublattice {
            Sublattice::A => "A",
            Sublattice::B => "B",
        };
        write!(f, "{s}({},{})", self.cell_alpha, self.cell_beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Bearded,
    Zigzag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundarySpec {
    Torus { m: i64, n: i64 },
    ArmchairNanotube { n_x: i64, n_cells: i64 },
    Sheet { n_x: i64, n_y: i64, edge: EdgeKind },
}

impl BoundarySpec {
    pub fn build(&self) -> Result<Lattice> {
        match *self {
            BoundarySpec::Torus { m, n } => build_torus(m, n),
            BoundarySpec::ArmchairNanotube { n_x, n_cells } => build_armchair_nanotube(n_x, n_cells),
            BoundarySpec::Sheet { n_x, n_y, edge } => build_sheet(n_x, n_y, edge),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Lattice {
    pub boundary: BoundarySpec,
    pub n_sites: usize,
    pub sites: Vec<SiteId>,
    pub edges: Vec<(usize, usize)>,
    #[serde(skip)]
    adjacency: Vec<Vec<usize>>,
    #[serde(skip)]
    lookup: HashMap<(i64, i64, Sublattice), usize>,
}

impl Lattice {
    /// Assemble from labelled sites and bonds given as label pairs.
    /// Linear order is sublattice-major, then (β, α) row-major.
    fn assemble(
        boundary: BoundarySpec,
        mut labels: Vec<(i64, i64, Sublattice)>,
        bonds: Vec<(Label, Label)>,
    ) -> Self {
        labels.sort_by_key(|&(a, b, s)| (s, b, a));
        labels.dedup();
        let lookup: HashMap<_, _> = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let sites = labels
            .iter()
            .enumerate()
            .map(|(i, &(a, b, s))| SiteId { cell_alpha: a, cell_beta: b, sublattice: s, linear: i, extra: false })
            .collect::<Vec<_>>();
        // multi-edges of small tori collapse here
        let mut edges: Vec<(usize, usize)> = bonds
            .iter()
            .map(|(u, v)| {
                let (i, j) = (lookup[u], lookup[v]);
                (i.min(j), i.max(j))
            })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        let mut adjacency = vec![Vec::new(); sites.len()];
        for &(i, j) in &edges {
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        for a in &mut adjacency {
            a.sort_unstable();
        }
        Lattice { boundary, n_sites: sites.len(), sites, edges, adjacency, lookup }
    }

    pub fn site(&self, alpha: i64, beta: i64, sublattice: Sublattice) -> Result<SiteId> {
        self.lookup
            .get(&(alpha, beta, sublattice))
            .map(|&i| self.sites[i])
            .ok_or_else(|| Error::UnknownSite(format!("{sublattice:?}({alpha},{beta})")))
    }

    pub fn site_at(&self, linear: usize) -> Result<SiteId> {
        self.sites.get(linear).copied().ok_or_else(|| Error::UnknownSite(format!("linear {linear}")))
    }

    /// Resolve a possibly stale id (e.g. deserialized) against this lattice.
    pub fn resolve(&self, s: &SiteId) -> Result<SiteId> {
        if s.extra {
            return Err(Error::UnknownSite(s.to_string()));
        }
        self.site(s.cell_alpha, s.cell_beta, s.sublattice)
    }

    pub fn neighbor_indices(&self, linear: usize) -> &[usize] {
        &self.adjacency[linear]
    }

    pub fn is_torus(&self) -> bool {
        matches!(self.boundary, BoundarySpec::Torus { .. })
    }

    /// Torus dimensions, if this is a torus.
    pub fn torus_dims(&self) -> Option<(i64, i64)> {
        match self.boundary {
            BoundarySpec::Torus { m, n } => Some((m, n)),
            _ => None,
        }
    }

    /// True for tori with 3 | m and 3 | n, the ones carrying Dirac states.
    pub fn has_dirac_points(&self) -> bool {
        matches!(self.torus_dims(), Some((m, n)) if m % 3 == 0 && n % 3 == 0)
    }

    /// Brick-wall coordinates of a nanotube or sheet site.
    pub fn brick_coords(&self, s: &SiteId) -> Option<(i64, i64)> {
        match self.boundary {
            BoundarySpec::Torus { .. } => None,
            BoundarySpec::Sheet { .. } => Some((s.cell_alpha, s.cell_beta)),
            BoundarySpec::ArmchairNanotube { .. } => {
                let x = s.cell_alpha;
                let r = match s.sublattice {
                    Sublattice::A => x.rem_euclid(2),
                    Sublattice::B => 1 - x.rem_euclid(2),
                };
                Some((x, 2 * s.cell_beta + r))
            }
        }
    }

    /// Sites within `depth` brick rows of a zigzag/bearded edge of a sheet.
    pub fn edge_region(&self, depth: i64) -> Result<Vec<usize>> {
        match self.boundary {
            BoundarySpec::Sheet { n_y, .. } => Ok(self
                .sites
                .iter()
                .filter(|s| s.cell_beta < depth || s.cell_beta > n_y - depth)
                .map(|s| s.linear)
                .collect()),
            _ => Err(Error::UnsupportedLattice("edge region is defined for sheets only".into())),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("lattice serialization is infallible")
    }
}

pub fn build_torus(m: i64, n: i64) -> Result<Lattice> {
    if m < 1 || n < 1 {
        return Err(Error::InvalidDimensions(format!("torus needs m, n >= 1 (got {m}, {n})")));
    }
    let mut labels = Vec::with_capacity((2 * m * n) as usize);
    let mut bonds = Vec::with_capacity((3 * m * n) as usize);
    for b in 0..n {
        for a in 0..m {
            labels.push((a, b, Sublattice::A));
            labels.push((a, b, Sublattice::B));
            let am = (a - 1).rem_euclid(m);
            let bp = (b + 1).rem_euclid(n);
            for nb in [(am, b), (am, bp), (a, b)] {
                bonds.push(((a, b, Sublattice::A), (nb.0, nb.1, Sublattice::B)));
            }
        }
    }
    Ok(Lattice::assemble(BoundarySpec::Torus { m, n }, labels, bonds))
}

fn brick_sublattice(x: i64, y: i64) -> Sublattice {
    if (x + y).rem_euclid(2) == 0 {
        Sublattice::A
    } else {
        Sublattice::B
    }
}

/// Brick-wall bonds among `present` sites; `wrap` makes y periodic.
fn brick_bonds(
    present: &[(i64, i64)],
    wrap: Option<i64>,
    label: impl Fn(i64, i64) -> (i64, i64, Sublattice),
) -> Vec<(Label, Label)> {
    let set: std::collections::HashSet<_> = present.iter().copied().collect();
    let mut bonds = Vec::new();
    for &(x, y) in present {
        if set.contains(&(x + 1, y)) {
            bonds.push((label(x, y), label(x + 1, y)));
        }
        if (x + y).rem_euclid(2) == 0 {
            let up = match wrap {
                Some(l) => (y + 1).rem_euclid(l),
                None => y + 1,
            };
            if up != y && set.contains(&(x, up)) {
                bonds.push((label(x, y), label(x, up)));
            }
        }
    }
    bonds
}

/// Armchair nanotube: `n_x` sites along the open length, `n_cells` cells
/// (two brick rows each) around the periodic circumference.
pub fn build_armchair_nanotube(n_x: i64, n_cells: i64) -> Result<Lattice> {
    if n_x < 2 || n_cells < 1 {
        return Err(Error::InvalidDimensions(format!(
            "nanotube needs n_x >= 2, n_cells >= 1 (got {n_x}, {n_cells})"
        )));
    }
    let rows = 2 * n_cells;
    let present: Vec<_> = (0..rows).flat_map(|y| (0..n_x).map(move |x| (x, y))).collect();
    let label = |x: i64, y: i64| (x, y.div_euclid(2), brick_sublattice(x, y));
    let labels = present.iter().map(|&(x, y)| label(x, y)).collect();
    let bonds = brick_bonds(&present, Some(rows), label);
    Ok(Lattice::assemble(BoundarySpec::ArmchairNanotube { n_x, n_cells }, labels, bonds))
}

/// Finite sheet with armchair left/right edges and zigzag or bearded
/// top/bottom edges. Bearded: 2·n_x·n_y sites; zigzag adds n_x − 1 per side.
pub fn build_sheet(n_x: i64, n_y: i64, edge: EdgeKind) -> Result<Lattice> {
    if n_x < 1 || n_y < 1 {
        return Err(Error::InvalidDimensions(format!("sheet needs n_x, n_y >= 1 (got {n_x}, {n_y})")));
    }
    let width = 2 * n_x;
    let mut present = Vec::new();
    for y in 0..=n_y {
        for x in 0..width {
            let keep = if y == 0 {
                x % 2 == 0 || (edge == EdgeKind::Zigzag && x < width - 2)
            } else if y == n_y {
                let beard = (x - (n_y - 1)).rem_euclid(2) == 0;
                let (lo, hi) = if (n_y - 1) % 2 == 0 { (0, width - 2) } else { (1, width - 1) };
                beard || (edge == EdgeKind::Zigzag && x > lo && x < hi)
            } else {
                true
            };
            if keep {
                present.push((x, y));
            }
        }
    }
    let label = |x: i64, y: i64| (x, y, brick_sublattice(x, y));
    let labels = present.iter().map(|&(x, y)| label(x, y)).collect();
    let bonds = brick_bonds(&present, None, label);
    Ok(Lattice::assemble(BoundarySpec::Sheet { n_x, n_y, edge }, labels, bonds))
}

pub fn adjacency_matrix(lat: &Lattice) -> HermitianOperator {
    let mut h = HermitianOperator::zeros(lat.n_sites);
    for &(i, j) in &lat.edges {
        h.set_real_symmetric(i, j, 1.0);
    }
    h
}

pub fn neighbors(lat: &Lattice, s: &SiteId) -> Result<Vec<SiteId>> {
    let s = lat.resolve(s)?;
    Ok(lat.neighbor_indices(s.linear).iter().map(|&j| lat.sites[j]).collect())
}
