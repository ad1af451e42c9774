//! Lattice topologies and edge-list generators.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Chain,
    Square,
    Kagome,
    Explicit,
}

/// Site graph of the array. Edges are stored once per unordered pair with
/// `i < j`; generators never emit self-loops and parallel edges collapse.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeSpec {
    topology: Topology,
    boundary: Boundary,
    num_sites: usize,
    edges: Vec<(usize, usize)>,
}

impl LatticeSpec {
    pub fn chain(num_sites: usize, boundary: Boundary) -> Result<Self> {
        if num_sites == 0 {
            return Err(Error::Lattice("chain needs at least one site".into()));
        }
        let mut edges = BTreeSet::new();
        for i in 0..num_sites.saturating_sub(1) {
            edges.insert((i, i + 1));
        }
        if boundary == Boundary::Periodic && num_sites > 2 {
            edges.insert((0, num_sites - 1));
        }
        Ok(Self { topology: Topology::Chain, boundary, num_sites, edges: edges.into_iter().collect() })
    }

    /// Square lattice with `side x side` sites; site index is `x + side * y`.
    pub fn square(side: usize, boundary: Boundary) -> Result<Self> {
        if side < 2 {
            return Err(Error::Lattice("square lattice needs side >= 2".into()));
        }
        let idx = |x: usize, y: usize| x + side * y;
        let mut edges = BTreeSet::new();
        for y in 0..side {
            for x in 0..side {
                if x + 1 < side {
                    edges.insert(ordered(idx(x, y), idx(x + 1, y)));
                } else if boundary == Boundary::Periodic && side > 2 {
                    edges.insert(ordered(idx(x, y), idx(0, y)));
                }
                if y + 1 < side {
                    edges.insert(ordered(idx(x, y), idx(x, y + 1)));
                } else if boundary == Boundary::Periodic && side > 2 {
                    edges.insert(ordered(idx(x, y), idx(x, 0)));
                }
            }
        }
        Ok(Self {
            topology: Topology::Square,
            boundary,
            num_sites: side * side,
            edges: edges.into_iter().collect(),
        })
    }

    /// Kagome lattice of corner-sharing triangles with `cells_x x cells_y`
    /// unit cells of three sites each. With periodic boundaries every site
    /// has degree 4.
    pub fn kagome(cells_x: usize, cells_y: usize, boundary: Boundary) -> Result<Self> {
        if cells_x == 0 || cells_y == 0 {
            return Err(Error::Lattice("kagome needs at least one unit cell".into()));
        }
        if boundary == Boundary::Periodic && (cells_x < 2 || cells_y < 2) {
            return Err(Error::Lattice(
                "periodic kagome needs at least 2x2 unit cells to avoid doubled bonds".into(),
            ));
        }
        let idx = |x: usize, y: usize, s: usize| (y * cells_x + x) * 3 + s;
        let mut edges = BTreeSet::new();
        for y in 0..cells_y {
            for x in 0..cells_x {
                let (a, b, c) = (idx(x, y, 0), idx(x, y, 1), idx(x, y, 2));
                // up triangle
                edges.insert(ordered(a, b));
                edges.insert(ordered(a, c));
                edges.insert(ordered(b, c));
                // down-triangle bonds to neighbouring cells
                let xe = x + 1;
                let ys = y.checked_sub(1);
                let yn = y + 1;
                match boundary {
                    Boundary::Periodic => {
                        let xe = xe % cells_x;
                        let yn = yn % cells_y;
                        let ys = ys.unwrap_or(cells_y - 1);
                        edges.insert(ordered(b, idx(xe, y, 0)));
                        edges.insert(ordered(c, idx(x, yn, 0)));
                        edges.insert(ordered(b, idx(xe, ys, 2)));
                    }
                    Boundary::Open => {
                        if xe < cells_x {
                            edges.insert(ordered(b, idx(xe, y, 0)));
                        }
                        if yn < cells_y {
                            edges.insert(ordered(c, idx(x, yn, 0)));
                        }
                        if let Some(ys) = ys {
                            if xe < cells_x {
                                edges.insert(ordered(b, idx(xe, ys, 2)));
                            }
                        }
                    }
                }
            }
        }
        Ok(Self {
            topology: Topology::Kagome,
            boundary,
            num_sites: cells_x * cells_y * 3,
            edges: edges.into_iter().collect(),
        })
    }

    pub fn explicit(num_sites: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if num_sites == 0 {
            return Err(Error::Lattice("lattice needs at least one site".into()));
        }
        let mut set = BTreeSet::new();
        for (i, j) in edges {
            if i == j {
                return Err(Error::Lattice(format!("self-loop at site {i}")));
            }
            if i >= num_sites || j >= num_sites {
                return Err(Error::Lattice(format!(
                    "edge ({i}, {j}) references a site outside 0..{num_sites}"
                )));
            }
            set.insert(ordered(i, j));
        }
        Ok(Self {
            topology: Topology::Explicit,
            boundary: Boundary::Open,
            num_sites,
            edges: set.into_iter().collect(),
        })
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    /// Edges as ordered pairs `(i, j)` with `i < j`, each unordered pair once.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degree(&self, site: usize) -> usize {
        self.edges.iter().filter(|&&(i, j)| i == site || j == site).count()
    }
}

fn ordered(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_edge_counts() {
        let open = LatticeSpec::chain(5, Boundary::Open).unwrap();
        assert_eq!(open.edges().len(), 4);
        let ring = LatticeSpec::chain(5, Boundary::Periodic).unwrap();
        assert_eq!(ring.edges().len(), 5);
    }

    #[test]
    fn periodic_square_edge_count() {
        let l = 3;
        let lat = LatticeSpec::square(l, Boundary::Periodic).unwrap();
        assert_eq!(lat.edges().len(), 2 * l * l);
        for s in 0..lat.num_sites() {
            assert_eq!(lat.degree(s), 4);
        }
    }

    #[test]
    fn open_square_edge_count() {
        let l = 4;
        let lat = LatticeSpec::square(l, Boundary::Open).unwrap();
        assert_eq!(lat.edges().len(), 2 * l * (l - 1));
    }

    #[test]
    fn kagome_degree_pattern() {
        let lat = LatticeSpec::kagome(2, 2, Boundary::Periodic).unwrap();
        assert_eq!(lat.num_sites(), 12);
        for s in 0..lat.num_sites() {
            assert_eq!(lat.degree(s), 4, "site {s}");
        }
        // edges = 4 * sites / 2
        assert_eq!(lat.edges().len(), 2 * lat.num_sites());
    }

    #[test]
    fn explicit_validation() {
        assert!(LatticeSpec::explicit(3, vec![(0, 0)]).is_err());
        assert!(LatticeSpec::explicit(3, vec![(0, 5)]).is_err());
        let ok = LatticeSpec::explicit(3, vec![(0, 1), (1, 0), (1, 2)]).unwrap();
        assert_eq!(ok.edges().len(), 2);
    }
}
