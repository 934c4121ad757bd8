//! Routing subcells: a hexagonal lattice anchored at each base station, with
//! one relay node per occupied subcell and a 7-slot collision-free schedule.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{hex_circumradius, hex_spacing, NetworkRealization, Point2D};

/// Safety factor applied to the minimal subcell area that keeps subcells
/// occupied with high probability.
pub const OCCUPANCY_FACTOR: f64 = 2.0;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Axial coordinates `(q, r)` on a hexagonal lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Axial {
    pub q: i32,
    pub r: i32,
}

/// Neighbor offsets, in order: E, NE-ish, ..., going around the hexagon.
pub const DIRECTIONS: [(i32, i32); 6] = [(1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1)];

impl Axial {
    pub const fn new(q: i32, r: i32) -> Self {
        Axial { q, r }
    }

    pub fn neighbor(self, dir: usize) -> Axial {
        let (dq, dr) = DIRECTIONS[dir % 6];
        Axial::new(self.q + dq, self.r + dr)
    }

    pub fn neighbors(self) -> impl Iterator<Item = Axial> {
        (0..6).map(move |d| self.neighbor(d))
    }

    /// Lattice distance from the origin.
    pub fn hex_len(self) -> i32 {
        (self.q.abs() + self.r.abs() + (self.q + self.r).abs()) / 2
    }

    pub fn hex_distance(self, other: Axial) -> i32 {
        Axial::new(self.q - other.q, self.r - other.r).hex_len()
    }

    /// Planar offset of this lattice point for center-to-center spacing `s`.
    pub fn to_offset(self, s: f64) -> Point2D {
        Point2D::new(
            s * (self.q as f64 + self.r as f64 / 2.0),
            s * (self.r as f64 * SQRT3 / 2.0),
        )
    }

    /// Lattice point whose hexagonal Voronoi cell contains `p`.
    pub fn from_offset(p: Point2D, s: f64) -> Axial {
        let rf = p.y / (s * SQRT3 / 2.0);
        let qf = p.x / s - rf / 2.0;
        let sf = -qf - rf;
        let (mut q, mut r, s_) = (qf.round(), rf.round(), sf.round());
        let (dq, dr, ds) = ((q - qf).abs(), (r - rf).abs(), (s_ - sf).abs());
        if dq > dr && dq > ds {
            q = -r - s_;
        } else if dr > ds {
            r = -q - s_;
        }
        Axial::new(q as i32, r as i32)
    }

    /// Slot of the 7-coloring: neighbors of a subcell never share its color.
    pub fn color(self) -> u8 {
        (self.q + 3 * self.r).rem_euclid(7) as u8
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subcell {
    pub axial: Axial,
    pub center: Point2D,
    /// Relay: the cell's node nearest the subcell center.
    pub occupant: Option<usize>,
    pub color: u8,
    /// Whether the subcell center lies inside the owning cell.
    pub inside: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubcellGrid {
    pub cell: usize,
    pub spacing: f64,
    pub r_subcell: f64,
    /// Subcell containing the cell's base station.
    pub bs_axial: Axial,
    pub cells: Vec<Subcell>,
    /// Cell nodes paired with the index of the subcell containing them.
    pub members: Vec<(usize, usize)>,
    #[serde(skip)]
    index: HashMap<Axial, usize>,
}

impl SubcellGrid {
    pub fn get(&self, a: Axial) -> Option<&Subcell> {
        self.index.get(&a).map(|&i| &self.cells[i])
    }

    pub fn position(&self, a: Axial) -> Option<usize> {
        self.index.get(&a).copied()
    }

    /// Empty subcells whose center lies inside the cell.
    pub fn empty_count(&self) -> usize {
        self.cells
            .iter()
            .filter(|s| s.inside && s.occupant.is_none())
            .count()
    }
}

/// Subcell area: the occupancy-safe area scaled by [`OCCUPANCY_FACTOR`].
pub fn subcell_area(n: usize, m: usize, area: f64) -> Result<f64> {
    let per_cell = n as f64 / m as f64;
    if per_cell < 2.0 {
        return Err(Error::NTooSmall {
            n,
            reason: format!("routing subcells need n/m >= 2, got {per_cell}"),
        });
    }
    Ok(OCCUPANCY_FACTOR * (area / m as f64) * 2.0 * per_cell.ln() / per_cell)
}

/// Applies the 7-slot schedule `color(q, r) = (q + 3r) mod 7`.
pub fn seven_coloring(mut grid: SubcellGrid) -> SubcellGrid {
    for s in &mut grid.cells {
        s.color = s.axial.color();
    }
    grid
}

/// One subcell lattice shared by the whole network, anchored at the region
/// origin, so that the 7-slot schedule is consistent across cell borders.
///
/// Node coordinates are unwrapped around the node's own base station, which
/// is the identity without wrap. On a torus the lattice does not close up
/// on itself, so colors are only consistent away from the seam.
#[derive(Debug, Clone, PartialEq)]
pub struct SubcellLattice {
    pub spacing: f64,
    pub r_subcell: f64,
    /// Subcell of each node.
    pub node_axial: Vec<Axial>,
    occupant: HashMap<Axial, usize>,
}

impl SubcellLattice {
    pub fn new(real: &NetworkRealization) -> Result<Self> {
        let p = &real.params;
        let area = subcell_area(p.n, p.m, p.area)?;
        let spacing = hex_spacing(area);
        let layout = &real.layout;
        let mut node_axial = Vec::with_capacity(p.n);
        let mut best: HashMap<Axial, (f64, usize)> = HashMap::new();
        for (i, x) in real.nodes.iter().enumerate() {
            let bs = layout.centers[real.cell_of_node[i]];
            let u = bs + layout.delta(bs, *x);
            let a = Axial::from_offset(u, spacing);
            node_axial.push(a);
            let off = u - a.to_offset(spacing);
            let d2 = off.x * off.x + off.y * off.y;
            // ties go to the lower node index, which is visited first
            best.entry(a)
                .and_modify(|b| {
                    if d2 < b.0 {
                        *b = (d2, i);
                    }
                })
                .or_insert((d2, i));
        }
        Ok(SubcellLattice {
            spacing,
            r_subcell: hex_circumradius(area),
            node_axial,
            occupant: best.into_iter().map(|(a, (_, i))| (a, i)).collect(),
        })
    }

    /// Relay of a subcell: the node nearest its center.
    pub fn occupant(&self, a: Axial) -> Option<usize> {
        self.occupant.get(&a).copied()
    }

    /// Subcells of one cell: those whose center lies in the cell plus any
    /// holding one of the cell's nodes.
    pub fn grid(&self, real: &NetworkRealization, cell: usize) -> SubcellGrid {
        let layout = &real.layout;
        let spacing = self.spacing;
        let bs = layout.centers[cell];
        let bs_axial = Axial::from_offset(bs, spacing);
        let radius = (layout.r_cell * 1.25 / (spacing * SQRT3 / 2.0)).ceil() as i32 + 1;

        let mut index: HashMap<Axial, usize> = HashMap::new();
        let mut cells: Vec<Subcell> = Vec::new();
        let mut add = |a: Axial, inside: bool, cells: &mut Vec<Subcell>| -> usize {
            if let Some(&i) = index.get(&a) {
                return i;
            }
            index.insert(a, cells.len());
            cells.push(Subcell {
                axial: a,
                center: a.to_offset(spacing),
                occupant: self.occupant(a),
                color: 0,
                inside,
            });
            cells.len() - 1
        };
        for dq in -radius..=radius {
            for dr in -radius..=radius {
                let d = Axial::new(dq, dr);
                if d.hex_len() > radius {
                    continue;
                }
                let a = Axial::new(bs_axial.q + dq, bs_axial.r + dr);
                let c = a.to_offset(spacing);
                let inside = if layout.wrap {
                    let w = Point2D::new(c.x.rem_euclid(layout.side), c.y.rem_euclid(layout.side));
                    layout.nearest_center(w) == cell
                } else {
                    layout.contains(c) && layout.nearest_center(c) == cell
                };
                if inside {
                    add(a, true, &mut cells);
                }
            }
        }
        let mut members = Vec::new();
        for (i, &c) in real.cell_of_node.iter().enumerate() {
            if c == cell {
                members.push((i, add(self.node_axial[i], false, &mut cells)));
            }
        }

        // canonical order by axial coordinate
        let mut order: Vec<usize> = (0..cells.len()).collect();
        order.sort_by_key(|&i| cells[i].axial);
        let mut remap = vec![0; cells.len()];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = new;
        }
        let cells: Vec<Subcell> = order.iter().map(|&i| cells[i].clone()).collect();
        let index = cells
            .iter()
            .enumerate()
            .map(|(i, s)| (s.axial, i))
            .collect();
        let members = members.into_iter().map(|(n, i)| (n, remap[i])).collect();

        seven_coloring(SubcellGrid {
            cell,
            spacing,
            r_subcell: self.r_subcell,
            bs_axial,
            cells,
            members,
            index,
        })
    }
}

/// Builds the routing-subcell grid of one cell on the network-wide lattice.
pub fn build_subcells(real: &NetworkRealization, cell: usize) -> Result<SubcellGrid> {
    Ok(SubcellLattice::new(real)?.grid(real, cell))
}
