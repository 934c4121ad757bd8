//! Base-station layout, node and relay placement, and cell association.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::params::{instantiate, InstanceParams, ModelConstants, ScalingExponents};
use crate::subcell::Axial;

const SQRT3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2D { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
}

impl std::ops::Add for Point2D {
    type Output = Point2D;
    fn add(self, o: Point2D) -> Point2D {
        Point2D::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Point2D {
    type Output = Point2D;
    fn sub(self, o: Point2D) -> Point2D {
        Point2D::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Mul<f64> for Point2D {
    type Output = Point2D;
    fn mul(self, s: f64) -> Point2D {
        Point2D::new(self.x * s, self.y * s)
    }
}

/// Square deployment region of side `side` tiled by hexagonal cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HexLayout {
    pub centers: Vec<Point2D>,
    /// Circumradius of a regular hexagon with area `A / m`.
    pub r_cell: f64,
    pub side: f64,
    pub wrap: bool,
}

/// Circumradius of a regular hexagon of the given area.
pub fn hex_circumradius(area: f64) -> f64 {
    (2.0 * area / (3.0 * SQRT3)).sqrt()
}

/// Center-to-center spacing of a hexagonal lattice whose cells have the given area.
pub fn hex_spacing(area: f64) -> f64 {
    (2.0 * area / SQRT3).sqrt()
}

impl HexLayout {
    pub fn m(&self) -> usize {
        self.centers.len()
    }

    pub fn area(&self) -> f64 {
        self.side * self.side
    }

    /// Displacement `q - p`, taking the shortest torus image when wrapping.
    #[inline]
    pub fn delta(&self, p: Point2D, q: Point2D) -> Point2D {
        let mut dx = q.x - p.x;
        let mut dy = q.y - p.y;
        if self.wrap {
            let s = self.side;
            dx -= s * (dx / s).round();
            dy -= s * (dy / s).round();
        }
        Point2D::new(dx, dy)
    }

    #[inline]
    pub fn dist2(&self, p: Point2D, q: Point2D) -> f64 {
        let d = self.delta(p, q);
        d.x * d.x + d.y * d.y
    }

    pub fn distance(&self, p: Point2D, q: Point2D) -> f64 {
        self.dist2(p, q).sqrt()
    }

    pub fn contains(&self, p: Point2D) -> bool {
        (0.0..=self.side).contains(&p.x) && (0.0..=self.side).contains(&p.y)
    }

    /// Maps a point into the region (wrapping) or reports whether it lies inside.
    fn canonical(&self, p: Point2D) -> Option<Point2D> {
        if self.wrap {
            Some(Point2D::new(
                p.x.rem_euclid(self.side),
                p.y.rem_euclid(self.side),
            ))
        } else if self.contains(p) {
            Some(p)
        } else {
            None
        }
    }

    /// Index of the nearest base station; ties go to the lowest index.
    pub fn nearest_center(&self, p: Point2D) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, c) in self.centers.iter().enumerate() {
            let d = self.dist2(p, *c);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }
}

/// Euclidean distance, or the shortest torus distance when the layout wraps.
pub fn distance(p: Point2D, q: Point2D, layout: &HexLayout) -> f64 {
    layout.distance(p, q)
}

/// Places `m` base stations on a staggered near-hexagonal grid covering a
/// square of area `area`.
///
/// Rows alternate a half-column offset. The row count is chosen so that the
/// row pitch is close to `sqrt(3)/2` of the column pitch, which is the
/// hexagonal ratio.
pub fn hex_layout(m: usize, area: f64, wrap: bool) -> HexLayout {
    assert!(m >= 1 && area > 0.0, "hex_layout needs m >= 1 and area > 0");
    let side = area.sqrt();
    let rows = ((2.0 * m as f64 / SQRT3).sqrt().round() as usize).clamp(1, m);
    let base = m / rows;
    let extra = m % rows;
    let mut centers = Vec::with_capacity(m);
    for row in 0..rows {
        let count = base + usize::from(row < extra);
        let pitch = side / count as f64;
        let stagger = if rows == 1 {
            0.5
        } else if row % 2 == 0 {
            0.25
        } else {
            0.75
        };
        let y = (row as f64 + 0.5) * side / rows as f64;
        for col in 0..count {
            centers.push(Point2D::new((col as f64 + stagger) * pitch, y));
        }
    }
    HexLayout {
        centers,
        r_cell: hex_circumradius(area / m as f64),
        side,
        wrap,
    }
}

/// Draws `n` i.i.d. uniform positions over the layout's region.
pub fn place_nodes(n: usize, layout: &HexLayout, seed: u64) -> Vec<Point2D> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let x: f64 = rng.gen();
            let y: f64 = rng.gen();
            Point2D::new(x * layout.side, y * layout.side)
        })
        .collect()
}

/// Relay placement: positions, owning cell and lattice coordinates within the
/// cell's relay sub-grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelayPlacement {
    pub positions: Vec<Point2D>,
    pub cell: Vec<usize>,
    pub axial: Vec<Axial>,
    /// Lattice spacing actually used in each cell (after any shrink to fit).
    pub spacing: Vec<f64>,
    /// Offset of the relay sub-grid origin from its base station.
    pub offset: Vec<Point2D>,
}

/// Axial coordinates of a hexagonal spiral: origin, then ring 1, ring 2, ...
pub fn hex_spiral(count: usize) -> Vec<Axial> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(Axial::new(0, 0));
    let mut radius = 1;
    while out.len() < count {
        let mut cur = Axial::new(-radius, radius);
        for dir in 0..6 {
            for _ in 0..radius {
                out.push(cur);
                if out.len() == count {
                    return out;
                }
                cur = cur.neighbor(dir);
            }
        }
        radius += 1;
    }
    out
}

/// Places `k` relays: `floor(k/m)` per cell on a nested hexagonal sub-grid,
/// with the remainder going one per cell in index order.
///
/// The sub-grid has the spacing of a hexagonal tessellation into `m + k`
/// microcells and is offset from the base station by half a spacing so that
/// no relay coincides with its BS. If a cell's relays do not all fall inside
/// it, that cell's sub-grid is shrunk until they do.
pub fn place_rns(k: usize, layout: &HexLayout) -> RelayPlacement {
    let m = layout.m();
    let spacing0 = hex_spacing(layout.area() / (m + k) as f64);
    let mut out = RelayPlacement {
        positions: Vec::with_capacity(k),
        cell: Vec::with_capacity(k),
        axial: Vec::with_capacity(k),
        spacing: Vec::with_capacity(m),
        offset: Vec::with_capacity(m),
    };
    for (c, bs) in layout.centers.iter().enumerate() {
        let count = k / m + usize::from(c < k % m);
        let spiral = hex_spiral(count);
        let mut spacing = spacing0;
        let mut placed: Vec<Point2D>;
        let mut tries = 0;
        loop {
            let offset = Point2D::new(spacing / 2.0, 0.0);
            placed = Vec::with_capacity(count);
            let mut ok = true;
            for a in &spiral {
                let p = *bs + offset + a.to_offset(spacing);
                match layout.canonical(p) {
                    Some(q) if layout.nearest_center(q) == c => placed.push(q),
                    _ => {
                        ok = false;
                        break;
                    }
                }
            }
            tries += 1;
            if ok || tries > 200 {
                break;
            }
            spacing *= 0.95;
        }
        out.spacing.push(spacing);
        out.offset.push(Point2D::new(spacing / 2.0, 0.0));
        for (p, a) in placed.into_iter().zip(spiral) {
            out.positions.push(p);
            out.cell.push(c);
            out.axial.push(a);
        }
    }
    out
}

/// Uniform bucket grid for nearest-point queries over a layout region.
#[derive(Debug, Clone)]
pub struct PointIndex {
    points: Vec<Point2D>,
    buckets: Vec<Vec<u32>>,
    nb: usize,
    cell: f64,
    side: f64,
    wrap: bool,
}

impl PointIndex {
    pub fn new(points: &[Point2D], layout: &HexLayout) -> Self {
        let nb = ((points.len() as f64 / 2.0).sqrt().ceil() as usize).clamp(1, 1024);
        let cell = layout.side / nb as f64;
        let mut buckets = vec![Vec::new(); nb * nb];
        for (i, p) in points.iter().enumerate() {
            let (bx, by) = Self::bucket_of(*p, cell, nb);
            buckets[by * nb + bx].push(i as u32);
        }
        PointIndex {
            points: points.to_vec(),
            buckets,
            nb,
            cell,
            side: layout.side,
            wrap: layout.wrap,
        }
    }

    fn bucket_of(p: Point2D, cell: f64, nb: usize) -> (usize, usize) {
        let bx = ((p.x / cell).floor().max(0.0) as usize).min(nb - 1);
        let by = ((p.y / cell).floor().max(0.0) as usize).min(nb - 1);
        (bx, by)
    }

    #[inline]
    fn dist2(&self, p: Point2D, q: Point2D) -> f64 {
        let mut dx = q.x - p.x;
        let mut dy = q.y - p.y;
        if self.wrap {
            dx -= self.side * (dx / self.side).round();
            dy -= self.side * (dy / self.side).round();
        }
        dx * dx + dy * dy
    }

    fn consider(&self, idx: u32, p: Point2D, best: &mut Option<(f64, usize)>) {
        let d = self.dist2(p, self.points[idx as usize]);
        let i = idx as usize;
        match best {
            Some((bd, bi)) if d > *bd || (d == *bd && i > *bi) => {}
            _ => *best = Some((d, i)),
        }
    }

    /// Nearest indexed point to `p`; ties resolve to the lowest index.
    pub fn nearest(&self, p: Point2D) -> Option<usize> {
        if self.points.is_empty() {
            return None;
        }
        let nb = self.nb as isize;
        let (bx, by) = Self::bucket_of(p, self.cell, self.nb);
        let (bx, by) = (bx as isize, by as isize);
        let mut best: Option<(f64, usize)> = None;
        let mut r: isize = 0;
        loop {
            if 2 * r + 1 >= nb {
                for i in 0..self.points.len() {
                    self.consider(i as u32, p, &mut best);
                }
                break;
            }
            for dy in -r..=r {
                for dx in -r..=r {
                    if dx.abs() != r && dy.abs() != r {
                        continue;
                    }
                    let (mut x, mut y) = (bx + dx, by + dy);
                    if self.wrap {
                        x = x.rem_euclid(nb);
                        y = y.rem_euclid(nb);
                    } else if x < 0 || y < 0 || x >= nb || y >= nb {
                        continue;
                    }
                    for &idx in &self.buckets[(y * nb + x) as usize] {
                        self.consider(idx, p, &mut best);
                    }
                }
            }
            if let Some((bd, _)) = best {
                let reach = r as f64 * self.cell;
                // strict, so that an equidistant lower index outside is still seen
                if bd < reach * reach {
                    break;
                }
            }
            r += 1;
        }
        best.map(|(_, i)| i)
    }
}

/// Maps every node to its nearest base station (ties to the lowest index).
pub fn assign_cells(nodes: &[Point2D], layout: &HexLayout) -> Vec<usize> {
    let index = PointIndex::new(&layout.centers, layout);
    nodes
        .iter()
        .map(|p| index.nearest(*p).expect("layout has at least one BS"))
        .collect()
}

/// One sampled network: immutable after construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkRealization {
    pub exponents: ScalingExponents,
    pub constants: ModelConstants,
    pub params: InstanceParams,
    pub layout: HexLayout,
    pub nodes: Vec<Point2D>,
    pub relays: RelayPlacement,
    pub cell_of_node: Vec<usize>,
    pub seed: u64,
}

impl NetworkRealization {
    pub fn generate(
        exponents: &ScalingExponents,
        constants: &ModelConstants,
        n: usize,
        seed: u64,
        wrap: bool,
    ) -> Result<Self> {
        let params = instantiate(exponents, constants, n)?;
        Ok(Self::from_params(exponents, constants, params, seed, wrap))
    }

    pub fn from_params(
        exponents: &ScalingExponents,
        constants: &ModelConstants,
        params: InstanceParams,
        seed: u64,
        wrap: bool,
    ) -> Self {
        let layout = hex_layout(params.m, params.area, wrap);
        let nodes = place_nodes(params.n, &layout, seed);
        let cell_of_node = assign_cells(&nodes, &layout);
        let relays = place_rns(params.k, &layout);
        NetworkRealization {
            exponents: *exponents,
            constants: *constants,
            params,
            layout,
            nodes,
            relays,
            cell_of_node,
            seed,
        }
    }

    /// Node indices grouped by cell, each group in increasing node order.
    pub fn nodes_by_cell(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.layout.m()];
        for (i, &c) in self.cell_of_node.iter().enumerate() {
            groups[c].push(i);
        }
        groups
    }

    /// Squared distance with the far-field guard applied.
    #[inline]
    pub fn guarded_dist2(&self, p: Point2D, q: Point2D) -> f64 {
        let dmin = self.constants.min_distance();
        self.layout.dist2(p, q).max(dmin * dmin)
    }
}
