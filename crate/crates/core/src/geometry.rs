//! Discretized domains: masked uniform lattices in one and two dimensions and
//! radial meshes for n-dimensional balls.
//!
//! Lattice nodes sit at `origin + (i, j) * h`. A node belongs to the interior
//! when the node itself lies strictly inside the analytic shape; homogeneous
//! Dirichlet data live on the boundary nodes (lattice nodes outside the mask
//! that touch an interior node along an axis). Every mask keeps two lattice
//! layers of margin so that clamped ghost values always have a home.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Lattice layers kept between the outermost mask node and the lattice edge.
pub const MARGIN: usize = 2;

/// Analytic shapes of the domain catalog. All shapes are centred at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// The open interval `(-half_length, half_length)`.
    Interval { half_length: f64 },
    Disk { radius: f64 },
    Rectangle { width: f64, height: f64 },
    Ellipse { semi_x: f64, semi_y: f64 },
    /// Points within `radius` of the segment `[-length/2, length/2] x {0}`.
    Stadium { length: f64, radius: f64 },
    /// The square `(-arm, arm)^2` with the quadrant `[0, arm)^2` removed.
    LShape { arm: f64 },
}

/// Shape kinds, used by the configuration layer and for unit-area presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShapeKind {
    Interval,
    Disk,
    Rectangle,
    Ellipse,
    Stadium,
    LShape,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 6] = [
        ShapeKind::Interval,
        ShapeKind::Disk,
        ShapeKind::Rectangle,
        ShapeKind::Ellipse,
        ShapeKind::Stadium,
        ShapeKind::LShape,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ShapeKind::Interval => "interval",
            ShapeKind::Disk => "disk",
            ShapeKind::Rectangle => "rectangle",
            ShapeKind::Ellipse => "ellipse",
            ShapeKind::Stadium => "stadium",
            ShapeKind::LShape => "lshape",
        }
    }

    pub fn from_name(name: &str) -> Option<ShapeKind> {
        ShapeKind::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl Shape {
    pub fn kind(&self) -> ShapeKind {
        match self {
            Shape::Interval { .. } => ShapeKind::Interval,
            Shape::Disk { .. } => ShapeKind::Disk,
            Shape::Rectangle { .. } => ShapeKind::Rectangle,
            Shape::Ellipse { .. } => ShapeKind::Ellipse,
            Shape::Stadium { .. } => ShapeKind::Stadium,
            Shape::LShape { .. } => ShapeKind::LShape,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Shape::Interval { .. } => 1,
            _ => 2,
        }
    }

    /// Length parameters in declaration order.
    pub fn params(&self) -> Vec<f64> {
        match *self {
            Shape::Interval { half_length } => vec![half_length],
            Shape::Disk { radius } => vec![radius],
            Shape::Rectangle { width, height } => vec![width, height],
            Shape::Ellipse { semi_x, semi_y } => vec![semi_x, semi_y],
            Shape::Stadium { length, radius } => vec![length, radius],
            Shape::LShape { arm } => vec![arm],
        }
    }

    /// Analytic measure (length or area).
    pub fn area(&self) -> f64 {
        match *self {
            Shape::Interval { half_length } => 2.0 * half_length,
            Shape::Disk { radius } => PI * radius * radius,
            Shape::Rectangle { width, height } => width * height,
            Shape::Ellipse { semi_x, semi_y } => PI * semi_x * semi_y,
            Shape::Stadium { length, radius } => 2.0 * radius * length + PI * radius * radius,
            Shape::LShape { arm } => 3.0 * arm * arm,
        }
    }

    /// Shapes whose boundary has corners, or which the sweeps report as
    /// informational rows only.
    pub fn flagged_nonsmooth(&self) -> bool {
        matches!(
            self,
            Shape::Rectangle { .. } | Shape::Stadium { .. } | Shape::LShape { .. }
        )
    }

    /// Whether this shape is a ball (the control case of a Faber-Krahn sweep).
    pub fn is_ball(&self) -> bool {
        matches!(self, Shape::Interval { .. } | Shape::Disk { .. })
    }

    /// Unit-measure preset of a given kind. `aspect` is the ratio of the long
    /// to the short extent and is ignored for disks, intervals and L-shapes.
    pub fn unit_area(kind: ShapeKind, aspect: f64) -> Shape {
        match kind {
            ShapeKind::Interval => Shape::Interval { half_length: 0.5 },
            ShapeKind::Disk => Shape::Disk {
                radius: (1.0 / PI).sqrt(),
            },
            ShapeKind::Rectangle => Shape::Rectangle {
                width: aspect.sqrt(),
                height: 1.0 / aspect.sqrt(),
            },
            ShapeKind::Ellipse => Shape::Ellipse {
                semi_x: (aspect / PI).sqrt(),
                semi_y: (1.0 / (aspect * PI)).sqrt(),
            },
            ShapeKind::Stadium => {
                // straight part of length (aspect - 1) * 2r, total extent aspect * 2r
                let l_over_r = 2.0 * (aspect - 1.0).max(0.0);
                let radius = (1.0 / (2.0 * l_over_r + PI)).sqrt();
                Shape::Stadium {
                    length: l_over_r * radius,
                    radius,
                }
            }
            ShapeKind::LShape => Shape::LShape {
                arm: (1.0f64 / 3.0).sqrt(),
            },
        }
    }

    fn validate(&self) -> Result<()> {
        let params = self.params();
        let ok = match self {
            // a stadium with zero straight part is a disk, still valid
            Shape::Stadium { length, radius } => *length >= 0.0 && *radius > 0.0,
            _ => params.iter().all(|&v| v > 0.0),
        };
        if !ok || params.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidShape(format!(
                "{} needs positive finite length parameters, got {:?}",
                self.kind().name(),
                params
            )));
        }
        Ok(())
    }

    /// Half extents of the bounding box.
    fn half_extent(&self) -> (f64, f64) {
        match *self {
            Shape::Interval { half_length } => (half_length, 0.0),
            Shape::Disk { radius } => (radius, radius),
            Shape::Rectangle { width, height } => (width / 2.0, height / 2.0),
            Shape::Ellipse { semi_x, semi_y } => (semi_x, semi_y),
            Shape::Stadium { length, radius } => (length / 2.0 + radius, radius),
            Shape::LShape { arm } => (arm, arm),
        }
    }

    /// Strict containment with a guard band `eps` treated as outside.
    pub fn contains(&self, x: f64, y: f64, eps: f64) -> bool {
        match *self {
            Shape::Interval { half_length } => x.abs() < half_length - eps,
            Shape::Disk { radius } => x.hypot(y) < radius - eps,
            Shape::Rectangle { width, height } => {
                x.abs() < width / 2.0 - eps && y.abs() < height / 2.0 - eps
            }
            Shape::Ellipse { semi_x, semi_y } => {
                let s = (x / semi_x).powi(2) + (y / semi_y).powi(2);
                s < 1.0 - eps / semi_x.min(semi_y)
            }
            Shape::Stadium { length, radius } => {
                let cx = x.clamp(-length / 2.0, length / 2.0);
                (x - cx).hypot(y) < radius - eps
            }
            Shape::LShape { arm } => {
                let in_square = x.abs() < arm - eps && y.abs() < arm - eps;
                let in_notch = x > -eps && y > -eps;
                in_square && !in_notch
            }
        }
    }
}

/// Lattice resolution: an explicit spacing, or a cell count across the
/// interval diameter (1D only).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Resolution {
    Spacing(f64),
    Cells(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeSpec {
    pub shape: Shape,
    pub resolution: Resolution,
}

impl ShapeSpec {
    pub fn new(shape: Shape, resolution: Resolution) -> Self {
        ShapeSpec { shape, resolution }
    }

    /// Same shape at a different resolution.
    pub fn with_resolution(&self, resolution: Resolution) -> Self {
        ShapeSpec {
            shape: self.shape,
            resolution,
        }
    }
}

/// A bounded domain discretized on a masked uniform lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDomain {
    dim: usize,
    h: f64,
    origin: [f64; 2],
    nx: usize,
    ny: usize,
    mask: Vec<bool>,
    interior: Vec<usize>,
    boundary: Vec<usize>,
    interior_index: Vec<u32>,
    boundary_index: Vec<u32>,
}

const NONE: u32 = u32::MAX;

impl GridDomain {
    /// Builds a domain from an explicit lattice mask and validates every
    /// structural invariant (margin, genuine interior, connectivity).
    pub fn from_mask(
        dim: usize,
        h: f64,
        origin: [f64; 2],
        nx: usize,
        ny: usize,
        mask: Vec<bool>,
    ) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(Error::InvalidArgument(format!("dimension {dim} unsupported")));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument(format!("spacing must be positive, got {h}")));
        }
        if mask.len() != nx * ny || (dim == 1 && ny != 1) {
            return Err(Error::InvalidArgument("mask size does not match lattice".into()));
        }
        let mut interior = Vec::new();
        let mut interior_index = vec![NONE; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let l = j * nx + i;
                if !mask[l] {
                    continue;
                }
                let margin_ok = i >= MARGIN
                    && i + MARGIN < nx
                    && (dim == 1 || (j >= MARGIN && j + MARGIN < ny));
                if !margin_ok {
                    return Err(Error::InvalidArgument(format!(
                        "mask node ({i}, {j}) violates the {MARGIN}-layer lattice margin"
                    )));
                }
                interior_index[l] = interior.len() as u32;
                interior.push(l);
            }
        }
        let mut domain = GridDomain {
            dim,
            h,
            origin,
            nx,
            ny,
            mask,
            interior,
            boundary: Vec::new(),
            interior_index,
            boundary_index: vec![NONE; nx * ny],
        };
        if domain.interior.is_empty() {
            return Err(Error::TooCoarse);
        }
        for l in 0..nx * ny {
            if !domain.mask[l] && domain.neighbors(l).any(|m| domain.mask[m]) {
                domain.boundary_index[l] = domain.boundary.len() as u32;
                domain.boundary.push(l);
            }
        }
        let has_deep_node = domain
            .interior
            .iter()
            .any(|&l| domain.neighbors(l).all(|m| domain.mask[m]));
        if !has_deep_node {
            return Err(Error::TooCoarse);
        }
        let components = domain.count_components();
        if components != 1 {
            return Err(Error::Disconnected { components });
        }
        Ok(domain)
    }

    fn count_components(&self) -> usize {
        let mut seen = vec![false; self.mask.len()];
        let mut components = 0;
        let mut queue = VecDeque::new();
        for &start in &self.interior {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            queue.push_back(start);
            while let Some(l) = queue.pop_front() {
                for m in self.neighbors(l) {
                    if self.mask[m] && !seen[m] {
                        seen[m] = true;
                        queue.push_back(m);
                    }
                }
            }
        }
        components
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    /// Lattice shape `(nx, ny)`; `ny == 1` in one dimension.
    pub fn lattice_shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn num_interior(&self) -> usize {
        self.interior.len()
    }

    pub fn num_boundary(&self) -> usize {
        self.boundary.len()
    }

    /// Lattice indices of the interior nodes, in lexicographic order.
    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior
    }

    /// Lattice indices of the boundary nodes, in lexicographic order.
    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary
    }

    pub fn interior_index(&self, lattice: usize) -> Option<usize> {
        match self.interior_index[lattice] {
            NONE => None,
            k => Some(k as usize),
        }
    }

    pub fn boundary_index(&self, lattice: usize) -> Option<usize> {
        match self.boundary_index[lattice] {
            NONE => None,
            k => Some(k as usize),
        }
    }

    /// Lattice offsets of the `2 * dim` axis neighbours.
    pub fn offsets(&self) -> Vec<isize> {
        if self.dim == 1 {
            vec![1, -1]
        } else {
            vec![1, -1, self.nx as isize, -(self.nx as isize)]
        }
    }

    /// Axis neighbours of a lattice node that lie on the lattice.
    pub fn neighbors(&self, lattice: usize) -> impl Iterator<Item = usize> + '_ {
        let (i, j) = (lattice % self.nx, lattice / self.nx);
        let mut out = [usize::MAX; 4];
        if i + 1 < self.nx {
            out[0] = lattice + 1;
        }
        if i > 0 {
            out[1] = lattice - 1;
        }
        if self.dim == 2 {
            if j + 1 < self.ny {
                out[2] = lattice + self.nx;
            }
            if j > 0 {
                out[3] = lattice - self.nx;
            }
        }
        out.into_iter().filter(|&m| m != usize::MAX)
    }

    /// Physical coordinates of a lattice node (`y = 0` in one dimension).
    pub fn coords(&self, lattice: usize) -> [f64; 2] {
        let (i, j) = (lattice % self.nx, lattice / self.nx);
        [
            self.origin[0] + i as f64 * self.h,
            self.origin[1] + j as f64 * self.h,
        ]
    }

    /// Coordinates of every interior node, in interior order.
    pub fn interior_coords(&self) -> Vec<[f64; 2]> {
        self.interior.iter().map(|&l| self.coords(l)).collect()
    }

    /// Run-length text dump of the mask (see [`GridDomain::from_mask_rle`]).
    pub fn mask_rle(&self) -> String {
        let mut out = String::new();
        writeln!(out, "mask-rle 1").unwrap();
        writeln!(out, "dim {}", self.dim).unwrap();
        writeln!(out, "lattice {} {}", self.nx, self.ny).unwrap();
        writeln!(out, "h {:e}", self.h).unwrap();
        writeln!(out, "origin {:e} {:e}", self.origin[0], self.origin[1]).unwrap();
        for j in 0..self.ny {
            let row = &self.mask[j * self.nx..(j + 1) * self.nx];
            let mut runs = Vec::new();
            let mut current = false;
            let mut len = 0usize;
            for &m in row {
                if m == current {
                    len += 1;
                } else {
                    runs.push(len);
                    current = m;
                    len = 1;
                }
            }
            runs.push(len);
            let line: Vec<String> = runs.iter().map(|r| r.to_string()).collect();
            writeln!(out, "{}", line.join(" ")).unwrap();
        }
        out
    }

    /// Parses the run-length dump produced by [`GridDomain::mask_rle`]. Each
    /// row line lists alternating run lengths starting with an outside run.
    pub fn from_mask_rle(text: &str) -> Result<Self> {
        let err = |m: &str| Error::format("mask dump", m);
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("mask-rle 1") {
            return Err(err("missing 'mask-rle 1' header"));
        }
        let mut field = |key: &str| -> Result<Vec<String>> {
            let line = lines.next().ok_or_else(|| err("truncated header"))?;
            let mut parts = line.split_whitespace();
            if parts.next() != Some(key) {
                return Err(err(&format!("expected '{key}' line")));
            }
            Ok(parts.map(String::from).collect())
        };
        let num = |s: &str| s.parse::<f64>().map_err(|_| err("bad number"));
        let dim = field("dim")?[0].parse::<usize>().map_err(|_| err("bad dim"))?;
        let lat = field("lattice")?;
        let nx = lat[0].parse::<usize>().map_err(|_| err("bad nx"))?;
        let ny = lat[1].parse::<usize>().map_err(|_| err("bad ny"))?;
        let h = num(&field("h")?[0])?;
        let o = field("origin")?;
        let origin = [num(&o[0])?, num(&o[1])?];
        let mut mask = Vec::with_capacity(nx * ny);
        for _ in 0..ny {
            let line = lines.next().ok_or_else(|| err("missing mask row"))?;
            let mut value = false;
            let start = mask.len();
            for tok in line.split_whitespace() {
                let run = tok.parse::<usize>().map_err(|_| err("bad run length"))?;
                mask.extend(std::iter::repeat_n(value, run));
                value = !value;
            }
            if mask.len() - start != nx {
                return Err(err("row length does not match lattice width"));
            }
        }
        GridDomain::from_mask(dim, h, origin, nx, ny, mask)
    }
}

/// Rasterizes a shape on its lattice.
pub fn make_domain(spec: &ShapeSpec) -> Result<GridDomain> {
    spec.shape.validate()?;
    match spec.shape {
        Shape::Interval { half_length } => {
            let cells = match spec.resolution {
                Resolution::Cells(m) => m,
                Resolution::Spacing(h) => {
                    if h.is_nan() || h <= 0.0 {
                        return Err(Error::InvalidShape(format!("spacing must be positive, got {h}")));
                    }
                    let m = 2.0 * half_length / h;
                    if (m - m.round()).abs() > 1e-6 * m {
                        return Err(Error::InvalidShape(format!(
                            "spacing {h} does not divide the interval length {}",
                            2.0 * half_length
                        )));
                    }
                    m.round() as usize
                }
            };
            if cells < 2 {
                return Err(Error::TooCoarse);
            }
            let h = 2.0 * half_length / cells as f64;
            let nx = cells + 1 + 2 * MARGIN;
            // node k of the interval sits at lattice index k + MARGIN; the
            // endpoints k = 0 and k = cells are boundary nodes
            let mask = (0..nx)
                .map(|i| i > MARGIN && i < MARGIN + cells)
                .collect();
            GridDomain::from_mask(
                1,
                h,
                [-half_length - MARGIN as f64 * h, 0.0],
                nx,
                1,
                mask,
            )
        }
        shape => {
            let h = match spec.resolution {
                Resolution::Spacing(h) if h > 0.0 && h.is_finite() => h,
                Resolution::Spacing(h) => {
                    return Err(Error::InvalidShape(format!("spacing must be positive, got {h}")))
                }
                Resolution::Cells(_) => {
                    return Err(Error::InvalidShape(
                        "two-dimensional shapes take a spacing, not a cell count".into(),
                    ))
                }
            };
            // cell centres at (k + 1/2) h about the shape centre, so cells
            // tile axis-aligned edges that fall on multiples of h exactly
            let (hx, hy) = shape.half_extent();
            let mx = (hx / h).ceil() as usize + MARGIN;
            let my = (hy / h).ceil() as usize + MARGIN;
            let (nx, ny) = (2 * mx, 2 * my);
            let eps = 1e-9 * h;
            let ox = -(mx as f64 - 0.5) * h;
            let oy = -(my as f64 - 0.5) * h;
            let mut mask = vec![false; nx * ny];
            for j in 0..ny {
                let y = oy + j as f64 * h;
                for i in 0..nx {
                    let x = ox + i as f64 * h;
                    mask[j * nx + i] = shape.contains(x, y, eps);
                }
            }
            GridDomain::from_mask(2, h, [ox, oy], nx, ny, mask)
        }
    }
}

/// `(interior node count) * h^dim`.
pub fn measure(d: &GridDomain) -> f64 {
    d.num_interior() as f64 * d.h.powi(d.dim as i32)
}

/// Volume of the unit ball in dimension `n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    // omega_n = pi^{n/2} / Gamma(n/2 + 1), via the recursion omega_n = 2 pi / n * omega_{n-2}
    let mut omega = if n.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut k = if n.is_multiple_of(2) { 2 } else { 3 };
    while k <= n {
        omega *= 2.0 * PI / k as f64;
        k += 2;
    }
    omega
}

/// Radius of the ball with the same measure as `d`.
pub fn equal_area_radius(d: &GridDomain) -> f64 {
    (measure(d) / unit_ball_volume(d.dim)).powf(1.0 / d.dim as f64)
}

/// Dilates the domain by `t` about the coordinate origin.
pub fn scale_domain(d: &GridDomain, t: f64) -> Result<GridDomain> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("scale factor must be positive, got {t}")));
    }
    let mut out = d.clone();
    out.h = d.h * t;
    out.origin = [d.origin[0] * t, d.origin[1] * t];
    Ok(out)
}

/// Uniform mesh `r_i = i R / M`, `i = 0..=M`, of the radius of an
/// n-dimensional ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialMesh {
    n: usize,
    radius: f64,
    cells: usize,
}

impl RadialMesh {
    pub fn new(n: usize, radius: f64, cells: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("ambient dimension must be at least 1".into()));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
        }
        if cells < 2 {
            return Err(Error::InvalidArgument("radial mesh needs at least 2 cells".into()));
        }
        Ok(RadialMesh { n, radius, cells })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn spacing(&self) -> f64 {
        self.radius / self.cells as f64
    }

    pub fn r(&self, i: usize) -> f64 {
        if i == self.cells {
            self.radius
        } else {
            i as f64 * self.spacing()
        }
    }

    /// All node radii `r_0 = 0, ..., r_M = R`.
    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.cells).map(|i| self.r(i)).collect()
    }

    /// Control-volume averages of `f` weighted by `r^{n-1}`, one per node.
    /// Node `i` owns `[r_i - h/2, r_i + h/2] ∩ [0, R]`. Discontinuous data
    /// (such as a two-level load) keep second-order accuracy this way.
    pub fn cell_averages(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        const SUB: usize = 64;
        let h = self.spacing();
        (0..=self.cells)
            .map(|i| {
                let a = (self.r(i) - h / 2.0).max(0.0);
                let b = (self.r(i) + h / 2.0).min(self.radius);
                let dr = (b - a) / SUB as f64;
                let (mut num, mut den) = (0.0, 0.0);
                for s in 0..SUB {
                    let r = a + (s as f64 + 0.5) * dr;
                    let w = r.powi(self.n as i32 - 1);
                    num += w * f(r);
                    den += w;
                }
                num / den
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk(r: f64, h: f64) -> GridDomain {
        make_domain(&ShapeSpec::new(Shape::Disk { radius: r }, Resolution::Spacing(h))).unwrap()
    }

    #[test]
    fn disk_measure_close_to_pi() {
        let d = disk(1.0, 0.02);
        assert!((measure(&d) - PI).abs() < 0.04);
        let d = disk(1.0, 0.01);
        assert!((measure(&d) - PI).abs() < 0.05);
        assert!((equal_area_radius(&d) - 1.0).abs() < 0.01);
    }

    #[test]
    fn rectangle_and_square_measures() {
        let d = make_domain(&ShapeSpec::new(
            Shape::Rectangle { width: 2.0, height: 0.5 },
            Resolution::Spacing(0.05),
        ))
        .unwrap();
        assert!((measure(&d) - 1.0).abs() < 0.1);
        let sq = make_domain(&ShapeSpec::new(
            Shape::unit_area(ShapeKind::Rectangle, 1.0),
            Resolution::Spacing(0.01),
        ))
        .unwrap();
        assert!((measure(&sq) - 1.0).abs() < 0.04);
        assert!((equal_area_radius(&sq) - 1.0 / PI.sqrt()).abs() < 0.02);
    }

    #[test]
    fn interval_node_counts() {
        let d = make_domain(&ShapeSpec::new(
            Shape::Interval { half_length: 1.0 },
            Resolution::Cells(200),
        ))
        .unwrap();
        assert_eq!(d.num_interior(), 199);
        assert_eq!(d.num_boundary(), 2);
        assert!((measure(&d) - 2.0).abs() < 0.02);
        assert!((equal_area_radius(&d) - 1.0).abs() < 0.01);
        let first = d.coords(d.interior_nodes()[0])[0];
        assert!((first + 0.99).abs() < 1e-12);
        let d100 = make_domain(&ShapeSpec::new(
            Shape::Interval { half_length: 1.0 },
            Resolution::Cells(100),
        ))
        .unwrap();
        assert!((measure(&d100) - 2.0).abs() <= 0.02 + 1e-12);
    }

    #[test]
    fn scaling_quadruples_disk_measure_and_composes() {
        let d = disk(1.0, 0.05);
        let s = scale_domain(&d, 2.0).unwrap();
        assert!((measure(&s) - 4.0 * measure(&d)).abs() < 1e-12);
        assert_eq!(scale_domain(&d, 1.0).unwrap(), d);
        let ab = scale_domain(&scale_domain(&d, 1.5).unwrap(), 0.7).unwrap();
        let direct = scale_domain(&d, 1.5 * 0.7).unwrap();
        assert_eq!(ab.mask(), direct.mask());
        assert!((ab.h() - direct.h()).abs() < 1e-15);
        let iv = make_domain(&ShapeSpec::new(
            Shape::Interval { half_length: 1.0 },
            Resolution::Cells(100),
        ))
        .unwrap();
        assert!((measure(&scale_domain(&iv, 0.5).unwrap()) - 0.99).abs() < 1e-12);
        assert!(scale_domain(&d, 0.0).is_err());
    }

    #[test]
    fn refinement_reduces_area_error() {
        for kind in ShapeKind::ALL {
            let shape = Shape::unit_area(kind, 2.0);
            let err = |h: f64| {
                let d = make_domain(&ShapeSpec::new(shape, Resolution::Spacing(h))).unwrap();
                (measure(&d) - shape.area()).abs()
            };
            // lattice-point counts fluctuate, so check the first-order envelope
            for h in [0.05, 0.025, 0.0125, 0.01, 0.005] {
                assert!(err(h) <= 2.0 * h, "{kind:?} h={h}");
            }
        }
    }

    #[test]
    fn too_coarse_and_invalid_shapes_rejected() {
        let coarse = make_domain(&ShapeSpec::new(Shape::Disk { radius: 1.0 }, Resolution::Spacing(0.9)));
        assert!(matches!(coarse, Err(Error::TooCoarse)));
        let bad = make_domain(&ShapeSpec::new(Shape::Disk { radius: -1.0 }, Resolution::Spacing(0.1)));
        assert!(matches!(bad, Err(Error::InvalidShape(_))));
        let cells_2d = make_domain(&ShapeSpec::new(Shape::Disk { radius: 1.0 }, Resolution::Cells(10)));
        assert!(cells_2d.is_err());
    }

    #[test]
    fn disconnected_mask_rejected() {
        let (nx, ny) = (12, 7);
        let mut mask = vec![false; nx * ny];
        for j in 2..5 {
            for i in 2..5 {
                mask[j * nx + i] = true;
                mask[j * nx + i + 5] = true;
            }
        }
        let res = GridDomain::from_mask(2, 0.1, [0.0, 0.0], nx, ny, mask);
        assert!(matches!(res, Err(Error::Disconnected { components: 2 })));
    }

    #[test]
    fn boundary_nodes_touch_interior() {
        let d = disk(1.0, 0.1);
        for &b in d.boundary_nodes() {
            assert!(!d.mask()[b]);
            assert!(d.neighbors(b).any(|m| d.mask()[m]));
        }
        // 4-fold symmetry of the disk mask
        let (nx, ny) = d.lattice_shape();
        for j in 0..ny {
            for i in 0..nx {
                assert_eq!(d.mask()[j * nx + i], d.mask()[j * nx + (nx - 1 - i)]);
                assert_eq!(d.mask()[j * nx + i], d.mask()[i * nx + j]);
            }
        }
    }

    #[test]
    fn rle_round_trip_and_determinism() {
        for kind in [ShapeKind::Disk, ShapeKind::LShape, ShapeKind::Stadium, ShapeKind::Interval] {
            let spec = match kind {
                ShapeKind::Interval => ShapeSpec::new(Shape::Interval { half_length: 1.0 }, Resolution::Cells(40)),
                _ => ShapeSpec::new(Shape::unit_area(kind, 2.0), Resolution::Spacing(0.04)),
            };
            let d = make_domain(&spec).unwrap();
            assert_eq!(make_domain(&spec).unwrap().mask_rle(), d.mask_rle());
            let back = GridDomain::from_mask_rle(&d.mask_rle()).unwrap();
            assert_eq!(back, d);
        }
        assert!(GridDomain::from_mask_rle("garbage").is_err());
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-15);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
    }

    #[test]
    fn unit_area_presets() {
        for kind in ShapeKind::ALL {
            let s = Shape::unit_area(kind, 2.0);
            if kind != ShapeKind::Interval {
                assert!((s.area() - 1.0).abs() < 1e-12, "{kind:?}");
            }
        }
        let ar = |h: f64| {
            let d = make_domain(&ShapeSpec::new(Shape::unit_area(ShapeKind::Disk, 1.0), Resolution::Spacing(h))).unwrap();
            equal_area_radius(&d)
        };
        assert!((ar(0.01) - 1.0 / PI.sqrt()).abs() < 0.01);
    }

    #[test]
    fn radial_mesh_nodes() {
        let m = RadialMesh::new(3, 2.0, 8).unwrap();
        let r = m.nodes();
        assert_eq!(r[0], 0.0);
        assert_eq!(r[8], 2.0);
        assert!(r.windows(2).all(|w| (w[1] - w[0] - 0.25).abs() < 1e-15));
        assert!(RadialMesh::new(0, 1.0, 4).is_err());
        let avg = m.cell_averages(|_| 3.0);
        assert!(avg.iter().all(|&a| (a - 3.0).abs() < 1e-12));
    }
}
