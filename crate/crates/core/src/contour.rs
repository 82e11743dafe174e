//! Closed integration contours in the complex plane with attached
//! Gauss–Legendre quadrature.
//!
//! All contours are counterclockwise. Contours are built from line and arc
//! edges; each edge carries a role label so rectangle integrals can be split
//! into horizontal and vertical contributions.

use crate::error::{Error, Result};
use crate::linalg::{cplx, CMat, C64};
use crate::quadrature::gauss_legendre;
use crate::spectral::{Segment, SegmentFamily};

pub const DEFAULT_QUAD_ORDER: usize = 32;

/// Role of an edge within its contour.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    Plain,
    Horizontal,
    /// Vertical pieces crossing a spectral gap, |Im z| <= d.
    VerticalCentral,
    /// Vertical pieces beyond |Im z| = d on large rectangles.
    VerticalOuter,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContourEdge {
    Line {
        from: C64,
        to: C64,
        kind: EdgeKind,
    },
    /// Circular arc, traversed from `start_angle` to `end_angle` (radians).
    Arc {
        center: C64,
        radius: f64,
        start_angle: f64,
        end_angle: f64,
    },
}

impl ContourEdge {
    pub fn start(&self) -> C64 {
        match *self {
            ContourEdge::Line { from, .. } => from,
            ContourEdge::Arc {
                center,
                radius,
                start_angle,
                ..
            } => center + cplx(radius * start_angle.cos(), radius * start_angle.sin()),
        }
    }

    pub fn end(&self) -> C64 {
        match *self {
            ContourEdge::Line { to, .. } => to,
            ContourEdge::Arc {
                center,
                radius,
                end_angle,
                ..
            } => center + cplx(radius * end_angle.cos(), radius * end_angle.sin()),
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            ContourEdge::Line { from, to, .. } => (to - from).norm(),
            ContourEdge::Arc {
                radius,
                start_angle,
                end_angle,
                ..
            } => radius * (end_angle - start_angle).abs(),
        }
    }

    pub fn kind(&self) -> EdgeKind {
        match *self {
            ContourEdge::Line { kind, .. } => kind,
            ContourEdge::Arc { .. } => EdgeKind::Plain,
        }
    }

    /// Point and complex line element `dz/ds` at parameter `s` in [-1, 1].
    fn at(&self, s: f64) -> (C64, C64) {
        match *self {
            ContourEdge::Line { from, to, .. } => {
                let mid = (to + from) * cplx(0.5, 0.0);
                let half = (to - from) * cplx(0.5, 0.0);
                (mid + half * cplx(s, 0.0), half)
            }
            ContourEdge::Arc {
                center,
                radius,
                start_angle,
                end_angle,
            } => {
                let theta = start_angle + (end_angle - start_angle) * (s + 1.0) / 2.0;
                let pos = center + cplx(radius * theta.cos(), radius * theta.sin());
                let dz = cplx(0.0, 1.0)
                    * (pos - center)
                    * cplx((end_angle - start_angle) / 2.0, 0.0);
                (pos, dz)
            }
        }
    }
}

/// What the contour encircles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContourKind {
    /// Boundary of a neighborhood of one segment.
    Segment,
    /// Large rectangle around the first `2n+1`-ish segments of a family.
    PartialSum,
    /// Gap-to-gap rectangle of fixed height `d` around one segment.
    GapRectangle,
}

/// Shape used for single-segment contours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContourStyle {
    /// Boundary of the exact `b'`-neighborhood: two lines and two semicircles.
    Stadium,
    /// Axis-aligned rectangle with clearance `b'` on every side.
    Rectangle,
}

/// Quadrature node: `integral f(z) dz ~= sum_k weight_k * f(point_k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadNode {
    pub point: C64,
    pub weight: C64,
    /// Index of the edge this node sits on.
    pub edge: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    edges: Vec<ContourEdge>,
    nodes: Vec<QuadNode>,
    kind: ContourKind,
    order_per_edge: usize,
}

impl Contour {
    /// Builds a contour from edges that must chain into a closed loop.
    pub fn new(edges: Vec<ContourEdge>, kind: ContourKind, order_per_edge: usize) -> Contour {
        let edges: Vec<ContourEdge> = edges
            .into_iter()
            .filter(|e| e.length() > 0.0)
            .collect();
        assert!(!edges.is_empty(), "contour needs at least one edge");
        let scale = edges.iter().map(|e| e.length()).sum::<f64>().max(1e-300);
        for (i, e) in edges.iter().enumerate() {
            let next = &edges[(i + 1) % edges.len()];
            let gap = (e.end() - next.start()).norm();
            assert!(
                gap <= 1e-9 * scale,
                "contour edges do not chain into a closed loop (gap {gap:.3e} after edge {i})"
            );
        }
        let mut contour = Contour {
            edges,
            nodes: Vec::new(),
            kind,
            order_per_edge: 0,
        };
        contour.refresh_nodes(order_per_edge);
        contour
    }

    fn refresh_nodes(&mut self, order_per_edge: usize) {
        let (s, w) = gauss_legendre(order_per_edge);
        let mut nodes = Vec::with_capacity(order_per_edge * self.edges.len());
        for (idx, edge) in self.edges.iter().enumerate() {
            for k in 0..order_per_edge {
                let (point, dz) = edge.at(s[k]);
                nodes.push(QuadNode {
                    point,
                    weight: dz * cplx(w[k], 0.0),
                    edge: idx,
                });
            }
        }
        self.nodes = nodes;
        self.order_per_edge = order_per_edge;
    }

    pub fn edges(&self) -> &[ContourEdge] {
        &self.edges
    }

    pub fn nodes(&self) -> &[QuadNode] {
        &self.nodes
    }

    pub fn kind(&self) -> ContourKind {
        self.kind
    }

    pub fn order_per_edge(&self) -> usize {
        self.order_per_edge
    }

    pub fn length(&self) -> f64 {
        self.edges.iter().map(|e| e.length()).sum()
    }

    /// Polyline approximation for plotting (arcs sampled at 32 points).
    pub fn vertices(&self) -> Vec<C64> {
        let mut out = Vec::new();
        for e in &self.edges {
            match *e {
                ContourEdge::Line { from, .. } => out.push(from),
                ContourEdge::Arc { .. } => {
                    for k in 0..32 {
                        let s = -1.0 + 2.0 * k as f64 / 32.0;
                        out.push(e.at(s).0);
                    }
                }
            }
        }
        out
    }

    /// `sum_k w_k f(z_k)`, the quadrature approximation of `\oint f dz`.
    pub fn integrate<F: FnMut(C64) -> C64>(&self, mut f: F) -> C64 {
        self.nodes
            .iter()
            .map(|n| n.weight * f(n.point))
            .fold(cplx(0.0, 0.0), |a, b| a + b)
    }

    /// Matrix-valued contour integral; the integrand may fail (e.g. a shift
    /// that is numerically singular), aborting the whole integral.
    pub fn integrate_matrix<F: FnMut(C64) -> Result<CMat>>(
        &self,
        dim: usize,
        mut f: F,
    ) -> Result<CMat> {
        let mut acc = CMat::zeros(dim, dim);
        for n in &self.nodes {
            let m = f(n.point)?;
            acc += m * n.weight;
        }
        Ok(acc)
    }

    /// Same, restricted to edges of one kind.
    pub fn integrate_matrix_over<F: FnMut(C64) -> Result<CMat>>(
        &self,
        dim: usize,
        kind: EdgeKind,
        mut f: F,
    ) -> Result<CMat> {
        let mut acc = CMat::zeros(dim, dim);
        for n in &self.nodes {
            if self.edges[n.edge].kind() == kind {
                let m = f(n.point)?;
                acc += m * n.weight;
            }
        }
        Ok(acc)
    }

    /// Same, restricted to a single edge.
    pub fn integrate_matrix_on_edge<F: FnMut(C64) -> Result<CMat>>(
        &self,
        dim: usize,
        edge_index: usize,
        mut f: F,
    ) -> Result<CMat> {
        let mut acc = CMat::zeros(dim, dim);
        for n in &self.nodes {
            if n.edge == edge_index {
                let m = f(n.point)?;
                acc += m * n.weight;
            }
        }
        Ok(acc)
    }

    /// Signed enclosed area via `(1/2i) \oint conj(z) dz`; positive iff
    /// counterclockwise.
    pub fn signed_area(&self) -> f64 {
        let integral = self
            .nodes
            .iter()
            .map(|n| n.weight * n.point.conj())
            .fold(cplx(0.0, 0.0), |a, b| a + b);
        (integral / cplx(0.0, 2.0)).re
    }

    /// Winding number around `z` from the quadrature itself; reliable away
    /// from the contour (a node spacing or more).
    pub fn winding_number(&self, z: C64) -> i32 {
        let integral = self.integrate(|w| (w - z).inv());
        (integral / cplx(0.0, 2.0 * std::f64::consts::PI)).re.round() as i32
    }

    pub fn contains(&self, z: C64) -> bool {
        self.winding_number(z) != 0
    }

    /// Minimum distance from `z` to the contour, via dense sampling.
    pub fn distance_to_point(&self, z: C64) -> f64 {
        let mut best = f64::INFINITY;
        for e in &self.edges {
            for k in 0..=64 {
                let s = -1.0 + k as f64 / 32.0;
                best = best.min((e.at(s).0 - z).norm());
            }
        }
        best
    }
}

/// Re-equips a contour with `order_per_edge` Gauss–Legendre nodes per edge.
pub fn attach_quadrature(contour: &Contour, order_per_edge: usize) -> Contour {
    let mut c = contour.clone();
    c.refresh_nodes(order_per_edge);
    c
}

/// Midpoints of the gaps of a family, one per gap, flanked by two sentinel
/// midpoints half a gap beyond the outermost segments. Entry `j` is the left
/// separating abscissa of segment `j`; entry `j+1` the right one.
pub fn gap_midpoints(family: &SegmentFamily) -> Result<Vec<f64>> {
    if !family.gap().is_finite() {
        return Err(Error::NoGapStructure);
    }
    let d = family.gap();
    let segs = family.segments();
    let mut mids = Vec::with_capacity(segs.len() + 1);
    mids.push(segs[0].alpha() - d / 2.0);
    for pair in segs.windows(2) {
        mids.push(0.5 * (pair[0].beta() + pair[1].alpha()));
    }
    mids.push(segs.last().unwrap().beta() + d / 2.0);
    Ok(mids)
}

/// Counterclockwise boundary of a `b'`-neighborhood of one segment, either
/// the exact stadium or an enclosing rectangle with the same clearance.
pub fn segment_contour(segment: &Segment, b_prime: f64, style: ContourStyle) -> Contour {
    assert!(
        b_prime > 0.0 && b_prime.is_finite(),
        "contour radius must be positive"
    );
    use std::f64::consts::FRAC_PI_2;
    let (a, b, r) = (segment.alpha(), segment.beta(), b_prime);
    let panel = 4.0 * r;
    let edges = match style {
        ContourStyle::Stadium => {
            let mut e = panelize(cplx(a, -r), cplx(b, -r), EdgeKind::Horizontal, panel);
            e.push(ContourEdge::Arc {
                center: cplx(b, 0.0),
                radius: r,
                start_angle: -FRAC_PI_2,
                end_angle: FRAC_PI_2,
            });
            e.extend(panelize(cplx(b, r), cplx(a, r), EdgeKind::Horizontal, panel));
            e.push(ContourEdge::Arc {
                center: cplx(a, 0.0),
                radius: r,
                start_angle: FRAC_PI_2,
                end_angle: 3.0 * FRAC_PI_2,
            });
            e
        }
        ContourStyle::Rectangle => {
            let mut e = panelize(
                cplx(a - r, -r),
                cplx(b + r, -r),
                EdgeKind::Horizontal,
                panel,
            );
            e.extend(panelize(
                cplx(b + r, -r),
                cplx(b + r, r),
                EdgeKind::VerticalCentral,
                panel,
            ));
            e.extend(panelize(
                cplx(b + r, r),
                cplx(a - r, r),
                EdgeKind::Horizontal,
                panel,
            ));
            e.extend(panelize(
                cplx(a - r, r),
                cplx(a - r, -r),
                EdgeKind::VerticalCentral,
                panel,
            ));
            e
        }
    };
    Contour::new(edges, ContourKind::Segment, DEFAULT_QUAD_ORDER)
}

/// Splits a straight edge into panels of length at most `max_len`, so that
/// fixed-order Gauss–Legendre stays accurate on sides much longer than their
/// distance to the spectrum.
fn panelize(from: C64, to: C64, kind: EdgeKind, max_len: f64) -> Vec<ContourEdge> {
    let len = (to - from).norm();
    let pieces = (len / max_len).ceil().max(1.0) as usize;
    (0..pieces)
        .map(|k| {
            let t0 = k as f64 / pieces as f64;
            let t1 = (k + 1) as f64 / pieces as f64;
            ContourEdge::Line {
                from: from + (to - from) * cplx(t0, 0.0),
                to: from + (to - from) * cplx(t1, 0.0),
                kind,
            }
        })
        .collect()
}

/// Geometry of the partial-sum rectangle for window `-n..=n`: left and right
/// abscissas (gap midpoints, or sentinels at the family ends) and the
/// half-height `gamma = max(|left|, |right|, d)`.
pub fn partial_sum_geometry(family: &SegmentFamily, n: usize) -> Result<(f64, f64, f64)> {
    let mids = gap_midpoints(family)?;
    let d = family.gap();
    let offset = family.zero_offset();
    let lo = offset.saturating_sub(n);
    let hi = (offset + n).min(family.len() - 1);
    let left = mids[lo];
    let right = mids[hi + 1];
    let gamma = left.abs().max(right.abs()).max(d);
    Ok((left, right, gamma))
}

/// Counterclockwise rectangle around segments with labels `-n..=n` (clamped
/// to the family). Vertical sides run through gap midpoints (or the sentinel
/// abscissas at the family ends); the half-height is
/// `gamma = max(|left|, |right|, d)`. Vertical sides are split at `|Im| = d`
/// into central and outer pieces.
///
/// Errors if any side comes within `(d/2 - b)/4` of the closed
/// `b`-neighborhood of the family (always the case when `b >= d/2`).
pub fn partial_sum_rectangle(
    family: &SegmentFamily,
    n: usize,
    b: f64,
    order_per_edge: usize,
) -> Result<Contour> {
    let (left, right, gamma) = partial_sum_geometry(family, n)?;
    let d = family.gap();

    // Clearance guard: every side must stay (d/2 - b)/4 away from U_b.
    let guard = (d / 2.0 - b) / 4.0;
    let mut clearance = f64::INFINITY;
    for seg in family.segments() {
        // Horizontal sides at height ±gamma over [left, right].
        clearance = clearance.min(gamma - b);
        // Vertical sides at `left` and `right` spanning [-gamma, gamma]:
        // the segment sits at Im = 0 inside that span, so the distance is
        // purely horizontal.
        for side in [left, right] {
            let dx = if side < seg.alpha() {
                seg.alpha() - side
            } else if side > seg.beta() {
                side - seg.beta()
            } else {
                0.0
            };
            clearance = clearance.min(dx - b);
        }
    }
    if clearance < guard {
        return Err(Error::ContourTouchesSpectrumNeighborhood {
            distance: clearance,
            guard,
        });
    }

    let panel = 2.0 * d;
    let mut edges = Vec::new();
    edges.extend(panelize(
        cplx(left, -gamma),
        cplx(right, -gamma),
        EdgeKind::Horizontal,
        panel,
    ));
    edges.extend(panelize(
        cplx(right, -gamma),
        cplx(right, -d),
        EdgeKind::VerticalOuter,
        panel,
    ));
    edges.extend(panelize(
        cplx(right, -d),
        cplx(right, d),
        EdgeKind::VerticalCentral,
        panel,
    ));
    edges.extend(panelize(
        cplx(right, d),
        cplx(right, gamma),
        EdgeKind::VerticalOuter,
        panel,
    ));
    edges.extend(panelize(
        cplx(right, gamma),
        cplx(left, gamma),
        EdgeKind::Horizontal,
        panel,
    ));
    edges.extend(panelize(
        cplx(left, gamma),
        cplx(left, d),
        EdgeKind::VerticalOuter,
        panel,
    ));
    edges.extend(panelize(
        cplx(left, d),
        cplx(left, -d),
        EdgeKind::VerticalCentral,
        panel,
    ));
    edges.extend(panelize(
        cplx(left, -d),
        cplx(left, -gamma),
        EdgeKind::VerticalOuter,
        panel,
    ));
    Ok(Contour::new(edges, ContourKind::PartialSum, order_per_edge))
}

/// Counterclockwise rectangle `[mid_j, mid_{j+1}] x [-d, d]` around segment
/// `j`: vertical sides at the separating abscissas, height the minimal gap.
pub fn step2_rectangle(
    family: &SegmentFamily,
    j: usize,
    order_per_edge: usize,
) -> Result<Contour> {
    let mids = gap_midpoints(family)?;
    if j >= family.len() {
        return Err(Error::DimensionMismatch {
            context: format!("segment index {j} in a family of {}", family.len()),
        });
    }
    let d = family.gap();
    let (l, r) = (mids[j], mids[j + 1]);
    let panel = 2.0 * d;
    let mut edges = panelize(cplx(l, -d), cplx(r, -d), EdgeKind::Horizontal, panel);
    edges.extend(panelize(
        cplx(r, -d),
        cplx(r, d),
        EdgeKind::VerticalCentral,
        panel,
    ));
    edges.extend(panelize(cplx(r, d), cplx(l, d), EdgeKind::Horizontal, panel));
    edges.extend(panelize(
        cplx(l, d),
        cplx(l, -d),
        EdgeKind::VerticalCentral,
        panel,
    ));
    Ok(Contour::new(edges, ContourKind::GapRectangle, order_per_edge))
}
