//! Exact cell tests for intervals, half-spaces and convex polygons.
//!
//! A node `σ` decodes (via interleaving) to a closed axis-aligned cell. A
//! linear function attains its extrema over the cell at corners, so every
//! test below reduces to picking the right endpoint per coordinate.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::cantor::{BitWord, CantorBox};
use crate::error::{Error, Result};
use crate::rational::{self, format_rational, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalInterval {
    #[serde(with = "rational::serde_str")]
    pub lo: Rational,
    #[serde(with = "rational::serde_str")]
    pub hi: Rational,
}

impl RationalInterval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self> {
        let i = Self { lo, hi };
        i.validate()?;
        Ok(i)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lo > self.hi {
            return Err(Error::InvalidArgument(format!(
                "interval [{}, {}] has lo > hi",
                format_rational(&self.lo),
                format_rational(&self.hi)
            )));
        }
        Ok(())
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    pub fn cell_meets(&self, sigma: &BitWord, bbox: &CantorBox) -> bool {
        let (lo, hi) = &bbox.cell(sigma, 1)[0];
        *lo <= self.hi && *hi >= self.lo
    }

    pub fn cell_inside(&self, sigma: &BitWord, bbox: &CantorBox) -> bool {
        let (lo, hi) = &bbox.cell(sigma, 1)[0];
        self.lo <= *lo && *hi <= self.hi
    }
}

fn default_closed() -> bool {
    true
}

/// `{x : a·x ≤ b}` (or `< b` when not closed).
///
/// As a tree, an open half-space is represented by its closure: the paths
/// of a co-c.e. tree always form a closed set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalHalfspace {
    pub d: usize,
    #[serde(with = "rational::serde_str_vec")]
    pub a: Vec<Rational>,
    #[serde(with = "rational::serde_str")]
    pub b: Rational,
    #[serde(default = "default_closed")]
    pub closed: bool,
}

impl RationalHalfspace {
    pub fn new(a: Vec<Rational>, b: Rational) -> Result<Self> {
        let h = Self { d: a.len(), a, b, closed: true };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.a.len() != self.d {
            return Err(Error::InvalidArgument(format!(
                "half-space declares d = {} but has {} coefficients",
                self.d,
                self.a.len()
            )));
        }
        if self.a.iter().all(Zero::is_zero) {
            return Err(Error::InvalidArgument("half-space coefficients are all zero".into()));
        }
        Ok(())
    }

    pub fn value(&self, x: &[Rational]) -> Rational {
        self.a.iter().zip(x).map(|(a, x)| a * x).sum()
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        let v = self.value(x);
        if self.closed {
            v <= self.b
        } else {
            v < self.b
        }
    }

    fn extreme_over(&self, cell: &[(Rational, Rational)], maximize: bool) -> Rational {
        self.a
            .iter()
            .zip(cell)
            .map(|(a, (lo, hi))| {
                let use_hi = a.is_positive() == maximize;
                a * if use_hi { hi } else { lo }
            })
            .sum()
    }

    /// The closed cell of `sigma` meets the closed half-space.
    pub fn cell_meets(&self, sigma: &BitWord, bbox: &CantorBox) -> bool {
        let cell = bbox.cell(sigma, self.d);
        self.extreme_over(&cell, false) <= self.b
    }

    /// The closed cell of `sigma` lies inside the half-space.
    pub fn cell_inside(&self, sigma: &BitWord, bbox: &CantorBox) -> bool {
        let cell = bbox.cell(sigma, self.d);
        let max = self.extreme_over(&cell, true);
        if self.closed {
            max <= self.b
        } else {
            max < self.b
        }
    }
}

/// Convex polygon of the plane given as an intersection of half-planes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DGon {
    pub halfspaces: Vec<RationalHalfspace>,
}

impl DGon {
    pub fn new(halfspaces: Vec<RationalHalfspace>) -> Result<Self> {
        let g = Self { halfspaces };
        g.validate()?;
        Ok(g)
    }

    /// Convex polygon through `vertices` listed counter-clockwise.
    pub fn from_ccw_vertices(vertices: &[(Rational, Rational)]) -> Result<Self> {
        let n = vertices.len();
        let mut halfspaces = Vec::with_capacity(n);
        for i in 0..n {
            let (x0, y0) = &vertices[i];
            let (x1, y1) = &vertices[(i + 1) % n];
            // Interior lies to the left of each edge: (y1-y0) x - (x1-x0) y <= (y1-y0) x0 - (x1-x0) y0
            let a = vec![y1 - y0, x0 - x1];
            let b = (y1 - y0) * x0 - (x1 - x0) * y0;
            halfspaces.push(RationalHalfspace::new(a, b)?);
        }
        Self::new(halfspaces)
    }

    pub fn validate(&self) -> Result<()> {
        if self.halfspaces.len() < 3 {
            return Err(Error::InvalidArgument("a d-gon needs at least 3 half-planes".into()));
        }
        for h in &self.halfspaces {
            h.validate()?;
            if h.d != 2 {
                return Err(Error::InvalidArgument("d-gon half-spaces must be planar".into()));
            }
        }
        Ok(())
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.halfspaces.iter().all(|h| h.contains(x))
    }

    /// Stagewise rule: excluded when some component half-plane excludes.
    pub fn some_component_excludes(&self, sigma: &BitWord, bbox: &CantorBox) -> bool {
        self.halfspaces.iter().any(|h| !h.cell_meets(sigma, bbox))
    }

    pub fn cell_inside(&self, sigma: &BitWord, bbox: &CantorBox) -> bool {
        self.halfspaces.iter().all(|h| h.cell_inside(sigma, bbox))
    }

    /// Exact test that the closed cell meets the closed polygon, by clipping
    /// the cell rectangle against every half-plane.
    pub fn cell_meets(&self, sigma: &BitWord, bbox: &CantorBox) -> bool {
        let cell = bbox.cell(sigma, 2);
        let (x0, x1) = &cell[0];
        let (y0, y1) = &cell[1];
        let mut poly = vec![
            (x0.clone(), y0.clone()),
            (x1.clone(), y0.clone()),
            (x1.clone(), y1.clone()),
            (x0.clone(), y1.clone()),
        ];
        for h in &self.halfspaces {
            poly = clip(&poly, h);
            if poly.is_empty() {
                return false;
            }
        }
        true
    }

    /// Whether the polygon meets the box at all.
    pub fn is_empty_in(&self, bbox: &CantorBox) -> bool {
        !self.cell_meets(&BitWord::new(), bbox)
    }
}

/// Sutherland–Hodgman step against the closed half-plane `a·x ≤ b`.
fn clip(poly: &[(Rational, Rational)], h: &RationalHalfspace) -> Vec<(Rational, Rational)> {
    let f = |p: &(Rational, Rational)| &h.a[0] * &p.0 + &h.a[1] * &p.1 - &h.b;
    let mut out = Vec::new();
    let n = poly.len();
    for i in 0..n {
        let cur = &poly[i];
        let next = &poly[(i + 1) % n];
        let (fc, fn_) = (f(cur), f(next));
        if !fc.is_positive() {
            out.push(cur.clone());
        }
        if (fc.is_positive() && fn_.is_negative()) || (fc.is_negative() && fn_.is_positive()) {
            let t = &fc / (&fc - &fn_);
            out.push((&cur.0 + &t * (&next.0 - &cur.0), &cur.1 + &t * (&next.1 - &cur.1)));
        }
    }
    out
}
