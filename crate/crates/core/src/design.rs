//! Designs, kernels and bandwidth schedules.
//!
//! Points of a 2D grid are flattened row-major; neighbour lists are always
//! produced in ascending index order.

use alloc::vec::Vec;

use crate::math::{ceil, floor, ln, powf, sqrt};
use crate::{Error, Result};

/// A regular design with unit spacing and the Euclidean metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Design {
    Line { n: usize },
    Grid { rows: usize, cols: usize },
}

/// One entry of a [`Stencil`]: a grid offset and its length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Offset {
    pub dr: isize,
    pub dc: isize,
    pub dist: f64,
}

/// All offsets of length at most `h`, sorted by `(dr, dc)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    pub h: f64,
    pub offsets: Vec<Offset>,
}

impl Design {
    pub fn line(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("design must have at least one point".into()));
        }
        Ok(Design::Line { n })
    }

    pub fn grid(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument("design must have at least one point".into()));
        }
        Ok(Design::Grid { rows, cols })
    }

    pub fn dim(&self) -> usize {
        match self {
            Design::Line { .. } => 1,
            Design::Grid { .. } => 2,
        }
    }

    pub fn len(&self) -> usize {
        match *self {
            Design::Line { n } => n,
            Design::Grid { rows, cols } => rows * cols,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(rows, cols)`; a line is a single row.
    pub fn shape(&self) -> (usize, usize) {
        match *self {
            Design::Line { n } => (1, n),
            Design::Grid { rows, cols } => (rows, cols),
        }
    }

    #[inline]
    pub fn coords(&self, i: usize) -> (usize, usize) {
        let (_, cols) = self.shape();
        (i / cols, i % cols)
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: i,
                len: self.len(),
            })
        }
    }

    pub fn distance(&self, i: usize, j: usize) -> Result<f64> {
        self.check_index(i)?;
        self.check_index(j)?;
        let (ri, ci) = self.coords(i);
        let (rj, cj) = self.coords(j);
        let dr = ri as f64 - rj as f64;
        let dc = ci as f64 - cj as f64;
        Ok(sqrt(dr * dr + dc * dc))
    }

    /// Offsets of length at most `h` for this design's dimension.
    pub fn stencil(&self, h: f64) -> Stencil {
        let m = if h >= 0.0 { floor(h) as isize } else { -1 };
        let mut offsets = Vec::new();
        let rows = if self.dim() == 2 { m } else { 0 };
        for dr in -rows..=rows {
            for dc in -m..=m {
                let dist = sqrt((dr * dr + dc * dc) as f64);
                if dist <= h {
                    offsets.push(Offset { dr, dc, dist });
                }
            }
        }
        Stencil { h, offsets }
    }

    /// Index of `i` shifted by `offset`, if it stays on the design.
    #[inline]
    pub fn shift(&self, i: usize, offset: &Offset) -> Option<usize> {
        let (rows, cols) = self.shape();
        let (r, c) = self.coords(i);
        let r2 = r as isize + offset.dr;
        let c2 = c as isize + offset.dc;
        if r2 < 0 || c2 < 0 || r2 >= rows as isize || c2 >= cols as isize {
            None
        } else {
            Some(r2 as usize * cols + c2 as usize)
        }
    }

    /// `U_i(h) = {j : Δ(X_i, X_j) ≤ h}` with distances, ascending in `j`.
    pub fn neighborhood(&self, i: usize, h: f64) -> Result<Vec<(usize, f64)>> {
        self.check_index(i)?;
        if !(h >= 0.0) {
            return Err(Error::InvalidArgument("bandwidth must be nonnegative".into()));
        }
        let stencil = self.stencil(h);
        Ok(stencil
            .offsets
            .iter()
            .filter_map(|o| self.shift(i, o).map(|j| (j, o.dist)))
            .collect())
    }

    /// Points whose whole ball of radius `hmax` lies on the design.
    pub fn interior(&self, hmax: f64) -> Result<Vec<usize>> {
        let m = floor(hmax.max(0.0)) as usize;
        let (rows, cols) = self.shape();
        let row_ok = |r: usize| self.dim() == 1 || (r >= m && r + m < rows);
        let out: Vec<usize> = (0..self.len())
            .filter(|&i| {
                let (r, c) = self.coords(i);
                row_ok(r) && c >= m && c + m < cols
            })
            .collect();
        if out.is_empty() {
            Err(Error::EmptyInterior { hmax })
        } else {
            Ok(out)
        }
    }
}

/// Kernel shapes on `[0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum KernelKind {
    /// `min{1, (b - x)/(b - 1)}₊`; with `b = 2` this is `min{1, 2 - x}₊`.
    PlateauTriangle,
    /// `(1 - (x/b)²)₊`.
    Parabola,
    /// `1` on `[0, b]`.
    Uniform,
}

impl KernelKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "plateau" | "plateau-triangle" | "plateau_triangle" => Ok(KernelKind::PlateauTriangle),
            "parabola" | "epanechnikov" => Ok(KernelKind::Parabola),
            "uniform" => Ok(KernelKind::Uniform),
            other => Err(Error::InvalidArgument(alloc::format!("unknown kernel '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelKind::PlateauTriangle => "plateau-triangle",
            KernelKind::Parabola => "parabola",
            KernelKind::Uniform => "uniform",
        }
    }
}

/// A non-increasing kernel with value 1 at 0 and support `[0, support_end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub support_end: f64,
}

impl KernelSpec {
    pub fn new(kind: KernelKind, support_end: f64) -> Result<Self> {
        let min = if kind == KernelKind::PlateauTriangle { 1.0 } else { 0.0 };
        if !(support_end > min) || !support_end.is_finite() {
            return Err(Error::InvalidArgument(alloc::format!(
                "support end of {} kernel must exceed {min}",
                kind.name()
            )));
        }
        Ok(KernelSpec { kind, support_end })
    }

    /// Kind with its default support end (2 for the plateau, 1 otherwise).
    pub fn standard(kind: KernelKind) -> Self {
        let support_end = match kind {
            KernelKind::PlateauTriangle => 2.0,
            _ => 1.0,
        };
        KernelSpec { kind, support_end }
    }

    /// Default location kernel `(1 - x²)₊`.
    pub fn location_default() -> Self {
        Self::standard(KernelKind::Parabola)
    }

    /// Default adaptation kernel `min{1, 2 - x}₊`.
    pub fn adaptation_default() -> Self {
        Self::standard(KernelKind::PlateauTriangle)
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let b = self.support_end;
        match self.kind {
            KernelKind::PlateauTriangle => {
                if x <= 1.0 {
                    1.0
                } else if x >= b {
                    0.0
                } else {
                    (b - x) / (b - 1.0)
                }
            }
            KernelKind::Parabola => {
                let u = x / b;
                if u >= 1.0 {
                    0.0
                } else {
                    1.0 - u * u
                }
            }
            KernelKind::Uniform => {
                if x <= b {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// `h^(k) = a^k h0` for `k = 0..=kstar`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BandwidthSchedule {
    pub h0: f64,
    pub a: f64,
    pub kstar: usize,
}

impl BandwidthSchedule {
    pub fn new(h0: f64, a: f64, kstar: usize) -> Result<Self> {
        if !(h0 > 0.0 && h0.is_finite()) {
            return Err(Error::InvalidArgument("h0 must be positive".into()));
        }
        if !(a > 1.0 && a.is_finite()) {
            return Err(Error::InvalidArgument("bandwidth factor a must exceed 1".into()));
        }
        Ok(BandwidthSchedule { h0, a, kstar })
    }

    /// Schedule whose last bandwidth is the first one reaching `hmax`.
    pub fn from_hmax(h0: f64, a: f64, hmax: f64) -> Result<Self> {
        let s = Self::new(h0, a, 0)?;
        if !(hmax > 0.0 && hmax.is_finite()) {
            return Err(Error::InvalidArgument("hmax must be positive".into()));
        }
        let mut k = if hmax <= h0 {
            0
        } else {
            ceil(ln(hmax / h0) / ln(a)) as usize
        };
        // guard against rounding in the logarithm
        while k > 0 && s.h(k - 1) >= hmax {
            k -= 1;
        }
        while s.h(k) < hmax {
            k += 1;
        }
        Ok(BandwidthSchedule { kstar: k, ..s })
    }

    /// `1.25^{1/d}`.
    pub fn default_factor(dim: usize) -> f64 {
        powf(1.25, 1.0 / dim as f64)
    }

    #[inline]
    fn h(&self, k: usize) -> f64 {
        self.h0 * powf(self.a, k as f64)
    }

    pub fn bandwidth(&self, k: usize) -> Result<f64> {
        if k > self.kstar {
            return Err(Error::StepOutOfRange { k, kstar: self.kstar });
        }
        Ok(self.h(k))
    }

    pub fn hmax(&self) -> f64 {
        self.h(self.kstar)
    }

    pub fn bandwidths(&self) -> Vec<f64> {
        (0..=self.kstar).map(|k| self.h(k)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn neighborhood_examples() {
        let d = Design::line(10).unwrap();
        assert_eq!(d.neighborhood(5, 0.0).unwrap(), vec![(5, 0.0)]);
        let ids: Vec<usize> = d.neighborhood(0, 2.5).unwrap().iter().map(|p| p.0).collect();
        assert_eq!(ids, vec![0, 1, 2]);
        let g = Design::grid(5, 5).unwrap();
        let ids: Vec<usize> = g.neighborhood(12, 1.0).unwrap().iter().map(|p| p.0).collect();
        assert_eq!(ids, vec![7, 11, 12, 13, 17]);
        assert!(matches!(d.neighborhood(10, 1.0), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn kernel_examples() {
        let p = KernelSpec::adaptation_default();
        assert_eq!(p.eval(0.5), 1.0);
        assert_eq!(p.eval(1.5), 0.5);
        assert_eq!(p.eval(2.0), 0.0);
        let q = KernelSpec::location_default();
        assert_eq!(q.eval(1.0), 0.0);
        assert_eq!(q.eval(0.0), 1.0);
        let u = KernelSpec::standard(KernelKind::Uniform);
        assert_eq!(u.eval(1.0), 1.0);
        assert_eq!(u.eval(1.0 + 1e-12), 0.0);
    }

    #[test]
    fn schedule_examples() {
        let s = BandwidthSchedule::new(1.0, 1.25, 5).unwrap();
        assert_eq!(s.bandwidth(0).unwrap(), 1.0);
        assert_eq!(s.bandwidth(2).unwrap(), 1.5625);
        assert!(matches!(s.bandwidth(6), Err(Error::StepOutOfRange { .. })));
        assert!((BandwidthSchedule::default_factor(2) - 1.118_033_988_749_895).abs() < 1e-15);
        let h = BandwidthSchedule::from_hmax(1.0, 1.25, 2.0).unwrap();
        assert_eq!(h.kstar, 4);
        assert!(h.hmax() >= 2.0 && h.bandwidth(3).unwrap() < 2.0);
        assert!(BandwidthSchedule::new(1.0, 1.0, 3).is_err());
    }

    #[test]
    fn interior_is_unclipped() {
        let g = Design::grid(12, 9).unwrap();
        let h = 2.7;
        let full = g.stencil(h).offsets.len();
        let interior = g.interior(h).unwrap();
        for &i in &interior {
            assert_eq!(g.neighborhood(i, h).unwrap().len(), full);
        }
        assert_eq!(interior.len(), (12 - 4) * (9 - 4));
        assert!(matches!(Design::line(4).unwrap().interior(2.0), Err(Error::EmptyInterior { .. })));
    }

    proptest! {
        #[test]
        fn kernels_non_increasing(x1 in 0.0f64..3.0, dx in 0.0f64..3.0, b in 1.01f64..4.0) {
            for kind in [KernelKind::PlateauTriangle, KernelKind::Parabola, KernelKind::Uniform] {
                let k = KernelSpec::new(kind, b).unwrap();
                prop_assert!(k.eval(x1) >= k.eval(x1 + dx));
                prop_assert!((0.0..=1.0).contains(&k.eval(x1)));
            }
        }

        #[test]
        fn neighborhoods_nest_and_are_symmetric(
            rows in 1usize..8, cols in 1usize..8, h1 in 0.0f64..4.0, dh in 0.0f64..3.0, seed in 0usize..64
        ) {
            let g = Design::grid(rows, cols).unwrap();
            let i = seed % g.len();
            let small = g.neighborhood(i, h1).unwrap();
            let large = g.neighborhood(i, h1 + dh).unwrap();
            prop_assert!(small.iter().any(|&(j, _)| j == i));
            for (j, _) in &small {
                prop_assert!(large.iter().any(|(l, _)| l == j));
                let back = g.neighborhood(*j, h1).unwrap();
                prop_assert!(back.iter().any(|&(l, _)| l == i));
            }
            prop_assert!(small.windows(2).all(|w| w[0].0 < w[1].0));
            for &(j, d) in &large {
                prop_assert_eq!(d, g.distance(i, j).unwrap());
            }
        }
    }
}
