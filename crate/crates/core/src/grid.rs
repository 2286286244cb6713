use crate::error::{Error, Result};

/// Relative slack, in grid units, used when a threshold lands exactly on a cell centre.
pub(crate) const TIE_TOL: f64 = 1e-9;

/// Uniform discretisation of [0,1] into N cells with centres (i + 0.5)/N.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    size: usize,
}

impl Grid {
    pub fn new(size: usize) -> Result<Self> {
        if size < 2 {
            return Err(Error::Config(format!(
                "grid size must be at least 2, got {size}"
            )));
        }
        Ok(Self { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.size as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.size as f64
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.size).map(|i| self.center(i)).collect()
    }

    /// Index of the cell containing y.
    pub fn nearest(&self, y: f64) -> usize {
        ((y * self.size as f64).floor().max(0.0) as usize).min(self.size - 1)
    }

    /// Inclusive index range of centres p_j with |y - p_j| < r, or None when empty.
    pub fn open_window(&self, y: f64, r: f64) -> Option<(usize, usize)> {
        let n = self.size as f64;
        // p_j = (j + 0.5)/n; solve y - r < p_j < y + r in grid units, treating ties as misses.
        let lo_f = (y - r) * n - 0.5;
        let hi_f = (y + r) * n - 0.5;
        let lo = (lo_f + TIE_TOL).floor() + 1.0;
        let hi = (hi_f - TIE_TOL).ceil() - 1.0;
        let lo = lo.max(0.0);
        let hi = hi.min(n - 1.0);
        (lo <= hi).then_some((lo as usize, hi as usize))
    }

    /// Inclusive index range of centres with |y - p_j| <= r.
    pub fn closed_window(&self, y: f64, r: f64) -> Option<(usize, usize)> {
        let n = self.size as f64;
        let lo_f = (y - r) * n - 0.5;
        let hi_f = (y + r) * n - 0.5;
        let lo = (lo_f - TIE_TOL).ceil().max(0.0);
        let hi = (hi_f + TIE_TOL).floor().min(n - 1.0);
        (lo <= hi).then_some((lo as usize, hi as usize))
    }

    /// Index radius of an ε-ball on the grid: floor(εN).
    pub fn index_radius(&self, eps: f64) -> usize {
        (eps * self.size as f64 + TIE_TOL).floor().max(0.0) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centres_are_uniform() {
        let g = Grid::new(10).unwrap();
        assert_eq!(g.spacing(), 0.1);
        assert!((g.center(0) - 0.05).abs() < 1e-15);
        assert!((g.center(9) - 0.95).abs() < 1e-15);
        assert!(g.centers().windows(2).all(|w| w[0] < w[1]));
        assert!(Grid::new(1).is_err());
    }

    #[test]
    fn open_window_excludes_ties() {
        let g = Grid::new(10).unwrap();
        // |0.05 - p_j| < 0.1 only for j = 0, since p_1 = 0.15 is a tie.
        assert_eq!(g.open_window(0.05, 0.1), Some((0, 0)));
        assert_eq!(g.open_window(0.05, 0.15), Some((0, 1)));
        assert_eq!(g.open_window(0.5, 0.1), Some((4, 5)));
        assert_eq!(g.open_window(0.5, 0.01), None);
    }

    #[test]
    fn closed_window_includes_ties() {
        let g = Grid::new(10).unwrap();
        assert_eq!(g.closed_window(0.05, 0.1), Some((0, 1)));
        assert_eq!(g.closed_window(0.5, 0.0), None);
        assert_eq!(g.closed_window(0.55, 0.0), Some((5, 5)));
    }

    #[test]
    fn window_matches_brute_force() {
        let g = Grid::new(37).unwrap();
        for a in 0..200 {
            let y = a as f64 / 199.0;
            for r in [0.01, 0.027, 1.0 / 37.0, 0.1, 0.5] {
                let brute: Vec<usize> = (0..37).filter(|&j| (y - g.center(j)).abs() < r).collect();
                let got: Vec<usize> = match g.open_window(y, r) {
                    Some((lo, hi)) => (lo..=hi).collect(),
                    None => vec![],
                };
                let near_tie = (0..37).any(|j| ((y - g.center(j)).abs() - r).abs() < 1e-9);
                if !near_tie {
                    assert_eq!(brute, got, "y={y} r={r}");
                }
            }
        }
    }
}
