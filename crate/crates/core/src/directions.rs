//! Finite direction sets on the unit sphere.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::norm;
use crate::error::{Error, Result};
use crate::rng;

/// How a direction set was built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    CircleGrid,
    SphereUniform { seed: u64 },
    Custom,
}

/// `k` unit vectors in `R^n`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionSet {
    dirs: Vec<f64>,
    dim: usize,
    construction: Construction,
}

impl DirectionSet {
    /// `{(cos(2 pi l / k), sin(2 pi l / k)) : l = 1..k}` in that order.
    pub fn circle_grid(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInput(
                "direction count k must be at least 1".into(),
            ));
        }
        let mut dirs = Vec::with_capacity(2 * k);
        for l in 1..=k {
            let theta = 2.0 * PI * l as f64 / k as f64;
            dirs.push(theta.cos());
            dirs.push(theta.sin());
        }
        Ok(Self {
            dirs,
            dim: 2,
            construction: Construction::CircleGrid,
        })
    }

    /// `k` i.i.d. uniform directions: normalized standard Gaussian vectors.
    pub fn sphere_uniform(dim: usize, k: usize, seed: u64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidInput(
                "sphere_uniform needs dimension >= 2".into(),
            ));
        }
        if k == 0 {
            return Err(Error::InvalidInput(
                "direction count k must be at least 1".into(),
            ));
        }
        let mut rng = rng::seeded(seed, 0);
        let mut dirs = Vec::with_capacity(dim * k);
        let mut draw = vec![0.0; dim];
        for _ in 0..k {
            loop {
                draw.iter_mut()
                    .for_each(|v| *v = rng.sample(StandardNormal));
                let r = norm(&draw);
                if r > f64::MIN_POSITIVE {
                    dirs.extend(draw.iter().map(|v| v / r));
                    break;
                }
            }
        }
        Ok(Self {
            dirs,
            dim,
            construction: Construction::SphereUniform { seed },
        })
    }

    /// Arbitrary directions; every row is normalized. Zero rows are rejected.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows
            .first()
            .map(|r| r.as_ref().len())
            .ok_or_else(|| Error::InvalidInput("direction set must be non-empty".into()))?;
        if dim == 0 {
            return Err(Error::InvalidInput(
                "directions must have dimension >= 1".into(),
            ));
        }
        let mut dirs = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            let r = norm(row);
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::InvalidInput(
                    "direction rows must be finite and non-zero".into(),
                ));
            }
            dirs.extend(row.iter().map(|v| v / r));
        }
        Ok(Self {
            dirs,
            dim,
            construction: Construction::Custom,
        })
    }

    /// Applies an orthogonal `n x n` matrix (row-major) to every direction.
    pub fn transformed(&self, matrix: &[f64]) -> Result<Self> {
        let n = self.dim;
        if matrix.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: matrix.len(),
            });
        }
        let rows: Vec<Vec<f64>> = self
            .iter()
            .map(|xi| {
                (0..n)
                    .map(|i| (0..n).map(|j| matrix[i * n + j] * xi[j]).sum())
                    .collect()
            })
            .collect();
        Self::from_rows(&rows)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.dirs.len() / self.dim
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    #[inline]
    pub fn get(&self, i: usize) -> &[f64] {
        &self.dirs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.dirs.chunks_exact(self.dim)
    }

    /// `Xi ∪ (-Xi)` without duplicates, with antipode pairing.
    pub fn antipode_closure(&self) -> AntipodeClosure {
        const TOL: f64 = 1e-12;
        let same = |a: &[f64], b: &[f64], sign: f64| {
            a.iter().zip(b).all(|(x, y)| (x - sign * y).abs() <= TOL)
        };
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut source = Vec::with_capacity(self.len());
        for xi in self.iter() {
            match rows.iter().position(|r| same(r, xi, 1.0)) {
                Some(i) => source.push(i),
                None => {
                    source.push(rows.len());
                    rows.push(xi.to_vec());
                }
            }
        }
        let mut antipode = Vec::with_capacity(2 * rows.len());
        let mut i = 0;
        while i < rows.len() {
            let j = match rows.iter().position(|r| same(r, &rows[i], -1.0)) {
                Some(j) => j,
                None => {
                    rows.push(rows[i].iter().map(|v| -v).collect());
                    rows.len() - 1
                }
            };
            antipode.push(j);
            i += 1;
        }
        let construction = self.construction;
        AntipodeClosure {
            dirs: DirectionSet {
                dirs: rows.concat(),
                dim: self.dim,
                construction,
            },
            antipode,
            source,
        }
    }
}

/// The antipode-closed version of a direction set.
#[derive(Debug, Clone, PartialEq)]
pub struct AntipodeClosure {
    pub dirs: DirectionSet,
    /// `antipode[i]` is the index of `-dirs[i]` in `dirs`.
    pub antipode: Vec<usize>,
    /// `source[l]` is the index in `dirs` of the `l`-th direction of the original set.
    pub source: Vec<usize>,
}

impl AntipodeClosure {
    /// Unordered antipodal pairs `(i, j)` with `i <= j`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.antipode
            .iter()
            .enumerate()
            .filter(|(i, j)| i <= j)
            .map(|(i, &j)| (i, j))
            .collect()
    }
}

/// Named direction-set families selectable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionKind {
    Circle,
    Sphere,
}

impl DirectionKind {
    pub fn build(self, dim: usize, k: usize, seed: u64) -> Result<DirectionSet> {
        match self {
            DirectionKind::Circle if dim == 2 => DirectionSet::circle_grid(k),
            DirectionKind::Circle => Err(Error::InvalidInput(format!(
                "circle directions need dimension 2, data has dimension {dim}"
            ))),
            DirectionKind::Sphere => DirectionSet::sphere_uniform(dim, k, seed),
        }
    }
}

impl FromStr for DirectionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circle" => Ok(DirectionKind::Circle),
            "sphere" => Ok(DirectionKind::Sphere),
            other => Err(Error::UnknownName {
                kind: "direction set",
                name: other.to_string(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_rows(set: &DirectionSet, expected: &[[f64; 2]]) {
        assert_eq!(set.len(), expected.len());
        for (got, want) in set.iter().zip(expected) {
            assert!((got[0] - want[0]).abs() < 1e-15 && (got[1] - want[1]).abs() < 1e-15);
        }
    }

    #[test]
    fn circle_grid_four() {
        let g = DirectionSet::circle_grid(4).unwrap();
        assert_rows(&g, &[[0.0, 1.0], [-1.0, 0.0], [0.0, -1.0], [1.0, 0.0]]);
    }

    #[test]
    fn circle_grid_one() {
        assert_rows(&DirectionSet::circle_grid(1).unwrap(), &[[1.0, 0.0]]);
        assert!(DirectionSet::circle_grid(0).is_err());
    }

    #[test]
    fn circle_grid_equal_gaps() {
        let g = DirectionSet::circle_grid(24).unwrap();
        assert_eq!(g.len(), 24);
        let angles: Vec<f64> = g.iter().map(|r| r[1].atan2(r[0])).collect();
        for i in 0..24 {
            let a = angles[i];
            let b = angles[(i + 1) % 24];
            let gap = (b - a).rem_euclid(2.0 * PI);
            assert!((gap - 2.0 * PI / 24.0).abs() < 1e-12);
        }
        for r in g.iter() {
            assert!((norm(r) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn circle_grid_trig_averages_vanish() {
        for k in [4usize, 24, 72] {
            let g = DirectionSet::circle_grid(k).unwrap();
            let c1: f64 = g.iter().map(|r| r[0]).sum::<f64>() / k as f64;
            let c2: f64 = g.iter().map(|r| r[0] * r[0] - r[1] * r[1]).sum::<f64>() / k as f64;
            assert!(c1.abs() <= 1e-10 && c2.abs() <= 1e-10, "k={k}: {c1} {c2}");
        }
    }

    #[test]
    fn sphere_uniform_contract() {
        let a = DirectionSet::sphere_uniform(3, 1000, 42).unwrap();
        let b = DirectionSet::sphere_uniform(3, 1000, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, DirectionSet::sphere_uniform(3, 1000, 43).unwrap());
        for r in a.iter() {
            assert!((norm(r) - 1.0).abs() <= 1e-12);
        }
        for j in 0..3 {
            let mean: f64 = a.iter().map(|r| r[j]).sum::<f64>() / 1000.0;
            assert!(mean.abs() < 0.1, "component {j}: {mean}");
        }
        assert!(DirectionSet::sphere_uniform(1, 5, 0).is_err());
    }

    #[test]
    fn sphere_uniform_covariance_is_isotropic() {
        let n = 4;
        let s = DirectionSet::sphere_uniform(n, 10_000, 7).unwrap();
        for a in 0..n {
            for b in 0..n {
                let c: f64 = s.iter().map(|r| r[a] * r[b]).sum::<f64>() / 10_000.0;
                let want = if a == b { 1.0 / n as f64 } else { 0.0 };
                assert!((c - want).abs() < 0.05, "({a},{b}): {c}");
            }
        }
    }

    #[test]
    fn closure_of_circle_grid_is_itself() {
        let g = DirectionSet::circle_grid(4).unwrap();
        let c = g.antipode_closure();
        assert_eq!(c.dirs.len(), 4);
        assert_eq!(c.antipode, vec![2, 3, 0, 1]);
        assert_eq!(c.source, vec![0, 1, 2, 3]);
        assert_eq!(c.pairs(), vec![(0, 2), (1, 3)]);
    }

    #[test]
    fn closure_adds_missing_antipodes() {
        let s = DirectionSet::from_rows(&[[1.0, 0.0]]).unwrap();
        let c = s.antipode_closure();
        assert_eq!(c.dirs.get(0), &[1.0, 0.0]);
        assert_eq!(c.dirs.get(1), &[-1.0, 0.0]);
        assert_eq!(c.antipode, vec![1, 0]);

        let odd = DirectionSet::circle_grid(3).unwrap().antipode_closure();
        assert_eq!(odd.dirs.len(), 6);

        let sph = DirectionSet::sphere_uniform(3, 5, 9)
            .unwrap()
            .antipode_closure();
        assert_eq!(sph.dirs.len(), 10);
        assert_eq!(sph.pairs().len(), 5);
        for (i, &j) in sph.antipode.iter().enumerate() {
            assert_eq!(sph.antipode[j], i);
        }
    }

    #[test]
    fn kind_parsing() {
        assert_eq!(
            "circle".parse::<DirectionKind>().unwrap(),
            DirectionKind::Circle
        );
        assert!("fibonacci".parse::<DirectionKind>().is_err());
        assert!(DirectionKind::Circle.build(3, 4, 0).is_err());
        assert_eq!(DirectionKind::Sphere.build(3, 4, 1).unwrap().len(), 4);
    }
}
