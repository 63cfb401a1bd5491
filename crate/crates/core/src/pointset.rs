use std::collections::HashSet;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::field::{Elem, Field};
use crate::linalg::Point;

/// Largest ambient space `q^d` that random sampling will index.
pub const MAX_SAMPLE_SPACE: u64 = 1 << 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PointSetError {
    #[error("point set must be non-empty")]
    Empty,
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("point {index} has {got} coordinates, expected {expected}")]
    WrongDimension {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("point {index} has coordinate {value} outside the field of size {q}")]
    OutOfRange { index: usize, value: u32, q: u32 },
    #[error("duplicate point {point:?} at positions {first} and {second}")]
    Duplicate {
        point: Vec<u32>,
        first: usize,
        second: usize,
    },
    #[error("cannot draw {size} distinct points from a space of {space}")]
    SizeTooLarge { size: u64, space: u64 },
}

/// A finite, duplicate-free `E ⊂ F_q^d`, kept in insertion order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSet {
    field: Field,
    dim: usize,
    points: Vec<Point>,
}

impl PointSet {
    /// Validates coordinates and rejects duplicates.
    pub fn new(field: &Field, dim: usize, points: Vec<Point>) -> Result<PointSet, PointSetError> {
        if dim == 0 {
            return Err(PointSetError::ZeroDimension);
        }
        if points.is_empty() {
            return Err(PointSetError::Empty);
        }
        let q = field.q();
        let mut seen = std::collections::HashMap::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(PointSetError::WrongDimension {
                    index: i,
                    got: p.len(),
                    expected: dim,
                });
            }
            if let Some(c) = p.iter().find(|c| c.0 >= q) {
                return Err(PointSetError::OutOfRange {
                    index: i,
                    value: c.0,
                    q,
                });
            }
            if let Some(&first) = seen.get(p) {
                return Err(PointSetError::Duplicate {
                    point: p.iter().map(|c| c.0).collect(),
                    first,
                    second: i,
                });
            }
            seen.insert(p, i);
        }
        Ok(PointSet {
            field: field.clone(),
            dim,
            points,
        })
    }

    /// Like [`PointSet::new`] but silently drops repeated points.
    pub fn dedup(field: &Field, dim: usize, points: Vec<Point>) -> Result<PointSet, PointSetError> {
        let mut seen = HashSet::new();
        let unique = points
            .into_iter()
            .filter(|p| seen.insert(p.clone()))
            .collect();
        Self::new(field, dim, unique)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &[Elem]) -> bool {
        self.points.iter().any(|x| x.as_slice() == p)
    }

    /// Same points, sorted into enumeration order.
    pub fn sorted(&self) -> PointSet {
        let mut points = self.points.clone();
        points.sort();
        PointSet {
            field: self.field.clone(),
            dim: self.dim,
            points,
        }
    }
}

fn space_size(field: &Field, d: usize) -> u64 {
    (field.q() as u64).checked_pow(d as u32).unwrap_or(u64::MAX)
}

fn point_from_index(field: &Field, d: usize, mut idx: u64) -> Point {
    let q = field.q() as u64;
    let mut v = vec![Elem::ZERO; d];
    for slot in v.iter_mut().rev() {
        *slot = Elem((idx % q) as u32);
        idx /= q;
    }
    v
}

/// Generator for trial `trial` of a run seeded with `seed`. Trials use
/// separate ChaCha streams so they are independent of scheduling order.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Uniform sample of `size` distinct points of `F_q^d`, returned in
/// enumeration order.
pub fn random_pointset(
    field: &Field,
    d: usize,
    size: usize,
    rng: &mut ChaCha8Rng,
) -> Result<PointSet, PointSetError> {
    let space = space_size(field, d);
    if size as u64 > space || space > MAX_SAMPLE_SPACE {
        return Err(PointSetError::SizeTooLarge {
            size: size as u64,
            space,
        });
    }
    let mut picked: Vec<u64> = index::sample(rng, space as usize, size)
        .into_iter()
        .map(|i| i as u64)
        .collect();
    picked.sort_unstable();
    let points = picked
        .into_iter()
        .map(|i| point_from_index(field, d, i))
        .collect();
    PointSet::new(field, d, points)
}

/// Seeded convenience wrapper around [`random_pointset`].
pub fn gen_random_pointset(
    field: &Field,
    d: usize,
    size: usize,
    seed: u64,
) -> Result<PointSet, PointSetError> {
    random_pointset(field, d, size, &mut trial_rng(seed, 0))
}

/// All of `F_q^d`.
pub fn full_space(field: &Field, d: usize) -> Result<PointSet, PointSetError> {
    let space = space_size(field, d);
    if space > MAX_SAMPLE_SPACE {
        return Err(PointSetError::SizeTooLarge { size: space, space });
    }
    let points = (0..space).map(|i| point_from_index(field, d, i)).collect();
    PointSet::new(field, d, points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_bad_coordinates() {
        let f = Field::new(7, 1).unwrap();
        let e = PointSet::new(&f, 2, vec![vec![Elem(1), Elem(2)], vec![Elem(1), Elem(2)]]);
        assert!(matches!(
            e,
            Err(PointSetError::Duplicate {
                first: 0,
                second: 1,
                ..
            })
        ));
        let e = PointSet::new(&f, 2, vec![vec![Elem(7), Elem(2)]]);
        assert!(matches!(e, Err(PointSetError::OutOfRange { value: 7, .. })));
        assert_eq!(PointSet::new(&f, 2, vec![]), Err(PointSetError::Empty));
        let d = PointSet::dedup(&f, 1, vec![vec![Elem(1)], vec![Elem(1)], vec![Elem(2)]]).unwrap();
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn sampling_is_deterministic_and_bounded() {
        let f = Field::new(7, 1).unwrap();
        let all = gen_random_pointset(&f, 2, 49, 5).unwrap();
        assert_eq!(all, full_space(&f, 2).unwrap());
        let a = gen_random_pointset(&f, 2, 10, 42).unwrap();
        let b = gen_random_pointset(&f, 2, 10, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 10);
        assert!(matches!(
            gen_random_pointset(&f, 2, 50, 42),
            Err(PointSetError::SizeTooLarge {
                size: 50,
                space: 49
            })
        ));
    }

    #[test]
    fn trial_streams_differ() {
        let f = Field::new(11, 1).unwrap();
        let a = random_pointset(&f, 2, 20, &mut trial_rng(1, 0)).unwrap();
        let b = random_pointset(&f, 2, 20, &mut trial_rng(1, 1)).unwrap();
        assert_ne!(a, b);
    }
}
