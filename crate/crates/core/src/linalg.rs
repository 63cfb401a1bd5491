//! Vectors and square matrices over a [`Field`], the quadratic norm
//! `x_1^2 + ... + x_d^2`, similarity matrices (`B^T B = r I`), `O(2, q)` and
//! spheres.

use thiserror::Error;

use crate::field::{Elem, Field, FieldError, QuadraticExtension};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("dimension {0} must be even")]
    OddDimension(usize),
    #[error("dimension {0} must be odd and at least 3")]
    EvenDimension(usize),
    #[error("ratio must be nonzero")]
    ZeroRatio,
    #[error("enumeration of {what} needs {size} items, over the bound {bound}")]
    TooLarge {
        what: &'static str,
        size: u64,
        bound: u64,
    },
    #[error("no a, b with a^2 + b^2 = {0}; field tables are inconsistent")]
    NoSumOfSquares(Elem),
    #[error("constructed matrix fails B^T B = rI")]
    NotSimilarity,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

pub type Point = Vec<Elem>;

/// `sum v_i^2`.
#[inline]
pub fn norm_sq(f: &Field, v: &[Elem]) -> Elem {
    v.iter().fold(Elem::ZERO, |acc, &x| f.add(acc, f.square(x)))
}

/// `||u - v||^2`.
#[inline]
pub fn dist_sq(f: &Field, u: &[Elem], v: &[Elem]) -> Elem {
    u.iter().zip(v).fold(Elem::ZERO, |acc, (&a, &b)| {
        f.add(acc, f.square(f.sub(a, b)))
    })
}

pub fn vec_sub(f: &Field, u: &[Elem], v: &[Elem]) -> Point {
    u.iter().zip(v).map(|(&a, &b)| f.sub(a, b)).collect()
}

pub fn vec_add(f: &Field, u: &[Elem], v: &[Elem]) -> Point {
    u.iter().zip(v).map(|(&a, &b)| f.add(a, b)).collect()
}

/// Dense `d x d` matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SquareMatrix {
    d: usize,
    entries: Vec<Elem>,
}

impl SquareMatrix {
    pub fn from_rows(rows: Vec<Vec<Elem>>) -> Result<SquareMatrix, LinalgError> {
        let d = rows.len();
        if d == 0 {
            return Err(LinalgError::ZeroDimension);
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(LinalgError::DimensionMismatch(d, bad.len()));
        }
        Ok(SquareMatrix {
            d,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn identity(d: usize) -> SquareMatrix {
        Self::scalar(d, Elem::ONE)
    }

    pub fn scalar(d: usize, s: Elem) -> SquareMatrix {
        let mut entries = vec![Elem::ZERO; d * d];
        for i in 0..d {
            entries[i * d + i] = s;
        }
        SquareMatrix { d, entries }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Elem {
        self.entries[i * self.d + j]
    }

    pub fn rows(&self) -> Vec<Vec<Elem>> {
        self.entries.chunks(self.d).map(<[Elem]>::to_vec).collect()
    }

    pub fn transpose(&self) -> SquareMatrix {
        let d = self.d;
        let mut entries = vec![Elem::ZERO; d * d];
        for i in 0..d {
            for j in 0..d {
                entries[j * d + i] = self.entries[i * d + j];
            }
        }
        SquareMatrix { d, entries }
    }

    pub fn mul(&self, f: &Field, other: &SquareMatrix) -> SquareMatrix {
        let d = self.d;
        let mut entries = vec![Elem::ZERO; d * d];
        for i in 0..d {
            for j in 0..d {
                entries[i * d + j] = (0..d).fold(Elem::ZERO, |acc, k| {
                    f.add(acc, f.mul(self.get(i, k), other.get(k, j)))
                });
            }
        }
        SquareMatrix { d, entries }
    }

    pub fn apply(&self, f: &Field, v: &[Elem]) -> Point {
        (0..self.d)
            .map(|i| (0..self.d).fold(Elem::ZERO, |acc, k| f.add(acc, f.mul(self.get(i, k), v[k]))))
            .collect()
    }

    /// `M^T M`.
    pub fn gram(&self, f: &Field) -> SquareMatrix {
        self.transpose().mul(f, self)
    }

    pub fn is_orthogonal(&self, f: &Field) -> bool {
        self.gram(f) == SquareMatrix::identity(self.d)
    }

    /// Whether `M^T M = r I`.
    pub fn is_similarity(&self, f: &Field, r: Elem) -> bool {
        self.gram(f) == SquareMatrix::scalar(self.d, r)
    }

    /// Determinant of a 2x2 matrix.
    pub fn det2(&self, f: &Field) -> Elem {
        assert_eq!(self.d, 2, "det2 on a {0}x{0} matrix", self.d);
        f.sub(
            f.mul(self.get(0, 0), self.get(1, 1)),
            f.mul(self.get(0, 1), self.get(1, 0)),
        )
    }
}

/// `B` with `B^T B = r I`, built from `a^2 + b^2 = r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimilarityMatrix {
    pub matrix: SquareMatrix,
    /// Ratio `r`, in the field the matrix lives in.
    pub ratio: Elem,
    /// `(a, b)` with `a^2 + b^2 = r`, in the base field.
    pub witness: (Elem, Elem),
    /// For the odd construction: whether every entry lies in the base field.
    pub base_valued: bool,
}

/// Smallest `a` (enumeration order) with `r - a^2` a square, and `b` the
/// canonical root of `r - a^2`.
pub fn sum_of_two_squares(f: &Field, r: Elem) -> Result<(Elem, Elem), LinalgError> {
    for a in f.elements() {
        let rest = f.sub(r, f.square(a));
        if let Ok(b) = f.sqrt(rest) {
            return Ok((a, b));
        }
    }
    Err(LinalgError::NoSumOfSquares(r))
}

/// Block-diagonal `B` with `d/2` copies of `[[a, -b], [b, a]]`; `B^T B = rI`.
pub fn build_similarity_even(
    f: &Field,
    d: usize,
    r: Elem,
) -> Result<SimilarityMatrix, LinalgError> {
    if d == 0 || d % 2 == 1 {
        return Err(LinalgError::OddDimension(d));
    }
    if r.is_zero() {
        return Err(LinalgError::ZeroRatio);
    }
    let (a, b) = sum_of_two_squares(f, r)?;
    let mut m = SquareMatrix::scalar(d, Elem::ZERO);
    for blk in 0..d / 2 {
        let i = 2 * blk;
        m.entries[i * d + i] = a;
        m.entries[i * d + i + 1] = f.neg(b);
        m.entries[(i + 1) * d + i] = b;
        m.entries[(i + 1) * d + i + 1] = a;
    }
    if !m.is_similarity(f, r) {
        return Err(LinalgError::NotSimilarity);
    }
    Ok(SimilarityMatrix {
        matrix: m,
        ratio: r,
        witness: (a, b),
        base_valued: true,
    })
}

/// `B = sqrt(r) * A_odd` over `F_{q^2}`: `(d-1)/2` rotation blocks from
/// `a^2 + b^2 = r` followed by a diagonal `sqrt(r)`. `r` is a base element;
/// the returned `ratio` is its image in the extension.
pub fn build_similarity_odd(
    qe: &QuadraticExtension,
    d: usize,
    r: Elem,
) -> Result<SimilarityMatrix, LinalgError> {
    if d < 3 || d.is_multiple_of(2) {
        return Err(LinalgError::EvenDimension(d));
    }
    if r.is_zero() {
        return Err(LinalgError::ZeroRatio);
    }
    let base = qe.base();
    let ext = qe.ext();
    let (a, b) = sum_of_two_squares(base, r)?;
    let (ea, eb) = (qe.embed(a), qe.embed(b));
    let mut m = SquareMatrix::scalar(d, Elem::ZERO);
    for blk in 0..(d - 1) / 2 {
        let i = 2 * blk;
        m.entries[i * d + i] = ea;
        m.entries[i * d + i + 1] = ext.neg(eb);
        m.entries[(i + 1) * d + i] = eb;
        m.entries[(i + 1) * d + i + 1] = ea;
    }
    let root = match base.sqrt(r) {
        Ok(s) => qe.embed(s),
        Err(_) => qe.sqrt_in_ext(r),
    };
    m.entries[d * d - 1] = root;
    let ratio = qe.embed(r);
    if !m.is_similarity(ext, ratio) {
        return Err(LinalgError::NotSimilarity);
    }
    Ok(SimilarityMatrix {
        matrix: m,
        ratio,
        witness: (a, b),
        base_valued: base.is_square(r),
    })
}

/// Enumeration bound for `O(2, q)`.
pub const MAX_O2_FIELD: u64 = 1 << 10;
/// Enumeration bound for `q^d` in sphere listing.
pub const MAX_SPHERE_SPACE: u64 = 1 << 22;

/// `O(2, q)`: rotations first, then reflections, each in circle-point order.
#[derive(Debug, Clone)]
pub struct OrthogonalGroup2 {
    pub elements: Vec<SquareMatrix>,
    /// Number of leading entries of `elements` that are rotations (det 1).
    pub rotations: usize,
}

impl OrthogonalGroup2 {
    pub fn rotation_subgroup(&self) -> &[SquareMatrix] {
        &self.elements[..self.rotations]
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Points `(a, b)` with `a^2 + b^2 = 1`, `a`-major in enumeration order.
pub fn unit_circle(f: &Field) -> Vec<(Elem, Elem)> {
    let mut out = Vec::new();
    for a in f.elements() {
        let rest = f.sub(Elem::ONE, f.square(a));
        if let Ok(b) = f.sqrt(rest) {
            out.push((a, b));
            let nb = f.neg(b);
            if nb != b {
                out.push((a, nb));
            }
        }
    }
    out.sort();
    out
}

pub fn enumerate_o2(f: &Field) -> Result<OrthogonalGroup2, LinalgError> {
    if f.q() as u64 > MAX_O2_FIELD {
        return Err(LinalgError::TooLarge {
            what: "O(2)",
            size: f.q() as u64,
            bound: MAX_O2_FIELD,
        });
    }
    let circle = unit_circle(f);
    let mut elements = Vec::with_capacity(2 * circle.len());
    for &(a, b) in &circle {
        elements.push(SquareMatrix {
            d: 2,
            entries: vec![a, f.neg(b), b, a],
        });
    }
    for &(a, b) in &circle {
        elements.push(SquareMatrix {
            d: 2,
            entries: vec![a, b, b, f.neg(a)],
        });
    }
    Ok(OrthogonalGroup2 {
        elements,
        rotations: circle.len(),
    })
}

/// All `v` in `F_q^d` with `||v||^2 = t`, in enumeration order (first
/// coordinate most significant).
pub fn sphere_points(f: &Field, d: usize, t: Elem) -> Result<Vec<Point>, LinalgError> {
    if d == 0 {
        return Err(LinalgError::ZeroDimension);
    }
    let q = f.q() as u64;
    let size = q.checked_pow(d as u32).unwrap_or(u64::MAX);
    if size > MAX_SPHERE_SPACE {
        return Err(LinalgError::TooLarge {
            what: "sphere",
            size,
            bound: MAX_SPHERE_SPACE,
        });
    }
    Ok(all_vectors(f, d).filter(|v| norm_sq(f, v) == t).collect())
}

/// Every vector of `F_q^d`, first coordinate most significant.
pub fn all_vectors(f: &Field, d: usize) -> impl Iterator<Item = Point> + '_ {
    let q = f.q() as u64;
    let total = q.pow(d as u32);
    (0..total).map(move |mut idx| {
        let mut v = vec![Elem::ZERO; d];
        for slot in v.iter_mut().rev() {
            *slot = Elem((idx % q) as u32);
            idx /= q;
        }
        v
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(q: u64) -> Field {
        Field::with_order(q).unwrap()
    }

    fn m(rows: &[[u32; 2]]) -> SquareMatrix {
        SquareMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Elem(x)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn norm_examples() {
        assert_eq!(norm_sq(&f(7), &[Elem(1), Elem(2)]), Elem(5));
        assert_eq!(norm_sq(&f(7), &[Elem(0), Elem(0)]), Elem(0));
        assert_eq!(norm_sq(&f(5), &[Elem(1), Elem(2)]), Elem(0));
    }

    #[test]
    fn orthogonality_examples() {
        let f7 = f(7);
        assert!(SquareMatrix::identity(3).is_orthogonal(&f7));
        // [[1, -3], [3, 1]]: M^T M = 10 I = 3 I.
        let a = m(&[[1, 4], [3, 1]]);
        assert!(!a.is_orthogonal(&f7));
        assert!(a.is_similarity(&f7, Elem(3)));
        assert!(m(&[[0, 6], [1, 0]]).is_orthogonal(&f7));
    }

    #[test]
    fn sum_of_two_squares_examples() {
        let f7 = f(7);
        assert_eq!(
            sum_of_two_squares(&f7, Elem(3)).unwrap(),
            (Elem(1), Elem(3))
        );
        assert_eq!(
            sum_of_two_squares(&f7, Elem(0)).unwrap(),
            (Elem(0), Elem(0))
        );
        assert_eq!(
            sum_of_two_squares(&f7, Elem(1)).unwrap(),
            (Elem(0), Elem(1))
        );
    }

    #[test]
    fn similarity_even_examples() {
        let f7 = f(7);
        let b = build_similarity_even(&f7, 2, Elem(3)).unwrap();
        assert_eq!(b.matrix, m(&[[1, 4], [3, 1]]));
        let rot = build_similarity_even(&f7, 2, Elem(1)).unwrap();
        assert_eq!(rot.matrix, m(&[[0, 6], [1, 0]]));
        assert!(rot.matrix.is_orthogonal(&f7));
        let b4 = build_similarity_even(&f7, 4, Elem(3)).unwrap();
        assert_eq!(b4.matrix.get(2, 2), Elem(1));
        assert_eq!(b4.matrix.get(2, 3), Elem(4));
        assert_eq!(b4.matrix.get(3, 2), Elem(3));
        assert_eq!(b4.matrix.get(0, 2), Elem(0));
        assert!(b4.matrix.is_similarity(&f7, Elem(3)));
        assert_eq!(
            build_similarity_even(&f7, 3, Elem(3)),
            Err(LinalgError::OddDimension(3))
        );
        assert_eq!(
            build_similarity_even(&f7, 2, Elem(0)),
            Err(LinalgError::ZeroRatio)
        );
    }

    #[test]
    fn similarity_odd_examples() {
        let f3 = f(3);
        let qe = QuadraticExtension::new(&f3).unwrap();
        let b = build_similarity_odd(&qe, 3, Elem(2)).unwrap();
        let last = b.matrix.get(2, 2);
        assert!(qe.project(last).is_none(), "sqrt(2) must leave F_3");
        assert!(!b.base_valued);
        assert!(b.matrix.is_similarity(qe.ext(), qe.embed(Elem(2))));

        let f7 = f(7);
        let qe7 = QuadraticExtension::new(&f7).unwrap();
        let b = build_similarity_odd(&qe7, 3, Elem(2)).unwrap();
        assert_eq!(qe7.project(b.matrix.get(2, 2)), Some(Elem(3)));
        assert!(b.base_valued);

        let id = build_similarity_odd(&qe7, 3, Elem(1)).unwrap();
        assert!(id.matrix.is_orthogonal(qe7.ext()));
        assert!(build_similarity_odd(&qe7, 4, Elem(1)).is_err());
        assert!(build_similarity_odd(&qe7, 3, Elem(0)).is_err());
    }

    fn brute_o2(f: &Field) -> Vec<SquareMatrix> {
        all_vectors(f, 4)
            .map(|v| SquareMatrix { d: 2, entries: v })
            .filter(|m| m.is_orthogonal(f))
            .collect()
    }

    #[test]
    fn o2_sizes_match_brute_force() {
        for (q, size) in [(3u64, 8usize), (5, 8), (7, 16)] {
            let field = f(q);
            let g = enumerate_o2(&field).unwrap();
            assert_eq!(g.len(), size, "q = {q}");
            let mut a = g.elements.clone();
            let mut b = brute_o2(&field);
            a.sort_by_key(|m| m.entries.clone());
            b.sort_by_key(|m| m.entries.clone());
            assert_eq!(a, b);
            assert!(g
                .rotation_subgroup()
                .iter()
                .all(|m| m.det2(&field) == Elem::ONE));
        }
        assert_eq!(enumerate_o2(&f(3)).unwrap().rotations, 4);
        assert!(enumerate_o2(&Field::new(1031, 1).unwrap()).is_err());
    }

    #[test]
    fn sphere_examples() {
        let f3 = f(3);
        let s1 = sphere_points(&f3, 2, Elem(1)).unwrap();
        let expect: Vec<Point> = vec![
            vec![Elem(0), Elem(1)],
            vec![Elem(0), Elem(2)],
            vec![Elem(1), Elem(0)],
            vec![Elem(2), Elem(0)],
        ];
        assert_eq!(s1, expect);
        assert_eq!(
            sphere_points(&f3, 2, Elem(0)).unwrap(),
            vec![vec![Elem(0), Elem(0)]]
        );
        assert_eq!(sphere_points(&f(5), 2, Elem(0)).unwrap().len(), 9);
        assert!(sphere_points(&f(1031), 3, Elem(0)).is_err());
    }
}
