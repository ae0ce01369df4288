use super::Matrix;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RotationKind {
    /// Givens rotation, `(cos θ, sin θ)`.
    Circular,
    /// Lorentz boost, `(cosh θ, sinh θ)`.
    Hyperbolic,
}

impl RotationKind {
    #[inline]
    pub fn coefficients(self, theta: f64) -> (f64, f64) {
        match self {
            RotationKind::Circular => {
                let (s, c) = theta.sin_cos();
                (c, s)
            }
            RotationKind::Hyperbolic => (theta.cosh(), theta.sinh()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `G·X`: mixes rows `i` and `j`.
    Left,
    /// `X·G`: mixes columns `i` and `j`.
    Right,
}

/// One planar rotation of a batch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation {
    pub i: usize,
    pub j: usize,
    pub theta: f64,
    pub kind: RotationKind,
}

/// Rotates a pair of rows in place given precomputed coefficients.
///
/// Circular: `(c·rᵢ + s·rⱼ, −s·rᵢ + c·rⱼ)`. Hyperbolic: `(c·rᵢ + s·rⱼ, s·rᵢ + c·rⱼ)`.
#[inline]
pub fn rotate_pair(ri: &mut [f64], rj: &mut [f64], c: f64, s: f64, kind: RotationKind) {
    match kind {
        RotationKind::Circular => {
            for (a, b) in ri.iter_mut().zip(rj.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = c * x + s * y;
                *b = c * y - s * x;
            }
        }
        RotationKind::Hyperbolic => {
            for (a, b) in ri.iter_mut().zip(rj.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = c * x + s * y;
                *b = s * x + c * y;
            }
        }
    }
}

fn check_pair(i: usize, j: usize, bound: usize) -> Result<()> {
    if i >= bound || j >= bound {
        return Err(Error::IndexOutOfRange { i, j, bound });
    }
    if i == j {
        return Err(Error::SameIndex(i));
    }
    Ok(())
}

/// In-place rotation. A zero angle leaves `x` untouched.
pub fn rotate_in_place(
    x: &mut Matrix,
    i: usize,
    j: usize,
    theta: f64,
    side: Side,
    kind: RotationKind,
) -> Result<()> {
    let bound = match side {
        Side::Left => x.rows(),
        Side::Right => x.cols(),
    };
    check_pair(i, j, bound)?;
    if theta == 0.0 {
        return Ok(());
    }
    let (c, s) = kind.coefficients(theta);
    match side {
        Side::Left => {
            let (ri, rj) = x.two_rows_mut(i, j);
            rotate_pair(ri, rj, c, s, kind);
        }
        Side::Right => {
            // Column form of X·G: for the Givens matrix the sine enters with the
            // opposite sign compared to the row form.
            let s_i = match kind {
                RotationKind::Circular => -s,
                RotationKind::Hyperbolic => s,
            };
            for r in 0..x.rows() {
                let row = x.row_mut(r);
                let (a, b) = (row[i], row[j]);
                row[i] = c * a + s_i * b;
                row[j] = s * a + c * b;
            }
        }
    }
    Ok(())
}

/// Returns the rotated copy of `x`; see [`rotate_in_place`].
pub fn apply_rotation(
    x: &Matrix,
    i: usize,
    j: usize,
    theta: f64,
    side: Side,
    kind: RotationKind,
) -> Result<Matrix> {
    let mut out = x.clone();
    rotate_in_place(&mut out, i, j, theta, side, kind)?;
    Ok(out)
}

fn validate_batch(rows: usize, batch: &[Rotation]) -> Result<()> {
    let mut used = vec![false; rows];
    for r in batch {
        check_pair(r.i, r.j, rows)?;
        for k in [r.i, r.j] {
            if std::mem::replace(&mut used[k], true) {
                return Err(Error::OverlappingIndices(k));
            }
        }
    }
    Ok(())
}

/// Applies a batch of left rotations with pairwise disjoint rows one after another.
pub fn apply_disjoint_rotations_sequential(x: &mut Matrix, batch: &[Rotation]) -> Result<()> {
    validate_batch(x.rows(), batch)?;
    for r in batch {
        if r.theta == 0.0 {
            continue;
        }
        let (c, s) = r.kind.coefficients(r.theta);
        let (ri, rj) = x.two_rows_mut(r.i, r.j);
        rotate_pair(ri, rj, c, s, r.kind);
    }
    Ok(())
}

/// Below this many touched entries the thread pool costs more than it saves.
#[cfg(feature = "parallel")]
const PAR_MIN_ENTRIES: usize = 1 << 14;

/// Applies a batch of left rotations with pairwise disjoint rows.
///
/// With the `parallel` feature the rotations run on the rayon pool. Every row is
/// written by exactly one rotation, so the result is bitwise identical to
/// [`apply_disjoint_rotations_sequential`].
pub fn apply_disjoint_rotations_in_place(x: &mut Matrix, batch: &[Rotation]) -> Result<()> {
    #[cfg(feature = "parallel")]
    {
        if 2 * batch.len() * x.cols() >= PAR_MIN_ENTRIES {
            validate_batch(x.rows(), batch)?;
            rotate_batch_parallel(x, batch);
            return Ok(());
        }
    }
    apply_disjoint_rotations_sequential(x, batch)
}

#[cfg(feature = "parallel")]
fn rotate_batch_parallel(x: &mut Matrix, batch: &[Rotation]) {
    use rayon::prelude::*;

    let cols = x.cols();
    let mut slots: Vec<Option<&mut [f64]>> = x.as_mut_slice().chunks_mut(cols).map(Some).collect();
    let mut jobs = Vec::with_capacity(batch.len());
    for r in batch {
        let ri = slots[r.i].take().expect("validated disjoint");
        let rj = slots[r.j].take().expect("validated disjoint");
        jobs.push((ri, rj, *r));
    }
    jobs.into_par_iter().for_each(|(ri, rj, r)| {
        if r.theta != 0.0 {
            let (c, s) = r.kind.coefficients(r.theta);
            rotate_pair(ri, rj, c, s, r.kind);
        }
    });
}

/// Copying form of [`apply_disjoint_rotations_in_place`].
pub fn apply_disjoint_rotations(x: &Matrix, batch: &[Rotation]) -> Result<Matrix> {
    let mut out = x.clone();
    apply_disjoint_rotations_in_place(&mut out, batch)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn quarter_turn() {
        let r = apply_rotation(&Matrix::identity(2), 0, 1, FRAC_PI_2, Side::Left, RotationKind::Circular)
            .unwrap();
        let expect = Matrix::from_rows(&[[0.0, 1.0], [-1.0, 0.0]]);
        assert!((&r - &expect).max_abs() < 1e-15);
    }

    #[test]
    fn zero_angle_is_identity() {
        let r = apply_rotation(&Matrix::identity(2), 0, 1, 0.0, Side::Left, RotationKind::Circular)
            .unwrap();
        assert!(r.bit_eq(&Matrix::identity(2)));
    }

    #[test]
    fn boost_preserves_lorentz_form() {
        for t in [0.3, -1.7] {
            let m = apply_rotation(&Matrix::identity(2), 0, 1, t, Side::Left, RotationKind::Hyperbolic)
                .unwrap();
            let j = Matrix::diag(&[-1.0, 1.0]);
            let mjm = m.t_matmul(&j.matmul(&m));
            assert!((&mjm - &j).max_abs() < 1e-12);
        }
    }

    #[test]
    fn right_side_is_matrix_product() {
        let x = Matrix::from_fn(3, 4, |i, j| (i as f64 + 1.0) * (j as f64 - 1.5));
        let g = apply_rotation(&Matrix::identity(4), 1, 3, 0.7, Side::Left, RotationKind::Circular)
            .unwrap();
        let r = apply_rotation(&x, 1, 3, 0.7, Side::Right, RotationKind::Circular).unwrap();
        assert!((&r - &x.matmul(&g)).max_abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_indices() {
        let x = Matrix::identity(3);
        assert_eq!(
            apply_rotation(&x, 1, 1, 0.1, Side::Left, RotationKind::Circular),
            Err(Error::SameIndex(1))
        );
        assert!(apply_rotation(&x, 0, 3, 0.1, Side::Left, RotationKind::Circular).is_err());
        let batch = [
            Rotation { i: 0, j: 1, theta: 0.1, kind: RotationKind::Circular },
            Rotation { i: 1, j: 2, theta: 0.1, kind: RotationKind::Circular },
        ];
        assert_eq!(apply_disjoint_rotations(&x, &batch), Err(Error::OverlappingIndices(1)));
    }
}
