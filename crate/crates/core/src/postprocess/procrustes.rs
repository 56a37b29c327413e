use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::positions::Positions;
use crate::scalar::Real;

fn to_matrix<T: Real>(z: &Positions<T>) -> DMatrix<f64> {
    DMatrix::from_row_iterator(z.n(), z.d(), z.as_slice().iter().map(|x| x.as_f64()))
}

fn centered(m: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let means: Vec<f64> = (0..m.ncols()).map(|c| m.column(c).mean()).collect();
    let mut out = m.clone();
    for (c, &mu) in means.iter().enumerate() {
        out.column_mut(c).add_scalar_mut(-mu);
    }
    (out, means)
}

/// Rigid motion (orthogonal map, reflections allowed, plus translation) that
/// brings `z` closest to `reference` in Frobenius norm.
///
/// Both are centred, the orthogonal factor `U V'` is taken from the SVD of
/// the cross-product `Zc' Rc`, and the reference centroid is added back. When
/// every row of `z` coincides only the translation is applied.
pub fn procrustes_align<T: Real>(z: &Positions<T>, reference: &Positions<T>) -> Result<Positions<f64>> {
    if z.n() != reference.n() || z.d() != reference.d() {
        return Err(invalid("procrustes inputs must have the same shape"));
    }
    if z.n() < 2 {
        return Err(invalid("procrustes alignment needs at least two points"));
    }
    let (zc, _) = centered(&to_matrix(z));
    let (rc, ref_means) = centered(&to_matrix(reference));
    let rotated = if zc.norm() == 0.0 {
        zc
    } else {
        let cross = zc.transpose() * &rc;
        let svd = cross.svd(true, true);
        let (u, v_t) = match (svd.u, svd.v_t) {
            (Some(u), Some(v_t)) => (u, v_t),
            _ => return Err(Error::NumericDomain("singular value decomposition failed".into())),
        };
        zc * (u * v_t)
    };
    let mut data = Vec::with_capacity(z.n() * z.d());
    for i in 0..z.n() {
        for (c, &mu) in ref_means.iter().enumerate() {
            data.push(rotated[(i, c)] + mu);
        }
    }
    Positions::from_vec(z.n(), z.d(), data)
}

/// Frobenius distance between two configurations of the same shape.
pub fn frobenius_distance<T: Real, U: Real>(a: &Positions<T>, b: &Positions<U>) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(&x, &y)| (x.as_f64() - y.as_f64()).powi(2)).sum::<f64>().sqrt()
}
