//! Principal component analysis by symmetric eigendecomposition.

/// Eigenvalues (descending) and unit eigenvectors of a symmetric matrix
/// given row-major as `n x n`. Cyclic Jacobi rotations.
pub fn symmetric_eigen(matrix: &[f64], n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    assert_eq!(matrix.len(), n * n);
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = order
        .iter()
        .map(|&i| {
            let mut col: Vec<f64> = (0..n).map(|k| v[k * n + i]).collect();
            fix_sign(&mut col);
            col
        })
        .collect();
    (values, vectors)
}

/// Flips `v` so its largest-magnitude coordinate is positive (first wins ties).
pub fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|x| *x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pca {
    pub mean: Vec<f64>,
    /// Projection directions, unit-norm and mutually orthogonal.
    pub components: Vec<Vec<f64>>,
    /// All eigenvalues of the sample covariance, descending.
    pub eigenvalues: Vec<f64>,
}

impl Pca {
    /// Fits on `rows` (each of equal length) keeping `n_components`
    /// directions. Needs at least two rows.
    pub fn fit(rows: &[Vec<f64>], n_components: usize) -> Option<Self> {
        if rows.len() < 2 {
            return None;
        }
        let dim = rows[0].len();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; dim];
        for r in rows {
            for (m, x) in mean.iter_mut().zip(r) {
                *m += x / n;
            }
        }
        let mut cov = vec![0.0; dim * dim];
        for r in rows {
            for i in 0..dim {
                let di = r[i] - mean[i];
                for j in i..dim {
                    cov[i * dim + j] += di * (r[j] - mean[j]);
                }
            }
        }
        for i in 0..dim {
            for j in i..dim {
                let c = cov[i * dim + j] / (n - 1.0);
                cov[i * dim + j] = c;
                cov[j * dim + i] = c;
            }
        }
        let (eigenvalues, vectors) = symmetric_eigen(&cov, dim);
        Some(Pca {
            mean,
            components: vectors.into_iter().take(n_components).collect(),
            eigenvalues,
        })
    }

    /// Coordinates of `row` along the kept directions; missing directions
    /// (input dimension below `n_components`) project to zero.
    pub fn project(&self, row: &[f64], n_components: usize) -> Vec<f64> {
        (0..n_components)
            .map(|c| match self.components.get(c) {
                Some(dir) => dir
                    .iter()
                    .zip(row)
                    .zip(&self.mean)
                    .map(|((d, x), m)| d * (x - m))
                    .sum(),
                None => 0.0,
            })
            .collect()
    }
}
