use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// The ensemble seen through a fixed support `S`: the quadratic forms
/// `z -> z^T B_i z` with `B_i = U_S^T A_i U_S`, for `z` in `R^|S|`.
#[derive(Clone, Debug)]
pub struct RestrictedEnsemble {
    support: Vec<usize>,
    repr: Repr,
}

#[derive(Clone, Debug)]
enum Repr {
    /// `B_i = Re(c_i^H c_i)` where `c_i` is row `i` of the selected columns.
    Linear {
        rows: usize,
        columns: Vec<Complex64>,
    },
    Blocks(Vec<DMatrix<f64>>),
}

impl RestrictedEnsemble {
    pub(crate) fn linear(support: Vec<usize>, rows: usize, columns: Vec<Complex64>) -> Self {
        debug_assert_eq!(columns.len(), rows * support.len());
        Self { support, repr: Repr::Linear { rows, columns } }
    }

    pub(crate) fn blocks(support: Vec<usize>, blocks: Vec<DMatrix<f64>>) -> Self {
        Self { support, repr: Repr::Blocks(blocks) }
    }

    /// Zero-based indices of the free variables, in the order of `z`.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn dim(&self) -> usize {
        self.support.len()
    }

    pub fn num_measurements(&self) -> usize {
        match &self.repr {
            Repr::Linear { rows, .. } => *rows,
            Repr::Blocks(b) => b.len(),
        }
    }

    /// The explicit `B_i`.
    pub fn block(&self, i: usize) -> DMatrix<f64> {
        match &self.repr {
            Repr::Linear { columns, .. } => {
                let s = self.dim();
                let row = &columns[i * s..(i + 1) * s];
                DMatrix::from_fn(s, s, |a, b| (row[a].conj() * row[b]).re)
            }
            Repr::Blocks(b) => b[i].clone(),
        }
    }

    /// `z^T B_i z` for every `i`.
    pub fn quadratic_values(&self, z: &[f64]) -> Vec<f64> {
        self.evaluate(z, None)
    }

    /// `z^T B_i z` together with the Jacobian whose `i`-th row is `2 (B_i z)^T`.
    pub fn jacobian(&self, z: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
        let mut jac = DMatrix::zeros(self.num_measurements(), self.dim());
        let values = self.evaluate(z, Some(&mut jac));
        (values, jac)
    }

    /// `g(z) = sum_i w_i (z^T B_i z - y_i)^2`.
    pub fn objective(&self, z: &[f64], y: &[f64], w: &[f64]) -> f64 {
        super::weighted_residual_norm(&self.quadratic_values(z), y, w)
    }

    /// Scatters `z` into a length-`len` vector at the support positions.
    pub fn embed(&self, z: &[f64], len: usize) -> Vec<f64> {
        let mut x = vec![0.0; len];
        for (&k, &v) in self.support.iter().zip(z) {
            x[k] = v;
        }
        x
    }

    fn evaluate(&self, z: &[f64], mut jac: Option<&mut DMatrix<f64>>) -> Vec<f64> {
        let s = self.dim();
        match &self.repr {
            Repr::Linear { rows, columns } => {
                let mut values = Vec::with_capacity(*rows);
                for i in 0..*rows {
                    let row = &columns[i * s..(i + 1) * s];
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (c, zk) in row.iter().zip(z) {
                        acc += c * zk;
                    }
                    values.push(acc.norm_sqr());
                    if let Some(jac) = jac.as_deref_mut() {
                        // B_i z = Re(conj(c_i) acc)
                        for (k, c) in row.iter().enumerate() {
                            jac[(i, k)] = 2.0 * (c.re * acc.re + c.im * acc.im);
                        }
                    }
                }
                values
            }
            Repr::Blocks(blocks) => {
                let zv = DVector::from_column_slice(z);
                blocks
                    .iter()
                    .enumerate()
                    .map(|(i, b)| {
                        let bz = b * &zv;
                        if let Some(jac) = jac.as_deref_mut() {
                            for k in 0..s {
                                jac[(i, k)] = 2.0 * bz[k];
                            }
                        }
                        zv.dot(&bz)
                    })
                    .collect()
            }
        }
    }
}
