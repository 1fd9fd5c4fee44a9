use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{Fourier1d, Fourier2d, LinearSensing};
use crate::error::{Error, Result};

/// Dense complex sensing vectors, one per row: `y_i = |<phi_i, x>|^2`.
#[derive(Clone, Debug)]
pub struct DenseSensing {
    rows: DMatrix<Complex64>,
}

impl DenseSensing {
    pub fn new(rows: DMatrix<Complex64>) -> Result<Self> {
        if rows.nrows() == 0 || rows.ncols() == 0 {
            return Err(Error::InvalidParameter("sensing matrix must be nonempty".into()));
        }
        Ok(Self { rows })
    }

    pub fn real(rows: DMatrix<f64>) -> Result<Self> {
        Self::new(rows.map(|v| Complex64::new(v, 0.0)))
    }
}

impl LinearSensing for DenseSensing {
    fn input_len(&self) -> usize {
        self.rows.ncols()
    }

    fn output_len(&self) -> usize {
        self.rows.nrows()
    }

    fn apply(&self, x: &[f64]) -> Vec<Complex64> {
        let x = DVector::from_iterator(x.len(), x.iter().map(|v| Complex64::new(*v, 0.0)));
        (&self.rows * x).as_slice().to_vec()
    }

    fn adjoint_re(&self, v: Vec<Complex64>) -> Vec<f64> {
        let v = DVector::from_vec(v);
        self.rows.ad_mul(&v).iter().map(|c| c.re).collect()
    }

    fn columns(&self, support: &[usize]) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.rows.nrows() * support.len());
        for i in 0..self.rows.nrows() {
            out.extend(support.iter().map(|&k| self.rows[(i, k)]));
        }
        out
    }
}

/// The measurement operator applied to the synthesized signal `D z`.
#[derive(Clone, Debug)]
pub enum Sensing {
    Dense(DenseSensing),
    Fourier1d(Fourier1d),
    Fourier2d(Fourier2d),
}

impl Sensing {
    fn op(&self) -> &dyn LinearSensing {
        match self {
            Sensing::Dense(d) => d,
            Sensing::Fourier1d(f) => f,
            Sensing::Fourier2d(f) => f,
        }
    }
}

/// Measurements `y_i = |<phi_i, D z>|^2` of a signal that is sparse in the
/// basis `D` (`n x b`), so `A_i = D^T Re(phi_i phi_i^H) D`. A missing basis
/// means `D = I`.
#[derive(Clone, Debug)]
pub struct DictionaryEnsemble {
    basis: Option<DMatrix<f64>>,
    sensing: Sensing,
}

impl DictionaryEnsemble {
    pub fn new(basis: Option<DMatrix<f64>>, sensing: Sensing) -> Result<Self> {
        if let Some(d) = &basis {
            let expected = sensing.op().input_len();
            if d.nrows() != expected {
                return Err(Error::DimensionMismatch { expected, found: d.nrows() });
            }
            if d.ncols() == 0 {
                return Err(Error::InvalidParameter("dictionary must have at least one atom".into()));
            }
        }
        Ok(Self { basis, sensing })
    }

    pub fn basis(&self) -> Option<&DMatrix<f64>> {
        self.basis.as_ref()
    }

    pub fn sensing(&self) -> &Sensing {
        &self.sensing
    }

    /// The native-domain signal `D z`.
    pub fn synthesize(&self, z: &[f64]) -> Vec<f64> {
        match &self.basis {
            Some(d) => (d * DVector::from_column_slice(z)).as_slice().to_vec(),
            None => z.to_vec(),
        }
    }
}

impl LinearSensing for DictionaryEnsemble {
    fn input_len(&self) -> usize {
        match &self.basis {
            Some(d) => d.ncols(),
            None => self.sensing.op().input_len(),
        }
    }

    fn output_len(&self) -> usize {
        self.sensing.op().output_len()
    }

    fn apply(&self, z: &[f64]) -> Vec<Complex64> {
        self.sensing.op().apply(&self.synthesize(z))
    }

    fn adjoint_re(&self, v: Vec<Complex64>) -> Vec<f64> {
        let back = self.sensing.op().adjoint_re(v);
        match &self.basis {
            Some(d) => d.tr_mul(&DVector::from_vec(back)).as_slice().to_vec(),
            None => back,
        }
    }

    fn columns(&self, support: &[usize]) -> Vec<Complex64> {
        let Some(d) = &self.basis else {
            return self.sensing.op().columns(support);
        };
        let op = self.sensing.op();
        let rows = op.output_len();
        let s = support.len();
        let mut out = vec![Complex64::new(0.0, 0.0); rows * s];
        for (j, &k) in support.iter().enumerate() {
            let atom = op.apply(d.column(k).as_slice());
            for (i, v) in atom.into_iter().enumerate() {
                out[i * s + j] = v;
            }
        }
        out
    }
}
