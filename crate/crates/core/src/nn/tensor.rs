use rand::Rng;

use super::NnError;

/// Dense row-major tensor of up to three axes. The shape is fixed at creation.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Self {
        assert!(shape.len() <= 3, "tensors have at most 3 axes");
        Tensor { shape: shape.to_vec(), data: vec![0.0; shape.iter().product()] }
    }

    pub fn from_vec(shape: &[usize], data: Vec<f64>) -> Result<Self, NnError> {
        if shape.len() > 3 {
            return Err(NnError::Shape(format!("{} axes requested, at most 3 supported", shape.len())));
        }
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(NnError::Shape(format!(
                "shape {shape:?} needs {expected} values, got {}",
                data.len()
            )));
        }
        Ok(Tensor { shape: shape.to_vec(), data })
    }

    /// Glorot/Xavier uniform: U(−a, a) with a = sqrt(6 / (fan_in + fan_out)).
    pub fn glorot_uniform<R: Rng>(shape: &[usize], fan_in: usize, fan_out: usize, rng: &mut R) -> Self {
        let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let mut t = Tensor::zeros(shape);
        t.data.iter_mut().for_each(|v| *v = rng.gen_range(-a..a));
        t
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Same values under a new shape with the same element count.
    pub fn reshaped(self, shape: &[usize]) -> Result<Self, NnError> {
        Tensor::from_vec(shape, self.data)
    }

    pub fn fill(&mut self, v: f64) {
        self.data.fill(v);
    }

    pub fn add_assign(&mut self, other: &Tensor) {
        debug_assert_eq!(self.shape, other.shape);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub(crate) fn dims2(&self, what: &str) -> Result<(usize, usize), NnError> {
        match self.shape[..] {
            [a, b] => Ok((a, b)),
            _ => Err(NnError::Shape(format!("{what}: expected 2 axes, got {:?}", self.shape))),
        }
    }

    pub(crate) fn dims3(&self, what: &str) -> Result<(usize, usize, usize), NnError> {
        match self.shape[..] {
            [a, b, c] => Ok((a, b, c)),
            _ => Err(NnError::Shape(format!("{what}: expected 3 axes, got {:?}", self.shape))),
        }
    }

    pub(crate) fn dims1(&self, what: &str) -> Result<usize, NnError> {
        match self.shape[..] {
            [a] => Ok(a),
            _ => Err(NnError::Shape(format!("{what}: expected 1 axis, got {:?}", self.shape))),
        }
    }
}

/// `y += a * x`
#[inline]
pub(crate) fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Dot product with four interleaved partial sums.
#[inline]
pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks = x.len() / 4;
    for i in 0..chunks {
        for k in 0..4 {
            acc[k] += x[4 * i + k] * y[4 * i + k];
        }
    }
    let mut tail = 0.0;
    for i in chunks * 4..x.len() {
        tail += x[i] * y[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}
