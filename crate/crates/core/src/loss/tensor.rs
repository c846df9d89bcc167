use super::LossError;

/// A dense, row-major tensor of `f64` values.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self, LossError> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(LossError::ElementCount { shape, expected, actual: data.len() });
        }
        Ok(Tensor { shape, data })
    }

    pub fn scalar(value: f64) -> Self {
        Tensor { shape: Vec::new(), data: vec![value] }
    }

    /// One-dimensional tensor over `data`.
    pub fn vector(data: Vec<f64>) -> Self {
        Tensor { shape: vec![data.len()], data }
    }

    pub fn filled(shape: Vec<usize>, value: f64) -> Self {
        let n = shape.iter().product();
        Tensor { shape, data: vec![value; n] }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
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

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub(crate) fn check_same_shape(&self, other: &Tensor) -> Result<(), LossError> {
        if self.shape != other.shape {
            return Err(LossError::ShapeMismatch {
                left: self.shape.clone(),
                right: other.shape.clone(),
            });
        }
        Ok(())
    }

    /// Elementwise combination of two equally shaped tensors.
    pub fn zip_with(&self, other: &Tensor, f: impl Fn(f64, f64) -> f64) -> Result<Tensor, LossError> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Tensor { shape: self.shape.clone(), data })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor { shape: self.shape.clone(), data: self.data.iter().map(|&v| f(v)).collect() }
    }

    /// For every element of a tensor shaped `target`, the flat index into
    /// `self` under right-aligned broadcasting (dimensions equal or 1).
    pub(crate) fn broadcast_indices(&self, target: &[usize]) -> Result<Vec<usize>, LossError> {
        let fail = || LossError::NotBroadcastable {
            weight: self.shape.clone(),
            target: target.to_vec(),
        };
        if self.shape.len() > target.len() {
            return Err(fail());
        }
        let offset = target.len() - self.shape.len();
        // stride of each target axis inside `self` (0 where broadcast)
        let mut strides = vec![0usize; target.len()];
        let mut stride = 1usize;
        for axis in (0..self.shape.len()).rev() {
            let dim = self.shape[axis];
            let target_dim = target[axis + offset];
            if dim == target_dim {
                strides[axis + offset] = stride;
            } else if dim != 1 {
                return Err(fail());
            }
            stride *= dim;
        }

        let total: usize = target.iter().product();
        let mut indices = Vec::with_capacity(total);
        let mut counter = vec![0usize; target.len()];
        for _ in 0..total {
            indices.push(counter.iter().zip(&strides).map(|(c, s)| c * s).sum());
            for axis in (0..target.len()).rev() {
                counter[axis] += 1;
                if counter[axis] < target[axis] {
                    break;
                }
                counter[axis] = 0;
            }
        }
        Ok(indices)
    }
}
