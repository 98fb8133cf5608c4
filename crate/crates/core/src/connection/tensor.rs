use crate::scalar::Scalar;

/// Components of a tensor with at most one upper (vector-valued) index and
/// `lower` covariant slots, stored densely as `[c][i1]…[ip]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<S> {
    dim: usize,
    upper: bool,
    lower: usize,
    data: Vec<S>,
}

impl<S: Scalar> Tensor<S> {
    pub fn zeros(dim: usize, upper: bool, lower: usize) -> Self {
        let len = if upper { dim } else { 1 } * dim.pow(lower as u32);
        Tensor {
            dim,
            upper,
            lower,
            data: vec![S::zero(); len],
        }
    }

    pub fn from_data(dim: usize, upper: bool, lower: usize, data: Vec<S>) -> Self {
        let len = if upper { dim } else { 1 } * dim.pow(lower as u32);
        assert_eq!(data.len(), len, "tensor component count");
        Tensor {
            dim,
            upper,
            lower,
            data,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_upper(&self) -> bool {
        self.upper
    }

    pub fn lower(&self) -> usize {
        self.lower
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn into_data(self) -> Vec<S> {
        self.data
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Tensor<T> {
        Tensor {
            dim: self.dim,
            upper: self.upper,
            lower: self.lower,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub(crate) fn unflatten(mut flat: usize, n: usize, idx: &mut [usize]) {
        for slot in idx.iter_mut().rev() {
            *slot = flat % n;
            flat /= n;
        }
    }

    pub fn flat_index(&self, lower: &[usize]) -> usize {
        lower.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn at_flat(&self, c: usize, flat: usize) -> &S {
        &self.data[c * self.dim.pow(self.lower as u32) + flat]
    }

    pub fn at_flat_mut(&mut self, c: usize, flat: usize) -> &mut S {
        let w = self.dim.pow(self.lower as u32);
        &mut self.data[c * w + flat]
    }

    /// Component with upper index `c` (ignored for scalar-valued tensors).
    pub fn get(&self, c: usize, lower: &[usize]) -> &S {
        debug_assert_eq!(lower.len(), self.lower);
        let c = if self.upper { c } else { 0 };
        self.at_flat(c, self.flat_index(lower))
    }

    pub fn get_mut(&mut self, c: usize, lower: &[usize]) -> &mut S {
        let c = if self.upper { c } else { 0 };
        let f = self.flat_index(lower);
        self.at_flat_mut(c, f)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(
            (self.dim, self.upper, self.lower),
            (rhs.dim, rhs.upper, rhs.lower),
            "tensor shapes differ"
        );
        Tensor {
            dim: self.dim,
            upper: self.upper,
            lower: self.lower,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.scale(-1.0))
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|x| x.scale(c))
    }

    /// Largest absolute deviation from antisymmetry in the lower slots.
    pub fn antisymmetry_defect(&self, abs: impl Fn(&S) -> f64) -> f64 {
        let n = self.dim;
        let p = self.lower;
        let uppers = if self.upper { n } else { 1 };
        let mut idx = vec![0; p];
        let mut worst: f64 = 0.0;
        for c in 0..uppers {
            for flat in 0..n.pow(p as u32) {
                Self::unflatten(flat, n, &mut idx);
                for a in 0..p {
                    for b in a + 1..p {
                        let mut sw = idx.clone();
                        sw.swap(a, b);
                        let x = self.at_flat(c, flat);
                        let y = self.at_flat(c, self.flat_index(&sw));
                        worst = worst.max(abs(&x.add(y)));
                    }
                }
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_upper_then_lower() {
        let mut t = Tensor::<f64>::zeros(3, true, 2);
        *t.get_mut(2, &[1, 0]) = 5.0;
        assert_eq!(t.data()[2 * 9 + 3], 5.0);
        assert_eq!(*t.get(2, &[1, 0]), 5.0);
    }

    #[test]
    fn antisymmetry_defect_detects_symmetric_part() {
        let mut t = Tensor::<f64>::zeros(2, false, 2);
        *t.get_mut(0, &[0, 1]) = 1.0;
        *t.get_mut(0, &[1, 0]) = -1.0;
        assert_eq!(t.antisymmetry_defect(|x| x.abs()), 0.0);
        *t.get_mut(0, &[1, 0]) = 1.0;
        assert_eq!(t.antisymmetry_defect(|x| x.abs()), 2.0);
    }
}
