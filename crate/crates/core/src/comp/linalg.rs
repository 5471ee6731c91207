//! Just enough complex Hermitian linear algebra for log-det capacities.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense Hermitian matrix stored in full, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.data[i * d.len() + i] = Complex64::new(v, 0.0);
        }
        m
    }

    /// Builds from the lower triangle given by `f(i, j)` for `j ≤ i`; the
    /// diagonal keeps only its real part.
    pub fn from_lower(n: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..i {
                let z = f(i, j);
                m.data[i * n + j] = z;
                m.data[j * n + i] = z.conj();
            }
            m.data[i * n + i] = Complex64::new(f(i, i).re, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    /// `self += w · h h†`, mirrored so the result stays exactly Hermitian.
    pub fn add_outer(&mut self, w: f64, h: &[Complex64]) {
        debug_assert_eq!(h.len(), self.n);
        let n = self.n;
        for i in 0..n {
            let hi = h[i] * w;
            for j in 0..i {
                let z = hi * h[j].conj();
                self.data[i * n + j] += z;
                self.data[j * n + i] += z.conj();
            }
            self.data[i * n + i] += w * h[i].norm_sqr();
        }
    }

    /// Largest diagonal magnitude.
    pub fn max_diag(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i).norm()).fold(0.0, f64::max)
    }

    pub fn add(&mut self, other: &HermitianMatrix) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| (self.get(i, j) - self.get(j, i).conj()).norm() <= tol))
    }
}

/// Lower Cholesky factor `M = L L†`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<Complex64>,
}

impl Cholesky {
    pub fn new(m: &HermitianMatrix) -> Result<Self> {
        let n = m.n;
        let mut l = vec![Complex64::new(0.0, 0.0); n * n];
        for j in 0..n {
            let mut d = m.get(j, j).re;
            for p in 0..j {
                d -= l[j * n + p].norm_sqr();
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: j, value: d });
            }
            let djj = d.sqrt();
            l[j * n + j] = Complex64::new(djj, 0.0);
            for i in (j + 1)..n {
                let mut s = m.get(i, j);
                for p in 0..j {
                    s -= l[i * n + p] * l[j * n + p].conj();
                }
                l[i * n + j] = s / djj;
            }
        }
        Ok(Self { n, l })
    }

    /// `log2 det M`.
    pub fn log2_det(&self) -> f64 {
        2.0 * (0..self.n).map(|i| self.l[i * self.n + i].re.ln()).sum::<f64>() / std::f64::consts::LN_2
    }

    /// `L⁻¹ b`.
    pub fn forward(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for p in 0..i {
                s -= self.l[i * n + p] * y[p];
            }
            y[i] = s / self.l[i * n + i].re;
        }
        y
    }

    /// `M⁻¹ b`.
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut x = self.forward(b);
        for i in (0..n).rev() {
            let mut s = x[i];
            for p in (i + 1)..n {
                s -= self.l[p * n + i].conj() * x[p];
            }
            x[i] = s / self.l[i * n + i].re;
        }
        x
    }

    /// `h† M⁻¹ h = ‖L⁻¹ h‖²`.
    pub fn quad_inv(&self, h: &[Complex64]) -> f64 {
        self.forward(h).iter().map(|z| z.norm_sqr()).sum()
    }
}

/// `log2 det M` for Hermitian positive definite `M`.
pub fn hermitian_logdet(m: &HermitianMatrix) -> Result<f64> {
    Ok(Cholesky::new(m)?.log2_det())
}

/// `h† M⁻¹ h`, real and nonnegative for Hermitian positive definite `M`.
pub fn effective_gain(h: &[Complex64], m: &HermitianMatrix) -> Result<f64> {
    if h.len() != m.dim() {
        return Err(Error::domain("vector and matrix dimensions differ"));
    }
    Ok(Cholesky::new(m)?.quad_inv(h))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn logdet_basics() {
        assert_eq!(hermitian_logdet(&HermitianMatrix::identity(3)).unwrap(), 0.0);
        assert!((hermitian_logdet(&HermitianMatrix::diagonal(&[2.0, 4.0])).unwrap() - 3.0).abs() < 1e-15);
        // [[2, i], [-i, 2]] has det 3
        let m = HermitianMatrix::from_lower(2, |i, j| match (i, j) {
            (1, 0) => c(0.0, -1.0),
            _ => c(2.0, 0.0),
        });
        assert!(m.is_hermitian(0.0));
        assert!((hermitian_logdet(&m).unwrap() - 3f64.log2()).abs() < 1e-14);
    }

    #[test]
    fn rejects_indefinite() {
        let m = HermitianMatrix::diagonal(&[1.0, -1.0]);
        assert!(matches!(hermitian_logdet(&m), Err(Error::NotPositiveDefinite { pivot: 1, .. })));
        let m = HermitianMatrix::from_lower(2, |_, _| c(1.0, 0.0));
        assert!(hermitian_logdet(&m).is_err());
    }

    #[test]
    fn effective_gain_basics() {
        let one = [c(1.0, 0.0), c(0.0, 0.0)];
        assert_eq!(effective_gain(&one, &HermitianMatrix::identity(2)).unwrap(), 1.0);
        assert!((effective_gain(&[c(2.0, 0.0)], &HermitianMatrix::diagonal(&[2.0])).unwrap() - 2.0).abs() < 1e-15);
        assert!(effective_gain(&one, &HermitianMatrix::identity(3)).is_err());
    }

    #[test]
    fn solve_inverts() {
        let m = HermitianMatrix::from_lower(3, |i, j| {
            if i == j {
                c(4.0 + i as f64, 0.0)
            } else {
                c(0.3 * (i + j) as f64, 0.2 * (i as f64 - j as f64))
            }
        });
        let b = [c(1.0, -1.0), c(0.5, 2.0), c(-3.0, 0.25)];
        let x = Cholesky::new(&m).unwrap().solve(&b);
        for i in 0..3 {
            let r: Complex64 = (0..3).map(|j| m.get(i, j) * x[j]).sum();
            assert!((r - b[i]).norm() < 1e-13);
        }
    }

    #[test]
    fn rank_one_update() {
        let mut m = HermitianMatrix::identity(2);
        let h = [c(1.0, 1.0), c(0.0, 2.0)];
        m.add_outer(0.5, &h);
        assert!(m.is_hermitian(0.0));
        // det(I + p h h†) = 1 + p |h|²
        assert!((hermitian_logdet(&m).unwrap() - (1.0f64 + 0.5 * 6.0).log2()).abs() < 1e-14);
    }
}
