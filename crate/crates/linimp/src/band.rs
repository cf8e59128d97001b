//! Banded matrix storage with a direct LU solver (partial pivoting).
//!
//! All the linear operators in this crate (second-difference matrices in 1D,
//! the five-point Laplacian on the composite 2D domain, and the coupled stage
//! systems built from them) are banded, so a band factorization in the style
//! of LAPACK's `gbtrf` covers every direct solve we need.

use crate::error::LinimpError;
use crate::scalar::Scalar;

/// Row-major band storage: row `i` holds columns `i-kl ..= i+ku`.
#[derive(Clone, Debug)]
pub struct BandMatrix<S> {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<S>,
}

impl<S: Scalar> BandMatrix<S> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        BandMatrix {
            n,
            kl,
            ku,
            data: vec![S::zero(); n * (kl + ku + 1)],
        }
    }

    /// 1 x 1 matrix (scalar ODE case).
    pub fn scalar(a: S) -> Self {
        let mut m = Self::zeros(1, 0, 0);
        m.set(0, 0, a);
        m
    }

    /// Standard second-difference matrix on `n` interior points with
    /// homogeneous Dirichlet boundary conditions, scaled by `1/dx^2`.
    pub fn second_difference(n: usize, dx: f64) -> BandMatrix<f64> {
        let mut b = BandMatrix::<f64>::zeros(n, 1, 1);
        let w = 1.0 / (dx * dx);
        for i in 0..n {
            b.set(i, i, -2.0 * w);
            if i > 0 {
                b.set(i, i - 1, w);
            }
            if i + 1 < n {
                b.set(i, i + 1, w);
            }
        }
        b
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn kl(&self) -> usize {
        self.kl
    }
    pub fn ku(&self) -> usize {
        self.ku
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> Option<usize> {
        if j + self.kl >= i && j <= i + self.ku && j < self.n {
            Some(i * (self.kl + self.ku + 1) + (j + self.kl - i))
        } else {
            None
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> S {
        match self.idx(i, j) {
            Some(k) => self.data[k],
            None => S::zero(),
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: S) {
        let k = self.idx(i, j).expect("entry outside band");
        self.data[k] = v;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: S) {
        let k = self.idx(i, j).expect("entry outside band");
        self.data[k] += v;
    }

    /// Iterate over stored entries `(i, j, a_ij)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, S)> + '_ {
        (0..self.n).flat_map(move |i| {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            (lo..=hi).map(move |j| (i, j, self.get(i, j)))
        })
    }

    /// y = A x
    pub fn matvec(&self, x: &[S]) -> Vec<S> {
        debug_assert_eq!(x.len(), self.n);
        let mut y = vec![S::zero(); self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            let mut acc = S::zero();
            for j in lo..=hi {
                acc += self.get(i, j) * x[j];
            }
            y[i] = acc;
        }
        y
    }

    /// y += c * A x
    pub fn matvec_add_scaled(&self, x: &[S], c: S, y: &mut [S]) {
        let ax = self.matvec(x);
        for (yi, ai) in y.iter_mut().zip(ax) {
            *yi += c * ai;
        }
    }

    /// Map every stored entry through `f` (e.g. multiply a real Laplacian by i).
    pub fn map<T: Scalar>(&self, f: impl Fn(S) -> T) -> BandMatrix<T> {
        BandMatrix {
            n: self.n,
            kl: self.kl,
            ku: self.ku,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j).modulus()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// LU factorization with partial pivoting. The factored form carries an
    /// enlarged upper bandwidth `kl + ku` to hold pivoting fill-in.
    pub fn lu(&self) -> Result<BandLu<S>, LinimpError> {
        let n = self.n;
        let kl = self.kl;
        let kuw = self.kl + self.ku;
        let width = kl + kuw + 1;
        let mut data = vec![S::zero(); n * width];
        // copy into widened storage: row i holds columns i-kl ..= i+kuw
        for (i, j, v) in self.entries() {
            data[i * width + (j + kl - i)] = v;
        }
        let mut piv = vec![0usize; n];
        let at = |data: &[S], i: usize, j: usize| -> S {
            debug_assert!(j + kl >= i && j <= i + kuw);
            data[i * width + (j + kl - i)]
        };
        for k in 0..n {
            // pivot search in column k, rows k ..= min(k+kl, n-1)
            let imax = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = at(&data, k, k).modulus();
            for i in (k + 1)..=imax {
                let v = at(&data, i, k).modulus();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            piv[k] = p;
            if best == 0.0 {
                return Err(LinimpError::SingularSystem);
            }
            let jmax = (k + kuw).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let a = data[k * width + (j + kl - k)];
                    let b = data[p * width + (j + kl - p)];
                    data[k * width + (j + kl - k)] = b;
                    data[p * width + (j + kl - p)] = a;
                }
            }
            let pivot = at(&data, k, k);
            for i in (k + 1)..=imax {
                let m = at(&data, i, k) / pivot;
                data[i * width + (k + kl - i)] = m;
                if m != S::zero() {
                    for j in (k + 1)..=jmax {
                        let akj = data[k * width + (j + kl - k)];
                        data[i * width + (j + kl - i)] -= m * akj;
                    }
                }
            }
        }
        Ok(BandLu {
            n,
            kl,
            kuw,
            data,
            piv,
        })
    }
}

/// Factored band matrix; solves `A x = b` for many right-hand sides.
#[derive(Clone, Debug)]
pub struct BandLu<S> {
    n: usize,
    kl: usize,
    kuw: usize,
    data: Vec<S>,
    piv: Vec<usize>,
}

impl<S: Scalar> BandLu<S> {
    pub fn solve(&self, b: &[S]) -> Vec<S> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [S]) {
        let (n, kl, kuw) = (self.n, self.kl, self.kuw);
        let width = kl + kuw + 1;
        debug_assert_eq!(x.len(), n);
        // forward: apply pivots and L
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                x.swap(k, p);
            }
            let imax = (k + kl).min(n - 1);
            let xk = x[k];
            for i in (k + 1)..=imax {
                let m = self.data[i * width + (k + kl - i)];
                x[i] -= m * xk;
            }
        }
        // backward: U
        for k in (0..n).rev() {
            let jmax = (k + kuw).min(n - 1);
            let mut acc = x[k];
            for j in (k + 1)..=jmax {
                acc -= self.data[k * width + (j + kl - k)] * x[j];
            }
            x[k] = acc / self.data[k * width + kl];
        }
    }
}
