//! Dense complex linear algebra behind the state/adjoint solves.
//!
//! A thin wrapper around a partially pivoted LU factorization. One
//! factorization serves the state solve and both adjoint solves of an
//! optimization iteration; a thread-local counter lets tests assert that
//! reuse. The system matrix is complex symmetric (Galerkin reciprocity), so
//! transpose systems use `solve_transpose` on the same factorization.

use std::cell::Cell;

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::{Col, ColRef, Mat, MatRef, Par};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("matrix is numerically singular (pivot ratio {pivot_ratio:.3e})")]
    Singular { pivot_ratio: f64 },
    #[error("matrix is ill-conditioned (1-norm condition estimate {cond:.3e})")]
    IllConditioned { cond: f64 },
    #[error("solve produced non-finite values")]
    NonFinite,
}

thread_local! {
    static FACTOR_COUNT: Cell<usize> = const { Cell::new(0) };
}

/// Number of LU factorizations performed on this thread.
pub fn factorization_count() -> usize {
    FACTOR_COUNT.with(|c| c.get())
}

/// Configure the worker-thread count used by dense kernels (1 = serial).
pub fn set_threads(threads: usize) {
    if threads <= 1 {
        faer::set_global_parallelism(Par::Seq);
    } else {
        faer::set_global_parallelism(Par::rayon(threads));
    }
}

/// A factorized dense complex matrix.
pub struct ComplexLu {
    lu: PartialPivLu<Complex64>,
    n: usize,
}

impl ComplexLu {
    /// Factor `a`, rejecting numerically singular or extremely
    /// ill-conditioned matrices (1-norm condition estimate above 1e14).
    pub fn factor(a: MatRef<'_, Complex64>) -> Result<Self, SolveError> {
        assert_eq!(a.nrows(), a.ncols(), "square matrix required");
        let n = a.nrows();
        FACTOR_COUNT.with(|c| c.set(c.get() + 1));
        let lu = a.partial_piv_lu();

        // Pivot-ratio singularity screen.
        let diag = lu.U();
        let mut dmin = f64::INFINITY;
        let mut dmax = 0.0f64;
        for i in 0..n {
            let d = diag[(i, i)].norm();
            dmin = dmin.min(d);
            dmax = dmax.max(d);
        }
        if !(dmin > 0.0) || !dmax.is_finite() {
            return Err(SolveError::Singular { pivot_ratio: 0.0 });
        }
        let this = ComplexLu { lu, n };
        let cond = this.condition_estimate(a);
        if cond > 1e14 {
            return Err(SolveError::IllConditioned { cond });
        }
        Ok(this)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: ColRef<'_, Complex64>) -> Col<Complex64> {
        let mut rhs = Mat::<Complex64>::zeros(self.n, 1);
        for i in 0..self.n {
            rhs[(i, 0)] = b[i];
        }
        self.lu.solve_in_place(rhs.as_mut());
        Col::from_fn(self.n, |i| rhs[(i, 0)])
    }

    /// Solve `Aᵀ x = b` with the same factorization.
    pub fn solve_transpose(&self, b: ColRef<'_, Complex64>) -> Col<Complex64> {
        let mut rhs = Mat::<Complex64>::zeros(self.n, 1);
        for i in 0..self.n {
            rhs[(i, 0)] = b[i];
        }
        self.lu.solve_transpose_in_place(rhs.as_mut());
        Col::from_fn(self.n, |i| rhs[(i, 0)])
    }

    /// Hager-style 1-norm estimate of cond₁(A) = ‖A‖₁‖A⁻¹‖₁.
    fn condition_estimate(&self, a: MatRef<'_, Complex64>) -> f64 {
        let n = self.n;
        let norm_a = (0..n)
            .map(|j| (0..n).map(|i| a[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max);

        let mut x = Col::<Complex64>::from_fn(n, |_| Complex64::new(1.0 / n as f64, 0.0));
        let mut est = 0.0f64;
        for _ in 0..5 {
            let y = self.solve(x.as_ref());
            let y1: f64 = (0..n).map(|i| y[i].norm()).sum();
            if y1 <= est {
                break;
            }
            est = y1;
            let xi = Col::<Complex64>::from_fn(n, |i| {
                let v = y[i];
                if v.norm() > 0.0 {
                    v / v.norm()
                } else {
                    Complex64::new(1.0, 0.0)
                }
            });
            let z = self.solve_transpose(xi.as_ref());
            let (mut jmax, mut zmax) = (0usize, 0.0f64);
            for i in 0..n {
                if z[i].norm() > zmax {
                    zmax = z[i].norm();
                    jmax = i;
                }
            }
            let zx: f64 = (0..n).map(|i| (z[i].conj() * x[i]).re).sum();
            if zmax <= zx.abs() {
                break;
            }
            x = Col::from_fn(n, |i| {
                if i == jmax {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
        }
        norm_a * est
    }
}

/// Relative residual ‖A x − b‖₂ / ‖b‖₂.
pub fn relative_residual(
    a: MatRef<'_, Complex64>,
    x: ColRef<'_, Complex64>,
    b: ColRef<'_, Complex64>,
) -> f64 {
    let n = a.nrows();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        let mut ax = Complex64::new(0.0, 0.0);
        for j in 0..n {
            ax += a[(i, j)] * x[j];
        }
        num += (ax - b[i]).norm_sqr();
        den += b[i].norm_sqr();
    }
    (num / den).sqrt()
}

/// `Re{xᴴ M x}` for a real matrix M.
pub fn real_quadratic_form(m: MatRef<'_, f64>, x: ColRef<'_, Complex64>) -> f64 {
    let n = m.nrows();
    let mut acc = 0.0;
    for j in 0..n {
        let xj = x[j];
        let mut col = Complex64::new(0.0, 0.0);
        for i in 0..n {
            col += x[i].conj() * m[(i, j)];
        }
        acc += (col * xj).re;
    }
    acc
}
