//! Method of Moving Asymptotes for the bound formulation.
//!
//! The solved problem is
//!
//! ```text
//!   minimize    z
//!   subject to  f_i(x) − a_i·z ≤ 0,   i = 1..m
//!               x ∈ [xmin, xmax] ∩ move-limit window
//! ```
//!
//! Each constraint is replaced by the separable convex MMA approximation
//! around the current iterate using per-variable moving asymptotes; the
//! subproblem is solved by a primal-dual interior-point method on its KKT
//! system. Elastic variables with a large linear penalty keep the subproblem
//! feasible, so an update never hard-fails. Everything is deterministic.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MmaError {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Tuning constants. The defaults are the widely used Svanberg values; the
/// move limit is the only parameter the surrounding optimization prescribes.
#[derive(Clone, Copy, Debug)]
pub struct MmaOptions {
    /// Move limit as a fraction of the box range.
    pub move_limit: f64,
    /// Initial asymptote spread as a fraction of the box range.
    pub asy_init: f64,
    /// Asymptote expansion factor on monotone progress.
    pub asy_incr: f64,
    /// Asymptote contraction factor on oscillation.
    pub asy_decr: f64,
    /// Bound-window fraction kept away from the asymptotes.
    pub albefa: f64,
    /// Convexity regularization added to the approximations.
    pub raa0: f64,
    /// Elastic (slack) penalty weight.
    pub elastic_c: f64,
    /// Quadratic elastic weight.
    pub elastic_d: f64,
    /// Interior-point relaxation floor; the KKT residual of the returned
    /// subproblem solution is driven below roughly this value.
    pub kkt_tol: f64,
}

impl Default for MmaOptions {
    fn default() -> Self {
        MmaOptions {
            move_limit: 0.25,
            asy_init: 0.5,
            asy_incr: 1.2,
            asy_decr: 0.7,
            albefa: 0.1,
            raa0: 1e-5,
            elastic_c: 1e4,
            elastic_d: 1.0,
            kkt_tol: 1e-10,
        }
    }
}

/// Outcome of one subproblem solve.
#[derive(Clone, Debug)]
pub struct SubproblemResult {
    pub x_new: Vec<f64>,
    /// Bound variable value at the subproblem optimum.
    pub z: f64,
    /// Elastic slack per constraint (nonzero only when the approximated
    /// constraints could not be met exactly).
    pub elastic: Vec<f64>,
    /// Dual multipliers per constraint.
    pub lambda: Vec<f64>,
    /// Approximated-constraint values g_i(x_new) − a_i z − y_i (≤ 0 up to
    /// the subproblem tolerance).
    pub constraint_residual: Vec<f64>,
    /// Infinity norm of the relaxed KKT residual at termination.
    pub kkt_residual: f64,
}

impl SubproblemResult {
    /// A constraint counts as active when its multiplier carries weight.
    pub fn active(&self) -> Vec<bool> {
        self.lambda.iter().map(|&l| l > 1e-6).collect()
    }
}

/// Optimizer state: moving asymptotes and the two previous iterates.
#[derive(Clone, Debug)]
pub struct MmaState {
    n: usize,
    m: usize,
    /// Linear z-coefficient per constraint (`a_i`).
    a: Vec<f64>,
    opts: MmaOptions,
    iter: usize,
    low: Vec<f64>,
    upp: Vec<f64>,
    xold1: Vec<f64>,
    xold2: Vec<f64>,
}

impl MmaState {
    pub fn new(n: usize, a: Vec<f64>, opts: MmaOptions) -> Self {
        let m = a.len();
        MmaState {
            n,
            m,
            a,
            opts,
            iter: 0,
            low: vec![0.0; n],
            upp: vec![0.0; n],
            xold1: vec![0.0; n],
            xold2: vec![0.0; n],
        }
    }

    /// Clear all history, as for a fresh run. Idempotent.
    pub fn reset(&mut self) {
        self.iter = 0;
        self.low.iter_mut().for_each(|v| *v = 0.0);
        self.upp.iter_mut().for_each(|v| *v = 0.0);
        self.xold1.iter_mut().for_each(|v| *v = 0.0);
        self.xold2.iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn iteration(&self) -> usize {
        self.iter
    }

    pub fn asymptotes(&self) -> (&[f64], &[f64]) {
        (&self.low, &self.upp)
    }

    /// One MMA update. `fval[i]` and `dfdx[i]` are the value and gradient of
    /// constraint i at `x` (the `− a_i z` part is handled internally).
    pub fn update(
        &mut self,
        x: &[f64],
        fval: &[f64],
        dfdx: &[Vec<f64>],
        xmin: &[f64],
        xmax: &[f64],
    ) -> Result<SubproblemResult, MmaError> {
        let (n, m) = (self.n, self.m);
        if x.len() != n || xmin.len() != n || xmax.len() != n {
            return Err(MmaError::DimensionMismatch(format!(
                "expected {n} variables, got {}",
                x.len()
            )));
        }
        if fval.len() != m || dfdx.len() != m {
            return Err(MmaError::DimensionMismatch(format!(
                "expected {m} constraints, got {}",
                fval.len()
            )));
        }
        for row in dfdx {
            if row.len() != n {
                return Err(MmaError::DimensionMismatch("gradient row length".into()));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(MmaError::NonFinite("constraint gradient"));
            }
        }
        if fval.iter().any(|v| !v.is_finite()) {
            return Err(MmaError::NonFinite("constraint value"));
        }
        for j in 0..n {
            if !(xmax[j] > xmin[j]) {
                return Err(MmaError::DimensionMismatch(format!(
                    "degenerate box for variable {j}: [{}, {}]",
                    xmin[j], xmax[j]
                )));
            }
        }

        self.iter += 1;
        let o = &self.opts;

        // Asymptote update: spread on the first two iterations, then the
        // oscillation heuristic (expand on monotone movement, contract on
        // sign flips).
        if self.iter <= 2 {
            for j in 0..n {
                let range = xmax[j] - xmin[j];
                self.low[j] = x[j] - o.asy_init * range;
                self.upp[j] = x[j] + o.asy_init * range;
            }
        } else {
            for j in 0..n {
                let range = (xmax[j] - xmin[j]).max(1e-5);
                let trend = (x[j] - self.xold1[j]) * (self.xold1[j] - self.xold2[j]);
                let factor = if trend > 0.0 {
                    o.asy_incr
                } else if trend < 0.0 {
                    o.asy_decr
                } else {
                    1.0
                };
                self.low[j] = x[j] - factor * (self.xold1[j] - self.low[j]);
                self.upp[j] = x[j] + factor * (self.upp[j] - self.xold1[j]);
                self.low[j] = self.low[j].clamp(x[j] - 10.0 * range, x[j] - 0.01 * range);
                self.upp[j] = self.upp[j].clamp(x[j] + 0.01 * range, x[j] + 10.0 * range);
            }
        }
        std::mem::swap(&mut self.xold2, &mut self.xold1);
        self.xold1.clear();
        self.xold1.extend_from_slice(x);

        // Subproblem bounds: box ∩ asymptote margin ∩ move limits.
        let mut alfa = vec![0.0; n];
        let mut beta = vec![0.0; n];
        for j in 0..n {
            let range = xmax[j] - xmin[j];
            alfa[j] = xmin[j]
                .max(self.low[j] + o.albefa * (x[j] - self.low[j]))
                .max(x[j] - o.move_limit * range);
            beta[j] = xmax[j]
                .min(self.upp[j] - o.albefa * (self.upp[j] - x[j]))
                .min(x[j] + o.move_limit * range);
        }

        // Separable approximation coefficients. The objective is the bound
        // variable alone, so p0/q0 carry only the convexity floor.
        let mut p0 = vec![0.0; n];
        let mut q0 = vec![0.0; n];
        let mut p = vec![vec![0.0; n]; m];
        let mut q = vec![vec![0.0; n]; m];
        let mut b = vec![0.0; m];
        for j in 0..n {
            let ux = self.upp[j] - x[j];
            let xl = x[j] - self.low[j];
            let floor = o.raa0 / (xmax[j] - xmin[j]).max(1e-5);
            p0[j] = floor * ux * ux;
            q0[j] = floor * xl * xl;
        }
        for i in 0..m {
            for j in 0..n {
                let ux = self.upp[j] - x[j];
                let xl = x[j] - self.low[j];
                let dpos = dfdx[i][j].max(0.0);
                let dneg = (-dfdx[i][j]).max(0.0);
                let mix = 0.001 * (dpos + dneg) + o.raa0 / (xmax[j] - xmin[j]).max(1e-5);
                p[i][j] = (1.001 * dpos + 0.001 * dneg + mix) * ux * ux;
                q[i][j] = (0.001 * dpos + 1.001 * dneg + mix) * xl * xl;
            }
            let g_at_x: f64 = (0..n)
                .map(|j| p[i][j] / (self.upp[j] - x[j]) + q[i][j] / (x[j] - self.low[j]))
                .sum();
            b[i] = g_at_x - fval[i];
        }

        let sub = SubproblemData {
            low: &self.low,
            upp: &self.upp,
            alfa: &alfa,
            beta: &beta,
            p0: &p0,
            q0: &q0,
            p: &p,
            q: &q,
            b: &b,
            a: &self.a,
            c: o.elastic_c,
            d: o.elastic_d,
        };
        Ok(solve_subproblem(&sub, o.kkt_tol))
    }
}

struct SubproblemData<'a> {
    low: &'a [f64],
    upp: &'a [f64],
    alfa: &'a [f64],
    beta: &'a [f64],
    p0: &'a [f64],
    q0: &'a [f64],
    p: &'a [Vec<f64>],
    q: &'a [Vec<f64>],
    b: &'a [f64],
    a: &'a [f64],
    c: f64,
    d: f64,
}

/// Primal-dual interior-point solve of the MMA subproblem, following the
/// standard relaxed-KKT continuation (ε driven from 1 to `kkt_tol`).
fn solve_subproblem(s: &SubproblemData, kkt_tol: f64) -> SubproblemResult {
    let n = s.alfa.len();
    let m = s.b.len();

    let mut x: Vec<f64> = (0..n).map(|j| 0.5 * (s.alfa[j] + s.beta[j])).collect();
    let mut y = vec![1.0; m];
    let mut z = 1.0;
    let mut lam = vec![1.0; m];
    let mut xsi: Vec<f64> =
        (0..n).map(|j| (1.0 / (x[j] - s.alfa[j]).max(1e-12)).max(1.0)).collect();
    let mut eta: Vec<f64> =
        (0..n).map(|j| (1.0 / (s.beta[j] - x[j]).max(1e-12)).max(1.0)).collect();
    let mut mu = vec![(0.5 * s.c).max(1.0); m];
    let mut zet = 1.0;
    let mut svar = vec![1.0; m];

    let mut residumax = f64::INFINITY;
    let mut epsi = 1.0;
    while epsi > kkt_tol {
        let (mut resnorm, mut resmax) = residual_norms(
            s, epsi, &x, &y, z, &lam, &xsi, &eta, &mu, zet, &svar,
        );
        let mut inner = 0;
        while resmax > 0.9 * epsi && inner < 200 {
            inner += 1;
            // Newton direction on the relaxed KKT system, condensed onto
            // (x or λ, z) depending on which block is smaller.
            let mut ux1 = vec![0.0; n];
            let mut xl1 = vec![0.0; n];
            let mut plam = vec![0.0; n];
            let mut qlam = vec![0.0; n];
            for j in 0..n {
                ux1[j] = s.upp[j] - x[j];
                xl1[j] = x[j] - s.low[j];
                plam[j] = s.p0[j];
                qlam[j] = s.q0[j];
                for i in 0..m {
                    plam[j] += lam[i] * s.p[i][j];
                    qlam[j] += lam[i] * s.q[i][j];
                }
            }
            let gvec: Vec<f64> = (0..m)
                .map(|i| {
                    (0..n).map(|j| s.p[i][j] / ux1[j] + s.q[i][j] / xl1[j]).sum::<f64>()
                })
                .collect();
            // GG[i][j] = ∂g_i/∂x_j
            let gg: Vec<Vec<f64>> = (0..m)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            s.p[i][j] / (ux1[j] * ux1[j]) - s.q[i][j] / (xl1[j] * xl1[j])
                        })
                        .collect()
                })
                .collect();
            let delx: Vec<f64> = (0..n)
                .map(|j| {
                    plam[j] / (ux1[j] * ux1[j]) - qlam[j] / (xl1[j] * xl1[j])
                        - epsi / (x[j] - s.alfa[j])
                        + epsi / (s.beta[j] - x[j])
                })
                .collect();
            let dely: Vec<f64> =
                (0..m).map(|i| s.c + s.d * y[i] - lam[i] - epsi / y[i]).collect();
            let delz =
                1.0 - (0..m).map(|i| s.a[i] * lam[i]).sum::<f64>() - epsi / z;
            let dellam: Vec<f64> = (0..m)
                .map(|i| gvec[i] - s.a[i] * z - y[i] - s.b[i] + epsi / lam[i])
                .collect();
            let diagx: Vec<f64> = (0..n)
                .map(|j| {
                    2.0 * (plam[j] / (ux1[j] * ux1[j] * ux1[j])
                        + qlam[j] / (xl1[j] * xl1[j] * xl1[j]))
                        + xsi[j] / (x[j] - s.alfa[j])
                        + eta[j] / (s.beta[j] - x[j])
                })
                .collect();
            let diagy: Vec<f64> = (0..m).map(|i| s.d + mu[i] / y[i]).collect();
            let diaglamyi: Vec<f64> =
                (0..m).map(|i| svar[i] / lam[i] + 1.0 / diagy[i]).collect();

            let (dx, dy, dz, dlam): (Vec<f64>, Vec<f64>, f64, Vec<f64>);
            if m < n {
                // Solve the (m+1)×(m+1) system in (dλ, dz).
                let mut mat = vec![vec![0.0; m + 1]; m + 1];
                let mut rhs = vec![0.0; m + 1];
                for i in 0..m {
                    for k in 0..m {
                        let mut dot = 0.0;
                        for j in 0..n {
                            dot += gg[i][j] * gg[k][j] / diagx[j];
                        }
                        mat[i][k] = dot + if i == k { diaglamyi[i] } else { 0.0 };
                    }
                    mat[i][m] = s.a[i];
                    mat[m][i] = s.a[i];
                    let gdx: f64 = (0..n).map(|j| gg[i][j] * delx[j] / diagx[j]).sum();
                    rhs[i] = dellam[i] + dely[i] / diagy[i] - gdx;
                }
                mat[m][m] = -zet / z;
                rhs[m] = delz;
                let sol = solve_dense_small(&mut mat, &mut rhs);
                dlam = sol[..m].to_vec();
                dz = sol[m];
                dx = (0..n)
                    .map(|j| {
                        let glam: f64 = (0..m).map(|i| gg[i][j] * dlam[i]).sum();
                        -(delx[j] + glam) / diagx[j]
                    })
                    .collect();
            } else {
                // Few variables: solve the (n+1)×(n+1) system in (dx, dz).
                let dellamyi: Vec<f64> =
                    (0..m).map(|i| dellam[i] + dely[i] / diagy[i]).collect();
                let mut mat = vec![vec![0.0; n + 1]; n + 1];
                let mut rhs = vec![0.0; n + 1];
                for j in 0..n {
                    for k in 0..n {
                        let mut dot = 0.0;
                        for i in 0..m {
                            dot += gg[i][j] * gg[i][k] / diaglamyi[i];
                        }
                        mat[j][k] = dot + if j == k { diagx[j] } else { 0.0 };
                    }
                    let axz: f64 = (0..m).map(|i| gg[i][j] * s.a[i] / diaglamyi[i]).sum();
                    mat[j][n] = -axz;
                    mat[n][j] = -axz;
                    let gdl: f64 = (0..m).map(|i| gg[i][j] * dellamyi[i] / diaglamyi[i]).sum();
                    rhs[j] = -(delx[j] + gdl);
                }
                mat[n][n] =
                    zet / z + (0..m).map(|i| s.a[i] * s.a[i] / diaglamyi[i]).sum::<f64>();
                rhs[n] = -(delz - (0..m).map(|i| s.a[i] * dellamyi[i] / diaglamyi[i]).sum::<f64>());
                let sol = solve_dense_small(&mut mat, &mut rhs);
                dx = sol[..n].to_vec();
                dz = sol[n];
                dlam = (0..m)
                    .map(|i| {
                        let gdx: f64 = (0..n).map(|j| gg[i][j] * dx[j]).sum();
                        (gdx - s.a[i] * dz + dellamyi[i]) / diaglamyi[i]
                    })
                    .collect();
            }
            dy = (0..m).map(|i| -dely[i] / diagy[i] + dlam[i] / diagy[i]).collect();
            let dxsi: Vec<f64> = (0..n)
                .map(|j| {
                    -xsi[j] + epsi / (x[j] - s.alfa[j]) - xsi[j] * dx[j] / (x[j] - s.alfa[j])
                })
                .collect();
            let deta: Vec<f64> = (0..n)
                .map(|j| {
                    -eta[j] + epsi / (s.beta[j] - x[j]) + eta[j] * dx[j] / (s.beta[j] - x[j])
                })
                .collect();
            let dmu: Vec<f64> =
                (0..m).map(|i| -mu[i] + epsi / y[i] - mu[i] * dy[i] / y[i]).collect();
            let dzet = -zet + epsi / z - zet * dz / z;
            let ds: Vec<f64> =
                (0..m).map(|i| -svar[i] + epsi / lam[i] - svar[i] * dlam[i] / lam[i]).collect();

            // Fraction-to-boundary step.
            let mut stminv: f64 = 1.0;
            let mut track = |d: f64, v: f64| {
                stminv = stminv.max(-1.01 * d / v);
            };
            for i in 0..m {
                track(dy[i], y[i]);
                track(dlam[i], lam[i]);
                track(dmu[i], mu[i]);
                track(ds[i], svar[i]);
            }
            for j in 0..n {
                track(dxsi[j], xsi[j]);
                track(deta[j], eta[j]);
                track(dx[j], x[j] - s.alfa[j]);
                track(-dx[j], s.beta[j] - x[j]);
            }
            track(dz, z);
            track(dzet, zet);
            let mut steg = 1.0 / stminv;

            let (xo, yo, zo, lamo, xsio, etao, muo, zeto, so) = (
                x.clone(),
                y.clone(),
                z,
                lam.clone(),
                xsi.clone(),
                eta.clone(),
                mu.clone(),
                zet,
                svar.clone(),
            );
            let mut backtracks = 0;
            loop {
                for j in 0..n {
                    x[j] = xo[j] + steg * dx[j];
                    xsi[j] = xsio[j] + steg * dxsi[j];
                    eta[j] = etao[j] + steg * deta[j];
                }
                for i in 0..m {
                    y[i] = yo[i] + steg * dy[i];
                    lam[i] = lamo[i] + steg * dlam[i];
                    mu[i] = muo[i] + steg * dmu[i];
                    svar[i] = so[i] + steg * ds[i];
                }
                z = zo + steg * dz;
                zet = zeto + steg * dzet;
                let (newnorm, newmax) = residual_norms(
                    s, epsi, &x, &y, z, &lam, &xsi, &eta, &mu, zet, &svar,
                );
                if newnorm < resnorm || backtracks >= 50 {
                    resnorm = newnorm;
                    resmax = newmax;
                    break;
                }
                steg *= 0.5;
                backtracks += 1;
            }
        }
        residumax = resmax;
        epsi *= 0.1;
    }

    let constraint_residual: Vec<f64> = (0..m)
        .map(|i| {
            let g: f64 = (0..n)
                .map(|j| s.p[i][j] / (s.upp[j] - x[j]) + s.q[i][j] / (x[j] - s.low[j]))
                .sum();
            g - s.a[i] * z - y[i] - s.b[i]
        })
        .collect();

    SubproblemResult {
        x_new: x,
        z,
        elastic: y,
        lambda: lam,
        constraint_residual,
        kkt_residual: residumax,
    }
}

#[allow(clippy::too_many_arguments)]
fn residual_norms(
    s: &SubproblemData,
    epsi: f64,
    x: &[f64],
    y: &[f64],
    z: f64,
    lam: &[f64],
    xsi: &[f64],
    eta: &[f64],
    mu: &[f64],
    zet: f64,
    svar: &[f64],
) -> (f64, f64) {
    let n = x.len();
    let m = y.len();
    let mut sq = 0.0f64;
    let mut mx = 0.0f64;
    let mut push = |r: f64| {
        sq += r * r;
        mx = mx.max(r.abs());
    };
    for j in 0..n {
        let ux = s.upp[j] - x[j];
        let xl = x[j] - s.low[j];
        let mut pl = s.p0[j];
        let mut ql = s.q0[j];
        for i in 0..m {
            pl += lam[i] * s.p[i][j];
            ql += lam[i] * s.q[i][j];
        }
        push(pl / (ux * ux) - ql / (xl * xl) - xsi[j] + eta[j]);
        push(xsi[j] * (x[j] - s.alfa[j]) - epsi);
        push(eta[j] * (s.beta[j] - x[j]) - epsi);
    }
    let mut alam = 0.0;
    for i in 0..m {
        let g: f64 = (0..n)
            .map(|j| s.p[i][j] / (s.upp[j] - x[j]) + s.q[i][j] / (x[j] - s.low[j]))
            .sum();
        push(s.c + s.d * y[i] - mu[i] - lam[i]);
        push(g - s.a[i] * z - y[i] + svar[i] - s.b[i]);
        push(mu[i] * y[i] - epsi);
        push(lam[i] * svar[i] - epsi);
        alam += s.a[i] * lam[i];
    }
    push(1.0 - zet - alam);
    push(zet * z - epsi);
    (sq.sqrt(), mx)
}

/// Gaussian elimination with partial pivoting for the small condensed
/// systems ((m+1) or (n+1) square).
fn solve_dense_small(mat: &mut [Vec<f64>], rhs: &mut [f64]) -> Vec<f64> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&a, &b| mat[a][col].abs().total_cmp(&mat[b][col].abs()))
            .unwrap();
        mat.swap(col, piv);
        rhs.swap(col, piv);
        let d = mat[col][col];
        for row in (col + 1)..n {
            let f = mat[row][col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                mat[row][k] -= f * mat[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in (row + 1)..n {
            acc -= mat[row][k] * x[k];
        }
        x[row] = acc / mat[row][row];
    }
    x
}
