//! Real symmetric eigenproblems.
//!
//! Dense matrices go through Householder tridiagonalization followed by
//! implicit-shift QL. Large sparse blocks only need their lowest eigenpair,
//! which a Lanczos recurrence delivers at a fraction of the dense cost.

use crate::error::Error;

/// Square matrix in row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        Self { n, data: rows.concat() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    /// max |A − Aᵀ|.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Symmetric matrix held as its diagonal plus one copy of each off-diagonal pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetric {
    diag: Vec<f64>,
    off: Vec<(usize, usize, f64)>,
}

impl SparseSymmetric {
    /// `off` lists `(row, col, value)` with `row != col`; the mirrored entry is implied.
    pub fn new(diag: Vec<f64>, off: Vec<(usize, usize, f64)>) -> Self {
        debug_assert!(off.iter().all(|&(i, j, _)| i != j && i < diag.len() && j < diag.len()));
        Self { diag, off }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn off_diagonal(&self) -> &[(usize, usize, f64)] {
        &self.off
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.dim();
        let mut m = DenseMatrix::zeros(n);
        for (i, &d) in self.diag.iter().enumerate() {
            m.set(i, i, d);
        }
        for &(i, j, v) in &self.off {
            m.set(i, j, m.get(i, j) + v);
            m.set(j, i, m.get(j, i) + v);
        }
        m
    }

    pub fn frobenius_norm(&self) -> f64 {
        let d: f64 = self.diag.iter().map(|x| x * x).sum();
        let o: f64 = self.off.iter().map(|&(_, _, v)| 2.0 * v * v).sum();
        (d + o).sqrt()
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for ((yi, d), xi) in y.iter_mut().zip(&self.diag).zip(x) {
            *yi = d * xi;
        }
        for &(i, j, v) in &self.off {
            y[i] += v * x[j];
            y[j] += v * x[i];
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.matvec_into(x, &mut y);
        y
    }

    /// ‖Av − λv‖.
    pub fn residual(&self, value: f64, vector: &[f64]) -> f64 {
        let av = self.matvec(vector);
        av.iter().zip(vector).map(|(a, v)| (a - value * v).powi(2)).sum::<f64>().sqrt()
    }
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// Eigenvectors as columns of a row-major `n × n` array.
    vectors: Vec<f64>,
    n: usize,
}

impl SymmetricEigen {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.vectors[i * self.n + k]).collect()
    }
}

const SYMMETRY_TOL: f64 = 1e-12;

/// Full eigen-decomposition of a real symmetric matrix.
///
/// Each eigenvector is normalized and signed so that its largest-magnitude
/// component (first one on ties) is positive.
pub fn eigensolve_symmetric(a: &DenseMatrix) -> Result<SymmetricEigen, Error> {
    let n = a.dim();
    let asym = a.asymmetry();
    if asym > SYMMETRY_TOL * a.frobenius_norm().max(1.0) {
        return Err(Error::NotSymmetric(asym));
    }
    if n == 0 {
        return Ok(SymmetricEigen { values: vec![], vectors: vec![], n });
    }
    // Work on the symmetrized lower triangle.
    let mut v = DenseMatrix::from_fn(n, |i, j| 0.5 * (a.get(i, j) + a.get(j, i))).data;
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    householder_tridiagonalize(n, &mut v, &mut d, &mut e);
    implicit_ql(n, &mut v, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| d[x].total_cmp(&d[y]));
    let values: Vec<f64> = order.iter().map(|&k| d[k]).collect();
    let mut vectors = vec![0.0; n * n];
    for (new, &old) in order.iter().enumerate() {
        let mut col: Vec<f64> = (0..n).map(|i| v[i * n + old]).collect();
        fix_sign(&mut col);
        for i in 0..n {
            vectors[i * n + new] = col[i];
        }
    }
    Ok(SymmetricEigen { values, vectors, n })
}

/// Flips `v` so that its largest-magnitude entry is positive.
pub(crate) fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

// Householder reduction to tridiagonal form (EISPACK tred2). On exit `v`
// holds the accumulated orthogonal transformation, `d` the diagonal and
// `e[1..]` the subdiagonal.
fn householder_tridiagonalize(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    let at = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
                v[at(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[at(j, i)] = f;
                g = e[j] + v[at(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[at(k, j)] * d[k];
                    e[k] += v[at(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[at(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..(n - 1) {
        v[at(n - 1, i)] = v[at(i, i)];
        v[at(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[at(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[at(k, i + 1)] * v[at(k, j)];
                }
                for k in 0..=i {
                    v[at(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[at(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
        v[at(n - 1, j)] = 0.0;
    }
    v[at(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

// Implicit-shift QL on the tridiagonal (EISPACK tql2), rotating `v` along.
fn implicit_ql(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) -> Result<(), Error> {
    const MAX_SWEEPS: usize = 60;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_SWEEPS {
                    return Err(Error::NoConvergence(format!("QL iteration stalled at index {l}")));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let vk1 = v[k * n + i + 1];
                        let vk = v[k * n + i];
                        v[k * n + i + 1] = s * vk + c * vk1;
                        v[k * n + i] = c * vk - s * vk1;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Lowest eigenpair of a sparse symmetric matrix.
#[derive(Debug, Clone)]
pub struct LowestEigen {
    pub value: f64,
    /// Ritz vector, normalized and sign-fixed; present only when requested.
    pub vector: Option<Vec<f64>>,
    /// Residual bound `β_k |s_k|` at exit.
    pub residual_estimate: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Stop once the residual bound falls below `tolerance · ‖A‖_F`.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub want_vector: bool,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { tolerance: 1e-10, max_iterations: 2000, want_vector: false }
    }
}

/// Lanczos recurrence from a uniform start vector.
///
/// The matrices assembled here have non-positive off-diagonal entries, so
/// every ground state has a positive overlap with the uniform vector.
pub fn lanczos_lowest(a: &SparseSymmetric, opts: LanczosOptions) -> Result<LowestEigen, Error> {
    let n = a.dim();
    if n == 0 {
        return Err(Error::InvalidParameters("empty matrix".into()));
    }
    let norm = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut q = vec![1.0 / (n as f64).sqrt(); n];
    let mut q_prev = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut alphas = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let max_iter = opts.max_iterations.min(n).max(1);
    let mut theta = f64::NAN;
    let mut s = Vec::new();
    let mut estimate = f64::INFINITY;

    for k in 0..max_iter {
        if opts.want_vector {
            basis.push(q.clone());
        }
        a.matvec_into(&q, &mut w);
        let beta_prev = betas.last().copied().unwrap_or(0.0);
        for (wi, qp) in w.iter_mut().zip(&q_prev) {
            *wi -= beta_prev * qp;
        }
        let alpha = dot(&w, &q);
        for (wi, qi) in w.iter_mut().zip(&q) {
            *wi -= alpha * qi;
        }
        // one local reorthogonalization pass against the last two vectors
        let c1 = dot(&w, &q);
        let c0 = dot(&w, &q_prev);
        for ((wi, qi), qp) in w.iter_mut().zip(&q).zip(&q_prev) {
            *wi -= c1 * qi + c0 * qp;
        }
        let alpha = alpha + c1;
        alphas.push(alpha);
        let beta = dot(&w, &w).sqrt();
        let breakdown = beta <= 1e-14 * norm;
        let last = k + 1 == max_iter;
        if breakdown || last || k % 8 == 7 || k < 2 {
            theta = tridiagonal_lowest(&alphas, &betas);
            s = tridiagonal_vector(&alphas, &betas, theta);
            estimate = if breakdown { 0.0 } else { beta * s.last().copied().unwrap_or(1.0).abs() };
            if breakdown || estimate <= opts.tolerance * norm {
                break;
            }
        }
        if last {
            break;
        }
        betas.push(beta);
        std::mem::swap(&mut q_prev, &mut q);
        for (qi, wi) in q.iter_mut().zip(&w) {
            *qi = wi / beta;
        }
    }
    if estimate > opts.tolerance * norm {
        return Err(Error::NoConvergence(format!(
            "Lanczos residual {estimate:.3e} after {} steps (dimension {n})",
            alphas.len()
        )));
    }
    let vector = opts.want_vector.then(|| {
        let mut y = vec![0.0; n];
        for (coef, qk) in s.iter().zip(&basis) {
            for (yi, qi) in y.iter_mut().zip(qk) {
                *yi += coef * qi;
            }
        }
        let len = dot(&y, &y).sqrt();
        y.iter_mut().for_each(|x| *x /= len);
        fix_sign(&mut y);
        y
    });
    Ok(LowestEigen { value: theta, vector, residual_estimate: estimate, iterations: alphas.len() })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Number of eigenvalues of the tridiagonal `(alpha, beta)` below `x`.
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for (i, &a) in alpha.iter().enumerate() {
        let b2 = if i == 0 { 0.0 } else { beta[i - 1] * beta[i - 1] };
        q = if i == 0 { a - x } else { a - x - b2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (a.abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest eigenvalue of a symmetric tridiagonal matrix by bisection.
pub(crate) fn tridiagonal_lowest(alpha: &[f64], beta: &[f64]) -> f64 {
    let k = alpha.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..k {
        let radius = beta.get(i).map_or(0.0, |b| b.abs()) + if i > 0 { beta[i - 1].abs() } else { 0.0 };
        lo = lo.min(alpha[i] - radius);
        hi = hi.max(alpha[i] + radius);
    }
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    while hi - lo > 2.0 * f64::EPSILON * scale {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(alpha, &beta[..k - 1], mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Normalized eigenvector of the tridiagonal for an accurate eigenvalue, by inverse iteration.
pub(crate) fn tridiagonal_vector(alpha: &[f64], beta: &[f64], theta: f64) -> Vec<f64> {
    let k = alpha.len();
    if k == 1 {
        return vec![1.0];
    }
    let scale = alpha.iter().map(|a| a.abs()).chain(beta.iter().map(|b| b.abs())).fold(0.0, f64::max);
    let tiny = f64::EPSILON * scale.max(f64::MIN_POSITIVE);
    // LU with partial pivoting of T − θI (LAPACK dgttrf layout).
    let mut dd: Vec<f64> = alpha.iter().map(|a| a - theta).collect();
    let mut dl: Vec<f64> = beta[..k - 1].to_vec();
    let mut du: Vec<f64> = beta[..k - 1].to_vec();
    let mut du2 = vec![0.0; k.saturating_sub(2)];
    let mut swapped = vec![false; k - 1];
    for i in 0..k - 1 {
        if dd[i].abs() >= dl[i].abs() {
            if dd[i] == 0.0 {
                dd[i] = tiny;
            }
            let fact = dl[i] / dd[i];
            dl[i] = fact;
            dd[i + 1] -= fact * du[i];
        } else {
            let fact = dd[i] / dl[i];
            dd[i] = dl[i];
            dl[i] = fact;
            let temp = du[i];
            du[i] = dd[i + 1];
            dd[i + 1] = temp - fact * dd[i + 1];
            if i + 2 < k {
                du2[i] = du[i + 1];
                du[i + 1] = -fact * du[i + 1];
            }
            swapped[i] = true;
        }
    }
    if dd[k - 1] == 0.0 {
        dd[k - 1] = tiny;
    }
    let mut x = vec![1.0 / (k as f64).sqrt(); k];
    for _ in 0..3 {
        for i in 0..k - 1 {
            if swapped[i] {
                let t = x[i];
                x[i] = x[i + 1];
                x[i + 1] = t - dl[i] * x[i];
            } else {
                x[i + 1] -= dl[i] * x[i];
            }
        }
        x[k - 1] /= dd[k - 1];
        x[k - 2] = (x[k - 2] - du[k - 2] * x[k - 1]) / dd[k - 2];
        for i in (0..k.saturating_sub(2)).rev() {
            x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / dd[i];
        }
        let len = dot(&x, &x).sqrt();
        if !len.is_finite() || len == 0.0 {
            break;
        }
        x.iter_mut().for_each(|v| *v /= len);
    }
    x
}
