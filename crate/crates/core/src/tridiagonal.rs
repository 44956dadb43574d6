//! Kernels for real symmetric tridiagonal matrices: Sturm counts,
//! bisection and shifted LU solves. `off` always has one element fewer
//! than `diagonal`.

/// Number of eigenvalues strictly below `lambda`.
///
/// Counts negative pivots of the LDLᵀ factorization of `T − λI`; tiny
/// pivots are replaced by `-pivmin` so the recurrence never divides by zero.
pub fn sturm_count(diagonal: &[f64], off: &[f64], lambda: f64) -> usize {
    let e2max = off.iter().fold(1.0f64, |m, e| m.max(e * e));
    let pivmin = f64::MIN_POSITIVE * e2max;
    let mut count = 0;
    let mut q = 1.0;
    for (i, &d) in diagonal.iter().enumerate() {
        q = if i == 0 { d - lambda } else { (d - lambda) - off[i - 1] * off[i - 1] / q };
        if q.abs() <= pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Gershgorin interval containing every eigenvalue.
pub fn gershgorin_bounds(diagonal: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diagonal.len();
    diagonal.iter().enumerate().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (i, &d)| {
        let radius = off_radius(off, i, n);
        (lo.min(d - radius), hi.max(d + radius))
    })
}

fn off_radius(off: &[f64], i: usize, n: usize) -> f64 {
    let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
    let right = if i + 1 < n { off[i].abs() } else { 0.0 };
    left + right
}

/// Infinity norm.
pub fn max_row_sum(diagonal: &[f64], off: &[f64]) -> f64 {
    let n = diagonal.len();
    diagonal
        .iter()
        .enumerate()
        .fold(0.0f64, |m, (i, d)| m.max(d.abs() + off_radius(off, i, n)))
}

/// Locates the `index`-th smallest eigenvalue (0-based) by bisection on the
/// Sturm count, starting from an interval `[lo, hi]` with
/// `count(lo) <= index < count(hi)`.
pub fn bisect_eigenvalue(
    diagonal: &[f64],
    off: &[f64],
    index: usize,
    mut lo: f64,
    mut hi: f64,
    rel_width: f64,
    abs_width: f64,
) -> (f64, usize) {
    let mut steps = 0;
    while steps < 2048 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if hi - lo <= (rel_width * lo.abs().max(hi.abs())).max(abs_width) {
            break;
        }
        if sturm_count(diagonal, off, mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
        steps += 1;
    }
    (0.5 * (lo + hi), steps)
}

/// LU factorization with partial pivoting of `T − σI`.
#[derive(Debug, Clone)]
pub struct ShiftedLu {
    d: Vec<f64>,
    dl: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    /// Pivots smaller than `pivot_floor` in magnitude are replaced by
    /// `±pivot_floor`, which keeps the solve finite when σ is an eigenvalue.
    pub fn factor(diagonal: &[f64], off: &[f64], shift: f64, pivot_floor: f64) -> Self {
        let n = diagonal.len();
        let mut d: Vec<f64> = diagonal.iter().map(|x| x - shift).collect();
        let mut dl = off.to_vec();
        let mut du = off.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];

        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        for p in &mut d {
            if p.abs() < pivot_floor {
                *p = if *p < 0.0 { -pivot_floor } else { pivot_floor };
            }
        }
        Self { d, dl, du, du2, swapped }
    }

    /// Solves `(T − σI) x = rhs` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= self.dl[i] * b[i];
        }
        if n == 0 {
            return;
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

/// y = T x
pub fn apply(diagonal: &[f64], off: &[f64], x: &[f64]) -> Vec<f64> {
    let n = diagonal.len();
    (0..n)
        .map(|i| {
            let mut y = diagonal[i] * x[i];
            if i > 0 {
                y += off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                y += off[i] * x[i + 1];
            }
            y
        })
        .collect()
}
