//! Minimum-norm least squares via Householder QR with column pivoting.
//!
//! Full-rank systems are solved from `R z = Qᵀ b`. Rank-deficient ones use a
//! complete orthogonal decomposition: the leading `r × k` block `[R11 R12]`
//! is factored again from the right (`[R11 R12]ᵀ = Z L`), which yields the
//! minimum-norm solution among all least-squares minimizers.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares<T> {
    pub solution: Vec<T>,
    pub rank: usize,
}

struct Reflector<T> {
    v: Vec<T>,
    beta: T,
}

impl<T: Real> Reflector<T> {
    /// Householder reflector mapping `x` onto `alpha e_1`. Returns `None` for
    /// a zero vector.
    fn new(x: &[T]) -> Option<(Self, T)> {
        let norm = x.iter().map(|&v| v.pow2()).sum::<T>().sqrt();
        if norm == T::zero() {
            return None;
        }
        let alpha = if x[0] > T::zero() { -norm } else { norm };
        let mut v = x.to_vec();
        v[0] = v[0] - alpha;
        let vv: T = v.iter().map(|&a| a.pow2()).sum();
        let beta = if vv == T::zero() {
            T::zero()
        } else {
            T::lit(2.0) / vv
        };
        Some((Reflector { v, beta }, alpha))
    }

    /// `y ← (I - β v vᵀ) y` on the trailing slice starting at `offset`.
    fn apply(&self, y: &mut [T], offset: usize) {
        let tail = &mut y[offset..offset + self.v.len()];
        let dot: T = self.v.iter().zip(tail.iter()).map(|(&a, &b)| a * b).sum();
        let s = self.beta * dot;
        for (t, &vi) in tail.iter_mut().zip(&self.v) {
            *t = *t - s * vi;
        }
    }
}

/// Solves `min ‖A x - b‖` with the smallest `‖x‖` among minimizers.
pub fn least_squares<T: Real>(a: ArrayView2<'_, T>, b: ArrayView1<'_, T>) -> LeastSquares<T> {
    let (n, k) = a.dim();
    assert_eq!(b.len(), n, "right-hand side length must match rows");
    if k == 0 {
        return LeastSquares {
            solution: Vec::new(),
            rank: 0,
        };
    }
    // Column-major working copy.
    let mut cols: Vec<Vec<T>> = (0..k).map(|j| a.column(j).to_vec()).collect();
    let mut rhs = b.to_vec();
    let mut perm: Vec<usize> = (0..k).collect();
    let steps = n.min(k);
    let mut diag = Vec::with_capacity(steps);

    for j in 0..steps {
        let (pivot, _) = (j..k)
            .map(|c| (c, cols[c][j..].iter().map(|&v| v.pow2()).sum::<T>()))
            .fold((j, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
        cols.swap(j, pivot);
        perm.swap(j, pivot);
        let Some((h, alpha)) = Reflector::new(&cols[j][j..]) else {
            break;
        };
        cols[j][j] = alpha;
        for v in cols[j][j + 1..].iter_mut() {
            *v = T::zero();
        }
        for c in cols.iter_mut().skip(j + 1) {
            h.apply(c, j);
        }
        h.apply(&mut rhs, j);
        diag.push(alpha.abs());
    }

    let tol = match diag.first() {
        Some(&d0) => T::from_count(n.max(k)) * T::epsilon() * d0,
        None => T::zero(),
    };
    let rank = diag.iter().take_while(|&&d| d > tol).count();
    let r = |i: usize, j: usize| cols[j][i];

    let mut z = vec![T::zero(); k];
    if rank == k {
        for i in (0..k).rev() {
            let s: T = ((i + 1)..k).map(|j| r(i, j) * z[j]).sum();
            z[i] = (rhs[i] - s) / r(i, i);
        }
    } else if rank > 0 {
        // Rows of [R11 R12] become columns of the k × rank matrix Tᵀ.
        let mut tt: Vec<Vec<T>> = (0..rank)
            .map(|i| (0..k).map(|j| if j >= i { r(i, j) } else { T::zero() }).collect())
            .collect();
        let mut reflectors = Vec::with_capacity(rank);
        for i in 0..rank {
            let (h, alpha) = Reflector::new(&tt[i][i..]).expect("rank column is non-zero");
            tt[i][i] = alpha;
            for v in tt[i][i + 1..].iter_mut() {
                *v = T::zero();
            }
            for c in tt.iter_mut().skip(i + 1) {
                h.apply(c, i);
            }
            reflectors.push(h);
        }
        // Tᵀ = Z L with L upper triangular (stored column-wise in tt), so
        // T = Lᵀ Zᵀ. Solve Lᵀ u = c by forward substitution, then z = Z [u; 0].
        for i in 0..rank {
            let s: T = (0..i).map(|j| tt[i][j] * z[j]).sum();
            z[i] = (rhs[i] - s) / tt[i][i];
        }
        for (i, h) in reflectors.iter().enumerate().rev() {
            h.apply(&mut z, i);
        }
    }

    let mut solution = vec![T::zero(); k];
    for (pos, &col) in perm.iter().enumerate() {
        solution[col] = z[pos];
    }
    LeastSquares { solution, rank }
}

/// `b - A x`.
pub fn residual<T: Real>(a: ArrayView2<'_, T>, x: &[T], b: ArrayView1<'_, T>) -> Array1<T> {
    let mut r = b.to_owned();
    for (j, &xj) in x.iter().enumerate() {
        r.scaled_add(-xj, &a.column(j));
    }
    r
}

pub fn norm<T: Real>(v: ArrayView1<'_, T>) -> T {
    v.iter().map(|&x| x.pow2()).sum::<T>().sqrt()
}

/// Columns of `a` listed in `cols`, in that order.
pub fn select_columns<T: Real>(a: ArrayView2<'_, T>, cols: &[usize]) -> Array2<T> {
    let mut out = Array2::zeros((a.nrows(), cols.len()));
    for (k, &c) in cols.iter().enumerate() {
        out.column_mut(k).assign(&a.column(c));
    }
    out
}
