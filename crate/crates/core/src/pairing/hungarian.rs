//! Dense Kuhn-Munkres solver over `f64` weights.

/// Maximum-weight assignment of a rectangular matrix with non-negative
/// weights. Returns the column for every row (`None` when the row is left
/// over in a wide-by-tall mismatch) and the total weight.
///
/// Shortest augmenting path formulation with row/column potentials, O(n^3) on
/// the matrix padded to square with zero weights.
pub fn max_weight_assignment(weights: &[Vec<f64>], cols: usize) -> (Vec<Option<usize>>, f64) {
    let rows = weights.len();
    let n = rows.max(cols);
    if n == 0 {
        return (Vec::new(), 0.0);
    }
    let top = weights.iter().flatten().copied().fold(0.0, f64::max);
    let cost = |i: usize, j: usize| -> f64 {
        if i < rows && j < cols {
            top - weights[i][j]
        } else {
            top
        }
    };

    // 1-based, index 0 is the virtual root
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![None; rows];
    let mut total = 0.0;
    for j in 1..=n {
        let i = p[j];
        if i >= 1 && i <= rows && j <= cols {
            assignment[i - 1] = Some(j - 1);
            total += weights[i - 1][j - 1];
        }
    }
    (assignment, total)
}
