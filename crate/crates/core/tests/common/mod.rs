//! Exhaustive vertex enumeration for tiny pairing programs.
#![allow(dead_code)]

use sqfn_core::lipopt::LinearProgram;

/// Solves a square system by Gaussian elimination with partial pivoting.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let (top, rest) = a.split_at_mut(col + 1);
        let pivot = &top[col];
        for (k, row) in rest.iter_mut().enumerate() {
            let f = row[col] / pivot[col];
            for (x, p) in row[col..].iter_mut().zip(&pivot[col..]) {
                *x -= f * p;
            }
            b[col + 1 + k] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// All basic feasible points of `{Ex = d, Ax ≤ b}` with one equality row.
pub fn vertices(lp: &LinearProgram) -> Vec<Vec<f64>> {
    let m = lp.num_vars();
    let eq = &lp.equalities()[0];
    let ineq = lp.inequalities();
    let mut out = Vec::new();
    for subset in combinations(ineq.len(), m - 1) {
        let mut a = vec![eq.coeffs.clone()];
        let mut b = vec![eq.rhs];
        for &k in &subset {
            a.push(ineq[k].coeffs.clone());
            b.push(ineq[k].rhs);
        }
        if let Some(x) = solve_square(a, b) {
            if lp.max_violation(&x) <= 1e-9 {
                out.push(x);
            }
        }
    }
    out
}

pub fn vertex_oracle_abs(verts: &[Vec<f64>], c: &[f64]) -> f64 {
    verts
        .iter()
        .map(|v| v.iter().zip(c).map(|(a, b)| a * b).sum::<f64>().abs())
        .fold(0.0, f64::max)
}
