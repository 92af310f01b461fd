//! Independent reference implementations shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use tascl_core::PolarCode;

/// Dense `F^{⊗n}` for `N = 2^n`, built by Kronecker products.
pub fn kron_matrix(n: usize) -> Vec<Vec<u8>> {
    let mut g = vec![vec![1u8]];
    while g.len() < n {
        let m = g.len();
        let mut next = vec![vec![0u8; 2 * m]; 2 * m];
        for i in 0..m {
            for j in 0..m {
                // [[G, 0], [G, G]]
                next[i][j] = g[i][j];
                next[m + i][j] = g[i][j];
                next[m + i][m + j] = g[i][j];
            }
        }
        g = next;
    }
    g
}

/// `u·G` over GF(2).
pub fn dense_encode(g: &[Vec<u8>], u: &[u8]) -> Vec<u8> {
    let n = g.len();
    let mut x = vec![0u8; n];
    for (i, &ui) in u.iter().enumerate() {
        if ui == 1 {
            for j in 0..n {
                x[j] ^= g[i][j];
            }
        }
    }
    x
}

/// Codeword maximising `Σ llr_i·(1 − 2x_i)` over all CRC-consistent messages.
pub fn ml_codeword(code: &PolarCode, llr: &[f64]) -> Vec<u8> {
    let g = kron_matrix(code.len());
    let k = code.message_len();
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for m in 0..(1u64 << k) {
        let msg: Vec<u8> = (0..k).map(|i| ((m >> i) & 1) as u8).collect();
        let info = code.crc().append(&msg, k).unwrap();
        let mut u = vec![0u8; code.len()];
        for (&p, &b) in code.info_positions().iter().zip(&info) {
            u[p] = b;
        }
        let x = dense_encode(&g, &u);
        let corr: f64 = llr
            .iter()
            .zip(&x)
            .map(|(l, &b)| if b == 0 { *l } else { -*l })
            .sum();
        if corr > best.0 {
            best = (corr, x);
        }
    }
    best.1
}

/// The `D_TA(3,1)` transition matrix written out entry by entry.
pub fn literal_matrix_b3_z1(eps: f64) -> [[f64; 7]; 7] {
    let e = eps;
    let o = 1.0 - eps;
    [
        [o, 0.0, 0.0, e, 0.0, 0.0, 0.0],
        [o, 0.0, 0.0, e, 0.0, 0.0, 0.0],
        [0.0, o, 0.0, 0.0, e, 0.0, 0.0],
        [0.0, 0.0, o, 0.0, 0.0, e, 0.0],
        [0.0, 0.0, 0.0, o, 0.0, 0.0, e],
        [0.0, 0.0, 0.0, 0.0, o, 0.0, e],
        [0.0, 0.0, 0.0, 0.0, 0.0, o, e],
    ]
}

/// Next state of the buffer chain, written from the slot rules directly.
pub fn chain_step(x: usize, fail: bool, beta: usize, zeta: usize) -> usize {
    let drained = x.saturating_sub(1);
    if fail {
        (drained + beta).min(beta * (zeta + 1))
    } else {
        drained
    }
}

/// Stationary distribution from `π(P − I) = 0, Σπ = 1` by Gaussian elimination.
pub fn stationary_by_solve(beta: usize, zeta: usize, eps: f64) -> Vec<f64> {
    let s = beta * zeta + beta + 1;
    // a[row][col] for the transposed system
    let mut a = vec![vec![0.0; s + 1]; s];
    for x in 0..s {
        a[chain_step(x, false, beta, zeta)][x] += 1.0 - eps;
        a[chain_step(x, true, beta, zeta)][x] += eps;
        a[x][x] -= 1.0;
    }
    for v in a[s - 1].iter_mut().take(s) {
        *v = 1.0;
    }
    a[s - 1][s] = 1.0;
    for col in 0..s {
        let piv = (col..s)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        for row in 0..s {
            if row != col {
                let f = a[row][col] / a[col][col];
                if f != 0.0 {
                    for c in col..=s {
                        a[row][c] -= f * a[col][c];
                    }
                }
            }
        }
    }
    (0..s).map(|i| a[i][s] / a[i][i]).collect()
}

/// Asymptotic standard deviation of `√n·(mean of f(x_t, fail_t) − E_π f)` for
/// the buffer chain, from the Poisson equation on the (state, outcome) pair.
pub fn asymptotic_sigma(beta: usize, zeta: usize, eps: f64, f: impl Fn(usize, bool) -> f64) -> f64 {
    let pi = stationary_by_solve(beta, zeta, eps);
    let s = pi.len();
    let outcomes = [(false, 1.0 - eps), (true, eps)];
    let mu: f64 = (0..s)
        .map(|x| pi[x] * outcomes.iter().map(|&(b, p)| p * f(x, b)).sum::<f64>())
        .sum();
    let fbar = |x: usize, b: bool| f(x, b) - mu;
    let mut h = vec![0.0; s];
    for _ in 0..2_000_000 {
        let next: Vec<f64> = (0..s)
            .map(|x| {
                outcomes
                    .iter()
                    .map(|&(b, p)| p * (fbar(x, b) + h[chain_step(x, b, beta, zeta)]))
                    .sum()
            })
            .collect();
        let delta = next
            .iter()
            .zip(&h)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        h = next;
        if delta < 1e-14 {
            break;
        }
    }
    let var: f64 = (0..s)
        .map(|x| {
            pi[x]
                * outcomes
                    .iter()
                    .map(|&(b, p)| {
                        let fb = fbar(x, b);
                        let hx = fb + h[chain_step(x, b, beta, zeta)];
                        p * fb * (2.0 * hx - fb)
                    })
                    .sum::<f64>()
        })
        .sum();
    var.max(0.0).sqrt()
}
