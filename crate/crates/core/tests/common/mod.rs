//! Slow, obviously-correct reference implementations used as test oracles.
//! Nothing here calls into the library's linear algebra.
#![allow(dead_code)]

use nested_polar::BitVector;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub type Mat = Vec<Vec<u8>>;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_bits(rng: &mut StdRng, len: usize) -> Vec<u8> {
    (0..len).map(|_| rng.gen_range(0..2u8)).collect()
}

pub fn random_mat(rng: &mut StdRng, rows: usize, cols: usize) -> Mat {
    (0..rows).map(|_| random_bits(rng, cols)).collect()
}

pub fn bv(bits: &[u8]) -> BitVector {
    BitVector::from_bits(bits).unwrap()
}

/// Gaussian elimination on byte rows, pivoting on the lowest row index.
pub fn naive_rank(m: &Mat) -> usize {
    let mut m = m.clone();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| m[r][c] == 1) else { continue };
        m.swap(rank, p);
        for r in 0..m.len() {
            if r != rank && m[r][c] == 1 {
                for k in 0..cols {
                    m[r][k] ^= m[rank][k];
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| (0..cols).map(|c| (0..inner).fold(0, |acc, k| acc ^ (row[k] & b[k][c]))).collect())
        .collect()
}

pub fn vec_times(v: &[u8], m: &Mat) -> Vec<u8> {
    mat_mul(&vec![v.to_vec()], m).remove(0)
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let mut out = vec![vec![0u8; a[0].len() * b[0].len()]; a.len() * b.len()];
    for (i, ar) in a.iter().enumerate() {
        for (j, &av) in ar.iter().enumerate() {
            for (k, br) in b.iter().enumerate() {
                for (l, &bvl) in br.iter().enumerate() {
                    out[i * b.len() + k][j * b[0].len() + l] = av & bvl;
                }
            }
        }
    }
    out
}

pub fn f_kernel() -> Mat {
    vec![vec![1, 0], vec![1, 1]]
}

pub fn kron_power(n: u32) -> Mat {
    let mut m = vec![vec![1u8]];
    for _ in 0..n {
        m = kron(&m, &f_kernel());
    }
    m
}

/// Reverses the lowest `n` bits of `i` via its binary string.
pub fn reverse_string(i: usize, n: u32) -> usize {
    if n == 0 {
        return 0;
    }
    let s: String = format!("{:0width$b}", i, width = n as usize).chars().rev().collect();
    usize::from_str_radix(&s, 2).unwrap()
}

/// `R F^{(x)n}`: rows of the Kronecker power in bit-reversed order.
pub fn oracle_generator(n: u32) -> Mat {
    let k = kron_power(n);
    (0..k.len()).map(|i| k[reverse_string(i, n)].clone()).collect()
}

fn columns(m: &Mat, cols: &[usize]) -> Mat {
    m.iter().map(|r| cols.iter().map(|&c| r[c]).collect()).collect()
}

/// Erasure probability of every synthetic channel, by enumerating all
/// erasure patterns. With `u_0..u_{i-1}` known and later inputs uniform,
/// `u_i` is recoverable iff dropping row `i` lowers the rank of the rows
/// `i..N` restricted to the unerased columns.
pub fn exhaustive_bit_channel_erasures(n: u32, eps: f64) -> Vec<f64> {
    let g = oracle_generator(n);
    let len = g.len();
    let mut z = vec![0.0; len];
    for mask in 0u32..(1 << len) {
        let erased = mask.count_ones() as i32;
        let weight = eps.powi(erased) * (1.0 - eps).powi(len as i32 - erased);
        for (i, zi) in z.iter_mut().enumerate() {
            if bit_channel_erased(&g, mask, i) {
                *zi += weight;
            }
        }
    }
    z
}

/// Indices of the `k` smallest values, ties broken by index.
pub fn k_smallest(z: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..z.len()).collect();
    idx.sort_by(|&a, &b| z[a].partial_cmp(&z[b]).unwrap().then(a.cmp(&b)));
    let mut out = idx[..k].to_vec();
    out.sort();
    out
}

/// Successive decisions `u_i = argmax sum_{u_{i+1}..} prod_j W(y_j | x_j)`
/// with channel likelihoods given as LLRs.
pub fn ml_per_step(llrs: &[f64], info: &[usize], frozen: &[u8]) -> Vec<u8> {
    let g = oracle_generator(llrs.len().trailing_zeros());
    let len = llrs.len();
    let like = |j: usize, bit: u8| {
        let p0 = 1.0 / (1.0 + (-llrs[j]).exp());
        if bit == 0 {
            p0
        } else {
            1.0 - p0
        }
    };
    let mut decided: Vec<u8> = Vec::new();
    for i in 0..len {
        if !info.contains(&i) {
            decided.push(frozen[i]);
            continue;
        }
        let mut score = [0.0f64; 2];
        for (ui, s) in score.iter_mut().enumerate() {
            let rest = len - i - 1;
            for tail in 0u32..(1 << rest) {
                let mut u = decided.clone();
                u.push(ui as u8);
                u.extend((0..rest).map(|k| (tail >> k & 1) as u8));
                let x = vec_times(&u, &g);
                *s += (0..len).map(|j| like(j, x[j])).product::<f64>();
            }
        }
        decided.push(u8::from(score[1] > score[0]));
    }
    decided
}

/// Whether `u_i` is unrecoverable from the unerased outputs (those with a
/// zero bit in `erased_mask`) given `u_0..u_{i-1}`.
pub fn bit_channel_erased(g: &Mat, erased_mask: u32, i: usize) -> bool {
    let kept: Vec<usize> = (0..g.len()).filter(|&j| erased_mask >> j & 1 == 0).collect();
    let with = naive_rank(&columns(&g[i..].to_vec(), &kept));
    let without = if i + 1 < g.len() { naive_rank(&columns(&g[i + 1..].to_vec(), &kept)) } else { 0 };
    with == without
}
