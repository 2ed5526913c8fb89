//! Small numerical helpers shared by the risk engine and the bounds module.
//!
//! Binomial and multinomial weights are always formed in log space from a
//! cumulative `ln i!` table, then exponentiated term by term. Long sums go
//! through [`pairwise_sum`].

/// Cumulative table of `ln(i!)` for `i = 0..=n`.
#[derive(Debug, Clone)]
pub struct LogFactorials {
    table: Vec<f64>,
}

impl LogFactorials {
    pub fn new(n: usize) -> Self {
        let mut table = Vec::with_capacity(n + 1);
        table.push(0.0);
        let mut acc = 0.0;
        for i in 1..=n {
            acc += (i as f64).ln();
            table.push(acc);
        }
        Self { table }
    }

    pub fn max_n(&self) -> usize {
        self.table.len() - 1
    }

    #[inline]
    pub fn ln_factorial(&self, i: usize) -> f64 {
        self.table[i]
    }

    #[inline]
    pub fn ln_binomial(&self, n: usize, i: usize) -> f64 {
        debug_assert!(i <= n);
        self.table[n] - self.table[i] - self.table[n - i]
    }
}

/// Binomial(n, x) probabilities for `i = 0..=n`, computed in log space.
pub fn binomial_weights(n: usize, x: f64, lf: &LogFactorials) -> Vec<f64> {
    assert!(lf.max_n() >= n, "log-factorial table too short");
    if x <= 0.0 {
        let mut w = vec![0.0; n + 1];
        w[0] = 1.0;
        return w;
    }
    if x >= 1.0 {
        let mut w = vec![0.0; n + 1];
        w[n] = 1.0;
        return w;
    }
    let (lx, l1x) = (x.ln(), (1.0 - x).ln());
    let mut w: Vec<f64> = (0..=n)
        .map(|i| (lf.ln_binomial(n, i) + i as f64 * lx + (n - i) as f64 * l1x).exp())
        .collect();
    // rounding in ln(n!) grows with n; renormalizing restores Σ w = 1
    let total = pairwise_sum(&w);
    w.iter_mut().for_each(|wi| *wi /= total);
    w
}

/// Pairwise (cascade) summation.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Number of weak compositions of `n` into `k` parts, `C(n+k-1, k-1)`, as f64.
pub fn composition_count(n: usize, k: usize) -> f64 {
    if k == 0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let r = k - 1;
    let mut c = 1.0f64;
    for j in 1..=r {
        c = c * (n + j) as f64 / j as f64;
    }
    c.round()
}

/// Lexicographic iterator over all `t ∈ ℕ^k` with `Σ t = n`.
///
/// The first `k - 1` parts are free; the last part takes the remainder.
#[derive(Debug, Clone)]
pub struct Compositions {
    n: u64,
    free: Vec<u64>,
    free_sum: u64,
    done: bool,
}

impl Compositions {
    pub fn new(n: u64, k: usize) -> Self {
        assert!(k >= 1);
        Self {
            n,
            free: vec![0; k - 1],
            free_sum: 0,
            done: false,
        }
    }
}

impl Iterator for Compositions {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        if self.done {
            return None;
        }
        let mut out = self.free.clone();
        out.push(self.n - self.free_sum);

        if self.free.is_empty() {
            self.done = true;
        } else if self.free_sum < self.n {
            *self.free.last_mut().unwrap() += 1;
            self.free_sum += 1;
        } else {
            match self.free.iter().rposition(|&a| a > 0) {
                Some(j) if j > 0 => {
                    self.free_sum -= self.free[j] - 1;
                    self.free[j] = 0;
                    self.free[j - 1] += 1;
                }
                _ => self.done = true,
            }
        }
        Some(out)
    }
}
