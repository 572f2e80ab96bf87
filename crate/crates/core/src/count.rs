//! Exact counting and fixed-weight bit strings.

/// `C(n, k)`, 0 for `k > n`. Panics on overflow of `u64`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let v = (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128);
    u64::try_from(v).expect("binomial fits in u64")
}

/// All `n`-bit masks with `k` ones in increasing numeric order. Bit `n-1-x`
/// holds site `x`, so the order matches digit-string order with site 0 first.
pub fn fixed_weight_masks(n: usize, k: usize) -> Vec<u64> {
    assert!(n <= 63, "at most 63 sites");
    if k > n {
        return Vec::new();
    }
    if k == 0 {
        return vec![0];
    }
    let mut out = Vec::with_capacity(binomial(n, k) as usize);
    let mut m: u64 = (1 << k) - 1;
    let end = 1u64 << n;
    while m < end {
        out.push(m);
        // Gosper's next permutation of bits.
        let c = m & m.wrapping_neg();
        let r = m + c;
        m = (((r ^ m) >> 2) / c) | r;
    }
    out
}
