//! Zeta and Möbius transforms over the subset lattice of a small frame.
//!
//! Tables have length `2^n` for a frame of `n` configurations; entry `s` holds
//! the value for the subset whose members are the set bits of `s`.

/// Largest frame (in configurations) whose full subset lattice may be materialized.
pub const MAX_LATTICE_CONFIGS: usize = 20;

fn butterflies(xs: &mut [f64], op: impl Fn(&mut f64, &mut f64)) {
    let n = xs.len();
    assert!(n.is_power_of_two(), "lattice table length must be a power of two");
    let mut half = 1;
    while half < n {
        for block in xs.chunks_exact_mut(2 * half) {
            let (without, with) = block.split_at_mut(half);
            for (z, o) in without.iter_mut().zip(with) {
                op(z, o);
            }
        }
        half *= 2;
    }
}

/// `t[A] <- sum_{B ⊆ A} t[B]` (mass to belief).
pub fn subset_sums(xs: &mut [f64]) {
    butterflies(xs, |z, o| *o += *z);
}

/// Inverse of [`subset_sums`].
pub fn inv_subset_sums(xs: &mut [f64]) {
    butterflies(xs, |z, o| *o -= *z);
}

/// `t[A] <- sum_{B ⊇ A} t[B]` (mass to commonality).
pub fn superset_sums(xs: &mut [f64]) {
    butterflies(xs, |z, o| *z += *o);
}

/// Inverse of [`superset_sums`].
pub fn inv_superset_sums(xs: &mut [f64]) {
    butterflies(xs, |z, o| *z -= *o);
}
