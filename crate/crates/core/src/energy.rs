//! Collision lower bounds on projected box counts of digit sets.
//!
//! For `X, X'` drawn independently and uniformly from a digit set, any cover
//! of the projection by `N` intervals of length `2^-k` puts `e.X` and `e.X'`
//! in the same interval with probability at least `1 / N`, and then
//! `|e.(X - X')| < 2^-k`. So `N(k) >= 1 / P(|e.(X - X')| < 2^-k)`.
//!
//! The probability is computed exactly for the fixed-point direction: each
//! free bit contributes an independent difference `d` in `{-1, 0, 1}` with
//! weights `1/4, 1/2, 1/4`, and a breadth-first sweep over bit positions
//! merges equal partial sums and prunes those already decided by the
//! remaining range.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::fractal::{fixed_direction, least_squares, Regression, DIRECTION_BITS};

/// Deepest bit position handled; partial sums live in units of `2^-(60 + 64)`.
pub const MAX_POSITION: u32 = 64;
const UNIT_BITS: u32 = DIRECTION_BITS + MAX_POSITION;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionBound {
    pub k: u32,
    /// `P(|e.(X - X')| < 2^-k)`.
    pub probability: f64,
    /// `log2 (1 / probability)`, a lower bound on `log2 N(k)`.
    pub log2_count: f64,
}

/// Collision bounds at each scale in `scales` (all `<= 64`).
pub fn collision_bounds(
    free_x: &[u32],
    free_y: &[u32],
    e: (f64, f64),
    scales: &[u32],
) -> Result<Vec<CollisionBound>> {
    let dir = fixed_direction(e)?;
    for &i in free_x.iter().chain(free_y) {
        if i == 0 || i > MAX_POSITION {
            return domain(format!("free positions must lie in 1..={MAX_POSITION}"));
        }
    }
    if let Some(&k) = scales.iter().find(|&&k| k > MAX_POSITION) {
        return domain(format!("scale {k} exceeds {MAX_POSITION}"));
    }
    // per position: the weight of each axis (0 when that bit is pinned)
    let weights: Vec<(i128, i128)> = (1..=MAX_POSITION)
        .map(|i| {
            let w = |free: &[u32], c: i128| {
                if free.contains(&i) {
                    c << (MAX_POSITION - i)
                } else {
                    0
                }
            };
            (w(free_x, dir.x), w(free_y, dir.y))
        })
        .collect();
    // reach[i] bounds |sum of positions > i|
    let mut reach = vec![0i128; weights.len() + 1];
    for i in (0..weights.len()).rev() {
        reach[i] = reach[i + 1] + weights[i].0.abs() + weights[i].1.abs();
    }
    Ok(scales
        .par_iter()
        .map(|&k| {
            let probability = sweep(&weights, &reach, 1i128 << (UNIT_BITS - k));
            CollisionBound {
                k,
                probability,
                log2_count: -probability.log2(),
            }
        })
        .collect())
}

fn steps(w: i128) -> &'static [(i8, f64)] {
    if w == 0 {
        &[(0, 1.0)]
    } else {
        &[(-1, 0.25), (0, 0.5), (1, 0.25)]
    }
}

/// `P(|S| < h)` for `S = sum_i (dx_i wx_i + dy_i wy_i)`.
fn sweep(weights: &[(i128, i128)], reach: &[i128], h: i128) -> f64 {
    let mut live: Vec<(i128, f64)> = vec![(0, 1.0)];
    let mut decided = 0.0;
    for (i, &(wx, wy)) in weights.iter().enumerate() {
        let rest = reach[i + 1];
        let mut next: Vec<(i128, f64)> = Vec::with_capacity(live.len() * 3);
        for &(s, p) in &live {
            for &(dx, px) in steps(wx) {
                for &(dy, py) in steps(wy) {
                    let v = s + i128::from(dx) * wx + i128::from(dy) * wy;
                    let q = p * px * py;
                    if v.abs() + rest < h {
                        decided += q;
                    } else if v.abs() - rest < h {
                        next.push((v, q));
                    }
                }
            }
        }
        next.sort_unstable_by_key(|e| e.0);
        live.clear();
        for (v, q) in next {
            match live.last_mut() {
                Some(last) if last.0 == v => last.1 += q,
                _ => live.push((v, q)),
            }
        }
        if live.is_empty() {
            break;
        }
    }
    // after the last position the sums are exact
    decided + live.iter().filter(|e| e.0.abs() < h).map(|e| e.1).sum::<f64>()
}

/// Slope of `log2 (1 / P)` against `k`.
pub fn collision_slope(bounds: &[CollisionBound]) -> Result<Regression> {
    if bounds.len() < 2 {
        return domain("a slope needs at least two scales");
    }
    let pts: Vec<(f64, f64)> = bounds.iter().map(|b| (f64::from(b.k), b.log2_count)).collect();
    Ok(least_squares(&pts))
}

/// Free bit positions `i` in `1..=precision` on the Beatty pattern of density
/// `num / den` (`floor(i num / den) > floor((i - 1) num / den)`).
pub fn density_positions(num: u32, den: u32, precision: u32) -> Vec<u32> {
    (1..=precision)
        .filter(|&i| (i * num) / den > ((i - 1) * num) / den)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractal::{box_counts, gen_digit_set, project};

    #[test]
    fn density_pattern() {
        assert_eq!(density_positions(2, 5, 10), vec![3, 5, 8, 10]);
        assert_eq!(density_positions(1, 1, 4), vec![1, 2, 3, 4]);
    }

    #[test]
    fn axis_direction_counts_exactly() {
        // along (1, 0) only x bits matter; X - X' hits an interval of length
        // 2^-k around zero iff the first k free bits agree
        let fx = [1, 3, 5, 7];
        let b = collision_bounds(&fx, &[2, 4], (1.0, 0.0), &[2, 4, 8]).unwrap();
        let exp: Vec<f64> = b.iter().map(|c| c.log2_count).collect();
        // |X - X'| < 2^-k needs every free bit <= k equal, and for a lone
        // differing bit just past k the tail cannot close the gap
        assert_eq!(exp, vec![1.0, 2.0, 4.0]);
    }

    #[test]
    fn collision_bound_never_exceeds_the_exact_count() {
        let fx = density_positions(2, 5, 16);
        let fy = fx.clone();
        let set = gen_digit_set(&fx, &fy, 16).unwrap();
        for theta in [0.3f64, 1.1, 2.0, 2.9] {
            let e = (theta.cos(), theta.sin());
            let scales = [4, 8, 12, 16];
            let proj = project(&set, e, 16).unwrap();
            let exact = box_counts(&proj, &scales).unwrap();
            let lower = collision_bounds(&fx, &fy, e, &scales).unwrap();
            for (c, l) in exact.iter().zip(&lower) {
                assert!(
                    l.log2_count <= (c.1 as f64).log2() + 1e-9,
                    "theta {theta} k {}: {} > log2 {}",
                    c.0,
                    l.log2_count,
                    c.1
                );
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(collision_bounds(&[0], &[], (1.0, 0.0), &[4]).is_err());
        assert!(collision_bounds(&[1], &[], (1.0, 0.0), &[65]).is_err());
        assert!(collision_bounds(&[1], &[], (1.0, 1.0), &[4]).is_err());
    }
}
