//! Shapley value estimators.

use std::collections::HashMap;

use rand::Rng;

use crate::explain::game::{key, CoalitionGame, Memo};
use crate::explain::linalg::solve;
use crate::explain::{ExplainError, Method};
use crate::rng::rng_from_seed;
use crate::scalar::Scalar;

/// Largest game solved by full enumeration (4096 coalitions).
pub const MAX_EXACT_PLAYERS: usize = 12;

const RIDGE: f64 = 1e-10;
const PIVOT_TOL: f64 = 1e-13;

/// Attributions for one game.
#[derive(Debug, Clone, PartialEq)]
pub struct Attribution<T> {
    /// Value of the empty coalition.
    pub base_value: T,
    /// Value of the grand coalition.
    pub full_value: T,
    pub phi: Vec<T>,
    /// Per-player standard error, for sampling estimators.
    pub standard_error: Option<Vec<T>>,
    pub method: Method,
    /// Exact: coalitions enumerated. Kernel: interior coalitions in the
    /// regression. Permutation: orderings drawn.
    pub samples_used: usize,
    /// The kernel system was singular and solved with a small ridge term.
    pub regularized: bool,
}

impl<T: Scalar> Attribution<T> {
    /// `|base + sum(phi) - full|`.
    pub fn efficiency_residual(&self) -> T {
        (self.base_value + self.phi.iter().copied().sum::<T>() - self.full_value).abs()
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn mask_to_flags(mask: usize, n: usize) -> Vec<bool> {
    (0..n).map(|i| mask >> i & 1 == 1).collect()
}

/// Exact Shapley values by enumerating all `2^n` coalitions:
/// `phi_i = sum_{S not containing i} |S|! (n-|S|-1)! / n! * (v(S+i) - v(S))`.
pub fn shapley_exact<T: Scalar, G: CoalitionGame<T> + ?Sized>(
    game: &G,
) -> Result<Attribution<T>, ExplainError> {
    let n = game.players();
    if n > MAX_EXACT_PLAYERS {
        return Err(ExplainError::TooManyPlayers {
            players: n,
            limit: MAX_EXACT_PLAYERS,
        });
    }
    let size = 1usize << n;
    let values: Vec<T> = (0..size)
        .map(|m| game.value(&mask_to_flags(m, n)))
        .collect();
    let nf = factorial(n);
    let weights: Vec<T> = (0..n.max(1))
        .map(|s| T::lit(factorial(s) * factorial(n.saturating_sub(s + 1)) / nf))
        .collect();
    let mut phi = vec![T::zero(); n];
    for (i, slot) in phi.iter_mut().enumerate() {
        let bit = 1 << i;
        let mut acc = T::zero();
        for mask in (0..size).filter(|m| m & bit == 0) {
            let s = mask.count_ones() as usize;
            acc += weights[s] * (values[mask | bit] - values[mask]);
        }
        *slot = acc;
    }
    Ok(Attribution {
        base_value: values[0],
        full_value: values[size - 1],
        phi,
        standard_error: None,
        method: Method::Exact,
        samples_used: size,
        regularized: false,
    })
}

/// Shapley kernel weight of a coalition of size `s` out of `n`:
/// `(n-1) / (C(n,s) * s * (n-s))`.
pub fn kernel_weight(n: usize, s: usize) -> f64 {
    (n - 1) as f64 / (binomial(n, s) * s as f64 * (n - s) as f64)
}

/// Kernel-weighted regression estimate from `n_samples` coalitions.
///
/// All `2n` coalitions of size 1 and `n-1` are always included with their
/// kernel weight. The remaining budget draws coalition sizes `2..=n-2` with
/// probability proportional to their total kernel mass and members uniformly;
/// each draw carries an equal share of that mass. When the budget covers every
/// interior coalition the regression is run on all of them instead. The
/// solution satisfies `phi_0 = v(empty)` and `phi_0 + sum(phi) = v(N)` exactly.
pub fn shapley_kernel<T: Scalar, G: CoalitionGame<T> + ?Sized>(
    game: &G,
    n_samples: usize,
    seed: u64,
) -> Result<Attribution<T>, ExplainError> {
    let n = game.players();
    if n < 2 {
        return Err(ExplainError::Precondition(format!(
            "kernel estimator needs n >= 2 players (got {n})"
        )));
    }
    if n_samples < 2 * n {
        return Err(ExplainError::Precondition(format!(
            "kernel estimator needs at least 2n = {} samples (got {n_samples})",
            2 * n
        )));
    }
    let interior = if n < 63 { (1u64 << n) - 2 } else { u64::MAX };
    if interior <= n_samples as u64 {
        return kernel_exhaustive(game);
    }
    let mut coalitions: HashMap<Vec<u64>, (Vec<bool>, f64)> = HashMap::new();
    let mut add = |flags: Vec<bool>, w: f64, accumulate: bool| {
        let e = coalitions.entry(key(&flags)).or_insert((flags, 0.0));
        if accumulate {
            e.1 += w;
        } else {
            e.1 = w;
        }
    };
    let edge = kernel_weight(n, 1);
    for i in 0..n {
        let mut one = vec![false; n];
        one[i] = true;
        add(one, edge, false);
        let mut all_but = vec![true; n];
        all_but[i] = false;
        add(all_but, edge, false);
    }
    let forced = 2 * n;
    let draws = n_samples - forced;
    if draws > 0 && n >= 4 {
        let sizes: Vec<usize> = (2..=n - 2).collect();
        let mass: Vec<f64> = sizes
            .iter()
            .map(|&k| (n - 1) as f64 / (k * (n - k)) as f64)
            .collect();
        let total: f64 = mass.iter().sum();
        let share = total / draws as f64;
        let mut rng = rng_from_seed(seed);
        let mut pool: Vec<usize> = (0..n).collect();
        for _ in 0..draws {
            let mut u = rng.gen::<f64>() * total;
            let mut pick = sizes.len() - 1;
            for (j, m) in mass.iter().enumerate() {
                if u < *m {
                    pick = j;
                    break;
                }
                u -= m;
            }
            let k = sizes[pick];
            // partial Fisher-Yates: the first k slots become a uniform k-subset
            for slot in 0..k {
                let j = rng.gen_range(slot..n);
                pool.swap(slot, j);
            }
            let mut flags = vec![false; n];
            for &p in &pool[..k] {
                flags[p] = true;
            }
            add(flags, share, true);
        }
    }
    let mut list: Vec<(Vec<bool>, f64)> = coalitions.into_values().collect();
    // deterministic accumulation order regardless of hash iteration
    list.sort_by(|a, b| a.0.cmp(&b.0));
    solve_kernel(game, &list, Method::Kernel)
}

/// Kernel regression over every interior coalition (`2^n - 2` of them).
pub fn kernel_exhaustive<T: Scalar, G: CoalitionGame<T> + ?Sized>(
    game: &G,
) -> Result<Attribution<T>, ExplainError> {
    let n = game.players();
    if n < 2 {
        return Err(ExplainError::Precondition(format!(
            "kernel estimator needs n >= 2 players (got {n})"
        )));
    }
    if n > 24 {
        return Err(ExplainError::TooManyPlayers {
            players: n,
            limit: 24,
        });
    }
    let list: Vec<(Vec<bool>, f64)> = (1..(1usize << n) - 1)
        .map(|m| {
            let s = m.count_ones() as usize;
            (mask_to_flags(m, n), kernel_weight(n, s))
        })
        .collect();
    solve_kernel(game, &list, Method::Kernel)
}

fn solve_kernel<T: Scalar, G: CoalitionGame<T> + ?Sized>(
    game: &G,
    coalitions: &[(Vec<bool>, f64)],
    method: Method,
) -> Result<Attribution<T>, ExplainError> {
    let n = game.players();
    let base = game.value(&vec![false; n]);
    let full = game.value(&vec![true; n]);
    let delta = full - base;
    let last = n - 1;
    let m = n - 1;
    // unknowns phi_0..phi_{n-2}; phi_{n-1} = delta - sum(others)
    let mut a = vec![T::zero(); m * m];
    let mut b = vec![T::zero(); m];
    let mut support = Vec::with_capacity(n);
    for (flags, w) in coalitions {
        let w = T::lit(*w);
        let v = game.value(flags);
        let last_in = flags[last];
        let y = v - base - if last_in { delta } else { T::zero() };
        // x_i = z_i - z_last: the ones of z when the last player is out,
        // minus the zeros of z when it is in
        support.clear();
        support.extend((0..m).filter(|&i| flags[i] != last_in));
        let sign = if last_in { -T::one() } else { T::one() };
        for &r in &support {
            b[r] += w * sign * y;
            for &c in &support {
                a[r * m + c] += w;
            }
        }
    }
    let mut regularized = false;
    let sol = match solve(a.clone(), b.clone(), m, T::lit(PIVOT_TOL)) {
        Some(x) => x,
        None => {
            regularized = true;
            for i in 0..m {
                a[i * m + i] += T::lit(RIDGE);
            }
            solve(a, b, m, T::zero()).ok_or(ExplainError::Singular)?
        }
    };
    let mut phi = sol;
    let rest: T = phi.iter().copied().sum();
    phi.push(delta - rest);
    Ok(Attribution {
        base_value: base,
        full_value: full,
        phi,
        standard_error: None,
        method,
        samples_used: coalitions.len(),
        regularized,
    })
}

/// Monte Carlo average of marginal contributions over uniformly drawn player
/// orderings, with per-player standard errors.
pub fn shapley_permutation<T: Scalar, G: CoalitionGame<T> + ?Sized>(
    game: &G,
    n_permutations: usize,
    seed: u64,
) -> Result<Attribution<T>, ExplainError> {
    if n_permutations == 0 {
        return Err(ExplainError::Precondition(
            "n_permutations must be at least 1".to_string(),
        ));
    }
    let n = game.players();
    let memo = Memo::new(game);
    let mut rng = rng_from_seed(seed);
    let empty = vec![false; n];
    let base = memo.value(&empty);
    let full = memo.value(&vec![true; n]);
    let mut mean = vec![T::zero(); n];
    let mut m2 = vec![T::zero(); n];
    let mut order: Vec<usize> = (0..n).collect();
    for draw in 1..=n_permutations {
        crate::rng::shuffle(&mut order, &mut rng);
        let mut present = empty.clone();
        let mut prev = base;
        let count = T::from_count(draw);
        for &p in &order {
            present[p] = true;
            let cur = memo.value(&present);
            let x = cur - prev;
            prev = cur;
            // Welford update
            let d = x - mean[p];
            mean[p] += d / count;
            m2[p] += d * (x - mean[p]);
        }
    }
    let standard_error = if n_permutations > 1 {
        let k = T::from_count(n_permutations);
        m2.iter()
            .map(|&s| (s / (k - T::one()) / k).sqrt())
            .collect()
    } else {
        vec![T::zero(); n]
    };
    Ok(Attribution {
        base_value: base,
        full_value: full,
        phi: mean,
        standard_error: Some(standard_error),
        method: Method::Permutation,
        samples_used: n_permutations,
        regularized: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explain::game::FnGame;

    fn additive() -> FnGame<impl Fn(&[bool]) -> f64> {
        FnGame {
            players: 2,
            value: |s: &[bool]| 0.5 + if s[0] { 0.2 } else { 0.0 } - if s[1] { 0.1 } else { 0.0 },
        }
    }

    #[test]
    fn constant_game_gives_zero() {
        let g = FnGame {
            players: 5,
            value: |_: &[bool]| 0.7f64,
        };
        let e = shapley_exact(&g).unwrap();
        assert_eq!(e.base_value, 0.7);
        assert!(e.phi.iter().all(|&p| p.abs() < 1e-15));
        let k = shapley_kernel(&g, 10, 1).unwrap();
        assert!(k.phi.iter().all(|&p| p.abs() < 1e-12));
        let p = shapley_permutation(&g, 3, 1).unwrap();
        assert!(p.phi.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn additive_two_token_game() {
        let g = additive();
        let e = shapley_exact(&g).unwrap();
        assert!((e.phi[0] - 0.2).abs() < 1e-15 && (e.phi[1] + 0.1).abs() < 1e-15);
        assert_eq!(e.base_value, 0.5);
        let p = shapley_permutation(&g, 1, 42).unwrap();
        assert!((p.phi[0] - 0.2).abs() < 1e-15 && (p.phi[1] + 0.1).abs() < 1e-15);
        let k = shapley_kernel(&g, 4, 0).unwrap();
        assert!((k.phi[0] - 0.2).abs() < 1e-12 && (k.phi[1] + 0.1).abs() < 1e-12);
    }

    #[test]
    fn preconditions() {
        let big = FnGame {
            players: 13,
            value: |_: &[bool]| 0.0f64,
        };
        assert!(matches!(
            shapley_exact(&big),
            Err(ExplainError::TooManyPlayers { .. })
        ));
        let g = additive();
        assert!(matches!(
            shapley_permutation(&g, 0, 0),
            Err(ExplainError::Precondition(_))
        ));
        assert!(matches!(
            shapley_kernel(&g, 3, 0),
            Err(ExplainError::Precondition(_))
        ));
        let one = FnGame {
            players: 1,
            value: |s: &[bool]| if s[0] { 1.0f64 } else { 0.0 },
        };
        assert!(matches!(
            shapley_kernel(&one, 10, 0),
            Err(ExplainError::Precondition(_))
        ));
        assert_eq!(shapley_exact(&one).unwrap().phi, vec![1.0]);
    }

    #[test]
    fn kernel_weights_match_formula() {
        // n = 4, s = 2: 3 / (6 * 2 * 2)
        assert!((kernel_weight(4, 2) - 0.125).abs() < 1e-15);
        assert!((kernel_weight(4, 1) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn kernel_is_deterministic_per_seed() {
        let g = FnGame {
            players: 20,
            value: |s: &[bool]| {
                let k = s.iter().filter(|&&b| b).count() as f64;
                (k * 0.3).sin() + if s[3] && s[7] { 0.4 } else { 0.0 }
            },
        };
        let a = shapley_kernel(&g, 300, 9).unwrap();
        let b = shapley_kernel(&g, 300, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.efficiency_residual() < 1e-9);
        assert!(a.samples_used <= 300);
    }

    #[test]
    fn interaction_split_evenly() {
        // v = 1 iff both players present: each gets 1/2
        let g = FnGame {
            players: 3,
            value: |s: &[bool]| if s[0] && s[1] { 1.0f64 } else { 0.0 },
        };
        let e = shapley_exact(&g).unwrap();
        assert!(
            (e.phi[0] - 0.5).abs() < 1e-15
                && (e.phi[1] - 0.5).abs() < 1e-15
                && e.phi[2].abs() < 1e-15
        );
        let k = kernel_exhaustive(&g).unwrap();
        for (x, y) in k.phi.iter().zip(&e.phi) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn works_in_single_precision() {
        let g = FnGame {
            players: 4,
            value: |s: &[bool]| s.iter().filter(|&&b| b).count() as f32 * 0.25,
        };
        let e = shapley_exact(&g).unwrap();
        assert!(e.phi.iter().all(|&p| (p - 0.25).abs() < 1e-6));
    }
}
