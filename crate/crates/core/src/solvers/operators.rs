//! Moves on solution vectors: swaps, reversals, workload transfers and
//! order-preserving crossover.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::schedule::{Encoding, SolutionVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Move {
    Swap,
    Reverse,
    Transfer,
}

fn types_with_orders(enc: &Encoding) -> Vec<usize> {
    (0..enc.slots.len())
        .filter(|&t| enc.slots[t].zones.len() >= 2)
        .collect()
}

fn types_with_choices(enc: &Encoding) -> Vec<usize> {
    (0..enc.slots.len())
        .filter(|&t| enc.slots[t].robots.len() >= 2 && !enc.slots[t].zones.is_empty())
        .collect()
}

fn apply<R: Rng + ?Sized>(enc: &Encoding, v: &mut SolutionVector, mv: Move, rng: &mut R) {
    match mv {
        Move::Swap | Move::Reverse => {
            let Some(&t) = types_with_orders(enc).choose(rng) else {
                return;
            };
            let order = &mut v.orders[t];
            let a = rng.gen_range(0..order.len());
            let mut b = rng.gen_range(0..order.len() - 1);
            if b >= a {
                b += 1;
            }
            let (lo, hi) = (a.min(b), a.max(b));
            if mv == Move::Swap {
                order.swap(lo, hi);
            } else {
                order[lo..=hi].reverse();
            }
        }
        Move::Transfer => {
            let Some(&t) = types_with_choices(enc).choose(rng) else {
                return;
            };
            let load = &mut v.workloads[t];
            let donors: Vec<usize> = (0..load.len()).filter(|&i| load[i] > 0).collect();
            let Some(&from) = donors.choose(rng) else {
                return;
            };
            let mut to = rng.gen_range(0..load.len() - 1);
            if to >= from {
                to += 1;
            }
            load[from] -= 1;
            load[to] += 1;
        }
    }
}

fn pick<R: Rng + ?Sized>(enc: &Encoding, allowed: &[Move], rng: &mut R) -> Option<Move> {
    let orders = !types_with_orders(enc).is_empty();
    let choices = !types_with_choices(enc).is_empty();
    let usable: Vec<Move> = allowed
        .iter()
        .copied()
        .filter(|m| match m {
            Move::Swap | Move::Reverse => orders,
            Move::Transfer => choices,
        })
        .collect();
    usable.choose(rng).copied()
}

/// A random swap, sub-sequence reversal or single-zone workload transfer.
/// Returns an unchanged copy when the search space has a single point.
pub fn neighbor<R: Rng + ?Sized>(enc: &Encoding, v: &SolutionVector, rng: &mut R) -> SolutionVector {
    let mut out = v.clone();
    if let Some(mv) = pick(enc, &[Move::Swap, Move::Reverse, Move::Transfer], rng) {
        apply(enc, &mut out, mv, rng);
    }
    out
}

/// A random swap of two zones or a shift of one zone between robots.
pub fn mutate<R: Rng + ?Sized>(enc: &Encoding, v: &mut SolutionVector, rng: &mut R) {
    if let Some(mv) = pick(enc, &[Move::Swap, Move::Transfer], rng) {
        apply(enc, v, mv, rng);
    }
}

/// Order crossover on one permutation: the child keeps `a[lo..=hi]` in place
/// and fills the other positions with the remaining zones in `b`'s order.
fn order_crossover(a: &[usize], b: &[usize], lo: usize, hi: usize) -> Vec<usize> {
    let kept = &a[lo..=hi];
    let mut rest = b.iter().copied().filter(|z| !kept.contains(z));
    (0..a.len())
        .map(|i| {
            if (lo..=hi).contains(&i) {
                a[i]
            } else {
                rest.next().expect("permutations share elements")
            }
        })
        .collect()
}

/// One-point crossover of workload counts, repaired so the counts sum to `total`.
fn workload_crossover<R: Rng + ?Sized>(
    a: &[usize],
    b: &[usize],
    cut: usize,
    total: usize,
    rng: &mut R,
) -> Vec<usize> {
    let mut child: Vec<usize> = a[..cut].iter().chain(&b[cut..]).copied().collect();
    let mut sum: usize = child.iter().sum();
    while sum > total {
        let donors: Vec<usize> = (0..child.len()).filter(|&i| child[i] > 0).collect();
        let &i = donors.choose(rng).expect("positive sum has a donor");
        child[i] -= 1;
        sum -= 1;
    }
    while sum < total {
        let i = rng.gen_range(0..child.len());
        child[i] += 1;
        sum += 1;
    }
    child
}

/// Two children from two parents, type by type.
pub fn crossover<R: Rng + ?Sized>(
    enc: &Encoding,
    a: &SolutionVector,
    b: &SolutionVector,
    rng: &mut R,
) -> (SolutionVector, SolutionVector) {
    let mut c1 = a.clone();
    let mut c2 = b.clone();
    for t in 0..enc.slots.len() {
        let n = a.orders[t].len();
        if n >= 2 {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            let (lo, hi) = (i.min(j), i.max(j));
            c1.orders[t] = order_crossover(&a.orders[t], &b.orders[t], lo, hi);
            c2.orders[t] = order_crossover(&b.orders[t], &a.orders[t], lo, hi);
        }
        let k = a.workloads[t].len();
        if k >= 2 {
            let cut = rng.gen_range(1..k);
            c1.workloads[t] = workload_crossover(&a.workloads[t], &b.workloads[t], cut, n, rng);
            c2.workloads[t] = workload_crossover(&b.workloads[t], &a.workloads[t], cut, n, rng);
        }
    }
    (c1, c2)
}
