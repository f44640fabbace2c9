//! Seeded generators of random probabilistic systems shared by the property
//! and acceptance tests.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rug::Rational;
use sppfix_core::{Monomial, Polynomial, SppSystem};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One equation with a positive constant and `vars.len()` monomials; each
/// monomial must contain the listed variable (if any). Coefficients sum to a
/// random mass in [1/2, 1].
fn equation(rng: &mut ChaCha8Rng, n: usize, required: &[Option<usize>], max_degree: u32, pool: &[usize]) -> Polynomial {
    let mass = Rational::from((rng.gen_range(10..=20), 20));
    let w0: u32 = rng.gen_range(1..=10);
    let ws: Vec<u32> = required.iter().map(|_| rng.gen_range(1..=10)).collect();
    let total = w0 + ws.iter().sum::<u32>();
    let coeff = |w: u32| &mass * Rational::from((w, total));
    let terms: Vec<Monomial> = required
        .iter()
        .zip(&ws)
        .map(|(req, &w)| {
            let degree = rng.gen_range(1..=max_degree);
            let mut powers: Vec<(usize, u32)> = Vec::new();
            let mut left = degree;
            if let Some(v) = req {
                powers.push((*v, 1));
                left -= 1;
            }
            for _ in 0..left {
                let v = if pool.is_empty() { rng.gen_range(0..n) } else { *pool.choose(rng).unwrap() };
                powers.push((v, 1));
            }
            Monomial::new(coeff(w), powers).unwrap()
        })
        .collect();
    Polynomial::from_terms(coeff(w0), terms)
}

fn names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("X{i}")).collect()
}

/// Random system with `f(0) ≻ 0` and coefficient sums at most one.
pub fn probabilistic(rng: &mut ChaCha8Rng, n: usize, max_degree: u32) -> SppSystem {
    let eqs = (0..n)
        .map(|_| {
            let t = rng.gen_range(1..=3);
            let req: Vec<Option<usize>> = (0..t).map(|_| None).collect();
            equation(rng, n, &req, max_degree, &[])
        })
        .collect();
    SppSystem::new(names(n), eqs)
}

/// Like [`probabilistic`] but every `X_i` mentions `X_(i+1 mod n)`, so the
/// system is strongly connected.
pub fn strongly_connected(rng: &mut ChaCha8Rng, n: usize, max_degree: u32) -> SppSystem {
    let eqs = (0..n)
        .map(|i| {
            let extra = rng.gen_range(0..=2);
            let mut req = vec![Some((i + 1) % n)];
            req.extend((0..extra).map(|_| None));
            equation(rng, n, &req, max_degree, &[])
        })
        .collect();
    SppSystem::new(names(n), eqs)
}

/// A DAG of strongly connected blocks: block `b` only depends on itself and
/// on later blocks. Single-variable blocks are self-dependent half the time.
pub fn dag_shaped(rng: &mut ChaCha8Rng, blocks: usize) -> SppSystem {
    let sizes: Vec<usize> = (0..blocks).map(|_| rng.gen_range(1..=3)).collect();
    let starts: Vec<usize> = sizes
        .iter()
        .scan(0, |acc, s| {
            let st = *acc;
            *acc += s;
            Some(st)
        })
        .collect();
    let n: usize = sizes.iter().sum();
    let mut eqs = Vec::with_capacity(n);
    for b in 0..blocks {
        let block: Vec<usize> = (starts[b]..starts[b] + sizes[b]).collect();
        let deeper: Vec<usize> = (starts[b] + sizes[b]..n).collect();
        for (k, &v) in block.iter().enumerate() {
            let mut req = Vec::new();
            if sizes[b] > 1 {
                req.push(Some(block[(k + 1) % block.len()]));
            } else if rng.gen_bool(0.5) {
                req.push(Some(v));
            }
            if !deeper.is_empty() && rng.gen_bool(0.7) {
                req.push(Some(*deeper.choose(rng).unwrap()));
            }
            let mut pool = block.clone();
            if sizes[b] == 1 && !req.contains(&Some(v)) {
                pool.clear();
            }
            pool.extend(&deeper);
            // With an empty `req` the equation is a constant.
            eqs.push(equation(rng, n, &req, 2, &pool));
        }
    }
    SppSystem::new(names(n), eqs)
}

/// Exact Kleene iterate `f^k(0)`.
pub fn kleene_exact(sys: &SppSystem, k: usize) -> Vec<Rational> {
    let e = sppfix_core::ExactRational::default();
    let mut x = vec![Rational::new(); sys.len()];
    for _ in 0..k {
        x = sys.eval(&e, &x).unwrap();
    }
    x
}

pub fn max_bits(x: &[Rational]) -> u32 {
    x.iter()
        .map(|v| v.numer().significant_bits().max(v.denom().significant_bits()))
        .max()
        .unwrap_or(0)
}
