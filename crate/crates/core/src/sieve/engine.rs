//! Segmented odd-only bit sieve.
//!
//! A segment is a bitmap over the odd numbers in [base, base + span); bit i
//! stands for base + 2i and survives iff that number is prime. Base primes
//! up to √hi are sieved once with a plain byte sieve. Results are identical
//! for any segment span (each composite is cleared by the same base prime
//! regardless of which segment it lands in).

use crate::error::{Error, Result};

/// Primes up to `limit` inclusive, by a plain byte sieve; used for base
/// primes and as the small-scale oracle in tests.
pub fn simple_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut is_prime = vec![true; n + 1];
    is_prime[0] = false;
    if n >= 1 {
        is_prime[1] = false;
    }
    let mut p = 2usize;
    while p * p <= n {
        if is_prime[p] {
            let mut m = p * p;
            while m <= n {
                is_prime[m] = false;
                m += p;
            }
        }
        p += 1;
    }
    is_prime
        .iter()
        .enumerate()
        .filter_map(|(i, &b)| if b { Some(i as u64) } else { None })
        .collect()
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Set bits in `words[from_bit..to_bit)`.
fn count_bit_range(words: &[u64], from_bit: usize, to_bit: usize) -> u64 {
    if from_bit >= to_bit {
        return 0;
    }
    let (fw, fb) = (from_bit / 64, from_bit % 64);
    let (tw, tb) = (to_bit / 64, to_bit % 64);
    if fw == tw {
        return (words[fw] & (u64::MAX << fb) & (u64::MAX >> (64 - tb))).count_ones() as u64;
    }
    let mut total = (words[fw] & (u64::MAX << fb)).count_ones() as u64;
    for w in &words[fw + 1..tw] {
        total += w.count_ones() as u64;
    }
    if tb > 0 {
        total += (words[tw] & (u64::MAX >> (64 - tb))).count_ones() as u64;
    }
    total
}

pub struct Pass {
    pub hi: u64,
    /// numbers covered per segment; even
    pub span: u64,
    /// resume point: (segment base, π(base − 1))
    pub resume: Option<(u64, u64)>,
}

impl Pass {
    pub fn new(hi: u64, span: u64) -> Self {
        Self {
            hi,
            span: span.max(128) & !1,
            resume: None,
        }
    }
}

/// Drive one streaming pass over [3, hi], delivering each segment's bitmap
/// in order. `on_segment(base, words, used_bits, cum_pi_before)` must return
/// the number of primes it found in the segment; `on_boundary` sees
/// (next_base, cum_pi) after every segment for checkpointing.
pub fn run_pass(
    pass: &Pass,
    mut on_segment: impl FnMut(u64, &[u64], usize, u64) -> Result<u64>,
    mut on_boundary: impl FnMut(u64, u64) -> Result<()>,
) -> Result<u64> {
    let hi = pass.hi;
    let mut cum: u64 = if hi >= 2 { 1 } else { 0 }; // the prime 2
    let mut base: u64 = 3;
    if let Some((b, c)) = pass.resume {
        if b % 2 != 1 || (b - 3) % pass.span != 0 {
            return Err(Error::Format(format!(
                "resume base {b} is not a segment boundary for span {}",
                pass.span
            )));
        }
        base = b;
        cum = c;
    }
    if hi < 3 {
        return Ok(cum);
    }

    let roots = simple_primes(isqrt(hi));
    let bits_per_seg = (pass.span / 2) as usize;
    let mut words = vec![u64::MAX; bits_per_seg.div_ceil(64)];

    while base <= hi {
        let seg_end = base.saturating_add(pass.span); // exclusive
        let used_bits = if seg_end > hi + 1 {
            ((hi - base) / 2 + 1) as usize
        } else {
            bits_per_seg
        };
        for w in words.iter_mut() {
            *w = u64::MAX;
        }
        // clear bits past the covered range so popcounts stay exact
        let last_word = (used_bits + 63) / 64;
        for w in words[last_word..].iter_mut() {
            *w = 0;
        }
        if used_bits % 64 != 0 {
            words[used_bits / 64] &= u64::MAX >> (64 - used_bits % 64);
        }

        for &p in roots.iter().skip(1) {
            // odd base primes only
            if p * p >= seg_end {
                break;
            }
            let mut m = (base + p - 1) / p * p;
            if m < p * p {
                m = p * p;
            }
            if m % 2 == 0 {
                m += p;
            }
            let mut idx = ((m - base) / 2) as usize;
            while idx < used_bits {
                words[idx / 64] &= !(1u64 << (idx % 64));
                idx += p as usize;
            }
        }

        let found = on_segment(base, &words, used_bits, cum)?;
        cum += found;
        base = seg_end;
        // a truncated final segment ends at hi, not at a span boundary, so
        // its cumulative count must not be offered as a resume point
        if used_bits == bits_per_seg {
            on_boundary(base, cum)?;
        }
    }
    Ok(cum)
}

/// π at each of the given sorted, deduplicated points, in one pass.
/// `on_boundary` is forwarded for checkpointing.
pub fn pi_at_sorted_points(
    pass: &Pass,
    points: &[u64],
    mut on_boundary: impl FnMut(u64, u64) -> Result<()>,
) -> Result<Vec<u64>> {
    debug_assert!(points.windows(2).all(|w| w[0] < w[1]));
    if let Some(&last) = points.last() {
        if last > pass.hi {
            return Err(Error::ResourceLimit(format!(
                "query point {last} beyond pass limit {}",
                pass.hi
            )));
        }
    }
    let mut answers = vec![0u64; points.len()];
    let mut qi = 0usize;
    // points below 3 are answered without sieving
    while qi < points.len() && points[qi] < 3 {
        answers[qi] = u64::from(points[qi] >= 2);
        qi += 1;
    }

    run_pass(
        pass,
        |base, words, used_bits, cum_before| {
            let seg_end = base + 2 * used_bits as u64;
            let mut scanned = 0usize; // bits already counted
            let mut local: u64 = 0;
            while qi < points.len() && points[qi] < seg_end {
                let q = points[qi];
                // bits for odd numbers ≤ q
                let q_bits = ((q.saturating_sub(base)) / 2 + 1).min(used_bits as u64) as usize;
                local += count_bit_range(words, scanned, q_bits);
                scanned = q_bits;
                answers[qi] = cum_before + local;
                qi += 1;
            }
            local += count_bit_range(words, scanned, used_bits);
            Ok(local)
        },
        &mut on_boundary,
    )?;
    Ok(answers)
}

/// Visit every prime ≤ hi in increasing order (2 included).
pub fn for_each_prime(pass: &Pass, mut f: impl FnMut(u64) -> Result<()>) -> Result<()> {
    if pass.hi >= 2 && pass.resume.is_none() {
        f(2)?;
    }
    run_pass(
        pass,
        |base, words, used_bits, _| {
            let mut found = 0u64;
            for (wi, &word) in words.iter().enumerate() {
                let mut w = word;
                while w != 0 {
                    let tz = w.trailing_zeros() as usize;
                    let idx = wi * 64 + tz;
                    debug_assert!(idx < used_bits);
                    f(base + 2 * idx as u64)?;
                    found += 1;
                    w &= w - 1;
                }
            }
            Ok(found)
        },
        |_, _| Ok(()),
    )?;
    Ok(())
}
