//! Counter-keyed random streams.
//!
//! Each sample owns the ChaCha8 stream numbered by its sample id under a key
//! derived from (master seed, experiment id, tag), so results do not depend
//! on how samples are split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::estimate::Accumulator;

/// Samples per work unit; merge order follows unit order.
pub const CHUNK: u64 = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey([u8; 32]);

fn fnv1a(text: &str) -> u64 {
    text.bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

impl StreamKey {
    pub fn new(seed: u64, experiment: &str, tag: u64) -> Self {
        let mut k = [0u8; 32];
        k[..8].copy_from_slice(&seed.to_le_bytes());
        k[8..16].copy_from_slice(&fnv1a(experiment).to_le_bytes());
        k[16..24].copy_from_slice(&tag.to_le_bytes());
        StreamKey(k)
    }

    pub fn rng(&self, sample: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::from_seed(self.0);
        r.set_stream(sample);
        r
    }
}

/// Run samples `start..start+count`, each writing `width` values, and return
/// one accumulator per value.
pub fn accumulate<W, I, F>(key: StreamKey, start: u64, count: u64, width: usize, init: I, f: F) -> Vec<Accumulator>
where
    I: Fn() -> W + Sync,
    F: Fn(&mut ChaCha8Rng, &mut W, &mut [f64]) + Sync,
{
    let end = start + count;
    let chunks: Vec<(u64, u64)> = (start / CHUNK..end.div_ceil(CHUNK))
        .map(|c| ((c * CHUNK).max(start), ((c + 1) * CHUNK).min(end)))
        .filter(|(a, b)| a < b)
        .collect();
    let parts: Vec<Vec<Accumulator>> = chunks
        .par_iter()
        .map(|&(a, b)| {
            let mut w = init();
            let mut out = vec![0.0; width];
            let mut accs = vec![Accumulator::default(); width];
            for s in a..b {
                let mut rng = key.rng(s);
                f(&mut rng, &mut w, &mut out);
                for (acc, v) in accs.iter_mut().zip(&out) {
                    acc.push(*v);
                }
            }
            accs
        })
        .collect();
    parts.iter().fold(vec![Accumulator::default(); width], |acc, p| {
        acc.iter().zip(p).map(|(a, b)| a.merge(b)).collect()
    })
}

/// Extend accumulators built from samples `0..n` by samples `n..n+extra`.
pub fn extend<W, I, F>(
    key: StreamKey,
    current: &[Accumulator],
    extra: u64,
    init: I,
    f: F,
) -> Vec<Accumulator>
where
    I: Fn() -> W + Sync,
    F: Fn(&mut ChaCha8Rng, &mut W, &mut [f64]) + Sync,
{
    let n = current.first().map_or(0, |a| a.count);
    let more = accumulate(key, n, extra, current.len(), init, f);
    current.iter().zip(&more).map(|(a, b)| a.merge(b)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn independent_of_split_and_threads() {
        let key = StreamKey::new(5, "x", 1);
        let f = |r: &mut ChaCha8Rng, _: &mut (), o: &mut [f64]| {
            o[0] = r.random::<f64>();
            o[1] = o[0] * o[0];
        };
        let whole = accumulate(key, 0, 10_000, 2, || (), f);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let threaded = pool.install(|| accumulate(key, 0, 10_000, 2, || (), f));
        assert_eq!(whole, threaded);
        let first = accumulate(key, 0, 4096, 2, || (), f);
        let grown = extend(key, &first, 10_000 - 4096, || (), f);
        assert_eq!(grown[0].count, whole[0].count);
        assert!((grown[0].mean - whole[0].mean).abs() < 1e-14);
        assert!((whole[0].mean - 0.5).abs() < 0.02);
        assert_ne!(StreamKey::new(5, "x", 2), key);
    }
}
