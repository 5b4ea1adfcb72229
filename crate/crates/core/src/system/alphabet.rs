use crate::error::{Error, Result};

/// Square QAM alphabet described through its underlying PAM levels.
///
/// Levels are the unnormalized odd integers `{±1, ±3, …, ±(√M−1)}`; each
/// real dimension carries `log2(√M)` Gray-coded bits.
#[derive(Clone, Debug, PartialEq)]
pub struct ModAlphabet {
    order: usize,
    levels: Vec<f64>,
    energy: f64,
    bits_per_dim: u32,
}

impl ModAlphabet {
    pub fn new(order: usize) -> Result<Self> {
        let side = match order {
            4 => 2,
            16 => 4,
            64 => 8,
            _ => return Err(Error::UnsupportedModulation(order)),
        };
        let levels = (0..side)
            .map(|j| (2 * j as i64 - (side as i64 - 1)) as f64)
            .collect();
        Ok(Self {
            order,
            levels,
            energy: 2.0 * (order as f64 - 1.0) / 3.0,
            bits_per_dim: (side as u32).trailing_zeros(),
        })
    }

    /// QAM order M.
    pub fn order(&self) -> usize {
        self.order
    }

    /// PAM levels in increasing order.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Number of PAM levels, √M.
    pub fn size(&self) -> usize {
        self.levels.len()
    }

    /// Average QAM symbol energy Es.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn bits_per_dim(&self) -> u32 {
        self.bits_per_dim
    }

    /// log2 M.
    pub fn bits_per_symbol(&self) -> u32 {
        2 * self.bits_per_dim
    }

    #[inline]
    pub fn level(&self, index: u8) -> f64 {
        self.levels[index as usize]
    }

    /// Gray label of a level index.
    #[inline]
    pub fn gray(&self, index: u8) -> u32 {
        let i = index as u32;
        i ^ (i >> 1)
    }

    /// Index of the nearest level; midpoints go to the smaller level.
    pub fn nearest_index(&self, value: f64) -> u8 {
        let side = self.levels.len() as f64;
        // levels are 2j - (side-1); invert and round half down
        let pos = (value + side - 1.0) / 2.0;
        let j = (pos - 0.5).ceil();
        j.clamp(0.0, side - 1.0) as u8
    }

    pub fn values(&self, indices: &[u8]) -> Vec<f64> {
        indices.iter().map(|&i| self.level(i)).collect()
    }

    /// Bit errors between two real-dimension index vectors.
    pub fn bit_errors(&self, a: &[u8], b: &[u8]) -> u64 {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| (self.gray(x) ^ self.gray(y)).count_ones() as u64)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_supported_orders() {
        let a4 = ModAlphabet::new(4).unwrap();
        assert_eq!(a4.levels(), &[-1.0, 1.0]);
        assert_eq!(a4.energy(), 2.0);
        let a16 = ModAlphabet::new(16).unwrap();
        assert_eq!(a16.levels(), &[-3.0, -1.0, 1.0, 3.0]);
        assert_eq!(a16.energy(), 10.0);
        let a64 = ModAlphabet::new(64).unwrap();
        assert_eq!(a64.size(), 8);
        assert_eq!(a64.energy(), 42.0);
        assert_eq!(a64.bits_per_symbol(), 6);
    }

    #[test]
    fn rejects_other_orders() {
        for m in [0, 2, 8, 32, 256] {
            assert!(matches!(
                ModAlphabet::new(m),
                Err(Error::UnsupportedModulation(_))
            ));
        }
    }

    #[test]
    fn levels_are_symmetric_and_increasing() {
        for m in [4, 16, 64] {
            let a = ModAlphabet::new(m).unwrap();
            let l = a.levels();
            assert!(l.windows(2).all(|w| w[0] < w[1]));
            for (x, y) in l.iter().zip(l.iter().rev()) {
                assert_eq!(*x, -*y);
            }
            let es: f64 = 2.0 * l.iter().map(|v| v * v).sum::<f64>() / l.len() as f64;
            assert!((es - a.energy()).abs() < 1e-12);
        }
    }

    #[test]
    fn nearest_level_rounds_ties_down() {
        let a = ModAlphabet::new(16).unwrap();
        assert_eq!(a.level(a.nearest_index(0.9)), 1.0);
        assert_eq!(a.level(a.nearest_index(-2.2)), -3.0);
        assert_eq!(a.level(a.nearest_index(0.0)), -1.0);
        assert_eq!(a.level(a.nearest_index(2.0)), 1.0);
        assert_eq!(a.level(a.nearest_index(-2.0)), -3.0);
        assert_eq!(a.level(a.nearest_index(100.0)), 3.0);
        assert_eq!(a.level(a.nearest_index(-100.0)), -3.0);
        let a4 = ModAlphabet::new(4).unwrap();
        assert_eq!(a4.level(a4.nearest_index(0.0)), -1.0);
    }

    #[test]
    fn adjacent_levels_differ_in_one_bit() {
        let a = ModAlphabet::new(64).unwrap();
        for j in 0..7u8 {
            assert_eq!(a.bit_errors(&[j], &[j + 1]), 1);
        }
    }
}
