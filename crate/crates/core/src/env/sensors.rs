use std::sync::OnceLock;

use crate::rng::SplitMix64;

pub const SENSOR_SEED: u64 = 42;
/// Surrogate quantities every probe mixes: `x`, `y`, jet velocity and drag excess.
pub const SENSOR_INPUTS: usize = 4;

/// Fixed linear map from surrogate state to probe readings.
///
/// Entries are SplitMix64 draws in [−1, 1], filled row-major from seed 42, then each row is
/// scaled to unit Euclidean norm. The construction is exact IEEE arithmetic so any
/// implementation following it reproduces the matrix bit-for-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorMatrix {
    rows: Vec<[f64; SENSOR_INPUTS]>,
}

impl SensorMatrix {
    pub fn generate(probes: usize, seed: u64) -> Self {
        let mut rng = SplitMix64::new(seed);
        let rows = (0..probes)
            .map(|_| {
                let mut row = [0.0; SENSOR_INPUTS];
                for v in row.iter_mut() {
                    *v = rng.next_signed_unit();
                }
                let mut acc = 0.0;
                for v in row {
                    acc += v * v;
                }
                let norm = acc.sqrt();
                row.map(|v| v / norm)
            })
            .collect();
        SensorMatrix { rows }
    }

    /// The shared default-dimension matrix.
    pub fn standard() -> &'static SensorMatrix {
        static STANDARD: OnceLock<SensorMatrix> = OnceLock::new();
        STANDARD.get_or_init(|| SensorMatrix::generate(super::OBS_DIM, SENSOR_SEED))
    }

    pub fn probes(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[f64; SENSOR_INPUTS] {
        &self.rows[i]
    }

    pub fn apply(&self, input: &[f64; SENSOR_INPUTS]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r[0] * input[0] + r[1] * input[1] + r[2] * input[2] + r[3] * input[3])
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Bit patterns produced by an independent Python implementation of the same recipe.
    const ROW_0: [u64; 4] = [
        0x3fdf168decd5c4ed,
        0xbfe5e24436dab0ea,
        0xbfdc7e2b27d0ae0c,
        0xbfd40d43f7b27f15,
    ];
    const ROW_1: [u64; 4] = [
        0xbfe486c143ef689c,
        0x3fe05c792a4f7a25,
        0xbfd90618bf93b791,
        0x3fdab72d711b1acf,
    ];
    const ROW_148: [u64; 4] = [
        0xbfe2b79e93a16aa1,
        0xbfd4c3455ab966be,
        0xbfe7c6e23a5ae4bb,
        0xbf97bd478c8da24f,
    ];
    const FOLD: u64 = 0xacb826fcd8b87027;

    #[test]
    fn matches_reference_bits() {
        let m = SensorMatrix::standard();
        assert_eq!(m.probes(), 149);
        for (i, expected) in [(0, ROW_0), (1, ROW_1), (148, ROW_148)] {
            assert_eq!(m.row(i).map(f64::to_bits), expected, "row {i}");
        }
        let fold = (0..m.probes())
            .flat_map(|i| m.row(i).to_vec())
            .fold(0u64, |acc, v| acc.wrapping_mul(31).wrapping_add(v.to_bits()));
        assert_eq!(fold, FOLD);
    }

    #[test]
    fn rows_have_unit_norm() {
        let m = SensorMatrix::generate(149, 7);
        for i in 0..m.probes() {
            let n: f64 = m.row(i).iter().map(|v| v * v).sum();
            assert!((n - 1.0).abs() < 1e-14);
        }
    }
}
