use super::TimingRecord;

const EPISODES: usize = 3000;

const TABLE1: [(usize, usize, f64); 26] = [
    (1, 5, 305.8),
    (2, 5, 170.8),
    (4, 5, 88.5),
    (6, 5, 59.7),
    (8, 5, 47.3),
    (10, 5, 38.3),
    (12, 5, 32.4),
    (1, 2, 289.6),
    (2, 2, 156.3),
    (4, 2, 80.0),
    (6, 2, 53.4),
    (8, 2, 40.8),
    (10, 2, 33.2),
    (20, 2, 17.7),
    (30, 2, 12.4),
    (1, 1, 225.2),
    (2, 1, 123.7),
    (4, 1, 64.6),
    (6, 1, 44.4),
    (8, 1, 33.9),
    (10, 1, 26.3),
    (20, 1, 14.2),
    (30, 1, 9.6),
    (40, 1, 9.0),
    (50, 1, 8.1),
    (60, 1, 7.6),
];

/// (envs, baseline, disabled, optimized) hours at one rank.
const TABLE2: [(usize, f64, f64, f64); 11] = [
    (1, 225.2, 193.1, 200.0),
    (2, 123.7, 104.7, 103.8),
    (4, 64.6, 53.4, 52.1),
    (6, 44.4, 35.5, 35.7),
    (8, 33.9, 26.3, 26.7),
    (10, 26.3, 21.3, 21.5),
    (20, 14.2, 11.3, 11.3),
    (30, 9.6, 7.9, 8.3),
    (40, 9.0, 6.4, 6.3),
    (50, 8.1, 5.5, 5.3),
    (60, 7.6, 4.8, 4.8),
];

/// Measured hours for 3000 episodes on a 64-core host with a full CFD solver, baseline I/O,
/// grouped by rank count (5, 2, 1).
pub fn reference_table1() -> Vec<TimingRecord> {
    TABLE1
        .iter()
        .map(|&(envs, ranks, hours)| TimingRecord::new(EPISODES, envs, ranks, hours, "baseline"))
        .collect()
}

/// Measured hours at one rank under each I/O strategy, in baseline, disabled, optimized order.
pub fn reference_table2() -> Vec<TimingRecord> {
    let column = |label: &'static str, pick: fn(&(usize, f64, f64, f64)) -> f64| {
        TABLE2
            .iter()
            .map(move |row| TimingRecord::new(EPISODES, row.0, 1, pick(row), label))
    };
    column("baseline", |r| r.1)
        .chain(column("disabled", |r| r.2))
        .chain(column("optimized", |r| r.3))
        .collect()
}
