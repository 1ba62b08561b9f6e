//! The six-user, three-server worked example on the `sec4a` array, with the
//! fixed randomness and the queries it must produce.

pub const SERVERS: usize = 3;
pub const FILES: usize = 6;
pub const DEMANDS: [usize; 6] = [3, 1, 0, 4, 5, 1];

/// `V^k` for users 1..=6.
pub const RANDOMNESS: [[u32; 5]; 6] = [
    [1, 0, 1, 2, 0],
    [0, 1, 1, 0, 1],
    [1, 2, 2, 0, 2],
    [0, 0, 1, 2, 2],
    [0, 0, 1, 0, 2],
    [0, 1, 0, 1, 0],
];

/// `QUERIES[k][b]` is `Q_b^{k+1}`.
pub const QUERIES: [[[u32; 6]; 3]; 6] = [
    [[1, 0, 1, 2, 2, 0], [1, 0, 1, 0, 2, 0], [1, 0, 1, 1, 2, 0]],
    [[0, 0, 1, 1, 0, 1], [0, 1, 1, 1, 0, 1], [0, 2, 1, 1, 0, 1]],
    [[2, 1, 2, 2, 0, 2], [0, 1, 2, 2, 0, 2], [1, 1, 2, 2, 0, 2]],
    [[0, 0, 1, 2, 1, 2], [0, 0, 1, 2, 2, 2], [0, 0, 1, 2, 0, 2]],
    [[0, 0, 1, 0, 2, 0], [0, 0, 1, 0, 2, 1], [0, 0, 1, 0, 2, 2]],
    [[0, 1, 1, 0, 1, 0], [0, 2, 1, 0, 1, 0], [0, 0, 1, 0, 1, 0]],
];

pub fn randomness() -> Vec<Vec<u32>> {
    RANDOMNESS.iter().map(|v| v.to_vec()).collect()
}

/// The answers for label 1: `ANSWERS_S1[b]` lists, for subfiles 1..=3, the
/// packet index taken from each file `n ∈ [0:5]`.
pub const ANSWERS_S1: [[(usize, [usize; 6]); 3]; 3] = [
    [
        (1, [2, 1, 2, 2, 0, 2]),
        (2, [0, 0, 1, 1, 0, 1]),
        (3, [1, 0, 1, 2, 2, 0]),
    ],
    [
        (1, [0, 1, 2, 2, 0, 2]),
        (2, [0, 1, 1, 1, 0, 1]),
        (3, [1, 0, 1, 0, 2, 0]),
    ],
    [
        (1, [1, 1, 2, 2, 0, 2]),
        (2, [0, 2, 1, 1, 0, 1]),
        (3, [1, 0, 1, 1, 2, 0]),
    ],
];

/// 1-based `K_s` of the `sec3a` array, `s = 1..=11`.
pub const SEC3A_OCCUPANCY: [&[usize]; 11] = [
    &[1, 4, 6],
    &[2, 5, 7],
    &[3],
    &[1, 4, 8],
    &[2, 5, 8],
    &[3],
    &[1, 6],
    &[2, 7],
    &[3],
    &[4, 6, 8],
    &[5, 7],
];

/// 1-based `K_s` of the `sec4a` array, `s = 1..=4`.
pub const SEC4A_OCCUPANCY: [&[usize]; 4] = [&[1, 2, 3], &[1, 4, 5], &[2, 4, 6], &[3, 5, 6]];
