//! Constructors for the PDA families used throughout the crate, and the two
//! worked-example arrays kept as built-in constants.

use std::collections::{BTreeMap, HashMap};

use itertools::Itertools;

use crate::error::PdaError;
use crate::pda::{Cell, Pda, PdaArray};

/// Parameters of the Maddah-Ali–Niesen PDA: `K` users, cache parameter
/// `t = KM/N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ManParams {
    pub k: usize,
    pub t: usize,
}

impl ManParams {
    pub fn new(k: usize, t: usize) -> Result<Self, PdaError> {
        if k == 0 {
            return Err(PdaError::Parameters("K must be positive".into()));
        }
        if t > k {
            return Err(PdaError::Parameters(format!("t={t} outside [0:{k}]")));
        }
        Ok(Self { k, t })
    }
}

/// The MAN PDA. Rows are the `t`-subsets of `[K]` in lexicographic order;
/// cell `(T, k)` is a star when `k ∈ T`, otherwise the 1-based lexicographic
/// rank of `T ∪ {k}` among the `(t+1)`-subsets.
///
/// For `t = K` the result is the single all-star row with `S = 0`
/// ([`Pda::is_full_cache`]).
pub fn man_pda(params: ManParams) -> Result<Pda, PdaError> {
    let ManParams { k, t } = ManParams::new(params.k, params.t)?;
    let rank: HashMap<Vec<usize>, u32> = (0..k)
        .combinations(t + 1)
        .enumerate()
        .map(|(i, set)| (set, i as u32 + 1))
        .collect();
    let rows: Vec<Vec<usize>> = (0..k).combinations(t).collect();
    let grid: Vec<Vec<Cell>> = rows
        .iter()
        .map(|row| {
            (0..k)
                .map(|user| {
                    if row.contains(&user) {
                        Cell::Star
                    } else {
                        let mut set = row.clone();
                        set.push(user);
                        set.sort_unstable();
                        Cell::Int(rank[&set])
                    }
                })
                .collect()
        })
        .collect();
    let z = rows.iter().filter(|r| r.contains(&0)).count();
    let f = rows.len();
    PdaArray::from_rows(k, f, z, rank.len(), grid)?.into_pda()
}

/// The one-column PDA of the single-user case: `Z` stars on top, then the
/// integers `1..=F−Z`.
pub fn single_user_pda(f: usize, z: usize) -> Result<Pda, PdaError> {
    if f == 0 {
        return Err(PdaError::Parameters("F must be positive".into()));
    }
    if z > f {
        return Err(PdaError::Parameters(format!("Z={z} exceeds F={f}")));
    }
    let grid = (0..f)
        .map(|row| {
            if row < z {
                vec![Cell::Star]
            } else {
                vec![Cell::Int((row - z + 1) as u32)]
            }
        })
        .collect();
    PdaArray::from_rows(1, f, z, f - z, grid)?.into_pda()
}

/// The `(1,1,0,1)` PDA: one user, no cache.
pub fn trivial_pda() -> Pda {
    single_user_pda(1, 0).expect("trivial PDA is valid")
}

/// The irregular `(8,6,3,11)` example array.
///
/// Its widely reproduced form ([`SEC3A_PRINTED_TEXT`]) has label 2 at
/// (1,7) and (2,5), which leaves cell (2,5) occupied where label 5 needs a
/// star. Moving those two entries to (1,5) and (2,7) is the only repair
/// touching at most two columns; every `K_s` is unchanged.
pub const SEC3A_TEXT: &str = "8 6 3 11
* * * * 2 1 * 4
* * * 1 * * 2 5
* * * 4 5 7 8 *
1 2 3 * * * * 10
4 5 6 * * 10 11 *
7 8 9 10 11 * * *
";

/// The example array exactly as usually printed. It fails C3b.
pub const SEC3A_PRINTED_TEXT: &str = "8 6 3 11
* * * * * 1 2 4
* * * 1 2 * * 5
* * * 4 5 7 8 *
1 2 3 * * * * 10
4 5 6 * * 10 11 *
7 8 9 10 11 * * *
";

/// The 3-regular `(6,4,2,4)` array of the end-to-end worked example.
pub const SEC4A_TEXT: &str = "6 4 2 4
* * 1 * 2 3
* 1 * 2 * 4
1 * * 3 4 *
2 3 4 * * *
";

pub const CATALOG_NAMES: [&str; 3] = ["sec3a", "sec4a", "trivial"];

/// Built-in example arrays keyed by name.
pub fn example_pdas() -> BTreeMap<&'static str, Pda> {
    CATALOG_NAMES
        .iter()
        .map(|&name| (name, catalog(name).expect("catalog entry")))
        .collect()
}

pub fn catalog(name: &str) -> Result<Pda, PdaError> {
    match name {
        "sec3a" => Pda::parse(SEC3A_TEXT),
        "sec4a" => Pda::parse(SEC4A_TEXT),
        "trivial" => Ok(trivial_pda()),
        other => Err(PdaError::UnknownCatalog(other.to_string())),
    }
}
