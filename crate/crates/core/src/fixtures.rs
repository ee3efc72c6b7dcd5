//! Reference configurations used by tests, benches and the CLI.

use crate::incidence::Configuration;

pub const TABLE_17_4: &str = include_str!("../fixtures/table_17_4.txt");
pub const TABLE_18_4_FIRST: &str = include_str!("../fixtures/table_18_4_first.txt");
pub const TABLE_18_4_SECOND: &str = include_str!("../fixtures/table_18_4_second.txt");

/// Rows of a table file, comments stripped.
pub fn table_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.split_whitespace().map(String::from).collect())
        .collect()
}

/// The unique topological (17_4).
pub fn config_17_4() -> Configuration {
    Configuration::parse_table(TABLE_17_4).expect("fixture is valid")
}

/// Geometric (18_4) whose automorphism group is the symmetric group on 4 letters.
pub fn first_18_4() -> Configuration {
    Configuration::parse_table(TABLE_18_4_FIRST).expect("fixture is valid")
}

/// Geometric (18_4) with an automorphism group of order 2.
pub fn second_18_4() -> Configuration {
    Configuration::parse_table(TABLE_18_4_SECOND).expect("fixture is valid")
}

/// Fano plane: points are the nonzero vectors of GF(2)^3, lines the triples
/// `{a, b, a ^ b}`.
pub fn fano() -> Configuration {
    let mut lines: Vec<Vec<usize>> = Vec::new();
    for a in 1..8usize {
        for b in a + 1..8 {
            let c = a ^ b;
            if c > b {
                lines.push(vec![a - 1, b - 1, c - 1]);
            }
        }
    }
    Configuration::new(7, 3, lines).expect("fano plane is a (7_3)")
}

/// Möbius-Kantor (8_3): lines `{i, i+1, i+3} mod 8`.
pub fn mobius_kantor() -> Configuration {
    let lines = (0..8).map(|i| vec![i, (i + 1) % 8, (i + 3) % 8]).collect();
    Configuration::new(8, 3, lines).expect("cyclic (8_3)")
}

/// Pappus (9_3). Points: A1 A2 A3 B1 B2 B3 X Y Z = 0..9 where
/// X = A1B2.A2B1, Y = A1B3.A3B1, Z = A2B3.A3B2.
pub fn pappus() -> Configuration {
    let lines = vec![
        vec![0, 1, 2],
        vec![3, 4, 5],
        vec![0, 4, 6],
        vec![1, 3, 6],
        vec![0, 5, 7],
        vec![2, 3, 7],
        vec![1, 5, 8],
        vec![2, 4, 8],
        vec![6, 7, 8],
    ];
    Configuration::new(9, 3, lines).expect("pappus is a (9_3)")
}

/// Projective plane of order 3 as a (13_4): points are normalized vectors of
/// GF(3)^3, lines their orthogonal complements.
pub fn projective_plane_3() -> Configuration {
    let mut points: Vec<[u8; 3]> = Vec::new();
    for x in 0..3u8 {
        for y in 0..3u8 {
            for z in 0..3u8 {
                let v = [x, y, z];
                // First nonzero coordinate equal to 1.
                if let Some(&lead) = v.iter().find(|&&c| c != 0) {
                    if lead == 1 {
                        points.push(v);
                    }
                }
            }
        }
    }
    let lines = points
        .iter()
        .map(|l| {
            points
                .iter()
                .enumerate()
                .filter(|(_, p)| (0..3).map(|i| l[i] as u32 * p[i] as u32).sum::<u32>() % 3 == 0)
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    Configuration::new(13, 4, lines).expect("PG(2,3) is a (13_4)")
}
