use hamsim_core::coloring::{coin_toss_levels, CoinTossSequence};

fn columns(start: &[&str]) -> Vec<Vec<String>> {
    let seq = CoinTossSequence::from_strings(start).unwrap();
    coin_toss_levels(&seq, 4)
        .unwrap()
        .iter()
        .map(|level| level.to_strings())
        .collect()
}

fn owned(rows: &[&str]) -> Vec<String> {
    rows.iter().map(|s| s.to_string()).collect()
}

const CHAIN: [&str; 6] = [
    "001011100110011010",
    "010110101010011011",
    "011011101110101101",
    "101011101011110100",
    "101011101011110101",
    "111000010110011010",
];

#[test]
fn six_element_chain_from_its_lowest_vertex() {
    let levels = columns(&CHAIN);
    assert_eq!(levels[0], owned(&CHAIN));
    assert_eq!(
        levels[1],
        owned(&["000001", "000010", "000000", "010001", "000001", "100000"])
    );
    assert_eq!(
        levels[2],
        owned(&["0100", "1100", "0001", "1001", "0000", "1000"])
    );
    assert_eq!(
        levels[3],
        owned(&["000", "100", "000", "100", "000", "100"])
    );
    assert_eq!(
        levels[4],
        owned(&["000", "100", "000", "100", "000", "100"])
    );
    assert_eq!(levels[4][0], "000");
}

#[test]
fn same_chain_seen_from_the_previous_vertex() {
    let mut start = vec!["000010010110111001"];
    start.extend_from_slice(&CHAIN[..5]);
    let levels = columns(&start);
    assert_eq!(
        levels[1],
        owned(&["000010", "000001", "000010", "000000", "010001", "100000"])
    );
    assert_eq!(
        levels[2],
        owned(&["1100", "0100", "1100", "0001", "0000", "1000"])
    );
    assert_eq!(
        levels[3],
        owned(&["100", "000", "100", "111", "000", "100"])
    );
    assert_eq!(
        levels[4],
        owned(&["100", "000", "001", "100", "000", "100"])
    );
    // adjacent edges of the chain end with different labels
    assert_ne!(levels[4][0], columns(&CHAIN)[4][0]);
}

#[test]
fn adjacent_values_stay_distinct_at_every_level() {
    let mut earlier = vec!["000010010110111001"];
    earlier.extend_from_slice(&CHAIN[..5]);
    for levels in [columns(&CHAIN), columns(&earlier)] {
        for level in &levels {
            for pair in level.windows(2) {
                assert_ne!(pair[0], pair[1]);
            }
        }
    }
}
