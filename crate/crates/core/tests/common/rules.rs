//! Reads a 52-character genome string directly, writes each side out as boolean
//! expression text, and evaluates that text against one day's signal bits.

const GROUPS: [std::ops::Range<usize>; 2] = [0..4, 4..9];

/// e.g. `(s1=0 & s2=1) | (s5=1)`; empty when the side has no active indicator.
pub fn expression(genome: &str, sell: bool) -> String {
    let bits: Vec<bool> = genome.bytes().map(|b| b == b'1').collect();
    assert_eq!(bits.len(), 52);
    let offset = if sell { 26 } else { 0 };
    let required = &bits[offset..offset + 9];
    let active = &bits[offset + 17..offset + 26];
    GROUPS
        .iter()
        .filter_map(|group| {
            let literals: Vec<String> = group
                .clone()
                .filter(|&k| active[k])
                .map(|k| format!("s{}={}", k, required[k] as u8))
                .collect();
            (!literals.is_empty()).then(|| format!("({})", literals.join(" & ")))
        })
        .collect::<Vec<_>>()
        .join(" | ")
}

/// Evaluates expression text where `sK=V` is true iff bit `K` of `signal` equals `V`.
pub fn evaluate(expr: &str, signal: u16) -> bool {
    if expr.trim().is_empty() {
        return false;
    }
    expr.split('|').any(|clause| {
        clause
            .trim()
            .trim_start_matches('(')
            .trim_end_matches(')')
            .split('&')
            .all(|lit| {
                let (k, v) = lit.trim().trim_start_matches('s').split_once('=').unwrap();
                let k: u32 = k.parse().unwrap();
                let v: u16 = v.parse().unwrap();
                (signal >> k) & 1 == v
            })
    })
}

/// `+1`, `-1` or `0` for one day.
pub fn final_signal(genome: &str, buy_bits: u16, sell_bits: u16) -> i8 {
    let buy = evaluate(&expression(genome, false), buy_bits);
    let sell = evaluate(&expression(genome, true), sell_bits);
    match (buy, sell) {
        (true, false) => 1,
        (false, true) => -1,
        _ => 0,
    }
}
