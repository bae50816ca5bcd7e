//! 52-bit strategy chromosomes.
//!
//! Layout, per half (buy then sell), 26 bits each:
//!
//! ```text
//! [required: 9][connectors: 8][active: 9]
//! ```
//!
//! Connectors are fixed: `AND` inside the momentum and reversal groups, `OR`
//! between them. They are stored normalized and never varied, which leaves 36
//! decision bits (required + active for both halves). Required bits of inactive
//! indicators are latent: they take part in variation but not in the rule.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::GenomeError;
use crate::indicators::{IndicatorGroup, IndicatorKind, SignalMatrix};

pub const GENOME_LEN: usize = 52;
pub const DECISION_BITS: usize = 36;
const HALF_LEN: usize = 26;
const CONNECTORS: usize = 8;
const ALL_MASK: u16 = (1 << IndicatorKind::COUNT) - 1;
const MOMENTUM_MASK: u16 = (1 << IndicatorKind::MOMENTUM_COUNT) - 1;
const REVERSAL_MASK: u16 = ALL_MASK & !MOMENTUM_MASK;

/// Normalized connector pattern; `true` is AND, `false` is OR.
pub const CONNECTOR_PATTERN: [bool; CONNECTORS] = [true, true, true, false, true, true, true, true];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Buy,
    Sell,
}

impl Side {
    fn suffix(self) -> &'static str {
        match self {
            Side::Buy => "buy",
            Side::Sell => "sell",
        }
    }
}

/// Required/active masks for one half; bit `k` is indicator `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct HalfBits {
    pub required: u16,
    pub active: u16,
}

impl HalfBits {
    fn expressed(self) -> Self {
        Self {
            required: self.required & self.active,
            active: self.active,
        }
    }

    /// OR of the two group conjunctions against one day's signal bits.
    fn fires(self, signal: u16) -> bool {
        let mismatch = (signal ^ self.required) & self.active;
        let momentum = self.active & MOMENTUM_MASK;
        let reversal = self.active & REVERSAL_MASK;
        (momentum != 0 && mismatch & momentum == 0) || (reversal != 0 && mismatch & reversal == 0)
    }
}

/// A strategy chromosome. Always has at least one active indicator per half.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Genome {
    buy: HalfBits,
    sell: HalfBits,
}

impl Genome {
    pub fn new(buy: HalfBits, sell: HalfBits) -> Result<Self, GenomeError> {
        let g = Self {
            buy: HalfBits {
                required: buy.required & ALL_MASK,
                active: buy.active & ALL_MASK,
            },
            sell: HalfBits {
                required: sell.required & ALL_MASK,
                active: sell.active & ALL_MASK,
            },
        };
        if g.buy.active == 0 || g.sell.active == 0 {
            return Err(GenomeError::InvalidGenome(
                "each half needs at least one active indicator".into(),
            ));
        }
        Ok(g)
    }

    pub fn buy(&self) -> HalfBits {
        self.buy
    }

    pub fn sell(&self) -> HalfBits {
        self.sell
    }

    /// Same genome with latent required bits cleared. Two genomes with the same
    /// canonical form decode to the same rules.
    pub fn canonical(&self) -> Self {
        Self {
            buy: self.buy.expressed(),
            sell: self.sell.expressed(),
        }
    }

    /// Full 52-bit layout with normalized connectors.
    pub fn to_bits(&self) -> [bool; GENOME_LEN] {
        let mut bits = [false; GENOME_LEN];
        for (half, offset) in [(self.buy, 0), (self.sell, HALF_LEN)] {
            for k in 0..IndicatorKind::COUNT {
                bits[offset + k] = half.required >> k & 1 == 1;
                bits[offset + 17 + k] = half.active >> k & 1 == 1;
            }
            bits[offset + 9..offset + 17].copy_from_slice(&CONNECTOR_PATTERN);
        }
        bits
    }

    /// Parses a 52-bit layout. Connector bits are ignored and normalized.
    pub fn from_bits(bits: &[bool]) -> Result<Self, GenomeError> {
        if bits.len() != GENOME_LEN {
            return Err(GenomeError::InvalidGenome(format!(
                "expected {GENOME_LEN} bits, got {}",
                bits.len()
            )));
        }
        let half = |offset: usize| {
            let mut h = HalfBits::default();
            for k in 0..IndicatorKind::COUNT {
                h.required |= (bits[offset + k] as u16) << k;
                h.active |= (bits[offset + 17 + k] as u16) << k;
            }
            h
        };
        Self::new(half(0), half(HALF_LEN))
    }

    /// The 36 variable bits: buy required, buy active, sell required, sell active.
    pub fn decision_bits(&self) -> [bool; DECISION_BITS] {
        let mut out = [false; DECISION_BITS];
        for (i, word) in [self.buy.required, self.buy.active, self.sell.required, self.sell.active]
            .into_iter()
            .enumerate()
        {
            for k in 0..IndicatorKind::COUNT {
                out[i * 9 + k] = word >> k & 1 == 1;
            }
        }
        out
    }

    fn from_decision_unchecked(bits: &[bool; DECISION_BITS]) -> Self {
        let word = |i: usize| {
            (0..IndicatorKind::COUNT).fold(0u16, |acc, k| acc | (bits[i * 9 + k] as u16) << k)
        };
        Self {
            buy: HalfBits {
                required: word(0),
                active: word(1),
            },
            sell: HalfBits {
                required: word(2),
                active: word(3),
            },
        }
    }

    /// Both halves have at least one active indicator.
    pub fn is_valid(&self) -> bool {
        self.buy.active != 0 && self.sell.active != 0
    }

    /// Activates one random indicator in any half left without one.
    fn repair<R: Rng + ?Sized>(mut self, rng: &mut R) -> Self {
        for half in [&mut self.buy, &mut self.sell] {
            if half.active == 0 {
                half.active = 1 << rng.gen_range(0..IndicatorKind::COUNT);
            }
        }
        self
    }

    /// Final signal on day `t` of `signals`.
    pub fn eval_day(&self, signals: &SignalMatrix, t: usize) -> FinalSignal {
        FinalSignal::from_sides(
            self.buy.fires(signals.buy_bits(t)),
            self.sell.fires(signals.sell_bits(t)),
        )
    }

    /// Final signal for every day of `signals`.
    pub fn signal_series(&self, signals: &SignalMatrix) -> Vec<FinalSignal> {
        (0..signals.len()).map(|t| self.eval_day(signals, t)).collect()
    }
}

impl fmt::Display for Genome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.to_bits() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Genome {
    type Err = GenomeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(GenomeError::InvalidGenome(format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_bits(&bits)
    }
}

impl Serialize for Genome {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Genome {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One literal of a clause: indicator `kind` must show `required`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Literal {
    pub kind: IndicatorKind,
    pub required: bool,
}

/// Decoded rule for one side: `(momentum AND-clause) OR (reversal AND-clause)`.
/// An empty clause is false.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct RuleSide {
    pub momentum: Vec<Literal>,
    pub reversal: Vec<Literal>,
}

impl RuleSide {
    /// Builds a rule from literals in any order, sorting them into their groups.
    pub fn from_literals(literals: impl IntoIterator<Item = Literal>) -> Self {
        let mut rule = RuleSide::default();
        let mut seen: Vec<Literal> = literals.into_iter().collect();
        seen.sort_by_key(|l| l.kind);
        seen.dedup_by_key(|l| l.kind);
        for lit in seen {
            match lit.kind.group() {
                IndicatorGroup::Momentum => rule.momentum.push(lit),
                IndicatorGroup::Reversal => rule.reversal.push(lit),
            }
        }
        rule
    }

    pub fn clauses(&self) -> [&[Literal]; 2] {
        [&self.momentum, &self.reversal]
    }

    pub fn is_empty(&self) -> bool {
        self.momentum.is_empty() && self.reversal.is_empty()
    }

    fn to_half(&self) -> HalfBits {
        let mut h = HalfBits::default();
        for lit in self.momentum.iter().chain(&self.reversal) {
            h.active |= 1 << lit.kind.index();
            h.required |= (lit.required as u16) << lit.kind.index();
        }
        h
    }

    fn from_half(h: HalfBits) -> Self {
        Self::from_literals(
            IndicatorKind::ALL
                .into_iter()
                .filter(|k| h.active >> k.index() & 1 == 1)
                .map(|kind| Literal {
                    kind,
                    required: h.required >> kind.index() & 1 == 1,
                }),
        )
    }

    /// Evaluates the rule against per-indicator signal values (masked cells are false).
    pub fn evaluate(&self, signal: impl Fn(IndicatorKind) -> bool) -> bool {
        self.clauses()
            .iter()
            .any(|clause| !clause.is_empty() && clause.iter().all(|l| signal(l.kind) == l.required))
    }

    /// `IF SMA_buy = 0.0 AND MO_buy = 1.0 OR sto_buy = 0.0` style text.
    pub fn render(&self, side: Side) -> String {
        let clauses: Vec<String> = self
            .clauses()
            .iter()
            .filter(|c| !c.is_empty())
            .map(|clause| {
                clause
                    .iter()
                    .map(|l| {
                        format!(
                            "{}_{} = {}",
                            l.kind.short_name(),
                            side.suffix(),
                            if l.required { "1.0" } else { "0.0" }
                        )
                    })
                    .collect::<Vec<_>>()
                    .join(" AND ")
            })
            .collect();
        format!("IF {}", clauses.join(" OR "))
    }
}

/// Decodes a genome into its buy and sell rules.
pub fn decode(g: &Genome) -> (RuleSide, RuleSide) {
    (RuleSide::from_half(g.buy), RuleSide::from_half(g.sell))
}

/// Encodes rules back to a genome; latent required bits are zero.
pub fn encode(buy: &RuleSide, sell: &RuleSide) -> Result<Genome, GenomeError> {
    Genome::new(buy.to_half(), sell.to_half())
}

/// Long, short or flat.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FinalSignal {
    Long,
    Short,
    Flat,
}

impl FinalSignal {
    pub fn from_sides(buy: bool, sell: bool) -> Self {
        match (buy, sell) {
            (true, false) => FinalSignal::Long,
            (false, true) => FinalSignal::Short,
            _ => FinalSignal::Flat,
        }
    }

    pub fn value(self) -> i8 {
        match self {
            FinalSignal::Long => 1,
            FinalSignal::Short => -1,
            FinalSignal::Flat => 0,
        }
    }
}

/// Final signal on day `t` for already-decoded rules.
pub fn eval_day(buy: &RuleSide, sell: &RuleSide, signals: &SignalMatrix, t: usize) -> FinalSignal {
    FinalSignal::from_sides(
        buy.evaluate(|k| signals.buy(t, k)),
        sell.evaluate(|k| signals.sell(t, k)),
    )
}

pub fn signal_series(g: &Genome, signals: &SignalMatrix) -> Vec<FinalSignal> {
    g.signal_series(signals)
}

/// Buy and sell rule text.
pub fn render_rules(g: &Genome) -> (String, String) {
    let (buy, sell) = decode(g);
    (buy.render(Side::Buy), sell.render(Side::Sell))
}

/// Uniform decision bits, resampled until both halves have an active indicator.
pub fn random_genome<R: Rng + ?Sized>(rng: &mut R) -> Genome {
    loop {
        let mut bits = [false; DECISION_BITS];
        for b in bits.iter_mut() {
            *b = rng.gen_bool(0.5);
        }
        let g = Genome::from_decision_unchecked(&bits);
        if g.is_valid() {
            return g;
        }
    }
}

/// Single-point exchange without repair: loci `< cut` are swapped between the parents.
/// Children may have an empty active half.
pub fn crossover_unrepaired(a: &Genome, b: &Genome, cut: usize) -> (Genome, Genome) {
    assert!(cut <= DECISION_BITS, "cut point out of range");
    let (da, db) = (a.decision_bits(), b.decision_bits());
    let mut c1 = da;
    let mut c2 = db;
    c1[..cut].copy_from_slice(&db[..cut]);
    c2[..cut].copy_from_slice(&da[..cut]);
    (
        Genome::from_decision_unchecked(&c1),
        Genome::from_decision_unchecked(&c2),
    )
}

/// Single-point crossover at `cut` followed by repair. `cut = 0` copies the parents.
pub fn crossover_at<R: Rng + ?Sized>(a: &Genome, b: &Genome, cut: usize, rng: &mut R) -> (Genome, Genome) {
    let (c1, c2) = crossover_unrepaired(a, b, cut);
    (c1.repair(rng), c2.repair(rng))
}

/// Single-point crossover at a uniform interior cut point.
pub fn crossover<R: Rng + ?Sized>(a: &Genome, b: &Genome, rng: &mut R) -> (Genome, Genome) {
    let cut = rng.gen_range(1..DECISION_BITS);
    crossover_at(a, b, cut, rng)
}

/// Flips the decision bit at `locus` without repair.
pub fn flip_unrepaired(g: &Genome, locus: usize) -> Genome {
    let mut bits = g.decision_bits();
    bits[locus] = !bits[locus];
    Genome::from_decision_unchecked(&bits)
}

/// With probability `rate`, flips one uniformly chosen decision bit, then repairs.
pub fn mutate<R: Rng + ?Sized>(g: &Genome, rng: &mut R, rate: f64) -> Genome {
    assert!((0.0..=1.0).contains(&rate), "mutation rate must be in [0, 1]");
    if !rng.gen_bool(rate) {
        return *g;
    }
    let locus = rng.gen_range(0..DECISION_BITS);
    flip_unrepaired(g, locus).repair(rng)
}
