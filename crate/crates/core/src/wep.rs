//! Words of estimative probability.
//!
//! A probability maps to the phrase whose anchor is closest, with ties broken
//! uniformly at random. With a small fixed rate the phrase comes from the
//! second-closest anchors instead. "about even" is never used below 0.45.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum WepError {
    #[error("ProbabilityOutOfRange: {0} is not in [0, 1]")]
    OutOfRange(f64),
    #[error("UnknownPhrase: `{0}` is not a known estimative phrase")]
    UnknownPhrase(String),
    #[error("InvalidDistribution: {0}")]
    InvalidDistribution(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WepEntry {
    pub phrase: &'static str,
    pub anchor: f64,
    /// Survey spread, kept for reference only.
    pub spread: Option<f64>,
}

const fn entry(phrase: &'static str, anchor: f64, spread: Option<f64>) -> WepEntry {
    WepEntry {
        phrase,
        anchor,
        spread,
    }
}

pub const WEP_TABLE: [WepEntry; 17] = [
    entry("certain", 1.0, None),
    entry("almost certain", 0.95, Some(0.109)),
    entry("highly likely", 0.90, Some(0.084)),
    entry("very good chance", 0.80, Some(0.108)),
    entry("likely", 0.70, Some(0.113)),
    entry("probably", 0.70, Some(0.129)),
    entry("probable", 0.70, Some(0.147)),
    entry("better than even", 0.60, Some(0.091)),
    entry("about even", 0.50, Some(0.049)),
    entry("probably not", 0.25, Some(0.144)),
    entry("unlikely", 0.20, Some(0.150)),
    entry("little chance", 0.10, Some(0.122)),
    entry("chances are slight", 0.10, Some(0.109)),
    entry("improbable", 0.10, Some(0.175)),
    entry("highly unlikely", 0.05, Some(0.173)),
    entry("almost no chance", 0.02, Some(0.170)),
    entry("impossible", 0.0, None),
];

/// Rate at which the second-closest phrases are used.
pub const SECOND_CLOSEST_RATE: f64 = 0.10;

/// Below this, "about even" is replaced by "probably not".
pub const ABOUT_EVEN_FLOOR: f64 = 0.45;

/// Phrase used when every state of a variable is equally probable.
pub const EQUALLY_LIKELY: &str = "equally likely";

const TIE_TOLERANCE: f64 = 1e-9;
const ABOUT_EVEN: usize = 8;
const PROBABLY_NOT: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WepSelection {
    pub phrase: &'static str,
    pub used_second_closest: bool,
}

/// Table indices at the smallest and second-smallest distance from `p`.
fn candidate_sets(p: f64) -> (Vec<usize>, Vec<usize>) {
    let mut distances: Vec<f64> = WEP_TABLE.iter().map(|e| (p - e.anchor).abs()).collect();
    let nearest = distances.iter().copied().fold(f64::INFINITY, f64::min);
    let primary: Vec<usize> = (0..WEP_TABLE.len())
        .filter(|&i| distances[i] - nearest <= TIE_TOLERANCE)
        .collect();
    for &i in &primary {
        distances[i] = f64::INFINITY;
    }
    let runner_up = distances.iter().copied().fold(f64::INFINITY, f64::min);
    let secondary = (0..WEP_TABLE.len())
        .filter(|&i| distances[i] - runner_up <= TIE_TOLERANCE)
        .collect();
    (primary, secondary)
}

fn apply_floor(p: f64, index: usize) -> usize {
    if index == ABOUT_EVEN && p < ABOUT_EVEN_FLOOR {
        PROBABLY_NOT
    } else {
        index
    }
}

fn check_probability(p: f64) -> Result<(), WepError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(WepError::OutOfRange(p))
    }
}

/// [`prob_to_wep_with_rate`] at [`SECOND_CLOSEST_RATE`].
pub fn prob_to_wep<R: Rng + ?Sized>(p: f64, rng: &mut R) -> Result<WepSelection, WepError> {
    prob_to_wep_with_rate(p, rng, SECOND_CLOSEST_RATE)
}

/// Picks a phrase for `p`. Exactly 0 and 1 are deterministic and consume no
/// randomness; any other value consumes exactly two draws.
pub fn prob_to_wep_with_rate<R: Rng + ?Sized>(
    p: f64,
    rng: &mut R,
    second_closest_rate: f64,
) -> Result<WepSelection, WepError> {
    check_probability(p)?;
    if p == 1.0 || p == 0.0 {
        return Ok(WepSelection {
            phrase: if p == 1.0 { "certain" } else { "impossible" },
            used_second_closest: false,
        });
    }
    let (primary, secondary) = candidate_sets(p);
    let second = rng.gen::<f64>() < second_closest_rate;
    let set = if second { &secondary } else { &primary };
    let pick = set[rng.gen_range(0..set.len())];
    Ok(WepSelection {
        phrase: WEP_TABLE[apply_floor(p, pick)].phrase,
        used_second_closest: second,
    })
}

/// Anchor of the closest phrase, after the "about even" floor. Ties resolve
/// to the largest anchor.
pub fn primary_anchor(p: f64) -> Result<f64, WepError> {
    check_probability(p)?;
    let (primary, _) = candidate_sets(p);
    Ok(primary
        .into_iter()
        .map(|i| WEP_TABLE[apply_floor(p, i)].anchor)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Anchor of a phrase, ignoring case and surrounding whitespace.
pub fn wep_to_prob(phrase: &str) -> Result<f64, WepError> {
    let wanted = phrase.trim().to_lowercase();
    WEP_TABLE
        .iter()
        .find(|e| e.phrase == wanted)
        .map(|e| e.anchor)
        .ok_or_else(|| WepError::UnknownPhrase(phrase.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verbalization {
    /// Every state has the same probability.
    EquallyLikely,
    Phrases {
        selections: Vec<WepSelection>,
        /// Indices of the most probable states, present when even the most
        /// probable state only earns a low-probability phrase.
        most_likely: Option<Vec<usize>>,
    },
}

/// Largest anchor that still triggers the most-likely note.
pub const LOW_ANCHOR: f64 = 0.25;

/// [`verbalize_distribution_with_rate`] at [`SECOND_CLOSEST_RATE`].
pub fn verbalize_distribution<R: Rng + ?Sized>(
    distribution: &[f64],
    rng: &mut R,
) -> Result<Verbalization, WepError> {
    verbalize_distribution_with_rate(distribution, rng, SECOND_CLOSEST_RATE)
}

/// Phrases for each state of one distribution. The second-closest rule is
/// applied independently per state.
pub fn verbalize_distribution_with_rate<R: Rng + ?Sized>(
    distribution: &[f64],
    rng: &mut R,
    second_closest_rate: f64,
) -> Result<Verbalization, WepError> {
    if distribution.len() < 2 {
        return Err(WepError::InvalidDistribution(
            "at least two states are required".into(),
        ));
    }
    for &p in distribution {
        check_probability(p)?;
    }
    let sum: f64 = distribution.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(WepError::InvalidDistribution(format!(
            "probabilities sum to {sum}"
        )));
    }
    let max = distribution.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = distribution.iter().copied().fold(f64::INFINITY, f64::min);
    if max - min <= TIE_TOLERANCE {
        return Ok(Verbalization::EquallyLikely);
    }
    let selections = distribution
        .iter()
        .map(|&p| prob_to_wep_with_rate(p, rng, second_closest_rate))
        .collect::<Result<Vec<_>, _>>()?;
    let most_likely = (primary_anchor(max)? <= LOW_ANCHOR).then(|| {
        (0..distribution.len())
            .filter(|&i| max - distribution[i] <= TIE_TOLERANCE)
            .collect()
    });
    Ok(Verbalization::Phrases {
        selections,
        most_likely,
    })
}
