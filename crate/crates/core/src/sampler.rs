//! Exact boson-sampling statistics.
//!
//! For `p` photons in `n` modes, the amplitude of an output occupation is a
//! permanent of a `p × p` matrix built from the interferometer unitary,
//! normalised by the factorials of both occupation patterns.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrices::{ComplexMatrix, UnitaryMatrix};

/// Maximum number of configurations any operation will enumerate.
pub const DEFAULT_ENUMERATION_CAP: usize = 10_000_000;

/// Largest matrix handled by [`permanent_ryser`].
pub const RYSER_MAX_SIZE: usize = 30;

/// Largest matrix handled by [`permanent_naive`].
pub const NAIVE_MAX_SIZE: usize = 8;

/// Photon counts per mode.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupationConfiguration {
    counts: Vec<usize>,
}

impl OccupationConfiguration {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::validation("an occupation needs at least one mode"));
        }
        Ok(Self { counts })
    }

    /// One photon in each of the first `p` of `n` modes.
    pub fn standard_input(n: usize, p: usize) -> Result<Self> {
        if p > n {
            return Err(Error::validation(format!(
                "cannot place {p} single photons in {n} modes"
            )));
        }
        Self::new((0..n).map(|i| usize::from(i < p)).collect())
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn modes(&self) -> usize {
        self.counts.len()
    }

    pub fn photons(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Mode index of every photon, in ascending order.
    pub fn photon_modes(&self) -> Vec<usize> {
        self.counts
            .iter()
            .enumerate()
            .flat_map(|(i, &k)| std::iter::repeat_n(i, k))
            .collect()
    }

    /// `∏ counts[i]!`.
    pub fn factorial_product(&self) -> f64 {
        self.counts
            .iter()
            .map(|&k| (1..=k).map(|x| x as f64).product::<f64>())
            .product()
    }
}

/// Space-separated counts, e.g. `2 0 1`.
impl fmt::Display for OccupationConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, k) in self.counts.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{k}")?;
        }
        Ok(())
    }
}

impl FromStr for OccupationConfiguration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let counts = s
            .split_whitespace()
            .map(|tok| {
                tok.parse::<usize>()
                    .map_err(|_| Error::validation(format!("invalid photon count {tok:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(counts)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableEntry {
    pub configuration: OccupationConfiguration,
    pub amplitude: Complex64,
    pub probability: f64,
}

/// Output distribution in lexicographic configuration order.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTable {
    entries: Vec<TableEntry>,
}

impl ProbabilityTable {
    /// Builds a table from amplitudes; probabilities are `|amplitude|²`.
    pub fn from_amplitudes(items: Vec<(OccupationConfiguration, Complex64)>) -> Result<Self> {
        let entries = items
            .into_iter()
            .map(|(configuration, amplitude)| TableEntry {
                configuration,
                amplitude,
                probability: amplitude.norm_sqr(),
            })
            .collect();
        Self::from_entries(entries)
    }

    /// Checks normalisation within `1e−9` and photon-number conservation.
    pub fn from_entries(entries: Vec<TableEntry>) -> Result<Self> {
        let Some(first) = entries.first() else {
            return Err(Error::validation("probability table is empty"));
        };
        let (n, p) = (first.configuration.modes(), first.configuration.photons());
        for e in &entries {
            if e.configuration.modes() != n || e.configuration.photons() != p {
                return Err(Error::validation(format!(
                    "configuration ({}) does not conserve {p} photons in {n} modes",
                    e.configuration
                )));
            }
            if !(e.probability.is_finite() && e.probability >= 0.0) {
                return Err(Error::validation("probabilities must be finite and nonnegative"));
            }
        }
        let total: f64 = entries.iter().map(|e| e.probability).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::validation(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[TableEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_probability(&self) -> f64 {
        self.entries.iter().map(|e| e.probability).sum()
    }

    pub fn probability_of(&self, config: &OccupationConfiguration) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| &e.configuration == config)
            .map(|e| e.probability)
    }

    /// Total variation distance; configurations missing from one side count
    /// as probability zero there.
    pub fn total_variation(&self, other: &ProbabilityTable) -> f64 {
        let mut diff: HashMap<&OccupationConfiguration, f64> = HashMap::new();
        for e in &self.entries {
            *diff.entry(&e.configuration).or_default() += e.probability;
        }
        for e in &other.entries {
            *diff.entry(&e.configuration).or_default() -= e.probability;
        }
        0.5 * diff.values().map(|d| d.abs()).sum::<f64>()
    }
}

/// `C(n + p − 1, p)`, or `None` on overflow.
pub fn configuration_count(n: usize, p: usize) -> Option<u128> {
    if n == 0 {
        return None;
    }
    let (top, k) = ((n + p - 1) as u128, p.min(n - 1) as u128);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(top - i)? / (i + 1);
    }
    Some(acc)
}

/// All weak compositions of `p` into `n` parts, lexicographically ordered.
pub fn enumerate_configurations(n: usize, p: usize) -> Result<Vec<OccupationConfiguration>> {
    enumerate_configurations_capped(n, p, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_configurations_capped(n: usize, p: usize, cap: usize) -> Result<Vec<OccupationConfiguration>> {
    if n == 0 {
        return Err(Error::validation("need at least one mode"));
    }
    let count = configuration_count(n, p)
        .filter(|&c| c <= cap as u128)
        .ok_or_else(|| Error::resource(format!("{p} photons in {n} modes exceeds the enumeration cap of {cap}")))?
        as usize;

    let mut out = Vec::with_capacity(count);
    let mut counts = vec![0usize; n];
    counts[n - 1] = p;
    loop {
        out.push(OccupationConfiguration { counts: counts.clone() });
        // Successor in lexicographic order: find the rightmost position
        // before the last with photons to its right, bump it, and push the
        // remainder to the final slot.
        let Some(i) = (0..n - 1).rev().find(|&i| counts[i + 1..].iter().any(|&c| c > 0)) else {
            break;
        };
        let rest: usize = counts[i + 1..].iter().sum();
        counts[i] += 1;
        for c in counts[i + 1..].iter_mut() {
            *c = 0;
        }
        counts[n - 1] = rest - 1;
    }
    debug_assert_eq!(out.len(), count);
    Ok(out)
}

fn check_square(m: &ComplexMatrix) -> Result<usize> {
    if !m.is_square() {
        return Err(Error::validation(format!(
            "permanent of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    Ok(m.rows())
}

/// Ryser's inclusion–exclusion formula, visiting column subsets in Gray-code
/// order so each step adds or removes one column from the running row sums.
pub fn permanent_ryser(m: &ComplexMatrix) -> Result<Complex64> {
    let k = check_square(m)?;
    if k > RYSER_MAX_SIZE {
        return Err(Error::resource(format!(
            "{k}x{k} permanent exceeds the {RYSER_MAX_SIZE}x{RYSER_MAX_SIZE} cap"
        )));
    }
    let zero = Complex64::new(0.0, 0.0);
    // Column-major copy so each Gray-code step touches contiguous memory.
    let columns: Vec<Vec<Complex64>> = (0..k).map(|j| (0..k).map(|i| m[(i, j)]).collect()).collect();
    let mut row_sums = vec![zero; k];
    let mut total = zero;
    let mut gray: u64 = 0;
    for step in 1u64..(1u64 << k) {
        let col = step.trailing_zeros() as usize;
        gray ^= 1 << col;
        let column = &columns[col];
        if gray & (1 << col) != 0 {
            row_sums.iter_mut().zip(column).for_each(|(s, x)| *s += x);
        } else {
            row_sums.iter_mut().zip(column).for_each(|(s, x)| *s -= x);
        }
        let prod: Complex64 = row_sums.iter().product();
        if gray.count_ones() & 1 == 0 {
            total += prod;
        } else {
            total -= prod;
        }
    }
    Ok(if k % 2 == 0 { total } else { -total })
}

/// Sum over all `k!` permutations.
pub fn permanent_naive(m: &ComplexMatrix) -> Result<Complex64> {
    let k = check_square(m)?;
    if k > NAIVE_MAX_SIZE {
        return Err(Error::resource(format!(
            "naive permanent limited to {NAIVE_MAX_SIZE}x{NAIVE_MAX_SIZE}, got {k}x{k}"
        )));
    }
    fn expand(m: &ComplexMatrix, row: usize, used: &mut [bool], acc: Complex64) -> Complex64 {
        if row == used.len() {
            return acc;
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for col in 0..used.len() {
            if !used[col] {
                used[col] = true;
                sum += expand(m, row + 1, used, acc * m[(row, col)]);
                used[col] = false;
            }
        }
        sum
    }
    Ok(expand(m, 0, &mut vec![false; k], Complex64::new(1.0, 0.0)))
}

fn check_pair(u: &ComplexMatrix, input: &OccupationConfiguration, output: &OccupationConfiguration) -> Result<usize> {
    let n = u.rows();
    if input.modes() != n || output.modes() != n {
        return Err(Error::validation(format!(
            "occupations over {} and {} modes do not match a {n}-mode unitary",
            input.modes(),
            output.modes()
        )));
    }
    let p = input.photons();
    if p != output.photons() {
        return Err(Error::validation(format!(
            "photon number mismatch: {p} in, {} out",
            output.photons()
        )));
    }
    if p == 0 {
        return Err(Error::validation("at least one photon is required"));
    }
    Ok(p)
}

/// Row `i` of `U` repeated `input[i]` times, column `j` repeated `output[j]` times.
pub fn scattering_submatrix(
    u: &UnitaryMatrix,
    input: &OccupationConfiguration,
    output: &OccupationConfiguration,
) -> Result<ComplexMatrix> {
    let p = check_pair(u, input, output)?;
    let (rows, cols) = (input.photon_modes(), output.photon_modes());
    Ok(ComplexMatrix::from_fn(p, p, |r, c| u[(rows[r], cols[c])]))
}

/// `Per(U_S) / √(∏ input! · ∏ output!)`.
pub fn amplitude(
    u: &UnitaryMatrix,
    input: &OccupationConfiguration,
    output: &OccupationConfiguration,
) -> Result<Complex64> {
    let sub = scattering_submatrix(u, input, output)?;
    let norm = (input.factorial_product() * output.factorial_product()).sqrt();
    Ok(permanent_ryser(&sub)? / norm)
}

/// Exact output distribution for `input`, one permanent per configuration.
pub fn output_distribution(u: &UnitaryMatrix, input: &OccupationConfiguration) -> Result<ProbabilityTable> {
    output_distribution_capped(u, input, DEFAULT_ENUMERATION_CAP)
}

pub fn output_distribution_capped(
    u: &UnitaryMatrix,
    input: &OccupationConfiguration,
    cap: usize,
) -> Result<ProbabilityTable> {
    let p = check_pair(u, input, input)?;
    let configs = enumerate_configurations_capped(u.n(), p, cap)?;
    let items = configs
        .into_par_iter()
        .map(|out| amplitude(u, input, &out).map(|a| (out, a)))
        .collect::<Result<Vec<_>>>()?;
    ProbabilityTable::from_amplitudes(items).map_err(|e| match e {
        Error::Validation(msg) => Error::numerical(msg),
        other => other,
    })
}

/// Cap on `n^p` for [`fock_oracle_distribution`].
pub const FOCK_ORACLE_CAP: u128 = 10_000_000;

/// Output distribution by expanding `∏_k (Σ_j U[m_k][j] a_j†)` over every
/// assignment of photons to output modes, without permanents.
pub fn fock_oracle_distribution(u: &UnitaryMatrix, input: &OccupationConfiguration) -> Result<ProbabilityTable> {
    let p = check_pair(u, input, input)?;
    let n = u.n();
    let assignments = (n as u128)
        .checked_pow(p as u32)
        .filter(|&a| a <= FOCK_ORACLE_CAP)
        .ok_or_else(|| Error::resource(format!("{n}^{p} photon assignments exceeds the oracle cap")))?
        as usize;

    let sources = input.photon_modes();
    // Coefficient of each creation-operator monomial ∏ (a_j†)^{m_j}.
    let mut coeffs: HashMap<Vec<usize>, Complex64> = HashMap::new();
    let mut targets = vec![0usize; p];
    for mut code in 0..assignments {
        let mut coeff = Complex64::new(1.0, 0.0);
        for (k, &src) in sources.iter().enumerate() {
            targets[k] = code % n;
            code /= n;
            coeff *= u[(src, targets[k])];
        }
        let mut occ = vec![0usize; n];
        for &t in &targets {
            occ[t] += 1;
        }
        *coeffs.entry(occ).or_default() += coeff;
    }

    // (a†)^m |0⟩ = √(m!) |m⟩, and the input state carries 1/√(∏ input!).
    let input_norm = input.factorial_product().sqrt();
    let items = enumerate_configurations(n, p)?
        .into_iter()
        .map(|cfg| {
            let c = coeffs.get(cfg.counts()).copied().unwrap_or_default();
            let amp = c * cfg.factorial_product().sqrt() / input_norm;
            (cfg, amp)
        })
        .collect();
    ProbabilityTable::from_amplitudes(items)
}

/// `shots` i.i.d. draws by inverting the cumulative distribution in table
/// order.
pub fn sample(table: &ProbabilityTable, shots: usize, seed: u64) -> Result<Vec<OccupationConfiguration>> {
    if table.is_empty() {
        return Err(Error::validation("cannot sample from an empty table"));
    }
    let cdf: Vec<f64> = table
        .entries
        .iter()
        .scan(0.0, |acc, e| {
            *acc += e.probability;
            Some(*acc)
        })
        .collect();
    let total = *cdf.last().expect("table is nonempty");
    let last_nonzero = table.entries.iter().rposition(|e| e.probability > 0.0).unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..shots)
        .map(|_| {
            let u: f64 = rng.random::<f64>() * total;
            let idx = cdf.partition_point(|&c| c <= u).min(last_nonzero);
            table.entries[idx].configuration.clone()
        })
        .collect())
}
