//! Configuration recovery for noisy samples and tensor-product subspaces.
//!
//! Samples are either half-configurations (one `norb`-bit register, the α
//! register of the half circuit) or full configurations (`2·norb` bits, α
//! register then β register). Every correction leaves each register with
//! exactly its target electron count.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::determinants::{combine, HalfConfiguration};
use crate::error::{Error, Result};
use crate::integrals::IntegralTable;
use crate::lucj::SampleSet;
use crate::solver::{tensor_ground_state, GroundState, SolverOptions, Subspace};

/// Register layout of a sample set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Layout {
    pub norb: usize,
    pub n_alpha: usize,
    pub n_beta: usize,
    /// Both spin registers present.
    pub full: bool,
}

impl Layout {
    pub fn half(norb: usize, n_alpha: usize) -> Self {
        Layout {
            norb,
            n_alpha,
            n_beta: n_alpha,
            full: false,
        }
    }

    pub fn full(norb: usize, n_alpha: usize, n_beta: usize) -> Self {
        Layout {
            norb,
            n_alpha,
            n_beta,
            full: true,
        }
    }

    pub fn bit_len(&self) -> usize {
        if self.full {
            2 * self.norb
        } else {
            self.norb
        }
    }

    /// `(bit offset, electron count)` per register.
    pub fn registers(&self) -> Vec<(usize, usize)> {
        if self.full {
            vec![(0, self.n_alpha), (self.norb, self.n_beta)]
        } else {
            vec![(0, self.n_alpha)]
        }
    }

    fn register_mask(&self) -> u64 {
        crate::determinants::low_mask(self.norb)
    }

    pub fn is_valid(&self, bits: u64) -> bool {
        let m = self.register_mask();
        self.registers()
            .iter()
            .all(|&(off, n)| (bits >> off & m).count_ones() as usize == n)
    }

    fn check(&self, s: &SampleSet) -> Result<()> {
        if s.bit_len != self.bit_len() {
            return Err(Error::Layout(format!(
                "samples have {} bits, layout expects {}",
                s.bit_len,
                self.bit_len()
            )));
        }
        Ok(())
    }

    /// Single-spin strings of a configuration, deduplicated.
    pub fn halves(&self, bits: u64) -> Vec<HalfConfiguration> {
        let m = self.register_mask();
        let mut v: Vec<HalfConfiguration> = self
            .registers()
            .iter()
            .map(|&(off, _)| HalfConfiguration(bits >> off & m))
            .collect();
        v.dedup();
        v
    }
}

/// Splits `s` into the valid part and the rest.
pub fn partition_valid(s: &SampleSet, layout: &Layout) -> Result<(SampleSet, SampleSet)> {
    layout.check(s)?;
    let mut valid = SampleSet::new(s.bit_len, s.seed);
    let mut invalid = SampleSet::new(s.bit_len, s.seed);
    for (&b, &c) in &s.counts {
        if layout.is_valid(b) {
            valid.add(b, c);
        } else {
            invalid.add(b, c);
        }
    }
    Ok((valid, invalid))
}

/// Count-weighted mean of every bit.
pub fn empirical_occupations(sv: &SampleSet) -> Result<Vec<f64>> {
    if sv.is_empty() {
        return Err(Error::Empty("no valid samples"));
    }
    let mut n = vec![0.0; sv.bit_len];
    for (&b, &c) in &sv.counts {
        for (p, np) in n.iter_mut().enumerate() {
            if b >> p & 1 == 1 {
                *np += c as f64;
            }
        }
    }
    let shots = sv.shots as f64;
    n.iter_mut().for_each(|x| *x /= shots);
    Ok(n)
}

/// Unique single-spin strings of a set of configurations (the union of
/// both registers in the full layout), in lexicographic order.
pub fn unique_halves<'a>(configs: impl IntoIterator<Item = &'a u64>, layout: &Layout) -> Vec<HalfConfiguration> {
    let set: BTreeSet<HalfConfiguration> = configs.into_iter().flat_map(|&b| layout.halves(b)).collect();
    set.into_iter().collect()
}

/// All products `combine(y, z)` with `y`, `z` from `half_pool`, α-major.
pub fn tensor_subspace(half_pool: &[HalfConfiguration]) -> Result<Subspace> {
    let unique: BTreeSet<HalfConfiguration> = half_pool.iter().copied().collect();
    if let Some(first) = unique.first() {
        if let Some(bad) = unique.iter().find(|h| h.popcount() != first.popcount()) {
            return Err(Error::Sector(format!(
                "half-configurations with {} and {} electrons",
                first.popcount(),
                bad.popcount()
            )));
        }
    }
    let u: Vec<HalfConfiguration> = unique.into_iter().collect();
    Subspace::new(u.iter().flat_map(|&y| u.iter().map(move |&z| combine(y, z))).collect())
}

/// Ground state on `U ⊗ U` for the unique halves `u`, with occupations
/// returned per layout: spin-averaged (length `norb`) for half samples,
/// α then β (length `2·norb`) for full samples.
fn solve_tensor(
    u: Vec<HalfConfiguration>,
    table: &IntegralTable,
    layout: &Layout,
    max_dim: u128,
    opts: &SolverOptions,
) -> Result<(GroundState, Vec<f64>)> {
    let dim = (u.len() as u128).pow(2);
    if dim > max_dim {
        return Err(Error::Capacity {
            what: "tensor-product subspace",
            needed: dim,
            cap: max_dim,
        });
    }
    if let Some(bad) = u
        .iter()
        .find(|h| h.popcount() as usize != table.n_alpha() || table.n_alpha() != table.n_beta())
    {
        return Err(Error::Sector(format!(
            "half-configuration {} does not fit the closed-shell sector ({}, {})",
            bad.to_bitstring(table.norb()),
            table.n_alpha(),
            table.n_beta()
        )));
    }
    let (g, _) = tensor_ground_state(u.clone(), u, table, opts)?;
    let norb = table.norb();
    let n = if layout.full {
        g.occupations.clone()
    } else {
        (0..norb)
            .map(|p| 0.5 * (g.occupations[p] + g.occupations[norb + p]))
            .collect()
    };
    Ok((g, n))
}

/// Occupations of the ground state on the tensor space of the valid samples.
pub fn valid_occupations(
    sv: &SampleSet,
    table: &IntegralTable,
    layout: &Layout,
    max_dim: u128,
    opts: &SolverOptions,
) -> Result<Vec<f64>> {
    layout.check(sv)?;
    if sv.is_empty() {
        return Err(Error::Empty("no valid samples"));
    }
    Ok(solve_tensor(unique_halves(sv.counts.keys(), layout), table, layout, max_dim, opts)?.1)
}

/// Moves one register toward `target` electrons: over-occupied registers
/// clear occupied bits drawn with weight `(1 − n_p) + δ`, under-occupied
/// ones set empty bits drawn with weight `n_p + δ`, without replacement.
pub fn correct_configuration(x: u64, n: &[f64], target: usize, delta: f64, rng: &mut impl Rng) -> Result<u64> {
    let len = n.len();
    if target > len {
        return Err(Error::Range(format!("target {target} exceeds register length {len}")));
    }
    let pop = (x & crate::determinants::low_mask(len)).count_ones() as usize;
    if pop == target {
        return Ok(x);
    }
    let over = pop > target;
    let candidates: Vec<usize> = (0..len).filter(|&p| (x >> p & 1 == 1) == over).collect();
    let weight = |&p: &usize| {
        let np = n[p].clamp(0.0, 1.0);
        if over {
            1.0 - np + delta
        } else {
            np + delta
        }
    };
    let chosen = candidates
        .choose_multiple_weighted(rng, pop.abs_diff(target), weight)
        .map_err(|e| Error::Range(format!("weighted draw: {e}")))?;
    let mut y = x;
    for &p in chosen {
        y ^= 1 << p;
    }
    Ok(y)
}

/// Corrects every shot of `invalid` register by register.
pub fn correct_samples(
    invalid: &SampleSet,
    n: &[f64],
    layout: &Layout,
    delta: f64,
    rng: &mut impl Rng,
) -> Result<SampleSet> {
    layout.check(invalid)?;
    if n.len() != layout.bit_len() {
        return Err(Error::Shape(format!(
            "occupation vector has {} entries, expected {}",
            n.len(),
            layout.bit_len()
        )));
    }
    let m = layout.register_mask();
    let mut out = SampleSet::new(invalid.bit_len, invalid.seed);
    for (&b, &c) in &invalid.counts {
        for _ in 0..c {
            let mut y = 0u64;
            for (off, target) in layout.registers() {
                y |= correct_configuration(b >> off & m, &n[off..off + layout.norb], target, delta, rng)? << off;
            }
            out.add(y, 1);
        }
    }
    Ok(out)
}

/// Union of two sample sets, counts summed.
pub fn merge(a: &SampleSet, b: &SampleSet) -> SampleSet {
    let mut out = a.clone();
    for (&k, &c) in &b.counts {
        out.add(k, c);
    }
    out
}

/// Pool of configurations for batch subsampling.
///
/// With at least `pool_size` unique valid entries the pool is the
/// `pool_size` most frequent of them (ties by bit pattern). Otherwise it is
/// all of `sv` plus a count-weighted draw without replacement from the
/// corrected invalid entries not already present. Counts in the pool are the
/// merged counts of both sets.
pub fn build_pool(sv: &SampleSet, corrected: &SampleSet, pool_size: usize, rng: &mut impl Rng) -> SampleSet {
    let merged = merge(sv, corrected);
    let mut pool = SampleSet::new(sv.bit_len, sv.seed);
    if sv.unique() >= pool_size {
        let mut v: Vec<(u64, u64)> = sv.counts.iter().map(|(&k, &c)| (k, c)).collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        for (k, _) in v.into_iter().take(pool_size) {
            pool.add(k, merged.counts[&k]);
        }
        return pool;
    }
    for &k in sv.counts.keys() {
        pool.add(k, merged.counts[&k]);
    }
    let extra: Vec<(u64, u64)> = corrected
        .counts
        .iter()
        .filter(|(k, _)| !sv.counts.contains_key(k))
        .map(|(&k, &c)| (k, c))
        .collect();
    let need = (pool_size - sv.unique()).min(extra.len());
    let mut drawn: Vec<(u64, u64)> = extra
        .choose_multiple_weighted(rng, need, |e| e.1 as f64)
        .expect("positive counts")
        .copied()
        .collect();
    drawn.sort();
    for (k, c) in drawn {
        pool.add(k, c);
    }
    pool
}

/// Up to `batch_size` unique configurations from `pool`, count-weighted,
/// without replacement, in ascending bit order.
pub fn sample_batch(pool: &SampleSet, batch_size: usize, rng: &mut impl Rng) -> Vec<u64> {
    let entries: Vec<(u64, u64)> = pool.counts.iter().map(|(&k, &c)| (k, c)).collect();
    let mut v: Vec<u64> = if batch_size >= entries.len() {
        entries.iter().map(|e| e.0).collect()
    } else {
        entries
            .choose_multiple_weighted(rng, batch_size, |e| e.1 as f64)
            .expect("positive counts")
            .map(|e| e.0)
            .collect()
    };
    v.sort_unstable();
    v
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecoveryMode {
    /// Occupations from one diagonalization on the valid samples.
    #[default]
    #[serde(rename = "valid_occ_0C")]
    ValidOcc0C,
    /// Self-consistent refinement of the occupations over `cycles` rounds.
    #[serde(rename = "sccr")]
    Sccr,
    /// Occupations averaged directly over the valid samples.
    #[serde(rename = "empirical_prob")]
    EmpiricalProb,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecoveryConfig {
    pub mode: RecoveryMode,
    pub cycles: usize,
    pub batches: usize,
    /// Maximum configurations per batch.
    pub batch_size: usize,
    /// Defaults to four times `batch_size`.
    pub pool_size: Option<usize>,
    pub seed: u64,
    pub delta: f64,
    /// Largest tensor-product dimension diagonalized.
    pub max_dim: u64,
    /// Residual tolerance for batch diagonalizations.
    pub solver_tol: f64,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        RecoveryConfig {
            mode: RecoveryMode::ValidOcc0C,
            cycles: 10,
            batches: 10,
            batch_size: 100,
            pool_size: None,
            seed: 0,
            delta: 1e-3,
            max_dim: 2_000_000,
            solver_tol: 1e-8,
        }
    }
}

impl RecoveryConfig {
    pub fn validate(&self) -> Result<()> {
        if self.mode == RecoveryMode::Sccr && self.cycles == 0 {
            return Err(Error::Config("sccr needs at least one cycle".into()));
        }
        if self.batch_size == 0 || self.batches == 0 {
            return Err(Error::Config("batch_size and batches must be positive".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!("delta = {} outside (0, 1)", self.delta)));
        }
        if self.pool_size == Some(0) {
            return Err(Error::Config("pool_size must be positive".into()));
        }
        Ok(())
    }

    pub fn pool_size(&self) -> usize {
        self.pool_size.unwrap_or(4 * self.batch_size)
    }

    fn solver(&self) -> SolverOptions {
        SolverOptions {
            tol: self.solver_tol,
            ..Default::default()
        }
    }

    /// Independent stream per `(cycle, batch)`.
    fn rng(&self, cycle: usize, batch: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(((cycle as u64) << 32) | batch as u64);
        rng
    }
}

/// Where the starting occupations came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OccupationSource {
    ValidDiagonalization,
    Empirical,
    /// No valid samples: every orbital at the mean filling.
    Uniform,
}

#[derive(Clone, Debug, Serialize)]
pub struct CycleTrace {
    pub cycle: usize,
    pub energies: Vec<f64>,
    pub subspace_sizes: Vec<usize>,
    /// Occupations after this cycle (input occupations for cycle 0).
    pub mean_occupation: Vec<f64>,
    /// Fraction of corrected shots that satisfy the sector constraint;
    /// absent for cycle 0, which corrects nothing.
    pub corrected_valid_fraction: Option<f64>,
    pub wallclock_s: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RecoveryTrace {
    pub mode: RecoveryMode,
    pub initial_source: OccupationSource,
    /// Fraction of raw shots that were valid.
    pub valid_fraction: f64,
    /// Same fraction after the final correction.
    pub final_valid_fraction: f64,
    pub cycles: Vec<CycleTrace>,
    pub wallclock_s: f64,
}

/// Result of a recovery run. `valid ∪ corrected` holds every shot.
#[derive(Clone, Debug)]
pub struct Recovered {
    pub occupations: Vec<f64>,
    pub valid: SampleSet,
    pub corrected: SampleSet,
    /// Lowest batch ground state seen during the cycles, if any ran.
    pub best: Option<GroundState>,
    pub trace: RecoveryTrace,
}

impl Recovered {
    /// All shots after correction.
    pub fn samples(&self) -> SampleSet {
        merge(&self.valid, &self.corrected)
    }
}

fn uniform_occupations(layout: &Layout) -> Vec<f64> {
    let mut n = Vec::with_capacity(layout.bit_len());
    for (_, target) in layout.registers() {
        n.extend(std::iter::repeat_n(target as f64 / layout.norb as f64, layout.norb));
    }
    n
}

fn initial_occupations(
    sv: &SampleSet,
    table: &IntegralTable,
    layout: &Layout,
    cfg: &RecoveryConfig,
) -> Result<(Vec<f64>, OccupationSource)> {
    if sv.is_empty() {
        return Ok((uniform_occupations(layout), OccupationSource::Uniform));
    }
    if cfg.mode == RecoveryMode::EmpiricalProb {
        return Ok((empirical_occupations(sv)?, OccupationSource::Empirical));
    }
    match valid_occupations(sv, table, layout, cfg.max_dim as u128, &cfg.solver()) {
        Ok(n) => Ok((n, OccupationSource::ValidDiagonalization)),
        Err(Error::Capacity { .. }) => Ok((empirical_occupations(sv)?, OccupationSource::Empirical)),
        Err(e) => Err(e),
    }
}

/// Ground states of `cfg.batches` batches drawn from `pool`.
pub fn diagonalize_batches(
    pool: &SampleSet,
    table: &IntegralTable,
    layout: &Layout,
    cfg: &RecoveryConfig,
    cycle: usize,
) -> Result<Vec<(GroundState, Vec<f64>, usize)>> {
    let mut out = Vec::with_capacity(cfg.batches);
    for k in 0..cfg.batches {
        let mut rng = cfg.rng(cycle, k + 1);
        let batch = sample_batch(pool, cfg.batch_size, &mut rng);
        let u = unique_halves(batch.iter(), layout);
        let size = u.len() * u.len();
        let (g, n) = solve_tensor(u, table, layout, cfg.max_dim as u128, &cfg.solver())
            .map_err(|e| e.context(format!("cycle {cycle}, batch {k}")))?;
        out.push((g, n, size));
    }
    Ok(out)
}

fn valid_fraction_of(s: &SampleSet, layout: &Layout) -> f64 {
    if s.shots == 0 {
        return 1.0;
    }
    let v: u64 = s
        .counts
        .iter()
        .filter(|(&b, _)| layout.is_valid(b))
        .map(|(_, &c)| c)
        .sum();
    v as f64 / s.shots as f64
}

/// Corrects `samples` per `cfg.mode`.
///
/// `valid_occ_0C` and `empirical_prob` correct once with the starting
/// occupations. `sccr` then runs `cfg.cycles` rounds: correct, pool,
/// diagonalize `cfg.batches` batches, and replace the occupations by the
/// uniform mean of the batch occupations. The final correction always uses
/// the final occupations.
pub fn recover(samples: &SampleSet, table: &IntegralTable, layout: &Layout, cfg: &RecoveryConfig) -> Result<Recovered> {
    cfg.validate()?;
    let start = Instant::now();
    let (valid, invalid) = partition_valid(samples, layout)?;
    let (mut n, source) = initial_occupations(&valid, table, layout, cfg)?;
    let raw_valid = if samples.shots == 0 {
        0.0
    } else {
        valid.shots as f64 / samples.shots as f64
    };
    let mut trace = RecoveryTrace {
        mode: cfg.mode,
        initial_source: source,
        valid_fraction: raw_valid,
        final_valid_fraction: f64::NAN,
        cycles: vec![CycleTrace {
            cycle: 0,
            energies: Vec::new(),
            subspace_sizes: Vec::new(),
            mean_occupation: n.clone(),
            corrected_valid_fraction: None,
            wallclock_s: start.elapsed().as_secs_f64(),
        }],
        wallclock_s: 0.0,
    };
    let mut best: Option<GroundState> = None;
    let rounds = if cfg.mode == RecoveryMode::Sccr { cfg.cycles } else { 0 };
    for cycle in 1..=rounds {
        let t0 = Instant::now();
        let mut rng = cfg.rng(cycle, 0);
        let corrected = correct_samples(&invalid, &n, layout, cfg.delta, &mut rng)?;
        let pool = build_pool(&valid, &corrected, cfg.pool_size(), &mut rng);
        let results = diagonalize_batches(&pool, table, layout, cfg, cycle)?;
        let mut mean = vec![0.0; n.len()];
        for (_, nk, _) in &results {
            mean.iter_mut()
                .zip(nk)
                .for_each(|(m, x)| *m += x / results.len() as f64);
        }
        for (g, _, _) in &results {
            if best.as_ref().is_none_or(|b| g.energy < b.energy) {
                best = Some(g.clone());
            }
        }
        n = mean;
        trace.cycles.push(CycleTrace {
            cycle,
            energies: results.iter().map(|r| r.0.energy).collect(),
            subspace_sizes: results.iter().map(|r| r.2).collect(),
            mean_occupation: n.clone(),
            corrected_valid_fraction: Some(valid_fraction_of(&corrected, layout)),
            wallclock_s: t0.elapsed().as_secs_f64(),
        });
    }
    let mut rng = cfg.rng(rounds + 1, 0);
    let corrected = correct_samples(&invalid, &n, layout, cfg.delta, &mut rng)?;
    trace.final_valid_fraction = valid_fraction_of(&merge(&valid, &corrected), layout);
    trace.wallclock_s = start.elapsed().as_secs_f64();
    Ok(Recovered {
        occupations: n,
        valid,
        corrected,
        best,
        trace,
    })
}

/// Lowest ground state over the batches of one pool built from `rec`.
pub fn batch_energy(
    rec: &Recovered,
    table: &IntegralTable,
    layout: &Layout,
    cfg: &RecoveryConfig,
) -> Result<(GroundState, Vec<usize>)> {
    let mut rng = cfg.rng(usize::MAX >> 32, 0);
    let pool = build_pool(&rec.valid, &rec.corrected, cfg.pool_size(), &mut rng);
    if pool.is_empty() {
        return Err(Error::Empty("no configurations to diagonalize"));
    }
    let results = diagonalize_batches(&pool, table, layout, cfg, usize::MAX >> 32)?;
    let sizes = results.iter().map(|r| r.2).collect();
    let best = results
        .into_iter()
        .map(|r| r.0)
        .min_by(|a, b| a.energy.total_cmp(&b.energy))
        .expect("at least one batch");
    Ok((best, sizes))
}

/// Unique half-configurations of all corrected shots, with counts summed
/// over both registers in the full layout.
pub fn half_sample_weights(s: &SampleSet, layout: &Layout) -> BTreeMap<HalfConfiguration, u64> {
    let mut out = BTreeMap::new();
    for (&b, &c) in &s.counts {
        for h in layout.halves(b) {
            *out.entry(h).or_default() += c;
        }
    }
    out
}
