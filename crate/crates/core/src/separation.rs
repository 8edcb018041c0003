//! The constructive separation engine.
//!
//! Given a coloring `f` on `[0, N)` whose fibers are Hindman-small at the
//! working depth, the engine builds `X = {x_0 < x_1 < …}` with
//! `FS(X)` inside the domain and a certificate bounding the exact summable
//! weight of `f[FS(X)]`: evidence that `f` fails as a reduction witness
//! from the summable ideal to the Hindman ideal at this finite scale.
//!
//! The run is a sequential state machine. Each stage refines the current
//! ground through translate searches (a constant-value witness first, an
//! avoidance witness second), then picks the next element through a
//! tail-shift against the preprocessed master ground. Finite data can run
//! out; the trace then carries the exhaustion stage instead of a
//! certificate.

use std::collections::BTreeMap;

use num::{BigInt, BigRational, One, Zero};
use serde::{Deserialize, Serialize};

use crate::ground::{fs_set, tail_shift_unchecked, GroundSet};
use crate::ideals::{judge, summable_weight, Judgement, OracleConfig};
use crate::katetov::KatetovMap;
use crate::refine::refine_avoid;
use crate::search::{avoid_witness, translate_constant_witness, FsWitness};
use crate::{Caps, Error, Result};

/// Depth used by the fiber short-circuit screen: a fiber containing both
/// a pair and its sum is already positive.
const FIBER_DEPTH: usize = 2;

/// The avoidance schedule `a_0 < a_1 < …` with its exact tail bound
/// `Σ 2^{n+1}/(a_n+1)` over the stored prefix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    a: Vec<u64>,
}

impl Schedule {
    pub fn new(a: Vec<u64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidInput("schedule must be nonempty".into()));
        }
        if a.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "schedule must be strictly increasing".into(),
            ));
        }
        Ok(Schedule { a })
    }

    /// Default `a_n = 4^{n+2} − 1`, whose full tail bound is exactly 1/4.
    pub fn default_for(stages: usize) -> Self {
        let a = (0..stages.max(1) as u32)
            .map(|n| 4u64.pow(n + 2) - 1)
            .collect();
        Schedule { a }
    }

    pub fn values(&self) -> &[u64] {
        &self.a
    }

    pub fn value(&self, n: usize) -> Option<u64> {
        self.a.get(n).copied()
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// `Σ_n 2^{n+1}/(a_n+1)` over the stored prefix, exact.
    pub fn tail_bound(&self) -> BigRational {
        let mut acc = BigRational::zero();
        for (n, &a) in self.a.iter().enumerate() {
            acc += BigRational::new(BigInt::one() << (n + 1), BigInt::from(a) + BigInt::one());
        }
        acc
    }
}

/// Per-value fiber judgements at the screening depth.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiberReport {
    pub depth: usize,
    pub judgements: BTreeMap<u64, Judgement>,
    pub short_circuit: Option<FiberShortCircuit>,
}

/// A positive fiber: `f` is constant on the witness sums, so the image of
/// that FS is a singleton and trivially summable-small.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberShortCircuit {
    pub value: u64,
    pub witness: FsWitness,
}

/// Judges every fiber `f^{-1}[{v}]` with the Hindman oracle at `depth`;
/// the short-circuit records the smallest positive value.
pub fn check_fibers(f: &KatetovMap, depth: usize, caps: &Caps) -> Result<FiberReport> {
    caps.check_depth(depth)?;
    let mut fibers: Vec<Vec<u64>> = vec![Vec::new(); f.codomain_size() as usize];
    for x in 0..f.domain_size() {
        fibers[f.eval(x).unwrap() as usize].push(x);
    }
    let cfg = OracleConfig::Hindman { fs_depth: depth };
    let mut judgements = BTreeMap::new();
    let mut short_circuit = None;
    for (v, fiber) in fibers.iter().enumerate() {
        let j = judge(fiber, &cfg, caps)?;
        if short_circuit.is_none() {
            if let crate::ideals::Evidence::Fs(w) = &j.evidence {
                short_circuit = Some(FiberShortCircuit {
                    value: v as u64,
                    witness: w.clone(),
                });
            }
        }
        judgements.insert(v as u64, j);
    }
    Ok(FiberReport {
        depth,
        judgements,
        short_circuit,
    })
}

/// Outcome of one translate point at one stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum CaseOutcome {
    /// `f` is constant (value `c`) on `t + FS(witness)`.
    Constant { t: u64, c: u64, witness: GroundSet },
    /// `f(t + s) > bound` for every `s ∈ FS(witness)`.
    Avoid {
        t: u64,
        bound: u64,
        witness: GroundSet,
    },
}

/// Stage-level invariant re-checks (recorded, not enforced; unmet
/// conditions mark how far the finite run degraded from the infinite
/// argument).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageChecks {
    /// Every `y` with `g_n(y) = 1` has `f > a_n` on `y + FS(D_n)`.
    pub one_labels_avoid: bool,
    /// Every fresh constant at this stage exceeds `a_{n−1}`.
    pub fresh_constants_exceed_prev: bool,
    /// Every carried zero label is still constant on `y + FS(D_n)` with a
    /// value already in `f[FS({x_i : i < n})]`.
    pub carried_constants_inherited: bool,
    /// `FS(D_n ∖ x_n) ∩ f^{-1}[{0..a_n}] = ∅`.
    pub tail_avoids_low_values: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub index: usize,
    /// Translate points processed at this stage, ascending.
    pub t_points: Vec<u64>,
    /// One outcome per translate point.
    pub cases: Vec<CaseOutcome>,
    /// The stage ground `D_n`.
    pub ground: GroundSet,
    /// Label table `g_n` on `FS({x_i : i < n})`.
    pub g_table: BTreeMap<u64, u8>,
    /// Minimal threshold from the tail shift against the master.
    pub tail_threshold: u64,
    pub x: u64,
    pub checks: StageChecks,
}

/// Label context a stage hands to its invariant checks.
#[derive(Default)]
struct StageLabels {
    g_table: BTreeMap<u64, u8>,
    fresh_constants: Vec<u64>,
    carried: Vec<u64>,
    prev_image: Vec<u64>,
}

/// How the preprocessing realized the avoidance conditions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessReport {
    pub master0: GroundSet,
    pub refined: GroundSet,
    /// Per stage `n`: cutoff on `refined` after which the fiber union
    /// `f^{-1}[{0..a_n}]` is avoided, and whether that was achieved
    /// non-vacuously.
    pub cutoffs: Vec<(usize, bool)>,
    /// The re-enumerated master ground.
    pub master: GroundSet,
    /// Per stage `n`: whether `FS(master ∖ master[n]) ∩ f^{-1}[{0..a_n}]`
    /// is empty.
    pub conditions_met: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// Exact `Σ 1/(v+1)` over `f[FS(X)]`.
    #[serde(with = "rational_serde")]
    pub weight: BigRational,
    /// `1/(f(x_0)+1) + Σ_{n=1}^{stages} 2^n/(a_{n−1}+1)`, exact.
    #[serde(with = "rational_serde")]
    pub bound: BigRational,
    pub image: Vec<u64>,
    pub weight_le_bound: bool,
    /// `is_sparse(X)` when the size cap allows the check.
    pub x_sparse: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SeparationOutcome {
    Completed,
    /// A fiber was Hindman-positive at the working depth; the witness
    /// already certifies a singleton image.
    FiberShortCircuit(FiberShortCircuit),
    Exhausted {
        stage: usize,
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationTrace {
    pub domain_size: u64,
    pub schedule: Schedule,
    pub stages_requested: usize,
    pub search_depths: Vec<usize>,
    pub preprocess: PreprocessReport,
    pub x: Vec<u64>,
    pub stages: Vec<StageRecord>,
    pub outcome: SeparationOutcome,
    pub certificate: Option<Certificate>,
}

pub(crate) mod rational_serde {
    use num::{BigInt, BigRational};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Repr {
        num: String,
        den: String,
    }

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        Repr {
            num: r.numer().to_string(),
            den: r.denom().to_string(),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let repr = Repr::deserialize(d)?;
        let num: BigInt = repr.num.parse().map_err(serde::de::Error::custom)?;
        let den: BigInt = repr.den.parse().map_err(serde::de::Error::custom)?;
        if den == BigInt::from(0) {
            return Err(serde::de::Error::custom("zero denominator"));
        }
        Ok(BigRational::new(num, den))
    }
}

fn subset_sums(elements: &[u64]) -> Vec<u64> {
    let mut sums = vec![0u64];
    for &e in elements {
        let with: Vec<u64> = sums.iter().map(|s| s + e).collect();
        sums.extend(with);
    }
    sums.remove(0);
    sums.sort_unstable();
    sums.dedup();
    sums
}

fn image_of(f: &KatetovMap, values: &[u64]) -> Vec<u64> {
    let mut out: Vec<u64> = values.iter().filter_map(|&v| f.eval(v)).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Fiber union `f^{-1}[{0, …, bound}]`, ascending.
fn low_fiber_union(f: &KatetovMap, bound: u64) -> Vec<u64> {
    (0..f.domain_size())
        .filter(|&x| f.eval(x).unwrap() <= bound)
        .collect()
}

/// Default per-stage witness sizes: geometric halving clamped by the
/// material a stage can still hold, never below 1.
fn default_depths(stages: usize) -> Vec<usize> {
    (1..stages)
        .map(|n| {
            let geometric = 1usize << (stages - n).min(20);
            geometric.min(stages - n).max(1)
        })
        .collect()
}

/// Largest prefix of `ground` searchable from translate `t` without
/// leaving the domain of `f`.
fn domain_trim(f: &KatetovMap, t: u64, ground: &GroundSet) -> GroundSet {
    let mut keep = ground.len();
    while keep > 0 {
        let prefix = GroundSet::new(ground.elements()[..keep].to_vec()).expect("sorted prefix");
        if t.checked_add(prefix.total())
            .is_some_and(|r| r < f.domain_size())
        {
            return prefix;
        }
        keep -= 1;
    }
    GroundSet::new(Vec::new()).expect("empty is valid")
}

struct Engine<'a> {
    f: &'a KatetovMap,
    schedule: &'a Schedule,
    stages: usize,
    depths: Vec<usize>,
    caps: &'a Caps,
    fiber_unions: Vec<Vec<u64>>,
}

impl<'a> Engine<'a> {
    /// Initial ground: greedy very sparse inside the domain, then refined
    /// against the low fiber unions, then re-enumerated so that dropping
    /// the first `n` elements avoids `f^{-1}[{0..a_n}]` wherever the
    /// refinement achieved that condition.
    fn preprocess(&self) -> Result<PreprocessReport> {
        let n = self.f.domain_size();
        let source = 1..n;
        let mut picked = Vec::new();
        let mut total: u64 = 0;
        for cand in source {
            if picked.len() == self.caps.very_sparse_elements {
                break;
            }
            if cand > 2 * total {
                total += cand;
                picked.push(cand);
            }
        }
        let master0 = GroundSet::new(picked)?;
        if master0.is_empty() {
            return Err(Error::InvalidInput(
                "domain too small for any ground".into(),
            ));
        }

        let avoid: Vec<Vec<u64>> = self.fiber_unions.clone();
        // Retry with smaller targets while the refinement makes no
        // progress at all; a shallower first witness can succeed where a
        // deep one has too little disjoint material.
        let mut report = None;
        for target in (1..=(self.stages + 1).min(self.caps.witness_depth)).rev() {
            let r = refine_avoid(&master0, &avoid, target, self.caps)?;
            let progressed = !r.output.is_empty();
            report = Some(r);
            if progressed {
                break;
            }
        }
        let report = report.expect("at least one target attempted");
        let refined = if report.output.is_empty() {
            master0.clone()
        } else {
            report.output.clone()
        };

        let cutoffs: Vec<(usize, bool)> = report
            .per_target
            .iter()
            .map(|t| (t.cutoff, t.verified && !t.vacuous))
            .collect();

        // Subsequence re-enumeration: position n must sit at or past the
        // achieved cutoff for stage n.
        let mut indices = Vec::new();
        let mut next = 0usize;
        for stage in 0..self.stages {
            let wanted = match cutoffs.get(stage) {
                Some(&(cut, true)) => cut.max(next),
                _ => next,
            };
            if wanted >= refined.len() {
                break;
            }
            indices.push(wanted);
            next = wanted + 1;
        }
        let mut elements: Vec<u64> = indices.iter().map(|&i| refined.elements()[i]).collect();
        if let Some(&last) = indices.last() {
            elements.extend_from_slice(&refined.elements()[last + 1..]);
        }
        let master = GroundSet::new(elements)?;

        let mut conditions_met = Vec::with_capacity(self.stages);
        for stage in 0..self.stages {
            let met = if stage < master.len() {
                let tail = master.drop_first(stage);
                let fs = fs_set(&tail, self.caps)?;
                let union = &self.fiber_unions[stage];
                !fs.values().iter().any(|v| union.binary_search(v).is_ok())
            } else {
                false
            };
            conditions_met.push(met);
        }

        Ok(PreprocessReport {
            master0,
            refined,
            cutoffs,
            master,
            conditions_met,
        })
    }

    fn stage_checks(
        &self,
        n: usize,
        ground: &GroundSet,
        x_n: u64,
        labels: &StageLabels,
    ) -> Result<StageChecks> {
        let StageLabels {
            g_table,
            fresh_constants,
            carried,
            prev_image,
        } = labels;
        let a_n = self.schedule.value(n).unwrap_or(u64::MAX);
        let a_prev = if n >= 1 {
            self.schedule.value(n - 1).unwrap_or(u64::MAX)
        } else {
            0
        };
        let fs_ground = fs_set(ground, self.caps)?;

        let mut one_labels_avoid = true;
        for (&y, &label) in g_table.iter() {
            if label == 1 {
                for &s in fs_ground.values() {
                    if self.f.eval(y + s).is_none_or(|v| v <= a_n) {
                        one_labels_avoid = false;
                    }
                }
            }
        }

        let fresh_constants_exceed_prev = fresh_constants.iter().all(|&c| c > a_prev);

        let mut carried_constants_inherited = true;
        for &y in carried {
            let mut vals = fs_ground
                .values()
                .iter()
                .filter_map(|&s| self.f.eval(y + s));
            let Some(first) = vals.next() else {
                continue;
            };
            let constant = vals.all(|v| v == first);
            if !constant || prev_image.binary_search(&first).is_err() {
                carried_constants_inherited = false;
            }
        }

        let tail = ground.drop_below(x_n);
        let fs_tail = fs_set(&tail, self.caps)?;
        let tail_avoids_low_values = fs_tail
            .values()
            .iter()
            .all(|&s| self.f.eval(s).is_some_and(|v| v > a_n));

        Ok(StageChecks {
            one_labels_avoid,
            fresh_constants_exceed_prev,
            carried_constants_inherited,
            tail_avoids_low_values,
        })
    }

    fn run(&self) -> Result<SeparationTrace> {
        let preprocess = self.preprocess()?;
        let master = preprocess.master.clone();
        let fs_master = fs_set(&master, self.caps)?;

        let mut trace = SeparationTrace {
            domain_size: self.f.domain_size(),
            schedule: self.schedule.clone(),
            stages_requested: self.stages,
            search_depths: self.depths.clone(),
            preprocess,
            x: Vec::new(),
            stages: Vec::new(),
            outcome: SeparationOutcome::Completed,
            certificate: None,
        };

        let exhaust = |trace: &mut SeparationTrace, stage: usize, reason: String| {
            trace.outcome = SeparationOutcome::Exhausted { stage, reason };
        };

        // Stage 0: the first pick is the least master element; the tail
        // condition against the master itself is trivially met there.
        if master.is_empty() {
            exhaust(&mut trace, 0, "master ground is empty".into());
            return Ok(trace);
        }
        let x0 = master.min().unwrap();
        trace.x.push(x0);
        let checks0 = self.stage_checks(0, &master, x0, &StageLabels::default())?;
        trace.stages.push(StageRecord {
            index: 0,
            t_points: Vec::new(),
            cases: Vec::new(),
            ground: master.clone(),
            g_table: BTreeMap::new(),
            tail_threshold: 0,
            x: x0,
            checks: checks0,
        });

        let mut ground = master.clone();
        let mut g_prev: BTreeMap<u64, u8> = BTreeMap::new();

        for n in 1..self.stages {
            let depth = self.depths[n - 1];
            let x_prev = *trace.x.last().unwrap();
            let fs_xs_prev = subset_sums(&trace.x); // FS({x_i : i < n})
            let prev_image = image_of(self.f, &fs_xs_prev);

            // Labels carried forward as 0: previous zeros and their
            // x_{n−1}-translates.
            let mut g_n: BTreeMap<u64, u8> = BTreeMap::new();
            let mut carried: Vec<u64> = Vec::new();
            for (&y, &label) in &g_prev {
                if label == 0 {
                    g_n.insert(y, 0);
                    carried.push(y);
                    let shifted = y + x_prev;
                    g_n.insert(shifted, 0);
                    carried.push(shifted);
                }
            }
            carried.sort_unstable();
            carried.dedup();
            // Carried zeros from {x_i : i < n−1} and their x_{n−1}
            // translates all live inside FS({x_i : i < n}).
            debug_assert!(carried.iter().all(|y| fs_xs_prev.contains(y)));

            let t_points: Vec<u64> = fs_xs_prev
                .iter()
                .copied()
                .filter(|y| !g_n.contains_key(y))
                .collect();

            let mut current = ground.drop_below(x_prev + 1);
            let mut cases = Vec::with_capacity(t_points.len());
            let mut fresh_constants = Vec::new();
            let a_n = self
                .schedule
                .value(n)
                .ok_or_else(|| Error::InvalidInput(format!("schedule too short for stage {n}")))?;

            let mut dead = None;
            for &t in &t_points {
                let searchable = domain_trim(self.f, t, &current);
                if searchable.len() < depth {
                    dead = Some(format!(
                        "ground holds {} elements, stage depth needs {depth}",
                        searchable.len()
                    ));
                    break;
                }
                if let Some((witness, c)) =
                    translate_constant_witness(self.f, t, &searchable, depth, self.caps)?
                {
                    g_n.insert(t, 0);
                    fresh_constants.push(c);
                    cases.push(CaseOutcome::Constant {
                        t,
                        c,
                        witness: witness.clone(),
                    });
                    current = witness;
                    continue;
                }
                match avoid_witness(self.f, t, a_n, &searchable, depth, self.caps)? {
                    Some(witness) => {
                        g_n.insert(t, 1);
                        cases.push(CaseOutcome::Avoid {
                            t,
                            bound: a_n,
                            witness: witness.clone(),
                        });
                        current = witness;
                    }
                    None => {
                        dead = Some(format!(
                            "no constant or avoidance witness at translate {t} (depth {depth})"
                        ));
                        break;
                    }
                }
            }
            if let Some(reason) = dead {
                exhaust(&mut trace, n, reason);
                return Ok(trace);
            }

            // Pick x_n: least element of D_n past the tail-shift threshold
            // against the master at position n.
            let Some(&master_at_n) = master.elements().get(n) else {
                exhaust(
                    &mut trace,
                    n,
                    format!("master has no element at position {n}"),
                );
                return Ok(trace);
            };
            let host = fs_set(&master.drop_below(master_at_n), self.caps)?;
            debug_assert!(fs_set(&current, self.caps)?.is_subset_of(&fs_master));
            let shift = tail_shift_unchecked(&host, &current, self.caps)?;
            let Some(x_n) = current
                .elements()
                .iter()
                .copied()
                .find(|&e| e >= shift.shift)
            else {
                exhaust(
                    &mut trace,
                    n,
                    format!(
                        "no element of the stage ground reaches threshold {}",
                        shift.shift
                    ),
                );
                return Ok(trace);
            };

            let labels = StageLabels {
                g_table: g_n,
                fresh_constants,
                carried,
                prev_image,
            };
            let checks = self.stage_checks(n, &current, x_n, &labels)?;
            trace.x.push(x_n);
            trace.stages.push(StageRecord {
                index: n,
                t_points,
                cases,
                ground: current.clone(),
                g_table: labels.g_table.clone(),
                tail_threshold: shift.shift,
                x: x_n,
                checks,
            });
            ground = current;
            g_prev = labels.g_table;
        }

        trace.certificate = Some(self.certificate(&trace.x)?);
        Ok(trace)
    }

    fn certificate(&self, x: &[u64]) -> Result<Certificate> {
        let fs_x = subset_sums(x);
        let image = image_of(self.f, &fs_x);
        let weight = summable_weight(&image);
        let bound = certificate_bound(self.f, x, self.schedule, self.stages)?;
        let x_sparse = GroundSet::new(x.to_vec())
            .ok()
            .filter(|g| g.len() <= self.caps.fs_elements)
            .map(|g| fs_x.len() == (1 << g.len()) - 1);
        Ok(Certificate {
            weight_le_bound: weight <= bound,
            weight,
            bound,
            image,
            x_sparse,
        })
    }
}

/// `1/(f(x_0)+1) + Σ_{n=1}^{stages} 2^n/(a_{n−1}+1)`, exact.
pub fn certificate_bound(
    f: &KatetovMap,
    x: &[u64],
    schedule: &Schedule,
    stages: usize,
) -> Result<BigRational> {
    let Some(&x0) = x.first() else {
        return Err(Error::InvalidInput("certificate needs x_0".into()));
    };
    let f_x0 = f.eval(x0).ok_or(Error::DomainExceeded {
        required: x0,
        domain: f.domain_size(),
    })?;
    let mut bound = BigRational::new(BigInt::one(), BigInt::from(f_x0) + 1);
    for n in 1..=stages {
        let a_prev = schedule
            .value(n - 1)
            .ok_or_else(|| Error::InvalidInput(format!("schedule too short for bound term {n}")))?;
        bound += BigRational::new(BigInt::one() << n, BigInt::from(a_prev) + 1);
    }
    Ok(bound)
}

/// Builds a separation trace for `f` with the given schedule and stage
/// count. `search_depths` gives the witness size per stage `1..stages`
/// (nonincreasing); the default halves geometrically, clamped by the
/// material a stage can still hold.
pub fn build_separation(
    f: &KatetovMap,
    schedule: &Schedule,
    stages: usize,
    search_depths: Option<&[usize]>,
    caps: &Caps,
) -> Result<SeparationTrace> {
    if stages == 0 || stages > caps.separation_stages {
        return Err(Error::InvalidInput(format!(
            "stages must be in 1..={}",
            caps.separation_stages
        )));
    }
    if schedule.len() < stages {
        return Err(Error::InvalidInput(format!(
            "schedule has {} terms, {stages} stages need at least {stages}",
            schedule.len()
        )));
    }
    let depths = match search_depths {
        Some(d) => {
            if d.len() != stages.saturating_sub(1) {
                return Err(Error::InvalidInput(format!(
                    "expected {} search depths, got {}",
                    stages - 1,
                    d.len()
                )));
            }
            if d.windows(2).any(|w| w[1] > w[0]) {
                return Err(Error::InvalidInput(
                    "search depths must be nonincreasing".into(),
                ));
            }
            if let Some(&worst) = d.first() {
                caps.check_depth(worst)?;
            }
            if d.contains(&0) {
                return Err(Error::InvalidInput("search depths must be >= 1".into()));
            }
            d.to_vec()
        }
        None => default_depths(stages),
    };

    // Fiber screen: a positive fiber short-circuits the whole run.
    let fibers = check_fibers(f, FIBER_DEPTH, caps)?;
    if let Some(sc) = fibers.short_circuit {
        let image = image_of(f, &subset_sums(sc.witness.ground.elements()));
        let weight = summable_weight(&image);
        return Ok(SeparationTrace {
            domain_size: f.domain_size(),
            schedule: schedule.clone(),
            stages_requested: stages,
            search_depths: depths,
            preprocess: PreprocessReport {
                master0: GroundSet::new(vec![])?,
                refined: GroundSet::new(vec![])?,
                cutoffs: Vec::new(),
                master: GroundSet::new(vec![])?,
                conditions_met: Vec::new(),
            },
            x: Vec::new(),
            stages: Vec::new(),
            outcome: SeparationOutcome::FiberShortCircuit(sc),
            certificate: Some(Certificate {
                weight_le_bound: true,
                weight,
                bound: BigRational::one(),
                image,
                x_sparse: None,
            }),
        });
    }

    let fiber_unions: Vec<Vec<u64>> = (0..stages)
        .map(|n| {
            let a_n = schedule.value(n).expect("length checked");
            low_fiber_union(f, a_n)
        })
        .collect();

    let engine = Engine {
        f,
        schedule,
        stages,
        depths,
        caps,
        fiber_unions,
    };
    engine.run()
}

/// One named check from the independent trace verifier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceCheck {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceVerification {
    pub passed: bool,
    pub checks: Vec<TraceCheck>,
}

impl TraceVerification {
    fn push(&mut self, name: &str, ok: bool, detail: String) {
        self.passed &= ok;
        self.checks.push(TraceCheck {
            name: name.to_string(),
            ok,
            detail,
        });
    }
}

/// Independently recomputes everything a completed trace claims: the
/// structural stage invariants, `FS(X)` and its image, the per-stage image
/// increments against `2^n/(a_{n−1}+1)`, and the total weight against the
/// certificate. Returns `passed = false` with a discrepancy report rather
/// than erroring.
pub fn verify_trace(trace: &SeparationTrace, f: &KatetovMap, caps: &Caps) -> TraceVerification {
    let mut v = TraceVerification {
        passed: true,
        checks: Vec::new(),
    };

    match &trace.outcome {
        SeparationOutcome::FiberShortCircuit(sc) => {
            let fiber = f.fiber(sc.value);
            let ok = sc.witness.verify(&fiber);
            v.push(
                "fiber_witness",
                ok,
                format!("fiber {} witness re-check", sc.value),
            );
            return v;
        }
        SeparationOutcome::Exhausted { stage, .. } => {
            v.push(
                "complete",
                false,
                format!("trace exhausted at stage {stage}"),
            );
            return v;
        }
        SeparationOutcome::Completed => {}
    }

    let x = &trace.x;
    v.push(
        "stage_count",
        x.len() == trace.stages_requested && trace.stages.len() == x.len(),
        format!("{} of {} stages", x.len(), trace.stages_requested),
    );
    v.push(
        "x_increasing",
        x.windows(2).all(|w| w[0] < w[1]),
        format!("{x:?}"),
    );

    let fs_x = subset_sums(x);
    let in_domain = fs_x.last().is_none_or(|&m| m < f.domain_size());
    v.push(
        "fs_in_domain",
        in_domain,
        format!("max FS value {:?}", fs_x.last()),
    );
    if !in_domain {
        return v;
    }

    for (n, record) in trace.stages.iter().enumerate() {
        let ok_x = record.x == x[n] && record.ground.contains(record.x);
        v.push(
            &format!("stage{n}_x_in_ground"),
            ok_x,
            format!("x_{n} = {}", record.x),
        );
        if n >= 1 {
            let prev = &trace.stages[n - 1];
            let above = prev.ground.drop_below(prev.x + 1);
            let nesting = match (fs_set(&record.ground, caps), fs_set(&above, caps)) {
                (Ok(a), Ok(b)) => a.is_subset_of(&b),
                _ => false,
            };
            v.push(
                &format!("stage{n}_nesting"),
                nesting,
                "FS(D_n) within FS of the previous ground above x_{n-1}".into(),
            );
            let domain_ok = (1u64 << n) - 1 == subset_sums(&x[..n]).len() as u64
                && record
                    .g_table
                    .keys()
                    .all(|y| subset_sums(&x[..n]).contains(y))
                && subset_sums(&x[..n])
                    .iter()
                    .all(|y| record.g_table.contains_key(y));
            v.push(
                &format!("stage{n}_labels_total"),
                domain_ok,
                "g_n total on FS of earlier picks".into(),
            );
        }
    }

    // Stagewise image increments, exact.
    let image_upto = |k: usize| -> Vec<u64> { image_of(f, &subset_sums(&x[..=k])) };
    for n in 1..x.len() {
        let prev = image_upto(n - 1);
        let curr = image_upto(n);
        let fresh: Vec<u64> = curr
            .iter()
            .copied()
            .filter(|val| prev.binary_search(val).is_err())
            .collect();
        let incr = summable_weight(&fresh);
        let a_prev = trace.schedule.value(n - 1);
        let ok = match a_prev {
            Some(a) => incr <= BigRational::new(BigInt::one() << n, BigInt::from(a) + 1),
            None => false,
        };
        v.push(
            &format!("increment{n}_bounded"),
            ok,
            format!("new values {fresh:?}"),
        );
    }

    match &trace.certificate {
        None => v.push("certificate", false, "missing certificate".into()),
        Some(cert) => {
            let image = image_of(f, &fs_x);
            let weight = summable_weight(&image);
            v.push(
                "certificate_image",
                image == cert.image,
                format!("{} image values", image.len()),
            );
            v.push(
                "certificate_weight",
                weight == cert.weight,
                "recomputed total weight".into(),
            );
            let bound_ok = certificate_bound(f, x, &trace.schedule, trace.stages_requested)
                .map(|b| b == cert.bound)
                .unwrap_or(false);
            v.push("certificate_bound", bound_ok, "bound formula".into());
            v.push(
                "weight_le_bound",
                cert.weight <= cert.bound && cert.weight_le_bound,
                format!(
                    "weight ≈ {}, bound ≈ {}",
                    approx(&cert.weight),
                    approx(&cert.bound)
                ),
            );
        }
    }

    v
}

fn approx(r: &BigRational) -> String {
    let num: f64 = r.numer().to_string().parse().unwrap_or(f64::NAN);
    let den: f64 = r.denom().to_string().parse().unwrap_or(f64::NAN);
    format!("{:.6}", num / den)
}
