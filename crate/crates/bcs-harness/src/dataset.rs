//! Dataset records and resumable collection: (system, ordering) pairs are
//! solved under a deterministic seed schedule and appended to a JSON-Lines
//! file, one record per line, stable key order.

use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use bcs_core::{solve_with_ordering, BoolSystem, Spectrum, VarOrder, DEFAULT_CAP};
use bcs_ml::TargetTransform;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{io, HarnessError};
use crate::gen::{gen_random_system, InstanceSpec};

/// One solved (system, ordering) measurement. Field order is the JSON key
/// order. The spectrum is the reordered system's spectrum, i.e. the
/// predictor's feature vector, and `target` is the transformed node count.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub system_id: u64,
    pub n: usize,
    pub m: usize,
    pub gen_seed: u64,
    pub ordering: VarOrder,
    pub spectrum: Spectrum,
    pub node_count: u64,
    pub leaf_count: u64,
    pub op_count: u64,
    pub wall_ms: f64,
    pub target: f64,
}

/// Collection plan: `systems` instances from the template (with scheduled
/// seeds) × `orderings_per_system` random orderings each.
#[derive(Clone, Copy, Debug)]
pub struct CollectPlan {
    pub template: InstanceSpec,
    pub systems: usize,
    pub orderings_per_system: usize,
    pub cap: usize,
}

impl CollectPlan {
    pub fn new(template: InstanceSpec, systems: usize, orderings_per_system: usize) -> Self {
        CollectPlan { template, systems, orderings_per_system, cap: DEFAULT_CAP }
    }
}

/// The deterministic seed schedule: one stream seeded by the plan's
/// template seed yields every per-system generation seed, then every
/// per-(system, ordering) shuffle seed, all drawn up front.
pub struct Schedule {
    pub gen_seeds: Vec<u64>,
    pub ordering_seeds: Vec<u64>,
}

pub fn schedule(plan: &CollectPlan) -> Schedule {
    let mut rng = ChaCha8Rng::seed_from_u64(plan.template.seed);
    let gen_seeds = (0..plan.systems).map(|_| rng.random::<u64>()).collect();
    let ordering_seeds = (0..plan.systems * plan.orderings_per_system)
        .map(|_| rng.random::<u64>())
        .collect();
    Schedule { gen_seeds, ordering_seeds }
}

/// Reads a JSON-Lines dataset, reporting the offending line on parse
/// failures. A missing file is an empty dataset.
pub fn read_dataset(path: &Path) -> Result<Vec<DatasetRecord>, HarnessError> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let file = File::open(path).map_err(|e| io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: DatasetRecord =
            serde_json::from_str(&line).map_err(|e| HarnessError::Dataset {
                path: path.to_path_buf(),
                line: idx + 1,
                msg: e.to_string(),
            })?;
        out.push(record);
    }
    Ok(out)
}

pub fn write_records(path: &Path, records: &[DatasetRecord]) -> Result<(), HarnessError> {
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| io(path, e))?;
    let mut w = BufWriter::new(file);
    for record in records {
        serde_json::to_writer(&mut w, record)?;
        w.write_all(b"\n").map_err(|e| io(path, e))?;
    }
    w.flush().map_err(|e| io(path, e))
}

/// Solves every scheduled (system, ordering) pair not already present in
/// the output file and appends the new records. Returns the number written.
/// Re-running with the same plan and a complete file writes nothing.
pub fn collect_dataset(plan: &CollectPlan, out: &Path) -> Result<usize, HarnessError> {
    plan.template.validate()?;
    let sched = schedule(plan);
    let systems: Vec<BoolSystem> = sched
        .gen_seeds
        .iter()
        .map(|&seed| {
            gen_random_system(&InstanceSpec { seed, ..plan.template }).map(|(s, _)| s)
        })
        .collect::<Result<_, _>>()?;

    let existing: HashSet<(u64, Vec<usize>)> = read_dataset(out)?
        .into_iter()
        .map(|r| (r.system_id, r.ordering.to_one_based()))
        .collect();

    struct Task<'a> {
        system_id: u64,
        system: &'a BoolSystem,
        gen_seed: u64,
        ordering: VarOrder,
    }
    let mut tasks = Vec::new();
    for (i, system) in systems.iter().enumerate() {
        for j in 0..plan.orderings_per_system {
            let ordering = VarOrder::random(
                plan.template.n,
                sched.ordering_seeds[i * plan.orderings_per_system + j],
            );
            if existing.contains(&(i as u64, ordering.to_one_based())) {
                continue;
            }
            tasks.push(Task {
                system_id: i as u64,
                system,
                gen_seed: sched.gen_seeds[i],
                ordering,
            });
        }
    }

    let records: Vec<DatasetRecord> = tasks
        .par_iter()
        .map(|task| {
            let result = solve_with_ordering(task.system, &task.ordering, plan.cap)?;
            let spectrum = Spectrum::of(task.system).permuted(&task.ordering);
            Ok(DatasetRecord {
                system_id: task.system_id,
                n: plan.template.n,
                m: plan.template.m,
                gen_seed: task.gen_seed,
                ordering: task.ordering.clone(),
                spectrum,
                node_count: result.cost.node_count,
                leaf_count: result.cost.leaf_count,
                op_count: result.cost.op_count,
                wall_ms: result.cost.wall_ms,
                target: TargetTransform::Log1pNodes.apply(result.cost.node_count as f64),
            })
        })
        .collect::<Result<_, HarnessError>>()?;

    write_records(out, &records)?;
    Ok(records.len())
}

/// Re-derives each record's spectrum and target from its primary fields
/// (shape, generation seed, ordering, node count) and errors on the first
/// mismatch. The shape parameters not stored per record (degree, density,
/// planted) come from the template.
pub fn audit_dataset(
    records: &[DatasetRecord],
    template: &InstanceSpec,
) -> Result<(), HarnessError> {
    for (idx, rec) in records.iter().enumerate() {
        let spec = InstanceSpec {
            n: rec.n,
            m: rec.m,
            seed: rec.gen_seed,
            ..*template
        };
        let (system, _) = gen_random_system(&spec)?;
        let spectrum = Spectrum::of(&system).permuted(&rec.ordering);
        if spectrum != rec.spectrum {
            return Err(HarnessError::Input(format!(
                "record {idx} (system {}): stored spectrum does not re-derive",
                rec.system_id
            )));
        }
        let target = TargetTransform::Log1pNodes.apply(rec.node_count as f64);
        if target.to_bits() != rec.target.to_bits() {
            return Err(HarnessError::Input(format!(
                "record {idx} (system {}): stored target does not re-derive",
                rec.system_id
            )));
        }
    }
    Ok(())
}

/// Feature/target pairs for the trainer.
pub fn training_pairs(records: &[DatasetRecord]) -> Vec<(Spectrum, f64)> {
    records.iter().map(|r| (r.spectrum.clone(), r.target)).collect()
}
