use std::collections::{BTreeMap, HashMap};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use hitsndiffs::eval::{bench_run, rank_displacement, spearman, BenchConfig, BenchRecord, EvalReport};
use hitsndiffs::io::{
    load_matrix, read_abilities, read_key, read_ranking, write_dataset, write_ranking, write_ranking_to,
    write_records, RankRecord, ABILITIES_FILE, CONFIG_FILE, KEY_FILE, RESPONSES_FILE,
};
use hitsndiffs::irt::{generate_c1p, sample_dataset, Dataset, GenConfig, Model};
use hitsndiffs::rankers::rank_oriented;
use hitsndiffs::{PowerConfig, RankConfig};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::args::{BenchArgs, EvalArgs, GenArgs, Orient, RankArgs};
use crate::failure::{Failure, EXIT_DIMENSION};
use crate::manifest::{manifest_for_file, RunManifest, MANIFEST_FILE};

pub type CmdResult = Result<(), Failure>;

/// Global flags shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Globals {
    pub seed: u64,
    pub jobs: usize,
    pub out: Option<PathBuf>,
}

fn generate(config: &GenConfig) -> hitsndiffs::Result<Dataset> {
    if config.model == Model::C1p {
        generate_c1p(config)
    } else {
        sample_dataset(config)
    }
}

pub fn gen(g: &Globals, a: &GenArgs) -> CmdResult {
    let dir = g
        .out
        .as_ref()
        .ok_or_else(|| Failure::usage("gen needs --out DIR"))?;
    let mut config = GenConfig::new(a.model).with_seed(g.seed);
    config.users = a.users;
    config.items = a.items;
    if let Some(k) = a.options {
        config.options = k;
    }
    config.p_answer = a.p_answer;
    config.grm_comparable = a.grm_comparable;
    if let Some(r) = a.ability {
        config.ability = r;
    }
    if let Some(r) = a.difficulty {
        config.difficulty = r;
    }
    if let Some(r) = a.discrimination {
        config.discrimination = r;
    }
    if let Some(r) = a.guessing {
        config.guessing = r;
    }
    let dataset = generate(&config)?;
    write_dataset(dir, &dataset)?;

    let mut manifest = RunManifest::new("gen", serde_json::to_value(&dataset.config).unwrap_or_default(), g.seed);
    manifest.outputs = [RESPONSES_FILE, ABILITIES_FILE, KEY_FILE, CONFIG_FILE]
        .iter()
        .map(|f| dir.join(f))
        .collect();
    manifest.write(&dir.join(MANIFEST_FILE))?;
    Ok(())
}

pub fn rank(g: &Globals, a: &RankArgs) -> CmdResult {
    let full = load_matrix(&a.input)?;
    let matrix = if a.largest_component {
        let comps = full.connected_components();
        if comps.len() > 1 {
            // ties go to the component holding the lowest row
            let mut rows = comps
                .iter()
                .max_by(|x, y| x.len().cmp(&y.len()).then(y[0].cmp(&x[0])))
                .cloned()
                .unwrap_or_default();
            rows.sort_unstable();
            full.select_users(&rows)
        } else {
            full.clone()
        }
    } else {
        full.clone()
    };
    let key = a.key.as_deref().map(read_key).transpose()?;
    let config = RankConfig {
        power: PowerConfig {
            tol: a.tol,
            max_iter: a.max_iter,
            seed: g.seed,
        },
        ..RankConfig::default()
    };
    let orient = a
        .orient
        .unwrap_or(if a.method.is_spectral() { Orient::Entropy } else { Orient::None });
    let scores = rank_oriented(a.method, &matrix, &config, key.as_ref(), orient == Orient::Entropy)?;

    match &g.out {
        Some(path) => {
            write_ranking(path, &matrix, &scores)?;
            let mut manifest = RunManifest::new(
                "rank",
                json!({
                    "method": a.method.name(),
                    "orient": if orient == Orient::Entropy { "entropy" } else { "none" },
                    "largest_component": a.largest_component,
                    "tol": a.tol,
                    "max_iter": a.max_iter,
                    "users_ranked": matrix.users(),
                    "users_dropped": full.users() - matrix.users(),
                    "iterations": scores.iterations,
                }),
                g.seed,
            );
            manifest.inputs.push(a.input.clone());
            manifest.inputs.extend(a.key.clone());
            manifest.outputs.push(path.clone());
            manifest.write(&manifest_for_file(path))?;
        }
        None => write_ranking_to(io::stdout().lock(), &matrix, &scores)?,
    }
    Ok(())
}

fn sorted_ranking(path: &Path) -> Result<Vec<RankRecord>, Failure> {
    let mut rows = read_ranking(path)?;
    rows.sort_by_key(|r| r.rank);
    Ok(rows)
}

fn mismatch(msg: String) -> Failure {
    Failure::plain("dimension_mismatch", EXIT_DIMENSION, msg)
}

pub fn eval(g: &Globals, a: &EvalArgs) -> CmdResult {
    let ranking = sorted_ranking(&a.ranking)?;
    let abilities = read_abilities(&a.abilities)?;
    if ranking.len() != abilities.len() {
        return Err(Failure::dimension(abilities.len(), ranking.len()));
    }
    let truth: HashMap<u64, f64> = abilities.iter().map(|r| (r.user, r.ability)).collect();
    let mut scores = Vec::with_capacity(ranking.len());
    let mut theta = Vec::with_capacity(ranking.len());
    for r in &ranking {
        let t = truth
            .get(&r.user)
            .ok_or_else(|| mismatch(format!("user {} has no ability", r.user)))?;
        scores.push(r.score);
        theta.push(*t);
    }
    let rho = spearman(&scores, &theta)?;

    let displacement = match &a.reference {
        Some(path) => {
            let other = sorted_ranking(path)?;
            if other.len() != ranking.len() {
                return Err(Failure::dimension(ranking.len(), other.len()));
            }
            let index: BTreeMap<u64, usize> = ranking.iter().enumerate().map(|(i, r)| (r.user, i)).collect();
            let p: Vec<usize> = (0..ranking.len()).collect();
            let q = other
                .iter()
                .map(|r| {
                    index
                        .get(&r.user)
                        .copied()
                        .ok_or_else(|| mismatch(format!("user {} missing from ranking", r.user)))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Some(rank_displacement(&p, &q)?)
        }
        None => None,
    };

    let method = a.method.clone().unwrap_or_else(|| {
        a.ranking
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    let report = EvalReport {
        method,
        seed: g.seed,
        spearman: rho,
        displacement,
        oriented: false,
    };
    match &g.out {
        Some(path) => {
            write_records(create(path)?, [&report])?;
            let mut manifest = RunManifest::new("eval", json!({ "method": report.method }), g.seed);
            manifest.inputs.push(a.ranking.clone());
            manifest.inputs.push(a.abilities.clone());
            manifest.inputs.extend(a.reference.clone());
            manifest.outputs.push(path.clone());
            manifest.write(&manifest_for_file(path))?;
        }
        None => write_records(io::stdout().lock(), [&report])?,
    }
    Ok(())
}

/// A bench cell that did not finish.
#[derive(Debug, Serialize)]
struct BenchFailure {
    method: String,
    m: usize,
    n: usize,
    k: usize,
    seed: u64,
    error: String,
}

pub fn bench(g: &Globals, a: &BenchArgs) -> CmdResult {
    if g.jobs == 0 {
        return Err(Failure::usage("--jobs must be at least 1"));
    }
    if !(a.timeout_s.is_finite() && a.timeout_s > 0.0) {
        return Err(Failure::usage("--timeout-s must be positive"));
    }
    if a.repeats == 0 {
        return Err(Failure::usage("--repeats must be at least 1"));
    }
    let config = BenchConfig {
        repeats: a.repeats,
        timeout: Duration::from_secs_f64(a.timeout_s),
        warmup: !a.no_warmup,
        rank: RankConfig::with_seed(g.seed),
    };
    let datasets = a
        .users
        .iter()
        .map(|&m| {
            let mut c = GenConfig::new(a.model).with_seed(g.seed);
            c.users = m;
            c.items = a.items;
            c.options = a.options;
            generate(&c)
        })
        .collect::<hitsndiffs::Result<Vec<_>>>()?;
    let cells: Vec<_> = (0..datasets.len())
        .flat_map(|d| a.methods.iter().map(move |&method| (d, method)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(g.jobs)
        .build()
        .map_err(|e| Failure::usage(e.to_string()))?;
    let lines: Vec<String> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(d, method)| {
                let ds = &datasets[d];
                let line = match bench_run(method, ds, &config) {
                    Ok(rec) => serde_json::to_string::<BenchRecord>(&rec),
                    Err(e) => serde_json::to_string(&BenchFailure {
                        method: method.to_string(),
                        m: ds.matrix.users(),
                        n: ds.matrix.items(),
                        k: ds.config.options,
                        seed: g.seed,
                        error: e.to_string(),
                    }),
                };
                line.unwrap_or_default()
            })
            .collect()
    });

    let body: String = lines.iter().map(|l| format!("{l}\n")).collect();
    match &g.out {
        Some(path) => {
            create(path)?.write_all(body.as_bytes())?;
            let mut manifest = RunManifest::new(
                "bench",
                json!({
                    "methods": a.methods.iter().map(|m| m.name()).collect::<Vec<_>>(),
                    "users": a.users,
                    "items": a.items,
                    "options": a.options,
                    "model": a.model,
                    "repeats": a.repeats,
                    "timeout_s": a.timeout_s,
                    "warmup": !a.no_warmup,
                    "jobs": g.jobs,
                }),
                g.seed,
            );
            manifest.outputs.push(path.clone());
            manifest.write(&manifest_for_file(path))?;
        }
        None => io::stdout().lock().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn create(path: &Path) -> Result<std::fs::File, Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(std::fs::File::create(path)?)
}
