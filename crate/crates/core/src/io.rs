//! Plain CSV/JSON file formats.
//!
//! | file            | header                  |
//! |-----------------|-------------------------|
//! | `responses.csv` | `user,item,option`      |
//! | `abilities.csv` | `user,ability`          |
//! | `key.csv`       | `item,correct_option`   |
//! | ranking         | `user,score,rank`       |
//! | `config.json`   | generator configuration |
//!
//! Ranks start at 1 for the best user.

use std::fs::{self, File};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::irt::{Dataset, GenConfig};
use crate::matrix::{Response, ResponseMatrix};
use crate::rankers::{AnswerKey, ScoreVector};

pub const RESPONSES_FILE: &str = "responses.csv";
pub const ABILITIES_FILE: &str = "abilities.csv";
pub const KEY_FILE: &str = "key.csv";
pub const CONFIG_FILE: &str = "config.json";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbilityRecord {
    pub user: u64,
    pub ability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyRecord {
    pub item: u64,
    pub correct_option: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankRecord {
    pub user: u64,
    pub score: f64,
    pub rank: usize,
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

/// Serializes `records` as CSV with a header row and LF line endings.
pub fn write_records<W: Write, T: Serialize>(w: W, records: impl IntoIterator<Item = T>) -> Result<()> {
    let mut out = writer(w);
    for r in records {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_records<R: Read, T: for<'de> Deserialize<'de>>(r: R) -> Result<Vec<T>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(r)
        .deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

fn create(path: &Path) -> Result<File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(File::create(path)?)
}

pub fn read_responses_from<R: Read>(r: R) -> Result<Vec<Response>> {
    read_records(r)
}

pub fn read_responses(path: &Path) -> Result<Vec<Response>> {
    read_responses_from(File::open(path)?)
}

/// Loads a response file straight into a matrix.
pub fn load_matrix(path: &Path) -> Result<ResponseMatrix> {
    ResponseMatrix::from_records(&read_responses(path)?)
}

pub fn write_responses_to<W: Write>(w: W, matrix: &ResponseMatrix) -> Result<()> {
    write_records(w, matrix.records())
}

pub fn write_responses(path: &Path, matrix: &ResponseMatrix) -> Result<()> {
    write_responses_to(create(path)?, matrix)
}

pub fn read_abilities(path: &Path) -> Result<Vec<AbilityRecord>> {
    read_records(File::open(path)?)
}

pub fn write_abilities(path: &Path, user_ids: &[u64], abilities: &[f64]) -> Result<()> {
    if user_ids.len() != abilities.len() {
        return Err(Error::DimensionMismatch {
            expected: user_ids.len(),
            actual: abilities.len(),
        });
    }
    let rows = user_ids
        .iter()
        .zip(abilities)
        .map(|(&user, &ability)| AbilityRecord { user, ability });
    write_records(create(path)?, rows)
}

pub fn read_key(path: &Path) -> Result<AnswerKey> {
    let rows: Vec<KeyRecord> = read_records(File::open(path)?)?;
    Ok(rows.into_iter().map(|r| (r.item, r.correct_option)).collect())
}

pub fn write_key(path: &Path, key: &AnswerKey) -> Result<()> {
    let rows = key.correct.iter().map(|(&item, &correct_option)| KeyRecord {
        item,
        correct_option,
    });
    write_records(create(path)?, rows)
}

/// Ranking rows in rank order, labelled with the matrix's user ids.
pub fn ranking_records(matrix: &ResponseMatrix, scores: &ScoreVector) -> Vec<RankRecord> {
    let ids = matrix.user_ids();
    scores
        .ranking
        .iter()
        .enumerate()
        .map(|(r, &j)| RankRecord {
            user: ids[j],
            score: scores.scores[j],
            rank: r + 1,
        })
        .collect()
}

pub fn write_ranking_to<W: Write>(w: W, matrix: &ResponseMatrix, scores: &ScoreVector) -> Result<()> {
    write_records(w, ranking_records(matrix, scores))
}

pub fn write_ranking(path: &Path, matrix: &ResponseMatrix, scores: &ScoreVector) -> Result<()> {
    write_ranking_to(create(path)?, matrix, scores)
}

pub fn read_ranking(path: &Path) -> Result<Vec<RankRecord>> {
    read_records(File::open(path)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(File::open(path)?)?)
}

/// Writes the four dataset files into `dir`.
pub fn write_dataset(dir: &Path, dataset: &Dataset) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_responses(&dir.join(RESPONSES_FILE), &dataset.matrix)?;
    write_abilities(&dir.join(ABILITIES_FILE), dataset.matrix.user_ids(), &dataset.abilities)?;
    write_key(&dir.join(KEY_FILE), &dataset.key)?;
    write_json(&dir.join(CONFIG_FILE), &dataset.config)
}

pub fn read_config(path: &Path) -> Result<GenConfig> {
    read_json(path)
}
