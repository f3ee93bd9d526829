//! Browser bindings. Each export takes and returns a JSON string so the page
//! needs no generated types; the same functions are plain Rust for testing.

use hitsndiffs::c1p::{is_p_matrix, BinaryMatrix};
use hitsndiffs::eval::spearman;
use hitsndiffs::irt::{generate_c1p, prob_binary, prob_polytomous, sample_dataset, BinaryItemParams, GenConfig, Model, PolytomousItemParams};
use hitsndiffs::rankers::rank_oriented;
use hitsndiffs::{Method, RankConfig};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

/// Keeps a single call responsive in the page.
pub const MAX_CELLS: usize = 400_000;
const MAX_POINTS: usize = 2001;

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum CurveItem {
    Polytomous(PolytomousItemParams),
    Binary {
        model: Model,
        a: f64,
        b: f64,
        #[serde(default)]
        c: f64,
    },
}

#[derive(Debug, Deserialize)]
struct CurveRequest {
    item: CurveItem,
    theta: (f64, f64),
    #[serde(default = "default_points")]
    points: usize,
}

fn default_points() -> usize {
    101
}

#[derive(Debug, Serialize, PartialEq)]
pub struct Curves {
    pub theta: Vec<f64>,
    /// One curve per option.
    pub curves: Vec<Vec<f64>>,
}

fn parse<'a, T: Deserialize<'a>>(json: &'a str) -> Result<T, String> {
    serde_json::from_str(json).map_err(|e| format!("bad request: {e}"))
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

/// Option probability curves of one item over a θ grid.
pub fn irt_curves_json(request: &str) -> Result<String, String> {
    let req: CurveRequest = parse(request)?;
    let (lo, hi) = req.theta;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) || !(2..=MAX_POINTS).contains(&req.points) {
        return Err(format!("need lo < hi and 2..={MAX_POINTS} points"));
    }
    let theta: Vec<f64> = (0..req.points)
        .map(|i| lo + (hi - lo) * i as f64 / (req.points - 1) as f64)
        .collect();
    let rows: Vec<Vec<f64>> = match &req.item {
        CurveItem::Polytomous(p) => {
            p.validate().map_err(|e| e.to_string())?;
            theta
                .iter()
                .map(|&t| prob_polytomous(p, t))
                .collect::<Result<_, _>>()
                .map_err(|e| e.to_string())?
        }
        CurveItem::Binary { model, a, b, c } => {
            let kind = model
                .binary()
                .ok_or_else(|| format!("{model} items need polytomous parameters"))?;
            let params = BinaryItemParams::new(*a, *b, *c);
            params.validate().map_err(|e| e.to_string())?;
            theta
                .iter()
                .map(|&t| {
                    let p = prob_binary(kind, &params, t);
                    vec![1.0 - p, p]
                })
                .collect()
        }
    };
    let k = rows.first().map_or(0, Vec::len);
    let curves = (0..k).map(|o| rows.iter().map(|r| r[o]).collect()).collect();
    to_json(&Curves { theta, curves })
}

#[derive(Debug, Deserialize)]
struct SimulateRequest {
    #[serde(default = "default_model")]
    model: Model,
    users: usize,
    items: usize,
    #[serde(default)]
    options: Option<usize>,
    #[serde(default = "one")]
    p_answer: f64,
    #[serde(default)]
    discrimination: Option<(f64, f64)>,
    #[serde(default)]
    seed: u64,
    methods: Vec<String>,
}

fn default_model() -> Model {
    Model::Samejima
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Serialize, PartialEq)]
pub struct MethodResult {
    pub method: String,
    pub spearman: Option<f64>,
    /// `(true ability, position)` pairs with position 1 for the top user
    /// and 0 for the bottom one.
    pub points: Vec<(f64, f64)>,
    pub error: Option<String>,
}

#[derive(Debug, Serialize, PartialEq)]
pub struct Simulation {
    pub users: usize,
    pub responses: usize,
    pub results: Vec<MethodResult>,
}

fn check_size(users: usize, items: usize) -> Result<(), String> {
    if users.saturating_mul(items) > MAX_CELLS {
        return Err(format!("users x items is capped at {MAX_CELLS} in the browser"));
    }
    Ok(())
}

/// Samples a dataset and ranks it with each requested method.
pub fn simulate_and_rank_json(request: &str) -> Result<String, String> {
    let req: SimulateRequest = parse(request)?;
    check_size(req.users, req.items)?;
    let methods = req
        .methods
        .iter()
        .map(|s| s.parse::<Method>().map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    let mut config = GenConfig::new(req.model).with_seed(req.seed);
    config.users = req.users;
    config.items = req.items;
    if let Some(k) = req.options {
        config.options = k;
    }
    config.p_answer = req.p_answer;
    if let Some(r) = req.discrimination {
        config.discrimination = r;
    }
    let data = if req.model == Model::C1p {
        generate_c1p(&config)
    } else {
        sample_dataset(&config)
    }
    .map_err(|e| e.to_string())?;

    let m = data.matrix.users();
    let rank_cfg = RankConfig::with_seed(req.seed);
    let results = methods
        .into_iter()
        .map(|method| match rank_oriented(method, &data.matrix, &rank_cfg, Some(&data.key), true) {
            Ok(s) => {
                let span = (m.max(2) - 1) as f64;
                let points = s
                    .ranking
                    .iter()
                    .enumerate()
                    .map(|(pos, &j)| (data.abilities[j], 1.0 - pos as f64 / span))
                    .collect();
                MethodResult {
                    method: method.to_string(),
                    spearman: spearman(&s.scores, &data.abilities).ok(),
                    points,
                    error: None,
                }
            }
            Err(e) => MethodResult {
                method: method.to_string(),
                spearman: None,
                points: Vec::new(),
                error: Some(e.to_string()),
            },
        })
        .collect();
    to_json(&Simulation {
        users: m,
        responses: data.matrix.nnz(),
        results,
    })
}

#[derive(Debug, Deserialize)]
struct ReorderRequest {
    users: usize,
    items: usize,
    #[serde(default = "three")]
    options: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default = "hnd_power")]
    method: String,
}

fn three() -> usize {
    3
}

fn hnd_power() -> String {
    Method::HndPower.name().to_string()
}

#[derive(Debug, Serialize, PartialEq)]
pub struct Reorder {
    /// One-hot rows as `0`/`1` strings, in generated order.
    pub original: Vec<String>,
    /// The same rows in ranked order, best first.
    pub reordered: Vec<String>,
    pub consecutive_before: bool,
    pub consecutive_after: bool,
}

fn bit_rows(m: &BinaryMatrix) -> Vec<String> {
    (0..m.rows())
        .map(|r| m.row(r).iter().map(|&b| if b == 1 { '1' } else { '0' }).collect())
        .collect()
}

/// Samples a consecutive-ones instance with shuffled users and sorts its
/// rows by the ranking of `method`.
pub fn c1p_reorder_json(request: &str) -> Result<String, String> {
    let req: ReorderRequest = parse(request)?;
    check_size(req.users, req.items * req.options)?;
    let method: Method = req.method.parse().map_err(|e: hitsndiffs::Error| e.to_string())?;
    let mut config = GenConfig::new(Model::C1p).with_seed(req.seed);
    config.users = req.users;
    config.items = req.items;
    config.options = req.options;
    let data = generate_c1p(&config).map_err(|e| e.to_string())?;
    let scores = rank_oriented(method, &data.matrix, &RankConfig::with_seed(req.seed), Some(&data.key), true)
        .map_err(|e| e.to_string())?;
    let before = BinaryMatrix::one_hot(&data.matrix);
    let after = before.permute_rows(&scores.ranking);
    to_json(&Reorder {
        original: bit_rows(&before),
        reordered: bit_rows(&after),
        consecutive_before: is_p_matrix(&before),
        consecutive_after: is_p_matrix(&after),
    })
}

fn js<T>(r: Result<T, String>) -> Result<T, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn irt_curves(request: &str) -> Result<String, JsValue> {
    js(irt_curves_json(request))
}

#[wasm_bindgen]
pub fn simulate_and_rank(request: &str) -> Result<String, JsValue> {
    js(simulate_and_rank_json(request))
}

#[wasm_bindgen]
pub fn c1p_reorder(request: &str) -> Result<String, JsValue> {
    js(c1p_reorder_json(request))
}

#[wasm_bindgen]
pub fn method_names() -> String {
    Method::ALL.iter().map(|m| m.name()).collect::<Vec<_>>().join(",")
}
