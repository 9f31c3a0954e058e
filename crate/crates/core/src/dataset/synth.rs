//! Seeded survey generator with planted structure.
//!
//! Every predictor is driven by a standard normal latent mapped through its
//! marginal. A planted pair shares latents (`z_b = rho z_a + sqrt(1 - rho^2) e`)
//! with `rho` solved by bisection so the encoded columns hit the requested
//! Pearson correlation on the generated sample. The trust answer is the
//! planted logit plus logistic noise, cut into seven ordered bands.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Open01, StandardNormal};
use serde::{Deserialize, Serialize};

use super::schema::{ColumnKind, SurveySchema};
use super::screen::{SurveyDataset, SurveyRecord};
use crate::error::{Error, Result};
use crate::math::{normal_cdf, pearson};

/// Upper bound a count column inherits from another column's encoded value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountCap {
    pub column: String,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Marginal {
    /// Relative weights over the column's levels: 7 for likert, `[no, yes]`
    /// for yes/no, one per declared level for categories.
    Weights(Vec<f64>),
    /// Rounded, clamped normal for count columns.
    Normal {
        mean: f64,
        sd: f64,
        min: f64,
        max: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        not_above: Option<CountCap>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedPair {
    pub a: String,
    pub b: String,
    pub r: f64,
}

/// `coef * (x - center)`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub column: String,
    pub coef: f64,
    #[serde(default)]
    pub center: f64,
}

/// `coef * (x_a - center_a) * (x_b - center_b)`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTerm {
    pub a: String,
    pub b: String,
    pub coef: f64,
    #[serde(default)]
    pub center_a: f64,
    #[serde(default)]
    pub center_b: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PlantedLogit {
    pub intercept: f64,
    pub main_effects: Vec<Term>,
    pub interactions: Vec<PairTerm>,
    /// Scale of the standard logistic noise added to the logit.
    pub noise_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondsRange {
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub rows: usize,
    /// Per-column marginals; unlisted columns are uniform over their levels.
    pub columns: BTreeMap<String, Marginal>,
    pub correlated_pairs: Vec<PlantedPair>,
    pub logit: PlantedLogit,
    /// Ascending cut points on the noisy logit; the answer is one plus the
    /// number of cut points at or below it.
    pub trust_cutpoints: [f64; 6],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub completion_seconds: Option<SecondsRange>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            rows: 1000,
            columns: BTreeMap::new(),
            correlated_pairs: Vec::new(),
            logit: PlantedLogit::default(),
            trust_cutpoints: [-3.0, -1.5, -0.05, 0.05, 1.5, 3.0],
            completion_seconds: None,
        }
    }
}

impl SynthConfig {
    /// Survey-like defaults for the built-in schema: age/driving-years and
    /// fear/nervousness planted at r = 0.88 and 0.87, benefit and risk as
    /// opposing main effects, and a knowledge x eagerness interaction.
    pub fn table2() -> Self {
        let w = |v: &[f64]| Marginal::Weights(v.to_vec());
        let yes = |p: f64| Marginal::Weights(vec![1.0 - p, p]);
        let mut columns = BTreeMap::new();
        columns.insert("Gender".to_string(), w(&[0.475, 0.522, 0.003]));
        columns.insert(
            "Age".to_string(),
            w(&[0.001, 0.083, 0.377, 0.227, 0.144, 0.109, 0.059]),
        );
        columns.insert(
            "EducationLevel".to_string(),
            w(&[0.079, 0.169, 0.115, 0.433, 0.183, 0.012, 0.009]),
        );
        columns.insert("DrivingLicense".to_string(), yes(0.95));
        columns.insert(
            "YearsDriving".to_string(),
            Marginal::Normal {
                mean: 18.0,
                sd: 12.0,
                min: 0.0,
                max: 60.0,
                not_above: Some(CountCap {
                    column: "Age".to_string(),
                    offset: 14.0,
                }),
            },
        );
        columns.insert(
            "DrivingDaysPerWeek".to_string(),
            Marginal::Normal {
                mean: 4.5,
                sd: 2.0,
                min: 0.0,
                max: 7.0,
                not_above: None,
            },
        );
        columns.insert("AVAccident".to_string(), yes(0.764));
        columns.insert("BeeninAV".to_string(), yes(0.227));
        columns.insert("Assess5inAV".to_string(), yes(0.11));
        columns.insert("Assess6to12inAV".to_string(), yes(0.11));
        columns.insert("Assess13to17inAV".to_string(), yes(0.30));
        columns.insert("Assess18inAV".to_string(), yes(0.86));
        let term = |c: &str, coef: f64| Term {
            column: c.to_string(),
            coef,
            center: 4.0,
        };
        Self {
            rows: 2000,
            columns,
            correlated_pairs: vec![
                PlantedPair {
                    a: "Age".to_string(),
                    b: "YearsDriving".to_string(),
                    r: 0.88,
                },
                PlantedPair {
                    a: "Fear".to_string(),
                    b: "Nervousness".to_string(),
                    r: 0.87,
                },
            ],
            logit: PlantedLogit {
                intercept: 0.0,
                main_effects: vec![term("Benefit", 1.0), term("Risk", -0.8)],
                interactions: vec![PairTerm {
                    a: "KnowledgeinAVs".to_string(),
                    b: "EagertoAdopt".to_string(),
                    coef: 0.6,
                    center_a: 4.0,
                    center_b: 4.0,
                }],
                noise_scale: 0.3,
            },
            trust_cutpoints: [-3.0, -1.5, -0.05, 0.05, 1.5, 3.0],
            completion_seconds: Some(SecondsRange {
                min: 90.0,
                max: 900.0,
            }),
        }
    }
}

fn infeasible(msg: String) -> Error {
    Error::InfeasibleSynthesis(msg)
}

/// Column-level generation plan resolved against the schema.
struct Plan {
    /// Cumulative normalized weights, or `None` for count columns.
    cumulative: Vec<Option<Vec<f64>>>,
    normal: Vec<Option<(f64, f64, f64, f64, Option<(usize, f64)>)>>,
}

fn level_count(kind: &ColumnKind) -> Option<usize> {
    match kind {
        ColumnKind::Likert7 => Some(7),
        ColumnKind::YesNo => Some(2),
        ColumnKind::Category { levels } => Some(levels.len()),
        ColumnKind::Count { .. } => None,
    }
}

fn cumulative(weights: &[f64], column: &str) -> Result<Vec<f64>> {
    if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(infeasible(format!("{column}: weights must be finite and >= 0")));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(infeasible(format!("{column}: weights sum to zero")));
    }
    let mut acc = 0.0;
    Ok(weights
        .iter()
        .map(|w| {
            acc += w / total;
            acc
        })
        .collect())
}

fn plan(schema: &SurveySchema, config: &SynthConfig) -> Result<Plan> {
    let n = schema.len();
    let mut cum = vec![None; n];
    let mut normal = vec![None; n];
    for name in config.columns.keys() {
        let idx = schema
            .index_of(name)
            .ok_or_else(|| infeasible(format!("marginal for unknown column {name:?}")))?;
        if schema.columns[idx].response {
            return Err(infeasible(format!("{name}: the response is generated from the logit")));
        }
    }
    for (i, col) in schema.columns.iter().enumerate() {
        if col.response {
            continue;
        }
        let given = config.columns.get(&col.name);
        match (&col.kind, given) {
            (ColumnKind::Count { max }, None) => {
                normal[i] = Some((10.0, 5.0, 0.0, max.unwrap_or(50.0), None));
            }
            (ColumnKind::Count { max }, Some(Marginal::Normal { mean, sd, min, max: hi, not_above })) => {
                if !(sd.is_finite() && *sd >= 0.0 && min <= hi && *min >= 0.0) {
                    return Err(infeasible(format!("{}: invalid normal marginal", col.name)));
                }
                if max.is_some_and(|m| *hi > m) {
                    return Err(infeasible(format!("{}: marginal max exceeds schema max", col.name)));
                }
                let cap = match not_above {
                    None => None,
                    Some(c) => {
                        let j = schema.index_of(&c.column).ok_or_else(|| {
                            infeasible(format!("{}: cap column {:?} not in schema", col.name, c.column))
                        })?;
                        if matches!(schema.columns[j].kind, ColumnKind::Count { .. }) || schema.columns[j].response {
                            return Err(infeasible(format!(
                                "{}: cap column {:?} must be a non-count predictor",
                                col.name, c.column
                            )));
                        }
                        Some((j, c.offset))
                    }
                };
                normal[i] = Some((*mean, *sd, *min, *hi, cap));
            }
            (ColumnKind::Count { .. }, Some(Marginal::Weights(_))) => {
                return Err(infeasible(format!("{}: count columns take a normal marginal", col.name)));
            }
            (kind, None) => {
                let k = level_count(kind).expect("non-count kind");
                cum[i] = Some(cumulative(&vec![1.0; k], &col.name)?);
            }
            (kind, Some(Marginal::Weights(w))) => {
                let k = level_count(kind).expect("non-count kind");
                if w.len() != k {
                    return Err(infeasible(format!(
                        "{}: {} weights for {k} levels",
                        col.name,
                        w.len()
                    )));
                }
                cum[i] = Some(cumulative(w, &col.name)?);
            }
            (_, Some(Marginal::Normal { .. })) => {
                return Err(infeasible(format!("{}: normal marginal needs a count column", col.name)));
            }
        }
    }
    Ok(Plan {
        cumulative: cum,
        normal,
    })
}

/// Level index for a latent value under cumulative weights.
fn level_of(z: f64, cum: &[f64]) -> usize {
    let u = normal_cdf(z);
    cum.iter().position(|&c| u < c).unwrap_or(cum.len() - 1)
}

/// Encoded value of a non-count column at level `k`.
fn level_value(kind: &ColumnKind, k: usize) -> f64 {
    match kind {
        ColumnKind::Likert7 => (k + 1) as f64,
        ColumnKind::YesNo => k as f64,
        ColumnKind::Category { levels } => levels[k].code,
        ColumnKind::Count { .. } => unreachable!("count columns have no levels"),
    }
}

fn count_value(z: f64, spec: (f64, f64, f64, f64, Option<(usize, f64)>), cap_value: Option<f64>) -> f64 {
    let (mean, sd, min, max, cap) = spec;
    let mut v = libm::round(mean + sd * z).clamp(min, max);
    if let (Some((_, offset)), Some(c)) = (cap, cap_value) {
        v = v.min(libm::floor(c - offset)).max(min);
    }
    v
}

struct Generator<'a> {
    schema: &'a SurveySchema,
    plan: Plan,
    rows: usize,
    /// Row-major latents, one per schema column.
    latent: Vec<f64>,
}

impl Generator<'_> {
    fn z(&self, row: usize, col: usize) -> f64 {
        self.latent[row * self.schema.len() + col]
    }

    /// Encoded value of `col` for latent `z`; `cap_value` supplies the
    /// encoded value of a capping column.
    fn value(&self, col: usize, z: f64, cap_value: impl Fn(usize) -> f64) -> f64 {
        match (&self.plan.cumulative[col], self.plan.normal[col]) {
            (Some(cum), _) => level_value(&self.schema.columns[col].kind, level_of(z, cum)),
            (None, Some(spec)) => {
                let cap = spec.4.map(|(j, _)| cap_value(j));
                count_value(z, spec, cap)
            }
            (None, None) => unreachable!("response column has no value plan"),
        }
    }

    fn mixed(&self, row: usize, a: usize, b: usize, rho: f64) -> f64 {
        rho * self.z(row, a) + libm::sqrt(1.0 - rho * rho) * self.z(row, b)
    }

    fn pair_columns(&self, a: usize, b: usize, rho: f64) -> (Vec<f64>, Vec<f64>) {
        let mut xa = Vec::with_capacity(self.rows);
        let mut xb = Vec::with_capacity(self.rows);
        for row in 0..self.rows {
            let za = self.z(row, a);
            let zb = self.mixed(row, a, b, rho);
            let unpaired = |j: usize| self.value(j, self.z(row, j), |_| f64::MAX);
            let va = self.value(a, za, unpaired);
            let vb = self.value(b, zb, |j| if j == a { va } else { unpaired(j) });
            xa.push(va);
            xb.push(vb);
        }
        (xa, xb)
    }

    fn calibrate(&self, a: usize, b: usize, target: f64) -> Result<f64> {
        const EDGE: f64 = 0.999_999;
        let r_at = |rho: f64| -> Result<f64> {
            let (xa, xb) = self.pair_columns(a, b, rho);
            pearson(&xa, &xb).map_err(|_| {
                infeasible(format!(
                    "{} / {}: constant column, correlation undefined",
                    self.schema.columns[a].name, self.schema.columns[b].name
                ))
            })
        };
        let (mut lo, mut hi) = (-EDGE, EDGE);
        let (r_lo, r_hi) = (r_at(lo)?, r_at(hi)?);
        if !(r_lo <= target && target <= r_hi) {
            return Err(infeasible(format!(
                "{} / {}: target r = {target} outside reachable [{r_lo:.4}, {r_hi:.4}]",
                self.schema.columns[a].name, self.schema.columns[b].name
            )));
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if r_at(mid)? < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // The empirical curve is a step function; take the side closer to target.
        let (r_l, r_h) = (r_at(lo)?, r_at(hi)?);
        Ok(if libm::fabs(r_l - target) < libm::fabs(r_h - target) {
            lo
        } else {
            hi
        })
    }
}

/// Generates `config.rows` survey records for `schema`, deterministically in `seed`.
pub fn synthesize(schema: &SurveySchema, config: &SynthConfig, seed: u64) -> Result<SurveyDataset> {
    schema.validate()?;
    if config.rows == 0 {
        return Err(infeasible(String::from("rows must be positive")));
    }
    if config.trust_cutpoints.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(infeasible(String::from("trust cut points must be ascending")));
    }
    if !(config.logit.noise_scale >= 0.0 && config.logit.noise_scale.is_finite()) {
        return Err(infeasible(String::from("noise_scale must be finite and >= 0")));
    }
    if let Some(s) = &config.completion_seconds {
        if !(s.min >= 0.0 && s.min <= s.max && s.max.is_finite()) {
            return Err(infeasible(String::from("completion range must satisfy 0 <= min <= max")));
        }
    }
    let plan = plan(schema, config)?;
    let n = schema.len();
    let resolve = |name: &str| -> Result<usize> {
        let i = schema
            .index_of(name)
            .ok_or_else(|| infeasible(format!("unknown column {name:?}")))?;
        if schema.columns[i].response {
            return Err(infeasible(format!("{name:?} is the response column")));
        }
        Ok(i)
    };

    let mut pairs = Vec::new();
    let mut in_pair = vec![false; n];
    for p in &config.correlated_pairs {
        if !(-1.0..=1.0).contains(&p.r) {
            return Err(infeasible(format!("{} / {}: target r = {} outside [-1, 1]", p.a, p.b, p.r)));
        }
        let (a, b) = (resolve(&p.a)?, resolve(&p.b)?);
        if a == b || in_pair[a] || in_pair[b] {
            return Err(infeasible(format!("{} / {}: each column may join one pair", p.a, p.b)));
        }
        in_pair[a] = true;
        in_pair[b] = true;
        pairs.push((a, b, p.r));
    }
    for (i, spec) in plan.normal.iter().enumerate() {
        if let Some((_, _, _, _, Some((j, _)))) = spec {
            let partner = pairs
                .iter()
                .find(|(a, b, _)| *a == i || *b == i)
                .map(|(a, b, _)| if *a == i { *b } else { *a });
            if in_pair[*j] && partner != Some(*j) {
                return Err(infeasible(format!(
                    "{}: cap column must be unpaired or its own pair partner",
                    schema.columns[i].name
                )));
            }
        }
    }
    let mains = config
        .logit
        .main_effects
        .iter()
        .map(|t| Ok((resolve(&t.column)?, t.coef, t.center)))
        .collect::<Result<Vec<_>>>()?;
    let inters = config
        .logit
        .interactions
        .iter()
        .map(|t| Ok((resolve(&t.a)?, resolve(&t.b)?, t.coef, t.center_a, t.center_b)))
        .collect::<Result<Vec<_>>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = config.rows;
    let mut latent = vec![0.0; rows * n];
    let mut noise = vec![0.0; rows];
    let mut seconds = vec![0.0; rows];
    for row in 0..rows {
        for col in 0..n {
            if !schema.columns[col].response {
                latent[row * n + col] = rng.sample(StandardNormal);
            }
        }
        let u: f64 = rng.sample(Open01);
        noise[row] = libm::log(u / (1.0 - u));
        seconds[row] = rng.random::<f64>();
    }

    let mut generator = Generator {
        schema,
        plan,
        rows,
        latent,
    };
    for &(a, b, r) in &pairs {
        let rho = generator.calibrate(a, b, r)?;
        for row in 0..rows {
            let z = generator.mixed(row, a, b, rho);
            generator.latent[row * n + b] = z;
        }
    }

    // Uncapped columns first, then counts capped by another column.
    let mut encoded = vec![0.0; rows * n];
    for row in 0..rows {
        for pass_capped in [false, true] {
            for col in 0..n {
                if schema.columns[col].response {
                    continue;
                }
                let capped = matches!(generator.plan.normal[col], Some((_, _, _, _, Some(_))));
                if capped != pass_capped {
                    continue;
                }
                let v = generator.value(col, generator.z(row, col), |j| encoded[row * n + j]);
                encoded[row * n + col] = v;
            }
        }
    }

    let response = schema.response_index();
    let mut records = Vec::with_capacity(rows);
    for row in 0..rows {
        let x = |c: usize| encoded[row * n + c];
        let mut logit = config.logit.intercept;
        for &(c, coef, center) in &mains {
            logit += coef * (x(c) - center);
        }
        for &(a, b, coef, ca, cb) in &inters {
            logit += coef * (x(a) - ca) * (x(b) - cb);
        }
        let noisy = logit + config.logit.noise_scale * noise[row];
        let trust = 1 + config.trust_cutpoints.iter().filter(|&&c| c <= noisy).count();

        let values = schema
            .columns
            .iter()
            .enumerate()
            .map(|(c, col)| {
                if c == response {
                    return format!("{trust}");
                }
                let v = x(c);
                match &col.kind {
                    ColumnKind::Likert7 | ColumnKind::Count { .. } => format!("{}", v as i64),
                    ColumnKind::YesNo => String::from(if v == 1.0 { "Yes" } else { "No" }),
                    ColumnKind::Category { levels } => levels
                        .iter()
                        .find(|l| l.code == v)
                        .map(|l| l.label.clone())
                        .expect("generated code comes from the level table"),
                }
            })
            .collect();
        let completion_seconds = config.completion_seconds.as_ref().map(|s| {
            let t = s.min + (s.max - s.min) * seconds[row];
            libm::round(t * 10.0) / 10.0
        });
        records.push(SurveyRecord {
            index: row,
            values,
            completion_seconds,
        });
    }
    SurveyDataset::new(schema.clone(), records, Vec::new())
}
