//! Linear cost model over property counts per depth.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Add;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::descriptors::{Category, DescriptorSet};
use crate::eci::Eci;

pub const DEPTHS: usize = 5;
pub const CATEGORIES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum FeatureCategory {
    Rel,
    Ref,
    Col,
    Dm,
    Con,
    Cnt,
    Ord,
    Loc,
}

impl FeatureCategory {
    pub const ALL: [FeatureCategory; CATEGORIES] = [
        FeatureCategory::Rel,
        FeatureCategory::Ref,
        FeatureCategory::Col,
        FeatureCategory::Dm,
        FeatureCategory::Con,
        FeatureCategory::Cnt,
        FeatureCategory::Ord,
        FeatureCategory::Loc,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn acronym(self) -> &'static str {
        match self {
            FeatureCategory::Rel => "REL",
            FeatureCategory::Ref => "REF",
            FeatureCategory::Col => "COL",
            FeatureCategory::Dm => "DM",
            FeatureCategory::Con => "CON",
            FeatureCategory::Cnt => "CNT",
            FeatureCategory::Ord => "ORD",
            FeatureCategory::Loc => "LOC",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.acronym() == s)
    }
}

impl From<Category> for FeatureCategory {
    fn from(c: Category) -> Self {
        match c {
            Category::Ref => FeatureCategory::Ref,
            Category::Col => FeatureCategory::Col,
            Category::Dm => FeatureCategory::Dm,
            Category::Con => FeatureCategory::Con,
            Category::Cnt => FeatureCategory::Cnt,
            Category::Ord => FeatureCategory::Ord,
            Category::Loc => FeatureCategory::Loc,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CostError {
    #[error("depth index {0} is outside the model (max {max})", max = DEPTHS - 1)]
    DepthOutOfRange(usize),
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("design matrix is rank deficient (rank {rank} of {cols})")]
    RankDeficient { rank: usize, cols: usize },
    #[error("coefficient file: {0}")]
    Format(String),
}

/// Property counts `n[d][p]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct FeatureVector {
    counts: [[u32; CATEGORIES]; DEPTHS],
}

impl FeatureVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, c: FeatureCategory, depth: usize) -> u32 {
        self.counts.get(depth).map_or(0, |row| row[c.index()])
    }

    pub fn push(&mut self, c: FeatureCategory, depth: usize) -> Result<(), CostError> {
        let row = self
            .counts
            .get_mut(depth)
            .ok_or(CostError::DepthOutOfRange(depth))?;
        row[c.index()] += 1;
        Ok(())
    }

    pub fn with(mut self, c: FeatureCategory, depth: usize) -> Self {
        self.push(c, depth).expect("depth in range");
        self
    }

    /// Total number of properties.
    pub fn total(&self) -> u32 {
        self.counts.iter().flatten().sum()
    }

    /// Highest depth with a REL feature, i.e. the number of chained relations.
    pub fn rel_count(&self) -> u32 {
        self.counts.iter().map(|r| r[FeatureCategory::Rel.index()]).sum()
    }

    /// Flattened in (depth, category) order.
    pub fn as_slice(&self) -> Vec<f64> {
        self.counts.iter().flatten().map(|n| *n as f64).collect()
    }

    fn nonzero(&self) -> impl Iterator<Item = (usize, FeatureCategory, u32)> + '_ {
        self.counts.iter().enumerate().flat_map(|(d, row)| {
            FeatureCategory::ALL
                .into_iter()
                .filter(move |c| row[c.index()] > 0)
                .map(move |c| (d, c, row[c.index()]))
        })
    }
}

impl Add for FeatureVector {
    type Output = FeatureVector;
    fn add(mut self, rhs: Self) -> Self {
        for d in 0..DEPTHS {
            for p in 0..CATEGORIES {
                self.counts[d][p] += rhs.counts[d][p];
            }
        }
        self
    }
}

impl fmt::Display for FeatureVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .nonzero()
            .map(|(d, c, n)| format!("{}@{d}:{n}", c.acronym()))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

impl Serialize for FeatureVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let map: BTreeMap<String, u32> = self
            .nonzero()
            .map(|(d, c, n)| (format!("{}@{d}", c.acronym()), n))
            .collect();
        map.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FeatureVector {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let map = BTreeMap::<String, u32>::deserialize(de)?;
        let mut v = FeatureVector::new();
        for (k, n) in map {
            let (c, d) = k
                .split_once('@')
                .ok_or_else(|| D::Error::custom(format!("bad feature key {k}")))?;
            let c = FeatureCategory::parse(c).ok_or_else(|| D::Error::custom(format!("bad category {c}")))?;
            let d: usize = d.parse().map_err(D::Error::custom)?;
            if d >= DEPTHS {
                return Err(D::Error::custom(CostError::DepthOutOfRange(d)));
            }
            v.counts[d][c.index()] = n;
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientTable {
    pub weights: [[f64; CATEGORIES]; DEPTHS],
    pub intercept: f64,
}

/// Reference weights, rows d0..d4, columns REL REF COL DM CON CNT ORD LOC.
const REFERENCE: [[f64; CATEGORIES]; DEPTHS] = [
    [0.0; CATEGORIES],
    [0.099, 0.021, -0.053, -0.026, -0.042, -0.051, 0.077, -0.107],
    [0.088, 0.064, -0.065, 0.055, 0.114, -0.068, 0.183, -0.145],
    [0.096, 0.032, -0.116, 0.096, 0.0, -0.084, 0.0, 0.0],
    [0.0; CATEGORIES],
];

impl Default for CoefficientTable {
    fn default() -> Self {
        Self {
            weights: REFERENCE,
            intercept: 0.0386,
        }
    }
}

impl CoefficientTable {
    pub fn weight(&self, c: FeatureCategory, depth: usize) -> f64 {
        self.weights.get(depth).map_or(0.0, |row| row[c.index()])
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        let mut t = *self;
        for row in &mut t.weights {
            for w in row {
                *w *= lambda;
            }
        }
        t.intercept *= lambda;
        t
    }

    pub fn is_finite(&self) -> bool {
        self.intercept.is_finite() && self.weights.iter().flatten().all(|w| w.is_finite())
    }

    /// `{"d0": {"REL": 0.0, ...}, ..., "intercept": 0.0386}`
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("plain map")
    }

    fn to_file(self) -> serde_json::Value {
        let mut obj = serde_json::Map::new();
        for (d, row) in self.weights.iter().enumerate() {
            let cats: serde_json::Map<String, serde_json::Value> = FeatureCategory::ALL
                .into_iter()
                .map(|c| (c.acronym().to_string(), row[c.index()].into()))
                .collect();
            obj.insert(format!("d{d}"), cats.into());
        }
        obj.insert("intercept".into(), self.intercept.into());
        obj.into()
    }

    /// Parses the coefficient file. Missing depth rows or categories are
    /// zero; unknown keys are rejected.
    pub fn from_json(document: &str) -> Result<Self, CostError> {
        let v: serde_json::Value =
            serde_json::from_str(document).map_err(|e| CostError::Format(e.to_string()))?;
        let obj = v
            .as_object()
            .ok_or_else(|| CostError::Format("expected an object".into()))?;
        let mut t = CoefficientTable {
            weights: [[0.0; CATEGORIES]; DEPTHS],
            intercept: 0.0,
        };
        for (k, val) in obj {
            if k == "intercept" {
                t.intercept = val
                    .as_f64()
                    .ok_or_else(|| CostError::Format("intercept must be a number".into()))?;
                continue;
            }
            let d: usize = k
                .strip_prefix('d')
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| CostError::Format(format!("unknown key {k}")))?;
            if d >= DEPTHS {
                return Err(CostError::DepthOutOfRange(d));
            }
            let row = val
                .as_object()
                .ok_or_else(|| CostError::Format(format!("{k} must be an object")))?;
            for (c, w) in row {
                let c = FeatureCategory::parse(c)
                    .ok_or_else(|| CostError::Format(format!("unknown category {c}")))?;
                t.weights[d][c.index()] = w
                    .as_f64()
                    .ok_or_else(|| CostError::Format(format!("{k}.{} must be a number", c.acronym())))?;
            }
        }
        if !t.is_finite() {
            return Err(CostError::Format("non-finite coefficient".into()));
        }
        Ok(t)
    }
}

/// Property counts of a directive tree. Relations count at their chain
/// index; a ground's descriptors count at the index of the relation that
/// introduces it; an action-context directive is one CON at depth 0.
pub fn feature_vector(eci: &Eci) -> Result<FeatureVector, CostError> {
    let mut v = FeatureVector::new();
    match eci {
        Eci::ActionContext { .. } => v.push(FeatureCategory::Con, 0)?,
        Eci::Put { result, .. } => {
            let mut next = 1;
            relation_features(result, &mut next, &mut v)?;
        }
        other => {
            let mut next = 1;
            relation_features(other, &mut next, &mut v)?;
        }
    }
    Ok(v)
}

fn relation_features(e: &Eci, next: &mut usize, v: &mut FeatureVector) -> Result<(), CostError> {
    match e {
        Eci::Relation { ground, .. } => {
            let k = *next;
            *next += 1;
            v.push(FeatureCategory::Rel, k)?;
            ground_features(ground, k, next, v)
        }
        Eci::And { children } => children.iter().try_for_each(|c| relation_features(c, next, v)),
        Eci::Put { result, .. } => relation_features(result, next, v),
        Eci::Entity(_) | Eci::Frame { .. } | Eci::ActionContext { .. } => Ok(()),
    }
}

/// A ground's head descriptors count at the introducing relation's index;
/// its qualifier relations continue the numbering.
fn ground_features(g: &Eci, depth: usize, next: &mut usize, v: &mut FeatureVector) -> Result<(), CostError> {
    match g {
        Eci::Entity(r) => r
            .descriptors
            .iter()
            .try_for_each(|d| v.push(d.category().into(), depth)),
        Eci::Relation { figure, .. } => {
            ground_features(figure, depth, next, v)?;
            relation_features(g, next, v)
        }
        Eci::And { children } => {
            if let Some(Eci::Relation { figure, .. }) = children.first() {
                ground_features(figure, depth, next, v)?;
            }
            children.iter().try_for_each(|c| relation_features(c, next, v))
        }
        _ => Ok(()),
    }
}

pub fn cost(features: &FeatureVector, table: &CoefficientTable) -> f64 {
    features
        .nonzero()
        .map(|(d, c, n)| table.weight(c, d) * n as f64)
        .sum::<f64>()
        + table.intercept
}

/// Sum of the descriptors' weights at `depth`, without intercept.
pub fn descriptor_cost(d: &DescriptorSet, depth: usize, table: &CoefficientTable) -> f64 {
    d.iter()
        .map(|x| table.weight(x.category().into(), depth))
        .sum()
}

/// Least-squares fit of all weights plus intercept.
pub fn fit_coefficients(samples: &[(FeatureVector, f64)]) -> Result<CoefficientTable, CostError> {
    fit_columns(samples, &(0..DEPTHS * CATEGORIES).collect::<Vec<_>>())
}

/// Result of [`fit_observed`].
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedFit {
    pub table: CoefficientTable,
    pub fitted: Vec<(FeatureCategory, usize)>,
    /// Cells that occur but are linear combinations of the intercept and
    /// fitted cells; they keep weight 0.
    pub dependent: Vec<(FeatureCategory, usize)>,
}

/// Fits only the (category, depth) cells that occur in some sample. Cells
/// are admitted deepest-first with depth 0 last, and a cell that does not
/// raise the rank of the design matrix is left at weight 0, as are cells
/// that never occur.
pub fn fit_observed(samples: &[(FeatureVector, f64)]) -> Result<ObservedFit, CostError> {
    let rows: Vec<Vec<f64>> = samples.iter().map(|s| s.0.as_slice()).collect();
    let mut candidates: Vec<usize> = (0..DEPTHS * CATEGORIES)
        .filter(|&j| rows.iter().any(|r| r[j] != 0.0))
        .collect();
    candidates.sort_by_key(|&j| (j / CATEGORIES == 0, j / CATEGORIES, j % CATEGORIES));
    let rank_of = |cols: &[usize]| {
        let x = DMatrix::from_fn(rows.len(), cols.len() + 1, |i, k| if k == cols.len() { 1.0 } else { rows[i][cols[k]] });
        let svd = x.svd(false, false);
        let eps = svd.singular_values.max() * 1e-10 * rows.len().max(cols.len() + 1) as f64;
        svd.rank(eps)
    };
    let cell = |j: usize| (FeatureCategory::ALL[j % CATEGORIES], j / CATEGORIES);
    let (mut used, mut dependent) = (Vec::new(), Vec::new());
    for j in candidates {
        used.push(j);
        if rank_of(&used) < used.len() + 1 {
            used.pop();
            dependent.push(cell(j));
        }
    }
    let table = fit_columns(samples, &used)?;
    Ok(ObservedFit {
        table,
        fitted: used.into_iter().map(cell).collect(),
        dependent,
    })
}

fn fit_columns(samples: &[(FeatureVector, f64)], used: &[usize]) -> Result<CoefficientTable, CostError> {
    let cols = used.len() + 1;
    if samples.len() < cols {
        return Err(CostError::TooFewSamples {
            need: cols,
            got: samples.len(),
        });
    }
    let rows: Vec<Vec<f64>> = samples.iter().map(|s| s.0.as_slice()).collect();
    let x = DMatrix::from_fn(samples.len(), cols, |i, j| if j == cols - 1 { 1.0 } else { rows[i][used[j]] });
    let y = DVector::from_iterator(samples.len(), samples.iter().map(|s| s.1));
    let svd = x.svd(true, true);
    let smax = svd.singular_values.max();
    let eps = smax * 1e-10 * samples.len().max(cols) as f64;
    let rank = svd.rank(eps);
    if rank < cols {
        return Err(CostError::RankDeficient { rank, cols });
    }
    let beta = svd
        .solve(&y, eps)
        .map_err(|e| CostError::Format(e.to_string()))?;
    let mut t = CoefficientTable {
        weights: [[0.0; CATEGORIES]; DEPTHS],
        intercept: beta[cols - 1],
    };
    for (k, &j) in used.iter().enumerate() {
        t.weights[j / CATEGORIES][j % CATEGORIES] = beta[k];
    }
    Ok(t)
}
