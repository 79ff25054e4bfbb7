use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::oversampling::{self, BorderlineKind, OversampleParams};
use crate::resample::Resampled;
use crate::undersampling::{self, EnnCriterion, EnnMode, NearMissVersion};

/// The baseline plus the sixteen resampling methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodId {
    Baseline,
    RandomOversampling,
    Smote,
    BorderlineSmote,
    SvmSmote,
    KmeansSmote,
    Adasyn,
    RandomUndersampling,
    Cnn,
    Enn,
    RepeatedEnn,
    AllKnn,
    NearMiss,
    TomekLinks,
    OneSidedSelection,
    Ncl,
    ClusterCentroids,
}

impl MethodId {
    pub const ALL: [MethodId; 17] = [
        MethodId::Baseline,
        MethodId::RandomOversampling,
        MethodId::Smote,
        MethodId::BorderlineSmote,
        MethodId::SvmSmote,
        MethodId::KmeansSmote,
        MethodId::Adasyn,
        MethodId::RandomUndersampling,
        MethodId::Cnn,
        MethodId::Enn,
        MethodId::RepeatedEnn,
        MethodId::AllKnn,
        MethodId::NearMiss,
        MethodId::TomekLinks,
        MethodId::OneSidedSelection,
        MethodId::Ncl,
        MethodId::ClusterCentroids,
    ];

    pub fn id(self) -> &'static str {
        match self {
            MethodId::Baseline => "baseline",
            MethodId::RandomOversampling => "random_oversampling",
            MethodId::Smote => "smote",
            MethodId::BorderlineSmote => "borderline_smote",
            MethodId::SvmSmote => "svm_smote",
            MethodId::KmeansSmote => "kmeans_smote",
            MethodId::Adasyn => "adasyn",
            MethodId::RandomUndersampling => "random_undersampling",
            MethodId::Cnn => "cnn",
            MethodId::Enn => "enn",
            MethodId::RepeatedEnn => "repeated_enn",
            MethodId::AllKnn => "all_knn",
            MethodId::NearMiss => "near_miss",
            MethodId::TomekLinks => "tomek_links",
            MethodId::OneSidedSelection => "one_sided_selection",
            MethodId::Ncl => "ncl",
            MethodId::ClusterCentroids => "cluster_centroids",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            MethodId::Baseline => "Baseline",
            MethodId::RandomOversampling => "Random Oversampling",
            MethodId::Smote => "SMOTE",
            MethodId::BorderlineSmote => "Borderline SMOTE",
            MethodId::SvmSmote => "SVM SMOTE",
            MethodId::KmeansSmote => "KMeans SMOTE",
            MethodId::Adasyn => "ADASYN",
            MethodId::RandomUndersampling => "Random Undersampling",
            MethodId::Cnn => "CNN",
            MethodId::Enn => "ENN",
            MethodId::RepeatedEnn => "Repeated ENN",
            MethodId::AllKnn => "All KNN",
            MethodId::NearMiss => "Near Miss",
            MethodId::TomekLinks => "Tomek Links",
            MethodId::OneSidedSelection => "One-Sided Selection",
            MethodId::Ncl => "NCL",
            MethodId::ClusterCentroids => "Cluster Centroids",
        }
    }

    pub fn is_oversampler(self) -> bool {
        matches!(
            self,
            MethodId::RandomOversampling
                | MethodId::Smote
                | MethodId::BorderlineSmote
                | MethodId::SvmSmote
                | MethodId::KmeansSmote
                | MethodId::Adasyn
        )
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// Accepts the snake_case id or the display name, ignoring case.
impl FromStr for MethodId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .trim()
            .chars()
            .map(|c| if c == ' ' || c == '-' { '_' } else { c.to_ascii_lowercase() })
            .collect();
        MethodId::ALL
            .into_iter()
            .find(|m| m.id() == norm)
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Number(f64),
    Text(String),
}

impl ParamValue {
    /// Numbers for anything that parses as `f64`, text otherwise.
    pub fn parse(raw: &str) -> Self {
        raw.trim()
            .parse::<f64>()
            .map(ParamValue::Number)
            .unwrap_or_else(|_| ParamValue::Text(raw.trim().to_string()))
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Number(v) => write!(f, "{v}"),
            ParamValue::Text(t) => f.write_str(t),
        }
    }
}

impl From<f64> for ParamValue {
    fn from(v: f64) -> Self {
        ParamValue::Number(v)
    }
}

impl From<&str> for ParamValue {
    fn from(v: &str) -> Self {
        ParamValue::Text(v.to_string())
    }
}

pub type Params = BTreeMap<String, ParamValue>;

#[derive(Debug, Clone, Copy)]
enum Kind {
    /// In `(0, 1]`.
    Ratio,
    /// Integer `>= 1`.
    Count,
    /// Integer `>= 0`.
    NonNegative,
    /// Finite and `> 0`.
    Positive,
    Choice(&'static [&'static str]),
}

#[derive(Debug, Clone, Copy)]
struct ParamSpec {
    name: &'static str,
    kind: Kind,
    default: DefaultValue,
}

#[derive(Debug, Clone, Copy)]
enum DefaultValue {
    Num(f64),
    Text(&'static str),
}

const fn spec(name: &'static str, kind: Kind, default: DefaultValue) -> ParamSpec {
    ParamSpec { name, kind, default }
}

const RATIO: ParamSpec = spec("ratio", Kind::Ratio, DefaultValue::Num(1.0));
const K: ParamSpec = spec("k", Kind::Count, DefaultValue::Num(5.0));
const K3: ParamSpec = spec("k", Kind::Count, DefaultValue::Num(3.0));
const CRITERION: ParamSpec = spec("criterion", Kind::Choice(&["mode", "all"]), DefaultValue::Text("mode"));
const SEEDS: ParamSpec = spec("seeds", Kind::NonNegative, DefaultValue::Num(1.0));

fn schema(method: MethodId) -> Vec<ParamSpec> {
    use MethodId::*;
    match method {
        Baseline | TomekLinks => vec![],
        RandomOversampling | RandomUndersampling => vec![RATIO],
        Smote | Adasyn => vec![RATIO, K],
        BorderlineSmote => vec![
            RATIO,
            K,
            spec("m", Kind::Count, DefaultValue::Num(10.0)),
            spec("kind", Kind::Choice(&["borderline-1", "borderline-2"]), DefaultValue::Text("borderline-1")),
        ],
        SvmSmote => vec![RATIO, K, spec("c", Kind::Positive, DefaultValue::Num(1.0))],
        KmeansSmote => vec![
            RATIO,
            K,
            spec("clusters", Kind::Count, DefaultValue::Num(8.0)),
            spec("exponent", Kind::Positive, DefaultValue::Num(1.0)),
        ],
        Cnn | OneSidedSelection => vec![SEEDS],
        Enn | RepeatedEnn | AllKnn => vec![K3, CRITERION],
        NearMiss => vec![spec("version", Kind::Choice(&["1", "2", "3"]), DefaultValue::Num(1.0)), K3, RATIO],
        Ncl => vec![K3, CRITERION, spec("threshold", Kind::Positive, DefaultValue::Num(0.5))],
        ClusterCentroids => vec![RATIO, spec("restarts", Kind::Count, DefaultValue::Num(1.0))],
    }
}

fn check(method: MethodId, s: &ParamSpec, v: &ParamValue) -> Result<()> {
    let bad = || {
        Error::InvalidParameter(format!("{method}: invalid value {v} for parameter '{}'", s.name))
    };
    match (s.kind, v) {
        (Kind::Ratio, ParamValue::Number(x)) if *x > 0.0 && *x <= 1.0 => Ok(()),
        (Kind::Count, ParamValue::Number(x)) if *x >= 1.0 && x.fract() == 0.0 => Ok(()),
        (Kind::NonNegative, ParamValue::Number(x)) if *x >= 0.0 && x.fract() == 0.0 => Ok(()),
        (Kind::Positive, ParamValue::Number(x)) if x.is_finite() && *x > 0.0 => Ok(()),
        (Kind::Choice(opts), v) if opts.contains(&v.to_string().as_str()) => Ok(()),
        _ => Err(bad()),
    }
}

/// One method plus one hyperparameter assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodConfig {
    pub method: MethodId,
    pub params: Params,
    /// Position within the method's grid.
    pub config_index: usize,
}

impl MethodConfig {
    /// Validates `params` against the method schema. Missing parameters take
    /// their defaults.
    pub fn new(method: MethodId, params: Params, config_index: usize) -> Result<Self> {
        let specs = schema(method);
        if let Some(k) = params.keys().find(|k| !specs.iter().any(|s| s.name == k.as_str())) {
            return Err(Error::InvalidParameter(format!("{method}: unknown parameter '{k}'")));
        }
        let mut full = Params::new();
        for s in &specs {
            let v = match params.get(s.name) {
                Some(v) => v.clone(),
                None => match s.default {
                    DefaultValue::Num(x) => ParamValue::Number(x),
                    DefaultValue::Text(t) => ParamValue::Text(t.into()),
                },
            };
            check(method, s, &v)?;
            full.insert(s.name.to_string(), v);
        }
        Ok(Self {
            method,
            params: full,
            config_index,
        })
    }

    /// Parses `k=5,ratio=1.0`.
    pub fn parse_params(spec: &str) -> Result<Params> {
        spec.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|kv| {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| Error::InvalidParameter(format!("expected key=value, got '{kv}'")))?;
                Ok((k.trim().to_string(), ParamValue::parse(v)))
            })
            .collect()
    }

    fn num(&self, name: &str) -> f64 {
        match self.params.get(name) {
            Some(ParamValue::Number(x)) => *x,
            Some(ParamValue::Text(t)) => t.parse().expect("validated"),
            None => panic!("parameter '{name}' missing after validation"),
        }
    }

    fn count(&self, name: &str) -> usize {
        self.num(name) as usize
    }

    fn text(&self, name: &str) -> String {
        self.params.get(name).map(ToString::to_string).expect("validated")
    }

    fn criterion(&self) -> EnnCriterion {
        if self.text("criterion") == "all" {
            EnnCriterion::All
        } else {
            EnnCriterion::Mode
        }
    }

    fn oversample_params(&self) -> OversampleParams {
        let mut p = OversampleParams {
            target_ratio: self.num("ratio"),
            k_neighbors: self.count("k"),
            ..OversampleParams::default()
        };
        match self.method {
            MethodId::BorderlineSmote => {
                p.m_neighbors = self.count("m");
                p.kind = if self.text("kind") == "borderline-2" {
                    BorderlineKind::Borderline2
                } else {
                    BorderlineKind::Borderline1
                };
            }
            MethodId::SvmSmote => p.svm_c = self.num("c"),
            MethodId::KmeansSmote => {
                p.n_clusters = self.count("clusters");
                p.sparsity_exponent = self.num("exponent");
            }
            _ => {}
        }
        p
    }

    /// Applies the method to a training set.
    pub fn resample(&self, d: &LabeledDataset, seed: u64) -> Result<Resampled> {
        use MethodId::*;
        let max_iter = undersampling::DEFAULT_ENN_MAX_ITER;
        match self.method {
            Baseline => Ok(d.clone().into()),
            RandomOversampling => oversampling::random_oversample(d, self.num("ratio"), seed),
            Smote => oversampling::smote(d, &self.oversample_params(), seed),
            BorderlineSmote => oversampling::borderline_smote(d, &self.oversample_params(), seed),
            SvmSmote => oversampling::svm_smote(d, &self.oversample_params(), seed),
            KmeansSmote => oversampling::kmeans_smote(d, &self.oversample_params(), seed),
            Adasyn => oversampling::adasyn(d, &self.oversample_params(), seed),
            RandomUndersampling => undersampling::random_undersample(d, self.num("ratio"), seed),
            Cnn => undersampling::condensed_nn(d, self.count("seeds"), seed),
            Enn => undersampling::edited_nn(d, self.count("k"), self.criterion(), EnnMode::Single, max_iter),
            RepeatedEnn => {
                undersampling::edited_nn(d, self.count("k"), self.criterion(), EnnMode::Repeated, max_iter)
            }
            AllKnn => undersampling::edited_nn(d, self.count("k"), self.criterion(), EnnMode::AllKnn, max_iter),
            NearMiss => undersampling::near_miss(
                d,
                NearMissVersion::from_number(self.count("version") as u8)?,
                self.count("k"),
                self.num("ratio"),
            ),
            TomekLinks => undersampling::tomek_links(d),
            OneSidedSelection => undersampling::one_sided_selection(d, self.count("seeds"), seed),
            Ncl => undersampling::ncl(d, self.count("k"), self.criterion(), self.num("threshold")),
            ClusterCentroids => {
                undersampling::cluster_centroids(d, self.num("ratio"), seed, self.count("restarts"))
            }
        }
    }
}

impl fmt::Display for MethodConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.method, self.config_index)?;
        let parts: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        if !parts.is_empty() {
            write!(f, "({})", parts.join(","))?;
        }
        Ok(())
    }
}

/// Cartesian product of named value lists, first axis varying slowest.
fn product(axes: &[(&str, Vec<ParamValue>)]) -> Vec<Params> {
    axes.iter().fold(vec![Params::new()], |acc, (name, values)| {
        acc.iter()
            .flat_map(|p| {
                values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.insert(name.to_string(), v.clone());
                    q
                })
            })
            .collect()
    })
}

fn nums(xs: &[f64]) -> Vec<ParamValue> {
    xs.iter().map(|&x| ParamValue::Number(x)).collect()
}

fn texts(xs: &[&str]) -> Vec<ParamValue> {
    xs.iter().map(|&x| ParamValue::from(x)).collect()
}

/// The benchmark grid for one method.
pub fn expand_grid(method: MethodId) -> Vec<MethodConfig> {
    use MethodId::*;
    let ratio = ("ratio", nums(&[0.5, 1.0]));
    let k = ("k", nums(&[3.0, 5.0]));
    let criterion = ("criterion", texts(&["mode", "all"]));
    let seeds = ("seeds", nums(&[1.0, 5.0]));
    let axes: Vec<(&str, Vec<ParamValue>)> = match method {
        Baseline | TomekLinks => vec![],
        RandomOversampling | RandomUndersampling => vec![ratio],
        Smote | KmeansSmote | Adasyn => vec![ratio, k],
        BorderlineSmote => vec![
            ratio,
            k,
            ("m", nums(&[5.0, 10.0])),
            ("kind", texts(&["borderline-1", "borderline-2"])),
        ],
        SvmSmote => vec![ratio, k, ("c", nums(&[0.1, 1.0]))],
        Cnn | OneSidedSelection => vec![seeds],
        Enn | RepeatedEnn | AllKnn => vec![k, criterion],
        NearMiss => vec![("version", nums(&[1.0, 2.0, 3.0])), k, ratio],
        Ncl => vec![k, criterion, ("threshold", nums(&[0.3, 0.5]))],
        ClusterCentroids => vec![ratio, ("restarts", nums(&[1.0, 5.0]))],
    };
    product(&axes)
        .into_iter()
        .enumerate()
        .map(|(i, p)| MethodConfig::new(method, p, i).expect("grid values satisfy the schema"))
        .collect()
}
