//! Train/validation/test configurations C1 through C7.
//!
//! | name | construction |
//! |------|--------------|
//! | C1, C3 | plain 70/20/10 split of the CoAID-like / C19-Rumor-like corpus |
//! | C2, C4 | oversample the minority class, then stratified 70/20/10 |
//! | C5 | oversampled CoAID split 80/20 into train/validation; test is undersampled C19 |
//! | C6 | C5 with the corpora swapped |
//! | C7 | union of both corpora, stratified 70/20/10 |

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, CorpusError, Label, NewsItem};
use crate::rng::{derive_seed, rng_from_seed, shuffle};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("split ratios must be in [0,1] and sum to 1 (got {0}, {1}, {2})")]
    InvalidRatios(f64, f64, f64),
    #[error("cannot split an empty corpus")]
    EmptyCorpus,
    #[error("class {label} has {available} distinct items but {required} non-empty splits are requested")]
    InfeasibleSplit {
        label: Label,
        available: usize,
        required: usize,
    },
    #[error("corpus `{0}` contains a single class")]
    SingleClass(String),
    #[error("manifest references unknown id `{0}`")]
    UnknownId(String),
    #[error("split files in {} do not match manifest.json", .0.display())]
    ManifestMismatch(PathBuf),
    #[error("unknown configuration `{0}` (expected C1..C7)")]
    UnknownName(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl SplitRatios {
    pub fn new(train: f64, validation: f64, test: f64) -> Result<Self, ConfigError> {
        let ok = [train, validation, test]
            .iter()
            .all(|r| r.is_finite() && (0.0..=1.0).contains(r))
            && ((train + validation + test) - 1.0).abs() <= 1e-9;
        if ok {
            Ok(SplitRatios {
                train,
                validation,
                test,
            })
        } else {
            Err(ConfigError::InvalidRatios(train, validation, test))
        }
    }

    pub fn seventy_twenty_ten() -> Self {
        SplitRatios {
            train: 0.7,
            validation: 0.2,
            test: 0.1,
        }
    }

    pub fn eighty_twenty() -> Self {
        SplitRatios {
            train: 0.8,
            validation: 0.2,
            test: 0.0,
        }
    }

    fn nonzero_parts(&self) -> usize {
        [self.train, self.validation, self.test]
            .iter()
            .filter(|&&r| r > 0.0)
            .count()
    }
}

/// Split sizes for `n` items: `floor(train*n)`, `round(validation*n)`, and the
/// remainder for test. With a zero test ratio the remainder goes to validation.
pub fn split_sizes(n: usize, ratios: &SplitRatios) -> (usize, usize, usize) {
    // the epsilon keeps products like 0.7*10 = 7.000000000000001 (or 6.99..) on the right side of floor
    let nf = n as f64;
    let train = ((ratios.train * nf) + 1e-9).floor() as usize;
    let train = train.min(n);
    if ratios.test == 0.0 {
        return (train, n - train, 0);
    }
    let validation = ((ratios.validation * nf).round() as usize).min(n - train);
    (train, validation, n - train - validation)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitMode {
    Plain,
    Stratified,
}

/// Split a corpus into train/validation/test.
///
/// Items sharing an id (oversampled copies) always land in the same split.
/// Groups of equal id are shuffled and each is assigned to the split with the
/// largest remaining deficit against its target size, ties going to the
/// earlier split. For corpora with distinct ids the target sizes are hit
/// exactly. In stratified mode the procedure runs per class.
pub fn stratified_split(
    corpus: &Corpus,
    ratios: &SplitRatios,
    seed: u64,
    mode: SplitMode,
) -> Result<(Corpus, Corpus, Corpus), ConfigError> {
    if corpus.is_empty() {
        return Err(ConfigError::EmptyCorpus);
    }
    let ratios = SplitRatios::new(ratios.train, ratios.validation, ratios.test)?;
    let mut rng = rng_from_seed(seed);
    let mut parts: [Vec<NewsItem>; 3] = Default::default();
    match mode {
        SplitMode::Plain => {
            let all: Vec<&NewsItem> = corpus.iter().collect();
            assign_groups(&all, &ratios, &mut rng, &mut parts);
        }
        SplitMode::Stratified => {
            for label in [Label::Real, Label::Fake] {
                let members: Vec<&NewsItem> = corpus.iter().filter(|i| i.label == label).collect();
                if members.is_empty() {
                    continue;
                }
                let groups = group_by_id(&members).len();
                let required = ratios.nonzero_parts();
                if groups < required {
                    return Err(ConfigError::InfeasibleSplit {
                        label,
                        available: groups,
                        required,
                    });
                }
                assign_groups(&members, &ratios, &mut rng, &mut parts);
            }
            // interleave classes so batches are not class-sorted
            for part in parts.iter_mut() {
                shuffle(part, &mut rng);
            }
        }
    }
    let [train, validation, test] = parts;
    let name = corpus.name();
    Ok((
        Corpus::from_items_allow_repeats(format!("{name}/train"), train),
        Corpus::from_items_allow_repeats(format!("{name}/validation"), validation),
        Corpus::from_items_allow_repeats(format!("{name}/test"), test),
    ))
}

fn group_by_id<'a>(items: &[&'a NewsItem]) -> Vec<Vec<&'a NewsItem>> {
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut groups: Vec<Vec<&NewsItem>> = Vec::new();
    for &item in items {
        match index.get(item.id.as_str()) {
            Some(&g) => groups[g].push(item),
            None => {
                index.insert(item.id.as_str(), groups.len());
                groups.push(vec![item]);
            }
        }
    }
    groups
}

fn assign_groups(
    items: &[&NewsItem],
    ratios: &SplitRatios,
    rng: &mut crate::rng::SeededRng,
    parts: &mut [Vec<NewsItem>; 3],
) {
    let (a, b, c) = split_sizes(items.len(), ratios);
    let targets = [a as i64, b as i64, c as i64];
    let mut filled = [0i64; 3];
    let mut groups = group_by_id(items);
    shuffle(&mut groups, rng);
    for group in groups {
        let mut best = 0;
        for k in 1..3 {
            if targets[k] - filled[k] > targets[best] - filled[best] {
                best = k;
            }
        }
        filled[best] += group.len() as i64;
        parts[best].extend(group.into_iter().cloned());
    }
}

fn class_split(corpus: &Corpus) -> Result<(Vec<&NewsItem>, Vec<&NewsItem>), ConfigError> {
    let real: Vec<&NewsItem> = corpus.iter().filter(|i| i.label == Label::Real).collect();
    let fake: Vec<&NewsItem> = corpus.iter().filter(|i| i.label == Label::Fake).collect();
    if real.is_empty() || fake.is_empty() {
        return Err(ConfigError::SingleClass(corpus.name().to_string()));
    }
    Ok((real, fake))
}

/// Duplicate minority items (sampling with replacement) until both classes
/// reach the majority count. Originals come first, in corpus order, followed
/// by the drawn copies, which keep their source id.
pub fn oversample_to_majority(corpus: &Corpus, seed: u64) -> Result<Corpus, ConfigError> {
    use rand::Rng;
    let (real, fake) = class_split(corpus)?;
    let (minority, deficit) = if real.len() < fake.len() {
        let d = fake.len() - real.len();
        (real, d)
    } else {
        let d = real.len() - fake.len();
        (fake, d)
    };
    let mut rng = rng_from_seed(seed);
    let mut items: Vec<NewsItem> = corpus.items().to_vec();
    for _ in 0..deficit {
        let pick = rng.gen_range(0..minority.len());
        items.push(minority[pick].clone());
    }
    Ok(Corpus::from_items_allow_repeats(
        format!("{}+oversampled", corpus.name()),
        items,
    ))
}

/// Keep a uniformly chosen subset of the majority class equal in size to the
/// minority class. Survivors keep their original corpus order.
pub fn undersample_to_minority(corpus: &Corpus, seed: u64) -> Result<Corpus, ConfigError> {
    let (real, fake) = class_split(corpus)?;
    let (majority_label, keep) = if real.len() > fake.len() {
        (Label::Real, fake.len())
    } else {
        (Label::Fake, real.len())
    };
    let majority_positions: Vec<usize> = corpus
        .iter()
        .enumerate()
        .filter(|(_, i)| i.label == majority_label)
        .map(|(p, _)| p)
        .collect();
    let mut chosen = majority_positions;
    shuffle(&mut chosen, &mut rng_from_seed(seed));
    chosen.truncate(keep);
    let chosen: std::collections::HashSet<usize> = chosen.into_iter().collect();
    let items = corpus
        .iter()
        .enumerate()
        .filter(|(p, i)| i.label != majority_label || chosen.contains(p))
        .map(|(_, i)| i.clone())
        .collect();
    Ok(Corpus::from_items_allow_repeats(
        format!("{}+undersampled", corpus.name()),
        items,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConfigName {
    C1,
    C2,
    C3,
    C4,
    C5,
    C6,
    C7,
}

impl ConfigName {
    pub const ALL: [ConfigName; 7] = [
        ConfigName::C1,
        ConfigName::C2,
        ConfigName::C3,
        ConfigName::C4,
        ConfigName::C5,
        ConfigName::C6,
        ConfigName::C7,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ConfigName::C1 => "C1",
            ConfigName::C2 => "C2",
            ConfigName::C3 => "C3",
            ConfigName::C4 => "C4",
            ConfigName::C5 => "C5",
            ConfigName::C6 => "C6",
            ConfigName::C7 => "C7",
        }
    }
}

impl fmt::Display for ConfigName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConfigName {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ConfigName::ALL
            .into_iter()
            .find(|n| n.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| ConfigError::UnknownName(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetConfiguration {
    pub name: ConfigName,
    pub train: Corpus,
    pub validation: Corpus,
    pub test: Corpus,
    pub seed: u64,
    pub provenance: String,
}

fn counts(c: &Corpus) -> String {
    format!("{} real/{} fake", c.real_count(), c.fake_count())
}

/// Assemble one named configuration from the two source corpora.
///
/// Sub-steps draw their own seeds from `derive_seed(seed, "<name>/<step>")`;
/// every step and seed is written into the provenance string.
pub fn build_configuration(
    name: ConfigName,
    coaid: &Corpus,
    c19: &Corpus,
    seed: u64,
) -> Result<DatasetConfiguration, ConfigError> {
    let step = |s: &str| derive_seed(seed, &format!("{name}/{s}"));
    let mut log: Vec<String> = vec![format!("{name} seed={seed}")];
    let tvt = SplitRatios::seventy_twenty_ten();

    let (train, validation, test) = match name {
        ConfigName::C1 | ConfigName::C3 => {
            let src = if name == ConfigName::C1 { coaid } else { c19 };
            let s = step("split");
            log.push(format!(
                "plain split 70/20/10 of {} ({}) seed={s}",
                src.name(),
                counts(src)
            ));
            stratified_split(src, &tvt, s, SplitMode::Plain)?
        }
        ConfigName::C2 | ConfigName::C4 => {
            let src = if name == ConfigName::C2 { coaid } else { c19 };
            let so = step("oversample");
            let balanced = oversample_to_majority(src, so)?;
            log.push(format!(
                "oversample_to_majority({}) seed={so} -> {}",
                src.name(),
                counts(&balanced)
            ));
            let s = step("split");
            log.push(format!("stratified split 70/20/10 seed={s}"));
            stratified_split(&balanced, &tvt, s, SplitMode::Stratified)?
        }
        ConfigName::C5 | ConfigName::C6 => {
            let (fit_src, test_src) = if name == ConfigName::C5 {
                (coaid, c19)
            } else {
                (c19, coaid)
            };
            let so = step("oversample");
            let balanced = oversample_to_majority(fit_src, so)?;
            log.push(format!(
                "oversample_to_majority({}) seed={so} -> {}",
                fit_src.name(),
                counts(&balanced)
            ));
            let s = step("split");
            log.push(format!("stratified split 80/20 train/validation seed={s}"));
            let (train, validation, _) = stratified_split(
                &balanced,
                &SplitRatios::eighty_twenty(),
                s,
                SplitMode::Stratified,
            )?;
            let su = step("undersample");
            let test = undersample_to_minority(test_src, su)?;
            log.push(format!(
                "test = undersample_to_minority({}) seed={su} -> {}",
                test_src.name(),
                counts(&test)
            ));
            (train, validation, test)
        }
        ConfigName::C7 => {
            let mut items = coaid.items().to_vec();
            items.extend_from_slice(c19.items());
            let merged = Corpus::new(format!("{}+{}", coaid.name(), c19.name()), items)?;
            log.push(format!(
                "merge {} + {} -> {}",
                coaid.name(),
                c19.name(),
                counts(&merged)
            ));
            let s = step("split");
            log.push(format!("stratified split 70/20/10 seed={s}"));
            stratified_split(&merged, &tvt, s, SplitMode::Stratified)?
        }
    };
    log.push(format!(
        "train {} | validation {} | test {}",
        counts(&train),
        counts(&validation),
        counts(&test)
    ));
    let rename = |c: Corpus, split: &str| {
        Corpus::from_items_allow_repeats(format!("{name}/{split}"), c.items().to_vec())
    };
    Ok(DatasetConfiguration {
        name,
        train: rename(train, "train"),
        validation: rename(validation, "validation"),
        test: rename(test, "test"),
        seed,
        provenance: log.join("; "),
    })
}

/// Replayable description of a configuration: the ordered ids of each split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigManifest {
    pub name: ConfigName,
    pub seed: u64,
    pub provenance: String,
    pub splits: BTreeMap<String, Vec<String>>,
}

impl DatasetConfiguration {
    pub fn manifest(&self) -> ConfigManifest {
        let ids = |c: &Corpus| c.iter().map(|i| i.id.clone()).collect::<Vec<_>>();
        let mut splits = BTreeMap::new();
        splits.insert("train".to_string(), ids(&self.train));
        splits.insert("validation".to_string(), ids(&self.validation));
        splits.insert("test".to_string(), ids(&self.test));
        ConfigManifest {
            name: self.name,
            seed: self.seed,
            provenance: self.provenance.clone(),
            splits,
        }
    }

    /// Rebuild the splits of a manifest by looking ids up in the given corpora.
    pub fn from_manifest(
        manifest: &ConfigManifest,
        sources: &[&Corpus],
    ) -> Result<Self, ConfigError> {
        let lookup: HashMap<&str, &NewsItem> = sources
            .iter()
            .flat_map(|c| c.iter())
            .map(|i| (i.id.as_str(), i))
            .collect();
        let rebuild = |split: &str| -> Result<Corpus, ConfigError> {
            let ids = manifest.splits.get(split).map(Vec::as_slice).unwrap_or(&[]);
            let items = ids
                .iter()
                .map(|id| {
                    lookup
                        .get(id.as_str())
                        .map(|&i| i.clone())
                        .ok_or_else(|| ConfigError::UnknownId(id.clone()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Corpus::from_items_allow_repeats(
                format!("{}/{split}", manifest.name),
                items,
            ))
        };
        Ok(DatasetConfiguration {
            name: manifest.name,
            train: rebuild("train")?,
            validation: rebuild("validation")?,
            test: rebuild("test")?,
            seed: manifest.seed,
            provenance: manifest.provenance.clone(),
        })
    }

    /// Write `manifest.json` and `train.jsonl`, `validation.jsonl`,
    /// `test.jsonl` into `dir`; returns the written paths.
    pub fn save_dir(&self, dir: &Path) -> Result<Vec<PathBuf>, ConfigError> {
        let io = |source| CorpusError::Io {
            path: dir.to_path_buf(),
            source,
        };
        std::fs::create_dir_all(dir).map_err(io)?;
        let manifest = dir.join("manifest.json");
        let json = serde_json::to_string_pretty(&self.manifest()).expect("manifest serializes");
        std::fs::write(&manifest, json + "\n").map_err(io)?;
        let mut written = vec![manifest];
        for (split, corpus) in self.splits() {
            let path = dir.join(format!("{split}.jsonl"));
            corpus.write_jsonl(&path)?;
            written.push(path);
        }
        Ok(written)
    }

    /// Inverse of [`DatasetConfiguration::save_dir`].
    pub fn load_dir(dir: &Path) -> Result<Self, ConfigError> {
        let path = dir.join("manifest.json");
        let text = std::fs::read_to_string(&path).map_err(|source| CorpusError::Io {
            path: path.clone(),
            source,
        })?;
        let manifest: ConfigManifest =
            serde_json::from_str(&text).map_err(|e| CorpusError::Parse {
                path: path.clone(),
                line: e.line(),
                message: e.to_string(),
            })?;
        let read = |split: &str| {
            Corpus::read_jsonl(
                &dir.join(format!("{split}.jsonl")),
                format!("{}/{split}", manifest.name),
            )
        };
        let config = DatasetConfiguration {
            name: manifest.name,
            train: read("train")?,
            validation: read("validation")?,
            test: read("test")?,
            seed: manifest.seed,
            provenance: manifest.provenance.clone(),
        };
        if config.manifest() != manifest {
            return Err(ConfigError::ManifestMismatch(dir.to_path_buf()));
        }
        Ok(config)
    }

    pub fn splits(&self) -> [(&'static str, &Corpus); 3] {
        [
            ("train", &self.train),
            ("validation", &self.validation),
            ("test", &self.test),
        ]
    }
}
