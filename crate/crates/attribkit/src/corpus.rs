//! Corpus data model: samples, language and author-class registries,
//! JSONL ingestion, balance validation, and language selection.

use crate::error::{Error, Result};
use crate::seed;
use rand::seq::index::sample as index_sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

/// One language: ISO-style code plus the taxonomy axes used for grouping.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageInfo {
    pub code: String,
    pub family: String,
    pub script: String,
}

/// The 18 built-in languages in report column order (grouped by family,
/// with Uralic/Hellenic/Semitic/Sino-Tibetan trailing as "others").
const BUILTIN_LANGUAGES: &[(&str, &str, &str)] = &[
    ("de", "Germanic", "Latin"),
    ("en", "Germanic", "Latin"),
    ("nl", "Germanic", "Latin"),
    ("es", "Romance", "Latin"),
    ("pt", "Romance", "Latin"),
    ("ro", "Romance", "Latin"),
    ("cs", "Slavic-Latin", "Latin"),
    ("hr", "Slavic-Latin", "Latin"),
    ("pl", "Slavic-Latin", "Latin"),
    ("sk", "Slavic-Latin", "Latin"),
    ("sl", "Slavic-Latin", "Latin"),
    ("bg", "Slavic-Cyrillic", "Cyrillic"),
    ("ru", "Slavic-Cyrillic", "Cyrillic"),
    ("uk", "Slavic-Cyrillic", "Cyrillic"),
    ("hu", "Uralic", "Latin"),
    ("el", "Hellenic", "Greek"),
    ("ar", "Semitic", "Arabic"),
    ("zh", "Sino-Tibetan", "Hanzi"),
];

/// Short script labels used in report footers.
pub fn script_abbreviation(script: &str) -> &str {
    match script {
        "Latin" => "Lat",
        "Cyrillic" => "Cyr",
        "Greek" => "Grk",
        "Arabic" => "Arab",
        "Hanzi" => "Han",
        other => other,
    }
}

/// Ordered language registry. Lookup is by code; iteration order is the
/// report column order.
#[derive(Debug, Clone)]
pub struct LanguageRegistry {
    entries: Vec<LanguageInfo>,
    index: HashMap<String, usize>,
}

impl LanguageRegistry {
    /// The built-in 18-language registry.
    pub fn builtin() -> Self {
        let entries = BUILTIN_LANGUAGES
            .iter()
            .map(|(code, family, script)| LanguageInfo {
                code: (*code).to_string(),
                family: (*family).to_string(),
                script: (*script).to_string(),
            })
            .collect();
        Self::from_entries(entries)
    }

    pub fn from_entries(entries: Vec<LanguageInfo>) -> Self {
        let mut index = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            index.insert(e.code.clone(), i);
        }
        LanguageRegistry { entries, index }
    }

    /// Built-in registry extended by entries from a JSON override file
    /// (`[{"code","family","script"}, ...]`). Extension entries win on
    /// code collisions.
    pub fn builtin_with_extension(path: &Path) -> Result<Self> {
        let text = crate::fsutil::read_to_string(path)?;
        let extra: Vec<LanguageInfo> = serde_json::from_str(&text)
            .map_err(|e| Error::json(path.display().to_string(), e))?;
        let mut reg = Self::builtin();
        for e in extra {
            reg.insert(e);
        }
        Ok(reg)
    }

    /// Insert or replace an entry.
    pub fn insert(&mut self, info: LanguageInfo) {
        match self.index.get(&info.code) {
            Some(&i) => self.entries[i] = info,
            None => {
                self.index.insert(info.code.clone(), self.entries.len());
                self.entries.push(info);
            }
        }
    }

    pub fn get(&self, code: &str) -> Option<&LanguageInfo> {
        self.index.get(code).map(|&i| &self.entries[i])
    }

    pub fn contains(&self, code: &str) -> bool {
        self.index.contains_key(code)
    }

    pub fn entries(&self) -> &[LanguageInfo] {
        &self.entries
    }

    /// Families in registry order (first appearance), with their language codes.
    pub fn families(&self) -> Vec<(String, Vec<String>)> {
        let mut order: Vec<String> = Vec::new();
        let mut members: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for e in &self.entries {
            if !members.contains_key(&e.family) {
                order.push(e.family.clone());
            }
            members.entry(e.family.clone()).or_default().push(e.code.clone());
        }
        order
            .into_iter()
            .map(|f| {
                let langs = members.remove(&f).unwrap();
                (f, langs)
            })
            .collect()
    }
}

/// Whether an author class is the human class or a machine generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassKind {
    Human,
    Machine,
}

/// One author class: a generator identity or the human class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorClass {
    pub name: String,
    pub kind: ClassKind,
    pub letter: char,
}

/// The 8 default classes in single-letter display order M,O,E,V,L,A,G,H.
const DEFAULT_CLASSES: &[(&str, ClassKind, char)] = &[
    ("mistral", ClassKind::Machine, 'M'),
    ("opt", ClassKind::Machine, 'O'),
    ("eagle", ClassKind::Machine, 'E'),
    ("vicuna", ClassKind::Machine, 'V'),
    ("llama2", ClassKind::Machine, 'L'),
    ("aya", ClassKind::Machine, 'A'),
    ("gpt-3.5", ClassKind::Machine, 'G'),
    ("human", ClassKind::Human, 'H'),
];

/// Ordered author-class registry with exactly one human class.
#[derive(Debug, Clone)]
pub struct ClassRegistry {
    classes: Vec<AuthorClass>,
    index: HashMap<String, usize>,
}

impl ClassRegistry {
    /// The default 8-class registry (7 generators + human).
    pub fn default_classes() -> Self {
        let classes = DEFAULT_CLASSES
            .iter()
            .map(|(name, kind, letter)| AuthorClass {
                name: (*name).to_string(),
                kind: *kind,
                letter: *letter,
            })
            .collect();
        Self::from_classes(classes).expect("default registry is valid")
    }

    /// Build from an explicit class list; enforces the single-human invariant.
    pub fn from_classes(classes: Vec<AuthorClass>) -> Result<Self> {
        let humans = classes.iter().filter(|c| c.kind == ClassKind::Human).count();
        if humans != 1 {
            return Err(Error::Eval(format!(
                "class registry must contain exactly one human class, found {humans}"
            )));
        }
        let mut index = HashMap::new();
        for (i, c) in classes.iter().enumerate() {
            if index.insert(c.name.clone(), i).is_some() {
                return Err(Error::Eval(format!("duplicate class name `{}`", c.name)));
            }
        }
        Ok(ClassRegistry { classes, index })
    }

    /// Admit an unregistered label as a machine class with a derived letter.
    /// The label `human` is never machine; it already exists in defaults.
    fn admit(&mut self, name: &str) {
        if self.index.contains_key(name) {
            return;
        }
        let taken: BTreeSet<char> = self.classes.iter().map(|c| c.letter).collect();
        let letter = name
            .chars()
            .filter(|c| c.is_alphanumeric())
            .map(|c| c.to_ascii_uppercase())
            .find(|c| !taken.contains(c))
            .unwrap_or('?');
        self.index.insert(name.to_string(), self.classes.len());
        self.classes.push(AuthorClass {
            name: name.to_string(),
            kind: ClassKind::Machine,
            letter,
        });
    }

    pub fn get(&self, name: &str) -> Option<&AuthorClass> {
        self.index.get(name).map(|&i| &self.classes[i])
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn human(&self) -> &AuthorClass {
        self.classes
            .iter()
            .find(|c| c.kind == ClassKind::Human)
            .expect("registry invariant: one human class")
    }

    pub fn classes(&self) -> &[AuthorClass] {
        &self.classes
    }

    /// Names in registry order.
    pub fn names(&self) -> Vec<String> {
        self.classes.iter().map(|c| c.name.clone()).collect()
    }
}

/// Train/test split membership.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Split::Train => write!(f, "train"),
            Split::Test => write!(f, "test"),
        }
    }
}

/// One document with its language, author class, and split membership.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextSample {
    pub id: String,
    pub text: String,
    pub lang: String,
    pub label: String,
    pub split: Split,
}

/// Per-(language, label, split) sample counts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    counts: BTreeMap<String, BTreeMap<String, BTreeMap<Split, usize>>>,
}

impl CorpusStats {
    fn tally(samples: &[TextSample]) -> Self {
        let mut stats = CorpusStats::default();
        for s in samples {
            *stats
                .counts
                .entry(s.lang.clone())
                .or_default()
                .entry(s.label.clone())
                .or_default()
                .entry(s.split)
                .or_insert(0) += 1;
        }
        stats
    }

    pub fn count(&self, lang: &str, label: &str, split: Split) -> usize {
        self.counts
            .get(lang)
            .and_then(|m| m.get(label))
            .and_then(|m| m.get(&split))
            .copied()
            .unwrap_or(0)
    }

    pub fn split_total(&self, split: Split) -> usize {
        self.counts
            .values()
            .flat_map(|m| m.values())
            .filter_map(|m| m.get(&split))
            .sum()
    }

    pub fn lang_split_total(&self, lang: &str, split: Split) -> usize {
        self.counts
            .get(lang)
            .map(|m| m.values().filter_map(|c| c.get(&split)).sum())
            .unwrap_or(0)
    }

    /// Languages present, sorted.
    pub fn langs(&self) -> Vec<String> {
        self.counts.keys().cloned().collect()
    }

    /// Labels present anywhere in the corpus, sorted.
    pub fn labels(&self) -> Vec<String> {
        let mut out = BTreeSet::new();
        for m in self.counts.values() {
            out.extend(m.keys().cloned());
        }
        out.into_iter().collect()
    }
}

/// An immutable corpus plus the registries its codes resolve in.
#[derive(Debug, Clone)]
pub struct Corpus {
    samples: Vec<TextSample>,
    stats: CorpusStats,
    pub languages: LanguageRegistry,
    pub classes: ClassRegistry,
}

impl Corpus {
    pub fn from_samples(
        samples: Vec<TextSample>,
        languages: LanguageRegistry,
        classes: ClassRegistry,
    ) -> Self {
        let stats = CorpusStats::tally(&samples);
        Corpus {
            samples,
            stats,
            languages,
            classes,
        }
    }

    pub fn samples(&self) -> &[TextSample] {
        &self.samples
    }

    pub fn stats(&self) -> &CorpusStats {
        &self.stats
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Samples of one split, in corpus order.
    pub fn split_samples(&self, split: Split) -> Vec<&TextSample> {
        self.samples.iter().filter(|s| s.split == split).collect()
    }

    /// New corpus containing only the given split, preserving order.
    pub fn restrict_to_split(&self, split: Split) -> Corpus {
        let samples = self
            .samples
            .iter()
            .filter(|s| s.split == split)
            .cloned()
            .collect();
        Corpus::from_samples(samples, self.languages.clone(), self.classes.clone())
    }

    /// Concatenate two corpora sharing registries (used to rejoin a selected
    /// train subset with a test subset).
    pub fn concat(&self, other: &Corpus) -> Corpus {
        let mut samples = self.samples.clone();
        samples.extend(other.samples.iter().cloned());
        Corpus::from_samples(samples, self.languages.clone(), self.classes.clone())
    }

    /// Class names observed in the corpus, in class-registry order.
    pub fn observed_classes(&self) -> Vec<String> {
        let present: BTreeSet<String> = self.stats.labels().into_iter().collect();
        self.classes
            .names()
            .into_iter()
            .filter(|n| present.contains(n))
            .collect()
    }
}

/// Options controlling corpus ingestion.
#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub languages: LanguageRegistry,
    pub classes: ClassRegistry,
    /// Admit languages/labels missing from the registries; unknown languages
    /// get family/script "unknown", unknown labels become machine classes.
    pub allow_unregistered: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            languages: LanguageRegistry::builtin(),
            classes: ClassRegistry::default_classes(),
            allow_unregistered: false,
        }
    }
}

/// Load a corpus from a UTF-8 JSONL file (one sample object per line).
///
/// Blank lines are ignored. Errors name the offending line; duplicate ids
/// name both occurrences.
pub fn load_corpus(path: &Path, opts: &LoadOptions) -> Result<Corpus> {
    let display = path.display().to_string();
    let text = crate::fsutil::read_to_string(path)?;
    parse_corpus(&text, &display, opts)
}

/// Parse corpus JSONL from an in-memory string. `origin` names the source
/// in error messages.
pub fn parse_corpus(text: &str, origin: &str, opts: &LoadOptions) -> Result<Corpus> {
    let mut languages = opts.languages.clone();
    let mut classes = opts.classes.clone();
    let mut samples: Vec<TextSample> = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();

    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let sample: TextSample =
            serde_json::from_str(line).map_err(|e| Error::MalformedRecord {
                path: origin.to_string(),
                line: lineno,
                message: e.to_string(),
            })?;
        if sample.text.is_empty() {
            return Err(Error::MalformedRecord {
                path: origin.to_string(),
                line: lineno,
                message: format!("sample `{}` has empty text", sample.id),
            });
        }
        if let Some(&first) = seen.get(&sample.id) {
            return Err(Error::DuplicateId {
                id: sample.id,
                first,
                second: lineno,
            });
        }
        if !languages.contains(&sample.lang) {
            if opts.allow_unregistered {
                languages.insert(LanguageInfo {
                    code: sample.lang.clone(),
                    family: "unknown".to_string(),
                    script: "unknown".to_string(),
                });
            } else {
                return Err(Error::Unregistered {
                    what: "language",
                    value: sample.lang,
                    line: lineno,
                });
            }
        }
        if !classes.contains(&sample.label) {
            if opts.allow_unregistered {
                classes.admit(&sample.label);
            } else {
                return Err(Error::Unregistered {
                    what: "label",
                    value: sample.label,
                    line: lineno,
                });
            }
        }
        seen.insert(sample.id.clone(), lineno);
        samples.push(sample);
    }

    Ok(Corpus::from_samples(samples, languages, classes))
}

/// Serialize a corpus back to the JSONL interchange format.
pub fn corpus_to_jsonl(samples: &[TextSample]) -> String {
    let mut out = String::new();
    for s in samples {
        out.push_str(&serde_json::to_string(s).expect("sample serializes"));
        out.push('\n');
    }
    out
}

/// Per-class sample-count targets for each split.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BalanceTargets {
    pub train_per_class: usize,
    pub test_per_class: usize,
}

/// One failing (class, split) cell in a balance report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellShortfall {
    pub lang: String,
    pub label: String,
    pub split: Split,
    pub count: usize,
    pub required: usize,
}

/// Balance verdict per language plus the overall verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BalanceReport {
    pub per_language: Vec<(String, bool)>,
    pub failures: Vec<CellShortfall>,
    pub pass: bool,
}

/// Check every (language, class, split) cell against
/// `min_fraction * target`. Classes checked are those observed anywhere in
/// the corpus, so a language missing a class entirely fails on that cell.
pub fn validate_balance(
    corpus: &Corpus,
    targets: BalanceTargets,
    min_fraction: f64,
) -> Result<BalanceReport> {
    if targets.train_per_class == 0 || targets.test_per_class == 0 {
        return Err(Error::InvalidSelection("balance targets must be > 0".into()));
    }
    if !(min_fraction > 0.0 && min_fraction <= 1.0) {
        return Err(Error::InvalidSelection(
            "min_fraction must lie in (0, 1]".into(),
        ));
    }
    let labels = corpus.stats().labels();
    let mut per_language = Vec::new();
    let mut failures = Vec::new();
    for lang in corpus.stats().langs() {
        let mut lang_pass = true;
        for label in &labels {
            for (split, target) in [
                (Split::Train, targets.train_per_class),
                (Split::Test, targets.test_per_class),
            ] {
                let required = (min_fraction * target as f64).ceil() as usize;
                let count = corpus.stats().count(&lang, label, split);
                if count < required {
                    lang_pass = false;
                    failures.push(CellShortfall {
                        lang: lang.clone(),
                        label: label.clone(),
                        split,
                        count,
                        required,
                    });
                }
            }
        }
        per_language.push((lang, lang_pass));
    }
    let pass = per_language.iter().all(|(_, p)| *p);
    Ok(BalanceReport {
        per_language,
        failures,
        pass,
    })
}

/// A language-selection request: which languages feed the human and machine
/// sides, with optional per-cell subsampling.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct SelectionSpec {
    pub human_langs: BTreeSet<String>,
    pub machine_langs: BTreeSet<String>,
    /// Hard cap applied to every (language, class, split) cell after `fraction`.
    #[serde(default)]
    pub per_class_cap: Option<usize>,
    /// Per-cell subsampling fraction in (0, 1]; cells shrink to ⌈fraction × cell⌉.
    #[serde(default)]
    pub fraction: Option<f64>,
}

impl SelectionSpec {
    /// Same languages on both sides, no subsampling.
    pub fn all_of(langs: impl IntoIterator<Item = String>) -> Self {
        let set: BTreeSet<String> = langs.into_iter().collect();
        SelectionSpec {
            human_langs: set.clone(),
            machine_langs: set,
            per_class_cap: None,
            fraction: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.human_langs.is_empty() && self.machine_langs.is_empty() {
            return Err(Error::InvalidSelection(
                "selection names no languages".into(),
            ));
        }
        if let Some(f) = self.fraction {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::InvalidSelection(format!(
                    "fraction {f} outside (0, 1]"
                )));
            }
        }
        if let Some(cap) = self.per_class_cap {
            if cap == 0 {
                return Err(Error::InvalidSelection("per_class_cap must be > 0".into()));
            }
        }
        Ok(())
    }
}

/// Select the union of human texts in `human_langs` and machine texts in
/// `machine_langs`, subsampling each (language, class, split) cell to
/// ⌈fraction × cell⌉ without replacement. Deterministic for a fixed seed
/// and independent of sample order within the corpus file.
pub fn select(corpus: &Corpus, spec: &SelectionSpec, seed: u64) -> Result<Corpus> {
    spec.validate()?;
    let present: BTreeSet<String> = corpus.stats().langs().into_iter().collect();
    let missing: Vec<&String> = spec
        .human_langs
        .iter()
        .chain(spec.machine_langs.iter())
        .filter(|l| !present.contains(*l))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if !missing.is_empty() {
        let codes: Vec<String> = missing.into_iter().cloned().collect();
        return Err(Error::MissingLanguages(codes.join(", ")));
    }

    let human = corpus.classes.human().name.clone();
    // Cells keyed (lang, label, split) -> original sample indices.
    let mut cells: BTreeMap<(String, String, Split), Vec<usize>> = BTreeMap::new();
    for (i, s) in corpus.samples().iter().enumerate() {
        let wanted = if s.label == human {
            spec.human_langs.contains(&s.lang)
        } else {
            spec.machine_langs.contains(&s.lang)
        };
        if wanted {
            cells
                .entry((s.lang.clone(), s.label.clone(), s.split))
                .or_default()
                .push(i);
        }
    }

    let mut keep: Vec<usize> = Vec::new();
    for ((lang, label, split), indices) in &cells {
        let cell = indices.len();
        let mut take = match spec.fraction {
            Some(f) => (f * cell as f64).ceil() as usize,
            None => cell,
        };
        if let Some(cap) = spec.per_class_cap {
            take = take.min(cap);
        }
        if take >= cell {
            keep.extend(indices.iter().copied());
        } else {
            let cell_seed = seed::derive(
                seed,
                &["select", lang, label, &split.to_string()],
            );
            let mut rng = ChaCha8Rng::seed_from_u64(cell_seed);
            let chosen = index_sample(&mut rng, cell, take);
            keep.extend(chosen.iter().map(|j| indices[j]));
        }
    }
    keep.sort_unstable();
    let samples = keep
        .into_iter()
        .map(|i| corpus.samples()[i].clone())
        .collect();
    Ok(Corpus::from_samples(
        samples,
        corpus.languages.clone(),
        corpus.classes.clone(),
    ))
}

/// Equal-budget union sampling: draw ≈ 1/`parts` of each language's samples
/// so that the union matches one language's budget. Quotas use per-language
/// rounding with largest-remainder allocation across class cells, keeping the
/// union total within a few samples of a single language, unlike the per-cell
/// ceiling rule of [`select`].
pub fn select_equal_budget(
    corpus: &Corpus,
    langs: &BTreeSet<String>,
    parts: usize,
    seed: u64,
) -> Result<Corpus> {
    if parts == 0 {
        return Err(Error::InvalidSelection("parts must be > 0".into()));
    }
    let present: BTreeSet<String> = corpus.stats().langs().into_iter().collect();
    let missing: Vec<String> = langs.difference(&present).cloned().collect();
    if !missing.is_empty() {
        return Err(Error::MissingLanguages(missing.join(", ")));
    }

    let mut cells: BTreeMap<(String, String, Split), Vec<usize>> = BTreeMap::new();
    for (i, s) in corpus.samples().iter().enumerate() {
        if langs.contains(&s.lang) {
            cells
                .entry((s.lang.clone(), s.label.clone(), s.split))
                .or_default()
                .push(i);
        }
    }

    // Per (lang, split): distribute round(total/parts) across the class
    // cells proportionally, largest remainders first (ties by class order).
    let mut group: BTreeMap<(String, Split), Vec<(String, usize)>> = BTreeMap::new();
    for ((lang, label, split), idxs) in &cells {
        group
            .entry((lang.clone(), *split))
            .or_default()
            .push((label.clone(), idxs.len()));
    }

    let mut keep: Vec<usize> = Vec::new();
    for ((lang, split), labels) in &group {
        let total: usize = labels.iter().map(|(_, n)| n).sum();
        let quota = ((total as f64) / (parts as f64)).round() as usize;
        let mut base: Vec<usize> = Vec::with_capacity(labels.len());
        let mut rema: Vec<(usize, f64)> = Vec::with_capacity(labels.len());
        let mut assigned = 0usize;
        for (i, (_, n)) in labels.iter().enumerate() {
            let exact = quota as f64 * (*n as f64) / (total as f64);
            let b = (exact.floor() as usize).min(*n);
            base.push(b);
            assigned += b;
            rema.push((i, exact - b as f64));
        }
        rema.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        let mut leftover = quota.saturating_sub(assigned);
        for (i, _) in rema {
            if leftover == 0 {
                break;
            }
            if base[i] < labels[i].1 {
                base[i] += 1;
                leftover -= 1;
            }
        }
        for ((label, n), take) in labels.iter().zip(base) {
            let indices = &cells[&(lang.clone(), label.clone(), *split)];
            if take >= *n {
                keep.extend(indices.iter().copied());
            } else {
                let cell_seed = seed::derive(
                    seed,
                    &["select-eq", lang, label, &split.to_string()],
                );
                let mut rng = ChaCha8Rng::seed_from_u64(cell_seed);
                let chosen = index_sample(&mut rng, *n, take);
                keep.extend(chosen.iter().map(|j| indices[j]));
            }
        }
    }
    keep.sort_unstable();
    let samples = keep
        .into_iter()
        .map(|i| corpus.samples()[i].clone())
        .collect();
    Ok(Corpus::from_samples(
        samples,
        corpus.languages.clone(),
        corpus.classes.clone(),
    ))
}

/// Train/test language sets for one experiment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentLanguages {
    pub train_langs: BTreeSet<String>,
    pub test_langs: BTreeSet<String>,
}

/// Whether a run is multilingual (train = test languages) or cross-lingual
/// (test strictly covers train).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunKind {
    MlMgt,
    ClMgt,
}

impl fmt::Display for RunKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunKind::MlMgt => write!(f, "ML-MGT"),
            RunKind::ClMgt => write!(f, "CL-MGT"),
        }
    }
}

/// Classify a run as ML-MGT (train = test) or CL-MGT (train ⊂ test).
/// Any other relation is rejected: evaluation always covers the trained
/// languages.
pub fn check_cl(langs: &ExperimentLanguages, registry: &LanguageRegistry) -> Result<RunKind> {
    if langs.train_langs.is_empty() || langs.test_langs.is_empty() {
        return Err(Error::InvalidSelection(
            "train and test language sets must be non-empty".into(),
        ));
    }
    for code in langs.train_langs.iter().chain(langs.test_langs.iter()) {
        if !registry.contains(code) {
            return Err(Error::MissingLanguages(code.clone()));
        }
    }
    if langs.train_langs == langs.test_langs {
        Ok(RunKind::MlMgt)
    } else if langs.train_langs.is_subset(&langs.test_langs) {
        Ok(RunKind::ClMgt)
    } else {
        let stray: Vec<String> = langs
            .train_langs
            .difference(&langs.test_langs)
            .cloned()
            .collect();
        Err(Error::LanguageCoverage(format!(
            "training languages {} absent from the test set",
            stray.join(", ")
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    /// Table 1 per-language (train, test) totals.
    pub(crate) const TABLE1: &[(&str, usize, usize)] = &[
        ("de", 7951, 2388),
        ("en", 7954, 2384),
        ("nl", 7958, 2386),
        ("es", 7947, 2387),
        ("pt", 7956, 2388),
        ("ro", 7949, 2386),
        ("cs", 7962, 2389),
        ("hr", 7951, 2384),
        ("pl", 7946, 2383),
        ("sk", 7946, 2385),
        ("sl", 7947, 2386),
        ("bg", 7954, 2386),
        ("ru", 7945, 2382),
        ("uk", 7939, 2385),
        ("hu", 7964, 2385),
        ("el", 7944, 2384),
        ("ar", 7975, 2392),
        ("zh", 7926, 2383),
    ];

    /// Distribute a per-language total over the 8 classes, remainder to the
    /// first classes, and synthesize one sample per slot.
    pub(crate) fn table1_corpus() -> Corpus {
        let classes = ClassRegistry::default_classes();
        let names = classes.names();
        let mut samples = Vec::new();
        for (lang, train, test) in TABLE1 {
            for (split, total) in [(Split::Train, *train), (Split::Test, *test)] {
                let base = total / names.len();
                let rem = total % names.len();
                for (ci, label) in names.iter().enumerate() {
                    let count = base + usize::from(ci < rem);
                    for i in 0..count {
                        samples.push(TextSample {
                            id: format!("{lang}-{label}-{split}-{i}"),
                            text: "x".to_string(),
                            lang: (*lang).to_string(),
                            label: label.clone(),
                            split,
                        });
                    }
                }
            }
        }
        Corpus::from_samples(samples, LanguageRegistry::builtin(), classes)
    }

    #[test]
    fn registry_has_exactly_the_18_languages() {
        let reg = LanguageRegistry::builtin();
        assert_eq!(reg.entries().len(), 18);
        for (code, family, script) in BUILTIN_LANGUAGES {
            let info = reg.get(code).expect("builtin code resolves");
            assert_eq!(info.family, *family);
            assert_eq!(info.script, *script);
        }
        // Family partition sizes from the per-family report header.
        let sizes: Vec<(String, usize)> = reg
            .families()
            .into_iter()
            .map(|(f, langs)| (f, langs.len()))
            .collect();
        assert_eq!(
            sizes,
            vec![
                ("Germanic".to_string(), 3),
                ("Romance".to_string(), 3),
                ("Slavic-Latin".to_string(), 5),
                ("Slavic-Cyrillic".to_string(), 3),
                ("Uralic".to_string(), 1),
                ("Hellenic".to_string(), 1),
                ("Semitic".to_string(), 1),
                ("Sino-Tibetan".to_string(), 1),
            ]
        );
    }

    #[test]
    fn default_classes_letters_in_display_order() {
        let reg = ClassRegistry::default_classes();
        let letters: String = reg.classes().iter().map(|c| c.letter).collect();
        assert_eq!(letters, "MOEVLAGH");
        assert_eq!(reg.human().name, "human");
        assert_eq!(
            reg.classes()
                .iter()
                .filter(|c| c.kind == ClassKind::Human)
                .count(),
            1
        );
    }

    #[test]
    fn full_corpus_totals_match_table1() {
        let corpus = table1_corpus();
        assert_eq!(corpus.stats().split_total(Split::Train), 143_114);
        assert_eq!(corpus.stats().split_total(Split::Test), 42_943);
    }

    #[test]
    fn load_en_train_rows_only() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        for i in 0..7954 {
            let label = ClassRegistry::default_classes().names()[i % 8].clone();
            writeln!(
                file,
                r#"{{"id":"en-{i}","text":"t","lang":"en","label":"{label}","split":"train"}}"#
            )
            .unwrap();
        }
        let corpus = load_corpus(file.path(), &LoadOptions::default()).unwrap();
        assert_eq!(corpus.stats().lang_split_total("en", Split::Train), 7954);
        assert_eq!(corpus.stats().split_total(Split::Test), 0);
    }

    #[test]
    fn empty_file_is_empty_corpus() {
        let file = tempfile::NamedTempFile::new().unwrap();
        let corpus = load_corpus(file.path(), &LoadOptions::default()).unwrap();
        assert!(corpus.is_empty());
        assert_eq!(corpus.stats().split_total(Split::Train), 0);
    }

    #[test]
    fn malformed_record_names_line() {
        let text = "{\"id\":\"a\",\"text\":\"t\",\"lang\":\"en\",\"label\":\"human\",\"split\":\"train\"}\nnot json\n";
        let err = parse_corpus(text, "mem", &LoadOptions::default()).unwrap_err();
        assert!(err.to_string().contains("mem:2"), "{err}");
    }

    #[test]
    fn duplicate_id_names_both_lines() {
        let rec = r#"{"id":"a","text":"t","lang":"en","label":"human","split":"train"}"#;
        let text = format!("{rec}\n{rec}\n");
        let err = parse_corpus(&text, "mem", &LoadOptions::default()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("lines 1 and 2"), "{msg}");
    }

    #[test]
    fn unknown_language_rejected_unless_allowed() {
        let rec = r#"{"id":"a","text":"t","lang":"qq","label":"human","split":"train"}"#;
        let err = parse_corpus(rec, "mem", &LoadOptions::default()).unwrap_err();
        assert!(err.to_string().contains("qq"), "{err}");

        let opts = LoadOptions {
            allow_unregistered: true,
            ..LoadOptions::default()
        };
        let corpus = parse_corpus(rec, "mem", &opts).unwrap();
        let info = corpus.languages.get("qq").unwrap();
        assert_eq!(info.family, "unknown");
        assert_eq!(info.script, "unknown");
    }

    #[test]
    fn table1_counts_pass_95_percent_rule() {
        let corpus = table1_corpus();
        let report = validate_balance(
            &corpus,
            BalanceTargets {
                train_per_class: 1000,
                test_per_class: 300,
            },
            0.95,
        )
        .unwrap();
        assert!(report.pass, "failures: {:?}", report.failures);
        assert_eq!(report.per_language.len(), 18);
    }

    #[test]
    fn short_cell_fails_and_is_listed() {
        // One language, one class cell at 940/1000 train.
        let classes = ClassRegistry::default_classes();
        let mut samples = Vec::new();
        for label in classes.names() {
            let n_train = if label == "mistral" { 940 } else { 1000 };
            for i in 0..n_train {
                samples.push(TextSample {
                    id: format!("en-{label}-train-{i}"),
                    text: "x".into(),
                    lang: "en".into(),
                    label: label.clone(),
                    split: Split::Train,
                });
            }
            for i in 0..300 {
                samples.push(TextSample {
                    id: format!("en-{label}-test-{i}"),
                    text: "x".into(),
                    lang: "en".into(),
                    label: label.clone(),
                    split: Split::Test,
                });
            }
        }
        let corpus = Corpus::from_samples(samples, LanguageRegistry::builtin(), classes);
        let report = validate_balance(
            &corpus,
            BalanceTargets {
                train_per_class: 1000,
                test_per_class: 300,
            },
            0.95,
        )
        .unwrap();
        assert!(!report.pass);
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.failures[0].label, "mistral");
        assert_eq!(report.failures[0].count, 940);
    }

    #[test]
    fn exact_targets_pass_at_min_fraction_one() {
        let classes = ClassRegistry::default_classes();
        let mut samples = Vec::new();
        for label in classes.names() {
            for (split, n) in [(Split::Train, 10), (Split::Test, 3)] {
                for i in 0..n {
                    samples.push(TextSample {
                        id: format!("en-{label}-{split}-{i}"),
                        text: "x".into(),
                        lang: "en".into(),
                        label: label.clone(),
                        split,
                    });
                }
            }
        }
        let corpus = Corpus::from_samples(samples, LanguageRegistry::builtin(), classes);
        let report = validate_balance(
            &corpus,
            BalanceTargets {
                train_per_class: 10,
                test_per_class: 3,
            },
            1.0,
        )
        .unwrap();
        assert!(report.pass);
    }

    #[test]
    fn balance_invariant_under_reordering() {
        let corpus = table1_corpus();
        let mut reversed: Vec<TextSample> = corpus.samples().to_vec();
        reversed.reverse();
        let corpus_rev = Corpus::from_samples(
            reversed,
            corpus.languages.clone(),
            corpus.classes.clone(),
        );
        let targets = BalanceTargets {
            train_per_class: 1000,
            test_per_class: 300,
        };
        let a = validate_balance(&corpus, targets, 0.95).unwrap();
        let b = validate_balance(&corpus_rev, targets, 0.95).unwrap();
        assert_eq!(a.pass, b.pass);
        assert_eq!(a.per_language, b.per_language);
    }

    #[test]
    fn select_single_language_is_exact() {
        let corpus = table1_corpus();
        let spec = SelectionSpec::all_of(["en".to_string()]);
        let sub = select(&corpus, &spec, 1).unwrap();
        assert_eq!(sub.stats().lang_split_total("en", Split::Train), 7954);
        assert_eq!(sub.stats().lang_split_total("en", Split::Test), 2384);
        assert_eq!(sub.stats().langs(), vec!["en".to_string()]);
    }

    #[test]
    fn select_identity_when_fraction_one() {
        let corpus = table1_corpus();
        let all: Vec<String> = corpus.stats().langs();
        let mut spec = SelectionSpec::all_of(all);
        spec.fraction = Some(1.0);
        let sub = select(&corpus, &spec, 9).unwrap();
        assert_eq!(sub.len(), corpus.len());
        assert_eq!(sub.samples(), corpus.samples());
    }

    #[test]
    fn select_third_matches_ceiling_oracle() {
        let corpus = table1_corpus();
        let mut spec = SelectionSpec::all_of(["en".into(), "es".into(), "ru".into()]);
        spec.fraction = Some(1.0 / 3.0);
        let sub = select(&corpus, &spec, 5).unwrap();
        // Oracle: recompute every expected cell size by ceiling arithmetic.
        let mut expected_train = 0usize;
        for lang in ["en", "es", "ru"] {
            for label in corpus.classes.names() {
                for split in [Split::Train, Split::Test] {
                    let cell = corpus.stats().count(lang, &label, split);
                    let want = ((cell as f64) / 3.0).ceil() as usize;
                    assert_eq!(
                        sub.stats().count(lang, &label, split),
                        want,
                        "cell {lang}/{label}/{split}"
                    );
                    if split == Split::Train {
                        expected_train += want;
                    }
                }
            }
        }
        let total_train = sub.stats().split_total(Split::Train);
        assert_eq!(total_train, expected_train);
        // Within ±24 of one full language's train size.
        assert!(
            (total_train as i64 - 7954).unsigned_abs() <= 24,
            "total {total_train}"
        );
    }

    #[test]
    fn select_deterministic_and_seed_sensitive() {
        let corpus = table1_corpus();
        let mut spec = SelectionSpec::all_of(["en".into()]);
        spec.fraction = Some(0.25);
        let a = select(&corpus, &spec, 11).unwrap();
        let b = select(&corpus, &spec, 11).unwrap();
        let c = select(&corpus, &spec, 12).unwrap();
        assert_eq!(a.samples(), b.samples());
        assert_ne!(a.samples(), c.samples());
    }

    #[test]
    fn select_missing_language_lists_codes() {
        let corpus = table1_corpus();
        let mut only_en = Corpus::from_samples(
            corpus
                .samples()
                .iter()
                .filter(|s| s.lang == "en")
                .cloned()
                .collect(),
            corpus.languages.clone(),
            corpus.classes.clone(),
        );
        only_en.stats = CorpusStats::tally(&only_en.samples);
        let spec = SelectionSpec::all_of(["en".into(), "ru".into(), "zh".into()]);
        let err = select(&only_en, &spec, 0).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("ru") && msg.contains("zh"), "{msg}");
    }

    #[test]
    fn equal_budget_lands_near_one_language() {
        let corpus = table1_corpus();
        let langs: BTreeSet<String> = ["en", "es", "ru"].iter().map(|s| s.to_string()).collect();
        let sub = select_equal_budget(&corpus, &langs, 3, 3).unwrap();
        let total_train = sub.stats().split_total(Split::Train);
        for single in [7954i64, 7947, 7945] {
            let gap = (total_train as i64 - single).abs();
            assert!(gap <= 12, "total {total_train} vs {single}");
        }
    }

    #[test]
    fn check_cl_classifies_runs() {
        let reg = LanguageRegistry::builtin();
        let all: BTreeSet<String> = reg.entries().iter().map(|e| e.code.clone()).collect();
        let ru: BTreeSet<String> = ["ru".to_string()].into_iter().collect();

        let cl = ExperimentLanguages {
            train_langs: ru.clone(),
            test_langs: all.clone(),
        };
        assert_eq!(check_cl(&cl, &reg).unwrap(), RunKind::ClMgt);

        let ml = ExperimentLanguages {
            train_langs: all.clone(),
            test_langs: all,
        };
        assert_eq!(check_cl(&ml, &reg).unwrap(), RunKind::MlMgt);

        let bad = ExperimentLanguages {
            train_langs: ["en".to_string(), "fr".to_string()].into_iter().collect(),
            test_langs: ["en".to_string()].into_iter().collect(),
        };
        assert!(check_cl(&bad, &reg).is_err());

        let not_covering = ExperimentLanguages {
            train_langs: ["en".to_string(), "de".to_string()].into_iter().collect(),
            test_langs: ["en".to_string(), "ru".to_string()].into_iter().collect(),
        };
        let err = check_cl(&not_covering, &reg).unwrap_err();
        assert!(err.to_string().contains("must cover"), "{err}");
    }
}
