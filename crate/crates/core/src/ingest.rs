//! TSV corpus ingestion for the LIAR and MultiFC release formats.
//!
//! Parsing is line-oriented and never panics on malformed input: every
//! rejected line is recorded in the [`IngestReport`] with its line number so
//! evaluation sample sizes stay auditable.

use std::collections::BTreeMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which corpus format a claim came from. Determines the label mapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dataset {
    Liar,
    MultiFc,
}

/// Per-speaker rating history counts carried by LIAR records.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpeakerHistory {
    pub barely_true: u32,
    pub false_ct: u32,
    pub half_true: u32,
    pub mostly_true: u32,
    pub pants_fire: u32,
}

impl SpeakerHistory {
    pub fn total(&self) -> u32 {
        self.barely_true + self.false_ct + self.half_true + self.mostly_true + self.pants_fire
    }

    /// Counts of false-leaning past ratings (false, barely-true, pants-fire).
    pub fn false_leaning(&self) -> u32 {
        self.false_ct + self.barely_true + self.pants_fire
    }

    /// Counts of true-leaning past ratings (half-true, mostly-true).
    pub fn true_leaning(&self) -> u32 {
        self.half_true + self.mostly_true
    }
}

/// Coarse three-way veracity taxonomy used for MultiFC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ternary {
    False,
    True,
    Mixture,
}

/// Labels after applying the dataset-specific mapping.
///
/// LIAR records get `binary`, `ordinal` and `ambiguity`; MultiFC records get
/// `ternary` and `ambiguity`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MappedLabel {
    pub binary: Option<u8>,
    pub ternary: Option<Ternary>,
    pub ordinal: Option<u8>,
    pub ambiguity: f64,
}

impl MappedLabel {
    /// Binary view usable for classification: LIAR binary directly, MultiFC
    /// true/false collapsed, mixture excluded.
    pub fn as_binary(&self) -> Option<u8> {
        match (self.binary, self.ternary) {
            (Some(b), _) => Some(b),
            (None, Some(Ternary::True)) => Some(1),
            (None, Some(Ternary::False)) => Some(0),
            _ => None,
        }
    }
}

/// One corpus record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub id: String,
    pub text: String,
    pub speaker: Option<String>,
    /// Source URL domain (MultiFC only).
    pub domain: Option<String>,
    /// Subject field (LIAR only); used as the schema topic.
    pub subject: Option<String>,
    pub raw_label: String,
    pub dataset: Dataset,
    pub history: Option<SpeakerHistory>,
    pub context: Option<String>,
    pub mapped: MappedLabel,
}

/// A rejected input line with the reason it could not be ingested.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectedLine {
    pub line_no: usize,
    pub reason: String,
}

/// Ingest accounting: `parsed + rejects.len() == total_lines` always holds.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct IngestReport {
    pub total_lines: usize,
    pub parsed: usize,
    pub rejects: Vec<RejectedLine>,
    pub warnings: Vec<String>,
}

impl IngestReport {
    pub fn reject(&mut self, line_no: usize, reason: impl Into<String>) {
        self.rejects.push(RejectedLine {
            line_no,
            reason: reason.into(),
        });
    }

    /// Associative merge for parallel per-file ingestion.
    pub fn merge(mut self, other: IngestReport) -> IngestReport {
        self.total_lines += other.total_lines;
        self.parsed += other.parsed;
        self.rejects.extend(other.rejects);
        self.warnings.extend(other.warnings);
        self
    }

    pub fn consistent(&self) -> bool {
        self.parsed + self.rejects.len() == self.total_lines
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("i/o error reading corpus: {0}")]
    Io(#[from] std::io::Error),
    #[error("no label map entry for domain '{0}' and the map has no default section")]
    MissingLabelMap(String),
    #[error("sample size {requested} exceeds population size {available}")]
    SampleTooLarge { requested: usize, available: usize },
    #[error("label map parse error: {0}")]
    BadLabelMap(String),
}

/// The six LIAR label strings mapped to (binary, ordinal).
///
/// pants-fire=0, false=1, barely-true=2, half-true=3, mostly-true=4, true=5;
/// the lower three map to binary 0, the upper three to binary 1.
pub fn map_liar_label(raw: &str) -> Option<(u8, u8)> {
    match raw.trim().to_lowercase().as_str() {
        "pants-fire" => Some((0, 0)),
        "false" => Some((0, 1)),
        "barely-true" => Some((0, 2)),
        "half-true" => Some((1, 3)),
        "mostly-true" => Some((1, 4)),
        "true" => Some((1, 5)),
        _ => None,
    }
}

/// Ambiguity proxy for a six-point ordinal label: peaks at the scale midpoint.
pub fn liar_ambiguity(ordinal: u8) -> f64 {
    1.0 - (f64::from(ordinal) - 2.5).abs() / 2.5
}

fn opt_field(s: &str) -> Option<String> {
    let t = s.trim();
    if t.is_empty() {
        None
    } else {
        Some(t.to_string())
    }
}

/// Parse a LIAR-format TSV stream.
///
/// Expects the original 14-column order (id, label, statement, subject,
/// speaker, job, state, party, five history counts, context). Extra trailing
/// columns are tolerated; missing ones reject the line.
pub fn parse_liar<R: BufRead>(reader: R) -> Result<(Vec<Claim>, IngestReport), IngestError> {
    let mut claims = Vec::new();
    let mut report = IngestReport::default();

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        report.total_lines += 1;

        let fields: Vec<&str> = line.split('\t').collect();
        if line.trim().is_empty() {
            report.reject(line_no, "empty line");
            continue;
        }
        if fields.len() < 14 {
            report.reject(
                line_no,
                format!("expected >= 14 tab-separated fields, got {}", fields.len()),
            );
            continue;
        }

        let raw_label = fields[1].trim().to_string();
        let Some((binary, ordinal)) = map_liar_label(&raw_label) else {
            report.reject(line_no, format!("unknown label '{raw_label}'"));
            continue;
        };

        let text = fields[2].trim();
        if text.is_empty() {
            report.reject(line_no, "empty statement text");
            continue;
        }

        let mut counts = [0u32; 5];
        let mut bad_count = None;
        for (i, f) in fields[8..13].iter().enumerate() {
            match f.trim().parse::<u32>() {
                Ok(v) => counts[i] = v,
                Err(_) => {
                    bad_count = Some(format!("history column {} is not a count: '{}'", i + 1, f));
                    break;
                }
            }
        }
        if let Some(reason) = bad_count {
            report.reject(line_no, reason);
            continue;
        }

        claims.push(Claim {
            id: fields[0].trim().to_string(),
            text: text.to_string(),
            speaker: opt_field(fields[4]),
            domain: None,
            subject: opt_field(fields[3]),
            raw_label,
            dataset: Dataset::Liar,
            history: Some(SpeakerHistory {
                barely_true: counts[0],
                false_ct: counts[1],
                half_true: counts[2],
                mostly_true: counts[3],
                pants_fire: counts[4],
            }),
            context: opt_field(fields[13]),
            mapped: MappedLabel {
                binary: Some(binary),
                ternary: None,
                ordinal: Some(ordinal),
                ambiguity: liar_ambiguity(ordinal),
            },
        });
        report.parsed += 1;
    }

    if report.total_lines == 0 {
        report.warnings.push("input file is empty".to_string());
    }
    Ok((claims, report))
}

/// Per-domain raw-label normalization for MultiFC.
///
/// Lookup order: domain-specific entry, then the default section. A domain
/// with no specific entries is only an error when no default section exists.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabelMap {
    #[serde(default)]
    pub domains: BTreeMap<String, BTreeMap<String, Ternary>>,
    #[serde(default)]
    pub default: BTreeMap<String, Ternary>,
}

impl LabelMap {
    /// The shipped default map. Covers the common raw labels observed across
    /// MultiFC fact-checking domains; editable via a user-supplied JSON file.
    pub fn shipped_default() -> LabelMap {
        serde_json::from_str(include_str!("../data/multifc_label_map.json"))
            .expect("bundled label map is valid")
    }

    pub fn from_json(json: &str) -> Result<LabelMap, IngestError> {
        serde_json::from_str(json).map_err(|e| IngestError::BadLabelMap(e.to_string()))
    }

    pub fn lookup(&self, domain: &str, raw: &str) -> Result<Option<Ternary>, IngestError> {
        let key = raw.trim().to_lowercase();
        if let Some(map) = self.domains.get(domain) {
            if let Some(t) = map.get(&key) {
                return Ok(Some(*t));
            }
        }
        if self.domains.contains_key(domain) || !self.default.is_empty() {
            return Ok(self.default.get(&key).copied());
        }
        Err(IngestError::MissingLabelMap(domain.to_string()))
    }
}

/// Extract the host part of a claim URL, stripping any `www.` prefix.
pub fn url_domain(url: &str) -> Option<String> {
    let trimmed = url.trim();
    if trimmed.is_empty() {
        return None;
    }
    let rest = trimmed
        .strip_prefix("https://")
        .or_else(|| trimmed.strip_prefix("http://"))
        .unwrap_or(trimmed);
    let host = rest.split(['/', '?', '#']).next()?.trim();
    let host = host.strip_prefix("www.").unwrap_or(host);
    if host.is_empty() {
        None
    } else {
        Some(host.to_lowercase())
    }
}

/// Parse a MultiFC-format TSV stream (id, claim, label, claim URL, extras...).
///
/// Claims whose raw label has no map entry are excluded and counted in the
/// report rather than silently dropped.
pub fn parse_multifc<R: BufRead>(
    reader: R,
    label_map: &LabelMap,
) -> Result<(Vec<Claim>, IngestReport), IngestError> {
    let mut claims = Vec::new();
    let mut report = IngestReport::default();

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        report.total_lines += 1;

        if line.trim().is_empty() {
            report.reject(line_no, "empty line");
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 4 {
            report.reject(
                line_no,
                format!("expected >= 4 tab-separated fields, got {}", fields.len()),
            );
            continue;
        }

        let text = fields[1].trim();
        if text.is_empty() {
            report.reject(line_no, "empty claim text");
            continue;
        }
        let raw_label = fields[2].trim().to_string();
        let domain = url_domain(fields[3]);
        let domain_key = domain.clone().unwrap_or_default();

        let ternary = match label_map.lookup(&domain_key, &raw_label)? {
            Some(t) => t,
            None => {
                report.reject(line_no, format!("unmapped label '{raw_label}'"));
                continue;
            }
        };

        let speaker = fields.get(6).and_then(|s| opt_field(s));

        claims.push(Claim {
            id: fields[0].trim().to_string(),
            text: text.to_string(),
            speaker,
            domain: domain.clone(),
            subject: None,
            raw_label,
            dataset: Dataset::MultiFc,
            history: None,
            context: None,
            mapped: MappedLabel {
                binary: None,
                ternary: Some(ternary),
                ordinal: None,
                ambiguity: if ternary == Ternary::Mixture { 1.0 } else { 0.0 },
            },
        });
        report.parsed += 1;
    }

    if report.total_lines == 0 {
        report.warnings.push("input file is empty".to_string());
    }
    Ok((claims, report))
}

/// Deterministic stratified subsample, preserving class balance within one
/// item per class. Strata are binary labels for LIAR, ternary for MultiFC.
pub fn sample_claims(claims: &[Claim], n: usize, seed: u64) -> Result<Vec<Claim>, IngestError> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    if n > claims.len() {
        return Err(IngestError::SampleTooLarge {
            requested: n,
            available: claims.len(),
        });
    }

    let stratum_of = |c: &Claim| -> String {
        match (c.mapped.binary, c.mapped.ternary) {
            (Some(b), _) => format!("b{b}"),
            (None, Some(t)) => format!("t{t:?}"),
            _ => "none".to_string(),
        }
    };

    let mut strata: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, c) in claims.iter().enumerate() {
        strata.entry(stratum_of(c)).or_default().push(i);
    }

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let total = claims.len() as f64;

    // Largest-remainder allocation of n across strata.
    let mut alloc: Vec<(String, usize, f64)> = strata
        .iter()
        .map(|(k, v)| {
            let exact = n as f64 * v.len() as f64 / total;
            (k.clone(), exact.floor() as usize, exact.fract())
        })
        .collect();
    let mut assigned: usize = alloc.iter().map(|(_, fl, _)| fl).sum();
    alloc.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap().then(a.0.cmp(&b.0)));
    let mut i = 0;
    while assigned < n {
        let slot = i % alloc.len();
        let stratum_len = strata[&alloc[slot].0].len();
        if alloc[slot].1 < stratum_len {
            alloc[slot].1 += 1;
            assigned += 1;
        }
        i += 1;
    }

    let mut picked = Vec::with_capacity(n);
    alloc.sort_by(|a, b| a.0.cmp(&b.0));
    for (key, count, _) in alloc {
        let mut idxs = strata[&key].clone();
        idxs.shuffle(&mut rng);
        picked.extend(idxs.into_iter().take(count));
    }
    picked.shuffle(&mut rng);

    Ok(picked.into_iter().map(|i| claims[i].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn liar_line(id: &str, label: &str, text: &str, counts: [u32; 5]) -> String {
        format!(
            "{id}\t{label}\t{text}\tsubject\tspeaker\tjob\tstate\tparty\t{}\t{}\t{}\t{}\t{}\tcontext",
            counts[0], counts[1], counts[2], counts[3], counts[4]
        )
    }

    #[test]
    fn liar_label_mapping_is_total_over_six_labels() {
        let cases = [
            ("pants-fire", (0, 0)),
            ("false", (0, 1)),
            ("barely-true", (0, 2)),
            ("half-true", (1, 3)),
            ("mostly-true", (1, 4)),
            ("true", (1, 5)),
        ];
        for (raw, expect) in cases {
            assert_eq!(map_liar_label(raw), Some(expect), "{raw}");
        }
        assert_eq!(map_liar_label("mostly true"), None);
        assert_eq!(map_liar_label(""), None);
    }

    #[test]
    fn liar_pants_fire_maps_to_binary_zero() {
        let input = liar_line("1", "pants-fire", "Some claim", [0, 0, 0, 0, 0]);
        let (claims, report) = parse_liar(Cursor::new(input)).unwrap();
        assert_eq!(claims.len(), 1);
        assert!(report.consistent());
        assert_eq!(claims[0].mapped.binary, Some(0));
    }

    #[test]
    fn liar_half_true_maps_to_binary_one_ordinal_three() {
        let input = liar_line("1", "half-true", "Some claim", [1, 2, 3, 4, 5]);
        let (claims, _) = parse_liar(Cursor::new(input)).unwrap();
        assert_eq!(claims[0].mapped.binary, Some(1));
        assert_eq!(claims[0].mapped.ordinal, Some(3));
    }

    #[test]
    fn ambiguity_formula_matches_direct_evaluation() {
        // true (ordinal 5): 1 - |5 - 2.5| / 2.5 = 0.0
        assert_eq!(liar_ambiguity(5), 0.0);
        // half-true (ordinal 3): 1 - |3 - 2.5| / 2.5 = 0.8
        assert!((liar_ambiguity(3) - 0.8).abs() < 1e-12);
        assert!((liar_ambiguity(2) - 0.8).abs() < 1e-12);
        assert_eq!(liar_ambiguity(0), 0.0);
    }

    #[test]
    fn malformed_lines_are_reported_with_line_numbers() {
        let good = liar_line("1", "true", "A fine claim", [0; 5]);
        let input = format!("{good}\nshort\tline\n{}", liar_line("2", "bogus", "x", [0; 5]));
        let (claims, report) = parse_liar(Cursor::new(input)).unwrap();
        assert_eq!(claims.len(), 1);
        assert_eq!(report.total_lines, 3);
        assert_eq!(report.rejects.len(), 2);
        assert_eq!(report.rejects[0].line_no, 2);
        assert_eq!(report.rejects[1].line_no, 3);
        assert!(report.consistent());
    }

    #[test]
    fn empty_file_yields_empty_list_plus_warning() {
        let (claims, report) = parse_liar(Cursor::new("")).unwrap();
        assert!(claims.is_empty());
        assert!(!report.warnings.is_empty());
        assert!(report.consistent());
    }

    #[test]
    fn extra_trailing_columns_are_tolerated() {
        let mut line = liar_line("1", "true", "Claim text", [0; 5]);
        line.push_str("\textra\tmore");
        let (claims, report) = parse_liar(Cursor::new(line)).unwrap();
        assert_eq!(claims.len(), 1);
        assert!(report.rejects.is_empty());
    }

    #[test]
    fn multifc_default_map_handles_common_labels() {
        let map = LabelMap::shipped_default();
        let input = "id1\tA claim.\tfalse\thttps://www.example.com/a\n\
                     id2\tAnother claim.\tmixture\thttp://example.org/b\n\
                     id3\tThird claim.\tpants on fire!\thttps://politifact.com/x";
        let (claims, report) = parse_multifc(Cursor::new(input), &map).unwrap();
        assert_eq!(claims.len(), 3);
        assert!(report.consistent());
        assert_eq!(claims[0].mapped.ternary, Some(Ternary::False));
        assert_eq!(claims[1].mapped.ternary, Some(Ternary::Mixture));
        assert!((claims[1].mapped.ambiguity - 1.0).abs() < 1e-12);
        assert_eq!(claims[2].mapped.ternary, Some(Ternary::False));
        assert_eq!(claims[0].domain.as_deref(), Some("example.com"));
    }

    #[test]
    fn multifc_unmapped_labels_are_excluded_and_counted() {
        let map = LabelMap::shipped_default();
        let input = "id1\tA claim.\tzebra-rating\thttps://example.com/a";
        let (claims, report) = parse_multifc(Cursor::new(input), &map).unwrap();
        assert!(claims.is_empty());
        assert_eq!(report.rejects.len(), 1);
        assert!(report.rejects[0].reason.contains("zebra-rating"));
    }

    #[test]
    fn multifc_missing_domain_errors_without_default() {
        let map = LabelMap {
            domains: BTreeMap::new(),
            default: BTreeMap::new(),
        };
        let input = "id1\tA claim.\tfalse\thttps://example.com/a";
        let err = parse_multifc(Cursor::new(input), &map).unwrap_err();
        assert!(matches!(err, IngestError::MissingLabelMap(_)));
    }

    #[test]
    fn sample_full_corpus_is_a_permutation() {
        let lines: Vec<String> = (0..10)
            .map(|i| {
                let label = if i % 2 == 0 { "true" } else { "false" };
                liar_line(&format!("c{i}"), label, "Claim text here", [0; 5])
            })
            .collect();
        let (claims, _) = parse_liar(Cursor::new(lines.join("\n"))).unwrap();
        let sample = sample_claims(&claims, claims.len(), 3).unwrap();
        let mut ids: Vec<&str> = sample.iter().map(|c| c.id.as_str()).collect();
        ids.sort();
        let mut expect: Vec<&str> = claims.iter().map(|c| c.id.as_str()).collect();
        expect.sort();
        assert_eq!(ids, expect);
    }

    #[test]
    fn sample_is_deterministic_and_stratified() {
        let lines: Vec<String> = (0..100)
            .map(|i| {
                let label = if i < 50 { "true" } else { "false" };
                liar_line(&format!("c{i}"), label, "Claim text here", [0; 5])
            })
            .collect();
        let (claims, _) = parse_liar(Cursor::new(lines.join("\n"))).unwrap();
        let a = sample_claims(&claims, 10, 42).unwrap();
        let b = sample_claims(&claims, 10, 42).unwrap();
        assert_eq!(a, b);
        let ones = a.iter().filter(|c| c.mapped.binary == Some(1)).count();
        assert!((4..=6).contains(&ones), "per-class count {ones} outside 5 +/- 1");
    }

    #[test]
    fn sample_larger_than_population_errors_with_both_sizes() {
        let (claims, _) = parse_liar(Cursor::new(liar_line("1", "true", "x y", [0; 5]))).unwrap();
        let err = sample_claims(&claims, 5, 0).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains('5') && msg.contains('1'), "{msg}");
    }

    #[test]
    fn corpus_roundtrip_through_jsonl() {
        let input = liar_line("1", "half-true", "A roundtrip claim", [1, 2, 3, 4, 5]);
        let (claims, _) = parse_liar(Cursor::new(input)).unwrap();
        let json = serde_json::to_string(&claims[0]).unwrap();
        let back: Claim = serde_json::from_str(&json).unwrap();
        assert_eq!(claims[0], back);
    }

    #[test]
    fn url_domain_extraction() {
        assert_eq!(url_domain("https://www.snopes.com/a/b"), Some("snopes.com".into()));
        assert_eq!(url_domain("http://politifact.com"), Some("politifact.com".into()));
        assert_eq!(url_domain(""), None);
    }
}
