//! Synthetic corpus generators.
//!
//! All generators emit LIAR-format TSV and re-parse it through the normal
//! ingest path, so synthetic corpora are guaranteed to behave exactly like
//! ingested ones. Two presets cover evaluation needs ([`LiarPreset`]) and
//! [`synth_disinfo_suite`] builds the three-stratum depth-controlled suite.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::ingest::{parse_liar, Claim};

/// LIAR-like generator flavours.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiarPreset {
    /// Speakers carry lifetime rating histories that are informative but
    /// noisy; claim veracity is driven mostly by claim-level truth, so
    /// valence carries strong signal and the prior carries weaker signal.
    Informative,
    /// Mostly one-claim speakers whose history columns aggregate their own
    /// in-corpus ratings, reproducing the speaker-history leakage artefact.
    Leakage,
}

const SUBJECTS: [&str; 10] = [
    "economy", "health-care", "elections", "immigration", "education",
    "energy", "taxes", "crime", "environment", "foreign-policy",
];

const TOPIC_NOUNS: [&str; 12] = [
    "unemployment", "the budget deficit", "school funding", "wind power output",
    "the vaccination rate", "median household income", "the trade balance",
    "highway spending", "voter turnout", "the graduation rate",
    "prescription drug prices", "the murder rate",
];

const VERBS: [&str; 6] = [
    "rose", "fell", "doubled", "dropped sharply", "stayed flat", "hit a record",
];

const TAILS: [&str; 6] = [
    "last year",
    "over the past decade",
    "since the new administration took office",
    "in the latest quarter",
    "across the state",
    "according to the agency's own figures",
];

const SPICE: [&str; 8] = [
    "shocking", "scandal", "outrage", "fraud", "crisis", "dangerous", "corrupt", "alarming",
];

const FIRST_NAMES: [&str; 8] = [
    "jordan", "casey", "morgan", "avery", "riley", "quinn", "hayden", "rowan",
];
const LAST_NAMES: [&str; 10] = [
    "walsh", "delgado", "okafor", "lindqvist", "marsh", "ferreira", "novak", "boone",
    "ashford", "ito",
];

const JOBS: [&str; 5] = ["senator", "governor", "mayor", "analyst", "spokesperson"];
const STATES: [&str; 6] = ["texas", "ohio", "vermont", "oregon", "georgia", "florida"];
const PARTIES: [&str; 3] = ["republican", "democrat", "independent"];
const CONTEXTS: [&str; 5] = ["a speech", "a press release", "an interview", "a debate", "a post"];

fn ordinal_label(ordinal: usize) -> &'static str {
    ["pants-fire", "false", "barely-true", "half-true", "mostly-true", "true"][ordinal]
}

/// Note: "according to the agency's own figures" contains the marker
/// "according to", so assertions built with that tail carry one attribution
/// level by construction. The generators account for it when targeting a
/// depth, so plain assertions never use it.
fn assertion<R: Rng>(rng: &mut R, spice_terms: usize) -> String {
    let noun = TOPIC_NOUNS[rng.gen_range(0..TOPIC_NOUNS.len())];
    let verb = VERBS[rng.gen_range(0..VERBS.len())];
    let tail = TAILS[rng.gen_range(0..TAILS.len() - 1)]; // skip the marker-bearing tail
    let mut text = format!("{noun} {verb} {tail}");
    let mut picks: Vec<&str> = SPICE.to_vec();
    picks.shuffle(rng);
    for term in picks.into_iter().take(spice_terms) {
        text = format!("the {term} over {text}");
    }
    if rng.gen_bool(0.5) {
        text.push_str(" despite earlier projections");
    }
    text
}

fn speaker_name<R: Rng>(rng: &mut R, idx: usize) -> String {
    format!(
        "{}-{}-{}",
        FIRST_NAMES[rng.gen_range(0..FIRST_NAMES.len())],
        LAST_NAMES[rng.gen_range(0..LAST_NAMES.len())],
        idx
    )
}

/// Wrap an assertion with the requested number of attribution layers.
fn with_depth<R: Rng>(rng: &mut R, body: &str, depth: usize, speaker: &str) -> String {
    match depth {
        0 => {
            let mut s = body.to_string();
            if let Some(first) = s.get_mut(0..1) {
                first.make_ascii_uppercase();
            }
            s
        }
        1 => format!("{speaker} claims {body}"),
        _ => {
            let group = ["officials", "economists", "insiders"][rng.gen_range(0..3)];
            format!("everyone knows {group} believe {body}")
        }
    }
}

struct LiarRecord {
    id: String,
    label: &'static str,
    statement: String,
    subject: &'static str,
    speaker: String,
    job: &'static str,
    state: &'static str,
    party: &'static str,
    counts: [u32; 5],
    context: &'static str,
}

impl LiarRecord {
    fn to_tsv(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.id,
            self.label,
            self.statement,
            self.subject,
            self.speaker,
            self.job,
            self.state,
            self.party,
            self.counts[0],
            self.counts[1],
            self.counts[2],
            self.counts[3],
            self.counts[4],
            self.context
        )
    }
}

fn binom<R: Rng>(rng: &mut R, n: u64, p: f64) -> u64 {
    if n == 0 {
        return 0;
    }
    Binomial::new(n, p.clamp(0.0, 1.0)).unwrap().sample(rng)
}

/// Split a false-leaning total into (barely_true, false, pants_fire).
fn split_falseish<R: Rng>(rng: &mut R, total: u64) -> (u32, u32, u32) {
    let barely = binom(rng, total, 0.35);
    let pants = binom(rng, total - barely, 0.3);
    (barely as u32, (total - barely - pants) as u32, pants as u32)
}

fn record<R: Rng>(
    rng: &mut R,
    id: String,
    ordinal: usize,
    statement: String,
    speaker: String,
    counts: [u32; 5],
) -> LiarRecord {
    LiarRecord {
        id,
        label: ordinal_label(ordinal),
        statement,
        subject: SUBJECTS[rng.gen_range(0..SUBJECTS.len())],
        speaker,
        job: JOBS[rng.gen_range(0..JOBS.len())],
        state: STATES[rng.gen_range(0..STATES.len())],
        party: PARTIES[rng.gen_range(0..PARTIES.len())],
        counts,
        context: CONTEXTS[rng.gen_range(0..CONTEXTS.len())],
    }
}

fn informative_tsv(seed: u64, n: usize) -> String {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1a2b);

    struct Speaker {
        name: String,
        accuracy: f64,
        counts: [u32; 5],
    }

    let n_speakers = (n / 3).max(1);
    let speakers: Vec<Speaker> = (0..n_speakers)
        .map(|i| {
            let accuracy = rng.gen_range(0.15..0.85);
            let total = rng.gen_range(25u64..61);
            let trueish = binom(&mut rng, total, accuracy);
            let half = binom(&mut rng, trueish, 0.5) as u32;
            let mostly = (trueish as u32) - half;
            let (barely, false_ct, pants) = split_falseish(&mut rng, total - trueish);
            Speaker {
                name: speaker_name(&mut rng, i),
                accuracy,
                counts: [barely, false_ct, half, mostly, pants],
            }
        })
        .collect();

    let edges = [0.3, 0.42, 0.5, 0.58, 0.7];
    let mut lines = Vec::with_capacity(n);
    for i in 0..n {
        let sp = &speakers[rng.gen_range(0..speakers.len())];
        let t = 0.4 * sp.accuracy + 0.6 * rng.gen_range(0.0..1.0);
        let ordinal = edges.iter().filter(|e| t > **e).count();
        let binary_true = ordinal >= 3;
        let ambiguity = 1.0 - ((ordinal as f64) - 2.5).abs() / 2.5;

        // Contested claims from accurate speakers get emotionally loaded
        // wording; false claims are spicier overall.
        let conflict = ((sp.accuracy - 0.5) / 0.35).clamp(0.0, 1.0);
        let p_spice = 0.04
            + 0.45 * f64::from(u8::from(!binary_true))
            + 0.6 * ambiguity * conflict;
        let u: f64 = rng.gen_range(0.0..1.0);
        let spice_terms = if u < 0.55 * p_spice {
            2
        } else if u < p_spice {
            1
        } else {
            0
        };

        let ud: f64 = rng.gen_range(0.0..1.0);
        let depth = if ud < 0.01 {
            2
        } else if ud < 0.075 {
            1
        } else {
            0
        };

        let body = assertion(&mut rng, spice_terms);
        let statement = with_depth(&mut rng, &body, depth, &sp.name);
        lines.push(
            record(
                &mut rng,
                format!("inf-{i:05}"),
                ordinal,
                statement,
                sp.name.clone(),
                sp.counts,
            )
            .to_tsv(),
        );
    }
    lines.join("\n")
}

fn leakage_tsv(seed: u64, n: usize) -> String {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x3c4d);

    // Mostly one-claim speakers with near-pure accuracy; history counts
    // aggregate the speaker's in-corpus ratings, current claim included.
    let mut lines = Vec::with_capacity(n);
    let mut i = 0usize;
    let mut speaker_idx = 0usize;
    while i < n {
        let accuracy = if rng.gen_bool(0.5) { 0.97 } else { 0.03 };
        let claims_here = (1 + binom(&mut rng, 2, 0.3) as usize).min(n - i);
        let name = speaker_name(&mut rng, speaker_idx);
        speaker_idx += 1;

        let ordinals: Vec<usize> = (0..claims_here)
            .map(|_| {
                if rng.gen_bool(accuracy) {
                    rng.gen_range(3..6)
                } else {
                    rng.gen_range(0..3)
                }
            })
            .collect();
        // Five history columns: counts of this speaker's ratings other than
        // plain "true", exactly as the release format aggregates them.
        let mut counts = [0u32; 5];
        for &o in &ordinals {
            match o {
                0 => counts[4] += 1,
                1 => counts[1] += 1,
                2 => counts[0] += 1,
                3 => counts[2] += 1,
                4 => counts[3] += 1,
                _ => {}
            }
        }

        for &ordinal in &ordinals {
            let binary_true = ordinal >= 3;
            let p_spice = if binary_true { 0.10 } else { 0.45 };
            let u: f64 = rng.gen_range(0.0..1.0);
            let spice_terms = if u < 0.3 * p_spice {
                2
            } else if u < p_spice {
                1
            } else {
                0
            };
            let depth = usize::from(rng.gen_bool(0.06));
            let body = assertion(&mut rng, spice_terms);
            let statement = with_depth(&mut rng, &body, depth, &name);
            lines.push(
                record(
                    &mut rng,
                    format!("leak-{i:05}"),
                    ordinal,
                    statement,
                    name.clone(),
                    counts,
                )
                .to_tsv(),
            );
            i += 1;
        }
    }
    lines.join("\n")
}

/// Stratum membership within the synthetic disorder suite, recoverable from
/// the claim id prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisorderStratum {
    /// Plausible-framing false assertions, depth 0.
    Mis,
    /// Falsely attributed claims from unknown-history sources, depth 1.
    Dis,
    /// Meta-epistemic "everyone knows" framing, depth 2.
    Mal,
}

impl DisorderStratum {
    pub fn of(claim: &Claim) -> Option<DisorderStratum> {
        if claim.id.starts_with("mis-") {
            Some(DisorderStratum::Mis)
        } else if claim.id.starts_with("dis-") {
            Some(DisorderStratum::Dis)
        } else if claim.id.starts_with("mal-") {
            Some(DisorderStratum::Mal)
        } else {
            None
        }
    }
}

fn disinfo_tsv(seed: u64, n: usize) -> String {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5e6f);

    let per_stratum = n / 3;
    let remainder = n - 3 * per_stratum;
    let sizes = [
        per_stratum + usize::from(remainder > 0),
        per_stratum + usize::from(remainder > 1),
        per_stratum,
    ];

    // Trusted-speaker history: no false-leaning counts, so the prior runs
    // high and the repetition proxy stays at zero.
    let trusted = |rng: &mut ChaCha8Rng| -> [u32; 5] {
        let half = rng.gen_range(10u32..14);
        [0, 0, half, 24 - half, 0]
    };
    // Familiar-truth speaker: heavy history with repetition around 10.
    let familiar = |rng: &mut ChaCha8Rng| -> [u32; 5] {
        let half = rng.gen_range(8u32..12);
        [3, 4, half, 20 - half, 3]
    };
    // Low-credibility mal speaker: total 4, gamma 0.2.
    let shady = |_rng: &mut ChaCha8Rng| -> [u32; 5] { [0, 1, 2, 0, 1] };

    let mut lines = Vec::with_capacity(n);
    for (stratum_idx, (&size, prefix)) in sizes.iter().zip(["mis", "dis", "mal"]).enumerate() {
        for j in 0..size {
            let id = format!("{prefix}-{j:04}");
            let speaker = speaker_name(&mut rng, stratum_idx * 10_000 + j);
            let line = match stratum_idx {
                // Mis: plausible plain assertions from trusted speakers,
                // half false (the exploit) and half true.
                0 => {
                    let is_false = j % 2 == 0;
                    let ordinal = if is_false { 1 } else { 5 };
                    let body = assertion(&mut rng, 0);
                    let statement = with_depth(&mut rng, &body, 0, &speaker);
                    let counts = trusted(&mut rng);
                    record(&mut rng, id, ordinal, statement, speaker, counts)
                }
                // Dis: attributed claims; 80% fabricated attributions from
                // speakers with no track record, 20% true attributions from
                // well-documented speakers.
                1 => {
                    let is_false = j % 5 != 4;
                    let ordinal = if is_false { 1 } else { 5 };
                    let body = assertion(&mut rng, 0);
                    let statement = with_depth(&mut rng, &body, 1, &speaker);
                    let counts = if is_false { [0; 5] } else { familiar(&mut rng) };
                    record(&mut rng, id, ordinal, statement, speaker, counts)
                }
                // Mal: meta-epistemic framing; false items are emotionally
                // loaded and come from thin low-credibility histories.
                _ => {
                    let is_false = j % 2 == 0;
                    let ordinal = if is_false { 1 } else { 5 };
                    let body = assertion(&mut rng, usize::from(is_false));
                    let statement = with_depth(&mut rng, &body, 2, &speaker);
                    let counts = if is_false { shady(&mut rng) } else { familiar(&mut rng) };
                    record(&mut rng, id, ordinal, statement, speaker, counts)
                }
            };
            lines.push(line.to_tsv());
        }
    }
    lines.join("\n")
}

/// Generate a LIAR-format TSV corpus.
pub fn synth_liar_tsv(seed: u64, n: usize, preset: LiarPreset) -> String {
    match preset {
        LiarPreset::Informative => informative_tsv(seed, n),
        LiarPreset::Leakage => leakage_tsv(seed, n),
    }
}

/// Generate and parse a LIAR-like corpus.
pub fn synth_liar(seed: u64, n: usize, preset: LiarPreset) -> Vec<Claim> {
    let tsv = synth_liar_tsv(seed, n, preset);
    let (claims, report) = parse_liar(std::io::Cursor::new(tsv)).expect("generator output parses");
    debug_assert!(report.rejects.is_empty(), "generator produced rejects: {:?}", report.rejects);
    claims
}

/// TSV form of the three-stratum disorder suite.
pub fn synth_disinfo_tsv(seed: u64, n: usize) -> String {
    disinfo_tsv(seed, n)
}

/// The labelled synthetic disorder suite: mis- (depth 0), dis- (depth 1)
/// and mal- (depth 2) strata with controlled valence, repetition,
/// credibility and priors.
pub fn synth_disinfo_suite(seed: u64, n: usize) -> Vec<Claim> {
    let tsv = disinfo_tsv(seed, n);
    let (claims, report) = parse_liar(std::io::Cursor::new(tsv)).expect("generator output parses");
    debug_assert!(report.rejects.is_empty());
    claims
}
