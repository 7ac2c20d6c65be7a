//! Seeded synthetic corpora with topical structure.
//!
//! Two styles share six topic lexicons:
//!
//! - [`SynthStyle::Grammar`]: sentences from a handful of templates over
//!   shared function words and per-topic nouns, verbs and adjectives. The
//!   co-occurrence graph is dominated by role structure (determiner–noun,
//!   noun–verb, ...), i.e. edges mostly join words of *different* roles.
//! - [`SynthStyle::TopicWalk`]: each sentence is a run of 5 to 10 words
//!   drawn from a single topic's lexicon. The graph is a set of dense,
//!   loosely connected topic communities.
//!
//! In both, each content word has a small chance of coming from another
//! topic, and choice within a list is skewed towards its front.

use gramweave_core::rng::Rng;

struct Topic {
    nouns: &'static [&'static str],
    verbs: &'static [&'static str],
    adjectives: &'static [&'static str],
}

const TOPICS: [Topic; 6] = [
    Topic {
        nouns: &["team", "match", "coach", "player", "goal", "season", "league", "striker", "stadium", "referee", "trophy", "crowd"],
        verbs: &["wins", "loses", "plays", "scores", "defends", "trains", "chases", "celebrates"],
        adjectives: &["fast", "young", "home", "late", "strong", "tired"],
    },
    Topic {
        nouns: &["weather", "forecast", "storm", "rain", "cloud", "wind", "temperature", "front", "valley", "coast", "sky", "frost"],
        verbs: &["brings", "covers", "reaches", "cools", "soaks", "clears", "follows", "threatens"],
        adjectives: &["cold", "warm", "sunny", "heavy", "dry", "grey"],
    },
    Topic {
        nouns: &["actor", "film", "singer", "album", "award", "premiere", "director", "star", "festival", "audience", "studio", "role"],
        verbs: &["releases", "attends", "praises", "films", "signs", "wins", "hosts", "greets"],
        adjectives: &["famous", "new", "bestselling", "glamorous", "local", "rising"],
    },
    Topic {
        nouns: &["market", "bank", "price", "share", "investor", "company", "profit", "budget", "loan", "trader", "index", "merger"],
        verbs: &["raises", "cuts", "buys", "sells", "reports", "funds", "lowers", "approves"],
        adjectives: &["quarterly", "global", "rising", "cautious", "private", "annual"],
    },
    Topic {
        nouns: &["river", "forest", "bird", "tree", "mountain", "lake", "deer", "trail", "meadow", "nest", "island", "fox"],
        verbs: &["crosses", "shelters", "feeds", "climbs", "surrounds", "hides", "floods", "nests"],
        adjectives: &["quiet", "green", "wild", "ancient", "deep", "narrow"],
    },
    Topic {
        nouns: &["computer", "network", "server", "program", "chip", "engineer", "device", "robot", "screen", "signal", "sensor", "code"],
        verbs: &["runs", "connects", "processes", "stores", "detects", "builds", "updates", "tests"],
        adjectives: &["digital", "small", "secure", "faster", "remote", "smart"],
    },
];

const DETERMINERS: &[&str] = &["the", "a", "this", "every", "another"];
const PREPOSITIONS: &[&str] = &["with", "near", "under", "after", "during", "beyond"];
const CONNECTIVES: &[&str] = &["and", "while", "because"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthStyle {
    Grammar,
    TopicWalk,
}

/// Parameters of [`synthetic_corpus`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub sentences: usize,
    pub seed: u64,
    /// Probability that a content word comes from a random topic.
    pub off_topic: f64,
    pub style: SynthStyle,
}

impl SynthConfig {
    pub fn grammar(sentences: usize, seed: u64) -> Self {
        Self { sentences, seed, off_topic: 0.1, style: SynthStyle::Grammar }
    }

    pub fn topic_walk(sentences: usize, seed: u64) -> Self {
        Self { sentences, seed, off_topic: 0.05, style: SynthStyle::TopicWalk }
    }
}

/// Parameters of the bundled trend-check corpus (about 50k words).
pub const TREND_CORPUS: SynthConfig =
    SynthConfig { sentences: 6350, seed: 2024, off_topic: 0.1, style: SynthStyle::Grammar };

/// The bundled trend-check corpus, byte-identical to
/// `synthetic_corpus(&TREND_CORPUS)`.
pub const TREND_CORPUS_TEXT: &str = include_str!("../data/trend-corpus.txt");

struct Gen {
    rng: Rng,
    topic: usize,
    off_topic: f64,
}

impl Gen {
    fn skewed<'a>(&mut self, words: &[&'a str]) -> &'a str {
        let u = self.rng.next_f64();
        words[((u * u) * words.len() as f64) as usize]
    }

    fn topic(&mut self) -> &'static Topic {
        if self.rng.next_f64() < self.off_topic {
            &TOPICS[self.rng.below_usize(TOPICS.len())]
        } else {
            &TOPICS[self.topic]
        }
    }

    fn det(&mut self) -> &'static str {
        self.skewed(DETERMINERS)
    }

    fn noun(&mut self) -> &'static str {
        let t = self.topic();
        self.skewed(t.nouns)
    }

    fn verb(&mut self) -> &'static str {
        let t = self.topic();
        self.skewed(t.verbs)
    }

    fn adjective(&mut self) -> &'static str {
        let t = self.topic();
        self.skewed(t.adjectives)
    }

    fn noun_phrase(&mut self, out: &mut Vec<&'static str>) {
        out.push(self.det());
        if self.rng.next_f64() < 0.4 {
            out.push(self.adjective());
        }
        out.push(self.noun());
    }

    fn clause(&mut self, out: &mut Vec<&'static str>) {
        self.noun_phrase(out);
        out.push(self.verb());
        if self.rng.next_f64() < 0.8 {
            self.noun_phrase(out);
        }
        if self.rng.next_f64() < 0.3 {
            out.push(self.skewed(PREPOSITIONS));
            self.noun_phrase(out);
        }
    }

    fn any_word(&mut self) -> &'static str {
        let t = self.topic();
        let i = self.rng.below_usize(3);
        self.skewed([t.nouns, t.verbs, t.adjectives][i])
    }

    fn walk(&mut self) -> Vec<&'static str> {
        self.topic = self.rng.below_usize(TOPICS.len());
        let len = 5 + self.rng.below_usize(6);
        (0..len).map(|_| self.any_word()).collect()
    }

    fn sentence(&mut self) -> Vec<&'static str> {
        self.topic = self.rng.below_usize(TOPICS.len());
        let mut words = Vec::new();
        self.clause(&mut words);
        if self.rng.next_f64() < 0.2 {
            words.push(self.skewed(CONNECTIVES));
            self.clause(&mut words);
        }
        words
    }
}

/// Generate `config.sentences` sentences, each capitalised and terminated by
/// a period, separated by single spaces with a newline every tenth sentence.
pub fn synthetic_corpus(config: &SynthConfig) -> String {
    let mut g = Gen { rng: Rng::seed_from_u64(config.seed), topic: 0, off_topic: config.off_topic };
    let mut out = String::new();
    for i in 0..config.sentences {
        let words = match config.style {
            SynthStyle::Grammar => g.sentence(),
            SynthStyle::TopicWalk => g.walk(),
        };
        let mut s = words.join(" ");
        s[..1].make_ascii_uppercase();
        out.push_str(&s);
        out.push('.');
        out.push(if (i + 1) % 10 == 0 { '\n' } else { ' ' });
    }
    if !out.ends_with('\n') {
        out.pop();
        out.push('\n');
    }
    out
}
