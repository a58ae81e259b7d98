//! Formality score over word-class frequencies, with a small deterministic
//! part-of-speech tagger (closed-class lists, suffix rules, default noun).

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::TokenStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PosTag {
    Noun,
    Verb,
    Adjective,
    Adverb,
    Pronoun,
    Article,
    Preposition,
    Conjunction,
    Interjection,
}

impl FromStr for PosTag {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "noun" => PosTag::Noun,
            "verb" => PosTag::Verb,
            "adjective" => PosTag::Adjective,
            "adverb" => PosTag::Adverb,
            "pronoun" => PosTag::Pronoun,
            "article" => PosTag::Article,
            "preposition" => PosTag::Preposition,
            "conjunction" => PosTag::Conjunction,
            "interjection" => PosTag::Interjection,
            other => return Err(format!("unknown part-of-speech tag {other:?}")),
        })
    }
}

impl fmt::Display for PosTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PosTag::Noun => "noun",
            PosTag::Verb => "verb",
            PosTag::Adjective => "adjective",
            PosTag::Adverb => "adverb",
            PosTag::Pronoun => "pronoun",
            PosTag::Article => "article",
            PosTag::Preposition => "preposition",
            PosTag::Conjunction => "conjunction",
            PosTag::Interjection => "interjection",
        };
        f.write_str(s)
    }
}

const PRONOUNS: &str = "i me my mine myself you your yours yourself yourselves he him his himself \
    she her hers herself it its itself we us our ours ourselves they them their theirs themselves \
    this that these those who whom whose which what someone somebody anyone anybody everyone \
    everybody nobody something anything everything nothing";
const ARTICLES: &str = "a an the";
const PREPOSITIONS: &str = "about above across after against along among around at before behind \
    below beneath beside besides between beyond by despite down during except for from in inside \
    into like near of off on onto out outside over past per since through throughout till to \
    toward towards under underneath until up upon via with within without";
const CONJUNCTIONS: &str = "and but or nor so yet because although though while whereas if unless \
    whether than as";
const INTERJECTIONS: &str = "oh ah wow hey hi hello yes yeah ok okay oops ouch um uh hmm alas";
const VERBS: &str = "am is are was were be been being have has had having do does did done will \
    would shall should can could may might must get gets got go goes went gone make makes made \
    take takes took taken know knew known think thought see saw seen come came want give gave \
    given use find found tell told ask work feel felt try leave left call need become became keep \
    kept let begin began help show hear heard run ran move live believe bring brought happen write \
    wrote provide sit stand lose lost pay paid meet met include continue set learn change lead led \
    understand watch follow stop create speak spoke read allow add spend spent grow grew open walk \
    win won offer remember love consider appear buy bought wait serve send sent expect build built \
    stay fall fell cut reach remain enjoy handle manage solve prefer say said";
const ADVERBS: &str = "very really also just not never always often sometimes usually here there \
    now then too quite already still again soon ever even almost rather perhaps maybe";
const ADJECTIVES: &str = "good great new old big small high low best better important different \
    large long little own same right able bad hard easy happy sure difficult possible free full \
    strong true whole clear real early late young major special";

const SUFFIX_RULES: &[(&str, PosTag)] = &[
    ("ly", PosTag::Adverb),
    ("ing", PosTag::Verb),
    ("ed", PosTag::Verb),
    ("ness", PosTag::Noun),
    ("ment", PosTag::Noun),
    ("tion", PosTag::Noun),
    ("sion", PosTag::Noun),
    ("ity", PosTag::Noun),
    ("ous", PosTag::Adjective),
    ("ful", PosTag::Adjective),
    ("ive", PosTag::Adjective),
    ("able", PosTag::Adjective),
    ("ible", PosTag::Adjective),
    ("ical", PosTag::Adjective),
    ("less", PosTag::Adjective),
    ("ish", PosTag::Adjective),
];

/// Suffix rules only fire when at least this many characters precede the suffix.
const MIN_STEM: usize = 3;

#[derive(Debug, Clone)]
pub struct PosLexicon {
    words: HashMap<String, PosTag>,
    suffix_rules: Vec<(String, PosTag)>,
    default: PosTag,
}

impl Default for PosLexicon {
    fn default() -> Self {
        let mut words = HashMap::new();
        for (list, tag) in [
            (PRONOUNS, PosTag::Pronoun),
            (ARTICLES, PosTag::Article),
            (PREPOSITIONS, PosTag::Preposition),
            (CONJUNCTIONS, PosTag::Conjunction),
            (INTERJECTIONS, PosTag::Interjection),
            (VERBS, PosTag::Verb),
            (ADVERBS, PosTag::Adverb),
            (ADJECTIVES, PosTag::Adjective),
        ] {
            for w in list.split_whitespace() {
                let prev = words.insert(w.to_string(), tag);
                debug_assert!(prev.is_none(), "{w} appears in two closed lists");
            }
        }
        PosLexicon {
            words,
            suffix_rules: SUFFIX_RULES.iter().map(|(s, t)| (s.to_string(), *t)).collect(),
            default: PosTag::Noun,
        }
    }
}

impl PosLexicon {
    /// Parse `word<TAB>tag` lines; entries override the built-in lists.
    pub fn with_overrides(mut self, content: &str, path: &Path) -> Result<Self> {
        for (i, line) in content.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, tag) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(path, i + 1, "expected `word<TAB>tag`"))?;
            let tag: PosTag = tag.parse().map_err(|m: String| Error::parse(path, i + 1, m))?;
            self.words.insert(word.trim().to_lowercase(), tag);
        }
        Ok(self)
    }

    pub fn load_overrides(path: &Path) -> Result<Self> {
        let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        PosLexicon::default().with_overrides(&content, path)
    }

    pub fn tag(&self, token: &str) -> PosTag {
        if let Some(&t) = self.words.get(token) {
            return t;
        }
        if token.ends_with("n't") {
            return PosTag::Verb;
        }
        if let Some((head, _)) = token.split_once('\'') {
            if let Some(&t) = self.words.get(head) {
                return t;
            }
        }
        let len = token.chars().count();
        for (suffix, tag) in &self.suffix_rules {
            if token.ends_with(suffix.as_str()) && len >= suffix.chars().count() + MIN_STEM {
                return *tag;
            }
        }
        self.default
    }
}

/// Formality score: `(noun + adjective + preposition + article − pronoun −
/// verb − adverb − interjection + 100) / 2`, each term a percentage of all
/// tagged tokens.
pub fn fscore(tokens: &TokenStream, pos: &PosLexicon) -> Result<f64> {
    if tokens.is_empty() {
        return Err(Error::data("formality score is undefined for an empty token stream"));
    }
    let mut weighted = 0i64;
    for t in tokens.iter() {
        weighted += match pos.tag(t) {
            PosTag::Noun | PosTag::Adjective | PosTag::Preposition | PosTag::Article => 1,
            PosTag::Pronoun | PosTag::Verb | PosTag::Adverb | PosTag::Interjection => -1,
            PosTag::Conjunction => 0,
        };
    }
    let pct = weighted as f64 * 100.0 / tokens.len() as f64;
    Ok((pct + 100.0) / 2.0)
}
