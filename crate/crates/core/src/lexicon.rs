//! Bundled vocabulary: object labels, the room categories they suggest, and
//! the stopword list used for keyword extraction.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use serde::Deserialize;

const LEXICON_TOML: &str = include_str!("../data/room_lexicon.toml");
const STOPWORDS_TXT: &str = include_str!("../data/stopwords.txt");

#[derive(Debug, Clone, Deserialize)]
pub struct LexiconEntry {
    pub label: String,
    pub rooms: Vec<String>,
    #[serde(default)]
    pub switchable: bool,
}

#[derive(Debug, Deserialize)]
struct LexiconFile {
    object: Vec<LexiconEntry>,
}

#[derive(Debug)]
pub struct Lexicon {
    entries: Vec<LexiconEntry>,
}

impl Lexicon {
    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        let file: LexiconFile = toml::from_str(text)?;
        Ok(Self { entries: file.object })
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    pub fn get(&self, label: &str) -> Option<&LexiconEntry> {
        self.entries.iter().find(|e| e.label == label)
    }

    /// Room categories in alphabetical order.
    pub fn categories(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self
            .entries
            .iter()
            .flat_map(|e| e.rooms.iter().map(String::as_str))
            .collect();
        set.into_iter().map(str::to_string).collect()
    }

    /// Labels the world generator places in rooms of `category`.
    pub fn labels_for(&self, category: &str) -> Vec<&LexiconEntry> {
        self.entries
            .iter()
            .filter(|e| e.rooms.first().map(String::as_str) == Some(category))
            .collect()
    }
}

pub fn lexicon() -> &'static Lexicon {
    static LEX: OnceLock<Lexicon> = OnceLock::new();
    LEX.get_or_init(|| Lexicon::parse(LEXICON_TOML).expect("bundled lexicon is valid TOML"))
}

pub fn stopwords() -> &'static BTreeSet<String> {
    static WORDS: OnceLock<BTreeSet<String>> = OnceLock::new();
    WORDS.get_or_init(|| {
        STOPWORDS_TXT
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect()
    })
}

/// Lowercased alphanumeric tokens of `text`.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}
