//! Text normalization: punctuation stripping, whitespace tokenization,
//! rule-based lemmatization and stopword removal, applied in that order.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");
const DEFAULT_LEMMA_RULES: &str = include_str!("../data/lemma_rules.txt");

/// Suffix rules never strip a token down to fewer characters than this.
const MIN_STEM_CHARS: usize = 2;

pub type TokenList = Vec<String>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuffixRule {
    pub pattern: String,
    pub replacement: String,
    pub repair: bool,
}

/// Irregular-form lookup plus an ordered suffix-rewrite table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LemmaRules {
    irregular: HashMap<String, String>,
    suffixes: Vec<SuffixRule>,
}

impl LemmaRules {
    pub fn parse(text: &str) -> Result<Self> {
        let mut rules = LemmaRules::default();
        for (i, line) in text.lines().enumerate() {
            let line = strip_comment(line);
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = |message: String| Error::Parse {
                context: "lemma rules".into(),
                row: i + 1,
                message,
            };
            match fields.as_slice() {
                ["irregular", form, lemma] => {
                    rules.irregular.insert(form.to_string(), lemma.to_string());
                }
                ["suffix", pattern, replacement, rest @ ..] => {
                    let repair = match rest {
                        [] => false,
                        ["repair"] => true,
                        _ => return Err(bad(format!("unexpected trailing fields in `{line}`"))),
                    };
                    let replacement = if *replacement == "-" { "" } else { replacement };
                    rules.suffixes.push(SuffixRule {
                        pattern: pattern.to_string(),
                        replacement: replacement.to_string(),
                        repair,
                    });
                }
                _ => return Err(bad(format!("unrecognized rule `{line}`"))),
            }
        }
        Ok(rules)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    /// Serializes back into the line format accepted by [`LemmaRules::parse`].
    /// Irregular entries are written in sorted order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut irregular: Vec<_> = self.irregular.iter().collect();
        irregular.sort();
        for (form, lemma) in irregular {
            out.push_str(&format!("irregular {form} {lemma}\n"));
        }
        for r in &self.suffixes {
            let repl = if r.replacement.is_empty() { "-" } else { &r.replacement };
            out.push_str(&format!("suffix {} {}", r.pattern, repl));
            if r.repair {
                out.push_str(" repair");
            }
            out.push('\n');
        }
        out
    }

    pub fn lemmatize(&self, token: &str) -> String {
        if let Some(lemma) = self.irregular.get(token) {
            return lemma.clone();
        }
        for rule in &self.suffixes {
            let Some(stem) = token.strip_suffix(rule.pattern.as_str()) else {
                continue;
            };
            let guard = rule.pattern == rule.replacement;
            if !guard && stem.chars().count() < MIN_STEM_CHARS {
                continue;
            }
            if rule.repair {
                if !stem.chars().any(is_vowel) {
                    continue;
                }
                let mut stem = repair_stem(stem);
                stem.push_str(&rule.replacement);
                return stem;
            }
            return format!("{stem}{}", rule.replacement);
        }
        token.to_string()
    }
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

fn repair_stem(stem: &str) -> String {
    let chars: Vec<char> = stem.chars().collect();
    let n = chars.len();
    let is_consonant = |c: char| c.is_ascii_alphabetic() && !is_vowel(c);
    if n >= 2 && chars[n - 1] == chars[n - 2] && is_consonant(chars[n - 1]) && !matches!(chars[n - 1], 'l' | 's' | 'z') {
        return chars[..n - 1].iter().collect();
    }
    if n == 3
        && is_consonant(chars[0])
        && is_vowel(chars[1])
        && is_consonant(chars[2])
        && !matches!(chars[2], 'w' | 'x' | 'y')
    {
        return format!("{stem}e");
    }
    stem.to_string()
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => line[..i].trim(),
        None => line.trim(),
    }
}

/// Parses a stopword list: one token per line, `#` comments allowed.
pub fn parse_stopwords(text: &str) -> HashSet<String> {
    text.lines()
        .map(strip_comment)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreprocessConfig {
    stopwords: HashSet<String>,
    pub lemma_rules: LemmaRules,
    pub lowercase: bool,
}

impl PreprocessConfig {
    /// Builds a config; stopwords are case-folded when `lowercase` is set so
    /// that they match folded tokens.
    pub fn new(stopwords: HashSet<String>, lemma_rules: LemmaRules, lowercase: bool) -> Self {
        let stopwords = if lowercase {
            stopwords.into_iter().map(|s| s.to_lowercase()).collect()
        } else {
            stopwords
        };
        PreprocessConfig {
            stopwords,
            lemma_rules,
            lowercase,
        }
    }

    pub fn stopwords(&self) -> &HashSet<String> {
        &self.stopwords
    }

    /// Stopwords one per line, sorted.
    pub fn stopwords_text(&self) -> String {
        let mut words: Vec<&String> = self.stopwords.iter().collect();
        words.sort();
        words.into_iter().fold(String::new(), |mut acc, w| {
            acc.push_str(w);
            acc.push('\n');
            acc
        })
    }
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        let rules = LemmaRules::parse(DEFAULT_LEMMA_RULES).expect("bundled lemma rules parse");
        PreprocessConfig::new(parse_stopwords(DEFAULT_STOPWORDS), rules, true)
    }
}

/// Removes ASCII punctuation; everything else (whitespace, digits, non-ASCII
/// symbols) is kept in order.
pub fn strip_punctuation(text: &str) -> String {
    text.chars().filter(|c| !c.is_ascii_punctuation()).collect()
}

pub fn tokenize(text: &str, lowercase: bool) -> TokenList {
    text.split_whitespace()
        .map(|t| if lowercase { t.to_lowercase() } else { t.to_string() })
        .collect()
}

pub fn remove_stopwords(tokens: TokenList, config: &PreprocessConfig) -> TokenList {
    tokens
        .into_iter()
        .filter(|t| !config.stopwords.contains(t))
        .collect()
}

pub fn preprocess(text: &str, config: &PreprocessConfig) -> TokenList {
    let tokens = tokenize(&strip_punctuation(text), config.lowercase)
        .into_iter()
        .map(|t| config.lemma_rules.lemmatize(&t))
        .collect();
    remove_stopwords(tokens, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(words: &[&str]) -> TokenList {
        words.iter().map(|w| w.to_string()).collect()
    }

    fn cfg_with(stop: &[&str]) -> PreprocessConfig {
        PreprocessConfig::new(
            stop.iter().map(|s| s.to_string()).collect(),
            PreprocessConfig::default().lemma_rules,
            true,
        )
    }

    #[test]
    fn punctuation() {
        assert_eq!(strip_punctuation("Hello, world!"), "Hello world");
        assert_eq!(strip_punctuation("!!!"), "");
        assert_eq!(strip_punctuation("don't-stop"), "dontstop");
        assert_eq!(strip_punctuation("café 42 ¿ ok"), "café 42 ¿ ok");
    }

    #[test]
    fn tokenization() {
        assert_eq!(tokenize("He is a lazy boy", true), toks(&["he", "is", "a", "lazy", "boy"]));
        assert!(tokenize("", true).is_empty());
        assert_eq!(tokenize("  a  b ", true), toks(&["a", "b"]));
        assert_eq!(tokenize("Keep Case", false), toks(&["Keep", "Case"]));
    }

    #[test]
    fn lemmas_from_bundled_table() {
        let rules = PreprocessConfig::default().lemma_rules;
        let cases = [
            ("gone", "go"),
            ("lazy", "lazy"),
            ("boys", "boy"),
            ("parties", "party"),
            ("classes", "class"),
            ("boxes", "box"),
            ("stopped", "stop"),
            ("hated", "hate"),
            ("hating", "hate"),
            ("killing", "kill"),
            ("running", "run"),
            ("wanted", "want"),
            ("thing", "thing"),
            ("this", "this"),
            ("boss", "boss"),
            ("need", "need"),
            ("ties", "tie"),
            ("as", "as"),
        ];
        for (word, lemma) in cases {
            assert_eq!(rules.lemmatize(word), lemma, "lemma of {word}");
        }
    }

    #[test]
    fn rule_table_round_trips_through_text() {
        let rules = PreprocessConfig::default().lemma_rules;
        assert_eq!(LemmaRules::parse(&rules.to_text()).unwrap(), rules);
    }

    #[test]
    fn rule_parse_errors_carry_line() {
        let err = LemmaRules::parse("irregular a b\nbogus line\n").unwrap_err();
        assert!(matches!(err, Error::Parse { row: 2, .. }));
        assert!(LemmaRules::parse("suffix s - extra\n").is_err());
    }

    #[test]
    fn stopword_filter() {
        let cfg = cfg_with(&["is", "a", "also"]);
        let d1 = toks(&["he", "is", "a", "lazy", "boy", "she", "is", "also", "lazy"]);
        assert_eq!(remove_stopwords(d1, &cfg), toks(&["he", "lazy", "boy", "she", "lazy"]));
        assert!(remove_stopwords(vec![], &cfg).is_empty());
        assert!(remove_stopwords(toks(&["is", "a"]), &cfg).is_empty());
    }

    #[test]
    fn bundled_stopwords_are_lemma_stable() {
        let cfg = PreprocessConfig::default();
        for w in cfg.stopwords() {
            let lemma = cfg.lemma_rules.lemmatize(w);
            assert!(cfg.stopwords().contains(&lemma), "{w} -> {lemma}");
        }
        assert!(cfg.stopwords().len() >= 140, "{}", cfg.stopwords().len());
    }

    #[test]
    fn stopwords_are_case_folded() {
        let cfg = cfg_with(&["The"]);
        assert!(cfg.stopwords().contains("the"));
        assert!(preprocess("THE end", &cfg) == toks(&["end"]));
    }

    #[test]
    fn full_pipeline_on_bag_of_words_document() {
        let cfg = PreprocessConfig::default();
        let out = preprocess("He is a lazy boy. She is also lazy.", &cfg);
        assert_eq!(out, toks(&["he", "lazy", "boy", "she", "lazy"]));
        assert!(preprocess("", &cfg).is_empty());
        assert!(preprocess("!!! ... ???", &cfg).is_empty());
    }

    proptest! {
        #[test]
        fn strip_is_idempotent(s in "\\PC{0,40}") {
            let once = strip_punctuation(&s);
            prop_assert_eq!(strip_punctuation(&once), once);
        }

        #[test]
        fn output_has_no_stopwords_or_punctuation(s in "[a-zA-Z ,.!?'\\-]{0,60}") {
            let cfg = PreprocessConfig::default();
            let out = preprocess(&s, &cfg);
            for t in &out {
                prop_assert!(!t.is_empty());
                prop_assert!(!t.chars().any(|c| c.is_ascii_punctuation()));
                prop_assert!(!cfg.stopwords().contains(t));
            }
            prop_assert_eq!(&out, &preprocess(&s, &cfg));
        }

        #[test]
        fn fused_equals_composition(s in "\\PC{0,60}") {
            let cfg = PreprocessConfig::default();
            let composed = remove_stopwords(
                tokenize(&strip_punctuation(&s), cfg.lowercase)
                    .iter()
                    .map(|t| cfg.lemma_rules.lemmatize(t))
                    .collect(),
                &cfg,
            );
            prop_assert_eq!(preprocess(&s, &cfg), composed);
        }
    }
}
