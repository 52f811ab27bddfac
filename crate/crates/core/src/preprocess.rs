//! Post cleaning and stopword handling.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

static URL_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)(?:https?://|www\.)\S+").unwrap());
static EMAIL_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)[a-z0-9._%+\-]+@[a-z0-9.\-]+\.[a-z]{2,}").unwrap());
static MENTION_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)@[a-z0-9_]+").unwrap());
static ENTITY_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)&(?:[a-z]+|#[0-9]+|#x[0-9a-f]+);").unwrap());

/// One switch per cleaning rule. There is deliberately no `Default`; use one
/// of the named presets or spell every field out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleaningConfig {
    pub lowercase: bool,
    pub strip_mentions: bool,
    pub strip_retweet_markers: bool,
    pub strip_urls: bool,
    pub strip_emails: bool,
    pub strip_symbols: bool,
    pub strip_non_ascii: bool,
    /// Applied to tokens downstream of [`clean_text`], never inside it.
    pub remove_stopwords: bool,
}

impl CleaningConfig {
    /// Every text rule on, stopwords kept. Used before n-gram featurization.
    pub const fn classification() -> Self {
        CleaningConfig {
            lowercase: true,
            strip_mentions: true,
            strip_retweet_markers: true,
            strip_urls: true,
            strip_emails: true,
            strip_symbols: true,
            strip_non_ascii: true,
            remove_stopwords: false,
        }
    }

    /// Every rule on, including stopword removal. Used before LDA.
    pub const fn topic_modeling() -> Self {
        CleaningConfig {
            remove_stopwords: true,
            ..Self::classification()
        }
    }

    pub const fn none() -> Self {
        CleaningConfig {
            lowercase: false,
            strip_mentions: false,
            strip_retweet_markers: false,
            strip_urls: false,
            strip_emails: false,
            strip_symbols: false,
            strip_non_ascii: false,
            remove_stopwords: false,
        }
    }
}

/// Characters removed by `strip_symbols`. Hashtag markers and underscores
/// survive so that `#staysafeug` stays one token.
fn is_symbol(c: char) -> bool {
    !(c.is_alphanumeric() || c.is_whitespace() || c == '#' || c == '_')
}

/// Applies the enabled rules in a fixed order: lowercase, URLs, emails,
/// mentions, symbols, non-ASCII, then retweet markers and whitespace
/// collapsing on the resulting tokens. Removed spans become a single space
/// so neighbouring words never fuse.
pub fn clean_text(raw: &str, config: &CleaningConfig) -> String {
    let mut text = if config.lowercase {
        raw.to_lowercase()
    } else {
        raw.to_string()
    };
    if config.strip_urls {
        text = URL_RE.replace_all(&text, " ").into_owned();
    }
    if config.strip_emails {
        text = EMAIL_RE.replace_all(&text, " ").into_owned();
    }
    if config.strip_mentions {
        text = MENTION_RE.replace_all(&text, " ").into_owned();
    }
    if config.strip_symbols {
        text = ENTITY_RE.replace_all(&text, " ").into_owned();
        text = text.chars().map(|c| if is_symbol(c) { ' ' } else { c }).collect();
    }
    if config.strip_non_ascii {
        text = text.chars().map(|c| if c.is_ascii() { c } else { ' ' }).collect();
    }
    // Retweet markers only match as whole lowercase tokens; checking after the
    // other rules also catches forms like "rt:" once the colon is gone.
    let mut out = String::with_capacity(text.len());
    for tok in text.split_whitespace() {
        if config.strip_retweet_markers && tok == "rt" {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(tok);
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopwordList {
    words: BTreeSet<String>,
}

impl StopwordList {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let words = words
            .into_iter()
            .flat_map(|w| w.as_ref().split_whitespace().map(str::to_lowercase).collect::<Vec<_>>())
            .collect();
        StopwordList { words }
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }

    /// Union of two lists, e.g. Luganda plus English.
    pub fn merged(&self, other: &StopwordList) -> StopwordList {
        StopwordList {
            words: self.words.union(&other.words).cloned().collect(),
        }
    }
}

/// One token per line; blank lines and lines starting with `#` are skipped.
pub fn load_stopwords(path: impl AsRef<Path>) -> Result<StopwordList> {
    let path = path.as_ref();
    let body = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_stopwords(&body))
}

pub fn parse_stopwords(body: &str) -> StopwordList {
    StopwordList::new(
        body.lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#')),
    )
}

pub fn remove_stopwords<S: AsRef<str>>(tokens: &[S], list: &StopwordList) -> Vec<String> {
    tokens
        .iter()
        .map(AsRef::as_ref)
        .filter(|t| !list.contains(t))
        .map(str::to_string)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const ALL: CleaningConfig = CleaningConfig::classification();

    #[test]
    fn retweet_mention_entity_url() {
        assert_eq!(
            clean_text("RT @MinOfHealthUG Corona &amp; COVID19 https://t.co/x", &ALL),
            "corona covid19"
        );
    }

    #[test]
    fn empty_input() {
        assert_eq!(clean_text("", &ALL), "");
    }

    #[test]
    fn emoji_removed() {
        assert_eq!(clean_text("Ssenyiga akubye wansi 😷", &ALL), "ssenyiga akubye wansi");
    }

    #[test]
    fn rt_inside_words_survives() {
        assert_eq!(clean_text("Abantu bartender rt-pcr RT", &ALL), "abantu bartender pcr");
        assert_eq!(clean_text("RT: kati", &ALL), "kati");
    }

    #[test]
    fn emails_removed_before_mentions() {
        assert_eq!(clean_text("write to info@health.go.ug now", &ALL), "write to now");
    }

    #[test]
    fn hashtags_kept() {
        assert_eq!(clean_text("#StaySafeUG, tusaba!", &ALL), "#staysafeug tusaba");
    }

    #[test]
    fn symbols_do_not_fuse_words() {
        assert_eq!(clean_text("corona/covid", &ALL), "corona covid");
    }

    #[test]
    fn disabled_rules_leave_text() {
        assert_eq!(clean_text("RT @a  B&amp;", &CleaningConfig::none()), "RT @a B&amp;");
    }

    #[test]
    fn stopword_filter() {
        let list = StopwordList::new(["nga", "eri"]);
        assert_eq!(remove_stopwords(&["nga", "covid", "eri"], &list), vec!["covid"]);
        assert!(remove_stopwords::<&str>(&[], &list).is_empty());
        assert!(remove_stopwords(&["nga", "eri", "nga"], &list).is_empty());
    }

    #[test]
    fn stopword_file_dedup_lowercase() {
        let list = parse_stopwords("Nga\nnga\n# comment\n");
        assert_eq!(list.iter().collect::<Vec<_>>(), vec!["nga"]);
        assert!(parse_stopwords("").is_empty());
        assert_eq!(parse_stopwords("era\nnaye\n").len(), 2);
    }

    #[test]
    fn stopword_file_missing() {
        assert!(matches!(load_stopwords("/no/such/file.txt"), Err(Error::Io { .. })));
    }

    fn any_config() -> impl Strategy<Value = CleaningConfig> {
        proptest::collection::vec(any::<bool>(), 7).prop_map(|b| CleaningConfig {
            lowercase: b[0],
            strip_mentions: b[1],
            strip_retweet_markers: b[2],
            strip_urls: b[3],
            strip_emails: b[4],
            strip_symbols: b[5],
            strip_non_ascii: b[6],
            remove_stopwords: false,
        })
    }

    fn post_like() -> impl Strategy<Value = String> {
        proptest::collection::vec(
            prop_oneof![
                Just("RT".to_string()),
                Just("rt".to_string()),
                Just("@user_1".to_string()),
                Just("https://t.co/ab".to_string()),
                Just("a.b@c.com".to_string()),
                Just("&amp;".to_string()),
                Just("😷".to_string()),
                Just("é".to_string()),
                Just("#tag".to_string()),
                "[ -~]{0,6}",
                "\\PC{0,4}",
            ],
            0..12,
        )
        .prop_map(|parts| parts.concat())
    }

    proptest! {
        #[test]
        fn clean_is_idempotent(raw in post_like(), cfg in any_config()) {
            let once = clean_text(&raw, &cfg);
            prop_assert_eq!(clean_text(&once, &cfg), once.clone());
        }

        #[test]
        fn all_rules_give_short_ascii(raw in post_like()) {
            let out = clean_text(&raw, &ALL);
            prop_assert!(out.is_ascii());
            prop_assert!(out.len() <= raw.len());
        }
    }
}
