use std::sync::OnceLock;

use regex::Regex;

pub const URL_TOKEN: &str = "<url>";
pub const MENTION_TOKEN: &str = "<mention>";
pub const NUM_TOKEN: &str = "<num>";

fn pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"(?x)
            (?P<url>(?:https?://|www\.)\S+)
            | (?P<mention>@\w+)
            | (?P<placeholder><(?:url|mention|num)>)
            | (?P<num>\d+(?:[.,:]\d+)*)
            | (?P<word>\w+(?:['’]\w+)*)
            | (?P<punct>[^\s\w])
            ",
        )
        .expect("tokenizer pattern compiles")
    })
}

/// Lower-cased word/punctuation tokens. URLs, @-mentions and numerals
/// collapse to `<url>`, `<mention>` and `<num>`.
pub fn tokenize(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    pattern()
        .captures_iter(&lower)
        .map(|caps| {
            if caps.name("url").is_some() {
                URL_TOKEN.to_string()
            } else if caps.name("mention").is_some() {
                MENTION_TOKEN.to_string()
            } else if caps.name("num").is_some() {
                NUM_TOKEN.to_string()
            } else {
                caps[0].to_string()
            }
        })
        .collect()
}
