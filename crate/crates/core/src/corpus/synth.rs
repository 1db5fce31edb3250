//! Seeded generator for small labeled corpora shaped like disaster-time
//! Twitter traffic: requests phrased as statements, questions and commands,
//! situational updates that are not requests, and the usual noise of
//! mentions, retweet markers, links, numbers and capitalization.

use rand::seq::IndexedRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Dataset, LabelDomain, RawTweet, NOT_RWEET, RWEET};
use crate::error::{Error, Result};

/// Grammatical mood of a request template.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mood {
    Declarative,
    Interrogative,
    Imperative,
}

/// Category-neutral request templates. `{item}` is filled with a
/// category-specific resource and `{loc}` with a place name.
pub const REQUEST_TEMPLATES: &[(Mood, &str)] = &[
    (Mood::Declarative, "we need {item} at {loc}"),
    (Mood::Declarative, "our family needs {item} in {loc}"),
    (
        Mood::Declarative,
        "people in {loc} are desperate for {item}",
    ),
    (Mood::Declarative, "still no {item} in {loc}, we need help"),
    (Mood::Interrogative, "can you bring {item} to {loc}?"),
    (Mood::Interrogative, "could someone send {item} to {loc}?"),
    (
        Mood::Interrogative,
        "does anyone have {item} for families in {loc}?",
    ),
    (Mood::Interrogative, "how can we get {item} to {loc}?"),
    (Mood::Imperative, "need {item} at {loc} please help"),
    (Mood::Imperative, "please send {item} to {loc}"),
    (Mood::Imperative, "bring {item} to {loc} please"),
    (Mood::Imperative, "get us {item} in {loc} asap"),
];

struct Category {
    label: &'static str,
    items: &'static [&'static str],
    templates: &'static [&'static str],
}

const CATEGORIES: &[Category] = &[
    Category {
        label: "money",
        items: &[
            "money",
            "donations",
            "cash donations",
            "funds",
            "relief funds",
            "a few dollars",
        ],
        templates: &[
            "where can i donate money for {disaster} victims",
            "text redcross to {num} to donate {num} dollars to {disaster} relief",
            "please donate to the {disaster} relief fund",
            "we are raising money for families in {loc}, please give",
            "donate what you can, every dollar helps {loc}",
        ],
    },
    Category {
        label: "volunteer",
        items: &[
            "volunteers",
            "extra hands",
            "people to help clean up",
            "volunteer drivers",
            "helpers",
        ],
        templates: &[
            "where can we volunteer to help in {loc}?",
            "we would like to volunteer in {loc} this weekend",
            "looking for volunteers to help clean up {loc}",
            "how can i sign up to volunteer after {disaster}",
            "anyone organizing volunteer crews for {loc}?",
        ],
    },
    Category {
        label: "cloth",
        items: &[
            "clothes",
            "warm clothes",
            "blankets",
            "coats",
            "jackets",
            "socks and shoes",
            "winter clothing",
        ],
        templates: &[
            "please donate warm clothes and blankets for {disaster} victims",
            "kids in {loc} need coats and socks",
            "where can i drop off clothes for {loc}?",
            "collecting jackets and blankets for families in {loc}",
        ],
    },
    Category {
        label: "shelter",
        items: &[
            "shelter",
            "a place to stay",
            "temporary housing",
            "a warm room",
            "beds",
            "an evacuation shelter",
        ],
        templates: &[
            "families in {loc} need a place to stay tonight",
            "is there an open shelter near {loc}?",
            "we lost our home, need shelter in {loc}",
            "looking for housing for evacuees from {loc}",
        ],
    },
    Category {
        label: "medical",
        items: &[
            "blood donors",
            "medicine",
            "insulin",
            "a first aid kit",
            "medical supplies",
            "a doctor",
        ],
        templates: &[
            "urgent blood donors needed at {loc} hospital",
            "need insulin and medicine in {loc}, please help",
            "can a doctor come to {loc}? people are injured",
            "hospital in {loc} is short on medical supplies",
        ],
    },
    Category {
        label: "food",
        items: &[
            "food",
            "water",
            "hot meals",
            "canned food",
            "baby formula",
            "groceries",
        ],
        templates: &[
            "need food and water in {loc}, kids are hungry",
            "please bring hot meals to {loc}",
            "where can i drop off canned food for {disaster} victims?",
            "families in {loc} have no groceries left",
        ],
    },
];

const NON_REQUEST_TEMPLATES: &[&str] = &[
    "{disaster} hits {loc} tonight, stay safe everyone",
    "praying for everyone affected by {disaster}",
    "power is out across {loc} after {disaster}",
    "watching the news about {disaster}, so sad",
    "storm surge flooded the streets of {loc}",
    "thank you to all the first responders in {loc}",
    "photos of the damage in {loc} are unreal",
    "schools in {loc} closed tomorrow because of {disaster}",
    "wind is picking up here in {loc}",
    "{disaster} update: {num} homes damaged in {loc}",
    "is anyone else watching the {disaster} coverage?",
    "the sky over {loc} looks scary right now",
    "trees down all over {loc}, what a night",
    "{disaster} made landfall near {loc} this morning",
    "stay strong {loc}, thoughts are with you",
    "subway service in {loc} suspended until further notice",
];

const LOCATIONS: &[&str] = &[
    "brooklyn",
    "hoboken",
    "staten island",
    "long island",
    "queens",
    "manhattan",
    "atlantic city",
    "the jersey shore",
    "sendai",
    "fukushima",
    "miyagi",
    "rockaway",
];

const DISASTERS: &[&str] = &[
    "sandy",
    "hurricane sandy",
    "the tsunami",
    "the earthquake",
    "the storm",
    "the flood",
];

const USERS: &[&str] = &[
    "redcross",
    "fema",
    "nycmayor",
    "bob_smith",
    "jane_doe",
    "helpnyc",
    "newsdesk",
    "akram",
];

const HASHTAGS: &[&str] = &[
    "#sandy",
    "#tsunami",
    "#help",
    "#relief",
    "#nyc",
    "#prayforjapan",
];

const REQUEST_SUFFIXES: &[&str] = &[
    "",
    "",
    "",
    " asap",
    " thanks",
    " right now",
    " tonight",
    " urgently",
];

/// Class shares for drawn labels, in domain order.
fn label_weights(domain: &LabelDomain) -> Vec<f64> {
    if *domain == LabelDomain::binary() {
        vec![0.44, 0.56]
    } else if *domain == LabelDomain::categorical() {
        vec![0.70, 0.08, 0.06, 0.05, 0.05, 0.06]
    } else {
        vec![1.0; domain.len()]
    }
}

/// Generates `size` labeled tweets. The result is a pure function of
/// `(seed, size, domain)`; every label of the domain appears at least once.
///
/// Only the built-in binary and categorical domains have templates.
pub fn synth_corpus(seed: u64, size: usize, domain: &LabelDomain) -> Result<Dataset> {
    if size < domain.len() {
        return Err(Error::invalid(format!(
            "synthetic corpus of {size} tweets cannot cover {} labels",
            domain.len()
        )));
    }
    let binary = *domain == LabelDomain::binary();
    if !binary && *domain != LabelDomain::categorical() {
        return Err(Error::invalid(format!(
            "no templates for label domain {}",
            domain.name()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = label_weights(domain);
    let total: f64 = weights.iter().sum();
    let mut bases: Vec<(String, usize)> = Vec::with_capacity(size);
    let mut tweets = Vec::with_capacity(size);

    for i in 0..size {
        let label = if i < domain.len() {
            i
        } else {
            let mut draw = rng.random::<f64>() * total;
            let mut pick = weights.len() - 1;
            for (j, w) in weights.iter().enumerate() {
                if draw < *w {
                    pick = j;
                    break;
                }
                draw -= w;
            }
            pick
        };

        // Re-noise an earlier tweet of the same label so that the pair only
        // differs in mentions, links, numbers or case.
        let reuse = i >= domain.len() && rng.random::<f64>() < 0.05;
        let base = match bases.iter().rfind(|(_, l)| *l == label) {
            Some((text, _)) if reuse => text.clone(),
            _ => {
                let label_name = domain.label(label);
                if binary && label_name == NOT_RWEET {
                    let template = *NON_REQUEST_TEMPLATES.choose(&mut rng).unwrap();
                    fill(&mut rng, template, "")
                } else {
                    let category = if binary {
                        CATEGORIES.choose(&mut rng).unwrap()
                    } else {
                        CATEGORIES.iter().find(|c| c.label == label_name).unwrap()
                    };
                    request_text(&mut rng, category)
                }
            }
        };
        let text = add_noise(&mut rng, &base);
        bases.push((base, label));
        tweets.push(RawTweet {
            id: format!("s{seed}-{i:05}"),
            text,
            label: Some(domain.label(label).to_owned()),
        });
    }
    debug_assert!(!binary || tweets.iter().any(|t| t.label.as_deref() == Some(RWEET)));
    Dataset::new(domain.clone(), tweets)
}

fn request_text(rng: &mut ChaCha8Rng, category: &Category) -> String {
    let item = *category.items.choose(rng).unwrap();
    let template = if rng.random::<f64>() < 0.5 {
        category.templates.choose(rng).unwrap()
    } else {
        REQUEST_TEMPLATES.choose(rng).map(|(_, t)| t).unwrap()
    };
    let suffix = REQUEST_SUFFIXES.choose(rng).unwrap();
    let mut text = fill(rng, template, item);
    text.push_str(suffix);
    text
}

fn fill(rng: &mut ChaCha8Rng, template: &str, item: &str) -> String {
    let mut out = template.replace("{item}", item);
    while out.contains("{loc}") {
        out = out.replacen("{loc}", LOCATIONS.choose(rng).unwrap(), 1);
    }
    while out.contains("{disaster}") {
        out = out.replacen("{disaster}", DISASTERS.choose(rng).unwrap(), 1);
    }
    while out.contains("{num}") {
        let n = rng.random_range(2..=5000u32);
        out = out.replacen("{num}", &n.to_string(), 1);
    }
    out
}

fn add_noise(rng: &mut ChaCha8Rng, base: &str) -> String {
    let mut words: Vec<String> = base.split(' ').map(str::to_owned).collect();
    if rng.random::<f64>() < 0.3 {
        if let Some(first) = words.first_mut() {
            *first = capitalize(first);
        }
    }
    if rng.random::<f64>() < 0.1 {
        let i = rng.random_range(0..words.len());
        words[i] = words[i].to_uppercase();
    }
    let mut text = words.join(" ");
    if rng.random::<f64>() < 0.2 {
        let user = USERS.choose(rng).unwrap();
        if rng.random::<bool>() {
            text = format!("@{user} {text}");
        } else {
            text = format!("{text} @{user}");
        }
    }
    if rng.random::<f64>() < 0.15 {
        text = format!("RT @{}: {text}", USERS.choose(rng).unwrap());
    }
    if rng.random::<f64>() < 0.2 {
        text = format!("{text} {}", HASHTAGS.choose(rng).unwrap());
    }
    if rng.random::<f64>() < 0.25 {
        let slug: String = (0..6)
            .map(|_| {
                let c = rng.random_range(0..36u8);
                if c < 10 {
                    (b'0' + c) as char
                } else {
                    (b'a' + c - 10) as char
                }
            })
            .collect();
        text = format!("{text} http://t.co/{slug}");
    }
    text
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use regex::Regex;

    #[test]
    fn deterministic_for_fixed_seed() {
        let a = synth_corpus(7, 60, &LabelDomain::binary()).unwrap();
        let b = synth_corpus(7, 60, &LabelDomain::binary()).unwrap();
        assert_eq!(a.to_jsonl(), b.to_jsonl());
        let c = synth_corpus(8, 60, &LabelDomain::binary()).unwrap();
        assert_ne!(a.to_jsonl(), c.to_jsonl());
    }

    #[test]
    fn every_categorical_label_present() {
        let d = synth_corpus(7, 60, &LabelDomain::categorical()).unwrap();
        let stats = super::super::dataset_stats(&d);
        for label in LabelDomain::categorical().labels() {
            assert!(stats.count(label).unwrap_or(0) > 0, "{label} missing");
        }
    }

    #[test]
    fn too_small_is_rejected() {
        assert!(synth_corpus(1, 5, &LabelDomain::categorical()).is_err());
        assert!(synth_corpus(1, 6, &LabelDomain::categorical()).is_ok());
    }

    #[test]
    fn imperative_template_shape() {
        let matches_imperative = |text: &str| {
            REQUEST_TEMPLATES.iter().any(|(mood, t)| {
                let pattern = regex::escape(t)
                    .replace(r"\{item\}", ".+")
                    .replace(r"\{loc\}", ".+");
                *mood == Mood::Imperative
                    && Regex::new(&format!("^{pattern}$")).unwrap().is_match(text)
            })
        };
        assert!(matches_imperative("need shelter at _location_ please help"));
        assert!(!matches_imperative(
            "praying for everyone affected by sandy"
        ));
    }

    #[test]
    fn noise_is_injected() {
        let d = synth_corpus(3, 400, &LabelDomain::binary()).unwrap();
        let texts: Vec<&str> = d.tweets().iter().map(|t| t.text.as_str()).collect();
        assert!(texts.iter().any(|t| t.contains('@')));
        assert!(texts.iter().any(|t| t.contains("http://")));
        assert!(texts.iter().any(|t| t.starts_with("RT @")));
        assert!(texts
            .iter()
            .any(|t| t.chars().any(|c| c.is_ascii_uppercase())));
        assert!(texts.iter().any(|t| t.chars().any(|c| c.is_ascii_digit())));
    }
}
