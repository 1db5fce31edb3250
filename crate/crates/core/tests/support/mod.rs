#![allow(dead_code)]

pub mod regex_oracle;

use rweet_core::preprocess::{CleanCorpus, CleanTweet};

pub fn clean_corpus(docs: &[Vec<String>]) -> CleanCorpus {
    let tweets = docs
        .iter()
        .enumerate()
        .map(|(i, tokens)| CleanTweet {
            id: format!("d{i}"),
            tokens: tokens.clone(),
            label: None,
        })
        .collect();
    CleanCorpus::new("fixture", tweets)
}

pub fn labeled_corpus(docs: &[(&str, &str)]) -> CleanCorpus {
    let tweets = docs
        .iter()
        .enumerate()
        .map(|(i, (label, text))| CleanTweet {
            id: format!("d{i}"),
            tokens: text.split_whitespace().map(str::to_owned).collect(),
            label: Some(label.to_string()),
        })
        .collect();
    CleanCorpus::new("fixture", tweets)
}

/// Dense term counts by direct enumeration of every window of every
/// length in `lo..=hi`, columns identified by term string.
pub fn dense_counts(docs: &[Vec<String>], terms: &[String], lo: usize, hi: usize) -> Vec<Vec<f64>> {
    docs.iter()
        .map(|doc| {
            terms
                .iter()
                .map(|term| {
                    let want: Vec<&str> = term.split(' ').collect();
                    let n = want.len();
                    if n < lo || n > hi || doc.len() < n {
                        return 0.0;
                    }
                    (0..=doc.len() - n)
                        .filter(|&s| {
                            doc[s..s + n]
                                .iter()
                                .map(String::as_str)
                                .eq(want.iter().copied())
                        })
                        .count() as f64
                })
                .collect()
        })
        .collect()
}

/// Smoothed idf from dense counts: ln((1 + N) / (1 + df)) + 1.
pub fn dense_idf(counts: &[Vec<f64>], col: usize) -> f64 {
    let n = counts.len() as f64;
    let df = counts.iter().filter(|row| row[col] > 0.0).count() as f64;
    ((1.0 + n) / (1.0 + df)).ln() + 1.0
}

/// Brute-force multinomial naive Bayes posteriors over dense counts.
pub fn nb_posteriors(x: &[Vec<f64>], y: &[usize], k: usize, alpha: f64, query: &[f64]) -> Vec<f64> {
    let v = query.len();
    let mut joint = Vec::new();
    for c in 0..k {
        let members: Vec<usize> = (0..y.len()).filter(|&i| y[i] == c).collect();
        if members.is_empty() {
            joint.push(0.0);
            continue;
        }
        let prior = members.len() as f64 / y.len() as f64;
        let total: f64 = members.iter().map(|&i| x[i].iter().sum::<f64>()).sum();
        let mut p = prior;
        for t in 0..v {
            let count: f64 = members.iter().map(|&i| x[i][t]).sum();
            p *= ((count + alpha) / (total + alpha * v as f64)).powf(query[t]);
        }
        joint.push(p);
    }
    let z: f64 = joint.iter().sum();
    joint.into_iter().map(|p| p / z).collect()
}

/// Request tweets, each with every pattern id it matches.
pub const RULE_POSITIVES: [(&str, &[usize]); 10] = [
    ("Where can I donate clothes for Sandy victims", &[8]),
    ("We will be donating blankets to the shelter tonight", &[1]),
    ("I'm bringing water to the Red Cross center", &[2]),
    ("We're auctioning signed jerseys for storm relief", &[3]),
    ("I would like to give blood this week", &[4, 10, 16]),
    ("We'll raise funds for the families in Queens", &[6]),
    ("Where can we volunteer this weekend", &[9]),
    ("We are ready to help the victims in Japan", &[7]),
    ("Money will be raised at the benefit concert", &[12]),
    ("How can I help with the cleanup", &[17]),
];

/// Disaster tweets that are not requests and match no pattern.
pub const RULE_NEGATIVES: [&str; 20] = [
    "Hurricane Sandy makes landfall near Atlantic City tonight",
    "Power is out across lower Manhattan after the storm",
    "Subway service suspended until further notice",
    "Stay safe everyone, the wind is getting stronger",
    "Thousands of homes flooded in Hoboken",
    "The governor declared a state of emergency this morning",
    "Roads closed near the coast due to flooding",
    "Photos of the damage in Breezy Point are heartbreaking",
    "Schools will remain closed on Tuesday",
    "Earthquake of magnitude 9 strikes off the coast of Japan",
    "Tsunami warning issued for the Pacific coast",
    "Our thoughts are with the families affected by the storm",
    "Trees down all over Brooklyn this morning",
    "Gas lines are long across New Jersey",
    "The storm surge reached record levels last night",
    "Rescue teams are searching the flooded neighborhoods",
    "Fire destroyed dozens of homes in Queens",
    "Red Cross shelters opened across the city",
    "Nuclear plant officials report no radiation leak",
    "Weather service says the worst is over",
];
