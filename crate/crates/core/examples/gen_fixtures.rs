//! Regenerate the synthetic corpora under `fixtures/`.
//!
//! ```text
//! cargo run -p newsxplain --example gen_fixtures -- fixtures
//! ```

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SHARED: &[&str] = &[
    "covid",
    "covid-19",
    "coronavirus",
    "virus",
    "people",
    "health",
    "new",
    "report",
    "says",
    "cases",
    "news",
    "today",
    "state",
    "week",
    "public",
    "video",
    "post",
    "country",
    "government",
    "workers",
    "school",
    "city",
    "family",
    "home",
    "care",
    "social",
    "media",
    "year",
    "after",
    "million",
];

const COAID_REAL: &[&str] = &[
    "cdc",
    "guidance",
    "vaccine",
    "trial",
    "study",
    "researchers",
    "hospitals",
    "masks",
    "testing",
    "distancing",
    "symptoms",
    "recommend",
    "data",
    "clinical",
    "doctors",
    "prevention",
    "officials",
    "infection",
    "antibodies",
    "immunity",
    "handwashing",
    "guidelines",
    "nurses",
    "evidence",
    "safety",
];

const COAID_FAKE: &[&str] = &[
    "cure",
    "miracle",
    "garlic",
    "bleach",
    "5g",
    "hoax",
    "plandemic",
    "secret",
    "conspiracy",
    "gates",
    "microchip",
    "cover-up",
    "exposed",
    "shocking",
    "magnetism",
    "poison",
    "truth",
    "banned",
    "silver",
    "remedy",
    "elites",
    "depopulation",
    "fraud",
    "lies",
    "sheeple",
];

const C19_REAL: &[&str] = &[
    "confirmed",
    "ministry",
    "lockdown",
    "extended",
    "quarantine",
    "hospital",
    "recovered",
    "patients",
    "authorities",
    "announced",
    "statement",
    "measures",
    "reopening",
    "vaccination",
    "clinics",
    "deaths",
    "tally",
    "screening",
    "travel",
    "restrictions",
];

const C19_FAKE: &[&str] = &[
    "wuhan",
    "wuhan",
    "outbreak",
    "outbreak",
    "pandemic",
    "pandemic",
    "china",
    "china",
    "lab",
    "leaked",
    "bioweapon",
    "rumor",
    "secretly",
    "hidden",
    "bodies",
    "crematorium",
    "whistleblower",
    "censored",
    "bats",
    "soup",
    "spreading",
    "cover-up",
    "mass",
    "graves",
];

struct Profile<'a> {
    prefix: &'a str,
    real: &'a [&'a str],
    fake: &'a [&'a str],
    real_label: &'a str,
    fake_label: &'a str,
}

fn sentence(rng: &mut ChaCha8Rng, own: &[&str], other: &[&str]) -> String {
    let len = rng.gen_range(10..=24);
    (0..len)
        .map(|_| {
            let u: f64 = rng.gen();
            let pool = if u < 0.6 {
                own
            } else if u < 0.65 {
                other
            } else {
                SHARED
            };
            *pool.choose(rng).unwrap()
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn write_corpus(
    path: &Path,
    profile: &Profile,
    n_real: usize,
    n_fake: usize,
    seed: u64,
) -> std::io::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<bool> = std::iter::repeat_n(true, n_real)
        .chain(std::iter::repeat_n(false, n_fake))
        .collect();
    labels.shuffle(&mut rng);
    let mut out = BufWriter::new(File::create(path)?);
    for (i, real) in labels.into_iter().enumerate() {
        // a few items carry the opposite class's vocabulary
        let flip = rng.gen::<f64>() < 0.03;
        let text = if real != flip {
            sentence(&mut rng, profile.real, profile.fake)
        } else {
            sentence(&mut rng, profile.fake, profile.real)
        };
        let row = serde_json::json!({
            "id": format!("{}-{:05}", profile.prefix, i + 1),
            "text": text,
            "label": if real { profile.real_label } else { profile.fake_label },
        });
        writeln!(out, "{row}")?;
    }
    out.flush()
}

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    std::fs::create_dir_all(&dir)?;
    let coaid = Profile {
        prefix: "coaid",
        real: COAID_REAL,
        fake: COAID_FAKE,
        real_label: "real",
        fake_label: "fake",
    };
    let c19 = Profile {
        prefix: "c19",
        real: C19_REAL,
        fake: C19_FAKE,
        real_label: "True",
        fake_label: "False",
    };
    write_corpus(&dir.join("coaid_like.jsonl"), &coaid, 3456, 916, 20200101)?;
    write_corpus(&dir.join("c19rumor_like.jsonl"), &c19, 659, 3040, 20200102)?;
    Ok(())
}
