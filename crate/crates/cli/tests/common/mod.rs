//! Synthetic Java releases written to disk.
#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

pub const PLANTED_TERM: &str = "leak";
pub const PLANTED_TYPE: &str = "fake.pkg.Leaky";

const ONSETS: [&str; 12] = ["b", "d", "f", "g", "k", "m", "n", "p", "r", "s", "t", "v"];
const NUCLEI: [&str; 4] = ["a", "i", "o", "u"];

/// Pronounceable filler words such as `dakimo`, none containing "lea".
pub fn filler_words(count: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut words = std::collections::BTreeSet::new();
    while words.len() < count {
        let syllables = rng.random_range(2..=3);
        let mut w = String::new();
        for _ in 0..syllables {
            w.push_str(ONSETS.choose(rng).unwrap());
            w.push_str(NUCLEI.choose(rng).unwrap());
        }
        words.insert(w);
    }
    words.into_iter().collect()
}

pub struct SyntheticRelease {
    pub source: PathBuf,
    pub dataset: PathBuf,
    pub names: Vec<String>,
    pub defects: Vec<u32>,
    pub planted: Vec<bool>,
}

/// Writes `files` classes under `root/src/gen` plus `root/<project>-1.0.csv`.
/// A `planted_share` of the files mention the planted term and type and draw
/// defects from Poisson(5); the rest draw from Poisson(0.2). About half the
/// files also use `java.util.List`, independent of defects.
pub fn planted_release(root: &Path, project: &str, files: usize, planted_share: f64, seed: u64) -> SyntheticRelease {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocabulary = filler_words(300, &mut rng);
    let high = Poisson::new(5.0).unwrap();
    let low = Poisson::new(0.2).unwrap();
    let source = root.join("src");
    let dir = source.join("gen");
    fs::create_dir_all(&dir).unwrap();

    let mut names = Vec::new();
    let mut defects = Vec::new();
    let mut planted = Vec::new();
    let mut csv = String::from("name,bug,loc\n");
    for i in 0..files {
        let hot = rng.random_bool(planted_share);
        let class = format!("File{i:03}");
        let mut text = String::from("package gen;\n\nimport fake.pkg.Plain;\n");
        if hot {
            text.push_str("import fake.pkg.Leaky;\n");
        }
        let lists = rng.random_bool(0.5);
        if lists {
            text.push_str("import java.util.List;\n");
        }
        text.push_str("\n/**\n *");
        for _ in 0..rng.random_range(15..40) {
            let _ = write!(text, " {}", vocabulary.choose(&mut rng).unwrap());
        }
        let _ = write!(text, "\n */\npublic class {class} {{\n    private Plain plain;\n");
        if hot {
            text.push_str("    // leak\n");
        }
        if lists {
            text.push_str("    private List<String> items;\n");
        }
        for _ in 0..rng.random_range(2..6) {
            let _ = writeln!(text, "    int {};", vocabulary.choose(&mut rng).unwrap());
        }
        text.push_str("}\n");
        fs::write(dir.join(format!("{class}.java")), &text).unwrap();

        let d = if hot { high.sample(&mut rng) } else { low.sample(&mut rng) } as u32;
        let name = format!("gen.{class}");
        let _ = writeln!(csv, "{name},{d},{}", text.lines().count());
        names.push(name);
        defects.push(d);
        planted.push(hot);
    }
    let dataset = root.join(format!("{project}-1.0.csv"));
    fs::write(&dataset, csv).unwrap();
    SyntheticRelease {
        source,
        dataset,
        names,
        defects,
        planted,
    }
}
