//! Line-oriented text checkpoint. Floats are stored as their IEEE-754 bit
//! patterns in hex so that loading reproduces every parameter exactly.

use std::fmt::Write as _;
use std::path::Path;

use super::{Model, ParamStore};
use crate::corpus::{TypeInventories, Vocabulary};
use crate::error::{Error, Result};
use crate::numerics::Tensor;
use crate::training::Hyperparameters;

pub const CHECKPOINT_MAGIC: &str = "mcted-checkpoint 1";

fn list_section(out: &mut String, name: &str, items: &[String]) {
    writeln!(out, "[{name}] {}", items.len()).expect("write to String");
    for item in items {
        writeln!(out, "{item}").expect("write to String");
    }
}

pub fn to_text(model: &Model) -> String {
    let mut out = String::new();
    writeln!(out, "{CHECKPOINT_MAGIC}").expect("write to String");
    let config = model.hyper.to_config();
    list_section(&mut out, "config", &config.lines().map(str::to_string).collect::<Vec<_>>());
    list_section(&mut out, "labels", &model.labels);
    list_section(&mut out, "vocab", model.vocab.tokens());
    list_section(&mut out, "word_types", model.inventories.word_types());
    list_section(&mut out, "relations", model.inventories.base_relations());
    writeln!(out, "[params] {}", model.params.len()).expect("write to String");
    for p in model.params.iter() {
        let dims: Vec<String> = p.value.shape().iter().map(usize::to_string).collect();
        writeln!(out, "{} {}", p.name, dims.join("x")).expect("write to String");
        let words: Vec<String> = p.value.data().iter().map(|v| format!("{:016x}", v.to_bits())).collect();
        writeln!(out, "{}", words.join(" ")).expect("write to String");
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<(usize, &'a str)> {
        self.inner
            .next()
            .map(|(i, l)| (i + 1, l))
            .ok_or_else(|| Error::Checkpoint("unexpected end of file".into()))
    }

    fn section(&mut self, name: &str) -> Result<Vec<String>> {
        let (line, header) = self.next()?;
        let count = header
            .strip_prefix(&format!("[{name}] "))
            .and_then(|c| c.parse::<usize>().ok())
            .ok_or_else(|| Error::Checkpoint(format!("line {line}: expected `[{name}] <count>`")))?;
        (0..count).map(|_| self.next().map(|(_, l)| l.to_string())).collect()
    }
}

pub fn from_text(text: &str) -> Result<Model> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (_, magic) = lines.next()?;
    if magic != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint(format!("unsupported header `{magic}`")));
    }
    let hyper = Hyperparameters::parse(&lines.section("config")?.join("\n"), Hyperparameters::poe())?;
    let labels = lines.section("labels")?;
    let vocab = Vocabulary::from_tokens(lines.section("vocab")?)?;
    let inventories = TypeInventories::new(lines.section("word_types")?, lines.section("relations")?)?;

    let (line, header) = lines.next()?;
    let count = header
        .strip_prefix("[params] ")
        .and_then(|c| c.parse::<usize>().ok())
        .ok_or_else(|| Error::Checkpoint(format!("line {line}: expected `[params] <count>`")))?;
    let mut params = ParamStore::default();
    for _ in 0..count {
        let (line, head) = lines.next()?;
        let bad = |m: &str| Error::Checkpoint(format!("line {line}: {m}"));
        let (name, dims) = head.rsplit_once(' ').ok_or_else(|| bad("expected `<name> <shape>`"))?;
        let shape = dims
            .split('x')
            .map(|d| d.parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| bad("bad shape"))?;
        let (_, body) = lines.next()?;
        let data = body
            .split_whitespace()
            .map(|w| u64::from_str_radix(w, 16).map(f64::from_bits))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| bad("bad tensor data"))?;
        params.push(name, Tensor::new(shape, data).map_err(|e| bad(&e.to_string()))?);
    }

    // Shapes must agree with what the hyperparameters would build.
    let reference = Model::new(hyper.clone(), vocab.clone(), inventories.clone(), labels.clone(), None)?;
    if reference.params.names() != params.names() {
        return Err(Error::Checkpoint("parameter names do not match the configuration".into()));
    }
    for (a, b) in reference.params.iter().zip(params.iter()) {
        if a.value.shape() != b.value.shape() {
            return Err(Error::Checkpoint(format!(
                "`{}` has shape {:?}, expected {:?}",
                b.name,
                b.value.shape(),
                a.value.shape()
            )));
        }
    }
    Ok(Model {
        hyper,
        vocab,
        inventories,
        labels,
        params,
    })
}

pub fn save_checkpoint(model: &Model, path: &Path) -> Result<()> {
    std::fs::write(path, to_text(model)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<Model> {
    from_text(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::random_sentence;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model() -> Model {
        let s = random_sentence(6, &mut ChaCha8Rng::seed_from_u64(9));
        let hyper = Hyperparameters {
            d_word: 4,
            d_model: 6,
            d_r: 2,
            d_w: 3,
            ..Hyperparameters::synthetic()
        };
        Model::for_corpus(hyper, std::slice::from_ref(&s), std::slice::from_ref(&s), None).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let mut m = model();
        m.params.get_mut("classifier.bias").unwrap().data_mut()[0] = -0.0;
        m.params.get_mut("classifier.bias").unwrap().data_mut()[1] = f64::MIN_POSITIVE / 3.0;
        let text = to_text(&m);
        let back = from_text(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(to_text(&back), text);
        let bits = |m: &Model| -> Vec<u64> {
            m.params.iter().flat_map(|p| p.value.data().iter().map(|v| v.to_bits())).collect()
        };
        assert_eq!(bits(&back), bits(&m));
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let text = to_text(&model());
        assert!(matches!(from_text("nope"), Err(Error::Checkpoint(_))));
        let truncated: String = text.lines().take(text.lines().count() - 1).collect::<Vec<_>>().join("\n");
        assert!(from_text(&truncated).is_err());
        let bad_shape = text.replacen("classifier.bias 1x", "classifier.bias 2x", 1);
        assert!(from_text(&bad_shape).is_err());
    }

    #[test]
    fn files_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ckpt");
        let m = model();
        save_checkpoint(&m, &path).unwrap();
        assert_eq!(load_checkpoint(&path).unwrap(), m);
        let missing = dir.path().join("absent.ckpt");
        let err = load_checkpoint(&missing).unwrap_err().to_string();
        assert!(err.contains("absent.ckpt"));
    }
}
