//! Tab-separated sentence files.
//!
//! One token per line with columns `INDEX TOKEN POS HEAD RELATION LABEL`,
//! sentences separated by blank lines, `#` starts a comment line. `HEAD` and
//! `RELATION` are both `-` for tokens without an incoming arc.

use std::fmt::Write as _;

use super::{Arc, ParsedSentence};
use crate::error::{Error, Result};

const COLUMNS: usize = 6;

struct Block {
    first_line: usize,
    tokens: Vec<String>,
    pos: Vec<String>,
    heads: Vec<Option<(usize, String)>>,
    labels: Vec<String>,
}

impl Block {
    fn new(first_line: usize) -> Self {
        Block {
            first_line,
            tokens: Vec::new(),
            pos: Vec::new(),
            heads: Vec::new(),
            labels: Vec::new(),
        }
    }

    fn finish(self) -> Result<ParsedSentence> {
        let n = self.tokens.len();
        let mut arcs = Vec::new();
        for (dep, head) in self.heads.into_iter().enumerate() {
            if let Some((head, relation)) = head {
                if head >= n {
                    return Err(Error::Validation(format!(
                        "sentence starting at line {}: head {head} of token {dep} out of range for {n} tokens",
                        self.first_line
                    )));
                }
                arcs.push(Arc::new(head, dep, relation));
            }
        }
        ParsedSentence::new(self.tokens, self.pos, arcs, self.labels).map_err(|e| match e {
            Error::Validation(msg) => {
                Error::Validation(format!("sentence starting at line {}: {msg}", self.first_line))
            }
            other => other,
        })
    }
}

pub fn parse_sentence_file(text: &str) -> Result<Vec<ParsedSentence>> {
    let mut sentences = Vec::new();
    let mut block: Option<Block> = None;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.starts_with('#') {
            continue;
        }
        if line.trim().is_empty() {
            if let Some(b) = block.take() {
                sentences.push(b.finish()?);
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != COLUMNS {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected {COLUMNS} tab-separated columns, found {}", cols.len()),
            });
        }
        let b = block.get_or_insert_with(|| Block::new(line_no));
        let index: usize = cols[0].parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("bad token index `{}`", cols[0]),
        })?;
        if index != b.tokens.len() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("token index {index}, expected {}", b.tokens.len()),
            });
        }
        for (name, value) in [("token", cols[1]), ("POS", cols[2]), ("label", cols[5])] {
            if value.is_empty() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("empty {name} column"),
                });
            }
        }
        let head = match (cols[3], cols[4]) {
            ("-", "-") => None,
            ("-", _) | (_, "-") => {
                return Err(Error::Parse {
                    line: line_no,
                    message: "HEAD and RELATION must both be `-` or both be set".into(),
                })
            }
            (h, rel) => {
                let head: usize = h.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("bad head index `{h}`"),
                })?;
                Some((head, rel.to_string()))
            }
        };
        b.tokens.push(cols[1].to_string());
        b.pos.push(cols[2].to_string());
        b.heads.push(head);
        b.labels.push(cols[5].to_string());
    }
    if let Some(b) = block.take() {
        sentences.push(b.finish()?);
    }
    Ok(sentences)
}

/// Canonical text form. Fails if a token has more than one incoming arc,
/// since the line format holds a single head per token.
pub fn write_sentence_file(sentences: &[ParsedSentence]) -> Result<String> {
    let mut out = String::new();
    for (k, s) in sentences.iter().enumerate() {
        s.validate()?;
        let mut heads: Vec<Option<&Arc>> = vec![None; s.len()];
        for arc in &s.arcs {
            if heads[arc.dependent].replace(arc).is_some() {
                return Err(Error::Validation(format!(
                    "token {} has more than one head",
                    arc.dependent
                )));
            }
        }
        if k > 0 {
            out.push('\n');
        }
        for i in 0..s.len() {
            let (head, rel) = match heads[i] {
                Some(a) => (a.head.to_string(), a.relation.as_str()),
                None => ("-".to_string(), "-"),
            };
            writeln!(
                out,
                "{i}\t{}\t{}\t{head}\t{rel}\t{}",
                s.tokens[i], s.pos_tags[i], s.labels[i]
            )
            .expect("write to String");
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::NONE_LABEL;

    const EXAMPLE: &str = "# fragment\n\
0\tuses\tVB\t2\tnsubj\toperate\n\
1\tvoltage\tNN\t0\tobj\tNONE\n\
2\tdetector\tNN\t-\t-\tNONE\n";

    #[test]
    fn parses_three_token_block() {
        let s = parse_sentence_file(EXAMPLE).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].len(), 3);
        assert_eq!(s[0].arcs, vec![Arc::new(2, 0, "nsubj"), Arc::new(0, 1, "obj")]);
        assert_eq!(s[0].pos_tags, vec!["VB", "NN", "NN"]);
    }

    #[test]
    fn empty_input_gives_no_sentences() {
        assert!(parse_sentence_file("").unwrap().is_empty());
        assert!(parse_sentence_file("# only a comment\n\n").unwrap().is_empty());
    }

    #[test]
    fn all_none_block_is_valid() {
        let text = "0\ta\tDT\t1\tdet\tNONE\n1\tb\tNN\t-\t-\tNONE\n";
        let s = parse_sentence_file(text).unwrap();
        assert_eq!(s[0].trigger_count(), 0);
        assert!(s[0].labels.iter().all(|l| l == NONE_LABEL));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = "0\ta\tDT\t1\tdet\tNONE\n1\tb\tNN\t-\n";
        match parse_sentence_file(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        let text = "0\ta\tDT\t-\tdet\tNONE\n";
        assert!(matches!(parse_sentence_file(text), Err(Error::Parse { line: 1, .. })));
        let text = "\n\n1\ta\tDT\t-\t-\tNONE\n";
        assert!(matches!(parse_sentence_file(text), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn out_of_range_head_is_validation_error() {
        let text = "0\ta\tDT\t5\tdet\tNONE\n1\tb\tNN\t-\t-\tNONE\n";
        assert!(matches!(parse_sentence_file(text), Err(Error::Validation(_))));
        let text = "0\ta\tDT\t0\tdet\tNONE\n";
        assert!(matches!(parse_sentence_file(text), Err(Error::Validation(_))));
    }

    #[test]
    fn canonical_form_drops_comments() {
        let s = parse_sentence_file(EXAMPLE).unwrap();
        let text = write_sentence_file(&s).unwrap();
        assert!(!text.contains('#'));
        assert_eq!(parse_sentence_file(&text).unwrap(), s);
        assert_eq!(write_sentence_file(&parse_sentence_file(&text).unwrap()).unwrap(), text);
    }

    #[test]
    fn two_heads_cannot_be_written() {
        let s = ParsedSentence::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec!["X".into(); 3],
            vec![Arc::new(0, 2, "r"), Arc::new(1, 2, "r")],
            vec![NONE_LABEL.into(); 3],
        )
        .unwrap();
        assert!(write_sentence_file(&[s]).is_err());
    }
}
