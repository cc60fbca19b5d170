use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{formalize_sentence, FormalizeError, MaskFiller};
use crate::corpus::LabeledExample;
use crate::lexicon::Lexicon;

/// Which split(s) of a labeled dataset are formalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum DatasetVariant {
    /// Both splits untouched.
    Baseline,
    /// Formalized training set.
    Mt,
    /// Original plus formalized training set.
    Mot,
    /// Formalized training and test sets.
    Mtt,
    /// Original plus formalized training set, formalized test set.
    Motmt,
}

impl DatasetVariant {
    pub const ALL: [DatasetVariant; 5] = [
        DatasetVariant::Baseline,
        DatasetVariant::Mt,
        DatasetVariant::Mot,
        DatasetVariant::Mtt,
        DatasetVariant::Motmt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DatasetVariant::Baseline => "baseline",
            DatasetVariant::Mt => "mt",
            DatasetVariant::Mot => "mot",
            DatasetVariant::Mtt => "mtt",
            DatasetVariant::Motmt => "motmt",
        }
    }

    fn keeps_original_train(self) -> bool {
        matches!(self, DatasetVariant::Mot | DatasetVariant::Motmt)
    }

    fn formalizes_train(self) -> bool {
        self != DatasetVariant::Baseline
    }

    fn formalizes_test(self) -> bool {
        matches!(self, DatasetVariant::Mtt | DatasetVariant::Motmt)
    }
}

impl fmt::Display for DatasetVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unknown dataset variant {0:?} (expected baseline, mt, mot, mtt or motmt)")]
pub struct UnknownVariant(pub String);

impl FromStr for DatasetVariant {
    type Err = UnknownVariant;

    /// Case-insensitive; the older FT/FTT/FTO/FTOT names are accepted as aliases.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "baseline" => DatasetVariant::Baseline,
            "mt" | "ft" => DatasetVariant::Mt,
            "mot" | "fto" => DatasetVariant::Mot,
            "mtt" | "ftt" => DatasetVariant::Mtt,
            "motmt" | "ftot" => DatasetVariant::Motmt,
            _ => return Err(UnknownVariant(s.to_string())),
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VariantOptions {
    /// Drop formalized copies identical to their original in MOT/MOTMT.
    pub dedup: bool,
}

impl Default for VariantOptions {
    fn default() -> Self {
        VariantOptions { dedup: true }
    }
}

fn formalize_all(
    set: &[LabeledExample],
    filler: &dyn MaskFiller,
    lexicon: &Lexicon,
) -> Result<Vec<LabeledExample>, FormalizeError> {
    set.par_iter()
        .map(|ex| {
            Ok(LabeledExample {
                record: formalize_sentence(&ex.record, filler, lexicon)?,
                label: ex.label,
            })
        })
        .collect()
}

/// Build the `(train, test)` pair for a dataset variant. Formalized copies
/// added next to their originals get the id `<id>+mod`.
pub fn build_variant(
    train: &[LabeledExample],
    test: &[LabeledExample],
    variant: DatasetVariant,
    filler: &dyn MaskFiller,
    lexicon: &Lexicon,
    opts: VariantOptions,
) -> Result<(Vec<LabeledExample>, Vec<LabeledExample>), FormalizeError> {
    let test_out = if variant.formalizes_test() {
        formalize_all(test, filler, lexicon)?
    } else {
        test.to_vec()
    };
    if !variant.formalizes_train() {
        return Ok((train.to_vec(), test_out));
    }
    let formalized = formalize_all(train, filler, lexicon)?;
    if !variant.keeps_original_train() {
        return Ok((formalized, test_out));
    }
    let mut out = train.to_vec();
    for (orig, new) in train.iter().zip(formalized) {
        if opts.dedup && new.record.text == orig.record.text {
            continue;
        }
        let id = format!("{}+mod", orig.record.id);
        out.push(LabeledExample {
            record: new.record.with_text(id, &new.record.text),
            label: new.label,
        });
    }
    Ok((out, test_out))
}
