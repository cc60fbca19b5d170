//! Suffix-rule verb morphology: enough to map inflected forms back onto a
//! lemma list and to re-inflect a replacement verb.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerbForm {
    Base,
    ThirdSingular,
    Past,
    Gerund,
}

/// (surface, lemma, form)
const IRREGULAR: &[(&str, &str, VerbForm)] = &[
    ("am", "be", VerbForm::Base),
    ("is", "be", VerbForm::ThirdSingular),
    ("are", "be", VerbForm::Base),
    ("was", "be", VerbForm::Past),
    ("were", "be", VerbForm::Past),
    ("been", "be", VerbForm::Past),
    ("being", "be", VerbForm::Gerund),
    ("has", "have", VerbForm::ThirdSingular),
    ("had", "have", VerbForm::Past),
    ("does", "do", VerbForm::ThirdSingular),
    ("did", "do", VerbForm::Past),
    ("done", "do", VerbForm::Past),
    ("arose", "arise", VerbForm::Past),
    ("arisen", "arise", VerbForm::Past),
    ("began", "begin", VerbForm::Past),
    ("begun", "begin", VerbForm::Past),
    ("chose", "choose", VerbForm::Past),
    ("chosen", "choose", VerbForm::Past),
    ("gave", "give", VerbForm::Past),
    ("given", "give", VerbForm::Past),
    ("held", "hold", VerbForm::Past),
    ("hung", "hang", VerbForm::Past),
    ("kept", "keep", VerbForm::Past),
    ("ran", "run", VerbForm::Past),
    ("sent", "send", VerbForm::Past),
    ("took", "take", VerbForm::Past),
    ("taken", "take", VerbForm::Past),
    ("wrote", "write", VerbForm::Past),
    ("written", "write", VerbForm::Past),
];

/// Verbs whose past tense does not change form.
const INVARIANT_PAST: &[&str] = &["read", "set", "reset", "put"];

/// Stress-final verbs that double their last consonant.
const DOUBLING: &[&str] = &[
    "occur", "permit", "transmit", "submit", "commit", "refer", "prefer", "control", "compel", "admit", "omit",
    "forbid", "reset", "begin", "forget", "upset",
];

fn irregular_past(lemma: &str) -> Option<&'static str> {
    IRREGULAR
        .iter()
        .find(|(_, l, f)| *l == lemma && *f == VerbForm::Past)
        .map(|(s, _, _)| *s)
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

fn doubles_final(lemma: &str) -> bool {
    if DOUBLING.contains(&lemma) {
        return true;
    }
    let chars: Vec<char> = lemma.chars().collect();
    let n = chars.len();
    if n < 3 {
        return false;
    }
    let (a, b, c) = (chars[n - 3], chars[n - 2], chars[n - 1]);
    let cvc = !is_vowel(a) && is_vowel(b) && !is_vowel(c) && !matches!(c, 'w' | 'x' | 'y');
    let vowel_groups = chars
        .iter()
        .zip(std::iter::once(&' ').chain(chars.iter()))
        .filter(|(c, prev)| is_vowel(**c) && !is_vowel(**prev))
        .count();
    cvc && vowel_groups == 1
}

/// Inflect a lemma into the requested form.
pub fn inflect(lemma: &str, form: VerbForm) -> String {
    match form {
        VerbForm::Base => lemma.to_string(),
        VerbForm::ThirdSingular => {
            if lemma == "be" {
                "is".into()
            } else if lemma == "have" {
                "has".into()
            } else if lemma.ends_with('s')
                || lemma.ends_with('x')
                || lemma.ends_with('z')
                || lemma.ends_with("ch")
                || lemma.ends_with("sh")
                || lemma.ends_with('o')
            {
                format!("{lemma}es")
            } else if ends_consonant_y(lemma) {
                format!("{}ies", &lemma[..lemma.len() - 1])
            } else {
                format!("{lemma}s")
            }
        }
        VerbForm::Past => {
            if let Some(p) = irregular_past(lemma) {
                p.to_string()
            } else if INVARIANT_PAST.contains(&lemma) {
                lemma.to_string()
            } else if lemma.ends_with('e') {
                format!("{lemma}d")
            } else if ends_consonant_y(lemma) {
                format!("{}ied", &lemma[..lemma.len() - 1])
            } else if doubles_final(lemma) {
                let last = lemma.chars().last().unwrap_or_default();
                format!("{lemma}{last}ed")
            } else {
                format!("{lemma}ed")
            }
        }
        VerbForm::Gerund => {
            if let Some(stem) = lemma.strip_suffix("ie") {
                format!("{stem}ying")
            } else if lemma.ends_with('e') && !lemma.ends_with("ee") && lemma.len() > 2 {
                format!("{}ing", &lemma[..lemma.len() - 1])
            } else if doubles_final(lemma) {
                let last = lemma.chars().last().unwrap_or_default();
                format!("{lemma}{last}ing")
            } else {
                format!("{lemma}ing")
            }
        }
    }
}

fn ends_consonant_y(w: &str) -> bool {
    let chars: Vec<char> = w.chars().collect();
    chars.len() >= 2 && chars[chars.len() - 1] == 'y' && !is_vowel(chars[chars.len() - 2])
}

/// Map a lowercase surface form onto a lemma accepted by `is_lemma`.
pub fn lemmatize(word: &str, is_lemma: impl Fn(&str) -> bool) -> Option<(String, VerbForm)> {
    if let Some((_, l, f)) = IRREGULAR.iter().find(|(s, _, _)| *s == word) {
        return Some((l.to_string(), *f));
    }
    if is_lemma(word) {
        return Some((word.to_string(), VerbForm::Base));
    }
    let try_all = |cands: Vec<String>, form: VerbForm| {
        cands
            .into_iter()
            .find(|c| !c.is_empty() && is_lemma(c))
            .map(|c| (c, form))
    };
    if let Some(stem) = word.strip_suffix("ing") {
        let mut cands = vec![stem.to_string(), format!("{stem}e")];
        if let Some(s) = stem.strip_suffix("y") {
            cands.push(format!("{s}ie"));
        }
        if let Some(undoubled) = undouble(stem) {
            cands.push(undoubled);
        }
        if let r @ Some(_) = try_all(cands, VerbForm::Gerund) {
            return r;
        }
    }
    if let Some(stem) = word.strip_suffix("ed") {
        let mut cands = vec![stem.to_string(), format!("{stem}e")];
        if let Some(s) = stem.strip_suffix('i') {
            cands.push(format!("{s}y"));
        }
        if let Some(undoubled) = undouble(stem) {
            cands.push(undoubled);
        }
        if let r @ Some(_) = try_all(cands, VerbForm::Past) {
            return r;
        }
    }
    if let Some(stem) = word.strip_suffix('s') {
        let mut cands = vec![stem.to_string()];
        if let Some(s) = word.strip_suffix("ies") {
            cands.push(format!("{s}y"));
        }
        if let Some(s) = word.strip_suffix("es") {
            cands.push(s.to_string());
        }
        if let r @ Some(_) = try_all(cands, VerbForm::ThirdSingular) {
            return r;
        }
    }
    None
}

fn undouble(stem: &str) -> Option<String> {
    let chars: Vec<char> = stem.chars().collect();
    let n = chars.len();
    (n >= 2 && chars[n - 1] == chars[n - 2]).then(|| chars[..n - 1].iter().collect())
}
