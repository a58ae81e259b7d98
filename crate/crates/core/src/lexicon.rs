//! LIWC-style category lexicons and per-document category frequencies.
//!
//! File format:
//!
//! ```text
//! %
//! 1	posemo
//! 2	negemo
//! %
//! happ*	1
//! sad	2
//! ```
//!
//! A trailing `*` makes the pattern a prefix match. A token counts once
//! toward every category any of its matching patterns belongs to.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use crate::error::{Error, Result};
use crate::text::TokenStream;

#[derive(Debug, Clone, PartialEq)]
pub struct CategoryLexicon {
    categories: Vec<(u32, String)>,
    /// category id -> output position
    positions: BTreeMap<u32, usize>,
    literals: HashMap<String, BTreeSet<usize>>,
    /// (prefix, positions), sorted by prefix
    prefixes: Vec<(String, BTreeSet<usize>)>,
}

impl CategoryLexicon {
    pub fn parse(content: &str, path: &Path) -> Result<Self> {
        let mut section = 0;
        let mut categories = Vec::new();
        let mut positions = BTreeMap::new();
        let mut literals: HashMap<String, BTreeSet<usize>> = HashMap::new();
        let mut prefixes: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();

        for (i, raw) in content.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            if line.trim() == "%" {
                section += 1;
                if section > 2 {
                    return Err(Error::parse(path, line_no, "more than two `%` section markers"));
                }
                continue;
            }
            match section {
                0 => return Err(Error::parse(path, line_no, "expected a `%` line before category declarations")),
                1 => {
                    let (id, name) = line
                        .split_once('\t')
                        .ok_or_else(|| Error::parse(path, line_no, "expected `id<TAB>name`"))?;
                    let id: u32 = id
                        .trim()
                        .parse()
                        .map_err(|_| Error::parse(path, line_no, format!("invalid category id {id:?}")))?;
                    if positions.insert(id, categories.len()).is_some() {
                        return Err(Error::parse(path, line_no, format!("category id {id} declared twice")));
                    }
                    categories.push((id, name.trim().to_string()));
                }
                _ => {
                    let mut fields = line.split('\t').filter(|f| !f.trim().is_empty());
                    let pattern = fields
                        .next()
                        .ok_or_else(|| Error::parse(path, line_no, "empty pattern"))?
                        .trim()
                        .to_lowercase();
                    let stem = pattern.strip_suffix('*');
                    if stem.unwrap_or(&pattern).contains('*') || stem == Some("") {
                        return Err(Error::parse(path, line_no, format!("`*` is only allowed as the final character of a pattern: {pattern:?}")));
                    }
                    let mut ids = BTreeSet::new();
                    for f in fields {
                        let id: u32 = f
                            .trim()
                            .parse()
                            .map_err(|_| Error::parse(path, line_no, format!("invalid category id {f:?}")))?;
                        let pos = positions.get(&id).ok_or_else(|| {
                            Error::parse(path, line_no, format!("pattern {pattern:?} references undeclared category {id}"))
                        })?;
                        ids.insert(*pos);
                    }
                    if ids.is_empty() {
                        return Err(Error::parse(path, line_no, format!("pattern {pattern:?} has no categories")));
                    }
                    match stem {
                        Some(s) => prefixes.entry(s.to_string()).or_default().extend(ids),
                        None => literals.entry(pattern).or_default().extend(ids),
                    }
                }
            }
        }
        if section < 2 {
            return Err(Error::parse(path, content.lines().count().max(1), "missing `%` section markers"));
        }
        Ok(CategoryLexicon {
            categories,
            positions,
            literals,
            prefixes: prefixes.into_iter().collect(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&content, path)
    }

    /// Re-emit the lexicon in dictionary format.
    pub fn to_dic(&self) -> String {
        let mut out = String::from("%\n");
        for (id, name) in &self.categories {
            out.push_str(&format!("{id}\t{name}\n"));
        }
        out.push_str("%\n");
        let ids = |set: &BTreeSet<usize>| {
            set.iter()
                .map(|&p| self.categories[p].0.to_string())
                .collect::<Vec<_>>()
                .join("\t")
        };
        let mut literals: Vec<_> = self.literals.iter().collect();
        literals.sort();
        for (w, set) in literals {
            out.push_str(&format!("{w}\t{}\n", ids(set)));
        }
        for (p, set) in &self.prefixes {
            out.push_str(&format!("{p}*\t{}\n", ids(set)));
        }
        out
    }

    pub fn categories(&self) -> &[(u32, String)] {
        &self.categories
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    /// Output positions of every category `token` belongs to.
    pub fn matches(&self, token: &str) -> BTreeSet<usize> {
        let mut hits = self.literals.get(token).cloned().unwrap_or_default();
        for (prefix, ids) in &self.prefixes {
            if token.starts_with(prefix.as_str()) {
                hits.extend(ids);
            }
        }
        hits
    }

    pub fn category_position(&self, id: u32) -> Option<usize> {
        self.positions.get(&id).copied()
    }

    /// `cf(c, r)`: tokens of `r` matching category `c`, divided by `|r|`.
    pub fn category_frequencies(&self, tokens: &TokenStream) -> Vec<f64> {
        let mut counts = vec![0usize; self.categories.len()];
        if tokens.is_empty() {
            return vec![0.0; self.categories.len()];
        }
        let mut cache: HashMap<&str, BTreeSet<usize>> = HashMap::new();
        for t in tokens.iter() {
            let hits = cache.entry(t).or_insert_with(|| self.matches(t));
            for &p in hits.iter() {
                counts[p] += 1;
            }
        }
        let n = tokens.len() as f64;
        counts.into_iter().map(|c| c as f64 / n).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize;
    use proptest::prelude::*;

    const DIC: &str = "%\n1\tposemo\n2\tnegemo\n%\nhapp*\t1\nsad\t2\ngood\t1\n";

    fn lex() -> CategoryLexicon {
        CategoryLexicon::parse(DIC, Path::new("x.dic")).unwrap()
    }

    #[test]
    fn load_examples() {
        let l = lex();
        assert_eq!(l.len(), 2);
        assert_eq!(l.matches("happy"), BTreeSet::from([0]));
        assert_eq!(l.matches("happiness"), BTreeSet::from([0]));
        assert!(l.matches("hap").is_empty());
        let err = CategoryLexicon::parse("%\n1\tpos\n%\nword\t99\n", Path::new("x.dic")).unwrap_err();
        assert!(err.to_string().contains("99"), "{err}");
        assert!(CategoryLexicon::parse("1\tpos\n%\nword\t1\n", Path::new("x.dic")).is_err());
        assert!(CategoryLexicon::parse("%\n1\tpos\nword\t1\n", Path::new("x.dic")).is_err());
        assert!(CategoryLexicon::parse("%\n1\tpos\n%\nwo*rd\t1\n", Path::new("x.dic")).is_err());
        assert!(CategoryLexicon::parse("%\n1\tpos\n1\tneg\n%\n", Path::new("x.dic")).is_err());
    }

    #[test]
    fn frequency_examples() {
        let l = lex();
        assert_eq!(l.category_frequencies(&tokenize("happy good")), vec![1.0, 0.0]);
        assert_eq!(l.category_frequencies(&tokenize("happy sad")), vec![0.5, 0.5]);
        assert_eq!(l.category_frequencies(&tokenize("")), vec![0.0, 0.0]);
    }

    #[test]
    fn multi_category_tokens_count_once_per_category() {
        let l = CategoryLexicon::parse(
            "%\n1\taffect\n2\tposemo\n%\nhapp*\t1\t2\nhappy\t2\n",
            Path::new("x.dic"),
        )
        .unwrap();
        assert_eq!(l.category_frequencies(&tokenize("happy days")), vec![0.5, 0.5]);
    }

    #[test]
    fn dic_round_trip() {
        let l = lex();
        let again = CategoryLexicon::parse(&l.to_dic(), Path::new("x.dic")).unwrap();
        assert_eq!(again, l);
    }

    proptest! {
        #[test]
        fn frequencies_are_ratios(words in proptest::collection::vec("(happy|sad|good|other|happen)", 1..30)) {
            let l = lex();
            let t = tokenize(&words.join(" "));
            let f = l.category_frequencies(&t);
            prop_assert!(f.iter().all(|x| (0.0..=1.0).contains(x)));
            let doubled = tokenize(&format!("{} {}", words.join(" "), words.join(" ")));
            prop_assert_eq!(l.category_frequencies(&doubled), f.clone());
            let mut rev = words.clone();
            rev.reverse();
            prop_assert_eq!(l.category_frequencies(&tokenize(&rev.join(" "))), f);
        }
    }
}
