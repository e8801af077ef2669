use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numcore::Tensor;

/// Name of the catch-all category, always the last one.
pub const OTHER_CATEGORY: &str = "other";
/// Answer reserved for the catch-all category when no observed answer falls in it.
pub const OTHER_PLACEHOLDER: &str = "<other>";

/// Answer vocabulary partitioned into categories.
///
/// Every answer belongs to exactly one category and every category has at
/// least one answer. Serialized as `{answers, categories, mask}` with `mask`
/// the `|A| × |D|` zero/one membership matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTable", into = "RawTable")]
pub struct CategoryTable {
    answers: Vec<String>,
    categories: Vec<String>,
    answer_category: Vec<usize>,
    members: Vec<Vec<usize>>,
    answer_index: HashMap<String, usize>,
    category_index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct RawTable {
    answers: Vec<String>,
    categories: Vec<String>,
    mask: Vec<Vec<u8>>,
}

impl TryFrom<RawTable> for CategoryTable {
    type Error = Error;

    fn try_from(raw: RawTable) -> Result<Self> {
        if raw.mask.len() != raw.answers.len() {
            return Err(Error::data(format!(
                "category mask has {} rows for {} answers",
                raw.mask.len(),
                raw.answers.len()
            )));
        }
        let mut assignment = Vec::with_capacity(raw.answers.len());
        for (a, row) in raw.mask.iter().enumerate() {
            if row.len() != raw.categories.len() || row.iter().any(|&m| m > 1) {
                return Err(Error::data(format!(
                    "malformed mask row for answer {:?}",
                    raw.answers[a]
                )));
            }
            let ones: Vec<usize> = row
                .iter()
                .enumerate()
                .filter(|(_, &m)| m == 1)
                .map(|(d, _)| d)
                .collect();
            if ones.len() != 1 {
                return Err(Error::data(format!(
                    "answer {:?} must belong to exactly one category, found {}",
                    raw.answers[a],
                    ones.len()
                )));
            }
            assignment.push(ones[0]);
        }
        CategoryTable::new(raw.answers, raw.categories, assignment)
    }
}

impl From<CategoryTable> for RawTable {
    fn from(t: CategoryTable) -> Self {
        let mask = t
            .answer_category
            .iter()
            .map(|&d| (0..t.categories.len()).map(|k| u8::from(k == d)).collect())
            .collect();
        RawTable {
            answers: t.answers,
            categories: t.categories,
            mask,
        }
    }
}

impl CategoryTable {
    /// `answer_category[a]` is the category index of `answers[a]`.
    pub fn new(answers: Vec<String>, categories: Vec<String>, answer_category: Vec<usize>) -> Result<Self> {
        if answers.is_empty() || categories.is_empty() {
            return Err(Error::data("category table needs at least one answer and one category"));
        }
        if categories.last().map(String::as_str) != Some(OTHER_CATEGORY) {
            return Err(Error::data(format!("last category must be {OTHER_CATEGORY:?}")));
        }
        if answer_category.len() != answers.len() {
            return Err(Error::data("answer/category assignment length mismatch"));
        }
        let mut answer_index = HashMap::new();
        for (i, a) in answers.iter().enumerate() {
            if answer_index.insert(a.clone(), i).is_some() {
                return Err(Error::data(format!("duplicate answer {a:?}")));
            }
        }
        let mut category_index = HashMap::new();
        for (i, c) in categories.iter().enumerate() {
            if category_index.insert(c.clone(), i).is_some() {
                return Err(Error::data(format!("duplicate category {c:?}")));
            }
        }
        let mut members = vec![Vec::new(); categories.len()];
        for (a, &d) in answer_category.iter().enumerate() {
            if d >= categories.len() {
                return Err(Error::data(format!(
                    "answer {:?} has category index {d} out of range",
                    answers[a]
                )));
            }
            members[d].push(a);
        }
        if let Some(d) = members.iter().position(Vec::is_empty) {
            return Err(Error::data(format!("category {:?} has no answers", categories[d])));
        }
        Ok(Self {
            answers,
            categories,
            answer_category,
            members,
            answer_index,
            category_index,
        })
    }

    pub fn n_answers(&self) -> usize {
        self.answers.len()
    }

    pub fn n_categories(&self) -> usize {
        self.categories.len()
    }

    pub fn answers(&self) -> &[String] {
        &self.answers
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn answer_index(&self, answer: &str) -> Option<usize> {
        self.answer_index.get(answer).copied()
    }

    pub fn category_index(&self, category: &str) -> Option<usize> {
        self.category_index.get(category).copied()
    }

    /// Category index of answer `a`.
    pub fn category_of(&self, a: usize) -> usize {
        self.answer_category[a]
    }

    /// Answer indices of category `d`, ascending.
    pub fn members(&self, d: usize) -> &[usize] {
        &self.members[d]
    }

    /// The `|A| × |D|` zero/one membership matrix.
    pub fn mask(&self) -> Tensor {
        let n_d = self.n_categories();
        let mut m = Tensor::zeros(&[self.n_answers(), n_d]);
        for (a, &d) in self.answer_category.iter().enumerate() {
            m.data_mut()[a * n_d + d] = 1.0;
        }
        m
    }
}
