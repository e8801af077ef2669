use std::collections::HashMap;

use super::VqaRecord;
use crate::error::{Error, Result};
use crate::latentvqa::{CategoryTable, OTHER_CATEGORY, OTHER_PLACEHOLDER};

/// Categories in first-seen order followed by `"other"`; answers in
/// first-seen order. An answer seen under two categories is an error. If no
/// record uses `"other"`, it receives the placeholder answer.
pub fn build_category_table(records: &[VqaRecord]) -> Result<CategoryTable> {
    if records.is_empty() {
        return Err(Error::data("cannot build a category table from zero records"));
    }
    let mut categories: Vec<String> = Vec::new();
    let mut category_index: HashMap<&str, usize> = HashMap::new();
    let mut answers: Vec<String> = Vec::new();
    let mut answer_category: Vec<&str> = Vec::new();
    let mut seen: HashMap<&str, &str> = HashMap::new();

    for r in records {
        if r.category != OTHER_CATEGORY && !category_index.contains_key(r.category.as_str()) {
            category_index.insert(&r.category, categories.len());
            categories.push(r.category.clone());
        }
        match seen.get(r.answer.as_str()) {
            Some(&prev) if prev != r.category => {
                return Err(Error::data(format!(
                    "answer {:?} is labelled both {prev:?} and {:?} (record {})",
                    r.answer, r.category, r.id
                )));
            }
            Some(_) => {}
            None => {
                seen.insert(&r.answer, &r.category);
                answers.push(r.answer.clone());
                answer_category.push(&r.category);
            }
        }
    }
    let other = categories.len();
    categories.push(OTHER_CATEGORY.to_string());
    let mut assignment: Vec<usize> = answer_category
        .iter()
        .map(|c| category_index.get(c).copied().unwrap_or(other))
        .collect();
    if !assignment.contains(&other) {
        answers.push(OTHER_PLACEHOLDER.to_string());
        assignment.push(other);
    }
    CategoryTable::new(answers, categories, assignment)
}
