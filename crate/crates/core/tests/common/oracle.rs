//! Independent interpreters used as oracles over generated data.

use lvvqa::synthdata::{Color, Object, Scene, Shape, Size};

fn shape_word(s: Shape) -> &'static str {
    match s {
        Shape::Circle => "circle",
        Shape::Square => "square",
        Shape::Triangle => "triangle",
    }
}

fn color_word(c: Color) -> &'static str {
    match c {
        Color::Red => "red",
        Color::Blue => "blue",
        Color::Green => "green",
        Color::Yellow => "yellow",
    }
}

fn size_word(s: Size) -> &'static str {
    match s {
        Size::Small => "small",
        Size::Large => "large",
    }
}

/// Answers a templated question against a scene, returning
/// `(answer, category)`, or `None` if the question is not well posed.
pub fn answer(scene: &Scene, question: &str) -> Option<(String, &'static str)> {
    let words: Vec<&str> = question.split_whitespace().collect();
    let objs = &scene.objects;
    match words.as_slice() {
        ["what", "color", "is", "the", shape] => {
            let hits: Vec<&Object> = objs.iter().filter(|o| shape_word(o.shape) == *shape).collect();
            (hits.len() == 1).then(|| (color_word(hits[0].color).to_string(), "color"))
        }
        ["how", "many", plural, "are", "there"] => {
            let shape = plural.strip_suffix('s')?;
            let known = [Shape::Circle, Shape::Square, Shape::Triangle]
                .iter()
                .any(|&s| shape_word(s) == shape);
            known.then(|| {
                let n = objs.iter().filter(|o| shape_word(o.shape) == shape).count();
                (n.to_string(), "count")
            })
        }
        ["is", "there", "a", color, shape] => {
            let present = objs
                .iter()
                .any(|o| color_word(o.color) == *color && shape_word(o.shape) == *shape);
            Some((if present { "yes" } else { "no" }.to_string(), "yesno"))
        }
        ["what", "shape", "is", "the", color, "object"] => {
            let hits: Vec<&Object> = objs.iter().filter(|o| color_word(o.color) == *color).collect();
            (hits.len() == 1).then(|| (shape_word(hits[0].shape).to_string(), "shape"))
        }
        _ => None,
    }
}

/// `(size, color, shape)` words of every object, sorted.
pub fn object_multiset(scene: &Scene) -> Vec<(String, String, String)> {
    let mut v: Vec<_> = scene
        .objects
        .iter()
        .map(|o| {
            (
                size_word(o.size).to_string(),
                color_word(o.color).to_string(),
                shape_word(o.shape).to_string(),
            )
        })
        .collect();
    v.sort();
    v
}

/// Parses `"a <size> <color> <shape> and a ..."` into a sorted multiset.
pub fn parse_caption(caption: &str) -> Option<Vec<(String, String, String)>> {
    let mut v = Vec::new();
    for part in caption.split(" and ") {
        match part.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["a", size, color, shape] => v.push((size.to_string(), color.to_string(), shape.to_string())),
            _ => return None,
        }
    }
    v.sort();
    Some(v)
}

/// Clean 15-dim histogram: `shape * 4 + color` counts, then small, large, total.
pub fn histogram(scene: &Scene) -> Vec<f64> {
    let mut h = vec![0.0; 15];
    for o in &scene.objects {
        let s = [Shape::Circle, Shape::Square, Shape::Triangle]
            .iter()
            .position(|&x| x == o.shape)
            .unwrap();
        let c = [Color::Red, Color::Blue, Color::Green, Color::Yellow]
            .iter()
            .position(|&x| x == o.color)
            .unwrap();
        h[s * 4 + c] += 1.0;
        h[if o.size == Size::Small { 12 } else { 13 }] += 1.0;
        h[14] += 1.0;
    }
    h
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Runs both data-integrity oracles over `n` records; returns
/// `(interpreter mismatches, caption mismatches)`.
pub fn check_integrity(n: usize, seed: u64) -> (usize, usize) {
    use lvvqa::synthdata::{generate_example, Split, SynthConfig};
    let cfg = SynthConfig::new(n, 0.5, seed, Split::Train);
    let mut bad_answers = 0;
    let mut bad_captions = 0;
    for i in 0..n {
        let (scene, rec) = generate_example(&cfg, i);
        let expected = answer(&scene, &rec.question);
        if expected != Some((rec.answer.clone(), category_str(&rec.category))) {
            bad_answers += 1;
        }
        if !(1..=4).contains(&scene.objects.len()) || parse_caption(&rec.caption) != Some(object_multiset(&scene)) {
            bad_captions += 1;
        }
    }
    (bad_answers, bad_captions)
}

fn category_str(c: &str) -> &'static str {
    match c {
        "color" => "color",
        "count" => "count",
        "yesno" => "yesno",
        "shape" => "shape",
        _ => "?",
    }
}
