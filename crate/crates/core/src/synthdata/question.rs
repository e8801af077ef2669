use super::{Color, Scene, Shape};
use crate::numcore::RngStream;

/// Question templates, each tied to one answer category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Template {
    /// "what color is the <shape>", needs a shape held by exactly one object.
    WhatColor,
    /// "how many <shape>s are there"
    HowMany,
    /// "is there a <color> <shape>"
    IsThere,
    /// "what shape is the <color> object", needs a colour held by exactly one object.
    WhatShape,
}

impl Template {
    pub const ALL: [Template; 4] = [
        Template::WhatColor,
        Template::HowMany,
        Template::IsThere,
        Template::WhatShape,
    ];

    pub fn category(self) -> &'static str {
        match self {
            Template::WhatColor => "color",
            Template::HowMany => "count",
            Template::IsThere => "yesno",
            Template::WhatShape => "shape",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Question {
    pub template: Template,
    pub text: String,
    pub answer: String,
    pub category: String,
}

fn unique_shapes(scene: &Scene) -> Vec<Shape> {
    Shape::ALL.into_iter().filter(|&s| scene.count_shape(s) == 1).collect()
}

fn unique_colors(scene: &Scene) -> Vec<Color> {
    Color::ALL.into_iter().filter(|&c| scene.count_color(c) == 1).collect()
}

/// Draws a template uniformly among those valid for `scene`, then fills it.
pub fn make_question(scene: &Scene, rng: &mut RngStream) -> Question {
    let valid: Vec<Template> = Template::ALL
        .into_iter()
        .filter(|&t| match t {
            Template::WhatColor => !unique_shapes(scene).is_empty(),
            Template::WhatShape => !unique_colors(scene).is_empty(),
            Template::HowMany | Template::IsThere => true,
        })
        .collect();
    let template = valid[rng.below(valid.len())];
    make_question_from(scene, template, rng).expect("template checked valid")
}

/// Fills a specific template, or `None` if it is not valid for the scene.
///
/// For "is there" questions the queried pair is, with probability 1/2, taken
/// from a random object of the scene, otherwise drawn uniformly; this keeps
/// yes/no answers from collapsing onto "no".
pub fn make_question_from(scene: &Scene, template: Template, rng: &mut RngStream) -> Option<Question> {
    let (text, answer) = match template {
        Template::WhatColor => {
            let shapes = unique_shapes(scene);
            if shapes.is_empty() {
                return None;
            }
            let shape = shapes[rng.below(shapes.len())];
            let obj = scene.objects.iter().find(|o| o.shape == shape)?;
            (
                format!("what color is the {}", shape.name()),
                obj.color.name().to_string(),
            )
        }
        Template::HowMany => {
            let shape = Shape::ALL[rng.below(Shape::ALL.len())];
            (
                format!("how many {}s are there", shape.name()),
                scene.count_shape(shape).to_string(),
            )
        }
        Template::IsThere => {
            let (color, shape) = if rng.uniform() < 0.5 {
                let o = scene.objects[rng.below(scene.objects.len())];
                (o.color, o.shape)
            } else {
                (
                    Color::ALL[rng.below(Color::ALL.len())],
                    Shape::ALL[rng.below(Shape::ALL.len())],
                )
            };
            let present = scene.objects.iter().any(|o| o.color == color && o.shape == shape);
            (
                format!("is there a {} {}", color.name(), shape.name()),
                if present { "yes" } else { "no" }.to_string(),
            )
        }
        Template::WhatShape => {
            let colors = unique_colors(scene);
            if colors.is_empty() {
                return None;
            }
            let color = colors[rng.below(colors.len())];
            let obj = scene.objects.iter().find(|o| o.color == color)?;
            (
                format!("what shape is the {} object", color.name()),
                obj.shape.name().to_string(),
            )
        }
    };
    Some(Question {
        template,
        text,
        answer,
        category: template.category().to_string(),
    })
}
