use super::Scene;

/// `"a <size> <color> <shape>"` per object in generation order, joined by `" and "`.
pub fn make_caption(scene: &Scene) -> String {
    scene
        .objects
        .iter()
        .map(|o| format!("a {} {} {}", o.size.name(), o.color.name(), o.shape.name()))
        .collect::<Vec<_>>()
        .join(" and ")
}
