use super::{Color, Scene};
use crate::numcore::RngStream;

/// 12 (shape, colour) counts, 2 size counts, and the total object count.
pub const FEATURE_DIM: usize = 15;

/// Scene histogram plus i.i.d. `N(0, sigma_v²)` noise per dimension.
///
/// Layout: `shape * 4 + color` for dims 0–11 with shapes ordered
/// (circle, square, triangle) and colours (red, blue, green, yellow);
/// dims 12–13 count (small, large); dim 14 is the total.
pub fn render_features(scene: &Scene, rng: &mut RngStream, sigma_v: f64) -> Vec<f64> {
    let mut v = vec![0.0; FEATURE_DIM];
    for o in &scene.objects {
        v[o.shape.index() * Color::ALL.len() + o.color.index()] += 1.0;
        v[12 + o.size.index()] += 1.0;
        v[14] += 1.0;
    }
    if sigma_v > 0.0 {
        for x in v.iter_mut() {
            *x += sigma_v * rng.standard_normal();
        }
    }
    v
}
