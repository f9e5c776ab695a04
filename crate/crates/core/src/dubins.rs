//! Shortest forward paths with bounded curvature between two poses.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{heading_vector, wrap_angle, Label, PathPolyline, Point2};

/// Position and heading.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Config {
    pub position: Point2,
    pub heading: f64,
}

impl Config {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self {
            position: Point2::new(x, y),
            heading,
        }
    }
}

/// Segment direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Steer {
    Left,
    Straight,
    Right,
}

/// The six candidate words, in tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DubinsWord {
    Lsl,
    Rsr,
    Lsr,
    Rsl,
    Rlr,
    Lrl,
}

impl DubinsWord {
    pub const ALL: [DubinsWord; 6] = [
        DubinsWord::Lsl,
        DubinsWord::Rsr,
        DubinsWord::Lsr,
        DubinsWord::Rsl,
        DubinsWord::Rlr,
        DubinsWord::Lrl,
    ];

    pub fn segments(self) -> [Steer; 3] {
        use Steer::*;
        match self {
            DubinsWord::Lsl => [Left, Straight, Left],
            DubinsWord::Rsr => [Right, Straight, Right],
            DubinsWord::Lsr => [Left, Straight, Right],
            DubinsWord::Rsl => [Right, Straight, Left],
            DubinsWord::Rlr => [Right, Left, Right],
            DubinsWord::Lrl => [Left, Right, Left],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DubinsWord::Lsl => "LSL",
            DubinsWord::Rsr => "RSR",
            DubinsWord::Lsr => "LSR",
            DubinsWord::Rsl => "RSL",
            DubinsWord::Rlr => "RLR",
            DubinsWord::Lrl => "LRL",
        }
    }
}

/// A three-segment path of arcs of radius `radius` and straight lines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DubinsPath {
    pub word: DubinsWord,
    /// Segment lengths in m.
    pub lengths: [f64; 3],
    pub radius: f64,
    pub start: Config,
}

fn mod2pi(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    if r >= 2.0 * PI { 0.0 } else { r }
}

/// Normalised segment parameters `(t, p, q)` of one word, or `None` when the
/// word has no solution. Angles are relative to the start-goal chord and the
/// distance is in units of the turning radius.
fn word_params(word: DubinsWord, alpha: f64, beta: f64, d: f64) -> Option<[f64; 3]> {
    let (sa, sb, ca, cb) = (alpha.sin(), beta.sin(), alpha.cos(), beta.cos());
    let cab = (alpha - beta).cos();
    match word {
        DubinsWord::Lsl => {
            let p2 = 2.0 + d * d - 2.0 * cab + 2.0 * d * (sa - sb);
            if p2 < 0.0 {
                return None;
            }
            let th = (cb - ca).atan2(d + sa - sb);
            Some([mod2pi(th - alpha), p2.sqrt(), mod2pi(beta - th)])
        }
        DubinsWord::Rsr => {
            let p2 = 2.0 + d * d - 2.0 * cab + 2.0 * d * (sb - sa);
            if p2 < 0.0 {
                return None;
            }
            let th = (ca - cb).atan2(d - sa + sb);
            Some([mod2pi(alpha - th), p2.sqrt(), mod2pi(th - beta)])
        }
        DubinsWord::Lsr => {
            let p2 = -2.0 + d * d + 2.0 * cab + 2.0 * d * (sa + sb);
            if p2 < 0.0 {
                return None;
            }
            let p = p2.sqrt();
            let th = (-ca - cb).atan2(d + sa + sb) - (-2.0f64).atan2(p);
            Some([mod2pi(th - alpha), p, mod2pi(th - beta)])
        }
        DubinsWord::Rsl => {
            let p2 = d * d - 2.0 + 2.0 * cab - 2.0 * d * (sa + sb);
            if p2 < 0.0 {
                return None;
            }
            let p = p2.sqrt();
            let th = (ca + cb).atan2(d - sa - sb) - 2.0f64.atan2(p);
            Some([mod2pi(alpha - th), p, mod2pi(beta - th)])
        }
        DubinsWord::Rlr => {
            let c = (6.0 - d * d + 2.0 * cab + 2.0 * d * (sa - sb)) / 8.0;
            if c.abs() > 1.0 {
                return None;
            }
            let p = mod2pi(2.0 * PI - c.acos());
            let t = mod2pi(alpha - (ca - cb).atan2(d - sa + sb) + 0.5 * p);
            Some([t, p, mod2pi(alpha - beta - t + p)])
        }
        DubinsWord::Lrl => {
            let c = (6.0 - d * d + 2.0 * cab + 2.0 * d * (sb - sa)) / 8.0;
            if c.abs() > 1.0 {
                return None;
            }
            let p = mod2pi(2.0 * PI - c.acos());
            let t = mod2pi(-alpha - (ca - cb).atan2(d + sa - sb) + 0.5 * p);
            Some([t, p, mod2pi(beta - alpha - t + p)])
        }
    }
}

/// Path for one word, if that word connects the two poses.
pub fn word_path(word: DubinsWord, q0: Config, q1: Config, radius: f64) -> Option<DubinsPath> {
    let delta = q1.position - q0.position;
    let d = delta.norm() / radius;
    let phi = if d > 0.0 { delta.angle() } else { 0.0 };
    let alpha = mod2pi(q0.heading - phi);
    let beta = mod2pi(q1.heading - phi);
    word_params(word, alpha, beta, d).map(|[t, p, q]| DubinsPath {
        word,
        lengths: [t * radius, p * radius, q * radius],
        radius,
        start: q0,
    })
}

/// Every word that connects the poses, in tie-break order.
pub fn all_words(q0: Config, q1: Config, radius: f64) -> Vec<DubinsPath> {
    DubinsWord::ALL
        .iter()
        .filter_map(|&w| word_path(w, q0, q1, radius))
        .collect()
}

/// Shortest path among the six words; ties keep the earlier word.
pub fn shortest_dubins(q0: Config, q1: Config, radius: f64) -> Result<DubinsPath> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!("turning radius must be positive, got {radius}")));
    }
    let mut best: Option<DubinsPath> = None;
    for path in all_words(q0, q1, radius) {
        if best.is_none_or(|b| path.length() < b.length()) {
            best = Some(path);
        }
    }
    best.ok_or_else(|| Error::InvalidParameter("no Dubins word found".into()))
}

fn advance(c: Config, steer: Steer, len: f64, radius: f64) -> Config {
    match steer {
        Steer::Straight => Config {
            position: c.position + heading_vector(c.heading) * len,
            heading: c.heading,
        },
        Steer::Left => {
            let h = c.heading + len / radius;
            let dp = Point2::new(h.sin() - c.heading.sin(), c.heading.cos() - h.cos()) * radius;
            Config {
                position: c.position + dp,
                heading: h,
            }
        }
        Steer::Right => {
            let h = c.heading - len / radius;
            let dp = Point2::new(c.heading.sin() - h.sin(), h.cos() - c.heading.cos()) * radius;
            Config {
                position: c.position + dp,
                heading: h,
            }
        }
    }
}

impl DubinsPath {
    pub fn length(&self) -> f64 {
        self.lengths.iter().sum()
    }

    /// Pose at arclength `s` (clamped), heading unwrapped from the start heading.
    pub fn config_at(&self, s: f64) -> Config {
        let mut s = s.clamp(0.0, self.length());
        let mut c = self.start;
        for (i, steer) in self.word.segments().into_iter().enumerate() {
            let len = self.lengths[i];
            if s <= len || i == 2 {
                return advance(c, steer, s.min(len), self.radius);
            }
            c = advance(c, steer, len, self.radius);
            s -= len;
        }
        c
    }

    /// End pose with heading wrapped to (-pi, pi].
    pub fn endpoint(&self) -> Config {
        let mut c = self.start;
        for (i, steer) in self.word.segments().into_iter().enumerate() {
            c = advance(c, steer, self.lengths[i], self.radius);
        }
        c.heading = wrap_angle(c.heading);
        c
    }

    /// Signed curvature at arclength `s`.
    pub fn curvature_at(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for (i, steer) in self.word.segments().into_iter().enumerate() {
            acc += self.lengths[i];
            if s <= acc || i == 2 {
                return match steer {
                    Steer::Left => 1.0 / self.radius,
                    Steer::Right => -1.0 / self.radius,
                    Steer::Straight => 0.0,
                };
            }
        }
        0.0
    }

    /// Arclengths where one segment ends and the next begins, skipping empty segments.
    pub fn junctions(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut acc = 0.0;
        for len in &self.lengths[..2] {
            acc += len;
            if acc > 1e-9 && acc < self.length() - 1e-9 && out.last().is_none_or(|&l: &f64| acc - l > 1e-9) {
                out.push(acc);
            }
        }
        out
    }
}

/// Arclengths at multiples of `spacing`, at the segment junctions and at the end.
pub fn sample_arclengths(path: &DubinsPath, spacing: f64) -> Result<Vec<f64>> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::InvalidParameter(format!("spacing must be positive, got {spacing}")));
    }
    let total = path.length();
    let count = (total / spacing + 1e-9).floor() as usize;
    let mut s: Vec<f64> = (0..=count).map(|k| k as f64 * spacing).collect();
    s.extend(path.junctions());
    s.push(total);
    s.sort_by(f64::total_cmp);
    s.dedup_by(|b, a| (*b - *a).abs() <= 1e-9);
    let n = s.len();
    s[n - 1] = total;
    Ok(s)
}

/// Samples the path at [`sample_arclengths`].
pub fn sample_dubins(path: &DubinsPath, spacing: f64) -> Result<PathPolyline> {
    let s = sample_arclengths(path, spacing)?;
    let vertices: Vec<Point2> = s.iter().map(|&t| path.config_at(t).position).collect();
    if vertices.len() < 2 {
        return Err(Error::InvalidPath("Dubins path has zero length".into()));
    }
    PathPolyline::with_label(vertices, Label::Transition)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_connection() {
        for r in [1.0, 2.5, 5.0] {
            let p = shortest_dubins(Config::new(0.0, 0.0, 0.0), Config::new(10.0, 0.0, 0.0), r).unwrap();
            assert!((p.length() - 10.0).abs() < 1e-12);
            assert_eq!(p.word, DubinsWord::Lsl);
        }
    }

    #[test]
    fn u_turn_half_circle() {
        let p = shortest_dubins(Config::new(0.0, 0.0, 0.0), Config::new(0.0, 10.0, PI), 5.0).unwrap();
        assert!((p.length() - 5.0 * PI).abs() < 1e-9);
        let e = p.endpoint();
        assert!(e.position.dist(Point2::new(0.0, 10.0)) < 1e-9);
        assert!((wrap_angle(e.heading - PI)).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_radius() {
        assert!(shortest_dubins(Config::default(), Config::new(1.0, 0.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn sample_straight() {
        let p = shortest_dubins(Config::new(0.0, 0.0, 0.0), Config::new(10.0, 0.0, 0.0), 3.0).unwrap();
        let s = sample_dubins(&p, 1.0).unwrap();
        assert_eq!(s.len(), 11);
    }

    #[test]
    fn sample_full_circle_on_radius() {
        // Goal one lap around a left circle, forcing a long arc.
        let path = DubinsPath {
            word: DubinsWord::Lsl,
            lengths: [2.0 * PI * 5.0, 0.0, 0.0],
            radius: 5.0,
            start: Config::new(0.0, 0.0, 0.0),
        };
        let s = sample_dubins(&path, 0.1).unwrap();
        let centre = Point2::new(0.0, 5.0);
        for v in s.vertices() {
            assert!((v.dist(centre) - 5.0).abs() < 1e-6);
        }
    }

    #[test]
    fn sample_contains_junctions_once() {
        let q0 = Config::new(0.0, 0.0, 0.0);
        let q1 = Config::new(20.0, 7.3, -1.0);
        let p = shortest_dubins(q0, q1, 4.0).unwrap();
        let s = sample_dubins(&p, 1.0).unwrap();
        let mut expect = 0;
        let total = p.length();
        expect += (total / 1.0 + 1e-9).floor() as usize + 1;
        for j in p.junctions() {
            let hits = s
                .vertices()
                .iter()
                .filter(|v| v.dist(p.config_at(j).position) < 1e-9)
                .count();
            assert_eq!(hits, 1);
            if (j - j.round()).abs() > 1e-9 {
                expect += 1;
            }
        }
        if (total - total.floor()).abs() > 1e-9 {
            expect += 1;
        }
        assert_eq!(s.len(), expect);
        assert!(s.last().dist(q1.position) < 1e-9);
    }
}
