//! Textual scene-config format: TOML with a fixed schema and a canonical
//! serialization (deterministic key and list ordering) so that configs can
//! be compared byte-for-byte.

use thiserror::Error;

use crate::world::SceneConfig;

#[derive(Debug, Error)]
pub enum ParseError {
    /// Malformed document; the message carries line/column from the parser.
    #[error("scene config syntax error: {0}")]
    Syntax(String),
    /// A key that is not part of the schema; the message names it.
    #[error("scene config unknown field: {0}")]
    UnknownField(String),
    /// Structurally valid but out of range (negative sizes, out-of-bounds
    /// geometry).
    #[error("scene config value out of range at {key}: {message}")]
    OutOfRange { key: String, message: String },
}

/// Parse a scene-config document. Rejects unknown fields and grossly
/// out-of-range values; softer invariants are reported by
/// [`validate_scene`](crate::world::validate_scene).
pub fn parse_scene(text: &str) -> Result<SceneConfig, ParseError> {
    let cfg: SceneConfig = toml::from_str(text).map_err(|e| {
        let msg = e.to_string();
        if msg.contains("unknown field") {
            ParseError::UnknownField(msg)
        } else {
            ParseError::Syntax(msg)
        }
    })?;
    range_check(&cfg)?;
    Ok(cfg)
}

/// Serialize in canonical form: top-level keys in schema order, obstacles
/// and entities sorted by id. `parse_scene(serialize_scene(c))` equals
/// `c.canonicalize()`.
pub fn serialize_scene(cfg: &SceneConfig) -> String {
    let canon = cfg.canonicalize();
    toml::to_string(&canon).expect("scene serialization cannot fail")
}

fn range_check(cfg: &SceneConfig) -> Result<(), ParseError> {
    let fail = |key: &str, message: String| {
        Err(ParseError::OutOfRange {
            key: key.to_string(),
            message,
        })
    };
    if cfg.map.width == 0 || cfg.map.height == 0 {
        return fail("map", format!("{}x{} map", cfg.map.width, cfg.map.height));
    }
    if cfg.map.meters_per_pixel <= 0.0 {
        return fail(
            "map.meters_per_pixel",
            format!("{} must be positive", cfg.map.meters_per_pixel),
        );
    }
    for (i, ob) in cfg.obstacles.iter().enumerate() {
        let key = format!("obstacles[{i}].footprint");
        let r = ob.footprint;
        if r.w <= 0 || r.h <= 0 {
            return fail(&key, format!("footprint {}x{} has no area", r.w, r.h));
        }
        if r.x < 0
            || r.y < 0
            || r.x + r.w > cfg.map.width as i32
            || r.y + r.h > cfg.map.height as i32
        {
            return fail(&key, "footprint out of bounds".to_string());
        }
    }
    for (i, en) in cfg.entities.iter().enumerate() {
        if en.radius <= 0.0 {
            return fail(
                &format!("entities[{i}].radius"),
                format!("{} must be positive", en.radius),
            );
        }
        if en.speed < 0.0 {
            return fail(
                &format!("entities[{i}].speed"),
                format!("{} must be non-negative", en.speed),
            );
        }
        if en.phase < 0.0 {
            return fail(
                &format!("entities[{i}].phase"),
                format!("{} must be non-negative", en.phase),
            );
        }
        for (j, wp) in en.waypoints.iter().enumerate() {
            if !cfg.in_bounds(*wp) {
                return fail(
                    &format!("entities[{i}].waypoints[{j}]"),
                    format!("waypoint out of bounds: ({}, {})", wp.x, wp.y),
                );
            }
        }
    }
    for (i, pair) in cfg.pairs.iter().enumerate() {
        if !cfg.in_bounds(pair.start) {
            return fail(
                &format!("pairs[{i}].start"),
                format!("out of bounds: ({}, {})", pair.start.x, pair.start.y),
            );
        }
        if !cfg.in_bounds(pair.target) {
            return fail(
                &format!("pairs[{i}].target"),
                format!("out of bounds: ({}, {})", pair.target.x, pair.target.y),
            );
        }
    }
    Ok(())
}
