//! Size caps, with environment overrides.

use serde::Serialize;

/// Environment variables read by [`Caps::from_env`].
pub const ENV_MAX_ORDER: &str = "MACKEY_DRESS_MAX_ORDER";
pub const ENV_MAX_SUBGROUPS: &str = "MACKEY_DRESS_MAX_SUBGROUPS";
pub const ENV_MAX_DEGREE: &str = "MACKEY_DRESS_MAX_DEGREE";
pub const ENV_MAX_POINTS: &str = "MACKEY_DRESS_MAX_POINTS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Caps {
    pub max_order: usize,
    pub max_subgroups: usize,
    pub max_degree: usize,
    pub max_points: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { max_order: 200, max_subgroups: 10_000, max_degree: 3, max_points: 2_000_000 }
    }
}

impl Caps {
    /// Defaults overridden by any of the `MACKEY_DRESS_*` variables that
    /// parse as integers.
    pub fn from_env() -> Self {
        let mut caps = Caps::default();
        let read = |name: &str, slot: &mut usize| {
            if let Some(v) = std::env::var(name).ok().and_then(|s| s.trim().parse().ok()) {
                *slot = v;
            }
        };
        read(ENV_MAX_ORDER, &mut caps.max_order);
        read(ENV_MAX_SUBGROUPS, &mut caps.max_subgroups);
        read(ENV_MAX_DEGREE, &mut caps.max_degree);
        read(ENV_MAX_POINTS, &mut caps.max_points);
        caps
    }
}
