//! Search limits.

/// Default highest degree scanned when searching for auxiliary places.
pub const DEFAULT_DEGREE_CAP: u32 = 6;

/// Environment variable overriding the degree cap.
pub const DEGREE_CAP_ENV: &str = "WILDSETS_DEGREE_CAP";

/// The degree cap from the environment, falling back to the default.
pub fn degree_cap_from_env() -> u32 {
    std::env::var(DEGREE_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&d| d >= 1)
        .unwrap_or(DEFAULT_DEGREE_CAP)
}
